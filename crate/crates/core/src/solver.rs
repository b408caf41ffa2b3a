//! Time integration of variable-viscosity Navier–Stokes in vorticity form
//! and its Boussinesq variant.
//!
//! The vorticity step is a second-order integrating-factor Runge–Kutta
//! (Heun) scheme: the constant part `ν̄Δω` is integrated exactly in Fourier
//! space and `−u·∇ω + Δ(R_μω − ν̄ω) + ∂₁θ` is explicit. Transported fields
//! move with the velocities at both ends of the step.

use num_complex::Complex64;
use sha2::{Digest, Sha256};

use crate::diagnostics::{self, DiagnosticsRecord, RecordContext, Snapshot};
use crate::elliptic::{ab_hat, Viscosity, ViscosityBounds};
use crate::error::{Error, Result};
use crate::geometry::{interface_points, InterfaceCurve};
use crate::spectral::{
    biot_savart_unchecked, check_mean_zero, derivative, inverse_transform, laplacian, linf_norm, lp_norm, lp_norm_vec,
    transform, velocity_gradient_spectral, GradientField, Grid, ScalarField, SpectralField, VectorField,
};
use crate::transport::{
    self, advection_tendency, check_cfl, step_dtau_mu_with, step_tau_with, step_unit_tau_with, update_flow_map_with,
    AdvectionScheme, Departures, FlowMap, SchemeKind, StepVelocity,
};

/// Lower bound on `‖u‖_∞` in the advective time-step restriction.
pub const U_FLOOR: f64 = 1e-8;

/// Default blow-up threshold relative to the initial `‖ω‖_∞`.
pub const BLOW_UP_FACTOR: f64 = 1e6;

/// Which system is integrated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    Munse,
    Boussinesq,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Munse => "munse",
            Variant::Boussinesq => "boussinesq",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "munse" => Some(Variant::Munse),
            "boussinesq" => Some(Variant::Boussinesq),
            _ => None,
        }
    }
}

/// Solver parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    /// Reference viscosity; `None` selects the midpoint of the state's bounds.
    pub nu_bar: Option<f64>,
    pub cfl: f64,
    pub cg_tol: f64,
    pub t_end: f64,
    /// Time between diagnostic samples.
    pub sample_every: f64,
    /// Scheme for `μ`, `τ̄`, `∂_τ̄μ` and `τ`.
    pub scheme: AdvectionScheme,
    /// Scheme for the temperature.
    pub theta_scheme: AdvectionScheme,
    pub variant: Variant,
    /// `ε` of the `L^{2+ε}` diagnostics.
    pub epsilon: f64,
    pub blow_up_factor: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            nu_bar: None,
            cfl: 0.5,
            cg_tol: 1e-10,
            t_end: 1.0,
            sample_every: 0.1,
            scheme: AdvectionScheme::MONOTONE,
            theta_scheme: AdvectionScheme::SPECTRAL_RK,
            variant: Variant::Munse,
            epsilon: 0.5,
            blow_up_factor: BLOW_UP_FACTOR,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self, bounds: ViscosityBounds) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return bad(format!("cfl = {} must lie in (0, 1)", self.cfl));
        }
        if !(self.cg_tol > 0.0 && self.cg_tol <= 1e-4) {
            return bad(format!("cg_tol = {} must lie in (0, 1e-4]", self.cg_tol));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return bad(format!("t_end = {} must be finite and nonnegative", self.t_end));
        }
        if !(self.sample_every > 0.0) {
            return bad(format!("sample_every = {} must be positive", self.sample_every));
        }
        if !(self.epsilon > 0.0) {
            return bad(format!("epsilon = {} must be positive", self.epsilon));
        }
        if !(self.blow_up_factor > 1.0) {
            return bad("blow_up_factor must exceed 1".into());
        }
        let nu = self.nu_bar(bounds);
        if !(nu >= bounds.mu_lo && nu <= bounds.mu_hi) {
            return bad(format!(
                "nu_bar = {nu} outside viscosity bounds [{}, {}]",
                bounds.mu_lo, bounds.mu_hi
            ));
        }
        Ok(())
    }

    pub fn nu_bar(&self, bounds: ViscosityBounds) -> f64 {
        self.nu_bar.unwrap_or_else(|| bounds.midpoint())
    }
}

/// Solution state.
#[derive(Clone, Debug)]
pub struct State {
    pub t: f64,
    pub omega: ScalarField,
    pub mu: ScalarField,
    pub bounds: ViscosityBounds,
    /// Unit tangent field `τ̄`.
    pub tau: VectorField,
    /// Transported `∂_τ̄μ`.
    pub dtau_mu: ScalarField,
    pub theta: Option<ScalarField>,
    /// Unnormalized tangent field `τ`, evolved only when present.
    pub tau_raw: Option<VectorField>,
    pub flow: Option<FlowMap>,
    /// Initial interface, pushed forward by `flow` when present.
    pub interface: Option<InterfaceCurve>,
}

impl State {
    /// State at `t = 0` with `∂_τ̄μ` computed from `μ` and `τ̄`.
    pub fn new(omega: ScalarField, mu: ScalarField, bounds: ViscosityBounds, tau: VectorField) -> Result<Self> {
        let dtau_mu = transport::directional_derivative(&tau, &mu)?;
        let s = State {
            t: 0.0,
            omega,
            mu,
            bounds,
            tau,
            dtau_mu,
            theta: None,
            tau_raw: None,
            flow: None,
            interface: None,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_theta(mut self, theta: ScalarField) -> Result<Self> {
        self.grid().check_same(theta.grid())?;
        self.theta = Some(theta);
        Ok(self)
    }

    /// Also evolves the unnormalized tangent field, starting from `τ̄`.
    pub fn with_raw_tau(mut self) -> Self {
        self.tau_raw = Some(self.tau.clone());
        self
    }

    /// Tracks `curve` with a flow map starting at the identity.
    pub fn with_interface(mut self, curve: InterfaceCurve) -> Self {
        self.flow = Some(FlowMap::identity(self.grid()));
        self.interface = Some(curve);
        self
    }

    pub fn grid(&self) -> &Grid {
        self.omega.grid()
    }

    pub fn validate(&self) -> Result<()> {
        let g = self.grid();
        g.check_same(self.mu.grid())?;
        g.check_same(self.tau.grid())?;
        g.check_same(self.dtau_mu.grid())?;
        check_mean_zero(&transform(&self.omega))?;
        for v in [self.mu.min(), self.mu.max()] {
            if !self.bounds.contains(v) {
                return Err(Error::BoundsViolation {
                    lo: self.bounds.mu_lo,
                    hi: self.bounds.mu_hi,
                    value: v,
                });
            }
        }
        let dev = linf_norm(&self.tau.magnitude().map(|r| (r - 1.0).abs()));
        if dev > 1e-8 {
            return Err(Error::InvalidArgument(format!(
                "tangent field is not unit length (max deviation {dev:e})"
            )));
        }
        Ok(())
    }

    pub fn viscosity(&self) -> Result<Viscosity> {
        Viscosity::new(self.mu.clone(), self.bounds)
    }

    pub fn velocity(&self) -> VectorField {
        velocity_of(&transform(&self.omega).without_mean())
    }

    /// Current interface, if one is tracked.
    pub fn current_interface(&self) -> Result<Option<InterfaceCurve>> {
        match (&self.flow, &self.interface) {
            (Some(flow), Some(c0)) => Ok(Some(interface_points(flow, c0)?)),
            _ => Ok(None),
        }
    }

    /// SHA-256 over the little-endian bytes of every field, in a fixed order.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.t.to_le_bytes());
        let mut put = |f: &ScalarField| {
            for v in f.values() {
                h.update(v.to_le_bytes());
            }
        };
        put(&self.omega);
        put(&self.mu);
        put(&self.tau.x);
        put(&self.tau.y);
        put(&self.dtau_mu);
        if let Some(th) = &self.theta {
            put(th);
        }
        if let Some(tr) = &self.tau_raw {
            put(&tr.x);
            put(&tr.y);
        }
        if let Some(fl) = &self.flow {
            for p in fl.positions() {
                h.update(p[0].to_le_bytes());
                h.update(p[1].to_le_bytes());
            }
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn velocity_of(omega_hat: &SpectralField) -> VectorField {
    let (ux, uy) = biot_savart_unchecked(omega_hat);
    VectorField {
        x: inverse_transform(&ux),
        y: inverse_transform(&uy),
    }
}

fn velocity_and_gradient(omega_hat: &SpectralField) -> (VectorField, GradientField) {
    let (ux, uy) = biot_savart_unchecked(omega_hat);
    let grad = velocity_gradient_spectral(&ux, &uy);
    (
        VectorField {
            x: inverse_transform(&ux),
            y: inverse_transform(&uy),
        },
        grad,
    )
}

/// Time step from the advective and explicit-diffusion restrictions.
///
/// `dt = cfl·h/max(‖u‖_∞, U_FLOOR)`, further limited so the explicit part
/// `Δ(R_μ − ν̄)` stays inside the Heun stability interval:
/// `dt ≤ cfl·2/(ν_explicit·|ξ|²_max)` with `|ξ|²_max` the largest resolved
/// wavenumber. Since `|ξ|²_max·h² ≥ 2` this is never looser than
/// `cfl·h²/ν_explicit`.
pub fn cfl_dt(u: &VectorField, cfl: f64, nu_explicit: f64) -> f64 {
    let grid = u.grid();
    let umax = linf_norm(&u.magnitude()).max(U_FLOOR);
    let adv = cfl * grid.h() / umax;
    if nu_explicit > 0.0 {
        let kmax = grid.kmax() as f64 * 2.0 * std::f64::consts::PI / grid.l();
        let diff = cfl * 2.0 / (nu_explicit * 2.0 * kmax * kmax);
        adv.min(diff)
    } else {
        adv
    }
}

/// `ν_explicit = μ* − ν̄`.
pub fn nu_explicit(bounds: ViscosityBounds, nu_bar: f64) -> f64 {
    (bounds.mu_hi - nu_bar).max(nu_bar - bounds.mu_lo).max(0.0)
}

/// Per-step by-products used by the run loop.
#[derive(Clone, Debug)]
pub struct StepReport {
    pub dt: f64,
    /// `|(E₁ − E₀)/dt + ½∫μ|Su|²|` at the midpoint state, unnormalized.
    pub energy_residual: f64,
    pub grad_u_linf_start: f64,
    pub grad_u_linf_end: f64,
}

fn explicit_rhs(
    omega_hat: &SpectralField,
    u: &VectorField,
    mu: &ScalarField,
    theta: Option<&SpectralField>,
    nu_bar: f64,
) -> Result<SpectralField> {
    let adv = advection_tendency(omega_hat, u)?;
    let (a, _) = ab_hat(mu, omega_hat, false);
    let rem = a.sub(&omega_hat.scale(nu_bar))?;
    let mut out = adv.add(&laplacian(&rem))?;
    if let Some(th) = theta {
        out = out.add(&derivative(1, th).dealiased())?;
    }
    Ok(out.dealiased().without_mean())
}

fn integrating_factor(f: &SpectralField, nu_bar: f64, dt: f64) -> SpectralField {
    f.apply_symbol(|k1, k2| Complex64::new((-nu_bar * (k1 * k1 + k2 * k2) * dt).exp(), 0.0))
}

fn axpy(y: &SpectralField, s: f64, x: &SpectralField) -> SpectralField {
    let c = y.coeffs().iter().zip(x.coeffs()).map(|(a, b)| a + b * s).collect();
    SpectralField::from_raw(y.grid(), c)
}

const MIDPOINT_TOL: f64 = 1e-14;
const MIDPOINT_MAX_ITER: usize = 200;

/// Implicit midpoint step `f₁ = f₀ + dt·A(½(f₀ + f₁))` for the skew-symmetric
/// advective tendency `A`, so `‖f‖₂` is conserved up to the iteration tolerance.
fn implicit_midpoint(f0: &SpectralField, u: &VectorField, dt: f64) -> Result<SpectralField> {
    let norm = |f: &SpectralField| f.coeffs().iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let scale = norm(f0);
    let mut y = f0.clone();
    for it in 0..MIDPOINT_MAX_ITER {
        let next = axpy(f0, 0.5 * dt, &advection_tendency(&y, u)?);
        let diff = norm(&axpy(&next, -1.0, &y));
        y = next;
        if diff <= MIDPOINT_TOL * scale {
            return Ok(axpy(&y.scale(2.0), -1.0, f0));
        }
        if !diff.is_finite() || it + 1 == MIDPOINT_MAX_ITER {
            return Err(Error::NotConverged {
                iterations: it + 1,
                residual: diff / scale.max(f64::MIN_POSITIVE),
            });
        }
    }
    unreachable!()
}

fn is_constant(f: &ScalarField) -> bool {
    f.min() == f.max()
}

fn advect_with(
    f: &ScalarField,
    dep: &Departures,
    u_old: &VectorField,
    u_new: &VectorField,
    dt: f64,
    scheme: AdvectionScheme,
) -> Result<ScalarField> {
    if is_constant(f) {
        return Ok(f.clone());
    }
    match scheme.kind {
        SchemeKind::SemiLagrangian => Ok(dep.sample(f, scheme.interpolation)),
        SchemeKind::PseudoSpectralRk => {
            let fh = transform(f);
            let k1 = advection_tendency(&fh, u_old)?;
            let pred = axpy(&fh, dt, &k1);
            let k2 = advection_tendency(&pred, u_new)?;
            Ok(inverse_transform(&axpy(&axpy(&fh, 0.5 * dt, &k1), 0.5 * dt, &k2)))
        }
    }
}

fn step_impl(state: &State, cfg: &SolverConfig, dt: f64) -> Result<(State, StepReport)> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument(format!("dt = {dt} must be positive")));
    }
    let nu_bar = cfg.nu_bar(state.bounds);
    let w0 = transform(&state.omega).dealiased().without_mean();
    let (u0, g0) = velocity_and_gradient(&w0);
    check_cfl(&u0, dt)?;

    let buoyant = cfg.variant == Variant::Boussinesq;
    if buoyant && state.theta.is_none() {
        return Err(Error::InvalidArgument(
            "Boussinesq step needs a temperature field".into(),
        ));
    }
    let theta_hat0 = if buoyant {
        state.theta.as_ref().map(transform)
    } else {
        None
    };

    // predictor
    let n1 = explicit_rhs(&w0, &u0, &state.mu, theta_hat0.as_ref(), nu_bar)?;
    let w_star = integrating_factor(&axpy(&w0, dt, &n1), nu_bar, dt);
    let (u_star, g_star) = velocity_and_gradient(&w_star);
    check_cfl(&u_star, dt)?;
    let dep = Departures::compute(&u0, &u_star, dt)?;

    let mu1 = advect_with(&state.mu, &dep, &u0, &u_star, dt, cfg.scheme)?;
    for v in [mu1.min(), mu1.max()] {
        if !state.bounds.contains(v) {
            return Err(Error::BoundsViolation {
                lo: state.bounds.mu_lo,
                hi: state.bounds.mu_hi,
                value: v,
            });
        }
    }

    // temperature: predictor for the corrector's buoyancy, then the full step
    let (theta_star_hat, theta1) = match (&state.theta, cfg.theta_scheme.kind) {
        (None, _) => (None, None),
        (Some(th), SchemeKind::PseudoSpectralRk) => {
            let th0 = transform(th).dealiased();
            let k1 = advection_tendency(&th0, &u0)?;
            let pred = axpy(&th0, dt, &k1);
            let u_mid = VectorField {
                x: u0.x.add(&u_star.x)?.scale(0.5),
                y: u0.y.add(&u_star.y)?.scale(0.5),
            };
            let th1 = implicit_midpoint(&th0, &u_mid, dt)?;
            (Some(pred), Some(inverse_transform(&th1)))
        }
        (Some(th), SchemeKind::SemiLagrangian) => {
            let th1 = dep.sample(th, cfg.theta_scheme.interpolation);
            let pred = Departures::compute(&u0, &u0, dt)?.sample(th, cfg.theta_scheme.interpolation);
            (Some(transform(&pred)), Some(th1))
        }
    };

    // corrector
    let n2 = explicit_rhs(
        &w_star,
        &u_star,
        &mu1,
        if buoyant { theta_star_hat.as_ref() } else { None },
        nu_bar,
    )?;
    let w1 = axpy(
        &integrating_factor(&axpy(&w0, 0.5 * dt, &n1), nu_bar, dt),
        0.5 * dt,
        &n2,
    )
    .dealiased()
    .without_mean();
    let omega1 = inverse_transform(&w1);
    if !omega1.is_finite() {
        return Err(Error::NonFinite);
    }

    let vel = StepVelocity {
        u_old: &u0,
        u_new: &u_star,
        grad_old: &g0,
        grad_new: &g_star,
    };
    let tau1 = step_unit_tau_with(&state.tau, &vel, &dep, dt, cfg.scheme)?;
    let dtau_mu1 = step_dtau_mu_with(&state.dtau_mu, &state.tau, &tau1, &vel, &dep, dt, cfg.scheme)?;
    let tau_raw1 = match &state.tau_raw {
        Some(tr) => Some(step_tau_with(tr, &vel, &dep, dt, cfg.scheme)?),
        None => None,
    };
    let flow1 = state.flow.as_ref().map(|x| update_flow_map_with(x, &u0, &u_star, dt));

    // energy balance at the midpoint state
    let (u1, g1) = velocity_and_gradient(&w1);
    let w_mid = axpy(&w0, 1.0, &w1).scale(0.5);
    let u_mid = velocity_of(&w_mid);
    let mu_mid = state.mu.add(&mu1)?.scale(0.5);
    let mut energy_residual = diagnostics::energy_balance_residual(&u0, &u1, &u_mid, &mu_mid, dt)?;
    if let (true, Some(th)) = (buoyant, &state.theta) {
        let th_mid = th.add(theta1.as_ref().expect("theta evolved"))?.scale(0.5);
        let work = buoyancy_work(&u_mid, &th_mid);
        let e0 = 0.5 * lp_norm_vec(&u0, 2.0).powi(2);
        let e1 = 0.5 * lp_norm_vec(&u1, 2.0).powi(2);
        let d = diagnostics::dissipation(&mu_mid, &u_mid)?;
        energy_residual = ((e1 - e0) / dt + d - work).abs();
    }

    let next = State {
        t: state.t + dt,
        omega: omega1,
        mu: mu1,
        bounds: state.bounds,
        tau: tau1,
        dtau_mu: dtau_mu1,
        theta: theta1,
        tau_raw: tau_raw1,
        flow: flow1,
        interface: state.interface.clone(),
    };
    Ok((
        next,
        StepReport {
            dt,
            energy_residual,
            grad_u_linf_start: linf_norm(&g0.frobenius()),
            grad_u_linf_end: linf_norm(&g1.frobenius()),
        },
    ))
}

/// Power `∫u₂θ` of the momentum source `θe₂` behind `∂_tω = ∂₁θ`.
fn buoyancy_work(u: &VectorField, theta: &ScalarField) -> f64 {
    let s: f64 = u.y.values().iter().zip(theta.values()).map(|(a, b)| a * b).sum();
    s * u.grid().cell_area()
}

/// One step of the variable-viscosity system with step size `dt`.
pub fn step_munse(state: &State, cfg: &SolverConfig, dt: f64) -> Result<State> {
    let cfg = SolverConfig {
        variant: Variant::Munse,
        ..cfg.clone()
    };
    Ok(step_impl(state, &cfg, dt)?.0)
}

/// One step of the Boussinesq system with step size `dt`.
pub fn step_boussinesq(state: &State, cfg: &SolverConfig, dt: f64) -> Result<State> {
    let cfg = SolverConfig {
        variant: Variant::Boussinesq,
        ..cfg.clone()
    };
    Ok(step_impl(state, &cfg, dt)?.0)
}

/// One step with the configured variant, plus step by-products.
pub fn step_with_report(state: &State, cfg: &SolverConfig, dt: f64) -> Result<(State, StepReport)> {
    step_impl(state, cfg, dt)
}

/// Identifies a sampled state.
#[derive(Clone, Debug, PartialEq)]
pub struct StateDigest {
    pub t: f64,
    pub sha256: String,
    pub omega_l2: f64,
    pub mu_min: f64,
    pub mu_max: f64,
}

impl StateDigest {
    pub fn of(state: &State) -> Self {
        StateDigest {
            t: state.t,
            sha256: state.digest(),
            omega_l2: lp_norm(&state.omega, 2.0),
            mu_min: state.mu.min(),
            mu_max: state.mu.max(),
        }
    }
}

/// Sampled history of a run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trajectory {
    pub snapshots: Vec<StateDigest>,
    pub diagnostics: Vec<DiagnosticsRecord>,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.diagnostics.iter().map(|r| r.t).collect()
    }
}

/// Result of a run that may have stopped early.
#[derive(Debug)]
pub struct RunOutcome {
    pub trajectory: Trajectory,
    /// State at the last diagnostic sample.
    pub last_sample: State,
    /// State reached when the run stopped.
    pub final_state: State,
    pub steps: usize,
    /// Largest per-step energy residual over the whole run, relative to the initial energy.
    pub max_energy_residual: f64,
    pub error: Option<Error>,
}

struct Sampler {
    epsilon: f64,
    dtau_mu0: f64,
}

impl Sampler {
    fn record(&self, state: &State, int_grad: f64, residual: f64) -> Result<DiagnosticsRecord> {
        let mu = state.viscosity()?;
        let curve = state.current_interface()?;
        diagnostics::record(
            Snapshot {
                t: state.t,
                omega: &state.omega,
                mu: &mu,
                tau: &state.tau,
                dtau_mu: &state.dtau_mu,
                theta: state.theta.as_ref(),
            },
            RecordContext {
                epsilon: self.epsilon,
                int_grad_u_linf: int_grad,
                energy_residual: residual,
                dtau_mu0: self.dtau_mu0,
                interface: curve.as_ref(),
            },
        )
    }
}

/// Integrates to `cfg.t_end`, calling `observe` after every diagnostic sample.
///
/// Errors inside a step stop the run; the outcome keeps the trajectory up to
/// the last good sample and reports the error with the failing time.
pub fn run_observed(
    initial: State,
    cfg: &SolverConfig,
    mut observe: impl FnMut(&State, &DiagnosticsRecord) -> Result<()>,
) -> Result<RunOutcome> {
    initial.validate()?;
    cfg.validate(initial.bounds)?;
    if cfg.variant == Variant::Boussinesq && initial.theta.is_none() {
        return Err(Error::InvalidArgument(
            "Boussinesq runs need a temperature field".into(),
        ));
    }
    let nu_bar = cfg.nu_bar(initial.bounds);
    let nu_exp = nu_explicit(initial.bounds, nu_bar);
    let sampler = Sampler {
        epsilon: cfg.epsilon,
        dtau_mu0: lp_norm(&initial.dtau_mu, 2.0 + cfg.epsilon),
    };
    let omega_max0 = linf_norm(&initial.omega);
    let e0 = 0.5 * lp_norm_vec(&initial.velocity(), 2.0).powi(2);
    let t0 = initial.t;

    let mut traj = Trajectory::default();
    let first = sampler.record(&initial, 0.0, 0.0)?;
    observe(&initial, &first)?;
    traj.snapshots.push(StateDigest::of(&initial));
    traj.diagnostics.push(first);

    let mut state = initial;
    let mut last_sample = state.clone();
    let mut int_grad = 0.0;
    let mut window_residual: f64 = 0.0;
    let mut max_residual: f64 = 0.0;
    let mut steps = 0usize;
    let mut k = 1usize;
    let t_end = t0 + cfg.t_end;
    let eps_t = 1e-12 * cfg.t_end.max(1.0);
    let mut error = None;

    while state.t < t_end - eps_t {
        let next_sample = (t0 + k as f64 * cfg.sample_every).min(t_end);
        let u = state.velocity();
        let mut dt = cfl_dt(&u, cfg.cfl, nu_exp);
        let remaining = next_sample - state.t;
        // land exactly on the sample time without leaving a sliver step
        if dt >= remaining - eps_t {
            dt = remaining;
        } else if dt > 0.5 * remaining {
            dt = 0.5 * remaining;
        }
        let stepped = step_impl(&state, cfg, dt);
        let (mut next, report) = match stepped {
            Ok(v) => v,
            Err(e) => {
                error = Some(Error::StepFailed {
                    t: state.t,
                    source: Box::new(e),
                });
                break;
            }
        };
        steps += 1;
        let landed = (next.t - next_sample).abs() <= eps_t;
        if landed {
            next.t = next_sample;
        }
        int_grad += 0.5 * dt * (report.grad_u_linf_start + report.grad_u_linf_end);
        let rel = if e0 > 0.0 {
            report.energy_residual / e0
        } else {
            report.energy_residual
        };
        window_residual = window_residual.max(rel);
        max_residual = max_residual.max(rel);
        let wmax = linf_norm(&next.omega);
        if omega_max0 > 0.0 && wmax > cfg.blow_up_factor * omega_max0 {
            error = Some(Error::BlowUp { t: next.t, value: wmax });
            state = next;
            break;
        }
        state = next;
        if landed {
            match sampler.record(&state, int_grad, window_residual) {
                Ok(rec) => {
                    if let Err(e) = observe(&state, &rec) {
                        error = Some(e);
                        break;
                    }
                    traj.snapshots.push(StateDigest::of(&state));
                    traj.diagnostics.push(rec);
                    last_sample = state.clone();
                }
                Err(e) => {
                    error = Some(Error::StepFailed {
                        t: state.t,
                        source: Box::new(e),
                    });
                    break;
                }
            }
            window_residual = 0.0;
            k += 1;
        }
    }
    Ok(RunOutcome {
        trajectory: traj,
        last_sample,
        final_state: state,
        steps,
        max_energy_residual: max_residual,
        error,
    })
}

/// Integrates to `cfg.t_end` and returns the sampled trajectory.
pub fn run(initial: State, cfg: &SolverConfig) -> Result<Trajectory> {
    let out = run_observed(initial, cfg, |_, _| Ok(()))?;
    match out.error {
        Some(e) => Err(e),
        None => Ok(out.trajectory),
    }
}
