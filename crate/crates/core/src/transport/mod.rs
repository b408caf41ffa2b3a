//! Transport of viscosity, tangent fields, tangential derivatives, scalars
//! and the Lagrangian flow map.
//!
//! Semi-Lagrangian steps backtrack characteristics with an RK2 midpoint rule
//! and interpolate at departure points. Stretching sources are applied by
//! Strang splitting around the advection with exact pointwise solutions of
//! the source ODEs.

mod flow;
mod interp;

pub use flow::FlowMap;
pub use interp::{interpolate, Interpolation};

use interp::{cubic, cubic_unit};

use crate::error::{Error, Result};
use crate::spectral::{
    derivative, inverse_transform, linf_norm, transform, velocity_gradient, GradientField, ScalarField, SpectralField,
    VectorField,
};

/// Time discretization used for a transported quantity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SchemeKind {
    SemiLagrangian,
    /// Skew-symmetric pseudo-spectral tendency inside the caller's RK2 integrator.
    PseudoSpectralRk,
}

impl SchemeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SchemeKind::SemiLagrangian => "semi_lagrangian",
            SchemeKind::PseudoSpectralRk => "pseudo_spectral_rk",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "semi_lagrangian" | "semi_lagrangian_spectral" => Some(SchemeKind::SemiLagrangian),
            "pseudo_spectral_rk" => Some(SchemeKind::PseudoSpectralRk),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AdvectionScheme {
    pub kind: SchemeKind,
    pub interpolation: Interpolation,
}

impl AdvectionScheme {
    /// Bound-preserving default for viscosity and tangent fields.
    pub const MONOTONE: AdvectionScheme = AdvectionScheme {
        kind: SchemeKind::SemiLagrangian,
        interpolation: Interpolation::MonotoneCubic,
    };

    pub const SPECTRAL_RK: AdvectionScheme = AdvectionScheme {
        kind: SchemeKind::PseudoSpectralRk,
        interpolation: Interpolation::Fourier,
    };

    /// Whether the scheme may carry a mollified jump.
    pub fn admits_discontinuous(&self) -> bool {
        self.kind == SchemeKind::SemiLagrangian
            && matches!(self.interpolation, Interpolation::MonotoneCubic | Interpolation::Cubic)
    }
}

impl Default for AdvectionScheme {
    fn default() -> Self {
        Self::MONOTONE
    }
}

/// Largest Courant number `dt·‖u‖∞/h` accepted by transport steps.
pub const MAX_COURANT: f64 = 1.0;

pub fn courant_number(u: &VectorField, dt: f64) -> f64 {
    let umax = linf_norm(&u.magnitude());
    dt * umax / u.grid().h()
}

pub(crate) fn check_cfl(u: &VectorField, dt: f64) -> Result<()> {
    let c = courant_number(u, dt);
    if c > MAX_COURANT {
        Err(Error::Cfl(c))
    } else {
        Ok(())
    }
}

/// Departure points of the characteristics arriving at every node.
#[derive(Clone, Debug)]
pub struct Departures {
    points: Vec<[f64; 2]>,
}

impl Departures {
    /// RK2 midpoint backtracking over one step with the velocity at the
    /// start (`u_old`) and end (`u_new`) of the step.
    pub fn compute(u_old: &VectorField, u_new: &VectorField, dt: f64) -> Result<Self> {
        u_old.grid().check_same(u_new.grid())?;
        let grid = u_old.grid();
        let n = grid.n();
        let ux = u_old.x.add(&u_new.x)?.scale(0.5);
        let uy = u_old.y.add(&u_new.y)?.scale(0.5);
        let mut points = Vec::with_capacity(grid.len());
        for j in 0..n {
            for i in 0..n {
                let idx = j * n + i;
                let x = [grid.coord(i), grid.coord(j)];
                let mid = [
                    x[0] - 0.5 * dt * u_new.x.values()[idx],
                    x[1] - 0.5 * dt * u_new.y.values()[idx],
                ];
                let v = [cubic(&ux, mid, false), cubic(&uy, mid, false)];
                points.push([x[0] - dt * v[0], x[1] - dt * v[1]]);
            }
        }
        Ok(Departures { points })
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    pub fn sample(&self, f: &ScalarField, rule: Interpolation) -> ScalarField {
        ScalarField::from_raw(f.grid(), interpolate(f, &self.points, rule))
    }
}

/// Skew-symmetric advective tendency `−T(½(u·∇f + ∇·(uf)))` in Fourier space.
pub fn advection_tendency(f: &SpectralField, u: &VectorField) -> Result<SpectralField> {
    f.grid().check_same(u.grid())?;
    let fx = inverse_transform(&derivative(1, f));
    let fy = inverse_transform(&derivative(2, f));
    let fp = inverse_transform(f);
    let ugrad: Vec<f64> = (0..fp.values().len())
        .map(|i| u.x.values()[i] * fx.values()[i] + u.y.values()[i] * fy.values()[i])
        .collect();
    let grid = f.grid();
    let adv = transform(&ScalarField::from_raw(grid, ugrad));
    let fux = transform(&fp.mul(&u.x)?);
    let fuy = transform(&fp.mul(&u.y)?);
    let div = derivative(1, &fux).add(&derivative(2, &fuy))?;
    Ok(adv.add(&div)?.scale(-0.5).dealiased())
}

/// One transport step `∂_tf + u·∇f = 0` with a frozen velocity.
pub fn advect_scalar(f: &ScalarField, u: &VectorField, dt: f64, scheme: AdvectionScheme) -> Result<ScalarField> {
    f.grid().check_same(u.grid())?;
    check_cfl(u, dt)?;
    match scheme.kind {
        SchemeKind::SemiLagrangian => {
            let d = Departures::compute(u, u, dt)?;
            Ok(d.sample(f, scheme.interpolation))
        }
        SchemeKind::PseudoSpectralRk => {
            let fh = transform(f);
            let k1 = advection_tendency(&fh, u)?;
            let mut pred = fh.clone();
            add_scaled(&mut pred, dt, &k1);
            let k2 = advection_tendency(&pred, u)?;
            let mut out = fh;
            add_scaled(&mut out, 0.5 * dt, &k1);
            add_scaled(&mut out, 0.5 * dt, &k2);
            Ok(inverse_transform(&out))
        }
    }
}

pub(crate) fn add_scaled(y: &mut SpectralField, s: f64, x: &SpectralField) {
    for (a, b) in y.coeffs_mut().iter_mut().zip(x.coeffs()) {
        *a += b * s;
    }
}

/// `exp(M)` for a real 2×2 matrix.
pub fn expm2(m: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let half_tr = 0.5 * (m[0][0] + m[1][1]);
    let a = m[0][0] - half_tr;
    let b = m[0][1];
    let c = m[1][0];
    // traceless part squares to δ·I
    let delta = a * a + b * c;
    let (ch, sh) = if delta.abs() < 1e-12 {
        (1.0 + delta / 2.0, 1.0 + delta / 6.0)
    } else if delta > 0.0 {
        let s = delta.sqrt();
        (s.cosh(), s.sinh() / s)
    } else {
        let s = (-delta).sqrt();
        (s.cos(), s.sin() / s)
    };
    let e = half_tr.exp();
    [[e * (ch + sh * a), e * sh * b], [e * sh * c, e * (ch - sh * a)]]
}

fn stretch(tau: &VectorField, grad: &GradientField, s: f64, normalize: bool) -> VectorField {
    let len = tau.x.values().len();
    let mut x = Vec::with_capacity(len);
    let mut y = Vec::with_capacity(len);
    for idx in 0..len {
        let g = grad.at(idx);
        let e = expm2([[g[0][0] * s, g[0][1] * s], [g[1][0] * s, g[1][1] * s]]);
        let tx = tau.x.values()[idx];
        let ty = tau.y.values()[idx];
        let mut vx = e[0][0] * tx + e[0][1] * ty;
        let mut vy = e[1][0] * tx + e[1][1] * ty;
        if normalize {
            let r = vx.hypot(vy);
            vx /= r;
            vy /= r;
        }
        x.push(vx);
        y.push(vy);
    }
    VectorField {
        x: ScalarField::from_raw(tau.grid(), x),
        y: ScalarField::from_raw(tau.grid(), y),
    }
}

fn sample_vector(d: &Departures, v: &VectorField, rule: Interpolation) -> VectorField {
    VectorField {
        x: d.sample(&v.x, rule),
        y: d.sample(&v.y, rule),
    }
}

/// Velocity and its gradient at the two ends of a step.
#[derive(Clone, Debug)]
pub struct StepVelocity<'a> {
    pub u_old: &'a VectorField,
    pub u_new: &'a VectorField,
    pub grad_old: &'a GradientField,
    pub grad_new: &'a GradientField,
}

/// Whether unit fields are transported through their angle, which keeps
/// them unit length across jumps.
fn angle_transport(scheme: AdvectionScheme) -> bool {
    scheme.kind == SchemeKind::SemiLagrangian && scheme.interpolation != Interpolation::Fourier
}

fn sample_unit(d: &Departures, v: &VectorField, clip: bool) -> VectorField {
    let grid = v.grid();
    let angles: Vec<f64> =
        v.x.values()
            .iter()
            .zip(v.y.values())
            .map(|(x, y)| y.atan2(*x))
            .collect();
    let (x, y): (Vec<f64>, Vec<f64>) = d
        .points
        .iter()
        .map(|p| {
            let e = cubic_unit(&angles, grid, *p, clip);
            (e[0], e[1])
        })
        .unzip();
    VectorField {
        x: ScalarField::from_raw(grid, x),
        y: ScalarField::from_raw(grid, y),
    }
}

fn advect_vector_field(
    v: &VectorField,
    vel: &StepVelocity<'_>,
    dep: &Departures,
    dt: f64,
    scheme: AdvectionScheme,
) -> Result<VectorField> {
    match scheme.kind {
        SchemeKind::SemiLagrangian => Ok(sample_vector(dep, v, scheme.interpolation)),
        SchemeKind::PseudoSpectralRk => {
            let mut out = Vec::with_capacity(2);
            for c in [&v.x, &v.y] {
                let fh = transform(c);
                let k1 = advection_tendency(&fh, vel.u_old)?;
                let mut pred = fh.clone();
                add_scaled(&mut pred, dt, &k1);
                let k2 = advection_tendency(&pred, vel.u_new)?;
                let mut o = fh;
                add_scaled(&mut o, 0.5 * dt, &k1);
                add_scaled(&mut o, 0.5 * dt, &k2);
                out.push(inverse_transform(&o));
            }
            let y = out.pop().expect("two components");
            let x = out.pop().expect("two components");
            Ok(VectorField { x, y })
        }
    }
}

pub(crate) fn step_tau_with(
    tau: &VectorField,
    vel: &StepVelocity<'_>,
    dep: &Departures,
    dt: f64,
    scheme: AdvectionScheme,
) -> Result<VectorField> {
    let half = stretch(tau, vel.grad_old, 0.5 * dt, false);
    let moved = advect_vector_field(&half, vel, dep, dt, scheme)?;
    Ok(stretch(&moved, vel.grad_new, 0.5 * dt, false))
}

pub(crate) fn step_unit_tau_with(
    tau: &VectorField,
    vel: &StepVelocity<'_>,
    dep: &Departures,
    dt: f64,
    scheme: AdvectionScheme,
) -> Result<VectorField> {
    let half = stretch(tau, vel.grad_old, 0.5 * dt, true);
    if angle_transport(scheme) {
        let clip = scheme.interpolation == Interpolation::MonotoneCubic;
        let moved = sample_unit(dep, &half, clip);
        return Ok(stretch(&moved, vel.grad_new, 0.5 * dt, true));
    }
    let moved = advect_vector_field(&half, vel, dep, dt, scheme)?;
    let mag = moved.magnitude();
    let min = mag.min();
    if min < 0.5 {
        return Err(Error::DegenerateTangent(min));
    }
    let unit = VectorField {
        x: moved.x.zip_map(&mag, |a, r| a / r)?,
        y: moved.y.zip_map(&mag, |a, r| a / r)?,
    };
    Ok(stretch(&unit, vel.grad_new, 0.5 * dt, true))
}

/// Pointwise stretching rate `τ̄·(∇u)τ̄`.
fn stretching_rate(tau: &VectorField, grad: &GradientField) -> Vec<f64> {
    (0..tau.x.values().len())
        .map(|idx| {
            let g = grad.at(idx);
            let tx = tau.x.values()[idx];
            let ty = tau.y.values()[idx];
            tx * (g[0][0] * tx + g[0][1] * ty) + ty * (g[1][0] * tx + g[1][1] * ty)
        })
        .collect()
}

fn damp(g: &ScalarField, rate: &[f64], s: f64) -> ScalarField {
    ScalarField::from_raw(
        g.grid(),
        g.values().iter().zip(rate).map(|(v, r)| v * (-s * r).exp()).collect(),
    )
}

pub(crate) fn step_dtau_mu_with(
    g: &ScalarField,
    tau_old: &VectorField,
    tau_new: &VectorField,
    vel: &StepVelocity<'_>,
    dep: &Departures,
    dt: f64,
    scheme: AdvectionScheme,
) -> Result<ScalarField> {
    let half = damp(g, &stretching_rate(tau_old, vel.grad_old), 0.5 * dt);
    let moved = match scheme.kind {
        SchemeKind::SemiLagrangian => dep.sample(&half, scheme.interpolation),
        SchemeKind::PseudoSpectralRk => {
            let fh = transform(&half);
            let k1 = advection_tendency(&fh, vel.u_old)?;
            let mut pred = fh.clone();
            add_scaled(&mut pred, dt, &k1);
            let k2 = advection_tendency(&pred, vel.u_new)?;
            let mut o = fh;
            add_scaled(&mut o, 0.5 * dt, &k1);
            add_scaled(&mut o, 0.5 * dt, &k2);
            inverse_transform(&o)
        }
    };
    Ok(damp(&moved, &stretching_rate(tau_new, vel.grad_new), 0.5 * dt))
}

fn frozen<'a>(u: &'a VectorField, grad: &'a GradientField) -> StepVelocity<'a> {
    StepVelocity {
        u_old: u,
        u_new: u,
        grad_old: grad,
        grad_new: grad,
    }
}

/// `∂_tτ + u·∇τ = τ·∇u` over one step with frozen `u`.
pub fn step_tau(tau: &VectorField, u: &VectorField, dt: f64, scheme: AdvectionScheme) -> Result<VectorField> {
    tau.grid().check_same(u.grid())?;
    check_cfl(u, dt)?;
    let grad = velocity_gradient(u);
    let dep = Departures::compute(u, u, dt)?;
    step_tau_with(tau, &frozen(u, &grad), &dep, dt, scheme)
}

/// Unit tangent step `∂_tτ̄ + u·∇τ̄ = ∂_τ̄u − τ̄(τ̄⊗τ̄ : ∇u)` followed by renormalization.
pub fn step_unit_tau(tau: &VectorField, u: &VectorField, dt: f64, scheme: AdvectionScheme) -> Result<VectorField> {
    tau.grid().check_same(u.grid())?;
    let dev = linf_norm(&tau.magnitude().map(|r| (r - 1.0).abs()));
    if dev > 1e-8 {
        return Err(Error::InvalidArgument(format!(
            "tangent field is not unit length (max deviation {dev:e})"
        )));
    }
    check_cfl(u, dt)?;
    let grad = velocity_gradient(u);
    let dep = Departures::compute(u, u, dt)?;
    step_unit_tau_with(tau, &frozen(u, &grad), &dep, dt, scheme)
}

/// `∂_tg + u·∇g = −g(τ̄·∂_τ̄u)` for `g = ∂_τ̄μ`, with frozen `u` and `τ̄`.
pub fn step_dtau_mu(
    g: &ScalarField,
    tau: &VectorField,
    u: &VectorField,
    dt: f64,
    scheme: AdvectionScheme,
) -> Result<ScalarField> {
    g.grid().check_same(u.grid())?;
    check_cfl(u, dt)?;
    let grad = velocity_gradient(u);
    let dep = Departures::compute(u, u, dt)?;
    step_dtau_mu_with(g, tau, tau, &frozen(u, &grad), &dep, dt, scheme)
}

pub(crate) fn update_flow_map_with(x: &FlowMap, u_old: &VectorField, u_new: &VectorField, dt: f64) -> FlowMap {
    let ux = u_old.x.add(&u_new.x).expect("same grid").scale(0.5);
    let uy = u_old.y.add(&u_new.y).expect("same grid").scale(0.5);
    let next = x
        .positions()
        .iter()
        .map(|p| {
            let mid = [
                p[0] + 0.5 * dt * cubic(&u_old.x, *p, false),
                p[1] + 0.5 * dt * cubic(&u_old.y, *p, false),
            ];
            [p[0] + dt * cubic(&ux, mid, false), p[1] + dt * cubic(&uy, mid, false)]
        })
        .collect();
    x.advanced(next, dt)
}

/// RK2 update of the node positions by the interpolated velocity.
pub fn update_flow_map(x: &FlowMap, u: &VectorField, dt: f64) -> Result<FlowMap> {
    x.grid().check_same(u.grid())?;
    Ok(update_flow_map_with(x, u, u, dt))
}

/// Directional derivative `∂_τf = τ·∇f` computed spectrally.
pub fn directional_derivative(tau: &VectorField, f: &ScalarField) -> Result<ScalarField> {
    tau.grid().check_same(f.grid())?;
    let fh = transform(f);
    let fx = inverse_transform(&derivative(1, &fh));
    let fy = inverse_transform(&derivative(2, &fh));
    let v = (0..f.values().len())
        .map(|i| tau.x.values()[i] * fx.values()[i] + tau.y.values()[i] * fy.values()[i])
        .collect();
    Ok(ScalarField::from_raw(f.grid(), v))
}
