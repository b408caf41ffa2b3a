//! Measurable quantities along a run: good unknowns, tangential stress,
//! energy balance, Lipschitz and smallness estimates, commutator probes and
//! decay fits.

use crate::elliptic::{apply_p1, apply_p2, apply_rmu_qmu, Viscosity};
use crate::error::{Error, Result};
use crate::geometry::InterfaceCurve;
use crate::random::{random_smooth_field, rng};
use crate::spectral::{
    derivative, gradient, inverse_laplacian_unchecked, inverse_transform, linf_norm, lp_norm, lp_norm_multi,
    lp_norm_vec, riesz2, sobolev_norm_vec, strain, transform, velocity_gradient, ScalarField, SpectralField,
    VectorField,
};
use crate::transport::{directional_derivative, interpolate, Interpolation};

/// Column names of [`DiagnosticsRecord`], in CSV order.
pub const RECORD_COLUMNS: [&str; 27] = [
    "t",
    "energy",
    "grad_u_l2",
    "omega_l2",
    "omega_l2eps",
    "a_l2",
    "grad_a_l2",
    "a_l2eps",
    "grad_a_l2eps",
    "b_l2",
    "grad_u_linf",
    "int_grad_u_linf",
    "v_factor",
    "grad_tau_l2eps",
    "dtau_mu_l2eps",
    "dtau_mu_bound",
    "energy_residual",
    "bracket",
    "bracket_ok",
    "mu_min",
    "mu_max",
    "theta_l2",
    "lipschitz_lhs",
    "lipschitz_rhs",
    "interface_max_a_alpha",
    "interface_ratio",
    "curvature_l2eps",
];

/// One sample of the run diagnostics.
///
/// Norms with `l2eps` in their name are `L^{2+ε}` norms for the ε stored in
/// `epsilon`. Interface columns are `None` when no interface is tracked.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub epsilon: f64,
    /// `‖u‖₂²`.
    pub energy: f64,
    pub grad_u_l2: f64,
    pub omega_l2: f64,
    pub omega_l2eps: f64,
    pub a_l2: f64,
    pub grad_a_l2: f64,
    pub a_l2eps: f64,
    pub grad_a_l2eps: f64,
    pub b_l2: f64,
    pub grad_u_linf: f64,
    /// `∫₀ᵗ‖∇u‖_∞`.
    pub int_grad_u_linf: f64,
    /// `V(t) = exp(∫₀ᵗ‖∇u‖_∞)`.
    pub v_factor: f64,
    pub grad_tau_l2eps: f64,
    pub dtau_mu_l2eps: f64,
    /// `‖∂_τ̄₀μ₀‖_{2+ε}·V(t)`.
    pub dtau_mu_bound: f64,
    pub energy_residual: f64,
    /// `⟨a, ω⟩/‖ω‖₂²` (zero when `ω = 0`).
    pub bracket: f64,
    pub bracket_ok: bool,
    pub mu_min: f64,
    pub mu_max: f64,
    pub theta_l2: Option<f64>,
    pub lipschitz_lhs: f64,
    pub lipschitz_rhs: f64,
    pub interface_max_a_alpha: Option<f64>,
    pub interface_ratio: Option<f64>,
    pub curvature_l2eps: Option<f64>,
}

impl DiagnosticsRecord {
    /// Values in [`RECORD_COLUMNS`] order; `None` for absent optional entries.
    pub fn values(&self) -> [Option<f64>; 27] {
        [
            Some(self.t),
            Some(self.energy),
            Some(self.grad_u_l2),
            Some(self.omega_l2),
            Some(self.omega_l2eps),
            Some(self.a_l2),
            Some(self.grad_a_l2),
            Some(self.a_l2eps),
            Some(self.grad_a_l2eps),
            Some(self.b_l2),
            Some(self.grad_u_linf),
            Some(self.int_grad_u_linf),
            Some(self.v_factor),
            Some(self.grad_tau_l2eps),
            Some(self.dtau_mu_l2eps),
            Some(self.dtau_mu_bound),
            Some(self.energy_residual),
            Some(self.bracket),
            Some(if self.bracket_ok { 1.0 } else { 0.0 }),
            Some(self.mu_min),
            Some(self.mu_max),
            self.theta_l2,
            Some(self.lipschitz_lhs),
            Some(self.lipschitz_rhs),
            self.interface_max_a_alpha,
            self.interface_ratio,
            self.curvature_l2eps,
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.values().iter().flatten().all(|v| v.is_finite())
    }

    /// Inverse of [`values`](Self::values); `None` in a required column is an error.
    pub fn from_values(epsilon: f64, v: &[Option<f64>]) -> Result<Self> {
        if v.len() != RECORD_COLUMNS.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} values, got {}",
                RECORD_COLUMNS.len(),
                v.len()
            )));
        }
        let req = |i: usize| {
            v[i].ok_or_else(|| Error::InvalidArgument(format!("column `{}` is required", RECORD_COLUMNS[i])))
        };
        Ok(DiagnosticsRecord {
            t: req(0)?,
            epsilon,
            energy: req(1)?,
            grad_u_l2: req(2)?,
            omega_l2: req(3)?,
            omega_l2eps: req(4)?,
            a_l2: req(5)?,
            grad_a_l2: req(6)?,
            a_l2eps: req(7)?,
            grad_a_l2eps: req(8)?,
            b_l2: req(9)?,
            grad_u_linf: req(10)?,
            int_grad_u_linf: req(11)?,
            v_factor: req(12)?,
            grad_tau_l2eps: req(13)?,
            dtau_mu_l2eps: req(14)?,
            dtau_mu_bound: req(15)?,
            energy_residual: req(16)?,
            bracket: req(17)?,
            bracket_ok: req(18)? != 0.0,
            mu_min: req(19)?,
            mu_max: req(20)?,
            theta_l2: v[21],
            lipschitz_lhs: req(22)?,
            lipschitz_rhs: req(23)?,
            interface_max_a_alpha: v[24],
            interface_ratio: v[25],
            curvature_l2eps: v[26],
        })
    }
}

/// `(a, b) = (R_μω, Q_μω)`.
pub fn good_unknowns(mu: &Viscosity, omega: &ScalarField) -> Result<(ScalarField, ScalarField)> {
    apply_rmu_qmu(mu, omega)
}

fn check_unit(tau: &VectorField) -> Result<()> {
    let dev = linf_norm(&tau.magnitude().map(|r| (r - 1.0).abs()));
    if dev > 1e-8 {
        return Err(Error::InvalidArgument(format!(
            "tangent field is not unit length (max deviation {dev:e})"
        )));
    }
    Ok(())
}

/// `α = τ̄·(μSu n)` with `n = τ̄⊥`, evaluated pointwise from the strain.
pub fn good_unknown_alpha(mu: &ScalarField, u: &VectorField, tau: &VectorField) -> Result<ScalarField> {
    mu.grid().check_same(u.grid())?;
    mu.grid().check_same(tau.grid())?;
    check_unit(tau)?;
    let s = strain(u);
    let v = (0..mu.values().len())
        .map(|i| {
            let (t1, t2) = (tau.x.values()[i], tau.y.values()[i]);
            let (n1, n2) = (-t2, t1);
            let (s11, s12, s22) = (s.s11.values()[i], s.s12.values()[i], s.s22.values()[i]);
            mu.values()[i] * (t1 * (s11 * n1 + s12 * n2) + t2 * (s12 * n1 + s22 * n2))
        })
        .collect();
    Ok(ScalarField::from_raw(mu.grid(), v))
}

/// Relative `L²` residual of `∂_nu = (α/μ)τ̄ − 2(n·∂_τ̄u)τ̄ − (∂_τ̄u)⊥`.
pub fn alpha_reform_check(mu: &ScalarField, u: &VectorField, tau: &VectorField, alpha: &ScalarField) -> Result<f64> {
    mu.grid().check_same(u.grid())?;
    mu.grid().check_same(tau.grid())?;
    mu.grid().check_same(alpha.grid())?;
    if !(mu.min() > 0.0) {
        return Err(Error::InvalidArgument("viscosity must be positive".into()));
    }
    let g = velocity_gradient(u);
    let mut diff = 0.0;
    let mut norm = 0.0;
    for i in 0..mu.values().len() {
        let m = g.at(i);
        let (t1, t2) = (tau.x.values()[i], tau.y.values()[i]);
        let (n1, n2) = (-t2, t1);
        let dn = [m[0][0] * n1 + m[0][1] * n2, m[1][0] * n1 + m[1][1] * n2];
        let dt = [m[0][0] * t1 + m[0][1] * t2, m[1][0] * t1 + m[1][1] * t2];
        let k = alpha.values()[i] / mu.values()[i] - 2.0 * (n1 * dt[0] + n2 * dt[1]);
        let rhs = [k * t1 + dt[1], k * t2 - dt[0]];
        diff += (dn[0] - rhs[0]).powi(2) + (dn[1] - rhs[1]).powi(2);
        norm += dn[0] * dn[0] + dn[1] * dn[1];
    }
    Ok(if norm > 0.0 { (diff / norm).sqrt() } else { diff.sqrt() })
}

fn dir_hat(t1: &ScalarField, t2: &ScalarField, fh: &SpectralField) -> ScalarField {
    let fx = inverse_transform(&derivative(1, fh));
    let fy = inverse_transform(&derivative(2, fh));
    let v = (0..fx.values().len())
        .map(|i| t1.values()[i] * fx.values()[i] + t2.values()[i] * fy.values()[i])
        .collect();
    ScalarField::from_raw(fx.grid(), v)
}

fn pointwise(fields: &[&ScalarField], f: impl Fn(&[f64]) -> f64) -> ScalarField {
    let grid = fields[0].grid();
    let mut buf = vec![0.0; fields.len()];
    let v = (0..grid.len())
        .map(|i| {
            for (b, fld) in buf.iter_mut().zip(fields) {
                *b = fld.values()[i];
            }
            f(&buf)
        })
        .collect();
    ScalarField::from_raw(grid, v)
}

/// Relative `L²` residual of the gradient identity linking `a + α` to
/// tangential derivatives of the stress potentials.
///
/// With `ω₁ = μP₁ω`, `ω₂ = μP₂ω`, `c = τ̄₂² − τ̄₁²`, `s = 2τ̄₁τ̄₂` and `n = τ̄⊥`,
/// the right-hand side is `∇Δ⁻¹[div(τ̄∂_τ̄α + F + H) + ∇⊥·G]` where
/// `F = τ̄(c∂_τ̄ω₁ + s∂_τ̄ω₂) + 2n(s∂_τ̄ω₁ − c∂_τ̄ω₂)`,
/// `G = −ω₁∇s + ω₂∇c` and `H = (ω₁∂_nc + ω₂∂_ns)n`.
pub fn alpha_a_relation_residual(
    a: &ScalarField,
    alpha: &ScalarField,
    mu: &ScalarField,
    omega: &ScalarField,
    tau: &VectorField,
) -> Result<f64> {
    let grid = a.grid();
    for g in [alpha.grid(), mu.grid(), omega.grid(), tau.grid()] {
        grid.check_same(g)?;
    }
    let (t1, t2) = (&tau.x, &tau.y);
    let n1 = t2.scale(-1.0);
    let n2 = t1.clone();
    let w1 = mu.mul(&apply_p1(omega))?;
    let w2 = mu.mul(&apply_p2(omega))?;
    let c = pointwise(&[t1, t2], |v| v[1] * v[1] - v[0] * v[0]);
    let s = pointwise(&[t1, t2], |v| 2.0 * v[0] * v[1]);
    let (w1h, w2h, ch, sh) = (transform(&w1), transform(&w2), transform(&c), transform(&s));
    let dw1 = dir_hat(t1, t2, &w1h);
    let dw2 = dir_hat(t1, t2, &w2h);
    let dalpha = dir_hat(t1, t2, &transform(alpha));
    let dnc = dir_hat(&n1, &n2, &ch);
    let dns = dir_hat(&n1, &n2, &sh);
    let grad_c = gradient(&c);
    let grad_s = gradient(&s);

    // W = τ̄∂_τ̄α + F + H
    let tang = pointwise(&[&c, &s, &dw1, &dw2, &dalpha], |v| v[0] * v[2] + v[1] * v[3] + v[4]);
    let norm_coef = pointwise(&[&c, &s, &dw1, &dw2, &w1, &w2, &dnc, &dns], |v| {
        2.0 * (v[1] * v[2] - v[0] * v[3]) + v[4] * v[6] + v[5] * v[7]
    });
    let wx = pointwise(&[t1, &n1, &tang, &norm_coef], |v| v[0] * v[2] + v[1] * v[3]);
    let wy = pointwise(&[t2, &n2, &tang, &norm_coef], |v| v[0] * v[2] + v[1] * v[3]);
    let gx = pointwise(&[&w1, &w2, &grad_s.x, &grad_c.x], |v| -v[0] * v[2] + v[1] * v[3]);
    let gy = pointwise(&[&w1, &w2, &grad_s.y, &grad_c.y], |v| -v[0] * v[2] + v[1] * v[3]);

    let (wxh, wyh, gxh, gyh) = (transform(&wx), transform(&wy), transform(&gx), transform(&gy));
    let src = derivative(1, &wxh)
        .add(&derivative(2, &wyh))?
        .add(&derivative(1, &gyh))?
        .sub(&derivative(2, &gxh))?
        .without_mean();
    let phi = inverse_laplacian_unchecked(&src);
    let sum = transform(&a.add(alpha)?);
    let mut diff = 0.0;
    let mut norm = 0.0;
    for j in 1..=2 {
        let lhs = inverse_transform(&derivative(j, &sum));
        let rhs = inverse_transform(&derivative(j, &phi));
        diff += lhs.sub(&rhs)?.values().iter().map(|v| v * v).sum::<f64>();
        norm += lhs.values().iter().map(|v| v * v).sum::<f64>();
    }
    Ok(if norm > 0.0 { (diff / norm).sqrt() } else { diff.sqrt() })
}

/// `a + α` sampled along an interface.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InterfaceAlphaCheck {
    pub max_abs: f64,
    /// Arclength `L²` norm of `a + α` along the curve.
    pub l2: f64,
    /// `max|a + α|` on the curve over `max|a|` on the grid.
    pub ratio: f64,
}

/// Interpolates `a` and `α` onto the curve nodes and measures `a + α`.
pub fn interface_alpha_check(
    a: &ScalarField,
    alpha: &ScalarField,
    curve: &InterfaceCurve,
) -> Result<InterfaceAlphaCheck> {
    a.grid().check_same(alpha.grid())?;
    if curve.is_empty() {
        return Err(Error::Geometry("empty interface curve".into()));
    }
    let av = interpolate(a, &curve.points, Interpolation::Cubic);
    let bv = interpolate(alpha, &curve.points, Interpolation::Cubic);
    let m = curve.len();
    let sums: Vec<f64> = av.iter().zip(&bv).map(|(x, y)| x + y).collect();
    let max_abs = sums.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let mut l2 = 0.0;
    for i in 0..m {
        let p = curve.points[i];
        let q = curve.points[(i + 1) % m];
        let ds = (q[0] - p[0]).hypot(q[1] - p[1]);
        l2 += 0.5 * (sums[i].powi(2) + sums[(i + 1) % m].powi(2)) * ds;
    }
    let amax = linf_norm(a);
    Ok(InterfaceAlphaCheck {
        max_abs,
        l2: l2.sqrt(),
        ratio: if amax > 0.0 { max_abs / amax } else { 0.0 },
    })
}

/// Scale-invariant smallness quantities of the initial data.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SigmaQuantities {
    /// `‖u₀‖_{Ḣ⁻¹} + ‖μ₀ − 1‖₂‖u₀‖₂`, Ḣ⁻¹ over nonzero modes.
    pub sigma_minus1: f64,
    /// `‖u₀‖₂`.
    pub sigma_0: f64,
    /// `‖u₀‖_{Ḣ¹} + ‖(∂_τ̄₀μ₀, ∇τ̄₀)‖_{2+ε}^{(2+ε)/ε}`.
    pub sigma_1: f64,
    pub epsilon_used: f64,
    /// `σ₀^{ε/2}·σ₋₁·σ₁`.
    pub smallness_lhs: f64,
}

fn grad_tau_components(tau: &VectorField) -> [ScalarField; 4] {
    let gx = gradient(&tau.x);
    let gy = gradient(&tau.y);
    [gx.x, gx.y, gy.x, gy.y]
}

/// `‖∇τ̄‖_{2+ε}` with the pointwise Frobenius norm.
pub fn grad_tau_norm(tau: &VectorField, epsilon: f64) -> f64 {
    let g = grad_tau_components(tau);
    lp_norm_multi(&[&g[0], &g[1], &g[2], &g[3]], 2.0 + epsilon)
}

pub fn sigma_quantities(
    mu0: &ScalarField,
    u0: &VectorField,
    tau0: &VectorField,
    epsilon: f64,
) -> Result<SigmaQuantities> {
    mu0.grid().check_same(u0.grid())?;
    mu0.grid().check_same(tau0.grid())?;
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon = {epsilon} must be positive")));
    }
    let hm1 = sobolev_norm_vec(u0, -1.0)?;
    let l2 = lp_norm_vec(u0, 2.0);
    let h1 = sobolev_norm_vec(u0, 1.0)?;
    let mu_dev = lp_norm(&mu0.map(|m| m - 1.0), 2.0);
    let dtau_mu = directional_derivative(tau0, mu0)?;
    let g = grad_tau_components(tau0);
    let tang = lp_norm_multi(&[&dtau_mu, &g[0], &g[1], &g[2], &g[3]], 2.0 + epsilon);
    let sigma_minus1 = hm1 + mu_dev * l2;
    let sigma_0 = l2;
    let sigma_1 = h1 + tang.powf((2.0 + epsilon) / epsilon);
    Ok(SigmaQuantities {
        sigma_minus1,
        sigma_0,
        sigma_1,
        epsilon_used: epsilon,
        smallness_lhs: sigma_0.powf(epsilon / 2.0) * sigma_minus1 * sigma_1,
    })
}

/// Both sides of the Lipschitz estimate; the empirical constant is their ratio.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LipschitzCheck {
    /// `‖∇u‖_∞`.
    pub lhs: f64,
    /// `‖a‖_{2+ε}^{ε/(2+ε)}(‖∇a‖_{2+ε} + ‖(∇τ̄, ∂_τ̄μ)‖_{2+ε}‖(∇u, a)‖_∞)^{2/(2+ε)}`.
    pub rhs: f64,
    /// `lhs/rhs`, `None` when `rhs = 0`.
    pub ratio: Option<f64>,
}

pub fn lipschitz_bound_check(
    a: &ScalarField,
    tau: &VectorField,
    dtau_mu: &ScalarField,
    u: &VectorField,
    epsilon: f64,
) -> Result<LipschitzCheck> {
    for g in [tau.grid(), dtau_mu.grid(), u.grid()] {
        a.grid().check_same(g)?;
    }
    let p = 2.0 + epsilon;
    let gu = velocity_gradient(u).frobenius();
    let lhs = linf_norm(&gu);
    let ga = gradient(a);
    let gtau = grad_tau_components(tau);
    let tang = lp_norm_multi(&[&gtau[0], &gtau[1], &gtau[2], &gtau[3], dtau_mu], p);
    let sup = pointwise(&[&gu, a], |v| v[0].hypot(v[1]));
    let inner = lp_norm_vec(&ga, p) + tang * linf_norm(&sup);
    let rhs = lp_norm(a, p).powf(epsilon / p) * inner.powf(2.0 / p);
    Ok(LipschitzCheck {
        lhs,
        rhs,
        ratio: (rhs > 0.0).then(|| lhs / rhs),
    })
}

/// Energy-balance residual between two states a step `dt` apart.
///
/// Returns `|(E₁ − E₀)/dt + ½∫μ|Su|²|`, with `E = ½‖u‖₂²` and the
/// dissipation evaluated at the midpoint state.
pub fn energy_balance_residual(
    u0: &VectorField,
    u1: &VectorField,
    u_mid: &VectorField,
    mu_mid: &ScalarField,
    dt: f64,
) -> Result<f64> {
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("dt = {dt} must be positive")));
    }
    let e0 = 0.5 * lp_norm_vec(u0, 2.0).powi(2);
    let e1 = 0.5 * lp_norm_vec(u1, 2.0).powi(2);
    Ok(((e1 - e0) / dt + dissipation(mu_mid, u_mid)?).abs())
}

/// `½∫μ|Su|²`.
pub fn dissipation(mu: &ScalarField, u: &VectorField) -> Result<f64> {
    mu.grid().check_same(u.grid())?;
    let s = strain(u);
    let sum: f64 = (0..mu.values().len())
        .map(|i| {
            let (a, b, c) = (s.s11.values()[i], s.s12.values()[i], s.s22.values()[i]);
            mu.values()[i] * (a * a + 2.0 * b * b + c * c)
        })
        .sum();
    Ok(0.5 * sum * mu.grid().cell_area())
}

/// Energy-balance residuals from a sampled trajectory, one per interval,
/// normalized by the first sample's energy.
///
/// Uses `E = ½‖u‖₂²` from the records and the trapezoidal dissipation
/// `½(‖∇u‖₂²)` weighted by `mu_ref`, so it is exact only for constant
/// viscosity; the solver's per-step residual is the primary measurement.
pub fn energy_balance_window(records: &[DiagnosticsRecord], mu_ref: f64) -> Result<Vec<f64>> {
    if records.len() < 2 {
        return Err(Error::InvalidArgument("need at least two samples".into()));
    }
    let e_ref = 0.5 * records[0].energy;
    Ok(records
        .windows(2)
        .map(|w| {
            let dt = w[1].t - w[0].t;
            let de = 0.5 * (w[1].energy - w[0].energy) / dt;
            let d = 0.5 * mu_ref * (w[0].grad_u_l2.powi(2) + w[1].grad_u_l2.powi(2));
            let r = (de + d).abs();
            if e_ref > 0.0 {
                r / e_ref
            } else {
                r
            }
        })
        .collect())
}

/// Sup and `L²` in time of `t^q X(t)` for one sampled quantity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightedNorm {
    pub q: f64,
    pub sup: f64,
    pub l2: f64,
}

/// Time-weighted norms over a trajectory for a given δ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeWeightedNorms {
    pub delta: f64,
    /// `t^δ‖u‖₂`.
    pub u: WeightedNorm,
    /// `t^{1/2}‖a‖₂`.
    pub a: WeightedNorm,
    /// `t^{1/2}‖∇a‖₂`.
    pub grad_a: WeightedNorm,
    /// `t^{1/2+δ}‖∇a‖₂`.
    pub grad_a_delta: WeightedNorm,
}

/// `∫_{t0}^{t1} t^{2q}·(linear interpolant of X²) dt`, exact in the weight.
fn weighted_segment(t0: f64, t1: f64, y0: f64, y1: f64, q: f64) -> f64 {
    let m = 2.0 * q;
    let p = |k: f64, t: f64| t.powf(k) / k;
    let slope = (y1 - y0) / (t1 - t0);
    // y(t) = y0 + slope (t − t0)
    let i0 = p(m + 1.0, t1) - p(m + 1.0, t0);
    let i1 = p(m + 2.0, t1) - p(m + 2.0, t0);
    (y0 - slope * t0) * i0 + slope * i1
}

fn weighted(times: &[f64], xs: &[f64], q: f64) -> WeightedNorm {
    let sup = times.iter().zip(xs).map(|(t, x)| t.powf(q) * x).fold(0.0_f64, f64::max);
    let mut acc = 0.0;
    for k in 1..times.len() {
        acc += weighted_segment(times[k - 1], times[k], xs[k - 1].powi(2), xs[k].powi(2), q);
    }
    WeightedNorm {
        q,
        sup,
        l2: acc.max(0.0).sqrt(),
    }
}

/// Accumulates `t`-weighted norms from sampled records. Squares of the
/// sampled norms are interpolated linearly between samples and integrated
/// exactly against the power weight.
pub fn time_weighted_norms(records: &[DiagnosticsRecord], delta: f64, epsilon: f64) -> Result<TimeWeightedNorms> {
    if records.is_empty() {
        return Err(Error::InvalidArgument("no samples".into()));
    }
    let lo = 1.0 / (2.0 + epsilon);
    if !(delta > lo && delta < 0.5) {
        return Err(Error::InvalidArgument(format!(
            "delta = {delta} must lie in ({lo}, 1/2)"
        )));
    }
    let t: Vec<f64> = records.iter().map(|r| r.t).collect();
    if t.iter().any(|&x| x < 0.0) {
        return Err(Error::InvalidArgument("sample times must be nonnegative".into()));
    }
    let u: Vec<f64> = records.iter().map(|r| r.energy.sqrt()).collect();
    let a: Vec<f64> = records.iter().map(|r| r.a_l2).collect();
    let ga: Vec<f64> = records.iter().map(|r| r.grad_a_l2).collect();
    Ok(TimeWeightedNorms {
        delta,
        u: weighted(&t, &u, delta),
        a: weighted(&t, &a, 0.5),
        grad_a: weighted(&t, &ga, 0.5),
        grad_a_delta: weighted(&t, &ga, 0.5 + delta),
    })
}

/// Lebesgue exponents of a commutator probe, `1/p = 1/p₁ + 1/p₂`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Exponents {
    pub p: f64,
    pub p1: f64,
    pub p2: f64,
}

impl Exponents {
    pub fn new(p: f64, p1: f64, p2: f64) -> Result<Self> {
        if !(p > 1.0 && p.is_finite() && p1 >= p && p2 >= p) {
            return Err(Error::InvalidArgument(format!(
                "exponents ({p}, {p1}, {p2}) need 1 < p < ∞ and p₁, p₂ ≥ p"
            )));
        }
        if ((1.0 / p) - (1.0 / p1 + 1.0 / p2)).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("1/{p} ≠ 1/{p1} + 1/{p2}")));
        }
        Ok(Exponents { p, p1, p2 })
    }
}

/// Commutator ratios for the index pairs `(1,1)`, `(1,2)`, `(2,2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CommutatorRatios {
    pub r11: f64,
    pub r12: f64,
    pub r22: f64,
}

impl CommutatorRatios {
    pub fn max(&self) -> f64 {
        self.r11.max(self.r12).max(self.r22)
    }
}

/// `‖[R_iR_j, ∂_X]g‖_p / (‖∇X‖_{p₂}‖g‖_{p₁})` for each index pair.
pub fn commutator_probe(x: &VectorField, g: &ScalarField, exps: Exponents) -> Result<CommutatorRatios> {
    x.grid().check_same(g.grid())?;
    let gx = velocity_gradient(x);
    let denom = lp_norm(&gx.frobenius(), exps.p2) * lp_norm(g, exps.p1);
    if denom == 0.0 {
        return Ok(CommutatorRatios {
            r11: 0.0,
            r12: 0.0,
            r22: 0.0,
        });
    }
    let gh = transform(g);
    let xg = directional_derivative(x, g)?;
    let xgh = transform(&xg);
    let one = |i: usize, j: usize| -> Result<f64> {
        let outer = inverse_transform(&riesz2(i, j, &xgh));
        let inner = directional_derivative(x, &inverse_transform(&riesz2(i, j, &gh)))?;
        Ok(lp_norm(&outer.sub(&inner)?, exps.p) / denom)
    };
    Ok(CommutatorRatios {
        r11: one(1, 1)?,
        r12: one(1, 2)?,
        r22: one(2, 2)?,
    })
}

/// Maximum commutator ratio over `count` random smooth `g`.
pub fn commutator_ensemble(x: &VectorField, exps: Exponents, count: usize, seed: u64, slope: f64) -> Result<f64> {
    if count == 0 {
        return Err(Error::InvalidArgument("ensemble must be nonempty".into()));
    }
    let mut r = rng(seed);
    let mut ratios = Vec::with_capacity(count);
    for _ in 0..count {
        let g = random_smooth_field(x.grid(), &mut r, slope);
        ratios.push(commutator_probe(x, &g, exps)?.max());
    }
    ratios.sort_by(f64::total_cmp);
    Ok(*ratios.last().expect("nonempty"))
}

/// Least-squares fits of `log‖u(t)‖₂`.
#[derive(Clone, Debug, PartialEq)]
pub struct DecayFit {
    /// Set when the velocity vanishes and no fit is attempted.
    pub skipped: bool,
    /// `r` in `‖u‖₂ ≈ C e^{−rt}`.
    pub exponential_rate: f64,
    /// `2r`, the decay rate of `‖u‖₂²`.
    pub energy_rate: f64,
    pub exponential_r2: f64,
    /// `s` in `‖u‖₂ ≈ C⟨t⟩^{−s}`.
    pub algebraic_exponent: f64,
    pub algebraic_r2: f64,
    /// `‖u‖₂` nonincreasing across samples.
    pub monotone: bool,
}

fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    (slope, r2)
}

pub fn decay_fit(records: &[DiagnosticsRecord]) -> Result<DecayFit> {
    if records.len() < 10 {
        return Err(Error::InvalidArgument(format!(
            "decay fit needs at least 10 samples, got {}",
            records.len()
        )));
    }
    let monotone = records.windows(2).all(|w| w[1].energy <= w[0].energy);
    if records.iter().any(|r| !(r.energy > 0.0)) {
        return Ok(DecayFit {
            skipped: true,
            exponential_rate: 0.0,
            energy_rate: 0.0,
            exponential_r2: 0.0,
            algebraic_exponent: 0.0,
            algebraic_r2: 0.0,
            monotone,
        });
    }
    let t: Vec<f64> = records.iter().map(|r| r.t).collect();
    let y: Vec<f64> = records.iter().map(|r| 0.5 * r.energy.ln()).collect();
    let (se, r2e) = linear_fit(&t, &y);
    let lt: Vec<f64> = t.iter().map(|t| 0.5 * (1.0 + t * t).ln()).collect();
    let (sa, r2a) = linear_fit(&lt, &y);
    Ok(DecayFit {
        skipped: false,
        exponential_rate: -se,
        energy_rate: -2.0 * se,
        exponential_r2: r2e,
        algebraic_exponent: -sa,
        algebraic_r2: r2a,
        monotone,
    })
}

/// `⟨a, ω⟩/‖ω‖₂²`, zero for `ω = 0`.
pub fn bracket_ratio(a: &ScalarField, omega: &ScalarField) -> Result<f64> {
    let w2 = omega.dot(omega)?;
    Ok(if w2 > 0.0 { a.dot(omega)? / w2 } else { 0.0 })
}

/// Inputs to a [`DiagnosticsRecord`] beyond the instantaneous fields.
#[derive(Clone, Copy, Debug, Default)]
pub struct RecordContext<'a> {
    pub epsilon: f64,
    pub int_grad_u_linf: f64,
    pub energy_residual: f64,
    /// `‖∂_τ̄₀μ₀‖_{2+ε}` of the initial state.
    pub dtau_mu0: f64,
    pub interface: Option<&'a InterfaceCurve>,
}

/// Fields describing one instant of a run.
#[derive(Clone, Copy, Debug)]
pub struct Snapshot<'a> {
    pub t: f64,
    pub omega: &'a ScalarField,
    pub mu: &'a Viscosity,
    pub tau: &'a VectorField,
    pub dtau_mu: &'a ScalarField,
    pub theta: Option<&'a ScalarField>,
}

/// Evaluates every column of a [`DiagnosticsRecord`].
pub fn record(s: Snapshot<'_>, ctx: RecordContext<'_>) -> Result<DiagnosticsRecord> {
    let eps = ctx.epsilon;
    let p = 2.0 + eps;
    let omega_hat = transform(s.omega).without_mean();
    let omega = inverse_transform(&omega_hat);
    let u = crate::spectral::biot_savart(&omega)?;
    let grad = velocity_gradient(&u);
    let gu = grad.frobenius();
    let (a, b) = good_unknowns(s.mu, &omega)?;
    let ga = gradient(&a);
    let bracket = bracket_ratio(&a, &omega)?;
    let bounds = s.mu.bounds();
    let w2 = omega.dot(&omega)?;
    let slack = crate::elliptic::BOUND_SLACK * bounds.mu_hi;
    let bracket_ok = w2 == 0.0 || (bracket >= bounds.mu_lo - slack && bracket <= bounds.mu_hi + slack);
    let v_factor = ctx.int_grad_u_linf.exp();
    let lip = lipschitz_bound_check(&a, s.tau, s.dtau_mu, &u, eps)?;
    let (iface, ratio, curv) = match ctx.interface {
        Some(curve) => {
            let alpha = good_unknown_alpha(s.mu.field(), &u, s.tau)?;
            let chk = interface_alpha_check(&a, &alpha, curve)?;
            let reg = crate::geometry::boundary_regularity(curve, eps)?;
            (Some(chk.max_abs), Some(chk.ratio), Some(reg.curvature_lp))
        }
        None => (None, None, None),
    };
    let rec = DiagnosticsRecord {
        t: s.t,
        epsilon: eps,
        energy: lp_norm_vec(&u, 2.0).powi(2),
        grad_u_l2: lp_norm(&gu, 2.0),
        omega_l2: lp_norm(&omega, 2.0),
        omega_l2eps: lp_norm(&omega, p),
        a_l2: lp_norm(&a, 2.0),
        grad_a_l2: lp_norm_vec(&ga, 2.0),
        a_l2eps: lp_norm(&a, p),
        grad_a_l2eps: lp_norm_vec(&ga, p),
        b_l2: lp_norm(&b, 2.0),
        grad_u_linf: linf_norm(&gu),
        int_grad_u_linf: ctx.int_grad_u_linf,
        v_factor,
        grad_tau_l2eps: grad_tau_norm(s.tau, eps),
        dtau_mu_l2eps: lp_norm(s.dtau_mu, p),
        dtau_mu_bound: ctx.dtau_mu0 * v_factor,
        energy_residual: ctx.energy_residual,
        bracket,
        bracket_ok,
        mu_min: s.mu.field().min(),
        mu_max: s.mu.field().max(),
        theta_l2: s.theta.map(|th| lp_norm(th, 2.0)),
        lipschitz_lhs: lip.lhs,
        lipschitz_rhs: lip.rhs,
        interface_max_a_alpha: iface,
        interface_ratio: ratio,
        curvature_l2eps: curv,
    };
    if !rec.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok(rec)
}
