//! Variable-viscosity operator layer: the Riesz compositions `R_μ`, `Q_μ`,
//! the fourth-order operators `L_μ`, `A_μ`, the stress splitting
//! `div(μSu) = ∇⊥a + ∇b`, a preconditioned CG inverse of `R_μ`, and
//! randomized `L^p` norm probes of that inverse.
//!
//! Products with `μ` are projected onto the dealiased band on both sides,
//! so `R_μ = P₁TμTP₁ + P₂TμTP₂` is exactly self-adjoint on grid functions and
//! satisfies the bracket `μ∗ ≤ ⟨R_μω, ω⟩/‖ω‖² ≤ μ*` on resolved mean-zero `ω`.

use crate::error::{Error, Result};
use crate::random::{random_bump, random_smooth_field, rng};
use crate::spectral::{
    curl, derivative, divergence, inverse_transform, lp_norm, lp_norm_vec, strain, transform, Grid, ScalarField,
    SpectralField, VectorField,
};

/// Relative slack tolerated when checking a field against its bounds.
pub const BOUND_SLACK: f64 = 1e-8;

/// Declared pointwise bounds `0 < μ∗ ≤ μ ≤ μ*`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ViscosityBounds {
    pub mu_lo: f64,
    pub mu_hi: f64,
}

impl ViscosityBounds {
    pub fn new(mu_lo: f64, mu_hi: f64) -> Result<Self> {
        if !(mu_lo.is_finite() && mu_hi.is_finite() && mu_lo > 0.0 && mu_hi >= mu_lo) {
            return Err(Error::InvalidBounds(format!(
                "need 0 < mu_lo <= mu_hi, got [{mu_lo}, {mu_hi}]"
            )));
        }
        Ok(ViscosityBounds { mu_lo, mu_hi })
    }

    /// Tightest bounds containing every value of `field`.
    pub fn of_field(field: &ScalarField) -> Result<Self> {
        Self::new(field.min(), field.max())
    }

    pub fn ratio(&self) -> f64 {
        self.mu_hi / self.mu_lo
    }

    /// Midpoint `(μ∗ + μ*)/2`.
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.mu_lo + self.mu_hi)
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.mu_lo * (1.0 - BOUND_SLACK) && v <= self.mu_hi * (1.0 + BOUND_SLACK)
    }
}

/// A viscosity field checked against declared bounds.
#[derive(Clone, Debug, PartialEq)]
pub struct Viscosity {
    field: ScalarField,
    bounds: ViscosityBounds,
}

impl Viscosity {
    pub fn new(field: ScalarField, bounds: ViscosityBounds) -> Result<Self> {
        if let Some(&v) = field.values().iter().find(|&&v| !bounds.contains(v)) {
            return Err(Error::BoundsViolation {
                lo: bounds.mu_lo,
                hi: bounds.mu_hi,
                value: v,
            });
        }
        Ok(Viscosity { field, bounds })
    }

    /// Uses the field's own extrema as bounds.
    pub fn tight(field: ScalarField) -> Result<Self> {
        let b = ViscosityBounds::of_field(&field)?;
        Self::new(field, b)
    }

    pub fn constant(grid: &Grid, nu: f64) -> Result<Self> {
        Self::new(ScalarField::constant(grid, nu), ViscosityBounds::new(nu, nu)?)
    }

    pub fn field(&self) -> &ScalarField {
        &self.field
    }

    pub fn bounds(&self) -> ViscosityBounds {
        self.bounds
    }

    pub fn grid(&self) -> &Grid {
        self.field.grid()
    }
}

/// Outcome of a Krylov solve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KrylovReport {
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

fn p1_symbol(k1: f64, k2: f64) -> f64 {
    let r2 = k1 * k1 + k2 * k2;
    if r2 == 0.0 {
        0.0
    } else {
        (k2 * k2 - k1 * k1) / r2
    }
}

fn p2_symbol(k1: f64, k2: f64) -> f64 {
    let r2 = k1 * k1 + k2 * k2;
    if r2 == 0.0 {
        0.0
    } else {
        2.0 * k1 * k2 / r2
    }
}

pub(crate) fn p1_hat(f: &SpectralField) -> SpectralField {
    f.apply_real_symbol(p1_symbol)
}

pub(crate) fn p2_hat(f: &SpectralField) -> SpectralField {
    f.apply_real_symbol(p2_symbol)
}

/// `P₁ = R₂R₂ − R₁R₁`.
pub fn apply_p1(omega: &ScalarField) -> ScalarField {
    inverse_transform(&p1_hat(&transform(omega)))
}

/// `P₂ = 2R₁R₂`.
pub fn apply_p2(omega: &ScalarField) -> ScalarField {
    inverse_transform(&p2_hat(&transform(omega)))
}

/// `T(μ·f)` for coefficients `f`, returned as coefficients.
fn mu_times(mu: &ScalarField, f: &SpectralField) -> SpectralField {
    let phys = inverse_transform(f);
    let prod: Vec<f64> = phys.values().iter().zip(mu.values()).map(|(a, m)| a * m).collect();
    transform(&ScalarField::from_raw(mu.grid(), prod)).dealiased()
}

/// The stress components `ω₁ = T(μP₁ω)`, `ω₂ = T(μP₂ω)` in Fourier space.
pub(crate) fn stress_potentials(mu: &ScalarField, omega: &SpectralField) -> (SpectralField, SpectralField) {
    let w = omega.clone().dealiased().without_mean();
    (mu_times(mu, &p1_hat(&w)), mu_times(mu, &p2_hat(&w)))
}

/// Coefficients of `a = R_μω` and, if requested, `b = Q_μω`.
pub(crate) fn ab_hat(mu: &ScalarField, omega: &SpectralField, want_b: bool) -> (SpectralField, Option<SpectralField>) {
    let (w1, w2) = stress_potentials(mu, omega);
    let a = p1_hat(&w1).add(&p2_hat(&w2)).expect("same grid");
    let b = want_b.then(|| p1_hat(&w2).sub(&p2_hat(&w1)).expect("same grid"));
    (a, b)
}

/// `a = R_μω = P₁(μP₁ω) + P₂(μP₂ω)`.
pub fn apply_rmu(mu: &Viscosity, omega: &ScalarField) -> Result<ScalarField> {
    mu.grid().check_same(omega.grid())?;
    let (a, _) = ab_hat(mu.field(), &transform(omega), false);
    Ok(inverse_transform(&a))
}

/// `b = Q_μω = P₁(μP₂ω) − P₂(μP₁ω)`.
pub fn apply_qmu(mu: &Viscosity, omega: &ScalarField) -> Result<ScalarField> {
    mu.grid().check_same(omega.grid())?;
    let (_, b) = ab_hat(mu.field(), &transform(omega), true);
    Ok(inverse_transform(&b.expect("requested")))
}

/// Both good unknowns `(a, b)` from one set of products.
pub fn apply_rmu_qmu(mu: &Viscosity, omega: &ScalarField) -> Result<(ScalarField, ScalarField)> {
    mu.grid().check_same(omega.grid())?;
    let (a, b) = ab_hat(mu.field(), &transform(omega), true);
    Ok((inverse_transform(&a), inverse_transform(&b.expect("requested"))))
}

fn d1_symbol(k1: f64, k2: f64) -> f64 {
    // ∂₂₂ − ∂₁₁
    k1 * k1 - k2 * k2
}

fn d2_symbol(k1: f64, k2: f64) -> f64 {
    // 2∂₁₂
    -2.0 * k1 * k2
}

fn fourth_order(mu: &Viscosity, phi: &ScalarField, skew: bool) -> Result<ScalarField> {
    mu.grid().check_same(phi.grid())?;
    let ph = transform(phi).dealiased().without_mean();
    let m1 = mu_times(mu.field(), &ph.apply_real_symbol(d1_symbol));
    let m2 = mu_times(mu.field(), &ph.apply_real_symbol(d2_symbol));
    let out = if skew {
        m2.apply_real_symbol(d1_symbol).sub(&m1.apply_real_symbol(d2_symbol))?
    } else {
        m1.apply_real_symbol(d1_symbol).add(&m2.apply_real_symbol(d2_symbol))?
    };
    Ok(inverse_transform(&out))
}

/// `L_μφ = (∂₂₂−∂₁₁)μ(∂₂₂−∂₁₁)φ + (2∂₁₂)μ(2∂₁₂)φ`.
pub fn apply_lmu(mu: &Viscosity, phi: &ScalarField) -> Result<ScalarField> {
    fourth_order(mu, phi, false)
}

/// `A_μφ = (∂₂₂−∂₁₁)μ(2∂₁₂)φ − (2∂₁₂)μ(∂₂₂−∂₁₁)φ`.
pub fn apply_amu(mu: &Viscosity, phi: &ScalarField) -> Result<ScalarField> {
    fourth_order(mu, phi, true)
}

/// Result of splitting the viscous stress divergence.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub a: ScalarField,
    pub b: ScalarField,
    /// Relative `L²` norm of `div(μSu) − ∇⊥a − ∇b`.
    pub residual: f64,
}

/// Dealiased divergence of `μSu`, computed from pointwise products.
pub fn stress_divergence(mu: &ScalarField, u: &VectorField) -> Result<VectorField> {
    mu.grid().check_same(u.grid())?;
    let s = strain(u);
    let m11 = transform(&mu.mul(&s.s11)?).dealiased();
    let m12 = transform(&mu.mul(&s.s12)?).dealiased();
    let m22 = transform(&mu.mul(&s.s22)?).dealiased();
    let x = derivative(1, &m11).add(&derivative(2, &m12))?;
    let y = derivative(1, &m12).add(&derivative(2, &m22))?;
    Ok(VectorField {
        x: inverse_transform(&x),
        y: inverse_transform(&y),
    })
}

/// Splits `div(μSu) = ∇⊥a + ∇b` and reports the residual of the identity.
pub fn stress_decompose(mu: &Viscosity, u: &VectorField) -> Result<Decomposition> {
    mu.grid().check_same(u.grid())?;
    let div = lp_norm(&divergence(u), 2.0);
    let scale = lp_norm(&curl(u), 2.0).max(lp_norm_vec(u, 2.0));
    if scale > 0.0 && div / scale > 1e-8 {
        return Err(Error::NotDivergenceFree(div / scale));
    }
    let omega = curl(u);
    let (a, b) = apply_rmu_qmu(mu, &omega)?;
    let lhs = stress_divergence(mu.field(), u)?;
    let ah = transform(&a);
    let bh = transform(&b);
    let rx = derivative(1, &bh).sub(&derivative(2, &ah))?;
    let ry = derivative(1, &ah).add(&derivative(2, &bh))?;
    let rhs = VectorField {
        x: inverse_transform(&rx),
        y: inverse_transform(&ry),
    };
    let diff = lp_norm_vec(&lhs.sub(&rhs)?, 2.0);
    let norm = lp_norm_vec(&lhs, 2.0);
    let residual = if norm > 0.0 { diff / norm } else { diff };
    Ok(Decomposition { a, b, residual })
}

fn inner(a: &SpectralField, b: &SpectralField) -> f64 {
    a.coeffs()
        .iter()
        .zip(b.coeffs())
        .map(|(x, y)| x.re * y.re + x.im * y.im)
        .sum()
}

fn axpy(y: &mut SpectralField, alpha: f64, x: &SpectralField) {
    for (a, b) in y.coeffs_mut().iter_mut().zip(x.coeffs()) {
        *a += b * alpha;
    }
}

/// Default iteration cap `⌈10·√(μ*/μ∗)·ln(1/tol)⌉`.
pub fn default_max_iterations(bounds: ViscosityBounds, tol: f64) -> usize {
    (10.0 * bounds.ratio().sqrt() * (1.0 / tol).ln()).ceil().max(1.0) as usize
}

/// Solves `R_μω = a` by conjugate gradients preconditioned with `1/mean(μ)`.
///
/// The right-hand side is projected onto resolved mean-zero fields, the
/// range of `R_μ`.
pub fn invert_rmu(mu: &Viscosity, a: &ScalarField, tol: f64) -> Result<(ScalarField, KrylovReport)> {
    let max_iter = default_max_iterations(mu.bounds(), tol);
    invert_rmu_with(mu, a, tol, max_iter)
}

pub fn invert_rmu_with(
    mu: &Viscosity,
    a: &ScalarField,
    tol: f64,
    max_iter: usize,
) -> Result<(ScalarField, KrylovReport)> {
    mu.grid().check_same(a.grid())?;
    if !(tol > 0.0 && tol <= 1e-4) {
        return Err(Error::InvalidArgument(format!("tol = {tol} must lie in (0, 1e-4]")));
    }
    let (x, report) = cg_hat(mu.field(), &transform(a), tol, max_iter);
    if !report.converged {
        return Err(Error::NotConverged {
            iterations: report.iterations,
            residual: report.residual,
        });
    }
    Ok((inverse_transform(&x), report))
}

pub(crate) fn cg_hat(mu: &ScalarField, a: &SpectralField, tol: f64, max_iter: usize) -> (SpectralField, KrylovReport) {
    let apply = |x: &SpectralField| ab_hat(mu, x, false).0;
    let b = a.clone().dealiased().without_mean();
    let bnorm = inner(&b, &b).sqrt();
    let grid = a.grid().clone();
    let mut x = SpectralField::zeros(&grid);
    if bnorm == 0.0 {
        return (
            x,
            KrylovReport {
                iterations: 0,
                residual: 0.0,
                converged: true,
            },
        );
    }
    let inv_mean = 1.0 / mu.mean();
    let mut r = b.clone();
    let mut z = r.scale(inv_mean);
    let mut p = z.clone();
    let mut rz = inner(&r, &z);
    let mut residual = 1.0;
    for it in 1..=max_iter {
        let ap = apply(&p);
        let alpha = rz / inner(&p, &ap);
        axpy(&mut x, alpha, &p);
        axpy(&mut r, -alpha, &ap);
        residual = inner(&r, &r).sqrt() / bnorm;
        if residual <= tol {
            // confirm against the true residual before declaring success
            let true_r = b.sub(&apply(&x)).expect("same grid");
            residual = inner(&true_r, &true_r).sqrt() / bnorm;
            if residual <= tol {
                return (
                    x,
                    KrylovReport {
                        iterations: it,
                        residual,
                        converged: true,
                    },
                );
            }
            r = true_r;
        }
        z = r.scale(inv_mean);
        let rz_new = inner(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        let mut np = z.clone();
        axpy(&mut np, beta, &p);
        p = np;
    }
    (
        x,
        KrylovReport {
            iterations: max_iter,
            residual,
            converged: false,
        },
    )
}

/// Extremes of the Rayleigh quotient `⟨R_μω, ω⟩/‖ω‖²` over seeded random fields.
pub fn rayleigh_bounds(mu: &Viscosity, sample_count: usize, seed: u64) -> Result<(f64, f64)> {
    if sample_count == 0 {
        return Err(Error::InvalidArgument("sample_count must be at least 1".into()));
    }
    let mut r = rng(seed);
    let mut qmin = f64::INFINITY;
    let mut qmax = f64::NEG_INFINITY;
    for s in 0..sample_count {
        let omega = if s % 2 == 0 {
            random_smooth_field(mu.grid(), &mut r, (s % 5) as f64 * 0.5)
        } else {
            random_bump(mu.grid(), &mut r)
        };
        let a = apply_rmu(mu, &omega)?;
        let q = a.dot(&omega)? / omega.dot(&omega)?;
        qmin = qmin.min(q);
        qmax = qmax.max(q);
    }
    Ok((qmin, qmax))
}

/// One row of an `L^p` probe sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbeRow {
    pub p: f64,
    pub estimate: f64,
}

/// Result of [`epsilon_probe`].
#[derive(Clone, Debug, PartialEq)]
pub struct EpsilonSweep {
    pub rows: Vec<ProbeRow>,
    /// Largest `p` whose estimate stays at or below the threshold;
    /// `None` when even the smallest grid value exceeds it.
    pub onset: Option<f64>,
    pub ensemble_size: usize,
}

const PROBE_TOL: f64 = 1e-9;

/// Ensemble of probe inputs `g` and their preimages `R_μ⁻¹g`.
fn probe_pairs(mu: &Viscosity, ensemble_size: usize, seed: u64) -> Result<Vec<(ScalarField, ScalarField)>> {
    if ensemble_size < 16 {
        return Err(Error::InvalidArgument("ensemble_size must be at least 16".into()));
    }
    let mut r = rng(seed);
    let mut out = Vec::with_capacity(ensemble_size);
    for s in 0..ensemble_size {
        let g = if s % 2 == 0 {
            random_smooth_field(mu.grid(), &mut r, 1.0 + (s % 3) as f64)
        } else {
            random_bump(mu.grid(), &mut r)
        };
        let (w, _) = invert_rmu(mu, &g, PROBE_TOL)?;
        out.push((g, w));
    }
    Ok(out)
}

fn max_ratio(pairs: &[(ScalarField, ScalarField)], p: f64) -> f64 {
    let mut ratios: Vec<f64> = pairs.iter().map(|(g, w)| lp_norm(w, p) / lp_norm(g, p)).collect();
    ratios.sort_by(f64::total_cmp);
    *ratios.last().expect("nonempty ensemble")
}

/// Lower-bound estimate of `‖R_μ⁻¹‖_{L^p→L^p}`: the largest ratio
/// `‖R_μ⁻¹g‖_p/‖g‖_p` over a seeded ensemble of smooth fields and bumps.
pub fn lp_norm_probe(mu: &Viscosity, p: f64, ensemble_size: usize, seed: u64) -> Result<f64> {
    if !(2.0..=8.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("p = {p} must lie in [2, 8]")));
    }
    let pairs = probe_pairs(mu, ensemble_size, seed)?;
    Ok(max_ratio(&pairs, p))
}

/// Sweeps `p_grid` and returns the largest `p` whose probe estimate is at
/// most `threshold`. Every grid value reuses the same ensemble.
pub fn epsilon_probe(
    mu: &Viscosity,
    p_grid: &[f64],
    threshold: f64,
    ensemble_size: usize,
    seed: u64,
) -> Result<EpsilonSweep> {
    if p_grid.is_empty() {
        return Err(Error::InvalidArgument("p_grid is empty".into()));
    }
    if p_grid.windows(2).any(|w| w[1] <= w[0]) || p_grid[0] <= 2.0 {
        return Err(Error::InvalidArgument(
            "p_grid must be strictly ascending with all values above 2".into(),
        ));
    }
    let pairs = probe_pairs(mu, ensemble_size, seed)?;
    let rows: Vec<ProbeRow> = p_grid
        .iter()
        .map(|&p| ProbeRow {
            p,
            estimate: max_ratio(&pairs, p),
        })
        .collect();
    let onset = rows
        .iter()
        .filter(|r| r.estimate <= threshold)
        .map(|r| r.p)
        .fold(None, |acc: Option<f64>, p| Some(acc.map_or(p, |a| a.max(p))));
    Ok(EpsilonSweep {
        rows,
        onset,
        ensemble_size,
    })
}
