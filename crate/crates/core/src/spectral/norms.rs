use super::field::{ScalarField, VectorField};
use super::ops::{check_mean_zero, transform};
use crate::error::Result;

fn lp_of_values<'a>(values: impl Iterator<Item = f64> + 'a, p: f64, cell: f64) -> f64 {
    if p.is_infinite() {
        return values.fold(0.0, |m, v| m.max(v.abs()));
    }
    if p == 2.0 {
        return (values.map(|v| v * v).sum::<f64>() * cell).sqrt();
    }
    (values.map(|v| v.abs().powf(p)).sum::<f64>() * cell).powf(1.0 / p)
}

/// `L^p` norm by equispaced quadrature; `p = ∞` gives the max norm.
pub fn lp_norm(f: &ScalarField, p: f64) -> f64 {
    assert!(p >= 1.0, "p must be at least 1");
    lp_of_values(f.values().iter().copied(), p, f.grid().cell_area())
}

pub fn linf_norm(f: &ScalarField) -> f64 {
    lp_norm(f, f64::INFINITY)
}

/// `L^p` norm of the pointwise Euclidean magnitude of several components.
pub fn lp_norm_multi(components: &[&ScalarField], p: f64) -> f64 {
    assert!(!components.is_empty());
    let len = components[0].values().len();
    let mags = (0..len).map(|i| {
        components
            .iter()
            .map(|c| c.values()[i] * c.values()[i])
            .sum::<f64>()
            .sqrt()
    });
    lp_of_values(mags, p, components[0].grid().cell_area())
}

pub fn lp_norm_vec(v: &VectorField, p: f64) -> f64 {
    lp_norm_multi(&[&v.x, &v.y], p)
}

/// Homogeneous Sobolev norm `‖f‖_{Ḣ^s}` by a Plancherel sum over nonzero modes.
///
/// For `s = 0` the zero mode is included so the result equals the `L²` norm.
pub fn sobolev_norm(f: &ScalarField, s: f64) -> Result<f64> {
    let fh = transform(f);
    if s < 0.0 {
        check_mean_zero(&fh)?;
    }
    let g = f.grid();
    let n = g.n();
    let mut sum = 0.0;
    for j in 0..n {
        let k2 = g.k(j);
        for i in 0..n {
            let k1 = g.k(i);
            let r2 = k1 * k1 + k2 * k2;
            let c = fh.coeffs()[j * n + i].norm_sqr();
            if r2 == 0.0 {
                if s == 0.0 {
                    sum += c;
                }
                continue;
            }
            sum += r2.powf(s) * c;
        }
    }
    let norm = g.l() * g.l() / (g.len() as f64 * g.len() as f64);
    Ok((sum * norm).sqrt())
}

/// `Ḣ^s` norm of a vector field (root of the sum of squared component norms).
pub fn sobolev_norm_vec(v: &VectorField, s: f64) -> Result<f64> {
    let a = sobolev_norm(&v.x, s)?;
    let b = sobolev_norm(&v.y, s)?;
    Ok(a.hypot(b))
}

/// Relative `L²` distance `‖f − g‖/‖g‖` (absolute when `g = 0`).
pub fn relative_l2(f: &ScalarField, g: &ScalarField) -> Result<f64> {
    let d = lp_norm(&f.sub(g)?, 2.0);
    let r = lp_norm(g, 2.0);
    Ok(if r > 0.0 { d / r } else { d })
}
