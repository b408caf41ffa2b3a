//! Seeded random test fields drawn inside the resolved band.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::spectral::{inverse_transform, transform, Grid, ScalarField, SpectralField};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Mean-zero field with random phases and spectrum `(1+|k|²)^{-slope/2}`,
/// restricted to `|k_j| ≤ kmax` for the grid's dealiasing rule.
pub fn random_smooth_field(grid: &Grid, rng: &mut impl Rng, slope: f64) -> ScalarField {
    let n = grid.n();
    let kmax = grid.kmax() as i64;
    let mut coeffs = vec![Complex64::new(0.0, 0.0); grid.len()];
    for j in 0..n {
        let k2 = grid.kint(j);
        for i in 0..n {
            let k1 = grid.kint(i);
            if (k1 == 0 && k2 == 0) || k1.abs() > kmax || k2.abs() > kmax {
                continue;
            }
            let amp = (1.0 + (k1 * k1 + k2 * k2) as f64).powf(-slope / 2.0);
            let phase = rng.gen_range(0.0..2.0 * PI);
            let r: f64 = rng.gen_range(0.5..1.5);
            coeffs[j * n + i] = Complex64::from_polar(amp * r, phase);
        }
    }
    let f = inverse_transform(&SpectralField::from_raw(grid, coeffs));
    normalize(&f)
}

/// Periodic Gaussian bump at a random centre, mean removed and band-limited.
pub fn random_bump(grid: &Grid, rng: &mut impl Rng) -> ScalarField {
    let l = grid.l();
    let cx = rng.gen_range(0.0..l);
    let cy = rng.gen_range(0.0..l);
    let w = rng.gen_range(2.0 * grid.h()..l / 8.0);
    bump(grid, [cx, cy], w)
}

/// Band-limited mean-zero periodic Gaussian of width `w` centred at `c`.
pub fn bump(grid: &Grid, c: [f64; 2], w: f64) -> ScalarField {
    let l = grid.l();
    let f = ScalarField::from_fn(grid, |x, y| {
        let dx = wrap(x - c[0], l);
        let dy = wrap(y - c[1], l);
        (-(dx * dx + dy * dy) / (2.0 * w * w)).exp()
    });
    let fh = transform(&f).dealiased().without_mean();
    normalize(&inverse_transform(&fh))
}

/// Minimum-image displacement on a circle of length `l`.
pub fn wrap(d: f64, l: f64) -> f64 {
    d - l * (d / l).round()
}

fn normalize(f: &ScalarField) -> ScalarField {
    let rms = (f.values().iter().map(|v| v * v).sum::<f64>() / f.values().len() as f64).sqrt();
    if rms > 0.0 {
        f.scale(1.0 / rms)
    } else {
        f.clone()
    }
}
