//! Periodic interpolation of grid samples at arbitrary points.

use num_complex::Complex64;

use std::f64::consts::PI;

use crate::spectral::{transform, Grid, ScalarField};

/// Interpolation rule used when sampling a field off the grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Interpolation {
    /// Trigonometric interpolation; spectrally accurate, `O(n²)` per point.
    Fourier,
    /// Tensor-product four-point Lagrange cubic.
    Cubic,
    /// Cubic clipped to the range of the enclosing cell's four nodes.
    MonotoneCubic,
}

impl Interpolation {
    pub fn as_str(self) -> &'static str {
        match self {
            Interpolation::Fourier => "fourier",
            Interpolation::Cubic => "cubic",
            Interpolation::MonotoneCubic => "monotone_cubic",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "fourier" => Some(Interpolation::Fourier),
            "cubic" => Some(Interpolation::Cubic),
            "monotone_cubic" => Some(Interpolation::MonotoneCubic),
            _ => None,
        }
    }
}

#[inline]
fn lagrange_weights(t: f64) -> [f64; 4] {
    [
        -t * (t - 1.0) * (t - 2.0) / 6.0,
        (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
        -(t + 1.0) * t * (t - 2.0) / 2.0,
        (t + 1.0) * t * (t - 1.0) / 6.0,
    ]
}

/// Samples `f` at `points` with the chosen rule.
pub fn interpolate(f: &ScalarField, points: &[[f64; 2]], rule: Interpolation) -> Vec<f64> {
    match rule {
        Interpolation::Fourier => fourier(f, points),
        Interpolation::Cubic => points.iter().map(|p| cubic(f, *p, false)).collect(),
        Interpolation::MonotoneCubic => points.iter().map(|p| cubic(f, *p, true)).collect(),
    }
}

/// Rounds cell coordinates within roundoff of a node onto it, so sampling at
/// nodes returns node values exactly.
#[inline]
fn snap(s: f64) -> f64 {
    let r = s.round();
    if (s - r).abs() <= 1e-12 * (1.0 + r.abs()) {
        r
    } else {
        s
    }
}

/// Single-point cubic sample.
pub(crate) fn cubic(f: &ScalarField, p: [f64; 2], clip: bool) -> f64 {
    let v = f.values();
    cubic_with(f.grid(), p, clip, |k| v[k])
}

/// Cubic sample of node values produced by `value(flat_index)`.
pub(crate) fn cubic_with(g: &Grid, p: [f64; 2], clip: bool, value: impl Fn(usize) -> f64) -> f64 {
    let n = g.n() as i64;
    let h = g.h();
    let sx = snap(p[0] / h);
    let sy = snap(p[1] / h);
    let ix = sx.floor();
    let iy = sy.floor();
    let wx = lagrange_weights(sx - ix);
    let wy = lagrange_weights(sy - iy);
    let ix = ix as i64;
    let iy = iy as i64;
    let mut cols = [0usize; 4];
    for (a, c) in cols.iter_mut().enumerate() {
        *c = (ix - 1 + a as i64).rem_euclid(n) as usize;
    }
    let nu = n as usize;
    let mut acc = 0.0;
    for (b, wyb) in wy.iter().enumerate() {
        let row = (iy - 1 + b as i64).rem_euclid(n) as usize * nu;
        let mut s = 0.0;
        for (a, wxa) in wx.iter().enumerate() {
            s += wxa * value(row + cols[a]);
        }
        acc += wyb * s;
    }
    if clip {
        let r1 = (iy.rem_euclid(n)) as usize * nu;
        let r2 = ((iy + 1).rem_euclid(n)) as usize * nu;
        let c1 = cols[1];
        let c2 = cols[2];
        let q = [value(r1 + c1), value(r1 + c2), value(r2 + c1), value(r2 + c2)];
        let lo = q.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = q.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        acc = acc.clamp(lo, hi);
    }
    acc
}

fn wrap_angle(a: f64) -> f64 {
    (a + PI).rem_euclid(2.0 * PI) - PI
}

/// Cubic interpolation of a unit vector field through its angle.
///
/// Angles are unwrapped relative to the node nearest each point, so the
/// result stays unit length even where the field jumps.
pub(crate) fn cubic_unit(angles: &[f64], g: &Grid, p: [f64; 2], clip: bool) -> [f64; 2] {
    let n = g.n() as i64;
    let i0 = (p[0] / g.h()).round() as i64;
    let j0 = (p[1] / g.h()).round() as i64;
    let a0 = angles[(j0.rem_euclid(n) * n + i0.rem_euclid(n)) as usize];
    let a = a0 + cubic_with(g, p, clip, |k| wrap_angle(angles[k] - a0));
    [a.cos(), a.sin()]
}

fn fourier(f: &ScalarField, points: &[[f64; 2]]) -> Vec<f64> {
    let g = f.grid();
    let n = g.n();
    let fh = transform(f);
    let scale = 1.0 / g.len() as f64;
    let c: Vec<Complex64> = fh.coeffs().iter().map(|c| c * scale).collect();
    let nyq = n / 2;
    let phases = |x: f64| -> Vec<Complex64> {
        (0..n)
            .map(|i| {
                let kx = g.k(i) * x;
                if i == nyq {
                    // symmetric split of the Nyquist mode keeps the result real
                    Complex64::new(kx.cos(), 0.0)
                } else {
                    Complex64::new(kx.cos(), kx.sin())
                }
            })
            .collect()
    };
    points
        .iter()
        .map(|p| {
            let ex = phases(p[0]);
            let ey = phases(p[1]);
            let mut total = Complex64::new(0.0, 0.0);
            for j in 0..n {
                let row = &c[j * n..(j + 1) * n];
                let inner: Complex64 = row.iter().zip(&ex).map(|(a, b)| a * b).sum();
                total += inner * ey[j];
            }
            total.re
        })
        .collect()
}
