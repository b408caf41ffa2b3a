use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Anti-aliasing rule applied after nonlinear products.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DealiasRule {
    /// Zero every mode with `|k_j| > n/3` on either axis.
    TwoThirds,
    None,
}

impl DealiasRule {
    pub fn as_str(self) -> &'static str {
        match self {
            DealiasRule::TwoThirds => "two_thirds",
            DealiasRule::None => "none",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "two_thirds" => Some(DealiasRule::TwoThirds),
            "none" => Some(DealiasRule::None),
            _ => None,
        }
    }
}

struct GridInner {
    n: usize,
    l: f64,
    rule: DealiasRule,
    /// Integer wavenumber per FFT index, Nyquist stored as `-n/2`.
    kint: Vec<i64>,
    /// Physical wavenumber `kint * 2π/l`.
    k: Vec<f64>,
    keep: Vec<bool>,
}

/// Uniform periodic grid on `[0, l)²` with `n` points per axis.
///
/// Sample `(i, j)` sits at `x1 = i·h`, `x2 = j·h` and is stored at flat index
/// `j·n + i`. Spectral coefficients use the same layout with FFT ordering.
#[derive(Clone)]
pub struct Grid(Arc<GridInner>);

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("n", &self.0.n)
            .field("l", &self.0.l)
            .field("rule", &self.0.rule)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.n == other.0.n && self.0.l == other.0.l && self.0.rule == other.0.rule)
    }
}

impl Grid {
    pub fn new(n: usize, l: f64, rule: DealiasRule) -> Result<Self> {
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "n = {n} must be a power of two and at least 16"
            )));
        }
        if !(l.is_finite() && l > 0.0) {
            return Err(Error::InvalidGrid(format!("period l = {l} must be positive")));
        }
        let kint: Vec<i64> = (0..n)
            .map(|i| if i < n / 2 { i as i64 } else { i as i64 - n as i64 })
            .collect();
        let scale = 2.0 * PI / l;
        let k = kint.iter().map(|&m| m as f64 * scale).collect();
        let keep = kint
            .iter()
            .map(|&m| match rule {
                DealiasRule::TwoThirds => 3 * m.unsigned_abs() as usize <= n,
                DealiasRule::None => true,
            })
            .collect();
        Ok(Grid(Arc::new(GridInner {
            n,
            l,
            rule,
            kint,
            k,
            keep,
        })))
    }

    /// `n×n` grid on `[0, 2π)²` with two-thirds dealiasing.
    pub fn standard(n: usize) -> Result<Self> {
        Self::new(n, 2.0 * PI, DealiasRule::TwoThirds)
    }

    pub fn n(&self) -> usize {
        self.0.n
    }

    pub fn l(&self) -> f64 {
        self.0.l
    }

    pub fn rule(&self) -> DealiasRule {
        self.0.rule
    }

    /// Grid spacing `l/n`.
    pub fn h(&self) -> f64 {
        self.0.l / self.0.n as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.h() * self.h()
    }

    /// Number of samples, `n²`.
    pub fn len(&self) -> usize {
        self.0.n * self.0.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Coordinate of node index `i` along either axis.
    pub fn coord(&self, i: usize) -> f64 {
        i as f64 * self.h()
    }

    /// Integer wavenumber for FFT index `i`.
    pub fn kint(&self, i: usize) -> i64 {
        self.0.kint[i]
    }

    /// Physical wavenumber for FFT index `i`.
    pub fn k(&self, i: usize) -> f64 {
        self.0.k[i]
    }

    /// Whether index `i` survives the dealiasing rule along one axis.
    pub fn keeps(&self, i: usize) -> bool {
        self.0.keep[i]
    }

    /// Largest integer wavenumber retained on one axis.
    pub fn kmax(&self) -> usize {
        match self.0.rule {
            DealiasRule::TwoThirds => self.0.n / 3,
            DealiasRule::None => self.0.n / 2 - 1,
        }
    }

    pub(crate) fn check_same(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}
