use num_complex::Complex64;

use super::grid::Grid;
use crate::error::{Error, Result};

/// Real samples on an `n×n` periodic grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(ScalarField {
            grid: grid.clone(),
            values,
        })
    }

    /// Construction for values known to be finite and correctly sized.
    pub(crate) fn from_raw(grid: &Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        ScalarField {
            grid: grid.clone(),
            values,
        }
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self::from_raw(grid, vec![0.0; grid.len()])
    }

    pub fn constant(grid: &Grid, c: f64) -> Self {
        Self::from_raw(grid, vec![c; grid.len()])
    }

    /// Samples `f(x1, x2)` at every node.
    pub fn from_fn(grid: &Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        let n = grid.n();
        let mut values = Vec::with_capacity(grid.len());
        for j in 0..n {
            let y = grid.coord(j);
            for i in 0..n {
                values.push(f(grid.coord(i), y));
            }
        }
        Self::from_raw(grid, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Value at node `(i, j)`.
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.grid.n() + i]
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_raw(&self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        Ok(Self::from_raw(
            &self.grid,
            self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        ))
    }

    pub fn add(&self, other: &ScalarField) -> Result<Self> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &ScalarField) -> Result<Self> {
        self.zip_map(other, |a, b| a - b)
    }

    /// Pointwise product without dealiasing.
    pub fn mul(&self, other: &ScalarField) -> Result<Self> {
        self.zip_map(other, |a, b| a * b)
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|v| v * s)
    }

    /// Grid inner product `Σ f g · h²`.
    pub fn dot(&self, other: &ScalarField) -> Result<f64> {
        self.grid.check_same(&other.grid)?;
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum::<f64>() * self.grid.cell_area())
    }

    /// Subtracts the mean.
    pub fn without_mean(&self) -> Self {
        let m = self.mean();
        self.map(|v| v - m)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// Complex Fourier coefficients in FFT layout (unnormalized forward transform).
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn new(grid: &Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} coefficients, got {}",
                grid.len(),
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::NonFinite);
        }
        Ok(SpectralField {
            grid: grid.clone(),
            coeffs,
        })
    }

    pub(crate) fn from_raw(grid: &Grid, coeffs: Vec<Complex64>) -> Self {
        SpectralField {
            grid: grid.clone(),
            coeffs,
        }
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self::from_raw(grid, vec![Complex64::new(0.0, 0.0); grid.len()])
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub(crate) fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient at integer wavenumber `(k1, k2)`.
    pub fn mode(&self, k1: i64, k2: i64) -> Complex64 {
        let n = self.grid.n() as i64;
        let i = k1.rem_euclid(n) as usize;
        let j = k2.rem_euclid(n) as usize;
        self.coeffs[j * self.grid.n() + i]
    }

    /// Mean value of the represented field.
    pub fn mean(&self) -> f64 {
        self.coeffs[0].re / self.grid.len() as f64
    }

    pub fn add(&self, other: &SpectralField) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        Ok(Self::from_raw(
            &self.grid,
            self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        ))
    }

    pub fn sub(&self, other: &SpectralField) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        Ok(Self::from_raw(
            &self.grid,
            self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect(),
        ))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_raw(&self.grid, self.coeffs.iter().map(|c| c * s).collect())
    }

    /// Multiplies every mode by `symbol(k1, k2)` where `k` are physical wavenumbers.
    pub fn apply_symbol(&self, symbol: impl Fn(f64, f64) -> Complex64) -> Self {
        let g = &self.grid;
        let n = g.n();
        let mut out = Vec::with_capacity(g.len());
        for j in 0..n {
            let k2 = g.k(j);
            for i in 0..n {
                out.push(self.coeffs[j * n + i] * symbol(g.k(i), k2));
            }
        }
        Self::from_raw(g, out)
    }

    /// Real-valued symbol variant of [`apply_symbol`](Self::apply_symbol).
    pub fn apply_real_symbol(&self, symbol: impl Fn(f64, f64) -> f64) -> Self {
        self.apply_symbol(|a, b| Complex64::new(symbol(a, b), 0.0))
    }

    /// Zeroes modes removed by the grid's dealiasing rule.
    pub fn dealiased(mut self) -> Self {
        self.dealias_in_place();
        self
    }

    pub(crate) fn dealias_in_place(&mut self) {
        let g = self.grid.clone();
        let n = g.n();
        for j in 0..n {
            let kj = g.keeps(j);
            for i in 0..n {
                if !(kj && g.keeps(i)) {
                    self.coeffs[j * n + i] = Complex64::new(0.0, 0.0);
                }
            }
        }
    }

    /// Removes the zero mode.
    pub fn without_mean(mut self) -> Self {
        self.coeffs[0] = Complex64::new(0.0, 0.0);
        self
    }

    /// Whether every mode outside the dealiasing band is exactly zero.
    pub fn is_dealiased(&self) -> bool {
        let g = &self.grid;
        let n = g.n();
        (0..n).all(|j| (0..n).all(|i| (g.keeps(i) && g.keeps(j)) || self.coeffs[j * n + i] == Complex64::new(0.0, 0.0)))
    }

    /// `Σ |c|²`, unnormalized.
    pub fn energy_sum(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// Two-component field sharing one grid.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    pub x: ScalarField,
    pub y: ScalarField,
}

impl VectorField {
    pub fn new(x: ScalarField, y: ScalarField) -> Result<Self> {
        x.grid().check_same(y.grid())?;
        Ok(VectorField { x, y })
    }

    pub fn zeros(grid: &Grid) -> Self {
        VectorField {
            x: ScalarField::zeros(grid),
            y: ScalarField::zeros(grid),
        }
    }

    pub fn constant(grid: &Grid, c: [f64; 2]) -> Self {
        VectorField {
            x: ScalarField::constant(grid, c[0]),
            y: ScalarField::constant(grid, c[1]),
        }
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(f64, f64) -> [f64; 2]) -> Self {
        VectorField {
            x: ScalarField::from_fn(grid, |a, b| f(a, b)[0]),
            y: ScalarField::from_fn(grid, |a, b| f(a, b)[1]),
        }
    }

    pub fn grid(&self) -> &Grid {
        self.x.grid()
    }

    /// Pointwise Euclidean magnitude.
    pub fn magnitude(&self) -> ScalarField {
        self.x
            .zip_map(&self.y, |a, b| a.hypot(b))
            .expect("components share a grid")
    }

    pub fn scale(&self, s: f64) -> Self {
        VectorField {
            x: self.x.scale(s),
            y: self.y.scale(s),
        }
    }

    pub fn add(&self, other: &VectorField) -> Result<Self> {
        Ok(VectorField {
            x: self.x.add(&other.x)?,
            y: self.y.add(&other.y)?,
        })
    }

    pub fn sub(&self, other: &VectorField) -> Result<Self> {
        Ok(VectorField {
            x: self.x.sub(&other.x)?,
            y: self.y.sub(&other.y)?,
        })
    }

    /// Rotation by +90°: `v⊥ = (−v2, v1)`.
    pub fn perp(&self) -> Self {
        VectorField {
            x: self.y.scale(-1.0),
            y: self.x.clone(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// Symmetric 2×2 tensor field stored by its three independent entries.
#[derive(Clone, Debug, PartialEq)]
pub struct SymTensorField {
    pub s11: ScalarField,
    pub s12: ScalarField,
    pub s22: ScalarField,
}

impl SymTensorField {
    pub fn grid(&self) -> &Grid {
        self.s11.grid()
    }

    pub fn trace(&self) -> ScalarField {
        self.s11.add(&self.s22).expect("entries share a grid")
    }

    /// Pointwise Frobenius norm.
    pub fn frobenius(&self) -> ScalarField {
        let v = self
            .s11
            .values()
            .iter()
            .zip(self.s12.values())
            .zip(self.s22.values())
            .map(|((a, b), c)| (a * a + 2.0 * b * b + c * c).sqrt())
            .collect();
        ScalarField::from_raw(self.grid(), v)
    }
}

/// Full 2×2 gradient field `G_ij = ∂_j v_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct GradientField {
    pub g11: ScalarField,
    pub g12: ScalarField,
    pub g21: ScalarField,
    pub g22: ScalarField,
}

impl GradientField {
    pub fn grid(&self) -> &Grid {
        self.g11.grid()
    }

    /// Pointwise Frobenius norm.
    pub fn frobenius(&self) -> ScalarField {
        let n = self.grid().len();
        let (a, b, c, d) = (
            self.g11.values(),
            self.g12.values(),
            self.g21.values(),
            self.g22.values(),
        );
        let v = (0..n)
            .map(|i| (a[i] * a[i] + b[i] * b[i] + c[i] * c[i] + d[i] * d[i]).sqrt())
            .collect();
        ScalarField::from_raw(self.grid(), v)
    }

    /// Matrix at node index `idx`, as `[[g11, g12], [g21, g22]]`.
    pub fn at(&self, idx: usize) -> [[f64; 2]; 2] {
        [
            [self.g11.values()[idx], self.g12.values()[idx]],
            [self.g21.values()[idx], self.g22.values()[idx]],
        ]
    }
}
