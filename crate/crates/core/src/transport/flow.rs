use super::interp::cubic;
use crate::spectral::{derivative, inverse_transform, transform, Grid, ScalarField, VectorField};

/// Forward Lagrangian map `X(t, ξ)` sampled at the grid nodes.
///
/// Positions are unwrapped, so `X − ξ` stays continuous and periodic.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowMap {
    grid: Grid,
    positions: Vec<[f64; 2]>,
    t: f64,
}

impl FlowMap {
    pub fn identity(grid: &Grid) -> Self {
        let n = grid.n();
        let mut positions = Vec::with_capacity(grid.len());
        for j in 0..n {
            for i in 0..n {
                positions.push([grid.coord(i), grid.coord(j)]);
            }
        }
        FlowMap {
            grid: grid.clone(),
            positions,
            t: 0.0,
        }
    }

    pub fn from_positions(grid: &Grid, positions: Vec<[f64; 2]>, t: f64) -> Option<Self> {
        (positions.len() == grid.len() && positions.iter().all(|p| p[0].is_finite() && p[1].is_finite())).then(|| {
            FlowMap {
                grid: grid.clone(),
                positions,
                t,
            }
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn positions(&self) -> &[[f64; 2]] {
        &self.positions
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// Displacement `X − ξ` as a periodic vector field.
    pub fn displacement(&self) -> VectorField {
        let n = self.grid.n();
        let mut dx = Vec::with_capacity(self.grid.len());
        let mut dy = Vec::with_capacity(self.grid.len());
        for (idx, p) in self.positions.iter().enumerate() {
            let i = idx % n;
            let j = idx / n;
            dx.push(p[0] - self.grid.coord(i));
            dy.push(p[1] - self.grid.coord(j));
        }
        VectorField {
            x: ScalarField::from_raw(&self.grid, dx),
            y: ScalarField::from_raw(&self.grid, dy),
        }
    }

    /// Image of an arbitrary point, by cubic interpolation of the displacement.
    pub fn map_point(&self, xi: [f64; 2]) -> [f64; 2] {
        let d = self.displacement();
        [xi[0] + cubic(&d.x, xi, false), xi[1] + cubic(&d.y, xi, false)]
    }

    /// Images of many points sharing one displacement evaluation.
    pub fn map_points(&self, xs: &[[f64; 2]]) -> Vec<[f64; 2]> {
        let d = self.displacement();
        xs.iter()
            .map(|&xi| [xi[0] + cubic(&d.x, xi, false), xi[1] + cubic(&d.y, xi, false)])
            .collect()
    }

    /// Pointwise Jacobian determinant of the map, from spectral derivatives of the displacement.
    pub fn jacobian_det(&self) -> ScalarField {
        let d = self.displacement();
        let dx = transform(&d.x);
        let dy = transform(&d.y);
        let a = inverse_transform(&derivative(1, &dx));
        let b = inverse_transform(&derivative(2, &dx));
        let c = inverse_transform(&derivative(1, &dy));
        let e = inverse_transform(&derivative(2, &dy));
        let v = (0..self.grid.len())
            .map(|i| {
                let j11 = 1.0 + a.values()[i];
                let j12 = b.values()[i];
                let j21 = c.values()[i];
                let j22 = 1.0 + e.values()[i];
                j11 * j22 - j12 * j21
            })
            .collect();
        ScalarField::from_raw(&self.grid, v)
    }

    pub(crate) fn advanced(&self, positions: Vec<[f64; 2]>, dt: f64) -> Self {
        FlowMap {
            grid: self.grid.clone(),
            positions,
            t: self.t + dt,
        }
    }
}
