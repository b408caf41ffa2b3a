//! Initial data for viscosity patches and concentric layers, their tangent
//! vector fields, and the tracked interface polyline.
//!
//! Tangent fields wind once around the patch centre on the interface annulus
//! and are constant far away. No continuous unit field can interpolate
//! between winding numbers one and zero, so the collar fields carry a jump
//! along the ray `θ = π` (angles measured with `atan2`, cut on the negative
//! `x1` axis through the centre).

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::random::wrap;
use crate::spectral::{Grid, ScalarField, VectorField};
use crate::transport::FlowMap;

/// Quintic smoothstep on `[0, 1]`, clamped outside.
pub fn smoothstep(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    x * x * x * (x * (6.0 * x - 15.0) + 10.0)
}

/// Viscosity profile inside or outside an interface.
#[derive(Clone, Debug, PartialEq)]
pub enum RadialProfile {
    Constant(f64),
    /// `Σ c_k r^k` in the distance `r` from the patch centre.
    Polynomial(Vec<f64>),
}

impl RadialProfile {
    pub fn eval(&self, r: f64) -> f64 {
        match self {
            RadialProfile::Constant(c) => *c,
            RadialProfile::Polynomial(c) => c.iter().rev().fold(0.0, |acc, &ck| acc * r + ck),
        }
    }

    /// Sampled extrema over `[r0, r1]`.
    fn range(&self, r0: f64, r1: f64) -> (f64, f64) {
        (0..=256)
            .map(|i| self.eval(r0 + (r1 - r0) * i as f64 / 256.0))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    }
}

impl From<f64> for RadialProfile {
    fn from(c: f64) -> Self {
        RadialProfile::Constant(c)
    }
}

/// Circular viscosity patch.
#[derive(Clone, Debug, PartialEq)]
pub struct PatchSpec {
    pub center: [f64; 2],
    pub radius: f64,
    pub mu_in: RadialProfile,
    pub mu_out: RadialProfile,
    /// Width of the smoothed jump, in grid cells.
    pub mollify_width: f64,
}

impl PatchSpec {
    pub fn new(center: [f64; 2], radius: f64, mu_in: f64, mu_out: f64) -> Self {
        PatchSpec {
            center,
            radius,
            mu_in: mu_in.into(),
            mu_out: mu_out.into(),
            mollify_width: 2.0,
        }
    }

    /// Centred patch on the grid's torus.
    pub fn centered(grid: &Grid, radius: f64, mu_in: f64, mu_out: f64) -> Self {
        Self::new([grid.l() / 2.0, grid.l() / 2.0], radius, mu_in, mu_out)
    }

    pub fn validate(&self, grid: &Grid) -> Result<()> {
        if !(self.radius > 0.0) {
            return Err(Error::Geometry(format!("radius {} must be positive", self.radius)));
        }
        if 3.0 * self.radius > grid.l() / 2.0 {
            return Err(Error::Geometry(format!(
                "3·radius = {} exceeds the half period {}",
                3.0 * self.radius,
                grid.l() / 2.0
            )));
        }
        if !(self.mollify_width >= 2.0) {
            return Err(Error::Geometry(format!(
                "mollify_width = {} cells is below the minimum of 2",
                self.mollify_width
            )));
        }
        let (lo, _) = self.value_range(grid);
        if !(lo > 0.0) {
            return Err(Error::Geometry("viscosity profiles must stay positive".into()));
        }
        Ok(())
    }

    /// Extremes of the viscosity the patch can produce.
    pub fn value_range(&self, grid: &Grid) -> (f64, f64) {
        let rmax = grid.l() * std::f64::consts::FRAC_1_SQRT_2;
        let (a, b) = self.mu_in.range(0.0, self.radius + self.mollify_width * grid.h());
        let (c, d) = self
            .mu_out
            .range((self.radius - self.mollify_width * grid.h()).max(0.0), rmax);
        (a.min(c), b.max(d))
    }
}

/// Concentric layers around a common centre.
///
/// `values[0]` is the inner disc, `values[j]` the annulus `radii[j-1] < r < radii[j]`
/// and the last entry the exterior, so `values.len() == radii.len() + 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerSpec {
    pub center: [f64; 2],
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    pub mollify_width: f64,
}

impl LayerSpec {
    pub fn validate(&self, grid: &Grid) -> Result<()> {
        if self.radii.is_empty() {
            return Err(Error::Geometry("at least one radius is required".into()));
        }
        if self.values.len() != self.radii.len() + 1 {
            return Err(Error::Geometry(format!(
                "{} radii need {} values, got {}",
                self.radii.len(),
                self.radii.len() + 1,
                self.values.len()
            )));
        }
        if self.radii[0] <= 0.0 || self.radii.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Geometry("radii must be positive and strictly increasing".into()));
        }
        let w = self.mollify_width * grid.h();
        if !(self.mollify_width >= 2.0) {
            return Err(Error::Geometry("mollify_width must be at least 2 cells".into()));
        }
        if self.radii.windows(2).any(|p| p[1] - p[0] <= w) || self.radii[0] <= w {
            return Err(Error::Geometry(
                "layer spacing must exceed the mollification width".into(),
            ));
        }
        if self.values.iter().any(|&v| !(v > 0.0)) {
            return Err(Error::Geometry("layer values must be positive".into()));
        }
        let outer = self.radii.last().copied().unwrap_or_default();
        if w >= 7.0 / 8.0 * outer {
            return Err(Error::Geometry(
                "mollification width leaves no room for the outer collar".into(),
            ));
        }
        if 15.0 / 8.0 * outer > grid.l() / 2.0 {
            return Err(Error::Geometry(format!(
                "outer collar radius {} exceeds the half period {}",
                15.0 / 8.0 * outer,
                grid.l() / 2.0
            )));
        }
        Ok(())
    }
}

fn polar(grid: &Grid, c: [f64; 2], x: f64, y: f64) -> (f64, f64, f64, f64) {
    let dx = wrap(x - c[0], grid.l());
    let dy = wrap(y - c[1], grid.l());
    (dx.hypot(dy), dy.atan2(dx), dx, dy)
}

/// Smoothed step from 0 (inside `r0`) to 1 (outside) over width `w`.
fn step_out(r: f64, r0: f64, w: f64) -> f64 {
    smoothstep((r - r0) / w + 0.5)
}

/// Patch viscosity: the inner profile blended to the outer one across the circle.
pub fn make_patch_mu(grid: &Grid, spec: &PatchSpec) -> Result<ScalarField> {
    spec.validate(grid)?;
    let w = spec.mollify_width * grid.h();
    Ok(ScalarField::from_fn(grid, |x, y| {
        let (r, ..) = polar(grid, spec.center, x, y);
        let s = step_out(r, spec.radius, w);
        let inner = spec.mu_in.eval(r);
        let outer = spec.mu_out.eval(r);
        inner + (outer - inner) * s
    }))
}

/// Layered viscosity with smoothed jumps at every radius.
pub fn make_layer_mu(grid: &Grid, spec: &LayerSpec) -> Result<ScalarField> {
    spec.validate(grid)?;
    let w = spec.mollify_width * grid.h();
    Ok(ScalarField::from_fn(grid, |x, y| {
        let (r, ..) = polar(grid, spec.center, x, y);
        let mut v = spec.values[0];
        for (j, &rj) in spec.radii.iter().enumerate() {
            v += (spec.values[j + 1] - spec.values[j]) * step_out(r, rj, w);
        }
        v
    }))
}

/// Two-value checkerboard `μ ∈ {1/k, k}` with `cells × cells` squares and smoothed edges.
pub fn make_checkerboard_mu(grid: &Grid, k: f64, cells: usize, mollify_width: f64) -> Result<ScalarField> {
    if !(k >= 1.0) || cells == 0 || cells % 2 == 1 {
        return Err(Error::Geometry("need k >= 1 and an even, positive cell count".into()));
    }
    if mollify_width < 2.0 {
        return Err(Error::Geometry("mollify_width must be at least 2 cells".into()));
    }
    let side = grid.l() / cells as f64;
    let w = mollify_width * grid.h();
    let lk = k.ln();
    // smoothed sign of the square wave along one axis
    let sgn = move |x: f64| {
        let t = x.rem_euclid(2.0 * side);
        let d0 = if t < side { t } else { t - 2.0 * side };
        let d1 = side - t;
        let d = if d0.abs() < d1.abs() { d0 } else { d1 };
        2.0 * smoothstep(d / w + 0.5) - 1.0
    };
    Ok(ScalarField::from_fn(grid, |x, y| (lk * sgn(x) * sgn(y)).exp()))
}

fn collar_inner(s: f64, theta: f64) -> [f64; 2] {
    let phi = 3.0 * PI * (s - 0.75) - 2.0 * theta * (s - 0.25);
    [phi.sin(), phi.cos()]
}

fn collar_outer(s: f64, theta: f64) -> [f64; 2] {
    let psi = 3.0 * PI * (s - 1.25) - 2.0 * theta * (s - 1.75);
    [-psi.sin(), psi.cos()]
}

fn e_theta(theta: f64) -> [f64; 2] {
    [-theta.sin(), theta.cos()]
}

/// Unit tangent field for a disc: `e₁` near the centre and far away,
/// `e_θ` on `r/R ∈ [3/4, 5/4]`, joined by phase-rotating collars whose
/// radial parameter is reshaped by a quintic smoothstep.
pub fn make_disc_tau(grid: &Grid, spec: &PatchSpec) -> Result<VectorField> {
    spec.validate(grid)?;
    let big_r = spec.radius;
    Ok(VectorField::from_fn(grid, |x, y| {
        let (r, theta, ..) = polar(grid, spec.center, x, y);
        let rho = r / big_r;
        if rho <= 0.25 || rho >= 1.75 {
            [1.0, 0.0]
        } else if rho < 0.75 {
            collar_inner(0.25 + 0.5 * smoothstep((rho - 0.25) / 0.5), theta)
        } else if rho <= 1.25 {
            e_theta(theta)
        } else {
            collar_outer(1.25 + 0.5 * smoothstep((rho - 1.25) / 0.5), theta)
        }
    }))
}

/// Unit tangent field for concentric layers: `e_θ` on `[r₁ − w, r_N + w]`
/// with `w` the mollification width, `e₁` for `r ≤ r₁/8` and `r ≥ 15r_N/8`,
/// with collars in between.
pub fn make_layer_tau(grid: &Grid, spec: &LayerSpec) -> Result<VectorField> {
    spec.validate(grid)?;
    let w = spec.mollify_width * grid.h();
    let r1 = spec.radii[0];
    let rn = *spec.radii.last().expect("validated nonempty");
    let (a, b) = (r1 / 8.0, 15.0 * rn / 8.0);
    let (ra, rb) = ((r1 - w).max(0.5 * r1), rn + w);
    Ok(VectorField::from_fn(grid, |x, y| {
        let (r, theta, ..) = polar(grid, spec.center, x, y);
        if r <= a || r >= b {
            [1.0, 0.0]
        } else if r < ra {
            collar_inner(0.25 + 0.5 * smoothstep((r - a) / (ra - a)), theta)
        } else if r <= rb {
            e_theta(theta)
        } else {
            collar_outer(1.25 + 0.5 * smoothstep((r - rb) / (b - rb)), theta)
        }
    }))
}

/// Closed polyline tracking an interface.
#[derive(Clone, Debug, PartialEq)]
pub struct InterfaceCurve {
    pub points: Vec<[f64; 2]>,
    pub t: f64,
}

impl InterfaceCurve {
    /// Counter-clockwise circle with `count` nodes.
    pub fn circle(center: [f64; 2], radius: f64, count: usize) -> Self {
        let points = (0..count)
            .map(|k| {
                let a = 2.0 * PI * k as f64 / count as f64;
                [center[0] + radius * a.cos(), center[1] + radius * a.sin()]
            })
            .collect();
        InterfaceCurve { points, t: 0.0 }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn seg(&self, i: usize) -> ([f64; 2], [f64; 2]) {
        (self.points[i], self.points[(i + 1) % self.points.len()])
    }

    pub fn perimeter(&self) -> f64 {
        (0..self.len())
            .map(|i| {
                let (a, b) = self.seg(i);
                (b[0] - a[0]).hypot(b[1] - a[1])
            })
            .sum()
    }

    /// Enclosed area by the shoelace formula.
    pub fn area(&self) -> f64 {
        0.5 * (0..self.len())
            .map(|i| {
                let (a, b) = self.seg(i);
                a[0] * b[1] - b[0] * a[1]
            })
            .sum::<f64>()
            .abs()
    }

    pub fn translated(&self, d: [f64; 2]) -> Self {
        InterfaceCurve {
            points: self.points.iter().map(|p| [p[0] + d[0], p[1] + d[1]]).collect(),
            t: self.t,
        }
    }

    /// Resamples to `count` nodes equally spaced in chord length, placing
    /// them on the Catmull–Rom spline through the current nodes so that
    /// curvature survives resampling.
    pub fn resampled(&self, count: usize) -> Self {
        let m = self.len();
        let mut cum = Vec::with_capacity(m + 1);
        cum.push(0.0);
        for i in 0..m {
            let (a, b) = self.seg(i);
            cum.push(cum[i] + (b[0] - a[0]).hypot(b[1] - a[1]));
        }
        let total = cum[m];
        let mut out = Vec::with_capacity(count);
        let mut seg = 0;
        for k in 0..count {
            let s = total * k as f64 / count as f64;
            while seg + 1 < m && cum[seg + 1] < s {
                seg += 1;
            }
            let len = cum[seg + 1] - cum[seg];
            let f = if len > 0.0 { (s - cum[seg]) / len } else { 0.0 };
            let p0 = self.points[(seg + m - 1) % m];
            let p1 = self.points[seg];
            let p2 = self.points[(seg + 1) % m];
            let p3 = self.points[(seg + 2) % m];
            out.push(catmull_rom(p0, p1, p2, p3, f));
        }
        InterfaceCurve { points: out, t: self.t }
    }

    /// Errors when two non-neighbouring segments cross, or come closer than
    /// `tol` while being far apart along the curve.
    pub fn check_simple(&self, tol: f64) -> Result<()> {
        let m = self.len();
        let mut cum = vec![0.0; m + 1];
        for i in 0..m {
            let (a, b) = self.seg(i);
            cum[i + 1] = cum[i] + (b[0] - a[0]).hypot(b[1] - a[1]);
        }
        let total = cum[m];
        for i in 0..m {
            for j in (i + 2)..m {
                if i == 0 && j == m - 1 {
                    continue;
                }
                let (a, b) = self.seg(i);
                let (c, d) = self.seg(j);
                if segments_cross(a, b, c, d) {
                    return Err(Error::SelfIntersection(i, j));
                }
                let sep = (cum[j] - cum[i]).min(total - (cum[j] - cum[i]));
                if sep > 3.0 * tol && segment_distance(a, b, c, d) < tol {
                    return Err(Error::SelfIntersection(i, j));
                }
            }
        }
        Ok(())
    }
}

fn catmull_rom(p0: [f64; 2], p1: [f64; 2], p2: [f64; 2], p3: [f64; 2], t: f64) -> [f64; 2] {
    let t2 = t * t;
    let t3 = t2 * t;
    let w = [
        -0.5 * t3 + t2 - 0.5 * t,
        1.5 * t3 - 2.5 * t2 + 1.0,
        -1.5 * t3 + 2.0 * t2 + 0.5 * t,
        0.5 * t3 - 0.5 * t2,
    ];
    [
        w[0] * p0[0] + w[1] * p1[0] + w[2] * p2[0] + w[3] * p3[0],
        w[0] * p0[1] + w[1] * p1[1] + w[2] * p2[1] + w[3] * p3[1],
    ]
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn segments_cross(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> bool {
    let d1 = cross(c, d, a);
    let d2 = cross(c, d, b);
    let d3 = cross(a, b, c);
    let d4 = cross(a, b, d);
    (d1 * d2 < 0.0) && (d3 * d4 < 0.0)
}

fn point_segment(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let v = [b[0] - a[0], b[1] - a[1]];
    let w = [p[0] - a[0], p[1] - a[1]];
    let vv = v[0] * v[0] + v[1] * v[1];
    let t = if vv > 0.0 {
        ((w[0] * v[0] + w[1] * v[1]) / vv).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (w[0] - t * v[0]).hypot(w[1] - t * v[1])
}

fn segment_distance(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> f64 {
    point_segment(a, c, d)
        .min(point_segment(b, c, d))
        .min(point_segment(c, a, b))
        .min(point_segment(d, a, b))
}

/// Pushes the initial polyline forward by the flow map and resamples it.
pub fn interface_points(flow: &FlowMap, initial: &InterfaceCurve) -> Result<InterfaceCurve> {
    let mapped = InterfaceCurve {
        points: flow.map_points(&initial.points),
        t: flow.t(),
    };
    let curve = mapped.resampled(initial.len());
    curve.check_simple(0.5 * flow.grid().h())?;
    Ok(curve)
}

/// Arclength and curvature statistics of a closed curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryRegularity {
    pub arclength: f64,
    /// `(∫|κ|^{2+ε} ds)^{1/(2+ε)}`.
    pub curvature_lp: f64,
    pub max_curvature: f64,
}

/// Three-point circumcircle curvature and its `L^{2+ε}` arclength norm.
pub fn boundary_regularity(curve: &InterfaceCurve, epsilon: f64) -> Result<BoundaryRegularity> {
    let m = curve.len();
    if m < 16 {
        return Err(Error::Geometry(format!("curve needs at least 16 points, has {m}")));
    }
    let p = 2.0 + epsilon;
    let mut sum = 0.0;
    let mut kmax: f64 = 0.0;
    let mut any_bent = false;
    for i in 0..m {
        let a = curve.points[(i + m - 1) % m];
        let b = curve.points[i];
        let c = curve.points[(i + 1) % m];
        let ab = (b[0] - a[0]).hypot(b[1] - a[1]);
        let bc = (c[0] - b[0]).hypot(c[1] - b[1]);
        let ca = (a[0] - c[0]).hypot(a[1] - c[1]);
        let area2 = cross(a, b, c).abs();
        let denom = ab * bc * ca;
        let kappa = if denom > 0.0 { 2.0 * area2 / denom } else { 0.0 };
        if kappa > 0.0 {
            any_bent = true;
        }
        kmax = kmax.max(kappa);
        sum += kappa.powf(p) * 0.5 * (ab + bc);
    }
    if !any_bent {
        return Err(Error::Geometry(
            "curve is degenerate (all node triples collinear)".into(),
        ));
    }
    Ok(BoundaryRegularity {
        arclength: curve.perimeter(),
        curvature_lp: sum.powf(1.0 / p),
        max_curvature: kmax,
    })
}
