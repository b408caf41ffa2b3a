//! Flat `dotted.key = value` run configuration.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::elliptic::ViscosityBounds;
use crate::error::{Error, Result};
use crate::geometry::{LayerSpec, PatchSpec, RadialProfile};
use crate::solver::{SolverConfig, Variant};
use crate::spectral::{DealiasRule, Grid};
use crate::transport::{AdvectionScheme, Interpolation, SchemeKind};

/// Every accepted key with its default, in `--print-config` order.
/// An empty default means "derived" or "required".
const KEYS: &[(&str, &str)] = &[
    ("grid.n", "64"),
    ("grid.l", "6.283185307179586"),
    ("grid.dealias", "two_thirds"),
    ("time.t_end", "1"),
    ("time.cfl", "0.5"),
    ("time.sample_every", "0.1"),
    ("solver.variant", "munse"),
    ("solver.nu_bar", ""),
    ("solver.cg_tol", "1e-10"),
    ("solver.scheme", "semi_lagrangian"),
    ("solver.interpolation", "monotone_cubic"),
    ("solver.theta_scheme", "pseudo_spectral_rk"),
    ("solver.mu_lo", ""),
    ("solver.mu_hi", ""),
    ("init.kind", ""),
    ("init.mu", "1"),
    ("init.omega", ""),
    ("init.amplitude", "1"),
    ("init.seed", "0"),
    ("init.bump.x", ""),
    ("init.bump.y", ""),
    ("init.bump.width", ""),
    ("init.theta", "none"),
    ("init.theta_amplitude", "1"),
    ("init.track_interface", ""),
    ("init.interface_points", "256"),
    ("init.patch.center_x", ""),
    ("init.patch.center_y", ""),
    ("init.patch.radius", "1"),
    ("init.patch.mu_in", "2"),
    ("init.patch.mu_out", "0.5"),
    ("init.patch.mollify_width", "2"),
    ("init.layers.center_x", ""),
    ("init.layers.center_y", ""),
    ("init.layers.radii", "0.5, 1"),
    ("init.layers.values", "2, 1, 0.5"),
    ("init.layers.mollify_width", "2"),
    ("init.file.path", ""),
    ("diag.epsilon", "0.5"),
    ("diag.delta", "0.45"),
    ("output.snapshot_every", "0"),
    ("output.dir", "out"),
    ("probe.mu", "checkerboard"),
    ("probe.k", "4"),
    ("probe.cells", "4"),
    ("probe.p_grid", "2.25, 2.5, 3, 3.5, 4, 5, 6, 8"),
    ("probe.threshold", ""),
    ("probe.ensemble", "16"),
    ("probe.seed", "0"),
    ("commutator.p", "2"),
    ("commutator.p1", "4"),
    ("commutator.p2", "4"),
    ("commutator.count", "100"),
    ("commutator.seed", "0"),
    ("commutator.slope", "2"),
];

/// Initial-data family.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitKind {
    TaylorGreen,
    Patch,
    Layers,
    File,
}

impl InitKind {
    pub fn as_str(self) -> &'static str {
        match self {
            InitKind::TaylorGreen => "taylor_green",
            InitKind::Patch => "patch",
            InitKind::Layers => "layers",
            InitKind::File => "file",
        }
    }
}

/// Vorticity profile for patch and layer runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OmegaKind {
    TaylorGreen,
    Bump,
    Random,
    Zero,
}

impl OmegaKind {
    pub fn as_str(self) -> &'static str {
        match self {
            OmegaKind::TaylorGreen => "taylor_green",
            OmegaKind::Bump => "bump",
            OmegaKind::Random => "random",
            OmegaKind::Zero => "zero",
        }
    }
}

/// Initial temperature profile.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ThetaKind {
    None,
    SinX1,
    Bump,
}

impl ThetaKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ThetaKind::None => "none",
            ThetaKind::SinX1 => "sin_x1",
            ThetaKind::Bump => "bump",
        }
    }
}

/// Default blow-up threshold of `probe-rmu`, relative to the `p = 2` estimate.
pub const PROBE_GROWTH: f64 = 1.15;

/// Viscosity used by `probe-rmu`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProbeMu {
    Checkerboard,
    Patch,
    Constant,
}

impl ProbeMu {
    pub fn as_str(self) -> &'static str {
        match self {
            ProbeMu::Checkerboard => "checkerboard",
            ProbeMu::Patch => "patch",
            ProbeMu::Constant => "constant",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InitConfig {
    pub kind: InitKind,
    pub mu: f64,
    pub omega: OmegaKind,
    pub amplitude: f64,
    pub seed: u64,
    pub bump_center: [f64; 2],
    pub bump_width: f64,
    pub theta: ThetaKind,
    pub theta_amplitude: f64,
    pub track_interface: bool,
    pub interface_points: usize,
    pub patch: PatchSpec,
    pub layers: LayerSpec,
    pub file: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeConfig {
    pub mu: ProbeMu,
    pub k: f64,
    pub cells: usize,
    pub p_grid: Vec<f64>,
    /// Absolute threshold; `None` means [`PROBE_GROWTH`] times the `p = 2` estimate.
    pub threshold: Option<f64>,
    pub ensemble: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CommutatorConfig {
    pub p: f64,
    pub p1: f64,
    pub p2: f64,
    pub count: usize,
    pub seed: u64,
    pub slope: f64,
}

/// Fully validated run configuration.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub grid: Grid,
    pub solver: SolverConfig,
    /// Declared viscosity bounds; `None` for file input without explicit bounds.
    pub bounds: Option<ViscosityBounds>,
    pub init: InitConfig,
    pub delta: f64,
    pub snapshot_every: f64,
    pub output_dir: PathBuf,
    pub probe: ProbeConfig,
    pub commutator: CommutatorConfig,
    /// SHA-256 of the normalized configuration text.
    pub sha256: String,
}

struct Raw {
    map: BTreeMap<String, (usize, String)>,
}

impl Raw {
    fn get(&self, key: &str) -> Option<(Option<usize>, &str)> {
        let optional = KEYS.iter().any(|(k, d)| *k == key && d.is_empty());
        match self.map.get(key) {
            // `auto` and `none` are what `normalized` prints for unset optional keys
            Some((_, v)) if optional && (v == "auto" || v == "none") => None,
            Some((line, v)) => Some((Some(*line), v.as_str())),
            None => {
                let d = KEYS.iter().find(|(k, _)| *k == key).map(|(_, d)| *d)?;
                (!d.is_empty()).then_some((None, d))
            }
        }
    }

    fn line(&self, key: &str) -> Option<usize> {
        self.map.get(key).map(|(l, _)| *l)
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse::<T>()
                .map(Some)
                .map_err(|_| Error::config(line, key, format!("cannot parse `{v}`"))),
        }
    }

    fn f64(&self, key: &str) -> Result<Option<f64>> {
        let v: Option<f64> = self.parse(key)?;
        if let Some(x) = v {
            if !x.is_finite() {
                return Err(Error::config(self.line(key), key, "value must be finite"));
            }
        }
        Ok(v)
    }

    fn req_f64(&self, key: &str) -> Result<f64> {
        self.f64(key)?
            .ok_or_else(|| Error::config(None, key, "missing required value"))
    }

    fn list(&self, key: &str) -> Result<Vec<f64>> {
        match self.get(key) {
            None => Ok(Vec::new()),
            Some((line, v)) => v
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .ok()
                        .filter(|x| x.is_finite())
                        .ok_or_else(|| Error::config(line, key, format!("bad list entry `{}`", s.trim())))
                })
                .collect(),
        }
    }

    fn choice<T>(&self, key: &str, parse: impl Fn(&str) -> Option<T>) -> Result<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some((line, v)) => parse(v)
                .map(Some)
                .ok_or_else(|| Error::config(line, key, format!("unknown value `{v}`"))),
        }
    }

    fn invalid(&self, key: &str, msg: impl Into<String>) -> Error {
        Error::config(self.line(key), key, msg)
    }
}

fn profile(values: Vec<f64>) -> Option<RadialProfile> {
    match values.len() {
        0 => None,
        1 => Some(RadialProfile::Constant(values[0])),
        _ => Some(RadialProfile::Polynomial(values)),
    }
}

fn profile_text(p: &RadialProfile) -> String {
    match p {
        RadialProfile::Constant(c) => fmt_f(*c),
        RadialProfile::Polynomial(v) => v.iter().map(|x| fmt_f(*x)).collect::<Vec<_>>().join(", "),
    }
}

fn fmt_f(x: f64) -> String {
    format!("{x}")
}

fn tokenize(text: &str) -> Result<Raw> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (k, v) = content
            .split_once('=')
            .ok_or_else(|| Error::config(Some(line), content, "expected `key = value`"))?;
        let k = k.trim();
        let v = v.trim();
        if !KEYS.iter().any(|(key, _)| *key == k) {
            return Err(Error::config(Some(line), k, "unknown key"));
        }
        if v.is_empty() {
            return Err(Error::config(Some(line), k, "empty value"));
        }
        if map.insert(k.to_string(), (line, v.to_string())).is_some() {
            return Err(Error::config(Some(line), k, "duplicate key"));
        }
    }
    Ok(Raw { map })
}

/// Reads and validates a configuration file.
pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    let mut cfg = parse_config_str(&text)?;
    if let Some(p) = &cfg.init.file {
        if p.is_relative() {
            if let Some(dir) = path.parent() {
                cfg.init.file = Some(dir.join(p));
            }
        }
    }
    Ok(cfg)
}

/// Parses configuration text; see [`parse_config`].
pub fn parse_config_str(text: &str) -> Result<RunConfig> {
    let raw = tokenize(text)?;

    let n: usize = raw.parse("grid.n")?.expect("default");
    let l = raw.f64("grid.l")?.expect("default");
    let rule = raw.choice("grid.dealias", DealiasRule::parse)?.expect("default");
    let grid = Grid::new(n, l, rule).map_err(|e| raw.invalid("grid.n", e.to_string()))?;

    let kind = raw
        .choice("init.kind", |s| match s {
            "taylor_green" => Some(InitKind::TaylorGreen),
            "patch" => Some(InitKind::Patch),
            "layers" => Some(InitKind::Layers),
            "file" => Some(InitKind::File),
            _ => None,
        })?
        .ok_or_else(|| Error::config(None, "init.kind", "missing required value"))?;

    let omega = raw
        .choice("init.omega", |s| match s {
            "taylor_green" => Some(OmegaKind::TaylorGreen),
            "bump" => Some(OmegaKind::Bump),
            "random" => Some(OmegaKind::Random),
            "zero" => Some(OmegaKind::Zero),
            _ => None,
        })?
        .unwrap_or(match kind {
            InitKind::TaylorGreen => OmegaKind::TaylorGreen,
            _ => OmegaKind::Bump,
        });
    let center = [l / 2.0, l / 2.0];
    let bump_center = [
        raw.f64("init.bump.x")?.unwrap_or(0.35 * l),
        raw.f64("init.bump.y")?.unwrap_or(0.55 * l),
    ];
    let bump_width = raw.f64("init.bump.width")?.unwrap_or(l / 12.0);
    if !(bump_width > 0.0) {
        return Err(raw.invalid("init.bump.width", "must be positive"));
    }
    let theta = raw
        .choice("init.theta", |s| match s {
            "none" => Some(ThetaKind::None),
            "sin_x1" => Some(ThetaKind::SinX1),
            "bump" => Some(ThetaKind::Bump),
            _ => None,
        })?
        .expect("default");

    let patch = PatchSpec {
        center: [
            raw.f64("init.patch.center_x")?.unwrap_or(center[0]),
            raw.f64("init.patch.center_y")?.unwrap_or(center[1]),
        ],
        radius: raw.req_f64("init.patch.radius")?,
        mu_in: profile(raw.list("init.patch.mu_in")?).ok_or_else(|| raw.invalid("init.patch.mu_in", "empty"))?,
        mu_out: profile(raw.list("init.patch.mu_out")?).ok_or_else(|| raw.invalid("init.patch.mu_out", "empty"))?,
        mollify_width: raw.req_f64("init.patch.mollify_width")?,
    };
    let layers = LayerSpec {
        center: [
            raw.f64("init.layers.center_x")?.unwrap_or(center[0]),
            raw.f64("init.layers.center_y")?.unwrap_or(center[1]),
        ],
        radii: raw.list("init.layers.radii")?,
        values: raw.list("init.layers.values")?,
        mollify_width: raw.req_f64("init.layers.mollify_width")?,
    };
    let mu_const = raw.req_f64("init.mu")?;

    // bounds implied by the initial data, possibly widened by explicit values
    let implied = match kind {
        InitKind::TaylorGreen => {
            if !(mu_const > 0.0) {
                return Err(raw.invalid("init.mu", "viscosity must be positive"));
            }
            Some((mu_const, mu_const))
        }
        InitKind::Patch => {
            patch
                .validate(&grid)
                .map_err(|e| raw.invalid("init.patch.radius", e.to_string()))?;
            Some(patch.value_range(&grid))
        }
        InitKind::Layers => {
            layers
                .validate(&grid)
                .map_err(|e| raw.invalid("init.layers.radii", e.to_string()))?;
            let lo = layers.values.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = layers.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            Some((lo, hi))
        }
        InitKind::File => None,
    };
    let mu_lo = raw.f64("solver.mu_lo")?;
    let mu_hi = raw.f64("solver.mu_hi")?;
    let bounds = match (implied, mu_lo, mu_hi) {
        (None, Some(lo), Some(hi)) => {
            Some(ViscosityBounds::new(lo, hi).map_err(|e| raw.invalid("solver.mu_lo", e.to_string()))?)
        }
        (None, _, _) => None,
        (Some((lo0, hi0)), lo, hi) => {
            let lo = lo.unwrap_or(lo0);
            let hi = hi.unwrap_or(hi0);
            if lo > lo0 * (1.0 + 1e-12) || hi < hi0 * (1.0 - 1e-12) {
                return Err(raw.invalid(
                    "solver.mu_lo",
                    format!("declared bounds [{lo}, {hi}] do not contain the initial range [{lo0}, {hi0}]"),
                ));
            }
            Some(ViscosityBounds::new(lo, hi).map_err(|e| raw.invalid("solver.mu_lo", e.to_string()))?)
        }
    };

    let scheme = AdvectionScheme {
        kind: raw.choice("solver.scheme", SchemeKind::parse)?.expect("default"),
        interpolation: raw
            .choice("solver.interpolation", Interpolation::parse)?
            .expect("default"),
    };
    if matches!(kind, InitKind::Patch | InitKind::Layers) && !scheme.admits_discontinuous() {
        return Err(raw.invalid(
            "solver.scheme",
            "mollified jumps need semi_lagrangian with cubic or monotone_cubic interpolation",
        ));
    }
    let theta_kind = raw.choice("solver.theta_scheme", SchemeKind::parse)?.expect("default");
    let theta_scheme = match theta_kind {
        SchemeKind::PseudoSpectralRk => AdvectionScheme::SPECTRAL_RK,
        SchemeKind::SemiLagrangian => AdvectionScheme {
            kind: SchemeKind::SemiLagrangian,
            interpolation: Interpolation::Cubic,
        },
    };
    let variant = raw.choice("solver.variant", Variant::parse)?.expect("default");
    if variant == Variant::Boussinesq && theta == ThetaKind::None && kind != InitKind::File {
        return Err(raw.invalid("init.theta", "boussinesq runs need an initial temperature"));
    }
    let solver = SolverConfig {
        nu_bar: raw.f64("solver.nu_bar")?,
        cfl: raw.req_f64("time.cfl")?,
        cg_tol: raw.req_f64("solver.cg_tol")?,
        t_end: raw.req_f64("time.t_end")?,
        sample_every: raw.req_f64("time.sample_every")?,
        scheme,
        theta_scheme,
        variant,
        epsilon: raw.req_f64("diag.epsilon")?,
        blow_up_factor: crate::solver::BLOW_UP_FACTOR,
    };
    let check_bounds = bounds.unwrap_or(ViscosityBounds {
        mu_lo: f64::MIN_POSITIVE,
        mu_hi: f64::MAX,
    });
    solver.validate(check_bounds).map_err(|e| {
        let msg = e.to_string();
        let key = if msg.contains("cfl") {
            "time.cfl"
        } else if msg.contains("cg_tol") {
            "solver.cg_tol"
        } else if msg.contains("t_end") {
            "time.t_end"
        } else if msg.contains("sample_every") {
            "time.sample_every"
        } else if msg.contains("epsilon") {
            "diag.epsilon"
        } else {
            "solver.nu_bar"
        };
        raw.invalid(key, msg)
    })?;

    let delta = raw.req_f64("diag.delta")?;
    let lo = 1.0 / (2.0 + solver.epsilon);
    if !(delta > lo && delta < 0.5) {
        return Err(raw.invalid("diag.delta", format!("must lie in ({lo}, 1/2)")));
    }
    let amplitude = raw.req_f64("init.amplitude")?;
    let theta_amplitude = raw.req_f64("init.theta_amplitude")?;
    let interface_points: usize = raw.parse("init.interface_points")?.expect("default");
    if interface_points < 16 {
        return Err(raw.invalid("init.interface_points", "need at least 16 points"));
    }
    let track_interface: bool = raw.parse("init.track_interface")?.unwrap_or(kind == InitKind::Patch);
    let file = raw.get("init.file.path").map(|(_, v)| PathBuf::from(v));
    if kind == InitKind::File && file.is_none() {
        return Err(Error::config(None, "init.file.path", "required for init.kind = file"));
    }
    let snapshot_every = raw.req_f64("output.snapshot_every")?;
    if !(snapshot_every >= 0.0) {
        return Err(raw.invalid("output.snapshot_every", "must be nonnegative"));
    }

    let probe = ProbeConfig {
        mu: raw
            .choice("probe.mu", |s| match s {
                "checkerboard" => Some(ProbeMu::Checkerboard),
                "patch" => Some(ProbeMu::Patch),
                "constant" => Some(ProbeMu::Constant),
                _ => None,
            })?
            .expect("default"),
        k: raw.req_f64("probe.k")?,
        cells: raw.parse("probe.cells")?.expect("default"),
        p_grid: raw.list("probe.p_grid")?,
        threshold: raw.f64("probe.threshold")?,
        ensemble: raw.parse("probe.ensemble")?.expect("default"),
        seed: raw.parse("probe.seed")?.expect("default"),
    };
    if !(probe.k >= 1.0) {
        return Err(raw.invalid("probe.k", "must be at least 1"));
    }
    if probe.p_grid.is_empty() || probe.p_grid.windows(2).any(|w| w[1] <= w[0]) || probe.p_grid[0] <= 2.0 {
        return Err(raw.invalid("probe.p_grid", "must be strictly ascending with values above 2"));
    }
    if probe.ensemble < 16 {
        return Err(raw.invalid("probe.ensemble", "must be at least 16"));
    }
    let commutator = CommutatorConfig {
        p: raw.req_f64("commutator.p")?,
        p1: raw.req_f64("commutator.p1")?,
        p2: raw.req_f64("commutator.p2")?,
        count: raw.parse("commutator.count")?.expect("default"),
        seed: raw.parse("commutator.seed")?.expect("default"),
        slope: raw.req_f64("commutator.slope")?,
    };
    crate::diagnostics::Exponents::new(commutator.p, commutator.p1, commutator.p2)
        .map_err(|e| raw.invalid("commutator.p", e.to_string()))?;

    let mut cfg = RunConfig {
        grid,
        solver,
        bounds,
        init: InitConfig {
            kind,
            mu: mu_const,
            omega,
            amplitude,
            seed: raw.parse("init.seed")?.expect("default"),
            bump_center,
            bump_width,
            theta,
            theta_amplitude,
            track_interface,
            interface_points,
            patch,
            layers,
            file,
        },
        delta,
        snapshot_every,
        output_dir: PathBuf::from(raw.get("output.dir").map(|(_, v)| v).unwrap_or("out")),
        probe,
        commutator,
        sha256: String::new(),
    };
    cfg.sha256 = crate::io::sha256_hex(cfg.normalized().as_bytes());
    Ok(cfg)
}

impl RunConfig {
    /// Every key with its resolved value, one `key = value` per line.
    pub fn normalized(&self) -> String {
        let s = &self.solver;
        let i = &self.init;
        let list = |v: &[f64]| v.iter().map(|x| fmt_f(*x)).collect::<Vec<_>>().join(", ");
        let nu_bar = match (s.nu_bar, self.bounds) {
            (Some(v), _) => fmt_f(v),
            (None, Some(b)) => fmt_f(b.midpoint()),
            (None, None) => "auto".into(),
        };
        let (lo, hi) = match self.bounds {
            Some(b) => (fmt_f(b.mu_lo), fmt_f(b.mu_hi)),
            None => ("auto".into(), "auto".into()),
        };
        let entries: Vec<(&str, String)> = vec![
            ("grid.n", self.grid.n().to_string()),
            ("grid.l", fmt_f(self.grid.l())),
            ("grid.dealias", self.grid.rule().as_str().into()),
            ("time.t_end", fmt_f(s.t_end)),
            ("time.cfl", fmt_f(s.cfl)),
            ("time.sample_every", fmt_f(s.sample_every)),
            ("solver.variant", s.variant.as_str().into()),
            ("solver.nu_bar", nu_bar),
            ("solver.cg_tol", fmt_f(s.cg_tol)),
            ("solver.scheme", s.scheme.kind.as_str().into()),
            ("solver.interpolation", s.scheme.interpolation.as_str().into()),
            ("solver.theta_scheme", s.theta_scheme.kind.as_str().into()),
            ("solver.mu_lo", lo),
            ("solver.mu_hi", hi),
            ("init.kind", i.kind.as_str().into()),
            ("init.mu", fmt_f(i.mu)),
            ("init.omega", i.omega.as_str().into()),
            ("init.amplitude", fmt_f(i.amplitude)),
            ("init.seed", i.seed.to_string()),
            ("init.bump.x", fmt_f(i.bump_center[0])),
            ("init.bump.y", fmt_f(i.bump_center[1])),
            ("init.bump.width", fmt_f(i.bump_width)),
            ("init.theta", i.theta.as_str().into()),
            ("init.theta_amplitude", fmt_f(i.theta_amplitude)),
            ("init.track_interface", i.track_interface.to_string()),
            ("init.interface_points", i.interface_points.to_string()),
            ("init.patch.center_x", fmt_f(i.patch.center[0])),
            ("init.patch.center_y", fmt_f(i.patch.center[1])),
            ("init.patch.radius", fmt_f(i.patch.radius)),
            ("init.patch.mu_in", profile_text(&i.patch.mu_in)),
            ("init.patch.mu_out", profile_text(&i.patch.mu_out)),
            ("init.patch.mollify_width", fmt_f(i.patch.mollify_width)),
            ("init.layers.center_x", fmt_f(i.layers.center[0])),
            ("init.layers.center_y", fmt_f(i.layers.center[1])),
            ("init.layers.radii", list(&i.layers.radii)),
            ("init.layers.values", list(&i.layers.values)),
            ("init.layers.mollify_width", fmt_f(i.layers.mollify_width)),
            (
                "init.file.path",
                i.file
                    .as_ref()
                    .map(|p| p.display().to_string())
                    .unwrap_or_else(|| "none".into()),
            ),
            ("diag.epsilon", fmt_f(s.epsilon)),
            ("diag.delta", fmt_f(self.delta)),
            ("output.snapshot_every", fmt_f(self.snapshot_every)),
            ("output.dir", self.output_dir.display().to_string()),
            ("probe.mu", self.probe.mu.as_str().into()),
            ("probe.k", fmt_f(self.probe.k)),
            ("probe.cells", self.probe.cells.to_string()),
            ("probe.p_grid", list(&self.probe.p_grid)),
            (
                "probe.threshold",
                self.probe.threshold.map(fmt_f).unwrap_or_else(|| "auto".into()),
            ),
            ("probe.ensemble", self.probe.ensemble.to_string()),
            ("probe.seed", self.probe.seed.to_string()),
            ("commutator.p", fmt_f(self.commutator.p)),
            ("commutator.p1", fmt_f(self.commutator.p1)),
            ("commutator.p2", fmt_f(self.commutator.p2)),
            ("commutator.count", self.commutator.count.to_string()),
            ("commutator.seed", self.commutator.seed.to_string()),
            ("commutator.slope", fmt_f(self.commutator.slope)),
        ];
        debug_assert_eq!(entries.len(), KEYS.len());
        let mut out = String::new();
        for (k, v) in entries {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    /// Taylor–Green vorticity `2 sin(κx₁) sin(κx₂)` with `κ = 2π/l`.
    pub fn taylor_green_wavenumber(&self) -> f64 {
        2.0 * PI / self.grid.l()
    }
}
