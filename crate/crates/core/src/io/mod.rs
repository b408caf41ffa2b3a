//! Run configuration, binary snapshots and diagnostics CSV.

mod config;
mod csv;
mod snapshot;

pub use config::{
    parse_config, parse_config_str, CommutatorConfig, InitConfig, InitKind, OmegaKind, ProbeConfig, ProbeMu, RunConfig,
    ThetaKind, PROBE_GROWTH,
};
pub use csv::{
    diagnostics_csv, parse_diagnostics_csv, read_diagnostics_csv, write_diagnostics_csv, CsvHeader, CSV_SCHEMA,
};
pub use snapshot::{read_snapshot, read_snapshot_data, write_snapshot, SnapshotData, SNAPSHOT_MAGIC, SNAPSHOT_VERSION};

use sha2::{Digest, Sha256};

use crate::elliptic::ViscosityBounds;
use crate::error::Result;
use crate::geometry::{make_disc_tau, make_layer_mu, make_layer_tau, make_patch_mu, InterfaceCurve};
use crate::random::{bump, random_smooth_field, rng};
use crate::solver::State;
use crate::spectral::{ScalarField, VectorField};

/// Tangent blend recorded in CSV headers.
pub const TAU_BLEND: &str = "quintic_smoothstep";

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl RunConfig {
    /// Builds the `t = 0` state described by the `init.*` keys.
    pub fn initial_state(&self) -> Result<State> {
        let g = &self.grid;
        let i = &self.init;
        if i.kind == InitKind::File {
            let path = i.file.as_ref().expect("validated");
            let mut s = read_snapshot(path)?;
            if let Some(b) = self.bounds {
                s.bounds = b;
                s.validate()?;
            }
            g.check_same(s.grid())?;
            return Ok(s);
        }
        let kappa = self.taylor_green_wavenumber();
        let omega = match i.omega {
            OmegaKind::TaylorGreen => {
                ScalarField::from_fn(g, |x, y| 2.0 * (kappa * x).sin() * (kappa * y).sin()).scale(i.amplitude)
            }
            OmegaKind::Bump => bump(g, i.bump_center, i.bump_width).scale(i.amplitude),
            OmegaKind::Random => random_smooth_field(g, &mut rng(i.seed), 2.0).scale(i.amplitude),
            OmegaKind::Zero => ScalarField::zeros(g),
        };
        let (mu, tau, curve) = match i.kind {
            InitKind::TaylorGreen => (
                ScalarField::constant(g, i.mu),
                VectorField::constant(g, [1.0, 0.0]),
                None,
            ),
            InitKind::Patch => (
                make_patch_mu(g, &i.patch)?,
                make_disc_tau(g, &i.patch)?,
                Some(InterfaceCurve::circle(
                    i.patch.center,
                    i.patch.radius,
                    i.interface_points,
                )),
            ),
            InitKind::Layers => (
                make_layer_mu(g, &i.layers)?,
                make_layer_tau(g, &i.layers)?,
                i.layers
                    .radii
                    .first()
                    .map(|&r| InterfaceCurve::circle(i.layers.center, r, i.interface_points)),
            ),
            InitKind::File => unreachable!(),
        };
        let bounds = match self.bounds {
            Some(b) => b,
            None => ViscosityBounds::of_field(&mu)?,
        };
        let mut s = State::new(omega, mu, bounds, tau)?;
        let theta = match i.theta {
            ThetaKind::None => None,
            ThetaKind::SinX1 => Some(ScalarField::from_fn(g, |x, _| (kappa * x).sin()).scale(i.theta_amplitude)),
            ThetaKind::Bump => Some(bump(g, i.bump_center, i.bump_width).scale(i.theta_amplitude)),
        };
        if let Some(th) = theta {
            s = s.with_theta(th)?;
        }
        if i.track_interface {
            if let Some(c) = curve {
                s = s.with_interface(c);
            }
        }
        Ok(s)
    }
}
