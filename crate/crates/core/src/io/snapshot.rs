//! `VNS1` binary snapshots.
//!
//! Layout, all little-endian:
//!
//! ```text
//! magic    4 bytes  "VNS1"
//! version  u32
//! n        u32
//! l        f64
//! t        f64
//! dealias  u32      0 = two_thirds, 1 = none
//! mu_lo    f64
//! mu_hi    f64
//! count    u32
//! count × { name_len u16, name utf-8, n·n f64 row-major (index j·n + i) }
//! ```

use std::fs;
use std::path::Path;

use crate::elliptic::ViscosityBounds;
use crate::error::{Error, Result};
use crate::solver::State;
use crate::spectral::{DealiasRule, Grid, ScalarField, VectorField};

pub const SNAPSHOT_MAGIC: &[u8; 4] = b"VNS1";
pub const SNAPSHOT_VERSION: u32 = 1;

/// Decoded snapshot before it is turned into a [`State`].
#[derive(Clone, Debug, PartialEq)]
pub struct SnapshotData {
    pub grid: Grid,
    pub t: f64,
    pub bounds: ViscosityBounds,
    /// Fields in file order.
    pub fields: Vec<(String, ScalarField)>,
}

impl SnapshotData {
    pub fn of_state(s: &State) -> Self {
        let mut fields = vec![
            ("omega".to_string(), s.omega.clone()),
            ("mu".to_string(), s.mu.clone()),
            ("tau_x".to_string(), s.tau.x.clone()),
            ("tau_y".to_string(), s.tau.y.clone()),
            ("dtau_mu".to_string(), s.dtau_mu.clone()),
        ];
        if let Some(th) = &s.theta {
            fields.push(("theta".into(), th.clone()));
        }
        if let Some(tr) = &s.tau_raw {
            fields.push(("tau_raw_x".into(), tr.x.clone()));
            fields.push(("tau_raw_y".into(), tr.y.clone()));
        }
        SnapshotData {
            grid: s.grid().clone(),
            t: s.t,
            bounds: s.bounds,
            fields,
        }
    }

    pub fn field(&self, name: &str) -> Option<&ScalarField> {
        self.fields.iter().find(|(n, _)| n == name).map(|(_, f)| f)
    }

    fn required(&self, name: &str) -> Result<ScalarField> {
        self.field(name)
            .cloned()
            .ok_or_else(|| Error::Snapshot(format!("missing field `{name}`")))
    }

    /// Rebuilds a state; the flow map and tracked interface are not stored.
    pub fn into_state(self) -> Result<State> {
        let tau = VectorField::new(self.required("tau_x")?, self.required("tau_y")?)?;
        let s = State {
            t: self.t,
            omega: self.required("omega")?,
            mu: self.required("mu")?,
            bounds: self.bounds,
            tau,
            dtau_mu: self.required("dtau_mu")?,
            theta: self.field("theta").cloned(),
            tau_raw: match (self.field("tau_raw_x"), self.field("tau_raw_y")) {
                (Some(x), Some(y)) => Some(VectorField::new(x.clone(), y.clone())?),
                _ => None,
            },
            flow: None,
            interface: None,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn encode(&self) -> Vec<u8> {
        let n = self.grid.n();
        let mut out = Vec::with_capacity(64 + self.fields.len() * (16 + 8 * n * n));
        out.extend_from_slice(SNAPSHOT_MAGIC);
        out.extend_from_slice(&SNAPSHOT_VERSION.to_le_bytes());
        out.extend_from_slice(&(n as u32).to_le_bytes());
        out.extend_from_slice(&self.grid.l().to_le_bytes());
        out.extend_from_slice(&self.t.to_le_bytes());
        let rule: u32 = match self.grid.rule() {
            DealiasRule::TwoThirds => 0,
            DealiasRule::None => 1,
        };
        out.extend_from_slice(&rule.to_le_bytes());
        out.extend_from_slice(&self.bounds.mu_lo.to_le_bytes());
        out.extend_from_slice(&self.bounds.mu_hi.to_le_bytes());
        out.extend_from_slice(&(self.fields.len() as u32).to_le_bytes());
        for (name, f) in &self.fields {
            out.extend_from_slice(&(name.len() as u16).to_le_bytes());
            out.extend_from_slice(name.as_bytes());
            for v in f.values() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        let magic = r.take(4)?;
        if magic != SNAPSHOT_MAGIC {
            return Err(Error::Snapshot(format!("bad magic {magic:?}, expected \"VNS1\"")));
        }
        let version = r.u32()?;
        if version != SNAPSHOT_VERSION {
            return Err(Error::Snapshot(format!(
                "unsupported snapshot version {version}, this build reads version {SNAPSHOT_VERSION}"
            )));
        }
        let n = r.u32()? as usize;
        let l = r.f64()?;
        let t = r.f64()?;
        let rule = match r.u32()? {
            0 => DealiasRule::TwoThirds,
            1 => DealiasRule::None,
            other => return Err(Error::Snapshot(format!("unknown dealias code {other}"))),
        };
        let grid = Grid::new(n, l, rule)?;
        let bounds = ViscosityBounds::new(r.f64()?, r.f64()?)?;
        let count = r.u32()? as usize;
        let mut fields = Vec::with_capacity(count.min(64));
        for _ in 0..count {
            let len = r.u16()? as usize;
            let name = std::str::from_utf8(r.take(len)?)
                .map_err(|_| Error::Snapshot("field name is not UTF-8".into()))?
                .to_string();
            if fields.iter().any(|(f, _)| *f == name) {
                return Err(Error::Snapshot(format!("duplicate field `{name}`")));
            }
            let raw = r.take(8 * n * n)?;
            let values = raw
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
                .collect();
            fields.push((name, ScalarField::new(&grid, values)?));
        }
        if r.pos != bytes.len() {
            return Err(Error::Snapshot(format!("{} trailing bytes", bytes.len() - r.pos)));
        }
        Ok(SnapshotData {
            grid,
            t,
            bounds,
            fields,
        })
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, k: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(k)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| {
                Error::Snapshot(format!(
                    "truncated file: need {k} bytes at offset {}, have {}",
                    self.pos,
                    self.bytes.len() - self.pos
                ))
            })?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().expect("2 bytes")))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}

pub fn write_snapshot(path: &Path, state: &State) -> Result<()> {
    fs::write(path, SnapshotData::of_state(state).encode())?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<State> {
    read_snapshot_data(path)?.into_state()
}

pub fn read_snapshot_data(path: &Path) -> Result<SnapshotData> {
    SnapshotData::decode(&fs::read(path)?)
}
