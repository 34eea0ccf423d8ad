//! CSV and JSON writers. Column names are fixed so that plotting scripts
//! can rely on them; JSON files carry the same rows plus a metadata map.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::Serialize;

use crate::chronometry::PhaseSample;
use crate::dynamics::{Trajectory, TrajectorySample};
use crate::legendre::RegimeClass;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::InvalidArgument(format!("unknown format {other:?} (expected csv or json)"))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

/// Key/value run metadata written to JSON outputs.
pub type Metadata = BTreeMap<String, String>;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TrajectoryRow {
    #[serde(rename = "τ")]
    pub tau: f64,
    pub x0: f64,
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
    pub p0: f64,
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    pub k0: f64,
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub pi0: f64,
    pub pi1: f64,
    pub pi2: f64,
    pub pi3: f64,
    pub psi1: f64,
    pub psi2: f64,
    pub psi3: f64,
    pub psi4: f64,
}

impl From<&TrajectorySample> for TrajectoryRow {
    fn from(s: &TrajectorySample) -> Self {
        let (x, p, k, pi) = (s.point.x, s.point.p, s.point.k, s.point.pi);
        let r = &s.report;
        TrajectoryRow {
            tau: s.tau,
            x0: x[0],
            x1: x[1],
            x2: x[2],
            x3: x[3],
            p0: p[0],
            p1: p[1],
            p2: p[2],
            p3: p[3],
            k0: k[0],
            k1: k[1],
            k2: k[2],
            k3: k[3],
            pi0: pi[0],
            pi1: pi[1],
            pi2: pi[2],
            pi3: pi[3],
            psi1: r.psi1,
            psi2: r.psi2,
            psi3: r.psi3,
            psi4: r.psi4,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PhaseRow {
    #[serde(rename = "τ")]
    pub tau: f64,
    #[serde(rename = "φ")]
    pub phi: f64,
    /// `None` when the image sits at infinity.
    #[serde(rename = "Re(κ)")]
    pub re_kappa: Option<f64>,
    #[serde(rename = "Im(κ)")]
    pub im_kappa: Option<f64>,
}

impl From<&PhaseSample> for PhaseRow {
    fn from(s: &PhaseSample) -> Self {
        let z = s.kappa.to_complex();
        PhaseRow { tau: s.tau, phi: s.phi, re_kappa: z.map(|z| z.re), im_kappa: z.map(|z| z.im) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankRow {
    pub u1: f64,
    pub u2: f64,
    /// Regime label, or `error` for cells without a regime.
    pub regime: String,
    pub rank: Option<usize>,
    pub j1: Option<f64>,
    pub j2: Option<f64>,
}

impl RankRow {
    pub fn classified(u1: f64, u2: f64, class: &RegimeClass) -> Self {
        RankRow {
            u1,
            u2,
            regime: class.regime.label().to_string(),
            rank: Some(class.rank),
            j1: Some(class.j1),
            j2: Some(class.j2),
        }
    }

    pub fn error(u1: f64, u2: f64) -> Self {
        RankRow { u1, u2, regime: "error".to_string(), rank: None, j1: None, j2: None }
    }

    pub fn is_error(&self) -> bool {
        self.rank.is_none()
    }
}

pub const TRAJECTORY_HEADER: &str = "τ,x0,x1,x2,x3,p0,p1,p2,p3,k0,k1,k2,k3,pi0,pi1,pi2,pi3,psi1,psi2,psi3,psi4";
pub const PHASE_HEADER: &str = "τ,φ,Re(κ),Im(κ)";
pub const RANKMAP_HEADER: &str = "u1,u2,regime,rank,j1,j2";

/// Writes rows as CSV (header from the row type) or as a JSON object
/// `{"metadata": {...}, "rows": [...]}`.
pub fn write_rows<W: Write, T: Serialize>(mut out: W, rows: &[T], format: Format, metadata: &Metadata) -> Result<()> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for r in rows {
                w.serialize(r)?;
            }
            w.flush()?;
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Doc<'a, T> {
                metadata: &'a Metadata,
                rows: &'a [T],
            }
            serde_json::to_writer_pretty(&mut out, &Doc { metadata, rows })?;
            writeln!(out)?;
        }
    }
    Ok(())
}

pub fn trajectory_rows(traj: &Trajectory) -> Vec<TrajectoryRow> {
    traj.samples.iter().map(TrajectoryRow::from).collect()
}

pub fn phase_rows(series: &[PhaseSample]) -> Vec<PhaseRow> {
    series.iter().map(PhaseRow::from).collect()
}

/// Standard metadata describing how a trajectory was produced.
pub fn trajectory_metadata(traj: &Trajectory) -> Metadata {
    let mut m = Metadata::new();
    m.insert("mass".into(), traj.params.mass.to_string());
    m.insert("ell".into(), traj.params.length.to_string());
    m.insert("sigma".into(), traj.params.sigma.value().to_string());
    m.insert("policy".into(), traj.policy.name());
    m.insert("integrator".into(), traj.integrator.clone());
    m.insert("dt".into(), traj.dt.to_string());
    m.insert("samples".into(), traj.len().to_string());
    m
}

pub fn write_trajectory<W: Write>(out: W, traj: &Trajectory, format: Format, metadata: &Metadata) -> Result<()> {
    write_rows(out, &trajectory_rows(traj), format, metadata)
}

pub fn write_phase_series<W: Write>(out: W, series: &[PhaseSample], format: Format, metadata: &Metadata) -> Result<()> {
    write_rows(out, &phase_rows(series), format, metadata)
}

pub fn write_rankmap<W: Write>(out: W, rows: &[RankRow], format: Format, metadata: &Metadata) -> Result<()> {
    write_rows(out, rows, format, metadata)
}
