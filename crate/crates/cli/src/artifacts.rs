//! On-disk artifact formats: JSON for structured results and manifests,
//! CSV for gridded numeric output.
//!
//! Every writer is deterministic byte for byte: floats go through the
//! shortest round-trip formatter, JSON keys follow struct order, and
//! nothing records wall-clock time or host identity.

use std::io::{self, Write};

use serde::Serialize;

use qndsim_core::envelope::EnvelopePoint;
use qndsim_core::fock::wigner::{NegativityMetrics, WignerGrid};
use qndsim_core::nlv::{threshold_nc, threshold_ng, Classification, NlvParabola};
use qndsim_core::protocol::QuadMoments;

use crate::scenario::Scenario;

pub const TOOL_NAME: &str = "qndsim";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Reproducibility record written alongside every run.
#[derive(Serialize)]
pub struct Manifest<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    /// Effective seed after any command-line override.
    pub seed: u64,
    /// Number-basis description, when a fock engine ran.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub basis: Option<String>,
    /// The scenario as executed, with defaults materialized.
    pub scenario: &'a Scenario,
    /// File names written by this run, in write order.
    pub artifacts: &'a [String],
}

#[derive(Serialize)]
pub struct ParabolaArtifact {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub lambda_min: f64,
    pub sigma_min: f64,
    pub classification: ClassificationArtifact,
}

#[derive(Serialize)]
pub struct ClassificationArtifact {
    pub nonclassical: bool,
    pub non_gaussian: bool,
    /// λ windows where σ(λ) certifies nonclassicality.
    pub nc_intervals: Vec<[f64; 2]>,
    pub ng_intervals: Vec<[f64; 2]>,
}

impl ParabolaArtifact {
    pub fn new(p: &NlvParabola, c: &Classification) -> Self {
        ParabolaArtifact {
            c0: p.c0,
            c1: p.c1,
            c2: p.c2,
            lambda_min: p.lambda_min(),
            sigma_min: p.sigma_min(),
            classification: ClassificationArtifact {
                nonclassical: c.nonclassical,
                non_gaussian: c.non_gaussian,
                nc_intervals: c.nc_intervals.iter().map(|&(a, b)| [a, b]).collect(),
                ng_intervals: c.ng_intervals.iter().map(|&(a, b)| [a, b]).collect(),
            },
        }
    }
}

#[derive(Serialize)]
pub struct MomentsArtifact {
    pub labels: [&'static str; 4],
    pub mean: [f64; 4],
    pub cov: [[f64; 4]; 4],
}

impl MomentsArtifact {
    pub fn new(m: &QuadMoments) -> Self {
        MomentsArtifact { labels: ["X", "Y", "q", "p"], mean: m.mean, cov: m.cov }
    }
}

/// One checkpoint's negativity figures. `min_value` is reported in the
/// plotted 2πW convention, matching the CSV grids; the volume integrates
/// the raw W.
#[derive(Serialize)]
pub struct WignerSummaryEntry {
    pub checkpoint: &'static str,
    pub min_value: f64,
    pub negative_volume: f64,
}

impl WignerSummaryEntry {
    pub fn new(checkpoint: &'static str, m: &NegativityMetrics) -> Self {
        WignerSummaryEntry {
            checkpoint,
            min_value: core::f64::consts::TAU * m.min_value,
            negative_volume: m.negative_volume,
        }
    }
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json<W: Write, T: Serialize>(w: &mut W, value: &T) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut *w, value)?;
    w.write_all(b"\n")
}

/// Envelope table: λ, the achieved variance, both thresholds, the
/// certification flags (0/1), and one argmin column per control.
pub fn write_envelope_csv<W: Write>(
    w: &mut W,
    points: &[EnvelopePoint],
    columns: &[&'static str],
) -> io::Result<()> {
    write!(w, "lambda,sigma_env,sigma_nc,sigma_ng,flag_nc,flag_ng")?;
    for c in columns {
        write!(w, ",argmin_{c}")?;
    }
    writeln!(w)?;
    for p in points {
        write!(
            w,
            "{},{},{},{},{},{}",
            p.lambda,
            p.sigma_env,
            threshold_nc(p.lambda),
            threshold_ng(p.lambda),
            p.nonclassical as u8,
            p.non_gaussian as u8
        )?;
        for v in &p.argmin {
            write!(w, ",{v}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Phase-space grid with values premultiplied by 2π (the plotted quantity).
/// X varies fastest; rows follow the grid's row-major layout.
pub fn write_wigner_csv<W: Write>(w: &mut W, grid: &WignerGrid) -> io::Result<()> {
    writeln!(w, "X,Y,w2pi")?;
    let xs = grid.spec.xs();
    let ys = grid.spec.ys();
    for (iy, y) in ys.iter().enumerate() {
        for (ix, x) in xs.iter().enumerate() {
            let v = core::f64::consts::TAU * grid.values[iy * grid.spec.nx + ix];
            writeln!(w, "{x},{y},{v}")?;
        }
    }
    Ok(())
}

/// Threshold table for the `thresholds` command.
pub fn write_thresholds_csv<W: Write>(w: &mut W, lambdas: &[f64]) -> io::Result<()> {
    writeln!(w, "lambda,sigma_nc,sigma_ng,sigma_sq")?;
    for &l in lambdas {
        writeln!(
            w,
            "{},{},{},{}",
            l,
            threshold_nc(l),
            threshold_ng(l),
            qndsim_core::nlv::threshold_sq(l)
        )?;
    }
    Ok(())
}
