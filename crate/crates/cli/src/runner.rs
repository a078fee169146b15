//! Scenario execution: parse, dispatch to an engine, persist artifacts.
//!
//! Exit taxonomy: validation failures (bad file, bad bounds, infeasible
//! request) exit 2, numerical failures (basis truncation, integrator or
//! degree-cap limits) exit 3, environment trouble (IO) exits 1.
//!
//! Internal parallelism never changes results: envelope work splits the λ
//! grid into contiguous chunks whose per-λ searches are independent by
//! construction, and Wigner work splits over whole checkpoints, so every
//! float is produced by the same sequence of operations regardless of the
//! worker count.

use std::fmt;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::thread;

use qndsim_core::envelope::{
    optimize_envelope, EnvelopeOpts, EnvelopePoint, EnvelopeProblem, GateMode,
};
use qndsim_core::fock::lindblad::LindbladRates;
use qndsim_core::fock::ode::OdeOpts;
use qndsim_core::fock::run::{
    nonlinearity_only, run_fock_protocol, FockProtocolResult, FockProtocolSpec,
};
use qndsim_core::fock::wigner::{
    compute_wigner, negativity_metrics, WignerGrid, WignerGridSpec,
};
use qndsim_core::fock::{describe_basis, FockDensity, FockError};
use qndsim_core::nlv::{classify, compute_nlv, NlvSide};
use qndsim_core::protocol::{ProtocolError, SymbolicState};

use crate::artifacts::{
    self, Manifest, MomentsArtifact, ParabolaArtifact, WignerSummaryEntry,
};
use crate::scenario::{
    AnalysisSpec, ChannelSpec, CheckpointSpec, Engine, FockSpec, Scenario,
};

#[derive(Debug)]
pub enum CliError {
    /// Rejected input: schema, bounds, or an infeasible request. Exit 2.
    Validation(String),
    /// The simulation could not meet its numerical contract. Exit 3.
    Numerical(String),
    /// Filesystem or environment failure. Exit 1.
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(msg) => write!(f, "invalid scenario: {msg}"),
            CliError::Numerical(msg) => write!(f, "numerical failure: {msg}"),
            CliError::Io(msg) => write!(f, "{msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

fn protocol_err(e: ProtocolError) -> CliError {
    match e {
        ProtocolError::InvalidParameter(_) => CliError::Validation(e.to_string()),
        ProtocolError::Degree(_) => CliError::Numerical(e.to_string()),
    }
}

fn fock_err(e: FockError) -> CliError {
    match e {
        FockError::Invalid(_) => CliError::Validation(e.to_string()),
        _ => CliError::Numerical(e.to_string()),
    }
}

/// Parse and fully validate a scenario file's text.
pub fn parse_scenario(text: &str) -> Result<Scenario, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let scenario: Scenario = serde_path_to_error::deserialize(de)
        .map_err(|e| CliError::Validation(format!("{}: {}", e.path(), e.inner())))?;
    scenario.validate().map_err(CliError::Validation)?;
    Ok(scenario)
}

/// Worker count: `QNDSIM_WORKERS` when set to a positive integer, else the
/// machine's available parallelism.
pub fn workers() -> usize {
    std::env::var("QNDSIM_WORKERS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or_else(|| {
            thread::available_parallelism().map(usize::from).unwrap_or(1)
        })
}

pub struct RunOutcome {
    pub dir: PathBuf,
    /// Artifact file names, in write order (manifest last).
    pub artifacts: Vec<String>,
}

/// Execute a validated scenario and write its artifacts.
pub fn execute(scenario: &Scenario, seed_override: Option<u64>) -> Result<RunOutcome, CliError> {
    let seed = seed_override.or(scenario.seed).unwrap_or(0);
    let dir = PathBuf::from(&scenario.output.dir);
    fs::create_dir_all(&dir)?;

    let mut written: Vec<String> = Vec::new();
    let mut basis = None;
    match (scenario.engine, &scenario.analysis) {
        (Engine::Moments, AnalysisSpec::NlvParabola { lambda_grid }) => {
            let st = run_moments_protocol(scenario)?;
            let parabola = compute_nlv(&st, NlvSide::Target);
            let classification = classify(&parabola, &lambda_grid.values());
            let artifact = ParabolaArtifact::new(&parabola, &classification);
            write_artifact(&dir, "parabola.json", &mut written, |w| {
                artifacts::write_json(w, &artifact)
            })?;
        }
        (Engine::Moments, AnalysisSpec::Moments) => {
            let st = run_moments_protocol(scenario)?;
            let artifact = MomentsArtifact::new(&st.quad_moments());
            write_artifact(&dir, "moments.json", &mut written, |w| {
                artifacts::write_json(w, &artifact)
            })?;
        }
        (Engine::Moments, AnalysisSpec::NlvEnvelope { lambda_grid, controls, budget, symmetric }) => {
            let problem = EnvelopeProblem {
                regime: scenario.regime.to_core(),
                gamma: scenario.nonlinearity.gamma,
                order: scenario.nonlinearity.order,
                target: scenario.initial.target.to_core(),
                source: scenario.initial.source.to_core(),
                noise: scenario.channel.as_ref().map(ChannelSpec::noise_model),
                gate_mode: if *symmetric { GateMode::Symmetric } else { GateMode::Asymmetric },
                controls: controls.iter().map(|c| c.to_core()).collect(),
                gamma_m: scenario
                    .channel
                    .and_then(|c| c.gamma_m)
                    .unwrap_or(0.0),
            };
            let opts = EnvelopeOpts { budget: *budget, ..EnvelopeOpts::default() };
            let points = envelope_over_grid(&problem, &lambda_grid.values(), &opts)?;
            let columns: Vec<&'static str> =
                controls.iter().map(|c| c.kind.column()).collect();
            write_artifact(&dir, "envelope.csv", &mut written, |w| {
                artifacts::write_envelope_csv(w, &points, &columns)
            })?;
        }
        (Engine::Fock, AnalysisSpec::NlvParabola { lambda_grid }) => {
            let fock = scenario.fock.unwrap_or_default();
            let result = run_fock(scenario, &fock)?;
            let parabola = result
                .final_state
                .nlv_parabola(0, scenario.nonlinearity.order)
                .map_err(fock_err)?;
            let classification = classify(&parabola, &lambda_grid.values());
            let artifact = ParabolaArtifact::new(&parabola, &classification);
            write_artifact(&dir, "parabola.json", &mut written, |w| {
                artifacts::write_json(w, &artifact)
            })?;
            basis = Some(describe_basis(fock.dim, fock.tail_guard));
        }
        (Engine::Fock, AnalysisSpec::Moments) => {
            let fock = scenario.fock.unwrap_or_default();
            let result = run_fock(scenario, &fock)?;
            let moments = result.final_state.quadrature_moments().map_err(fock_err)?;
            let artifact = MomentsArtifact::new(&moments);
            write_artifact(&dir, "moments.json", &mut written, |w| {
                artifacts::write_json(w, &artifact)
            })?;
            basis = Some(describe_basis(fock.dim, fock.tail_guard));
        }
        (Engine::Fock, AnalysisSpec::Wigner { grid, checkpoints }) => {
            let fock = scenario.fock.unwrap_or_default();
            let states = checkpoint_states(scenario, &fock, checkpoints)?;
            let spec = WignerGridSpec::square(grid.half_width, grid.points);
            spec.validate().map_err(fock_err)?;
            let grids = wigner_over_checkpoints(&states, &spec)?;

            let mut summary = Vec::with_capacity(checkpoints.len());
            for (cp, grid) in checkpoints.iter().zip(&grids) {
                if grid.coarse_warning {
                    eprintln!(
                        "warning: wigner grid for {} is coarse; negativity figures may be unreliable",
                        cp.label()
                    );
                }
                let name = format!("wigner_{}.csv", cp.label());
                write_artifact(&dir, &name, &mut written, |w| {
                    artifacts::write_wigner_csv(w, grid)
                })?;
                summary.push(WignerSummaryEntry::new(cp.label(), &negativity_metrics(grid)));
            }
            write_artifact(&dir, "wigner_summary.json", &mut written, |w| {
                artifacts::write_json(w, &summary)
            })?;
            basis = Some(describe_basis(fock.dim, fock.tail_guard));
        }
        // Scenario::validate rejects the remaining engine/analysis pairings.
        (engine, analysis) => {
            return Err(CliError::Validation(format!(
                "analysis.kind: {} is not available on the {} engine",
                analysis.kind_name(),
                engine_name(engine),
            )));
        }
    }

    let mut resolved = scenario.clone();
    if resolved.engine == Engine::Fock && resolved.fock.is_none() {
        resolved.fock = Some(FockSpec::default());
    }
    let manifest = Manifest {
        tool: artifacts::TOOL_NAME,
        version: artifacts::TOOL_VERSION,
        seed,
        basis,
        scenario: &resolved,
        artifacts: &written,
    };
    let path = dir.join("manifest.json");
    let mut w = BufWriter::new(fs::File::create(&path)?);
    artifacts::write_json(&mut w, &manifest)?;
    w.flush()?;
    written.push("manifest.json".to_owned());

    Ok(RunOutcome { dir, artifacts: written })
}

pub fn engine_name(engine: Engine) -> &'static str {
    match engine {
        Engine::Moments => "moments",
        Engine::Fock => "fock",
    }
}

fn write_artifact<F>(
    dir: &Path,
    name: &str,
    written: &mut Vec<String>,
    body: F,
) -> Result<(), CliError>
where
    F: FnOnce(&mut BufWriter<fs::File>) -> io::Result<()>,
{
    let mut w = BufWriter::new(fs::File::create(dir.join(name))?);
    body(&mut w)?;
    w.flush()?;
    written.push(name.to_owned());
    Ok(())
}

fn run_moments_protocol(scenario: &Scenario) -> Result<SymbolicState, CliError> {
    let mut st = SymbolicState::new(
        scenario.initial.target.to_core(),
        scenario.initial.source.to_core(),
        scenario.nonlinearity.order,
    )
    .map_err(protocol_err)?;
    let regime = scenario.regime.to_core();
    let gamma = scenario.nonlinearity.gamma;
    match &scenario.channel {
        None => st.run_unitary_protocol(&regime, gamma),
        Some(c) => st.run_noisy_protocol(&regime, gamma, &c.noise_model()),
    }
    .map_err(protocol_err)?;
    Ok(st)
}

fn run_fock(scenario: &Scenario, fock: &FockSpec) -> Result<FockProtocolResult, CliError> {
    let c = scenario.channel.unwrap_or_default();
    let spec = FockProtocolSpec {
        regime: scenario.regime.to_core(),
        gamma: scenario.nonlinearity.gamma,
        order: scenario.nonlinearity.order,
        rates: LindbladRates {
            zeta_a: c.zeta_a.unwrap_or(0.0),
            zeta_m: c.zeta_m.unwrap_or(0.0),
            n_th: c.n_th.unwrap_or(0.0),
        },
        t_gate: c.t_gate.unwrap_or(1.0),
        dim: fock.dim,
        target: scenario.initial.target.to_core(),
        source: scenario.initial.source.to_core(),
        tail_guard: fock.tail_guard,
        ode: OdeOpts::default(),
    };
    run_fock_protocol(&spec).map_err(fock_err)
}

/// Single-mode states for the requested checkpoints, in request order. The
/// protocol runs once, and only when some checkpoint needs it.
fn checkpoint_states(
    scenario: &Scenario,
    fock: &FockSpec,
    checkpoints: &[CheckpointSpec],
) -> Result<Vec<FockDensity>, CliError> {
    let needs_run = checkpoints
        .iter()
        .any(|c| !matches!(c, CheckpointSpec::DirectMechanics));
    let result = if needs_run { Some(run_fock(scenario, fock)?) } else { None };
    checkpoints
        .iter()
        .map(|cp| {
            match cp {
                CheckpointSpec::FinalAtoms => {
                    result.as_ref().unwrap().final_state.partial_trace(0)
                }
                CheckpointSpec::MidMechanics => {
                    result.as_ref().unwrap().after_nonlinearity.partial_trace(1)
                }
                CheckpointSpec::DirectMechanics => nonlinearity_only(
                    &scenario.initial.source.to_core(),
                    scenario.nonlinearity.gamma,
                    scenario.nonlinearity.order,
                    fock.dim,
                ),
            }
            .map_err(fock_err)
        })
        .collect()
}

/// Envelope over the λ grid, split across workers in contiguous chunks.
/// Each λ's search is self-contained, so the split is result-invariant.
fn envelope_over_grid(
    problem: &EnvelopeProblem,
    lambdas: &[f64],
    opts: &EnvelopeOpts,
) -> Result<Vec<EnvelopePoint>, CliError> {
    let n_workers = workers().min(lambdas.len()).max(1);
    if n_workers == 1 {
        return optimize_envelope(problem, lambdas, opts).map_err(protocol_err);
    }
    let chunk = lambdas.len().div_ceil(n_workers);
    let results: Vec<Result<Vec<EnvelopePoint>, ProtocolError>> =
        thread::scope(|scope| {
            let handles: Vec<_> = lambdas
                .chunks(chunk)
                .map(|part| scope.spawn(move || optimize_envelope(problem, part, opts)))
                .collect();
            handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
        });
    let mut out = Vec::with_capacity(lambdas.len());
    for r in results {
        out.extend(r.map_err(protocol_err)?);
    }
    Ok(out)
}

/// One Wigner grid per checkpoint state, each computed whole on one worker.
fn wigner_over_checkpoints(
    states: &[FockDensity],
    spec: &WignerGridSpec,
) -> Result<Vec<WignerGrid>, CliError> {
    if states.len() == 1 || workers() == 1 {
        return states
            .iter()
            .map(|rho| compute_wigner(rho, spec).map_err(fock_err))
            .collect();
    }
    let results: Vec<Result<WignerGrid, FockError>> = thread::scope(|scope| {
        let handles: Vec<_> = states
            .iter()
            .map(|rho| scope.spawn(move || compute_wigner(rho, spec)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    results.into_iter().map(|r| r.map_err(fock_err)).collect()
}
