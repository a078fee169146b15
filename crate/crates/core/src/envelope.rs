//! Envelope minimization: the best nonlinear variance reachable at each λ
//! when the protocol's control parameters are tuned within bounds.
//!
//! For a fixed control vector the nonlinear variance is a λ-independent
//! parabola, so the coarse multistart stage runs each protocol once and
//! reuses its parabola across the whole λ grid; only the per-λ Nelder–Mead
//! refinement evaluates fresh control points.  The pipeline is fully
//! deterministic: a factorial coarse grid, exact-value tie-breaking by
//! smallest control norm, and a deterministic simplex refinement.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;

use crate::nlv::{compute_nlv, threshold_nc, threshold_ng, NlvParabola, NlvSide};
use crate::optim::{nelder_mead, NelderMeadOpts, OptimResult};
use crate::protocol::{
    FeedforwardPolicy, ModeState, NoiseModel, ProtocolError, Regime, SymbolicState,
};

/// Which feedforward rules the optimizer may use.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum GateMode {
    /// Gain-symmetric feedforward only.
    Symmetric,
    /// Free choice per control point between the gain-symmetric and the
    /// mediator-cancelling rule; a strict superset of [`GateMode::Symmetric`].
    Asymmetric,
}

/// What a control dimension tunes.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ControlKind {
    /// The regime's principal gain g.
    PrincipalGain,
    /// The auxiliary gain g₁ of the squeezing-generation regime.
    AuxGain,
    /// The mediator signal variance S (readout variance 1/S).
    MediatorSqueezing,
    /// Pulse duration τ; enters only through the heating ν = 2·Γ_m·τ.
    Tau,
}

#[derive(Clone, Copy, Debug)]
pub struct ControlDim {
    pub kind: ControlKind,
    pub lo: f64,
    pub hi: f64,
}

/// Full description of one envelope computation.
#[derive(Clone, Debug)]
pub struct EnvelopeProblem {
    pub regime: Regime,
    pub gamma: f64,
    pub order: u32,
    pub target: ModeState,
    pub source: ModeState,
    /// None runs ideal unitary gates; the model's `policy` field is ignored
    /// here, `gate_mode` decides which feedforward rules are in play.
    pub noise: Option<NoiseModel>,
    pub gate_mode: GateMode,
    pub controls: Vec<ControlDim>,
    /// Mechanical decoherence rate Γ_m; only read by `Tau` controls.
    pub gamma_m: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct EnvelopeOpts {
    /// Coarse multistart points per control dimension.
    pub coarse_points: u32,
    /// Objective-evaluation cap per refinement run per λ (0 = coarse only).
    pub budget: u64,
    pub nm: NelderMeadOpts,
}

impl Default for EnvelopeOpts {
    fn default() -> Self {
        EnvelopeOpts {
            coarse_points: 7,
            budget: 200,
            nm: NelderMeadOpts::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct EnvelopePoint {
    pub lambda: f64,
    pub sigma_env: f64,
    /// Control values achieving `sigma_env`, ordered as `problem.controls`.
    pub argmin: Vec<f64>,
    pub nonclassical: bool,
    pub non_gaussian: bool,
}

/// The parabolas of one control point, one per feedforward rule in play.
#[derive(Clone, Copy, Debug)]
struct PolicyParabolas {
    sym: NlvParabola,
    cancel: Option<NlvParabola>,
}

impl PolicyParabolas {
    fn sigma_sym(&self, lambda: f64) -> f64 {
        self.sym.eval(lambda)
    }

    fn sigma_mode(&self, lambda: f64, mode: GateMode) -> f64 {
        let s = self.sym.eval(lambda);
        match (mode, self.cancel) {
            (GateMode::Asymmetric, Some(c)) => s.min(c.eval(lambda)),
            _ => s,
        }
    }
}

const WITNESS_EPS: f64 = 1e-12;

fn validate(problem: &EnvelopeProblem) -> Result<(), ProtocolError> {
    if problem.controls.is_empty() || problem.controls.len() > 9 {
        return Err(ProtocolError::InvalidParameter(
            "need between 1 and 9 control dimensions",
        ));
    }
    for (i, c) in problem.controls.iter().enumerate() {
        if !(c.lo < c.hi) || !c.lo.is_finite() || !c.hi.is_finite() {
            return Err(ProtocolError::InvalidParameter("control bounds must be finite, lo < hi"));
        }
        if problem.controls[..i].iter().any(|o| o.kind == c.kind) {
            return Err(ProtocolError::InvalidParameter("duplicate control kind"));
        }
        match c.kind {
            ControlKind::AuxGain => {
                if !matches!(problem.regime, Regime::SqueezingGeneration { .. }) {
                    return Err(ProtocolError::InvalidParameter(
                        "auxiliary gain is only a control of the squeezing-generation regime",
                    ));
                }
            }
            ControlKind::PrincipalGain => {
                if matches!(problem.regime, Regime::Custom { .. }) {
                    return Err(ProtocolError::InvalidParameter(
                        "custom regimes expose no principal gain control",
                    ));
                }
            }
            ControlKind::MediatorSqueezing | ControlKind::Tau => {
                if problem.noise.is_none() {
                    return Err(ProtocolError::InvalidParameter(
                        "channel controls need a noise model",
                    ));
                }
            }
        }
    }
    if !problem.gamma.is_finite() {
        return Err(ProtocolError::InvalidParameter("gamma must be finite"));
    }
    Ok(())
}

fn instantiate(
    problem: &EnvelopeProblem,
    controls: &[f64],
) -> Result<(Regime, Option<NoiseModel>), ProtocolError> {
    let mut regime = problem.regime;
    let mut noise = problem.noise;
    for (dim, &v) in problem.controls.iter().zip(controls) {
        match dim.kind {
            ControlKind::PrincipalGain => match &mut regime {
                Regime::FullBroadcast { g }
                | Regime::Simplified { g }
                | Regime::SqueezingGeneration { g, .. } => *g = v,
                Regime::Custom { .. } => unreachable!("validated"),
            },
            ControlKind::AuxGain => match &mut regime {
                Regime::SqueezingGeneration { g1, .. } => *g1 = v,
                _ => unreachable!("validated"),
            },
            ControlKind::MediatorSqueezing => {
                noise.as_mut().expect("validated").mediator_s = v;
            }
            ControlKind::Tau => {
                noise.as_mut().expect("validated").heating = 2.0 * problem.gamma_m * v;
            }
        }
    }
    Ok((regime, noise))
}

/// Run the protocol(s) at one control point.  Singular settings (for
/// instance a zero principal gain where the regime divides by it) return
/// None and are treated as infeasible by the search.
fn eval_point(problem: &EnvelopeProblem, controls: &[f64]) -> Option<PolicyParabolas> {
    let (regime, noise) = instantiate(problem, controls).ok()?;
    let run = |policy: FeedforwardPolicy| -> Result<NlvParabola, ProtocolError> {
        let mut st = SymbolicState::new(problem.target, problem.source, problem.order)?;
        match noise {
            None => st.run_unitary_protocol(&regime, problem.gamma)?,
            Some(mut n) => {
                n.policy = policy;
                st.run_noisy_protocol(&regime, problem.gamma, &n)?;
            }
        }
        Ok(compute_nlv(&st, NlvSide::Target))
    };
    let sym = run(FeedforwardPolicy::GainSymmetric).ok()?;
    let cancel = match (noise.is_some(), problem.gate_mode) {
        (true, GateMode::Asymmetric) => Some(run(FeedforwardPolicy::CancelMediator).ok()?),
        _ => None,
    };
    Some(PolicyParabolas { sym, cancel })
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Minimize the nonlinear variance over the control box for every λ in
/// `lambdas`.  Returns one [`EnvelopePoint`] per grid λ, in order.
pub fn optimize_envelope(
    problem: &EnvelopeProblem,
    lambdas: &[f64],
    opts: &EnvelopeOpts,
) -> Result<Vec<EnvelopePoint>, ProtocolError> {
    validate(problem)?;
    if lambdas.is_empty() {
        return Err(ProtocolError::InvalidParameter("lambda grid must be non-empty"));
    }
    let d = problem.controls.len();
    let pts = opts.coarse_points.max(2) as usize;

    // Coarse factorial grid; each feasible point is one protocol run whose
    // parabola serves every λ.
    let mut coarse: Vec<(Vec<f64>, PolicyParabolas, f64)> = Vec::new();
    let total = pts.pow(d as u32);
    for flat in 0..total {
        let mut x = vec![0.0; d];
        let mut rem = flat;
        for i in 0..d {
            let k = rem % pts;
            rem /= pts;
            let c = &problem.controls[i];
            x[i] = c.lo + (c.hi - c.lo) * k as f64 / (pts - 1) as f64;
        }
        if let Some(ps) = eval_point(problem, &x) {
            let n = norm(&x);
            coarse.push((x, ps, n));
        }
    }
    if coarse.is_empty() {
        return Err(ProtocolError::InvalidParameter(
            "no feasible control point in the coarse grid",
        ));
    }

    let lo: Vec<f64> = problem.controls.iter().map(|c| c.lo).collect();
    let hi: Vec<f64> = problem.controls.iter().map(|c| c.hi).collect();
    // Refinement steps of half a coarse cell keep the simplex local.
    let step: Vec<f64> = problem
        .controls
        .iter()
        .map(|c| 0.5 * (c.hi - c.lo) / (pts - 1) as f64)
        .collect();

    let mut out = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        // Coarse winners under each objective, ties to the smallest norm.
        let pick = |score: &dyn Fn(&PolicyParabolas) -> f64| -> usize {
            let mut best = 0usize;
            for i in 1..coarse.len() {
                let (si, sb) = (score(&coarse[i].1), score(&coarse[best].1));
                if si < sb || (si == sb && coarse[i].2 < coarse[best].2) {
                    best = i;
                }
            }
            best
        };
        let sym_start = pick(&|ps| ps.sigma_sym(lambda));
        let mode_start = pick(&|ps| ps.sigma_mode(lambda, problem.gate_mode));

        let mut best_val = coarse[mode_start].1.sigma_mode(lambda, problem.gate_mode);
        let mut best_x = coarse[mode_start].0.clone();

        if opts.budget > 0 {
            let nm_opts = NelderMeadOpts {
                max_evals: Some(opts.budget),
                ..opts.nm
            };
            // Refinement driven by the gain-symmetric objective.  Every
            // visited point is also scored under the mode objective, so the
            // asymmetric envelope searches a superset of the symmetric one.
            let mut run_nm = |start: usize, search_sym: bool| -> OptimResult {
                let mut obj = |x: &[f64]| -> f64 {
                    match eval_point(problem, x) {
                        Some(ps) => {
                            let m = ps.sigma_mode(lambda, problem.gate_mode);
                            if m < best_val || (m == best_val && norm(x) < norm(&best_x)) {
                                best_val = m;
                                best_x = x.to_vec();
                            }
                            if search_sym {
                                ps.sigma_sym(lambda)
                            } else {
                                m
                            }
                        }
                        None => f64::INFINITY,
                    }
                };
                nelder_mead(&mut obj, &coarse[start].0, &step, &lo, &hi, &nm_opts)
            };
            run_nm(sym_start, true);
            if problem.gate_mode == GateMode::Asymmetric {
                run_nm(mode_start, false);
            }
        }

        out.push(EnvelopePoint {
            lambda,
            sigma_env: best_val,
            argmin: best_x,
            nonclassical: best_val < threshold_nc(lambda) - WITNESS_EPS,
            non_gaussian: best_val < threshold_ng(lambda) - WITNESS_EPS,
        });
    }
    Ok(out)
}
