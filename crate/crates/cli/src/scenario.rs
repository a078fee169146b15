//! Declarative scenario schema: what to simulate, with which engine, and
//! which analysis to persist.
//!
//! Scenarios are JSON objects with snake_case keys and kebab-case `kind`
//! tags. Unknown keys are rejected. Every physical bound of the underlying
//! engine types is re-checked here so a bad file fails before any work
//! starts, with the offending path in the message.

use serde::{Deserialize, Serialize};

use qndsim_core::envelope::{ControlDim, ControlKind};
use qndsim_core::protocol::{FeedforwardPolicy, ModeState, NoiseModel, Regime};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub engine: Engine,
    pub regime: RegimeSpec,
    pub nonlinearity: NonlinearitySpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel: Option<ChannelSpec>,
    #[serde(default)]
    pub initial: InitialSpec,
    pub analysis: AnalysisSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fock: Option<FockSpec>,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Engine {
    /// Exact symbolic moment transport; Gaussian inputs, any gate network.
    Moments,
    /// Truncated number-basis density-matrix evolution.
    Fock,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RegimeSpec {
    FullBroadcast { g: f64 },
    Simplified { g: f64 },
    SqueezingGeneration { g: f64, g1: f64 },
    Custom { gains: [f64; 4] },
}

impl RegimeSpec {
    pub fn to_core(self) -> Regime {
        match self {
            RegimeSpec::FullBroadcast { g } => Regime::FullBroadcast { g },
            RegimeSpec::Simplified { g } => Regime::Simplified { g },
            RegimeSpec::SqueezingGeneration { g, g1 } => {
                Regime::SqueezingGeneration { g, g1 }
            }
            RegimeSpec::Custom { gains } => Regime::Custom { gains },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinearitySpec {
    pub gamma: f64,
    /// Potential order n in V(x) = xⁿ/n; 3 is the cubic gate.
    #[serde(default = "default_order")]
    pub order: u32,
}

fn default_order() -> u32 {
    3
}

/// Channel parameters. The moments engine models each pulse as a hybrid
/// mediated gate (loss, finite squeezing, feedforward, heating, damping);
/// the fock engine attaches Lindblad rates to the gate windows. The two
/// field families are disjoint and validated against the engine choice.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    /// Mediator power transmission, in (0, 1].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    /// Mediator squeezing S > 0 (variance of the writing quadrature).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mediator_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policy: Option<PolicySpec>,
    /// Mechanical heating rate Γ_m ≥ 0; each gate adds 2·Γ_m·τ.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_m: Option<f64>,
    /// Pulse duration τ ≥ 0 entering the heating budget.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    /// Amplitude survival per gate, in (0, 1].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub damping: Option<f64>,
    /// Target-mode amplitude-damping rate ζ_a ≥ 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeta_a: Option<f64>,
    /// Source-mode thermal-contact rate ζ_m ≥ 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeta_m: Option<f64>,
    /// Source bath occupation n_th ≥ 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_th: Option<f64>,
    /// Duration of each QND pulse (default 1).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_gate: Option<f64>,
}

impl ChannelSpec {
    const MOMENTS_FIELDS: [(&'static str, fn(&Self) -> bool); 6] = [
        ("eta", |c| c.eta.is_some()),
        ("mediator_s", |c| c.mediator_s.is_some()),
        ("policy", |c| c.policy.is_some()),
        ("gamma_m", |c| c.gamma_m.is_some()),
        ("tau", |c| c.tau.is_some()),
        ("damping", |c| c.damping.is_some()),
    ];
    const FOCK_FIELDS: [(&'static str, fn(&Self) -> bool); 4] = [
        ("zeta_a", |c| c.zeta_a.is_some()),
        ("zeta_m", |c| c.zeta_m.is_some()),
        ("n_th", |c| c.n_th.is_some()),
        ("t_gate", |c| c.t_gate.is_some()),
    ];

    pub fn heating(&self) -> f64 {
        2.0 * self.gamma_m.unwrap_or(0.0) * self.tau.unwrap_or(1.0)
    }

    /// Hybrid-gate noise model for the moments engine.
    pub fn noise_model(&self) -> NoiseModel {
        NoiseModel {
            eta: self.eta.unwrap_or(1.0),
            mediator_s: self.mediator_s.unwrap_or(1.0),
            policy: self
                .policy
                .unwrap_or(PolicySpec::GainSymmetric)
                .to_core(),
            heating: self.heating(),
            damping: self.damping.unwrap_or(1.0),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicySpec {
    /// Equal writer/receiver gains.
    GainSymmetric,
    /// Receiver gain retuned so the fed-forward mediator noise cancels.
    CancelMediator,
}

impl PolicySpec {
    pub fn to_core(self) -> FeedforwardPolicy {
        match self {
            PolicySpec::GainSymmetric => FeedforwardPolicy::GainSymmetric,
            PolicySpec::CancelMediator => FeedforwardPolicy::CancelMediator,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    #[serde(default)]
    pub target: StateSpec,
    #[serde(default)]
    pub source: StateSpec,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum StateSpec {
    #[default]
    Vacuum,
    /// Position-squeezed vacuum: Var(x) = e^{−2r}.
    Squeezed { r: f64 },
    Thermal { nbar: f64 },
    /// Thermal occupation n̄ with position variance (2n̄+1)·s.
    SqueezedThermal { nbar: f64, s: f64 },
}

impl StateSpec {
    pub fn to_core(self) -> ModeState {
        match self {
            StateSpec::Vacuum => ModeState::Vacuum,
            StateSpec::Squeezed { r } => ModeState::Squeezed { r },
            StateSpec::Thermal { nbar } => ModeState::Thermal { nbar },
            StateSpec::SqueezedThermal { nbar, s } => {
                ModeState::SqueezedThermal { nbar, s }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AnalysisSpec {
    /// Nonlinear-variance parabola of the final target state, classified
    /// against the certification thresholds over the λ grid.
    NlvParabola {
        #[serde(default)]
        lambda_grid: LambdaGrid,
    },
    /// Pointwise-in-λ minimum of the parabola over a control box.
    NlvEnvelope {
        #[serde(default)]
        lambda_grid: LambdaGrid,
        controls: Vec<ControlSpec>,
        /// Refinement evaluation budget per λ; 0 keeps the coarse scan.
        #[serde(default = "default_budget")]
        budget: u64,
        /// Equal writer/receiver gains; false also searches the
        /// mediator-cancelling asymmetric operating point.
        #[serde(default = "default_true")]
        symmetric: bool,
    },
    /// Wigner functions of selected single-mode checkpoints.
    Wigner {
        #[serde(default)]
        grid: WignerSpec,
        #[serde(default = "default_checkpoints")]
        checkpoints: Vec<CheckpointSpec>,
    },
    /// Means and covariances of (X, Y, q, p) after the protocol.
    Moments,
}

impl AnalysisSpec {
    pub fn kind_name(&self) -> &'static str {
        match self {
            AnalysisSpec::NlvParabola { .. } => "nlv-parabola",
            AnalysisSpec::NlvEnvelope { .. } => "nlv-envelope",
            AnalysisSpec::Wigner { .. } => "wigner",
            AnalysisSpec::Moments => "moments",
        }
    }
}

fn default_budget() -> u64 {
    200
}

fn default_true() -> bool {
    true
}

fn default_checkpoints() -> Vec<CheckpointSpec> {
    vec![CheckpointSpec::FinalAtoms]
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LambdaGrid {
    #[serde(default = "lambda_min_default")]
    pub min: f64,
    #[serde(default = "lambda_max_default")]
    pub max: f64,
    #[serde(default = "lambda_points_default")]
    pub points: usize,
}

fn lambda_min_default() -> f64 {
    0.0
}

fn lambda_max_default() -> f64 {
    1.2
}

fn lambda_points_default() -> usize {
    200
}

impl Default for LambdaGrid {
    fn default() -> Self {
        LambdaGrid { min: 0.0, max: 1.2, points: 200 }
    }
}

impl LambdaGrid {
    pub fn values(&self) -> Vec<f64> {
        let step = (self.max - self.min) / (self.points - 1) as f64;
        (0..self.points).map(|i| self.min + step * i as f64).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlSpec {
    pub kind: ControlKindSpec,
    pub lo: f64,
    pub hi: f64,
}

impl ControlSpec {
    pub fn to_core(self) -> ControlDim {
        ControlDim { kind: self.kind.to_core(), lo: self.lo, hi: self.hi }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ControlKindSpec {
    /// Principal QND gain g.
    #[serde(rename = "g")]
    PrincipalGain,
    /// Auxiliary gain g₁ of the squeezing-generation regime.
    #[serde(rename = "g1")]
    AuxGain,
    /// Mediator squeezing S.
    #[serde(rename = "S")]
    MediatorSqueezing,
    /// Pulse duration τ (scales the per-gate heating 2·Γ_m·τ).
    #[serde(rename = "tau")]
    Tau,
}

impl ControlKindSpec {
    pub fn to_core(self) -> ControlKind {
        match self {
            ControlKindSpec::PrincipalGain => ControlKind::PrincipalGain,
            ControlKindSpec::AuxGain => ControlKind::AuxGain,
            ControlKindSpec::MediatorSqueezing => ControlKind::MediatorSqueezing,
            ControlKindSpec::Tau => ControlKind::Tau,
        }
    }

    /// Column suffix in the envelope CSV (argmin_<column>).
    pub fn column(self) -> &'static str {
        match self {
            ControlKindSpec::PrincipalGain => "g",
            ControlKindSpec::AuxGain => "g1",
            ControlKindSpec::MediatorSqueezing => "S",
            ControlKindSpec::Tau => "tau",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WignerSpec {
    /// Half-width of the square phase-space window.
    #[serde(default = "half_width_default")]
    pub half_width: f64,
    /// Points per axis.
    #[serde(default = "wigner_points_default")]
    pub points: usize,
}

fn half_width_default() -> f64 {
    5.0
}

fn wigner_points_default() -> usize {
    101
}

impl Default for WignerSpec {
    fn default() -> Self {
        WignerSpec { half_width: 5.0, points: 101 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckpointSpec {
    /// Target mode after the final gate.
    FinalAtoms,
    /// Source mode right after the nonlinear kick.
    MidMechanics,
    /// Source initial state with only the nonlinearity applied (the
    /// no-broadcast comparison state).
    DirectMechanics,
}

impl CheckpointSpec {
    pub fn label(self) -> &'static str {
        match self {
            CheckpointSpec::FinalAtoms => "final_atoms",
            CheckpointSpec::MidMechanics => "mid_mechanics",
            CheckpointSpec::DirectMechanics => "direct_mechanics",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FockSpec {
    /// Levels per mode.
    #[serde(default = "dim_default")]
    pub dim: usize,
    /// Maximum tolerated population in the top levels of either mode.
    #[serde(default = "tail_guard_default")]
    pub tail_guard: f64,
}

fn dim_default() -> usize {
    40
}

fn tail_guard_default() -> f64 {
    1e-6
}

impl Default for FockSpec {
    fn default() -> Self {
        FockSpec { dim: 40, tail_guard: 1e-6 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Directory receiving the artifacts; created if missing.
    #[serde(default = "dir_default")]
    pub dir: String,
    /// Optional declaration of the gridded-output format; must agree with
    /// what the requested analysis produces.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<FormatSpec>,
}

fn dir_default() -> String {
    ".".to_owned()
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec { dir: ".".to_owned(), format: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FormatSpec {
    Csv,
    Json,
}

fn ensure(ok: bool, msg: &str) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.to_owned())
    }
}

fn finite(v: f64) -> bool {
    v.is_finite()
}

impl Scenario {
    /// Re-check every physical bound with the owning JSON path in the
    /// message. A scenario that passes is safe to hand to the engines.
    pub fn validate(&self) -> Result<(), String> {
        self.regime
            .to_core()
            .gains()
            .map_err(|e| format!("regime: {e}"))?;

        ensure(
            finite(self.nonlinearity.gamma),
            "nonlinearity.gamma: must be finite",
        )?;
        ensure(
            self.nonlinearity.order >= 2,
            "nonlinearity.order: must be at least 2",
        )?;

        if let Some(c) = &self.channel {
            self.validate_channel(c)?;
        }

        self.initial
            .target
            .to_core()
            .variances()
            .map_err(|e| format!("initial.target: {e}"))?;
        self.initial
            .source
            .to_core()
            .variances()
            .map_err(|e| format!("initial.source: {e}"))?;

        self.validate_analysis()?;

        if let Some(f) = &self.fock {
            ensure(
                self.engine == Engine::Fock,
                "fock: only meaningful for the fock engine",
            )?;
            ensure(f.dim >= 2, "fock.dim: must be at least 2")?;
            ensure(
                f.tail_guard > 0.0 && f.tail_guard < 1.0,
                "fock.tail_guard: must be in (0, 1)",
            )?;
        }

        ensure(!self.output.dir.is_empty(), "output.dir: must not be empty")?;
        if let Some(fmt) = self.output.format {
            let expected = match self.analysis {
                AnalysisSpec::NlvParabola { .. } | AnalysisSpec::Moments => {
                    FormatSpec::Json
                }
                AnalysisSpec::NlvEnvelope { .. } | AnalysisSpec::Wigner { .. } => {
                    FormatSpec::Csv
                }
            };
            ensure(
                fmt == expected,
                &format!(
                    "output.format: the {} analysis writes {}",
                    self.analysis.kind_name(),
                    match expected {
                        FormatSpec::Csv => "csv",
                        FormatSpec::Json => "json",
                    }
                ),
            )?;
        }
        Ok(())
    }

    fn validate_channel(&self, c: &ChannelSpec) -> Result<(), String> {
        let (foreign, engine_name) = match self.engine {
            Engine::Moments => (&ChannelSpec::FOCK_FIELDS[..], "fock"),
            Engine::Fock => (&ChannelSpec::MOMENTS_FIELDS[..], "moments"),
        };
        for (name, present) in foreign {
            ensure(
                !present(c),
                &format!("channel.{name}: only meaningful for the {engine_name} engine"),
            )?;
        }
        if let Some(eta) = c.eta {
            ensure(
                finite(eta) && eta > 0.0 && eta <= 1.0,
                "channel.eta: must be in (0, 1]",
            )?;
        }
        if let Some(s) = c.mediator_s {
            ensure(finite(s) && s > 0.0, "channel.mediator_s: must be positive")?;
        }
        if let Some(g) = c.gamma_m {
            ensure(finite(g) && g >= 0.0, "channel.gamma_m: must be non-negative")?;
        }
        if let Some(t) = c.tau {
            ensure(finite(t) && t >= 0.0, "channel.tau: must be non-negative")?;
        }
        if let Some(d) = c.damping {
            ensure(
                finite(d) && d > 0.0 && d <= 1.0,
                "channel.damping: must be in (0, 1]",
            )?;
        }
        if let Some(z) = c.zeta_a {
            ensure(finite(z) && z >= 0.0, "channel.zeta_a: must be non-negative")?;
        }
        if let Some(z) = c.zeta_m {
            ensure(finite(z) && z >= 0.0, "channel.zeta_m: must be non-negative")?;
        }
        if let Some(n) = c.n_th {
            ensure(finite(n) && n >= 0.0, "channel.n_th: must be non-negative")?;
        }
        if let Some(t) = c.t_gate {
            ensure(finite(t) && t > 0.0, "channel.t_gate: must be positive")?;
        }
        Ok(())
    }

    fn validate_analysis(&self) -> Result<(), String> {
        match &self.analysis {
            AnalysisSpec::NlvParabola { lambda_grid } => {
                validate_lambda_grid(lambda_grid)
            }
            AnalysisSpec::NlvEnvelope { lambda_grid, controls, .. } => {
                ensure(
                    self.engine == Engine::Moments,
                    "analysis.kind: nlv-envelope requires the moments engine",
                )?;
                validate_lambda_grid(lambda_grid)?;
                ensure(
                    !controls.is_empty(),
                    "analysis.controls: at least one control is required",
                )?;
                for (i, ctl) in controls.iter().enumerate() {
                    ensure(
                        finite(ctl.lo) && finite(ctl.hi) && ctl.lo < ctl.hi,
                        &format!("analysis.controls[{i}]: bounds must be finite with lo < hi"),
                    )?;
                    ensure(
                        !controls[..i].iter().any(|o| o.kind == ctl.kind),
                        &format!("analysis.controls[{i}]: duplicate control kind"),
                    )?;
                    match ctl.kind {
                        ControlKindSpec::AuxGain => ensure(
                            matches!(self.regime, RegimeSpec::SqueezingGeneration { .. }),
                            &format!(
                                "analysis.controls[{i}]: g1 is only a control of the squeezing-generation regime"
                            ),
                        )?,
                        ControlKindSpec::PrincipalGain => ensure(
                            !matches!(self.regime, RegimeSpec::Custom { .. }),
                            &format!(
                                "analysis.controls[{i}]: custom regimes expose no principal gain control"
                            ),
                        )?,
                        ControlKindSpec::MediatorSqueezing | ControlKindSpec::Tau => {
                            ensure(
                                self.channel.is_some(),
                                &format!(
                                    "analysis.controls[{i}]: channel controls need a channel section"
                                ),
                            )?
                        }
                    }
                }
                Ok(())
            }
            AnalysisSpec::Wigner { grid, checkpoints } => {
                ensure(
                    self.engine == Engine::Fock,
                    "analysis.kind: wigner requires the fock engine",
                )?;
                ensure(
                    finite(grid.half_width) && grid.half_width > 0.0,
                    "analysis.grid.half_width: must be positive",
                )?;
                ensure(grid.points >= 2, "analysis.grid.points: must be at least 2")?;
                ensure(
                    !checkpoints.is_empty(),
                    "analysis.checkpoints: at least one checkpoint is required",
                )?;
                for (i, cp) in checkpoints.iter().enumerate() {
                    ensure(
                        !checkpoints[..i].contains(cp),
                        &format!("analysis.checkpoints[{i}]: duplicate checkpoint"),
                    )?;
                }
                Ok(())
            }
            AnalysisSpec::Moments => Ok(()),
        }
    }
}

fn validate_lambda_grid(grid: &LambdaGrid) -> Result<(), String> {
    ensure(
        finite(grid.min) && finite(grid.max) && grid.min < grid.max,
        "analysis.lambda_grid: must have finite min < max",
    )?;
    ensure(
        grid.points >= 2,
        "analysis.lambda_grid.points: must be at least 2",
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> &'static str {
        r#"{"engine":"moments","regime":{"kind":"full-broadcast","g":1.26},
            "nonlinearity":{"gamma":0.15,"order":3},
            "analysis":{"kind":"nlv-parabola"}}"#
    }

    #[test]
    fn minimal_scenario_fills_documented_defaults() {
        let s: Scenario = serde_json::from_str(minimal()).unwrap();
        s.validate().unwrap();
        assert_eq!(s.engine, Engine::Moments);
        assert_eq!(s.nonlinearity.order, 3);
        match &s.analysis {
            AnalysisSpec::NlvParabola { lambda_grid } => {
                assert_eq!(lambda_grid.min, 0.0);
                assert_eq!(lambda_grid.max, 1.2);
                assert_eq!(lambda_grid.points, 200);
            }
            other => panic!("wrong analysis: {other:?}"),
        }
        assert_eq!(s.initial.target, StateSpec::Vacuum);
        assert_eq!(s.initial.source, StateSpec::Vacuum);
        assert_eq!(s.output.dir, ".");
        assert!(s.channel.is_none() && s.fock.is_none() && s.seed.is_none());
    }

    #[test]
    fn lambda_grid_endpoints_are_exact() {
        let g = LambdaGrid { min: 0.0, max: 1.2, points: 200 };
        let v = g.values();
        assert_eq!(v.len(), 200);
        assert_eq!(v[0], 0.0);
        assert_eq!(v[199], 1.2);
    }

    #[test]
    fn engine_mismatches_are_rejected_with_paths() {
        let wigner_on_moments = r#"{"engine":"moments",
            "regime":{"kind":"full-broadcast","g":1.0},
            "nonlinearity":{"gamma":0.1},
            "analysis":{"kind":"wigner"}}"#;
        let s: Scenario = serde_json::from_str(wigner_on_moments).unwrap();
        let msg = s.validate().unwrap_err();
        assert!(msg.contains("analysis.kind"), "{msg}");

        let envelope_on_fock = r#"{"engine":"fock",
            "regime":{"kind":"full-broadcast","g":1.0},
            "nonlinearity":{"gamma":0.1},
            "analysis":{"kind":"nlv-envelope",
                        "controls":[{"kind":"g","lo":0.5,"hi":2.0}]}}"#;
        let s: Scenario = serde_json::from_str(envelope_on_fock).unwrap();
        let msg = s.validate().unwrap_err();
        assert!(msg.contains("analysis.kind"), "{msg}");
    }

    #[test]
    fn channel_bounds_carry_their_path() {
        let bad_eta = r#"{"engine":"moments",
            "regime":{"kind":"full-broadcast","g":1.0},
            "nonlinearity":{"gamma":0.1},
            "channel":{"eta":1.5},
            "analysis":{"kind":"nlv-parabola"}}"#;
        let s: Scenario = serde_json::from_str(bad_eta).unwrap();
        let msg = s.validate().unwrap_err();
        assert!(msg.contains("channel.eta"), "{msg}");

        let rates_on_moments = r#"{"engine":"moments",
            "regime":{"kind":"full-broadcast","g":1.0},
            "nonlinearity":{"gamma":0.1},
            "channel":{"zeta_a":0.01},
            "analysis":{"kind":"nlv-parabola"}}"#;
        let s: Scenario = serde_json::from_str(rates_on_moments).unwrap();
        let msg = s.validate().unwrap_err();
        assert!(msg.contains("channel.zeta_a"), "{msg}");
    }

    #[test]
    fn control_column_names_match_their_json_names() {
        for (kind, col) in [
            (ControlKindSpec::PrincipalGain, "g"),
            (ControlKindSpec::AuxGain, "g1"),
            (ControlKindSpec::MediatorSqueezing, "S"),
            (ControlKindSpec::Tau, "tau"),
        ] {
            assert_eq!(kind.column(), col);
            let json = serde_json::to_string(&kind).unwrap();
            assert_eq!(json, format!("\"{col}\""));
        }
    }
}
