//! Acceptance gate: one test per contracted behavior of the simulator.
//!
//! Each test prints a single `criterion NN [PASS|FAIL]` line with the
//! measured quantities before asserting, so a full run of this target reads
//! as a checklist. Tolerances are part of the contract; they are stated at
//! the assertion sites.

use std::f64::consts::TAU;

use qndsim_core::envelope::{
    optimize_envelope, ControlDim, ControlKind, EnvelopeOpts, EnvelopePoint, EnvelopeProblem,
    GateMode,
};
use qndsim_core::fock::lindblad::{lindblad_evolve, LindbladRates};
use qndsim_core::fock::ode::OdeOpts;
use qndsim_core::fock::run::{nonlinearity_only, run_fock_protocol, FockProtocolSpec};
use qndsim_core::fock::sparse::CsrMatrix;
use qndsim_core::fock::wigner::{compute_wigner, negativity_metrics, WignerGridSpec};
use qndsim_core::fock::FockDensity;
use qndsim_core::gaussian::GaussianEnsemble;
use qndsim_core::nlv::{compute_nlv, threshold_nc, threshold_ng, NlvSide};
use qndsim_core::oracle::{decay_reference, mc_expectation, McConfig};
use qndsim_core::poly::{QuadPoly, Role, VarId};
use qndsim_core::protocol::{FeedforwardPolicy, ModeState, NoiseModel, Regime, SymbolicState};
use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};

fn report(n: u32, name: &str, ok: bool, detail: &str) {
    let verdict = if ok { "PASS" } else { "FAIL" };
    println!("criterion {n:02} [{verdict}] {name}: {detail}");
    assert!(ok, "criterion {n:02} ({name}) failed: {detail}");
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    let step = (b - a) / (n - 1) as f64;
    (0..n).map(|i| a + step * i as f64).collect()
}

fn u01(rng: &mut ChaCha12Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn uniform(rng: &mut ChaCha12Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * u01(rng)
}

fn max_abs_coeff(p: &QuadPoly) -> f64 {
    p.terms().map(|(_, c)| c.abs()).fold(0.0, f64::max)
}

/// X returns unchanged and Y picks up exactly −gγ(gX)² under the
/// full-broadcast gains, for 100 random couplings.
#[test]
fn criterion_01_unitary_broadcast_identity() {
    let mut rng = ChaCha12Rng::seed_from_u64(20_260_815);
    let mut max_err = 0.0_f64;
    for _ in 0..100 {
        // Magnitudes below 0.05 are excluded: the ±1/g gains amplify the
        // g·(1/g) rounding residue by 1/g², which would exceed the 1e-12
        // coefficient budget before any genuine defect could.
        let mag = uniform(&mut rng, 0.05, 3.0);
        let g = if rng.next_u64() & 1 == 0 { mag } else { -mag };
        let gamma = uniform(&mut rng, -0.3, 0.3);

        let mut st = SymbolicState::new(ModeState::Vacuum, ModeState::Vacuum, 3).unwrap();
        let x0 = st.x.clone();
        let y0 = st.y.clone();
        st.run_unitary_protocol(&Regime::FullBroadcast { g }, gamma).unwrap();

        let dx = st.x.sub(&x0);
        let expected_y = y0.add_scaled(&x0.mul(&x0), -gamma * g * g * g);
        let dy = st.y.sub(&expected_y);
        max_err = max_err.max(max_abs_coeff(&dx)).max(max_abs_coeff(&dy));
    }
    report(
        1,
        "unitary broadcast identity",
        max_err <= 1e-12,
        &format!("max coefficient error {max_err:.3e} over 100 random (g, γ) ≤ 1e-12"),
    );
}

/// Closed-form nonlinear variances: ground state, squeezed thermal state,
/// and the λ-shift induced by the cubic kick.
#[test]
fn criterion_02_nlv_closed_forms() {
    let grid = linspace(0.0, 1.2, 200);

    let st = SymbolicState::new(ModeState::Vacuum, ModeState::Vacuum, 3).unwrap();
    let vac = compute_nlv(&st, NlvSide::Target);
    let err_vac = grid
        .iter()
        .map(|&l| (vac.eval(l) - (1.0 + 2.0 * l * l)).abs())
        .fold(0.0_f64, f64::max);

    let (nbar, s) = (0.35, 1.7);
    let st = SymbolicState::new(
        ModeState::SqueezedThermal { nbar, s },
        ModeState::Vacuum,
        3,
    )
    .unwrap();
    let sqth = compute_nlv(&st, NlvSide::Target);
    let v = 2.0 * nbar + 1.0;
    let err_sqth = grid
        .iter()
        .map(|&l| (sqth.eval(l) - (v / s + 2.0 * (l * s * v).powi(2))).abs())
        .fold(0.0_f64, f64::max);

    // Entangle the modes first so the shift is tested on a non-product state.
    let gamma = 0.17;
    let mut st = SymbolicState::new(ModeState::Vacuum, ModeState::Squeezed { r: 0.3 }, 3).unwrap();
    st.apply_qnd_qy(0.8);
    st.apply_qnd_px(0.6);
    let before = compute_nlv(&st, NlvSide::Source);
    st.apply_nonlinearity(gamma).unwrap();
    let after = compute_nlv(&st, NlvSide::Source);
    let err_shift = grid
        .iter()
        .map(|&l| (after.eval(l) - before.eval(l - gamma)).abs())
        .fold(0.0_f64, f64::max);

    let ok = err_vac <= 1e-10 && err_sqth <= 1e-10 && err_shift <= 1e-10;
    report(
        2,
        "nonlinear-variance closed forms",
        ok,
        &format!(
            "max errors on λ ∈ [0, 1.2]: ground {err_vac:.3e}, squeezed thermal {err_sqth:.3e}, shift {err_shift:.3e} ≤ 1e-10"
        ),
    );
}

/// The two witness thresholds touch at λ = 1/2 with value 3/2, and the
/// non-Gaussianity threshold never exceeds the non-classicality one.
#[test]
fn criterion_03_witness_thresholds_touch() {
    let err_nc = (threshold_nc(0.5) - 1.5).abs();
    let err_ng = (threshold_ng(0.5) - 1.5).abs();

    let strict_below = linspace(0.01, 0.49, 49)
        .iter()
        .all(|&l| threshold_ng(l) < threshold_nc(l));
    let never_above = linspace(0.0, 1.2, 200)
        .iter()
        .all(|&l| threshold_ng(l) <= threshold_nc(l) + 1e-12);

    let ok = err_nc <= 1e-12 && err_ng <= 1e-12 && strict_below && never_above;
    report(
        3,
        "witness thresholds tangent at 1/2",
        ok,
        &format!(
            "|σ_NC(1/2)−3/2| = {err_nc:.1e}, |σ_NG(1/2)−3/2| = {err_ng:.1e} ≤ 1e-12; strictly below on (0, 1/2): {strict_below}; never above on [0, 1.2]: {never_above}"
        ),
    );
}

/// The broadcast places the variance minimum at λ = γg³ with unit depth on a
/// ground-state target.
#[test]
fn criterion_04_broadcast_strength() {
    let (g, gamma) = (1.26, 0.15);
    let mut st = SymbolicState::new(ModeState::Vacuum, ModeState::Vacuum, 3).unwrap();
    st.run_unitary_protocol(&Regime::FullBroadcast { g }, gamma).unwrap();
    let p = compute_nlv(&st, NlvSide::Target);

    let err_lambda = (p.lambda_min() - 0.300).abs();
    let err_sigma = (p.sigma_min() - 1.0).abs();
    let ok = err_lambda <= 2e-3 && err_sigma <= 1e-9;
    report(
        4,
        "broadcast strength",
        ok,
        &format!(
            "λ_min = {:.6} (|λ_min − 0.300| = {err_lambda:.2e} ≤ 2e-3), σ_min = {:.12} (err {err_sigma:.2e} ≤ 1e-9)",
            p.lambda_min(),
            p.sigma_min()
        ),
    );
}

/// The squeezing-generation gains lower the minimum to 1/g₁² at the same λ.
#[test]
fn criterion_05_squeezing_generation_floor() {
    let (g, g1, gamma) = (1.26, 1.2, 0.15);
    let mut st = SymbolicState::new(ModeState::Vacuum, ModeState::Vacuum, 3).unwrap();
    st.run_unitary_protocol(&Regime::SqueezingGeneration { g, g1 }, gamma).unwrap();
    let p = compute_nlv(&st, NlvSide::Target);

    let err_sigma = (p.sigma_min() - 1.0 / (g1 * g1)).abs();
    let err_lambda = (p.lambda_min() - gamma * g * g * g).abs();
    let ok = err_sigma <= 1e-9 && err_lambda <= 1e-9;
    report(
        5,
        "squeezing-generation floor",
        ok,
        &format!(
            "σ_min = {:.12} (|σ_min − g₁⁻²| = {err_sigma:.2e} ≤ 1e-9), |λ_min − γg³| = {err_lambda:.2e} ≤ 1e-9",
            p.sigma_min()
        ),
    );
}

/// Wick-theorem expectations agree with Monte Carlo sampling for random
/// quartic polynomials over a correlated six-variable ensemble.
#[test]
fn criterion_06_wick_vs_monte_carlo() {
    let mut rng = ChaCha12Rng::seed_from_u64(42);
    let mut failures = 0_u32;
    let mut worst_sigma = 0.0_f64;

    for trial in 0..50_u64 {
        let mut ens = GaussianEnsemble::new();
        let ids: Vec<VarId> = (0..6)
            .map(|i| {
                let mean = uniform(&mut rng, -1.0, 1.0);
                ens.add_classical(&format!("v{i}"), Role::Thermal, mean, 1.0)
            })
            .collect();

        // Random SPD covariance Σ = AAᵀ + I/4.
        let mut a = [[0.0_f64; 6]; 6];
        for row in &mut a {
            for entry in row.iter_mut() {
                *entry = uniform(&mut rng, -1.0, 1.0);
            }
        }
        for r in 0..6 {
            for c in 0..=r {
                let dot: f64 = (0..6).map(|k| a[r][k] * a[c][k]).sum();
                if r == c {
                    ens.set_var(ids[r], dot + 0.25);
                } else {
                    ens.set_cov(ids[r], ids[c], dot);
                }
            }
        }

        // Constant plus eight random monomials of degree 1..=4.
        let mut p = QuadPoly::constant(uniform(&mut rng, -1.0, 1.0));
        for _ in 0..8 {
            let degree = 1 + (rng.next_u64() % 4) as usize;
            let mut term = QuadPoly::constant(uniform(&mut rng, -1.0, 1.0));
            for _ in 0..degree {
                let v = ids[(rng.next_u64() % 6) as usize];
                term = term.mul(&QuadPoly::var(v));
            }
            p = p.add(&term);
        }

        let exact = ens.expectation(&p);
        let est = mc_expectation(&ens, &p, &McConfig::new(1000 + trial));
        let deviation = (exact - est.value).abs();
        if deviation > 3.0 * est.std_error + 1e-12 {
            failures += 1;
        }
        worst_sigma = worst_sigma.max(deviation / est.std_error);
    }

    report(
        6,
        "moment oracle vs Monte Carlo",
        failures <= 2,
        &format!(
            "{failures}/50 trials beyond 3 standard errors at 10⁶ samples (allowed 2); worst {worst_sigma:.2} σ"
        ),
    );
}

/// Dissipative occupation dynamics track the exponential relaxation law on
/// both single-mode and two-mode states at a 30-level basis.
#[test]
fn criterion_07_lindblad_thermal_decay() {
    let dim = 30;
    let tight = OdeOpts { atol: 1e-12, rtol: 1e-10, ..OdeOpts::default() };
    let mut worst = 0.0_f64;

    // Single mode: pure damping, heating from vacuum, thermal contact.
    let cases = [
        (ModeState::Thermal { nbar: 1.0 }, LindbladRates { zeta_a: 0.7, zeta_m: 0.0, n_th: 0.0 }, 1.0),
        (ModeState::Vacuum, LindbladRates { zeta_a: 0.0, zeta_m: 0.05, n_th: 10.0 }, 0.3),
        (ModeState::Thermal { nbar: 1.0 }, LindbladRates { zeta_a: 0.0, zeta_m: 1.0, n_th: 0.5 }, 0.8),
    ];
    for (state, rates, t) in &cases {
        let mut rho = FockDensity::single_mode(state, dim).unwrap();
        let n0 = rho.mean_occupation(0);
        let h = CsrMatrix::zeros(dim);
        lindblad_evolve(&mut rho, &h, rates, *t, 1e-6, &tight).unwrap();
        let (zeta, n_env) = if rates.zeta_a > 0.0 { (rates.zeta_a, 0.0) } else { (rates.zeta_m, rates.n_th) };
        let expected = decay_reference(n0, n_env, zeta, *t);
        worst = worst.max((rho.mean_occupation(0) - expected).abs());
    }

    // Two modes at once: damping on the first, thermal contact on the second.
    let target = FockDensity::single_mode(&ModeState::Thermal { nbar: 1.0 }, dim).unwrap();
    let source = FockDensity::single_mode(&ModeState::Thermal { nbar: 0.3 }, dim).unwrap();
    let n0_t = target.mean_occupation(0);
    let n0_s = source.mean_occupation(0);
    let mut rho = FockDensity::product(&target, &source).unwrap();
    let rates = LindbladRates { zeta_a: 0.4, zeta_m: 0.6, n_th: 0.8 };
    let h = CsrMatrix::zeros(dim * dim);
    let opts = OdeOpts { atol: 1e-11, rtol: 1e-9, ..OdeOpts::default() };
    lindblad_evolve(&mut rho, &h, &rates, 0.5, 1e-6, &opts).unwrap();
    worst = worst.max((rho.mean_occupation(0) - decay_reference(n0_t, 0.0, 0.4, 0.5)).abs());
    worst = worst.max((rho.mean_occupation(1) - decay_reference(n0_s, 0.8, 0.6, 0.5)).abs());

    report(
        7,
        "dissipative relaxation law",
        worst <= 1e-6,
        &format!("max |n̄ − reference| = {worst:.3e} over 4 cases ≤ 1e-6"),
    );
}

/// The moment engine and the number-basis engine agree on the noiseless
/// broadcast: quadrature means, variances, and the witness parabola.
#[test]
fn criterion_08_cross_engine_agreement() {
    let (g, gamma) = (1.26, 0.15);

    let mut st = SymbolicState::new(ModeState::Vacuum, ModeState::Vacuum, 3).unwrap();
    st.run_unitary_protocol(&Regime::FullBroadcast { g }, gamma).unwrap();
    let moments = st.quad_moments();
    let parabola = compute_nlv(&st, NlvSide::Target);

    let spec = FockProtocolSpec::new(Regime::FullBroadcast { g }, gamma, 3, 40);
    let result = run_fock_protocol(&spec).unwrap();
    let fock_moments = result.final_state.quadrature_moments().unwrap();
    let fock_parabola = result.final_state.nlv_parabola(0, 3).unwrap();

    let mut err_mean = 0.0_f64;
    let mut err_var = 0.0_f64;
    for i in 0..4 {
        err_mean = err_mean.max((moments.mean[i] - fock_moments.mean[i]).abs());
        err_var = err_var.max((moments.cov[i][i] - fock_moments.cov[i][i]).abs());
    }
    let err_parabola = (parabola.c0 - fock_parabola.c0)
        .abs()
        .max((parabola.c1 - fock_parabola.c1).abs())
        .max((parabola.c2 - fock_parabola.c2).abs());

    let ok = err_mean <= 1e-3 && err_var <= 1e-3 && err_parabola <= 1e-3;
    report(
        8,
        "cross-engine agreement",
        ok,
        &format!(
            "40-level basis (pure path: {}): max mean error {err_mean:.3e}, max variance error {err_var:.3e}, max parabola error {err_parabola:.3e} ≤ 1e-3",
            result.used_pure_path
        ),
    );
}

/// Under the lossy broadcast the delivered state's Wigner negativity is deep,
/// the mid-protocol mechanics shows none, and the delivered depth beats the
/// direct kick on the mechanics by a wide factor.
#[test]
fn criterion_09_wigner_negativity_ordering() {
    let (g, gamma, dim) = (1.26, 0.15, 32);
    let source = ModeState::Squeezed { r: 0.1 };

    let mut spec = FockProtocolSpec::new(Regime::FullBroadcast { g }, gamma, 3, dim);
    spec.rates = LindbladRates { zeta_a: 1e-3, zeta_m: 1e-6, n_th: 1000.0 };
    spec.source = source;
    // Real tail mass of the heated non-Gaussian state sits near 1e-5 and does
    // not shrink with the basis (measured 1.07e-5 at 32 levels, 1.15e-5 at
    // 36); it perturbs the asserted depths at the 1e-5 scale, three orders
    // inside their margins, so the guard admits it rather than chasing it.
    spec.tail_guard = 1e-4;
    let result = run_fock_protocol(&spec).unwrap();

    let atoms = result.final_state.partial_trace(0).unwrap();
    let mid = result.after_nonlinearity.partial_trace(1).unwrap();
    let direct = nonlinearity_only(&source, gamma, 3, dim).unwrap();

    // Half-width 7 keeps the outermost interference fringe of the direct
    // kick, near (6π/γ)^{1/3} ≈ 5, inside the window.
    let grid = WignerGridSpec::square(7.0, 141);
    let w_min = |rho: &FockDensity| TAU * negativity_metrics(&compute_wigner(rho, &grid).unwrap()).min_value;
    let w_atoms = w_min(&atoms);
    let w_mid = w_min(&mid);
    let w_direct = w_min(&direct);

    let depth_atoms = (-w_atoms).max(0.0);
    let depth_direct = (-w_direct).max(0.0);
    let ok = w_atoms <= -1e-2 && w_mid >= -1e-3 && depth_atoms >= 5.0 * depth_direct;
    report(
        9,
        "negativity ordering",
        ok,
        &format!(
            "2π·W_min: delivered {w_atoms:.4e} ≤ −1e-2, mid-protocol mechanics {w_mid:.4e} ≥ −1e-3, direct kick {w_direct:.4e}; depth ratio {:.0} ≥ 5",
            depth_atoms / depth_direct
        ),
    );
}

/// Envelope structure under loss: the gain-asymmetric envelope never exceeds
/// the gain-symmetric one, both coincide without loss, envelopes are
/// pointwise monotone in loss, and the noiseless envelope dips below the
/// non-Gaussianity threshold.
#[test]
fn criterion_10_envelope_structure() {
    let lambdas = linspace(0.0, 1.0, 50);
    let opts = EnvelopeOpts::default();
    let controls = vec![
        ControlDim { kind: ControlKind::PrincipalGain, lo: 0.2, hi: 2.0 },
        ControlDim { kind: ControlKind::MediatorSqueezing, lo: 1.0, hi: 8.0 },
    ];
    let noise = |eta: f64| NoiseModel {
        eta,
        mediator_s: 1.0,
        policy: FeedforwardPolicy::GainSymmetric,
        heating: 2e-4,
        damping: 1.0,
    };
    let problem = |noise: Option<NoiseModel>, mode: GateMode, controls: Vec<ControlDim>| EnvelopeProblem {
        regime: Regime::FullBroadcast { g: 1.0 },
        gamma: 0.07,
        order: 3,
        target: ModeState::Vacuum,
        source: ModeState::Thermal { nbar: 0.45 },
        noise,
        gate_mode: mode,
        controls,
        gamma_m: 1e-4,
    };
    let run = |p: &EnvelopeProblem| -> Vec<EnvelopePoint> {
        optimize_envelope(p, &lambdas, &opts).unwrap()
    };

    let sym_100 = run(&problem(Some(noise(1.0)), GateMode::Symmetric, controls.clone()));
    let asym_100 = run(&problem(Some(noise(1.0)), GateMode::Asymmetric, controls.clone()));
    let sym_099 = run(&problem(Some(noise(0.99)), GateMode::Symmetric, controls.clone()));
    let sym_096 = run(&problem(Some(noise(0.96)), GateMode::Symmetric, controls.clone()));
    let asym_096 = run(&problem(Some(noise(0.96)), GateMode::Asymmetric, controls.clone()));
    let free = vec![ControlDim { kind: ControlKind::PrincipalGain, lo: 0.2, hi: 2.0 }];
    let noiseless = run(&problem(None, GateMode::Symmetric, free));

    let max_over = |a: &[EnvelopePoint], b: &[EnvelopePoint]| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.sigma_env - y.sigma_env)
            .fold(f64::NEG_INFINITY, f64::max)
    };
    // Gain-asymmetric optimizes over a superset of operating points.
    let asym_excess = max_over(&asym_096, &sym_096);
    // Without loss the two feedforward rules are the same gate.
    let eta1_gap = sym_100
        .iter()
        .zip(&asym_100)
        .map(|(a, b)| (a.sigma_env - b.sigma_env).abs())
        .fold(0.0_f64, f64::max);
    // More loss can only raise the reachable minimum.
    let mono_99 = max_over(&sym_100, &sym_099);
    let mono_96 = max_over(&sym_099, &sym_096);
    // Somewhere the noiseless envelope certifies non-Gaussianity outright.
    let best_dip = noiseless
        .iter()
        .map(|p| p.sigma_env - threshold_ng(p.lambda))
        .fold(f64::INFINITY, f64::min);

    let ok = asym_excess <= 1e-9 && eta1_gap <= 1e-9 && mono_99 <= 1e-9 && mono_96 <= 1e-9
        && best_dip < -1e-9;
    report(
        10,
        "envelope structure under loss",
        ok,
        &format!(
            "max(asym − sym) = {asym_excess:.2e} ≤ 1e-9 at η = 0.96; |sym − asym| = {eta1_gap:.2e} ≤ 1e-9 at η = 1; monotonicity slack {mono_99:.2e}, {mono_96:.2e} ≤ 1e-9; noiseless dip below σ_NG: {best_dip:.3}"
        ),
    );
}

/// Repeated runs of a scenario produce byte-identical artifacts regardless
/// of the worker count.
#[test]
fn criterion_11_deterministic_artifacts() {
    use std::collections::BTreeMap;
    use std::process::Command;

    let bin = env!("CARGO_BIN_EXE_qndsim");
    let temp = tempfile::tempdir().unwrap();

    let scenarios = [
        (
            "envelope.json",
            r#"{
              "engine": "moments",
              "regime": {"kind": "full-broadcast", "g": 1.0},
              "nonlinearity": {"gamma": 0.07},
              "channel": {"eta": 0.97, "gamma_m": 0.0001, "tau": 1.0},
              "initial": {"source": {"kind": "thermal", "nbar": 0.45}},
              "analysis": {
                "kind": "nlv-envelope",
                "lambda_grid": {"min": 0.0, "max": 0.8, "points": 10},
                "controls": [
                  {"kind": "g", "lo": 0.2, "hi": 2.0},
                  {"kind": "S", "lo": 1.0, "hi": 8.0}
                ],
                "budget": 80,
                "symmetric": false
              },
              "output": {"dir": "OUTDIR"},
              "seed": 7
            }"#,
        ),
        (
            "wigner.json",
            r#"{
              "engine": "fock",
              "regime": {"kind": "full-broadcast", "g": 0.8},
              "nonlinearity": {"gamma": 0.1},
              "channel": {"zeta_a": 0.001, "zeta_m": 0.000001, "n_th": 100.0, "t_gate": 1.0},
              "initial": {"source": {"kind": "squeezed", "r": 0.1}},
              "analysis": {
                "kind": "wigner",
                "grid": {"half_width": 5.0, "points": 61},
                "checkpoints": ["final-atoms", "direct-mechanics"]
              },
              "fock": {"dim": 16, "tail_guard": 0.0001},
              "output": {"dir": "OUTDIR"},
              "seed": 7
            }"#,
        ),
    ];

    let mut all_identical = true;
    let mut detail = Vec::new();
    for (name, template) in &scenarios {
        let out_dir = temp.path().join(name.trim_end_matches(".json"));
        let body = template.replace("OUTDIR", out_dir.to_str().unwrap().replace('\\', "/").as_str());
        let path = temp.path().join(name);
        std::fs::write(&path, body).unwrap();

        let mut snapshots: Vec<BTreeMap<String, Vec<u8>>> = Vec::new();
        for workers in ["1", "4"] {
            let status = Command::new(bin)
                .args(["run", path.to_str().unwrap()])
                .env("QNDSIM_WORKERS", workers)
                .status()
                .unwrap();
            assert!(status.success(), "run failed for {name} with {workers} workers");
            let mut files = BTreeMap::new();
            for entry in std::fs::read_dir(&out_dir).unwrap() {
                let entry = entry.unwrap();
                files.insert(
                    entry.file_name().to_string_lossy().into_owned(),
                    std::fs::read(entry.path()).unwrap(),
                );
            }
            snapshots.push(files);
        }
        let identical = snapshots[0] == snapshots[1];
        all_identical &= identical;
        detail.push(format!(
            "{name}: {} artifacts byte-identical across reruns and worker counts: {identical}",
            snapshots[0].len()
        ));
    }

    report(11, "deterministic artifacts", all_identical, &detail.join("; "));
}
