//! Full gate-sequence simulation in the number basis.
//!
//! The four pulsed QND gates become Lindblad segments with Hamiltonian
//! H = (g/T_gate)·(quadrature product); the nonlinear potential acts as an
//! instantaneous unitary between the second and third gate. Zero-gain gates
//! are skipped (no pulse, no decoherence window). When every rate is zero
//! and both inputs are pure the driver propagates a ket instead of a density
//! matrix, which is exact and dramatically cheaper.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::C64;
use crate::protocol::{GateType, ModeState, Regime};

use super::lindblad::{lindblad_evolve, LindbladRates};
use super::ode::{integrate_dp45, OdeOpts, OdeStats};
use super::sparse::CsrMatrix;
use super::{
    build_nonlinear_unitary, squeezed_vacuum_ket, FockDensity, FockError, TAIL_LEVELS,
};

#[derive(Clone, Debug)]
pub struct FockProtocolSpec {
    pub regime: Regime,
    pub gamma: f64,
    pub order: u32,
    pub rates: LindbladRates,
    /// Duration of each QND pulse.
    pub t_gate: f64,
    /// Levels per mode.
    pub dim: usize,
    pub target: ModeState,
    pub source: ModeState,
    pub tail_guard: f64,
    pub ode: OdeOpts,
}

impl FockProtocolSpec {
    pub fn new(regime: Regime, gamma: f64, order: u32, dim: usize) -> Self {
        FockProtocolSpec {
            regime,
            gamma,
            order,
            rates: LindbladRates::none(),
            t_gate: 1.0,
            dim,
            target: ModeState::Vacuum,
            source: ModeState::Vacuum,
            tail_guard: super::DEFAULT_TAIL_GUARD,
            ode: OdeOpts::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct FockProtocolResult {
    /// Two-mode state immediately after the nonlinear kick.
    pub after_nonlinearity: FockDensity,
    /// Two-mode state after the final gate.
    pub final_state: FockDensity,
    pub used_pure_path: bool,
    pub stats: OdeStats,
}

/// Gate sequence (type, gain) around the nonlinearity: the first two entries
/// precede it, the last two follow it.
fn gate_plan(gains: [f64; 4]) -> [(GateType, f64); 4] {
    [
        (GateType::Qy, gains[0]),
        (GateType::Px, gains[1]),
        (GateType::Px, gains[2]),
        (GateType::Qy, gains[3]),
    ]
}

fn gate_hamiltonian(gate: GateType, scale: f64, dim: usize) -> CsrMatrix {
    let (t_quad, s_quad) = match gate {
        GateType::Qy => (CsrMatrix::momentum(dim), CsrMatrix::position(dim)),
        GateType::Px => (CsrMatrix::position(dim), CsrMatrix::momentum(dim)),
    };
    t_quad.kron(&s_quad).scale(C64::new(scale, 0.0))
}

fn pure_ket(state: &ModeState, dim: usize) -> Option<Vec<C64>> {
    match *state {
        ModeState::Vacuum => {
            let mut psi = vec![C64::new(0.0, 0.0); dim];
            psi[0] = C64::new(1.0, 0.0);
            Some(psi)
        }
        ModeState::Squeezed { r } => Some(squeezed_vacuum_ket(r, dim)),
        _ => None,
    }
}

fn kron_ket(target: &[C64], source: &[C64]) -> Vec<C64> {
    let n = source.len();
    let mut out = vec![C64::new(0.0, 0.0); target.len() * n];
    for (i0, &a) in target.iter().enumerate() {
        for (i1, &b) in source.iter().enumerate() {
            out[i0 * n + i1] = a * b;
        }
    }
    out
}

fn ket_tail(psi: &[C64], dim: usize) -> f64 {
    let lo = dim.saturating_sub(TAIL_LEVELS);
    let mut t0 = 0.0;
    let mut t1 = 0.0;
    for i0 in 0..dim {
        for i1 in 0..dim {
            let p = psi[i0 * dim + i1].norm_sqr();
            if i0 >= lo {
                t0 += p;
            }
            if i1 >= lo {
                t1 += p;
            }
        }
    }
    t0.max(t1)
}

fn validate_spec(spec: &FockProtocolSpec) -> Result<[f64; 4], FockError> {
    if spec.dim < 4 {
        return Err(FockError::Invalid("dimension below 4"));
    }
    if spec.order < 2 {
        return Err(FockError::Invalid("nonlinearity order below 2"));
    }
    if !spec.gamma.is_finite() {
        return Err(FockError::Invalid("nonlinear strength not finite"));
    }
    if !(spec.t_gate.is_finite() && spec.t_gate > 0.0) {
        return Err(FockError::Invalid("gate time must be positive"));
    }
    if !(spec.tail_guard.is_finite() && spec.tail_guard > 0.0) {
        return Err(FockError::Invalid("tail guard must be positive"));
    }
    spec.rates.validate()?;
    spec.regime
        .gains()
        .map_err(|_| FockError::Invalid("regime gains are not realizable"))
}

pub fn run_fock_protocol(spec: &FockProtocolSpec) -> Result<FockProtocolResult, FockError> {
    let gains = validate_spec(spec)?;
    let plan = gate_plan(gains);
    let pure_inputs = pure_ket(&spec.target, spec.dim).zip(pure_ket(&spec.source, spec.dim));
    if spec.rates.is_zero() {
        if let Some((t, s)) = pure_inputs {
            return run_pure(spec, &plan, t, s);
        }
    }
    run_density(spec, &plan)
}

fn run_pure(
    spec: &FockProtocolSpec,
    plan: &[(GateType, f64); 4],
    target: Vec<C64>,
    source: Vec<C64>,
) -> Result<FockProtocolResult, FockError> {
    let dim = spec.dim;
    let mut psi = kron_ket(&target, &source);
    let mut stats = OdeStats::default();
    let guard = spec.tail_guard;

    let mut evolve_gate = |psi: &mut Vec<C64>, gate: GateType, g: f64| -> Result<(), FockError> {
        if g == 0.0 {
            return Ok(());
        }
        let h = gate_hamiltonian(gate, g / spec.t_gate, dim);
        let mut rhs = |y: &[C64], out: &mut [C64]| {
            h.apply_vec(y, out);
            for v in out.iter_mut() {
                *v *= C64::new(0.0, -0.5);
            }
        };
        let mut on_accept = |y: &mut [C64]| -> Result<(), FockError> {
            let norm: f64 = y.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            if !(norm.is_finite() && norm > 0.0) {
                return Err(FockError::ToleranceNotMet { t_reached: f64::NAN });
            }
            let s = 1.0 / norm;
            for v in y.iter_mut() {
                *v *= s;
            }
            let tail = ket_tail(y, dim);
            if tail > guard {
                return Err(FockError::TailGuard { population: tail });
            }
            Ok(())
        };
        let run = integrate_dp45(&mut rhs, psi, 0.0, spec.t_gate, &spec.ode, &mut on_accept)?;
        stats.accepted += run.accepted;
        stats.rejected += run.rejected;
        stats.rhs_evals += run.rhs_evals;
        Ok(())
    };

    evolve_gate(&mut psi, plan[0].0, plan[0].1)?;
    evolve_gate(&mut psi, plan[1].0, plan[1].1)?;

    if spec.gamma != 0.0 {
        let u = build_nonlinear_unitary(spec.gamma, spec.order, dim)?;
        let mut out = vec![C64::new(0.0, 0.0); psi.len()];
        for i0 in 0..dim {
            let base = i0 * dim;
            for i1 in 0..dim {
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..dim {
                    acc += u.data[i1 * dim + k] * psi[base + k];
                }
                out[base + i1] = acc;
            }
        }
        let norm: f64 = out.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        for v in &mut out {
            *v /= norm;
        }
        psi = out;
        let tail = ket_tail(&psi, dim);
        if tail > guard {
            return Err(FockError::TailGuard { population: tail });
        }
    }
    let after_nonlinearity = FockDensity::from_pure(&psi, dim, 2);

    evolve_gate(&mut psi, plan[2].0, plan[2].1)?;
    evolve_gate(&mut psi, plan[3].0, plan[3].1)?;

    Ok(FockProtocolResult {
        after_nonlinearity,
        final_state: FockDensity::from_pure(&psi, dim, 2),
        used_pure_path: true,
        stats,
    })
}

fn run_density(
    spec: &FockProtocolSpec,
    plan: &[(GateType, f64); 4],
) -> Result<FockProtocolResult, FockError> {
    let dim = spec.dim;
    let target = FockDensity::single_mode(&spec.target, dim)?;
    let source = FockDensity::single_mode(&spec.source, dim)?;
    let mut rho = FockDensity::product(&target, &source)?;
    let mut stats = OdeStats::default();

    let mut evolve_gate = |rho: &mut FockDensity, gate: GateType, g: f64| -> Result<(), FockError> {
        if g == 0.0 {
            return Ok(());
        }
        let h = gate_hamiltonian(gate, g / spec.t_gate, dim);
        let run = lindblad_evolve(rho, &h, &spec.rates, spec.t_gate, spec.tail_guard, &spec.ode)?;
        stats.accepted += run.accepted;
        stats.rejected += run.rejected;
        stats.rhs_evals += run.rhs_evals;
        Ok(())
    };

    evolve_gate(&mut rho, plan[0].0, plan[0].1)?;
    evolve_gate(&mut rho, plan[1].0, plan[1].1)?;

    if spec.gamma != 0.0 {
        let u = build_nonlinear_unitary(spec.gamma, spec.order, dim)?;
        rho.apply_unitary_on_mode(&u, 1)?;
        let tail = rho.tail_population();
        if tail > spec.tail_guard {
            return Err(FockError::TailGuard { population: tail });
        }
    }
    let after_nonlinearity = rho.clone();

    evolve_gate(&mut rho, plan[2].0, plan[2].1)?;
    evolve_gate(&mut rho, plan[3].0, plan[3].1)?;

    Ok(FockProtocolResult {
        after_nonlinearity,
        final_state: rho,
        used_pure_path: false,
        stats,
    })
}

/// Apply only the nonlinear potential to a single-mode state: the
/// no-broadcast comparison state for negativity benchmarks.
pub fn nonlinearity_only(
    state: &ModeState,
    gamma: f64,
    order: u32,
    dim: usize,
) -> Result<FockDensity, FockError> {
    let mut rho = FockDensity::single_mode(state, dim)?;
    if gamma != 0.0 {
        let u = build_nonlinear_unitary(gamma, order, dim)?;
        rho.apply_unitary(&u);
    }
    Ok(rho)
}
