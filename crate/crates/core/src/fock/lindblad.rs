//! Open-system evolution dρ/dt = −(i/2)[H, ρ] + dissipators.
//!
//! The target mode couples to a zero-temperature bath at rate ζ_t and the
//! source mode to a thermal bath at rate ζ_s with occupation n_th:
//!
//!   ζ_t·D[â_t] + ζ_s(n_th + 1)·D[â_s] + ζ_s·n_th·D[â_s†],
//!
//! D[c]ρ = cρc† − ½{c†c, ρ}. On a single-mode state both baths act on that
//! mode. Each accepted integrator step re-Hermitizes, renormalizes the trace
//! and enforces the truncation tail guard.

use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::C64;

use super::ode::{integrate_dp45, OdeOpts, OdeStats};
use super::sparse::CsrMatrix;
use super::{FockDensity, FockError};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LindbladRates {
    /// Target (linear) mode amplitude-damping rate.
    pub zeta_a: f64,
    /// Source (nonlinear) mode thermal-contact rate.
    pub zeta_m: f64,
    /// Source bath occupation.
    pub n_th: f64,
}

impl LindbladRates {
    pub fn none() -> Self {
        LindbladRates { zeta_a: 0.0, zeta_m: 0.0, n_th: 0.0 }
    }

    pub fn is_zero(&self) -> bool {
        self.zeta_a == 0.0 && self.zeta_m == 0.0
    }

    pub fn validate(&self) -> Result<(), FockError> {
        let ok = self.zeta_a >= 0.0
            && self.zeta_m >= 0.0
            && self.n_th >= 0.0
            && self.zeta_a.is_finite()
            && self.zeta_m.is_finite()
            && self.n_th.is_finite();
        if ok {
            Ok(())
        } else {
            Err(FockError::Invalid("rates must be finite and non-negative"))
        }
    }
}

struct Dissipator {
    /// Jump operator c.
    c: CsrMatrix,
    /// c†.
    c_dag: CsrMatrix,
    /// c†c.
    cc: CsrMatrix,
    rate: f64,
}

/// Evolve `rho` in place for time `t` under Hamiltonian `h` (given as a CSR
/// matrix over the full index space) plus the damping terms.
pub fn lindblad_evolve(
    rho: &mut FockDensity,
    h: &CsrMatrix,
    rates: &LindbladRates,
    t: f64,
    tail_guard: f64,
    opts: &OdeOpts,
) -> Result<OdeStats, FockError> {
    rates.validate()?;
    let d = rho.d();
    if h.n != d {
        return Err(FockError::Invalid("hamiltonian dimension mismatch"));
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(FockError::Invalid("evolution time must be finite and non-negative"));
    }
    if t == 0.0 {
        return Ok(OdeStats::default());
    }

    let n = rho.dim;
    let id = CsrMatrix::identity(n);
    let a = CsrMatrix::annihilation(n);
    let (a_t, a_s) = if rho.modes == 2 {
        (a.kron(&id), id.kron(&a))
    } else {
        (a.clone(), a.clone())
    };

    let mut dissipators: Vec<Dissipator> = Vec::new();
    if rates.zeta_a > 0.0 {
        dissipators.push(make_dissipator(&a_t, rates.zeta_a));
    }
    if rates.zeta_m > 0.0 {
        dissipators.push(make_dissipator(&a_s, rates.zeta_m * (rates.n_th + 1.0)));
        if rates.n_th > 0.0 {
            dissipators.push(make_dissipator(&a_s.dagger(), rates.zeta_m * rates.n_th));
        }
    }

    let have_h = h.nnz() > 0;
    let mut tmp = vec![C64::new(0.0, 0.0); d * d];
    let mut rhs = |y: &[C64], out: &mut [C64]| {
        for v in out.iter_mut() {
            *v = C64::new(0.0, 0.0);
        }
        if have_h {
            // −(i/2)(Hρ − ρH).
            h.acc_left(y, out, C64::new(0.0, -0.5));
            h.acc_right(y, out, C64::new(0.0, 0.5));
        }
        for dis in &dissipators {
            // rate·(cρc† − ½{c†c, ρ}).
            for v in tmp.iter_mut() {
                *v = C64::new(0.0, 0.0);
            }
            dis.c.acc_left(y, &mut tmp, C64::new(1.0, 0.0));
            dis.c_dag.acc_right(&tmp, out, C64::new(dis.rate, 0.0));
            dis.cc.acc_left(y, out, C64::new(-0.5 * dis.rate, 0.0));
            dis.cc.acc_right(y, out, C64::new(-0.5 * dis.rate, 0.0));
        }
    };

    let dim = rho.dim;
    let modes = rho.modes;
    let mut on_accept = move |y: &mut [C64]| -> Result<(), FockError> {
        repair_density(y, dim, modes, tail_guard)
    };

    let mut y = core::mem::take(&mut rho.data);
    let stats = integrate_dp45(&mut rhs, &mut y, 0.0, t, opts, &mut on_accept);
    rho.data = y;
    stats
}

fn make_dissipator(c: &CsrMatrix, rate: f64) -> Dissipator {
    let c_dag = c.dagger();
    let cc = c_dag.matmul(c);
    Dissipator { c: c.clone(), c_dag, cc, rate }
}

/// Re-Hermitize, renormalize trace, and enforce the tail guard on a
/// vectorized density matrix.
fn repair_density(y: &mut [C64], dim: usize, modes: u8, tail_guard: f64) -> Result<(), FockError> {
    let d = dim.pow(modes as u32);
    for i in 0..d {
        let di = i * d + i;
        y[di] = C64::new(y[di].re, 0.0);
        for j in i + 1..d {
            let avg = 0.5 * (y[i * d + j] + y[j * d + i].conj());
            y[i * d + j] = avg;
            y[j * d + i] = avg.conj();
        }
    }
    let trace: f64 = (0..d).map(|i| y[i * d + i].re).sum();
    if !(trace.is_finite() && trace > 0.0) {
        return Err(FockError::ToleranceNotMet { t_reached: f64::NAN });
    }
    let s = 1.0 / trace;
    for v in y.iter_mut() {
        *v *= s;
    }
    let tail = tail_population_raw(y, dim, modes);
    if tail > tail_guard {
        return Err(FockError::TailGuard { population: tail });
    }
    Ok(())
}

/// Tail population of a vectorized density without cloning it.
fn tail_population_raw(y: &[C64], dim: usize, modes: u8) -> f64 {
    let d = dim.pow(modes as u32);
    let lo = dim.saturating_sub(super::TAIL_LEVELS);
    match modes {
        1 => (lo..dim).map(|i| y[i * d + i].re).sum(),
        _ => {
            let mut t0 = 0.0;
            let mut t1 = 0.0;
            for i0 in 0..dim {
                for i1 in 0..dim {
                    let p = y[(i0 * dim + i1) * d + (i0 * dim + i1)].re;
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
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::sparse::CsrMatrix;
    use crate::oracle::decay_reference;
    use crate::protocol::ModeState;
    use approx::assert_relative_eq;

    fn evolve_single_mode(
        rho: &mut FockDensity,
        rates: &LindbladRates,
        t: f64,
    ) -> Result<OdeStats, FockError> {
        let h = CsrMatrix::zeros(rho.d());
        lindblad_evolve(rho, &h, rates, t, 1e-6, &OdeOpts::default())
    }

    #[test]
    fn number_state_decay_matches_the_exponential_reference() {
        // ⟨n⟩(t) = n_th + (n₀ − n_th)e^{−ζt}, exact for any initial state.
        let dim = 30;
        let mut psi = vec![C64::new(0.0, 0.0); dim];
        psi[3] = C64::new(1.0, 0.0);
        let mut rho = FockDensity::from_pure(&psi, dim, 1);
        let rates = LindbladRates { zeta_a: 0.0, zeta_m: 1.0, n_th: 0.0 };
        evolve_single_mode(&mut rho, &rates, 1.0).unwrap();
        let want = decay_reference(3.0, 0.0, 1.0, 1.0);
        assert_relative_eq!(rho.mean_occupation(0), want, epsilon = 1e-6);
        rho.validate(1e-6).unwrap();
    }

    #[test]
    fn heating_toward_a_thermal_bath_matches_the_reference() {
        let dim = 30;
        let mut rho = FockDensity::single_mode(&ModeState::Thermal { nbar: 0.2 }, dim).unwrap();
        let rates = LindbladRates { zeta_a: 0.0, zeta_m: 0.6, n_th: 1.5 };
        evolve_single_mode(&mut rho, &rates, 1.2).unwrap();
        let want = decay_reference(0.2, 1.5, 0.6, 1.2);
        assert_relative_eq!(rho.mean_occupation(0), want, epsilon = 1e-6);
    }

    #[test]
    fn thermal_bath_occupation_is_a_fixed_point() {
        let dim = 26;
        let nbar = 1.0;
        let mut rho = FockDensity::single_mode(&ModeState::Thermal { nbar }, dim).unwrap();
        let rates = LindbladRates { zeta_a: 0.0, zeta_m: 0.5, n_th: nbar };
        evolve_single_mode(&mut rho, &rates, 1.0).unwrap();
        assert_relative_eq!(rho.mean_occupation(0), nbar, epsilon = 1e-4);
    }

    #[test]
    fn rate_free_evolution_under_a_qnd_hamiltonian_matches_the_built_unitary() {
        // The mid-gate squeezed-thermal marginal sheds population slowly
        // (roughly 5× per level), so the guard window needs this much basis.
        let dim = 14;
        let g = 0.7;
        let mut rho = FockDensity::vacuum(dim, 2);
        // H = g·q̂_s·Ŷ_t over unit time reproduces the pulsed gate.
        let h = CsrMatrix::momentum(dim).kron(&CsrMatrix::position(dim)).scale(C64::new(g, 0.0));
        let opts = OdeOpts { atol: 1e-12, rtol: 1e-10, ..OdeOpts::default() };
        lindblad_evolve(&mut rho, &h, &LindbladRates::none(), 1.0, 1e-6, &opts).unwrap();

        let u = crate::fock::build_qnd_unitary(g, crate::protocol::GateType::Qy, dim).unwrap();
        let mut want = FockDensity::vacuum(dim, 2);
        want.apply_unitary(&u);
        let mut worst = 0.0f64;
        for (a, b) in rho.data.iter().zip(want.data.iter()) {
            worst = worst.max((a - b).norm());
        }
        assert!(worst < 1e-8, "max element mismatch {worst}");
        let psi_u = {
            let mut vac = vec![C64::new(0.0, 0.0); dim * dim];
            vac[0] = C64::new(1.0, 0.0);
            u.apply_vec(&vac)
        };
        assert!(rho.fidelity_with_pure(&psi_u) > 1.0 - 1e-8);
    }

    #[test]
    fn tail_guard_violation_is_reported() {
        // A fast gate on a tiny basis pushes population to the boundary.
        let dim = 6;
        let mut rho = FockDensity::vacuum(dim, 2);
        let h = CsrMatrix::momentum(dim).kron(&CsrMatrix::position(dim)).scale(C64::new(4.0, 0.0));
        let res = lindblad_evolve(&mut rho, &h, &LindbladRates::none(), 1.0, 1e-6, &OdeOpts::default());
        assert!(matches!(res, Err(FockError::TailGuard { .. })), "got {res:?}");
    }

    #[test]
    fn atom_damping_acts_on_the_target_mode_only() {
        let dim = 12;
        let mut psi = vec![C64::new(0.0, 0.0); dim];
        psi[2] = C64::new(1.0, 0.0);
        let one = FockDensity::from_pure(&psi, dim, 1);
        let mut rho = FockDensity::product(&one, &one).unwrap();
        let rates = LindbladRates { zeta_a: 0.8, zeta_m: 0.0, n_th: 0.0 };
        let h = CsrMatrix::zeros(dim * dim);
        lindblad_evolve(&mut rho, &h, &rates, 0.5, 1e-6, &OdeOpts::default()).unwrap();
        assert_relative_eq!(rho.mean_occupation(0), 2.0 * (-0.4f64).exp(), epsilon = 1e-6);
        assert_relative_eq!(rho.mean_occupation(1), 2.0, epsilon = 1e-9);
    }
}
