//! Adaptive Dormand–Prince 5(4) integration over complex state vectors.
//!
//! The state is a flat `Vec<C64>` (a ket or a vectorized density matrix).
//! After every accepted step an `on_accept` hook may repair the state
//! (re-Hermitize, renormalize, enforce tail guards); the next stage is
//! recomputed from the repaired state, so no FSAL reuse is attempted.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;

use crate::fock::FockError;
use crate::linalg::C64;

#[derive(Clone, Copy, Debug)]
pub struct OdeOpts {
    pub atol: f64,
    pub rtol: f64,
    pub max_steps: u64,
}

impl Default for OdeOpts {
    fn default() -> Self {
        OdeOpts { atol: 1e-9, rtol: 1e-7, max_steps: 2_000_000 }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct OdeStats {
    pub accepted: u64,
    pub rejected: u64,
    pub rhs_evals: u64,
}

const STAGES: usize = 7;

const A: [[f64; 6]; STAGES] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];

/// Fifth-order weights (the seventh stage row of `A`).
const B5: [f64; STAGES] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];

/// Difference between the fifth- and embedded fourth-order weights.
const ERR: [f64; STAGES] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const C: [f64; STAGES] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];

pub fn integrate_dp45<F, G>(
    rhs: &mut F,
    y: &mut Vec<C64>,
    t0: f64,
    t1: f64,
    opts: &OdeOpts,
    on_accept: &mut G,
) -> Result<OdeStats, FockError>
where
    F: FnMut(&[C64], &mut [C64]),
    G: FnMut(&mut [C64]) -> Result<(), FockError>,
{
    let span = t1 - t0;
    if span <= 0.0 {
        return Ok(OdeStats::default());
    }
    let n = y.len();
    let mut k: Vec<Vec<C64>> = (0..STAGES).map(|_| vec![C64::new(0.0, 0.0); n]).collect();
    let mut ytmp = vec![C64::new(0.0, 0.0); n];
    let mut ynew = vec![C64::new(0.0, 0.0); n];

    let mut stats = OdeStats::default();
    let mut t = t0;
    let mut h = span * 1e-3;

    while t < t1 {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(FockError::ToleranceNotMet { t_reached: t });
        }
        if h < span * 1e-14 {
            return Err(FockError::ToleranceNotMet { t_reached: t });
        }
        if t + h > t1 {
            h = t1 - t;
        }

        for s in 0..STAGES {
            if s == 0 {
                ytmp.copy_from_slice(y);
            } else {
                for i in 0..n {
                    let mut acc = y[i];
                    for (j, kj) in k.iter().enumerate().take(s) {
                        let a = A[s][j];
                        if a != 0.0 {
                            acc += kj[i] * (a * h);
                        }
                    }
                    ytmp[i] = acc;
                }
            }
            let _ = C[s];
            let (head, tail) = k.split_at_mut(s);
            let _ = head;
            rhs(&ytmp, &mut tail[0]);
            stats.rhs_evals += 1;
        }

        // 5th-order proposal and embedded error estimate.
        let mut err_sq = 0.0f64;
        for i in 0..n {
            let mut acc = y[i];
            let mut e = C64::new(0.0, 0.0);
            for (j, kj) in k.iter().enumerate() {
                if B5[j] != 0.0 {
                    acc += kj[i] * (B5[j] * h);
                }
                if ERR[j] != 0.0 {
                    e += kj[i] * (ERR[j] * h);
                }
            }
            ynew[i] = acc;
            let scale = opts.atol + opts.rtol * y[i].norm().max(acc.norm());
            let r = e.norm() / scale;
            err_sq += r * r;
        }
        let err = (err_sq / n as f64).sqrt();

        if err <= 1.0 {
            t += h;
            core::mem::swap(y, &mut ynew);
            on_accept(y)?;
            stats.accepted += 1;
        } else {
            stats.rejected += 1;
        }

        let factor = if err > 0.0 {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        } else {
            5.0
        };
        h *= factor;
    }
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_rotation_matches_exp() {
        // dy/dt = iωy, y(0) = 1 → y(T) = e^{iωT}.
        let omega = 3.7;
        let mut y = vec![C64::new(1.0, 0.0)];
        let mut rhs = |y: &[C64], out: &mut [C64]| {
            out[0] = y[0] * C64::new(0.0, omega);
        };
        let opts = OdeOpts { atol: 1e-12, rtol: 1e-10, ..OdeOpts::default() };
        let stats = integrate_dp45(
            &mut rhs,
            &mut y,
            0.0,
            2.0,
            &opts,
            &mut |_y: &mut [C64]| Ok(()),
        )
        .unwrap();
        assert!(stats.accepted > 0);
        let want = C64::new(0.0, omega * 2.0).exp();
        assert!((y[0] - want).norm() < 1e-8, "error {}", (y[0] - want).norm());
    }

    #[test]
    fn damped_oscillator_matches_closed_form() {
        // dy/dt = (−λ + iω)y over a span long enough to exercise step control.
        let lam = 0.8;
        let omega = 12.0;
        let mut y = vec![C64::new(1.0, 0.5)];
        let y0 = y[0];
        let mut rhs = |y: &[C64], out: &mut [C64]| {
            out[0] = y[0] * C64::new(-lam, omega);
        };
        integrate_dp45(
            &mut rhs,
            &mut y,
            0.0,
            3.0,
            &OdeOpts::default(),
            &mut |_y: &mut [C64]| Ok(()),
        )
        .unwrap();
        let want = y0 * C64::new(-lam * 3.0, omega * 3.0).exp();
        assert!((y[0] - want).norm() < 1e-6);
    }

    #[test]
    fn on_accept_error_propagates() {
        let mut y = vec![C64::new(1.0, 0.0)];
        let mut rhs = |y: &[C64], out: &mut [C64]| {
            out[0] = y[0];
        };
        let res = integrate_dp45(
            &mut rhs,
            &mut y,
            0.0,
            1.0,
            &OdeOpts::default(),
            &mut |_y: &mut [C64]| {
                Err(FockError::TailGuard { population: 1.0 })
            },
        );
        assert!(matches!(res, Err(FockError::TailGuard { .. })));
    }

    #[test]
    fn tolerance_failure_reports_time_reached() {
        // max_steps = 1 forces early abort on a stiff-ish problem.
        let mut y = vec![C64::new(1.0, 0.0)];
        let mut rhs = |y: &[C64], out: &mut [C64]| {
            out[0] = y[0] * C64::new(0.0, 500.0);
        };
        let opts = OdeOpts { max_steps: 1, ..OdeOpts::default() };
        let res = integrate_dp45(
            &mut rhs,
            &mut y,
            0.0,
            1.0,
            &opts,
            &mut |_y: &mut [C64]| Ok(()),
        );
        match res {
            Err(FockError::ToleranceNotMet { t_reached }) => assert!(t_reached < 1.0),
            other => panic!("expected tolerance failure, got {other:?}"),
        }
    }
}
