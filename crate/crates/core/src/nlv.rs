//! Nonlinear variance σ(λ) = Var(Ŷ + λ·V′(X̂)) and its certification
//! thresholds.
//!
//! For any state the nonlinear variance is an exact parabola in λ, because
//! only the first and second moments of the pair (Ŷ, V′(X̂)) enter.  The
//! minimum of the parabola measures how well the state approximates an ideal
//! nonlinear phase gate output; dipping below a threshold curve certifies a
//! state property no classical mixture (σ_NC), Gaussian mixture (σ_NG), or
//! unsqueezed state (σ_SQ) can reach.

use alloc::vec::Vec;

use crate::gaussian::GaussianEnsemble;
use crate::poly::QuadPoly;
use crate::protocol::SymbolicState;

/// Values below 1 + 2λ² are unreachable by convex mixtures of coherent
/// states.
pub fn threshold_nc(lambda: f64) -> f64 {
    1.0 + 2.0 * lambda * lambda
}

/// Values below 3·(λ²/2)^{1/3} are unreachable by convex mixtures of
/// Gaussian states; the curve is the envelope of pure squeezed vacua.
pub fn threshold_ng(lambda: f64) -> f64 {
    3.0 * libm::cbrt(lambda * lambda / 2.0)
}

/// Values below 1 + λ² require quadrature squeezing.
pub fn threshold_sq(lambda: f64) -> f64 {
    1.0 + lambda * lambda
}

/// σ(λ) = c0 + c1·λ + c2·λ², with c2 = Var(V′(X̂)) ≥ 0.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct NlvParabola {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
}

impl NlvParabola {
    pub fn eval(&self, lambda: f64) -> f64 {
        self.c0 + lambda * (self.c1 + lambda * self.c2)
    }

    /// Minimizing λ = −c1/(2c2); 0 for a degenerate (flat) parabola.
    pub fn lambda_min(&self) -> f64 {
        if self.c2 <= 0.0 {
            return 0.0;
        }
        -self.c1 / (2.0 * self.c2)
    }

    pub fn sigma_min(&self) -> f64 {
        self.eval(self.lambda_min())
    }

    /// The parabola of the state after p ← p − δ·V′(q): σ′(λ) = σ(λ − δ).
    pub fn shifted(&self, delta: f64) -> NlvParabola {
        NlvParabola {
            c0: self.eval(-delta),
            c1: self.c1 - 2.0 * self.c2 * delta,
            c2: self.c2,
        }
    }

    /// Exact recovery from three samples (λᵢ, σ(λᵢ)) at distinct λᵢ.
    pub fn fit(points: &[(f64, f64); 3]) -> NlvParabola {
        let [(x0, y0), (x1, y1), (x2, y2)] = *points;
        let d01 = (y1 - y0) / (x1 - x0);
        let d12 = (y2 - y1) / (x2 - x1);
        let c2 = (d12 - d01) / (x2 - x0);
        let c1 = d01 - c2 * (x0 + x1);
        let c0 = y0 - x0 * (c1 + x0 * c2);
        NlvParabola { c0, c1, c2 }
    }
}

/// Which oscillator's quadrature pair the variance is evaluated on.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum NlvSide {
    /// Var(Ŷ + λ·V′(X̂)) on the broadcast target.
    Target,
    /// Var(p̂ + λ·V′(q̂)) on the nonlinear source.
    Source,
}

/// Exact nonlinear-variance parabola of the current state, with
/// V′(x) = xⁿ⁻¹ taken at the state's nonlinearity order.
pub fn compute_nlv(state: &SymbolicState, side: NlvSide) -> NlvParabola {
    let (pos, mom) = match side {
        NlvSide::Target => (&state.x, &state.y),
        NlvSide::Source => (&state.q, &state.p),
    };
    nlv_of_pair(&state.ensemble, pos, mom, state.order)
}

/// The same computation for an explicit quadrature pair.
pub fn nlv_of_pair(
    ensemble: &GaussianEnsemble,
    pos: &QuadPoly,
    mom: &QuadPoly,
    order: u32,
) -> NlvParabola {
    let mut w = QuadPoly::constant(1.0);
    for _ in 0..order.saturating_sub(1) {
        w = w.mul(pos);
    }
    NlvParabola {
        c0: ensemble.variance(mom),
        c1: 2.0 * ensemble.covariance(mom, &w),
        c2: ensemble.variance(&w),
    }
}

/// Certification verdict of a parabola against the thresholds on a λ grid.
#[derive(Clone, Debug, Default)]
pub struct Classification {
    pub nonclassical: bool,
    pub non_gaussian: bool,
    /// Maximal λ intervals with σ(λ) < σ_NC(λ), endpoints refined to 1e-6.
    pub nc_intervals: Vec<(f64, f64)>,
    /// Same for σ_NG.
    pub ng_intervals: Vec<(f64, f64)>,
}

/// Margin below which σ must undercut a threshold before it counts.
const WITNESS_EPS: f64 = 1e-12;
/// λ resolution of the interval endpoints.
const BISECT_TOL: f64 = 1e-6;

pub fn classify(p: &NlvParabola, grid: &[f64]) -> Classification {
    assert!(!grid.is_empty(), "classification grid must be non-empty");
    let nc = sub_threshold_intervals(p, grid, threshold_nc);
    let ng = sub_threshold_intervals(p, grid, threshold_ng);
    Classification {
        nonclassical: !nc.is_empty(),
        non_gaussian: !ng.is_empty(),
        nc_intervals: nc,
        ng_intervals: ng,
    }
}

fn sub_threshold_intervals(
    p: &NlvParabola,
    grid: &[f64],
    threshold: fn(f64) -> f64,
) -> Vec<(f64, f64)> {
    let below = |l: f64| p.eval(l) - threshold(l) < -WITNESS_EPS;
    let mut intervals = Vec::new();
    let mut start: Option<f64> = None;
    for (i, &l) in grid.iter().enumerate() {
        match (below(l), start) {
            (true, None) => {
                let lo = if i == 0 {
                    l
                } else {
                    bisect_edge(grid[i - 1], l, &below)
                };
                start = Some(lo);
            }
            (false, Some(lo)) => {
                let hi = bisect_edge(l, grid[i - 1], &below);
                intervals.push((lo, hi));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(lo) = start {
        intervals.push((lo, *grid.last().unwrap()));
    }
    intervals
}

/// Refine the witness boundary between an outside point and an inside point;
/// `inside(hi)` must hold.  Returns the edge to within [`BISECT_TOL`].
fn bisect_edge(lo: f64, hi: f64, inside: &impl Fn(f64) -> bool) -> f64 {
    debug_assert!(inside(hi) && !inside(lo));
    let (mut lo, mut hi) = (lo, hi);
    while (hi - lo).abs() > BISECT_TOL {
        let mid = 0.5 * (lo + hi);
        if inside(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}
