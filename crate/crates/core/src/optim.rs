//! Derivative-free minimization for the envelope search.
//!
//! A plain Nelder–Mead simplex with box projection: candidate vertices are
//! clamped into [lo, hi] before evaluation, which keeps the search feasible
//! without penalty tuning.  The routine is fully deterministic and counts
//! objective evaluations so callers can enforce an evaluation budget.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;

#[derive(Clone, Copy, Debug)]
pub struct NelderMeadOpts {
    pub max_iters: u32,
    /// Stop when the value spread over the simplex drops below
    /// tol·(1 + |best|) or the simplex diameter drops below tol.
    pub tol: f64,
    pub reflection: f64,
    pub expansion: f64,
    pub contraction: f64,
    pub shrink: f64,
    /// Hard cap on objective evaluations (None = unbounded).
    pub max_evals: Option<u64>,
}

impl Default for NelderMeadOpts {
    fn default() -> Self {
        NelderMeadOpts {
            max_iters: 400,
            tol: 1e-9,
            reflection: 1.0,
            expansion: 2.0,
            contraction: 0.5,
            shrink: 0.5,
            max_evals: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct OptimResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: u64,
}

struct Budget {
    used: u64,
    cap: Option<u64>,
}

impl Budget {
    fn spent(&self) -> bool {
        self.cap.is_some_and(|c| self.used >= c)
    }
}

fn clamp(x: &mut [f64], lo: &[f64], hi: &[f64]) {
    for i in 0..x.len() {
        x[i] = x[i].max(lo[i]).min(hi[i]);
    }
}

/// Minimize `f` over the box [lo, hi] starting from `x0` with initial simplex
/// offsets `step`.  Always returns the best point seen, even when the budget
/// runs out mid-iteration.
pub fn nelder_mead(
    f: &mut dyn FnMut(&[f64]) -> f64,
    x0: &[f64],
    step: &[f64],
    lo: &[f64],
    hi: &[f64],
    opts: &NelderMeadOpts,
) -> OptimResult {
    let d = x0.len();
    assert!(d > 0 && step.len() == d && lo.len() == d && hi.len() == d);
    let mut budget = Budget { used: 0, cap: opts.max_evals };
    let mut eval = |x: &[f64], b: &mut Budget| {
        b.used += 1;
        f(x)
    };

    // Initial simplex: x0 plus one offset vertex per dimension, nudged the
    // other way if clamping would collapse it onto x0.
    let mut verts: Vec<Vec<f64>> = Vec::with_capacity(d + 1);
    let mut x0c = x0.to_vec();
    clamp(&mut x0c, lo, hi);
    verts.push(x0c.clone());
    for i in 0..d {
        let mut v = x0c.clone();
        v[i] += step[i];
        clamp(&mut v, lo, hi);
        if v[i] == x0c[i] {
            v[i] = (x0c[i] - step[i]).max(lo[i]).min(hi[i]);
        }
        verts.push(v);
    }
    let mut vals: Vec<f64> = Vec::with_capacity(d + 1);
    let mut best = OptimResult { x: x0c.clone(), value: f64::INFINITY, evals: 0 };
    for v in &verts {
        if budget.spent() {
            vals.push(f64::INFINITY);
            continue;
        }
        let fv = eval(v, &mut budget);
        if fv < best.value {
            best = OptimResult { x: v.clone(), value: fv, evals: budget.used };
        }
        vals.push(fv);
    }

    for _ in 0..opts.max_iters {
        if budget.spent() {
            break;
        }
        // Order vertices best → worst.
        let mut order: Vec<usize> = (0..=d).collect();
        order.sort_by(|&a, &b| vals[a].partial_cmp(&vals[b]).unwrap());
        let reorder_v: Vec<Vec<f64>> = order.iter().map(|&i| verts[i].clone()).collect();
        let reorder_f: Vec<f64> = order.iter().map(|&i| vals[i]).collect();
        verts = reorder_v;
        vals = reorder_f;

        let spread = vals[d] - vals[0];
        let diam = (0..d)
            .map(|i| {
                verts[1..]
                    .iter()
                    .map(|v| (v[i] - verts[0][i]).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if spread <= opts.tol * (1.0 + vals[0].abs()) || diam <= opts.tol {
            break;
        }

        let mut centroid = vec![0.0; d];
        for v in verts.iter().take(d) {
            for i in 0..d {
                centroid[i] += v[i] / d as f64;
            }
        }
        let worst = vals[d];
        let propose = |coef: f64| -> Vec<f64> {
            let mut x = vec![0.0; d];
            for i in 0..d {
                x[i] = centroid[i] + coef * (centroid[i] - verts[d][i]);
            }
            clamp(&mut x, lo, hi);
            x
        };

        let xr = propose(opts.reflection);
        let fr = eval(&xr, &mut budget);
        if fr < best.value {
            best = OptimResult { x: xr.clone(), value: fr, evals: budget.used };
        }
        if fr < vals[0] && !budget.spent() {
            let xe = propose(opts.reflection * opts.expansion);
            let fe = eval(&xe, &mut budget);
            if fe < best.value {
                best = OptimResult { x: xe.clone(), value: fe, evals: budget.used };
            }
            if fe < fr {
                verts[d] = xe;
                vals[d] = fe;
            } else {
                verts[d] = xr;
                vals[d] = fr;
            }
        } else if fr < vals[d - 1] {
            verts[d] = xr;
            vals[d] = fr;
        } else if !budget.spent() {
            // Contract toward the better of the reflected and worst points.
            let xc = if fr < worst {
                propose(opts.reflection * opts.contraction)
            } else {
                propose(-opts.contraction)
            };
            let fc = eval(&xc, &mut budget);
            if fc < best.value {
                best = OptimResult { x: xc.clone(), value: fc, evals: budget.used };
            }
            if fc < worst.min(fr) {
                verts[d] = xc;
                vals[d] = fc;
            } else {
                // Shrink everything toward the best vertex.
                for k in 1..=d {
                    for i in 0..d {
                        verts[k][i] = verts[0][i] + opts.shrink * (verts[k][i] - verts[0][i]);
                    }
                    if budget.spent() {
                        vals[k] = f64::INFINITY;
                        continue;
                    }
                    vals[k] = eval(&verts[k].clone(), &mut budget);
                    if vals[k] < best.value {
                        best = OptimResult {
                            x: verts[k].clone(),
                            value: vals[k],
                            evals: budget.used,
                        };
                    }
                }
            }
        }
    }
    best.evals = budget.used;
    best
}
