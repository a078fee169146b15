//! Wigner function of a single-mode density on a rectangular grid.
//!
//! Phase-space coordinates follow the ħ = 2 convention (vacuum variance 1,
//! W_vac(0, 0) = 1/2π, ∫∫W dX dY = 1). With B = X² + Y² and the unit phase
//! u = (X − iY)/√B the series over number-basis matrix elements is
//!
//!   W = (1/2π) Σ_L (2 − δ_{L0}) Σ_n (−1)ⁿ φₙ⁽ᴸ⁾(B) · Re[ρ_{n+L,n} uᴸ],
//!
//! where φₙ⁽ᴸ⁾(B) = √(n!/(n+L)!) e^{−B/2} B^{L/2} Lₙ⁽ᴸ⁾(B) are the bounded
//! Laguerre functions. Running their three-term recurrence forward keeps
//! every intermediate in [−1, 1], so the evaluation stays absolutely
//! accurate far into the Gaussian tails where the bare polynomials overflow.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::linalg::C64;

use super::{FockDensity, FockError};

/// Grid resolutions below this per axis set the coarse warning flag.
pub const COARSE_RESOLUTION: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WignerGridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl WignerGridSpec {
    pub fn square(half_width: f64, points: usize) -> Self {
        WignerGridSpec {
            x_min: -half_width,
            x_max: half_width,
            y_min: -half_width,
            y_max: half_width,
            nx: points,
            ny: points,
        }
    }

    pub fn validate(&self) -> Result<(), FockError> {
        let ok = self.x_min < self.x_max
            && self.y_min < self.y_max
            && self.nx >= 2
            && self.ny >= 2
            && self.x_min.is_finite()
            && self.x_max.is_finite()
            && self.y_min.is_finite()
            && self.y_max.is_finite();
        if ok {
            Ok(())
        } else {
            Err(FockError::Invalid("wigner grid bounds must be finite, ordered, with at least 2 points per axis"))
        }
    }

    pub fn xs(&self) -> Vec<f64> {
        linspace(self.x_min, self.x_max, self.nx)
    }

    pub fn ys(&self) -> Vec<f64> {
        linspace(self.y_min, self.y_max, self.ny)
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| lo + step * i as f64).collect()
}

#[derive(Clone, Debug)]
pub struct WignerGrid {
    pub spec: WignerGridSpec,
    /// Row-major values[iy · nx + ix] = W(xs[ix], ys[iy]).
    pub values: Vec<f64>,
    /// Set when either axis resolution is below [`COARSE_RESOLUTION`].
    pub coarse_warning: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NegativityMetrics {
    /// Most negative grid value of W.
    pub min_value: f64,
    /// Σ max(0, −W)·ΔX·ΔY over the grid.
    pub negative_volume: f64,
}

/// Evaluate the Wigner function of a single-mode density over `spec`.
pub fn compute_wigner(rho: &FockDensity, spec: &WignerGridSpec) -> Result<WignerGrid, FockError> {
    if rho.modes != 1 {
        return Err(FockError::Invalid("wigner evaluation needs a single-mode state"));
    }
    spec.validate()?;
    let n = rho.dim;
    let xs = spec.xs();
    let ys = spec.ys();
    let mut values = vec![0.0f64; spec.nx * spec.ny];

    // ln L! for the φ₀ seed.
    let mut ln_fact = vec![0.0f64; n + 1];
    for k in 1..=n {
        ln_fact[k] = ln_fact[k - 1] + (k as f64).ln();
    }

    let inv_2pi = 0.5 / core::f64::consts::PI;
    for (iy, &yv) in ys.iter().enumerate() {
        for (ix, &xv) in xs.iter().enumerate() {
            let b = xv * xv + yv * yv;
            let mut total = 0.0f64;
            let tiny = b < 1e-300;
            let u = if tiny {
                C64::new(1.0, 0.0)
            } else {
                C64::new(xv, -yv) / b.sqrt()
            };
            let l_max = if tiny { 0 } else { n - 1 };
            let mut u_pow = C64::new(1.0, 0.0);
            for l in 0..=l_max {
                // φ₀⁽ᴸ⁾ = e^{−B/2} B^{L/2} / √L!.
                let ln_phi0 = -0.5 * b
                    + if l == 0 { 0.0 } else { 0.5 * (l as f64) * b.ln() }
                    - 0.5 * ln_fact[l];
                let mut phi_prev = 0.0f64;
                let mut phi = ln_phi0.exp();
                let weight = if l == 0 { 1.0 } else { 2.0 };
                let mut acc = 0.0f64;
                let mut sign = 1.0f64;
                for k in 0..n - l {
                    let elem = rho.data[(k + l) * n + k] * u_pow;
                    acc += sign * phi * elem.re;
                    // Forward step of the bounded-function recurrence.
                    let kf = k as f64;
                    let lf = l as f64;
                    let denom = ((kf + 1.0) * (kf + lf + 1.0)).sqrt();
                    let next = ((2.0 * kf + lf + 1.0 - b) * phi
                        - (kf * (kf + lf)).sqrt() * phi_prev)
                        / denom;
                    phi_prev = phi;
                    phi = next;
                    sign = -sign;
                }
                total += weight * acc;
                u_pow *= u;
            }
            values[iy * spec.nx + ix] = inv_2pi * total;
        }
    }

    Ok(WignerGrid {
        spec: *spec,
        values,
        coarse_warning: spec.nx < COARSE_RESOLUTION || spec.ny < COARSE_RESOLUTION,
    })
}

/// Grid minimum and integrated negative part.
pub fn negativity_metrics(grid: &WignerGrid) -> NegativityMetrics {
    let dx = (grid.spec.x_max - grid.spec.x_min) / (grid.spec.nx - 1) as f64;
    let dy = (grid.spec.y_max - grid.spec.y_min) / (grid.spec.ny - 1) as f64;
    let mut min_value = f64::INFINITY;
    let mut neg = 0.0f64;
    for &w in &grid.values {
        min_value = min_value.min(w);
        if w < 0.0 {
            neg += -w;
        }
    }
    NegativityMetrics { min_value, negative_volume: neg * dx * dy }
}
