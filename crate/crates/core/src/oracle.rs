//! Independent Monte Carlo estimators used to cross-check the moment engine,
//! plus the closed-form thermal relaxation curve used to pin the dissipative
//! integrator.
//!
//! Sampling is counter-based: sample s always starts at ChaCha word position
//! s·words_per_sample, and every sample consumes a fixed word budget, so the
//! stream is reproducible bit-for-bit regardless of batch layout.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};

use crate::gaussian::GaussianEnsemble;
use crate::linalg::sym_eigen;
use crate::poly::QuadPoly;

#[derive(Clone, Copy, Debug)]
pub struct McConfig {
    pub samples: u64,
    pub seed: u64,
    pub batch: usize,
}

impl McConfig {
    pub fn new(seed: u64) -> Self {
        McConfig {
            samples: 1_000_000,
            seed,
            batch: 65_536,
        }
    }

    pub fn with_samples(mut self, samples: u64) -> Self {
        self.samples = samples;
        self
    }

    fn validate(&self) {
        assert!(self.samples >= 1_000, "need at least 1000 samples");
        assert!(self.batch >= 1, "batch must be positive");
    }
}

#[derive(Clone, Copy, Debug)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
}

/// Raw power sums of the sampled observable, accumulated batch by batch in a
/// fixed order so results are deterministic.
struct PowerSums {
    n: f64,
    s1: f64,
    s2: f64,
    s3: f64,
    s4: f64,
}

fn sample_power_sums(ens: &GaussianEnsemble, p: &QuadPoly, cfg: &McConfig) -> PowerSums {
    cfg.validate();
    let n = ens.len();
    let mut cov = vec![0.0f64; n * n];
    for i in 0..n {
        for j in 0..n {
            use crate::poly::VarId;
            cov[i * n + j] = ens.cov(VarId(i as u32), VarId(j as u32));
        }
    }
    // Factor Σ = V diag(λ) Vᵀ, clamping tiny negative eigenvalues from
    // roundoff to zero: L = V diag(√λ) maps iid normals to the ensemble.
    let (vals, vecs) = sym_eigen(&cov, n);
    let mut l = vec![0.0f64; n * n];
    for j in 0..n {
        let s = vals[j].max(0.0).sqrt();
        for i in 0..n {
            l[i * n + j] = vecs[i * n + j] * s;
        }
    }
    let means: Vec<f64> = (0..n).map(|i| ens.mean(crate::poly::VarId(i as u32))).collect();

    let normals_per_sample = n + (n % 2);
    let words_per_sample = (2 * normals_per_sample) as u128;
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);

    let mut total = PowerSums {
        n: 0.0,
        s1: 0.0,
        s2: 0.0,
        s3: 0.0,
        s4: 0.0,
    };
    let mut z = vec![0.0f64; normals_per_sample];
    let mut x = vec![0.0f64; n];

    let mut start = 0u64;
    while start < cfg.samples {
        let stop = (start + cfg.batch as u64).min(cfg.samples);
        let (mut b1, mut b2, mut b3, mut b4) = (0.0f64, 0.0, 0.0, 0.0);
        for s in start..stop {
            rng.set_word_pos(s as u128 * words_per_sample);
            fill_standard_normals(&mut rng, &mut z);
            for i in 0..n {
                let mut acc = means[i];
                for j in 0..n {
                    acc += l[i * n + j] * z[j];
                }
                x[i] = acc;
            }
            let f = p.eval(&x);
            b1 += f;
            let f2 = f * f;
            b2 += f2;
            b3 += f2 * f;
            b4 += f2 * f2;
        }
        total.n += (stop - start) as f64;
        total.s1 += b1;
        total.s2 += b2;
        total.s3 += b3;
        total.s4 += b4;
        start = stop;
    }
    total
}

fn fill_standard_normals(rng: &mut ChaCha12Rng, out: &mut [f64]) {
    debug_assert!(out.len() % 2 == 0);
    let mut i = 0;
    while i < out.len() {
        let u1 = ((rng.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0))
            .max(1.0 / 9007199254740992.0);
        let u2 = (rng.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0);
        let r = (-2.0 * libm::log(u1)).sqrt();
        let th = 2.0 * core::f64::consts::PI * u2;
        out[i] = r * libm::cos(th);
        out[i + 1] = r * libm::sin(th);
        i += 2;
    }
}

/// Monte Carlo estimate of ⟨P⟩ with its standard error.
pub fn mc_expectation(ens: &GaussianEnsemble, p: &QuadPoly, cfg: &McConfig) -> McEstimate {
    let s = sample_power_sums(ens, p, cfg);
    let mean = s.s1 / s.n;
    let var = (s.s2 / s.n - mean * mean).max(0.0);
    McEstimate {
        value: mean,
        std_error: (var / s.n).sqrt(),
    }
}

/// Monte Carlo estimate of Var(P); the standard error uses the asymptotic
/// variance (m₄ − m₂²)/n of the sample variance.
pub fn mc_variance(ens: &GaussianEnsemble, p: &QuadPoly, cfg: &McConfig) -> McEstimate {
    let s = sample_power_sums(ens, p, cfg);
    let mean = s.s1 / s.n;
    let m2 = (s.s2 / s.n - mean * mean).max(0.0);
    let m4 = s.s4 / s.n - 4.0 * mean * s.s3 / s.n + 6.0 * mean * mean * s.s2 / s.n
        - 3.0 * mean.powi(4);
    let se = ((m4 - m2 * m2).max(0.0) / s.n).sqrt();
    McEstimate {
        value: m2,
        std_error: se,
    }
}

/// Mean occupation of a damped mode coupled to a bath:
/// ⟨n⟩(t) = n_th + (n₀ − n_th)·e^{−ζt}.
pub fn decay_reference(n0: f64, n_th: f64, zeta: f64, t: f64) -> f64 {
    n_th + (n0 - n_th) * libm::exp(-zeta * t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{QuadPoly, Role};
    use approx::assert_relative_eq;

    #[test]
    fn vacuum_second_and_fourth_moments() {
        let mut ens = GaussianEnsemble::new();
        let (q, _) = ens.add_pair("q", "p", Role::MechQ, Role::MechP);
        let cfg = McConfig::new(7).with_samples(200_000);
        let q2 = QuadPoly::var(q).mul(&QuadPoly::var(q));
        let e = mc_expectation(&ens, &q2, &cfg);
        assert!((e.value - 1.0).abs() < 4.0 * e.std_error, "{e:?}");
        let v = mc_variance(&ens, &q2, &cfg);
        assert!((v.value - 2.0).abs() < 4.0 * v.std_error, "{v:?}");
    }

    #[test]
    fn correlated_cross_moment() {
        let mut ens = GaussianEnsemble::new();
        let (q, _) = ens.add_pair("q", "p", Role::MechQ, Role::MechP);
        let (x, _) = ens.add_pair("x", "y", Role::AtomX, Role::AtomY);
        ens.set_cov(q, x, 0.6);
        let cfg = McConfig::new(11).with_samples(200_000);
        let qx = QuadPoly::var(q).mul(&QuadPoly::var(x));
        let e = mc_expectation(&ens, &qx, &cfg);
        assert!((e.value - 0.6).abs() < 4.0 * e.std_error, "{e:?}");
    }

    #[test]
    fn sampler_is_deterministic() {
        let mut ens = GaussianEnsemble::new();
        let (q, p) = ens.add_pair("q", "p", Role::MechQ, Role::MechP);
        ens.set_mean(q, 0.3);
        ens.set_cov(q, p, 0.2);
        let cfg = McConfig::new(42).with_samples(10_000);
        let poly = QuadPoly::var(q).mul(&QuadPoly::var(p));
        let a = mc_expectation(&ens, &poly, &cfg);
        let b = mc_expectation(&ens, &poly, &cfg);
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
    }

    #[test]
    fn near_singular_covariance_is_clamped() {
        let mut ens = GaussianEnsemble::new();
        let a = ens.add_classical("a", Role::Vacuum, 0.0, 1.0);
        let b = ens.add_classical("b", Role::Vacuum, 0.0, 1.0);
        // Perfect correlation up to roundoff can push an eigenvalue below 0.
        ens.set_cov(a, b, 1.0 + 1e-14);
        let cfg = McConfig::new(3).with_samples(5_000);
        let diff = QuadPoly::linear(0.0, &[(a, 1.0), (b, -1.0)]);
        let e = mc_expectation(&ens, &diff.mul(&diff), &cfg);
        assert!(e.value.is_finite());
        assert!(e.value.abs() < 1e-3, "{e:?}");
    }

    #[test]
    fn decay_curve_endpoints_and_monotonicity() {
        assert_relative_eq!(decay_reference(5.0, 0.5, 0.8, 0.0), 5.0);
        assert_relative_eq!(decay_reference(5.0, 0.5, 0.8, 1e9), 0.5);
        let early = decay_reference(5.0, 0.5, 0.8, 0.1);
        let late = decay_reference(5.0, 0.5, 0.8, 2.0);
        assert!(early > late && late > 0.5);
    }
}
