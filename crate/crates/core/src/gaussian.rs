//! Gaussian variable registry and Weyl-ordered moment evaluation.
//!
//! Every input mode quadrature, injected vacuum, and classical noise term in
//! a protocol run is one registered variable with a mean and a row in the
//! symmetric covariance matrix.  Polynomial observables over those variables
//! are reduced to moments with Isserlis' theorem: center each variable at its
//! mean, binomially expand, and sum covariance products over all perfect
//! matchings of the centered factors.
//!
//! The covariance matrix stores symmetric-ordered second moments, so every
//! expectation produced here is the Weyl-ordered quantum moment of the
//! corresponding operator polynomial.  Antisymmetric (commutator) content is
//! carried separately by the canonical-pair registry, in units of 2i.

use alloc::string::String;
use alloc::vec::Vec;

use crate::poly::{Monomial, QuadPoly, Role, VarId};

/// Hard ceiling on centered moment degree; (d−1)!! matchings are enumerated.
const MAX_MOMENT_DEGREE: usize = 20;

#[derive(Clone, Debug)]
pub struct GaussianEnsemble {
    names: Vec<String>,
    roles: Vec<Role>,
    mean: Vec<f64>,
    /// Row-major symmetric n×n matrix of centered second moments.
    cov: Vec<f64>,
    /// Canonical pairs (a, b) with [a, b] = 2i; all other commutators vanish.
    pairs: Vec<(VarId, VarId)>,
}

impl GaussianEnsemble {
    pub fn new() -> Self {
        GaussianEnsemble {
            names: Vec::new(),
            roles: Vec::new(),
            mean: Vec::new(),
            cov: Vec::new(),
            pairs: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    fn grow(&mut self, name: &str, role: Role, mean: f64, var: f64) -> VarId {
        let n = self.len();
        let mut cov = Vec::with_capacity((n + 1) * (n + 1));
        for i in 0..n {
            cov.extend_from_slice(&self.cov[i * n..i * n + n]);
            cov.push(0.0);
        }
        cov.extend(core::iter::repeat(0.0).take(n));
        cov.push(var);
        self.cov = cov;
        self.names.push(String::from(name));
        self.roles.push(role);
        self.mean.push(mean);
        VarId(n as u32)
    }

    /// Register a lone classical variable (zero commutator with everything).
    pub fn add_classical(&mut self, name: &str, role: Role, mean: f64, var: f64) -> VarId {
        self.grow(name, role, mean, var)
    }

    /// Register a canonical quadrature pair with [first, second] = 2i,
    /// initialised to the vacuum (zero mean, unit variances, no correlation).
    pub fn add_pair(
        &mut self,
        name_x: &str,
        name_y: &str,
        role_x: Role,
        role_y: Role,
    ) -> (VarId, VarId) {
        let a = self.grow(name_x, role_x, 0.0, 1.0);
        let b = self.grow(name_y, role_y, 0.0, 1.0);
        self.pairs.push((a, b));
        (a, b)
    }

    pub fn name(&self, id: VarId) -> &str {
        &self.names[id.0 as usize]
    }

    pub fn role(&self, id: VarId) -> Role {
        self.roles[id.0 as usize]
    }

    pub fn pairs(&self) -> &[(VarId, VarId)] {
        &self.pairs
    }

    pub fn mean(&self, id: VarId) -> f64 {
        self.mean[id.0 as usize]
    }

    pub fn set_mean(&mut self, id: VarId, value: f64) {
        self.mean[id.0 as usize] = value;
    }

    pub fn cov(&self, a: VarId, b: VarId) -> f64 {
        self.cov[a.0 as usize * self.len() + b.0 as usize]
    }

    /// Symmetric write of a centered second moment.
    pub fn set_cov(&mut self, a: VarId, b: VarId, value: f64) {
        let n = self.len();
        self.cov[a.0 as usize * n + b.0 as usize] = value;
        self.cov[b.0 as usize * n + a.0 as usize] = value;
    }

    pub fn var(&self, id: VarId) -> f64 {
        self.cov(id, id)
    }

    pub fn set_var(&mut self, id: VarId, value: f64) {
        assert!(value >= 0.0, "variance must be nonnegative");
        self.set_cov(id, id, value);
    }

    /// Symplectic form in units of 2i: +1 if (a, b) is a registered pair,
    /// −1 for the reverse order, 0 otherwise.
    pub fn omega(&self, a: VarId, b: VarId) -> f64 {
        for &(x, y) in &self.pairs {
            if (x, y) == (a, b) {
                return 1.0;
            }
            if (x, y) == (b, a) {
                return -1.0;
            }
        }
        0.0
    }

    pub fn is_classical(&self, id: VarId) -> bool {
        self.pairs.iter().all(|&(a, b)| a != id && b != id)
    }

    /// Weyl-ordered expectation of a polynomial observable.
    pub fn expectation(&self, p: &QuadPoly) -> f64 {
        let mut total = 0.0;
        for (mono, coeff) in p.terms() {
            total += coeff * self.monomial_moment(mono);
        }
        total
    }

    /// Weyl-ordered variance, clamped at zero against roundoff.
    pub fn variance(&self, p: &QuadPoly) -> f64 {
        let m = self.expectation(p);
        let m2 = self.expectation(&p.mul(p));
        let v = m2 - m * m;
        debug_assert!(
            v > -1e-9 * (1.0 + m2.abs()),
            "variance {} far below zero",
            v
        );
        v.max(0.0)
    }

    /// Symmetric covariance ½⟨{δP, δQ}⟩ of two polynomial observables.
    pub fn covariance(&self, p: &QuadPoly, q: &QuadPoly) -> f64 {
        self.expectation(&p.mul(q)) - self.expectation(p) * self.expectation(q)
    }

    fn monomial_moment(&self, m: &Monomial) -> f64 {
        if m.is_one() {
            return 1.0;
        }
        let factors = m.factors();
        let mut centered: Vec<VarId> = Vec::with_capacity(m.degree() as usize);
        self.binomial_rec(factors, 0, 1.0, &mut centered)
    }

    /// Recurse over (μ + δ)^e expansions per factor, then close with the
    /// matching sum over whatever centered copies were kept.
    fn binomial_rec(
        &self,
        factors: &[(VarId, u32)],
        idx: usize,
        scale: f64,
        centered: &mut Vec<VarId>,
    ) -> f64 {
        if idx == factors.len() {
            return scale * self.matching_sum(centered);
        }
        let (id, e) = factors[idx];
        let mu = self.mean(id);
        if mu == 0.0 {
            let base = centered.len();
            centered.extend(core::iter::repeat(id).take(e as usize));
            let out = self.binomial_rec(factors, idx + 1, scale, centered);
            centered.truncate(base);
            return out;
        }
        let mut total = 0.0;
        for k in 0..=e {
            let w = binom(e, k) * powi(mu, e - k);
            let base = centered.len();
            centered.extend(core::iter::repeat(id).take(k as usize));
            total += self.binomial_rec(factors, idx + 1, scale * w, centered);
            centered.truncate(base);
        }
        total
    }

    /// E[δ₁δ₂…δ_d] = Σ over perfect matchings of Π cov; zero for odd d.
    fn matching_sum(&self, vars: &[VarId]) -> f64 {
        let d = vars.len();
        assert!(d <= MAX_MOMENT_DEGREE, "moment degree {} too large", d);
        if d % 2 == 1 {
            return 0.0;
        }
        if d == 0 {
            return 1.0;
        }
        self.match_rec(vars, 0)
    }

    fn match_rec(&self, vars: &[VarId], used: u32) -> f64 {
        let mut first = None;
        for i in 0..vars.len() {
            if used & (1 << i) == 0 {
                first = Some(i);
                break;
            }
        }
        let Some(i) = first else {
            return 1.0;
        };
        let used_i = used | (1 << i);
        let mut total = 0.0;
        for j in (i + 1)..vars.len() {
            if used_i & (1 << j) != 0 {
                continue;
            }
            let c = self.cov(vars[i], vars[j]);
            if c != 0.0 {
                total += c * self.match_rec(vars, used_i | (1 << j));
            }
        }
        total
    }
}

impl Default for GaussianEnsemble {
    fn default() -> Self {
        Self::new()
    }
}

fn binom(n: u32, k: u32) -> f64 {
    let k = k.min(n - k);
    let mut out = 1.0;
    for i in 0..k {
        out = out * (n - i) as f64 / (i + 1) as f64;
    }
    out
}

fn powi(x: f64, e: u32) -> f64 {
    let mut out = 1.0;
    for _ in 0..e {
        out *= x;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::QuadPoly;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn vacuum_pair(ens: &mut GaussianEnsemble, tag: &str) -> (VarId, VarId) {
        let xn = alloc::format!("{tag}_x");
        let yn = alloc::format!("{tag}_y");
        ens.add_pair(&xn, &yn, Role::AtomX, Role::AtomY)
    }

    #[test]
    fn correlated_fourth_moment() {
        // E[q²X²] = Var(q)Var(X) + 2 Cov(q,X)² for zero means.
        let mut ens = GaussianEnsemble::new();
        let (q, _) = vacuum_pair(&mut ens, "a");
        let (x, _) = vacuum_pair(&mut ens, "b");
        for c in [0.0, 0.3, -0.8] {
            ens.set_cov(q, x, c);
            let p = QuadPoly::var(q).mul(&QuadPoly::var(q)).mul(&QuadPoly::var(x)).mul(&QuadPoly::var(x));
            assert_relative_eq!(ens.expectation(&p), 1.0 + 2.0 * c * c, epsilon = 1e-12);
        }
    }

    #[test]
    fn variance_of_square_is_twice_square_of_variance() {
        let mut ens = GaussianEnsemble::new();
        let (q, _) = vacuum_pair(&mut ens, "m");
        for v in [1.0, 2.5, 0.2] {
            ens.set_var(q, v);
            let q2 = QuadPoly::var(q).mul(&QuadPoly::var(q));
            assert_relative_eq!(ens.variance(&q2), 2.0 * v * v, epsilon = 1e-12);
        }
    }

    #[test]
    fn shifted_fourth_and_sixth_moments() {
        let mut ens = GaussianEnsemble::new();
        let (q, _) = vacuum_pair(&mut ens, "m");
        let (mu, v) = (1.7, 0.6);
        ens.set_mean(q, mu);
        ens.set_var(q, v);
        let q1 = QuadPoly::var(q);
        let q4 = q1.mul(&q1).mul(&q1).mul(&q1);
        assert_relative_eq!(
            ens.expectation(&q4),
            mu.powi(4) + 6.0 * mu * mu * v + 3.0 * v * v,
            epsilon = 1e-12
        );
        ens.set_mean(q, 0.0);
        let q6 = q4.mul(&q1).mul(&q1);
        assert_relative_eq!(ens.expectation(&q6), 15.0 * v * v * v, epsilon = 1e-12);
    }

    #[test]
    fn triple_square_with_uniform_correlation() {
        // E[X²Y²Z²] = 1 + 6c² + 8c³ for unit variances, pairwise cov c.
        let mut ens = GaussianEnsemble::new();
        let x = ens.add_classical("x", Role::Vacuum, 0.0, 1.0);
        let y = ens.add_classical("y", Role::Vacuum, 0.0, 1.0);
        let z = ens.add_classical("z", Role::Vacuum, 0.0, 1.0);
        for c in [0.0, 0.25, 1.0] {
            ens.set_cov(x, y, c);
            ens.set_cov(x, z, c);
            ens.set_cov(y, z, c);
            let p = QuadPoly::var(x)
                .mul(&QuadPoly::var(x))
                .mul(&QuadPoly::var(y))
                .mul(&QuadPoly::var(y))
                .mul(&QuadPoly::var(z))
                .mul(&QuadPoly::var(z));
            assert_relative_eq!(
                ens.expectation(&p),
                1.0 + 6.0 * c * c + 8.0 * c * c * c,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn omega_tracks_pair_registry() {
        let mut ens = GaussianEnsemble::new();
        let (q, p) = ens.add_pair("q", "p", Role::MechQ, Role::MechP);
        let h = ens.add_classical("h", Role::Thermal, 0.0, 2.0);
        assert_eq!(ens.omega(q, p), 1.0);
        assert_eq!(ens.omega(p, q), -1.0);
        assert_eq!(ens.omega(q, h), 0.0);
        assert!(ens.is_classical(h));
        assert!(!ens.is_classical(q));
    }

    fn single_var_moment(mu: f64, v: f64, e: u32) -> f64 {
        // E[(μ+δ)^e] for e ≤ 4.
        match e {
            0 => 1.0,
            1 => mu,
            2 => mu * mu + v,
            3 => mu * mu * mu + 3.0 * mu * v,
            4 => mu.powi(4) + 6.0 * mu * mu * v + 3.0 * v * v,
            _ => unreachable!(),
        }
    }

    proptest! {
        #[test]
        fn independent_vars_factorize(
            mus in proptest::collection::vec(-2.0f64..2.0, 3),
            vs in proptest::collection::vec(0.1f64..3.0, 3),
            es in proptest::collection::vec(0u32..=4, 3),
        ) {
            let mut ens = GaussianEnsemble::new();
            let ids: Vec<VarId> = (0..3)
                .map(|i| ens.add_classical("v", Role::Vacuum, mus[i], vs[i]))
                .collect();
            let mut p = QuadPoly::constant(1.0);
            let mut want = 1.0;
            for i in 0..3 {
                for _ in 0..es[i] {
                    p = p.mul(&QuadPoly::var(ids[i]));
                }
                want *= single_var_moment(mus[i], vs[i], es[i]);
            }
            prop_assert!((ens.expectation(&p) - want).abs() < 1e-9 * (1.0 + want.abs()));
        }

        #[test]
        fn expectation_is_linear(
            a in -3.0f64..3.0,
            b in -3.0f64..3.0,
            c in -0.9f64..0.9,
        ) {
            let mut ens = GaussianEnsemble::new();
            let x = ens.add_classical("x", Role::Vacuum, 0.4, 1.0);
            let y = ens.add_classical("y", Role::Vacuum, -0.2, 2.0);
            ens.set_cov(x, y, c);
            let p = QuadPoly::var(x).mul(&QuadPoly::var(x));
            let q = QuadPoly::var(x).mul(&QuadPoly::var(y));
            let combo = p.scale(a).add(&q.scale(b));
            let want = a * ens.expectation(&p) + b * ens.expectation(&q);
            prop_assert!((ens.expectation(&combo) - want).abs() < 1e-10 * (1.0 + want.abs()));
        }
    }
}
