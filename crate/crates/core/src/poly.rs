//! Sparse real-coefficient polynomials over registered scalar variables.
//!
//! Quadrature observables are propagated through the protocol as elements of
//! ℝ[v₀, v₁, …], where each vᵢ is one Gaussian input variable (an initial
//! quadrature, a mediator quadrature, or an injected noise).  Only the handful
//! of operations the protocol needs are provided; products and substitutions
//! are guarded by an explicit total-degree cap so a mis-specified nonlinearity
//! order cannot blow the term count up silently.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

/// Index of a variable in a [`crate::gaussian::GaussianEnsemble`] registry.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct VarId(pub u32);

/// What a registered variable physically is.  Purely descriptive metadata;
/// the moment engine only looks at means and covariances.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Role {
    /// Target (atomic) position-like quadrature X̂.
    AtomX,
    /// Target (atomic) momentum-like quadrature Ŷ.
    AtomY,
    /// Source (mechanical) position q̂.
    MechQ,
    /// Source (mechanical) momentum p̂.
    MechP,
    /// Mediator signal quadrature (carries the written atomic signal).
    MediatorX,
    /// Mediator readout quadrature (measured and fed forward).
    MediatorY,
    /// Vacuum admixture from loss or damping.
    Vacuum,
    /// Classical noise injection (heating).
    Thermal,
}

/// Terms with |coefficient| at or below this threshold are dropped when a
/// polynomial is (re)collected.
pub const PRUNE_EPS: f64 = 1e-15;

/// Default total-degree cap; a monomial nonlinearity of order n needs
/// cap ≥ n − 1 in the propagated expressions (2 for the cubic gate).
pub const DEFAULT_DEGREE_CAP: u32 = 4;

/// Error raised by degree-raising polynomial operations.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum PolyError {
    /// A resulting term would have total degree `degree`, above `cap`.
    DegreeCap { degree: u32, cap: u32 },
}

impl fmt::Display for PolyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolyError::DegreeCap { degree, cap } => {
                write!(f, "term of total degree {degree} exceeds the degree cap {cap}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for PolyError {}

/// Product of variables with positive integer exponents, kept sorted by
/// variable id.  The empty monomial is the constant 1.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Monomial(Vec<(VarId, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(v: VarId) -> Self {
        Monomial(alloc::vec![(v, 1)])
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e).sum()
    }

    pub fn factors(&self) -> &[(VarId, u32)] {
        &self.0
    }

    /// Merge two sorted factor lists, adding exponents of shared variables.
    pub fn mul(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                core::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                core::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                core::cmp::Ordering::Equal => {
                    out.push((a[i].0, a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial(out)
    }

    /// Append every variable of the monomial to `out`, once per power.
    pub fn expand_into(&self, out: &mut Vec<VarId>) {
        for &(v, e) in &self.0 {
            for _ in 0..e {
                out.push(v);
            }
        }
    }
}

/// Sparse polynomial with f64 coefficients in canonical (BTreeMap) term order.
///
/// The map representation makes iteration order, and hence every downstream
/// floating-point reduction, deterministic.
#[derive(Clone, PartialEq, Debug, Default)]
pub struct QuadPoly {
    terms: BTreeMap<Monomial, f64>,
}

impl QuadPoly {
    pub fn zero() -> Self {
        QuadPoly { terms: BTreeMap::new() }
    }

    pub fn constant(c: f64) -> Self {
        let mut p = QuadPoly::zero();
        p.add_term(Monomial::one(), c);
        p
    }

    pub fn var(v: VarId) -> Self {
        let mut p = QuadPoly::zero();
        p.add_term(Monomial::var(v), 1.0);
        p
    }

    /// c₀ + Σ cᵢ·vᵢ convenience constructor.
    pub fn linear(constant: f64, coeffs: &[(VarId, f64)]) -> Self {
        let mut p = QuadPoly::constant(constant);
        for &(v, c) in coeffs {
            p.add_term(Monomial::var(v), c);
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, f64)> {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    pub fn coeff(&self, m: &Monomial) -> f64 {
        self.terms.get(m).copied().unwrap_or(0.0)
    }

    pub fn constant_term(&self) -> f64 {
        self.coeff(&Monomial::one())
    }

    pub fn linear_coeff(&self, v: VarId) -> f64 {
        self.coeff(&Monomial::var(v))
    }

    /// Variables occurring anywhere in the polynomial, ascending, deduplicated.
    pub fn vars(&self) -> Vec<VarId> {
        let mut out: Vec<VarId> = Vec::new();
        for m in self.terms.keys() {
            for &(v, _) in m.factors() {
                if out.last() != Some(&v) && !out.contains(&v) {
                    out.push(v);
                }
            }
        }
        out.sort_unstable();
        out
    }

    fn add_term(&mut self, m: Monomial, c: f64) {
        use alloc::collections::btree_map::Entry;
        if c == 0.0 {
            return;
        }
        match self.terms.entry(m) {
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().abs() <= PRUNE_EPS {
                    e.remove();
                }
            }
            Entry::Vacant(e) => {
                if c.abs() > PRUNE_EPS {
                    e.insert(c);
                }
            }
        }
    }

    pub fn add(&self, other: &QuadPoly) -> QuadPoly {
        let mut out = self.clone();
        for (m, c) in other.terms() {
            out.add_term(m.clone(), c);
        }
        out
    }

    pub fn sub(&self, other: &QuadPoly) -> QuadPoly {
        let mut out = self.clone();
        for (m, c) in other.terms() {
            out.add_term(m.clone(), -c);
        }
        out
    }

    pub fn neg(&self) -> QuadPoly {
        self.scale(-1.0)
    }

    pub fn scale(&self, s: f64) -> QuadPoly {
        if s == 0.0 {
            return QuadPoly::zero();
        }
        let mut out = QuadPoly::zero();
        for (m, c) in self.terms() {
            out.add_term(m.clone(), c * s);
        }
        out
    }

    pub fn add_scaled(&self, other: &QuadPoly, s: f64) -> QuadPoly {
        let mut out = self.clone();
        for (m, c) in other.terms() {
            out.add_term(m.clone(), c * s);
        }
        out
    }

    /// Unchecked product; callers that can raise the degree past a configured
    /// cap should use [`QuadPoly::mul_capped`] instead.
    pub fn mul(&self, other: &QuadPoly) -> QuadPoly {
        let mut out = QuadPoly::zero();
        for (ma, ca) in self.terms() {
            for (mb, cb) in other.terms() {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }

    pub fn mul_capped(&self, other: &QuadPoly, cap: u32) -> Result<QuadPoly, PolyError> {
        let degree = self.degree() + other.degree();
        if degree > cap {
            return Err(PolyError::DegreeCap { degree, cap });
        }
        Ok(self.mul(other))
    }

    pub fn pow_capped(&self, exp: u32, cap: u32) -> Result<QuadPoly, PolyError> {
        let degree = self.degree() * exp;
        if degree > cap {
            return Err(PolyError::DegreeCap { degree, cap });
        }
        let mut out = QuadPoly::constant(1.0);
        for _ in 0..exp {
            out = out.mul(self);
        }
        Ok(out)
    }

    /// Replace every mapped variable by its image polynomial and expand.
    /// Unmapped variables stay themselves.  The total degree of every
    /// resulting term must stay within `cap`.
    pub fn substitute(
        &self,
        map: &BTreeMap<VarId, QuadPoly>,
        cap: u32,
    ) -> Result<QuadPoly, PolyError> {
        let mut out = QuadPoly::zero();
        for (m, c) in self.terms() {
            // Cheap upper bound on the expanded degree of this term.
            let mut bound = 0u32;
            for &(v, e) in m.factors() {
                bound += e * map.get(&v).map_or(1, QuadPoly::degree);
            }
            if bound > cap {
                return Err(PolyError::DegreeCap { degree: bound, cap });
            }
            let mut term = QuadPoly::constant(c);
            for &(v, e) in m.factors() {
                match map.get(&v) {
                    Some(img) => {
                        for _ in 0..e {
                            term = term.mul(img);
                        }
                    }
                    None => {
                        let mono = Monomial::var(v);
                        let mut shifted = QuadPoly::zero();
                        for (tm, tc) in term.terms() {
                            let mut factor = tm.clone();
                            for _ in 0..e {
                                factor = factor.mul(&mono);
                            }
                            shifted.add_term(factor, tc);
                        }
                        term = shifted;
                    }
                }
            }
            out = out.add(&term);
        }
        Ok(out)
    }

    /// Evaluate at a point; `point[v.0]` is the value of variable v.
    pub fn eval(&self, point: &[f64]) -> f64 {
        let mut total = 0.0;
        for (m, c) in self.terms() {
            let mut prod = c;
            for &(v, e) in m.factors() {
                let x = point[v.0 as usize];
                let mut pw = 1.0;
                for _ in 0..e {
                    pw *= x;
                }
                prod *= pw;
            }
            total += prod;
        }
        total
    }
}

impl fmt::Display for QuadPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.terms() {
            if !first {
                write!(f, " {} ", if c < 0.0 { "-" } else { "+" })?;
            } else if c < 0.0 {
                write!(f, "-")?;
            }
            first = false;
            write!(f, "{}", c.abs())?;
            for &(v, e) in m.factors() {
                write!(f, "·v{}", v.0)?;
                if e > 1 {
                    write!(f, "^{e}")?;
                }
            }
        }
        Ok(())
    }
}
