//! Truncated number-basis engine: exact states, eigen-built gate unitaries,
//! and open-system evolution for one or two oscillator modes.
//!
//! Conventions match the moment engine: X̂ = â + â†, Ŷ = −i(â − â†), vacuum
//! variance 1, [X̂, Ŷ] = 2i. Two-mode indices are (target, source) with the
//! target mode major: the basis state |n_t, n_s⟩ sits at index n_t·dim + n_s.

pub mod lindblad;
pub mod ode;
pub mod run;
pub mod sparse;
pub mod wigner;

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::linalg::{hermitian_eigen, C64};
use crate::nlv::NlvParabola;
use crate::protocol::{GateType, ModeState, QuadMoments};
use sparse::CsrMatrix;

/// Default per-mode population allowed in the top [`TAIL_LEVELS`] levels.
pub const DEFAULT_TAIL_GUARD: f64 = 1e-6;

/// Number of boundary levels per mode monitored by the tail guard.
pub const TAIL_LEVELS: usize = 5;

#[derive(Clone, Debug)]
pub enum FockError {
    /// Bad argument (dimension, mode count, state parameters).
    Invalid(&'static str),
    /// A build-time action check failed; the basis is too small.
    Truncation { check: &'static str, error: f64 },
    /// Population reached the truncation boundary during evolution.
    TailGuard { population: f64 },
    /// The integrator could not reach the end time within its step budget.
    ToleranceNotMet { t_reached: f64 },
}

impl core::fmt::Display for FockError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            FockError::Invalid(what) => write!(f, "invalid input: {what}"),
            FockError::Truncation { check, error } => {
                write!(f, "truncation error: {check} check failed ({error:.3e}); increase the basis dimension")
            }
            FockError::TailGuard { population } => {
                write!(f, "tail guard violated: boundary population {population:.3e}; increase the basis dimension")
            }
            FockError::ToleranceNotMet { t_reached } => {
                write!(f, "integrator tolerance not met (reached t = {t_reached:.6})")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for FockError {}

/// Dense operator on one or two modes.
#[derive(Clone, Debug)]
pub struct FockOperator {
    pub dim: usize,
    pub modes: u8,
    /// Row-major dim^modes × dim^modes matrix.
    pub data: Vec<C64>,
}

impl FockOperator {
    pub fn d(&self) -> usize {
        self.dim.pow(self.modes as u32)
    }

    pub fn identity(dim: usize, modes: u8) -> Self {
        let d = dim.pow(modes as u32);
        let mut data = vec![C64::new(0.0, 0.0); d * d];
        for i in 0..d {
            data[i * d + i] = C64::new(1.0, 0.0);
        }
        FockOperator { dim, modes, data }
    }

    pub fn dagger(&self) -> Self {
        let d = self.d();
        let mut data = vec![C64::new(0.0, 0.0); d * d];
        for i in 0..d {
            for j in 0..d {
                data[j * d + i] = self.data[i * d + j].conj();
            }
        }
        FockOperator { dim: self.dim, modes: self.modes, data }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.d(), other.d());
        let d = self.d();
        let mut data = vec![C64::new(0.0, 0.0); d * d];
        for i in 0..d {
            for k in 0..d {
                let v = self.data[i * d + k];
                if v.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..d {
                    data[i * d + j] += v * other.data[k * d + j];
                }
            }
        }
        FockOperator { dim: self.dim, modes: self.modes, data }
    }

    pub fn apply_vec(&self, psi: &[C64]) -> Vec<C64> {
        let d = self.d();
        assert_eq!(psi.len(), d);
        let mut out = vec![C64::new(0.0, 0.0); d];
        for i in 0..d {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..d {
                acc += self.data[i * d + j] * psi[j];
            }
            out[i] = acc;
        }
        out
    }

    /// Max-norm of U†U − I over the block where every mode index is below
    /// `retained` levels. Projection damage concentrates near the boundary,
    /// so the interior block is the meaningful unitarity diagnostic.
    pub fn unitarity_defect(&self, retained: usize) -> f64 {
        let d = self.d();
        let n = self.dim;
        let keep = |idx: usize| -> bool {
            match self.modes {
                1 => idx < retained,
                _ => idx / n < retained && idx % n < retained,
            }
        };
        let mut worst = 0.0f64;
        for i in 0..d {
            if !keep(i) {
                continue;
            }
            for j in 0..d {
                if !keep(j) {
                    continue;
                }
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..d {
                    acc += self.data[k * d + i].conj() * self.data[k * d + j];
                }
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((acc - C64::new(want, 0.0)).norm());
            }
        }
        worst
    }
}

/// Density matrix on one or two modes (row-major, same indexing as
/// [`FockOperator`]).
#[derive(Clone, Debug)]
pub struct FockDensity {
    pub dim: usize,
    pub modes: u8,
    pub data: Vec<C64>,
}

impl FockDensity {
    pub fn d(&self) -> usize {
        self.dim.pow(self.modes as u32)
    }

    pub fn vacuum(dim: usize, modes: u8) -> Self {
        let d = dim.pow(modes as u32);
        let mut data = vec![C64::new(0.0, 0.0); d * d];
        data[0] = C64::new(1.0, 0.0);
        FockDensity { dim, modes, data }
    }

    pub fn from_pure(psi: &[C64], dim: usize, modes: u8) -> Self {
        let d = dim.pow(modes as u32);
        assert_eq!(psi.len(), d);
        let mut data = vec![C64::new(0.0, 0.0); d * d];
        for i in 0..d {
            for j in 0..d {
                data[i * d + j] = psi[i] * psi[j].conj();
            }
        }
        FockDensity { dim, modes, data }
    }

    /// Single-mode density for one of the supported input states.
    pub fn single_mode(state: &ModeState, dim: usize) -> Result<Self, FockError> {
        if dim < 4 {
            return Err(FockError::Invalid("dimension below 4"));
        }
        match *state {
            ModeState::Vacuum => Ok(Self::vacuum(dim, 1)),
            ModeState::Squeezed { r } => {
                let psi = squeezed_vacuum_ket(r, dim);
                Ok(Self::from_pure(&psi, dim, 1))
            }
            ModeState::Thermal { nbar } => {
                if nbar < 0.0 {
                    return Err(FockError::Invalid("thermal occupation negative"));
                }
                Ok(Self::thermal(nbar, dim))
            }
            ModeState::SqueezedThermal { nbar, s } => {
                if nbar < 0.0 || s <= 0.0 {
                    return Err(FockError::Invalid("squeezed-thermal parameters out of range"));
                }
                // Position variance (2n̄+1)·S means squeezing r = −ln(S)/2
                // applied to a thermal state.
                let r = -0.5 * s.ln();
                let sq = squeeze_operator(r, dim);
                let mut rho = Self::thermal(nbar, dim);
                rho.apply_unitary(&sq);
                Ok(rho)
            }
        }
    }

    fn thermal(nbar: f64, dim: usize) -> Self {
        let mut data = vec![C64::new(0.0, 0.0); dim * dim];
        if nbar <= 0.0 {
            data[0] = C64::new(1.0, 0.0);
            return FockDensity { dim, modes: 1, data };
        }
        let ratio = nbar / (nbar + 1.0);
        let mut p = 1.0 / (nbar + 1.0);
        let mut total = 0.0;
        let mut probs = vec![0.0; dim];
        for q in probs.iter_mut() {
            *q = p;
            total += p;
            p *= ratio;
        }
        for n in 0..dim {
            data[n * dim + n] = C64::new(probs[n] / total, 0.0);
        }
        FockDensity { dim, modes: 1, data }
    }

    /// Two-mode product state; `self` becomes the major (target) mode.
    pub fn product(target: &FockDensity, source: &FockDensity) -> Result<Self, FockError> {
        if target.modes != 1 || source.modes != 1 || target.dim != source.dim {
            return Err(FockError::Invalid("product requires two single-mode states of equal dimension"));
        }
        let n = target.dim;
        let d = n * n;
        let mut data = vec![C64::new(0.0, 0.0); d * d];
        for i0 in 0..n {
            for j0 in 0..n {
                let t = target.data[i0 * n + j0];
                if t.norm_sqr() == 0.0 {
                    continue;
                }
                for i1 in 0..n {
                    for j1 in 0..n {
                        data[(i0 * n + i1) * d + (j0 * n + j1)] = t * source.data[i1 * n + j1];
                    }
                }
            }
        }
        Ok(FockDensity { dim: n, modes: 2, data })
    }

    pub fn trace(&self) -> f64 {
        let d = self.d();
        (0..d).map(|i| self.data[i * d + i].re).sum()
    }

    pub fn purity(&self) -> f64 {
        let d = self.d();
        let mut acc = 0.0;
        for i in 0..d {
            for j in 0..d {
                acc += (self.data[i * d + j] * self.data[j * d + i]).re;
            }
        }
        acc
    }

    pub fn hermitize(&mut self) {
        let d = self.d();
        for i in 0..d {
            let di = i * d + i;
            self.data[di] = C64::new(self.data[di].re, 0.0);
            for j in i + 1..d {
                let avg = 0.5 * (self.data[i * d + j] + self.data[j * d + i].conj());
                self.data[i * d + j] = avg;
                self.data[j * d + i] = avg.conj();
            }
        }
    }

    pub fn renormalize(&mut self) {
        let t = self.trace();
        if t > 0.0 {
            let s = 1.0 / t;
            for v in &mut self.data {
                *v *= s;
            }
        }
    }

    /// Reduced state of one mode of a two-mode density.
    pub fn partial_trace(&self, keep: usize) -> Result<FockDensity, FockError> {
        if self.modes != 2 || keep > 1 {
            return Err(FockError::Invalid("partial trace needs a two-mode state and keep in {0, 1}"));
        }
        let n = self.dim;
        let d = n * n;
        let mut data = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..n {
                    let (r, c) = if keep == 0 { (i * n + k, j * n + k) } else { (k * n + i, k * n + j) };
                    acc += self.data[r * d + c];
                }
                data[i * n + j] = acc;
            }
        }
        Ok(FockDensity { dim: n, modes: 1, data })
    }

    /// Number-basis occupation marginal of one mode.
    pub fn occupation_marginal(&self, mode: usize) -> Vec<f64> {
        let n = self.dim;
        let d = self.d();
        let mut probs = vec![0.0; n];
        match self.modes {
            1 => {
                for (i, p) in probs.iter_mut().enumerate() {
                    *p = self.data[i * d + i].re;
                }
            }
            _ => {
                for i0 in 0..n {
                    for i1 in 0..n {
                        let i = i0 * n + i1;
                        let idx = if mode == 0 { i0 } else { i1 };
                        probs[idx] += self.data[i * d + i].re;
                    }
                }
            }
        }
        probs
    }

    /// Largest per-mode population in the top [`TAIL_LEVELS`] levels.
    pub fn tail_population(&self) -> f64 {
        let n = self.dim;
        let lo = n.saturating_sub(TAIL_LEVELS);
        let mut worst = 0.0f64;
        for mode in 0..self.modes as usize {
            let marg = self.occupation_marginal(mode);
            let tail: f64 = marg[lo..].iter().sum();
            worst = worst.max(tail);
        }
        worst
    }

    /// Trace, Hermiticity and tail checks; spectral positivity is verified
    /// exactly for small matrices where a full eigensolve is affordable.
    pub fn validate(&self, tail_guard: f64) -> Result<(), FockError> {
        let d = self.d();
        if (self.trace() - 1.0).abs() > 1e-8 {
            return Err(FockError::Invalid("trace deviates from 1 by more than 1e-8"));
        }
        for i in 0..d {
            for j in i..d {
                if (self.data[i * d + j] - self.data[j * d + i].conj()).norm() > 1e-8 {
                    return Err(FockError::Invalid("density not Hermitian to 1e-8"));
                }
            }
        }
        let tail = self.tail_population();
        if tail > tail_guard {
            return Err(FockError::TailGuard { population: tail });
        }
        if d <= 128 {
            let eig = hermitian_eigen(&self.data, d);
            if eig.values[0] < -1e-8 {
                return Err(FockError::Invalid("negative eigenvalue beyond 1e-8"));
            }
        }
        Ok(())
    }

    pub fn expectation(&self, op: &CsrMatrix) -> C64 {
        op.expectation(&self.data)
    }

    pub fn fidelity_with_pure(&self, psi: &[C64]) -> f64 {
        let d = self.d();
        assert_eq!(psi.len(), d);
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..d {
            for j in 0..d {
                acc += psi[i].conj() * self.data[i * d + j] * psi[j];
            }
        }
        acc.re
    }

    pub fn mean_occupation(&self, mode: usize) -> f64 {
        self.occupation_marginal(mode)
            .iter()
            .enumerate()
            .map(|(n, p)| n as f64 * p)
            .sum()
    }

    /// ρ ← UρU† followed by trace renormalization (projected unitaries are
    /// slightly trace-decreasing).
    pub fn apply_unitary(&mut self, u: &FockOperator) {
        assert_eq!(u.d(), self.d());
        let d = self.d();
        let mut tmp = vec![C64::new(0.0, 0.0); d * d];
        for i in 0..d {
            for k in 0..d {
                let v = u.data[i * d + k];
                if v.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..d {
                    tmp[i * d + j] += v * self.data[k * d + j];
                }
            }
        }
        let mut out = vec![C64::new(0.0, 0.0); d * d];
        for k in 0..d {
            for j in 0..d {
                let v = u.data[j * d + k].conj();
                if v.norm_sqr() == 0.0 {
                    continue;
                }
                for i in 0..d {
                    out[i * d + j] += tmp[i * d + k] * v;
                }
            }
        }
        self.data = out;
        self.hermitize();
        self.renormalize();
    }

    /// Apply a single-mode unitary to one mode of a two-mode density.
    pub fn apply_unitary_on_mode(&mut self, u: &FockOperator, mode: usize) -> Result<(), FockError> {
        if self.modes != 2 || u.modes != 1 || u.dim != self.dim || mode > 1 {
            return Err(FockError::Invalid("mode-local unitary needs matching dimensions and mode in {0, 1}"));
        }
        let n = self.dim;
        let d = n * n;
        let lift = |i_free: usize, k: usize| -> usize {
            if mode == 0 { k * n + i_free } else { i_free * n + k }
        };
        let mut tmp = vec![C64::new(0.0, 0.0); d * d];
        for free in 0..n {
            for i in 0..n {
                for k in 0..n {
                    let v = u.data[i * n + k];
                    if v.norm_sqr() == 0.0 {
                        continue;
                    }
                    let row_out = lift(free, i) * d;
                    let row_in = lift(free, k) * d;
                    for c in 0..d {
                        tmp[row_out + c] += v * self.data[row_in + c];
                    }
                }
            }
        }
        let mut out = vec![C64::new(0.0, 0.0); d * d];
        for free in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let v = u.data[j * n + k].conj();
                    if v.norm_sqr() == 0.0 {
                        continue;
                    }
                    let col_out = lift(free, j);
                    let col_in = lift(free, k);
                    for r in 0..d {
                        out[r * d + col_out] += tmp[r * d + col_in] * v;
                    }
                }
            }
        }
        self.data = out;
        self.hermitize();
        self.renormalize();
        Ok(())
    }

    /// Means and symmetrized covariance of (X, Y, q, p): target-mode
    /// quadratures first, source-mode quadratures second.
    pub fn quadrature_moments(&self) -> Result<QuadMoments, FockError> {
        if self.modes != 2 {
            return Err(FockError::Invalid("quadrature moments need a two-mode state"));
        }
        let n = self.dim;
        let id = CsrMatrix::identity(n);
        let ops = [
            CsrMatrix::position(n).kron(&id),
            CsrMatrix::momentum(n).kron(&id),
            id.kron(&CsrMatrix::position(n)),
            id.kron(&CsrMatrix::momentum(n)),
        ];
        let mut mean = [0.0f64; 4];
        for (m, op) in mean.iter_mut().zip(ops.iter()) {
            *m = self.expectation(op).re;
        }
        let mut cov = [[0.0f64; 4]; 4];
        for i in 0..4 {
            for j in i..4 {
                let prod_ij = ops[i].matmul(&ops[j]);
                let prod_ji = ops[j].matmul(&ops[i]);
                let sym = 0.5 * (self.expectation(&prod_ij).re + self.expectation(&prod_ji).re);
                let c = sym - mean[i] * mean[j];
                cov[i][j] = c;
                cov[j][i] = c;
            }
        }
        Ok(QuadMoments { mean, cov })
    }

    /// Single-mode quadrature means and covariance.
    pub fn quadrature_moments_single(&self, mode: usize) -> Result<([f64; 2], [[f64; 2]; 2]), FockError> {
        let rho = match self.modes {
            1 => self.clone(),
            2 => self.partial_trace(mode)?,
            _ => return Err(FockError::Invalid("unsupported mode count")),
        };
        let n = rho.dim;
        let ops = [CsrMatrix::position(n), CsrMatrix::momentum(n)];
        let mut mean = [0.0f64; 2];
        for (m, op) in mean.iter_mut().zip(ops.iter()) {
            *m = rho.expectation(op).re;
        }
        let mut cov = [[0.0f64; 2]; 2];
        for i in 0..2 {
            for j in i..2 {
                let pij = ops[i].matmul(&ops[j]);
                let pji = ops[j].matmul(&ops[i]);
                let sym = 0.5 * (rho.expectation(&pij).re + rho.expectation(&pji).re);
                let c = sym - mean[i] * mean[j];
                cov[i][j] = c;
                cov[j][i] = c;
            }
        }
        Ok((mean, cov))
    }

    /// Nonlinear-variance parabola σ(λ) = Var(Ŷ + λX̂^{n−1}) for one mode,
    /// with the cross term taken in symmetrized (Weyl) order. For the
    /// quadratic and cubic orders used here the symmetrized moments agree
    /// exactly with the classical moments of the moment engine.
    pub fn nlv_parabola(&self, mode: usize, order: u32) -> Result<NlvParabola, FockError> {
        if order < 2 {
            return Err(FockError::Invalid("nonlinearity order below 2"));
        }
        let rho = match self.modes {
            1 => self.clone(),
            2 => self.partial_trace(mode)?,
            _ => return Err(FockError::Invalid("unsupported mode count")),
        };
        let n = rho.dim;
        let x = CsrMatrix::position(n);
        let y = CsrMatrix::momentum(n);
        let mut w = CsrMatrix::identity(n);
        for _ in 0..order - 1 {
            w = w.matmul(&x);
        }
        let my = rho.expectation(&y).re;
        let mw = rho.expectation(&w).re;
        let y2 = rho.expectation(&y.matmul(&y)).re;
        let w2 = rho.expectation(&w.matmul(&w)).re;
        let yw = rho.expectation(&y.matmul(&w)).re;
        let wy = rho.expectation(&w.matmul(&y)).re;
        Ok(NlvParabola {
            c0: y2 - my * my,
            c1: (yw + wy) - 2.0 * my * mw,
            c2: w2 - mw * mw,
        })
    }
}

/// Squeezed-vacuum amplitudes c_{2n} = (−tanh r)ⁿ √((2n)!)/(2ⁿ n!) / √cosh r,
/// renormalized over the truncated basis; positive r squeezes position.
pub fn squeezed_vacuum_ket(r: f64, dim: usize) -> Vec<C64> {
    let mut psi = vec![C64::new(0.0, 0.0); dim];
    let t = r.tanh();
    // Iterate c_{2(n+1)}/c_{2n} = −t·√((2n+1)(2n+2))/(2(n+1)) to avoid
    // factorial overflow.
    let mut c = 1.0 / r.cosh().sqrt();
    let mut n = 0usize;
    while 2 * n < dim {
        psi[2 * n] = C64::new(c, 0.0);
        let k = n as f64;
        c *= -t * ((2.0 * k + 1.0) * (2.0 * k + 2.0)).sqrt() / (2.0 * (k + 1.0));
        n += 1;
    }
    let norm: f64 = psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for a in &mut psi {
        *a /= norm;
    }
    psi
}

/// Coherent-state ket with real displacement ⟨X̂⟩ = 2α.
pub fn coherent_ket(alpha: f64, dim: usize) -> Vec<C64> {
    let mut psi = vec![C64::new(0.0, 0.0); dim];
    let mut c = (-0.5 * alpha * alpha).exp();
    for (n, a) in psi.iter_mut().enumerate() {
        *a = C64::new(c, 0.0);
        c *= alpha / ((n as f64 + 1.0).sqrt());
    }
    let norm: f64 = psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for a in &mut psi {
        *a /= norm;
    }
    psi
}

/// S(r) = exp((r/2)(â² − â†²)) via eigendecomposition of the Hermitian
/// generator; S|0⟩ has position variance e^{−2r}.
pub fn squeeze_operator(r: f64, dim: usize) -> FockOperator {
    let a = CsrMatrix::annihilation(dim);
    let a2 = a.matmul(&a);
    let gen = a2.add_scaled(&a2.dagger(), C64::new(-1.0, 0.0));
    // K = i(r/2)(â² − â†²) is Hermitian and S = e^{−iK}.
    let k = gen.scale(C64::new(0.0, 0.5 * r)).to_dense();
    let eig = hermitian_eigen(&k, dim);
    FockOperator { dim, modes: 1, data: phase_conjugate(&eig.vectors, &eig.values, dim, 1.0) }
}

/// V · diag(e^{−i·scale·d}) · V† for a row-major eigenvector matrix.
fn phase_conjugate(v: &[C64], d: &[f64], n: usize, scale: f64) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); n * n];
    for k in 0..n {
        let phase = C64::new(0.0, -scale * d[k]).exp();
        for i in 0..n {
            let left = v[i * n + k] * phase;
            for j in 0..n {
                out[i * n + j] += left * v[j * n + k].conj();
            }
        }
    }
    out
}

/// Pulsed QND gate unitary on (target, source).
///
/// `Qy` realizes X ← X + g·q, p ← p − g·Y; `Px` realizes Y ← Y − g·p,
/// q ← q + g·X. Built exactly from the eigenbases of the two commuting
/// quadrature factors, then verified against the moment engine's linear
/// action on the two-mode vacuum.
pub fn build_qnd_unitary(g: f64, gate: GateType, dim: usize) -> Result<FockOperator, FockError> {
    if dim < 4 {
        return Err(FockError::Invalid("dimension below 4"));
    }
    if !g.is_finite() {
        return Err(FockError::Invalid("gain not finite"));
    }
    let (target_quad, source_quad) = match gate {
        GateType::Qy => (CsrMatrix::momentum(dim), CsrMatrix::position(dim)),
        GateType::Px => (CsrMatrix::position(dim), CsrMatrix::momentum(dim)),
    };
    let e0 = hermitian_eigen(&target_quad.to_dense(), dim);
    let e1 = hermitian_eigen(&source_quad.to_dense(), dim);
    let d = dim * dim;
    let mut u = vec![C64::new(0.0, 0.0); d * d];
    let mut t = vec![C64::new(0.0, 0.0); dim * dim];
    for k0 in 0..dim {
        // T_{k0} = V1 · diag(e^{−i(g/2)·d0[k0]·d1}) · V1†.
        for v in t.iter_mut() {
            *v = C64::new(0.0, 0.0);
        }
        for k1 in 0..dim {
            let phase = C64::new(0.0, -0.5 * g * e0.values[k0] * e1.values[k1]).exp();
            for i1 in 0..dim {
                let left = e1.vectors[i1 * dim + k1] * phase;
                for j1 in 0..dim {
                    t[i1 * dim + j1] += left * e1.vectors[j1 * dim + k1].conj();
                }
            }
        }
        for i0 in 0..dim {
            let vi = e0.vectors[i0 * dim + k0];
            if vi.norm_sqr() < 1e-60 {
                continue;
            }
            for j0 in 0..dim {
                let w = vi * e0.vectors[j0 * dim + k0].conj();
                let base_r = i0 * dim;
                let base_c = j0 * dim;
                for i1 in 0..dim {
                    let row = (base_r + i1) * d + base_c;
                    let trow = i1 * dim;
                    for j1 in 0..dim {
                        u[row + j1] += w * t[trow + j1];
                    }
                }
            }
        }
    }
    let op = FockOperator { dim, modes: 2, data: u };
    check_qnd_action(&op, g, gate, dim)?;
    Ok(op)
}

/// Compare the gate's action on the two-mode vacuum with the moment engine's
/// exact linear map; failure indicates the basis is too small for this gain.
fn check_qnd_action(u: &FockOperator, g: f64, gate: GateType, dim: usize) -> Result<(), FockError> {
    let d = dim * dim;
    let mut psi = vec![C64::new(0.0, 0.0); d];
    psi[0] = C64::new(1.0, 0.0);
    let psi = u.apply_vec(&psi);

    let mut sym = crate::protocol::SymbolicState::new(ModeState::Vacuum, ModeState::Vacuum, 3)
        .map_err(|_| FockError::Invalid("moment reference construction failed"))?;
    match gate {
        GateType::Qy => sym.apply_qnd_qy(g),
        GateType::Px => sym.apply_qnd_px(g),
    }
    let want = sym.quad_moments();

    let id = CsrMatrix::identity(dim);
    let ops = [
        CsrMatrix::position(dim).kron(&id),
        CsrMatrix::momentum(dim).kron(&id),
        id.kron(&CsrMatrix::position(dim)),
        id.kron(&CsrMatrix::momentum(dim)),
    ];
    let dot = |a: &[C64], b: &[C64]| -> C64 { a.iter().zip(b).map(|(x, y)| x.conj() * y).sum() };
    let mut buf = vec![C64::new(0.0, 0.0); d];
    let mut mean = [0.0f64; 4];
    for (m, op) in mean.iter_mut().zip(ops.iter()) {
        op.apply_vec(&psi, &mut buf);
        *m = dot(&psi, &buf).re;
    }
    let tol = 1e-6 * (1.0 + g * g);
    let mut worst = 0.0f64;
    for i in 0..4 {
        worst = worst.max((mean[i] - want.mean[i]).abs());
    }
    let mut buf2 = vec![C64::new(0.0, 0.0); d];
    for i in 0..4 {
        for j in i..4 {
            ops[j].apply_vec(&psi, &mut buf);
            ops[i].apply_vec(&psi, &mut buf2);
            // ⟨ψ|O_i O_j|ψ⟩ = (O_i ψ)†(O_j ψ) for Hermitian O_i.
            let sym_prod = dot(&buf2, &buf).re;
            let got = sym_prod - mean[i] * mean[j];
            worst = worst.max((got - want.cov[i][j]).abs());
        }
    }
    if worst > tol {
        return Err(FockError::Truncation { check: "qnd action", error: worst });
    }
    Ok(())
}

/// Nonlinear-potential unitary exp(−iγ·X̂ⁿ/(2n)) realizing the momentum kick
/// p ← p − γ·X̂^{n−1} (n = order; the cubic gate is n = 3).
///
/// Exponentiated in the eigenbasis of the truncated Hermitian X̂ⁿ, so the
/// operator is exactly unitary on the retained space; only its action near the
/// truncation boundary deviates from the untruncated gate. The exact
/// Heisenberg shift ⟨p̂⟩ → ⟨p̂⟩ − γ⟨X̂^{n−1}⟩ is verified on a displaced
/// vacuum to 2%.
pub fn build_nonlinear_unitary(gamma: f64, order: u32, dim: usize) -> Result<FockOperator, FockError> {
    if dim < 4 {
        return Err(FockError::Invalid("dimension below 4"));
    }
    if order < 2 {
        return Err(FockError::Invalid("nonlinearity order below 2"));
    }
    if !gamma.is_finite() {
        return Err(FockError::Invalid("nonlinear strength not finite"));
    }
    let q = CsrMatrix::position(dim).to_dense();
    let eig = hermitian_eigen(&q, dim);
    let scale = gamma / (2.0 * order as f64);
    let mut powered = vec![0.0f64; dim];
    for (p, &v) in powered.iter_mut().zip(eig.values.iter()) {
        *p = v.powi(order as i32);
    }
    let data = phase_conjugate(&eig.vectors, &powered, dim, scale);
    let op = FockOperator { dim, modes: 1, data };
    if gamma != 0.0 {
        check_nonlinear_action(&op, gamma, order, dim)?;
    }
    Ok(op)
}

/// Backwards-compatible name for the cubic (order-3) build.
pub fn build_cubic_unitary(gamma: f64, dim: usize) -> Result<FockOperator, FockError> {
    build_nonlinear_unitary(gamma, 3, dim)
}

fn check_nonlinear_action(u: &FockOperator, gamma: f64, order: u32, dim: usize) -> Result<(), FockError> {
    let psi0 = coherent_ket(1.0, dim);
    let x = CsrMatrix::position(dim);
    let y = CsrMatrix::momentum(dim);
    let mut w = CsrMatrix::identity(dim);
    for _ in 0..order - 1 {
        w = w.matmul(&x);
    }
    let dot = |a: &[C64], b: &[C64]| -> C64 { a.iter().zip(b).map(|(p, q)| p.conj() * q).sum() };
    let mut buf = vec![C64::new(0.0, 0.0); dim];
    y.apply_vec(&psi0, &mut buf);
    let p_before = dot(&psi0, &buf).re;
    w.apply_vec(&psi0, &mut buf);
    let w_before = dot(&psi0, &buf).re;

    let mut psi = u.apply_vec(&psi0);
    let norm: f64 = psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if norm < 0.5 {
        return Err(FockError::Truncation { check: "nonlinear norm", error: 1.0 - norm });
    }
    for a in &mut psi {
        *a /= norm;
    }
    y.apply_vec(&psi, &mut buf);
    let p_after = dot(&psi, &buf).re;

    let want_shift = -gamma * w_before;
    let got_shift = p_after - p_before;
    let err = (got_shift - want_shift).abs();
    if err > 0.02 * want_shift.abs() + 1e-12 {
        return Err(FockError::Truncation { check: "nonlinear momentum kick", error: err });
    }
    Ok(())
}

/// Human-readable one-line description of a dimension/guard configuration,
/// used by manifests.
pub fn describe_basis(dim: usize, tail_guard: f64) -> String {
    format!("number basis with {dim} levels per mode, tail guard {tail_guard:.1e}")
}
