//! Minimal CSR complex sparse matrices for number-basis operators.
//!
//! Ladder operators, quadratures and their low-order products have O(1)
//! entries per row, so Lindblad right-hand sides and operator expectations
//! reduce to sparse-times-dense sweeps instead of dense matrix products.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::C64;

#[derive(Clone, Debug)]
pub struct CsrMatrix {
    pub n: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub data: Vec<C64>,
}

impl CsrMatrix {
    pub fn zeros(n: usize) -> Self {
        CsrMatrix {
            n,
            indptr: vec![0; n + 1],
            indices: Vec::new(),
            data: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        CsrMatrix {
            n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            data: vec![C64::new(1.0, 0.0); n],
        }
    }

    /// Build from (row, col, value) triplets; duplicates are summed and
    /// near-zero results dropped.
    pub fn from_triplets(n: usize, triplets: &mut Vec<(usize, usize, C64)>) -> Self {
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0usize; n + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut data: Vec<C64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for &(r, c, v) in triplets.iter() {
            if last == Some((r, c)) {
                *data.last_mut().unwrap() += v;
            } else {
                indices.push(c);
                data.push(v);
                indptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        // Drop dust, then prefix-sum row counts.
        let mut keep_i = Vec::with_capacity(indices.len());
        let mut keep_d = Vec::with_capacity(data.len());
        let mut row_of = vec![0usize; indices.len()];
        {
            let mut r = 0usize;
            let mut seen = 0usize;
            for (k, _) in indices.iter().enumerate() {
                while seen + indptr[r + 1] <= k {
                    seen += indptr[r + 1];
                    r += 1;
                }
                row_of[k] = r;
            }
        }
        let mut counts = vec![0usize; n + 1];
        for k in 0..indices.len() {
            if data[k].norm_sqr() > 1e-60 {
                keep_i.push(indices[k]);
                keep_d.push(data[k]);
                counts[row_of[k] + 1] += 1;
            }
        }
        for r in 0..n {
            counts[r + 1] += counts[r];
        }
        CsrMatrix { n, indptr: counts, indices: keep_i, data: keep_d }
    }

    pub fn diagonal(d: &[f64]) -> Self {
        CsrMatrix {
            n: d.len(),
            indptr: (0..=d.len()).collect(),
            indices: (0..d.len()).collect(),
            data: d.iter().map(|&x| C64::new(x, 0.0)).collect(),
        }
    }

    /// â with ⟨i|â|i+1⟩ = √(i+1).
    pub fn annihilation(n: usize) -> Self {
        let mut t: Vec<(usize, usize, C64)> = (0..n - 1)
            .map(|i| (i, i + 1, C64::new(((i + 1) as f64).sqrt(), 0.0)))
            .collect();
        Self::from_triplets(n, &mut t)
    }

    pub fn creation(n: usize) -> Self {
        Self::annihilation(n).dagger()
    }

    /// X̂ = â + â† (ħ = 2 convention: vacuum variance 1).
    pub fn position(n: usize) -> Self {
        Self::annihilation(n).add_scaled(&Self::creation(n), C64::new(1.0, 0.0))
    }

    /// Ŷ = −i(â − â†).
    pub fn momentum(n: usize) -> Self {
        Self::annihilation(n)
            .scale(C64::new(0.0, -1.0))
            .add_scaled(&Self::creation(n), C64::new(0.0, 1.0))
    }

    pub fn number(n: usize) -> Self {
        Self::diagonal(&(0..n).map(|i| i as f64).collect::<Vec<_>>())
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn dagger(&self) -> Self {
        let mut t: Vec<(usize, usize, C64)> = Vec::with_capacity(self.nnz());
        for r in 0..self.n {
            for k in self.indptr[r]..self.indptr[r + 1] {
                t.push((self.indices[k], r, self.data[k].conj()));
            }
        }
        Self::from_triplets(self.n, &mut t)
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = self.clone();
        for v in &mut out.data {
            *v *= s;
        }
        out
    }

    pub fn add_scaled(&self, other: &Self, s: C64) -> Self {
        assert_eq!(self.n, other.n);
        let mut t: Vec<(usize, usize, C64)> = Vec::with_capacity(self.nnz() + other.nnz());
        for r in 0..self.n {
            for k in self.indptr[r]..self.indptr[r + 1] {
                t.push((r, self.indices[k], self.data[k]));
            }
            for k in other.indptr[r]..other.indptr[r + 1] {
                t.push((r, other.indices[k], other.data[k] * s));
            }
        }
        Self::from_triplets(self.n, &mut t)
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let mut t: Vec<(usize, usize, C64)> = Vec::new();
        for r in 0..self.n {
            for k in self.indptr[r]..self.indptr[r + 1] {
                let mid = self.indices[k];
                let v = self.data[k];
                for k2 in other.indptr[mid]..other.indptr[mid + 1] {
                    t.push((r, other.indices[k2], v * other.data[k2]));
                }
            }
        }
        Self::from_triplets(self.n, &mut t)
    }

    /// self ⊗ other; self acts on the major (first) mode.
    pub fn kron(&self, other: &Self) -> Self {
        let n = self.n * other.n;
        let mut t: Vec<(usize, usize, C64)> = Vec::with_capacity(self.nnz() * other.nnz());
        for r0 in 0..self.n {
            for k0 in self.indptr[r0]..self.indptr[r0 + 1] {
                let (c0, v0) = (self.indices[k0], self.data[k0]);
                for r1 in 0..other.n {
                    for k1 in other.indptr[r1]..other.indptr[r1 + 1] {
                        t.push((
                            r0 * other.n + r1,
                            c0 * other.n + other.indices[k1],
                            v0 * other.data[k1],
                        ));
                    }
                }
            }
        }
        Self::from_triplets(n, &mut t)
    }

    /// out += s·A·ρ for dense row-major ρ (d×d with d = self.n).
    pub fn acc_left(&self, rho: &[C64], out: &mut [C64], s: C64) {
        let d = self.n;
        for i in 0..d {
            for k in self.indptr[i]..self.indptr[i + 1] {
                let v = self.data[k] * s;
                let src = self.indices[k] * d;
                let dst = i * d;
                for j in 0..d {
                    out[dst + j] += v * rho[src + j];
                }
            }
        }
    }

    /// out += s·ρ·A.
    pub fn acc_right(&self, rho: &[C64], out: &mut [C64], s: C64) {
        let d = self.n;
        for k_row in 0..d {
            for k in self.indptr[k_row]..self.indptr[k_row + 1] {
                let j = self.indices[k];
                let v = self.data[k] * s;
                for i in 0..d {
                    out[i * d + j] += rho[i * d + k_row] * v;
                }
            }
        }
    }

    /// tr(ρ·A) = Σ_{k,j} A[k,j]·ρ[j,k].
    pub fn expectation(&self, rho: &[C64]) -> C64 {
        let d = self.n;
        let mut s = C64::new(0.0, 0.0);
        for r in 0..d {
            for k in self.indptr[r]..self.indptr[r + 1] {
                s += self.data[k] * rho[self.indices[k] * d + r];
            }
        }
        s
    }

    pub fn apply_vec(&self, x: &[C64], out: &mut [C64]) {
        for i in 0..self.n {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.indptr[i]..self.indptr[i + 1] {
                acc += self.data[k] * x[self.indices[k]];
            }
            out[i] = acc;
        }
    }

    pub fn to_dense(&self) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.n * self.n];
        for r in 0..self.n {
            for k in self.indptr[r]..self.indptr[r + 1] {
                out[r * self.n + self.indices[k]] = self.data[k];
            }
        }
        out
    }
}
