//! Dense Hermitian eigensolver for the small matrices the engines need.
//!
//! Everything eigendecomposed here is at most a single-mode operator
//! (≲ 64×64) or a covariance matrix over the registered protocol variables,
//! so a cyclic Jacobi iteration is accurate, dependency-free and fast enough.
//! Eigenvalues are returned ascending with matching eigenvector columns,
//! which keeps every downstream computation deterministic.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex;
#[allow(unused_imports)]
use num_traits::Float;

pub type C64 = Complex<f64>;

/// Result of [`hermitian_eigen`]: `values[j]` belongs to the eigenvector in
/// column j of the row-major unitary `vectors` (A = V·diag(values)·V†).
pub struct HermEigen {
    pub n: usize,
    pub values: Vec<f64>,
    pub vectors: Vec<C64>,
}

impl HermEigen {
    /// Reconstruction residual max |(V D V†)ᵢⱼ − Aᵢⱼ|, for diagnostics.
    pub fn residual(&self, a: &[C64]) -> f64 {
        let n = self.n;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let mut s = C64::new(0.0, 0.0);
                for k in 0..n {
                    s += self.vectors[i * n + k]
                        * self.values[k]
                        * self.vectors[j * n + k].conj();
                }
                worst = worst.max((s - a[i * n + j]).norm());
            }
        }
        worst
    }
}

/// Eigendecomposition of a Hermitian matrix given row-major.  Only the lower
/// triangle is trusted; the strict upper triangle is rebuilt by conjugation.
pub fn hermitian_eigen(a: &[C64], n: usize) -> HermEigen {
    assert_eq!(a.len(), n * n, "matrix shape");
    let mut m = a.to_vec();
    for i in 0..n {
        m[i * n + i] = C64::new(m[i * n + i].re, 0.0);
        for j in 0..i {
            m[j * n + i] = m[i * n + j].conj();
        }
    }
    let mut v = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n {
        v[i * n + i] = C64::new(1.0, 0.0);
    }

    let norm: f64 = m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm > 0.0 {
        let tol = 1e-14 * norm;
        for _sweep in 0..64 {
            let mut off = 0.0f64;
            for p in 0..n {
                for q in (p + 1)..n {
                    off += m[p * n + q].norm_sqr();
                }
            }
            if off.sqrt() <= tol {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = m[p * n + q];
                    let r = apq.norm();
                    if r <= tol * 1e-2 {
                        continue;
                    }
                    let phase = apq / r;
                    let app = m[p * n + p].re;
                    let aqq = m[q * n + q].re;
                    let theta = (aqq - app) / (2.0 * r);
                    let t = if theta >= 0.0 {
                        1.0 / (theta + (1.0 + theta * theta).sqrt())
                    } else {
                        -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    // Columns p, q of M and V pick up J; rows of M pick up J†.
                    for k in 0..n {
                        let mkp = m[k * n + p];
                        let mkq = m[k * n + q];
                        m[k * n + p] = mkp * c - mkq * s * phase.conj();
                        m[k * n + q] = mkp * s * phase + mkq * c;
                        let vkp = v[k * n + p];
                        let vkq = v[k * n + q];
                        v[k * n + p] = vkp * c - vkq * s * phase.conj();
                        v[k * n + q] = vkp * s * phase + vkq * c;
                    }
                    for k in 0..n {
                        let mpk = m[p * n + k];
                        let mqk = m[q * n + k];
                        m[p * n + k] = mpk * c - mqk * s * phase;
                        m[q * n + k] = mpk * s * phase.conj() + mqk * c;
                    }
                    m[p * n + q] = C64::new(0.0, 0.0);
                    m[q * n + p] = C64::new(0.0, 0.0);
                    m[p * n + p] = C64::new(m[p * n + p].re, 0.0);
                    m[q * n + q] = C64::new(m[q * n + q].re, 0.0);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| m[i * n + i].re).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let mut vectors = vec![C64::new(0.0, 0.0); n * n];
    for (col, &src) in order.iter().enumerate() {
        for row in 0..n {
            vectors[row * n + col] = v[row * n + src];
        }
    }
    HermEigen { n, values, vectors }
}

/// Real-symmetric convenience wrapper; eigenvector columns are real.
pub fn sym_eigen(a: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let ac: Vec<C64> = a.iter().map(|&x| C64::new(x, 0.0)).collect();
    let e = hermitian_eigen(&ac, n);
    let vecs = e.vectors.iter().map(|z| z.re).collect();
    (e.values, vecs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn two_by_two_symmetric() {
        let a = [2.0, 1.0, 1.0, 2.0];
        let (vals, vecs) = sym_eigen(&a, 2);
        assert_relative_eq!(vals[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(vals[1], 3.0, epsilon = 1e-12);
        // Eigenvector of 3 is (1,1)/√2 up to sign.
        assert_relative_eq!((vecs[0 * 2 + 1] / vecs[1 * 2 + 1]).abs(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn pauli_like_hermitian() {
        // [[1, i], [-i, 1]] has eigenvalues 0 and 2.
        let a = [
            C64::new(1.0, 0.0),
            C64::new(0.0, 1.0),
            C64::new(0.0, -1.0),
            C64::new(1.0, 0.0),
        ];
        let e = hermitian_eigen(&a, 2);
        assert_relative_eq!(e.values[0], 0.0, epsilon = 1e-12);
        assert_relative_eq!(e.values[1], 2.0, epsilon = 1e-12);
        assert!(e.residual(&a) < 1e-12);
    }

    #[test]
    fn reconstructs_structured_hermitian() {
        let n = 24;
        let mut a = alloc::vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..=i {
                let re = libm::sin(1.0 + (i * 3 + j) as f64);
                let im = if i == j { 0.0 } else { libm::cos(0.5 + (i + 7 * j) as f64) };
                a[i * n + j] = C64::new(re, im);
                a[j * n + i] = C64::new(re, -im);
            }
        }
        let e = hermitian_eigen(&a, n);
        assert!(e.residual(&a) < 1e-10, "residual {}", e.residual(&a));
        // V†V = I
        for i in 0..n {
            for j in 0..n {
                let mut s = C64::new(0.0, 0.0);
                for k in 0..n {
                    s += e.vectors[k * n + i].conj() * e.vectors[k * n + j];
                }
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((s - want).norm() < 1e-11);
            }
        }
        // Ascending order.
        for w in e.values.windows(2) {
            assert!(w[0] <= w[1] + 1e-12);
        }
    }
}
