//! Ground-truth dense symmetric eigensolver (cyclic Jacobi rotations) and the
//! truncated-Fock spin-boson Hamiltonian used to validate every other solver.
//!
//! The oracle is deliberately self-contained: it shares no code with the
//! continued-fraction or transfer-matrix paths it checks.

use ndarray::Array2;

use crate::error::{Result, SolverError};
use crate::spectra::RabiParams;

const MAX_SWEEPS: usize = 100;

/// Dense symmetric matrix, validated at construction.
#[derive(Debug, Clone)]
pub struct DenseSymmetric {
    entries: Array2<f64>,
}

impl DenseSymmetric {
    /// Wrap a square matrix, requiring symmetry to 1e-14 relative to the
    /// largest entry magnitude.
    pub fn new(entries: Array2<f64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() || entries.nrows() == 0 {
            return Err(SolverError::DimensionMismatch {
                expected: entries.nrows(),
                actual: entries.ncols(),
            });
        }
        let scale = entries
            .iter()
            .fold(1.0f64, |acc, x| acc.max(x.abs()));
        let mut asym: f64 = 0.0;
        for i in 0..entries.nrows() {
            for j in (i + 1)..entries.ncols() {
                asym = asym.max((entries[(i, j)] - entries[(j, i)]).abs());
            }
        }
        if asym > 1e-14 * scale {
            return Err(SolverError::NotSymmetric {
                max_asymmetry: asym,
            });
        }
        Ok(DenseSymmetric { entries })
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &Array2<f64> {
        &self.entries
    }

    pub fn trace(&self) -> f64 {
        (0..self.n()).map(|i| self.entries[(i, i)]).sum()
    }
}

fn frobenius(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn off_diagonal_frobenius(a: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let x = a[i * n + j];
            s += 2.0 * x * x;
        }
    }
    s.sqrt()
}

/// All eigenvalues of a dense symmetric matrix, sorted ascending.
///
/// Cyclic Jacobi sweeps annihilate off-diagonal entries until the
/// off-diagonal Frobenius norm drops below `tol * ||a||_F`; fails with
/// `ConvergenceFailure` after 100 full sweeps. Requesting `tol` below the
/// roundoff floor (~ n*eps) is therefore an error, not a silent loop.
pub fn eig_dense_symmetric(a: &DenseSymmetric, tol: f64) -> Result<Vec<f64>> {
    if tol <= 0.0 {
        return Err(SolverError::InvalidParameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let n = a.n();
    let mut m: Vec<f64> = a.entries.iter().cloned().collect();
    let norm = frobenius(&m);
    let target = tol * norm;
    // entries below the pro-rata budget cannot lift the off-norm above the
    // target even if every one of them survives, so rotating them is wasted
    let skip = target / (n.max(2) as f64);

    for _sweep in 0..MAX_SWEEPS {
        if off_diagonal_frobenius(&m, n) <= target {
            let mut eig: Vec<f64> = (0..n).map(|i| m[i * n + i]).collect();
            eig.sort_by(f64::total_cmp);
            return Ok(eig);
        }
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq.abs() <= skip {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                // Stable rotation angle (Golub & Van Loan).
                let tau = (aqq - app) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // rotate rows p and q in place (contiguous), then mirror into
                // the columns; symmetry makes the strided reads unnecessary
                {
                    let (head, tail) = m.split_at_mut(q * n);
                    let row_p = &mut head[p * n..p * n + n];
                    let row_q = &mut tail[..n];
                    for (ap, aq) in row_p.iter_mut().zip(row_q.iter_mut()) {
                        let akp = *ap;
                        let akq = *aq;
                        *ap = c * akp - s * akq;
                        *aq = s * akp + c * akq;
                    }
                }
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    m[k * n + p] = m[p * n + k];
                    m[k * n + q] = m[q * n + k];
                }
                m[p * n + p] = app - t * apq;
                m[q * n + q] = aqq + t * apq;
                m[p * n + q] = 0.0;
                m[q * n + p] = 0.0;
            }
        }
    }
    Err(SolverError::ConvergenceFailure(format!(
        "Jacobi sweeps exceeded {MAX_SWEEPS} without reaching off-norm {target:e}"
    )))
}

/// Spin-boson Hamiltonian `omega*n + delta/2*sigma_3 + g*sigma_1*(a + a^dag)`
/// in the photon-number basis truncated at `n_photons`.
///
/// Basis ordering is photon-major, spin-minor with spin-down first, so the
/// dimension is `2*(n_photons+1)` and the matrix is real symmetric.
pub fn rabi_dense_truncated(p: &RabiParams, n_photons: usize) -> DenseSymmetric {
    let n = 2 * (n_photons + 1);
    let mut h = Array2::zeros((n, n));
    for ph in 0..=n_photons {
        let base = 2 * ph;
        let e = ph as f64 * p.omega;
        h[(base, base)] = e - p.delta / 2.0;
        h[(base + 1, base + 1)] = e + p.delta / 2.0;
        if ph < n_photons {
            // <ph+1| a^dag |ph> = sqrt(ph+1), spin flipped by sigma_1
            let amp = p.g * ((ph + 1) as f64).sqrt();
            h[(base, base + 3)] = amp;
            h[(base + 3, base)] = amp;
            h[(base + 1, base + 2)] = amp;
            h[(base + 2, base + 1)] = amp;
        }
    }
    DenseSymmetric::new(h).expect("truncated spin-boson matrix is symmetric by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Closed-form eigenvalues of a symmetric 3x3 matrix via the
    /// trigonometric solution of the characteristic cubic.
    fn eig3_closed_form(a: &Array2<f64>) -> [f64; 3] {
        let p1 = a[(0, 1)].powi(2) + a[(0, 2)].powi(2) + a[(1, 2)].powi(2);
        let q = (a[(0, 0)] + a[(1, 1)] + a[(2, 2)]) / 3.0;
        let p2 = (a[(0, 0)] - q).powi(2) + (a[(1, 1)] - q).powi(2) + (a[(2, 2)] - q).powi(2)
            + 2.0 * p1;
        let p = (p2 / 6.0).sqrt();
        if p == 0.0 {
            return [q, q, q];
        }
        // r = det((A - qI)/p) / 2, clamped against roundoff
        let b = a - &(Array2::<f64>::eye(3) * q);
        let det_b = b[(0, 0)] * (b[(1, 1)] * b[(2, 2)] - b[(1, 2)] * b[(2, 1)])
            - b[(0, 1)] * (b[(1, 0)] * b[(2, 2)] - b[(1, 2)] * b[(2, 0)])
            + b[(0, 2)] * (b[(1, 0)] * b[(2, 1)] - b[(1, 1)] * b[(2, 0)]);
        let r = (det_b / (p * p * p) / 2.0).clamp(-1.0, 1.0);
        let phi = r.acos() / 3.0;
        let e1 = q + 2.0 * p * phi.cos();
        let e3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
        let e2 = 3.0 * q - e1 - e3;
        let mut out = [e1, e2, e3];
        out.sort_by(f64::total_cmp);
        out
    }

    #[test]
    fn already_diagonal() {
        let a = DenseSymmetric::new(Array2::from_diag(&ndarray::arr1(&[3.0, 1.0, 2.0]))).unwrap();
        let e = eig_dense_symmetric(&a, 1e-14).unwrap();
        assert_eq!(e, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn two_by_two_exchange() {
        let mut m = Array2::zeros((2, 2));
        m[(0, 1)] = 1.0;
        m[(1, 0)] = 1.0;
        let e = eig_dense_symmetric(&DenseSymmetric::new(m).unwrap(), 1e-14).unwrap();
        assert!((e[0] + 1.0).abs() < 1e-14);
        assert!((e[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn random_3x3_matches_cubic_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let mut m = Array2::zeros((3, 3));
            for i in 0..3 {
                for j in i..3 {
                    let v = rng.random_range(-2.0..2.0);
                    m[(i, j)] = v;
                    m[(j, i)] = v;
                }
            }
            let exact = eig3_closed_form(&m);
            let e = eig_dense_symmetric(&DenseSymmetric::new(m).unwrap(), 1e-15).unwrap();
            for (a, b) in e.iter().zip(exact) {
                assert!((a - b).abs() < 1e-10, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn trace_preserved() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for n in [2usize, 5, 17, 40] {
            let mut m = Array2::zeros((n, n));
            for i in 0..n {
                for j in i..n {
                    let v = rng.random_range(-1.0..1.0);
                    m[(i, j)] = v;
                    m[(j, i)] = v;
                }
            }
            let a = DenseSymmetric::new(m).unwrap();
            let tr = a.trace();
            let e = eig_dense_symmetric(&a, 1e-14).unwrap();
            let sum: f64 = e.iter().sum();
            assert!((sum - tr).abs() <= 1e-10 * tr.abs().max(1.0), "n={n}");
        }
    }

    #[test]
    fn similarity_invariance_under_random_rotations() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 12;
        let mut m = Array2::zeros((n, n));
        for i in 0..n {
            for j in i..n {
                let v = rng.random_range(-1.0..1.0);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        let e0 = eig_dense_symmetric(&DenseSymmetric::new(m.clone()).unwrap(), 1e-14).unwrap();
        // conjugate by a product of random Givens rotations
        for _ in 0..3 * n {
            let p = rng.random_range(0..n - 1);
            let q = rng.random_range(p + 1..n);
            let th: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let (c, s) = (th.cos(), th.sin());
            for k in 0..n {
                let (mp, mq) = (m[(k, p)], m[(k, q)]);
                m[(k, p)] = c * mp - s * mq;
                m[(k, q)] = s * mp + c * mq;
            }
            for k in 0..n {
                let (mp, mq) = (m[(p, k)], m[(q, k)]);
                m[(p, k)] = c * mp - s * mq;
                m[(q, k)] = s * mp + c * mq;
            }
        }
        // re-symmetrize roundoff before wrapping
        let mt = m.t().to_owned();
        m = (&m + &mt) * 0.5;
        let e1 = eig_dense_symmetric(&DenseSymmetric::new(m).unwrap(), 1e-14).unwrap();
        for (a, b) in e0.iter().zip(&e1) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_asymmetric_input() {
        let mut m = Array2::zeros((2, 2));
        m[(0, 1)] = 1.0;
        m[(1, 0)] = 1.0 + 1e-6;
        assert!(matches!(
            DenseSymmetric::new(m),
            Err(SolverError::NotSymmetric { .. })
        ));
    }

    #[test]
    fn rabi_matrix_decoupled() {
        let p = RabiParams::new(1.0, 0.5, 0.0, 2, 1e-10).unwrap();
        let h = rabi_dense_truncated(&p, 1);
        let e = eig_dense_symmetric(&h, 1e-14).unwrap();
        let expected = [-0.25, 0.25, 0.75, 1.25];
        for (a, b) in e.iter().zip(expected) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn rabi_matrix_displaced_oscillator() {
        // delta = 0: lowest eigenvalues approach k*omega - g^2/omega.
        let p = RabiParams::new(1.0, 0.0, 0.6, 4, 1e-10).unwrap();
        let h = rabi_dense_truncated(&p, 80);
        let e = eig_dense_symmetric(&h, 1e-13).unwrap();
        for k in 0..4 {
            let expected = k as f64 - 0.36;
            // doubly degenerate (two spin sectors)
            assert!((e[2 * k] - expected).abs() < 1e-9, "k={k}");
            assert!((e[2 * k + 1] - expected).abs() < 1e-9, "k={k}");
        }
    }

    #[test]
    fn truncation_stability_of_lowest_levels() {
        let p = RabiParams::new(1.0, 0.4, 0.8, 10, 1e-10).unwrap();
        let e1 = eig_dense_symmetric(&rabi_dense_truncated(&p, 60), 1e-13).unwrap();
        let e2 = eig_dense_symmetric(&rabi_dense_truncated(&p, 120), 1e-13).unwrap();
        for k in 0..30 {
            assert!((e1[k] - e2[k]).abs() < 1e-10, "level {k}");
        }
    }
}
