//! Angular-momentum operator matrices and the coupled-spin Hamiltonian
//! `H = omega*L3 + delta*R3 + g*L1*R1` in block-tridiagonal and dense form.
//!
//! The basis is `|l,m_l> (x) |r,m_r>` with both azimuthal quantum numbers
//! ascending, so `m = -j` sits in the first row/column.

use ndarray::Array2;

use crate::error::{Result, SolverError};

/// Spin magnitude stored as `2j` so half-integer spins are exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Spin {
    twice_j: u32,
}

impl Spin {
    /// Spin one half.
    pub const HALF: Spin = Spin { twice_j: 1 };

    pub fn from_twice_j(twice_j: u32) -> Self {
        Spin { twice_j }
    }

    /// Integer spin `j`.
    pub fn integer(j: u32) -> Self {
        Spin { twice_j: 2 * j }
    }

    pub fn twice_j(&self) -> u32 {
        self.twice_j
    }

    /// `j` as a float.
    pub fn value(&self) -> f64 {
        f64::from(self.twice_j) / 2.0
    }

    /// Dimension of the representation, `2j + 1`.
    pub fn dim(&self) -> usize {
        self.twice_j as usize + 1
    }

    pub fn is_integer(&self) -> bool {
        self.twice_j % 2 == 0
    }

    /// Azimuthal values `m = -j, -j+1, ..., +j`.
    pub fn azimuthal(&self) -> impl Iterator<Item = f64> + '_ {
        let j = self.value();
        (0..self.dim()).map(move |i| i as f64 - j)
    }
}

impl std::fmt::Display for Spin {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.twice_j / 2)
        } else {
            write!(f, "{}/2", self.twice_j)
        }
    }
}

/// Physical parameters of the coupled-spin model.
///
/// `g` may carry either sign; the spectrum depends on it only through `g^2`
/// (checked by test, not assumed).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub omega: f64,
    pub delta: f64,
    pub g: f64,
    pub l: Spin,
    pub r: Spin,
}

impl ModelParams {
    pub fn new(omega: f64, delta: f64, g: f64, l: Spin, r: Spin) -> Result<Self> {
        if !omega.is_finite() || omega <= 0.0 {
            return Err(SolverError::InvalidParameter(format!(
                "omega must be finite and positive, got {omega}"
            )));
        }
        if !delta.is_finite() || delta < 0.0 {
            return Err(SolverError::InvalidParameter(format!(
                "delta must be finite and non-negative, got {delta}"
            )));
        }
        if !g.is_finite() {
            return Err(SolverError::InvalidParameter(format!(
                "g must be finite, got {g}"
            )));
        }
        Ok(ModelParams {
            omega,
            delta,
            g,
            l,
            r,
        })
    }

    /// Total dimension of the assembled Hamiltonian, `(2l+1)(2r+1)`.
    pub fn dim(&self) -> usize {
        self.l.dim() * self.r.dim()
    }
}

/// Dense matrices of one angular-momentum representation.
///
/// `j1` and `j3` are real. `j2` is purely imaginary in this basis, so only
/// its imaginary part is stored: `j2 = i * j2_imag` with `j2_imag` real
/// antisymmetric. All commutator identities can then be checked in real
/// arithmetic:
///
/// ```text
/// [j1, j2_imag] = j3,   [j2_imag, j3] = j1,   [j3, j1] = -j2_imag,
/// j1^2 - j2_imag^2 + j3^2 = j(j+1) I.
/// ```
#[derive(Debug, Clone)]
pub struct AngularMomentumRep {
    pub j: Spin,
    pub j1: Array2<f64>,
    pub j2_imag: Array2<f64>,
    pub j3: Array2<f64>,
}

impl AngularMomentumRep {
    /// Raising operator `J+ = j1 + i*j2`, real in this basis.
    pub fn j_plus(&self) -> Array2<f64> {
        &self.j1 - &self.j2_imag
    }

    /// Lowering operator `J- = j1 - i*j2`, real in this basis.
    pub fn j_minus(&self) -> Array2<f64> {
        &self.j1 + &self.j2_imag
    }
}

/// Build the spin-`j` matrices with `<j,m+1|J+|j,m> = sqrt(j(j+1) - m(m+1))`.
pub fn angular_momentum_matrices(j: Spin) -> AngularMomentumRep {
    let n = j.dim();
    let jv = j.value();
    let mut j1 = Array2::zeros((n, n));
    let mut j2_imag = Array2::zeros((n, n));
    let mut j3 = Array2::zeros((n, n));
    for (i, m) in j.azimuthal().enumerate() {
        j3[(i, i)] = m;
        if i + 1 < n {
            let s = (jv * (jv + 1.0) - m * (m + 1.0)).sqrt();
            // J+ has s at (i+1, i); J- is its transpose.
            j1[(i + 1, i)] = 0.5 * s;
            j1[(i, i + 1)] = 0.5 * s;
            j2_imag[(i, i + 1)] = 0.5 * s;
            j2_imag[(i + 1, i)] = -0.5 * s;
        }
    }
    AngularMomentumRep { j, j1, j2_imag, j3 }
}

/// Symmetric block-tridiagonal matrix: diagonal blocks `A_k` and
/// off-diagonal blocks `B_k` (one fewer). `B_k` sits above the diagonal,
/// its transpose below.
#[derive(Debug, Clone)]
pub struct BlockTridiagonal {
    diag: Vec<Array2<f64>>,
    offdiag: Vec<Array2<f64>>,
}

impl BlockTridiagonal {
    pub fn new(diag: Vec<Array2<f64>>, offdiag: Vec<Array2<f64>>) -> Result<Self> {
        if diag.is_empty() {
            return Err(SolverError::InvalidParameter(
                "block-tridiagonal matrix needs at least one diagonal block".into(),
            ));
        }
        if offdiag.len() + 1 != diag.len() {
            return Err(SolverError::DimensionMismatch {
                expected: diag.len() - 1,
                actual: offdiag.len(),
            });
        }
        let m = diag[0].nrows();
        for b in diag.iter().chain(offdiag.iter()) {
            if b.nrows() != m || b.ncols() != m {
                return Err(SolverError::DimensionMismatch {
                    expected: m,
                    actual: b.nrows().max(b.ncols()),
                });
            }
        }
        for a in &diag {
            let mut asym: f64 = 0.0;
            let mut scale: f64 = 1.0;
            for i in 0..m {
                for jj in 0..m {
                    asym = asym.max((a[(i, jj)] - a[(jj, i)]).abs());
                    scale = scale.max(a[(i, jj)].abs());
                }
            }
            if asym > 1e-12 * scale {
                return Err(SolverError::NotSymmetric {
                    max_asymmetry: asym,
                });
            }
        }
        Ok(BlockTridiagonal { diag, offdiag })
    }

    pub fn block_dim(&self) -> usize {
        self.diag[0].nrows()
    }

    pub fn n_blocks(&self) -> usize {
        self.diag.len()
    }

    /// Dimension of the assembled dense matrix.
    pub fn dim(&self) -> usize {
        self.block_dim() * self.n_blocks()
    }

    pub fn diag(&self) -> &[Array2<f64>] {
        &self.diag
    }

    pub fn offdiag(&self) -> &[Array2<f64>] {
        &self.offdiag
    }
}

/// Assemble `H` as blocks `A_k = k*omega*I + delta*R3`,
/// `B_k = sqrt(l(l+1) - k(k-1)) * g * R1`, with `k = -l..l` (diagonal) and
/// `k = -l+1..l` (off-diagonal).
pub fn build_hl_blocks(p: &ModelParams) -> BlockTridiagonal {
    let rep = angular_momentum_matrices(p.r);
    let m = p.r.dim();
    let lv = p.l.value();
    let eye = Array2::eye(m);

    let diag = p
        .l
        .azimuthal()
        .map(|k| &eye * (k * p.omega) + &rep.j3 * p.delta)
        .collect();
    let offdiag = p
        .l
        .azimuthal()
        .skip(1)
        .map(|k| {
            let b = (lv * (lv + 1.0) - k * (k - 1.0)).sqrt();
            &rep.j1 * (p.g * b)
        })
        .collect();
    BlockTridiagonal::new(diag, offdiag).expect("H blocks are consistent by construction")
}

/// Place the blocks into a dense `(n_blocks * m)`-dimensional symmetric matrix.
pub fn assemble_dense(b: &BlockTridiagonal) -> Array2<f64> {
    let m = b.block_dim();
    let n = b.dim();
    let mut h = Array2::zeros((n, n));
    for (k, a) in b.diag.iter().enumerate() {
        for i in 0..m {
            for jj in 0..m {
                h[(k * m + i, k * m + jj)] = a[(i, jj)];
            }
        }
    }
    for (k, off) in b.offdiag.iter().enumerate() {
        for i in 0..m {
            for jj in 0..m {
                h[(k * m + i, (k + 1) * m + jj)] = off[(i, jj)];
                h[((k + 1) * m + jj, k * m + i)] = off[(i, jj)];
            }
        }
    }
    h
}

/// Check the selection rule: every matrix element between basis states whose
/// charge labels differ by more than one must vanish (below 1e-14).
///
/// For the assembled coupled-spin Hamiltonian the rule holds with the block
/// charge `q = m_l` (the coupling only connects adjacent `m_l` blocks). With
/// the finer label `q = m_l + m_r` it fails for g != 0: the coupling flips
/// both azimuthal numbers at once, which can change `m_l + m_r` by two.
pub fn verify_selection_rule(h: &Array2<f64>, q_values: &[f64]) -> Result<bool> {
    if h.nrows() != h.ncols() || h.nrows() != q_values.len() {
        return Err(SolverError::DimensionMismatch {
            expected: h.nrows(),
            actual: q_values.len(),
        });
    }
    for (i, qi) in q_values.iter().enumerate() {
        for (jj, qj) in q_values.iter().enumerate() {
            if (qi - qj).abs() > 1.0 + 1e-12 && h[(i, jj)].abs() >= 1e-14 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Block-charge labels for the assembled matrix: every state in block `k`
/// (i.e. with azimuthal number `m_l = k`) gets `q = k`.
pub fn block_charges(l: Spin, r: Spin) -> Vec<f64> {
    let mut q = Vec::with_capacity(l.dim() * r.dim());
    for k in l.azimuthal() {
        for _ in 0..r.dim() {
            q.push(k);
        }
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{eig_dense_symmetric, DenseSymmetric};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn max_abs(a: &Array2<f64>) -> f64 {
        a.iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
    }

    #[test]
    fn spin_half_is_pauli_over_two() {
        let rep = angular_momentum_matrices(Spin::HALF);
        // j1 = sigma_1 / 2, j3 = sigma_3 / 2 with m ascending.
        assert_eq!(rep.j1[(0, 1)], 0.5);
        assert_eq!(rep.j1[(1, 0)], 0.5);
        assert_eq!(rep.j1[(0, 0)], 0.0);
        assert_eq!(rep.j3[(0, 0)], -0.5);
        assert_eq!(rep.j3[(1, 1)], 0.5);
        // j2 = i * j2_imag: sigma_2/2 has imag part -1/2 at (0,1).
        assert_eq!(rep.j2_imag[(0, 1)], 0.5);
        assert_eq!(rep.j2_imag[(1, 0)], -0.5);
    }

    #[test]
    fn spin_zero_is_trivial() {
        let rep = angular_momentum_matrices(Spin::integer(0));
        assert_eq!(rep.j1.dim(), (1, 1));
        assert_eq!(rep.j1[(0, 0)], 0.0);
        assert_eq!(rep.j2_imag[(0, 0)], 0.0);
        assert_eq!(rep.j3[(0, 0)], 0.0);
    }

    #[test]
    fn spin_one_ladder_element() {
        let rep = angular_momentum_matrices(Spin::integer(1));
        assert_eq!(rep.j3[(0, 0)], -1.0);
        assert_eq!(rep.j3[(1, 1)], 0.0);
        assert_eq!(rep.j3[(2, 2)], 1.0);
        // <1,0|J+|1,-1> = sqrt(2)
        let jp = rep.j_plus();
        assert!((jp[(1, 0)] - 2.0f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn commutators_and_casimir_up_to_twice_j_20() {
        for twice_j in 0..=20 {
            let j = Spin::from_twice_j(twice_j);
            let rep = angular_momentum_matrices(j);
            let (j1, w, j3) = (&rep.j1, &rep.j2_imag, &rep.j3);
            // [j1, j2] = i j3  <=>  [j1, w] = j3, and cyclic.
            let c12 = j1.dot(w) - w.dot(j1) - j3;
            let c23 = w.dot(j3) - j3.dot(w) - j1;
            let c31 = j3.dot(j1) - j1.dot(j3) + w;
            assert!(max_abs(&c12) < 1e-13, "2j={twice_j}");
            assert!(max_abs(&c23) < 1e-13, "2j={twice_j}");
            assert!(max_abs(&c31) < 1e-13, "2j={twice_j}");
            let jv = j.value();
            let casimir =
                j1.dot(j1) - w.dot(w) + j3.dot(j3) - &(Array2::<f64>::eye(j.dim()) * (jv * (jv + 1.0)));
            assert!(max_abs(&casimir) < 1e-12, "2j={twice_j}");
        }
    }

    #[test]
    fn hl_blocks_decoupled_diagonal() {
        // omega=1, delta=0.5, g=0, l=1, r=1/2: off-diagonal zero,
        // A_k = diag(k - 0.25, k + 0.25) with m_r ascending.
        let p = ModelParams::new(1.0, 0.5, 0.0, Spin::integer(1), Spin::HALF).unwrap();
        let b = build_hl_blocks(&p);
        assert_eq!(b.n_blocks(), 3);
        for off in b.offdiag() {
            assert_eq!(max_abs(off), 0.0);
        }
        for (i, k) in [-1.0f64, 0.0, 1.0].iter().enumerate() {
            let a = &b.diag()[i];
            assert!((a[(0, 0)] - (k - 0.25)).abs() < 1e-15);
            assert!((a[(1, 1)] - (k + 0.25)).abs() < 1e-15);
            assert_eq!(a[(0, 1)], 0.0);
        }
    }

    #[test]
    fn hl_blocks_coupling_scalars() {
        // l=1, delta=0, g=1: B_0 = B_1 = sqrt(2) * g * sigma_1/2.
        let p = ModelParams::new(1.0, 0.0, 1.0, Spin::integer(1), Spin::HALF).unwrap();
        let b = build_hl_blocks(&p);
        for off in b.offdiag() {
            assert!((off[(0, 1)] - 2.0f64.sqrt() * 0.5).abs() < 1e-15);
            assert!((off[(1, 0)] - 2.0f64.sqrt() * 0.5).abs() < 1e-15);
            assert_eq!(off[(0, 0)], 0.0);
        }

        // l=2, g=0.2: b_k sequence for k=-1..2 is g*(2, sqrt(6), sqrt(6), 2).
        let p = ModelParams::new(1.0, 0.3, 0.2, Spin::integer(2), Spin::HALF).unwrap();
        let b = build_hl_blocks(&p);
        let expected = [2.0, 6.0f64.sqrt(), 6.0f64.sqrt(), 2.0];
        for (off, e) in b.offdiag().iter().zip(expected) {
            // scalar factor recovered from the (0,1) element of g*b_k*sigma_1/2
            assert!((off[(0, 1)] - 0.2 * e * 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn coupling_symmetric_under_k_to_one_minus_k() {
        // l(l+1) - k(k-1) is invariant under k -> 1-k.
        for l in 1..=20u32 {
            let p = ModelParams::new(1.0, 0.1, 0.7, Spin::integer(l), Spin::HALF).unwrap();
            let b = build_hl_blocks(&p);
            let scalars: Vec<f64> = b.offdiag().iter().map(|m| m[(0, 1)]).collect();
            // k = -l+1..l maps to index i = k+l-1; k -> 1-k maps i -> 2l-1-i-1 = len-1-i
            let n = scalars.len();
            for i in 0..n {
                assert_eq!(scalars[i].to_bits(), scalars[n - 1 - i].to_bits(), "l={l} i={i}");
            }
        }
    }

    #[test]
    fn assemble_small_blocks() {
        let one = |v: f64| Array2::from_elem((1, 1), v);
        let b = BlockTridiagonal::new(vec![one(5.0)], vec![]).unwrap();
        assert_eq!(assemble_dense(&b), Array2::from_elem((1, 1), 5.0));

        let b = BlockTridiagonal::new(vec![one(1.0), one(2.0)], vec![one(3.0)]).unwrap();
        let h = assemble_dense(&b);
        assert_eq!(h[(0, 0)], 1.0);
        assert_eq!(h[(1, 1)], 2.0);
        assert_eq!(h[(0, 1)], 3.0);
        assert_eq!(h[(1, 0)], 3.0);
    }

    #[test]
    fn assemble_half_half_closed_form() {
        // l = r = 1/2 block-diagonalizes over {(--),(++)} and {(-+),(+-)}:
        // the 2x2 blocks are [[-(w+-d)/2, g/2],[g/2, (w+-d)/2]] (the coupling
        // element is g/2 since the single off-diagonal block is g*sigma_1/2),
        // so the eigenvalues are +/- sqrt((omega+-delta)^2/4 + g^2/4).
        let (omega, delta, g) = (1.0, 1.0, 1.0);
        let p = ModelParams::new(omega, delta, g, Spin::HALF, Spin::HALF).unwrap();
        let h = assemble_dense(&build_hl_blocks(&p));
        let eig = eig_dense_symmetric(&DenseSymmetric::new(h).unwrap(), 1e-14).unwrap();
        let e1 = ((omega + delta) * (omega + delta) / 4.0 + g * g / 4.0).sqrt();
        let e2 = ((omega - delta) * (omega - delta) / 4.0 + g * g / 4.0).sqrt();
        let mut expected = vec![-e1, -e2, e2, e1];
        expected.sort_by(f64::total_cmp);
        for (a, b) in eig.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn assembled_matrix_symmetric_for_random_params() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let l = Spin::from_twice_j(rng.random_range(1..=8));
            let p = ModelParams::new(
                rng.random_range(0.1..3.0),
                rng.random_range(0.0..3.0),
                rng.random_range(-2.0..2.0),
                l,
                Spin::HALF,
            )
            .unwrap();
            let h = assemble_dense(&build_hl_blocks(&p));
            for i in 0..h.nrows() {
                for j in 0..h.ncols() {
                    assert_eq!(h[(i, j)].to_bits(), h[(j, i)].to_bits());
                }
            }
        }
    }

    #[test]
    fn selection_rule_block_charge_holds() {
        for l in 1..=10u32 {
            let p = ModelParams::new(1.0, 0.4, 0.8, Spin::integer(l), Spin::HALF).unwrap();
            let h = assemble_dense(&build_hl_blocks(&p));
            let q = block_charges(p.l, p.r);
            assert!(verify_selection_rule(&h, &q).unwrap(), "l={l}");
        }
    }

    #[test]
    fn selection_rule_fine_charge_fails_when_coupled() {
        // With q = m_l + m_r the coupling produces |dq| = 2 elements, so the
        // check must report false as soon as g != 0.
        let p = ModelParams::new(1.0, 0.4, 0.8, Spin::integer(2), Spin::HALF).unwrap();
        let h = assemble_dense(&build_hl_blocks(&p));
        let mut q = Vec::new();
        for ml in p.l.azimuthal() {
            for mr in p.r.azimuthal() {
                q.push(ml + mr);
            }
        }
        assert!(!verify_selection_rule(&h, &q).unwrap());

        // ...but holds again once the coupling is switched off.
        let p0 = ModelParams::new(1.0, 0.4, 0.0, Spin::integer(2), Spin::HALF).unwrap();
        let h0 = assemble_dense(&build_hl_blocks(&p0));
        assert!(verify_selection_rule(&h0, &q).unwrap());
    }

    #[test]
    fn selection_rule_counterexample_and_identity() {
        let mut h = Array2::zeros((4, 4));
        h[(0, 3)] = 1.0;
        h[(3, 0)] = 1.0;
        let q = vec![0.0, 1.0, 2.0, 3.0];
        assert!(!verify_selection_rule(&h, &q).unwrap());
        let z = Array2::zeros((4, 4));
        assert!(verify_selection_rule(&z, &q).unwrap());
        assert!(matches!(
            verify_selection_rule(&z, &[0.0, 1.0]),
            Err(SolverError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(0.0, 0.1, 0.1, Spin::integer(1), Spin::HALF).is_err());
        assert!(ModelParams::new(1.0, -0.1, 0.1, Spin::integer(1), Spin::HALF).is_err());
        assert!(ModelParams::new(1.0, 0.1, f64::NAN, Spin::integer(1), Spin::HALF).is_err());
        // negative g is allowed: the spectrum only sees g^2
        assert!(ModelParams::new(1.0, 0.1, -0.5, Spin::integer(1), Spin::HALF).is_ok());
    }
}
