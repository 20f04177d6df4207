//! Headline solvers: parity-split terminating continued fractions for the
//! coupled-spin model (r = 1/2, integer l), and the infinite parity chains of
//! the quantum Rabi model solved under adaptive truncation.
//!
//! Setting the terminating continued fraction
//!
//! ```text
//! S_{m,+-}(z) = m*omega - z -+ (-1)^m delta/2 - b_m^2 / S_{m-1,+-}(z)
//! ```
//!
//! to zero is the same as asking for an eigenvalue of the tridiagonal matrix
//! with diagonal `a_m = m*omega -+ (-1)^m delta/2` and couplings `b_m`, so
//! both chains are solved with the Sturm machinery rather than by chasing
//! poles of the fraction itself.

use crate::error::{Result, SolverError};
use crate::model::{ModelParams, Spin};
use crate::tridiag::{eig_split_report, lowest_eigenvalues, Tridiagonal};

/// Parity sector label: the +/- branch of the split chains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Parity {
    Plus,
    Minus,
}

impl Parity {
    pub const BOTH: [Parity; 2] = [Parity::Plus, Parity::Minus];

    pub fn sign(self) -> f64 {
        match self {
            Parity::Plus => 1.0,
            Parity::Minus => -1.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Parity::Plus => "+",
            Parity::Minus => "-",
        }
    }
}

impl std::fmt::Display for Parity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// One eigenvalue with its parity label.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Level {
    pub value: f64,
    pub parity: Parity,
}

/// Solver bookkeeping attached to a spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveMeta {
    /// Worst final bracket width relative to `max(1, |E|)` (0 for exact
    /// diagonal reads), combined with the last truncation move if any.
    pub tol_achieved: f64,
    /// Final chain length for adaptively truncated solves.
    pub truncation_k: Option<usize>,
    pub bisection_iters_max: usize,
}

/// Sorted eigenvalues with parity labels and the parameters they came from.
#[derive(Debug, Clone)]
pub struct SpectrumResult<P> {
    pub params: P,
    pub eigenvalues: Vec<Level>,
    pub meta: SolveMeta,
}

impl<P> SpectrumResult<P> {
    pub fn values(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|l| l.value).collect()
    }
}

/// Parameters of the quantum Rabi model solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RabiParams {
    pub omega: f64,
    pub delta: f64,
    pub g: f64,
    /// How many of the lowest eigenvalues (both parities merged) to report.
    pub levels: usize,
    /// Truncation stabilization tolerance.
    pub tol: f64,
}

impl RabiParams {
    pub fn new(omega: f64, delta: f64, g: f64, levels: usize, tol: f64) -> Result<Self> {
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
        if levels == 0 {
            return Err(SolverError::InvalidParameter(
                "levels must be at least 1".into(),
            ));
        }
        if !tol.is_finite() || tol <= 0.0 {
            return Err(SolverError::InvalidParameter(format!(
                "tol must be finite and positive, got {tol}"
            )));
        }
        Ok(RabiParams {
            omega,
            delta,
            g,
            levels,
            tol,
        })
    }
}

fn parity_sign_of_m(m: i64) -> f64 {
    if m.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// The `(2l+1)`-dimensional tridiagonal matrix whose eigenvalues are the
/// zeros of `S_{l,+-}`: diagonal `m*omega -+ (-1)^m delta/2` for
/// `m = -l..l`, couplings `(g/2)*sqrt(l(l+1) - m(m-1))`.
///
/// The half in the coupling is the `R1 = sigma_1/2` matrix element of the
/// `g*L1*R1` term, so the chains describe exactly the assembled matrix of
/// [`crate::model::build_hl_blocks`] for the same `g`.
pub fn hl_parity_tridiagonal(p: &ModelParams, parity: Parity) -> Result<Tridiagonal> {
    if p.r != Spin::HALF {
        return Err(SolverError::UnsupportedSpin(format!(
            "parity-split chains require r = 1/2, got r = {}",
            p.r
        )));
    }
    if !p.l.is_integer() {
        return Err(SolverError::UnsupportedSpin(format!(
            "parity-split chains require integer l ((-1)^m alternation), got l = {}",
            p.l
        )));
    }
    let l = (p.l.twice_j() / 2) as i64;
    let lv = p.l.value();
    let mut a = Vec::with_capacity(p.l.dim());
    let mut b = Vec::with_capacity(p.l.dim() - 1);
    for m in -l..=l {
        a.push(m as f64 * p.omega - parity.sign() * parity_sign_of_m(m) * p.delta / 2.0);
        if m > -l {
            let mf = m as f64;
            b.push(0.5 * p.g * (lv * (lv + 1.0) - mf * (mf - 1.0)).sqrt());
        }
    }
    Tridiagonal::symmetric(a, b)
}

/// Exact spectrum of the finite coupled-spin model: both parity chains are
/// solved and merged, giving `2(2l+1)` labeled eigenvalues.
pub fn hl_spectrum(p: &ModelParams, tol: f64) -> Result<SpectrumResult<ModelParams>> {
    let mut eigenvalues = Vec::with_capacity(2 * p.l.dim());
    let mut meta = SolveMeta {
        tol_achieved: 0.0,
        truncation_k: None,
        bisection_iters_max: 0,
    };
    for parity in Parity::BOTH {
        let chain = hl_parity_tridiagonal(p, parity)?;
        let rep = eig_split_report(&chain, tol)?;
        meta.tol_achieved = meta.tol_achieved.max(rep.max_rel_width);
        meta.bisection_iters_max = meta.bisection_iters_max.max(rep.max_iterations);
        eigenvalues.extend(rep.eigenvalues.into_iter().map(|value| Level { value, parity }));
    }
    eigenvalues.sort_by(|x, y| x.value.total_cmp(&y.value).then(x.parity.cmp(&y.parity)));
    Ok(SpectrumResult {
        params: *p,
        eigenvalues,
        meta,
    })
}

/// Truncated Rabi parity chain: diagonal `k*omega -+ (-1)^k delta/2` and
/// couplings `g*sqrt(k)` for `k = 0..k_max`.
pub fn rabi_parity_tridiagonal(p: &RabiParams, parity: Parity, k_max: usize) -> Tridiagonal {
    let mut a = Vec::with_capacity(k_max + 1);
    let mut b = Vec::with_capacity(k_max);
    for k in 0..=k_max {
        a.push(k as f64 * p.omega - parity.sign() * parity_sign_of_m(k as i64) * p.delta / 2.0);
        if k > 0 {
            b.push(p.g * (k as f64).sqrt());
        }
    }
    Tridiagonal::symmetric(a, b).expect("chain arrays are consistent by construction")
}

/// Maximum truncation size before the adaptive solve gives up.
const K_MAX_LIMIT: usize = 1 << 20;

/// Lowest `levels` eigenvalues of the Rabi model under adaptive truncation.
///
/// Chains start at `k_max = max(64, 4*levels)` and double until the lowest
/// `levels` eigenvalues of both parities move by less than `tol`. Each
/// refinement warm-starts from the previous truncation: the old eigenvalues
/// bound the new ones from above, which shrinks every bisection bracket.
pub fn rabi_spectrum(p: &RabiParams) -> Result<SpectrumResult<RabiParams>> {
    let refine_tol = (p.tol / 16.0).max(1e-15);
    let mut k_max = 64.max(4 * p.levels);
    let mut meta = SolveMeta {
        tol_achieved: 0.0,
        truncation_k: Some(k_max),
        bisection_iters_max: 0,
    };

    let solve_at = |k_max: usize,
                    warm: Option<&[Vec<f64>; 2]>,
                    meta: &mut SolveMeta|
     -> Result<[Vec<f64>; 2]> {
        let mut out: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
        for (i, parity) in Parity::BOTH.into_iter().enumerate() {
            let chain = rabi_parity_tridiagonal(p, parity, k_max);
            let rep = lowest_eigenvalues(
                &chain,
                p.levels,
                refine_tol,
                warm.map(|w| w[i].as_slice()),
            )?;
            meta.tol_achieved = meta.tol_achieved.max(rep.max_rel_width);
            meta.bisection_iters_max = meta.bisection_iters_max.max(rep.max_iterations);
            out[i] = rep.eigenvalues;
        }
        Ok(out)
    };

    let mut prev = solve_at(k_max, None, &mut meta)?;
    loop {
        if k_max * 2 > K_MAX_LIMIT {
            return Err(SolverError::ConvergenceFailure(format!(
                "truncation exceeded {K_MAX_LIMIT} without the lowest {} levels stabilizing to {:e}",
                p.levels, p.tol
            )));
        }
        k_max *= 2;
        let cur = solve_at(k_max, Some(&prev), &mut meta)?;
        let moved = cur
            .iter()
            .flatten()
            .zip(prev.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        prev = cur;
        if moved < p.tol {
            meta.truncation_k = Some(k_max);
            meta.tol_achieved = meta.tol_achieved.max(moved);
            break;
        }
    }

    let [plus, minus] = prev;
    let mut eigenvalues: Vec<Level> = plus
        .into_iter()
        .map(|value| Level {
            value,
            parity: Parity::Plus,
        })
        .chain(minus.into_iter().map(|value| Level {
            value,
            parity: Parity::Minus,
        }))
        .collect();
    eigenvalues.sort_by(|x, y| x.value.total_cmp(&y.value).then(x.parity.cmp(&y.parity)));
    eigenvalues.truncate(p.levels);
    Ok(SpectrumResult {
        params: *p,
        eigenvalues,
        meta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{assemble_dense, build_hl_blocks};
    use crate::oracle::{eig_dense_symmetric, rabi_dense_truncated, DenseSymmetric};
    use crate::tridiag::bracket_and_refine;

    fn hl_oracle(p: &ModelParams) -> Vec<f64> {
        let h = assemble_dense(&build_hl_blocks(p));
        eig_dense_symmetric(&DenseSymmetric::new(h).unwrap(), 1e-14).unwrap()
    }

    #[test]
    fn parity_chain_diagonal_example() {
        // omega=1, delta=0.5, l=1, g=0, parity +: diagonal (-0.75, -0.25, 1.25)
        let p = ModelParams::new(1.0, 0.5, 0.0, Spin::integer(1), Spin::HALF).unwrap();
        let t = hl_parity_tridiagonal(&p, Parity::Plus).unwrap();
        assert_eq!(t.diagonal(), &[-0.75, -0.25, 1.25]);
        assert_eq!(t.superdiagonal(), &[0.0, 0.0]);
        let t = hl_parity_tridiagonal(&p, Parity::Minus).unwrap();
        assert_eq!(t.diagonal(), &[-1.25, 0.25, 0.75]);
    }

    #[test]
    fn decoupled_union_is_m_omega_plus_minus_half_delta() {
        let p = ModelParams::new(1.0, 0.5, 0.0, Spin::integer(2), Spin::HALF).unwrap();
        let s = hl_spectrum(&p, 1e-12).unwrap();
        let mut expected: Vec<f64> = Vec::new();
        for m in -2..=2 {
            expected.push(m as f64 - 0.25);
            expected.push(m as f64 + 0.25);
        }
        expected.sort_by(f64::total_cmp);
        assert_eq!(s.eigenvalues.len(), 10);
        for (lvl, e) in s.eigenvalues.iter().zip(expected) {
            assert_eq!(lvl.value, e);
        }
    }

    #[test]
    fn hl_union_matches_oracle() {
        let p = ModelParams::new(1.0, 0.5, 0.3, Spin::integer(3), Spin::HALF).unwrap();
        let s = hl_spectrum(&p, 1e-12).unwrap();
        assert_eq!(s.eigenvalues.len(), 14);
        let oracle = hl_oracle(&p);
        for (lvl, e) in s.eigenvalues.iter().zip(oracle) {
            assert!((lvl.value - e).abs() < 1e-10, "{} vs {e}", lvl.value);
        }
        // per-parity counts
        let plus = s.eigenvalues.iter().filter(|l| l.parity == Parity::Plus).count();
        assert_eq!(plus, 7);
    }

    #[test]
    fn delta_zero_gives_degenerate_pairs() {
        let p = ModelParams::new(1.0, 0.0, 0.4, Spin::integer(5), Spin::HALF).unwrap();
        let s = hl_spectrum(&p, 1e-12).unwrap();
        let v = s.values();
        let oracle = hl_oracle(&p);
        for (a, b) in v.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-10);
        }
        for pair in v.chunks(2) {
            assert!((pair[0] - pair[1]).abs() < 1e-10, "{pair:?}");
        }
    }

    #[test]
    fn unsupported_spins_rejected() {
        let p = ModelParams::new(1.0, 0.5, 0.3, Spin::from_twice_j(3), Spin::HALF).unwrap();
        assert!(matches!(
            hl_parity_tridiagonal(&p, Parity::Plus),
            Err(SolverError::UnsupportedSpin(_))
        ));
        let p = ModelParams::new(1.0, 0.5, 0.3, Spin::integer(2), Spin::integer(1)).unwrap();
        assert!(matches!(
            hl_spectrum(&p, 1e-10),
            Err(SolverError::UnsupportedSpin(_))
        ));
    }

    #[test]
    fn rabi_chain_structure() {
        let p = RabiParams::new(1.0, 0.4, 0.7, 5, 1e-8).unwrap();
        let t = rabi_parity_tridiagonal(&p, Parity::Plus, 6);
        assert_eq!(t.dim(), 7);
        // a_k = k - (-1)^k * 0.2
        assert_eq!(t.diagonal()[0], -0.2);
        assert_eq!(t.diagonal()[1], 1.2);
        assert_eq!(t.diagonal()[2], 1.8);
        for k in 1..=6usize {
            assert!((t.superdiagonal()[k - 1] - 0.7 * (k as f64).sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn rabi_decoupled_closed_form() {
        let p = RabiParams::new(1.0, 0.5, 0.0, 5, 1e-10).unwrap();
        let s = rabi_spectrum(&p).unwrap();
        let expected = [-0.25, 0.25, 0.75, 1.25, 1.75];
        for (lvl, e) in s.eigenvalues.iter().zip(expected) {
            assert_eq!(lvl.value, e);
        }
        assert_eq!(s.meta.truncation_k, Some(128));
    }

    #[test]
    fn rabi_displaced_oscillator_per_parity_and_merged() {
        // delta = 0, g = 0.5: each parity ladder is k*omega - g^2/omega
        let p = RabiParams::new(1.0, 0.0, 0.5, 4, 1e-10).unwrap();
        let chain = rabi_parity_tridiagonal(&p, Parity::Plus, 200);
        let eig = bracket_and_refine(&chain, 1e-12).unwrap();
        for k in 0..4 {
            assert!((eig[k] - (k as f64 - 0.25)).abs() < 1e-10, "k={k}");
        }
        let s = rabi_spectrum(&p).unwrap();
        let expected = [-0.25, -0.25, 0.75, 0.75];
        for (lvl, e) in s.eigenvalues.iter().zip(expected) {
            assert!((lvl.value - e).abs() < 1e-9);
        }
    }

    #[test]
    fn rabi_matches_fock_oracle() {
        let p = RabiParams::new(1.0, 0.4, 0.7, 6, 1e-9).unwrap();
        let s = rabi_spectrum(&p).unwrap();
        // modest oracle cutoff keeps this a unit test; the acceptance suite
        // runs the full 4x margin
        let h = rabi_dense_truncated(&p, 160);
        let oracle = eig_dense_symmetric(&h, 1e-13).unwrap();
        for (lvl, e) in s.eigenvalues.iter().zip(&oracle) {
            assert!((lvl.value - e).abs() < 1e-8, "{} vs {e}", lvl.value);
        }
    }

    #[test]
    fn spectra_invariant_under_g_sign_flip() {
        let pp = ModelParams::new(1.0, 0.6, 0.45, Spin::integer(4), Spin::HALF).unwrap();
        let pm = ModelParams::new(1.0, 0.6, -0.45, Spin::integer(4), Spin::HALF).unwrap();
        let sp = hl_spectrum(&pp, 1e-12).unwrap();
        let sm = hl_spectrum(&pm, 1e-12).unwrap();
        for (a, b) in sp.values().iter().zip(sm.values()) {
            assert!((a - b).abs() < 1e-12);
        }
        let rp = RabiParams::new(1.0, 0.4, 0.6, 6, 1e-10).unwrap();
        let rm = RabiParams::new(1.0, 0.4, -0.6, 6, 1e-10).unwrap();
        let sp = rabi_spectrum(&rp).unwrap();
        let sm = rabi_spectrum(&rm).unwrap();
        for (a, b) in sp.values().iter().zip(sm.values()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn global_shift_covariance() {
        let p = ModelParams::new(1.0, 0.6, 0.45, Spin::integer(3), Spin::HALF).unwrap();
        let shift = 2.75;
        let base = hl_parity_tridiagonal(&p, Parity::Plus).unwrap();
        let shifted = Tridiagonal::symmetric(
            base.diagonal().iter().map(|a| a + shift).collect(),
            base.superdiagonal().to_vec(),
        )
        .unwrap();
        let e0 = bracket_and_refine(&base, 1e-13).unwrap();
        let e1 = bracket_and_refine(&shifted, 1e-13).unwrap();
        for (a, b) in e0.iter().zip(&e1) {
            assert!((a + shift - b).abs() < 1e-11, "{a} {b}");
        }
    }

    #[test]
    fn truncation_moves_shrink_between_doublings() {
        // stronger coupling so successive truncations still move measurably
        let p = RabiParams::new(1.0, 0.4, 2.0, 20, 1e-8).unwrap();
        let mut per_k: Vec<Vec<f64>> = Vec::new();
        for k_max in [32usize, 64, 128] {
            let chain = rabi_parity_tridiagonal(&p, Parity::Plus, k_max);
            let rep = bracket_and_refine(&chain, 1e-13).unwrap();
            per_k.push(rep[..20].to_vec());
        }
        let move1: f64 = per_k[0]
            .iter()
            .zip(&per_k[1])
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let move2: f64 = per_k[1]
            .iter()
            .zip(&per_k[2])
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(move2 < move1, "moves {move1:e} -> {move2:e} did not shrink");
    }

    #[test]
    fn rabi_params_validation() {
        assert!(RabiParams::new(1.0, 0.1, 0.1, 0, 1e-8).is_err());
        assert!(RabiParams::new(1.0, 0.1, 0.1, 3, 0.0).is_err());
        assert!(RabiParams::new(-1.0, 0.1, 0.1, 3, 1e-8).is_err());
    }
}
