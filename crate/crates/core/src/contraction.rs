//! Numerical verification of the large-spin contraction: rescaled ladder
//! operators `h+- = c J+-` with `c = 1/sqrt(2l)` acquire bosonic matrix
//! elements and commutators as `l` grows, and the finite coupled-spin spectra
//! (with coupling `g/sqrt(2l)` and energy shift `+l*omega`) converge to the
//! Rabi spectrum.
//!
//! The state with `m = -l` plays the role of the vacuum, so the boson number
//! is `n = m + l` and the shifted chain diagonal `(m + l)*omega` becomes
//! `n*omega` term by term.

use crate::error::{Result, SolverError};
use crate::model::{angular_momentum_matrices, ModelParams, Spin};
use crate::spectra::{hl_spectrum, rabi_spectrum, RabiParams};

/// The rescalings tying a finite spin `l` to a target Rabi model:
/// `c = 1/sqrt(2l)` (so `2 l c^2 = 1`), coupling `g_l = 2g/sqrt(2l)`, and
/// energy shift `+l*omega` that maps `m = -l` to the vacuum.
///
/// The factor 2 in `g_l` converts between the coupling conventions of the
/// two Hamiltonians: the finite model couples through `R1 = sigma_1/2`, the
/// Rabi model through the full `sigma_1`. With this map the finite chain
/// couplings obey `b_n^2 = g^2 n (2l+1-n) / (2l) -> g^2 n` term by term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContractionScheme {
    pub l: Spin,
    pub c: f64,
    pub g_rabi: f64,
    pub g_l: f64,
    pub energy_shift: f64,
}

impl ContractionScheme {
    pub fn new(l: Spin, g_rabi: f64, omega: f64) -> Result<Self> {
        if l.twice_j() == 0 {
            return Err(SolverError::UnsupportedSpin(
                "contraction needs l > 0".into(),
            ));
        }
        let two_l = 2.0 * l.value();
        Ok(ContractionScheme {
            l,
            c: 1.0 / two_l.sqrt(),
            g_rabi,
            g_l: 2.0 * g_rabi / two_l.sqrt(),
            energy_shift: l.value() * omega,
        })
    }
}

/// Max over `n = 0..n_max` of the deviation of the contracted ladder element
/// `sqrt((1 - n/(2l))(n+1))` from the bosonic `sqrt(n+1)`.
pub fn ladder_element_error(l: Spin, n_max: usize) -> f64 {
    let two_l = 2.0 * l.value();
    assert!(
        (n_max as f64) < two_l,
        "n_max = {n_max} must stay below 2l = {two_l}"
    );
    (0..=n_max)
        .map(|n| {
            let np1 = (n + 1) as f64;
            (np1.sqrt() - ((1.0 - n as f64 / two_l) * np1).sqrt()).abs()
        })
        .fold(0.0, f64::max)
}

/// Max-abs entry of `[h+, h-] + I` restricted to the lowest `n_max + 1`
/// states, with `h+- = c J+-` built from the spin-`l` matrices.
///
/// The commutator is `2 c^2 J3`, whose restricted eigenvalues are `n/l - 1`,
/// so the exact answer is `n_max / l`.
pub fn commutator_error(l: Spin, n_max: usize) -> f64 {
    let two_l = 2.0 * l.value();
    assert!(
        (n_max as f64) < two_l,
        "n_max = {n_max} must stay below 2l = {two_l}"
    );
    let rep = angular_momentum_matrices(l);
    let c = 1.0 / two_l.sqrt();
    let h_plus = rep.j_plus() * c;
    let h_minus = rep.j_minus() * c;
    let dim = l.dim();
    let window = n_max + 1;
    let mut err = 0.0f64;
    for i in 0..window {
        for j in 0..window {
            let mut v = 0.0;
            for k in 0..dim {
                v += h_plus[(i, k)] * h_minus[(k, j)] - h_minus[(i, k)] * h_plus[(k, j)];
            }
            if i == j {
                v += 1.0;
            }
            err = err.max(v.abs());
        }
    }
    err
}

/// One row of the spectral convergence study.
#[derive(Debug, Clone)]
pub struct ConvergenceRow {
    pub l: u32,
    pub g_l: f64,
    pub shift: f64,
    pub per_level_errors: Vec<f64>,
    pub max_err: f64,
}

/// Per-`l` spectral errors against the Rabi reference, rows ordered by `l`.
#[derive(Debug, Clone)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    /// True when the largest `l` improves on the smallest one.
    pub fn improves(&self) -> bool {
        match (self.rows.first(), self.rows.last()) {
            (Some(a), Some(b)) => b.max_err < a.max_err,
            _ => false,
        }
    }
}

/// For each `l`: solve the finite model at coupling `g/sqrt(2l)`, shift by
/// `+l*omega`, and compare its lowest `levels` eigenvalues against the Rabi
/// spectrum.
pub fn spectral_convergence(rp: &RabiParams, l_list: &[Spin]) -> Result<ConvergenceTable> {
    if l_list.is_empty() {
        return Err(SolverError::InvalidParameter(
            "need at least one l value".into(),
        ));
    }
    for l in l_list {
        if !l.is_integer() {
            return Err(SolverError::UnsupportedSpin(format!(
                "convergence study needs integer l, got {l}"
            )));
        }
        if l.dim() < rp.levels + 10 {
            return Err(SolverError::InvalidParameter(format!(
                "l = {l} too small: need 2l+1 >= levels + 10 = {}",
                rp.levels + 10
            )));
        }
    }
    let reference = rabi_spectrum(rp)?;
    let reference_values = reference.values();

    let mut ls = l_list.to_vec();
    ls.sort_by_key(|l| l.twice_j());
    let mut rows = Vec::with_capacity(ls.len());
    for l in ls {
        let scheme = ContractionScheme::new(l, rp.g, rp.omega)?;
        let params = ModelParams::new(rp.omega, rp.delta, scheme.g_l, l, Spin::HALF)?;
        let finite = hl_spectrum(&params, rp.tol)?;
        let shifted: Vec<f64> = finite
            .values()
            .into_iter()
            .map(|v| v + scheme.energy_shift)
            .take(rp.levels)
            .collect();
        let per_level_errors: Vec<f64> = shifted
            .iter()
            .zip(&reference_values)
            .map(|(a, b)| (a - b).abs())
            .collect();
        let max_err = per_level_errors.iter().fold(0.0f64, |acc, e| acc.max(*e));
        rows.push(ConvergenceRow {
            l: l.twice_j() / 2,
            g_l: scheme.g_l,
            shift: scheme.energy_shift,
            per_level_errors,
            max_err,
        });
    }
    Ok(ConvergenceTable { rows })
}
