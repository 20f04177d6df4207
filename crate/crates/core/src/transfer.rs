//! Eigenvalues of block-tridiagonal matrices with invertible off-diagonal
//! blocks: propagate the top-left block of the transfer matrix,
//!
//! ```text
//! G_k = -B_{k+1}^{-1} (A_k - zI) G_{k-1} - B_{k+1}^{-1} B_k^T G_{k-2},
//! ```
//!
//! close with `T_11(z) = (A_n - zI) G_{n-1} + B_n^T G_{n-2}`, and read the
//! eigenvalues off as the zeros of `det T_11(z)`. Also hosts the r = 1/2
//! specialization where the whole recursion collapses to anti-diagonal 2x2
//! steps.

use ndarray::Array2;

use crate::error::{Result, SolverError};
use crate::model::{assemble_dense, BlockTridiagonal, ModelParams, Spin};
use crate::oracle::{eig_dense_symmetric, DenseSymmetric};

/// Off-diagonal blocks with condition number above this are treated as
/// singular.
const COND_LIMIT: f64 = 1e12;
/// Rescale the running transfer blocks beyond this magnitude.
const RESCALE_THRESHOLD: f64 = 1e100;
const MAX_BISECTIONS: usize = 200;
/// Fallback tolerance handed to the dense oracle.
const ORACLE_TOL: f64 = 1e-13;

/// The two most recent top-left transfer blocks, jointly rescaled.
#[derive(Debug, Clone)]
pub struct TransferPair {
    pub t_curr: Array2<f64>,
    pub t_prev: Array2<f64>,
    /// Natural log of the accumulated rescaling factor.
    pub scale_log: f64,
}

impl TransferPair {
    fn rescale_if_needed(&mut self) {
        let big = self
            .t_curr
            .iter()
            .chain(self.t_prev.iter())
            .fold(0.0f64, |acc, x| acc.max(x.abs()));
        if big > RESCALE_THRESHOLD {
            self.t_curr.mapv_inplace(|x| x / big);
            self.t_prev.mapv_inplace(|x| x / big);
            self.scale_log += big.ln();
        }
    }
}

fn inf_norm(m: &Array2<f64>) -> f64 {
    let mut worst = 0.0f64;
    for row in m.rows() {
        worst = worst.max(row.iter().map(|x| x.abs()).sum());
    }
    worst
}

/// Invert one off-diagonal block: explicit adjugate for m <= 3, partial-pivot
/// Gauss-Jordan otherwise, then a condition check on the result.
fn invert_block(b: &Array2<f64>, index: usize) -> Result<Array2<f64>> {
    let m = b.nrows();
    let singular = |cond: f64| SolverError::SingularOffDiagonal { index, cond };
    let inv = match m {
        1 => {
            if b[(0, 0)] == 0.0 {
                return Err(singular(f64::INFINITY));
            }
            Array2::from_elem((1, 1), 1.0 / b[(0, 0)])
        }
        2 => {
            let det = b[(0, 0)] * b[(1, 1)] - b[(0, 1)] * b[(1, 0)];
            if det == 0.0 {
                return Err(singular(f64::INFINITY));
            }
            let mut inv = Array2::zeros((2, 2));
            inv[(0, 0)] = b[(1, 1)] / det;
            inv[(1, 1)] = b[(0, 0)] / det;
            inv[(0, 1)] = -b[(0, 1)] / det;
            inv[(1, 0)] = -b[(1, 0)] / det;
            inv
        }
        3 => {
            let c = |i: usize, j: usize| b[(i, j)];
            let cof = [
                [
                    c(1, 1) * c(2, 2) - c(1, 2) * c(2, 1),
                    c(1, 2) * c(2, 0) - c(1, 0) * c(2, 2),
                    c(1, 0) * c(2, 1) - c(1, 1) * c(2, 0),
                ],
                [
                    c(0, 2) * c(2, 1) - c(0, 1) * c(2, 2),
                    c(0, 0) * c(2, 2) - c(0, 2) * c(2, 0),
                    c(0, 1) * c(2, 0) - c(0, 0) * c(2, 1),
                ],
                [
                    c(0, 1) * c(1, 2) - c(0, 2) * c(1, 1),
                    c(0, 2) * c(1, 0) - c(0, 0) * c(1, 2),
                    c(0, 0) * c(1, 1) - c(0, 1) * c(1, 0),
                ],
            ];
            let det = c(0, 0) * cof[0][0] + c(0, 1) * cof[0][1] + c(0, 2) * cof[0][2];
            if det == 0.0 {
                return Err(singular(f64::INFINITY));
            }
            let mut inv = Array2::zeros((3, 3));
            for i in 0..3 {
                for j in 0..3 {
                    // adjugate is the transposed cofactor matrix
                    inv[(i, j)] = cof[j][i] / det;
                }
            }
            inv
        }
        _ => {
            // Gauss-Jordan with partial pivoting on [b | I]
            let mut a = b.clone();
            let mut inv = Array2::eye(m);
            for col in 0..m {
                let pivot_row = (col..m)
                    .max_by(|&i, &j| a[(i, col)].abs().total_cmp(&a[(j, col)].abs()))
                    .unwrap();
                if a[(pivot_row, col)] == 0.0 {
                    return Err(singular(f64::INFINITY));
                }
                if pivot_row != col {
                    for j in 0..m {
                        a.swap((col, j), (pivot_row, j));
                        inv.swap((col, j), (pivot_row, j));
                    }
                }
                let piv = a[(col, col)];
                for j in 0..m {
                    a[(col, j)] /= piv;
                    inv[(col, j)] /= piv;
                }
                for i in 0..m {
                    if i == col {
                        continue;
                    }
                    let f = a[(i, col)];
                    if f == 0.0 {
                        continue;
                    }
                    for j in 0..m {
                        a[(i, j)] -= f * a[(col, j)];
                        inv[(i, j)] -= f * inv[(col, j)];
                    }
                }
            }
            inv
        }
    };
    if inv.iter().any(|x| !x.is_finite()) {
        return Err(singular(f64::INFINITY));
    }
    let cond = inf_norm(b) * inf_norm(&inv);
    if !cond.is_finite() || cond > COND_LIMIT {
        return Err(singular(cond));
    }
    Ok(inv)
}

/// Sign and log-magnitude of `det(m)` via LU with partial pivoting.
fn det_sign_log(m: &Array2<f64>) -> (f64, f64) {
    let n = m.nrows();
    let mut a = m.clone();
    let mut sign = 1.0f64;
    let mut log_abs = 0.0f64;
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| a[(i, col)].abs().total_cmp(&a[(j, col)].abs()))
            .unwrap();
        let piv = a[(pivot_row, col)];
        if piv == 0.0 {
            return (0.0, f64::NEG_INFINITY);
        }
        if pivot_row != col {
            sign = -sign;
            for j in 0..n {
                a.swap((col, j), (pivot_row, j));
            }
        }
        sign *= piv.signum();
        log_abs += piv.abs().ln();
        for i in (col + 1)..n {
            let f = a[(i, col)] / piv;
            if f == 0.0 {
                continue;
            }
            for j in (col + 1)..n {
                a[(i, j)] -= f * a[(col, j)];
            }
            a[(i, col)] = 0.0;
        }
    }
    (sign, log_abs)
}

fn shifted(a: &Array2<f64>, z: f64) -> Array2<f64> {
    let mut out = a.clone();
    for i in 0..out.nrows() {
        out[(i, i)] -= z;
    }
    out
}

fn transfer_t11_with(mtx: &BlockTridiagonal, b_inv: &[Array2<f64>], z: f64) -> (f64, f64) {
    let m = mtx.block_dim();
    let nb = mtx.n_blocks();
    let diag = mtx.diag();
    let offdiag = mtx.offdiag();

    if nb == 1 {
        return det_sign_log(&shifted(&diag[0], z));
    }

    // pair starts as (G_0, G_{-1}) = (-B_1^{-1} (A_0 - z), I)
    let mut pair = TransferPair {
        t_curr: -b_inv[0].dot(&shifted(&diag[0], z)),
        t_prev: Array2::eye(m),
        scale_log: 0.0,
    };
    pair.rescale_if_needed();

    for k in 1..nb - 1 {
        // G_k = -B_{k+1}^{-1} ((A_k - z) G_{k-1} + B_k^T G_{k-2})
        let rhs = shifted(&diag[k], z).dot(&pair.t_curr) + offdiag[k - 1].t().dot(&pair.t_prev);
        let next = -b_inv[k].dot(&rhs);
        pair.t_prev = std::mem::replace(&mut pair.t_curr, next);
        pair.rescale_if_needed();
    }

    // closing row has no inverse: T_11 = (A_n - z) G_{n-1} + B_n^T G_{n-2}
    let t11 = shifted(&diag[nb - 1], z).dot(&pair.t_curr) + offdiag[nb - 2].t().dot(&pair.t_prev);
    let (sign, log_abs) = det_sign_log(&t11);
    (sign, log_abs + m as f64 * pair.scale_log)
}

fn invert_offdiagonals(mtx: &BlockTridiagonal) -> Result<Vec<Array2<f64>>> {
    mtx.offdiag()
        .iter()
        .enumerate()
        .map(|(i, b)| invert_block(b, i + 1))
        .collect()
}

/// Sign and log-magnitude of `det T_11(z)`; its zeros in `z` are exactly the
/// eigenvalues of the assembled matrix.
pub fn transfer_t11(mtx: &BlockTridiagonal, z: f64) -> Result<(f64, f64)> {
    let b_inv = invert_offdiagonals(mtx)?;
    Ok(transfer_t11_with(mtx, &b_inv, z))
}

/// Gershgorin bounds of the assembled matrix computed blockwise, padded by
/// one unit.
fn block_gershgorin(mtx: &BlockTridiagonal) -> (f64, f64) {
    let m = mtx.block_dim();
    let nb = mtx.n_blocks();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for k in 0..nb {
        for i in 0..m {
            let mut radius = 0.0;
            for j in 0..m {
                if j != i {
                    radius += mtx.diag()[k][(i, j)].abs();
                }
                if k + 1 < nb {
                    radius += mtx.offdiag()[k][(i, j)].abs();
                }
                if k > 0 {
                    radius += mtx.offdiag()[k - 1][(j, i)].abs();
                }
            }
            let center = mtx.diag()[k][(i, i)];
            lo = lo.min(center - radius);
            hi = hi.max(center + radius);
        }
    }
    (lo - 1.0, hi + 1.0)
}

/// Spectrum of a block-tridiagonal matrix found through `det T_11`.
#[derive(Debug, Clone)]
pub struct BlockSpectrum {
    pub eigenvalues: Vec<f64>,
    /// True when root counting came up short (even-multiplicity roots carry
    /// no sign change) and the dense oracle supplied the spectrum instead.
    pub used_oracle_fallback: bool,
}

fn bisect_root<F: Fn(f64) -> f64>(
    sign_at: &F,
    mut lo: f64,
    mut hi: f64,
    s_lo: f64,
    tol: f64,
) -> Result<f64> {
    let mut iters = 0usize;
    loop {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol * mid.abs().max(1.0) || mid <= lo || mid >= hi {
            return Ok(mid);
        }
        if iters >= MAX_BISECTIONS {
            return Err(SolverError::ConvergenceFailure(format!(
                "determinant bisection stuck at width {:e}",
                hi - lo
            )));
        }
        iters += 1;
        let s = sign_at(mid);
        if s == 0.0 {
            return Ok(mid);
        }
        if s == s_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

/// All eigenvalues via sign changes of `det T_11(z)` over an adaptively
/// refined Gershgorin grid; falls back to the dense oracle (flagged) when
/// sign counting cannot account for every eigenvalue.
pub fn eig_block(mtx: &BlockTridiagonal, tol: f64) -> Result<BlockSpectrum> {
    if tol <= 0.0 || !tol.is_finite() {
        return Err(SolverError::InvalidParameter(format!(
            "tolerance must be positive and finite, got {tol}"
        )));
    }
    let b_inv = invert_offdiagonals(mtx)?;
    let n_total = mtx.dim();
    let (glo, ghi) = block_gershgorin(mtx);
    let eval = |z: f64| transfer_t11_with(mtx, &b_inv, z);
    let sign_at = |z: f64| eval(z).0;

    // initial grid: dimension x 4 cells
    let n_cells = 4 * n_total;
    let mut xs: Vec<f64> = (0..=n_cells)
        .map(|i| glo + (ghi - glo) * i as f64 / n_cells as f64)
        .collect();
    let mut vals: Vec<(f64, f64)> = xs.iter().map(|&z| eval(z)).collect();

    let mut roots = Vec::with_capacity(n_total);
    for _round in 0..4 {
        roots.clear();
        for (i, &(s, _)) in vals.iter().enumerate() {
            if s == 0.0 {
                roots.push(xs[i]);
            }
        }
        for i in 0..xs.len() - 1 {
            let (s0, _) = vals[i];
            let (s1, _) = vals[i + 1];
            if s0 != 0.0 && s1 != 0.0 && s0 != s1 {
                roots.push(bisect_root(&sign_at, xs[i], xs[i + 1], s0, tol)?);
            }
        }
        roots.sort_by(f64::total_cmp);
        roots.dedup_by(|a, b| (*a - *b).abs() <= 0.5 * tol * a.abs().max(1.0));
        if roots.len() >= n_total {
            break;
        }
        // missing roots: refine everywhere (evaluations are cheap), hardest
        // around magnitude dips where close root pairs hide without a sign
        // change
        let dip_node: Vec<bool> = (0..xs.len())
            .map(|i| {
                i > 0
                    && i + 1 < xs.len()
                    && vals[i].1 <= vals[i - 1].1
                    && vals[i].1 <= vals[i + 1].1
                    && vals[i].0 == vals[i - 1].0
                    && vals[i].0 == vals[i + 1].0
            })
            .collect();
        let mut refined_xs: Vec<f64> = Vec::with_capacity(xs.len() * 4);
        for i in 0..xs.len() {
            refined_xs.push(xs[i]);
            if i + 1 < xs.len() {
                let subdivisions = if dip_node[i] || dip_node[i + 1] { 16 } else { 4 };
                for s in 1..subdivisions {
                    refined_xs
                        .push(xs[i] + (xs[i + 1] - xs[i]) * s as f64 / subdivisions as f64);
                }
            }
        }
        xs = refined_xs;
        vals = xs.iter().map(|&z| eval(z)).collect();
    }

    if roots.len() == n_total {
        return Ok(BlockSpectrum {
            eigenvalues: roots,
            used_oracle_fallback: false,
        });
    }

    let dense = DenseSymmetric::new(assemble_dense(mtx))?;
    let eigenvalues = eig_dense_symmetric(&dense, ORACLE_TOL).map_err(|e| {
        SolverError::ConvergenceFailure(format!(
            "found {} of {} roots and the dense fallback failed: {e}",
            roots.len(),
            n_total
        ))
    })?;
    Ok(BlockSpectrum {
        eigenvalues,
        used_oracle_fallback: true,
    })
}

/// Anti-diagonal 2x2 matrix `[[0, upper], [lower, 0]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AntiDiagonal2 {
    pub upper: f64,
    pub lower: f64,
}

impl AntiDiagonal2 {
    pub fn det(self) -> f64 {
        -self.upper * self.lower
    }
}

/// One step of the r = 1/2 transfer recursion in its closed anti-diagonal
/// form:
///
/// ```text
/// S_k = (k*omega - z) sigma_1 + (delta/2) [[0,-1],[1,0]] - b_k^2 S_{k-1}^{-1}
/// ```
///
/// At the base `k = -l` there is no coupling term and `s_prev` is ignored.
/// Anti-diagonality is preserved exactly because `S_{k-1}^{-1}` swaps the two
/// corners.
pub fn sm_step_half(
    p: &ModelParams,
    z: f64,
    s_prev: AntiDiagonal2,
    k: i64,
) -> Result<AntiDiagonal2> {
    if p.r != Spin::HALF {
        return Err(SolverError::UnsupportedSpin(format!(
            "anti-diagonal recursion requires r = 1/2, got r = {}",
            p.r
        )));
    }
    if !p.l.is_integer() {
        return Err(SolverError::UnsupportedSpin(format!(
            "anti-diagonal recursion indexes integer m, got l = {}",
            p.l
        )));
    }
    let l = (p.l.twice_j() / 2) as i64;
    if k < -l || k > l {
        return Err(SolverError::InvalidParameter(format!(
            "step index {k} outside -l..l for l = {l}"
        )));
    }
    let base = k as f64 * p.omega - z;
    if k == -l {
        return Ok(AntiDiagonal2 {
            upper: base - p.delta / 2.0,
            lower: base + p.delta / 2.0,
        });
    }
    if s_prev.upper == 0.0 || s_prev.lower == 0.0 {
        return Err(SolverError::PoleEncountered { index: k });
    }
    let kf = k as f64;
    let lv = p.l.value();
    // coupling element of g*L1*R1 with R1 = sigma_1/2
    let b_sq = 0.25 * p.g * p.g * (lv * (lv + 1.0) - kf * (kf - 1.0));
    Ok(AntiDiagonal2 {
        upper: base - p.delta / 2.0 - b_sq / s_prev.lower,
        lower: base + p.delta / 2.0 - b_sq / s_prev.upper,
    })
}
