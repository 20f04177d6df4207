//! Eigenvalues of scalar tridiagonal matrices via the characteristic-minor
//! recursion, Sturm sign counts, and bisection.
//!
//! The minors `D_k(z)` of `A - zI` obey
//!
//! ```text
//! D_{-1} = 1,  D_0 = a_0 - z,  D_k = (a_k - z) D_{k-1} - b_k c_k D_{k-2}
//! ```
//!
//! and when `b_k c_k > 0` the sequence is a Sturm chain: the number of sign
//! changes along `(D_{-1}, ..., D_n)` counts the eigenvalues strictly below
//! `z`. A zero minor inherits the sign of its predecessor, which keeps the
//! count strict (an exact hit is not counted as "below").

use crate::error::{Result, SolverError};

/// Magnitude at which the running minors are rescaled to avoid overflow.
const RESCALE_THRESHOLD: f64 = 1e100;
const MAX_BISECTIONS: usize = 200;

/// Scalar tridiagonal matrix: diagonal `a_0..a_n`, superdiagonal `b_1..b_n`,
/// subdiagonal `c_1..c_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
}

impl Tridiagonal {
    pub fn new(a: Vec<f64>, b: Vec<f64>, c: Vec<f64>) -> Result<Self> {
        if a.is_empty() {
            return Err(SolverError::InvalidParameter(
                "tridiagonal matrix needs at least one diagonal entry".into(),
            ));
        }
        if b.len() + 1 != a.len() || c.len() + 1 != a.len() {
            return Err(SolverError::DimensionMismatch {
                expected: a.len() - 1,
                actual: b.len().max(c.len()),
            });
        }
        if a.iter().chain(&b).chain(&c).any(|x| !x.is_finite()) {
            return Err(SolverError::InvalidParameter(
                "tridiagonal entries must be finite".into(),
            ));
        }
        Ok(Tridiagonal { a, b, c })
    }

    /// Symmetric matrix with equal super/sub diagonals.
    pub fn symmetric(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        let c = b.clone();
        Tridiagonal::new(a, b, c)
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.a
    }

    pub fn superdiagonal(&self) -> &[f64] {
        &self.b
    }

    pub fn subdiagonal(&self) -> &[f64] {
        &self.c
    }

    /// First index with `b_k * c_k <= 0`, if any.
    fn sturm_violation(&self) -> Option<(usize, f64)> {
        self.b
            .iter()
            .zip(&self.c)
            .map(|(b, c)| b * c)
            .enumerate()
            .find(|(_, p)| *p <= 0.0)
            .map(|(i, p)| (i + 1, p))
    }

    /// Interval `[lo, hi]` containing all eigenvalues (Gershgorin disks),
    /// padded by one unit so the end points act as -inf/+inf proxies.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut radius = 0.0;
            if i > 0 {
                radius += self.c[i - 1].abs();
            }
            if i + 1 < n {
                radius += self.b[i].abs();
            }
            lo = lo.min(self.a[i] - radius);
            hi = hi.max(self.a[i] + radius);
        }
        (lo - 1.0, hi + 1.0)
    }
}

/// The minor sequence evaluated at a trial value, with sign bookkeeping.
#[derive(Debug, Clone)]
pub struct SturmEvaluation {
    /// Trial value.
    pub z: f64,
    /// Rescaled minors `D_{-1}, D_0, ..., D_n` (length `n + 2`).
    pub deltas: Vec<f64>,
    /// Natural log of the accumulated rescaling factor, so that
    /// `D_n(z) = deltas.last() * exp(scale_log)` up to per-entry snapshots.
    pub scale_log: f64,
    /// Number of eigenvalues strictly below `z`.
    pub sign_changes: usize,
}

/// Run the minor recursion at `z`, rescaling whenever a value exceeds 1e100.
pub fn delta_sequence(t: &Tridiagonal, z: f64) -> SturmEvaluation {
    let n = t.dim();
    let mut deltas = Vec::with_capacity(n + 1);
    deltas.push(1.0);
    let mut scale_log = 0.0;

    let mut prev2 = 1.0; // D_{-1}
    let mut prev = t.a[0] - z; // D_0
    deltas.push(prev);

    let mut sign_changes = 0;
    let mut prev_sign = 1i8; // sign of D_{-1}
    let push_sign = |d: f64, prev_sign: &mut i8, changes: &mut usize| {
        let s = if d > 0.0 {
            1
        } else if d < 0.0 {
            -1
        } else {
            *prev_sign
        };
        if s != *prev_sign {
            *changes += 1;
        }
        *prev_sign = s;
    };
    push_sign(prev, &mut prev_sign, &mut sign_changes);

    for k in 1..n {
        let mut d = (t.a[k] - z) * prev - t.b[k - 1] * t.c[k - 1] * prev2;
        prev2 = prev;
        prev = d;
        let big = d.abs().max(prev2.abs());
        if big > RESCALE_THRESHOLD {
            prev /= big;
            prev2 /= big;
            scale_log += big.ln();
            d = prev;
        }
        deltas.push(d);
        push_sign(d, &mut prev_sign, &mut sign_changes);
    }

    SturmEvaluation {
        z,
        deltas,
        scale_log,
        sign_changes,
    }
}

/// Count of eigenvalues strictly below `z`, without storing the minors.
pub fn eigenvalue_count_below(t: &Tridiagonal, z: f64) -> usize {
    let mut prev2 = 1.0f64;
    let mut prev = t.a[0] - z;
    let mut count = 0usize;
    let mut prev_sign = 1i8;
    let s0 = if prev > 0.0 {
        1
    } else if prev < 0.0 {
        -1
    } else {
        prev_sign
    };
    if s0 != prev_sign {
        count += 1;
    }
    prev_sign = s0;
    for ((a, b), c) in t.a[1..].iter().zip(&t.b).zip(&t.c) {
        let d = (a - z) * prev - b * c * prev2;
        prev2 = prev;
        prev = d;
        let big = prev.abs().max(prev2.abs());
        if big > RESCALE_THRESHOLD {
            prev /= big;
            prev2 /= big;
        }
        let s = if prev > 0.0 {
            1
        } else if prev < 0.0 {
            -1
        } else {
            prev_sign
        };
        if s != prev_sign {
            count += 1;
        }
        prev_sign = s;
    }
    count
}

/// Continued-fraction value `S_k(z) = D_k(z) / D_{k-1}(z)`, evaluated through
/// the recursion `S_k = (a_k - z) - b_k c_k / S_{k-1}`.
///
/// At a pole (`D_{k-1} = 0`) the IEEE division yields a signed infinity, and
/// the recursion passes through it gracefully: the following step sees
/// `b c / inf = 0`.
pub fn sk_value(t: &Tridiagonal, k: usize, z: f64) -> f64 {
    assert!(k < t.dim(), "index k={k} out of range for n={}", t.dim() - 1);
    let mut s = t.a[0] - z;
    for i in 1..=k {
        s = (t.a[i] - z) - t.b[i - 1] * t.c[i - 1] / s;
    }
    s
}

pub(crate) struct RefineReport {
    pub eigenvalues: Vec<f64>,
    /// Max final bracket width relative to `max(1, |E|)`.
    pub max_rel_width: f64,
    pub max_iterations: usize,
}

pub(crate) fn bracket_and_refine_report(t: &Tridiagonal, tol: f64) -> Result<RefineReport> {
    if tol <= 0.0 || !tol.is_finite() {
        return Err(SolverError::InvalidParameter(format!(
            "tolerance must be positive and finite, got {tol}"
        )));
    }
    if let Some((index, product)) = t.sturm_violation() {
        return Err(SolverError::SturmConditionViolated { index, product });
    }
    let n = t.dim();
    let (glo, ghi) = t.gershgorin();
    let mut eigenvalues = Vec::with_capacity(n);
    let mut max_rel_width: f64 = 0.0;
    let mut max_iterations = 0usize;

    for k in 0..n {
        let mut lo = glo;
        let mut hi = ghi;
        let mut iters = 0usize;
        loop {
            let mid = 0.5 * (lo + hi);
            let width = hi - lo;
            if width <= tol * mid.abs().max(1.0) {
                break;
            }
            if mid <= lo || mid >= hi {
                // bisection exhausted the floating-point grid
                break;
            }
            if iters >= MAX_BISECTIONS {
                return Err(SolverError::ConvergenceFailure(format!(
                    "bisection for eigenvalue {k} still at width {width:e} after {MAX_BISECTIONS} iterations"
                )));
            }
            iters += 1;
            if eigenvalue_count_below(t, mid) <= k {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let e = 0.5 * (lo + hi);
        max_rel_width = max_rel_width.max((hi - lo) / e.abs().max(1.0));
        max_iterations = max_iterations.max(iters);
        eigenvalues.push(e);
    }
    // monotone by construction of the count function; enforce against roundoff
    eigenvalues.sort_by(f64::total_cmp);
    Ok(RefineReport {
        eigenvalues,
        max_rel_width,
        max_iterations,
    })
}

/// All `n+1` eigenvalues, each located by bisection on the Sturm count inside
/// the Gershgorin interval, to width `tol * max(1, |E|)`. Degenerate
/// eigenvalues are reported as repeated entries (one per count jump).
pub fn bracket_and_refine(t: &Tridiagonal, tol: f64) -> Result<Vec<f64>> {
    bracket_and_refine_report(t, tol).map(|r| r.eigenvalues)
}

/// Like [`bracket_and_refine`] but tolerant of couplings that are exactly
/// zero: the matrix splits there into independent segments, and 1x1 segments
/// contribute their diagonal entry exactly. Couplings with `b_k c_k < 0`
/// still fail.
pub(crate) fn eig_split_report(t: &Tridiagonal, tol: f64) -> Result<RefineReport> {
    let n = t.dim();
    let mut eigenvalues = Vec::with_capacity(n);
    let mut max_rel_width: f64 = 0.0;
    let mut max_iterations = 0usize;
    let mut start = 0usize;
    for end in 0..n {
        let split_here = end + 1 == n || t.b[end] * t.c[end] == 0.0;
        if !split_here {
            continue;
        }
        if end == start {
            eigenvalues.push(t.a[start]);
        } else {
            let seg = Tridiagonal::new(
                t.a[start..=end].to_vec(),
                t.b[start..end].to_vec(),
                t.c[start..end].to_vec(),
            )?;
            let rep = bracket_and_refine_report(&seg, tol)?;
            max_rel_width = max_rel_width.max(rep.max_rel_width);
            max_iterations = max_iterations.max(rep.max_iterations);
            eigenvalues.extend(rep.eigenvalues);
        }
        start = end + 1;
    }
    eigenvalues.sort_by(f64::total_cmp);
    Ok(RefineReport {
        eigenvalues,
        max_rel_width,
        max_iterations,
    })
}

/// Lowest `count` eigenvalues of a symmetric chain, with optional warm upper
/// brackets from a previous (smaller) truncation of the same operator.
///
/// Eigenvalues of a leading principal submatrix bound those of the full
/// matrix from above, so `warm[k] + slack` is a valid right bracket for
/// eigenvalue `k`; the bound is still verified against the Sturm count and
/// widened to the Gershgorin interval if it fails.
pub(crate) fn lowest_eigenvalues(
    t: &Tridiagonal,
    count: usize,
    tol: f64,
    warm: Option<&[f64]>,
) -> Result<RefineReport> {
    if tol <= 0.0 || !tol.is_finite() {
        return Err(SolverError::InvalidParameter(format!(
            "tolerance must be positive and finite, got {tol}"
        )));
    }
    if count > t.dim() {
        return Err(SolverError::DimensionMismatch {
            expected: t.dim(),
            actual: count,
        });
    }
    if t.b.iter().zip(&t.c).all(|(b, c)| b * c == 0.0) {
        let mut d = t.a.clone();
        d.sort_by(f64::total_cmp);
        d.truncate(count);
        return Ok(RefineReport {
            eigenvalues: d,
            max_rel_width: 0.0,
            max_iterations: 0,
        });
    }
    if let Some((index, product)) = t.sturm_violation() {
        return Err(SolverError::SturmConditionViolated { index, product });
    }
    let (glo, ghi) = t.gershgorin();
    let mut eigenvalues = Vec::with_capacity(count);
    let mut max_rel_width: f64 = 0.0;
    let mut max_iterations = 0usize;
    for k in 0..count {
        let mut lo = glo;
        let mut hi = ghi;
        if let Some(w) = warm {
            if let Some(&wk) = w.get(k) {
                let candidate = wk + tol * wk.abs().max(1.0);
                if candidate < ghi && eigenvalue_count_below(t, candidate) > k {
                    hi = candidate;
                }
            }
        }
        let mut iters = 0usize;
        loop {
            let mid = 0.5 * (lo + hi);
            let width = hi - lo;
            if width <= tol * mid.abs().max(1.0) || mid <= lo || mid >= hi {
                break;
            }
            if iters >= MAX_BISECTIONS {
                return Err(SolverError::ConvergenceFailure(format!(
                    "bisection for eigenvalue {k} still at width {width:e} after {MAX_BISECTIONS} iterations"
                )));
            }
            iters += 1;
            if eigenvalue_count_below(t, mid) <= k {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let e = 0.5 * (lo + hi);
        max_rel_width = max_rel_width.max((hi - lo) / e.abs().max(1.0));
        max_iterations = max_iterations.max(iters);
        eigenvalues.push(e);
    }
    eigenvalues.sort_by(f64::total_cmp);
    Ok(RefineReport {
        eigenvalues,
        max_rel_width,
        max_iterations,
    })
}
