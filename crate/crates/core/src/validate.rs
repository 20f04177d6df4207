//! Deterministic property/oracle suites behind the `validate` command.
//!
//! Every check draws its randomness from a ChaCha stream seeded with the
//! user seed and a fixed per-check salt, so identical seeds give
//! byte-identical reports.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::contraction::{commutator_error, ladder_element_error, spectral_convergence};
use crate::model::{assemble_dense, build_hl_blocks, BlockTridiagonal, ModelParams, Spin};
use crate::oracle::{eig_dense_symmetric, rabi_dense_truncated, DenseSymmetric};
use crate::spectra::{
    hl_parity_tridiagonal, hl_spectrum, rabi_spectrum, Parity, RabiParams,
};
use crate::transfer::{eig_block, sm_step_half, transfer_t11, AntiDiagonal2};
use crate::tridiag::{bracket_and_refine, eigenvalue_count_below, Tridiagonal};

/// Which suite(s) to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuiteKind {
    All,
    Cf,
    Block,
    Spectra,
    Contraction,
}

impl SuiteKind {
    pub fn parse(name: &str) -> Option<SuiteKind> {
        match name {
            "all" => Some(SuiteKind::All),
            "cf" => Some(SuiteKind::Cf),
            "block" => Some(SuiteKind::Block),
            "spectra" => Some(SuiteKind::Spectra),
            "contraction" => Some(SuiteKind::Contraction),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub suite: &'static str,
    pub checks: Vec<CheckResult>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn rng_for(seed: u64, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

fn random_symmetric_tridiagonal(rng: &mut ChaCha8Rng, n: usize) -> Tridiagonal {
    let a: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
    let b: Vec<f64> = (0..n - 1).map(|_| rng.random_range(0.1..2.0)).collect();
    Tridiagonal::symmetric(a, b).unwrap()
}

fn tridiagonal_to_dense(t: &Tridiagonal) -> Array2<f64> {
    let n = t.dim();
    let mut m = Array2::zeros((n, n));
    for i in 0..n {
        m[(i, i)] = t.diagonal()[i];
        if i + 1 < n {
            m[(i, i + 1)] = t.superdiagonal()[i];
            m[(i + 1, i)] = t.subdiagonal()[i];
        }
    }
    m
}

fn oracle_eigenvalues(m: Array2<f64>) -> Vec<f64> {
    eig_dense_symmetric(&DenseSymmetric::new(m).unwrap(), 1e-13).unwrap()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn check(name: &'static str, passed: bool, detail: String) -> CheckResult {
    CheckResult {
        name,
        passed,
        detail,
    }
}

fn cf_suite(seed: u64) -> SuiteReport {
    let mut checks = Vec::new();

    // Sturm count against the oracle on random instances and trial values.
    {
        let mut rng = rng_for(seed, 1);
        let mut mismatches = 0usize;
        let mut trials = 0usize;
        for _ in 0..20 {
            let n = rng.random_range(2..=30);
            let t = random_symmetric_tridiagonal(&mut rng, n);
            let eig = oracle_eigenvalues(tridiagonal_to_dense(&t));
            let (lo, hi) = t.gershgorin();
            for _ in 0..100 {
                let z = rng.random_range(lo..hi);
                let expected = eig.iter().filter(|e| **e < z).count();
                if eigenvalue_count_below(&t, z) != expected {
                    mismatches += 1;
                }
                trials += 1;
            }
        }
        checks.push(check(
            "sturm-count-vs-oracle",
            mismatches == 0,
            format!("{mismatches} mismatches in {trials} trials"),
        ));
    }

    // Full bracketing against the oracle, n up to 50.
    {
        let mut rng = rng_for(seed, 2);
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let n = rng.random_range(2..=50);
            let t = random_symmetric_tridiagonal(&mut rng, n);
            let eig = bracket_and_refine(&t, 1e-12).unwrap();
            let oracle = oracle_eigenvalues(tridiagonal_to_dense(&t));
            worst = worst.max(max_abs_diff(&eig, &oracle));
        }
        checks.push(check(
            "bracket-vs-oracle",
            worst < 1e-10,
            format!("max deviation {worst:.3e} over 100 instances"),
        ));
    }

    // Interlacing of minor roots, level by level.
    {
        let mut rng = rng_for(seed, 3);
        let mut ok = true;
        for _ in 0..10 {
            let n = rng.random_range(3..=12);
            let t = random_symmetric_tridiagonal(&mut rng, n);
            let mut prev: Option<Vec<f64>> = None;
            for k in 0..n {
                let sub = Tridiagonal::new(
                    t.diagonal()[..=k].to_vec(),
                    t.superdiagonal()[..k].to_vec(),
                    t.subdiagonal()[..k].to_vec(),
                )
                .unwrap();
                let roots = bracket_and_refine(&sub, 1e-13).unwrap();
                if let Some(p) = &prev {
                    for (i, r) in p.iter().enumerate() {
                        let slack = 1e-11 * r.abs().max(1.0);
                        if !(roots[i] - slack < *r && *r < roots[i + 1] + slack) {
                            ok = false;
                        }
                    }
                }
                prev = Some(roots);
            }
        }
        checks.push(check(
            "minor-root-interlacing",
            ok,
            "10 instances, n <= 12".into(),
        ));
    }

    // Count invariance under joint positive rescaling.
    {
        let mut rng = rng_for(seed, 4);
        let mut ok = true;
        for _ in 0..50 {
            let t = random_symmetric_tridiagonal(&mut rng, 10);
            let z = rng.random_range(-3.0..3.0);
            let kappa = rng.random_range(1e-3..1e3);
            let scaled = Tridiagonal::new(
                t.diagonal().iter().map(|x| x * kappa).collect(),
                t.superdiagonal().iter().map(|x| x * kappa).collect(),
                t.subdiagonal().iter().map(|x| x * kappa).collect(),
            )
            .unwrap();
            if eigenvalue_count_below(&t, z) != eigenvalue_count_below(&scaled, z * kappa) {
                ok = false;
            }
        }
        checks.push(check("count-scaling-invariance", ok, "50 cases".into()));
    }

    // Boundary counts at the padded Gershgorin ends.
    {
        let mut rng = rng_for(seed, 5);
        let mut ok = true;
        for _ in 0..20 {
            let n = rng.random_range(2..=40);
            let t = random_symmetric_tridiagonal(&mut rng, n);
            let (lo, hi) = t.gershgorin();
            ok &= eigenvalue_count_below(&t, lo) == 0;
            ok &= eigenvalue_count_below(&t, hi) == n;
        }
        checks.push(check("gershgorin-boundary-counts", ok, "20 cases".into()));
    }

    SuiteReport {
        suite: "cf",
        checks,
    }
}

fn random_block_matrix(rng: &mut ChaCha8Rng, m: usize, nb: usize) -> BlockTridiagonal {
    let diag = (0..nb)
        .map(|_| {
            let mut a = Array2::zeros((m, m));
            for i in 0..m {
                for j in i..m {
                    let v = rng.random_range(-1.0..1.0);
                    a[(i, j)] = v;
                    a[(j, i)] = v;
                }
            }
            a
        })
        .collect();
    let offdiag = (0..nb - 1)
        .map(|_| {
            let mut b = Array2::eye(m) * rng.random_range(0.8..1.5);
            for i in 0..m {
                for j in 0..m {
                    b[(i, j)] += rng.random_range(-0.1..0.1);
                }
            }
            b
        })
        .collect();
    BlockTridiagonal::new(diag, offdiag).unwrap()
}

fn block_suite(seed: u64) -> SuiteReport {
    let mut checks = Vec::new();

    // 1x1 blocks must agree with the Sturm path.
    {
        let mut rng = rng_for(seed, 11);
        let mut worst: f64 = 0.0;
        for _ in 0..50 {
            let n = rng.random_range(2..=8);
            let t = random_symmetric_tridiagonal(&mut rng, n);
            let blocks = BlockTridiagonal::new(
                t.diagonal()
                    .iter()
                    .map(|&a| Array2::from_elem((1, 1), a))
                    .collect(),
                t.superdiagonal()
                    .iter()
                    .map(|&b| Array2::from_elem((1, 1), b))
                    .collect(),
            )
            .unwrap();
            let via_transfer = eig_block(&blocks, 1e-12).unwrap();
            let via_sturm = bracket_and_refine(&t, 1e-12).unwrap();
            worst = worst.max(max_abs_diff(&via_transfer.eigenvalues, &via_sturm));
        }
        checks.push(check(
            "scalar-blocks-vs-cf",
            worst < 1e-10,
            format!("max deviation {worst:.3e} over 50 instances"),
        ));
    }

    // Random well-conditioned block matrices against the oracle.
    {
        let mut rng = rng_for(seed, 12);
        let mut worst: f64 = 0.0;
        let mut fallbacks = 0usize;
        for _ in 0..25 {
            let m = rng.random_range(2..=4);
            let nb = rng.random_range(2..=8);
            let mtx = random_block_matrix(&mut rng, m, nb);
            let s = eig_block(&mtx, 1e-11).unwrap();
            if s.used_oracle_fallback {
                fallbacks += 1;
            }
            let oracle = oracle_eigenvalues(assemble_dense(&mtx));
            worst = worst.max(max_abs_diff(&s.eigenvalues, &oracle));
        }
        checks.push(check(
            "random-blocks-vs-oracle",
            worst < 1e-8,
            format!("max deviation {worst:.3e}, {fallbacks} oracle fallbacks"),
        ));
    }

    // Coupled-spin matrices (integer and half-integer l) through the
    // transfer path.
    {
        let mut worst: f64 = 0.0;
        for twice_l in [2u32, 3, 4, 5, 7, 10] {
            let p =
                ModelParams::new(1.0, 0.7, 0.4, Spin::from_twice_j(twice_l), Spin::HALF).unwrap();
            let blocks = build_hl_blocks(&p);
            let s = eig_block(&blocks, 1e-11).unwrap();
            let oracle = oracle_eigenvalues(assemble_dense(&blocks));
            worst = worst.max(max_abs_diff(&s.eigenvalues, &oracle));
        }
        checks.push(check(
            "coupled-spin-vs-oracle",
            worst < 1e-9,
            format!("max deviation {worst:.3e} for 2l in 2..10"),
        ));
    }

    // Sign-change sets of det T_11 and det(M - zI) agree on a fine grid.
    {
        let mut rng = rng_for(seed, 13);
        let mut ok = true;
        for _ in 0..5 {
            let mtx = random_block_matrix(&mut rng, 2, 4);
            let oracle = oracle_eigenvalues(assemble_dense(&mtx));
            let lo = oracle[0] - 0.7;
            let hi = oracle[oracle.len() - 1] + 0.7;
            let mut prev_t = 0.0f64;
            let mut prev_m = 0.0f64;
            for i in 0..=160 {
                let z = lo + (hi - lo) * i as f64 / 160.0;
                let (st, _) = transfer_t11(&mtx, z).unwrap();
                let sm: f64 = oracle.iter().map(|e| (e - z).signum()).product();
                if i > 0 && (st * prev_t < 0.0) != (sm * prev_m < 0.0) {
                    ok = false;
                }
                prev_t = st;
                prev_m = sm;
            }
        }
        checks.push(check(
            "sign-change-sets-match",
            ok,
            "5 instances, 160-cell grids".into(),
        ));
    }

    // Anti-diagonal closure of the r = 1/2 recursion.
    {
        let mut rng = rng_for(seed, 14);
        let mut ok = true;
        for _ in 0..1000 {
            let l = rng.random_range(1..=6u32);
            let p = ModelParams::new(
                rng.random_range(0.2..2.0),
                rng.random_range(0.0..1.5),
                rng.random_range(-1.0..1.0),
                Spin::integer(l),
                Spin::HALF,
            )
            .unwrap();
            let z = rng.random_range(-3.0..3.0);
            let k = rng.random_range(-(l as i64)..=l as i64);
            let prev = AntiDiagonal2 {
                upper: rng.random_range(0.1..2.0),
                lower: -rng.random_range(0.1..2.0),
            };
            match sm_step_half(&p, z, prev, k) {
                Ok(s) => {
                    ok &= s.upper.is_finite() && s.lower.is_finite();
                }
                Err(_) => ok = false,
            }
        }
        checks.push(check(
            "anti-diagonal-closure",
            ok,
            "1000 random steps".into(),
        ));
    }

    // Degenerate spectra are flagged and served by the fallback.
    {
        let p = ModelParams::new(1.0, 0.0, 0.4, Spin::integer(2), Spin::HALF).unwrap();
        let blocks = build_hl_blocks(&p);
        let s = eig_block(&blocks, 1e-10).unwrap();
        let oracle = oracle_eigenvalues(assemble_dense(&blocks));
        let dev = max_abs_diff(&s.eigenvalues, &oracle);
        checks.push(check(
            "degenerate-fallback-flagged",
            s.used_oracle_fallback && dev < 1e-10,
            format!("fallback = {}, deviation {dev:.3e}", s.used_oracle_fallback),
        ));
    }

    SuiteReport {
        suite: "block",
        checks,
    }
}

fn spectra_suite(seed: u64) -> SuiteReport {
    let mut checks = Vec::new();

    // Parity-split chains against the dense oracle over a parameter grid.
    {
        let mut rng = rng_for(seed, 21);
        let mut worst: f64 = 0.0;
        for l in 1..=10u32 {
            let mut points: Vec<(f64, f64, f64)> = Vec::new();
            for delta in [0.0, 0.5, 2.0] {
                for g in [0.0, 0.3, 1.5] {
                    points.push((1.0, delta, g));
                }
            }
            points.push((
                rng.random_range(0.5..2.0),
                rng.random_range(0.0..2.0),
                rng.random_range(0.0..1.5),
            ));
            for (omega, delta, g) in points {
                let p = ModelParams::new(omega, delta, g, Spin::integer(l), Spin::HALF).unwrap();
                let s = hl_spectrum(&p, 1e-12).unwrap();
                let oracle = oracle_eigenvalues(assemble_dense(&build_hl_blocks(&p)));
                worst = worst.max(max_abs_diff(&s.values(), &oracle));
            }
        }
        checks.push(check(
            "parity-union-vs-oracle",
            worst < 1e-10,
            format!("max deviation {worst:.3e} over l = 1..10 grid"),
        ));
    }

    // Spectra invariant under g -> -g.
    {
        let mut rng = rng_for(seed, 22);
        let mut worst: f64 = 0.0;
        for _ in 0..5 {
            let l = rng.random_range(1..=6);
            let g = rng.random_range(0.1..1.2);
            let delta = rng.random_range(0.0..1.5);
            let pp = ModelParams::new(1.0, delta, g, Spin::integer(l), Spin::HALF).unwrap();
            let pm = ModelParams::new(1.0, delta, -g, Spin::integer(l), Spin::HALF).unwrap();
            worst = worst.max(max_abs_diff(
                &hl_spectrum(&pp, 1e-12).unwrap().values(),
                &hl_spectrum(&pm, 1e-12).unwrap().values(),
            ));
        }
        let rp = RabiParams::new(1.0, 0.4, 0.6, 6, 1e-10).unwrap();
        let rm = RabiParams::new(1.0, 0.4, -0.6, 6, 1e-10).unwrap();
        worst = worst.max(max_abs_diff(
            &rabi_spectrum(&rp).unwrap().values(),
            &rabi_spectrum(&rm).unwrap().values(),
        ));
        checks.push(check(
            "g-sign-invariance",
            worst < 1e-9,
            format!("max deviation {worst:.3e}"),
        ));
    }

    // Adding s to the diagonal shifts every eigenvalue by s.
    {
        let mut rng = rng_for(seed, 23);
        let mut worst: f64 = 0.0;
        for _ in 0..5 {
            let l = rng.random_range(1..=6);
            let p = ModelParams::new(1.0, 0.6, 0.45, Spin::integer(l), Spin::HALF).unwrap();
            let shift = rng.random_range(-4.0..4.0);
            let base = hl_parity_tridiagonal(&p, Parity::Plus).unwrap();
            let shifted = Tridiagonal::symmetric(
                base.diagonal().iter().map(|a| a + shift).collect(),
                base.superdiagonal().to_vec(),
            )
            .unwrap();
            let e0 = bracket_and_refine(&base, 1e-13).unwrap();
            let e1 = bracket_and_refine(&shifted, 1e-13).unwrap();
            for (a, b) in e0.iter().zip(&e1) {
                worst = worst.max((a + shift - b).abs());
            }
        }
        checks.push(check(
            "global-shift-covariance",
            worst < 1e-10,
            format!("max deviation {worst:.3e}"),
        ));
    }

    // Closed forms of the Rabi chains: decoupled and displaced-oscillator.
    {
        let p = RabiParams::new(1.0, 0.5, 0.0, 6, 1e-10).unwrap();
        let s = rabi_spectrum(&p).unwrap();
        let expected = [-0.25, 0.25, 0.75, 1.25, 1.75, 2.25];
        let dev1 = max_abs_diff(&s.values(), &expected);

        let p = RabiParams::new(1.0, 0.0, 0.5, 6, 1e-10).unwrap();
        let s = rabi_spectrum(&p).unwrap();
        let expected = [-0.25, -0.25, 0.75, 0.75, 1.75, 1.75];
        let dev2 = max_abs_diff(&s.values(), &expected);
        checks.push(check(
            "rabi-closed-forms",
            dev1 < 1e-12 && dev2 < 1e-8,
            format!("decoupled dev {dev1:.3e}, displaced dev {dev2:.3e}"),
        ));
    }

    // Rabi chain against the truncated-Fock oracle (reduced cutoff; the
    // acceptance suite runs the full 4x margin).
    {
        let p = RabiParams::new(1.0, 0.4, 0.7, 8, 1e-9).unwrap();
        let s = rabi_spectrum(&p).unwrap();
        let cutoff = 2 * s.meta.truncation_k.unwrap_or(128);
        let oracle = eig_dense_symmetric(&rabi_dense_truncated(&p, cutoff), 1e-13).unwrap();
        let dev = max_abs_diff(&s.values(), &oracle[..p.levels]);
        checks.push(check(
            "rabi-vs-fock-oracle",
            dev < 1e-8,
            format!("max deviation {dev:.3e} at cutoff {cutoff}"),
        ));
    }

    SuiteReport {
        suite: "spectra",
        checks,
    }
}

fn contraction_suite(_seed: u64) -> SuiteReport {
    let mut checks = Vec::new();

    {
        let mut ok = true;
        let mut prev = f64::INFINITY;
        for l in [8u32, 16, 32, 64, 128] {
            let e = ladder_element_error(Spin::integer(l), 4);
            ok &= e < prev;
            prev = e;
        }
        let ratio = ladder_element_error(Spin::integer(16), 4)
            / ladder_element_error(Spin::integer(8), 4);
        ok &= (0.4..=0.6).contains(&ratio);
        checks.push(check(
            "ladder-error-decay",
            ok,
            format!("8->16 ratio {ratio:.4}"),
        ));
    }

    {
        let mut worst: f64 = 0.0;
        for (l, n) in [(10u32, 5usize), (64, 6), (200, 3)] {
            let dev = (commutator_error(Spin::integer(l), n) - n as f64 / l as f64).abs();
            worst = worst.max(dev);
        }
        checks.push(check(
            "commutator-closed-form",
            worst < 1e-13,
            format!("max deviation {worst:.3e}"),
        ));
    }

    {
        let g: f64 = 0.7;
        let mut ok = true;
        for n in 2..8u32 {
            let mut prev = f64::INFINITY;
            for l in [8u32, 16, 32, 64] {
                let two_l = 2.0 * l as f64;
                let dev = (g * g * n as f64 * (two_l + 1.0 - n as f64) / two_l
                    - g * g * n as f64)
                    .abs();
                ok &= dev < prev;
                prev = dev;
            }
        }
        checks.push(check(
            "coupling-map-pointwise",
            ok,
            "n = 2..7, l = 8..64".into(),
        ));
    }

    {
        let rp = RabiParams::new(1.0, 0.4, 0.7, 6, 1e-9).unwrap();
        let t = spectral_convergence(
            &rp,
            &[Spin::integer(8), Spin::integer(16), Spin::integer(32)],
        )
        .unwrap();
        let errs: Vec<f64> = t.rows.iter().map(|r| r.max_err).collect();
        let ok = errs.windows(2).all(|w| w[1] < w[0]);
        checks.push(check(
            "spectral-convergence-decreasing",
            ok,
            format!(
                "max errors {}",
                errs.iter()
                    .map(|e| format!("{e:.3e}"))
                    .collect::<Vec<_>>()
                    .join(" -> ")
            ),
        ));
    }

    SuiteReport {
        suite: "contraction",
        checks,
    }
}

/// Run the requested suites with deterministic pseudo-randomness.
pub fn run_suites(kind: SuiteKind, seed: u64) -> Vec<SuiteReport> {
    match kind {
        SuiteKind::All => vec![
            cf_suite(seed),
            block_suite(seed),
            spectra_suite(seed),
            contraction_suite(seed),
        ],
        SuiteKind::Cf => vec![cf_suite(seed)],
        SuiteKind::Block => vec![block_suite(seed)],
        SuiteKind::Spectra => vec![spectra_suite(seed)],
        SuiteKind::Contraction => vec![contraction_suite(seed)],
    }
}
