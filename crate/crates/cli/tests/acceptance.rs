//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on failure.

mod oracle;

use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use hadamard_core::chains::{
    evaluate_chain_with_tol, linear_grid, scan_monotone, scan_numrad, DEFAULT_CHAIN_TOL,
};
use hadamard_core::explorer::{
    append_outcome, jordan_naive_fixture, load_outcomes, random_instance, random_matrix_with,
    search_inequivalence, search_violation, trial_rng, Finding, FindingKind, SearchConfig,
    SearchOutcome, ViolationClaim,
};
use hadamard_core::kernelgrid::{
    kernel_geomean_check, truncation_sequence, KernelSpec, TruncatedMatrixSpec,
};
use hadamard_core::nnmatrix::{
    block_cyclic, hadamard_power, hadamard_product_all, matmul, matmul_all,
};
use hadamard_core::spectral::{
    matrix_exp, max_times_radius, numerical_radius, operator_norm, operator_norm_power_iteration,
    resolvent, spectral_radius,
};
use hadamard_core::{ChainId, NonNegativeMatrix, NormKind, ToleranceConfig};
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn cfg() -> ToleranceConfig {
    ToleranceConfig::default()
}

fn m(rows: &[&[f64]]) -> NonNegativeMatrix {
    NonNegativeMatrix::from_rows(rows).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn criterion_1() -> Outcome {
    let ones = m(&[&[1.0, 1.0], &[1.0, 1.0]]);
    let rho = spectral_radius(&ones, &cfg()).unwrap().value;
    let scan = scan_monotone(&[ones], &[1.0, 2.0, 4.0], &cfg()).unwrap();
    let r_err = scan
        .t_grid
        .iter()
        .zip(&scan.r_values)
        .fold(0.0f64, |e, (t, r)| e.max((r - 2f64.powf(1.0 / t)).abs()));
    let w = numerical_radius(&m(&[&[0.0, 1.0], &[0.0, 0.0]]), &cfg())
        .unwrap()
        .value;
    let (a, b) = jordan_naive_fixture();
    let triple = [a.clone(), b.clone(), a];
    let lhs = operator_norm(
        &hadamard_product_all(&triple).unwrap(),
        NormKind::Two,
        &cfg(),
    )
    .unwrap()
    .value;
    let rhs = operator_norm(&matmul_all(&triple).unwrap(), NormKind::Two, &cfg())
        .unwrap()
        .value;
    let pass = (rho - 2.0).abs() <= 1e-9
        && r_err <= 1e-9
        && (w - 0.5).abs() <= 1e-10
        && lhs == 1.0
        && rhs == 0.0;
    outcome(
        pass,
        format!("rho={rho} max|r(t)-2^(1/t)|={r_err:.1e} w={w} ||A∘B∘A||={lhs} ||ABA||={rhs}"),
    )
}

fn criterion_2() -> Outcome {
    let mut violations = Vec::new();
    let mut inconclusive = 0;
    let mut evaluated = 0;
    for (c, chain) in ChainId::ALL.iter().enumerate() {
        for trial in 0..200u64 {
            let mut rng = trial_rng(0xC0FFEE + c as u64, trial);
            let n = 1 + (trial % 6) as usize;
            let density = if trial % 2 == 0 { 1.0 } else { 0.3 };
            let (mats, params) = random_instance(*chain, &mut rng, n, density, &cfg()).unwrap();
            let report = evaluate_chain_with_tol(*chain, &mats, &params, &cfg(), DEFAULT_CHAIN_TOL)
                .unwrap_or_else(|e| panic!("{chain} trial {trial}: {e}"));
            evaluated += 1;
            if report.inconclusive {
                inconclusive += 1;
            } else if report.violated() {
                violations.push(format!("{chain}#{trial} slack={:.3e}", report.min_slack));
            }
        }
    }
    outcome(
        violations.is_empty() && inconclusive == 0,
        format!(
            "{evaluated} instances over {} chains, {} violations, {inconclusive} inconclusive {}",
            ChainId::ALL.len(),
            violations.len(),
            violations
                .iter()
                .take(5)
                .cloned()
                .collect::<Vec<_>>()
                .join(" ")
        ),
    )
}

fn criterion_3() -> Outcome {
    let sanity = rel(
        oracle::rho_charpoly(&m(&[&[1.0, 2.0], &[3.0, 4.0]])),
        (5.0 + 33f64.sqrt()) / 2.0,
    );
    let mut worst_rho = 0.0f64;
    let mut worst_norm = 0.0f64;
    for trial in 0..500u64 {
        let mut rng = trial_rng(3, trial);
        let n = rng.gen_range(1..=4);
        let a = random_matrix_with(&mut rng, n, 1.0).unwrap();
        let g = spectral_radius(&a, &cfg()).unwrap();
        let o = oracle::rho_charpoly(&a);
        worst_rho = worst_rho.max(rel(g.value, o));
        let p = operator_norm_power_iteration(&a, &cfg()).unwrap();
        let ata = matmul(&a.transpose(), &a).unwrap();
        let gn = spectral_radius(&ata, &cfg()).unwrap().value.sqrt();
        worst_norm = worst_norm.max(rel(p.value, gn));
    }
    outcome(
        sanity < 1e-12 && worst_rho <= 1e-8 && worst_norm <= 1e-8,
        format!("max rel err rho={worst_rho:.2e} norm2={worst_norm:.2e} (oracle self-check {sanity:.1e})"),
    )
}

fn criterion_4() -> Outcome {
    let mut worst = 0.0f64;
    for trial in 0..100u64 {
        let mut rng = trial_rng(4, trial);
        let k = rng.gen_range(2..=4);
        let n = rng.gen_range(1..=4);
        let density = if trial % 2 == 0 { 1.0 } else { 0.6 };
        let mats: Vec<NonNegativeMatrix> = (0..k)
            .map(|_| random_matrix_with(&mut rng, n, density).unwrap())
            .collect();
        let t = block_cyclic(&mats).unwrap();
        let lhs = spectral_radius(&t, &cfg()).unwrap().value.powi(k as i32);
        let rhs = spectral_radius(&matmul_all(&mats).unwrap(), &cfg())
            .unwrap()
            .value;
        let err = if rhs == 0.0 { lhs } else { rel(lhs, rhs) };
        worst = worst.max(err);
    }
    outcome(
        worst <= 1e-7,
        format!("max rel err {worst:.2e} over 100 instances"),
    )
}

fn criterion_5() -> Outcome {
    let f1 = max_times_radius(&m(&[&[1.0, 2.0], &[3.0, 4.0]]))
        .unwrap()
        .value;
    let f2 = max_times_radius(&m(&[&[0.0, 1.0], &[0.0, 0.0]]))
        .unwrap()
        .value;
    let mut below = true;
    let mut worst_gap = 0.0f64;
    let mut worst_oracle = 0.0f64;
    for trial in 0..100u64 {
        let mut rng = trial_rng(5, trial);
        let n = rng.gen_range(1..=4);
        let data: Vec<f64> = (0..n * n).map(|_| rng.gen_range(0.1..1.0)).collect();
        let a = NonNegativeMatrix::new(n, n, data).unwrap();
        let mu = max_times_radius(&a).unwrap().value;
        worst_oracle = worst_oracle.max((mu - oracle::max_cycle_mean(&a)).abs());
        for t in [1.0, 2.0, 4.0, 8.0, 16.0, 32.0] {
            let r = spectral_radius(&hadamard_power(&a, t).unwrap(), &cfg())
                .unwrap()
                .value
                .powf(1.0 / t);
            below &= mu <= r + 1e-12 * r.max(1.0);
            if t == 32.0 {
                worst_gap = worst_gap.max((r - mu).abs() / mu.max(1.0));
            }
        }
    }
    outcome(
        f1 == 4.0 && f2 == 0.0 && below && worst_gap <= 0.05 && worst_oracle <= 1e-12,
        format!(
            "mu fixtures ({f1}, {f2}); mu <= rho(A^(t))^(1/t): {below}; \
             max |rho(A^(32))^(1/32) - mu| = {worst_gap:.3e}; Karp vs cycle enumeration {worst_oracle:.1e}"
        ),
    )
}

fn criterion_6() -> Outcome {
    let tol = cfg();
    let ineq = search_inequivalence(
        &SearchConfig {
            seed: 1,
            n_range: (3, 3),
            density: 1.0,
            trials: 10_000,
            target_gap: 1e-6,
        },
        &tol,
    )
    .unwrap();
    let ineq_ok = ineq.finding().is_some_and(|f| {
        let [a, b] = f.matrices.as_slice() else {
            return false;
        };
        let ab = matmul(a, b).unwrap();
        let ba = matmul(b, a).unwrap();
        let l = oracle::rho_charpoly(&hadamard_product_all(&[ab.clone(), ba]).unwrap());
        let r = oracle::rho_charpoly(&hadamard_product_all(&[ab.clone(), ab]).unwrap());
        f.gap > 1e-6 && (l - r).abs() / r.max(1.0) > 1e-6
    });

    let jordan = search_violation(
        ViolationClaim::JordanNaive,
        &SearchConfig {
            seed: 1,
            n_range: (2, 2),
            density: 0.5,
            trials: 1000,
            target_gap: 1e-6,
        },
        &tol,
    )
    .unwrap();
    let jordan_ok = jordan.finding().is_some_and(|f| {
        let [a, b] = f.matrices.as_slice() else {
            return false;
        };
        let triple = [a.clone(), b.clone(), a.clone()];
        let l = oracle::rho_charpoly(&{
            let h = hadamard_product_all(&triple).unwrap();
            matmul(&h.transpose(), &h).unwrap()
        })
        .sqrt();
        let r = oracle::rho_charpoly(&{
            let p = matmul_all(&triple).unwrap();
            matmul(&p.transpose(), &p).unwrap()
        })
        .sqrt();
        l > r + 1e-6
    });

    let (a, b) = jordan_naive_fixture();
    let fixture = Finding::from_pair(FindingKind::JordanNaiveViolation, a, b, &tol).unwrap();
    let fixture_ok = fixture.gap == 1.0;

    let sfirst = search_violation(
        ViolationClaim::SfirstMiddle,
        &SearchConfig {
            seed: 1,
            n_range: (2, 4),
            density: 1.0,
            trials: 1000,
            target_gap: 1e-6,
        },
        &tol,
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sfirst.jsonl");
    append_outcome(&path, &sfirst).unwrap();
    let loaded = load_outcomes(&path).unwrap();
    let sfirst_ok = loaded == vec![sfirst.clone()]
        && match &sfirst {
            SearchOutcome::Found(f) => f.reproduces(&tol, 1e-9).unwrap(),
            SearchOutcome::Exhausted(_) => true,
        };
    let sfirst_desc = match &sfirst {
        SearchOutcome::Found(f) => format!(
            "found (trial {}, gap {:.3e})",
            f.seed_trail.as_ref().map_or(0, |t| t.trial),
            f.gap
        ),
        SearchOutcome::Exhausted(e) => format!("exhausted (best gap {:.3e})", e.best_gap),
    };
    outcome(
        ineq_ok && jordan_ok && fixture_ok && sfirst_ok,
        format!(
            "inequivalence {ineq_ok}, jordan_naive search {jordan_ok}, fixture {fixture_ok}, \
             sfirst_middle {sfirst_desc} persisted {sfirst_ok}"
        ),
    )
}

fn random_polynomial_kernel<R: Rng>(rng: &mut R) -> String {
    let mut terms = Vec::new();
    for a in 0..=2 {
        for b in 0..=2 {
            if rng.gen_bool(0.5) {
                terms.push(format!("{:.3}*x^{a}*y^{b}", rng.gen_range(0.0..2.0)));
            }
        }
    }
    if terms.is_empty() {
        terms.push("1".into());
    }
    terms.join(" + ")
}

fn criterion_7() -> Outcome {
    let mut held = 0;
    for trial in 0..20u64 {
        let mut rng = trial_rng(7, trial);
        let count = rng.gen_range(1..=3);
        let kernels: Vec<KernelSpec> = (0..count)
            .map(|_| KernelSpec::new(&random_polynomial_kernel(&mut rng)).unwrap())
            .collect();
        if kernel_geomean_check(&kernels, 64, &cfg()).unwrap().holds {
            held += 1;
        }
    }
    let spec = TruncatedMatrixSpec::new("2^(-(i+j))", vec![2, 4, 8, 16]).unwrap();
    let seq = truncation_sequence(&spec, &cfg()).unwrap();
    let err = seq.iter().fold(0.0f64, |e, (n, est)| {
        e.max((est.value - (1.0 - 4f64.powi(-(*n as i32))) / 3.0).abs())
    });
    let monotone = seq.windows(2).all(|w| w[0].1.value <= w[1].1.value + 1e-10);
    outcome(
        held == 20 && err <= 1e-9 && monotone,
        format!("kernel checks held {held}/20; truncation max err {err:.1e}, monotone {monotone}"),
    )
}

fn criterion_8() -> Outcome {
    let mut failures = 0;
    for trial in 0..100u64 {
        let mut rng = trial_rng(8, trial);
        let k = rng.gen_range(1..=4);
        let n = rng.gen_range(1..=5);
        let density = if trial % 2 == 0 { 1.0 } else { 0.5 };
        let mats: Vec<NonNegativeMatrix> = (0..k)
            .map(|_| random_matrix_with(&mut rng, n, density).unwrap())
            .collect();
        let grid = linear_grid(1.0, k as f64, 21).unwrap();
        let r = scan_monotone(&mats, &grid, &cfg()).unwrap();
        if !(r.all_hold() && r.converged) {
            failures += 1;
        }
    }
    let w = scan_numrad(&[m(&[&[0.0, 1.0], &[0.0, 0.0]])], &[1.0, 2.0, 4.0], &cfg()).unwrap();
    let increasing = w[0] < w[1] && w[1] < w[2];
    outcome(
        failures == 0 && increasing,
        format!("{failures}/100 scans failed; numerical-radius control {w:?} strictly increasing {increasing}"),
    )
}

fn criterion_9() -> Outcome {
    let tol = cfg();
    let mut failures = Vec::new();
    let mut oracle_err = 0.0f64;
    for (chain, seed) in [
        (ChainId::SpectralMapExp, 90),
        (ChainId::SpectralMapResolvent, 91),
    ] {
        for trial in 0..100u64 {
            let mut rng = trial_rng(seed, trial);
            let n = rng.gen_range(1..=5);
            let density = if trial % 2 == 0 { 1.0 } else { 0.5 };
            let (mats, params) = random_instance(chain, &mut rng, n, density, &tol).unwrap();
            let report = evaluate_chain_with_tol(chain, &mats, &params, &tol, 1e-8).unwrap();
            if !report.holds {
                failures.push(format!("{chain}#{trial}"));
            }
            let prod = matmul_all(&mats).unwrap();
            let rho = spectral_radius(&prod, &tol).unwrap().value;
            if rho >= 5.0 {
                failures.push(format!("{chain}#{trial} rho={rho}"));
            }
            let e = if chain == ChainId::SpectralMapExp {
                oracle::max_rel_diff(
                    &matrix_exp(&prod, &tol).unwrap(),
                    &oracle::exp_taylor(&prod),
                )
            } else {
                let lambda = params.lambda.unwrap();
                oracle::max_rel_diff(
                    &resolvent(&prod, lambda, &tol).unwrap(),
                    &oracle::resolvent_neumann(&prod, lambda),
                )
            };
            oracle_err = oracle_err.max(e);
        }
    }
    let nil = m(&[&[0.0, 1.0], &[0.0, 0.0]]);
    let exp_nil = matrix_exp(&nil, &tol).unwrap() == m(&[&[1.0, 1.0], &[0.0, 1.0]]);
    let res = resolvent(&nil, 2.0, &tol).unwrap() == m(&[&[0.5, 0.25], &[0.0, 0.5]]);
    let res_scalar = resolvent(&m(&[&[0.5]]), 1.0, &tol).unwrap() == m(&[&[2.0]]);
    outcome(
        failures.is_empty() && exp_nil && res && res_scalar && oracle_err <= 1e-9,
        format!(
            "{} failures {:?}; exp(N) = I + N {exp_nil}; resolvent fixtures {res} {res_scalar}; \
             exp/resolvent vs series oracle {oracle_err:.1e}",
            failures.len(),
            failures.iter().take(3).collect::<Vec<_>>()
        ),
    )
}

fn criterion_10() -> Outcome {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests");
    let fx = |name: &str| {
        root.join("fixtures")
            .join(name)
            .to_string_lossy()
            .into_owned()
    };
    let (a, b, ones, shift) = (
        fx("a.json"),
        fx("b.json"),
        fx("ones.json"),
        fx("shift.json"),
    );
    let cases: Vec<(Vec<&str>, &str)> = vec![
        (vec!["demo"], "demo.json"),
        (
            vec!["check", "--chain", "huang", "--in", &a, "--in", &b],
            "check_huang.json",
        ),
        (
            vec!["check", "--chain", "audenaert", "--in", &a, "--in", &b],
            "check_audenaert.json",
        ),
        (
            vec![
                "check",
                "--chain",
                "two_matrix_t",
                "--t",
                "1.5",
                "--in",
                &a,
                "--in",
                &b,
            ],
            "check_two_matrix_t.json",
        ),
        (
            vec!["scan", "--in", &ones, "--grid", "1:4:4", "--format", "csv"],
            "scan_ones.csv",
        ),
        (vec!["scan", "--in", &a, "--in", &b], "scan_ab.json"),
        (
            vec![
                "scan", "--in", &shift, "--fn", "numrad", "--grid", "1:4:4", "--format", "csv",
            ],
            "scan_numrad_shift.csv",
        ),
        (
            vec!["spectral", "--fn", "rho", "--in", &a],
            "spectral_rho_a.json",
        ),
        (
            vec!["spectral", "--fn", "norm2", "--in", &a],
            "spectral_norm2_a.json",
        ),
        (
            vec!["spectral", "--fn", "numrad", "--in", &shift],
            "spectral_numrad_shift.json",
        ),
        (
            vec!["spectral", "--fn", "maxtimes", "--in", &a],
            "spectral_maxtimes_a.json",
        ),
    ];
    let mut mismatched = Vec::new();
    for (args, golden) in &cases {
        let out = Command::new(env!("CARGO_BIN_EXE_hadamard"))
            .args(args)
            .output()
            .unwrap();
        let expected = std::fs::read(root.join("golden").join(golden)).unwrap();
        if out.status.code() != Some(0) || out.stdout != expected {
            mismatched.push(*golden);
        }
    }
    outcome(
        mismatched.is_empty(),
        format!(
            "{}/{} goldens byte-identical {mismatched:?}",
            cases.len() - mismatched.len(),
            cases.len()
        ),
    )
}

fn main() {
    let criteria: [(u32, &str, fn() -> Outcome, Option<Duration>); 10] = [
        (
            1,
            "reference fixtures",
            criterion_1,
            Some(Duration::from_secs(1)),
        ),
        (
            2,
            "chain property suite",
            criterion_2,
            Some(Duration::from_secs(120)),
        ),
        (
            3,
            "oracle agreement",
            criterion_3,
            Some(Duration::from_secs(30)),
        ),
        (4, "block-cyclic identity", criterion_4, None),
        (5, "max-times limit", criterion_5, None),
        (6, "counterexample searches", criterion_6, None),
        (7, "kernels and finite sections", criterion_7, None),
        (8, "monotone scans", criterion_8, None),
        (9, "spectral-mapping chains", criterion_9, None),
        (10, "CLI golden files", criterion_10, None),
    ];
    let mut failed = 0;
    for (id, name, run, budget) in criteria {
        let start = Instant::now();
        let out = run();
        let elapsed = start.elapsed();
        let in_time = budget.map_or(true, |b| elapsed <= b);
        let pass = out.pass && in_time;
        if !pass {
            failed += 1;
        }
        let budget_note = budget.map_or(String::new(), |b| format!(" (budget {}s)", b.as_secs()));
        println!(
            "criterion {id:>2} {}: {name}: {} [{:.2}s{budget_note}]",
            if pass { "PASS" } else { "FAIL" },
            out.detail,
            elapsed.as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}
