//! `hadamard`: evaluate, scan and search Hadamard-product inequalities.
//!
//! Exit codes: 0 success, 1 violation or finding, 2 usage or validation error,
//! 3 numerical non-convergence.

mod output;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use hadamard_core::chains::{linear_grid, scan_monotone, scan_numrad};
use hadamard_core::explorer::{
    append_outcome, jordan_naive_fixture, search_inequivalence, search_violation, tightness_stats,
    SearchConfig, SearchOutcome, ViolationClaim,
};
use hadamard_core::kernelgrid::{
    kernel_geomean_check, truncation_sequence, KernelSpec, TruncatedMatrixSpec,
};
use hadamard_core::nnmatrix::{hadamard_power, hadamard_product_all, matmul_all};
use hadamard_core::spectral::{max_times_radius, numerical_radius, operator_norm, spectral_radius};
use hadamard_core::{
    evaluate_chain, ChainId, ChainParams, Error, NonNegativeMatrix, NormKind, SpectralEstimate,
    ToleranceConfig,
};
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "hadamard",
    version,
    about = "Hadamard-product spectral inequalities"
)]
struct Cli {
    /// Write output here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Functional {
    Rho,
    Norm1,
    Norm2,
    Norminf,
    Numrad,
    Maxtimes,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum ScanFn {
    Monotone,
    Numrad,
}

#[derive(Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum Target {
    Inequivalence,
    SfirstMiddle,
    JordanNaive,
    Tightness,
}

#[derive(Subcommand)]
enum Command {
    /// One spectral functional of one matrix.
    Spectral {
        #[arg(long = "fn", value_enum)]
        func: Functional,
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Evaluate one catalogued chain.
    Check {
        #[arg(long)]
        chain: String,
        #[arg(long = "in", required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        t: Option<f64>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long = "alpha")]
        alphas: Vec<f64>,
        #[arg(long)]
        p: Option<String>,
        /// Rows of the operand grid for grid chains.
        #[arg(long)]
        grid: Option<usize>,
        /// Power-series coefficients c_0, c_1, ...
        #[arg(long = "coeff")]
        coeffs: Vec<f64>,
        /// Coefficients past the truncation, for the error bound.
        #[arg(long = "tail")]
        tail: Vec<f64>,
    },
    /// Scan r(t), N(t) (or the numerical-radius analogue) over a t-grid.
    Scan {
        #[arg(long = "in", required = true)]
        inputs: Vec<PathBuf>,
        /// `start:stop:count`; defaults to `1:m:21`.
        #[arg(long)]
        grid: Option<String>,
        #[arg(long = "fn", value_enum, default_value = "monotone")]
        func: ScanFn,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Random counterexample search or tightness statistics.
    Search {
        #[arg(long, value_enum)]
        target: Target,
        /// Chain for `--target tightness`.
        #[arg(long)]
        chain: Option<String>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, default_value_t = 1.0)]
        density: f64,
        /// Matrix size `k` or inclusive range `lo:hi`.
        #[arg(long, default_value = "2:4")]
        n: String,
        #[arg(long, default_value_t = 1e-6)]
        gap: f64,
        /// Append the outcome to this JSON-lines corpus.
        #[arg(long)]
        findings: Option<PathBuf>,
    },
    /// Kernel geometric-mean check, or finite sections of an infinite matrix.
    Kernel {
        #[arg(long = "formula", required = true)]
        formulas: Vec<String>,
        /// Quadrature grid size.
        #[arg(long, default_value_t = 64)]
        n: usize,
        /// Repeat a single kernel this many times.
        #[arg(long)]
        m: Option<usize>,
        /// Section sizes; switches to finite sections of an (i, j) formula.
        #[arg(long = "size")]
        sizes: Vec<usize>,
    },
    /// Reproduce the reference fixtures.
    Demo,
}

struct Output {
    text: String,
    code: u8,
}

fn json<T: Serialize>(value: &T, code: u8) -> Result<Output, Error> {
    Ok(Output {
        text: output::to_json(value)?,
        code,
    })
}

fn load_matrix(path: &Path) -> Result<NonNegativeMatrix, Error> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Json(format!("{}: {e}", path.display())))
}

fn load_all(paths: &[PathBuf]) -> Result<Vec<NonNegativeMatrix>, Error> {
    paths.iter().map(|p| load_matrix(p)).collect()
}

fn nonconverged(converged: bool) -> u8 {
    if converged {
        0
    } else {
        3
    }
}

#[derive(Serialize)]
struct SpectralOutput<'a> {
    #[serde(rename = "fn")]
    func: &'a str,
    #[serde(flatten)]
    estimate: SpectralEstimate,
}

fn spectral(func: Functional, input: &Path, cfg: &ToleranceConfig) -> Result<Output, Error> {
    let a = load_matrix(input)?;
    let (name, est) = match func {
        Functional::Rho => ("rho", spectral_radius(&a, cfg)?),
        Functional::Norm1 => ("norm1", operator_norm(&a, NormKind::One, cfg)?),
        Functional::Norm2 => ("norm2", operator_norm(&a, NormKind::Two, cfg)?),
        Functional::Norminf => ("norminf", operator_norm(&a, NormKind::Inf, cfg)?),
        Functional::Numrad => ("numrad", numerical_radius(&a, cfg)?),
        Functional::Maxtimes => ("maxtimes", max_times_radius(&a)?),
    };
    json(
        &SpectralOutput {
            func: name,
            estimate: est,
        },
        nonconverged(est.converged),
    )
}

#[allow(clippy::too_many_arguments)]
fn check(
    chain: &str,
    inputs: &[PathBuf],
    t: Option<f64>,
    lambda: Option<f64>,
    alphas: Vec<f64>,
    p: Option<String>,
    grid: Option<usize>,
    coeffs: Vec<f64>,
    tail: Vec<f64>,
    cfg: &ToleranceConfig,
) -> Result<Output, Error> {
    let chain: ChainId = chain.parse()?;
    let params = ChainParams {
        t,
        lambda,
        alphas: (!alphas.is_empty()).then_some(alphas),
        coeffs: (!coeffs.is_empty()).then_some(coeffs),
        tail_coeffs: (!tail.is_empty()).then_some(tail),
        p: p.map(|s| s.parse()).transpose()?,
        grid_rows: grid,
        ..ChainParams::default()
    };
    let mats = load_all(inputs)?;
    let report = evaluate_chain(chain, &mats, &params, cfg)?;
    let code = if report.inconclusive {
        3
    } else if report.holds {
        0
    } else {
        1
    };
    json(&report, code)
}

fn parse_grid(spec: &str) -> Result<Vec<f64>, Error> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || Error::Contract(format!("grid `{spec}` must look like start:stop:count"));
    let [start, stop, count] = parts.as_slice() else {
        return Err(bad());
    };
    let start: f64 = start.trim().parse().map_err(|_| bad())?;
    let stop: f64 = stop.trim().parse().map_err(|_| bad())?;
    let count: usize = count.trim().parse().map_err(|_| bad())?;
    linear_grid(start, stop, count)
}

#[derive(Serialize)]
struct NumradScan {
    t_grid: Vec<f64>,
    w_values: Vec<f64>,
}

fn scan(
    inputs: &[PathBuf],
    grid: Option<String>,
    func: ScanFn,
    format: Format,
    cfg: &ToleranceConfig,
) -> Result<Output, Error> {
    let mats = load_all(inputs)?;
    let grid = parse_grid(&grid.unwrap_or_else(|| format!("1:{}:21", mats.len())))?;
    match func {
        ScanFn::Monotone => {
            let report = scan_monotone(&mats, &grid, cfg)?;
            let code = if !report.converged {
                3
            } else if report.all_hold() {
                0
            } else {
                1
            };
            if format == Format::Csv {
                Ok(Output {
                    text: report.to_csv(),
                    code,
                })
            } else {
                json(&report, code)
            }
        }
        ScanFn::Numrad => {
            let w_values = scan_numrad(&mats, &grid, cfg)?;
            if format == Format::Csv {
                let mut text = String::from("t,w\n");
                for (t, w) in grid.iter().zip(&w_values) {
                    text.push_str(&format!(
                        "{},{}\n",
                        hadamard_core::format_sig17(*t),
                        hadamard_core::format_sig17(*w)
                    ));
                }
                Ok(Output { text, code: 0 })
            } else {
                json(
                    &NumradScan {
                        t_grid: grid,
                        w_values,
                    },
                    0,
                )
            }
        }
    }
}

fn parse_range(spec: &str) -> Result<(usize, usize), Error> {
    let bad = || Error::Contract(format!("size `{spec}` must be `k` or `lo:hi`"));
    match spec.split_once(':') {
        Some((lo, hi)) => Ok((
            lo.trim().parse().map_err(|_| bad())?,
            hi.trim().parse().map_err(|_| bad())?,
        )),
        None => {
            let k = spec.trim().parse().map_err(|_| bad())?;
            Ok((k, k))
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn search(
    target: Target,
    chain: Option<String>,
    seed: u64,
    trials: u64,
    density: f64,
    n: &str,
    gap: f64,
    findings: Option<PathBuf>,
    cfg: &ToleranceConfig,
) -> Result<Output, Error> {
    let config = SearchConfig {
        seed,
        n_range: parse_range(n)?,
        density,
        trials,
        target_gap: gap,
    };
    config.validate()?;
    let outcome = match target {
        Target::Tightness => {
            let chain: ChainId = chain
                .ok_or_else(|| Error::Contract("--target tightness needs --chain".into()))?
                .parse()?;
            let stats = tightness_stats(chain, &config, cfg)?;
            if let (Some(path), Some(f)) = (&findings, &stats.extremal) {
                append_outcome(path, &SearchOutcome::Found(f.clone()))?;
            }
            let code = if stats.violations > 0 { 1 } else { 0 };
            return json(&stats, code);
        }
        Target::Inequivalence => search_inequivalence(&config, cfg)?,
        Target::SfirstMiddle => search_violation(ViolationClaim::SfirstMiddle, &config, cfg)?,
        Target::JordanNaive => search_violation(ViolationClaim::JordanNaive, &config, cfg)?,
    };
    if let Some(path) = &findings {
        append_outcome(path, &outcome)?;
    }
    let code = if outcome.finding().is_some() { 1 } else { 0 };
    json(&outcome, code)
}

#[derive(Serialize)]
struct Section {
    size: usize,
    rho: SpectralEstimate,
}

fn kernel(
    formulas: &[String],
    n: usize,
    m: Option<usize>,
    sizes: Vec<usize>,
    cfg: &ToleranceConfig,
) -> Result<Output, Error> {
    if !sizes.is_empty() {
        let [formula] = formulas else {
            return Err(Error::Contract(
                "finite sections take exactly one --formula".into(),
            ));
        };
        let spec = TruncatedMatrixSpec::new(formula, sizes)?;
        let seq: Vec<Section> = truncation_sequence(&spec, cfg)?
            .into_iter()
            .map(|(size, rho)| Section { size, rho })
            .collect();
        let converged = seq.iter().all(|s| s.rho.converged);
        return json(&seq, nonconverged(converged));
    }
    let mut kernels = formulas
        .iter()
        .map(|f| KernelSpec::new(f))
        .collect::<Result<Vec<_>, _>>()?;
    if let Some(m) = m {
        if kernels.len() != 1 || m == 0 {
            return Err(Error::Contract(
                "--m repeats exactly one --formula, m >= 1".into(),
            ));
        }
        kernels = vec![kernels[0].clone(); m];
    }
    let report = kernel_geomean_check(&kernels, n, cfg)?;
    let code = if report.inconclusive {
        3
    } else if report.holds {
        0
    } else {
        1
    };
    json(&report, code)
}

#[derive(Serialize)]
struct Fixture {
    name: &'static str,
    claim: &'static str,
    matrices: Vec<NonNegativeMatrix>,
    values: BTreeMap<String, f64>,
    expected: BTreeMap<String, f64>,
    matches: bool,
}

#[derive(Serialize)]
struct Demo {
    fixtures: Vec<Fixture>,
    all_match: bool,
}

fn fixture(
    name: &'static str,
    claim: &'static str,
    matrices: Vec<NonNegativeMatrix>,
    pairs: Vec<(String, f64, f64)>,
    tol: f64,
) -> Fixture {
    let matches = pairs.iter().all(|(_, v, e)| (v - e).abs() <= tol);
    Fixture {
        name,
        claim,
        matrices,
        values: pairs.iter().map(|(k, v, _)| (k.clone(), *v)).collect(),
        expected: pairs.into_iter().map(|(k, _, e)| (k, e)).collect(),
        matches,
    }
}

fn demo(cfg: &ToleranceConfig) -> Result<Output, Error> {
    let ones = NonNegativeMatrix::ones(2, 2)?;
    let mut pairs = vec![(
        "rho(A)".to_string(),
        spectral_radius(&ones, cfg)?.value,
        2.0,
    )];
    for t in [1.0, 2.0, 4.0] {
        let r = spectral_radius(&hadamard_power(&ones, t)?, cfg)?
            .value
            .powf(1.0 / t);
        pairs.push((format!("rho(A^({t}))^(1/{t})"), r, 2f64.powf(1.0 / t)));
    }
    let all_ones = fixture(
        "all_ones",
        "rho(A) = 2 and rho(A^(t))^(1/t) = 2^(1/t) decreases to the max-times eigenvalue 1",
        vec![ones],
        pairs,
        1e-9,
    );

    let shift = NonNegativeMatrix::from_rows(&[[0.0, 1.0], [0.0, 0.0]])?;
    let w = numerical_radius(&shift, cfg)?.value;
    let shift_fx = fixture(
        "nilpotent_shift",
        "w(A) = 1/2 while w(A^(t)) = 1/2 for every t, so (w(A^(t)))^(1/t) increases",
        vec![shift],
        vec![("w(A)".to_string(), w, 0.5)],
        1e-10,
    );

    let (a, b) = jordan_naive_fixture();
    let triple = [a.clone(), b.clone(), a.clone()];
    let lhs = operator_norm(&hadamard_product_all(&triple)?, NormKind::Two, cfg)?.value;
    let rhs = operator_norm(&matmul_all(&triple)?, NormKind::Two, cfg)?.value;
    let jordan = fixture(
        "jordan_naive",
        "||A∘B∘A|| = 1 > 0 = ||ABA||: the Jordan-product norm bound fails without a transpose",
        vec![a, b],
        vec![
            ("||A∘B∘A||".to_string(), lhs, 1.0),
            ("||ABA||".to_string(), rhs, 0.0),
        ],
        0.0,
    );

    let fixtures = vec![all_ones, shift_fx, jordan];
    let all_match = fixtures.iter().all(|f| f.matches);
    json(
        &Demo {
            fixtures,
            all_match,
        },
        if all_match { 0 } else { 1 },
    )
}

fn run(cli: Cli) -> Result<Output, Error> {
    let cfg = ToleranceConfig::default();
    match cli.command {
        Command::Spectral { func, input } => spectral(func, &input, &cfg),
        Command::Check {
            chain,
            inputs,
            t,
            lambda,
            alphas,
            p,
            grid,
            coeffs,
            tail,
        } => check(
            &chain, &inputs, t, lambda, alphas, p, grid, coeffs, tail, &cfg,
        ),
        Command::Scan {
            inputs,
            grid,
            func,
            format,
        } => scan(&inputs, grid, func, format, &cfg),
        Command::Search {
            target,
            chain,
            seed,
            trials,
            density,
            n,
            gap,
            findings,
        } => search(
            target, chain, seed, trials, density, &n, gap, findings, &cfg,
        ),
        Command::Kernel {
            formulas,
            n,
            m,
            sizes,
        } => kernel(&formulas, n, m, sizes, &cfg),
        Command::Demo => demo(&cfg),
    }
}

fn error_code(e: &Error) -> u8 {
    match e {
        Error::Numerical(_) | Error::Range(_) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out_path = cli.out.clone();
    match run(cli) {
        Ok(out) => {
            if let Some(path) = out_path {
                if let Err(e) = std::fs::write(&path, &out.text) {
                    eprintln!("error: {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            } else {
                print!("{}", out.text);
            }
            ExitCode::from(out.code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(error_code(&e))
        }
    }
}
