//! Random instances, counterexample searches and tightness statistics.
//!
//! All randomness comes from ChaCha8 (`rand_chacha`), seeded with
//! `seed_from_u64(seed)`; trial `k` of a search uses stream `k` of that seed.
//! Entries are drawn with `rand`'s standard `f64` sampler (53 random bits,
//! uniform on `[0, 1)`), so instances are identical on every platform.
//!
//! Searches evaluate trials in parallel, in fixed-size blocks, and report the
//! hit with the lowest trial index, so the outcome does not depend on thread
//! scheduling.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chains::{evaluate_chain, Arity, ChainId, ChainParams, ParamNeed};
use crate::error::{Error, Result};
use crate::nnmatrix::{
    hadamard_product, hadamard_product_all, matmul, matmul_all, NonNegativeMatrix,
};
use crate::spectral::{
    operator_norm, spectral_radius, NormKind, SpectralEstimate, ToleranceConfig,
};

pub const GENERATOR: &str = "chacha8";
pub const MAX_TRIALS: u64 = 10_000_000;
const BLOCK: u64 = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub seed: u64,
    /// Inclusive range of matrix sizes.
    pub n_range: (usize, usize),
    pub density: f64,
    pub trials: u64,
    pub target_gap: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            seed: 1,
            n_range: (2, 4),
            density: 1.0,
            trials: 1000,
            target_gap: 1e-6,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.n_range;
        if lo == 0 || hi > 64 || lo > hi {
            return Err(Error::Domain(format!(
                "n_range {lo}..={hi} must lie within 1..=64"
            )));
        }
        check_density(self.density)?;
        if self.trials == 0 || self.trials > MAX_TRIALS {
            return Err(Error::Domain(format!(
                "trials = {} must lie in 1..={MAX_TRIALS}",
                self.trials
            )));
        }
        if !(self.target_gap.is_finite() && self.target_gap > 0.0) {
            return Err(Error::Domain(format!(
                "target_gap = {} must be positive",
                self.target_gap
            )));
        }
        Ok(())
    }
}

fn check_density(density: f64) -> Result<()> {
    if density > 0.0 && density <= 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "density = {density} must lie in (0, 1]"
        )))
    }
}

/// Generator for trial `trial` of a search seeded with `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// `n x n` matrix with entries uniform on `[0, 1)`, each kept with
/// probability `density`. Per entry the value is drawn first, then the mask.
pub fn random_matrix_with<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    density: f64,
) -> Result<NonNegativeMatrix> {
    if n == 0 {
        return Err(Error::Domain("n must be at least 1".into()));
    }
    check_density(density)?;
    let data = (0..n * n)
        .map(|_| {
            let v: f64 = rng.gen();
            let keep = rng.gen::<f64>() < density;
            if keep {
                v
            } else {
                0.0
            }
        })
        .collect();
    NonNegativeMatrix::new(n, n, data)
}

pub fn random_matrix(n: usize, density: f64, seed: u64) -> Result<NonNegativeMatrix> {
    random_matrix_with(&mut ChaCha8Rng::seed_from_u64(seed), n, density)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FindingKind {
    Inequivalence,
    SfirstViolation,
    JordanNaiveViolation,
    ExtremalSlack,
}

/// Which false claim a violation search targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationClaim {
    /// `rho^{1/2}((A∘A)(B∘B)) <= rho^{1/2}(AB∘BA)`
    SfirstMiddle,
    /// `||A∘B∘A|| <= ||ABA||`
    JordanNaive,
}

impl std::str::FromStr for ViolationClaim {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sfirst_middle" => Ok(ViolationClaim::SfirstMiddle),
            "jordan_naive" => Ok(ViolationClaim::JordanNaive),
            other => Err(Error::Contract(format!(
                "unknown claim `{other}`; valid: sfirst_middle, jordan_naive"
            ))),
        }
    }
}

/// How to regenerate a finding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedTrail {
    pub generator: String,
    pub seed: u64,
    pub trial: u64,
    pub n: usize,
    pub density: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Finding {
    pub kind: FindingKind,
    pub matrices: Vec<NonNegativeMatrix>,
    pub values: BTreeMap<String, f64>,
    pub gap: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed_trail: Option<SeedTrail>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain: Option<ChainId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<ChainParams>,
}

/// Outcome of a search that ran all its trials without a hit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exhausted {
    pub exhausted: FindingKind,
    pub config: SearchConfig,
    /// Largest gap seen over all trials (may be negative).
    pub best_gap: f64,
    pub best_trial: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SearchOutcome {
    Found(Finding),
    Exhausted(Exhausted),
}

impl SearchOutcome {
    pub fn finding(&self) -> Option<&Finding> {
        match self {
            SearchOutcome::Found(f) => Some(f),
            SearchOutcome::Exhausted(_) => None,
        }
    }
}

/// Values and gap for one pair under a given finding kind. `None` when an
/// estimate did not converge.
fn pair_values(
    kind: FindingKind,
    a: &NonNegativeMatrix,
    b: &NonNegativeMatrix,
    cfg: &ToleranceConfig,
) -> Result<Option<(BTreeMap<String, f64>, f64)>> {
    let (left, right, lv, rv, gap): (
        &str,
        &str,
        SpectralEstimate,
        SpectralEstimate,
        fn(f64, f64) -> f64,
    );
    match kind {
        FindingKind::Inequivalence => {
            let ab = matmul(a, b)?;
            let ba = matmul(b, a)?;
            left = "rho(AB∘BA)";
            right = "rho(AB∘AB)";
            lv = spectral_radius(&hadamard_product(&ab, &ba)?, cfg)?;
            rv = spectral_radius(&hadamard_product(&ab, &ab)?, cfg)?;
            gap = |l, r| (l - r).abs() / r.max(1.0);
        }
        FindingKind::SfirstViolation => {
            let aa = hadamard_product(a, a)?;
            let bb = hadamard_product(b, b)?;
            let ab = matmul(a, b)?;
            let ba = matmul(b, a)?;
            left = "rho^{1/2}((A∘A)(B∘B))";
            right = "rho^{1/2}(AB∘BA)";
            lv = spectral_radius(&matmul(&aa, &bb)?, cfg)?.map(f64::sqrt);
            rv = spectral_radius(&hadamard_product(&ab, &ba)?, cfg)?.map(f64::sqrt);
            gap = |l, r| l - r;
        }
        FindingKind::JordanNaiveViolation => {
            left = "||A∘B∘A||";
            right = "||ABA||";
            let aba = matmul_all(&[a.clone(), b.clone(), a.clone()])?;
            lv = operator_norm(
                &hadamard_product_all(&[a.clone(), b.clone(), a.clone()])?,
                NormKind::Two,
                cfg,
            )?;
            rv = operator_norm(&aba, NormKind::Two, cfg)?;
            gap = |l, r| l - r;
        }
        FindingKind::ExtremalSlack => {
            return Err(Error::Contract(
                "extremal_slack findings are evaluated through their chain".into(),
            ))
        }
    }
    if !(lv.converged && rv.converged) {
        return Ok(None);
    }
    let values = BTreeMap::from([(left.to_string(), lv.value), (right.to_string(), rv.value)]);
    Ok(Some((values, gap(lv.value, rv.value))))
}

impl Finding {
    /// Builds a finding for a fixed pair, e.g. a known witness.
    pub fn from_pair(
        kind: FindingKind,
        a: NonNegativeMatrix,
        b: NonNegativeMatrix,
        cfg: &ToleranceConfig,
    ) -> Result<Self> {
        let (values, gap) = pair_values(kind, &a, &b, cfg)?
            .ok_or_else(|| Error::Numerical("estimates did not converge".into()))?;
        Ok(Finding {
            kind,
            matrices: vec![a, b],
            values,
            gap,
            seed_trail: None,
            chain: None,
            params: None,
        })
    }

    /// Recomputes `(values, gap)` from the stored matrices.
    pub fn reevaluate(&self, cfg: &ToleranceConfig) -> Result<(BTreeMap<String, f64>, f64)> {
        if self.kind == FindingKind::ExtremalSlack {
            let chain = self
                .chain
                .ok_or_else(|| Error::Contract("extremal_slack finding without chain".into()))?;
            let params = self.params.clone().unwrap_or_default();
            let report = evaluate_chain(chain, &self.matrices, &params, cfg)?;
            return Ok((report_values(&report.terms), report.min_slack));
        }
        let [a, b] = self.matrices.as_slice() else {
            return Err(Error::Contract(format!(
                "{:?} finding needs exactly two matrices",
                self.kind
            )));
        };
        pair_values(self.kind, a, b, cfg)?
            .ok_or_else(|| Error::Numerical("estimates did not converge".into()))
    }

    /// Re-evaluates and compares every stored value within `rel` relative error.
    pub fn reproduces(&self, cfg: &ToleranceConfig, rel: f64) -> Result<bool> {
        let (values, gap) = self.reevaluate(cfg)?;
        let close = |x: f64, y: f64| (x - y).abs() <= rel * x.abs().max(y.abs()).max(1.0);
        Ok(values.len() == self.values.len()
            && self
                .values
                .iter()
                .all(|(k, v)| values.get(k).is_some_and(|w| close(*v, *w)))
            && close(gap, self.gap))
    }
}

fn report_values(terms: &[crate::chains::Term]) -> BTreeMap<String, f64> {
    terms
        .iter()
        .map(|t| (format!("{}#{}", t.label, t.group), t.value))
        .collect()
}

/// Runs `eval` over trials `0..trials` in parallel blocks and returns either the
/// lowest-index hit or the best gap seen.
fn run_trials<T: Send>(
    trials: u64,
    eval: impl Fn(u64) -> Result<(Option<T>, f64)> + Sync,
) -> Result<std::result::Result<T, (f64, u64)>> {
    let mut best = (f64::NEG_INFINITY, 0u64);
    let mut start = 0;
    while start < trials {
        let end = (start + BLOCK).min(trials);
        let results: Vec<(u64, Result<(Option<T>, f64)>)> =
            (start..end).into_par_iter().map(|k| (k, eval(k))).collect();
        for (k, r) in results {
            let (hit, gap) = r?;
            if let Some(hit) = hit {
                return Ok(Ok(hit));
            }
            if gap > best.0 {
                best = (gap, k);
            }
        }
        start = end;
    }
    Ok(Err(best))
}

fn random_pair(
    cfg: &SearchConfig,
    trial: u64,
) -> Result<(NonNegativeMatrix, NonNegativeMatrix, SeedTrail)> {
    let mut rng = trial_rng(cfg.seed, trial);
    let n = rng.gen_range(cfg.n_range.0..=cfg.n_range.1);
    let a = random_matrix_with(&mut rng, n, cfg.density)?;
    let b = random_matrix_with(&mut rng, n, cfg.density)?;
    let trail = SeedTrail {
        generator: GENERATOR.to_string(),
        seed: cfg.seed,
        trial,
        n,
        density: cfg.density,
    };
    Ok((a, b, trail))
}

fn pair_search(
    kind: FindingKind,
    cfg: &SearchConfig,
    tol: &ToleranceConfig,
    threshold: f64,
) -> Result<SearchOutcome> {
    cfg.validate()?;
    let outcome = run_trials(cfg.trials, |trial| {
        let (a, b, trail) = random_pair(cfg, trial)?;
        let Some((values, gap)) = pair_values(kind, &a, &b, tol)? else {
            return Ok((None, f64::NEG_INFINITY));
        };
        let hit = (gap > threshold).then(|| Finding {
            kind,
            matrices: vec![a, b],
            values,
            gap,
            seed_trail: Some(trail),
            chain: None,
            params: None,
        });
        Ok((hit, gap))
    })?;
    Ok(match outcome {
        Ok(f) => SearchOutcome::Found(f),
        Err((best_gap, best_trial)) => SearchOutcome::Exhausted(Exhausted {
            exhausted: kind,
            config: *cfg,
            best_gap,
            best_trial,
        }),
    })
}

/// First random pair with `|rho(AB∘BA) - rho(AB∘AB)| / max(1, rho(AB∘AB)) > target_gap`.
pub fn search_inequivalence(cfg: &SearchConfig, tol: &ToleranceConfig) -> Result<SearchOutcome> {
    pair_search(FindingKind::Inequivalence, cfg, tol, cfg.target_gap)
}

/// First random pair violating `claim` by more than `target_gap` (and more than
/// `10 * rel_tol`).
pub fn search_violation(
    claim: ViolationClaim,
    cfg: &SearchConfig,
    tol: &ToleranceConfig,
) -> Result<SearchOutcome> {
    let kind = match claim {
        ViolationClaim::SfirstMiddle => FindingKind::SfirstViolation,
        ViolationClaim::JordanNaive => FindingKind::JordanNaiveViolation,
    };
    pair_search(kind, cfg, tol, cfg.target_gap.max(10.0 * tol.rel_tol))
}

/// The classical 2x2 witness against `||A∘B∘A|| <= ||ABA||`.
pub fn jordan_naive_fixture() -> (NonNegativeMatrix, NonNegativeMatrix) {
    (
        NonNegativeMatrix::from_rows(&[[0.0, 1.0], [0.0, 1.0]]).expect("valid fixture"),
        NonNegativeMatrix::from_rows(&[[1.0, 1.0], [0.0, 0.0]]).expect("valid fixture"),
    )
}

/// A 2x2 witness against `rho^{1/2}((A∘A)(B∘B)) <= rho^{1/2}(AB∘BA)`:
/// with `A = E_21`, `B = E_12` the left side is `rho(E_22) = 1` while
/// `AB∘BA = E_22∘E_11 = 0`.
pub fn sfirst_fixture() -> (NonNegativeMatrix, NonNegativeMatrix) {
    (
        NonNegativeMatrix::from_rows(&[[0.0, 0.0], [1.0, 0.0]]).expect("valid fixture"),
        NonNegativeMatrix::from_rows(&[[0.0, 1.0], [0.0, 0.0]]).expect("valid fixture"),
    )
}

fn random_weights<R: Rng + ?Sized>(rng: &mut R, len: usize, exactly_one: bool) -> Vec<f64> {
    let raw: Vec<f64> = (0..len).map(|_| 1.0 - rng.gen::<f64>()).collect();
    let total: f64 = raw.iter().sum();
    let scale = if exactly_one {
        1.0
    } else {
        1.0 + rng.gen::<f64>()
    };
    raw.iter().map(|v| v / total * scale).collect()
}

/// A random instance of `chain` of size `n`: operands and legal parameters.
///
/// Operands for the exponential and power-series chains are rescaled so that
/// `rho(A1...Am) <= 4`; the resolvent chain uses `lambda = rho(A1...Am) + 1`.
pub fn random_instance<R: Rng + ?Sized>(
    chain: ChainId,
    rng: &mut R,
    n: usize,
    density: f64,
    tol: &ToleranceConfig,
) -> Result<(Vec<NonNegativeMatrix>, ChainParams)> {
    let mut params = ChainParams::default();
    let count = match chain.arity() {
        Arity::Exactly(k) => k,
        Arity::AtLeast(k) => rng.gen_range(k.max(1)..=5),
        Arity::Grid => {
            let rows = rng.gen_range(1..=3);
            let cols = rng.gen_range(1..=5);
            params.grid_rows = Some(rows);
            params.alphas = Some(random_weights(
                rng,
                cols,
                chain.param_need() == ParamNeed::WeightsExactlyOne,
            ));
            rows * cols
        }
    };
    let mut mats = (0..count)
        .map(|_| random_matrix_with(rng, n, density))
        .collect::<Result<Vec<_>>>()?;
    let m = mats.len() as f64;
    match chain.param_need() {
        ParamNeed::None => {}
        ParamNeed::TAtLeastOne => params.t = Some(1.0 + 3.0 * rng.gen::<f64>()),
        ParamNeed::TUpToM => params.t = Some(1.0 + (m - 1.0) * rng.gen::<f64>()),
        ParamNeed::TUpToTwo => params.t = Some(1.0 + rng.gen::<f64>()),
        ParamNeed::WeightsAtLeastOne | ParamNeed::WeightsExactlyOne => {
            if params.alphas.is_none() {
                params.alphas = Some(random_weights(
                    rng,
                    mats.len(),
                    chain.param_need() == ParamNeed::WeightsExactlyOne,
                ));
            }
        }
        ParamNeed::Lambda => {}
        ParamNeed::Coefficients => {
            let len = rng.gen_range(1..=6);
            params.coeffs = Some((0..len).map(|_| rng.gen::<f64>()).collect());
        }
    }
    if matches!(
        chain,
        ChainId::SpectralMapExp | ChainId::SpectralMapResolvent | ChainId::PowerSeries
    ) {
        let rho = spectral_radius(&matmul_all(&mats)?, tol)?.value;
        if rho > 4.0 {
            let c = (4.0 / rho).powf(1.0 / m);
            mats = mats
                .iter()
                .map(|a| a.scale(c))
                .collect::<Result<Vec<_>>>()?;
        }
        if chain == ChainId::SpectralMapResolvent {
            params.lambda = Some(spectral_radius(&matmul_all(&mats)?, tol)?.value + 1.0);
        }
    }
    Ok((mats, params))
}

/// Distribution of `min_slack` for `chain` over random instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TightnessStats {
    pub chain: ChainId,
    pub trials: u64,
    pub min_slack: f64,
    pub median_slack: f64,
    pub max_slack: f64,
    pub inconclusive: u64,
    pub violations: u64,
    /// Instance attaining the smallest slack.
    pub extremal: Option<Finding>,
}

pub fn tightness_stats(
    chain: ChainId,
    cfg: &SearchConfig,
    tol: &ToleranceConfig,
) -> Result<TightnessStats> {
    cfg.validate()?;
    let results = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(cfg.seed, trial);
            let n = rng.gen_range(cfg.n_range.0..=cfg.n_range.1);
            let (mats, params) = random_instance(chain, &mut rng, n, cfg.density, tol)?;
            let report = evaluate_chain(chain, &mats, &params, tol)?;
            Ok((trial, n, mats, report))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut slacks = Vec::with_capacity(results.len());
    let mut inconclusive = 0;
    let mut violations = 0;
    let mut extremal: Option<Finding> = None;
    for (trial, n, mats, report) in results {
        if report.inconclusive {
            inconclusive += 1;
            continue;
        }
        if report.violated() {
            violations += 1;
        }
        slacks.push(report.min_slack);
        if extremal.as_ref().is_none_or(|f| report.min_slack < f.gap) {
            extremal = Some(Finding {
                kind: FindingKind::ExtremalSlack,
                values: report_values(&report.terms),
                gap: report.min_slack,
                matrices: mats,
                seed_trail: Some(SeedTrail {
                    generator: GENERATOR.to_string(),
                    seed: cfg.seed,
                    trial,
                    n,
                    density: cfg.density,
                }),
                chain: Some(chain),
                params: Some(report.params),
            });
        }
    }
    slacks.sort_by(f64::total_cmp);
    let pick = |i: usize| slacks.get(i).copied().unwrap_or(f64::NAN);
    let median = if slacks.is_empty() {
        f64::NAN
    } else if slacks.len() % 2 == 1 {
        pick(slacks.len() / 2)
    } else {
        0.5 * (pick(slacks.len() / 2 - 1) + pick(slacks.len() / 2))
    };
    Ok(TightnessStats {
        chain,
        trials: cfg.trials,
        min_slack: pick(0),
        median_slack: median,
        max_slack: slacks.last().copied().unwrap_or(f64::NAN),
        inconclusive,
        violations,
        extremal,
    })
}

/// Appends one JSON line per outcome to `path`.
pub fn append_outcome(path: &Path, outcome: &SearchOutcome) -> Result<()> {
    let mut file = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)?;
    let line = serde_json::to_string(outcome)?;
    writeln!(file, "{line}")?;
    Ok(())
}

/// Reads every line of a findings corpus; blank lines are skipped.
pub fn load_outcomes(path: &Path) -> Result<Vec<SearchOutcome>> {
    let file = std::fs::File::open(path)?;
    let mut out = Vec::new();
    for line in std::io::BufReader::new(file).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line)?);
    }
    Ok(out)
}
