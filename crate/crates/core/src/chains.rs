//! The inequality-chain catalog.
//!
//! Each [`ChainId`] names one chain `t_1 <= t_2 <= ... <= t_k` of scalar terms
//! built from spectral radii, operator norms and numerical radii of Hadamard
//! and ordinary products. [`evaluate_chain`] computes every term and checks
//! adjacent pairs with a relative-plus-absolute tolerance:
//! `t_i <= t_{i+1} + tol * max(1, t_{i+1})`.
//!
//! Some chains bundle several sub-chains (for instance the spectral radius,
//! norm and numerical radius versions of the two-matrix interpolation). Terms
//! then carry a `group` index and only neighbours within one group are
//! compared.
//!
//! Entrywise inequalities `X <= Y` are reported as the two-term chain
//! `max_ij (x_ij - y_ij)/max(1, y_ij) <= 0`, which is the exact criterion used
//! by [`elementwise_le`](crate::nnmatrix::elementwise_le).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nnmatrix::{
    cyclic_products, cyclic_products_any, elementwise_excess, hadamard_power, hadamard_product,
    hadamard_product_all, hadamard_weighted_geomean, matmul, matmul_all, NonNegativeMatrix,
    WeightVector,
};
use crate::spectral::{
    matrix_exp, numerical_radius, operator_norm, resolvent, spectral_radius, Method, NormKind,
    SpectralEstimate, ToleranceConfig,
};

/// Tolerance used when comparing neighbouring chain terms.
pub const DEFAULT_CHAIN_TOL: f64 = 1e-9;

macro_rules! chain_ids {
    ($($variant:ident => $name:literal),+ $(,)?) => {
        /// Identifier of one catalogued inequality chain.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        pub enum ChainId {
            $(#[serde(rename = $name)] $variant,)+
        }

        impl ChainId {
            pub const ALL: &'static [ChainId] = &[$(ChainId::$variant,)+];

            pub fn as_str(&self) -> &'static str {
                match self {
                    $(ChainId::$variant => $name,)+
                }
            }
        }

        impl std::str::FromStr for ChainId {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($name => Ok(ChainId::$variant),)+
                    other => Err(Error::Contract(format!(
                        "unknown chain `{other}`; valid ids: {}",
                        ChainId::ALL.iter().map(ChainId::as_str).collect::<Vec<_>>().join(", ")
                    ))),
                }
            }
        }
    };
}

chain_ids! {
    Audenaert => "audenaert",
    HornZhang => "horn_zhang",
    SchepCorrected => "schep_corrected",
    PeperkoMix => "peperko_mix",
    Huang => "huang",
    GeoMean => "geo_mean",
    EjsProduct => "ejs_product",
    WeightedMeanRho => "weighted_mean_rho",
    WeightedMeanNorm => "weighted_mean_norm",
    HpowRho => "hpow_rho",
    HpowNorm => "hpow_norm",
    HpowLe => "hpow_le",
    DpGridRho => "dp_grid_rho",
    DpGridNorm => "dp_grid_norm",
    DpGridLe => "dp_grid_le",
    DpGrid => "dp_grid",
    NumradGrid => "numrad_grid",
    NumradWeighted => "numrad_weighted",
    GenP1Rho => "genP1_rho",
    GenP1Norm => "genP1_norm",
    GenP1Numrad => "genP1_numrad",
    TwoMatrixT => "two_matrix_t",
    ChenZhang => "chen_zhang",
    Gram => "gram",
    AltTranspose => "alt_transpose",
    Atb => "atb",
    Abtc => "abtc",
    Jordan => "jordan",
    CsNumrad => "cs_numrad",
    SpectralMapExp => "spectral_map_exp",
    SpectralMapResolvent => "spectral_map_resolvent",
    PowerSeries => "power_series",
}

impl std::fmt::Display for ChainId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How many operands a chain takes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arity {
    Exactly(usize),
    AtLeast(usize),
    /// `k x m` grid given row-major; `k` comes from [`ChainParams::grid_rows`]
    /// and `m` from the length of the weights.
    Grid,
}

/// Which parameters a chain needs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamNeed {
    None,
    /// `t >= 1`.
    TAtLeastOne,
    /// `t in [1, m]`.
    TUpToM,
    /// `t in [1, 2]`.
    TUpToTwo,
    /// Weights with sum `>= 1`.
    WeightsAtLeastOne,
    /// Weights with sum `= 1`.
    WeightsExactlyOne,
    Lambda,
    Coefficients,
}

impl ChainId {
    pub fn arity(&self) -> Arity {
        use ChainId::*;
        match self {
            Audenaert | HornZhang | SchepCorrected | PeperkoMix | TwoMatrixT | Atb | Jordan => {
                Arity::Exactly(2)
            }
            Abtc => Arity::Exactly(3),
            ChenZhang => Arity::AtLeast(2),
            DpGridRho | DpGridNorm | DpGridLe | DpGrid | NumradGrid => Arity::Grid,
            _ => Arity::AtLeast(1),
        }
    }

    pub fn param_need(&self) -> ParamNeed {
        use ChainId::*;
        match self {
            HpowRho | HpowNorm | HpowLe => ParamNeed::TAtLeastOne,
            GenP1Rho | GenP1Norm | ChenZhang | Gram => ParamNeed::TUpToM,
            TwoMatrixT => ParamNeed::TUpToTwo,
            WeightedMeanRho | WeightedMeanNorm | DpGridRho | DpGridNorm | DpGridLe | DpGrid => {
                ParamNeed::WeightsAtLeastOne
            }
            NumradGrid | NumradWeighted => ParamNeed::WeightsExactlyOne,
            SpectralMapResolvent => ParamNeed::Lambda,
            PowerSeries => ParamNeed::Coefficients,
            _ => ParamNeed::None,
        }
    }

    /// Whether the chain uses a selectable operator norm (`p` in {1, 2, inf}).
    pub fn uses_selectable_norm(&self) -> bool {
        use ChainId::*;
        matches!(
            self,
            WeightedMeanNorm | HpowNorm | DpGridNorm | DpGrid | GenP1Norm | TwoMatrixT
        )
    }

    /// The inequality in plain ASCII-ish notation.
    pub fn statement(&self) -> &'static str {
        use ChainId::*;
        match self {
            Audenaert => "rho(A∘B) <= rho^{1/2}((A∘A)(B∘B)) <= rho(AB)",
            HornZhang => "rho(A∘B) <= rho^{1/2}(AB∘BA) <= rho(AB)",
            SchepCorrected => {
                "rho(A∘B) <= rho^{1/2}((A∘A)(B∘B)) <= rho^{1/2}(AB∘AB) <= rho(AB)"
            }
            PeperkoMix => {
                "rho(A∘B) <= rho^{1/2}((A∘A)(B∘B)) <= rho(AB∘AB)^{1/4} rho(BA∘BA)^{1/4} <= rho(AB)"
            }
            Huang => "rho(A1∘...∘Am) <= rho(A1...Am)",
            GeoMean => "rho(A1^(1/m)∘...∘Am^(1/m)) <= rho(A1...Am)^{1/m}",
            EjsProduct => "rho(A1∘...∘Am) <= rho(A1)...rho(Am)",
            WeightedMeanRho => "rho(A1^(a1)∘...∘Am^(am)) <= rho(A1)^a1...rho(Am)^am, sum a >= 1",
            WeightedMeanNorm => "||A1^(a1)∘...∘Am^(am)|| <= ||A1||^a1...||Am||^am, sum a >= 1",
            HpowRho => "rho(A1^(t)...Am^(t)) <= rho(A1...Am)^t, t >= 1",
            HpowNorm => "||A1^(t)...Am^(t)|| <= ||A1...Am||^t, t >= 1",
            HpowLe => "A1^(t)...Am^(t) <= (A1...Am)^(t) entrywise, t >= 1",
            DpGridRho => "rho(prod_i ∘_j Aij^(aj)) <= prod_j rho(A1j...Akj)^aj",
            DpGridNorm => "||prod_i ∘_j Aij^(aj)|| <= prod_j ||A1j...Akj||^aj",
            DpGridLe => "prod_i ∘_j Aij^(aj) <= ∘_j (A1j...Akj)^(aj) entrywise",
            DpGrid => "entrywise, norm and spectral-radius grid inequalities together",
            NumradGrid => "w(prod_i ∘_j Aij^(aj)) <= prod_j w(A1j...Akj)^aj, sum a = 1",
            NumradWeighted => "w(A1^(a1)∘...∘Am^(am)) <= w(A1)^a1...w(Am)^am, sum a = 1",
            GenP1Rho => {
                "rho(A1∘...∘Am) <= rho(P1^(1/t)∘...∘Pm^(1/t))^{1/m} <= rho(A1^(t)...Am^(t))^{1/t} \
                 <= rho((A1...Am)^(t))^{1/t} <= rho(A1...Am)"
            }
            GenP1Norm => {
                "||(A1∘...∘Am)^m|| <= ||P1^(1/t)∘...∘Pm^(1/t)|| <= (||P1||...||Pm||)^{1/t} \
                 <= (prod_i ||C_i^(t)||)^{1/t} <= prod_i ||C_i||"
            }
            GenP1Numrad => {
                "w((A1∘...∘Am)^m) <= w(P1^(1/m)∘...∘Pm^(1/m)) <= (w(P1)...w(Pm))^{1/m} \
                 <= (prod_i w(C_i^(m)))^{1/m}"
            }
            TwoMatrixT => "two-matrix interpolation for rho, norm (t in [1,2]) and w (t = 2)",
            ChenZhang => "interpolation between rho(A1∘...∘Am) and rho(A1...Am) through R^{1-t/m}",
            Gram => "||A1∘...∘Am||^2 <= rho(S1∘...∘Sm) <= ... <= rho(S1...Sm), Si = Ai Ai^T",
            AltTranspose => "||A1∘...∘Am||^2 bounded by alternating-transpose products",
            Atb => "||A∘B|| <= rho^{1/2}((A^T B)∘(B^T A)) <= rho(A^T B)",
            Abtc => {
                "||A∘B∘C|| <= rho^{1/6}((A^T B C^T A B^T C)∘(B^T C A^T B C^T A)∘(C^T A B^T C A^T B)) \
                 <= rho^{1/2}(A B^T C A^T B C^T)"
            }
            Jordan => {
                "||A∘B^T∘A|| <= rho^{1/6}((A^T B^T A^T A B A)∘(B A A^T B^T A^T A)∘(A^T A B A A^T B^T)) \
                 <= ||ABA||"
            }
            CsNumrad => "w(A1∘...∘Am) <= (w(A1^(m))...w(Am^(m)))^{1/m}",
            SpectralMapExp => "rho(exp(A1∘...∘Am)) <= rho(exp(A1...Am))",
            SpectralMapResolvent => {
                "rho((lambda I - A1∘...∘Am)^{-1}) <= rho((lambda I - A1...Am)^{-1})"
            }
            PowerSeries => "rho(f(A1∘...∘Am)) <= rho(f(A1...Am)), f with non-negative coefficients",
        }
    }
}

/// Parameters of a chain evaluation. Fields a chain does not use are ignored.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ChainParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphas: Option<Vec<f64>>,
    /// Power-series coefficients `c_0, c_1, ...` (all `>= 0`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<f64>>,
    /// Coefficients beyond the truncation, used only for the error bound.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_coeffs: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<NormKind>,
    /// Number of rows `k` of a `k x m` operand grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_rows: Option<usize>,
    /// Quadrature grid size, set by kernel checks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// `sum_{j > J} c_j rho(A1...Am)^j` for the supplied tail; output only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation_error: Option<f64>,
}

/// One evaluated chain term.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Term {
    pub label: String,
    pub value: f64,
    pub converged: bool,
    pub group: usize,
    #[serde(skip)]
    pub estimate: SpectralEstimate,
}

/// Term-by-term result of one chain evaluation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainReport {
    pub chain: ChainId,
    pub params: ChainParams,
    pub terms: Vec<Term>,
    /// Every adjacent pair (within a group) satisfies the ordering and every
    /// estimate converged.
    pub holds: bool,
    /// Some estimate failed to converge; `holds` is then false but this is not
    /// a violation.
    pub inconclusive: bool,
    /// Smallest `right - left` over compared pairs; negative means out of order.
    pub min_slack: f64,
    pub tol: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl ChainReport {
    /// A genuine violation: out of order with every estimate converged.
    pub fn violated(&self) -> bool {
        !self.holds && !self.inconclusive
    }

    pub fn term(&self, label: &str) -> Option<&Term> {
        self.terms.iter().find(|t| t.label == label)
    }

    pub fn values(&self) -> Vec<f64> {
        self.terms.iter().map(|t| t.value).collect()
    }

    /// Assembles a report from groups of labelled estimates.
    pub fn assemble(
        chain: ChainId,
        params: ChainParams,
        groups: Vec<Vec<(String, SpectralEstimate)>>,
        tol: f64,
    ) -> Self {
        let mut terms = Vec::new();
        for (g, group) in groups.into_iter().enumerate() {
            for (label, est) in group {
                terms.push(Term {
                    label,
                    value: est.value,
                    converged: est.converged,
                    group: g,
                    estimate: est,
                });
            }
        }
        let mut ordered = true;
        let mut min_slack = f64::INFINITY;
        for pair in terms.windows(2) {
            let (l, r) = (&pair[0], &pair[1]);
            if l.group != r.group {
                continue;
            }
            min_slack = min_slack.min(r.value - l.value);
            if !(l.value <= r.value + tol * r.value.max(1.0)) {
                ordered = false;
            }
        }
        let warnings: Vec<String> = terms
            .iter()
            .filter(|t| !t.converged)
            .map(|t| format!("estimate for `{}` did not converge", t.label))
            .collect();
        let inconclusive = !warnings.is_empty();
        ChainReport {
            chain,
            params,
            terms,
            holds: ordered && !inconclusive,
            inconclusive,
            min_slack,
            tol,
            warnings,
        }
    }
}

type Est = SpectralEstimate;

fn pow_est(e: Est, k: f64) -> Est {
    e.map(|v| v.powf(k))
}

fn mul_est(a: Est, b: Est) -> Est {
    Est {
        value: a.value * b.value,
        iterations: a.iterations + b.iterations,
        residual: a.residual.max(b.residual),
        converged: a.converged && b.converged,
        method: a.method,
    }
}

fn prod_est(items: impl IntoIterator<Item = Est>) -> Est {
    items
        .into_iter()
        .fold(Est::exact(1.0, Method::ClosedForm), mul_est)
}

/// Spectral functionals bound to one tolerance config and norm choice.
struct Ctx<'a> {
    cfg: &'a ToleranceConfig,
    p: NormKind,
}

impl Ctx<'_> {
    fn rho(&self, m: &NonNegativeMatrix) -> Result<Est> {
        spectral_radius(m, self.cfg)
    }

    fn norm(&self, m: &NonNegativeMatrix) -> Result<Est> {
        operator_norm(m, self.p, self.cfg)
    }

    fn norm2(&self, m: &NonNegativeMatrix) -> Result<Est> {
        operator_norm(m, NormKind::Two, self.cfg)
    }

    fn w(&self, m: &NonNegativeMatrix) -> Result<Est> {
        numerical_radius(m, self.cfg)
    }
}

fn excess_est(lhs: &NonNegativeMatrix, rhs: &NonNegativeMatrix) -> Result<Est> {
    Ok(Est::exact(
        elementwise_excess(lhs, rhs)?,
        Method::ClosedForm,
    ))
}

fn zero_term() -> (String, Est) {
    ("0".to_string(), Est::exact(0.0, Method::ClosedForm))
}

fn l(s: &str) -> String {
    s.to_string()
}

/// Evaluates `chain` on `mats` with [`DEFAULT_CHAIN_TOL`].
pub fn evaluate_chain(
    chain: ChainId,
    mats: &[NonNegativeMatrix],
    params: &ChainParams,
    cfg: &ToleranceConfig,
) -> Result<ChainReport> {
    evaluate_chain_with_tol(chain, mats, params, cfg, DEFAULT_CHAIN_TOL)
}

fn contract(msg: impl Into<String>) -> Error {
    Error::Contract(msg.into())
}

fn check_square_family(mats: &[NonNegativeMatrix]) -> Result<usize> {
    let first = mats.first().ok_or_else(|| contract("no operands given"))?;
    let n = first.rows();
    for (i, m) in mats.iter().enumerate() {
        if !m.is_square() || m.rows() != n {
            return Err(contract(format!(
                "operand {} is {}x{}; all operands must be square of size {n}",
                i + 1,
                m.rows(),
                m.cols()
            )));
        }
    }
    Ok(n)
}

fn required_t(params: &ChainParams) -> Result<f64> {
    let t = params
        .t
        .ok_or_else(|| contract("parameter t is required"))?;
    if !t.is_finite() {
        return Err(contract(format!("t = {t} must be finite")));
    }
    Ok(t)
}

fn required_weights(params: &ChainParams, len: usize) -> Result<WeightVector> {
    let alphas = params
        .alphas
        .clone()
        .ok_or_else(|| contract("weights (alphas) are required"))?;
    if alphas.len() != len {
        return Err(contract(format!(
            "expected {len} weights, got {}",
            alphas.len()
        )));
    }
    WeightVector::new(alphas).map_err(|e| contract(e.to_string()))
}

/// Validates arity and parameter contracts, returning the effective norm.
fn validate(chain: ChainId, mats: &[NonNegativeMatrix], params: &ChainParams) -> Result<NormKind> {
    let m = mats.len();
    match chain.arity() {
        Arity::Exactly(k) if m != k => {
            return Err(contract(format!(
                "{chain} takes exactly {k} matrices, got {m}"
            )))
        }
        Arity::AtLeast(k) if m < k => {
            return Err(contract(format!(
                "{chain} takes at least {k} matrices, got {m}"
            )))
        }
        Arity::Grid => {
            let k = params
                .grid_rows
                .ok_or_else(|| contract("grid_rows is required for grid chains"))?;
            let cols = params.alphas.as_ref().map_or(0, Vec::len);
            if k == 0 || cols == 0 || k * cols != m {
                return Err(contract(format!(
                    "{m} matrices do not form a {k} x {cols} grid"
                )));
            }
        }
        _ => {}
    }
    check_square_family(mats)?;

    let fm = m as f64;
    match chain.param_need() {
        ParamNeed::None => {}
        ParamNeed::TAtLeastOne => {
            let t = required_t(params)?;
            if t < 1.0 {
                return Err(contract(format!("t = {t} must be >= 1")));
            }
        }
        ParamNeed::TUpToM => {
            let t = required_t(params)?;
            if !(1.0..=fm).contains(&t) {
                return Err(contract(format!("t = {t} must lie in [1, {m}]")));
            }
        }
        ParamNeed::TUpToTwo => {
            let t = required_t(params)?;
            if !(1.0..=2.0).contains(&t) {
                return Err(contract(format!("t = {t} must lie in [1, 2]")));
            }
        }
        ParamNeed::WeightsAtLeastOne | ParamNeed::WeightsExactlyOne => {
            let len = match chain.arity() {
                Arity::Grid => params.alphas.as_ref().map_or(0, Vec::len),
                _ => m,
            };
            let w = required_weights(params, len)?;
            if chain.param_need() == ParamNeed::WeightsExactlyOne && !w.sums_to_one() {
                return Err(contract(format!("weights must sum to 1, got {}", w.sum())));
            }
            if !w.sums_to_at_least_one() {
                return Err(contract(format!(
                    "weights must sum to at least 1, got {}",
                    w.sum()
                )));
            }
        }
        ParamNeed::Lambda => {
            let lambda = params
                .lambda
                .ok_or_else(|| contract("parameter lambda is required"))?;
            if !lambda.is_finite() {
                return Err(contract(format!("lambda = {lambda} must be finite")));
            }
        }
        ParamNeed::Coefficients => {
            let c = params
                .coeffs
                .as_ref()
                .ok_or_else(|| contract("power-series coefficients are required"))?;
            let tail = params.tail_coeffs.as_deref().unwrap_or(&[]);
            if c.is_empty() {
                return Err(contract("power-series coefficient list is empty"));
            }
            if c.iter().chain(tail).any(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(contract(
                    "power-series coefficients must be finite and >= 0",
                ));
            }
        }
    }

    let p = params.p.unwrap_or(NormKind::Two);
    if !chain.uses_selectable_norm() && p != NormKind::Two {
        return Err(contract(format!(
            "{chain} is an l^2 statement; p = {p} is not accepted"
        )));
    }
    Ok(p)
}

/// Evaluates `chain` on `mats`, comparing neighbours with tolerance `tol`.
pub fn evaluate_chain_with_tol(
    chain: ChainId,
    mats: &[NonNegativeMatrix],
    params: &ChainParams,
    cfg: &ToleranceConfig,
    tol: f64,
) -> Result<ChainReport> {
    cfg.validate()?;
    let p = validate(chain, mats, params)?;
    let ctx = Ctx { cfg, p };
    let mut params = params.clone();
    use ChainId::*;
    let groups = match chain {
        Audenaert | HornZhang | SchepCorrected | PeperkoMix => {
            vec![two_matrix_classic(chain, &ctx, &mats[0], &mats[1])?]
        }
        Huang => vec![vec![
            (l("rho(A1∘...∘Am)"), ctx.rho(&hadamard_product_all(mats)?)?),
            (l("rho(A1...Am)"), ctx.rho(&matmul_all(mats)?)?),
        ]],
        GeoMean => {
            let m = mats.len() as f64;
            let roots = mats
                .iter()
                .map(|a| hadamard_power(a, 1.0 / m))
                .collect::<Result<Vec<_>>>()?;
            vec![vec![
                (
                    l("rho(A1^(1/m)∘...∘Am^(1/m))"),
                    ctx.rho(&hadamard_product_all(&roots)?)?,
                ),
                (
                    l("rho(A1...Am)^{1/m}"),
                    pow_est(ctx.rho(&matmul_all(mats)?)?, 1.0 / m),
                ),
            ]]
        }
        EjsProduct => vec![vec![
            (l("rho(A1∘...∘Am)"), ctx.rho(&hadamard_product_all(mats)?)?),
            (
                l("rho(A1)...rho(Am)"),
                prod_est(
                    mats.iter()
                        .map(|a| ctx.rho(a))
                        .collect::<Result<Vec<_>>>()?,
                ),
            ),
        ]],
        WeightedMeanRho | WeightedMeanNorm | NumradWeighted => {
            let w = required_weights(&params, mats.len())?;
            let g = hadamard_weighted_geomean(mats, &w)?;
            let (f, name): (&dyn Fn(&NonNegativeMatrix) -> Result<Est>, &str) = match chain {
                WeightedMeanRho => (&|x| ctx.rho(x), "rho"),
                WeightedMeanNorm => (&|x| ctx.norm(x), "||.||"),
                _ => (&|x| ctx.w(x), "w"),
            };
            let rhs = mats
                .iter()
                .zip(w.alphas())
                .map(|(a, alpha)| Ok(pow_est(f(a)?, *alpha)))
                .collect::<Result<Vec<_>>>()?;
            let (lhs_label, rhs_label) = match name {
                "||.||" => (
                    "||A1^(a1)∘...∘Am^(am)||".to_string(),
                    "||A1||^a1...||Am||^am".to_string(),
                ),
                n => (
                    format!("{n}(A1^(a1)∘...∘Am^(am))"),
                    format!("{n}(A1)^a1...{n}(Am)^am"),
                ),
            };
            vec![vec![(lhs_label, f(&g)?), (rhs_label, prod_est(rhs))]]
        }
        HpowRho | HpowNorm | HpowLe => {
            let t = required_t(&params)?;
            let powered = mats
                .iter()
                .map(|a| hadamard_power(a, t))
                .collect::<Result<Vec<_>>>()?;
            let lhs = matmul_all(&powered)?;
            let prod = matmul_all(mats)?;
            match chain {
                HpowRho => vec![vec![
                    (l("rho(A1^(t)...Am^(t))"), ctx.rho(&lhs)?),
                    (l("rho(A1...Am)^t"), pow_est(ctx.rho(&prod)?, t)),
                ]],
                HpowNorm => vec![vec![
                    (l("||A1^(t)...Am^(t)||"), ctx.norm(&lhs)?),
                    (l("||A1...Am||^t"), pow_est(ctx.norm(&prod)?, t)),
                ]],
                _ => vec![vec![
                    (
                        l("excess(A1^(t)...Am^(t) <= (A1...Am)^(t))"),
                        excess_est(&lhs, &hadamard_power(&prod, t)?)?,
                    ),
                    zero_term(),
                ]],
            }
        }
        DpGridRho | DpGridNorm | DpGridLe | DpGrid | NumradGrid => {
            let cols = params.alphas.as_ref().map_or(0, Vec::len);
            let w = required_weights(&params, cols)?;
            let grid: Vec<Vec<NonNegativeMatrix>> = mats
                .chunks(cols)
                .map(<[NonNegativeMatrix]>::to_vec)
                .collect();
            let parts = dp_grid_parts(&grid, &w)?;
            let mut groups = Vec::new();
            if matches!(chain, DpGridLe | DpGrid) {
                groups.push(vec![
                    (
                        l("excess(prod_i ∘_j Aij^(aj) <= ∘_j (A1j...Akj)^(aj))"),
                        excess_est(&parts.lhs, &parts.entrywise_rhs)?,
                    ),
                    zero_term(),
                ]);
            }
            if matches!(chain, DpGridNorm | DpGrid) {
                groups.push(vec![
                    (l("||prod_i ∘_j Aij^(aj)||"), ctx.norm(&parts.lhs)?),
                    (
                        l("prod_j ||A1j...Akj||^aj"),
                        weighted_product(&parts.column_products, &w, |x| ctx.norm(x))?,
                    ),
                ]);
            }
            if matches!(chain, DpGridRho | DpGrid) {
                groups.push(vec![
                    (l("rho(prod_i ∘_j Aij^(aj))"), ctx.rho(&parts.lhs)?),
                    (
                        l("prod_j rho(A1j...Akj)^aj"),
                        weighted_product(&parts.column_products, &w, |x| ctx.rho(x))?,
                    ),
                ]);
            }
            if chain == NumradGrid {
                groups.push(vec![
                    (l("w(prod_i ∘_j Aij^(aj))"), ctx.w(&parts.lhs)?),
                    (
                        l("prod_j w(A1j...Akj)^aj"),
                        weighted_product(&parts.column_products, &w, |x| ctx.w(x))?,
                    ),
                ]);
            }
            groups
        }
        GenP1Rho => {
            let t = required_t(&params)?;
            vec![gen_p1_rho(&ctx, mats, t, &GEN_LABELS_RHO)?]
        }
        GenP1Norm => {
            let t = required_t(&params)?;
            vec![gen_p1_norm(&ctx, mats, t, &GEN_LABELS_NORM)?]
        }
        GenP1Numrad => {
            let m = mats.len() as f64;
            if let Some(t) = params.t {
                if t != m {
                    return Err(contract(format!(
                        "genP1_numrad is stated for t = m = {m}, got t = {t}"
                    )));
                }
            }
            params.t = Some(m);
            vec![gen_p1_numrad(&ctx, mats, &GEN_LABELS_NUMRAD)?]
        }
        TwoMatrixT => {
            let t = required_t(&params)?;
            vec![
                gen_p1_rho(&ctx, mats, t, &PAIR_LABELS_RHO)?,
                gen_p1_norm(&ctx, mats, t, &PAIR_LABELS_NORM)?,
                gen_p1_numrad(&ctx, mats, &PAIR_LABELS_NUMRAD)?,
            ]
        }
        ChenZhang => {
            let t = required_t(&params)?;
            vec![chen_zhang(&ctx, mats, t)?]
        }
        Gram => {
            let t = required_t(&params)?;
            vec![gram_chain(&ctx, mats, t)?]
        }
        AltTranspose => alt_transpose(&ctx, mats)?,
        Atb => vec![atb(&ctx, &mats[0], &mats[1])?],
        Abtc => {
            let (lhs, mid, rhs) = odd_alternating(&ctx, mats)?;
            vec![vec![
                (l("||A∘B∘C||"), lhs),
                (
                    l("rho^{1/6}((A^T B C^T A B^T C)∘(B^T C A^T B C^T A)∘(C^T A B^T C A^T B))"),
                    mid,
                ),
                (l("rho^{1/2}(A B^T C A^T B C^T)"), rhs),
            ]]
        }
        Jordan => {
            let (a, b) = (&mats[0], &mats[1]);
            let triple = [a.clone(), b.transpose(), a.clone()];
            let (lhs, mid, _) = odd_alternating(&ctx, &triple)?;
            let aba = matmul_all(&[a.clone(), b.clone(), a.clone()])?;
            vec![vec![
                (l("||A∘B^T∘A||"), lhs),
                (
                    l("rho^{1/6}((A^T B^T A^T A B A)∘(B A A^T B^T A^T A)∘(A^T A B A A^T B^T))"),
                    mid,
                ),
                (l("||ABA||"), ctx.norm2(&aba)?),
            ]]
        }
        CsNumrad => {
            let m = mats.len() as f64;
            let rhs = mats
                .iter()
                .map(|a| ctx.w(&hadamard_power(a, m)?))
                .collect::<Result<Vec<_>>>()?;
            vec![vec![
                (l("w(A1∘...∘Am)"), ctx.w(&hadamard_product_all(mats)?)?),
                (
                    l("(w(A1^(m))...w(Am^(m)))^{1/m}"),
                    pow_est(prod_est(rhs), 1.0 / m),
                ),
            ]]
        }
        SpectralMapExp => {
            let h = hadamard_product_all(mats)?;
            let prod = matmul_all(mats)?;
            vec![vec![
                (l("rho(exp(A1∘...∘Am))"), ctx.rho(&matrix_exp(&h, cfg)?)?),
                (l("rho(exp(A1...Am))"), ctx.rho(&matrix_exp(&prod, cfg)?)?),
            ]]
        }
        SpectralMapResolvent => {
            let lambda = params.lambda.unwrap_or(f64::NAN);
            let h = hadamard_product_all(mats)?;
            let prod = matmul_all(mats)?;
            let rp = resolvent(&prod, lambda, cfg).map_err(|e| match e {
                Error::SpectralConstraint { lambda, rho } => contract(format!(
                    "lambda = {lambda} must exceed rho(A1...Am) = {rho}"
                )),
                other => other,
            })?;
            let rh = resolvent(&h, lambda, cfg)?;
            vec![vec![
                (l("rho((lambda I - A1∘...∘Am)^{-1})"), ctx.rho(&rh)?),
                (l("rho((lambda I - A1...Am)^{-1})"), ctx.rho(&rp)?),
            ]]
        }
        PowerSeries => {
            let coeffs = params.coeffs.clone().unwrap_or_default();
            let h = hadamard_product_all(mats)?;
            let prod = matmul_all(mats)?;
            let rho_prod = ctx.rho(&prod)?;
            if let Some(tail) = &params.tail_coeffs {
                let start = coeffs.len() as i32;
                let err: f64 = tail
                    .iter()
                    .enumerate()
                    .map(|(j, c)| c * rho_prod.value.powi(start + j as i32))
                    .sum();
                params.truncation_error = Some(err);
            }
            vec![vec![
                (
                    l("rho(f(A1∘...∘Am))"),
                    ctx.rho(&eval_power_series(&h, &coeffs)?)?,
                ),
                (
                    l("rho(f(A1...Am))"),
                    ctx.rho(&eval_power_series(&prod, &coeffs)?)?,
                ),
            ]]
        }
    };
    Ok(ChainReport::assemble(chain, params, groups, tol))
}

fn two_matrix_classic(
    chain: ChainId,
    ctx: &Ctx,
    a: &NonNegativeMatrix,
    b: &NonNegativeMatrix,
) -> Result<Vec<(String, Est)>> {
    let ab = matmul(a, b)?;
    let ba = matmul(b, a)?;
    let first = (l("rho(A∘B)"), ctx.rho(&hadamard_product(a, b)?)?);
    let last = (l("rho(AB)"), ctx.rho(&ab)?);
    let squares = || -> Result<(String, Est)> {
        let aa = hadamard_product(a, a)?;
        let bb = hadamard_product(b, b)?;
        Ok((
            l("rho^{1/2}((A∘A)(B∘B))"),
            pow_est(ctx.rho(&matmul(&aa, &bb)?)?, 0.5),
        ))
    };
    let ab_ab = || -> Result<Est> { ctx.rho(&hadamard_product(&ab, &ab)?) };
    Ok(match chain {
        ChainId::Audenaert => vec![first, squares()?, last],
        ChainId::HornZhang => vec![
            first,
            (
                l("rho^{1/2}(AB∘BA)"),
                pow_est(ctx.rho(&hadamard_product(&ab, &ba)?)?, 0.5),
            ),
            last,
        ],
        ChainId::SchepCorrected => vec![
            first,
            squares()?,
            (l("rho^{1/2}(AB∘AB)"), pow_est(ab_ab()?, 0.5)),
            last,
        ],
        _ => vec![
            first,
            squares()?,
            (
                l("rho(AB∘AB)^{1/4} rho(BA∘BA)^{1/4}"),
                mul_est(
                    pow_est(ab_ab()?, 0.25),
                    pow_est(ctx.rho(&hadamard_product(&ba, &ba)?)?, 0.25),
                ),
            ),
            last,
        ],
    })
}

struct DpGridParts {
    /// `prod_i (A_i1^(a1) ∘ ... ∘ A_im^(am))`
    lhs: NonNegativeMatrix,
    /// `(A_11 ... A_k1)^(a1) ∘ ... ∘ (A_1m ... A_km)^(am)`
    entrywise_rhs: NonNegativeMatrix,
    /// `A_1j ... A_kj` for every column `j`.
    column_products: Vec<NonNegativeMatrix>,
}

fn dp_grid_parts(grid: &[Vec<NonNegativeMatrix>], w: &WeightVector) -> Result<DpGridParts> {
    let cols = w.len();
    if grid.iter().any(|row| row.len() != cols) {
        return Err(contract("ragged operand grid"));
    }
    let row_means = grid
        .iter()
        .map(|row| hadamard_weighted_geomean(row, w))
        .collect::<Result<Vec<_>>>()?;
    let lhs = matmul_all(&row_means)?;
    let column_products = (0..cols)
        .map(|j| {
            let column: Vec<NonNegativeMatrix> = grid.iter().map(|row| row[j].clone()).collect();
            matmul_all(&column)
        })
        .collect::<Result<Vec<_>>>()?;
    let entrywise_rhs = hadamard_weighted_geomean(&column_products, w)?;
    Ok(DpGridParts {
        lhs,
        entrywise_rhs,
        column_products,
    })
}

fn weighted_product(
    mats: &[NonNegativeMatrix],
    w: &WeightVector,
    f: impl Fn(&NonNegativeMatrix) -> Result<Est>,
) -> Result<Est> {
    let parts = mats
        .iter()
        .zip(w.alphas())
        .map(|(m, a)| Ok(pow_est(f(m)?, *a)))
        .collect::<Result<Vec<_>>>()?;
    Ok(prod_est(parts))
}

/// `P_1^(1/t) ∘ ... ∘ P_m^(1/t)` together with the `P_i`.
fn interpolant(
    mats: &[NonNegativeMatrix],
    t: f64,
) -> Result<(NonNegativeMatrix, Vec<NonNegativeMatrix>)> {
    let p = cyclic_products(mats, t)?;
    let roots = p
        .iter()
        .map(|pi| hadamard_power(pi, 1.0 / t))
        .collect::<Result<Vec<_>>>()?;
    Ok((hadamard_product_all(&roots)?, p))
}

const GEN_LABELS_RHO: [&str; 5] = [
    "rho(A1∘...∘Am)",
    "rho(P1^(1/t)∘...∘Pm^(1/t))^{1/m}",
    "rho(A1^(t)...Am^(t))^{1/t}",
    "rho((A1...Am)^(t))^{1/t}",
    "rho(A1...Am)",
];

const PAIR_LABELS_RHO: [&str; 5] = [
    "rho(A∘B)",
    "rho((A^(t)B^(t))^(1/t)∘(B^(t)A^(t))^(1/t))^{1/2}",
    "rho(A^(t)B^(t))^{1/t}",
    "rho((AB)^(t))^{1/t}",
    "rho(AB)",
];

fn gen_p1_rho(
    ctx: &Ctx,
    mats: &[NonNegativeMatrix],
    t: f64,
    labels: &[&str; 5],
) -> Result<Vec<(String, Est)>> {
    let m = mats.len() as f64;
    let (q, p) = interpolant(mats, t)?;
    let prod = matmul_all(mats)?;
    let rho_prod = ctx.rho(&prod)?;
    let vals = [
        ctx.rho(&hadamard_product_all(mats)?)?,
        pow_est(ctx.rho(&q)?, 1.0 / m),
        pow_est(ctx.rho(&p[0])?, 1.0 / t),
        pow_est(ctx.rho(&hadamard_power(&prod, t)?)?, 1.0 / t),
        rho_prod,
    ];
    Ok(labels.iter().map(|s| s.to_string()).zip(vals).collect())
}

const GEN_LABELS_NORM: [&str; 5] = [
    "||(A1∘...∘Am)^m||",
    "||P1^(1/t)∘...∘Pm^(1/t)||",
    "(||P1||...||Pm||)^{1/t}",
    "(||(A1...Am)^(t)||...||(Am A1...Am-1)^(t)||)^{1/t}",
    "||A1...Am||...||Am A1...Am-1||",
];

const PAIR_LABELS_NORM: [&str; 5] = [
    "||(A∘B)^2||",
    "||(A^(t)B^(t))^(1/t)∘(B^(t)A^(t))^(1/t)||",
    "(||A^(t)B^(t)|| ||B^(t)A^(t)||)^{1/t}",
    "(||(AB)^(t)|| ||(BA)^(t)||)^{1/t}",
    "||AB|| ||BA||",
];

fn gen_p1_norm(
    ctx: &Ctx,
    mats: &[NonNegativeMatrix],
    t: f64,
    labels: &[&str; 5],
) -> Result<Vec<(String, Est)>> {
    let m = mats.len();
    let (q, p) = interpolant(mats, t)?;
    let cyc = cyclic_products_any(mats, 1.0)?;
    let h = hadamard_product_all(mats)?;
    let hm = h.matrix_power(m as u32)?;
    let norms_p = p.iter().map(|x| ctx.norm(x)).collect::<Result<Vec<_>>>()?;
    let norms_ct = cyc
        .iter()
        .map(|c| ctx.norm(&hadamard_power(c, t)?))
        .collect::<Result<Vec<_>>>()?;
    let norms_c = cyc
        .iter()
        .map(|c| ctx.norm(c))
        .collect::<Result<Vec<_>>>()?;
    let vals = [
        ctx.norm(&hm)?,
        ctx.norm(&q)?,
        pow_est(prod_est(norms_p), 1.0 / t),
        pow_est(prod_est(norms_ct), 1.0 / t),
        prod_est(norms_c),
    ];
    Ok(labels.iter().map(|s| s.to_string()).zip(vals).collect())
}

const GEN_LABELS_NUMRAD: [&str; 4] = [
    "w((A1∘...∘Am)^m)",
    "w(P1^(1/m)∘...∘Pm^(1/m))",
    "(w(P1)...w(Pm))^{1/m}",
    "(w((A1...Am)^(m))...w((Am A1...Am-1)^(m)))^{1/m}",
];

const PAIR_LABELS_NUMRAD: [&str; 4] = [
    "w((A∘B)^2)",
    "w((A^(2)B^(2))^(1/2)∘(B^(2)A^(2))^(1/2))",
    "(w(A^(2)B^(2)) w(B^(2)A^(2)))^{1/2}",
    "(w((AB)^(2)) w((BA)^(2)))^{1/2}",
];

fn gen_p1_numrad(
    ctx: &Ctx,
    mats: &[NonNegativeMatrix],
    labels: &[&str; 4],
) -> Result<Vec<(String, Est)>> {
    let m = mats.len();
    let t = m as f64;
    let (q, p) = interpolant(mats, t)?;
    let cyc = cyclic_products_any(mats, 1.0)?;
    let hm = hadamard_product_all(mats)?.matrix_power(m as u32)?;
    let w_p = p.iter().map(|x| ctx.w(x)).collect::<Result<Vec<_>>>()?;
    let w_ct = cyc
        .iter()
        .map(|c| ctx.w(&hadamard_power(c, t)?))
        .collect::<Result<Vec<_>>>()?;
    let vals = [
        ctx.w(&hm)?,
        ctx.w(&q)?,
        pow_est(prod_est(w_p), 1.0 / t),
        pow_est(prod_est(w_ct), 1.0 / t),
    ];
    Ok(labels.iter().map(|s| s.to_string()).zip(vals).collect())
}

fn chen_zhang(ctx: &Ctx, mats: &[NonNegativeMatrix], t: f64) -> Result<Vec<(String, Est)>> {
    let m = mats.len() as f64;
    let e = 1.0 - t / m;
    let r = ctx.rho(&hadamard_product_all(mats)?)?;
    let re = pow_est(r, e);
    let (q, p) = interpolant(mats, t)?;
    let prod = matmul_all(mats)?;
    Ok(vec![
        (l("rho(A1∘...∘Am)"), r),
        (
            l("R^{1-t/m} rho(P1^(1/t)∘...∘Pm^(1/t))^{t/m^2}"),
            mul_est(re, pow_est(ctx.rho(&q)?, t / (m * m))),
        ),
        (
            l("R^{1-t/m} rho(A1^(t)...Am^(t))^{1/m}"),
            mul_est(re, pow_est(ctx.rho(&p[0])?, 1.0 / m)),
        ),
        (
            l("R^{1-t/m} rho((A1...Am)^(t))^{1/m}"),
            mul_est(re, pow_est(ctx.rho(&hadamard_power(&prod, t)?)?, 1.0 / m)),
        ),
        (l("rho(A1...Am)"), ctx.rho(&prod)?),
    ])
}

fn gram_chain(ctx: &Ctx, mats: &[NonNegativeMatrix], t: f64) -> Result<Vec<(String, Est)>> {
    let s = mats
        .iter()
        .map(|a| matmul(a, &a.transpose()))
        .collect::<Result<Vec<_>>>()?;
    let norm_h = ctx.norm2(&hadamard_product_all(mats)?)?;
    let mut terms = vec![
        (l("||A1∘...∘Am||^2"), pow_est(norm_h, 2.0)),
        (l("rho(S1∘...∘Sm)"), ctx.rho(&hadamard_product_all(&s)?)?),
    ];
    let labels = [
        "rho(T1^(1/t)∘...∘Tm^(1/t))^{1/m}",
        "rho(S1^(t)...Sm^(t))^{1/t}",
        "rho((S1...Sm)^(t))^{1/t}",
        "rho(S1...Sm)",
    ];
    let rest = gen_p1_rho(
        ctx,
        &s,
        t,
        &["", labels[0], labels[1], labels[2], labels[3]],
    )?;
    terms.extend(rest.into_iter().skip(1));
    Ok(terms)
}

/// `A_{k}^{T?} A_{k+1}^{T?} ...` over `len` cyclically indexed factors starting at
/// operand `start`, transposing the factors at even positions when
/// `transpose_even`, odd positions otherwise.
fn alternating_product(
    mats: &[NonNegativeMatrix],
    start: usize,
    len: usize,
    transpose_even: bool,
) -> Result<NonNegativeMatrix> {
    let m = mats.len();
    let factors: Vec<NonNegativeMatrix> = (0..len)
        .map(|j| {
            let a = &mats[(start + j) % m];
            if (j % 2 == 0) == transpose_even {
                a.transpose()
            } else {
                a.clone()
            }
        })
        .collect();
    matmul_all(&factors)
}

/// For odd `m`: `(||∘A||, rho(Z_1∘...∘Z_m)^{1/(2m)}, rho(W)^{1/2})` where
/// `Z_k` runs over `2m` alternating factors starting with `A_k^T` and
/// `W = A_1 A_2^T A_3 ... A_m^T`, also over `2m` factors.
fn odd_alternating(ctx: &Ctx, mats: &[NonNegativeMatrix]) -> Result<(Est, Est, Est)> {
    let m = mats.len();
    debug_assert!(m % 2 == 1);
    let z = (0..m)
        .map(|k| alternating_product(mats, k, 2 * m, true))
        .collect::<Result<Vec<_>>>()?;
    let w = alternating_product(mats, 0, 2 * m, false)?;
    let norm_h = ctx.norm2(&hadamard_product_all(mats)?)?;
    let mid = pow_est(ctx.rho(&hadamard_product_all(&z)?)?, 1.0 / (2 * m) as f64);
    let rhs = pow_est(ctx.rho(&w)?, 0.5);
    Ok((norm_h, mid, rhs))
}

fn alt_transpose(ctx: &Ctx, mats: &[NonNegativeMatrix]) -> Result<Vec<Vec<(String, Est)>>> {
    let m = mats.len();
    if m.is_multiple_of(2) {
        let x = (0..m)
            .map(|k| alternating_product(mats, k, m, true))
            .collect::<Result<Vec<_>>>()?;
        let y = alternating_product(mats, 0, m, false)?;
        let reversed: Vec<NonNegativeMatrix> = (0..m)
            .rev()
            .map(|i| {
                if i % 2 == 0 {
                    mats[i].transpose()
                } else {
                    mats[i].clone()
                }
            })
            .collect();
        let y_rev = matmul_all(&reversed)?;
        let norm_h = ctx.norm2(&hadamard_product_all(mats)?)?;
        let rho_y = ctx.rho(&y)?;
        Ok(vec![
            vec![
                (l("||A1∘...∘Am||^2"), pow_est(norm_h, 2.0)),
                (
                    l("rho(X1∘...∘Xm)^{2/m}"),
                    pow_est(ctx.rho(&hadamard_product_all(&x)?)?, 2.0 / m as f64),
                ),
                (
                    l("rho(A1^T A2 ... Am-1^T Am) rho(A1 A2^T ... Am-1 Am^T)"),
                    mul_est(ctx.rho(&x[0])?, rho_y),
                ),
            ],
            vec![
                (l("rho(A1 A2^T ... Am-1 Am^T)"), rho_y),
                (l("rho(Am Am-1^T ... A2 A1^T)"), ctx.rho(&y_rev)?),
                (l("rho(A1 A2^T ... Am-1 Am^T)"), rho_y),
            ],
        ])
    } else {
        let (norm_h, mid, rhs) = odd_alternating(ctx, mats)?;
        let z1 = alternating_product(mats, 0, 2 * m, true)?;
        let w = alternating_product(mats, 0, 2 * m, false)?;
        let rho_w = ctx.rho(&w)?;
        Ok(vec![
            vec![
                (l("||A1∘...∘Am||^2"), pow_est(norm_h, 2.0)),
                (l("rho(Z1∘...∘Zm)^{1/m}"), pow_est(mid, 2.0)),
                (
                    l("rho(A1 A2^T A3 ... Am A1^T A2 ... Am^T)"),
                    pow_est(rhs, 2.0),
                ),
            ],
            vec![
                (l("rho(A1 A2^T A3 ... Am A1^T A2 ... Am^T)"), rho_w),
                (
                    l("rho(A1^T A2 A3^T ... Am^T A1 A2^T ... Am)"),
                    ctx.rho(&z1)?,
                ),
                (l("rho(A1 A2^T A3 ... Am A1^T A2 ... Am^T)"), rho_w),
            ],
        ])
    }
}

fn atb(ctx: &Ctx, a: &NonNegativeMatrix, b: &NonNegativeMatrix) -> Result<Vec<(String, Est)>> {
    let h = hadamard_product(a, b)?;
    let atb = matmul(&a.transpose(), b)?;
    let bta = matmul(&b.transpose(), a)?;
    Ok(vec![
        (l("rho(A∘B)"), ctx.rho(&h)?),
        (l("||A∘B||"), ctx.norm2(&h)?),
        (
            l("rho^{1/2}((A^T B)∘(B^T A))"),
            pow_est(ctx.rho(&hadamard_product(&atb, &bta)?)?, 0.5),
        ),
        (l("rho(A^T B)"), ctx.rho(&atb)?),
        (l("||A^T B||"), ctx.norm2(&atb)?),
        (l("||A|| ||B||"), mul_est(ctx.norm2(a)?, ctx.norm2(b)?)),
    ])
}

/// `c_0 I + c_1 X + ... + c_J X^J` by Horner's rule.
pub fn eval_power_series(x: &NonNegativeMatrix, coeffs: &[f64]) -> Result<NonNegativeMatrix> {
    let n = x.require_square()?;
    let id = NonNegativeMatrix::identity(n)?;
    let mut acc = NonNegativeMatrix::zeros(n, n)?;
    for c in coeffs.iter().rev() {
        acc = matmul(&acc, x)?.add(&id.scale(*c)?)?;
    }
    Ok(acc)
}

/// `1/j!` for `j = 0..=terms-1`: the truncated exponential series.
pub fn exp_coefficients(terms: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(terms);
    let mut c = 1.0;
    for j in 0..terms {
        if j > 0 {
            c /= j as f64;
        }
        out.push(c);
    }
    out
}

/// `lambda^{-j-1}` for `j = 0..=terms-1`: the truncated Neumann series of
/// `(lambda I - X)^{-1}`.
pub fn neumann_coefficients(lambda: f64, terms: usize) -> Vec<f64> {
    (0..terms).map(|j| lambda.powi(-(j as i32) - 1)).collect()
}

/// `r(t)`, `N(t)` on a grid, with monotonicity and lower-bound flags.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotoneReport {
    pub t_grid: Vec<f64>,
    pub r_values: Vec<f64>,
    pub n_values: Vec<f64>,
    /// `rho(A1∘...∘Am)`
    pub lower_bound_rho: f64,
    /// `||A1∘...∘Am||_2`
    pub lower_bound_norm: f64,
    pub monotone_r: bool,
    pub monotone_n: bool,
    /// Lower bound respected at every grid point `t <= m`.
    pub bounded_r: bool,
    pub bounded_n: bool,
    pub tol: f64,
    /// The grid reaches beyond `t = m`, where no lower bound is claimed.
    pub extends_beyond_m: bool,
    pub converged: bool,
}

impl MonotoneReport {
    pub fn all_hold(&self) -> bool {
        self.monotone_r && self.monotone_n && self.bounded_r && self.bounded_n
    }

    /// CSV with header `t,r,N`; values in 17-significant-digit scientific form.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,r,N\n");
        for ((t, r), n) in self.t_grid.iter().zip(&self.r_values).zip(&self.n_values) {
            out.push_str(&format!(
                "{},{},{}\n",
                crate::format_sig17(*t),
                crate::format_sig17(*r),
                crate::format_sig17(*n)
            ));
        }
        out
    }
}

fn validate_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() {
        return Err(contract("empty t grid"));
    }
    if let Some(t) = t_grid.iter().find(|t| !(t.is_finite() && **t >= 1.0)) {
        return Err(contract(format!(
            "grid point t = {t} must be finite and >= 1"
        )));
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(contract("t grid must be strictly increasing"));
    }
    Ok(())
}

/// Evenly spaced grid `start, ..., stop` with `count` points; a single point
/// when `start == stop`.
pub fn linear_grid(start: f64, stop: f64, count: usize) -> Result<Vec<f64>> {
    if !(start.is_finite() && stop.is_finite()) || stop < start || count == 0 {
        return Err(Error::Domain(format!(
            "invalid grid {start}:{stop}:{count}"
        )));
    }
    if start == stop {
        return Ok(vec![start]);
    }
    if count == 1 {
        return Err(Error::Domain(format!(
            "grid {start}:{stop} needs at least 2 points"
        )));
    }
    let step = (stop - start) / (count - 1) as f64;
    Ok((0..count)
        .map(|i| {
            if i + 1 == count {
                stop
            } else {
                start + step * i as f64
            }
        })
        .collect())
}

fn non_increasing(values: &[f64], tol: f64) -> bool {
    values
        .windows(2)
        .all(|w| w[1] <= w[0] + tol * w[0].max(1.0))
}

/// Evaluates `r(t) = (prod rho(A_i^(t)))^{1/t}` and
/// `N(t) = (prod ||A_i^(t)||_2)^{1/t}` on `t_grid`.
///
/// Both are non-increasing on `[1, inf)`; on `[1, m]` they are bounded below by
/// `rho(A1∘...∘Am)` and `||A1∘...∘Am||_2`. Grid points past `m` are evaluated
/// but not held to the lower bound.
pub fn scan_monotone(
    mats: &[NonNegativeMatrix],
    t_grid: &[f64],
    cfg: &ToleranceConfig,
) -> Result<MonotoneReport> {
    check_square_family(mats)?;
    validate_grid(t_grid)?;
    let ctx = Ctx {
        cfg,
        p: NormKind::Two,
    };
    let m = mats.len() as f64;
    let mut converged = true;
    let mut r_values = Vec::with_capacity(t_grid.len());
    let mut n_values = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let powered = mats
            .iter()
            .map(|a| hadamard_power(a, t))
            .collect::<Result<Vec<_>>>()?;
        let r = prod_est(
            powered
                .iter()
                .map(|x| ctx.rho(x))
                .collect::<Result<Vec<_>>>()?,
        );
        let n = prod_est(
            powered
                .iter()
                .map(|x| ctx.norm2(x))
                .collect::<Result<Vec<_>>>()?,
        );
        converged &= r.converged && n.converged;
        r_values.push(r.value.powf(1.0 / t));
        n_values.push(n.value.powf(1.0 / t));
    }
    let h = hadamard_product_all(mats)?;
    let lb_rho = ctx.rho(&h)?;
    let lb_norm = ctx.norm2(&h)?;
    converged &= lb_rho.converged && lb_norm.converged;
    let tol = DEFAULT_CHAIN_TOL;
    let bounded = |values: &[f64], lb: f64| {
        t_grid
            .iter()
            .zip(values)
            .filter(|(t, _)| **t <= m)
            .all(|(_, v)| lb <= v + tol * v.max(1.0))
    };
    Ok(MonotoneReport {
        monotone_r: non_increasing(&r_values, tol),
        monotone_n: non_increasing(&n_values, tol),
        bounded_r: bounded(&r_values, lb_rho.value),
        bounded_n: bounded(&n_values, lb_norm.value),
        t_grid: t_grid.to_vec(),
        r_values,
        n_values,
        lower_bound_rho: lb_rho.value,
        lower_bound_norm: lb_norm.value,
        tol,
        extends_beyond_m: t_grid.last().is_some_and(|t| *t > m),
        converged,
    })
}

/// `(prod w(A_i^(t)))^{1/t}` on `t_grid`. Unlike `r` and `N` this need not be
/// monotone, so no ordering is asserted.
pub fn scan_numrad(
    mats: &[NonNegativeMatrix],
    t_grid: &[f64],
    cfg: &ToleranceConfig,
) -> Result<Vec<f64>> {
    check_square_family(mats)?;
    validate_grid(t_grid)?;
    t_grid
        .iter()
        .map(|&t| {
            let mut prod = 1.0;
            for a in mats {
                prod *= numerical_radius(&hadamard_power(a, t)?, cfg)?.value;
            }
            Ok(prod.powf(1.0 / t))
        })
        .collect()
}

/// Checks the entrywise, norm and spectral-radius conclusions for a `k x m`
/// grid of operands at once. Each conclusion is a separate group of the
/// returned report.
pub fn verify_dp_grid(
    grid: &[Vec<NonNegativeMatrix>],
    w: &WeightVector,
    p: NormKind,
    cfg: &ToleranceConfig,
) -> Result<ChainReport> {
    let cols = w.len();
    if grid.is_empty() || grid.iter().any(|row| row.len() != cols) {
        return Err(contract(format!(
            "grid rows must all have {cols} entries (one per weight)"
        )));
    }
    let mats: Vec<NonNegativeMatrix> = grid.iter().flatten().cloned().collect();
    let params = ChainParams {
        alphas: Some(w.alphas().to_vec()),
        grid_rows: Some(grid.len()),
        p: Some(p),
        ..ChainParams::default()
    };
    evaluate_chain(ChainId::DpGrid, &mats, &params, cfg)
}
