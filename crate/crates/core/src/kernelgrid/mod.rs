//! Finite stand-ins for infinite non-negative matrices and kernel operators.
//!
//! Entry formulas are written over `(i, j)` (indices starting at 1) or over
//! `(x, y)` in `[0,1]^2`. Kernels are discretized with the midpoint rule on a
//! uniform grid; Hadamard operations act on the kernel samples and the `1/n`
//! quadrature weight is attached once at the end.

mod parser;

use serde::{Deserialize, Serialize};

pub use parser::{parse_expr, BinOp, Expr, Func, Var};

use crate::chains::{ChainId, ChainParams, ChainReport, DEFAULT_CHAIN_TOL};
use crate::error::{Error, Result};
use crate::nnmatrix::{hadamard_weighted_geomean, matmul_all, NonNegativeMatrix, WeightVector};
use crate::spectral::{spectral_radius, SpectralEstimate, ToleranceConfig};

/// Variables a formula ranges over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    /// `(i, j)` with integer indices `>= 1`.
    Index,
    /// `(x, y)` in `[0,1]^2`.
    Unit,
    /// No variables at all.
    Constant,
}

/// A parsed, domain-checked entry formula.
#[derive(Debug, Clone, PartialEq)]
pub struct EntryFormula {
    source: String,
    ast: Expr,
    domain: Domain,
}

const INDEX_SAMPLES: [f64; 12] = [
    1.0, 2.0, 3.0, 4.0, 5.0, 7.0, 8.0, 11.0, 16.0, 32.0, 64.0, 128.0,
];
const UNIT_SAMPLES: usize = 11;

fn infer_domain(ast: &Expr) -> Result<Domain> {
    let (mut index, mut unit) = (false, false);
    ast.visit_vars(&mut |v| match v {
        Var::I | Var::J => index = true,
        Var::X | Var::Y => unit = true,
    });
    match (index, unit) {
        (true, true) => Err(Error::Domain(
            "formula mixes index variables (i, j) with continuous variables (x, y)".into(),
        )),
        (true, false) => Ok(Domain::Index),
        (false, true) => Ok(Domain::Unit),
        (false, false) => Ok(Domain::Constant),
    }
}

impl EntryFormula {
    /// Parses `source`, infers the domain from its variables and validates by
    /// sampling.
    pub fn parse(source: &str) -> Result<Self> {
        let ast = parse_expr(source)?;
        let domain = infer_domain(&ast)?;
        let f = EntryFormula {
            source: source.to_string(),
            ast,
            domain,
        };
        f.validate_samples(domain)?;
        Ok(f)
    }

    /// Parses `source` and requires it to live on `domain` (constants are
    /// accepted on either domain).
    pub fn parse_on(source: &str, domain: Domain) -> Result<Self> {
        let mut f = Self::parse(source)?;
        match (f.domain, domain) {
            (Domain::Constant, _) => {
                f.validate_samples(domain)?;
                f.domain = domain;
                Ok(f)
            }
            (a, b) if a == b => Ok(f),
            (a, b) => Err(Error::Domain(format!(
                "formula `{source}` is over {a:?} variables but {b:?} variables are required"
            ))),
        }
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn ast(&self) -> &Expr {
        &self.ast
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    /// Raw evaluation with `a` bound to `i`/`x` and `b` to `j`/`y`.
    pub fn eval(&self, a: f64, b: f64) -> f64 {
        self.ast.eval(a, b)
    }

    /// Evaluation that rejects negative or non-finite values.
    pub fn eval_checked(&self, a: f64, b: f64) -> Result<f64> {
        let v = self.eval(a, b);
        if v.is_finite() && v >= 0.0 {
            Ok(if v == 0.0 { 0.0 } else { v })
        } else {
            let point = match self.domain {
                Domain::Index => format!("(i={a}, j={b})"),
                _ => format!("(x={a}, y={b})"),
            };
            Err(Error::FormulaDomain {
                formula: self.source.clone(),
                point,
                value: v,
            })
        }
    }

    fn validate_samples(&self, domain: Domain) -> Result<()> {
        match domain {
            Domain::Index => {
                for &a in &INDEX_SAMPLES {
                    for &b in &INDEX_SAMPLES {
                        self.eval_checked(a, b)?;
                    }
                }
            }
            Domain::Unit => {
                let step = 1.0 / (UNIT_SAMPLES - 1) as f64;
                for p in 0..UNIT_SAMPLES {
                    for q in 0..UNIT_SAMPLES {
                        self.eval_checked(p as f64 * step, q as f64 * step)?;
                    }
                }
            }
            Domain::Constant => {
                self.eval_checked(1.0, 1.0)?;
            }
        }
        Ok(())
    }

    /// Fully parenthesized form of the parsed tree.
    pub fn pretty(&self) -> String {
        self.ast.pretty()
    }
}

impl std::fmt::Display for EntryFormula {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.source)
    }
}

/// Parses an entry formula, inferring its domain from the variables used.
pub fn parse_entry_expr(source: &str) -> Result<EntryFormula> {
    EntryFormula::parse(source)
}

/// A kernel `k(x, y)` on `[0,1]^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    pub formula: EntryFormula,
    pub description: String,
}

impl KernelSpec {
    pub fn new(formula: &str) -> Result<Self> {
        Ok(KernelSpec {
            formula: EntryFormula::parse_on(formula, Domain::Unit)?,
            description: String::new(),
        })
    }

    pub fn with_description(mut self, description: impl Into<String>) -> Self {
        self.description = description.into();
        self
    }
}

/// An infinite matrix `a(i, j)` together with the section sizes to evaluate.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedMatrixSpec {
    pub formula: EntryFormula,
    sizes: Vec<usize>,
}

impl TruncatedMatrixSpec {
    pub fn new(formula: &str, sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() || sizes[0] == 0 || sizes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Domain(format!(
                "section sizes {sizes:?} must be non-empty, positive and strictly increasing"
            )));
        }
        Ok(TruncatedMatrixSpec {
            formula: EntryFormula::parse_on(formula, Domain::Index)?,
            sizes,
        })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// The leading `n x n` section.
    pub fn section(&self, n: usize) -> Result<NonNegativeMatrix> {
        let mut data = Vec::with_capacity(n * n);
        for i in 1..=n {
            for j in 1..=n {
                data.push(self.formula.eval_checked(i as f64, j as f64)?);
            }
        }
        NonNegativeMatrix::new(n, n, data)
    }
}

/// Midpoint-rule samples `k(x_i, x_j)` with `x_i = (i - 1/2)/n`, kept apart
/// from the quadrature weight `1/n`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelGrid {
    pub samples: NonNegativeMatrix,
    pub weight: f64,
}

impl KernelGrid {
    /// The matrix of the discretized operator: samples times the weight.
    pub fn operator(&self) -> Result<NonNegativeMatrix> {
        self.samples.scale(self.weight)
    }
}

pub fn midpoints(n: usize) -> Vec<f64> {
    (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect()
}

pub fn sample_kernel(kernel: &KernelSpec, n: usize) -> Result<KernelGrid> {
    if n == 0 {
        return Err(Error::Domain("grid size n must be at least 1".into()));
    }
    let xs = midpoints(n);
    let mut data = Vec::with_capacity(n * n);
    for &x in &xs {
        for &y in &xs {
            data.push(kernel.formula.eval_checked(x, y)?);
        }
    }
    Ok(KernelGrid {
        samples: NonNegativeMatrix::new(n, n, data)?,
        weight: 1.0 / n as f64,
    })
}

/// Matrix of the midpoint-rule discretization of the kernel operator.
pub fn discretize(kernel: &KernelSpec, n: usize) -> Result<NonNegativeMatrix> {
    sample_kernel(kernel, n)?.operator()
}

/// Compares `rho` of the Hadamard geometric-mean kernel `(k_1 ... k_m)^{1/m}`
/// with `rho(K_1 ... K_m)^{1/m}` on the `n`-point discretization.
pub fn kernel_geomean_check(
    kernels: &[KernelSpec],
    n: usize,
    cfg: &ToleranceConfig,
) -> Result<ChainReport> {
    if kernels.is_empty() {
        return Err(Error::Contract("at least one kernel is required".into()));
    }
    let grids = kernels
        .iter()
        .map(|k| sample_kernel(k, n))
        .collect::<Result<Vec<_>>>()?;
    let m = kernels.len();
    let weight = grids[0].weight;
    let samples: Vec<NonNegativeMatrix> = grids.iter().map(|g| g.samples.clone()).collect();
    let mean = hadamard_weighted_geomean(&samples, &WeightVector::uniform(m)?)?.scale(weight)?;
    let ops = grids
        .iter()
        .map(KernelGrid::operator)
        .collect::<Result<Vec<_>>>()?;
    let lhs = spectral_radius(&mean, cfg)?;
    let rhs = spectral_radius(&matmul_all(&ops)?, cfg)?.map(|v| v.powf(1.0 / m as f64));
    let params = ChainParams {
        n: Some(n),
        ..ChainParams::default()
    };
    Ok(ChainReport::assemble(
        ChainId::GeoMean,
        params,
        vec![vec![
            ("rho(K1^(1/m)∘...∘Km^(1/m))".to_string(), lhs),
            ("rho(K1...Km)^{1/m}".to_string(), rhs),
        ]],
        DEFAULT_CHAIN_TOL,
    ))
}

/// `rho` of the leading sections at every size of `spec`.
pub fn truncation_sequence(
    spec: &TruncatedMatrixSpec,
    cfg: &ToleranceConfig,
) -> Result<Vec<(usize, SpectralEstimate)>> {
    let max = *spec.sizes().last().expect("sizes are non-empty");
    let full = spec.section(max)?;
    spec.sizes()
        .iter()
        .map(|&n| {
            let mut data = Vec::with_capacity(n * n);
            for i in 0..n {
                data.extend_from_slice(&full.data()[i * max..i * max + n]);
            }
            let section = NonNegativeMatrix::new(n, n, data)?;
            Ok((n, spectral_radius(&section, cfg)?))
        })
        .collect()
}
