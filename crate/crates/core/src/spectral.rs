//! Scalar functionals of non-negative matrices.
//!
//! * spectral radius by repeated squaring (Gelfand), with a rescaling step after
//!   every squaring so that powers never overflow;
//! * induced `l^1`, `l^2` and `l^inf` operator norms;
//! * numerical radius, which for an entrywise non-negative matrix equals the
//!   largest eigenvalue of its symmetric part;
//! * the max-times eigenvalue (maximum geometric cycle mean) via Karp;
//! * the matrix exponential and the resolvent `(lambda I - A)^{-1}`.
//!
//! Iterative results come back as a [`SpectralEstimate`] carrying convergence
//! metadata. A non-converged estimate is returned rather than raised so the
//! caller can tell "inconclusive" from a genuine failure.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nnmatrix::{matmul, NonNegativeMatrix};

/// Iteration budgets and the relative convergence tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceConfig {
    pub rel_tol: f64,
    pub max_power_iters: usize,
    pub max_squarings: usize,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            max_power_iters: 10_000,
            max_squarings: 60,
        }
    }
}

impl ToleranceConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol.is_finite() && self.rel_tol > 0.0) {
            return Err(Error::Domain(format!(
                "rel_tol must be positive, got {}",
                self.rel_tol
            )));
        }
        if self.max_power_iters == 0 || self.max_squarings == 0 {
            return Err(Error::Domain("iteration budgets must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Gelfand,
    PowerIteration,
    ClosedForm,
    Karp,
    Oracle,
}

/// A computed scalar (`rho`, `||.||_p`, `w`, `mu`) with convergence metadata.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralEstimate {
    pub value: f64,
    pub iterations: usize,
    /// Relative change over the last step.
    pub residual: f64,
    pub converged: bool,
    pub method: Method,
}

impl SpectralEstimate {
    pub fn exact(value: f64, method: Method) -> Self {
        Self {
            value,
            iterations: 0,
            residual: 0.0,
            converged: true,
            method,
        }
    }

    /// Applies a monotone scalar map to the value, keeping the metadata.
    pub fn map(self, f: impl FnOnce(f64) -> f64) -> Self {
        Self {
            value: f(self.value),
            ..self
        }
    }
}

/// Which induced operator norm to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NormKind {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "2")]
    Two,
    #[serde(rename = "inf")]
    Inf,
}

impl std::str::FromStr for NormKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1" => Ok(NormKind::One),
            "2" => Ok(NormKind::Two),
            "inf" | "∞" => Ok(NormKind::Inf),
            other => Err(Error::Domain(format!(
                "unknown norm `{other}`, expected one of 1, 2, inf"
            ))),
        }
    }
}

impl std::fmt::Display for NormKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            NormKind::One => "1",
            NormKind::Two => "2",
            NormKind::Inf => "inf",
        })
    }
}

/// Spectral radius by rescaled repeated squaring.
///
/// After `k` squarings the scaled iterate is `B = A^N / ||A^N||_inf` with
/// `N = 2^k`, and `log ||A^N||_inf` is carried separately. The reported value is
/// the ratio form `(||A^{2N}|| / ||A^N||)^{1/N}`, which cancels the constant in
/// `||A^N|| ~ c rho^N` and converges much faster than `||A^N||^{1/N}` whenever
/// the Perron root is strictly dominant, while still converging for periodic,
/// reducible and defective matrices. A power that becomes exactly zero proves
/// nilpotency and yields `rho = 0`.
pub fn spectral_radius(a: &NonNegativeMatrix, cfg: &ToleranceConfig) -> Result<SpectralEstimate> {
    a.require_square()?;
    let s0 = a.max_row_sum();
    if s0 == 0.0 {
        return Ok(SpectralEstimate::exact(0.0, Method::Gelfand));
    }
    let mut b = a.scale(1.0 / s0)?;
    let mut log_norm = s0.ln();
    let mut prev: Option<f64> = None;
    let mut residual = f64::MAX;
    let mut calm_steps = 0;
    let mut estimate = s0;
    for k in 0..cfg.max_squarings {
        let sq = matmul(&b, &b)?;
        let s = sq.max_row_sum();
        if s == 0.0 {
            return Ok(SpectralEstimate {
                value: 0.0,
                iterations: k + 1,
                residual: 0.0,
                converged: true,
                method: Method::Gelfand,
            });
        }
        let n = (k as f64).exp2();
        estimate = ((log_norm + s.ln()) / n).exp();
        b = sq.scale(1.0 / s)?;
        log_norm = 2.0 * log_norm + s.ln();
        if let Some(p) = prev {
            residual = (estimate - p).abs() / estimate;
            if residual <= cfg.rel_tol {
                calm_steps += 1;
                if calm_steps >= 2 {
                    return Ok(SpectralEstimate {
                        value: estimate,
                        iterations: k + 1,
                        residual,
                        converged: true,
                        method: Method::Gelfand,
                    });
                }
            } else {
                calm_steps = 0;
            }
        }
        prev = Some(estimate);
    }
    Ok(SpectralEstimate {
        value: estimate,
        iterations: cfg.max_squarings,
        residual: residual.min(1.0),
        converged: false,
        method: Method::Gelfand,
    })
}

/// The `k`-th plain Gelfand iterate `||A^{2^k}||_inf^{1/2^k}`, rescaled at every
/// squaring. The sequence bounds `rho(A)` from above and decreases towards it.
pub fn spectral_radius_oracle(a: &NonNegativeMatrix, k: u32) -> Result<f64> {
    a.require_square()?;
    if k > 60 {
        return Err(Error::Domain(format!("k = {k} exceeds 60 squarings")));
    }
    let s0 = a.max_row_sum();
    if s0 == 0.0 {
        return Ok(0.0);
    }
    let mut b = a.scale(1.0 / s0)?;
    let mut log_norm = s0.ln();
    for _ in 0..k {
        let sq = matmul(&b, &b)?;
        let s = sq.max_row_sum();
        if s == 0.0 {
            return Ok(0.0);
        }
        b = sq.scale(1.0 / s)?;
        log_norm = 2.0 * log_norm + s.ln();
    }
    Ok((log_norm / f64::from(k).exp2()).exp())
}

/// Power iteration from the all-ones vector, `lambda_k = ||A x_k||_inf` with
/// `||x_k||_inf = 1`. Only reliable for primitive matrices; kept as a cross-check.
pub fn spectral_radius_power(
    a: &NonNegativeMatrix,
    cfg: &ToleranceConfig,
) -> Result<SpectralEstimate> {
    let n = a.require_square()?;
    let mut x = vec![1.0; n];
    let mut prev = f64::NAN;
    let mut residual = f64::MAX;
    for it in 1..=cfg.max_power_iters {
        let y = mat_vec(a, &x);
        let lambda = y.iter().copied().fold(0.0, f64::max);
        if lambda == 0.0 {
            return Ok(SpectralEstimate {
                value: 0.0,
                iterations: it,
                residual: 0.0,
                converged: true,
                method: Method::PowerIteration,
            });
        }
        x = y.into_iter().map(|v| v / lambda).collect();
        if prev.is_finite() {
            residual = (lambda - prev).abs() / lambda;
            if residual <= cfg.rel_tol {
                return Ok(SpectralEstimate {
                    value: lambda,
                    iterations: it,
                    residual,
                    converged: true,
                    method: Method::PowerIteration,
                });
            }
        }
        prev = lambda;
    }
    Ok(SpectralEstimate {
        value: prev,
        iterations: cfg.max_power_iters,
        residual: residual.min(1.0),
        converged: false,
        method: Method::PowerIteration,
    })
}

fn mat_vec(a: &NonNegativeMatrix, x: &[f64]) -> Vec<f64> {
    a.data()
        .chunks(a.cols())
        .map(|row| row.iter().zip(x).map(|(r, v)| r * v).sum())
        .collect()
}

/// Largest eigenvalue of a symmetric non-negative matrix by power iteration on
/// `s + shift I` from the normalised all-ones vector.
///
/// Stops once the eigen-residual `||S x - theta x||_2` falls below
/// `rel_tol * theta`; the Rayleigh quotient is then accurate to second order.
pub fn symmetric_power_iteration(
    s: &NonNegativeMatrix,
    shift: f64,
    cfg: &ToleranceConfig,
) -> Result<SpectralEstimate> {
    let n = s.require_square()?;
    if s.is_zero() {
        return Ok(SpectralEstimate::exact(0.0, Method::ClosedForm));
    }
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut theta = 0.0;
    let mut residual = f64::MAX;
    for it in 1..=cfg.max_power_iters {
        let sx = mat_vec(s, &x);
        theta = sx.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>();
        let r2: f64 = sx
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - theta * b).powi(2))
            .sum();
        residual = if theta > 0.0 {
            r2.sqrt() / theta
        } else {
            f64::MAX
        };
        if residual <= cfg.rel_tol {
            return Ok(SpectralEstimate {
                value: theta,
                iterations: it,
                residual,
                converged: true,
                method: Method::PowerIteration,
            });
        }
        let y: Vec<f64> = sx.iter().zip(&x).map(|(a, b)| a + shift * b).collect();
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            break;
        }
        x = y.into_iter().map(|v| v / norm).collect();
    }
    Ok(SpectralEstimate {
        value: theta.max(0.0),
        iterations: cfg.max_power_iters,
        residual: residual.min(1.0),
        converged: false,
        method: Method::PowerIteration,
    })
}

/// Runs power iteration and cross-checks it against Gelfand on the same
/// symmetric matrix. When power iteration stalls or disagrees, the Gelfand
/// estimate is returned instead.
fn symmetric_perron(
    s: &NonNegativeMatrix,
    shift: f64,
    cfg: &ToleranceConfig,
) -> Result<SpectralEstimate> {
    let pi = symmetric_power_iteration(s, shift, cfg)?;
    let g = spectral_radius(s, cfg)?;
    let agree = (pi.value - g.value).abs() <= 10.0 * cfg.rel_tol * g.value.max(1.0);
    if pi.converged && agree {
        Ok(SpectralEstimate {
            iterations: pi.iterations + g.iterations,
            ..pi
        })
    } else {
        Ok(SpectralEstimate {
            iterations: pi.iterations + g.iterations,
            ..g
        })
    }
}

/// Gram matrix of the smaller side: `A^T A` or `A A^T`, whichever is smaller.
fn gram(a: &NonNegativeMatrix) -> Result<NonNegativeMatrix> {
    if a.cols() <= a.rows() {
        matmul(&a.transpose(), a)
    } else {
        matmul(a, &a.transpose())
    }
}

/// Induced operator norm on `l^1`, `l^2` or `l^inf`. Rectangular input is allowed.
pub fn operator_norm(
    a: &NonNegativeMatrix,
    p: NormKind,
    cfg: &ToleranceConfig,
) -> Result<SpectralEstimate> {
    match p {
        NormKind::One => Ok(SpectralEstimate::exact(a.max_col_sum(), Method::ClosedForm)),
        NormKind::Inf => Ok(SpectralEstimate::exact(a.max_row_sum(), Method::ClosedForm)),
        NormKind::Two => {
            let g = gram(a)?;
            Ok(symmetric_perron(&g, 0.0, cfg)?.map(f64::sqrt))
        }
    }
}

/// `||A||_2` by raw power iteration on the Gram matrix, with no fallback.
pub fn operator_norm_power_iteration(
    a: &NonNegativeMatrix,
    cfg: &ToleranceConfig,
) -> Result<SpectralEstimate> {
    Ok(symmetric_power_iteration(&gram(a)?, 0.0, cfg)?.map(f64::sqrt))
}

/// `||A||_2` as `sqrt(rho(A^T A))` with `rho` from repeated squaring.
pub fn operator_norm_gelfand(
    a: &NonNegativeMatrix,
    cfg: &ToleranceConfig,
) -> Result<SpectralEstimate> {
    Ok(spectral_radius(&gram(a)?, cfg)?.map(f64::sqrt))
}

/// Symmetric part `(A + A^T) / 2`.
pub fn symmetric_part(a: &NonNegativeMatrix) -> Result<NonNegativeMatrix> {
    a.require_square()?;
    a.add(&a.transpose())?.scale(0.5)
}

/// Numerical radius `w(A) = lambda_max((A + A^T)/2)`.
///
/// Uses power iteration on `S + cI` with `c = ||S||_inf + 1`, which makes the
/// shifted top eigenvalue strictly dominant even when `-lambda_max(S)` is also
/// an eigenvalue.
pub fn numerical_radius(a: &NonNegativeMatrix, cfg: &ToleranceConfig) -> Result<SpectralEstimate> {
    let s = symmetric_part(a)?;
    let shift = s.max_row_sum() + 1.0;
    symmetric_perron(&s, shift, cfg)
}

/// Max-times eigenvalue `mu(A)`: the largest geometric mean of entries along a
/// cycle of the digraph of `A`, by Karp's maximum cycle mean on `ln a_ij`.
/// Returns 0 when the digraph is acyclic.
pub fn max_times_radius(a: &NonNegativeMatrix) -> Result<SpectralEstimate> {
    let n = a.require_square()?;
    let w: Vec<f64> = a
        .data()
        .iter()
        .map(|&v| if v > 0.0 { v.ln() } else { f64::NEG_INFINITY })
        .collect();
    // walks[k][v]: heaviest walk with exactly k arcs ending at v, from any start
    let mut walks = vec![vec![f64::NEG_INFINITY; n]; n + 1];
    walks[0] = vec![0.0; n];
    for k in 1..=n {
        for u in 0..n {
            let du = walks[k - 1][u];
            if du == f64::NEG_INFINITY {
                continue;
            }
            for v in 0..n {
                let cand = du + w[u * n + v];
                if cand > walks[k][v] {
                    walks[k][v] = cand;
                }
            }
        }
    }
    let mut best = f64::NEG_INFINITY;
    for v in 0..n {
        let dn = walks[n][v];
        if dn == f64::NEG_INFINITY {
            continue;
        }
        let worst = (0..n)
            .filter(|&k| walks[k][v] > f64::NEG_INFINITY)
            .map(|k| (dn - walks[k][v]) / (n - k) as f64)
            .fold(f64::INFINITY, f64::min);
        best = best.max(worst);
    }
    let value = if best == f64::NEG_INFINITY {
        0.0
    } else {
        best.exp()
    };
    Ok(SpectralEstimate {
        value,
        iterations: n,
        residual: 0.0,
        converged: true,
        method: Method::Karp,
    })
}

/// Matrix exponential by scaling and squaring around a truncated Taylor series.
///
/// The input is scaled so that `||A / 2^s||_inf <= 1/2`; the Taylor loop stops
/// once the next term is below machine precision relative to the partial sum
/// (the remaining tail is at most twice that term). All terms are
/// non-negative, so no cancellation occurs.
pub fn matrix_exp(a: &NonNegativeMatrix, cfg: &ToleranceConfig) -> Result<NonNegativeMatrix> {
    let n = a.require_square()?;
    let norm = a.max_row_sum();
    let mut squarings = 0u32;
    while norm / f64::from(squarings).exp2() > 0.5 {
        squarings += 1;
        if squarings > 1100 {
            return Err(Error::Range("matrix too large to exponentiate".into()));
        }
    }
    let b = a.scale(1.0 / f64::from(squarings).exp2())?;
    let stop = f64::EPSILON.min(cfg.rel_tol);
    let mut sum = NonNegativeMatrix::identity(n)?;
    let mut term = NonNegativeMatrix::identity(n)?;
    for j in 1..=60 {
        term = matmul(&term, &b)?.scale(1.0 / f64::from(j))?;
        if term.is_zero() {
            break;
        }
        sum = sum.add(&term)?;
        if term.max_row_sum() <= stop * sum.max_row_sum() {
            break;
        }
    }
    for _ in 0..squarings {
        sum =
            matmul(&sum, &sum).map_err(|_| Error::Range("matrix exponential overflows".into()))?;
    }
    Ok(sum)
}

/// Resolvent `(lambda I - A)^{-1}` by Gauss-Jordan elimination with partial
/// pivoting. Requires `lambda > rho(A)` (with a `rel_tol` margin on the
/// computed estimate); the result is then entrywise non-negative.
pub fn resolvent(
    a: &NonNegativeMatrix,
    lambda: f64,
    cfg: &ToleranceConfig,
) -> Result<NonNegativeMatrix> {
    let n = a.require_square()?;
    let rho = spectral_radius(a, cfg)?.value;
    if !(lambda.is_finite() && lambda > rho + cfg.rel_tol * rho.max(1.0)) {
        return Err(Error::SpectralConstraint { lambda, rho });
    }
    let width = 2 * n;
    let mut aug = vec![0.0; n * width];
    for i in 0..n {
        for j in 0..n {
            aug[i * width + j] = -a.get(i, j);
        }
        aug[i * width + i] += lambda;
        aug[i * width + n + i] = 1.0;
    }
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&r, &s| {
                aug[r * width + col]
                    .abs()
                    .total_cmp(&aug[s * width + col].abs())
            })
            .unwrap_or(col);
        let pivot = aug[pivot_row * width + col];
        if pivot == 0.0 || !pivot.is_finite() {
            return Err(Error::Numerical(format!(
                "singular pivot in column {col} of lambda I - A"
            )));
        }
        if pivot_row != col {
            for j in 0..width {
                aug.swap(col * width + j, pivot_row * width + j);
            }
        }
        for j in 0..width {
            aug[col * width + j] /= pivot;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let factor = aug[r * width + col];
            if factor == 0.0 {
                continue;
            }
            for j in 0..width {
                aug[r * width + j] -= factor * aug[col * width + j];
            }
        }
    }
    let mut inv = Vec::with_capacity(n * n);
    for i in 0..n {
        inv.extend_from_slice(&aug[i * width + n..(i + 1) * width]);
    }
    let scale = inv.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    for v in inv.iter_mut() {
        if *v < 0.0 {
            // rounding residue only; a genuinely negative entry means lambda was too small
            if *v < -1e-10 * scale.max(1.0) {
                return Err(Error::Numerical(format!(
                    "resolvent has negative entry {v}; elimination is unreliable"
                )));
            }
            *v = 0.0;
        }
    }
    NonNegativeMatrix::new(n, n, inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> NonNegativeMatrix {
        NonNegativeMatrix::from_rows(rows).unwrap()
    }

    fn cfg() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn a() -> NonNegativeMatrix {
        m(&[&[1.0, 2.0], &[3.0, 4.0]])
    }

    fn close(x: f64, y: f64, tol: f64) -> bool {
        (x - y).abs() <= tol * y.abs().max(1.0)
    }

    #[test]
    fn spectral_radius_examples() {
        let j = m(&[&[1.0, 1.0], &[1.0, 1.0]]);
        let r = spectral_radius(&j, &cfg()).unwrap();
        assert!(r.converged);
        assert!(close(r.value, 2.0, 1e-12));

        let nil = m(&[&[0.0, 1.0], &[0.0, 0.0]]);
        let r = spectral_radius(&nil, &cfg()).unwrap();
        assert_eq!(r.value, 0.0);
        assert!(r.converged);

        let r = spectral_radius(&a(), &cfg()).unwrap();
        assert!(close(r.value, (5.0 + 33f64.sqrt()) / 2.0, 1e-10), "{r:?}");
        assert!(r.converged);
        assert_eq!(r.method, Method::Gelfand);
    }

    #[test]
    fn zero_matrix_is_exact() {
        let z = NonNegativeMatrix::zeros(3, 3).unwrap();
        let r = spectral_radius(&z, &cfg()).unwrap();
        assert_eq!(r.value, 0.0);
        assert!(r.converged);
    }

    #[test]
    fn spectral_radius_rejects_rectangular() {
        let r = NonNegativeMatrix::ones(2, 3).unwrap();
        assert!(matches!(
            spectral_radius(&r, &cfg()),
            Err(Error::NotSquare { .. })
        ));
        assert!(numerical_radius(&r, &cfg()).is_err());
        assert!(max_times_radius(&r).is_err());
    }

    #[test]
    fn periodic_and_reducible_converge() {
        // weighted 3-cycle: rho = (2*3*4)^(1/3)
        let c = m(&[&[0.0, 2.0, 0.0], &[0.0, 0.0, 3.0], &[4.0, 0.0, 0.0]]);
        let r = spectral_radius(&c, &cfg()).unwrap();
        assert!(r.converged, "{r:?}");
        assert!(close(r.value, 24f64.cbrt(), 1e-9), "{r:?}");
        // Jordan block with eigenvalue 2
        let jb = m(&[&[2.0, 1.0], &[0.0, 2.0]]);
        let r = spectral_radius(&jb, &cfg()).unwrap();
        assert!(r.converged);
        assert!(close(r.value, 2.0, 1e-9), "{r:?}");
    }

    #[test]
    fn oracle_examples() {
        let i = NonNegativeMatrix::identity(3).unwrap();
        for k in [0, 1, 5, 40] {
            assert_eq!(spectral_radius_oracle(&i, k).unwrap(), 1.0);
        }
        let nil = m(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert_eq!(spectral_radius_oracle(&nil, 1).unwrap(), 0.0);
        let v = spectral_radius_oracle(&a(), 40).unwrap();
        assert!((v - 5.372281323269014).abs() < 1e-8);
        assert!(spectral_radius_oracle(&a(), 61).is_err());
        // upper-bound sequence
        let seq: Vec<f64> = (0..8)
            .map(|k| spectral_radius_oracle(&a(), k).unwrap())
            .collect();
        assert!(seq.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-15)));
        assert!(seq.iter().all(|v| *v >= 5.372281323269014 * (1.0 - 1e-15)));
    }

    #[test]
    fn operator_norm_examples() {
        let one = operator_norm(&a(), NormKind::One, &cfg()).unwrap();
        let inf = operator_norm(&a(), NormKind::Inf, &cfg()).unwrap();
        assert_eq!(one.value, 6.0);
        assert_eq!(inf.value, 7.0);
        assert_eq!(one.method, Method::ClosedForm);
        let two = operator_norm(&a(), NormKind::Two, &cfg()).unwrap();
        let want = ((30.0 + 884f64.sqrt()) / 2.0).sqrt();
        assert!(close(two.value, want, 1e-10), "{two:?}");
        let j = m(&[&[1.0, 1.0], &[1.0, 1.0]]);
        assert!(close(
            operator_norm(&j, NormKind::Two, &cfg()).unwrap().value,
            2.0,
            1e-12
        ));
        let rect = m(&[&[3.0, 4.0]]);
        assert!(close(
            operator_norm(&rect, NormKind::Two, &cfg()).unwrap().value,
            5.0,
            1e-12
        ));
        assert_eq!(
            operator_norm(&rect, NormKind::One, &cfg()).unwrap().value,
            4.0
        );
    }

    #[test]
    fn norm_kind_parsing() {
        assert_eq!("1".parse::<NormKind>().unwrap(), NormKind::One);
        assert_eq!("inf".parse::<NormKind>().unwrap(), NormKind::Inf);
        assert!("3".parse::<NormKind>().is_err());
        assert_eq!(serde_json::to_string(&NormKind::Two).unwrap(), "\"2\"");
    }

    #[test]
    fn numerical_radius_examples() {
        let nil = m(&[&[0.0, 1.0], &[0.0, 0.0]]);
        let w = numerical_radius(&nil, &cfg()).unwrap();
        assert!((w.value - 0.5).abs() <= 1e-10, "{w:?}");
        assert!(w.converged);
        let w = numerical_radius(&NonNegativeMatrix::identity(3).unwrap(), &cfg()).unwrap();
        assert!(close(w.value, 1.0, 1e-12));
        let w = numerical_radius(&a(), &cfg()).unwrap();
        assert!(close(w.value, (5.0 + 34f64.sqrt()) / 2.0, 1e-10), "{w:?}");
    }

    #[test]
    fn numerical_radius_of_bipartite_symmetric() {
        // eigenvalues +-1: plain power iteration would oscillate
        let p = m(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let w = numerical_radius(&p, &cfg()).unwrap();
        assert!(close(w.value, 1.0, 1e-10));
        assert_eq!(w.method, Method::PowerIteration);
    }

    #[test]
    fn max_times_examples() {
        assert!(close(max_times_radius(&a()).unwrap().value, 4.0, 1e-14));
        let nil = m(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert_eq!(max_times_radius(&nil).unwrap().value, 0.0);
        let j = m(&[&[1.0, 1.0], &[1.0, 1.0]]);
        assert!(close(max_times_radius(&j).unwrap().value, 1.0, 1e-15));
        // the 2-cycle wins: sqrt(5 * 5) = 5 > 1
        let two_cycle = m(&[&[1.0, 5.0], &[5.0, 1.0]]);
        assert!(close(
            max_times_radius(&two_cycle).unwrap().value,
            5.0,
            1e-14
        ));
        assert_eq!(max_times_radius(&two_cycle).unwrap().method, Method::Karp);
    }

    #[test]
    fn matrix_exp_examples() {
        let z = NonNegativeMatrix::zeros(2, 2).unwrap();
        assert_eq!(
            matrix_exp(&z, &cfg()).unwrap(),
            NonNegativeMatrix::identity(2).unwrap()
        );
        let d = NonNegativeMatrix::diagonal(&[1.0, 2.0]).unwrap();
        let e = matrix_exp(&d, &cfg()).unwrap();
        assert!(close(e.get(0, 0), 1f64.exp(), 1e-14));
        assert!(close(e.get(1, 1), 2f64.exp(), 1e-14));
        assert_eq!(e.get(0, 1), 0.0);
        let nil = m(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert_eq!(
            matrix_exp(&nil, &cfg()).unwrap(),
            m(&[&[1.0, 1.0], &[0.0, 1.0]])
        );
    }

    #[test]
    fn matrix_exp_overflow_is_range_error() {
        let big = m(&[&[800.0]]);
        assert!(matches!(matrix_exp(&big, &cfg()), Err(Error::Range(_))));
    }

    #[test]
    fn resolvent_examples() {
        assert_eq!(resolvent(&m(&[&[1.0]]), 2.0, &cfg()).unwrap(), m(&[&[1.0]]));
        let nil = m(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert_eq!(
            resolvent(&nil, 1.0, &cfg()).unwrap(),
            m(&[&[1.0, 1.0], &[0.0, 1.0]])
        );
        let j = m(&[&[1.0, 1.0], &[1.0, 1.0]]);
        let r = resolvent(&j, 4.0, &cfg()).unwrap();
        let want = [0.375, 0.125, 0.125, 0.375];
        for (v, w) in r.data().iter().zip(want) {
            assert!((v - w).abs() <= 1e-15);
        }
    }

    #[test]
    fn resolvent_requires_lambda_above_rho() {
        let j = m(&[&[1.0, 1.0], &[1.0, 1.0]]);
        assert!(matches!(
            resolvent(&j, 2.0, &cfg()),
            Err(Error::SpectralConstraint { .. })
        ));
        assert!(resolvent(&j, 1.0, &cfg()).is_err());
        assert!(resolvent(&j, f64::NAN, &cfg()).is_err());
    }

    #[test]
    fn estimate_serializes_with_method_name() {
        let e = SpectralEstimate::exact(2.0, Method::PowerIteration);
        assert_eq!(
            serde_json::to_string(&e).unwrap(),
            r#"{"value":2.0,"iterations":0,"residual":0.0,"converged":true,"method":"power_iteration"}"#
        );
    }

    #[test]
    fn tolerance_validation() {
        assert!(cfg().validate().is_ok());
        let bad = ToleranceConfig {
            rel_tol: 0.0,
            ..cfg()
        };
        assert!(bad.validate().is_err());
        let bad = ToleranceConfig {
            max_squarings: 0,
            ..cfg()
        };
        assert!(bad.validate().is_err());
    }
}
