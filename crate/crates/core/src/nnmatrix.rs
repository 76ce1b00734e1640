//! Dense non-negative matrices and the entrywise (Hadamard) algebra on them.
//!
//! Every [`NonNegativeMatrix`] is validated at construction: entries are finite
//! and `>= 0`, and both dimensions are at least one. All operations are pure and
//! return fresh values, so downstream code may rely on the invariant without
//! re-checking it.
//!
//! Storage is row-major: `data[i * cols + j]` holds entry `(i, j)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default tolerance for [`elementwise_le`].
pub const DEFAULT_LE_TOL: f64 = 1e-9;

/// Slack allowed when checking that a weight vector sums to at least one.
pub const WEIGHT_SUM_SLACK: f64 = 1e-12;

/// A dense rectangular matrix with finite non-negative entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct NonNegativeMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

/// Wire form shared by every module: `{"rows": n, "cols": m, "data": [[...], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Vec<f64>>,
}

impl TryFrom<MatrixJson> for NonNegativeMatrix {
    type Error = Error;

    fn try_from(m: MatrixJson) -> Result<Self> {
        if m.data.len() != m.rows {
            return Err(Error::Shape(format!(
                "declared {} rows but data has {}",
                m.rows,
                m.data.len()
            )));
        }
        let mut flat = Vec::with_capacity(m.rows * m.cols);
        for (i, row) in m.data.iter().enumerate() {
            if row.len() != m.cols {
                return Err(Error::Shape(format!(
                    "row {i} has {} entries, expected {}",
                    row.len(),
                    m.cols
                )));
            }
            flat.extend_from_slice(row);
        }
        NonNegativeMatrix::new(m.rows, m.cols, flat)
    }
}

impl From<NonNegativeMatrix> for MatrixJson {
    fn from(m: NonNegativeMatrix) -> Self {
        MatrixJson {
            rows: m.rows,
            cols: m.cols,
            data: m.data.chunks(m.cols).map(<[f64]>::to_vec).collect(),
        }
    }
}

impl NonNegativeMatrix {
    /// Builds a matrix from row-major data, rejecting negative, NaN and infinite entries.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Shape(format!(
                "dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "expected {} entries for {rows}x{cols}, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(k) = data.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidEntry {
                row: k / cols,
                col: k % cols,
                value: data[k],
            });
        }
        // Normalise -0.0 so serialized output never carries a sign on zero.
        let data = data.into_iter().map(|v| v + 0.0).collect();
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from nested rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.as_ref().len());
        let mut data = Vec::with_capacity(r * c);
        for (i, row) in rows.iter().enumerate() {
            if row.as_ref().len() != c {
                return Err(Error::Shape(format!(
                    "row {i} has {} entries, expected {c}",
                    row.as_ref().len()
                )));
            }
            data.extend_from_slice(row.as_ref());
        }
        Self::new(r, c, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        Self::new(rows, cols, vec![0.0; rows * cols])
    }

    pub fn ones(rows: usize, cols: usize) -> Result<Self> {
        Self::new(rows, cols, vec![1.0; rows * cols])
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        let n = diag.len();
        let mut data = vec![0.0; n * n];
        for (i, d) in diag.iter().enumerate() {
            data[i * n + i] = *d;
        }
        Self::new(n, n, data)
    }

    /// Internal constructor for results that are non-negative by construction.
    /// Non-finite data still goes through full validation and is rejected.
    pub(crate) fn from_parts(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        debug_assert_eq!(data.len(), rows * cols);
        if data.iter().all(|v| v.is_finite()) {
            Ok(Self { rows, cols, data })
        } else {
            Self::new(rows, cols, data)
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Row-major entries.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.cols).map(<[f64]>::to_vec).collect()
    }

    pub fn require_square(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    pub fn transpose(&self) -> Self {
        let mut data = vec![0.0; self.data.len()];
        for i in 0..self.rows {
            for j in 0..self.cols {
                data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    /// Multiplies every entry by `c >= 0`.
    pub fn scale(&self, c: f64) -> Result<Self> {
        if !(c.is_finite() && c >= 0.0) {
            return Err(Error::Domain(format!(
                "scale factor must be finite and non-negative, got {c}"
            )));
        }
        Self::from_parts(
            self.rows,
            self.cols,
            self.data.iter().map(|v| v * c).collect(),
        )
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        same_shape(self, other)?;
        Self::from_parts(
            self.rows,
            self.cols,
            self.data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    /// Largest entry; zero for the zero matrix.
    pub fn max_entry(&self) -> f64 {
        self.data.iter().copied().fold(0.0, f64::max)
    }

    /// Maximum row sum, i.e. the induced infinity norm.
    pub fn max_row_sum(&self) -> f64 {
        self.data
            .chunks(self.cols)
            .map(|r| r.iter().sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Maximum column sum, i.e. the induced 1-norm.
    pub fn max_col_sum(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self.get(i, j)).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| *v == 0.0)
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square() && (0..self.rows).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    /// `self^k` by repeated squaring; `k = 0` gives the identity.
    pub fn matrix_power(&self, k: u32) -> Result<Self> {
        let n = self.require_square()?;
        let mut result = Self::identity(n)?;
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                result = matmul(&result, &base)?;
            }
            e >>= 1;
            if e > 0 {
                base = matmul(&base, &base)?;
            }
        }
        Ok(result)
    }
}

impl std::fmt::Display for NonNegativeMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[")?;
        for (i, row) in self.data.chunks(self.cols).enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for (j, v) in row.iter().enumerate() {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{v}")?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

fn same_shape(a: &NonNegativeMatrix, b: &NonNegativeMatrix) -> Result<()> {
    if a.shape() == b.shape() {
        Ok(())
    } else {
        Err(Error::Dimension {
            expected: a.shape(),
            got: b.shape(),
        })
    }
}

/// Positive weights `alpha_1, ..., alpha_m` for Hadamard weighted geometric means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct WeightVector {
    alphas: Vec<f64>,
    sum: f64,
}

impl WeightVector {
    pub fn new(alphas: Vec<f64>) -> Result<Self> {
        if alphas.is_empty() {
            return Err(Error::Domain("weight vector is empty".into()));
        }
        if let Some(a) = alphas.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
            return Err(Error::Domain(format!(
                "weights must be finite and positive, got {a}"
            )));
        }
        let sum = alphas.iter().sum();
        Ok(Self { alphas, sum })
    }

    /// `m` equal weights `1/m`.
    pub fn uniform(m: usize) -> Result<Self> {
        Self::new(vec![1.0 / m as f64; m])
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn sum(&self) -> f64 {
        self.sum
    }

    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }

    /// `sum >= 1` up to [`WEIGHT_SUM_SLACK`].
    pub fn sums_to_at_least_one(&self) -> bool {
        self.sum >= 1.0 - WEIGHT_SUM_SLACK
    }

    /// `sum == 1` up to [`WEIGHT_SUM_SLACK`].
    pub fn sums_to_one(&self) -> bool {
        (self.sum - 1.0).abs() <= WEIGHT_SUM_SLACK
    }
}

impl TryFrom<Vec<f64>> for WeightVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<WeightVector> for Vec<f64> {
    fn from(w: WeightVector) -> Self {
        w.alphas
    }
}

/// Entrywise product `A ∘ B`.
pub fn hadamard_product(a: &NonNegativeMatrix, b: &NonNegativeMatrix) -> Result<NonNegativeMatrix> {
    same_shape(a, b)?;
    NonNegativeMatrix::from_parts(
        a.rows,
        a.cols,
        a.data.iter().zip(&b.data).map(|(x, y)| x * y).collect(),
    )
}

/// `A_1 ∘ A_2 ∘ ... ∘ A_m` for a non-empty list.
pub fn hadamard_product_all(mats: &[NonNegativeMatrix]) -> Result<NonNegativeMatrix> {
    let (first, rest) = mats
        .split_first()
        .ok_or_else(|| Error::Contract("empty matrix list".into()))?;
    rest.iter()
        .try_fold(first.clone(), |acc, m| hadamard_product(&acc, m))
}

/// Entrywise power `A^(t)` with `0^0 = 1`.
pub fn hadamard_power(a: &NonNegativeMatrix, t: f64) -> Result<NonNegativeMatrix> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::Domain(format!(
            "Hadamard exponent must be finite and non-negative, got {t}"
        )));
    }
    // f64::powf already returns 1 for 0^0 and 0 for 0^t with t > 0.
    let data = a.data.iter().map(|v| v.powf(t)).collect();
    let out = NonNegativeMatrix::from_parts(a.rows, a.cols, data);
    out.map_err(|_| Error::Range(format!("Hadamard power {t} overflows")))
}

/// Ordinary matrix product.
pub fn matmul(a: &NonNegativeMatrix, b: &NonNegativeMatrix) -> Result<NonNegativeMatrix> {
    if a.cols != b.rows {
        return Err(Error::Dimension {
            expected: (a.cols, b.cols),
            got: b.shape(),
        });
    }
    let (n, k, m) = (a.rows, a.cols, b.cols);
    let mut data = vec![0.0; n * m];
    for i in 0..n {
        let out = &mut data[i * m..(i + 1) * m];
        for p in 0..k {
            let aip = a.data[i * k + p];
            if aip == 0.0 {
                continue;
            }
            let brow = &b.data[p * m..(p + 1) * m];
            for (o, bv) in out.iter_mut().zip(brow) {
                *o += aip * bv;
            }
        }
    }
    NonNegativeMatrix::from_parts(n, m, data)
        .map_err(|_| Error::Range("matrix product overflows".into()))
}

/// `A_1 A_2 ... A_m` for a non-empty list.
pub fn matmul_all(mats: &[NonNegativeMatrix]) -> Result<NonNegativeMatrix> {
    let (first, rest) = mats
        .split_first()
        .ok_or_else(|| Error::Contract("empty matrix list".into()))?;
    rest.iter()
        .try_fold(first.clone(), |acc, m| matmul(&acc, m))
}

/// Entrywise `prod_k mats[k]^(alpha_k)`, with `0^0 = 1` per factor.
///
/// The weights must sum to at least one (with [`WEIGHT_SUM_SLACK`]).
pub fn hadamard_weighted_geomean(
    mats: &[NonNegativeMatrix],
    w: &WeightVector,
) -> Result<NonNegativeMatrix> {
    if mats.is_empty() {
        return Err(Error::Contract("empty matrix list".into()));
    }
    if mats.len() != w.len() {
        return Err(Error::Contract(format!(
            "{} matrices but {} weights",
            mats.len(),
            w.len()
        )));
    }
    if !w.sums_to_at_least_one() {
        return Err(Error::Domain(format!(
            "weights must sum to at least 1, got {}",
            w.sum()
        )));
    }
    let first = &mats[0];
    for m in &mats[1..] {
        same_shape(first, m)?;
    }
    let mut data = vec![1.0; first.data.len()];
    for (m, alpha) in mats.iter().zip(w.alphas()) {
        for (d, v) in data.iter_mut().zip(&m.data) {
            *d *= v.powf(*alpha);
        }
    }
    NonNegativeMatrix::from_parts(first.rows, first.cols, data)
        .map_err(|_| Error::Range("weighted geometric mean overflows".into()))
}

fn square_family(mats: &[NonNegativeMatrix]) -> Result<usize> {
    let first = mats
        .first()
        .ok_or_else(|| Error::Contract("empty matrix list".into()))?;
    let n = first.require_square()?;
    for m in mats {
        m.require_square()?;
        same_shape(first, m)?;
    }
    Ok(n)
}

/// Block-cyclic embedding `T(A_1, ..., A_m)`: `A_i` on the i-th block
/// superdiagonal and `A_m` in the bottom-left block.
///
/// `T^m` is block diagonal with the cyclic products `A_i ... A_m A_1 ... A_{i-1}`.
pub fn block_cyclic(mats: &[NonNegativeMatrix]) -> Result<NonNegativeMatrix> {
    if mats.len() < 2 {
        return Err(Error::Contract(format!(
            "block-cyclic embedding needs at least 2 matrices, got {}",
            mats.len()
        )));
    }
    let n = square_family(mats)?;
    let m = mats.len();
    let size = m * n;
    let mut data = vec![0.0; size * size];
    for (b, a) in mats.iter().enumerate() {
        let (br, bc) = (b, (b + 1) % m);
        for i in 0..n {
            for j in 0..n {
                data[(br * n + i) * size + bc * n + j] = a.get(i, j);
            }
        }
    }
    NonNegativeMatrix::from_parts(size, size, data)
}

/// Cyclic products of Hadamard powers without the `t in [1, m]` contract.
pub(crate) fn cyclic_products_any(
    mats: &[NonNegativeMatrix],
    t: f64,
) -> Result<Vec<NonNegativeMatrix>> {
    square_family(mats)?;
    let powered = mats
        .iter()
        .map(|a| hadamard_power(a, t))
        .collect::<Result<Vec<_>>>()?;
    let m = powered.len();
    (0..m)
        .map(|i| {
            let order: Vec<NonNegativeMatrix> =
                (0..m).map(|j| powered[(i + j) % m].clone()).collect();
            matmul_all(&order)
        })
        .collect()
}

/// `P_i = A_i^(t) A_{i+1}^(t) ... A_m^(t) A_1^(t) ... A_{i-1}^(t)` for `i = 1..m`,
/// with `t` restricted to `[1, m]`.
pub fn cyclic_products(mats: &[NonNegativeMatrix], t: f64) -> Result<Vec<NonNegativeMatrix>> {
    let m = mats.len() as f64;
    if !(t.is_finite() && (1.0..=m).contains(&t)) {
        return Err(Error::Domain(format!("t = {t} must lie in [1, {m}]")));
    }
    cyclic_products_any(mats, t)
}

/// `A <= B` entrywise, allowing `a_ij <= b_ij + tol * max(1, b_ij)`.
pub fn elementwise_le(a: &NonNegativeMatrix, b: &NonNegativeMatrix, tol: f64) -> Result<bool> {
    Ok(elementwise_excess(a, b)? <= tol)
}

/// `max_ij (a_ij - b_ij) / max(1, b_ij)`: non-positive exactly when `A <= B`.
///
/// This is the quantity [`elementwise_le`] compares against its tolerance.
pub fn elementwise_excess(a: &NonNegativeMatrix, b: &NonNegativeMatrix) -> Result<f64> {
    same_shape(a, b)?;
    Ok(a.data
        .iter()
        .zip(&b.data)
        .map(|(x, y)| (x - y) / y.max(1.0))
        .fold(f64::NEG_INFINITY, f64::max))
}
