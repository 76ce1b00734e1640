//! Reference computations that share no code with the library estimators.

#![allow(dead_code)]

use hadamard_core::NonNegativeMatrix;
use num_complex::Complex64;

type Dense = Vec<Vec<f64>>;

pub fn dense(a: &NonNegativeMatrix) -> Dense {
    a.to_rows()
}

fn mul(a: &Dense, b: &Dense) -> Dense {
    let n = a.len();
    let m = b[0].len();
    let k = b.len();
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| (0..k).map(|p| a[i][p] * b[p][j]).sum())
                .collect()
        })
        .collect()
}

/// Characteristic polynomial coefficients `c_0..=c_n` (monic, `c_n = 1`) by
/// the Faddeev-LeVerrier recursion.
pub fn char_poly(a: &Dense) -> Vec<f64> {
    let n = a.len();
    let mut c = vec![0.0; n + 1];
    c[n] = 1.0;
    let mut m = vec![vec![0.0; n]; n];
    for k in 1..=n {
        let mut next = mul(a, &m);
        for (i, row) in next.iter_mut().enumerate() {
            row[i] += c[n - k + 1];
        }
        let am = mul(a, &next);
        let trace: f64 = (0..n).map(|i| am[i][i]).sum();
        c[n - k] = -trace / k as f64;
        m = next;
    }
    c
}

fn horner(c: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for coef in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + coef;
    }
    (p, dp)
}

/// All roots of a monic polynomial by Durand-Kerner, each polished by Newton.
pub fn poly_roots(c: &[f64]) -> Vec<Complex64> {
    let n = c.len() - 1;
    if n == 0 {
        return vec![];
    }
    let bound = 1.0 + c[..n].iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..n).map(|k| seed.powu(k as u32 + 1) * bound).collect();
    for _ in 0..2000 {
        let mut delta = 0.0f64;
        for i in 0..n {
            let (p, _) = horner(c, z[i]);
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if j != i {
                    denom *= z[i] - z[j];
                }
            }
            if denom.norm() == 0.0 {
                continue;
            }
            let step = p / denom;
            z[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta <= 1e-16 * bound {
            break;
        }
    }
    for root in z.iter_mut() {
        for _ in 0..5 {
            let (p, dp) = horner(c, *root);
            if dp.norm() == 0.0 {
                break;
            }
            *root -= p / dp;
        }
    }
    z
}

/// Largest root modulus of the characteristic polynomial.
pub fn rho_charpoly(a: &NonNegativeMatrix) -> f64 {
    poly_roots(&char_poly(&dense(a)))
        .iter()
        .fold(0.0, |m, z| m.max(z.norm()))
}

/// Max cycle geometric mean by enumerating every elementary cycle.
pub fn max_cycle_mean(a: &NonNegativeMatrix) -> f64 {
    let d = dense(a);
    let n = d.len();
    let mut best = 0.0f64;
    fn walk(d: &Dense, start: usize, path: &mut Vec<usize>, best: &mut f64) {
        let last = *path.last().unwrap();
        for next in start..d.len() {
            if d[last][next] == 0.0 {
                continue;
            }
            if next == start {
                let mut prod = d[last][start];
                for w in path.windows(2) {
                    prod *= d[w[0]][w[1]];
                }
                *best = best.max(prod.powf(1.0 / path.len() as f64));
            } else if !path.contains(&next) {
                path.push(next);
                walk(d, start, path, best);
                path.pop();
            }
        }
    }
    for start in 0..n {
        walk(&d, start, &mut vec![start], &mut best);
    }
    best
}

/// Largest eigenvalue of a symmetric 2x2 matrix in closed form.
pub fn sym2_lambda_max(a: f64, b: f64, d: f64) -> f64 {
    0.5 * (a + d) + (0.25 * (a - d) * (a - d) + b * b).sqrt()
}

/// `sum_k X^k / k!` summed directly until the terms vanish.
pub fn exp_taylor(a: &NonNegativeMatrix) -> Dense {
    let d = dense(a);
    let n = d.len();
    let mut sum: Dense = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let mut term = sum.clone();
    for k in 1..400 {
        term = mul(&term, &d);
        let inv = 1.0 / k as f64;
        let mut size = 0.0f64;
        for row in term.iter_mut() {
            for v in row.iter_mut() {
                *v *= inv;
                size = size.max(*v);
            }
        }
        for i in 0..n {
            for j in 0..n {
                sum[i][j] += term[i][j];
            }
        }
        if size == 0.0 || size < 1e-18 * sum.iter().flatten().fold(0.0f64, |m, v| m.max(*v)) {
            break;
        }
    }
    sum
}

/// `sum_k X^k / lambda^{k+1}`, the Neumann series of `(lambda I - X)^{-1}`.
pub fn resolvent_neumann(a: &NonNegativeMatrix, lambda: f64) -> Dense {
    let d = dense(a);
    let n = d.len();
    let mut term: Dense = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { 1.0 / lambda } else { 0.0 })
                .collect()
        })
        .collect();
    let mut sum = term.clone();
    for _ in 0..20_000 {
        term = mul(&term, &d);
        let mut size = 0.0f64;
        for row in term.iter_mut() {
            for v in row.iter_mut() {
                *v /= lambda;
                size = size.max(*v);
            }
        }
        for i in 0..n {
            for j in 0..n {
                sum[i][j] += term[i][j];
            }
        }
        if size == 0.0 || size < 1e-18 * sum.iter().flatten().fold(0.0f64, |m, v| m.max(*v)) {
            break;
        }
    }
    sum
}

/// Largest relative entrywise difference, scaled by the largest entry.
pub fn max_rel_diff(a: &NonNegativeMatrix, b: &Dense) -> f64 {
    let scale = b.iter().flatten().fold(1e-300f64, |m, v| m.max(v.abs()));
    let d = dense(a);
    d.iter()
        .flatten()
        .zip(b.iter().flatten())
        .fold(0.0, |m, (x, y)| m.max((x - y).abs() / scale))
}
