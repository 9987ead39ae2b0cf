//! Orthogonal matching pursuit with an incrementally orthogonalised support.

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::{dot, norm2, Real};

#[derive(Debug, Clone, PartialEq)]
pub struct SparseSolution<T> {
    /// One entry per dictionary column; zero off the support.
    pub coefficients: Vec<T>,
    /// Selected columns in selection order.
    pub support: Vec<usize>,
    /// `‖y − A·coefficients‖₂`.
    pub residual_norm: T,
    pub iterations: usize,
    /// Multiply-accumulates spent by the solver.
    pub mac_count: u64,
    /// A selected column was linearly dependent on the support and dropped.
    pub rank_deficient: bool,
    /// Residual norm after each accepted column.
    pub residual_history: Vec<T>,
}

/// Column norms of `a`; errors on any all-zero column.
pub fn column_norms<T: Real>(a: &Matrix<T>) -> Result<Vec<T>> {
    let mut sq = vec![T::zero(); a.cols()];
    for i in 0..a.rows() {
        for (s, &v) in sq.iter_mut().zip(a.row(i)) {
            *s += v * v;
        }
    }
    sq.iter()
        .enumerate()
        .map(|(j, &s)| {
            if s > T::zero() {
                Ok(s.sqrt())
            } else {
                Err(Error::ZeroColumn(j))
            }
        })
        .collect()
}

/// Greedy sparse solve of `y ≈ A·s`.
///
/// Each step picks the column with the largest normalised correlation with
/// the residual and re-projects `y` onto the span of all picked columns.
/// Stops once `‖r‖ ≤ tol·‖y‖` or `max_support` columns are in use.
pub fn omp<T: Real>(a: &Matrix<T>, y: &[T], max_support: usize, tol: T) -> Result<SparseSolution<T>> {
    let norms = column_norms(a)?;
    let mut sol = omp_with_norms(a, &norms, y, max_support, tol)?;
    sol.mac_count += (a.rows() * a.cols()) as u64;
    Ok(sol)
}

/// [`omp`] with precomputed column norms; their cost is not counted.
pub fn omp_with_norms<T: Real>(
    a: &Matrix<T>,
    norms: &[T],
    y: &[T],
    max_support: usize,
    tol: T,
) -> Result<SparseSolution<T>> {
    let (m, n) = (a.rows(), a.cols());
    if y.len() != m {
        return Err(Error::Dimension(format!(
            "{} measurements against {m}x{n} dictionary",
            y.len()
        )));
    }
    if norms.len() != n {
        return Err(Error::Dimension("column norm count".into()));
    }
    if max_support > m {
        return Err(Error::invalid(
            "max_support",
            format!("{max_support} exceeds measurement count {m}"),
        ));
    }
    if !(tol >= T::zero()) {
        return Err(Error::invalid("tol", "must be non-negative"));
    }
    let (mm, nn) = (m as u64, n as u64);
    let mut macs = mm;
    let y_norm = norm2(y);
    if !y_norm.is_finite() {
        return Err(Error::Numerical("non-finite measurements".into()));
    }
    let mut sol = SparseSolution {
        coefficients: vec![T::zero(); n],
        support: Vec::new(),
        residual_norm: y_norm,
        iterations: 0,
        mac_count: 0,
        rank_deficient: false,
        residual_history: Vec::new(),
    };
    if y_norm == T::zero() {
        sol.mac_count = macs;
        return Ok(sol);
    }

    let mut excluded = vec![false; n];
    let mut q: Vec<Vec<T>> = Vec::new();
    let mut r_cols: Vec<Vec<T>> = Vec::new();
    let mut qty: Vec<T> = Vec::new();
    let mut residual = y.to_vec();
    let mut res_norm = y_norm;
    let stop = tol * y_norm;

    while sol.support.len() < max_support && res_norm > stop {
        sol.iterations += 1;
        let corr = a.matvec_transposed(&residual)?;
        macs += mm * nn;
        let mut best: Option<(usize, T)> = None;
        for (j, (&c, &nj)) in corr.iter().zip(norms).enumerate() {
            if excluded[j] {
                continue;
            }
            let score = c.abs() / nj;
            if best.is_none_or(|(_, b)| score > b) {
                best = Some((j, score));
            }
        }
        let Some((j, score)) = best else { break };
        if score <= T::epsilon() * res_norm {
            break;
        }
        excluded[j] = true;

        let mut v = a.column(j);
        let mut coeffs = vec![T::zero(); q.len()];
        // Two Gram-Schmidt passes keep the basis orthogonal to working precision.
        for _ in 0..2 {
            for (qi, ci) in q.iter().zip(coeffs.iter_mut()) {
                let p = dot(qi, &v);
                *ci += p;
                v.iter_mut().zip(qi).for_each(|(vv, &qq)| *vv -= p * qq);
            }
        }
        macs += 4 * mm * q.len() as u64 + mm;
        let nv = norm2(&v);
        if nv <= T::lit(1e-10) * norms[j] {
            sol.rank_deficient = true;
            continue;
        }
        v.iter_mut().for_each(|vv| *vv /= nv);
        coeffs.push(nv);
        qty.push(dot(&v, y));
        let proj = dot(&v, &residual);
        residual.iter_mut().zip(&v).for_each(|(r, &qq)| *r -= proj * qq);
        res_norm = norm2(&residual);
        macs += 4 * mm;
        q.push(v);
        r_cols.push(coeffs);
        sol.support.push(j);
        sol.residual_history.push(res_norm);
    }

    // Back substitution R·c = Qᵀy.
    let k = sol.support.len();
    let mut c = vec![T::zero(); k];
    for i in (0..k).rev() {
        let mut acc = qty[i];
        for jj in i + 1..k {
            acc -= r_cols[jj][i] * c[jj];
        }
        c[i] = acc / r_cols[i][i];
    }
    macs += (k * (k + 1) / 2) as u64;
    for (&j, &v) in sol.support.iter().zip(&c) {
        sol.coefficients[j] = v;
    }
    let mut final_res = y.to_vec();
    for (&j, &v) in sol.support.iter().zip(&c) {
        for (i, r) in final_res.iter_mut().enumerate() {
            *r -= a[(i, j)] * v;
        }
    }
    macs += mm * k as u64 + mm;
    sol.residual_norm = norm2(&final_res);
    sol.mac_count = macs;
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sensing::bernoulli_matrix;

    /// Least squares on a known support via the normal equations.
    fn ls_oracle(a: &Matrix<f64>, support: &[usize], y: &[f64]) -> Vec<f64> {
        let sub = a.select_columns(support);
        let ata = sub.transpose().matmul(&sub).unwrap();
        let aty = sub.matvec_transposed(y).unwrap();
        crate::linalg::solve_dense(&ata, &aty).unwrap()
    }

    #[test]
    fn zero_measurements() {
        let a = bernoulli_matrix::<f64>(8, 16, 1).unwrap().entries;
        let s = omp(&a, &[0.0; 8], 4, 0.01).unwrap();
        assert!(s.support.is_empty());
        assert_eq!(s.iterations, 0);
        assert!(s.coefficients.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn exact_three_sparse() {
        let a = bernoulli_matrix::<f64>(32, 64, 3).unwrap().entries;
        let mut s = vec![0.0; 64];
        s[5] = 1.0;
        s[20] = -2.0;
        s[47] = 0.5;
        let y = a.matvec(&s).unwrap();
        let sol = omp(&a, &y, 32, 1e-10).unwrap();
        let mut support = sol.support.clone();
        support.sort();
        assert_eq!(support, vec![5, 20, 47]);
        let oracle = ls_oracle(&a, &[5, 20, 47], &y);
        for (&j, e) in [5usize, 20, 47].iter().zip(oracle) {
            assert!((sol.coefficients[j] - e).abs() < 1e-8);
            assert!((sol.coefficients[j] - s[j]).abs() < 1e-8);
        }
        assert!(sol.residual_norm < 1e-10);
    }

    #[test]
    fn under_measured_degrades_gracefully() {
        let a = bernoulli_matrix::<f64>(20, 64, 8).unwrap().entries;
        let mut s = vec![0.0; 64];
        for (k, j) in [1, 7, 13, 22, 30, 38, 41, 50, 57, 63].iter().enumerate() {
            s[*j] = 1.0 + k as f64 * 0.3;
        }
        let y = a.matvec(&s).unwrap();
        let sol = omp(&a, &y, 20, 0.0).unwrap();
        let direct = {
            let r: Vec<f64> = a
                .matvec(&sol.coefficients)
                .unwrap()
                .iter()
                .zip(&y)
                .map(|(p, q)| q - p)
                .collect();
            norm2(&r)
        };
        assert!((sol.residual_norm - direct).abs() < 1e-9);
        assert!(sol.support.len() <= 20);
    }

    #[test]
    fn rejects_bad_inputs() {
        let mut a = bernoulli_matrix::<f64>(8, 16, 1).unwrap().entries;
        assert!(omp(&a, &[1.0; 8], 9, 0.0).is_err());
        assert!(omp(&a, &[1.0; 7], 4, 0.0).is_err());
        assert!(omp(&a, &[1.0; 8], 4, -1.0).is_err());
        for i in 0..8 {
            a[(i, 3)] = 0.0;
        }
        assert!(matches!(omp(&a, &[1.0; 8], 4, 0.0), Err(Error::ZeroColumn(3))));
    }

    #[test]
    fn near_duplicate_column_flags_rank_deficiency() {
        let base = bernoulli_matrix::<f64>(6, 6, 2).unwrap().entries;
        // Column 1 equals column 0 up to 1e-12 in a single entry.
        let a = Matrix::from_fn(6, 3, |i, j| match j {
            0 => base[(i, 0)],
            1 => base[(i, 0)] + if i == 2 { 1e-12 } else { 0.0 },
            _ => base[(i, 1)],
        });
        let y = [1.0, -0.3, 0.7, 0.2, -1.1, 0.4];
        let sol = omp(&a, &y, 3, 0.0).unwrap();
        assert!(sol.rank_deficient);
        assert_eq!(sol.support.len(), 2);
        let r: Vec<f64> = a
            .matvec(&sol.coefficients)
            .unwrap()
            .iter()
            .zip(&y)
            .map(|(p, q)| q - p)
            .collect();
        assert!((sol.residual_norm - norm2(&r)).abs() < 1e-12);
    }
}
