//! Small dense linear algebra on row-major `f64` slices.

use alloc::vec;
use alloc::vec::Vec;

/// Determinant of an `n×n` row-major matrix by LU with partial pivoting.
pub fn determinant(n: usize, m: &[f64]) -> f64 {
    assert_eq!(m.len(), n * n);
    let mut a = m.to_vec();
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| libm::fabs(a[i * n + col]).total_cmp(&libm::fabs(a[j * n + col])))
            .unwrap_or(col);
        if a[pivot * n + col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            for k in 0..n {
                a.swap(pivot * n + k, col * n + k);
            }
            det = -det;
        }
        let p = a[col * n + col];
        det *= p;
        for row in col + 1..n {
            let f = a[row * n + col] / p;
            if f != 0.0 {
                for k in col..n {
                    a[row * n + k] -= f * a[col * n + k];
                }
            }
        }
    }
    det
}

/// Singular values and right singular vectors of a tall matrix.
#[derive(Clone, Debug)]
pub struct Svd {
    /// Descending.
    pub singular_values: Vec<f64>,
    /// Column `k` of `v` (stored as `v[k]`) pairs with `singular_values[k]`.
    pub right_vectors: Vec<Vec<f64>>,
}

/// One-sided Jacobi SVD of a `rows×cols` column-major matrix given as a
/// list of columns. Accurate for small singular values, which a rank
/// decision near `1e-10·σ_max` needs.
pub fn svd_columns(mut columns: Vec<Vec<f64>>) -> Svd {
    let cols = columns.len();
    let mut v: Vec<Vec<f64>> = (0..cols)
        .map(|k| {
            let mut e = vec![0.0; cols];
            e[k] = 1.0;
            e
        })
        .collect();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let alpha = dot(&columns[p], &columns[p]);
                let beta = dot(&columns[q], &columns[q]);
                let gamma = dot(&columns[p], &columns[q]);
                if gamma == 0.0 || libm::fabs(gamma) <= 1e-15 * libm::sqrt(alpha * beta) {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = libm::copysign(1.0, zeta) / (libm::fabs(zeta) + libm::sqrt(1.0 + zeta * zeta));
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = c * t;
                rotate(&mut columns, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<(f64, usize)> = columns
        .iter()
        .enumerate()
        .map(|(k, c)| (libm::sqrt(dot(c, c)), k))
        .collect();
    order.sort_by(|a, b| b.0.total_cmp(&a.0));
    Svd {
        singular_values: order.iter().map(|(s, _)| *s).collect(),
        right_vectors: order.iter().map(|(_, k)| v[*k].clone()).collect(),
    }
}

fn rotate(m: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (left, right) = m.split_at_mut(q);
    let (a, b) = (&mut left[p], &mut right[0]);
    for (x, y) in a.iter_mut().zip(b.iter_mut()) {
        let (xp, yq) = (*x, *y);
        *x = c * xp - s * yq;
        *y = s * xp + c * yq;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn determinant_with_pivoting() {
        assert_eq!(determinant(2, &[0.0, 1.0, 1.0, 0.0]), -1.0);
        assert!((determinant(3, &[2.0, 0.0, 1.0, 1.0, 3.0, 2.0, 1.0, 1.0, 2.0]) - 6.0).abs() < 1e-14);
        assert_eq!(determinant(2, &[1.0, 1.0, 1.0, 1.0]), 0.0);
    }

    #[test]
    fn svd_of_rank_deficient_matrix() {
        // columns (1,2,3), (2,4,6), (0,1,0): rank 2
        let svd = svd_columns(vec![vec![1.0, 2.0, 3.0], vec![2.0, 4.0, 6.0], vec![0.0, 1.0, 0.0]]);
        assert!(svd.singular_values[2] < 1e-14 * svd.singular_values[0]);
        let null = &svd.right_vectors[2];
        // null vector is proportional to (2, -1, 0)
        assert!((null[0] + 2.0 * null[1]).abs() < 1e-12);
        assert!(null[2].abs() < 1e-12);
    }
}
