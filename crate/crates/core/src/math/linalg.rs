//! Small dense linear algebra for vertex enumeration.

/// Solves `A x = b` for `x`, where `A` is given column-wise.
///
/// Returns `None` if the columns are linearly dependent or the system is
/// inconsistent. Gaussian elimination with partial pivoting.
pub fn solve_columns(columns: &[Vec<f64>], b: &[f64], tol: f64) -> Option<Vec<f64>> {
    let m = b.len();
    let k = columns.len();
    debug_assert!(columns.iter().all(|c| c.len() == m));
    let mut aug: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            let mut row: Vec<f64> = columns.iter().map(|c| c[i]).collect();
            row.push(b[i]);
            row
        })
        .collect();

    let mut pivot_rows = Vec::with_capacity(k);
    let mut r = 0;
    for c in 0..k {
        let best = (r..m).max_by(|&i, &j| aug[i][c].abs().total_cmp(&aug[j][c].abs()))?;
        if aug[best][c].abs() <= tol {
            return None;
        }
        aug.swap(r, best);
        let p = aug[r][c];
        for v in aug[r].iter_mut() {
            *v /= p;
        }
        let pivot = aug[r].clone();
        for (i, row) in aug.iter_mut().enumerate() {
            if i != r && row[c] != 0.0 {
                let f = row[c];
                for (v, pv) in row.iter_mut().zip(&pivot) {
                    *v -= f * pv;
                }
            }
        }
        pivot_rows.push(r);
        r += 1;
    }
    if aug[r..].iter().any(|row| row[k].abs() > tol) {
        return None;
    }
    Some(pivot_rows.iter().map(|&i| aug[i][k]).collect())
}

/// Numerical rank of a row-major matrix.
pub fn rank(rows: &[Vec<f64>], tol: f64) -> usize {
    let mut a = rows.to_vec();
    let m = a.len();
    let n = a.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..n {
        if r == m {
            break;
        }
        let best = (r..m)
            .max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))
            .unwrap();
        if a[best][c].abs() <= tol {
            continue;
        }
        a.swap(r, best);
        let pivot = a[r].clone();
        for row in a.iter_mut().skip(r + 1) {
            let f = row[c] / pivot[c];
            for (v, pv) in row.iter_mut().zip(&pivot) {
                *v -= f * pv;
            }
        }
        r += 1;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_system() {
        let cols = vec![vec![2.0, 1.0], vec![1.0, 3.0]];
        let x = solve_columns(&cols, &[5.0, 10.0], 1e-12).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn overdetermined_consistent_and_not() {
        let cols = vec![vec![1.0, 1.0, 2.0]];
        assert_eq!(solve_columns(&cols, &[0.5, 0.5, 1.0], 1e-12), Some(vec![0.5]));
        assert_eq!(solve_columns(&cols, &[0.5, 0.4, 1.0], 1e-12), None);
    }

    #[test]
    fn dependent_columns() {
        let cols = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        assert_eq!(solve_columns(&cols, &[1.0, 2.0], 1e-12), None);
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank(&[vec![1.0, 2.0], vec![2.0, 4.0]], 1e-12), 1);
        assert_eq!(rank(&[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 1.0]], 1e-12), 2);
    }
}
