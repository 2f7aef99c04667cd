use super::eigen::Mat;
use super::real::Real;

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
/// Returns `None` when a pivot vanishes exactly.
pub fn lu_solve<T: Real>(a: &Mat<T>, b: &[T]) -> Option<Vec<T>> {
    let n = a.dim();
    lu_solve_banded(a, n, n, b)
}

/// Same as [`lu_solve`] for a matrix with `kl` sub- and `ku` super-diagonals.
/// Pivoting widens the upper band to `kl + ku`, so the cost is O(n·kl·(kl+ku)).
pub fn lu_solve_banded<T: Real>(a: &Mat<T>, kl: usize, ku: usize, b: &[T]) -> Option<Vec<T>> {
    let n = a.dim();
    let mut m: Vec<Vec<T>> = (0..n).map(|i| (0..n).map(|j| a.get(i, j)).collect()).collect();
    let mut x = b.to_vec();
    for col in 0..n {
        let last_row = (col + kl + 1).min(n);
        let last_col = (col + kl + ku + 1).min(n);
        let piv = (col..last_row).max_by(|&p, &q| m[p][col].abs().partial_cmp(&m[q][col].abs()).unwrap())?;
        if m[piv][col] == T::zero() {
            return None;
        }
        m.swap(piv, col);
        x.swap(piv, col);
        let d = m[col][col];
        for r in (col + 1)..last_row {
            let f = m[r][col] / d;
            if f == T::zero() {
                continue;
            }
            for c in col..last_col {
                let v = m[col][c];
                m[r][c] -= f * v;
            }
            let xc = x[col];
            x[r] -= f * xc;
        }
    }
    for r in (0..n).rev() {
        let mut acc = x[r];
        for c in (r + 1)..n {
            acc -= m[r][c] * x[c];
        }
        x[r] = acc / m[r][r];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_a_permuted_system() {
        let mut a = Mat::zeros(3);
        for (i, row) in [[0.0, 2.0, 1.0], [1.0, 1.0, 0.0], [3.0, 0.0, 1.0]].iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                a.set(i, j, v);
            }
        }
        let x = lu_solve(&a, &[4.5, 3.0, 6.0]).unwrap();
        for (got, want) in x.iter().zip([1.5, 1.5, 1.5]) {
            assert!((got - want).abs() < 1e-14);
        }
    }

    #[test]
    fn banded_matches_dense_on_pentadiagonal() {
        let n = 9;
        let mut a = Mat::zeros(n);
        for i in 0..n {
            for j in i.saturating_sub(2)..(i + 3).min(n) {
                a.set(i, j, ((i * 7 + j * 3) % 5) as f64 - 2.0 + if i == j { 0.1 } else { 0.0 });
            }
        }
        let b: Vec<f64> = (0..n).map(|i| i as f64 - 3.0).collect();
        let x = lu_solve(&a, &b).unwrap();
        let y = lu_solve_banded(&a, 2, 2, &b).unwrap();
        for (p, q) in x.iter().zip(&y) {
            assert!((p - q).abs() < 1e-10 * (1.0 + p.abs()));
        }
    }
}
