//! Minimum-cost perfect matching on a dense square cost matrix
//! (Hungarian algorithm with potentials, O(n^3)).

/// Returns `perm` such that row `i` is assigned to column `perm[i]`.
pub fn hungarian(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    let inf = f64::INFINITY;
    // 1-based potentials, column 0 is a sentinel
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut perm = vec![0; n];
    for j in 1..=n {
        perm[p[j] - 1] = j - 1;
    }
    perm
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn picks_the_cheap_antidiagonal() {
        let c = vec![vec![9.0, 1.0, 9.0], vec![1.0, 9.0, 9.0], vec![9.0, 9.0, 1.0]];
        assert_eq!(hungarian(&c), vec![1, 0, 2]);
    }

    #[test]
    fn greedy_is_not_optimal_here() {
        // greedy on row 0 would take column 0 (cost 1) and force 100 below
        let c = vec![vec![1.0, 2.0], vec![100.0, 3.0]];
        assert_eq!(hungarian(&c), vec![0, 1]);
        let c = vec![vec![1.0, 2.0], vec![3.0, 100.0]];
        assert_eq!(hungarian(&c), vec![1, 0]);
    }
}
