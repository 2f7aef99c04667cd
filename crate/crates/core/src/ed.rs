//! Exact diagonalization of the LMG Hamiltonian in a parity sector of the
//! |j, m⟩ basis.
//!
//! H = ε S_z + (λ/2)(S₊² + S₋²) + (γ/2)(S₊S₋ + S₋S₊), with
//! S₊S₋ + S₋S₊ = 2(S² − S_z²).

use nalgebra::{DMatrix, SymmetricEigen};

use crate::model::{ModelPoint, Parity};

#[derive(Clone, Debug)]
pub struct LmgMatrix {
    pub j: u32,
    pub parity: Parity,
    pub diag: Vec<f64>,
    /// ⟨m+2|H|m⟩ for consecutive basis entries.
    pub offdiag: Vec<f64>,
    pub basis_m: Vec<i64>,
}

#[derive(Clone, Debug)]
pub struct OracleSpectrum {
    pub parity: Parity,
    pub energies: Vec<f64>,
    /// Column `k` is the eigenvector of `energies[k]` over `basis_m`.
    pub vectors: DMatrix<f64>,
    pub basis_m: Vec<i64>,
}

/// ⟨m+2|S₊²|m⟩.
pub fn s_plus_sq(j: i64, m: i64) -> f64 {
    (((j - m) * (j + m + 1) * (j - m - 1) * (j + m + 2)) as f64).sqrt()
}

pub fn build_matrix(j: u32, parity: Parity, epsilon: f64, lambda: f64, gamma: f64) -> LmgMatrix {
    let jj = j as i64;
    let nu = parity.nu() as i64;
    let basis_m: Vec<i64> = (0..=(jj - nu) as usize).map(|k| -jj + nu + 2 * k as i64).collect();
    let c = (jj * (jj + 1)) as f64;
    let diag = basis_m.iter().map(|&m| epsilon * m as f64 + gamma * (c - (m * m) as f64)).collect();
    let offdiag = basis_m
        .iter()
        .take(basis_m.len().saturating_sub(1))
        .map(|&m| 0.5 * lambda * s_plus_sq(jj, m))
        .collect();
    LmgMatrix { j, parity, diag, offdiag, basis_m }
}

pub fn matrix_for(point: &ModelPoint) -> LmgMatrix {
    let (lambda, gamma) = point.lambda_gamma();
    build_matrix(point.j, point.parity, point.epsilon, lambda, gamma)
}

impl LmgMatrix {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut h = DMatrix::zeros(n, n);
        for i in 0..n {
            h[(i, i)] = self.diag[i];
        }
        for (i, &v) in self.offdiag.iter().enumerate() {
            h[(i, i + 1)] = v;
            h[(i + 1, i)] = v;
        }
        h
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut acc = self.diag[i] * v[i];
                if i > 0 {
                    acc += self.offdiag[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    acc += self.offdiag[i] * v[i + 1];
                }
                acc
            })
            .collect()
    }
}

/// Full spectrum, ascending, with eigenvectors fixed to a positive largest
/// component so the output is deterministic.
pub fn diagonalize(matrix: &LmgMatrix) -> OracleSpectrum {
    let eig = SymmetricEigen::new(matrix.dense());
    let mut order: Vec<usize> = (0..matrix.dim()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let n = matrix.dim();
    let mut vectors = DMatrix::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        let v = eig.eigenvectors.column(k);
        let big = v.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
        let sign = if big < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            vectors[(i, col)] = sign * v[i];
        }
    }
    OracleSpectrum {
        parity: matrix.parity,
        energies: order.iter().map(|&k| eig.eigenvalues[k]).collect(),
        vectors,
        basis_m: matrix.basis_m.clone(),
    }
}

pub fn spectrum(point: &ModelPoint) -> OracleSpectrum {
    diagonalize(&matrix_for(point))
}

/// (⟨S_x²⟩, ⟨S_y²⟩) of a normalized sector vector.
pub fn expectation_sx2_sy2(state: &[f64], j: u32, parity: Parity) -> (f64, f64) {
    let jj = j as i64;
    let nu = parity.nu() as i64;
    let c = (jj * (jj + 1)) as f64;
    let mut diag = 0.0;
    let mut pair = 0.0;
    for (k, &a) in state.iter().enumerate() {
        let m = -jj + nu + 2 * k as i64;
        diag += a * a * 2.0 * (c - (m * m) as f64);
        if let Some(&b) = state.get(k + 1) {
            // S₊² + S₋² contributes twice the symmetric off-diagonal element
            pair += 2.0 * a * b * s_plus_sq(jj, m);
        }
    }
    ((diag + pair) / 4.0, (diag - pair) / 4.0)
}

/// Fock index of basis entry `k`: (n_a, n_b) = (j − m, j + m).
pub fn fock_index(j: u32, parity: Parity, k: usize) -> (u32, u32) {
    let nu = parity.nu();
    let m2 = 2 * k as u32 + nu; // j + m
    (2 * j - m2, m2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn two_by_two_positive_sector() {
        let (eps, lam, gam) = (1.0, 0.37, -0.21);
        let s = diagonalize(&build_matrix(1, Parity::Plus, eps, lam, gam));
        let r = (eps * eps + lam * lam as f64).sqrt();
        assert_relative_eq!(s.energies[0], gam - r, epsilon = 1e-14);
        assert_relative_eq!(s.energies[1], gam + r, epsilon = 1e-14);
    }

    #[test]
    fn negative_sector_of_spin_one_is_scalar() {
        let s = diagonalize(&build_matrix(1, Parity::Minus, 1.0, 0.5, 0.3));
        assert_eq!(s.energies.len(), 1);
        assert_relative_eq!(s.energies[0], 0.6, epsilon = 1e-15);
    }

    #[test]
    fn lowest_weight_state_expectations() {
        let mut v = vec![0.0; 8];
        v[0] = 1.0;
        let (x, y) = expectation_sx2_sy2(&v, 7, Parity::Plus);
        assert_relative_eq!(x, 3.5, epsilon = 1e-14);
        assert_relative_eq!(y, 3.5, epsilon = 1e-14);
    }

    #[test]
    fn sector_dimensions() {
        for j in 1..6 {
            assert_eq!(build_matrix(j, Parity::Plus, 1.0, 0.1, 0.1).dim(), j as usize + 1);
            assert_eq!(build_matrix(j, Parity::Minus, 1.0, 0.1, 0.1).dim(), j as usize);
        }
    }

    #[test]
    fn fock_map_round_trip() {
        assert_eq!(fock_index(10, Parity::Plus, 0), (20, 0));
        assert_eq!(fock_index(10, Parity::Minus, 2), (15, 5));
    }
}
