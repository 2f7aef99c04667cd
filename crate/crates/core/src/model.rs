//! Model parameters, maps between the LMG and RG parametrizations, symmetry
//! transforms and the analytic special lines.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Parity {
    Plus,
    Minus,
}

impl Parity {
    /// Seniority: 0 for positive parity, 1 for negative.
    pub fn nu(self) -> u32 {
        match self {
            Parity::Plus => 0,
            Parity::Minus => 1,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Parity::Plus => "+",
            Parity::Minus => "-",
        }
    }

    pub fn parse(s: &str) -> Result<Parity> {
        match s {
            "+" | "plus" | "p" | "0" => Ok(Parity::Plus),
            "-" | "minus" | "m" | "1" => Ok(Parity::Minus),
            _ => domain(format!("parity must be + or -, got `{s}`")),
        }
    }
}

/// RG family, selected by the sign `s` of the X/Z functions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    /// s = −1
    Hyperbolic,
    /// s = 0
    Rational,
    /// s = +1
    Trigonometric,
}

impl Family {
    pub fn s(self) -> i32 {
        match self {
            Family::Hyperbolic => -1,
            Family::Rational => 0,
            Family::Trigonometric => 1,
        }
    }

    pub fn from_s(s: i32) -> Result<Family> {
        match s {
            -1 => Ok(Family::Hyperbolic),
            0 => Ok(Family::Rational),
            1 => Ok(Family::Trigonometric),
            _ => domain(format!("s must be -1, 0 or 1, got {s}")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    /// Charge at P_C (−1 for the hyperbolic family).
    C,
    /// Charge at P_D (+1 for the hyperbolic family).
    D,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelPoint {
    pub j: u32,
    pub parity: Parity,
    pub family: Family,
    pub t: f64,
    pub g: f64,
    pub epsilon: f64,
}

/// Charges of the electrostatic form of the Richardson equations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EffectiveCharges {
    pub qc: Complex64,
    pub qd: Complex64,
    pub pc: Complex64,
    pub pd: Complex64,
}

impl ModelPoint {
    pub fn new(j: u32, parity: Parity, family: Family, t: f64, g: f64) -> Result<ModelPoint> {
        let p = ModelPoint { j, parity, family, t, g, epsilon: 1.0 };
        p.validate()?;
        Ok(p)
    }

    /// Same as [`ModelPoint::new`] with the coupling given as g(2j−1).
    pub fn scaled(j: u32, parity: Parity, family: Family, t: f64, gscaled: f64) -> Result<ModelPoint> {
        if j == 0 {
            return domain("j must be a positive integer");
        }
        ModelPoint::new(j, parity, family, t, gscaled / (2 * j - 1) as f64)
    }

    /// Rejects semi-integer spins given as a real number.
    pub fn integer_j(j: f64) -> Result<u32> {
        if !(j >= 1.0) || j.fract() != 0.0 || j > u32::MAX as f64 {
            return domain(format!("j must be a positive integer (semi-integer j is not supported), got {j}"));
        }
        Ok(j as u32)
    }

    pub fn validate(&self) -> Result<()> {
        if self.j == 0 {
            return domain("j must be a positive integer");
        }
        if !(self.t > 0.0) || !self.t.is_finite() {
            return domain(format!("t must be positive, got {}", self.t));
        }
        if !self.g.is_finite() {
            return domain("g must be finite");
        }
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return domain(format!("epsilon must be positive, got {}", self.epsilon));
        }
        Ok(())
    }

    pub fn with_g(&self, g: f64) -> ModelPoint {
        ModelPoint { g, ..*self }
    }

    pub fn with_t(&self, t: f64) -> ModelPoint {
        ModelPoint { t, ..*self }
    }

    pub fn with_parity(&self, parity: Parity) -> ModelPoint {
        ModelPoint { parity, ..*self }
    }

    pub fn s(&self) -> i32 {
        self.family.s()
    }

    pub fn nu(&self) -> u32 {
        self.parity.nu()
    }

    /// Number of pairs M = j − ν.
    pub fn pairs(&self) -> usize {
        (self.j - self.nu()) as usize
    }

    /// Dimension of the parity sector, M + 1.
    pub fn dim(&self) -> usize {
        self.pairs() + 1
    }

    pub fn gscaled(&self) -> f64 {
        self.g * (2 * self.j - 1) as f64
    }

    /// (γx, γy) = (2j−1)·g·(−s·t, 1/t).
    pub fn to_gamma(&self) -> (f64, f64) {
        let k = self.gscaled();
        let gx = if self.s() == 0 { 0.0 } else { -(self.s() as f64) * k * self.t };
        (gx, k / self.t)
    }

    /// Inverse of [`ModelPoint::to_gamma`] with the quadrant convention:
    /// a vanishing γ selects s = 0, γxγy < 0 selects s = +1, γxγy > 0
    /// selects s = −1, and the sign of g follows γy.
    pub fn from_gamma(j: u32, parity: Parity, gx: f64, gy: f64) -> Result<ModelPoint> {
        if j == 0 {
            return domain("j must be a positive integer");
        }
        let n = (2 * j - 1) as f64;
        if gx == 0.0 && gy == 0.0 {
            return ModelPoint::new(j, parity, Family::Rational, 1.0, 0.0);
        }
        if gx == 0.0 {
            return ModelPoint::new(j, parity, Family::Rational, 1.0, gy / n);
        }
        if gy == 0.0 {
            return domain(
                "γy = 0 with γx ≠ 0 is reached only as the t → ∞ limit; use the x↔y swapped point, which has the same spectrum",
            );
        }
        let family = if gx * gy < 0.0 { Family::Trigonometric } else { Family::Hyperbolic };
        let t = (gx / gy).abs().sqrt();
        let g = gy * t / n;
        ModelPoint::new(j, parity, family, t, g)
    }

    /// (λ, γ) of the LMG Hamiltonian.
    pub fn lambda_gamma(&self) -> (f64, f64) {
        let s = self.s() as f64;
        let t2 = self.t * self.t;
        let lambda = -self.g * self.epsilon * (1.0 + s * t2) / (2.0 * self.t);
        let gamma = self.g * self.epsilon * (1.0 - s * t2) / (2.0 * self.t);
        (lambda, gamma)
    }

    pub fn from_lambda_gamma(j: u32, parity: Parity, lambda: f64, gamma: f64, epsilon: f64) -> Result<ModelPoint> {
        if !(epsilon > 0.0) {
            return domain("epsilon must be positive");
        }
        let n = (2 * j.max(1) - 1) as f64;
        let mut p = ModelPoint::from_gamma(j, parity, n * (gamma + lambda) / epsilon, n * (gamma - lambda) / epsilon)?;
        p.epsilon = epsilon;
        Ok(p)
    }

    /// (g, t) → (−s·g, 1/t). Defined for the trigonometric and hyperbolic
    /// families, where it exchanges γx and γy.
    pub fn mirror(&self) -> Result<ModelPoint> {
        if self.s() == 0 {
            return domain("mirror maps the rational line γx = 0 onto γy = 0, which has no rational-family representative");
        }
        Ok(ModelPoint { g: -(self.s() as f64) * self.g, t: 1.0 / self.t, ..*self })
    }

    /// Global sign change of the Hamiltonian, g → −g.
    pub fn negate(&self) -> ModelPoint {
        ModelPoint { g: -self.g, ..*self }
    }

    /// The γx = γy line, where λ = 0 and |jm⟩ are eigenstates.
    pub fn is_diagonal_line(&self) -> bool {
        self.s() == -1 && self.t == 1.0
    }

    /// m values of the sector in basis order, m = −j + ν + 2k.
    pub fn sector_m(&self) -> Vec<i64> {
        let j = self.j as i64;
        let nu = self.nu() as i64;
        (0..self.dim() as i64).map(|k| -j + nu + 2 * k).collect()
    }

    pub fn charges(&self) -> Option<EffectiveCharges> {
        let s = self.s();
        if s == 0 || self.g == 0.0 {
            return None;
        }
        let root = Complex64::new(-s as f64, 0.0).sqrt();
        let base = Complex64::new(-((2 * self.j - 1) as f64) / 4.0, 0.0);
        let q = 1.0 / (4.0 * self.g * root);
        Some(EffectiveCharges { qc: q + base, qd: -q + base, pc: -1.0 / root, pd: 1.0 / root })
    }

    /// Collapse number N for which g sits inside the guard band around
    /// g_C(N) or g_D(N).
    pub fn near_collapse(&self, band: f64) -> Option<(u32, Side)> {
        if self.s() != -1 {
            return None;
        }
        for n in 1..=self.pairs() as u32 {
            for side in [Side::C, Side::D] {
                let gc = collapse_coupling(self.j, n, side).ok()?;
                if (self.g - gc).abs() < band {
                    return Some((n, side));
                }
            }
        }
        None
    }

    /// Analytic spectrum at g = 0, ε·m over the sector in ascending order.
    pub fn unperturbed_energies(&self) -> Vec<f64> {
        self.sector_m().iter().map(|&m| self.epsilon * m as f64).collect()
    }
}

/// E_m = ε(m + g(j(j+1) − m²)), exact on the γx = γy line (s = −1, t = 1).
pub fn diagonal_line_energy(j: u32, m: i64, g: f64, epsilon: f64) -> Result<f64> {
    let jj = j as i64;
    if m.abs() > jj {
        return domain(format!("|m| = {} exceeds j = {j}", m.abs()));
    }
    let jf = j as f64;
    let mf = m as f64;
    Ok(epsilon * (mf + g * (jf * (jf + 1.0) - mf * mf)))
}

/// Couplings g where E_m meets E_{m−2} and E_{m+2} on the diagonal line.
/// E_m = E_{m+2} at g = 1/(2(m+1)).
pub fn diagonal_line_crossings(j: u32, m: i64) -> Result<Vec<(i64, f64)>> {
    let jj = j as i64;
    if m.abs() > jj {
        return domain(format!("|m| = {} exceeds j = {j}", m.abs()));
    }
    let mut out = Vec::new();
    for other in [m - 2, m + 2] {
        if other.abs() > jj {
            continue;
        }
        let lo = m.min(other);
        if lo + 1 != 0 {
            out.push((other, 1.0 / (2.0 * (lo + 1) as f64)));
        }
    }
    Ok(out)
}

/// g_C(N) = 1/(2j+1−2N) and g_D(N) = −g_C(N), hyperbolic family.
pub fn collapse_coupling(j: u32, n: u32, side: Side) -> Result<f64> {
    if n == 0 || n > j {
        return domain(format!("collapse number N = {n} outside 1..={j}"));
    }
    let g = 1.0 / (2 * j + 1 - 2 * n) as f64;
    Ok(match side {
        Side::C => g,
        Side::D => -g,
    })
}

/// γxγy = ((2j−1)/(2j+1−2N))² on the N-th parity-crossing hyperbola.
pub fn crossing_hyperbola(j: u32, n: u32) -> Result<f64> {
    if n == 0 || n > j {
        return domain(format!("crossing index N = {n} outside 1..={j}"));
    }
    let r = (2 * j - 1) as f64 / (2 * j + 1 - 2 * n) as f64;
    Ok(r * r)
}

impl std::str::FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Family> {
        let v: i32 = s.trim().parse().map_err(|_| Error::Domain(format!("s must be -1, 0 or 1, got `{s}`")))?;
        Family::from_s(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_map_on_reference_lines() {
        let p = ModelPoint::new(15, Parity::Plus, Family::Trigonometric, 1.0, 0.01).unwrap();
        let (gx, gy) = p.to_gamma();
        assert!((gy + gx).abs() < 1e-15 && (gy - 0.29).abs() < 1e-14);
        let p = ModelPoint::new(15, Parity::Plus, Family::Hyperbolic, 0.5, 0.01).unwrap();
        let (gx, gy) = p.to_gamma();
        assert!((gy - 4.0 * gx).abs() < 1e-14);
        let p = ModelPoint::new(4, Parity::Plus, Family::Rational, 0.7, -0.3).unwrap();
        let (gx, gy) = p.to_gamma();
        assert_eq!(gx, 0.0);
        assert!((gy + 7.0 * 0.3 / 0.7).abs() < 1e-14);
    }

    #[test]
    fn lambda_gamma_agrees_with_rescaled_map() {
        let p = ModelPoint::new(6, Parity::Minus, Family::Trigonometric, 1.7, -0.04).unwrap();
        let (l, g) = p.lambda_gamma();
        let (gx, gy) = p.to_gamma();
        assert!((11.0 * (g + l) - gx).abs() < 1e-14);
        assert!((11.0 * (g - l) - gy).abs() < 1e-14);
        let q = ModelPoint::from_lambda_gamma(6, Parity::Minus, l, g, 1.0).unwrap();
        assert_eq!(q.family, p.family);
        assert!((q.t - p.t).abs() < 1e-12 && (q.g - p.g).abs() < 1e-14);
    }

    #[test]
    fn mirror_and_negate() {
        let p = ModelPoint::new(5, Parity::Plus, Family::Hyperbolic, 0.5, 0.2).unwrap();
        let m = p.mirror().unwrap();
        assert_eq!((m.t, m.g), (2.0, 0.2));
        assert_eq!(m.mirror().unwrap(), p);
        let p = ModelPoint::new(5, Parity::Plus, Family::Trigonometric, 1.0, 0.2).unwrap();
        assert_eq!(p.mirror().unwrap().g, -0.2);
        assert_eq!(p.negate().negate(), p);
        let r = ModelPoint::new(5, Parity::Plus, Family::Rational, 1.0, 0.2).unwrap();
        assert!(r.mirror().is_err());
    }

    #[test]
    fn diagonal_line_crossing_values() {
        assert_eq!(diagonal_line_energy(7, -7, 0.0, 1.0).unwrap(), -7.0);
        let j = 10;
        let g = -1.0 / (2.0 * j as f64 - 2.0);
        let a = diagonal_line_energy(j, -10, g, 1.0).unwrap();
        let b = diagonal_line_energy(j, -8, g, 1.0).unwrap();
        assert!((a - b).abs() < 1e-12);
        assert!((g * 19.0 + 19.0 / 18.0).abs() < 1e-15);
        let c = diagonal_line_crossings(j, -10).unwrap();
        assert_eq!(c.len(), 1);
        assert!((c[0].1 - g).abs() < 1e-16);
        assert!(diagonal_line_energy(3, 4, 0.1, 1.0).is_err());
    }

    #[test]
    fn collapse_couplings_and_hyperbolas() {
        assert!((collapse_coupling(15, 1, Side::C).unwrap() * 29.0 - 1.0).abs() < 1e-15);
        assert!((collapse_coupling(15, 2, Side::C).unwrap() * 29.0 - 29.0 / 27.0).abs() < 1e-15);
        assert_eq!(collapse_coupling(9, 9, Side::C).unwrap(), 1.0);
        assert_eq!(collapse_coupling(9, 9, Side::D).unwrap(), -1.0);
        assert!(collapse_coupling(9, 10, Side::C).is_err());
        assert_eq!(crossing_hyperbola(10, 1).unwrap(), 1.0);
        assert!((crossing_hyperbola(10, 2).unwrap() - (19.0f64 / 17.0).powi(2)).abs() < 1e-15);
        assert_eq!(crossing_hyperbola(10, 10).unwrap(), 361.0);
    }

    #[test]
    fn charges_sum_and_conjugation() {
        let p = ModelPoint::new(8, Parity::Plus, Family::Hyperbolic, 0.5, 0.03).unwrap();
        let c = p.charges().unwrap();
        assert!((c.qc + c.qd + 7.5).norm() < 1e-14);
        assert_eq!((c.pc.re, c.pd.re), (-1.0, 1.0));
        let p = ModelPoint::new(8, Parity::Plus, Family::Trigonometric, 0.5, 0.03).unwrap();
        let c = p.charges().unwrap();
        assert!((c.qd - c.qc.conj()).norm() < 1e-14);
        assert!((c.pc - Complex64::i()).norm() < 1e-15);
        // collapse condition: Q_C = (1 − N)/2 at g_C(N)
        let p = ModelPoint::new(15, Parity::Plus, Family::Hyperbolic, 0.5, 1.0 / 27.0).unwrap();
        assert!((p.charges().unwrap().qc.re + 0.5).abs() < 1e-14);
    }

    #[test]
    fn semi_integer_spin_is_rejected() {
        assert!(ModelPoint::integer_j(2.5).is_err());
        assert_eq!(ModelPoint::integer_j(3.0).unwrap(), 3);
        assert!(ModelPoint::new(3, Parity::Plus, Family::Hyperbolic, -1.0, 0.1).is_err());
    }
}
