//! Richardson equations in electrostatic form and a damped complex Newton
//! solver for them.
//!
//! For pairon `e_α` the equation reads
//!
//!   f(e_α) + ((ν+½)/2)(1/(e_α+t) + 1/(e_α−t)) + Σ_{β≠α} 1/(e_α−e_β) = 0
//!
//! with the external field f = Q_C/(e−P_C) + Q_D/(e−P_D) for s = ±1 and
//! f = 1/(2g) for s = 0. Pairons already collapsed onto P_C or P_D are
//! removed from the unknowns and act as extra unit charges there.
//!
//! Near coincident roots the individual terms are huge and cancel, so the
//! reported residual scales equation α by its distance to the closest other
//! pole (another pairon, ±t or a charge position), capped at 1. Rounding the
//! pairons to double precision then costs O(eps) instead of
//! O(eps/spacing²). The Newton direction is unaffected by the row scaling.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::model::ModelPoint;

type C = Complex64;

#[derive(Clone, Copy, Debug)]
pub struct RichardsonSystem {
    charges: Option<(C, C, C, C)>,
    inv2g: f64,
    level: f64,
    t: f64,
}

#[derive(Clone, Debug)]
pub struct NewtonOutcome {
    pub pairons: Vec<C>,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl RichardsonSystem {
    /// `n_pc`/`n_pd` collapsed pairons sit on the charge positions.
    pub fn new(point: &ModelPoint, n_pc: usize, n_pd: usize) -> RichardsonSystem {
        let charges = point
            .charges()
            .map(|c| (c.qc + n_pc as f64, c.pc, c.qd + n_pd as f64, c.pd));
        RichardsonSystem {
            charges,
            inv2g: 0.5 / point.g,
            level: 0.5 * (point.nu() as f64 + 0.5),
            t: point.t,
        }
    }

    fn field(&self, e: C) -> (C, C) {
        match self.charges {
            Some((qc, pc, qd, pd)) => {
                let (u, v) = (1.0 / (e - pc), 1.0 / (e - pd));
                (qc * u + qd * v, -(qc * u * u + qd * v * v))
            }
            None => (C::new(self.inv2g, 0.0), C::new(0.0, 0.0)),
        }
    }

    pub fn residuals(&self, e: &[C]) -> Vec<C> {
        let t = self.t;
        (0..e.len())
            .map(|a| {
                let x = e[a];
                let mut f = self.field(x).0 + self.level * (1.0 / (x + t) + 1.0 / (x - t));
                for (b, &y) in e.iter().enumerate() {
                    if b != a {
                        f += 1.0 / (x - y);
                    }
                }
                f
            })
            .collect()
    }

    pub fn jacobian(&self, e: &[C]) -> DMatrix<C> {
        let n = e.len();
        let t = self.t;
        let mut j = DMatrix::from_element(n, n, C::new(0.0, 0.0));
        for a in 0..n {
            let x = e[a];
            let (u, v) = (1.0 / (x + t), 1.0 / (x - t));
            let mut d = self.field(x).1 - self.level * (u * u + v * v);
            for b in 0..n {
                if b != a {
                    let w = 1.0 / (x - e[b]);
                    let w2 = w * w;
                    d -= w2;
                    j[(a, b)] = w2;
                }
            }
            j[(a, a)] = d;
        }
        j
    }

    /// Distance from `e[a]` to the nearest other pole, capped at 1.
    pub fn weight(&self, e: &[C], a: usize) -> f64 {
        let x = e[a];
        let mut w = 1.0f64.min((x - self.t).norm()).min((x + self.t).norm());
        if let Some((_, pc, _, pd)) = self.charges {
            w = w.min((x - pc).norm()).min((x - pd).norm());
        }
        for (b, &y) in e.iter().enumerate() {
            if b != a {
                w = w.min((x - y).norm());
            }
        }
        w
    }

    /// Regularized max residual (see the module notes).
    pub fn max_residual(&self, e: &[C]) -> f64 {
        let r = self.residuals(e);
        if r.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return f64::INFINITY;
        }
        r.iter().enumerate().map(|(a, z)| z.norm() * self.weight(e, a)).fold(0.0, f64::max)
    }

    /// Unscaled max over α of |LHS|.
    pub fn raw_residual(&self, e: &[C]) -> f64 {
        let r = self.residuals(e);
        if r.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return f64::INFINITY;
        }
        r.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Damped Newton iteration. Stops when the residual falls below `tol`
    /// and stops improving, or after `max_iter` steps.
    pub fn solve(&self, start: &[C], tol: f64, max_iter: usize) -> NewtonOutcome {
        let mut e = start.to_vec();
        let mut res = self.max_residual(&e);
        let mut iterations = 0;
        // the total charge vanishes, so the residual also decays as pairons
        // run off to infinity; keep iterates in a bounded region
        let radius = 1e3 * e.iter().map(|z| z.norm()).fold(1.0, f64::max);
        if e.is_empty() {
            return NewtonOutcome { pairons: e, residual: 0.0, iterations, converged: true };
        }
        while iterations < max_iter && res.is_finite() {
            iterations += 1;
            let f = DMatrix::from_column_slice(e.len(), 1, &self.residuals(&e));
            let step = match self.jacobian(&e).lu().solve(&f) {
                Some(s) => s,
                None => break,
            };
            let mut lambda = 1.0;
            let mut accepted = None;
            for _ in 0..12 {
                let trial: Vec<C> = e.iter().zip(step.iter()).map(|(&x, &d)| x - lambda * d).collect();
                let r = self.max_residual(&trial);
                if r < res && trial.iter().all(|z| z.norm() < radius) {
                    accepted = Some((trial, r));
                    break;
                }
                lambda *= 0.5;
            }
            match accepted {
                Some((trial, r)) => {
                    let gain = r / res;
                    e = trial;
                    res = r;
                    if res < tol && gain > 0.25 {
                        break;
                    }
                }
                None => break,
            }
        }
        NewtonOutcome { converged: res < tol, pairons: e, residual: res, iterations }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Family, Parity};

    #[test]
    fn analytic_jacobian_matches_finite_differences() {
        let p = ModelPoint::new(4, Parity::Plus, Family::Hyperbolic, 0.5, 0.07).unwrap();
        let sys = RichardsonSystem::new(&p, 0, 0);
        let e = vec![C::new(-0.6, 0.1), C::new(-0.6, -0.1), C::new(0.2, 0.0), C::new(0.8, 0.3)];
        let j = sys.jacobian(&e);
        let h = 1e-7;
        for b in 0..e.len() {
            let mut ep = e.clone();
            ep[b] += h;
            let fp = sys.residuals(&ep);
            let f0 = sys.residuals(&e);
            for a in 0..e.len() {
                let fd = (fp[a] - f0[a]) / h;
                assert!((fd - j[(a, b)]).norm() < 1e-5 * (1.0 + fd.norm()), "{a},{b}");
            }
        }
    }

    #[test]
    fn single_pair_closed_form() {
        // M = 1, ν = 0, s = 0: 1/(2g) + (1/4)(2e/(e²−t²)) = 0
        // → e² + g e − t² = 0
        let p = ModelPoint::new(1, Parity::Plus, Family::Rational, 0.8, 0.3).unwrap();
        let sys = RichardsonSystem::new(&p, 0, 0);
        let e = (-0.3 + (0.09f64 + 4.0 * 0.64).sqrt()) / 2.0;
        assert!(sys.max_residual(&[C::new(e, 0.0)]) < 1e-14);
        let out = sys.solve(&[C::new(0.7, 0.0)], 1e-13, 40);
        assert!(out.converged && (out.pairons[0].re - e).abs() < 1e-14);
    }
}
