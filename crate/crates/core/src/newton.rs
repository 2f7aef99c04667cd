//! Richardson equations solved by Newton iteration with continuation in the
//! coupling, starting from the weak-coupling limit.
//!
//! Near g = 0 the pairons of the state with k pairs in the upper level sit at
//! e ≈ t_i − g(1+st²) r, with t_a = −t holding M−k of them and t_b = +t holding
//! k. Balancing the O(1/g) terms of the Richardson equations shows that the
//! r of each cluster obey 2Σ_β 1/(r_α−r_β) = 1 − (ν+½)/r_α, which is the
//! Stieltjes characterisation of the zeros of the associated Laguerre
//! polynomial L_N^(ν−1/2).

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::hs::PaironSet;
use crate::model::{collapse_coupling, ModelPoint, Side};
use crate::numeric::assign::hungarian;
use crate::richardson::RichardsonSystem;

type C = Complex64;

/// Orthogonal-polynomial family used for the weak-coupling seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SeedPolynomial {
    /// Associated Laguerre L_N^(ν−1/2).
    Laguerre,
    /// Legendre P_N, the literal reading of the name; kept for comparison.
    Legendre,
}

/// Zeros of L_N^(a), ascending (Golub–Welsch).
pub fn laguerre_zeros(n: usize, a: f64) -> Vec<f64> {
    jacobi_zeros(n, |k| 2.0 * k as f64 + a + 1.0, |k| ((k as f64) * (k as f64 + a)).sqrt())
}

/// Zeros of P_N, ascending.
pub fn legendre_zeros(n: usize) -> Vec<f64> {
    jacobi_zeros(n, |_| 0.0, |k| k as f64 / ((4 * k * k - 1) as f64).sqrt())
}

fn jacobi_zeros(n: usize, diag: impl Fn(usize) -> f64, off: impl Fn(usize) -> f64) -> Vec<f64> {
    if n == 0 {
        return Vec::new();
    }
    let mut j = DMatrix::zeros(n, n);
    for k in 0..n {
        j[(k, k)] = diag(k);
        if k + 1 < n {
            let b = off(k + 1);
            j[(k, k + 1)] = b;
            j[(k + 1, k)] = b;
        }
    }
    let mut z: Vec<f64> = SymmetricEigen::new(j).eigenvalues.iter().copied().collect();
    z.sort_by(f64::total_cmp);
    z
}

/// Approximate pairons of the weak-coupling state `k` (k pairs at +t).
pub fn weak_coupling_pairons(point: &ModelPoint, k: usize) -> Result<PaironSet> {
    weak_coupling_seed(point, k, SeedPolynomial::Laguerre)
}

pub fn weak_coupling_seed(point: &ModelPoint, k: usize, family: SeedPolynomial) -> Result<PaironSet> {
    let m = point.pairs();
    if k > m {
        return domain(format!("state label k = {k} outside 0..={m}"));
    }
    let t = point.t;
    let shift = point.g * (1.0 + point.s() as f64 * t * t);
    let zeros = |n: usize| match family {
        SeedPolynomial::Laguerre => laguerre_zeros(n, point.nu() as f64 - 0.5),
        SeedPolynomial::Legendre => legendre_zeros(n),
    };
    let mut values: Vec<C> = zeros(m - k).iter().map(|r| C::new(-t - shift * r, 0.0)).collect();
    values.extend(zeros(k).iter().map(|r| C::new(t - shift * r, 0.0)));
    Ok(PaironSet { values, multiplicity_at_pc: 0, multiplicity_at_pd: 0, residual: f64::NAN })
}

#[derive(Clone, Copy, Debug)]
pub struct ContinuationOptions {
    /// |g|(2j−1) at which the weak-coupling seed is polished.
    pub start_scaled: f64,
    pub min_step: f64,
    /// Guard band around collapse couplings, in units of 1/(2j−1).
    pub guard_scaled: f64,
    /// Per-step residual target, in units of (2j−1).
    pub tol: f64,
    pub max_steps: usize,
}

impl Default for ContinuationOptions {
    fn default() -> Self {
        ContinuationOptions { start_scaled: 1e-3, min_step: 1e-8, guard_scaled: 1e-4, tol: 1e-10, max_steps: 20_000 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ContinuationRun {
    pub point: ModelPoint,
    pub state_index: usize,
    pub path: Vec<(f64, Vec<C>)>,
    pub pairons: PaironSet,
}

/// Newton polish of a seed at fixed coupling, no continuation.
pub fn polish(point: &ModelPoint, seed: &[C], tol: f64) -> (Vec<C>, f64, bool) {
    let sys = RichardsonSystem::new(point, 0, 0);
    let out = sys.solve(seed, tol, 60);
    (out.pairons, out.residual, out.converged)
}

fn min_spacing(e: &[C]) -> f64 {
    let mut d = f64::INFINITY;
    for a in 0..e.len() {
        for b in a + 1..e.len() {
            d = d.min((e[a] - e[b]).norm());
        }
    }
    d
}

/// Reorders `next` so that entry α continues entry α of `prev`.
pub fn match_pairons(prev: &[C], next: &[C]) -> Vec<C> {
    let cost: Vec<Vec<f64>> = prev.iter().map(|p| next.iter().map(|q| (p - q).norm()).collect()).collect();
    hungarian(&cost).into_iter().map(|col| next[col]).collect()
}

fn guard_couplings(point: &ModelPoint) -> Vec<f64> {
    if point.s() != -1 {
        return Vec::new();
    }
    let side = if point.g > 0.0 { Side::C } else { Side::D };
    (1..=point.pairs() as u32).filter_map(|n| collapse_coupling(point.j, n, side).ok()).map(f64::abs).collect()
}

/// Follows the weak-coupling state `k` out to `point.g`.
pub fn continue_to(point: &ModelPoint, k: usize, opts: &ContinuationOptions) -> Result<ContinuationRun> {
    point.validate()?;
    if point.g == 0.0 {
        return Err(Error::AnalyticBranch("target coupling is zero".into()));
    }
    if point.is_diagonal_line() {
        return Err(Error::AnalyticBranch("λ = 0 line: levels cross, labels are not conserved".into()));
    }
    let m = point.pairs();
    if k > m {
        return domain(format!("state label k = {k} outside 0..={m}"));
    }
    let scale = (2 * point.j - 1) as f64;
    let tol = opts.tol * scale;
    let sign = point.g.signum();
    let target = point.g.abs();
    let band = opts.guard_scaled / scale;
    let guards = guard_couplings(point);
    let at = |x: f64| point.with_g(sign * x);

    let mut g = target.min(opts.start_scaled / scale);
    let seed = weak_coupling_pairons(&at(g), k)?;
    let (e0, r0, ok) = polish(&at(g), &seed.values, tol);
    if !ok {
        return Err(Error::Continuation { g: sign * g, last_good: 0.0, reason: format!("seed polish stalled at {r0:.3e}") });
    }
    let mut path = vec![(sign * g, e0)];
    let mut h = g;
    let mut streak = 0;
    let mut steps = 0;
    while g < target {
        steps += 1;
        if steps > opts.max_steps {
            return Err(Error::Continuation { g: sign * g, last_good: sign * g, reason: "step budget exhausted".into() });
        }
        let mut next = (g + h).min(target);
        for &gc in &guards {
            if (next - gc).abs() < band && gc > g {
                next = (gc + band).min(target);
            }
        }
        let (g1, e1) = path.last().unwrap();
        let predicted: Vec<C> = match path.len() {
            // weak-coupling form: e − t_i grows linearly with g
            1 => e1
                .iter()
                .map(|&z| {
                    let ti = if z.re < 0.0 { -point.t } else { point.t };
                    ti + (z - ti) * (sign * next / g1)
                })
                .collect(),
            n => {
                let (g2, e2) = &path[n - 2];
                let w = (sign * next - g1) / (g1 - g2);
                e1.iter().zip(e2).map(|(&a, &b)| a + (a - b) * w).collect()
            }
        };
        let sys = RichardsonSystem::new(&at(next), 0, 0);
        let out = sys.solve(&predicted, tol, 30);
        let trust = 0.3 * min_spacing(e1).min(1.0);
        let moved = out.pairons.iter().zip(&predicted).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        if out.converged && (m < 2 || moved < trust) {
            let e = match_pairons(e1, &out.pairons);
            g = next;
            path.push((sign * g, e));
            streak += 1;
            if streak >= 2 {
                h *= 2.0;
                streak = 0;
            }
        } else {
            h *= 0.5;
            streak = 0;
            if h < opts.min_step {
                return Err(Error::Continuation {
                    g: sign * next,
                    last_good: sign * g,
                    reason: format!("Newton failed (residual {:.3e}, displacement {moved:.3e})", out.residual),
                });
            }
        }
    }
    let values = path.last().unwrap().1.clone();
    let residual = RichardsonSystem::new(point, 0, 0).max_residual(&values);
    Ok(ContinuationRun {
        point: *point,
        state_index: k,
        path,
        pairons: PaironSet { values, multiplicity_at_pc: 0, multiplicity_at_pd: 0, residual },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Family, Parity};

    #[test]
    fn laguerre_zeros_obey_stieltjes_relation() {
        let a = -0.5;
        let r = laguerre_zeros(7, a);
        for (i, &x) in r.iter().enumerate() {
            let s: f64 = r.iter().enumerate().filter(|&(k, _)| k != i).map(|(_, &y)| 1.0 / (x - y)).sum();
            assert!((2.0 * s - (1.0 - (a + 1.0) / x)).abs() < 1e-10);
        }
        assert!(r.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn legendre_zeros_are_symmetric() {
        let r = legendre_zeros(4);
        assert!((r[0] + r[3]).abs() < 1e-14 && (r[1] + r[2]).abs() < 1e-14);
    }

    #[test]
    fn seeds_split_between_levels() {
        let p = ModelPoint::scaled(15, Parity::Plus, Family::Hyperbolic, 0.5, 1e-3).unwrap();
        let s = weak_coupling_pairons(&p, 10).unwrap();
        let near_a = s.values.iter().filter(|z| (z.re + 0.5).abs() < 0.01).count();
        let near_b = s.values.iter().filter(|z| (z.re - 0.5).abs() < 0.01).count();
        assert_eq!((near_a, near_b), (5, 10));
    }

    #[test]
    fn hungarian_matching_restores_order() {
        let prev = vec![C::new(0.0, 0.0), C::new(1.0, 0.0), C::new(2.0, 0.0)];
        let next = vec![C::new(2.1, 0.0), C::new(0.1, 0.0), C::new(0.9, 0.0)];
        let m = match_pairons(&prev, &next);
        assert_eq!(m, vec![C::new(0.1, 0.0), C::new(0.9, 0.0), C::new(2.1, 0.0)]);
    }
}
