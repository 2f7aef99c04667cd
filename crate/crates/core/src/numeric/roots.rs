//! Simultaneous polynomial root finding (Aberth–Ehrlich), generic over the
//! working precision.

use num_complex::Complex;

use super::poly;
use super::real::{cabs, Real};

#[derive(Clone, Copy, Debug)]
pub struct AberthOptions {
    pub max_iterations: usize,
}

impl Default for AberthOptions {
    fn default() -> Self {
        AberthOptions { max_iterations: 800 }
    }
}

#[derive(Clone, Debug)]
pub struct Roots<T> {
    pub roots: Vec<Complex<T>>,
    pub converged: bool,
    pub iterations: usize,
}

fn initial_guesses<T: Real>(p: &[T]) -> Vec<Complex<T>> {
    let n = p.len() - 1;
    let lead = p[n];
    let center = -p[n - 1] / (lead * T::from_i64(n as i64));
    let shifted = poly::taylor_shift(p, center);
    // geometric mean of root distances from the centroid
    let ratio = (shifted[0] / lead).abs().to_f64();
    let mut radius = if ratio > 0.0 {
        ratio.powf(1.0 / n as f64)
    } else {
        // all roots at the centre; any small circle works
        poly::max_abs(p).to_f64().max(1.0) * 1e-3
    };
    if !radius.is_finite() || radius == 0.0 {
        radius = 1.0;
    }
    (0..n)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4;
            Complex::new(
                center + T::from_f64(radius * theta.cos()),
                T::from_f64(radius * theta.sin()),
            )
        })
        .collect()
}

/// All roots of `p` (ascending coefficients, `p[last] != 0`).
pub fn aberth<T: Real>(p: &[T], opts: AberthOptions) -> Roots<T> {
    let n = p.len().saturating_sub(1);
    if n == 0 {
        return Roots { roots: Vec::new(), converged: true, iterations: 0 };
    }
    let lead = p[n];
    let p: Vec<T> = p.iter().map(|&c| c / lead).collect();
    if n == 1 {
        return Roots {
            roots: vec![Complex::new(-p[0], T::zero())],
            converged: true,
            iterations: 0,
        };
    }
    let abs_coeffs: Vec<T> = p.iter().map(|c| c.abs()).collect();
    let mut z = initial_guesses(&p);
    let mut done = vec![false; n];
    let eps = T::from_f64(8.0 * T::epsilon());
    let one = Complex::new(T::one(), T::zero());

    let mut iterations = 0;
    while iterations < opts.max_iterations && done.iter().any(|d| !d) {
        iterations += 1;
        for i in 0..n {
            if done[i] {
                continue;
            }
            let (v, d) = poly::eval_with_derivative(&p, z[i]);
            let bound = poly::eval(&abs_coeffs, cabs(z[i]));
            if cabs(v) <= eps * bound {
                done[i] = true;
                continue;
            }
            let ratio = v / d;
            let mut sum = Complex::new(T::zero(), T::zero());
            for j in 0..n {
                if j != i {
                    sum = sum + one / (z[i] - z[j]);
                }
            }
            let w = ratio / (one - ratio * sum);
            if !(w.re.is_finite() && w.im.is_finite()) {
                continue;
            }
            z[i] = z[i] - w;
            if cabs(w) <= eps * cabs(z[i]) {
                done[i] = true;
            }
        }
    }
    let converged = done.iter().all(|&d| d);
    Roots { roots: z, converged, iterations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::dd::Dd;

    fn sorted(mut v: Vec<Complex<f64>>) -> Vec<Complex<f64>> {
        v.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()));
        v
    }

    #[test]
    fn recovers_synthetic_degree_ten_roots() {
        let truth: Vec<Complex<f64>> = vec![
            Complex::new(-2.5, 0.0),
            Complex::new(-1.0, 0.3),
            Complex::new(-1.0, -0.3),
            Complex::new(-0.2, 0.0),
            Complex::new(0.4, 0.0),
            Complex::new(0.9, 1.1),
            Complex::new(0.9, -1.1),
            Complex::new(1.7, 0.0),
            Complex::new(2.2, 0.0),
            Complex::new(3.0, 0.0),
        ];
        let p = poly::from_roots(&truth);
        let got = aberth(&p, AberthOptions::default());
        assert!(got.converged);
        for (a, b) in sorted(got.roots).iter().zip(sorted(truth.clone())) {
            assert!((a - b).norm() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn double_double_resolves_a_tight_cluster() {
        // (x+1)^4 (x-0.5): fourfold root breaks f64 to ~1e-4 accuracy
        let mut p = vec![Dd::ONE];
        for _ in 0..4 {
            p = poly::mul(&p, &[Dd::ONE, Dd::ONE]);
        }
        p = poly::mul(&p, &[Dd::from_f64(-0.5), Dd::ONE]);
        let got = aberth(&p, AberthOptions::default());
        let near: Vec<_> = got.roots.iter().filter(|z| (z.re.to_f64() + 1.0).abs() < 0.1).collect();
        assert_eq!(near.len(), 4);
        for z in near {
            let d = ((z.re + Dd::ONE).to_f64().powi(2) + z.im.to_f64().powi(2)).sqrt();
            assert!(d < 1e-6, "{d}");
        }
    }
}
