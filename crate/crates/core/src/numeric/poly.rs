//! Dense polynomials stored as ascending coefficient slices, `p[k]` is the
//! coefficient of `x^k`.

use num_complex::Complex;

use super::real::Real;

/// Horner evaluation at a complex point.
pub fn eval_complex<T: Real>(p: &[T], z: Complex<T>) -> Complex<T> {
    let mut acc = Complex::new(T::zero(), T::zero());
    for &c in p.iter().rev() {
        acc = acc * z + Complex::new(c, T::zero());
    }
    acc
}

/// Horner evaluation of `p` and `p'` at a complex point.
pub fn eval_with_derivative<T: Real>(p: &[T], z: Complex<T>) -> (Complex<T>, Complex<T>) {
    let zero = Complex::new(T::zero(), T::zero());
    let mut v = zero;
    let mut d = zero;
    for &c in p.iter().rev() {
        d = d * z + v;
        v = v * z + Complex::new(c, T::zero());
    }
    (v, d)
}

pub fn eval<T: Real>(p: &[T], x: T) -> T {
    p.iter().rev().fold(T::zero(), |acc, &c| acc * x + c)
}

pub fn derivative<T: Real>(p: &[T]) -> Vec<T> {
    p.iter()
        .enumerate()
        .skip(1)
        .map(|(k, &c)| c * T::from_i64(k as i64))
        .collect()
}

pub fn mul<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![T::zero(); a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub fn add<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|k| {
            let x = a.get(k).copied().unwrap_or_else(T::zero);
            let y = b.get(k).copied().unwrap_or_else(T::zero);
            x + y
        })
        .collect()
}

pub fn scale<T: Real>(a: &[T], s: T) -> Vec<T> {
    a.iter().map(|&c| c * s).collect()
}

/// Taylor shift: coefficients of `p(x + c)`.
pub fn taylor_shift<T: Real>(p: &[T], c: T) -> Vec<T> {
    let mut q = p.to_vec();
    let n = q.len();
    for i in 0..n {
        for k in (i..n - 1).rev() {
            let next = q[k + 1];
            q[k] += c * next;
        }
    }
    q
}

/// Divides by `(x - r)`; returns the quotient and the remainder `p(r)`.
pub fn deflate_linear<T: Real>(p: &[T], r: T) -> (Vec<T>, T) {
    let n = p.len();
    if n == 0 {
        return (Vec::new(), T::zero());
    }
    let mut q = vec![T::zero(); n - 1];
    let mut acc = p[n - 1];
    for k in (0..n - 1).rev() {
        q[k] = acc;
        acc = p[k] + acc * r;
    }
    (q, acc)
}

/// Monic polynomial with the given complex roots (real parts of the product
/// are returned; callers pass conjugation-closed sets).
pub fn from_roots(roots: &[Complex<f64>]) -> Vec<f64> {
    let mut c = vec![Complex::new(1.0, 0.0)];
    for &r in roots {
        let mut next = vec![Complex::new(0.0, 0.0); c.len() + 1];
        for (k, &ck) in c.iter().enumerate() {
            next[k + 1] += ck;
            next[k] -= ck * r;
        }
        c = next;
    }
    c.into_iter().map(|z| z.re).collect()
}

pub fn max_abs<T: Real>(p: &[T]) -> T {
    p.iter().fold(T::zero(), |m, &c| m.max(c.abs()))
}
