//! Real nonsymmetric eigenproblems, generic over the working precision.
//!
//! Eigenvalues come from Parlett–Reinsch balancing, elimination to upper
//! Hessenberg form and the Francis double-shift QR iteration. Eigenvectors are
//! obtained afterwards on the unbalanced matrix by inverse iteration and then
//! refined by Newton's method on the bordered system `(A − λ) v = 0`.

use num_complex::Complex;

use super::linalg::lu_solve_banded;
use super::real::Real;

/// Dense row-major square matrix.
#[derive(Clone, Debug)]
pub struct Mat<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Real> Mat<T> {
    pub fn zeros(n: usize) -> Self {
        Mat { n, data: vec![T::zero(); n * n] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] = v;
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        (0..self.n)
            .map(|i| {
                let row = &self.data[i * self.n..(i + 1) * self.n];
                row.iter().zip(v).fold(T::zero(), |acc, (&a, &b)| acc + a * b)
            })
            .collect()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
    }

    pub fn map<U: Real>(&self, f: impl Fn(T) -> U) -> Mat<U> {
        Mat { n: self.n, data: self.data.iter().map(|&x| f(x)).collect() }
    }

    fn to_one_based(&self) -> Vec<Vec<T>> {
        let n = self.n;
        let mut a = vec![vec![T::zero(); n + 1]; n + 1];
        for i in 0..n {
            for j in 0..n {
                a[i + 1][j + 1] = self.get(i, j);
            }
        }
        a
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EigenError {
    NoConvergence,
    Singular,
}

fn balance<T: Real>(a: &mut [Vec<T>], n: usize) {
    const RADIX: f64 = 2.0;
    let sqrdx = RADIX * RADIX;
    let mut done = false;
    while !done {
        done = true;
        for i in 1..=n {
            let mut r = 0.0f64;
            let mut c = 0.0f64;
            for j in 1..=n {
                if j != i {
                    c += a[j][i].abs().to_f64();
                    r += a[i][j].abs().to_f64();
                }
            }
            if c != 0.0 && r != 0.0 {
                let mut g = r / RADIX;
                let mut f = 1.0;
                let s = c + r;
                while c < g {
                    f *= RADIX;
                    c *= sqrdx;
                }
                g = r * RADIX;
                while c > g {
                    f /= RADIX;
                    c /= sqrdx;
                }
                if (c + r) / f < 0.95 * s {
                    done = false;
                    let gi = T::from_f64(1.0 / f);
                    let fi = T::from_f64(f);
                    for j in 1..=n {
                        a[i][j] *= gi;
                    }
                    for j in 1..=n {
                        a[j][i] *= fi;
                    }
                }
            }
        }
    }
}

fn elmhes<T: Real>(a: &mut [Vec<T>], n: usize) {
    for m in 2..n {
        let mut x = T::zero();
        let mut piv = m;
        for j in m..=n {
            if a[j][m - 1].abs() > x.abs() {
                x = a[j][m - 1];
                piv = j;
            }
        }
        if piv != m {
            for j in (m - 1)..=n {
                let tmp = a[piv][j];
                a[piv][j] = a[m][j];
                a[m][j] = tmp;
            }
            for row in a.iter_mut().take(n + 1).skip(1) {
                row.swap(piv, m);
            }
        }
        if x != T::zero() {
            for i in (m + 1)..=n {
                let mut y = a[i][m - 1];
                if y != T::zero() {
                    y /= x;
                    a[i][m - 1] = y;
                    for j in m..=n {
                        let amj = a[m][j];
                        a[i][j] -= y * amj;
                    }
                    for row in a.iter_mut().take(n + 1).skip(1) {
                        let aji = row[i];
                        row[m] += y * aji;
                    }
                }
            }
        }
    }
    for i in 3..=n {
        for j in 1..(i - 1) {
            a[i][j] = T::zero();
        }
    }
}

fn sign<T: Real>(a: T, b: T) -> T {
    if b >= T::zero() {
        a.abs()
    } else {
        -a.abs()
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix (1-based storage).
fn hqr<T: Real>(a: &mut [Vec<T>], n: usize) -> Result<Vec<Complex<T>>, EigenError> {
    let zero = T::zero();
    let eps = T::from_f64(T::epsilon());
    let mut wr = vec![zero; n + 1];
    let mut wi = vec![zero; n + 1];
    let mut anorm = zero;
    for i in 1..=n {
        for j in (i.max(2) - 1)..=n {
            anorm += a[i][j].abs();
        }
    }
    let mut nn = n;
    let mut t = zero;
    let (mut p, mut q, mut r): (T, T, T);
    let (mut x, mut y, mut z, mut w);
    while nn >= 1 {
        let mut its = 0;
        loop {
            let mut l = nn;
            while l >= 2 {
                let mut s = a[l - 1][l - 1].abs() + a[l][l].abs();
                if s == zero {
                    s = anorm;
                }
                if a[l][l - 1].abs() <= eps * s {
                    a[l][l - 1] = zero;
                    break;
                }
                l -= 1;
            }
            x = a[nn][nn];
            if l == nn {
                wr[nn] = x + t;
                wi[nn] = zero;
                nn -= 1;
            } else {
                y = a[nn - 1][nn - 1];
                w = a[nn][nn - 1] * a[nn - 1][nn];
                if l == nn - 1 {
                    p = T::from_f64(0.5) * (y - x);
                    q = p * p + w;
                    z = q.abs().sqrt();
                    x += t;
                    if q >= zero {
                        z = p + sign(z, p);
                        wr[nn - 1] = x + z;
                        wr[nn] = x + z;
                        if z != zero {
                            wr[nn] = x - w / z;
                        }
                        wi[nn - 1] = zero;
                        wi[nn] = zero;
                    } else {
                        wr[nn - 1] = x + p;
                        wr[nn] = x + p;
                        wi[nn - 1] = -z;
                        wi[nn] = z;
                    }
                    nn = nn.saturating_sub(2);
                } else {
                    if its == 60 {
                        return Err(EigenError::NoConvergence);
                    }
                    if its % 10 == 0 && its > 0 {
                        t += x;
                        for i in 1..=nn {
                            a[i][i] -= x;
                        }
                        let s = a[nn][nn - 1].abs() + a[nn - 1][nn - 2].abs();
                        x = T::from_f64(0.75) * s;
                        y = x;
                        w = T::from_f64(-0.4375) * s * s;
                    }
                    its += 1;
                    let mut m = nn - 2;
                    loop {
                        z = a[m][m];
                        r = x - z;
                        let s0 = y - z;
                        p = (r * s0 - w) / a[m + 1][m] + a[m][m + 1];
                        q = a[m + 1][m + 1] - z - r - s0;
                        r = a[m + 2][m + 1];
                        let s = p.abs() + q.abs() + r.abs();
                        p /= s;
                        q /= s;
                        r /= s;
                        if m == l {
                            break;
                        }
                        let u = a[m][m - 1].abs() * (q.abs() + r.abs());
                        let v = p.abs() * (a[m - 1][m - 1].abs() + z.abs() + a[m + 1][m + 1].abs());
                        if u <= eps * v {
                            break;
                        }
                        m -= 1;
                    }
                    for i in (m + 2)..=nn {
                        a[i][i - 2] = zero;
                        if i != m + 2 {
                            a[i][i - 3] = zero;
                        }
                    }
                    let mut k = m;
                    while k < nn {
                        if k != m {
                            p = a[k][k - 1];
                            q = a[k + 1][k - 1];
                            r = zero;
                            if k != nn - 1 {
                                r = a[k + 2][k - 1];
                            }
                            x = p.abs() + q.abs() + r.abs();
                            if x != zero {
                                p /= x;
                                q /= x;
                                r /= x;
                            }
                        }
                        let s = sign((p * p + q * q + r * r).sqrt(), p);
                        if s != zero {
                            if k == m {
                                if l != m {
                                    a[k][k - 1] = -a[k][k - 1];
                                }
                            } else {
                                a[k][k - 1] = -s * x;
                            }
                            p += s;
                            x = p / s;
                            y = q / s;
                            z = r / s;
                            q /= p;
                            r /= p;
                            for j in k..=nn {
                                p = a[k][j] + q * a[k + 1][j];
                                if k != nn - 1 {
                                    p += r * a[k + 2][j];
                                    a[k + 2][j] -= p * z;
                                }
                                a[k + 1][j] -= p * y;
                                a[k][j] -= p * x;
                            }
                            let mmin = if nn < k + 3 { nn } else { k + 3 };
                            for row in a.iter_mut().take(mmin + 1).skip(l) {
                                p = x * row[k] + y * row[k + 1];
                                if k != nn - 1 {
                                    p += z * row[k + 2];
                                    row[k + 2] -= p * r;
                                }
                                row[k + 1] -= p * q;
                                row[k] -= p;
                            }
                        }
                        k += 1;
                    }
                }
            }
            if nn == 0 || l + 1 >= nn {
                break;
            }
        }
    }
    Ok((1..=n).map(|i| Complex::new(wr[i], wi[i])).collect())
}

/// All eigenvalues of a real square matrix.
pub fn eigenvalues<T: Real>(m: &Mat<T>) -> Result<Vec<Complex<T>>, EigenError> {
    let n = m.dim();
    if n == 0 {
        return Ok(Vec::new());
    }
    if n == 1 {
        return Ok(vec![Complex::new(m.get(0, 0), T::zero())]);
    }
    let mut a = m.to_one_based();
    balance(&mut a, n);
    elmhes(&mut a, n);
    hqr(&mut a, n)
}

/// Refined eigenpair: the vector is scaled so its largest component is one.
#[derive(Clone, Debug)]
pub struct Eigenpair<T> {
    pub value: T,
    pub vector: Vec<T>,
    /// ‖A v − λ v‖∞ / (‖A‖max ‖v‖∞)
    pub residual: f64,
}

/// Eigenvector of a real eigenvalue, refined together with the eigenvalue.
///
/// Inverse iteration provides the starting vector. Newton's method on
/// `(A − λ) v = 0, v[p] = 1` then reduces to the update
/// `y = (A − λ)⁻¹ v, λ ← λ + 1/y[p], v ← y / y[p]`, one banded solve per step.
/// `band` gives the (sub, super) bandwidth of `m`.
pub fn refine_eigenpair<T: Real>(
    m: &Mat<T>,
    lambda0: T,
    band: (usize, usize),
) -> Result<Eigenpair<T>, EigenError> {
    let n = m.dim();
    let (kl, ku) = band;
    let scale = m.max_abs().max(T::one());
    let eps = T::epsilon();
    let shifted = |lam: T| {
        let mut a = m.clone();
        for i in 0..n {
            a.set(i, i, m.get(i, i) - lam);
        }
        a
    };
    let inf_norm = |v: &[T]| v.iter().fold(T::zero(), |acc, &x| acc.max(x.abs()));

    let nudge = lambda0 + scale * T::from_f64(64.0 * eps);
    let a0 = shifted(nudge);
    let mut v = vec![T::one(); n];
    for _ in 0..3 {
        let next = lu_solve_banded(&a0, kl, ku, &v).ok_or(EigenError::Singular)?;
        let norm = inf_norm(&next);
        if !norm.is_finite() || norm == T::zero() {
            return Err(EigenError::Singular);
        }
        v = next.into_iter().map(|x| x / norm).collect();
    }

    let mut lambda = lambda0;
    let mut best: Option<Eigenpair<T>> = None;
    for _ in 0..12 {
        let pin = (0..n)
            .max_by(|&a, &b| v[a].abs().partial_cmp(&v[b].abs()).unwrap())
            .unwrap_or(0);
        let pv = v[pin];
        v.iter_mut().for_each(|x| *x /= pv);
        let av = m.mul_vec(&v);
        let r = av.iter().zip(&v).fold(T::zero(), |acc, (&a, &x)| acc.max((a - lambda * x).abs()));
        let res = (r / scale).to_f64();
        let improved = best.as_ref().map_or(true, |b| res < b.residual);
        if improved {
            best = Some(Eigenpair { value: lambda, vector: v.clone(), residual: res });
        } else if res < 1e6 * eps {
            break;
        }
        if res <= 4.0 * eps {
            break;
        }
        let y = match lu_solve_banded(&shifted(lambda), kl, ku, &v) {
            Some(y) => y,
            None => break,
        };
        let yp = y[pin];
        if yp == T::zero() || !yp.is_finite() {
            break;
        }
        lambda += T::one() / yp;
        v = y.into_iter().map(|x| x / yp).collect();
    }
    best.ok_or(EigenError::Singular)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::dd::Dd;

    fn companion(roots: &[f64]) -> Mat<f64> {
        // upper Hessenberg companion of prod (x - r)
        let p = crate::numeric::poly::from_roots(
            &roots.iter().map(|&r| Complex::new(r, 0.0)).collect::<Vec<_>>(),
        );
        let n = roots.len();
        let mut m = Mat::zeros(n);
        for i in 1..n {
            m.set(i, i - 1, 1.0);
        }
        for i in 0..n {
            m.set(i, n - 1, -p[i]);
        }
        m
    }

    #[test]
    fn companion_matrix_eigenvalues_are_the_roots() {
        let roots = [-3.0, -1.0, 0.5, 2.0, 4.0];
        let mut got: Vec<f64> = eigenvalues(&companion(&roots)).unwrap().iter().map(|z| z.re).collect();
        got.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (g, r) in got.iter().zip(roots) {
            assert!((g - r).abs() < 1e-10, "{g} vs {r}");
        }
    }

    #[test]
    fn rotation_block_gives_complex_pair() {
        let mut m = Mat::zeros(2);
        m.set(0, 1, -1.0);
        m.set(1, 0, 1.0);
        let ev = eigenvalues(&m).unwrap();
        assert!(ev.iter().all(|z| (z.im.abs() - 1.0).abs() < 1e-14));
    }

    #[test]
    fn refinement_reaches_double_double_residual() {
        let m = companion(&[-2.0, 0.3, 1.7, 3.1]).map(Dd::from_f64);
        let n = m.dim();
        let pair = refine_eigenpair(&m, Dd::from_f64(0.3000001), (n, n)).unwrap();
        assert!((pair.value.to_f64() - 0.3).abs() < 1e-15);
        assert!(pair.residual < 1e-28, "{}", pair.residual);
        assert!(pair.vector.iter().any(|x| x.to_f64() == 1.0));
    }
}
