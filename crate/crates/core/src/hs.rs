//! Heine–Stieltjes route to the full spectrum of one parity sector.
//!
//! The Richardson equations are equivalent to the Lamé equation
//! A(x) P'' + B(x) P' − V(x) P = 0 for the polynomial P whose roots are the
//! pairons. Expanding P = Σ a_k x^k turns it into the eigenproblem D a = b0 a
//! of a pentadiagonal matrix, with b0 the constant term of V.
//!
//! For s = ±1
//!   A = (x² + s)(x² − t²)
//!   B = −st²/g + (t²(2j−1) + s(2ν+1)) x + (s/g) x² − 2(M−1) x³
//!   V = b0 + (sM/g) x − M(M−1) x²
//! and for s = 0
//!   A = x² − t²,  B = (x² − t²)/g + (2ν+1) x,  V = b0 + (M/g) x.
//!
//! Energies are obtained from b0 alone by evaluating the Lamé equation at the
//! zeros ±t of A, where it gives Λ(±t) = Σ_α 1/(±t − e_α) = V(±t)/B(±t).
//! Pairons then come from the roots of P and are polished on the Richardson
//! equations; the energy computed from them must agree with the b0 energy.
//!
//! Tight clusters of many pairons cannot be resolved from monomial
//! coefficients even in double-double. When the monomial route fails, the
//! operator is re-expanded on (x − x0)^k around the cluster centers ±t (and
//! ±1 for s = −1), where the same eigenvalue shifted by V(x0) − b0 gives
//! coefficients that resolve the cluster near x0.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{collapse_coupling, ModelPoint, Side};
use crate::numeric::eigen::{eigenvalues, refine_eigenpair, Mat};
use crate::numeric::poly;
use crate::numeric::roots::{aberth, AberthOptions};
use crate::numeric::{Dd, Real};
use crate::richardson::RichardsonSystem;

type C = Complex64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Precision {
    Double,
    DoubleDouble,
}

impl Precision {
    pub const ALL: [Precision; 2] = [Precision::Double, Precision::DoubleDouble];

    pub fn name(self) -> &'static str {
        match self {
            Precision::Double => "double",
            Precision::DoubleDouble => "dd",
        }
    }

    pub fn parse(s: &str) -> Result<Precision> {
        match s {
            "double" | "f64" => Ok(Precision::Double),
            "dd" | "double-double" => Ok(Precision::DoubleDouble),
            _ => Err(Error::Unknown { kind: "precision", name: s.to_string() }),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct HsOptions {
    pub precision: Precision,
    /// Fall back to coupling continuation when root extraction fails.
    pub continuation_fallback: bool,
    /// Richardson residual target is `residual_tol · (2j−1)`.
    pub residual_tol: f64,
    /// Relative agreement required between pairon and b0 energies.
    pub identity_tol: f64,
}

impl Default for HsOptions {
    fn default() -> Self {
        HsOptions {
            precision: Precision::DoubleDouble,
            continuation_fallback: true,
            residual_tol: 1e-9,
            identity_tol: 1e-9,
        }
    }
}

impl HsOptions {
    pub fn with_precision(precision: Precision) -> Self {
        HsOptions { precision, ..HsOptions::default() }
    }
}

/// Pairons of one eigenstate. Collapsed pairons are stored after the free
/// ones, at the exact charge positions.
#[derive(Clone, Debug, Serialize)]
pub struct PaironSet {
    pub values: Vec<C>,
    pub multiplicity_at_pc: usize,
    pub multiplicity_at_pd: usize,
    pub residual: f64,
}

impl PaironSet {
    pub fn free(&self) -> &[C] {
        &self.values[..self.values.len() - self.multiplicity_at_pc - self.multiplicity_at_pd]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_imag(&self) -> f64 {
        self.values.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    /// Pairs each value with a partner whose conjugate is closest; returns
    /// the worst mismatch.
    pub fn conjugation_defect(&self) -> f64 {
        let v = &self.values;
        v.iter()
            .map(|z| v.iter().map(|w| (z.conj() - w).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PaironMethod {
    Analytic,
    Roots,
    /// Roots of the operator re-expanded around a cluster center.
    CenteredRoots,
    Continuation,
}

#[derive(Clone, Debug, Serialize)]
pub struct RgState {
    /// Rank in ascending energy within the sector.
    pub index: usize,
    pub energy: f64,
    /// Energy recomputed from the pairons, when they avoid ±t.
    pub energy_pairons: Option<f64>,
    pub b0: Option<f64>,
    /// a_0..a_M with a_M = 1.
    pub coeffs: Vec<f64>,
    pub pairons: PaironSet,
    /// max |coeff of A P'' + B P' − V P| / max |a_k|.
    pub lame_residual: f64,
    /// P(P_C), P(P_D) for the hyperbolic family; their signs track collapses.
    pub charge_values: Option<(f64, f64)>,
    pub method: PaironMethod,
    pub flag: Option<String>,
}

impl RgState {
    pub fn flagged(&self) -> bool {
        self.flag.is_some()
    }
}

/// Eigen-data of one state before pairon extraction.
#[derive(Clone, Debug)]
pub struct EigenState<T> {
    pub b0: T,
    pub coeffs: Vec<T>,
    pub energy: f64,
}

fn lift<T: Real>(x: f64) -> T {
    T::from_f64(x)
}

/// Pentadiagonal D with D a = b0 a.
pub fn build_d_matrix<T: Real>(point: &ModelPoint) -> Result<Mat<T>> {
    point.validate()?;
    if point.g == 0.0 {
        return Err(Error::AnalyticBranch("g = 0: use the unperturbed spectrum".into()));
    }
    let m = point.pairs() as i64;
    let j = point.j as i64;
    let nu = point.nu() as i64;
    let s = point.s() as i64;
    let t2 = lift::<T>(point.t) * lift::<T>(point.t);
    let g: T = lift(point.g);
    let n = (m + 1) as usize;
    let mut d = Mat::zeros(n);
    let int = |x: i64| T::from_i64(x);
    for k in 0..=m {
        let r = k as usize;
        if s != 0 {
            if k >= 2 {
                d.set(r, r - 2, int((k - 2) * (k - 1 - 2 * m) + m * (m - 1)));
            }
            if k >= 1 {
                d.set(r, r - 1, int(s * (k - m - 1)) / g);
            }
            d.set(r, r, int(k) * (int(2 * j - k) * t2 + int(s * (2 * nu + k))));
            if k + 1 <= m {
                d.set(r, r + 1, -(int(s * (k + 1)) * t2) / g);
            }
            if k + 2 <= m {
                d.set(r, r + 2, -(int(s * (k + 2) * (k + 1)) * t2));
            }
        } else {
            if k >= 1 {
                d.set(r, r - 1, int(k - 1 - m) / g);
            }
            d.set(r, r, int(k * (k + 2 * nu)));
            if k + 1 <= m {
                d.set(r, r + 1, -(int(k + 1) * t2) / g);
            }
            if k + 2 <= m {
                d.set(r, r + 2, -(int((k + 2) * (k + 1)) * t2));
            }
        }
    }
    Ok(d)
}

/// Matrix of the Lamé operator on the basis (x − x0)^k, k = 0..M, together
/// with the eigenvalue offset: its eigenvalues are b0 + V_tail(x0). At
/// x0 = 0 it coincides with D.
pub fn shifted_d_matrix<T: Real>(point: &ModelPoint, x0: T) -> Result<(Mat<T>, T)> {
    point.validate()?;
    if point.g == 0.0 {
        return Err(Error::AnalyticBranch("g = 0: use the unperturbed spectrum".into()));
    }
    let op = LameOperator::<T>::new(point);
    let a = poly::taylor_shift(&op.a, x0);
    let b = poly::taylor_shift(&op.b, x0);
    let mut v = poly::taylor_shift(&op.v_tail, x0);
    let offset = v[0];
    v[0] = T::zero();
    let n = point.pairs() + 1;
    let mut d = Mat::zeros(n);
    let mut add = |row: usize, col: usize, x: T| {
        if row < n {
            d.set(row, col, d.get(row, col) + x);
        }
    };
    for k in 0..n {
        let kk = T::from_i64(k as i64);
        if k >= 2 {
            for (i, &c) in a.iter().enumerate() {
                add(k - 2 + i, k, c * kk * T::from_i64(k as i64 - 1));
            }
        }
        if k >= 1 {
            for (i, &c) in b.iter().enumerate() {
                add(k - 1 + i, k, c * kk);
            }
        }
        for (i, &c) in v.iter().enumerate() {
            add(k + i, k, -c);
        }
    }
    Ok((d, offset))
}

/// Coefficients of A, B and of V without its constant term.
#[derive(Clone, Debug)]
pub struct LameOperator<T> {
    pub a: Vec<T>,
    pub b: Vec<T>,
    pub v_tail: Vec<T>,
}

impl<T: Real> LameOperator<T> {
    pub fn new(point: &ModelPoint) -> LameOperator<T> {
        let m = point.pairs() as i64;
        let j = point.j as i64;
        let nu = point.nu() as i64;
        let s = point.s() as i64;
        let t: T = lift(point.t);
        let t2 = t * t;
        let g: T = lift(point.g);
        let int = |x: i64| T::from_i64(x);
        if s != 0 {
            let sf = int(s);
            LameOperator {
                a: poly::mul(&[sf, T::zero(), T::one()], &[-t2, T::zero(), T::one()]),
                b: vec![-(sf * t2) / g, t2 * int(2 * j - 1) + int(s * (2 * nu + 1)), sf / g, int(-2 * (m - 1))],
                v_tail: vec![T::zero(), int(s * m) / g, int(-m * (m - 1))],
            }
        } else {
            LameOperator {
                a: vec![-t2, T::zero(), T::one()],
                b: vec![-t2 / g, int(2 * nu + 1), T::one() / g],
                v_tail: vec![T::zero(), int(m) / g],
            }
        }
    }

    pub fn v(&self, b0: T) -> Vec<T> {
        let mut v = self.v_tail.clone();
        v[0] = b0;
        v
    }

    /// Coefficients of A P'' + B P' − V P.
    pub fn apply(&self, b0: T, p: &[T]) -> Vec<T> {
        let d1 = poly::derivative(p);
        let d2 = poly::derivative(&d1);
        let lhs = poly::add(&poly::mul(&self.a, &d2), &poly::mul(&self.b, &d1));
        let vp = poly::mul(&self.v(b0), p);
        poly::add(&lhs, &poly::scale(&vp, -T::one()))
    }
}

/// Energy (units of ε times ε) of the state whose Van Vleck constant is b0.
pub fn energy_from_b0<T: Real>(point: &ModelPoint, b0: T) -> f64 {
    let op = LameOperator::<T>::new(point);
    let t: T = lift(point.t);
    let v = op.v(b0);
    let lam_p = poly::eval(&v, t) / poly::eval(&op.b, t);
    let lam_m = poly::eval(&v, -t) / poly::eval(&op.b, -t);
    let s = point.s() as f64;
    let nu = point.nu() as f64;
    let m = point.pairs() as f64;
    let sum = lift::<T>(-s * m) + lift::<T>(1.0 + s * point.t * point.t) * (lam_p - lam_m) / (t + t);
    let g = point.g;
    let e = lift::<T>(g * (1.0 - s * point.t * point.t) / (2.0 * point.t) * nu * (nu + 1.0))
        + lift::<T>(2.0 * g * (nu + 0.5)) * t * sum;
    point.epsilon * e.to_f64()
}

/// E = gε(1−st²)/(2t)·ν(ν+1) + 2gε(ν+½)t Σ_α (1+s e_α²)/(t²−e_α²).
pub fn rg_energy(point: &ModelPoint, pairons: &[C]) -> Result<f64> {
    let t = point.t;
    let s = point.s() as f64;
    let nu = point.nu() as f64;
    let mut sum = C::new(0.0, 0.0);
    for &e in pairons {
        if (e - t).norm() <= 4.0 * f64::EPSILON * t || (e + t).norm() <= 4.0 * f64::EPSILON * t {
            return Err(Error::Singular(format!("pairon {e} sits on ±t; use the weak-coupling branch")));
        }
        sum += (1.0 + s * e * e) / (t * t - e * e);
    }
    let g = point.g;
    Ok(point.epsilon * (g * (1.0 - s * t * t) / (2.0 * t) * nu * (nu + 1.0) + 2.0 * g * (nu + 0.5) * t * sum.re))
}

/// Max residual of the electrostatic Richardson equations. Free pairons are
/// checked directly; a cluster of N pairons on a charge position is checked
/// against the collapse condition Q + (N−1)/2 = 0.
pub fn richardson_residual(point: &ModelPoint, pairons: &PaironSet) -> f64 {
    let free = pairons.free();
    for (a, x) in free.iter().enumerate() {
        if free[a + 1..].iter().any(|y| y == x) {
            return f64::INFINITY;
        }
    }
    let (npc, npd) = (pairons.multiplicity_at_pc, pairons.multiplicity_at_pd);
    let sys = RichardsonSystem::new(point, npc, npd);
    let mut r = sys.max_residual(free);
    if let Some(c) = point.charges() {
        if npc > 0 {
            r = r.max((c.qc + (npc as f64 - 1.0) / 2.0).norm());
        }
        if npd > 0 {
            r = r.max((c.qd + (npd as f64 - 1.0) / 2.0).norm());
        }
    }
    r
}

/// b0 rebuilt from the pairons through V(0) = Σ_k B(η_k)Λ(η_k) Π_{l≠k} (−η_l)/(η_k − η_l)
/// over the zeros η_k of A. `None` when a pairon sits on a zero of A.
pub fn van_vleck_b0(point: &ModelPoint, pairons: &[C]) -> Option<f64> {
    let t = point.t;
    let mut nodes = vec![C::new(t, 0.0), C::new(-t, 0.0)];
    if point.s() != 0 {
        let r = C::new(-(point.s() as f64), 0.0).sqrt();
        nodes.push(r);
        nodes.push(-r);
    }
    let op = LameOperator::<f64>::new(point);
    let mut v0 = C::new(0.0, 0.0);
    for (k, &eta) in nodes.iter().enumerate() {
        let mut lam = C::new(0.0, 0.0);
        for &e in pairons {
            let d = eta - e;
            if d.norm() < 1e-300 {
                return None;
            }
            lam += 1.0 / d;
        }
        let mut basis = C::new(1.0, 0.0);
        for (l, &other) in nodes.iter().enumerate() {
            if l != k {
                basis *= -other / (eta - other);
            }
        }
        v0 += poly::eval_complex(&op.b, eta) * lam * basis;
    }
    Some(v0.re)
}

/// Normalized amplitudes over the Fock states |n_a = 2(M−k)+ν, n_b = 2k+ν⟩,
/// k = 0..M, of Π_α (a†a†/(e_α+t) + b†b†/(e_α−t)) |ν ν⟩.
pub fn amplitudes_from_pairons(point: &ModelPoint, pairons: &[C]) -> Result<Vec<f64>> {
    let t = point.t;
    let m = pairons.len();
    let nu = point.nu() as usize;
    let mut esym = vec![C::new(0.0, 0.0); m + 1];
    esym[0] = C::new(1.0, 0.0);
    for (i, &e) in pairons.iter().enumerate() {
        if (e - t).norm() <= f64::EPSILON * t {
            return Err(Error::Singular(format!("pairon {e} sits on +t")));
        }
        let w = (e + t) / (e - t);
        for k in (1..=i + 1).rev() {
            let prev = esym[k - 1];
            esym[k] += w * prev;
        }
    }
    let max_n = 2 * m + nu + 1;
    let mut ln_fact = vec![0.0f64; max_n + 1];
    for n in 1..=max_n {
        ln_fact[n] = ln_fact[n - 1] + (n as f64).ln();
    }
    let logs: Vec<f64> = (0..=m)
        .map(|k| {
            let norm = esym[k].norm();
            if norm == 0.0 {
                f64::NEG_INFINITY
            } else {
                norm.ln() + 0.5 * (ln_fact[2 * (m - k) + nu] + ln_fact[2 * k + nu])
            }
        })
        .collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !top.is_finite() {
        return Err(Error::Singular("all amplitudes vanish".into()));
    }
    let mut amp: Vec<C> = (0..=m)
        .map(|k| {
            let n = esym[k].norm();
            if n == 0.0 {
                C::new(0.0, 0.0)
            } else {
                esym[k] / n * (logs[k] - top).exp()
            }
        })
        .collect();
    let biggest = amp.iter().copied().fold(C::new(0.0, 0.0), |b, z| if z.norm() > b.norm() { z } else { b });
    let phase = biggest.conj() / biggest.norm();
    let norm = amp.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in amp.iter_mut() {
        *z = *z * phase / norm;
    }
    Ok(amp.into_iter().map(|z| z.re).collect())
}

fn coefficient_scale<T: Real>(p: &[T]) -> T {
    p.iter().fold(T::zero(), |acc, &c| acc + c.abs())
}

/// Repeatedly divides out (x − r) while the remainder is below
/// `tol · Σ|p_k|`, at most `cap` times.
fn deflate_at<T: Real>(p: &mut Vec<T>, r: T, tol: f64, cap: usize) -> usize {
    let mut count = 0;
    while count < cap && p.len() > 1 {
        let (q, rem) = poly::deflate_linear(p, r);
        if rem.abs().to_f64() > tol * coefficient_scale(p).to_f64() {
            break;
        }
        *p = q;
        count += 1;
    }
    count
}

/// Roots of a monic polynomial, with clusters on the charge positions of the
/// hyperbolic family deflated first. `expect` gives, per side, the number of
/// pairons allowed to be deflated with a loose test (the coupling sits on a
/// collapse value); otherwise only exact multiple roots are removed.
pub fn roots_of<T: Real>(coeffs: &[T], hyperbolic: bool, expect: (usize, usize)) -> (PaironSet, bool) {
    let mut p = coeffs.to_vec();
    let strict = 1e3 * p.len() as f64 * T::epsilon();
    let (mut npc, mut npd) = (0, 0);
    if hyperbolic {
        let m = p.len() - 1;
        npc = deflate_at(&mut p, -T::one(), strict, m);
        npd = deflate_at(&mut p, T::one(), strict, m);
        if expect.0 > npc {
            npc += deflate_at(&mut p, -T::one(), 1e-6, expect.0 - npc);
        }
        if expect.1 > npd {
            npd += deflate_at(&mut p, T::one(), 1e-6, expect.1 - npd);
        }
    }
    let found = aberth(&p, AberthOptions::default());
    let mut values: Vec<C> = found.roots.iter().map(|z| C::new(z.re.to_f64(), z.im.to_f64())).collect();
    values.extend(std::iter::repeat(C::new(-1.0, 0.0)).take(npc));
    values.extend(std::iter::repeat(C::new(1.0, 0.0)).take(npd));
    let residual = if found.converged { 0.0 } else { f64::INFINITY };
    (PaironSet { values, multiplicity_at_pc: npc, multiplicity_at_pd: npd, residual }, found.converged)
}

/// Snaps near-real roots onto the axis and averages conjugate partners. For
/// the trigonometric family, where all pairons are real, a spurious pair
/// a ± ib is split into the reals a ± b.
fn enforce_conjugation(z: &mut [C], all_real: bool) {
    let n = z.len();
    let mut done = vec![false; n];
    for i in 0..n {
        if done[i] {
            continue;
        }
        let scale = z[i].norm().max(1.0);
        if z[i].im.abs() <= 1e-12 * scale {
            z[i].im = 0.0;
            done[i] = true;
            continue;
        }
        // a genuine partner sits much closer to the conjugate than the root
        // sits to the axis; otherwise the imaginary part is rounding noise
        let target = z[i].conj();
        let partner = (0..n)
            .filter(|&k| k != i && !done[k])
            .min_by(|&a, &b| (z[a] - target).norm().total_cmp(&(z[b] - target).norm()))
            .filter(|&k| (z[k] - target).norm() < 0.5 * z[i].im.abs());
        match partner {
            Some(k) => {
                let mid = 0.5 * (z[i] + z[k].conj());
                if all_real {
                    z[i] = C::new(mid.re - mid.im.abs(), 0.0);
                    z[k] = C::new(mid.re + mid.im.abs(), 0.0);
                } else {
                    z[i] = mid;
                    z[k] = mid.conj();
                }
                done[k] = true;
            }
            None => z[i].im = 0.0,
        }
        done[i] = true;
    }
}

/// |a_M| c^M / max_k |a_k| c^k with c = |a_i/a_M|^(1/(M−i)) the geometric
/// root scale (i the lowest nonzero coefficient). Unlike |a_M|/max|a_k| this
/// does not depend on where the roots sit, only on their spread.
fn scaled_lead<T: Real>(a: &[T]) -> f64 {
    let m = a.len() - 1;
    let logs: Vec<f64> = a.iter().map(|x| x.abs().to_f64().ln()).collect();
    let Some(low) = logs.iter().position(|x| x.is_finite()) else { return 0.0 };
    if !logs[m].is_finite() {
        return 0.0;
    }
    if low == m {
        return 1.0;
    }
    let lc = (logs[low] - logs[m]) / (m - low) as f64;
    let scaled = |k: usize| logs[k] + k as f64 * lc;
    let top = (0..=m).map(scaled).fold(f64::NEG_INFINITY, f64::max);
    (scaled(m) - top).exp()
}

/// Eigenvalues and refined eigenvectors of D, sorted by energy.
pub fn eigenstates<T: Real>(point: &ModelPoint) -> Result<Vec<EigenState<T>>> {
    let d = build_d_matrix::<T>(point)?;
    let n = d.dim();
    if n == 1 {
        let b0 = d.get(0, 0);
        return Ok(vec![EigenState { b0, coeffs: vec![T::one()], energy: energy_from_b0(point, b0) }]);
    }
    let ev = eigenvalues(&d).map_err(|e| Error::Eigen(format!("{e:?} for {point:?}")))?;
    let dnorm = d.max_abs().to_f64();
    let im_tol = T::epsilon().sqrt() * dnorm.max(1.0);
    let worst = ev.iter().map(|z| z.im.abs().to_f64()).fold(0.0, f64::max);
    if worst > im_tol {
        return Err(Error::Eigen(format!(
            "non-real Van Vleck constant (|Im b0| = {worst:.3e}, tolerance {im_tol:.3e}); escalate precision"
        )));
    }
    let mut out = Vec::with_capacity(n);
    for z in &ev {
        let pair = refine_eigenpair(&d, z.re, (2, 2)).map_err(|e| Error::Eigen(format!("{e:?}")))?;
        let lead = pair.vector[n - 1];
        let deficiency = scaled_lead(&pair.vector);
        if deficiency < 1e-13 {
            return Err(Error::Eigen(format!(
                "degree-deficient eigenvector (|a_M| c^M / max|a_k| c^k = {deficiency:.2e})"
            )));
        }
        let coeffs: Vec<T> = pair.vector.iter().map(|&x| x / lead).collect();
        out.push(EigenState { b0: pair.value, coeffs, energy: energy_from_b0(point, pair.value) });
    }
    out.sort_by(|a, b| a.energy.total_cmp(&b.energy).then(a.b0.to_f64().total_cmp(&b.b0.to_f64())));
    for w in out.windows(2) {
        let gap = (w[1].b0 - w[0].b0).abs().to_f64();
        if gap <= 1e3 * T::epsilon() * dnorm.max(1.0) {
            return Err(Error::Eigen("two eigenvalues refined onto the same Van Vleck constant".into()));
        }
    }
    Ok(out)
}

/// Energies only, ascending; no root extraction. Cheapest entry point for
/// crossing scans and bisections.
pub fn solve_energies(point: &ModelPoint, precision: Precision) -> Result<Vec<f64>> {
    point.validate()?;
    if point.g == 0.0 {
        return Ok(point.unperturbed_energies());
    }
    if point.is_diagonal_line() {
        let mut e: Vec<f64> = point
            .sector_m()
            .iter()
            .map(|&m| crate::model::diagonal_line_energy(point.j, m, point.g, point.epsilon).unwrap())
            .collect();
        e.sort_by(f64::total_cmp);
        return Ok(e);
    }
    let run = |p: Precision| -> Result<Vec<f64>> {
        Ok(match p {
            Precision::Double => eigenstates::<f64>(point)?.iter().map(|s| s.energy).collect(),
            Precision::DoubleDouble => eigenstates::<Dd>(point)?.iter().map(|s| s.energy).collect(),
        })
    };
    match run(precision) {
        Err(Error::Eigen(_)) if precision == Precision::Double => run(Precision::DoubleDouble),
        r => r,
    }
}

/// Per-state (P(P_C), P(P_D)) from dd eigenvectors, in energy order.
pub fn charge_values(point: &ModelPoint) -> Result<Vec<(f64, f64)>> {
    let states = eigenstates::<Dd>(point)?;
    Ok(states
        .iter()
        .map(|s| (poly::eval(&s.coeffs, -Dd::ONE).to_f64(), poly::eval(&s.coeffs, Dd::ONE).to_f64()))
        .collect())
}

fn expected_collapses(point: &ModelPoint) -> (usize, usize) {
    if point.s() != -1 {
        return (0, 0);
    }
    let mut out = (0, 0);
    for n in 1..=point.pairs() as u32 {
        if (point.g - collapse_coupling(point.j, n, Side::C).unwrap()).abs() < 1e-9 {
            out.0 = n as usize;
        }
        if (point.g - collapse_coupling(point.j, n, Side::D).unwrap()).abs() < 1e-9 {
            out.1 = n as usize;
        }
    }
    out
}

fn analytic_states(point: &ModelPoint) -> Vec<RgState> {
    let m = point.pairs();
    let diagonal = point.g != 0.0;
    let (left, right) = if diagonal { (-1.0, 1.0) } else { (-point.t, point.t) };
    let d = if diagonal { build_d_matrix::<f64>(point).ok() } else { None };
    let op = LameOperator::<f64>::new(point);
    let mut states: Vec<RgState> = (0..=m)
        .map(|k| {
            let mut values = vec![C::new(left, 0.0); m - k];
            values.extend(std::iter::repeat(C::new(right, 0.0)).take(k));
            let coeffs = poly::from_roots(&values);
            let mval = -(point.j as i64) + point.nu() as i64 + 2 * k as i64;
            let energy = if diagonal {
                crate::model::diagonal_line_energy(point.j, mval, point.g, point.epsilon).unwrap()
            } else {
                point.epsilon * mval as f64
            };
            let b0 = d.as_ref().map(|d| d.mul_vec(&coeffs)[m]);
            let lame_residual = match b0 {
                Some(b) => relative_max(&op.apply(b, &coeffs), &coeffs),
                None => 0.0,
            };
            let (npc, npd) = if diagonal { (m - k, k) } else { (0, 0) };
            RgState {
                index: 0,
                energy,
                energy_pairons: None,
                b0,
                coeffs,
                pairons: PaironSet { values, multiplicity_at_pc: npc, multiplicity_at_pd: npd, residual: 0.0 },
                lame_residual,
                charge_values: None,
                method: PaironMethod::Analytic,
                flag: None,
            }
        })
        .collect();
    states.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    for (i, s) in states.iter_mut().enumerate() {
        s.index = i;
    }
    states
}

fn relative_max(r: &[f64], p: &[f64]) -> f64 {
    let num = r.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let den = p.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    num / den.max(f64::MIN_POSITIVE)
}

/// Roots of the eigenpolynomial of `b0` expanded around `x0`.
fn centered_roots<T: Real>(point: &ModelPoint, b0: T, x0: f64) -> Option<Vec<C>> {
    let c: T = lift(x0);
    let (d, offset) = shifted_d_matrix(point, c).ok()?;
    let pair = refine_eigenpair(&d, b0 + offset, (2, 2)).ok()?;
    if scaled_lead(&pair.vector) < 1e-13 {
        return None;
    }
    let lead = *pair.vector.last()?;
    let coeffs: Vec<T> = pair.vector.iter().map(|&x| x / lead).collect();
    let found = aberth(&coeffs, AberthOptions::default());
    found
        .converged
        .then(|| found.roots.iter().map(|z| C::new((z.re + c).to_f64(), z.im.to_f64())).collect())
}

/// Candidate pairon sets from expansions around the cluster centers: each
/// center on its own, and the roots merged by nearest center.
fn cluster_candidates<T: Real>(point: &ModelPoint, b0: T) -> Vec<Vec<C>> {
    let t = point.t;
    let mut centers = vec![-t, t];
    if point.s() == -1 && (t - 1.0).abs() > 1e-3 {
        centers.extend([-1.0, 1.0]);
    }
    let sets: Vec<(f64, Vec<C>)> =
        centers.iter().filter_map(|&x0| centered_roots(point, b0, x0).map(|r| (x0, r))).collect();
    let nearest = |z: C| {
        centers.iter().copied().min_by(|a, b| (z - a).norm().total_cmp(&(z - b).norm())).unwrap()
    };
    let mut merged = Vec::new();
    for (x0, roots) in &sets {
        merged.extend(roots.iter().copied().filter(|&z| nearest(z) == *x0));
    }
    let mut out: Vec<Vec<C>> = sets.into_iter().map(|(_, r)| r).collect();
    if merged.len() == point.pairs() {
        out.insert(0, merged);
    }
    out
}

fn finish_state<T: Real>(point: &ModelPoint, index: usize, es: &EigenState<T>, opts: &HsOptions) -> RgState {
    let m = point.pairs();
    let op = LameOperator::<T>::new(point);
    let lame = op.apply(es.b0, &es.coeffs);
    let lame_residual = (poly::max_abs(&lame) / poly::max_abs(&es.coeffs)).to_f64();
    let hyperbolic = point.s() == -1;
    let charge_values = hyperbolic.then(|| {
        (poly::eval(&es.coeffs, -T::one()).to_f64(), poly::eval(&es.coeffs, T::one()).to_f64())
    });
    let tol = opts.residual_tol * (2 * point.j - 1) as f64;

    let mut flag = None;
    let mut method = PaironMethod::Roots;
    let (set, rooted) = if m == 0 {
        (PaironSet { values: vec![], multiplicity_at_pc: 0, multiplicity_at_pd: 0, residual: 0.0 }, true)
    } else {
        roots_of(&es.coeffs, hyperbolic, expected_collapses(point))
    };
    let energy = es.energy;
    let identity = |set: &PaironSet| -> Option<f64> { rg_energy(point, &set.values).ok() };
    let mismatch = |e: Option<f64>| e.map_or(f64::INFINITY, |e| (e - energy).abs() / energy.abs().max(1.0));
    let agrees = |e: Option<f64>| mismatch(e) <= opts.identity_tol;
    let polish = |mut set: PaironSet| -> PaironSet {
        let nfree = set.len() - set.multiplicity_at_pc - set.multiplicity_at_pd;
        let sys = RichardsonSystem::new(point, set.multiplicity_at_pc, set.multiplicity_at_pd);
        if nfree > 0 {
            enforce_conjugation(&mut set.values[..nfree], point.s() == 1);
            let before = sys.max_residual(&set.values[..nfree]);
            if before > tol * 1e-3 {
                let out = sys.solve(&set.values[..nfree], tol * 1e-3, 60);
                let mut trial = set.clone();
                trial.values[..nfree].copy_from_slice(&out.pairons);
                enforce_conjugation(&mut trial.values[..nfree], point.s() == 1);
                if out.residual < before
                    && mismatch(identity(&trial)) <= mismatch(identity(&set)).max(opts.identity_tol)
                {
                    set = trial;
                }
            }
        }
        set.residual = richardson_residual(point, &set);
        set
    };
    let passes = |set: &PaironSet| set.residual <= tol && agrees(identity(set));
    let mut set = polish(set);

    // real multiple roots at the charge positions only occur on the collapse
    // couplings; elsewhere a deflation is a tight cluster next to P_C or P_D
    let collapse_free = expected_collapses(point) == (0, 0);
    if !(rooted && passes(&set)) && collapse_free && m > 1 {
        let plain = roots_of(&es.coeffs, false, (0, 0)).0.values;
        for values in std::iter::once(plain).chain(cluster_candidates(point, es.b0)) {
            let trial = polish(PaironSet { values, multiplicity_at_pc: 0, multiplicity_at_pd: 0, residual: f64::NAN });
            if passes(&trial) {
                set = trial;
                method = PaironMethod::CenteredRoots;
                break;
            }
            if trial.residual < set.residual {
                set = trial;
            }
        }
    }
    let mut energy_pairons = identity(&set);

    let ok = (rooted || method == PaironMethod::CenteredRoots) && passes(&set);
    if !ok {
        let mut recovered = false;
        if opts.continuation_fallback && collapse_free {
            // pairons of s = +1 can run through infinity; the mirror image
            // (e → 1/e, same energies and ordering) then takes over
            let mirrored = if point.s() == 0 { None } else { point.mirror().ok() };
            for (k, p) in std::iter::once(*point).chain(mirrored).enumerate() {
                let Ok(run) = crate::newton::continue_to(&p, index, &Default::default()) else { continue };
                let mut values = run.pairons.values;
                if k == 1 {
                    values.iter_mut().for_each(|z| *z = 1.0 / *z);
                }
                let candidate =
                    polish(PaironSet { values, multiplicity_at_pc: 0, multiplicity_at_pd: 0, residual: f64::NAN });
                if passes(&candidate) {
                    energy_pairons = identity(&candidate);
                    set = candidate;
                    method = PaironMethod::Continuation;
                    recovered = true;
                    break;
                }
            }
        }
        if !recovered {
            flag = Some(if !rooted {
                "root extraction did not converge".to_string()
            } else if set.residual > tol {
                format!("Richardson residual {:.3e} above {:.3e}", set.residual, tol)
            } else {
                "pairon energy disagrees with the Van Vleck energy".to_string()
            });
        }
    }
    RgState {
        index,
        energy,
        energy_pairons,
        b0: Some(es.b0.to_f64()),
        coeffs: es.coeffs.iter().map(|c| c.to_f64()).collect(),
        pairons: set,
        lame_residual,
        charge_values,
        method,
        flag,
    }
}

fn solve_generic<T: Real>(point: &ModelPoint, opts: &HsOptions) -> Result<Vec<RgState>> {
    let eig = eigenstates::<T>(point)?;
    Ok(eig.iter().enumerate().map(|(i, es)| finish_state(point, i, es, opts)).collect())
}

/// All M+1 eigenstates of the sector, ascending in energy.
pub fn solve_all(point: &ModelPoint, opts: &HsOptions) -> Result<Vec<RgState>> {
    point.validate()?;
    if point.g == 0.0 || point.is_diagonal_line() {
        return Ok(analytic_states(point));
    }
    match opts.precision {
        Precision::Double => match solve_generic::<f64>(point, opts) {
            Err(Error::Eigen(msg)) => {
                let mut states = solve_generic::<Dd>(point, opts)?;
                for s in states.iter_mut() {
                    s.flag.get_or_insert_with(|| format!("escalated to double-double: {msg}"));
                }
                Ok(states)
            }
            r => r,
        },
        Precision::DoubleDouble => solve_generic::<Dd>(point, opts),
    }
}
