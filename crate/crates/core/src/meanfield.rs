//! Coherent-state energy surface of the LMG model and its phase diagram in
//! the (γx, γy) plane.
//!
//! With x = ρ_b²/2j and B_θ = γx + γy + (γx − γy) cos 2θ the energy per
//! particle in the thermodynamic limit is
//!
//!   2𝓔/ε + 1 = (2 + B_θ) x − B_θ x².
//!
//! For fixed x the surface is linear in B_θ with a non-negative slope
//! x(1 − x), so the minimum always sits at cos 2θ = ±1.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Phase {
    /// Empty b mode, no order.
    A,
    /// ⟨S_x²⟩ ordered, θ ∈ {0, π}.
    B,
    /// ⟨S_y²⟩ ordered, θ = ±π/2.
    C,
}

impl Phase {
    pub fn label(self) -> &'static str {
        match self {
            Phase::A => "A",
            Phase::B => "B",
            Phase::C => "C",
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct PhasePoint {
    pub gx: f64,
    pub gy: f64,
    pub phase: Phase,
    pub theta_min: f64,
    /// ρ_b²/2j at the minimum.
    pub xb_min: f64,
    /// 2𝓔/ε + 1 at the minimum.
    pub energy_min: f64,
    pub sx2: f64,
    pub sy2: f64,
    /// Set on γx = γy < −1, where the minimum does not depend on θ; θ = 0 is
    /// reported.
    pub theta_free: bool,
}

/// Which energy surface to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Surface {
    Thermodynamic,
    /// The surface before dropping O(1/j) terms, in the same units as the
    /// thermodynamic one (2E/(2jε) + 1).
    FiniteJ(u32),
}

fn b_theta(gx: f64, gy: f64, theta: f64) -> f64 {
    gx + gy + (gx - gy) * (2.0 * theta).cos()
}

/// 2𝓔/ε + 1 at (θ, x).
pub fn energy_surface(gx: f64, gy: f64, theta: f64, xb: f64) -> Result<f64> {
    Surface::Thermodynamic.eval(gx, gy, theta, xb)
}

impl Surface {
    pub fn eval(self, gx: f64, gy: f64, theta: f64, xb: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&xb) {
            return domain(format!("ρ_b²/2j = {xb} outside [0, 1]"));
        }
        let b = b_theta(gx, gy, theta);
        Ok(match self {
            Surface::Thermodynamic => (2.0 + b) * xb - b * xb * xb,
            Surface::FiniteJ(j) => {
                if j == 0 {
                    return domain("finite-j surface needs j ≥ 1");
                }
                let j = j as f64;
                let n = 2.0 * j - 1.0;
                let a = (gx + gy - 2.0 * n) / 4.0;
                // E/ε = 2j/(2j−1) [A + (2j−1 + jB)x − jB x²]
                let e = 2.0 * j / n * (a + (n + j * b) * xb - j * b * xb * xb);
                e / j + 1.0
            }
        })
    }
}

fn ordered(gx: f64, gy: f64, phase: Phase, g: f64, theta: f64, theta_free: bool) -> PhasePoint {
    let x = (g + 1.0) / (2.0 * g);
    let order = 4.0 * x * (1.0 - x);
    let (sx2, sy2) = if phase == Phase::C { (0.0, order) } else { (order, 0.0) };
    PhasePoint {
        gx,
        gy,
        phase,
        theta_min: theta,
        xb_min: x,
        energy_min: (g + 1.0) * (g + 1.0) / (2.0 * g),
        sx2,
        sy2,
        theta_free,
    }
}

/// Closed-form minimum of the thermodynamic surface.
pub fn minimize(gx: f64, gy: f64) -> PhasePoint {
    if gx >= -1.0 && gy >= -1.0 {
        return PhasePoint {
            gx,
            gy,
            phase: Phase::A,
            theta_min: 0.0,
            xb_min: 0.0,
            energy_min: 0.0,
            sx2: 0.0,
            sy2: 0.0,
            theta_free: false,
        };
    }
    if gx < gy {
        ordered(gx, gy, Phase::B, gx, 0.0, false)
    } else if gy < gx {
        ordered(gx, gy, Phase::C, gy, std::f64::consts::FRAC_PI_2, false)
    } else {
        ordered(gx, gy, Phase::B, gx, 0.0, true)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct GridOptions {
    pub theta_points: usize,
    pub x_points: usize,
    pub surface: Surface,
}

impl Default for GridOptions {
    fn default() -> Self {
        GridOptions { theta_points: 64, x_points: 101, surface: Surface::Thermodynamic }
    }
}

fn golden<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() < 1e-13 {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Numerical minimum: dense (θ, x) grid followed by alternating golden-section
/// refinement around the best node. The phase label is read off the result.
pub fn minimize_numeric(gx: f64, gy: f64, opts: &GridOptions) -> Result<PhasePoint> {
    use std::f64::consts::PI;
    let surface = opts.surface;
    let f = |theta: f64, x: f64| surface.eval(gx, gy, theta, x.clamp(0.0, 1.0)).unwrap_or(f64::INFINITY);
    let nt = opts.theta_points.max(4);
    let nx = opts.x_points.max(3);
    let dt = 2.0 * PI / nt as f64;
    let dx = 1.0 / (nx - 1) as f64;
    let mut best = (0.0, 0.0, f64::INFINITY);
    for i in 0..nt {
        let theta = -PI + dt * (i + 1) as f64;
        for k in 0..nx {
            let x = k as f64 * dx;
            let e = f(theta, x);
            if e < best.2 {
                best = (theta, x, e);
            }
        }
    }
    let (mut theta, mut x, _) = best;
    for _ in 0..4 {
        x = golden(|y| f(theta, y), (x - dx).max(0.0), (x + dx).min(1.0));
        theta = golden(|u| f(u, x), theta - dt, theta + dt);
    }
    let e = f(theta, x).min(f(theta, 0.0));
    if f(theta, 0.0) <= e {
        x = 0.0;
    }
    if theta <= -PI {
        theta += 2.0 * PI;
    } else if theta > PI {
        theta -= 2.0 * PI;
    }
    let order = 4.0 * x * (1.0 - x);
    let (c2, s2) = (theta.cos().powi(2), theta.sin().powi(2));
    let phase = if x < 1e-6 {
        Phase::A
    } else if c2 >= s2 {
        Phase::B
    } else {
        Phase::C
    };
    Ok(PhasePoint {
        gx,
        gy,
        phase,
        theta_min: theta,
        xb_min: x,
        energy_min: e,
        sx2: order * c2,
        sy2: order * s2,
        theta_free: gx == gy && gx < -1.0,
    })
}

/// `n` evenly spaced values from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Closed-form phase points on the n×n grid over [lo, hi]², row-major in γy
/// then γx.
pub fn phase_grid(lo: f64, hi: f64, n: usize) -> Vec<PhasePoint> {
    let axis = linspace(lo, hi, n);
    axis.iter().flat_map(|&gy| axis.iter().map(move |&gx| minimize(gx, gy))).collect()
}

/// Largest |closed form − numeric| minimum energy over the grid.
pub fn grid_agreement(lo: f64, hi: f64, n: usize, opts: &GridOptions) -> f64 {
    let axis = linspace(lo, hi, n);
    let pts: Vec<(f64, f64)> = axis.iter().flat_map(|&gy| axis.iter().map(move |&gx| (gx, gy))).collect();
    pts.par_iter()
        .map(|&(gx, gy)| {
            let exact = minimize(gx, gy).energy_min;
            minimize_numeric(gx, gy, opts).map_or(f64::INFINITY, |p| (p.energy_min - exact).abs())
        })
        .reduce(|| 0.0, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TransitionOrder {
    First,
    Second,
    Third,
}

#[derive(Clone, Debug, Serialize)]
pub struct TransitionReport {
    /// Path parameter of the phase boundary, if one is crossed.
    pub critical_u: Option<f64>,
    pub order: Option<TransitionOrder>,
    /// One-sided estimates (left, right) of the first three derivatives of
    /// the minimized energy at `critical_u`.
    pub derivatives: Vec<(f64, f64)>,
    pub phases: Option<(Phase, Phase)>,
}

impl TransitionReport {
    pub fn describe(&self) -> String {
        match (self.critical_u, self.order) {
            (None, _) => "no transition".into(),
            (Some(u), None) => format!("phase boundary at u = {u:.6} with no derivative jump up to third order"),
            (Some(u), Some(o)) => format!("{o:?}-order transition at u = {u:.6}"),
        }
    }
}

const STENCILS: [[f64; 5]; 3] = [
    [-25.0 / 12.0, 48.0 / 12.0, -36.0 / 12.0, 16.0 / 12.0, -3.0 / 12.0],
    [35.0 / 12.0, -104.0 / 12.0, 114.0 / 12.0, -56.0 / 12.0, 11.0 / 12.0],
    [-5.0 / 2.0, 18.0 / 2.0, -24.0 / 2.0, 14.0 / 2.0, -3.0 / 2.0],
];

/// One-sided derivative of order `n` (1..=3) from five samples spaced `h`
/// (negative `h` looks to the left).
fn one_sided<F: Fn(f64) -> f64>(f: &F, u: f64, h: f64, n: usize) -> f64 {
    let w = &STENCILS[n - 1];
    let sum: f64 = (0..5).map(|k| w[k] * f(u + k as f64 * h)).sum();
    sum / h.powi(n as i32)
}

/// Locates the phase boundary crossed by `path` on [u0, u1] and reports the
/// lowest derivative order of the minimized energy that jumps there.
/// Derivatives use five-point one-sided stencils with step `h`.
pub fn classify_transition<P>(path: P, u0: f64, u1: f64, samples: usize, h: f64) -> TransitionReport
where
    P: Fn(f64) -> (f64, f64),
{
    let phase_at = |u: f64| {
        let (gx, gy) = path(u);
        minimize(gx, gy).phase
    };
    let energy = |u: f64| {
        let (gx, gy) = path(u);
        minimize(gx, gy).energy_min
    };
    let us = linspace(u0, u1, samples.max(2));
    let Some(i) = us.windows(2).position(|w| phase_at(w[0]) != phase_at(w[1])) else {
        return TransitionReport { critical_u: None, order: None, derivatives: Vec::new(), phases: None };
    };
    let (mut a, mut b) = (us[i], us[i + 1]);
    let left = phase_at(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        if phase_at(m) == left {
            a = m;
        } else {
            b = m;
        }
    }
    // the boundary is where the label flips; the node on the far side of the
    // flip belongs to the right phase, so start both stencils from the midpoint
    let uc = 0.5 * (a + b);
    let derivatives: Vec<(f64, f64)> = (1..=3)
        .map(|n| (one_sided(&energy, uc, -h, n), one_sided(&energy, uc, h, n)))
        .collect();
    // stencil truncation errors are O(h^(5−n)); jumps are O(1)
    let tolerance = [1e-6, 1e-4, 1e-2];
    let order = derivatives
        .iter()
        .zip(tolerance)
        .position(|(&(l, r), tol)| (l - r).abs() > tol * (1.0 + l.abs().max(r.abs())))
        .map(|k| [TransitionOrder::First, TransitionOrder::Second, TransitionOrder::Third][k]);
    TransitionReport { critical_u: Some(uc), order, derivatives, phases: Some((left, phase_at(b))) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn surface_vanishes_on_the_empty_b_mode() {
        for th in [-3.0, 0.0, 1.2] {
            assert_eq!(energy_surface(-2.5, 0.7, th, 0.0).unwrap(), 0.0);
        }
        assert!(energy_surface(0.0, 0.0, 0.0, 1.5).is_err());
    }

    #[test]
    fn table_rows() {
        let b = minimize(-2.0, -1.5);
        assert_eq!(b.phase, Phase::B);
        assert_abs_diff_eq!(b.xb_min, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(b.energy_min, -0.25, epsilon = 1e-15);
        let c = minimize(0.0, -3.0);
        assert_eq!(c.phase, Phase::C);
        assert_abs_diff_eq!(c.energy_min, -2.0 / 3.0, epsilon = 1e-15);
        let a = minimize(0.0, 0.0);
        assert_eq!((a.phase, a.sx2, a.sy2), (Phase::A, 0.0, 0.0));
    }

    #[test]
    fn diagonal_minimum_matches_surface() {
        let e = energy_surface(-2.0, -2.0, 0.3, 0.25).unwrap();
        assert_abs_diff_eq!(e, -0.25, epsilon = 1e-15);
        assert!(minimize(-2.0, -2.0).theta_free);
    }

    #[test]
    fn first_order_jump_across_the_equal_line() {
        let above = minimize(-3.0, -3.0 - 1e-6);
        let below = minimize(-3.0, -3.0 + 1e-6);
        assert_eq!((above.phase, below.phase), (Phase::C, Phase::B));
        assert_eq!(above.sx2, 0.0);
        assert_eq!(below.sy2, 0.0);
        assert!(above.sy2 > 0.8 && below.sx2 > 0.8);
    }

    #[test]
    fn numeric_minimum_matches_closed_form() {
        for (gx, gy) in [(-2.0, -1.5), (0.3, -2.7), (0.5, 0.5), (-1.0, -1.0), (-2.2, -2.2)] {
            let p = minimize_numeric(gx, gy, &GridOptions::default()).unwrap();
            assert_abs_diff_eq!(p.energy_min, minimize(gx, gy).energy_min, epsilon = 1e-9);
        }
    }

    #[test]
    fn finite_j_surface_approaches_the_limit() {
        let th = 0.4;
        let lim = energy_surface(-2.0, -1.2, th, 0.3).unwrap();
        let d1 = (Surface::FiniteJ(100).eval(-2.0, -1.2, th, 0.3).unwrap() - lim).abs();
        let d2 = (Surface::FiniteJ(1000).eval(-2.0, -1.2, th, 0.3).unwrap() - lim).abs();
        assert!(d2 < d1 && d2 < 1e-2);
    }

    #[test]
    fn transition_orders() {
        let second = classify_transition(|u| (-1.0 + u, 1.0 - u), -0.5, 0.5, 101, 1e-3);
        assert_eq!(second.order, Some(TransitionOrder::Second));
        let first = classify_transition(|u| (-2.0 + u, -2.0 - u), -0.5, 0.5, 101, 1e-3);
        assert_eq!(first.order, Some(TransitionOrder::First));
        let third = classify_transition(|u| (-1.0 + u, -1.0 - u), -0.5, 0.5, 101, 1e-3);
        assert_eq!(third.order, Some(TransitionOrder::Third));
        let none = classify_transition(|u| (u, u), 0.0, 0.5, 11, 1e-3);
        assert!(none.critical_u.is_none());
    }
}
