//! Parameter sweeps with state tracking and event detection: collapses,
//! parity crossings, the triple-point pairon and the Moore–Read-like state.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::ed;
use crate::error::{domain, Error, Result};
use crate::hs::{charge_values, rg_energy, solve_all, solve_energies, HsOptions, Precision, RgState};
use crate::model::{collapse_coupling, Family, ModelPoint, Parity, Side};
use crate::newton::match_pairons;

type C = Complex64;

#[derive(Clone, Debug, Serialize)]
pub struct StateSeries {
    pub state_index: usize,
    pub energies: Vec<f64>,
    /// Pairons per axis point, reordered to continue the previous point.
    pub pairons: Vec<Vec<C>>,
    pub residuals: Vec<f64>,
    pub multiplicities: Vec<(usize, usize)>,
    /// Axis indices where the state came back flagged or the solve failed.
    pub flagged: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EventKind {
    /// P(P_C) or P(P_D) changes sign: a pairon passes through the charge.
    /// `n` is the nearest predicted collapse count and `multiplicity` the
    /// number of pairons deflated there when solving exactly at it.
    Collapse { state: usize, side: Side, n: Option<u32>, multiplicity: Option<usize> },
    ParityCrossing { state: usize, n: Option<u32> },
    SectorDegeneracy { lower: usize, upper: usize },
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepEvent {
    /// g(2j−1)
    pub value: f64,
    /// Predicted g(2j−1), when the event is associated with one.
    pub predicted: Option<f64>,
    pub kind: EventKind,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepTrace {
    pub point: ModelPoint,
    /// g(2j−1) values.
    pub axis: Vec<f64>,
    pub series: Vec<StateSeries>,
    pub events: Vec<SweepEvent>,
}

#[derive(Clone, Copy, Debug)]
pub struct SweepOptions {
    pub hs: HsOptions,
    /// Bisection stopping width in g.
    pub bisect_tol: f64,
    /// Degeneracy threshold in units of ε·j.
    pub degeneracy_tol: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions { hs: HsOptions::default(), bisect_tol: 1e-13, degeneracy_tol: 1e-10 }
    }
}

fn bisect<F: Fn(f64) -> Option<f64>>(f: F, mut a: f64, mut b: f64, tol: f64) -> Option<f64> {
    let mut fa = f(a)?;
    if fa == 0.0 {
        return Some(a);
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (b - a).abs() <= tol || m == a || m == b {
            break;
        }
        let fm = f(m)?;
        if fm == 0.0 {
            return Some(m);
        }
        if (fm > 0.0) == (fa > 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Some(0.5 * (a + b))
}

fn nearest_collapse(j: u32, m: usize, g: f64, side: Side) -> Option<(u32, f64)> {
    (1..=m as u32)
        .filter_map(|n| collapse_coupling(j, n, side).ok().map(|gc| (n, gc)))
        .min_by(|a, b| (a.1 - g).abs().total_cmp(&(b.1 - g).abs()))
}

/// Solves every grid value g(2j−1) in `axis` and follows the states in
/// `states` (energy ranks) across it.
pub fn sweep_g(template: &ModelPoint, states: &[usize], axis: &[f64], opts: &SweepOptions) -> Result<SweepTrace> {
    template.validate()?;
    if let Some(&k) = states.iter().find(|&&k| k >= template.dim()) {
        return domain(format!("state {k} outside the sector of dimension {}", template.dim()));
    }
    let scale = (2 * template.j - 1) as f64;
    let solved: Vec<Result<Vec<RgState>>> =
        axis.par_iter().map(|&a| solve_all(&template.with_g(a / scale), &opts.hs)).collect();

    let mut series: Vec<StateSeries> = states
        .iter()
        .map(|&k| StateSeries {
            state_index: k,
            energies: Vec::with_capacity(axis.len()),
            pairons: Vec::with_capacity(axis.len()),
            residuals: Vec::with_capacity(axis.len()),
            multiplicities: Vec::with_capacity(axis.len()),
            flagged: Vec::new(),
        })
        .collect();
    let mut events = Vec::new();
    let degenerate = opts.degeneracy_tol * template.epsilon * template.j as f64;

    for (i, res) in solved.iter().enumerate() {
        match res {
            Ok(all) => {
                for w in all.windows(2) {
                    if (w[1].energy - w[0].energy).abs() < degenerate {
                        events.push(SweepEvent {
                            value: axis[i],
                            predicted: None,
                            kind: EventKind::SectorDegeneracy { lower: w[0].index, upper: w[1].index },
                        });
                    }
                }
                for s in series.iter_mut() {
                    let st = &all[s.state_index];
                    let values = match s.pairons.last() {
                        Some(prev) if prev.len() == st.pairons.len() && !prev.is_empty() => {
                            match_pairons(prev, &st.pairons.values)
                        }
                        _ => st.pairons.values.clone(),
                    };
                    s.energies.push(st.energy);
                    s.pairons.push(values);
                    s.residuals.push(st.pairons.residual);
                    s.multiplicities.push((st.pairons.multiplicity_at_pc, st.pairons.multiplicity_at_pd));
                    if st.flagged() {
                        s.flagged.push(i);
                    }
                }
            }
            Err(_) => {
                for s in series.iter_mut() {
                    s.energies.push(f64::NAN);
                    s.pairons.push(Vec::new());
                    s.residuals.push(f64::INFINITY);
                    s.multiplicities.push((0, 0));
                    s.flagged.push(i);
                }
            }
        }
    }

    if template.s() == -1 && template.pairs() > 0 {
        events.extend(collapse_events(template, states, axis, &solved, opts)?);
    }
    events.sort_by(|a, b| a.value.total_cmp(&b.value));
    Ok(SweepTrace { point: *template, axis: axis.to_vec(), series, events })
}

fn collapse_events(
    template: &ModelPoint,
    states: &[usize],
    axis: &[f64],
    solved: &[Result<Vec<RgState>>],
    opts: &SweepOptions,
) -> Result<Vec<SweepEvent>> {
    let scale = (2 * template.j - 1) as f64;
    let m = template.pairs();
    let charge = |i: usize, k: usize| -> Option<(f64, f64)> {
        solved[i].as_ref().ok().and_then(|all| all[k].charge_values)
    };
    let mut jobs = Vec::new();
    for &k in states {
        for i in 0..axis.len().saturating_sub(1) {
            let (Some(a), Some(b)) = (charge(i, k), charge(i + 1, k)) else { continue };
            for (side, fa, fb) in [(Side::C, a.0, b.0), (Side::D, a.1, b.1)] {
                if fa == 0.0 || (fa > 0.0) != (fb > 0.0) && fb != 0.0 {
                    jobs.push((k, side, axis[i], axis[i + 1]));
                }
            }
        }
    }
    let located: Vec<Option<SweepEvent>> = jobs
        .par_iter()
        .map(|&(k, side, a, b)| {
            let value_at = |gs: f64| -> Option<f64> {
                let cv = charge_values(&template.with_g(gs / scale)).ok()?;
                Some(if side == Side::C { cv[k].0 } else { cv[k].1 })
            };
            let gs = bisect(value_at, a, b, opts.bisect_tol * scale)?;
            let near = nearest_collapse(template.j, m, gs / scale, side);
            let multiplicity = near.and_then(|(_, gc)| {
                let st = solve_all(&template.with_g(gc), &opts.hs).ok()?;
                let p = &st[k].pairons;
                Some(if side == Side::C { p.multiplicity_at_pc } else { p.multiplicity_at_pd })
            });
            Some(SweepEvent {
                value: gs,
                predicted: near.map(|(_, gc)| gc * scale),
                kind: EventKind::Collapse { state: k, side, n: near.map(|(n, _)| n), multiplicity },
            })
        })
        .collect();
    Ok(located.into_iter().flatten().collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct ParityCrossing {
    /// Energy rank k: the k-th states of both sectors cross.
    pub state: usize,
    pub g: f64,
    pub gscaled: f64,
    /// |E₊ − E₋| at the located point.
    pub gap: f64,
    pub degenerate: bool,
    /// Nearest collapse count N with its coupling g_D(N)(2j−1) (s = −1).
    pub predicted_n: Option<u32>,
    pub predicted_gscaled: Option<f64>,
}

/// Sign changes of E₊^(k) − E₋^(k), k < depth, over the grid of g(2j−1)
/// values, refined by bisection in g to `tol`.
pub fn detect_parity_crossings(
    template: &ModelPoint,
    axis: &[f64],
    depth: usize,
    precision: Precision,
    tol: f64,
) -> Result<Vec<ParityCrossing>> {
    template.validate()?;
    let plus = template.with_parity(Parity::Plus);
    let minus = template.with_parity(Parity::Minus);
    if depth > minus.dim() {
        return domain(format!("depth {depth} exceeds the negative-parity dimension {}", minus.dim()));
    }
    let scale = (2 * template.j - 1) as f64;
    let diff = |gs: f64| -> Result<Vec<f64>> {
        let g = gs / scale;
        let ep = solve_energies(&plus.with_g(g), precision)?;
        let em = solve_energies(&minus.with_g(g), precision)?;
        Ok((0..depth).map(|k| ep[k] - em[k]).collect())
    };
    let values: Vec<Vec<f64>> = axis.par_iter().map(|&gs| diff(gs)).collect::<Result<_>>()?;
    let mut jobs = Vec::new();
    for k in 0..depth {
        for i in 0..axis.len().saturating_sub(1) {
            let (a, b) = (values[i][k], values[i + 1][k]);
            if a == 0.0 || (a > 0.0) != (b > 0.0) && b != 0.0 {
                jobs.push((k, axis[i], axis[i + 1]));
            }
        }
    }
    let degenerate = 1e-10 * template.epsilon * template.j as f64;
    let out: Vec<Option<ParityCrossing>> = jobs
        .par_iter()
        .map(|&(k, a, b)| {
            let gs = bisect(|x| diff(x).ok().map(|d| d[k]), a, b, tol * scale)?;
            let gap = diff(gs).ok()?[k].abs();
            let near = (template.s() == -1)
                .then(|| nearest_collapse(template.j, minus.pairs().max(plus.pairs()), gs / scale, Side::D))
                .flatten();
            Some(ParityCrossing {
                state: k,
                g: gs / scale,
                gscaled: gs,
                gap,
                degenerate: gap < degenerate,
                predicted_n: near.map(|(n, _)| n),
                predicted_gscaled: near.map(|(_, g)| g * scale),
            })
        })
        .collect();
    let mut out: Vec<ParityCrossing> = out.into_iter().flatten().collect();
    out.sort_by(|a, b| a.gscaled.total_cmp(&b.gscaled).then(a.state.cmp(&b.state)));
    Ok(out)
}

/// A state collapsing at g_D(N) does not take part in the crossing there:
/// every crossing of the k-th states is associated with some N > k.
pub fn crossing_exclusion_holds(crossings: &[ParityCrossing]) -> bool {
    crossings.iter().all(|c| c.predicted_n.is_some_and(|n| n as usize > c.state))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TripleLimit {
    MinusOne,
    PlusOne,
    EMinus,
    EPlus,
    Other,
}

#[derive(Clone, Debug, Serialize)]
pub struct TripleSample {
    pub t: f64,
    pub g: f64,
    pub energy: f64,
    /// Largest real pairon of the ground state.
    pub largest: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TripleScan {
    pub j: u32,
    pub b: f64,
    pub samples: Vec<TripleSample>,
    /// Largest pairon at the t closest to 1 from below / above.
    pub below: Option<(f64, f64, TripleLimit)>,
    pub above: Option<(f64, f64, TripleLimit)>,
}

/// e₋ = (√(j(2j−1)) − 1)/(√(j(2j−1)) + 1); e₊ = 1/e₋.
pub fn triple_point_pairon(j: u32) -> f64 {
    let r = ((j * (2 * j - 1)) as f64).sqrt();
    (r - 1.0) / (r + 1.0)
}

/// Critical b on the lines γy = −γx + b: −2(2j−1)/(2j−2).
pub fn triple_point_b(j: u32) -> Result<f64> {
    if j < 2 {
        return domain("the triple-point line needs j ≥ 2");
    }
    Ok(-2.0 * (2 * j - 1) as f64 / (2 * j - 2) as f64)
}

fn classify_limit(j: u32, x: f64) -> TripleLimit {
    let em = triple_point_pairon(j);
    let cands = [(-1.0, TripleLimit::MinusOne), (1.0, TripleLimit::PlusOne), (em, TripleLimit::EMinus), (1.0 / em, TripleLimit::EPlus)];
    let (v, lab) = cands.iter().copied().min_by(|a, b| (a.0 - x).abs().total_cmp(&(b.0 - x).abs())).unwrap();
    if (v - x).abs() < 1e-2 {
        lab
    } else {
        TripleLimit::Other
    }
}

/// Ground state along γy = −γx + b, parametrized by t with s = −1 and
/// g = b/((2j−1)(t + 1/t)); follows the largest pairon.
pub fn triple_point_scan(j: u32, b: f64, ts: &[f64], opts: &HsOptions) -> Result<TripleScan> {
    if ts.iter().any(|&t| t <= 0.0 || t == 1.0) {
        return domain("t grid must avoid t ≤ 0 and the analytic point t = 1");
    }
    let scale = (2 * j - 1) as f64;
    let samples: Vec<TripleSample> = ts
        .par_iter()
        .map(|&t| {
            let g = b / (scale * (t + 1.0 / t));
            let p = ModelPoint::new(j, Parity::Plus, Family::Hyperbolic, t, g)?;
            let st = solve_all(&p, opts)?;
            let ground = &st[0];
            let largest = ground
                .pairons
                .values
                .iter()
                .filter(|z| z.im.abs() < 1e-8 * z.norm().max(1.0))
                .map(|z| z.re)
                .fold(f64::NEG_INFINITY, f64::max);
            Ok(TripleSample { t, g, energy: ground.energy, largest })
        })
        .collect::<Result<_>>()?;
    let pick = |below: bool| {
        samples
            .iter()
            .filter(|s| (s.t < 1.0) == below)
            .min_by(|a, b| (a.t - 1.0).abs().total_cmp(&(b.t - 1.0).abs()))
            .map(|s| (s.t, s.largest, classify_limit(j, s.largest)))
    };
    Ok(TripleScan { j, b, below: pick(true), above: pick(false), samples })
}

#[derive(Clone, Debug, Serialize)]
pub struct MooreReadReport {
    pub j: u32,
    pub t: f64,
    pub energy_b0: f64,
    pub energy_pairons: f64,
    pub energy_oracle: f64,
    pub multiplicity_at_pc: usize,
    /// |⟨binomial state | oracle ground state⟩|
    pub overlap: f64,
}

/// Normalized amplitudes over n_b = 2k of (a†a†/(t−1) − b†b†/(t+1))^j |0⟩.
pub fn moore_read_amplitudes(j: u32, t: f64) -> Vec<f64> {
    let m = j as usize;
    let mut log_fact = vec![0.0f64; 2 * m + 1];
    for n in 1..=2 * m {
        log_fact[n] = log_fact[n - 1] + (n as f64).ln();
    }
    let (x, y) = (1.0 / (t - 1.0), -1.0 / (t + 1.0));
    let terms: Vec<(f64, f64)> = (0..=m)
        .map(|k| {
            let log_binom = log_fact[m] - log_fact[k] - log_fact[m - k];
            // (a†)^{2n}|0⟩ = √((2n)!) |2n⟩
            let log_mag = log_binom
                + (m - k) as f64 * x.abs().ln()
                + k as f64 * y.abs().ln()
                + 0.5 * (log_fact[2 * (m - k)] + log_fact[2 * k]);
            let sign = x.signum().powi((m - k) as i32) * y.signum().powi(k as i32);
            (sign, log_mag)
        })
        .collect();
    let top = terms.iter().map(|t| t.1).fold(f64::NEG_INFINITY, f64::max);
    let raw: Vec<f64> = terms.iter().map(|&(s, l)| s * (l - top).exp()).collect();
    let norm = raw.iter().map(|a| a * a).sum::<f64>().sqrt();
    raw.into_iter().map(|a| a / norm).collect()
}

/// The g = 1 ground state of the hyperbolic family for 0 < t < 1: every
/// pairon sits on P_C = −1 and the energy vanishes.
pub fn moore_read_check(j: u32, t: f64, opts: &HsOptions) -> Result<MooreReadReport> {
    if !(t > 0.0 && t < 1.0) {
        return domain(format!("Moore–Read check needs 0 < t < 1, got {t}"));
    }
    let p = ModelPoint::new(j, Parity::Plus, Family::Hyperbolic, t, 1.0)?;
    let states = solve_all(&p, opts)?;
    let ground = states.first().ok_or_else(|| Error::Domain("empty sector".into()))?;
    let oracle = ed::spectrum(&p);
    let amps = moore_read_amplitudes(j, t);
    let overlap = amps.iter().enumerate().map(|(k, a)| a * oracle.vectors[(k, 0)]).sum::<f64>().abs();
    Ok(MooreReadReport {
        j,
        t,
        energy_b0: ground.energy,
        energy_pairons: rg_energy(&p, &ground.pairons.values)?,
        energy_oracle: oracle.energies[0],
        multiplicity_at_pc: ground.pairons.multiplicity_at_pc,
        overlap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisection_finds_a_simple_root() {
        let r = bisect(|x| Some(x * x - 2.0), 0.0, 2.0, 1e-14).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn triple_point_constants() {
        assert!((triple_point_pairon(10) - 0.864_719_060_824_442).abs() < 1e-14);
        assert!((triple_point_b(10).unwrap() + 19.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn moore_read_amplitudes_for_one_pair() {
        // j = 1: (a†a†/(t−1) − b†b†/(t+1))|0⟩ = √2 (|2,0⟩/(t−1) − |0,2⟩/(t+1))
        let t = 0.5;
        let a = moore_read_amplitudes(1, t);
        let (x, y) = (1.0 / (t - 1.0), -1.0 / (t + 1.0));
        let n = (x * x + y * y).sqrt();
        assert!((a[0] - x / n).abs() < 1e-15 && (a[1] - y / n).abs() < 1e-15);
    }

    #[test]
    fn moore_read_small_j() {
        let r = moore_read_check(2, 0.5, &HsOptions::default()).unwrap();
        assert!(r.energy_oracle.abs() < 1e-12);
        assert_eq!(r.multiplicity_at_pc, 2);
        assert!(r.overlap > 1.0 - 1e-12);
    }
}
