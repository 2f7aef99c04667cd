use anyhow::{bail, Result};
use paironlab::analysis::{crossing_exclusion_holds, detect_parity_crossings, sweep_g, EventKind, SweepOptions};
use paironlab::hs::{solve_all, HsOptions, Precision};
use paironlab::meanfield::{minimize, minimize_numeric, GridOptions, PhasePoint, Surface};
use paironlab::solver::SolverRegistry;
use paironlab::{ed, Family, ModelPoint, Parity};
use rayon::prelude::*;
use std::path::Path;

use crate::args::{self, CrossingArgs, PhaseArgs, SolveArgs, SweepArgs, ValidateArgs};
use crate::output::{json, num, opt, Table};

/// Result of a command that ran to completion; `flagged` selects exit code 2.
pub struct Outcome {
    pub flagged: bool,
}

pub fn solve(a: &SolveArgs, precision: Precision, out: &Path) -> Result<Outcome> {
    let point = a.point.point()?;
    let registry = SolverRegistry::default();
    let table = registry.get(&a.solver)?.solve(&point, precision)?;
    let mut spectrum = Table::create(out, "spectrum.csv", &["index", "parity", "energy", "residual"])?;
    let mut pairons = Table::create(out, "pairons.csv", &["state_index", "alpha", "re", "im", "at_pc", "at_pd"])?;
    for row in &table.rows {
        spectrum.row([row.index.to_string(), point.parity.symbol().into(), num(row.energy), opt(row.residual)])?;
        if let Some(set) = &row.pairons {
            let free = set.free().len();
            for (alpha, z) in set.values.iter().enumerate() {
                let at_pc = alpha >= free && alpha < free + set.multiplicity_at_pc;
                let at_pd = alpha >= free + set.multiplicity_at_pc;
                pairons.row([
                    row.index.to_string(),
                    alpha.to_string(),
                    num(z.re),
                    num(z.im),
                    (at_pc as u8).to_string(),
                    (at_pd as u8).to_string(),
                ])?;
            }
        }
    }
    spectrum.finish()?;
    pairons.finish()?;
    for row in table.rows.iter().filter(|r| r.flag.is_some()) {
        eprintln!("state {}: {}", row.index, row.flag.as_deref().unwrap_or_default());
    }
    let mut flagged = table.flagged() > 0;
    if a.validate {
        let oracle = ed::spectrum(&point).energies;
        let worst = table.energies().iter().zip(&oracle).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        println!("max |E_RG - E_ED| = {}", num(worst));
        flagged |= !(worst < a.tol);
    }
    println!("{} states written to {}", table.rows.len(), out.display());
    Ok(Outcome { flagged })
}

/// Inserts `n` log-spaced values between 1e-4 and the smallest positive
/// (and largest negative) grid value.
fn refine_near_zero(axis: &mut Vec<f64>, n: usize) {
    if n == 0 {
        return;
    }
    let pos = axis.iter().copied().filter(|&x| x > 0.0).fold(f64::INFINITY, f64::min);
    let neg = axis.iter().copied().filter(|&x| x < 0.0).fold(f64::NEG_INFINITY, f64::max);
    for (edge, sign) in [(pos, 1.0), (-neg, -1.0)] {
        if edge.is_finite() && edge > 1e-4 {
            let (lo, hi) = (1e-4f64.ln(), edge.ln());
            for i in 0..n {
                axis.push(sign * (lo + (hi - lo) * i as f64 / n as f64).exp());
            }
        }
    }
    axis.sort_by(f64::total_cmp);
    axis.dedup();
}

fn event_fields(kind: &EventKind) -> [String; 5] {
    match kind {
        EventKind::Collapse { state, side, n, multiplicity } => [
            "collapse".into(),
            state.to_string(),
            format!("{side:?}"),
            n.map(|v| v.to_string()).unwrap_or_default(),
            multiplicity.map(|v| v.to_string()).unwrap_or_default(),
        ],
        EventKind::ParityCrossing { state, n } => [
            "parity-crossing".into(),
            state.to_string(),
            String::new(),
            n.map(|v| v.to_string()).unwrap_or_default(),
            String::new(),
        ],
        EventKind::SectorDegeneracy { lower, upper } => {
            ["sector-degeneracy".into(), format!("{lower}-{upper}"), String::new(), String::new(), String::new()]
        }
    }
}

pub fn sweep(a: &SweepArgs, precision: Precision, out: &Path) -> Result<Outcome> {
    let parity = args::parity(&a.sector.parity)?;
    let mut template = ModelPoint::new(a.sector.j, parity, Family::from_s(a.s)?, a.t, 0.0)?;
    template.epsilon = a.sector.epsilon;
    let mut axis = args::grid(&a.gscaled)?;
    refine_near_zero(&mut axis, a.log_points);
    let states: Vec<usize> = if a.states.is_empty() { (0..template.dim()).collect() } else { a.states.clone() };
    let opts = SweepOptions { hs: HsOptions::with_precision(precision), ..SweepOptions::default() };
    let trace = sweep_g(&template, &states, &axis, &opts)?;

    let mut t = Table::create(out, "sweep.csv", &["axis_value", "state_index", "series_name", "value"])?;
    for (i, &x) in trace.axis.iter().enumerate() {
        for s in &trace.series {
            let (k, xs) = (s.state_index.to_string(), num(x));
            t.row([xs.as_str(), &k, "energy", &num(s.energies[i])])?;
            t.row([xs.as_str(), &k, "residual", &num(s.residuals[i])])?;
            t.row([xs.as_str(), &k, "multiplicity_pc", &s.multiplicities[i].0.to_string()])?;
            t.row([xs.as_str(), &k, "multiplicity_pd", &s.multiplicities[i].1.to_string()])?;
            for (alpha, z) in s.pairons[i].iter().enumerate() {
                t.row([xs.as_str(), &k, &format!("pairon_re_{alpha}"), &num(z.re)])?;
                t.row([xs.as_str(), &k, &format!("pairon_im_{alpha}"), &num(z.im)])?;
            }
        }
    }
    t.finish()?;
    write_events(out, &trace.events)?;
    let flagged: usize = trace.series.iter().map(|s| s.flagged.len()).sum();
    println!("{} axis points, {} states, {} events, {flagged} flagged", axis.len(), states.len(), trace.events.len());
    Ok(Outcome { flagged: flagged > 0 })
}

fn write_events(out: &Path, events: &[paironlab::analysis::SweepEvent]) -> Result<()> {
    let mut e = Table::create(out, "events.csv", &["value", "predicted", "kind", "state", "side", "n", "multiplicity"])?;
    for ev in events {
        let [kind, state, side, n, mult] = event_fields(&ev.kind);
        e.row([num(ev.value), opt(ev.predicted), kind, state, side, n, mult])?;
    }
    e.finish()?;
    json(out, "events.json", &events)
}

pub fn phase(a: &PhaseArgs, out: &Path) -> Result<Outcome> {
    let axis = args::grid(&a.grid)?;
    let nodes: Vec<(f64, f64)> = axis.iter().flat_map(|&gy| axis.iter().map(move |&gx| (gx, gy))).collect();
    let points: Vec<PhasePoint> = match a.finite_j {
        None => nodes.iter().map(|&(gx, gy)| minimize(gx, gy)).collect(),
        Some(j) => {
            let opts = GridOptions { surface: Surface::FiniteJ(j), ..GridOptions::default() };
            nodes.par_iter().map(|&(gx, gy)| minimize_numeric(gx, gy, &opts)).collect::<paironlab::Result<_>>()?
        }
    };
    let mut t = Table::create(out, "phase_grid.csv", &["gx", "gy", "phase", "energy", "sx2", "sy2"])?;
    for p in &points {
        t.row([num(p.gx), num(p.gy), p.phase.label().into(), num(p.energy_min), num(p.sx2), num(p.sy2)])?;
    }
    t.finish()?;
    println!("{} grid nodes written", points.len());
    Ok(Outcome { flagged: false })
}

pub fn crossings(a: &CrossingArgs, precision: Precision, out: &Path) -> Result<Outcome> {
    let template = ModelPoint::new(a.j, Parity::Plus, Family::from_s(a.s)?, a.t, 0.0)?;
    let axis = args::grid(&a.gscaled)?;
    let found = detect_parity_crossings(&template, &axis, a.depth, precision, a.tol)?;
    let mut t = Table::create(
        out,
        "events.csv",
        &["state", "g", "gscaled", "gap", "degenerate", "predicted_n", "predicted_gscaled"],
    )?;
    for c in &found {
        t.row([
            c.state.to_string(),
            num(c.g),
            num(c.gscaled),
            num(c.gap),
            (c.degenerate as u8).to_string(),
            c.predicted_n.map(|n| n.to_string()).unwrap_or_default(),
            opt(c.predicted_gscaled),
        ])?;
    }
    t.finish()?;
    json(out, "events.json", &found)?;
    let holds = crossing_exclusion_holds(&found);
    let mut locations: Vec<u32> = found.iter().filter_map(|c| c.predicted_n).collect();
    locations.dedup();
    println!("{} state crossings at N = {locations:?}; exclusion {}", found.len(), if holds { "holds" } else { "violated" });
    Ok(Outcome { flagged: a.s == -1 && !holds })
}

pub fn validate(a: &ValidateArgs, precision: Precision, out: &Path) -> Result<Outcome> {
    let axis = args::grid(&a.gscaled)?;
    if !(a.tol > 0.0) {
        bail!("--tol must be positive");
    }
    let mut jobs = Vec::new();
    for &j in &a.j {
        for parity in [Parity::Plus, Parity::Minus] {
            for s in [-1, 0, 1] {
                for &t in &a.t {
                    for &gs in &axis {
                        jobs.push(ModelPoint::scaled(j, parity, Family::from_s(s)?, t, gs)?);
                    }
                }
            }
        }
    }
    let opts = HsOptions::with_precision(precision);
    let rows: Vec<(ModelPoint, f64, f64, usize)> = jobs
        .par_iter()
        .map(|p| {
            let oracle = ed::spectrum(p).energies;
            let sc = oracle.iter().fold(1.0f64, |m, x| m.max(x.abs()));
            match solve_all(p, &opts) {
                Ok(st) => {
                    let err = st.iter().zip(&oracle).map(|(a, b)| (a.energy - b).abs() / sc).fold(0.0, f64::max);
                    let res = st.iter().map(|s| s.pairons.residual).fold(0.0, f64::max) / (2 * p.j - 1) as f64;
                    (*p, err, res, st.iter().filter(|s| s.flagged()).count())
                }
                Err(_) => (*p, f64::INFINITY, f64::INFINITY, p.dim()),
            }
        })
        .collect();
    let mut t = Table::create(
        out,
        "validation.csv",
        &["j", "parity", "s", "t", "gscaled", "max_rel_energy_error", "max_scaled_residual", "flagged"],
    )?;
    let mut bad = 0;
    for (p, err, res, flagged) in &rows {
        bad += (!(*err < a.tol) || !(*res < a.tol) || *flagged > 0) as usize;
        t.row([
            p.j.to_string(),
            p.parity.symbol().into(),
            p.s().to_string(),
            num(p.t),
            num(p.gscaled()),
            num(*err),
            num(*res),
            flagged.to_string(),
        ])?;
    }
    t.finish()?;
    println!("{} points, {bad} outside tolerance {}", rows.len(), num(a.tol));
    Ok(Outcome { flagged: bad > 0 })
}
