//! Acceptance criteria, one PASS/FAIL line each. Runs as a plain binary so
//! the lines always reach the test log and timings are not skewed by other
//! tests sharing the machine.

use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex64 as C;
use paironlab::analysis::{
    crossing_exclusion_holds, detect_parity_crossings, moore_read_check, sweep_g, triple_point_b, triple_point_pairon,
    triple_point_scan, EventKind, SweepOptions,
};
use paironlab::hs::{amplitudes_from_pairons, solve_all, HsOptions, Precision};
use paironlab::meanfield::{classify_transition, grid_agreement, linspace, GridOptions, TransitionOrder};
use paironlab::model::{collapse_coupling, diagonal_line_energy};
use paironlab::newton::{continue_to, match_pairons, weak_coupling_seed, ContinuationOptions, SeedPolynomial};
use paironlab::{ed, Family, ModelPoint, Parity, Side};
use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::TestRunner;

struct Line {
    id: u32,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn line(id: u32, name: &'static str, pass: bool, detail: String) -> Line {
    Line { id, name, pass, detail }
}

fn scale(e: &[f64]) -> f64 {
    e.iter().fold(1.0f64, |m, x| m.max(x.abs()))
}

fn oracle_grid() -> Vec<Line> {
    let js = [1, 2, 5, 10, 15, 30];
    let ts = [0.5, 1.0, 2.0];
    let gs: Vec<f64> = (0..10).flat_map(|i| [0.1 + 0.2 * i as f64, -(0.1 + 0.2 * i as f64)]).collect();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let start = Instant::now();
    let (mut energy, mut residual, mut lame, mut flagged, mut failures) = (0.0f64, 0.0f64, 0.0f64, 0, 0);
    pool.install(|| {
        for &j in &js {
            let n = (2 * j - 1) as f64;
            for parity in [Parity::Plus, Parity::Minus] {
                for s in [-1, 0, 1] {
                    for (i, &gs0) in gs.iter().enumerate() {
                        let family = Family::from_s(s).unwrap();
                        let t = ts[i % 3];
                        let mut gsc = gs0;
                        if ModelPoint::scaled(j, parity, family, t, gsc).unwrap().near_collapse(1e-4 / n).is_some() {
                            gsc += 0.01;
                        }
                        let p = ModelPoint::scaled(j, parity, family, t, gsc).unwrap();
                        let Ok(states) = solve_all(&p, &HsOptions::default()) else {
                            failures += 1;
                            continue;
                        };
                        let oracle = ed::spectrum(&p).energies;
                        let sc = scale(&oracle);
                        for (st, o) in states.iter().zip(&oracle) {
                            energy = energy.max((st.energy - o).abs() / sc);
                            residual = residual.max(st.pairons.residual / n);
                            lame = lame.max(st.lame_residual);
                            flagged += st.flagged() as usize;
                        }
                    }
                }
            }
        }
    });
    let elapsed = start.elapsed().as_secs_f64();
    vec![
        line(
            1,
            "oracle equivalence",
            energy < 1e-8 && failures == 0 && elapsed < 60.0,
            format!("max rel err {energy:.2e}, solver errors {failures}, {elapsed:.1} s single-threaded"),
        ),
        line(
            2,
            "Richardson residual",
            residual < 1e-8 && lame < 1e-8 && flagged == 0,
            format!("max residual/(2j-1) {residual:.2e}, Lamé {lame:.2e}, flagged states {flagged}"),
        ),
    ]
}

fn moore_read() -> Line {
    let r = moore_read_check(15, 0.5, &HsOptions::default()).unwrap();
    line(
        3,
        "Moore-Read-like ground state",
        r.energy_b0.abs() < 1e-9 && r.multiplicity_at_pc == 15,
        format!(
            "E = {:.2e} (oracle {:.2e}), multiplicity at P_C {}, overlap with binomial state {:.15}",
            r.energy_b0, r.energy_oracle, r.multiplicity_at_pc, r.overlap
        ),
    )
}

fn collapse_ladder() -> Line {
    let j = 15;
    let n = (2 * j - 1) as f64;
    let p = ModelPoint::new(j, Parity::Plus, Family::Hyperbolic, 0.5, 0.0).unwrap();
    let trace = sweep_g(&p, &[0], &linspace(0.01, 2.0, 200), &SweepOptions::default()).unwrap();
    let mut worst = 0.0f64;
    let mut ok = true;
    let mut pairs = Vec::new();
    for big_n in 1..=8u32 {
        let predicted = collapse_coupling(j, big_n, Side::C).unwrap() * n;
        let hit = trace.events.iter().find(|e| {
            matches!(e.kind, EventKind::Collapse { n: Some(k), side: Side::C, .. } if k == big_n)
        });
        let Some(ev) = hit else {
            ok = false;
            continue;
        };
        worst = worst.max((ev.value - predicted).abs());
        if let EventKind::Collapse { multiplicity, .. } = ev.kind {
            ok &= multiplicity == Some(big_n as usize);
        }
        // between this collapse and the next
        let next = if big_n < 8 { collapse_coupling(j, big_n + 1, Side::C).unwrap() * n } else { predicted + 0.05 };
        let mid = p.with_g(0.5 * (predicted + next) / n);
        let ground = &solve_all(&mid, &HsOptions::default()).unwrap()[0];
        let complex = ground.pairons.values.iter().filter(|z| z.im > 1e-8).count();
        ok &= complex == big_n as usize / 2 && ground.pairons.conjugation_defect() < 1e-8 && !ground.flagged();
        pairs.push(complex);
    }
    let located = trace.events.iter().filter(|e| matches!(e.kind, EventKind::Collapse { .. })).count();
    line(
        4,
        "collapse ladder",
        ok && located == 8 && worst < 1e-6,
        format!("{located} collapses, max |Δ g(2j-1)| {worst:.2e}, complex pairs after each: {pairs:?}"),
    )
}

fn triple_point() -> Line {
    let j = 10;
    let b = triple_point_b(j).unwrap();
    let scan = triple_point_scan(j, b, &[1.0 - 1e-4], &HsOptions::default()).unwrap();
    let (_, largest, _) = scan.below.unwrap();
    let em = triple_point_pairon(j);
    // γx = γy = −19/18 sits on the diagonal line t = 1, g = γ/(2j−1)
    let g = -19.0 / 18.0 / 19.0;
    let e_lo = diagonal_line_energy(j, -10, g, 1.0).unwrap();
    let e_hi = diagonal_line_energy(j, -8, g, 1.0).unwrap();
    let p = ModelPoint::new(j, Parity::Plus, Family::Hyperbolic, 1.0, g).unwrap();
    let oracle = ed::spectrum(&p).energies;
    let d_formula = (e_lo - e_hi).abs();
    let d_oracle = (oracle[0] - oracle[1]).abs();
    let d_cross = (oracle[0] - e_lo).abs();
    line(
        5,
        "triple point",
        (largest - em).abs() < 2e-3 && d_formula < 1e-12 && d_oracle < 1e-12 && d_cross < 1e-12,
        format!(
            "b = {b:.6}, largest pairon {largest:.6} vs e_- {em:.6}; |E_-10 - E_-8| formula {d_formula:.1e}, oracle {d_oracle:.1e}"
        ),
    )
}

fn parity_crossings() -> Line {
    let j = 10;
    let n = (2 * j - 1) as f64;
    let p = ModelPoint::new(j, Parity::Plus, Family::Hyperbolic, 0.5, 0.0).unwrap();
    let axis = linspace(-2.0, 2.0, 400);
    let crossings = detect_parity_crossings(&p, &axis, 5, Precision::DoubleDouble, 1e-10).unwrap();
    let mut found: Vec<(u32, f64)> = Vec::new();
    for c in &crossings {
        let Some(k) = c.predicted_n else { continue };
        let d = (c.gscaled - c.predicted_gscaled.unwrap()).abs();
        match found.iter_mut().find(|f| f.0 == k) {
            Some(f) => f.1 = f.1.max(d),
            None => found.push((k, d)),
        }
    }
    found.sort_by_key(|f| f.0);
    let expected: Vec<u32> = (1..=5).collect();
    let ns: Vec<u32> = found.iter().map(|f| f.0).collect();
    let worst = found.iter().map(|f| f.1).fold(0.0, f64::max);
    let predicted_ok = (1..=5).all(|k| {
        let g = collapse_coupling(j, k, Side::D).unwrap() * n;
        (g + 19.0 / (21.0 - 2.0 * k as f64)).abs() < 1e-14
    });
    line(
        6,
        "parity crossings",
        ns == expected && worst < 1e-3 && crossing_exclusion_holds(&crossings) && predicted_ok,
        format!(
            "{} crossing locations at N = {ns:?} ({} state crossings), max |Δ g(2j-1)| {worst:.1e}, exclusion {}",
            found.len(),
            crossings.len(),
            crossing_exclusion_holds(&crossings)
        ),
    )
}

fn mean_field() -> Line {
    let start = Instant::now();
    let agreement = grid_agreement(-3.0, 1.0, 201, &GridOptions::default());
    let second = classify_transition(|u| (-1.0 + u, 1.0 - u), -0.5, 0.5, 101, 1e-3);
    let first = classify_transition(|u| (-2.0 + u, -2.0 - u), -0.5, 0.5, 101, 1e-3);
    let third = classify_transition(|u| (-1.0 + u, -1.0 - u), -0.5, 0.5, 101, 1e-3);
    let elapsed = start.elapsed().as_secs_f64();
    line(
        7,
        "mean-field phase diagram",
        agreement < 1e-6
            && second.order == Some(TransitionOrder::Second)
            && first.order == Some(TransitionOrder::First)
            && third.order == Some(TransitionOrder::Third)
            && elapsed < 30.0,
        format!(
            "grid max |Δ| {agreement:.1e}; γx=-1: {}; γy=γx: {}; γy=-γx-2: {}; {elapsed:.1} s",
            second.describe(),
            first.describe(),
            third.describe()
        ),
    )
}

fn symmetry_suite() -> Line {
    let mut runner = TestRunner::deterministic();
    let strategy = (1u32..=10, proptest::bool::ANY, proptest::bool::ANY, 0.25f64..4.0, -2.0f64..2.0);
    let opts = HsOptions::default();
    let (mut mirror, mut negate, mut pairons, mut tested) = (0.0f64, 0.0f64, 0.0f64, 0);
    while tested < 200 {
        let (j, plus, hyper, t, gsc) = strategy.new_tree(&mut runner).unwrap().current();
        let parity = if plus { Parity::Plus } else { Parity::Minus };
        let family = if hyper { Family::Hyperbolic } else { Family::Trigonometric };
        let p = ModelPoint::scaled(j, parity, family, t, gsc).unwrap();
        if p.near_collapse(1e-3 / (2 * j - 1) as f64).is_some() || gsc.abs() < 1e-3 {
            continue;
        }
        tested += 1;
        let q = p.mirror().unwrap();
        let a = solve_all(&p, &opts).unwrap();
        let b = solve_all(&q, &opts).unwrap();
        let c = solve_all(&p.negate(), &opts).unwrap();
        let ea: Vec<f64> = a.iter().map(|s| s.energy).collect();
        let sc = scale(&ea);
        for k in 0..a.len() {
            mirror = mirror.max((a[k].energy - b[k].energy).abs() / sc);
            negate = negate.max((a[k].energy + c[a.len() - 1 - k].energy).abs() / sc);
            let isolated = (k == 0 || ea[k] - ea[k - 1] > 1e-8 * sc) && (k + 1 == ea.len() || ea[k + 1] - ea[k] > 1e-8 * sc);
            if isolated {
                let inv: Vec<C> = a[k].pairons.values.iter().map(|z| 1.0 / z).collect();
                let m = match_pairons(&b[k].pairons.values, &inv);
                for (x, y) in b[k].pairons.values.iter().zip(&m) {
                    pairons = pairons.max((x - y).norm() / x.norm().max(1.0));
                }
            }
        }
    }
    line(
        8,
        "symmetry suites",
        mirror < 1e-10 && negate < 1e-10 && pairons < 1e-8,
        format!("{tested} points: mirror {mirror:.1e}, negate {negate:.1e}, pairons e -> 1/e {pairons:.1e}"),
    )
}

fn wavefunctions() -> Line {
    let j = 10;
    let mut worst = 0.0f64;
    let mut count = 0;
    for parity in [Parity::Plus, Parity::Minus] {
        for s in [-1, 0, 1] {
            for (t, gsc) in [(0.5, 1.3), (2.0, -0.8)] {
                let p = ModelPoint::scaled(j, parity, Family::from_s(s).unwrap(), t, gsc).unwrap();
                let states = solve_all(&p, &HsOptions::default()).unwrap();
                let oracle = ed::spectrum(&p);
                for (k, st) in states.iter().enumerate() {
                    let amp = amplitudes_from_pairons(&p, &st.pairons.values).unwrap();
                    let overlap: f64 = amp.iter().enumerate().map(|(i, a)| a * oracle.vectors[(i, k)]).sum();
                    worst = worst.max(1.0 - overlap.abs());
                    count += 1;
                }
            }
        }
    }
    line(9, "wavefunction fidelity", worst < 1e-8, format!("{count} states over 12 points, max 1 - |overlap| {worst:.1e}"))
}

/// Largest seed error over every state of the sector at the given coupling.
fn seed_error(p: &ModelPoint, family: SeedPolynomial) -> f64 {
    let opts = ContinuationOptions { start_scaled: p.gscaled().abs(), ..ContinuationOptions::default() };
    (0..p.dim())
        .map(|k| {
            let exact = continue_to(p, k, &opts).unwrap().pairons.values;
            let seed = weak_coupling_seed(p, k, family).unwrap().values;
            let seed = match_pairons(&exact, &seed);
            exact.iter().zip(&seed).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

fn weak_coupling() -> Line {
    let mut ratios = Vec::new();
    let mut legendre = Vec::new();
    for s in [-1, 0, 1] {
        for parity in [Parity::Plus, Parity::Minus] {
            for sign in [1.0, -1.0] {
                let p = |g: f64| ModelPoint::scaled(10, parity, Family::from_s(s).unwrap(), 0.5, sign * g).unwrap();
                let (big, small) = (p(1e-3), p(5e-4));
                ratios.push(seed_error(&big, SeedPolynomial::Laguerre) / seed_error(&small, SeedPolynomial::Laguerre));
                legendre.push(seed_error(&big, SeedPolynomial::Legendre) / seed_error(&small, SeedPolynomial::Legendre));
            }
        }
    }
    let range = |v: &[f64]| (v.iter().copied().fold(f64::INFINITY, f64::min), v.iter().copied().fold(0.0, f64::max));
    let (lo, hi) = range(&ratios);
    let (llo, lhi) = range(&legendre);
    line(
        10,
        "weak-coupling scaling",
        lo >= 3.5 && hi <= 4.5,
        format!("Laguerre error ratio in [{lo:.3}, {hi:.3}]; Legendre ratio in [{llo:.3}, {lhi:.3}] (first order, rejected)"),
    )
}

fn main() -> ExitCode {
    let mut lines = oracle_grid();
    lines.push(moore_read());
    lines.push(collapse_ladder());
    lines.push(triple_point());
    lines.push(parity_crossings());
    lines.push(mean_field());
    lines.push(symmetry_suite());
    lines.push(wavefunctions());
    lines.push(weak_coupling());
    lines.sort_by_key(|l| l.id);
    for l in &lines {
        println!("{} criterion {:>2} {}: {}", if l.pass { "PASS" } else { "FAIL" }, l.id, l.name, l.detail);
    }
    if lines.iter().all(|l| l.pass) {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
