//! Named spectrum solvers behind one trait, and the registry that picks
//! them by name.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::ed;
use crate::error::{Error, Result};
use crate::hs::{rg_energy, solve_all, HsOptions, PaironMethod, PaironSet, Precision};
use crate::model::ModelPoint;
use crate::newton::{continue_to, ContinuationOptions};

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumRow {
    /// Rank in ascending energy within the sector.
    pub index: usize,
    pub energy: f64,
    /// Regularized Richardson residual; absent for the oracle.
    pub residual: Option<f64>,
    pub pairons: Option<PaironSet>,
    pub method: Option<PaironMethod>,
    pub flag: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumTable {
    pub point: ModelPoint,
    pub solver: String,
    pub precision: Precision,
    pub rows: Vec<SpectrumRow>,
}

impl SpectrumTable {
    pub fn energies(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.energy).collect()
    }

    pub fn flagged(&self) -> usize {
        self.rows.iter().filter(|r| r.flag.is_some()).count()
    }
}

pub trait SpectrumSolver: Send + Sync {
    fn name(&self) -> &'static str;
    fn solve(&self, point: &ModelPoint, precision: Precision) -> Result<SpectrumTable>;
}

/// Heine–Stieltjes eigenproblem with root extraction.
pub struct HsSolver;

/// Weak-coupling seeds followed by Newton continuation in g.
pub struct NewtonSolver {
    pub options: ContinuationOptions,
}

/// Exact diagonalization of the sector matrix.
pub struct EdSolver;

fn hs_rows(point: &ModelPoint, precision: Precision) -> Result<Vec<SpectrumRow>> {
    Ok(solve_all(point, &HsOptions::with_precision(precision))?
        .into_iter()
        .map(|s| SpectrumRow {
            index: s.index,
            energy: s.energy,
            residual: Some(s.pairons.residual),
            pairons: Some(s.pairons),
            method: Some(s.method),
            flag: s.flag,
        })
        .collect())
}

impl SpectrumSolver for HsSolver {
    fn name(&self) -> &'static str {
        "hs"
    }

    fn solve(&self, point: &ModelPoint, precision: Precision) -> Result<SpectrumTable> {
        Ok(SpectrumTable { point: *point, solver: self.name().into(), precision, rows: hs_rows(point, precision)? })
    }
}

impl SpectrumSolver for NewtonSolver {
    fn name(&self) -> &'static str {
        "newton"
    }

    /// Continuation works in double precision only; `precision` applies to
    /// the analytic points, which are delegated to the hs solver.
    fn solve(&self, point: &ModelPoint, precision: Precision) -> Result<SpectrumTable> {
        point.validate()?;
        if point.g == 0.0 || point.is_diagonal_line() {
            let rows = hs_rows(point, precision)?;
            return Ok(SpectrumTable { point: *point, solver: self.name().into(), precision, rows });
        }
        let mut rows: Vec<SpectrumRow> = (0..point.dim())
            .map(|k| match continue_to(point, k, &self.options) {
                Ok(run) => {
                    let energy = rg_energy(point, &run.pairons.values).unwrap_or(f64::NAN);
                    SpectrumRow {
                        index: k,
                        energy,
                        residual: Some(run.pairons.residual),
                        flag: (!energy.is_finite()).then(|| "pairon energy is singular".to_string()),
                        pairons: Some(run.pairons),
                        method: Some(PaironMethod::Continuation),
                    }
                }
                Err(e) => SpectrumRow {
                    index: k,
                    energy: f64::NAN,
                    residual: None,
                    pairons: None,
                    method: None,
                    flag: Some(e.to_string()),
                },
            })
            .collect();
        rows.sort_by(|a, b| a.energy.total_cmp(&b.energy));
        for (i, r) in rows.iter_mut().enumerate() {
            r.index = i;
        }
        Ok(SpectrumTable { point: *point, solver: self.name().into(), precision, rows })
    }
}

impl SpectrumSolver for EdSolver {
    fn name(&self) -> &'static str {
        "ed"
    }

    fn solve(&self, point: &ModelPoint, precision: Precision) -> Result<SpectrumTable> {
        point.validate()?;
        let rows = ed::spectrum(point)
            .energies
            .iter()
            .enumerate()
            .map(|(index, &energy)| SpectrumRow { index, energy, residual: None, pairons: None, method: None, flag: None })
            .collect();
        Ok(SpectrumTable { point: *point, solver: self.name().into(), precision, rows })
    }
}

pub struct SolverRegistry {
    solvers: BTreeMap<&'static str, Box<dyn SpectrumSolver>>,
}

impl Default for SolverRegistry {
    fn default() -> Self {
        let mut r = SolverRegistry::empty();
        r.register(Box::new(HsSolver));
        r.register(Box::new(NewtonSolver { options: ContinuationOptions::default() }));
        r.register(Box::new(EdSolver));
        r
    }
}

impl SolverRegistry {
    pub fn empty() -> Self {
        SolverRegistry { solvers: BTreeMap::new() }
    }

    /// Replaces any solver already registered under the same name.
    pub fn register(&mut self, solver: Box<dyn SpectrumSolver>) {
        self.solvers.insert(solver.name(), solver);
    }

    pub fn get(&self, name: &str) -> Result<&dyn SpectrumSolver> {
        self.solvers
            .get(name)
            .map(|b| b.as_ref())
            .ok_or_else(|| Error::Unknown { kind: "solver", name: name.to_string() })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.solvers.keys().copied().collect()
    }
}
