use anyhow::{bail, Context, Result};
use clap::{ArgGroup, Args, Parser, Subcommand};
use paironlab::hs::Precision;
use paironlab::meanfield::linspace;
use paironlab::{Family, ModelPoint, Parity};
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(name = "paironlab", version, about = "Exact pairon spectra of the LMG model")]
pub struct Cli {
    /// Working precision: double or dd.
    #[arg(long, global = true, env = "PAIRONLAB_PRECISION", default_value = "dd")]
    pub precision: String,
    /// Worker threads for grid computations (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Full spectrum and pairons at one point.
    Solve(SolveArgs),
    /// Pairon and energy traces along g(2j−1), with collapse events.
    Sweep(SweepArgs),
    /// Mean-field phase labels on a (γx, γy) grid.
    Phase(PhaseArgs),
    /// Parity crossings of the lowest states along g(2j−1).
    Crossings(CrossingArgs),
    /// Compare the pairon solver with exact diagonalization over a grid.
    Validate(ValidateArgs),
}

#[derive(Args, Debug, Clone)]
pub struct Sector {
    #[arg(long)]
    pub j: u32,
    /// + or -
    #[arg(long, default_value = "+", allow_hyphen_values = true)]
    pub parity: String,
    #[arg(long, default_value_t = 1.0)]
    pub epsilon: f64,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("rg").multiple(true).args(["s", "t", "g", "gscaled"])))]
#[command(group(ArgGroup::new("lmg").multiple(true).args(["gamma", "lambda"]).conflicts_with_all(["rg", "axes"])))]
#[command(group(ArgGroup::new("axes").multiple(true).args(["gamma_x", "gamma_y"]).conflicts_with("rg")))]
pub struct PointArgs {
    #[command(flatten)]
    pub sector: Sector,
    /// RG family: -1, 0 or 1.
    #[arg(long, allow_negative_numbers = true)]
    pub s: Option<i32>,
    #[arg(long, allow_negative_numbers = true)]
    pub t: Option<f64>,
    #[arg(long, conflicts_with = "gscaled", allow_negative_numbers = true)]
    pub g: Option<f64>,
    /// g(2j−1)
    #[arg(long, allow_negative_numbers = true)]
    pub gscaled: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub gamma_x: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub gamma_y: Option<f64>,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[command(flatten)]
    pub point: PointArgs,
    /// Registered solver: hs, newton or ed.
    #[arg(long, default_value = "hs")]
    pub solver: String,
    /// Also diagonalize exactly and report the largest energy difference.
    #[arg(long)]
    pub validate: bool,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    pub sector: Sector,
    #[arg(long, default_value_t = -1, allow_negative_numbers = true)]
    pub s: i32,
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub t: f64,
    /// Grid a:b:n in g(2j−1).
    #[arg(long, allow_hyphen_values = true)]
    pub gscaled: String,
    /// Extra log-spaced points between 1e-4 and the grid values closest
    /// to zero, per side.
    #[arg(long, default_value_t = 0)]
    pub log_points: usize,
    /// Comma-separated energy ranks; all states when omitted.
    #[arg(long, value_delimiter = ',')]
    pub states: Vec<usize>,
}

#[derive(Args, Debug)]
pub struct PhaseArgs {
    /// Grid lo:hi:n on both axes.
    #[arg(long, allow_hyphen_values = true, default_value = "-3:1:201")]
    pub grid: String,
    /// Minimize the finite-j surface numerically instead of the closed form.
    #[arg(long)]
    pub finite_j: Option<u32>,
}

#[derive(Args, Debug)]
pub struct CrossingArgs {
    #[arg(long)]
    pub j: u32,
    #[arg(long, default_value_t = -1, allow_negative_numbers = true)]
    pub s: i32,
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub t: f64,
    #[arg(long, default_value_t = 1)]
    pub depth: usize,
    #[arg(long, allow_hyphen_values = true, default_value = "-2:2:400")]
    pub gscaled: String,
    /// Bisection width in g.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    /// Comma-separated j values.
    #[arg(long, value_delimiter = ',', default_value = "1,2,5,10")]
    pub j: Vec<u32>,
    #[arg(long, allow_hyphen_values = true, default_value = "-2:2:21")]
    pub gscaled: String,
    #[arg(long, value_delimiter = ',', default_value = "0.5,1,2")]
    pub t: Vec<f64>,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
}

pub fn precision(name: &str) -> Result<Precision> {
    Ok(Precision::parse(name)?)
}

pub fn parity(s: &str) -> Result<Parity> {
    Ok(Parity::parse(s)?)
}

/// `a:b:n` → n evenly spaced values from a to b inclusive.
pub fn grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        bail!("grid spec must look like a:b:n, got `{spec}`");
    }
    let a: f64 = parts[0].parse().with_context(|| format!("bad grid start `{}`", parts[0]))?;
    let b: f64 = parts[1].parse().with_context(|| format!("bad grid end `{}`", parts[1]))?;
    let n: usize = parts[2].parse().with_context(|| format!("bad grid count `{}`", parts[2]))?;
    if n == 0 || !a.is_finite() || !b.is_finite() {
        bail!("grid spec `{spec}` is empty or not finite");
    }
    Ok(linspace(a, b, n))
}

impl PointArgs {
    pub fn point(&self) -> Result<ModelPoint> {
        let Sector { j, ref parity, epsilon } = self.sector;
        let parity = self::parity(parity)?;
        if !(epsilon > 0.0) {
            bail!("--epsilon must be positive");
        }
        if self.gamma.is_some() || self.lambda.is_some() {
            let gamma = self.gamma.unwrap_or(0.0);
            let lambda = self.lambda.unwrap_or(0.0);
            return Ok(ModelPoint::from_lambda_gamma(j, parity, lambda, gamma, epsilon)?);
        }
        if self.gamma_x.is_some() || self.gamma_y.is_some() {
            let mut p = ModelPoint::from_gamma(j, parity, self.gamma_x.unwrap_or(0.0), self.gamma_y.unwrap_or(0.0))?;
            p.epsilon = epsilon;
            return Ok(p);
        }
        let family = Family::from_s(self.s.unwrap_or(-1))?;
        let t = self.t.unwrap_or(1.0);
        let mut p = match (self.g, self.gscaled) {
            (Some(g), None) => ModelPoint::new(j, parity, family, t, g)?,
            (None, Some(gs)) => ModelPoint::scaled(j, parity, family, t, gs)?,
            _ => bail!("give the coupling with --g or --gscaled"),
        };
        p.epsilon = epsilon;
        p.validate()?;
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_specs() {
        assert_eq!(grid("-1:1:3").unwrap(), vec![-1.0, 0.0, 1.0]);
        assert!(grid("0:1").is_err());
        assert!(grid("0:1:x").is_err());
        assert!(grid("0:1:0").is_err());
    }
}
