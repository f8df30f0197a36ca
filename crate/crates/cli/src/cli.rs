use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "mtlab", version, about = "Radial Monge-Ampere laboratory on the unit ball")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Emit a family member as a profile table.
    Family(Params),
    /// Moser-Trudinger sides and the functional G.
    Mt(Params),
    /// Brezis-Merle quantities.
    Bm(Params),
    /// Functional values over a family and a list of exponents.
    Sweep(Params),
    /// Conjugate of the power function (n+1)^-(n+1) t^(n+1).
    Legendre(Params),
    /// Laplace transform E(t) directly and through V(s).
    Laplace(Params),
    /// Free energy, Gibbs measure and duality gap.
    Thermo(Params),
    /// Mean-field equation.
    Mfe {
        #[command(subcommand)]
        action: MfeAction,
    },
    /// Dimensional constants and the product counterexample.
    Constants(Params),
    /// Run the reproduction suite.
    Reproduce(Params),
}

#[derive(Subcommand, Debug)]
pub enum MfeAction {
    /// Solve for one mass.
    Solve(Params),
    /// Warm-started continuation along --path.
    Continue(Params),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Family(_) => "family",
            Command::Mt(_) => "mt",
            Command::Bm(_) => "bm",
            Command::Sweep(_) => "sweep",
            Command::Legendre(_) => "legendre",
            Command::Laplace(_) => "laplace",
            Command::Thermo(_) => "thermo",
            Command::Mfe { .. } => "mfe",
            Command::Constants(_) => "constants",
            Command::Reproduce(_) => "reproduce",
        }
    }

    pub fn params_mut(&mut self) -> &mut Params {
        match self {
            Command::Family(p)
            | Command::Mt(p)
            | Command::Bm(p)
            | Command::Sweep(p)
            | Command::Legendre(p)
            | Command::Laplace(p)
            | Command::Thermo(p)
            | Command::Constants(p)
            | Command::Reproduce(p) => p,
            Command::Mfe { action } => match action {
                MfeAction::Solve(p) | MfeAction::Continue(p) => p,
            },
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Table,
}

#[derive(Args, Debug, Default, Clone, PartialEq, Serialize)]
pub struct Params {
    /// Complex dimension.
    #[arg(long)]
    pub n: Option<usize>,
    /// fs, fs-scaled or cone.
    #[arg(long)]
    pub family: Option<String>,
    /// Fubini-Study parameters (comma separated).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub eps: Option<Vec<f64>>,
    /// Cone slopes (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub slope: Option<Vec<f64>>,
    /// Exponents gamma, or Laplace variables t for `laplace`.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub gamma: Option<Vec<f64>>,
    /// Mass parameter of the mean-field equation.
    #[arg(long, allow_negative_numbers = true)]
    pub a: Option<f64>,
    /// Quasi-sharp deltas for `mt`.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub delta: Option<Vec<f64>>,
    /// Left end of the t grid.
    #[arg(long, allow_negative_numbers = true)]
    pub tmin: Option<f64>,
    /// Approximate number of cells on [tmin, 0].
    #[arg(long)]
    pub grid_points: Option<usize>,
    /// Solver tolerance on the residual.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Continuation path of masses.
    #[arg(long, value_delimiter = ',')]
    pub path: Option<Vec<f64>>,
    /// Largest n for `constants`.
    #[arg(long)]
    pub n_max: Option<u32>,
    /// Read --gamma as the exponent of e^{-gamma u} (mass gamma^n).
    #[arg(long)]
    pub gamma_form: bool,
    /// auto, fixed-point or shooting.
    #[arg(long)]
    pub method: Option<String>,
    /// Criteria to run for `reproduce` (default all).
    #[arg(long, value_delimiter = ',')]
    pub only: Option<Vec<usize>>,
    /// Profile table to use instead of a family.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Config file with defaults.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

fn list(v: &str) -> Result<Vec<f64>, String> {
    v.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| format!("`{x}`: {e}")))
        .collect()
}

fn one<T: std::str::FromStr>(v: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    v.trim().parse::<T>().map_err(|e| format!("`{v}`: {e}"))
}

impl Params {
    pub const KEYS: [&'static str; 18] = [
        "n",
        "family",
        "eps",
        "slope",
        "gamma",
        "a",
        "delta",
        "tmin",
        "grid-points",
        "tol",
        "path",
        "n-max",
        "gamma-form",
        "method",
        "only",
        "input",
        "out",
        "format",
    ];

    /// Sets `key` from its config-file text unless the flag was given.
    pub fn set_default(&mut self, key: &str, v: &str) -> Result<(), String> {
        let ctx = |e: String| format!("config key `{key}`: {e}");
        match key {
            "n" if self.n.is_none() => self.n = Some(one(v).map_err(ctx)?),
            "family" if self.family.is_none() => self.family = Some(v.to_string()),
            "eps" if self.eps.is_none() => self.eps = Some(list(v).map_err(ctx)?),
            "slope" if self.slope.is_none() => self.slope = Some(list(v).map_err(ctx)?),
            "gamma" if self.gamma.is_none() => self.gamma = Some(list(v).map_err(ctx)?),
            "a" if self.a.is_none() => self.a = Some(one(v).map_err(ctx)?),
            "delta" if self.delta.is_none() => self.delta = Some(list(v).map_err(ctx)?),
            "tmin" if self.tmin.is_none() => self.tmin = Some(one(v).map_err(ctx)?),
            "grid-points" if self.grid_points.is_none() => self.grid_points = Some(one(v).map_err(ctx)?),
            "tol" if self.tol.is_none() => self.tol = Some(one(v).map_err(ctx)?),
            "path" if self.path.is_none() => self.path = Some(list(v).map_err(ctx)?),
            "n-max" if self.n_max.is_none() => self.n_max = Some(one(v).map_err(ctx)?),
            "gamma-form" if !self.gamma_form => self.gamma_form = one(v).map_err(ctx)?,
            "method" if self.method.is_none() => self.method = Some(v.to_string()),
            "only" if self.only.is_none() => {
                self.only = Some(
                    v.split(',')
                        .map(one::<usize>)
                        .collect::<Result<_, _>>()
                        .map_err(ctx)?,
                )
            }
            "input" if self.input.is_none() => self.input = Some(PathBuf::from(v)),
            "out" if self.out.is_none() => self.out = Some(PathBuf::from(v)),
            "format" if self.format.is_none() => {
                self.format = Some(Format::from_str(v, true).map_err(|e| ctx(e.to_string()))?)
            }
            k if Self::KEYS.contains(&k) => {}
            k => return Err(format!("unknown key `{k}`")),
        }
        Ok(())
    }
}
