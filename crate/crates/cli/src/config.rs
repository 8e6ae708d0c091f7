//! Run configuration: command-line flags layered over an optional flat
//! `key = value` file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::Args;

use naimark::grid::GridSpec;
use naimark::states::{parse_complex, StatePrep};
use naimark::Complex64;

use crate::CliError;

pub const KEYS: [&str; 13] = [
    "gamma", "omega1", "omegaI", "rho1", "rho2", "sigma", "grid", "samples", "seed", "nmax", "buffer", "out", "bins",
];

/// Flags shared by every subcommand. Each command reads the ones it needs.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Config file with one `key = value` per line; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Complex gamma: `0.6`, `0.3,0.4` or `0.3+0.4i`.
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<String>,
    /// Signal frequency for the heterodyne command.
    #[arg(long)]
    pub omega1: Option<String>,
    /// Intermediate frequency for the heterodyne command.
    #[arg(long = "omegaI")]
    pub omega_i: Option<String>,
    /// Preparation of mode 1, e.g. `coherent:1,0`, `number:2`, `thermal:0.5`.
    #[arg(long)]
    pub rho1: Option<String>,
    #[arg(long)]
    pub rho2: Option<String>,
    /// Ancilla preparation; must have zero quadrature means.
    #[arg(long)]
    pub sigma: Option<String>,
    /// `auto` or `xmin,xmax,ymin,ymax,nx,ny`.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    #[arg(long)]
    pub samples: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    #[arg(long)]
    pub nmax: Option<String>,
    #[arg(long)]
    pub buffer: Option<String>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Phase histogram bins for the heterodyne command.
    #[arg(long)]
    pub bins: Option<String>,
}

pub enum GridChoice {
    Auto,
    Fixed(GridSpec),
}

/// Merged view of flags and file values.
pub struct RunConfig {
    values: BTreeMap<String, String>,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

pub fn parse_file(text: &str, origin: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| config_err(format!("{}:{}: expected key = value", origin.display(), no + 1)))?;
        let k = k.trim();
        if !KEYS.contains(&k) {
            return Err(config_err(format!("{}:{}: unknown key '{k}'", origin.display(), no + 1)));
        }
        map.insert(k.to_string(), v.trim().to_string());
    }
    Ok(map)
}

impl RunConfig {
    pub fn load(args: &RunArgs) -> Result<Self, CliError> {
        let mut values = match &args.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
                parse_file(&text, path)?
            }
            None => BTreeMap::new(),
        };
        let flags: [(&str, Option<String>); 13] = [
            ("gamma", args.gamma.clone()),
            ("omega1", args.omega1.clone()),
            ("omegaI", args.omega_i.clone()),
            ("rho1", args.rho1.clone()),
            ("rho2", args.rho2.clone()),
            ("sigma", args.sigma.clone()),
            ("grid", args.grid.clone()),
            ("samples", args.samples.clone()),
            ("seed", args.seed.clone()),
            ("nmax", args.nmax.clone()),
            ("buffer", args.buffer.clone()),
            ("out", args.out.as_ref().map(|p| p.display().to_string())),
            ("bins", args.bins.clone()),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                values.insert(k.to_string(), v);
            }
        }
        Ok(RunConfig { values })
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn require(&self, key: &str) -> Result<&str, CliError> {
        self.raw(key).ok_or_else(|| config_err(format!("missing --{key}")))
    }

    pub fn gamma(&self) -> Result<Complex64, CliError> {
        Ok(parse_complex(self.require("gamma")?)?)
    }

    pub fn f64_value(&self, key: &str) -> Result<f64, CliError> {
        let s = self.require(key)?;
        s.trim()
            .parse::<f64>()
            .map_err(|_| config_err(format!("--{key}: '{s}' is not a number")))
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize, CliError> {
        match self.raw(key) {
            None => Ok(default),
            Some(s) => s
                .trim()
                .parse::<usize>()
                .map_err(|_| config_err(format!("--{key}: '{s}' is not a non-negative integer"))),
        }
    }

    pub fn seed(&self) -> Result<Option<u64>, CliError> {
        self.raw("seed")
            .map(|s| {
                s.trim()
                    .parse::<u64>()
                    .map_err(|_| config_err(format!("--seed: '{s}' is not a 64-bit unsigned integer")))
            })
            .transpose()
    }

    pub fn prep(&self, key: &str) -> Result<StatePrep, CliError> {
        match self.raw(key) {
            None => Ok(StatePrep::Vacuum),
            Some(s) => s.parse::<StatePrep>().map_err(|e| config_err(format!("--{key}: {e}"))),
        }
    }

    pub fn grid(&self) -> Result<GridChoice, CliError> {
        match self.raw("grid").map(str::trim) {
            None | Some("auto") => Ok(GridChoice::Auto),
            Some(s) => {
                let parts: Vec<&str> = s.split(',').map(str::trim).collect();
                if parts.len() != 6 {
                    return Err(config_err(format!("--grid: expected auto or xmin,xmax,ymin,ymax,nx,ny, got '{s}'")));
                }
                let f = |t: &str| t.parse::<f64>().map_err(|_| config_err(format!("--grid: '{t}' is not a number")));
                let n = |t: &str| t.parse::<usize>().map_err(|_| config_err(format!("--grid: '{t}' is not a size")));
                Ok(GridChoice::Fixed(GridSpec::new(
                    f(parts[0])?,
                    f(parts[1])?,
                    f(parts[2])?,
                    f(parts[3])?,
                    n(parts[4])?,
                    n(parts[5])?,
                )?))
            }
        }
    }

    pub fn out(&self) -> Option<PathBuf> {
        self.raw("out").map(PathBuf::from)
    }
}
