use std::fs;
use std::path::PathBuf;
use std::str::FromStr;

use clap::Args;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::map::DifferentiableMap;
use crate::modulus::{estimate_modulus_of_jacobian, Modulus};

/// How the modulus of continuity of `Df` is obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum ModulusDecl {
    Holder {
        #[serde(rename = "C")]
        c: f64,
        alpha: f64,
    },
    /// Two-column CSV of `(delta, omega)` samples.
    Tabulated { path: PathBuf },
    /// Sampled from `Df` on a grid of the given resolution.
    Estimate { resolution: usize },
}

impl FromStr for ModulusDecl {
    type Err = String;

    /// `holder:C,alpha`, `tabulated:PATH` or `estimate:RES`.
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (kind, rest) = s.split_once(':').ok_or_else(|| format!("expected KIND:ARGS, got `{s}`"))?;
        match kind {
            "holder" => {
                let (c, a) = rest.split_once(',').ok_or("holder needs C,alpha")?;
                Ok(ModulusDecl::Holder {
                    c: c.trim().parse().map_err(|e| format!("C: {e}"))?,
                    alpha: a.trim().parse().map_err(|e| format!("alpha: {e}"))?,
                })
            }
            "tabulated" => Ok(ModulusDecl::Tabulated { path: rest.into() }),
            "estimate" => Ok(ModulusDecl::Estimate {
                resolution: rest.trim().parse().map_err(|e| format!("resolution: {e}"))?,
            }),
            other => Err(format!("unknown modulus kind `{other}`")),
        }
    }
}

impl ModulusDecl {
    pub fn resolve(&self, d: usize, f: Option<&dyn DifferentiableMap>, seed: u64) -> Result<Modulus> {
        let diam = (d as f64).sqrt();
        match self {
            ModulusDecl::Holder { c, alpha } => Modulus::holder(*c, *alpha, diam),
            ModulusDecl::Tabulated { path } => Modulus::from_csv(fs::File::open(path)?, diam),
            ModulusDecl::Estimate { resolution } => {
                let f = f.ok_or_else(|| Error::Argument("estimating a modulus needs a function".into()))?;
                let levels = (*resolution.max(&2) as f64).log2().floor() as i32;
                let probes: Vec<f64> = (0..=levels).map(|k| diam * 2f64.powi(-k)).collect();
                estimate_modulus_of_jacobian(f, *resolution, &probes, seed)
            }
        }
    }
}

/// Options shared by the pipeline subcommands. Every field may also come
/// from the TOML file given by `--config`; flags win.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunArgs {
    /// TOML file with any of the options below.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Components separated by `;`, variables `x1..xd`.
    #[arg(long, short = 'f')]
    pub function: Option<String>,
    #[arg(long)]
    pub function_file: Option<PathBuf>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    /// `holder:C,alpha`, `tabulated:PATH` or `estimate:RES`.
    #[arg(long)]
    pub modulus: Option<ModulusDecl>,
    #[arg(long = "eps", value_delimiter = ',')]
    #[serde(default)]
    pub epsilon: Vec<f64>,
    /// Mesh size, used instead of calibrating from `--eps`.
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub resolution: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub sigma_tol_rel: Option<f64>,
    /// Absolute singular-value threshold for the rank mask; cell-scaled when
    /// absent.
    #[arg(long)]
    pub mask_tolerance: Option<f64>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Add the lower-bound certificate to `bound`.
    #[arg(long)]
    #[serde(default)]
    pub adversary: bool,
    /// Run the pipeline on the adversarial map in `adversary`.
    #[arg(long)]
    #[serde(default)]
    pub sandwich: bool,
    #[arg(long)]
    pub lines: Option<usize>,
}

/// Fully resolved options; this is what the report embeds and hashes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub function: Option<String>,
    pub d: usize,
    pub m: usize,
    pub modulus: Option<ModulusDecl>,
    pub epsilon: Vec<f64>,
    pub delta: Option<f64>,
    pub resolution: usize,
    pub samples: usize,
    pub sigma_tol_rel: f64,
    pub mask_tolerance: Option<f64>,
    #[serde(skip)]
    pub output: Option<PathBuf>,
    pub seed: u64,
    pub adversary: bool,
    pub sandwich: bool,
    pub lines: usize,
}

pub const DEFAULT_RESOLUTION: usize = 256;
pub const DEFAULT_SAMPLES: usize = 10_000;
pub const DEFAULT_LINES: usize = 4;

impl RunArgs {
    pub fn resolve(&self) -> Result<RunConfig> {
        let file = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| Error::Argument(format!("{}: {e}", path.display())))?;
                toml::from_str::<RunArgs>(&text).map_err(|e| Error::Argument(format!("{}: {e}", path.display())))?
            }
            None => RunArgs::default(),
        };
        let function = match (&self.function, &self.function_file) {
            (Some(src), _) => Some(src.clone()),
            (None, Some(path)) => Some(read_source(path)?),
            (None, None) => match (&file.function, &file.function_file) {
                (Some(src), _) => Some(src.clone()),
                (None, Some(path)) => Some(read_source(path)?),
                (None, None) => None,
            },
        };
        let d = self.d.or(file.d).ok_or_else(|| Error::Argument("missing --d".into()))?;
        let m = match self.m.or(file.m) {
            Some(m) => m,
            None => function.as_deref().map_or(1, |f| f.split(';').filter(|c| !c.trim().is_empty()).count()),
        };
        let epsilon = if self.epsilon.is_empty() { file.epsilon } else { self.epsilon.clone() };
        if let Some(e) = epsilon.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
            return Err(Error::Argument(format!("epsilon values must be positive, got {e}")));
        }
        let modulus = self.modulus.clone().or(file.modulus);
        if let Some(ModulusDecl::Tabulated { path }) = &modulus {
            if !path.exists() {
                return Err(Error::Argument(format!("modulus table {} not found", path.display())));
            }
        }
        Ok(RunConfig {
            function,
            d,
            m,
            modulus,
            epsilon,
            delta: self.delta.or(file.delta),
            resolution: self.resolution.or(file.resolution).unwrap_or(DEFAULT_RESOLUTION),
            samples: self.samples.or(file.samples).unwrap_or(DEFAULT_SAMPLES),
            sigma_tol_rel: self
                .sigma_tol_rel
                .or(file.sigma_tol_rel)
                .unwrap_or(crate::perturbation::DEFAULT_SIGMA_TOL_REL),
            mask_tolerance: self.mask_tolerance.or(file.mask_tolerance),
            output: self.output.clone().or(file.output),
            seed: self.seed.or(file.seed).unwrap_or(0),
            adversary: self.adversary || file.adversary,
            sandwich: self.sandwich || file.sandwich,
            lines: self.lines.or(file.lines).unwrap_or(DEFAULT_LINES),
        })
    }
}

fn read_source(path: &PathBuf) -> Result<String> {
    fs::read_to_string(path)
        .map(|s| s.trim().to_string())
        .map_err(|e| Error::Argument(format!("{}: {e}", path.display())))
}

impl RunConfig {
    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}
