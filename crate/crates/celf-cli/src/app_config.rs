//! CLI configuration: defaults, key=value file, flag overrides — in that
//! precedence order. Unknown config keys are rejected before any compute.

use std::path::{Path, PathBuf};

use celf::config::KeyValueFile;
use celf::error::{Error, Result};
use celf::estimator::{Hyperparameters, SolverChoice};
use celf::pathloss::{HataEnvironment, HataParams};
use celf::prior::MemoryBudget;

const ALLOWED_KEYS: &[&str] = &[
    "pixel_width",
    "shadow_ratio",
    "space_constant",
    "excess_length",
    "alpha",
    "margin",
    "ref_distance",
    "seed",
    "split_ratio",
    "solver",
    "memory_budget_mb",
    "hata.frequency_mhz",
    "hata.tx_height_m",
    "hata.rx_height_m",
    "hata.environment",
];

/// Flag-level overrides collected by the argument parser.
#[derive(Debug, Default, Clone)]
pub struct ConfigOverrides {
    pub config_path: Option<PathBuf>,
    pub seed: Option<u64>,
    pub solver: Option<String>,
    pub ratio: Option<f64>,
    pub pixel_width: Option<f64>,
    pub shadow_ratio: Option<f64>,
    pub space_constant: Option<f64>,
    pub excess_length: Option<f64>,
    pub alpha: Option<f64>,
}

/// Fully resolved configuration.
#[derive(Debug, Clone)]
pub struct AppConfig {
    pub pixel_width: Option<f64>,
    pub shadow_ratio: Option<f64>,
    pub space_constant: Option<f64>,
    pub excess_length: Option<f64>,
    pub alpha: Option<f64>,
    pub margin: f64,
    pub ref_distance: f64,
    pub seed: u64,
    pub split_ratio: f64,
    pub solver: SolverChoice,
    pub memory_budget: MemoryBudget,
    hata_frequency_mhz: Option<f64>,
    hata_tx_height_m: Option<f64>,
    hata_rx_height_m: Option<f64>,
    hata_environment: Option<HataEnvironment>,
}

impl Default for AppConfig {
    fn default() -> Self {
        Self {
            pixel_width: None,
            shadow_ratio: None,
            space_constant: None,
            excess_length: None,
            alpha: None,
            margin: 0.0,
            ref_distance: 1.0,
            seed: 0,
            split_ratio: 0.7,
            solver: SolverChoice::Auto,
            memory_budget: MemoryBudget::default(),
            hata_frequency_mhz: None,
            hata_tx_height_m: None,
            hata_rx_height_m: None,
            hata_environment: None,
        }
    }
}

impl AppConfig {
    /// Defaults, then the config file (if any), then flags.
    pub fn resolve(overrides: &ConfigOverrides) -> Result<Self> {
        let mut cfg = AppConfig::default();
        if let Some(path) = &overrides.config_path {
            cfg.apply_file(path)?;
        }
        if let Some(seed) = overrides.seed {
            cfg.seed = seed;
        }
        if let Some(solver) = &overrides.solver {
            cfg.solver = SolverChoice::parse(solver).ok_or(Error::Config {
                message: format!("unknown solver '{solver}'"),
            })?;
        }
        if let Some(ratio) = overrides.ratio {
            cfg.split_ratio = ratio;
        }
        if let Some(v) = overrides.pixel_width {
            cfg.pixel_width = Some(v);
        }
        if let Some(v) = overrides.shadow_ratio {
            cfg.shadow_ratio = Some(v);
        }
        if let Some(v) = overrides.space_constant {
            cfg.space_constant = Some(v);
        }
        if let Some(v) = overrides.excess_length {
            cfg.excess_length = Some(v);
        }
        if let Some(v) = overrides.alpha {
            cfg.alpha = Some(v);
        }
        if !(cfg.split_ratio > 0.0 && cfg.split_ratio <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "split_ratio",
                value: cfg.split_ratio,
                requirement: "in (0, 1]; 1 trains on every row",
            });
        }
        Ok(cfg)
    }

    fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)?;
        let kv = KeyValueFile::parse(&text)?;
        kv.reject_unknown(ALLOWED_KEYS)?;
        if let Some(v) = kv.get_f64("pixel_width")? {
            self.pixel_width = Some(v);
        }
        if let Some(v) = kv.get_f64("shadow_ratio")? {
            self.shadow_ratio = Some(v);
        }
        if let Some(v) = kv.get_f64("space_constant")? {
            self.space_constant = Some(v);
        }
        if let Some(v) = kv.get_f64("excess_length")? {
            self.excess_length = Some(v);
        }
        if let Some(v) = kv.get_f64("alpha")? {
            self.alpha = Some(v);
        }
        if let Some(v) = kv.get_f64("margin")? {
            self.margin = v;
        }
        if let Some(v) = kv.get_f64("ref_distance")? {
            self.ref_distance = v;
        }
        if let Some(v) = kv.get_u64("seed")? {
            self.seed = v;
        }
        if let Some(v) = kv.get_f64("split_ratio")? {
            self.split_ratio = v;
        }
        if let Some(v) = kv.get("solver") {
            self.solver = SolverChoice::parse(v).ok_or(Error::Config {
                message: format!("unknown solver '{v}' (auto | map | mne)"),
            })?;
        }
        if let Some(v) = kv.get_u64("memory_budget_mb")? {
            self.memory_budget = MemoryBudget::from_mebibytes(v);
        }
        self.hata_frequency_mhz = kv.get_f64("hata.frequency_mhz")?;
        self.hata_tx_height_m = kv.get_f64("hata.tx_height_m")?;
        self.hata_rx_height_m = kv.get_f64("hata.rx_height_m")?;
        if let Some(v) = kv.get("hata.environment") {
            self.hata_environment = Some(HataEnvironment::parse(v).ok_or(Error::Config {
                message: format!(
                    "unknown hata.environment '{v}' \
                     (urban_medium | urban_large | suburban | open)"
                ),
            })?);
        }
        Ok(())
    }

    /// The five hyperparameters, all required.
    pub fn hyperparameters(&self) -> Result<Hyperparameters> {
        let need = |name: &'static str, v: Option<f64>| -> Result<f64> {
            v.ok_or(Error::Config {
                message: format!(
                    "missing hyperparameter '{name}' (set it in the config file or via --{})",
                    name.replace('_', "-")
                ),
            })
        };
        let hyper = Hyperparameters {
            pixel_width: need("pixel_width", self.pixel_width)?,
            shadow_ratio: need("shadow_ratio", self.shadow_ratio)?,
            space_constant: need("space_constant", self.space_constant)?,
            excess_length: need("excess_length", self.excess_length)?,
            alpha: need("alpha", self.alpha)?,
        };
        hyper.validate()?;
        Ok(hyper)
    }

    /// Okumura-Hata parameters, required when the baseline is requested.
    pub fn hata_params(&self) -> Result<HataParams> {
        match (
            self.hata_frequency_mhz,
            self.hata_tx_height_m,
            self.hata_rx_height_m,
        ) {
            (Some(f), Some(tx), Some(rx)) => HataParams::new(
                f,
                tx,
                rx,
                self.hata_environment.unwrap_or(HataEnvironment::UrbanMedium),
            ),
            _ => Err(Error::Config {
                message: "the baseline needs hata.frequency_mhz, hata.tx_height_m, \
                          hata.rx_height_m in the config file"
                    .into(),
            }),
        }
    }
}
