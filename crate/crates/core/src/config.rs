//! Run configuration: a sectioned key-value file (TOML) where every key
//! can be overridden by a command-line flag of the same name.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};

fn default_field() -> String {
    "temperature".into()
}

fn default_sink() -> u32 {
    // sensor 50 is the sink in the source deployment
    50
}

fn default_gap() -> String {
    "forward_fill".into()
}

fn default_min_samples() -> usize {
    crate::dataset::DEFAULT_MIN_SAMPLES
}

fn default_windows() -> Vec<[usize; 2]> {
    vec![[0, 35], [0, 2700], [0, 5400]]
}

fn default_k() -> String {
    "auto".into()
}

fn default_scheme() -> String {
    "target_stratified".into()
}

fn default_stall() -> usize {
    crate::select::DEFAULT_STALL_LIMIT
}

fn default_threshold() -> f64 {
    5.0
}

fn default_tx() -> f64 {
    1.0
}

fn default_rx() -> f64 {
    0.5
}

fn default_epochs() -> usize {
    100
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    pub path: Option<PathBuf>,
    pub positions: Option<PathBuf>,
    #[serde(default = "default_field")]
    pub field: String,
    #[serde(default = "default_sink")]
    pub sink: u32,
}

impl Default for DataSection {
    fn default() -> Self {
        DataSection {
            path: None,
            positions: None,
            field: default_field(),
            sink: default_sink(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IngestSection {
    #[serde(default = "default_gap")]
    pub gap_policy: String,
    #[serde(default = "default_min_samples")]
    pub min_samples: usize,
}

impl Default for IngestSection {
    fn default() -> Self {
        IngestSection {
            gap_policy: default_gap(),
            min_samples: default_min_samples(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    /// (start, length) row windows.
    #[serde(default = "default_windows")]
    pub windows: Vec<[usize; 2]>,
    /// "auto" or an integer fold count.
    #[serde(default = "default_k")]
    pub k: String,
    #[serde(default = "default_scheme")]
    pub scheme: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_stall")]
    pub stall_limit: usize,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        ExperimentSection {
            windows: default_windows(),
            k: default_k(),
            scheme: default_scheme(),
            seed: 0,
            stall_limit: default_stall(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    #[serde(default = "default_threshold")]
    pub rmse_threshold: f64,
    #[serde(default = "default_tx")]
    pub tx_cost: f64,
    #[serde(default = "default_rx")]
    pub rx_cost: f64,
    /// Epochs to run each adopted plan in the energy simulation.
    #[serde(default = "default_epochs")]
    pub epochs: usize,
}

impl Default for SimulateSection {
    fn default() -> Self {
        SimulateSection {
            rmse_threshold: default_threshold(),
            tx_cost: default_tx(),
            rx_cost: default_rx(),
            epochs: default_epochs(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_out")]
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { dir: default_out() }
    }
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub data: DataSection,
    #[serde(default)]
    pub ingest: IngestSection,
    #[serde(default)]
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub simulate: SimulateSection,
    #[serde(default)]
    pub output: OutputSection,
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn k_for(&self, n_rows: usize) -> Result<usize> {
        if self.experiment.k == "auto" {
            Ok(crate::eval::auto_k(n_rows))
        } else {
            self.experiment
                .k
                .parse()
                .map_err(|_| Error::Config(format!("k must be 'auto' or an integer, got '{}'", self.experiment.k)))
        }
    }

    /// Check that referenced paths exist and windows are strictly
    /// increasing in length.
    pub fn validate(&self) -> Result<()> {
        if let Some(p) = &self.data.path {
            if !p.exists() {
                return Err(Error::Config(format!("data path {} not found", p.display())));
            }
        }
        if let Some(p) = &self.data.positions {
            if !p.exists() {
                return Err(Error::Config(format!(
                    "positions path {} not found",
                    p.display()
                )));
            }
        }
        let lens: Vec<usize> = self.experiment.windows.iter().map(|w| w[1]).collect();
        if !lens.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Config(
                "window lengths must be strictly increasing".into(),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_parse_from_empty_config() {
        let cfg: RunConfig = toml::from_str("").unwrap();
        assert_eq!(cfg.data.sink, 50);
        assert_eq!(cfg.ingest.min_samples, 35);
        assert_eq!(cfg.ingest.gap_policy, "forward_fill");
        assert_eq!(cfg.simulate.rmse_threshold, 5.0);
        assert_eq!(cfg.experiment.windows, vec![[0, 35], [0, 2700], [0, 5400]]);
    }

    #[test]
    fn k_parsing() {
        let cfg: RunConfig = toml::from_str("[experiment]\nk = \"auto\"").unwrap();
        assert_eq!(cfg.k_for(35).unwrap(), 2);
        let cfg: RunConfig = toml::from_str("[experiment]\nk = \"7\"").unwrap();
        assert_eq!(cfg.k_for(35).unwrap(), 7);
        let cfg: RunConfig = toml::from_str("[experiment]\nk = \"many\"").unwrap();
        assert!(cfg.k_for(35).is_err());
    }

    #[test]
    fn non_increasing_windows_rejected() {
        let cfg: RunConfig =
            toml::from_str("[experiment]\nwindows = [[0, 100], [0, 50]]").unwrap();
        assert!(cfg.validate().is_err());
    }
}
