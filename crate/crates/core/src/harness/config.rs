//! Versioned TOML run configuration with `section.key=value` overrides.
//!
//! Every key is optional; omitted keys take the defaults shown by
//! `uvaa config`. Unknown keys are rejected.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::beamforming::{db_to_linear, GainMethod, QuadratureSpec};
use crate::channel::{noise_power_watts, ChannelParams};
use crate::energy::EnergyParams;
use crate::env::{EnvConfig, RewardWeights};
use crate::error::{Error, Result};
use crate::geometry::AreaBounds;
use crate::trainer::TrainerConfig;

use super::layouts::BaselineKind;

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GainMethodName {
    ClosedForm,
    Quadrature,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvSection {
    pub n_uavs: usize,
    /// Side of the square flight area, m.
    pub area_length: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub d_min: f64,
    /// Swarm-compactness scale; `n_uavs · area_length` when absent.
    pub kappa: Option<f64>,
    pub collision_penalty: f64,
    pub bs_distance_min: f64,
    pub bs_distance_max: f64,
    pub efficiency: f64,
    pub gain_method: GainMethodName,
    pub quadrature_n_theta: usize,
    pub quadrature_n_phi: usize,
    pub placement_attempts: usize,
}

impl Default for EnvSection {
    fn default() -> Self {
        let q = QuadratureSpec::default();
        Self {
            n_uavs: 16,
            area_length: 100.0,
            h_min: 100.0,
            h_max: 120.0,
            d_min: 0.5,
            kappa: None,
            collision_penalty: 1.0,
            bs_distance_min: 2_000.0,
            bs_distance_max: 20_000.0,
            efficiency: 1.0,
            gain_method: GainMethodName::ClosedForm,
            quadrature_n_theta: q.n_theta,
            quadrature_n_phi: q.n_phi,
            placement_attempts: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelSection {
    pub c_env: f64,
    pub d_env: f64,
    pub mu_los_db: f64,
    pub mu_nlos_db: f64,
    pub alpha: f64,
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
    pub noise_psd_dbm_hz: f64,
    pub power_per_uav_w: f64,
}

impl Default for ChannelSection {
    fn default() -> Self {
        Self {
            c_env: 10.0,
            d_env: 0.6,
            mu_los_db: 3.0,
            mu_nlos_db: 23.0,
            alpha: 2.0,
            carrier_hz: 2.4e9,
            bandwidth_hz: 1e6,
            noise_psd_dbm_hz: -157.0,
            power_per_uav_w: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    pub epochs: u64,
    /// Also write every training episode to `episodes.jsonl`.
    pub log_episodes: bool,
}

impl Default for TrainSection {
    fn default() -> Self {
        Self { epochs: 10, log_episodes: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    /// Stations served in sequence.
    pub tasks: usize,
    pub checkpoint: Option<PathBuf>,
}

impl Default for EvalSection {
    fn default() -> Self {
        Self { tasks: 2, checkpoint: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub layout: BaselineKind,
    pub gammas: Vec<f64>,
    pub samples: usize,
    /// Station distance for the phase-error sweep, m.
    pub distance: f64,
    pub azimuth_deg: f64,
    pub distances: Vec<f64>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            layout: BaselineKind::Raa,
            gammas: vec![1.0, 2.0, 5.0, 10.0, 20.0, 40.0, 80.0],
            samples: 10_000,
            distance: 5_000.0,
            azimuth_deg: 30.0,
            distances: vec![2_000.0, 4_000.0, 6_000.0, 8_000.0, 10_000.0, 15_000.0, 20_000.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: PathBuf::from("runs") }
    }
}

/// The file as written by the user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub format_version: u32,
    pub seed: u64,
    pub env: EnvSection,
    pub channel: ChannelSection,
    pub energy: EnergyParams,
    pub reward: RewardWeights,
    pub trainer: TrainerConfig,
    pub train: TrainSection,
    pub eval: EvalSection,
    pub sweep: SweepSection,
    pub output: OutputSection,
}

impl Default for ConfigFile {
    fn default() -> Self {
        Self {
            format_version: CONFIG_VERSION,
            seed: 0,
            env: EnvSection::default(),
            channel: ChannelSection::default(),
            energy: EnergyParams::default(),
            reward: RewardWeights::default(),
            trainer: TrainerConfig::default(),
            train: TrainSection::default(),
            eval: EvalSection::default(),
            sweep: SweepSection::default(),
            output: OutputSection::default(),
        }
    }
}

/// Resolved, validated settings of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub file: ConfigFile,
    pub env: EnvConfig,
    pub trainer: TrainerConfig,
}

fn config_err(e: impl std::fmt::Display) -> Error {
    Error::Config(e.to_string())
}

/// Parses the right-hand side of an override as a TOML value, falling back
/// to a bare string.
fn parse_value(raw: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

/// Applies `section.key=value` to `table`.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{assignment}` is not of the form key=value")))?;
    let keys: Vec<&str> = path.trim().split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(Error::Config(format!("override `{assignment}` has an empty key")));
    }
    let (last, parents) = keys.split_last().expect("split yields at least one key");
    let mut cur = table;
    for k in parents {
        let entry = cur.entry(k.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("override `{assignment}`: `{k}` is not a section")))?;
    }
    cur.insert(last.to_string(), parse_value(raw.trim()));
    Ok(())
}

impl ConfigFile {
    /// Reads `path` (or starts from defaults) and applies `overrides`.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut table = match path {
            Some(p) => {
                let text = fs::read_to_string(p)
                    .map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?;
                let table: toml::Table = toml::from_str(&text).map_err(config_err)?;
                if !table.contains_key("format_version") {
                    return Err(Error::Config(format!("{} lacks format_version", p.display())));
                }
                table
            }
            None => toml::Table::new(),
        };
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let file: ConfigFile = toml::Value::Table(table).try_into().map_err(config_err)?;
        if file.format_version != CONFIG_VERSION {
            return Err(Error::Config(format!(
                "unsupported format_version {} (expected {CONFIG_VERSION})",
                file.format_version
            )));
        }
        Ok(file)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(config_err)
    }

    pub fn env_config(&self) -> Result<EnvConfig> {
        let e = &self.env;
        let c = &self.channel;
        let area = AreaBounds::new(e.area_length, e.h_min, e.h_max)?;
        let channel = ChannelParams {
            c_env: c.c_env,
            d_env: c.d_env,
            mu_los: db_to_linear(c.mu_los_db),
            mu_nlos: db_to_linear(c.mu_nlos_db),
            alpha: c.alpha,
            f_c: c.carrier_hz,
            bandwidth: c.bandwidth_hz,
            noise_power: noise_power_watts(c.noise_psd_dbm_hz, c.bandwidth_hz),
            p_total: c.power_per_uav_w * e.n_uavs as f64,
        };
        let gain_method = match e.gain_method {
            GainMethodName::ClosedForm => GainMethod::ClosedForm,
            GainMethodName::Quadrature => {
                GainMethod::Quadrature(QuadratureSpec { n_theta: e.quadrature_n_theta, n_phi: e.quadrature_n_phi })
            }
        };
        let cfg = EnvConfig {
            n_uavs: e.n_uavs,
            area,
            d_min: e.d_min,
            channel,
            energy: self.energy,
            weights: self.reward,
            kappa: e.kappa.unwrap_or(e.n_uavs as f64 * area.length()),
            collision_penalty: e.collision_penalty,
            bs_distance_range: [e.bs_distance_min, e.bs_distance_max],
            efficiency: e.efficiency,
            gain_method,
            placement_attempts: e.placement_attempts,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn resolve(self) -> Result<RunConfig> {
        let env = self.env_config()?;
        self.trainer.validate()?;
        if self.eval.tasks == 0 {
            return Err(Error::Config("eval.tasks must be at least 1".into()));
        }
        let trainer = self.trainer.clone();
        Ok(RunConfig { file: self, env, trainer })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_library_defaults() {
        let run = ConfigFile::default().resolve().unwrap();
        let lib = EnvConfig::with_uavs(16);
        assert_eq!(run.env.area, lib.area);
        assert_eq!(run.env.kappa, lib.kappa);
        assert_eq!(run.env.weights, lib.weights);
        assert_eq!(run.env.energy, lib.energy);
        for (a, b) in [
            (run.env.channel.mu_los, lib.channel.mu_los),
            (run.env.channel.mu_nlos, lib.channel.mu_nlos),
            (run.env.channel.noise_power, lib.channel.noise_power),
            (run.env.channel.p_total, lib.channel.p_total),
        ] {
            assert!((a / b - 1.0).abs() < 1e-12);
        }
        assert_eq!(run.trainer, TrainerConfig::default());
    }

    #[test]
    fn file_and_overrides_combine() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        fs::write(&path, "format_version = 1\nseed = 3\n[env]\nn_uavs = 4\n[trainer]\nbatch_episodes = 64\n").unwrap();
        let sets = vec!["trainer.kl_threshold=0.01".to_string(), "output.dir = out/x".to_string()];
        let f = ConfigFile::load(Some(&path), &sets).unwrap();
        assert_eq!(f.seed, 3);
        assert_eq!(f.env.n_uavs, 4);
        assert_eq!(f.trainer.batch_episodes, 64);
        assert_eq!(f.trainer.kl_threshold, 0.01);
        assert_eq!(f.output.dir, PathBuf::from("out/x"));
        let run = f.resolve().unwrap();
        assert_eq!(run.env.kappa, 400.0);
        assert!((run.env.channel.p_total - 0.4).abs() < 1e-15);
    }

    #[test]
    fn round_trips_through_toml() {
        let mut f = ConfigFile::default();
        f.env.kappa = Some(12.5);
        f.sweep.layout = BaselineKind::Laa;
        let text = f.to_toml().unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        fs::write(&path, text).unwrap();
        assert_eq!(ConfigFile::load(Some(&path), &[]).unwrap(), f);
    }

    #[test]
    fn bad_inputs_are_config_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        for text in [
            "seed = 1\n",
            "format_version = 2\n",
            "format_version = 1\n[env]\nn_uavz = 3\n",
            "format_version = 1\n[env]\nn_uavs = \"many\"\n",
            "format_version = 1\n[env]\nn_uavs = 1\n",
            "format_version = 1\n[trainer]\nkl_threshold = -1.0\n",
            "not toml at all [",
        ] {
            fs::write(&path, text).unwrap();
            let err = ConfigFile::load(Some(&path), &[]).and_then(|f| f.resolve().map(|_| ())).unwrap_err();
            assert!(err.is_config(), "{text}: {err}");
        }
        assert!(ConfigFile::load(None, &["novalue".into()]).unwrap_err().is_config());
        assert!(ConfigFile::load(None, &["seed.x=1".into()]).unwrap_err().is_config());
        assert!(ConfigFile::load(Some(Path::new("/nonexistent/c.toml")), &[]).unwrap_err().is_config());
    }
}
