//! Run configuration: a flat TOML file, a replayed manifest, or defaults,
//! with command-line overrides applied on top.

use std::path::{Path, PathBuf};

use firelab::estimators::{Side, DEFAULT_DELTA};
use firelab::T_C;
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::manifest::RunManifest;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionKind {
    Cone,
    Tube,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerKind {
    Plain,
    Splitting,
}

/// Which clock field drives the run. `shared_stream` feeds every site the
/// same stream and exists only to check that `verify` notices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClockStub {
    Poisson,
    SharedStream,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    pub out: PathBuf,

    /// Apex of the cone (or start of the tube) and its angle.
    pub x: f64,
    pub phi: f64,

    // simulate
    /// The window spans `k` in `[-width, width]` and rows `0..=height`.
    pub width: i32,
    pub height: i32,
    pub t_end: f64,

    // onearm
    pub t: f64,
    pub n_list: Vec<u32>,
    pub samples: u64,
    pub half_plane: bool,

    // xiscan
    pub t_list: Vec<f64>,
    pub xi_n_list: Vec<u32>,
    pub sampler: SamplerKind,
    pub effort: usize,
    pub replicates: usize,
    pub prefactor_power: f64,
    pub synthetic: bool,

    // events
    pub delta: f64,
    pub event_n_list: Vec<u32>,
    pub event_samples: u64,
    pub event_a: bool,
    pub side: Side,

    // heights
    pub region: RegionKind,
    pub heights: Vec<i32>,
    pub height_samples: u64,
    pub margin: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eval_rows: Option<i32>,

    // verify
    pub clock_stub: ClockStub,
    pub verify_runs: usize,
    pub chain_runs: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            threads: None,
            out: PathBuf::from("out"),
            x: 0.0,
            phi: std::f64::consts::FRAC_PI_3,
            width: 32,
            height: 32,
            t_end: T_C,
            t: T_C,
            n_list: vec![8, 16, 32, 64, 128, 256],
            samples: 10_000,
            half_plane: true,
            t_list: vec![T_C - 0.30, T_C - 0.22, T_C - 0.15, T_C - 0.10],
            xi_n_list: (10..=60).step_by(5).collect(),
            sampler: SamplerKind::Splitting,
            effort: 1000,
            replicates: 16,
            prefactor_power: 1.0,
            synthetic: false,
            delta: DEFAULT_DELTA,
            event_n_list: vec![8, 16, 32, 64, 128],
            event_samples: 20_000,
            event_a: false,
            side: Side::Right,
            region: RegionKind::Cone,
            heights: vec![16, 32],
            height_samples: 200,
            margin: 0.5,
            eval_rows: None,
            clock_stub: ClockStub::Poisson,
            verify_runs: 1000,
            chain_runs: 100_000,
        }
    }
}

impl RunConfig {
    /// Reads a flat TOML file, or the config echo of a `.json` manifest.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        if path.extension().is_some_and(|e| e == "json") {
            let manifest = RunManifest::parse(&text)?;
            return Ok(manifest.config);
        }
        let table: toml::Table =
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        if let Some((key, _)) = table.iter().find(|(_, v)| v.is_table()) {
            return Err(CliError::Config(format!("nested table `{key}`: the config file is flat")));
        }
        table.try_into().map_err(|e: toml::de::Error| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// Applies `key=value`; the value is read as TOML, or as a bare string
    /// when it is not valid TOML.
    pub fn set(&mut self, assignment: &str) -> Result<(), CliError> {
        let (key, raw) = assignment
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("expected KEY=VALUE, got `{assignment}`")))?;
        let key = key.trim();
        let value = match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
            Ok(mut t) => {
                serde_json::to_value(t.remove("v").expect("parsed key")).map_err(|e| CliError::Config(e.to_string()))?
            }
            Err(_) => serde_json::Value::String(raw.trim().to_string()),
        };
        let mut current = serde_json::to_value(&*self).map_err(|e| CliError::Config(e.to_string()))?;
        let map = current.as_object_mut().expect("config serializes to an object");
        if !map.contains_key(key) && !matches!(key, "threads" | "eval_rows") {
            return Err(CliError::Config(format!("unknown key `{key}`")));
        }
        map.insert(key.to_string(), value);
        *self = serde_json::from_value(current).map_err(|e| CliError::Config(format!("{key}: {e}")))?;
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_toml() {
        let d = RunConfig::default();
        let back: RunConfig = toml::from_str(&d.to_toml()).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn set_parses_values() {
        let mut c = RunConfig::default();
        c.set("samples=12").unwrap();
        c.set("n_list=[4, 8]").unwrap();
        c.set("clock_stub=shared_stream").unwrap();
        c.set("eval_rows=3").unwrap();
        assert_eq!(c.samples, 12);
        assert_eq!(c.n_list, vec![4, 8]);
        assert_eq!(c.clock_stub, ClockStub::SharedStream);
        assert_eq!(c.eval_rows, Some(3));
        assert!(c.set("nonsense=1").is_err());
        assert!(c.set("samples=-1").is_err());
        assert!(c.set("samples").is_err());
    }

    #[test]
    fn unknown_file_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(&path, "seed = 3\nbogus = 1\n").unwrap();
        assert!(RunConfig::load(&path).is_err());
        std::fs::write(&path, "seed = 3\n").unwrap();
        assert_eq!(RunConfig::load(&path).unwrap().seed, 3);
    }
}
