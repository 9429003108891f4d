use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::codegen::EmitOptions;
use crate::optimizer::ReductionSchedule;
use crate::stacker::StackConfig;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataConfig {
    /// Flows written by `gen-data`.
    pub n: usize,
    /// Fraction of malicious flows in generated data.
    pub class_balance: f64,
    pub camouflage: f64,
    /// Training share of the stratified train/validation split.
    pub train_fraction: f64,
}

impl Default for DataConfig {
    fn default() -> Self {
        Self {
            n: 1000,
            class_balance: 0.69,
            camouflage: 0.06,
            train_fraction: 0.8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub timing_repetitions: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self { timing_repetitions: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundtripConfig {
    /// Largest tolerated |p_emitted - p_reference|.
    pub tolerance: f64,
}

impl Default for RoundtripConfig {
    fn default() -> Self {
        Self { tolerance: 1e-12 }
    }
}

/// Every tunable of every command. Loaded from TOML over the defaults, then
/// `key.path=value` overrides on top. `seed` is the single source of
/// randomness and replaces `stack.seed` on resolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    pub data: DataConfig,
    pub stack: StackConfig,
    pub schedule: ReductionSchedule,
    pub eval: EvalConfig,
    pub emit: EmitOptions,
    pub roundtrip: RoundtripConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            data: DataConfig::default(),
            stack: StackConfig::with_seed(7),
            schedule: ReductionSchedule::default(),
            eval: EvalConfig::default(),
            emit: EmitOptions::default(),
            roundtrip: RoundtripConfig::default(),
        }
    }
}

fn merge(base: &mut Value, user: Value, path: &str) -> Result<()> {
    match (base, user) {
        (Value::Object(b), Value::Object(u)) => {
            for (k, v) in u {
                let key = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
                let slot = b
                    .get_mut(&k)
                    .ok_or_else(|| Error::InvalidArgument(format!("unknown config key `{key}`")))?;
                merge(slot, v, &key)?;
            }
            Ok(())
        }
        (b, u) => {
            *b = u;
            Ok(())
        }
    }
}

/// TOML scalar, array or inline table; anything else is taken as a bare
/// string so `--set emit.tree_style=node_table` works unquoted.
fn parse_value(raw: &str) -> Value {
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .and_then(|v| serde_json::to_value(v).ok())
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

impl RunConfig {
    /// Defaults, then the TOML file (if any), then each `key.path=value`
    /// override in order.
    pub fn load(file: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut value = serde_json::to_value(Self::default())?;
        if let Some(path) = file {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            let table: toml::Table = toml::from_str(&text)
                .map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))?;
            merge(&mut value, serde_json::to_value(table)?, "")?;
        }
        for o in overrides {
            let (key, raw) = o
                .split_once('=')
                .ok_or_else(|| Error::InvalidArgument(format!("override `{o}` is not key=value")))?;
            let mut user = parse_value(raw.trim());
            for part in key.trim().rsplit('.') {
                user = Value::Object([(part.to_string(), user)].into_iter().collect());
            }
            merge(&mut value, user, "")?;
        }
        let cfg: Self = serde_json::from_value(value)
            .map_err(|e| Error::InvalidArgument(format!("invalid config: {e}")))?;
        cfg.resolve()
    }

    /// Propagates the seed and validates every section.
    pub fn resolve(mut self) -> Result<Self> {
        self.stack.seed = self.seed;
        self.stack.validate()?;
        self.schedule.validate()?;
        let d = &self.data;
        if !(d.train_fraction > 0.0 && d.train_fraction < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "data.train_fraction must be in (0, 1), got {}",
                d.train_fraction
            )));
        }
        if !(0.0..=1.0).contains(&d.class_balance) || !(0.0..=1.0).contains(&d.camouflage) {
            return Err(Error::InvalidArgument(
                "data.class_balance and data.camouflage must be in [0, 1]".into(),
            ));
        }
        if !(self.roundtrip.tolerance >= 0.0) {
            return Err(Error::InvalidArgument("roundtrip.tolerance must be >= 0".into()));
        }
        Ok(self)
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codegen::TreeStyle;

    #[test]
    fn overrides_win_over_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "seed = 3\n[data]\nn = 500\n[stack.tree]\nmax_depth = 4\n").unwrap();
        let cfg = RunConfig::load(
            Some(&path),
            &["data.n=200".into(), "emit.tree_style=node_table".into()],
        )
        .unwrap();
        assert_eq!(cfg.seed, 3);
        assert_eq!(cfg.stack.seed, 3);
        assert_eq!(cfg.data.n, 200);
        assert_eq!(cfg.stack.tree.max_depth, Some(4));
        assert_eq!(cfg.emit.tree_style, TreeStyle::NodeTable);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = RunConfig::load(None, &["data.nn=3".into()]).unwrap_err();
        assert!(err.to_string().contains("data.nn"), "{err}");
        assert!(RunConfig::load(None, &["seed".into()]).is_err());
        assert!(RunConfig::load(None, &["data.train_fraction=1.5".into()]).is_err());
    }

    #[test]
    fn defaults_round_trip_through_json() {
        let cfg = RunConfig::default();
        let back: RunConfig = serde_json::from_value(cfg.to_json()).unwrap();
        assert_eq!(back, cfg);
    }
}
