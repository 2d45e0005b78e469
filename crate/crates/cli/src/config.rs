//! Run configuration: built-in defaults, then an optional TOML file, then flags
//! (each flag can also come from a `SOFTATTR_*` environment variable).

use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};
use softattr::attrmodels::{LogRegConfig, RankSvmConfig};
use softattr::embeddings::TrainConfig;
use softattr::eval::{Aggregation, CvConfig};
use softattr::pipeline::MethodParams;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Corpus directory (items.csv, ratings.csv, reviews.jsonl, tags.csv, judgments.jsonl).
    pub data_dir: PathBuf,
    /// Artifact directory; `<data_dir>/artifacts` when unset.
    pub out_dir: Option<PathBuf>,
    pub dim: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub lambda: f64,
    pub init_scale: f64,
    pub k: usize,
    pub z: f64,
    pub c: f64,
    pub folds: usize,
    pub seed: u64,
    pub alpha: f64,
    pub min_taggers: usize,
    pub bins: usize,
    pub min_seen: usize,
    pub aggregation: Aggregation,
}

impl Default for RunConfig {
    fn default() -> Self {
        let mf = TrainConfig::<f64>::default();
        Self {
            data_dir: PathBuf::from("data"),
            out_dir: None,
            dim: mf.dim,
            epochs: mf.epochs,
            learning_rate: mf.learning_rate,
            lambda: mf.lambda1,
            init_scale: mf.init_scale,
            k: 5,
            z: 0.4,
            c: 1.0,
            folds: 10,
            seed: 0,
            alpha: 0.15,
            min_taggers: 50,
            bins: 5,
            min_seen: 11,
            aggregation: Aggregation::PerRater,
        }
    }
}

impl RunConfig {
    pub fn out_dir(&self) -> PathBuf {
        self.out_dir.clone().unwrap_or_else(|| self.data_dir.join("artifacts"))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.dim == 0 || self.epochs == 0 {
            return bad("dim and epochs must be >= 1".into());
        }
        if !(self.learning_rate > 0.0) || !(self.init_scale > 0.0) || self.lambda < 0.0 {
            return bad("learning_rate and init_scale must be positive, lambda non-negative".into());
        }
        if self.k == 0 {
            return bad("k must be >= 1".into());
        }
        if !(self.z > 0.0 && self.z <= 0.5) {
            return bad(format!("z must be in (0, 0.5], got {}", self.z));
        }
        if !(self.c > 0.0) {
            return bad(format!("C must be positive, got {}", self.c));
        }
        if self.folds < 2 {
            return bad(format!("folds must be >= 2, got {}", self.folds));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha must be in (0, 1), got {}", self.alpha));
        }
        if self.bins < 3 {
            return bad(format!("bins must be >= 3, got {}", self.bins));
        }
        Ok(())
    }

    pub fn train_config(&self) -> TrainConfig<f64> {
        TrainConfig {
            dim: self.dim,
            learning_rate: self.learning_rate,
            epochs: self.epochs,
            lambda1: self.lambda,
            lambda2: self.lambda,
            seed: self.seed,
            init_scale: self.init_scale,
        }
    }

    pub fn method_params(&self) -> MethodParams<f64> {
        MethodParams {
            k: self.k,
            z: self.z,
            logreg: LogRegConfig::default(),
            svm: RankSvmConfig { c: self.c, seed: self.seed, ..Default::default() },
            ..Default::default()
        }
    }

    pub fn cv_config(&self) -> CvConfig {
        CvConfig { folds: self.folds, seed: self.seed, aggregation: self.aggregation }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// TOML file with any of the settings below; flags win over it.
    #[arg(long, env = "SOFTATTR_CONFIG", global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, env = "SOFTATTR_DATA_DIR", global = true)]
    pub data_dir: Option<PathBuf>,
    #[arg(long, env = "SOFTATTR_OUT_DIR", global = true)]
    pub out_dir: Option<PathBuf>,
    /// Embedding dimension.
    #[arg(long, env = "SOFTATTR_DIM", global = true)]
    pub dim: Option<usize>,
    #[arg(long, env = "SOFTATTR_EPOCHS", global = true)]
    pub epochs: Option<usize>,
    #[arg(long, env = "SOFTATTR_LEARNING_RATE", global = true)]
    pub learning_rate: Option<f64>,
    /// L2 weight for both user and item vectors.
    #[arg(long, env = "SOFTATTR_LAMBDA", global = true)]
    pub lambda: Option<f64>,
    #[arg(long, env = "SOFTATTR_INIT_SCALE", global = true)]
    pub init_scale: Option<f64>,
    /// Centroid size.
    #[arg(long, env = "SOFTATTR_K", global = true)]
    pub k: Option<usize>,
    /// Pseudo-label fraction at each end of the term ranking.
    #[arg(long, env = "SOFTATTR_Z", global = true)]
    pub z: Option<f64>,
    /// Ranking SVM regularization.
    #[arg(long = "c", id = "svm_c", env = "SOFTATTR_C", global = true)]
    pub c: Option<f64>,
    #[arg(long, env = "SOFTATTR_FOLDS", global = true)]
    pub folds: Option<usize>,
    #[arg(long, env = "SOFTATTR_SEED", global = true)]
    pub seed: Option<u64>,
    #[arg(long, env = "SOFTATTR_ALPHA", global = true)]
    pub alpha: Option<f64>,
    #[arg(long, env = "SOFTATTR_MIN_TAGGERS", global = true)]
    pub min_taggers: Option<usize>,
    #[arg(long, env = "SOFTATTR_BINS", global = true)]
    pub bins: Option<usize>,
    #[arg(long, env = "SOFTATTR_MIN_SEEN", global = true)]
    pub min_seen: Option<usize>,
    /// per-rater or flat.
    #[arg(long, env = "SOFTATTR_AGGREGATION", global = true, value_parser = parse_aggregation)]
    pub aggregation: Option<Aggregation>,
}

fn parse_aggregation(s: &str) -> Result<Aggregation, String> {
    match s {
        "per-rater" => Ok(Aggregation::PerRater),
        "flat" => Ok(Aggregation::Flat),
        _ => Err(format!("expected per-rater or flat, got `{s}`")),
    }
}

impl ConfigArgs {
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => load_file(path)?,
            None => RunConfig::default(),
        };
        macro_rules! over {
            ($($f:ident),*) => { $( if let Some(v) = self.$f.clone() { cfg.$f = v; } )* };
        }
        over!(data_dir, dim, epochs, learning_rate, lambda, init_scale, k, z, c, folds, seed, alpha, min_taggers, bins, min_seen, aggregation);
        if let Some(o) = &self.out_dir {
            cfg.out_dir = Some(o.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn load_file(path: &Path) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        fs::write(&path, "dim = 8\nseed = 3\nfolds = 5\n").unwrap();
        let args = ConfigArgs { config: Some(path), seed: Some(9), ..Default::default() };
        let cfg = args.resolve().unwrap();
        assert_eq!((cfg.dim, cfg.seed, cfg.folds, cfg.k), (8, 9, 5, 5));
    }

    #[test]
    fn unknown_keys_and_bad_values_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        fs::write(&path, "dimm = 8\n").unwrap();
        assert!(ConfigArgs { config: Some(path), ..Default::default() }.resolve().is_err());
        assert!(ConfigArgs { folds: Some(1), ..Default::default() }.resolve().is_err());
        assert!(ConfigArgs { z: Some(0.7), ..Default::default() }.resolve().is_err());
    }

    #[test]
    fn toml_round_trip() {
        let cfg = RunConfig { out_dir: Some("x".into()), ..Default::default() };
        assert_eq!(toml::from_str::<RunConfig>(&cfg.to_toml()).unwrap(), cfg);
    }
}
