//! Loads corpus files and artifacts named by a [`RunConfig`].

use std::collections::BTreeSet;
use std::fs;
use std::path::PathBuf;

use softattr::corpus::{load_corpus, load_judgments, Corpus, CorpusPaths, Judgment, SoftAttribute};
use softattr::embeddings::FactorModel;

use crate::config::RunConfig;
use crate::error::{CliError, Result};

pub struct Workspace {
    pub cfg: RunConfig,
}

impl Workspace {
    pub fn new(cfg: RunConfig) -> Self {
        Self { cfg }
    }

    pub fn data(&self, name: &str) -> PathBuf {
        self.cfg.data_dir.join(name)
    }

    pub fn artifact(&self, name: &str) -> PathBuf {
        self.cfg.out_dir().join(name)
    }

    pub fn corpus(&self) -> Result<Corpus> {
        Ok(load_corpus(&CorpusPaths::in_dir(&self.cfg.data_dir))?)
    }

    pub fn has_judgments(&self) -> bool {
        self.data("judgments.jsonl").exists()
    }

    pub fn judgments(&self, corpus: &Corpus) -> Result<Vec<Judgment>> {
        let path = self.data("judgments.jsonl");
        if !path.exists() {
            return Err(CliError::Usage(format!("{} is required for this command", path.display())));
        }
        Ok(load_judgments(&path, Some(&corpus.catalog))?)
    }

    /// Phrases from `attributes.txt`, or the attribute ids found in `judgments`.
    pub fn attributes(&self, judgments: Option<&[Judgment]>) -> Result<Vec<SoftAttribute>> {
        let path = self.data("attributes.txt");
        let phrases: BTreeSet<String> = if path.exists() {
            fs::read_to_string(&path)
                .map_err(|e| CliError::io(&path, e))?
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_string)
                .collect()
        } else {
            judgments.unwrap_or_default().iter().map(|j| j.attribute.clone()).collect()
        };
        if phrases.is_empty() {
            return Err(CliError::Usage(format!(
                "no attributes: add {} or judgments.jsonl",
                path.display()
            )));
        }
        Ok(phrases.into_iter().map(SoftAttribute::new).collect())
    }

    pub fn model(&self) -> Result<FactorModel<f64>> {
        let path = self.artifact("model.json");
        if !path.exists() {
            return Err(CliError::Usage(format!(
                "{} not found; run `softattr embed` first",
                path.display()
            )));
        }
        Ok(FactorModel::load(&path)?)
    }
}
