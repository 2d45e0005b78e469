use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ItemCatalog, ItemId};
use crate::{Error, Result};

/// One rater's three-bucket partition of sampled items relative to an anchor item.
///
/// The field order is the `judgments.jsonl` key order and must not change.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Judgment {
    pub rater_id: String,
    pub attribute: String,
    #[serde(rename = "anchor_id")]
    pub anchor: ItemId,
    pub less: Vec<ItemId>,
    pub same: Vec<ItemId>,
    pub more: Vec<ItemId>,
    /// Record sequence number (0-based line of the source file or service sequence).
    #[serde(skip)]
    pub seq: usize,
}

impl Judgment {
    pub fn new(
        rater_id: impl Into<String>,
        attribute: impl Into<String>,
        anchor: impl Into<String>,
        less: &[&str],
        same: &[&str],
        more: &[&str],
    ) -> Self {
        let own = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        Self {
            rater_id: rater_id.into(),
            attribute: attribute.into(),
            anchor: anchor.into(),
            less: own(less),
            same: own(same),
            more: own(more),
            seq: 0,
        }
    }

    /// All judged items, anchor first.
    pub fn items(&self) -> impl Iterator<Item = &str> {
        std::iter::once(self.anchor.as_str())
            .chain(self.less.iter().map(String::as_str))
            .chain(self.same.iter().map(String::as_str))
            .chain(self.more.iter().map(String::as_str))
    }

    pub fn candidate_count(&self) -> usize {
        self.less.len() + self.same.len() + self.more.len()
    }

    /// Checks disjointness, anchor exclusion and (optionally) catalog resolution.
    pub fn validate(&self, catalog: Option<&ItemCatalog>) -> Result<()> {
        if self.rater_id.is_empty() || self.attribute.is_empty() {
            return Err(Error::InvalidJudgment(
                "rater_id and attribute must be non-empty".into(),
            ));
        }
        let mut seen = HashSet::new();
        for id in self.items() {
            if !seen.insert(id) {
                return Err(Error::InvalidJudgment(format!(
                    "item `{id}` appears more than once (anchor or buckets overlap)"
                )));
            }
        }
        if let Some(cat) = catalog {
            let missing: Vec<&str> = self.items().filter(|id| !cat.contains(id)).collect();
            if !missing.is_empty() {
                return Err(Error::InvalidJudgment(format!(
                    "unknown item ids: {}",
                    missing.join(", ")
                )));
            }
        }
        Ok(())
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("judgment serializes")
    }
}

/// Parses `judgments.jsonl` content; blank lines are ignored and `seq` is the record index.
pub fn parse_judgments<R: BufRead>(
    reader: R,
    file: &str,
    catalog: Option<&ItemCatalog>,
) -> Result<Vec<Judgment>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(file, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut j: Judgment = serde_json::from_str(&line).map_err(|e| Error::Malformed {
            file: file.to_string(),
            line: i + 1,
            message: e.to_string(),
        })?;
        j.validate(catalog).map_err(|e| Error::Malformed {
            file: file.to_string(),
            line: i + 1,
            message: e.to_string(),
        })?;
        j.seq = out.len();
        out.push(j);
    }
    Ok(out)
}

pub fn load_judgments(path: &Path, catalog: Option<&ItemCatalog>) -> Result<Vec<Judgment>> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_judgments(BufReader::new(f), &path.display().to_string(), catalog)
}

/// Writes one JSON object per line, in the given order.
pub fn write_judgments<W: Write>(mut w: W, judgments: &[Judgment]) -> std::io::Result<()> {
    for j in judgments {
        w.write_all(j.to_json_line().as_bytes())?;
        w.write_all(b"\n")?;
    }
    Ok(())
}
