use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Deserialize;

use super::{
    Corpus, Item, ItemCatalog, RatingSet, RatingTriple, Review, ReviewStore, TagAssignment,
    TagAssignments,
};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusPaths {
    pub items: PathBuf,
    pub reviews: PathBuf,
    pub ratings: PathBuf,
    pub tags: PathBuf,
}

impl CorpusPaths {
    /// The conventional file names inside one directory.
    pub fn in_dir(dir: impl AsRef<Path>) -> Self {
        let dir = dir.as_ref();
        Self {
            items: dir.join("items.csv"),
            reviews: dir.join("reviews.jsonl"),
            ratings: dir.join("ratings.csv"),
            tags: dir.join("tags.csv"),
        }
    }
}

pub fn load_corpus(paths: &CorpusPaths) -> Result<Corpus> {
    let catalog = load_items(&paths.items)?;
    let reviews = load_reviews(&paths.reviews, &catalog)?;
    let ratings = load_ratings(&paths.ratings, &catalog)?;
    let tags = load_tags(&paths.tags, &catalog)?;
    Ok(Corpus {
        catalog,
        reviews,
        ratings,
        tags,
    })
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

fn file_name(path: &Path) -> String {
    path.display().to_string()
}

/// Reads a headed CSV file into typed rows, reporting the 1-based line of any bad row.
fn read_csv<T: DeserializeOwned, R: Read>(reader: R, file: &str) -> Result<Vec<T>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::Fields)
        .from_reader(reader);
    let mut rows = Vec::new();
    for rec in rdr.deserialize::<T>() {
        match rec {
            Ok(row) => rows.push(row),
            Err(e) => {
                let line = e
                    .position()
                    .map(|p| p.line() as usize)
                    .unwrap_or_default();
                return Err(Error::Malformed {
                    file: file.to_string(),
                    line,
                    message: e.to_string(),
                });
            }
        }
    }
    Ok(rows)
}

fn check_header<R: Read>(reader: R, file: &str, expected: &[&str]) -> Result<()> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::Fields)
        .from_reader(reader);
    let header = rdr.headers().map_err(|e| Error::Malformed {
        file: file.to_string(),
        line: 1,
        message: e.to_string(),
    })?;
    for col in expected {
        if !header.iter().any(|h| h == *col) {
            return Err(Error::Malformed {
                file: file.to_string(),
                line: 1,
                message: format!("missing column `{col}`"),
            });
        }
    }
    Ok(())
}

fn dangling_check<'a>(
    file: &str,
    ids: impl Iterator<Item = &'a str>,
    catalog: &ItemCatalog,
) -> Result<()> {
    let missing: BTreeSet<&str> = ids.filter(|id| !catalog.contains(id)).collect();
    if missing.is_empty() {
        Ok(())
    } else {
        Err(Error::DanglingItems {
            file: file.to_string(),
            ids: missing.into_iter().map(str::to_string).collect(),
        })
    }
}

pub fn load_items(path: &Path) -> Result<ItemCatalog> {
    let name = file_name(path);
    check_header(open(path)?, &name, &["id", "title", "seen_count", "rating_count"])?;
    let items: Vec<Item> = read_csv(open(path)?, &name)?;
    ItemCatalog::new(items).map_err(|e| Error::Malformed {
        file: name,
        line: 0,
        message: e.to_string(),
    })
}

pub fn load_reviews(path: &Path, catalog: &ItemCatalog) -> Result<ReviewStore> {
    let name = file_name(path);
    let reader = BufReader::new(open(path)?);
    let mut reviews = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let review: Review = serde_json::from_str(&line).map_err(|e| Error::Malformed {
            file: name.clone(),
            line: i + 1,
            message: e.to_string(),
        })?;
        if review.text.trim().is_empty() {
            return Err(Error::Malformed {
                file: name,
                line: i + 1,
                message: format!("review `{}` has empty text", review.id),
            });
        }
        reviews.push(review);
    }
    dangling_check(&name, reviews.iter().map(|r| r.item_id.as_str()), catalog)?;
    Ok(ReviewStore::new(reviews))
}

#[derive(Deserialize)]
struct RatingRow {
    user_id: String,
    item_id: String,
    rating: f64,
}

pub fn load_ratings(path: &Path, catalog: &ItemCatalog) -> Result<RatingSet> {
    let name = file_name(path);
    check_header(open(path)?, &name, &["user_id", "item_id", "rating"])?;
    let rows: Vec<RatingRow> = read_csv(open(path)?, &name)?;
    dangling_check(&name, rows.iter().map(|r| r.item_id.as_str()), catalog)?;
    let triples = rows
        .into_iter()
        .map(|r| RatingTriple {
            user_id: r.user_id,
            item_id: r.item_id,
            value: r.rating,
        })
        .collect();
    RatingSet::new(triples).map_err(|e| Error::Malformed {
        file: name,
        line: 0,
        message: e.to_string(),
    })
}

pub fn load_tags(path: &Path, catalog: &ItemCatalog) -> Result<TagAssignments> {
    let name = file_name(path);
    check_header(open(path)?, &name, &["user_id", "item_id", "tag"])?;
    let rows: Vec<TagAssignment> = read_csv(open(path)?, &name)?;
    dangling_check(&name, rows.iter().map(|r| r.item_id.as_str()), catalog)?;
    Ok(TagAssignments { rows })
}
