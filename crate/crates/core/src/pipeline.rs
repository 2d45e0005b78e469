//! Method dispatch: turns a method name plus corpus artifacts into an item ranking.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::attrmodels::{
    build_centroid, make_pseudo_labels, train_swd, train_wwd, AttributeScorer, LogRegConfig,
    RankSvmConfig, TermBaseline,
};
use crate::corpus::{infer_all, ItemCatalog, Judgment, ReviewStore, SoftAttribute};
use crate::embeddings::FactorModel;
use crate::textrank::{
    build_index, score_item_centric, score_review_centric, Bm25Params, IndexMode, InvertedIndex,
    ScoredList,
};
use crate::{Error, Result, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    TbIc,
    TbRc,
    CbIc,
    CbRc,
    WwdIc,
    WwdRc,
    Swd,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::TbIc,
        Method::TbRc,
        Method::CbIc,
        Method::CbRc,
        Method::WwdIc,
        Method::WwdRc,
        Method::Swd,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::TbIc => "tb-ic",
            Method::TbRc => "tb-rc",
            Method::CbIc => "cb-ic",
            Method::CbRc => "cb-rc",
            Method::WwdIc => "wwd-ic",
            Method::WwdRc => "wwd-rc",
            Method::Swd => "swd",
        }
    }

    /// Term-based ranking the method starts from, if any.
    pub fn baseline(self) -> Option<TermBaseline> {
        match self {
            Method::TbIc | Method::CbIc | Method::WwdIc => Some(TermBaseline::TbIc),
            Method::TbRc | Method::CbRc | Method::WwdRc => Some(TermBaseline::TbRc),
            Method::Swd => None,
        }
    }

    pub fn needs_embeddings(self) -> bool {
        !matches!(self, Method::TbIc | Method::TbRc)
    }

    pub fn needs_judgments(self) -> bool {
        self == Method::Swd
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown method `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodParams<T> {
    pub k: usize,
    pub z: f64,
    pub bm25: Bm25Params,
    pub logreg: LogRegConfig<T>,
    pub svm: RankSvmConfig<T>,
}

impl<T: Scalar> Default for MethodParams<T> {
    fn default() -> Self {
        Self {
            k: 5,
            z: 0.4,
            bm25: Bm25Params::default(),
            logreg: LogRegConfig::default(),
            svm: RankSvmConfig::default(),
        }
    }
}

/// Both review indexes.
#[derive(Debug, Clone)]
pub struct TermIndexes {
    pub items: InvertedIndex,
    pub reviews: InvertedIndex,
}

impl TermIndexes {
    pub fn build(reviews: &ReviewStore) -> Self {
        Self {
            items: build_index(reviews, IndexMode::ItemDocs),
            reviews: build_index(reviews, IndexMode::ReviewDocs),
        }
    }
}

pub struct ScoringContext<'a, T> {
    pub catalog: &'a ItemCatalog,
    pub indexes: &'a TermIndexes,
    pub model: Option<&'a FactorModel<T>>,
    pub params: &'a MethodParams<T>,
}

impl<'a, T: Scalar> ScoringContext<'a, T> {
    pub fn term_ranking(
        &self,
        attribute: &SoftAttribute,
        baseline: TermBaseline,
    ) -> Result<ScoredList<T>> {
        match baseline {
            TermBaseline::TbIc => {
                score_item_centric(attribute, &self.indexes.items, self.catalog, self.params.bm25)
            }
            TermBaseline::TbRc => score_review_centric(
                attribute,
                &self.indexes.reviews,
                self.catalog,
                self.params.bm25,
            ),
        }
    }

    fn model(&self, method: Method) -> Result<&'a FactorModel<T>> {
        self.model.ok_or_else(|| {
            Error::InvalidArgument(format!("method {method} needs item embeddings"))
        })
    }

    /// Ranks every catalog item for `attribute`; `judgments` train SWD and are ignored otherwise.
    pub fn rank(
        &self,
        method: Method,
        attribute: &SoftAttribute,
        judgments: &[&Judgment],
    ) -> Result<ScoredList<T>> {
        let items = || self.catalog.ids();
        match method {
            Method::TbIc | Method::TbRc => self.term_ranking(attribute, method.baseline().unwrap()),
            Method::CbIc | Method::CbRc => {
                let base_kind = method.baseline().unwrap();
                let base = self.term_ranking(attribute, base_kind)?;
                let m = build_centroid(&base, self.params.k, base_kind, self.model(method)?)?;
                m.rank(items(), self.model(method)?)
            }
            Method::WwdIc | Method::WwdRc => {
                let base = self.term_ranking(attribute, method.baseline().unwrap())?;
                let labels = make_pseudo_labels(&base, self.params.z)?;
                let m = train_wwd(&labels, self.model(method)?, &self.params.logreg)?;
                m.rank(items(), self.model(method)?)
            }
            Method::Swd => {
                let prefs = infer_all(
                    judgments
                        .iter()
                        .copied()
                        .filter(|j| j.attribute == attribute.id),
                );
                let (m, _) = train_swd(&attribute.id, &prefs, self.model(method)?, &self.params.svm)?;
                m.rank(items(), self.model(method)?)
            }
        }
    }
}
