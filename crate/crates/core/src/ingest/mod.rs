//! Labeled collections, balanced sampling, and conversion to point sets.

mod manifest;
mod matrix_file;
mod sample;
mod vectorize;

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use serde::Serialize;

pub use manifest::{load_labels, load_labels_from_reader, load_row_labels};
pub use matrix_file::{
    read_matrix, read_matrix_from, write_matrix, write_matrix_to, MATRIX_MAGIC, MATRIX_VERSION,
};
pub use sample::{stratified_sample, uniform_sample};
pub use vectorize::{load_image, vectorize, vectorize_rows, ChannelPolicy, PreprocessSpec};

/// Where an item's pixels come from.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(untagged)]
pub enum SourceRef {
    Path(PathBuf),
    Row(usize),
}

impl fmt::Display for SourceRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SourceRef::Path(p) => write!(f, "{}", p.display()),
            SourceRef::Row(r) => write!(f, "row:{r}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LabeledItem {
    pub source: SourceRef,
    /// 0 = negative, 1 = positive.
    pub label: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LabeledCollection {
    pub name: String,
    pub origin: String,
    pub items: Vec<LabeledItem>,
}

impl LabeledCollection {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn label_counts(&self) -> BTreeMap<u8, usize> {
        let mut counts = BTreeMap::from([(0, 0), (1, 0)]);
        for item in &self.items {
            *counts.entry(item.label).or_default() += 1;
        }
        counts
    }

    pub(crate) fn with_items(&self, items: Vec<LabeledItem>, note: &str) -> Self {
        LabeledCollection {
            name: self.name.clone(),
            origin: format!("{} ({note})", self.origin),
            items,
        }
    }
}
