//! Face-embedding vectors and the `embeddings.vec` text format.
//!
//! ```text
//! dim=4
//! alice 1.00000000e0 0.00000000e0 -2.50000000e-1 3.33333343e-1
//! bob NOFACE
//! carol ERROR
//! ```
//!
//! Values are written with nine significant digits, which reproduces every
//! `f32` exactly on read.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_IMAGE_THRESHOLD: f64 = 0.65;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImageEmbedding {
    source_id: String,
    vector: Vec<f32>,
}

impl ImageEmbedding {
    pub fn new(source_id: impl Into<String>, vector: Vec<f32>) -> Result<Self> {
        if vector.is_empty() {
            return Err(Error::invalid("embedding must have at least one dimension"));
        }
        if vector.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("embedding entries must be finite"));
        }
        Ok(Self {
            source_id: source_id.into(),
            vector,
        })
    }

    pub fn source_id(&self) -> &str {
        &self.source_id
    }

    pub fn vector(&self) -> &[f32] {
        &self.vector
    }

    pub fn dim(&self) -> usize {
        self.vector.len()
    }

    fn normalized(&self) -> Result<Vec<f64>> {
        let norm = self
            .vector
            .iter()
            .map(|&v| f64::from(v) * f64::from(v))
            .sum::<f64>()
            .sqrt();
        if norm == 0.0 {
            return Err(Error::invalid(format!(
                "embedding `{}` has zero norm",
                self.source_id
            )));
        }
        Ok(self.vector.iter().map(|&v| f64::from(v) / norm).collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImageSimilarityResult {
    /// Euclidean distance between the L2-normalized embeddings.
    pub score: f64,
    /// `score < threshold`.
    pub is_similar: bool,
    pub threshold: f64,
}

pub fn image_similarity(
    emb_a: &ImageEmbedding,
    emb_b: &ImageEmbedding,
    threshold: f64,
) -> Result<ImageSimilarityResult> {
    if emb_a.dim() != emb_b.dim() {
        return Err(Error::invalid(format!(
            "embedding dimensions differ: {} vs {}",
            emb_a.dim(),
            emb_b.dim()
        )));
    }
    let a = emb_a.normalized()?;
    let b = emb_b.normalized()?;
    let score = a
        .iter()
        .zip(&b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt();
    Ok(ImageSimilarityResult {
        score,
        is_similar: score < threshold,
        threshold,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum EmbeddingEntry {
    Vector(ImageEmbedding),
    /// The image was readable but no face was detected.
    NoFace,
    /// The image could not be read.
    Error,
}

/// Embeddings keyed by source id, all of one dimension.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EmbeddingStore {
    dim: usize,
    entries: BTreeMap<String, EmbeddingEntry>,
}

impl EmbeddingStore {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            entries: BTreeMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn insert(&mut self, id: impl Into<String>, entry: EmbeddingEntry) -> Result<()> {
        let id = id.into();
        if id.is_empty() || id.chars().any(char::is_whitespace) {
            return Err(Error::invalid(format!("bad embedding source id `{id}`")));
        }
        if let EmbeddingEntry::Vector(v) = &entry {
            if v.dim() != self.dim {
                return Err(Error::invalid(format!(
                    "embedding `{id}` has dimension {}, store expects {}",
                    v.dim(),
                    self.dim
                )));
            }
        }
        if self.entries.insert(id.clone(), entry).is_some() {
            return Err(Error::data(format!("duplicate embedding source id `{id}`")));
        }
        Ok(())
    }

    pub fn insert_vector(&mut self, embedding: ImageEmbedding) -> Result<()> {
        let id = embedding.source_id().to_string();
        self.insert(id, EmbeddingEntry::Vector(embedding))
    }

    pub fn entry(&self, id: &str) -> Option<&EmbeddingEntry> {
        self.entries.get(id)
    }

    /// The vector for `id`, if one exists (markers yield `None`).
    pub fn vector(&self, id: &str) -> Option<&ImageEmbedding> {
        match self.entries.get(id) {
            Some(EmbeddingEntry::Vector(v)) => Some(v),
            _ => None,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &EmbeddingEntry)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn read<R: Read>(input: R) -> Result<Self> {
        let mut lines = BufReader::new(input).lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::data("embedding file is empty"))??;
        let dim: usize = header
            .trim()
            .strip_prefix("dim=")
            .and_then(|d| d.parse().ok())
            .filter(|&d| d > 0)
            .ok_or_else(|| Error::data(format!("bad embedding header `{header}`")))?;
        let mut store = Self::new(dim);
        for (n, line) in lines.enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let lineno = n + 2;
            let mut fields = line.split_whitespace();
            let id = fields.next().expect("nonempty line has a field");
            let rest: Vec<&str> = fields.collect();
            let entry = match rest.as_slice() {
                ["NOFACE"] => EmbeddingEntry::NoFace,
                ["ERROR"] => EmbeddingEntry::Error,
                values => {
                    if values.len() != dim {
                        return Err(Error::data(format!(
                            "line {lineno}: expected {dim} values, found {}",
                            values.len()
                        )));
                    }
                    let vector = values
                        .iter()
                        .map(|v| v.parse::<f32>())
                        .collect::<std::result::Result<Vec<_>, _>>()
                        .map_err(|e| Error::data(format!("line {lineno}: {e}")))?;
                    let emb = ImageEmbedding::new(id, vector)
                        .map_err(|e| Error::data(format!("line {lineno}: {e}")))?;
                    EmbeddingEntry::Vector(emb)
                }
            };
            store
                .insert(id, entry)
                .map_err(|e| Error::data(format!("line {lineno}: {e}")))?;
        }
        Ok(store)
    }

    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "dim={}", self.dim)?;
        for (id, entry) in &self.entries {
            match entry {
                EmbeddingEntry::NoFace => writeln!(out, "{id} NOFACE")?,
                EmbeddingEntry::Error => writeln!(out, "{id} ERROR")?,
                EmbeddingEntry::Vector(v) => {
                    write!(out, "{id}")?;
                    for x in v.vector() {
                        write!(out, " {x:.8e}")?;
                    }
                    writeln!(out)?;
                }
            }
        }
        Ok(())
    }
}
