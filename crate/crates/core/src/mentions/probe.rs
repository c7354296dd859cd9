use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::datasource::DataSource;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankProbeResult {
    pub seed: String,
    pub prefix: String,
    pub ranked_results: Vec<String>,
    /// 1-based.
    pub seed_rank: Option<usize>,
    /// 1-based rank of each known variant present in the results.
    pub variant_ranks: BTreeMap<String, usize>,
    /// Set when the search request failed.
    pub error: Option<String>,
}

/// Issues one prefix search per prefix length of `seed` and records where
/// the seed and each of `variants` rank. Matching is case-insensitive.
pub fn search_rank_probe(
    ds: &dyn DataSource,
    seed: &str,
    variants: &[String],
    max_results: usize,
) -> Result<Vec<RankProbeResult>> {
    if seed.is_empty() || !seed.is_ascii() {
        return Err(Error::invalid(format!("cannot probe seed {seed:?}")));
    }
    if max_results == 0 {
        return Err(Error::invalid("max_results must be positive"));
    }
    let seed_key = seed.to_ascii_lowercase();
    let known: BTreeSet<String> = variants
        .iter()
        .map(|v| v.to_ascii_lowercase())
        .filter(|v| *v != seed_key)
        .collect();
    let mut out = Vec::with_capacity(seed.len());
    for n in 1..=seed.len() {
        let prefix = &seed[..n];
        let mut res = RankProbeResult {
            seed: seed.to_string(),
            prefix: prefix.to_string(),
            ranked_results: Vec::new(),
            seed_rank: None,
            variant_ranks: BTreeMap::new(),
            error: None,
        };
        match ds.search_users(prefix, max_results) {
            Ok(mut names) => {
                names.truncate(max_results);
                for (i, name) in names.iter().enumerate() {
                    let k = name.to_ascii_lowercase();
                    if k == seed_key {
                        res.seed_rank.get_or_insert(i + 1);
                    } else if known.contains(&k) {
                        res.variant_ranks.entry(name.clone()).or_insert(i + 1);
                    }
                }
                res.ranked_results = names;
            }
            Err(e) => res.error = Some(e.to_string()),
        }
        out.push(res);
    }
    Ok(out)
}

/// One row per (prefix, account) with `role` seed or variant.
pub fn render_rank_table(results: &[RankProbeResult]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["prefix", "username", "role", "rank", "error"])?;
    for r in results {
        if let Some(e) = &r.error {
            w.write_record([r.prefix.as_str(), "", "", "", e.as_str()])?;
            continue;
        }
        if let Some(rank) = r.seed_rank {
            w.write_record([r.prefix.as_str(), r.seed.as_str(), "seed", &rank.to_string(), ""])?;
        }
        let mut vs: Vec<(&String, &usize)> = r.variant_ranks.iter().collect();
        vs.sort_by_key(|&(name, rank)| (*rank, name.clone()));
        for (name, rank) in vs {
            w.write_record([r.prefix.as_str(), name.as_str(), "variant", &rank.to_string(), ""])?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
