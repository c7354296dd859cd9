use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::features::ScalerParams;
use crate::learn::ForestModel;

const TAG: &str = "squadkit-bundle 1";

/// A trained forest together with the scaler fitted on its training split.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelBundle {
    pub forest: ForestModel,
    pub scaler: ScalerParams,
}

fn floats(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(" ")
}

fn read_floats(line: &str, key: &str) -> Result<Vec<f64>> {
    let mut it = line.split(' ');
    if it.next() != Some(key) {
        return Err(Error::data(format!("expected `{key}` line in model bundle")));
    }
    it.map(|t| t.parse::<f64>().map_err(|_| Error::data(format!("bad {key} value `{t}`"))))
        .collect()
}

impl ModelBundle {
    pub fn new(forest: ForestModel, scaler: ScalerParams) -> Result<Self> {
        if scaler.n_features() != forest.feature_order().len() {
            return Err(Error::invalid("scaler and forest disagree on feature count"));
        }
        Ok(ModelBundle { forest, scaler })
    }

    pub fn to_text(&self) -> String {
        format!(
            "{TAG}\nscaler-min {}\nscaler-max {}\n{}",
            floats(&self.scaler.min),
            floats(&self.scaler.max),
            self.forest.to_text()
        )
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(self.to_text().as_bytes())?;
        Ok(())
    }

    pub fn read_from<R: BufRead>(mut input: R) -> Result<Self> {
        let mut line = |what: &str| -> Result<String> {
            let mut s = String::new();
            if input.read_line(&mut s)? == 0 {
                return Err(Error::data(format!("model bundle ended before {what}")));
            }
            Ok(s.trim_end_matches(['\n', '\r']).to_string())
        };
        if line("header")? != TAG {
            return Err(Error::data("not a model bundle"));
        }
        let min = read_floats(&line("scaler-min")?, "scaler-min")?;
        let max = read_floats(&line("scaler-max")?, "scaler-max")?;
        if min.len() != max.len() || min.iter().zip(&max).any(|(a, b)| a.partial_cmp(b) != Some(std::cmp::Ordering::Less)) {
            return Err(Error::data("scaler bounds are inconsistent"));
        }
        let forest = ForestModel::read_from(input)?;
        ModelBundle::new(forest, ScalerParams { min, max }).map_err(|e| Error::data(e.to_string()))
    }

    /// Loads a bundle; a missing file is a configuration error.
    pub fn load(path: &Path) -> Result<Self> {
        let f = File::open(path).map_err(|e| Error::Config(format!("cannot open model {}: {e}", path.display())))?;
        Self::read_from(BufReader::new(f))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}
