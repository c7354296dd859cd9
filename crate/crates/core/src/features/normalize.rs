use serde::{Deserialize, Serialize};

use super::{FeatureVector, N_FEATURES};
use crate::error::{Error, Result};

/// Per-feature min-max bounds fitted on training data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalerParams {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl ScalerParams {
    /// Fits bounds column-wise. Constant columns get `(min, min + 1)`.
    pub fn fit_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let first = rows.first().ok_or_else(|| Error::invalid("cannot fit a scaler on no rows"))?;
        let n = first.len();
        let mut min = first.clone();
        let mut max = first.clone();
        for r in rows {
            if r.len() != n {
                return Err(Error::invalid("rows have different widths"));
            }
            for (j, &v) in r.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::invalid(format!("non-finite value in column {j}")));
                }
                min[j] = min[j].min(v);
                max[j] = max[j].max(v);
            }
        }
        for j in 0..n {
            if max[j] == min[j] {
                max[j] = min[j] + 1.0;
            }
        }
        Ok(ScalerParams { min, max })
    }

    pub fn n_features(&self) -> usize {
        self.min.len()
    }

    pub fn scale_value(&self, j: usize, v: f64) -> f64 {
        ((v - self.min[j]) / (self.max[j] - self.min[j])).clamp(0.0, 1.0)
    }

    pub fn apply_row(&self, row: &[f64]) -> Result<Vec<f64>> {
        if row.len() != self.n_features() {
            return Err(Error::invalid(format!(
                "scaler fitted on {} features, row has {}",
                self.n_features(),
                row.len()
            )));
        }
        Ok(row.iter().enumerate().map(|(j, &v)| self.scale_value(j, v)).collect())
    }
}

pub fn fit_normalizer(train: &[FeatureVector]) -> Result<ScalerParams> {
    let rows: Vec<Vec<f64>> = train.iter().map(|f| f.to_array().to_vec()).collect();
    ScalerParams::fit_rows(&rows)
}

/// Scales into `[0, 1]`, clamping values outside the fitted range.
pub fn apply_normalizer(params: &ScalerParams, fv: &FeatureVector) -> FeatureVector {
    debug_assert_eq!(params.n_features(), N_FEATURES);
    let a = fv.to_array();
    FeatureVector::from_array(std::array::from_fn(|j| params.scale_value(j, a[j])))
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn col(values: &[f64]) -> Vec<Vec<f64>> {
        values.iter().map(|&v| vec![v]).collect()
    }

    #[test]
    fn min_max() {
        let p = ScalerParams::fit_rows(&col(&[0.0, 5.0, 10.0])).unwrap();
        let scaled: Vec<f64> = [0.0, 5.0, 10.0].iter().map(|&v| p.scale_value(0, v)).collect();
        assert_eq!(scaled, vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn constant_column() {
        let p = ScalerParams::fit_rows(&col(&[3.0, 3.0, 3.0])).unwrap();
        assert_eq!((p.min[0], p.max[0]), (3.0, 4.0));
        assert_eq!(p.scale_value(0, 3.0), 0.0);
    }

    #[test]
    fn binary_unchanged() {
        let p = ScalerParams::fit_rows(&col(&[0.0, 1.0, 1.0])).unwrap();
        assert_eq!(p.scale_value(0, 0.0), 0.0);
        assert_eq!(p.scale_value(0, 1.0), 1.0);
    }

    #[test]
    fn clamps_out_of_range() {
        let p = ScalerParams::fit_rows(&col(&[2.0, 4.0])).unwrap();
        assert_eq!(p.scale_value(0, 4.0), 1.0);
        assert_eq!(p.scale_value(0, 9.0), 1.0);
        assert_eq!(p.scale_value(0, 2.0), 0.0);
        assert_eq!(p.scale_value(0, -1.0), 0.0);
    }

    #[test]
    fn empty_rejected() {
        assert!(fit_normalizer(&[]).is_err());
        assert!(ScalerParams::fit_rows(&[vec![1.0], vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn width_checked() {
        let p = ScalerParams::fit_rows(&col(&[0.0, 1.0])).unwrap();
        assert!(p.apply_row(&[0.5, 0.5]).is_err());
    }

    proptest! {
        #[test]
        fn idempotent_and_bounded(
            train in prop::collection::vec(prop::array::uniform12(-1e6f64..1e6), 1..20),
            probe in prop::array::uniform12(-2e6f64..2e6),
        ) {
            let train: Vec<FeatureVector> = train.into_iter().map(FeatureVector::from_array).collect();
            let p = fit_normalizer(&train).unwrap();
            let once = apply_normalizer(&p, &FeatureVector::from_array(probe));
            prop_assert!(once.to_array().iter().all(|v| (0.0..=1.0).contains(v)));
            // Refitting on scaled training data yields the unit range, so a
            // second pass leaves scaled vectors untouched.
            let scaled: Vec<FeatureVector> = train.iter().map(|f| apply_normalizer(&p, f)).collect();
            let unit = fit_normalizer(&scaled).unwrap();
            prop_assert_eq!(apply_normalizer(&unit, &once), once);
        }
    }
}
