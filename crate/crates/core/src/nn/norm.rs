use ndarray::{Array2, ArrayView2, Axis};

use crate::{Error, Result};

/// Per-feature min-max statistics. Features are rows; samples are columns.
#[derive(Debug, Clone, PartialEq)]
pub struct MinMaxStats {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl MinMaxStats {
    /// Statistics that leave data unchanged (min 0, max 1).
    pub fn identity(features: usize) -> Self {
        MinMaxStats {
            min: vec![0.0; features],
            max: vec![1.0; features],
        }
    }

    pub fn len(&self) -> usize {
        self.min.len()
    }

    pub fn is_empty(&self) -> bool {
        self.min.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if self.min.len() != self.max.len() {
            return Err(Error::dim("min and max lists differ in length"));
        }
        if let Some(i) = (0..self.min.len()).find(|&i| !(self.max[i] >= self.min[i])) {
            return Err(Error::domain(format!(
                "feature {i}: max {} < min {}",
                self.max[i], self.min[i]
            )));
        }
        Ok(())
    }

    /// Per-row min and max over all columns.
    pub fn fit(data: ArrayView2<'_, f64>) -> Result<Self> {
        if data.ncols() == 0 {
            return Err(Error::domain("cannot fit min-max statistics on zero samples"));
        }
        let min = data
            .axis_iter(Axis(0))
            .map(|r| r.iter().copied().fold(f64::INFINITY, f64::min))
            .collect();
        let max = data
            .axis_iter(Axis(0))
            .map(|r| r.iter().copied().fold(f64::NEG_INFINITY, f64::max))
            .collect();
        Ok(MinMaxStats { min, max })
    }

    fn check(&self, data: &ArrayView2<'_, f64>) -> Result<()> {
        if data.nrows() != self.len() {
            return Err(Error::dim(format!(
                "data has {} features, statistics cover {}",
                data.nrows(),
                self.len()
            )));
        }
        Ok(())
    }

    /// `(x − min)/(max − min)`; constant features map to 0. No clamping.
    pub fn apply(&self, data: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        self.check(&data)?;
        let mut out = data.to_owned();
        for (i, mut row) in out.axis_iter_mut(Axis(0)).enumerate() {
            let (lo, span) = (self.min[i], self.max[i] - self.min[i]);
            if span > 0.0 {
                row.mapv_inplace(|x| (x - lo) / span);
            } else {
                row.fill(0.0);
            }
        }
        Ok(out)
    }

    /// Inverse of [`apply`](Self::apply); constant features map back to `min`.
    pub fn invert(&self, data: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        self.check(&data)?;
        let mut out = data.to_owned();
        for (i, mut row) in out.axis_iter_mut(Axis(0)).enumerate() {
            let (lo, span) = (self.min[i], self.max[i] - self.min[i]);
            row.mapv_inplace(|x| x * span + lo);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::arr2;
    use proptest::prelude::*;

    #[test]
    fn fit_examples() {
        let d = arr2(&[[-1.0, 3.0, 0.5], [2.0, 2.0, 2.0]]);
        let s = MinMaxStats::fit(d.view()).unwrap();
        assert_eq!((s.min[0], s.max[0]), (-1.0, 3.0));
        assert_eq!((s.min[1], s.max[1]), (2.0, 2.0));
        let n = s.apply(d.view()).unwrap();
        assert_eq!(n.row(0).to_vec(), vec![0.0, 1.0, 0.375]);
        assert_eq!(n.row(1).to_vec(), vec![0.0, 0.0, 0.0]);
        assert!(n.iter().all(|x| (0.0..=1.0).contains(x)));
        assert!(MinMaxStats::fit(Array2::<f64>::zeros((2, 0)).view()).is_err());
    }

    #[test]
    fn unseen_values_are_not_clamped() {
        let s = MinMaxStats::fit(arr2(&[[0.0, 2.0]]).view()).unwrap();
        let n = s.apply(arr2(&[[3.0, -1.0]]).view()).unwrap();
        assert_eq!(n.row(0).to_vec(), vec![1.5, -0.5]);
        assert!(s.apply(arr2(&[[1.0], [1.0]]).view()).is_err());
    }

    proptest! {
        #[test]
        fn round_trip(rows in proptest::collection::vec(proptest::collection::vec(-1e3f64..1e3, 5), 1..5)) {
            let f = rows.len();
            let data = Array2::from_shape_fn((f, 5), |(i, j)| rows[i][j]);
            let s = MinMaxStats::fit(data.view()).unwrap();
            let back = s.invert(s.apply(data.view()).unwrap().view()).unwrap();
            for i in 0..f {
                if s.max[i] > s.min[i] {
                    for j in 0..5 {
                        let x = data[[i, j]];
                        prop_assert!((back[[i, j]] - x).abs() <= 1e-12 * x.abs().max(s.max[i] - s.min[i]));
                    }
                }
            }
        }
    }
}
