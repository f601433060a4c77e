//! Subspace direction-of-arrival estimation with MUSIC.

mod eig;
mod music;

pub use eig::{hermitian_eig, EigenStructure, HERMITIAN_TOL};
pub use music::{
    doa_mse, music_spectrum, noise_subspace, pick_peaks, AngleGrid, MusicEstimator, PeakPick, SpectrumResult,
    DENOMINATOR_FLOOR,
};

use std::ops::Range;

use ndarray::{s, Array2, ArrayView2};

use crate::array::SnapshotBlock;
use crate::{Error, Result, C64};

/// Sample covariance over `N_s` snapshots.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceEstimate {
    pub matrix: Array2<C64>,
    pub snapshots_used: usize,
}

impl CovarianceEstimate {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// `R = (1/N_s) Σ_p y_p y_pᴴ` over the pulse `window`, symmetrized.
pub fn sample_covariance(data: ArrayView2<'_, C64>, window: Range<usize>) -> Result<CovarianceEstimate> {
    if window.start >= window.end {
        return Err(Error::domain("covariance window is empty"));
    }
    if window.end > data.ncols() {
        return Err(Error::dim(format!(
            "window {:?} exceeds {} available snapshots",
            window,
            data.ncols()
        )));
    }
    let ns = window.len();
    let y = data.slice(s![.., window]);
    let yh = y.t().mapv(|z| z.conj());
    let r = y.dot(&yh);
    let n = r.nrows();
    let scale = 1.0 / ns as f64;
    let matrix = Array2::from_shape_fn((n, n), |(i, j)| 0.5 * scale * (r[[i, j]] + r[[j, i]].conj()));
    Ok(CovarianceEstimate {
        matrix,
        snapshots_used: ns,
    })
}

impl SnapshotBlock {
    /// Sample covariance of this block over a pulse window.
    pub fn covariance(&self, window: Range<usize>) -> Result<CovarianceEstimate> {
        sample_covariance(self.data.view(), window)
    }
}
