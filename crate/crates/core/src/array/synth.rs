use ndarray::Array2;
use rand::Rng;

use super::{steering_matrix, ArrayConfig, TargetScene};
use crate::rng::complex_normal;
use crate::{Error, Result, C64};

/// Virtual-array observations `Y` of one setup, one column per pulse.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotBlock {
    /// `(M·N) × P` complex samples.
    pub data: Array2<C64>,
    pub snr_db: f64,
    pub array: ArrayConfig,
}

impl SnapshotBlock {
    pub fn new(data: Array2<C64>, snr_db: f64, array: ArrayConfig) -> Result<Self> {
        if data.nrows() != array.virtual_size() {
            return Err(Error::dim(format!(
                "block has {} rows but the {} array has {} virtual elements",
                data.nrows(),
                array,
                array.virtual_size()
            )));
        }
        Ok(SnapshotBlock { data, snr_db, array })
    }

    pub fn pulse_count(&self) -> usize {
        self.data.ncols()
    }
}

/// Per-entry noise variance for a given SNR.
///
/// With unit-power targets, `SNR_dB = −10·log10(σ²)`. `+∞` maps to a
/// noiseless block.
pub fn snr_to_noise_var(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 10.0)
}

fn add_noise<R: Rng + ?Sized>(data: &mut Array2<C64>, sigma: f64, rng: &mut R) {
    // Draw even when sigma is zero so the stream position does not depend on SNR.
    for z in data.iter_mut() {
        *z += complex_normal(rng) * sigma;
    }
}

/// Snapshots of a single array: `Y = A(θ) X + N`.
pub fn synthesize<R: Rng + ?Sized>(
    scene: &TargetScene,
    array: &ArrayConfig,
    snr_db: f64,
    rng: &mut R,
) -> Result<SnapshotBlock> {
    array.check_target_count(scene.target_count())?;
    let mut data = steering_matrix(&scene.angles_rad, array)?.dot(&scene.rcs);
    add_noise(&mut data, snr_to_noise_var(snr_db).sqrt(), rng);
    SnapshotBlock::new(data, snr_db, *array)
}

/// Noise-only block (no targets), i.i.d. CN(0, σ²) per entry.
pub fn noise_block<R: Rng + ?Sized>(
    array: &ArrayConfig,
    pulses: usize,
    snr_db: f64,
    rng: &mut R,
) -> Result<SnapshotBlock> {
    let mut data = Array2::zeros((array.virtual_size(), pulses));
    add_noise(&mut data, snr_to_noise_var(snr_db).sqrt(), rng);
    SnapshotBlock::new(data, snr_db, *array)
}

/// Low and high setup observations of the same targets and the same RCS.
///
/// Noise is independent between the two blocks. The low block's noise is
/// drawn first, then the high block's; both are drawn at unit variance and
/// scaled, so two calls with the same generator state and different SNRs see
/// identical noise shapes.
pub fn synthesize_pair<R: Rng + ?Sized>(
    scene: &TargetScene,
    low: &ArrayConfig,
    high: &ArrayConfig,
    snr_db: f64,
    rng: &mut R,
) -> Result<(SnapshotBlock, SnapshotBlock)> {
    low.check_target_count(scene.target_count())
        .map_err(|e| Error::domain(format!("low array: {e}")))?;
    high.check_target_count(scene.target_count())
        .map_err(|e| Error::domain(format!("high array: {e}")))?;
    let lo = synthesize(scene, low, snr_db, rng)?;
    let hi = synthesize(scene, high, snr_db, rng)?;
    Ok((lo, hi))
}
