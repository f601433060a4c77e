//! Virtual-array signal model for co-located MIMO radar.
//!
//! Snapshots are produced directly in the post-matched-filter domain:
//! `Y = A(θ) X + N`, one column per pulse, with `A(θ) = [v(θ_1), …, v(θ_K)]`
//! and `v(θ) = a_t(θ) ⊗ a_r(θ)`.

mod scene;
mod steering;
mod synth;

pub use scene::{draw_rcs, draw_scene, TargetScene, MAX_SCENE_REJECTIONS};
pub use steering::{steering_matrix, steering_rx, steering_tx, virtual_steering};
pub use synth::{noise_block, snr_to_noise_var, synthesize, synthesize_pair, SnapshotBlock};

use crate::{Error, Result};

/// Geometry of one TX/RX uniform linear array pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayConfig {
    pub tx_count: usize,
    pub rx_count: usize,
    /// Element spacing `d/λ`, shared by the TX and RX arrays.
    pub spacing_wavelengths: f64,
}

impl ArrayConfig {
    pub const DEFAULT_SPACING: f64 = 0.5;

    pub fn new(tx_count: usize, rx_count: usize) -> Result<Self> {
        Self::with_spacing(tx_count, rx_count, Self::DEFAULT_SPACING)
    }

    pub fn with_spacing(tx_count: usize, rx_count: usize, spacing_wavelengths: f64) -> Result<Self> {
        let cfg = ArrayConfig {
            tx_count,
            rx_count,
            spacing_wavelengths,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.tx_count == 0 || self.rx_count == 0 {
            return Err(Error::domain(format!(
                "array needs at least one TX and one RX antenna, got {}x{}",
                self.tx_count, self.rx_count
            )));
        }
        if !(self.spacing_wavelengths > 0.0 && self.spacing_wavelengths.is_finite()) {
            return Err(Error::domain(format!(
                "element spacing must be positive, got {}",
                self.spacing_wavelengths
            )));
        }
        Ok(())
    }

    /// Number of virtual elements `M·N`.
    pub fn virtual_size(&self) -> usize {
        self.tx_count * self.rx_count
    }

    /// Phase increment per element index per unit `sin θ`: `2π·d/λ`.
    pub(crate) fn phase_factor(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.spacing_wavelengths
    }

    /// Upper end of the identifiability interval
    /// `[(2(M+N)−5)/3, 2MN/3)`; scenes must have strictly fewer targets.
    pub fn identifiability_limit(&self) -> f64 {
        2.0 * self.virtual_size() as f64 / 3.0
    }

    /// Check that `k` targets are identifiable by this array.
    pub fn check_target_count(&self, k: usize) -> Result<()> {
        let limit = self.identifiability_limit();
        if (k as f64) >= limit {
            return Err(Error::domain(format!(
                "{k} targets exceed the identifiability limit 2MN/3 = {limit:.2} of the {}x{} array",
                self.tx_count, self.rx_count
            )));
        }
        Ok(())
    }
}

impl std::fmt::Display for ArrayConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}x{} (d/λ={})",
            self.tx_count, self.rx_count, self.spacing_wavelengths
        )
    }
}

pub(crate) fn check_angle(theta_rad: f64) -> Result<()> {
    if !(theta_rad.abs() < std::f64::consts::FRAC_PI_2) {
        return Err(Error::domain(format!(
            "angle {theta_rad} rad is outside the open interval (-π/2, π/2)"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_arrays_and_bad_spacing() {
        assert!(ArrayConfig::new(0, 4).is_err());
        assert!(ArrayConfig::new(4, 0).is_err());
        assert!(ArrayConfig::with_spacing(2, 2, 0.0).is_err());
        assert!(ArrayConfig::with_spacing(2, 2, f64::NAN).is_err());
        assert_eq!(ArrayConfig::new(10, 10).unwrap().virtual_size(), 100);
    }

    #[test]
    fn identifiability_limit() {
        // 2·16/3 = 10.67
        let desk = ArrayConfig::new(4, 4).unwrap();
        assert!(desk.check_target_count(4).is_ok());
        assert!(desk.check_target_count(10).is_ok());
        assert!(desk.check_target_count(11).is_err());
        // 2·4/3 = 2.67
        let tiny = ArrayConfig::new(2, 2).unwrap();
        assert!(tiny.check_target_count(2).is_ok());
        assert!(tiny.check_target_count(3).is_err());
    }
}
