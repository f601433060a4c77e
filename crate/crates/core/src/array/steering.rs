use ndarray::{Array1, Array2};

use super::{check_angle, ArrayConfig};
use crate::{Error, Result, C64};

fn ula_steering(theta_rad: f64, count: usize, cfg: &ArrayConfig) -> Result<Array1<C64>> {
    check_angle(theta_rad)?;
    let step = cfg.phase_factor() * theta_rad.sin();
    Ok(Array1::from_iter(
        (0..count).map(|i| C64::from_polar(1.0, step * i as f64)),
    ))
}

/// TX steering vector `a_t(θ)`, element `m` is `exp(j·2π(d/λ)·m·sin θ)`.
pub fn steering_tx(theta_rad: f64, cfg: &ArrayConfig) -> Result<Array1<C64>> {
    ula_steering(theta_rad, cfg.tx_count, cfg)
}

/// RX steering vector `a_r(θ)`.
pub fn steering_rx(theta_rad: f64, cfg: &ArrayConfig) -> Result<Array1<C64>> {
    ula_steering(theta_rad, cfg.rx_count, cfg)
}

/// Virtual steering vector `v(θ) = a_t(θ) ⊗ a_r(θ)`.
///
/// Layout is TX-major: element `m·N + n` is `a_t[m]·a_r[n]`.
pub fn virtual_steering(theta_rad: f64, cfg: &ArrayConfig) -> Result<Array1<C64>> {
    let at = steering_tx(theta_rad, cfg)?;
    let ar = steering_rx(theta_rad, cfg)?;
    Ok(Array1::from_iter(
        at.iter().flat_map(|&t| ar.iter().map(move |&r| t * r)),
    ))
}

/// Steering matrix `A(θ)` with one virtual steering column per angle.
pub fn steering_matrix(angles_rad: &[f64], cfg: &ArrayConfig) -> Result<Array2<C64>> {
    if angles_rad.is_empty() {
        return Err(Error::domain("steering matrix needs at least one angle"));
    }
    let mut a = Array2::zeros((cfg.virtual_size(), angles_rad.len()));
    for (k, &theta) in angles_rad.iter().enumerate() {
        a.column_mut(k).assign(&virtual_steering(theta, cfg)?);
    }
    Ok(a)
}
