//! Covariance fidelity metrics and the deterministic Cramér–Rao bound.

use ndarray::{Array1, Array2};

use crate::array::{steering_matrix, virtual_steering, ArrayConfig};
use crate::doa::CovarianceEstimate;
use crate::linalg::{invert_complex, invert_real};
use crate::{Error, Result, C64};

fn frobenius(a: &Array2<C64>) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Relative Frobenius error `‖R_ref − R_pre‖_F / ‖R_ref‖_F`.
pub fn cov_error(r_ref: &CovarianceEstimate, r_pre: &CovarianceEstimate) -> Result<f64> {
    if r_ref.matrix.dim() != r_pre.matrix.dim() {
        return Err(Error::dim(format!(
            "reference covariance {:?} vs predicted {:?}",
            r_ref.matrix.dim(),
            r_pre.matrix.dim()
        )));
    }
    let denom = frobenius(&r_ref.matrix);
    if denom == 0.0 {
        return Err(Error::domain("reference covariance has zero norm"));
    }
    Ok(frobenius(&(&r_ref.matrix - &r_pre.matrix)) / denom)
}

/// Same metric against a reference observed at a shifted (usually higher) SNR.
pub fn cov_error_offset(r_offset_ref: &CovarianceEstimate, r_pre: &CovarianceEstimate) -> Result<f64> {
    cov_error(r_offset_ref, r_pre)
}

/// `∂v/∂θ`: element `(m, n)` is `j·2π(d/λ)(m+n)·cos θ · v[m·N+n]`.
pub fn steering_derivative(theta_rad: f64, cfg: &ArrayConfig) -> Result<Array1<C64>> {
    let v = virtual_steering(theta_rad, cfg)?;
    let w = cfg.phase_factor() * theta_rad.cos();
    let n_rx = cfg.rx_count;
    Ok(Array1::from_shape_fn(v.len(), |idx| {
        let (m, n) = (idx / n_rx, idx % n_rx);
        C64::new(0.0, w * (m + n) as f64) * v[idx]
    }))
}

/// Per-scene CRB in radians².
#[derive(Debug, Clone, PartialEq)]
pub struct CrbResult {
    pub matrix: Array2<f64>,
    pub diagonal_rad2: Vec<f64>,
}

impl CrbResult {
    /// Mean of the per-target bounds, the quantity compared against DOA MSE.
    pub fn mean_rad2(&self) -> f64 {
        self.diagonal_rad2.iter().sum::<f64>() / self.diagonal_rad2.len() as f64
    }
}

/// Deterministic (conditional) CRB for one RCS realization `x` (`K × N_s`):
///
/// `CRB = σ²/(2N_s) · {Re[(A_eᴴ P⊥_A A_e) ⊙ P̂ᵀ]}⁻¹`, with
/// `P⊥_A = I − A(AᴴA)⁻¹Aᴴ` and `P̂ = X Xᴴ / N_s`.
pub fn crb(angles_rad: &[f64], x: &Array2<C64>, sigma2: f64, cfg: &ArrayConfig) -> Result<CrbResult> {
    let k = angles_rad.len();
    if k == 0 {
        return Err(Error::domain("CRB needs at least one target"));
    }
    if x.nrows() != k || x.ncols() == 0 {
        return Err(Error::dim(format!(
            "rcs realization is {:?}, expected {k} rows and at least one snapshot",
            x.dim()
        )));
    }
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return Err(Error::domain(format!("noise variance must be positive, got {sigma2}")));
    }
    let ns = x.ncols();
    let a = steering_matrix(angles_rad, cfg)?;
    let mut ae = Array2::zeros(a.dim());
    for (col, &theta) in angles_rad.iter().enumerate() {
        ae.column_mut(col).assign(&steering_derivative(theta, cfg)?);
    }

    let ah = a.t().mapv(|z| z.conj());
    let gram_inv =
        invert_complex(&ah.dot(&a)).map_err(|e| Error::domain(format!("steering matrix is rank deficient: {e}")))?;
    // P⊥ A_e = A_e − A (AᴴA)⁻¹ Aᴴ A_e
    let proj_ae = &ae - &a.dot(&gram_inv.dot(&ah.dot(&ae)));
    let h = ae.t().mapv(|z| z.conj()).dot(&proj_ae);
    let p_hat = x.dot(&x.t().mapv(|z| z.conj())).mapv(|z| z / ns as f64);

    let fisher = Array2::from_shape_fn((k, k), |(i, j)| (h[[i, j]] * p_hat[[j, i]]).re);
    let inv = invert_real(&fisher).map_err(|e| Error::domain(format!("CRB information matrix is singular: {e}")))?;
    let matrix = inv.mapv(|v| v * sigma2 / (2.0 * ns as f64));
    let diagonal_rad2 = matrix.diag().to_vec();
    Ok(CrbResult { matrix, diagonal_rad2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::draw_rcs;
    use crate::rng::seeded;
    use std::f64::consts::PI;

    fn cov(m: Array2<C64>) -> CovarianceEstimate {
        CovarianceEstimate {
            matrix: m,
            snapshots_used: 1,
        }
    }

    #[test]
    fn covariance_error_examples() {
        let r = Array2::from_shape_fn((3, 3), |(i, j)| C64::new((i + j) as f64, i as f64 - j as f64));
        assert_eq!(cov_error(&cov(r.clone()), &cov(r.clone())).unwrap(), 0.0);
        assert!((cov_error(&cov(r.clone()), &cov(Array2::zeros((3, 3)))).unwrap() - 1.0).abs() < 1e-15);
        assert!((cov_error(&cov(r.clone()), &cov(r.mapv(|z| z * 2.0))).unwrap() - 1.0).abs() < 1e-15);
        assert!(cov_error(&cov(Array2::zeros((3, 3))), &cov(r.clone())).is_err());
        assert!(cov_error(&cov(r.clone()), &cov(Array2::zeros((2, 2)))).is_err());
        assert_eq!(
            cov_error_offset(&cov(r.clone()), &cov(r.mapv(|z| z * 0.5))).unwrap(),
            cov_error(&cov(r.clone()), &cov(r.mapv(|z| z * 0.5))).unwrap()
        );
    }

    #[test]
    fn derivative_at_broadside() {
        let cfg = ArrayConfig::new(2, 2).unwrap();
        let d = steering_derivative(0.0, &cfg).unwrap();
        let expected = [0.0, 1.0, 1.0, 2.0].map(|s| C64::new(0.0, PI * s));
        for (a, b) in d.iter().zip(expected) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn derivative_matches_central_differences() {
        let h = 1e-7;
        for (m, n) in [(2, 3), (4, 4), (5, 1)] {
            let cfg = ArrayConfig::new(m, n).unwrap();
            for theta in [-1.2, -0.4, 0.0, 0.3, 0.9, 1.3] {
                let d = steering_derivative(theta, &cfg).unwrap();
                assert_eq!(d[0], C64::new(0.0, 0.0));
                let fd = (virtual_steering(theta + h, &cfg).unwrap() - virtual_steering(theta - h, &cfg).unwrap())
                    / C64::new(2.0 * h, 0.0);
                let num: f64 = (&d - &fd).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                let den: f64 = d.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                assert!(num / den < 1e-6, "({m},{n}) θ={theta}: {}", num / den);
            }
        }
    }

    #[test]
    fn single_target_hand_evaluation() {
        // A = [1,1,1,1]ᵀ, A_e = jπ[0,1,1,2]ᵀ, P⊥A_e = jπ[−1,0,0,1]ᵀ,
        // A_eᴴP⊥A_e = 2π², P̂ = 1  ⇒  CRB = σ²/(2N_s) / (2π²).
        let cfg = ArrayConfig::new(2, 2).unwrap();
        let ns = 4;
        let x = Array2::from_elem((1, ns), C64::new(1.0, 0.0));
        let r = crb(&[0.0], &x, 1.0, &cfg).unwrap();
        let expected = 1.0 / (2.0 * ns as f64) / (2.0 * PI * PI);
        assert!((r.diagonal_rad2[0] - expected).abs() < 1e-15, "{}", r.diagonal_rad2[0]);
    }

    #[test]
    fn linear_in_noise_variance() {
        let cfg = ArrayConfig::new(4, 4).unwrap();
        let angles: Vec<f64> = [21.0f64, 28.0, 35.5, 44.0].iter().map(|d| d.to_radians()).collect();
        let x = draw_rcs(4, 150, &mut seeded(3)).unwrap();
        let base = crb(&angles, &x, 0.7, &cfg).unwrap();
        let doubled = crb(&angles, &x, 1.4, &cfg).unwrap();
        for (a, b) in base.diagonal_rad2.iter().zip(&doubled.diagonal_rad2) {
            assert!(*a > 0.0);
            assert!((b / a - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_scenes_are_errors() {
        let cfg = ArrayConfig::new(3, 3).unwrap();
        let x = draw_rcs(2, 10, &mut seeded(1)).unwrap();
        assert!(crb(&[0.2, 0.2], &x, 1.0, &cfg).is_err());
        assert!(crb(&[0.2, 0.3], &x, 0.0, &cfg).is_err());
        assert!(crb(&[0.2], &x, 1.0, &cfg).is_err());
    }
}
