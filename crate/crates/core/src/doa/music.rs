use ndarray::{s, Array2};

use super::{hermitian_eig, CovarianceEstimate, EigenStructure};
use crate::array::{steering_matrix, ArrayConfig};
use crate::{Error, Result, C64};

/// Lower clamp on the MUSIC denominator `vᴴ U_n U_nᴴ v`.
pub const DENOMINATOR_FLOOR: f64 = 1e-12;

/// Uniform search grid in degrees, both ends inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleGrid {
    pub lo_deg: f64,
    pub hi_deg: f64,
    pub step_deg: f64,
}

impl AngleGrid {
    /// Largest magnitude a grid point may take; endfire itself is excluded.
    pub const LIMIT_DEG: f64 = 89.9;

    pub fn new(lo_deg: f64, hi_deg: f64, step_deg: f64) -> Result<Self> {
        if !(step_deg > 0.0) || !(lo_deg <= hi_deg) {
            return Err(Error::domain(format!(
                "invalid grid [{lo_deg}, {hi_deg}] step {step_deg}"
            )));
        }
        if lo_deg < -Self::LIMIT_DEG || hi_deg > Self::LIMIT_DEG {
            return Err(Error::domain(format!(
                "grid [{lo_deg}, {hi_deg}] reaches endfire (limit ±{})",
                Self::LIMIT_DEG
            )));
        }
        Ok(AngleGrid {
            lo_deg,
            hi_deg,
            step_deg,
        })
    }

    /// Search grid over a target range widened by `pad_deg` on each side,
    /// clipped short of endfire.
    pub fn padded(range_deg: (f64, f64), pad_deg: f64, step_deg: f64) -> Result<Self> {
        let lo = (range_deg.0 - pad_deg).max(-Self::LIMIT_DEG);
        let hi = (range_deg.1 + pad_deg).min(Self::LIMIT_DEG);
        Self::new(lo, hi, step_deg)
    }

    pub fn len(&self) -> usize {
        ((self.hi_deg - self.lo_deg) / self.step_deg + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len())
            .map(|i| self.lo_deg + i as f64 * self.step_deg)
            .collect()
    }
}

/// MUSIC pseudospectrum sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    pub grid_deg: Vec<f64>,
    pub values: Vec<f64>,
}

/// Peak angles in ascending order. `degenerate` is set when the spectrum had
/// fewer strict local maxima than requested and non-peak samples filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct PeakPick {
    pub angles_deg: Vec<f64>,
    pub degenerate: bool,
}

/// Eigenvectors of the `MN − k` smallest eigenvalues.
pub fn noise_subspace(eig: &EigenStructure, k: usize) -> Result<Array2<C64>> {
    let n = eig.dim();
    if k == 0 || k >= n {
        return Err(Error::domain(format!("signal dimension {k} must satisfy 1 <= k < {n}")));
    }
    Ok(eig.eigenvectors.slice(s![.., k..]).to_owned())
}

fn spectrum_from_steering(un: &Array2<C64>, steering: &Array2<C64>, grid: &AngleGrid) -> Result<SpectrumResult> {
    if un.ncols() == 0 {
        return Err(Error::domain("noise subspace is empty"));
    }
    if un.nrows() != steering.nrows() {
        return Err(Error::dim(format!(
            "noise subspace has {} rows, steering vectors have {}",
            un.nrows(),
            steering.nrows()
        )));
    }
    let proj = un.t().mapv(|z| z.conj()).dot(steering);
    let values = proj
        .columns()
        .into_iter()
        .map(|c| 1.0 / c.iter().map(|z| z.norm_sqr()).sum::<f64>().max(DENOMINATOR_FLOOR))
        .collect();
    Ok(SpectrumResult {
        grid_deg: grid.points(),
        values,
    })
}

fn grid_steering(cfg: &ArrayConfig, grid: &AngleGrid) -> Result<Array2<C64>> {
    let rad: Vec<f64> = grid.points().into_iter().map(f64::to_radians).collect();
    steering_matrix(&rad, cfg)
}

/// `P_MU(θ) = 1 / (vᴴ(θ) U_n U_nᴴ v(θ))` on every grid angle.
pub fn music_spectrum(un: &Array2<C64>, cfg: &ArrayConfig, grid: &AngleGrid) -> Result<SpectrumResult> {
    spectrum_from_steering(un, &grid_steering(cfg, grid)?, grid)
}

/// The `k` largest strict local maxima, ascending by angle.
///
/// Equal peak values prefer the lower angle. Missing peaks are filled from the
/// largest remaining samples and the result is flagged degenerate.
pub fn pick_peaks(spec: &SpectrumResult, k: usize) -> Result<PeakPick> {
    if k == 0 {
        return Err(Error::domain("must request at least one peak"));
    }
    let v = &spec.values;
    let n = v.len();
    if n < k {
        return Err(Error::domain(format!("spectrum has {n} samples, {k} peaks requested")));
    }
    let by_value_then_angle = |&a: &usize, &b: &usize| v[b].total_cmp(&v[a]).then(a.cmp(&b));

    let mut peaks: Vec<usize> = (1..n.saturating_sub(1))
        .filter(|&i| v[i] > v[i - 1] && v[i] > v[i + 1])
        .collect();
    peaks.sort_by(by_value_then_angle);
    peaks.truncate(k);

    let degenerate = peaks.len() < k;
    if degenerate {
        let mut rest: Vec<usize> = (0..n).filter(|i| !peaks.contains(i)).collect();
        rest.sort_by(by_value_then_angle);
        peaks.extend(rest.into_iter().take(k - peaks.len()));
    }
    peaks.sort_unstable();
    Ok(PeakPick {
        angles_deg: peaks.into_iter().map(|i| spec.grid_deg[i]).collect(),
        degenerate,
    })
}

/// `(1/KQ) Σ_q Σ_k (θ̂_{q,k} − θ_{q,k})²` in radians², inputs in degrees.
///
/// Each trial's estimates and truths are sorted ascending before pairing.
pub fn doa_mse(estimates_deg: &[Vec<f64>], truths_deg: &[Vec<f64>]) -> Result<f64> {
    if estimates_deg.len() != truths_deg.len() {
        return Err(Error::dim(format!(
            "{} estimate trials vs {} truth trials",
            estimates_deg.len(),
            truths_deg.len()
        )));
    }
    if estimates_deg.is_empty() {
        return Err(Error::domain("no trials to average"));
    }
    let mut total = 0.0;
    let mut count = 0usize;
    for (q, (est, tru)) in estimates_deg.iter().zip(truths_deg).enumerate() {
        if est.len() != tru.len() || est.is_empty() {
            return Err(Error::dim(format!(
                "trial {q}: {} estimates vs {} truths",
                est.len(),
                tru.len()
            )));
        }
        let mut e = est.clone();
        let mut t = tru.clone();
        e.sort_by(f64::total_cmp);
        t.sort_by(f64::total_cmp);
        total += e.iter().zip(&t).map(|(a, b)| (a - b).to_radians().powi(2)).sum::<f64>();
        count += e.len();
    }
    Ok(total / count as f64)
}

/// MUSIC with a cached grid steering matrix, for repeated trials on one array.
#[derive(Debug, Clone)]
pub struct MusicEstimator {
    array: ArrayConfig,
    grid: AngleGrid,
    targets: usize,
    steering: Array2<C64>,
}

impl MusicEstimator {
    pub fn new(array: ArrayConfig, grid: AngleGrid, targets: usize) -> Result<Self> {
        if targets == 0 || targets >= array.virtual_size() {
            return Err(Error::domain(format!(
                "{targets} targets cannot be resolved by {} virtual elements",
                array.virtual_size()
            )));
        }
        let steering = grid_steering(&array, &grid)?;
        Ok(MusicEstimator {
            array,
            grid,
            targets,
            steering,
        })
    }

    pub fn array(&self) -> &ArrayConfig {
        &self.array
    }

    pub fn grid(&self) -> &AngleGrid {
        &self.grid
    }

    pub fn spectrum(&self, cov: &CovarianceEstimate) -> Result<SpectrumResult> {
        if cov.dim() != self.array.virtual_size() {
            return Err(Error::dim(format!(
                "covariance is {0}x{0}, array has {1} virtual elements",
                cov.dim(),
                self.array.virtual_size()
            )));
        }
        let es = hermitian_eig(&cov.matrix)?;
        let un = noise_subspace(&es, self.targets)?;
        spectrum_from_steering(&un, &self.steering, &self.grid)
    }

    pub fn estimate(&self, cov: &CovarianceEstimate) -> Result<PeakPick> {
        pick_peaks(&self.spectrum(cov)?, self.targets)
    }
}
