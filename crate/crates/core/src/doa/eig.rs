//! Dense Hermitian eigensolver.
//!
//! Householder reflections reduce the matrix to Hermitian tridiagonal form,
//! a diagonal phase similarity makes the tridiagonal real, and implicit QL
//! with Wilkinson-style shifts (EISPACK `tql2`) finishes the job. The real
//! rotations are applied directly to the complex basis.

use ndarray::Array2;

use crate::{Error, Result, C64};

/// Relative tolerance for the Hermitian symmetry check.
pub const HERMITIAN_TOL: f64 = 1e-10;

const MAX_QL_SWEEPS: usize = 60;

/// Eigenvalues in descending order with matching unitary eigenvector columns.
#[derive(Debug, Clone)]
pub struct EigenStructure {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Array2<C64>,
}

impl EigenStructure {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }
}

fn frobenius(a: &Array2<C64>) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Full eigendecomposition of a Hermitian matrix.
pub fn hermitian_eig(a: &Array2<C64>) -> Result<EigenStructure> {
    let n = a.nrows();
    if n == 0 || a.ncols() != n {
        return Err(Error::dim(format!(
            "eigendecomposition needs a non-empty square matrix, got {:?}",
            a.dim()
        )));
    }
    if a.iter().any(|z| !z.is_finite()) {
        return Err(Error::domain("matrix has non-finite entries"));
    }
    let scale = frobenius(a).max(f64::MIN_POSITIVE);
    let mut asym = 0.0f64;
    for i in 0..n {
        for j in i..n {
            asym = asym.max((a[[i, j]] - a[[j, i]].conj()).norm());
        }
    }
    if asym > HERMITIAN_TOL * scale {
        return Err(Error::domain(format!(
            "matrix is not Hermitian (max asymmetry {asym:.3e}, norm {scale:.3e})"
        )));
    }

    let mut h = Array2::from_shape_fn((n, n), |(i, j)| 0.5 * (a[[i, j]] + a[[j, i]].conj()));
    let mut basis = Array2::<C64>::eye(n);
    let mut sub = vec![C64::new(0.0, 0.0); n];

    tridiagonalize(&mut h, &mut basis, &mut sub);

    let mut diag: Vec<f64> = (0..n).map(|i| h[[i, i]].re).collect();

    // Rotate each subdiagonal onto the positive real axis.
    let mut phase = C64::new(1.0, 0.0);
    let mut offdiag = vec![0.0; n];
    for i in 0..n.saturating_sub(1) {
        let mag = sub[i].norm();
        offdiag[i] = mag;
        if mag > 0.0 {
            phase *= sub[i] / mag;
        }
        basis.column_mut(i + 1).mapv_inplace(|z| z * phase);
    }

    tql2(&mut diag, &mut offdiag, &mut basis)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| diag[j].total_cmp(&diag[i]));
    let eigenvalues = order.iter().map(|&i| diag[i]).collect();
    let eigenvectors = Array2::from_shape_fn((n, n), |(r, c)| basis[[r, order[c]]]);
    Ok(EigenStructure {
        eigenvalues,
        eigenvectors,
    })
}

/// Reduce `h` in place to tridiagonal form `Q^H A Q`, accumulating `Q` into
/// `basis`. `sub[k]` receives the subdiagonal entry `T[k+1, k]`.
fn tridiagonalize(h: &mut Array2<C64>, basis: &mut Array2<C64>, sub: &mut [C64]) {
    let n = h.nrows();
    let zero = C64::new(0.0, 0.0);
    let mut v = vec![zero; n];
    let mut p = vec![zero; n];

    for k in 0..n.saturating_sub(2) {
        let lo = k + 1;
        let xnorm = (lo..n).map(|i| h[[i, k]].norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            sub[k] = zero;
            continue;
        }
        let x0 = h[[lo, k]];
        let unit = if x0.norm() > 0.0 {
            x0 / x0.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        let alpha = -unit * xnorm;

        // v = (x − α e₁) / ‖x − α e₁‖; the first component never cancels.
        for i in lo..n {
            v[i] = h[[i, k]];
        }
        v[lo] -= alpha;
        let vnorm = (lo..n).map(|i| v[i].norm_sqr()).sum::<f64>().sqrt();
        for vi in v[lo..n].iter_mut() {
            *vi /= vnorm;
        }

        // Trailing block B ← H B H = B − v wᴴ − w vᴴ, w = 2p − 2(vᴴp)v, p = Bv.
        for i in lo..n {
            let mut acc = zero;
            for j in lo..n {
                acc += h[[i, j]] * v[j];
            }
            p[i] = acc;
        }
        let vp: f64 = (lo..n).map(|i| (v[i].conj() * p[i]).re).sum();
        for i in lo..n {
            p[i] = 2.0 * p[i] - 2.0 * vp * v[i];
        }
        for i in lo..n {
            for j in lo..n {
                h[[i, j]] -= v[i] * p[j].conj() + p[i] * v[j].conj();
            }
        }

        h[[lo, k]] = alpha;
        h[[k, lo]] = alpha.conj();
        for i in lo + 1..n {
            h[[i, k]] = zero;
            h[[k, i]] = zero;
        }
        sub[k] = alpha;

        // basis ← basis · H on columns lo..n.
        for r in 0..n {
            let mut acc = zero;
            for j in lo..n {
                acc += basis[[r, j]] * v[j];
            }
            acc *= 2.0;
            for j in lo..n {
                basis[[r, j]] -= acc * v[j].conj();
            }
        }
    }
    if n >= 2 {
        sub[n - 2] = h[[n - 1, n - 2]];
    }
}

/// Implicit QL on a real symmetric tridiagonal matrix (`diag`, `offdiag[i]`
/// coupling rows `i` and `i+1`). Rotations are accumulated into `basis`.
fn tql2(d: &mut [f64], e: &mut [f64], basis: &mut Array2<C64>) -> Result<()> {
    let n = d.len();
    if n == 1 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1 = 0.0f64;

    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }

        if m > l {
            let mut sweeps = 0;
            loop {
                sweeps += 1;
                if sweeps > MAX_QL_SWEEPS {
                    return Err(Error::domain(format!(
                        "QL iteration failed to converge for eigenvalue {l}"
                    )));
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d[l + 2..].iter_mut() {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);

                    for k in 0..basis.nrows() {
                        let hk = basis[[k, i + 1]];
                        let ik = basis[[k, i]];
                        basis[[k, i + 1]] = ik * s + hk * c;
                        basis[[k, i]] = ik * c - hk * s;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}
