//! Small dense inverses used by the CRB. Gauss–Jordan with partial pivoting.

use ndarray::Array2;
use num_complex::Complex64;

use crate::{Error, Result};

const SINGULAR_RTOL: f64 = 1e-12;

fn gauss_jordan<T, F>(a: &Array2<T>, abs: F, zero: T, one: T) -> Result<Array2<T>>
where
    T: Copy + std::ops::Sub<Output = T> + std::ops::Mul<Output = T> + std::ops::Div<Output = T>,
    F: Fn(T) -> f64,
{
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::dim(format!("cannot invert a {:?} matrix", a.dim())));
    }
    let scale = a.iter().map(|&z| abs(z)).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(Error::domain("matrix is zero"));
    }
    let mut m = a.clone();
    let mut inv = Array2::from_shape_fn((n, n), |(i, j)| if i == j { one } else { zero });
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| abs(m[[i, col]]).total_cmp(&abs(m[[j, col]])))
            .unwrap();
        if abs(m[[pivot, col]]) <= SINGULAR_RTOL * scale {
            return Err(Error::domain("matrix is singular to working precision"));
        }
        if pivot != col {
            for j in 0..n {
                m.swap([pivot, j], [col, j]);
                inv.swap([pivot, j], [col, j]);
            }
        }
        let p = m[[col, col]];
        for j in 0..n {
            m[[col, j]] = m[[col, j]] / p;
            inv[[col, j]] = inv[[col, j]] / p;
        }
        for i in 0..n {
            if i == col {
                continue;
            }
            let f = m[[i, col]];
            if abs(f) == 0.0 {
                continue;
            }
            for j in 0..n {
                m[[i, j]] = m[[i, j]] - f * m[[col, j]];
                inv[[i, j]] = inv[[i, j]] - f * inv[[col, j]];
            }
        }
    }
    Ok(inv)
}

pub(crate) fn invert_complex(a: &Array2<Complex64>) -> Result<Array2<Complex64>> {
    gauss_jordan(a, |z| z.norm(), Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0))
}

pub(crate) fn invert_real(a: &Array2<f64>) -> Result<Array2<f64>> {
    gauss_jordan(a, f64::abs, 0.0, 1.0)
}
