//! Observables and the standard operator sets (Pauli, spin-1).

use crate::error::{Error, Result};
use crate::matops::{self, TOL};
use crate::scalar::{c, cr, CMatrix, Real};

/// A Hermitian operator.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable<T: Real = f64>(CMatrix<T>);

impl<T: Real> Observable<T> {
    pub fn new(m: CMatrix<T>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Dimension {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        let asym = matops::max_asymmetry(&m);
        if asym > matops::scaled_tol(TOL, m.norm()) {
            return Err(Error::NotHermitian {
                asymmetry: asym.to_f64_lossy(),
            });
        }
        Ok(Self(matops::hermitian_part(&m)))
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix<T> {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    /// `A + shift * I`.
    pub fn shifted(&self, shift: T) -> Self {
        Self(&self.0 + matops::identity::<T>(self.dim()) * cr(shift))
    }

    pub fn scaled(&self, factor: T) -> Self {
        Self(&self.0 * cr(factor))
    }

    /// `n . sigma` for a 3-vector `n`.
    pub fn bloch(n: [T; 3]) -> Self {
        Self(pauli_x::<T>() * cr(n[0]) + pauli_y::<T>() * cr(n[1]) + pauli_z::<T>() * cr(n[2]))
    }

    pub fn pauli_x() -> Self {
        Self(pauli_x())
    }

    pub fn pauli_y() -> Self {
        Self(pauli_y())
    }

    pub fn pauli_z() -> Self {
        Self(pauli_z())
    }

    pub fn spin1_x() -> Self {
        Self(spin1_x())
    }

    pub fn spin1_y() -> Self {
        Self(spin1_y())
    }

    pub fn spin1_z() -> Self {
        Self(spin1_z())
    }

    pub fn diagonal(values: &[T]) -> Self {
        let n = values.len();
        let mut m = CMatrix::zeros(n, n);
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = cr(v);
        }
        Self(m)
    }
}

pub fn pauli_x<T: Real>() -> CMatrix<T> {
    CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])
}

pub fn pauli_y<T: Real>() -> CMatrix<T> {
    CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)])
}

pub fn pauli_z<T: Real>() -> CMatrix<T> {
    CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)])
}

/// `|0><1|`, the qubit lowering operator.
pub fn sigma_minus<T: Real>() -> CMatrix<T> {
    CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(0., 0.), c(0., 0.)])
}

/// Spin-1 `J_x = tridiag(1) / sqrt 2` in the `|m=1,0,-1>` basis, hbar = 1.
pub fn spin1_x<T: Real>() -> CMatrix<T> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    #[rustfmt::skip]
    let m = CMatrix::from_row_slice(3, 3, &[
        c(0., 0.), c(s, 0.), c(0., 0.),
        c(s, 0.), c(0., 0.), c(s, 0.),
        c(0., 0.), c(s, 0.), c(0., 0.),
    ]);
    m
}

pub fn spin1_y<T: Real>() -> CMatrix<T> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    #[rustfmt::skip]
    let m = CMatrix::from_row_slice(3, 3, &[
        c(0., 0.), c(0., -s), c(0., 0.),
        c(0., s), c(0., 0.), c(0., -s),
        c(0., 0.), c(0., s), c(0., 0.),
    ]);
    m
}

pub fn spin1_z<T: Real>() -> CMatrix<T> {
    #[rustfmt::skip]
    let m = CMatrix::from_row_slice(3, 3, &[
        c(1., 0.), c(0., 0.), c(0., 0.),
        c(0., 0.), c(0., 0.), c(0., 0.),
        c(0., 0.), c(0., 0.), c(-1., 0.),
    ]);
    m
}
