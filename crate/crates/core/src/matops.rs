//! Dense complex-matrix kernel: Hermitian eigendecomposition, spectral
//! matrix functions, operator norm and numerical radius.

use nalgebra::{Complex, ComplexField, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::scalar::{cr, CMatrix, CVector, Real};

/// Shared tolerance. Absolute for matrices of norm at most one, relative
/// above that (see [`scaled_tol`]).
pub const TOL: f64 = 1e-10;

/// Eigenvalues of positive semidefinite inputs in `(-PSD_CLAMP, 0)` are
/// treated as zero.
pub const PSD_CLAMP: f64 = 1e-12;

/// Default number of grid points for [`numerical_radius`].
pub const NUMRAD_SAMPLES: usize = 512;

const NUMRAD_MIN_SAMPLES: usize = 64;
const GOLDEN_THETA_TOL: f64 = 1e-8;

/// `tol` applied absolutely when `norm <= 1`, relatively otherwise.
pub fn scaled_tol<T: Real>(tol: f64, norm: T) -> T {
    let t = T::tol(tol);
    if norm > T::one() {
        t * norm
    } else {
        t
    }
}

pub fn identity<T: Real>(dim: usize) -> CMatrix<T> {
    CMatrix::identity(dim, dim)
}

pub fn max_abs<T: Real>(m: &CMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, z| acc.max(z.modulus()))
}

/// Largest entry of `|M - M^dag|`.
pub fn max_asymmetry<T: Real>(m: &CMatrix<T>) -> T {
    max_abs(&(m - m.adjoint()))
}

pub fn is_hermitian<T: Real>(m: &CMatrix<T>, tol: f64) -> bool {
    m.is_square() && max_asymmetry(m) <= scaled_tol(tol, m.norm())
}

pub fn hermitian_part<T: Real>(m: &CMatrix<T>) -> CMatrix<T> {
    (m + m.adjoint()) * cr(T::lit(0.5))
}

pub fn commutator<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    a * b - b * a
}

pub fn anticommutator<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    a * b + b * a
}

pub fn kron<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    a.kronecker(b)
}

/// `Tr(A B)` without forming the product.
pub fn trace_product<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> Complex<T> {
    let n = a.nrows();
    let mut acc = Complex::new(T::zero(), T::zero());
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// `<u|v>` (conjugate-linear in the first argument).
pub fn inner<T: Real>(u: &CVector<T>, v: &CVector<T>) -> Complex<T> {
    u.dotc(v)
}

/// Spectral data of a Hermitian matrix with eigenvalues in ascending order.
#[derive(Debug, Clone)]
pub struct EigenSystem<T: Real> {
    pub values: DVector<T>,
    /// Orthonormal eigenvectors stored as columns, matching `values`.
    pub vectors: CMatrix<T>,
}

impl<T: Real> EigenSystem<T> {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn min(&self) -> T {
        self.values[0]
    }

    pub fn max(&self) -> T {
        self.values[self.values.len() - 1]
    }

    pub fn vector(&self, i: usize) -> CVector<T> {
        self.vectors.column(i).into_owned()
    }

    /// `V f(Λ) V^dag`.
    pub fn map(&self, f: impl Fn(T) -> T) -> CMatrix<T> {
        let n = self.dim();
        let mut scaled = self.vectors.clone();
        for j in 0..n {
            let fj = cr(f(self.values[j]));
            for i in 0..n {
                scaled[(i, j)] *= fj;
            }
        }
        scaled * self.vectors.adjoint()
    }

    pub fn reconstruct(&self) -> CMatrix<T> {
        self.map(|x| x)
    }
}

/// Eigendecomposition of a Hermitian matrix.
pub fn herm_eig<T: Real>(h: &CMatrix<T>) -> Result<EigenSystem<T>> {
    if !h.is_square() {
        return Err(Error::Dimension {
            expected: h.nrows(),
            found: h.ncols(),
        });
    }
    let asym = max_asymmetry(h);
    if asym > scaled_tol(TOL, h.norm()) {
        return Err(Error::NotHermitian {
            asymmetry: asym.to_f64_lossy(),
        });
    }
    Ok(eig_hermitized(h))
}

/// Eigendecomposition of the Hermitian part of `h`, skipping the check.
pub(crate) fn eig_hermitized<T: Real>(h: &CMatrix<T>) -> EigenSystem<T> {
    let n = h.nrows();
    let eig = SymmetricEigen::new(hermitian_part(h));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[i]
            .partial_cmp(&eig.eigenvalues[j])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    EigenSystem { values, vectors }
}

/// Eigenvalues only, ascending.
pub fn herm_eigvals<T: Real>(h: &CMatrix<T>) -> Result<Vec<T>> {
    herm_eig(h).map(|e| e.values.iter().copied().collect())
}

/// Where a spectral function is defined.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    All,
    /// `[0, inf)`, eigenvalues in `(-PSD_CLAMP, 0)` clamped to zero.
    NonNegative,
    /// `(0, inf)`; values within `PSD_CLAMP` of zero are rejected.
    Positive,
}

/// `V f(Λ) V^dag` for Hermitian `h`.
pub fn herm_fn<T: Real>(h: &CMatrix<T>, f: impl Fn(T) -> T, domain: Domain) -> Result<CMatrix<T>> {
    let eig = herm_eig(h)?;
    let clamp = T::tol(PSD_CLAMP);
    for &v in eig.values.iter() {
        let bad = match domain {
            Domain::All => false,
            Domain::NonNegative => v <= -clamp,
            Domain::Positive => v <= clamp,
        };
        if bad {
            return Err(Error::Domain {
                eigenvalue: v.to_f64_lossy(),
            });
        }
    }
    Ok(eig.map(|x| match domain {
        Domain::NonNegative => f(x.max(T::zero())),
        _ => f(x),
    }))
}

pub fn herm_exp<T: Real>(h: &CMatrix<T>) -> Result<CMatrix<T>> {
    herm_fn(h, |x| x.exp(), Domain::All)
}

pub fn psd_sqrt<T: Real>(h: &CMatrix<T>) -> Result<CMatrix<T>> {
    herm_fn(h, |x| x.sqrt(), Domain::NonNegative)
}

/// `H^p` for positive semidefinite `H` and `p > 0`.
pub fn psd_pow<T: Real>(h: &CMatrix<T>, p: T) -> Result<CMatrix<T>> {
    herm_fn(
        h,
        |x| if x == T::zero() { T::zero() } else { x.powf(p) },
        Domain::NonNegative,
    )
}

/// `Tr e^{s H}` from the spectrum, shifted for overflow safety.
pub fn trace_exp<T: Real>(h: &CMatrix<T>, s: T) -> Result<T> {
    Ok(log_trace_exp(h, s)?.exp())
}

/// `ln Tr e^{s H}`, evaluated as a log-sum-exp.
pub fn log_trace_exp<T: Real>(h: &CMatrix<T>, s: T) -> Result<T> {
    let eig = herm_eig(h)?;
    let scaled: Vec<T> = eig.values.iter().map(|&v| s * v).collect();
    let top = scaled
        .iter()
        .copied()
        .fold(T::min_value().unwrap_or(-T::infinity()), |a, b| a.max(b));
    let sum = scaled
        .iter()
        .fold(T::zero(), |acc, &x| acc + (x - top).exp());
    Ok(top + sum.ln())
}

pub fn spectral_radius<T: Real>(h: &CMatrix<T>) -> Result<T> {
    let eig = herm_eig(h)?;
    Ok(eig.min().abs().max(eig.max().abs()))
}

/// Largest singular value, from the top eigenvalue of `T^dag T`.
pub fn op_norm<T: Real>(t: &CMatrix<T>) -> T {
    if t.nrows() == 0 {
        return T::zero();
    }
    let gram = t.adjoint() * t;
    eig_hermitized(&gram).max().max(T::zero()).sqrt()
}

/// `lambda_max((e^{i theta} T + e^{-i theta} T^dag) / 2)`.
fn rotated_top<T: Real>(t: &CMatrix<T>, theta: T) -> T {
    let phase = Complex::new(theta.cos(), theta.sin());
    let rotated = t * phase;
    eig_hermitized(&rotated).max()
}

/// Numerical radius `w(T) = max_{|phi|=1} |<phi|T|phi>|`.
///
/// Evaluated as `max_theta lambda_max(Re(e^{i theta} T))` on a uniform grid
/// of `samples` points, then refined by golden-section search inside the
/// cells adjacent to the best grid point. Hermitian inputs return the
/// spectral radius directly.
pub fn numerical_radius<T: Real>(t: &CMatrix<T>, samples: usize) -> Result<T> {
    if samples < NUMRAD_MIN_SAMPLES {
        return Err(Error::Param(format!(
            "numerical radius needs at least {NUMRAD_MIN_SAMPLES} samples, got {samples}"
        )));
    }
    if !t.is_square() {
        return Err(Error::Dimension {
            expected: t.nrows(),
            found: t.ncols(),
        });
    }
    if is_hermitian(t, TOL) {
        return spectral_radius(t);
    }
    let two_pi = T::two_pi();
    let step = two_pi / T::from_usize(samples).unwrap();
    let mut best_k = 0;
    let mut best = -T::infinity();
    for k in 0..samples {
        let v = rotated_top(t, step * T::from_usize(k).unwrap());
        if v > best {
            best = v;
            best_k = k;
        }
    }
    let centre = step * T::from_usize(best_k).unwrap();
    let refined = golden_max(
        |th| rotated_top(t, th),
        centre - step,
        centre + step,
        T::lit(GOLDEN_THETA_TOL),
    );
    Ok(best.max(refined))
}

/// Maximum of a unimodal function on `[lo, hi]` by golden-section search.
pub(crate) fn golden_max<T: Real>(f: impl Fn(T) -> T, lo: T, hi: T, tol: T) -> T {
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while (b - a).abs() > tol {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        }
    }
    f1.max(f2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{pauli_x, pauli_z};
    use crate::scalar::c;
    use crate::states::random_hermitian;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn diag(v: &[f64]) -> CMatrix<f64> {
        CMatrix::from_diagonal(&CVector::from_iterator(v.len(), v.iter().map(|&x| cr(x))))
    }

    #[test]
    fn eig_of_diagonal_is_sorted() {
        let e = herm_eig(&diag(&[3.0, 1.0])).unwrap();
        assert_eq!(e.values.as_slice(), &[1.0, 3.0]);
    }

    #[test]
    fn eig_of_pauli_x() {
        let e = herm_eig(&pauli_x::<f64>()).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-14);
        assert!((e.values[1] - 1.0).abs() < 1e-14);
        let s = 0.5f64.sqrt();
        // |0> - |1> up to a phase for -1
        let v0 = e.vector(0);
        assert!((v0[0].modulus() - s).abs() < 1e-12);
        assert!((v0[0] + v0[1]).modulus() < 1e-12);
        let v1 = e.vector(1);
        assert!((v1[0] - v1[1]).modulus() < 1e-12);
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let mut m = CMatrix::<f64>::zeros(2, 2);
        m[(0, 1)] = c(1.0, 0.0);
        assert!(matches!(herm_eig(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn eig_random_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let h = random_hermitian::<f64, _>(&mut rng, 4);
        let e = herm_eig(&h).unwrap();
        let resid = (e.reconstruct() - &h).norm();
        assert!(resid < 1e-10 * h.norm().max(1.0));
        let gram = e.vectors.adjoint() * &e.vectors;
        assert!((gram - identity::<f64>(4)).norm() < 1e-10);
        let tr: f64 = h.trace().re;
        assert!((e.values.sum() - tr).abs() < 1e-10 * tr.abs().max(1.0));
    }

    #[test]
    fn exp_and_sqrt_of_diagonals() {
        let e = herm_exp(&diag(&[0.0, -4.0])).unwrap();
        assert!((e - diag(&[1.0, (-4.0f64).exp()])).norm() < 1e-14);
        let s = psd_sqrt(&diag(&[4.0, 9.0])).unwrap();
        assert!((s - diag(&[2.0, 3.0])).norm() < 1e-14);
        let k = diag(&[2.0, 2.0, 0.0]);
        let tr = herm_exp(&(-k.clone())).unwrap().trace().re;
        assert!((tr - 1.2706705664732254).abs() < 1e-14);
        assert!((trace_exp(&k, -1.0).unwrap() - 1.2706705664732254).abs() < 1e-14);
    }

    #[test]
    fn sqrt_domain_guard() {
        assert!(psd_sqrt(&diag(&[1.0, -1e-13])).is_ok());
        assert!(matches!(
            psd_sqrt(&diag(&[1.0, -1e-6])),
            Err(Error::Domain { .. })
        ));
        assert!(herm_fn(&diag(&[1.0, 0.0]), |x| x.ln(), Domain::Positive).is_err());
    }

    #[test]
    fn numerical_radius_examples() {
        assert_eq!(numerical_radius(&pauli_z::<f64>(), 512).unwrap(), 1.0);
        let mut nil = CMatrix::<f64>::zeros(2, 2);
        nil[(0, 1)] = cr(1.0);
        assert!((numerical_radius(&nil, 512).unwrap() - 0.5).abs() < 1e-6);
        let three = identity::<f64>(3) * cr(3.0);
        assert_eq!(numerical_radius(&three, 512).unwrap(), 3.0);
        assert!(numerical_radius(&nil, 16).is_err());
    }

    #[test]
    fn op_norm_examples() {
        assert!((op_norm(&diag(&[1.0, -5.0])) - 5.0).abs() < 1e-12);
        assert_eq!(op_norm(&CMatrix::<f64>::zeros(3, 3)), 0.0);
    }
}
