//! Quantum states: density matrices, pure states, Bloch vectors, random
//! generation, vectorization and the usual distance measures.

use nalgebra::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::matops::{self, EigenSystem, PSD_CLAMP, TOL};
use crate::operators::{pauli_x, pauli_y, pauli_z};
use crate::scalar::{cr, CMatrix, CVector, Real};

/// Eigenvalue cutoff defining the support of a state.
pub const SUPPORT_CUTOFF: f64 = 1e-12;

/// A trace-one positive semidefinite Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T: Real = f64>(CMatrix<T>);

impl<T: Real> DensityMatrix<T> {
    /// Validates Hermiticity, unit trace and positivity, all to `1e-10`.
    pub fn new(m: CMatrix<T>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Dimension {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        let tol = T::tol(TOL);
        let asym = matops::max_asymmetry(&m);
        if asym > tol {
            return Err(Error::NotHermitian {
                asymmetry: asym.to_f64_lossy(),
            });
        }
        let m = matops::hermitian_part(&m);
        let tr = m.trace().re;
        if (tr - T::one()).abs() > tol {
            return Err(Error::InvalidState(format!(
                "trace {} differs from one",
                tr.to_f64_lossy()
            )));
        }
        let eig = matops::eig_hermitized(&m);
        if eig.min() < -tol {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {:e}",
                eig.min().to_f64_lossy()
            )));
        }
        Ok(Self(m))
    }

    /// Hermitize, clip negative eigenvalues and renormalize.
    pub fn project(m: &CMatrix<T>) -> Result<Self> {
        let eig = matops::eig_hermitized(m);
        let clipped = eig.map(|x| x.max(T::zero()));
        let tr = clipped.trace().re;
        if tr <= T::zero() {
            return Err(Error::InvalidState("projection has zero trace".into()));
        }
        Ok(Self(matops::hermitian_part(&(clipped / cr(tr)))))
    }

    /// Wraps the Hermitian part of `m` without further checks.
    pub(crate) fn from_checked(m: &CMatrix<T>) -> Self {
        Self(matops::hermitian_part(m))
    }

    pub fn from_pure(psi: &StateVector<T>) -> Self {
        Self(psi.projector())
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self(matops::identity::<T>(dim) / cr(T::from_usize(dim).unwrap()))
    }

    /// Diagonal state from a probability vector.
    pub fn from_diagonal(probs: &[T]) -> Result<Self> {
        let n = probs.len();
        let mut m = CMatrix::zeros(n, n);
        for (i, &p) in probs.iter().enumerate() {
            m[(i, i)] = cr(p);
        }
        Self::new(m)
    }

    /// `p * a + (1 - p) * b`.
    pub fn mix(p: T, a: &Self, b: &Self) -> Result<Self> {
        Self::new(&a.0 * cr(p) + &b.0 * cr(T::one() - p))
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

    pub fn eig(&self) -> EigenSystem<T> {
        matops::eig_hermitized(&self.0)
    }

    /// `Tr(rho X)`; real for Hermitian `X`.
    pub fn expect(&self, x: &CMatrix<T>) -> Complex<T> {
        matops::trace_product(&self.0, x)
    }
}

/// A unit-norm state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector<T: Real = f64>(CVector<T>);

impl<T: Real> StateVector<T> {
    pub fn new(v: CVector<T>) -> Result<Self> {
        let n = v.norm();
        if (n - T::one()).abs() > T::tol(TOL) {
            return Err(Error::InvalidState(format!(
                "state vector norm {} is not one",
                n.to_f64_lossy()
            )));
        }
        Ok(Self(v))
    }

    pub fn normalize(v: CVector<T>) -> Result<Self> {
        let n = v.norm();
        if !(n > T::zero()) || !n.is_finite_value() {
            return Err(Error::InvalidState("cannot normalize a zero vector".into()));
        }
        Ok(Self(v / cr(n)))
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = CVector::zeros(dim);
        v[index] = cr(T::one());
        Self(v)
    }

    pub fn amplitudes(&self) -> &CVector<T> {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn projector(&self) -> CMatrix<T> {
        &self.0 * self.0.adjoint()
    }

    pub fn inner(&self, other: &Self) -> Complex<T> {
        self.0.dotc(&other.0)
    }
}

/// Bloch vector of a qubit state, `rho = (I + r . sigma) / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector<T: Real = f64> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Real> BlochVector<T> {
    pub fn new(x: T, y: T, z: T) -> Result<Self> {
        let r = Self { x, y, z };
        if r.norm() > T::one() + T::tol(TOL) {
            return Err(Error::InvalidState(format!(
                "Bloch vector length {} exceeds one",
                r.norm().to_f64_lossy()
            )));
        }
        Ok(r)
    }

    pub fn from_array(v: [T; 3]) -> Result<Self> {
        Self::new(v[0], v[1], v[2])
    }

    pub fn to_array(self) -> [T; 3] {
        [self.x, self.y, self.z]
    }

    pub fn norm(&self) -> T {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn to_state(self) -> DensityMatrix<T> {
        qubit_from_bloch(self)
    }
}

pub fn bloch_from_qubit<T: Real>(rho: &DensityMatrix<T>) -> Result<BlochVector<T>> {
    if rho.dim() != 2 {
        return Err(Error::Dimension {
            expected: 2,
            found: rho.dim(),
        });
    }
    Ok(BlochVector {
        x: rho.expect(&pauli_x()).re,
        y: rho.expect(&pauli_y()).re,
        z: rho.expect(&pauli_z()).re,
    })
}

pub fn qubit_from_bloch<T: Real>(r: BlochVector<T>) -> DensityMatrix<T> {
    let half = cr(T::lit(0.5));
    let m = (matops::identity::<T>(2)
        + pauli_x::<T>() * cr(r.x)
        + pauli_y::<T>() * cr(r.y)
        + pauli_z::<T>() * cr(r.z))
        * half;
    DensityMatrix(m)
}

/// ChaCha8 generator for task `index` of a run seeded with `seed`; each
/// index gets its own stream.
pub fn rng_for(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn complex_gaussian<T: Real, R: Rng + ?Sized>(rng: &mut R) -> Complex<T> {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex::new(T::lit(re), T::lit(im))
}

fn check_dim(dim: usize) -> Result<()> {
    if dim < 2 {
        return Err(Error::Param(format!("dimension must be at least 2, got {dim}")));
    }
    Ok(())
}

/// Haar-random pure state: a normalized complex Gaussian vector.
pub fn random_pure_with<T: Real, R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Result<StateVector<T>> {
    check_dim(dim)?;
    let v = CVector::from_fn(dim, |_, _| complex_gaussian(rng));
    StateVector::normalize(v)
}

/// Hilbert–Schmidt random mixed state `G G^dag / Tr(G G^dag)`.
pub fn random_mixed_with<T: Real, R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Result<DensityMatrix<T>> {
    check_dim(dim)?;
    let g = CMatrix::from_fn(dim, dim, |_, _| complex_gaussian(rng));
    let w = &g * g.adjoint();
    let tr = w.trace().re;
    Ok(DensityMatrix(matops::hermitian_part(&(w / cr(tr)))))
}

pub fn random_pure<T: Real>(dim: usize, seed: u64) -> Result<StateVector<T>> {
    random_pure_with(&mut ChaCha8Rng::seed_from_u64(seed), dim)
}

pub fn random_mixed<T: Real>(dim: usize, seed: u64) -> Result<DensityMatrix<T>> {
    random_mixed_with(&mut ChaCha8Rng::seed_from_u64(seed), dim)
}

/// `(G + G^dag) / 2` with `G` complex Gaussian (GUE up to scale).
pub fn random_hermitian<T: Real, R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMatrix<T> {
    let g = CMatrix::from_fn(dim, dim, |_, _| complex_gaussian(rng));
    matops::hermitian_part(&g)
}

/// Uniformly distributed direction on the unit sphere.
pub fn random_unit3<T: Real, R: Rng + ?Sized>(rng: &mut R) -> [T; 3] {
    loop {
        let v: [f64; 3] = [
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        ];
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 1e-12 {
            return [T::lit(v[0] / n), T::lit(v[1] / n), T::lit(v[2] / n)];
        }
    }
}

/// Hermitian positive square root.
pub fn herm_sqrt<T: Real>(rho: &DensityMatrix<T>) -> CMatrix<T> {
    rho.eig().map(|x| x.max(T::zero()).sqrt())
}

/// Column-stacking vectorization `|M>`.
pub fn vectorize<T: Real>(m: &CMatrix<T>) -> CVector<T> {
    // nalgebra stores matrices column-major
    CVector::from_column_slice(m.as_slice())
}

pub fn unvectorize<T: Real>(v: &CVector<T>, dim: usize) -> Result<CMatrix<T>> {
    if v.len() != dim * dim {
        return Err(Error::Dimension {
            expected: dim * dim,
            found: v.len(),
        });
    }
    Ok(CMatrix::from_column_slice(dim, dim, v.as_slice()))
}

/// The normalized vector `|sqrt(rho)>` of dimension `d^2`.
pub fn purification<T: Real>(rho: &DensityMatrix<T>) -> CVector<T> {
    vectorize(&herm_sqrt(rho))
}

fn psd_values<T: Real>(m: &CMatrix<T>) -> Vec<T> {
    matops::eig_hermitized(m)
        .values
        .iter()
        .map(|&x| x.max(T::zero()))
        .collect()
}

/// Eigenvalues of `sqrt(rho) sigma sqrt(rho)` below this are rounding noise
/// and dropped before taking square roots.
pub const FIDELITY_CUTOFF: f64 = 1e-14;

/// Uhlmann fidelity `Tr sqrt(sqrt(rho) sigma sqrt(rho))`, clamped to `[0, 1]`.
pub fn fidelity<T: Real>(rho: &DensityMatrix<T>, sigma: &DensityMatrix<T>) -> T {
    let s = herm_sqrt(rho);
    let inner = &s * sigma.matrix() * &s;
    let cutoff = T::tol(FIDELITY_CUTOFF);
    let f = psd_values(&inner)
        .into_iter()
        .filter(|&x| x > cutoff)
        .fold(T::zero(), |acc, x| acc + x.sqrt());
    f.min(T::one()).max(T::zero())
}

/// `1/2 Tr|rho - sigma|`.
pub fn trace_distance<T: Real>(rho: &DensityMatrix<T>, sigma: &DensityMatrix<T>) -> T {
    let diff = rho.matrix() - sigma.matrix();
    let sum = matops::eig_hermitized(&diff)
        .values
        .iter()
        .fold(T::zero(), |acc, x| acc + x.abs());
    sum * T::lit(0.5)
}

fn xlogx<T: Real>(x: T) -> T {
    if x <= T::tol(SUPPORT_CUTOFF) {
        T::zero()
    } else {
        x * x.ln()
    }
}

/// `-Tr(rho ln rho)` in nats.
pub fn von_neumann_entropy<T: Real>(rho: &DensityMatrix<T>) -> T {
    -psd_values(rho.matrix())
        .into_iter()
        .fold(T::zero(), |acc, x| acc + xlogx(x))
}

/// `Tr(rho ln rho - rho ln sigma)`, `+inf` when `supp rho` is not contained
/// in `supp sigma`.
pub fn relative_entropy<T: Real>(rho: &DensityMatrix<T>, sigma: &DensityMatrix<T>) -> T {
    let cutoff = T::tol(SUPPORT_CUTOFF);
    let eig = sigma.eig();
    let mut cross = T::zero();
    for j in 0..eig.dim() {
        let w = eig.vector(j);
        let weight = (w.adjoint() * rho.matrix() * &w)[(0, 0)].re;
        let mu = eig.values[j];
        if mu <= cutoff {
            if weight > cutoff {
                return T::infinity();
            }
        } else {
            cross += weight * mu.ln();
        }
    }
    -von_neumann_entropy(rho) - cross
}

pub fn purity<T: Real>(rho: &DensityMatrix<T>) -> T {
    matops::trace_product(rho.matrix(), rho.matrix()).re
}

/// `arccos F(rho, sigma)`, in `[0, pi/2]`.
pub fn bures_angle<T: Real>(rho: &DensityMatrix<T>, sigma: &DensityMatrix<T>) -> T {
    fidelity(rho, sigma).acos()
}

/// Clamp threshold used when diagnosing PSD noise.
pub fn psd_clamp<T: Real>() -> T {
    T::tol(PSD_CLAMP)
}
