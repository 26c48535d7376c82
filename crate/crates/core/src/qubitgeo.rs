//! Qubit closed forms: the Bloch vector of the normalized uncertainty matrix
//! and the concurrence of the vectorized state.

use nalgebra::{ComplexField, Vector3};
use serde::Serialize;

use crate::bounds;
use crate::error::{Error, Result};
use crate::operators::Observable;
use crate::scalar::Real;
use crate::states::{self, BlochVector};

/// Agreement required between the closed form and the matrix construction.
pub const CROSS_CHECK_TOL: f64 = 1e-10;

/// Largest `|r_y|` accepted as a real qubit state.
pub const REAL_STATE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PurityRecord<T: Real = f64> {
    /// Angle between `n1` and `n2` in `[0, pi]`.
    pub angle: T,
    /// `|R|` of `K / Tr K` from the closed form.
    pub bloch_radius: T,
    /// `sqrt(1 - (n1.n2)^2)`.
    pub approx: T,
    /// `|R|` from building `K` as a matrix.
    pub direct_radius: T,
    /// `|R_closed - R_direct|` as vectors.
    pub cross_check_error: T,
}

fn v3<T: Real>(a: [T; 3]) -> Vector3<T> {
    Vector3::new(a[0], a[1], a[2])
}

fn check_unit<T: Real>(n: &Vector3<T>) -> Result<()> {
    if (n.norm() - T::one()).abs() > T::tol(1e-10) {
        return Err(Error::Param("direction must be a unit vector".into()));
    }
    Ok(())
}

/// Bloch vector of `K / Tr K` for `A = n1.sigma`, `B = n2.sigma` with sign `+1`:
/// `[(n1 x n2) - (p1 n1 + p2 n2)] / (1 + p1^2/2 + p2^2/2)`, `p_i = r.n_i`.
pub fn normalized_k_bloch_vector<T: Real>(r: BlochVector<T>, n1: [T; 3], n2: [T; 3]) -> Result<[T; 3]> {
    let (rv, a, b) = (v3(r.to_array()), v3(n1), v3(n2));
    check_unit(&a)?;
    check_unit(&b)?;
    let (p1, p2) = (rv.dot(&a), rv.dot(&b));
    let half = T::lit(0.5);
    let v = (a.cross(&b) - (a * p1 + b * p2)) / (T::one() + half * p1 * p1 + half * p2 * p2);
    Ok([v[0], v[1], v[2]])
}

/// `sqrt(alpha beta - gamma^2) / ((alpha + beta)/2)` with `alpha = 1 + p1^2`,
/// `beta = 1 + p2^2`, `gamma = p1 p2 - n1.n2`.
pub fn normalized_k_radius<T: Real>(r: BlochVector<T>, n1: [T; 3], n2: [T; 3]) -> T {
    let (rv, a, b) = (v3(r.to_array()), v3(n1), v3(n2));
    let (p1, p2) = (rv.dot(&a), rv.dot(&b));
    let alpha = T::one() + p1 * p1;
    let beta = T::one() + p2 * p2;
    let gamma = p1 * p2 - a.dot(&b);
    (alpha * beta - gamma * gamma).max(T::zero()).sqrt() / ((alpha + beta) * T::lit(0.5))
}

/// `sqrt(1 - (n1.n2)^2)`, the small-`|r|` limit of the radius.
pub fn almost_pure_approx<T: Real>(n1: [T; 3], n2: [T; 3]) -> T {
    let c = v3(n1).dot(&v3(n2));
    (T::one() - c * c).max(T::zero()).sqrt()
}

pub fn normalized_k_bloch<T: Real>(r: BlochVector<T>, n1: [T; 3], n2: [T; 3]) -> Result<PurityRecord<T>> {
    let closed = v3(normalized_k_bloch_vector(r, n1, n2)?);
    let rho = r.to_state();
    let k = bounds::uncertainty_matrix(&rho, &Observable::bloch(n1), &Observable::bloch(n2), T::one())?;
    let direct = match k.normalized() {
        Some(sigma) => v3(states::bloch_from_qubit(&sigma)?.to_array()),
        None => Vector3::zeros(),
    };
    let c = v3(n1).dot(&v3(n2)).max(-T::one()).min(T::one());
    Ok(PurityRecord {
        angle: c.acos(),
        bloch_radius: normalized_k_radius(r, n1, n2),
        approx: almost_pure_approx(n1, n2),
        direct_radius: direct.norm(),
        cross_check_error: (closed - direct).norm(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConcurrenceCheck<T: Real = f64> {
    /// `|1 + P^2 - 2 C^2| / |1 + P^2 - C^2/2|`.
    pub formula: T,
    /// `2|ad - bc|` of the normalized vectorized state.
    pub direct: T,
    pub residual: T,
    /// Purity measure `P = |r|`.
    pub purity: T,
    /// l1-coherence `2|rho_01|` in the computational basis.
    pub coherence: T,
    /// Printed squared normalization `2 + r_x^2 - r_y^2 + 2 r_z^2`.
    pub printed_norm_sq: T,
    /// Actual squared norm of `vec(2 rho)`, `2 + 2|r|^2`.
    pub direct_norm_sq: T,
}

impl<T: Real> ConcurrenceCheck<T> {
    pub fn norm_mismatch(&self) -> T {
        (self.printed_norm_sq - self.direct_norm_sq).abs()
    }
}

/// Concurrence `2|ad - bc|` of the pure two-qubit state `vec(rho) / ||vec(rho)||`.
pub fn vectorized_concurrence<T: Real>(r: BlochVector<T>) -> T {
    let v = states::vectorize(r.to_state().matrix());
    let v = &v / nalgebra::Complex::new(v.norm(), T::zero());
    (v[0] * v[3] - v[1] * v[2]).modulus() * T::lit(2.0)
}

/// `2|alpha|^2 |1 + r_z^2 - r_x^2 - r_y^2|` with the printed `alpha`, valid for any qubit.
pub fn printed_general_concurrence<T: Real>(r: BlochVector<T>) -> T {
    let norm_sq = T::lit(2.0) + r.x * r.x - r.y * r.y + T::lit(2.0) * r.z * r.z;
    T::lit(2.0) * (T::one() + r.z * r.z - r.x * r.x - r.y * r.y).abs() / norm_sq
}

/// Compares the closed concurrence–coherence–purity expression with the
/// concurrence of the vectorized state, for a real qubit state.
pub fn concurrence_identity_check<T: Real>(r: BlochVector<T>) -> Result<ConcurrenceCheck<T>> {
    if r.y.abs() > T::tol(REAL_STATE_TOL) {
        return Err(Error::RealStateRequired {
            r_y: r.y.to_f64_lossy(),
        });
    }
    let rho = r.to_state();
    let coherence = rho.matrix()[(0, 1)].modulus() * T::lit(2.0);
    let p = r.norm();
    let (p2, c2) = (p * p, coherence * coherence);
    let formula = (T::one() + p2 - T::lit(2.0) * c2).abs() / (T::one() + p2 - c2 * T::lit(0.5)).abs();
    let direct = vectorized_concurrence(r);
    let v = states::vectorize(&(rho.matrix() * nalgebra::Complex::new(T::lit(2.0), T::zero())));
    Ok(ConcurrenceCheck {
        formula,
        direct,
        residual: (formula - direct).abs(),
        purity: p,
        coherence,
        printed_norm_sq: T::lit(2.0) + r.x * r.x - r.y * r.y + T::lit(2.0) * r.z * r.z,
        direct_norm_sq: v.norm_squared(),
    })
}
