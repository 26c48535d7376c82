//! Three-observable sum relations built from parallelo-hexagons.
//!
//! With centred `P, Q, R` for `A, B, C` the hexagon sides are
//! `AB = (P + i k1 Q)|psi>`, `BC = (Q + i k2 R)|psi>`, `CD = (P + i k3 R)|psi>`
//! and opposite sides are equal and antiparallel.

use serde::Serialize;

use crate::bounds::{self, BoundReport, Direction};
use crate::error::Result;
use crate::operators::Observable;
use crate::scalar::{ci, cr, sign_or_plus, CMatrix, CVector, Real};
use crate::states::{DensityMatrix, StateVector};

#[derive(Debug, Clone, PartialEq)]
pub struct HexagonVectors<T: Real = f64> {
    pub psi1: CVector<T>,
    pub psi2: CVector<T>,
    pub psi3: CVector<T>,
    /// Signs for the pairs `(A, B)`, `(B, C)`, `(A, C)`.
    pub k: [T; 3],
}

fn centred<T: Real>(rho: &DensityMatrix<T>, o: &Observable<T>) -> CMatrix<T> {
    let mean = rho.expect(o.matrix()).re;
    o.matrix() - crate::matops::identity::<T>(o.dim()) * cr(mean)
}

/// `(X + i k Y)|psi>` with `k = sign Im<[X, Y]>`, so that its squared norm is
/// `Var X + Var Y - |<[X, Y]>|`.
fn side<T: Real>(psi: &CVector<T>, x: &CMatrix<T>, y: &CMatrix<T>) -> (CVector<T>, T) {
    let comm = psi.dotc(&(crate::matops::commutator(x, y) * psi)).im;
    let k = sign_or_plus(comm);
    ((x + y * (ci::<T>() * cr(k))) * psi, k)
}

pub fn hexagon_vectors<T: Real>(
    psi: &StateVector<T>,
    a: &Observable<T>,
    b: &Observable<T>,
    c: &Observable<T>,
) -> Result<HexagonVectors<T>> {
    let rho = DensityMatrix::from_pure(psi);
    bounds::moments(&rho, a, b)?;
    bounds::moments(&rho, b, c)?;
    let (p, q, r) = (centred(&rho, a), centred(&rho, b), centred(&rho, c));
    let v = psi.amplitudes();
    let (psi1, k1) = side(v, &p, &q);
    let (psi2, k2) = side(v, &q, &r);
    let (psi3, k3) = side(v, &p, &r);
    Ok(HexagonVectors {
        psi1,
        psi2,
        psi3,
        k: [k1, k2, k3],
    })
}

/// Which printed chord identity to test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum HexagonVariant {
    /// `sum |side|^2 = (|AD|^2 + |BE|^2 + |CF|^2) / 4`.
    LongDiagonals,
    /// `sum |side|^2 = (|AC|^2 + |CE|^2 + |EA|^2) / 3`.
    ShortDiagonals,
}

/// `|LHS - RHS|` of a chord identity for sides `a = AB`, `b = BC`, `c = CD`,
/// with vertices `A = 0, B = a, C = a + b, D = a + b + c, E = b + c, F = c`.
pub fn hexagon_residual<T: Real>(a: &CVector<T>, b: &CVector<T>, c: &CVector<T>, variant: HexagonVariant) -> T {
    let lhs = a.norm_squared() + b.norm_squared() + c.norm_squared();
    let rhs = match variant {
        HexagonVariant::LongDiagonals => {
            let ad = a + b + c;
            let be = b + c - a;
            let cf = c - a - b;
            (ad.norm_squared() + be.norm_squared() + cf.norm_squared()) * T::lit(0.25)
        }
        HexagonVariant::ShortDiagonals => {
            let ac = a + b;
            let ce = c - a;
            let ea = b + c;
            (ac.norm_squared() + ce.norm_squared() + ea.norm_squared()) / T::lit(3.0)
        }
    };
    (lhs - rhs).abs()
}

pub fn hexagon_identity_check<T: Real>(
    psi: &StateVector<T>,
    a: &Observable<T>,
    b: &Observable<T>,
    c: &Observable<T>,
    variant: HexagonVariant,
) -> Result<T> {
    let h = hexagon_vectors(psi, a, b, c)?;
    Ok(hexagon_residual(&h.psi1, &h.psi2, &h.psi3, variant))
}

/// `1/2 sum_pairs [|<[X,Y]>| + s_XY]` where `s_XY` is the optimal orthogonal-vector
/// strengthening term for the pair. Summing the three two-observable
/// relations makes it a lower bound on `Var A + Var B + Var C`.
pub fn pairwise_sum_bound<T: Real>(
    psi: &StateVector<T>,
    a: &Observable<T>,
    b: &Observable<T>,
    c: &Observable<T>,
) -> Result<BoundReport<T>> {
    let rho = DensityMatrix::from_pure(psi);
    let mut bound = T::zero();
    let mut commutators = T::zero();
    for (x, y) in [(a, b), (b, c), (a, c)] {
        let r = bounds::theorem1_bound(&rho, x, y, None)?;
        bound += r.bound_value * T::lit(0.5);
        commutators += bounds::commutator_expect(&rho, x, y)?;
    }
    let target = bounds::variance(&rho, a)? + bounds::variance(&rho, b)? + bounds::variance(&rho, c)?;
    Ok(
        BoundReport::new("pairwise_sum", bound, target, Direction::Lower)
            .with("robertson_part", commutators * T::lit(0.5)),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LhsDecomposition<T: Real = f64> {
    /// `|psi1|^2 + |psi2|^2 + |psi3|^2`.
    pub sum_norms: T,
    /// `2 (Var A + Var B + Var C) - sum |<[X,Y]>|`.
    pub direct: T,
    /// `Var A + Var B + Var C - sum |<[X,Y]>|`.
    pub first_form: T,
    /// `1/2 sum_pairs [Var X + Var Y - |<[X,Y]>|]`.
    pub second_form: T,
    pub residual_direct: T,
    pub residual_first: T,
    pub residual_second: T,
}

pub fn lhs_decomposition_check<T: Real>(
    psi: &StateVector<T>,
    a: &Observable<T>,
    b: &Observable<T>,
    c: &Observable<T>,
) -> Result<LhsDecomposition<T>> {
    let h = hexagon_vectors(psi, a, b, c)?;
    let rho = DensityMatrix::from_pure(psi);
    let var = bounds::variance(&rho, a)? + bounds::variance(&rho, b)? + bounds::variance(&rho, c)?;
    let comm = bounds::commutator_expect(&rho, a, b)?
        + bounds::commutator_expect(&rho, b, c)?
        + bounds::commutator_expect(&rho, a, c)?;
    let sum_norms = h.psi1.norm_squared() + h.psi2.norm_squared() + h.psi3.norm_squared();
    let two = T::lit(2.0);
    let direct = two * var - comm;
    let first_form = var - comm;
    let second_form = (two * var - comm) * T::lit(0.5);
    Ok(LhsDecomposition {
        sum_norms,
        direct,
        first_form,
        second_form,
        residual_direct: (sum_norms - direct).abs(),
        residual_first: (sum_norms - first_form).abs(),
        residual_second: (sum_norms - second_form).abs(),
    })
}
