//! Reverse (upper) bounds on `Var(A) + Var(B)`.

use std::ops::Deref;

use crate::bounds::{self, BoundReport, Direction, Moments, UncertaintyMatrix};
use crate::error::{Error, Result};
use crate::matops::{self, NUMRAD_SAMPLES};
use crate::operators::Observable;
use crate::scalar::Real;
use crate::states::{self, DensityMatrix, StateVector};

/// `Tr K` at or below this is treated as a vanishing uncertainty matrix.
pub const DEGENERATE_TRACE: f64 = 1e-12;

/// An upper bound together with the trace decomposition `K = lambda sigma_K`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReverseReport<T: Real = f64> {
    pub report: BoundReport<T>,
    /// `Tr K`.
    pub lambda: T,
    /// `K / Tr K`; absent when `Tr K` vanishes.
    pub sigma_k: Option<DensityMatrix<T>>,
}

impl<T: Real> Deref for ReverseReport<T> {
    type Target = BoundReport<T>;

    fn deref(&self) -> &BoundReport<T> {
        &self.report
    }
}

fn canonical<T: Real>(rho: &DensityMatrix<T>, a: &Observable<T>, b: &Observable<T>) -> Result<(Moments<T>, UncertaintyMatrix<T>)> {
    let m = bounds::moments(rho, a, b)?;
    let k = bounds::uncertainty_matrix(rho, a, b, m.canonical_sign())?;
    Ok((m, k))
}

/// `|<[A,B]>| + lambda F^2(rho, K / lambda)` with `lambda = Tr K`.
///
/// The relative-entropy form `|<[A,B]>| + lambda (1 - S(rho || sigma_K))` is
/// reported in the `second_form` diagnostic; `second_form_valid` is 0 when
/// `S = +inf` or the value drops below the variance sum.
pub fn theorem4_fidelity_bound<T: Real>(
    rho: &DensityMatrix<T>,
    a: &Observable<T>,
    b: &Observable<T>,
) -> Result<ReverseReport<T>> {
    let (m, k) = canonical(rho, a, b)?;
    if k.trace_k <= T::tol(DEGENERATE_TRACE) {
        return Err(Error::DegenerateK {
            trace: k.trace_k.to_f64_lossy(),
        });
    }
    let sigma = k.normalized().ok_or(Error::DegenerateK {
        trace: k.trace_k.to_f64_lossy(),
    })?;
    let lambda = k.trace_k;
    let commutator = m.abs_commutator();
    let target = m.sum_of_variances();
    let f = states::fidelity(rho, &sigma);
    let fidelity_sq = f * f;
    let rel = states::relative_entropy(rho, &sigma);
    let second = commutator + lambda * (T::one() - rel);
    let second_ok = rel.is_finite_value() && second >= target - T::tol(bounds::BOUND_SLACK);
    let report = BoundReport::new(
        "theorem4_fidelity",
        commutator + lambda * fidelity_sq,
        target,
        Direction::Upper,
    )
    .with("fidelity_sq", fidelity_sq)
    .with("trace_rho_sigma", matops::trace_product(rho.matrix(), sigma.matrix()).re)
    .with("relative_entropy", rel)
    .with("second_form", second)
    .with("second_form_valid", if second_ok { T::one() } else { T::zero() });
    Ok(ReverseReport {
        report,
        lambda,
        sigma_k: Some(sigma),
    })
}

fn pure_setup<T: Real>(psi: &StateVector<T>, a: &Observable<T>, b: &Observable<T>) -> Result<(Moments<T>, UncertaintyMatrix<T>)> {
    canonical(&DensityMatrix::from_pure(psi), a, b)
}

fn reverse_report<T: Real>(name: &str, m: &Moments<T>, k: &UncertaintyMatrix<T>, extra: T) -> ReverseReport<T> {
    ReverseReport {
        report: BoundReport::new(name, m.abs_commutator() + extra, m.sum_of_variances(), Direction::Upper),
        lambda: k.trace_k,
        sigma_k: k.normalized(),
    }
}

/// `|<[A,B]>| + w^2(K)` on a pure state.
///
/// The `bound_linear` diagnostic holds `|<[A,B]>| + w(K)`, which is what
/// `<psi|K|psi> <= w(K)` actually gives.
pub fn numrad_reverse_bound<T: Real>(psi: &StateVector<T>, a: &Observable<T>, b: &Observable<T>) -> Result<ReverseReport<T>> {
    let (m, k) = pure_setup(psi, a, b)?;
    let w = matops::numerical_radius(&k.k, NUMRAD_SAMPLES)?;
    let mut r = reverse_report("numrad", &m, &k, w * w);
    r.report.diagnostics.insert("numerical_radius".into(), w);
    r.report
        .diagnostics
        .insert("bound_linear".into(), m.abs_commutator() + w);
    Ok(r)
}

/// `|<[A,B]>| + w^4(sqrt K)` on a pure state.
pub fn berger_bound<T: Real>(psi: &StateVector<T>, a: &Observable<T>, b: &Observable<T>) -> Result<ReverseReport<T>> {
    let (m, k) = pure_setup(psi, a, b)?;
    let root = matops::psd_sqrt(&k.k)?;
    let w = matops::numerical_radius(&root, NUMRAD_SAMPLES)?;
    Ok(reverse_report("berger", &m, &k, w.powi(4)))
}

/// `|<[A,B]>| + (||sqrt K|| + sqrt ||K||)^2 / 4` on a pure state.
pub fn kittaneh_bound<T: Real>(psi: &StateVector<T>, a: &Observable<T>, b: &Observable<T>) -> Result<ReverseReport<T>> {
    let (m, k) = pure_setup(psi, a, b)?;
    let root = matops::psd_sqrt(&k.k)?;
    let s = matops::op_norm(&root) + matops::op_norm(&k.k).sqrt();
    Ok(reverse_report("kittaneh", &m, &k, s * s * T::lit(0.25)))
}

/// `|<[A,B]>| + ||alpha |T|^{2r} + (1 - alpha) |T^*|^{2r}||^{1/r}` with
/// `T = sqrt K`, for `alpha in (0, 1)` and `r >= 1`.
pub fn elhaddad_kittaneh_bound<T: Real>(
    psi: &StateVector<T>,
    a: &Observable<T>,
    b: &Observable<T>,
    alpha: T,
    r: T,
) -> Result<ReverseReport<T>> {
    if !(alpha > T::zero() && alpha < T::one()) {
        return Err(Error::Param(format!("alpha must lie in (0, 1), got {alpha:e}")));
    }
    if !(r >= T::one()) || !r.is_finite_value() {
        return Err(Error::Param(format!("r must be at least 1, got {r:e}")));
    }
    let (m, k) = pure_setup(psi, a, b)?;
    let t = matops::psd_sqrt(&k.k)?;
    // |T|^2 = T^dag T, |T^*|^2 = T T^dag
    let left = matops::psd_pow(&matops::hermitian_part(&(t.adjoint() * &t)), r)?;
    let right = matops::psd_pow(&matops::hermitian_part(&(&t * t.adjoint())), r)?;
    let mix = left * crate::scalar::cr(alpha) + right * crate::scalar::cr(T::one() - alpha);
    let value = matops::op_norm(&mix).powf(T::one() / r);
    Ok(reverse_report("elhaddad_kittaneh", &m, &k, value))
}
