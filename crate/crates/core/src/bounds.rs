//! Forward (lower) bounds on `Var(A) + Var(B)`.
//!
//! Everything here is built on the uncertainty matrix
//! `K = (C + s iD)(C - s iD) = C^2 + D^2 - s i[C, D]` with the centred
//! observables `C = A - <A>`, `D = B - <B>`. Its expectation satisfies
//! `Tr(rho K) = Var(A) + Var(B) - s i <[A, B]>`; the canonical sign makes
//! this `Var(A) + Var(B) - |<[A, B]>|`.

use std::collections::BTreeMap;

use nalgebra::{Complex, ComplexField};
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matops::{self, EigenSystem};
use crate::operators::{pauli_x, pauli_y, pauli_z, Observable};
use crate::scalar::{ci, cr, sign_or_plus, CMatrix, CVector, Real};
use crate::states::{self, DensityMatrix, StateVector};

/// Slack allowed when checking that a bound is on the right side of its target.
pub const BOUND_SLACK: f64 = 1e-8;

/// `cos(Upsilon)` at or below this value makes a Bauer–Householder bound invalid.
pub const MIN_COS_UPSILON: f64 = 1e-9;

/// Orthogonality tolerance for user-supplied vectors.
pub const ORTHO_TOL: f64 = 1e-8;

/// Smallest eigenvalue of `K` treated as nonzero when forming `alpha`.
pub const SINGULAR_K: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Lower,
    Upper,
}

/// One evaluated inequality.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport<T: Real = f64> {
    pub name: String,
    pub bound_value: T,
    /// The bounded quantity, usually `Var(A) + Var(B)`.
    pub target: T,
    pub direction: Direction,
    pub valid: bool,
    pub diagnostics: BTreeMap<String, T>,
}

impl<T: Real> BoundReport<T> {
    pub fn new(name: &str, bound_value: T, target: T, direction: Direction) -> Self {
        Self {
            name: name.to_string(),
            bound_value,
            target,
            direction,
            valid: true,
            diagnostics: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: T) -> Self {
        self.diagnostics.insert(key.to_string(), value);
        self
    }

    pub fn diagnostic(&self, key: &str) -> Option<T> {
        self.diagnostics.get(key).copied()
    }

    /// Distance to violation: nonnegative while the inequality holds.
    pub fn margin(&self) -> T {
        match self.direction {
            Direction::Lower => self.target - self.bound_value,
            Direction::Upper => self.bound_value - self.target,
        }
    }

    pub fn holds(&self, slack: f64) -> bool {
        self.margin() >= -T::tol(slack)
    }
}

/// First and second moments of a pair of observables in a state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments<T: Real = f64> {
    pub mean_a: T,
    pub mean_b: T,
    pub var_a: T,
    pub var_b: T,
    /// `Im Tr(rho [A, B])`; the commutator expectation is `i` times this.
    pub commutator: T,
}

impl<T: Real> Moments<T> {
    pub fn sum_of_variances(&self) -> T {
        self.var_a + self.var_b
    }

    pub fn abs_commutator(&self) -> T {
        self.commutator.abs()
    }

    /// Sign `s` of the uncertainty matrix minimizing `Tr(rho K)`; ties give `+1`.
    pub fn canonical_sign(&self) -> T {
        if self.commutator > T::zero() {
            -T::one()
        } else {
            T::one()
        }
    }
}

fn check_pair<T: Real>(rho: &DensityMatrix<T>, a: &Observable<T>, b: &Observable<T>) -> Result<()> {
    for o in [a, b] {
        if o.dim() != rho.dim() {
            return Err(Error::Dimension {
                expected: rho.dim(),
                found: o.dim(),
            });
        }
    }
    Ok(())
}

pub fn moments<T: Real>(rho: &DensityMatrix<T>, a: &Observable<T>, b: &Observable<T>) -> Result<Moments<T>> {
    check_pair(rho, a, b)?;
    let (am, bm) = (a.matrix(), b.matrix());
    let mean_a = rho.expect(am).re;
    let mean_b = rho.expect(bm).re;
    let var_a = rho.expect(&(am * am)).re - mean_a * mean_a;
    let var_b = rho.expect(&(bm * bm)).re - mean_b * mean_b;
    let commutator = rho.expect(&matops::commutator(am, bm)).im;
    Ok(Moments {
        mean_a,
        mean_b,
        var_a,
        var_b,
        commutator,
    })
}

/// `Tr(rho A^2) - Tr(rho A)^2`.
pub fn variance<T: Real>(rho: &DensityMatrix<T>, a: &Observable<T>) -> Result<T> {
    if a.dim() != rho.dim() {
        return Err(Error::Dimension {
            expected: rho.dim(),
            found: a.dim(),
        });
    }
    let mean = rho.expect(a.matrix()).re;
    Ok(rho.expect(&(a.matrix() * a.matrix())).re - mean * mean)
}

/// `Im Tr(rho [A, B])`.
pub fn commutator_expect_signed<T: Real>(rho: &DensityMatrix<T>, a: &Observable<T>, b: &Observable<T>) -> Result<T> {
    check_pair(rho, a, b)?;
    Ok(rho.expect(&matops::commutator(a.matrix(), b.matrix())).im)
}

/// `|<[A, B]>|`.
pub fn commutator_expect<T: Real>(rho: &DensityMatrix<T>, a: &Observable<T>, b: &Observable<T>) -> Result<T> {
    commutator_expect_signed(rho, a, b).map(|x| x.abs())
}

pub fn sum_of_variances<T: Real>(rho: &DensityMatrix<T>, a: &Observable<T>, b: &Observable<T>) -> Result<T> {
    moments(rho, a, b).map(|m| m.sum_of_variances())
}

/// The uncertainty matrix with its sign convention.
#[derive(Debug, Clone, PartialEq)]
pub struct UncertaintyMatrix<T: Real = f64> {
    pub k: CMatrix<T>,
    /// `s` in `K = C^2 + D^2 - s i[C, D]`.
    pub sign: T,
    /// `Tr K`.
    pub trace_k: T,
    pub mean_a: T,
    pub mean_b: T,
    /// `Tr(rho K)` for this sign.
    pub trace_rho_k: T,
    /// `Tr(rho K)` for the opposite sign.
    pub trace_rho_k_other: T,
}

impl<T: Real> UncertaintyMatrix<T> {
    pub fn eig(&self) -> EigenSystem<T> {
        matops::eig_hermitized(&self.k)
    }

    /// `K / Tr K`, or `None` when `Tr K` vanishes.
    pub fn normalized(&self) -> Option<DensityMatrix<T>> {
        if self.trace_k <= T::tol(states::SUPPORT_CUTOFF) {
            return None;
        }
        DensityMatrix::project(&(&self.k / cr(self.trace_k))).ok()
    }
}

fn centred<T: Real>(o: &Observable<T>, mean: T) -> CMatrix<T> {
    o.matrix() - matops::identity::<T>(o.dim()) * cr(mean)
}

/// `X = C - s iD`, so that `K = X^dag X`.
pub(crate) fn lowering<T: Real>(a: &Observable<T>, b: &Observable<T>, m: &Moments<T>, sign: T) -> CMatrix<T> {
    centred(a, m.mean_a) - centred(b, m.mean_b) * (ci::<T>() * cr(sign))
}

/// Uncertainty matrix for an explicit sign `s = +-1`.
pub fn uncertainty_matrix<T: Real>(
    rho: &DensityMatrix<T>,
    a: &Observable<T>,
    b: &Observable<T>,
    sign: T,
) -> Result<UncertaintyMatrix<T>> {
    let m = moments(rho, a, b)?;
    let sign = sign_or_plus(sign);
    Ok(build_k(rho, a, b, &m, sign))
}

fn build_k<T: Real>(
    rho: &DensityMatrix<T>,
    a: &Observable<T>,
    b: &Observable<T>,
    m: &Moments<T>,
    sign: T,
) -> UncertaintyMatrix<T> {
    let x = lowering(a, b, m, sign);
    let k = matops::hermitian_part(&(x.adjoint() * &x));
    let trace_k = k.trace().re;
    let trace_rho_k = rho.expect(&k).re;
    // Tr(rho K_s) = var_sum + s m
    let trace_rho_k_other = m.sum_of_variances() - sign * m.commutator;
    UncertaintyMatrix {
        k,
        sign,
        trace_k,
        mean_a: m.mean_a,
        mean_b: m.mean_b,
        trace_rho_k,
        trace_rho_k_other,
    }
}

/// The sign choice minimizing `Tr(rho K)`, so `Tr(rho K) = var_sum - |<[A,B]>|`.
pub fn canonical_k<T: Real>(rho: &DensityMatrix<T>, a: &Observable<T>, b: &Observable<T>) -> Result<UncertaintyMatrix<T>> {
    let m = moments(rho, a, b)?;
    Ok(build_k(rho, a, b, &m, m.canonical_sign()))
}

/// `max_s |Tr(rho K_s) - (Var A + Var B - s i<[A, B]>)|` over both signs,
/// with the right-hand side assembled from the raw commutator.
pub fn uncertainty_equality_residual<T: Real>(rho: &DensityMatrix<T>, a: &Observable<T>, b: &Observable<T>) -> Result<T> {
    let m = moments(rho, a, b)?;
    let comm: Complex<T> = rho.expect(&matops::commutator(a.matrix(), b.matrix()));
    let mut worst = T::zero();
    for sign in [T::one(), -T::one()] {
        let x = lowering(a, b, &m, sign);
        let lhs = rho.expect(&(x.adjoint() * &x));
        let rhs = cr(m.sum_of_variances()) - ci::<T>() * cr(sign) * comm;
        worst = worst.max((lhs - rhs).modulus());
    }
    Ok(worst)
}

pub fn robertson_sum_bound<T: Real>(rho: &DensityMatrix<T>, a: &Observable<T>, b: &Observable<T>) -> Result<BoundReport<T>> {
    let m = moments(rho, a, b)?;
    Ok(BoundReport::new(
        "robertson",
        m.abs_commutator(),
        m.sum_of_variances(),
        Direction::Lower,
    ))
}

/// `(I (x) X)|sqrt(rho)>`, i.e. `vec(X sqrt(rho))`.
fn apply_left<T: Real>(x: &CMatrix<T>, sqrt_rho: &CMatrix<T>) -> CVector<T> {
    states::vectorize(&(x * sqrt_rho))
}

/// A Haar-random unit vector in `C^{d^2}` orthogonal to `|sqrt(rho)>`.
pub fn random_orthogonal_perp<T: Real, R: Rng + ?Sized>(rho: &DensityMatrix<T>, rng: &mut R) -> Result<StateVector<T>> {
    let v = states::purification(rho);
    loop {
        let w = states::random_pure_with::<T, R>(rng, v.len())?;
        let w = w.amplitudes();
        let projected = w - &v * v.dotc(w);
        if projected.norm() > T::lit(1e-6) {
            return StateVector::normalize(projected);
        }
    }
}

/// Some unit vector orthogonal to `v`, by Gram–Schmidt against the basis.
fn any_orthogonal<T: Real>(v: &CVector<T>) -> CVector<T> {
    let n = v.len();
    let mut best = CVector::zeros(n);
    let mut best_norm = T::zero();
    for i in 0..n {
        let mut e = CVector::zeros(n);
        e[i] = cr(T::one());
        let w = &e - v * v.dotc(&e);
        let nw = w.norm();
        if nw > best_norm {
            best_norm = nw;
            best = w;
        }
    }
    best / cr(best_norm)
}

/// Mixed-state sum bound from a vector orthogonal to `|sqrt(rho)>`:
/// `|<[A,B]>| + |<sqrt(rho)| I (x) (A - t iB) |perp>|^2`, `t = sign <[A,B]>/i`.
///
/// With `perp = None` the optimum `perp ~ (I (x) (C + t iD))|sqrt(rho)>` is
/// used, which saturates the inequality.
pub fn theorem1_bound<T: Real>(
    rho: &DensityMatrix<T>,
    a: &Observable<T>,
    b: &Observable<T>,
    perp: Option<&StateVector<T>>,
) -> Result<BoundReport<T>> {
    let m = moments(rho, a, b)?;
    let sqrt_rho = states::herm_sqrt(rho);
    let v = states::vectorize(&sqrt_rho);
    let t = sign_or_plus(m.commutator);
    let target = m.sum_of_variances();

    let (perp_vec, optimal) = match perp {
        Some(p) => {
            if p.dim() != v.len() {
                return Err(Error::Dimension {
                    expected: v.len(),
                    found: p.dim(),
                });
            }
            let overlap = v.dotc(p.amplitudes()).modulus();
            if overlap > T::lit(ORTHO_TOL) {
                return Err(Error::NotOrthogonal {
                    overlap: overlap.to_f64_lossy(),
                });
            }
            (p.amplitudes().clone(), false)
        }
        None => {
            // (C + t iD)|sqrt rho>, orthogonal to |sqrt rho> since <C> = <D> = 0
            let x = lowering(a, b, &m, -t);
            let w = apply_left(&x, &sqrt_rho);
            let nw = w.norm();
            let p = if nw > T::tol(1e-14) { w / cr(nw) } else { any_orthogonal(&v) };
            (p, true)
        }
    };

    let op = a.matrix() - b.matrix() * (ci::<T>() * cr(t));
    let perp_mat = states::unvectorize(&perp_vec, rho.dim())?;
    let element = v.dotc(&states::vectorize(&(op * perp_mat)));
    let strengthening = element.modulus_squared();
    Ok(BoundReport::new(
        "theorem1",
        m.abs_commutator() + strengthening,
        target,
        Direction::Lower,
    )
    .with("strengthening", strengthening)
    .with("overlap", v.dotc(&perp_vec).modulus())
    .with("optimal", if optimal { T::one() } else { T::zero() }))
}

/// Optimization-free bound `|<[A,B]>| + S(rho) - ln Tr e^{-K}`.
pub fn theorem2_pb_bound<T: Real>(rho: &DensityMatrix<T>, a: &Observable<T>, b: &Observable<T>) -> Result<BoundReport<T>> {
    let m = moments(rho, a, b)?;
    let k = build_k(rho, a, b, &m, m.canonical_sign());
    let entropy = states::von_neumann_entropy(rho);
    let log_partition = matops::log_trace_exp(&k.k, -T::one())?;
    let commutator = m.abs_commutator();
    Ok(BoundReport::new(
        "theorem2_pb",
        commutator + entropy - log_partition,
        m.sum_of_variances(),
        Direction::Lower,
    )
    .with("commutator", commutator)
    .with("entropy", entropy)
    .with("log_trace_exp_neg_k", log_partition))
}

/// How far `rho` is from saturating the optimization-free bound.
#[derive(Debug, Clone, PartialEq)]
pub struct PbEqualityResidual<T: Real = f64> {
    /// `|| rho - e^{-K} ||_F`.
    pub frobenius: T,
    /// `|| rho - e^{-K} / Tr e^{-K} ||_F`, zero exactly when the bound is tight.
    pub gibbs: T,
    /// Qubit form: `e^{-t} cosh|R| - 1/2` and `|| e^{-t} sinh|R|/|R| R + r/2 ||`
    /// with `K = t I + R . sigma`.
    pub qubit: Option<(T, T)>,
}

pub fn theorem2_equality_residual<T: Real>(
    rho: &DensityMatrix<T>,
    a: &Observable<T>,
    b: &Observable<T>,
) -> Result<PbEqualityResidual<T>> {
    let k = canonical_k(rho, a, b)?;
    let exp_neg = matops::herm_exp(&(-&k.k))?;
    let z = exp_neg.trace().re;
    let frobenius = (rho.matrix() - &exp_neg).norm();
    let gibbs = (rho.matrix() - &exp_neg / cr(z)).norm();
    let qubit = if rho.dim() == 2 {
        let half = T::lit(0.5);
        let t = k.trace_k * half;
        let big_r = [pauli_x::<T>(), pauli_y(), pauli_z()].map(|s| matops::trace_product(&k.k, &s).re * half);
        let r_norm = (big_r[0] * big_r[0] + big_r[1] * big_r[1] + big_r[2] * big_r[2]).sqrt();
        let small_r = states::bloch_from_qubit(rho)?.to_array();
        let scale = if r_norm > T::tol(1e-14) { r_norm.sinh() / r_norm } else { T::one() };
        let et = (-t).exp();
        let scalar = et * r_norm.cosh() - half;
        let mut vec_sq = T::zero();
        for i in 0..3 {
            let d = et * scale * big_r[i] + small_r[i] * half;
            vec_sq += d * d;
        }
        Some((scalar, vec_sq.sqrt()))
    } else {
        None
    };
    Ok(PbEqualityResidual {
        frobenius,
        gibbs,
        qubit,
    })
}

/// Pure state or mixed state input for the Bauer–Householder bound.
#[derive(Debug, Clone, Copy)]
pub enum StateRef<'a, T: Real> {
    Pure(&'a StateVector<T>),
    Mixed(&'a DensityMatrix<T>),
}

/// Reference vector, effective uncertainty matrix and moments for a state:
/// `(psi, K)` for pure states and `(|sqrt rho>, I (x) K)` for mixed ones.
fn bh_setup<T: Real>(
    state: StateRef<'_, T>,
    a: &Observable<T>,
    b: &Observable<T>,
) -> Result<(CVector<T>, CMatrix<T>, Moments<T>)> {
    match state {
        StateRef::Pure(psi) => {
            let rho = DensityMatrix::from_pure(psi);
            let m = moments(&rho, a, b)?;
            let k = build_k(&rho, a, b, &m, m.canonical_sign());
            Ok((psi.amplitudes().clone(), k.k, m))
        }
        StateRef::Mixed(rho) => {
            let m = moments(rho, a, b)?;
            let k = build_k(rho, a, b, &m, m.canonical_sign());
            let lifted = matops::kron(&matops::identity::<T>(rho.dim()), &k.k);
            Ok((states::purification(rho), lifted, m))
        }
    }
}

/// The Bauer–Householder strengthening term for a PSD `K` and unit vectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BhTerm<T: Real = f64> {
    /// `|<phi|K|psi>|^2 / (<phi|K|phi> cos Upsilon)`.
    pub term: T,
    /// `|<phi|K|psi>|^2 / (<phi|K|phi> cos^2 Upsilon)`.
    pub term_cos2: T,
    pub cos_upsilon: T,
    pub theta: T,
    pub alpha: T,
    pub valid: bool,
}

/// `Upsilon = 2 cot^-1(alpha cot(theta/2)) = 2 atan(tan(theta/2) / alpha)`,
/// with `alpha = sqrt(lambda_max / lambda_min)` of `K` (infinite when `K` is
/// singular) and `cos theta = |<psi|phi>|`.
pub fn bh_term<T: Real>(k: &CMatrix<T>, psi: &CVector<T>, phi: &CVector<T>) -> Result<BhTerm<T>> {
    if psi.len() != k.nrows() || phi.len() != k.nrows() {
        return Err(Error::Dimension {
            expected: k.nrows(),
            found: phi.len(),
        });
    }
    let overlap = psi.dotc(phi).modulus() / (psi.norm() * phi.norm());
    if !overlap.is_finite_value() {
        return Err(Error::InvalidAngle);
    }
    let theta = overlap.min(T::one()).acos();
    let eig = matops::herm_eig(k)?;
    let (lo, hi) = (eig.min().max(T::zero()), eig.max());
    let singular = lo <= T::tol(SINGULAR_K) * hi.max(T::one());
    let alpha = if singular { T::infinity() } else { (hi / lo).sqrt() };
    let upsilon = if singular {
        T::zero()
    } else {
        T::lit(2.0) * ((theta * T::lit(0.5)).tan() / alpha).atan()
    };
    let cos_upsilon = upsilon.cos();
    let k_phi = phi.dotc(&(k * phi)).re;
    let cross = phi.dotc(&(k * psi)).modulus_squared();
    let valid = cos_upsilon > T::lit(MIN_COS_UPSILON);
    let (term, term_cos2) = if k_phi <= T::tol(1e-14) * hi.max(T::one()) {
        // sqrt(K) phi = 0 forces <phi|K|psi> = 0
        (T::zero(), T::zero())
    } else if valid {
        let base = cross / k_phi;
        (base / cos_upsilon, base / (cos_upsilon * cos_upsilon))
    } else {
        (T::zero(), T::zero())
    };
    Ok(BhTerm {
        term,
        term_cos2,
        cos_upsilon,
        theta,
        alpha,
        valid,
    })
}

fn bh_report<T: Real>(m: &Moments<T>, t: &BhTerm<T>) -> BoundReport<T> {
    let commutator = m.abs_commutator();
    let mut r = BoundReport::new(
        "theorem3_bh",
        commutator + t.term,
        m.sum_of_variances(),
        Direction::Lower,
    )
    .with("bound_cos2", commutator + t.term_cos2)
    .with("cos_upsilon", t.cos_upsilon)
    .with("theta", t.theta)
    .with("alpha", t.alpha);
    r.valid = t.valid;
    r
}

/// Bauer–Householder sum bound
/// `|<[A,B]>| + |<phi|K|psi>|^2 / (<phi|K|phi> cos Upsilon)`.
///
/// The `bound_cos2` diagnostic carries the variant with `cos^2 Upsilon`.
/// Mixed states use `|sqrt rho>` and `I (x) K`, and `phi` then lives in
/// `C^{d^2}`.
pub fn theorem3_bh_bound<T: Real>(
    state: StateRef<'_, T>,
    a: &Observable<T>,
    b: &Observable<T>,
    phi: &StateVector<T>,
) -> Result<BoundReport<T>> {
    let (psi, k, m) = bh_setup(state, a, b)?;
    let t = bh_term(&k, &psi, phi.amplitudes())?;
    Ok(bh_report(&m, &t))
}

/// Projector onto the eigenspace of `eig` whose eigenvalues lie within
/// `tol` of `value`.
fn eigenspace_projection<T: Real>(eig: &EigenSystem<T>, value: T, tol: T, v: &CVector<T>) -> CVector<T> {
    let mut out = CVector::zeros(v.len());
    for j in 0..eig.dim() {
        if (eig.values[j] - value).abs() <= tol {
            let u = eig.vector(j);
            out += &u * u.dotc(v);
        }
    }
    out
}

/// The equality-condition partner of `psi`: with `psi = a|max> + b|min>`,
/// returns `a|max> - b|min>` normalized. Components of `psi` outside the
/// extreme eigenspaces are discarded.
pub fn condition2_partner<T: Real>(k: &CMatrix<T>, psi: &CVector<T>) -> Option<CVector<T>> {
    let eig = matops::eig_hermitized(k);
    let tol = T::tol(1e-9) * eig.max().abs().max(T::one());
    if (eig.max() - eig.min()).abs() <= tol {
        return None;
    }
    let top = eigenspace_projection(&eig, eig.max(), tol, psi);
    let bottom = eigenspace_projection(&eig, eig.min(), tol, psi);
    let w = top - bottom;
    let n = w.norm();
    (n > T::tol(1e-12)).then(|| w / cr(n))
}

/// Theorem 3 maximized over `trials` Haar-random `phi` and the analytic
/// candidates (`phi = psi` when `include_self`, and the condition-2 partner).
pub fn theorem3_optimized<T: Real, R: Rng + ?Sized>(
    state: StateRef<'_, T>,
    a: &Observable<T>,
    b: &Observable<T>,
    trials: usize,
    include_self: bool,
    rng: &mut R,
) -> Result<BoundReport<T>> {
    if trials == 0 {
        return Err(Error::Param("theorem3_optimized needs at least one trial".into()));
    }
    let (psi, k, m) = bh_setup(state, a, b)?;
    let mut candidates: Vec<CVector<T>> = Vec::with_capacity(trials + 2);
    if include_self {
        candidates.push(psi.clone());
    }
    if let Some(p) = condition2_partner(&k, &psi) {
        let self_like = (psi.dotc(&p).modulus() - T::one()).abs() < T::tol(1e-12);
        if include_self || !self_like {
            candidates.push(p);
        }
    }
    for _ in 0..trials {
        candidates.push(states::random_pure_with::<T, R>(rng, psi.len())?.amplitudes().clone());
    }
    let mut best: Option<BoundReport<T>> = None;
    let mut best_cos2 = -T::infinity();
    for phi in &candidates {
        let t = bh_term(&k, &psi, phi)?;
        if !t.valid {
            continue;
        }
        let report = bh_report(&m, &t);
        best_cos2 = best_cos2.max(report.diagnostic("bound_cos2").unwrap());
        if best.as_ref().is_none_or(|b| report.bound_value > b.bound_value) {
            best = Some(report);
        }
    }
    let mut report = best.unwrap_or_else(|| {
        let mut r = BoundReport::new("theorem3_bh", m.abs_commutator(), m.sum_of_variances(), Direction::Lower);
        r.valid = false;
        r
    });
    report.name = "theorem3_optimized".into();
    report.diagnostics.insert("best_bound_cos2".into(), best_cos2);
    report
        .diagnostics
        .insert("candidates".into(), T::from_usize(candidates.len()).unwrap());
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag_state(p: &[f64]) -> DensityMatrix<f64> {
        DensityMatrix::from_diagonal(p).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn variance_and_commutator_examples() {
        let mm = DensityMatrix::<f64>::maximally_mixed(2);
        let (x, y) = (Observable::pauli_x(), Observable::pauli_y());
        assert!(close(variance(&mm, &x).unwrap(), 1.0, 1e-15));
        assert!(commutator_expect(&mm, &x, &y).unwrap().abs() < 1e-15);
        let rho = diag_state(&[0.75, 0.25]);
        assert!(close(commutator_expect(&rho, &x, &y).unwrap(), 1.0, 1e-14));
        assert!(variance(&rho, &Observable::spin1_x()).is_err());
    }

    #[test]
    fn canonical_k_examples() {
        let (x, y) = (Observable::pauli_x(), Observable::pauli_y());
        let mm = DensityMatrix::<f64>::maximally_mixed(2);
        let k = canonical_k(&mm, &x, &y).unwrap();
        // tie resolves to s = +1: K = 2I + 2 sigma_z
        let expected = matops::identity::<f64>(2) * cr(2.0) + pauli_z::<f64>() * cr(2.0);
        assert!((&k.k - expected).norm() < 1e-14);
        assert!(close(k.trace_rho_k, 2.0, 1e-14));

        let rho = diag_state(&[0.75, 0.25]);
        let k = canonical_k(&rho, &x, &y).unwrap();
        let expected = DensityMatrix::from_diagonal(&[0.0, 1.0]).unwrap().into_matrix() * cr(4.0);
        assert!((&k.k - expected).norm() < 1e-14);
        assert!(close(k.trace_rho_k, 1.0, 1e-14));
        assert!(close(k.trace_rho_k_other, 3.0, 1e-14));

        let a = Observable::diagonal(&[1.0, -2.0, 0.5]);
        let b = Observable::diagonal(&[0.3, 0.0, 1.0]);
        let q = states::random_mixed::<f64>(3, 8).unwrap();
        let kp = uncertainty_matrix(&q, &a, &b, 1.0).unwrap();
        let km = uncertainty_matrix(&q, &a, &b, -1.0).unwrap();
        assert!((kp.k - km.k).norm() < 1e-14);
    }

    #[test]
    fn equality_residual_small() {
        for (i, d) in [2usize, 3, 4].into_iter().enumerate() {
            let mut rng = states::rng_for(40, i as u64);
            let rho = states::random_mixed_with::<f64, _>(&mut rng, d).unwrap();
            let a = Observable::new(states::random_hermitian(&mut rng, d)).unwrap();
            let b = Observable::new(states::random_hermitian(&mut rng, d)).unwrap();
            assert!(uncertainty_equality_residual(&rho, &a, &b).unwrap() < 1e-10);
            let psi = states::random_pure_with::<f64, _>(&mut rng, d).unwrap();
            let pure = DensityMatrix::from_pure(&psi);
            assert!(uncertainty_equality_residual(&pure, &a, &b).unwrap() < 1e-10);
        }
        let mm = DensityMatrix::<f64>::maximally_mixed(3);
        let a = Observable::diagonal(&[1.0, 2.0, 3.0]);
        let b = Observable::diagonal(&[0.0, -1.0, 1.0]);
        assert!(uncertainty_equality_residual(&mm, &a, &b).unwrap() < 1e-14);
    }

    #[test]
    fn robertson_examples() {
        let rho = diag_state(&[0.75, 0.25]);
        let r = robertson_sum_bound(&rho, &Observable::pauli_x(), &Observable::pauli_y()).unwrap();
        assert!(close(r.bound_value, 1.0, 1e-14) && close(r.target, 2.0, 1e-14));
        let a = Observable::diagonal(&[1.0, 2.0]);
        let r = robertson_sum_bound(&rho, &a, &Observable::pauli_z()).unwrap();
        assert_eq!(r.bound_value, 0.0);
    }

    #[test]
    fn theorem1_optimal_saturates() {
        let mut rng = states::rng_for(5, 0);
        for d in [2, 3, 4] {
            let rho = states::random_mixed_with::<f64, _>(&mut rng, d).unwrap();
            let a = Observable::new(states::random_hermitian(&mut rng, d)).unwrap();
            let b = Observable::new(states::random_hermitian(&mut rng, d)).unwrap();
            let r = theorem1_bound(&rho, &a, &b, None).unwrap();
            assert!(close(r.bound_value, r.target, 1e-9), "{r:?}");
            for _ in 0..10 {
                let p = random_orthogonal_perp(&rho, &mut rng).unwrap();
                let r = theorem1_bound(&rho, &a, &b, Some(&p)).unwrap();
                assert!(r.holds(BOUND_SLACK));
            }
        }
    }

    #[test]
    fn theorem1_rejects_non_orthogonal() {
        let rho = states::random_mixed::<f64>(2, 1).unwrap();
        let v = StateVector::new(states::purification(&rho)).unwrap();
        let err = theorem1_bound(&rho, &Observable::pauli_x(), &Observable::pauli_y(), Some(&v));
        assert!(matches!(err, Err(Error::NotOrthogonal { .. })));
    }

    #[test]
    fn theorem1_qubit_perp_space_is_three_dimensional() {
        let rho = states::random_mixed::<f64>(2, 6).unwrap();
        let v = states::purification(&rho);
        assert_eq!(v.len(), 4);
        let mut rng = states::rng_for(1, 1);
        let p = random_orthogonal_perp(&rho, &mut rng).unwrap();
        let r = theorem1_bound(&rho, &Observable::pauli_x(), &Observable::pauli_z(), Some(&p)).unwrap();
        assert!(r.bound_value.is_finite() && r.holds(BOUND_SLACK));
    }

    #[test]
    fn theorem2_scalar_anchors() {
        let (x, y) = (Observable::pauli_x(), Observable::pauli_y());
        let mm = DensityMatrix::<f64>::maximally_mixed(2);
        let r = theorem2_pb_bound(&mm, &x, &y).unwrap();
        assert!(close(r.bound_value, 0.6749972526421355, 1e-12));
        assert!(r.holds(BOUND_SLACK));
        let rho = diag_state(&[0.75, 0.25]);
        let r = theorem2_pb_bound(&rho, &x, &y).unwrap();
        assert!(close(r.bound_value, 1.5441852167009986, 1e-12));
        assert!(close(r.diagnostic("entropy").unwrap(), 0.5623351446188083, 1e-12));
        assert!(close(r.diagnostic("log_trace_exp_neg_k").unwrap(), 0.01814992791780978, 1e-12));
        assert!(r.bound_value > 1.0);
    }

    #[test]
    fn theorem2_equality_residuals() {
        let (x, y) = (Observable::pauli_x(), Observable::pauli_y());
        let mm = DensityMatrix::<f64>::maximally_mixed(2);
        let res = theorem2_equality_residual(&mm, &x, &y).unwrap();
        // || I/2 - diag(e^-4, 1) ||_F
        let expected = ((0.5 - (-4.0f64).exp()).powi(2) + 0.25).sqrt();
        assert!(close(res.frobenius, expected, 1e-12));
        let (s, v) = res.qubit.unwrap();
        let e4 = (-4.0f64).exp();
        assert!(close(s, e4 / 2.0, 1e-12));
        assert!(close(v, (1.0 - e4) / 2.0, 1e-12));
        let rho = states::random_mixed::<f64>(3, 3).unwrap();
        let res = theorem2_equality_residual(&rho, &Observable::spin1_x(), &Observable::spin1_y()).unwrap();
        assert!(res.frobenius > 1e-3 && res.qubit.is_none());
    }

    #[test]
    fn theorem3_self_is_tight() {
        let psi = states::random_pure::<f64>(3, 17).unwrap();
        let (a, b) = (Observable::spin1_x(), Observable::spin1_y());
        let r = theorem3_bh_bound(StateRef::Pure(&psi), &a, &b, &psi).unwrap();
        assert!(close(r.bound_value, r.target, 1e-9));
        assert!(close(r.diagnostic("cos_upsilon").unwrap(), 1.0, 1e-12));
    }

    #[test]
    fn theorem3_qubit_orthogonal_phi_is_well_defined() {
        let (x, y) = (Observable::pauli_x(), Observable::pauli_y());
        for seed in 0..20 {
            let psi = states::random_pure::<f64>(2, seed).unwrap();
            let a0 = psi.amplitudes();
            let perp = StateVector::new(CVector::from_vec(vec![-a0[1].conj(), a0[0].conj()])).unwrap();
            let r = theorem3_bh_bound(StateRef::Pure(&psi), &x, &y, &perp).unwrap();
            assert!(r.bound_value.is_finite());
            assert!(r.holds(BOUND_SLACK));
            assert!(r.diagnostic("bound_cos2").unwrap() <= r.target + BOUND_SLACK);
        }
    }
}
