//! Lindblad evolution and the reverse quantum-speed-limit bookkeeping.
//!
//! Along a trajectory `rho(t)` with Bures angle `L(t) = arccos F(rho0, rho(t))`
//! the quantity `sin(2L) dL/dt = -d/dt F^2` is compared pointwise with
//! `S(rho0) - ln Tr e^{-+G(t)}`, where `G(t)` is the generator output at
//! `rho(t)`, and integrated into `sin^2 L_tau - sin^2 L_0 >= tau Lambda`.

use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matops;
use crate::operators::{pauli_z, sigma_minus, spin1_x, spin1_y, Observable};
use crate::scalar::{cr, ci, CMatrix, Real};
use crate::states::{self, DensityMatrix};

/// State drift above which a step is re-projected onto the state space.
pub const PROJECT_DRIFT: f64 = 1e-9;

/// State drift above which integration is abandoned.
pub const DIVERGED_DRIFT: f64 = 1e-6;

/// Generator outputs with all `|Tr(rho0 G)|` at or below this are degenerate.
pub const SIGN_ZERO: f64 = 1e-12;

/// Allowed fidelity increase between steps for a trajectory to count as monotone.
pub const MONOTONE_TOL: f64 = 1e-10;

/// Pointwise tolerance at the reference step `REFERENCE_DT`.
pub const POINTWISE_TOL: f64 = 1e-6;
pub const REFERENCE_DT: f64 = 0.01;

/// `rho -> -i[H, rho] + sum_k gamma_k (L_k rho L_k^dag - {L_k^dag L_k, rho} / 2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LindbladGenerator<T: Real = f64> {
    hamiltonian: Observable<T>,
    jumps: Vec<CMatrix<T>>,
    rates: Vec<T>,
}

impl<T: Real> LindbladGenerator<T> {
    pub fn new(hamiltonian: Observable<T>, jumps: Vec<CMatrix<T>>, rates: Vec<T>) -> Result<Self> {
        if jumps.len() != rates.len() {
            return Err(Error::Param(format!(
                "{} jump operators but {} rates",
                jumps.len(),
                rates.len()
            )));
        }
        let d = hamiltonian.dim();
        for j in &jumps {
            if j.nrows() != d || j.ncols() != d {
                return Err(Error::Dimension {
                    expected: d,
                    found: j.nrows().max(j.ncols()),
                });
            }
        }
        if let Some(r) = rates.iter().find(|r| !(**r >= T::zero()) || !r.is_finite_value()) {
            return Err(Error::Param(format!("rate {r:e} must be finite and nonnegative")));
        }
        Ok(Self {
            hamiltonian,
            jumps,
            rates,
        })
    }

    /// The zero generator on `C^d`.
    pub fn zero(dim: usize) -> Self {
        Self {
            hamiltonian: Observable::diagonal(&vec![T::zero(); dim]),
            jumps: Vec::new(),
            rates: Vec::new(),
        }
    }

    /// Pure dephasing with jump operator `sigma_z` at rate `gamma`.
    pub fn qubit_dephasing(gamma: T) -> Result<Self> {
        Self::new(Observable::diagonal(&[T::zero(); 2]), vec![pauli_z()], vec![gamma])
    }

    /// Decay `|1> -> |0>` at rate `gamma`.
    pub fn amplitude_damping(gamma: T) -> Result<Self> {
        Self::new(Observable::diagonal(&[T::zero(); 2]), vec![sigma_minus()], vec![gamma])
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    pub fn hamiltonian(&self) -> &Observable<T> {
        &self.hamiltonian
    }

    pub fn jumps(&self) -> &[CMatrix<T>] {
        &self.jumps
    }

    pub fn rates(&self) -> &[T] {
        &self.rates
    }

    pub fn apply(&self, rho: &CMatrix<T>) -> CMatrix<T> {
        let mut out = matops::commutator(self.hamiltonian.matrix(), rho) * (-ci::<T>());
        let half = cr(T::lit(0.5));
        for (l, &g) in self.jumps.iter().zip(&self.rates) {
            let ld = l.adjoint();
            let ldl = &ld * l;
            out += (l * rho * &ld - matops::anticommutator(&ldl, rho) * half) * cr(g);
        }
        out
    }
}

/// Generator output `L(rho)`; Hermitian and traceless.
pub fn lindblad_apply<T: Real>(gen: &LindbladGenerator<T>, rho: &DensityMatrix<T>) -> Result<CMatrix<T>> {
    if gen.dim() != rho.dim() {
        return Err(Error::Dimension {
            expected: gen.dim(),
            found: rho.dim(),
        });
    }
    Ok(gen.apply(rho.matrix()))
}

/// A step at which the integrated state was projected back onto the state space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DriftEvent {
    pub step: usize,
    pub time: f64,
    pub drift: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T: Real = f64> {
    pub times: Vec<T>,
    pub states: Vec<DensityMatrix<T>>,
    /// Root fidelity `F(rho0, rho(t))`.
    pub fidelity: Vec<T>,
    /// Bures angle `arccos F`; the first entry is exactly zero.
    pub bures: Vec<T>,
    /// Generator output `L(rho(t))` at each stored state.
    pub gen_out: Vec<CMatrix<T>>,
    pub drift_log: Vec<DriftEvent>,
}

impl<T: Real> Trajectory<T> {
    pub fn tau(&self) -> T {
        *self.times.last().unwrap()
    }

    pub fn step(&self) -> T {
        self.times[1] - self.times[0]
    }

    pub fn initial(&self) -> &DensityMatrix<T> {
        &self.states[0]
    }

    /// `sin^2 L(t) = 1 - F^2`.
    pub fn sin2_bures(&self) -> Vec<T> {
        self.fidelity.iter().map(|&f| T::one() - f * f).collect()
    }
}

/// Largest violation of Hermiticity, unit trace and positivity.
fn state_drift<T: Real>(m: &CMatrix<T>) -> T {
    let asym = matops::max_asymmetry(m);
    let h = matops::hermitian_part(m);
    let tr = (h.trace().re - T::one()).abs();
    let neg = (-matops::eig_hermitized(&h).min()).max(T::zero());
    asym.max(tr).max(neg)
}

/// Fixed-step fourth-order Runge–Kutta integration of `d rho/dt = L(rho)` on
/// `[0, tau]` with `ceil(tau/dt)` equal steps.
pub fn evolve<T: Real>(rho0: &DensityMatrix<T>, gen: &LindbladGenerator<T>, tau: T, dt: T) -> Result<Trajectory<T>> {
    if gen.dim() != rho0.dim() {
        return Err(Error::Dimension {
            expected: gen.dim(),
            found: rho0.dim(),
        });
    }
    if !(tau > T::zero()) || !tau.is_finite_value() {
        return Err(Error::Param(format!("tau must be positive, got {tau:e}")));
    }
    if !(dt > T::zero()) || dt > tau / T::lit(100.0) * (T::one() + T::lit(1e-12)) {
        return Err(Error::Param(format!("dt must lie in (0, tau/100], got {dt:e}")));
    }
    let n = (tau / dt - T::lit(1e-9)).ceil().to_usize().unwrap_or(1).max(1);
    let h = tau / T::from_usize(n).unwrap();
    let half = cr(h * T::lit(0.5));
    let sixth = cr(h / T::lit(6.0));
    let two = cr(T::lit(2.0));

    let mut times = Vec::with_capacity(n + 1);
    let mut out = Vec::with_capacity(n + 1);
    let mut drift_log = Vec::new();
    let mut rho = rho0.matrix().clone();
    times.push(T::zero());
    out.push(rho0.clone());
    for step in 1..=n {
        let k1 = gen.apply(&rho);
        let k2 = gen.apply(&(&rho + &k1 * half));
        let k3 = gen.apply(&(&rho + &k2 * half));
        let k4 = gen.apply(&(&rho + &k3 * cr(h)));
        let next = &rho + (k1 + k2 * two + k3 * two + k4) * sixth;
        let t = h * T::from_usize(step).unwrap();
        let drift = state_drift(&next);
        if !drift.is_finite_value() || drift > T::tol(DIVERGED_DRIFT) {
            return Err(Error::IntegrationDiverged {
                time: t.to_f64_lossy(),
                reason: format!("state drift {:e}", drift.to_f64_lossy()),
            });
        }
        let state = if drift > T::tol(PROJECT_DRIFT) {
            drift_log.push(DriftEvent {
                step,
                time: t.to_f64_lossy(),
                drift: drift.to_f64_lossy(),
            });
            DensityMatrix::project(&next)?
        } else {
            DensityMatrix::from_checked(&next)
        };
        rho = state.matrix().clone();
        times.push(t);
        out.push(state);
    }

    let fidelity: Vec<T> = out.iter().map(|s| states::fidelity(rho0, s)).collect();
    let mut bures: Vec<T> = fidelity.iter().map(|f| f.acos()).collect();
    bures[0] = T::zero();
    let gen_out = out.iter().map(|s| gen.apply(s.matrix())).collect();
    Ok(Trajectory {
        times,
        states: out,
        fidelity,
        bures,
        gen_out,
        drift_log,
    })
}

/// `|| rho_dt(tau) - rho_{dt/2}(tau) ||_F`.
pub fn halving_error<T: Real>(rho0: &DensityMatrix<T>, gen: &LindbladGenerator<T>, tau: T, dt: T) -> Result<T> {
    let coarse = evolve(rho0, gen, tau, dt)?;
    let fine = evolve(rho0, gen, tau, dt * T::lit(0.5))?;
    Ok((coarse.states.last().unwrap().matrix() - fine.states.last().unwrap().matrix()).norm())
}

/// Sign of `Tr(rho0 L(rho(t)))` along a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// Positive overlap; paired with `ln Tr e^{-L}`.
    Positive,
    /// Negative overlap; paired with `ln Tr e^{+L}`.
    Negative,
}

impl Branch {
    /// Exponent sign `s` in `ln Tr e^{s L}`.
    fn exponent<T: Real>(self) -> T {
        match self {
            Branch::Positive => -T::one(),
            Branch::Negative => T::one(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionReport {
    /// Fidelity nonincreasing, i.e. the Bures angle nondecreasing.
    pub monotone: bool,
    /// Common sign of `Tr(rho0 L(rho(t)))`; `None` when it changes or all values vanish.
    pub sign: Option<Branch>,
    /// Every `|Tr(rho0 L(rho(t)))|` is below the zero threshold.
    pub degenerate: bool,
    /// Largest step-to-step fidelity increase.
    pub max_fidelity_increase: f64,
}

impl AssumptionReport {
    pub fn holds(&self) -> bool {
        self.monotone && (self.sign.is_some() || self.degenerate)
    }
}

pub fn qsl_assumption_check<T: Real>(traj: &Trajectory<T>, rho0: &DensityMatrix<T>) -> AssumptionReport {
    let mut max_increase = T::zero();
    for w in traj.fidelity.windows(2) {
        max_increase = max_increase.max(w[1] - w[0]);
    }
    let zero = T::tol(SIGN_ZERO);
    let overlaps: Vec<T> = traj.gen_out.iter().map(|g| rho0.expect(g).re).collect();
    let degenerate = overlaps.iter().all(|x| x.abs() <= zero);
    let any_pos = overlaps.iter().any(|&x| x > zero);
    let any_neg = overlaps.iter().any(|&x| x < -zero);
    let sign = match (any_pos, any_neg) {
        (true, false) => Some(Branch::Positive),
        (false, true) => Some(Branch::Negative),
        _ => None,
    };
    AssumptionReport {
        monotone: max_increase <= T::tol(MONOTONE_TOL),
        sign,
        degenerate,
        max_fidelity_increase: max_increase.to_f64_lossy(),
    }
}

/// `S(rho0) - ln Tr e^{s L(rho(t))}` at every grid point.
fn pb_integrand<T: Real>(traj: &Trajectory<T>, rho0: &DensityMatrix<T>, branch: Branch) -> Result<Vec<T>> {
    let entropy = states::von_neumann_entropy(rho0);
    let s = branch.exponent::<T>();
    traj.gen_out
        .iter()
        .map(|g| Ok(entropy - matops::log_trace_exp(&matops::hermitian_part(g), s)?))
        .collect()
}

fn trapezoid<T: Real>(times: &[T], values: &[T]) -> T {
    let half = T::lit(0.5);
    times
        .windows(2)
        .zip(values.windows(2))
        .fold(T::zero(), |acc, (t, v)| acc + (t[1] - t[0]) * (v[0] + v[1]) * half)
}

/// `(1/tau) int_0^tau [S(rho0) - ln Tr e^{-+L(rho(t))}] dt` by the trapezoid rule.
pub fn lambda_reverse<T: Real>(traj: &Trajectory<T>, rho0: &DensityMatrix<T>, branch: Branch) -> Result<T> {
    let g = pb_integrand(traj, rho0, branch)?;
    Ok(trapezoid(&traj.times, &g) / traj.tau())
}

/// Second-order finite-difference derivative on a uniform grid, one-sided at the ends.
pub fn derivative<T: Real>(values: &[T], h: T) -> Vec<T> {
    let n = values.len();
    if n < 3 {
        return vec![T::zero(); n];
    }
    let two = T::lit(2.0);
    let mut d = vec![T::zero(); n];
    d[0] = (-T::lit(3.0) * values[0] + T::lit(4.0) * values[1] - values[2]) / (two * h);
    d[n - 1] = (T::lit(3.0) * values[n - 1] - T::lit(4.0) * values[n - 2] + values[n - 3]) / (two * h);
    for i in 1..n - 1 {
        d[i] = (values[i + 1] - values[i - 1]) / (two * h);
    }
    d
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointwiseCheck {
    /// `false` when the trajectory fails the monotonicity or sign assumptions.
    pub checked: bool,
    /// `max_t [RHS(t) - sin(2L) dL/dt]` over interior grid points.
    pub max_violation: f64,
    pub tolerance: f64,
    pub holds: bool,
    /// `max_t |sin(2L) dL/dt -+ Tr(rho0 L(rho(t)))|`; zero for pure `rho0`.
    pub equality_residual: f64,
}

/// Tolerance for the pointwise check at step `dt`: `1e-6` at `dt = 0.01`,
/// growing like `dt^2` for coarser grids.
pub fn pointwise_tolerance(dt: f64) -> f64 {
    POINTWISE_TOL * (dt / REFERENCE_DT).powi(2).max(1.0)
}

/// Checks `sin(2L) dL/dt >= S(rho0) - ln Tr e^{-+L(rho(t))}` at interior grid points.
pub fn pointwise_pb_check<T: Real>(
    traj: &Trajectory<T>,
    rho0: &DensityMatrix<T>,
    branch: Branch,
) -> Result<PointwiseCheck> {
    let assumptions = qsl_assumption_check(traj, rho0);
    let tolerance = pointwise_tolerance(traj.step().to_f64_lossy()) * T::TOLERANCE_SCALE;
    if !assumptions.holds() {
        return Ok(PointwiseCheck {
            checked: false,
            max_violation: f64::NAN,
            tolerance,
            holds: false,
            equality_residual: f64::NAN,
        });
    }
    // sin(2L) dL/dt = d/dt sin^2 L
    let lhs = derivative(&traj.sin2_bures(), traj.step());
    let rhs = pb_integrand(traj, rho0, branch)?;
    let sign = match branch {
        Branch::Positive => T::one(),
        Branch::Negative => -T::one(),
    };
    let n = lhs.len();
    let mut worst = f64::NEG_INFINITY;
    let mut residual = 0.0f64;
    for i in 1..n.saturating_sub(1) {
        worst = worst.max((rhs[i] - lhs[i]).to_f64_lossy());
        let overlap = sign * rho0.expect(&traj.gen_out[i]).re;
        residual = residual.max((lhs[i] - overlap).abs().to_f64_lossy());
    }
    if n < 3 {
        worst = 0.0;
    }
    Ok(PointwiseCheck {
        checked: true,
        max_violation: worst,
        tolerance,
        holds: worst <= tolerance,
        equality_residual: residual,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QslReport {
    pub assumptions: AssumptionReport,
    pub branch: Branch,
    pub tau: f64,
    pub lambda_reverse: f64,
    /// `S(rho0) - ln d`, an upper bound on `lambda_reverse`.
    pub entropy_gap: f64,
    pub sin2_start: f64,
    pub sin2_end: f64,
    /// `sin^2 L_tau - sin^2 L_0 - tau Lambda`.
    pub integrated_margin: f64,
    pub integrated_holds: bool,
    pub pointwise: PointwiseCheck,
    /// `sin^2 L_tau / Lambda`, meaningful only when `time_bound_valid`.
    pub time_bound: f64,
    pub time_bound_valid: bool,
    pub reason: Option<String>,
    pub drift_events: usize,
}

/// Reverse speed-limit report for a trajectory starting at `rho0`.
pub fn reverse_qsl_report<T: Real>(traj: &Trajectory<T>, rho0: &DensityMatrix<T>) -> Result<QslReport> {
    let assumptions = qsl_assumption_check(traj, rho0);
    let branch = assumptions.sign.unwrap_or(Branch::Negative);
    let lambda = lambda_reverse(traj, rho0, branch)?;
    let sin2 = traj.sin2_bures();
    let (start, end) = (sin2[0], *sin2.last().unwrap());
    let tau = traj.tau();
    let margin = end - start - tau * lambda;
    let pointwise = pointwise_pb_check(traj, rho0, branch)?;
    let d = T::from_usize(rho0.dim()).unwrap();
    let entropy_gap = states::von_neumann_entropy(rho0) - d.ln();
    let (time_bound_valid, reason) = if !assumptions.holds() {
        (false, Some("assumptions violated".to_string()))
    } else if lambda <= T::zero() {
        (false, Some("nonpositive Λ_reverse".to_string()))
    } else {
        (true, None)
    };
    Ok(QslReport {
        integrated_holds: margin >= -T::tol(POINTWISE_TOL),
        assumptions,
        branch,
        tau: tau.to_f64_lossy(),
        lambda_reverse: lambda.to_f64_lossy(),
        entropy_gap: entropy_gap.to_f64_lossy(),
        sin2_start: start.to_f64_lossy(),
        sin2_end: end.to_f64_lossy(),
        integrated_margin: margin.to_f64_lossy(),
        pointwise,
        time_bound: (end / lambda).to_f64_lossy(),
        time_bound_valid,
        reason,
        drift_events: traj.drift_log.len(),
    })
}

/// A matrix entry: a real number or a `[re, im]` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

impl Entry {
    fn value<T: Real>(self) -> Complex<T> {
        match self {
            Entry::Real(x) => Complex::new(T::lit(x), T::zero()),
            Entry::Complex([re, im]) => Complex::new(T::lit(re), T::lit(im)),
        }
    }
}

/// Row-major matrix of entries.
pub type MatrixSpec = Vec<Vec<Entry>>;

/// A dynamics scenario as read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    #[serde(default)]
    pub name: String,
    pub hamiltonian: MatrixSpec,
    #[serde(default)]
    pub jump_ops: Vec<MatrixSpec>,
    #[serde(default)]
    pub rates: Vec<f64>,
    pub rho0: MatrixSpec,
    pub tau: f64,
    pub dt: f64,
}

pub fn matrix_from_spec<T: Real>(spec: &MatrixSpec) -> Result<CMatrix<T>> {
    let n = spec.len();
    if n == 0 {
        return Err(Error::Scenario("empty matrix".into()));
    }
    if let Some(row) = spec.iter().find(|r| r.len() != n) {
        return Err(Error::Scenario(format!("row of length {} in a {n}x{n} matrix", row.len())));
    }
    Ok(CMatrix::from_fn(n, n, |i, j| spec[i][j].value()))
}

pub fn matrix_to_spec<T: Real>(m: &CMatrix<T>) -> MatrixSpec {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| Entry::Complex([m[(i, j)].re.to_f64_lossy(), m[(i, j)].im.to_f64_lossy()]))
                .collect()
        })
        .collect()
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Scenario(e.to_string()))
    }

    pub fn generator<T: Real>(&self) -> Result<LindbladGenerator<T>> {
        let h = Observable::new(matrix_from_spec(&self.hamiltonian)?)?;
        let jumps = self.jump_ops.iter().map(matrix_from_spec).collect::<Result<Vec<_>>>()?;
        LindbladGenerator::new(h, jumps, self.rates.iter().map(|&r| T::lit(r)).collect())
    }

    pub fn initial_state<T: Real>(&self) -> Result<DensityMatrix<T>> {
        DensityMatrix::new(matrix_from_spec(&self.rho0)?)
    }

    pub fn run<T: Real>(&self) -> Result<(Trajectory<T>, QslReport)> {
        let gen = self.generator::<T>()?;
        let rho0 = self.initial_state::<T>()?;
        let traj = evolve(&rho0, &gen, T::lit(self.tau), T::lit(self.dt))?;
        let report = reverse_qsl_report(&traj, &rho0)?;
        Ok((traj, report))
    }
}

/// Names of the scenarios shipped with the crate.
pub const BUNDLED_SCENARIOS: [&str; 5] = ["dephasing", "amplitude_damping", "fixed_point", "rabi", "qutrit_decay"];

pub fn bundled_scenario(name: &str) -> Result<Scenario> {
    let text = match name {
        "dephasing" => include_str!("../scenarios/dephasing.json"),
        "amplitude_damping" => include_str!("../scenarios/amplitude_damping.json"),
        "fixed_point" => include_str!("../scenarios/fixed_point.json"),
        "rabi" => include_str!("../scenarios/rabi.json"),
        "qutrit_decay" => include_str!("../scenarios/qutrit_decay.json"),
        _ => return Err(Error::Scenario(format!("unknown bundled scenario {name:?}"))),
    };
    Scenario::from_json(text)
}

/// Spin-1 lowering operator `J_- = J_x - i J_y`.
pub fn spin1_lowering<T: Real>() -> CMatrix<T> {
    spin1_x::<T>() - spin1_y::<T>() * ci::<T>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::pauli_x;
    use crate::states::BlochVector;

    fn dephasing_start() -> DensityMatrix<f64> {
        BlochVector::new(0.5, 0.0, 0.0).unwrap().to_state()
    }

    #[test]
    fn dephasing_generator_output() {
        let gen = LindbladGenerator::qubit_dephasing(0.7).unwrap();
        let out = lindblad_apply(&gen, &dephasing_start()).unwrap();
        let expected = pauli_x::<f64>() * cr(-0.7 * 0.5);
        assert!((out - expected).norm() < 1e-14);
        let diag = DensityMatrix::from_diagonal(&[0.3, 0.7]).unwrap();
        assert!(lindblad_apply(&gen, &diag).unwrap().norm() < 1e-15);
    }

    #[test]
    fn hamiltonian_only_is_commutator() {
        let h = Observable::pauli_x();
        let gen = LindbladGenerator::new(h.clone(), vec![], vec![]).unwrap();
        let rho = states::random_mixed::<f64>(2, 3).unwrap();
        let expected = matops::commutator(h.matrix(), rho.matrix()) * (-ci::<f64>());
        assert!((gen.apply(rho.matrix()) - expected).norm() < 1e-15);
    }

    #[test]
    fn generator_output_hermitian_traceless() {
        let gen = LindbladGenerator::new(
            Observable::spin1_z().scaled(0.4),
            vec![spin1_lowering(), spin1_x()],
            vec![0.2, 0.05],
        )
        .unwrap();
        for seed in 0..10 {
            let rho = states::random_mixed::<f64>(3, seed).unwrap();
            let out = gen.apply(rho.matrix());
            assert!(matops::max_asymmetry(&out) < 1e-10);
            assert!(out.trace().norm() < 1e-10);
        }
        assert!(LindbladGenerator::new(Observable::pauli_z(), vec![pauli_x::<f64>()], vec![-1.0]).is_err());
    }

    #[test]
    fn dephasing_decay_matches_closed_form() {
        let gamma = 0.5;
        let gen = LindbladGenerator::qubit_dephasing(gamma).unwrap();
        let traj = evolve(&dephasing_start(), &gen, 2.0, 0.01).unwrap();
        let end = states::bloch_from_qubit(traj.states.last().unwrap()).unwrap();
        assert!((end.x - 0.5 * (-2.0f64 * gamma * 2.0).exp()).abs() < 1e-6);
        assert_eq!(traj.bures[0], 0.0);
        assert!(halving_error(&dephasing_start(), &gen, 2.0, 0.01).unwrap() < 1e-8);
    }

    #[test]
    fn evolve_rejects_coarse_step() {
        let gen = LindbladGenerator::<f64>::zero(2);
        assert!(matches!(
            evolve(&dephasing_start(), &gen, 1.0, 0.1),
            Err(Error::Param(_))
        ));
    }

    #[test]
    fn zero_generator_is_constant() {
        let rho0 = states::random_mixed::<f64>(3, 9).unwrap();
        let gen = LindbladGenerator::zero(3);
        let traj = evolve(&rho0, &gen, 1.0, 0.01).unwrap();
        assert!(traj.states.iter().all(|s| s == &rho0));
        let report = qsl_assumption_check(&traj, &rho0);
        assert!(report.degenerate && report.holds());
        let lambda = lambda_reverse(&traj, &rho0, Branch::Negative).unwrap();
        let expected = states::von_neumann_entropy(&rho0) - 3f64.ln();
        assert!((lambda - expected).abs() < 1e-12);
        let check = pointwise_pb_check(&traj, &rho0, Branch::Negative).unwrap();
        assert!(check.holds);
    }

    #[test]
    fn dephasing_report() {
        let rho0 = dephasing_start();
        let gen = LindbladGenerator::qubit_dephasing(0.5).unwrap();
        let traj = evolve(&rho0, &gen, 2.0, 0.01).unwrap();
        let report = reverse_qsl_report(&traj, &rho0).unwrap();
        assert!(report.assumptions.monotone);
        assert_eq!(report.assumptions.sign, Some(Branch::Negative));
        assert!(report.lambda_reverse < 0.0);
        assert!(report.lambda_reverse <= report.entropy_gap + 1e-9);
        assert!(report.integrated_holds);
        assert!(report.pointwise.holds, "{:?}", report.pointwise);
        assert!(!report.time_bound_valid);
        assert_eq!(report.reason.as_deref(), Some("nonpositive Λ_reverse"));
    }

    #[test]
    fn bundled_scenarios_parse() {
        for name in BUNDLED_SCENARIOS {
            let s = bundled_scenario(name).unwrap();
            s.generator::<f64>().unwrap();
            s.initial_state::<f64>().unwrap();
        }
        assert!(bundled_scenario("nope").is_err());
    }

    #[test]
    fn rabi_is_flagged_non_monotone() {
        let (_, report) = bundled_scenario("rabi").unwrap().run::<f64>().unwrap();
        assert!(!report.assumptions.monotone);
        assert!(!report.pointwise.checked);
    }

    #[test]
    fn scenario_entries_accept_real_and_pairs() {
        let s = Scenario::from_json(
            r#"{"hamiltonian": [[0, [1, 0]], [[1, 0], 0]], "rho0": [[1, 0], [0, 0]], "tau": 1, "dt": 0.01}"#,
        )
        .unwrap();
        assert!((s.generator::<f64>().unwrap().hamiltonian().matrix() - pauli_x::<f64>()).norm() < 1e-15);
        assert!(Scenario::from_json(r#"{"hamiltonian": [[0, 1]], "rho0": [[1]], "tau": 1, "dt": 0.01}"#)
            .unwrap()
            .generator::<f64>()
            .is_err());
    }
}
