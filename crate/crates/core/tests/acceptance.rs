//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so the report reads top to
//! bottom; the process exits non-zero when any criterion fails.

use std::time::Instant;

use rand::Rng;
use sumur::audit::{self, AuditConfig};
use sumur::bounds::{self, bh_term, condition2_partner};
use sumur::dynamics::{self, LindbladGenerator};
use sumur::experiments;
use sumur::matops;
use sumur::protocol;
use sumur::qubitgeo;
use sumur::reverse;
use sumur::states::{self, BlochVector, DensityMatrix};
use sumur::{CMatrix, Observable};

const SEED: u64 = 20_240_601;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

/// Instance `i` of the shared random batch: HS-random state and two random
/// observables in dimension 2, 3 or 4.
fn batch_instance(i: u64) -> (DensityMatrix<f64>, Observable<f64>, Observable<f64>) {
    let dim = [2, 3, 4][i as usize % 3];
    let mut rng = states::rng_for(SEED, i);
    let rho = states::random_mixed_with(&mut rng, dim).unwrap();
    let a = Observable::new(states::random_hermitian(&mut rng, dim)).unwrap();
    let b = Observable::new(states::random_hermitian(&mut rng, dim)).unwrap();
    (rho, a, b)
}

fn uncertainty_equality() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for i in 0..1000 {
        let (rho, a, b) = batch_instance(i);
        worst = worst.max(bounds::uncertainty_equality_residual(&rho, &a, &b).unwrap());
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst < 1e-10 && secs < 10.0,
        format!("worst residual {worst:.2e} over 1000 instances (d = 2, 3, 4) in {secs:.2} s"),
    )
}

fn ordering_audit(summary: &audit::AuditSummary) -> Outcome {
    let families = [
        "robertson",
        "theorem2_pb",
        "theorem1_random_perp",
        "theorem1_optimal",
        "theorem4_fidelity",
        "reverse_numrad",
        "reverse_berger",
        "reverse_kittaneh",
        "reverse_elhaddad_kittaneh",
    ];
    let mut violations = 0;
    let mut parts = Vec::new();
    for name in families {
        let f = &summary.families[name];
        violations += f.failures;
        if f.checked != 1000 {
            violations += 1;
        }
        parts.push(format!("{name} {}/{}", f.checked - f.failures, f.checked));
    }
    outcome(violations == 0, format!("{violations} violations; {}", parts.join(", ")))
}

fn scalar_anchors() -> Outcome {
    let mut errs: Vec<(String, f64)> = Vec::new();
    let (x, y) = (Observable::pauli_x(), Observable::pauli_y());
    let half = DensityMatrix::<f64>::maximally_mixed(2);
    errs.push(("I/2 sum".into(), (bounds::sum_of_variances(&half, &x, &y).unwrap() - 2.0).abs()));
    let pb = bounds::theorem2_pb_bound(&half, &x, &y).unwrap().bound_value;
    errs.push(("I/2 PB".into(), (pb - (2f64.ln() - (1.0 + (-4f64).exp()).ln())).abs()));
    let diag = DensityMatrix::from_diagonal(&[0.75, 0.25]).unwrap();
    let pb = bounds::theorem2_pb_bound(&diag, &x, &y).unwrap().bound_value;
    // 1 + S(rho) - ln(1 + e^-4)
    let s = -(0.75f64 * 0.75f64.ln() + 0.25 * 0.25f64.ln());
    errs.push(("diag PB".into(), (pb - (1.0 + s - (1.0 + (-4f64).exp()).ln())).abs()));
    let printed = (pb - (1.0 + 0.56234 - 0.01815)).abs();
    let p1 = experiments::fig1_row(1.0).unwrap();
    errs.push(("fig1 p=1 sum".into(), (p1.sum_variances - 4.0 / 9.0).abs()));
    let p0 = experiments::fig1_row(0.0).unwrap();
    errs.push(("fig1 p=0 sum".into(), (p0.sum_variances - 4.0 / 3.0).abs()));
    errs.push((
        "fig1 p=0 PB".into(),
        (p0.theorem2_pb - (3f64.ln() - (1.0 + 2.0 * (-2f64).exp()).ln())).abs(),
    ));
    errs.push(("fig1 p=0 reverse".into(), (p0.theorem4_reverse - 8.0 / 3.0).abs()));
    let (worst_name, worst) = errs
        .iter()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(n, e)| (n.clone(), *e))
        .unwrap();
    outcome(
        worst < 1e-9 && printed < 1e-5,
        format!(
            "{} anchors, worst {worst:.2e} ({worst_name}); diag PB vs 5-digit value {printed:.1e}",
            errs.len()
        ),
    )
}

fn theorem3_tightness() -> Outcome {
    let mut worst = 0.0f64;
    let mut invalid = 0;
    for i in 0..100u64 {
        let mut rng = states::rng_for(SEED + 3, i);
        let dim = [2, 3, 4][i as usize % 3];
        // random spectrum in a random eigenbasis
        let spectrum: Vec<f64> = (0..dim).map(|_| rng.random_range(0.05..5.0)).collect();
        let u = matops::herm_eig(&states::random_hermitian::<f64, _>(&mut rng, dim)).unwrap();
        let k = &u.vectors * CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            dim,
            spectrum.iter().map(|&l| sumur::scalar::cr(l)),
        )) * u.vectors.adjoint();
        let eig = matops::herm_eig(&k).unwrap();
        let (top, bottom) = (eig.vector(dim - 1), eig.vector(0));
        let theta = rng.random_range(0.05..std::f64::consts::FRAC_PI_2 - 0.05);
        let phase = sumur::scalar::c::<f64>(0.0, rng.random_range(0.0..std::f64::consts::TAU)).exp();
        let psi = &top * sumur::scalar::cr((theta / 2.0).cos()) + &bottom * (phase * (theta / 2.0).sin());
        let phi = condition2_partner(&k, &psi).expect("distinct extreme eigenvalues");
        let t = bh_term(&k, &psi, &phi).unwrap();
        if !t.valid {
            invalid += 1;
            continue;
        }
        let target = psi.dotc(&(&k * &psi)).re;
        worst = worst.max((t.term_cos2 - target).abs());
    }
    outcome(
        worst < 1e-8 && invalid == 0,
        format!("worst |bound - sum| {worst:.2e} over 100 spectra (cos^2 form), {invalid} invalid"),
    )
}

fn vectorization_identities() -> Outcome {
    let mut worst_conc = 0.0f64;
    let mut example = None;
    for i in 0..1000u64 {
        let mut rng = states::rng_for(SEED + 5, i);
        let rho = states::random_mixed_with::<f64, _>(&mut rng, 2).unwrap();
        let r = states::bloch_from_qubit(&rho).unwrap();
        let real = BlochVector::new(r.x, 0.0, r.z).unwrap();
        let c = qubitgeo::concurrence_identity_check(real).unwrap();
        if c.residual > worst_conc {
            worst_conc = c.residual;
            example = Some((real, c.formula, c.direct));
        }
    }
    let mut worst_vec = 0.0f64;
    for i in 0..1000u64 {
        let mut rng = states::rng_for(SEED + 6, i);
        let dim = 2 + i as usize % 4;
        let a = CMatrix::from_fn(dim, dim, |_, _| sumur::scalar::c::<f64>(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let b = CMatrix::from_fn(dim, dim, |_, _| sumur::scalar::c::<f64>(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let lhs = (a.adjoint() * &b).trace();
        let rhs = states::vectorize(&a).dotc(&states::vectorize(&b));
        worst_vec = worst_vec.max((lhs - rhs).norm());
    }
    let (r, f, d) = example.unwrap();
    outcome(
        worst_conc < 1e-10 && worst_vec < 1e-12,
        format!(
            "concurrence worst residual {worst_conc:.3} (r = ({:.3}, 0, {:.3}): identity {f:.4}, direct {d:.4}); \
             vectorization worst {worst_vec:.2e}",
            r.x, r.z
        ),
    )
}

fn qubit_purity() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for i in 0..10_000u64 {
        let (_, rec) = experiments::fig3_sample(SEED + 7, i).unwrap();
        worst = worst.max(rec.cross_check_error).max((rec.bloch_radius - rec.direct_radius).abs());
    }
    let rows = experiments::fig3_rows(experiments::FIG3_DEFAULT_SAMPLES, SEED + 8).unwrap();
    let trend = experiments::fig3_trend(&rows);
    let secs = start.elapsed().as_secs_f64();
    let means: Vec<String> = trend.bins.iter().map(|b| format!("{:.3}", b.mean)).collect();
    outcome(
        worst < 1e-10 && trend.passed && secs < 60.0,
        format!(
            "closed form vs matrix worst {worst:.2e} on 10000; trend over {} samples worst z {:.2} (bin means {}); {secs:.1} s",
            rows.len(),
            trend.worst_z,
            means.join(" ")
        ),
    )
}

fn dynamics_checks() -> Outcome {
    let scenario = dynamics::bundled_scenario("dephasing").unwrap();
    let rho0 = scenario.initial_state::<f64>().unwrap();
    let gamma = scenario.rates[0];
    let traj = dynamics::evolve(&rho0, &LindbladGenerator::qubit_dephasing(gamma).unwrap(), scenario.tau, scenario.dt).unwrap();
    let r0 = states::bloch_from_qubit(&rho0).unwrap();
    let mut decay_err = 0.0f64;
    for (t, rho) in traj.times.iter().zip(&traj.states) {
        let r = states::bloch_from_qubit(rho).unwrap();
        let e = (-2.0 * gamma * t).exp();
        decay_err = decay_err
            .max((r.x - r0.x * e).abs())
            .max((r.y - r0.y * e).abs())
            .max((r.z - r0.z).abs());
    }
    let mut pointwise = Vec::new();
    let mut ceiling_ok = true;
    let mut worst_violation = f64::NEG_INFINITY;
    for name in dynamics::BUNDLED_SCENARIOS {
        let s = dynamics::bundled_scenario(name).unwrap();
        let rho0 = s.initial_state::<f64>().unwrap();
        let (_, report) = s.run::<f64>().unwrap();
        let ceiling = states::von_neumann_entropy(&rho0) - (rho0.dim() as f64).ln();
        ceiling_ok &= report.lambda_reverse <= ceiling + 1e-9;
        if report.assumptions.holds() && report.pointwise.checked {
            worst_violation = worst_violation.max(report.pointwise.max_violation);
            pointwise.push((name, report.pointwise.max_violation < 1e-6));
        }
    }
    let all_pointwise = pointwise.iter().all(|p| p.1);
    outcome(
        decay_err < 1e-6 && all_pointwise && ceiling_ok && !pointwise.is_empty(),
        format!(
            "dephasing decay error {decay_err:.2e}; pointwise holds on {}/{} assumption-passing scenarios (worst {worst_violation:.2e}); \
             Lambda ceiling {}",
            pointwise.iter().filter(|p| p.1).count(),
            pointwise.len(),
            if ceiling_ok { "holds on all 5" } else { "violated" }
        ),
    )
}

fn protocol_checks() -> Outcome {
    let zero = BlochVector::new(0.0, 0.0, 0.0).unwrap();
    let mut worst_res = 0.0f64;
    let mut worst_gap = f64::NEG_INFINITY;
    let mut failures = 0;
    for i in 0..100u64 {
        let mut rng = states::rng_for(SEED + 9, i);
        let m = states::random_unit3::<f64, _>(&mut rng);
        let s = protocol::orthogonal_target(m, rng.random_range(0.05..1.0), &mut rng);
        match protocol::construct_b(zero, s, m, protocol::DEFAULT_STARTS, &mut rng) {
            Ok(sol) => {
                let est = protocol::fidelity_lower_bound(&zero.to_state(), &Observable::bloch(m), &sol, &s.to_state()).unwrap();
                worst_res = worst_res.max(sol.residual);
                worst_gap = worst_gap.max(est.bound - est.fidelity_sq);
            }
            Err(_) => failures += 1,
        }
    }
    let stats = protocol::success_rate(200, SEED + 10, protocol::DEFAULT_STARTS);
    outcome(
        failures == 0 && worst_res < 1e-8 && worst_gap <= 1e-8,
        format!(
            "analytic family: {} of 100 solved, worst residual {worst_res:.2e}, worst bound - F^2 {worst_gap:.2e}; \
             random family success rate {:.1}% ({}/{})",
            100 - failures,
            100.0 * stats.rate,
            stats.solved,
            stats.attempted
        ),
    )
}

fn second_form_counterexample(summary: &audit::AuditSummary) -> Outcome {
    let fam = &summary.families["theorem4_second_form"];
    // re-derive from the dumped matrices: K/Tr K pure, rho mixed, S = +inf
    let confirmed = fam.counterexamples.iter().find(|c| {
        let rho = DensityMatrix::new(dynamics::matrix_from_spec::<f64>(&c.rho).unwrap()).unwrap();
        let a = Observable::new(dynamics::matrix_from_spec(&c.a).unwrap()).unwrap();
        let b = Observable::new(dynamics::matrix_from_spec(&c.b).unwrap()).unwrap();
        let r = reverse::theorem4_fidelity_bound(&rho, &a, &b).unwrap();
        let sigma = r.sigma_k.clone().unwrap();
        let sigma_pure = (states::purity(&sigma) - 1.0).abs() < 1e-10;
        let rho_mixed = states::purity(&rho) < 1.0 - 1e-6;
        sigma_pure && rho_mixed && states::relative_entropy(&rho, &sigma).is_infinite()
    });
    outcome(
        confirmed.is_some(),
        format!(
            "{} of {} second-form checks fail; {} dumped, pure-K witness {}",
            fam.failures,
            fam.checked,
            fam.counterexamples.len(),
            if confirmed.is_some() { "recorded and re-verified" } else { "missing" }
        ),
    )
}

fn main() {
    let summary = audit::run_audit(&AuditConfig {
        dims: vec![2, 3, 4],
        samples: 1000,
        seed: SEED,
    })
    .expect("audit runs");
    let criteria: Vec<(&str, Outcome)> = vec![
        ("uncertainty equality residual < 1e-10, 1000 instances, < 10 s", uncertainty_equality()),
        ("ordering audit on 1000 instances, zero violations", ordering_audit(&summary)),
        ("derived scalar anchors to 1e-9", scalar_anchors()),
        ("Bauer-Householder tightness under the condition-2 construction", theorem3_tightness()),
        ("concurrence identity < 1e-10 and vectorization identity < 1e-12", vectorization_identities()),
        ("qubit purity closed form, purity-vs-angle trend, < 60 s", qubit_purity()),
        ("dynamics: dephasing decay, pointwise speed limit, Lambda ceiling", dynamics_checks()),
        ("protocol analytic family and random-family rate", protocol_checks()),
        ("second-form reverse bound counterexample recorded", second_form_counterexample(&summary)),
    ];
    let mut failed = 0;
    for (k, (name, o)) in criteria.iter().enumerate() {
        println!("{} [{}] {name}: {}", if o.passed { "PASS" } else { "FAIL" }, k + 1, o.detail);
        failed += usize::from(!o.passed);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
