//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero on any failure.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use coherence_core::distill::{coherence_loss_ledger, distill_exact, distill_simulate, regularized_roof_estimate};
use coherence_core::measures::{
    c_l1, c_rel_ent, coherence_concurrence_qubit, concurrence_eigenvalues, concurrence_from_bloch, exact_value, r_pure,
    r_qubit_analytic, MeasureId,
};
use coherence_core::properties::{run_property_suite, SuiteConfig};
use coherence_core::qrng::{pipeline_compare, EntropyKind, DEFAULT_MARGIN};
use coherence_core::roof::{brute_force_roof_qubit, optimize_roof, RoofConfig};
use coherence_core::state::{
    binary_entropy, bloch_to_density, density_to_bloch, haar_random_pure, random_density, random_incoherent,
};
use coherence_core::{BlochVector, DensityMatrix, PureState};

struct Suite {
    failures: usize,
}

impl Suite {
    fn check(&mut self, id: &str, name: &str, passed: bool, detail: String) {
        println!("[{}] {id} {name}: {detail}", if passed { "PASS" } else { "FAIL" });
        if !passed {
            self.failures += 1;
        }
    }
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

fn qubit_roof_agreement(s: &mut Suite) {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for seed in 0..200u64 {
        let rho = random_density(2, 2, seed).unwrap();
        let numeric = optimize_roof(&rho, &RoofConfig { seed, ..RoofConfig::default() }).unwrap().value;
        worst = worst.max((numeric - r_qubit_analytic(&rho).unwrap().value).abs());
    }
    let t = secs(start.elapsed());
    s.check("1", "qubit roof agreement", worst <= 1e-6 && t <= 60.0, format!("max |err| = {worst:.2e} (tol 1e-6), {t:.1} s (limit 60 s)"));
}

fn brute_force_oracle(s: &mut Suite) {
    let mut worst = 0.0f64;
    for seed in 0..50u64 {
        let rho = random_density(2, 2, 10_000 + seed).unwrap();
        let brute = brute_force_roof_qubit(&rho, 128).unwrap();
        worst = worst.max((brute - r_qubit_analytic(&rho).unwrap().value).abs());
    }
    s.check("2", "brute-force oracle", worst <= 1e-3, format!("max |err| = {worst:.2e} (tol 1e-3)"));
}

fn concurrence_consistency(s: &mut Suite) {
    let (mut paths, mut l1) = (0.0f64, 0.0f64);
    for seed in 0..1000u64 {
        let rho = random_density(2, 1 + (seed % 2) as usize, 20_000 + seed).unwrap();
        let [e1, e2] = concurrence_eigenvalues(&rho).unwrap();
        let matrix_path = (e1.sqrt() - e2.sqrt()).abs();
        let bloch_path = concurrence_from_bloch(&density_to_bloch(&rho).unwrap());
        paths = paths.max((matrix_path - bloch_path).abs());
        l1 = l1.max((c_l1(&rho).value - coherence_concurrence_qubit(&rho).unwrap()).abs());
    }
    s.check("3a", "concurrence matrix vs Bloch path", paths <= 1e-10, format!("max |diff| = {paths:.2e} (tol 1e-10)"));
    s.check("3b", "l1 coherence equals concurrence", l1 <= 1e-10, format!("max |diff| = {l1:.2e} (tol 1e-10)"));
}

fn pure_state_identity(s: &mut Suite) {
    let mut worst = 0.0f64;
    for seed in 0..500u64 {
        let d = 2 + (seed % 5) as usize;
        let psi = haar_random_pure(d, 30_000 + seed);
        worst = worst.max((r_pure(&psi).value - c_rel_ent(&psi.projector()).value).abs());
    }
    s.check("4", "pure-state identity", worst <= 1e-12, format!("max |diff| = {worst:.2e} (tol 1e-12), d in 2..=6"));
}

fn property_suite(s: &mut Suite) {
    let start = Instant::now();
    let cfg = SuiteConfig { max_dim: 6, samples: 1000, seed: 40_000, measures: vec![MeasureId::RelEnt, MeasureId::L1, MeasureId::QubitAnalytic] };
    let reports = run_property_suite(&cfg).unwrap();
    let t = secs(start.elapsed());
    let failed: Vec<String> = reports.iter().filter(|r| !r.passed).map(|r| format!("{}/{}", r.property, r.measure)).collect();
    let worst = reports
        .iter()
        .filter(|r| r.property != coherence_core::properties::PropertyId::C1Prime)
        .map(|r| r.worst_slack)
        .fold(f64::NEG_INFINITY, f64::max);
    s.check(
        "5",
        "property suite",
        failed.is_empty() && t <= 120.0,
        format!("{} reports, violations {failed:?}, worst slack {worst:.2e} (tol 1e-9), {t:.1} s (limit 120 s)", reports.len()),
    );
}

fn distillation_yield(s: &mut Suite) {
    let psi = PureState::qubit_from_population(0.8).unwrap();
    let target = binary_entropy(0.8);
    let start = Instant::now();
    let reports: Vec<_> = (0..20u64).map(|seed| distill_simulate(&psi, 50, 200, seed).unwrap()).collect();
    let t = secs(start.elapsed());
    let y = reports[0].yield_per_copy;
    let mean = reports.iter().map(|r| r.yield_per_copy).sum::<f64>() / reports.len() as f64;
    s.check("6a", "distillation yield", (y - target).abs() <= 0.02, format!("yield {y:.4} (seed 0; 20-seed mean {mean:.4}) vs H(0.8) = {target:.4}, tol 0.02"));
    let worst = reports
        .iter()
        .map(|r| {
            let (actual, bound) = coherence_loss_ledger(r);
            actual - bound
        })
        .fold(f64::NEG_INFINITY, f64::max);
    s.check("6b", "coherence loss bound", reports.iter().all(|r| r.within_bound), format!("max (loss - bound) = {worst:.1} bits over 20 seeds"));
    s.check("6c", "distillation runtime", t <= 10.0, format!("{t:.3} s (limit 10 s)"));
}

fn exact_protocol(s: &mut Suite) {
    let run = distill_exact(&PureState::maximally_coherent(2), 4).unwrap();
    let shots = 10_000;
    let freq = run.sample_outcomes(shots, 50_000)[2] as f64 / shots as f64;
    let p = 6.0 / 16.0;
    let sigma = (p * (1.0 - p) / shots as f64).sqrt();
    s.check("7a", "exact k=2 frequency", (freq - p).abs() <= 3.0 * sigma, format!("{freq:.4} vs 0.3750, 3 sigma = {:.4}", 3.0 * sigma));
    let state = run.outcomes[2].state.as_ref().unwrap();
    let nonzero: Vec<f64> = state.iter().map(|z| z.norm()).filter(|&a| a > 0.0).collect();
    let worst = nonzero.iter().map(|a| (a - 6f64.sqrt().recip()).abs()).fold(0.0, f64::max);
    s.check("7b", "exact k=2 state", nonzero.len() == 6 && worst <= 1e-10, format!("{} amplitudes, max |err| = {worst:.2e} (tol 1e-10)", nonzero.len()));
}

fn regularized_estimate(s: &mut Suite) {
    let cfg = RoofConfig { seed: 60_000, ..RoofConfig::default() };
    let mut mixed = vec![bloch_to_density(&BlochVector::new(0.6, 0.0, 0.0).unwrap())];
    mixed.extend((0..4u64).map(|seed| random_density(2, 2, 60_000 + seed).unwrap()));
    let mut excess = f64::NEG_INFINITY;
    for rho in &mixed {
        let per_copy = regularized_roof_estimate(rho, 2, &cfg).unwrap();
        excess = excess.max(per_copy - r_qubit_analytic(rho).unwrap().value);
    }
    s.check("8a", "two-copy roof below single copy", excess <= 1e-6, format!("max (per-copy - analytic) = {excess:.2e} (tol 1e-6)"));
    let mut worst = 0.0f64;
    for seed in 0..5u64 {
        let psi = haar_random_pure(2, 61_000 + seed);
        let per_copy = regularized_roof_estimate(&DensityMatrix::from_pure(&psi), 2, &cfg).unwrap();
        worst = worst.max((per_copy - r_pure(&psi).value).abs());
    }
    s.check("8b", "two-copy roof of pure states", worst <= 1e-6, format!("max |diff| = {worst:.2e} (tol 1e-6)"));
}

fn pipeline_equivalence(s: &mut Suite) {
    let start = Instant::now();
    let biased = pipeline_compare(&PureState::qubit_from_population(0.8).unwrap(), 200, 50, 70_000, DEFAULT_MARGIN, EntropyKind::Shannon).unwrap();
    let plus = pipeline_compare(&PureState::maximally_coherent(2), 200, 50, 70_001, DEFAULT_MARGIN, EntropyKind::Shannon).unwrap();
    let t = secs(start.elapsed());
    for (id, label, r) in [("9a", "|a0|^2 = 0.8", &biased), ("9b", "|+>", &plus)] {
        s.check(
            id,
            &format!("pipeline lengths, {label}"),
            r.lengths_agree,
            format!("path A {} bits, path B {} bits, gap {:.1}% (limit 5%)", r.path_a_bits, r.path_b_bits, 100.0 * r.relative_gap),
        );
    }
    let z = biased.path_a_monobit_z.abs().max(plus.path_a_monobit_z.abs());
    s.check("9c", "extracted output monobit", z < 3.0, format!("max |z| = {z:.2} (limit 3)"));
    s.check("9d", "pipeline runtime", t <= 30.0, format!("{t:.2} s (limit 30 s)"));
}

fn measure_bounds(s: &mut Suite) {
    // Entropic measures are capped by log2 d; the l1 norm by d - 1.
    let mut worst = f64::NEG_INFINITY;
    let mut record = |value: f64, cap: f64| worst = worst.max((-value).max(value - cap));
    for seed in 0..500u64 {
        let d = 2 + (seed % 5) as usize;
        let states = [
            random_density(d, 1 + (seed as usize / 5) % d, 80_000 + seed).unwrap(),
            random_incoherent(d, 80_000 + seed),
            DensityMatrix::maximally_coherent(d),
        ];
        let log_d = (d as f64).log2();
        for rho in &states {
            record(c_rel_ent(rho).value, log_d);
            record(c_l1(rho).value, (d - 1) as f64);
            if d == 2 {
                record(exact_value(MeasureId::QubitAnalytic, rho).unwrap().value, log_d);
                record(exact_value(MeasureId::RoofRandomness, rho).unwrap().value, log_d);
            }
        }
        if d > 2 && seed % 25 < 5 {
            let cfg = RoofConfig { restarts: 2, seed, ..RoofConfig::default() };
            record(optimize_roof(&states[0], &cfg).unwrap().value, log_d);
        }
        record(r_pure(&haar_random_pure(d, 81_000 + seed)).value, log_d);
    }
    s.check("10a", "measure bounds", worst <= 1e-9, format!("max excursion outside [0, cap] = {worst:.2e} (tol 1e-9)"));
    let mut err = 0.0f64;
    for d in 2..=6 {
        let psi = PureState::maximally_coherent(d);
        let log_d = (d as f64).log2();
        err = err.max((r_pure(&psi).value - log_d).abs());
        err = err.max((optimize_roof(&psi.projector(), &RoofConfig::default()).unwrap().value - log_d).abs());
        err = err.max((c_rel_ent(&psi.projector()).value - log_d).abs());
    }
    s.check("10b", "maximally coherent randomness", err <= 1e-9, format!("max |R - log2 d| = {err:.2e} (tol 1e-9), d in 2..=6"));
}

fn main() -> ExitCode {
    let mut suite = Suite { failures: 0 };
    qubit_roof_agreement(&mut suite);
    brute_force_oracle(&mut suite);
    concurrence_consistency(&mut suite);
    pure_state_identity(&mut suite);
    property_suite(&mut suite);
    distillation_yield(&mut suite);
    exact_protocol(&mut suite);
    regularized_estimate(&mut suite);
    pipeline_equivalence(&mut suite);
    measure_bounds(&mut suite);
    if suite.failures == 0 {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {} criteria failed", suite.failures);
        ExitCode::FAILURE
    }
}
