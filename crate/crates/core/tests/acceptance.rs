// Copyright 2026 The ftgate Authors
// SPDX-License-Identifier: Apache-2.0

//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! By default only the criteria whose runtime budget is at most two minutes
//! run (1, 3, 4, 8, 9); the others print SKIP. Pass `--full` (or set
//! `FTGATE_ACCEPTANCE=full`) to run everything, or `--only 2,5` (or
//! `FTGATE_ACCEPTANCE=2,5`) to pick criteria. Criterion 6 runs all seven
//! gates unless `FTGATE_C6_GATES` names a subset, in which case it cannot
//! report PASS.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use ftgate::codes::{bitflip3_code, five_qubit_code, target_gate};
use ftgate::gates::{
    composite_ry_check, euler_sequence, local_sequence, physical_rotation, sequence_product, standard_gate, Axis,
    GateName,
};
use ftgate::linalg::{
    expm_hermitian_prop, gate_error_metrics, hermitian_eigen, identity, kron_all, max_abs_diff, sigma_x, unitarity_defect,
    ComplexMatrix, C64,
};
use ftgate::models::{
    build_global_optimal, build_local_optimal, GlobalModelParams, HamiltonianModel, LocalModelParams,
};
use ftgate::optimize::{
    gradient, initial_guess, iteration_sweep_experiment, synthesize, synthesize_from, Algorithm, OptimizerConfig,
    SweepRow, SweepSettings, SweepVariable,
};
use ftgate::propagate::{
    fidelity_phase_invariant, fidelity_strict, propagate, simulate_gaussian_baseline, BaselineParams,
    PiecewisePulse,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const QUICK: &[u32] = &[1, 3, 4, 8, 9];

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn selection() -> Vec<u32> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mut spec = std::env::var("FTGATE_ACCEPTANCE").ok();
    let mut i = 0;
    while i < args.len() {
        match args[i].as_str() {
            "--full" => spec = Some("full".into()),
            "--only" if i + 1 < args.len() => {
                spec = Some(args[i + 1].clone());
                i += 1;
            }
            a if a.starts_with("--only=") => spec = Some(a["--only=".len()..].into()),
            _ => {}
        }
        i += 1;
    }
    match spec.as_deref() {
        None | Some("") | Some("quick") => QUICK.to_vec(),
        Some("full") | Some("all") => (1..=10).collect(),
        Some(list) => list.split(',').filter_map(|s| s.trim().parse().ok()).collect(),
    }
}

fn main() -> ExitCode {
    let selected = selection();
    let names = [
        "geometric baseline, uncoupled",
        "coupling-induced collapse",
        "decomposition identities",
        "code construction",
        "three-qubit code synthesis",
        "five-qubit local synthesis",
        "five-qubit global property check",
        "gradient oracle",
        "norm identity",
        "iteration-count trends",
    ];
    let mut failed = 0;
    for (idx, name) in names.iter().enumerate() {
        let id = idx as u32 + 1;
        if !selected.contains(&id) {
            println!("SKIP criterion {id} ({name}): not selected; run with --full or --only {id}");
            continue;
        }
        let start = Instant::now();
        let v = match id {
            1 => criterion_1(),
            2 => criterion_2(),
            3 => criterion_3(),
            4 => criterion_4(),
            5 => criterion_5(),
            6 => criterion_6(),
            7 => criterion_7(),
            8 => criterion_8(),
            9 => criterion_9(),
            _ => criterion_10(),
        };
        let secs = start.elapsed().as_secs_f64();
        if !v.pass {
            failed += 1;
        }
        println!(
            "{} criterion {id} ({name}): {} [{secs:.1} s]",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn within(start: Instant, limit: Duration) -> bool {
    start.elapsed() <= limit
}

fn criterion_1() -> Verdict {
    let start = Instant::now();
    let r = match simulate_gaussian_baseline(&BaselineParams::default()) {
        Ok(r) => r,
        Err(e) => return verdict(false, e.to_string()),
    };
    let fast = within(start, Duration::from_secs(120));
    verdict(
        r.max_fidelity >= 0.999 && fast,
        format!(
            "max phase-invariant fidelity {:.6} at t = {:.2} over {} steps (need >= 0.999 within 120 s)",
            r.max_fidelity, r.time_of_max, r.steps
        ),
    )
}

fn criterion_2() -> Verdict {
    let start = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for (j, expected) in [(1e-4, 0.9978), (1e-3, 0.8690), (1e-2, 0.2697)] {
        let params = BaselineParams {
            j,
            ..BaselineParams::default()
        };
        match simulate_gaussian_baseline(&params) {
            Ok(r) => {
                let ok = (r.max_fidelity - expected).abs() <= 0.02;
                pass &= ok;
                parts.push(format!("J={j}: {:.4} vs {expected} {}", r.max_fidelity, if ok { "ok" } else { "off" }));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("J={j}: {e}"));
            }
        }
    }
    let fast = within(start, Duration::from_secs(600));
    verdict(pass && fast, format!("{} (tolerance 0.02, 600 s)", parts.join("; ")))
}

/// Elementwise distance after removing the best global phase.
fn phase_aligned_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let overlap: C64 = a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum();
    let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { C64::new(1.0, 0.0) };
    max_abs_diff(&(a * phase), b)
}

fn criterion_3() -> Verdict {
    let mut worst_fid: f64 = 1.0;
    for g in GateName::ALL {
        let w = standard_gate(g);
        worst_fid = worst_fid.min(fidelity_phase_invariant(&w, &sequence_product(&euler_sequence(g))));
        worst_fid = worst_fid.min(fidelity_phase_invariant(&w, &sequence_product(&local_sequence(g))));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let omega = 10.0;
    let mut worst_ry: f64 = 0.0;
    for _ in 0..20 {
        let phi: f64 = rng.random_range(-1.4..1.4);
        let product = match composite_ry_check(omega * phi.tan(), omega) {
            Ok(m) => m,
            Err(e) => return verdict(false, e.to_string()),
        };
        worst_ry = worst_ry.max(phase_aligned_diff(&physical_rotation(Axis::Y, 4.0 * phi), &product));
    }
    verdict(
        worst_fid >= 1.0 - 1e-10 && worst_ry <= 1e-10,
        format!("14 products: worst fidelity 1 - {:.1e}; 20 composite R_y: worst deviation {worst_ry:.1e}", 1.0 - worst_fid),
    )
}

fn criterion_4() -> Verdict {
    let code = five_qubit_code();
    let gram = max_abs_diff(&code.displaced_gram(), &identity(32));
    let x_l = match target_gate(&code, GateName::X) {
        Ok(t) => max_abs_diff(&t.matrix, &kron_all(&vec![sigma_x(); 5])),
        Err(e) => return verdict(false, e.to_string()),
    };
    let mut unitary: f64 = 0.0;
    for g in GateName::ALL {
        match target_gate(&code, g) {
            Ok(t) => unitary = unitary.max(unitarity_defect(&t.matrix)),
            Err(e) => return verdict(false, format!("{g}: {e}")),
        }
    }
    verdict(
        gram <= 1e-9 && x_l <= 1e-9 && unitary <= 1e-9,
        format!("Gram deviation {gram:.1e}; X_L vs X^5 {x_l:.1e}; worst unitarity defect {unitary:.1e}"),
    )
}

fn nondecreasing(history: &[f64]) -> bool {
    history.windows(2).all(|w| w[1] >= w[0])
}

fn criterion_5() -> Verdict {
    let code = bitflip3_code();
    let model = match build_global_optimal(&GlobalModelParams::evenly_spaced(3, 10.0, 2.0, 1.0)) {
        Ok(m) => m,
        Err(e) => return verdict(false, e.to_string()),
    };
    let config = OptimizerConfig::default();
    let mut pass = true;
    let mut parts = Vec::new();
    for g in GateName::ALL {
        let target = target_gate(&code, g).expect("targets build").matrix;
        let start = Instant::now();
        match synthesize(&model, &target, 10.0, 80, &config, Algorithm::Sequential) {
            Ok(r) => {
                let fast = within(start, Duration::from_secs(600));
                let mono = nondecreasing(&r.fidelity_history);
                let ok = r.converged && r.final_fidelity >= 0.9999 && fast && mono;
                pass &= ok;
                parts.push(format!(
                    "{g} {} F={:.6} sweeps={}{}",
                    if ok { "ok" } else { "FAILED" },
                    r.final_fidelity,
                    r.iterations,
                    if mono { "" } else { " non-monotone" }
                ));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("{g}: {e}"));
            }
        }
    }
    verdict(pass, parts.join("; "))
}

fn criterion_6() -> Verdict {
    let gates: Vec<GateName> = match std::env::var("FTGATE_C6_GATES") {
        Ok(list) => list.split(',').filter_map(|s| s.trim().parse().ok()).collect(),
        Err(_) => GateName::ALL.to_vec(),
    };
    let code = five_qubit_code();
    let model = build_local_optimal(&LocalModelParams::default()).expect("local model");
    let config = OptimizerConfig {
        max_iterations: Some(usize::MAX / 2),
        time_limit_secs: Some(4.0 * 3600.0),
        ..OptimizerConfig::for_local_model(10.0)
    };
    let mut pass = gates.len() == GateName::ALL.len();
    let mut parts = Vec::new();
    for g in gates {
        let target = target_gate(&code, g).expect("targets build").matrix;
        let start = Instant::now();
        let pulse = initial_guess(model.num_controls(), 300, 30.0, &config).expect("initial guess");
        let mut observer = |i: usize, f: f64| {
            if i % 500 == 0 {
                eprintln!("  criterion 6 {g}: sweep {i} F={f:.6} ({:.0} s)", start.elapsed().as_secs_f64());
            }
        };
        match synthesize_from(&model, &target, pulse, &config, Algorithm::Sequential, &mut observer) {
            Ok(r) => {
                let ok = r.converged && r.metrics.hs_norm <= 0.0805;
                pass &= ok;
                parts.push(format!(
                    "{g} {} F={:.6} hs={:.4} sweeps={} {:.0} s",
                    if ok { "ok" } else { "FAILED" },
                    r.final_fidelity,
                    r.metrics.hs_norm,
                    r.iterations,
                    r.wall_time_secs
                ));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("{g}: {e}"));
            }
        }
    }
    if parts.len() < GateName::ALL.len() {
        parts.push("subset only (FTGATE_C6_GATES)".into());
    }
    verdict(pass, parts.join("; "))
}

fn criterion_7() -> Verdict {
    let start = Instant::now();
    let code = five_qubit_code();
    let model = build_global_optimal(&GlobalModelParams::default()).expect("global model");
    let target = target_gate(&code, GateName::X).expect("target").matrix;
    let config = OptimizerConfig {
        max_iterations: Some(50),
        ..OptimizerConfig::default()
    };
    match synthesize(&model, &target, 125.0, 1250, &config, Algorithm::Sequential) {
        Ok(r) => {
            let h = &r.fidelity_history;
            let gain = h[h.len() - 1] - h[0];
            let mono = nondecreasing(h);
            let fast = within(start, Duration::from_secs(1800));
            verdict(
                mono && gain >= 0.05 && h.len() == 51 && fast,
                format!(
                    "X gate, 50 sweeps: F {:.5} -> {:.5} (gain {gain:.4}, need >= 0.05), monotone={mono}",
                    h[0],
                    h[h.len() - 1]
                ),
            )
        }
        Err(e) => verdict(false, e.to_string()),
    }
}

fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let mut h = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        h[(i, i)] = C64::new(rng.random_range(-1.0..1.0), 0.0);
        for j in 0..i {
            let z = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
        }
    }
    h
}

fn random_unitary(n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    expm_hermitian_prop(&(random_hermitian(n, rng) * C64::new(3.0, 0.0)), 1.0).expect("Hermitian")
}

/// Random Hermitian rescaled to unit spectral norm.
fn unit_hermitian(n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let h = random_hermitian(n, rng);
    let (values, _) = hermitian_eigen(&h);
    let norm = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    h / C64::new(norm, 0.0)
}

fn criterion_8() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let model = HamiltonianModel::new(
        2,
        unit_hermitian(4, &mut rng),
        vec![unit_hermitian(4, &mut rng), unit_hermitian(4, &mut rng)],
        vec!["a".into(), "b".into()],
    )
    .expect("random model");
    let target = random_unitary(4, &mut rng);
    let steps = 10;
    let dt = 1e-3;
    let mut pulse = PiecewisePulse::uniform(2, steps, steps as f64 * dt).expect("pulse");
    for m in 0..2 {
        for k in 0..steps {
            pulse.set_amplitude(m, k, rng.random_range(-1.0..1.0)).expect("finite");
        }
    }
    let g = match gradient(&model, &target, &pulse) {
        Ok(g) => g,
        Err(e) => return verdict(false, e.to_string()),
    };
    let f = |p: &PiecewisePulse| fidelity_strict(&target, &propagate(&model, p, None).expect("propagates").unitary);
    let h = 1e-6;
    let scale = model.dim() as f64 / dt;
    let mut worst: f64 = 0.0;
    for m in 0..2 {
        for k in 0..steps {
            let u = pulse.amplitude(m, k);
            let mut plus = pulse.clone();
            plus.set_amplitude(m, k, u + h).expect("finite");
            let mut minus = pulse.clone();
            minus.set_amplitude(m, k, u - h).expect("finite");
            let fd = (f(&plus) - f(&minus)) / (2.0 * h) * scale;
            worst = worst.max((g[m][k] - fd).abs() / fd.abs());
        }
    }
    verdict(
        worst <= 1e-3,
        format!("worst relative error over 20 entries {worst:.2e} (need <= 1e-3)"),
    )
}

fn criterion_9() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst: f64 = 0.0;
    for n in [2usize, 8, 32] {
        for _ in 0..100 {
            let w = random_unitary(n, &mut rng);
            let u = random_unitary(n, &mut rng);
            let hs = gate_error_metrics(&w, &u).expect("same shape").hs_norm;
            worst = worst.max((hs * hs - 2.0 * n as f64 * (1.0 - fidelity_strict(&w, &u))).abs());
        }
    }
    verdict(worst <= 1e-9, format!("300 pairs, worst |hs^2 - 2N(1-F)| = {worst:.1e}"))
}

fn medians(rows: &[SweepRow]) -> Vec<f64> {
    rows.iter().map(|r| r.median().unwrap_or(f64::INFINITY)).collect()
}

fn criterion_10() -> Verdict {
    let start = Instant::now();
    let base = SweepSettings::default();
    let j_settings = SweepSettings {
        variable: SweepVariable::J,
        values: vec![0.5, 1.0, 2.0, 4.0],
        delta_omega: 2.0,
        ..base.clone()
    };
    let dw_settings = SweepSettings {
        variable: SweepVariable::DeltaOmega,
        values: vec![0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0],
        j: 2.0,
        ..base
    };
    let (j_rows, dw_rows) = match (
        iteration_sweep_experiment(&j_settings),
        iteration_sweep_experiment(&dw_settings),
    ) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return verdict(false, e.to_string()),
    };
    let jm = medians(&j_rows);
    let dm = medians(&dw_rows);
    let j_ok = jm.iter().all(|m| m.is_finite()) && jm.windows(2).all(|w| w[1] <= w[0]);
    let (argmin, min) = dm
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &m)| if m < acc.1 { (i, m) } else { acc });
    let dw_ok = argmin > 0 && argmin + 1 < dm.len() && min < dm[0] && min < dm[dm.len() - 1];
    let fast = within(start, Duration::from_secs(3600));
    let show = |v: &[f64]| v.iter().map(|m| if m.is_finite() { format!("{m}") } else { "nc".into() }).collect::<Vec<_>>().join(",");
    verdict(
        j_ok && dw_ok && fast,
        format!(
            "J {{0.5,1,2,4}} medians [{}] non-increasing={j_ok}; delta_omega {{0.25..32}} medians [{}] interior minimum={dw_ok}",
            show(&jm),
            show(&dm)
        ),
    )
}
