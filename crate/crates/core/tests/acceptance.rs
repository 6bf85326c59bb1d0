//! Acceptance suite: one line per criterion, details indented below it.
//!
//! Runs as a plain binary so the lines show up in `cargo test` output.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use fdmm::fdlink::{sweep_omega, sweep_snr, sweep_snr_schemes, LinkConfig, Scheme};
use fdmm::multiuser::{mu_sweep, MuScheme, MultiuserConfig};
use fdmm::verify::{self, Check, Report};

const SEED: u64 = 20_250_101;
const TRIALS: usize = 200;

type Criterion = (&'static str, fn() -> Report);

fn timed(rep: &mut Report, start: Instant, budget: Duration) {
    let el = start.elapsed();
    rep.push(Check::new(
        "runtime",
        el < budget,
        format!(
            "{:.3} s (< {:.0} s)",
            el.as_secs_f64(),
            budget.as_secs_f64()
        ),
    ));
}

fn exact_math() -> Report {
    let start = Instant::now();
    let mut rep = verify::exact_math(100_000, SEED).expect("exact math");
    timed(&mut rep, start, Duration::from_secs(1));
    rep
}

fn far_field() -> Report {
    verify::far_field_boundary().expect("far field")
}

fn sparsity() -> Report {
    let start = Instant::now();
    let mut rep =
        verify::sparsity(8, 32, 5.0, 64, 10.0, &[0.0, PI / 8.0, PI / 4.0]).expect("sparsity");
    timed(&mut rep, start, Duration::from_secs(10));
    rep
}

fn fig4_left() -> Report {
    let t = sweep_snr_schemes(
        &LinkConfig::fig4_left(),
        &Scheme::ALL,
        &[0.0, 10.0, 20.0],
        TRIALS,
        SEED,
    )
    .expect("fig4 left sweep");
    verify::p2p_ordering(&t, 20.0)
}

fn fig4_right() -> Report {
    let omegas: Vec<f64> = (0..=8).map(|i| PI * i as f64 / 8.0).collect();
    let t = sweep_omega(
        &LinkConfig::fig4_right(0.0),
        Scheme::AngleSearch,
        &omegas,
        10.0,
        TRIALS,
        SEED,
    )
    .expect("omega sweep");
    verify::omega_spread(&t, Scheme::AngleSearch.name(), 0.05)
}

fn fig5() -> Report {
    let t = mu_sweep(
        &MultiuserConfig::fig5(2),
        &MuScheme::ALL,
        &[30.0, 40.0],
        TRIALS,
        SEED,
    )
    .expect("mu sweep");
    verify::mu_floor(&t, 30.0, 40.0)
}

fn reduction_and_determinism() -> Report {
    let mut rep = Report::default();
    let worst = verify::single_user_reduction(20, SEED).expect("reduction");
    rep.push(Check::new(
        "K=1 zero-SI multi-user vs point-to-point",
        worst < 1e-9,
        format!("max |dASR| {worst:.3e} (tol 1e-9)"),
    ));
    let n = std::thread::available_parallelism()
        .map_or(4, |n| n.get())
        .max(4);
    rep.push(verify::thread_invariance("snr sweep csv", n, || {
        sweep_snr_schemes(
            &LinkConfig::fig4_left(),
            &Scheme::ALL,
            &[0.0, 20.0],
            16,
            SEED,
        )
        .unwrap()
        .to_csv(&[])
    }));
    rep.push(verify::thread_invariance("omega sweep csv", n, || {
        sweep_omega(
            &LinkConfig::fig4_right(0.0),
            Scheme::ZfMfCa,
            &[0.0, 1.0, 2.0],
            10.0,
            16,
            SEED,
        )
        .unwrap()
        .to_csv(&[])
    }));
    rep.push(verify::thread_invariance(
        "single-scheme sweep csv",
        n,
        || {
            sweep_snr(
                &LinkConfig::fig4_left(),
                Scheme::AngleSearch,
                &[10.0],
                16,
                SEED,
            )
            .unwrap()
            .to_csv(&[])
        },
    ));
    rep.push(verify::thread_invariance("multi-user sweep csv", n, || {
        mu_sweep(&MultiuserConfig::fig5(2), &MuScheme::ALL, &[30.0], 16, SEED)
            .unwrap()
            .to_csv(&[])
    }));
    rep
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("exact math", exact_math),
        ("far-field boundary", far_field),
        ("gain-map sparsity", sparsity),
        ("point-to-point scheme ordering", fig4_left),
        ("omega sensitivity", fig4_right),
        ("multi-user high-SNR floor", fig5),
        ("reduction and determinism", reduction_and_determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let rep = f();
        let tag = if rep.passed() { "PASS" } else { "FAIL" };
        println!(
            "criterion {} [{tag}] {name} ({:.1} s)",
            i + 1,
            start.elapsed().as_secs_f64()
        );
        for c in &rep.checks {
            println!("    {c}");
        }
        if !rep.passed() {
            failed += 1;
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
