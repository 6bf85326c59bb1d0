//! Reusable pass/fail checks over experiment outputs.
//!
//! Each check returns a [`Report`] with one [`Check`] per assertion. The CLI
//! `verify` command and the acceptance test both call these.

use std::f64::consts::PI;
use std::fmt;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::beamforming::{ca_decompose, ca_project, zf_rx};
use crate::channel::{gain_map, los_si_channel};
use crate::fdlink::{evaluate, LinkBudget, Scheme};
use crate::geometry::{far_field_ok, steering_vector, ArrayPlacement, SteeringAngle, Ula};
use crate::multiuser::{build_scenario, design, mu_metrics, MuScheme, MultiuserConfig};
use crate::seed::{rng_from_seed, trial_seed};
use crate::sweep::{mean_std, SweepRow, SweepTable};
use crate::{CVector, Result, C64};

/// One assertion outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn push(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn extend(&mut self, other: Report) {
        self.checks.extend(other.checks);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

fn random_vector<R: Rng>(rng: &mut R, n: usize) -> CVector {
    CVector::from_fn(n, |_, _| {
        C64::new(
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
        )
    })
}

/// Maximum per-element reconstruction error of [`ca_decompose`] over
/// `count` random vectors of length `len`.
pub fn decompose_error(count: usize, len: usize, seed: u64) -> Result<f64> {
    let mut rng = rng_from_seed(seed);
    let mut worst = 0.0f64;
    for _ in 0..count {
        let v = random_vector(&mut rng, len);
        let dec = ca_decompose(&v, None)?;
        let r = dec.reconstruct();
        for (a, b) in r.iter().zip(v.iter()) {
            worst = worst.max((a - b).norm());
        }
    }
    Ok(worst)
}

/// Decomposition, ZF null, CA projection and steering-vector identities.
pub fn exact_math(decompositions: usize, seed: u64) -> Result<Report> {
    let mut rep = Report::default();

    let err = decompose_error(decompositions, 16, seed)?;
    rep.push(Check::new(
        "ca_decompose reconstruction",
        err <= 1e-12,
        format!("max error {err:.3e} over {decompositions} vectors (tol 1e-12)"),
    ));

    let mut rng = rng_from_seed(seed ^ 1);
    let mut null = 0.0f64;
    for _ in 0..1000 {
        let t = random_vector(&mut rng, 16);
        let i = random_vector(&mut rng, 16);
        let w = zf_rx(&t, &i)?.awv;
        null = null.max(w.weights().dotc(&i).norm() / i.norm());
    }
    rep.push(Check::new(
        "zf_rx null",
        null <= 1e-10,
        format!("max |w^H i|/|i| {null:.3e} (tol 1e-10)"),
    ));

    let levels: Vec<C64> = (0..64)
        .map(|i| C64::from_polar(1.0 / 3f64.sqrt(), 2.0 * PI * i as f64 / 64.0))
        .collect();
    let mut margin = f64::INFINITY;
    for _ in 0..3 {
        let v = random_vector(&mut rng, 3);
        let d = (&v - ca_project(&v).weights()).norm();
        let mut oracle = f64::INFINITY;
        for a in &levels {
            for b in &levels {
                for c in &levels {
                    let e = (v[0] - a).norm_sqr() + (v[1] - b).norm_sqr() + (v[2] - c).norm_sqr();
                    oracle = oracle.min(e);
                }
            }
        }
        margin = margin.min(oracle.sqrt() - d);
    }
    rep.push(Check::new(
        "ca_project vs 64^3 phase grid",
        margin >= -1e-15,
        format!("min(grid distance - projection distance) {margin:.3e}"),
    ));

    let mut steer = 0.0f64;
    for n in [1usize, 2, 8, 16, 32] {
        for i in 0..=40 {
            let x = -1.0 + i as f64 / 20.0;
            let a = steering_vector(n, SteeringAngle::new(x)?)?;
            let b = steering_vector(n, SteeringAngle::new(-x)?)?;
            steer = steer.max((a.norm() - 1.0).abs());
            steer = steer.max((a.conjugate() - b).norm());
        }
    }
    rep.push(Check::new(
        "steering unit norm and conjugate symmetry",
        steer <= 1e-12,
        format!("max deviation {steer:.3e}"),
    ));
    Ok(rep)
}

/// The 32-element half-wavelength threshold of 1024 wavelengths, boundary inclusive.
pub fn far_field_boundary() -> Result<Report> {
    let aperture = Ula::half_wavelength(32)?.aperture();
    let mut rep = Report::default();
    let at = far_field_ok(1024.0, aperture);
    let below = far_field_ok(1023.9, aperture);
    rep.push(Check::new(
        "far-field threshold 1024 for 32 elements",
        at && !below,
        format!(
            "aperture {aperture}, ok(1024) = {at}, ok(1023.9) = {below}, 2*D^2 = {}",
            2.0 * aperture * aperture
        ),
    ));
    Ok(rep)
}

fn placement(n: usize, d: f64, omega: f64) -> Result<ArrayPlacement> {
    let u = Ula::half_wavelength(n)?;
    ArrayPlacement::new(u, u, d, omega)
}

/// Gain-map sparsity of a small vs a large array at `ω = 0`, and band-offset
/// monotonicity of the large array across `omegas`.
pub fn sparsity(
    small: usize,
    large: usize,
    d: f64,
    grid: usize,
    db: f64,
    omegas: &[f64],
) -> Result<Report> {
    let mut rep = Report::default();
    let frac = |n| -> Result<f64> {
        Ok(gain_map(&los_si_channel(&placement(n, d, 0.0)?)?, grid)?.fraction_within_db(db))
    };
    let (fs, fl) = (frac(small)?, frac(large)?);
    rep.push(Check::new(
        format!("gain-map sparsity N={large} vs N={small}"),
        fl < 0.5 * fs,
        format!("fraction within {db} dB: N={large} {fl:.4}, N={small} {fs:.4} (< half)"),
    ));
    let offsets = omegas
        .iter()
        .map(|&w| Ok(gain_map(&los_si_channel(&placement(large, d, w)?)?, grid)?.band_offset(db)))
        .collect::<Result<Vec<f64>>>()?;
    let inc = offsets.windows(2).all(|w| w[1] > w[0]);
    let dec = offsets.windows(2).all(|w| w[1] < w[0]);
    rep.push(Check::new(
        "band offset monotone in omega",
        omegas.len() >= 2 && (inc || dec),
        format!("omegas {omegas:.4?} -> offsets {offsets:.4?}"),
    ));
    Ok(rep)
}

/// Mean and standard error of the per-trial difference `a - b`.
///
/// Both rows must come from the same trial seeds.
pub fn paired_gap(a: &SweepRow, b: &SweepRow) -> (f64, f64) {
    let diff: Vec<f64> = a
        .samples
        .iter()
        .zip(&b.samples)
        .map(|(x, y)| x - y)
        .collect();
    let (m, s) = mean_std(&diff);
    (m, s / (diff.len() as f64).sqrt())
}

fn gap_check(t: &SweepTable, x: f64, hi: &str, lo: &str, k: f64) -> Check {
    let name = format!("{hi} > {lo} at {x}");
    match (t.row(hi, x), t.row(lo, x)) {
        (Some(a), Some(b)) => {
            let (g, se) = paired_gap(a, b);
            Check::new(
                name,
                g > k * se,
                format!(
                    "{:.3} vs {:.3}, gap {g:.3} > {k}*SE ({se:.3})",
                    a.mean_asr, b.mean_asr
                ),
            )
        }
        _ => Check::new(name, false, "missing curve"),
    }
}

/// Point-to-point scheme ordering at every SNR of the table.
///
/// Gaps are paired differences over common trials; `near_ub_from` is the
/// lowest SNR at which `zf_mf_noca` must be within 10% of the upper bound.
pub fn p2p_ordering(t: &SweepTable, near_ub_from: f64) -> Report {
    let mut rep = Report::default();
    let xs: Vec<f64> = t
        .curve(Scheme::UpperBound.name())
        .map(|r| r.sweep_var)
        .collect();
    if xs.is_empty() {
        rep.push(Check::new(
            "ordering",
            false,
            "table has no upper_bound curve",
        ));
        return rep;
    }
    for &x in &xs {
        let (ub, noca, bs) = ("upper_bound", "zf_mf_noca", "beam_steering");
        rep.push(gap_check(t, x, ub, noca, 3.0));
        let as_ = t
            .row("angle_search", x)
            .map(|r| r.mean_asr)
            .unwrap_or(f64::NAN);
        let ca = t.row("zf_mf_ca", x).map(|r| r.mean_asr).unwrap_or(f64::NAN);
        let (top, bottom) = if as_ >= ca {
            ("angle_search", "zf_mf_ca")
        } else {
            ("zf_mf_ca", "angle_search")
        };
        rep.push(gap_check(t, x, noca, top, 3.0));
        rep.push(gap_check(t, x, bottom, bs, 3.0));
        if x >= near_ub_from {
            if let (Some(a), Some(b)) = (t.row(noca, x), t.row(ub, x)) {
                let rel = (b.mean_asr - a.mean_asr) / b.mean_asr;
                rep.push(Check::new(
                    format!("zf_mf_noca near upper_bound at {x}"),
                    rel < 0.10,
                    format!("relative gap {:.2}% (< 10%)", 100.0 * rel),
                ));
            }
        }
    }
    rep
}

/// Spread of a scheme's mean ASR across the sweep variable.
pub fn omega_spread(t: &SweepTable, scheme: &str, min_fraction: f64) -> Report {
    let means: Vec<f64> = t.curve(scheme).map(|r| r.mean_asr).collect();
    let max = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = means.iter().copied().fold(f64::INFINITY, f64::min);
    let frac = (max - min) / max;
    let mut rep = Report::default();
    rep.push(Check::new(
        format!("{scheme} omega spread"),
        means.len() >= 2 && frac > min_fraction,
        format!(
            "max {max:.3}, min {min:.3}, spread {:.1}% (> {:.0}%)",
            100.0 * frac,
            100.0 * min_fraction
        ),
    ));
    rep
}

/// CA floors versus no-CA growth between two SNR points.
pub fn mu_floor(t: &SweepTable, lo: f64, hi: f64) -> Report {
    let mut rep = Report::default();
    let growth = |s: &str| -> Option<(f64, f64)> {
        let a = t.row(s, lo)?.mean_asr;
        let b = t.row(s, hi)?.mean_asr;
        Some((a, (b - a) / a))
    };
    for s in [MuScheme::ZfMfMuser, MuScheme::AngleSearchMuser] {
        let c = match growth(s.name()) {
            Some((a, g)) => Check::new(
                format!("{s} floor {lo}->{hi}"),
                g < 0.15,
                format!("ASR {a:.3}, growth {:.2}% (< 15%)", 100.0 * g),
            ),
            None => Check::new(format!("{s} floor"), false, "missing curve"),
        };
        rep.push(c);
    }
    match growth(MuScheme::NoCa.name()) {
        Some((a, g)) => {
            rep.push(Check::new(
                format!("no_ca growth {lo}->{hi}"),
                g > 0.25,
                format!("ASR {a:.3}, growth {:.2}% (> 25%)", 100.0 * g),
            ));
            let best_ca = [MuScheme::ZfMfMuser, MuScheme::AngleSearchMuser]
                .iter()
                .filter_map(|s| t.row(s.name(), lo).map(|r| r.mean_asr))
                .fold(f64::NEG_INFINITY, f64::max);
            rep.push(Check::new(
                format!("no_ca above CA schemes at {lo}"),
                a > best_ca,
                format!("{a:.3} vs best CA {best_ca:.3}"),
            ));
        }
        None => rep.push(Check::new("no_ca growth", false, "missing curve")),
    }
    rep
}

/// Largest `|ASR_mu - ASR_p2p|` for K = 1 without SI over `trials` draws.
pub fn single_user_reduction(trials: usize, seed: u64) -> Result<f64> {
    let cfg = MultiuserConfig::fig5(1);
    let mut worst = 0.0f64;
    for t in 0..trials as u64 {
        let budget = LinkBudget::new(20.0, cfg.si_db)?;
        let sc = build_scenario(&cfg, budget, trial_seed(seed, t))?.without_si();
        let link = sc.pair_link(0)?;
        for (mu, p2p) in [
            (MuScheme::ZfMfMuser, Scheme::ZfMfCa),
            (MuScheme::AngleSearchMuser, Scheme::AngleSearch),
            (MuScheme::NoCa, Scheme::ZfMfNoCa),
        ] {
            let a = mu_metrics(&sc, &design(&sc, mu, cfg.search)?)?.asr;
            let b = evaluate(&link, p2p, cfg.search)?.asr;
            worst = worst.max((a - b).abs());
        }
    }
    Ok(worst)
}

/// Runs `f` in a 1-thread and an `n`-thread pool and compares the outputs.
pub fn thread_invariance<T, F>(name: &str, threads: usize, f: F) -> Check
where
    T: PartialEq,
    F: Fn() -> T + Send + Sync,
    T: Send,
{
    let run = |n: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map(|p| p.install(&f))
    };
    match (run(1), run(threads)) {
        (Ok(a), Ok(b)) => Check::new(
            format!("{name} identical on 1 and {threads} threads"),
            a == b,
            if a == b {
                "identical"
            } else {
                "outputs differ"
            },
        ),
        (Err(e), _) | (_, Err(e)) => Check::new(name, false, format!("thread pool: {e}")),
    }
}
