//! Running and verifying configured experiments.

use std::f64::consts::PI;

use fdmm::channel::{gain_map, los_si_channel, GainMap};
use fdmm::fdlink::{sweep_omega, sweep_snr_schemes, Scheme};
use fdmm::geometry::{ArrayPlacement, Ula};
use fdmm::multiuser::mu_sweep;
use fdmm::sweep::SweepTable;
use fdmm::verify::{self, Check, Report};

use crate::config::{ExperimentConfig, ExperimentKind, FieldError};
use crate::svg::{self, Series};

/// Why an experiment could not complete.
#[derive(Debug)]
pub enum RunError {
    /// A field failed validation.
    Field(FieldError),
    /// The library rejected a derived parameter.
    Model(fdmm::Error),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Field(e) => e.fmt(f),
            RunError::Model(e) => e.fmt(f),
        }
    }
}

impl From<FieldError> for RunError {
    fn from(e: FieldError) -> Self {
        RunError::Field(e)
    }
}

impl From<fdmm::Error> for RunError {
    fn from(e: fdmm::Error) -> Self {
        RunError::Model(e)
    }
}

/// One output file before it is written.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

/// What a run produces: CSV tables and optional SVG renderings.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub csv: Vec<Artifact>,
    pub svg: Vec<Artifact>,
}

/// Square placement used for gain maps: `n` elements on both sides.
fn map_placement(cfg: &ExperimentConfig, n: usize, omega: f64) -> Result<ArrayPlacement, RunError> {
    let base = cfg.placement()?;
    let u = Ula::new(n, base.tx().spacing())?;
    Ok(ArrayPlacement::new(u, u, base.d(), omega)?)
}

fn gain_maps(cfg: &ExperimentConfig) -> Result<Vec<(usize, GainMap)>, RunError> {
    let s = cfg.sparsity()?;
    let omega = cfg.placement()?.omega();
    s.sizes
        .iter()
        .map(|&n| {
            Ok((
                n,
                gain_map(&los_si_channel(&map_placement(cfg, n, omega)?)?, s.grid)?,
            ))
        })
        .collect()
}

fn sweep_table(cfg: &ExperimentConfig) -> Result<SweepTable, RunError> {
    let trials = cfg.trials()?;
    Ok(match cfg.experiment {
        ExperimentKind::P2pSweep => sweep_snr_schemes(
            &cfg.link_config()?,
            &cfg.schemes()?,
            cfg.snrs()?,
            trials,
            cfg.seed,
        )?,
        ExperimentKind::OmegaSweep => {
            let link = cfg.link_config()?;
            let snr = cfg.snrs()?[0];
            let omegas = cfg.omegas()?;
            let mut rows = Vec::new();
            for s in cfg.schemes()? {
                rows.extend(sweep_omega(&link, s, &omegas, snr, trials, cfg.seed)?.rows);
            }
            SweepTable::new("omega", rows)
        }
        ExperimentKind::MultiuserSweep => mu_sweep(
            &cfg.multiuser_config()?,
            &cfg.mu_schemes()?,
            cfg.snrs()?,
            trials,
            cfg.seed,
        )?,
        _ => unreachable!("not a sweep"),
    })
}

fn chart(table: &SweepTable, title: &str, x_label: &str, x_scale: f64) -> String {
    let schemes = table.schemes();
    let series: Vec<Series<'_>> = schemes
        .iter()
        .map(|s| Series {
            name: s,
            points: table
                .curve(s)
                .map(|r| (r.sweep_var / x_scale, r.mean_asr))
                .collect(),
        })
        .collect();
    svg::line_chart(title, x_label, "mean sum rate (bit/s/Hz)", &series)
}

/// Runs the experiment. `header` lines are prepended to every CSV as comments.
pub fn run(cfg: &ExperimentConfig, header: &[String]) -> Result<Outcome, RunError> {
    cfg.validate()?;
    let comment = |body: &str| {
        let mut s = String::new();
        for h in header {
            s.push_str("# ");
            s.push_str(h);
            s.push('\n');
        }
        s.push_str(body);
        s
    };
    let mut out = Outcome {
        csv: vec![],
        svg: vec![],
    };
    match cfg.experiment {
        ExperimentKind::SparsityMap => {
            for (n, map) in gain_maps(cfg)? {
                out.csv.push(Artifact {
                    name: format!("gain_map_n{n}.csv"),
                    contents: comment(&map.to_csv()),
                });
                let rows: Vec<Vec<f64>> = map
                    .values
                    .row_iter()
                    .map(|r| r.iter().copied().collect())
                    .collect();
                out.svg.push(Artifact {
                    name: format!("gain_map_n{n}.svg"),
                    contents: svg::heatmap(
                        &format!("LOS SI gain, N = {n}"),
                        "beta (Tx)",
                        "alpha (Rx)",
                        &rows,
                        40.0,
                    ),
                });
            }
        }
        ExperimentKind::P2pSweep | ExperimentKind::OmegaSweep | ExperimentKind::MultiuserSweep => {
            let table = sweep_table(cfg)?;
            out.csv.push(Artifact {
                name: "sweep.csv".into(),
                contents: table.to_csv(header),
            });
            let svg = match cfg.experiment {
                ExperimentKind::OmegaSweep => chart(&table, "Sum rate vs omega", "omega / pi", PI),
                ExperimentKind::MultiuserSweep => {
                    chart(&table, "Multi-user sum rate", "SNR (dB)", 1.0)
                }
                _ => chart(&table, "Point-to-point sum rate", "SNR (dB)", 1.0),
            };
            out.svg.push(Artifact {
                name: "sweep.svg".into(),
                contents: svg,
            });
        }
        ExperimentKind::DecomposeCheck => {
            let d = cfg.decompose()?;
            let err = verify::decompose_error(d.vectors, d.length, cfg.seed)?;
            out.csv.push(Artifact {
                name: "decompose.csv".into(),
                contents: comment(&format!(
                    "vectors,length,max_error\n{},{},{err:e}\n",
                    d.vectors, d.length
                )),
            });
        }
    }
    Ok(out)
}

/// Runs the experiment and evaluates the assertions bound to its kind.
pub fn verify(cfg: &ExperimentConfig) -> Result<Report, RunError> {
    cfg.validate()?;
    match cfg.experiment {
        ExperimentKind::SparsityMap => {
            let s = cfg.sparsity()?;
            let p = cfg.placement()?;
            let small = *s.sizes.iter().min().expect("validated");
            let large = *s.sizes.iter().max().expect("validated");
            let omegas: Vec<f64> = s.ridge_omega_over_pi.iter().map(|w| w * PI).collect();
            if p.tx().spacing() != 0.5 {
                let mut rep = Report::default();
                rep.push(Check::new(
                    "sparsity",
                    false,
                    "checks assume half-wavelength spacing",
                ));
                return Ok(rep);
            }
            Ok(verify::sparsity(
                small,
                large,
                p.d(),
                s.grid,
                s.band_db,
                &omegas,
            )?)
        }
        ExperimentKind::P2pSweep => {
            let t = sweep_table(cfg)?;
            let schemes = cfg.schemes()?;
            if Scheme::ALL.iter().any(|s| !schemes.contains(s)) {
                let mut rep = Report::default();
                rep.push(Check::new("ordering", false, "needs all five schemes"));
                return Ok(rep);
            }
            Ok(verify::p2p_ordering(&t, 20.0))
        }
        ExperimentKind::OmegaSweep => {
            let t = sweep_table(cfg)?;
            let mut rep = Report::default();
            for s in cfg.schemes()? {
                rep.extend(verify::omega_spread(&t, s.name(), 0.05));
            }
            Ok(rep)
        }
        ExperimentKind::MultiuserSweep => {
            let snrs = cfg.snrs()?;
            if snrs.len() < 2 {
                let mut rep = Report::default();
                rep.push(Check::new("floor", false, "needs at least two SNR points"));
                return Ok(rep);
            }
            let t = sweep_table(cfg)?;
            Ok(verify::mu_floor(
                &t,
                snrs[snrs.len() - 2],
                snrs[snrs.len() - 1],
            ))
        }
        ExperimentKind::DecomposeCheck => {
            let d = cfg.decompose()?;
            let err = verify::decompose_error(d.vectors, d.length, cfg.seed)?;
            let mut rep = Report::default();
            rep.push(Check::new(
                "ca_decompose reconstruction",
                err <= 1e-12,
                format!(
                    "max error {err:.3e} over {} vectors of length {} (tol 1e-12)",
                    d.vectors, d.length
                ),
            ));
            Ok(rep)
        }
    }
}
