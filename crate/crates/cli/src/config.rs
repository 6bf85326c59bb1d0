//! Experiment configuration files (TOML).
//!
//! Angles are written as multiples of π (`omega_over_pi = 0.125`) so shipped
//! files stay exact. Lengths are in wavelengths.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use fdmm::beamforming::AngleSearchConfig;
use fdmm::fdlink::{LinkConfig, Scheme};
use fdmm::geometry::{ArrayPlacement, Ula};
use fdmm::multiuser::{MuScheme, MultiuserConfig};
use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    SparsityMap,
    P2pSweep,
    OmegaSweep,
    MultiuserSweep,
    DecomposeCheck,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 5] = [
        ExperimentKind::SparsityMap,
        ExperimentKind::P2pSweep,
        ExperimentKind::OmegaSweep,
        ExperimentKind::MultiuserSweep,
        ExperimentKind::DecomposeCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::SparsityMap => "sparsity-map",
            ExperimentKind::P2pSweep => "p2p-sweep",
            ExperimentKind::OmegaSweep => "omega-sweep",
            ExperimentKind::MultiuserSweep => "multiuser-sweep",
            ExperimentKind::DecomposeCheck => "decompose-check",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            ExperimentKind::SparsityMap => {
                "LOS SI gain maps over (alpha, beta) for several array sizes"
            }
            ExperimentKind::P2pSweep => {
                "point-to-point sum rate vs SNR for each beamforming scheme"
            }
            ExperimentKind::OmegaSweep => {
                "point-to-point sum rate vs array angle omega at fixed SNR"
            }
            ExperimentKind::MultiuserSweep => {
                "full-duplex base station sum rate vs SNR with K users"
            }
            ExperimentKind::DecomposeCheck => {
                "reconstruction error of the two-vector CA decomposition"
            }
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArraysSection {
    pub tx: usize,
    pub rx: usize,
    #[serde(default = "half")]
    pub spacing: f64,
    pub d: f64,
    #[serde(default)]
    pub omega_over_pi: f64,
}

fn half() -> f64 {
    0.5
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSection {
    #[serde(default = "default_paths")]
    pub paths: usize,
    #[serde(default)]
    pub nlos_epsilon: f64,
    #[serde(default = "default_paths")]
    pub nlos_paths: usize,
}

fn default_paths() -> usize {
    4
}

impl Default for ChannelSection {
    fn default() -> Self {
        Self {
            paths: 4,
            nlos_epsilon: 0.0,
            nlos_paths: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkSection {
    pub si_db: f64,
    #[serde(default)]
    pub schemes: Vec<String>,
    #[serde(default = "default_grid")]
    pub search_grid: usize,
    #[serde(default = "yes")]
    pub refine: bool,
}

fn default_grid() -> usize {
    32
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default)]
    pub snr_db: Vec<f64>,
    #[serde(default)]
    pub omega_over_pi: Vec<f64>,
    pub trials: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultiuserSection {
    pub k_users: usize,
    pub user_tx: usize,
    pub user_rx: usize,
    pub user_d: f64,
    pub user_omega_over_pi: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SparsitySection {
    pub sizes: Vec<usize>,
    pub grid: usize,
    #[serde(default = "ten")]
    pub band_db: f64,
    /// Extra ω values (multiples of π) for the band-offset check on the largest array.
    #[serde(default)]
    pub ridge_omega_over_pi: Vec<f64>,
}

fn ten() -> f64 {
    10.0
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecomposeSection {
    pub vectors: usize,
    pub length: usize,
}

/// A parsed configuration file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub seed: u64,
    /// Output directory, relative to the working directory.
    pub output: Option<String>,
    pub arrays: Option<ArraysSection>,
    #[serde(default)]
    pub channel: ChannelSection,
    pub link: Option<LinkSection>,
    #[serde(default)]
    pub sweep: SweepSection,
    pub multiuser: Option<MultiuserSection>,
    pub sparsity: Option<SparsitySection>,
    pub decompose: Option<DecomposeSection>,
}

/// A semantic problem in an otherwise parseable config.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldError {
    pub field: String,
    pub reason: String,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.reason)
    }
}

impl std::error::Error for FieldError {}

fn bad(field: &str, reason: impl fmt::Display) -> FieldError {
    FieldError {
        field: field.to_string(),
        reason: reason.to_string(),
    }
}

fn need<'a, T>(v: &'a Option<T>, section: &str) -> Result<&'a T, FieldError> {
    v.as_ref()
        .ok_or_else(|| bad(section, "section is required for this experiment"))
}

impl FromStr for ExperimentConfig {
    type Err = toml::de::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        toml::from_str(s)
    }
}

fn placement(
    field: &str,
    tx: usize,
    rx: usize,
    spacing: f64,
    d: f64,
    omega_over_pi: f64,
) -> Result<ArrayPlacement, FieldError> {
    let t = Ula::new(tx, spacing).map_err(|e| bad(&format!("{field}.tx"), e))?;
    let r = Ula::new(rx, spacing).map_err(|e| bad(&format!("{field}.rx"), e))?;
    if !omega_over_pi.is_finite() {
        return Err(bad(&format!("{field}.omega_over_pi"), "must be finite"));
    }
    ArrayPlacement::new(t, r, d, omega_over_pi * PI).map_err(|e| bad(&format!("{field}.d"), e))
}

impl ExperimentConfig {
    pub fn trials(&self) -> Result<usize, FieldError> {
        match self.sweep.trials {
            Some(0) => Err(bad("sweep.trials", "must be at least 1")),
            Some(t) => Ok(t),
            None => Ok(200),
        }
    }

    pub fn placement(&self) -> Result<ArrayPlacement, FieldError> {
        let a = need(&self.arrays, "arrays")?;
        placement("arrays", a.tx, a.rx, a.spacing, a.d, a.omega_over_pi)
    }

    fn search(&self) -> Result<AngleSearchConfig, FieldError> {
        let l = need(&self.link, "link")?;
        if l.search_grid < 2 {
            return Err(bad("link.search_grid", "must be at least 2"));
        }
        Ok(AngleSearchConfig {
            grid: l.search_grid,
            refine: l.refine,
        })
    }

    fn si_db(&self) -> Result<f64, FieldError> {
        let si = need(&self.link, "link")?.si_db;
        if si.is_nan() || si == f64::INFINITY {
            return Err(bad("link.si_db", "must be finite or -inf"));
        }
        Ok(si)
    }

    pub fn link_config(&self) -> Result<LinkConfig, FieldError> {
        let c = &self.channel;
        if c.paths == 0 {
            return Err(bad("channel.paths", "need at least one path"));
        }
        if !(c.nlos_epsilon >= 0.0 && c.nlos_epsilon.is_finite()) {
            return Err(bad(
                "channel.nlos_epsilon",
                "must be a finite nonnegative ratio",
            ));
        }
        if c.nlos_epsilon > 0.0 && c.nlos_paths == 0 {
            return Err(bad(
                "channel.nlos_paths",
                "need at least one path when nlos_epsilon > 0",
            ));
        }
        let mut cfg = LinkConfig::symmetric(self.placement()?, c.paths, self.si_db()?);
        cfg.nlos_epsilon = c.nlos_epsilon;
        cfg.nlos_paths = c.nlos_paths;
        cfg.search = self.search()?;
        Ok(cfg)
    }

    pub fn schemes(&self) -> Result<Vec<Scheme>, FieldError> {
        let names = &need(&self.link, "link")?.schemes;
        if names.is_empty() {
            return Ok(Scheme::ALL.to_vec());
        }
        names
            .iter()
            .map(|s| s.parse().map_err(|e| bad("link.schemes", e)))
            .collect()
    }

    pub fn mu_schemes(&self) -> Result<Vec<MuScheme>, FieldError> {
        let names = &need(&self.link, "link")?.schemes;
        if names.is_empty() {
            return Ok(MuScheme::ALL.to_vec());
        }
        names
            .iter()
            .map(|s| s.parse().map_err(|e| bad("link.schemes", e)))
            .collect()
    }

    pub fn multiuser_config(&self) -> Result<MultiuserConfig, FieldError> {
        let m = need(&self.multiuser, "multiuser")?;
        if m.k_users == 0 {
            return Err(bad("multiuser.k_users", "need at least one user"));
        }
        if self.channel.paths == 0 {
            return Err(bad("channel.paths", "need at least one path"));
        }
        let spacing = need(&self.arrays, "arrays")?.spacing;
        Ok(MultiuserConfig {
            bs: self.placement()?,
            user: placement(
                "multiuser.user",
                m.user_tx,
                m.user_rx,
                spacing,
                m.user_d,
                m.user_omega_over_pi,
            )?,
            k_users: m.k_users,
            n_paths: self.channel.paths,
            si_db: self.si_db()?,
            search: self.search()?,
        })
    }

    pub fn snrs(&self) -> Result<&[f64], FieldError> {
        let s = &self.sweep.snr_db;
        if s.is_empty() {
            return Err(bad("sweep.snr_db", "need at least one SNR point"));
        }
        if s.iter().any(|x| !x.is_finite()) {
            return Err(bad("sweep.snr_db", "values must be finite"));
        }
        Ok(s)
    }

    /// ω values in radians.
    pub fn omegas(&self) -> Result<Vec<f64>, FieldError> {
        let o = &self.sweep.omega_over_pi;
        if o.is_empty() {
            return Err(bad("sweep.omega_over_pi", "need at least one omega point"));
        }
        if o.iter().any(|x| !x.is_finite()) {
            return Err(bad("sweep.omega_over_pi", "values must be finite"));
        }
        Ok(o.iter().map(|x| x * PI).collect())
    }

    pub fn sparsity(&self) -> Result<&SparsitySection, FieldError> {
        let s = need(&self.sparsity, "sparsity")?;
        if s.sizes.is_empty() {
            return Err(bad("sparsity.sizes", "need at least one array size"));
        }
        if s.sizes.contains(&0) {
            return Err(bad("sparsity.sizes", "array sizes must be positive"));
        }
        if s.grid < 2 {
            return Err(bad("sparsity.grid", "must be at least 2"));
        }
        if !(s.band_db > 0.0 && s.band_db.is_finite()) {
            return Err(bad("sparsity.band_db", "must be positive"));
        }
        Ok(s)
    }

    pub fn decompose(&self) -> Result<&DecomposeSection, FieldError> {
        let d = need(&self.decompose, "decompose")?;
        if d.vectors == 0 {
            return Err(bad("decompose.vectors", "must be at least 1"));
        }
        if d.length == 0 {
            return Err(bad("decompose.length", "must be at least 1"));
        }
        Ok(d)
    }

    /// Checks every field the experiment reads.
    pub fn validate(&self) -> Result<(), FieldError> {
        match self.experiment {
            ExperimentKind::SparsityMap => {
                self.sparsity()?;
                self.placement()?;
            }
            ExperimentKind::P2pSweep => {
                self.link_config()?;
                self.schemes()?;
                self.snrs()?;
                self.trials()?;
            }
            ExperimentKind::OmegaSweep => {
                self.link_config()?;
                self.schemes()?;
                self.omegas()?;
                if self.snrs()?.len() != 1 {
                    return Err(bad("sweep.snr_db", "omega sweeps take exactly one SNR"));
                }
                self.trials()?;
            }
            ExperimentKind::MultiuserSweep => {
                self.multiuser_config()?;
                self.mu_schemes()?;
                self.snrs()?;
                self.trials()?;
            }
            ExperimentKind::DecomposeCheck => {
                self.decompose()?;
            }
        }
        Ok(())
    }
}
