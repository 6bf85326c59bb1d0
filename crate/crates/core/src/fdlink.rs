//! Point-to-point full-duplex link: assembly, SINR/sum-rate metrics, the
//! zero-SI unconstrained upper bound, and SNR/ω sweeps.
//!
//! Noise power is 1. `snr_db` sets the per-node transmit power `P` and
//! `si_db` the SI power relative to it, so `P_SI = P·10^(si_db/10)`.

use std::fmt;
use std::str::FromStr;

use crate::beamforming::{
    angle_search, beam_steering, zf_mf, AngleSearchConfig, Awv, BeamformerSet,
};
use crate::channel::{
    composite_si, random_paths_from, sparse_channel, ChannelMatrix, PathComponent,
};
use crate::geometry::{ArrayPlacement, Ula};
use crate::linalg::spectral_norm;
use crate::seed::rng_from_seed;
use crate::sweep::{run_trials, SweepRow, SweepTable};
use crate::{Error, Result};

/// Unit-norm tolerance accepted by [`link_metrics`].
pub const UNIT_NORM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    snr_db: f64,
    si_db: f64,
}

impl LinkBudget {
    /// `si_db` may be `-inf` to disable SI.
    pub fn new(snr_db: f64, si_db: f64) -> Result<Self> {
        if !snr_db.is_finite() {
            return Err(Error::invalid(
                "snr_db",
                format!("must be finite, got {snr_db}"),
            ));
        }
        if si_db.is_nan() || si_db == f64::INFINITY {
            return Err(Error::invalid(
                "si_db",
                format!("must be finite or -inf, got {si_db}"),
            ));
        }
        Ok(Self { snr_db, si_db })
    }

    pub fn snr_db(&self) -> f64 {
        self.snr_db
    }

    pub fn si_db(&self) -> f64 {
        self.si_db
    }

    pub fn signal_power(&self) -> f64 {
        10f64.powf(self.snr_db / 10.0)
    }

    pub fn si_power(&self) -> f64 {
        self.signal_power() * 10f64.powf(self.si_db / 10.0)
    }

    pub fn with_snr(&self, snr_db: f64) -> Result<Self> {
        Self::new(snr_db, self.si_db)
    }

    pub fn with_si(&self, si_db: f64) -> Result<Self> {
        Self::new(self.snr_db, si_db)
    }
}

/// Two nodes exchanging data in both directions at once.
#[derive(Debug, Clone, PartialEq)]
pub struct FdLink {
    h12: ChannelMatrix,
    h21: ChannelMatrix,
    hsi1: ChannelMatrix,
    hsi2: ChannelMatrix,
    paths12: Vec<PathComponent>,
    paths21: Vec<PathComponent>,
    budget: LinkBudget,
}

impl FdLink {
    /// `h12` carries node 1 to node 2; `hsi_i` is node `i`'s own Tx-to-Rx leakage.
    pub fn new(
        h12: ChannelMatrix,
        h21: ChannelMatrix,
        hsi1: ChannelMatrix,
        hsi2: ChannelMatrix,
        budget: LinkBudget,
    ) -> Result<Self> {
        let check = |what, a: usize, b: usize| {
            if a == b {
                Ok(())
            } else {
                Err(Error::dims(what, a, b))
            }
        };
        check("hsi1 columns (node 1 Tx)", h12.n_tx(), hsi1.n_tx())?;
        check("hsi1 rows (node 1 Rx)", h21.n_rx(), hsi1.n_rx())?;
        check("hsi2 columns (node 2 Tx)", h21.n_tx(), hsi2.n_tx())?;
        check("hsi2 rows (node 2 Rx)", h12.n_rx(), hsi2.n_rx())?;
        Ok(Self {
            h12,
            h21,
            hsi1,
            hsi2,
            paths12: Vec::new(),
            paths21: Vec::new(),
            budget,
        })
    }

    /// Attach the multipath descriptions behind `h12` and `h21`.
    pub fn with_paths(mut self, paths12: Vec<PathComponent>, paths21: Vec<PathComponent>) -> Self {
        self.paths12 = paths12;
        self.paths21 = paths21;
        self
    }

    pub fn with_budget(&self, budget: LinkBudget) -> Self {
        Self {
            budget,
            ..self.clone()
        }
    }

    /// Replace both SI channels by zeros.
    pub fn without_si(&self) -> Self {
        Self {
            hsi1: self.hsi1.zeroed(),
            hsi2: self.hsi2.zeroed(),
            ..self.clone()
        }
    }

    pub fn h12(&self) -> &ChannelMatrix {
        &self.h12
    }

    pub fn h21(&self) -> &ChannelMatrix {
        &self.h21
    }

    pub fn hsi1(&self) -> &ChannelMatrix {
        &self.hsi1
    }

    pub fn hsi2(&self) -> &ChannelMatrix {
        &self.hsi2
    }

    pub fn paths12(&self) -> &[PathComponent] {
        &self.paths12
    }

    pub fn paths21(&self) -> &[PathComponent] {
        &self.paths21
    }

    pub fn budget(&self) -> LinkBudget {
        self.budget
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkMetrics {
    /// SINR at node 1 (receiving node 2).
    pub sinr1: f64,
    /// SINR at node 2 (receiving node 1).
    pub sinr2: f64,
    pub asr: f64,
}

impl LinkMetrics {
    pub fn from_sinrs(sinr1: f64, sinr2: f64) -> Self {
        Self {
            sinr1,
            sinr2,
            asr: (1.0 + sinr1).log2() + (1.0 + sinr2).log2(),
        }
    }
}

fn check_awv(name: &'static str, awv: &Awv, len: usize) -> Result<()> {
    if awv.len() != len {
        return Err(Error::dims(name, len, awv.len()));
    }
    let norm = awv.weights().norm();
    if (norm - 1.0).abs() > UNIT_NORM_TOL {
        return Err(Error::NotUnitNorm { name, norm });
    }
    Ok(())
}

/// SINR of one receive direction: `P|w^H H f|² / (P_SI |w^H H_SI f_own|² + 1)`.
pub fn direction_sinr(
    budget: LinkBudget,
    w: &Awv,
    h: &ChannelMatrix,
    f_peer: &Awv,
    hsi: &ChannelMatrix,
    f_own: &Awv,
) -> f64 {
    let wh = w.weights().adjoint();
    let sig = (&wh * (h.gains() * f_peer.weights()))[(0, 0)].norm_sqr();
    let si = (&wh * (hsi.gains() * f_own.weights()))[(0, 0)].norm_sqr();
    let si_term = if budget.si_power() == 0.0 {
        0.0
    } else {
        budget.si_power() * si
    };
    budget.signal_power() * sig / (si_term + 1.0)
}

pub fn link_metrics(link: &FdLink, bf: &BeamformerSet) -> Result<LinkMetrics> {
    check_awv("f1", &bf.f1, link.h12.n_tx())?;
    check_awv("w1", &bf.w1, link.h21.n_rx())?;
    check_awv("f2", &bf.f2, link.h21.n_tx())?;
    check_awv("w2", &bf.w2, link.h12.n_rx())?;
    let sinr1 = direction_sinr(link.budget, &bf.w1, &link.h21, &bf.f2, &link.hsi1, &bf.f1);
    let sinr2 = direction_sinr(link.budget, &bf.w2, &link.h12, &bf.f1, &link.hsi2, &bf.f2);
    Ok(LinkMetrics::from_sinrs(sinr1, sinr2))
}

/// Zero SI and unconstrained rank-one beamforming: `SINR = P·σ_max²`.
pub fn upper_bound(link: &FdLink) -> LinkMetrics {
    let p = link.budget.signal_power();
    let s21 = spectral_norm(link.h21.gains());
    let s12 = spectral_norm(link.h12.gains());
    LinkMetrics::from_sinrs(p * s21 * s21, p * s12 * s12)
}

/// Beamforming scheme evaluated by the link sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    UpperBound,
    BeamSteering,
    AngleSearch,
    ZfMfCa,
    ZfMfNoCa,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [
        Scheme::UpperBound,
        Scheme::BeamSteering,
        Scheme::AngleSearch,
        Scheme::ZfMfCa,
        Scheme::ZfMfNoCa,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::UpperBound => "upper_bound",
            Scheme::BeamSteering => "beam_steering",
            Scheme::AngleSearch => "angle_search",
            Scheme::ZfMfCa => "zf_mf_ca",
            Scheme::ZfMfNoCa => "zf_mf_noca",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::UnknownScheme(s.to_string()))
    }
}

/// Metrics of `scheme` on `link`.
pub fn evaluate(link: &FdLink, scheme: Scheme, search: AngleSearchConfig) -> Result<LinkMetrics> {
    match scheme {
        Scheme::UpperBound => Ok(upper_bound(link)),
        Scheme::BeamSteering => link_metrics(link, &beam_steering(link)?),
        Scheme::AngleSearch => link_metrics(link, &angle_search(link, search)?.beams),
        Scheme::ZfMfCa => link_metrics(link, &zf_mf(link, true)?),
        Scheme::ZfMfNoCa => link_metrics(link, &zf_mf(link, false)?),
    }
}

/// Scenario parameters of a random point-to-point link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkConfig {
    pub node1: ArrayPlacement,
    pub node2: ArrayPlacement,
    /// Multipath components per communication channel.
    pub n_paths: usize,
    pub si_db: f64,
    /// NLOS-to-LOS SI power ratio (linear); 0 disables NLOS SI.
    pub nlos_epsilon: f64,
    pub nlos_paths: usize,
    pub search: AngleSearchConfig,
}

impl LinkConfig {
    /// Both nodes share one placement.
    pub fn symmetric(placement: ArrayPlacement, n_paths: usize, si_db: f64) -> Self {
        Self {
            node1: placement,
            node2: placement,
            n_paths,
            si_db,
            nlos_epsilon: 0.0,
            nlos_paths: 4,
            search: AngleSearchConfig::default(),
        }
    }

    /// 16 Tx / 8 Rx half-wavelength arrays, `ω = π`, `d = 5`, SI 25 dB.
    pub fn fig4_left() -> Self {
        let p = ArrayPlacement::new(
            Ula::half_wavelength(16).expect("valid"),
            Ula::half_wavelength(8).expect("valid"),
            5.0,
            std::f64::consts::PI,
        )
        .expect("valid");
        Self::symmetric(p, 4, 25.0)
    }

    /// 16 Tx / 16 Rx, `d = 1`, SI 25 dB.
    pub fn fig4_right(omega: f64) -> Self {
        let p = ArrayPlacement::new(
            Ula::half_wavelength(16).expect("valid"),
            Ula::half_wavelength(16).expect("valid"),
            1.0,
            omega,
        )
        .expect("valid");
        Self::symmetric(p, 4, 25.0)
    }

    pub fn with_omega(&self, omega: f64) -> Result<Self> {
        Ok(Self {
            node1: self.node1.with_omega(omega)?,
            node2: self.node2.with_omega(omega)?,
            ..*self
        })
    }

    fn validate(&self) -> Result<()> {
        if self.n_paths == 0 {
            return Err(Error::invalid("paths", "need at least one path"));
        }
        if self.nlos_epsilon > 0.0 && self.nlos_paths == 0 {
            return Err(Error::invalid(
                "nlos_paths",
                "need at least one path when nlos_epsilon > 0",
            ));
        }
        LinkBudget::new(0.0, self.si_db)?;
        Ok(())
    }
}

/// Draw a random link; identical `(cfg, seed)` give identical links.
pub fn build_link(cfg: &LinkConfig, budget: LinkBudget, seed: u64) -> Result<FdLink> {
    cfg.validate()?;
    let mut rng = rng_from_seed(seed);
    let (t1, r1) = (cfg.node1.tx().n_elements(), cfg.node1.rx().n_elements());
    let (t2, r2) = (cfg.node2.tx().n_elements(), cfg.node2.rx().n_elements());
    let paths12 = random_paths_from(&mut rng, cfg.n_paths);
    let paths21 = random_paths_from(&mut rng, cfg.n_paths);
    let (nlos1, nlos2) = if cfg.nlos_epsilon > 0.0 {
        (
            Some(random_paths_from(&mut rng, cfg.nlos_paths)),
            Some(random_paths_from(&mut rng, cfg.nlos_paths)),
        )
    } else {
        (None, None)
    };
    let h12 = sparse_channel(t1, r2, &paths12)?;
    let h21 = sparse_channel(t2, r1, &paths21)?;
    let hsi1 = composite_si(&cfg.node1, nlos1.as_deref(), cfg.nlos_epsilon)?;
    let hsi2 = composite_si(&cfg.node2, nlos2.as_deref(), cfg.nlos_epsilon)?;
    Ok(FdLink::new(h12, h21, hsi1, hsi2, budget)?.with_paths(paths12, paths21))
}

fn check_trials(trials: usize) -> Result<()> {
    if trials == 0 {
        Err(Error::invalid("trials", "must be at least 1"))
    } else {
        Ok(())
    }
}

/// Mean sum rate of `scheme` per SNR point.
///
/// Trial `t` uses the link drawn from `trial_seed(seed, t)` at every SNR
/// point, so curves share their random channels.
pub fn sweep_snr(
    cfg: &LinkConfig,
    scheme: Scheme,
    snr_db: &[f64],
    trials: usize,
    seed: u64,
) -> Result<SweepTable> {
    check_trials(trials)?;
    cfg.validate()?;
    let samples = run_trials(snr_db.len(), trials, seed, |point, trial_seed| {
        let budget = LinkBudget::new(snr_db[point], cfg.si_db)?;
        let link = build_link(cfg, budget, trial_seed)?;
        Ok(evaluate(&link, scheme, cfg.search)?.asr)
    })?;
    Ok(SweepTable::new(
        "snr_db",
        snr_db
            .iter()
            .zip(samples)
            .map(|(&x, s)| SweepRow::from_samples(x, scheme.name(), seed, None, s))
            .collect(),
    ))
}

/// [`sweep_snr`] over several schemes, concatenated in the given order.
pub fn sweep_snr_schemes(
    cfg: &LinkConfig,
    schemes: &[Scheme],
    snr_db: &[f64],
    trials: usize,
    seed: u64,
) -> Result<SweepTable> {
    let mut rows = Vec::new();
    for &s in schemes {
        rows.extend(sweep_snr(cfg, s, snr_db, trials, seed)?.rows);
    }
    Ok(SweepTable::new("snr_db", rows))
}

/// Mean sum rate of `scheme` per placement angle `ω` (radians), both nodes rotated alike.
pub fn sweep_omega(
    cfg: &LinkConfig,
    scheme: Scheme,
    omegas: &[f64],
    snr_db: f64,
    trials: usize,
    seed: u64,
) -> Result<SweepTable> {
    check_trials(trials)?;
    cfg.validate()?;
    let budget = LinkBudget::new(snr_db, cfg.si_db)?;
    let cfgs = omegas
        .iter()
        .map(|&w| cfg.with_omega(w))
        .collect::<Result<Vec<_>>>()?;
    let samples = run_trials(omegas.len(), trials, seed, |point, trial_seed| {
        let link = build_link(&cfgs[point], budget, trial_seed)?;
        Ok(evaluate(&link, scheme, cfg.search)?.asr)
    })?;
    Ok(SweepTable::new(
        "omega",
        omegas
            .iter()
            .zip(samples)
            .map(|(&x, s)| SweepRow::from_samples(x, scheme.name(), seed, None, s))
            .collect(),
    ))
}

#[cfg(test)]
mod tests;
