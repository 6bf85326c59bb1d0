//! Full-duplex base-station hybrid precoding.
//!
//! The base station (BS) serves `K` full-duplex users: it transmits one
//! downlink stream per user through `m_rf` transmit RF chains and receives
//! one uplink stream per user through `n_rf` receive RF chains. Precoding is
//! two-stage:
//!
//! 1. Analog: each BS-user pair is treated as an isolated point-to-point
//!    full-duplex link and designed with angle search or ZF-MF, ignoring
//!    multi-user interference (MUI). The BS-side AWVs become the columns of
//!    the analog precoder/combiner.
//! 2. Digital: zero forcing of the downlink MUI through the effective
//!    `K×K` channel, and least-squares zero forcing of uplink MUI plus the
//!    multi-stream residual SI.
//!
//! Without the CA constraint (doubled RF chains) the receive side is fully
//! digital: any `K`-stream combiner is realizable with `2K` CA chains (see
//! [`double_rf_realization`]), so the uplink zero forcing runs over the
//! whole receive array and can null SI and MUI together.

use std::fmt;
use std::str::FromStr;

use crate::beamforming::{
    angle_search, ca_decompose, zf_mf, AngleSearchConfig, Awv, BeamformerSet, CA_TOL,
};
use crate::channel::{
    composite_si, random_paths_from, sparse_channel, ChannelMatrix, PathComponent,
};
use crate::fdlink::{FdLink, LinkBudget};
use crate::geometry::{ArrayPlacement, Ula};
use crate::linalg::pinv_checked;
use crate::seed::rng_from_seed;
use crate::sweep::{run_trials, SweepRow, SweepTable};
use crate::{CMatrix, CVector, Error, Result, C64};

/// Links between the BS and one user.
#[derive(Debug, Clone, PartialEq)]
pub struct UserLinks {
    /// BS to user: `user n_rx × bs n_tx`.
    pub downlink: ChannelMatrix,
    /// User to BS: `bs n_rx × user n_tx`.
    pub uplink: ChannelMatrix,
    /// The user's own SI channel.
    pub si: ChannelMatrix,
    pub downlink_paths: Vec<PathComponent>,
    pub uplink_paths: Vec<PathComponent>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiuserScenario {
    bs_placement: ArrayPlacement,
    bs_si: ChannelMatrix,
    users: Vec<UserLinks>,
    m_rf: usize,
    n_rf: usize,
    budget: LinkBudget,
}

impl MultiuserScenario {
    /// One downlink and one uplink stream per user (`m_rf = n_rf = K`).
    pub fn new(
        bs_placement: ArrayPlacement,
        bs_si: ChannelMatrix,
        users: Vec<UserLinks>,
        budget: LinkBudget,
    ) -> Result<Self> {
        if users.is_empty() {
            return Err(Error::invalid("k_users", "need at least one user"));
        }
        let (bt, br) = (
            bs_placement.tx().n_elements(),
            bs_placement.rx().n_elements(),
        );
        if bs_si.n_tx() != bt || bs_si.n_rx() != br {
            return Err(Error::dims(
                "bs_si",
                format!("{br}x{bt}"),
                format!("{}x{}", bs_si.n_rx(), bs_si.n_tx()),
            ));
        }
        for u in &users {
            if u.downlink.n_tx() != bt {
                return Err(Error::dims("downlink columns", bt, u.downlink.n_tx()));
            }
            if u.uplink.n_rx() != br {
                return Err(Error::dims("uplink rows", br, u.uplink.n_rx()));
            }
            if u.si.n_tx() != u.uplink.n_tx() || u.si.n_rx() != u.downlink.n_rx() {
                return Err(Error::dims(
                    "user si",
                    format!("{}x{}", u.downlink.n_rx(), u.uplink.n_tx()),
                    format!("{}x{}", u.si.n_rx(), u.si.n_tx()),
                ));
            }
        }
        let k = users.len();
        Ok(Self {
            bs_placement,
            bs_si,
            users,
            m_rf: k,
            n_rf: k,
            budget,
        })
    }

    pub fn k_users(&self) -> usize {
        self.users.len()
    }

    pub fn m_rf(&self) -> usize {
        self.m_rf
    }

    pub fn n_rf(&self) -> usize {
        self.n_rf
    }

    pub fn users(&self) -> &[UserLinks] {
        &self.users
    }

    pub fn bs_si(&self) -> &ChannelMatrix {
        &self.bs_si
    }

    pub fn bs_placement(&self) -> ArrayPlacement {
        self.bs_placement
    }

    pub fn budget(&self) -> LinkBudget {
        self.budget
    }

    pub fn with_budget(&self, budget: LinkBudget) -> Self {
        Self {
            budget,
            ..self.clone()
        }
    }

    /// Zero every SI channel (BS and users).
    pub fn without_si(&self) -> Self {
        let mut out = self.clone();
        out.bs_si = out.bs_si.zeroed();
        for u in &mut out.users {
            u.si = u.si.zeroed();
        }
        out
    }

    /// The `(BS, user k)` pair as a point-to-point link; node 1 is the BS.
    pub fn pair_link(&self, k: usize) -> Result<FdLink> {
        let u = self
            .users
            .get(k)
            .ok_or_else(|| Error::invalid("user", format!("index {k} out of range")))?;
        Ok(FdLink::new(
            u.downlink.clone(),
            u.uplink.clone(),
            self.bs_si.clone(),
            u.si.clone(),
            self.budget,
        )?
        .with_paths(u.downlink_paths.clone(), u.uplink_paths.clone()))
    }
}

/// Analog design used per BS-user pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AnalogMethod {
    AngleSearch,
    ZfMf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HybridPrecoders {
    /// `bs n_tx × m_rf`.
    pub f_rf: CMatrix,
    /// `bs n_rx × n_rf`.
    pub w_rf: CMatrix,
    /// `m_rf × m_rf`.
    pub f_bb: CMatrix,
    /// `n_rf × n_rf`.
    pub w_bb: CMatrix,
    /// Per-user transmit AWVs.
    pub user_tx: Vec<Awv>,
    /// Per-user receive AWVs.
    pub user_rx: Vec<Awv>,
    /// Analog columns are held to the CA set.
    pub constant_amplitude: bool,
    /// Set once the digital stage ran.
    pub digital_done: bool,
    /// A digital-stage effective matrix was rank deficient (ridge fallback used).
    pub rank_deficient: bool,
}

impl HybridPrecoders {
    /// `F_RF F_BB`, one column per downlink stream.
    pub fn precoder(&self) -> CMatrix {
        &self.f_rf * &self.f_bb
    }

    /// `W_BB W_RF^H`, one row per uplink stream.
    pub fn combiner(&self) -> CMatrix {
        &self.w_bb * self.w_rf.adjoint()
    }

    /// Every analog column has elementwise magnitude `1/√n`.
    pub fn analog_is_constant_amplitude(&self) -> bool {
        let ok = |m: &CMatrix| {
            let amp = 1.0 / (m.nrows() as f64).sqrt();
            m.iter().all(|z| (z.norm() - amp).abs() <= CA_TOL)
        };
        ok(&self.f_rf) && ok(&self.w_rf)
    }
}

/// The point-to-point design a pair receives.
pub fn pair_beams(
    link: &FdLink,
    method: AnalogMethod,
    ca: bool,
    search: AngleSearchConfig,
) -> Result<BeamformerSet> {
    match method {
        AnalogMethod::AngleSearch => Ok(angle_search(link, search)?.beams),
        AnalogMethod::ZfMf => zf_mf(link, ca),
    }
}

/// Per-user analog design.
///
/// Steering vectors from angle search are CA by construction; `ca = false`
/// only changes ZF-MF (no projection) and marks the receive side as fully
/// digital for the digital stage.
pub fn analog_stage(
    sc: &MultiuserScenario,
    method: AnalogMethod,
    ca: bool,
    search: AngleSearchConfig,
) -> Result<HybridPrecoders> {
    let k = sc.k_users();
    let bt = sc.bs_placement.tx().n_elements();
    let br = sc.bs_placement.rx().n_elements();
    let mut f_rf = CMatrix::zeros(bt, k);
    let mut w_rf = CMatrix::zeros(br, k);
    let mut user_tx = Vec::with_capacity(k);
    let mut user_rx = Vec::with_capacity(k);
    for i in 0..k {
        let link = sc.pair_link(i)?;
        let bf = pair_beams(&link, method, ca, search)?;
        f_rf.set_column(i, bf.f1.weights());
        w_rf.set_column(i, bf.w1.weights());
        user_tx.push(bf.f2);
        user_rx.push(bf.w2);
    }
    Ok(HybridPrecoders {
        f_rf,
        w_rf,
        f_bb: CMatrix::identity(k, k),
        w_bb: CMatrix::identity(k, k),
        user_tx,
        user_rx,
        constant_amplitude: ca,
        digital_done: false,
        rank_deficient: false,
    })
}

/// `[G]_{k,j} = w_k^H H_k^DL f_rf(:, j)`.
pub fn downlink_effective(sc: &MultiuserScenario, hp: &HybridPrecoders) -> CMatrix {
    let k = sc.k_users();
    let mut g = CMatrix::zeros(k, hp.f_rf.ncols());
    for (row, u) in sc.users.iter().enumerate() {
        let wh = hp.user_rx[row].weights().adjoint() * u.downlink.gains();
        let r = &wh * &hp.f_rf;
        g.set_row(row, &r);
    }
    g
}

/// Columns `H_k^UL f_k` of the uplink signals at the BS array.
fn uplink_signals(sc: &MultiuserScenario, hp: &HybridPrecoders) -> CMatrix {
    let br = sc.bs_placement.rx().n_elements();
    let mut y = CMatrix::zeros(br, sc.k_users());
    for (k, u) in sc.users.iter().enumerate() {
        y.set_column(k, &(u.uplink.gains() * hp.user_tx[k].weights()));
    }
    y
}

fn normalize_columns(m: &mut CMatrix) {
    for mut c in m.column_iter_mut() {
        let n = c.norm();
        if n > 0.0 {
            c.unscale_mut(n);
        }
    }
}

/// Digital zero forcing after the analog stage.
///
/// Downlink: `F_BB = G_DL^+` with columns of `F_RF F_BB` scaled to unit norm.
/// Uplink: the first `n_rf` rows of `[G_UL | S]^+`, where `S` is the residual
/// SI of all downlink streams, with rows of `W_BB` scaled to unit norm. In the
/// unconstrained variant the receive basis is the full array (fully digital).
pub fn digital_stage(sc: &MultiuserScenario, partial: &HybridPrecoders) -> Result<HybridPrecoders> {
    let k = sc.k_users();
    let mut hp = partial.clone();

    let g_dl = downlink_effective(sc, &hp);
    let (mut f_bb, dl_flag) = pinv_checked(&g_dl);
    let mut prec = &hp.f_rf * &f_bb;
    for j in 0..k {
        let n = prec.column(j).norm();
        if n > 0.0 {
            f_bb.column_mut(j).unscale_mut(n);
            prec.column_mut(j).unscale_mut(n);
        }
    }
    hp.f_bb = f_bb;

    let basis = if hp.constant_amplitude {
        hp.w_rf.clone()
    } else {
        CMatrix::identity(
            sc.bs_placement.rx().n_elements(),
            sc.bs_placement.rx().n_elements(),
        )
    };
    let bh = basis.adjoint();
    let g_ul = &bh * uplink_signals(sc, &hp);
    let s = &bh * sc.bs_si.gains() * &prec;
    let mut stacked = CMatrix::zeros(g_ul.nrows(), 2 * k);
    stacked.columns_mut(0, k).copy_from(&g_ul);
    stacked.columns_mut(k, k).copy_from(&s);
    let (p, ul_flag) = pinv_checked(&stacked);
    let mut w_bb = p.rows(0, k).into_owned();
    for mut r in w_bb.row_iter_mut() {
        let n = r.norm();
        if n > 0.0 {
            r.unscale_mut(n);
        }
    }
    if hp.constant_amplitude {
        hp.w_bb = w_bb;
    } else {
        // Fully digital: fold the combiner into the (unconstrained) analog columns.
        let mut w_rf = (&w_bb * &bh).adjoint();
        normalize_columns(&mut w_rf);
        hp.w_rf = w_rf;
        hp.w_bb = CMatrix::identity(k, k);
    }
    hp.digital_done = true;
    hp.rank_deficient = dl_flag || ul_flag;
    Ok(hp)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MuMetrics {
    pub sinr_dl: Vec<f64>,
    pub sinr_ul: Vec<f64>,
    pub asr: f64,
}

pub fn mu_metrics(sc: &MultiuserScenario, hp: &HybridPrecoders) -> Result<MuMetrics> {
    let k = sc.k_users();
    let bt = sc.bs_placement.tx().n_elements();
    let br = sc.bs_placement.rx().n_elements();
    if hp.f_rf.nrows() != bt || hp.w_rf.nrows() != br {
        return Err(Error::dims(
            "analog precoders",
            format!("{bt}/{br} rows"),
            format!("{}/{} rows", hp.f_rf.nrows(), hp.w_rf.nrows()),
        ));
    }
    if hp.user_tx.len() != k
        || hp.user_rx.len() != k
        || hp.f_bb.ncols() != k
        || hp.w_bb.nrows() != k
    {
        return Err(Error::dims("streams", k, hp.user_tx.len()));
    }
    let p = sc.budget.signal_power();
    let p_si = sc.budget.si_power();
    let si = |x: f64| if p_si == 0.0 { 0.0 } else { p_si * x };
    let prec = hp.precoder();
    let comb = hp.combiner();

    let mut sinr_dl = Vec::with_capacity(k);
    for (i, u) in sc.users.iter().enumerate() {
        let w = hp.user_rx[i].weights();
        let eff = w.adjoint() * u.downlink.gains() * &prec;
        let sig = p * eff[(0, i)].norm_sqr();
        let mui: f64 = (0..k)
            .filter(|&j| j != i)
            .map(|j| p * eff[(0, j)].norm_sqr())
            .sum();
        let own_si = (w.adjoint() * (u.si.gains() * hp.user_tx[i].weights()))[(0, 0)].norm_sqr();
        sinr_dl.push(sig / (mui + si(own_si) + w.norm_squared()));
    }

    let y = uplink_signals(sc, hp);
    let eff_ul = &comb * &y;
    let res_si = &comb * sc.bs_si.gains() * &prec;
    let mut sinr_ul = Vec::with_capacity(k);
    for i in 0..k {
        let sig = p * eff_ul[(i, i)].norm_sqr();
        let mui: f64 = (0..k)
            .filter(|&j| j != i)
            .map(|j| p * eff_ul[(i, j)].norm_sqr())
            .sum();
        let si_pow: f64 = res_si.row(i).iter().map(|z| z.norm_sqr()).sum();
        sinr_ul.push(sig / (mui + si(si_pow) + comb.row(i).norm_squared()));
    }
    let asr = sinr_dl
        .iter()
        .chain(&sinr_ul)
        .map(|s| (1.0 + s).log2())
        .sum();
    Ok(MuMetrics {
        sinr_dl,
        sinr_ul,
        asr,
    })
}

/// Residual BS SI power `‖W_BB W_RF^H H_SI F‖²` (rows of `W_BB` and columns of `W_RF` are unit norm).
///
/// `digital = false` uses the analog stage alone (`W_BB = I`, `F = F_RF`).
pub fn residual_bs_si(sc: &MultiuserScenario, hp: &HybridPrecoders, digital: bool) -> f64 {
    let (comb, prec) = if digital {
        (hp.combiner(), hp.precoder())
    } else {
        (hp.w_rf.adjoint(), hp.f_rf.clone())
    };
    (&comb * sc.bs_si.gains() * prec)
        .iter()
        .map(|z| z.norm_sqr())
        .sum()
}

/// Realize unconstrained columns with two CA columns each.
///
/// Column `k` of `columns` equals `ca · bb(:, k)`, where `ca` has `2K`
/// columns of elementwise magnitude `1/√n` and `bb` is `2K × K`.
pub fn double_rf_realization(columns: &CMatrix) -> Result<(CMatrix, CMatrix)> {
    let (n, k) = columns.shape();
    let amp = 1.0 / (n as f64).sqrt();
    let mut ca = CMatrix::zeros(n, 2 * k);
    let mut bb = CMatrix::zeros(2 * k, k);
    for j in 0..k {
        let v: CVector = columns.column(j).into_owned();
        let dec = ca_decompose(&v, None)?;
        let beta = C64::new(dec.scale_c / 2.0 / amp, 0.0);
        ca.set_column(2 * j, &dec.v1.unscale(beta.re));
        ca.set_column(2 * j + 1, &dec.v2.unscale(beta.re));
        bb[(2 * j, j)] = beta;
        bb[(2 * j + 1, j)] = beta;
    }
    Ok((ca, bb))
}

/// Multi-user scheme of the sum-rate experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MuScheme {
    /// ZF-MF per pair, CA analog columns.
    ZfMfMuser,
    /// Angle search per pair.
    AngleSearchMuser,
    /// ZF-MF per pair without the CA constraint (doubled RF chains).
    NoCa,
}

impl MuScheme {
    pub const ALL: [MuScheme; 3] = [
        MuScheme::ZfMfMuser,
        MuScheme::AngleSearchMuser,
        MuScheme::NoCa,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MuScheme::ZfMfMuser => "zf_mf_muser",
            MuScheme::AngleSearchMuser => "angle_search_muser",
            MuScheme::NoCa => "no_ca",
        }
    }

    fn method(self) -> (AnalogMethod, bool) {
        match self {
            MuScheme::ZfMfMuser => (AnalogMethod::ZfMf, true),
            MuScheme::AngleSearchMuser => (AnalogMethod::AngleSearch, true),
            MuScheme::NoCa => (AnalogMethod::ZfMf, false),
        }
    }
}

impl fmt::Display for MuScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MuScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MuScheme::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::UnknownScheme(s.to_string()))
    }
}

/// Scenario template for random multi-user draws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiuserConfig {
    pub bs: ArrayPlacement,
    pub user: ArrayPlacement,
    pub k_users: usize,
    pub n_paths: usize,
    pub si_db: f64,
    pub search: AngleSearchConfig,
}

impl MultiuserConfig {
    /// 16-element arrays everywhere, `ω = π/8`, `d = 5`, SI 20 dB.
    pub fn fig5(k_users: usize) -> Self {
        let u = Ula::half_wavelength(16).expect("valid");
        let p = ArrayPlacement::new(u, u, 5.0, std::f64::consts::PI / 8.0).expect("valid");
        Self {
            bs: p,
            user: p,
            k_users,
            n_paths: 4,
            si_db: 20.0,
            search: Default::default(),
        }
    }
}

pub fn build_scenario(
    cfg: &MultiuserConfig,
    budget: LinkBudget,
    seed: u64,
) -> Result<MultiuserScenario> {
    if cfg.k_users == 0 {
        return Err(Error::invalid("k_users", "need at least one user"));
    }
    if cfg.n_paths == 0 {
        return Err(Error::invalid("paths", "need at least one path"));
    }
    let mut rng = rng_from_seed(seed);
    let bs_si = composite_si(&cfg.bs, None, 0.0)?;
    let user_si = composite_si(&cfg.user, None, 0.0)?;
    let (bt, br) = (cfg.bs.tx().n_elements(), cfg.bs.rx().n_elements());
    let (ut, ur) = (cfg.user.tx().n_elements(), cfg.user.rx().n_elements());
    let users = (0..cfg.k_users)
        .map(|_| {
            let dl = random_paths_from(&mut rng, cfg.n_paths);
            let ul = random_paths_from(&mut rng, cfg.n_paths);
            Ok(UserLinks {
                downlink: sparse_channel(bt, ur, &dl)?,
                uplink: sparse_channel(ut, br, &ul)?,
                si: user_si.clone(),
                downlink_paths: dl,
                uplink_paths: ul,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    MultiuserScenario::new(cfg.bs, bs_si, users, budget)
}

/// Analog plus digital stage for one scheme.
pub fn design(
    sc: &MultiuserScenario,
    scheme: MuScheme,
    search: AngleSearchConfig,
) -> Result<HybridPrecoders> {
    let (method, ca) = scheme.method();
    let partial = analog_stage(sc, method, ca, search)?;
    digital_stage(sc, &partial)
}

/// Mean multi-user sum rate per `(scheme, snr)`; deterministic under `seed`.
pub fn mu_sweep(
    cfg: &MultiuserConfig,
    schemes: &[MuScheme],
    snr_db: &[f64],
    trials: usize,
    seed: u64,
) -> Result<SweepTable> {
    if trials == 0 {
        return Err(Error::invalid("trials", "must be at least 1"));
    }
    LinkBudget::new(0.0, cfg.si_db)?;
    let mut rows = Vec::new();
    for &scheme in schemes {
        let samples = run_trials(snr_db.len(), trials, seed, |point, trial_seed| {
            let budget = LinkBudget::new(snr_db[point], cfg.si_db)?;
            let sc = build_scenario(cfg, budget, trial_seed)?;
            let hp = design(&sc, scheme, cfg.search)?;
            Ok(mu_metrics(&sc, &hp)?.asr)
        })?;
        rows.extend(
            snr_db.iter().zip(samples).map(|(&x, s)| {
                SweepRow::from_samples(x, scheme.name(), seed, Some(cfg.k_users), s)
            }),
        );
    }
    Ok(SweepTable::new("snr_db", rows))
}
