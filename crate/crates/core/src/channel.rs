//! Channel synthesis: near-field LOS self-interference, sparse far-field
//! multipath, their mixture, and steering-angle gain maps.
//!
//! Every generator Frobenius-normalizes its output to `‖H‖_F² = n_t·n_r`;
//! absolute SI and signal power are applied later through the link budget.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::geometry::{cosine_grid, steer, ArrayPlacement, SteeringAngle};
use crate::linalg::frobenius_sq;
use crate::seed::rng_from_seed;
use crate::{CMatrix, Error, Result, C64};

/// Minimum Tx/Rx element distance accepted by [`los_si_channel`].
pub const MIN_ELEMENT_DISTANCE: f64 = 1e-6;

/// One far-field multipath component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathComponent {
    pub coeff: C64,
    pub aod: SteeringAngle,
    pub aoa: SteeringAngle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelKind {
    LosSi,
    NlosSi,
    CompositeSi,
    Communication,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Normalization {
    Raw,
    /// Target squared Frobenius norm.
    Frobenius(f64),
}

/// Complex `n_r × n_t` channel gain matrix with provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    gains: CMatrix,
    kind: ChannelKind,
    norm: Normalization,
}

impl ChannelMatrix {
    /// Wrap an arbitrary matrix without normalization.
    pub fn raw(gains: CMatrix, kind: ChannelKind) -> Self {
        Self {
            gains,
            kind,
            norm: Normalization::Raw,
        }
    }

    /// Scale `gains` so that `‖H‖_F² = n_t·n_r`.
    pub fn normalized(gains: CMatrix, kind: ChannelKind) -> Result<Self> {
        let target = (gains.nrows() * gains.ncols()) as f64;
        let f = frobenius_sq(&gains);
        if !(f > 0.0 && f.is_finite()) {
            return Err(Error::ZeroInput("channel gains"));
        }
        Ok(Self {
            gains: gains * C64::new((target / f).sqrt(), 0.0),
            kind,
            norm: Normalization::Frobenius(target),
        })
    }

    pub fn gains(&self) -> &CMatrix {
        &self.gains
    }

    pub fn kind(&self) -> ChannelKind {
        self.kind
    }

    pub fn normalization(&self) -> Normalization {
        self.norm
    }

    pub fn n_rx(&self) -> usize {
        self.gains.nrows()
    }

    pub fn n_tx(&self) -> usize {
        self.gains.ncols()
    }

    /// Same shape and kind with every gain set to zero (SI removed).
    pub fn zeroed(&self) -> Self {
        Self::raw(CMatrix::zeros(self.n_rx(), self.n_tx()), self.kind)
    }

    /// Long-format CSV: `rx,tx,re,im`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("rx,tx,re,im\n");
        for n in 0..self.n_rx() {
            for m in 0..self.n_tx() {
                let z = self.gains[(n, m)];
                let _ = writeln!(out, "{n},{m},{},{}", z.re, z.im);
            }
        }
        out
    }
}

/// Near-field LOS entries `exp(-j2πr)/r` before power normalization.
pub fn los_si_unnormalized(p: &ArrayPlacement) -> Result<CMatrix> {
    let r = p.distances();
    let min = r.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    if min < MIN_ELEMENT_DISTANCE {
        return Err(Error::CoincidentElements { min_distance: min });
    }
    let (n_r, n_t) = (p.rx().n_elements(), p.tx().n_elements());
    Ok(CMatrix::from_fn(n_r, n_t, |n, m| {
        let d = r[n][m];
        C64::from_polar(1.0 / d, -TAU * d)
    }))
}

/// Near-field LOS self-interference channel of one node.
pub fn los_si_channel(p: &ArrayPlacement) -> Result<ChannelMatrix> {
    ChannelMatrix::normalized(los_si_unnormalized(p)?, ChannelKind::LosSi)
}

fn sparse_gains(n_t: usize, n_r: usize, paths: &[PathComponent]) -> Result<CMatrix> {
    if n_t == 0 || n_r == 0 {
        return Err(Error::invalid("array size", "must be at least 1"));
    }
    if paths.is_empty() {
        return Err(Error::invalid("paths", "need at least one path"));
    }
    let mut h = CMatrix::zeros(n_r, n_t);
    for path in paths {
        let ar = steer(n_r, path.aoa.value());
        let at = steer(n_t, path.aod.value());
        h += (ar * at.adjoint()) * path.coeff;
    }
    Ok(h)
}

/// `Σ λ_ℓ a(n_r, aoa_ℓ) a(n_t, aod_ℓ)^H`, normalized.
pub fn sparse_channel(n_t: usize, n_r: usize, paths: &[PathComponent]) -> Result<ChannelMatrix> {
    if paths.iter().all(|p| p.coeff == C64::new(0.0, 0.0)) && !paths.is_empty() {
        return Err(Error::ZeroInput("path coefficients"));
    }
    ChannelMatrix::normalized(sparse_gains(n_t, n_r, paths)?, ChannelKind::Communication)
}

/// Far-field NLOS SI component from reflector paths.
pub fn nlos_si_channel(n_t: usize, n_r: usize, paths: &[PathComponent]) -> Result<ChannelMatrix> {
    if paths.iter().all(|p| p.coeff == C64::new(0.0, 0.0)) && !paths.is_empty() {
        return Err(Error::ZeroInput("path coefficients"));
    }
    ChannelMatrix::normalized(sparse_gains(n_t, n_r, paths)?, ChannelKind::NlosSi)
}

/// `l` paths with CN(0, 1) gains and angles uniform on `[-1, 1]`.
pub fn random_paths_from<R: Rng + ?Sized>(rng: &mut R, l: usize) -> Vec<PathComponent> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    (0..l)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            let aod = rng.random_range(-1.0..=1.0);
            let aoa = rng.random_range(-1.0..=1.0);
            PathComponent {
                coeff: C64::new(re * s, im * s),
                aod: SteeringAngle(aod),
                aoa: SteeringAngle(aoa),
            }
        })
        .collect()
}

pub fn random_paths(l: usize, seed: u64) -> Result<Vec<PathComponent>> {
    if l == 0 {
        return Err(Error::invalid("l", "need at least one path"));
    }
    Ok(random_paths_from(&mut rng_from_seed(seed), l))
}

/// Mix a normalized LOS term with a normalized NLOS term at power ratio `epsilon`.
pub fn combine_si(
    los: &ChannelMatrix,
    nlos: Option<&ChannelMatrix>,
    epsilon: f64,
) -> Result<ChannelMatrix> {
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::invalid(
            "epsilon",
            format!("must be >= 0, got {epsilon}"),
        ));
    }
    let nlos = match nlos {
        Some(n) if epsilon > 0.0 => n,
        _ => {
            return Ok(ChannelMatrix {
                gains: los.gains.clone(),
                kind: ChannelKind::CompositeSi,
                norm: los.norm,
            })
        }
    };
    if nlos.gains.shape() != los.gains.shape() {
        return Err(Error::dims(
            "nlos",
            format!("{:?}", los.gains.shape()),
            format!("{:?}", nlos.gains.shape()),
        ));
    }
    let los_n = ChannelMatrix::normalized(los.gains.clone(), los.kind)?;
    let nlos_n = ChannelMatrix::normalized(nlos.gains.clone(), nlos.kind)?;
    let mixed = los_n.gains + nlos_n.gains * C64::new(epsilon.sqrt(), 0.0);
    ChannelMatrix::normalized(mixed, ChannelKind::CompositeSi)
}

/// `H_L + √ε·H_N`, each term normalized, result renormalized.
pub fn composite_si(
    p: &ArrayPlacement,
    nlos_paths: Option<&[PathComponent]>,
    epsilon: f64,
) -> Result<ChannelMatrix> {
    let los = los_si_channel(p)?;
    let nlos = match nlos_paths {
        Some(paths) if epsilon > 0.0 => Some(nlos_si_channel(
            p.tx().n_elements(),
            p.rx().n_elements(),
            paths,
        )?),
        _ => None,
    };
    combine_si(&los, nlos.as_ref(), epsilon)
}

/// `|a(n_r, α_i)^H H a(n_t, β_j)|` over a uniform cosine grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GainMap {
    /// Receive steering angles (rows).
    pub alphas: Vec<f64>,
    /// Transmit steering angles (columns).
    pub betas: Vec<f64>,
    pub values: DMatrix<f64>,
}

impl GainMap {
    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// First maximal cell in row-major order.
    pub fn argmax(&self) -> (usize, usize) {
        let mut best = (0, 0);
        let mut val = f64::NEG_INFINITY;
        for i in 0..self.values.nrows() {
            for j in 0..self.values.ncols() {
                if self.values[(i, j)] > val {
                    val = self.values[(i, j)];
                    best = (i, j);
                }
            }
        }
        best
    }

    /// Cells whose magnitude lies within `db` decibels of the maximum.
    pub fn band_mask(&self, db: f64) -> DMatrix<bool> {
        let floor = self.max() * 10f64.powf(-db / 20.0);
        self.values.map(|v| v >= floor)
    }

    pub fn fraction_within_db(&self, db: f64) -> f64 {
        let mask = self.band_mask(db);
        mask.iter().filter(|&&b| b).count() as f64 / mask.len() as f64
    }

    /// Gain-weighted mean of `β - α` over the `db` band, wrapped to `[-1, 1)`.
    pub fn band_offset(&self, db: f64) -> f64 {
        let mask = self.band_mask(db);
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..self.values.nrows() {
            for j in 0..self.values.ncols() {
                if mask[(i, j)] {
                    let w = self.values[(i, j)];
                    num += w * wrap_cosine(self.betas[j] - self.alphas[i]);
                    den += w;
                }
            }
        }
        num / den
    }

    /// Row-major CSV; the header row carries the transmit angles.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("alpha\\beta");
        for b in &self.betas {
            let _ = write!(out, ",{b}");
        }
        out.push('\n');
        for (i, a) in self.alphas.iter().enumerate() {
            let _ = write!(out, "{a}");
            for j in 0..self.betas.len() {
                let _ = write!(out, ",{}", self.values[(i, j)]);
            }
            out.push('\n');
        }
        out
    }
}

/// Wrap a cosine-domain difference into `[-1, 1)`.
pub fn wrap_cosine(x: f64) -> f64 {
    (x + 1.0).rem_euclid(2.0) - 1.0
}

/// Steering matrix with one column per grid angle.
pub(crate) fn steering_matrix(n: usize, grid: &[f64]) -> CMatrix {
    let mut m = CMatrix::zeros(n, grid.len());
    for (j, &w) in grid.iter().enumerate() {
        m.set_column(j, &steer(n, w));
    }
    m
}

pub fn gain_map(h: &ChannelMatrix, g: usize) -> Result<GainMap> {
    if g < 2 {
        return Err(Error::invalid("grid_size", "must be at least 2"));
    }
    let grid = cosine_grid(g);
    let ar = steering_matrix(h.n_rx(), &grid);
    let at = steering_matrix(h.n_tx(), &grid);
    let m = ar.adjoint() * h.gains() * at;
    Ok(GainMap {
        alphas: grid.clone(),
        betas: grid,
        values: m.map(|z| z.norm()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Ula;
    use crate::linalg::rank;
    use std::f64::consts::PI;

    fn placement(nt: usize, nr: usize, d: f64, omega: f64) -> ArrayPlacement {
        ArrayPlacement::new(
            Ula::half_wavelength(nt).unwrap(),
            Ula::half_wavelength(nr).unwrap(),
            d,
            omega,
        )
        .unwrap()
    }

    fn path(c: f64, aod: f64, aoa: f64) -> PathComponent {
        PathComponent {
            coeff: C64::new(c, 0.0),
            aod: SteeringAngle::new(aod).unwrap(),
            aoa: SteeringAngle::new(aoa).unwrap(),
        }
    }

    #[test]
    fn scalar_los_integer_wavelength() {
        let h = los_si_unnormalized(&placement(1, 1, 5.0, 0.0)).unwrap();
        assert!((h[(0, 0)] - C64::new(0.2, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn scalar_los_quarter_wavelength_residual() {
        let h = los_si_unnormalized(&placement(1, 1, 5.25, 0.0)).unwrap();
        assert!((h[(0, 0)] - C64::new(0.0, -1.0 / 5.25)).norm() < 1e-12);
    }

    #[test]
    fn los_normalization_32() {
        let h = los_si_channel(&placement(32, 32, 5.0, 0.0)).unwrap();
        assert_eq!(h.kind(), ChannelKind::LosSi);
        assert_eq!(h.normalization(), Normalization::Frobenius(1024.0));
        assert!((frobenius_sq(h.gains()) - 1024.0).abs() / 1024.0 < 1e-9);
    }

    #[test]
    fn overlapping_arrays_rejected() {
        // Receive axis pointing straight down from (0, 1) hits the origin at n = 2.
        let p = placement(4, 4, 1.0, 1.5 * PI);
        assert!(matches!(
            los_si_channel(&p),
            Err(Error::CoincidentElements { .. })
        ));
    }

    #[test]
    fn phase_periodicity_in_d() {
        let a = los_si_unnormalized(&placement(1, 1, 3.3, 0.0)).unwrap()[(0, 0)];
        let b = los_si_unnormalized(&placement(1, 1, 4.3, 0.0)).unwrap()[(0, 0)];
        assert!((a.arg() - b.arg()).abs() < 1e-9);
        assert!((b.norm() / a.norm() - 3.3 / 4.3).abs() < 1e-12);
    }

    #[test]
    fn rank_one_uniform_sparse_channel() {
        let raw = sparse_gains(4, 4, &[path(1.0, 0.0, 0.0)]).unwrap();
        assert!(raw.iter().all(|z| (z - C64::new(0.25, 0.0)).norm() < 1e-15));
        let h = sparse_channel(4, 4, &[path(1.0, 0.0, 0.0)]).unwrap();
        assert!(h.gains().iter().all(|z| (z.norm() - 1.0).abs() < 1e-12));
        assert!((frobenius_sq(&raw) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sparse_rank_bounded_by_paths() {
        for (l, seed) in [(1, 1u64), (2, 2), (3, 3), (5, 4)] {
            let paths = random_paths(l, seed).unwrap();
            let h = sparse_channel(12, 10, &paths).unwrap();
            assert!(rank(h.gains()) <= l);
        }
    }

    #[test]
    fn sparse_rejects_degenerate_inputs() {
        assert!(sparse_channel(4, 4, &[]).is_err());
        assert!(matches!(
            sparse_channel(4, 4, &[path(0.0, 0.1, 0.2)]),
            Err(Error::ZeroInput(_))
        ));
        assert!(sparse_channel(0, 4, &[path(1.0, 0.1, 0.2)]).is_err());
    }

    #[test]
    fn random_paths_deterministic() {
        assert_eq!(random_paths(4, 99).unwrap(), random_paths(4, 99).unwrap());
        assert_ne!(random_paths(4, 99).unwrap(), random_paths(4, 100).unwrap());
        assert_eq!(random_paths(1, 3).unwrap().len(), 1);
        assert!(random_paths(0, 3).is_err());
        for p in random_paths(64, 5).unwrap() {
            assert!(p.aod.value().abs() <= 1.0 && p.aoa.value().abs() <= 1.0);
        }
    }

    #[test]
    fn coefficient_power_is_unit() {
        let paths = random_paths(100_000, 2024).unwrap();
        let mean = paths.iter().map(|p| p.coeff.norm_sqr()).sum::<f64>() / paths.len() as f64;
        assert!((mean - 1.0).abs() < 0.02, "mean |coeff|^2 = {mean}");
    }

    #[test]
    fn composite_epsilon_zero_is_los() {
        let p = placement(8, 6, 2.0, 0.3);
        let nlos = random_paths(3, 1).unwrap();
        let los = los_si_channel(&p).unwrap();
        let c = composite_si(&p, Some(&nlos), 0.0).unwrap();
        assert_eq!(c.gains(), los.gains());
        assert_eq!(c.kind(), ChannelKind::CompositeSi);
        let c = composite_si(&p, None, 0.5).unwrap();
        assert_eq!(c.gains(), los.gains());
    }

    #[test]
    fn composite_collinear_mixture() {
        let p = placement(8, 8, 3.0, 0.0);
        let los = los_si_channel(&p).unwrap();
        let c = combine_si(&los, Some(&los), 1.0).unwrap();
        assert!((c.gains() - los.gains()).norm() < 1e-10 * los.gains().norm());
        assert!(combine_si(&los, Some(&los), -1.0).is_err());
    }

    #[test]
    fn composite_weak_nlos_is_small_perturbation() {
        let p = placement(16, 8, 5.0, PI);
        let los = los_si_channel(&p).unwrap();
        for seed in 0..100 {
            let nlos = random_paths(4, seed).unwrap();
            let c = composite_si(&p, Some(&nlos), 0.01).unwrap();
            let rel = (c.gains() - los.gains()).norm() / los.gains().norm();
            assert!(rel <= 0.25, "seed {seed}: {rel}");
            let f = frobenius_sq(c.gains());
            assert!((f - 128.0).abs() / 128.0 < 1e-9);
        }
    }

    #[test]
    fn gain_map_peaks_at_steering_pair() {
        let h = sparse_channel(8, 8, &[path(1.0, -0.5, 0.5)]).unwrap();
        let map = gain_map(&h, 64).unwrap();
        let (i, j) = map.argmax();
        assert!((map.alphas[i] - 0.5).abs() < 1e-12);
        assert!((map.betas[j] + 0.5).abs() < 1e-12);
        assert!(map.values.iter().all(|&v| v >= 0.0));
        assert!(gain_map(&h, 1).is_err());
    }

    #[test]
    fn gain_map_scales_linearly() {
        let h = los_si_channel(&placement(8, 8, 5.0, 0.0)).unwrap();
        let scaled = ChannelMatrix::raw(h.gains() * C64::new(3.0, 0.0), ChannelKind::LosSi);
        let a = gain_map(&h, 32).unwrap();
        let b = gain_map(&scaled, 32).unwrap();
        assert_eq!(a.argmax(), b.argmax());
        for (x, y) in a.values.iter().zip(b.values.iter()) {
            assert!((3.0 * x - y).abs() <= 1e-9 * y.max(1.0));
        }
    }

    #[test]
    fn larger_arrays_are_sparser() {
        let small = gain_map(&los_si_channel(&placement(8, 8, 5.0, 0.0)).unwrap(), 64).unwrap();
        let large = gain_map(&los_si_channel(&placement(32, 32, 5.0, 0.0)).unwrap(), 64).unwrap();
        assert!(large.fraction_within_db(10.0) < small.fraction_within_db(10.0));
    }

    #[test]
    fn csv_shapes() {
        let h = sparse_channel(2, 3, &[path(1.0, 0.0, 0.0)]).unwrap();
        assert_eq!(h.to_csv().lines().count(), 1 + 6);
        let map = gain_map(&h, 4).unwrap();
        let csv = map.to_csv();
        assert_eq!(csv.lines().count(), 5);
        assert!(csv.starts_with("alpha\\beta,-1,-0.5,0,0.5\n"));
    }
}
