//! Joint steering-angle search over `(f1, w1, f2, w2)`.
//!
//! The sum rate splits as `rate1(f1, f2, w1) + rate2(f1, f2, w2)`: each
//! receive angle enters only its own direction's SINR. For every transmit
//! pair the two receive angles are therefore maximized independently, which
//! visits the same optimum as the full `g⁴` enumeration at `O(g³)` cost.

use std::cmp::Ordering;

use nalgebra::DMatrix;

use super::{Awv, BeamformerSet};
use crate::channel::{steering_matrix, wrap_cosine};
use crate::fdlink::{link_metrics, FdLink};
use crate::geometry::cosine_grid;
use crate::{CMatrix, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AngleSearchConfig {
    /// Points of the uniform cosine grid on `[-1, 1)`.
    pub grid: usize,
    /// Run one coordinate pass on a 4x finer local grid around the winner.
    pub refine: bool,
}

impl Default for AngleSearchConfig {
    fn default() -> Self {
        Self {
            grid: 32,
            refine: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AngleSearchResult {
    /// Coarse-grid winner, ordered `(f1, w1, f2, w2)`.
    pub grid_index: [usize; 4],
    /// Final angles after refinement, ordered `(f1, w1, f2, w2)`.
    pub angles: [f64; 4],
    pub beams: BeamformerSet,
    pub asr: f64,
}

/// `|A_r^H H A_t|²` with rows indexed by receive angle.
fn power_table(h: &CMatrix, grid: &[f64]) -> DMatrix<f64> {
    let ar = steering_matrix(h.nrows(), grid);
    let at = steering_matrix(h.ncols(), grid);
    (ar.adjoint() * h * at).map(|z| z.norm_sqr())
}

/// Best receive index for fixed transmit indices: largest `num[w, sig] / den[w, si]`.
#[inline]
fn best_receive(num: &DMatrix<f64>, sig: usize, den: &DMatrix<f64>, si: usize) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for w in 0..num.nrows() {
        let s = num[(w, sig)] / den[(w, si)];
        if s > best.1 {
            best = (w, s);
        }
    }
    best
}

fn beams_at(link: &FdLink, a: [f64; 4]) -> BeamformerSet {
    BeamformerSet {
        f1: Awv::steering_unchecked(link.h12().n_tx(), a[0]),
        w1: Awv::steering_unchecked(link.h21().n_rx(), a[1]),
        f2: Awv::steering_unchecked(link.h21().n_tx(), a[2]),
        w2: Awv::steering_unchecked(link.h12().n_rx(), a[3]),
    }
}

pub fn angle_search(link: &FdLink, cfg: AngleSearchConfig) -> Result<AngleSearchResult> {
    if cfg.grid < 2 {
        return Err(Error::invalid("grid_size", "must be at least 2"));
    }
    let g = cfg.grid;
    let grid = cosine_grid(g);
    let p = link.budget().signal_power();
    let p_si = link.budget().si_power();

    // Node 2 receives node 1 (rate2); node 1 receives node 2 (rate1).
    let num2 = power_table(link.h12().gains(), &grid).map(|x| p * x);
    let den2 = power_table(link.hsi2().gains(), &grid).map(|x| p_si * x + 1.0);
    let num1 = power_table(link.h21().gains(), &grid).map(|x| p * x);
    let den1 = power_table(link.hsi1().gains(), &grid).map(|x| p_si * x + 1.0);

    let mut best_idx = [0usize; 4];
    let mut best_val = f64::NEG_INFINITY;
    for f1 in 0..g {
        for f2 in 0..g {
            let (w1, s1) = best_receive(&num1, f2, &den1, f1);
            let (w2, s2) = best_receive(&num2, f1, &den2, f2);
            let val = (1.0 + s1).log2() + (1.0 + s2).log2();
            let idx = [f1, w1, f2, w2];
            let better = match val.partial_cmp(&best_val) {
                Some(Ordering::Greater) => true,
                Some(Ordering::Equal) => idx < best_idx,
                _ => false,
            };
            if better {
                best_val = val;
                best_idx = idx;
            }
        }
    }

    let mut angles = best_idx.map(|i| grid[i]);
    let mut asr = link_metrics(link, &beams_at(link, angles))?.asr;
    if cfg.refine {
        let step = 2.0 / g as f64 / 4.0;
        for coord in 0..4 {
            let center = angles[coord];
            for k in -4i32..=4 {
                if k == 0 {
                    continue;
                }
                let mut trial = angles;
                trial[coord] = wrap_cosine(center + k as f64 * step);
                let val = link_metrics(link, &beams_at(link, trial))?.asr;
                if val > asr {
                    asr = val;
                    angles = trial;
                }
            }
        }
    }
    Ok(AngleSearchResult {
        grid_index: best_idx,
        angles,
        beams: beams_at(link, angles),
        asr,
    })
}
