//! Antenna-weight-vector (AWV) design.
//!
//! Phase-shifter hardware only controls phases, so analog AWVs are held to
//! the constant-amplitude (CA) set `{v : |v_k| = 1/√n}`. The routines here
//! build unconstrained designs (matched filter, zero forcing), map them onto
//! the CA set, and split arbitrary vectors into two CA vectors for
//! double-RF-chain realizations.

mod angle_search;

pub use angle_search::{angle_search, AngleSearchConfig, AngleSearchResult};

use crate::channel::{ChannelMatrix, PathComponent};
use crate::fdlink::FdLink;
use crate::geometry::{steer, SteeringAngle};
use crate::linalg::{dominant_right_singular, normalized};
use crate::{CVector, Error, Result, C64};

/// Tolerance for the elementwise CA magnitude check.
pub const CA_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Constraint {
    Unconstrained,
    ConstantAmplitude,
    /// A steering vector; implies constant amplitude.
    Steering(SteeringAngle),
}

/// Unit-norm antenna weight vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Awv {
    weights: CVector,
    constraint: Constraint,
}

impl Awv {
    /// Normalize `v` to unit norm.
    pub fn unconstrained(v: CVector) -> Result<Self> {
        let weights = normalized(&v).ok_or(Error::ZeroInput("weight vector"))?;
        Ok(Self {
            weights,
            constraint: Constraint::Unconstrained,
        })
    }

    pub fn steering(n: usize, angle: SteeringAngle) -> Result<Self> {
        Ok(Self {
            weights: crate::geometry::steering_vector(n, angle)?,
            constraint: Constraint::Steering(angle),
        })
    }

    pub(crate) fn steering_unchecked(n: usize, angle: f64) -> Self {
        Self {
            weights: steer(n, angle),
            constraint: Constraint::Steering(SteeringAngle(angle)),
        }
    }

    pub fn weights(&self) -> &CVector {
        &self.weights
    }

    pub fn into_weights(self) -> CVector {
        self.weights
    }

    pub fn constraint(&self) -> Constraint {
        self.constraint
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Every element has magnitude `1/√n` within `tol`.
    pub fn is_constant_amplitude(&self, tol: f64) -> bool {
        let amp = 1.0 / (self.len() as f64).sqrt();
        self.weights.iter().all(|z| (z.norm() - amp).abs() <= tol)
    }

    /// Multiply by the unit-modulus scalar `exp(jφ)`.
    pub fn rotated(&self, phi: f64) -> Self {
        Self {
            weights: &self.weights * C64::from_polar(1.0, phi),
            constraint: self.constraint,
        }
    }
}

/// Nearest CA vector: keep each element's phase, set its magnitude to `1/√n`.
///
/// Zero entries get phase 0.
pub fn ca_project(v: &CVector) -> Awv {
    let amp = 1.0 / (v.len().max(1) as f64).sqrt();
    let weights = v.map(|z| {
        if z.norm() == 0.0 {
            C64::new(amp, 0.0)
        } else {
            C64::from_polar(amp, z.arg())
        }
    });
    Awv {
        weights,
        constraint: Constraint::ConstantAmplitude,
    }
}

/// `v = v1 + v2` with `|v1_k| = |v2_k| = c/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct CaDecomposition {
    pub v1: CVector,
    pub v2: CVector,
    pub scale_c: f64,
}

impl CaDecomposition {
    pub fn reconstruct(&self) -> CVector {
        &self.v1 + &self.v2
    }
}

/// Split `v` into two vectors of constant element magnitude `c/2`.
///
/// Element `k` uses phases `arg v_k ± arccos(|v_k|/c)`. `c` defaults to
/// `max_k |v_k|`, the smallest feasible value.
pub fn ca_decompose(v: &CVector, c: Option<f64>) -> Result<CaDecomposition> {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return Err(Error::ZeroInput("v"));
    }
    let c = match c {
        None => max,
        Some(c) if c.is_finite() && c >= max => c,
        Some(c) => {
            return Err(Error::invalid(
                "c",
                format!("must be at least max |v_k| = {max}, got {c}"),
            ))
        }
    };
    let half = c / 2.0;
    let mut v1 = CVector::zeros(v.len());
    let mut v2 = CVector::zeros(v.len());
    for (k, z) in v.iter().enumerate() {
        let phase = if z.norm() == 0.0 { 0.0 } else { z.arg() };
        let spread = (z.norm() / c).min(1.0).acos();
        v1[k] = C64::from_polar(half, phase + spread);
        v2[k] = C64::from_polar(half, phase - spread);
    }
    Ok(CaDecomposition { v1, v2, scale_c: c })
}

/// Transmit matched filter: the dominant right singular vector of `h`.
pub fn mf_tx(h: &ChannelMatrix) -> Result<Awv> {
    let (_, v) = dominant_right_singular(h.gains()).ok_or(Error::ZeroInput("channel"))?;
    Ok(Awv {
        weights: v,
        constraint: Constraint::Unconstrained,
    })
}

/// Receive zero-forcing result.
#[derive(Debug, Clone, PartialEq)]
pub struct ZfOutcome {
    pub awv: Awv,
    /// Set when the interference is zero or spans the target, so no null was placed.
    pub degenerate: bool,
}

fn project_out(t: &CVector, u: &CVector, u_norm_sq: f64) -> CVector {
    t - u * (u.dotc(t) / u_norm_sq)
}

/// Project `target` onto the orthogonal complement of `interference`.
pub fn zf_rx(target: &CVector, interference: &CVector) -> Result<ZfOutcome> {
    if target.len() != interference.len() {
        return Err(Error::dims(
            "interference",
            target.len(),
            interference.len(),
        ));
    }
    let t_norm = target.norm();
    if t_norm == 0.0 {
        return Err(Error::ZeroInput("target"));
    }
    let u_norm_sq = interference.norm_squared();
    let fallback = || -> Result<ZfOutcome> {
        Ok(ZfOutcome {
            awv: Awv::unconstrained(target.clone())?,
            degenerate: true,
        })
    };
    if u_norm_sq == 0.0 {
        return fallback();
    }
    // Second pass removes the rounding residue of the first.
    let p = project_out(target, interference, u_norm_sq);
    let p = project_out(&p, interference, u_norm_sq);
    if p.norm() < 1e-12 * t_norm {
        return fallback();
    }
    Ok(ZfOutcome {
        awv: Awv::unconstrained(p)?,
        degenerate: false,
    })
}

/// Steer both ends along the strongest path (lowest index on ties).
pub fn beam_steering_pair(paths: &[PathComponent], n_t: usize, n_r: usize) -> Result<(Awv, Awv)> {
    let first = paths
        .first()
        .ok_or_else(|| Error::invalid("paths", "empty path set"))?;
    let best = paths.iter().skip(1).fold(first, |best, p| {
        if p.coeff.norm() > best.coeff.norm() {
            p
        } else {
            best
        }
    });
    Ok((Awv::steering(n_t, best.aod)?, Awv::steering(n_r, best.aoa)?))
}

/// AWVs of both nodes of a full-duplex link.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamformerSet {
    /// Node 1 transmit.
    pub f1: Awv,
    /// Node 1 receive.
    pub w1: Awv,
    /// Node 2 transmit.
    pub f2: Awv,
    /// Node 2 receive.
    pub w2: Awv,
}

/// Beam steering on both directions of `link`.
pub fn beam_steering(link: &FdLink) -> Result<BeamformerSet> {
    let (f1, w2) = beam_steering_pair(link.paths12(), link.h12().n_tx(), link.h12().n_rx())?;
    let (f2, w1) = beam_steering_pair(link.paths21(), link.h21().n_tx(), link.h21().n_rx())?;
    Ok(BeamformerSet { f1, w1, f2, w2 })
}

/// ZF-MF: matched-filter transmit at both nodes, then receive ZF against
/// the node's own SI. With `apply_ca`, transmit AWVs are projected onto the
/// CA set before the receive design and receive AWVs after it.
pub fn zf_mf(link: &FdLink, apply_ca: bool) -> Result<BeamformerSet> {
    let mut f1 = mf_tx(link.h12())?;
    let mut f2 = mf_tx(link.h21())?;
    if apply_ca {
        f1 = ca_project(f1.weights());
        f2 = ca_project(f2.weights());
    }
    let w2 = zf_rx(
        &(link.h12().gains() * f1.weights()),
        &(link.hsi2().gains() * f2.weights()),
    )?
    .awv;
    let w1 = zf_rx(
        &(link.h21().gains() * f2.weights()),
        &(link.hsi1().gains() * f1.weights()),
    )?
    .awv;
    let (w1, w2) = if apply_ca {
        (ca_project(w1.weights()), ca_project(w2.weights()))
    } else {
        (w1, w2)
    };
    Ok(BeamformerSet { f1, w1, f2, w2 })
}
