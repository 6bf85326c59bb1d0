//! Uniform linear array geometry and steering vectors.
//!
//! Lengths are in wavelengths. The placement frame puts the transmit array
//! on the x-axis with its first element at the origin. The first receive
//! element sits at `(0, d)` and the receive axis points along
//! `(cos ω, sin ω)`, so `ω = 0` is two parallel arrays side by side and
//! `ω = π` two antiparallel arrays.

use std::f64::consts::{PI, TAU};

use crate::{CVector, Error, Result, C64};

/// Uniform linear array.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ula {
    n_elements: usize,
    spacing: f64,
}

impl Ula {
    pub const HALF_WAVELENGTH: f64 = 0.5;

    pub fn new(n_elements: usize, spacing: f64) -> Result<Self> {
        if n_elements == 0 {
            return Err(Error::invalid("n_elements", "must be at least 1"));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::invalid(
                "spacing",
                format!("must be positive, got {spacing}"),
            ));
        }
        Ok(Self {
            n_elements,
            spacing,
        })
    }

    pub fn half_wavelength(n_elements: usize) -> Result<Self> {
        Self::new(n_elements, Self::HALF_WAVELENGTH)
    }

    pub fn n_elements(&self) -> usize {
        self.n_elements
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Aperture used by the far-field check: `n_elements * spacing`.
    pub fn aperture(&self) -> f64 {
        self.n_elements as f64 * self.spacing
    }
}

/// Relative placement of a node's transmit and receive arrays.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayPlacement {
    tx: Ula,
    rx: Ula,
    d: f64,
    omega: f64,
}

impl ArrayPlacement {
    /// `omega` is wrapped into `[0, 2π)`.
    pub fn new(tx: Ula, rx: Ula, d: f64, omega: f64) -> Result<Self> {
        if !(d > 0.0 && d.is_finite()) {
            return Err(Error::invalid("d", format!("must be positive, got {d}")));
        }
        if !omega.is_finite() {
            return Err(Error::invalid("omega", "must be finite"));
        }
        let mut omega = omega.rem_euclid(TAU);
        if omega >= TAU {
            omega = 0.0;
        }
        Ok(Self { tx, rx, d, omega })
    }

    pub fn tx(&self) -> Ula {
        self.tx
    }

    pub fn rx(&self) -> Ula {
        self.rx
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn with_omega(&self, omega: f64) -> Result<Self> {
        Self::new(self.tx, self.rx, self.d, omega)
    }

    pub fn with_d(&self, d: f64) -> Result<Self> {
        Self::new(self.tx, self.rx, d, self.omega)
    }

    /// `r[n][m]`: distance from transmit element `m` to receive element `n`.
    pub fn distances(&self) -> Vec<Vec<f64>> {
        let tx = element_positions(self, Side::Tx);
        element_positions(self, Side::Rx)
            .iter()
            .map(|r| {
                tx.iter()
                    .map(|t| (r[0] - t[0]).hypot(r[1] - t[1]))
                    .collect()
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Tx,
    Rx,
}

/// Cosine-domain steering angle, `|value| <= 1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct SteeringAngle(pub(crate) f64);

impl SteeringAngle {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value.abs() <= 1.0 {
            Ok(Self(value))
        } else {
            Err(Error::invalid(
                "steering angle",
                format!("|{value}| exceeds 1"),
            ))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// `a(n, Ω)`: element `k` is `exp(jπkΩ)/√n`.
pub fn steering_vector(n: usize, omega: SteeringAngle) -> Result<CVector> {
    if n == 0 {
        return Err(Error::invalid(
            "n",
            "steering vector needs at least one element",
        ));
    }
    Ok(steer(n, omega.0))
}

/// Unchecked steering vector for internal grid sweeps.
pub(crate) fn steer(n: usize, omega: f64) -> CVector {
    let amp = 1.0 / (n as f64).sqrt();
    CVector::from_fn(n, |k, _| C64::from_polar(amp, PI * k as f64 * omega))
}

pub fn element_positions(p: &ArrayPlacement, side: Side) -> Vec<[f64; 2]> {
    match side {
        Side::Tx => (0..p.tx.n_elements)
            .map(|m| [m as f64 * p.tx.spacing, 0.0])
            .collect(),
        Side::Rx => {
            let (s, c) = p.omega.sin_cos();
            (0..p.rx.n_elements)
                .map(|n| {
                    let t = n as f64 * p.rx.spacing;
                    [t * c, p.d + t * s]
                })
                .collect()
        }
    }
}

/// Fraunhofer condition `r >= 2 D^2` in wavelength units (boundary inclusive).
pub fn far_field_ok(r: f64, aperture_d: f64) -> bool {
    r >= 2.0 * aperture_d * aperture_d
}

/// Uniform cosine grid on `[-1, 1)`: `-1 + 2i/g`.
pub fn cosine_grid(g: usize) -> Vec<f64> {
    (0..g).map(|i| -1.0 + 2.0 * i as f64 / g as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    fn angle(x: f64) -> SteeringAngle {
        SteeringAngle::new(x).unwrap()
    }

    #[test]
    fn broadside_two_element() {
        let a = steering_vector(2, angle(0.0)).unwrap();
        let h = 1.0 / 2f64.sqrt();
        assert!((a[0] - C64::new(h, 0.0)).norm() < 1e-15);
        assert!((a[1] - C64::new(h, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn endfire_alternates_sign() {
        let a = steering_vector(4, angle(1.0)).unwrap();
        for (k, z) in a.iter().enumerate() {
            let want = if k % 2 == 0 { 0.5 } else { -0.5 };
            assert!((z - C64::new(want, 0.0)).norm() < 1e-15, "k={k} {z}");
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(steering_vector(0, angle(0.0)).is_err());
        assert!(SteeringAngle::new(1.0 + 1e-9).is_err());
        assert!(SteeringAngle::new(f64::NAN).is_err());
        assert!(Ula::new(0, 0.5).is_err());
        assert!(Ula::new(4, 0.0).is_err());
        let u = Ula::half_wavelength(4).unwrap();
        assert!(ArrayPlacement::new(u, u, 0.0, 0.0).is_err());
    }

    #[test]
    fn unit_norm_over_sizes_and_grid() {
        let grid = cosine_grid(1024);
        for n in [1usize, 2, 3, 7, 8, 16, 31, 64, 255, 1024] {
            for &w in &grid {
                let a = steer(n, w);
                assert!((a.norm() - 1.0).abs() < 1e-12, "n={n} w={w}");
            }
        }
        for n in 1..=1024 {
            assert!((steer(n, 0.37).norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn placement_convention() {
        let tx = Ula::half_wavelength(4).unwrap();
        let rx = Ula::half_wavelength(4).unwrap();
        let p = ArrayPlacement::new(tx, rx, 5.0, FRAC_PI_2).unwrap();
        assert_eq!(element_positions(&p, Side::Tx)[0], [0.0, 0.0]);
        assert_eq!(element_positions(&p, Side::Rx)[0], [0.0, 5.0]);
        let r2 = element_positions(&p, Side::Rx)[2];
        assert!(r2[0].abs() < 1e-15 && (r2[1] - 6.0).abs() < 1e-15);
        let q = ArrayPlacement::new(tx, rx, 5.0, 0.0).unwrap();
        let r2 = element_positions(&q, Side::Rx)[2];
        assert_eq!(r2, [1.0, 5.0]);
    }

    #[test]
    fn omega_wraps_into_range() {
        let u = Ula::half_wavelength(2).unwrap();
        let p = ArrayPlacement::new(u, u, 1.0, -FRAC_PI_2).unwrap();
        assert!((p.omega() - 3.0 * FRAC_PI_2).abs() < 1e-12);
        let q = ArrayPlacement::new(u, u, 1.0, TAU).unwrap();
        assert_eq!(q.omega(), 0.0);
    }

    #[test]
    fn parallel_identical_arrays_have_symmetric_distances() {
        let u = Ula::half_wavelength(6).unwrap();
        let p = ArrayPlacement::new(u, u, 2.5, 0.0).unwrap();
        let r = p.distances();
        for (n, row) in r.iter().enumerate() {
            for (m, v) in row.iter().enumerate() {
                assert!((v - r[m][n]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn far_field_worked_example() {
        let aperture = Ula::half_wavelength(32).unwrap().aperture();
        assert_eq!(aperture, 16.0);
        // 2 * 16^2 = 512 wavelengths.
        assert!(far_field_ok(1024.0, aperture));
        assert!(far_field_ok(512.0, aperture));
        assert!(!far_field_ok(511.9, aperture));
        assert!(far_field_ok(0.0, 0.0));
        assert!(far_field_ok(2.0, 1.0));
    }

    proptest! {
        #[test]
        fn conjugate_symmetry(n in 1usize..128, w in -1.0f64..=1.0) {
            let a = steer(n, w);
            let b = steer(n, -w);
            for (x, y) in a.iter().zip(b.iter()) {
                prop_assert!((x.conj() - y).norm() < 1e-12);
            }
        }

        #[test]
        fn far_field_monotone(r in 0.0f64..5000.0, dr in 0.0f64..100.0, a in 0.0f64..50.0, da in 0.0f64..5.0) {
            if far_field_ok(r, a) {
                prop_assert!(far_field_ok(r + dr, a));
            }
            if !far_field_ok(r, a) {
                prop_assert!(!far_field_ok(r, a + da));
            }
        }
    }
}
