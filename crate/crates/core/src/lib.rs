//! Link-level simulation of full-duplex millimeter-wave links.
//!
//! The crate synthesizes near-field self-interference (SI) channels between
//! co-located transmit/receive uniform linear arrays, sparse far-field
//! communication channels, and evaluates constant-amplitude (phase-only)
//! beamforming schemes that trade array gain against SI suppression.
//!
//! Module map:
//!
//! * [`geometry`]: array geometry, steering vectors, far-field checks.
//! * [`channel`]: LOS/NLOS SI channels, sparse communication channels, gain maps.
//! * [`beamforming`]: CA projection and decomposition, MF/ZF, beam steering,
//!   angle search and ZF-MF.
//! * [`fdlink`]: point-to-point full-duplex link metrics and sweeps.
//! * [`multiuser`]: hybrid precoding for a full-duplex base station.
//! * [`verify`]: reusable experiment checks shared by the CLI and the
//!   acceptance tests.
//!
//! All lengths are expressed in carrier wavelengths.

pub mod beamforming;
pub mod channel;
mod error;
pub mod fdlink;
pub mod geometry;
pub mod linalg;
pub mod multiuser;
pub mod seed;
pub mod sweep;
pub mod verify;

pub use error::{Error, Result};

/// Complex sample type used throughout the crate.
pub type C64 = num_complex::Complex<f64>;
/// Dense complex column vector.
pub type CVector = nalgebra::DVector<C64>;
/// Dense complex matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;

/// Library version recorded in output headers.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
