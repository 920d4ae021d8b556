//! Blade cutting forces from the fundamental equation of earthmoving on
//! sloped terrain.
//!
//! The crate is organized bottom-up:
//!
//! - [`soil`]: strength parameters, compaction state and void-ratio tables.
//! - [`wedge`]: N-factors, the optimal failure angle, the force per unit
//!   width and its components, friction smoothing and the singular fallback.
//! - [`terrain`]: heightfield sampling and weighted least-squares slope
//!   estimation ahead of the blade.
//! - [`sim`]: the stepped blade pass with filtering, stabilization
//!   heuristics, carving and surcharge accounting.
//!
//! ```
//! use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
//! use fee::soil::SoilStrength;
//! use fee::wedge::{fee_force, CutGeometry};
//!
//! let geom = CutGeometry::new(1.0, 0.0, FRAC_PI_2, 1.0)?;
//! let sand = SoilStrength::new(0.0, 0.0, 0.0, 0.0)?;
//! let f = fee_force(&geom, FRAC_PI_4, &sand, 9810.0, 0.0, 1.0)?;
//! assert!((f - 4905.0).abs() < 1e-9);
//! # Ok::<(), fee::Error>(())
//! ```

// `!(x > 0.0)` style checks also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod optim;
pub mod sim;
pub mod soil;
pub mod terrain;
pub mod wedge;

pub use error::{Error, Result};

// Book chapters are compiled as doctests so their snippets stay in sync.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/soil.md")]
    mod soil {}
    #[doc = include_str!("../../../book/src/wedge.md")]
    mod wedge {}
    #[doc = include_str!("../../../book/src/failure_angle.md")]
    mod failure_angle {}
    #[doc = include_str!("../../../book/src/terrain.md")]
    mod terrain {}
    #[doc = include_str!("../../../book/src/simulator.md")]
    mod simulator {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../README.md")]
    mod readme {}
}
