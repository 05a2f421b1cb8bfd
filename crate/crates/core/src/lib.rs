//! Sound-speed metrology for water: a simulated dual-reflector time-of-flight
//! channel, its calibration against the pure-water reference curve,
//! uncertainty budgets and spec-sheet conformance, plus the attenuation,
//! scattering and turbidity calculations that sit alongside it.
//!
//! ```
//! use sonometrics::channel::{code_from_time, speed_from_code, ChannelGeometry};
//!
//! let geom = ChannelGeometry::default();
//! let (t1, t2) = geom.echo_delays(1482.0);
//! let code = code_from_time(t2 - t1, &geom).unwrap();
//! let c = speed_from_code(code, &geom).unwrap();
//! assert!((c - 1482.0).abs() < 5e-4);
//! ```

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod atten;
pub mod budget;
pub mod calib;
pub mod channel;
pub mod cli;
pub mod polyfit;
pub mod refmodel;
pub mod scatter;
pub mod turbidity;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub struct Introduction;
    #[doc = include_str!("../../../book/src/channel.md")]
    pub struct Channel;
    #[doc = include_str!("../../../book/src/calibration.md")]
    pub struct Calibration;
    #[doc = include_str!("../../../book/src/uncertainty.md")]
    pub struct Uncertainty;
    #[doc = include_str!("../../../book/src/attenuation.md")]
    pub struct Attenuation;
    #[doc = include_str!("../../../book/src/scattering.md")]
    pub struct Scattering;
    #[doc = include_str!("../../../book/src/turbidity.md")]
    pub struct Turbidity;
    #[doc = include_str!("../../../book/src/cli.md")]
    pub struct Cli;
}
