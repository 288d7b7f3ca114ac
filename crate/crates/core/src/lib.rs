//! Spatially consistent air-to-ground channel simulation.
//!
//! A ground user walks a straight street of a synthetic Manhattan-grid city
//! while an aerial base station (ABS) hovers somewhere above it. The crate
//! generates
//!
//! * LOS/NLOS segment traces along the path, either from a closed-form
//!   per-block blocking probability ([`segmenter`]) or from explicit
//!   geometry ([`oracle`]),
//! * large-scale attenuation traces with spatially correlated shadow
//!   fading ([`channel`]),
//! * outage probabilities and outage-run statistics ([`outage`]),
//!
//! and drives seeded Monte Carlo campaigns over all of it ([`campaign`]).
//!
//! ```
//! use a2g_channel::{campaign::Environment, geometry::*, segmenter::*};
//! use rand::SeedableRng;
//!
//! let params = Environment::Urban.params();
//! let path = build_path(1000.0, 0.3, params.street_width, params.building_width)?;
//! let abs = AbsPlacement::new(400.0, 650.0, 120.0)?;
//! let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
//! let trace = generate_segments(&params, &abs, &path, &mut rng)?.merged();
//! let total: f64 = trace.segments().iter().map(|s| s.length).sum();
//! assert!((total - 1000.0).abs() < 1e-6);
//! # Ok::<(), a2g_channel::Error>(())
//! ```

pub mod campaign;
pub mod channel;
pub mod config;
mod error;
pub mod geometry;
pub mod io;
pub mod los_model;
pub mod oracle;
pub mod outage;
pub mod rng;
pub mod segmenter;
pub mod stats;

pub use error::{Error, Result};
pub use geometry::{AbsPlacement, EnvironmentParams, GridLayout, LinkAngles, Point2, UePath};
pub use segmenter::{LinkState, LosSegment, LosTrace};

// The guide's code blocks are compiled and run as doc-tests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub struct Introduction;
    #[doc = include_str!("../../../book/src/city.md")]
    pub struct City;
    #[doc = include_str!("../../../book/src/los_probability.md")]
    pub struct LosProbability;
    #[doc = include_str!("../../../book/src/segmentation.md")]
    pub struct Segmentation;
    #[doc = include_str!("../../../book/src/geometric_oracle.md")]
    pub struct GeometricOracle;
    #[doc = include_str!("../../../book/src/channel.md")]
    pub struct Channel;
    #[doc = include_str!("../../../book/src/outage.md")]
    pub struct Outage;
    #[doc = include_str!("../../../book/src/campaigns.md")]
    pub struct Campaigns;
}
