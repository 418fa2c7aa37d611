//! Door-to-door itinerary reconstruction and multi-modal mobility analytics.
//!
//! The crate is `no_std` with `alloc`. It works on in-memory legs, trip chains
//! and itineraries: collating raw leg records, repairing spurious same-vehicle
//! splits, and computing spatial, temporal, origin-destination and public
//! transport transfer statistics. A seeded synthetic generator produces
//! sensed leg records together with their ground truth.
//!
//! File formats, parallel drivers and the command line live in the `mobsense`
//! crate.

#![no_std]
// `!(x > 0.0)` is used deliberately so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(any(feature = "std", test))]
extern crate std;

pub mod cleaning;
pub mod demand;
pub mod error;
pub mod geo;
pub mod ingest;
pub mod model;
pub mod od;
pub mod stats;
pub mod synth;
pub mod transfer;

pub use error::{Error, Result};
pub use model::{
    Category, Day, DayType, GridCell, Itinerary, Leg, Mode, PrivateLeg, PtLeg, ReportGroup, StopRef, Timestamp,
    TripChain,
};
