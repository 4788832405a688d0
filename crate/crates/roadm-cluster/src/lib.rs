//! Simulator and analytic toolkit for high-degree three-stage ROADM cluster
//! nodes and the elastic optical networks they serve.
//!
//! The crate is organised around four layers:
//!
//! - [`topology`]: construction and classification of cluster-node fabrics
//!   (line / interconnect / add-drop chassis wired as a three-stage Clos).
//! - [`lee`]: the closed-form link-occupancy blocking model and its
//!   load-averaged variants.
//! - [`fullload`]: seeded Monte Carlo full-load simulation of the
//!   per-wavelength fabric with order-based (first-fit) middle-stage
//!   selection, plus an exact rearrangement oracle for small instances.
//! - [`eon`]: flex-grid spectrum model — spectral-width presets, multi-flow
//!   splitting, first-fit slot allocation, and the elastic-vs-fixed carried
//!   traffic comparison.
//!
//! All randomness is ChaCha8 seeded from caller-supplied seeds; every result
//! is reproducible independently of worker-thread count.

pub mod eon;
pub mod fullload;
pub mod lee;
pub mod topology;

pub use eon::{SpectrumGrid, WidthMode};
pub use fullload::{ConnectionRequest, Endpoint, SimConfig, SimResult};
pub use lee::{lee_blocking, link_occupancy};
pub use topology::{ClusterConfig, ClusterTopology, InterconnectPattern, NonblockingClass};
