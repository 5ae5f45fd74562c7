//! Routing-chain simulation and analytics for large-scale wireless ad-hoc networks.
//!
//! A routing path is modeled as a chain of fixed-length hops between a source
//! and a destination node. This crate samples such chains under three routing
//! strategies — random (RRS), directed (DRS), and optimal (ORS) — evaluates the
//! matching closed-form end-to-end distributions and moments, estimates
//! persistence and effective radii from data, and runs graph-level scaling
//! experiments on random geometric deployments.
//!
//! Module map:
//!
//! * [`pathmodel`] — chain types and the three strategy samplers (2D/3D),
//!   with deterministic counter-based RNG streams.
//! * [`analytics`] — closed-form densities, the angular propagator, and
//!   moment formulas; the analytic oracle the samplers are tested against.
//! * [`estimation`] — histograms, bootstrap moments, persistence-radius
//!   recovery, critical-exponent fits, and two-sample KS tests.
//! * [`netsim`] — random geometric deployments, graph routing strategies,
//!   path-length scaling, and relay-load transport capacity.
//!
//! All sampling is pure given an explicit RNG stream; ensembles generated in
//! parallel are bit-identical to serial runs regardless of thread count.

pub mod analytics;
pub mod estimation;
pub mod netsim;
pub mod numeric;
pub mod pathmodel;
pub mod rng;
