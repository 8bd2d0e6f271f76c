//! Closed-loop sensing, communication, computing and control (SC3) model for
//! direct-to-cell satellite links.
//!
//! The crate evaluates one control cycle end to end (uplink, on-board
//! compute, downlink, propagation), maps the delivered command bits onto a
//! rate-limited LQR cost, and allocates bandwidth, downlink power and compute
//! frequency under task-oriented and link-level objectives.

pub mod control;
pub mod exec;
pub mod linkgeom;
pub mod optimize;
pub mod pipeline;
pub mod report;
pub mod scenario;
pub mod units;
