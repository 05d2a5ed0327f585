//! Holonomies of the Wilczek–Zee connection over Kendall's shape sphere of
//! triangles.

#![allow(clippy::needless_range_loop)]

pub mod connection;
pub mod demonstrator;
pub mod error;
pub mod gates;
pub mod holonomy;
pub mod linking;
pub mod shapespace;
pub mod su2;
pub mod trimer;

pub use connection::{BlochField, ConnectionSample, ControlField, GaugePatch};
pub use demonstrator::{ErrorBudget, PlatformParams};
pub use error::{Error, Result};
pub use gates::{GateSpec, TwoQubitGate};
pub use holonomy::{HolonomyLoop, TraceExpansion, WilsonLine};
pub use linking::{LinkData, SpaceCurve};
pub use shapespace::{ShapeLoop, ShapePoint, Tangent, TriangleConfig};
pub use trimer::{BondDrive, TrimerTrajectory};
