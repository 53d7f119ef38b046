//! Tensor and spinor calculus of the homogeneous nearly Kähler `S³×S³`.

pub mod cli;
pub mod clifford;
pub mod deform;
pub mod exterior;
pub mod homogeneous;
pub mod linalg;
pub mod opcalc;
pub mod par;
pub mod rarita;
pub mod report;
pub mod su3_model;
