//! Area protection on grid maps and graphs: attacker and defender teams,
//! single-stage target allocation, simulation and exact solving.

pub mod allocate;
pub mod bench;
pub mod board;
pub mod engine;
pub mod exactsolve;
pub mod gridmap;
pub mod instgen;
pub mod model;
pub mod pathfind;
pub mod qbfreduce;
