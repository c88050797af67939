//! Deterministic building blocks for evolving quadruped gait controllers
//! under morphological development.
//!
//! Everything in this crate is `no_std + alloc` and fully deterministic:
//! the same inputs produce bit-identical outputs on a given platform. All
//! transcendental float math goes through [`libm`] so results do not depend
//! on the platform's libm, and all randomness flows from explicit seeds
//! through [`rng`].
//!
//! The crate deliberately contains no IO, threads or clocks; the companion
//! `morphodev-lab` crate layers experiment orchestration, file formats and
//! the command line on top.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod controller;
pub mod development;
pub mod math;
pub mod neat;
pub mod physics;
pub mod quadruped;
pub mod rng;
pub mod stats;
