//! Pseudo-spectral laboratory for the Yang–Mills–Higgs system in Lorenz
//! gauge on the periodic 3-torus.

pub mod algebra;
pub mod cli;
pub mod data;
pub mod diagnose;
pub mod error;
pub mod evolve;
pub mod fft;
pub mod grid;
pub mod normlab;
pub mod nullform;
pub mod snapshot;
pub mod system;

pub use error::{Result, YmhError};
