//! Spectral simulation and successive-approximation solution of the
//! stochastic diffusive energy balance model
//!
//! ```text
//! du - d/dx((1 - x^2) du/dx) dt + g(u) dt = Q S(x) beta(u - u_c) (dt + eps dW)
//! ```
//!
//! on `x in (-1, 1)` (sine of latitude), driven by a cylindrical Wiener
//! process expanded in the Legendre eigenbasis of the diffusion.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coalbedo;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod exec;
pub mod harness;
pub mod ice;
pub mod io;
pub mod legendre;
pub mod noise;
pub mod osgood;
pub mod picard;
pub mod quad;
pub mod stats;
pub mod verify;

pub use error::{Error, Result};
