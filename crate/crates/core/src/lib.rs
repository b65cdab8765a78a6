#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod kernels;
pub mod ode;
pub mod params;
pub mod pulses;
pub mod quadrature;
pub mod dynamics;
pub mod gaussian;
pub mod correlations;
pub mod scattering;
pub mod config;
pub mod output;
pub mod svg;
pub mod sweep;
pub mod recipes;
pub mod cli;
