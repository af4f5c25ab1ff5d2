//! Edgeworth and Cornish-Fisher expansions for smooth functions of sample
//! power means, exact or numeric, with bootstrap and Monte Carlo checks.

pub mod algebra;
pub mod bootstrap;
pub mod codegen;
pub mod config;
pub mod edgeworth;
pub mod expr;
pub mod harness;
pub mod moments;
pub mod rearrange;
