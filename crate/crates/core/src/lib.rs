//! fpforge: a compiler and cycle-accurate simulator for spatial filter
//! pipelines built on parameterizable floating-point arithmetic.
//!
//! The crate is organised around the toolchain stages:
//!
//! * [`formats`] — custom float/fixed representations and conversions
//! * [`arith`] — bit-accurate adder, multiplier, shifters, compare-and-swap
//! * [`polyapprox`] — piecewise polynomial approximation and the
//!   division/log2/exp2/sqrt datapaths built on it
//! * [`dfg`] — dataflow IR, latency model, pipeline scheduler, and
//!   structural builders (adder trees, sorting networks)
//! * [`dsl`] — lexer/parser/analysis for the filter DSL and lowering to IR
//! * [`backend`] — netlist emission, HDL rendering, resource estimates
//! * [`sim`] — raster-stream cycle simulation with line-buffered window
//!   generation and border handling
//! * [`filters`] — the shipped filter corpus plus untimed software oracles

pub mod arith;
pub mod backend;
pub mod dfg;
pub mod dsl;
pub mod filters;
pub mod formats;
pub mod polyapprox;
pub mod sim;
