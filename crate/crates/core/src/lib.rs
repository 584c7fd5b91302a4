//! Gate-level laboratory for studying wear-out attacks on combinational
//! multipliers.
//!
//! The library models a small static-CMOS cell set (INV, NAND2, NOR2, XOR2,
//! MAJ3), builds array and Wallace multipliers out of half/full adders,
//! projects negative-bias temperature instability (NBTI) onto every PMOS
//! input pin from signal activity, and turns the resulting threshold-voltage
//! shifts into path delays. On top of that sits a greedy rewiring attack
//! that permutes commutative adder inputs to concentrate stress on already
//! critical paths, plus the measurement machinery: static and event-driven
//! timing, guard bands, Monte Carlo over process variation, fault tables and
//! a toy classifier whose multiplies are routed through the aged hardware.

pub mod activity;
pub mod aging;
pub mod attack;
pub mod circuit;
pub mod error;
pub mod fault;
pub mod fp;
pub mod inference;
pub mod mc;
pub mod rng;
pub mod runtime;
pub mod timing;

pub use error::{CoreError, Result};
