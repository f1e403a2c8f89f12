//! Matrix Market IO, pole-plan parsing and experiment drivers on top of
//! `ku-core`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod experiments;
pub mod mm;
pub mod plans;
pub mod synth;
