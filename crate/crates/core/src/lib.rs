#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod fmht;
pub mod geometry;
pub mod graph;
pub mod homology;
pub mod oracle;
pub mod problem;
pub mod render;
pub mod replan;
pub mod result;
pub mod rrht;
pub mod run;
pub mod scenario;
pub mod steering;
