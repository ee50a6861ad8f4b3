//! Example-table reproduction, desk-scale random-coding experiments, and
//! constraint-set mass estimation.

mod coding;
mod constraint;
mod reproduce;

pub use coding::{
    random_coding_experiment, wilson95, CodebookSpec, CodingExperimentSpec, Decoder,
    ExperimentResult,
};
pub use constraint::{constraint_set_probability, ConstraintMassReport};
pub use reproduce::{reproduce_examples, rows_to_csv, ExampleRow};
