//! Quantum-inspired minority oversampling (QSMOTE), single-qubit Kraus noise
//! channels used as feature corruption, and a cross-validated classical
//! evaluation harness.

pub mod channels;
pub mod cluster;
pub mod dataset;
pub mod eval;
pub mod learn;
pub mod oversample;
pub mod qsim;
pub mod seeding;
pub mod swaptest;

pub use dataset::LabeledDataset;
