//! Lattice toolkit for one-dimensional supersymmetric quantum mechanics.

pub mod cli;
pub mod eigen;
pub mod entangle;
pub mod jcmodel;
pub mod lattice;
pub mod parser;
pub mod superselect;
pub mod susy;
