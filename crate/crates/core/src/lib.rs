//! Spatial search by continuous-time quantum walk on random graphs.
//!
//! The crate generates Erdős–Rényi, random regular and complete graphs,
//! computes their adjacency spectra, evolves the search Hamiltonian
//! `H = -|w><w| - gamma A` and measures how quickly the walk localizes on the
//! marked vertex. The same machinery drives two communication protocols on
//! random networks: single-excitation state transfer between two nodes and
//! Bell-pair generation between two nodes mediated by a third.
//!
//! Ensembles and time grids run on rayon when the `parallel` feature is
//! enabled (the default); see [`par::Execution`].

pub mod dynamics;
pub mod ensemble;
pub mod error;
pub mod experiments;
pub mod graph;
pub mod io;
pub mod par;
pub mod protocols;
pub mod search;
pub mod spectra;

pub use error::{Error, Result};
