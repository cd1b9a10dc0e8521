//! Sparse multimode Fock-state simulation of post-selected linear-optical
//! circuits, with a two-photon polarization filter built on top.
//!
//! States live in [`fock::FockState`] as sparse maps from occupation vectors
//! to complex amplitudes. Circuits ([`circuit::Circuit`]) are ordered lists of
//! beam splitters, phases, routings, ancilla injections and detector
//! post-selections, and run either on pure states (ideal detectors) or on
//! [`detection::Ensemble`]s (lossy detectors).

pub mod analysis;
pub mod circuit;
pub mod cli;
pub mod detection;
pub mod error;
pub mod fock;
pub mod optics;
pub mod polarization;
pub mod scenarios;

pub use error::{Error, Result};
