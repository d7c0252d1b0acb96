//! Two-photon interferometry with directionally-unbiased Grover four-ports.
//!
//! * [`fock`]: sparse few-photon states and their evolution through linear
//!   mode maps.
//! * [`elements`]: Grover four-port, phase plates and beam splitters.
//! * [`interferometers`]: tunable HOM, Grover–Mach–Zehnder and the
//!   beam-splitter baseline, both simulated and in closed form.
//! * [`spectral`]: finite-bandwidth coincidence probability and delay scans.
//! * [`inversion`]: phase retrieval from measured coincidence rates.
//! * [`sagnac`]: three-axis rotation sensing with the Grover–Sagnac layout.

pub mod elements;
pub mod fock;
pub mod interferometers;
pub mod inversion;
pub mod sagnac;
pub mod spectral;

pub use fock::{FockState, ModeMap, StateVector};
pub use interferometers::{CoincidenceRates, DetectionDistribution, PhaseConfig};
