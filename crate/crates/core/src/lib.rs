// SPDX-License-Identifier: Apache-2.0

//! Evolutionary design of MUX-based logic locking.
//!
//! The crate is organised as a pipeline:
//!
//! * [`netlist`] parses, writes, analyses and simulates combinational
//!   `.bench` netlists.
//! * [`lock`] encodes a locking as a [`Genotype`] of key-controlled MUX pairs
//!   and materialises it into a [`LockedNetlist`].
//! * [`attack`] is a self-supervised structural link-prediction attack that
//!   recovers key bits from the circuit graph alone.
//! * [`ga`] evolves genotypes to minimise that attack's accuracy.
//! * [`equiv`] checks that the correct key preserves function and measures
//!   wrong-key corruption.
//!
//! The numerical parts of the attack are generic over [`Real`] (`f32` or
//! `f64`); the aliases at the crate root fix the scalar to `f64`, which is what
//! the optimiser and the command-line tool use.

pub mod attack;
pub mod equiv;
pub mod ga;
pub mod lock;
pub mod netlist;
pub mod scalar;
pub mod seed;
pub mod synth;

pub use equiv::{EquivError, EquivMode, EquivReport};
pub use ga::{GaConfig, GaError, GaRun, Individual, Termination};
pub use lock::{Gene, Genotype, LockError, LockedNetlist};
pub use netlist::{BitVector, GateKind, Netlist, NetlistError};
pub use scalar::Real;

/// Attack report with `f64` margins and aggregates.
pub type AttackReport = attack::AttackReport<f64>;
/// Logistic link classifier over `f64`.
pub type LinkClassifier = attack::LinkClassifier<f64>;
/// Link feature vector over `f64`.
pub type LinkFeatures = attack::LinkFeatures<f64>;
/// Attack configuration over `f64`.
pub type AttackConfig = attack::AttackConfig<f64>;
