//! Minsky machines, their encoding into a 3-variable superintuitionistic
//! calculus, the refuting Kripke model, and an Int decision procedure used to
//! check every step of the construction on finite truncations.

pub mod encoding;
pub mod formula;
pub mod harness;
pub mod ipc;
pub mod kripke;
pub mod minsky;
pub mod paper_model;

pub use formula::{Formula, Kind, Substitution};
pub use ipc::ProverVerdict;
pub use kripke::{KripkeFrame, KripkeModel};
pub use minsky::{Configuration, Instruction, MinskyMachine};
