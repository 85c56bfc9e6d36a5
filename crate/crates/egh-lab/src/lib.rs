//! IO layer of the laboratory: JSON mirror types for the core data model
//! and self-describing run reports. The binary target wires these into the
//! command-line interface.

pub mod formats;
pub mod report;
