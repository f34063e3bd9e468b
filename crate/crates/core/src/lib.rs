//! Dynamic PEM fuel cell system model.

pub mod bop;
pub mod config;
pub mod derived;
pub mod error;
pub mod init;
pub mod layout;
pub mod mea;
pub mod model;
pub mod params;
pub mod profile;
pub mod transport;
pub mod voltage;

pub use config::{ModelConfig, Numerics};
pub use derived::{derive, DerivedQuantities};
pub use error::{ModelError, Result};
pub use init::{initial_blocks, initialize_state};
pub use layout::{BopSlot, BopState, DiscretizationLayout, Quantity, StateBlocks, N_BOP};
pub use model::{Evaluation, FuelCellModel, ModelOptions};
pub use params::{OperatingConditions, ParameterSet};
pub use profile::CurrentProfile;
