pub mod continuum;
pub mod error;
pub mod experiments;
pub mod jumplaw;
pub mod lattice;
pub mod observables;
pub mod quad;
