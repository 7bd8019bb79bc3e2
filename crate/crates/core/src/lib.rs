pub mod bst;
pub mod counterexample;
pub mod delaunay;
pub mod error;
pub mod general_position;
pub mod harness;
pub mod hull;
pub mod instance;
pub mod noise;
pub mod oracle;
pub mod params;
pub mod predicates;
pub mod sweep;
pub mod trapezoid;
pub mod walk;

pub use error::{Error, Result};
pub use params::Params;
