pub mod ambiguity;
pub mod document;
pub mod error;
pub mod fuzzy;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod problems;
pub mod reform;
pub mod solver;
pub mod sweep;
pub mod verify;

pub use error::{Error, Result};
