pub mod abelian;
pub mod error;
pub mod fitting;
pub mod group_ring;
pub mod harness;
pub mod ideal;
pub mod ritter_weiss;
pub mod stickelberger;
pub mod tower;

pub use error::{Error, Result};
