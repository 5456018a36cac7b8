pub mod error;
pub mod bench;
pub mod crb;
pub mod decomp;
pub mod extract;
pub mod linalg;
pub mod scenario;
pub mod special;
pub mod tensor;
pub mod txrx;

pub use error::{Error, Result};
