pub mod bvp;
pub mod error;
pub mod kernels;
pub mod normalize;
pub mod one_dim;
pub mod oracle;
pub mod quadrature;
pub mod trajectory;
pub mod vector;
pub mod verify;

pub use error::{Error, Result};
pub use vector::Vector2;
