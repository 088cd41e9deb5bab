//! Energy- and potential-enstrophy-conserving shallow-water discretizations
//! on polygonal meshes.

pub mod cgrid;
pub mod conserve;
pub mod dec;
pub mod driver;
pub mod error;
pub mod hodge;
pub mod linalg;
pub mod mesh;
pub mod qflux;
pub mod verify;
pub mod zgrid;
mod textio;

pub use error::{Error, Result};
