//! Grid universes, entity records, compatibility and the initial state.

mod attr;
mod entities;
mod init;
pub mod signature;
mod view;

pub use attr::{compatible, compatible_capacity, compatible_keyword, Attr, AttrError};
pub use entities::*;
pub use init::*;
pub use view::View;
