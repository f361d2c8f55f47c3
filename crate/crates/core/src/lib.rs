pub mod asm;
pub mod brokering;
pub mod model;
pub mod rules;
pub mod scenario;
pub mod sim;
