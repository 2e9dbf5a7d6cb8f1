//! Verification workbench for systems of communicating state machines with
//! FIFO event pools.

pub mod dsl;
pub mod explorer;
pub mod expr;
pub mod kernel;
pub mod lts;
pub mod models;
pub mod render;
pub mod session;
pub mod system;
pub mod transpile;
pub mod view;
