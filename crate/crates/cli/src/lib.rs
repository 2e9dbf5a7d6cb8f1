//! Command line and HTTP service for the csmbench workbench.

pub mod cli;
pub mod report;
pub mod service;
