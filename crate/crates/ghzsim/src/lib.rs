//! Command-line front end for the GHZ measurement simulator.

pub mod cli;
pub mod commands;
pub mod render;
