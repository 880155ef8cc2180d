pub mod action;
pub mod agents;
pub mod cli;
pub mod engine;
pub mod error;
pub mod hex;
pub mod protocol;
pub mod rating;
pub mod rng;
pub mod rules;
pub mod scenario;
pub mod world;
