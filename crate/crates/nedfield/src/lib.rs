pub mod bounds;
pub mod config;
pub mod estimators;
pub mod experiments;
pub mod fields;
pub mod geometry;
pub mod output;
pub mod parallel;
pub mod rng;
