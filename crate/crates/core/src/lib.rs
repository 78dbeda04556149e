pub mod assets;
pub mod cloud;
pub mod config;
pub mod kernel;
pub mod report;
pub mod schema;
pub mod translation;
