pub mod cli;
pub mod driving_path;
pub mod error;
pub mod levy_model;
pub mod mlmc;
pub mod oracle;
pub mod payoffs;
pub mod scheme;
pub mod stream;
