//! Files bundled with the library.

/// The schema for the canonical script element set.
pub const DEFAULT_SCHEMA: &str = include_str!("../assets/schemas.yaml");

/// A minimal runnable script: one zone, five hosts, one VM, one cloudlet.
pub const SAMPLE_SCRIPT: &str = include_str!("../assets/sample.yaml");
