//! Built-in benchmark instances.

use crate::error::{Error, Result};
use crate::pl::PlInstance;

pub const ENVIRONMENTS: [&str; 4] = ["geo8", "arith10", "har20", "arith50"];

/// Weights of a named benchmark instance, best item first.
pub fn environment(name: &str) -> Result<PlInstance> {
    let weights: Vec<f64> = match name {
        // ratio 0.875 between neighbours
        "geo8" => (0..8).map(|i| 0.875f64.powi(i)).collect(),
        // steps of 0.1 from 1.0 down to 0.1
        "arith10" => (0..10).map(|i| (10 - i) as f64 / 10.0).collect(),
        "har20" => (1..=20).map(|i| 1.0 / i as f64).collect(),
        // steps of 0.02 from 1.0 down to 0.02
        "arith50" => (0..50).map(|i| (50 - i) as f64 / 50.0).collect(),
        _ => return Err(Error::UnknownEnvironment(name.to_string())),
    };
    PlInstance::new(weights)
}
