//! File formats, Monte Carlo experiments and rolling-window screening for
//! distance-correlation independence tests.
//!
//! Numerical kernels live in [`hddcor_core`]; this crate adds sampling,
//! threading, CSV/JSON/TOML IO and the `hddcor` command-line front end.

#![warn(missing_docs)]

pub mod cli;
mod error;
pub mod experiment;
pub mod io;
pub mod pipeline;
pub mod simulate;

pub use error::{Error, Result};
pub use hddcor_core as core;

/// Serde adapter storing a [`hddcor_core::calibration::Method`] by its
/// command-line name.
pub mod method_name {
    use hddcor_core::calibration::Method;
    use serde::{de, Deserialize, Deserializer, Serializer};

    /// Serializes the method name.
    pub fn serialize<S: Serializer>(m: &Method, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(m.name())
    }

    /// Parses a method name.
    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Method, D::Error> {
        let s = String::deserialize(d)?;
        s.parse()
            .map_err(|_| de::Error::custom(format!("unknown method `{s}`")))
    }

    /// Same for a list of methods.
    pub mod list {
        use super::*;
        use serde::ser::SerializeSeq;

        /// Serializes method names.
        pub fn serialize<S: Serializer>(ms: &[Method], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(ms.len()))?;
            for m in ms {
                seq.serialize_element(m.name())?;
            }
            seq.end()
        }

        /// Parses method names.
        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Method>, D::Error> {
            Vec::<String>::deserialize(d)?
                .iter()
                .map(|s| {
                    s.parse()
                        .map_err(|_| de::Error::custom(format!("unknown method `{s}`")))
                })
                .collect()
        }
    }
}
