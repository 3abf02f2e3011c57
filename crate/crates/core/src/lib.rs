//! Multi-sensor drone detection, tracking and classification.
//!
//! The crate covers the whole offline pipeline: loading RF/DF and radar
//! streams ([`ingest`]), generating synthetic scenarios ([`synth`]),
//! preprocessing ([`prep`]), random forests ([`forest`]), evaluation
//! ([`metrics`]), RF signature analysis ([`rfanalysis`]) and the end-to-end
//! train/predict orchestration ([`pipeline`]).

pub mod error;
pub mod forest;
pub mod frame;
pub mod geo;
pub mod ingest;
pub mod metrics;
pub mod pipeline;
pub mod prep;
pub mod rfanalysis;
pub mod synth;
pub mod types;

pub use error::{Error, Result};
pub use frame::{Column, ColumnValues, FusedFrame, SensorTable, Target, Targets};
pub use types::{
    Airframe, DroneLogRecord, DroneSpec, DroneType, GeoPosition, SensorKind, SensorName,
    SensorReading, SensorSpec, Timestamp,
};
