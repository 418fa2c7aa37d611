//! File formats read and written by the pipeline.

pub mod od_csv;
pub mod records;
pub mod stops;
pub mod zones;
