//! Perception-augmented evaluation of vision-language models on abstract
//! visual reasoning tasks: dataset loading, model gateway, one- and
//! two-stage pipelines, scoring and error attribution.

pub mod attribution;
pub mod decimal;
pub mod digest;
pub mod fsutil;
pub mod gateway;
pub mod grid;
pub mod ingest;
pub mod offline;
pub mod perception;
pub mod pipeline;
pub mod task;
pub mod trace;
