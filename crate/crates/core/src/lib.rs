//! Segmenting and visualizing complaint corpora with hexagonal self-organizing
//! maps trained on TF/TF-IDF document vectors.
//!
//! The pipeline runs in stages: [`corpus`] turns JSONL complaints into a
//! normalized document-term matrix, [`som`] sizes, initializes and trains a
//! map serially, [`parallel`] trains the same map on a worker pool, [`viz`]
//! colors and renders the result, and [`bench`] measures the engines.

pub mod corpus;
pub mod error;
pub mod bench;
pub mod parallel;
pub mod som;
pub mod viz;

pub use error::{Result, SomError};
