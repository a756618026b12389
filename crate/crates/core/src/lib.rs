//! Hard coreference resolution with Predicate Schemas knowledge.
//!
//! Pipeline: [`kb`] builds count stores from raw text, [`scoring`] turns a
//! mention pair into an 18-dim knowledge vector, [`model`] trains a
//! best-link mention-pair model, [`infer`] decodes with or without
//! knowledge constraints and [`eval`] scores the output.

pub mod docmodel;
pub mod error;
pub mod eval;
pub mod extract;
pub mod fixtures;
pub mod infer;
pub mod kb;
pub mod lexicon;
pub mod model;
pub mod scoring;

#[cfg(test)]
mod testutil;

pub use docmodel::{dataset_stats, load_corpus, save_corpus, Category, Document, StatsReport};
pub use error::{Error, Result};
pub use eval::{evaluate, Metric, MetricReport};
pub use infer::{run_system, LinkAssignment, Prediction, SystemConfig, Variant};
pub use kb::KnowledgeBase;
pub use model::{train_blmp, ModelWeights, TrainConfig};
pub use scoring::{KnowledgeView, ScoreVector};
