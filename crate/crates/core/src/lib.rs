//! Build auxiliary training data for app-review intent classifiers from
//! labeled issue-tracker data.
//!
//! The crate is organised as a sequence of stages that each consume the
//! output of the previous one:
//!
//! 1. [`ingestion`] loads (or fetches) repositories, issues and issue
//!    templates and drops repositories with too few labeled issues.
//! 2. [`label_norm`] normalizes free-form issue labels and maps them to an
//!    [`IntentClass`] through an editable lexicon.
//! 3. [`extraction`] splits issue bodies into titled sections and picks the
//!    one section that reads like a user review.
//! 4. [`textprep`] turns extracted text, titles and reviews into token lists.
//! 5. [`similarity`] ranks repositories by tf-idf cosine similarity of their
//!    ReadMe/About profiles.
//! 6. [`augmentation`] merges a labeled review dataset with a sample of
//!    processed issues.
//! 7. [`classifier`] trains and cross-validates binary logistic-regression
//!    classifiers to measure the effect.
//!
//! [`pipeline`] composes all stages behind a single JSON configuration.

pub mod augmentation;
pub mod classifier;
pub mod extraction;
pub mod ingestion;
pub mod intent;
pub mod label_norm;
pub mod pipeline;
pub mod similarity;
pub mod stem;
pub mod textprep;

mod jsonl;
mod rng;

pub use intent::{IntentClass, IntentSet};
pub use jsonl::JsonlError;
