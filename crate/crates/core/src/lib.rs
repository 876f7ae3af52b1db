//! Cross-question method reuse.
//!
//! Methods are question/solution pairs kept in a [`MethodLibrary`]. Given a
//! new question, a [`ReuseEngine`] looks for a stored method whose solution
//! carries over: through a general/specific or parallel relationship
//! between scopes, through partial feature similarity with a relaxing
//! threshold, through hidden characteristics judged by a language model,
//! or by matching whole methods as templates. Model calls go through a
//! [`Gateway`] whose recorded backend makes every run reproducible.

pub mod cli;
pub mod error;
pub mod eval;
pub mod features;
pub mod gateway;
pub mod method_store;
pub mod mom;
pub mod reuse;
pub mod similarity;

pub use error::{Error, Result};
pub use features::{Encoder, FeatureSet, FeatureVector, HashingEncoder};
pub use gateway::{Backend, Gateway, Prompt};
pub use method_store::{Measurement, Method, MethodLibrary};
pub use reuse::{Query, ReuseConfig, ReuseEngine, ReuseOutcome, ReuseResult, SearchMode, Strategy};
pub use similarity::SimilarityWeights;
