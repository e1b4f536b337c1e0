//! Statistical model criticism for discrete Bayesian networks with latent
//! variables.
//!
//! Leave-one-out predictive distributions of each observable are scored
//! against data with three indices (Weaver's surprise index, Good's
//! logarithmic score and the ranked probability score). Node and global
//! means of those scores are then compared against bootstrap null bands
//! built from data simulated under the posited model.

pub mod corpus;
pub mod critic;
pub mod infer;
pub mod network;
pub mod sample;
pub mod score;
pub mod seed;
