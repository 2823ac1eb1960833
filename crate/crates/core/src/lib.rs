//! Bootstrapping part-of-speech taggers for low-resource languages.

pub mod corpus;
pub mod crf;
pub mod dict;
pub mod harness;
pub mod metrics;
pub mod neural;
pub mod optim;
pub mod projection;
pub mod semisup;
pub mod synth;
