//! Brute-force and closed-form oracles, written independently of the
//! implementations they check.

pub mod crf;
pub mod hmm;
pub mod mad;
pub mod neural;
pub mod projection;
pub mod stats;
