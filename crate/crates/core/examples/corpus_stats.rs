//! Generates a synthetic diglot corpus, validates it and prints statistics.

use glossa::corpus::{corpus_stats, parallel_stats};
use glossa::synth::{generate, SynthConfig};

fn main() {
    let d = generate(&SynthConfig::default());
    for (name, c) in [("base", &d.base), ("test", &d.test), ("mono", &d.mono)] {
        let issues = c.validate();
        println!("== {name} ({} issues)\n{}", issues.len(), corpus_stats(c));
    }
    println!("== parallel ({} issues)\n{}", d.parallel.validate().len(), parallel_stats(&d.parallel));
}
