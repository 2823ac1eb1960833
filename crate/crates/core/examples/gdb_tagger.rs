//! Expands the annotated dictionary over raw text by label propagation and
//! trains the constrained HMM on top of it.

use glossa::corpus::Sentence;
use glossa::dict::TagDictionary;
use glossa::metrics::token_accuracy;
use glossa::semisup::{train_gdb, GdbConfig};
use glossa::synth::{generate, SynthConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let d = generate(&SynthConfig::default());
    let train: Vec<Sentence> = d.base.active_sentences().cloned().collect();
    let mono: Vec<Sentence> = d.mono.active_sentences().chain(d.test.active_sentences()).cloned().collect();
    let test: Vec<Sentence> = d.test.active_sentences().cloned().collect();
    let m = train_gdb(&mono, &train, &TagDictionary::new(), &GdbConfig::default())?;
    println!(
        "seeds {} -> dictionary {} types; propagation {} iterations, residual {:.1e}",
        TagDictionary::from_tagged(&train).len(),
        m.dictionary.len(),
        m.propagation_iterations,
        m.propagation_residual
    );
    for (i, ll) in m.em_log_likelihood.iter().enumerate() {
        println!("em {i:2} log-likelihood {ll:.2}");
    }
    let predicted: Vec<_> = test.iter().map(|s| m.hmm.decode(s)).collect();
    println!("test accuracy {:.2}", token_accuracy(&test, &predicted).percent());
    Ok(())
}
