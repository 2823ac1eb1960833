//! Trains the basic and extended CRF on the base corpus and scores the test set.

use glossa::corpus::Sentence;
use glossa::crf::{train_crf, CrfConfig};
use glossa::metrics::token_accuracy;
use glossa::synth::{generate, SynthConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let d = generate(&SynthConfig::default());
    let train: Vec<Sentence> = d.base.active_sentences().cloned().collect();
    let test: Vec<Sentence> = d.test.active_sentences().cloned().collect();
    for (name, cfg) in [("basic", CrfConfig::basic()), ("extended", CrfConfig::extended())] {
        let (model, report) = train_crf(&train, None, &cfg)?;
        let predicted: Vec<_> = test.iter().map(|s| model.decode(s).0).collect();
        println!(
            "{name:8} iterations {:3} converged {} objective {:.3} accuracy {:.2}",
            report.iterations,
            report.converged,
            report.objective.last().copied().unwrap_or(f64::NAN),
            token_accuracy(&test, &predicted).percent()
        );
    }
    Ok(())
}
