//! Trains the BiLSTM tagger with a held-out dev set and scores the test set.

use glossa::corpus::Sentence;
use glossa::metrics::token_accuracy;
use glossa::neural::{train_neural, NeuralConfig};
use glossa::synth::{generate, SynthConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let d = generate(&SynthConfig::default());
    let train: Vec<Sentence> = d.base.active_sentences().cloned().collect();
    let test: Vec<Sentence> = d.test.active_sentences().cloned().collect();
    let cfg = NeuralConfig {
        max_epochs: 20,
        dev_size: 5,
        ..NeuralConfig::default()
    };
    let (model, report) = train_neural(&train, &cfg)?;
    for (epoch, loss) in report.train_loss.iter().enumerate() {
        let dev = report.dev_accuracy.get(epoch).copied().unwrap_or(f64::NAN);
        println!("epoch {:2} loss {loss:.4} dev {dev:.3}", epoch + 1);
    }
    let predicted: Vec<_> = test.iter().map(|s| model.predict(s).0).collect();
    println!("best epoch {} test accuracy {:.2}", report.best_epoch, token_accuracy(&test, &predicted).percent());
    Ok(())
}
