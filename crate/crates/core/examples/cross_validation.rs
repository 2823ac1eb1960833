//! Leave-one-narrative-out cross-validation over the test narratives.

use glossa::harness::{cross_validate, HarnessConfig, Resources, TaggerKind, TaggerSpec};
use glossa::synth::{generate, SynthConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let d = generate(&SynthConfig::default());
    let base: Vec<_> = d.base.active_sentences().cloned().collect();
    let spec = TaggerSpec::plain(TaggerKind::CrfMod);
    let r = cross_validate(&d.test, &base, spec, &Resources::default(), &HarnessConfig::default())?;
    for f in &r.folds {
        println!("{:10} {:4}/{:4} {:6.2}", f.narrative_id, f.correct, f.total, f.accuracy);
    }
    println!("{} mean {:.2} sd {:.2} min {} max {}", r.tagger, r.mean, r.sd, r.min.narrative_id, r.max.narrative_id);
    Ok(())
}
