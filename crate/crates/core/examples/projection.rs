//! Projects a tag dictionary across the parallel corpus and measures its
//! precision against the generator's lexicon.

use glossa::projection::{project_corpus, ProjectionConfig, ProjectionMode};
use glossa::synth::{generate, SynthConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let d = generate(&SynthConfig::default());
    for mode in [ProjectionMode::TrainOnly, ProjectionMode::Transductive] {
        let p = project_corpus(&d.parallel, &d.parallel_train_ids(), &d.test_ids(), mode, &ProjectionConfig::default())?;
        let (mut ok, mut total) = (0, 0);
        for (w, entries) in p.dictionary.iter() {
            for e in entries {
                total += 1;
                ok += usize::from(d.lexicon.get(w).is_some_and(|tags| tags.contains(&e.tag)));
            }
        }
        println!(
            "{mode:?}: {} types, {} kept links, {} ties, precision {:.3}",
            p.dictionary.len(),
            p.kept_links,
            p.tied_types.len(),
            ok as f64 / total as f64
        );
    }
    Ok(())
}
