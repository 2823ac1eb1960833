//! Runs the active-learning loop with a simulated annotator who always
//! corrects to gold, printing the learning curve.

use glossa::harness::{run_active_learning, ActiveLearner, AlConfig, OracleAnnotator};
use glossa::synth::{generate, SynthConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let d = generate(&SynthConfig::default());
    let mut learner = ActiveLearner::new(&d.base, &d.test, &d.mono, Some(&d.parallel), AlConfig::default())?;
    for r in run_active_learning(&mut learner, &mut OracleAnnotator)? {
        println!(
            "iter {:2} {:10} {:8} tokens {:4} acc {:6.2} changed {:3} final story {:6.2}",
            r.iteration,
            r.narrative_id,
            r.method,
            r.tokens,
            r.accuracy,
            r.changed_count,
            r.final_story_accuracy.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
