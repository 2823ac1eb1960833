//! Grid and active-learning run on seeded synthetic diglot corpora.

use std::time::Instant;

use glossa::harness::{
    run_active_learning, run_grid, ActiveLearner, AlConfig, Augment, DataCondition, GridData, HarnessConfig,
    OracleAnnotator, TaggerKind,
};
use glossa::synth::{generate, SynthConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seeds: Vec<u64> = std::env::args().skip(1).map(|s| s.parse()).collect::<Result<_, _>>()?;
    let seeds = if seeds.is_empty() { vec![0, 1, 2, 3, 4] } else { seeds };
    for seed in seeds {
        let start = Instant::now();
        let data = generate(&SynthConfig { seed, ..Default::default() });
        let cfg = HarnessConfig::default();
        let grid = run_grid(
            &[TaggerKind::Majority, TaggerKind::CrfMod, TaggerKind::Gdb],
            &[
                DataCondition::default(),
                DataCondition { projection: Augment::Clp, ..Default::default() },
            ],
            &GridData { train: &data.base, test: &data.test, mono: &data.mono, parallel: Some(&data.parallel) },
            &cfg,
        )?;
        print!("seed {seed}\n{}", grid.to_tsv());
        let mut learner = ActiveLearner::new(&data.base, &data.test, &data.mono, Some(&data.parallel), AlConfig::default())?;
        let log = run_active_learning(&mut learner, &mut OracleAnnotator)?;
        for r in &log {
            println!(
                "iter {:2} {} {:8} acc {:6.2} static {:6.2} final {:6.2?}",
                r.iteration, r.narrative_id, r.method, r.accuracy, r.static_accuracy, r.final_story_accuracy
            );
        }
        println!("elapsed {:.1?}", start.elapsed());
    }
    Ok(())
}
