//! Genetic hyperparameter search.
//!
//! Without arguments it minimizes a quadratic over the seven genes. With a
//! config file it runs the full search on that experiment and writes
//! `tune_log.tsv` and `best_genome.toml` to its output directory.
//!
//! cargo run --release --example genetic_tuning -- [config.toml]

use cfn::config::ExperimentConfig;
use cfn::experiment::{cmd_split, cmd_tune};
use cfn::tune::{self, quadratic_fitness, GaConfig, GeneSpace, GENE_NAMES};

fn main() -> cfn::Result<()> {
    if let Some(path) = std::env::args().nth(1) {
        let cfg = ExperimentConfig::load(path.as_ref())?;
        cmd_split(&cfg)?;
        let out = cmd_tune(&cfg)?;
        println!("best validation rmse {:.4}", out.best.fitness);
        for (name, g) in GENE_NAMES.iter().zip(out.best.genome.genes) {
            println!("  {name:<14} {g:.5}");
        }
        return Ok(());
    }

    let space = GeneSpace::default();
    let target = space.from_unit(&[0.3, 0.6, 0.5, 0.4, 0.7, 0.2, 0.55]);
    let fitness = quadratic_fitness(&space, &target);
    let cfg = GaConfig {
        generations: 50,
        seed: 7,
        ..GaConfig::default()
    };
    let sizes = cfg.group_sizes();
    println!(
        "population {}: {} elites, {} crossover pairs, {} mutants, {} fresh",
        cfg.population, sizes.elites, sizes.crossover_pairs, sizes.mutants, sizes.fresh
    );
    let out = tune::run(&cfg, &space, &fitness, None, false)?;
    for (g, best) in out.best_so_far.iter().enumerate().step_by(5) {
        println!("generation {:>2}  best {best:.2e}", g + 1);
    }
    println!("final best {:.2e}", out.best.fitness);
    for ((name, g), t) in GENE_NAMES.iter().zip(out.best.genome.genes).zip(target.genes) {
        println!("  {name:<14} {g:>10.5}  target {t:>10.5}");
    }
    Ok(())
}
