//! Genetic search over training hyperparameters.

use std::fs::{self, File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::Path;

use log::{info, warn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{CfnError, Result};

pub const GENE_NAMES: [&str; 7] = [
    "alpha",
    "beta",
    "mask_ratio",
    "bottleneck",
    "learning_rate",
    "lr_decay",
    "weight_decay",
];

/// Legal interval of every gene; fresh genomes are drawn uniformly from it.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneSpace {
    pub bounds: [(f64, f64); 7],
}

impl Default for GeneSpace {
    fn default() -> Self {
        GeneSpace {
            bounds: [
                (0.8, 1.2),
                (0.0, 1.0),
                (0.0, 1.0),
                (500.0, 700.0),
                (0.0, 0.5),
                (0.0, 0.5),
                (0.0, 0.5),
            ],
        }
    }
}

impl GeneSpace {
    pub fn validate(&self) -> Result<()> {
        for (name, &(lo, hi)) in GENE_NAMES.iter().zip(&self.bounds) {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(CfnError::Config(format!("bad interval [{lo}, {hi}] for gene {name}")));
            }
        }
        Ok(())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Genome {
        let mut genes = [0.0; 7];
        for (g, &(lo, hi)) in genes.iter_mut().zip(&self.bounds) {
            *g = if hi > lo { rng.random_range(lo..=hi) } else { lo };
        }
        Genome { genes }
    }

    pub fn clamp(&self, g: &mut Genome) {
        for (x, &(lo, hi)) in g.genes.iter_mut().zip(&self.bounds) {
            *x = x.clamp(lo, hi);
        }
    }

    pub fn contains(&self, g: &Genome) -> bool {
        g.genes
            .iter()
            .zip(&self.bounds)
            .all(|(x, &(lo, hi))| (lo..=hi).contains(x))
    }

    /// Gene values mapped affinely onto `[0, 1]`.
    pub fn to_unit(&self, g: &Genome) -> [f64; 7] {
        let mut u = [0.0; 7];
        for ((u, x), &(lo, hi)) in u.iter_mut().zip(&g.genes).zip(&self.bounds) {
            *u = if hi > lo { (x - lo) / (hi - lo) } else { 0.0 };
        }
        u
    }

    pub fn from_unit(&self, u: &[f64; 7]) -> Genome {
        let mut genes = [0.0; 7];
        for ((x, u), &(lo, hi)) in genes.iter_mut().zip(u).zip(&self.bounds) {
            *x = lo + u * (hi - lo);
        }
        Genome { genes }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Genome {
    pub genes: [f64; 7],
}

impl Genome {
    pub fn alpha(&self) -> f64 {
        self.genes[0]
    }
    pub fn beta(&self) -> f64 {
        self.genes[1]
    }
    pub fn mask_ratio(&self) -> f64 {
        self.genes[2]
    }
    pub fn bottleneck(&self) -> usize {
        self.genes[3].round().max(1.0) as usize
    }
    pub fn learning_rate(&self) -> f64 {
        self.genes[4]
    }
    pub fn lr_decay(&self) -> f64 {
        self.genes[5]
    }
    pub fn weight_decay(&self) -> f64 {
        self.genes[6]
    }
}

/// Children `2/3 x + 1/3 y` and `1/3 x + 2/3 y`, clamped to the gene intervals.
pub fn crossover(x: &Genome, y: &Genome, space: &GeneSpace) -> (Genome, Genome) {
    let mut a = Genome { genes: [0.0; 7] };
    let mut b = Genome { genes: [0.0; 7] };
    for i in 0..7 {
        a.genes[i] = (2.0 * x.genes[i] + y.genes[i]) / 3.0;
        b.genes[i] = (x.genes[i] + 2.0 * y.genes[i]) / 3.0;
    }
    space.clamp(&mut a);
    space.clamp(&mut b);
    (a, b)
}

/// Mutation standard deviation `sigma / d^(1/n)` for genome dimension `d` and population size `n`.
pub fn mutation_scale(sigma: f64, dim: usize, population: usize) -> f64 {
    sigma * (dim as f64).powf(-1.0 / population.max(1) as f64)
}

/// Gaussian perturbation of every gene, with standard deviation `s` times the gene's
/// interval width, then clamped.
pub fn mutate<R: Rng + ?Sized>(x: &Genome, sigma: f64, population: usize, space: &GeneSpace, rng: &mut R) -> Genome {
    let s = mutation_scale(sigma, GENE_NAMES.len(), population);
    let noise = Normal::new(0.0, 1.0).expect("unit normal");
    let mut out = *x;
    for (g, &(lo, hi)) in out.genes.iter_mut().zip(&space.bounds) {
        *g += s * (hi - lo) * noise.sample(rng);
    }
    space.clamp(&mut out);
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaConfig {
    pub population: usize,
    pub sigma: f64,
    /// Fractions for elites, crossover children, mutants and fresh genomes.
    pub lambdas: [f64; 4],
    /// Total generations, counting the initial population as the first.
    pub generations: usize,
    pub seed: u64,
    /// Concurrent fitness evaluations; `None` uses the global pool.
    pub workers: Option<usize>,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population: 20,
            sigma: 0.08,
            lambdas: [0.1, 0.2, 0.3, 0.4],
            generations: 10,
            seed: 0,
            workers: None,
        }
    }
}

/// Sizes of the four groups of the next generation plus the fresh-genome remainder.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroupSizes {
    pub elites: usize,
    pub crossover_pairs: usize,
    pub mutants: usize,
    pub fresh: usize,
    pub remainder: usize,
}

impl GroupSizes {
    pub fn children(&self) -> usize {
        2 * self.crossover_pairs
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population == 0 {
            return Err(CfnError::Config("population must be at least 1".into()));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(CfnError::Config(format!("sigma must be positive, got {}", self.sigma)));
        }
        if self.lambdas.iter().any(|l| !(0.0..=1.0).contains(l)) {
            return Err(CfnError::Config(format!("lambdas must lie in [0, 1]: {:?}", self.lambdas)));
        }
        let sum: f64 = self.lambdas.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(CfnError::Config(format!("lambdas sum to {sum}, expected 1")));
        }
        if self.workers == Some(0) {
            return Err(CfnError::Config("workers must be at least 1".into()));
        }
        let g = self.group_sizes();
        if g.elites == 0 && (g.crossover_pairs > 0 || g.mutants > 0) {
            return Err(CfnError::Config(
                "crossover and mutation draw from the elites, but the elite group is empty".into(),
            ));
        }
        Ok(())
    }

    pub fn group_sizes(&self) -> GroupSizes {
        let n = self.population as f64;
        let f = |x: f64| (x + 1e-9).floor() as usize;
        let elites = f(n * self.lambdas[0]);
        let crossover_pairs = f(n * self.lambdas[1] / 2.0);
        let mutants = f(n * self.lambdas[2]);
        let fresh = f(n * self.lambdas[3]);
        let used = elites + 2 * crossover_pairs + mutants + fresh;
        GroupSizes {
            elites,
            crossover_pairs,
            mutants,
            fresh,
            remainder: self.population.saturating_sub(used),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scored {
    pub genome: Genome,
    /// Lower is better; failed evaluations get `f64::INFINITY`.
    pub fitness: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    /// 1 for the initial population.
    pub generation: usize,
    pub members: Vec<Scored>,
}

impl Population {
    pub fn best(&self) -> Option<&Scored> {
        self.members.iter().min_by(|a, b| a.fitness.total_cmp(&b.fitness))
    }

    /// Members ordered by fitness, ties kept in population order.
    fn ranked(&self) -> Vec<&Scored> {
        let mut r: Vec<&Scored> = self.members.iter().collect();
        r.sort_by(|a, b| a.fitness.total_cmp(&b.fitness));
        r
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaOutcome {
    pub population: Population,
    pub best: Scored,
    /// Best fitness seen up to and including each generation.
    pub best_so_far: Vec<f64>,
}

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn generation_rng(seed: u64, generation: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(seed ^ mix(generation as u64)))
}

fn evaluate<F>(genomes: Vec<Genome>, fitness: &F, workers: Option<usize>) -> Result<Vec<Scored>>
where
    F: Fn(&Genome) -> Result<f64> + Sync,
{
    let score = |g: &Genome| {
        let f = match fitness(g) {
            Ok(v) if v.is_finite() => v,
            Ok(v) => {
                warn!("genome {:?} gave non-finite fitness {v}; scoring as worst", g.genes);
                f64::INFINITY
            }
            Err(e) => {
                warn!("genome {:?} failed: {e}; scoring as worst", g.genes);
                f64::INFINITY
            }
        };
        Scored { genome: *g, fitness: f }
    };
    Ok(match workers {
        Some(1) => genomes.iter().map(score).collect(),
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| CfnError::Config(format!("thread pool: {e}")))?
            .install(|| genomes.par_iter().map(score).collect()),
        None => genomes.par_iter().map(score).collect(),
    })
}

pub fn initial_population<F>(cfg: &GaConfig, space: &GeneSpace, fitness: &F) -> Result<Population>
where
    F: Fn(&Genome) -> Result<f64> + Sync,
{
    cfg.validate()?;
    space.validate()?;
    let mut rng = generation_rng(cfg.seed, 1);
    let genomes = (0..cfg.population).map(|_| space.sample(&mut rng)).collect();
    Ok(Population {
        generation: 1,
        members: evaluate(genomes, fitness, cfg.workers)?,
    })
}

/// Builds and evaluates the next generation. Elites keep their cached fitness.
pub fn next_generation<F>(pop: &Population, cfg: &GaConfig, space: &GeneSpace, fitness: &F) -> Result<Population>
where
    F: Fn(&Genome) -> Result<f64> + Sync,
{
    cfg.validate()?;
    if pop.members.len() != cfg.population {
        return Err(CfnError::Config(format!(
            "population has {} members, config says {}",
            pop.members.len(),
            cfg.population
        )));
    }
    let generation = pop.generation + 1;
    let mut rng = generation_rng(cfg.seed, generation);
    let sizes = cfg.group_sizes();
    let ranked = pop.ranked();
    let elites: Vec<Scored> = ranked[..sizes.elites].iter().map(|s| (*s).clone()).collect();

    let mut fresh_genomes = Vec::with_capacity(cfg.population - sizes.elites);
    for p in 0..sizes.crossover_pairs {
        let x = &ranked[(sizes.elites + p).min(ranked.len() - 1)].genome;
        let partner = &elites[rng.random_range(0..elites.len())].genome;
        let (a, b) = crossover(x, partner, space);
        fresh_genomes.push(a);
        fresh_genomes.push(b);
    }
    for _ in 0..sizes.mutants {
        let parent = &elites[rng.random_range(0..elites.len())].genome;
        fresh_genomes.push(mutate(parent, cfg.sigma, cfg.population, space, &mut rng));
    }
    for _ in 0..sizes.fresh + sizes.remainder {
        fresh_genomes.push(space.sample(&mut rng));
    }

    let mut members = elites;
    members.extend(evaluate(fresh_genomes, fitness, cfg.workers)?);
    Ok(Population { generation, members })
}

/// Runs generations until `pop.generation == cfg.generations`, appending every
/// generation after `pop` to `log` when given.
pub fn evolve<F>(
    mut pop: Population,
    cfg: &GaConfig,
    space: &GeneSpace,
    fitness: &F,
    mut log: Option<&mut TuneLog>,
) -> Result<GaOutcome>
where
    F: Fn(&Genome) -> Result<f64> + Sync,
{
    let mut best = pop
        .best()
        .cloned()
        .ok_or_else(|| CfnError::EmptyInput("population".into()))?;
    let mut best_so_far = vec![best.fitness];
    while pop.generation < cfg.generations {
        pop = next_generation(&pop, cfg, space, fitness)?;
        if let Some(l) = log.as_deref_mut() {
            l.append(&pop)?;
        }
        if let Some(b) = pop.best() {
            if b.fitness < best.fitness {
                best = b.clone();
            }
        }
        info!("generation {}: best fitness {}", pop.generation, best.fitness);
        best_so_far.push(best.fitness);
    }
    Ok(GaOutcome {
        population: pop,
        best,
        best_so_far,
    })
}

/// Tuning log: `generation<TAB>genes...<TAB>fitness`, one row per member per generation.
pub struct TuneLog {
    writer: BufWriter<File>,
    path: std::path::PathBuf,
}

impl TuneLog {
    pub fn create(path: &Path) -> Result<Self> {
        let file = File::create(path).map_err(|e| CfnError::io(path, e))?;
        let mut log = TuneLog {
            writer: BufWriter::new(file),
            path: path.to_path_buf(),
        };
        let header = format!("generation\t{}\tfitness", GENE_NAMES.join("\t"));
        writeln!(log.writer, "{header}").map_err(|e| CfnError::io(path, e))?;
        Ok(log)
    }

    fn open_append(path: &Path) -> Result<Self> {
        let file = OpenOptions::new().append(true).open(path).map_err(|e| CfnError::io(path, e))?;
        Ok(TuneLog {
            writer: BufWriter::new(file),
            path: path.to_path_buf(),
        })
    }

    pub fn append(&mut self, pop: &Population) -> Result<()> {
        let io = |e| CfnError::io(&self.path, e);
        for m in &pop.members {
            let genes: Vec<String> = m.genome.genes.iter().map(f64::to_string).collect();
            writeln!(self.writer, "{}\t{}\t{}", pop.generation, genes.join("\t"), m.fitness).map_err(io)?;
        }
        self.writer.flush().map_err(io)
    }
}

/// Every complete generation recorded in a tuning log, in order.
pub fn read_log(path: &Path, population: usize) -> Result<Vec<Population>> {
    let text = fs::read_to_string(path).map_err(|e| CfnError::io(path, e))?;
    let mut gens: Vec<Population> = Vec::new();
    for (no, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 9 {
            return Err(CfnError::parse(path, no + 1, format!("expected 9 fields, got {}", f.len())));
        }
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|e| CfnError::parse(path, no + 1, format!("bad number {s:?}: {e}")))
        };
        let generation: usize = f[0]
            .parse()
            .map_err(|e| CfnError::parse(path, no + 1, format!("bad generation: {e}")))?;
        let mut genes = [0.0; 7];
        for (g, s) in genes.iter_mut().zip(&f[1..8]) {
            *g = num(s)?;
        }
        let scored = Scored {
            genome: Genome { genes },
            fitness: num(f[8])?,
        };
        match gens.last_mut() {
            Some(p) if p.generation == generation => p.members.push(scored),
            _ => gens.push(Population {
                generation,
                members: vec![scored],
            }),
        }
    }
    gens.retain(|p| p.members.len() == population);
    Ok(gens)
}

/// Full search with a log at `log_path`; picks up after the last complete
/// generation when `resume` is set and the log exists.
pub fn run<F>(cfg: &GaConfig, space: &GeneSpace, fitness: &F, log_path: Option<&Path>, resume: bool) -> Result<GaOutcome>
where
    F: Fn(&Genome) -> Result<f64> + Sync,
{
    cfg.validate()?;
    space.validate()?;
    if cfg.generations == 0 {
        return Err(CfnError::Config("generations must be at least 1".into()));
    }
    let previous = match log_path {
        Some(p) if resume && p.exists() => read_log(p, cfg.population)?,
        _ => Vec::new(),
    };
    if let (Some(last), Some(path)) = (previous.last(), log_path) {
        info!("resuming from generation {} of {}", last.generation, path.display());
        // rewrite the log so a partially written generation is dropped
        let mut log = TuneLog::create(path)?;
        for p in &previous {
            log.append(p)?;
        }
        drop(log);
        let mut log = TuneLog::open_append(path)?;
        let mut out = evolve(last.clone(), cfg, space, fitness, Some(&mut log))?;
        let mut history = Vec::new();
        let mut best = f64::INFINITY;
        for p in &previous[..previous.len() - 1] {
            if let Some(b) = p.best() {
                best = best.min(b.fitness);
                if b.fitness < out.best.fitness {
                    out.best = b.clone();
                }
            }
            history.push(best);
        }
        history.extend(out.best_so_far.iter().map(|b| b.min(best)));
        out.best_so_far = history;
        return Ok(out);
    }
    let mut log = log_path.map(TuneLog::create).transpose()?;
    let pop = initial_population(cfg, space, fitness)?;
    if let Some(l) = log.as_mut() {
        l.append(&pop)?;
    }
    evolve(pop, cfg, space, fitness, log.as_mut())
}

/// `‖unit(g) − unit(target)‖²`, the synthetic fitness used to check convergence.
pub fn quadratic_fitness(space: &GeneSpace, target: &Genome) -> impl Fn(&Genome) -> Result<f64> + Sync {
    let space = space.clone();
    let t = space.to_unit(target);
    move |g: &Genome| {
        let u = space.to_unit(g);
        Ok(u.iter().zip(&t).map(|(a, b)| (a - b) * (a - b)).sum())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn crossover_fixed_point_and_beta_example() {
        let s = GeneSpace::default();
        let x = s.sample(&mut ChaCha8Rng::seed_from_u64(1));
        let (a, b) = crossover(&x, &x, &s);
        for i in 0..7 {
            assert!((a.genes[i] - x.genes[i]).abs() < 1e-12);
            assert!((b.genes[i] - x.genes[i]).abs() < 1e-12);
        }
        let mut x = x;
        let mut y = x;
        x.genes[1] = 0.0;
        y.genes[1] = 0.9;
        let (a, b) = crossover(&x, &y, &s);
        assert!((a.genes[1] - 0.3).abs() < 1e-12);
        assert!((b.genes[1] - 0.6).abs() < 1e-12);
    }

    #[test]
    fn default_group_sizes() {
        let g = GaConfig::default().group_sizes();
        assert_eq!((g.elites, g.children(), g.mutants, g.fresh, g.remainder), (2, 4, 6, 8, 0));
    }

    #[test]
    fn remainder_goes_to_fresh() {
        let c = GaConfig { population: 7, ..GaConfig::default() };
        let g = c.group_sizes();
        assert_eq!(g.elites + g.children() + g.mutants + g.fresh + g.remainder, 7);
    }

    #[test]
    fn bad_lambdas_rejected() {
        let c = GaConfig { lambdas: [0.5, 0.5, 0.5, 0.0], ..GaConfig::default() };
        assert!(c.validate().is_err());
        let c = GaConfig { population: 5, lambdas: [0.1, 0.5, 0.0, 0.4], ..GaConfig::default() };
        assert!(c.validate().is_err());
    }

    #[test]
    fn mutation_std_matches_scale() {
        let s = GeneSpace::default();
        let mut x = s.from_unit(&[0.5; 7]);
        x.genes[1] = 0.5;
        let sigma = 0.01;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 100_000;
        let draws: Vec<f64> = (0..n).map(|_| mutate(&x, sigma, 20, &s, &mut rng).genes[1]).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let std = (draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
        let expected = sigma * 7f64.powf(-1.0 / 20.0);
        assert!((std / expected - 1.0).abs() < 0.02, "{std} vs {expected}");
    }

    #[test]
    fn pure_elitism_freezes_population() {
        let s = GeneSpace::default();
        let cfg = GaConfig { lambdas: [1.0, 0.0, 0.0, 0.0], generations: 5, workers: Some(1), ..GaConfig::default() };
        let target = s.from_unit(&[0.3; 7]);
        let f = quadratic_fitness(&s, &target);
        let out = run(&cfg, &s, &f, None, false).unwrap();
        assert!(out.best_so_far.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn resume_gives_identical_best() {
        let s = GeneSpace::default();
        let target = s.from_unit(&[0.2, 0.8, 0.5, 0.4, 0.6, 0.1, 0.9]);
        let f = quadratic_fitness(&s, &target);
        let dir = tempfile::tempdir().unwrap();
        let full_log = dir.path().join("full.tsv");
        let cfg = GaConfig { population: 10, generations: 6, seed: 3, workers: Some(1), ..GaConfig::default() };
        let full = run(&cfg, &s, &f, Some(&full_log), false).unwrap();

        let part_log = dir.path().join("part.tsv");
        run(&GaConfig { generations: 3, ..cfg.clone() }, &s, &f, Some(&part_log), false).unwrap();
        // simulate a crash in the middle of writing generation 4
        let mut text = fs::read_to_string(&part_log).unwrap();
        text.push_str("4\t1\t0.5\t0.5\t600\t0.1\t0.1\t0.1\t0.3\n");
        fs::write(&part_log, text).unwrap();
        let resumed = run(&cfg, &s, &f, Some(&part_log), true).unwrap();
        assert_eq!(full.best, resumed.best);
        assert_eq!(full.best_so_far, resumed.best_so_far);
        assert_eq!(fs::read_to_string(&full_log).unwrap(), fs::read_to_string(&part_log).unwrap());
        let rows = fs::read_to_string(&full_log).unwrap().lines().count() - 1;
        assert_eq!(rows, 10 * 6);
    }

    #[test]
    fn failures_score_worst() {
        let s = GeneSpace::default();
        let cfg = GaConfig { population: 2, lambdas: [0.5, 0.0, 0.0, 0.5], generations: 1, workers: Some(1), ..GaConfig::default() };
        let f = |_: &Genome| -> Result<f64> { Err(CfnError::NonFinite("boom".into())) };
        let out = run(&cfg, &s, &f, None, false).unwrap();
        assert!(out.population.members.iter().all(|m| m.fitness == f64::INFINITY));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn children_on_segment(seed in 0u64..10_000) {
            let s = GeneSpace::default();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (x, y) = (s.sample(&mut rng), s.sample(&mut rng));
            let (a, b) = crossover(&x, &y, &s);
            for i in 0..7 {
                let (lo, hi) = (x.genes[i].min(y.genes[i]), x.genes[i].max(y.genes[i]));
                prop_assert!(a.genes[i] >= lo - 1e-12 && a.genes[i] <= hi + 1e-12);
                prop_assert!(b.genes[i] >= lo - 1e-12 && b.genes[i] <= hi + 1e-12);
            }
        }

        #[test]
        fn mutants_stay_in_bounds(seed in 0u64..10_000, sigma in 0.001f64..5.0) {
            let s = GeneSpace::default();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = s.sample(&mut rng);
            prop_assert!(s.contains(&mutate(&x, sigma, 20, &s, &mut rng)));
        }

        #[test]
        fn tiny_sigma_barely_moves(seed in 0u64..10_000) {
            let s = GeneSpace::default();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = s.from_unit(&[0.5; 7]);
            let m = mutate(&x, 1e-12, 20, &s, &mut rng);
            for i in 0..7 {
                prop_assert!((m.genes[i] - x.genes[i]).abs() < 1e-8);
            }
        }
    }
}
