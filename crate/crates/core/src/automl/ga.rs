use std::cmp::Ordering;
use std::collections::HashMap;
use std::io::Write;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::pipeline::{evaluate_pipeline, CvScore, Genome, GrammarBounds, PipelineSpec};
use crate::herd_data::FeatureMatrix;
use crate::par::{map_slice, Execution};
use crate::seed;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    pub population: usize,
    pub generations: usize,
    pub mutation_rate: f64,
    pub crossover_rate: f64,
    pub elitism: usize,
    /// Folds of the grouped CV used as fitness.
    pub folds: usize,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population: 24,
            generations: 10,
            mutation_rate: 0.2,
            crossover_rate: 0.5,
            elitism: 2,
            folds: 5,
            seed: 0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(Error::InvalidArgument(format!("ga config: {m}")));
        if self.population < 2 {
            return err(format!("population {} < 2", self.population));
        }
        if !(0.0..=1.0).contains(&self.mutation_rate) || !(0.0..=1.0).contains(&self.crossover_rate) {
            return err("rates must be in [0, 1]".into());
        }
        if self.elitism < 1 || self.elitism > self.population {
            return err(format!("elitism {} not in 1..={}", self.elitism, self.population));
        }
        if self.folds < 2 {
            return err(format!("folds {} < 2", self.folds));
        }
        Ok(())
    }
}

/// One line of the search log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchLogEntry {
    pub genome: String,
    pub mean_accuracy: f64,
    pub fold_accuracies: Vec<f64>,
    pub generation: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaResult {
    pub best: PipelineSpec,
    pub best_score: CvScore,
    /// Best fitness in each generation, generation 0 first.
    pub trace: Vec<f64>,
    /// Every distinct genome evaluated, in evaluation order.
    pub log: Vec<SearchLogEntry>,
}

/// Higher fitness first, then fewer stages, then the smaller canonical form.
fn rank(a: (&PipelineSpec, f64), b: (&PipelineSpec, f64)) -> Ordering {
    b.1.total_cmp(&a.1)
        .then(a.0.stages().cmp(&b.0.stages()))
        .then_with(|| a.0.canonical().cmp(&b.0.canonical()))
}

struct Scored {
    genome: Genome,
    spec: PipelineSpec,
    fitness: f64,
}

/// Genetic search over the pipeline grammar.
///
/// All genomes share one fold partition (from `config.seed`), so fitness
/// values are comparable. Duplicates are looked up in a cache keyed by the
/// canonical form; the cache never changes results.
pub fn ga_search(
    matrix: &FeatureMatrix,
    bounds: &GrammarBounds,
    config: &GaConfig,
    exec: Execution,
) -> Result<GaResult> {
    config.validate()?;
    bounds.validate()?;
    let mut rng = seed::rng_for(config.seed, &[0x6761]);
    let mut cache: HashMap<String, CvScore> = HashMap::new();
    let mut log = Vec::new();

    let mut evaluate = |genomes: Vec<Genome>, generation: usize, log: &mut Vec<SearchLogEntry>| -> Result<Vec<Scored>> {
        let specs: Vec<PipelineSpec> = genomes.iter().map(Genome::spec).collect();
        let mut fresh: Vec<PipelineSpec> = Vec::new();
        for s in &specs {
            s.validate(bounds)?;
            let key = s.canonical();
            if !cache.contains_key(&key) && !fresh.iter().any(|f| f.canonical() == key) {
                fresh.push(*s);
            }
        }
        let scores = map_slice(exec, &fresh, |s| evaluate_pipeline(s, matrix, config.folds, config.seed, exec));
        for (s, score) in fresh.iter().zip(scores) {
            let score = score?;
            log.push(SearchLogEntry {
                genome: s.canonical(),
                mean_accuracy: score.mean,
                fold_accuracies: score.folds.clone(),
                generation,
            });
            cache.insert(s.canonical(), score);
        }
        Ok(genomes
            .into_iter()
            .zip(specs)
            .map(|(genome, spec)| {
                let fitness = cache[&spec.canonical()].mean;
                Scored { genome, spec, fitness }
            })
            .collect())
    };

    let initial = (0..config.population).map(|_| Genome::random(bounds, &mut rng)).collect();
    let mut population = evaluate(initial, 0, &mut log)?;
    let mut trace = Vec::with_capacity(config.generations + 1);
    let sort = |p: &mut Vec<Scored>| p.sort_by(|a, b| rank((&a.spec, a.fitness), (&b.spec, b.fitness)));
    sort(&mut population);
    trace.push(population[0].fitness);

    for generation in 1..=config.generations {
        let tournament = |rng: &mut seed::Rng, pop: &[Scored]| -> Genome {
            let a = &pop[rng.random_range(0..pop.len())];
            let b = &pop[rng.random_range(0..pop.len())];
            if rank((&b.spec, b.fitness), (&a.spec, a.fitness)) == Ordering::Less {
                b.genome
            } else {
                a.genome
            }
        };
        let mut next: Vec<Genome> = population[..config.elitism].iter().map(|s| s.genome).collect();
        while next.len() < config.population {
            let mut child = tournament(&mut rng, &population);
            if rng.random::<f64>() < config.crossover_rate {
                let other = tournament(&mut rng, &population);
                child = child.crossover(&other, rng.random_range(1..Genome::LEN));
            }
            for gene in 0..Genome::LEN {
                if rng.random::<f64>() < config.mutation_rate {
                    child.resample(gene, bounds, &mut rng);
                }
            }
            next.push(child);
        }
        population = evaluate(next, generation, &mut log)?;
        sort(&mut population);
        trace.push(population[0].fitness);
    }

    // elites survive, so the final population holds the all-time best
    let best = population[0].spec;
    let best_score = cache[&best.canonical()].clone();
    Ok(GaResult {
        best,
        best_score,
        trace,
        log,
    })
}

/// Writes the search log as JSON lines.
pub fn write_search_log<W: Write>(log: &[SearchLogEntry], mut writer: W) -> Result<()> {
    for entry in log {
        serde_json::to_writer(&mut writer, entry)?;
        writer
            .write_all(b"\n")
            .map_err(|source| Error::Io { path: "<search log>".into(), source })?;
    }
    Ok(())
}
