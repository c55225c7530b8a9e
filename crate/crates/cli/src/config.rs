//! Flat `key = value` run configuration.
//!
//! Keys carry a section prefix (`data.`, `detection.`, `ga.`, `grid.`,
//! `importance.`, `sweep.`, `synth.`); `#` starts a comment. Every key has a
//! default, and `ddwarn defaults` prints the full commented table.

use std::path::PathBuf;
use std::str::FromStr;

use ddwarn_core::automl::{ClassifierSpec, Expander, Family, KnnSpec, PipelineSpec, RfSpec, Scaler};
use ddwarn_core::evaluate::{DetectionConfig, NegativeUniverse, SweepConfig};
use ddwarn_core::featurize::Aggregate;
use ddwarn_core::herd_data::{Channel, TempBounds};
use ddwarn_core::seed::sha256_hex;
use ddwarn_core::synthherd::{Ramp, SynthConfig};

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub seed: u64,
    pub behavior: PathBuf,
    pub lesions: PathBuf,
    pub profiles: PathBuf,
    pub temp: TempBounds,
    pub detection: DetectionConfig,
    pub importance_folds: usize,
    pub sweep: SweepConfig,
    pub synth: SynthConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            behavior: "behavior.csv".into(),
            lesions: "lesions.csv".into(),
            profiles: "profiles.csv".into(),
            temp: TempBounds::default(),
            detection: DetectionConfig::default(),
            importance_folds: 5,
            sweep: SweepConfig::default(),
            synth: SynthConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.line {
            Some(l) => write!(f, "config line {l}: {}", self.message),
            None => write!(f, "config: {}", self.message),
        }
    }
}

type Getter = Box<dyn Fn(&RunConfig) -> String>;
type Setter = Box<dyn Fn(&mut RunConfig, &str) -> Result<(), String>>;

struct Key {
    name: String,
    doc: &'static str,
    get: Getter,
    set: Setter,
}

fn num<T: FromStr>(v: &str) -> Result<T, String> {
    v.parse().map_err(|_| format!("`{v}` is not a valid number"))
}

fn list<T>(v: &str, item: impl Fn(&str) -> Result<T, String>) -> Result<Vec<T>, String> {
    if v.is_empty() {
        return Ok(vec![]);
    }
    v.split(',').map(|s| item(s.trim())).collect()
}

fn join<T>(xs: &[T], f: impl Fn(&T) -> String) -> String {
    xs.iter().map(f).collect::<Vec<_>>().join(",")
}

fn depth(v: &str) -> Result<Option<usize>, String> {
    if v == "none" {
        Ok(None)
    } else {
        num(v).map(Some)
    }
}

fn depth_str(d: &Option<usize>) -> String {
    d.map_or("none".into(), |d| d.to_string())
}

fn boolean(v: &str) -> Result<bool, String> {
    match v {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(format!("`{v}` is not true or false")),
    }
}

fn scaler(v: &str) -> Result<Scaler, String> {
    match v {
        "none" => Ok(Scaler::None),
        "minmax" => Ok(Scaler::Minmax),
        _ => Err(format!("unknown scaler `{v}`")),
    }
}

fn scaler_str(s: &Scaler) -> String {
    match s {
        Scaler::None => "none",
        Scaler::Minmax => "minmax",
    }
    .into()
}

fn expander(v: &str) -> Result<Expander, String> {
    match v {
        "none" => Ok(Expander::None),
        "poly2" => Ok(Expander::Poly2),
        _ => Err(format!("unknown expander `{v}`")),
    }
}

fn expander_str(e: &Expander) -> String {
    match e {
        Expander::None => "none",
        Expander::Poly2 => "poly2",
    }
    .into()
}

fn family(v: &str) -> Result<Family, String> {
    match v {
        "rf" => Ok(Family::Rf),
        "knn" => Ok(Family::Knn),
        "ensemble" => Ok(Family::Ensemble),
        _ => Err(format!("unknown classifier `{v}`")),
    }
}

fn family_str(f: &Family) -> String {
    match f {
        Family::Rf => "rf",
        Family::Knn => "knn",
        Family::Ensemble => "ensemble",
    }
    .into()
}

/// The sweep pipeline is stored as a spec; these views edit one field.
fn sweep_parts(spec: &PipelineSpec) -> (Family, RfSpec, KnnSpec, f64) {
    match spec.classifier {
        ClassifierSpec::Rf(rf) => (Family::Rf, rf, KnnSpec::default(), 0.5),
        ClassifierSpec::Knn(k) => (Family::Knn, RfSpec::default(), k, 0.5),
        ClassifierSpec::Ensemble { rf, knn, rf_weight } => (Family::Ensemble, rf, knn, rf_weight),
    }
}

fn sweep_rebuild(spec: &mut PipelineSpec, parts: (Family, RfSpec, KnnSpec, f64)) {
    let (f, rf, knn, rf_weight) = parts;
    spec.classifier = match f {
        Family::Rf => ClassifierSpec::Rf(rf),
        Family::Knn => ClassifierSpec::Knn(knn),
        Family::Ensemble => ClassifierSpec::Ensemble { rf, knn, rf_weight },
    };
}

macro_rules! key {
    ($name:expr, $doc:expr, |$c:ident| $get:expr, |$s:ident, $v:ident| $set:expr) => {
        Key {
            name: $name.to_string(),
            doc: $doc,
            get: Box::new(move |$c: &RunConfig| $get),
            set: Box::new(move |$s: &mut RunConfig, $v: &str| {
                $set;
                Ok(())
            }),
        }
    };
}

fn keys() -> Vec<Key> {
    let mut k = vec![
        key!("seed", "master seed; every stochastic step derives from it",
            |c| c.seed.to_string(), |c, v| c.seed = num(v)?),
        key!("data.behavior", "daily sensor CSV",
            |c| c.behavior.display().to_string(), |c, v| c.behavior = v.into()),
        key!("data.lesions", "daily lesion observation CSV",
            |c| c.lesions.display().to_string(), |c, v| c.lesions = v.into()),
        key!("data.profiles", "one row per cow: parity, reproduction status, calving date",
            |c| c.profiles.display().to_string(), |c, v| c.profiles = v.into()),
        key!("data.temp_min", "lowest plausible ear temperature (C)",
            |c| c.temp.min.to_string(), |c, v| c.temp.min = num(v)?),
        key!("data.temp_max", "highest plausible ear temperature (C)",
            |c| c.temp.max.to_string(), |c, v| c.temp.max = num(v)?),
        key!("detection.test_fraction", "share of cows held out for testing",
            |c| c.detection.test_fraction.to_string(), |c, v| c.detection.test_fraction = num(v)?),
        key!("detection.folds", "grouped cross-validation folds",
            |c| c.detection.folds.to_string(), |c, v| c.detection.folds = num(v)?),
        key!("detection.min_episodes", "fewest matched cases to run with",
            |c| c.detection.min_episodes.to_string(), |c, v| c.detection.min_episodes = num(v)?),
        key!("detection.include_day0", "add day 0 itself to the seven-day horizon",
            |c| c.detection.features.include_day0.to_string(),
            |c, v| {
                let b = boolean(v)?;
                c.detection.features.include_day0 = b;
                c.detection.matching.include_day0 = b;
            }),
        key!("detection.match_horizon_days", "days before day 0 a control needs sensor data for",
            |c| c.detection.matching.horizon_days.to_string(), |c, v| c.detection.matching.horizon_days = num(v)?),
        key!("ga.population", "genomes per generation",
            |c| c.detection.ga.population.to_string(), |c, v| c.detection.ga.population = num(v)?),
        key!("ga.generations", "generations after the random initial one",
            |c| c.detection.ga.generations.to_string(), |c, v| c.detection.ga.generations = num(v)?),
        key!("ga.mutation_rate", "per-gene resampling probability",
            |c| c.detection.ga.mutation_rate.to_string(), |c, v| c.detection.ga.mutation_rate = num(v)?),
        key!("ga.crossover_rate", "one-point crossover probability",
            |c| c.detection.ga.crossover_rate.to_string(), |c, v| c.detection.ga.crossover_rate = num(v)?),
        key!("ga.elitism", "best genomes copied unchanged into the next generation",
            |c| c.detection.ga.elitism.to_string(), |c, v| c.detection.ga.elitism = num(v)?),
        key!("ga.scalers", "admissible scalers: none, minmax",
            |c| join(&c.detection.bounds.scalers, scaler_str), |c, v| c.detection.bounds.scalers = list(v, scaler)?),
        key!("ga.expanders", "admissible expanders: none, poly2",
            |c| join(&c.detection.bounds.expanders, expander_str), |c, v| c.detection.bounds.expanders = list(v, expander)?),
        key!("ga.classifiers", "admissible classifiers: rf, knn, ensemble",
            |c| join(&c.detection.bounds.families, family_str), |c, v| c.detection.bounds.families = list(v, family)?),
        key!("ga.n_trees_min", "smallest forest (>= 10)",
            |c| c.detection.bounds.n_trees.0.to_string(), |c, v| c.detection.bounds.n_trees.0 = num(v)?),
        key!("ga.n_trees_max", "largest forest (<= 300)",
            |c| c.detection.bounds.n_trees.1.to_string(), |c, v| c.detection.bounds.n_trees.1 = num(v)?),
        key!("ga.max_depth", "admissible tree depths: none or 2..16",
            |c| join(&c.detection.bounds.max_depth, depth_str), |c, v| c.detection.bounds.max_depth = list(v, depth)?),
        key!("ga.knn_k_min", "smallest k (>= 1)",
            |c| c.detection.bounds.knn_k.0.to_string(), |c, v| c.detection.bounds.knn_k.0 = num(v)?),
        key!("ga.knn_k_max", "largest k (<= 25)",
            |c| c.detection.bounds.knn_k.1.to_string(), |c, v| c.detection.bounds.knn_k.1 = num(v)?),
        key!("ga.rf_weights", "admissible forest weights in an ensemble",
            |c| join(&c.detection.bounds.rf_weights, f64::to_string), |c, v| c.detection.bounds.rf_weights = list(v, num)?),
        key!("grid.n_trees", "grid values; empty keeps the searched value",
            |c| join(&c.detection.grid.n_trees, usize::to_string), |c, v| c.detection.grid.n_trees = list(v, num)?),
        key!("grid.max_depth", "grid values; empty keeps the searched value",
            |c| join(&c.detection.grid.max_depth, depth_str), |c, v| c.detection.grid.max_depth = list(v, depth)?),
        key!("grid.knn_k", "grid values; empty keeps the searched value",
            |c| join(&c.detection.grid.knn_k, usize::to_string), |c, v| c.detection.grid.knn_k = list(v, num)?),
        key!("grid.rf_weight", "grid values; empty keeps the searched value",
            |c| join(&c.detection.grid.rf_weight, f64::to_string), |c, v| c.detection.grid.rf_weight = list(v, num)?),
        key!("importance.folds", "grouped cross-validation folds",
            |c| c.importance_folds.to_string(), |c, v| c.importance_folds = num(v)?),
        key!("sweep.lags", "lags (days between window end and reference day)",
            |c| join(&c.sweep.lags, u32::to_string), |c, v| c.sweep.lags = list(v, num)?),
        key!("sweep.windows", "window sizes in days",
            |c| join(&c.sweep.windows, u32::to_string), |c, v| c.sweep.windows = list(v, num)?),
        key!("sweep.train_n", "training rows in every cell",
            |c| c.sweep.train_n.to_string(), |c, v| c.sweep.train_n = num(v)?),
        key!("sweep.test_n", "test rows in every cell",
            |c| c.sweep.test_n.to_string(), |c, v| c.sweep.test_n = num(v)?),
        key!("sweep.positive_days", "lesion days from day 0 used as positive reference days",
            |c| c.sweep.positive_days.to_string(), |c, v| c.sweep.positive_days = num(v)?),
        key!("sweep.negatives", "controls_and_case_prior or controls_only",
            |c| match c.sweep.negatives {
                NegativeUniverse::ControlsAndCasePrior => "controls_and_case_prior".into(),
                NegativeUniverse::ControlsOnly => "controls_only".into(),
            },
            |c, v| c.sweep.negatives = match v {
                "controls_and_case_prior" => NegativeUniverse::ControlsAndCasePrior,
                "controls_only" => NegativeUniverse::ControlsOnly,
                _ => return Err(format!("unknown negative universe `{v}`")),
            }),
        key!("sweep.case_gap_days", "case-cow negatives end at least this long before day 0",
            |c| c.sweep.case_gap_days.to_string(), |c, v| c.sweep.case_gap_days = num(v)?),
        key!("sweep.aggregates", "window aggregates: mean, sum, std",
            |c| join(&c.sweep.aggregates, |a| a.name().to_string()),
            |c, v| c.sweep.aggregates = list(v, |s| Aggregate::from_name(s).ok_or(format!("unknown aggregate `{s}`")))?),
        key!("sweep.scaler", "pipeline trained in every cell",
            |c| scaler_str(&c.sweep.pipeline.scaler), |c, v| c.sweep.pipeline.scaler = scaler(v)?),
        key!("sweep.expander", "",
            |c| expander_str(&c.sweep.pipeline.expander), |c, v| c.sweep.pipeline.expander = expander(v)?),
        key!("sweep.classifier", "",
            |c| family_str(&sweep_parts(&c.sweep.pipeline).0),
            |c, v| {
                let mut p = sweep_parts(&c.sweep.pipeline);
                p.0 = family(v)?;
                sweep_rebuild(&mut c.sweep.pipeline, p);
            }),
        key!("sweep.n_trees", "",
            |c| sweep_parts(&c.sweep.pipeline).1.n_trees.to_string(),
            |c, v| {
                let mut p = sweep_parts(&c.sweep.pipeline);
                p.1.n_trees = num(v)?;
                sweep_rebuild(&mut c.sweep.pipeline, p);
            }),
        key!("sweep.max_depth", "",
            |c| depth_str(&sweep_parts(&c.sweep.pipeline).1.max_depth),
            |c, v| {
                let mut p = sweep_parts(&c.sweep.pipeline);
                p.1.max_depth = depth(v)?;
                sweep_rebuild(&mut c.sweep.pipeline, p);
            }),
        key!("sweep.knn_k", "",
            |c| sweep_parts(&c.sweep.pipeline).2.k.to_string(),
            |c, v| {
                let mut p = sweep_parts(&c.sweep.pipeline);
                p.2.k = num(v)?;
                sweep_rebuild(&mut c.sweep.pipeline, p);
            }),
        key!("sweep.rf_weight", "",
            |c| sweep_parts(&c.sweep.pipeline).3.to_string(),
            |c, v| {
                let mut p = sweep_parts(&c.sweep.pipeline);
                p.3 = num(v)?;
                sweep_rebuild(&mut c.sweep.pipeline, p);
            }),
        key!("synth.n_cases", "cows that develop a lesion; each gets a matched twin",
            |c| c.synth.n_cases.to_string(), |c, v| c.synth.n_cases = num(v)?),
        key!("synth.n_extra_healthy", "additional healthy cows",
            |c| c.synth.n_extra_healthy.to_string(), |c, v| c.synth.n_extra_healthy = num(v)?),
        key!("synth.trial_days", "trial length (at most 99 days)",
            |c| c.synth.trial_days.to_string(), |c, v| c.synth.trial_days = num(v)?),
        key!("synth.start_date", "first trial day, YYYY-MM-DD",
            |c| c.synth.start_date.to_string(),
            |c, v| c.synth.start_date = v.parse().map_err(|_| format!("`{v}` is not a date"))?),
        key!("synth.lesion_days", "days a lesion stays active before digressing",
            |c| c.synth.lesion_days.to_string(), |c, v| c.synth.lesion_days = num(v)?),
        key!("synth.min_day0_offset", "earliest trial day (0-based) for a case's day 0",
            |c| c.synth.min_day0_offset.to_string(), |c, v| c.synth.min_day0_offset = num(v)?),
        key!("synth.lead_days", "days before day 0 over which shifts ramp in",
            |c| c.synth.signal.lead_days.to_string(), |c, v| c.synth.signal.lead_days = num(v)?),
        key!("synth.ramp", "linear or step",
            |c| match c.synth.signal.ramp {
                Ramp::Linear => "linear".into(),
                Ramp::Step => "step".into(),
            },
            |c, v| c.synth.signal.ramp = match v {
                "linear" => Ramp::Linear,
                "step" => Ramp::Step,
                _ => return Err(format!("unknown ramp `{v}`")),
            }),
    ];
    for ch in Channel::ALL {
        let i = ch.index();
        k.push(Key {
            name: format!("synth.shift.{}", ch.name()),
            doc: if i == 0 { "full-strength shift in units of the channel's noise std" } else { "" },
            get: Box::new(move |c| c.synth.signal.shifts[i].to_string()),
            set: Box::new(move |c, v| {
                c.synth.signal.shifts[i] = num(v)?;
                Ok(())
            }),
        });
    }
    for ch in Channel::ALL {
        let i = ch.index();
        k.push(Key {
            name: format!("synth.baseline.{}", ch.name()),
            doc: if i == 0 { "per-cow mean drawn from [lo, hi], then daily noise: lo,hi,noise_std" } else { "" },
            get: Box::new(move |c| {
                let b = c.synth.baselines[i];
                format!("{},{},{}", b.mean_lo, b.mean_hi, b.noise_std)
            }),
            set: Box::new(move |c, v| {
                let parts: Vec<f64> = list(v, num)?;
                let [lo, hi, std] = parts[..] else {
                    return Err("expected lo,hi,noise_std".into());
                };
                let b = &mut c.synth.baselines[i];
                (b.mean_lo, b.mean_hi, b.noise_std) = (lo, hi, std);
                Ok(())
            }),
        });
    }
    k
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig, ConfigError> {
        let keys = keys();
        let mut cfg = RunConfig::default();
        let mut seen = std::collections::HashSet::new();
        for (n, raw) in text.lines().enumerate() {
            let line_no = Some(n + 1);
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| ConfigError { line: line_no, message };
            let (name, value) = line.split_once('=').ok_or_else(|| err(format!("expected `key = value`, got `{line}`")))?;
            let (name, value) = (name.trim(), value.trim());
            let key = keys
                .iter()
                .find(|k| k.name == name)
                .ok_or_else(|| err(format!("unknown key `{name}`")))?;
            if !seen.insert(name.to_string()) {
                return Err(err(format!("duplicate key `{name}`")));
            }
            (key.set)(&mut cfg, value).map_err(|m| err(format!("{name}: {m}")))?;
        }
        Ok(cfg)
    }

    /// Pushes the master seed into every section.
    pub fn with_seed(mut self, seed: u64) -> RunConfig {
        self.seed = seed;
        self.detection.seed = seed;
        self.sweep.seed = seed;
        self.synth.seed = seed;
        self
    }

    /// Every key with its effective value, one `key = value` per line.
    pub fn to_flat(&self) -> String {
        keys()
            .iter()
            .map(|k| format!("{} = {}\n", k.name, (k.get)(self)))
            .collect()
    }

    /// Commented listing of every key and its default.
    pub fn defaults_text() -> String {
        let cfg = RunConfig::default();
        let mut out = String::from(
            "# ddwarn configuration: `key = value`, `#` starts a comment.\n\
             # Lists are comma separated; an empty grid list keeps the searched value.\n",
        );
        let mut section = String::new();
        for k in keys() {
            let s = k.name.split('.').next().unwrap_or("");
            if s != section && k.name.contains('.') {
                out.push_str(&format!("\n# [{s}]\n"));
                section = s.to_string();
            }
            if !k.doc.is_empty() {
                out.push_str(&format!("# {}\n", k.doc));
            }
            out.push_str(&format!("{} = {}\n", k.name, (k.get)(&cfg)));
        }
        out
    }

    pub fn digest(&self) -> String {
        sha256_hex(self.to_flat().as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let text = RunConfig::defaults_text();
        let parsed = RunConfig::parse(&text).unwrap();
        assert_eq!(parsed.to_flat(), RunConfig::default().to_flat());
    }

    #[test]
    fn overrides_apply() {
        let cfg = RunConfig::parse(
            "seed = 9  # master\nga.population = 6\ngrid.max_depth = none,4\nsweep.classifier = knn\nsweep.knn_k = 3\nsynth.baseline.active = 0.1,0.2,0.01\n",
        )
        .unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.detection.ga.population, 6);
        assert_eq!(cfg.detection.grid.max_depth, vec![None, Some(4)]);
        assert_eq!(cfg.sweep.pipeline.classifier, ClassifierSpec::Knn(KnnSpec { k: 3 }));
        assert_eq!(cfg.synth.baselines[Channel::Active.index()].noise_std, 0.01);
        let cleared = RunConfig::parse("grid.knn_k =\n").unwrap();
        assert!(cleared.detection.grid.knn_k.is_empty());
    }

    #[test]
    fn errors_name_the_line() {
        let e = RunConfig::parse("seed = 1\nga.popul = 3\n").unwrap_err();
        assert_eq!(e.line, Some(2));
        assert!(e.message.contains("unknown key"));
        assert!(RunConfig::parse("ga.population = many\n").is_err());
        assert!(RunConfig::parse("seed = 1\nseed = 2\n").is_err());
        assert!(RunConfig::parse("just words\n").is_err());
    }

    #[test]
    fn digest_tracks_values() {
        let a = RunConfig::default();
        let b = RunConfig::default().with_seed(1);
        assert_ne!(a.digest(), b.digest());
        assert_eq!(a.digest(), RunConfig::default().digest());
    }
}
