use std::fs;
use std::path::{Path, PathBuf};

use ddwarn_core::automl::{write_search_log, PipelineSpec};
use ddwarn_core::evaluate::{channel_importance, run_detection, run_sweep};
use ddwarn_core::featurize::{detection_matrix, pearson_matrix};
use ddwarn_core::herd_data::{
    derive_episodes, match_controls, parse_behavior, parse_lesions, parse_profiles, write_behavior, write_lesions,
    write_profiles, HerdDataset,
};
use ddwarn_core::synthherd::generate;
use ddwarn_core::{seed, Execution, FeatureMatrix};
use serde_json::json;

use crate::config::RunConfig;
use crate::output::{Artifacts, Failure, InputFile, Provenance};
use crate::DataArgs;

pub struct Context {
    pub cfg: RunConfig,
    pub out: PathBuf,
    pub exec: Execution,
}

impl Context {
    fn artifacts(&self, command: &str, inputs: Vec<InputFile>) -> Result<Artifacts, Failure> {
        Artifacts::new(
            &self.out,
            Provenance {
                tool: "ddwarn",
                version: env!("CARGO_PKG_VERSION"),
                command: command.into(),
                seed: self.cfg.seed,
                config_digest: self.cfg.digest(),
                inputs,
            },
        )
    }
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| {
        let code = if e.kind() == std::io::ErrorKind::NotFound { "missing_file" } else { "io_error" };
        Failure::data(code, format!("cannot read {}: {e}", path.display())).in_file(path)
    })
}

fn load(ctx: &Context, d: &DataArgs) -> Result<(HerdDataset, Vec<InputFile>), Failure> {
    let cfg = &ctx.cfg;
    let paths = [
        d.behavior.clone().unwrap_or_else(|| cfg.behavior.clone()),
        d.lesions.clone().unwrap_or_else(|| cfg.lesions.clone()),
        d.profiles.clone().unwrap_or_else(|| cfg.profiles.clone()),
    ];
    // Every input must exist before any work starts.
    for p in &paths {
        if !p.is_file() {
            return Err(Failure::data("missing_file", format!("no such file: {}", p.display())).in_file(p));
        }
    }
    let bytes = paths.iter().map(|p| read(p)).collect::<Result<Vec<_>, _>>()?;
    let paths = &paths;
    let at = |i: usize| move |e: ddwarn_core::Error| Failure::from(e).in_file(&paths[i]);
    let dataset = HerdDataset {
        behavior: parse_behavior(&bytes[0][..], cfg.temp).map_err(at(0))?,
        lesions: parse_lesions(&bytes[1][..]).map_err(at(1))?,
        profiles: parse_profiles(&bytes[2][..]).map_err(at(2))?,
    };
    let inputs = paths.iter().zip(&bytes).map(|(p, b)| InputFile::new(p, b)).collect();
    Ok((dataset, inputs))
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> ddwarn_core::Result<()>) -> Result<Vec<u8>, Failure> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

fn matrix(ctx: &Context, dataset: &HerdDataset) -> Result<FeatureMatrix, Failure> {
    let index = dataset.behavior_index();
    let derivation = derive_episodes(&dataset.lesions, &index);
    let episodes = match_controls(
        &derivation.enrolled,
        &dataset.profiles,
        &dataset.lesions,
        &index,
        ctx.cfg.detection.matching,
    );
    Ok(detection_matrix(&episodes, &index, ctx.cfg.detection.features)?)
}

pub fn synth(ctx: &Context) -> Result<(), Failure> {
    let herd = generate(&ctx.cfg.synth)?;
    let out = ctx.artifacts("synth", vec![])?;
    let ds = &herd.dataset;
    out.data("behavior.csv", &csv_bytes(|b| write_behavior(b, &ds.behavior))?)?;
    out.data("lesions.csv", &csv_bytes(|b| write_lesions(b, &ds.lesions))?)?;
    out.data("profiles.csv", &csv_bytes(|b| write_profiles(b, &ds.profiles))?)?;
    let mut day0 = String::from("cow_id,day0\n");
    for (cow, d) in &herd.day0 {
        day0.push_str(&format!("{cow},{d}\n"));
    }
    out.data("day0.csv", day0.as_bytes())?;
    Ok(())
}

pub fn validate(ctx: &Context, d: &DataArgs) -> Result<(), Failure> {
    let (dataset, inputs) = load(ctx, d)?;
    let index = dataset.behavior_index();
    let derivation = derive_episodes(&dataset.lesions, &index);
    let episodes = match_controls(
        &derivation.enrolled,
        &dataset.profiles,
        &dataset.lesions,
        &index,
        ctx.cfg.detection.matching,
    );
    let body = json!({
        "status": "ok",
        "rows": {
            "behavior": dataset.behavior.len(),
            "lesions": dataset.lesions.len(),
            "profiles": dataset.profiles.len(),
        },
        "cows": index.cows().count(),
        "enrolled": derivation.enrolled.len(),
        "matched": episodes.iter().filter(|e| e.control_cow_id.is_some()).count(),
        "rejected": derivation.rejected.iter().map(|r| json!({
            "cow_id": r.cow_id,
            "reason": r.reason.as_str(),
        })).collect::<Vec<_>>(),
        "episodes": episodes,
    });
    let out = ctx.artifacts("validate", inputs)?;
    print!("{}", out.report("validation.json", &body)?);
    Ok(())
}

pub fn correlate(ctx: &Context, d: &DataArgs) -> Result<(), Failure> {
    let (dataset, inputs) = load(ctx, d)?;
    let m = matrix(ctx, &dataset)?;
    let mut names = m.feature_names().to_vec();
    names.push("label".into());
    let rows = (0..m.n_rows())
        .map(|i| {
            let mut r = m.row(i).to_vec();
            r.push(f64::from(m.labels()[i]));
            r
        })
        .collect();
    let with_label = FeatureMatrix::from_rows(names, rows, m.labels().to_vec(), m.group_ids().to_vec())?;
    let corr = pearson_matrix(&with_label)?;
    let out = ctx.artifacts("correlate", inputs)?;
    out.data("pearson.csv", &csv_bytes(|b| corr.write_csv(b))?)?;
    out.data("detection_features.csv", &csv_bytes(|b| m.write_csv(b))?)?;
    Ok(())
}

pub fn detect(ctx: &Context, d: &DataArgs) -> Result<(), Failure> {
    let (dataset, inputs) = load(ctx, d)?;
    let run = run_detection(&dataset, &ctx.cfg.detection, ctx.exec)?;
    let out = ctx.artifacts("detect", inputs)?;
    out.report("detection_report.json", &run.report)?;
    out.report(
        "model.json",
        &json!({ "schema_version": ddwarn_core::evaluate::REPORT_SCHEMA_VERSION, "pipeline": run.model }),
    )?;
    out.data("search_log.jsonl", &csv_bytes(|b| write_search_log(&run.search_log, b))?)?;
    println!(
        "test_accuracy={:.4} cv_mean={:.4} cv_std={:.4} lower_bound_95={:.4} pipeline={}",
        run.report.test_accuracy,
        run.report.cv_mean,
        run.report.cv_std,
        run.report.lower_bound_95,
        run.report.pipeline_canonical
    );
    Ok(())
}

fn pipeline_from_report(path: &Path) -> Result<PipelineSpec, Failure> {
    let text = read(path)?;
    let bad = |m: String| Failure::data("invalid_report", m).in_file(path);
    let value: serde_json::Value = serde_json::from_slice(&text).map_err(|e| bad(e.to_string()))?;
    let spec = value.get("pipeline").cloned().ok_or_else(|| bad("report has no `pipeline`".into()))?;
    serde_json::from_value(spec).map_err(|e| bad(e.to_string()))
}

pub fn importance(ctx: &Context, d: &DataArgs, report: Option<&Path>) -> Result<(), Failure> {
    let spec = match report {
        Some(p) => pipeline_from_report(p)?,
        None => PipelineSpec::default(),
    };
    let (dataset, mut inputs) = load(ctx, d)?;
    if let Some(p) = report {
        inputs.push(InputFile::new(p, &read(p)?));
    }
    let m = matrix(ctx, &dataset)?;
    let rep = channel_importance(&spec, &m, ctx.cfg.importance_folds, seed::derive(ctx.cfg.seed, &[4]), ctx.exec)?;
    let out = ctx.artifacts("importance", inputs)?;
    out.data("importance.csv", &csv_bytes(|b| rep.write_csv(b))?)?;
    Ok(())
}

pub fn sweep(ctx: &Context, d: &DataArgs) -> Result<(), Failure> {
    let (dataset, inputs) = load(ctx, d)?;
    let mut cfg = ctx.cfg.sweep.clone();
    cfg.matching = ctx.cfg.detection.matching;
    let grid = run_sweep(&dataset, &cfg, ctx.exec)?;
    let out = ctx.artifacts("sweep", inputs)?;
    out.data("sweep.csv", &csv_bytes(|b| grid.write_csv(b))?)?;
    out.report("sweep_report.json", &grid)?;
    Ok(())
}
