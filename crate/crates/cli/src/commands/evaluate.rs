use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use serde::Deserialize;

use sdmapkit::formats::read_olann;
use sdmapkit::metrics::{evaluate as score, EvalConfig, OlsVariant, SceneScores, Task};

use super::{decoded, open, required, write_bytes};
use crate::config::merge_from_config;
use crate::error::{CliError, CliResult};

/// Score olann-json predictions against ground truth.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct EvaluateArgs {
    #[arg(long)]
    pub pred: Option<PathBuf>,
    #[arg(long)]
    pub gt: Option<PathBuf>,
    /// perception (Chamfer mAP) or reasoning (DET/TOP/OLS) [default: reasoning].
    #[arg(long)]
    pub task: Option<Task>,
    /// Comma-separated association thresholds in meters [default: 0.5,1,1.5 or 1,2,3].
    #[arg(long, value_delimiter = ',')]
    pub thresholds: Option<Vec<f64>>,
    /// sqrt-topology or mean [default: sqrt-topology].
    #[arg(long)]
    pub ols_variant: Option<OlsVariant>,
    /// IoU threshold for traffic elements [default: 0.75].
    #[arg(long)]
    pub te_iou: Option<f64>,
    /// Report JSON path [default: stdout].
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Per-scene CSV path.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

merge_from_config!(EvaluateArgs { pred, gt, task, thresholds, ols_variant, te_iou, out, csv });

pub fn evaluate(args: EvaluateArgs) -> CliResult<()> {
    let pred_path = required(args.pred, "pred")?;
    let gt_path = required(args.gt, "gt")?;
    let mut config = EvalConfig::new(args.task.unwrap_or(Task::Reasoning));
    if let Some(t) = args.thresholds {
        config.thresholds = t;
    }
    if let Some(v) = args.ols_variant {
        config.ols_variant = v;
    }
    if let Some(iou) = args.te_iou {
        config.te_iou = iou;
    }
    config.validate().map_err(|e| CliError::Usage(e.to_string()))?;

    let preds = decoded(&pred_path, read_olann(open(&pred_path)?))?;
    let gts = decoded(&gt_path, read_olann(open(&gt_path)?))?;
    let (report, scenes) = score(&preds, &gts, &config)?;
    for flag in &report.diagnostics.flags {
        eprintln!("evaluate: note: {flag}");
    }
    let mut json = serde_json::to_string_pretty(&report).expect("report serializes");
    json.push('\n');
    match args.out {
        Some(path) => write_bytes(&path, json.as_bytes())?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(json.as_bytes())
                .map_err(|source| CliError::Io { path: "<stdout>".into(), source })?;
        }
    }
    if let Some(csv) = args.csv {
        let mut text = String::from(SceneScores::CSV_HEADER);
        text.push('\n');
        for s in &scenes {
            text.push_str(&s.csv_row());
            text.push('\n');
        }
        write_bytes(&csv, text.as_bytes())?;
    }
    Ok(())
}
