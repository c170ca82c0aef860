use std::path::PathBuf;

use clap::Args;
use serde::Deserialize;

use sdmapkit::align::{perturb as apply_noise, NoiseSpec, SWEEP_ROTATIONS_DEG, SWEEP_TRANSLATIONS_M};
use sdmapkit::formats::{write_sdg, SdgDocument};

use super::{create_dir, load_sdg, required, write_file};
use crate::config::merge_from_config;
use crate::error::{CliError, CliResult};

/// Apply a seeded rigid localization error to an sdg-json graph.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct PerturbArgs {
    #[arg(long)]
    pub sdg: Option<PathBuf>,
    /// Output sdg-json file, or a directory with --sweep.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Translation magnitude in meters [default: 0].
    #[arg(long)]
    pub trans_noise: Option<f64>,
    /// Rotation magnitude in degrees [default: 0].
    #[arg(long)]
    pub rot_noise: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write one graph per point of the 4 x 3 translation/rotation grid.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub sweep: Option<bool>,
}

merge_from_config!(PerturbArgs { sdg, out, trans_noise, rot_noise, seed, sweep });

/// File name of one sweep grid point, e.g. `t0.25m_r5deg.sdg.jsonl`.
pub fn sweep_file_name(translation_m: f64, rotation_deg: f64) -> String {
    format!("t{translation_m}m_r{rotation_deg}deg.sdg.jsonl")
}

pub fn perturb(args: PerturbArgs) -> CliResult<()> {
    let sdg = required(args.sdg, "sdg")?;
    let out = required(args.out, "out")?;
    let seed = args.seed.unwrap_or(0);
    let doc = load_sdg(&sdg)?;
    let grid: Vec<(f64, f64, PathBuf)> = if args.sweep.unwrap_or(false) {
        if args.trans_noise.is_some() || args.rot_noise.is_some() {
            return Err(CliError::Usage("--sweep fixes the noise grid; drop --trans-noise/--rot-noise".into()));
        }
        create_dir(&out)?;
        SWEEP_TRANSLATIONS_M
            .iter()
            .flat_map(|&t| SWEEP_ROTATIONS_DEG.iter().map(move |&r| (t, r)))
            .map(|(t, r)| (t, r, out.join(sweep_file_name(t, r))))
            .collect()
    } else {
        vec![(args.trans_noise.unwrap_or(0.0), args.rot_noise.unwrap_or(0.0), out)]
    };
    for (translation_m, rotation_deg, path) in grid {
        let noise = NoiseSpec { translation_m, rotation_deg, seed };
        noise.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        let (graph, t) = apply_noise(&doc.graph, &noise)?;
        eprintln!(
            "perturb: |t| = {translation_m} m, rotation {:+.3} deg, translation ({:.6}, {:.6}) -> {}",
            t.rotation.to_degrees(),
            t.translation.x,
            t.translation.y,
            path.display()
        );
        let perturbed = SdgDocument { graph, ..doc.clone() };
        write_file(&path, |w| write_sdg(w, &perturbed))?;
    }
    Ok(())
}
