//! Manifest execution: parse the config, run the experiment, write the
//! output files.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, Context, Result};
use fdbeam_core::montecarlo::{write_aggregates_csv, write_samples_csv};

use crate::config::parse_config;
use crate::experiments::{self, Experiment};

/// Default master seed when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Clone)]
pub struct RunManifest {
    pub config: PathBuf,
    pub experiment: String,
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub jobs: Option<usize>,
}

/// Runs the manifest end to end. Writes `<out>/<experiment>.csv`,
/// `<out>/<experiment>_samples.csv` and `<out>/<experiment>_meta.txt`.
pub fn execute(manifest: &RunManifest) -> Result<()> {
    let text = fs::read_to_string(&manifest.config)
        .with_context(|| format!("reading config {}", manifest.config.display()))?;
    let cfg = parse_config(&text)?;
    let exp = Experiment::from_name(&manifest.experiment).ok_or_else(|| {
        anyhow!(
            "unknown experiment `{}`; `fdbeam list` shows the registered names",
            manifest.experiment
        )
    })?;
    if let Some(t) = manifest.trials {
        if t < 1 {
            return Err(anyhow!("--trials must be >= 1"));
        }
    }
    let seed = manifest.seed.unwrap_or(DEFAULT_SEED);

    let started = Instant::now();
    let output = match manifest.jobs {
        Some(jobs) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(jobs.max(1))
                .build()
                .context("building worker pool")?;
            pool.install(|| experiments::execute(exp, &cfg, manifest.trials, seed))?
        }
        None => experiments::execute(exp, &cfg, manifest.trials, seed)?,
    };
    let elapsed = started.elapsed();

    fs::create_dir_all(&manifest.out)
        .with_context(|| format!("creating {}", manifest.out.display()))?;
    let stem = exp.name();

    let mut aggregates = Vec::new();
    write_aggregates_csv(&mut aggregates, &output.aggregates)?;
    write_file(&manifest.out.join(format!("{stem}.csv")), &aggregates)?;

    let mut samples = Vec::new();
    write_samples_csv(&mut samples, &output.samples, output.samples_init)?;
    write_file(&manifest.out.join(format!("{stem}_samples.csv")), &samples)?;

    let trials = manifest.trials.unwrap_or(cfg.trials);
    let meta = format!(
        "experiment: {stem}\nmaster_seed: {seed}\ntrials: {trials}\njobs: {}\n\
         wall_time_s: {:.3}\nsamples: {}\n\n# effective configuration\n{}",
        manifest.jobs.map_or("default".to_string(), |j| j.to_string()),
        elapsed.as_secs_f64(),
        output.samples_note,
        cfg.serialize(),
    );
    write_file(&manifest.out.join(format!("{stem}_meta.txt")), meta.as_bytes())?;
    Ok(())
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

/// One line per registered experiment.
pub fn list() -> String {
    let mut out = String::new();
    for exp in experiments::REGISTERED {
        out.push_str(&format!("{:22}{}\n", exp.name(), exp.description()));
    }
    out
}
