//! The registered experiments.
//!
//! Each experiment builds one or more Monte Carlo runs from the parsed
//! configuration, shares the master seed across its runs so variants are
//! paired trial-by-trial (identical channel draws), and reduces the samples
//! to the aggregate rows written to CSV.

use anyhow::Result;
use fdbeam_core::montecarlo::{
    self, mean, outage_probability, quantile, rate_gain, run_experiment, sample_std, AggregateRow,
    ExperimentConfig, RateSamples, ScenarioKind, SiSpec, SweepVariable,
};
use fdbeam_core::optimizer::{Constraint, InitScheme, OptimizerConfig};
use fdbeam_core::relay::DuplexMode;

use crate::config::Config;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Fig2Outage,
    Fig3RateVsSnr,
    Fig4RateVsSir,
    Table2Convergence,
}

pub const REGISTERED: [Experiment; 4] = [
    Experiment::Fig2Outage,
    Experiment::Fig3RateVsSnr,
    Experiment::Fig4RateVsSir,
    Experiment::Table2Convergence,
];

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Fig2Outage => "fig2_outage",
            Experiment::Fig3RateVsSnr => "fig3_rate_vs_snr",
            Experiment::Fig4RateVsSir => "fig4_rate_vs_sir",
            Experiment::Table2Convergence => "table2_convergence",
        }
    }

    pub fn description(&self) -> &'static str {
        match self {
            Experiment::Fig2Outage => {
                "relay sum-rate outage curves over target rates, for SIR in {0,-10,-20} dB and relay sizes 8/16"
            }
            Experiment::Fig3RateVsSnr => {
                "two-node ergodic sum rate vs SNR: full-digital and CA gradient search, SVD baseline, upper bound"
            }
            Experiment::Fig4RateVsSir => {
                "relay uplink/downlink rates vs SIR for full-, half- and hybrid-duplex operation"
            }
            Experiment::Table2Convergence => {
                "relay uplink rate gain over half duplex plus iteration statistics per (SIR, SNR, init)"
            }
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        REGISTERED.iter().copied().find(|e| e.name() == name)
    }
}

/// Everything a run produces before file writing.
pub struct ExperimentOutput {
    pub aggregates: Vec<AggregateRow>,
    /// The experiment's headline per-trial samples (one run; see
    /// `samples_note` for which).
    pub samples: Vec<RateSamples>,
    pub samples_init: InitScheme,
    pub samples_note: String,
}

/// dB value as a metric-name fragment: `-20 -> "m20"`, `0 -> "0"`.
fn db_label(db: f64) -> String {
    if db < 0.0 {
        format!("m{}", -db)
    } else {
        format!("{db}")
    }
}

/// Config SNR when the file set it explicitly, otherwise the experiment's
/// conventional value.
fn snr_or(cfg: &Config, fallback: f64) -> f64 {
    if cfg.is_explicit("snr_db") {
        cfg.snr_db
    } else {
        fallback
    }
}

fn mean_std_row(sweep: f64, metric: impl Into<String>, values: &[f64]) -> AggregateRow {
    AggregateRow {
        sweep,
        metric: metric.into(),
        value: mean(values),
        stddev: sample_std(values),
        trials: values.len(),
    }
}

pub fn execute(
    exp: Experiment,
    cfg: &Config,
    trials_override: Option<usize>,
    master_seed: u64,
) -> Result<ExperimentOutput> {
    let mut base = cfg.base_experiment();
    base.trials = trials_override.unwrap_or(cfg.trials);
    base.master_seed = master_seed;
    match exp {
        Experiment::Fig2Outage => fig2_outage(cfg, base),
        Experiment::Fig3RateVsSnr => fig3_rate_vs_snr(base),
        Experiment::Fig4RateVsSir => fig4_rate_vs_sir(cfg, base),
        Experiment::Table2Convergence => table2_convergence(cfg, base),
    }
}

fn fig3_rate_vs_snr(base: ExperimentConfig) -> Result<ExperimentOutput> {
    let grid: Vec<f64> = (0..9).map(|i| -10.0 + 2.5 * i as f64).collect();
    let with_constraint = |constraint: Constraint| ExperimentConfig {
        scenario: ScenarioKind::TwoNode,
        sweep: SweepVariable::SnrDb,
        grid: grid.clone(),
        optimizer: OptimizerConfig { constraint, ..base.optimizer },
        ..base.clone()
    };
    let full_digital = run_experiment(&with_constraint(Constraint::UnitNorm))?;
    let ca = run_experiment(&with_constraint(Constraint::ConstantAmplitude))?;

    let mut rows = Vec::new();
    for (un_point, ca_point) in full_digital.iter().zip(&ca) {
        let snr = un_point.sweep_value;
        rows.push(mean_std_row(snr, "rate_full_digital", &un_point.sum_rates()));
        rows.push(mean_std_row(snr, "rate_ca", &ca_point.sum_rates()));
        let ubs: Vec<f64> = un_point.records.iter().filter_map(|r| r.upper_bound).collect();
        rows.push(mean_std_row(snr, "upper_bound", &ubs));
        let svd: Vec<f64> = un_point.records.iter().filter_map(|r| r.svd_rate).collect();
        rows.push(mean_std_row(snr, "rate_svd_baseline", &svd));
        let iters: Vec<f64> = ca_point.iterations().iter().map(|&i| i as f64).collect();
        rows.push(AggregateRow {
            sweep: snr,
            metric: "iterations_median_ca".into(),
            value: montecarlo::iteration_stats(&ca_point.iterations())?.median,
            stddev: sample_std(&iters),
            trials: iters.len(),
        });
    }
    Ok(ExperimentOutput {
        aggregates: rows,
        samples: ca,
        samples_init: base.optimizer.init,
        samples_note: "per-trial rows are the CA-constrained run; rate_uplink/rate_downlink \
                       hold the node-1 and node-2 link rates"
            .into(),
    })
}

fn fig2_outage(cfg: &Config, base: ExperimentConfig) -> Result<ExperimentOutput> {
    let sir_grid = vec![-20.0, -10.0, 0.0];
    let rate_grid: Vec<f64> = (0..=20).map(|r| r as f64).collect();
    let snr_db = snr_or(cfg, 10.0);
    let mut rows = Vec::new();
    let mut headline = None;
    for &relay_n in &[8usize, 16] {
        let run_cfg = ExperimentConfig {
            scenario: ScenarioKind::Relay,
            relay_n,
            snr_db,
            sweep: SweepVariable::SirDb,
            grid: sir_grid.clone(),
            duplex: DuplexMode::FullDuplex,
            ..base.clone()
        };
        let points = run_experiment(&run_cfg)?;
        for point in &points {
            let sir = db_label(point.sweep_value);
            let sums = point.sum_rates();
            rows.push(mean_std_row(
                point.sweep_value,
                format!("sum_rate_na{relay_n}_sir{sir}"),
                &sums,
            ));
            for &r in &rate_grid {
                let p = outage_probability(&sums, r)?;
                rows.push(AggregateRow {
                    sweep: r,
                    metric: format!("outage_na{relay_n}_sir{sir}"),
                    value: p,
                    stddev: (p * (1.0 - p)).sqrt(),
                    trials: sums.len(),
                });
            }
            rows.push(AggregateRow {
                sweep: 0.1,
                metric: format!("supported_rate_q10_na{relay_n}_sir{sir}"),
                value: quantile(&sums, 0.1)?,
                stddev: 0.0,
                trials: sums.len(),
            });
        }
        if relay_n == 16 {
            headline = Some(points);
        }
    }
    Ok(ExperimentOutput {
        aggregates: rows,
        samples: headline.expect("16-antenna cell always runs"),
        samples_init: base.optimizer.init,
        samples_note: "per-trial rows are the 16-antenna relay cells (sweep = SIR dB)".into(),
    })
}

fn fig4_rate_vs_sir(cfg: &Config, base: ExperimentConfig) -> Result<ExperimentOutput> {
    let grid: Vec<f64> = (0..9).map(|i| -80.0 + 10.0 * i as f64).collect();
    let run_cfg = |duplex| ExperimentConfig {
        scenario: ScenarioKind::Relay,
        snr_db: snr_or(cfg, 10.0),
        sweep: SweepVariable::SirDb,
        grid: grid.clone(),
        duplex,
        ..base.clone()
    };
    let fd = run_experiment(&run_cfg(DuplexMode::FullDuplex))?;
    let hd = run_experiment(&run_cfg(DuplexMode::HalfDuplex))?;

    let mut rows = Vec::new();
    for (fd_point, hd_point) in fd.iter().zip(&hd) {
        let sir = fd_point.sweep_value;
        rows.push(mean_std_row(sir, "uplink_fd", &fd_point.rates_a()));
        rows.push(mean_std_row(sir, "downlink_fd", &fd_point.rates_b()));
        rows.push(mean_std_row(sir, "uplink_hd", &hd_point.rates_a()));
        rows.push(mean_std_row(sir, "downlink_hd", &hd_point.rates_b()));
        // Trials are seed-paired, so the hybrid split combines per trial.
        let hybrid_up: Vec<f64> = fd_point
            .records
            .iter()
            .zip(&hd_point.records)
            .map(|(f, h)| 0.5 * f.rate_a + 0.5 * h.rate_a)
            .collect();
        let hybrid_down: Vec<f64> = fd_point
            .records
            .iter()
            .zip(&hd_point.records)
            .map(|(f, h)| 0.5 * f.rate_b + 0.5 * h.rate_b)
            .collect();
        rows.push(mean_std_row(sir, "uplink_hybrid05", &hybrid_up));
        rows.push(mean_std_row(sir, "downlink_hybrid05", &hybrid_down));
    }
    Ok(ExperimentOutput {
        aggregates: rows,
        samples: fd,
        samples_init: base.optimizer.init,
        samples_note: "per-trial rows are the full-duplex run (sweep = SIR dB)".into(),
    })
}

fn table2_convergence(cfg: &Config, base: ExperimentConfig) -> Result<ExperimentOutput> {
    let snr_grid = vec![-30.0, 0.0, 10.0];
    let _ = cfg;
    let run_cfg = |sir: f64, init: InitScheme, duplex: DuplexMode| ExperimentConfig {
        scenario: ScenarioKind::Relay,
        sweep: SweepVariable::SnrDb,
        grid: snr_grid.clone(),
        si: SiSpec::SirDb(sir),
        duplex,
        optimizer: OptimizerConfig { init, ..base.optimizer },
        ..base.clone()
    };

    let mut rows = Vec::new();
    let mut headline = None;
    for &sir in &[-60.0, 0.0] {
        let label = db_label(sir);
        let fd_svd = run_experiment(&run_cfg(sir, InitScheme::Svd, DuplexMode::FullDuplex))?;
        let fd_gauss = run_experiment(&run_cfg(sir, InitScheme::Gaussian, DuplexMode::FullDuplex))?;
        let hd = run_experiment(&run_cfg(sir, InitScheme::Svd, DuplexMode::HalfDuplex))?;

        for ((svd_point, gauss_point), hd_point) in fd_svd.iter().zip(&fd_gauss).zip(&hd) {
            let snr = svd_point.sweep_value;
            let gain = rate_gain(mean(&svd_point.rates_a()), mean(&hd_point.rates_a()))?;
            rows.push(AggregateRow {
                sweep: snr,
                metric: format!("gain_pct_sir{label}"),
                value: gain,
                stddev: 0.0,
                trials: svd_point.records.len(),
            });
            rows.push(mean_std_row(snr, format!("uplink_hd_sir{label}"), &hd_point.rates_a()));
            for (point, init) in [(svd_point, "svd"), (gauss_point, "gaussian")] {
                let stats = montecarlo::iteration_stats(&point.iterations())?;
                rows.push(mean_std_row(
                    snr,
                    format!("uplink_fd_sir{label}_{init}"),
                    &point.rates_a(),
                ));
                for (name, value) in [
                    ("iters_mean", stats.mean),
                    ("iters_median", stats.median),
                    ("iters_max", stats.max as f64),
                    ("converged_frac", point.converged_fraction()),
                ] {
                    rows.push(AggregateRow {
                        sweep: snr,
                        metric: format!("{name}_sir{label}_{init}"),
                        value,
                        stddev: 0.0,
                        trials: point.records.len(),
                    });
                }
            }
        }
        if sir == 0.0 {
            headline = Some(fd_svd);
        }
    }
    Ok(ExperimentOutput {
        aggregates: rows,
        samples: headline.expect("the 0 dB SIR cell always runs"),
        samples_init: InitScheme::Svd,
        samples_note: "per-trial rows are the SIR = 0 dB, SVD-initialized full-duplex run \
                       (sweep = SNR dB)"
            .into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_round_trips_names() {
        for exp in REGISTERED {
            assert_eq!(Experiment::from_name(exp.name()), Some(exp));
        }
        assert_eq!(Experiment::from_name("nope"), None);
    }

    #[test]
    fn db_labels_are_filename_safe() {
        assert_eq!(db_label(-20.0), "m20");
        assert_eq!(db_label(0.0), "0");
        assert_eq!(db_label(10.0), "10");
    }
}
