//! Tables behind the recovery plots: mean served fraction over time, the F2
//! histogram and the running average of days to the service threshold.

use std::fmt::Write as _;
use std::path::Path;

use super::experiment::{Aggregate, RunSummary, ScenarioOutcome};
use crate::error::Result;
use crate::io;
use crate::sim::RecoveryTrajectory;

/// Spacing of the common time grid, days.
pub const GRID_STEP_DAYS: f64 = 0.25;
pub const HISTOGRAM_BINS: usize = 20;

/// Served fraction at time `t`.
pub fn served_fraction_at(trajectory: &RecoveryTrajectory, t: f64) -> f64 {
    let p = trajectory.total_population;
    if p > 0.0 {
        trajectory.level_at(t) / p
    } else {
        1.0
    }
}

/// Grid times `0, step, ...` up to the first point at or after `end`.
pub fn time_grid(end: f64, step: f64) -> Vec<f64> {
    let n = (end / step).ceil().max(0.0) as usize;
    (0..=n).map(|i| i as f64 * step).collect()
}

/// Mean and population std of the served fraction across trajectories at
/// each grid time.
pub fn mean_trajectory(trajectories: &[&RecoveryTrajectory], grid: &[f64]) -> Vec<Aggregate> {
    grid.iter()
        .map(|&t| Aggregate::of(trajectories.iter().map(|tr| served_fraction_at(tr, t))))
        .collect()
}

/// Counts of `values` in `bins` equal-width bins spanning `[lo, hi]`; the
/// top edge is inclusive.
pub fn histogram(values: &[f64], lo: f64, hi: f64, bins: usize) -> Vec<usize> {
    let mut counts = vec![0; bins];
    let width = (hi - lo) / bins as f64;
    for &v in values {
        let k = if width > 0.0 {
            (((v - lo) / width).floor() as isize).clamp(0, bins as isize - 1) as usize
        } else {
            0
        };
        counts[k] += 1;
    }
    counts
}

/// Running mean of `xs`.
pub fn cumulative_moving_average(xs: &[f64]) -> Vec<f64> {
    let mut sum = 0.0;
    xs.iter()
        .enumerate()
        .map(|(i, x)| {
            sum += x;
            sum / (i + 1) as f64
        })
        .collect()
}

/// Writes the three plot tables into `dir` and returns their file names.
pub fn emit_plot_data(outcomes: &[ScenarioOutcome], summary: &RunSummary, dir: &Path) -> Result<Vec<String>> {
    let base: Vec<&RecoveryTrajectory> = outcomes.iter().map(|o| &o.base.trajectory).collect();
    let rollout: Vec<&RecoveryTrajectory> = outcomes.iter().map(|o| &o.rollout.trajectory).collect();
    let end = base.iter().chain(&rollout).map(|t| t.final_clock()).fold(0.0, f64::max);
    let grid = time_grid(end, GRID_STEP_DAYS);
    let b = mean_trajectory(&base, &grid);
    let r = mean_trajectory(&rollout, &grid);
    let mut s = String::from("time_days,base_mean,base_std,rollout_mean,rollout_std\n");
    for (i, t) in grid.iter().enumerate() {
        let _ = writeln!(s, "{t},{},{},{},{}", b[i].mean, b[i].std, r[i].mean, r[i].std);
    }
    io::write_text(&dir.join("plotdata_mean_trajectory.csv"), &s)?;

    let base_f2: Vec<f64> = summary.rows.iter().map(|r| r.base_f2).collect();
    let rollout_f2: Vec<f64> = summary.rows.iter().map(|r| r.rollout_f2).collect();
    let all = base_f2.iter().chain(&rollout_f2);
    let lo = all.clone().copied().fold(f64::INFINITY, f64::min);
    let hi = all.copied().fold(f64::NEG_INFINITY, f64::max);
    let hb = histogram(&base_f2, lo, hi, HISTOGRAM_BINS);
    let hr = histogram(&rollout_f2, lo, hi, HISTOGRAM_BINS);
    let width = (hi - lo) / HISTOGRAM_BINS as f64;
    let mut s = String::from("bin_lo,bin_hi,base_count,rollout_count\n");
    for k in 0..HISTOGRAM_BINS {
        let a = lo + k as f64 * width;
        let z = if k + 1 == HISTOGRAM_BINS { hi } else { lo + (k + 1) as f64 * width };
        let _ = writeln!(s, "{a},{z},{},{}", hb[k], hr[k]);
    }
    io::write_text(&dir.join("plotdata_f2_histogram.csv"), &s)?;

    let bd: Vec<f64> = summary.rows.iter().map(|r| r.base_days_to_gamma).collect();
    let rd: Vec<f64> = summary.rows.iter().map(|r| r.rollout_days_to_gamma).collect();
    let bc = cumulative_moving_average(&bd);
    let rc = cumulative_moving_average(&rd);
    let mut s = String::from("scenario,base_days,rollout_days,base_cma,rollout_cma\n");
    for (i, row) in summary.rows.iter().enumerate() {
        let _ = writeln!(s, "{},{},{},{},{}", row.scenario, bd[i], rd[i], bc[i], rc[i]);
    }
    io::write_text(&dir.join("plotdata_f1_cma.csv"), &s)?;

    Ok(vec![
        "plotdata_mean_trajectory.csv".into(),
        "plotdata_f2_histogram.csv".into(),
        "plotdata_f1_cma.csv".into(),
    ])
}
