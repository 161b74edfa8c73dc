//! CSV artifact writers. All files are UTF-8, comma-separated, one header
//! row, reals printed with 8 significant digits.
//!
//! Schemas:
//! - `final_table.csv`: `algorithm,test_mse,std`
//! - `learning_curves.csv`: `iteration,<algo>_mse,<algo>_std,...`
//! - `dict_sizes.csv`: `iteration,<algo>_size,...`
//! - `robustness.csv`: `noise_std,algorithm,test_mse,std`
//! - `dictionary_<algo>.csv`: `algorithm,family,bandwidth,exponent,coefficient,x0,...`

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use kaf_core::harness::{ExperimentReport, SweepRow};
use kaf_core::kernel::{GaussianExponent, KernelFamily, KernelSpec};
use kaf_core::kernel_filters::Dictionary;

use crate::CliError;

/// Plain decimal with 8 significant digits; falls back to scientific
/// notation outside a readable magnitude range.
pub fn fmt_sig8(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let mag = x.abs().log10().floor() as i32;
    if (-5..8).contains(&mag) {
        let decimals = (7 - mag).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.7e}")
    }
}

fn write_file(dir: &Path, name: &str, content: &str) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    fs::write(&path, content)
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

pub fn write_final_table(dir: &Path, report: &ExperimentReport) -> Result<PathBuf, CliError> {
    let mut out = String::from("algorithm,test_mse,std\n");
    for algo in &report.algorithms {
        let _ = writeln!(
            out,
            "{},{},{}",
            algo.algorithm,
            fmt_sig8(algo.final_mse),
            fmt_sig8(algo.final_std)
        );
    }
    write_file(dir, "final_table.csv", &out)
}

pub fn write_learning_curves(dir: &Path, report: &ExperimentReport) -> Result<PathBuf, CliError> {
    let mut out = String::from("iteration");
    for algo in &report.algorithms {
        let _ = write!(out, ",{0}_mse,{0}_std", algo.algorithm);
    }
    out.push('\n');
    for i in 0..report.train_count {
        let _ = write!(out, "{}", i + 1);
        for algo in &report.algorithms {
            let _ = write!(
                out,
                ",{},{}",
                fmt_sig8(algo.curve_mean[i]),
                fmt_sig8(algo.curve_std[i])
            );
        }
        out.push('\n');
    }
    write_file(dir, "learning_curves.csv", &out)
}

pub fn write_dict_sizes(dir: &Path, report: &ExperimentReport) -> Result<PathBuf, CliError> {
    let mut out = String::from("iteration");
    for algo in &report.algorithms {
        let _ = write!(out, ",{}_size", algo.algorithm);
    }
    out.push('\n');
    for i in 0..report.train_count {
        let _ = write!(out, "{}", i + 1);
        for algo in &report.algorithms {
            let _ = write!(out, ",{}", fmt_sig8(algo.dict_mean[i]));
        }
        out.push('\n');
    }
    write_file(dir, "dict_sizes.csv", &out)
}

pub fn write_robustness(dir: &Path, rows: &[SweepRow]) -> Result<PathBuf, CliError> {
    let mut out = String::from("noise_std,algorithm,test_mse,std\n");
    for row in rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fmt_sig8(row.noise_std),
            row.algorithm,
            fmt_sig8(row.final_mse),
            fmt_sig8(row.final_std)
        );
    }
    write_file(dir, "robustness.csv", &out)
}

/// Flat snapshot of a trained kernel dictionary for post-hoc analysis.
pub fn write_dictionary_snapshot(
    dir: &Path,
    algorithm: &str,
    dict: &Dictionary,
    spec: &KernelSpec,
) -> Result<PathBuf, CliError> {
    let dim = dict.centers().first().map(|c| c.len()).unwrap_or(0);
    let mut out = String::from("algorithm,family,bandwidth,exponent,coefficient");
    for i in 0..dim {
        let _ = write!(out, ",x{i}");
    }
    out.push('\n');
    let family = match spec.family {
        KernelFamily::Gaussian => "gaussian",
    };
    let exponent = match spec.exponent {
        GaussianExponent::Bandwidth => "bandwidth",
        GaussianExponent::Scale => "scale",
    };
    for (center, coefficient) in dict.centers().iter().zip(dict.coefficients()) {
        let _ = write!(
            out,
            "{algorithm},{family},{},{exponent},{}",
            fmt_sig8(spec.bandwidth),
            fmt_sig8(*coefficient)
        );
        for v in center {
            let _ = write!(out, ",{}", fmt_sig8(*v));
        }
        out.push('\n');
    }
    write_file(dir, &format!("dictionary_{algorithm}.csv"), &out)
}

/// The final table, aligned for a terminal.
pub fn render_final_table(report: &ExperimentReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<10} {:>14} {:>14}", "algorithm", "test_mse", "std");
    for algo in &report.algorithms {
        let _ = writeln!(
            out,
            "{:<10} {:>14} {:>14}",
            algo.algorithm.to_string(),
            fmt_sig8(algo.final_mse),
            fmt_sig8(algo.final_std)
        );
    }
    out
}

pub fn render_robustness(rows: &[SweepRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<10} {:<10} {:>14} {:>14}",
        "noise_std", "algorithm", "test_mse", "std"
    );
    for row in rows {
        let _ = writeln!(
            out,
            "{:<10} {:<10} {:>14} {:>14}",
            fmt_sig8(row.noise_std),
            row.algorithm.to_string(),
            fmt_sig8(row.final_mse),
            fmt_sig8(row.final_std)
        );
    }
    out
}
