//! CSV row types. Column lists are documented in `docs/csv-schemas.md` and checked
//! against the serde field order in tests.

use std::io::Write;

use serde::Serialize;

use crate::error::HarnessError;

pub trait CsvRecord: Serialize {
    const TABLE: &'static str;
    const COLUMNS: &'static [&'static str];
    /// Row-level invariants checked before the row is written.
    fn check(&self) -> Result<(), String>;
}

fn finite(name: &str, x: f64) -> Result<(), String> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(format!("{name} = {x} is not finite"))
    }
}

fn fraction(name: &str, x: f64) -> Result<(), String> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(format!("{name} = {x} not in [0,1]"))
    }
}

/// Writes a header from `R::COLUMNS` and then every row, failing on the first row that
/// violates its schema.
pub fn write_csv<R: CsvRecord, W: Write>(rows: &[R], out: W) -> Result<(), HarnessError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(R::COLUMNS)?;
    for (i, row) in rows.iter().enumerate() {
        row.check().map_err(|reason| HarnessError::Schema {
            table: R::TABLE,
            row: i,
            reason,
        })?;
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string<R: CsvRecord>(rows: &[R]) -> Result<String, HarnessError> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrbitRecord {
    pub replicate: usize,
    pub length: usize,
    pub kind: &'static str,
    pub special: bool,
    pub count: usize,
}

impl CsvRecord for OrbitRecord {
    const TABLE: &'static str = "orbits";
    const COLUMNS: &'static [&'static str] = &["replicate", "length", "kind", "special", "count"];
    fn check(&self) -> Result<(), String> {
        if self.length == 0 || self.count == 0 {
            return Err("orbit rows need positive length and count".into());
        }
        if self.special && self.kind != "cycle" {
            return Err("only cycles can be special".into());
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentRecord {
    pub class: &'static str,
    pub k: usize,
    pub p: f64,
    pub s: f64,
    pub theta: f64,
    pub closed_form: f64,
    pub mc_mean: f64,
    pub mc_stderr: f64,
    pub z: f64,
    /// Relative disagreement between the two closed-form routes.
    pub route_rel_diff: f64,
}

impl CsvRecord for MomentRecord {
    const TABLE: &'static str = "moments";
    const COLUMNS: &'static [&'static str] = &[
        "class",
        "k",
        "p",
        "s",
        "theta",
        "closed_form",
        "mc_mean",
        "mc_stderr",
        "z",
        "route_rel_diff",
    ];
    fn check(&self) -> Result<(), String> {
        finite("closed_form", self.closed_form)?;
        finite("mc_mean", self.mc_mean)?;
        finite("route_rel_diff", self.route_rel_diff)?;
        if !(self.mc_stderr >= 0.0) {
            return Err("mc_stderr must be non-negative".into());
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityRecord {
    pub n: usize,
    pub lambda: f64,
    pub replicate: usize,
    pub density: f64,
    pub size: usize,
}

impl CsvRecord for DensityRecord {
    const TABLE: &'static str = "density";
    const COLUMNS: &'static [&'static str] = &["n", "lambda", "replicate", "density", "size"];
    fn check(&self) -> Result<(), String> {
        finite("density", self.density)?;
        if self.size == 0 || self.size > self.n {
            return Err(format!("size {} outside 1..={}", self.size, self.n));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RhoRecord {
    pub n: usize,
    pub lambda: f64,
    pub replicates: usize,
    pub rho_raw: f64,
    pub rho_hat: f64,
    pub stderr: f64,
    pub size_q05: f64,
    pub size_q50: f64,
}

impl CsvRecord for RhoRecord {
    const TABLE: &'static str = "rho_curve";
    const COLUMNS: &'static [&'static str] = &[
        "n",
        "lambda",
        "replicates",
        "rho_raw",
        "rho_hat",
        "stderr",
        "size_q05",
        "size_q50",
    ];
    fn check(&self) -> Result<(), String> {
        finite("rho_raw", self.rho_raw)?;
        finite("rho_hat", self.rho_hat)?;
        fraction("size_q05", self.size_q05)?;
        fraction("size_q50", self.size_q50)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimateRecord {
    pub replicate: usize,
    pub n: usize,
    pub estimator: &'static str,
    pub overlap_fraction: f64,
    pub common_edges: usize,
    pub exhaustive: bool,
    pub budget_exhausted: bool,
    /// Reasonable-candidate verdict, when estimator constants were supplied.
    pub accepted: Option<bool>,
}

impl CsvRecord for EstimateRecord {
    const TABLE: &'static str = "estimate";
    const COLUMNS: &'static [&'static str] = &[
        "replicate",
        "n",
        "estimator",
        "overlap_fraction",
        "common_edges",
        "exhaustive",
        "budget_exhausted",
        "accepted",
    ];
    fn check(&self) -> Result<(), String> {
        fraction("overlap_fraction", self.overlap_fraction)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PosteriorRecord {
    pub replicate: usize,
    pub n: usize,
    pub posterior_at_truth: f64,
    pub max_atom: f64,
    /// Largest posterior mass of a `⌈δn⌉`-overlap neighbourhood.
    pub w: f64,
    /// Overlap fraction of the posterior mode with the truth.
    pub mode_overlap: f64,
}

impl CsvRecord for PosteriorRecord {
    const TABLE: &'static str = "posterior";
    const COLUMNS: &'static [&'static str] = &["replicate", "n", "posterior_at_truth", "max_atom", "w", "mode_overlap"];
    fn check(&self) -> Result<(), String> {
        fraction("posterior_at_truth", self.posterior_at_truth)?;
        fraction("max_atom", self.max_atom)?;
        if !(self.w >= 0.0 && self.w <= 1.0 + 1e-9) {
            return Err(format!("w = {} not in [0,1]", self.w));
        }
        fraction("mode_overlap", self.mode_overlap)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TvRecord {
    pub n: usize,
    pub p: f64,
    pub s: f64,
    pub method: &'static str,
    pub estimate: f64,
    pub stderr: f64,
    pub replicates: usize,
}

impl CsvRecord for TvRecord {
    const TABLE: &'static str = "tv";
    const COLUMNS: &'static [&'static str] = &["n", "p", "s", "method", "estimate", "stderr", "replicates"];
    fn check(&self) -> Result<(), String> {
        fraction("estimate", self.estimate)?;
        finite("stderr", self.stderr)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AdmissibilityRecord {
    pub n: usize,
    pub lambda: f64,
    pub replicate: usize,
    pub seed: u64,
    /// `pass`, `fail` or `undecided`.
    pub admissible: &'static str,
    pub global_density: &'static str,
    pub small_set_density: &'static str,
    pub max_degree: &'static str,
    pub local_unicyclic: &'static str,
    pub cycle_counts: &'static str,
    pub observed_max_degree: usize,
    pub witnesses_ok: bool,
}

impl CsvRecord for AdmissibilityRecord {
    const TABLE: &'static str = "admissibility";
    const COLUMNS: &'static [&'static str] = &[
        "n",
        "lambda",
        "replicate",
        "seed",
        "admissible",
        "global_density",
        "small_set_density",
        "max_degree",
        "local_unicyclic",
        "cycle_counts",
        "observed_max_degree",
        "witnesses_ok",
    ];
    fn check(&self) -> Result<(), String> {
        let statuses = [
            self.admissible,
            self.global_density,
            self.small_set_density,
            self.max_degree,
            self.local_unicyclic,
            self.cycle_counts,
        ];
        if statuses.iter().any(|s| !matches!(*s, "pass" | "fail" | "undecided")) {
            return Err("status must be pass, fail or undecided".into());
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRecord {
    pub lambda: f64,
    pub n: usize,
    pub replicate: usize,
    pub seed: u64,
    pub estimator: &'static str,
    pub overlap_fraction: f64,
    pub accepted: bool,
    /// `η` used by the reasonable-candidate check; empty below the threshold, where no
    /// admissible `η` exists and the check is not run.
    pub eta: Option<f64>,
    pub wall_time_ms: Option<f64>,
}

impl CsvRecord for SweepRecord {
    const TABLE: &'static str = "threshold_sweep";
    const COLUMNS: &'static [&'static str] = &[
        "lambda",
        "n",
        "replicate",
        "seed",
        "estimator",
        "overlap_fraction",
        "accepted",
        "eta",
        "wall_time_ms",
    ];
    fn check(&self) -> Result<(), String> {
        fraction("overlap_fraction", self.overlap_fraction)?;
        if self.eta.is_none() && self.accepted {
            return Err("a subcritical row cannot be accepted".into());
        }
        Ok(())
    }
}
