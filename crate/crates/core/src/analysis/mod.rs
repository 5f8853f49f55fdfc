//! Regression of classifier generalization ability (GA) on dataset
//! intrinsic dimension (ID), optionally with `ln N_train` as a second
//! predictor.

pub mod ols;

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Radiological,
    Natural,
    Other,
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Domain::Radiological => "radiological",
            Domain::Natural => "natural",
            Domain::Other => "other",
        })
    }
}

/// One trained-model outcome: a dataset's ID and the test accuracy reached
/// after fitting `n_train` training examples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub dataset: String,
    #[serde(rename = "domain")]
    pub domain: Domain,
    pub intrinsic_dim: f64,
    pub generalization_ability: f64,
    pub n_train: u64,
    pub model: String,
}

impl ExperimentRecord {
    fn validate(&self) -> std::result::Result<(), String> {
        if !(self.intrinsic_dim.is_finite() && self.intrinsic_dim > 0.0) {
            return Err(format!(
                "intrinsic_dim must be positive, got {}",
                self.intrinsic_dim
            ));
        }
        if !(0.0..=1.0).contains(&self.generalization_ability) {
            return Err(format!(
                "generalization_ability must lie in [0, 1], got {}",
                self.generalization_ability
            ));
        }
        if self.n_train == 0 {
            return Err("n_train must be at least 1".into());
        }
        Ok(())
    }

    pub fn log_n_train(&self) -> f64 {
        (self.n_train as f64).ln()
    }
}

pub const RESULTS_HEADER: [&str; 6] = [
    "dataset",
    "domain",
    "intrinsic_dim",
    "generalization_ability",
    "n_train",
    "model",
];

pub fn load_records(path: impl AsRef<Path>) -> Result<Vec<ExperimentRecord>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    load_records_from_reader(file)
}

pub fn load_records_from_reader<R: Read>(reader: R) -> Result<Vec<ExperimentRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::MalformedResults {
            line: 1,
            reason: e.to_string(),
        })?
        .clone();
    if headers.iter().ne(RESULTS_HEADER.iter().copied()) {
        return Err(Error::MalformedResults {
            line: 1,
            reason: format!("expected header `{}`", RESULTS_HEADER.join(",")),
        });
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::MalformedResults {
            line: e.position().map_or(0, |p| p.line()),
            reason: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let parsed: ExperimentRecord =
            rec.deserialize(Some(&headers))
                .map_err(|e| Error::MalformedResults {
                    line,
                    reason: e.to_string(),
                })?;
        parsed
            .validate()
            .map_err(|reason| Error::MalformedResults { line, reason })?;
        out.push(parsed);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FitMode {
    /// `GA = a·ID + b`.
    #[default]
    Simple,
    /// `GA = a₁·ID + a₂·ln N_train + b`.
    Multiple,
}

impl FromStr for FitMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "simple" => Ok(FitMode::Simple),
            "multi" | "multiple" => Ok(FitMode::Multiple),
            other => Err(Error::Usage(format!("unknown fit mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegressionFit {
    /// Slope of GA against ID.
    pub slope_id: f64,
    /// Slope of GA against `ln N_train`, for multiple fits.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slope_logn: Option<f64>,
    pub intercept: f64,
    pub r_squared: f64,
    pub n_records: usize,
    pub residuals: Vec<f64>,
    pub degenerate_response: bool,
}

impl RegressionFit {
    fn from_linear(fit: ols::LinearFit<f64>, n_records: usize) -> Self {
        if fit.degenerate_response {
            log::warn!("response has no variance across {n_records} records; R² reported as 0");
        }
        RegressionFit {
            slope_id: fit.slopes[0],
            slope_logn: fit.slopes.get(1).copied(),
            intercept: fit.intercept,
            r_squared: fit.r_squared,
            n_records,
            residuals: fit.residuals,
            degenerate_response: fit.degenerate_response,
        }
    }

    pub fn predict(&self, record: &ExperimentRecord) -> f64 {
        self.intercept
            + self.slope_id * record.intrinsic_dim
            + self.slope_logn.map_or(0.0, |a| a * record.log_n_train())
    }
}

fn columns(records: &[ExperimentRecord]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let id = records.iter().map(|r| r.intrinsic_dim).collect();
    let logn = records.iter().map(ExperimentRecord::log_n_train).collect();
    let ga = records.iter().map(|r| r.generalization_ability).collect();
    (id, logn, ga)
}

pub fn fit_simple(records: &[ExperimentRecord]) -> Result<RegressionFit> {
    let (id, _, ga) = columns(records);
    Ok(RegressionFit::from_linear(
        ols::simple(&id, &ga)?,
        records.len(),
    ))
}

pub fn fit_multiple(records: &[ExperimentRecord]) -> Result<RegressionFit> {
    let (id, logn, ga) = columns(records);
    Ok(RegressionFit::from_linear(
        ols::multiple(&[&id, &logn], &ga)?,
        records.len(),
    ))
}

pub fn fit(records: &[ExperimentRecord], mode: FitMode) -> Result<RegressionFit> {
    match mode {
        FitMode::Simple => fit_simple(records),
        FitMode::Multiple => fit_multiple(records),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupBy {
    Domain,
    ModelNTrain,
}

impl GroupBy {
    pub fn key(&self, r: &ExperimentRecord) -> String {
        match self {
            GroupBy::Domain => r.domain.to_string(),
            GroupBy::ModelNTrain => format!("{}/{}", r.model, r.n_train),
        }
    }
}

impl FromStr for GroupBy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "domain" => Ok(GroupBy::Domain),
            "model-ntrain" | "model_n_train" => Ok(GroupBy::ModelNTrain),
            other => Err(Error::Usage(format!("unknown grouping {other:?}"))),
        }
    }
}

/// Mean and sample standard deviation of fit statistics across groups.
/// Groups are weighted equally regardless of size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupSummary {
    pub n_groups: usize,
    pub r_squared_mean: f64,
    /// `None` with fewer than two groups.
    pub r_squared_std: Option<f64>,
    pub slope_id_mean: f64,
    pub slope_id_std: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupedFits {
    pub group_by: GroupBy,
    pub mode: FitMode,
    pub fits: BTreeMap<String, RegressionFit>,
    pub summary: GroupSummary,
}

fn mean_std(values: &[f64]) -> (f64, Option<f64>) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = (values.len() > 1)
        .then(|| (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt());
    (mean, std)
}

pub fn group_records(
    records: &[ExperimentRecord],
    group_by: GroupBy,
) -> BTreeMap<String, Vec<&ExperimentRecord>> {
    let mut groups: BTreeMap<String, Vec<&ExperimentRecord>> = BTreeMap::new();
    for r in records {
        groups.entry(group_by.key(r)).or_default().push(r);
    }
    groups
}

pub fn group_fits(
    records: &[ExperimentRecord],
    group_by: GroupBy,
    mode: FitMode,
) -> Result<GroupedFits> {
    if records.is_empty() {
        return Err(Error::TooFewRecords { needed: 2, got: 0 });
    }
    let mut fits = BTreeMap::new();
    for (key, members) in group_records(records, group_by) {
        let owned: Vec<ExperimentRecord> = members.into_iter().cloned().collect();
        let f = fit(&owned, mode).map_err(|e| Error::Group {
            group: key.clone(),
            source: Box::new(e),
        })?;
        fits.insert(key, f);
    }
    let r2: Vec<f64> = fits.values().map(|f| f.r_squared).collect();
    let slopes: Vec<f64> = fits.values().map(|f| f.slope_id).collect();
    let (r_squared_mean, r_squared_std) = mean_std(&r2);
    let (slope_id_mean, slope_id_std) = mean_std(&slopes);
    Ok(GroupedFits {
        group_by,
        mode,
        summary: GroupSummary {
            n_groups: fits.len(),
            r_squared_mean,
            r_squared_std,
            slope_id_mean,
            slope_id_std,
        },
        fits,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlotRow {
    pub x: f64,
    pub y: f64,
    pub group: String,
    pub fitted_y: f64,
}

/// One row per record: ID on x, GA on y, and the value predicted by the
/// record's group fit (`group` is `"all"` when `group_by` is `None`).
pub fn plot_rows(
    records: &[ExperimentRecord],
    group_by: Option<GroupBy>,
    fits: &BTreeMap<String, RegressionFit>,
) -> Vec<PlotRow> {
    records
        .iter()
        .filter_map(|r| {
            let group = group_by.map_or_else(|| "all".to_string(), |g| g.key(r));
            fits.get(&group).map(|f| PlotRow {
                x: r.intrinsic_dim,
                y: r.generalization_ability,
                fitted_y: f.predict(r),
                group,
            })
        })
        .collect()
}

pub fn write_plot_csv<W: Write>(w: W, rows: &[PlotRow]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for r in rows {
        wtr.serialize(r)
            .map_err(|e| Error::io("<plot csv>", std::io::Error::other(e)))?;
    }
    wtr.flush().map_err(|e| Error::io("<plot csv>", e))
}
