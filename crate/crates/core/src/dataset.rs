//! The data bundle every method consumes: a design matrix, a response, and —
//! in simulation — the ground truth behind them.

use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::{dot, Mat};

/// Ground truth attached to simulated data. `f_star` holds the signal values
/// `f*(X_i)` (for classification, the clamped success probability), and
/// `epsilon` the realized noise, so that `f_star + epsilon = Y`.
#[derive(Clone, Debug)]
pub struct Truth {
    pub beta_star: Option<Vec<f64>>,
    pub epsilon: Vec<f64>,
    pub f_star: Vec<f64>,
}

/// Population covariance of one design row, used only for population-risk
/// evaluation when the design law is known.
#[derive(Clone, Debug)]
pub enum PopCovariance {
    Identity,
    /// 1 on the diagonal, `a` on the first off-diagonals, `b` on the second.
    Banded {
        a: f64,
        b: f64,
    },
    /// Full symmetric matrix, row-major `p * p`.
    Dense {
        p: usize,
        data: Vec<f64>,
    },
}

impl PopCovariance {
    /// `v' Gamma v`.
    pub fn quadratic_form(&self, v: &[f64]) -> f64 {
        match self {
            PopCovariance::Identity => dot(v, v),
            PopCovariance::Banded { a, b } => {
                let p = v.len();
                let mut q = dot(v, v);
                for j in 0..p.saturating_sub(1) {
                    q += 2.0 * a * v[j] * v[j + 1];
                }
                for j in 0..p.saturating_sub(2) {
                    q += 2.0 * b * v[j] * v[j + 2];
                }
                q
            }
            PopCovariance::Dense { p, data } => {
                let mut q = 0.0;
                for i in 0..*p {
                    let row = &data[i * p..(i + 1) * p];
                    q += v[i] * dot(row, v);
                }
                q
            }
        }
    }

    pub fn dim_matches(&self, p: usize) -> bool {
        match self {
            PopCovariance::Identity | PopCovariance::Banded { .. } => true,
            PopCovariance::Dense { p: dp, .. } => *dp == p,
        }
    }

    fn validate(&self) -> Result<()> {
        if let PopCovariance::Dense { p, data } = self {
            if data.len() != p * p {
                return Err(Error::contract("dense covariance is not p x p"));
            }
            for i in 0..*p {
                for j in 0..i {
                    if (data[i * p + j] - data[j * p + i]).abs() > 1e-12 {
                        return Err(Error::contract(format!(
                            "covariance asymmetric at ({i},{j})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Design matrix plus response, optionally carrying simulation ground truth
/// and the population covariance. Immutable after construction.
#[derive(Clone, Debug)]
pub struct Dataset {
    x: Mat,
    y: Vec<f64>,
    truth: Option<Truth>,
    gamma: Option<PopCovariance>,
    column_names: Option<Vec<String>>,
}

impl Dataset {
    pub fn new(x: Mat, y: Vec<f64>) -> Result<Self> {
        if y.len() != x.n_rows() {
            return Err(Error::contract(format!(
                "response length {} does not match {} rows",
                y.len(),
                x.n_rows()
            )));
        }
        if !x.is_finite() || !y.iter().all(|v| v.is_finite()) {
            return Err(Error::Dataset(
                "non-finite entry in design or response".into(),
            ));
        }
        Ok(Dataset {
            x,
            y,
            truth: None,
            gamma: None,
            column_names: None,
        })
    }

    /// Attach ground truth; enforces `f_star + epsilon = Y` elementwise.
    pub fn with_truth(mut self, truth: Truth) -> Result<Self> {
        let n = self.n();
        if truth.epsilon.len() != n || truth.f_star.len() != n {
            return Err(Error::contract("truth vectors must have length n"));
        }
        if let Some(b) = &truth.beta_star {
            if b.len() != self.p() {
                return Err(Error::contract("beta_star must have length p"));
            }
        }
        for i in 0..n {
            let sum = truth.f_star[i] + truth.epsilon[i];
            let scale = self.y[i].abs().max(1.0);
            if (sum - self.y[i]).abs() > 1e-10 * scale {
                return Err(Error::Dataset(format!(
                    "f_star + epsilon differs from Y at row {i}: {} vs {}",
                    sum, self.y[i]
                )));
            }
        }
        self.truth = Some(truth);
        Ok(self)
    }

    pub fn with_population_covariance(mut self, gamma: PopCovariance) -> Result<Self> {
        gamma.validate()?;
        if !gamma.dim_matches(self.p()) {
            return Err(Error::contract("covariance dimension does not match p"));
        }
        self.gamma = Some(gamma);
        Ok(self)
    }

    pub fn with_column_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.p() {
            return Err(Error::contract("need one name per column"));
        }
        self.column_names = Some(names);
        Ok(self)
    }

    /// New dataset whose design has a leading all-ones column. Ground truth
    /// carries over; `beta_star` is dropped since its indexing shifts.
    pub fn with_intercept_column(&self) -> Dataset {
        let x = self.x.with_intercept_column();
        let names = self.column_names.as_ref().map(|ns| {
            let mut out = vec!["(intercept)".to_string()];
            out.extend(ns.iter().cloned());
            out
        });
        Dataset {
            x,
            y: self.y.clone(),
            truth: self.truth.as_ref().map(|t| Truth {
                beta_star: None,
                epsilon: t.epsilon.clone(),
                f_star: t.f_star.clone(),
            }),
            gamma: None,
            column_names: names,
        }
    }

    #[inline]
    pub fn x(&self) -> &Mat {
        &self.x
    }

    #[inline]
    pub fn y(&self) -> &[f64] {
        &self.y
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.x.n_rows()
    }

    #[inline]
    pub fn p(&self) -> usize {
        self.x.n_cols()
    }

    pub fn truth(&self) -> Option<&Truth> {
        self.truth.as_ref()
    }

    pub fn gamma(&self) -> Option<&PopCovariance> {
        self.gamma.as_ref()
    }

    pub fn column_names(&self) -> Option<&[String]> {
        self.column_names.as_deref()
    }

    pub fn column_name(&self, j: usize) -> String {
        match &self.column_names {
            Some(ns) => ns[j].clone(),
            None => format!("x{}", j + 1),
        }
    }

    /// Restrict to a subset of observations (used by cross-validation folds).
    pub fn select_rows(&self, rows: &[usize]) -> Result<Dataset> {
        let x = self.x.select_rows(rows);
        let y = rows.iter().map(|&i| self.y[i]).collect();
        let mut d = Dataset::new(x, y)?;
        d.column_names = self.column_names.clone();
        Ok(d)
    }

    /// Read a dataset from CSV: header row gives column names, the first
    /// column is the response. Columns named `f_star` and `epsilon` are
    /// treated as ground truth rather than covariates.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Dataset> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers: Vec<String> = rdr.headers()?.iter().map(|h| h.to_string()).collect();
        if headers.len() < 2 {
            return Err(Error::Dataset(
                "CSV needs a response column and at least one covariate".into(),
            ));
        }
        let mut f_star_idx = None;
        let mut epsilon_idx = None;
        let mut covariate_idx = Vec::new();
        for (k, name) in headers.iter().enumerate().skip(1) {
            match name.as_str() {
                "f_star" => f_star_idx = Some(k),
                "epsilon" => epsilon_idx = Some(k),
                _ => covariate_idx.push(k),
            }
        }
        if covariate_idx.is_empty() {
            return Err(Error::Dataset("CSV has no covariate columns".into()));
        }
        if f_star_idx.is_some() != epsilon_idx.is_some() {
            return Err(Error::Dataset(
                "truth columns must appear as a pair: f_star and epsilon".into(),
            ));
        }

        let mut y = Vec::new();
        let mut f_star = Vec::new();
        let mut epsilon = Vec::new();
        let mut cols: Vec<Vec<f64>> = vec![Vec::new(); covariate_idx.len()];
        for (line, record) in rdr.records().enumerate() {
            let record = record?;
            if record.len() != headers.len() {
                return Err(Error::Dataset(format!(
                    "row {} has {} fields, expected {}",
                    line + 2,
                    record.len(),
                    headers.len()
                )));
            }
            let parse = |k: usize| -> Result<f64> {
                record[k].parse::<f64>().map_err(|_| {
                    Error::Dataset(format!(
                        "row {}, column '{}': cannot parse '{}'",
                        line + 2,
                        headers[k],
                        &record[k]
                    ))
                })
            };
            y.push(parse(0)?);
            if let Some(k) = f_star_idx {
                f_star.push(parse(k)?);
            }
            if let Some(k) = epsilon_idx {
                epsilon.push(parse(k)?);
            }
            for (c, &k) in covariate_idx.iter().enumerate() {
                cols[c].push(parse(k)?);
            }
        }
        if y.is_empty() {
            return Err(Error::Dataset("CSV has no data rows".into()));
        }

        let names: Vec<String> = covariate_idx.iter().map(|&k| headers[k].clone()).collect();
        let mut ds = Dataset::new(Mat::from_columns(cols)?, y)?.with_column_names(names)?;
        if f_star_idx.is_some() {
            ds = ds.with_truth(Truth {
                beta_star: None,
                epsilon,
                f_star,
            })?;
        }
        Ok(ds)
    }

    pub fn from_csv_path<P: AsRef<Path>>(path: P) -> Result<Dataset> {
        let file = std::fs::File::open(path)?;
        Dataset::from_csv_reader(std::io::BufReader::new(file))
    }
}
