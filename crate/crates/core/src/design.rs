//! Regression specifications, dummy coding and design matrices.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::data::Variables;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// Dummy coding of one categorical variable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DummySpec {
    pub variable: String,
    /// Every admissible code with the column name its indicator gets, in
    /// emission order.
    pub levels: Vec<(i64, String)>,
    /// Omitted category; never emits a column.
    pub base_code: i64,
}

impl DummySpec {
    /// The standard coding for a micro variable, with its default base group.
    pub fn standard(variable: &str) -> Option<Self> {
        let (levels, base): (&[(i64, &str)], i64) = match variable {
            "sex" => (&[(1, "d_male"), (0, "d_female")], 0),
            "health" => (
                &[(4, "d_excellent"), (3, "d_good"), (1, "d_poor"), (2, "d_fair")],
                2,
            ),
            "marital" => (&[(2, "d_married"), (0, "d_DWS"), (1, "d_never")], 1),
            "workstatus" => (&[(2, "d_work"), (1, "d_unemp"), (0, "d_nilf")], 0),
            "income" => (
                &[
                    (2, "d_income2"),
                    (3, "d_income3"),
                    (4, "d_income4"),
                    (5, "d_income5"),
                    (6, "d_income6"),
                    (1, "d_income1"),
                ],
                1,
            ),
            "race" => (&[(1, "d_white"), (2, "d_black"), (3, "d_other")], 3),
            _ => return None,
        };
        Some(Self {
            variable: variable.to_string(),
            levels: levels.iter().map(|&(c, n)| (c, n.to_string())).collect(),
            base_code: base,
        })
    }

    pub fn with_base(mut self, base_code: i64) -> Result<Self> {
        if !self.levels.iter().any(|(c, _)| *c == base_code) {
            return Err(Error::InvalidArgument(format!(
                "base code {base_code} is not a level of `{}`",
                self.variable
            )));
        }
        self.base_code = base_code;
        Ok(self)
    }

    /// Levels that emit a column.
    pub fn emitted(&self) -> impl Iterator<Item = &(i64, String)> {
        self.levels.iter().filter(move |(c, _)| *c != self.base_code)
    }
}

/// A categorical regressor and (optionally) a non-default base group.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoricalTerm {
    pub variable: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<i64>,
}

impl CategoricalTerm {
    pub fn new(variable: impl Into<String>) -> Self {
        Self {
            variable: variable.into(),
            base: None,
        }
    }

    pub fn dummy_spec(&self) -> Result<DummySpec> {
        let spec = DummySpec::standard(&self.variable)
            .ok_or_else(|| Error::UnknownVariable(self.variable.clone()))?;
        match self.base {
            Some(b) => spec.with_base(b),
            None => Ok(spec),
        }
    }
}

fn default_true() -> bool {
    true
}

fn default_significance() -> f64 {
    0.05
}

/// Declarative regression specification, read from `spec.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub dependent: String,
    #[serde(default)]
    pub continuous: Vec<String>,
    #[serde(default)]
    pub categorical: Vec<CategoricalTerm>,
    /// Year-level indicators attached to every respondent (pooled fits only).
    #[serde(default)]
    pub macro_regressors: Vec<String>,
    #[serde(default)]
    pub include_time_dummies: bool,
    #[serde(default)]
    pub include_trend: bool,
    #[serde(default = "default_true")]
    pub include_constant: bool,
    /// Two-sided significance level for the `*` flags.
    #[serde(default = "default_significance")]
    pub significance: f64,
}

impl ModelSpec {
    /// Respondent-level specification: age, children, schooling and the six
    /// categorical blocks with their default base groups, no time dummies.
    pub fn standard_micro() -> Self {
        Self {
            dependent: "happy".into(),
            continuous: vec!["age".into(), "childs".into(), "educ".into()],
            categorical: ["sex", "health", "marital", "workstatus", "income", "race"]
                .into_iter()
                .map(CategoricalTerm::new)
                .collect(),
            macro_regressors: Vec::new(),
            include_time_dummies: false,
            include_trend: false,
            include_constant: true,
            significance: 0.05,
        }
    }

    pub fn with_time_dummies(mut self, on: bool) -> Self {
        self.include_time_dummies = on;
        self
    }

    pub fn with_macro_regressors(mut self, names: &[&str]) -> Self {
        self.macro_regressors = names.iter().map(|s| s.to_string()).collect();
        self
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ModelSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let regressors = self
            .continuous
            .iter()
            .chain(self.macro_regressors.iter())
            .chain(self.categorical.iter().map(|c| &c.variable));
        let mut seen = std::collections::BTreeSet::new();
        for r in regressors {
            if *r == self.dependent {
                return Err(Error::InvalidArgument(format!(
                    "dependent variable `{r}` also listed as a regressor"
                )));
            }
            if !seen.insert(r.as_str()) {
                return Err(Error::InvalidArgument(format!("regressor `{r}` listed twice")));
            }
        }
        for c in &self.categorical {
            c.dummy_spec()?;
        }
        if self.include_time_dummies {
            if let Some(m) = self.macro_regressors.first() {
                return Err(Error::Collinearity("time dummies".into(), m.clone()));
            }
        }
        if !(self.significance > 0.0 && self.significance < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "significance level {} outside (0, 1)",
                self.significance
            )));
        }
        Ok(())
    }
}

/// Where a design column came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnKind {
    Constant,
    Continuous { variable: String },
    Dummy { variable: String, code: i64 },
    TimeDummy { year: i32 },
    Trend,
    Macro { variable: String },
}

/// What to do with a dummy column that is identically zero in the data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EmptyDummyPolicy {
    #[default]
    Error,
    /// Omit the column and record its name in [`DesignMatrix::dropped`].
    Drop,
}

/// Regressor matrix plus dependent vector, with per-column provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix<T> {
    names: Vec<String>,
    kinds: Vec<ColumnKind>,
    x: Matrix<T>,
    y: Vec<T>,
    dropped: Vec<String>,
}

impl<T: Scalar> DesignMatrix<T> {
    /// Assembles a design from named columns. A column of kind
    /// [`ColumnKind::Constant`] must come first if present.
    pub fn new(columns: Vec<(String, ColumnKind, Vec<T>)>, y: Vec<T>) -> Result<Self> {
        let n = y.len();
        let mut names = Vec::with_capacity(columns.len());
        let mut kinds = Vec::with_capacity(columns.len());
        let mut data = Vec::with_capacity(columns.len());
        for (i, (name, kind, col)) in columns.into_iter().enumerate() {
            if col.len() != n {
                return Err(Error::InvalidArgument(format!(
                    "column `{name}` has {} rows, dependent has {n}",
                    col.len()
                )));
            }
            if kind == ColumnKind::Constant && i != 0 {
                return Err(Error::InvalidArgument(
                    "the constant must be the first column".into(),
                ));
            }
            names.push(name);
            kinds.push(kind);
            data.push(col);
        }
        let mut x = Matrix::from_columns(&data);
        if data.is_empty() {
            x = Matrix::zeros(n, 0);
        }
        Ok(Self {
            names,
            kinds,
            x,
            y,
            dropped: Vec::new(),
        })
    }

    /// Design with a leading constant and the given named regressors.
    pub fn with_constant(regressors: Vec<(String, Vec<T>)>, y: Vec<T>) -> Result<Self> {
        let n = y.len();
        let mut cols = vec![("_cons".to_string(), ColumnKind::Constant, vec![T::one(); n])];
        cols.extend(regressors.into_iter().map(|(name, c)| {
            let kind = ColumnKind::Continuous {
                variable: name.clone(),
            };
            (name, kind, c)
        }));
        Self::new(cols, y)
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn k(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn kinds(&self) -> &[ColumnKind] {
        &self.kinds
    }

    pub fn x(&self) -> &Matrix<T> {
        &self.x
    }

    pub fn y(&self) -> &[T] {
        &self.y
    }

    /// Columns omitted by [`EmptyDummyPolicy::Drop`].
    pub fn dropped(&self) -> &[String] {
        &self.dropped
    }

    pub fn has_constant(&self) -> bool {
        self.kinds.first() == Some(&ColumnKind::Constant)
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn column(&self, name: &str) -> Option<&[T]> {
        self.column_index(name).map(|j| self.x.column(j))
    }

    /// Same regressors, different dependent vector.
    pub fn with_dependent(mut self, y: Vec<T>) -> Result<Self> {
        if y.len() != self.n() {
            return Err(Error::InvalidArgument(format!(
                "dependent has {} rows, design has {}",
                y.len(),
                self.n()
            )));
        }
        self.y = y;
        Ok(self)
    }

    /// Drops the constant column, if any.
    pub fn without_constant(&self) -> Self {
        if !self.has_constant() {
            return self.clone();
        }
        let keep: Vec<usize> = (1..self.k()).collect();
        self.select_columns(&keep)
    }

    /// Keeps the listed columns in order.
    pub fn select_columns(&self, keep: &[usize]) -> Self {
        Self {
            names: keep.iter().map(|&j| self.names[j].clone()).collect(),
            kinds: keep.iter().map(|&j| self.kinds[j].clone()).collect(),
            x: self.x.select_columns(keep),
            y: self.y.clone(),
            dropped: self.dropped.clone(),
        }
    }

    /// Keeps the listed rows in order.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        Self {
            names: self.names.clone(),
            kinds: self.kinds.clone(),
            x: self.x.select_rows(rows),
            y: rows.iter().map(|&i| self.y[i]).collect(),
            dropped: self.dropped.clone(),
        }
    }

    /// Rejects identically-zero columns and exact duplicate column pairs.
    pub fn check_columns(&self) -> Result<()> {
        for (j, c) in self.x.columns().enumerate() {
            if c.iter().all(|&v| v == T::zero()) {
                return Err(Error::RankDeficient {
                    column: self.names[j].clone(),
                    other: "(identically zero)".into(),
                });
            }
        }
        for j in 1..self.k() {
            for i in 0..j {
                if self.x.column(i) == self.x.column(j) {
                    return Err(Error::RankDeficient {
                        column: self.names[j].clone(),
                        other: self.names[i].clone(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Column means.
    pub fn column_means(&self) -> Vec<T> {
        let n = T::from_usize_lossy(self.n());
        self.x
            .columns()
            .map(|c| c.iter().copied().sum::<T>() / n)
            .collect()
    }
}

/// Consecutive rank (1, 2, ...) of each observation's year among the
/// distinct years present.
fn year_index(years: &[i32]) -> Vec<usize> {
    let mut distinct: Vec<i32> = years.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    let rank: BTreeMap<i32, usize> = distinct.iter().enumerate().map(|(i, &y)| (y, i + 1)).collect();
    years.iter().map(|y| rank[y]).collect()
}

/// Column label for the time dummy of `year`, e.g. `d_74`, `d_04`.
pub fn time_dummy_name(year: i32) -> String {
    format!("d_{:02}", year.rem_euclid(100))
}

/// Builds the design for `spec` from `data`.
///
/// Column order: constant, continuous regressors, dummies (spec order, then
/// each variable's level order), macro regressors, time dummies (ascending
/// year, first year omitted), trend.
pub fn encode_design_matrix<T: Scalar, D: Variables + ?Sized>(
    data: &D,
    spec: &ModelSpec,
    policy: EmptyDummyPolicy,
) -> Result<DesignMatrix<T>> {
    spec.validate()?;
    let n = data.n_obs();
    let lookup = |name: &str| -> Result<Vec<f64>> {
        data.values(name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    };
    let to_t = |v: Vec<f64>| -> Vec<T> { v.into_iter().map(T::lit).collect() };

    let y = to_t(lookup(&spec.dependent)?);
    let mut cols: Vec<(String, ColumnKind, Vec<T>)> = Vec::new();
    let mut dropped = Vec::new();

    if spec.include_constant {
        cols.push(("_cons".into(), ColumnKind::Constant, vec![T::one(); n]));
    }
    for name in &spec.continuous {
        let kind = ColumnKind::Continuous {
            variable: name.clone(),
        };
        cols.push((name.clone(), kind, to_t(lookup(name)?)));
    }
    for term in &spec.categorical {
        let dummy = term.dummy_spec()?;
        let raw = lookup(&term.variable)?;
        for (code, label) in dummy.emitted() {
            let col: Vec<T> = raw
                .iter()
                .map(|&v| if v as i64 == *code { T::one() } else { T::zero() })
                .collect();
            if col.iter().all(|&v| v == T::zero()) {
                match policy {
                    EmptyDummyPolicy::Error => return Err(Error::EmptyDummy(label.clone())),
                    EmptyDummyPolicy::Drop => {
                        dropped.push(label.clone());
                        continue;
                    }
                }
            }
            let kind = ColumnKind::Dummy {
                variable: term.variable.clone(),
                code: *code,
            };
            cols.push((label.clone(), kind, col));
        }
    }
    for name in &spec.macro_regressors {
        let kind = ColumnKind::Macro {
            variable: name.clone(),
        };
        cols.push((name.clone(), kind, to_t(lookup(name)?)));
    }
    let years = data.observation_years();
    if spec.include_time_dummies {
        let mut distinct = years.clone();
        distinct.sort_unstable();
        distinct.dedup();
        for &yr in distinct.iter().skip(1) {
            let col = years
                .iter()
                .map(|&y| if y == yr { T::one() } else { T::zero() })
                .collect();
            cols.push((time_dummy_name(yr), ColumnKind::TimeDummy { year: yr }, col));
        }
    }
    if spec.include_trend {
        let idx = year_index(&years);
        cols.push((
            "t".into(),
            ColumnKind::Trend,
            idx.into_iter().map(T::from_usize_lossy).collect(),
        ));
    }

    let mut design = DesignMatrix::new(cols, y)?;
    design.dropped = dropped;
    Ok(design)
}
