//! The two-stage happiness regression.
//!
//! Stage one fits the respondent-level model separately for every survey
//! year; the intercept of each fit is that year's happiness net of the
//! socio-demographic composition of its respondents. Stage two regresses
//! those intercepts on national economic indicators.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::data::{MacroSeries, MicroDataset, Variables};
use crate::design::{encode_design_matrix, ColumnKind, DesignMatrix, EmptyDummyPolicy, ModelSpec};
use crate::diagnostics::difference;
use crate::error::{Error, Result};
use crate::ols::{ols_fit_at, OlsResult};
use crate::oprobit::{categories_from, ordered_probit_fit_with, OrderedProbitOptions, OrderedProbitResult};
use crate::scalar::Scalar;

/// Stage-one output for one survey year.
#[derive(Debug, Clone, PartialEq)]
pub struct YearEntry<T> {
    pub year: i32,
    /// Intercept of the year's respondent-level regression.
    pub beta0: T,
    pub n_year: usize,
    /// Dummy columns omitted because no respondent that year fell in them.
    pub dropped: Vec<String>,
}

/// Year → β̂₀, ascending by year.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct YearlyHappinessSeries<T> {
    entries: Vec<YearEntry<T>>,
}

impl<T: Scalar> YearlyHappinessSeries<T> {
    pub fn new(mut entries: Vec<YearEntry<T>>) -> Result<Self> {
        entries.sort_by_key(|e| e.year);
        if let Some(w) = entries.windows(2).find(|w| w[0].year == w[1].year) {
            return Err(Error::DuplicateYear {
                line: 0,
                year: w[0].year,
            });
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[YearEntry<T>] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn years(&self) -> Vec<i32> {
        self.entries.iter().map(|e| e.year).collect()
    }

    pub fn beta0(&self) -> Vec<T> {
        self.entries.iter().map(|e| e.beta0).collect()
    }

    pub fn get(&self, year: i32) -> Option<&YearEntry<T>> {
        self.entries.iter().find(|e| e.year == year)
    }

    pub fn mean_beta0(&self) -> T {
        self.entries.iter().map(|e| e.beta0).sum::<T>() / T::from_usize_lossy(self.len().max(1))
    }

    /// Adds `shift` to every intercept.
    pub fn shifted(&self, shift: T) -> Self {
        Self {
            entries: self
                .entries
                .iter()
                .map(|e| YearEntry {
                    beta0: e.beta0 + shift,
                    ..e.clone()
                })
                .collect(),
        }
    }

    /// `beta0.csv`: `year,beta0,n_year,dropped_columns`, dropped names
    /// separated by `;`. β̂₀ is written in shortest round-trip form.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("year,beta0,n_year,dropped_columns\n");
        for e in &self.entries {
            let _ = writeln!(
                s,
                "{},{},{},{}",
                e.year,
                e.beta0.as_f64(),
                e.n_year,
                e.dropped.join(";")
            );
        }
        s
    }
}

impl<T: Scalar> Variables for YearlyHappinessSeries<T> {
    fn n_obs(&self) -> usize {
        self.len()
    }

    fn variable_names(&self) -> Vec<String> {
        vec!["beta0".into()]
    }

    fn values(&self, name: &str) -> Option<Vec<f64>> {
        (name == "beta0").then(|| self.entries.iter().map(|e| e.beta0.as_f64()).collect())
    }

    fn observation_years(&self) -> Vec<i32> {
        self.years()
    }
}

/// Reads a `beta0.csv` written by [`YearlyHappinessSeries::to_csv`].
pub fn load_beta0_csv(path: impl AsRef<Path>) -> Result<YearlyHappinessSeries<f64>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(file);
    let csv_err = |e: csv::Error| Error::Csv {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    let headers = reader.headers().map_err(csv_err)?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.into()))
    };
    let (iy, ib, in_, id) = (col("year")?, col("beta0")?, col("n_year")?, col("dropped_columns").ok());
    let mut entries = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let line = i + 2;
        let cell = |j: usize, name: &str| -> Result<&str> {
            rec.get(j).ok_or_else(|| Error::Parse {
                line,
                column: name.into(),
                value: String::new(),
            })
        };
        let parse_err = |name: &str, v: &str| Error::Parse {
            line,
            column: name.into(),
            value: v.into(),
        };
        let y = cell(iy, "year")?;
        let b = cell(ib, "beta0")?;
        let n = cell(in_, "n_year")?;
        let beta0: f64 = b.parse().map_err(|_| parse_err("beta0", b))?;
        if !beta0.is_finite() {
            return Err(parse_err("beta0", b));
        }
        entries.push(YearEntry {
            year: y.parse().map_err(|_| parse_err("year", y))?,
            beta0,
            n_year: n.parse().map_err(|_| parse_err("n_year", n))?,
            dropped: id
                .and_then(|j| rec.get(j))
                .filter(|s| !s.is_empty())
                .map(|s| s.split(';').map(str::to_string).collect())
                .unwrap_or_default(),
        });
    }
    YearlyHappinessSeries::new(entries)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageOneOptions {
    /// Years with fewer usable respondents are skipped.
    pub min_obs: usize,
}

impl Default for StageOneOptions {
    fn default() -> Self {
        Self { min_obs: 100 }
    }
}

#[derive(Debug, Clone)]
pub struct YearFit<T> {
    pub design: DesignMatrix<T>,
    pub fit: OlsResult<T>,
}

#[derive(Debug, Clone)]
pub struct StageOne<T> {
    pub series: YearlyHappinessSeries<T>,
    pub fits: BTreeMap<i32, YearFit<T>>,
    /// Years present in the data but left out, with the reason.
    pub skipped: BTreeMap<i32, String>,
}

/// Fits `spec` separately for every survey year and collects the intercepts.
///
/// Years are fitted in parallel and merged in ascending order, so results do
/// not depend on scheduling. A year whose regression fails is skipped with a
/// recorded reason rather than aborting the run.
pub fn stage_one<T: Scalar>(
    micro: &MicroDataset,
    spec: &ModelSpec,
    options: StageOneOptions,
) -> Result<StageOne<T>> {
    stage_one_impl(micro, None, spec, options)
}

/// [`stage_one`] with the dependent variable replaced by `outcome`, one
/// value per row of `micro` in row order (e.g. a simulated latent outcome).
pub fn stage_one_with_outcome<T: Scalar>(
    micro: &MicroDataset,
    outcome: &[f64],
    spec: &ModelSpec,
    options: StageOneOptions,
) -> Result<StageOne<T>> {
    if outcome.len() != micro.len() {
        return Err(Error::InvalidArgument(format!(
            "outcome has {} values for {} rows",
            outcome.len(),
            micro.len()
        )));
    }
    stage_one_impl(micro, Some(outcome), spec, options)
}

fn stage_one_impl<T: Scalar>(
    micro: &MicroDataset,
    outcome: Option<&[f64]>,
    spec: &ModelSpec,
    options: StageOneOptions,
) -> Result<StageOne<T>> {
    spec.validate()?;
    if spec.include_time_dummies || spec.include_trend {
        return Err(Error::InvalidArgument(
            "stage one fits each year separately; time dummies and trend must be off".into(),
        ));
    }
    if !spec.include_constant {
        return Err(Error::InvalidArgument(
            "stage one needs a constant: the intercept is the yearly happiness measure".into(),
        ));
    }
    if !spec.macro_regressors.is_empty() {
        return Err(Error::InvalidArgument(
            "macro regressors are constant within a year and cannot enter stage one".into(),
        ));
    }

    let years = micro.distinct_years();
    let outcomes: Vec<(i32, std::result::Result<(YearEntry<T>, YearFit<T>), String>)> = years
        .par_iter()
        .map(|&year| {
            let slice = micro.year_slice(year);
            let n = slice.len();
            let outcome = if n < options.min_obs {
                Err(format!("{n} observations, below the minimum of {}", options.min_obs))
            } else {
                let y = outcome.map(|o| {
                    micro
                        .records()
                        .iter()
                        .zip(o)
                        .filter(|(r, _)| r.year == year)
                        .map(|(_, &v)| T::lit(v))
                        .collect::<Vec<T>>()
                });
                fit_year(&slice, y, spec)
                    .map(|(design, fit)| {
                        let entry = YearEntry {
                            year,
                            beta0: fit.coefficients[0],
                            n_year: n,
                            dropped: design.dropped().to_vec(),
                        };
                        (entry, YearFit { design, fit })
                    })
                    .map_err(|e| e.to_string())
            };
            (year, outcome)
        })
        .collect();

    let mut entries = Vec::new();
    let mut fits = BTreeMap::new();
    let mut skipped = BTreeMap::new();
    for (year, outcome) in outcomes {
        match outcome {
            Ok((entry, fit)) => {
                entries.push(entry);
                fits.insert(year, fit);
            }
            Err(reason) => {
                skipped.insert(year, reason);
            }
        }
    }
    if entries.is_empty() {
        return Err(Error::NoQualifyingYear {
            min_obs: options.min_obs,
        });
    }
    Ok(StageOne {
        series: YearlyHappinessSeries::new(entries)?,
        fits,
        skipped,
    })
}

fn fit_year<T: Scalar>(
    slice: &MicroDataset,
    outcome: Option<Vec<T>>,
    spec: &ModelSpec,
) -> Result<(DesignMatrix<T>, OlsResult<T>)> {
    let mut design = encode_design_matrix(slice, spec, EmptyDummyPolicy::Drop)?;
    if let Some(y) = outcome {
        design = design.with_dependent(y)?;
    }
    let fit = ols_fit_at(&design, spec.significance)?;
    Ok((design, fit))
}

/// |β̂₀ − (ȳ − Σ_j β̂_j x̄_j)| over the non-constant columns.
///
/// Zero up to rounding for every least-squares fit with a constant, which
/// is what licenses reading the intercept as mean happiness net of the
/// regressors' weighted averages.
pub fn intercept_identity_check<T: Scalar>(fit: &OlsResult<T>, design: &DesignMatrix<T>) -> Result<T> {
    if !design.has_constant() || !fit.has_constant {
        return Err(Error::InvalidArgument("fit has no constant".into()));
    }
    if fit.k != design.k() {
        return Err(Error::InvalidArgument("fit was not produced from this design".into()));
    }
    let n = T::from_usize_lossy(design.n());
    let y_bar = design.y().iter().copied().sum::<T>() / n;
    let means = design.column_means();
    let implied = (1..design.k()).fold(y_bar, |acc, j| acc - fit.coefficients[j] * means[j]);
    Ok((fit.coefficients[0] - implied).abs())
}

/// How GDP per capita enters the macro regression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GdpMode {
    /// Year-on-year change (GDPD); the first year is lost.
    #[default]
    Differenced,
    /// The level, with no observation lost.
    Level,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageTwoOptions {
    pub event_dummies: bool,
    pub gdp: GdpMode,
    pub min_years: usize,
    pub significance: f64,
}

impl Default for StageTwoOptions {
    fn default() -> Self {
        Self {
            event_dummies: false,
            gdp: GdpMode::Differenced,
            min_years: 10,
            significance: 0.05,
        }
    }
}

#[derive(Debug, Clone)]
pub struct StageTwo<T> {
    /// Years entering the regression.
    pub years: Vec<i32>,
    pub design: DesignMatrix<T>,
    pub fit: OlsResult<T>,
}

/// Regresses β̂₀ on unemployment, inflation, the GDP term, a trend
/// t = 1, 2, … over the usable years and, optionally, the party, disaster
/// and tech dummies.
///
/// Differencing runs over the consecutive entries of the series (each
/// difference belongs to the later year), so the earliest year drops out.
pub fn stage_two<T: Scalar>(
    series: &YearlyHappinessSeries<T>,
    macro_series: &MacroSeries,
    options: StageTwoOptions,
) -> Result<StageTwo<T>> {
    let years = series.years();
    let aligned = macro_series.restrict_to(&years)?;
    let records = aligned.records();
    let beta0 = series.beta0();

    let gdp: Vec<T> = records.iter().map(|r| T::lit(r.gdp_per_capita)).collect();
    let (skip, gdp_term, gdp_name) = match options.gdp {
        GdpMode::Differenced => {
            if gdp.len() < 2 {
                return Err(Error::InsufficientYears {
                    available: 0,
                    required: options.min_years,
                });
            }
            (1, difference(&gdp)?, "GDPD")
        }
        GdpMode::Level => (0, gdp, "GDP_capita"),
    };
    let used = &records[skip..];
    let n = used.len();
    if n < options.min_years {
        return Err(Error::InsufficientYears {
            available: n,
            required: options.min_years,
        });
    }

    let real = |f: fn(&crate::data::MacroRecord) -> f64| -> Vec<T> {
        used.iter().map(|r| T::lit(f(r))).collect()
    };
    let mut regressors: Vec<(String, Vec<T>)> = vec![
        ("unemp".into(), real(|r| r.unemployment)),
        ("infl".into(), real(|r| r.inflation)),
        (gdp_name.into(), gdp_term),
        ("t".into(), (1..=n).map(T::from_usize_lossy).collect()),
    ];
    if options.event_dummies {
        regressors.push(("party".into(), real(|r| r.party as f64)));
        regressors.push(("disaster".into(), real(|r| r.disaster as f64)));
        regressors.push(("tech".into(), real(|r| r.tech as f64)));
    }
    let mut cols = vec![("_cons".to_string(), ColumnKind::Constant, vec![T::one(); n])];
    for (name, c) in regressors {
        let kind = if name == "t" {
            ColumnKind::Trend
        } else {
            ColumnKind::Macro {
                variable: name.clone(),
            }
        };
        cols.push((name, kind, c));
    }
    let design = DesignMatrix::new(cols, beta0[skip..].to_vec())?;
    let fit = ols_fit_at(&design, options.significance)?;
    Ok(StageTwo {
        years: used.iter().map(|r| r.year).collect(),
        design,
        fit,
    })
}

/// Respondent rows with the macro indicators of their survey year attached.
pub struct MicroWithMacro<'a> {
    micro: &'a MicroDataset,
    macro_series: &'a MacroSeries,
}

impl<'a> MicroWithMacro<'a> {
    pub fn new(micro: &'a MicroDataset, macro_series: &'a MacroSeries) -> Result<Self> {
        for y in micro.distinct_years() {
            if macro_series.get(y).is_none() {
                return Err(Error::YearMismatch(y));
            }
        }
        Ok(Self {
            micro,
            macro_series,
        })
    }
}

impl Variables for MicroWithMacro<'_> {
    fn n_obs(&self) -> usize {
        self.micro.n_obs()
    }

    fn variable_names(&self) -> Vec<String> {
        let mut v = self.micro.variable_names();
        v.extend(self.macro_series.variable_names());
        v
    }

    fn values(&self, name: &str) -> Option<Vec<f64>> {
        if let Some(v) = self.micro.values(name) {
            return Some(v);
        }
        let by_year: BTreeMap<i32, f64> = self
            .macro_series
            .years()
            .into_iter()
            .zip(self.macro_series.values(name)?)
            .collect();
        Some(
            self.micro
                .records()
                .iter()
                .map(|r| by_year[&r.year])
                .collect(),
        )
    }

    fn observation_years(&self) -> Vec<i32> {
        self.micro.observation_years()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PooledEstimator {
    Ols,
    OrderedProbit,
}

#[derive(Debug, Clone)]
pub enum PooledFit<T> {
    Ols {
        design: DesignMatrix<T>,
        fit: OlsResult<T>,
    },
    OrderedProbit {
        design: DesignMatrix<T>,
        fit: OrderedProbitResult<T>,
    },
}

/// Pooled respondent-level fit across all years: OLS with or without time
/// dummies, with per-row macro indicators, or the ordered probit.
pub fn pooled_micro_fit<T: Scalar>(
    micro: &MicroDataset,
    spec: &ModelSpec,
    macro_series: Option<&MacroSeries>,
    estimator: PooledEstimator,
) -> Result<PooledFit<T>> {
    spec.validate()?;
    let design: DesignMatrix<T> = match macro_series {
        Some(m) => {
            let view = MicroWithMacro::new(micro, m)?;
            encode_design_matrix(&view, spec, EmptyDummyPolicy::Error)?
        }
        None => {
            if let Some(name) = spec.macro_regressors.first() {
                return Err(Error::InvalidArgument(format!(
                    "macro regressor `{name}` requested but no macro series supplied"
                )));
            }
            encode_design_matrix(micro, spec, EmptyDummyPolicy::Error)?
        }
    };
    match estimator {
        PooledEstimator::Ols => {
            let fit = ols_fit_at(&design, spec.significance)?;
            Ok(PooledFit::Ols { design, fit })
        }
        PooledEstimator::OrderedProbit => {
            let design = design.without_constant();
            let y = categories_from(design.y())?;
            let options = OrderedProbitOptions {
                significance: spec.significance,
                ..Default::default()
            };
            let fit = ordered_probit_fit_with(&design, &y, options)?;
            Ok(PooledFit::OrderedProbit { design, fit })
        }
    }
}

/// A coefficient expressed as a percentage of a baseline happiness level.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectReport {
    pub name: String,
    pub coefficient: f64,
    pub baseline: f64,
    /// coefficient / baseline × 100.
    pub percent: f64,
}

impl EffectReport {
    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

pub fn percent_effect(coefficient: f64, baseline: f64) -> Result<EffectReport> {
    if !(baseline > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "baseline must be positive, got {baseline}"
        )));
    }
    Ok(EffectReport {
        name: String::new(),
        coefficient,
        baseline,
        percent: coefficient / baseline * 100.0,
    })
}

/// Net happiness loss from a rise in the unemployment rate: the personal
/// effect on the share of people who lose their job plus the aggregate
/// effect on everyone.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    /// |micro coefficient on being unemployed|.
    pub personal: f64,
    /// |macro coefficient on the unemployment rate|.
    pub aggregate: f64,
    /// Change in the unemployment rate as a fraction (0.01 = one point).
    pub delta_u: f64,
    /// delta_u × personal + aggregate, as a reduction.
    pub net: f64,
    pub baseline: f64,
    /// net / baseline × 100, as a reduction.
    pub percent: f64,
}

pub fn unemployment_net_effect(
    personal: f64,
    aggregate: f64,
    delta_u: f64,
    baseline: f64,
) -> Result<Decomposition> {
    if !(baseline > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "baseline must be positive, got {baseline}"
        )));
    }
    if !(delta_u >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "unemployment change must be nonnegative, got {delta_u}"
        )));
    }
    let (personal, aggregate) = (personal.abs(), aggregate.abs());
    let net = delta_u * personal + aggregate;
    Ok(Decomposition {
        personal,
        aggregate,
        delta_u,
        net,
        baseline,
        percent: net / baseline * 100.0,
    })
}

/// Default baseline for macro coefficients: mean β̂₀ to one decimal.
pub fn default_macro_baseline<T: Scalar>(series: &YearlyHappinessSeries<T>) -> f64 {
    (series.mean_beta0().as_f64() * 10.0).round() / 10.0
}

/// Default baseline for micro coefficients: mean happiness to the nearest
/// integer.
pub fn default_micro_baseline(micro: &MicroDataset) -> f64 {
    let n = micro.len().max(1) as f64;
    (micro.records().iter().map(|r| r.happy as f64).sum::<f64>() / n).round()
}
