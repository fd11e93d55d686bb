//! Two-stage regression toolkit for survey happiness data.
//!
//! Stage one regresses individual happiness on socio-demographic
//! characteristics separately for each survey year and keeps the intercepts;
//! stage two regresses those yearly intercepts on national economic
//! indicators. Around that sit pooled OLS and ordered-probit estimators,
//! heteroskedasticity and serial-correlation diagnostics, synthetic data
//! generators with known ground truth, and a command-line front end.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix it to `f64`, which is what the command line uses.

pub mod cli;
pub mod data;
pub mod design;
pub mod diagnostics;
pub mod error;
pub mod format;
pub mod linalg;
pub mod ols;
pub mod oprobit;
pub mod pipeline;
pub mod report;
pub mod scalar;
pub mod special;
pub mod synth;

pub use data::{
    load_macro_csv, load_micro_csv, summarize, LoadOptions, MacroRecord, MacroSeries, MicroDataset,
    MicroField, MicroRecord, MicroSchema, SummaryTable, Variables,
};
pub use design::{encode_design_matrix, CategoricalTerm, DummySpec, EmptyDummyPolicy, ModelSpec};
pub use diagnostics::{
    breusch_pagan, difference, durbin_alternative, first_order_autocorr, linear_detrend,
    time_trend_test, Distribution, DurbinReport, TestReport,
};
pub use error::{Error, Result};
pub use ols::{ols_fit, ols_fit_at};
pub use oprobit::{ordered_probit_fit, ordered_probit_fit_with, OrderedProbitOptions};
pub use pipeline::{
    intercept_identity_check, percent_effect, pooled_micro_fit, stage_one, stage_one_with_outcome, stage_two,
    unemployment_net_effect, Decomposition, EffectReport, GdpMode, PooledEstimator,
    StageOneOptions, StageTwoOptions,
};
pub use scalar::Scalar;
pub use special::{normal_cdf, t_sf};
pub use synth::{generate_macro, generate_micro, MacroDgp, MicroDgp};

pub type DesignMatrix = design::DesignMatrix<f64>;
pub type DesignMatrixF32 = design::DesignMatrix<f32>;
pub type OlsResult = ols::OlsResult<f64>;
pub type OlsResultF32 = ols::OlsResult<f32>;
pub type OrderedProbitResult = oprobit::OrderedProbitResult<f64>;
pub type OrderedProbitLikelihood = oprobit::OrderedProbitLikelihood<f64>;
pub type AutocorrEstimate = diagnostics::AutocorrEstimate<f64>;
pub type YearlyHappinessSeries = pipeline::YearlyHappinessSeries<f64>;
pub type YearEntry = pipeline::YearEntry<f64>;
pub type StageOne = pipeline::StageOne<f64>;
pub type StageTwo = pipeline::StageTwo<f64>;
pub type PooledFit = pipeline::PooledFit<f64>;
pub type Matrix = linalg::Matrix<f64>;
