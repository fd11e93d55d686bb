//! Synthetic data with known ground truth.
//!
//! # Generation recipe
//!
//! All draws come from `ChaCha8Rng::seed_from_u64(seed)`. Standard normal
//! draws use `rand_distr::StandardNormal`; uniform reals use `gen::<f64>()`
//! on [0, 1); integer ranges use `gen_range(lo..=hi)`.
//!
//! **Micro.** Years are visited in ascending order and, within a year,
//! respondents one at a time. Each respondent draws, in this order: age,
//! childs, educ (uniform integers on their ranges), then sex, race, marital,
//! health, workstatus, income (inverse CDF of one uniform against the
//! category probabilities listed in code order), then one standard normal ε.
//! The latent outcome is
//!
//! ```text
//! y* = intercept[year] + Σ coefficient[c] · x_c + noise_sd · ε
//! ```
//!
//! where `x_c` is the value of design column `c` (`age`, `childs`, `educ`
//! or a standard dummy such as `d_unemp`). The happiness code is
//! 1 + #{thresholds strictly below y*}.
//!
//! **Macro.** Unless explicit paths are supplied, per year in order:
//! unemployment u_t = 6.4 + 0.6 (u_{t−1} − 6.4) + z (floored at 2, u_0 = 6.4 + z),
//! inflation π_t = 4.9 + 0.5 (π_{t−1} − 4.9) + 2 z (π_0 = 4.9 + 2 z),
//! GDP g_t = g_{t−1} (1.05 + 0.02 z) with g_0 = 6500, party flips with
//! probability 0.25 (starts at 0), disaster ~ Bernoulli(0.25), tech ~
//! Bernoulli(0.125); draws per year in exactly that order. Noise then
//! follows e_t = ρ e_{t−1} + noise_sd · z_t with e_0 = noise_sd · z_0 / √(1 − ρ²).
//! The intercept series is
//!
//! ```text
//! β0_i = constant + b_u u_i + b_π π_i + b_g (g_i − g_{i−1}) + b_t i
//!        + b_party party_i + b_dis disaster_i + b_tech tech_i + e_i
//! ```
//!
//! with the GDP difference taken as 0 for the first year (which the
//! differenced stage-two regression discards) and i counting from 0.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::{MacroRecord, MacroSeries, MicroDataset, MicroField, MicroRecord};
use crate::design::DummySpec;
use crate::error::{Error, Result};
use crate::pipeline::{YearEntry, YearlyHappinessSeries};
use crate::special::normal_quantile;

/// How respondent covariates are drawn. Categorical probabilities are
/// listed in ascending code order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovariateScheme {
    pub age: (u8, u8),
    pub educ: (u8, u8),
    pub childs: (u8, u8),
    pub sex: Vec<f64>,
    pub race: Vec<f64>,
    pub marital: Vec<f64>,
    pub health: Vec<f64>,
    pub workstatus: Vec<f64>,
    pub income: Vec<f64>,
}

impl Default for CovariateScheme {
    /// Marginals loosely matched to the survey's summary table.
    fn default() -> Self {
        Self {
            age: (18, 89),
            educ: (8, 18),
            childs: (0, 4),
            sex: vec![0.55, 0.45],
            race: vec![0.83, 0.13, 0.04],
            marital: vec![0.22, 0.26, 0.52],
            health: vec![0.08, 0.22, 0.44, 0.26],
            workstatus: vec![0.35, 0.03, 0.62],
            income: vec![0.08, 0.09, 0.09, 0.08, 0.08, 0.58],
        }
    }
}

impl CovariateScheme {
    fn categorical(&self) -> [(MicroField, &[f64]); 6] {
        [
            (MicroField::Sex, &self.sex),
            (MicroField::Race, &self.race),
            (MicroField::Marital, &self.marital),
            (MicroField::Health, &self.health),
            (MicroField::Workstatus, &self.workstatus),
            (MicroField::Income, &self.income),
        ]
    }

    fn ranges(&self) -> [(MicroField, (u8, u8)); 3] {
        [
            (MicroField::Age, self.age),
            (MicroField::Childs, self.childs),
            (MicroField::Educ, self.educ),
        ]
    }

    fn validate(&self) -> Result<()> {
        for (field, (lo, hi)) in self.ranges() {
            let (clo, chi) = field.code_range().expect("coded field");
            if lo > hi || (lo as i64) < clo || (hi as i64) > chi {
                return Err(Error::InvalidDgp(format!(
                    "{} range {lo}..={hi} outside {clo}..={chi}",
                    field.name()
                )));
            }
        }
        for (field, probs) in self.categorical() {
            let (lo, hi) = field.code_range().expect("coded field");
            if probs.len() as i64 != hi - lo + 1 {
                return Err(Error::InvalidDgp(format!(
                    "{} needs {} probabilities, got {}",
                    field.name(),
                    hi - lo + 1,
                    probs.len()
                )));
            }
            let sum: f64 = probs.iter().sum();
            if probs.iter().any(|p| !(*p >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidDgp(format!(
                    "{} probabilities must be nonnegative and sum to 1 (sum {sum})",
                    field.name()
                )));
            }
        }
        Ok(())
    }
}

/// Respondent-level data-generating process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MicroDgp {
    pub year_intercepts: BTreeMap<i32, f64>,
    /// Keyed by design column name (`age`, `d_married`, …).
    pub coefficients: BTreeMap<String, f64>,
    pub noise_sd: f64,
    /// Strictly increasing cut points on the latent scale.
    pub thresholds: Vec<f64>,
    #[serde(default)]
    pub covariates: CovariateScheme,
}

/// Design-column name → (field, code) for the standard dummies, or
/// (field, None) for the raw continuous columns.
fn column_source(name: &str) -> Option<(MicroField, Option<i64>)> {
    match name {
        "age" => return Some((MicroField::Age, None)),
        "childs" => return Some((MicroField::Childs, None)),
        "educ" => return Some((MicroField::Educ, None)),
        _ => {}
    }
    for var in ["sex", "health", "marital", "workstatus", "income", "race"] {
        let spec = DummySpec::standard(var)?;
        if let Some((code, _)) = spec.levels.iter().find(|(_, n)| n == name) {
            return Some((MicroField::from_name(var)?, Some(*code)));
        }
    }
    None
}

/// Value of the named design column for one respondent.
fn column_value(record: &MicroRecord, field: MicroField, code: Option<i64>) -> f64 {
    let v = record.get(field);
    match code {
        Some(c) => (v == c) as u8 as f64,
        None => v as f64,
    }
}

impl MicroDgp {
    pub fn validate(&self) -> Result<()> {
        if self.year_intercepts.is_empty() {
            return Err(Error::InvalidDgp("no years".into()));
        }
        if !(self.noise_sd >= 0.0) || !self.noise_sd.is_finite() {
            return Err(Error::InvalidDgp(format!("noise_sd {}", self.noise_sd)));
        }
        if self.thresholds.is_empty()
            || self.thresholds.windows(2).any(|w| !(w[0] < w[1]))
            || self.thresholds.iter().any(|t| !t.is_finite())
        {
            return Err(Error::InvalidDgp(
                "thresholds must be finite and strictly increasing".into(),
            ));
        }
        if self.thresholds.len() != 2 {
            return Err(Error::InvalidDgp(
                "happiness has three categories: give exactly two thresholds".into(),
            ));
        }
        for (name, v) in &self.coefficients {
            if column_source(name).is_none() {
                return Err(Error::InvalidDgp(format!("unknown design column `{name}`")));
            }
            if !v.is_finite() {
                return Err(Error::InvalidDgp(format!("coefficient `{name}` = {v}")));
            }
        }
        self.covariates.validate()
    }

    /// A process resembling the survey: coefficients close to the pooled
    /// estimates, noise sd 0.6, and thresholds placed so the three
    /// categories come out near (0.13, 0.55, 0.32).
    pub fn survey_like(year_intercepts: BTreeMap<i32, f64>) -> Self {
        let coefficients: BTreeMap<String, f64> = [
            ("age", 0.0037),
            ("childs", -0.0046),
            ("educ", 0.0029),
            ("d_male", -0.042),
            ("d_excellent", 0.389),
            ("d_good", 0.188),
            ("d_poor", -0.166),
            ("d_married", 0.204),
            ("d_DWS", -0.091),
            ("d_work", -0.050),
            ("d_unemp", -0.176),
            ("d_income2", 0.002),
            ("d_income3", 0.022),
            ("d_income4", 0.021),
            ("d_income5", 0.034),
            ("d_income6", 0.071),
            ("d_white", 0.032),
            ("d_black", -0.078),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        let mut dgp = Self {
            year_intercepts,
            coefficients,
            noise_sd: 0.6,
            thresholds: vec![0.0, 1.0],
            covariates: CovariateScheme::default(),
        };
        dgp.thresholds = dgp.thresholds_for_shares(&[0.13, 0.55]);
        dgp
    }

    /// Mean and variance of the latent outcome over respondents and years,
    /// treating covariates as independent and the latent as roughly normal.
    pub fn latent_moments(&self) -> (f64, f64) {
        let years = self.year_intercepts.len() as f64;
        let icpt_mean = self.year_intercepts.values().sum::<f64>() / years;
        let icpt_var = self
            .year_intercepts
            .values()
            .map(|v| (v - icpt_mean).powi(2))
            .sum::<f64>()
            / years;
        let mut mean = icpt_mean;
        let mut var = icpt_var + self.noise_sd * self.noise_sd;

        let cov = &self.covariates;
        for (field, (lo, hi)) in cov.ranges() {
            let b = self.coefficients.get(field.name()).copied().unwrap_or(0.0);
            let width = (hi - lo) as f64 + 1.0;
            mean += b * (lo as f64 + hi as f64) / 2.0;
            var += b * b * (width * width - 1.0) / 12.0;
        }
        for (field, probs) in cov.categorical() {
            let (lo, _) = field.code_range().expect("coded field");
            let mut m1 = 0.0;
            let mut m2 = 0.0;
            for (i, &p) in probs.iter().enumerate() {
                let code = lo + i as i64;
                let b: f64 = self
                    .coefficients
                    .iter()
                    .filter(|(name, _)| column_source(name) == Some((field, Some(code))))
                    .map(|(_, v)| v)
                    .sum();
                m1 += p * b;
                m2 += p * b * b;
            }
            mean += m1;
            var += m2 - m1 * m1;
        }
        (mean, var)
    }

    /// Thresholds placing cumulative shares at the given points under a
    /// normal approximation of the latent outcome.
    pub fn thresholds_for_shares(&self, shares: &[f64]) -> Vec<f64> {
        let (mean, var) = self.latent_moments();
        let sd = var.sqrt();
        let mut cum = 0.0;
        shares
            .iter()
            .map(|s| {
                cum += s;
                mean + sd * normal_quantile(cum).expect("share in (0, 1)")
            })
            .collect()
    }
}

/// Generated respondents plus their latent (continuous) outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticMicro {
    pub data: MicroDataset,
    pub latent: Vec<f64>,
}

fn draw_category(rng: &mut ChaCha8Rng, probs: &[f64]) -> usize {
    let u: f64 = rng.gen();
    let mut cum = 0.0;
    for (i, p) in probs.iter().enumerate() {
        cum += p;
        if u < cum {
            return i;
        }
    }
    probs.len() - 1
}

pub fn generate_micro(dgp: &MicroDgp, n_per_year: usize, seed: u64) -> Result<SyntheticMicro> {
    dgp.validate()?;
    if n_per_year == 0 {
        return Err(Error::InvalidDgp("n_per_year must be at least 1".into()));
    }
    let terms: Vec<(MicroField, Option<i64>, f64)> = dgp
        .coefficients
        .iter()
        .map(|(name, &b)| {
            let (f, c) = column_source(name).expect("validated");
            (f, c, b)
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cov = &dgp.covariates;
    let mut records = Vec::with_capacity(n_per_year * dgp.year_intercepts.len());
    let mut latent = Vec::with_capacity(records.capacity());
    for (&year, &intercept) in &dgp.year_intercepts {
        for _ in 0..n_per_year {
            let age = rng.gen_range(cov.age.0..=cov.age.1);
            let childs = rng.gen_range(cov.childs.0..=cov.childs.1);
            let educ = rng.gen_range(cov.educ.0..=cov.educ.1);
            let sex = draw_category(&mut rng, &cov.sex) as u8;
            let race = 1 + draw_category(&mut rng, &cov.race) as u8;
            let marital = draw_category(&mut rng, &cov.marital) as u8;
            let health = 1 + draw_category(&mut rng, &cov.health) as u8;
            let workstatus = draw_category(&mut rng, &cov.workstatus) as u8;
            let income = 1 + draw_category(&mut rng, &cov.income) as u8;
            let eps: f64 = rng.sample(StandardNormal);

            let mut rec = MicroRecord {
                year,
                happy: 1,
                age,
                sex,
                race,
                educ,
                marital,
                health,
                workstatus,
                income,
                childs,
            };
            let y = intercept
                + terms
                    .iter()
                    .map(|&(f, c, b)| b * column_value(&rec, f, c))
                    .sum::<f64>()
                + dgp.noise_sd * eps;
            rec.happy = 1 + dgp.thresholds.iter().filter(|&&t| t < y).count() as u8;
            records.push(rec);
            latent.push(y);
        }
    }
    Ok(SyntheticMicro {
        data: MicroDataset::from_records(records)?,
        latent,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MacroCoefficients {
    pub constant: f64,
    pub unemployment: f64,
    pub inflation: f64,
    pub gdpd: f64,
    pub trend: f64,
    #[serde(default)]
    pub party: f64,
    #[serde(default)]
    pub disaster: f64,
    #[serde(default)]
    pub tech: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MacroPaths {
    pub unemployment: Vec<f64>,
    pub inflation: Vec<f64>,
    pub gdp_per_capita: Vec<f64>,
    pub party: Vec<u8>,
    pub disaster: Vec<u8>,
    pub tech: Vec<u8>,
}

/// Year-level data-generating process for the intercept series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MacroDgp {
    pub years: Vec<i32>,
    pub coefficients: MacroCoefficients,
    pub noise_sd: f64,
    /// AR(1) coefficient of the noise.
    #[serde(default)]
    pub noise_ar: f64,
    /// Explicit covariate paths; generated from the seed when absent.
    #[serde(default)]
    pub paths: Option<MacroPaths>,
}

impl MacroDgp {
    pub fn validate(&self) -> Result<()> {
        if self.years.len() < 12 {
            return Err(Error::InvalidDgp(format!(
                "need at least 12 years, got {}",
                self.years.len()
            )));
        }
        if self.years.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidDgp("years must be strictly increasing".into()));
        }
        if !(self.noise_sd >= 0.0) || !self.noise_sd.is_finite() {
            return Err(Error::InvalidDgp(format!("noise_sd {}", self.noise_sd)));
        }
        if !(self.noise_ar.abs() < 1.0) {
            return Err(Error::InvalidDgp(format!(
                "noise_ar {} must lie in (-1, 1)",
                self.noise_ar
            )));
        }
        if let Some(p) = &self.paths {
            let n = self.years.len();
            let lens = [
                p.unemployment.len(),
                p.inflation.len(),
                p.gdp_per_capita.len(),
                p.party.len(),
                p.disaster.len(),
                p.tech.len(),
            ];
            if lens.iter().any(|&l| l != n) {
                return Err(Error::InvalidDgp(format!(
                    "every path needs {n} values, got {lens:?}"
                )));
            }
            if p.party.iter().chain(&p.disaster).chain(&p.tech).any(|&d| d > 1) {
                return Err(Error::InvalidDgp("dummy paths must be 0/1".into()));
            }
        }
        Ok(())
    }
}

fn generate_paths(rng: &mut ChaCha8Rng, n: usize) -> MacroPaths {
    let mut p = MacroPaths {
        unemployment: Vec::with_capacity(n),
        inflation: Vec::with_capacity(n),
        gdp_per_capita: Vec::with_capacity(n),
        party: Vec::with_capacity(n),
        disaster: Vec::with_capacity(n),
        tech: Vec::with_capacity(n),
    };
    let mut party = 0u8;
    for i in 0..n {
        let z_u: f64 = rng.sample(StandardNormal);
        let u = if i == 0 {
            6.4 + z_u
        } else {
            6.4 + 0.6 * (p.unemployment[i - 1] - 6.4) + z_u
        };
        p.unemployment.push(u.max(2.0));
        let z_p: f64 = rng.sample(StandardNormal);
        let infl = if i == 0 {
            4.9 + 2.0 * z_p
        } else {
            4.9 + 0.5 * (p.inflation[i - 1] - 4.9) + 2.0 * z_p
        };
        p.inflation.push(infl);
        let z_g: f64 = rng.sample(StandardNormal);
        let g = if i == 0 {
            6500.0
        } else {
            p.gdp_per_capita[i - 1] * (1.05 + 0.02 * z_g)
        };
        p.gdp_per_capita.push(g);
        if i > 0 && rng.gen::<f64>() < 0.25 {
            party = 1 - party;
        }
        p.party.push(party);
        p.disaster.push((rng.gen::<f64>() < 0.25) as u8);
        p.tech.push((rng.gen::<f64>() < 0.125) as u8);
    }
    p
}

pub fn generate_macro(dgp: &MacroDgp, seed: u64) -> Result<(MacroSeries, YearlyHappinessSeries<f64>)> {
    dgp.validate()?;
    let n = dgp.years.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let paths = match &dgp.paths {
        Some(p) => p.clone(),
        None => generate_paths(&mut rng, n),
    };

    let rho = dgp.noise_ar;
    let mut noise = Vec::with_capacity(n);
    for i in 0..n {
        let z: f64 = rng.sample(StandardNormal);
        let e = if i == 0 {
            dgp.noise_sd * z / (1.0 - rho * rho).sqrt()
        } else {
            rho * noise[i - 1] + dgp.noise_sd * z
        };
        noise.push(e);
    }

    let b = &dgp.coefficients;
    let mut records = Vec::with_capacity(n);
    let mut entries = Vec::with_capacity(n);
    for i in 0..n {
        let gdpd = if i == 0 {
            0.0
        } else {
            paths.gdp_per_capita[i] - paths.gdp_per_capita[i - 1]
        };
        let beta0 = b.constant
            + b.unemployment * paths.unemployment[i]
            + b.inflation * paths.inflation[i]
            + b.gdpd * gdpd
            + b.trend * i as f64
            + b.party * paths.party[i] as f64
            + b.disaster * paths.disaster[i] as f64
            + b.tech * paths.tech[i] as f64
            + noise[i];
        records.push(MacroRecord {
            year: dgp.years[i],
            unemployment: paths.unemployment[i],
            inflation: paths.inflation[i],
            gdp_per_capita: paths.gdp_per_capita[i],
            party: paths.party[i],
            disaster: paths.disaster[i],
            tech: paths.tech[i],
        });
        entries.push(YearEntry {
            year: dgp.years[i],
            beta0,
            n_year: 0,
            dropped: Vec::new(),
        });
    }
    Ok((MacroSeries::new(records)?, YearlyHappinessSeries::new(entries)?))
}
