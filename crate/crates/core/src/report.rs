//! Text and CSV renderings of fits, tests and effect calculations.
//!
//! Tables follow the layout of published regression tables: one row per
//! regressor, the coefficient (with `*` when significant) above its
//! standard error in parentheses, constant last.

use std::fmt::Write as _;

use serde::Serialize;

use crate::diagnostics::TestReport;
use crate::format::sig7;
use crate::ols::OlsResult;
use crate::oprobit::OrderedProbitResult;
use crate::pipeline::{Decomposition, EffectReport};
use crate::scalar::Scalar;

/// One estimated parameter as shown in a table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    pub name: String,
    pub coef: f64,
    pub se: f64,
    pub stat: f64,
    pub p: f64,
    pub significant: bool,
}

/// One model column of a regression table.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct TableColumn {
    pub header: String,
    pub rows: Vec<TableRow>,
    /// Footer statistics such as the observation count.
    pub stats: Vec<(String, String)>,
}

impl TableColumn {
    pub fn from_ols<T: Scalar>(header: &str, fit: &OlsResult<T>) -> Self {
        let mut rows = Vec::with_capacity(fit.k);
        let mut constant = None;
        for j in 0..fit.k {
            let row = TableRow {
                name: if fit.has_constant && j == 0 {
                    "Constant".into()
                } else {
                    fit.names[j].clone()
                },
                coef: fit.coefficients[j].as_f64(),
                se: fit.std_errors[j].as_f64(),
                stat: fit.t_stats[j].as_f64(),
                p: fit.p_values[j],
                significant: fit.significant[j],
            };
            if fit.has_constant && j == 0 {
                constant = Some(row);
            } else {
                rows.push(row);
            }
        }
        rows.extend(constant);
        Self {
            header: header.into(),
            rows,
            stats: vec![
                ("Number of observations".into(), fit.n.to_string()),
                ("R-squared".into(), sig7(fit.r_squared.as_f64())),
                ("Adjusted R-squared".into(), sig7(fit.adj_r_squared.as_f64())),
            ],
        }
    }

    pub fn from_oprobit<T: Scalar>(header: &str, fit: &OrderedProbitResult<T>) -> Self {
        let mut rows: Vec<TableRow> = (0..fit.names.len())
            .map(|j| TableRow {
                name: fit.names[j].clone(),
                coef: fit.coefficients[j].as_f64(),
                se: fit.std_errors[j].as_f64(),
                stat: fit.z_stats[j].as_f64(),
                p: fit.p_values[j],
                significant: fit.significant[j],
            })
            .collect();
        for (i, (c, se)) in fit.cuts.iter().zip(&fit.cut_std_errors).enumerate() {
            let (c, se) = (c.as_f64(), se.as_f64());
            rows.push(TableRow {
                name: format!("cut{}", i + 1),
                coef: c,
                se,
                stat: c / se,
                p: f64::NAN,
                significant: false,
            });
        }
        Self {
            header: header.into(),
            rows,
            stats: vec![
                ("Number of observations".into(), fit.n.to_string()),
                ("Log-likelihood".into(), sig7(fit.loglik.as_f64())),
                ("Pseudo R-squared".into(), sig7(fit.pseudo_r_squared.as_f64())),
                (
                    format!("LR chi2({})", fit.lr_df),
                    sig7(fit.lr_statistic.as_f64()),
                ),
                ("Iterations".into(), fit.iterations.to_string()),
            ],
        }
    }

    /// `name,coef,se,t,p,sig`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("name,coef,se,t,p,sig\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                r.name,
                sig7(r.coef),
                sig7(r.se),
                sig7(r.stat),
                sig7(r.p),
                if r.significant { "*" } else { "" }
            );
        }
        s
    }
}

/// Side-by-side table; regressors absent from a column show `-`.
pub fn render_table(title: &str, columns: &[TableColumn]) -> String {
    let mut names: Vec<String> = Vec::new();
    for c in columns {
        for r in &c.rows {
            if r.name != "Constant" && !r.name.starts_with("cut") && !names.contains(&r.name) {
                names.push(r.name.clone());
            }
        }
    }
    for c in columns {
        for r in &c.rows {
            if (r.name == "Constant" || r.name.starts_with("cut")) && !names.contains(&r.name) {
                names.push(r.name.clone());
            }
        }
    }
    let mut stat_labels: Vec<String> = Vec::new();
    for c in columns {
        for (l, _) in &c.stats {
            if !stat_labels.contains(l) {
                stat_labels.push(l.clone());
            }
        }
    }

    let label_w = names
        .iter()
        .chain(&stat_labels)
        .map(String::len)
        .max()
        .unwrap_or(10)
        .max(10);
    let col_w = columns
        .iter()
        .map(|c| c.header.len())
        .max()
        .unwrap_or(0)
        .max(14);

    let mut s = String::new();
    let _ = writeln!(s, "{title}");
    let rule = "-".repeat(label_w + (col_w + 2) * columns.len());
    let _ = writeln!(s, "{rule}");
    let _ = write!(s, "{:<label_w$}", "");
    for c in columns {
        let _ = write!(s, "  {:>col_w$}", c.header);
    }
    let _ = writeln!(s);
    let _ = writeln!(s, "{rule}");
    for name in &names {
        let _ = write!(s, "{name:<label_w$}");
        for c in columns {
            let cell = c
                .rows
                .iter()
                .find(|r| &r.name == name)
                .map(|r| format!("{}{}", sig7(r.coef), if r.significant { "*" } else { "" }))
                .unwrap_or_else(|| "-".into());
            let _ = write!(s, "  {cell:>col_w$}");
        }
        let _ = writeln!(s);
        let _ = write!(s, "{:<label_w$}", "");
        for c in columns {
            let cell = c
                .rows
                .iter()
                .find(|r| &r.name == name)
                .map(|r| format!("({})", sig7(r.se)))
                .unwrap_or_default();
            let _ = write!(s, "  {cell:>col_w$}");
        }
        let _ = writeln!(s);
    }
    let _ = writeln!(s, "{rule}");
    for label in &stat_labels {
        let _ = write!(s, "{label:<label_w$}");
        for c in columns {
            let v = c
                .stats
                .iter()
                .find(|(l, _)| l == label)
                .map(|(_, v)| v.as_str())
                .unwrap_or("");
            let _ = write!(s, "  {v:>col_w$}");
        }
        let _ = writeln!(s);
    }
    let _ = writeln!(s, "{rule}");
    let _ = writeln!(s, "* significant at 5% (two-sided)");
    s
}

pub fn render_tests(reports: &[TestReport]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<22} {:>12} {:>14} {:>10}  {}",
        "Test", "Statistic", "Distribution", "p", "Decision"
    );
    for r in reports {
        let _ = writeln!(
            s,
            "{:<22} {:>12} {:>14} {:>10}  {}",
            r.name,
            sig7(r.statistic),
            r.distribution.to_string(),
            sig7(r.p_value),
            if r.reject_at_5pct {
                "reject at 5%"
            } else {
                "fail to reject at 5%"
            }
        );
    }
    s
}

pub fn tests_csv(reports: &[TestReport]) -> String {
    let mut s = String::from("test,statistic,distribution,p,reject_5pct\n");
    for r in reports {
        let _ = writeln!(
            s,
            "{},{},\"{}\",{},{}",
            r.name,
            sig7(r.statistic),
            r.distribution,
            sig7(r.p_value),
            r.reject_at_5pct
        );
    }
    s
}

pub fn render_effects(effects: &[EffectReport]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<16} {:>12} {:>10} {:>10}",
        "Regressor", "Coefficient", "Baseline", "Percent"
    );
    for e in effects {
        let _ = writeln!(
            s,
            "{:<16} {:>12} {:>10} {:>9}%",
            e.name,
            sig7(e.coefficient),
            sig7(e.baseline),
            format!("{:.2}", e.percent)
        );
    }
    s
}

pub fn render_decomposition(d: &Decomposition) -> String {
    format!(
        "{} x {} + {} = {} reduction in happiness ({:.2}% of baseline {})\n",
        sig7(d.delta_u),
        sig7(d.personal),
        sig7(d.aggregate),
        sig7(d.net),
        d.percent,
        sig7(d.baseline)
    )
}
