//! Micro (respondent-level) and macro (year-level) datasets, CSV I/O and
//! summary statistics.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::sig7;

/// Columns of `micro.csv`, in file order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MicroField {
    Year,
    Happy,
    Age,
    Sex,
    Race,
    Educ,
    Marital,
    Health,
    Workstatus,
    Income,
    Childs,
}

impl MicroField {
    pub const ALL: [MicroField; 11] = [
        MicroField::Year,
        MicroField::Happy,
        MicroField::Age,
        MicroField::Sex,
        MicroField::Race,
        MicroField::Educ,
        MicroField::Marital,
        MicroField::Health,
        MicroField::Workstatus,
        MicroField::Income,
        MicroField::Childs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MicroField::Year => "year",
            MicroField::Happy => "happy",
            MicroField::Age => "age",
            MicroField::Sex => "sex",
            MicroField::Race => "race",
            MicroField::Educ => "educ",
            MicroField::Marital => "marital",
            MicroField::Health => "health",
            MicroField::Workstatus => "workstatus",
            MicroField::Income => "income",
            MicroField::Childs => "childs",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == name)
    }

    /// Inclusive range of admissible codes; `None` for the year.
    pub fn code_range(self) -> Option<(i64, i64)> {
        match self {
            MicroField::Year => None,
            MicroField::Happy => Some((1, 3)),
            MicroField::Age => Some((18, 89)),
            MicroField::Sex => Some((0, 1)),
            MicroField::Race => Some((1, 3)),
            MicroField::Educ => Some((0, 20)),
            MicroField::Marital => Some((0, 2)),
            MicroField::Health => Some((1, 4)),
            MicroField::Workstatus => Some((0, 2)),
            MicroField::Income => Some((1, 6)),
            MicroField::Childs => Some((0, 8)),
        }
    }
}

/// One survey respondent. Codes follow the `micro.csv` coding scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MicroRecord {
    pub year: i32,
    /// 1 not too happy, 2 pretty happy, 3 very happy.
    pub happy: u8,
    pub age: u8,
    /// 0 female, 1 male.
    pub sex: u8,
    /// 1 white, 2 black, 3 other.
    pub race: u8,
    pub educ: u8,
    /// 0 divorced/widowed/separated, 1 never married, 2 married.
    pub marital: u8,
    /// 1 poor, 2 fair, 3 good, 4 excellent.
    pub health: u8,
    /// 0 not in labour force, 1 unemployed, 2 working.
    pub workstatus: u8,
    /// Family income bracket 1..6; 6 is the open top bracket.
    pub income: u8,
    pub childs: u8,
}

impl MicroRecord {
    pub fn get(&self, field: MicroField) -> i64 {
        match field {
            MicroField::Year => self.year as i64,
            MicroField::Happy => self.happy as i64,
            MicroField::Age => self.age as i64,
            MicroField::Sex => self.sex as i64,
            MicroField::Race => self.race as i64,
            MicroField::Educ => self.educ as i64,
            MicroField::Marital => self.marital as i64,
            MicroField::Health => self.health as i64,
            MicroField::Workstatus => self.workstatus as i64,
            MicroField::Income => self.income as i64,
            MicroField::Childs => self.childs as i64,
        }
    }

    fn from_values(v: &[i64; 11]) -> Self {
        Self {
            year: v[0] as i32,
            happy: v[1] as u8,
            age: v[2] as u8,
            sex: v[3] as u8,
            race: v[4] as u8,
            educ: v[5] as u8,
            marital: v[6] as u8,
            health: v[7] as u8,
            workstatus: v[8] as u8,
            income: v[9] as u8,
            childs: v[10] as u8,
        }
    }

    /// Checks every code against its admissible set.
    pub fn validate(&self) -> std::result::Result<(), MicroField> {
        for f in MicroField::ALL {
            if let Some((lo, hi)) = f.code_range() {
                let v = self.get(f);
                if v < lo || v > hi {
                    return Err(f);
                }
            }
        }
        Ok(())
    }
}

/// A row dropped during loading, with the file line it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rejection {
    pub line: usize,
    pub column: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LoadReport {
    /// Data rows in the file (header excluded).
    pub rows_read: usize,
    pub rejected: Vec<Rejection>,
}

impl LoadReport {
    pub fn rejected_count(&self) -> usize {
        self.rejected.len()
    }

    /// Rejections tallied per column.
    pub fn rejects_by_column(&self) -> BTreeMap<String, usize> {
        let mut out = BTreeMap::new();
        for r in &self.rejected {
            *out.entry(r.column.clone()).or_insert(0) += 1;
        }
        out
    }
}

/// Maps the canonical micro fields to header names in a particular file.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MicroSchema {
    overrides: BTreeMap<MicroField, String>,
}

impl MicroSchema {
    pub fn with(mut self, field: MicroField, header: impl Into<String>) -> Self {
        self.overrides.insert(field, header.into());
        self
    }

    pub fn header_for(&self, field: MicroField) -> &str {
        self.overrides
            .get(&field)
            .map(String::as_str)
            .unwrap_or(field.name())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadOptions {
    /// Treat out-of-range codes as hard errors instead of rejecting the row.
    pub strict: bool,
}

/// Respondent-level survey data. Immutable once loaded.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MicroDataset {
    records: Vec<MicroRecord>,
    load_report: LoadReport,
}

impl MicroDataset {
    /// Builds a dataset from records that already satisfy the code sets.
    pub fn from_records(records: Vec<MicroRecord>) -> Result<Self> {
        for (i, r) in records.iter().enumerate() {
            if let Err(f) = r.validate() {
                return Err(Error::Domain {
                    line: i + 2,
                    column: f.name().to_string(),
                    message: format!("{} out of range", f.name()),
                });
            }
        }
        let rows_read = records.len();
        Ok(Self {
            records,
            load_report: LoadReport {
                rows_read,
                rejected: Vec::new(),
            },
        })
    }

    pub fn records(&self) -> &[MicroRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn load_report(&self) -> &LoadReport {
        &self.load_report
    }

    /// Distinct survey years, ascending.
    pub fn distinct_years(&self) -> Vec<i32> {
        let mut y: Vec<i32> = self.records.iter().map(|r| r.year).collect();
        y.sort_unstable();
        y.dedup();
        y
    }

    /// Rows belonging to one survey year, in file order.
    pub fn year_slice(&self, year: i32) -> MicroDataset {
        let records: Vec<MicroRecord> =
            self.records.iter().filter(|r| r.year == year).copied().collect();
        let rows_read = records.len();
        MicroDataset {
            records,
            load_report: LoadReport {
                rows_read,
                rejected: Vec::new(),
            },
        }
    }
}

fn is_missing(cell: &str) -> bool {
    matches!(cell, "" | "." | "NA" | "na" | "NaN" | "nan")
}

fn parse_integer(cell: &str) -> Option<i64> {
    if let Ok(v) = cell.parse::<i64>() {
        return Some(v);
    }
    // Integral decimals such as "2.0" from spreadsheet exports.
    let v: f64 = cell.parse().ok()?;
    (v.is_finite() && v.fract() == 0.0 && v.abs() < 1e15).then_some(v as i64)
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::Io {
            path: path.to_path_buf(),
            source,
        },
        other => Error::Csv {
            path: path.to_path_buf(),
            message: format!("{other:?}"),
        },
    }
}

fn open_csv(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(file))
}

fn header_index(headers: &csv::StringRecord, name: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| Error::MissingColumn(name.to_string()))
}

/// Reads `micro.csv`.
///
/// Rows with a missing cell or an out-of-range code are dropped (listwise)
/// and recorded in the [`LoadReport`]; with `options.strict` an out-of-range
/// code is an error instead. Text that is not a number is always an error.
pub fn load_micro_csv(
    path: impl AsRef<Path>,
    schema: &MicroSchema,
    options: LoadOptions,
) -> Result<MicroDataset> {
    let path = path.as_ref();
    let mut reader = open_csv(path)?;
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    let mut idx = [0usize; 11];
    for (slot, field) in idx.iter_mut().zip(MicroField::ALL) {
        *slot = header_index(&headers, schema.header_for(field))?;
    }

    let mut records = Vec::new();
    let mut report = LoadReport::default();
    let mut row = csv::StringRecord::new();
    loop {
        match reader.read_record(&mut row) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) => return Err(csv_error(path, e)),
        }
        report.rows_read += 1;
        let line = row.position().map_or(report.rows_read + 1, |p| p.line() as usize);

        let mut values = [0i64; 11];
        let mut reject: Option<Rejection> = None;
        for ((slot, &col), field) in values.iter_mut().zip(&idx).zip(MicroField::ALL) {
            let cell = row.get(col).unwrap_or("");
            let header = schema.header_for(field);
            if is_missing(cell) {
                reject.get_or_insert(Rejection {
                    line,
                    column: header.to_string(),
                    reason: format!("{} missing", field.name()),
                });
                continue;
            }
            let v = parse_integer(cell).ok_or_else(|| Error::Parse {
                line,
                column: header.to_string(),
                value: cell.to_string(),
            })?;
            if let Some((lo, hi)) = field.code_range() {
                if v < lo || v > hi {
                    if options.strict {
                        return Err(Error::Domain {
                            line,
                            column: header.to_string(),
                            message: format!("{} out of range: {v} not in {lo}..={hi}", field.name()),
                        });
                    }
                    reject.get_or_insert(Rejection {
                        line,
                        column: header.to_string(),
                        reason: format!("{} out of range", field.name()),
                    });
                }
            } else if v < i32::MIN as i64 || v > i32::MAX as i64 {
                return Err(Error::Domain {
                    line,
                    column: header.to_string(),
                    message: format!("year {v} out of range"),
                });
            }
            *slot = v;
        }
        match reject {
            Some(r) => report.rejected.push(r),
            None => records.push(MicroRecord::from_values(&values)),
        }
    }
    Ok(MicroDataset {
        records,
        load_report: report,
    })
}

/// Writes `micro.csv` with the canonical header.
pub fn write_micro_csv<W: std::io::Write>(data: &MicroDataset, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let to_err = |e: csv::Error| Error::Csv {
        path: "<output>".into(),
        message: e.to_string(),
    };
    w.write_record(MicroField::ALL.iter().map(|f| f.name()))
        .map_err(to_err)?;
    for r in &data.records {
        w.write_record(MicroField::ALL.iter().map(|&f| r.get(f).to_string()))
            .map_err(to_err)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: "<output>".into(),
        source,
    })?;
    Ok(())
}

/// National indicators for one year.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MacroRecord {
    pub year: i32,
    /// Percent.
    pub unemployment: f64,
    /// Percent.
    pub inflation: f64,
    pub gdp_per_capita: f64,
    /// 1 when the president is a Democrat.
    pub party: u8,
    pub disaster: u8,
    pub tech: u8,
}

pub const MACRO_COLUMNS: [&str; 7] = [
    "year",
    "unemployment",
    "inflation",
    "gdp_per_capita",
    "party",
    "disaster",
    "tech",
];

/// Year-indexed macro series, strictly increasing in year.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MacroSeries {
    records: Vec<MacroRecord>,
}

impl MacroSeries {
    /// Validates and sorts the records by year.
    pub fn new(mut records: Vec<MacroRecord>) -> Result<Self> {
        for (i, r) in records.iter().enumerate() {
            let line = i + 2;
            for (name, v) in [
                ("unemployment", r.unemployment),
                ("inflation", r.inflation),
                ("gdp_per_capita", r.gdp_per_capita),
            ] {
                if !v.is_finite() {
                    return Err(Error::Domain {
                        line,
                        column: name.into(),
                        message: format!("value {v} is not finite"),
                    });
                }
            }
            for (name, v) in [("party", r.party), ("disaster", r.disaster), ("tech", r.tech)] {
                if v > 1 {
                    return Err(Error::Domain {
                        line,
                        column: name.into(),
                        message: format!("dummy value {v} not in {{0,1}}"),
                    });
                }
            }
        }
        let mut seen: BTreeMap<i32, usize> = BTreeMap::new();
        for (i, r) in records.iter().enumerate() {
            if seen.insert(r.year, i).is_some() {
                return Err(Error::DuplicateYear {
                    line: i + 2,
                    year: r.year,
                });
            }
        }
        records.sort_by_key(|r| r.year);
        Ok(Self { records })
    }

    pub fn records(&self) -> &[MacroRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn years(&self) -> Vec<i32> {
        self.records.iter().map(|r| r.year).collect()
    }

    pub fn get(&self, year: i32) -> Option<&MacroRecord> {
        self.records
            .binary_search_by_key(&year, |r| r.year)
            .ok()
            .map(|i| &self.records[i])
    }

    /// The sub-series for the given years (which must all be present).
    pub fn restrict_to(&self, years: &[i32]) -> Result<MacroSeries> {
        let mut out = Vec::with_capacity(years.len());
        for &y in years {
            out.push(*self.get(y).ok_or(Error::YearMismatch(y))?);
        }
        MacroSeries::new(out)
    }
}

/// Reads `macro.csv`. Any missing or malformed value is an error.
pub fn load_macro_csv(path: impl AsRef<Path>) -> Result<MacroSeries> {
    let path = path.as_ref();
    let mut reader = open_csv(path)?;
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    let mut idx = [0usize; 7];
    for (slot, name) in idx.iter_mut().zip(MACRO_COLUMNS) {
        *slot = header_index(&headers, name)?;
    }

    let mut records = Vec::new();
    let mut seen = BTreeMap::new();
    let mut row = csv::StringRecord::new();
    let mut n = 0usize;
    loop {
        match reader.read_record(&mut row) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) => return Err(csv_error(path, e)),
        }
        n += 1;
        let line = row.position().map_or(n + 1, |p| p.line() as usize);
        let cell = |j: usize| -> Result<&str> {
            let c = row.get(idx[j]).unwrap_or("");
            if is_missing(c) {
                return Err(Error::Domain {
                    line,
                    column: MACRO_COLUMNS[j].into(),
                    message: "missing value".into(),
                });
            }
            Ok(c)
        };
        let parse_err = |j: usize, c: &str| Error::Parse {
            line,
            column: MACRO_COLUMNS[j].into(),
            value: c.into(),
        };
        let real = |j: usize| -> Result<f64> {
            let c = cell(j)?;
            let v: f64 = c.parse().map_err(|_| parse_err(j, c))?;
            if !v.is_finite() {
                return Err(Error::Domain {
                    line,
                    column: MACRO_COLUMNS[j].into(),
                    message: format!("value {c} is not finite"),
                });
            }
            Ok(v)
        };
        let dummy = |j: usize| -> Result<u8> {
            let c = cell(j)?;
            match parse_integer(c) {
                Some(0) => Ok(0),
                Some(1) => Ok(1),
                Some(v) => Err(Error::Domain {
                    line,
                    column: MACRO_COLUMNS[j].into(),
                    message: format!("dummy value {v} not in {{0,1}}"),
                }),
                None => Err(parse_err(j, c)),
            }
        };
        let year_cell = cell(0)?;
        let year = parse_integer(year_cell)
            .and_then(|y| i32::try_from(y).ok())
            .ok_or_else(|| parse_err(0, year_cell))?;
        if seen.insert(year, line).is_some() {
            return Err(Error::DuplicateYear { line, year });
        }
        records.push(MacroRecord {
            year,
            unemployment: real(1)?,
            inflation: real(2)?,
            gdp_per_capita: real(3)?,
            party: dummy(4)?,
            disaster: dummy(5)?,
            tech: dummy(6)?,
        });
    }
    MacroSeries::new(records)
}

/// Writes `macro.csv`; reals use the shortest round-trip representation.
pub fn write_macro_csv<W: std::io::Write>(data: &MacroSeries, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let to_err = |e: csv::Error| Error::Csv {
        path: "<output>".into(),
        message: e.to_string(),
    };
    w.write_record(MACRO_COLUMNS).map_err(to_err)?;
    for r in &data.records {
        w.write_record([
            r.year.to_string(),
            r.unemployment.to_string(),
            r.inflation.to_string(),
            r.gdp_per_capita.to_string(),
            r.party.to_string(),
            r.disaster.to_string(),
            r.tech.to_string(),
        ])
        .map_err(to_err)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: "<output>".into(),
        source,
    })?;
    Ok(())
}

/// Named numeric variables, one value per observation.
///
/// Both dataset types implement this so design encoding and summaries can
/// treat them uniformly.
pub trait Variables {
    fn n_obs(&self) -> usize;

    /// Variables in presentation order.
    fn variable_names(&self) -> Vec<String>;

    fn values(&self, name: &str) -> Option<Vec<f64>>;

    /// Calendar year of every observation.
    fn observation_years(&self) -> Vec<i32>;
}

impl Variables for MicroDataset {
    fn n_obs(&self) -> usize {
        self.records.len()
    }

    fn variable_names(&self) -> Vec<String> {
        MicroField::ALL[1..].iter().map(|f| f.name().to_string()).collect()
    }

    fn values(&self, name: &str) -> Option<Vec<f64>> {
        let f = MicroField::from_name(name)?;
        Some(self.records.iter().map(|r| r.get(f) as f64).collect())
    }

    fn observation_years(&self) -> Vec<i32> {
        self.records.iter().map(|r| r.year).collect()
    }
}

impl Variables for MacroSeries {
    fn n_obs(&self) -> usize {
        self.records.len()
    }

    fn variable_names(&self) -> Vec<String> {
        MACRO_COLUMNS[1..].iter().map(|s| s.to_string()).collect()
    }

    fn values(&self, name: &str) -> Option<Vec<f64>> {
        let get: fn(&MacroRecord) -> f64 = match name {
            "unemployment" => |r| r.unemployment,
            "inflation" => |r| r.inflation,
            "gdp_per_capita" => |r| r.gdp_per_capita,
            "party" => |r| r.party as f64,
            "disaster" => |r| r.disaster as f64,
            "tech" => |r| r.tech as f64,
            "year" => |r| r.year as f64,
            _ => return None,
        };
        Some(self.records.iter().map(get).collect())
    }

    fn observation_years(&self) -> Vec<i32> {
        self.years()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub variable: String,
    pub obs: usize,
    pub mean: f64,
    /// Sample standard deviation (n − 1 denominator); NaN when n = 1.
    pub sd: f64,
    pub min: f64,
    pub max: f64,
}

impl SummaryRow {
    pub fn of(variable: impl Into<String>, values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
        let sd = if values.len() > 1 {
            (ss / (n - 1.0)).sqrt()
        } else {
            f64::NAN
        };
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(Self {
            variable: variable.into(),
            obs: values.len(),
            mean,
            sd,
            min,
            max,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SummaryTable {
    pub rows: Vec<SummaryRow>,
}

impl SummaryTable {
    pub fn row(&self, variable: &str) -> Option<&SummaryRow> {
        self.rows.iter().find(|r| r.variable == variable)
    }

    pub fn push(&mut self, row: SummaryRow) {
        self.rows.push(row);
    }

    pub fn to_text(&self) -> String {
        let width = self
            .rows
            .iter()
            .map(|r| r.variable.len())
            .max()
            .unwrap_or(8)
            .max(8);
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:<width$} {:>8} {:>12} {:>12} {:>12} {:>12}",
            "Variable", "Obs", "Mean", "Std. Dev.", "Min", "Max"
        );
        let _ = writeln!(s, "{}", "-".repeat(width + 61));
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:<width$} {:>8} {:>12} {:>12} {:>12} {:>12}",
                r.variable,
                r.obs,
                sig7(r.mean),
                sig7(r.sd),
                sig7(r.min),
                sig7(r.max)
            );
        }
        s
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("variable,obs,mean,sd,min,max\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                r.variable,
                r.obs,
                sig7(r.mean),
                sig7(r.sd),
                sig7(r.min),
                sig7(r.max)
            );
        }
        s
    }
}

/// Observation count, mean, sample SD, min and max of every variable.
pub fn summarize(data: &impl Variables) -> Result<SummaryTable> {
    if data.n_obs() == 0 {
        return Err(Error::EmptyDataset);
    }
    let mut table = SummaryTable::default();
    for name in data.variable_names() {
        let values = data
            .values(&name)
            .ok_or_else(|| Error::UnknownVariable(name.clone()))?;
        table.push(SummaryRow::of(name, &values)?);
    }
    Ok(table)
}
