//! File formats. Sequences, weight grids, certificates and coefficient
//! prefixes travel as JSON; traces and reports as CSV (or as a JSON table of
//! the same columns). Reals are written with 17 significant digits and
//! `-inf` as the string `"-inf"`, so every value reads back bit for bit.

use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{Number, Value};

use crate::assoc::{counting_log, Omega, RamificationReport, WeightFunctionGrid};
use crate::condition_b::{FailureTrace, LuskyCertificate};
use crate::disk::DiskMaxRow;
use crate::error::{invalid, Error, Result};
use crate::growth::PropertyReport;
use crate::hull::{BlockReport, CoefficientPrefix};
use crate::sequence::WeightSequence;

/// 17 significant digits, or one of the literals `-inf`, `inf`, `nan`.
pub fn fmt_real(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else if x == f64::INFINITY {
        "inf".into()
    } else {
        format!("{x:.16e}")
    }
}

/// Parse what [`fmt_real`] writes (and any other float literal).
pub fn parse_real(s: &str) -> Result<f64> {
    match s.trim() {
        "-inf" => Ok(f64::NEG_INFINITY),
        "inf" => Ok(f64::INFINITY),
        t => t.parse().map_err(|_| invalid(format!("not a real number: {t:?}"))),
    }
}

/// A real that serializes through [`fmt_real`]: finite values as JSON
/// numbers, infinities as strings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Real(pub f64);

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            Number::from_str(&fmt_real(self.0)).map_err(serde::ser::Error::custom)?.serialize(s)
        } else {
            s.serialize_str(&fmt_real(self.0))
        }
    }
}

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        match Value::deserialize(d)? {
            Value::Number(n) => {
                n.as_f64().map(Real).ok_or_else(|| D::Error::custom(format!("number {n} is out of range")))
            }
            Value::String(s) if s == "-inf" => Ok(Real(f64::NEG_INFINITY)),
            Value::String(s) if s == "inf" => Ok(Real(f64::INFINITY)),
            other => Err(D::Error::custom(format!("expected a number or \"-inf\", found {other}"))),
        }
    }
}

fn reals(xs: &[f64]) -> Vec<Real> {
    xs.iter().copied().map(Real).collect()
}

fn unreal(xs: Vec<Real>) -> Vec<f64> {
    xs.into_iter().map(|r| r.0).collect()
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

#[derive(Serialize, Deserialize)]
struct SequenceFile {
    name: String,
    horizon: usize,
    lambda: Vec<Real>,
}

pub fn sequence_to_json(ws: &WeightSequence) -> Result<String> {
    to_json(&SequenceFile { name: ws.name().to_string(), horizon: ws.horizon(), lambda: reals(ws.lambdas()) })
}

/// Reads `{"name", "horizon", "lambda"}`; `horizon` must equal the length of
/// `lambda`.
pub fn sequence_from_json(s: &str) -> Result<WeightSequence> {
    let f: SequenceFile = serde_json::from_str(s)?;
    if f.lambda.len() != f.horizon {
        return Err(Error::HorizonMismatch { left: f.horizon, right: f.lambda.len() });
    }
    WeightSequence::named(f.name, unreal(f.lambda))
}

#[derive(Serialize, Deserialize)]
struct GridFile {
    logt: Vec<Real>,
    logv: Vec<Real>,
    normalized: bool,
}

pub fn grid_to_json(w: &WeightFunctionGrid) -> Result<String> {
    to_json(&GridFile { logt: reals(w.logt()), logv: reals(w.logv()), normalized: w.is_normalized() })
}

pub fn grid_from_json(s: &str) -> Result<WeightFunctionGrid> {
    let f: GridFile = serde_json::from_str(s)?;
    WeightFunctionGrid::new(unreal(f.logt), unreal(f.logv), f.normalized)
}

#[derive(Serialize, Deserialize)]
struct CertificateFile {
    sequence: String,
    a: Vec<usize>,
    logb: Real,
    #[serde(rename = "logK")]
    log_k: Real,
    rows: Vec<(Real, Real)>,
}

pub fn certificate_to_json(c: &LuskyCertificate) -> Result<String> {
    to_json(&CertificateFile {
        sequence: c.sequence.clone(),
        a: c.a.clone(),
        logb: Real(c.logb),
        log_k: Real(c.log_k),
        rows: c.rows.iter().map(|&(a, b)| (Real(a), Real(b))).collect(),
    })
}

pub fn certificate_from_json(s: &str) -> Result<LuskyCertificate> {
    let f: CertificateFile = serde_json::from_str(s)?;
    Ok(LuskyCertificate {
        sequence: f.sequence,
        a: f.a,
        logb: f.logb.0,
        log_k: f.log_k.0,
        rows: f.rows.into_iter().map(|(a, b)| (a.0, b.0)).collect(),
    })
}

#[derive(Serialize, Deserialize)]
struct CoefficientFile {
    logabs: Vec<Real>,
}

pub fn coefficients_to_json(c: &CoefficientPrefix) -> Result<String> {
    to_json(&CoefficientFile { logabs: reals(c.logabs()) })
}

pub fn coefficients_from_json(s: &str) -> Result<CoefficientPrefix> {
    let f: CoefficientFile = serde_json::from_str(s)?;
    CoefficientPrefix::new(unreal(f.logabs))
}

/// One table cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(usize),
    Real(f64),
    Text(String),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Real(x) => fmt_real(*x),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Cell::Int(i) => s.serialize_u64(*i as u64),
            Cell::Real(x) => Real(*x).serialize(s),
            Cell::Text(t) => s.serialize_str(t),
            Cell::Empty => s.serialize_unit(),
        }
    }
}

fn opt_real(x: Option<f64>) -> Cell {
    x.map_or(Cell::Empty, Cell::Real)
}

/// Columns plus rows, rendered as CSV or as
/// `{"columns": [...], "rows": [[...], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Table { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).map_err(std::io::Error::from)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv)).map_err(std::io::Error::from)?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn to_json(&self) -> Result<String> {
        to_json(self)
    }
}

/// `t, omega, logh, sigma` at the given `t > 0`.
pub fn omega_trace(ws: &WeightSequence, ts: &[f64]) -> Result<Table> {
    let om = Omega::new(ws)?;
    let mut table = Table::new(vec!["t", "omega", "logh", "sigma"]);
    for &t in ts {
        if !(t > 0.0) {
            return Err(invalid(format!("t must be positive, got {t}")));
        }
        let x = t.ln();
        table.push(vec![
            Cell::Real(t),
            Cell::Real(om.at_log(x)?),
            Cell::Real(-om.at_log(-x)?),
            Cell::Int(counting_log(ws, x).count),
        ]);
    }
    Ok(table)
}

/// `property, statistic, verdict, witness_index, witness_value`, sorted by
/// property name.
pub fn property_table(reports: &[PropertyReport]) -> Table {
    let mut sorted: Vec<&PropertyReport> = reports.iter().collect();
    sorted.sort_by(|a, b| a.property.cmp(&b.property));
    let mut table = Table::new(vec!["property", "statistic", "verdict", "witness_index", "witness_value"]);
    for r in sorted {
        table.push(vec![
            Cell::Text(r.property.clone()),
            Cell::Real(r.statistic),
            Cell::Text(r.verdict.to_string()),
            r.witness.map_or(Cell::Empty, |w| Cell::Int(w.0)),
            opt_real(r.witness.map(|w| w.1)),
        ]);
    }
    table
}

/// `j, a_j, gap, logA, logB, violation`, one row per rejected gap.
pub fn failure_table(trace: &FailureTrace) -> Table {
    let mut table = Table::new(vec!["j", "a_j", "gap", "logA", "logB", "violation"]);
    for c in &trace.candidates {
        table.push(vec![
            Cell::Int(trace.stuck_j),
            Cell::Int(trace.stuck_a),
            Cell::Int(c.gap),
            opt_real(c.log_ab.map(|v| v.0)),
            opt_real(c.log_ab.map(|v| v.1)),
            Cell::Text(c.violation.to_string()),
        ]);
    }
    table
}

/// Which block statistics to print.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Norm {
    Hull,
    Core,
    #[default]
    Both,
}

/// `j, a_j, a_j1, log_hull, log_core` (dropping the column `norm` excludes).
pub fn block_table(report: &BlockReport, norm: Norm) -> Table {
    let mut columns = vec!["j", "a_j", "a_j1"];
    if norm != Norm::Core {
        columns.push("log_hull");
    }
    if norm != Norm::Hull {
        columns.push("log_core");
    }
    let mut table = Table::new(columns);
    for r in &report.rows {
        let mut row = vec![Cell::Int(r.j), Cell::Int(r.a_j), Cell::Int(r.a_j1)];
        if norm != Norm::Core {
            row.push(Cell::Real(r.log_hull));
        }
        if norm != Norm::Hull {
            row.push(Cell::Real(r.log_core));
        }
        table.push(row);
    }
    table
}

/// `p, k_p, r, logv`.
pub fn disk_table(rows: &[DiskMaxRow]) -> Table {
    let mut table = Table::new(vec!["p", "k_p", "r", "logv"]);
    for r in rows {
        table.push(vec![Cell::Int(r.p), Cell::Real(r.k_p), Cell::Real(r.log_r.exp()), Cell::Real(r.log_v)]);
    }
    table
}

/// `logt, omega_m, omega_p, ratio`; the note is kept out of the table.
pub fn ramification_table(report: &RamificationReport) -> Table {
    let mut table = Table::new(vec!["logt", "omega_m", "omega_p", "ratio"]);
    for r in &report.rows {
        table.push(vec![Cell::Real(r.logt), Cell::Real(r.omega_m), Cell::Real(r.omega_p), opt_real(r.ratio)]);
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::growth::{structural_checks, Verdict};
    use crate::hull::BlockRow;
    use crate::sequence::{family, FamilySpec};
    use proptest::prelude::*;

    #[test]
    fn real_literals() {
        assert_eq!(fmt_real(f64::NEG_INFINITY), "-inf");
        assert_eq!(fmt_real(1.5), "1.5000000000000000e0");
        assert_eq!(fmt_real(-0.0078125), "-7.8125000000000000e-3");
        assert_eq!(fmt_real(-2.0e-7), "-1.9999999999999999e-7");
        assert_eq!(parse_real("-inf").unwrap(), f64::NEG_INFINITY);
        assert!(parse_real("abc").is_err());
        let v: Vec<Real> = serde_json::from_str(r#"[1, 2.5, "-inf", 1e300]"#).unwrap();
        assert_eq!(v, vec![Real(1.0), Real(2.5), Real(f64::NEG_INFINITY), Real(1e300)]);
        assert!(serde_json::from_str::<Real>(r#""nope""#).is_err());
        assert_eq!(serde_json::to_string(&Real(f64::NEG_INFINITY)).unwrap(), r#""-inf""#);
    }

    #[test]
    fn sequence_file() {
        let ws = family(&FamilySpec::new("harmonic:1".parse().unwrap(), 20)).unwrap();
        let text = sequence_to_json(&ws).unwrap();
        assert!(text.contains("\"name\": \"harmonic:1\""));
        let back = sequence_from_json(&text).unwrap();
        assert_eq!(back.lambdas(), ws.lambdas());
        assert_eq!(back.name(), ws.name());
        let bad = r#"{"name": "x", "horizon": 3, "lambda": [0, 1]}"#;
        assert!(matches!(sequence_from_json(bad), Err(Error::HorizonMismatch { .. })));
        assert!(matches!(sequence_from_json("{"), Err(Error::Json(_))));
        let nonfinite = r#"{"name": "x", "horizon": 2, "lambda": [0, "-inf"]}"#;
        assert!(matches!(sequence_from_json(nonfinite), Err(Error::NonFinite { index: 2, .. })));
    }

    #[test]
    fn certificate_file() {
        let cert = LuskyCertificate {
            sequence: "qgevrey:2".into(),
            a: vec![1, 3, 5],
            logb: 1.0,
            log_k: 10.0,
            rows: vec![(6.0 * 2f64.ln(), 2.0 * 2f64.ln()); 2],
        };
        let text = certificate_to_json(&cert).unwrap();
        assert!(text.contains("\"logK\""));
        assert_eq!(certificate_from_json(&text).unwrap(), cert);
    }

    #[test]
    fn coefficient_file() {
        let c = CoefficientPrefix::new(vec![0.0, f64::NEG_INFINITY, -3.25]).unwrap();
        let text = coefficients_to_json(&c).unwrap();
        assert!(text.contains("\"-inf\""));
        assert_eq!(coefficients_from_json(&text).unwrap().logabs(), c.logabs());
        assert!(coefficients_from_json(r#"{"logabs": ["inf"]}"#).is_err());
    }

    #[test]
    fn grid_file() {
        let w = WeightFunctionGrid::from_fn(vec![-1.0, 0.0, 1.0, 2.0], |x: f64| -x.max(0.0).powi(2), true).unwrap();
        let back = grid_from_json(&grid_to_json(&w).unwrap()).unwrap();
        assert_eq!(back, w);
    }

    #[test]
    fn tables() {
        let ws = family(&FamilySpec::new("gevrey:1".parse().unwrap(), 10)).unwrap();
        let csv = omega_trace(&ws, &[0.5, 1.0, 2.5]).unwrap().to_csv().unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t,omega,logh,sigma");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].ends_with(",0") && lines[2].ends_with(",1"));
        let props = property_table(&structural_checks(&ws)).to_csv().unwrap();
        let names: Vec<&str> = props.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
        let mut sorted = names.clone();
        sorted.sort();
        assert_eq!(names, sorted);
        assert!(props.starts_with("property,statistic,verdict,witness_index,witness_value\n"));
        let report = BlockReport {
            rows: vec![BlockRow { j: 1, a_j: 1, a_j1: 3, log_hull: -1.0, log_core: f64::NEG_INFINITY }],
            sup_hull: -1.0,
            sup_core: f64::NEG_INFINITY,
            slope_hull: None,
            slope_core: None,
            bounded_hull: Verdict::Inconclusive,
            bounded_core: Verdict::Inconclusive,
        };
        let csv = block_table(&report, Norm::Both).to_csv().unwrap();
        assert_eq!(csv, "j,a_j,a_j1,log_hull,log_core\n1,1,3,-1.0000000000000000e0,-inf\n");
        assert_eq!(block_table(&report, Norm::Core).columns, vec!["j", "a_j", "a_j1", "log_core"]);
        let json = block_table(&report, Norm::Hull).to_json().unwrap();
        let v: Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["rows"][0][3].as_f64(), Some(-1.0));
    }

    proptest! {
        #[test]
        fn reals_round_trip(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            prop_assert_eq!(parse_real(&fmt_real(x)).unwrap().to_bits(), x.to_bits());
            let s = serde_json::to_string(&Real(x)).unwrap();
            let back: Real = serde_json::from_str(&s).unwrap();
            prop_assert_eq!(back.0.to_bits(), x.to_bits());
        }

        #[test]
        fn sequence_json_round_trip(lambda in proptest::collection::vec(-1e6f64..1e6, 1..40)) {
            let ws = WeightSequence::named("p", lambda).unwrap();
            let text = sequence_to_json(&ws).unwrap();
            let back = sequence_from_json(&text).unwrap();
            prop_assert_eq!(back.lambdas(), ws.lambdas());
            prop_assert_eq!(sequence_to_json(&back).unwrap(), text);
        }
    }
}
