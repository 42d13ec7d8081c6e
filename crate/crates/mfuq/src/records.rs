//! Convergence tables as CSV, and their cost-aligned comparison.

use std::io::{Read, Write};

use mfuq_core::metrics::ConvergenceRecord;

use crate::error::{BenchError, Result};

/// Schema of every records file, in this order. Undefined values (moments
/// of a constant surrogate, errors against a zero reference) are empty
/// fields.
pub const HEADER: [&str; 13] = [
    "iteration", "cost", "mean", "variance", "skewness", "kurtosis", "err_mean", "err_var", "err_skew",
    "err_kurt", "err_l2", "err_linf", "ks",
];

/// Shortest round-trip text; exponent form outside `[1e-5, 1e16)`.
/// Non-finite values are empty.
pub fn format_number(v: f64) -> String {
    let a = v.abs();
    if !v.is_finite() {
        String::new()
    } else if a != 0.0 && !(1e-5..1e16).contains(&a) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(format_number).unwrap_or_default()
}

pub fn record_fields(r: &ConvergenceRecord) -> Vec<String> {
    let m = &r.moments;
    let mut out = vec![r.iteration.to_string(), format_number(r.cost), format_number(m.mean), format_number(m.variance), opt(m.skewness), opt(m.kurtosis)];
    out.extend(r.err_moments.iter().map(|e| opt(*e)));
    out.extend([opt(r.err_l2), opt(r.err_linf), format_number(r.ks)]);
    out
}

pub fn write_records<W: Write>(out: W, records: &[ConvergenceRecord]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for r in records {
        w.write_record(record_fields(r))?;
    }
    w.flush()
}

pub fn records_csv(records: &[ConvergenceRecord]) -> String {
    let mut buf = Vec::new();
    write_records(&mut buf, records).expect("writing to memory");
    String::from_utf8(buf).expect("CSV is ASCII")
}

/// A records file kept as text, with the cost column parsed.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordTable {
    pub header: Vec<String>,
    pub rows: Vec<(f64, Vec<String>)>,
}

impl RecordTable {
    pub fn read<R: Read>(input: R, name: &str) -> Result<Self> {
        let bad = |m: String| BenchError::Input(format!("{name}: {m}"));
        let mut r = csv::Reader::from_reader(input);
        let header: Vec<String> = r.headers().map_err(|e| bad(e.to_string()))?.iter().map(str::to_string).collect();
        if header != HEADER {
            return Err(bad(format!("unexpected header {:?}", header.join(","))));
        }
        let mut rows = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec.map_err(|e| bad(e.to_string()))?;
            let cost: f64 = rec[1].parse().map_err(|_| bad(format!("row {}: cost {:?} is not a number", i + 1, &rec[1])))?;
            rows.push((cost, rec.iter().map(str::to_string).collect()));
        }
        Ok(Self { header, rows })
    }
}

/// Aligns tables on the union of their cost values. Each row carries, per
/// table, its last record with cost at most the row's cost (empty before
/// the table's first record). Columns are prefixed with the labels.
pub fn compare(tables: &[(String, RecordTable)]) -> Result<String> {
    if tables.len() < 2 {
        return Err(BenchError::Input("compare needs at least two record files".into()));
    }
    if let Some((label, _)) = tables.iter().find(|(_, t)| t.rows.is_empty()) {
        return Err(BenchError::Input(format!("{label}: no records")));
    }
    let mut grid: Vec<f64> = tables.iter().flat_map(|(_, t)| t.rows.iter().map(|r| r.0)).collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    let mut w = csv::Writer::from_writer(Vec::new());
    let mut head = vec!["cost".to_string()];
    for (label, t) in tables {
        head.extend(t.header.iter().map(|h| format!("{label}_{h}")));
    }
    let csv_err = |e: csv::Error| BenchError::Input(e.to_string());
    w.write_record(&head).map_err(csv_err)?;
    let mut next = vec![0usize; tables.len()];
    for &c in &grid {
        let mut row = vec![format_number(c)];
        for ((_, t), k) in tables.iter().zip(next.iter_mut()) {
            while *k < t.rows.len() && t.rows[*k].0 <= c {
                *k += 1;
            }
            match k.checked_sub(1) {
                Some(i) => row.extend(t.rows[i].1.iter().cloned()),
                None => row.extend(std::iter::repeat_n(String::new(), t.header.len())),
            }
        }
        w.write_record(&row).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| BenchError::Input(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("CSV is UTF-8"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use mfuq_core::metrics::MomentSet;

    fn rec(i: usize, cost: f64, mean: f64) -> ConvergenceRecord {
        ConvergenceRecord {
            iteration: i,
            cost,
            moments: MomentSet::from_central(mean, 0.0, 0.0, 0.0),
            err_moments: [Some(0.5), None, None, None],
            err_l2: Some(0.25),
            err_linf: None,
            ks: 1.0,
        }
    }

    #[test]
    fn number_formats() {
        assert_eq!(format_number(0.25), "0.25");
        assert_eq!(format_number(187245.0), "187245");
        assert_eq!(format_number(6.938893903907262e-15), "6.938893903907262e-15");
        assert_eq!(format_number(-1e20), "-1e20");
        assert_eq!(format_number(0.0), "0");
        assert_eq!(format_number(f64::NAN), "");
        for v in [1.2345678901234567e-300, 3e-6, 0.1 + 0.2, 9.99e15] {
            assert_eq!(format_number(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn header_and_undefined_fields() {
        let s = records_csv(&[rec(0, 1.0, 0.5)]);
        assert_eq!(
            s,
            "iteration,cost,mean,variance,skewness,kurtosis,err_mean,err_var,err_skew,err_kurt,err_l2,err_linf,ks\n0,1,0.5,0,,,0.5,,,,0.25,,1\n"
        );
    }

    #[test]
    fn carries_the_last_observation_forward() {
        let a = RecordTable::read(records_csv(&[rec(0, 1.0, 0.1), rec(1, 5.0, 0.2)]).as_bytes(), "a").unwrap();
        let b = RecordTable::read(records_csv(&[rec(0, 3.0, 0.3)]).as_bytes(), "b").unwrap();
        let out = compare(&[("a".into(), a.clone()), ("b".into(), b)]).unwrap();
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[0].starts_with("cost,a_iteration,a_cost,"));
        assert!(lines[1].starts_with("1,0,1,0.1,") && lines[1].ends_with(",,,,,,,,,,,,,"));
        assert!(lines[2].starts_with("3,0,1,0.1,"));
        assert!(lines[3].starts_with("5,1,5,0.2,"));

        let same = compare(&[("x".into(), a.clone()), ("y".into(), a.clone())]).unwrap();
        for line in same.lines().skip(1) {
            let f: Vec<&str> = line.split(',').collect();
            assert_eq!(f[1..14], f[14..27]);
        }
        let empty = RecordTable { header: a.header.clone(), rows: vec![] };
        assert!(compare(&[("a".into(), a), ("b".into(), empty)]).is_err());
    }
}
