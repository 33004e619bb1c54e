//! Rendering of criterion reports, witness runs and orbit profiles as JSON,
//! CSV or aligned text. Output depends only on the input values.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::criteria::CriterionReport;
use crate::dynamics::ProfilePoint;
use crate::error::{Error, Result};
use crate::scalar::Dyadic;
use crate::witnesses::WitnessRun;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
    Text,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Text => "txt",
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Text => "text",
        })
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "text" | "txt" | "table" => Ok(Format::Text),
            other => Err(Error::Parse(format!("unknown format '{other}'"))),
        }
    }
}

fn json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Config(format!("serialization failed: {e}")))?;
    s.push('\n');
    Ok(s)
}

pub fn exact_text(d: &Option<Dyadic>) -> String {
    d.as_ref().map(Dyadic::to_string).unwrap_or_default()
}

/// Shortest round-trip text, in scientific notation outside `[1e-4, 1e6)`.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e6).contains(&a) {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}

fn opt_f64(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// CSV with a header row.
pub fn csv_table(header: &[&str], rows: Vec<Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Config(format!("csv: {e}"));
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(&r).map_err(io)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Config(format!("csv: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::Config(format!("csv: {e}")))
}

/// Left-aligned columns separated by two spaces.
pub fn text_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for r in rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |cells: Vec<&str>| {
        let mut out = String::new();
        for (i, (c, w)) in cells.iter().zip(&widths).enumerate() {
            if i + 1 == cells.len() {
                out.push_str(c);
            } else {
                out.push_str(&format!("{c:<w$}  "));
            }
        }
        out.trim_end().to_string() + "\n"
    };
    let mut out = line(header.to_vec());
    for r in rows {
        out.push_str(&line(r.iter().map(String::as_str).collect()));
    }
    out
}

pub fn render_criterion(r: &CriterionReport, format: Format) -> Result<String> {
    let header = ["k", "n", "quantity", "value", "exact"];
    let rows: Vec<Vec<String>> = r
        .decay
        .iter()
        .map(|d| {
            vec![
                d.k.to_string(),
                d.n.to_string(),
                d.quantity.clone(),
                fmt_f64(d.value),
                exact_text(&d.exact),
            ]
        })
        .collect();
    match format {
        Format::Json => json(r),
        Format::Csv => csv_table(&header, rows),
        Format::Text => {
            let mut out = format!("criterion: {}\nstatement: {}\n", r.id, r.statement);
            for (k, v) in &r.parameters {
                out.push_str(&format!("  {k} = {v}\n"));
            }
            out.push_str(&format!("verdict: {}\n", r.verdict));
            for n in &r.notes {
                out.push_str(&format!("note: {n}\n"));
            }
            out.push('\n');
            out.push_str(&text_table(&header, &rows));
            Ok(out)
        }
    }
}

pub fn render_witness(run: &WitnessRun, format: Format) -> Result<String> {
    let header = ["k", "n", "residual", "value", "exact", "bound", "ok"];
    let rows: Vec<Vec<String>> = run
        .records
        .iter()
        .flat_map(|rec| {
            rec.residuals.iter().map(move |r| {
                vec![
                    rec.k.to_string(),
                    rec.n.to_string(),
                    r.name.clone(),
                    fmt_f64(r.value),
                    exact_text(&r.exact),
                    opt_f64(r.bound),
                    r.within_bound().to_string(),
                ]
            })
        })
        .collect();
    match format {
        Format::Json => json(run),
        Format::Csv => csv_table(&header, rows),
        Format::Text => {
            let mut out = format!("witness: {}\n", run.kind);
            for (k, v) in &run.parameters {
                out.push_str(&format!("  {k} = {v}\n"));
            }
            for (k, v) in &run.tolerances {
                out.push_str(&format!("  tolerance {k} = {v:e}\n"));
            }
            out.push_str(&format!("verdict: {}\n", run.verdict));
            for n in &run.notes {
                out.push_str(&format!("note: {n}\n"));
            }
            out.push('\n');
            out.push_str(&text_table(&header, &rows));
            Ok(out)
        }
    }
}

pub fn render_profile(points: &[ProfilePoint], format: Format) -> Result<String> {
    let header = ["n", "norm", "exact"];
    let rows: Vec<Vec<String>> = points
        .iter()
        .map(|p| vec![p.n.to_string(), fmt_f64(p.norm), exact_text(&p.exact)])
        .collect();
    match format {
        Format::Json => json(&points),
        Format::Csv => csv_table(&header, rows),
        Format::Text => Ok(text_table(&header, &rows)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criteria::{check_hypercyclicity_condition, DecayRule, Schedule};
    use crate::structured::build_example_w;

    fn report() -> CriterionReport {
        let sched = Schedule::affine(3, 4).unwrap();
        check_hypercyclicity_condition(&build_example_w(), 2, &sched, &DecayRule::default())
            .unwrap()
    }

    #[test]
    fn formats_parse() {
        assert_eq!("JSON".parse::<Format>().unwrap(), Format::Json);
        assert_eq!("txt".parse::<Format>().unwrap(), Format::Text);
        assert!("xml".parse::<Format>().is_err());
        assert_eq!(Format::Text.extension(), "txt");
    }

    #[test]
    fn json_round_trips() {
        let r = report();
        let s = render_criterion(&r, Format::Json).unwrap();
        let back: CriterionReport = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
        assert_eq!(s, render_criterion(&r, Format::Json).unwrap());
    }

    #[test]
    fn csv_and_text_shapes() {
        let r = report();
        let csv = render_criterion(&r, Format::Csv).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "k,n,quantity,value,exact");
        assert_eq!(lines.len(), 1 + r.decay.len());
        assert!(lines[1].starts_with("1,4,||W^n P_m||,0.125,1*2^-3"));
        assert_eq!(fmt_f64(2f64.powi(-47)), "7.105427357601002e-15");
        assert_eq!(fmt_f64(0.5), "0.5");
        assert_eq!(fmt_f64(0.0), "0");
        let text = render_criterion(&r, Format::Text).unwrap();
        assert!(text.contains("verdict: "));
        assert!(text.contains("criterion: hypercyclicity"));
    }

    #[test]
    fn table_alignment() {
        let t = text_table(&["a", "bb"], &[vec!["xyz".into(), "1".into()]]);
        assert_eq!(t, "a    bb\nxyz  1\n");
    }
}
