//! CSV and JSON emission. Numbers are printed with 17 significant digits
//! through Rust's own formatter, which never consults the locale.

use std::io::{self, Write};

use serde::Serialize;

use prodnorm::verify::SuiteReport;

use crate::config::{Output, Resolved};

#[derive(Debug, Clone, Serialize)]
pub struct Row {
    pub x: f64,
    /// `null` in JSON at the singular point.
    pub density: f64,
    pub err: f64,
    pub method: String,
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

impl Row {
    pub fn ok(x: f64, density: f64, err: f64, method: &str) -> Self {
        Self {
            x,
            density,
            err,
            method: method.into(),
            status: "ok",
            message: None,
        }
    }

    pub fn singular(x: f64, method: &str) -> Self {
        Self {
            density: f64::INFINITY,
            err: 0.0,
            status: "singular",
            ..Self::ok(x, 0.0, 0.0, method)
        }
    }

    pub fn failed(x: f64, method: &str, message: String) -> Self {
        Self {
            density: f64::NAN,
            err: f64::NAN,
            status: "error",
            message: Some(message),
            ..Self::ok(x, 0.0, 0.0, method)
        }
    }
}

pub fn num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:.16e}")
    }
}

fn quoted(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[derive(Serialize)]
struct Document<'a, T: Serialize> {
    metadata: Metadata<'a>,
    #[serde(flatten)]
    body: T,
}

#[derive(Serialize)]
struct Metadata<'a> {
    version: &'static str,
    config: &'a Resolved,
}

fn json<T: Serialize>(out: &mut dyn Write, cfg: &Resolved, body: T) -> io::Result<()> {
    let doc = Document {
        metadata: Metadata {
            version: env!("CARGO_PKG_VERSION"),
            config: cfg,
        },
        body,
    };
    serde_json::to_writer_pretty(&mut *out, &doc)?;
    writeln!(out)
}

pub fn write_rows(out: &mut dyn Write, cfg: &Resolved, rows: &[Row]) -> io::Result<()> {
    match cfg.output {
        Output::Csv => {
            writeln!(out, "x,density,err,method,status")?;
            for r in rows {
                writeln!(out, "{},{},{},{},{}", num(r.x), num(r.density), num(r.err), r.method, r.status)?;
            }
            Ok(())
        }
        Output::Json => {
            #[derive(Serialize)]
            struct Body<'a> {
                rows: &'a [Row],
            }
            json(out, cfg, Body { rows })
        }
    }
}

/// No output at all for zero draws in CSV.
pub fn write_samples(out: &mut dyn Write, cfg: &Resolved, draws: &[f64]) -> io::Result<()> {
    match cfg.output {
        Output::Csv => {
            if draws.is_empty() {
                return Ok(());
            }
            writeln!(out, "sample")?;
            for v in draws {
                writeln!(out, "{}", num(*v))?;
            }
            Ok(())
        }
        Output::Json => {
            #[derive(Serialize)]
            struct Body<'a> {
                samples: &'a [f64],
            }
            json(out, cfg, Body { samples: draws })
        }
    }
}

pub fn write_checks(out: &mut dyn Write, cfg: &Resolved, report: &SuiteReport) -> io::Result<()> {
    match cfg.output {
        Output::Csv => {
            writeln!(out, "check,value,tolerance,passed,detail")?;
            for c in &report.checks {
                writeln!(
                    out,
                    "{},{},{},{},{}",
                    c.name,
                    num(c.value),
                    num(c.tolerance),
                    c.passed,
                    quoted(&c.detail)
                )?;
            }
            Ok(())
        }
        Output::Json => json(out, cfg, report),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(num(0.1), "1.0000000000000001e-1");
        assert_eq!(num(-0.75), "-7.5000000000000000e-1");
        assert_eq!(num(f64::INFINITY), "inf");
        assert_eq!(num(0.1).parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn csv_quoting() {
        assert_eq!(quoted("a b"), "a b");
        assert_eq!(quoted("(1, 2)"), "\"(1, 2)\"");
        assert_eq!(quoted("say \"x\", y"), "\"say \"\"x\"\", y\"");
    }
}
