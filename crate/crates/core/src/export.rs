//! Deterministic JSON and CSV renderings of reports.
//!
//! JSON floats are printed with 17 significant digits (`{:.16e}`) so that equal
//! inputs give byte-identical files; non-finite floats become `null`. CSV uses
//! RFC 4180 quoting, '.' decimals and '\n' line endings.

use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::cones::{cone_rows, ConeSample};
use crate::error::{Error, Result};
use crate::fields::TrajectoryPoint;
use crate::foliation::{EquidistanceReport, RankReport};
use crate::minkowski::AlphaBetaNorm;
use crate::submersion::InducedNormTable;

/// Pretty JSON formatter with fixed-precision floats.
pub struct FixedFormatter<'a> {
    inner: PrettyFormatter<'a>,
}

impl Default for FixedFormatter<'_> {
    fn default() -> Self {
        FixedFormatter { inner: PrettyFormatter::with_indent(b"  ") }
    }
}

impl Formatter for FixedFormatter<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(w, "{value:.16e}")
        } else {
            w.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object_value(w)
    }
}

/// Pretty JSON with fixed-precision floats and a trailing newline.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedFormatter::default());
    value
        .serialize(&mut ser)
        .map_err(|e| Error::InvalidInput(format!("serialization failed: {e}")))?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

/// A CSV table with a header row. Floats use the shortest round-trip form.
pub fn csv_table(header: &[String], rows: &[Vec<f64>]) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let fail = |e: csv::Error| Error::InvalidInput(format!("csv: {e}"));
    w.write_record(header).map_err(fail)?;
    for row in rows {
        w.write_record(row.iter().map(|x| x.to_string())).map_err(fail)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidInput(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv of ASCII numbers"))
}

fn indexed(prefix: &str, n: usize) -> impl Iterator<Item = String> + '_ {
    (1..=n).map(move |i| format!("{prefix}{i}"))
}

/// Columns `v1..vn, F, ratio, residual`.
pub fn cone_csv(norm: &AlphaBetaNorm, sample: &ConeSample) -> Result<String> {
    let mut header: Vec<String> = indexed("v", norm.dim()).collect();
    header.extend(["F", "ratio", "residual"].map(String::from));
    csv_table(&header, &cone_rows(norm, sample)?)
}

/// Columns `y1..yk, F2`.
pub fn induced_csv(table: &InducedNormTable) -> Result<String> {
    let k = table.samples.first().map_or(0, |s| s.y.len());
    let mut header: Vec<String> = indexed("y", k).collect();
    header.push("F2".into());
    let rows: Vec<Vec<f64>> = table
        .samples
        .iter()
        .map(|s| s.y.iter().copied().chain([s.f2]).collect())
        .collect();
    csv_table(&header, &rows)
}

/// Columns `t, x1..xn, v1..vn, F`.
pub fn trajectory_csv(points: &[TrajectoryPoint]) -> Result<String> {
    let n = points.first().map_or(0, |p| p.x.len());
    let mut header = vec!["t".to_string()];
    header.extend(indexed("x", n));
    header.extend(indexed("v", n));
    header.push("F".into());
    let rows: Vec<Vec<f64>> = points
        .iter()
        .map(|p| {
            std::iter::once(p.t)
                .chain(p.x.iter().copied())
                .chain(p.v.iter().copied())
                .chain([p.f])
                .collect()
        })
        .collect();
    csv_table(&header, &rows)
}

/// Columns `level, x1..xn, future, past`, one row per target sample.
pub fn equidistance_csv(report: &EquidistanceReport) -> Result<String> {
    let n = report
        .targets
        .iter()
        .flat_map(|t| t.samples.first())
        .next()
        .map_or(0, |s| s.point.len());
    let mut header = vec!["level".to_string()];
    header.extend(indexed("x", n));
    header.extend(["future", "past"].map(String::from));
    let rows: Vec<Vec<f64>> = report
        .targets
        .iter()
        .flat_map(|t| {
            t.samples.iter().map(move |s| {
                std::iter::once(t.level)
                    .chain(s.point.iter().copied())
                    .chain([s.future, s.past])
                    .collect()
            })
        })
        .collect();
    csv_table(&header, &rows)
}

/// Columns `theta1..thetam, eta1..etan, level, rank`.
pub fn rank_csv(report: &RankReport) -> Result<String> {
    let (m, n) = report
        .samples
        .first()
        .map_or((0, 0), |s| (s.coordinates.len(), s.endpoint.len()));
    let mut header: Vec<String> = indexed("theta", m).collect();
    header.extend(indexed("eta", n));
    header.extend(["level", "rank"].map(String::from));
    let rows: Vec<Vec<f64>> = report
        .samples
        .iter()
        .map(|s| {
            s.coordinates
                .iter()
                .copied()
                .chain(s.endpoint.iter().copied())
                .chain([s.level, s.rank as f64])
                .collect()
        })
        .collect();
    csv_table(&header, &rows)
}
