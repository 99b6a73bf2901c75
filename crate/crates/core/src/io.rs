//! Readers and writers for the CSV and JSON file formats.
//!
//! CSV files carry one header line and use '.' as decimal separator. Writers
//! print floats with 12 significant digits.

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cavity::{CavityParams, CavityTrace};
use crate::error::{Error, Result};
use crate::pulses::PulseEnvelope;

pub const RADIAL_HEADER: [&str; 2] = ["r_over_f", "value"];
pub const ENVELOPE_HEADER: [&str; 2] = ["t_s", "amplitude"];
/// Optional third envelope column for complex amplitudes.
pub const ENVELOPE_IMAG_COLUMN: &str = "amplitude_im";
pub const HISTOGRAM_HEADER: [&str; 2] = ["t_s", "counts"];
pub const SATURATION_HEADER: [&str; 2] = ["power_W", "rate_per_s"];
pub const TRACE_HEADER: [&str; 7] = ["t_s", "re_in", "im_in", "re_out", "im_out", "re_a", "im_a"];

/// Formats with 12 significant digits, fixed notation for moderate
/// exponents and scientific otherwise, trailing zeros removed.
pub fn fmt_float(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.11e}");
    let (mant, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..12).contains(&exp) {
        let s = format!("{v:.*}", (11 - exp) as usize);
        trim_zeros(&s).to_string()
    } else {
        format!("{}e{exp}", trim_zeros(mant))
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub(crate) fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        kind => Error::Parse {
            line,
            msg: format!("{kind:?}"),
        },
    }
}

/// (line number, values)
type Row = (usize, Vec<f64>);

/// Numeric table with a required header prefix and any listed optional
/// trailing columns. Returns the column count and the rows.
fn read_table<R: Read>(
    reader: R,
    required: &[&str],
    optional: &[&str],
) -> Result<(usize, Vec<Row>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr.headers().map_err(csv_error)?.clone();
    let names: Vec<&str> = header.iter().collect();
    let extra = names.len().saturating_sub(required.len());
    if names.len() < required.len()
        || names[..required.len()] != *required
        || extra > optional.len()
        || names[required.len()..] != optional[..extra]
    {
        return Err(Error::Parse {
            line: 1,
            msg: format!(
                "expected header `{}`, found `{}`",
                required.join(","),
                names.join(",")
            ),
        });
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        let vals = rec
            .iter()
            .map(|f| f.parse::<f64>().ok().filter(|x| x.is_finite()))
            .collect::<Option<Vec<f64>>>()
            .ok_or_else(|| Error::Parse {
                line,
                msg: format!(
                    "non-numeric field in `{}`",
                    rec.iter().collect::<Vec<_>>().join(",")
                ),
            })?;
        rows.push((line, vals));
    }
    Ok((names.len(), rows))
}

fn write_table<W: Write>(
    w: W,
    header: &[&str],
    rows: impl Iterator<Item = Vec<f64>>,
) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header).map_err(csv_error)?;
    for row in rows {
        out.write_record(row.iter().map(|&v| fmt_float(v)))
            .map_err(csv_error)?;
    }
    out.flush()?;
    Ok(())
}

fn open(path: &Path) -> Result<std::fs::File> {
    Ok(std::fs::File::open(path)?)
}

/// Checks t_i = t_0 + i·dt within 1e-6 of the step and returns (t0, dt).
fn uniform_times(rows: &[(usize, Vec<f64>)]) -> Result<(f64, f64)> {
    if rows.len() < 2 {
        return Err(Error::Parse {
            line: rows.first().map_or(1, |r| r.0),
            msg: "need at least two samples".into(),
        });
    }
    let t0 = rows[0].1[0];
    let dt = rows[1].1[0] - t0;
    if !(dt > 0.0) {
        return Err(Error::Parse {
            line: rows[1].0,
            msg: "times must increase".into(),
        });
    }
    for (i, (line, v)) in rows.iter().enumerate() {
        if (v[0] - (t0 + i as f64 * dt)).abs() > 1e-6 * dt {
            return Err(Error::Parse {
                line: *line,
                msg: format!("time {} is off the uniform grid", v[0]),
            });
        }
    }
    Ok((t0, dt))
}

pub fn read_radial_csv<R: Read>(reader: R) -> Result<Vec<(f64, f64)>> {
    let (_, rows) = read_table(reader, &RADIAL_HEADER, &[])?;
    Ok(rows.into_iter().map(|(_, v)| (v[0], v[1])).collect())
}

pub fn read_radial_profile(path: &Path) -> Result<Vec<(f64, f64)>> {
    read_radial_csv(open(path)?)
}

pub fn write_radial_profile<W: Write>(w: W, rows: &[(f64, f64)]) -> Result<()> {
    write_table(w, &RADIAL_HEADER, rows.iter().map(|&(r, v)| vec![r, v]))
}

pub fn read_envelope_csv<R: Read>(reader: R) -> Result<PulseEnvelope> {
    let (_, rows) = read_table(reader, &ENVELOPE_HEADER, &[ENVELOPE_IMAG_COLUMN])?;
    let (t0, dt) = uniform_times(&rows)?;
    let samples = rows
        .iter()
        .map(|(_, v)| Complex64::new(v[1], v.get(2).copied().unwrap_or(0.0)))
        .collect();
    PulseEnvelope::new(t0, dt, samples)
}

pub fn read_envelope(path: &Path) -> Result<PulseEnvelope> {
    read_envelope_csv(open(path)?)
}

/// Writes `t_s,amplitude`, adding `amplitude_im` when any sample is complex.
pub fn write_envelope<W: Write>(w: W, env: &PulseEnvelope) -> Result<()> {
    let complex = env.samples().iter().any(|s| s.im != 0.0);
    let rows = env.times().zip(env.samples()).map(|(t, s)| {
        if complex {
            vec![t, s.re, s.im]
        } else {
            vec![t, s.re]
        }
    });
    if complex {
        write_table(
            w,
            &[ENVELOPE_HEADER[0], ENVELOPE_HEADER[1], ENVELOPE_IMAG_COLUMN],
            rows,
        )
    } else {
        write_table(w, &ENVELOPE_HEADER, rows)
    }
}

/// Arrival-time histogram; `t_s` holds bin centres.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub t0: f64,
    pub bin_width: f64,
    pub counts: Vec<u64>,
}

pub fn read_histogram_csv<R: Read>(reader: R) -> Result<Histogram> {
    let (_, rows) = read_table(reader, &HISTOGRAM_HEADER, &[])?;
    let (t0, bin_width) = uniform_times(&rows)?;
    let counts = rows
        .iter()
        .map(|(line, v)| {
            let c = v[1];
            if c < 0.0 || c.fract() != 0.0 {
                Err(Error::Parse {
                    line: *line,
                    msg: format!("count {c} is not a non-negative integer"),
                })
            } else {
                Ok(c as u64)
            }
        })
        .collect::<Result<Vec<u64>>>()?;
    Ok(Histogram {
        t0,
        bin_width,
        counts,
    })
}

pub fn read_histogram(path: &Path) -> Result<Histogram> {
    read_histogram_csv(open(path)?)
}

pub fn write_histogram<W: Write>(w: W, h: &Histogram) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(HISTOGRAM_HEADER).map_err(csv_error)?;
    for (i, c) in h.counts.iter().enumerate() {
        out.write_record([fmt_float(h.t0 + i as f64 * h.bin_width), c.to_string()])
            .map_err(csv_error)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_saturation_csv<R: Read>(reader: R) -> Result<Vec<(f64, f64)>> {
    let (_, rows) = read_table(reader, &SATURATION_HEADER, &[])?;
    Ok(rows.into_iter().map(|(_, v)| (v[0], v[1])).collect())
}

pub fn read_saturation_points(path: &Path) -> Result<Vec<(f64, f64)>> {
    read_saturation_csv(open(path)?)
}

pub fn write_saturation_points<W: Write>(w: W, points: &[(f64, f64)]) -> Result<()> {
    write_table(
        w,
        &SATURATION_HEADER,
        points.iter().map(|&(p, r)| vec![p, r]),
    )
}

/// Cavity description: mirror reflectivities plus either the intensity
/// decay time or κ directly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavitySpec {
    #[serde(rename = "R1")]
    pub r1: f64,
    #[serde(rename = "R2")]
    pub r2: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay_time_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default)]
    pub detuning: f64,
}

impl CavitySpec {
    pub fn to_params(&self) -> Result<CavityParams> {
        match (self.decay_time_s, self.kappa) {
            (Some(t), None) => CavityParams::from_decay_time(self.r1, self.r2, t, self.detuning),
            (None, Some(k)) => CavityParams::with_kappa(self.r1, self.r2, k, self.detuning),
            _ => Err(Error::domain(
                "CavitySpec",
                "give exactly one of decay_time_s and kappa",
            )),
        }
    }
}

pub fn read_cavity_spec(path: &Path) -> Result<CavitySpec> {
    Ok(serde_json::from_reader(open(path)?)?)
}

pub fn write_trace<W: Write>(w: W, trace: &CavityTrace) -> Result<()> {
    let rows = trace
        .input
        .times()
        .zip(trace.input.samples())
        .zip(trace.reflected.samples())
        .zip(trace.intracavity.samples())
        .map(|(((t, i), o), a)| vec![t, i.re, i.im, o.re, o.im, a.re, a.im]);
    write_table(w, &TRACE_HEADER, rows)
}

pub fn write_json<W: Write, T: Serialize + ?Sized>(mut w: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    Ok(serde_json::from_reader(std::io::BufReader::new(open(
        path,
    )?))?)
}
