//! Spatially resolved Stokes maps: parsing, field reconstruction, and the
//! measured overlap with the ideal radially polarized pupil field.

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::MirrorGeometry;
use crate::io::csv_error;
use crate::pupil::ideal_pupil_profile;

/// Slack on the polarization-degree bound S1² + S2² + S3² ≤ S0².
pub const POLARIZATION_SLACK: f64 = 1e-6;
/// Relative tolerance on grid spacing jitter.
pub const SPACING_JITTER: f64 = 1e-6;
/// Minimum share of the pupil disc covered by usable pixels.
pub const MIN_COVERAGE: f64 = 0.5;

pub const CSV_HEADER: [&str; 6] = ["x", "y", "S0", "S1", "S2", "S3"];

/// Stokes parameters on a uniform lattice, stored row-major with x running
/// fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StokesMap {
    pub nx: usize,
    pub ny: usize,
    pub x0: f64,
    pub y0: f64,
    pub dx: f64,
    pub dy: f64,
    pub stokes: Vec<[f64; 4]>,
    /// Pixels with S0 < 0 or a polarization degree above one.
    pub flagged: Vec<bool>,
    pub pupil_center: (f64, f64),
    pub pupil_radius: f64,
}

fn is_unphysical(s: &[f64; 4]) -> bool {
    s[0] < 0.0 || s[1] * s[1] + s[2] * s[2] + s[3] * s[3] > s[0] * s[0] * (1.0 + POLARIZATION_SLACK)
}

impl StokesMap {
    /// Builds a map from raw lattice data. The pupil defaults to the largest
    /// disc centred on the lattice.
    pub fn new(
        nx: usize,
        ny: usize,
        (x0, y0): (f64, f64),
        (dx, dy): (f64, f64),
        stokes: Vec<[f64; 4]>,
    ) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::domain(
                "StokesMap",
                "lattice needs at least 2×2 pixels",
            ));
        }
        if stokes.len() != nx * ny {
            return Err(Error::domain(
                "StokesMap",
                format!("{} pixels for a {nx}×{ny} lattice", stokes.len()),
            ));
        }
        if !(dx != 0.0 && dy != 0.0 && dx.is_finite() && dy.is_finite()) {
            return Err(Error::domain(
                "StokesMap",
                "lattice spacing must be finite and nonzero",
            ));
        }
        let flagged = stokes.iter().map(is_unphysical).collect();
        let cx = x0 + 0.5 * (nx - 1) as f64 * dx;
        let cy = y0 + 0.5 * (ny - 1) as f64 * dy;
        let radius = 0.5 * ((nx - 1) as f64 * dx.abs()).min((ny - 1) as f64 * dy.abs());
        Ok(StokesMap {
            nx,
            ny,
            x0,
            y0,
            dx,
            dy,
            stokes,
            flagged,
            pupil_center: (cx, cy),
            pupil_radius: radius,
        })
    }

    /// Synthetic map of a fully polarized field given by its Jones vector.
    pub fn from_jones<F: Fn(f64, f64) -> [Complex64; 2]>(
        nx: usize,
        ny: usize,
        origin: (f64, f64),
        spacing: (f64, f64),
        field: F,
    ) -> Result<Self> {
        let mut stokes = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let x = origin.0 + i as f64 * spacing.0;
                let y = origin.1 + j as f64 * spacing.1;
                stokes.push(jones_to_stokes(field(x, y)));
            }
        }
        Self::new(nx, ny, origin, spacing, stokes)
    }

    pub fn with_pupil(mut self, center: (f64, f64), radius: f64) -> Result<Self> {
        crate::error::check_pos("StokesMap::with_pupil", "radius", radius)?;
        self.pupil_center = center;
        self.pupil_radius = radius;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.stokes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stokes.is_empty()
    }

    pub fn position(&self, idx: usize) -> (f64, f64) {
        let (i, j) = (idx % self.nx, idx / self.nx);
        (self.x0 + i as f64 * self.dx, self.y0 + j as f64 * self.dy)
    }

    pub fn flagged_count(&self) -> usize {
        self.flagged.iter().filter(|&&f| f).count()
    }

    /// Writes the CSV form; floats use the shortest round-tripping notation.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(CSV_HEADER).map_err(csv_error)?;
        for (idx, s) in self.stokes.iter().enumerate() {
            let (x, y) = self.position(idx);
            out.write_record([x, y, s[0], s[1], s[2], s[3]].iter().map(|v| v.to_string()))
                .map_err(csv_error)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// S = (|Ex|² + |Ey|², |Ex|² − |Ey|², 2Re(Ex*Ey), 2Im(Ex*Ey)).
pub fn jones_to_stokes([ex, ey]: [Complex64; 2]) -> [f64; 4] {
    let c = ex.conj() * ey;
    [
        ex.norm_sqr() + ey.norm_sqr(),
        ex.norm_sqr() - ey.norm_sqr(),
        2.0 * c.re,
        2.0 * c.im,
    ]
}

pub fn parse_stokes_map(path: &Path) -> Result<StokesMap> {
    read_stokes_map(std::fs::File::open(path)?)
}

pub fn read_stokes_map<R: Read>(reader: R) -> Result<StokesMap> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr.headers().map_err(csv_error)?.clone();
    let mut cols = [0usize; 6];
    for (slot, name) in cols.iter_mut().zip(CSV_HEADER) {
        *slot = header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Parse {
                line: 1,
                msg: format!("missing column `{name}`"),
            })?;
    }
    let mut rows: Vec<(usize, [f64; 6])> = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        let mut v = [0.0; 6];
        for (k, &c) in cols.iter().enumerate() {
            let field = rec.get(c).ok_or_else(|| Error::Parse {
                line,
                msg: format!("missing value for `{}`", CSV_HEADER[k]),
            })?;
            v[k] = field
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::Parse {
                    line,
                    msg: format!("bad number `{field}` in column `{}`", CSV_HEADER[k]),
                })?;
        }
        rows.push((line, v));
    }
    if rows.len() < 4 {
        return Err(Error::Parse {
            line: rows.last().map_or(1, |r| r.0),
            msg: "need at least a 2×2 lattice".into(),
        });
    }
    let (x0, y0) = (rows[0].1[0], rows[0].1[1]);
    let dx = rows[1].1[0] - x0;
    let nx = rows
        .iter()
        .position(|(_, v)| (v[1] - y0).abs() > SPACING_JITTER * dx.abs())
        .unwrap_or(rows.len());
    if nx < 2 || rows.len() % nx != 0 {
        return Err(Error::Parse {
            line: rows[nx.min(rows.len() - 1)].0,
            msg: format!(
                "{} rows do not form a lattice with {nx} columns",
                rows.len()
            ),
        });
    }
    let ny = rows.len() / nx;
    if ny < 2 {
        return Err(Error::Parse {
            line: rows[0].0,
            msg: "need at least two lattice rows".into(),
        });
    }
    let dy = rows[nx].1[1] - y0;
    for (idx, (line, v)) in rows.iter().enumerate() {
        let (i, j) = (idx % nx, idx / nx);
        let ex = x0 + i as f64 * dx;
        let ey = y0 + j as f64 * dy;
        if (v[0] - ex).abs() > SPACING_JITTER * dx.abs()
            || (v[1] - ey).abs() > SPACING_JITTER * dy.abs()
        {
            return Err(Error::Parse {
                line: *line,
                msg: format!(
                    "point ({}, {}) is off the uniform lattice, expected ({ex}, {ey})",
                    v[0], v[1]
                ),
            });
        }
    }
    let stokes = rows.iter().map(|(_, v)| [v[2], v[3], v[4], v[5]]).collect();
    StokesMap::new(nx, ny, (x0, y0), (dx, dy), stokes).map_err(|e| Error::Parse {
        line: rows[0].0,
        msg: e.to_string(),
    })
}

/// Polarized part of one pixel as a polarization ellipse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldPixel {
    /// sqrt of the polarized intensity.
    pub amplitude: f64,
    /// Orientation ψ of the major axis.
    pub psi: f64,
    /// Ellipticity angle χ.
    pub chi: f64,
    /// S0 minus the polarized intensity.
    pub unpolarized: f64,
    /// No polarized light; orientation undefined.
    pub null: bool,
    pub flagged: bool,
}

impl FieldPixel {
    pub fn jones(&self) -> [Complex64; 2] {
        let (sp, cp) = self.psi.sin_cos();
        let (sc, cc) = self.chi.sin_cos();
        let a = self.amplitude;
        [
            Complex64::new(a * cp * cc, -a * sp * sc),
            Complex64::new(a * sp * cc, a * cp * sc),
        ]
    }

    /// Polarized Stokes vector (S1, S2, S3) implied by the ellipse.
    pub fn polarized_stokes(&self) -> [f64; 3] {
        let s = jones_to_stokes(self.jones());
        [s[1], s[2], s[3]]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorField {
    pub map: StokesMap,
    pub pixels: Vec<FieldPixel>,
}

pub fn reconstruct_field(map: &StokesMap) -> VectorField {
    let pixels = map
        .stokes
        .iter()
        .zip(&map.flagged)
        .map(|(s, &flagged)| {
            let ip = (s[1] * s[1] + s[2] * s[2] + s[3] * s[3]).sqrt();
            if ip == 0.0 {
                return FieldPixel {
                    amplitude: 0.0,
                    psi: 0.0,
                    chi: 0.0,
                    unpolarized: s[0],
                    null: true,
                    flagged,
                };
            }
            FieldPixel {
                amplitude: ip.sqrt(),
                psi: 0.5 * s[2].atan2(s[1]),
                chi: 0.5 * (s[3] / ip).clamp(-1.0, 1.0).asin(),
                unpolarized: s[0] - ip,
                null: false,
                flagged,
            }
        })
        .collect();
    VectorField {
        map: map.clone(),
        pixels,
    }
}

impl VectorField {
    /// |E·r̂| per pixel, r̂ taken from the pupil centre.
    pub fn radial_component(&self) -> Vec<f64> {
        let (cx, cy) = self.map.pupil_center;
        self.pixels
            .iter()
            .enumerate()
            .map(|(idx, p)| {
                let (x, y) = self.map.position(idx);
                let phi = (y - cy).atan2(x - cx);
                let [ex, ey] = p.jones();
                (ex * phi.cos() + ey * phi.sin()).norm()
            })
            .collect()
    }

    /// Bilinear interpolation of the radial component along `azimuths`
    /// equally spaced rays, averaged. Returns (ρ/R, value) pairs for
    /// ρ from 0 to the pupil radius R.
    pub fn radial_profile(&self, samples: usize, azimuths: usize) -> Vec<(f64, f64)> {
        let comp = self.radial_component();
        let m = &self.map;
        let at = |x: f64, y: f64| -> Option<f64> {
            let u = (x - m.x0) / m.dx;
            let v = (y - m.y0) / m.dy;
            if !(u >= 0.0 && v >= 0.0 && u <= (m.nx - 1) as f64 && v <= (m.ny - 1) as f64) {
                return None;
            }
            let i = (u.floor() as usize).min(m.nx - 2);
            let j = (v.floor() as usize).min(m.ny - 2);
            let (fu, fv) = (u - i as f64, v - j as f64);
            let c = |a: usize, b: usize| comp[b * m.nx + a];
            Some(
                (1.0 - fu) * (1.0 - fv) * c(i, j)
                    + fu * (1.0 - fv) * c(i + 1, j)
                    + (1.0 - fu) * fv * c(i, j + 1)
                    + fu * fv * c(i + 1, j + 1),
            )
        };
        let samples = samples.max(2);
        let azimuths = azimuths.max(1);
        (0..samples)
            .map(|k| {
                let frac = k as f64 / (samples - 1) as f64;
                let rho = frac * m.pupil_radius;
                let (mut sum, mut count) = (0.0, 0);
                for a in 0..azimuths {
                    let phi = 2.0 * std::f64::consts::PI * a as f64 / azimuths as f64;
                    if let Some(v) = at(
                        m.pupil_center.0 + rho * phi.cos(),
                        m.pupil_center.1 + rho * phi.sin(),
                    ) {
                        sum += v;
                        count += 1;
                    }
                }
                (
                    frac,
                    if count > 0 {
                        sum / count as f64
                    } else {
                        f64::NAN
                    },
                )
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StokesReport {
    pub eta: f64,
    /// Unpolarized share of S0 over the pixels used.
    pub unpolarized_fraction: f64,
    pub flagged_pixels: usize,
    /// Usable pixels in the pupil disc relative to the disc area in pixels.
    pub pupil_coverage: f64,
}

/// Ideal radially polarized amplitude at pupil-map coordinates, where the
/// pupil radius corresponds to the mirror rim.
fn ideal_amplitude(rho: f64, pupil_radius: f64, geom: &MirrorGeometry) -> f64 {
    let r_over_f = rho / pupil_radius * geom.rim_radius() / geom.focal_length();
    if r_over_f < geom.hole_radius() / geom.focal_length() {
        0.0
    } else {
        ideal_pupil_profile(r_over_f, 1.0)
    }
}

/// Discrete overlap of the measured polarized field with the ideal pupil
/// field over the pupil disc. Flagged pixels are left out and counted.
pub fn measured_eta(field: &VectorField, geom: &MirrorGeometry) -> Result<StokesReport> {
    let m = &field.map;
    let radial = field.radial_component();
    let (cx, cy) = m.pupil_center;
    let r = m.pupil_radius;
    let (mut num, mut ideal_norm, mut meas_norm) = (0.0, 0.0, 0.0);
    let (mut s0_sum, mut unpol_sum) = (0.0, 0.0);
    let mut used = 0usize;
    for (idx, p) in field.pixels.iter().enumerate() {
        let (x, y) = m.position(idx);
        let rho = (x - cx).hypot(y - cy);
        if rho > r || p.flagged {
            continue;
        }
        used += 1;
        let e = ideal_amplitude(rho, r, geom);
        num += e * radial[idx];
        ideal_norm += e * e;
        meas_norm += p.amplitude * p.amplitude;
        s0_sum += m.stokes[idx][0];
        unpol_sum += p.unpolarized;
    }
    let disc_pixels = std::f64::consts::PI * r * r / (m.dx * m.dy).abs();
    let coverage = used as f64 / disc_pixels;
    if coverage < MIN_COVERAGE {
        return Err(Error::Coverage {
            coverage,
            required: MIN_COVERAGE,
        });
    }
    if !(meas_norm > 0.0 && ideal_norm > 0.0) {
        return Err(Error::domain(
            "measured_eta",
            "no polarized light inside the pupil",
        ));
    }
    Ok(StokesReport {
        eta: num / (ideal_norm * meas_norm).sqrt(),
        unpolarized_fraction: if s0_sum > 0.0 {
            unpol_sum / s0_sum
        } else {
            0.0
        },
        flagged_pixels: m.flagged_count(),
        pupil_coverage: coverage,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, PI};

    fn geom() -> MirrorGeometry {
        MirrorGeometry::new(1.0, 5.67).unwrap()
    }

    /// n×n lattice on [−1, 1]² with pupil radius 1.
    fn lattice<F: Fn(f64, f64) -> [Complex64; 2]>(n: usize, f: F) -> StokesMap {
        let d = 2.0 / (n - 1) as f64;
        StokesMap::from_jones(n, n, (-1.0, -1.0), (d, d), f).unwrap()
    }

    fn radial_ideal(x: f64, y: f64) -> [Complex64; 2] {
        let rho = x.hypot(y);
        if rho == 0.0 {
            return [Complex64::new(0.0, 0.0); 2];
        }
        let a = ideal_amplitude(rho.min(1.0), 1.0, &geom());
        [
            Complex64::new(a * x / rho, 0.0),
            Complex64::new(a * y / rho, 0.0),
        ]
    }

    #[test]
    fn parse_well_formed_map() {
        let map = lattice(64, radial_ideal);
        let mut buf = Vec::new();
        map.write_csv(&mut buf).unwrap();
        let back = read_stokes_map(buf.as_slice()).unwrap();
        assert_eq!(back.len(), 4096);
        assert_eq!((back.nx, back.ny), (64, 64));
        for (a, b) in back.stokes.iter().zip(&map.stokes) {
            for k in 0..4 {
                assert!((a[k] - b[k]).abs() <= 1e-12 * b[0].abs().max(1.0));
            }
        }
    }

    #[test]
    fn parse_flags_unphysical_pixel() {
        let text = "x,y,S0,S1,S2,S3\n0,0,1,0,0,0\n1,0,1,2,0,0\n0,1,1,0.5,0,0\n1,1,1,0,0,1\n";
        let map = read_stokes_map(text.as_bytes()).unwrap();
        assert_eq!(map.flagged, vec![false, true, false, false]);
        assert_eq!(map.flagged_count(), 1);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let missing = "x,y,S0,S1,S2\n0,0,1,0,0\n";
        assert!(matches!(
            read_stokes_map(missing.as_bytes()),
            Err(Error::Parse { line: 1, .. })
        ));
        let bad = "x,y,S0,S1,S2,S3\n0,0,1,0,0,0\n1,0,abc,0,0,0\n0,1,1,0,0,0\n1,1,1,0,0,0\n";
        assert!(matches!(
            read_stokes_map(bad.as_bytes()),
            Err(Error::Parse { line: 3, .. })
        ));
        let jitter = "x,y,S0,S1,S2,S3\n0,0,1,0,0,0\n1,0,1,0,0,0\n2,0,1,0,0,0\n0,1,1,0,0,0\n1.01,1,1,0,0,0\n2,1,1,0,0,0\n";
        assert!(matches!(
            read_stokes_map(jitter.as_bytes()),
            Err(Error::Parse { line: 6, .. })
        ));
        let ragged = "x,y,S0,S1,S2,S3\n0,0,1,0,0,0\n1,0,1,0,0,0\n0,1,1,0,0,0\n";
        assert!(matches!(
            read_stokes_map(ragged.as_bytes()),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn reconstruct_examples() {
        let map = StokesMap::new(
            2,
            2,
            (0.0, 0.0),
            (1.0, 1.0),
            vec![
                [1.0, 1.0, 0.0, 0.0],
                [4.0, 0.0, 0.0, 4.0],
                [0.0, 0.0, 0.0, 0.0],
                [2.0, 0.0, 1.0, 0.0],
            ],
        )
        .unwrap();
        let f = reconstruct_field(&map);
        assert_eq!((f.pixels[0].psi, f.pixels[0].chi), (0.0, 0.0));
        assert_abs_diff_eq!(f.pixels[1].chi, FRAC_PI_4, epsilon = 1e-15);
        assert_abs_diff_eq!(f.pixels[1].amplitude, 2.0, epsilon = 1e-15);
        assert!(f.pixels[2].null && f.pixels[2].amplitude == 0.0);
        assert_abs_diff_eq!(f.pixels[3].unpolarized, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn radial_map_orientation_is_azimuth() {
        let map = lattice(33, radial_ideal);
        let f = reconstruct_field(&map);
        for (idx, p) in f.pixels.iter().enumerate() {
            if p.null {
                continue;
            }
            let (x, y) = map.position(idx);
            let d = (p.psi - y.atan2(x)).rem_euclid(PI);
            assert!(d.min(PI - d) < 1e-9);
        }
    }

    #[test]
    fn ideal_and_circular_maps() {
        let ideal = reconstruct_field(&lattice(101, radial_ideal));
        let r = measured_eta(&ideal, &geom()).unwrap();
        assert_abs_diff_eq!(r.eta, 1.0, epsilon = 1e-6);
        assert_eq!(r.flagged_pixels, 0);
        assert_abs_diff_eq!(r.unpolarized_fraction, 0.0, epsilon = 1e-12);
        assert!(r.pupil_coverage > 0.95 && r.pupil_coverage < 1.05);

        let circ = lattice(101, |x, y| {
            let [ex, ey] = radial_ideal(x, y);
            let a = (ex.norm_sqr() + ey.norm_sqr()).sqrt() * FRAC_1_SQRT_2;
            [Complex64::new(a, 0.0), Complex64::new(0.0, a)]
        });
        let r = measured_eta(&reconstruct_field(&circ), &geom()).unwrap();
        assert_abs_diff_eq!(r.eta, FRAC_1_SQRT_2, epsilon = 1e-6);
    }

    #[test]
    fn flagged_pixels_are_excluded() {
        let mut map = lattice(51, radial_ideal);
        let centre = 25 * 51 + 30;
        map.stokes[centre][1] = 3.0 * map.stokes[centre][0] + 1.0;
        let map = StokesMap::new(51, 51, (map.x0, map.y0), (map.dx, map.dy), map.stokes).unwrap();
        let r = measured_eta(&reconstruct_field(&map), &geom()).unwrap();
        assert_eq!(r.flagged_pixels, 1);
        assert!(r.eta > 0.999);
    }

    #[test]
    fn coverage_error() {
        let map = lattice(21, radial_ideal)
            .with_pupil((1.0, 1.0), 1.5)
            .unwrap();
        assert!(matches!(
            measured_eta(&reconstruct_field(&map), &geom()),
            Err(Error::Coverage { .. })
        ));
    }

    #[test]
    fn radial_profile_tracks_ideal() {
        let f = reconstruct_field(&lattice(201, radial_ideal));
        for (frac, v) in f.radial_profile(21, 16).into_iter().skip(1).take(19) {
            let expect = ideal_amplitude(frac, 1.0, &geom());
            assert!(
                (v - expect).abs() < 2e-2 * expect.max(0.1),
                "{frac}: {v} vs {expect}"
            );
        }
    }

    fn doughnut_ellipse(x: f64, y: f64, w: f64, tilt: f64, ell: f64) -> [Complex64; 2] {
        let rho = x.hypot(y);
        let a = rho * (-(rho * rho) / (w * w)).exp();
        let phi = y.atan2(x) + tilt;
        let (sp, cp) = phi.sin_cos();
        let (sc, cc) = ell.sin_cos();
        [
            Complex64::new(a * cp * cc, -a * sp * sc),
            Complex64::new(a * sp * cc, a * cp * sc),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn stokes_round_trip(s1 in -1.0f64..1.0, s2 in -1.0f64..1.0, s3 in -1.0f64..1.0, extra in 0.0f64..2.0) {
            let ip = (s1 * s1 + s2 * s2 + s3 * s3).sqrt();
            prop_assume!(ip > 1e-6);
            let map = StokesMap::new(2, 2, (0.0, 0.0), (1.0, 1.0), vec![[ip + extra, s1, s2, s3]; 4]).unwrap();
            let p = reconstruct_field(&map).pixels[0];
            let back = p.polarized_stokes();
            prop_assert!((back[0] - s1).abs() < 1e-9 && (back[1] - s2).abs() < 1e-9 && (back[2] - s3).abs() < 1e-9);
        }

        #[test]
        fn eta_rescale_invariant(c in 1e-3f64..1e3, w in 0.3f64..2.0, tilt in -0.5f64..0.5, ell in -0.4f64..0.4) {
            let map = lattice(41, |x, y| doughnut_ellipse(x, y, w, tilt, ell));
            let scaled = StokesMap::new(41, 41, (map.x0, map.y0), (map.dx, map.dy),
                map.stokes.iter().map(|s| [s[0] * c, s[1] * c, s[2] * c, s[3] * c]).collect()).unwrap();
            let a = measured_eta(&reconstruct_field(&map), &geom()).unwrap().eta;
            let b = measured_eta(&reconstruct_field(&scaled), &geom()).unwrap().eta;
            prop_assert!((a - b).abs() < 1e-12);
            prop_assert!(a <= 1.0 + 1e-12);
        }

        #[test]
        fn eta_rotation_invariant(quarter in 1u32..4, w in 0.3f64..2.0, tilt in -0.5f64..0.5, ell in -0.4f64..0.4, skew in 0.0f64..0.5) {
            // a field that is not itself rotation symmetric
            let base = move |x: f64, y: f64| {
                let [ex, ey] = doughnut_ellipse(x, y, w, tilt, ell);
                let g = 1.0 + skew * x;
                [ex * g, ey * g]
            };
            let angle = quarter as f64 * std::f64::consts::FRAC_PI_2;
            let (s, c) = angle.sin_cos();
            let rotated = move |x: f64, y: f64| {
                let [ex, ey] = base(c * x + s * y, -s * x + c * y);
                [ex * c - ey * s, ex * s + ey * c]
            };
            let a = measured_eta(&reconstruct_field(&lattice(41, base)), &geom()).unwrap().eta;
            let b = measured_eta(&reconstruct_field(&lattice(41, rotated)), &geom()).unwrap().eta;
            prop_assert!((a - b).abs() < 1e-6, "{} vs {}", a, b);
        }
    }
}
