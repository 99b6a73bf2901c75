//! Pupil-plane field modes and their overlap with the collimated dipole
//! wave.
//!
//! A paraboloid maps the emission angle ϑ to the pupil radius
//! r = 2f·tan(ϑ/2). Carrying a linear dipole's sin²ϑ intensity through this
//! map, with the Jacobian from power per solid angle to power per pupil
//! area, gives the ideal collimated amplitude
//!
//! ```text
//! E(r) = E₀ · r / (1 + r²/(4f²))²
//! ```
//!
//! with radial polarization. (The denominator is (1 + r²/(4f²))², the only
//! dimensionally consistent reading; it reproduces the energy identity
//! |E|²·r ∝ D(ϑ)·sinϑ·dϑ/dr and the w* = 2.26f optimum.)
//!
//! All overlaps use the pupil measure r dr dφ on a uniform radial grid with
//! composite Simpson integration.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_nonneg, check_pos, check_unit, Error, Result};
use crate::geometry::{omega_parabola, DipoleSpec, MirrorGeometry, FULL_SPHERE_WEIGHT};
use crate::optimize::golden_section_max;
use crate::quadrature::{simpson_uniform, simpson_uniform_complex};

/// Default number of radial samples.
pub const DEFAULT_SAMPLES: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarization {
    Radial,
    Azimuthal,
    UniformLinear,
    UniformCircular,
}

impl Polarization {
    /// Azimuthal average of conj(p_a)·p_b.
    fn inner(self, other: Polarization) -> f64 {
        use Polarization::*;
        match (self, other) {
            (a, b) if a == b => 1.0,
            (UniformLinear, UniformCircular) | (UniformCircular, UniformLinear) => {
                std::f64::consts::FRAC_1_SQRT_2
            }
            _ => 0.0,
        }
    }
}

/// Complex radial amplitude sampled uniformly on the annulus
/// [r_inner, r_max] of the entrance pupil.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialPupilField {
    r_inner: f64,
    r_max: f64,
    samples: Vec<Complex64>,
    polarization: Polarization,
}

impl RadialPupilField {
    pub fn new(
        r_inner: f64,
        r_max: f64,
        samples: Vec<Complex64>,
        polarization: Polarization,
    ) -> Result<Self> {
        check_nonneg("RadialPupilField", "r_inner", r_inner)?;
        check_pos("RadialPupilField", "r_max", r_max)?;
        if r_inner >= r_max {
            return Err(Error::domain(
                "RadialPupilField",
                format!("r_inner {r_inner} must be below r_max {r_max}"),
            ));
        }
        if samples.len() < 2 {
            return Err(Error::domain(
                "RadialPupilField",
                "need at least two samples",
            ));
        }
        if samples
            .iter()
            .any(|s| !(s.re.is_finite() && s.im.is_finite()))
        {
            return Err(Error::domain("RadialPupilField", "samples must be finite"));
        }
        Ok(RadialPupilField {
            r_inner,
            r_max,
            samples,
            polarization,
        })
    }

    /// Samples `profile` at `n` uniform radii on [r_inner, r_max].
    pub fn from_fn<F: Fn(f64) -> Complex64>(
        r_inner: f64,
        r_max: f64,
        n: usize,
        polarization: Polarization,
        profile: F,
    ) -> Result<Self> {
        let n = n.max(2);
        let h = (r_max - r_inner) / (n - 1) as f64;
        let samples = (0..n).map(|i| profile(r_inner + i as f64 * h)).collect();
        Self::new(r_inner, r_max, samples, polarization)
    }

    pub fn r_inner(&self) -> f64 {
        self.r_inner
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn polarization(&self) -> Polarization {
        self.polarization
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn step(&self) -> f64 {
        (self.r_max - self.r_inner) / (self.samples.len() - 1) as f64
    }

    pub fn radius(&self, i: usize) -> f64 {
        self.r_inner + i as f64 * self.step()
    }

    pub fn radii(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.samples.len()).map(|i| self.radius(i))
    }

    /// Total power 2π∫|E|² r dr.
    pub fn power(&self) -> f64 {
        let integrand: Vec<f64> = self
            .samples
            .iter()
            .zip(self.radii())
            .map(|(e, r)| e.norm_sqr() * r)
            .collect();
        2.0 * PI * simpson_uniform(&integrand, self.step())
    }

    /// Linear interpolation at radius `r` (zero outside the annulus).
    pub fn value_at(&self, r: f64) -> Complex64 {
        if r < self.r_inner || r > self.r_max {
            return Complex64::new(0.0, 0.0);
        }
        let x = (r - self.r_inner) / self.step();
        let i = (x.floor() as usize).min(self.samples.len() - 2);
        let t = x - i as f64;
        self.samples[i] * (1.0 - t) + self.samples[i + 1] * t
    }

    /// Same field resampled to `n` points.
    pub fn resampled(&self, n: usize) -> RadialPupilField {
        if n == self.samples.len() {
            return self.clone();
        }
        let h = (self.r_max - self.r_inner) / (n - 1) as f64;
        let samples = (0..n)
            .map(|i| self.value_at(self.r_inner + i as f64 * h))
            .collect();
        RadialPupilField {
            samples,
            ..self.clone()
        }
    }

    pub fn scaled(&self, c: Complex64) -> RadialPupilField {
        RadialPupilField {
            samples: self.samples.iter().map(|s| s * c).collect(),
            ..self.clone()
        }
    }
}

/// Collimated amplitude of a linear dipole behind a paraboloid of focal
/// length `f`, with E₀ = 1.
pub fn ideal_pupil_profile(r: f64, f: f64) -> f64 {
    let u = r * r / (4.0 * f * f);
    r / ((1.0 + u) * (1.0 + u))
}

/// Radially polarized doughnut amplitude r·exp(−r²/w²), E₀ = 1.
pub fn doughnut_profile(r: f64, w: f64) -> f64 {
    r * (-(r * r) / (w * w)).exp()
}

/// Ideal dipole field over the mirror's pupil annulus.
pub fn ideal_field(geom: &MirrorGeometry, n: usize) -> Result<RadialPupilField> {
    let f = geom.focal_length();
    RadialPupilField::from_fn(
        geom.hole_radius(),
        geom.rim_radius(),
        n,
        Polarization::Radial,
        |r| Complex64::new(ideal_pupil_profile(r, f), 0.0),
    )
}

pub fn doughnut_field(
    w: f64,
    r_inner: f64,
    r_max: f64,
    n: usize,
    polarization: Polarization,
) -> Result<RadialPupilField> {
    check_pos("doughnut_field", "w", w)?;
    RadialPupilField::from_fn(r_inner, r_max, n, polarization, |r| {
        Complex64::new(doughnut_profile(r, w), 0.0)
    })
}

/// Normalized overlap ∫conj(a)·b r dr dφ / sqrt(P_a·P_b), complex.
pub fn pupil_overlap_complex(a: &RadialPupilField, b: &RadialPupilField) -> Result<Complex64> {
    let tol = 1e-12 * a.r_max.max(b.r_max);
    if (a.r_max - b.r_max).abs() > tol || (a.r_inner - b.r_inner).abs() > tol {
        return Err(Error::domain(
            "pupil_overlap",
            format!(
                "apertures differ: [{}, {}] vs [{}, {}]",
                a.r_inner, a.r_max, b.r_inner, b.r_max
            ),
        ));
    }
    let n = a.len().max(b.len());
    let a = a.resampled(n);
    let b = b.resampled(n);
    let pa = a.power();
    let pb = b.power();
    if !(pa > 0.0) || !(pb > 0.0) {
        return Err(Error::domain("pupil_overlap", "field with zero power"));
    }
    let pol = a.polarization.inner(b.polarization);
    if pol == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let integrand: Vec<Complex64> = a
        .samples
        .iter()
        .zip(&b.samples)
        .zip(a.radii())
        .map(|((x, y), r)| x.conj() * y * r)
        .collect();
    let cross = 2.0 * PI * simpson_uniform_complex(&integrand, a.step());
    Ok(cross * pol / (pa * pb).sqrt())
}

/// Overlap η of two real-phased fields (the real part of the complex
/// overlap), in [−1, 1].
pub fn pupil_overlap(a: &RadialPupilField, b: &RadialPupilField) -> Result<f64> {
    Ok(pupil_overlap_complex(a, b)?.re)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaistOptimum {
    /// Optimal beam radius, same unit as the focal length.
    pub w: f64,
    pub eta: f64,
    /// Weighted solid angle of the mirror (parallel linear dipole).
    pub omega: f64,
    /// Coupling efficiency Ω/(8π/3)·η².
    pub g: f64,
}

/// Doughnut radius maximizing the overlap with the ideal dipole field.
/// Golden-section search over w ∈ [0.1f, 20f] to 1e-6·f, after a coarse scan
/// confirms a single interior maximum.
pub fn optimize_waist(geom: &MirrorGeometry) -> Result<WaistOptimum> {
    optimize_waist_with(geom, DEFAULT_SAMPLES)
}

pub fn optimize_waist_with(geom: &MirrorGeometry, samples: usize) -> Result<WaistOptimum> {
    let f = geom.focal_length();
    if geom.depth_ratio() <= 0.0 {
        return Err(Error::domain("optimize_waist", "mirror has zero depth"));
    }
    let ideal = ideal_field(geom, samples)?;
    let eta_of = |w: f64| -> f64 {
        doughnut_field(w, ideal.r_inner, ideal.r_max, samples, Polarization::Radial)
            .and_then(|d| pupil_overlap(&d, &ideal))
            .unwrap_or(f64::NAN)
    };
    let (lo, hi) = (0.1 * f, 20.0 * f);

    let scan: Vec<f64> = (0..=64)
        .map(|i| eta_of(lo * (hi / lo).powf(i as f64 / 64.0)))
        .collect();
    let rises = scan.windows(2).map(|p| p[1] > p[0]).collect::<Vec<_>>();
    let turns = rises.windows(2).filter(|p| p[0] != p[1]).count();
    let best = scan
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    if turns > 1 || best == 0 || best == scan.len() - 1 {
        return Err(Error::Numerical {
            op: "optimize_waist",
            msg: format!("overlap is not unimodal with an interior maximum on [{lo}, {hi}]"),
            achieved: hi - lo,
        });
    }

    let m = golden_section_max(eta_of, lo, hi, 1e-6 * f)?;
    let omega = omega_parabola(geom, &DipoleSpec::linear_parallel())?;
    Ok(WaistOptimum {
        w: m.x,
        eta: m.value,
        omega,
        g: coupling_efficiency(omega, m.value.clamp(0.0, 1.0))?,
    })
}

/// Fraction of doughnut power outside radius `r_max`: (1 + x)·e^{−x} with
/// x = 2r_max²/w².
pub fn clipping_loss(w: f64, r_max: f64) -> Result<f64> {
    check_pos("clipping_loss", "w", w)?;
    if r_max == f64::INFINITY {
        return Ok(0.0);
    }
    check_pos("clipping_loss", "r_max", r_max)?;
    let x = 2.0 * r_max * r_max / (w * w);
    Ok((1.0 + x) * (-x).exp())
}

/// G = (Ω/(8π/3))·η².
pub fn coupling_efficiency(omega: f64, eta: f64) -> Result<f64> {
    if !omega.is_finite() || !(0.0..=FULL_SPHERE_WEIGHT * (1.0 + 1e-12)).contains(&omega) {
        return Err(Error::domain(
            "coupling_efficiency",
            format!("omega must lie in [0, 8pi/3], got {omega}"),
        ));
    }
    check_unit("coupling_efficiency", "eta", eta)?;
    Ok((omega / FULL_SPHERE_WEIGHT).min(1.0) * eta * eta)
}

/// Mirror surface deviation sampled uniformly on [r_inner, r_max].
#[derive(Debug, Clone, PartialEq)]
pub struct AberrationProfile {
    pub r_inner: f64,
    pub r_max: f64,
    /// Surface deviation δ(r), same length unit as `wavelength`.
    pub deviation: Vec<f64>,
    pub wavelength: f64,
}

impl AberrationProfile {
    pub fn new(r_inner: f64, r_max: f64, deviation: Vec<f64>, wavelength: f64) -> Result<Self> {
        if deviation.len() < 2 || deviation.iter().any(|d| !d.is_finite()) {
            return Err(Error::domain(
                "AberrationProfile",
                "need at least two finite deviation samples",
            ));
        }
        if !(r_max > r_inner) {
            return Err(Error::domain("AberrationProfile", "empty radial range"));
        }
        Ok(AberrationProfile {
            r_inner,
            r_max,
            deviation,
            wavelength,
        })
    }

    fn deviation_at(&self, r: f64) -> f64 {
        let n = self.deviation.len();
        let h = (self.r_max - self.r_inner) / (n - 1) as f64;
        let x = ((r - self.r_inner) / h).clamp(0.0, (n - 1) as f64);
        let i = (x.floor() as usize).min(n - 2);
        let t = x - i as f64;
        self.deviation[i] * (1.0 - t) + self.deviation[i + 1] * t
    }
}

/// Imprints the reflection phase 4π·δ(r)/λ (double pass, normal incidence).
pub fn apply_aberration(
    field: &RadialPupilField,
    ab: &AberrationProfile,
) -> Result<RadialPupilField> {
    check_pos("apply_aberration", "wavelength", ab.wavelength)?;
    let tol = 1e-9 * field.r_max;
    if ab.r_inner > field.r_inner + tol || ab.r_max < field.r_max - tol {
        return Err(Error::domain(
            "apply_aberration",
            "aberration map does not cover the field's aperture",
        ));
    }
    let k = 4.0 * PI / ab.wavelength;
    let samples = field
        .samples
        .iter()
        .zip(field.radii())
        .map(|(e, r)| e * Complex64::from_polar(1.0, k * ab.deviation_at(r)))
        .collect();
    Ok(RadialPupilField {
        samples,
        ..field.clone()
    })
}

/// Focal-intensity ratio aberrated/clean, |η(aberrated, ref)|² / |η(field, ref)|².
pub fn strehl_ratio(
    field: &RadialPupilField,
    ab: &AberrationProfile,
    reference: &RadialPupilField,
) -> Result<f64> {
    let clean = pupil_overlap_complex(field, reference)?.norm_sqr();
    if clean == 0.0 {
        return Err(Error::domain(
            "strehl_ratio",
            "field is orthogonal to the reference",
        ));
    }
    let aberrated = pupil_overlap_complex(&apply_aberration(field, ab)?, reference)?.norm_sqr();
    Ok((aberrated / clean).min(1.0))
}
