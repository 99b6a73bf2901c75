//! Temporal pulse envelopes and their overlap with the time-reversed
//! spontaneous-emission envelope e^{Γt/2}·θ(−t).
//!
//! Envelopes live on uniform time grids and are integrated with the
//! trapezoid rule. A sample that lands exactly on the step at t = 0 takes the
//! midpoint value ½; grids built by [`TimeGrid::spanning`] avoid that case.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{check_pos, check_unit, Error, Result};
use crate::optimize::golden_section_max;
use crate::quadrature::{trapezoid_uniform, trapezoid_uniform_complex};

/// Uniformly sampled complex envelope E(t₀ + i·dt).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseEnvelope {
    t0: f64,
    dt: f64,
    samples: Vec<Complex64>,
}

impl PulseEnvelope {
    pub fn new(t0: f64, dt: f64, samples: Vec<Complex64>) -> Result<Self> {
        check_pos("PulseEnvelope", "dt", dt)?;
        if !t0.is_finite() {
            return Err(Error::domain("PulseEnvelope", "t0 must be finite"));
        }
        if samples.len() < 2 {
            return Err(Error::domain("PulseEnvelope", "need at least two samples"));
        }
        if samples
            .iter()
            .any(|s| !(s.re.is_finite() && s.im.is_finite()))
        {
            return Err(Error::domain("PulseEnvelope", "samples must be finite"));
        }
        Ok(PulseEnvelope { t0, dt, samples })
    }

    pub fn from_real(t0: f64, dt: f64, samples: &[f64]) -> Result<Self> {
        Self::new(
            t0,
            dt,
            samples.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        )
    }

    /// Samples `f` on the grid.
    pub fn from_fn<F: Fn(f64) -> Complex64>(grid: &TimeGrid, f: F) -> Self {
        PulseEnvelope {
            t0: grid.t0,
            dt: grid.dt,
            samples: grid.times().map(f).collect(),
        }
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.samples.len() - 1)
    }

    pub fn grid(&self) -> TimeGrid {
        TimeGrid {
            t0: self.t0,
            dt: self.dt,
            len: self.samples.len(),
        }
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.samples.len()).map(|i| self.time(i))
    }

    /// ∫|E|² dt.
    pub fn energy(&self) -> f64 {
        let v: Vec<f64> = self.samples.iter().map(|s| s.norm_sqr()).collect();
        trapezoid_uniform(&v, self.dt)
    }

    pub fn scaled(&self, c: Complex64) -> PulseEnvelope {
        PulseEnvelope {
            samples: self.samples.iter().map(|s| s * c).collect(),
            ..self.clone()
        }
    }

    /// Envelope rescaled to unit energy.
    pub fn normalized(&self) -> Result<PulseEnvelope> {
        let e = self.energy();
        if !(e > 0.0) {
            return Err(Error::domain(
                "PulseEnvelope::normalized",
                "zero-energy envelope",
            ));
        }
        Ok(self.scaled(Complex64::new(1.0 / e.sqrt(), 0.0)))
    }

    /// Linear interpolation; zero outside the grid.
    pub fn value_at(&self, t: f64) -> Complex64 {
        let x = (t - self.t0) / self.dt;
        let n = self.samples.len();
        if !(x >= 0.0) || x > (n - 1) as f64 {
            return Complex64::new(0.0, 0.0);
        }
        let i = (x.floor() as usize).min(n - 2);
        let f = x - i as f64;
        self.samples[i] * (1.0 - f) + self.samples[i + 1] * f
    }
}

/// Uniform time grid t₀, t₀ + dt, …
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t0: f64,
    pub dt: f64,
    pub len: usize,
}

impl TimeGrid {
    /// Grid covering [start, end] with step `dt`, staggered so that t = 0
    /// falls midway between two samples. A step at t = 0 then sits at the
    /// centre of a trapezoid panel and the rule stays second order.
    pub fn spanning(start: f64, end: f64, dt: f64) -> Result<Self> {
        check_pos("TimeGrid", "dt", dt)?;
        if !(end > start) || !start.is_finite() || !end.is_finite() {
            return Err(Error::domain(
                "TimeGrid",
                format!("empty span [{start}, {end}]"),
            ));
        }
        let first = (start / dt - 0.5).floor() as i64;
        let last = (end / dt - 0.5).ceil() as i64;
        Ok(TimeGrid {
            t0: (first as f64 + 0.5) * dt,
            dt,
            len: (last - first + 1) as usize,
        })
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(|i| self.time(i))
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.len.saturating_sub(1))
    }
}

/// Unit step θ(t) with the midpoint value at t = 0 (relative to `dt`).
fn step(t: f64, dt: f64) -> f64 {
    if t.abs() <= 1e-9 * dt {
        0.5
    } else if t < 0.0 {
        1.0
    } else {
        0.0
    }
}

fn ideal_value(t: f64, gamma: f64, dt: f64) -> f64 {
    match step(t, dt) {
        0.0 => 0.0,
        s => s * (0.5 * gamma * t).exp(),
    }
}

/// Samples of e^{Γt/2}·θ(−t) on the grid; ½ at t = 0. Its squared norm over
/// (−∞, 0] is 1/Γ.
pub fn ideal_envelope(grid: &TimeGrid, gamma: f64) -> Result<PulseEnvelope> {
    check_pos("ideal_envelope", "Gamma", gamma)?;
    Ok(PulseEnvelope::from_fn(grid, |t| {
        Complex64::new(ideal_value(t, gamma, grid.dt), 0.0)
    }))
}

/// η_t = ∫E_inc·E_ideal dt / sqrt(∫|E_inc|² dt / Γ), with the pulse's t = 0
/// taken as given. For complex envelopes the real part of the numerator is
/// used.
pub fn temporal_overlap(env: &PulseEnvelope, gamma: f64) -> Result<f64> {
    overlap_at_shift(env, gamma, 0.0)
}

fn overlap_at_shift(env: &PulseEnvelope, gamma: f64, shift: f64) -> Result<f64> {
    check_pos("temporal_overlap", "Gamma", gamma)?;
    let energy = env.energy();
    if !(energy > 0.0) {
        return Err(Error::domain("temporal_overlap", "zero-norm envelope"));
    }
    let prod: Vec<Complex64> = env
        .samples
        .iter()
        .zip(env.times())
        .map(|(e, t)| e * ideal_value(t - shift, gamma, env.dt))
        .collect();
    let num = trapezoid_uniform_complex(&prod, env.dt).re;
    Ok(num / (energy / gamma).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlignedOverlap {
    pub eta_t: f64,
    /// Time at which the ideal envelope's cut-off is placed.
    pub shift: f64,
}

/// Temporal overlap maximized over the position of the ideal envelope's
/// cut-off: a scan over grid points followed by golden-section refinement.
pub fn temporal_overlap_aligned(env: &PulseEnvelope, gamma: f64) -> Result<AlignedOverlap> {
    let candidates = 512.min(env.len());
    let span = env.t_end() - env.t0;
    let mut best = (f64::NEG_INFINITY, 0.0);
    for k in 0..candidates {
        let s = env.t0 + span * k as f64 / (candidates - 1) as f64;
        let v = overlap_at_shift(env, gamma, s)?;
        if v > best.0 {
            best = (v, s);
        }
    }
    let h = span / (candidates - 1) as f64;
    let lo = (best.1 - h).max(env.t0);
    let hi = (best.1 + h).min(env.t_end());
    let refined = golden_section_max(
        |s| overlap_at_shift(env, gamma, s).unwrap_or(f64::NEG_INFINITY),
        lo,
        hi,
        1e-6 * env.dt,
    )?;
    Ok(if refined.value >= best.0 {
        AlignedOverlap {
            eta_t: refined.value,
            shift: refined.x,
        }
    } else {
        AlignedOverlap {
            eta_t: best.0,
            shift: best.1,
        }
    })
}

/// Closed-form overlap of a rising exponential of intensity rate
/// `gamma_pulse` with the ideal envelope of rate `gamma`.
pub fn mismatched_rate_overlap(gamma: f64, gamma_pulse: f64) -> f64 {
    2.0 * (gamma * gamma_pulse).sqrt() / (gamma + gamma_pulse)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramEnvelope {
    pub envelope: PulseEnvelope,
    /// Bins where background subtraction went negative and was clamped.
    pub clamped_bins: usize,
}

/// Amplitude envelope sqrt(max(counts − background, 0)) from a photon
/// arrival-time histogram. `t0` is the centre of the first bin.
pub fn envelope_from_histogram(
    counts: &[u64],
    bin_width: f64,
    t0: f64,
    background: f64,
) -> Result<HistogramEnvelope> {
    if counts.len() < 2 {
        return Err(Error::domain(
            "envelope_from_histogram",
            "need at least two bins",
        ));
    }
    let mut clamped = 0;
    let samples: Vec<f64> = counts
        .iter()
        .map(|&c| {
            let v = c as f64 - background;
            if v < 0.0 {
                clamped += 1;
                0.0
            } else {
                v.sqrt()
            }
        })
        .collect();
    Ok(HistogramEnvelope {
        envelope: PulseEnvelope::from_real(t0, bin_width, &samples)?,
        clamped_bins: clamped,
    })
}

/// AOM drive signal and resulting first-order optical power at time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AomDrive {
    /// Drive envelope arcsin(e^{t/(2τ)}).
    pub envelope: f64,
    /// envelope·sin(ω_RF·t).
    pub voltage: f64,
    /// Diffraction efficiency sin²(envelope) = e^{t/τ}.
    pub optical_power: f64,
}

/// Drive waveform producing an exponentially rising optical pulse that is
/// cut off at t = 0.
pub fn aom_drive(t: f64, tau: f64, omega_rf: f64) -> Result<AomDrive> {
    check_pos("aom_drive", "tau", tau)?;
    if !t.is_finite() {
        return Err(Error::domain("aom_drive", "t must be finite"));
    }
    if t > 0.0 {
        return Ok(AomDrive {
            envelope: 0.0,
            voltage: 0.0,
            optical_power: 0.0,
        });
    }
    let envelope = (0.5 * t / tau).exp().clamp(0.0, 1.0).asin();
    let s = envelope.sin();
    Ok(AomDrive {
        envelope,
        voltage: envelope * (omega_rf * t).sin(),
        optical_power: s * s,
    })
}

/// P_a = G·η_t².
pub fn absorption_probability(g: f64, eta_t: f64) -> Result<f64> {
    check_unit("absorption_probability", "G", g)?;
    check_unit("absorption_probability", "eta_t", eta_t)?;
    Ok(g * eta_t * eta_t)
}

/// Exponentially rising intensity e^{t/τ} terminated by a linear intensity
/// ramp to zero of duration `ramp`, centred on t = 0. With `ramp = 0` this is
/// the ideal pulse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RampedExponential {
    /// Intensity time constant τ (the matched case has τ = 1/Γ).
    pub tau: f64,
    pub ramp: f64,
}

impl RampedExponential {
    pub fn intensity(&self, t: f64) -> f64 {
        let half = 0.5 * self.ramp;
        if t < -half {
            (t / self.tau).exp()
        } else if self.ramp > 0.0 && t <= half {
            (-half / self.tau).exp() * (1.0 - (t + half) / self.ramp)
        } else {
            0.0
        }
    }

    /// Amplitude envelope sqrt(I) on the grid, midpoint value at a hard step.
    pub fn envelope(&self, grid: &TimeGrid) -> PulseEnvelope {
        PulseEnvelope::from_fn(grid, |t| {
            let a = if self.ramp == 0.0 {
                ideal_value(t, 1.0 / self.tau, grid.dt)
            } else {
                self.intensity(t).sqrt()
            };
            Complex64::new(a, 0.0)
        })
    }

    /// ∫ I dt over the whole pulse.
    pub fn total_intensity(&self) -> f64 {
        let half = 0.5 * self.ramp;
        let rise = self.tau * (-half / self.tau).exp();
        rise + 0.5 * self.ramp * (-half / self.tau).exp()
    }

    /// Cumulative ∫_{−∞}^{t} I dt.
    fn cumulative(&self, t: f64) -> f64 {
        let half = 0.5 * self.ramp;
        let peak = (-half / self.tau).exp();
        if t < -half {
            self.tau * (t / self.tau).exp()
        } else if t <= half {
            let x = t + half;
            self.tau * peak + peak * (x - 0.5 * x * x / self.ramp)
        } else {
            self.total_intensity()
        }
    }

    /// Expected fraction of detection events in [a, b).
    pub fn probability(&self, a: f64, b: f64) -> f64 {
        (self.cumulative(b) - self.cumulative(a)) / self.total_intensity()
    }
}

/// Photon arrival-time histogram with Poisson counts whose means follow the
/// pulse model with `mean_events` events in total. Bin `i` is centred at
/// `grid.time(i)`.
pub fn poisson_histogram<R: Rng + ?Sized>(
    model: &RampedExponential,
    grid: &TimeGrid,
    mean_events: f64,
    rng: &mut R,
) -> Vec<u64> {
    grid.times()
        .map(|t| {
            let lambda = mean_events * model.probability(t - 0.5 * grid.dt, t + 0.5 * grid.dt);
            if lambda > 0.0 {
                Poisson::new(lambda)
                    .map(|p| p.sample(rng) as u64)
                    .unwrap_or(0)
            } else {
                0
            }
        })
        .collect()
}
