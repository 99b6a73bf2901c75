//! Pulse scattering evaluated per spectral component.
//!
//! Transforms use Ẽ(Δ) = ∫E(t)e^{iΔt}dt. Under this convention each
//! component is multiplied by the CW transmission t(Δ + Δ_carrier).

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::cw::{transmission_amplitude, CouplingParams};
use crate::error::{check_pos, check_unit, Error, Result};
use crate::pulses::PulseEnvelope;
use crate::quadrature::trapezoid_uniform_complex;

/// Margin on each side of t = 0, in units of 1/Γ.
pub const PADDING_LIFETIMES: f64 = 20.0;

/// Sampled spectrum on the FFT-conjugate grid of a pulse envelope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralPulse {
    /// Δ_k in rad/s, in FFT order (non-negative frequencies first).
    pub delta: Vec<f64>,
    pub values: Vec<Complex64>,
    t0: f64,
    dt: f64,
}

impl SpectralPulse {
    pub fn from_envelope(env: &PulseEnvelope) -> SpectralPulse {
        forward(env.samples().to_vec(), env.t0(), env.dt())
    }

    /// Frequency step dΔ = 2π/(N·dt).
    pub fn d_delta(&self) -> f64 {
        2.0 * std::f64::consts::PI / (self.values.len() as f64 * self.dt)
    }

    pub fn to_envelope(&self) -> Result<PulseEnvelope> {
        PulseEnvelope::new(
            self.t0,
            self.dt,
            backward(&self.values, &self.delta, self.t0, self.dt),
        )
    }
}

fn frequencies(n: usize, dt: f64) -> Vec<f64> {
    let d = 2.0 * std::f64::consts::PI / (n as f64 * dt);
    (0..n)
        .map(|k| {
            if k < n.div_ceil(2) {
                k as f64 * d
            } else {
                (k as f64 - n as f64) * d
            }
        })
        .collect()
}

fn forward(mut buf: Vec<Complex64>, t0: f64, dt: f64) -> SpectralPulse {
    let n = buf.len();
    // rustfft's inverse transform carries the e^{+i} kernel.
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    let delta = frequencies(n, dt);
    for (v, d) in buf.iter_mut().zip(&delta) {
        *v *= Complex64::from_polar(dt, d * t0);
    }
    SpectralPulse {
        delta,
        values: buf,
        t0,
        dt,
    }
}

fn backward(values: &[Complex64], delta: &[f64], t0: f64, dt: f64) -> Vec<Complex64> {
    let n = values.len();
    let mut buf: Vec<Complex64> = values
        .iter()
        .zip(delta)
        .map(|(v, d)| v * Complex64::from_polar(1.0 / (n as f64 * dt), -d * t0))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    buf
}

/// Outgoing in-mode envelope for an incident pulse, on the input grid.
/// The input must extend at least 20/Γ to either side of t = 0.
pub fn scatter_pulse(
    env: &PulseEnvelope,
    g: f64,
    gamma: f64,
    carrier_detuning: f64,
) -> Result<PulseEnvelope> {
    check_unit("scatter_pulse", "G", g)?;
    check_pos("scatter_pulse", "Gamma", gamma)?;
    if !carrier_detuning.is_finite() {
        return Err(Error::domain(
            "scatter_pulse",
            "carrier detuning must be finite",
        ));
    }
    let margin = PADDING_LIFETIMES / gamma;
    let slack = 0.5 * env.dt();
    if env.t0() > -margin + slack || env.t_end() < margin - slack {
        return Err(Error::domain(
            "scatter_pulse",
            format!(
                "pulse grid [{:e}, {:e}] s must extend {margin:e} s to both sides of t = 0",
                env.t0(),
                env.t_end()
            ),
        ));
    }
    if g == 0.0 {
        return Ok(env.clone());
    }
    let n = env.len();
    // Zero padding after the pulse keeps the causal response from wrapping.
    let pad = (margin / env.dt()).ceil() as usize;
    let len = (n + pad).next_power_of_two();
    let mut buf = env.samples().to_vec();
    buf.resize(len, Complex64::new(0.0, 0.0));
    let mut spec = forward(buf, env.t0(), env.dt());
    let p = CouplingParams {
        g,
        gamma,
        delta: 0.0,
        omega0: 1.0,
    };
    for (v, d) in spec.values.iter_mut().zip(&spec.delta) {
        *v *= transmission_amplitude(&CouplingParams {
            delta: d + carrier_detuning,
            ..p
        });
    }
    let mut out = backward(&spec.values, &spec.delta, env.t0(), env.dt());
    out.truncate(n);
    PulseEnvelope::new(env.t0(), env.dt(), out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    /// Coefficient of e^{Γt/2}θ(−t).
    pub c_rise: Complex64,
    /// Coefficient of e^{−Γt/2}θ(t).
    pub c_decay: Complex64,
    /// Unexplained share of the envelope energy.
    pub residual_energy_fraction: f64,
    /// Energy in the rising part relative to the envelope energy.
    pub rise_energy_fraction: f64,
    /// Energy in the decaying part relative to the envelope energy.
    pub decay_energy_fraction: f64,
}

fn basis(t: f64, gamma: f64, dt: f64) -> (f64, f64) {
    let e = (-0.5 * gamma * t.abs()).exp();
    if t.abs() <= 1e-9 * dt {
        (0.5, 0.5)
    } else if t < 0.0 {
        (e, 0.0)
    } else {
        (0.0, e)
    }
}

/// Least-squares fit of the envelope by c_rise·e^{Γt/2}θ(−t) +
/// c_decay·e^{−Γt/2}θ(t) with discrete inner products on the envelope grid.
pub fn decompose_exponentials(env: &PulseEnvelope, gamma: f64) -> Result<Decomposition> {
    check_pos("decompose_exponentials", "Gamma", gamma)?;
    if env.t0() >= 0.0 || env.t_end() <= 0.0 {
        return Err(Error::domain(
            "decompose_exponentials",
            "grid must straddle t = 0",
        ));
    }
    let energy = env.energy();
    if !(energy > 0.0) {
        return Err(Error::domain(
            "decompose_exponentials",
            "zero-energy envelope",
        ));
    }
    let dt = env.dt();
    let b: Vec<(f64, f64)> = env.times().map(|t| basis(t, gamma, dt)).collect();
    let real = |f: &dyn Fn(&(f64, f64)) -> f64| {
        let v: Vec<Complex64> = b.iter().map(|x| Complex64::new(f(x), 0.0)).collect();
        trapezoid_uniform_complex(&v, dt).re
    };
    let g11 = real(&|x| x.0 * x.0);
    let g12 = real(&|x| x.0 * x.1);
    let g22 = real(&|x| x.1 * x.1);
    let proj = |pick: fn(&(f64, f64)) -> f64| {
        let v: Vec<Complex64> = env
            .samples()
            .iter()
            .zip(&b)
            .map(|(e, x)| e * pick(x))
            .collect();
        trapezoid_uniform_complex(&v, dt)
    };
    let r1 = proj(|x| x.0);
    let r2 = proj(|x| x.1);
    let det = g11 * g22 - g12 * g12;
    let c_rise = (r1 * g22 - r2 * g12) / det;
    let c_decay = (r2 * g11 - r1 * g12) / det;
    let residual: Vec<f64> = env
        .samples()
        .iter()
        .zip(&b)
        .map(|(e, x)| (e - c_rise * x.0 - c_decay * x.1).norm_sqr())
        .collect();
    let residual = crate::quadrature::trapezoid_uniform(&residual, dt);
    Ok(Decomposition {
        c_rise,
        c_decay,
        residual_energy_fraction: residual / energy,
        rise_energy_fraction: c_rise.norm_sqr() * g11 / energy,
        decay_energy_fraction: c_decay.norm_sqr() * g22 / energy,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBudget {
    pub in_mode_energy_fraction: f64,
    pub out_of_mode_fraction: f64,
    /// (1−G)² + G², the in-mode share for a matched exponential pulse.
    pub matched_in_mode: f64,
    /// 2G(1−G).
    pub matched_out_of_mode: f64,
}

pub fn energy_budget(
    input: &PulseEnvelope,
    output: &PulseEnvelope,
    g: f64,
) -> Result<EnergyBudget> {
    check_unit("energy_budget", "G", g)?;
    if input.grid() != output.grid() {
        return Err(Error::domain(
            "energy_budget",
            "input and output grids differ",
        ));
    }
    let e_in = input.energy();
    if !(e_in > 0.0) {
        return Err(Error::domain("energy_budget", "zero-energy input"));
    }
    let frac = output.energy() / e_in;
    Ok(EnergyBudget {
        in_mode_energy_fraction: frac,
        out_of_mode_fraction: 1.0 - frac,
        matched_in_mode: (1.0 - g).powi(2) + g * g,
        matched_out_of_mode: 2.0 * g * (1.0 - g),
    })
}
