//! Input–output model of an empty two-mirror resonator.
//!
//! The single mode obeys da/dt = (iΔ − κ/2)a + √κ₁·s_in with reflected field
//! s_out = −s_in + √κ₁·a. Fields are flux-normalized so that |a|² is the
//! stored fraction of a unit-energy pulse.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_pos, Error, Result};
use crate::pulses::{PulseEnvelope, TimeGrid};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityParams {
    pub r1: f64,
    pub r2: f64,
    /// Total field-energy decay rate in 1/s.
    pub kappa: f64,
    /// Drive detuning from the cavity resonance in rad/s.
    pub detuning: f64,
}

impl CavityParams {
    pub fn with_kappa(r1: f64, r2: f64, kappa: f64, detuning: f64) -> Result<Self> {
        for (name, r) in [("R1", r1), ("R2", r2)] {
            if !(r > 0.0 && r <= 1.0) {
                return Err(Error::domain(
                    "CavityParams",
                    format!("{name} must lie in (0, 1], got {r}"),
                ));
            }
        }
        if r1 == 1.0 && r2 == 1.0 {
            return Err(Error::domain(
                "CavityParams",
                "R1 = R2 = 1 leaves no coupling",
            ));
        }
        check_pos("CavityParams", "kappa", kappa)?;
        if !detuning.is_finite() {
            return Err(Error::domain("CavityParams", "detuning must be finite"));
        }
        Ok(CavityParams {
            r1,
            r2,
            kappa,
            detuning,
        })
    }

    /// κ from the intensity decay time.
    pub fn from_decay_time(r1: f64, r2: f64, decay_time: f64, detuning: f64) -> Result<Self> {
        check_pos("CavityParams", "decay_time", decay_time)?;
        Self::with_kappa(r1, r2, 1.0 / decay_time, detuning)
    }

    pub fn rates(&self) -> CavityRates {
        let t1 = 1.0 - self.r1;
        let t2 = 1.0 - self.r2;
        let coverage = t1 / (t1 + t2);
        CavityRates {
            kappa: self.kappa,
            kappa1: self.kappa * coverage,
            kappa2: self.kappa * (1.0 - coverage),
            coverage,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityRates {
    pub kappa: f64,
    /// Coupling through the input mirror.
    pub kappa1: f64,
    /// Leakage through the back mirror.
    pub kappa2: f64,
    /// κ₁/κ.
    pub coverage: f64,
}

pub fn cavity_rates(params: &CavityParams) -> Result<CavityRates> {
    CavityParams::with_kappa(params.r1, params.r2, params.kappa, params.detuning).map(|p| p.rates())
}

/// Incident field s_in(t). Drives with jumps report both one-sided limits so
/// that integration steps ending on a jump see the correct value.
pub trait Drive {
    /// Limit from below.
    fn left(&self, t: f64) -> Complex64;
    /// Limit from above.
    fn right(&self, t: f64) -> Complex64 {
        self.left(t)
    }
}

impl<F: Fn(f64) -> Complex64> Drive for F {
    fn left(&self, t: f64) -> Complex64 {
        self(t)
    }
}

/// Piecewise-linear interpolation of the samples.
impl Drive for PulseEnvelope {
    fn left(&self, t: f64) -> Complex64 {
        self.value_at(t)
    }
}

/// Unit-energy rising exponential √r·e^{rt/2} cut off at t = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentialDrive {
    /// Intensity growth rate r.
    pub rate: f64,
}

impl Drive for ExponentialDrive {
    fn left(&self, t: f64) -> Complex64 {
        if t <= 0.0 {
            Complex64::new(self.rate.sqrt() * (0.5 * self.rate * t).exp(), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    fn right(&self, t: f64) -> Complex64 {
        if t < 0.0 {
            self.left(t)
        } else {
            Complex64::new(0.0, 0.0)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CavityTrace {
    /// Incident field at the grid times (limits from below).
    pub input: PulseEnvelope,
    pub reflected: PulseEnvelope,
    pub intracavity: PulseEnvelope,
    /// ∫|s_in|² dt over the grid.
    pub input_energy: f64,
    /// ∫|s_out|² dt.
    pub reflected_energy: f64,
    /// κ₂∫|a|² dt.
    pub leaked_energy: f64,
    /// |a(t_end)|².
    pub final_stored: f64,
    /// Relative change of the solution when the internal step is halved.
    pub convergence_change: f64,
}

impl CavityTrace {
    /// Input energy minus everything accounted for, relative to the input.
    pub fn energy_defect(&self) -> f64 {
        (self.input_energy - self.reflected_energy - self.leaked_energy - self.final_stored)
            / self.input_energy
    }
}

/// Grid step bound dt ≤ 1/(50κ).
pub const MIN_SAMPLES_PER_DECAY: f64 = 50.0;
const CONVERGENCE_TOL: f64 = 1e-8;

#[derive(Clone, Copy)]
struct State {
    a: Complex64,
    e_in: f64,
    e_out: f64,
    e_leak: f64,
}

impl State {
    fn axpy(self, h: f64, d: State) -> State {
        State {
            a: self.a + d.a * h,
            e_in: self.e_in + d.e_in * h,
            e_out: self.e_out + d.e_out * h,
            e_leak: self.e_leak + d.e_leak * h,
        }
    }
}

struct Model {
    decay: Complex64,
    sqrt_k1: f64,
    kappa2: f64,
}

impl Model {
    fn rhs(&self, y: &State, s: Complex64) -> State {
        let out = -s + self.sqrt_k1 * y.a;
        State {
            a: self.decay * y.a + self.sqrt_k1 * s,
            e_in: s.norm_sqr(),
            e_out: out.norm_sqr(),
            e_leak: self.kappa2 * y.a.norm_sqr(),
        }
    }

    fn integrate<D: Drive + ?Sized>(
        &self,
        drive: &D,
        grid: &TimeGrid,
        substeps: usize,
    ) -> (Vec<Complex64>, State) {
        let h = grid.dt / substeps as f64;
        let mut y = State {
            a: Complex64::new(0.0, 0.0),
            e_in: 0.0,
            e_out: 0.0,
            e_leak: 0.0,
        };
        let mut a = Vec::with_capacity(grid.len);
        a.push(y.a);
        for n in 0..grid.len - 1 {
            for k in 0..substeps {
                let t = grid.time(n) + k as f64 * h;
                // land exactly on the node so a jump there is seen from below
                let t_next = if k + 1 == substeps {
                    grid.time(n + 1)
                } else {
                    t + h
                };
                let k1 = self.rhs(&y, drive.right(t));
                let mid = drive.left(t + 0.5 * h);
                let k2 = self.rhs(&y.axpy(0.5 * h, k1), mid);
                let k3 = self.rhs(&y.axpy(0.5 * h, k2), mid);
                let k4 = self.rhs(&y.axpy(h, k3), drive.left(t_next));
                y = State {
                    a: y.a + (k1.a + 2.0 * k2.a + 2.0 * k3.a + k4.a) * (h / 6.0),
                    e_in: y.e_in + (k1.e_in + 2.0 * k2.e_in + 2.0 * k3.e_in + k4.e_in) * (h / 6.0),
                    e_out: y.e_out
                        + (k1.e_out + 2.0 * k2.e_out + 2.0 * k3.e_out + k4.e_out) * (h / 6.0),
                    e_leak: y.e_leak
                        + (k1.e_leak + 2.0 * k2.e_leak + 2.0 * k3.e_leak + k4.e_leak) * (h / 6.0),
                };
            }
            a.push(y.a);
        }
        (a, y)
    }
}

/// Integrates the mode from a(t₀) = 0 over the grid with classic RK4. Each
/// grid interval is split so the internal step resolves both κ and Δ; the
/// result is accepted only if halving that step changes it by less than 1e-8.
pub fn simulate_reflection<D: Drive + ?Sized>(
    drive: &D,
    grid: &TimeGrid,
    params: &CavityParams,
) -> Result<CavityTrace> {
    let rates = cavity_rates(params)?;
    if grid.len < 2 {
        return Err(Error::domain(
            "simulate_reflection",
            "grid needs at least two points",
        ));
    }
    if grid.dt * rates.kappa * MIN_SAMPLES_PER_DECAY > 1.0 + 1e-12 {
        return Err(Error::domain(
            "simulate_reflection",
            format!(
                "step {:e} s exceeds 1/(50 kappa) = {:e} s",
                grid.dt,
                1.0 / (MIN_SAMPLES_PER_DECAY * rates.kappa)
            ),
        ));
    }
    let model = Model {
        decay: Complex64::new(-0.5 * rates.kappa, params.detuning),
        sqrt_k1: rates.kappa1.sqrt(),
        kappa2: rates.kappa2,
    };
    let fastest = rates.kappa.max(params.detuning.abs());
    let substeps = ((grid.dt * fastest * 200.0).ceil() as usize).max(1);
    let (a, last) = model.integrate(drive, grid, substeps);
    let (a_fine, last_fine) = model.integrate(drive, grid, 2 * substeps);

    let peak = a.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut change = 0.0f64;
    if peak > 0.0 {
        for (x, y) in a.iter().zip(&a_fine) {
            change = change.max((x - y).norm() / peak);
        }
    }
    if last.e_in > 0.0 {
        for (x, y) in [
            (last.e_out, last_fine.e_out),
            (last.e_leak, last_fine.e_leak),
        ] {
            change = change.max((x - y).abs() / last.e_in);
        }
    }
    if change > CONVERGENCE_TOL {
        return Err(Error::Numerical {
            op: "simulate_reflection",
            msg: "solution changes when the step is halved".into(),
            achieved: change,
        });
    }

    let s_in: Vec<Complex64> = (0..grid.len)
        .map(|n| {
            if n == 0 {
                drive.right(grid.time(0))
            } else {
                drive.left(grid.time(n))
            }
        })
        .collect();
    let s_out: Vec<Complex64> = s_in
        .iter()
        .zip(&a_fine)
        .map(|(s, a)| -s + model.sqrt_k1 * a)
        .collect();
    Ok(CavityTrace {
        input: PulseEnvelope::new(grid.t0, grid.dt, s_in)?,
        reflected: PulseEnvelope::new(grid.t0, grid.dt, s_out)?,
        intracavity: PulseEnvelope::new(grid.t0, grid.dt, a_fine.clone())?,
        input_energy: last_fine.e_in,
        reflected_energy: last_fine.e_out,
        leaked_energy: last_fine.e_leak,
        final_stored: a_fine[grid.len - 1].norm_sqr(),
        convergence_change: change,
    })
}

/// η_store = eta_spatial·max|a|², with the drive rescaled to unit energy
/// over the grid.
pub fn storage_efficiency<D: Drive + ?Sized>(
    drive: &D,
    grid: &TimeGrid,
    params: &CavityParams,
    eta_spatial: f64,
) -> Result<f64> {
    crate::error::check_unit("storage_efficiency", "eta_spatial", eta_spatial)?;
    let trace = simulate_reflection(drive, grid, params)?;
    if !(trace.input_energy > 0.0) {
        return Err(Error::domain("storage_efficiency", "zero-energy drive"));
    }
    let peak = trace
        .intracavity
        .samples()
        .iter()
        .map(|a| a.norm_sqr())
        .fold(0.0, f64::max);
    Ok(eta_spatial * peak / trace.input_energy)
}

/// Intensity rate r′ of a rising exponential whose temporal overlap with the
/// cavity-matched envelope (rate κ) is `eta_t`; the slower of the two roots.
pub fn mismatched_rate_for_overlap(kappa: f64, eta_t: f64) -> Result<f64> {
    check_pos("mismatched_rate_for_overlap", "kappa", kappa)?;
    if !(eta_t > 0.0 && eta_t <= 1.0) {
        return Err(Error::domain(
            "mismatched_rate_for_overlap",
            "eta_t must lie in (0, 1]",
        ));
    }
    // 2x/(1 + x²) = η with x = √(r′/κ)
    let x = (1.0 - (1.0 - eta_t * eta_t).sqrt()) / eta_t;
    Ok(kappa * x * x)
}
