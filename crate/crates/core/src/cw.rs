//! Continuous-wave observables of a single atom driven through the focusing
//! optics, and extraction of G from a measured saturation curve.
//!
//! The coherent field remaining in the incident mode after the atom is
//!
//! ```text
//! t(Δ) = 1 − 2G / (1 − 2iΔ/Γ)
//! ```
//!
//! Its argument is the familiar phase-shift expression
//! arg(1 + 4Δ²/Γ² − 2G − i·4GΔ/Γ), and |1 − t|² is the in-mode share G of
//! the scattering ratio 4G/(1 + 4Δ²/Γ²).

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::error::{check_nonneg, check_pos, check_unit, Error, Result};
use crate::geometry::FULL_SPHERE_WEIGHT;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingParams {
    /// Coupling efficiency in [0, 1].
    pub g: f64,
    /// Excited-state decay rate (rad/s).
    pub gamma: f64,
    /// Laser detuning (rad/s).
    pub delta: f64,
    /// Transition angular frequency (rad/s).
    pub omega0: f64,
}

impl CouplingParams {
    pub fn new(g: f64, gamma: f64, delta: f64, omega0: f64) -> Result<Self> {
        check_unit("CouplingParams", "G", g)?;
        check_pos("CouplingParams", "Gamma", gamma)?;
        check_pos("CouplingParams", "omega0", omega0)?;
        if !delta.is_finite() {
            return Err(Error::domain("CouplingParams", "Delta must be finite"));
        }
        Ok(CouplingParams {
            g,
            gamma,
            delta,
            omega0,
        })
    }

    /// Parameters in units of Γ (Γ = 1, ω₀ irrelevant).
    pub fn normalized(g: f64, delta_over_gamma: f64) -> Result<Self> {
        Self::new(g, 1.0, delta_over_gamma, 1.0)
    }

    fn lorentz_denominator(&self) -> f64 {
        let x = 2.0 * self.delta / self.gamma;
        1.0 + x * x
    }
}

/// Coherent amplitude in the incident mode after the atom, normalized to the
/// atom-free value 1.
pub fn transmission_amplitude(p: &CouplingParams) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    one - 2.0 * p.g / Complex64::new(1.0, -2.0 * p.delta / p.gamma)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseShift {
    /// Phase in (−π, π]; NaN when indeterminate.
    pub value: f64,
    /// Set at Δ = 0, G = 1/2 where the transmitted field vanishes.
    pub indeterminate: bool,
}

/// Phase of the transmitted coherent field, valid for negligible saturation.
pub fn phase_shift(p: &CouplingParams) -> PhaseShift {
    let x = p.delta / p.gamma;
    let re = 1.0 + 4.0 * x * x - 2.0 * p.g;
    let im = -4.0 * p.g * x;
    if re == 0.0 && im == 0.0 {
        return PhaseShift {
            value: f64::NAN,
            indeterminate: true,
        };
    }
    let mut value = im.atan2(re);
    if value == -PI {
        value = PI;
    }
    PhaseShift {
        value,
        indeterminate: false,
    }
}

/// Coherently scattered power over incident power. The factor 1/(1 + s)
/// models the loss of coherent scattering with saturation.
pub fn scattering_ratio(p: &CouplingParams, s: f64) -> Result<f64> {
    if s.is_nan() || s < 0.0 {
        return Err(Error::domain(
            "scattering_ratio",
            format!("s must be >= 0, got {s}"),
        ));
    }
    if s.is_infinite() {
        return Ok(0.0);
    }
    Ok(4.0 * p.g / (p.lorentz_denominator() * (1.0 + s)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transmission {
    pub value: f64,
    /// G too large for the solid angle Ω; the raw value fell outside [0, 1].
    pub inconsistent: bool,
}

/// Resonant transmitted power fraction when focusing and collection share
/// the same aperture of weighted solid angle `omega`.
pub fn transmitted_fraction(g: f64, omega: f64) -> Result<Transmission> {
    check_unit("transmitted_fraction", "G", g)?;
    if !omega.is_finite() || !(0.0..=FULL_SPHERE_WEIGHT * (1.0 + 1e-12)).contains(&omega) {
        return Err(Error::domain(
            "transmitted_fraction",
            format!("omega must lie in [0, 8pi/3], got {omega}"),
        ));
    }
    let raw = 1.0 - 4.0 * g * (1.0 - (omega / FULL_SPHERE_WEIGHT).min(1.0));
    Ok(Transmission {
        value: raw.clamp(0.0, 1.0),
        inconsistent: !(0.0..=1.0).contains(&raw),
    })
}

/// S = G·(8P/(ħω₀Γ))·1/(1 + 4Δ²/Γ²).
pub fn saturation_parameter(power: f64, p: &CouplingParams, c: &PhysicalConstants) -> Result<f64> {
    check_nonneg("saturation_parameter", "P", power)?;
    Ok(p.g * 8.0 * power / (c.hbar * p.omega0 * p.gamma) / p.lorentz_denominator())
}

/// Incident power giving S = 1 at the parameters' G, Δ, Γ, ω₀.
pub fn power_for_unit_saturation(p: &CouplingParams, c: &PhysicalConstants) -> Result<f64> {
    if p.g == 0.0 {
        return Err(Error::domain(
            "power_for_unit_saturation",
            "G = 0 never saturates",
        ));
    }
    Ok(c.hbar * p.omega0 * p.gamma * p.lorentz_denominator() / (8.0 * p.g))
}

/// Inverse of the saturation law: the G for which `p_at_s1` gives S = 1.
pub fn g_from_unit_saturation_power(
    p_at_s1: f64,
    gamma: f64,
    delta: f64,
    omega0: f64,
    c: &PhysicalConstants,
) -> Result<f64> {
    check_pos("g_from_unit_saturation_power", "P", p_at_s1)?;
    check_pos("g_from_unit_saturation_power", "Gamma", gamma)?;
    check_pos("g_from_unit_saturation_power", "omega0", omega0)?;
    let x = 2.0 * delta / gamma;
    Ok(c.hbar * omega0 * gamma * (1.0 + x * x) / (8.0 * p_at_s1))
}

/// Steady-state photon scattering rate of a two-level atom, (Γ/2)·s/(1+s).
pub fn fluorescence_rate(s: f64, gamma: f64) -> Result<f64> {
    if s.is_nan() || s < 0.0 {
        return Err(Error::domain(
            "fluorescence_rate",
            format!("s must be >= 0, got {s}"),
        ));
    }
    if s.is_infinite() {
        return Ok(0.5 * gamma);
    }
    Ok(0.5 * gamma * s / (1.0 + s))
}

/// Scales a two-level G by the inverse relative oscillator strength of the
/// driven transition (3 for the S½→P½ π line).
pub fn multilevel_correction(g_two_level: f64, factor: f64) -> Result<f64> {
    check_pos("multilevel_correction", "factor", factor)?;
    check_nonneg("multilevel_correction", "G", g_two_level)?;
    let g = factor * g_two_level;
    if g > 1.0 {
        return Err(Error::domain(
            "multilevel_correction",
            format!("corrected G = {g} exceeds 1"),
        ));
    }
    Ok(g)
}

/// Fluorescence rate vs incident power at fixed Δ, Γ, ω₀.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaturationDataset {
    /// (incident power in W, detected rate in 1/s)
    pub points: Vec<(f64, f64)>,
    pub delta: f64,
    pub gamma: f64,
    pub omega0: f64,
    /// Known background rate; fitted when absent.
    pub background: Option<f64>,
}

impl SaturationDataset {
    pub fn validate(&self) -> Result<()> {
        if self.points.len() < 4 {
            return Err(Error::Fit(format!(
                "need at least 4 points, got {}",
                self.points.len()
            )));
        }
        for &(p, r) in &self.points {
            if !(p.is_finite() && p > 0.0) {
                return Err(Error::Fit(format!("power must be > 0, got {p}")));
            }
            if !(r.is_finite() && r >= 0.0) {
                return Err(Error::Fit(format!("rate must be >= 0, got {r}")));
            }
        }
        let (lo, hi) = self.power_span();
        if hi / lo < 10.0 {
            return Err(Error::Fit(format!(
                "powers span only {:.2} decades; need at least one",
                (hi / lo).log10()
            )));
        }
        check_pos("SaturationDataset", "Gamma", self.gamma)?;
        check_pos("SaturationDataset", "omega0", self.omega0)?;
        Ok(())
    }

    fn power_span(&self) -> (f64, f64) {
        self.points
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), &(p, _)| {
                (lo.min(p), hi.max(p))
            })
    }
}

/// Model rate A·S/(1+S) + B with S = P/P₁.
pub fn saturation_model(power: f64, p_at_s1: f64, amplitude: f64, background: f64) -> f64 {
    let s = power / p_at_s1;
    amplitude * s / (1.0 + s) + background
}

/// Synthetic saturation curve with optional multiplicative Gaussian noise
/// of relative size `rel_noise`.
pub fn synthetic_saturation_points<R: Rng + ?Sized>(
    powers: &[f64],
    p_at_s1: f64,
    amplitude: f64,
    background: f64,
    rel_noise: f64,
    rng: &mut R,
) -> Vec<(f64, f64)> {
    let normal = Normal::new(0.0, rel_noise.max(0.0)).expect("finite noise level");
    powers
        .iter()
        .map(|&p| {
            let clean = saturation_model(p, p_at_s1, amplitude, background);
            let noise = if rel_noise > 0.0 {
                normal.sample(rng)
            } else {
                0.0
            };
            (p, (clean * (1.0 + noise)).max(0.0))
        })
        .collect()
}

/// `n` powers spaced log-uniformly over [lo, hi].
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let n = n.max(2);
    (0..n)
        .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    /// Relative residuals when all rates are positive, absolute otherwise.
    #[default]
    Auto,
    Uniform,
    /// Residuals divided by the measured rate (multiplicative noise).
    Relative,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub weighting: Weighting,
    /// Relative parameter-step tolerance.
    pub xtol: f64,
    pub max_iterations: usize,
    /// Number of log-spaced starting values for P₁.
    pub starts: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            weighting: Weighting::Auto,
            xtol: 1e-8,
            max_iterations: 500,
            starts: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaturationFit {
    pub g_fit: f64,
    pub g_fit_stderr: f64,
    /// Power giving S = 1, W.
    pub p_at_s1: f64,
    pub p_at_s1_stderr: f64,
    pub amplitude_scale: f64,
    pub amplitude_scale_stderr: f64,
    pub background: f64,
    /// Zero when the background was supplied.
    pub background_stderr: f64,
    /// sqrt of the weighted residual sum of squares.
    pub residual_norm: f64,
    pub iterations: usize,
}

struct Problem<'a> {
    powers: Vec<f64>,
    rates: Vec<f64>,
    weights: Vec<f64>,
    fixed_background: Option<f64>,
    _data: &'a SaturationDataset,
}

impl Problem<'_> {
    fn n_params(&self) -> usize {
        if self.fixed_background.is_some() {
            2
        } else {
            3
        }
    }

    /// Parameters: [ln P₁, A, (B)].
    fn unpack(&self, x: &DVector<f64>) -> (f64, f64, f64) {
        let b = self.fixed_background.unwrap_or_else(|| x[2]);
        (x[0].exp(), x[1], b)
    }

    fn residuals(&self, x: &DVector<f64>) -> DVector<f64> {
        let (p1, a, b) = self.unpack(x);
        DVector::from_iterator(
            self.powers.len(),
            self.powers
                .iter()
                .zip(&self.rates)
                .zip(&self.weights)
                .map(|((&p, &y), &w)| w * (saturation_model(p, p1, a, b) - y)),
        )
    }

    fn jacobian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let (p1, a, _) = self.unpack(x);
        let m = self.n_params();
        let mut j = DMatrix::zeros(self.powers.len(), m);
        for (i, (&p, &w)) in self.powers.iter().zip(&self.weights).enumerate() {
            let s = p / p1;
            let frac = s / (1.0 + s);
            // d/d(ln P₁) of A·s/(1+s) = −A·s/(1+s)²
            j[(i, 0)] = -w * a * s / ((1.0 + s) * (1.0 + s));
            j[(i, 1)] = w * frac;
            if m == 3 {
                j[(i, 2)] = w;
            }
        }
        j
    }

    /// Linear least squares for (A, B) at fixed P₁.
    fn linear_start(&self, p1: f64) -> DVector<f64> {
        let m = self.n_params();
        let n = self.powers.len();
        let mut design = DMatrix::zeros(n, m - 1);
        let mut rhs = DVector::zeros(n);
        for i in 0..n {
            let s = self.powers[i] / p1;
            let w = self.weights[i];
            design[(i, 0)] = w * s / (1.0 + s);
            if m == 3 {
                design[(i, 1)] = w;
            }
            rhs[i] = w * (self.rates[i] - self.fixed_background.unwrap_or(0.0));
        }
        let ab = design
            .clone()
            .svd(true, true)
            .solve(&rhs, 1e-14)
            .unwrap_or_else(|_| DVector::zeros(m - 1));
        let mut x = DVector::zeros(m);
        x[0] = p1.ln();
        for k in 0..m - 1 {
            x[k + 1] = ab[k];
        }
        x
    }
}

struct LmResult {
    x: DVector<f64>,
    cost: f64,
    iterations: usize,
    converged: bool,
}

/// Levenberg–Marquardt with Marquardt's diagonal scaling.
fn levenberg_marquardt(problem: &Problem<'_>, x0: DVector<f64>, opts: &FitOptions) -> LmResult {
    let mut x = x0;
    let mut r = problem.residuals(&x);
    let mut cost = r.norm_squared();
    let mut lambda = 1e-3;
    for it in 0..opts.max_iterations {
        let j = problem.jacobian(&x);
        let jt = j.transpose();
        let jtj = &jt * &j;
        let g = &jt * &r;
        let mut accepted = false;
        let mut step_small = false;
        for _ in 0..60 {
            let mut a = jtj.clone();
            for k in 0..a.nrows() {
                a[(k, k)] += lambda * jtj[(k, k)].max(1e-300);
            }
            let Some(step) = a.cholesky().map(|c| c.solve(&(-&g))) else {
                lambda *= 10.0;
                continue;
            };
            let trial = &x + &step;
            let tr = problem.residuals(&trial);
            let tc = tr.norm_squared();
            if tc.is_finite() && tc <= cost {
                step_small = step
                    .iter()
                    .zip(trial.iter())
                    .all(|(s, v)| s.abs() <= opts.xtol * (v.abs() + opts.xtol));
                x = trial;
                r = tr;
                cost = tc;
                lambda = (lambda / 10.0).max(1e-15);
                accepted = true;
                break;
            }
            lambda *= 10.0;
            if lambda > 1e20 {
                break;
            }
        }
        if !accepted || step_small {
            // A rejected step at huge damping means no descent direction is
            // left: the gradient vanishes to working precision.
            return LmResult {
                x,
                cost,
                iterations: it + 1,
                converged: true,
            };
        }
    }
    LmResult {
        x,
        cost,
        iterations: opts.max_iterations,
        converged: false,
    }
}

/// Fits A·S(P)/(1 + S(P)) + B to the data and converts the fitted
/// unit-saturation power into G through the saturation law.
pub fn fit_saturation(
    data: &SaturationDataset,
    opts: &FitOptions,
    c: &PhysicalConstants,
) -> Result<SaturationFit> {
    data.validate()?;
    let powers: Vec<f64> = data.points.iter().map(|p| p.0).collect();
    let rates: Vec<f64> = data.points.iter().map(|p| p.1).collect();
    let relative = match opts.weighting {
        Weighting::Uniform => false,
        Weighting::Relative => {
            if rates.iter().any(|&r| r <= 0.0) {
                return Err(Error::Fit("relative weighting needs positive rates".into()));
            }
            true
        }
        Weighting::Auto => rates.iter().all(|&r| r > 0.0),
    };
    let weights: Vec<f64> = if relative {
        rates.iter().map(|r| 1.0 / r).collect()
    } else {
        let scale = rates.iter().cloned().fold(0.0, f64::max).max(1e-300);
        vec![1.0 / scale; rates.len()]
    };
    let problem = Problem {
        powers,
        rates,
        weights,
        fixed_background: data.background,
        _data: data,
    };

    let (lo, hi) = data.power_span();
    let mut best: Option<LmResult> = None;
    for p1 in log_spaced(lo, hi, opts.starts.max(1)) {
        let res = levenberg_marquardt(&problem, problem.linear_start(p1), opts);
        if res.converged && res.cost.is_finite() && best.as_ref().is_none_or(|b| res.cost < b.cost)
        {
            best = Some(res);
        }
    }
    let best = best.ok_or_else(|| {
        Error::Fit(format!(
            "no start converged within {} iterations",
            opts.max_iterations
        ))
    })?;

    let (p1, a, b) = problem.unpack(&best.x);
    let s_min = lo / p1;
    let s_max = hi / p1;
    if s_max < 0.1 || s_min > 10.0 || !(a > 0.0) {
        return Err(Error::Fit(format!(
            "degenerate data: fitted S spans [{s_min:.3e}, {s_max:.3e}] (A = {a:.3e}); \
             the curve never turns over inside the measured powers"
        )));
    }

    let n = problem.powers.len();
    let m = problem.n_params();
    let j = problem.jacobian(&best.x);
    let jtj = j.transpose() * &j;
    let dof = n.saturating_sub(m).max(1) as f64;
    let s2 = best.cost / dof;
    let cov = jtj
        .try_inverse()
        .ok_or_else(|| Error::Fit("singular normal matrix at the optimum".into()))?
        * s2;
    let se = |k: usize| cov[(k, k)].max(0.0).sqrt();
    let sigma_ln_p1 = se(0);

    let g_fit = g_from_unit_saturation_power(p1, data.gamma, data.delta, data.omega0, c)?;
    if g_fit > 1.0 {
        return Err(Error::Fit(format!(
            "fitted S = 1 power {p1:e} W implies G = {g_fit} > 1"
        )));
    }
    Ok(SaturationFit {
        g_fit,
        g_fit_stderr: g_fit * sigma_ln_p1,
        p_at_s1: p1,
        p_at_s1_stderr: p1 * sigma_ln_p1,
        amplitude_scale: a,
        amplitude_scale_stderr: se(1),
        background: b,
        background_stderr: if m == 3 { se(2) } else { 0.0 },
        residual_norm: best.cost.sqrt(),
        iterations: best.iterations,
    })
}
