//! Subcommands other than `fig`.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use dipole_coupler::cavity::{
    mismatched_rate_for_overlap, simulate_reflection, storage_efficiency,
};
use dipole_coupler::cw::{
    fit_saturation, g_from_unit_saturation_power, multilevel_correction, phase_shift,
    scattering_ratio, transmission_amplitude, transmitted_fraction,
};
use dipole_coupler::geometry::{omega_lens, omega_parabola};
use dipole_coupler::io::{
    read_cavity_spec, read_envelope, read_histogram, read_radial_profile, read_saturation_points,
    write_envelope, write_radial_profile, write_trace,
};
use dipole_coupler::pulses::{
    absorption_probability, envelope_from_histogram, poisson_histogram, temporal_overlap,
    temporal_overlap_aligned,
};
use dipole_coupler::pupil::{
    apply_aberration, clipping_loss, coupling_efficiency, doughnut_field, ideal_field,
    optimize_waist_with, pupil_overlap, strehl_ratio, AberrationProfile,
};
use dipole_coupler::spectral::{
    decompose_exponentials, energy_budget, scatter_pulse, PADDING_LIFETIMES,
};
use dipole_coupler::stokes::{measured_eta, parse_stokes_map, reconstruct_field};
use dipole_coupler::{
    CavityParams, Complex64, CouplingParams, DipoleKind, DipoleSpec, ExponentialDrive, FitOptions,
    LensCount, MirrorGeometry, Polarization, PulseEnvelope, RadialPupilField, RampedExponential,
    SaturationDataset, TimeGrid, Weighting, FULL_SPHERE_WEIGHT,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::CliError;
use crate::output::{par_map, Cell, Table};
use crate::{
    CavityArgs, Context, DipoleArg, MirrorArgs, OverlapArgs, PhaseArgs, PolarizationArg,
    PulseModel, PulseScatterArgs, SatFitArgs, SolidAngleArgs, StokesArgs, TemporalArgs,
    TransmissionArgs, WaistArgs, WeightingArg,
};

type Out = Result<Table, CliError>;

/// Buffered writer for an output file.
pub fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io("creating", path, e))
}

fn dipole(kind: DipoleArg, tilt: f64) -> Result<DipoleSpec, CliError> {
    let kind = match kind {
        DipoleArg::Pi => DipoleKind::LinearPi,
        DipoleArg::Sigma => DipoleKind::CircularSigma,
    };
    Ok(DipoleSpec::new(kind, tilt)?)
}

/// Weighted solid angle of a mirror with focal length 1; zero depth covers
/// nothing.
fn mirror_omega(hf: f64, hole: f64, spec: &DipoleSpec) -> Result<f64, CliError> {
    let geom = MirrorGeometry::with_hole(1.0, hf, hole)?;
    if hf == 0.0 {
        return Ok(0.0);
    }
    Ok(omega_parabola(&geom, spec)?)
}

pub const SWEEP_STEPS: usize = 1000;
pub const SWEEP_MAX_HF: f64 = 10.0;
pub const REFERENCE_NA: f64 = 0.95;

/// Mirror fractions for both dipole kinds over h/f ∈ [0, 10] in steps of
/// 0.01, with the one- and two-lens values for a dipole perpendicular to the
/// optical axis as constant columns.
pub fn solid_angle_sweep(ctx: &Context, tilt: f64, lens_na: f64) -> Out {
    let pi = dipole(DipoleArg::Pi, tilt)?;
    let sigma = dipole(DipoleArg::Sigma, tilt)?;
    let perp = DipoleSpec::linear_perpendicular();
    let lens1 = omega_lens(lens_na, LensCount::One, &perp)? / FULL_SPHERE_WEIGHT;
    let lens2 = omega_lens(lens_na, LensCount::Two, &perp)? / FULL_SPHERE_WEIGHT;
    let hfs: Vec<f64> = (0..=SWEEP_STEPS)
        .map(|i| SWEEP_MAX_HF * i as f64 / SWEEP_STEPS as f64)
        .collect();
    let rows = par_map(&hfs, ctx.threads, |&hf| -> Result<Vec<Cell>, CliError> {
        Ok(vec![
            hf.into(),
            (mirror_omega(hf, 0.0, &pi)? / FULL_SPHERE_WEIGHT).into(),
            (mirror_omega(hf, 0.0, &sigma)? / FULL_SPHERE_WEIGHT).into(),
            lens1.into(),
            lens2.into(),
        ])
    });
    let mut t = Table::new([
        "hf",
        "parabola_pi",
        "parabola_sigma",
        "lens1_perpendicular",
        "lens2_perpendicular",
    ]);
    for row in rows {
        t.push(row?);
    }
    Ok(t)
}

pub fn solid_angle(ctx: &Context, a: &SolidAngleArgs) -> Out {
    if a.sweep {
        return solid_angle_sweep(ctx, a.tilt, a.lens_na.unwrap_or(REFERENCE_NA));
    }
    let spec = dipole(a.dipole, a.tilt)?;
    let (optics, omega) = match (a.hf, a.lens_na) {
        (Some(hf), _) => ("parabola", mirror_omega(hf, a.hole, &spec)?),
        (None, Some(na)) => {
            let n = LensCount::from_count(a.lenses)?;
            (
                if a.lenses == 1 { "lens" } else { "two_lenses" },
                omega_lens(na, n, &spec)?,
            )
        }
        (None, None) => {
            return Err(CliError::Usage(
                "solid-angle: give --hf, --lens-na or --sweep".into(),
            ))
        }
    };
    let fraction = omega / FULL_SPHERE_WEIGHT;
    Ok(Table::record(vec![
        ("optics", optics.into()),
        ("omega", omega.into()),
        ("fraction", fraction.into()),
        ("loss", (1.0 - fraction).into()),
    ]))
}

fn polarization(p: PolarizationArg) -> Polarization {
    match p {
        PolarizationArg::Radial => Polarization::Radial,
        PolarizationArg::Azimuthal => Polarization::Azimuthal,
        PolarizationArg::Linear => Polarization::UniformLinear,
        PolarizationArg::Circular => Polarization::UniformCircular,
    }
}

/// Linear interpolation through `rows`, zero outside their range.
fn interpolate(rows: &[(f64, f64)], x: f64) -> f64 {
    let (first, last) = (rows[0].0, rows[rows.len() - 1].0);
    if !(first..=last).contains(&x) {
        return 0.0;
    }
    let i = rows.partition_point(|r| r.0 <= x).clamp(1, rows.len() - 1);
    let ((x0, y0), (x1, y1)) = (rows[i - 1], rows[i]);
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

fn read_radial(path: &Path) -> Result<Vec<(f64, f64)>, CliError> {
    let rows = read_radial_profile(path).map_err(CliError::file(path))?;
    if rows.len() < 2 || rows.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(CliError::Usage(format!(
            "{}: need at least two rows with increasing r_over_f",
            path.display()
        )));
    }
    Ok(rows)
}

fn mirror(ctx: &Context, m: &MirrorArgs) -> Result<(MirrorGeometry, usize), CliError> {
    let geom = MirrorGeometry::with_hole(1.0, m.hf, m.hole)?;
    Ok((
        geom,
        m.samples.unwrap_or(ctx.config.tolerances.pupil_samples),
    ))
}

pub fn overlap(ctx: &Context, a: &OverlapArgs) -> Out {
    let (geom, n) = mirror(ctx, &a.mirror)?;
    let (r_in, r_max) = (geom.hole_radius(), geom.rim_radius());
    let pol = polarization(a.polarization);
    let ideal = ideal_field(&geom, n)?;
    let incident = match (a.w, &a.profile) {
        (Some(w), _) => doughnut_field(w, r_in, r_max, n, pol)?,
        (None, Some(path)) => {
            let rows = read_radial(path)?;
            RadialPupilField::from_fn(r_in, r_max, n, pol, |r| {
                Complex64::new(interpolate(&rows, r), 0.0)
            })?
        }
        (None, None) => return Err(CliError::Usage("overlap: give --w or --profile".into())),
    };
    let eta = pupil_overlap(&incident, &ideal)?;
    let omega = omega_parabola(&geom, &DipoleSpec::linear_parallel())?;
    let mut fields: Vec<(&str, Cell)> = Vec::new();
    if let Some(w) = a.w {
        fields.push(("w_over_f", w.into()));
    }
    fields.push(("eta", eta.into()));
    fields.push(("omega_fraction", (omega / FULL_SPHERE_WEIGHT).into()));
    fields.push(("g", coupling_efficiency(omega, eta.min(1.0))?.into()));
    if let Some(w) = a.w {
        fields.push(("clipping_loss", clipping_loss(w, r_max)?.into()));
    }
    if let (Some(path), Some(lambda)) = (&a.aberration, a.wavelength) {
        let rows = read_radial(path)?;
        let tol = 1e-9 * r_max;
        if rows[0].0 > r_in + tol || rows[rows.len() - 1].0 < r_max - tol {
            return Err(CliError::Usage(format!(
                "{}: deviation map must cover r_over_f in [{r_in}, {r_max}]",
                path.display()
            )));
        }
        let step = (r_max - r_in) / (n - 1) as f64;
        let dev = (0..n)
            .map(|i| interpolate(&rows, (r_in + i as f64 * step).min(r_max)))
            .collect();
        let ab = AberrationProfile::new(r_in, r_max, dev, lambda)?;
        fields.push(("strehl", strehl_ratio(&incident, &ab, &ideal)?.into()));
        let aberrated = apply_aberration(&incident, &ab)?;
        fields.push(("eta_aberrated", pupil_overlap(&aberrated, &ideal)?.into()));
    }
    Ok(Table::record(fields))
}

pub fn optimize_waist(ctx: &Context, a: &WaistArgs) -> Out {
    let (geom, n) = mirror(ctx, &a.mirror)?;
    let opt = optimize_waist_with(&geom, n)?;
    Ok(Table::record(vec![
        ("w_over_f", opt.w.into()),
        ("eta", opt.eta.into()),
        ("omega_fraction", (opt.omega / FULL_SPHERE_WEIGHT).into()),
        ("g", opt.g.into()),
        (
            "clipping_loss",
            clipping_loss(opt.w, geom.rim_radius())?.into(),
        ),
    ]))
}

pub fn phase_row(
    g: f64,
    delta_over_gamma: f64,
    saturation: f64,
) -> Result<Vec<(&'static str, Cell)>, CliError> {
    let p = CouplingParams::normalized(g, delta_over_gamma)?;
    let phi = phase_shift(&p);
    let t = transmission_amplitude(&p);
    Ok(vec![
        ("G", g.into()),
        ("delta_over_gamma", delta_over_gamma.into()),
        ("phase_rad", phi.value.into()),
        ("indeterminate", phi.indeterminate.into()),
        ("t_re", t.re.into()),
        ("t_im", t.im.into()),
        ("transmission", t.norm_sqr().into()),
        ("scattering_ratio", scattering_ratio(&p, saturation)?.into()),
    ])
}

pub fn phase(a: &PhaseArgs) -> Out {
    Ok(Table::record(phase_row(a.g, a.delta, a.saturation)?))
}

pub fn transmission(a: &TransmissionArgs) -> Out {
    let omega = match (a.hf, a.omega_fraction) {
        (Some(hf), _) => mirror_omega(hf, 0.0, &DipoleSpec::linear_parallel())?,
        (None, Some(f)) => f * FULL_SPHERE_WEIGHT,
        (None, None) => {
            return Err(CliError::Usage(
                "transmission: give --hf or --omega-fraction".into(),
            ))
        }
    };
    let t = transmitted_fraction(a.g, omega)?;
    Ok(Table::record(vec![
        ("omega_fraction", (omega / FULL_SPHERE_WEIGHT).into()),
        ("transmitted_fraction", t.value.into()),
        ("inconsistent", t.inconsistent.into()),
    ]))
}

/// (τ, ramp) of a pulse model, with overrides.
fn model_shape(
    model: PulseModel,
    tau: Option<f64>,
    ramp: Option<f64>,
    gamma_inv: Option<f64>,
) -> Result<RampedExponential, CliError> {
    let (tau0, ramp0) = match model {
        PulseModel::Ideal => (gamma_inv, 0.0),
        PulseModel::Ybii => (Some(8.1e-9), 5e-9),
        PulseModel::Ybiii => (Some(230e-9), 5e-9),
    };
    let tau = tau
        .or(tau0)
        .ok_or_else(|| CliError::Usage("the ideal model needs --tau or --gamma-inv".into()))?;
    let ramp = ramp.unwrap_or(ramp0);
    if !(tau > 0.0) || !(ramp >= 0.0) {
        return Err(CliError::Usage(format!(
            "model needs tau > 0 and ramp >= 0, got {tau}, {ramp}"
        )));
    }
    Ok(RampedExponential { tau, ramp })
}

/// Sampling step resolving the rise, the atomic decay and the ramp.
fn model_step(m: &RampedExponential, gamma: f64, per_unit: f64) -> f64 {
    let mut shortest = m.tau.min(1.0 / gamma);
    if m.ramp > 0.0 {
        shortest = shortest.min(m.ramp * 4.0);
    }
    shortest / per_unit
}

pub fn temporal(ctx: &Context, a: &TemporalArgs) -> Out {
    let mut clamped = None;
    let (env, gamma) = if let Some(model) = a.model {
        let m = model_shape(model, a.tau, a.ramp, a.gamma_inv)?;
        let gamma = 1.0 / a.gamma_inv.unwrap_or(m.tau);
        let env = match a.events {
            Some(events) => {
                if !(events > 0.0 && events.is_finite()) {
                    return Err(CliError::Usage(format!(
                        "--events must be > 0, got {events}"
                    )));
                }
                let bins =
                    TimeGrid::spanning(-12.0 * m.tau - m.ramp, 0.5 * m.ramp + 5.0 * a.bin, a.bin)?;
                let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
                let counts = poisson_histogram(&m, &bins, events, &mut rng);
                let h = envelope_from_histogram(&counts, bins.dt, bins.t0, a.background)?;
                clamped = Some(h.clamped_bins);
                h.envelope
            }
            None => {
                let dt = model_step(&m, gamma, 400.0);
                let grid = TimeGrid::spanning(-40.0 * m.tau - m.ramp, m.ramp + 0.1 * m.tau, dt)?;
                m.envelope(&grid)
            }
        };
        (env, gamma)
    } else {
        let gamma_inv = a.gamma_inv.ok_or_else(|| {
            CliError::Usage("temporal: --gamma-inv is required for file input".into())
        })?;
        let env = if let Some(path) = &a.envelope {
            read_envelope(path).map_err(CliError::file(path))?
        } else if let Some(path) = &a.histogram {
            let h = read_histogram(path).map_err(CliError::file(path))?;
            let e = envelope_from_histogram(&h.counts, h.bin_width, h.t0, a.background)
                .map_err(CliError::file(path))?;
            clamped = Some(e.clamped_bins);
            e.envelope
        } else {
            return Err(CliError::Usage(
                "temporal: give --envelope, --histogram or --model".into(),
            ));
        };
        (env, 1.0 / gamma_inv)
    };

    let eta = temporal_overlap(&env, gamma)?;
    let mut fields: Vec<(&str, Cell)> = vec![("eta_t", eta.into())];
    if a.align {
        let al = temporal_overlap_aligned(&env, gamma)?;
        fields.push(("eta_t_aligned", al.eta_t.into()));
        fields.push(("shift_s", al.shift.into()));
    }
    if let Some(c) = clamped {
        fields.push(("clamped_bins", c.into()));
    }
    if let Some(g) = a.g {
        fields.push((
            "absorption_probability",
            absorption_probability(g, eta.min(1.0))?.into(),
        ));
    }
    if let Some(path) = &a.out {
        write_envelope(create(path)?, &env).map_err(CliError::file(path))?;
    }
    Ok(Table::record(fields))
}

pub fn pulse_scatter(a: &PulseScatterArgs) -> Out {
    if !(a.gamma_inv > 0.0) {
        return Err(CliError::Usage("--gamma-inv must be > 0".into()));
    }
    let gamma = 1.0 / a.gamma_inv;
    let env: PulseEnvelope = match (&a.envelope, a.model) {
        (Some(path), _) => read_envelope(path).map_err(CliError::file(path))?,
        (None, Some(model)) => {
            let m = model_shape(model, a.tau, a.ramp, Some(a.gamma_inv))?;
            let margin = (PADDING_LIFETIMES + 5.0) / gamma;
            let dt = model_step(&m, gamma, 200.0);
            let grid = TimeGrid::spanning(-margin.max(40.0 * m.tau + m.ramp), margin + m.ramp, dt)?;
            m.envelope(&grid)
        }
        (None, None) => {
            return Err(CliError::Usage(
                "pulse-scatter: give --envelope or --model".into(),
            ))
        }
    };
    let out = scatter_pulse(&env, a.g, gamma, a.carrier.resolve(gamma))?;
    let budget = energy_budget(&env, &out, a.g)?;
    let dec = decompose_exponentials(&out, gamma)?;
    if let Some(path) = &a.out {
        write_envelope(create(path)?, &out).map_err(CliError::file(path))?;
    }
    Ok(Table::record(vec![
        (
            "in_mode_energy_fraction",
            budget.in_mode_energy_fraction.into(),
        ),
        ("out_of_mode_fraction", budget.out_of_mode_fraction.into()),
        ("matched_in_mode", budget.matched_in_mode.into()),
        ("matched_out_of_mode", budget.matched_out_of_mode.into()),
        ("c_rise_re", dec.c_rise.re.into()),
        ("c_rise_im", dec.c_rise.im.into()),
        ("c_decay_re", dec.c_decay.re.into()),
        ("c_decay_im", dec.c_decay.im.into()),
        ("rise_energy_fraction", dec.rise_energy_fraction.into()),
        ("decay_energy_fraction", dec.decay_energy_fraction.into()),
        (
            "residual_energy_fraction",
            dec.residual_energy_fraction.into(),
        ),
    ]))
}

fn cavity_params(a: &CavityArgs) -> Result<CavityParams, CliError> {
    let base = if let Some(path) = &a.spec {
        read_cavity_spec(path)
            .and_then(|s| s.to_params())
            .map_err(CliError::file(path))?
    } else {
        let (r1, r2) = match (a.r1, a.r2) {
            (Some(r1), Some(r2)) => (r1, r2),
            _ => {
                return Err(CliError::Usage(
                    "cavity: give --spec or both --r1 and --r2".into(),
                ))
            }
        };
        match (a.decay_time, a.kappa) {
            (Some(t), None) => CavityParams::from_decay_time(r1, r2, t, 0.0)?,
            (None, Some(k)) => CavityParams::with_kappa(r1, r2, k, 0.0)?,
            _ => {
                return Err(CliError::Usage(
                    "cavity: give exactly one of --decay-time and --kappa".into(),
                ))
            }
        }
    };
    let detuning = a.detuning.map_or(base.detuning, |d| d.resolve(base.kappa));
    Ok(CavityParams::with_kappa(
        base.r1, base.r2, base.kappa, detuning,
    )?)
}

/// Grid with dt = 1/(50κ) and a node on t = 0, `before` and `after` in
/// units of 1/κ.
pub fn cavity_grid(kappa: f64, before: f64, after: f64) -> TimeGrid {
    let per = dipole_coupler::cavity::MIN_SAMPLES_PER_DECAY;
    let dt = 1.0 / (per * kappa);
    let nb = (before * per).round() as usize;
    let na = (after * per).round() as usize;
    TimeGrid {
        t0: -(nb as f64) * dt,
        dt,
        len: nb + na + 1,
    }
}

pub fn cavity(a: &CavityArgs) -> Out {
    let params = cavity_params(a)?;
    let rates = params.rates();
    let (trace, store) = if let Some(path) = &a.envelope {
        let env = read_envelope(path).map_err(CliError::file(path))?;
        let grid = env.grid();
        (
            simulate_reflection(&env, &grid, &params)?,
            storage_efficiency(&env, &grid, &params, a.eta_spatial)?,
        )
    } else {
        let rate = mismatched_rate_for_overlap(params.kappa, a.eta_t)?;
        let grid = cavity_grid(params.kappa, 40.0 * params.kappa / rate, 5.0);
        let drive = ExponentialDrive { rate };
        (
            simulate_reflection(&drive, &grid, &params)?,
            storage_efficiency(&drive, &grid, &params, a.eta_spatial)?,
        )
    };
    if let Some(path) = &a.trace {
        write_trace(create(path)?, &trace).map_err(CliError::file(path))?;
    }
    let e = trace.input_energy;
    Ok(Table::record(vec![
        ("kappa", rates.kappa.into()),
        ("kappa1", rates.kappa1.into()),
        ("kappa2", rates.kappa2.into()),
        ("coverage", rates.coverage.into()),
        ("detuning", params.detuning.into()),
        ("storage_efficiency", store.into()),
        ("reflected_fraction", (trace.reflected_energy / e).into()),
        ("leaked_fraction", (trace.leaked_energy / e).into()),
        ("final_stored_fraction", (trace.final_stored / e).into()),
        ("energy_defect", trace.energy_defect().into()),
        ("convergence_change", trace.convergence_change.into()),
    ]))
}

fn weighting(w: WeightingArg) -> Weighting {
    match w {
        WeightingArg::Auto => Weighting::Auto,
        WeightingArg::Uniform => Weighting::Uniform,
        WeightingArg::Relative => Weighting::Relative,
    }
}

pub fn sat_fit(ctx: &Context, a: &SatFitArgs) -> Out {
    if !(a.gamma_inv > 0.0 && a.wavelength > 0.0) {
        return Err(CliError::Usage(
            "--gamma-inv and --wavelength must be > 0".into(),
        ));
    }
    let c = ctx.config.constants();
    let gamma = 1.0 / a.gamma_inv;
    let delta = a.delta.resolve(gamma);
    let omega0 = c.angular_frequency(a.wavelength);
    let path = match (&a.data, a.p_at_s1) {
        (Some(path), _) => path,
        (None, Some(p1)) => {
            let g = g_from_unit_saturation_power(p1, gamma, delta, omega0, &c)?;
            return Ok(Table::record(vec![
                ("p_at_s1_W", p1.into()),
                ("g_two_level", g.into()),
                ("correction", a.correction.into()),
                (
                    "g_corrected",
                    multilevel_correction(g, a.correction)?.into(),
                ),
            ]));
        }
        (None, None) => {
            return Err(CliError::Usage(
                "sat-fit: give a data file or --p-at-s1".into(),
            ))
        }
    };
    let data = SaturationDataset {
        points: read_saturation_points(path).map_err(CliError::file(path))?,
        delta,
        gamma,
        omega0,
        background: a.background,
    };
    let opts = FitOptions {
        weighting: weighting(a.weighting),
        xtol: ctx.config.tolerances.fit_xtol,
        ..FitOptions::default()
    };
    let fit = fit_saturation(&data, &opts, &c)?;
    let corrected = multilevel_correction(fit.g_fit, a.correction)?;
    Ok(Table::record(vec![
        ("g_fit", fit.g_fit.into()),
        ("g_fit_stderr", fit.g_fit_stderr.into()),
        ("correction", a.correction.into()),
        ("g_corrected", corrected.into()),
        (
            "g_corrected_stderr",
            (fit.g_fit_stderr * a.correction).into(),
        ),
        ("p_at_s1_W", fit.p_at_s1.into()),
        ("p_at_s1_stderr_W", fit.p_at_s1_stderr.into()),
        ("amplitude_scale", fit.amplitude_scale.into()),
        ("amplitude_scale_stderr", fit.amplitude_scale_stderr.into()),
        ("background", fit.background.into()),
        ("background_stderr", fit.background_stderr.into()),
        ("residual_norm", fit.residual_norm.into()),
        ("iterations", fit.iterations.into()),
    ]))
}

pub const PROFILE_SAMPLES: usize = 200;
pub const PROFILE_AZIMUTHS: usize = 64;

pub fn stokes(a: &StokesArgs) -> Out {
    let mut map = parse_stokes_map(&a.map).map_err(CliError::file(&a.map))?;
    if let (Some(center), Some(radius)) = (a.center, a.radius) {
        map = map.with_pupil(center, radius)?;
    }
    let field = reconstruct_field(&map);
    let geom = MirrorGeometry::with_hole(1.0, a.hf, a.hole)?;
    let report = measured_eta(&field, &geom)?;
    if let Some(path) = &a.profile {
        let rows = field.radial_profile(PROFILE_SAMPLES, PROFILE_AZIMUTHS);
        write_radial_profile(create(path)?, &rows).map_err(CliError::file(path))?;
    }
    Ok(Table::record(vec![
        ("eta", report.eta.into()),
        ("unpolarized_fraction", report.unpolarized_fraction.into()),
        ("flagged_pixels", report.flagged_pixels.into()),
        ("pupil_coverage", report.pupil_coverage.into()),
    ]))
}
