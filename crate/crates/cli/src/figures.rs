//! Data files behind the figures.

use std::path::{Path, PathBuf};

use dipole_coupler::cavity::{
    mismatched_rate_for_overlap, simulate_reflection, storage_efficiency,
};
use dipole_coupler::cw::{
    fit_saturation, g_from_unit_saturation_power, log_spaced, multilevel_correction,
    synthetic_saturation_points,
};
use dipole_coupler::io::{
    write_envelope, write_histogram, write_saturation_points, write_trace, Histogram,
};
use dipole_coupler::pulses::{
    aom_drive, envelope_from_histogram, ideal_envelope, poisson_histogram, temporal_overlap,
    temporal_overlap_aligned,
};
use dipole_coupler::{
    CavityParams, ExponentialDrive, FitOptions, RampedExponential, SaturationDataset, TimeGrid,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::commands::{cavity_grid, create, phase_row, solid_angle_sweep, REFERENCE_NA};
use crate::error::CliError;
use crate::output::{par_map, Cell, Table};
use crate::{Context, FigArgs, Figure};

/// Coupling values drawn in the phase figure.
pub const PHASE_G: [f64; 8] = [0.1, 0.25, 0.4, 0.5, 0.6, 0.75, 0.9, 1.0];
const PHASE_DELTA_MAX: f64 = 5.0;
const PHASE_STEPS: usize = 1000;

const YB2_TAU: f64 = 8.1e-9;
const YB3_TAU: f64 = 230e-9;
const RAMP: f64 = 5e-9;
const YB3_EVENTS: f64 = 4e5;
const HISTOGRAM_BIN: f64 = 2e-9;
const AOM_FREQUENCY: f64 = 200e6;

const CAVITY_R1: f64 = 0.9796;
const CAVITY_R2: f64 = 0.9994;
const CAVITY_DECAY: f64 = 39e-9;
const CAVITY_ETA_T: f64 = 0.986;
const CAVITY_STORAGE_TARGET: f64 = 0.88;
const CAVITY_STORAGE_MODEL: f64 = 0.944;

const SAT_P1: f64 = 690e-12;
const SAT_WAVELENGTH: f64 = 370e-9;
const SAT_CORRECTION: f64 = 3.0;
const SAT_AMPLITUDE: f64 = 1.0e5;
const SAT_BACKGROUND: f64 = 800.0;
const SAT_NOISE: f64 = 0.01;
const SAT_POINTS: usize = 16;

/// Records the files written for the listing printed on stdout.
struct Written {
    dir: PathBuf,
    list: Table,
}

impl Written {
    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn add(&mut self, path: &Path, rows: usize) {
        self.list
            .push(vec![path.display().to_string().into(), rows.into()]);
    }

    fn table(&mut self, name: &str, t: &Table) -> Result<(), CliError> {
        let path = self.path(name);
        t.write_csv(create(&path)?)
            .map_err(|e| CliError::io("writing", &path, e))?;
        self.add(&path, t.len());
        Ok(())
    }

    fn summary(&mut self, name: &str, fields: Vec<(&str, Cell)>) -> Result<(), CliError> {
        let path = self.path(name);
        Table::record(fields)
            .write_json(create(&path)?)
            .map_err(|e| CliError::io("writing", &path, e))?;
        self.add(&path, 1);
        Ok(())
    }

    /// Runs a library writer on a new file.
    fn with<F>(&mut self, name: &str, rows: usize, write: F) -> Result<(), CliError>
    where
        F: FnOnce(std::io::BufWriter<std::fs::File>) -> dipole_coupler::Result<()>,
    {
        let path = self.path(name);
        write(create(&path)?).map_err(CliError::file(&path))?;
        self.add(&path, rows);
        Ok(())
    }
}

pub fn generate(ctx: &Context, a: &FigArgs) -> Result<Table, CliError> {
    let dir = a
        .out_dir
        .clone()
        .unwrap_or_else(|| ctx.config.output_dir.clone());
    std::fs::create_dir_all(&dir).map_err(|e| CliError::io("creating directory", &dir, e))?;
    let mut w = Written {
        dir,
        list: Table::new(["file", "rows"]),
    };
    match a.figure {
        Figure::F1 => fig1(ctx, &mut w)?,
        Figure::F2b => fig2b(ctx, &mut w)?,
        Figure::F6 => fig6(ctx, &mut w)?,
        Figure::F7 => fig7(&mut w)?,
        Figure::F9 => fig9(ctx, &mut w)?,
    }
    Ok(w.list)
}

fn fig1(ctx: &Context, w: &mut Written) -> Result<(), CliError> {
    w.table(
        "fig1_solid_angle.csv",
        &solid_angle_sweep(ctx, 0.0, REFERENCE_NA)?,
    )
}

fn fig2b(ctx: &Context, w: &mut Written) -> Result<(), CliError> {
    let deltas: Vec<f64> = (0..=PHASE_STEPS)
        .map(|i| PHASE_DELTA_MAX * (2.0 * i as f64 / PHASE_STEPS as f64 - 1.0))
        .collect();
    let blocks = par_map(&PHASE_G, ctx.threads, |&g| {
        deltas
            .iter()
            .map(|&d| phase_row(g, d, 0.0))
            .collect::<Result<Vec<_>, _>>()
    });
    let mut t: Option<Table> = None;
    for block in blocks {
        for row in block? {
            let (names, cells): (Vec<&str>, Vec<Cell>) = row.into_iter().unzip();
            t.get_or_insert_with(|| Table::new(names)).push(cells);
        }
    }
    w.table("fig2b_phase.csv", &t.expect("rows"))
}

fn fig6(ctx: &Context, w: &mut Written) -> Result<(), CliError> {
    let gamma2 = 1.0 / YB2_TAU;
    let yb2 = RampedExponential {
        tau: YB2_TAU,
        ramp: RAMP,
    };

    // fine grid for the overlap, coarser one for the plotted curves
    let fine = TimeGrid::spanning(-40.0 * YB2_TAU, 10e-9, 1e-11)?;
    let eta2 = temporal_overlap(&yb2.envelope(&fine), gamma2)?;
    let eta2_aligned = temporal_overlap_aligned(&yb2.envelope(&fine), gamma2)?;

    let plot = TimeGrid::spanning(-6.0 * YB2_TAU, 10e-9, 0.05e-9)?;
    let ideal = ideal_envelope(&plot, gamma2)?;
    let model = yb2.envelope(&plot);
    let mut curves = Table::new(["t_s", "ideal", "model"]);
    for (i, t) in plot.times().enumerate() {
        curves.push(vec![
            t.into(),
            ideal.samples()[i].re.into(),
            model.samples()[i].re.into(),
        ]);
    }
    w.table("fig6_ybii_envelope.csv", &curves)?;

    let mut aom = Table::new(["t_s", "drive_envelope", "voltage", "optical_power"]);
    for t in plot.times() {
        let d = aom_drive(t, YB2_TAU, 2.0 * std::f64::consts::PI * AOM_FREQUENCY)?;
        aom.push(vec![
            t.into(),
            d.envelope.into(),
            d.voltage.into(),
            d.optical_power.into(),
        ]);
    }
    w.table("fig6_aom_drive.csv", &aom)?;

    let yb3 = RampedExponential {
        tau: YB3_TAU,
        ramp: RAMP,
    };
    let bins = TimeGrid::spanning(-12.0 * YB3_TAU, 10e-9, HISTOGRAM_BIN)?;
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let counts = poisson_histogram(&yb3, &bins, YB3_EVENTS, &mut rng);
    let env3 = envelope_from_histogram(&counts, bins.dt, bins.t0, 0.0)?;
    let eta3 = temporal_overlap(&env3.envelope, 1.0 / YB3_TAU)?;
    let hist = Histogram {
        t0: bins.t0,
        bin_width: bins.dt,
        counts,
    };
    w.with("fig6_ybiii_histogram.csv", hist.counts.len(), |f| {
        write_histogram(f, &hist)
    })?;
    w.with("fig6_ybiii_envelope.csv", env3.envelope.len(), |f| {
        write_envelope(f, &env3.envelope)
    })?;

    w.summary(
        "fig6_summary.json",
        vec![
            ("eta_t_ybii", eta2.into()),
            ("eta_t_ybii_aligned", eta2_aligned.eta_t.into()),
            ("shift_ybii_s", eta2_aligned.shift.into()),
            ("eta_t_ybiii_histogram", eta3.into()),
            ("ybiii_events", YB3_EVENTS.into()),
            ("seed", ctx.seed.into()),
        ],
    )
}

fn fig7(w: &mut Written) -> Result<(), CliError> {
    let params = CavityParams::from_decay_time(CAVITY_R1, CAVITY_R2, CAVITY_DECAY, 0.0)?;
    let rates = params.rates();
    let rate = mismatched_rate_for_overlap(params.kappa, CAVITY_ETA_T)?;
    let grid = cavity_grid(params.kappa, 40.0 * params.kappa / rate, 5.0);
    let drive = ExponentialDrive { rate };
    let trace = simulate_reflection(&drive, &grid, &params)?;
    let store = storage_efficiency(&drive, &grid, &params, 1.0)?;
    let spatial = CAVITY_STORAGE_TARGET / CAVITY_STORAGE_MODEL;
    let store_spatial = storage_efficiency(&drive, &grid, &params, spatial)?;
    w.with("fig7_trace.csv", grid.len, |f| write_trace(f, &trace))?;
    w.summary(
        "fig7_summary.json",
        vec![
            ("r1", CAVITY_R1.into()),
            ("r2", CAVITY_R2.into()),
            ("kappa", rates.kappa.into()),
            ("coverage", rates.coverage.into()),
            ("eta_t", CAVITY_ETA_T.into()),
            ("storage_efficiency", store.into()),
            ("spatial_factor", spatial.into()),
            ("spatial_factor_inferred", true.into()),
            ("storage_with_spatial_factor", store_spatial.into()),
            ("energy_defect", trace.energy_defect().into()),
        ],
    )
}

fn fig9(ctx: &Context, w: &mut Written) -> Result<(), CliError> {
    let c = ctx.config.constants();
    let gamma = 1.0 / YB2_TAU;
    let delta = 0.5 * gamma;
    let omega0 = c.angular_frequency(SAT_WAVELENGTH);
    let g_two_level = g_from_unit_saturation_power(SAT_P1, gamma, delta, omega0, &c)?;
    let g_corrected = multilevel_correction(g_two_level, SAT_CORRECTION)?;

    let powers = log_spaced(SAT_P1 / 20.0, SAT_P1 * 20.0, SAT_POINTS);
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let points = synthetic_saturation_points(
        &powers,
        SAT_P1,
        SAT_AMPLITUDE,
        SAT_BACKGROUND,
        SAT_NOISE,
        &mut rng,
    );
    w.with("fig9_saturation.csv", points.len(), |f| {
        write_saturation_points(f, &points)
    })?;

    let data = SaturationDataset {
        points,
        delta,
        gamma,
        omega0,
        background: None,
    };
    let opts = FitOptions {
        xtol: ctx.config.tolerances.fit_xtol,
        ..FitOptions::default()
    };
    let fit = fit_saturation(&data, &opts, &c)?;
    w.summary(
        "fig9_fit.json",
        vec![
            ("p_at_s1_model_W", SAT_P1.into()),
            ("g_two_level_model", g_two_level.into()),
            ("g_corrected_model", g_corrected.into()),
            ("correction", SAT_CORRECTION.into()),
            ("g_fit", fit.g_fit.into()),
            ("g_fit_stderr", fit.g_fit_stderr.into()),
            ("g_fit_corrected", (fit.g_fit * SAT_CORRECTION).into()),
            ("p_at_s1_fit_W", fit.p_at_s1.into()),
            ("background_fit", fit.background.into()),
            ("noise", SAT_NOISE.into()),
            ("seed", ctx.seed.into()),
        ],
    )
}
