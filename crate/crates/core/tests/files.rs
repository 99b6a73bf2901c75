//! Round trips through real files for every on-disk format.

use std::fs::File;

use dipole_coupler::io::{
    read_cavity_spec, read_envelope, read_histogram, read_radial_profile, read_saturation_points,
    write_envelope, write_histogram, write_json, write_radial_profile, write_saturation_points,
    CavitySpec, Histogram,
};
use dipole_coupler::stokes::parse_stokes_map;
use dipole_coupler::{Complex64, PulseEnvelope, StokesMap};

#[test]
fn envelope_and_histogram_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("env.csv");
    let env = PulseEnvelope::new(
        -2e-9,
        0.5e-9,
        vec![
            Complex64::new(0.1, 0.0),
            Complex64::new(0.4, -0.2),
            Complex64::new(1.0, 0.3),
        ],
    )
    .unwrap();
    write_envelope(File::create(&path).unwrap(), &env).unwrap();
    let back = read_envelope(&path).unwrap();
    assert_eq!(back.len(), 3);
    for (a, b) in back.samples().iter().zip(env.samples()) {
        assert!((a - b).norm() < 1e-12);
    }
    assert!((back.dt() - env.dt()).abs() < 1e-21);

    let path = dir.path().join("hist.csv");
    let h = Histogram {
        t0: -1e-8,
        bin_width: 2e-9,
        counts: vec![0, 3, 17, 250, 4],
    };
    write_histogram(File::create(&path).unwrap(), &h).unwrap();
    let back = read_histogram(&path).unwrap();
    assert_eq!(back.counts, h.counts);
    assert!((back.bin_width - h.bin_width).abs() < 1e-20);
}

#[test]
fn radial_saturation_and_cavity_files() {
    let dir = tempfile::tempdir().unwrap();
    let rows = vec![(0.0, 0.0), (0.5, 0.25), (1.0, 0.7)];
    let path = dir.path().join("radial.csv");
    write_radial_profile(File::create(&path).unwrap(), &rows).unwrap();
    assert_eq!(read_radial_profile(&path).unwrap(), rows);

    let points = vec![(1e-11, 120.0), (1e-10, 900.0), (1e-9, 4000.0)];
    let path = dir.path().join("sat.csv");
    write_saturation_points(File::create(&path).unwrap(), &points).unwrap();
    assert_eq!(read_saturation_points(&path).unwrap(), points);

    let spec = CavitySpec {
        r1: 0.9796,
        r2: 0.9994,
        decay_time_s: Some(39e-9),
        kappa: None,
        detuning: 0.0,
    };
    let path = dir.path().join("cavity.json");
    write_json(File::create(&path).unwrap(), &spec).unwrap();
    let back = read_cavity_spec(&path).unwrap();
    assert_eq!(back, spec);
    assert!((back.to_params().unwrap().rates().coverage - 0.971428571429).abs() < 1e-12);
}

#[test]
fn stokes_map_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("map.csv");
    let map = StokesMap::from_jones(9, 7, (-1.0, -0.75), (0.25, 0.25), |x, y| {
        [Complex64::new(x, 0.0), Complex64::new(0.0, y)]
    })
    .unwrap();
    map.write_csv(File::create(&path).unwrap()).unwrap();
    let back = parse_stokes_map(&path).unwrap();
    assert_eq!((back.nx, back.ny), (9, 7));
    for (a, b) in back.stokes.iter().zip(&map.stokes) {
        for k in 0..4 {
            assert!((a[k] - b[k]).abs() < 1e-12);
        }
    }
}

#[test]
fn missing_and_malformed_files_are_io_errors() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.csv");
    assert!(read_envelope(&missing).unwrap_err().is_io());
    assert!(parse_stokes_map(&missing).unwrap_err().is_io());

    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "power_W,rate_per_s\n1e-9,abc\n").unwrap();
    assert!(read_saturation_points(&bad).unwrap_err().is_io());
    std::fs::write(&bad, "{\"R1\": 0.9}").unwrap();
    assert!(read_cavity_spec(&bad).unwrap_err().is_io());
}
