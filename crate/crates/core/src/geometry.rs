//! Angular geometry of deep parabolic mirrors and high-NA lenses, dipole
//! radiation patterns, and the solid angle weighted by them.
//!
//! Polar angles are measured from the optical axis with ϑ = 0 pointing from
//! the focus toward the mirror vertex. A mirror of depth h therefore covers
//! ϑ ∈ [hole, ϑ_rim] with ϑ_rim = 2·arctan(sqrt(h/f)).

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{check_nonneg, check_pos, check_unit, Error, Result};
use crate::optimize::bisect;
use crate::quadrature::AdaptiveQuadrature;

/// Weighted solid angle of the full sphere, 8π/3.
pub const FULL_SPHERE_WEIGHT: f64 = 8.0 * PI / 3.0;

/// Polar angle seen from the focus of a point at distance `r` from the
/// optical axis on a paraboloid of focal length `f`.
pub fn theta_from_radius(r: f64, f: f64) -> Result<f64> {
    check_nonneg("theta_from_radius", "r", r)?;
    check_pos("theta_from_radius", "f", f)?;
    Ok(2.0 * (r / (2.0 * f)).atan())
}

/// Inverse of [`theta_from_radius`] on [0, π).
pub fn radius_from_theta(theta: f64, f: f64) -> Result<f64> {
    check_pos("radius_from_theta", "f", f)?;
    if !theta.is_finite() || !(0.0..PI).contains(&theta) {
        return Err(Error::domain(
            "radius_from_theta",
            format!("theta must lie in [0, pi), got {theta}"),
        ));
    }
    Ok(2.0 * f * (0.5 * theta).tan())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MirrorGeometry {
    focal_length: f64,
    depth_ratio: f64,
    hole_half_angle: f64,
}

impl MirrorGeometry {
    pub fn new(focal_length: f64, depth_ratio: f64) -> Result<Self> {
        Self::with_hole(focal_length, depth_ratio, 0.0)
    }

    /// Mirror with a cap of half-angle `hole_half_angle` removed around the
    /// vertex direction.
    pub fn with_hole(focal_length: f64, depth_ratio: f64, hole_half_angle: f64) -> Result<Self> {
        check_pos("MirrorGeometry", "focal_length", focal_length)?;
        check_nonneg("MirrorGeometry", "depth_ratio", depth_ratio)?;
        check_nonneg("MirrorGeometry", "hole_half_angle", hole_half_angle)?;
        let g = MirrorGeometry {
            focal_length,
            depth_ratio,
            hole_half_angle,
        };
        if hole_half_angle > 0.0 && hole_half_angle >= g.rim_angle() {
            return Err(Error::domain(
                "MirrorGeometry",
                format!(
                    "hole half-angle {hole_half_angle} must be below the rim angle {}",
                    g.rim_angle()
                ),
            ));
        }
        Ok(g)
    }

    pub fn focal_length(&self) -> f64 {
        self.focal_length
    }

    pub fn depth_ratio(&self) -> f64 {
        self.depth_ratio
    }

    pub fn hole_half_angle(&self) -> f64 {
        self.hole_half_angle
    }

    /// Aperture radius 2·f·sqrt(h/f).
    pub fn rim_radius(&self) -> f64 {
        2.0 * self.focal_length * self.depth_ratio.sqrt()
    }

    pub fn rim_angle(&self) -> f64 {
        2.0 * self.depth_ratio.sqrt().atan()
    }

    /// Radius of the central hole in the pupil.
    pub fn hole_radius(&self) -> f64 {
        2.0 * self.focal_length * (0.5 * self.hole_half_angle).tan()
    }

    pub fn angular_range(&self) -> AngularRange {
        AngularRange {
            theta_min: self.hole_half_angle,
            theta_max: self.rim_angle(),
        }
    }
}

/// Polar-angle interval [theta_min, theta_max] integrated over all azimuths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngularRange {
    theta_min: f64,
    theta_max: f64,
}

impl AngularRange {
    pub fn new(theta_min: f64, theta_max: f64) -> Result<Self> {
        if !(theta_min.is_finite() && theta_max.is_finite())
            || theta_min < 0.0
            || theta_min > theta_max
            || theta_max > PI
        {
            return Err(Error::domain(
                "AngularRange",
                format!("need 0 <= theta_min <= theta_max <= pi, got [{theta_min}, {theta_max}]"),
            ));
        }
        Ok(AngularRange {
            theta_min,
            theta_max,
        })
    }

    pub fn full_sphere() -> Self {
        AngularRange {
            theta_min: 0.0,
            theta_max: PI,
        }
    }

    pub fn theta_min(&self) -> f64 {
        self.theta_min
    }

    pub fn theta_max(&self) -> f64 {
        self.theta_max
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DipoleKind {
    /// π transition, pattern sin²ϑ about the quantization axis.
    LinearPi,
    /// σ± transition, pattern (1 + cos²ϑ)/2 about the quantization axis.
    CircularSigma,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DipoleSpec {
    pub kind: DipoleKind,
    /// Angle between quantization axis and optical axis, in [0, π/2].
    pub axis_tilt: f64,
}

impl DipoleSpec {
    pub fn new(kind: DipoleKind, axis_tilt: f64) -> Result<Self> {
        if !axis_tilt.is_finite() || !(0.0..=FRAC_PI_2 + 1e-12).contains(&axis_tilt) {
            return Err(Error::domain(
                "DipoleSpec",
                format!("axis_tilt must lie in [0, pi/2], got {axis_tilt}"),
            ));
        }
        Ok(DipoleSpec {
            kind,
            axis_tilt: axis_tilt.min(FRAC_PI_2),
        })
    }

    pub fn linear_parallel() -> Self {
        DipoleSpec {
            kind: DipoleKind::LinearPi,
            axis_tilt: 0.0,
        }
    }

    pub fn linear_perpendicular() -> Self {
        DipoleSpec {
            kind: DipoleKind::LinearPi,
            axis_tilt: FRAC_PI_2,
        }
    }

    pub fn circular_parallel() -> Self {
        DipoleSpec {
            kind: DipoleKind::CircularSigma,
            axis_tilt: 0.0,
        }
    }

    /// Pattern as a function of cos(angle to the quantization axis).
    fn pattern_of_cos(&self, c: f64) -> f64 {
        let c2 = (c * c).min(1.0);
        match self.kind {
            DipoleKind::LinearPi => 1.0 - c2,
            DipoleKind::CircularSigma => 0.5 * (1.0 + c2),
        }
    }
}

/// Normalized emission pattern D_μ(ϑ, φ) ∈ [0, 1]. For a tilted axis the
/// direction is projected onto the quantization axis (tilted in the x-z
/// plane).
pub fn dipole_pattern(spec: &DipoleSpec, theta: f64, phi: f64) -> Result<f64> {
    if !theta.is_finite() || !(0.0..=PI).contains(&theta) || !phi.is_finite() {
        return Err(Error::domain(
            "dipole_pattern",
            format!("theta must lie in [0, pi], got {theta}"),
        ));
    }
    Ok(pattern_unchecked(spec, theta, phi))
}

fn pattern_unchecked(spec: &DipoleSpec, theta: f64, phi: f64) -> f64 {
    let (st, ct) = theta.sin_cos();
    let (sa, ca) = spec.axis_tilt.sin_cos();
    let c = st * phi.cos() * sa + ct * ca;
    spec.pattern_of_cos(c)
}

/// Antiderivative pieces for the untilted closed forms, zero at Θ = 0.
fn linear_primitive(theta: f64) -> f64 {
    let c = theta.cos();
    2.0 * PI * (2.0 / 3.0 - c + c * c * c / 3.0)
}

fn circular_primitive(theta: f64) -> f64 {
    let c = theta.cos();
    PI * ((1.0 - c) + (1.0 - c * c * c) / 3.0)
}

/// Ω_μ = ∫∫ D_μ sinϑ dϑ dφ over the range. Closed form for an untilted
/// axis, nested adaptive Gauss–Legendre otherwise.
pub fn weighted_solid_angle(range: &AngularRange, spec: &DipoleSpec) -> Result<f64> {
    if spec.axis_tilt == 0.0 {
        return Ok(weighted_solid_angle_closed(range, spec.kind));
    }
    weighted_solid_angle_quadrature(range, spec)
}

fn weighted_solid_angle_closed(range: &AngularRange, kind: DipoleKind) -> f64 {
    let prim = match kind {
        DipoleKind::LinearPi => linear_primitive,
        DipoleKind::CircularSigma => circular_primitive,
    };
    prim(range.theta_max) - prim(range.theta_min)
}

/// Always integrates numerically, whatever the tilt.
pub fn weighted_solid_angle_quadrature(range: &AngularRange, spec: &DipoleSpec) -> Result<f64> {
    let q = AdaptiveQuadrature::default();
    // The pattern is even in φ, so integrate half the circle.
    let half = q.integrate_2d(
        |theta, phi| pattern_unchecked(spec, theta, phi) * theta.sin(),
        (range.theta_min, range.theta_max),
        (0.0, PI),
    )?;
    Ok(2.0 * half)
}

/// Weighted solid angle of the mirror's angular range.
pub fn omega_parabola(geom: &MirrorGeometry, spec: &DipoleSpec) -> Result<f64> {
    weighted_solid_angle(&geom.angular_range(), spec)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LensCount {
    One,
    Two,
}

impl LensCount {
    pub fn from_count(n: u32) -> Result<Self> {
        match n {
            1 => Ok(LensCount::One),
            2 => Ok(LensCount::Two),
            _ => Err(Error::domain(
                "omega_lens",
                format!("lens count must be 1 or 2, got {n}"),
            )),
        }
    }
}

/// Weighted solid angle of one lens, or two opposing lenses, with numerical
/// aperture `na` about the optical axis. The cones are ideal and disjoint.
pub fn omega_lens(na: f64, lenses: LensCount, spec: &DipoleSpec) -> Result<f64> {
    if !na.is_finite() || na <= 0.0 || na > 1.0 {
        return Err(Error::domain(
            "omega_lens",
            format!("NA must lie in (0, 1], got {na}"),
        ));
    }
    let alpha = na.asin();
    let front = weighted_solid_angle(&AngularRange::new(0.0, alpha)?, spec)?;
    match lenses {
        LensCount::One => Ok(front),
        LensCount::Two => {
            let back = weighted_solid_angle(&AngularRange::new(PI - alpha, PI)?, spec)?;
            Ok(front + back)
        }
    }
}

/// Depth ratio h/f above which a mirror (dipole `spec`) collects more
/// weighted solid angle than two opposing lenses of aperture `lens_na` with
/// a linear dipole perpendicular to their axis.
pub fn parabola_lens_crossover(spec: &DipoleSpec, lens_na: f64) -> Result<f64> {
    let target = omega_lens(lens_na, LensCount::Two, &DipoleSpec::linear_perpendicular())?;
    let objective = |hf: f64| {
        let rim = 2.0 * hf.sqrt().atan();
        // the range is valid by construction
        let range = AngularRange {
            theta_min: 0.0,
            theta_max: rim,
        };
        weighted_solid_angle(&range, spec).unwrap_or(f64::NAN) - target
    };
    bisect("parabola_lens_crossover", objective, 0.0, 1e8, 1e-7)
}

/// Fraction of an isotropic emitter's power falling in the range.
pub fn isotropic_fraction(range: &AngularRange) -> f64 {
    0.5 * (range.theta_min.cos() - range.theta_max.cos())
}

/// Hole half-angle that brings the isotropic capture of a mirror with depth
/// ratio `depth_ratio` down to `fraction`.
pub fn hole_for_isotropic_fraction(depth_ratio: f64, fraction: f64) -> Result<f64> {
    check_nonneg("hole_for_isotropic_fraction", "depth_ratio", depth_ratio)?;
    let rim = 2.0 * depth_ratio.sqrt().atan();
    let full = 0.5 * (1.0 - rim.cos());
    if !(0.0..=full).contains(&fraction) {
        return Err(Error::domain(
            "hole_for_isotropic_fraction",
            format!("fraction must lie in [0, {full}] for h/f = {depth_ratio}, got {fraction}"),
        ));
    }
    Ok((2.0 * fraction + rim.cos()).clamp(-1.0, 1.0).acos())
}

/// Fluorescence collection efficiency: captured solid-angle fraction times
/// mirror reflectivity.
pub fn collection_efficiency(solid_fraction: f64, reflectivity: f64) -> Result<f64> {
    check_unit("collection_efficiency", "solid_fraction", solid_fraction)?;
    check_unit("collection_efficiency", "reflectivity", reflectivity)?;
    Ok(solid_fraction * reflectivity)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    // Closed form for arbitrary tilt: the azimuthal average of cos² of the
    // angle to the axis is ½ sin²ϑ sin²τ + cos²ϑ cos²τ.
    fn oracle_tilted(range: &AngularRange, spec: &DipoleSpec) -> f64 {
        let (a, b) = (range.theta_min, range.theta_max);
        let sin3 = |t: f64| {
            let c = t.cos();
            -c + c * c * c / 3.0
        };
        let cos2sin = |t: f64| -t.cos().powi(3) / 3.0;
        let int_1 = 2.0 * PI * (a.cos() - b.cos());
        let s2 = spec.axis_tilt.sin().powi(2);
        let c2 = spec.axis_tilt.cos().powi(2);
        let int_c2 = PI * s2 * (sin3(b) - sin3(a)) + 2.0 * PI * c2 * (cos2sin(b) - cos2sin(a));
        match spec.kind {
            DipoleKind::LinearPi => int_1 - int_c2,
            DipoleKind::CircularSigma => 0.5 * (int_1 + int_c2),
        }
    }

    #[test]
    fn theta_examples() {
        let f = 0.7;
        assert_eq!(theta_from_radius(0.0, f).unwrap(), 0.0);
        assert_relative_eq!(
            theta_from_radius(2.0 * f, f).unwrap(),
            FRAC_PI_2,
            max_relative = 1e-15
        );
        let t = theta_from_radius(2.0 * f * 5.67f64.sqrt(), f).unwrap();
        assert_relative_eq!(t, 2.0 * 5.67f64.sqrt().atan(), max_relative = 1e-15);
        assert_abs_diff_eq!(t, 2.3464, epsilon = 1e-4);
        assert!(theta_from_radius(-1.0, f).is_err());
        assert!(theta_from_radius(f64::NAN, f).is_err());
        assert!(theta_from_radius(1.0, 0.0).is_err());
    }

    #[test]
    fn pattern_examples() {
        let pi0 = DipoleSpec::linear_parallel();
        let s0 = DipoleSpec::circular_parallel();
        assert_relative_eq!(dipole_pattern(&pi0, FRAC_PI_2, 0.3).unwrap(), 1.0);
        assert_relative_eq!(dipole_pattern(&s0, 0.0, 0.0).unwrap(), 1.0);
        assert_abs_diff_eq!(dipole_pattern(&pi0, 0.0, 1.0).unwrap(), 0.0);
        assert!(dipole_pattern(&pi0, 4.0, 0.0).is_err());
        // perpendicular axis lies along x
        let perp = DipoleSpec::linear_perpendicular();
        assert_abs_diff_eq!(
            dipole_pattern(&perp, FRAC_PI_2, 0.0).unwrap(),
            0.0,
            epsilon = 1e-15
        );
        assert_relative_eq!(dipole_pattern(&perp, 0.0, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn solid_angle_examples() {
        let pi0 = DipoleSpec::linear_parallel();
        let full = weighted_solid_angle(&AngularRange::full_sphere(), &pi0).unwrap();
        assert_relative_eq!(full, FULL_SPHERE_WEIGHT, max_relative = 1e-14);
        let m = MirrorGeometry::new(1.0, 5.67).unwrap();
        let frac = omega_parabola(&m, &pi0).unwrap() / FULL_SPHERE_WEIGHT;
        assert_relative_eq!(frac, 0.94, max_relative = 0.005);
        let half = omega_parabola(&MirrorGeometry::new(1.0, 1.0).unwrap(), &pi0).unwrap();
        assert_relative_eq!(half, 4.0 * PI / 3.0, max_relative = 1e-14);
        let sig = weighted_solid_angle(
            &AngularRange::full_sphere(),
            &DipoleSpec::circular_parallel(),
        )
        .unwrap();
        assert_relative_eq!(sig, FULL_SPHERE_WEIGHT, max_relative = 1e-14);
    }

    #[test]
    fn closed_form_matches_quadrature() {
        for kind in [DipoleKind::LinearPi, DipoleKind::CircularSigma] {
            let spec = DipoleSpec::new(kind, 0.0).unwrap();
            for (a, b) in [(0.0, PI), (0.2, 2.345), (1.0, 1.1), (0.0, 0.4)] {
                let r = AngularRange::new(a, b).unwrap();
                let closed = weighted_solid_angle(&r, &spec).unwrap();
                let quad = weighted_solid_angle_quadrature(&r, &spec).unwrap();
                assert_relative_eq!(closed, quad, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn tilted_quadrature_matches_oracle() {
        for kind in [DipoleKind::LinearPi, DipoleKind::CircularSigma] {
            for tilt in [0.1, 0.7, FRAC_PI_2] {
                let spec = DipoleSpec::new(kind, tilt).unwrap();
                for (a, b) in [(0.0, PI), (0.0, 1.25), (2.0, PI), (0.3, 2.4)] {
                    let r = AngularRange::new(a, b).unwrap();
                    let q = weighted_solid_angle(&r, &spec).unwrap();
                    assert_relative_eq!(q, oracle_tilted(&r, &spec), max_relative = 1e-9);
                }
            }
        }
    }

    #[test]
    fn lens_examples() {
        let perp = DipoleSpec::linear_perpendicular();
        let full = omega_lens(1.0, LensCount::Two, &perp).unwrap();
        assert_relative_eq!(full, FULL_SPHERE_WEIGHT, max_relative = 1e-9);
        let two = omega_lens(0.95, LensCount::Two, &perp).unwrap();
        assert_relative_eq!(two / FULL_SPHERE_WEIGHT, 0.76, max_relative = 0.01);
        let one = omega_lens(0.95, LensCount::One, &perp).unwrap();
        assert_relative_eq!(2.0 * one, two, max_relative = 1e-9);
        assert!(omega_lens(0.0, LensCount::One, &perp).is_err());
        assert!(omega_lens(1.2, LensCount::One, &perp).is_err());
        assert!(LensCount::from_count(3).is_err());
    }

    #[test]
    fn crossover_examples() {
        let pi0 = DipoleSpec::linear_parallel();
        let hf = parabola_lens_crossover(&pi0, 0.95).unwrap();
        assert_abs_diff_eq!(hf, 2.12, epsilon = 0.02);
        assert!(matches!(
            parabola_lens_crossover(&pi0, 1.0),
            Err(Error::NoRoot { .. })
        ));
        let low = parabola_lens_crossover(&pi0, 0.5).unwrap();
        assert!(low < hf);
        let at_root = omega_parabola(&MirrorGeometry::new(1.0, low).unwrap(), &pi0).unwrap();
        let lens = omega_lens(0.5, LensCount::Two, &DipoleSpec::linear_perpendicular()).unwrap();
        assert_relative_eq!(at_root, lens, max_relative = 1e-6);
    }

    #[test]
    fn isotropic_and_collection() {
        assert_relative_eq!(isotropic_fraction(&AngularRange::full_sphere()), 1.0);
        let m = MirrorGeometry::new(1.0, 5.67).unwrap();
        // cos ϑ_rim = (1 - h/f)/(1 + h/f), so the capture is (h/f)/(1 + h/f)
        assert_relative_eq!(
            isotropic_fraction(&m.angular_range()),
            5.67 / 6.67,
            max_relative = 1e-14
        );
        let hole = hole_for_isotropic_fraction(5.67, 0.81).unwrap();
        let holed = MirrorGeometry::with_hole(1.0, 5.67, hole).unwrap();
        assert_relative_eq!(
            isotropic_fraction(&holed.angular_range()),
            0.81,
            max_relative = 1e-12
        );
        assert_abs_diff_eq!(
            collection_efficiency(0.81, 0.67).unwrap(),
            0.543,
            epsilon = 5e-4
        );
        assert_abs_diff_eq!(
            collection_efficiency(0.94, 0.87).unwrap(),
            0.818,
            epsilon = 5e-4
        );
        assert_eq!(collection_efficiency(1.0, 1.0).unwrap(), 1.0);
        assert!(collection_efficiency(1.1, 0.5).is_err());
    }

    #[test]
    fn geometry_validation() {
        assert!(MirrorGeometry::new(0.0, 1.0).is_err());
        assert!(MirrorGeometry::with_hole(1.0, 1.0, 2.0).is_err());
        let m = MirrorGeometry::new(2.0, 5.67).unwrap();
        assert_relative_eq!(m.rim_radius(), 4.0 * 5.67f64.sqrt());
        assert_relative_eq!(
            theta_from_radius(m.rim_radius(), 2.0).unwrap(),
            m.rim_angle(),
            max_relative = 1e-14
        );
        assert!(AngularRange::new(1.0, 0.5).is_err());
        assert!(DipoleSpec::new(DipoleKind::LinearPi, 2.0).is_err());
    }

    #[test]
    fn complement_sums_to_full_sphere() {
        let spec = DipoleSpec::linear_parallel();
        for t in [0.0, 0.3, 1.7, 2.9, PI] {
            let a = weighted_solid_angle(&AngularRange::new(0.0, t).unwrap(), &spec).unwrap();
            let b = weighted_solid_angle(&AngularRange::new(t, PI).unwrap(), &spec).unwrap();
            assert_relative_eq!(a + b, FULL_SPHERE_WEIGHT, max_relative = 1e-15);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn radius_theta_roundtrip(ratio in 0.0f64..100.0, f in 1e-3f64..10.0) {
            let r = ratio * f;
            let back = radius_from_theta(theta_from_radius(r, f).unwrap(), f).unwrap();
            prop_assert!((back - r).abs() <= 1e-12 * r.max(f * 1e-300));
        }

        #[test]
        fn theta_strictly_increasing(r in 0.0f64..50.0, dr in 1e-6f64..5.0) {
            prop_assert!(theta_from_radius(r + dr, 1.0).unwrap() > theta_from_radius(r, 1.0).unwrap());
        }

        #[test]
        fn pattern_bounded(theta in 0.0f64..PI, phi in -10.0f64..10.0, tilt in 0.0f64..FRAC_PI_2, lin in any::<bool>()) {
            let kind = if lin { DipoleKind::LinearPi } else { DipoleKind::CircularSigma };
            let v = dipole_pattern(&DipoleSpec::new(kind, tilt).unwrap(), theta, phi).unwrap();
            prop_assert!((0.0..=1.0).contains(&v));
        }

        #[test]
        fn untilted_pattern_phi_independent(theta in 0.0f64..PI, p1 in -7.0f64..7.0, p2 in -7.0f64..7.0) {
            for spec in [DipoleSpec::linear_parallel(), DipoleSpec::circular_parallel()] {
                let a = dipole_pattern(&spec, theta, p1).unwrap();
                let b = dipole_pattern(&spec, theta, p2).unwrap();
                prop_assert!((a - b).abs() < 1e-15);
            }
        }

        #[test]
        fn solid_angle_monotone(a in 0.0f64..PI, b in 0.0f64..PI, d in 0.0f64..0.5) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let spec = DipoleSpec::linear_parallel();
            let base = weighted_solid_angle(&AngularRange::new(lo, hi).unwrap(), &spec).unwrap();
            let wider = weighted_solid_angle(&AngularRange::new(lo, (hi + d).min(PI)).unwrap(), &spec).unwrap();
            let narrower = weighted_solid_angle(&AngularRange::new((lo + d).min(hi), hi).unwrap(), &spec).unwrap();
            prop_assert!(wider >= base - 1e-15);
            prop_assert!(narrower <= base + 1e-15);
        }
    }
}
