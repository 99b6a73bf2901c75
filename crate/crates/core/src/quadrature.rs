//! Numerical integration: adaptive Gauss–Legendre for callables and
//! composite rules for uniformly sampled data.

use crate::error::{Error, Result};
use num_complex::Complex64;

/// Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds an `n`-point rule. Nodes are the roots of P_n found by Newton
    /// iteration from the Chebyshev-like initial guess.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Fixed rule on [a, b].
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }
}

/// P_n(x) and P_n'(x) by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Adaptive bisection driver around a Gauss–Legendre rule: an interval is
/// accepted when the rule on the whole interval agrees with the sum over its
/// two halves.
#[derive(Debug, Clone)]
pub struct AdaptiveQuadrature {
    rule: GaussLegendre,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_depth: u32,
}

impl Default for AdaptiveQuadrature {
    fn default() -> Self {
        AdaptiveQuadrature {
            rule: GaussLegendre::new(10),
            rel_tol: 1e-9,
            abs_tol: 1e-300,
            max_depth: 30,
        }
    }
}

impl AdaptiveQuadrature {
    pub fn with_tolerance(rel_tol: f64) -> Self {
        AdaptiveQuadrature {
            rel_tol,
            ..Default::default()
        }
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> Result<f64> {
        if a == b {
            return Ok(0.0);
        }
        let whole = self.rule.integrate(&mut f, a, b);
        // A coarse global estimate fixes the absolute target so that
        // subintervals are not refined past what the total needs.
        let scale = whole.abs().max(self.abs_tol);
        let mut worst = 0.0f64;
        let value = self.recurse(&mut f, a, b, whole, scale, 0, &mut worst);
        if worst > self.rel_tol * scale {
            return Err(Error::Numerical {
                op: "adaptive_quadrature",
                msg: format!(
                    "no convergence on [{a}, {b}] within depth {}",
                    self.max_depth
                ),
                achieved: worst / scale,
            });
        }
        Ok(value)
    }

    #[allow(clippy::too_many_arguments)]
    fn recurse<F: FnMut(f64) -> f64>(
        &self,
        f: &mut F,
        a: f64,
        b: f64,
        whole: f64,
        scale: f64,
        depth: u32,
        worst: &mut f64,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let left = self.rule.integrate(&mut *f, a, m);
        let right = self.rule.integrate(&mut *f, m, b);
        let diff = (left + right - whole).abs();
        let width = (b - a).abs();
        if diff <= self.rel_tol * scale * 0.5 || width < 1e-15 * (a.abs() + b.abs()) {
            return left + right;
        }
        if depth >= self.max_depth {
            *worst = worst.max(diff);
            return left + right;
        }
        self.recurse(f, a, m, left, scale, depth + 1, worst)
            + self.recurse(f, m, b, right, scale, depth + 1, worst)
    }

    /// Nested 2-D integral ∫_{a}^{b} ∫_{c}^{d} f(x, y) dy dx.
    pub fn integrate_2d<F: Fn(f64, f64) -> f64>(
        &self,
        f: F,
        (a, b): (f64, f64),
        (c, d): (f64, f64),
    ) -> Result<f64> {
        let mut inner_err = None;
        let outer = self.integrate(
            |x| match self.integrate(|y| f(x, y), c, d) {
                Ok(v) => v,
                Err(e) => {
                    inner_err.get_or_insert(e);
                    0.0
                }
            },
            a,
            b,
        )?;
        match inner_err {
            Some(e) => Err(e),
            None => Ok(outer),
        }
    }
}

/// Composite Simpson rule on uniformly spaced samples. An even number of
/// samples closes with a 3/8 panel.
pub fn simpson_uniform(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    match n {
        0 | 1 => 0.0,
        2 => 0.5 * h * (values[0] + values[1]),
        4 => three_eighths(&values[0..4], h),
        _ => {
            let end = if n % 2 == 1 { n } else { n - 3 };
            let mut s = values[0] + values[end - 1];
            for (i, v) in values[1..end - 1].iter().enumerate() {
                s += if i % 2 == 0 { 4.0 * v } else { 2.0 * v };
            }
            let mut total = s * h / 3.0;
            if n % 2 == 0 {
                total += three_eighths(&values[n - 4..], h);
            }
            total
        }
    }
}

fn three_eighths(v: &[f64], h: f64) -> f64 {
    3.0 * h / 8.0 * (v[0] + 3.0 * v[1] + 3.0 * v[2] + v[3])
}

pub fn simpson_uniform_complex(values: &[Complex64], h: f64) -> Complex64 {
    let re: Vec<f64> = values.iter().map(|v| v.re).collect();
    let im: Vec<f64> = values.iter().map(|v| v.im).collect();
    Complex64::new(simpson_uniform(&re, h), simpson_uniform(&im, h))
}

/// Trapezoid rule on uniformly spaced samples.
pub fn trapezoid_uniform(values: &[f64], h: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => (values.iter().sum::<f64>() - 0.5 * (values[0] + values[n - 1])) * h,
    }
}

pub fn trapezoid_uniform_complex(values: &[Complex64], h: f64) -> Complex64 {
    match values.len() {
        0 | 1 => Complex64::new(0.0, 0.0),
        n => (values.iter().sum::<Complex64>() - 0.5 * (values[0] + values[n - 1])) * h,
    }
}
