//! Fourier transforms of surface-carried measures and directional decay.
//!
//! For a graph surface `(u, v, h(u, v))` with density `a`, the transform is
//!
//! ```text
//! mu_check(x) = int e^{i (x1 u + x2 v + x3 h(u,v))} a(u,v) sqrt(1 + |grad h|^2) du dv
//! ```
//!
//! The module evaluates it along rays, classifies the non-stationary regime
//! `|(x1, x2)| >= 10 eps |x3|`, and searches the worst decay direction over
//! a Fibonacci sphere augmented with the surface normals along the
//! zero-curvature curve (where the slow decay concentrates).

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{radial_bump, ScalarField2};
use crate::oscillatory::{DecaySamples, Method};
use crate::quad::{osc2d_nested, osc2d_oracle, OscOptions};
use crate::surface::SurfacePatch;

/// A surface-carried measure: patch plus compactly supported density.
#[derive(Debug, Clone)]
pub struct SurfaceMeasureSpec {
    pub patch: SurfacePatch,
    /// Density `a`, supported strictly inside the domain disk.
    pub density: ScalarField2,
    /// Constant `C` in the rapid-decay assertion `|mu_check| <= C (1+|x|)^{-N}`.
    pub rapid_c: f64,
    /// Exponent `N` in the rapid-decay assertion.
    pub rapid_n: f64,
}

impl SurfaceMeasureSpec {
    /// Density bump filling 90% of the domain disk, so its support is
    /// strictly inside.
    pub fn new(patch: SurfacePatch) -> Self {
        let density = radial_bump(0.9 * patch.domain_radius);
        // The density bump is Gevrey-regular: its transform decays like
        // e^{-c sqrt(R)}, which only dips under a given algebraic envelope
        // beyond a crossover radius.  C = 1e5 keeps the N = 4 assertion true
        // from R = 100 on for both unit and small patches; both constants
        // are artifact choices and configurable.
        SurfaceMeasureSpec {
            patch,
            density,
            rapid_c: 1e5,
            rapid_n: 4.0,
        }
    }

    /// Built-in surface on a unit-radius patch.  Decay windows like
    /// `R in [1e2, 1e5]` only reach the asymptotic regime when the patch has
    /// unit scale; the slope is scale-invariant, so this loses no content.
    pub fn unit_scale(surface: &str) -> Result<Self> {
        let small = crate::catalog::builtin(surface)?;
        Ok(SurfaceMeasureSpec::new(SurfacePatch::new(small.h, 1.0)))
    }

    /// Effective amplitude `beta = a sqrt(1 + |grad h|^2)`.
    pub fn beta(&self) -> ScalarField2 {
        let a = self.density.clone();
        let hu = self.patch.h.partial_field(1, 0);
        let hv = self.patch.h.partial_field(0, 1);
        ScalarField2::func(
            move |u, v| {
                let d = a.eval(u, v);
                if d == 0.0 {
                    0.0
                } else {
                    let (gu, gv) = (hu.eval(u, v), hv.eval(u, v));
                    d * (1.0 + gu * gu + gv * gv).sqrt()
                }
            },
            1e-4,
        )
    }

    /// Total mass `mu_check(0)`.
    pub fn mass(&self) -> Result<f64> {
        Ok(surface_measure_ft(self, [0.0, 0.0, 0.0])?.re)
    }
}

/// Stationary vs rapid-decay regime of a frequency point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    RapidDecayRegime,
    StationaryRegime,
}

/// Regime classification: rapid decay iff `|(x1, x2)| >= 10 eps |x3|`
/// (boundary included).
pub fn nonstationary_check(spec: &SurfaceMeasureSpec, x: [f64; 3]) -> Regime {
    let eps = spec.patch.domain_radius;
    if x[0].hypot(x[1]) >= 10.0 * eps * x[2].abs() {
        Regime::RapidDecayRegime
    } else {
        Regime::StationaryRegime
    }
}

/// The configured rapid-decay envelope `C (1 + |x|)^{-N}`.
pub fn rapid_decay_bound(spec: &SurfaceMeasureSpec, x: [f64; 3]) -> f64 {
    let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
    spec.rapid_c * (1.0 + r).powf(-spec.rapid_n)
}

/// Largest |x| for which the brute-force oracle stays inside its node
/// budget on a unit patch.
const ORACLE_CUTOFF: f64 = 40.0;

/// Evaluate `mu_check(x)`.
pub fn surface_measure_ft(spec: &SurfaceMeasureSpec, x: [f64; 3]) -> Result<Complex64> {
    let norm = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
    // The oracle's cell count grows like (|x| * radius)^2; beyond the
    // cutoff the nested evaluator takes over.
    let method = if norm * spec.patch.domain_radius <= ORACLE_CUTOFF {
        Method::Oracle
    } else {
        Method::Nested
    };
    surface_measure_ft_method(spec, x, method)
}

/// Evaluate with an explicit method.  The oracle is only affordable for
/// small `|x|` on unit patches; the nested evaluator is validated against it
/// there and used everywhere else.
pub fn surface_measure_ft_method(
    spec: &SurfaceMeasureSpec,
    x: [f64; 3],
    method: Method,
) -> Result<Complex64> {
    let norm = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
    if norm > 1e7 {
        return Err(Error::Config(format!("|x| = {norm:e} beyond the 1e7 cap")));
    }
    let beta = spec.beta();
    let r = spec.patch.domain_radius;
    let opts = OscOptions::default();
    if norm == 0.0 {
        let (mass, _) =
            osc2d_oracle(&ScalarField2::poly([]), &beta, (-r, r), (-r, r), Some(r), 1.0, &opts)?;
        return Ok(mass);
    }
    // Normalize the phase by |x| so the effective lambda is |x| and the
    // phase gradient is O(1): lambda * Phi = x1 u + x2 v + x3 h exactly.
    let phase = spec
        .patch
        .h
        .scaled(x[2] / norm)
        .sub_linear(0.0, -x[0] / norm, -x[1] / norm);
    match method {
        Method::Oracle => {
            let (val, _) = osc2d_oracle(&phase, &beta, (-r, r), (-r, r), Some(r), norm, &opts)?;
            Ok(val)
        }
        Method::Nested => {
            let (val, _) = osc2d_nested(&phase, &beta, r, norm, &opts)?;
            Ok(val)
        }
    }
}

/// Magnitudes along a ray of directions.
#[derive(Debug, Clone, Serialize)]
pub struct DirectionalScan {
    pub direction: [f64; 3],
    /// `(R, |mu_check(R direction)|)` pairs, radii increasing.
    pub samples: Vec<(f64, f64)>,
}

/// `|mu_check|` along the ray `R -> R * direction` (parallel over radii).
pub fn directional_decay(
    spec: &SurfaceMeasureSpec,
    direction: [f64; 3],
    radii: &[f64],
) -> Result<DirectionalScan> {
    let n = (direction[0] * direction[0] + direction[1] * direction[1]
        + direction[2] * direction[2])
        .sqrt();
    if (n - 1.0).abs() > 1e-10 {
        return Err(Error::Config("direction must be a unit vector".into()));
    }
    let samples: Result<Vec<(f64, f64)>> = radii
        .par_iter()
        .map(|&radius| {
            let x = [
                radius * direction[0],
                radius * direction[1],
                radius * direction[2],
            ];
            Ok((radius, surface_measure_ft(spec, x)?.norm()))
        })
        .collect();
    Ok(DirectionalScan {
        direction,
        samples: samples?,
    })
}

/// `n` near-uniform directions on the unit sphere (Fibonacci lattice).
pub fn fibonacci_sphere(n: usize) -> Vec<[f64; 3]> {
    let golden = (1.0 + 5f64.sqrt()) / 2.0;
    (0..n)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
            let rho = (1.0 - z * z).sqrt();
            let th = 2.0 * std::f64::consts::PI * i as f64 / golden;
            [rho * th.cos(), rho * th.sin(), z]
        })
        .collect()
}

/// Surface normals along the traced zero-curvature curves, subsampled at
/// `per_curve` points each.  Both signs of the tangential normal component
/// are included so the sampling cannot miss the slow-decay side.
pub fn critical_directions(spec: &SurfaceMeasureSpec, per_curve: usize) -> Result<Vec<[f64; 3]>> {
    let traces = crate::surface::trace_zero_curvature(&spec.patch)?;
    let mut dirs = Vec::new();
    for trace in &traces {
        let stride = (trace.points.len() / per_curve.max(1)).max(1);
        for p in trace.points.iter().step_by(stride) {
            let (gu, gv) = spec.patch.h.grad(p.0, p.1);
            let n = (1.0 + gu * gu + gv * gv).sqrt();
            // True upward normal of the graph: the phase x . (u, v, h) is
            // stationary at p exactly when x is parallel to (-h_u, -h_v, 1).
            dirs.push([-gu / n, -gv / n, 1.0 / n]);
            dirs.push([-gu / n, gv / n, 1.0 / n]);
        }
    }
    Ok(dirs)
}

/// For each radius, the max of `|mu_check|` over a Fibonacci direction set
/// augmented with the critical directions along the zero-curvature curves.
pub fn worst_direction_sup(
    spec: &SurfaceMeasureSpec,
    radii: &[f64],
    n_directions: usize,
) -> Result<DecaySamples> {
    if n_directions < 16 {
        return Err(Error::Config("need at least 16 directions".into()));
    }
    let mut dirs = fibonacci_sphere(n_directions);
    dirs.extend(critical_directions(spec, 16)?);
    let samples: Result<Vec<(f64, f64)>> = radii
        .par_iter()
        .map(|&radius| {
            let mut sup: f64 = 0.0;
            for d in &dirs {
                let x = [radius * d[0], radius * d[1], radius * d[2]];
                sup = sup.max(surface_measure_ft(spec, x)?.norm());
            }
            Ok((radius, sup))
        })
        .collect();
    DecaySamples::new(samples?, Method::Nested)
}

/// CSV emitter with the spec'd columns.
pub fn scans_to_csv(scans: &[DirectionalScan]) -> String {
    let mut out = String::from("direction_x,direction_y,direction_z,R,magnitude\n");
    for scan in scans {
        for &(radius, mag) in &scan.samples {
            out.push_str(&format!(
                "{},{},{},{},{:e}\n",
                scan.direction[0], scan.direction[1], scan.direction[2], radius, mag
            ));
        }
    }
    out
}
