//! Oscillatory integrals `I_Phi(lambda) = int e^{i lambda Phi} beta du dv`
//! and power-law decay fitting.
//!
//! The phase is `Phi(u, v) = d1 u + d2 v + h(u, v)` where `h` is a graph
//! function and `(d1, d2)` a linear drift confined to the uniform window
//! `|d_i| <= 10 eps`.  Two evaluators are provided: a brute-force 2D oracle
//! and the nested evaluator that mirrors the inner-stationary-point
//! reduction; their agreement is part of the acceptance suite.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{radial_bump, ScalarField2};
use crate::quad::{osc1d, osc2d_nested, osc2d_oracle, OscOptions, QuadStats};

/// Maximum drift magnitude relative to the patch radius (the `10 eps`
/// uniform window).
pub const DRIFT_WINDOW_FACTOR: f64 = 10.0;

/// One oscillatory-integral configuration.
#[derive(Debug, Clone)]
pub struct OscillatorySpec {
    pub name: String,
    /// Graph function `h`; the full phase adds the drift tilt.
    pub h: ScalarField2,
    /// Compactly supported amplitude `beta`.
    pub amplitude: ScalarField2,
    /// Radius of the domain disk.
    pub radius: f64,
    /// `(x1/lambda, x2/lambda)` linear phase tilt.
    pub drift: (f64, f64),
}

impl OscillatorySpec {
    pub fn new(name: &str, h: ScalarField2, drift: (f64, f64), radius: f64) -> Result<Self> {
        let window = DRIFT_WINDOW_FACTOR * radius;
        if drift.0.abs() > window || drift.1.abs() > window {
            return Err(Error::Config(format!(
                "drift {drift:?} outside the uniform window |d_i| <= {window}"
            )));
        }
        Ok(OscillatorySpec {
            name: name.to_string(),
            h,
            amplitude: radial_bump(radius),
            radius,
            drift,
        })
    }

    /// Spec built on a built-in catalog surface.
    pub fn from_surface(surface: &str, drift: (f64, f64)) -> Result<Self> {
        let patch = crate::catalog::builtin(surface)?;
        OscillatorySpec::new(surface, patch.h, drift, patch.domain_radius)
    }

    pub fn with_drift(&self, drift: (f64, f64)) -> Result<Self> {
        OscillatorySpec::new(&self.name, self.h.clone(), drift, self.radius)
    }

    /// The full phase `d1 u + d2 v + h(u, v)`.
    pub fn total_phase(&self) -> ScalarField2 {
        self.h.sub_linear(0.0, -self.drift.0, -self.drift.1)
    }
}

/// The nine-entry spec catalog exercised by the acceptance suite: the six
/// built-in surfaces without drift, plus the three Van der Corput normal
/// forms (`k = 2, 3, 4`) with a drift that keeps the full stationary point
/// inside the patch.
pub fn catalog() -> Vec<OscillatorySpec> {
    let mut specs: Vec<OscillatorySpec> = crate::catalog::BUILTIN_NAMES
        .iter()
        .map(|name| OscillatorySpec::from_surface(name, (0.0, 0.0)).unwrap())
        .collect();
    let k2 = ScalarField2::poly([(0, 2, 1.0), (2, 0, 1.0)]);
    let k3 = ScalarField2::poly([(0, 2, 1.0), (3, 0, 1.0)]);
    let k4 = ScalarField2::poly([(0, 2, 1.0), (2, 1, 1.0)]);
    let r = crate::catalog::DEFAULT_RADIUS;
    specs.push(OscillatorySpec::new("k2-drifted", k2, (0.05, 0.08), r).unwrap());
    specs.push(OscillatorySpec::new("k3-drifted", k3, (-0.02, 0.06), r).unwrap());
    specs.push(OscillatorySpec::new("k4-drifted", k4, (0.03, -0.05), r).unwrap());
    specs
}

/// Evaluation method tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Oracle,
    Nested,
}

/// Brute-force oracle evaluation of `I_Phi(lambda)`.
pub fn oracle_integral(spec: &OscillatorySpec, lambda: f64) -> Result<Complex64> {
    oracle_integral_opts(spec, lambda, &OscOptions::default())
}

pub fn oracle_integral_opts(
    spec: &OscillatorySpec,
    lambda: f64,
    opts: &OscOptions,
) -> Result<Complex64> {
    if !(1.0..=1e7).contains(&lambda) {
        return Err(Error::Config(format!("lambda {lambda} outside [1, 1e7]")));
    }
    let phase = spec.total_phase();
    let r = spec.radius;
    let (value, _) = osc2d_oracle(
        &phase,
        &spec.amplitude,
        (-r, r),
        (-r, r),
        Some(r),
        lambda,
        opts,
    )?;
    Ok(value)
}

/// Nested evaluation following the inner-stationary-point reduction.
pub fn nested_vdc_integral(spec: &OscillatorySpec, lambda: f64) -> Result<Complex64> {
    nested_vdc_integral_stats(spec, lambda, &OscOptions::default()).map(|(v, _)| v)
}

pub fn nested_vdc_integral_stats(
    spec: &OscillatorySpec,
    lambda: f64,
    opts: &OscOptions,
) -> Result<(Complex64, QuadStats)> {
    if !(1.0..=1e7).contains(&lambda) {
        return Err(Error::Config(format!("lambda {lambda} outside [1, 1e7]")));
    }
    let phase = spec.total_phase();
    osc2d_nested(&phase, &spec.amplitude, spec.radius, lambda, opts)
}

/// Geometric lambda grid with `per_decade` points per decade (inclusive of
/// both endpoints).
pub fn lambda_grid(lambda_min: f64, lambda_max: f64, per_decade: usize) -> Vec<f64> {
    assert!(lambda_min >= 1.0 && lambda_max > lambda_min && per_decade >= 1);
    let decades = (lambda_max / lambda_min).log10();
    let n = (decades * per_decade as f64).ceil() as usize;
    (0..=n)
        .map(|i| lambda_min * 10f64.powf(decades * i as f64 / n as f64))
        .collect()
}

/// Default grid density.
pub const POINTS_PER_DECADE: usize = 24;

/// Magnitudes `|I_Phi(lambda)|` over a lambda grid.
#[derive(Debug, Clone, Serialize)]
pub struct DecaySamples {
    /// `(lambda, |I|)` pairs, lambda strictly increasing.
    pub samples: Vec<(f64, f64)>,
    pub method: Method,
}

impl DecaySamples {
    pub fn new(samples: Vec<(f64, f64)>, method: Method) -> Result<Self> {
        for w in samples.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::Config("lambda grid must be strictly increasing".into()));
            }
        }
        if samples.iter().any(|&(l, m)| !l.is_finite() || !m.is_finite() || m < 0.0) {
            return Err(Error::Config("non-finite decay sample".into()));
        }
        Ok(DecaySamples { samples, method })
    }
}

/// Evaluate `|I_Phi|` over the grid with the chosen method (parallel over
/// lambda).
pub fn decay_scan(
    spec: &OscillatorySpec,
    grid: &[f64],
    method: Method,
) -> Result<DecaySamples> {
    let mags: Result<Vec<(f64, f64)>> = grid
        .par_iter()
        .map(|&lambda| {
            let value = match method {
                Method::Oracle => oracle_integral(spec, lambda),
                Method::Nested => nested_vdc_integral(spec, lambda),
            }
            .map_err(|e| Error::Config(format!("lambda = {lambda}: {e}")))?;
            Ok((lambda, value.norm()))
        })
        .collect();
    DecaySamples::new(mags?, method)
}

/// Least-squares power-law fit in `(log10 lambda, log10 |I|)`.
#[derive(Debug, Clone, Serialize)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    /// Largest absolute fit residual, in log10 units.
    pub max_residual: f64,
    pub lambda_range_used: (f64, f64),
    /// Samples dropped for magnitude underflow.
    pub dropped: usize,
}

/// Fit with an explicit magnitude floor: samples at or below the floor are
/// dropped (they sit in quadrature noise rather than on the decay law).
pub fn fit_decay_floor(samples: &DecaySamples, floor: f64) -> Result<DecayFit> {
    let kept: Vec<(f64, f64)> = samples
        .samples
        .iter()
        .copied()
        .filter(|&(_, m)| m > floor)
        .collect();
    let dropped = samples.samples.len() - kept.len();
    if kept.len() < 8 {
        return Err(Error::TooFewSamples(kept.len()));
    }
    let pts: Vec<(f64, f64)> = kept
        .iter()
        .map(|&(l, m)| (l.log10(), m.log10()))
        .collect();
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    let max_residual = pts
        .iter()
        .map(|p| (p.1 - slope * p.0 - intercept).abs())
        .fold(0.0, f64::max);
    Ok(DecayFit {
        slope,
        intercept,
        max_residual,
        lambda_range_used: (kept[0].0, kept[kept.len() - 1].0),
        dropped,
    })
}

pub fn fit_decay(samples: &DecaySamples) -> Result<DecayFit> {
    fit_decay_floor(samples, 1e-300)
}

/// Ratio `last / first` of the running maximum of `|I| lambda^exponent`
/// over the grid — the numerical form of a uniform-constant claim.  A value
/// close to 1 means the scaled magnitudes never exceed their initial level.
pub fn envelope_ratio(samples: &DecaySamples, exponent: f64) -> f64 {
    let mut running = f64::NEG_INFINITY;
    let mut first = None;
    for &(l, m) in &samples.samples {
        running = running.max(m * l.powf(exponent));
        if first.is_none() {
            first = Some(running);
        }
    }
    match first {
        Some(f) if f > 0.0 => running / f,
        _ => f64::INFINITY,
    }
}

/// `n` drifts on the boundary circle of the uniform window plus the origin.
pub fn drift_circle(n: usize, magnitude: f64) -> Vec<(f64, f64)> {
    let mut drifts = vec![(0.0, 0.0)];
    for i in 0..n {
        let th = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
        drifts.push((magnitude * th.cos(), magnitude * th.sin()));
    }
    drifts
}

/// Outcome of a worst-case drift search.
#[derive(Debug, Clone, Serialize)]
pub struct WorstDrift {
    /// The slowest-decaying (largest-slope) fit among measurable drifts.
    pub worst: DecayFit,
    pub worst_drift: (f64, f64),
    /// Drifts whose magnitudes sat entirely below the noise floor (their
    /// decay is faster than measurable).
    pub below_floor: usize,
}

/// Fit the decay slope for each drift on the window boundary (plus zero
/// drift) and return the slowest decay.  Samples below `noise_floor` are
/// dropped; drifts with fewer than 8 usable samples are counted in
/// `below_floor` rather than fitted.
pub fn worst_drift_scan(
    spec: &OscillatorySpec,
    grid: &[f64],
    n_drifts: usize,
    noise_floor: f64,
) -> Result<WorstDrift> {
    let window = DRIFT_WINDOW_FACTOR * spec.radius;
    let mut worst: Option<(DecayFit, (f64, f64))> = None;
    let mut below_floor = 0;
    for drift in drift_circle(n_drifts, window) {
        let drifted = spec.with_drift(drift)?;
        let samples = decay_scan(&drifted, grid, Method::Nested)?;
        match fit_decay_floor(&samples, noise_floor) {
            Ok(fit) => {
                if worst.as_ref().map_or(true, |(w, _)| fit.slope > w.slope) {
                    worst = Some((fit, drift));
                }
            }
            Err(Error::TooFewSamples(_)) => below_floor += 1,
            Err(e) => return Err(e),
        }
    }
    let (fit, drift) =
        worst.ok_or_else(|| Error::Config("all drifts below the noise floor".into()))?;
    Ok(WorstDrift {
        worst: fit,
        worst_drift: drift,
        below_floor,
    })
}

/// One-dimensional Van der Corput cross-check helper: `int a(x) e^{i lambda
/// phi(x)} dx` for scalar phases, exposed for the guide and tests.
pub fn vdc_1d(
    phi: &dyn Fn(f64) -> f64,
    dphi: &dyn Fn(f64) -> f64,
    a: &dyn Fn(f64) -> f64,
    lambda: f64,
    range: (f64, f64),
) -> Result<Complex64> {
    let mut stats = QuadStats::default();
    osc1d(
        phi,
        dphi,
        &|x| Complex64::new(a(x), 0.0),
        lambda,
        range.0,
        range.1,
        &OscOptions::default(),
        &mut stats,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k2_spec() -> OscillatorySpec {
        OscillatorySpec::new(
            "k2",
            ScalarField2::poly([(0, 2, 1.0), (2, 0, 1.0)]),
            (0.0, 0.0),
            0.1,
        )
        .unwrap()
    }

    #[test]
    fn catalog_has_nine_entries() {
        let cat = catalog();
        assert_eq!(cat.len(), 9);
        assert!(cat.iter().all(|s| s.drift.0.abs() <= 1.0 && s.drift.1.abs() <= 1.0));
    }

    #[test]
    fn drift_window_enforced() {
        let h = ScalarField2::poly([(0, 2, 1.0)]);
        assert!(OscillatorySpec::new("bad", h, (1.5, 0.0), 0.1).is_err());
    }

    #[test]
    fn zero_amplitude_gives_zero() {
        let mut spec = k2_spec();
        spec.amplitude = ScalarField2::poly([]);
        assert_eq!(oracle_integral(&spec, 10.0).unwrap().norm(), 0.0);
        assert_eq!(nested_vdc_integral(&spec, 10.0).unwrap().norm(), 0.0);
    }

    #[test]
    fn nested_matches_oracle_k2() {
        let spec = k2_spec();
        let o = oracle_integral(&spec, 100.0).unwrap();
        let n = nested_vdc_integral(&spec, 100.0).unwrap();
        let rel = (o - n).norm() / o.norm();
        assert!(rel < 1e-6, "rel = {rel:e}");
    }

    #[test]
    fn conjugation_symmetry() {
        let spec = k2_spec();
        let mut neg = spec.clone();
        neg.h = spec.h.negated();
        // Drift is zero, so negating h negates the whole phase.
        let plus = oracle_integral(&spec, 10.0).unwrap();
        let minus = oracle_integral(&neg, 10.0).unwrap();
        assert!((minus - plus.conj()).norm() < 1e-14 * plus.norm());
    }

    #[test]
    fn lambda_grid_density() {
        let g = lambda_grid(100.0, 10_000.0, 24);
        assert_eq!(g.len(), 49);
        assert!((g[0] - 100.0).abs() < 1e-9);
        assert!((g[48] - 10_000.0).abs() < 1e-6);
        let r0 = g[1] / g[0];
        let r1 = g[48] / g[47];
        assert!((r0 - r1).abs() < 1e-12);
    }

    #[test]
    fn fit_exact_power_law() {
        let grid = lambda_grid(10.0, 1000.0, 8);
        let samples = DecaySamples::new(
            grid.iter().map(|&l| (l, 7.0 / l)).collect(),
            Method::Oracle,
        )
        .unwrap();
        let fit = fit_decay(&samples).unwrap();
        assert!((fit.slope + 1.0).abs() < 1e-12);
        assert!((fit.intercept - 7f64.log10()).abs() < 1e-12);
        assert!(fit.max_residual < 1e-12);
    }

    #[test]
    fn fit_needs_eight_samples() {
        let samples = DecaySamples::new(
            vec![(1.0, 1.0), (2.0, 0.5), (3.0, 0.3)],
            Method::Oracle,
        )
        .unwrap();
        assert!(matches!(
            fit_decay(&samples),
            Err(Error::TooFewSamples(3))
        ));
    }

    #[test]
    fn decay_scan_orders_and_underflow_floor() {
        let spec = k2_spec();
        let grid = lambda_grid(10.0, 100.0, 8);
        let scan = decay_scan(&spec, &grid, Method::Nested).unwrap();
        assert_eq!(scan.samples.len(), grid.len());
        assert!(scan.samples.windows(2).all(|w| w[1].0 > w[0].0));
        assert!(scan.samples.iter().all(|&(_, m)| m.is_finite()));
    }

    #[test]
    fn envelope_of_exact_law_is_one() {
        let grid = lambda_grid(10.0, 1000.0, 8);
        let samples = DecaySamples::new(
            grid.iter().map(|&l| (l, 3.0 * l.powf(-0.75))).collect(),
            Method::Oracle,
        )
        .unwrap();
        let ratio = envelope_ratio(&samples, 0.75);
        assert!((ratio - 1.0).abs() < 1e-12);
    }
}
