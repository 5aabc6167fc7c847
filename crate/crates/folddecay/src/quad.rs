//! Oscillation-adapted quadrature engines.
//!
//! Three evaluators live here:
//!
//! * [`osc1d`]: one-dimensional integrals of `A(x) e^{i lambda phi(x)}` by
//!   marching Gauss-Legendre cells sized so each cell sees at most ~pi/4 of
//!   phase.  When the total phase excursion is large the integral is first
//!   localized to smooth windows around the (near-)stationary points of the
//!   phase; the discarded complement is non-stationary against a `C^infty`
//!   amplitude and contributes below the fit tolerances used by callers.
//! * [`osc2d_oracle`]: a brute-force two-dimensional quadtree subdivision
//!   with the same per-cell phase criterion and a hard node budget.  This is
//!   the independent oracle the structured evaluators are checked against.
//! * [`osc2d_nested`]: the two-pass evaluator that mirrors the analytic
//!   treatment: for each outer abscissa `u` the inner `v`-integral is
//!   centred on the stationary point `psi(u)` of `v -> Phi(u, v)`, and the
//!   resulting slowly-varying profile is integrated against the outer phase
//!   `g(u) = Phi(u, psi(u))`.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{smooth_step, ScalarField2};

/// Tuning knobs shared by the oscillatory evaluators.
#[derive(Debug, Clone, Copy)]
pub struct OscOptions {
    /// Target phase variation per quadrature cell, in radians.
    pub max_phase_per_cell: f64,
    /// Phase per cell used inside the nested evaluator.  The oracle keeps
    /// the conservative pi/4 default; the nested paths can afford pi per
    /// cell because an 8-point Gauss rule still resolves a full period to
    /// ~1e-10, and the saving is decisive at large lambda.
    pub nested_phase_per_cell: f64,
    /// Total phase excursion (radians) above which the 1D evaluator switches
    /// to localized stationary-phase windows.
    pub localize_threshold: f64,
    /// Half-width of each stationary window, measured in wavelengths
    /// (factors of 2 pi of phase) on either side of the stationary point.
    pub window_wavelengths: f64,
    /// Hard cap on the total number of integrand evaluations.
    pub budget: usize,
    /// Minimum number of cells per marched interval, so the amplitude is
    /// resolved even where the phase is flat.  Raise this when the
    /// amplitude has features much narrower than the domain (e.g. the
    /// annulus cutoff edges in the dispersive module).
    pub min_cells: f64,
}

impl Default for OscOptions {
    fn default() -> Self {
        OscOptions {
            max_phase_per_cell: std::f64::consts::FRAC_PI_4,
            nested_phase_per_cell: std::f64::consts::PI,
            localize_threshold: 500.0,
            window_wavelengths: 10.0,
            budget: 1 << 26,
            min_cells: 16.0,
        }
    }
}

/// Work counters reported back by the evaluators.
#[derive(Debug, Clone, Default)]
pub struct QuadStats {
    /// Integrand evaluations consumed so far.
    pub nodes: usize,
    /// Accepted quadrature cells.
    pub cells: usize,
    /// Stationary windows used by the localized 1D path (0 = full-range).
    pub windows: usize,
    /// Whether any non-stationary region was discarded.
    pub truncated: bool,
    /// Inner slices where Newton on the stationary point needed the
    /// bisection safeguard or a full-slice fallback.
    pub fallbacks: usize,
    /// Accumulated local error estimate (difference of embedded rules).
    pub err_estimate: f64,
}

impl QuadStats {
    fn charge(&mut self, n: usize, budget: usize) -> Result<()> {
        self.nodes += n;
        if self.nodes > budget {
            Err(Error::QuadratureBudget {
                budget,
                achieved: self.err_estimate,
            })
        } else {
            Ok(())
        }
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, cached per order.
pub fn gauss_legendre(n: usize) -> &'static [(f64, f64)] {
    static CACHE: OnceLock<Mutex<HashMap<usize, &'static [(f64, f64)]>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().unwrap();
    if let Some(&slice) = map.get(&n) {
        return slice;
    }
    let mut rule = Vec::with_capacity(n);
    for i in 0..n {
        // Chebyshev-based initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.push((x, w));
    }
    rule.sort_by(|a, b| a.0.total_cmp(&b.0));
    let leaked: &'static [(f64, f64)] = Box::leak(rule.into_boxed_slice());
    map.insert(n, leaked);
    leaked
}

/// Value and derivative of the Legendre polynomial `P_n` at `x`.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0_f64, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

fn cell_value(
    phase: &dyn Fn(f64) -> f64,
    amp: &dyn Fn(f64) -> Complex64,
    lambda: f64,
    a: f64,
    b: f64,
    order: usize,
) -> (Complex64, f64, f64) {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = Complex64::new(0.0, 0.0);
    let (mut pmin, mut pmax) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(x, w) in gauss_legendre(order) {
        let t = mid + half * x;
        let ph = phase(t);
        pmin = pmin.min(ph);
        pmax = pmax.max(ph);
        acc += amp(t) * Complex64::cis(lambda * ph) * (w * half);
    }
    (acc, pmin, pmax)
}

/// Marching Gauss-Legendre integration of `amp(x) e^{i lambda phase(x)}`
/// over `[a, b]` with cells limited to ~`max_phase_per_cell` of phase and an
/// embedded 4/8-point error check.
fn march_1d(
    phase: &dyn Fn(f64) -> f64,
    amp: &dyn Fn(f64) -> Complex64,
    lambda: f64,
    a: f64,
    b: f64,
    opts: &OscOptions,
    stats: &mut QuadStats,
) -> Result<Complex64> {
    let len = b - a;
    if len <= 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let min_dx = len * 1e-10;
    // A floor on the cell count so the (smooth) amplitude is resolved even
    // where the phase is locally flat.
    let max_dx = len / opts.min_cells;
    let mut x = a;
    let mut dx = max_dx;
    let mut total = Complex64::new(0.0, 0.0);
    while x < b - min_dx {
        dx = dx.min(b - x);
        loop {
            let (value, pmin, pmax) = cell_value(phase, amp, lambda, x, x + dx, 8);
            stats.charge(8, opts.budget)?;
            // The span is measured at the actual quadrature nodes, so the
            // cell is halved whenever the predictive sizing undershot.
            let span = lambda.abs() * (pmax - pmin);
            if span > 2.0 * opts.max_phase_per_cell && dx > min_dx {
                dx *= 0.5;
                continue;
            }
            total += value;
            stats.cells += 1;
            x += dx;
            // Predictive resize toward the target phase per cell.
            let grow = if span > 1e-12 {
                (opts.max_phase_per_cell / span).clamp(0.5, 2.0)
            } else {
                2.0
            };
            dx = (dx * grow).min(max_dx);
            break;
        }
    }
    Ok(total)
}

/// A smooth window: identically 1 on `[plateau_lo, plateau_hi]`, rolling off
/// to 0 at `lo` and `hi` with `C^infty` transitions.
#[derive(Debug, Clone, Copy)]
struct Window {
    lo: f64,
    plateau_lo: f64,
    plateau_hi: f64,
    hi: f64,
}

impl Window {
    fn eval(&self, x: f64) -> f64 {
        if x <= self.lo || x >= self.hi {
            0.0
        } else if x < self.plateau_lo {
            smooth_step((x - self.lo) / (self.plateau_lo - self.lo))
        } else if x > self.plateau_hi {
            smooth_step((self.hi - x) / (self.hi - self.plateau_hi))
        } else {
            1.0
        }
    }
}

/// Locate the abscissa at which `lambda |phase - phase(s)|` first reaches
/// `target`, marching from `s` toward `limit`.
fn phase_reach(
    phase: &dyn Fn(f64) -> f64,
    lambda: f64,
    s: f64,
    limit: f64,
    target: f64,
) -> f64 {
    let base = phase(s);
    let dir = (limit - s).signum();
    let total = (limit - s).abs();
    if total <= 0.0 {
        return s;
    }
    // Geometric march out from s, then a short bisection refine.
    let mut w = total / 1024.0;
    let mut prev = 0.0;
    while w < total {
        if lambda.abs() * (phase(s + dir * w) - base).abs() >= target {
            break;
        }
        prev = w;
        w *= 1.5;
    }
    if w >= total {
        return limit;
    }
    let (mut lo, mut hi) = (prev, w);
    for _ in 0..30 {
        let mid = 0.5 * (lo + hi);
        if lambda.abs() * (phase(s + dir * mid) - base).abs() >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    s + dir * hi
}

/// One-dimensional oscillatory integral `int_a^b amp(x) e^{i lambda phase(x)} dx`.
///
/// `dphase` must be the derivative of `phase`.  The amplitude is assumed
/// smooth and compactly supported in `(a, b)` (or at least vanishing to high
/// order at the ends) whenever the localized path is taken.
#[allow(clippy::too_many_arguments)]
pub fn osc1d(
    phase: &dyn Fn(f64) -> f64,
    dphase: &dyn Fn(f64) -> f64,
    amp: &dyn Fn(f64) -> Complex64,
    lambda: f64,
    a: f64,
    b: f64,
    opts: &OscOptions,
    stats: &mut QuadStats,
) -> Result<Complex64> {
    let len = b - a;
    if len <= 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    // Probe the total phase excursion on a coarse grid.
    let probes = 65;
    let (mut pmin, mut pmax) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..probes {
        let x = a + len * i as f64 / (probes - 1) as f64;
        let p = phase(x);
        pmin = pmin.min(p);
        pmax = pmax.max(p);
    }
    stats.charge(probes, opts.budget)?;
    if lambda.abs() * (pmax - pmin) <= opts.localize_threshold {
        return march_1d(phase, amp, lambda, a, b, opts, stats);
    }

    // Localized path: find candidate stationary points as sign changes and
    // local minima of |phase'| on a fine scan.
    let scan = 1024;
    let mut dvals = Vec::with_capacity(scan + 1);
    for i in 0..=scan {
        let x = a + len * i as f64 / scan as f64;
        dvals.push((x, dphase(x)));
    }
    stats.charge(scan + 1, opts.budget)?;
    let mut candidates: Vec<f64> = Vec::new();
    for i in 0..scan {
        let (x0, d0) = dvals[i];
        let (x1, d1) = dvals[i + 1];
        if d0 == 0.0 {
            candidates.push(x0);
        } else if d0 * d1 < 0.0 {
            // Bisection refine of the sign change.
            let (mut lo, mut hi, mut dlo) = (x0, x1, d0);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                let dm = dphase(mid);
                if dm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if dlo * dm < 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    dlo = dm;
                }
            }
            candidates.push(0.5 * (lo + hi));
        }
    }
    for i in 1..scan {
        let m = dvals[i].1.abs();
        if m < dvals[i - 1].1.abs() && m < dvals[i + 1].1.abs() {
            candidates.push(dvals[i].0);
        }
    }
    candidates.sort_by(f64::total_cmp);
    candidates.dedup_by(|x, y| (*x - *y).abs() < len / scan as f64);
    // Keep the strongest (smallest |phase'|) candidates only.
    if candidates.len() > 16 {
        candidates.sort_by(|x, y| dphase(*x).abs().total_cmp(&dphase(*y).abs()));
        candidates.truncate(16);
        candidates.sort_by(f64::total_cmp);
    }

    // Build windows whose plateaus carry `window_wavelengths` full periods of
    // phase on each side and whose roll-offs carry at least two more.
    let plateau_phase = 2.0 * std::f64::consts::PI * opts.window_wavelengths;
    let roll_phase = 3.0 * plateau_phase;
    let mut windows: Vec<Window> = Vec::new();
    for &s in &candidates {
        let plateau_lo = phase_reach(phase, lambda, s, a, plateau_phase);
        let plateau_hi = phase_reach(phase, lambda, s, b, plateau_phase);
        let lo = phase_reach(phase, lambda, s, a, roll_phase);
        let hi = phase_reach(phase, lambda, s, b, roll_phase);
        windows.push(Window {
            lo,
            plateau_lo,
            plateau_hi,
            hi,
        });
    }
    // Merge overlapping windows (hull of plateaus, hull of supports).
    windows.sort_by(|w1, w2| w1.lo.total_cmp(&w2.lo));
    let mut merged: Vec<Window> = Vec::new();
    for w in windows {
        match merged.last_mut() {
            Some(last) if w.lo <= last.hi => {
                last.hi = last.hi.max(w.hi);
                last.plateau_lo = last.plateau_lo.min(w.plateau_lo);
                last.plateau_hi = last.plateau_hi.max(w.plateau_hi);
            }
            _ => merged.push(w),
        }
    }

    stats.windows += merged.len();
    stats.truncated = true;
    let mut total = Complex64::new(0.0, 0.0);
    for w in merged {
        let windowed = |x: f64| amp(x) * w.eval(x);
        total += march_1d(phase, &windowed, lambda, w.lo, w.hi, opts, stats)?;
    }
    Ok(total)
}

/// Composite 2D Simpson rule on a rectangle with `n x n` intervals
/// (`n` even).  Used as an independent cross-check in tests.
pub fn simpson_2d(
    f: &dyn Fn(f64, f64) -> Complex64,
    u_range: (f64, f64),
    v_range: (f64, f64),
    n: usize,
) -> Complex64 {
    assert!(n >= 2 && n % 2 == 0, "Simpson rule needs an even grid");
    let hu = (u_range.1 - u_range.0) / n as f64;
    let hv = (v_range.1 - v_range.0) / n as f64;
    let w1 = |i: usize| -> f64 {
        if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        }
    };
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..=n {
        let u = u_range.0 + hu * i as f64;
        for j in 0..=n {
            let v = v_range.0 + hv * j as f64;
            acc += f(u, v) * (w1(i) * w1(j));
        }
    }
    acc * (hu * hv / 9.0)
}

/// Brute-force 2D oracle for `int amp(u,v) e^{i lambda phase(u,v)} du dv`
/// over a rectangle, by quadtree subdivision until each cell sees at most
/// ~pi/4 of phase, with an embedded 8/12-point tensor error estimate.
///
/// `support_radius`, when given, declares that the amplitude vanishes
/// outside the centred disk of that radius, letting the oracle skip cells
/// entirely outside it.
pub fn osc2d_oracle(
    phase: &ScalarField2,
    amp: &ScalarField2,
    u_range: (f64, f64),
    v_range: (f64, f64),
    support_radius: Option<f64>,
    lambda: f64,
    opts: &OscOptions,
) -> Result<(Complex64, QuadStats)> {
    let mut stats = QuadStats::default();
    let max_cell = 0.125 * (u_range.1 - u_range.0).max(v_range.1 - v_range.0);
    let value = oracle_cell(
        phase,
        amp,
        u_range,
        v_range,
        support_radius,
        lambda,
        max_cell,
        0,
        opts,
        &mut stats,
    )?;
    Ok((value, stats))
}

#[allow(clippy::too_many_arguments)]
fn oracle_cell(
    phase: &ScalarField2,
    amp: &ScalarField2,
    u_range: (f64, f64),
    v_range: (f64, f64),
    support_radius: Option<f64>,
    lambda: f64,
    max_cell: f64,
    depth: usize,
    opts: &OscOptions,
    stats: &mut QuadStats,
) -> Result<Complex64> {
    let (ua, ub) = u_range;
    let (va, vb) = v_range;
    let (du, dv) = (ub - ua, vb - va);
    if let Some(r) = support_radius {
        // Closest point of the cell to the origin.
        let cu = 0.0_f64.clamp(ua, ub);
        let cv = 0.0_f64.clamp(va, vb);
        if cu.hypot(cv) >= r {
            return Ok(Complex64::new(0.0, 0.0));
        }
    }
    let diag = du.hypot(dv);
    let mut gmax: f64 = 0.0;
    for (u, v) in [
        (0.5 * (ua + ub), 0.5 * (va + vb)),
        (ua, va),
        (ua, vb),
        (ub, va),
        (ub, vb),
    ] {
        let (gu, gv) = phase.grad(u, v);
        gmax = gmax.max(gu.hypot(gv));
    }
    stats.charge(10, opts.budget)?;
    let span = lambda.abs() * gmax * diag;
    if (span > opts.max_phase_per_cell || du.max(dv) > max_cell) && depth < 48 {
        let um = 0.5 * (ua + ub);
        let vm = 0.5 * (va + vb);
        let mut acc = Complex64::new(0.0, 0.0);
        for (ur, vr) in [
            ((ua, um), (va, vm)),
            ((um, ub), (va, vm)),
            ((ua, um), (vm, vb)),
            ((um, ub), (vm, vb)),
        ] {
            acc += oracle_cell(
                phase,
                amp,
                ur,
                vr,
                support_radius,
                lambda,
                max_cell,
                depth + 1,
                opts,
                stats,
            )?;
        }
        return Ok(acc);
    }
    let tensor = |order: usize| -> Complex64 {
        let rule = gauss_legendre(order);
        let (um, uh) = (0.5 * (ua + ub), 0.5 * du);
        let (vm, vh) = (0.5 * (va + vb), 0.5 * dv);
        let mut acc = Complex64::new(0.0, 0.0);
        for &(xu, wu) in rule {
            let u = um + uh * xu;
            for &(xv, wv) in rule {
                let v = vm + vh * xv;
                let a = amp.eval(u, v);
                if a != 0.0 {
                    acc += Complex64::cis(lambda * phase.eval(u, v)) * (a * wu * wv);
                }
            }
        }
        acc * (uh * vh)
    };
    stats.charge(64 + 144, opts.budget)?;
    let coarse = tensor(8);
    let fine = tensor(12);
    stats.cells += 1;
    stats.err_estimate += (fine - coarse).norm();
    Ok(fine)
}

/// Nested evaluator for `int_D amp e^{i lambda Phi} du dv` over the centred
/// disk of radius `radius`, following the inner-stationary-point reduction:
/// each inner `v`-integral is evaluated (localized around `psi(u)` where
/// `Phi_v(u, psi(u)) = 0`), and the outer integral runs against the phase
/// `g(u) = Phi(u, psi(u))`.
pub fn osc2d_nested(
    phase: &ScalarField2,
    amp: &ScalarField2,
    radius: f64,
    lambda: f64,
    opts: &OscOptions,
) -> Result<(Complex64, QuadStats)> {
    let stats = RefCell::new(QuadStats::default());
    let psi_memo: RefCell<Option<(f64, f64, bool)>> = RefCell::new(None);
    let failed: RefCell<Option<Error>> = RefCell::new(None);
    let phi_u = phase.partial_field(1, 0);
    let phi_v = phase.partial_field(0, 1);
    let phi_vv = phase.partial_field(0, 2);

    // Stationary point of v -> Phi(u, v) on the disk section at u, by Newton
    // with a bisection safeguard.  Returns (psi, genuine) where `genuine`
    // marks an actual zero of Phi_v (as opposed to a boundary minimiser of
    // |Phi_v| on a non-stationary slice).
    let psi_at = |u: f64| -> (f64, bool) {
        if let Some((uc, p, g)) = *psi_memo.borrow() {
            if uc == u {
                return (p, g);
            }
        }
        let half = (radius * radius - u * u).max(0.0).sqrt();
        let (va, vb) = (-half, half);
        if half < 1e-12 {
            *psi_memo.borrow_mut() = Some((u, 0.0, false));
            return (0.0, false);
        }
        let dphi = |v: f64| phi_v.eval(u, v);
        let seed = psi_memo
            .borrow()
            .map(|(_, p, _)| p.clamp(va, vb))
            .unwrap_or(0.0);
        let mut v = seed;
        let mut newton_ok = false;
        for _ in 0..30 {
            let f = dphi(v);
            if f.abs() < 1e-13 {
                newton_ok = true;
                break;
            }
            let df = phi_vv.eval(u, v);
            if df.abs() < 1e-300 {
                break;
            }
            let next = v - f / df;
            if !next.is_finite() || next < va - half || next > vb + half {
                break;
            }
            v = next.clamp(va, vb);
        }
        if newton_ok {
            *psi_memo.borrow_mut() = Some((u, v, true));
            return (v, true);
        }
        // Safeguard: coarse scan for a sign change, then bisection; failing
        // that, take the minimiser of |Phi_v| (non-stationary slice).
        stats.borrow_mut().fallbacks += 1;
        let m = 64;
        let mut best = (f64::INFINITY, va);
        let mut bracket = None;
        let mut prev = (va, dphi(va));
        for i in 0..=m {
            let x = va + (vb - va) * i as f64 / m as f64;
            let d = dphi(x);
            if d.abs() < best.0 {
                best = (d.abs(), x);
            }
            if prev.1 * d < 0.0 {
                bracket = Some((prev.0, x, prev.1));
            }
            prev = (x, d);
        }
        if let Some((mut lo, mut hi, mut dlo)) = bracket {
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                let dm = dphi(mid);
                if dlo * dm <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    dlo = dm;
                }
            }
            let root = 0.5 * (lo + hi);
            *psi_memo.borrow_mut() = Some((u, root, true));
            (root, true)
        } else {
            *psi_memo.borrow_mut() = Some((u, best.1, false));
            (best.1, false)
        }
    };

    let g = |u: f64| -> f64 {
        let (p, _) = psi_at(u);
        phase.eval(u, p)
    };
    let gp = |u: f64| -> f64 {
        let (p, _) = psi_at(u);
        // d/du Phi(u, psi(u)) = Phi_u + Phi_v psi' and Phi_v(u, psi(u)) = 0.
        phi_u.eval(u, p)
    };
    let inner_opts = OscOptions {
        max_phase_per_cell: opts.nested_phase_per_cell,
        ..*opts
    };
    let plateau_phase = 2.0 * std::f64::consts::PI * opts.window_wavelengths;
    let roll_phase = 3.0 * plateau_phase;
    let profile = |u: f64| -> Complex64 {
        if failed.borrow().is_some() {
            return Complex64::new(0.0, 0.0);
        }
        let half = (radius * radius - u * u).max(0.0).sqrt();
        if half < 1e-12 {
            return Complex64::new(0.0, 0.0);
        }
        let (psi, _) = psi_at(u);
        let inner_phase = |v: f64| phase.eval(u, v);
        let inner_amp = |v: f64| Complex64::new(amp.eval(u, v), 0.0);
        // Coarse estimate of the phase excursion across the slice.
        let base = inner_phase(psi);
        let mut range: f64 = 0.0;
        for i in 0..=8 {
            let v = -half + 2.0 * half * i as f64 / 8.0;
            range = range.max((inner_phase(v) - base).abs());
        }
        let mut st = stats.borrow_mut();
        let _ = st.charge(10, opts.budget);
        let inner = if lambda.abs() * range <= opts.localize_threshold {
            march_1d(&inner_phase, &inner_amp, lambda, -half, half, &inner_opts, &mut st)
        } else {
            // The stationary point of the slice is known: window around it
            // instead of re-scanning for candidates.
            let w = Window {
                lo: phase_reach(&inner_phase, lambda, psi, -half, roll_phase),
                plateau_lo: phase_reach(&inner_phase, lambda, psi, -half, plateau_phase),
                plateau_hi: phase_reach(&inner_phase, lambda, psi, half, plateau_phase),
                hi: phase_reach(&inner_phase, lambda, psi, half, roll_phase),
            };
            st.windows += 1;
            st.truncated = true;
            let windowed = |v: f64| inner_amp(v) * w.eval(v);
            march_1d(&inner_phase, &windowed, lambda, w.lo, w.hi, &inner_opts, &mut st)
        };
        match inner {
            Ok(val) => val * Complex64::cis(-lambda * base),
            Err(e) => {
                *failed.borrow_mut() = Some(e);
                Complex64::new(0.0, 0.0)
            }
        }
    };

    let mut outer_stats = QuadStats::default();
    let value = osc1d(
        &g,
        &gp,
        &profile,
        lambda,
        -radius,
        radius,
        &inner_opts,
        &mut outer_stats,
    )?;
    if let Some(e) = failed.into_inner() {
        return Err(e);
    }
    let mut st = stats.into_inner();
    st.nodes += outer_stats.nodes;
    st.cells += outer_stats.cells;
    st.windows += outer_stats.windows;
    st.truncated |= outer_stats.truncated;
    st.err_estimate += outer_stats.err_estimate;
    Ok((value, st))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::radial_bump;

    #[test]
    fn gauss_legendre_exactness() {
        // n-point GL is exact for degree 2n-1.
        let rule = gauss_legendre(8);
        let integral: f64 = rule.iter().map(|&(x, w)| w * x.powi(14)).sum();
        assert!((integral - 2.0 / 15.0).abs() < 1e-14);
        let sum_w: f64 = rule.iter().map(|&(_, w)| w).sum();
        assert!((sum_w - 2.0).abs() < 1e-14);
    }

    #[test]
    fn linear_phase_closed_form() {
        // int_{-1}^1 e^{i lambda x} dx = 2 sin(lambda) / lambda.
        let lambda = 50.0;
        let mut stats = QuadStats::default();
        let val = osc1d(
            &|x| x,
            &|_| 1.0,
            &|_| Complex64::new(1.0, 0.0),
            lambda,
            -1.0,
            1.0,
            &OscOptions::default(),
            &mut stats,
        )
        .unwrap();
        let want = Complex64::new(2.0 * lambda.sin() / lambda, 0.0);
        assert!((val - want).norm() < 1e-12, "{val} vs {want}");
    }

    #[test]
    fn localized_matches_full_range() {
        // Cubic phase with a degenerate stationary point at 0; compare the
        // localized evaluator against full-range marching at a lambda where
        // both are affordable.
        let lambda = 800.0;
        let phase = |x: f64| x * x * x / 3.0 + 0.05 * x;
        let dphase = |x: f64| x * x + 0.05;
        let amp = |x: f64| Complex64::new(crate::field::bump_profile(x, -0.9, 0.9), 0.0);
        let mut s1 = QuadStats::default();
        let full = march_1d(&phase, &amp, lambda, -1.0, 1.0, &OscOptions::default(), &mut s1)
            .unwrap();
        let mut s2 = QuadStats::default();
        let loc_opts = OscOptions {
            localize_threshold: 0.0,
            ..OscOptions::default()
        };
        let localized = osc1d(&phase, &dphase, &amp, lambda, -1.0, 1.0, &loc_opts, &mut s2)
            .unwrap();
        assert!(s2.truncated && s2.windows >= 1);
        let _ = s1;
        let rel = (localized - full).norm() / full.norm();
        assert!(rel < 1e-4, "rel = {rel:e}, windows = {}", s2.windows);
    }

    #[test]
    fn oracle_matches_simpson() {
        // Phase u^2 + v^2, bump amplitude, lambda = 1 against a 400^2
        // Simpson grid (spec'd cross-oracle).
        let eps = 0.1;
        let phase = ScalarField2::poly([(2, 0, 1.0), (0, 2, 1.0)]);
        let amp = radial_bump(eps);
        let (val, stats) = osc2d_oracle(
            &phase,
            &amp,
            (-eps, eps),
            (-eps, eps),
            Some(eps),
            1.0,
            &OscOptions::default(),
        )
        .unwrap();
        let reference = simpson_2d(
            &|u, v| Complex64::cis(u * u + v * v) * amp.eval(u, v),
            (-eps, eps),
            (-eps, eps),
            400,
        );
        let rel = (val - reference).norm() / reference.norm();
        assert!(rel < 1e-8, "rel = {rel:e}, nodes = {}", stats.nodes);
    }

    #[test]
    fn zero_phase_is_lambda_independent() {
        let eps = 0.1;
        let phase = ScalarField2::poly([]);
        let amp = radial_bump(eps);
        let opts = OscOptions::default();
        let (a, _) =
            osc2d_oracle(&phase, &amp, (-eps, eps), (-eps, eps), Some(eps), 1.0, &opts).unwrap();
        let (b, _) =
            osc2d_oracle(&phase, &amp, (-eps, eps), (-eps, eps), Some(eps), 7.0, &opts).unwrap();
        assert!((a - b).norm() < 1e-12);
        assert!(a.im.abs() < 1e-15 && a.re > 0.0);
    }

    #[test]
    fn nested_matches_oracle_fold() {
        // Phi = v^2 + u^3 (fold phase), bump amplitude, lambda = 100.
        let eps = 0.1;
        let phase = ScalarField2::poly([(0, 2, 1.0), (3, 0, 1.0)]);
        let amp = radial_bump(eps);
        let opts = OscOptions::default();
        let (oracle, _) =
            osc2d_oracle(&phase, &amp, (-eps, eps), (-eps, eps), Some(eps), 100.0, &opts)
                .unwrap();
        let (nested, stats) = osc2d_nested(&phase, &amp, eps, 100.0, &opts).unwrap();
        let rel = (nested - oracle).norm() / oracle.norm();
        assert!(rel < 1e-6, "rel = {rel:e}, fallbacks = {}", stats.fallbacks);
    }

    #[test]
    fn budget_is_enforced() {
        let eps = 0.1;
        let phase = ScalarField2::poly([(2, 0, 1.0), (0, 2, 1.0)]);
        let amp = radial_bump(eps);
        let opts = OscOptions {
            budget: 500,
            ..OscOptions::default()
        };
        let err = osc2d_oracle(
            &phase,
            &amp,
            (-eps, eps),
            (-eps, eps),
            Some(eps),
            1e4,
            &opts,
        )
        .unwrap_err();
        assert!(matches!(err, Error::QuadratureBudget { budget: 500, .. }));
    }
}
