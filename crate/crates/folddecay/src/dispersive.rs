//! Dispersive kernels `G_t(x) = int e^{i(x.xi + t p(xi))} beta(xi) dxi`,
//! homogeneous scaling identities, and Strichartz admissibility lines.
//!
//! The symbol catalog is `|xi|^2` (regular), `xi1^3 + xi2^3` (homogeneous
//! with fold lines on the axes), and `xi1^3 + xi2^3 + |xi|` as the
//! lower-order-perturbed example.  Both homogeneous symbols have separable
//! phases `x.xi + t p(xi) = phi1(xi1) + phi2(xi2)`, which the kernel
//! evaluator exploits: the inner axis integral (which may carry two
//! stationary points) is handled by the generic localized 1D engine, and
//! the outer integrand oscillates only through its own axis phase.

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{smooth_step, ScalarField2};
use crate::quad::{osc1d, osc2d_nested, OscOptions, QuadStats};

type Axis = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Separable decomposition `p(xi) = p1(xi1) + p2(xi2)` with derivatives.
#[derive(Clone)]
pub struct SeparableParts {
    pub p1: Axis,
    pub dp1: Axis,
    pub p2: Axis,
    pub dp2: Axis,
}

/// Lower-order perturbation data for `p = p_mu + p_nu`.
#[derive(Clone)]
pub struct Perturbation {
    pub principal: ScalarField2,
    pub mu: f64,
    pub lower: ScalarField2,
    pub nu: f64,
}

/// A two-dimensional Fourier symbol.
#[derive(Clone)]
pub struct Symbol2 {
    pub name: String,
    pub field: ScalarField2,
    /// `mu` when `p(N xi) = N^mu p(xi)`; `None` for inhomogeneous symbols.
    pub homogeneity: Option<f64>,
    pub perturbation: Option<Perturbation>,
    pub separable: Option<SeparableParts>,
}

impl std::fmt::Debug for Symbol2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Symbol2")
            .field("name", &self.name)
            .field("homogeneity", &self.homogeneity)
            .finish()
    }
}

/// The `|xi|^2` Schroedinger symbol (mu = 2, strictly convex graph).
pub fn symbol_parabola() -> Symbol2 {
    Symbol2 {
        name: "parabola".into(),
        field: ScalarField2::poly([(2, 0, 1.0), (0, 2, 1.0)]),
        homogeneity: Some(2.0),
        perturbation: None,
        separable: Some(SeparableParts {
            p1: Arc::new(|s| s * s),
            dp1: Arc::new(|s| 2.0 * s),
            p2: Arc::new(|s| s * s),
            dp2: Arc::new(|s| 2.0 * s),
        }),
    }
}

/// The `xi1^3 + xi2^3` symbol (mu = 3); the Gauss map of its graph folds
/// along both axes.
pub fn symbol_cubic_fold() -> Symbol2 {
    Symbol2 {
        name: "cubic-fold".into(),
        field: ScalarField2::poly([(3, 0, 1.0), (0, 3, 1.0)]),
        homogeneity: Some(3.0),
        perturbation: None,
        separable: Some(SeparableParts {
            p1: Arc::new(|s| s * s * s),
            dp1: Arc::new(|s| 3.0 * s * s),
            p2: Arc::new(|s| s * s * s),
            dp2: Arc::new(|s| 3.0 * s * s),
        }),
    }
}

/// The perturbed symbol `xi1^3 + xi2^3 + |xi|` with `(mu, nu) = (3, 1)`.
pub fn symbol_cubic_perturbed() -> Symbol2 {
    let principal = ScalarField2::poly([(3, 0, 1.0), (0, 3, 1.0)]);
    let lower = ScalarField2::func(|u, v| u.hypot(v), 1e-4);
    Symbol2 {
        name: "cubic-perturbed".into(),
        field: ScalarField2::func(|u, v| u * u * u + v * v * v + u.hypot(v), 1e-4),
        homogeneity: None,
        perturbation: Some(Perturbation {
            principal,
            mu: 3.0,
            lower,
            nu: 1.0,
        }),
        separable: None,
    }
}

pub fn catalog() -> Vec<Symbol2> {
    vec![symbol_parabola(), symbol_cubic_fold(), symbol_cubic_perturbed()]
}

/// Inner and outer radii of the frequency annulus.
pub const ANNULUS: (f64, f64) = (0.25, 4.0);

/// Default quadrature options for dispersive kernels: the cutoff's inner
/// edge (width 1/4) is much narrower than the [-4, 4] domain, so the
/// amplitude-resolution floor is raised to 128 cells per axis.
pub fn kernel_opts() -> OscOptions {
    OscOptions {
        min_cells: 128.0,
        ..OscOptions::default()
    }
}

/// Smooth annulus cutoff supported in `1/4 < |xi| < 4`, identically 1 on
/// `1/2 <= |xi| <= 2`.
pub fn annulus_cutoff() -> ScalarField2 {
    scaled_cutoff(1.0)
}

/// The dilated cutoff `beta(xi / n)`, supported in `n/4 < |xi| < 4n`.
pub fn scaled_cutoff(n: f64) -> ScalarField2 {
    ScalarField2::func(
        move |u, v| {
            let r = u.hypot(v) / n;
            smooth_step((r - 0.25) / 0.25) * smooth_step((4.0 - r) / 2.0)
        },
        1e-4,
    )
}

/// Maximum relative homogeneity defect `|p(2 xi) - 2^mu p(xi)| / |p(2 xi)|`
/// over test points in `1/2 < |xi| < 2`.
pub fn homogeneity_defect(sym: &Symbol2) -> Option<f64> {
    let mu = sym.homogeneity?;
    let mut worst: f64 = 0.0;
    for i in 0..64 {
        let th = 2.0 * std::f64::consts::PI * i as f64 / 64.0;
        for r in [0.6, 1.0, 1.7] {
            let (u, v) = (r * th.cos(), r * th.sin());
            let p2 = sym.field.eval(2.0 * u, 2.0 * v);
            let p1 = sym.field.eval(u, v);
            if p2.abs() > 1e-12 {
                worst = worst.max((p2 - 2f64.powf(mu) * p1).abs() / p2.abs());
            }
        }
    }
    Some(worst)
}

/// Evaluate `G_t(x)` with an explicit cutoff supported in `|xi| < radius`.
pub fn dispersive_kernel_opts(
    sym: &Symbol2,
    beta: &ScalarField2,
    radius: f64,
    t: f64,
    x: [f64; 2],
    opts: &OscOptions,
) -> Result<Complex64> {
    if t.abs() > 1e5 {
        return Err(Error::Config(format!("|t| = {t:e} beyond the 1e5 cap")));
    }
    if let Some(sep) = &sym.separable {
        let stats = RefCell::new(QuadStats::default());
        let failed: RefCell<Option<Error>> = RefCell::new(None);
        let p2 = Arc::clone(&sep.p2);
        let dp2 = Arc::clone(&sep.dp2);
        let phase2 = move |s: f64| x[1] * s + t * p2(s);
        let dphase2 = move |s: f64| x[1] + t * dp2(s);
        let profile = |u: f64| -> Complex64 {
            if failed.borrow().is_some() {
                return Complex64::new(0.0, 0.0);
            }
            let amp2 = |v: f64| Complex64::new(beta.eval(u, v), 0.0);
            let mut st = stats.borrow_mut();
            match osc1d(&phase2, &dphase2, &amp2, 1.0, -radius, radius, opts, &mut st) {
                Ok(v) => v,
                Err(e) => {
                    *failed.borrow_mut() = Some(e);
                    Complex64::new(0.0, 0.0)
                }
            }
        };
        let p1 = Arc::clone(&sep.p1);
        let dp1 = Arc::clone(&sep.dp1);
        let phase1 = move |s: f64| x[0] * s + t * p1(s);
        let dphase1 = move |s: f64| x[0] + t * dp1(s);
        let mut outer = QuadStats::default();
        let value = osc1d(&phase1, &dphase1, &profile, 1.0, -radius, radius, opts, &mut outer)?;
        if let Some(e) = failed.into_inner() {
            return Err(e);
        }
        Ok(value)
    } else {
        // Non-separable fallback: the nested evaluator with the full phase
        // folded into the field (lambda = 1).
        let phase = sym.field.scaled(t).sub_linear(0.0, -x[0], -x[1]);
        let (value, _) = osc2d_nested(&phase, beta, radius, 1.0, opts)?;
        Ok(value)
    }
}

/// `G_t(x)` with the standard annulus cutoff.
pub fn dispersive_kernel(sym: &Symbol2, t: f64, x: [f64; 2]) -> Result<Complex64> {
    dispersive_kernel_opts(
        sym,
        &annulus_cutoff(),
        ANNULUS.1,
        t,
        x,
        &kernel_opts(),
    )
}

/// Candidate `x` points for `sup_x |G_t|`: the kernel mass travels at the
/// group velocity, so the sup concentrates near `x = -t grad p(xi)` for
/// `xi` in the annulus — along the fold rays (axes) and the diagonal —
/// plus a coarse velocity grid as a safety net.
pub fn sup_candidates(sym: &Symbol2, t: f64, ray_samples: usize, grid: usize) -> Vec<[f64; 2]> {
    let mut xs = vec![[0.0, 0.0]];
    let (lo, hi) = ANNULUS;
    for i in 0..ray_samples {
        let s = lo * (hi / lo).powf(i as f64 / (ray_samples - 1).max(1) as f64);
        for xi in [(s, 0.0), (s / 2f64.sqrt(), s / 2f64.sqrt())] {
            let (g1, g2) = sym.field.grad(xi.0, xi.1);
            xs.push([-t * g1, -t * g2]);
            xs.push([t * g1, t * g2]);
        }
    }
    let mut gmax: f64 = 0.0;
    for i in 0..32 {
        let th = 2.0 * std::f64::consts::PI * i as f64 / 32.0;
        let (g1, g2) = sym.field.grad(hi * th.cos(), hi * th.sin());
        gmax = gmax.max(g1.hypot(g2));
    }
    let vmax = 1.1 * gmax * t;
    for i in 0..grid {
        for j in 0..grid {
            let d1 = -vmax + 2.0 * vmax * i as f64 / (grid - 1).max(1) as f64;
            let d2 = -vmax + 2.0 * vmax * j as f64 / (grid - 1).max(1) as f64;
            xs.push([d1, d2]);
        }
    }
    xs
}

/// `sup_x |G_t(x)|` over the candidate set.
pub fn kernel_sup(sym: &Symbol2, t: f64, ray_samples: usize, grid: usize) -> Result<f64> {
    let beta = annulus_cutoff();
    let opts = kernel_opts();
    let mut sup: f64 = 0.0;
    for x in sup_candidates(sym, t, ray_samples, grid) {
        sup = sup.max(
            dispersive_kernel_opts(sym, &beta, ANNULUS.1, t, x, &opts)?.norm(),
        );
    }
    Ok(sup)
}

/// Relative defect of the homogeneous scaling identity
/// `G^{(N annulus)}_t(x) = N^2 G_{N^mu t}(N x)`.
pub fn scaling_identity_check(sym: &Symbol2, n: f64, t: f64, x: [f64; 2]) -> Result<f64> {
    let mu = sym
        .homogeneity
        .ok_or_else(|| Error::Config(format!("{} is not homogeneous", sym.name)))?;
    // The identity is an exact change of variables; evaluate both sides
    // with plain (non-localized) marching at pi/2 per cell so quadrature
    // truncation cannot contaminate the 1e-8 comparison.
    let opts = OscOptions {
        max_phase_per_cell: std::f64::consts::FRAC_PI_2,
        localize_threshold: f64::INFINITY,
        ..kernel_opts()
    };
    let lhs = dispersive_kernel_opts(sym, &scaled_cutoff(n), n * ANNULUS.1, t, x, &opts)?;
    let rhs = dispersive_kernel_opts(
        sym,
        &annulus_cutoff(),
        ANNULUS.1,
        n.powf(mu) * t,
        [n * x[0], n * x[1]],
        &opts,
    )? * (n * n);
    Ok((lhs - rhs).norm() / lhs.norm().max(1e-12))
}

/// Sup-norm gap on the annulus between the rescaled perturbed symbol
/// `p_N(xi) = p_mu(xi) + p_nu(N xi) / N^mu` and its principal part.
pub fn rescaled_symbol_gap(sym: &Symbol2, n: f64) -> Result<f64> {
    let pert = sym
        .perturbation
        .as_ref()
        .ok_or_else(|| Error::Config(format!("{} has no perturbation data", sym.name)))?;
    let mut gap: f64 = 0.0;
    for i in 0..128 {
        let th = 2.0 * std::f64::consts::PI * i as f64 / 128.0;
        for r in [ANNULUS.0, 0.5, 1.0, 2.0, ANNULUS.1] {
            let (u, v) = (r * th.cos(), r * th.sin());
            let low = pert.lower.eval(n * u, n * v) / n.powf(pert.mu);
            gap = gap.max(low.abs());
        }
    }
    Ok(gap)
}

/// Which admissibility line applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Homogeneous symbols: `1/p + 5/(6q) <= 5/12`.
    HomogeneousThm12,
    /// Lower-order perturbed symbols: `1/p + 3/(4q) <= 3/8`.
    PerturbedThm13,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct StrichartzQuery {
    /// Time exponent `p` (may be `f64::INFINITY`).
    pub p_exp: f64,
    /// Space exponent `q` (may be `f64::INFINITY`).
    pub q_exp: f64,
    pub variant: Variant,
    /// Homogeneity entering the scale `s = 1 - 2/q - mu/p`.
    pub mu: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Admissibility {
    pub admissible: bool,
    /// Regularity scale `s = 1 - 2/q - mu/p`.
    pub s: f64,
}

/// Decide admissibility on the variant's line and return the scale `s`.
pub fn strichartz_admissible(query: &StrichartzQuery) -> Result<Admissibility> {
    if query.p_exp < 2.0 || query.q_exp < 2.0 {
        return Err(Error::ExponentDomain(query.p_exp, query.q_exp));
    }
    let (ip, iq) = (1.0 / query.p_exp, 1.0 / query.q_exp);
    let (coeff, bound) = match query.variant {
        Variant::HomogeneousThm12 => (5.0 / 6.0, 5.0 / 12.0),
        Variant::PerturbedThm13 => (3.0 / 4.0, 3.0 / 8.0),
    };
    let admissible = ip + coeff * iq <= bound + 1e-12;
    let s = 1.0 - 2.0 * iq - query.mu * ip;
    Ok(Admissibility { admissible, s })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{osc2d_oracle, simpson_2d};

    #[test]
    fn homogeneity_defects() {
        assert!(homogeneity_defect(&symbol_parabola()).unwrap() < 1e-12);
        assert!(homogeneity_defect(&symbol_cubic_fold()).unwrap() < 1e-12);
        assert!(homogeneity_defect(&symbol_cubic_perturbed()).is_none());
    }

    #[test]
    fn kernel_at_origin_is_cutoff_mass() {
        let sym = symbol_parabola();
        let beta = annulus_cutoff();
        let g0 = dispersive_kernel(&sym, 0.0, [0.0, 0.0]).unwrap();
        let mass = simpson_2d(
            &|u, v| num_complex::Complex64::new(beta.eval(u, v), 0.0),
            (-4.0, 4.0),
            (-4.0, 4.0),
            400,
        );
        assert!(g0.im.abs() < 1e-10);
        assert!((g0 - mass).norm() / mass.norm() < 1e-7, "{g0} vs {mass}");
    }

    #[test]
    fn separable_matches_oracle() {
        let sym = symbol_cubic_fold();
        let beta = annulus_cutoff();
        let opts = kernel_opts();
        let (t, x) = (0.5, [1.0, 0.5]);
        let sep = dispersive_kernel_opts(&sym, &beta, 4.0, t, x, &opts).unwrap();
        let phase = sym.field.scaled(t).sub_linear(0.0, -x[0], -x[1]);
        let (oracle, _) =
            osc2d_oracle(&phase, &beta, (-4.0, 4.0), (-4.0, 4.0), Some(4.0), 1.0, &opts)
                .unwrap();
        let rel = (sep - oracle).norm() / oracle.norm();
        assert!(rel < 1e-6, "rel = {rel:e}");
    }

    #[test]
    fn scaling_identity_small_cases() {
        let err = scaling_identity_check(&symbol_parabola(), 2.0, 1.0, [1.0, 0.0]).unwrap();
        assert!(err <= 1e-8, "parabola N=2: {err:e}");
        let err = scaling_identity_check(&symbol_cubic_fold(), 1.0, 0.3, [0.2, -0.1]).unwrap();
        assert!(err == 0.0, "N=1 must be exactly zero: {err:e}");
    }

    #[test]
    fn rescaled_symbol_convergence_rate() {
        let sym = symbol_cubic_perturbed();
        let g2 = rescaled_symbol_gap(&sym, 2.0).unwrap();
        let g4 = rescaled_symbol_gap(&sym, 4.0).unwrap();
        let g8 = rescaled_symbol_gap(&sym, 8.0).unwrap();
        // nu - mu = -2, so doubling N divides the gap by 4.
        assert!((g2 / g4 - 4.0).abs() < 1e-9, "{g2} {g4}");
        assert!((g4 / g8 - 4.0).abs() < 1e-9, "{g4} {g8}");
    }

    #[test]
    fn strichartz_lines() {
        // Theorem 1.2 boundary point (p, q) = (inf, 2).
        let a = strichartz_admissible(&StrichartzQuery {
            p_exp: f64::INFINITY,
            q_exp: 2.0,
            variant: Variant::HomogeneousThm12,
            mu: 3.0,
        })
        .unwrap();
        assert!(a.admissible);
        assert!(a.s.abs() < 1e-12);

        // Theorem 1.3 boundary point (p, q) = (8/3, inf).
        let b = strichartz_admissible(&StrichartzQuery {
            p_exp: 8.0 / 3.0,
            q_exp: f64::INFINITY,
            variant: Variant::PerturbedThm13,
            mu: 3.0,
        })
        .unwrap();
        assert!(b.admissible);
        assert!((b.s - (1.0 - 3.0 * 3.0 / 8.0)).abs() < 1e-12);

        // (p, q) = (4, inf) on the 3/8 line is interior-admissible.
        let c = strichartz_admissible(&StrichartzQuery {
            p_exp: 4.0,
            q_exp: f64::INFINITY,
            variant: Variant::PerturbedThm13,
            mu: 3.0,
        })
        .unwrap();
        assert!(c.admissible);

        // (p, q) = (2, 4) violates the 3/8 line.
        let d = strichartz_admissible(&StrichartzQuery {
            p_exp: 2.0,
            q_exp: 4.0,
            variant: Variant::PerturbedThm13,
            mu: 3.0,
        })
        .unwrap();
        assert!(!d.admissible);

        // Domain error below p, q = 2.
        assert!(matches!(
            strichartz_admissible(&StrichartzQuery {
                p_exp: 1.5,
                q_exp: 4.0,
                variant: Variant::PerturbedThm13,
                mu: 3.0,
            }),
            Err(Error::ExponentDomain(_, _))
        ));
    }

    #[test]
    fn admissibility_monotone_in_p() {
        for q in [2.0, 4.0, 16.0, f64::INFINITY] {
            let mut seen_admissible = false;
            for p in [2.0, 3.0, 4.0, 8.0, 64.0, f64::INFINITY] {
                let a = strichartz_admissible(&StrichartzQuery {
                    p_exp: p,
                    q_exp: q,
                    variant: Variant::HomogeneousThm12,
                    mu: 3.0,
                })
                .unwrap()
                .admissible;
                // Once admissible, increasing p must stay admissible.
                assert!(!seen_admissible || a, "p = {p}, q = {q}");
                seen_admissible |= a;
            }
        }
    }
}
