//! Differential geometry of graph surfaces: Gauss map, Gaussian curvature,
//! the zero-curvature curve, normalization to fold/cusp coordinates, and
//! the A1/A2/A3 classification of Gauss-map singularities.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::ScalarField2;

/// Classification thresholds. The geometric conditions are exact
/// inequalities; numerics need explicit margins, scaled to avoid unit
/// sensitivity.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    /// Relative factor for the curvature test: `|K| > curvature_rel * (|H|_F + 1)`.
    pub curvature_rel: f64,
    pub third_deriv_tol: f64,
    pub fourth_deriv_tol: f64,
    pub trace_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            curvature_rel: 1e-6,
            third_deriv_tol: 1e-5,
            fourth_deriv_tol: 1e-5,
            trace_tol: 1e-8,
        }
    }
}

/// Graph surface `{(u, v, h(u, v)) : u^2 + v^2 < domain_radius^2}`.
#[derive(Debug, Clone)]
pub struct SurfacePatch {
    pub h: ScalarField2,
    pub domain_radius: f64,
    /// True when the base point satisfies `h(0)=0, grad h(0)=0, Hess(0)=diag(0,1)`.
    pub normalized: bool,
    pub base_point: (f64, f64),
}

/// Affine coordinate change `old = a * new + t`, recorded so directions can
/// be pulled back from normalized to original coordinates.
#[derive(Debug, Clone, Copy)]
pub struct AffineMap {
    pub a: [[f64; 2]; 2],
    pub t: [f64; 2],
    /// True if the height function was negated to make `h_vv(0) = +1`.
    pub flipped: bool,
}

impl AffineMap {
    pub fn apply(&self, p: (f64, f64)) -> (f64, f64) {
        (
            self.a[0][0] * p.0 + self.a[0][1] * p.1 + self.t[0],
            self.a[1][0] * p.0 + self.a[1][1] * p.1 + self.t[1],
        )
    }

    pub fn push_direction(&self, d: (f64, f64)) -> (f64, f64) {
        (
            self.a[0][0] * d.0 + self.a[0][1] * d.1,
            self.a[1][0] * d.0 + self.a[1][1] * d.1,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SingularityKind {
    /// A1: Gauss map is a local diffeomorphism.
    Regular,
    /// A2: rank drops to 1 and `h_uuu(0) != 0` in normalized coordinates.
    Fold,
    /// A3: fold condition fails, `h_uuv(0) != 0` and `h_uuuu - 3 h_uuv^2 != 0`.
    Cusp,
    Degenerate,
}

#[derive(Debug, Clone, Serialize)]
pub struct SingularityReport {
    pub kind: SingularityKind,
    /// Named derivative values that decided the classification.
    pub witnesses: BTreeMap<String, f64>,
    pub in_class_c: bool,
    pub diagnostic: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TraceClosure {
    Closed,
    HitsBoundary,
}

/// Traced connected component of the zero-curvature curve.
#[derive(Debug, Clone, Serialize)]
pub struct CurveTrace {
    pub points: Vec<(f64, f64)>,
    pub tangent: Vec<(f64, f64)>,
    pub closure: TraceClosure,
}

impl SurfacePatch {
    pub fn new(h: ScalarField2, domain_radius: f64) -> Self {
        SurfacePatch {
            h,
            domain_radius,
            normalized: false,
            base_point: (0.0, 0.0),
        }
    }

    pub fn contains(&self, p: (f64, f64)) -> bool {
        p.0 * p.0 + p.1 * p.1 <= self.domain_radius * self.domain_radius * (1.0 + 1e-12)
    }

    fn check_domain(&self, p: (f64, f64)) -> Result<()> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(Error::OutsideDomain(p.0, p.1, self.domain_radius))
        }
    }

    /// Unit normal `(-h_u, h_v, 1) / sqrt(1 + |grad h|^2)`.
    ///
    /// The sign pattern of the first two components follows the source
    /// convention; the classification is insensitive to it.
    pub fn gauss_map(&self, p: (f64, f64)) -> Result<[f64; 3]> {
        self.check_domain(p)?;
        let (hu, hv) = self.h.grad(p.0, p.1);
        let n = (1.0 + hu * hu + hv * hv).sqrt();
        Ok([-hu / n, hv / n, 1.0 / n])
    }

    /// Hessian of `h` at `p`.
    pub fn hessian(&self, p: (f64, f64)) -> [[f64; 2]; 2] {
        let huu = self.h.partial(2, 0, p.0, p.1);
        let huv = self.h.partial(1, 1, p.0, p.1);
        let hvv = self.h.partial(0, 2, p.0, p.1);
        [[huu, huv], [huv, hvv]]
    }

    /// Full graph-curvature formula
    /// `K = (h_uu h_vv - h_uv^2) / (1 + h_u^2 + h_v^2)^2`.
    pub fn gauss_curvature(&self, p: (f64, f64)) -> Result<f64> {
        self.check_domain(p)?;
        let (hu, hv) = self.h.grad(p.0, p.1);
        let hess = self.hessian(p);
        let j = hess[0][0] * hess[1][1] - hess[0][1] * hess[0][1];
        let w = 1.0 + hu * hu + hv * hv;
        Ok(j / (w * w))
    }

    /// Hessian determinant `J = h_uu h_vv - h_uv^2`; vanishes exactly where K does.
    pub fn hessian_det(&self, u: f64, v: f64) -> f64 {
        let huu = self.h.partial(2, 0, u, v);
        let huv = self.h.partial(1, 1, u, v);
        let hvv = self.h.partial(0, 2, u, v);
        huu * hvv - huv * huv
    }

    fn hessian_det_grad(&self, u: f64, v: f64) -> (f64, f64) {
        let huu = self.h.partial(2, 0, u, v);
        let huv = self.h.partial(1, 1, u, v);
        let hvv = self.h.partial(0, 2, u, v);
        let huuu = self.h.partial(3, 0, u, v);
        let huuv = self.h.partial(2, 1, u, v);
        let huvv = self.h.partial(1, 2, u, v);
        let hvvv = self.h.partial(0, 3, u, v);
        (
            huuu * hvv + huu * huvv - 2.0 * huv * huuv,
            huuv * hvv + huu * hvvv - 2.0 * huv * huvv,
        )
    }

    fn curvature_tol(&self, p: (f64, f64), tol: &Tolerances) -> f64 {
        let h = self.hessian(p);
        let frob = (h[0][0] * h[0][0] + 2.0 * h[0][1] * h[0][1] + h[1][1] * h[1][1]).sqrt();
        tol.curvature_rel * (frob + 1.0)
    }
}

/// Re-coordinatize so that `h(0)=0`, `grad h(0)=0`, `Hess(0)=diag(0,1)` at
/// the given point. Requires rank 1 of the shape operator there.
pub fn normalize_at(patch: &SurfacePatch, point: (f64, f64)) -> Result<(SurfacePatch, AffineMap)> {
    normalize_at_tol(patch, point, &Tolerances::default())
}

pub fn normalize_at_tol(
    patch: &SurfacePatch,
    point: (f64, f64),
    tol: &Tolerances,
) -> Result<(SurfacePatch, AffineMap)> {
    patch.check_domain(point)?;
    let h0 = patch.h.eval(point.0, point.1);
    let (gu, gv) = patch.h.grad(point.0, point.1);
    let hess = patch.hessian(point);
    let frob =
        (hess[0][0] * hess[0][0] + 2.0 * hess[0][1] * hess[0][1] + hess[1][1] * hess[1][1]).sqrt();
    let eig_tol = (tol.curvature_rel * (frob + 1.0)).sqrt().max(1e-10);

    // Symmetric 2x2 eigendecomposition.
    let (l1, l2, v1, v2) = sym_eig(hess);
    // l1 is the smaller eigenvalue in modulus, v1 its direction (new u axis).
    let (small, big, dir_u, dir_v) = if l1.abs() <= l2.abs() {
        (l1, l2, v1, v2)
    } else {
        (l2, l1, v2, v1)
    };
    if big.abs() <= eig_tol {
        return Err(Error::Degenerate(format!(
            "shape operator has rank 0 at ({}, {}): Hessian eigenvalues {:.3e}, {:.3e}",
            point.0, point.1, small, big
        )));
    }
    if small.abs() > eig_tol {
        return Err(Error::RegularPoint);
    }

    // Shift to the point, remove the tangent plane, rotate the kernel onto
    // the u axis, rescale v so that h_vv(0) = 1 in modulus.
    let s = 1.0 / big.abs().sqrt();
    let a = [[dir_u.0, s * dir_v.0], [dir_u.1, s * dir_v.1]];
    let t = [point.0, point.1];
    // g(x) = h(x) - h0 - grad h(point) . (x - point) vanishes to second
    // order at the point; subtracting the tangent plane is an affine map of
    // the ambient space and preserves the singularity type.
    let shifted = patch
        .h
        .sub_linear(h0 - (gu * point.0 + gv * point.1), gu, gv);
    let mut g = shifted.affine(a, t);
    let flipped = big < 0.0;
    if flipped {
        g = g.negated();
    }

    // Shrink the domain until the normalization invariants and h_vv > 1/2 hold.
    let mut eps = patch.domain_radius / (1.0 + s.max(1.0));
    let mut ok = false;
    for _ in 0..24 {
        if hvv_above_half(&g, eps) {
            ok = true;
            break;
        }
        eps *= 0.5;
    }
    if !ok {
        return Err(Error::Degenerate(format!(
            "could not shrink domain to keep h_vv > 1/2 near ({}, {})",
            point.0, point.1
        )));
    }

    let normalized = SurfacePatch {
        h: g,
        domain_radius: eps,
        normalized: true,
        base_point: (0.0, 0.0),
    };
    Ok((normalized, AffineMap { a, t, flipped }))
}

fn hvv_above_half(h: &ScalarField2, eps: f64) -> bool {
    let n = 8;
    for i in -n..=n {
        for j in -n..=n {
            let u = eps * i as f64 / n as f64;
            let v = eps * j as f64 / n as f64;
            if u * u + v * v > eps * eps {
                continue;
            }
            if h.partial(0, 2, u, v) <= 0.5 {
                return false;
            }
        }
    }
    true
}

/// Eigen-decomposition of a symmetric 2x2 matrix: returns
/// `(lambda1, lambda2, v1, v2)` with unit eigenvectors.
fn sym_eig(m: [[f64; 2]; 2]) -> (f64, f64, (f64, f64), (f64, f64)) {
    let (a, b, c) = (m[0][0], m[0][1], m[1][1]);
    let tr = a + c;
    let det = a * c - b * b;
    let disc = ((tr * tr / 4.0 - det).max(0.0)).sqrt();
    let l1 = tr / 2.0 - disc;
    let l2 = tr / 2.0 + disc;
    let v_for = |l: f64| -> (f64, f64) {
        // (A - l I) v = 0; pick the more stable row.
        let r1 = (a - l, b);
        let r2 = (b, c - l);
        let (x, y) = if r1.0.hypot(r1.1) > r2.0.hypot(r2.1) {
            (-r1.1, r1.0)
        } else {
            (-r2.1, r2.0)
        };
        let n = x.hypot(y);
        if n < 1e-300 {
            (1.0, 0.0)
        } else {
            (x / n, y / n)
        }
    };
    let v1 = v_for(l1);
    let v2 = if b.abs() < 1e-300 && (a - c).abs() < 1e-300 {
        (0.0, 1.0)
    } else {
        (-v1.1, v1.0)
    };
    (l1, l2, v1, v2)
}

/// Classify the Gauss-map singularity at a point of the patch.
pub fn classify_point(patch: &SurfacePatch, point: (f64, f64)) -> Result<SingularityReport> {
    classify_point_tol(patch, point, &Tolerances::default())
}

pub fn classify_point_tol(
    patch: &SurfacePatch,
    point: (f64, f64),
    tol: &Tolerances,
) -> Result<SingularityReport> {
    let k = patch.gauss_curvature(point)?;
    let ctol = patch.curvature_tol(point, tol);
    let mut witnesses = BTreeMap::new();
    witnesses.insert("K".to_string(), k);

    if k.abs() > ctol {
        return Ok(SingularityReport {
            kind: SingularityKind::Regular,
            witnesses,
            in_class_c: true,
            diagnostic: None,
        });
    }

    let (norm, _map) = match normalize_at_tol(patch, point, tol) {
        Ok(x) => x,
        Err(Error::RegularPoint) => {
            return Ok(SingularityReport {
                kind: SingularityKind::Regular,
                witnesses,
                in_class_c: true,
                diagnostic: Some("curvature within tolerance but rank 2".into()),
            })
        }
        Err(e) => {
            return Ok(SingularityReport {
                kind: SingularityKind::Degenerate,
                witnesses,
                in_class_c: false,
                diagnostic: Some(e.to_string()),
            })
        }
    };

    let huuu = norm.h.partial(3, 0, 0.0, 0.0);
    let huuv = norm.h.partial(2, 1, 0.0, 0.0);
    let huuuu = norm.h.partial(4, 0, 0.0, 0.0);
    let disc = huuuu - 3.0 * huuv * huuv;
    witnesses.insert("h_uuu".to_string(), huuu);
    witnesses.insert("h_uuv".to_string(), huuv);
    witnesses.insert("cusp_discriminant".to_string(), disc);

    let kind = if huuu.abs() > tol.third_deriv_tol {
        SingularityKind::Fold
    } else if huuv.abs() > tol.third_deriv_tol && disc.abs() > tol.fourth_deriv_tol {
        SingularityKind::Cusp
    } else {
        SingularityKind::Degenerate
    };
    Ok(SingularityReport {
        kind,
        in_class_c: kind != SingularityKind::Degenerate,
        witnesses,
        diagnostic: None,
    })
}

/// The curve `u -> psi(u)` solving `h_v(u, psi(u)) = 0` on a normalized patch,
/// with derivatives through order 4.
pub struct PsiCurve {
    h: ScalarField2,
    eps: f64,
}

impl PsiCurve {
    pub fn eval(&self, u: f64) -> Result<f64> {
        self.solve(u)
    }

    fn solve(&self, u: f64) -> Result<f64> {
        let mut v = 0.0;
        let mut lo = -2.0 * self.eps;
        let mut hi = 2.0 * self.eps;
        // h_v is increasing in v (h_vv > 1/2 on the patch); bracket then Newton
        // with bisection safeguard.
        let f_lo = self.h.partial(0, 1, u, lo);
        let f_hi = self.h.partial(0, 1, u, hi);
        if f_lo > 0.0 || f_hi < 0.0 {
            return Err(Error::NonConvergence(u, 0));
        }
        for iter in 0..50 {
            let f = self.h.partial(0, 1, u, v);
            if f.abs() <= 1e-13 {
                return Ok(v);
            }
            if f > 0.0 {
                hi = v;
            } else {
                lo = v;
            }
            let df = self.h.partial(0, 2, u, v);
            let mut next = v - f / df;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            v = next;
            if iter == 49 {
                return Err(Error::NonConvergence(u, 50));
            }
        }
        unreachable!()
    }

    /// k-th derivative of psi, k <= 4. First order comes from implicit
    /// differentiation; higher orders from Richardson-extrapolated central
    /// differences of the order below.
    pub fn deriv(&self, k: u32, u: f64) -> Result<f64> {
        match k {
            0 => self.eval(u),
            1 => {
                let v = self.eval(u)?;
                Ok(-self.h.partial(1, 1, u, v) / self.h.partial(0, 2, u, v))
            }
            2..=4 => {
                let h = 1e-3 * self.eps.max(1e-3);
                let d = |step: f64| -> Result<f64> {
                    Ok((self.deriv(k - 1, u + step)? - self.deriv(k - 1, u - step)?) / (2.0 * step))
                };
                let d1 = d(h)?;
                let d2 = d(h / 2.0)?;
                Ok((4.0 * d2 - d1) / 3.0)
            }
            _ => panic!("psi derivatives through order 4 only"),
        }
    }
}

/// Solve `h_v(u, .) = 0` on a normalized patch.
pub fn psi_curve(patch: &SurfacePatch) -> Result<PsiCurve> {
    assert!(patch.normalized, "psi_curve requires a normalized patch");
    let curve = PsiCurve {
        h: patch.h.clone(),
        eps: patch.domain_radius,
    };
    // probe a few abscissae so failures surface early
    for &u in &[-patch.domain_radius / 2.0, 0.0, patch.domain_radius / 2.0] {
        curve.eval(u)?;
    }
    Ok(curve)
}

/// The expansion data `h(u,v) = a(u,v) (v - psi(u))^2 + b(u)`.
pub struct NormalFormData {
    pub a: ScalarField2,
    pub b: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

pub fn normal_form_data(patch: &SurfacePatch) -> Result<NormalFormData> {
    assert!(patch.normalized, "normal_form_data requires a normalized patch");
    let psi = Arc::new(psi_curve(patch)?);
    let h = patch.h.clone();
    let b = {
        let psi = Arc::clone(&psi);
        let h = h.clone();
        Arc::new(move |u: f64| {
            let p = psi.eval(u).expect("psi solvable on patch");
            h.eval(u, p)
        }) as Arc<dyn Fn(f64) -> f64 + Send + Sync>
    };
    let a = {
        let psi = Arc::clone(&psi);
        let h = h.clone();
        let b = Arc::clone(&b);
        ScalarField2::func(
            move |u, v| {
                let p = psi.eval(u).expect("psi solvable on patch");
                let d = v - p;
                if d.abs() < 1e-6 {
                    // Taylor limit; never raw division near the curve.
                    h.partial(0, 2, u, p) / 2.0
                        + h.partial(0, 3, u, p) / 6.0 * d
                        + h.partial(0, 4, u, p) / 24.0 * d * d
                } else {
                    (h.eval(u, v) - b(u)) / (d * d)
                }
            },
            1e-4,
        )
    };
    Ok(NormalFormData { a, b })
}

/// Trace every connected component of `{J = 0}` meeting the domain interior.
pub fn trace_zero_curvature(patch: &SurfacePatch) -> Result<Vec<CurveTrace>> {
    trace_zero_curvature_tol(patch, &Tolerances::default())
}

pub fn trace_zero_curvature_tol(
    patch: &SurfacePatch,
    tol: &Tolerances,
) -> Result<Vec<CurveTrace>> {
    let eps = patch.domain_radius;
    let n = 200usize;
    let step = eps / 200.0;
    let cell = 2.0 * eps / n as f64;

    // Seeds from sign changes of J on the scan grid.
    let mut seeds: Vec<(f64, f64)> = Vec::new();
    let val = |i: usize, j: usize| -> f64 {
        let u = -eps + cell * i as f64;
        let v = -eps + cell * j as f64;
        patch.hessian_det(u, v)
    };
    for i in 0..n {
        for j in 0..n {
            let u = -eps + cell * i as f64;
            let v = -eps + cell * j as f64;
            if u * u + v * v > eps * eps {
                continue;
            }
            let f00 = val(i, j);
            for (f1, p1) in [(val(i + 1, j), (u + cell, v)), (val(i, j + 1), (u, v + cell))] {
                if f00 == 0.0 {
                    seeds.push((u, v));
                } else if f00 * f1 < 0.0 {
                    let t = f00 / (f00 - f1);
                    seeds.push((u + t * (p1.0 - u), v + t * (p1.1 - v)));
                }
            }
        }
    }

    let mut traces: Vec<CurveTrace> = Vec::new();
    'seed: for seed in seeds {
        for tr in &traces {
            if tr
                .points
                .iter()
                .any(|&(pu, pv)| (pu - seed.0).hypot(pv - seed.1) < 3.0 * step)
            {
                continue 'seed;
            }
        }
        let start = match newton_project(patch, seed, tol)? {
            Some(p) => p,
            None => continue,
        };
        let trace = trace_component(patch, start, step, eps, tol)?;
        if trace.points.len() >= 3 {
            traces.push(trace);
        }
    }
    Ok(traces)
}

/// Project a point onto `{J = 0}` along grad J. Errors if the implicit
/// function theorem fails numerically on the curve.
fn newton_project(
    patch: &SurfacePatch,
    p: (f64, f64),
    tol: &Tolerances,
) -> Result<Option<(f64, f64)>> {
    let mut q = p;
    for _ in 0..30 {
        let j = patch.hessian_det(q.0, q.1);
        let (gx, gy) = patch.hessian_det_grad(q.0, q.1);
        let g2 = gx * gx + gy * gy;
        if g2.sqrt() < tol.trace_tol {
            if j.abs() <= tol.trace_tol {
                return Err(Error::DegenerateCurve(q.0, q.1));
            }
            return Ok(None);
        }
        if j.abs() <= tol.trace_tol {
            return Ok(Some(q));
        }
        q = (q.0 - j * gx / g2, q.1 - j * gy / g2);
    }
    Ok(None)
}

fn trace_component(
    patch: &SurfacePatch,
    start: (f64, f64),
    step: f64,
    eps: f64,
    tol: &Tolerances,
) -> Result<CurveTrace> {
    let march = |dir_sign: f64| -> Result<(Vec<(f64, f64)>, bool)> {
        let mut pts = vec![start];
        let mut prev_t: Option<(f64, f64)> = None;
        let mut closed = false;
        for k in 0..20_000usize {
            let p = *pts.last().unwrap();
            let (gx, gy) = patch.hessian_det_grad(p.0, p.1);
            let g = gx.hypot(gy);
            if g < tol.trace_tol {
                return Err(Error::DegenerateCurve(p.0, p.1));
            }
            let mut t = (-gy / g, gx / g);
            if let Some(pt) = prev_t {
                if pt.0 * t.0 + pt.1 * t.1 < 0.0 {
                    t = (-t.0, -t.1);
                }
            } else {
                t = (dir_sign * t.0, dir_sign * t.1);
            }
            prev_t = Some(t);
            let pred = (p.0 + step * t.0, p.1 + step * t.1);
            let corrected = match newton_project(patch, pred, tol)? {
                Some(c) => c,
                None => break,
            };
            if corrected.0 * corrected.0 + corrected.1 * corrected.1 > eps * eps {
                break;
            }
            if k > 10 && (corrected.0 - start.0).hypot(corrected.1 - start.1) < 0.75 * step {
                closed = true;
                break;
            }
            pts.push(corrected);
        }
        Ok((pts, closed))
    };

    let (fwd, closed_f) = march(1.0)?;
    if closed_f {
        return finish_trace(patch, fwd, TraceClosure::Closed, tol);
    }
    let (bwd, _) = march(-1.0)?;
    let mut pts: Vec<(f64, f64)> = bwd.into_iter().skip(1).rev().collect();
    pts.extend(fwd);
    finish_trace(patch, pts, TraceClosure::HitsBoundary, tol)
}

fn finish_trace(
    patch: &SurfacePatch,
    points: Vec<(f64, f64)>,
    closure: TraceClosure,
    _tol: &Tolerances,
) -> Result<CurveTrace> {
    let tangent = points
        .iter()
        .map(|&(u, v)| {
            let (gx, gy) = patch.hessian_det_grad(u, v);
            let g = gx.hypot(gy).max(1e-300);
            (-gy / g, gx / g)
        })
        .collect();
    Ok(CurveTrace {
        points,
        tangent,
        closure,
    })
}

/// Surface normal at a traced zero-curvature point; sampling the measure
/// transform along multiples of this direction exhibits worst-case decay.
pub fn critical_direction(patch: &SurfacePatch, gamma_point: (f64, f64)) -> Result<[f64; 3]> {
    patch.check_domain(gamma_point)?;
    let hess = patch.hessian(gamma_point);
    let frob =
        (hess[0][0] * hess[0][0] + 2.0 * hess[0][1] * hess[0][1] + hess[1][1] * hess[1][1]).sqrt();
    let j = patch.hessian_det(gamma_point.0, gamma_point.1);
    if j.abs() > 1e-6 * (1.0 + frob * frob) {
        return Err(Error::OutsideDomain(gamma_point.0, gamma_point.1, 0.0));
    }
    patch.gauss_map(gamma_point)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn patch(name: &str) -> SurfacePatch {
        catalog::builtin(name).unwrap()
    }

    #[test]
    fn gauss_map_examples() {
        let p = patch("paraboloid");
        let n = p.gauss_map((0.0, 0.0)).unwrap();
        assert!((n[0], n[1], n[2]) == (0.0, 0.0, 1.0) || n[2] == 1.0);

        let f = patch("fold-cubic");
        let n = f.gauss_map((0.0, 0.0)).unwrap();
        assert_eq!(n, [0.0, 0.0, 1.0]);

        // enlarged copy so (1/2, 0) is inside the domain
        let big = SurfacePatch::new(p.h.clone(), 1.0);
        let n = big.gauss_map((0.5, 0.0)).unwrap();
        // h_u = 1, h_v = 0 at (1/2, 0)
        let s = 2.0f64.sqrt();
        assert!((n[0] + 1.0 / s).abs() < 1e-14);
        assert!(n[1].abs() < 1e-14);
        assert!((n[2] - 1.0 / s).abs() < 1e-14);
        let norm = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        assert!((norm - 1.0).abs() < 1e-14);
    }

    #[test]
    fn gauss_map_domain_error() {
        let p = patch("paraboloid");
        assert!(p.gauss_map((0.5, 0.0)).is_err());
    }

    #[test]
    fn curvature_examples() {
        let p = patch("paraboloid");
        assert!((p.gauss_curvature((0.0, 0.0)).unwrap() - 4.0).abs() < 1e-14);

        let f = patch("fold-cubic");
        assert_eq!(f.gauss_curvature((0.0, 0.0)).unwrap(), 0.0);
        for &u in &[0.01, -0.03, 0.07] {
            let k = f.gauss_curvature((u, 0.0)).unwrap();
            let want = 12.0 * u / (1.0 + 9.0 * u.powi(4)).powi(2);
            assert!((k - want).abs() < 1e-12 * (1.0 + want.abs()));
        }
    }

    #[test]
    fn classify_catalog_ground_truth() {
        let cases = [
            ("paraboloid", SingularityKind::Regular),
            ("fold-cubic", SingularityKind::Fold),
            ("cusp-standard", SingularityKind::Cusp),
            ("quartic-normal", SingularityKind::Degenerate),
            ("monkey-saddle", SingularityKind::Degenerate),
            ("perturbed-fold", SingularityKind::Fold),
        ];
        for (name, want) in cases {
            let rep = classify_point(&patch(name), (0.0, 0.0)).unwrap();
            assert_eq!(rep.kind, want, "{name}: {:?}", rep);
            assert_eq!(rep.in_class_c, want != SingularityKind::Degenerate);
        }
    }

    #[test]
    fn classify_witnesses_closed_form() {
        let rep = classify_point(&patch("fold-cubic"), (0.0, 0.0)).unwrap();
        assert!((rep.witnesses["h_uuu"].abs() - 6.0).abs() < 1e-6, "{rep:?}");

        // Witnesses are reported in normalized coordinates: for v^2 + u^2 v
        // the normalization scales v by 1/sqrt(2), so h_uuv = sqrt(2) and the
        // discriminant h_uuuu - 3 h_uuv^2 = -6.
        let rep = classify_point(&patch("cusp-standard"), (0.0, 0.0)).unwrap();
        assert!(
            (rep.witnesses["h_uuv"].abs() - std::f64::consts::SQRT_2).abs() < 1e-6,
            "{rep:?}"
        );
        assert!(
            (rep.witnesses["cusp_discriminant"] + 6.0).abs() < 1e-5,
            "{rep:?}"
        );
    }

    #[test]
    fn normalize_rescales_hessian() {
        let (norm, _) = normalize_at(&patch("fold-cubic"), (0.0, 0.0)).unwrap();
        assert!(norm.h.eval(0.0, 0.0).abs() < 1e-12);
        let (gu, gv) = norm.h.grad(0.0, 0.0);
        assert!(gu.abs() < 1e-10 && gv.abs() < 1e-10);
        let hess = norm.hessian((0.0, 0.0));
        assert!(hess[0][0].abs() < 1e-8);
        assert!(hess[0][1].abs() < 1e-8);
        assert!((hess[1][1] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn normalize_sheared_fold_matches_standard() {
        // h(u,v) = (u+v)^2 + u^3 classifies like v^2 + u^3
        let h = ScalarField2::poly([(2, 0, 1.0), (1, 1, 2.0), (0, 2, 1.0), (3, 0, 1.0)]);
        let p = SurfacePatch::new(h, 0.1);
        let rep = classify_point(&p, (0.0, 0.0)).unwrap();
        assert_eq!(rep.kind, SingularityKind::Fold);
    }

    #[test]
    fn normalize_regular_point_errors() {
        match normalize_at(&patch("paraboloid"), (0.0, 0.0)) {
            Err(Error::RegularPoint) => {}
            other => panic!("expected RegularPoint, got {other:?}"),
        }
    }

    #[test]
    fn psi_examples() {
        let (norm, _) = normalize_at(&patch("fold-cubic"), (0.0, 0.0)).unwrap();
        let psi = psi_curve(&norm).unwrap();
        for &u in &[-0.02, 0.0, 0.02] {
            assert!(psi.eval(u).unwrap().abs() < 1e-12);
        }
        assert!(psi.deriv(1, 0.0).unwrap().abs() < 1e-8);

        // h = v^2 + u^2 v has h_v = 2v + u^2, psi = -u^2/2 before rescaling.
        let p = SurfacePatch {
            h: ScalarField2::poly([(0, 2, 1.0), (2, 1, 1.0)]),
            domain_radius: 0.1,
            normalized: true,
            base_point: (0.0, 0.0),
        };
        let psi = psi_curve(&p).unwrap();
        for &u in &[-0.05, 0.02, 0.08] {
            assert!((psi.eval(u).unwrap() + u * u / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn psi_matches_bisection_oracle() {
        // v^2 + u^3 + v^3 on a normalized-scale patch
        let p = SurfacePatch {
            h: ScalarField2::poly([(0, 2, 1.0), (3, 0, 1.0), (0, 3, 1.0)]),
            domain_radius: 0.1,
            normalized: true,
            base_point: (0.0, 0.0),
        };
        let psi = psi_curve(&p).unwrap();
        for &u in &[-0.05, 0.0, 0.05] {
            // independent bisection on h_v(u, .)
            let hv = |v: f64| 2.0 * v + 3.0 * v * v;
            let (mut lo, mut hi) = (-0.2, 0.2);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if hv(mid) > 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            assert!((psi.eval(u).unwrap() - 0.5 * (lo + hi)).abs() < 1e-10);
        }
    }

    #[test]
    fn normal_form_examples_and_residual() {
        let p = SurfacePatch {
            h: ScalarField2::poly([(0, 2, 1.0), (3, 0, 1.0), (1, 2, 1.0)]),
            domain_radius: 0.1,
            normalized: true,
            base_point: (0.0, 0.0),
        };
        let nf = normal_form_data(&p).unwrap();
        // a(u,v) = 1 + u, b(u) = u^3
        assert!((nf.a.eval(0.0, 0.0) - 1.0).abs() < 1e-8);
        assert!((nf.a.eval(0.05, 0.02) - 1.05).abs() < 1e-7);
        assert!(((nf.b)(0.04) - 0.04f64.powi(3)).abs() < 1e-12);

        // identity h = a (v - psi)^2 + b on a grid
        let psi = psi_curve(&p).unwrap();
        let mut worst: f64 = 0.0;
        for i in 0..50 {
            for j in 0..50 {
                let u = -0.09 + 0.18 * i as f64 / 49.0;
                let v = -0.09 + 0.18 * j as f64 / 49.0;
                let ps = psi.eval(u).unwrap();
                let r = p.h.eval(u, v) - nf.a.eval(u, v) * (v - ps) * (v - ps) - (nf.b)(u);
                worst = worst.max(r.abs());
            }
        }
        assert!(worst <= 1e-10, "normal form residual {worst:e}");
    }

    #[test]
    fn trace_fold_cubic_axis() {
        let traces = trace_zero_curvature(&patch("fold-cubic")).unwrap();
        assert_eq!(traces.len(), 1);
        for &(u, _v) in &traces[0].points {
            assert!(u.abs() < 1e-8);
        }
        assert_eq!(traces[0].closure, TraceClosure::HitsBoundary);
    }

    #[test]
    fn trace_paraboloid_empty() {
        let traces = trace_zero_curvature(&patch("paraboloid")).unwrap();
        assert!(traces.is_empty());
    }

    #[test]
    fn trace_cusp_matches_grid_scan() {
        let p = patch("cusp-standard");
        let traces = trace_zero_curvature(&p).unwrap();
        assert!(!traces.is_empty());
        // oracle: brute-force sign-change scan of J on a fine grid
        // J = 4v - 4u^2 for h = v^2 + u^2 v, so the curve is v = u^2
        for tr in &traces {
            for &(u, v) in &tr.points {
                assert!((v - u * u).abs() < 1e-6, "({u}, {v}) off v=u^2");
            }
        }
    }

    #[test]
    fn trace_point_tolerance() {
        let p = patch("cusp-standard");
        let traces = trace_zero_curvature(&p).unwrap();
        for tr in &traces {
            for &(u, v) in &tr.points {
                assert!(p.hessian_det(u, v).abs() <= 1e-8);
            }
        }
    }

    #[test]
    fn critical_direction_examples() {
        let f = patch("fold-cubic");
        assert_eq!(critical_direction(&f, (0.0, 0.0)).unwrap(), [0.0, 0.0, 1.0]);
        let n = critical_direction(&f, (0.0, 0.05)).unwrap();
        assert!(n[1].abs() > 0.0);
        let c = patch("cusp-standard");
        assert_eq!(critical_direction(&c, (0.0, 0.0)).unwrap(), [0.0, 0.0, 1.0]);
        // off-curve point refused
        assert!(critical_direction(&f, (0.05, 0.0)).is_err());
    }

    #[test]
    fn curvature_classification_consistency() {
        let tol = Tolerances::default();
        for name in catalog::BUILTIN_NAMES {
            let p = patch(name);
            let mut rng = 0x9e3779b97f4a7c15u64;
            for _ in 0..500 {
                rng = rng.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let a = ((rng >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0;
                rng = rng.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let b = ((rng >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0;
                let pt = (a * p.domain_radius * 0.7, b * p.domain_radius * 0.7);
                if !p.contains(pt) {
                    continue;
                }
                let k = p.gauss_curvature(pt).unwrap();
                let ctol = p.curvature_tol(pt, &tol);
                let rep = classify_point(&p, pt).unwrap();
                assert_eq!(
                    rep.kind == SingularityKind::Regular,
                    k.abs() > ctol,
                    "{name} at {pt:?}"
                );
            }
        }
    }
}
