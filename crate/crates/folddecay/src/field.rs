//! Bivariate scalar fields with partial derivatives through fifth order.
//!
//! Two representations are supported: sparse polynomials, whose partials are
//! exact, and opaque closures differentiated by Richardson-extrapolated
//! central differences. Graph functions `h`, densities, and amplitudes are
//! all carried as [`ScalarField2`].

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

/// How a field provides its partial derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DerivativeSource {
    Analytic,
    FiniteDifference { step: f64 },
}

/// Sparse bivariate polynomial `sum c_ij u^i v^j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly2 {
    terms: Vec<(u32, u32, f64)>,
}

impl Poly2 {
    pub fn new(terms: impl IntoIterator<Item = (u32, u32, f64)>) -> Self {
        let mut map: HashMap<(u32, u32), f64> = HashMap::new();
        for (i, j, c) in terms {
            *map.entry((i, j)).or_insert(0.0) += c;
        }
        let mut terms: Vec<_> = map
            .into_iter()
            .filter(|&(_, c)| c != 0.0)
            .map(|((i, j), c)| (i, j, c))
            .collect();
        terms.sort_by_key(|&(i, j, _)| (i, j));
        Poly2 { terms }
    }

    pub fn zero() -> Self {
        Poly2 { terms: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Poly2::new([(0, 0, c)])
    }

    pub fn terms(&self) -> &[(u32, u32, f64)] {
        &self.terms
    }

    pub fn eval(&self, u: f64, v: f64) -> f64 {
        let mut acc = 0.0;
        for &(i, j, c) in &self.terms {
            acc += c * u.powi(i as i32) * v.powi(j as i32);
        }
        acc
    }

    /// Exact partial derivative `d^(i+j) / du^i dv^j`.
    pub fn partial_poly(&self, i: u32, j: u32) -> Poly2 {
        let mut out = Vec::new();
        for &(a, b, c) in &self.terms {
            if a < i || b < j {
                continue;
            }
            let mut coeff = c;
            for k in 0..i {
                coeff *= (a - k) as f64;
            }
            for k in 0..j {
                coeff *= (b - k) as f64;
            }
            out.push((a - i, b - j, coeff));
        }
        Poly2::new(out)
    }

    pub fn mul(&self, other: &Poly2) -> Poly2 {
        let mut out = Vec::new();
        for &(a, b, c) in &self.terms {
            for &(i, j, d) in &other.terms {
                out.push((a + i, b + j, c * d));
            }
        }
        Poly2::new(out)
    }

    pub fn add(&self, other: &Poly2) -> Poly2 {
        let mut out = self.terms.clone();
        out.extend(other.terms.iter().copied());
        Poly2::new(out)
    }

    pub fn scale(&self, s: f64) -> Poly2 {
        Poly2::new(self.terms.iter().map(|&(i, j, c)| (i, j, c * s)))
    }

    fn pow(&self, n: u32) -> Poly2 {
        let mut acc = Poly2::constant(1.0);
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    /// Substitute `u = a00 u' + a01 v' + t0`, `v = a10 u' + a11 v' + t1`.
    /// Exact: the result is again a polynomial.
    pub fn affine(&self, a: [[f64; 2]; 2], t: [f64; 2]) -> Poly2 {
        let new_u = Poly2::new([(1, 0, a[0][0]), (0, 1, a[0][1]), (0, 0, t[0])]);
        let new_v = Poly2::new([(1, 0, a[1][0]), (0, 1, a[1][1]), (0, 0, t[1])]);
        let mut acc = Poly2::zero();
        for &(i, j, c) in &self.terms {
            acc = acc.add(&new_u.pow(i).mul(&new_v.pow(j)).scale(c));
        }
        acc
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|&(i, j, _)| i + j).max().unwrap_or(0)
    }
}

type FieldFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Evaluable bivariate function with partials through order 5 in each variable.
#[derive(Clone)]
pub enum ScalarField2 {
    Poly(Poly2),
    Func { f: FieldFn, step: f64 },
}

impl fmt::Debug for ScalarField2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarField2::Poly(p) => write!(f, "ScalarField2::Poly({:?})", p),
            ScalarField2::Func { step, .. } => {
                write!(f, "ScalarField2::Func {{ step: {} }}", step)
            }
        }
    }
}

/// Central-difference stencils for derivative orders 0..=5, offsets paired
/// with weights; weights are divided by h^order at use.
fn stencil(order: u32) -> &'static [(i32, f64)] {
    match order {
        0 => &[(0, 1.0)],
        1 => &[(-1, -0.5), (1, 0.5)],
        2 => &[(-1, 1.0), (0, -2.0), (1, 1.0)],
        3 => &[(-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)],
        4 => &[(-2, 1.0), (-1, -4.0), (0, 6.0), (1, -4.0), (2, 1.0)],
        5 => &[
            (-3, -0.5),
            (-2, 2.0),
            (-1, -2.5),
            (1, 2.5),
            (2, -2.0),
            (3, 0.5),
        ],
        _ => panic!("derivative order > 5 unsupported"),
    }
}

impl ScalarField2 {
    pub fn poly(terms: impl IntoIterator<Item = (u32, u32, f64)>) -> Self {
        ScalarField2::Poly(Poly2::new(terms))
    }

    pub fn func(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static, step: f64) -> Self {
        ScalarField2::Func {
            f: Arc::new(f),
            step,
        }
    }

    pub fn derivative_source(&self) -> DerivativeSource {
        match self {
            ScalarField2::Poly(_) => DerivativeSource::Analytic,
            ScalarField2::Func { step, .. } => DerivativeSource::FiniteDifference { step: *step },
        }
    }

    pub fn eval(&self, u: f64, v: f64) -> f64 {
        match self {
            ScalarField2::Poly(p) => p.eval(u, v),
            ScalarField2::Func { f, .. } => f(u, v),
        }
    }

    /// Partial derivative of order `i` in `u` and `j` in `v` at `(u, v)`.
    pub fn partial(&self, i: u32, j: u32, u: f64, v: f64) -> f64 {
        assert!(i <= 5 && j <= 5, "orders through 5 only");
        match self {
            ScalarField2::Poly(p) => p.partial_poly(i, j).eval(u, v),
            ScalarField2::Func { f, step } => {
                if i == 0 && j == 0 {
                    return f(u, v);
                }
                let h = fd_step(*step, i + j);
                let d_h = fd_tensor(f, i, j, u, v, h);
                let d_h2 = fd_tensor(f, i, j, u, v, h / 2.0);
                // Richardson: leading error is O(h^2) for central stencils.
                (4.0 * d_h2 - d_h) / 3.0
            }
        }
    }

    /// Precompute the `(i, j)` partial derivative as a field of its own.
    /// For polynomials this derives the coefficient list once instead of on
    /// every evaluation; for closures it wraps the finite-difference stencil.
    pub fn partial_field(&self, i: u32, j: u32) -> ScalarField2 {
        match self {
            ScalarField2::Poly(p) => ScalarField2::Poly(p.partial_poly(i, j)),
            ScalarField2::Func { f, step } => {
                let base = ScalarField2::Func {
                    f: Arc::clone(f),
                    step: *step,
                };
                let s = *step;
                ScalarField2::func(move |u, v| base.partial(i, j, u, v), s)
            }
        }
    }

    /// Affine change of coordinates; exact for polynomials, composed for closures.
    pub fn affine(&self, a: [[f64; 2]; 2], t: [f64; 2]) -> ScalarField2 {
        match self {
            ScalarField2::Poly(p) => ScalarField2::Poly(p.affine(a, t)),
            ScalarField2::Func { f, step } => {
                let f = Arc::clone(f);
                ScalarField2::Func {
                    f: Arc::new(move |u, v| {
                        f(
                            a[0][0] * u + a[0][1] * v + t[0],
                            a[1][0] * u + a[1][1] * v + t[1],
                        )
                    }),
                    step: *step,
                }
            }
        }
    }

    pub fn scaled(&self, s: f64) -> ScalarField2 {
        match self {
            ScalarField2::Poly(p) => ScalarField2::Poly(p.scale(s)),
            ScalarField2::Func { f, step } => {
                let f = Arc::clone(f);
                ScalarField2::Func {
                    f: Arc::new(move |u, v| s * f(u, v)),
                    step: *step,
                }
            }
        }
    }

    /// Gradient `(h_u, h_v)`.
    pub fn grad(&self, u: f64, v: f64) -> (f64, f64) {
        (self.partial(1, 0, u, v), self.partial(0, 1, u, v))
    }

    /// Subtract the affine function `c + gu*u + gv*v`.
    pub fn sub_linear(&self, c: f64, gu: f64, gv: f64) -> ScalarField2 {
        match self {
            ScalarField2::Poly(p) => ScalarField2::Poly(p.add(&Poly2::new([
                (0, 0, -c),
                (1, 0, -gu),
                (0, 1, -gv),
            ]))),
            ScalarField2::Func { f, step } => {
                let f = Arc::clone(f);
                ScalarField2::Func {
                    f: Arc::new(move |u, v| f(u, v) - c - gu * u - gv * v),
                    step: *step,
                }
            }
        }
    }

    /// Pointwise negation.
    pub fn negated(&self) -> ScalarField2 {
        self.scaled(-1.0)
    }
}

/// Step size grows with derivative order to keep roundoff noise below
/// truncation error.
fn fd_step(base: f64, order: u32) -> f64 {
    let grown = base * 10f64.powi(order as i32 - 1);
    grown.clamp(base, 0.02)
}

fn fd_tensor(f: &FieldFn, i: u32, j: u32, u: f64, v: f64, h: f64) -> f64 {
    let su = stencil(i);
    let sv = stencil(j);
    let mut acc = 0.0;
    for &(au, wu) in su {
        for &(av, wv) in sv {
            acc += wu * wv * f(u + au as f64 * h, v + av as f64 * h);
        }
    }
    acc / h.powi((i + j) as i32)
}

/// Smooth radial bump supported in `|r| < radius`, value 1 at the center.
/// All derivatives vanish at the support boundary.
pub fn radial_bump(radius: f64) -> ScalarField2 {
    ScalarField2::func(
        move |u, v| {
            let s = (u * u + v * v) / (radius * radius);
            if s >= 1.0 {
                0.0
            } else {
                (1.0 - 1.0 / (1.0 - s)).exp()
            }
        },
        1e-4,
    )
}

/// Smooth 1D bump profile on `(lo, hi)`, used to build annular cutoffs.
pub fn bump_profile(x: f64, lo: f64, hi: f64) -> f64 {
    if x <= lo || x >= hi {
        return 0.0;
    }
    let s = (2.0 * x - lo - hi) / (hi - lo); // in (-1, 1)
    (1.0 - 1.0 / (1.0 - s * s)).exp()
}

/// Smooth transition equal to 0 for `x <= 0` and 1 for `x >= 1`.
pub fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / x).exp();
        let b = (-1.0 / (1.0 - x)).exp();
        a / (a + b)
    }
}
