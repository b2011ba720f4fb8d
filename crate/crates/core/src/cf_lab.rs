//! The characteristic-function side of the characterization results.
//!
//! Everything here works with real, even characteristic functions `f`:
//!
//! * the identical-distribution equation `f(t) = f(t/2)^2 (f(t) + 1) / 2`,
//!   its residual and the operator `(A f)(t) = f(t/2)^2 (f(t) + 1) / 2` on a
//!   dyadic grid;
//! * a constructive solver that seeds `f` near zero and doubles outward;
//! * the joint and marginal characteristic functions of the random-coefficient
//!   linear forms `L1 = (X1 + X2)/2 + eps X3`, `L2 = (X1 - X2)/2 + (1 - eps) X3`
//!   and the residuals measuring their failure to factor;
//! * a zero check on grid functions.

use crate::error::{Error, Result};
use crate::sech::CharFn;

/// Largest grid depth a [`DyadicGridFn`] may be built with (2^24 + 1 values).
pub const MAX_GRID_DEPTH: u32 = 24;

/// Output resolution of [`solve_doubling`]; the solver depth only moves the seed.
pub const SOLVER_GRID_DEPTH: u32 = 12;

/// The solver stops when `f(t/2)^2` reaches `2 - DIVERGENCE_MARGIN`.
pub const DIVERGENCE_MARGIN: f64 = 1e-9;

/// Values of a function on `t_k = k T / 2^d`, `k = 0..=2^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct DyadicGridFn {
    t_max: f64,
    depth: u32,
    values: Vec<f64>,
}

impl DyadicGridFn {
    pub fn new(t_max: f64, depth: u32, values: Vec<f64>) -> Result<Self> {
        check_grid(t_max, depth)?;
        let expected = (1usize << depth) + 1;
        if values.len() != expected {
            return Err(Error::invalid(
                "values",
                format!(
                    "expected {expected} values for depth {depth}, got {}",
                    values.len()
                ),
            ));
        }
        Ok(DyadicGridFn {
            t_max,
            depth,
            values,
        })
    }

    pub fn from_fn(t_max: f64, depth: u32, f: impl Fn(f64) -> f64) -> Result<Self> {
        check_grid(t_max, depth)?;
        let h = libm::ldexp(t_max, -(depth as i32));
        let values = (0..=(1usize << depth)).map(|k| f(k as f64 * h)).collect();
        Ok(DyadicGridFn {
            t_max,
            depth,
            values,
        })
    }

    pub fn from_char_fn<F: CharFn + ?Sized>(f: &F, t_max: f64, depth: u32) -> Result<Self> {
        Self::from_fn(t_max, depth, |t| f.eval(t))
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn step(&self) -> f64 {
        libm::ldexp(self.t_max, -(self.depth as i32))
    }

    pub fn t(&self, k: usize) -> f64 {
        k as f64 * self.step()
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let h = self.step();
        self.values
            .iter()
            .enumerate()
            .map(move |(k, &v)| (k as f64 * h, v))
    }

    /// `f(t_k / 2)`: exact grid value for even `k`, cubic interpolation from
    /// the four surrounding points for odd `k` (negative indices reflect, as
    /// the function is even).
    pub fn at_half(&self, k: usize) -> f64 {
        if k.is_multiple_of(2) {
            return self.values[k / 2];
        }
        let j = (k - 1) / 2;
        let left = if j == 0 {
            self.values[1]
        } else {
            self.values[j - 1]
        };
        let v = &self.values;
        (9.0 * (v[j] + v[j + 1]) - (left + v[j + 2])) / 16.0
    }

    pub fn sup_distance(&self, other: &DyadicGridFn) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn sup_distance_to(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.points()
            .map(|(t, v)| (v - f(t)).abs())
            .fold(0.0, f64::max)
    }
}

fn check_grid(t_max: f64, depth: u32) -> Result<()> {
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::invalid(
            "t_max",
            format!("must be positive, got {t_max}"),
        ));
    }
    if !(2..=MAX_GRID_DEPTH).contains(&depth) {
        return Err(Error::invalid(
            "depth",
            format!("grid depth must lie in 2..={MAX_GRID_DEPTH}, got {depth}"),
        ));
    }
    Ok(())
}

/// `f(t) - f(t/2)^2 (f(t) + 1) / 2`.
pub fn residual_polya<F: CharFn + ?Sized>(f: &F, t: f64) -> f64 {
    let ft = f.eval(t);
    let fh = f.eval(0.5 * t);
    ft - fh * fh * (ft + 1.0) / 2.0
}

/// `(A f)(t_k) = f(t_k / 2)^2 (f(t_k) + 1) / 2` on the same grid.
pub fn apply_a(f: &DyadicGridFn) -> DyadicGridFn {
    let values = (0..f.len())
        .map(|k| {
            let h = f.at_half(k);
            h * h * (f.values[k] + 1.0) / 2.0
        })
        .collect();
    DyadicGridFn {
        t_max: f.t_max,
        depth: f.depth,
        values,
    }
}

/// Applies `A` repeatedly, recording the sup distance to `target` after each
/// application. Exploration only: nothing is claimed about convergence.
pub fn iterate_a(
    f: &DyadicGridFn,
    iterations: usize,
    target: impl Fn(f64) -> f64,
) -> (DyadicGridFn, Vec<f64>) {
    let mut cur = f.clone();
    let mut distances = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        cur = apply_a(&cur);
        distances.push(cur.sup_distance_to(&target));
    }
    (cur, distances)
}

/// Constructive solution of the identical-distribution equation.
///
/// Solving the equation for `f(t)` gives `f(t) = g / (2 - g)` with
/// `g = f(t/2)^2`. The solver seeds `f(s) = 1 - c s^2 / 2` at a point `s` no
/// larger than `t_max / 2^depth` (with `c = sigma^2`) and applies the doubling
/// map until it reaches `t`. The map is carried on `u = 1 - f`, where it reads
/// `v = u (2 - u)`, `u' = 2 v / (1 + v)`, so the tiny deficits near zero keep
/// full relative precision.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DoublingSolution {
    curvature: f64,
    t_max: f64,
    depth: u32,
}

impl DoublingSolution {
    pub fn new(sigma: f64, t_max: f64, depth: u32) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::invalid(
                "sigma",
                format!("must be positive, got {sigma}"),
            ));
        }
        Self::with_curvature(sigma * sigma, t_max, depth)
    }

    /// Seed curvature `c = -f''(0)` of any sign. A negative curvature does not
    /// come from a characteristic function; it is accepted so that the
    /// divergence guard can be exercised.
    pub fn with_curvature(curvature: f64, t_max: f64, depth: u32) -> Result<Self> {
        if !curvature.is_finite() {
            return Err(Error::invalid("curvature", "must be finite"));
        }
        if !(t_max > 0.0 && t_max.is_finite()) {
            return Err(Error::invalid(
                "t_max",
                format!("must be positive, got {t_max}"),
            ));
        }
        if !(10..=1000).contains(&depth) {
            return Err(Error::invalid(
                "depth",
                format!("solver depth must lie in 10..=1000, got {depth}"),
            ));
        }
        Ok(DoublingSolution {
            curvature,
            t_max,
            depth,
        })
    }

    pub fn seed_point(&self) -> f64 {
        libm::ldexp(self.t_max, -(self.depth as i32))
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        let t = t.abs();
        if t == 0.0 {
            return Ok(1.0);
        }
        let t0 = self.seed_point();
        let mut s = t;
        let mut doublings = 0u32;
        while s > t0 {
            s *= 0.5;
            doublings += 1;
        }
        let mut u = 0.5 * self.curvature * s * s;
        for _ in 0..doublings {
            let v = u * (2.0 - u);
            let g = 1.0 - v;
            s *= 2.0;
            if g.is_nan() || g >= 2.0 - DIVERGENCE_MARGIN {
                return Err(Error::Divergence { t: s, g });
            }
            u = 2.0 * v / (1.0 + v);
        }
        Ok(1.0 - u)
    }

    /// The solution on the dyadic grid of `[0, t_max]` with `2^grid_depth` steps.
    pub fn grid(&self, grid_depth: u32) -> Result<DyadicGridFn> {
        check_grid(self.t_max, grid_depth)?;
        let h = libm::ldexp(self.t_max, -(grid_depth as i32));
        let values = (0..=(1usize << grid_depth))
            .map(|k| self.eval(k as f64 * h))
            .collect::<Result<Vec<_>>>()?;
        Ok(DyadicGridFn {
            t_max: self.t_max,
            depth: grid_depth,
            values,
        })
    }
}

impl CharFn for DoublingSolution {
    fn name(&self) -> String {
        format!(
            "doubling(c={}, t_max={}, depth={})",
            self.curvature, self.t_max, self.depth
        )
    }

    fn eval(&self, t: f64) -> f64 {
        DoublingSolution::eval(self, t).unwrap_or(f64::NAN)
    }
}

/// Solves on `[0, t_max]` with the seed at `t_max / 2^depth`; the returned grid
/// has depth `min(depth, SOLVER_GRID_DEPTH)`.
pub fn solve_doubling(sigma: f64, t_max: f64, depth: u32) -> Result<DyadicGridFn> {
    DoublingSolution::new(sigma, t_max, depth)?.grid(depth.min(SOLVER_GRID_DEPTH))
}

/// Joint characteristic function `E exp(i s L1 + i t L2)`:
/// `f((s+t)/2) f((s-t)/2) (f(s) + f(t)) / 2`.
pub fn joint_cf<F: CharFn + ?Sized>(f: &F, s: f64, t: f64) -> f64 {
    f.eval(0.5 * (s + t)) * f.eval(0.5 * (s - t)) * (f.eval(s) + f.eval(t)) / 2.0
}

/// Common characteristic function of `L1` and `L2`: `f(s/2)^2 (f(s) + 1) / 2`.
pub fn marginal_cf<F: CharFn + ?Sized>(f: &F, s: f64) -> f64 {
    let h = f.eval(0.5 * s);
    h * h * (f.eval(s) + 1.0) / 2.0
}

/// `joint_cf(f, s, t) - marginal_cf(f, s) marginal_cf(f, t)`.
pub fn factorization_residual<F: CharFn + ?Sized>(f: &F, s: f64, t: f64) -> f64 {
    joint_cf(f, s, t) - marginal_cf(f, s) * marginal_cf(f, t)
}

/// `f(s)^2 - marginal_cf(f, s)^2`, the factorization residual on the diagonal.
pub fn diag_residual<F: CharFn + ?Sized>(f: &F, s: f64) -> f64 {
    let fs = f.eval(s);
    let m = marginal_cf(f, s);
    fs * fs - m * m
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZeroFreeReport {
    pub zero_free: bool,
    /// Grid point with `|f| < eps`, or the linearly interpolated crossing of a
    /// sign change, whichever comes first.
    pub first_violation: Option<f64>,
}

pub fn zero_free_check(f: &DyadicGridFn, eps: f64) -> ZeroFreeReport {
    let mut prev: Option<(f64, f64)> = None;
    for (t, v) in f.points() {
        if v.abs() < eps || v.is_nan() {
            return ZeroFreeReport {
                zero_free: false,
                first_violation: Some(t),
            };
        }
        if let Some((pt, pv)) = prev {
            if pv.signum() != v.signum() {
                let root = pt + (t - pt) * pv / (pv - v);
                return ZeroFreeReport {
                    zero_free: false,
                    first_violation: Some(root),
                };
            }
        }
        prev = Some((t, v));
    }
    ZeroFreeReport {
        zero_free: true,
        first_violation: None,
    }
}
