//! The random index `nu_n` whose generating function is `1 / T_n(1/z)`.
//!
//! `T_n` is the Chebyshev polynomial of the first kind. Writing
//! `Q_n(z) = z^n T_n(1/z)`, the generating function is `z^n / Q_n(z)`, and
//! because `T_n` only has powers of the same parity as `n`, `Q_n(z) = R(z^2)`
//! with integer coefficients and `R(0) = 2^(n-1)`. The probabilities are the
//! power-series coefficients of `1 / R(w)`, shifted by `n` and spread over
//! every other integer.
//!
//! The monomial coefficients of `T_n` grow like `(1 + sqrt 2)^n`, so the series
//! inversion recurrence is badly conditioned in double precision (it diverges
//! for `n` around 50). The recurrence is therefore run in fixed point on big
//! integers with `F` fractional bits: division by `R(0)` is a right shift, so
//! every coefficient is exact until its dyadic denominator outgrows `F`, and
//! after that each step truncates by at most one unit in the last place. A
//! shadow lane with `F - 64` bits runs alongside; its distance from the main
//! lane is reported as the rounding diagnostic.

use std::collections::VecDeque;

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;

use crate::error::{Error, Result};

/// Upper bound on stored support points.
pub const MAX_SUPPORT: usize = 10_000_000;

/// Probabilities above `-NEGATIVE_TOLERANCE` are clipped to zero; below it is an error.
pub const NEGATIVE_TOLERANCE: f64 = 1e-14;

const SHADOW_GAP: u32 = 64;
const GUARD_BITS: u32 = 64;

/// `T_n(x)` by the three-term recurrence.
pub fn cheb_t(n: u32, x: f64) -> f64 {
    match n {
        0 => 1.0,
        1 => x,
        _ => {
            let (mut prev, mut cur) = (1.0, x);
            for _ in 1..n {
                let next = 2.0 * x * cur - prev;
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

/// Power-basis coefficients of `T_n`, lowest degree first.
pub fn cheb_coefficients(n: u32) -> Vec<BigInt> {
    let mut prev = vec![BigInt::one()];
    if n == 0 {
        return prev;
    }
    let mut cur = vec![BigInt::zero(), BigInt::one()];
    for _ in 1..n {
        let mut next = vec![BigInt::zero(); cur.len() + 1];
        for (j, c) in cur.iter().enumerate() {
            next[j + 1] += c * 2;
        }
        for (j, c) in prev.iter().enumerate() {
            next[j] -= c;
        }
        prev = cur;
        cur = next;
    }
    cur
}

/// The generating function `1 / T_n(1/z)` on `(0, 1]`.
pub fn pgf_eval(n: u32, z: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("n", "must be at least 1"));
    }
    if !(z > 0.0 && z <= 1.0) {
        return Err(Error::invalid("z", format!("must lie in (0, 1], got {z}")));
    }
    if z == 1.0 {
        return Ok(1.0);
    }
    Ok(1.0 / cheb_t(n, 1.0 / z))
}

/// `E nu_n = T_n'(1) / T_n(1)^2`, in exact rational arithmetic.
pub fn index_mean_exact(n: u32) -> Ratio<BigInt> {
    // values and derivatives at x = 1
    let (mut t_prev, mut t_cur) = (BigInt::one(), BigInt::one());
    let (mut d_prev, mut d_cur) = (BigInt::zero(), BigInt::one());
    if n == 0 {
        return Ratio::zero();
    }
    for _ in 1..n {
        let t_next = &t_cur * 2 - &t_prev;
        let d_next = &t_cur * 2 + &d_cur * 2 - &d_prev;
        t_prev = std::mem::replace(&mut t_cur, t_next);
        d_prev = std::mem::replace(&mut d_cur, d_next);
    }
    Ratio::new(d_cur, &t_cur * &t_cur)
}

/// `E nu_n` as a float; equals `n^2`.
pub fn index_mean(n: u32) -> f64 {
    index_mean_exact(n).to_f64().unwrap_or(f64::NAN)
}

fn fixed_to_f64(v: &BigInt, frac_bits: u32) -> f64 {
    let bits = v.bits();
    if bits <= 1000 {
        libm::ldexp(v.to_f64().unwrap_or(0.0), -(frac_bits as i32))
    } else {
        let drop = bits - 1000;
        let head: BigInt = v >> drop;
        libm::ldexp(head.to_f64().unwrap_or(0.0), drop as i32 - frac_bits as i32)
    }
}

/// One fixed-point run of the inversion recurrence.
#[derive(Clone, Debug)]
struct Lane {
    frac_bits: u32,
    /// Most recent coefficients, newest first, at most `deg` long.
    recent: VecDeque<BigInt>,
    /// Running sum of all emitted coefficients.
    mass: BigInt,
}

impl Lane {
    fn new(frac_bits: u32) -> Self {
        Lane {
            frac_bits,
            recent: VecDeque::new(),
            mass: BigInt::zero(),
        }
    }

    /// `c_0 = 1 / R(0)`, then `c_j = -(sum_i r_i c_(j-i)) / R(0)` with a flooring shift.
    fn advance(&mut self, r: &[BigInt], shift: u32, first: bool) -> BigInt {
        let next = if first {
            BigInt::one() << (self.frac_bits - shift)
        } else {
            let mut acc = BigInt::zero();
            for (ri, prev) in r[1..].iter().zip(self.recent.iter()) {
                acc += ri * prev;
            }
            -acc >> shift
        };
        self.mass += &next;
        self.recent.push_front(next.clone());
        self.recent.truncate(r.len() - 1);
        next
    }
}

#[derive(Clone, Debug)]
struct SeriesInverter {
    /// `r[i]` is the coefficient of `w^i` in `R(w)`; `r[0] = 2^shift`.
    r: Vec<BigInt>,
    shift: u32,
    emitted: usize,
    main: Lane,
    shadow: Lane,
}

impl SeriesInverter {
    fn new(n: u32, extra_bits: u32) -> Self {
        let coeffs = cheb_coefficients(n);
        // coefficient of x^(n - 2i) becomes the coefficient of w^i
        let r: Vec<BigInt> = (0..=n / 2)
            .map(|i| coeffs[(n - 2 * i) as usize].clone())
            .collect();
        let shift = n - 1;
        debug_assert_eq!(r[0], BigInt::one() << shift);
        let coef_bits = r.iter().map(|c| c.bits()).max().unwrap_or(1) as u32;
        let frac_bits = 2 * coef_bits + shift + extra_bits + GUARD_BITS + SHADOW_GAP;
        SeriesInverter {
            r,
            shift,
            emitted: 0,
            main: Lane::new(frac_bits),
            shadow: Lane::new(frac_bits - SHADOW_GAP),
        }
    }

    /// Emits the next coefficient as (value, remaining mass, shadow discrepancy).
    fn step(&mut self) -> (f64, f64, f64) {
        let first = self.emitted == 0;
        let v = self.main.advance(&self.r, self.shift, first);
        let s = self.shadow.advance(&self.r, self.shift, first);
        self.emitted += 1;
        let f = self.main.frac_bits;
        let value = fixed_to_f64(&v, f);
        let tail = (BigInt::one() << f) - &self.main.mass;
        let remaining = fixed_to_f64(&tail, f);
        let gap = (v - (s << SHADOW_GAP)).abs();
        (value, remaining, fixed_to_f64(&gap, f))
    }

    /// True when the main lane has underflowed to zero and can add no more mass.
    fn exhausted(&self) -> bool {
        self.emitted > 0 && self.main.recent.iter().all(|c| c.is_zero())
    }
}

/// The law of `nu_n`, stored over the support points `n, n + 2, n + 4, ...`.
#[derive(Clone, Debug)]
pub struct IndexDistribution {
    n: u32,
    tail_eps: f64,
    cap: usize,
    support: Vec<u64>,
    probs: Vec<f64>,
    cumulative: Vec<f64>,
    tail_bound: f64,
    shadow_discrepancy: f64,
    series: SeriesInverter,
}

impl IndexDistribution {
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn tail_eps(&self) -> f64 {
        self.tail_eps
    }

    pub fn support(&self) -> &[u64] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    /// Mass beyond the last stored support point.
    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    /// Largest distance between the main and the reduced-precision lane, in
    /// probability units. The stored values are about `2^64` times closer.
    pub fn shadow_discrepancy(&self) -> f64 {
        self.shadow_discrepancy
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    /// `P(nu_n = k)`, zero off the stored support.
    pub fn prob(&self, k: u64) -> f64 {
        let n = self.n as u64;
        if k < n || !(k - n).is_multiple_of(2) {
            return 0.0;
        }
        self.probs
            .get(((k - n) / 2) as usize)
            .copied()
            .unwrap_or(0.0)
    }

    /// `sum_k k p_k` over the stored support.
    pub fn mean(&self) -> f64 {
        self.support
            .iter()
            .zip(&self.probs)
            .map(|(&k, &p)| k as f64 * p)
            .sum()
    }

    /// `sum_k p_k z^k` over the stored support.
    pub fn pgf(&self, z: f64) -> f64 {
        let mut zk = z.powi(self.n as i32);
        let z2 = z * z;
        let mut acc = 0.0;
        for &p in &self.probs {
            acc += p * zk;
            zk *= z2;
        }
        acc
    }

    fn push_next(&mut self) -> Result<()> {
        if self.support.len() >= self.cap {
            return Err(self.truncation());
        }
        let (value, remaining, discrepancy) = self.series.step();
        let k = self.n as u64 + 2 * (self.series.emitted as u64 - 1);
        if value < -NEGATIVE_TOLERANCE {
            return Err(Error::NegativeMass {
                n: self.n,
                k,
                value,
            });
        }
        self.support.push(k);
        self.probs.push(value.max(0.0));
        self.cumulative.push(1.0 - remaining);
        self.tail_bound = remaining.max(0.0);
        self.shadow_discrepancy = self.shadow_discrepancy.max(discrepancy);
        Ok(())
    }

    fn truncation(&self) -> Error {
        Error::Truncation {
            n: self.n,
            tail_eps: self.tail_eps,
            terms: self.support.len(),
            mass_reached: 1.0 - self.tail_bound,
        }
    }

    /// Extends the stored support until the remaining mass is at most `eps`.
    pub fn extend_to_tail(&mut self, eps: f64) -> Result<()> {
        while self.is_empty() || self.tail_bound > eps {
            if self.series.exhausted() {
                return Err(self.truncation());
            }
            self.push_next()?;
        }
        Ok(())
    }

    /// Inverse-CDF draw. A uniform that lands in the unstored tail extends the
    /// distribution on demand instead of being folded back into the support.
    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<u64> {
        let u: f64 = rng.random();
        loop {
            let idx = self.cumulative.partition_point(|&c| c <= u);
            if idx < self.cumulative.len() {
                return Ok(self.support[idx]);
            }
            if self.series.exhausted() && self.tail_bound == 0.0 {
                return Ok(*self.support.last().expect("non-empty support"));
            }
            if self.series.exhausted() {
                return Err(self.truncation());
            }
            self.push_next()?;
        }
    }
}

/// Extracts the law of `nu_n` until the stored mass reaches `1 - tail_eps`.
pub fn index_pmf(n: u32, tail_eps: f64) -> Result<IndexDistribution> {
    index_pmf_capped(n, tail_eps, MAX_SUPPORT)
}

/// [`index_pmf`] with an explicit support cap.
pub fn index_pmf_capped(n: u32, tail_eps: f64, cap: usize) -> Result<IndexDistribution> {
    if n == 0 {
        return Err(Error::invalid("n", "must be at least 1"));
    }
    if !(tail_eps > 0.0 && tail_eps < 1.0) {
        return Err(Error::invalid(
            "tail_eps",
            format!("must lie in (0, 1), got {tail_eps}"),
        ));
    }
    if cap == 0 {
        return Err(Error::invalid("cap", "must be at least 1"));
    }
    let extra_bits = (-tail_eps.log2()).ceil() as u32;
    let mut dist = IndexDistribution {
        n,
        tail_eps,
        cap,
        support: Vec::new(),
        probs: Vec::new(),
        cumulative: Vec::new(),
        tail_bound: 1.0,
        shadow_discrepancy: 0.0,
        series: SeriesInverter::new(n, extra_bits),
    };
    dist.extend_to_tail(tail_eps)?;
    Ok(dist)
}

pub fn index_sample<R: Rng + ?Sized>(rng: &mut R, dist: &mut IndexDistribution) -> Result<u64> {
    dist.sample(rng)
}
