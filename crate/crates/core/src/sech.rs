//! The hyperbolic secant law and the symmetric control laws it is compared to.
//!
//! Scale convention: `X = scale * X_std`, where `X_std` has density
//! `1 / (pi * cosh x)` and characteristic function `1 / cosh(pi t / 2)`.

use std::f64::consts::{FRAC_2_PI, FRAC_PI_2, PI, SQRT_2};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Exp1, Open01, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{check_scale, Error, Result};
use crate::rng::{Provenance, RngStream};

/// `cosh` arguments beyond this are treated as infinite: `1/cosh` is returned as 0.
const COSH_CUTOFF: f64 = 700.0;

fn sech(x: f64) -> f64 {
    if x.abs() > COSH_CUTOFF {
        0.0
    } else {
        1.0 / x.cosh()
    }
}

/// A real, even characteristic function of a symmetric law.
pub trait CharFn {
    fn name(&self) -> String;

    fn eval(&self, t: f64) -> f64;

    fn is_symmetric(&self) -> bool {
        true
    }
}

impl<F: CharFn + ?Sized> CharFn for &F {
    fn name(&self) -> String {
        (**self).name()
    }

    fn eval(&self, t: f64) -> f64 {
        (**self).eval(t)
    }
}

/// A characteristic function given by a closure.
#[derive(Clone)]
pub struct NamedCharFn {
    name: String,
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl NamedCharFn {
    pub fn new(name: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        NamedCharFn {
            name: name.into(),
            f: Arc::new(f),
        }
    }

    /// The point mass at zero, `f == 1`.
    pub fn degenerate() -> Self {
        Self::new("degenerate", |_| 1.0)
    }
}

impl fmt::Debug for NamedCharFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NamedCharFn")
            .field("name", &self.name)
            .finish()
    }
}

impl CharFn for NamedCharFn {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn eval(&self, t: f64) -> f64 {
        (self.f)(t)
    }
}

/// Draws together with where they came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleBatch {
    pub values: Vec<f64>,
    pub provenance: Provenance,
}

impl SampleBatch {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        mean(&self.values)
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        variance(&self.values)
    }
}

impl AsRef<[f64]> for SampleBatch {
    fn as_ref(&self) -> &[f64] {
        &self.values
    }
}

pub(crate) fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub(crate) fn variance(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64
}

// ---------------------------------------------------------------------------
// Hyperbolic secant
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SechDistribution {
    scale: f64,
}

impl SechDistribution {
    pub fn new(scale: f64) -> Result<Self> {
        check_scale(scale)?;
        let d = SechDistribution { scale };
        #[cfg(debug_assertions)]
        {
            let mass = d.pdf_mass();
            debug_assert!((mass - 1.0).abs() < 1e-8, "sech pdf integrates to {mass}");
        }
        Ok(d)
    }

    pub fn standard() -> Self {
        SechDistribution { scale: 1.0 }
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn pdf(&self, x: f64) -> f64 {
        sech(x / self.scale) / (PI * self.scale)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        FRAC_2_PI * (x / self.scale).exp().atan()
    }

    /// Inverse of [`cdf`](Self::cdf) on the open unit interval.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::invalid("u", format!("must lie in (0, 1), got {u}")));
        }
        Ok(self.quantile_unchecked(u))
    }

    fn quantile_unchecked(&self, u: f64) -> f64 {
        self.scale * (FRAC_PI_2 * u).tan().ln()
    }

    pub fn cf(&self, t: f64) -> f64 {
        sech(FRAC_PI_2 * self.scale * t)
    }

    /// `pi^2 scale^2 / 4`.
    pub fn variance(&self) -> f64 {
        let s = PI * self.scale / 2.0;
        s * s
    }

    /// Composite Simpson over +-60 scale units; the tail beyond is below 1e-25.
    #[cfg(debug_assertions)]
    fn pdf_mass(&self) -> f64 {
        let intervals = 4000;
        let a = -60.0 * self.scale;
        let h = 120.0 * self.scale / intervals as f64;
        let mut acc = self.pdf(a) + self.pdf(-a);
        for i in 1..intervals {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * self.pdf(a + i as f64 * h);
        }
        acc * h / 3.0
    }
}

impl Distribution<f64> for SechDistribution {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.sample(Open01);
        self.quantile_unchecked(u)
    }
}

impl CharFn for SechDistribution {
    fn name(&self) -> String {
        format!("sech(scale={})", self.scale)
    }

    fn eval(&self, t: f64) -> f64 {
        self.cf(t)
    }
}

pub fn sech_pdf(x: f64, scale: f64) -> Result<f64> {
    check_scale(scale)?;
    Ok(SechDistribution { scale }.pdf(x))
}

pub fn sech_cdf(x: f64, scale: f64) -> Result<f64> {
    check_scale(scale)?;
    Ok(SechDistribution { scale }.cdf(x))
}

pub fn sech_quantile(u: f64, scale: f64) -> Result<f64> {
    check_scale(scale)?;
    SechDistribution { scale }.quantile(u)
}

pub fn sech_cf(t: f64, scale: f64) -> Result<f64> {
    check_scale(scale)?;
    Ok(SechDistribution { scale }.cf(t))
}

pub fn sech_sample(rng: &mut RngStream, n: usize, scale: f64) -> Result<SampleBatch> {
    if n == 0 {
        return Err(Error::invalid("n", "must be at least 1"));
    }
    let d = SechDistribution::new(scale)?;
    let values = (0..n).map(|_| d.sample(rng)).collect();
    Ok(SampleBatch {
        values,
        provenance: rng.provenance(d.name()),
    })
}

// ---------------------------------------------------------------------------
// Controls
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ControlKind {
    Normal,
    Laplace,
    Uniform,
}

impl ControlKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ControlKind::Normal => "normal",
            ControlKind::Laplace => "laplace",
            ControlKind::Uniform => "uniform",
        }
    }
}

impl FromStr for ControlKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "normal" => Ok(ControlKind::Normal),
            "laplace" => Ok(ControlKind::Laplace),
            "uniform" => Ok(ControlKind::Uniform),
            other => Err(Error::invalid(
                "kind",
                format!("unknown control law `{other}`"),
            )),
        }
    }
}

/// Symmetric finite-variance laws used as negative controls.
///
/// `scale` is the standard deviation for `Normal`, the rate-one scale `b`
/// (density `exp(-|x|/b) / 2b`) for `Laplace`, and the half-width for
/// `Uniform` on `[-scale, scale]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlDistribution {
    kind: ControlKind,
    scale: f64,
}

impl ControlDistribution {
    pub fn new(kind: ControlKind, scale: f64) -> Result<Self> {
        check_scale(scale)?;
        Ok(ControlDistribution { kind, scale })
    }

    pub fn kind(&self) -> ControlKind {
        self.kind
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn cf(&self, t: f64) -> f64 {
        let s = self.scale;
        match self.kind {
            ControlKind::Normal => (-0.5 * s * s * t * t).exp(),
            ControlKind::Laplace => 1.0 / (1.0 + s * s * t * t),
            ControlKind::Uniform => {
                let x = s * t;
                if x == 0.0 {
                    1.0
                } else {
                    x.sin() / x
                }
            }
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let s = self.scale;
        match self.kind {
            ControlKind::Normal => 0.5 * libm::erfc(-x / (s * SQRT_2)),
            ControlKind::Laplace => {
                if x < 0.0 {
                    0.5 * (x / s).exp()
                } else {
                    1.0 - 0.5 * (-x / s).exp()
                }
            }
            ControlKind::Uniform => ((x + s) / (2.0 * s)).clamp(0.0, 1.0),
        }
    }

    pub fn variance(&self) -> f64 {
        let s2 = self.scale * self.scale;
        match self.kind {
            ControlKind::Normal => s2,
            ControlKind::Laplace => 2.0 * s2,
            ControlKind::Uniform => s2 / 3.0,
        }
    }
}

impl Distribution<f64> for ControlDistribution {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.kind {
            ControlKind::Normal => {
                let z: f64 = rng.sample(StandardNormal);
                self.scale * z
            }
            ControlKind::Laplace => {
                let a: f64 = rng.sample(Exp1);
                let b: f64 = rng.sample(Exp1);
                self.scale * (a - b)
            }
            ControlKind::Uniform => {
                let u: f64 = rng.random();
                self.scale * (2.0 * u - 1.0)
            }
        }
    }
}

impl CharFn for ControlDistribution {
    fn name(&self) -> String {
        format!("{}(scale={})", self.kind.as_str(), self.scale)
    }

    fn eval(&self, t: f64) -> f64 {
        self.cf(t)
    }
}

pub fn control_cf(kind: ControlKind, t: f64, scale: f64) -> Result<f64> {
    Ok(ControlDistribution::new(kind, scale)?.cf(t))
}

pub fn control_sample(
    rng: &mut RngStream,
    kind: ControlKind,
    n: usize,
    scale: f64,
) -> Result<SampleBatch> {
    if n == 0 {
        return Err(Error::invalid("n", "must be at least 1"));
    }
    let d = ControlDistribution::new(kind, scale)?;
    let values = (0..n).map(|_| d.sample(rng)).collect();
    Ok(SampleBatch {
        values,
        provenance: rng.provenance(d.name()),
    })
}

// ---------------------------------------------------------------------------
// Any of the above
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistKind {
    Sech,
    Normal,
    Laplace,
    Uniform,
}

impl DistKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            DistKind::Sech => "sech",
            DistKind::Normal => "normal",
            DistKind::Laplace => "laplace",
            DistKind::Uniform => "uniform",
        }
    }
}

impl FromStr for DistKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sech" => Ok(DistKind::Sech),
            other => other.parse::<ControlKind>().map(DistKind::from),
        }
    }
}

impl From<ControlKind> for DistKind {
    fn from(k: ControlKind) -> Self {
        match k {
            ControlKind::Normal => DistKind::Normal,
            ControlKind::Laplace => DistKind::Laplace,
            ControlKind::Uniform => DistKind::Uniform,
        }
    }
}

/// A configured law: the sech law or one of the controls.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Law {
    Sech(SechDistribution),
    Control(ControlDistribution),
}

impl Law {
    pub fn new(kind: DistKind, scale: f64) -> Result<Self> {
        Ok(match kind {
            DistKind::Sech => Law::Sech(SechDistribution::new(scale)?),
            DistKind::Normal => Law::Control(ControlDistribution::new(ControlKind::Normal, scale)?),
            DistKind::Laplace => {
                Law::Control(ControlDistribution::new(ControlKind::Laplace, scale)?)
            }
            DistKind::Uniform => {
                Law::Control(ControlDistribution::new(ControlKind::Uniform, scale)?)
            }
        })
    }

    pub fn is_sech(&self) -> bool {
        matches!(self, Law::Sech(_))
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Law::Sech(d) => d.cdf(x),
            Law::Control(d) => d.cdf(x),
        }
    }

    pub fn cf(&self, t: f64) -> f64 {
        match self {
            Law::Sech(d) => d.cf(t),
            Law::Control(d) => d.cf(t),
        }
    }

    pub fn variance(&self) -> f64 {
        match self {
            Law::Sech(d) => d.variance(),
            Law::Control(d) => d.variance(),
        }
    }
}

impl Distribution<f64> for Law {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Law::Sech(d) => d.sample(rng),
            Law::Control(d) => d.sample(rng),
        }
    }
}

impl CharFn for Law {
    fn name(&self) -> String {
        match self {
            Law::Sech(d) => d.name(),
            Law::Control(d) => d.name(),
        }
    }

    fn eval(&self, t: f64) -> f64 {
        self.cf(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    // Oracle values below: 40-digit mpmath evaluation (pdf, cf), adaptive
    // quadrature of the density (cdf) and bisection on that quadrature (quantile).

    #[test]
    fn pdf_values() {
        close(sech_pdf(0.0, 1.0).unwrap(), 1.0 / PI, 1e-15);
        close(sech_pdf(1.0, 1.0).unwrap(), 0.206_282_082_090_870_5, 1e-15);
        for x in [0.1, 1.3, 7.0, 40.0] {
            assert_eq!(sech_pdf(x, 1.0).unwrap(), sech_pdf(-x, 1.0).unwrap());
        }
        assert_eq!(sech_pdf(1e6, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn cdf_values() {
        close(sech_cdf(0.0, 1.0).unwrap(), 0.5, 1e-15);
        close(sech_cdf(1.0, 1.0).unwrap(), 0.775_582_985_671_415, 1e-14);
        close(
            sech_cdf(-1.0, 1.0).unwrap(),
            1.0 - 0.775_582_985_671_415,
            1e-14,
        );
        close(
            sech_cdf(3.0, 1.0).unwrap() + sech_cdf(-3.0, 1.0).unwrap(),
            1.0,
            1e-15,
        );
    }

    #[test]
    fn quantile_values() {
        close(sech_quantile(0.5, 1.0).unwrap(), 0.0, 1e-15);
        close(
            sech_quantile(0.75, 1.0).unwrap(),
            0.881_373_587_019_543,
            1e-14,
        );
        for u in [0.01, 0.3, 0.9] {
            close(
                sech_quantile(u, 2.0).unwrap(),
                2.0 * sech_quantile(u, 1.0).unwrap(),
                1e-14,
            );
        }
    }

    #[test]
    fn cf_values() {
        assert_eq!(sech_cf(0.0, 1.0).unwrap(), 1.0);
        close(sech_cf(1.0, 1.0).unwrap(), 0.398_536_815_338_386_7, 1e-15);
        close(sech_cf(2.0, 1.0).unwrap(), 0.086_266_738_334_054_4, 1e-15);
        assert_eq!(sech_cf(1e4, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn control_cf_values() {
        assert_eq!(control_cf(ControlKind::Normal, 0.0, 1.0).unwrap(), 1.0);
        close(
            control_cf(ControlKind::Normal, 2.0, 1.0).unwrap(),
            0.135_335_283_236_612_7,
            1e-15,
        );
        close(
            control_cf(ControlKind::Uniform, PI, 1.0).unwrap(),
            0.0,
            1e-15,
        );
        assert_eq!(control_cf(ControlKind::Uniform, 0.0, 1.0).unwrap(), 1.0);
        close(
            control_cf(ControlKind::Laplace, 1.0, 1.0).unwrap(),
            0.5,
            1e-15,
        );
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(
            sech_pdf(0.0, 0.0),
            Err(Error::InvalidParameter { .. })
        ));
        assert!(sech_cdf(0.0, -1.0).is_err());
        assert!(sech_quantile(0.0, 1.0).is_err());
        assert!(sech_quantile(1.0, 1.0).is_err());
        assert!(sech_quantile(f64::NAN, 1.0).is_err());
        assert!(sech_cf(1.0, f64::INFINITY).is_err());
        assert!("cauchy".parse::<ControlKind>().is_err());
        assert!("sech".parse::<DistKind>().is_ok());
    }

    #[test]
    fn pdf_matches_cf_shape() {
        // (1/pi) sech(x) and sech(pi t / 2) have the same form: t = 2x/pi.
        for i in 0..200 {
            let x = -10.0 + 0.1 * i as f64;
            close(
                sech_cf(2.0 * x / PI, 1.0).unwrap(),
                PI * sech_pdf(x, 1.0).unwrap(),
                1e-15,
            );
        }
    }

    #[test]
    fn quantile_round_trip_grid() {
        for i in 1..100 {
            let u = i as f64 / 100.0;
            let x = sech_quantile(u, 1.0).unwrap();
            close(sech_cdf(x, 1.0).unwrap(), u, 1e-12);
        }
    }

    #[test]
    fn samples_are_reproducible() {
        let a = sech_sample(&mut RngStream::new(5), 5, 1.0).unwrap();
        let b = sech_sample(&mut RngStream::new(5), 5, 1.0).unwrap();
        assert_eq!(a, b);
        assert!(sech_sample(&mut RngStream::new(5), 0, 1.0).is_err());
        let c = control_sample(&mut RngStream::new(5), ControlKind::Laplace, 5, 1.0).unwrap();
        let d = control_sample(&mut RngStream::new(5), ControlKind::Laplace, 5, 1.0).unwrap();
        assert_eq!(c, d);
    }

    #[test]
    fn control_cdfs_are_symmetric() {
        for kind in [
            ControlKind::Normal,
            ControlKind::Laplace,
            ControlKind::Uniform,
        ] {
            let d = ControlDistribution::new(kind, 1.3).unwrap();
            close(d.cdf(0.0), 0.5, 1e-15);
            for x in [0.2, 0.9, 2.5] {
                close(d.cdf(x) + d.cdf(-x), 1.0, 1e-15);
            }
        }
    }
}
