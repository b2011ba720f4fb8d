//! Samplers for the three probabilistic constructions: the Bernoulli mixture
//! `(X1 + X2)/2 + eps X3`, the pair of random-coefficient linear forms, and
//! normalized sums with a random number of terms.

use std::f64::consts::FRAC_2_PI;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::cheb_index::{index_pmf, IndexDistribution};
use crate::error::{Error, Result};
use crate::rng::{Provenance, RngStream};
use crate::sech::SampleBatch;

/// Default tail mass left unstored when the index law is first extracted;
/// draws beyond it extend the table on demand.
pub const DEFAULT_TAIL_EPS: f64 = 1e-12;

/// Fair 0/1 coin.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BernoulliEps;

impl Distribution<f64> for BernoulliEps {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if rng.random::<bool>() {
            1.0
        } else {
            0.0
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairedBatch {
    pub l1: Vec<f64>,
    pub l2: Vec<f64>,
    pub provenance: Provenance,
}

impl PairedBatch {
    pub fn len(&self) -> usize {
        self.l1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.l1.is_empty()
    }

    /// Pearson correlation of the two coordinates.
    pub fn correlation(&self) -> f64 {
        let n = self.len() as f64;
        let m1 = self.l1.iter().sum::<f64>() / n;
        let m2 = self.l2.iter().sum::<f64>() / n;
        let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
        for (a, b) in self.l1.iter().zip(&self.l2) {
            let (da, db) = (a - m1, b - m2);
            sxy += da * db;
            sxx += da * da;
            syy += db * db;
        }
        sxy / (sxx * syy).sqrt()
    }
}

fn check_count(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::invalid("n", "must be at least 1"))
    } else {
        Ok(())
    }
}

/// `n` draws of `(X1 + X2)/2 + eps X3` with fresh `X1, X2, X3 ~ sampler` and
/// an independent fair `eps` per draw.
pub fn sample_mixture<D: Distribution<f64> + ?Sized>(
    rng: &mut RngStream,
    sampler: &D,
    n: usize,
) -> Result<SampleBatch> {
    check_count(n)?;
    let values = (0..n)
        .map(|_| {
            let x1 = sampler.sample(rng);
            let x2 = sampler.sample(rng);
            let x3 = sampler.sample(rng);
            let eps = BernoulliEps.sample(rng);
            0.5 * (x1 + x2) + eps * x3
        })
        .collect();
    Ok(SampleBatch {
        values,
        provenance: rng.provenance("mixture"),
    })
}

/// `n` pairs `L1 = (X1 + X2)/2 + eps X3`, `L2 = (X1 - X2)/2 + (1 - eps) X3`,
/// both coordinates built from the same `X1, X2, X3, eps`.
pub fn sample_forms<D: Distribution<f64> + ?Sized>(
    rng: &mut RngStream,
    sampler: &D,
    n: usize,
) -> Result<PairedBatch> {
    check_count(n)?;
    let mut l1 = Vec::with_capacity(n);
    let mut l2 = Vec::with_capacity(n);
    for _ in 0..n {
        let x1 = sampler.sample(rng);
        let x2 = sampler.sample(rng);
        let x3 = sampler.sample(rng);
        let eps = BernoulliEps.sample(rng);
        l1.push(0.5 * (x1 + x2) + eps * x3);
        l2.push(0.5 * (x1 - x2) + (1.0 - eps) * x3);
    }
    Ok(PairedBatch {
        l1,
        l2,
        provenance: rng.provenance("linear_forms"),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Normalization {
    /// Multiply the sum by `1/n`.
    #[serde(rename = "inv-n")]
    InvN,
    /// Multiply the sum by `1/sqrt(n)`.
    #[serde(rename = "inv-sqrt-n")]
    InvSqrtN,
}

impl Normalization {
    pub fn factor(&self, n: u32) -> f64 {
        match self {
            Normalization::InvN => 1.0 / n as f64,
            Normalization::InvSqrtN => 1.0 / (n as f64).sqrt(),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Normalization::InvN => "inv-n",
            Normalization::InvSqrtN => "inv-sqrt-n",
        }
    }
}

impl FromStr for Normalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "inv-n" | "inv_n" => Ok(Normalization::InvN),
            "inv-sqrt-n" | "inv_sqrt_n" => Ok(Normalization::InvSqrtN),
            other => Err(Error::invalid(
                "normalization",
                format!("expected inv-n or inv-sqrt-n, got `{other}`"),
            )),
        }
    }
}

/// Zero-mean, unit-variance summand laws.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaseLaw {
    /// Fair +-1 coin.
    Coin,
    /// Uniform on `[-sqrt 3, sqrt 3]`.
    Uniform,
    Normal,
}

impl BaseLaw {
    pub fn as_str(&self) -> &'static str {
        match self {
            BaseLaw::Coin => "coin",
            BaseLaw::Uniform => "uniform",
            BaseLaw::Normal => "normal",
        }
    }

    pub fn std_dev(&self) -> f64 {
        1.0
    }

    /// Lattice spacing of the support, if the law is arithmetic.
    pub fn lattice_span(&self) -> Option<f64> {
        match self {
            BaseLaw::Coin => Some(2.0),
            _ => None,
        }
    }

    /// Sum of `count` independent draws. Coin flips are taken 64 at a time
    /// from the bits of one word.
    pub fn sum_of<R: Rng + ?Sized>(&self, count: u64, rng: &mut R) -> f64 {
        match self {
            BaseLaw::Coin => {
                let mut ones = 0u64;
                let mut left = count;
                while left >= 64 {
                    ones += rng.next_u64().count_ones() as u64;
                    left -= 64;
                }
                if left > 0 {
                    let mask = (1u64 << left) - 1;
                    ones += (rng.next_u64() & mask).count_ones() as u64;
                }
                2.0 * ones as f64 - count as f64
            }
            _ => (0..count).map(|_| self.sample(rng)).sum(),
        }
    }
}

impl Distribution<f64> for BaseLaw {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            BaseLaw::Coin => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            BaseLaw::Uniform => 3f64.sqrt() * (2.0 * rng.random::<f64>() - 1.0),
            BaseLaw::Normal => rng.sample(StandardNormal),
        }
    }
}

impl FromStr for BaseLaw {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "coin" => Ok(BaseLaw::Coin),
            "uniform" => Ok(BaseLaw::Uniform),
            "normal" => Ok(BaseLaw::Normal),
            other => Err(Error::invalid(
                "base",
                format!("unknown base law `{other}`"),
            )),
        }
    }
}

/// `c_n sum_{j=1}^{nu_n} X_j` with `nu_n` drawn from [`IndexDistribution`].
///
/// Holds its own copy of the index table, which grows when a draw falls in the
/// unstored tail; clone one per thread.
#[derive(Clone, Debug)]
pub struct RandomSum {
    index: IndexDistribution,
    base: BaseLaw,
    normalization: Normalization,
}

impl RandomSum {
    pub fn new(n_param: u32, base: BaseLaw, normalization: Normalization) -> Result<Self> {
        Ok(RandomSum {
            index: index_pmf(n_param, DEFAULT_TAIL_EPS)?,
            base,
            normalization,
        })
    }

    pub fn n_param(&self) -> u32 {
        self.index.n()
    }

    pub fn index(&self) -> &IndexDistribution {
        &self.index
    }

    pub fn factor(&self) -> f64 {
        self.normalization.factor(self.n_param())
    }

    /// Scale of the sech law the `1/n` sums approach: characteristic function
    /// `1/cosh(sigma t)`, i.e. `sech_cf(t, 2 sigma / pi)`.
    pub fn limit_scale(&self) -> f64 {
        FRAC_2_PI * self.base.std_dev()
    }

    pub fn draw<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<f64> {
        let nu = self.index.sample(rng)?;
        Ok(self.factor() * self.base.sum_of(nu, rng))
    }

    pub fn sample(&mut self, rng: &mut RngStream, m: usize) -> Result<SampleBatch> {
        check_count(m)?;
        let values = (0..m).map(|_| self.draw(rng)).collect::<Result<Vec<_>>>()?;
        Ok(SampleBatch {
            values,
            provenance: rng.provenance(format!(
                "random_sum(n={}, base={}, {})",
                self.n_param(),
                self.base.as_str(),
                self.normalization.as_str()
            )),
        })
    }
}

pub fn sample_random_sum(
    rng: &mut RngStream,
    n_param: u32,
    base: BaseLaw,
    normalization: Normalization,
    m: usize,
) -> Result<SampleBatch> {
    RandomSum::new(n_param, base, normalization)?.sample(rng, m)
}
