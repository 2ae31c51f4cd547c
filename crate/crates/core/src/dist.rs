//! Catalog of interarrival/service-time laws with closed-form
//! Laplace-Stieltjes transforms, moments, and mixed-Poisson coefficients.
//!
//! Every coefficient used by the convolution recurrences is computed in
//! closed form per family; no quadrature enters the pipeline.

use serde::{Deserialize, Serialize};

use crate::convrec::CoeffSeq;
use crate::error::{Error, Result};

/// Default tail-mass target when a coefficient sequence is grown
/// automatically: coefficients beyond the computed support carry less
/// than this much probability.
pub const TAIL_TOL: f64 = 1e-14;

/// Tolerance for weight normalization of hyper-exponential mixtures.
const WEIGHT_TOL: f64 = 1e-12;

/// A nonnegative continuous law from the supported catalog.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Dist {
    Exponential { rate: f64 },
    Deterministic { value: f64 },
    Erlang { shape: u32, rate: f64 },
    #[serde(rename = "hyperexponential")]
    HyperExponential { weights: Vec<f64>, rates: Vec<f64> },
}

/// Raw and rate-scaled moments of a law, up to order three.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSet {
    /// Raw moments m_j = E[X^j].
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    /// Scaled moments rho_j = E[(rate * X)^j]; `rho1` is the load when the
    /// law is a service time and `rate` the arrival rate.
    pub rho1: f64,
    pub rho2: f64,
    pub rho3: f64,
}

impl Dist {
    pub fn exponential(rate: f64) -> Result<Self> {
        if !(rate > 0.0) || !rate.is_finite() {
            return Err(Error::invalid(format!("exponential rate must be positive, got {rate}")));
        }
        Ok(Dist::Exponential { rate })
    }

    /// Point mass at `value`. A mass at zero is rejected: it makes every
    /// mixed-Poisson coefficient beyond j=0 vanish and the recurrences
    /// degenerate.
    pub fn deterministic(value: f64) -> Result<Self> {
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::invalid(format!("deterministic value must be positive, got {value}")));
        }
        Ok(Dist::Deterministic { value })
    }

    pub fn erlang(shape: u32, rate: f64) -> Result<Self> {
        if shape < 1 {
            return Err(Error::invalid("erlang shape must be >= 1"));
        }
        if !(rate > 0.0) || !rate.is_finite() {
            return Err(Error::invalid(format!("erlang rate must be positive, got {rate}")));
        }
        Ok(Dist::Erlang { shape, rate })
    }

    pub fn hyper_exponential(weights: Vec<f64>, rates: Vec<f64>) -> Result<Self> {
        if weights.is_empty() || weights.len() != rates.len() {
            return Err(Error::invalid("hyper-exponential needs equal, nonempty weight/rate lists"));
        }
        if weights.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
            return Err(Error::invalid("hyper-exponential weights must be nonnegative"));
        }
        if rates.iter().any(|&r| !(r > 0.0) || !r.is_finite()) {
            return Err(Error::invalid("hyper-exponential rates must be positive"));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::invalid(format!("hyper-exponential weights must sum to 1, got {sum}")));
        }
        Ok(Dist::HyperExponential { weights, rates })
    }

    /// Validates an externally constructed (e.g. deserialized) value.
    pub fn validate(&self) -> Result<()> {
        match self {
            Dist::Exponential { rate } => Self::exponential(*rate).map(|_| ()),
            Dist::Deterministic { value } => Self::deterministic(*value).map(|_| ()),
            Dist::Erlang { shape, rate } => Self::erlang(*shape, *rate).map(|_| ()),
            Dist::HyperExponential { weights, rates } => {
                Self::hyper_exponential(weights.clone(), rates.clone()).map(|_| ())
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            Dist::Exponential { rate } => 1.0 / rate,
            Dist::Deterministic { value } => *value,
            Dist::Erlang { shape, rate } => f64::from(*shape) / rate,
            Dist::HyperExponential { weights, rates } => {
                weights.iter().zip(rates).map(|(w, r)| w / r).sum()
            }
        }
    }

    /// Raw moment E[X^order] for order 1..=3.
    pub fn raw_moment(&self, order: u32) -> f64 {
        assert!((1..=3).contains(&order), "raw moments supported up to order 3");
        let k = order;
        match self {
            Dist::Exponential { rate } => {
                // j!/mu^j
                (1..=k).map(f64::from).product::<f64>() / rate.powi(k as i32)
            }
            Dist::Deterministic { value } => value.powi(k as i32),
            Dist::Erlang { shape, rate } => {
                // shape*(shape+1)*...*(shape+k-1) / rate^k
                let s = f64::from(*shape);
                (0..k).map(|i| s + f64::from(i)).product::<f64>() / rate.powi(k as i32)
            }
            Dist::HyperExponential { weights, rates } => {
                let fact: f64 = (1..=k).map(f64::from).product();
                weights
                    .iter()
                    .zip(rates)
                    .map(|(w, r)| w * fact / r.powi(k as i32))
                    .sum()
            }
        }
    }

    /// Laplace-Stieltjes transform evaluated at `s >= 0`.
    pub fn lst(&self, s: f64) -> Result<f64> {
        if s < 0.0 {
            return Err(Error::invalid(format!("LST argument must be nonnegative, got {s}")));
        }
        Ok(self.lst_analytic(s))
    }

    /// Derivative of the transform at `s >= 0`; always nonpositive.
    pub fn lst_deriv(&self, s: f64) -> Result<f64> {
        if s < 0.0 {
            return Err(Error::invalid(format!("LST argument must be nonnegative, got {s}")));
        }
        Ok(self.lst_deriv_analytic(s))
    }

    /// Transform evaluated inside its analyticity domain, negative arguments
    /// included. Used by root searches that continue past s = 0.
    pub(crate) fn lst_analytic(&self, s: f64) -> f64 {
        match self {
            Dist::Exponential { rate } => rate / (rate + s),
            Dist::Deterministic { value } => (-s * value).exp(),
            Dist::Erlang { shape, rate } => (rate / (rate + s)).powi(*shape as i32),
            Dist::HyperExponential { weights, rates } => weights
                .iter()
                .zip(rates)
                .map(|(w, r)| w * r / (r + s))
                .sum(),
        }
    }

    pub(crate) fn lst_deriv_analytic(&self, s: f64) -> f64 {
        match self {
            Dist::Exponential { rate } => -rate / ((rate + s) * (rate + s)),
            Dist::Deterministic { value } => -value * (-s * value).exp(),
            Dist::Erlang { shape, rate } => {
                let k = f64::from(*shape);
                -k / rate * (rate / (rate + s)).powi(*shape as i32 + 1)
            }
            Dist::HyperExponential { weights, rates } => weights
                .iter()
                .zip(rates)
                .map(|(w, r)| -w * r / ((r + s) * (r + s)))
                .sum(),
        }
    }

    /// Largest s above which the transform stops being analytic, as an
    /// offset below zero: the transform is analytic for s > -pole_gap().
    /// `None` for entire transforms.
    pub(crate) fn pole_gap(&self) -> Option<f64> {
        match self {
            Dist::Exponential { rate } => Some(*rate),
            Dist::Deterministic { .. } => None,
            Dist::Erlang { rate, .. } => Some(*rate),
            Dist::HyperExponential { rates, .. } => {
                rates.iter().cloned().fold(None, |acc, r| {
                    Some(acc.map_or(r, |m: f64| m.min(r)))
                })
            }
        }
    }

    /// Mixed-Poisson coefficients pi_j = P{j Poisson(rate) events during an
    /// interval with this law}, for j = 0..=jmax, in closed form per family.
    pub fn mixed_poisson(&self, rate: f64, jmax: usize) -> Result<CoeffSeq> {
        if !(rate > 0.0) || !rate.is_finite() {
            return Err(Error::invalid(format!("mixing rate must be positive, got {rate}")));
        }
        if jmax < 1 {
            return Err(Error::invalid("jmax must be >= 1"));
        }
        let coeffs = self.mixed_poisson_raw(rate, jmax);
        let gamma = self.mixed_poisson_gamma(rate);
        Ok(CoeffSeq::with_gamma(coeffs, gamma))
    }

    /// Same as [`Dist::mixed_poisson`], but grows the support until the tail
    /// mass drops below `tail_tol`.
    pub fn mixed_poisson_tol(&self, rate: f64, tail_tol: f64) -> Result<CoeffSeq> {
        const JMAX_CAP: usize = 4_000_000;
        let mut jmax = 64;
        loop {
            let seq = self.mixed_poisson(rate, jmax)?;
            if seq.tail_mass() <= tail_tol {
                return Ok(seq.trimmed());
            }
            if jmax >= JMAX_CAP {
                return Err(Error::numerical(format!(
                    "tail mass {:.3e} still above {tail_tol:.3e} at jmax={jmax}",
                    seq.tail_mass()
                )));
            }
            jmax *= 4;
        }
    }

    fn mixed_poisson_raw(&self, lam: f64, jmax: usize) -> Vec<f64> {
        let mut pi = Vec::with_capacity(jmax + 1);
        match self {
            Dist::Exponential { rate } => {
                // geometric: (mu/(lam+mu)) * (lam/(lam+mu))^j
                let p = rate / (lam + rate);
                let r = lam / (lam + rate);
                let mut v = p;
                for _ in 0..=jmax {
                    pi.push(v);
                    v *= r;
                }
            }
            Dist::Deterministic { value } => {
                // Poisson(lam*d)
                let a = lam * value;
                let mut v = (-a).exp();
                pi.push(v);
                for j in 1..=jmax {
                    v *= a / j as f64;
                    pi.push(v);
                }
            }
            Dist::Erlang { shape, rate } => {
                // negative binomial: C(j+k-1, j) q^k r^j
                let k = f64::from(*shape);
                let q = rate / (lam + rate);
                let r = lam / (lam + rate);
                let mut v = q.powi(*shape as i32);
                pi.push(v);
                for j in 1..=jmax {
                    v *= r * (j as f64 + k - 1.0) / j as f64;
                    pi.push(v);
                }
            }
            Dist::HyperExponential { weights, rates } => {
                pi.resize(jmax + 1, 0.0);
                for (w, mu) in weights.iter().zip(rates) {
                    let p = mu / (lam + mu);
                    let r = lam / (lam + mu);
                    let mut v = w * p;
                    for slot in pi.iter_mut() {
                        *slot += v;
                        v *= r;
                    }
                }
            }
        }
        pi
    }

    /// Factorial moments of the mixed-Poisson law equal the scaled raw
    /// moments of the mixing law: gamma_l = rate^l * m_l.
    fn mixed_poisson_gamma(&self, rate: f64) -> [f64; 3] {
        [
            rate * self.raw_moment(1),
            rate * rate * self.raw_moment(2),
            rate * rate * rate * self.raw_moment(3),
        ]
    }

    /// Raw and scaled moments for a supplied rate.
    pub fn moments(&self, rate: f64) -> MomentSet {
        let (m1, m2, m3) = (self.raw_moment(1), self.raw_moment(2), self.raw_moment(3));
        MomentSet {
            m1,
            m2,
            m3,
            rho1: rate * m1,
            rho2: rate * rate * m2,
            rho3: rate * rate * rate * m3,
        }
    }

    /// Same family and shape, rescaled so the mean equals `mean`.
    pub fn with_mean(&self, mean: f64) -> Result<Self> {
        if !(mean > 0.0) || !mean.is_finite() {
            return Err(Error::invalid(format!("target mean must be positive, got {mean}")));
        }
        let factor = mean / self.mean();
        Ok(match self {
            Dist::Exponential { rate } => Dist::Exponential { rate: rate / factor },
            Dist::Deterministic { .. } => Dist::Deterministic { value: mean },
            Dist::Erlang { shape, rate } => Dist::Erlang { shape: *shape, rate: rate / factor },
            Dist::HyperExponential { weights, rates } => Dist::HyperExponential {
                weights: weights.clone(),
                rates: rates.iter().map(|r| r / factor).collect(),
            },
        })
    }

    /// Mean multiplied by `factor`, shape preserved.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        self.with_mean(self.mean() * factor)
    }

    /// Dimensionless second moment m2/m1^2. This is the limit of the scaled
    /// second moment along the family when the mean is driven to match a
    /// critical load; it is invariant under rescaling.
    pub fn shape_rho2(&self) -> f64 {
        let m1 = self.mean();
        self.raw_moment(2) / (m1 * m1)
    }
}
