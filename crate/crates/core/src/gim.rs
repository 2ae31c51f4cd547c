//! Loss probabilities for GI/M/1/n and GI/M/m/n.
//!
//! The single-server loss probability is exact: 1 / rtilde_n, where the
//! rtilde sequence solves a convolution recurrence driven by mixed-Poisson
//! coefficients of the interarrival law at the service rate. Capacity here
//! counts customers in the system: with m servers, capacity is n + m - 1 in
//! total (m = 1 reduces to "at most n present"), the convention pinned by
//! the closed-form birth-death cross-check.
//!
//! The multiserver case has no exact finite-n series; its asymptotic
//! formulas (including the K_m coefficient) are validated against
//! simulation and, for Poisson arrivals, against the birth-death chain.

use serde::{Deserialize, Serialize};

use crate::asymptotics::{classify, HeavyTrafficParams, Regime};
use crate::convrec::{find_phi, solve_q};
use crate::dist::{Dist, TAIL_TOL};
use crate::error::{Error, Result};

/// A GI/M/m/n instance: renewal arrivals with law `arrival`, `m` exponential
/// servers at rate `mu`, capacity index `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GimSpec {
    pub arrival: Dist,
    pub mu: f64,
    pub m: u32,
    pub n: usize,
}

impl GimSpec {
    pub fn new(arrival: Dist, mu: f64, m: u32, n: usize) -> Result<Self> {
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(Error::invalid(format!("service rate must be positive, got {mu}")));
        }
        if m < 1 {
            return Err(Error::invalid("server count must be >= 1"));
        }
        if n < 1 {
            return Err(Error::invalid("capacity index must be >= 1"));
        }
        arrival.validate()?;
        Ok(GimSpec { arrival, mu, m, n })
    }

    /// Arrival rate lam = 1 / E[interarrival].
    pub fn lam(&self) -> f64 {
        1.0 / self.arrival.mean()
    }

    /// Load rho = lam / (m mu).
    pub fn load(&self) -> f64 {
        self.lam() / (f64::from(self.m) * self.mu)
    }

    /// Second moment of the interarrival law scaled by the total service
    /// rate, E[(m mu X)^2]; the constant in every critical-regime formula.
    pub fn rho2(&self) -> f64 {
        self.arrival.moments(f64::from(self.m) * self.mu).rho2
    }

    /// Total number of customers that fit in the system.
    pub fn total_capacity(&self) -> usize {
        self.n + self.m as usize - 1
    }
}

/// The solved rtilde recurrence for m = 1, plus its first differences.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RSeries {
    /// rtilde_0..rtilde_n; the reciprocal of the last entry is the exact
    /// loss probability.
    pub rtilde: Vec<f64>,
    /// r_0..r_n with r_0 = rtilde_0 and r_{j+1} = rtilde_{j+1} - rtilde_j.
    pub r: Vec<f64>,
}

impl RSeries {
    pub fn p_loss(&self) -> f64 {
        1.0 / *self.rtilde.last().expect("nonempty")
    }
}

/// Solves the single-server recurrence with base rtilde_0 = 1 (the constant
/// term of the generating function, whose numerator and denominator constant
/// terms cancel).
pub fn rtilde_series(spec: &GimSpec) -> Result<RSeries> {
    if spec.m != 1 {
        return Err(Error::invalid("exact series applies to the single-server case"));
    }
    let coeffs = spec.arrival.mixed_poisson_tol(spec.mu, TAIL_TOL)?;
    let qs = solve_q(&coeffs, 1.0, spec.n)?;
    let rtilde = qs.values().to_vec();
    let mut r = Vec::with_capacity(rtilde.len());
    r.push(rtilde[0]);
    for w in rtilde.windows(2) {
        r.push(w[1] - w[0]);
    }
    Ok(RSeries { rtilde, r })
}

/// Exact loss probability for m = 1.
pub fn loss_probability(spec: &GimSpec) -> Result<f64> {
    Ok(rtilde_series(spec)?.p_loss())
}

/// Regime-matched asymptotic prediction for the loss probability.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GimPrediction {
    pub regime: Regime,
    /// The predicted loss probability at the instance's n.
    pub p_loss: f64,
    /// Supporting constants, populated per regime.
    pub phi: Option<f64>,
    /// Critical regime: the limit of n * P_loss.
    pub n_p_loss_limit: Option<f64>,
    /// Critical regime: the limit of 1/P(n+1) - 1/P(n).
    pub inverse_increment: Option<f64>,
}

/// Single-server prediction: the geometric formula below the critical load,
/// rho_2/(2n) at it, (rho-1)/rho above it.
pub fn gim1n_asymptotics(spec: &GimSpec) -> Result<GimPrediction> {
    if spec.m != 1 {
        return Err(Error::invalid("use gimmn_asymptotics for m > 1"));
    }
    gimmn_asymptotics(spec)
}

/// Multiserver prediction; reduces to the single-server one at m = 1.
pub fn gimmn_asymptotics(spec: &GimSpec) -> Result<GimPrediction> {
    let rho = spec.load();
    let regime = classify(rho);
    match regime {
        Regime::Supercritical => Ok(GimPrediction {
            regime,
            p_loss: (rho - 1.0) / rho,
            phi: None,
            n_p_loss_limit: None,
            inverse_increment: None,
        }),
        Regime::Critical => {
            let rho2 = spec.rho2();
            Ok(GimPrediction {
                regime,
                p_loss: rho2 / (2.0 * spec.n as f64),
                phi: None,
                n_p_loss_limit: Some(rho2 / 2.0),
                inverse_increment: Some(2.0 / rho2),
            })
        }
        Regime::Subcritical => {
            let total_rate = f64::from(spec.m) * spec.mu;
            let phi = find_phi(&spec.arrival, total_rate)?.value;
            let denom =
                1.0 + total_rate * spec.arrival.lst_deriv_analytic(total_rate * (1.0 - phi));
            let k_m = if spec.m == 1 { 1.0 } else { km_coefficient(spec)?.k_m };
            let phipow = if spec.m == 1 {
                phi.powi(spec.n as i32)
            } else {
                phi.powi(spec.n as i32 - 1)
            };
            let p = k_m * (1.0 - rho) * denom * phipow
                / (1.0 - rho - rho * denom * phipow);
            Ok(GimPrediction {
                regime,
                p_loss: p,
                phi: Some(phi),
                n_p_loss_limit: None,
                inverse_increment: None,
            })
        }
    }
}

/// Heavy-traffic prediction for rho = 1 - delta with n * delta -> C. For
/// C > 0 the value is delta e^{-theta}/(1 - e^{-theta}); for C = 0 it
/// degenerates to rho2_tilde/(2n), independent of m.
pub fn gim_heavy_traffic(params: &HeavyTrafficParams, n: usize) -> f64 {
    if params.c == 0.0 {
        return params.rho2_tilde / (2.0 * n as f64);
    }
    let theta = params.theta();
    params.delta * (-theta).exp() / (1.0 - (-theta).exp())
}

/// The multiserver correction coefficient with its building blocks.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MultiserverK {
    /// sigma_j = LST of the interarrival law at j*mu, j = 1..=m.
    pub sigma: Vec<f64>,
    /// Partial products prod_{i<=j} (1 - sigma_i)/sigma_i.
    pub c_prod: Vec<f64>,
    pub phi_m: f64,
    pub k_m: f64,
}

/// Computes K_m for the subcritical multiserver formula. The partial
/// products run over i = 1..=j (the inner index varies; the alternative
/// degenerates).
pub fn km_coefficient(spec: &GimSpec) -> Result<MultiserverK> {
    let rho = spec.load();
    if rho >= 1.0 {
        return Err(Error::regime("K_m applies below the critical load".to_string()));
    }
    let m = spec.m as usize;
    let total_rate = f64::from(spec.m) * spec.mu;
    let phi_m = find_phi(&spec.arrival, total_rate)?.value;

    let mut sigma = Vec::with_capacity(m);
    let mut c_prod = Vec::with_capacity(m);
    let mut prod = 1.0;
    for j in 1..=m {
        let s = spec.arrival.lst(j as f64 * spec.mu)?;
        prod *= (1.0 - s) / s;
        sigma.push(s);
        c_prod.push(prod);
    }

    let mf = m as f64;
    let mut sum = 0.0;
    let mut binom = 1.0; // C(m, j) built incrementally
    for j in 1..=m {
        binom *= (mf - (j as f64 - 1.0)) / j as f64;
        let sj = sigma[j - 1];
        let gap = mf * (1.0 - phi_m) - j as f64;
        if gap.abs() < 1e-12 {
            return Err(Error::numerical(format!(
                "degenerate parameters: m(1 - phi_m) - {j} vanishes"
            )));
        }
        sum += binom * c_prod[j - 1] / (1.0 - sj) * (mf * (1.0 - sj) - j as f64) / gap;
    }
    let k_m = 1.0 / (1.0 + (1.0 - phi_m) * sum);
    Ok(MultiserverK { sigma, c_prod, phi_m, k_m })
}
