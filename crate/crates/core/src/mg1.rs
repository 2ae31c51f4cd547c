//! Exact and asymptotic analysis of the M/GI/1/n loss queue.
//!
//! `n` counts waiting places and excludes the service space: an arrival is
//! accepted while fewer than n customers wait. Busy-period means solve the
//! convolution recurrence; losses follow from Wald's identities; the
//! consecutive-loss coefficients weight mixed-Poisson tail sums by
//! busy-period differences.

use serde::{Deserialize, Serialize};

use crate::asymptotics::{classify, HeavyTrafficParams, Regime};
use crate::convrec::{find_phi, solve_q, CoeffSeq};
use crate::dist::{Dist, TAIL_TOL};
use crate::error::{Error, Result};

/// An M/GI/1/n instance: Poisson arrivals at `lam`, service law `service`,
/// `n` waiting places.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mg1Spec {
    pub lam: f64,
    pub service: Dist,
    pub n: usize,
}

impl Mg1Spec {
    pub fn new(lam: f64, service: Dist, n: usize) -> Result<Self> {
        if !(lam > 0.0) || !lam.is_finite() {
            return Err(Error::invalid(format!("arrival rate must be positive, got {lam}")));
        }
        service.validate()?;
        Ok(Mg1Spec { lam, service, n })
    }

    /// Service rate mu (reciprocal mean service time).
    pub fn mu(&self) -> f64 {
        1.0 / self.service.mean()
    }

    /// Load rho = lam / mu.
    pub fn load(&self) -> f64 {
        self.lam * self.service.mean()
    }

    /// Mixed-Poisson coefficients of the service law at the arrival rate.
    pub fn coeffs(&self) -> Result<CoeffSeq> {
        self.service.mixed_poisson_tol(self.lam, TAIL_TOL)
    }
}

/// Expected busy periods ET_0..ET_n. ET_0 is the mean service time.
pub fn busy_periods(spec: &Mg1Spec) -> Result<Vec<f64>> {
    let et0 = spec.service.mean();
    if spec.n == 0 {
        return Ok(vec![et0]);
    }
    let pi = spec.coeffs()?;
    let qs = solve_q(&pi, et0, spec.n)?;
    Ok(qs.values().to_vec())
}

/// Expected losses per busy period, EL_0..EL_n, via the Wald identity
/// EL_k = (lam - mu) ET_k + 1.
pub fn expected_losses(spec: &Mg1Spec) -> Result<Vec<f64>> {
    let mu = spec.mu();
    Ok(busy_periods(spec)?
        .into_iter()
        .map(|et| (spec.lam - mu) * et + 1.0)
        .collect())
}

/// Stationary loss probability EL_n / (1 + lam ET_n).
pub fn loss_probability(spec: &Mg1Spec) -> Result<f64> {
    let report = report(spec)?;
    Ok(report.p_loss)
}

/// Everything the analyzer knows about one instance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Mg1Report {
    /// Expected busy periods ET_0..ET_n.
    pub et: Vec<f64>,
    /// Expected losses per busy period EL_0..EL_n.
    pub el: Vec<f64>,
    /// Expected arrivals during the busy period, lam * ET_n.
    pub ea_n: f64,
    /// Expected customers served per busy period, mu * ET_n.
    pub e_served_n: f64,
    /// Exact stationary loss probability at n.
    pub p_loss: f64,
    pub asymptotics: Mg1Asymptotics,
}

/// Regime-dependent predictions attached to a report. Only the fields of
/// the active regime are populated.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Mg1Asymptotics {
    pub regime: Regime,
    /// Subcritical: lim ET_n = rho / (lam (1 - rho)).
    pub et_limit: Option<f64>,
    /// Critical: lim ET_n / n = 2 / (lam rho_2).
    pub et_slope: Option<f64>,
    /// lim EL_n: 0 below, 1 at the critical point.
    pub el_limit: Option<f64>,
    /// Supercritical root of z = LST(lam - lam z).
    pub phi: Option<f64>,
    /// 1 + lam LST'(lam - lam phi).
    pub amplitude_denom: Option<f64>,
    /// Supercritical EL_n main term (rho - 1) phi^{-n} / denom.
    pub el_main_term: Option<f64>,
    /// Supercritical centering constant rho / (lam (1 - rho)) for ET_n.
    pub et_centered_limit: Option<f64>,
    /// Supercritical arrivals expansion rho phi^{-n}/denom + rho/(1-rho).
    pub ea_expansion: Option<f64>,
    /// Supercritical loss probability approximation
    /// (rho-1)^2 / (rho(rho-1) - phi^n denom).
    pub p_loss_supercritical: Option<f64>,
    /// lim P_loss: 0 below and at critical, (rho-1)/rho above.
    pub p_loss_limit: Option<f64>,
}

pub fn report(spec: &Mg1Spec) -> Result<Mg1Report> {
    let et = busy_periods(spec)?;
    let mu = spec.mu();
    let rho = spec.load();
    let el: Vec<f64> = et.iter().map(|&t| (spec.lam - mu) * t + 1.0).collect();
    let et_n = *et.last().expect("nonempty");
    let el_n = *el.last().expect("nonempty");
    let ea_n = spec.lam * et_n;
    let p_loss = el_n / (1.0 + ea_n);

    let regime = classify(rho);
    let rho2 = spec.service.moments(spec.lam).rho2;
    let mut asym = Mg1Asymptotics {
        regime,
        et_limit: None,
        et_slope: None,
        el_limit: None,
        phi: None,
        amplitude_denom: None,
        el_main_term: None,
        et_centered_limit: None,
        ea_expansion: None,
        p_loss_supercritical: None,
        p_loss_limit: None,
    };
    match regime {
        Regime::Subcritical => {
            asym.et_limit = Some(rho / (spec.lam * (1.0 - rho)));
            asym.el_limit = Some(0.0);
            asym.p_loss_limit = Some(0.0);
        }
        Regime::Critical => {
            asym.et_slope = Some(2.0 / (spec.lam * rho2));
            asym.el_limit = Some(1.0);
        }
        Regime::Supercritical => {
            let phi = find_phi(&spec.service, spec.lam)?.value;
            let denom = 1.0 + spec.lam * spec.service.lst_deriv_analytic(spec.lam * (1.0 - phi));
            let phin = phi.powi(spec.n as i32);
            asym.phi = Some(phi);
            asym.amplitude_denom = Some(denom);
            asym.el_main_term = Some((rho - 1.0) / (phin * denom));
            asym.et_centered_limit = Some(rho / (spec.lam * (1.0 - rho)));
            asym.ea_expansion = Some(rho / (phin * denom) + rho / (1.0 - rho));
            asym.p_loss_supercritical =
                Some((rho - 1.0).powi(2) / (rho * (rho - 1.0) - phin * denom));
            asym.p_loss_limit = Some((rho - 1.0) / rho);
        }
    }

    Ok(Mg1Report {
        et,
        el,
        ea_n,
        e_served_n: mu * et_n,
        p_loss,
        asymptotics: asym,
    })
}

/// Heavy-traffic predictions for load 1 + delta with n * delta -> C.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mg1HeavyTraffic {
    /// EL_n prediction exp(2C / rho2_tilde).
    pub el: f64,
    /// P_loss prediction delta / (1 + delta - exp(-2C / rho2_tilde)).
    pub p_loss: f64,
}

pub fn ht_mg1(params: &HeavyTrafficParams) -> Mg1HeavyTraffic {
    let theta = params.theta();
    Mg1HeavyTraffic {
        el: theta.exp(),
        p_loss: params.delta / (1.0 + params.delta - (-theta).exp()),
    }
}

/// Consecutive-loss report: coefficients c_{n,k} for k = 1..=kmax, the
/// per-busy-period expectations EL_{n,k} = c_{n,k} EL_n, and the n -> inf
/// limits.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CclReport {
    /// c_{n,k}, indexed by k - 1.
    pub c: Vec<f64>,
    /// EL_{n,k}, indexed by k - 1.
    pub el_k: Vec<f64>,
    /// Limit of EL_{n,k}/EL_n as n grows (equal to lim EL_{n,k} at the
    /// critical point, where EL_n = 1), indexed by k - 1.
    pub limit_k: Vec<f64>,
}

/// Computes c_{n,k} for k = 1..=kmax.
///
/// For n >= 1 the coefficient is the ratio of busy-period-difference
/// weighted upper tail sums; for n = 0 the run length during the single
/// service is the arrival count itself and EL_{0,k} = rho * tail(k).
pub fn ccl_coefficients(spec: &Mg1Spec, kmax: usize) -> Result<CclReport> {
    if kmax < 1 {
        return Err(Error::invalid("kmax must be >= 1"));
    }
    let pi = spec.coeffs()?;
    let el_n = *expected_losses(spec)?.last().expect("nonempty");

    let mut c = Vec::with_capacity(kmax);
    if spec.n == 0 {
        for k in 1..=kmax {
            c.push(pi.tail_sum(k));
        }
    } else {
        let et = busy_periods(spec)?;
        let deltas: Vec<f64> = (1..=spec.n).map(|j| et[j] - et[j - 1]).collect();
        let denom: f64 = deltas
            .iter()
            .enumerate()
            .map(|(idx, d)| d * pi.tail_sum(spec.n - (idx + 1) + 2))
            .sum();
        for k in 1..=kmax {
            let num: f64 = deltas
                .iter()
                .enumerate()
                .map(|(idx, d)| d * pi.tail_sum(spec.n - (idx + 1) + k + 1))
                .sum();
            c.push(num / denom);
        }
    }
    let el_k: Vec<f64> = c.iter().map(|&ck| ck * el_n).collect();
    let limit_k: Vec<f64> = (1..=kmax)
        .map(|k| ccl_limit(&spec.service, spec.lam, k))
        .collect::<Result<_>>()?;
    Ok(CclReport { c, el_k, limit_k })
}

/// Limit of the k-consecutive-loss quantity as the buffer grows.
///
/// Below the critical load the limit is 0. At the critical load it is the
/// series sum_{i>=1} i pi_{i+k} / pi_0 (both lim EL_{n,k} and the
/// coefficient limit, since EL_n = 1). Above, it is the limit of the
/// phi-weighted coefficient ratio, evaluated at doubling n until successive
/// values agree within 1e-10.
pub fn ccl_limit(service: &Dist, lam: f64, k: usize) -> Result<f64> {
    if k < 1 {
        return Err(Error::invalid("k must be >= 1"));
    }
    let rho = lam * service.mean();
    let pi = service.mixed_poisson_tol(lam, TAIL_TOL)?;
    match classify(rho) {
        Regime::Subcritical => Ok(0.0),
        Regime::Critical => {
            let mut num = 0.0;
            for i in 1..pi.len().saturating_sub(k) {
                num += i as f64 * pi.coeff(i + k);
            }
            Ok(num / pi.coeff(0))
        }
        Regime::Supercritical => {
            let phi = find_phi(service, lam)?.value;
            let ratio_at = |n: usize| -> f64 {
                // weights phi^{j-1} for j = 1..=n, largest weight at j = n;
                // normalized by phi^{n-1} so every weight stays <= 1.
                let mut num = 0.0;
                let mut den = 0.0;
                let mut w = 1.0;
                for j in (1..=n).rev() {
                    num += w * pi.tail_sum(n - j + k + 1);
                    den += w * pi.tail_sum(n - j + 2);
                    w *= phi;
                }
                num / den
            };
            let mut n = 16;
            let mut prev = ratio_at(n);
            for _ in 0..20 {
                n *= 2;
                let cur = ratio_at(n);
                if (cur - prev).abs() <= 1e-10 * prev.abs().max(1.0) {
                    return Ok(cur);
                }
                prev = cur;
            }
            Err(Error::numerical("coefficient ratio did not stabilize".to_string()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn mm1(lam: f64, mu: f64, n: usize) -> Mg1Spec {
        Mg1Spec::new(lam, Dist::exponential(mu).unwrap(), n).unwrap()
    }

    #[test]
    fn busy_periods_critical_mm1() {
        // lam = mu = 1: ET_j = j + 1
        let spec = mm1(1.0, 1.0, 12);
        let et = busy_periods(&spec).unwrap();
        for (j, &t) in et.iter().enumerate() {
            assert_relative_eq!(t, (j + 1) as f64, max_relative = 1e-11);
        }
    }

    #[test]
    fn busy_period_n0_is_mean_service() {
        let spec = Mg1Spec::new(0.7, Dist::erlang(3, 2.0).unwrap(), 0).unwrap();
        let et = busy_periods(&spec).unwrap();
        assert_eq!(et.len(), 1);
        assert_relative_eq!(et[0], 1.5);
    }

    #[test]
    fn supercritical_et_centering() {
        // lam=2, mu=1: ET_n - rho/(lam(1+lam B'(lam-lam phi)) phi^n) -> -1
        let spec = mm1(2.0, 1.0, 20);
        let r = report(&spec).unwrap();
        let a = &r.asymptotics;
        let phi = a.phi.unwrap();
        assert_relative_eq!(phi, 0.5, epsilon = 1e-12);
        let denom = a.amplitude_denom.unwrap();
        let main = r.et[20] - spec.load() / (spec.lam * denom * phi.powi(20));
        assert_relative_eq!(main, -1.0, epsilon = 1e-6);
        assert_relative_eq!(a.et_centered_limit.unwrap(), -1.0, epsilon = 1e-12);
    }

    #[test]
    fn losses_critical_are_one() {
        for service in [
            Dist::exponential(1.0).unwrap(),
            Dist::deterministic(1.0).unwrap(),
            Dist::erlang(2, 2.0).unwrap(),
        ] {
            let spec = Mg1Spec::new(1.0, service, 30).unwrap();
            for el in expected_losses(&spec).unwrap() {
                assert_relative_eq!(el, 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn losses_follow_own_recurrence() {
        // EL_k - 1 satisfies the same recurrence with Q_0 = rho - 1
        let spec = mm1(1.3, 1.0, 15);
        let el = expected_losses(&spec).unwrap();
        let pi = spec.coeffs().unwrap();
        for k in 0..15usize {
            let mut acc = 0.0;
            for j in 0..=k {
                acc += pi.coeff(j) * (el[k - j + 1] - 1.0);
            }
            let tail_correction: f64 = pi.tail_sum(k + 1);
            // residual includes only the truncated tail of the recurrence
            assert!(
                ((el[k] - 1.0) - acc).abs() <= 1e-9 * el[k].abs().max(1.0) + tail_correction,
                "recurrence residual too large at k={k}"
            );
        }
    }

    #[test]
    fn subcritical_losses_vanish() {
        let spec = mm1(0.5, 1.0, 40);
        let el = expected_losses(&spec).unwrap();
        assert!(el[40] < 1e-9);
    }

    #[test]
    fn supercritical_loss_expansion() {
        let spec = mm1(2.0, 1.0, 25);
        let r = report(&spec).unwrap();
        let el_n = *r.el.last().unwrap();
        let main = r.asymptotics.el_main_term.unwrap();
        assert_relative_eq!(el_n, main, max_relative = 1e-6);
    }

    #[test]
    fn loss_probability_critical_formula() {
        // rho = 1, M/M/1: P_loss = 1/(2 + n)
        for n in [0usize, 3, 10] {
            let spec = mm1(1.0, 1.0, n);
            let p = loss_probability(&spec).unwrap();
            assert_relative_eq!(p, 1.0 / (n as f64 + 2.0), max_relative = 1e-10);
        }
    }

    #[test]
    fn loss_probability_supercritical_limit() {
        let spec = mm1(2.0, 1.0, 40);
        let p = loss_probability(&spec).unwrap();
        assert_relative_eq!(p, 0.5, epsilon = 1e-6);
        let spec = mm1(0.5, 1.0, 40);
        assert!(loss_probability(&spec).unwrap() <= 1e-9);
    }

    #[test]
    fn wald_identities_hold() {
        for spec in [mm1(0.8, 1.0, 10), mm1(1.0, 1.0, 10), mm1(1.7, 1.0, 10)] {
            let r = report(&spec).unwrap();
            let et_n = *r.et.last().unwrap();
            let el_n = *r.el.last().unwrap();
            assert_relative_eq!(r.e_served_n, spec.mu() * et_n, epsilon = 1e-12);
            assert_relative_eq!(
                r.e_served_n + el_n,
                spec.lam * et_n + 1.0,
                epsilon = 1e-10
            );
        }
    }

    #[test]
    fn heavy_traffic_plug_ins() {
        let p = HeavyTrafficParams::new(0.05, 0.0, 2.0).unwrap();
        assert_relative_eq!(ht_mg1(&p).el, 1.0);
        let p = HeavyTrafficParams::new(0.05, 1.0, 2.0).unwrap();
        let ht = ht_mg1(&p);
        assert_relative_eq!(ht.el, 1.0f64.exp(), max_relative = 1e-12);
        assert_relative_eq!(ht.p_loss, 0.05 / (1.05 - (-1.0f64).exp()), max_relative = 1e-12);
    }

    #[test]
    fn ccl_mm1_critical_is_geometric_in_k() {
        let spec = mm1(1.0, 1.0, 50);
        let rep = ccl_coefficients(&spec, 5).unwrap();
        for (idx, &c) in rep.c.iter().enumerate() {
            let k = idx + 1;
            assert_relative_eq!(c, 0.5f64.powi(k as i32 - 1), epsilon = 1e-9);
        }
        assert_relative_eq!(rep.c[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(rep.el_k[0], 1.0, epsilon = 1e-10);
    }

    #[test]
    fn ccl_n0_frozen_example() {
        // exponential rho = 1, k = 2: EL_{0,2} = 1 - (pi_0 + pi_1) = 1/4
        let spec = mm1(1.0, 1.0, 0);
        let rep = ccl_coefficients(&spec, 2).unwrap();
        assert_relative_eq!(rep.el_k[1], 0.25, epsilon = 1e-12);
    }

    #[test]
    fn ccl_coefficients_monotone_in_k() {
        let spec = Mg1Spec::new(1.1, Dist::erlang(2, 2.2).unwrap(), 8).unwrap();
        let rep = ccl_coefficients(&spec, 6).unwrap();
        for w in rep.c.windows(2) {
            assert!(w[1] <= w[0] + 1e-14);
        }
        assert!(rep.c.iter().all(|&c| (0.0..=1.0).contains(&c)));
    }

    #[test]
    fn ccl_limit_values() {
        // critical exponential: 2^{1-k}
        let d = Dist::exponential(1.0).unwrap();
        assert_relative_eq!(ccl_limit(&d, 1.0, 2).unwrap(), 0.5, epsilon = 1e-8);
        assert_relative_eq!(ccl_limit(&d, 1.0, 1).unwrap(), 1.0, epsilon = 1e-10);
        // subcritical: zero
        assert_eq!(ccl_limit(&d, 0.5, 3).unwrap(), 0.0);
        // supercritical: ratio limit matches finite-n coefficients
        let lam = 2.0;
        let limit = ccl_limit(&d, lam, 2).unwrap();
        let spec = mm1(lam, 1.0, 400);
        let rep = ccl_coefficients(&spec, 2).unwrap();
        assert_relative_eq!(limit, rep.c[1], max_relative = 1e-6);
    }
}
