//! Message-loss model for a finite packet buffer fed by batch messages.
//!
//! A message of kappa packets fits while the total packet count stays within
//! the buffer, which induces a random acceptance threshold zeta(N) measured
//! in messages. Every expectation of the model is a mixture of fixed-buffer
//! quantities over the exact law of zeta, and a message is lost when it is
//! refused (buffer overflow) or marked (corruption, probability p).

use serde::{Deserialize, Serialize};

use crate::asymptotics::{classify, HeavyTrafficParams, Regime};
use crate::convrec::find_phi;
use crate::dist::Dist;
use crate::error::{Error, Result};
use crate::mg1::{self, Mg1Spec};

/// Law of the per-message packet count; bounded support, kappa >= 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchLaw {
    support: Vec<(u32, f64)>,
}

impl BatchLaw {
    pub fn new(mut support: Vec<(u32, f64)>) -> Result<Self> {
        support.retain(|&(_, p)| p != 0.0);
        if support.is_empty() {
            return Err(Error::invalid("batch law needs at least one atom"));
        }
        support.sort_by_key(|&(k, _)| k);
        if support.iter().any(|&(k, _)| k < 1) {
            return Err(Error::invalid("packet counts must be >= 1"));
        }
        if support.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::invalid("duplicate packet count in batch law"));
        }
        if support.iter().any(|&(_, p)| !(p > 0.0) || !p.is_finite()) {
            return Err(Error::invalid("batch probabilities must be positive"));
        }
        let total: f64 = support.iter().map(|&(_, p)| p).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!("batch probabilities must sum to 1, got {total}")));
        }
        Ok(BatchLaw { support })
    }

    pub fn deterministic(packets: u32) -> Result<Self> {
        BatchLaw::new(vec![(packets, 1.0)])
    }

    pub fn support(&self) -> &[(u32, f64)] {
        &self.support
    }

    pub fn min_packets(&self) -> u32 {
        self.support.first().expect("nonempty").0
    }

    pub fn max_packets(&self) -> u32 {
        self.support.last().expect("nonempty").0
    }
}

/// Exact law of the acceptance threshold zeta for one buffer size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZetaDist {
    /// P{zeta = m} indexed by m.
    pmf: Vec<f64>,
    mean: f64,
    /// Buffer too small for even one largest message: zeta may be 0.
    pub undersized: bool,
}

impl ZetaDist {
    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn prob(&self, m: usize) -> f64 {
        self.pmf.get(m).copied().unwrap_or(0.0)
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn upper(&self) -> usize {
        self.pmf.len() - 1
    }

    pub fn lower(&self) -> usize {
        self.pmf.iter().position(|&p| p > 0.0).unwrap_or(0)
    }

    /// E[g(zeta)] for an arbitrary per-threshold value table.
    pub fn mix(&self, values: &[f64]) -> f64 {
        self.pmf
            .iter()
            .zip(values)
            .map(|(&p, &v)| p * v)
            .sum()
    }
}

/// Exact pmf of zeta = sup{m : kappa_1 + ... + kappa_m <= capacity} by
/// dynamic programming over partial-sum distributions on the integer
/// lattice.
pub fn zeta_distribution(batch: &BatchLaw, capacity: u32) -> ZetaDist {
    let cap = capacity as usize;
    // mass[s] = P{kappa_1 + .. + kappa_m = s, all partial sums <= cap}
    let mut mass = vec![0.0f64; cap + 1];
    mass[0] = 1.0;
    let mut survive_prev = 1.0f64; // P{zeta >= 0} = 1
    let mut pmf = Vec::new();
    loop {
        let mut next = vec![0.0f64; cap + 1];
        for (s, &p) in mass.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            for &(k, pk) in batch.support() {
                let t = s + k as usize;
                if t <= cap {
                    next[t] += p * pk;
                }
            }
        }
        let survive: f64 = next.iter().sum();
        pmf.push((survive_prev - survive).max(0.0));
        if survive == 0.0 {
            break;
        }
        survive_prev = survive;
        mass = next;
    }
    let undersized = pmf[0] > 0.0;
    let mean = pmf.iter().enumerate().map(|(m, &p)| m as f64 * p).sum();
    ZetaDist { pmf, mean, undersized }
}

/// The full model: an M/GI/1 message queue whose acceptance threshold is
/// zeta(capacity), plus the marking probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MessageSpec {
    pub lam: f64,
    pub service: Dist,
    pub batch: BatchLaw,
    /// Buffer size in packets (N).
    pub capacity: u32,
    /// Probability a message is marked (lost to corruption).
    pub p_mark: f64,
}

impl MessageSpec {
    pub fn new(lam: f64, service: Dist, batch: BatchLaw, capacity: u32, p_mark: f64) -> Result<Self> {
        if !(lam > 0.0) || !lam.is_finite() {
            return Err(Error::invalid("arrival rate must be positive"));
        }
        if !(0.0..=1.0).contains(&p_mark) {
            return Err(Error::invalid("marking probability must lie in [0, 1]"));
        }
        service.validate()?;
        Ok(MessageSpec { lam, service, batch, capacity, p_mark })
    }

    pub fn load(&self) -> f64 {
        self.lam * self.service.mean()
    }

    fn mg1_at(&self, n: usize) -> Mg1Spec {
        Mg1Spec { lam: self.lam, service: self.service.clone(), n }
    }
}

/// Per-busy-period expectations of the message model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MessageReport {
    pub zeta: ZetaDist,
    /// Mean busy period E T_zeta.
    pub et_zeta: f64,
    /// Processed messages E P_zeta = mu E T_zeta.
    pub ep: f64,
    /// Marked messages E M_zeta = p E P_zeta.
    pub em: f64,
    /// Refused messages E R_zeta (mixture of fixed-buffer loss counts).
    pub er: f64,
    /// Loss probability (refused or marked).
    pub pi: f64,
    pub p_mark: f64,
}

pub fn message_expectations(spec: &MessageSpec) -> Result<MessageReport> {
    let zeta = zeta_distribution(&spec.batch, spec.capacity);
    let upper = zeta.upper();
    let mg1_spec = spec.mg1_at(upper);
    let et = mg1::busy_periods(&mg1_spec)?;
    let el = mg1::expected_losses(&mg1_spec)?;
    let et_zeta = zeta.mix(&et);
    let ep = et_zeta / spec.service.mean();
    let em = spec.p_mark * ep;
    let er = zeta.mix(&el);
    let pi = (er + spec.p_mark * ep) / (er + ep);
    Ok(MessageReport { zeta, et_zeta, ep, em, er, pi, p_mark: spec.p_mark })
}

/// Regime-matched limits of the message expectations as the buffer grows.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MessageLimits {
    pub regime: Regime,
    /// lim E P: 1/(1 - rho) below the critical load.
    pub ep_limit: Option<f64>,
    /// Critical: lim E P / E zeta = 2 / rho_2.
    pub ep_per_zeta: Option<f64>,
    /// Supercritical: E[phi^{-zeta}]/denom + 1/(1 - rho).
    pub ep_supercritical: Option<f64>,
    /// lim E R: 0 below, 1 at the critical load.
    pub er_limit: Option<f64>,
    /// Supercritical: (rho - 1) E[phi^{-zeta}] / denom.
    pub er_supercritical: Option<f64>,
    /// lim Pi: p at and below the critical load; the saturated expression
    /// above it.
    pub pi_limit: f64,
}

pub fn message_limits(spec: &MessageSpec) -> Result<MessageLimits> {
    let rho = spec.load();
    let regime = classify(rho);
    let p = spec.p_mark;
    match regime {
        Regime::Subcritical => Ok(MessageLimits {
            regime,
            ep_limit: Some(1.0 / (1.0 - rho)),
            ep_per_zeta: None,
            ep_supercritical: None,
            er_limit: Some(0.0),
            er_supercritical: None,
            pi_limit: p,
        }),
        Regime::Critical => {
            let rho2 = spec.service.moments(spec.lam).rho2;
            Ok(MessageLimits {
                regime,
                ep_limit: None,
                ep_per_zeta: Some(2.0 / rho2),
                ep_supercritical: None,
                er_limit: Some(1.0),
                er_supercritical: None,
                pi_limit: p,
            })
        }
        Regime::Supercritical => {
            let phi = find_phi(&spec.service, spec.lam)?.value;
            let denom = 1.0 + spec.lam * spec.service.lst_deriv_analytic(spec.lam * (1.0 - phi));
            let zeta = zeta_distribution(&spec.batch, spec.capacity);
            let grow: f64 = zeta
                .pmf()
                .iter()
                .enumerate()
                .map(|(m, &pr)| pr * phi.powi(-(m as i32)))
                .sum();
            let ep = grow / denom + 1.0 / (1.0 - rho);
            let er = (rho - 1.0) * grow / denom;
            // saturated loss probability (p + rho - 1)/rho with the
            // first-order geometric correction
            let x = denom / grow;
            let pi = (p + rho - 1.0) / rho * ((rho - 1.0) + p * x) / ((rho - 1.0) + x);
            Ok(MessageLimits {
                regime,
                ep_limit: None,
                ep_per_zeta: None,
                ep_supercritical: Some(ep),
                er_limit: None,
                er_supercritical: Some(er),
                pi_limit: pi,
            })
        }
    }
}

/// Critical-regime refinement of the loss probability:
/// Pi = p + (1 - p) rho_2 / (2 E zeta) up to O(log N / N^2).
pub fn critical_pi_refinement(spec: &MessageSpec) -> Result<f64> {
    if classify(spec.load()) != Regime::Critical {
        return Err(Error::regime("refinement applies at the critical load".to_string()));
    }
    let rho2 = spec.service.moments(spec.lam).rho2;
    let zeta = zeta_distribution(&spec.batch, spec.capacity);
    Ok(spec.p_mark + (1.0 - spec.p_mark) * rho2 / (2.0 * zeta.mean()))
}

/// Heavy-traffic predictions for load 1 + delta, delta * zeta -> C.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MessageHeavyTraffic {
    /// Processed messages: (e^theta - 1)/delta, or (2/rho2) E zeta at C = 0.
    pub ep: f64,
    /// Refused messages: e^theta (1 at C = 0).
    pub er: f64,
    /// Loss probability for p/delta -> d_ratio; for unbounded ratio the
    /// marking dominates and Pi ~ p.
    pub pi: f64,
}

pub fn message_heavy_traffic(
    params: &HeavyTrafficParams,
    p_mark: f64,
    d_ratio: Option<f64>,
    e_zeta: f64,
) -> MessageHeavyTraffic {
    let theta = params.theta();
    if params.c == 0.0 {
        return MessageHeavyTraffic {
            ep: 2.0 / params.rho2_tilde * e_zeta,
            er: 1.0,
            pi: p_mark + params.rho2_tilde / (2.0 * e_zeta),
        };
    }
    let ep = (theta.exp() - 1.0) / params.delta;
    let er = theta.exp();
    let pi = match d_ratio {
        Some(d) => (d + theta.exp() / (theta.exp() - 1.0)) * params.delta,
        None => p_mark,
    };
    MessageHeavyTraffic { ep, er, pi }
}

/// Predicted increment Pi_{n+1} - Pi_n for a fixed packet count per message
/// at the critical load.
pub fn pi_increment_prediction(n: usize, rho2: f64, p_mark: f64) -> f64 {
    let n = n as f64;
    let s = 2.0 / rho2;
    (1.0 / (n * (n + 1.0)) * s * (p_mark - 1.0)) / ((s + 1.0 / (n + 1.0)) * (s + 1.0 / n))
}

/// Consecutive refused messages: the mixture of fixed-buffer k-consecutive
/// loss expectations, plus its large-buffer limit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RefusedReport {
    pub k: usize,
    /// E R_{zeta,k}.
    pub er_k: f64,
    /// Large-buffer limit (0 below the critical load; the tail series at it;
    /// the coefficient-ratio limit scaled by E R above it).
    pub limit: f64,
}

pub fn consecutive_refused(spec: &MessageSpec, k: usize) -> Result<RefusedReport> {
    if k < 1 {
        return Err(Error::invalid("k must be >= 1"));
    }
    let zeta = zeta_distribution(&spec.batch, spec.capacity);
    let upper = zeta.upper();
    let mg1_spec = spec.mg1_at(upper);
    let pi = mg1_spec.coeffs()?;
    let rho = spec.load();
    let et = mg1::busy_periods(&mg1_spec)?;
    let el = mg1::expected_losses(&mg1_spec)?;

    // EL_{i,k} per buffer size i, reusing the shared busy-period prefix.
    let mut el_k = Vec::with_capacity(upper + 1);
    el_k.push(rho * pi.tail_sum(k));
    for i in 1..=upper {
        let mut num = 0.0;
        let mut den = 0.0;
        for j in 1..=i {
            let d = et[j] - et[j - 1];
            num += d * pi.tail_sum(i - j + k + 1);
            den += d * pi.tail_sum(i - j + 2);
        }
        el_k.push(num / den * el[i]);
    }
    let er_k = zeta.mix(&el_k);

    let limit = match classify(rho) {
        Regime::Subcritical => 0.0,
        Regime::Critical => mg1::ccl_limit(&spec.service, spec.lam, k)?,
        Regime::Supercritical => {
            let ratio = mg1::ccl_limit(&spec.service, spec.lam, k)?;
            let lim = message_limits(spec)?;
            ratio * lim.er_supercritical.unwrap_or(f64::NAN)
        }
    };
    Ok(RefusedReport { k, er_k, limit })
}

/// Heavy-traffic limit of E R_{zeta,k}: e^theta times the critical tail
/// series.
pub fn refused_heavy_traffic(
    params: &HeavyTrafficParams,
    service: &Dist,
    lam_critical: f64,
    k: usize,
) -> Result<f64> {
    let series = mg1::ccl_limit(service, lam_critical, k)?;
    Ok(params.theta().exp() * series)
}

/// One row of a redundancy scan: after adding `redundant` packets the
/// marking probability shrinks geometrically while the load grows.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RedundancyRow {
    pub redundant: u32,
    pub p_mark: f64,
    pub load: f64,
    pub pi: f64,
    /// The scaled load exceeds 1: the large-buffer regime changes.
    pub overload: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RedundancyScan {
    pub rows: Vec<RedundancyRow>,
    /// Redundancy count minimizing the loss probability.
    pub best: u32,
}

/// Reevaluates the loss probability with p/gamma^r and service mean scaled
/// by gamma_tilde^r, for r = 0..=max_redundant.
pub fn redundancy_scan(
    spec: &MessageSpec,
    gamma: f64,
    gamma_tilde: f64,
    max_redundant: u32,
) -> Result<RedundancyScan> {
    if !(gamma > 1.0) {
        return Err(Error::invalid("gamma must exceed 1"));
    }
    if !(gamma_tilde >= 1.0) {
        return Err(Error::invalid("gamma_tilde must be >= 1"));
    }
    let mut rows = Vec::with_capacity(max_redundant as usize + 1);
    for r in 0..=max_redundant {
        let scale = gamma_tilde.powi(r as i32);
        let scan_spec = MessageSpec {
            lam: spec.lam,
            service: spec.service.scaled(scale)?,
            batch: spec.batch.clone(),
            capacity: spec.capacity,
            p_mark: spec.p_mark / gamma.powi(r as i32),
        };
        let report = message_expectations(&scan_spec)?;
        rows.push(RedundancyRow {
            redundant: r,
            p_mark: scan_spec.p_mark,
            load: scan_spec.load(),
            pi: report.pi,
            overload: scan_spec.load() > 1.0,
        });
    }
    let best = rows
        .iter()
        .min_by(|a, b| a.pi.total_cmp(&b.pi))
        .expect("nonempty")
        .redundant;
    Ok(RedundancyScan { rows, best })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit_batch() -> BatchLaw {
        BatchLaw::deterministic(1).unwrap()
    }

    /// Exhaustive enumeration oracle for the zeta pmf over small supports.
    fn zeta_by_enumeration(batch: &BatchLaw, capacity: u32) -> Vec<f64> {
        let mut pmf = vec![0.0f64; capacity as usize + 2];
        // depth-first over sequences with partial sums <= capacity
        fn walk(batch: &BatchLaw, capacity: u32, sum: u32, m: usize, prob: f64, pmf: &mut Vec<f64>) {
            // probability the next message does not fit, ending zeta at m
            let mut stop = 0.0;
            for &(k, pk) in batch.support() {
                if sum + k > capacity {
                    stop += pk;
                } else {
                    walk(batch, capacity, sum + k, m + 1, prob * pk, pmf);
                }
            }
            pmf[m] += prob * stop;
        }
        walk(batch, capacity, 0, 0, 1.0, &mut pmf);
        while pmf.len() > 1 && *pmf.last().unwrap() == 0.0 {
            pmf.pop();
        }
        pmf
    }

    #[test]
    fn zeta_deterministic_batches() {
        let batch = BatchLaw::deterministic(3).unwrap();
        let z = zeta_distribution(&batch, 10);
        assert_eq!(z.prob(3), 1.0);
        assert_relative_eq!(z.mean(), 3.0);
        let unit = zeta_distribution(&unit_batch(), 5);
        assert_eq!(unit.prob(5), 1.0);
    }

    #[test]
    fn zeta_matches_enumeration() {
        let laws = [
            BatchLaw::new(vec![(1, 0.5), (2, 0.5)]).unwrap(),
            BatchLaw::new(vec![(1, 0.2), (2, 0.5), (3, 0.3)]).unwrap(),
            BatchLaw::new(vec![(2, 0.7), (3, 0.3)]).unwrap(),
        ];
        for law in &laws {
            for cap in 1..=12u32 {
                let dp = zeta_distribution(law, cap);
                let oracle = zeta_by_enumeration(law, cap);
                for (m, &p) in oracle.iter().enumerate() {
                    assert_relative_eq!(dp.prob(m), p, epsilon = 1e-14);
                }
                let total: f64 = dp.pmf().iter().sum();
                assert_relative_eq!(total, 1.0, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn zeta_undersized_buffer() {
        let batch = BatchLaw::new(vec![(3, 0.5), (4, 0.5)]).unwrap();
        let z = zeta_distribution(&batch, 2);
        assert!(z.undersized);
        assert_eq!(z.prob(0), 1.0);
    }

    #[test]
    fn degenerate_batch_reduces_to_fixed_buffer() {
        let service = Dist::exponential(1.0).unwrap();
        let spec = MessageSpec::new(
            1.3,
            service.clone(),
            BatchLaw::deterministic(2).unwrap(),
            9, // floor(9/2) = 4
            0.0,
        )
        .unwrap();
        let report = message_expectations(&spec).unwrap();
        let base = Mg1Spec::new(1.3, service, 4).unwrap();
        let et = mg1::busy_periods(&base).unwrap();
        let el = mg1::expected_losses(&base).unwrap();
        assert_eq!(report.et_zeta, et[4]);
        assert_eq!(report.er, el[4]);
        let p_loss = mg1::loss_probability(&base).unwrap();
        assert_relative_eq!(report.pi, p_loss, max_relative = 1e-14);
    }

    #[test]
    fn refusals_critical_are_one() {
        let spec = MessageSpec::new(
            1.0,
            Dist::exponential(1.0).unwrap(),
            BatchLaw::new(vec![(1, 0.3), (2, 0.4), (3, 0.3)]).unwrap(),
            12,
            0.2,
        )
        .unwrap();
        let report = message_expectations(&spec).unwrap();
        assert_relative_eq!(report.er, 1.0, epsilon = 1e-9);
        assert_relative_eq!(report.em, 0.2 * report.ep, epsilon = 1e-12);
    }

    #[test]
    fn wald_identity_er() {
        let spec = MessageSpec::new(
            0.9,
            Dist::erlang(2, 2.5).unwrap(),
            BatchLaw::new(vec![(1, 0.5), (2, 0.5)]).unwrap(),
            10,
            0.05,
        )
        .unwrap();
        let report = message_expectations(&spec).unwrap();
        let rho = spec.load();
        assert_relative_eq!(report.er, (rho - 1.0) * report.ep + 1.0, epsilon = 1e-10);
    }

    #[test]
    fn pi_limit_is_p_mark_below_critical() {
        let batch = BatchLaw::new(vec![(1, 0.5), (2, 0.5)]).unwrap();
        for cap in [40u32, 80] {
            let spec = MessageSpec::new(
                0.5,
                Dist::exponential(1.0).unwrap(),
                batch.clone(),
                cap,
                0.125,
            )
            .unwrap();
            let report = message_expectations(&spec).unwrap();
            assert_relative_eq!(report.pi, 0.125, epsilon = 1e-6);
            let limits = message_limits(&spec).unwrap();
            assert_eq!(limits.pi_limit, 0.125);
            assert_relative_eq!(limits.ep_limit.unwrap(), 2.0);
        }
    }

    #[test]
    fn heavy_traffic_plug_ins() {
        let params = HeavyTrafficParams::new(0.05, 1.0, 2.0).unwrap();
        let ht = message_heavy_traffic(&params, 0.0, Some(0.0), 20.0);
        assert_relative_eq!(ht.er, 1.0f64.exp(), max_relative = 1e-12);
        let e = 1.0f64.exp();
        assert_relative_eq!(ht.pi, 0.05 * e / (e - 1.0), max_relative = 1e-12);
        // subcritical-with-vanishing-p variant: Pi ~ p
        let ht = message_heavy_traffic(&params, 0.01, None, 20.0);
        assert_relative_eq!(ht.pi, 0.01);
    }

    #[test]
    fn consecutive_refused_cases() {
        // rho < 1: limit 0
        let spec = MessageSpec::new(
            0.5,
            Dist::exponential(1.0).unwrap(),
            BatchLaw::new(vec![(1, 0.5), (2, 0.5)]).unwrap(),
            20,
            0.0,
        )
        .unwrap();
        let rep = consecutive_refused(&spec, 2).unwrap();
        assert_eq!(rep.limit, 0.0);
        assert!(rep.er_k < 1e-6);

        // rho = 1, exponential, k = 2: limit 1/2; k = 1 limit equals 1
        let spec = MessageSpec::new(
            1.0,
            Dist::exponential(1.0).unwrap(),
            BatchLaw::new(vec![(1, 0.5), (2, 0.5)]).unwrap(),
            30,
            0.0,
        )
        .unwrap();
        let rep = consecutive_refused(&spec, 2).unwrap();
        assert_relative_eq!(rep.limit, 0.5, epsilon = 1e-8);
        assert_relative_eq!(rep.er_k, 0.5, epsilon = 1e-9);
        let rep1 = consecutive_refused(&spec, 1).unwrap();
        assert_relative_eq!(rep1.limit, 1.0, epsilon = 1e-9);
        assert_relative_eq!(rep1.er_k, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn redundancy_scan_behaviour() {
        let spec = MessageSpec::new(
            0.8,
            Dist::exponential(1.0).unwrap(),
            BatchLaw::new(vec![(1, 0.5), (2, 0.5)]).unwrap(),
            16,
            0.1,
        )
        .unwrap();
        // free redundancy: loss probability nonincreasing in r
        let free = redundancy_scan(&spec, 10.0, 1.0, 4).unwrap();
        for w in free.rows.windows(2) {
            assert!(w[1].pi <= w[0].pi + 1e-12);
        }
        assert_relative_eq!(
            free.rows[0].pi,
            message_expectations(&spec).unwrap().pi,
            epsilon = 1e-15
        );
        // costly redundancy still helps while the load stays near 1
        let scan = redundancy_scan(&spec, 10.0, 1.05, 4).unwrap();
        assert!(scan.best > 0, "expected redundancy to pay off, rows: {:?}", scan.rows);
    }
}
