//! Level-dependent single-server model of a finite dam and its control
//! problem.
//!
//! Water units arrive as a Poisson stream; the inter-departure law is `b1`
//! while the content sits within the working band (1..=n at the interval
//! start) and `b2` above it; departures freeze at the empty level. The
//! stationary split of time between the empty level, the working band, and
//! the overflow band comes from one convolution recurrence. The control
//! problem tunes the mean of `b1` near the critical point, trading the
//! penalties for hitting either boundary against level-dependent water
//! costs.

use serde::{Deserialize, Serialize};

use crate::asymptotics::{classify, Regime};
use crate::convrec::{find_phi, solve_q};
use crate::dist::{Dist, TAIL_TOL};
use crate::error::{Error, Result};

/// Default pre-limit size at which the cost-weighting functions are
/// evaluated, with a doubling check before use.
pub const COST_N_EVAL: usize = 2000;

/// Relative agreement demanded between the cost part at `n_eval` and at
/// `2 * n_eval`.
const COST_DOUBLING_TOL: f64 = 1e-6;

/// Absolute tolerance of the golden-section search over C.
const C_SEARCH_TOL: f64 = 1e-5;

/// Argmin below this is treated as sitting on the C = 0 boundary.
const C_ZERO_TOL: f64 = 1e-4;

/// Water-cost profile c_1..c_n, nonincreasing in the level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CostProfile {
    Zero,
    Constant { value: f64 },
    /// c_i = base + span * (n - i)/(n - 1): highest cost at the lowest
    /// level, `base` at the top.
    Linear { base: f64, span: f64 },
    /// Explicit list c_1..c_n; usable only at its own length.
    Explicit { values: Vec<f64> },
}

impl CostProfile {
    pub fn validate(&self) -> Result<()> {
        match self {
            CostProfile::Zero => Ok(()),
            CostProfile::Constant { value } => {
                if *value < 0.0 {
                    Err(Error::invalid("constant cost must be nonnegative"))
                } else {
                    Ok(())
                }
            }
            CostProfile::Linear { base, span } => {
                if *base < 0.0 || *span < 0.0 {
                    Err(Error::invalid("linear cost needs base >= 0 and span >= 0"))
                } else {
                    Ok(())
                }
            }
            CostProfile::Explicit { values } => {
                if values.is_empty() {
                    return Err(Error::invalid("explicit cost list must be nonempty"));
                }
                if values.iter().any(|&c| c < 0.0 || !c.is_finite()) {
                    return Err(Error::invalid("costs must be nonnegative and finite"));
                }
                if values.windows(2).any(|w| w[1] > w[0] + 1e-12) {
                    return Err(Error::invalid("costs must be nonincreasing in the level"));
                }
                Ok(())
            }
        }
    }

    /// Materializes c_1..c_n.
    pub fn values(&self, n: usize) -> Result<Vec<f64>> {
        match self {
            CostProfile::Zero => Ok(vec![0.0; n]),
            CostProfile::Constant { value } => Ok(vec![*value; n]),
            CostProfile::Linear { base, span } => {
                let den = (n - 1).max(1) as f64;
                Ok((1..=n)
                    .map(|i| base + span * (n - i) as f64 / den)
                    .collect())
            }
            CostProfile::Explicit { values } => {
                if values.len() != n {
                    return Err(Error::invalid(format!(
                        "explicit cost list has length {}, needed {n}",
                        values.len()
                    )));
                }
                Ok(values.clone())
            }
        }
    }

    /// Whether the profile can be evaluated at an arbitrary size.
    fn resizable(&self) -> bool {
        !matches!(self, CostProfile::Explicit { .. })
    }
}

/// A dam instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DamSpec {
    pub lam: f64,
    /// Inter-departure law in the working band; its mean is the control.
    pub b1: Dist,
    /// Inter-departure law above the upper level; must keep the system
    /// stable.
    pub b2: Dist,
    /// Band width (upper level minus lower level).
    pub n: usize,
    /// Penalty slope for sitting at the lower boundary.
    pub j1: f64,
    /// Penalty slope for sitting above the upper boundary.
    pub j2: f64,
    pub costs: CostProfile,
}

impl DamSpec {
    pub fn new(
        lam: f64,
        b1: Dist,
        b2: Dist,
        n: usize,
        j1: f64,
        j2: f64,
        costs: CostProfile,
    ) -> Result<Self> {
        if !(lam > 0.0) || !lam.is_finite() {
            return Err(Error::invalid("arrival rate must be positive"));
        }
        if n < 1 {
            return Err(Error::invalid("band width must be >= 1"));
        }
        if j1 < 0.0 || j2 < 0.0 {
            return Err(Error::invalid("penalty slopes must be nonnegative"));
        }
        b1.validate()?;
        b2.validate()?;
        costs.validate()?;
        let spec = DamSpec { lam, b1, b2, n, j1, j2, costs };
        if spec.rho2() >= 1.0 {
            return Err(Error::invalid(format!(
                "overflow-band load rho_2 = {} must stay below 1",
                spec.rho2()
            )));
        }
        Ok(spec)
    }

    pub fn rho1(&self) -> f64 {
        self.lam * self.b1.mean()
    }

    pub fn rho2(&self) -> f64 {
        self.lam * self.b2.mean()
    }

    /// Limiting second scaled moment of the working-band law along the
    /// critical family: m2/m1^2, scale-invariant.
    pub fn rho12_tilde(&self) -> f64 {
        self.b1.shape_rho2()
    }

    /// Combined overflow penalty weight j2 * rho_2 / (1 - rho_2).
    pub fn overflow_weight(&self) -> f64 {
        self.j2 * self.rho2() / (1.0 - self.rho2())
    }

    /// The same dam with the working-band mean set so rho_1 = `target`.
    pub fn with_rho1(&self, target: f64) -> Result<DamSpec> {
        let mut spec = self.clone();
        spec.b1 = self.b1.with_mean(target / self.lam)?;
        Ok(spec)
    }
}

/// Stationary split of time across the three bands.
///
/// `q[i-1]` is the fraction of time in inter-departure intervals that began
/// at level i (all of which run under `b1`); `p2` covers intervals that
/// began above the band; `p1` is the idle fraction. The three parts
/// partition time, which is the normalization check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DamStationary {
    /// Served-per-busy-period means of the band-restricted system,
    /// nu_0..nu_n.
    pub nu1: Vec<f64>,
    pub p1: f64,
    pub p2: f64,
    /// q_1..q_n.
    pub q: Vec<f64>,
}

pub fn stationary(spec: &DamSpec) -> Result<DamStationary> {
    let rho1 = spec.rho1();
    let rho2 = spec.rho2();
    let coeffs = spec.b1.mixed_poisson_tol(spec.lam, TAIL_TOL)?;
    let nu1 = solve_q(&coeffs, 1.0, spec.n)?.values().to_vec();
    let nu_n = *nu1.last().expect("nonempty");
    let h = 1.0 + (rho1 - rho2) * nu_n;
    let p1 = (1.0 - rho2) / h;
    let p2 = rho2 * (1.0 + (rho1 - 1.0) * nu_n) / h;
    let mut q = Vec::with_capacity(spec.n);
    for i in 1..=spec.n {
        // the i = 1 difference is taken against 0, which is what makes the
        // three parts partition time exactly
        let prev = if i == 1 { 0.0 } else { nu1[i - 1] };
        q.push(rho1 * p1 * (nu1[i] - prev));
    }
    let total = p1 + p2 + q.iter().sum::<f64>();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::numerical(format!(
            "stationary normalization failed: total = {total}"
        )));
    }
    Ok(DamStationary { nu1, p1, p2, q })
}

/// Regime-matched limits of the stationary probabilities.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DamLimits {
    pub regime: Regime,
    /// rho_1 < 1: lim p1 = 1 - rho_1.
    pub p1_limit: Option<f64>,
    /// rho_1 < 1 or > 1: lim p2.
    pub p2_limit: Option<f64>,
    /// rho_1 = 1: lim n p1 = rho_{1,2}/2.
    pub n_p1_limit: Option<f64>,
    /// rho_1 = 1: lim n p2.
    pub n_p2_limit: Option<f64>,
    /// rho_1 = 1: lim n q_{n-i} = 1 for every fixed offset.
    pub n_q_top_limit: Option<f64>,
    /// rho_1 = 1: limiting increment of the served-count sequence,
    /// 2/rho_{1,2}.
    pub nu_increment: Option<f64>,
    /// rho_1 > 1: lim p1 / phi^n.
    pub p1_geometric_scale: Option<f64>,
    pub phi: Option<f64>,
}

pub fn dam_limits(spec: &DamSpec) -> Result<DamLimits> {
    let rho1 = spec.rho1();
    let rho2 = spec.rho2();
    let regime = classify(rho1);
    let rho12 = spec.b1.moments(spec.lam).rho2;
    let mut out = DamLimits {
        regime,
        p1_limit: None,
        p2_limit: None,
        n_p1_limit: None,
        n_p2_limit: None,
        n_q_top_limit: None,
        nu_increment: None,
        p1_geometric_scale: None,
        phi: None,
    };
    match regime {
        Regime::Subcritical => {
            out.p1_limit = Some(1.0 - rho1);
            out.p2_limit = Some(0.0);
        }
        Regime::Critical => {
            out.n_p1_limit = Some(rho12 / 2.0);
            out.n_p2_limit = Some(rho2 / (1.0 - rho2) * rho12 / 2.0);
            out.n_q_top_limit = Some(1.0);
            out.nu_increment = Some(2.0 / rho12);
        }
        Regime::Supercritical => {
            let phi = find_phi(&spec.b1, spec.lam)?.value;
            let denom = 1.0 + spec.lam * spec.b1.lst_deriv_analytic(spec.lam * (1.0 - phi));
            out.phi = Some(phi);
            out.p1_geometric_scale = Some((1.0 - rho2) * denom / (rho1 - rho2));
            out.p2_limit = Some(rho2 * (rho1 - 1.0) / (rho1 - rho2));
        }
    }
    Ok(out)
}

/// Which side of the critical point the control sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// rho_1 = 1 + delta: the content drifts toward the overflow band.
    Upper,
    /// rho_1 = 1 - delta: the content drifts toward the empty level.
    Lower,
}

/// Heavy-traffic predictions for p1, p2 and the geometric q-profile near
/// the top of the band, at rho_1 = 1 +/- delta with n delta -> C.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DamHeavyTraffic {
    pub side: Side,
    pub p1: f64,
    pub p2: f64,
    /// q_{n-j} ~ q_profile_scale * q_profile_ratio^j.
    pub q_profile_scale: f64,
    pub q_profile_ratio: f64,
}

/// Heavy-traffic stationary predictions.
///
/// Both sides are expressed through theta = 2C/rho12_tilde; the lower side
/// mirrors the upper one with the boundary roles swapped, which keeps the
/// C -> 0 limits consistent with the critical-regime values (the form
/// printed for the subcritical side elsewhere diverges at C -> 0 and fails
/// that consistency check).
pub fn dam_heavy_traffic(spec: &DamSpec, delta: f64, c: f64, side: Side) -> Result<DamHeavyTraffic> {
    if !(delta > 0.0) || !(c > 0.0) {
        return Err(Error::invalid("delta and C must be positive"));
    }
    let rho2 = spec.rho2();
    let rho12 = spec.rho12_tilde();
    let theta = 2.0 * c / rho12;
    let em1 = theta.exp_m1();
    let g = 2.0 * delta / rho12;
    Ok(match side {
        Side::Upper => DamHeavyTraffic {
            side,
            p1: delta / em1,
            p2: delta * rho2 * theta.exp() / ((1.0 - rho2) * em1),
            q_profile_scale: g * theta.exp() / em1,
            q_profile_ratio: 1.0 - g,
        },
        Side::Lower => DamHeavyTraffic {
            side,
            p1: delta * theta.exp() / em1,
            p2: delta * rho2 / ((1.0 - rho2) * em1),
            q_profile_scale: g / em1,
            q_profile_ratio: 1.0 + g,
        },
    })
}

/// Pre-limit cost-weighting function for the upper side:
/// sum c_{n-j} w^j / sum w^j with w = 1 - theta/n.
pub fn psi(costs: &[f64], c: f64, rho12_tilde: f64) -> Result<f64> {
    cost_average(costs, -2.0 * c / rho12_tilde)
}

/// Lower-side counterpart with w = 1 + theta/n.
pub fn eta(costs: &[f64], c: f64, rho12_tilde: f64) -> Result<f64> {
    cost_average(costs, 2.0 * c / rho12_tilde)
}

fn cost_average(costs: &[f64], theta: f64) -> Result<f64> {
    let n = costs.len();
    if n == 0 {
        return Err(Error::invalid("empty cost profile"));
    }
    let w = 1.0 + theta / n as f64;
    if w <= 0.0 {
        return Err(Error::numerical(
            "cost weighting degenerates: C too large for the evaluation size".to_string(),
        ));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    let mut weight = 1.0;
    for j in 0..n {
        num += costs[n - 1 - j] * weight;
        den += weight;
        weight *= w;
    }
    Ok(num / den)
}

/// Cost part of the objective at `c`, evaluated at the configured pre-limit
/// size with a doubling check. Explicit profiles evaluate at their own
/// length and skip the check.
fn cost_part(spec: &DamSpec, c: f64, side: Side) -> Result<f64> {
    let eval = |costs: &[f64]| match side {
        Side::Upper => psi(costs, c, spec.rho12_tilde()),
        Side::Lower => eta(costs, c, spec.rho12_tilde()),
    };
    if spec.costs.resizable() {
        let v1 = eval(&spec.costs.values(COST_N_EVAL)?)?;
        let v2 = eval(&spec.costs.values(2 * COST_N_EVAL)?)?;
        if (v1 - v2).abs() > COST_DOUBLING_TOL * v1.abs().max(1.0) {
            return Err(Error::numerical(format!(
                "cost part not converged at n_eval = {COST_N_EVAL}: {v1} vs {v2}"
            )));
        }
        Ok(v2)
    } else {
        let values = match &spec.costs {
            CostProfile::Explicit { values } => values.clone(),
            _ => unreachable!(),
        };
        eval(&values)
    }
}

/// Penalty part of the objective; continuous at C = 0 on both sides, where
/// it equals (j1 + overflow_weight) * rho12_tilde / 2.
fn penalty_part(spec: &DamSpec, c: f64, side: Side) -> f64 {
    let a = spec.overflow_weight();
    let rho12 = spec.rho12_tilde();
    if c == 0.0 {
        return (spec.j1 + a) * rho12 / 2.0;
    }
    let theta = 2.0 * c / rho12;
    let em1 = theta.exp_m1();
    match side {
        Side::Upper => c * (spec.j1 + a * theta.exp()) / em1,
        Side::Lower => c * (spec.j1 * theta.exp() + a) / em1,
    }
}

/// The control objective J^upper(C) or J^lower(C): boundary penalties plus
/// the cost-weighting average.
pub fn objective(spec: &DamSpec, c: f64, side: Side) -> Result<f64> {
    if !(c >= 0.0) {
        return Err(Error::invalid("C must be nonnegative"));
    }
    Ok(penalty_part(spec, c, side) + cost_part(spec, c, side)?)
}

/// Golden-section minimizer over [0, hi]; the objective is unimodal on each
/// side (monotone when the boundary C = 0 is optimal).
fn golden_min(f: &dyn Fn(f64) -> Result<f64>, hi: f64) -> Result<(f64, f64)> {
    const INVPHI: f64 = 0.618_033_988_749_894_8;
    let mut a = 0.0;
    let mut b = hi;
    let mut c = b - INVPHI * (b - a);
    let mut d = a + INVPHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while b - a > C_SEARCH_TOL {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INVPHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INVPHI * (b - a);
            fd = f(d)?;
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x)?;
    // the boundary itself competes with the interior point
    let f0 = f(0.0)?;
    if f0 <= fx {
        Ok((0.0, f0))
    } else {
        Ok((x, fx))
    }
}

/// Minimizes one side over C >= 0, extending the bracket while the
/// objective still descends at its right edge.
fn minimize_side(spec: &DamSpec, side: Side) -> Result<(f64, f64)> {
    let f = |c: f64| objective(spec, c, side);
    let mut hi = 10.0 * spec.rho12_tilde();
    for _ in 0..10 {
        let edge = f(hi)?;
        let inside = f(hi * 0.999)?;
        if edge >= inside {
            break;
        }
        hi *= 2.0;
    }
    golden_min(&f, hi)
}

/// The optimizer's verdict on where to hold the working-band load.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlChoice {
    /// Hold rho_1 = 1.
    CriticalBalance,
    /// rho_1 = 1 + delta with n delta -> C*.
    SupercriticalDrift,
    /// rho_1 = 1 - delta with n delta -> C*.
    SubcriticalDrift,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DamDecision {
    pub choice: ControlChoice,
    /// Optimal C (zero for the balanced choice).
    pub c_star: f64,
    /// Minimized objective value.
    pub value: f64,
    pub upper_argmin: f64,
    pub upper_min: f64,
    pub lower_argmin: f64,
    pub lower_min: f64,
    /// At most one side's argmin may leave the C = 0 boundary; false means
    /// the computed minima violate that dichotomy and the reported choice
    /// is the smaller of the two.
    pub consistent: bool,
}

pub fn optimize(spec: &DamSpec) -> Result<DamDecision> {
    let (upper_argmin, upper_min) = minimize_side(spec, Side::Upper)?;
    let (lower_argmin, lower_min) = minimize_side(spec, Side::Lower)?;
    let upper_interior = upper_argmin > C_ZERO_TOL;
    let lower_interior = lower_argmin > C_ZERO_TOL;
    let consistent = !(upper_interior && lower_interior);
    let decision = if !upper_interior && !lower_interior {
        DamDecision {
            choice: ControlChoice::CriticalBalance,
            c_star: 0.0,
            value: objective(spec, 0.0, Side::Upper)?,
            upper_argmin,
            upper_min,
            lower_argmin,
            lower_min,
            consistent,
        }
    } else if upper_min <= lower_min {
        DamDecision {
            choice: ControlChoice::SupercriticalDrift,
            c_star: upper_argmin,
            value: upper_min,
            upper_argmin,
            upper_min,
            lower_argmin,
            lower_min,
            consistent,
        }
    } else {
        DamDecision {
            choice: ControlChoice::SubcriticalDrift,
            c_star: lower_argmin,
            value: lower_min,
            upper_argmin,
            upper_min,
            lower_argmin,
            lower_min,
            consistent,
        }
    };
    Ok(decision)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn spec_at(rho1: f64, rho2: f64, n: usize, j1: f64, j2: f64, costs: CostProfile) -> DamSpec {
        DamSpec::new(
            1.0,
            Dist::exponential(1.0 / rho1).unwrap(),
            Dist::exponential(1.0 / rho2).unwrap(),
            n,
            j1,
            j2,
            costs,
        )
        .unwrap()
    }

    #[test]
    fn served_above_band_constant_at_critical() {
        // rho_1 = 1, rho_2 = 0.5: nu^{(2)} = 1/(1 - rho_2) = 2 regardless of n
        for n in [1usize, 5, 40, 200] {
            let spec = spec_at(1.0, 0.5, n, 1.0, 1.0, CostProfile::Zero);
            let st = stationary(&spec).unwrap();
            let nu_n = *st.nu1.last().unwrap();
            let nu2 = 1.0 / (1.0 - spec.rho2())
                - (1.0 - spec.rho1()) / (1.0 - spec.rho2()) * nu_n;
            assert_relative_eq!(nu2, 2.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn normalization_holds() {
        for &rho1 in &[0.5, 0.8, 1.0, 1.2, 2.0] {
            let spec = spec_at(rho1, 0.5, 20, 1.0, 1.0, CostProfile::Zero);
            let st = stationary(&spec).unwrap();
            let total = st.p1 + st.p2 + st.q.iter().sum::<f64>();
            assert_relative_eq!(total, 1.0, epsilon = 1e-9);
            assert!(st.p1 >= 0.0 && st.p2 >= 0.0 && st.q.iter().all(|&x| x >= 0.0));
        }
    }

    #[test]
    fn identical_bands_reduce_to_plain_queue() {
        // b1 = b2 exponential: p1 is the plain idle probability, and each
        // q_i is the time share of intervals that began at level i.
        let spec = spec_at(0.5, 0.5, 1, 1.0, 1.0, CostProfile::Zero);
        let st = stationary(&spec).unwrap();
        assert_relative_eq!(st.p1, 0.5, epsilon = 1e-10);
        assert_relative_eq!(st.q[0], 0.5 * 0.5 * 1.5, epsilon = 1e-10);
    }

    #[test]
    fn limits_by_regime() {
        let spec = spec_at(0.5, 0.5, 50, 1.0, 1.0, CostProfile::Zero);
        let lim = dam_limits(&spec).unwrap();
        assert_relative_eq!(lim.p1_limit.unwrap(), 0.5);
        let st = stationary(&spec).unwrap();
        assert_relative_eq!(st.p1, 0.5, max_relative = 1e-6);

        // supercritical: p2 -> rho_2 (rho_1 - 1)/(rho_1 - rho_2) = 1/3
        let spec = spec_at(2.0, 0.5, 60, 1.0, 1.0, CostProfile::Zero);
        let lim = dam_limits(&spec).unwrap();
        assert_relative_eq!(lim.p2_limit.unwrap(), 1.0 / 3.0, epsilon = 1e-12);
        let st = stationary(&spec).unwrap();
        assert_relative_eq!(st.p2, 1.0 / 3.0, max_relative = 1e-6);

        // critical: n p1 -> rho_{1,2}/2 = 1, n p2 -> 1
        let spec = spec_at(1.0, 0.5, 2000, 1.0, 1.0, CostProfile::Zero);
        let lim = dam_limits(&spec).unwrap();
        assert_relative_eq!(lim.n_p1_limit.unwrap(), 1.0);
        assert_relative_eq!(lim.n_p2_limit.unwrap(), 1.0);
        let st = stationary(&spec).unwrap();
        assert_relative_eq!(2000.0 * st.p1, 1.0, max_relative = 2e-3);
        assert_relative_eq!(2000.0 * st.p2, 1.0, max_relative = 2e-3);
        // top-of-band occupation: n q_{n-i} -> 1
        for i in 0..5 {
            assert_relative_eq!(2000.0 * st.q[2000 - 1 - i], 1.0, max_relative = 5e-3);
        }
    }

    #[test]
    fn critical_increment_law() {
        let spec = spec_at(1.0, 0.5, 1000, 1.0, 1.0, CostProfile::Zero);
        let st = stationary(&spec).unwrap();
        let lim = dam_limits(&spec).unwrap();
        let inc = st.nu1[1000] - st.nu1[999];
        assert_relative_eq!(inc, lim.nu_increment.unwrap(), max_relative = 1e-3);
    }

    #[test]
    fn heavy_traffic_prediction_values() {
        let spec = spec_at(1.0, 0.5, 20, 1.0, 1.0, CostProfile::Zero);
        let ht = dam_heavy_traffic(&spec, 0.05, 1.0, Side::Upper).unwrap();
        let e = 1.0f64.exp();
        assert_relative_eq!(ht.p1, 0.05 / (e - 1.0), max_relative = 1e-12);
        assert_relative_eq!(ht.p2, 0.05 * e / (e - 1.0), max_relative = 1e-12);
        // q-profile ratio mirrors between the sides
        let lo = dam_heavy_traffic(&spec, 0.05, 1.0, Side::Lower).unwrap();
        assert_relative_eq!(ht.q_profile_ratio, 0.95);
        assert_relative_eq!(lo.q_profile_ratio, 1.05);
        // lower p1 exceeds delta and approaches it as C grows
        assert!(lo.p1 > 0.05);
        let lo_far = dam_heavy_traffic(&spec, 0.05, 30.0, Side::Lower).unwrap();
        assert_relative_eq!(lo_far.p1, 0.05, max_relative = 1e-10);
    }

    #[test]
    fn heavy_traffic_matches_exact_stationary() {
        // rho_1 = 1 + delta with n delta = C against the finite-n values
        let delta = 0.02;
        let n = 100; // C = 2
        let spec = spec_at(1.0 + delta, 0.5, n, 1.0, 1.0, CostProfile::Zero);
        let st = stationary(&spec).unwrap();
        let ht = dam_heavy_traffic(&spec, delta, delta * n as f64, Side::Upper).unwrap();
        assert_relative_eq!(st.p1, ht.p1, max_relative = 0.05);
        assert_relative_eq!(st.p2, ht.p2, max_relative = 0.05);
        let lo_spec = spec_at(1.0 - delta, 0.5, n, 1.0, 1.0, CostProfile::Zero);
        let lo_st = stationary(&lo_spec).unwrap();
        let lo_ht = dam_heavy_traffic(&lo_spec, delta, delta * n as f64, Side::Lower).unwrap();
        assert_relative_eq!(lo_st.p1, lo_ht.p1, max_relative = 0.05);
        assert_relative_eq!(lo_st.p2, lo_ht.p2, max_relative = 0.05);
    }

    #[test]
    fn q_profile_geometry() {
        let delta = 0.02;
        let n = 100;
        let spec = spec_at(1.0 + delta, 0.5, n, 1.0, 1.0, CostProfile::Zero);
        let st = stationary(&spec).unwrap();
        let ht = dam_heavy_traffic(&spec, delta, delta * n as f64, Side::Upper).unwrap();
        for j in 1..6usize {
            let ratio = st.q[n - 1 - j] / st.q[n - 1];
            assert_relative_eq!(ratio, ht.q_profile_ratio.powi(j as i32), max_relative = 0.02);
        }
    }

    #[test]
    fn objective_zero_cost_boundary_value() {
        // costs = 0, C -> 0: j1 rho12/2 + j2 rho2/(1-rho2) rho12/2
        let spec = spec_at(1.0, 0.5, 20, 2.0, 3.0, CostProfile::Zero);
        let expect = 2.0 * 1.0 + 3.0 * 1.0; // rho12/2 = 1 for exponential b1
        assert_relative_eq!(objective(&spec, 0.0, Side::Upper).unwrap(), expect, epsilon = 1e-12);
        assert_relative_eq!(objective(&spec, 0.0, Side::Lower).unwrap(), expect, epsilon = 1e-12);
        // continuity just off the boundary
        assert_relative_eq!(
            objective(&spec, 1e-8, Side::Upper).unwrap(),
            expect,
            max_relative = 1e-6
        );
        assert_relative_eq!(
            objective(&spec, 1e-8, Side::Lower).unwrap(),
            expect,
            max_relative = 1e-6
        );
    }

    #[test]
    fn constant_costs_shift_objective() {
        let z = spec_at(1.0, 0.5, 20, 1.0, 1.0, CostProfile::Zero);
        let c = spec_at(1.0, 0.5, 20, 1.0, 1.0, CostProfile::Constant { value: 0.7 });
        for &cc in &[0.0, 0.5, 2.0] {
            for side in [Side::Upper, Side::Lower] {
                assert_relative_eq!(
                    objective(&c, cc, side).unwrap(),
                    objective(&z, cc, side).unwrap() + 0.7,
                    epsilon = 1e-9
                );
            }
        }
    }

    #[test]
    fn psi_eta_boundary_identity() {
        // c_i decreasing in the level index
        let costs: Vec<f64> = (0..100).map(|i| 1.0 - i as f64 / 200.0).collect();
        let mean = costs.iter().sum::<f64>() / costs.len() as f64;
        assert_relative_eq!(psi(&costs, 0.0, 2.0).unwrap(), mean, epsilon = 1e-12);
        assert_relative_eq!(eta(&costs, 0.0, 2.0).unwrap(), mean, epsilon = 1e-12);
    }

    #[test]
    fn optimizer_balanced_point() {
        // j1 = j2 rho2/(1-rho2) with flat costs: hold the critical balance
        let a = 1.0 * 0.4 / 0.6;
        let spec = spec_at(1.0, 0.4, 20, a, 1.0, CostProfile::Zero);
        let d = optimize(&spec).unwrap();
        assert_eq!(d.choice, ControlChoice::CriticalBalance);
        assert!(d.consistent);
        let spec = spec_at(1.0, 0.4, 20, a, 1.0, CostProfile::Constant { value: 0.3 });
        let d = optimize(&spec).unwrap();
        assert_eq!(d.choice, ControlChoice::CriticalBalance);
    }

    #[test]
    fn optimizer_drifts_with_penalty_imbalance() {
        let a = 1.0 * 0.4 / 0.6;
        let up = spec_at(1.0, 0.4, 20, 1.2 * a, 1.0, CostProfile::Zero);
        let d = optimize(&up).unwrap();
        assert_eq!(d.choice, ControlChoice::SupercriticalDrift);
        assert!(d.c_star > 1e-3);
        assert!(d.lower_argmin <= 1e-3);

        let down = spec_at(1.0, 0.4, 20, 0.8 * a, 1.0, CostProfile::Zero);
        let d = optimize(&down).unwrap();
        assert_eq!(d.choice, ControlChoice::SubcriticalDrift);
        assert!(d.c_star > 1e-3);
        assert!(d.upper_argmin <= 1e-3);
    }
}
