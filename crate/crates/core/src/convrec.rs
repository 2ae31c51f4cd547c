//! The convolution-recurrence engine.
//!
//! Solves Q_k = sum_{j=0}^k pi_j Q_{k-j+1} forward from Q_0, verifies the
//! solution against the generating function Q(z) = Q_0 pi(z)/(pi(z) - z) by
//! power-series long division, and finds the fixed points z = pi(z) and
//! z = LST(rate*(1-z)) that drive every asymptotic formula downstream.

use serde::{Deserialize, Serialize};

use crate::dist::Dist;
use crate::error::{Error, Result};

/// Classification band around gamma_1 = 1. The three limit regimes are
/// discontinuous in behavior, so inputs are expected to pin gamma_1 exactly.
pub const CRITICAL_TOL: f64 = 1e-12;

/// Residual demanded of every root returned by the fixed-point searches.
pub const ROOT_RESIDUAL_TOL: f64 = 1e-13;

const MAX_ROOT_ITER: usize = 200;

/// Largest coefficient tail mass `solve_q` accepts before treating
/// coefficients beyond the stored support as exactly zero.
const SOLVE_TAIL_TOL: f64 = 1e-12;

// ---------------------------------------------------------------------------
// Double-double accumulation
// ---------------------------------------------------------------------------

/// Error-free transform of a + b (Knuth two-sum).
#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bv = s - a;
    let err = (a - (s - bv)) + (b - bv);
    (s, err)
}

/// Error-free transform of a * b via fused multiply-add.
#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let err = a.mul_add(b, -p);
    (p, err)
}

/// Double-double accumulator for the inner convolution sums. Keeps the
/// running error term so the forward solve stays well below the 1e-9
/// residual gate even at kmax = 10^4.
#[derive(Clone, Copy)]
struct Acc {
    hi: f64,
    lo: f64,
}

impl Acc {
    #[inline]
    fn new(x: f64) -> Self {
        Acc { hi: x, lo: 0.0 }
    }

    #[inline]
    fn add(&mut self, x: f64) {
        let (s, e) = two_sum(self.hi, x);
        self.hi = s;
        self.lo += e;
    }

    #[inline]
    fn sub_prod(&mut self, a: f64, b: f64) {
        let (p, e) = two_prod(a, b);
        self.add(-p);
        self.lo -= e;
    }

    #[inline]
    fn value(self) -> f64 {
        self.hi + self.lo
    }
}

// ---------------------------------------------------------------------------
// Coefficient sequences
// ---------------------------------------------------------------------------

/// A probability sequence pi_0, pi_1, ... with its tail mass and the first
/// three factorial moments gamma_l = sum_j j(j-1)...(j-l+1) pi_j.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoeffSeq {
    coeffs: Vec<f64>,
    tail_mass: f64,
    gamma: [f64; 3],
}

impl CoeffSeq {
    /// Builds from a complete finite pmf. The coefficients must sum to one
    /// within 1e-12; factorial moments are computed by direct summation.
    pub fn from_pmf(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::invalid("coefficient list must be nonempty"));
        }
        if !(coeffs[0] > 0.0) {
            return Err(Error::invalid("pi_0 must be strictly positive"));
        }
        if coeffs.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(Error::invalid("coefficients must be nonnegative and finite"));
        }
        let total: f64 = coeffs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!("coefficients must sum to 1, got {total}")));
        }
        let mut gamma = [0.0; 3];
        for (j, &p) in coeffs.iter().enumerate() {
            let j = j as f64;
            gamma[0] += j * p;
            gamma[1] += j * (j - 1.0) * p;
            gamma[2] += j * (j - 1.0) * (j - 2.0) * p;
        }
        Ok(CoeffSeq { coeffs, tail_mass: 0.0, gamma })
    }

    /// Builds from truncated coefficients plus externally known factorial
    /// moments (the mixed-Poisson path, where the moments are exact).
    pub(crate) fn with_gamma(coeffs: Vec<f64>, gamma: [f64; 3]) -> Self {
        let total: f64 = coeffs.iter().sum();
        let tail_mass = (1.0 - total).max(0.0);
        CoeffSeq { coeffs, tail_mass, gamma }
    }

    /// Drops trailing coefficients that underflowed to zero.
    pub(crate) fn trimmed(mut self) -> Self {
        while self.coeffs.len() > 1 && self.coeffs.last() == Some(&0.0) {
            self.coeffs.pop();
        }
        self
    }

    /// Number of stored coefficients (support size).
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// pi_j, zero beyond the stored support.
    #[inline]
    pub fn coeff(&self, j: usize) -> f64 {
        self.coeffs.get(j).copied().unwrap_or(0.0)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Probability mass beyond the stored support.
    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    pub fn gamma1(&self) -> f64 {
        self.gamma[0]
    }

    pub fn gamma2(&self) -> f64 {
        self.gamma[1]
    }

    pub fn gamma3(&self) -> f64 {
        self.gamma[2]
    }

    /// pi(z) by Horner evaluation over the stored support.
    pub fn pgf(&self, z: f64) -> f64 {
        let mut acc = 0.0;
        for &c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    /// pi'(z) by Horner evaluation.
    pub fn pgf_deriv(&self, z: f64) -> f64 {
        let mut acc = 0.0;
        for (j, &c) in self.coeffs.iter().enumerate().skip(1).rev() {
            acc = acc * z + j as f64 * c;
        }
        acc
    }

    /// Upper tail sum_{i>=m} pi_i, computed as 1 minus the partial sum below
    /// m so the truncation tail is included exactly.
    pub fn tail_sum(&self, m: usize) -> f64 {
        if m == 0 {
            return 1.0;
        }
        let head: f64 = self.coeffs.iter().take(m).sum();
        (1.0 - head).max(0.0)
    }
}

// ---------------------------------------------------------------------------
// The recurrence
// ---------------------------------------------------------------------------

/// A solved recurrence: values Q_0..Q_kmax together with the coefficients
/// that produced them.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QSeq {
    values: Vec<f64>,
    q0: f64,
    source: CoeffSeq,
}

impl QSeq {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, k: usize) -> f64 {
        self.values[k]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn q0(&self) -> f64 {
        self.q0
    }

    pub fn source(&self) -> &CoeffSeq {
        &self.source
    }
}

/// Forward-solves Q_{k+1} = (Q_k - sum_{j=1}^k pi_j Q_{k-j+1}) / pi_0 with
/// Q_0 = q0, producing Q_0..Q_kmax. Inner sums accumulate in double-double
/// precision.
pub fn solve_q(pi: &CoeffSeq, q0: f64, kmax: usize) -> Result<QSeq> {
    if !(pi.coeff(0) > 0.0) {
        return Err(Error::invalid("pi_0 must be strictly positive"));
    }
    if q0 == 0.0 || !q0.is_finite() {
        return Err(Error::invalid("Q_0 must be nonzero and finite"));
    }
    if kmax < 1 {
        return Err(Error::invalid("kmax must be >= 1"));
    }
    if pi.tail_mass() > SOLVE_TAIL_TOL {
        return Err(Error::numerical(format!(
            "coefficient tail mass {:.3e} too large for exact truncation",
            pi.tail_mass()
        )));
    }
    let pi0 = pi.coeff(0);
    let support = pi.len();
    let mut q = Vec::with_capacity(kmax + 1);
    q.push(q0);
    for k in 0..kmax {
        let mut acc = Acc::new(q[k]);
        let jhi = k.min(support - 1);
        for j in 1..=jhi {
            acc.sub_prod(pi.coeff(j), q[k - j + 1]);
        }
        let next = acc.value() / pi0;
        if !next.is_finite() {
            return Err(Error::numerical(format!("Q_{} overflowed", k + 1)));
        }
        q.push(next);
    }
    Ok(QSeq { values: q, q0, source: pi.clone() })
}

/// Recomputes Q_0..Q_kmax by long division of the power series
/// Q_0 * pi(z) by pi(z) - z and returns the maximum relative deviation from
/// the stored values. Shares no intermediate values with `solve_q`.
pub fn gf_check(qs: &QSeq) -> f64 {
    let pi = &qs.source;
    let kmax = qs.values.len() - 1;
    let support = pi.len();
    // numerator n_k = Q_0 pi_k; denominator d_0 = pi_0, d_1 = pi_1 - 1,
    // d_j = pi_j
    let d0 = pi.coeff(0);
    let mut div = Vec::with_capacity(kmax + 1);
    for k in 0..=kmax {
        let mut acc = Acc::new(qs.q0 * pi.coeff(k));
        let ihi = k.min(support.max(2) - 1);
        for i in 1..=ihi.min(k) {
            let d = if i == 1 { pi.coeff(1) - 1.0 } else { pi.coeff(i) };
            acc.sub_prod(d, div[k - i]);
        }
        div.push(acc.value() / d0);
    }
    let mut worst: f64 = 0.0;
    for (a, b) in qs.values.iter().zip(&div) {
        let denom = a.abs().max(1.0);
        worst = worst.max((a - b).abs() / denom);
    }
    worst
}

// ---------------------------------------------------------------------------
// Fixed-point roots
// ---------------------------------------------------------------------------

/// Outcome of a fixed-point search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootResult {
    pub value: f64,
    pub iterations: u32,
    pub residual: f64,
}

/// Bracketed bisection with Newton polish on f over [lo, hi], where
/// f(lo) > 0 > f(hi) or f(lo) < 0 < f(hi).
pub(crate) fn refine_root(
    f: &dyn Fn(f64) -> f64,
    fprime: &dyn Fn(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
) -> Result<RootResult> {
    let flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(RootResult { value: lo, iterations: 0, residual: 0.0 });
    }
    if fhi == 0.0 {
        return Ok(RootResult { value: hi, iterations: 0, residual: 0.0 });
    }
    if flo * fhi > 0.0 {
        return Err(Error::root(format!("no sign change on [{lo}, {hi}]")));
    }
    let sign = flo.signum();
    let mut x = 0.5 * (lo + hi);
    let mut iterations = 0u32;
    let mut converged = false;
    while iterations < MAX_ROOT_ITER as u32 {
        iterations += 1;
        let fx = f(x);
        if fx.abs() <= ROOT_RESIDUAL_TOL {
            converged = true;
            break;
        }
        if fx * sign > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        // Newton candidate; fall back to bisection when it escapes the
        // bracket or the derivative degenerates.
        let dfx = fprime(x);
        let newton = x - fx / dfx;
        x = if dfx != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo < f64::EPSILON * x.abs() {
            break;
        }
    }
    // polish to the fixed point of the Newton map; the quadratic tail takes
    // the residual to rounding level, which downstream geometric powers of
    // the root depend on
    for _ in 0..4 {
        let fx = f(x);
        let dfx = fprime(x);
        if fx == 0.0 || dfx == 0.0 {
            break;
        }
        let next = x - fx / dfx;
        if next == x {
            break;
        }
        if f(next).abs() <= fx.abs() {
            x = next;
        } else {
            break;
        }
    }
    let residual = f(x).abs();
    if converged || residual <= ROOT_RESIDUAL_TOL {
        Ok(RootResult { value: x, iterations, residual })
    } else {
        Err(Error::root(format!(
            "residual {residual:.3e} above tolerance after {iterations} iterations"
        )))
    }
}

/// Least root of z = pi(z) in (0, 1). Requires gamma_1 > 1; at or below the
/// critical point the least nonnegative root is 1 and is reported as a
/// regime error instead of solved for.
pub fn find_sigma(pi: &CoeffSeq) -> Result<RootResult> {
    if pi.gamma1() <= 1.0 + CRITICAL_TOL {
        return Err(Error::regime(format!(
            "gamma_1 = {} <= 1: least nonnegative root is 1, no interior root",
            pi.gamma1()
        )));
    }
    let f = |z: f64| pi.pgf(z) - z;
    let fp = |z: f64| pi.pgf_deriv(z) - 1.0;
    refine_root(&f, &fp, 0.0, 1.0 - 1e-9)
}

/// Least root in (0, 1) of z = LST(rate * (1 - z)). Exists when the
/// mixed-Poisson mean rate * E[X] exceeds 1; the caller picks which law and
/// rate realize that orientation.
pub fn find_phi(dist: &Dist, rate: f64) -> Result<RootResult> {
    if !(rate > 0.0) {
        return Err(Error::invalid("rate must be positive"));
    }
    let mean = rate * dist.mean();
    if mean <= 1.0 + CRITICAL_TOL {
        return Err(Error::regime(format!(
            "rate * mean = {mean} <= 1: no root of z = LST(rate(1-z)) inside (0,1)"
        )));
    }
    let f = |z: f64| dist.lst_analytic(rate * (1.0 - z)) - z;
    let fp = |z: f64| -rate * dist.lst_deriv_analytic(rate * (1.0 - z)) - 1.0;
    refine_root(&f, &fp, 0.0, 1.0 - 1e-9)
}

/// Root strictly greater than 1 of z = LST(rate * (1 - z)), when the
/// transform stays analytic that far. Requires rate * E[X] < 1; the root
/// does not necessarily exist and its absence is reported as an error.
pub fn find_tau(dist: &Dist, rate: f64) -> Result<RootResult> {
    if !(rate > 0.0) {
        return Err(Error::invalid("rate must be positive"));
    }
    let load = rate * dist.mean();
    if load >= 1.0 - CRITICAL_TOL {
        return Err(Error::regime(format!(
            "rate * mean = {load} >= 1: no root above 1"
        )));
    }
    let f = |z: f64| dist.lst_analytic(rate * (1.0 - z)) - z;
    let fp = |z: f64| -rate * dist.lst_deriv_analytic(rate * (1.0 - z)) - 1.0;
    let lo = 1.0 + 1e-9;
    let hi = match dist.pole_gap() {
        Some(gap) => {
            // Approach the transform's pole from below until the sign flips.
            let cap = 1.0 + gap / rate;
            let mut frac = 0.5;
            let mut hi = None;
            for _ in 0..60 {
                let z = 1.0 + (cap - 1.0) * (1.0 - frac);
                if f(z) > 0.0 {
                    hi = Some(z);
                    break;
                }
                frac *= 0.5;
            }
            hi.ok_or_else(|| {
                Error::root("no root above 1 within the transform's analyticity domain".to_string())
            })?
        }
        None => {
            // Entire transform: expand geometrically until the sign flips.
            let mut hi = 2.0;
            loop {
                if f(hi) > 0.0 {
                    break hi;
                }
                hi *= 2.0;
                if hi > 1e9 {
                    return Err(Error::root("no root above 1 found below 1e9".to_string()));
                }
            }
        }
    };
    refine_root(&f, &fp, lo, hi)
}
