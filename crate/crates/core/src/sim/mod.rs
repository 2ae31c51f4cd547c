//! Discrete-event simulation oracle for every analytic model.
//!
//! Each model is simulated with its natural estimator: regenerative
//! busy-period replications for the single-server loss queue, long-run
//! event/time averages with a 10% warm-up for the others. Standard errors
//! come from batch means. Every run is a pure function of (config, seed):
//! identical inputs give identical outputs bit for bit.

pub mod rng;

use serde::{Deserialize, Serialize};

use crate::dam::DamSpec;
use crate::error::{Error, Result};
use crate::gim::GimSpec;
use crate::mg1::Mg1Spec;
use crate::priority::PrioritySpec;
use rng::Stream;

/// A point estimate with its batch-means standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimEstimate {
    pub value: f64,
    pub se: f64,
    /// Replications (or arrivals) behind the estimate.
    pub n: u64,
}

impl SimEstimate {
    /// |value - reference| measured in standard errors.
    pub fn sigmas_from(&self, reference: f64) -> f64 {
        (self.value - reference).abs() / self.se
    }
}

/// Batch-means estimate of a ratio sum(num)/sum(den): the point estimate is
/// the overall ratio, the error comes from the spread of per-batch ratios.
fn ratio_estimate(num: &[f64], den: &[f64], n: u64) -> SimEstimate {
    let total_num: f64 = num.iter().sum();
    let total_den: f64 = den.iter().sum();
    let point = total_num / total_den;
    let b = num.len();
    let mut var = 0.0;
    for i in 0..b {
        let r = num[i] / den[i];
        var += (r - point) * (r - point);
    }
    let se = (var / (b as f64 * (b as f64 - 1.0))).sqrt();
    SimEstimate { value: point, se, n }
}

fn validate_common(replications: u64, batch_count: u32) -> Result<()> {
    if replications < 1_000 {
        return Err(Error::invalid("at least 1000 replications/arrivals required"));
    }
    if batch_count < 30 {
        return Err(Error::invalid("at least 30 batches required for a valid SE"));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// M/GI/1/n: regenerative busy-period replications
// ---------------------------------------------------------------------------

/// Busy-period statistics of the single-server loss queue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mg1Sim {
    pub et: SimEstimate,
    pub el: SimEstimate,
    /// k-consecutive-loss expectations per busy period, keyed by k. A loss
    /// counts toward k when at least k-1 losses immediately precede it in
    /// its run, so a run of length L contributes max(0, L-k+1).
    pub el_k: Vec<(usize, SimEstimate)>,
    pub p_loss: SimEstimate,
}

/// Simulates `replications` busy periods, one substream each.
pub fn sim_mg1(
    spec: &Mg1Spec,
    ks: &[usize],
    replications: u64,
    batch_count: u32,
    seed: u64,
) -> Result<Mg1Sim> {
    validate_common(replications, batch_count)?;
    let b = batch_count as usize;
    let mut bt = vec![0.0f64; b]; // busy time
    let mut bl = vec![0.0f64; b]; // losses
    let mut bcycle = vec![0.0f64; b]; // arrivals per cycle incl. the opener
    let mut blk = vec![vec![0.0f64; b]; ks.len()];
    let mut breps = vec![0.0f64; b];

    for rep in 0..replications {
        let batch = (rep as usize * b / replications as usize).min(b - 1);
        let mut stream = Stream::new(seed, rep);
        let mut waiting = 0usize;
        let mut busy_time = 0.0f64;
        let mut losses = 0u64;
        let mut losses_k = vec![0u64; ks.len()];
        let mut arrivals = 0u64;
        loop {
            let service = stream.sample(&spec.service);
            busy_time += service;
            let incoming = stream.poisson(spec.lam * service);
            arrivals += incoming;
            let free = (spec.n - waiting) as u64;
            let accepted = incoming.min(free);
            let lost = incoming - accepted;
            losses += lost;
            for (slot, &k) in ks.iter().enumerate() {
                if lost >= k as u64 {
                    losses_k[slot] += lost - k as u64 + 1;
                }
            }
            waiting += accepted as usize;
            // service completion frees one slot or ends the busy period
            if waiting > 0 {
                waiting -= 1;
            } else {
                break;
            }
        }
        bt[batch] += busy_time;
        bl[batch] += losses as f64;
        bcycle[batch] += 1.0 + arrivals as f64;
        for (slot, &c) in losses_k.iter().enumerate() {
            blk[slot][batch] += c as f64;
        }
        breps[batch] += 1.0;
    }

    let et = ratio_estimate(&bt, &breps, replications);
    let el = ratio_estimate(&bl, &breps, replications);
    let p_loss = ratio_estimate(&bl, &bcycle, replications);
    let el_k = ks
        .iter()
        .enumerate()
        .map(|(slot, &k)| (k, ratio_estimate(&blk[slot], &breps, replications)))
        .collect();
    Ok(Mg1Sim { et, el, el_k, p_loss })
}

// ---------------------------------------------------------------------------
// GI/M/m/n: long-run loss fraction
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GimSim {
    pub p_loss: SimEstimate,
}

/// Simulates `arrivals` renewal arrivals against m exponential servers with
/// total capacity n + m - 1; the first 10% warm the system up.
pub fn sim_gim(spec: &GimSpec, arrivals: u64, batch_count: u32, seed: u64) -> Result<GimSim> {
    validate_common(arrivals, batch_count)?;
    let b = batch_count as usize;
    let warmup = arrivals / 10;
    let counted = arrivals - warmup;
    let capacity = spec.total_capacity();
    let m = spec.m as usize;
    let mut stream = Stream::new(seed, 0);
    let mut size = 0usize;
    let mut blosses = vec![0.0f64; b];
    let mut barrivals = vec![0.0f64; b];

    for idx in 0..arrivals {
        // time to the next arrival, spent draining departures
        let mut gap = stream.sample(&spec.arrival);
        while size > 0 {
            let rate = spec.mu * size.min(m) as f64;
            let d = stream.exp(rate);
            if d < gap {
                size -= 1;
                gap -= d;
            } else {
                break;
            }
        }
        let lost = size >= capacity;
        if !lost {
            size += 1;
        }
        if idx >= warmup {
            let batch = (((idx - warmup) as usize * b) / counted as usize).min(b - 1);
            barrivals[batch] += 1.0;
            if lost {
                blosses[batch] += 1.0;
            }
        }
    }
    Ok(GimSim { p_loss: ratio_estimate(&blosses, &barrivals, counted) })
}

// ---------------------------------------------------------------------------
// Dam: time split across the bands
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DamSim {
    pub p1: SimEstimate,
    pub p2: SimEstimate,
    /// q_1..q_n: time fractions of inter-departure intervals that began at
    /// each working-band level.
    pub q: Vec<SimEstimate>,
}

/// Simulates the level process until `arrivals` units have arrived; the
/// fractions account time by the level at which each inter-departure
/// interval starts (idle spells separately), the same partition the
/// stationary formulas describe.
pub fn sim_dam(spec: &DamSpec, arrivals: u64, batch_count: u32, seed: u64) -> Result<DamSim> {
    validate_common(arrivals, batch_count)?;
    let b = batch_count as usize;
    let warmup = arrivals / 10;
    let counted = arrivals.saturating_sub(warmup).max(1);
    let mut stream = Stream::new(seed, 0);
    let mut content = 0u64;
    let mut arrived = 0u64;

    let mut t_total = vec![0.0f64; b];
    let mut t_idle = vec![0.0f64; b];
    let mut t_above = vec![0.0f64; b];
    let mut t_level = vec![vec![0.0f64; b]; spec.n];

    while arrived < arrivals {
        let batch = if arrived < warmup {
            None
        } else {
            Some((((arrived - warmup) as usize * b) / counted as usize).min(b - 1))
        };
        if content == 0 {
            let gap = stream.exp(spec.lam);
            arrived += 1;
            content = 1;
            if let Some(bi) = batch {
                t_total[bi] += gap;
                t_idle[bi] += gap;
            }
            continue;
        }
        // inter-departure interval; its law is fixed by the level now
        let within_band = content <= spec.n as u64;
        let law = if within_band { &spec.b1 } else { &spec.b2 };
        let duration = stream.sample(law);
        let inflow = stream.poisson(spec.lam * duration);
        if let Some(bi) = batch {
            t_total[bi] += duration;
            if within_band {
                t_level[content as usize - 1][bi] += duration;
            } else {
                t_above[bi] += duration;
            }
        }
        arrived += inflow;
        content = content + inflow - 1;
    }

    let p1 = ratio_estimate(&t_idle, &t_total, counted);
    let p2 = ratio_estimate(&t_above, &t_total, counted);
    let q = t_level
        .iter()
        .map(|tl| ratio_estimate(tl, &t_total, counted))
        .collect();
    Ok(DamSim { p1, p2, q })
}

// ---------------------------------------------------------------------------
// Priority buffer
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrioritySim {
    /// Loss fraction per class.
    pub per_class: Vec<SimEstimate>,
    /// Loss fraction of the cumulative first-k classes, k = 1..=classes.
    pub cumulative: Vec<SimEstimate>,
    /// Largest number of units removed at one departure epoch (never
    /// exceeds the batch size).
    pub max_removed: u32,
}

/// Simulates the marked renewal arrivals against Poisson batch departures.
/// A class-k arrival is rejected when the cumulative content of classes
/// 1..=k has reached the cumulative capacity N_k. Arrivals are processed
/// before departures at equal timestamps.
pub fn sim_priority(
    spec: &PrioritySpec,
    arrivals: u64,
    batch_count: u32,
    seed: u64,
) -> Result<PrioritySim> {
    validate_common(arrivals, batch_count)?;
    let b = batch_count as usize;
    let classes = spec.classes();
    let warmup = arrivals / 10;
    let counted = arrivals - warmup;
    let caps: Vec<usize> = (1..=classes).map(|k| spec.cumulative_cap(k)).collect();

    let mut stream = Stream::new(seed, 0);
    let mut queues = vec![0u64; classes];
    let mut barr = vec![vec![0.0f64; b]; classes];
    let mut bloss = vec![vec![0.0f64; b]; classes];
    let mut max_removed = 0u32;

    let mut next_arrival = stream.sample(&spec.arrival);
    let mut next_departure = stream.exp(spec.mu);
    let mut seen = 0u64;
    while seen < arrivals {
        if next_arrival <= next_departure {
            let class = stream.pick(&spec.class_probs);
            let cum: u64 = queues.iter().take(class + 1).sum();
            let lost = cum >= caps[class] as u64;
            if !lost {
                queues[class] += 1;
            }
            if seen >= warmup {
                let batch = (((seen - warmup) as usize * b) / counted as usize).min(b - 1);
                barr[class][batch] += 1.0;
                if lost {
                    bloss[class][batch] += 1.0;
                }
            }
            seen += 1;
            next_arrival += stream.sample(&spec.arrival);
        } else {
            let mut remaining = u64::from(spec.batch);
            for q in queues.iter_mut() {
                let take = (*q).min(remaining);
                *q -= take;
                remaining -= take;
                if remaining == 0 {
                    break;
                }
            }
            let removed = u64::from(spec.batch) - remaining;
            debug_assert!(removed <= u64::from(spec.batch));
            max_removed = max_removed.max(removed as u32);
            next_departure += stream.exp(spec.mu);
        }
    }

    let per_class = (0..classes)
        .map(|k| ratio_estimate(&bloss[k], &barr[k], counted))
        .collect();
    let cumulative = (0..classes)
        .map(|k| {
            let mut num = vec![0.0f64; b];
            let mut den = vec![0.0f64; b];
            for i in 0..=k {
                for j in 0..b {
                    num[j] += bloss[i][j];
                    den[j] += barr[i][j];
                }
            }
            ratio_estimate(&num, &den, counted)
        })
        .collect();
    Ok(PrioritySim { per_class, cumulative, max_removed })
}

// ---------------------------------------------------------------------------
// Config-driven dispatch
// ---------------------------------------------------------------------------

/// Model selector plus the parameters every run shares.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub model: SimModel,
    /// Busy periods for the regenerative model, arrivals otherwise.
    pub replications: u64,
    pub seed: u64,
    pub batch_count: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SimModel {
    Mg1 {
        spec: Mg1Spec,
        #[serde(default)]
        ccl_k: Vec<usize>,
    },
    Gim { spec: GimSpec },
    Dam { spec: DamSpec },
    Priority { spec: PrioritySpec },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum SimOutcome {
    Mg1(Mg1Sim),
    Gim(GimSim),
    Dam(DamSim),
    Priority(PrioritySim),
}

pub fn run(config: &SimConfig) -> Result<SimOutcome> {
    match &config.model {
        SimModel::Mg1 { spec, ccl_k } => Ok(SimOutcome::Mg1(sim_mg1(
            spec,
            ccl_k,
            config.replications,
            config.batch_count,
            config.seed,
        )?)),
        SimModel::Gim { spec } => Ok(SimOutcome::Gim(sim_gim(
            spec,
            config.replications,
            config.batch_count,
            config.seed,
        )?)),
        SimModel::Dam { spec } => Ok(SimOutcome::Dam(sim_dam(
            spec,
            config.replications,
            config.batch_count,
            config.seed,
        )?)),
        SimModel::Priority { spec } => Ok(SimOutcome::Priority(sim_priority(
            spec,
            config.replications,
            config.batch_count,
            config.seed,
        )?)),
    }
}
