//! Drivers that let the algorithms decide PARTITION, brute-force oracles to
//! check them against, and measurements on SSP traces (parametric curve,
//! average arrival time).

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactnum::Rational;
use crate::gadgets::{
    build_gns, build_gssp, split_watched_arc, x_param, GadgetError, PartitionInstance,
};
use crate::netsimplex::{ns_run, NsError, NsOptions, NsTrace};
use crate::ssp::{ssp_run, SspError, SspTrace};

/// Largest instance the exhaustive oracles accept.
pub const ORACLE_MAX_N: usize = 24;
pub const SSP_MAX_N: usize = 14;
pub const NS_MAX_N: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExperimentError {
    #[error("instance has {n} entries, at most {max} supported")]
    InstanceTooLarge { n: usize, max: usize },
    #[error(transparent)]
    Ssp(#[from] SspError),
    #[error(transparent)]
    Ns(#[from] NsError),
    #[error(transparent)]
    Gadget(#[from] GadgetError),
    #[error("horizon {horizon} is below the largest path cost {max_cost}")]
    HorizonTooSmall { horizon: Rational, max_cost: Rational },
    #[error("trace has no iterations")]
    EmptyTrace,
}

fn check_size(inst: &PartitionInstance, max: usize) -> Result<(), ExperimentError> {
    if inst.len() > max {
        return Err(ExperimentError::InstanceTooLarge { n: inst.len(), max });
    }
    Ok(())
}

fn dfs<T>(units: &[T], target: &T, start: usize, sum: T, chosen: &mut Vec<usize>) -> bool
where
    T: Clone + Ord + for<'a> std::ops::Add<&'a T, Output = T>,
{
    for i in start..units.len() {
        let next = sum.clone() + &units[i];
        if next > *target {
            continue;
        }
        chosen.push(i);
        if next == *target || dfs(units, target, i + 1, next, chosen) {
            return true;
        }
        chosen.pop();
    }
    false
}

/// Lexicographically smallest 0-based index set whose entries sum to half
/// the total, if any.
pub fn partition_oracle(inst: &PartitionInstance) -> Result<Option<Vec<usize>>, ExperimentError> {
    check_size(inst, ORACLE_MAX_N)?;
    let units = inst.units();
    let total: BigInt = units.iter().sum();
    if (&total % 2u32) != BigInt::zero() {
        return Ok(None);
    }
    let target = total / 2u32;
    let mut chosen = Vec::new();
    let small: Option<Vec<u128>> = units.iter().map(|u| u.to_u128()).collect();
    let found = match (small, target.to_u128()) {
        (Some(u), Some(t)) => dfs(&u, &t, 0, 0u128, &mut chosen),
        _ => dfs(&units, &target, 0, BigInt::zero(), &mut chosen),
    };
    Ok(found.then_some(chosen))
}

fn first_zero<T>(units: &[T]) -> Option<u64>
where
    T: Clone + Eq + Zero + for<'a> std::ops::Add<&'a T, Output = T>,
    for<'a> &'a T: std::ops::Sub<&'a T, Output = T> + std::ops::Add<&'a T, Output = T>,
{
    let n = units.len();
    // sum for k = 0: every sign positive
    let mut sum = units.iter().fold(T::zero(), |acc, u| acc + u);
    let mut signs = vec![true; n];
    for k in 0..(1u64 << n) {
        if sum.is_zero() {
            return Some(k);
        }
        // k -> k+1 flips the trailing ones and the next zero bit
        for (j, positive) in signs.iter_mut().enumerate() {
            let twice = &units[j] + &units[j];
            sum = if *positive { &sum - &twice } else { &sum + &twice };
            *positive = !*positive;
            if !*positive {
                break;
            }
        }
    }
    None
}

/// Least `k` with `a_n^{[k]} = 0`.
pub fn smallest_zero_k(inst: &PartitionInstance) -> Result<Option<u64>, ExperimentError> {
    check_size(inst, ORACLE_MAX_N)?;
    let units = inst.units();
    let small: Option<Vec<i128>> = units.iter().map(|u| u.to_i128()).collect();
    Ok(match small {
        Some(u) if u.iter().all(|x| *x < (1i128 << 90)) => first_zero(&u),
        _ => first_zero(&units),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Ssp,
    Ns,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub answer: bool,
    /// iteration (SSP) or pivot (NS) at which the watched event first happened
    pub witness: Option<u64>,
    #[serde(rename = "oracleSubset")]
    pub oracle_subset: Option<Vec<usize>>,
    pub iterations: u64,
}

fn oracle_if_small(inst: &PartitionInstance) -> Option<Vec<usize>> {
    partition_oracle(inst).ok().flatten()
}

/// Default iteration budget for SSP on gadget networks of depth `n`.
pub fn ssp_budget(n: usize) -> u64 {
    1u64 << (n + 4).min(62)
}

/// Runs SSP on `G_ssp` and reports whether arc `e` ever carried flow.
pub fn decide_via_ssp(inst: &PartitionInstance) -> Result<Verdict, ExperimentError> {
    Ok(decide_via_ssp_traced(inst)?.0)
}

pub fn decide_via_ssp_traced(inst: &PartitionInstance) -> Result<(Verdict, SspTrace), ExperimentError> {
    check_size(inst, SSP_MAX_N)?;
    let g = build_gssp(inst);
    let trace = ssp_run(&g.net, &g.watched, ssp_budget(inst.len()))?;
    let witness = trace.first_watched_use();
    let verdict = Verdict {
        answer: witness.is_some(),
        witness,
        oracle_subset: oracle_if_small(inst),
        iterations: trace.iterations.len() as u64,
    };
    Ok((verdict, trace))
}

/// Runs Network Simplex on `G_ns` and reports whether arc `e` ever entered the basis.
pub fn decide_via_ns(inst: &PartitionInstance) -> Result<Verdict, ExperimentError> {
    Ok(decide_via_ns_traced(inst)?.0)
}

pub fn ns_budget(n: usize) -> u64 {
    1u64 << (n + 5).min(62)
}

pub fn decide_via_ns_traced(inst: &PartitionInstance) -> Result<(Verdict, NsTrace), ExperimentError> {
    check_size(inst, NS_MAX_N)?;
    let g = build_gns(inst);
    let opts = NsOptions {
        watched: g.watched.clone(),
        max_pivots: ns_budget(g.meta.n),
        ..NsOptions::default()
    };
    let basis = g.initial_basis.clone().expect("G_ns has a basis");
    let trace = ns_run(&g.net, basis, g.initial_flow.clone(), opts)?;
    let witness = trace.first_watched_entry();
    let verdict = Verdict {
        answer: witness.is_some(),
        witness,
        oracle_subset: oracle_if_small(inst),
        iterations: trace.pivots.len() as u64,
    };
    Ok((verdict, trace))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Census {
    pub count: u64,
    pub threshold: u64,
    #[serde(rename = "thresholdExceeded")]
    pub threshold_exceeded: bool,
}

/// Iteration count on the networks whose length alone reveals the answer:
/// SSP on `G_ssp` with a split watched arc (threshold `2^{n+1}`), or Network
/// Simplex on `G_ns` (threshold `4 x_n`).
pub fn iteration_census(inst: &PartitionInstance, algo: Algorithm) -> Result<Census, ExperimentError> {
    let (count, threshold) = match algo {
        Algorithm::Ssp => {
            check_size(inst, SSP_MAX_N)?;
            let g = split_watched_arc(&build_gssp(inst), inst)?;
            let trace = ssp_run(&g.net, &g.watched, ssp_budget(inst.len()))?;
            (trace.iterations.len() as u64, 1u64 << (inst.len() + 1))
        }
        Algorithm::Ns => {
            let (v, _) = decide_via_ns_traced(inst)?;
            let n = inst.len() + 1;
            let four_x = (&x_param(n) * &Rational::from_integer(4))
                .to_integer()
                .and_then(|x| x.to_u64())
                .expect("4 x_n fits");
            (v.iterations, four_x)
        }
    };
    Ok(Census {
        count,
        threshold,
        threshold_exceeded: count > threshold,
    })
}

/// Minimum cost as a function of the amount routed, as breakpoints.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParametricCurve {
    pub breakpoints: Vec<(Rational, Rational)>,
}

impl ParametricCurve {
    /// Slope of every segment.
    pub fn slopes(&self) -> Vec<Rational> {
        self.breakpoints
            .windows(2)
            .map(|w| &(&w[1].1 - &w[0].1) / &(&w[1].0 - &w[0].0))
            .collect()
    }
}

pub fn parametric_curve(trace: &SspTrace) -> ParametricCurve {
    let mut pts = vec![(Rational::zero(), Rational::zero())];
    let mut last_slope: Option<&Rational> = None;
    for it in &trace.iterations {
        if it.amount.is_zero() {
            continue;
        }
        let (x, y) = pts.last().cloned().expect("nonempty");
        let next = (&x + &it.amount, &y + &(&it.path_cost * &it.amount));
        if last_slope == Some(&it.path_cost) {
            *pts.last_mut().expect("nonempty") = next;
        } else {
            pts.push(next);
        }
        last_slope = Some(&it.path_cost);
    }
    ParametricCurve { breakpoints: pts }
}

pub fn breakpoint_count(curve: &ParametricCurve) -> usize {
    curve.breakpoints.len().saturating_sub(1)
}

/// Average arrival time of the temporally repeated flow that sends, along
/// each successive path `j`, at rate `amount_j` during `[c_j, T]`.
pub fn average_arrival_time(trace: &SspTrace, horizon: &Rational) -> Result<Rational, ExperimentError> {
    let max_cost = trace
        .iterations
        .iter()
        .map(|it| &it.path_cost)
        .max()
        .ok_or(ExperimentError::EmptyTrace)?;
    if horizon < max_cost {
        return Err(ExperimentError::HorizonTooSmall {
            horizon: horizon.clone(),
            max_cost: max_cost.clone(),
        });
    }
    let t2 = horizon * horizon;
    let half = Rational::frac(1, 2);
    let mut weighted = Rational::zero();
    let mut mass = Rational::zero();
    for it in &trace.iterations {
        let c = &it.path_cost;
        weighted += &(&(&(&t2 - &(c * c)) * &half) * &it.amount);
        mass += &(&(horizon - c) * &it.amount);
    }
    if mass.is_zero() {
        return Ok(horizon.clone());
    }
    Ok(&weighted / &mass)
}
