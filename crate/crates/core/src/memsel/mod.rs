//! Memory selection: the coverage objective `Σ_i max_j s(m_j, x_i)`,
//! threshold-driven initial memories, and a CLARANS-style randomized search
//! over memory sets that differ by a single swap.

mod cache;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use self::cache::{ScoreCache, FULL_CACHE_LIMIT};
use crate::core::{MemorySet, Similarity};
use crate::error::{Error, Result};
use crate::rng;
use crate::scalar::{pairwise_sum, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchParams {
    /// Global restarts.
    pub zg: usize,
    /// Local swap proposals per restart.
    pub zl: usize,
    /// Similarity threshold for initial coverage and for every memory.
    pub b_t: f64,
    pub seed: u64,
    /// Force this many memories per restart (initial memories are truncated
    /// or padded with random points). `None` keeps whatever the threshold
    /// initialization produces.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub memory_count: Option<usize>,
}

impl Default for SearchParams {
    fn default() -> Self {
        Self {
            zg: 5,
            zl: 100,
            b_t: 0.5,
            seed: 0,
            memory_count: None,
        }
    }
}

impl SearchParams {
    pub fn validate(&self) -> Result<()> {
        if self.zg == 0 {
            return Err(Error::Config("zg must be at least 1".into()));
        }
        if !(self.b_t > 0.0 && self.b_t < 1.0) {
            return Err(Error::Config(format!("b_t = {} must lie strictly inside (0, 1)", self.b_t)));
        }
        if self.memory_count == Some(0) {
            return Err(Error::Config("memory_count must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct RestartTrace<T> {
    pub memory_count: usize,
    pub initial_objective: T,
    pub final_objective: T,
    pub accepted_steps: usize,
    /// Objective after each accepted swap.
    pub accepted_objectives: Vec<T>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SearchTrace<T> {
    pub restarts: Vec<RestartTrace<T>>,
    pub best_objective: T,
    pub best_memories: Vec<usize>,
}

fn check_memories(memories: &[usize], n: usize) -> Result<()> {
    if memories.is_empty() {
        return Err(Error::Input("memory list is empty".into()));
    }
    match memories.iter().find(|&&m| m >= n) {
        Some(m) => Err(Error::Input(format!("memory index {m} out of range for {n} points"))),
        None => Ok(()),
    }
}

/// `Σ_i max_j s(m_j, x_i)` over all points.
pub fn clustering_objective<T, S>(memories: &[usize], points: &[S::Point], sim: &S) -> Result<T>
where
    T: Scalar,
    S: Similarity<T>,
{
    check_memories(memories, points.len())?;
    let best: Vec<T> = points
        .iter()
        .map(|x| {
            memories
                .iter()
                .map(|&m| sim.score(&points[m], x))
                .fold(T::neg_infinity(), T::max)
        })
        .collect();
    Ok(pairwise_sum(&best))
}

fn cached_objective<T: Scalar, S: Similarity<T>>(memories: &[usize], cache: &ScoreCache<'_, T, S>) -> T {
    let rows: Vec<_> = memories.iter().map(|&m| cache.row(m)).collect();
    let best: Vec<T> = (0..cache.n())
        .map(|i| rows.iter().map(|r| r[i]).fold(T::neg_infinity(), T::max))
        .collect();
    pairwise_sum(&best)
}

/// Repeatedly picks a random uncovered point as a memory and removes every
/// point scoring above `b_t` against it (and the pick itself).
pub fn generate_initial_memories<T, S, R>(points: &[S::Point], sim: &S, b_t: T, rng: &mut R) -> Result<Vec<usize>>
where
    T: Scalar,
    S: Similarity<T>,
    R: Rng + ?Sized,
{
    if points.is_empty() {
        return Err(Error::Input("dataset is empty".into()));
    }
    if !(b_t > T::zero() && b_t < T::one()) {
        return Err(Error::Config(format!("b_t = {b_t} must lie strictly inside (0, 1)")));
    }
    Ok(initial_memories(points.len(), |m, x| sim.score(&points[m], &points[x]), b_t, rng))
}

fn initial_memories<T: Scalar, R: Rng + ?Sized>(
    n: usize,
    score: impl Fn(usize, usize) -> T,
    b_t: T,
    rng: &mut R,
) -> Vec<usize> {
    let mut rejected: Vec<usize> = (0..n).collect();
    let mut memories = Vec::new();
    while !rejected.is_empty() {
        let pick = rejected[rng.gen_range(0..rejected.len())];
        rejected.retain(|&x| x != pick && !(score(pick, x) > b_t));
        memories.push(pick);
    }
    memories
}

/// A uniformly random single-swap neighbour: the memory at `position` is
/// replaced by `non_members[slot]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Swap {
    pub position: usize,
    pub slot: usize,
}

pub fn pick_neighbor<R: Rng + ?Sized>(q: usize, n_non_members: usize, rng: &mut R) -> Option<Swap> {
    if q == 0 || n_non_members == 0 {
        return None;
    }
    Some(Swap {
        position: rng.gen_range(0..q),
        slot: rng.gen_range(0..n_non_members),
    })
}

fn run_restart<T, S>(
    cache: &ScoreCache<'_, T, S>,
    params: &SearchParams,
    restart: usize,
) -> (Vec<usize>, RestartTrace<T>)
where
    T: Scalar,
    S: Similarity<T>,
{
    let n = cache.n();
    let b_t = T::of(params.b_t);
    let mut rng = rng::stream(params.seed, &[restart as u64]);
    let mut current = initial_memories(n, |m, x| cache.row(m)[x], b_t, &mut rng);
    let mut is_member = vec![false; n];
    current.iter().for_each(|&m| is_member[m] = true);
    let mut non_members: Vec<usize> = (0..n).filter(|&i| !is_member[i]).collect();

    if let Some(q) = params.memory_count {
        let q = q.min(n);
        while current.len() > q {
            let dropped = current.pop().expect("nonempty");
            non_members.push(dropped);
        }
        non_members.sort_unstable();
        while current.len() < q {
            let slot = rng.gen_range(0..non_members.len());
            current.push(non_members.swap_remove(slot));
        }
        non_members.sort_unstable();
    }

    let initial = cached_objective(&current, cache);
    let mut score = initial;
    let mut accepted_objectives = Vec::new();
    for _ in 0..params.zl {
        let Some(swap) = pick_neighbor(current.len(), non_members.len(), &mut rng) else {
            break;
        };
        let mut proposal = current.clone();
        proposal[swap.position] = non_members[swap.slot];
        let new_score = cached_objective(&proposal, cache);
        if new_score > score {
            non_members[swap.slot] = current[swap.position];
            current = proposal;
            score = new_score;
            accepted_objectives.push(score);
        }
    }
    let trace = RestartTrace {
        memory_count: current.len(),
        initial_objective: initial,
        final_objective: score,
        accepted_steps: accepted_objectives.len(),
        accepted_objectives,
    };
    (current, trace)
}

/// Randomized memory search. Each restart seeds from
/// [`generate_initial_memories`] and greedily accepts strictly improving
/// single swaps; the best set over all restarts is returned with every
/// threshold set to `b_t`. Earlier restarts win ties.
pub fn learn_memories<T, S>(points: &[S::Point], sim: &S, params: &SearchParams) -> Result<(MemorySet<T>, SearchTrace<T>)>
where
    T: Scalar,
    S: Similarity<T>,
{
    params.validate()?;
    if points.is_empty() {
        return Err(Error::Input("dataset is empty".into()));
    }
    let cache = ScoreCache::new(points, sim);
    learn_memories_cached(&cache, params)
}

pub fn learn_memories_cached<T, S>(cache: &ScoreCache<'_, T, S>, params: &SearchParams) -> Result<(MemorySet<T>, SearchTrace<T>)>
where
    T: Scalar,
    S: Similarity<T>,
{
    params.validate()?;
    let runs: Vec<(Vec<usize>, RestartTrace<T>)> = (0..params.zg)
        .into_par_iter()
        .map(|g| run_restart(cache, params, g))
        .collect();
    let mut best = 0;
    for (g, (_, t)) in runs.iter().enumerate() {
        if t.final_objective > runs[best].1.final_objective {
            best = g;
        }
    }
    let best_memories = runs[best].0.clone();
    let best_objective = runs[best].1.final_objective;
    let memset = MemorySet::with_threshold(best_memories.clone(), T::of(params.b_t))?;
    Ok((
        memset,
        SearchTrace {
            restarts: runs.into_iter().map(|(_, t)| t).collect(),
            best_objective,
            best_memories,
        },
    ))
}

/// Largest subset count [`exhaustive_memories`] will enumerate.
pub const EXHAUSTIVE_LIMIT: u128 = 1_000_000;

fn binomial_saturating(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
        if acc > EXHAUSTIVE_LIMIT * 1000 {
            return u128::MAX;
        }
    }
    acc
}

/// Brute-force optimum over all `q`-subsets; the lexicographically smallest
/// maximizer wins ties.
pub fn exhaustive_memories<T, S>(points: &[S::Point], sim: &S, q: usize) -> Result<Vec<usize>>
where
    T: Scalar,
    S: Similarity<T>,
{
    let n = points.len();
    if q == 0 || q > n {
        return Err(Error::Input(format!("need 1 <= q <= n, got q = {q}, n = {n}")));
    }
    let count = binomial_saturating(n, q);
    if count > EXHAUSTIVE_LIMIT {
        return Err(Error::Size(format!("C({n}, {q}) subsets exceed the {EXHAUSTIVE_LIMIT} limit")));
    }
    let cache = ScoreCache::with_limit(points, sim, usize::MAX);
    let mut combo: Vec<usize> = (0..q).collect();
    let mut best = combo.clone();
    let mut best_score = cached_objective(&combo, &cache);
    loop {
        // next combination in lexicographic order
        let Some(i) = (0..q).rev().find(|&i| combo[i] < n - q + i) else {
            break;
        };
        combo[i] += 1;
        for j in i + 1..q {
            combo[j] = combo[j - 1] + 1;
        }
        let s = cached_objective(&combo, &cache);
        if s > best_score {
            best_score = s;
            best.clone_from(&combo);
        }
    }
    Ok(best)
}
