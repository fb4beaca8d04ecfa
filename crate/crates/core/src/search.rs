//! Reference-point guided multi-point hillclimber over frequency vectors.
//!
//! A run first builds an initial archive from uniform frequency vectors
//! `(j, ..., j)` for increasing `j` (stopping at the first one the archive
//! rejects) plus random mixtures of consecutive values. It then repeats
//! improvement steps: pick the archive entries closest to the reference
//! points, evaluate their complete ±1 neighborhoods and insert everything.
//! The run converges when a step adds nothing to the archive.

use std::collections::HashSet;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluate::{EvalSettings, Evaluator, VrpSolver};
use crate::model::{FrequencyVector, Instance, ObjectiveVector};
use crate::pareto::{
    build_reference_points, select_representatives, Archive, NormalizedPoint, ReferencePointSet,
    Weights,
};
use crate::vrp::RtrConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Savings,
    Rtr,
}

impl std::str::FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "savings" => Ok(SolverKind::Savings),
            "rtr" => Ok(SolverKind::Rtr),
            other => Err(Error::contract(format!("unknown routing solver {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Budget {
    pub max_steps: Option<u64>,
    pub max_evaluations: Option<u64>,
    pub max_seconds: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct SearchConfig {
    pub ref_point_count: usize,
    pub solver: SolverKind,
    pub rtr: RtrConfig,
    pub seed: u64,
    /// Random mixtures evaluated per consecutive pair of uniform frequencies.
    pub mixed_samples: usize,
    pub budget: Budget,
    /// Replaces the canonical layout; joined with the two extreme corners.
    pub user_ref_points: Option<Vec<NormalizedPoint>>,
    pub weights: Weights,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            ref_point_count: 3,
            solver: SolverKind::Rtr,
            rtr: RtrConfig::default(),
            seed: 0,
            mixed_samples: 5,
            budget: Budget::default(),
            user_ref_points: None,
            weights: Weights::default(),
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        self.reference_points().map(|_| ())
    }

    pub fn reference_points(&self) -> Result<ReferencePointSet> {
        self.weights.check()?;
        let mut refs = build_reference_points(self.ref_point_count)?;
        refs.weights = self.weights;
        match &self.user_ref_points {
            Some(user) => ReferencePointSet::with_corners(user, self.weights),
            None => Ok(refs),
        }
    }

    pub fn eval_settings(&self) -> EvalSettings {
        let solver = match self.solver {
            SolverKind::Savings => VrpSolver::Savings,
            SolverKind::Rtr => VrpSolver::Rtr(self.rtr),
        };
        EvalSettings { solver, seed: self.seed }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SearchStats {
    pub steps: u64,
    pub evaluations: u64,
    pub archive_size: usize,
    #[serde(with = "seconds")]
    pub elapsed: Duration,
}

mod seconds {
    use serde::{Deserialize, Deserializer, Serializer};
    use std::time::Duration;

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        let secs = f64::deserialize(d)?;
        Ok(Duration::from_secs_f64(secs.max(0.0)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    BudgetExhausted,
    Cancelled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepReport {
    pub improved: bool,
    pub selected: usize,
    pub evaluations: usize,
}

/// All vectors at ±1 from `freqs` in exactly one position, staying within
/// `1..=horizon`. For each position the increment comes first.
pub fn neighborhood(freqs: &FrequencyVector, horizon: usize) -> Vec<FrequencyVector> {
    let base = freqs.as_slice();
    let mut out = Vec::with_capacity(2 * base.len());
    for i in 0..base.len() {
        for next in [base[i] + 1, base[i].wrapping_sub(1)] {
            if next >= 1 && next as usize <= horizon {
                let mut v = base.to_vec();
                v[i] = next;
                out.push(FrequencyVector::new(v).expect("entries stay ≥ 1"));
            }
        }
    }
    out
}

pub struct Search {
    evaluator: Evaluator,
    config: SearchConfig,
    refs: ReferencePointSet,
    archive: Archive,
    seen: HashSet<FrequencyVector>,
    stats: SearchStats,
    rng: ChaCha8Rng,
    constructed: bool,
}

impl Search {
    pub fn new(instance: Arc<Instance>, config: SearchConfig) -> Result<Self> {
        let refs = config.reference_points()?;
        instance.ensure_valid()?;
        let evaluator = Evaluator::new(instance, config.eval_settings());
        let rng = ChaCha8Rng::seed_from_u64(config.seed);
        Ok(Self {
            evaluator,
            config,
            refs,
            archive: Archive::new(),
            seen: HashSet::new(),
            stats: SearchStats::default(),
            rng,
            constructed: false,
        })
    }

    /// Continues from a previously obtained archive, skipping construction.
    /// The evaluation memo starts with the archive's vectors.
    pub fn resume(
        instance: Arc<Instance>,
        config: SearchConfig,
        archive: Archive,
        stats: SearchStats,
    ) -> Result<Self> {
        let mut s = Self::new(instance, config)?;
        for e in archive.iter() {
            e.payload.check_for(s.instance())?;
        }
        s.seen = archive.iter().map(|e| e.payload.clone()).collect();
        s.archive = archive;
        s.stats = SearchStats { archive_size: s.archive.len(), ..stats };
        s.constructed = true;
        Ok(s)
    }

    pub fn instance(&self) -> &Arc<Instance> {
        self.evaluator.instance()
    }

    pub fn evaluator(&self) -> &Evaluator {
        &self.evaluator
    }

    pub fn config(&self) -> &SearchConfig {
        &self.config
    }

    pub fn archive(&self) -> &Archive {
        &self.archive
    }

    pub fn into_archive(self) -> Archive {
        self.archive
    }

    pub fn stats(&self) -> SearchStats {
        self.stats
    }

    pub fn reference_points(&self) -> &ReferencePointSet {
        &self.refs
    }

    pub fn is_constructed(&self) -> bool {
        self.constructed
    }

    /// Switches to user reference points (joined with the extreme corners)
    /// for subsequent steps.
    pub fn set_reference_points(&mut self, user: &[NormalizedPoint]) -> Result<()> {
        self.refs = ReferencePointSet::with_corners(user, self.config.weights)?;
        self.config.user_ref_points = Some(user.to_vec());
        Ok(())
    }

    /// Evaluates the vectors not seen before, in parallel, keeping input
    /// order.
    fn evaluate_new(&mut self, candidates: Vec<FrequencyVector>) -> Result<Vec<(FrequencyVector, ObjectiveVector)>> {
        let fresh: Vec<FrequencyVector> = candidates
            .into_iter()
            .filter(|f| self.seen.insert(f.clone()))
            .collect();
        let evaluator = &self.evaluator;
        let results = fresh
            .into_par_iter()
            .map(|f| evaluator.objectives(&f).map(|o| (f, o)))
            .collect::<Result<Vec<_>>>()?;
        self.stats.evaluations += results.len() as u64;
        Ok(results)
    }

    fn insert_all(&mut self, results: Vec<(FrequencyVector, ObjectiveVector)>) -> bool {
        let mut accepted = false;
        for (f, o) in results {
            accepted |= self.archive.insert(o, f);
        }
        self.stats.archive_size = self.archive.len();
        accepted
    }

    /// Builds the initial archive. Uniform vectors `(j, ..., j)` are tried
    /// for `j = 1, 2, ...` until one is rejected (or `j` reaches the
    /// horizon); then for every pair `(j, j + 1)` below the stopping value,
    /// `mixed_samples` vectors with entries drawn uniformly from `{j, j + 1}`.
    pub fn construct(&mut self, cancel: Option<&AtomicBool>) -> Result<()> {
        let n = self.instance().num_customers();
        let horizon = self.instance().horizon as u32;
        let mut stop = 1;
        for j in 1..=horizon {
            if cancel.is_some_and(|c| c.load(Ordering::Relaxed)) {
                return Ok(());
            }
            stop = j;
            let results = self.evaluate_new(vec![FrequencyVector::uniform(n, j)])?;
            if !self.insert_all(results) {
                break;
            }
        }
        let mut mixed = Vec::with_capacity(self.config.mixed_samples * stop as usize);
        for j in 1..stop {
            for _ in 0..self.config.mixed_samples {
                let v = (0..n).map(|_| if self.rng.random_bool(0.5) { j + 1 } else { j }).collect();
                mixed.push(FrequencyVector::new(v)?);
            }
        }
        let results = self.evaluate_new(mixed)?;
        self.insert_all(results);
        self.constructed = true;
        Ok(())
    }

    /// One improvement step over the representatives of the current archive.
    pub fn step(&mut self) -> Result<StepReport> {
        if self.archive.is_empty() {
            return Err(Error::contract("improvement step on an empty archive"));
        }
        let horizon = self.instance().horizon;
        let selected = select_representatives(&self.archive, &self.refs);
        let candidates: Vec<FrequencyVector> = selected
            .iter()
            .flat_map(|&ix| neighborhood(&self.archive.entries()[ix].payload, horizon))
            .collect();
        let results = self.evaluate_new(candidates)?;
        let evaluations = results.len();
        let improved = self.insert_all(results);
        self.stats.steps += 1;
        Ok(StepReport { improved, selected: selected.len(), evaluations })
    }

    /// Constructs (if not done yet) and improves until convergence, budget
    /// exhaustion or cancellation. The budget counts from this call.
    /// `observer` sees the search after construction and after every step.
    pub fn run_with(
        &mut self,
        cancel: Option<&AtomicBool>,
        mut observer: impl FnMut(&Search, Option<&StepReport>),
    ) -> Result<Termination> {
        let started = Instant::now();
        let base = self.stats;
        let cancelled = || cancel.is_some_and(|c| c.load(Ordering::Relaxed));
        let budget = self.config.budget;

        let outcome = (|| {
            if !self.constructed {
                self.construct(cancel)?;
                self.stats.elapsed = base.elapsed + started.elapsed();
                observer(self, None);
                if !self.constructed {
                    return Ok(Termination::Cancelled);
                }
            }
            loop {
                if cancelled() {
                    return Ok(Termination::Cancelled);
                }
                let exhausted = budget.max_steps.is_some_and(|m| self.stats.steps - base.steps >= m)
                    || budget
                        .max_evaluations
                        .is_some_and(|m| self.stats.evaluations - base.evaluations >= m)
                    || budget.max_seconds.is_some_and(|m| started.elapsed().as_secs_f64() >= m);
                if exhausted {
                    return Ok(Termination::BudgetExhausted);
                }
                let report = self.step()?;
                self.stats.elapsed = base.elapsed + started.elapsed();
                observer(self, Some(&report));
                if !report.improved {
                    return Ok(Termination::Converged);
                }
            }
        })();
        self.stats.elapsed = base.elapsed + started.elapsed();
        outcome
    }

    pub fn run(&mut self) -> Result<Termination> {
        self.run_with(None, |_, _| {})
    }
}

/// Runs a complete search and returns the final archive and statistics.
pub fn run(inst: &Instance, cfg: &SearchConfig) -> Result<(Archive, SearchStats)> {
    let mut search = Search::new(Arc::new(inst.clone()), cfg.clone())?;
    search.run()?;
    let stats = search.stats();
    Ok((search.into_archive(), stats))
}

/// Largest number of vectors [`enumerate_front`] will evaluate.
pub const ENUMERATION_LIMIT: u64 = 1_000_000;

/// Exact Pareto front over all vectors in `{1..=max_freq}ⁿ` (capped at the
/// horizon), every period routed with the given settings. Returns the front
/// and the number of vectors evaluated.
pub fn enumerate_front(inst: &Instance, max_freq: u32, settings: &EvalSettings) -> Result<(Archive, u64)> {
    inst.ensure_valid()?;
    let n = inst.num_customers() as u32;
    let k = max_freq.min(inst.horizon as u32);
    if k == 0 {
        return Err(Error::contract("maximum frequency must be at least 1"));
    }
    let total = u64::from(k)
        .checked_pow(n)
        .filter(|&t| t <= ENUMERATION_LIMIT)
        .ok_or_else(|| {
            Error::contract(format!("{k}^{n} vectors exceed the enumeration limit of {ENUMERATION_LIMIT}"))
        })?;
    let evaluator = Evaluator::new(Arc::new(inst.clone()), *settings);
    let results = (0..total)
        .into_par_iter()
        .map(|mut code| {
            let freqs: Vec<u32> = (0..n)
                .map(|_| {
                    let f = (code % u64::from(k)) as u32 + 1;
                    code /= u64::from(k);
                    f
                })
                .collect();
            let f = FrequencyVector::new(freqs)?;
            evaluator.objectives(&f).map(|o| (f, o))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut front = Archive::new();
    for (f, o) in results {
        front.insert(o, f);
    }
    Ok((front, total))
}
