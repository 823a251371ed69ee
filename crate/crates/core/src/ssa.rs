//! Gillespie direct method over CWC terms.
//!
//! Each step rebuilds the matchset, draws the waiting time from the total
//! rate, picks a rule with probability r_i / r and then one of that rule's
//! contexts with probability proportional to its rate, removes the matched
//! left-hand side and instantiates the right-hand side in its place.
//!
//! A [`SimulationInstance`] owns its term, clock and random stream, so it can
//! be advanced in slices ([`SimulationInstance::advance_until`]) on any
//! thread and still produce exactly the trajectory of an uninterrupted run.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::matcher::{build_matchset, MatchEntry, MatchSet};
use crate::rule::{apply_binding, Model, RewriteError};
use crate::term::{CompartmentIds, Term};

/// SplitMix64 finalizer, used to decorrelate per-instance seeds.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic, platform-independent random stream.
#[derive(Debug, Clone)]
pub struct Prng {
    seed: u64,
    rng: ChaCha8Rng,
}

impl Prng {
    pub fn seeded(seed: u64) -> Self {
        Prng {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Stream of instance `index` under `master_seed`.
    pub fn for_instance(master_seed: u64, index: usize) -> Self {
        Self::seeded(master_seed ^ splitmix64(index as u64))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform in (0, 1].
    pub fn uniform(&mut self) -> f64 {
        1.0 - self.rng.random::<f64>()
    }
}

/// Inverse-CDF exponential: -ln(u) / rate.
pub fn exponential_from_uniform(u: f64, rate: f64) -> f64 {
    debug_assert!(u > 0.0 && u <= 1.0);
    debug_assert!(rate > 0.0);
    -u.ln() / rate
}

pub fn sample_exponential(prng: &mut Prng, rate: f64) -> f64 {
    exponential_from_uniform(prng.uniform(), rate)
}

/// Index `i` such that `u * sum(weights)` falls in the i-th cumulative
/// interval `(c_{i-1}, c_i]`. Zero weights are never selected.
pub fn select_cumulative(weights: &[f64], u: f64) -> usize {
    let total: f64 = weights.iter().sum();
    let target = u * total;
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        acc += w;
        last_positive = i;
        if target <= acc {
            return i;
        }
    }
    // Rounding can leave target a hair above the final partial sum.
    last_positive
}

pub fn select_rule(prng: &mut Prng, matchset: &MatchSet) -> usize {
    select_cumulative(matchset.rule_rates(), prng.uniform())
}

pub fn select_context<'m>(prng: &mut Prng, entries: &'m [MatchEntry]) -> &'m MatchEntry {
    let u = prng.uniform();
    if entries.len() == 1 {
        return &entries[0];
    }
    let rates: Vec<f64> = entries.iter().map(|e| e.rate).collect();
    &entries[select_cumulative(&rates, u)]
}

/// Fixed sampling grid t_j = j * delta, j = 0..=last.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub delta: f64,
    pub last: u64,
}

impl Grid {
    pub fn new(delta: f64, t_stop: f64) -> Self {
        // Tolerance so that e.g. 0.3 / 0.1 counts as 3 grid steps.
        let last = (t_stop / delta + 1e-9).floor() as u64;
        Grid { delta, last }
    }

    pub fn for_model(model: &Model) -> Self {
        Self::new(model.delta, model.t_stop)
    }

    pub fn time(&self, j: u64) -> f64 {
        j as f64 * self.delta
    }

    pub fn points(&self) -> u64 {
        self.last + 1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySample {
    pub instance: usize,
    pub index: u64,
    pub time: f64,
    pub values: Vec<u64>,
}

#[derive(Debug, Clone, Error, PartialEq)]
#[error("sample rejected: {0}")]
pub struct SinkRejected(pub String);

pub trait SampleSink {
    fn accept(&mut self, sample: TrajectorySample) -> Result<(), SinkRejected>;
}

impl SampleSink for Vec<TrajectorySample> {
    fn accept(&mut self, sample: TrajectorySample) -> Result<(), SinkRejected> {
        self.push(sample);
        Ok(())
    }
}

/// Adapts a closure into a [`SampleSink`].
pub struct FnSink<F>(pub F);

impl<F> SampleSink for FnSink<F>
where
    F: FnMut(TrajectorySample) -> Result<(), SinkRejected>,
{
    fn accept(&mut self, sample: TrajectorySample) -> Result<(), SinkRejected> {
        (self.0)(sample)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Running,
    /// No rule applies; the state is frozen.
    Stalled,
    /// Every grid point has been emitted.
    Done,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepOutcome {
    Stepped(f64),
    Stalled,
}

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("instance {instance}: {source}")]
    Rewrite {
        instance: usize,
        #[source]
        source: RewriteError,
    },
    #[error(transparent)]
    Sink(#[from] SinkRejected),
    #[error("instance {0} is not running")]
    NotRunning(usize),
}

/// A resumable simulation: term, clock and random stream.
#[derive(Debug, Clone)]
pub struct SimulationInstance {
    id: usize,
    model: Arc<Model>,
    term: Term,
    clock: f64,
    prng: Prng,
    ids: CompartmentIds,
    grid: Grid,
    next_sample: u64,
    status: Status,
    /// Next event time, drawn but not yet fired, with the matchset it was
    /// drawn from. Kept across slice boundaries so slicing never changes the
    /// random stream.
    pending: Option<(f64, MatchSet)>,
    events: u64,
}

impl SimulationInstance {
    pub fn new(model: Arc<Model>, id: usize, master_seed: u64) -> Self {
        Self::with_prng(model, id, Prng::for_instance(master_seed, id))
    }

    pub fn with_prng(model: Arc<Model>, id: usize, prng: Prng) -> Self {
        let term = model.initial.clone();
        SimulationInstance {
            id,
            ids: CompartmentIds::after(&term),
            grid: Grid::for_model(&model),
            model,
            term,
            clock: 0.0,
            prng,
            next_sample: 0,
            status: Status::Running,
            pending: None,
            events: 0,
        }
    }

    pub fn id(&self) -> usize {
        self.id
    }

    pub fn model(&self) -> &Arc<Model> {
        &self.model
    }

    pub fn term(&self) -> &Term {
        &self.term
    }

    pub fn clock(&self) -> f64 {
        self.clock
    }

    pub fn status(&self) -> Status {
        self.status
    }

    pub fn is_finished(&self) -> bool {
        self.status != Status::Running
    }

    pub fn next_sample_index(&self) -> u64 {
        self.next_sample
    }

    pub fn events(&self) -> u64 {
        self.events
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn observe(&self) -> Vec<u64> {
        self.term.totals(&self.model.observables)
    }

    /// Draws the next event time unless one is already pending.
    /// Returns `None` when no rule applies.
    fn schedule(&mut self) -> Option<f64> {
        if self.pending.is_none() {
            let ms = build_matchset(&self.model, &self.term);
            if ms.total_rate() <= 0.0 {
                return None;
            }
            let tau = sample_exponential(&mut self.prng, ms.total_rate());
            self.pending = Some((self.clock + tau, ms));
        }
        self.pending.as_ref().map(|(t, _)| *t)
    }

    fn fire(&mut self) -> Result<(), SimError> {
        let (time, ms) = self.pending.take().expect("fire without a pending event");
        let rule_index = select_rule(&mut self.prng, &ms);
        let entry = select_context(&mut self.prng, ms.rule_entries(rule_index));
        let rule = &self.model.rules[entry.rule];
        let err = |source| SimError::Rewrite {
            instance: self.id,
            source,
        };
        let content = self
            .term
            .content_at_mut(entry.context.as_slice())
            .ok_or_else(|| err(RewriteError::StaleContext(entry.context.0.clone())))?;
        let binding = rule
            .lhs
            .extract(content, entry.compartment, rule.vars.len())
            .map_err(err)?;
        apply_binding(
            &rule.rhs,
            &binding,
            &mut self.term,
            entry.context.as_slice(),
            &mut self.ids,
        )
        .map_err(err)?;
        self.clock = time;
        self.events += 1;
        Ok(())
    }

    /// One Match / Resolve / Update cycle, without sampling.
    pub fn step(&mut self) -> Result<StepOutcome, SimError> {
        if self.status != Status::Running {
            return Err(SimError::NotRunning(self.id));
        }
        let before = self.clock;
        match self.schedule() {
            None => {
                self.status = Status::Stalled;
                Ok(StepOutcome::Stalled)
            }
            Some(_) => {
                self.fire()?;
                Ok(StepOutcome::Stepped(self.clock - before))
            }
        }
    }

    fn emit_through<S: SampleSink + ?Sized>(&mut self, below: f64, up_to: f64, sink: &mut S) -> Result<(), SimError> {
        let mut values = None;
        while self.next_sample <= self.grid.last {
            let t = self.grid.time(self.next_sample);
            if !(t < below && t <= up_to) {
                break;
            }
            let values = values.get_or_insert_with(|| self.observe()).clone();
            sink.accept(TrajectorySample {
                instance: self.id,
                index: self.next_sample,
                time: t,
                values,
            })?;
            self.next_sample += 1;
        }
        Ok(())
    }

    /// Simulates up to `t_bound`, emitting every grid sample t_j ≤ t_bound
    /// with the state holding at t_j. Events are fired while their time is
    /// ≤ `t_bound`; the first event past it stays pending for the next call.
    ///
    /// Returns [`Status::Running`] with `clock == t_bound` when the bound is
    /// reached first. Once all grid points are emitted the instance is
    /// [`Status::Done`]. If no rule applies, points up to `t_bound` are
    /// emitted with the frozen state; the instance becomes
    /// [`Status::Stalled`] once the last one is out.
    pub fn advance_until<S: SampleSink + ?Sized>(&mut self, t_bound: f64, sink: &mut S) -> Result<Status, SimError> {
        if self.status != Status::Running {
            return Ok(self.status);
        }
        loop {
            match self.schedule() {
                None => {
                    // Frozen state: samples still go out one window at a
                    // time so a consumer's buffering bound holds.
                    self.emit_through(f64::INFINITY, t_bound, sink)?;
                    if self.next_sample > self.grid.last {
                        self.status = Status::Stalled;
                    } else {
                        self.clock = self.clock.max(t_bound);
                    }
                    return Ok(self.status);
                }
                Some(next) => {
                    self.emit_through(next, t_bound, sink)?;
                    if self.next_sample > self.grid.last {
                        self.status = Status::Done;
                        return Ok(self.status);
                    }
                    if next > t_bound {
                        self.clock = self.clock.max(t_bound);
                        return Ok(self.status);
                    }
                    self.fire()?;
                }
            }
        }
    }

    /// Runs to completion, collecting every sample.
    pub fn run_to_end(&mut self) -> Result<Vec<TrajectorySample>, SimError> {
        let mut out = Vec::with_capacity(self.grid.points() as usize);
        let t_stop = self.model.t_stop;
        self.advance_until(t_stop, &mut out)?;
        debug_assert!(self.is_finished());
        Ok(out)
    }
}
