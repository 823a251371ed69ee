//! Parallel execution schemas over the farm.
//!
//! * [`Schema::Static`]: instance `i` is pinned to worker `i mod w` and runs
//!   to completion; samples are stored and reduced afterwards.
//! * [`Schema::OnDemand`]: whole instances go to the first idle worker.
//! * [`Schema::Sliced`]: instances advance one quantum of simulation time at
//!   a time and return to the emitter through the feedback channel; the
//!   collector reduces samples on-line and retires grid points as soon as
//!   every instance has passed them.
//!
//! Every instance draws from its own seeded stream, so all three schemas and
//! every worker count produce the same samples and, because the reducer folds
//! in instance order, byte-identical statistics.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

use crate::reducer::{ReduceError, Reducer, StatPoint};
use crate::rule::Model;
use crate::ssa::{Grid, SimError, SimulationInstance, TrajectorySample};
use crate::streamnet::{
    run_farm, Collector, Emit, Emitter, FarmConfig, FarmError, FarmReport, FeedbackSender, StageError, WorkerLoad,
    DEFAULT_CAPACITY,
};

/// Default slice length in sample periods.
pub const DEFAULT_QUANTUM: u64 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Schema {
    Static,
    OnDemand,
    Sliced,
}

impl Schema {
    pub const ALL: [Schema; 3] = [Schema::Static, Schema::OnDemand, Schema::Sliced];

    pub fn name(self) -> &'static str {
        match self {
            Schema::Static => "static",
            Schema::OnDemand => "ondemand",
            Schema::Sliced => "sliced",
        }
    }
}

impl fmt::Display for Schema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Schema {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Schema::ALL
            .into_iter()
            .find(|schema| schema.name() == s)
            .ok_or_else(|| format!("unknown schema `{s}` (expected static, ondemand or sliced)"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchedulerConfig {
    pub schema: Schema,
    pub workers: usize,
    /// Slice length as a multiple of the model's sample period.
    pub quantum: u64,
    pub master_seed: u64,
    pub capacity: usize,
    /// Keep raw trajectories in sliced runs too.
    pub keep_raw: bool,
}

impl SchedulerConfig {
    pub fn new(schema: Schema, workers: usize) -> Self {
        SchedulerConfig {
            schema,
            workers,
            quantum: DEFAULT_QUANTUM,
            master_seed: 1,
            capacity: DEFAULT_CAPACITY,
            keep_raw: false,
        }
    }

    pub fn seed(mut self, master_seed: u64) -> Self {
        self.master_seed = master_seed;
        self
    }

    pub fn quantum(mut self, quantum: u64) -> Self {
        self.quantum = quantum;
        self
    }

    pub fn keep_raw(mut self, keep: bool) -> Self {
        self.keep_raw = keep;
        self
    }

    fn validate(&self) -> Result<(), ScheduleError> {
        if self.workers == 0 {
            return Err(ScheduleError::Config("at least one worker is required".into()));
        }
        if self.quantum == 0 {
            return Err(ScheduleError::Config("the quantum must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum ScheduleError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Farm(#[from] FarmError),
    #[error(transparent)]
    Reduce(#[from] ReduceError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Fresh instances `0..n` of `model`.
pub fn spawn_instances(model: &Arc<Model>, n: usize, master_seed: u64) -> Vec<SimulationInstance> {
    (0..n)
        .map(|i| SimulationInstance::new(Arc::clone(model), i, master_seed))
        .collect()
}

/// All samples of a run, by instance, plus who ran what.
#[derive(Debug, Clone)]
pub struct TrajectoryStore {
    samples: Vec<Vec<TrajectorySample>>,
    worker_of: Vec<Option<usize>>,
    observables: usize,
    grid: Grid,
    pub report: FarmReport,
}

impl TrajectoryStore {
    fn new(model: &Model, n: usize) -> Self {
        TrajectoryStore {
            samples: vec![Vec::new(); n],
            worker_of: vec![None; n],
            observables: model.observables.len(),
            grid: Grid::for_model(model),
            report: FarmReport::default(),
        }
    }

    pub fn instances(&self) -> usize {
        self.samples.len()
    }

    pub fn samples(&self, instance: usize) -> &[TrajectorySample] {
        &self.samples[instance]
    }

    pub fn all_samples(&self) -> impl Iterator<Item = &TrajectorySample> {
        self.samples.iter().flatten()
    }

    pub fn worker_of(&self, instance: usize) -> Option<usize> {
        self.worker_of[instance]
    }

    /// Instances run by each worker, in ascending order.
    pub fn assignments(&self, workers: usize) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); workers];
        for (i, w) in self.worker_of.iter().enumerate() {
            if let Some(w) = *w {
                out[w].push(i);
            }
        }
        out
    }

    /// Reduction phase: folds every trajectory into per-grid-point statistics.
    pub fn reduce(&self) -> Result<Vec<StatPoint>, ReduceError> {
        let mut reducer = Reducer::new(self.instances(), self.observables, self.grid);
        let mut points = Vec::with_capacity(self.grid.points() as usize);
        for trajectory in &self.samples {
            for s in trajectory {
                reducer.accumulate(s.clone())?;
            }
            points.extend(reducer.drain_ready());
        }
        Ok(points)
    }

    pub fn into_raw(self) -> Vec<Vec<TrajectorySample>> {
        self.samples
    }
}

/// Pins task `i` to worker `i mod w`.
pub struct RoundRobinEmitter<T> {
    tasks: std::vec::IntoIter<T>,
    issued: usize,
}

impl<T> RoundRobinEmitter<T> {
    pub fn new(tasks: Vec<T>) -> Self {
        RoundRobinEmitter {
            tasks: tasks.into_iter(),
            issued: 0,
        }
    }
}

impl<T: Send> Emitter for RoundRobinEmitter<T> {
    type Task = T;
    type Feedback = ();

    fn next(&mut self, load: &WorkerLoad) -> Emit<T> {
        match self.tasks.next() {
            Some(t) => {
                let k = self.issued % load.workers();
                self.issued += 1;
                Emit::To(k, t)
            }
            None => Emit::Finished,
        }
    }
}

/// Hands the next task to the first idle worker.
pub struct OnDemandEmitter<T> {
    tasks: std::collections::VecDeque<T>,
}

impl<T> OnDemandEmitter<T> {
    pub fn new(tasks: Vec<T>) -> Self {
        OnDemandEmitter { tasks: tasks.into() }
    }
}

impl<T: Send> Emitter for OnDemandEmitter<T> {
    type Task = T;
    type Feedback = ();

    fn next(&mut self, load: &WorkerLoad) -> Emit<T> {
        if self.tasks.is_empty() {
            return Emit::Finished;
        }
        match load.idle_worker() {
            Some(k) => Emit::To(k, self.tasks.pop_front().expect("non-empty")),
            None => Emit::Wait,
        }
    }
}

/// Something the sliced emitter can schedule repeatedly.
pub trait Resumable: Send {
    fn id(&self) -> usize;
    fn is_finished(&self) -> bool;
}

impl Resumable for SimulationInstance {
    fn id(&self) -> usize {
        SimulationInstance::id(self)
    }

    fn is_finished(&self) -> bool {
        SimulationInstance::is_finished(self)
    }
}

/// One slice of work: advance `item` through quantum number `quantum`
/// (zero-based), i.e. up to the end of window `quantum + 1`.
#[derive(Debug)]
pub struct WorkItem<I> {
    pub item: I,
    pub quantum: u64,
}

/// Least progress first, ties to the lowest id. `ready` holds
/// `(instance id, completed quanta)`.
pub fn next_dispatch(ready: &[(usize, u64)]) -> Option<usize> {
    ready
        .iter()
        .min_by_key(|&&(id, progress)| (progress, id))
        .map(|&(id, _)| id)
}

/// Reducer window the sliced emitter must respect: grid points per quantum,
/// index of the last grid point and the largest number of samples per
/// observable the reducer may hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SliceWindow {
    pub quantum: u64,
    pub last: u64,
    pub bound: usize,
}

impl SliceWindow {
    /// Samples an instance has emitted once it completed `level` quanta.
    fn samples(&self, level: u64) -> u64 {
        if level == 0 {
            0
        } else {
            level.saturating_mul(self.quantum).min(self.last) + 1
        }
    }
}

/// Emitter of the time-sliced schema.
///
/// An instance is dispatched only when it is idle (never two slices of one
/// instance at once). Ready instances at the minimum progress over all
/// unfinished instances always go first, least progress and lowest id
/// first. Without a [`SliceWindow`] nothing else is dispatched, so progress
/// never spreads by more than one quantum.
///
/// With a window, an instance one quantum ahead of the minimum may also run
/// on an otherwise idle worker, provided the samples the reducer could then
/// hold, counting every in-flight slice as already emitted, stay within the
/// window bound. Spread is then at most two quanta.
pub struct SlicedEmitter<I> {
    ready: Vec<(usize, u64)>,
    parked: Vec<Option<I>>,
    progress: Vec<u64>,
    /// Unfinished instances per completed-quanta level.
    levels: std::collections::BTreeMap<u64, usize>,
    slices: Vec<u64>,
    max_spread: u64,
    window: Option<SliceWindow>,
    /// Samples emitted per instance once every in-flight slice is done.
    emitted: u64,
}

impl<I: Resumable> SlicedEmitter<I> {
    pub fn new(items: Vec<I>) -> Self {
        let n = items.len();
        let mut parked: Vec<Option<I>> = (0..n).map(|_| None).collect();
        let mut ready = Vec::with_capacity(n);
        let mut unfinished = 0;
        for item in items {
            let id = item.id();
            assert!(id < n && parked[id].is_none(), "instance ids must be 0..n and unique");
            if !item.is_finished() {
                ready.push((id, 0));
                unfinished += 1;
            }
            parked[id] = Some(item);
        }
        let mut levels = std::collections::BTreeMap::new();
        if unfinished > 0 {
            levels.insert(0, unfinished);
        }
        SlicedEmitter {
            ready,
            parked,
            progress: vec![0; n],
            levels,
            slices: vec![0; n],
            max_spread: 0,
            window: None,
            emitted: 0,
        }
    }

    /// Lets instances run one quantum ahead while `window` allows it.
    pub fn with_window(mut self, window: SliceWindow) -> Self {
        let finished = self.parked.len() - self.ready.len();
        self.emitted = finished as u64 * (window.last + 1);
        self.window = Some(window);
        self
    }

    /// Slices dispatched per instance.
    pub fn slices(&self) -> &[u64] {
        &self.slices
    }

    /// Largest progress spread, in quanta, seen at any dispatch, counting
    /// in-flight instances at the level they are advancing to.
    pub fn max_spread(&self) -> u64 {
        self.max_spread
    }

    fn lowest_level(&self) -> Option<u64> {
        self.levels.keys().next().copied()
    }

    /// Whether one more slice from `level` fits the window while the
    /// slowest instances sit at `lowest`.
    fn fits(&self, level: u64, lowest: u64) -> bool {
        let Some(w) = self.window else {
            return level == lowest;
        };
        if level == lowest {
            return true;
        }
        let after = self.emitted + w.samples(level + 1) - w.samples(level);
        let retired = self.parked.len() as u64 * w.samples(lowest);
        level == lowest + 1 && after.saturating_sub(retired) <= w.bound as u64
    }
}

impl<I: Resumable> Emitter for SlicedEmitter<I> {
    type Task = WorkItem<I>;
    type Feedback = I;

    fn next(&mut self, load: &WorkerLoad) -> Emit<WorkItem<I>> {
        let Some(lowest) = self.lowest_level() else {
            return Emit::Finished;
        };
        let Some(worker) = load.idle_worker() else {
            return Emit::Wait;
        };
        let Some(id) = next_dispatch(&self.ready) else {
            return Emit::Wait;
        };
        if !self.fits(self.progress[id], lowest) {
            return Emit::Wait;
        }
        let pos = self
            .ready
            .iter()
            .position(|&(i, _)| i == id)
            .expect("chosen instance is ready");
        self.ready.swap_remove(pos);
        let item = self.parked[id].take().expect("ready instances are parked");
        let quantum = self.progress[id];
        if let Some(w) = self.window {
            self.emitted += w.samples(quantum + 1) - w.samples(quantum);
        }
        self.slices[id] += 1;
        let highest = self.levels.keys().next_back().copied().unwrap_or(lowest);
        self.max_spread = self.max_spread.max(highest.max(quantum + 1) - lowest);
        Emit::To(worker, WorkItem { item, quantum })
    }

    fn feedback(&mut self, item: I) {
        let id = item.id();
        let old = self.progress[id];
        let count = self.levels.get_mut(&old).expect("in-flight level is tracked");
        *count -= 1;
        if *count == 0 {
            self.levels.remove(&old);
        }
        if item.is_finished() {
            if let Some(w) = self.window {
                // Finished early: the rest of the grid was emitted too.
                self.emitted += w.last + 1 - w.samples(old + 1);
            }
            return;
        }
        self.progress[id] = old + 1;
        *self.levels.entry(old + 1).or_insert(0) += 1;
        self.ready.push((id, old + 1));
        self.parked[id] = Some(item);
    }
}

struct StoreCollector {
    store: TrajectoryStore,
}

impl Collector for StoreCollector {
    type Item = (usize, Vec<TrajectorySample>);
    type Feedback = ();
    type Output = TrajectoryStore;

    fn collect(
        &mut self,
        worker: usize,
        (id, samples): Self::Item,
        _: &mut FeedbackSender<'_, ()>,
    ) -> Result<(), StageError> {
        self.store.samples[id] = samples;
        self.store.worker_of[id] = Some(worker);
        Ok(())
    }

    fn finish(self) -> TrajectoryStore {
        self.store
    }
}

fn run_whole<E>(
    model: &Arc<Model>,
    n: usize,
    config: &SchedulerConfig,
    emitter: E,
) -> Result<TrajectoryStore, ScheduleError>
where
    E: Emitter<Task = SimulationInstance, Feedback = ()>,
{
    config.validate()?;
    let farm = FarmConfig::new(config.workers).with_capacity(config.capacity);
    let collector = StoreCollector {
        store: TrajectoryStore::new(model, n),
    };
    let (mut store, report) = run_farm(
        &farm,
        emitter,
        |_| {
            |mut inst: SimulationInstance| -> Result<(usize, Vec<TrajectorySample>), SimError> {
                let samples = inst.run_to_end()?;
                Ok((inst.id(), samples))
            }
        },
        collector,
    )?;
    store.report = report;
    Ok(store)
}

/// Static round-robin schema; reduction is left to [`TrajectoryStore::reduce`].
pub fn run_static(model: &Arc<Model>, n: usize, config: &SchedulerConfig) -> Result<TrajectoryStore, ScheduleError> {
    let tasks = spawn_instances(model, n, config.master_seed);
    run_whole(model, n, config, RoundRobinEmitter::new(tasks))
}

/// On-demand schema: whole instances to the first idle worker.
pub fn run_ondemand(model: &Arc<Model>, n: usize, config: &SchedulerConfig) -> Result<TrajectoryStore, ScheduleError> {
    let tasks = spawn_instances(model, n, config.master_seed);
    run_whole(model, n, config, OnDemandEmitter::new(tasks))
}

pub struct SliceResult {
    pub instance: SimulationInstance,
    pub samples: Vec<TrajectorySample>,
}

struct ReducingCollector {
    reducer: Reducer,
    points: Vec<StatPoint>,
    raw: Option<Vec<Vec<TrajectorySample>>>,
}

impl Collector for ReducingCollector {
    type Item = SliceResult;
    type Feedback = SimulationInstance;
    type Output = ReducingCollector;

    fn collect(
        &mut self,
        _worker: usize,
        result: SliceResult,
        feedback: &mut FeedbackSender<'_, SimulationInstance>,
    ) -> Result<(), StageError> {
        for s in result.samples {
            if let Some(raw) = &mut self.raw {
                raw[s.instance].push(s.clone());
            }
            self.reducer.accumulate(s).map_err(|e| StageError(e.to_string()))?;
        }
        self.points.extend(self.reducer.drain_ready());
        feedback.send(result.instance)
    }

    fn finish(self) -> Self {
        self
    }
}

#[derive(Debug, Clone)]
pub struct SlicedRun {
    pub points: Vec<StatPoint>,
    /// Most samples held for unretired grid points at any moment.
    pub peak_resident: usize,
    /// Slices dispatched per instance.
    pub slices: Vec<u64>,
    pub max_spread: u64,
    pub raw: Option<Vec<Vec<TrajectorySample>>>,
    pub report: FarmReport,
}

/// Window bound of the sliced schema: `n × (quantum + 1)` samples.
pub fn sliced_window_bound(n: usize, quantum: u64) -> usize {
    n * (quantum as usize + 1)
}

/// End of window `k` (1-based) in simulation time.
fn window_end(grid: Grid, t_stop: f64, quantum: u64, k: u64) -> f64 {
    let j = k.saturating_mul(quantum);
    if j >= grid.last {
        t_stop
    } else {
        grid.time(j)
    }
}

/// Time-sliced schema with pipelined on-line reduction into `reducer`.
pub fn run_sliced(
    model: &Arc<Model>,
    n: usize,
    config: &SchedulerConfig,
    reducer: Reducer,
) -> Result<SlicedRun, ScheduleError> {
    config.validate()?;
    if reducer.instances() != n {
        return Err(ScheduleError::Config(format!(
            "reducer expects {} instances, run has {n}",
            reducer.instances()
        )));
    }
    let grid = Grid::for_model(model);
    let t_stop = model.t_stop;
    let quantum = config.quantum;
    let farm = FarmConfig::new(config.workers)
        .with_capacity(config.capacity)
        .with_feedback();
    let bound = reducer.bound().unwrap_or_else(|| sliced_window_bound(n, quantum));
    let collector = ReducingCollector {
        reducer,
        points: Vec::with_capacity(grid.points() as usize),
        raw: config.keep_raw.then(|| vec![Vec::new(); n]),
    };
    let emitter = SlicedEmitter::new(spawn_instances(model, n, config.master_seed)).with_window(SliceWindow {
        quantum,
        last: grid.last,
        bound,
    });
    // The emitter is moved into the farm; its counters come back through a
    // wrapper that hands them over when the farm drops it.
    let stats = std::sync::Mutex::new((Vec::new(), 0));
    let tracked = Tracked {
        inner: emitter,
        out: &stats,
    };
    let (collector, report) = run_farm(
        &farm,
        tracked,
        |_| {
            move |work: WorkItem<SimulationInstance>| -> Result<SliceResult, SimError> {
                let mut instance = work.item;
                let bound = window_end(grid, t_stop, quantum, work.quantum + 1);
                let mut samples = Vec::new();
                instance.advance_until(bound, &mut samples)?;
                Ok(SliceResult { instance, samples })
            }
        },
        collector,
    )?;
    let reducer = collector.reducer;
    if !reducer.is_complete() {
        return Err(ScheduleError::Reduce(ReduceError::Incomplete {
            index: reducer.oldest(),
            seen: 0,
            instances: n,
        }));
    }
    let (slices, max_spread) = stats.into_inner().expect("emitter thread finished");
    Ok(SlicedRun {
        points: collector.points,
        peak_resident: reducer.peak_resident(),
        slices,
        max_spread,
        raw: collector.raw,
        report,
    })
}

struct Tracked<'a, I> {
    inner: SlicedEmitter<I>,
    out: &'a std::sync::Mutex<(Vec<u64>, u64)>,
}

impl<I: Resumable> Emitter for Tracked<'_, I> {
    type Task = WorkItem<I>;
    type Feedback = I;

    fn next(&mut self, load: &WorkerLoad) -> Emit<WorkItem<I>> {
        self.inner.next(load)
    }

    fn feedback(&mut self, item: I) {
        self.inner.feedback(item)
    }
}

impl<I> Drop for Tracked<'_, I> {
    fn drop(&mut self) {
        if let Ok(mut out) = self.out.lock() {
            *out = (std::mem::take(&mut self.inner.slices), self.inner.max_spread);
        }
    }
}

/// Reduced statistics of a run plus whatever raw data was kept.
#[derive(Debug, Clone)]
pub struct SimulationOutput {
    pub points: Vec<StatPoint>,
    pub raw: Option<Vec<Vec<TrajectorySample>>>,
    pub report: FarmReport,
    /// Peak reducer window, sliced schema only.
    pub peak_resident: Option<usize>,
}

/// Runs `n` instances under the configured schema and reduces them.
pub fn simulate(model: &Arc<Model>, n: usize, config: &SchedulerConfig) -> Result<SimulationOutput, ScheduleError> {
    if n == 0 {
        return Err(ScheduleError::Config("at least one instance is required".into()));
    }
    match config.schema {
        Schema::Static | Schema::OnDemand => {
            let store = if config.schema == Schema::Static {
                run_static(model, n, config)?
            } else {
                run_ondemand(model, n, config)?
            };
            let points = store.reduce()?;
            let report = store.report.clone();
            Ok(SimulationOutput {
                points,
                raw: config.keep_raw.then(|| store.into_raw()),
                report,
                peak_resident: None,
            })
        }
        Schema::Sliced => {
            let grid = Grid::for_model(model);
            let reducer =
                Reducer::new(n, model.observables.len(), grid).with_bound(sliced_window_bound(n, config.quantum));
            let run = run_sliced(model, n, config, reducer)?;
            Ok(SimulationOutput {
                points: run.points,
                raw: run.raw,
                report: run.report,
                peak_resident: Some(run.peak_resident),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Debug)]
    struct Job {
        id: usize,
        left: u32,
    }

    impl Resumable for Job {
        fn id(&self) -> usize {
            self.id
        }
        fn is_finished(&self) -> bool {
            self.left == 0
        }
    }

    #[test]
    fn least_progress_wins() {
        assert_eq!(next_dispatch(&[(0, 3), (1, 1), (2, 2)]), Some(1));
        assert_eq!(next_dispatch(&[(4, 2), (2, 2), (3, 2)]), Some(2));
        assert_eq!(next_dispatch(&[]), None);
    }

    #[test]
    fn schema_names_round_trip() {
        for s in Schema::ALL {
            assert_eq!(s.name().parse::<Schema>().unwrap(), s);
        }
        assert!("fast".parse::<Schema>().is_err());
    }

    #[test]
    fn sliced_emitter_tracks_levels() {
        let jobs = vec![Job { id: 0, left: 2 }, Job { id: 1, left: 0 }, Job { id: 2, left: 1 }];
        let e = SlicedEmitter::new(jobs);
        assert_eq!(e.lowest_level(), Some(0));
        assert_eq!(e.ready.len(), 2);
        assert_eq!(e.levels.get(&0), Some(&2));
    }

    #[test]
    fn run_ahead_respects_the_window() {
        let jobs = (0..4).map(|id| Job { id, left: 5 }).collect();
        let w = SliceWindow {
            quantum: 2,
            last: 9,
            bound: 12,
        };
        let mut e = SlicedEmitter::new(jobs).with_window(w);
        assert_eq!(e.emitted, 0);
        assert!(e.fits(0, 0));
        assert!(!e.fits(2, 0));
        // Everyone through level 0 and dispatched again: 4 × 5 samples,
        // 4 × 3 of them retirable.
        e.emitted = 20;
        assert!(e.fits(2, 1));
        e.emitted = 22;
        assert!(e.fits(2, 1));
        e.emitted = 23;
        assert!(!e.fits(2, 1));
        // Level 4 reaches the last point, so the step costs one sample.
        assert_eq!(w.samples(5) - w.samples(4), 1);
    }

    #[test]
    fn window_end_clamps_to_stop_time() {
        let grid = Grid::new(0.5, 4.2);
        assert_eq!(grid.last, 8);
        assert_eq!(window_end(grid, 4.2, 4, 1), 2.0);
        assert_eq!(window_end(grid, 4.2, 4, 2), 4.2);
        assert_eq!(window_end(grid, 4.2, 4, 3), 4.2);
    }

    #[test]
    fn zero_workers_is_a_config_error() {
        let m = Arc::new(crate::syntax::parse_model("%term a").unwrap());
        let c = SchedulerConfig::new(Schema::Static, 0);
        assert!(matches!(simulate(&m, 1, &c), Err(ScheduleError::Config(_))));
        let c = SchedulerConfig::new(Schema::Sliced, 1).quantum(0);
        assert!(matches!(simulate(&m, 1, &c), Err(ScheduleError::Config(_))));
        let c = SchedulerConfig::new(Schema::Sliced, 1);
        assert!(matches!(simulate(&m, 0, &c), Err(ScheduleError::Config(_))));
    }
}
