//! Emitter → workers → collector farm with an optional feedback loop.
//!
//! Every edge is a single-producer/single-consumer channel: the emitter owns
//! one outbound queue per worker and arbitrates fan-out, the collector polls
//! one inbound queue per worker round-robin and arbitrates fan-in. A single
//! upstream queue runs from the collector back to the emitter; it carries
//! user feedback items plus a completion notice per processed task, which is
//! how the emitter knows each worker's load.
//!
//! Stages never block inside a queue. A stage that cannot make progress
//! backs off (spin, then yield, then short sleeps) and retries.

use std::any::Any;
use std::fmt;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::atomic::{AtomicBool, Ordering};
use std::thread;
use std::time::Duration;

use thiserror::Error;

use super::spsc::{channel, Consumer, Full, Producer, DEFAULT_CAPACITY};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FarmConfig {
    pub workers: usize,
    /// Capacity of every channel in the farm.
    pub capacity: usize,
    /// Whether the collector may send items back to the emitter.
    pub feedback: bool,
}

impl FarmConfig {
    pub fn new(workers: usize) -> Self {
        FarmConfig {
            workers,
            capacity: DEFAULT_CAPACITY,
            feedback: false,
        }
    }

    pub fn with_feedback(mut self) -> Self {
        self.feedback = true;
        self
    }

    pub fn with_capacity(mut self, capacity: usize) -> Self {
        self.capacity = capacity;
        self
    }
}

/// Tasks dispatched to each worker whose completion has not yet come back
/// through the collector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorkerLoad {
    in_flight: Vec<usize>,
}

impl WorkerLoad {
    fn new(workers: usize) -> Self {
        WorkerLoad {
            in_flight: vec![0; workers],
        }
    }

    pub fn workers(&self) -> usize {
        self.in_flight.len()
    }

    pub fn in_flight(&self, worker: usize) -> usize {
        self.in_flight[worker]
    }

    pub fn total(&self) -> usize {
        self.in_flight.iter().sum()
    }

    /// Lowest-numbered worker with nothing in flight.
    pub fn idle_worker(&self) -> Option<usize> {
        self.in_flight.iter().position(|&n| n == 0)
    }
}

pub enum Emit<T> {
    /// Dispatch to the least-loaded worker with queue space.
    Task(T),
    /// Dispatch to a specific worker.
    To(usize, T),
    /// Nothing to send right now; ask again after more feedback arrives.
    Wait,
    /// End of stream.
    Finished,
}

pub trait Emitter: Send {
    type Task: Send;
    type Feedback: Send;

    fn next(&mut self, load: &WorkerLoad) -> Emit<Self::Task>;

    fn feedback(&mut self, item: Self::Feedback) {
        let _ = item;
    }
}

pub trait Collector: Send {
    type Item: Send;
    type Feedback: Send;
    type Output: Send;

    fn collect(
        &mut self,
        worker: usize,
        item: Self::Item,
        feedback: &mut FeedbackSender<'_, Self::Feedback>,
    ) -> Result<(), StageError>;

    fn finish(self) -> Self::Output;
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("{0}")]
pub struct StageError(pub String);

impl From<String> for StageError {
    fn from(s: String) -> Self {
        StageError(s)
    }
}

impl From<&str> for StageError {
    fn from(s: &str) -> Self {
        StageError(s.to_string())
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum FarmError {
    #[error("a farm needs at least one worker")]
    NoWorkers,
    #[error("channel capacity must be positive")]
    ZeroCapacity,
    #[error("worker {worker} failed: {message}")]
    WorkerFailed { worker: usize, message: String },
    #[error("emitter failed: {0}")]
    Emitter(String),
    #[error("collector failed: {0}")]
    Collector(String),
    #[error("emitter is waiting with nothing in flight")]
    Stalled,
    #[error("{stage} panicked: {message}")]
    Panicked { stage: String, message: String },
    #[error("run aborted")]
    Aborted,
}

impl FarmError {
    /// Secondary errors caused by another stage aborting the run.
    fn is_knock_on(&self) -> bool {
        matches!(self, FarmError::Aborted)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FarmReport {
    pub dispatched: u64,
    /// Tasks processed by each worker.
    pub per_worker: Vec<u64>,
    pub feedback: u64,
    /// Feedback items that arrived after the emitter finished.
    pub late_feedback: u64,
}

enum Downstream<T> {
    Task(T),
    Eos,
}

enum FromWorker<R> {
    Item(R),
    Failed(String),
    Eos,
}

enum Upstream<F> {
    Completed(usize),
    Item(F),
    Closed,
}

struct Backoff {
    step: u32,
}

impl Backoff {
    fn new() -> Self {
        Backoff { step: 0 }
    }

    fn reset(&mut self) {
        self.step = 0;
    }

    fn snooze(&mut self) {
        if self.step < 6 {
            for _ in 0..(1u32 << self.step) {
                std::hint::spin_loop();
            }
        } else if self.step < 16 {
            thread::yield_now();
        } else {
            let shift = (self.step - 16).min(3);
            thread::sleep(Duration::from_micros(25 << shift));
        }
        self.step = self.step.saturating_add(1);
    }
}

/// Pushes with backoff until accepted; `false` if the run was aborted.
fn push_retry<T>(tx: &mut Producer<T>, mut item: T, abort: &AtomicBool) -> bool {
    let mut backoff = Backoff::new();
    loop {
        match tx.push(item) {
            Ok(()) => return true,
            Err(Full(back)) => {
                if abort.load(Ordering::Acquire) {
                    return false;
                }
                item = back;
                backoff.snooze();
            }
        }
    }
}

/// Collector-side handle on the feedback channel.
pub struct FeedbackSender<'a, F> {
    tx: &'a mut Producer<Upstream<F>>,
    abort: &'a AtomicBool,
    enabled: bool,
}

impl<F> FeedbackSender<'_, F> {
    pub fn send(&mut self, item: F) -> Result<(), StageError> {
        if !self.enabled {
            return Err("feedback is disabled for this farm".into());
        }
        if push_retry(self.tx, Upstream::Item(item), self.abort) {
            Ok(())
        } else {
            Err("run aborted".into())
        }
    }
}

fn panic_message(payload: Box<dyn Any + Send>) -> String {
    if let Some(s) = payload.downcast_ref::<&str>() {
        s.to_string()
    } else if let Some(s) = payload.downcast_ref::<String>() {
        s.clone()
    } else {
        "non-string panic payload".to_string()
    }
}

struct EmitterStats {
    dispatched: u64,
    feedback: u64,
    late_feedback: u64,
}

fn run_emitter<E: Emitter>(
    mut emitter: E,
    mut down: Vec<Producer<Downstream<E::Task>>>,
    mut up: Consumer<Upstream<E::Feedback>>,
    abort: &AtomicBool,
) -> Result<EmitterStats, FarmError> {
    let workers = down.len();
    let mut load = WorkerLoad::new(workers);
    let mut stats = EmitterStats {
        dispatched: 0,
        feedback: 0,
        late_feedback: 0,
    };
    let mut pending: Option<(Option<usize>, E::Task)> = None;
    let mut finished = false;
    let mut eos_sent = vec![false; workers];
    let mut backoff = Backoff::new();
    loop {
        if abort.load(Ordering::Acquire) {
            return Err(FarmError::Aborted);
        }
        let mut progress = false;
        while let Some(msg) = up.pop() {
            progress = true;
            match msg {
                Upstream::Completed(k) => load.in_flight[k] -= 1,
                Upstream::Item(item) if finished => {
                    drop(item);
                    stats.late_feedback += 1;
                }
                Upstream::Item(item) => {
                    stats.feedback += 1;
                    emitter.feedback(item);
                }
                Upstream::Closed => return Ok(stats),
            }
        }
        if finished {
            for (k, sent) in eos_sent.iter_mut().enumerate() {
                if !*sent && down[k].push(Downstream::Eos).is_ok() {
                    *sent = true;
                    progress = true;
                }
            }
        } else {
            if pending.is_none() {
                match emitter.next(&load) {
                    Emit::Task(task) => pending = Some((None, task)),
                    Emit::To(k, task) if k < workers => pending = Some((Some(k), task)),
                    Emit::To(k, _) => return Err(FarmError::Emitter(format!("dispatch to worker {k} of {workers}"))),
                    Emit::Wait => {
                        if load.total() == 0 && !progress {
                            return Err(FarmError::Stalled);
                        }
                    }
                    Emit::Finished => {
                        finished = true;
                        continue;
                    }
                }
            }
            if let Some((target, task)) = pending.take() {
                let choice = target.or_else(|| {
                    (0..workers)
                        .filter(|&k| !down[k].is_full())
                        .min_by_key(|&k| (load.in_flight[k], k))
                });
                match choice {
                    Some(k) => match down[k].push(Downstream::Task(task)) {
                        Ok(()) => {
                            load.in_flight[k] += 1;
                            stats.dispatched += 1;
                            progress = true;
                        }
                        Err(Full(Downstream::Task(task))) => pending = Some((target, task)),
                        Err(Full(Downstream::Eos)) => unreachable!(),
                    },
                    None => pending = Some((target, task)),
                }
            }
        }
        if progress {
            backoff.reset();
        } else {
            backoff.snooze();
        }
    }
}

fn run_worker<T, R, W, WE>(
    mut work: W,
    mut rx: Consumer<Downstream<T>>,
    mut tx: Producer<FromWorker<R>>,
    abort: &AtomicBool,
) -> u64
where
    W: FnMut(T) -> Result<R, WE>,
    WE: fmt::Display,
{
    let mut processed = 0;
    let mut backoff = Backoff::new();
    loop {
        match rx.pop() {
            Some(Downstream::Task(task)) => {
                backoff.reset();
                let msg = match catch_unwind(AssertUnwindSafe(|| work(task))) {
                    Ok(Ok(item)) => {
                        processed += 1;
                        FromWorker::Item(item)
                    }
                    Ok(Err(e)) => FromWorker::Failed(e.to_string()),
                    Err(payload) => FromWorker::Failed(format!("panicked: {}", panic_message(payload))),
                };
                let failed = matches!(msg, FromWorker::Failed(_));
                if !push_retry(&mut tx, msg, abort) || failed {
                    return processed;
                }
            }
            Some(Downstream::Eos) => {
                push_retry(&mut tx, FromWorker::Eos, abort);
                return processed;
            }
            None => {
                if abort.load(Ordering::Acquire) {
                    return processed;
                }
                backoff.snooze();
            }
        }
    }
}

fn run_collector<C: Collector>(
    mut collector: C,
    mut inbound: Vec<Consumer<FromWorker<C::Item>>>,
    mut up: Producer<Upstream<C::Feedback>>,
    feedback_enabled: bool,
    abort: &AtomicBool,
) -> Result<C::Output, FarmError> {
    let workers = inbound.len();
    let mut closed = vec![false; workers];
    let mut open = workers;
    let mut backoff = Backoff::new();
    loop {
        if abort.load(Ordering::Acquire) {
            return Err(FarmError::Aborted);
        }
        let mut progress = false;
        for k in 0..workers {
            if closed[k] {
                continue;
            }
            let Some(msg) = inbound[k].pop() else { continue };
            progress = true;
            match msg {
                FromWorker::Item(item) => {
                    let mut sender = FeedbackSender {
                        tx: &mut up,
                        abort,
                        enabled: feedback_enabled,
                    };
                    collector
                        .collect(k, item, &mut sender)
                        .map_err(|e| FarmError::Collector(e.0))?;
                    if !push_retry(&mut up, Upstream::Completed(k), abort) {
                        return Err(FarmError::Aborted);
                    }
                }
                FromWorker::Failed(message) => {
                    return Err(FarmError::WorkerFailed { worker: k, message });
                }
                FromWorker::Eos => {
                    closed[k] = true;
                    open -= 1;
                }
            }
        }
        if open == 0 {
            push_retry(&mut up, Upstream::Closed, abort);
            return Ok(collector.finish());
        }
        if progress {
            backoff.reset();
        } else {
            backoff.snooze();
        }
    }
}

/// Runs a stage body, turning errors and panics into an abort of the run.
fn guarded<T>(stage: &str, abort: &AtomicBool, body: impl FnOnce() -> Result<T, FarmError>) -> Result<T, FarmError> {
    let result = match catch_unwind(AssertUnwindSafe(body)) {
        Ok(r) => r,
        Err(payload) => Err(FarmError::Panicked {
            stage: stage.to_string(),
            message: panic_message(payload),
        }),
    };
    if result.is_err() {
        abort.store(true, Ordering::Release);
    }
    result
}

/// Runs a farm to completion.
///
/// Every task produced by `emitter` is processed by exactly one worker
/// (built by `make_worker(index)`) and the result is handed to `collector`
/// on the collector's own thread. The run ends after the emitter reports
/// [`Emit::Finished`] and every channel has drained. A worker error or panic
/// aborts the whole run and is reported with the worker index.
pub fn run_farm<E, C, M, W, WE>(
    config: &FarmConfig,
    emitter: E,
    make_worker: M,
    collector: C,
) -> Result<(C::Output, FarmReport), FarmError>
where
    E: Emitter,
    C: Collector<Feedback = E::Feedback>,
    M: Fn(usize) -> W,
    W: FnMut(E::Task) -> Result<C::Item, WE> + Send,
    WE: fmt::Display,
{
    let workers = config.workers;
    if workers == 0 {
        return Err(FarmError::NoWorkers);
    }
    if config.capacity == 0 {
        return Err(FarmError::ZeroCapacity);
    }
    let mut down_tx = Vec::with_capacity(workers);
    let mut down_rx = Vec::with_capacity(workers);
    let mut in_tx = Vec::with_capacity(workers);
    let mut in_rx = Vec::with_capacity(workers);
    for _ in 0..workers {
        let (tx, rx) = channel(config.capacity);
        down_tx.push(tx);
        down_rx.push(rx);
        let (tx, rx) = channel(config.capacity);
        in_tx.push(tx);
        in_rx.push(rx);
    }
    let (up_tx, up_rx) = channel(config.capacity);
    let abort = AtomicBool::new(false);
    let feedback = config.feedback;

    thread::scope(|s| {
        let abort = &abort;
        let emitter_handle = s.spawn(move || guarded("emitter", abort, || run_emitter(emitter, down_tx, up_rx, abort)));
        let worker_handles: Vec<_> = down_rx
            .into_iter()
            .zip(in_tx)
            .enumerate()
            .map(|(k, (rx, tx))| {
                let work = make_worker(k);
                s.spawn(move || guarded(&format!("worker {k}"), abort, || Ok(run_worker(work, rx, tx, abort))))
            })
            .collect();
        let collector_handle = s.spawn(move || {
            guarded("collector", abort, || {
                run_collector(collector, in_rx, up_tx, feedback, abort)
            })
        });

        let emitted = emitter_handle.join().expect("stage panics are caught");
        let per_worker: Vec<_> = worker_handles
            .into_iter()
            .map(|h| h.join().expect("stage panics are caught"))
            .collect();
        let collected = collector_handle.join().expect("stage panics are caught");

        let mut errors: Vec<FarmError> = Vec::new();
        if let Err(e) = &collected {
            errors.push(e.clone());
        }
        if let Err(e) = &emitted {
            errors.push(e.clone());
        }
        for r in &per_worker {
            if let Err(e) = r {
                errors.push(e.clone());
            }
        }
        if let Some(e) = errors.iter().find(|e| !e.is_knock_on()).or(errors.first()) {
            return Err(e.clone());
        }
        let stats = emitted.expect("checked above");
        let report = FarmReport {
            dispatched: stats.dispatched,
            per_worker: per_worker.into_iter().map(|r| r.expect("checked above")).collect(),
            feedback: stats.feedback,
            late_feedback: stats.late_feedback,
        };
        Ok((collected.expect("checked above"), report))
    })
}

/// Emitter over a fixed sequence of tasks, dispatched to the least-loaded
/// worker as queue space allows.
pub struct IterEmitter<I>(pub I);

impl<I, T> Emitter for IterEmitter<I>
where
    I: Iterator<Item = T> + Send,
    T: Send,
{
    type Task = T;
    type Feedback = ();

    fn next(&mut self, _load: &WorkerLoad) -> Emit<T> {
        match self.0.next() {
            Some(t) => Emit::Task(t),
            None => Emit::Finished,
        }
    }
}

/// Collector that keeps every item with the index of the worker that
/// produced it, in arrival order.
pub struct VecCollector<R>(pub Vec<(usize, R)>);

impl<R> Default for VecCollector<R> {
    fn default() -> Self {
        VecCollector(Vec::new())
    }
}

impl<R: Send> Collector for VecCollector<R> {
    type Item = R;
    type Feedback = ();
    type Output = Vec<(usize, R)>;

    fn collect(&mut self, worker: usize, item: R, _: &mut FeedbackSender<'_, ()>) -> Result<(), StageError> {
        self.0.push((worker, item));
        Ok(())
    }

    fn finish(self) -> Self::Output {
        self.0
    }
}
