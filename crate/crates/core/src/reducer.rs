//! On-line reduction of trajectory samples into per-grid-point statistics.
//!
//! Samples may arrive in any order, but each grid point folds them in
//! ascending instance order: samples that arrive early are parked until every
//! lower instance has been folded. That makes the floating-point result a
//! function of the sample set alone, independent of scheduling. Once a grid
//! point has seen all instances it is retired into a [`StatPoint`] and its
//! storage released; only a window of unretired points is ever held.

use std::collections::{BTreeMap, VecDeque};
use std::io::{self, BufRead, Write};

use thiserror::Error;

use crate::ssa::{Grid, TrajectorySample};

/// Two-sided 90% normal quantile z_0.95.
pub const Z90: f64 = 1.6449;

/// Running mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Welford {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    /// Combines two disjoint accumulations (Chan et al.).
    pub fn merge(&mut self, other: &Welford) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        self.mean += d * other.n as f64 / n as f64;
        self.m2 += other.m2 + d * d * (self.n as f64) * (other.n as f64) / n as f64;
        self.n = n;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance; 0 below two samples.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn ci90(&self) -> f64 {
        ci90_half_width(self.variance(), self.n)
    }

    pub fn summary(&self) -> Moments {
        Moments {
            mean: self.mean(),
            variance: self.variance(),
            ci90: self.ci90(),
        }
    }
}

/// Half-width z·sqrt(var/n) of the 90% normal confidence interval.
pub fn ci90_half_width(variance: f64, n: u64) -> f64 {
    if n < 2 {
        0.0
    } else {
        Z90 * (variance / n as f64).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
    pub ci90: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StatPoint {
    pub index: u64,
    pub time: f64,
    /// One entry per observable.
    pub stats: Vec<Moments>,
}

#[derive(Debug, Error, PartialEq)]
pub enum ReduceError {
    #[error("duplicate sample for instance {instance} at grid index {index}")]
    Duplicate { instance: usize, index: u64 },
    #[error("sample for instance {instance} at grid index {index} arrived after the point was retired")]
    Retired { instance: usize, index: u64 },
    #[error("grid index {index} is beyond the last grid point {last}")]
    OffGrid { index: u64, last: u64 },
    #[error("instance {instance} is out of range for {instances} instances")]
    UnknownInstance { instance: usize, instances: usize },
    #[error("sample has {got} values, expected {expected}")]
    Width { got: usize, expected: usize },
    #[error("window overflow: {resident} resident samples exceed the bound of {bound}")]
    Overflow { resident: usize, bound: usize },
    #[error("grid point {index} cannot be retired: {seen} of {instances} samples seen")]
    Incomplete { index: u64, seen: usize, instances: usize },
    #[error("grid point {index} is not the oldest unretired point {oldest}")]
    OutOfOrder { index: u64, oldest: u64 },
}

#[derive(Debug, Clone)]
struct Slot {
    /// Next instance to fold.
    next: usize,
    parked: BTreeMap<usize, Vec<u64>>,
    stats: Vec<Welford>,
    received: usize,
}

impl Slot {
    fn new(observables: usize) -> Self {
        Slot {
            next: 0,
            parked: BTreeMap::new(),
            stats: vec![Welford::new(); observables],
            received: 0,
        }
    }
}

/// Windowed, order-deterministic reducer over a fixed sample grid.
#[derive(Debug, Clone)]
pub struct Reducer {
    instances: usize,
    observables: usize,
    grid: Grid,
    oldest: u64,
    window: VecDeque<Slot>,
    bound: Option<usize>,
    resident: usize,
    peak_resident: usize,
}

impl Reducer {
    pub fn new(instances: usize, observables: usize, grid: Grid) -> Self {
        Reducer {
            instances,
            observables,
            grid,
            oldest: 0,
            window: VecDeque::new(),
            bound: None,
            resident: 0,
            peak_resident: 0,
        }
    }

    /// Fails with [`ReduceError::Overflow`] whenever more than `bound`
    /// samples belong to unretired grid points.
    pub fn with_bound(mut self, bound: usize) -> Self {
        self.bound = Some(bound);
        self
    }

    pub fn bound(&self) -> Option<usize> {
        self.bound
    }

    pub fn instances(&self) -> usize {
        self.instances
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    /// Lowest unretired grid index.
    pub fn oldest(&self) -> u64 {
        self.oldest
    }

    /// Samples received for grid points not yet retired.
    pub fn resident(&self) -> usize {
        self.resident
    }

    pub fn peak_resident(&self) -> usize {
        self.peak_resident
    }

    /// Every grid point has been retired.
    pub fn is_complete(&self) -> bool {
        self.oldest > self.grid.last
    }

    pub fn accumulate(&mut self, sample: TrajectorySample) -> Result<(), ReduceError> {
        let TrajectorySample {
            instance,
            index,
            values,
            ..
        } = sample;
        if instance >= self.instances {
            return Err(ReduceError::UnknownInstance {
                instance,
                instances: self.instances,
            });
        }
        if index > self.grid.last {
            return Err(ReduceError::OffGrid {
                index,
                last: self.grid.last,
            });
        }
        if index < self.oldest {
            return Err(ReduceError::Retired { instance, index });
        }
        if values.len() != self.observables {
            return Err(ReduceError::Width {
                got: values.len(),
                expected: self.observables,
            });
        }
        let offset = (index - self.oldest) as usize;
        while self.window.len() <= offset {
            self.window.push_back(Slot::new(self.observables));
        }
        let slot = &mut self.window[offset];
        if instance < slot.next || slot.parked.contains_key(&instance) {
            return Err(ReduceError::Duplicate { instance, index });
        }
        slot.parked.insert(instance, values);
        slot.received += 1;
        while let Some(values) = slot.parked.remove(&slot.next) {
            for (w, &v) in slot.stats.iter_mut().zip(&values) {
                w.push(v as f64);
            }
            slot.next += 1;
        }
        self.resident += 1;
        self.peak_resident = self.peak_resident.max(self.resident);
        if let Some(bound) = self.bound {
            if self.resident > bound {
                return Err(ReduceError::Overflow {
                    resident: self.resident,
                    bound,
                });
            }
        }
        Ok(())
    }

    /// Whether grid point `index` has seen every instance.
    pub fn is_ready(&self, index: u64) -> bool {
        index >= self.oldest
            && self
                .window
                .get((index - self.oldest) as usize)
                .is_some_and(|s| s.next == self.instances)
    }

    /// Retires the oldest grid point, which must be `index` and complete.
    pub fn retire(&mut self, index: u64) -> Result<StatPoint, ReduceError> {
        if index != self.oldest {
            return Err(ReduceError::OutOfOrder {
                index,
                oldest: self.oldest,
            });
        }
        if !self.is_ready(index) {
            let seen = self.window.front().map_or(0, |s| s.received);
            return Err(ReduceError::Incomplete {
                index,
                seen,
                instances: self.instances,
            });
        }
        let slot = self.window.pop_front().expect("ready slot exists");
        self.resident -= slot.received;
        self.oldest += 1;
        Ok(StatPoint {
            index,
            time: self.grid.time(index),
            stats: slot.stats.iter().map(Welford::summary).collect(),
        })
    }

    /// Retires every complete point at the front of the window, in order.
    pub fn drain_ready(&mut self) -> Vec<StatPoint> {
        let mut out = Vec::new();
        while self.is_ready(self.oldest) {
            out.push(self.retire(self.oldest).expect("checked ready"));
        }
        out
    }
}

/// Formats like C's `%.9g`: nine significant digits, trailing zeros trimmed.
pub fn format_sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.8e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..9).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{mantissa}e{sign}{:02}", exp.abs());
    }
    let decimals = (8 - exp).max(0) as usize;
    trim_zeros(&format!("{:.*}", decimals, x)).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn csv_header(observables: &[&str]) -> String {
    let mut cols = vec!["time".to_string()];
    for name in observables {
        cols.push(format!("{name}_mean"));
        cols.push(format!("{name}_var"));
        cols.push(format!("{name}_ci90"));
    }
    cols.join(",")
}

pub fn csv_row(point: &StatPoint) -> String {
    let mut cols = vec![format_sig9(point.time)];
    for m in &point.stats {
        cols.push(format_sig9(m.mean));
        cols.push(format_sig9(m.variance));
        cols.push(format_sig9(m.ci90));
    }
    cols.join(",")
}

/// Writes the statistics table: `time,<obs>_mean,<obs>_var,<obs>_ci90,...`.
pub fn write_csv<'p, W: Write>(
    observables: &[&str],
    points: impl IntoIterator<Item = &'p StatPoint>,
    mut sink: W,
) -> io::Result<()> {
    writeln!(sink, "{}", csv_header(observables))?;
    for p in points {
        writeln!(sink, "{}", csv_row(p))?;
    }
    sink.flush()
}

#[derive(Debug, Error)]
pub enum CsvError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
}

/// Parses a table written by [`write_csv`] back into observable names and
/// points. Grid indices are assigned by row order.
pub fn read_csv<R: BufRead>(source: R) -> Result<(Vec<String>, Vec<StatPoint>), CsvError> {
    let mut lines = source.lines();
    let header = lines.next().transpose()?.ok_or(CsvError::Format {
        line: 1,
        message: "missing header".into(),
    })?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.first() != Some(&"time") || !(cols.len() - 1).is_multiple_of(3) {
        return Err(CsvError::Format {
            line: 1,
            message: "header must be time followed by mean/var/ci90 triples".into(),
        });
    }
    let mut names = Vec::new();
    for triple in cols[1..].chunks(3) {
        let name = triple[0].strip_suffix("_mean").ok_or(CsvError::Format {
            line: 1,
            message: format!("expected a _mean column, found `{}`", triple[0]),
        })?;
        if triple[1] != format!("{name}_var") || triple[2] != format!("{name}_ci90") {
            return Err(CsvError::Format {
                line: 1,
                message: format!("columns for `{name}` are out of order"),
            });
        }
        names.push(name.to_string());
    }
    let mut points = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        let lineno = i + 2;
        let values: Vec<f64> = line
            .split(',')
            .map(|v| v.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| CsvError::Format {
                line: lineno,
                message: e.to_string(),
            })?;
        if values.len() != cols.len() {
            return Err(CsvError::Format {
                line: lineno,
                message: format!("{} fields, expected {}", values.len(), cols.len()),
            });
        }
        points.push(StatPoint {
            index: i as u64,
            time: values[0],
            stats: values[1..]
                .chunks(3)
                .map(|c| Moments {
                    mean: c[0],
                    variance: c[1],
                    ci90: c[2],
                })
                .collect(),
        });
    }
    Ok((names, points))
}
