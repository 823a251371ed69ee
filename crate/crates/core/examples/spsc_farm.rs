// The streaming runtime on its own: a lock-free channel and a farm whose
// collector feeds work back to the emitter.

use std::error::Error;
use std::thread;

use cwc_sim::streamnet::{
    channel, run_farm, Collector, Emit, Emitter, FarmConfig, FeedbackSender, Full, StageError, WorkerLoad,
};

/// Collatz sequences, one step per trip through the farm.
struct Starts {
    fresh: Vec<u64>,
    returned: Vec<(u64, u64)>,
}

impl Emitter for Starts {
    type Task = (u64, u64);
    type Feedback = (u64, u64);

    fn next(&mut self, load: &WorkerLoad) -> Emit<(u64, u64)> {
        if let Some(t) = self.returned.pop() {
            return Emit::Task(t);
        }
        match self.fresh.pop() {
            Some(n) => Emit::Task((n, n)),
            None if load.total() == 0 => Emit::Finished,
            None => Emit::Wait,
        }
    }

    fn feedback(&mut self, item: (u64, u64)) {
        self.returned.push(item);
    }
}

#[derive(Default)]
struct Lengths(Vec<(u64, u32)>, std::collections::HashMap<u64, u32>);

impl Collector for Lengths {
    type Item = (u64, u64);
    type Feedback = (u64, u64);
    type Output = Vec<(u64, u32)>;

    fn collect(
        &mut self,
        _w: usize,
        (start, n): (u64, u64),
        fb: &mut FeedbackSender<'_, (u64, u64)>,
    ) -> Result<(), StageError> {
        let steps = self.1.entry(start).or_insert(0);
        *steps += 1;
        if n == 1 {
            self.0.push((start, *steps));
            Ok(())
        } else {
            fb.send((start, n))
        }
    }

    fn finish(mut self) -> Self::Output {
        self.0.sort_unstable();
        self.0
    }
}

pub fn run() -> Result<(), Box<dyn Error>> {
    let (mut tx, mut rx) = channel::<u32>(4);
    let producer = thread::spawn(move || {
        for i in 0..1000 {
            let mut item = i;
            while let Err(Full(back)) = tx.push(item) {
                item = back;
                thread::yield_now();
            }
        }
    });
    let mut sum = 0;
    let mut seen = 0;
    while seen < 1000 {
        match rx.pop() {
            Some(v) => {
                sum += v;
                seen += 1;
            }
            None => thread::yield_now(),
        }
    }
    producer.join().unwrap();
    println!("spsc: received {seen} items, sum {sum}");

    let emitter = Starts {
        fresh: (2..=12).collect(),
        returned: Vec::new(),
    };
    let (lengths, report) = run_farm(
        &FarmConfig::new(3).with_feedback(),
        emitter,
        |_| {
            |(start, n): (u64, u64)| -> Result<(u64, u64), String> {
                Ok((start, if n % 2 == 0 { n / 2 } else { 3 * n + 1 }))
            }
        },
        Lengths::default(),
    )?;
    for (start, steps) in lengths {
        println!("collatz({start}) reaches 1 in {steps} steps");
    }
    println!(
        "{} dispatches, {} fed back, per worker {:?}",
        report.dispatched, report.feedback, report.per_worker
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
