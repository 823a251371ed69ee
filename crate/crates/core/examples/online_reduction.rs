// On-line statistics: Welford accumulators and the grid-point reducer.

use std::error::Error;
use std::io;

use cwc_sim::reducer::{ci90_half_width, write_csv};
use cwc_sim::{Grid, Reducer, TrajectorySample, Welford};

pub fn run() -> Result<(), Box<dyn Error>> {
    let mut w = Welford::new();
    for x in [4.0, 7.0, 13.0, 16.0] {
        w.push(x);
    }
    println!("mean {} variance {} ci90 ±{:.4}", w.mean(), w.variance(), w.ci90());
    println!("ci90 half-width for var=4, n=100: {:.5}", ci90_half_width(4.0, 100));

    // Three instances sampled on a 5-point grid; samples arrive out of
    // instance order and points are released as soon as they are complete.
    let grid = Grid::new(0.5, 2.0);
    let mut reducer = Reducer::new(3, 2, grid).with_bound(3 * 3);
    let mut points = Vec::new();
    for j in 0..grid.points() {
        for i in [2, 0, 1] {
            let a = 10 * (i as u64 + 1) + j;
            reducer.accumulate(TrajectorySample {
                instance: i,
                index: j,
                time: grid.time(j),
                values: vec![a, a * a],
            })?;
        }
        let ready = reducer.drain_ready();
        println!(
            "after grid point {j}: released {}, resident {}",
            ready.len(),
            reducer.resident()
        );
        points.extend(ready);
    }
    println!("peak resident samples: {}", reducer.peak_resident());
    write_csv(&["a", "a2"], &points, &mut io::stdout().lock())?;
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
