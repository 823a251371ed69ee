// The three execution schemas on the same replicas.
//
// Statistics are identical whatever the schema or worker count; what
// changes is how work is spread and how much raw data is held.

use std::error::Error;
use std::sync::Arc;
use std::time::Instant;

use cwc_sim::cli::builtin_model;
use cwc_sim::reducer::write_csv;
use cwc_sim::scheduler::run_static;
use cwc_sim::{simulate, SchedulerConfig, Schema};

pub fn run() -> Result<(), Box<dyn Error>> {
    let mut model = builtin_model("lotka-volterra", 2)?;
    model.t_stop = 5.0;
    let model = Arc::new(model);
    let n = 16;
    let names = model.observable_names();

    let mut outputs = Vec::new();
    for schema in Schema::ALL {
        for w in [1, 4] {
            let config = SchedulerConfig::new(schema, w).seed(11).quantum(5);
            let start = Instant::now();
            let out = simulate(&model, n, &config)?;
            let mut csv = Vec::new();
            write_csv(&names, &out.points, &mut csv)?;
            println!(
                "{schema:>8} w={w}: {:>6.1} ms, per-worker tasks {:?}, peak window {:?}",
                start.elapsed().as_secs_f64() * 1e3,
                out.report.per_worker,
                out.peak_resident,
            );
            outputs.push(csv);
        }
    }
    assert!(outputs.windows(2).all(|p| p[0] == p[1]));
    println!("all {} runs produced identical statistics", outputs.len());

    let store = run_static(&model, 6, &SchedulerConfig::new(Schema::Static, 3))?;
    println!(
        "static placement of 6 instances on 3 workers: {:?}",
        store.assignments(3)
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
