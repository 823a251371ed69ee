// Replicas and a parameter sweep through the command-line driver.
//
// Equivalent to
// `cwc-sim --builtin lotka-volterra:2 -n 8 --sweep r0.k=0.8:1.2:0.2 -o <dir>`.

use std::error::Error;
use std::fs;

use cwc_sim::cli::{builtin_model, run as run_cli, ModelSource, RunSpec, SweepSpec};
use cwc_sim::Schema;

pub fn run() -> Result<(), Box<dyn Error>> {
    let model = builtin_model("lotka-volterra", 2)?;
    println!("built-in model has {} rules", model.rules.len());

    let outdir = std::env::temp_dir().join(format!("cwc-sim-sweep-{}", std::process::id()));
    let spec = RunSpec {
        source: ModelSource::Builtin {
            name: "lotka-volterra".into(),
            species: 2,
        },
        instances: 8,
        schema: Schema::Sliced,
        workers: 2,
        quantum: 10,
        master_seed: 3,
        sweeps: vec![SweepSpec::parse("r0.k=0.8:1.2:0.2")?],
        outdir: outdir.clone(),
        dump_raw: false,
    };
    let out = run_cli(&spec)?;
    for path in &out.stats {
        let text = fs::read_to_string(path)?;
        let last = text.lines().last().unwrap_or_default();
        println!(
            "{}: {} rows, final {last}",
            path.file_name().unwrap().to_string_lossy(),
            text.lines().count() - 1
        );
    }
    print!("{}", fs::read_to_string(&out.manifest)?);
    fs::remove_dir_all(outdir)?;
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
