//! Runs the full 13 x 6 grid on a synthetic corpus and prints wall time.
//!
//! cargo run --release -p arnli-core --example synth_grid -- [pairs] [sequential|parallel]

use std::time::Instant;

use arnli_core::corpus::{write_dataset, DataFormat};
use arnli_core::exec::Exec;
use arnli_core::experiment::{run_experiment, RunConfig};
use arnli_core::synth;

fn main() -> arnli_core::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(6366, |a| a.parse().expect("pair count"));
    let exec = match args.next().as_deref() {
        Some("sequential") => Exec::Sequential,
        _ => Exec::Parallel,
    };
    let dir = std::env::temp_dir().join(format!("arnli-synth-grid-{n}"));
    std::fs::create_dir_all(&dir).map_err(|e| arnli_core::Error::Io {
        path: dir.clone(),
        source: e,
    })?;
    let data = dir.join("pairs.csv");
    let file = std::fs::File::create(&data).map_err(|e| arnli_core::Error::Io {
        path: data.clone(),
        source: e,
    })?;
    write_dataset(&synth::generate(n, 42), file, DataFormat::Csv)?;
    let cfg = RunConfig {
        data: Some(data),
        out: Some(dir.join("results")),
        exec,
        ..Default::default()
    };
    let t0 = Instant::now();
    let report = run_experiment(&cfg)?;
    println!("{}", report.to_markdown());
    println!(
        "{} cells on {n} pairs ({exec:?}, {} threads available): {:.1}s",
        report.rows.len(),
        std::thread::available_parallelism().map_or(1, |p| p.get()),
        t0.elapsed().as_secs_f64()
    );
    print!("{}", report.timings_csv());
    Ok(())
}
