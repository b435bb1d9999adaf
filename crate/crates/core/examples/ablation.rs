//! Runs the generated-scene ablation and prints SR/SPL per policy.
//!
//! `cargo run --release -p semnav-core --example ablation -- [scenes] [seeds] [config.toml]`
//!
//! Without a config file the `desk_scale` preset is used.

use std::time::Instant;

use semnav::config::RunConfig;
use semnav::sim::{generate_household, run_batch, summarize, Policy};

fn main() {
    let mut args = std::env::args().skip(1);
    let scenes: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(30);
    let seeds: u64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(5);
    let cfg = match args.next() {
        Some(p) => RunConfig::load(&p).unwrap_or_else(|e| panic!("{e}")),
        None => RunConfig::desk_scale(),
    };
    let generated = generate_household(&cfg.generator, scenes, 2024).expect("generator");
    let loaded: Vec<_> = generated
        .iter()
        .map(|g| (g.scenario.name.clone(), g.load().map_err(|e| e.to_string())))
        .collect();
    let seeds: Vec<u64> = (1..=seeds).collect();
    let t = Instant::now();
    let rows = run_batch(&loaded, &Policy::ALL, &seeds, &cfg);
    for (p, m) in summarize(&rows) {
        println!("{p:<18} sr {:.3}  spl {:.3}  n {}", m.sr, m.spl, m.episodes);
    }
    println!("{} episodes in {:.1}s", rows.len(), t.elapsed().as_secs_f64());
}
