//! `semnav`: run, batch, render and generate object-goal exploration episodes.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use semnav::config::RunConfig;
use semnav::render::{render_frame, RenderOptions};
use semnav::sim::batch::{comparison_csv, episodes_csv, load_scenarios, summary_csv};
use semnav::sim::episode::EpisodeOutcome;
use semnav::sim::{generate_household, run_batch, run_episode, summarize, BatchManifest, Policy, Scenario, Trace};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "semnav", version, about = "Semantic-guided object-goal exploration on gridworlds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    /// Module defaults.
    Default,
    /// Cheaper sampling sized for generated scenes.
    Desk,
}

#[derive(Subcommand)]
enum Command {
    /// Run one episode and write result.json, trace.jsonl and final.ppm.
    Run {
        scenario: PathBuf,
        #[arg(long, short)]
        config: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "default")]
        preset: Preset,
        #[arg(long, default_value = "full")]
        policy: Policy,
        /// Episode seed; defaults to the scenario's.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, short, default_value = "out")]
        out: PathBuf,
        /// Pixels per cell in the rendered image.
        #[arg(long, default_value_t = 4)]
        scale: usize,
    },
    /// Run a scenario × policy × seed grid from a manifest.
    Batch {
        manifest: PathBuf,
        /// Overrides the manifest's config.
        #[arg(long, short)]
        config: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "desk")]
        preset: Preset,
        #[arg(long, short, default_value = "batch_out")]
        out: PathBuf,
    },
    /// Render one frame of a trace to PPM.
    Render {
        trace: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
        /// Step index; defaults to the last one.
        #[arg(long)]
        frame: Option<usize>,
        #[arg(long, default_value_t = 4)]
        scale: usize,
    },
    /// Generate household scenes plus a batch manifest.
    GenScenarios {
        #[arg(long, short, default_value = "scenes")]
        out: PathBuf,
        #[arg(long, default_value_t = 30)]
        count: usize,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        /// Episode seeds 1..=N listed in the manifest.
        #[arg(long, default_value_t = 5)]
        seeds: u64,
        #[arg(long, short)]
        config: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "desk")]
        preset: Preset,
    },
}

fn config(path: Option<&Path>, preset: Preset) -> Result<RunConfig> {
    Ok(match (path, preset) {
        (Some(p), _) => RunConfig::load(p)?,
        (None, Preset::Default) => RunConfig::default(),
        (None, Preset::Desk) => RunConfig::desk_scale(),
    })
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

#[derive(Serialize)]
struct EpisodeReport<'a> {
    scenario: &'a str,
    policy: Policy,
    seed: u64,
    target: Option<&'a str>,
    result: &'a semnav::sim::EpisodeResult,
    degradations: &'a [semnav::relevance::DegradationEvent],
}

fn report<'a>(scenario: &'a str, policy: Policy, seed: u64, out: &'a EpisodeOutcome) -> EpisodeReport<'a> {
    EpisodeReport {
        scenario,
        policy,
        seed,
        target: out.target.as_deref(),
        result: &out.result,
        degradations: &out.degradations,
    }
}

fn cmd_run(
    scenario: &Path,
    cfg: &RunConfig,
    policy: Policy,
    seed: Option<u64>,
    out: &Path,
    scale: usize,
) -> Result<()> {
    let sc = Scenario::load(scenario)?;
    let seed = seed.unwrap_or(sc.scenario.seed);
    let mut trace = Vec::new();
    let outcome = run_episode(&sc, policy, cfg, seed, Some(&mut trace))?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let name = sc.scenario.name.clone();
    write(&out.join("result.json"), serde_json::to_string_pretty(&report(&name, policy, seed, &outcome))?)?;
    write(&out.join("trace.jsonl"), &trace)?;
    let t = Trace::read(&trace[..])?;
    let img = render_frame(&t, t.steps.len().saturating_sub(1), &RenderOptions { scale })?;
    write(&out.join("final.ppm"), img.to_ppm())?;
    let r = &outcome.result;
    println!(
        "{name}: {} after {} steps, path {:.2} m, shortest {:.2} m",
        if r.success { "success" } else { "failure" },
        r.steps,
        r.path_length,
        r.oracle_length
    );
    Ok(())
}

fn cmd_batch(manifest: &Path, cfg_path: Option<&Path>, preset: Preset, out: &Path) -> Result<()> {
    let m = BatchManifest::load(manifest)?;
    let base = manifest.parent().unwrap_or(Path::new("."));
    let cfg = match (cfg_path, &m.config) {
        (Some(p), _) => RunConfig::load(p)?,
        (None, Some(p)) => RunConfig::load(base.join(p))?,
        (None, None) => config(None, preset)?,
    };
    let scenarios = load_scenarios(&m.scenario_paths(base));
    let rows = run_batch(&scenarios, &m.policies, &m.seeds, &cfg);
    let episodes = out.join("episodes");
    fs::create_dir_all(&episodes).with_context(|| format!("creating {}", episodes.display()))?;
    for r in &rows {
        let file = episodes.join(format!("{}__{}__{}.json", r.scenario, r.policy, r.seed));
        write(&file, serde_json::to_string_pretty(r)?)?;
    }
    let summary = summarize(&rows);
    write(&out.join("episodes.csv"), episodes_csv(&rows))?;
    write(&out.join("summary.csv"), summary_csv(&summary))?;
    write(&out.join("comparison.csv"), comparison_csv(&summary))?;
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    println!("{:<18} {:>8} {:>7} {:>7}", "policy", "episodes", "SR", "SPL");
    for (p, s) in &summary {
        println!("{:<18} {:>8} {:>7.3} {:>7.3}", p.name(), s.episodes, s.sr, s.spl);
    }
    if failed > 0 {
        eprintln!("{failed} of {} rows failed; see episodes.csv", rows.len());
    }
    Ok(())
}

fn cmd_render(trace: &Path, out: &Path, frame: Option<usize>, scale: usize) -> Result<()> {
    let t = Trace::load(trace)?;
    let frame = frame.unwrap_or(t.steps.len().saturating_sub(1));
    let img = render_frame(&t, frame, &RenderOptions { scale })?;
    write(out, img.to_ppm())
}

fn cmd_gen(out: &Path, count: usize, seed: u64, seeds: u64, cfg: &RunConfig) -> Result<()> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut names = Vec::with_capacity(count);
    for g in generate_household(&cfg.generator, count, seed)? {
        let mut sc = g.scenario;
        let map_file = format!("{}.map", sc.name);
        write(&out.join(&map_file), &g.raster)?;
        sc.map = None;
        sc.map_file = Some(map_file);
        let json = format!("{}.json", sc.name);
        write(&out.join(&json), serde_json::to_string_pretty(&sc)?)?;
        names.push(json);
    }
    let manifest = BatchManifest {
        version: semnav::sim::batch::MANIFEST_VERSION,
        scenarios: names,
        policies: Policy::ALL.to_vec(),
        seeds: (1..=seeds).collect(),
        config: Some("config.toml".into()),
    };
    manifest.validate()?;
    write(&out.join("config.toml"), cfg.to_toml())?;
    write(&out.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
    println!("wrote {count} scenes to {}", out.display());
    Ok(())
}

/// Input problems (unreadable files, malformed maps or configs) exit with 2,
/// everything else with 1.
fn exit_code(e: &anyhow::Error) -> u8 {
    use semnav::Error as E;
    match e.downcast_ref::<E>() {
        Some(
            E::Io { .. }
            | E::Json { .. }
            | E::Config(_)
            | E::MapFormat { .. }
            | E::Scenario(_)
            | E::FrameOutOfRange { .. }
            | E::EmptyTrace,
        ) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.command {
        Command::Run {
            scenario,
            config: c,
            preset,
            policy,
            seed,
            out,
            scale,
        } => config(c.as_deref(), *preset).and_then(|mut cfg| {
            // A single run always keeps viewpoints and points for rendering.
            cfg.sim.verbose_trace = true;
            cmd_run(scenario, &cfg, *policy, *seed, out, *scale)
        }),
        Command::Batch {
            manifest,
            config: c,
            preset,
            out,
        } => cmd_batch(manifest, c.as_deref(), *preset, out),
        Command::Render {
            trace,
            out,
            frame,
            scale,
        } => cmd_render(trace, out, *frame, *scale),
        Command::GenScenarios {
            out,
            count,
            seed,
            seeds,
            config: c,
            preset,
        } => config(c.as_deref(), *preset).and_then(|cfg| cmd_gen(out, *count, *seed, *seeds, &cfg)),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            // Core errors already print their source; only add causes not yet shown.
            let mut msg = String::new();
            for cause in e.chain() {
                let c = cause.to_string();
                if !msg.contains(&c) {
                    if !msg.is_empty() {
                        msg.push_str(": ");
                    }
                    msg.push_str(&c);
                }
            }
            eprintln!("error: {msg}");
            ExitCode::from(exit_code(&e))
        }
    }
}
