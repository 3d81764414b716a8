// SPDX-License-Identifier: Apache-2.0

//! `autolock`: lock, attack, evolve and verify combinational netlists.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use autolock::attack::{run_attack, AccuracyMode};
use autolock::equiv::{check_equivalence, check_locked};
use autolock::lock::{apply_genotype, parse_key_file, sample_random_genotype, write_key_file};
use autolock::netlist::{parse_bench, write_bench};
use autolock::seed::derive_rng;
use autolock::{AttackConfig, EquivMode, GaConfig, Netlist};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

#[derive(Parser)]
#[command(name = "autolock", version, about = "Evolutionary D-MUX logic locking")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Lock a netlist with a random D-MUX genotype.
    Lock(LockArgs),
    /// Run the link-prediction attack on a locked netlist.
    Attack(AttackArgs),
    /// Evolve a locking that resists the attack.
    Evolve(EvolveArgs),
    /// Check a locked netlist against the original under a key.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct LockArgs {
    /// Input `.bench` netlist.
    netlist: PathBuf,
    #[arg(long)]
    key_length: usize,
    #[arg(long)]
    seed: u64,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum AccuracyArg {
    AllBits,
    DecidedOnly,
}

impl From<AccuracyArg> for AccuracyMode {
    fn from(a: AccuracyArg) -> Self {
        match a {
            AccuracyArg::AllBits => AccuracyMode::AllBits,
            AccuracyArg::DecidedOnly => AccuracyMode::DecidedOnly,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Auto,
    Exhaustive,
    Sampled,
}

impl From<ModeArg> for EquivMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Auto => EquivMode::Auto,
            ModeArg::Exhaustive => EquivMode::Exhaustive,
            ModeArg::Sampled => EquivMode::Sampled,
        }
    }
}

#[derive(Args)]
struct AttackArgs {
    /// Locked `.bench` netlist.
    locked: PathBuf,
    /// Key file (`keyinput<i>=<0|1>` per line), used for scoring only.
    #[arg(long)]
    key: PathBuf,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 0.05)]
    theta: f64,
    #[arg(long, value_enum, default_value = "all-bits")]
    accuracy: AccuracyArg,
    /// Report path; standard output if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvolveArgs {
    /// Input `.bench` netlist.
    netlist: PathBuf,
    #[arg(long)]
    key_length: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 20)]
    population: usize,
    #[arg(long, default_value_t = 30)]
    generations: usize,
    #[arg(long, default_value_t = 2)]
    tournament: usize,
    #[arg(long, default_value_t = 0.9)]
    crossover_rate: f64,
    /// Per-gene mutation probability [default: 1/key-length].
    #[arg(long)]
    mutation_rate: Option<f64>,
    #[arg(long, default_value_t = 2)]
    elites: usize,
    /// Stop once the best fitness reaches this value.
    #[arg(long)]
    target_fitness: Option<f64>,
    #[arg(long, default_value_t = 1)]
    attack_seeds: usize,
    #[arg(long, default_value_t = 0.05)]
    theta: f64,
    #[arg(long, value_enum, default_value = "all-bits")]
    accuracy: AccuracyArg,
    /// Equivalence check on the winner.
    #[arg(long, value_enum, default_value = "auto")]
    mode: ModeArg,
    /// Worker threads for fitness evaluation; results do not depend on it.
    #[arg(long)]
    jobs: Option<usize>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    original: PathBuf,
    #[arg(long)]
    locked: PathBuf,
    #[arg(long)]
    key: PathBuf,
    #[arg(long, value_enum, default_value = "auto")]
    mode: ModeArg,
    /// Seeds the sampled vectors.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report path; standard output if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A failure that maps to exit code 1 rather than 2.
#[derive(Debug)]
struct NotEquivalent(String);

impl std::fmt::Display for NotEquivalent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for NotEquivalent {}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Lock(a) => cmd_lock(a),
        Command::Attack(a) => cmd_attack(a),
        Command::Evolve(a) => cmd_evolve(a),
        Command::Verify(a) => cmd_verify(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<NotEquivalent>() => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn stem(path: &Path) -> Result<String> {
    path.file_stem()
        .and_then(|s| s.to_str())
        .map(str::to_owned)
        .with_context(|| format!("cannot derive a design name from {}", path.display()))
}

fn read_netlist(path: &Path) -> Result<Netlist> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_bench(&stem(path)?, &text).with_context(|| format!("parsing {}", path.display()))
}

fn read_key(path: &Path) -> Result<autolock::BitVector> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_key_file(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Writes every file or none: anything already written is removed if a
/// later write fails.
fn write_all(dir: &Path, files: &[(String, String)]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut written = Vec::new();
    for (name, body) in files {
        let path = dir.join(name);
        if let Err(e) = fs::write(&path, body) {
            for p in &written {
                let _ = fs::remove_file(p);
            }
            return Err(e).with_context(|| format!("writing {}", path.display()));
        }
        written.push(path);
    }
    Ok(written)
}

fn emit(out: Option<&Path>, body: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, body).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn cmd_lock(a: LockArgs) -> Result<()> {
    if a.key_length == 0 {
        bail!("--key-length must be at least 1");
    }
    let n = read_netlist(&a.netlist)?;
    let mut rng = derive_rng(a.seed, "lock", &[]);
    let g = sample_random_genotype(&n, a.key_length, &mut rng)?;
    let ln = apply_genotype(&n, &g)?;
    let name = n.name();
    write_all(
        &a.out,
        &[
            (format!("{name}_locked.bench"), write_bench(&ln.netlist)),
            (format!("{name}.key"), write_key_file(&ln.correct_key)),
            (format!("{name}.genotype.json"), g.to_json()),
        ],
    )?;
    println!(
        "{name}: {} gates -> {} gates, {} key inputs",
        n.gate_count(),
        ln.netlist.gate_count(),
        ln.key_length()
    );
    Ok(())
}

fn attack_config(theta: f64, accuracy: AccuracyArg) -> Result<AttackConfig> {
    if !(theta >= 0.0 && theta.is_finite()) {
        bail!("--theta must be a non-negative number");
    }
    Ok(AttackConfig {
        theta,
        accuracy_mode: accuracy.into(),
        ..AttackConfig::default()
    })
}

fn cmd_attack(a: AttackArgs) -> Result<()> {
    let n = read_netlist(&a.locked)?;
    let key = read_key(&a.key)?;
    let bits = key.ordered_as(n.key_inputs()).with_context(|| {
        format!(
            "key has {} bits, netlist has {} key inputs",
            key.len(),
            n.key_inputs().len()
        )
    })?;
    let cfg = attack_config(a.theta, a.accuracy)?;
    let report = run_attack(&n, &bits, &cfg, a.seed)?;
    let mut body = report.to_json();
    body.push('\n');
    emit(a.out.as_deref(), &body)?;
    let summary = format!(
        "accuracy {:.4}, precision {:.4}, decided {}/{}",
        report.accuracy,
        report.precision,
        report.decided,
        report.bits.len()
    );
    if a.out.is_some() {
        println!("{summary}");
    } else {
        eprintln!("{summary}");
    }
    Ok(())
}

fn cmd_evolve(a: EvolveArgs) -> Result<()> {
    let n = read_netlist(&a.netlist)?;
    let cfg = GaConfig {
        key_length: a.key_length,
        population: a.population,
        generations: a.generations,
        tournament: a.tournament,
        crossover_rate: a.crossover_rate,
        mutation_rate: a.mutation_rate,
        elites: a.elites,
        target_fitness: a.target_fitness,
        seed: a.seed,
        attack_seeds: a.attack_seeds,
        attack: attack_config(a.theta, a.accuracy)?,
    };
    cfg.validate()?;
    let run = || autolock::ga::evolve(&n, &cfg);
    let evo = match a.jobs {
        Some(0) => bail!("--jobs must be at least 1"),
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build()?
            .install(run)?,
        None => run()?,
    };

    let eq = check_locked(&n, &evo.best_locked, a.mode.into(), a.seed)?;
    if !eq.equivalent {
        return Err(NotEquivalent(format!(
            "evolved locking is not equivalent under its key ({} of {} vectors differ); nothing written",
            eq.mismatches, eq.vectors
        ))
        .into());
    }

    let name = n.name();
    let best = &evo.run.best;
    let run_json = json!({
        "design": name,
        "termination": evo.run.termination,
        "generations_run": evo.run.history.len(),
        "best": {
            "fitness": best.fitness,
            "attack_accuracy": best.attack_accuracy,
            "genotype": best.genotype,
        },
        "initial_mean_accuracy": evo.run.initial_mean_accuracy(),
        "equivalence": eq,
        "config": cfg,
        "history": evo.run.history,
    });
    let mut run_text = serde_json::to_string_pretty(&run_json)?;
    run_text.push('\n');
    write_all(
        &a.out,
        &[
            (
                format!("{name}_locked.bench"),
                write_bench(&evo.best_locked.netlist),
            ),
            (
                format!("{name}.key"),
                write_key_file(&evo.best_locked.correct_key),
            ),
            (format!("{name}.genotype.json"), best.genotype.to_json()),
            ("history.csv".to_string(), evo.run.history_csv()),
            ("run.json".to_string(), run_text),
        ],
    )?;
    println!(
        "{name}: best fitness {:.4} (attack accuracy {:.4}) after {} generations, {:?}",
        best.fitness,
        best.attack_accuracy,
        evo.run.history.len(),
        evo.run.termination
    );
    Ok(())
}

fn cmd_verify(a: VerifyArgs) -> Result<()> {
    let orig = read_netlist(&a.original)?;
    let locked = read_netlist(&a.locked)?;
    let key = read_key(&a.key)?;
    let report = check_equivalence(&orig, &locked, &key, a.mode.into(), a.seed)?;
    emit(a.out.as_deref(), &report.to_json())?;
    if !report.equivalent {
        return Err(NotEquivalent(format!(
            "{} of {} vectors differ",
            report.mismatches, report.vectors
        ))
        .into());
    }
    Ok(())
}
