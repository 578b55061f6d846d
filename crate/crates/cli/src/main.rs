//! Command-line front end: `simulate` runs one trajectory, `sweep` runs a
//! parameter grid into a phase CSV, `boundary` evaluates the patch library.
//!
//! All subcommands are config-file-first: a JSON document fully describes
//! the experiment, and the few flags only override the seed, the output
//! directory, the worker count, or the swept global profit rates. Exit
//! codes: 0 success, 1 runtime failure, 2 config/validation failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mlpgg::boundary::{
    imitation_table, imitation_table_csv, invariance_report_csv, rg_invariance_report,
    BoundaryConfig,
};
use mlpgg::dynamics::{initialize_profile, run, TerminalStatus};
use mlpgg::experiments::{
    append_manifest_record, derive_seed, export_snapshot, export_trajectory_csv, load_manifest,
    open_manifest_for_append, phase_csv_header, phase_csv_row, start_manifest, SimulateConfig,
    SweepSpec,
};

#[derive(Parser)]
#[command(name = "mlpgg", version, about = "Multi-level public goods game simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation; writes trajectory.csv and optional snapshots.
    Simulate(SimulateArgs),
    /// Run a parameter sweep; writes phase.csv and a resume manifest.
    Sweep(SweepArgs),
    /// Evaluate boundary patches; writes imitation tables and the
    /// invariance report.
    Boundary(BoundaryArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Run config file (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override the config's seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct SweepArgs {
    /// Sweep config file (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override the config's base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Skip cells already present in the manifest.
    #[arg(long)]
    resume: bool,
}

#[derive(Args)]
struct BoundaryArgs {
    /// Boundary config file (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override the swept global profit rates, comma-separated (e.g.
    /// "5,20,100").
    #[arg(long)]
    rg: Option<String>,
}

/// A failure carrying the exit code the process should end with.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn config(message: impl ToString) -> Self {
        Failure {
            code: 2,
            message: message.to_string(),
        }
    }

    fn runtime(message: impl ToString) -> Self {
        Failure {
            code: 1,
            message: message.to_string(),
        }
    }
}

type CliResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Boundary(args) => cmd_boundary(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

fn read_config<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::config(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::config(format!("invalid config {}: {e}", path.display())))
}

fn ensure_out_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir)
        .map_err(|e| Failure::runtime(format!("cannot create output directory {}: {e}", dir.display())))
}

fn config_base_dir(config_path: &Path) -> PathBuf {
    config_path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."))
}

fn cmd_simulate(args: SimulateArgs) -> CliResult {
    let config: SimulateConfig = read_config(&args.config)?;
    let graph = config
        .validate(&config_base_dir(&args.config))
        .map_err(Failure::config)?;
    let seed = args.seed.unwrap_or(config.seed);

    ensure_out_dir(&args.out)?;
    let profile = initialize_profile(&graph, &config.init, config.setting, derive_seed(seed, &[0]))
        .map_err(Failure::runtime)?;
    let trajectory = run(
        &graph,
        profile,
        config.setting,
        &config.params,
        config.update_scheme,
        config.target_selection,
        &config.stop,
        &config.snapshot_rounds,
        derive_seed(seed, &[1]),
    )
    .map_err(Failure::runtime)?;

    let csv_path = args.out.join("trajectory.csv");
    export_trajectory_csv(&trajectory, &csv_path).map_err(Failure::runtime)?;

    // Snapshots only exist as files for lattice populations, where the
    // row-major grid layout is meaningful.
    if let Some(dims) = config.population.lattice_dims() {
        for (round, profile) in &trajectory.snapshots {
            export_snapshot(profile, dims, *round, &args.out).map_err(Failure::runtime)?;
        }
        if config.snapshot_final {
            export_snapshot(&trajectory.final_profile, dims, trajectory.rounds(), &args.out)
                .map_err(Failure::runtime)?;
        }
    }

    let final_counts = format_counts(&trajectory);
    match trajectory.status {
        TerminalStatus::Absorbed(strategy) => println!(
            "absorbed={} rounds={} final={final_counts}",
            strategy.label(),
            trajectory.rounds()
        ),
        TerminalStatus::RoundCapReached => println!(
            "round_cap_reached rounds={} final={final_counts}",
            trajectory.rounds()
        ),
        TerminalStatus::FrequencyStable => println!(
            "frequency_stable rounds={} final={final_counts}",
            trajectory.rounds()
        ),
    }
    Ok(())
}

fn format_counts(trajectory: &mlpgg::dynamics::Trajectory) -> String {
    trajectory
        .setting
        .strategies()
        .iter()
        .zip(trajectory.final_frequencies())
        .map(|(s, c)| format!("{}:{}", s.label(), c))
        .collect::<Vec<_>>()
        .join(",")
}

fn cmd_sweep(args: SweepArgs) -> CliResult {
    let mut spec: SweepSpec = read_config(&args.config)?;
    if let Some(seed) = args.seed {
        spec.base_seed = seed;
    }
    spec.validate().map_err(Failure::config)?;

    ensure_out_dir(&args.out)?;
    let manifest_path = args.out.join("manifest.jsonl");
    let csv_path = args.out.join("phase.csv");

    let (completed, mut manifest) = if args.resume && manifest_path.exists() {
        let completed = load_manifest(&manifest_path, &spec).map_err(Failure::config)?;
        let file = open_manifest_for_append(&manifest_path).map_err(Failure::runtime)?;
        (completed, file)
    } else {
        let file = start_manifest(&manifest_path, &spec).map_err(Failure::runtime)?;
        (Default::default(), file)
    };

    let mut csv = fs::File::create(&csv_path)
        .map_err(|e| Failure::runtime(format!("cannot create {}: {e}", csv_path.display())))?;
    {
        use std::io::Write;
        writeln!(csv, "{}", phase_csv_header())
            .map_err(|e| Failure::runtime(format!("cannot write {}: {e}", csv_path.display())))?;
    }

    let cell_count = spec.grid.cell_count();
    let output = mlpgg::experiments::sweep(&spec, args.workers, &completed, |record, fresh| {
        use std::io::Write;
        writeln!(csv, "{}", phase_csv_row(record)).map_err(|e| mlpgg::Error::Io {
            path: csv_path.display().to_string(),
            source: e,
        })?;
        if fresh {
            append_manifest_record(&mut manifest, record)?;
        }
        println!(
            "cell {}/{}: r_p={} r_l={} r_g={} label={} fraction={} mean_rounds={}",
            record.cell_index + 1,
            cell_count,
            record.params.r_p,
            record.params.r_l,
            record.params.r_g,
            record.label,
            record.label_fraction,
            record.mean_rounds
        );
        Ok(())
    })
    .map_err(Failure::runtime)?;

    if !output.failures.is_empty() {
        for (cell, message) in &output.failures {
            eprintln!("cell {cell} failed: {message}");
        }
        return Err(Failure::runtime(format!(
            "{} of {} cells failed",
            output.failures.len(),
            cell_count
        )));
    }
    println!(
        "sweep complete: {} cells -> {}",
        output.records.len(),
        csv_path.display()
    );
    Ok(())
}

fn cmd_boundary(args: BoundaryArgs) -> CliResult {
    let mut config: BoundaryConfig = read_config(&args.config)?;
    if let Some(list) = &args.rg {
        let values = list
            .split(',')
            .map(|token| token.trim().parse::<f64>())
            .collect::<Result<Vec<f64>, _>>()
            .map_err(|e| Failure::config(format!("invalid --rg list {list:?}: {e}")))?;
        config.rg_values = values;
    }
    let patches = config.validate().map_err(Failure::config)?;

    ensure_out_dir(&args.out)?;
    let mut tables = Vec::new();
    let mut reports = Vec::new();
    for spec in &patches {
        tables.push(
            imitation_table(spec, &config.params, config.population_size)
                .map_err(Failure::runtime)?,
        );
        reports.push(
            rg_invariance_report(spec, &config.params, &config.rg_values, config.population_size)
                .map_err(Failure::runtime)?,
        );
    }

    let tables_path = args.out.join("imitation_tables.csv");
    fs::write(&tables_path, imitation_table_csv(&tables))
        .map_err(|e| Failure::runtime(format!("cannot write {}: {e}", tables_path.display())))?;
    let report_path = args.out.join("rg_invariance.csv");
    fs::write(&report_path, invariance_report_csv(&reports))
        .map_err(|e| Failure::runtime(format!("cannot write {}: {e}", report_path.display())))?;

    let total_rows: usize = reports.iter().map(|r| r.rows.len()).sum();
    let failing: usize = reports
        .iter()
        .flat_map(|r| &r.rows)
        .filter(|row| !row.pass)
        .count();
    if failing > 0 {
        return Err(Failure::runtime(format!(
            "invariance report: {failing} of {total_rows} rows FAIL (see {})",
            report_path.display()
        )));
    }
    println!(
        "boundary analysis: {} patches, invariance all-PASS ({} rows) -> {}",
        patches.len(),
        total_rows,
        args.out.display()
    );
    Ok(())
}
