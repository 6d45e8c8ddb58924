//! `slicegen`: generate, preview and evaluate synthetic slice-telemetry
//! image datasets.
//!
//! Exit codes: 0 success, 1 configuration or usage error, 2 I/O error,
//! 3 integrity failure. Errors are printed to stderr as one JSON object.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use slicegen::config::Config;
use slicegen::dataset::{generate_dataset, load_dataset, render_montage, write_dataset, WriteOptions};
use slicegen::encoders::Method;
use slicegen::eval::{run_evaluation, EvalParams, FeatureSet, SplitSpec};
use slicegen::kpi::SliceType;
use slicegen::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "slicegen", version, about = "Synthetic network-slice KPI image datasets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a dataset and export it to a directory.
    Generate(GenerateArgs),
    /// Render a PNG montage of the first patches of a dataset.
    Preview {
        dataset: PathBuf,
        /// Comma-separated encoders; defaults to every method in the dataset.
        #[arg(long)]
        methods: Option<String>,
        /// Grid as ROWSxCOLS.
        #[arg(long, default_value = "3x6")]
        grid: String,
        #[arg(long, default_value = "previews")]
        out: PathBuf,
    },
    /// Train the baseline classifiers on raw KPIs and image features.
    Evaluate {
        dataset: PathBuf,
        /// Comma-separated feature sets: `raw` and/or encoder names.
        #[arg(long)]
        methods: Option<String>,
        #[arg(long, default_value_t = 0)]
        split_seed: u64,
        /// Neighbours for k-NN.
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Write the default configuration file.
    InitConfig {
        #[arg(long, default_value = "slicegen.toml")]
        out: PathBuf,
        #[arg(long)]
        force: bool,
    },
}

#[derive(Args, Debug)]
struct GenerateArgs {
    /// TOML configuration; built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    count: usize,
    /// Comma-separated encoders; overrides the config file.
    #[arg(long)]
    methods: Option<String>,
    #[arg(long)]
    out: PathBuf,
    /// Replaces the config file's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Allow writing into a non-empty directory.
    #[arg(long)]
    force: bool,
    /// Worker threads; output does not depend on this.
    #[arg(long)]
    workers: Option<usize>,
    /// Also export unquantized float32 images.
    #[arg(long)]
    float_images: bool,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io { .. } => 2,
        Error::Integrity { .. } => 3,
        _ => 1,
    }
}

fn error_json(e: &Error) -> serde_json::Value {
    let mut obj = json!({ "kind": e.kind(), "message": e.to_string() });
    match e {
        Error::Config { field, .. } => obj["field"] = json!(field),
        Error::Integrity { file, .. } => obj["file"] = json!(file),
        Error::Io { path, .. } => obj["path"] = json!(path.display().to_string()),
        _ => {}
    }
    json!({ "error": obj })
}

fn parse_list<T>(text: &str, parse: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    let items = text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(parse)
        .collect::<Result<Vec<_>>>()?;
    if items.is_empty() {
        return Err(Error::Usage("empty method list".into()));
    }
    Ok(items)
}

fn parse_grid(text: &str) -> Result<(usize, usize)> {
    let bad = || Error::Usage(format!("grid must look like 3x6, got `{text}`"));
    let (r, c) = text.split_once(['x', 'X']).ok_or_else(bad)?;
    let (r, c) = (r.trim().parse().map_err(|_| bad())?, c.trim().parse().map_err(|_| bad())?);
    if r == 0 || c == 0 {
        return Err(bad());
    }
    Ok((r, c))
}

fn generate(args: &GenerateArgs) -> Result<()> {
    let mut cfg = match &args.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    if let Some(m) = &args.methods {
        cfg.methods = parse_list(m, str::parse::<Method>)?;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    let out = args.out.as_path();
    let opts = WriteOptions { force: args.force, float_images: args.float_images };
    if !opts.force && std::fs::read_dir(out).is_ok_and(|mut d| d.next().is_some()) {
        return Err(Error::Usage(format!(
            "{} already exists and is not empty; pass --force to overwrite",
            out.display()
        )));
    }

    let start = Instant::now();
    let dataset = generate_dataset(&cfg, args.count, args.workers)?;
    let manifest = write_dataset(&dataset, out, opts)?;
    let secs = start.elapsed().as_secs_f64();

    match args.format {
        Format::Json => {
            let summary = json!({
                "out": out.display().to_string(),
                "seconds": secs,
                "manifest": manifest,
            });
            println!("{}", serde_json::to_string_pretty(&summary).expect("serializable"));
        }
        Format::Text => {
            println!("wrote {} samples to {} in {secs:.2}s", manifest.sample_count, out.display());
            for s in SliceType::ALL {
                println!("  {:<6} {}", s.name(), manifest.class_counts[&s]);
            }
            println!("checksums:");
            for (file, sum) in &manifest.checksums {
                println!("  {sum}  {file}");
            }
        }
    }
    Ok(())
}

fn preview(dataset: &Path, methods: Option<&str>, grid: &str, out: &Path) -> Result<()> {
    let (rows, cols) = parse_grid(grid)?;
    let data = load_dataset(dataset)?;
    let methods = match methods {
        Some(m) => parse_list(m, str::parse::<Method>)?,
        None => data.methods().to_vec(),
    };
    for m in methods {
        println!("{}", render_montage(&data, m, rows, cols, out)?.display());
    }
    Ok(())
}

fn evaluate(dataset: &Path, methods: Option<&str>, split_seed: u64, k: usize, format: Format) -> Result<()> {
    let features = methods.map(|m| parse_list(m, str::parse::<FeatureSet>)).transpose()?;
    let data = load_dataset(dataset)?;
    let features = features.unwrap_or_else(|| {
        std::iter::once(FeatureSet::Raw)
            .chain(data.methods().iter().map(|&m| FeatureSet::Image(m)))
            .collect()
    });
    let params = EvalParams {
        k,
        split: SplitSpec::with_seed(split_seed),
        ..EvalParams::default()
    };
    let report = run_evaluation(&data, &features, &params)?;
    match format {
        Format::Json => println!("{}", report.to_json()),
        Format::Text => print!("{}", report.to_text()),
    }
    Ok(())
}

fn init_config(out: &Path, force: bool) -> Result<()> {
    if out.exists() && !force {
        return Err(Error::Usage(format!("{} exists; pass --force to overwrite", out.display())));
    }
    std::fs::write(out, Config::default().to_toml()).map_err(|e| Error::io(out, e))?;
    println!("{}", out.display());
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(args) => generate(&args),
        Command::Preview {
            dataset,
            methods,
            grid,
            out,
        } => preview(&dataset, methods.as_deref(), &grid, &out),
        Command::Evaluate {
            dataset,
            methods,
            split_seed,
            k,
            format,
        } => evaluate(&dataset, methods.as_deref(), split_seed, k, format),
        Command::InitConfig { out, force } => init_config(&out, force),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help / --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = Error::Usage(e.render().to_string().trim().to_string());
            eprintln!("{}", error_json(&err));
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", error_json(&e));
            ExitCode::from(exit_code(&e))
        }
    }
}
