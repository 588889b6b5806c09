//! Catalog-driven command line for the optimality-system pipeline:
//! enumerate supports into a catalog, decide feasibility of selected
//! orbit systems, and print systems or a summary table.
//!
//! Exit codes: 0 success, 2 invalid input, 3 at least one checked
//! system stayed undecided within its budgets.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use kwfeas::catalog::{self, Catalog};
use kwfeas::feasibility::{SearchConfig, Status, Strategy};
use kwfeas::kw::Restriction;
use kwfeas::poly::parse_rat;
use kwfeas::{exec, Error, Rat};

#[derive(Parser)]
#[command(name = "kwfeas", version, about = "Optimality inequality systems for saturated designs: enumerate, reduce by symmetry, decide feasibility with exact evidence")]
struct Cli {
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate saturated supports, reduce by symmetry, write the catalog
    Enumerate(Target),
    /// Decide feasibility of catalog systems and store the verdicts
    Check(CheckArgs),
    /// Print one orbit's system
    Show(ShowArgs),
    /// Print a verdict table for the whole catalog
    Report(Target),
}

#[derive(Args)]
struct Target {
    /// Number of binary rules
    #[arg(short, long, default_value_t = 4)]
    k: u8,
    /// Interaction order of the model
    #[arg(short, long, default_value_t = 1)]
    d: u8,
    /// Catalog file (default: $KWFEAS_CATALOG_DIR or ./catalogs, by k and d)
    #[arg(long)]
    catalog: Option<PathBuf>,
}

impl Target {
    fn path(&self) -> PathBuf {
        self.catalog.clone().unwrap_or_else(|| catalog::default_path(self.k, self.d))
    }
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    target: Target,
    /// Orbit ids to check: "all", one id, or a comma list like "2,5,7"
    #[arg(long, default_value = "all")]
    orbit: String,
    /// Engine selection: auto runs witness, certificate, then boxes
    #[arg(long, default_value = "auto")]
    strategy: Strategy,
    /// Equality restriction such as m3=m4 or m2=5/2; repeatable
    #[arg(long = "restrict")]
    restrictions: Vec<String>,
    /// Search box lo:hi applied to every variable (e.g. 1e-3:1e3)
    /// instead of the default box ladder
    #[arg(long = "box")]
    box_range: Option<String>,
    /// Wall-clock budget per system, e.g. 90000ms, 600s, 10m
    #[arg(long)]
    budget: Option<String>,
    /// Seed for the randomized witness starts
    #[arg(long)]
    seed: Option<u64>,
    /// Witness search starts
    #[arg(long)]
    starts: Option<u32>,
    /// Pattern-search sweeps per start
    #[arg(long)]
    iterations: Option<u32>,
    /// Denominator cap for witness rationalization
    #[arg(long)]
    denom: Option<u64>,
    /// Maximum multiplier degree in certificate search
    #[arg(long)]
    degree: Option<u32>,
    /// Maximum constraint-product order in certificate search
    #[arg(long)]
    order: Option<u32>,
    /// Boxes classified per branch-and-bound run
    #[arg(long)]
    boxes: Option<u64>,
    /// Cap on retained trace entries per box run
    #[arg(long)]
    trace: Option<u32>,
}

#[derive(Args)]
struct ShowArgs {
    #[command(flatten)]
    target: Target,
    /// Orbit id
    #[arg(long)]
    orbit: usize,
    #[arg(long, value_enum, default_value_t = ShowFormat::Text)]
    format: ShowFormat,
}

#[derive(Clone, Copy, ValueEnum)]
enum ShowFormat {
    Text,
    Json,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = exec::set_jobs(jobs) {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let outcome = match cli.command {
        Command::Enumerate(t) => cmd_enumerate(&t),
        Command::Check(a) => cmd_check(&a),
        Command::Show(a) => cmd_show(&a),
        Command::Report(t) => cmd_report(&t),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

/// Anything a user can fix by changing their invocation or files is
/// "invalid input" for scripting purposes.
fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::InvalidModel(_)
        | Error::InvalidSupport(_)
        | Error::InvalidRestriction(_)
        | Error::InvalidBox(_)
        | Error::Parse(_)
        | Error::UnknownOrbit(_)
        | Error::OutOfScale(_)
        | Error::Catalog(_)
        | Error::Io(_)
        | Error::Json(_) => 2,
        _ => 1,
    }
}

fn cmd_enumerate(t: &Target) -> kwfeas::Result<ExitCode> {
    let cat = Catalog::build(t.k, t.d)?;
    let path = t.path();
    cat.save(&path)?;
    println!(
        "k={} d={}: {} supports, {} nondegenerate, {} orbits",
        cat.k,
        cat.d,
        cat.total_supports,
        cat.nondegenerate_supports,
        cat.orbits.len()
    );
    println!("catalog written to {}", path.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_check(a: &CheckArgs) -> kwfeas::Result<ExitCode> {
    let path = a.target.path();
    let mut cat = Catalog::load(&path)?;
    let ids = parse_selector(&a.orbit, &cat)?;
    let restrictions = a
        .restrictions
        .iter()
        .map(|s| Restriction::parse(s))
        .collect::<kwfeas::Result<Vec<_>>>()?;
    let box_range = a.box_range.as_deref().map(parse_box).transpose()?;
    let base_cfg = build_config(a)?;

    let mut undecided = 0usize;
    for id in ids {
        let mut cfg = base_cfg.clone();
        if let Some((lo, hi)) = &box_range {
            // the restricted system may have fewer variables
            let nvars = cat.restricted_system(id, &restrictions)?.nvars();
            cfg.region = Some(vec![(lo.clone(), hi.clone()); nvars]);
        }
        let rec = cat.check_orbit(id, a.strategy, &cfg, &restrictions)?;
        let summary = rec
            .verdict
            .diagnostics
            .last()
            .cloned()
            .unwrap_or_default();
        println!(
            "orbit {id}: {}{} in {} ({summary})",
            rec.verdict.status,
            if rec.restrictions.is_empty() {
                String::new()
            } else {
                format!(" [{}]", rec.restrictions.join(", "))
            },
            human_ms(rec.wall_ms),
        );
        if rec.verdict.status == Status::Unknown {
            undecided += 1;
        }
    }
    cat.save(&path)?;
    if undecided > 0 {
        println!("{undecided} system(s) undecided within the budgets");
        return Ok(ExitCode::from(3));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_show(a: &ShowArgs) -> kwfeas::Result<ExitCode> {
    let cat = Catalog::load(&a.target.path())?;
    let rec = cat.orbit(a.orbit)?;
    match a.format {
        ShowFormat::Text => print!("{}", rec.system),
        ShowFormat::Json => println!("{}", serde_json::to_string_pretty(&rec.system)?),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_report(t: &Target) -> kwfeas::Result<ExitCode> {
    let cat = Catalog::load(&t.path())?;
    println!(
        "catalog k={} d={}: {} supports, {} nondegenerate, {} orbits",
        cat.k,
        cat.d,
        cat.total_supports,
        cat.nondegenerate_supports,
        cat.orbits.len()
    );
    print!("{}", cat.report());
    Ok(ExitCode::SUCCESS)
}

fn parse_selector(s: &str, cat: &Catalog) -> kwfeas::Result<Vec<usize>> {
    if s.trim() == "all" {
        return Ok(cat.orbits.iter().map(|o| o.id).collect());
    }
    let mut ids = Vec::new();
    for part in s.split(',') {
        let id: usize = part
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad orbit selector '{part}'")))?;
        cat.orbit(id)?;
        ids.push(id);
    }
    if ids.is_empty() {
        return Err(Error::Parse("empty orbit selector".into()));
    }
    Ok(ids)
}

fn parse_box(s: &str) -> kwfeas::Result<(Rat, Rat)> {
    let Some((lo, hi)) = s.split_once(':') else {
        return Err(Error::InvalidBox(format!("'{s}' is not of the form lo:hi")));
    };
    Ok((parse_rat(lo)?, parse_rat(hi)?))
}

/// Accepts "90000", "90000ms", "600s", or "10m".
fn parse_budget(s: &str) -> kwfeas::Result<u64> {
    let s = s.trim();
    let (digits, unit) = match s.find(|c: char| !c.is_ascii_digit()) {
        Some(pos) => s.split_at(pos),
        None => (s, "ms"),
    };
    let value: u64 = digits
        .parse()
        .map_err(|_| Error::Parse(format!("bad budget '{s}'")))?;
    let ms = match unit {
        "ms" => value,
        "s" => value.saturating_mul(1000),
        "m" => value.saturating_mul(60_000),
        other => return Err(Error::Parse(format!("bad budget unit '{other}', expected ms|s|m"))),
    };
    if ms == 0 {
        return Err(Error::Parse("budget must be positive".into()));
    }
    Ok(ms)
}

fn build_config(a: &CheckArgs) -> kwfeas::Result<SearchConfig> {
    let mut cfg = SearchConfig::default();
    if let Some(b) = &a.budget {
        cfg.time_budget_ms = Some(parse_budget(b)?);
    }
    if let Some(v) = a.seed {
        cfg.seed = v;
    }
    if let Some(v) = a.starts {
        cfg.multistart = v;
    }
    if let Some(v) = a.iterations {
        cfg.iterations = v;
    }
    if let Some(v) = a.denom {
        cfg.denom_bound = v;
    }
    if let Some(v) = a.degree {
        cfg.degree_bound = v;
    }
    if let Some(v) = a.order {
        cfg.order_bound = v;
    }
    if let Some(v) = a.boxes {
        cfg.box_budget = v;
    }
    if let Some(v) = a.trace {
        cfg.trace_limit = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn human_ms(ms: u64) -> String {
    if ms < 10_000 {
        format!("{ms} ms")
    } else {
        format!("{:.1} s", ms as f64 / 1000.0)
    }
}
