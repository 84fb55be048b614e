use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use pchaos::density::{banach_window, empirical_density, exact_ap_density, max_banach_ratio, IndexSet};
use pchaos::schedule::Preset;
use pchaos::suite::{self, SuiteResult, DEFAULT_SEED, DEFAULT_TRIALS};
use pchaos::verify::{hyp0_witness, periodicity_check, reiterative_witness, transitivity_witness};
use pchaos::{Dyadic, NormKind, OperatorT, Schedule, SparseVec};
use serde_json::json;

/// Exact experiments with the block-periodic weighted shift on finite sequences.
#[derive(Parser)]
#[command(name = "pchaos", version)]
struct Cli {
    /// Schedule preset: canonical or small-2.
    #[arg(long, global = true, default_value = "small-2")]
    preset: Preset,

    /// Number of blocks past block 0 [default: 8 for small-2, 3 for canonical].
    #[arg(long, global = true)]
    prefix: Option<usize>,

    /// Read the schedule from a JSON file instead of a preset.
    #[arg(long, global = true, value_name = "FILE")]
    schedule: Option<PathBuf>,

    /// Print reports as JSON.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print a schedule and its condition report.
    Schedule {
        /// Also check the extra condition relating consecutive doubling regions.
        #[arg(long)]
        check_lp_bound: bool,
        /// Write the schedule JSON here.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Norms along the orbit of a vector.
    Orbit {
        #[arg(long, value_name = "FILE")]
        vec: PathBuf,
        #[arg(long)]
        steps: u64,
        #[arg(long, default_value = "l1")]
        norm: NormKind,
        /// Write the profile here instead of stdout.
        #[arg(long, value_name = "FILE")]
        csv: Option<PathBuf>,
    },
    /// Period of a basis vector, checked by applying it.
    Period {
        #[arg(long)]
        basis: u64,
    },
    /// `T^exp e_basis`, exponent of any size.
    Power {
        #[arg(long)]
        basis: u64,
        #[arg(long)]
        exp: BigUint,
    },
    /// Single-coordinate approximation with a prescribed exponent class.
    Hyp0 {
        #[arg(long)]
        eps: Dyadic,
        #[arg(long)]
        k: u64,
        #[arg(long = "N", value_name = "N")]
        modulus: BigUint,
        #[arg(long = "M", value_name = "M")]
        residue: BigUint,
        #[arg(long)]
        xk: Dyadic,
    },
    /// Perturb `--from` so that some iterate lands near `--to`.
    Transit {
        #[arg(long, value_name = "FILE")]
        from: PathBuf,
        #[arg(long, value_name = "FILE")]
        to: PathBuf,
        #[arg(long)]
        eps: Dyadic,
    },
    /// Periodic return times of one orbit to a ball.
    Reiterate {
        #[arg(long, value_name = "FILE")]
        center: PathBuf,
        #[arg(long)]
        radius: Dyadic,
        #[arg(long)]
        depth: u64,
    },
    /// Run the seeded property suites.
    Verify {
        #[arg(long, value_enum, default_value = "all")]
        claim: ClaimArg,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_TRIALS)]
        trials: usize,
        #[arg(long, default_value = "l1")]
        norm: NormKind,
    },
    /// Densities of an index set.
    Density {
        #[arg(long, value_name = "FILE")]
        set: PathBuf,
        /// Also report the best window of this length.
        #[arg(long)]
        window: Option<u64>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ClaimArg {
    Periodicity,
    Fhc0,
    Fhc1,
    Fhc2,
    Cool,
    All,
}

enum Failure {
    /// Bad flags, unreadable files, or a request the schedule cannot serve.
    Input(String),
    /// Everything ran, but some checked inequality is false.
    Check,
}

impl From<pchaos::Error> for Failure {
    fn from(e: pchaos::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_schedule(cli: &Cli) -> Result<Schedule, Failure> {
    if let Some(path) = &cli.schedule {
        return read_json(path);
    }
    let prefix = cli.prefix.unwrap_or(match cli.preset {
        Preset::Canonical => 3,
        Preset::Small2 => 8,
    });
    Ok(cli.preset.build(prefix)?)
}

fn operator(cli: &Cli) -> Result<OperatorT, Failure> {
    Ok(OperatorT::new(load_schedule(cli)?)?)
}

fn print_json(value: &impl serde::Serialize) {
    println!("{}", serde_json::to_string_pretty(value).expect("reports serialize"));
}

fn verdict(holds: bool) -> Outcome {
    if holds {
        Ok(())
    } else {
        Err(Failure::Check)
    }
}

fn list(xs: &[impl ToString]) -> String {
    let items: Vec<String> = xs.iter().map(|x| x.to_string()).collect();
    format!("[{}]", items.join(", "))
}

fn schedule_cmd(cli: &Cli, check_lp_bound: bool, out: Option<&Path>) -> Outcome {
    let s = load_schedule(cli)?;
    let report = s.validate();
    let extra = check_lp_bound.then(|| s.validate_lp_bound());
    if let Some(path) = out {
        fs::write(path, serde_json::to_string_pretty(&s).expect("schedules serialize"))?;
    }
    if cli.json {
        print_json(&json!({ "schedule": s, "conditions": report, "lp_bound": extra }));
    } else {
        println!("prefix = {}", s.prefix());
        let b = s.boundaries();
        println!("b = {}", list(&b[..=s.prefix()]));
        println!("index limit b_{} = {}", s.prefix() + 1, s.index_limit());
        println!("delta = {}", list(s.deltas()));
        println!("tau = {}", list(s.taus()));
        println!("N = {}", list(s.multipliers()));
        println!("phi = {}", list(s.phis()));
        println!("conditions: {report}");
        if let Some(r) = &extra {
            println!("{r}");
        }
    }
    verdict(report.all_pass() && extra.is_none_or(|r| r.all_pass()))
}

fn orbit_cmd(cli: &Cli, vec: &Path, steps: u64, norm: NormKind, csv_out: Option<&Path>) -> Outcome {
    let op = operator(cli)?;
    let v: SparseVec = read_json(vec)?;
    let sink: Box<dyn Write> = match csv_out {
        Some(p) => Box::new(fs::File::create(p)?),
        None => Box::new(io::stdout().lock()),
    };
    let mut w = csv::Writer::from_writer(sink);
    let csv_err = |e: csv::Error| Failure::Input(e.to_string());
    w.write_record(["j", "norm", "exact", "approx", "support"])
        .map_err(csv_err)?;
    for (j, u) in op.orbit(&v)?.take(steps as usize + 1).enumerate() {
        let value = u.norm(norm).value;
        w.write_record([
            j.to_string(),
            norm.to_string(),
            value.to_string(),
            value.approx_string(),
            u.len().to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn period_cmd(cli: &Cli, basis: u64) -> Outcome {
    let rep = periodicity_check(&operator(cli)?, basis)?;
    if cli.json {
        print_json(&rep);
    } else {
        println!("period of e_{basis} = {}", rep.witness);
        print!("{}", rep.summary());
    }
    verdict(rep.holds())
}

fn power_cmd(cli: &Cli, basis: u64, exp: &BigUint) -> Outcome {
    let v = operator(cli)?.apply_power(&SparseVec::basis(basis), exp)?;
    if cli.json {
        print_json(&v);
    } else {
        println!("{v}");
    }
    Ok(())
}

fn report_out<W: serde::Serialize>(cli: &Cli, rep: &pchaos::WitnessReport<W>) -> Outcome {
    if cli.json {
        print_json(rep);
    } else {
        print!("{}", rep.summary());
    }
    verdict(rep.holds())
}

fn suite_out(cli: &Cli, results: &[SuiteResult]) -> Outcome {
    if cli.json {
        print_json(&results);
    } else {
        for r in results {
            println!("{}", r.summary());
            for c in r.failures() {
                println!("  {}: {}", c.key, c.detail);
            }
        }
    }
    verdict(results.iter().all(SuiteResult::passed))
}

fn verify_cmd(cli: &Cli, claim: ClaimArg, seed: u64, trials: usize, norm: NormKind) -> Outcome {
    let op = operator(cli)?;
    let s = op.schedule();
    let prefix = s.prefix();
    let wants = |c: ClaimArg| claim == c || claim == ClaimArg::All;
    let mut results = Vec::new();
    if wants(ClaimArg::Periodicity) {
        let limit = s.b(prefix);
        let r = suite::periodicity_suite(&op, limit)?;
        if !cli.json {
            println!("checked {limit} basis vectors, k < b_{prefix} = {limit}");
        }
        results.push(r);
    }
    if wants(ClaimArg::Fhc0) {
        results.push(suite::fhc0_suite(&op, prefix.min(3), trials, seed, norm)?);
    }
    if wants(ClaimArg::Fhc1) {
        results.push(suite::fhc1_suite(&op, prefix.min(3), trials, seed, norm)?);
    }
    if wants(ClaimArg::Fhc2) {
        results.push(suite::fhc2_suite(&op, prefix.min(2), trials, seed)?);
    }
    if wants(ClaimArg::Cool) {
        results.push(suite::cool_suite(&op, prefix.min(2), trials, seed)?);
    }
    suite_out(cli, &results)
}

fn density_cmd(cli: &Cli, set: &Path, window: Option<u64>) -> Outcome {
    let a: IndexSet = read_json(set)?;
    let e = empirical_density(&a, None);
    let banach = max_banach_ratio(&a)?;
    let best = window.map(|w| banach_window(&a, w)).transpose()?;
    let exact = a.structure().map(exact_ap_density).transpose()?;
    if cli.json {
        print_json(&json!({
            "horizon": a.horizon(),
            "count": a.len(),
            "lower": e.lower.to_string(),
            "upper": e.upper.to_string(),
            "tail_start": e.tail_start,
            "max_prefix_ratio": banach.to_string(),
            "window": best,
            "exact": exact.map(|d| d.to_string()),
        }));
    } else {
        println!("horizon = {}, |A| = {}", a.horizon(), a.len());
        println!("lower = {}, upper = {} over N >= {}", e.lower, e.upper, e.tail_start);
        println!("max a_N/N = {banach}");
        if let Some(b) = best {
            println!(
                "window {}: {} hits from {}, ratio {}",
                b.window, b.max_count, b.argmax_start, b.ratio
            );
        }
        if let Some(d) = exact {
            println!("exact density = {d}");
        }
    }
    Ok(())
}

fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Schedule { check_lp_bound, out } => schedule_cmd(cli, *check_lp_bound, out.as_deref()),
        Command::Orbit { vec, steps, norm, csv } => orbit_cmd(cli, vec, *steps, *norm, csv.as_deref()),
        Command::Period { basis } => period_cmd(cli, *basis),
        Command::Power { basis, exp } => power_cmd(cli, *basis, exp),
        Command::Hyp0 {
            eps,
            k,
            modulus,
            residue,
            xk,
        } => report_out(cli, &hyp0_witness(&operator(cli)?, eps, *k, modulus, residue, xk)?),
        Command::Transit { from, to, eps } => {
            let (y, x): (SparseVec, SparseVec) = (read_json(from)?, read_json(to)?);
            report_out(cli, &transitivity_witness(&operator(cli)?, &y, &x, eps)?)
        }
        Command::Reiterate { center, radius, depth } => {
            let c: SparseVec = read_json(center)?;
            report_out(cli, &reiterative_witness(&operator(cli)?, &c, radius, *depth)?)
        }
        Command::Verify {
            claim,
            seed,
            trials,
            norm,
        } => verify_cmd(cli, *claim, *seed, *trials, *norm),
        Command::Density { set, window } => density_cmd(cli, set, *window),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check) => ExitCode::from(1),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
