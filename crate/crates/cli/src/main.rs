//! `billiard`: simulation runs, Farey and sector tables, limit-law tables,
//! convergence sweeps and trajectory export.
//!
//! Every table is CSV preceded by one `#` line holding the resolved
//! configuration as JSON. Values come from command-line flags first, then from
//! the JSON file given with `--config`, then from built-in defaults.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use billiard_core::billiard::{first_exit, fold_trajectory};
use billiard_core::check::run_suite;
use billiard_core::farey::{classify_case, mod_inverse, predecessor, successor, FareyIter};
use billiard_core::limits::{h_density, h_limit_closed, LimitLaw, ZETA2};
use billiard_core::sector::{sector_partition_check, sectors};
use billiard_core::stats::{
    cdf_from_exits, empirical_h_vertical, exit_samples, moment_from_exits, sweep, t_grid, Quantity,
    SampleRule, SampleSpec,
};
use billiard_core::{with_workers, Execution, UnitInterval};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use serde_json::{json, Map, Value};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser, Debug)]
#[command(name = "billiard", version, about = "First exits from a punctured square billiard")]
struct Cli {
    /// JSON file with default values for any flag.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads for batch work; defaults to the available parallelism.
    #[arg(long, global = true, env = "BILLIARD_WORKERS")]
    workers: Option<usize>,

    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// One first-exit record per sampled angle.
    Simulate(SampleArgs),
    /// Empirical tail against its limit law on a t grid.
    Cdf(CdfArgs),
    /// Sup distance to the limit law for a list of radii (JSON).
    Sweep(SweepArgs),
    /// Empirical moment of the scaled exit time against its limit.
    Moments(MomentArgs),
    /// Farey fractions with their neighbor denominators and case.
    Farey(FareyArgs),
    /// First-hit sectors of the vertical model.
    Sectors(SectorArgs),
    /// Table of the limit laws H, h and F.
    Limits(GridArgs),
    /// Folded trajectory of a single launch.
    Traj(TrajArgs),
    /// Run the invariant suite.
    Check,
}

#[derive(Args, Debug, Clone)]
struct SampleArgs {
    /// Scatterer radius, 0 < epsilon < 1/2.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Number of sampled angles.
    #[arg(long)]
    samples: Option<usize>,
    /// Slope interval `lo,hi` inside [0, 1].
    #[arg(long)]
    interval: Option<String>,
    /// Draw angles at random from this seed instead of the midpoint grid.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug, Clone)]
struct GridArgs {
    /// Right end of the t grid (default 1.6).
    #[arg(long)]
    tmax: Option<f64>,
    /// Spacing of the t grid (default 0.005).
    #[arg(long)]
    tstep: Option<f64>,
}

#[derive(Args, Debug)]
struct CdfArgs {
    #[command(flatten)]
    sample: SampleArgs,
    #[command(flatten)]
    grid: GridArgs,
    /// tau, R or vertical_l.
    #[arg(long)]
    quantity: Option<String>,
    /// Farey order for vertical_l.
    #[arg(long = "Q")]
    order: Option<u64>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Comma-separated, strictly descending radii.
    #[arg(long)]
    epsilons: Option<String>,
    /// Sampled angles per radius.
    #[arg(long)]
    samples: Option<usize>,
    /// Slope interval `lo,hi` inside [0, 1].
    #[arg(long)]
    interval: Option<String>,
    /// Random angles from this seed instead of the midpoint grid.
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    grid: GridArgs,
    /// tau or R.
    #[arg(long)]
    quantity: Option<String>,
}

#[derive(Args, Debug)]
struct MomentArgs {
    #[command(flatten)]
    sample: SampleArgs,
    /// Moment order r > 0 of the scaled exit time.
    #[arg(long)]
    r: Option<f64>,
}

#[derive(Args, Debug)]
struct FareyArgs {
    /// Farey order Q.
    #[arg(long = "Q")]
    order: Option<u64>,
    /// Restrict to fractions in `lo,hi`.
    #[arg(long)]
    interval: Option<String>,
}

#[derive(Args, Debug)]
struct SectorArgs {
    /// Farey order Q.
    #[arg(long = "Q")]
    order: Option<u64>,
    /// Restrict to fractions in `lo,hi`.
    #[arg(long)]
    interval: Option<String>,
    /// Print the partition defect instead of the table; exit 2 if it is >= 1e-10.
    #[arg(long)]
    check_partition: bool,
}

#[derive(Args, Debug)]
struct TrajArgs {
    /// Scatterer radius, 0 < epsilon < 1/2.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Launch angle in radians, in [0, pi/4].
    #[arg(long, conflicts_with = "tan_omega")]
    omega: Option<f64>,
    /// Launch slope tan(omega), in [0, 1].
    #[arg(long)]
    tan_omega: Option<f64>,
}

/// Defaults read from `--config`.
#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    epsilon: Option<f64>,
    epsilons: Option<Vec<f64>>,
    samples: Option<usize>,
    interval: Option<[f64; 2]>,
    seed: Option<u64>,
    tmax: Option<f64>,
    tstep: Option<f64>,
    quantity: Option<String>,
    #[serde(rename = "Q")]
    order: Option<u64>,
    r: Option<f64>,
    omega: Option<f64>,
    tan_omega: Option<f64>,
    workers: Option<usize>,
}

impl FileConfig {
    fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

/// Failure classes mapped to exit codes.
enum Outcome {
    Ok,
    InvariantFailure,
}

fn parse_interval(text: &str) -> Result<UnitInterval> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        bail!("interval must be `lo,hi`, got `{text}`");
    }
    let lo: f64 = parts[0].parse().with_context(|| format!("bad interval bound `{}`", parts[0]))?;
    let hi: f64 = parts[1].parse().with_context(|| format!("bad interval bound `{}`", parts[1]))?;
    Ok(UnitInterval::new(lo, hi)?)
}

fn parse_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| s.trim().parse::<f64>().with_context(|| format!("bad number `{s}`")))
        .collect()
}

struct Run {
    file: FileConfig,
    out: Option<PathBuf>,
    exec: Execution,
    resolved: Map<String, Value>,
}

impl Run {
    fn record(&mut self, key: &str, value: Value) {
        self.resolved.insert(key.to_string(), value);
    }

    fn interval(&mut self, flag: &Option<String>) -> Result<UnitInterval> {
        let interval = match (flag, self.file.interval) {
            (Some(text), _) => parse_interval(text)?,
            (None, Some([lo, hi])) => UnitInterval::new(lo, hi)?,
            (None, None) => UnitInterval::FULL,
        };
        self.record("interval", json!([interval.lo, interval.hi]));
        Ok(interval)
    }

    fn sample_spec(
        &mut self,
        samples: Option<usize>,
        interval: &Option<String>,
        seed: Option<u64>,
        default_samples: usize,
    ) -> Result<SampleSpec> {
        let n = samples.or(self.file.samples).unwrap_or(default_samples);
        if n == 0 {
            bail!("--samples must be positive");
        }
        self.record("samples", json!(n));
        let interval = self.interval(interval)?;
        let seed = seed.or(self.file.seed);
        self.record("seed", json!(seed));
        let rule = seed.map_or(SampleRule::Midpoint, |seed| SampleRule::Random { seed });
        Ok(SampleSpec::midpoint(n).with_interval(interval).with_rule(rule))
    }

    fn epsilon(&mut self, flag: Option<f64>, default: f64) -> f64 {
        let e = flag.or(self.file.epsilon).unwrap_or(default);
        self.record("epsilon", json!(e));
        e
    }

    fn order(&mut self, flag: Option<u64>, default: u64) -> u64 {
        let q = flag.or(self.file.order).unwrap_or(default);
        self.record("Q", json!(q));
        q
    }

    fn grid(&mut self, g: &GridArgs) -> Result<Vec<f64>> {
        let tmax = g.tmax.or(self.file.tmax).unwrap_or(1.6);
        let tstep = g.tstep.or(self.file.tstep).unwrap_or(0.005);
        self.record("tmax", json!(tmax));
        self.record("tstep", json!(tstep));
        Ok(t_grid(tmax, tstep)?)
    }

    fn quantity(&mut self, flag: &Option<String>) -> Result<Quantity> {
        let text = flag.clone().or(self.file.quantity.clone()).unwrap_or_else(|| "tau".into());
        let q: Quantity = text.parse()?;
        self.record("quantity", json!(q.as_str()));
        Ok(q)
    }

    fn writer(&self) -> Result<Box<dyn Write>> {
        Ok(match &self.out {
            Some(path) => Box::new(BufWriter::new(
                File::create(path).with_context(|| format!("creating {}", path.display()))?,
            )),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }

    fn header(&self, command: &str) -> String {
        json!({ "command": command, "version": VERSION, "config": self.resolved }).to_string()
    }

    /// Writes `# <config>`, the column line and the rows.
    fn emit_csv(&self, command: &str, columns: &str, rows: &[String]) -> Result<()> {
        let mut w = self.writer()?;
        writeln!(w, "# {}", self.header(command))?;
        writeln!(w, "{columns}")?;
        for row in rows {
            writeln!(w, "{row}")?;
        }
        w.flush()?;
        Ok(())
    }
}

fn simulate(run: &mut Run, args: &SampleArgs) -> Result<Outcome> {
    let epsilon = run.epsilon(args.epsilon, 1e-3);
    let spec = run.sample_spec(args.samples, &args.interval, args.seed, 100_000)?;
    let records = exit_samples(epsilon, &spec, run.exec)?;
    let rows: Vec<String> = records
        .iter()
        .map(|r| {
            format!(
                "{},{},{},{},{},{},{},{},{},{},{}",
                r.omega,
                r.omega.tan(),
                r.epsilon,
                r.tau,
                r.scaled_tau(),
                r.reflections,
                r.scaled_reflections(),
                r.target.denominator(),
                r.target.numerator(),
                r.hit_point.0,
                r.hit_point.1
            )
        })
        .collect();
    run.emit_csv(
        "simulate",
        "omega,tan_omega,epsilon,tau,eps_tau,R,eps_R,q,a,hit_x,hit_y",
        &rows,
    )?;
    Ok(Outcome::Ok)
}

fn cdf(run: &mut Run, args: &CdfArgs) -> Result<Outcome> {
    let quantity = run.quantity(&args.quantity)?;
    let grid = run.grid(&args.grid)?;
    let s = &args.sample;
    let cdf = if quantity == Quantity::VerticalL {
        let order = run.order(args.order, 2000);
        let spec = run.sample_spec(s.samples, &s.interval, s.seed, 100_000)?;
        empirical_h_vertical(order, &spec, &grid, run.exec)?
    } else {
        let epsilon = run.epsilon(s.epsilon, 1e-3);
        let spec = run.sample_spec(s.samples, &s.interval, s.seed, 100_000)?;
        let records = exit_samples(epsilon, &spec, run.exec)?;
        cdf_from_exits(&records, quantity, epsilon, &spec, &grid)?
    };
    let limit = cdf.limit_values(&LimitLaw::default())?;
    let rows: Vec<String> = cdf
        .t_grid
        .iter()
        .zip(&cdf.values)
        .zip(&limit)
        .map(|((t, e), l)| format!("{t},{e},{l},{}", (e - l).abs()))
        .collect();
    run.emit_csv("cdf", "t,empirical,limit,abs_err", &rows)?;
    Ok(Outcome::Ok)
}

fn sweep_cmd(run: &mut Run, args: &SweepArgs) -> Result<Outcome> {
    let epsilons = match (&args.epsilons, &run.file.epsilons) {
        (Some(text), _) => parse_list(text)?,
        (None, Some(list)) => list.clone(),
        (None, None) => vec![1e-2, 1e-3, 1e-4],
    };
    run.record("epsilons", json!(epsilons));
    let quantity = run.quantity(&args.quantity)?;
    let grid = run.grid(&args.grid)?;
    let spec = run.sample_spec(args.samples, &args.interval, args.seed, 1_000_000)?;
    let report = sweep(&epsilons, &spec, &grid, quantity, run.exec)?;
    let doc = json!({
        "command": "sweep",
        "version": VERSION,
        "config": run.resolved,
        "quantity": quantity.as_str(),
        "entries": report.entries,
        "strictly_decreasing": report.strictly_decreasing(),
    });
    let mut w = run.writer()?;
    writeln!(w, "{}", serde_json::to_string_pretty(&doc)?)?;
    w.flush()?;
    Ok(Outcome::Ok)
}

fn moments(run: &mut Run, args: &MomentArgs) -> Result<Outcome> {
    let r = args.r.or(run.file.r).unwrap_or(1.0);
    run.record("r", json!(r));
    let s = &args.sample;
    let epsilon = run.epsilon(s.epsilon, 1e-3);
    let spec = run.sample_spec(s.samples, &s.interval, s.seed, 1_000_000)?;
    let records = exit_samples(epsilon, &spec, run.exec)?;
    let empirical = moment_from_exits(&records, r)?;
    let limit = LimitLaw::default().moment_c(r)?;
    let row = format!("{r},{epsilon},{},{empirical},{limit},{}", spec.n_samples, (empirical - limit).abs());
    run.emit_csv("moments", "r,epsilon,n_samples,empirical,limit,abs_err", &[row])?;
    Ok(Outcome::Ok)
}

fn farey(run: &mut Run, args: &FareyArgs) -> Result<Outcome> {
    let order = run.order(args.order, 5);
    let interval = run.interval(&args.interval)?;
    let mut rows = Vec::new();
    for f in FareyIter::new(order, interval)? {
        let (a, q) = (f.numerator(), f.denominator());
        let row = if f.is_boundary() {
            // one-sided neighbors; the missing side is left blank
            let left = if a == 1 { predecessor(f, order) } else { None };
            let right = if a == 0 { successor(f, order) } else { None };
            let show = |x: Option<billiard_core::Fraction>| x.map_or(String::new(), |x| x.denominator().to_string());
            format!("{a},{q},0,{},{},boundary", show(left), show(right))
        } else {
            let tag = classify_case(f, order)?;
            let abar = mod_inverse(a, q)?;
            let left = predecessor(f, order).ok_or_else(|| anyhow!("no left neighbor of {f}"))?;
            let right = successor(f, order).ok_or_else(|| anyhow!("no right neighbor of {f}"))?;
            format!("{a},{q},{abar},{},{},{}", left.denominator(), right.denominator(), tag.case)
        };
        rows.push(row);
    }
    run.emit_csv("farey", "a,q,abar,qprime,qsecond,case", &rows)?;
    Ok(Outcome::Ok)
}

fn sectors_cmd(run: &mut Run, args: &SectorArgs) -> Result<Outcome> {
    let order = run.order(args.order, 100);
    let interval = run.interval(&args.interval)?;
    run.record("check_partition", json!(args.check_partition));
    if args.check_partition {
        let check = sector_partition_check(order, interval)?;
        let ok = check.defect < 1e-10;
        let mut w = run.writer()?;
        writeln!(w, "# {}", run.header("sectors"))?;
        writeln!(
            w,
            "{}",
            json!({
                "Q": order,
                "sectors": check.sectors,
                "sum_of_widths": check.sum_of_widths,
                "expected": check.expected,
                "defect": check.defect,
                "passed": ok,
            })
        )?;
        w.flush()?;
        return Ok(if ok { Outcome::Ok } else { Outcome::InvariantFailure });
    }
    let rows: Vec<String> = sectors(order, interval, run.exec)?
        .iter()
        .map(|s| {
            let case = s.case.map_or("boundary".to_string(), |c| c.case.to_string());
            format!(
                "{},{},{case},{},{},{},{},{},{}",
                s.frac.denominator(),
                s.frac.numerator(),
                s.lo.num,
                s.lo.den,
                s.hi.num,
                s.hi.den,
                s.width_exact,
                s.width_asym
            )
        })
        .collect();
    run.emit_csv(
        "sectors",
        "q,a,case,lo_num,lo_den,hi_num,hi_den,width_exact,width_asym",
        &rows,
    )?;
    Ok(Outcome::Ok)
}

fn limits(run: &mut Run, args: &GridArgs) -> Result<Outcome> {
    let grid = run.grid(args)?;
    let law = LimitLaw::default();
    let mut rows = Vec::with_capacity(grid.len());
    for &t in &grid {
        // right limit of the density at zero
        let h = if t == 0.0 { 2.0 / ZETA2 } else { h_density(t)? };
        rows.push(format!("{t},{},{h},{}", h_limit_closed(t)?, law.f_limit(t)?));
    }
    run.emit_csv("limits", "t,H,h,F", &rows)?;
    Ok(Outcome::Ok)
}

fn traj(run: &mut Run, args: &TrajArgs) -> Result<Outcome> {
    let epsilon = run.epsilon(args.epsilon, 0.1);
    let omega_flag = args.omega.or(if args.tan_omega.is_none() { run.file.omega } else { None });
    let tan_flag = args.tan_omega.or(if args.omega.is_none() { run.file.tan_omega } else { None });
    let omega = match (omega_flag, tan_flag) {
        (Some(w), None) => w,
        (None, Some(s)) => {
            run.record("tan_omega", json!(s));
            s.atan()
        }
        (Some(_), Some(_)) => bail!("give either omega or tan_omega, not both"),
        (None, None) => bail!("traj needs --omega or --tan-omega"),
    };
    run.record("omega", json!(omega));
    let record = first_exit(omega, epsilon)?;
    let folded = fold_trajectory(&record);
    let rows: Vec<String> = folded
        .segments
        .iter()
        .enumerate()
        .map(|(i, s)| format!("{i},{},{},{},{}", s.start.0, s.start.1, s.end.0, s.end.1))
        .collect();
    run.emit_csv("traj", "seg_index,x0,y0,x1,y1", &rows)?;
    Ok(Outcome::Ok)
}

fn check(run: &mut Run) -> Result<Outcome> {
    let report = run_suite(run.exec)?;
    let mut w = run.writer()?;
    writeln!(w, "# {}", run.header("check"))?;
    for e in &report.entries {
        writeln!(w, "{} {}: {}", if e.passed { "PASS" } else { "FAIL" }, e.name, e.detail)?;
    }
    w.flush()?;
    Ok(if report.passed() { Outcome::Ok } else { Outcome::InvariantFailure })
}

fn dispatch(cli: Cli) -> Result<Outcome> {
    let file = FileConfig::load(cli.config.as_deref())?;
    let workers = cli.workers.or(file.workers);
    if workers == Some(0) {
        bail!("--workers must be positive");
    }
    let mut run = Run {
        file,
        out: cli.out,
        exec: Execution::Parallel,
        resolved: Map::new(),
    };
    with_workers(workers, move || match &cli.command {
        Command::Simulate(a) => simulate(&mut run, a),
        Command::Cdf(a) => cdf(&mut run, a),
        Command::Sweep(a) => sweep_cmd(&mut run, a),
        Command::Moments(a) => moments(&mut run, a),
        Command::Farey(a) => farey(&mut run, a),
        Command::Sectors(a) => sectors_cmd(&mut run, a),
        Command::Limits(a) => limits(&mut run, a),
        Command::Traj(a) => traj(&mut run, a),
        Command::Check => check(&mut run),
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::InvariantFailure) => ExitCode::from(2),
        // reader went away (`| head`)
        Err(e)
            if e.downcast_ref::<std::io::Error>()
                .is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe) =>
        {
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
