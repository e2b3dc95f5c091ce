mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use star_radon::bp::{bp_experiment, perturbation_scan};
use star_radon::grid::{random_directions, rule_directions};
use star_radon::inversion::{coefficients, consistency_identity, inverse_radon, InverseOptions, Split, SERIES_TOL};
use star_radon::radon::{radon_field, SphereFunction};
use star_radon::sections::{profile, support_bound, ProfileGrid, SectionSource};
use star_radon::{Direction, Error, Execution, RuleSet, Rules, StarBody, VecN};

use output::{num, xi_cells, xi_header, Csv, OutDir};

#[derive(Parser, Debug)]
#[command(
    name = "star-radon",
    version,
    about = "Sections, spherical Radon transform and its inversion for star bodies",
    args_override_self = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Dump section functions A_xi(t) on a grid of directions.
    Sections {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        body: String,
        /// Samples per direction on [0, support].
        #[arg(long, default_value_t = 33)]
        points: usize,
    },
    /// Forward Radon transform of a sphere function.
    Radon {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: GridArgs,
        /// `const:c=1`, `zonal:d=2` (axis e_n) or `rho:p=1` (needs --body).
        #[arg(long)]
        function: String,
        #[arg(long)]
        body: Option<String>,
    },
    /// Inverse Radon transform of the radial function, with round trip.
    Invert {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        body: String,
        /// Skip the forward transform of the estimate.
        #[arg(long)]
        no_roundtrip: bool,
        /// Near-zero split point of the odd-n integral.
        #[arg(long)]
        delta: Option<f64>,
        /// Far split point of the odd-n integral.
        #[arg(long)]
        cutoff: Option<f64>,
    },
    /// Leading coefficients, the series constant and the scale factor.
    Constants {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = SERIES_TOL)]
        tol: f64,
    },
    /// Compare central sections and volumes of two bodies.
    BpCheck {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        k: String,
        #[arg(long)]
        l: String,
    },
    /// Minimum of the inverse transform along a family of perturbed balls.
    Scan {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: GridArgs,
        /// Degree of the zonal perturbation.
        #[arg(long, default_value_t = 4)]
        d: usize,
        /// `start:stop:step`.
        #[arg(long)]
        eps: String,
    },
}

#[derive(Args, Debug)]
struct Common {
    #[arg(long, value_parser = clap::value_parser!(u32).range(3..=8))]
    dim: u32,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Flat key=value file mirroring the flags; flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    section_level: Option<u32>,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    radon_level: Option<u32>,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    support_level: Option<u32>,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    gauss_nodes: Option<u32>,
    #[arg(long, value_parser = clap::value_parser!(u32).range(2..))]
    scan_points: Option<u32>,
    #[arg(long)]
    bisection_steps: Option<u32>,
    /// Base derivative step as a fraction of the support bound.
    #[arg(long)]
    derivative_step: Option<f64>,
    /// Disable the thread pool.
    #[arg(long)]
    sequential: bool,
}

#[derive(Args, Debug)]
struct GridArgs {
    /// Use the nodes of the level-L rule on the sphere.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    grid_level: Option<u32>,
    /// Use this many random directions instead.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    directions: Option<u32>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Explicit directions, `x1,..,xn;y1,..,yn`; normalized on input.
    #[arg(long)]
    xi: Option<String>,
}

enum Failure {
    Usage(String),
    Numerical(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Resolution(_) => Failure::Numerical(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

impl Common {
    fn n(&self) -> usize {
        self.dim as usize
    }

    fn rules(&self) -> Result<Rules, Failure> {
        let mut s = RuleSet::for_dim(self.n());
        let set = |dst: &mut usize, v: Option<u32>| {
            if let Some(v) = v {
                *dst = v as usize;
            }
        };
        set(&mut s.section_level, self.section_level);
        set(&mut s.radon_level, self.radon_level);
        set(&mut s.support_level, self.support_level);
        set(&mut s.gauss_nodes, self.gauss_nodes);
        set(&mut s.scan_points, self.scan_points);
        set(&mut s.bisection_steps, self.bisection_steps);
        if let Some(h) = self.derivative_step {
            s.derivative_step = h;
        }
        if self.sequential {
            s.execution = Execution::Sequential;
        }
        Ok(Rules::new(self.n(), s)?)
    }

    fn echo(&self, rules: &Rules) -> Value {
        let s = &rules.settings;
        json!({
            "dim": self.n(),
            "section_level": s.section_level,
            "radon_level": s.radon_level,
            "support_level": s.support_level,
            "gauss_nodes": s.gauss_nodes,
            "scan_points": s.scan_points,
            "bisection_steps": s.bisection_steps,
            "derivative_step": s.derivative_step,
        })
    }

    fn out(&self) -> Result<OutDir, Failure> {
        Ok(OutDir::create(&self.out_dir)?)
    }
}

/// Default output grid: rule nodes, at least 100 where that stays cheap.
fn default_grid_level(n: usize) -> usize {
    match n {
        3 => 8,
        4 => 4,
        5 => 3,
        _ => 2,
    }
}

impl GridArgs {
    fn directions(&self, n: usize) -> Result<Vec<Direction>, Failure> {
        if let Some(list) = &self.xi {
            return list
                .split(';')
                .map(|item| {
                    let xs = item
                        .split(',')
                        .map(|x| x.trim().parse::<f64>())
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(|_| Failure::Usage(format!("bad direction '{item}'")))?;
                    if xs.len() != n {
                        return Err(Failure::Usage(format!("direction '{item}' does not have {n} entries")));
                    }
                    Ok(VecN::from_slice(&xs)?.normalized()?)
                })
                .collect();
        }
        if let Some(count) = self.directions {
            return Ok(random_directions(n, count as usize, self.seed)?);
        }
        let level = self.grid_level.map(|l| l as usize).unwrap_or_else(|| default_grid_level(n));
        Ok(rule_directions(n, level)?)
    }

    fn echo(&self, count: usize) -> Value {
        json!({
            "grid_level": self.grid_level,
            "directions": self.directions,
            "xi": self.xi,
            "seed": self.seed,
            "count": count,
        })
    }
}

fn body(spec: &str, n: usize) -> Result<StarBody, Failure> {
    Ok(StarBody::parse(spec, n)?)
}

fn check_finite(name: &str, xs: &[f64]) -> Outcome {
    match xs.iter().position(|x| !x.is_finite()) {
        Some(i) => Err(Failure::Numerical(format!("{name}: non-finite value at row {i}"))),
        None => Ok(()),
    }
}

fn with_grid(mut echo: Value, grid: Value) -> Value {
    echo["grid"] = grid;
    echo
}

fn run_sections(common: &Common, grid: &GridArgs, spec: &str, points: usize) -> Outcome {
    let n = common.n();
    let rules = common.rules()?;
    let k = body(spec, n)?;
    let dirs = grid.directions(n)?;
    if points < 2 {
        return Err(Failure::Usage("--points must be at least 2".into()));
    }
    let profiles = rules.execution().try_map(&dirs, |xi| {
        let sb = support_bound(&k, xi, &rules.support);
        profile(&k, xi, &ProfileGrid::uniform(sb, points)?, sb, &rules, SectionSource::Numeric)
    })?;
    let mut header = xi_header(n);
    header.extend(["t".to_string(), "A".to_string()]);
    let mut csv = Csv::new(&header);
    let mut central = Vec::with_capacity(dirs.len());
    for p in &profiles {
        check_finite("section", &p.values)?;
        central.push(p.values[0]);
        for (t, a) in p.ts.iter().zip(&p.values) {
            let mut row = xi_cells(&p.xi);
            row.extend([num(*t), num(*a)]);
            csv.row(&row);
        }
    }
    let out = common.out()?;
    let path = out.csv("sections.csv", &csv)?;
    let max = central.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = central.iter().copied().fold(f64::INFINITY, f64::min);
    let mut echo = with_grid(common.echo(&rules), grid.echo(dirs.len()));
    echo["body"] = json!(k.spec().to_string());
    echo["points"] = json!(points);
    out.summary(
        "sections_summary.json",
        "sections",
        echo,
        json!({ "central_min": min, "central_max": max, "csv": "sections.csv" }),
    )?;
    println!("wrote {} ({} directions)", path.display(), dirs.len());
    Ok(())
}

fn sphere_function(text: &str, n: usize, body_spec: Option<&str>) -> Result<SphereFunction, Failure> {
    let (kind, rest) = text.split_once(':').unwrap_or((text, ""));
    let param = |key: &str| -> Result<f64, Failure> {
        rest.split(',')
            .filter_map(|kv| kv.split_once('='))
            .find(|(k, _)| k.trim() == key)
            .ok_or_else(|| Failure::Usage(format!("function '{text}' needs {key}=...")))?
            .1
            .trim()
            .parse()
            .map_err(|_| Failure::Usage(format!("function '{text}': bad {key}")))
    };
    match kind {
        "const" => Ok(SphereFunction::constant(n, param("c")?)),
        "zonal" => {
            let d = param("d")?;
            if d < 0.0 || d.fract() != 0.0 {
                return Err(Failure::Usage(format!("zonal degree must be a non-negative integer, got {d}")));
            }
            Ok(SphereFunction::zonal(Direction::axis(n, n - 1), d as usize))
        }
        "rho" => {
            let spec = body_spec.ok_or_else(|| Failure::Usage("function rho needs --body".into()))?;
            Ok(SphereFunction::radial_power(&body(spec, n)?, param("p")?))
        }
        _ => Err(Failure::Usage(format!("unknown function '{text}'"))),
    }
}

fn run_radon(common: &Common, grid: &GridArgs, function: &str, body_spec: Option<&str>) -> Outcome {
    let n = common.n();
    let rules = common.rules()?;
    let f = sphere_function(function, n, body_spec)?;
    let dirs = grid.directions(n)?;
    let values = radon_field(&f, &dirs, &rules.radon, rules.execution())?;
    check_finite("radon", &values)?;
    let mut header = xi_header(n);
    header.push("value".into());
    let mut csv = Csv::new(&header);
    for (xi, v) in dirs.iter().zip(&values) {
        let mut row = xi_cells(xi);
        row.push(num(*v));
        csv.row(&row);
    }
    let out = common.out()?;
    let path = out.csv("radon.csv", &csv)?;
    let mut echo = with_grid(common.echo(&rules), grid.echo(dirs.len()));
    echo["function"] = json!(function);
    echo["body"] = json!(body_spec);
    out.summary(
        "radon_summary.json",
        "radon",
        echo,
        json!({
            "min": values.iter().copied().fold(f64::INFINITY, f64::min),
            "max": values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            "csv": "radon.csv",
        }),
    )?;
    println!("wrote {}", path.display());
    Ok(())
}

fn run_invert(
    common: &Common,
    grid: &GridArgs,
    spec: &str,
    roundtrip: bool,
    delta: Option<f64>,
    cutoff: Option<f64>,
) -> Outcome {
    let n = common.n();
    let rules = common.rules()?;
    let k = body(spec, n)?;
    let dirs = grid.directions(n)?;
    let split = match (delta, cutoff) {
        (None, None) => None,
        (Some(delta), Some(cutoff)) => Some(Split { delta, cutoff }),
        _ => return Err(Failure::Usage("--delta and --cutoff go together".into())),
    };
    if split.is_some() && n % 2 == 0 {
        return Err(Failure::Usage("--delta/--cutoff only apply to odd dimensions".into()));
    }
    let field = inverse_radon(
        &k,
        &dirs,
        &rules,
        InverseOptions {
            reconstruct: roundtrip,
            split,
        },
    )?;
    check_finite("inverse", &field.values)?;
    let out = common.out()?;

    let mut header = xi_header(n);
    header.push("inv_radon".into());
    let mut fcsv = Csv::new(&header);
    for (xi, v) in dirs.iter().zip(&field.values) {
        let mut row = xi_cells(xi);
        row.push(num(*v));
        fcsv.row(&row);
    }
    out.csv("invert_field.csv", &fcsv)?;

    let mut results = json!({
        "method": field.method.as_str(),
        "kappa": coefficients(n, SERIES_TOL)?.kappa,
        "min": field.min_value,
        "max": field.max_value(),
        "argmin": field.argmin.as_slice(),
        "field_csv": "invert_field.csv",
    });
    if let Some(rec) = &field.reconstructed {
        check_finite("roundtrip", rec)?;
        let mut header = xi_header(n);
        header.extend(["rho_hat", "rho_true", "abs_err"].map(String::from));
        let mut csv = Csv::new(&header);
        for ((xi, r), t) in dirs.iter().zip(rec).zip(&field.rho_true) {
            let mut row = xi_cells(xi);
            row.extend([num(*r), num(*t), num((r - t).abs())]);
            csv.row(&row);
        }
        out.csv("invert.csv", &csv)?;
        results["roundtrip"] = json!({
            "max_abs_err": field.roundtrip_max_abs_err(),
            "max_rel_err": field.roundtrip_max_rel_err(),
            "csv": "invert.csv",
        });
    }
    let mut echo = with_grid(common.echo(&rules), grid.echo(dirs.len()));
    echo["body"] = json!(k.spec().to_string());
    echo["roundtrip"] = json!(roundtrip);
    echo["delta"] = json!(delta);
    echo["cutoff"] = json!(cutoff);
    let path = out.summary("invert_summary.json", "invert", echo, results)?;
    println!(
        "min {} max {}{}",
        num(field.min_value),
        num(field.max_value()),
        field
            .roundtrip_max_abs_err()
            .map(|e| format!(" roundtrip max_abs_err {}", num(e)))
            .unwrap_or_default()
    );
    println!("wrote {}", path.display());
    Ok(())
}

fn run_constants(common: &Common, tol: f64) -> Outcome {
    let n = common.n();
    let c = coefficients(n, tol)?;
    let mut csv = Csv::new(&["k", "a_k"]);
    for (k, a) in c.a.iter().enumerate() {
        csv.row(&[k.to_string(), num(*a)]);
    }
    let out = common.out()?;
    out.csv("constants.csv", &csv)?;
    let series = c.series.map(|s| {
        json!({
            "S_n": s.value,
            "error": s.error,
            "terms": s.terms,
            "accelerated": s.accelerated,
            "identity_value": consistency_identity(n, s.value),
        })
    });
    out.summary(
        "constants_summary.json",
        "constants",
        json!({ "dim": n, "tol": tol }),
        json!({ "a_k": c.a, "kappa_n": c.kappa, "series": series }),
    )?;
    println!("n = {n}");
    println!("kappa_n = {}", num(c.kappa));
    match c.series {
        Some(s) => {
            println!("S_n = {}", num(s.value));
            println!("identity -2 s_(n-2) s_(n-3) S_n/(n-2) = {}", num(consistency_identity(n, s.value)));
        }
        None => println!("S_n undefined for even n"),
    }
    for (k, a) in c.a.iter().enumerate() {
        println!("a_{k} = {}", num(*a));
    }
    Ok(())
}

fn run_bp(common: &Common, grid: &GridArgs, k_spec: &str, l_spec: &str) -> Outcome {
    let n = common.n();
    let rules = common.rules()?;
    let k = body(k_spec, n)?;
    let l = body(l_spec, n)?;
    let dirs = grid.directions(n)?;
    let rep = bp_experiment(&k, &l, &dirs, &rules)?;
    let out = common.out()?;
    let mut header = xi_header(n);
    header.extend(["A_K", "A_L"].map(String::from));
    let mut csv = Csv::new(&header);
    for ((xi, a), b) in dirs.iter().zip(&rep.dominance.k_sections).zip(&rep.dominance.l_sections) {
        let mut row = xi_cells(xi);
        row.extend([num(*a), num(*b)]);
        csv.row(&row);
    }
    out.csv("bp_sections.csv", &csv)?;
    std::fs::write(out.file("bp_report.txt"), rep.to_string())?;
    let results: serde_json::Map<String, Value> = rep
        .to_key_values()
        .into_iter()
        .map(|(k, v)| (k.to_string(), Value::String(v)))
        .collect();
    let mut echo = with_grid(common.echo(&rules), grid.echo(dirs.len()));
    echo["k"] = json!(k.spec().to_string());
    echo["l"] = json!(l.spec().to_string());
    out.summary("bp_summary.json", "bp-check", echo, Value::Object(results))?;
    print!("{rep}");
    println!("curvature_hypothesis=unchecked");
    Ok(())
}

fn parse_range(text: &str) -> Result<Vec<f64>, Failure> {
    let bad = || Failure::Usage(format!("--eps expects start:stop:step, got '{text}'"));
    let parts = text
        .split(':')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| bad())?;
    let [a, b, h] = parts[..] else {
        return Err(bad());
    };
    if !(h > 0.0) || b < a || !a.is_finite() || !b.is_finite() {
        return Err(bad());
    }
    let count = ((b - a) / h + 1e-9).floor() as usize + 1;
    // Rounded so that 0.1 + 0.2 prints as 0.3.
    Ok((0..count).map(|i| ((a + i as f64 * h) * 1e12).round() / 1e12).collect())
}

fn run_scan(common: &Common, grid: &GridArgs, d: usize, eps: &str) -> Outcome {
    let n = common.n();
    let rules = common.rules()?;
    let eps = parse_range(eps)?;
    let dirs = grid.directions(n)?;
    let scan = perturbation_scan(n, d, &eps, &dirs, &rules)?;
    let mut header = vec!["eps".to_string(), "min".to_string()];
    header.extend((1..=n).map(|i| format!("argmin_{i}")));
    let mut csv = Csv::new(&header);
    for r in &scan.rows {
        check_finite("scan", &[r.min_value])?;
        let mut row = vec![num(r.eps), num(r.min_value)];
        row.extend(xi_cells(&r.argmin));
        csv.row(&row);
    }
    let out = common.out()?;
    out.csv("scan.csv", &csv)?;
    let sign_change = scan
        .rows
        .windows(2)
        .find(|w| w[0].min_value >= 0.0 && w[1].min_value < 0.0)
        .map(|w| [w[0].eps, w[1].eps]);
    let mut echo = with_grid(common.echo(&rules), grid.echo(dirs.len()));
    echo["d"] = json!(d);
    echo["eps"] = json!(eps);
    out.summary(
        "scan_summary.json",
        "scan",
        echo,
        json!({
            "first_negative": scan.first_negative(),
            "sign_change_between": sign_change,
            "csv": "scan.csv",
        }),
    )?;
    for r in &scan.rows {
        println!("eps {} min {}", num(r.eps), num(r.min_value));
    }
    match scan.first_negative() {
        Some(e) => println!("first negative minimum at eps = {e}"),
        None => println!("no negative minimum found"),
    }
    Ok(())
}

fn run(cli: Cli) -> Outcome {
    match &cli.command {
        Command::Sections { common, grid, body, points } => run_sections(common, grid, body, *points),
        Command::Radon {
            common,
            grid,
            function,
            body,
        } => run_radon(common, grid, function, body.as_deref()),
        Command::Invert {
            common,
            grid,
            body,
            no_roundtrip,
            delta,
            cutoff,
        } => run_invert(common, grid, body, !no_roundtrip, *delta, *cutoff),
        Command::Constants { common, tol } => run_constants(common, *tol),
        Command::BpCheck { common, grid, k, l } => run_bp(common, grid, k, l),
        Command::Scan { common, grid, d, eps } => run_scan(common, grid, *d, eps),
    }
}

fn main() -> ExitCode {
    let args = match config::expand(std::env::args().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {}", e.0);
            return ExitCode::from(2);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(m)) => {
            eprintln!("numerical failure: {m}");
            ExitCode::from(3)
        }
        Err(Failure::Io(m)) => {
            eprintln!("i/o error: {m}");
            ExitCode::from(1)
        }
    }
}
