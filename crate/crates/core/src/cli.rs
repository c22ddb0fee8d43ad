//! Command-line front end. `main` only calls [`run`].

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::error::{invalid, Error, ErrorKind, Result};
use crate::exactcover::{generate_instance, ExactCoverInstance};
use crate::fmt::sig_digits;
use crate::grover;
use crate::shor::{self, ShorCase};
use crate::solver::{sweep, SGrid, SolverOptions, SweepProfile};
use crate::statevec::{entanglement, BiPartition, DEFAULT_RANK_TOL};
use crate::stats::{self, CriticalWindows, FitModel};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;
pub const EXIT_CONVERGENCE: i32 = 4;

pub fn exit_code(err: &Error) -> i32 {
    match err.kind() {
        ErrorKind::InvalidArgument | ErrorKind::InvalidState => EXIT_INVALID,
        ErrorKind::ResourceLimit => EXIT_RESOURCE,
        ErrorKind::Convergence => EXIT_CONVERGENCE,
        ErrorKind::Io => EXIT_IO,
    }
}

#[derive(Debug, Parser)]
#[command(name = "entscale", version, about = "Entanglement scaling in adiabatic and circuit algorithms")]
#[command(args_override_self = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Qubit count, or a comma-separated list for `grover`.
    #[arg(long, global = true, value_delimiter = ',')]
    pub n: Vec<usize>,

    /// Clause arity.
    #[arg(long, global = true, default_value_t = 3)]
    pub k: usize,

    #[arg(long, global = true, default_value_t = 1)]
    pub count: usize,

    #[arg(long, global = true)]
    pub seed: Option<u64>,

    #[arg(long, global = true, default_value_t = 0.01)]
    pub step: f64,

    /// Subsystem A: `half` (qubits 0..n/2) or a bit mask (decimal or 0x-prefixed).
    #[arg(long, global = true, default_value = "half")]
    pub partition: String,

    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,

    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    #[arg(long, global = true, default_value_t = 20)]
    pub max_qubits: usize,

    /// Flat `key = value` file with the same keys as the flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate Exact Cover instances with a unique satisfying assignment.
    Gen,
    /// Sweep s over [0, 1] for each instance and aggregate the ensemble.
    Sweep {
        /// Instance JSON files or directories holding them.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Analytic entropy curves, saturation table and full-state cross-check.
    Grover,
    /// Pre-QFT register entanglement for each modulus and base.
    Shor {
        /// Odd moduli, comma separated.
        #[arg(long = "modulus", short = 'N', required = true, value_delimiter = ',')]
        moduli: Vec<u64>,
        /// A single base; all coprime bases when omitted.
        #[arg(long)]
        base: Option<u64>,
    },
    /// Aggregate existing sweep CSVs grouped by qubit count.
    Stats {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Least-squares fit of two CSV columns, or a critical-region fit with `--s-c`.
    Fit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "n")]
        x: String,
        #[arg(long, default_value = "mean_max_entropy")]
        y: String,
        #[arg(long, default_value = "linear")]
        model: String,
        /// Peak location; switches to the two-sided critical-region fit.
        #[arg(long)]
        s_c: Option<f64>,
    },
}

/// Splices `--config` file entries in front of the command-line flags so the
/// flags win.
pub fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let mut path = None;
    let mut iter = args.iter().enumerate();
    while let Some((_, a)) = iter.next() {
        let a = a.to_string_lossy();
        if a == "--config" {
            path = iter.next().map(|(_, p)| PathBuf::from(p));
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(PathBuf::from(p));
        }
    }
    let Some(path) = path else { return Ok(args) };
    let text = fs::read_to_string(&path)?;
    let mut from_file = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| invalid(format!("{}:{}: expected key = value", path.display(), i + 1)))?;
        let key = key.trim().replace('_', "-");
        if key == "config" {
            return Err(invalid("config files cannot include other config files"));
        }
        from_file.push(OsString::from(format!("--{key}")));
        from_file.push(OsString::from(value.trim()));
    }
    // Keep the binary name and subcommand first; file entries act as globals before user flags.
    let split = args
        .iter()
        .position(|a| {
            let a = a.to_string_lossy();
            matches!(a.as_ref(), "gen" | "sweep" | "grover" | "shor" | "stats" | "fit")
        })
        .map_or(args.len(), |p| p + 1);
    let mut out: Vec<OsString> = args[..split].to_vec();
    out.extend(from_file);
    out.extend_from_slice(&args[split..]);
    Ok(out)
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I: IntoIterator<Item = OsString>>(args: I) -> i32 {
    let args = match expand_config(args.into_iter().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn execute(cli: &Cli) -> Result<()> {
    let c = &cli.common;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(c.workers.unwrap_or(0))
        .build()
        .map_err(|e| invalid(format!("cannot start worker pool: {e}")))?;
    pool.install(|| match &cli.command {
        Command::Gen => cmd_gen(c),
        Command::Sweep { inputs } => cmd_sweep(c, inputs),
        Command::Grover => cmd_grover(c),
        Command::Shor { moduli, base } => cmd_shor(c, moduli, *base),
        Command::Stats { inputs } => cmd_stats(c, inputs),
        Command::Fit { input, x, y, model, s_c } => cmd_fit(input, x, y, model, *s_c),
    })
}

fn single_n(c: &Common) -> Result<usize> {
    match c.n.as_slice() {
        [n] => Ok(*n),
        [] => Err(invalid("--n is required")),
        _ => Err(invalid("this command takes a single --n")),
    }
}

fn check_qubits(n: usize, c: &Common) -> Result<()> {
    if n > c.max_qubits {
        return Err(Error::ResourceLimit(format!(
            "{n} qubits exceeds --max-qubits {}",
            c.max_qubits
        )));
    }
    Ok(())
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text)?;
    println!("{}", path.display());
    Ok(())
}

pub fn instance_file_name(n: usize, k: usize, idx: usize) -> String {
    format!("ec-n{n}-k{k}-{idx:04}.json")
}

fn cmd_gen(c: &Common) -> Result<()> {
    let n = single_n(c)?;
    check_qubits(n, c)?;
    let seed = c.seed.ok_or_else(|| invalid("gen needs --seed"))?;
    if c.count == 0 {
        return Err(invalid("--count must be positive"));
    }
    let instances = (0..c.count)
        .into_par_iter()
        .map(|i| generate_instance(n, c.k, seed.wrapping_add(i as u64)))
        .collect::<Result<Vec<_>>>()?;
    fs::create_dir_all(&c.out)?;
    for (i, inst) in instances.iter().enumerate() {
        write(&c.out.join(instance_file_name(n, c.k, i)), &inst.to_json())?;
    }
    Ok(())
}

pub fn parse_partition(spec: &str, n: usize) -> Result<BiPartition> {
    let spec = spec.trim();
    if spec == "half" {
        return BiPartition::half(n);
    }
    let mask = match spec.strip_prefix("0x").or_else(|| spec.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => spec.parse(),
    }
    .map_err(|_| invalid(format!("partition {spec:?} is neither `half` nor a bit mask")))?;
    BiPartition::new(n, mask)
}

/// Files with the given suffix, expanding directories one level, sorted by path.
fn collect_files(inputs: &[PathBuf], suffix: &str) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for p in inputs {
        if p.is_dir() {
            for entry in fs::read_dir(p)? {
                let path = entry?.path();
                let name = path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
                if path.is_file() && name.ends_with(suffix) {
                    files.push(path);
                }
            }
        } else {
            files.push(p.clone());
        }
    }
    files.sort();
    if files.is_empty() {
        return Err(invalid(format!("no *{suffix} files found")));
    }
    Ok(files)
}

fn file_stem(path: &Path) -> String {
    let name = path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
    name.strip_suffix(".json").unwrap_or(&name).to_string()
}

fn cmd_sweep(c: &Common, inputs: &[PathBuf]) -> Result<()> {
    let files = collect_files(inputs, ".json")?;
    let grid = SGrid::uniform(c.step)?;
    let loaded = files
        .iter()
        .map(|f| {
            let inst = ExactCoverInstance::load(f)?;
            check_qubits(inst.n_qubits(), c)?;
            let part = parse_partition(&c.partition, inst.n_qubits())?;
            Ok((file_stem(f), inst, part))
        })
        .collect::<Result<Vec<_>>>()?;
    let opts = SolverOptions::default();
    let results: Vec<(String, Result<SweepProfile>)> = loaded
        .par_iter()
        .map(|(stem, inst, part)| (stem.clone(), sweep(inst, &grid, part, &opts)))
        .collect();

    fs::create_dir_all(&c.out)?;
    let mut failures = Vec::new();
    let mut by_n: BTreeMap<usize, Vec<SweepProfile>> = BTreeMap::new();
    for (stem, res) in results {
        match res {
            Ok(profile) => {
                let text = profile.to_csv();
                write(&c.out.join(format!("{stem}.sweep.csv")), &text)?;
                // Aggregate what was written so `stats` on these files reproduces it.
                let written = SweepProfile::from_csv(stem, profile.n_qubits, &text)?;
                by_n.entry(profile.n_qubits).or_default().push(written);
            }
            Err(e) => failures.push((stem, e)),
        }
    }
    write_ensemble(&c.out, &by_n)?;
    if let Some((_, first)) = failures.first() {
        for (stem, e) in &failures {
            eprintln!("{stem}: {e}");
        }
        return Err(match first {
            Error::Convergence { iterations, residual } => Error::Convergence {
                iterations: *iterations,
                residual: *residual,
            },
            e => Error::InvalidState(format!("{} of {} sweeps failed; first: {e}", failures.len(), files.len())),
        });
    }
    Ok(())
}

fn write_ensemble(out: &Path, by_n: &BTreeMap<usize, Vec<SweepProfile>>) -> Result<()> {
    if by_n.is_empty() {
        return Ok(());
    }
    let rows = by_n
        .values()
        .map(|ps| stats::aggregate(ps))
        .collect::<Result<Vec<_>>>()?;
    write(&out.join("ensemble.csv"), &stats::aggregate_csv(&rows))?;
    for (n, ps) in by_n {
        let curve = stats::mean_curve(ps)?;
        let mut text = String::from("s,entropy,gap\n");
        for p in curve {
            text.push_str(&format!(
                "{},{},{}\n",
                sig_digits(p.s, 12),
                sig_digits(p.entropy, 12),
                sig_digits(p.gap, 12)
            ));
        }
        write(&out.join(format!("mean_curve_n{n}.csv")), &text)?;
    }
    Ok(())
}

/// Qubit count encoded as `-n{n}-` in a sweep file name.
pub fn qubits_from_name(path: &Path) -> Option<usize> {
    let name = path.file_name()?.to_string_lossy().into_owned();
    name.match_indices("n")
        .filter_map(|(i, _)| {
            if i > 0 && &name[i - 1..i] != "-" {
                return None;
            }
            let digits: String = name[i + 1..].chars().take_while(char::is_ascii_digit).collect();
            let rest = &name[i + 1 + digits.len()..];
            (!digits.is_empty() && rest.starts_with('-')).then(|| digits.parse().ok())?
        })
        .next()
}

fn cmd_stats(c: &Common, inputs: &[PathBuf]) -> Result<()> {
    let files = collect_files(inputs, ".sweep.csv")?;
    let mut by_n: BTreeMap<usize, Vec<SweepProfile>> = BTreeMap::new();
    for f in files {
        let n = qubits_from_name(&f)
            .ok_or_else(|| invalid(format!("cannot read the qubit count from {}", f.display())))?;
        let text = fs::read_to_string(&f)?;
        let id = file_stem(&f);
        by_n.entry(n).or_default().push(SweepProfile::from_csv(id, n, &text)?);
    }
    fs::create_dir_all(&c.out)?;
    write_ensemble(&c.out, &by_n)
}

fn read_columns(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| invalid(format!("{} is empty", path.display())))?
        .split(',')
        .map(|h| h.trim().to_string())
        .collect();
    let mut cols = vec![Vec::new(); header.len()];
    for (i, line) in lines.enumerate() {
        let vals: Vec<&str> = line.split(',').collect();
        if vals.len() != header.len() {
            return Err(invalid(format!("{} row {}: wrong column count", path.display(), i + 2)));
        }
        for (col, v) in cols.iter_mut().zip(vals) {
            col.push(
                v.trim()
                    .parse()
                    .map_err(|_| invalid(format!("{} row {}: bad number {v:?}", path.display(), i + 2)))?,
            );
        }
    }
    Ok((header, cols))
}

fn column<'a>(header: &[String], cols: &'a [Vec<f64>], name: &str) -> Result<&'a [f64]> {
    header
        .iter()
        .position(|h| h == name)
        .map(|i| cols[i].as_slice())
        .ok_or_else(|| invalid(format!("no column named {name:?}")))
}

fn cmd_fit(input: &Path, x: &str, y: &str, model: &str, s_c: Option<f64>) -> Result<()> {
    let (header, cols) = read_columns(input)?;
    let xs = column(&header, &cols, x)?;
    let ys = column(&header, &cols, y)?;
    let json = match s_c {
        None => {
            let model: FitModel = model.parse()?;
            serde_json::to_string(&stats::fit(xs, ys, model)?)?
        }
        Some(s_c) => {
            let curve: Vec<(f64, f64)> = xs.iter().copied().zip(ys.iter().copied()).collect();
            let res = stats::fit_critical_region(&curve, s_c, CriticalWindows::around(s_c))?;
            serde_json::to_string(&serde_json::json!({
                "growth": res.growth,
                "falling": res.falling,
                "exponent": res.exponent(),
            }))?
        }
    };
    println!("{json}");
    Ok(())
}

pub const GROVER_CHECK_HEADER: &str = "n,max_abs_deviation,min_rank,max_rank";

/// Largest register used for the full-state cross-check.
pub const GROVER_CHECK_MAX_QUBITS: usize = 14;

/// Full-state entropy and rank over the interior grid against the two-level formulas.
pub fn grover_check(n: usize, grid: &[f64]) -> Result<(f64, usize, usize)> {
    let part = BiPartition::half(n)?;
    let rows = grid
        .par_iter()
        .map(|&s| {
            let analytic = grover::point(n, s)?.entropy_bits;
            let rep = entanglement(&grover::numeric_state(n, s, 0)?, &part, DEFAULT_RANK_TOL)?;
            let interior = s > 0.0 && s < 1.0;
            Ok(((rep.entropy_bits - analytic).abs(), interior.then_some(rep.schmidt_rank)))
        })
        .collect::<Result<Vec<_>>>()?;
    let dev = rows.iter().map(|r| r.0).fold(0.0, f64::max);
    let ranks: Vec<usize> = rows.iter().filter_map(|r| r.1).collect();
    let min_rank = ranks.iter().copied().min().unwrap_or(0);
    let max_rank = ranks.iter().copied().max().unwrap_or(0);
    Ok((dev, min_rank, max_rank))
}

fn cmd_grover(c: &Common) -> Result<()> {
    let ns = if c.n.is_empty() { vec![10, 12, 14] } else { c.n.clone() };
    let grid = SGrid::uniform(c.step)?;
    fs::create_dir_all(&c.out)?;
    for &n in &ns {
        write(&c.out.join(format!("grover_n{n}.csv")), &grover::curve_csv(n, grid.points())?)?;
    }
    write(&c.out.join("grover_saturation.csv"), &grover::saturation_csv(&ns)?)?;
    let mut report = format!("{GROVER_CHECK_HEADER}\n");
    for &n in ns.iter().filter(|&&n| n <= GROVER_CHECK_MAX_QUBITS && n <= c.max_qubits) {
        let (dev, lo, hi) = grover_check(n, grid.points())?;
        report.push_str(&format!("{n},{},{lo},{hi}\n", sig_digits(dev, 6)));
    }
    write(&c.out.join("grover_check.csv"), &report)
}

fn cmd_shor(c: &Common, moduli: &[u64], base: Option<u64>) -> Result<()> {
    let mut cases = Vec::new();
    for &m in moduli {
        let bases = match base {
            Some(a) => vec![a],
            None => shor::coprime_bases(m),
        };
        for a in bases {
            let case = ShorCase::new(m, a)?;
            check_qubits(case.total_qubits(), c)?;
            cases.push(case);
        }
    }
    let reports = cases
        .par_iter()
        .map(shor::case_report)
        .collect::<Result<Vec<_>>>()?;
    fs::create_dir_all(&c.out)?;
    let mut orders: BTreeMap<(u64, u64), usize> = BTreeMap::new();
    for rep in &reports {
        let text = serde_json::to_string(rep)? + "\n";
        write(&c.out.join(format!("shor_N{}_a{}.json", rep.modulus, rep.a)), &text)?;
        *orders.entry((rep.modulus, rep.r)).or_default() += 1;
    }
    let mut summary = String::from("N,r,count\n");
    for ((m, r), count) in orders {
        summary.push_str(&format!("{m},{r},{count}\n"));
    }
    write(&c.out.join("shor_orders.csv"), &summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(args: &[&str]) -> Vec<OsString> {
        args.iter().map(OsString::from).collect()
    }

    #[test]
    fn qubit_count_from_file_name() {
        assert_eq!(qubits_from_name(Path::new("out/ec-n10-k3-0001.sweep.csv")), Some(10));
        assert_eq!(qubits_from_name(Path::new("x-n8-y.sweep.csv")), Some(8));
        assert_eq!(qubits_from_name(Path::new("run.sweep.csv")), None);
    }

    #[test]
    fn partition_specs() {
        assert_eq!(parse_partition("half", 6).unwrap().mask_a(), 0b111);
        assert_eq!(parse_partition("0x5", 4).unwrap().mask_a(), 5);
        assert_eq!(parse_partition("3", 4).unwrap().mask_a(), 3);
        assert!(parse_partition("left", 4).is_err());
    }

    #[test]
    fn flags_override_config() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.cfg");
        fs::write(&cfg, "# demo\nn = 8\nseed = 3\nmax_qubits = 12\n").unwrap();
        let cfg = cfg.to_string_lossy().into_owned();
        let args = expand_config(os(&["entscale", "gen", "--config", &cfg, "--seed", "9"])).unwrap();
        let cli = Cli::try_parse_from(args).unwrap();
        assert_eq!(cli.common.n, vec![8]);
        assert_eq!(cli.common.seed, Some(9));
        assert_eq!(cli.common.max_qubits, 12);
    }

    #[test]
    fn exit_codes_by_kind() {
        assert_eq!(exit_code(&invalid("x")), EXIT_INVALID);
        assert_eq!(exit_code(&Error::ResourceLimit("x".into())), EXIT_RESOURCE);
        assert_eq!(
            exit_code(&Error::GenerationCap { n: 3, k: 3, restarts: 1 }),
            EXIT_RESOURCE
        );
        assert_eq!(
            exit_code(&Error::Convergence { iterations: 1, residual: 1.0 }),
            EXIT_CONVERGENCE
        );
    }

    #[test]
    fn gen_requires_seed_and_respects_cap() {
        assert_eq!(run(os(&["entscale", "gen", "--n", "6"])), EXIT_INVALID);
        assert_eq!(run(os(&["entscale", "gen", "--n", "22", "--seed", "1"])), EXIT_RESOURCE);
        assert_eq!(run(os(&["entscale", "frobnicate"])), EXIT_INVALID);
    }
}
