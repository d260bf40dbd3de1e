//! Command-line front end.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::classical::{gandhi_next_prime, golomb_trefeu_next_prime};
use crate::error::{Error, Result};
use crate::mod4::predict_mod4;
use crate::oracle;
use crate::precision::PrecisionPolicy;
use crate::recurrence::{generate_chain, ExponentPolicy, PrimeChain};
use crate::scan::{self, scan_range};
use crate::verify;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_PRECISION: i32 = 3;
pub const EXIT_MISMATCH: i32 = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "primerec", version, about = "Certified prime recurrences and their classical relatives")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub settings: Settings,
}

#[derive(Clone, Debug, Args)]
pub struct Settings {
    /// Exponent rule: proven (s = 2 p_n), conjectural (s = p_n) or fixed=<s>.
    #[arg(long, global = true, default_value = "proven")]
    pub mode: ExponentPolicy,

    #[arg(long, global = true, default_value_t = 128)]
    pub base_bits: u32,

    #[arg(long, global = true, default_value_t = 64)]
    pub guard_bits: u32,

    #[arg(long, global = true, default_value_t = 8)]
    pub max_escalations: u32,

    /// Bisection tolerance for the minimal-exponent scan.
    #[arg(long, global = true, default_value_t = scan::DEFAULT_TOL)]
    pub tol: f64,

    /// Bases for the Golomb-Trefeu formula, comma separated.
    #[arg(long, global = true, value_delimiter = ',', default_value = "2")]
    pub base: Vec<u64>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Write the table here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate primes with the effective recurrence and compare with a sieve.
    Chain {
        #[arg(long)]
        count: usize,
    },
    /// Minimal sufficient exponent s_n for each n.
    Scan {
        #[arg(long, default_value_t = 1)]
        min_n: usize,
        #[arg(long)]
        max_n: usize,
        /// Also write a gnuplot script for the ratio plot.
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Predict p_{n+1} mod 4.
    Mod4 {
        #[arg(long, default_value_t = 1)]
        min_n: usize,
        #[arg(long)]
        max_n: usize,
    },
    /// Gandhi's formula.
    Gandhi {
        #[arg(long, default_value_t = 1)]
        min_n: usize,
        #[arg(long)]
        max_n: usize,
    },
    /// The Golomb-Trefeu formula in each requested base.
    Trefeu {
        #[arg(long, default_value_t = 1)]
        min_n: usize,
        #[arg(long)]
        max_n: usize,
    },
    /// Run every acceptance check and print one line each.
    Verify,
}

impl Settings {
    pub fn policy(&self) -> Result<PrecisionPolicy> {
        PrecisionPolicy::new(self.base_bits, self.guard_bits, 2.0, self.max_escalations)
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidArgument(format!("--tol must be positive, got {}", self.tol)));
        }
        if self.base.is_empty() || self.base.iter().any(|&b| b < 2) {
            return Err(Error::InvalidArgument(format!("--base values must be at least 2, got {:?}", self.base)));
        }
        Ok(())
    }

    /// Conjectural and fixed exponents are exploratory: mismatches are reported, not failed.
    fn report_only(&self) -> bool {
        self.mode != ExponentPolicy::Proven
    }
}

fn check_range(min_n: usize, max_n: usize) -> Result<()> {
    if min_n == 0 || max_n < min_n {
        return Err(Error::InvalidArgument(format!("need 1 <= --min-n <= --max-n, got {min_n} and {max_n}")));
    }
    Ok(())
}

fn open_output(out: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Exit code for an error that escaped a command.
pub fn exit_code_for(err: &Error) -> i32 {
    match err.root_cause() {
        Error::InvalidArgument(_) => EXIT_USAGE,
        Error::PrecisionExhausted { .. } | Error::Indeterminate { .. } | Error::EnclosureTooWide { .. } => {
            EXIT_PRECISION
        }
        Error::FormulaViolated(_) => EXIT_MISMATCH,
        _ => EXIT_FAILURE,
    }
}

/// Table rows plus an exit status.
struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
    status: i32,
}

impl Table {
    fn write(&self, format: Format, out: &mut dyn Write) -> io::Result<()> {
        match format {
            Format::Csv => {
                writeln!(out, "{}", self.header.join(","))?;
                for row in &self.rows {
                    writeln!(out, "{}", row.join(","))?;
                }
            }
            Format::Json => {
                let items: Vec<serde_json::Value> = self
                    .rows
                    .iter()
                    .map(|row| {
                        let obj = self
                            .header
                            .iter()
                            .zip(row)
                            .map(|(k, v)| (k.to_string(), cell_json(v)))
                            .collect::<serde_json::Map<_, _>>();
                        serde_json::Value::Object(obj)
                    })
                    .collect();
                serde_json::to_writer_pretty(&mut *out, &items)?;
                writeln!(out)?;
            }
        }
        out.flush()
    }
}

fn cell_json(cell: &str) -> serde_json::Value {
    match cell {
        "" => serde_json::Value::Null,
        "true" => json!(true),
        "false" => json!(false),
        _ => cell
            .parse::<u64>()
            .map(|v| json!(v))
            .or_else(|_| cell.parse::<f64>().map(|v| json!(v)))
            .unwrap_or_else(|_| json!(cell)),
    }
}

fn cmd_chain(settings: &Settings, count: usize) -> Result<Table> {
    let policy = settings.policy()?;
    let chain = generate_chain(count, &settings.mode, &policy)?;
    let truth = oracle::sieve_primes(count);
    let mut rows = Vec::with_capacity(count);
    let mut mismatches = 0;
    for (i, &p) in chain.primes().iter().enumerate() {
        let ok = truth.get(i) == Some(&p);
        mismatches += usize::from(!ok);
        let mut row = vec![(i + 1).to_string(), p.to_string()];
        match i.checked_sub(1).and_then(|j| chain.steps().get(j)) {
            Some(m) => row.extend([
                scan::sig9(m.exponent),
                m.bits.to_string(),
                format!("{:.3e}", m.width),
                m.escalations.to_string(),
            ]),
            None => row.extend(std::iter::repeat_n(String::new(), 4)),
        }
        row.push(ok.to_string());
        rows.push(row);
    }
    eprintln!("chain: {count} primes in {} mode, {mismatches} oracle mismatches", settings.mode);
    let status = if mismatches > 0 && !settings.report_only() { EXIT_MISMATCH } else { EXIT_OK };
    Ok(Table { header: vec!["n", "p_n", "s", "bits", "width", "escalations", "oracle_match"], rows, status })
}

fn cmd_scan(settings: &Settings, min_n: usize, max_n: usize, plot: Option<&Path>) -> Result<i32> {
    check_range(min_n, max_n)?;
    let policy = settings.policy()?;
    let chain = PrimeChain::from_oracle(max_n + 1);
    let records = scan_range(&chain, min_n, max_n, settings.tol, &policy)?;
    let mut out = open_output(settings.out.as_deref()).map_err(io_error)?;
    match settings.format {
        Format::Csv => scan::write_csv(&records, &mut out),
        Format::Json => serde_json::to_writer_pretty(&mut out, &scan::to_json(&records))
            .map_err(io::Error::from)
            .and_then(|_| writeln!(out)),
    }
    .and_then(|_| out.flush())
    .map_err(io_error)?;
    if let Some(path) = plot {
        let data = settings.out.as_deref().map(|p| p.display().to_string()).unwrap_or_else(|| "scan.csv".into());
        std::fs::write(path, scan::gnuplot_script(&data)).map_err(io_error)?;
    }
    let worst = records.iter().max_by(|a, b| a.ratio.total_cmp(&b.ratio));
    let over_two: Vec<usize> = records.iter().filter(|r| r.ratio > 2.0).map(|r| r.n).collect();
    let over_one: Vec<usize> = records.iter().filter(|r| r.ratio > 1.0).map(|r| r.n).collect();
    if let Some(w) = worst {
        eprintln!("scan: max s_n/p_n = {} at n = {}", scan::sig9(w.ratio), w.n);
    }
    if over_one.is_empty() {
        eprintln!("scan: s_n <= p_n holds for every n scanned");
    } else {
        eprintln!("scan: s_n > p_n at n = {over_one:?}");
    }
    if !over_two.is_empty() {
        eprintln!("scan: s_n > 2 p_n at n = {over_two:?}");
        return Ok(EXIT_MISMATCH);
    }
    Ok(EXIT_OK)
}

fn cmd_mod4(settings: &Settings, min_n: usize, max_n: usize) -> Result<Table> {
    check_range(min_n, max_n)?;
    let policy = settings.policy()?;
    let chain = PrimeChain::from_oracle(max_n);
    let mut rows = Vec::new();
    let (mut wrong, mut undecided) = (0, 0);
    for n in min_n..=max_n {
        let pred = predict_mod4(&chain, n, &settings.mode, &policy).map_err(|e| e.at_step(n))?;
        let ok = pred.matches();
        match pred.predicted.as_u64() {
            None => undecided += 1,
            Some(_) if !ok => wrong += 1,
            _ => {}
        }
        rows.push(vec![
            n.to_string(),
            pred.p_n.to_string(),
            pred.p_next.to_string(),
            pred.predicted.to_string(),
            pred.actual.to_string(),
            ok.to_string(),
        ]);
    }
    eprintln!(
        "mod4: {}/{} matches, {wrong} wrong, {undecided} indeterminate",
        rows.len() - wrong - undecided,
        rows.len()
    );
    // an indeterminate prediction is reported but is not a mismatch
    let status = if wrong > 0 && !settings.report_only() { EXIT_MISMATCH } else { EXIT_OK };
    Ok(Table { header: vec!["n", "p_n", "p_next", "predicted", "actual", "match"], rows, status })
}

fn cmd_gandhi(settings: &Settings, min_n: usize, max_n: usize) -> Result<Table> {
    check_range(min_n, max_n)?;
    let policy = settings.policy()?;
    let chain = PrimeChain::from_oracle(max_n + 1);
    let mut rows = Vec::new();
    let mut wrong = 0;
    for n in min_n..=max_n {
        let step = gandhi_next_prime(&chain, n, &policy).map_err(|e| e.at_step(n))?;
        let expected = chain.p(n + 1).unwrap();
        let ok = step.prime == expected;
        wrong += usize::from(!ok);
        let (lo, hi) = match &step.window {
            Some(w) => (w.lower().to_f64().to_string(), w.upper().to_f64().to_string()),
            None => (String::new(), String::new()),
        };
        rows.push(vec![
            n.to_string(),
            chain.p(n).unwrap().to_string(),
            expected.to_string(),
            step.prime.to_string(),
            lo,
            hi,
            step.bits.to_string(),
            ok.to_string(),
        ]);
    }
    eprintln!("gandhi: {}/{} match the oracle", rows.len() - wrong, rows.len());
    let status = if wrong > 0 { EXIT_MISMATCH } else { EXIT_OK };
    Ok(Table {
        header: vec!["n", "p_n", "p_next", "computed", "window_lo", "window_hi", "bits", "match"],
        rows,
        status,
    })
}

fn cmd_trefeu(settings: &Settings, min_n: usize, max_n: usize) -> Result<Table> {
    check_range(min_n, max_n)?;
    let policy = settings.policy()?;
    let chain = PrimeChain::from_oracle(max_n + 1);
    let mut rows = Vec::new();
    let mut wrong = 0;
    for &base in &settings.base {
        for n in min_n..=max_n {
            let step = golomb_trefeu_next_prime(&chain, n, base, &policy).map_err(|e| e.at_step(n))?;
            let expected = chain.p(n + 1).unwrap();
            let ok = step.prime == expected;
            wrong += usize::from(!ok);
            rows.push(vec![
                base.to_string(),
                n.to_string(),
                chain.p(n).unwrap().to_string(),
                expected.to_string(),
                step.prime.to_string(),
                step.bits.to_string(),
                ok.to_string(),
            ]);
        }
    }
    eprintln!("trefeu: {}/{} match the oracle", rows.len() - wrong, rows.len());
    let status = if wrong > 0 { EXIT_MISMATCH } else { EXIT_OK };
    Ok(Table { header: vec!["base", "n", "p_n", "p_next", "computed", "bits", "match"], rows, status })
}

fn cmd_verify(settings: &Settings) -> Result<i32> {
    let outcomes = verify::run_all(&settings.policy()?);
    let mut out = open_output(settings.out.as_deref()).map_err(io_error)?;
    for o in &outcomes {
        writeln!(out, "{}", o.line()).map_err(io_error)?;
    }
    out.flush().map_err(io_error)?;
    Ok(if outcomes.iter().all(|o| o.passed) { EXIT_OK } else { EXIT_MISMATCH })
}

fn io_error(e: io::Error) -> Error {
    Error::InvalidArgument(format!("output: {e}"))
}

fn emit(settings: &Settings, table: Table) -> Result<i32> {
    let mut out = open_output(settings.out.as_deref()).map_err(io_error)?;
    table.write(settings.format, &mut out).map_err(io_error)?;
    Ok(table.status)
}

/// Runs a parsed command line and returns the process exit code.
pub fn execute(cli: &Cli) -> i32 {
    let settings = &cli.settings;
    let result = settings.validate().and_then(|_| match &cli.command {
        Command::Chain { count } => cmd_chain(settings, *count).and_then(|t| emit(settings, t)),
        Command::Scan { min_n, max_n, plot } => cmd_scan(settings, *min_n, *max_n, plot.as_deref()),
        Command::Mod4 { min_n, max_n } => cmd_mod4(settings, *min_n, *max_n).and_then(|t| emit(settings, t)),
        Command::Gandhi { min_n, max_n } => cmd_gandhi(settings, *min_n, *max_n).and_then(|t| emit(settings, t)),
        Command::Trefeu { min_n, max_n } => cmd_trefeu(settings, *min_n, *max_n).and_then(|t| emit(settings, t)),
        Command::Verify => cmd_verify(settings),
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

/// Parses `std::env::args` and runs; clap usage errors exit with code 2.
pub fn main_entry() -> i32 {
    match Cli::try_parse() {
        Ok(cli) => execute(&cli),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            code
        }
    }
}
