//! The minimal effective exponent `s_n`: the point past which
//! `h(s) > p_{n+1} - 1`, so that `ceil(h(s)) = p_{n+1}`.
//!
//! Where the direct sum converges quickly `h` is evaluated through it,
//! since it has no cancellation and needs only modest relative precision.
//! Closer to `s = 1` the product form takes over. Signs are only trusted
//! when the enclosure is strictly separated from the threshold.

use std::cmp::Ordering;
use std::io::{self, Write};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::precision::{BallReal, PrecisionPolicy};
use crate::recurrence::{h_of_s, h_of_s_direct, PrimeChain};

/// Lowest exponent examined; `D_n(s)` blows up as `s -> 1`.
pub const GRID_START: f64 = 1.1;

/// Default grid step as a fraction of `p_n`.
pub const DEFAULT_GRID_FRACTION: f64 = 0.05;

pub const DEFAULT_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanRecord {
    pub n: usize,
    pub p_n: u64,
    pub p_next: u64,
    pub s_n: f64,
    pub ratio: f64,
    /// Sign changes of `h(s) - (p_next - 1)` seen on the grid.
    pub crossings_checked: usize,
}

/// Where `h(s)` sits relative to `p_{n+1} - 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// `h(s) <= p_{n+1} - 1`: the ceiling is not yet `p_{n+1}`.
    Below,
    /// `h(s) > p_{n+1} - 1`.
    Above,
}

/// Direct-sum cutoff whose tail is below `2^(-bits)` relative to `(2 p_n)^(-s)`,
/// never below `2 p_n`.
fn adaptive_cutoff(s: f64, bits: u32, p_n: u64) -> u64 {
    let floor = 2 * p_n;
    let log2_c = (bits as f64 + s * (floor as f64).log2() - (s - 1.0).log2()) / (s - 1.0);
    let c = if log2_c.is_finite() && log2_c < 62.0 { log2_c.exp2().ceil() as u64 } else { u64::MAX };
    c.max(floor)
}

/// Largest direct-sum cutoff tried before switching to the product form.
fn direct_cap(p_n: u64) -> u64 {
    (64 * p_n).max(4096)
}

/// Certified side of the threshold at `s`, escalating precision.
///
/// Uses the direct sum at modest relative precision when its cutoff is
/// small, and the product form at cancellation-aware precision otherwise.
pub fn classify(chain: &PrimeChain, n: usize, s: f64, policy: &PrecisionPolicy) -> Result<Option<Side>> {
    let p_n = chain.p(n).ok_or_else(|| Error::InvalidArgument(format!("chain lacks p_{n}")))?;
    let p_next = chain.p(n + 1).ok_or_else(|| Error::InvalidArgument(format!("chain lacks p_{}", n + 1)))?;
    let threshold = (p_next - 1) as i64;
    for (_, bits) in policy.schedule(policy.base_bits) {
        let cutoff = adaptive_cutoff(s, bits, p_n);
        let h = if cutoff <= direct_cap(p_n) {
            h_of_s_direct(chain, n, &BallReal::from_f64(s, bits.max(64))?, cutoff, bits)
        } else {
            let full = policy.bits_for(s, p_n) + (bits - policy.base_bits);
            h_of_s(chain, n, &BallReal::from_f64(s, full.max(64))?, full)
        };
        match h {
            Ok(h) => match h.cmp_int(threshold) {
                Some(Ordering::Greater) => return Ok(Some(Side::Above)),
                Some(Ordering::Less | Ordering::Equal) => return Ok(Some(Side::Below)),
                None => {}
            },
            Err(Error::Domain { .. }) => {}
            Err(other) => return Err(other),
        }
    }
    Ok(None)
}

fn classify_strict(chain: &PrimeChain, n: usize, s: f64, policy: &PrecisionPolicy) -> Result<Side> {
    classify(chain, n, s, policy)?.ok_or(Error::EnclosureTooWide { n, s })
}

/// `s_n` to within `tol`, bracketed on a grid of step `grid_step` over
/// `[1.1, 2 p_n]` and refined by bisection. `chain` must hold `p_{n+1}`.
///
/// The bracket is the last below-to-above sign change on the grid, so the
/// result is the point past which `h` stays above the threshold on the grid.
pub fn minimal_exponent(
    chain: &PrimeChain,
    n: usize,
    tol: f64,
    grid_step: f64,
    policy: &PrecisionPolicy,
) -> Result<ScanRecord> {
    if !(tol > 0.0) || !(grid_step > 0.0) {
        return Err(Error::InvalidArgument(format!("tol ({tol}) and grid step ({grid_step}) must be positive")));
    }
    let p_n = chain.p(n).ok_or_else(|| Error::InvalidArgument(format!("chain lacks p_{n}")))?;
    let p_next = chain
        .p(n + 1)
        .ok_or_else(|| Error::InvalidArgument(format!("scan of n = {n} needs p_{} in the chain", n + 1)))?;
    let top = 2.0 * p_n as f64;

    let mut grid = Vec::new();
    let mut i = 0u32;
    loop {
        let s = GRID_START + i as f64 * grid_step;
        if s >= top {
            break;
        }
        grid.push(s);
        i += 1;
    }
    grid.push(top);

    let sides = grid
        .iter()
        .map(|&s| classify_strict(chain, n, s, policy))
        .collect::<Result<Vec<_>>>()?;
    let crossings_checked = sides.windows(2).filter(|w| w[0] != w[1]).count();
    if sides.last() != Some(&Side::Above) {
        return Err(Error::NoCrossing { n, detail: format!("h(2 p_n) is not above {}", p_next - 1) });
    }
    let Some(last_below) = sides.iter().rposition(|&side| side == Side::Below) else {
        return Err(Error::NoCrossing { n, detail: format!("h is above {} on the whole grid", p_next - 1) });
    };

    let (mut lo, mut hi) = (grid[last_below], grid[last_below + 1]);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        match classify_strict(chain, n, mid, policy)? {
            Side::Below => lo = mid,
            Side::Above => hi = mid,
        }
    }
    let s_n = 0.5 * (lo + hi);
    let record = ScanRecord { n, p_n, p_next, s_n, ratio: s_n / p_n as f64, crossings_checked };
    if !bracket_certified(chain, &record, tol, policy)? {
        return Err(Error::NoCrossing {
            n,
            detail: format!("bracketing certificate failed around s = {s_n}"),
        });
    }
    Ok(record)
}

/// Re-evaluates `h` at `s_n - tol` (must be below) and `s_n + tol` (must be above).
pub fn bracket_certified(chain: &PrimeChain, record: &ScanRecord, tol: f64, policy: &PrecisionPolicy) -> Result<bool> {
    let below = classify(chain, record.n, record.s_n - tol, policy)?;
    let above = classify(chain, record.n, record.s_n + tol, policy)?;
    Ok(below == Some(Side::Below) && above == Some(Side::Above))
}

/// One record per `n` in `n_min..=n_max`, computed in parallel, in index order.
pub fn scan_range(
    chain: &PrimeChain,
    n_min: usize,
    n_max: usize,
    tol: f64,
    policy: &PrecisionPolicy,
) -> Result<Vec<ScanRecord>> {
    if n_min == 0 || n_min > n_max {
        return Err(Error::InvalidArgument(format!("bad scan range {n_min}..={n_max}")));
    }
    if chain.len() <= n_max {
        return Err(Error::InvalidArgument(format!(
            "scan up to n = {n_max} needs {} primes, chain has {}",
            n_max + 1,
            chain.len()
        )));
    }
    (n_min..=n_max)
        .into_par_iter()
        .map(|n| {
            let step = DEFAULT_GRID_FRACTION * chain.p(n).unwrap() as f64;
            minimal_exponent(chain, n, tol, step, policy).map_err(|e| e.at_step(n))
        })
        .collect()
}

/// `value` with 9 significant digits in plain decimal notation.
pub fn sig9(value: f64) -> String {
    if value == 0.0 || !value.is_finite() {
        return format!("{value}");
    }
    let magnitude = value.abs().log10().floor() as i32;
    let decimals = (8 - magnitude).max(0) as usize;
    format!("{value:.decimals$}")
}

pub const CSV_HEADER: &str = "n,p_n,p_next,s_n,ratio";

pub fn write_csv<W: Write>(records: &[ScanRecord], mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(out, "{},{},{},{},{}", r.n, r.p_n, r.p_next, sig9(r.s_n), sig9(r.ratio))?;
    }
    Ok(())
}

/// JSON array with the CSV's field names.
pub fn to_json(records: &[ScanRecord]) -> serde_json::Value {
    serde_json::Value::Array(
        records
            .iter()
            .map(|r| {
                serde_json::json!({
                    "n": r.n,
                    "p_n": r.p_n,
                    "p_next": r.p_next,
                    "s_n": r.s_n,
                    "ratio": r.ratio,
                })
            })
            .collect(),
    )
}

/// A gnuplot script plotting `ratio` against `n` from a scan CSV.
pub fn gnuplot_script(csv_path: &str) -> String {
    format!(
        "set datafile separator ','\n\
         set key autotitle columnhead\n\
         set xlabel 'n'\n\
         set ylabel 's_n / p_n'\n\
         set yrange [0:1.1]\n\
         set grid\n\
         plot '{csv_path}' using 1:5 with linespoints pt 7 ps 0.6 title 's_n / p_n', \
         1 with lines dt 2 title 'conjectured bound'\n"
    )
}
