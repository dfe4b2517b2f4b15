//! Command-line front end. `run` does the work and returns the JSON to
//! print plus an exit status, so it can be driven from tests.

pub mod search;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::machines::{MachineConfig, PmhLevel};
use crate::matmul::fattree::fat_tree_recursive;
use crate::matmul::hex::hex_systolic;
use crate::matmul::pmh::pmh_space_bounded;
use crate::matmul::torus::{cannon, cannon_blocked};
use crate::matmul::twofive::schedule_2_5d;
use crate::matmul::{ScheduleBundle, FORMAT};
use crate::simulate::{compare_cost, verify, CostReport};

use search::{Family, DEFAULT_SEARCH_LIMIT};

pub const EXIT_CLEAN: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_VIOLATIONS: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_CAP: i32 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "equisched",
    version,
    about = "Synthesize, verify and compare matrix multiplication schedules"
)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build a preset schedule and verify it.
    Preset(PresetArgs),
    /// Sweep homomorphisms for a small machine and rank the schedules.
    Search(SearchArgs),
    /// Replay a bundle file.
    Verify(VerifyArgs),
    /// Summarize a report file, or compare it with another.
    Report(ReportArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    Cannon,
    CannonBlocked,
    #[value(name = "2.5d")]
    TwoFive,
    FatTree,
    Pmh,
    Hex,
}

#[derive(Args, Debug)]
pub struct PresetArgs {
    pub name: Preset,
    /// Torus side, or hex problem size.
    #[arg(long)]
    pub q: Option<usize>,
    /// Matrix side for square blocked presets.
    #[arg(long)]
    pub n: Option<usize>,
    /// Instance dims `l,m,n` for blocked Cannon.
    #[arg(long, value_delimiter = ',', num_args = 3)]
    pub dims: Option<Vec<usize>>,
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long)]
    pub c: Option<usize>,
    /// Fat-tree recursion depth.
    #[arg(long)]
    pub d: Option<usize>,
    /// Words per node, where the preset lets it vary.
    #[arg(long)]
    pub memory: Option<u64>,
    /// Hierarchy levels, innermost first, as `memory:fanout` pairs.
    #[arg(long, value_delimiter = ',')]
    pub levels: Option<Vec<String>>,
    /// Hex anchor as `a,b`.
    #[arg(long, value_delimiter = ',', num_args = 2, allow_negative_numbers = true)]
    pub anchor: Option<Vec<i64>>,
    #[arg(long)]
    pub window: Option<u64>,
    /// Write the bundle here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the report here.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SearchArgs {
    #[arg(value_enum)]
    pub family: Family,
    #[arg(long, default_value_t = 3)]
    pub q: usize,
    /// Most candidates to verify.
    #[arg(long, default_value_t = DEFAULT_SEARCH_LIMIT)]
    pub limit: usize,
    /// Keep only the best `top` candidates in the output.
    #[arg(long)]
    pub top: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    pub bundle: PathBuf,
    /// Replay on this machine instead of the bundle's own.
    #[arg(long)]
    pub machine: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    pub report: PathBuf,
    #[arg(long)]
    pub against: Option<PathBuf>,
}

/// What a command printed and how it should exit.
#[derive(Debug)]
pub struct Outcome {
    pub stdout: String,
    pub code: i32,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::ParameterInfeasible(_)
        | Error::ConditionViolated(_)
        | Error::InvalidHierarchy(_)
        | Error::WindowOverflow(_)
        | Error::NotPrime(_) => EXIT_INFEASIBLE,
        Error::CapExceeded { .. } | Error::OracleCapExceeded { .. } => EXIT_CAP,
        _ => EXIT_ERROR,
    }
}

fn json<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string_pretty(v).map_err(|e| Error::Parse(e.to_string()))
}

fn write(path: &Path, s: &str) -> Result<()> {
    std::fs::write(path, s).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn need<T: Copy>(v: Option<T>, flag: &str) -> Result<T> {
    v.ok_or_else(|| Error::Parse(format!("--{flag} is required for this preset")))
}

fn parse_levels(raw: &[String]) -> Result<Vec<PmhLevel>> {
    raw.iter()
        .map(|s| {
            let (m, f) = s
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("level `{s}` is not memory:fanout")))?;
            let num = |x: &str| x.trim().parse::<u64>().map_err(|e| Error::Parse(format!("`{x}`: {e}")));
            Ok(PmhLevel {
                memory: num(m)?,
                fanout: num(f)?,
            })
        })
        .collect()
}

pub fn build_preset(a: &PresetArgs) -> Result<ScheduleBundle> {
    match a.name {
        Preset::Cannon => Ok(cannon(need(a.q, "q")?)),
        Preset::CannonBlocked => {
            let q = need(a.q, "q")?;
            let (l, m, n) = match (&a.dims, a.n) {
                (Some(d), _) => (d[0], d[1], d[2]),
                (None, Some(n)) => (n, n, n),
                _ => return Err(Error::Parse("--n or --dims is required for this preset".into())),
            };
            let (bl, bm, bn) = (l / q.max(1), m / q.max(1), n / q.max(1));
            let mem = a.memory.unwrap_or((bl * bm + bm * bn + bl * bn) as u64);
            cannon_blocked(l, m, n, q, mem)
        }
        Preset::TwoFive => schedule_2_5d(need(a.n, "n")?, need(a.p, "p")?, need(a.c, "c")?),
        Preset::FatTree => fat_tree_recursive(need(a.d, "d")?),
        Preset::Pmh => {
            let raw = a
                .levels
                .as_ref()
                .ok_or_else(|| Error::Parse("--levels is required for this preset".into()))?;
            pmh_space_bounded(&parse_levels(raw)?)
        }
        Preset::Hex => hex_systolic(need(a.q, "q")?, a.anchor.as_ref().map(|v| (v[0], v[1])), a.window),
    }
}

fn status(r: &CostReport) -> i32 {
    if r.violations.is_empty() {
        EXIT_CLEAN
    } else {
        EXIT_VIOLATIONS
    }
}

fn cmd_preset(a: &PresetArgs) -> Result<Outcome> {
    let b = build_preset(a)?;
    let r = verify(&b, &b.machine.build()?)?;
    let rj = r.to_json()?;
    if let Some(p) = &a.report {
        write(p, &rj)?;
    }
    let stdout = match &a.out {
        Some(p) => {
            write(p, &b.to_json()?)?;
            rj
        }
        None => json(&serde_json::json!({ "format": FORMAT, "bundle": b, "report": r }))?,
    };
    Ok(Outcome {
        stdout,
        code: status(&r),
    })
}

fn cmd_search(a: &SearchArgs) -> Result<Outcome> {
    let mut res = search::search(a.family, a.q, a.limit)?;
    if let Some(top) = a.top {
        res.ranked.truncate(top);
    }
    let s = json(&res)?;
    if let Some(p) = &a.out {
        write(p, &s)?;
    }
    let code = if res.truncated { EXIT_CAP } else { EXIT_CLEAN };
    Ok(Outcome { stdout: s, code })
}

fn cmd_verify(a: &VerifyArgs) -> Result<Outcome> {
    let b = ScheduleBundle::from_json(&read(&a.bundle)?)?;
    let machine = match &a.machine {
        Some(p) => MachineConfig::load(p)?,
        None => b.machine.clone(),
    };
    let r = verify(&b, &machine.build()?)?;
    let s = r.to_json()?;
    if let Some(p) = &a.out {
        write(p, &s)?;
    }
    Ok(Outcome {
        stdout: s,
        code: status(&r),
    })
}

#[derive(Serialize)]
struct Summary<'a> {
    format: u32,
    violations: usize,
    total: u64,
    weighted_total: u64,
    makespan: u64,
    max_node_sent: u64,
    traffic: &'a crate::machines::Traffic,
}

fn cmd_report(a: &ReportArgs) -> Result<Outcome> {
    let r = CostReport::from_json(&read(&a.report)?)?;
    let stdout = match &a.against {
        Some(p) => {
            let other = CostReport::from_json(&read(p)?)?;
            json(&compare_cost(&r, &other)?)?
        }
        None => json(&Summary {
            format: FORMAT,
            violations: r.violations.len(),
            total: r.total_traffic(),
            weighted_total: r.weighted_total,
            makespan: r.makespan,
            max_node_sent: r.max_node_sent,
            traffic: &r.traffic,
        })?,
    };
    Ok(Outcome {
        stdout,
        code: status(&r),
    })
}

pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    match &cfg.command {
        Command::Preset(a) => cmd_preset(a),
        Command::Search(a) => cmd_search(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Report(a) => cmd_report(a),
    }
}
