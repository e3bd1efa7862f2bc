//! `coarse`: build block families, compute witness optima, and profile
//! coarse amenability at infinity.
//!
//! Exit codes: 0 success, 1 usage error, 2 mathematical rejection,
//! 3 I/O or format error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use serde::Deserialize;

use coarse_core::cover::{tree_lift, tree_ray_witness};
use coarse_core::folner::{folner_deficiency, folner_witness, FolnerSet};
use coarse_core::graph::{build_graph, girth, CageName, Graph, GraphSpec};
use coarse_core::group::{cayley_graph, make_group, GroupSpec};
use coarse_core::lp::{rat, Mode, Rat};
use coarse_core::metric::{
    ball, coarse_disjoint_union, single_block, CoarseUnion, PointId, SpaceJson,
};
use coarse_core::profile::{duplicate_family, smin_profile_with};
use coarse_core::quotient::{box_space, free_target_from_spec, BoxSpaceParams, FamilyJson, SourceGroup};
use coarse_core::report::{emit_report, rows_from_csv, rows_to_csv, ReportConfig};
use coarse_core::witness::{
    check_witness, eps_star_with, SupportMode, WitnessFamily, DEFAULT_VAR_BOUND,
};
use coarse_core::{Error, Result};

#[derive(Parser)]
#[command(name = "coarse", version, about = "Coarse-amenability-at-infinity profiler")]
struct Cli {
    /// Optional JSON config file with defaults (mode, jobs).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build, inspect, or export a coarse disjoint union of graph blocks.
    Space {
        #[command(subcommand)]
        cmd: SpaceCmd,
    },
    /// Build a box-space family from a quotient tower.
    Box {
        #[command(subcommand)]
        cmd: BoxCmd,
    },
    /// Optimal witness tolerance eps*(C; R, S) for one ball-subset.
    Epsstar(EpsstarArgs),
    /// Project a Folner box through a cyclic quotient into a witness family.
    Folner(FolnerArgs),
    /// Tree-ray witness on a truncated universal cover.
    Treewitness(TreewitnessArgs),
    /// S_min profile of a family over scales L.
    Profile(ProfileArgs),
    /// Diagonal duplication of a family's blocks.
    Duplicate(DuplicateArgs),
    /// Re-emit a profile CSV as JSON and/or SVG.
    Report(ReportArgs),
}

#[derive(Subcommand)]
enum SpaceCmd {
    /// Build from a comma-separated block list, e.g. `cycle:8,cage:petersen`.
    Build {
        #[arg(long)]
        spec: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Print each block's girth.
    Girth {
        #[arg(long)]
        space: PathBuf,
    },
    /// Export to Graphviz DOT.
    Export {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        dot: PathBuf,
    },
}

#[derive(Subcommand)]
enum BoxCmd {
    Build {
        /// Source group: `zd:<d>` or `free:<k>`.
        #[arg(long)]
        source: String,
        /// For a zd source: comma-separated torus moduli, one per level.
        #[arg(long)]
        moduli: Option<String>,
        /// For a free source: comma-separated finite targets, e.g. `sl2:3,sl2:5`.
        #[arg(long)]
        targets: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct EpsstarArgs {
    #[arg(long)]
    family: PathBuf,
    #[arg(long)]
    block: usize,
    #[arg(long, default_value_t = 0)]
    center: usize,
    /// Ball radius L of the subset C = B_center(L).
    #[arg(long)]
    radius: u32,
    #[arg(long = "R")]
    r: u32,
    #[arg(long = "S")]
    s: u32,
    #[arg(long)]
    mode: Option<String>,
    /// Require supports inside C itself rather than ambient balls.
    #[arg(long)]
    intrinsic: bool,
    /// Write the optimal witness family here.
    #[arg(long)]
    witness: Option<PathBuf>,
}

#[derive(Args)]
struct FolnerArgs {
    /// Cyclic quotient Z -> Z/m.
    #[arg(long)]
    modulus: u64,
    /// Side length of the Folner window [0, k).
    #[arg(long)]
    window: u64,
    #[arg(long = "R")]
    r: u32,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TreewitnessArgs {
    /// Base block, e.g. `cycle:6` or `cage:petersen` (min degree 2).
    #[arg(long)]
    spec: String,
    /// Ray segment length; yields R=1, S=n-1, tolerance 2/n.
    #[arg(long)]
    n: u32,
    /// Truncation depth of the cover (default 2n).
    #[arg(long)]
    rho: Option<u32>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ProfileArgs {
    #[arg(long)]
    family: PathBuf,
    #[arg(long = "R")]
    r: u32,
    /// Tolerance, rational (`1/2`) or decimal (`0.5`).
    #[arg(long)]
    eps: String,
    /// Comma-separated scales, e.g. `2,4,6`.
    #[arg(long = "L")]
    l: String,
    /// CSV output path.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    jobs: Option<usize>,
    /// Record wall-clock runtime_ms per row (off by default so that the
    /// output is byte-reproducible).
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct DuplicateArgs {
    #[arg(long)]
    family: PathBuf,
    #[arg(long)]
    copies: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    csv: PathBuf,
    #[arg(long)]
    svg: Option<PathBuf>,
    #[arg(long)]
    json: Option<PathBuf>,
}

/// Defaults loaded from `--config`; explicit flags win.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct Config {
    mode: Option<String>,
    jobs: Option<usize>,
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source: e,
    }
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| io_err(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

fn load_config(path: Option<&PathBuf>) -> Result<Config> {
    match path {
        None => Ok(Config::default()),
        Some(p) => serde_json::from_str(&read_text(p)?)
            .map_err(|e| Error::format(format!("config {}: {e}", p.display()))),
    }
}

fn resolve_mode(flag: Option<&str>, cfg: &Config) -> Result<Mode> {
    match flag.or(cfg.mode.as_deref()) {
        Some(s) => Mode::parse(s),
        None => Ok(Mode::Exact),
    }
}

/// `p/q`, an integer, or a finite decimal — all parsed exactly.
fn parse_rat(s: &str) -> Result<Rat> {
    let bad = || Error::invalid(format!("cannot parse {s:?} as a rational"));
    if let Some((p, q)) = s.split_once('/') {
        let num: BigInt = p.trim().parse().map_err(|_| bad())?;
        let den: BigInt = q.trim().parse().map_err(|_| bad())?;
        if den == BigInt::from(0) {
            return Err(bad());
        }
        return Ok(Rat::new(num, den));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let digits = format!("{int}{frac}");
        let num: BigInt = digits.parse().map_err(|_| bad())?;
        let den = BigInt::from(10u32).pow(frac.len() as u32);
        return Ok(Rat::new(num, den));
    }
    let num: BigInt = s.trim().parse().map_err(|_| bad())?;
    Ok(Rat::from_integer(num))
}

fn parse_u32_list(s: &str) -> Result<Vec<u32>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| Error::invalid(format!("bad number {t:?} in list")))
        })
        .collect()
}

/// `cycle:n`, `path:n`, `complete:n`, `cage:<name>`, or `cayley:<group>`.
fn parse_block_spec(s: &str) -> Result<Graph> {
    let (kind, arg) = s
        .split_once(':')
        .ok_or_else(|| Error::invalid(format!("bad block descriptor {s:?}")))?;
    let size = |a: &str| -> Result<usize> {
        a.parse()
            .map_err(|_| Error::invalid(format!("bad block size {a:?}")))
    };
    match kind {
        "cycle" => build_graph(&GraphSpec::Cycle(size(arg)?)),
        "path" => build_graph(&GraphSpec::Path(size(arg)?)),
        "complete" => build_graph(&GraphSpec::Complete(size(arg)?)),
        "cage" => {
            let name = CageName::parse(arg)
                .ok_or_else(|| Error::invalid(format!("unknown cage {arg:?}")))?;
            build_graph(&GraphSpec::Named(name))
        }
        "cayley" => cayley_graph(&make_group(&GroupSpec::parse(arg)?)?),
        _ => Err(Error::invalid(format!("unknown block kind {kind:?}"))),
    }
}

/// Reads a family file: either the box-space form (source + levels + space)
/// or a bare space. Returns the union and an id for report rows.
fn load_family(path: &Path) -> Result<(CoarseUnion, String)> {
    let text = read_text(path)?;
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "family".to_string());
    if let Ok(fam) = serde_json::from_str::<FamilyJson>(&text) {
        return Ok((CoarseUnion::from_json(&fam.space)?, id));
    }
    let space: SpaceJson = serde_json::from_str(&text)
        .map_err(|e| Error::format(format!("{}: not a family or space file: {e}", path.display())))?;
    Ok((CoarseUnion::from_json(&space)?, id))
}

fn write_space(path: &Path, space: &CoarseUnion) -> Result<()> {
    let text = serde_json::to_string_pretty(&space.to_json())
        .map_err(|e| Error::format(format!("space encode: {e}")))?;
    write_text(path, &text)
}

fn write_witness(path: &Path, w: &WitnessFamily) -> Result<()> {
    let text = serde_json::to_string_pretty(&w.to_json())
        .map_err(|e| Error::format(format!("witness encode: {e}")))?;
    write_text(path, &text)
}

fn parse_source(s: &str) -> Result<(SourceGroup, &str)> {
    let (kind, arg) = s
        .split_once(':')
        .ok_or_else(|| Error::invalid(format!("bad source descriptor {s:?}")))?;
    let n: usize = arg
        .parse()
        .map_err(|_| Error::invalid(format!("bad source rank {arg:?}")))?;
    match kind {
        "zd" => Ok((SourceGroup::Zd { d: n }, kind)),
        "free" => Ok((SourceGroup::Free { k: n }, kind)),
        _ => Err(Error::invalid(format!("unknown source kind {kind:?}"))),
    }
}

fn run(cli: Cli) -> Result<()> {
    let cfg = load_config(cli.config.as_ref())?;
    match cli.command {
        Command::Space { cmd } => match cmd {
            SpaceCmd::Build { spec, out, dot } => {
                let blocks: Result<Vec<Graph>> =
                    spec.split(',').map(|s| parse_block_spec(s.trim())).collect();
                let space = coarse_disjoint_union(blocks?)?;
                write_space(&out, &space)?;
                if let Some(d) = dot {
                    write_text(&d, &space.to_dot())?;
                }
                println!(
                    "built space: {} blocks, {} points",
                    space.block_count(),
                    space.point_count()
                );
            }
            SpaceCmd::Girth { space } => {
                let (space, _) = load_family(&space)?;
                for i in 0..space.block_count() {
                    let name = space
                        .block(i)
                        .label()
                        .map(str::to_string)
                        .unwrap_or_else(|| i.to_string());
                    println!("{name}: girth {}", girth(space.block(i)));
                }
            }
            SpaceCmd::Export { space, dot } => {
                let (space, _) = load_family(&space)?;
                write_text(&dot, &space.to_dot())?;
                println!("wrote {}", dot.display());
            }
        },
        Command::Box { cmd } => match cmd {
            BoxCmd::Build {
                source,
                moduli,
                targets,
                out,
            } => {
                let (src, kind) = parse_source(&source)?;
                let params = match (kind, moduli, targets) {
                    ("zd", Some(m), None) => {
                        let ms: Result<Vec<u64>> = m
                            .split(',')
                            .map(|t| {
                                t.trim().parse().map_err(|_| {
                                    Error::invalid(format!("bad modulus {t:?}"))
                                })
                            })
                            .collect();
                        BoxSpaceParams::ZdModuli(ms?)
                    }
                    ("free", None, Some(t)) => {
                        let SourceGroup::Free { k } = src else { unreachable!() };
                        let mut levels = Vec::new();
                        for item in t.split(',') {
                            let spec = GroupSpec::parse(item.trim())?;
                            levels.push(free_target_from_spec(&spec, k)?);
                        }
                        BoxSpaceParams::FreeTargets(levels)
                    }
                    ("zd", _, _) => {
                        return Err(Error::invalid("a zd source needs --moduli (and no --targets)"))
                    }
                    _ => return Err(Error::invalid(
                        "a free source needs --targets (and no --moduli)",
                    )),
                };
                let fam = box_space(src, &params)?;
                for w in &fam.warnings {
                    eprintln!("warning: {w}");
                }
                let text = serde_json::to_string_pretty(&fam.to_json())
                    .map_err(|e| Error::format(format!("family encode: {e}")))?;
                write_text(&out, &text)?;
                println!(
                    "built family: {} levels, nested: {}",
                    fam.maps.len(),
                    fam.nested
                );
            }
        },
        Command::Epsstar(a) => {
            let mode = resolve_mode(a.mode.as_deref(), &cfg)?;
            let (space, _) = load_family(&a.family)?;
            if a.block >= space.block_count() {
                return Err(Error::invalid(format!("no block {}", a.block)));
            }
            let c = ball(&space, PointId::new(a.block, a.center), a.radius)?;
            let support = if a.intrinsic {
                SupportMode::Intrinsic
            } else {
                SupportMode::Ambient
            };
            let res = eps_star_with(&c, a.r, a.s, mode, support, DEFAULT_VAR_BOUND)?;
            println!(
                "eps*(B_{}:{}({}); R={}, S={}) = {} ({:.6})  [{} points, {} vars, {} constraints, {} pivots]",
                a.block,
                a.center,
                a.radius,
                a.r,
                a.s,
                res.value,
                res.value_f64(),
                c.len(),
                res.num_vars,
                res.num_constraints,
                res.pivots
            );
            if let Some(p) = a.witness {
                let w = res
                    .witness
                    .as_ref()
                    .ok_or_else(|| Error::invalid("solver returned no witness family"))?;
                write_witness(&p, w)?;
            }
        }
        Command::Folner(a) => {
            if a.window == 0 || a.window > a.modulus {
                return Err(Error::invalid(
                    "window must satisfy 0 < window <= modulus",
                ));
            }
            let fam = box_space(
                SourceGroup::Zd { d: 1 },
                &BoxSpaceParams::ZdModuli(vec![a.modulus]),
            )?;
            let q = &fam.maps[0];
            let f = FolnerSet::new(vec![0], vec![a.window])?;
            let s = a.window as u32 - 1;
            let w = folner_witness(&f, q, 0, a.r, s)?;
            let space = single_block(q.block().clone())?;
            let eps = rat(2 * a.r as i64, a.window as i64);
            let report = check_witness(&space, &w, a.r, &eps, s);
            let def = folner_deficiency(&f, &[a.r as i64])?;
            println!(
                "Folner window {} in Z/{}: deficiency at shift R = {}, witness (R={}, S={}, eps={}) {}",
                a.window,
                a.modulus,
                def,
                a.r,
                s,
                eps,
                if report.passes() { "passes" } else { "FAILS" }
            );
            for v in &report.violations {
                println!("  violation: {v}");
            }
            if let Some(p) = a.out {
                write_witness(&p, &w)?;
            }
        }
        Command::Treewitness(a) => {
            if a.n == 0 {
                return Err(Error::invalid("segment length n must be positive"));
            }
            let g = parse_block_spec(&a.spec)?;
            let rho = a.rho.unwrap_or(2 * a.n);
            let t = tree_lift(&g, 0, rho)?;
            let w = tree_ray_witness(&t, a.n)?;
            let cover_space = single_block(t.as_graph()?)?;
            let eps = rat(2, a.n as i64);
            let report = check_witness(&cover_space, &w, 1, &eps, a.n - 1);
            println!(
                "cover of {} truncated at depth {}: {} vertices; ray witness (R=1, S={}, eps={}) on {} members {}",
                g.label().unwrap_or("block"),
                rho,
                t.vertex_count(),
                a.n - 1,
                eps,
                w.members.len(),
                if report.passes() { "passes" } else { "FAILS" }
            );
            for v in &report.violations {
                println!("  violation: {v}");
            }
            if let Some(p) = a.out {
                write_witness(&p, &w)?;
            }
        }
        Command::Profile(a) => {
            let mode = resolve_mode(a.mode.as_deref(), &cfg)?;
            let jobs = a.jobs.or(cfg.jobs).unwrap_or(0);
            let eps = parse_rat(&a.eps)?;
            let l_list = parse_u32_list(&a.l)?;
            let (family, id) = load_family(&a.family)?;
            let rows = smin_profile_with(&family, &id, a.r, &eps, &l_list, mode, jobs, a.timing)?;
            emit_report(
                &rows,
                &ReportConfig {
                    csv: Some(a.out.clone()),
                    json: a.json,
                    svg: a.svg,
                },
            )?;
            println!("wrote {} rows to {}", rows.len(), a.out.display());
        }
        Command::Duplicate(a) => {
            let (family, _) = load_family(&a.family)?;
            let dup = duplicate_family(&family, a.copies)?;
            write_space(&a.out, &dup)?;
            println!(
                "duplicated {} blocks x{} -> {} blocks",
                family.block_count(),
                a.copies,
                dup.block_count()
            );
        }
        Command::Report(a) => {
            let rows = rows_from_csv(&read_text(&a.csv)?)?;
            if a.svg.is_none() && a.json.is_none() {
                // default: echo canonical CSV to stdout
                print!("{}", rows_to_csv(&rows));
            } else {
                emit_report(
                    &rows,
                    &ReportConfig {
                        csv: None,
                        json: a.json,
                        svg: a.svg,
                    },
                )?;
                println!("re-emitted {} rows", rows.len());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // help/version are successful exits
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Invalid(_) | Error::SizeBound(_) => ExitCode::from(2),
                Error::Io { .. } | Error::Format(_) => ExitCode::from(3),
            }
        }
    }
}
