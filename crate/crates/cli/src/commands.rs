use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use island_core::config::{load_config, parse_config, to_toml};
use island_core::engine::{run_scenario, NullSink, ScenarioReport};
use island_core::world::{PolicyKind, ScenarioConfig};

use crate::error::CliError;
use crate::manifest::{write_atomic, RunEntry, RunManifest};
use crate::output::{
    day_rows, period_rows, read_csv, write_audit, write_csv, DayRow, ProgressSink, SweepRow, TraceSink, AUDIT_FILE,
    CONFIG_ECHO_FILE, DAYS_FILE, DAY_HEADER, PERIODS_FILE, PERIOD_HEADER, SWEEP_FILE, SWEEP_HEADER,
};

/// The bundled reference scenario.
pub const REFERENCE_TOML: &str = include_str!("../configs/reference.toml");

#[derive(Debug, Clone)]
pub struct ConfigSource {
    pub path: Option<PathBuf>,
    pub bytes: Vec<u8>,
    pub config: ScenarioConfig,
}

/// Loads `path`, or the bundled reference scenario when `None`.
pub fn load_source(path: Option<&Path>) -> Result<ConfigSource, CliError> {
    match path {
        Some(p) => {
            let bytes = fs::read(p).map_err(|e| CliError::io(p, e))?;
            Ok(ConfigSource {
                path: Some(p.to_path_buf()),
                bytes,
                config: load_config(p)?,
            })
        }
        None => Ok(ConfigSource {
            path: None,
            bytes: REFERENCE_TOML.as_bytes().to_vec(),
            config: parse_config(REFERENCE_TOML)?,
        }),
    }
}

fn resolve_seeds(config: &ScenarioConfig, seed: Option<u64>, seeds: &[u64]) -> Vec<u64> {
    if !seeds.is_empty() {
        seeds.to_vec()
    } else {
        vec![seed.unwrap_or(config.seed)]
    }
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

#[derive(Debug, Clone, Default)]
pub struct SimulateArgs {
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    pub seeds: Vec<u64>,
    pub out: PathBuf,
    pub trace: bool,
    pub quiet: bool,
}

#[derive(Debug, Clone)]
pub struct SimulateOutcome {
    pub manifest: RunManifest,
    pub reports: Vec<ScenarioReport>,
    pub summary: Vec<String>,
}

pub fn run_dir_name(seed: u64) -> String {
    format!("seed-{seed}")
}

/// One line per VNF with migration, loss and total per policy summed over the
/// run, then one line of realized coverage and availability.
pub fn summary_lines(report: &ScenarioReport) -> Vec<String> {
    let mut world = format!(
        "seed {}: mean in coverage {:.1} ({:.2} /km²), availability",
        report.seed, report.mean_in_coverage, report.realized_density
    );
    for (v, a) in report.config.vnfs.iter().zip(&report.availability) {
        let _ = write!(world, " {} {a:.5}", v.id);
    }
    report
        .config
        .vnfs
        .iter()
        .map(|v| {
            let mut line = format!("seed {} {}:", report.seed, v.id);
            for (i, policy) in report.config.policies.iter().enumerate() {
                let (mut m, mut l) = (0.0, 0.0);
                for d in report.days.iter().filter(|d| d.policy == *policy && d.vnf == v.id) {
                    m += d.migration_cost;
                    l += d.outage_loss;
                }
                let sep = if i == 0 { " " } else { " | " };
                let _ = write!(line, "{sep}{policy} migration {m:.1} loss {l:.1} total {:.1}", m + l);
            }
            line
        })
        .chain(std::iter::once(world))
        .collect()
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<SimulateOutcome, CliError> {
    let source = load_source(args.config.as_deref())?;
    let seeds = resolve_seeds(&source.config, args.seed, &args.seeds);
    create_dir(&args.out)?;
    let mut manifest = RunManifest::new("simulate", source.path.as_deref(), &source.bytes, seeds.clone());
    write_atomic(&args.out.join(CONFIG_ECHO_FILE), to_toml(&source.config).as_bytes())?;
    manifest.record(&args.out, CONFIG_ECHO_FILE)?;

    let mut reports = Vec::new();
    let mut summary = Vec::new();
    for &seed in &seeds {
        let mut config = source.config.clone();
        config.seed = seed;
        let rel = run_dir_name(seed);
        let dir = args.out.join(&rel);
        create_dir(&dir)?;
        let days = config.days;
        let report = if args.trace {
            let mut trace = TraceSink::create(&dir)?;
            let report = run_scenario(
                config,
                &mut ProgressSink {
                    inner: &mut trace,
                    seed,
                    days,
                },
            )?;
            trace.finish(&dir)?;
            report
        } else {
            run_scenario(
                config,
                &mut ProgressSink {
                    inner: &mut NullSink,
                    seed,
                    days,
                },
            )?
        };
        write_csv(&dir.join(PERIODS_FILE), &PERIOD_HEADER, &period_rows(&report.periods))?;
        write_csv(&dir.join(DAYS_FILE), &DAY_HEADER, &day_rows(&report.days))?;
        write_audit(&dir.join(AUDIT_FILE), &report.periods)?;
        let mut files = vec![PERIODS_FILE, DAYS_FILE, AUDIT_FILE];
        if args.trace {
            files.extend([crate::output::TRACE_FILE, crate::output::TRACE_VNF_FILE]);
        }
        for f in files {
            manifest.record(&args.out, &format!("{rel}/{f}"))?;
        }
        manifest.runs.push(RunEntry {
            seed,
            value: None,
            dir: Some(rel),
        });
        for line in summary_lines(&report) {
            if !args.quiet {
                println!("{line}");
            }
            summary.push(line);
        }
        reports.push(report);
    }
    manifest.write(&args.out)?;
    Ok(SimulateOutcome {
        manifest,
        reports,
        summary,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    /// Scales every VNF's migration cost.
    CmMultiplier,
    /// Sets the UE density, 1/km².
    Density,
    /// Sets every VNF's failure rate, 1/s.
    LambdaDown,
}

impl SweepParam {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepParam::CmMultiplier => "cm-multiplier",
            SweepParam::Density => "density",
            SweepParam::LambdaDown => "lambda-down",
        }
    }

    pub fn apply(self, config: &mut ScenarioConfig, value: f64) {
        match self {
            SweepParam::CmMultiplier => {
                for v in &mut config.vnfs {
                    v.migration_cost *= value;
                }
            }
            SweepParam::Density => config.density = value,
            SweepParam::LambdaDown => {
                for v in &mut config.vnfs {
                    v.failure_rate = value;
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepArgs {
    pub config: Option<PathBuf>,
    pub param: SweepParam,
    pub values: Vec<f64>,
    pub seeds: Vec<u64>,
    pub out: PathBuf,
    pub quiet: bool,
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub manifest: RunManifest,
    pub rows: Vec<SweepRow>,
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<SweepOutcome, CliError> {
    if args.values.is_empty() {
        return Err(CliError::Usage("sweep needs at least one value".into()));
    }
    let source = load_source(args.config.as_deref())?;
    let seeds = resolve_seeds(&source.config, None, &args.seeds);
    create_dir(&args.out)?;
    let mut manifest = RunManifest::new("sweep", source.path.as_deref(), &source.bytes, seeds.clone());
    manifest.sweep_parameter = Some(args.param.as_str().to_string());
    let mut rows = Vec::new();
    for &value in &args.values {
        for &seed in &seeds {
            let mut config = source.config.clone();
            config.seed = seed;
            args.param.apply(&mut config, value);
            let days = config.days;
            let report = run_scenario(
                config,
                &mut ProgressSink {
                    inner: &mut NullSink,
                    seed,
                    days,
                },
            )?;
            rows.extend(report.days.iter().map(|d| SweepRow {
                value,
                seed,
                policy: d.policy.as_str().to_string(),
                vnf: d.vnf.clone(),
                day: d.day,
                migration_cost: d.migration_cost,
                outage_loss: d.outage_loss,
            }));
            if !args.quiet {
                for line in summary_lines(&report) {
                    println!("{}={value} {line}", args.param.as_str());
                }
            }
            manifest.runs.push(RunEntry {
                seed,
                value: Some(value),
                dir: None,
            });
        }
    }
    write_atomic(&args.out.join(CONFIG_ECHO_FILE), to_toml(&source.config).as_bytes())?;
    manifest.record(&args.out, CONFIG_ECHO_FILE)?;
    write_csv(&args.out.join(SWEEP_FILE), &SWEEP_HEADER, &rows)?;
    manifest.record(&args.out, SWEEP_FILE)?;
    manifest.write(&args.out)?;
    Ok(SweepOutcome { manifest, rows })
}

/// Mean and standard error of the mean; the error is `None` below two samples.
pub fn mean_se(xs: &[f64]) -> (f64, Option<f64>) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, None);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, Some((var / n).sqrt()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyStat {
    pub group: String,
    pub vnf: String,
    pub policy: String,
    pub mean: f64,
    pub se: Option<f64>,
    pub samples: usize,
}

#[derive(Debug, Clone)]
pub struct ReportOutcome {
    pub series_files: Vec<PathBuf>,
    pub stats: Vec<PolicyStat>,
}

fn policy_rank(name: &str) -> usize {
    PolicyKind::ALL
        .iter()
        .position(|p| p.as_str() == name)
        .unwrap_or(usize::MAX)
}

/// Per-VNF series files and mean ± SE of daily total cost per policy.
///
/// For simulate output the series has one row per day and policy (means across
/// seeds) and the error is taken across per-seed means. For sweep output the
/// rows are per swept value instead of per day.
pub fn cmd_report(out: &Path, quiet: bool) -> Result<ReportOutcome, CliError> {
    let manifest = RunManifest::load_verified(out)?;
    // (vnf, x, policy) -> per-seed (migration, loss) sums and day counts
    type Key = (String, String, String);
    let mut cells: BTreeMap<Key, BTreeMap<u64, (f64, f64, u64)>> = BTreeMap::new();
    let (x_label, group_label) = match manifest.command.as_str() {
        "sweep" => {
            for r in read_csv::<SweepRow>(&out.join(SWEEP_FILE))? {
                let cell = cells
                    .entry((r.vnf, format!("{}", r.value), r.policy))
                    .or_default()
                    .entry(r.seed)
                    .or_default();
                cell.0 += r.migration_cost;
                cell.1 += r.outage_loss;
                cell.2 += 1;
            }
            (
                manifest.sweep_parameter.clone().unwrap_or_else(|| "value".into()),
                "value",
            )
        }
        _ => {
            for run in &manifest.runs {
                let dir = out.join(run.dir.clone().unwrap_or_else(|| run_dir_name(run.seed)));
                for r in read_csv::<DayRow>(&dir.join(DAYS_FILE))? {
                    let cell = cells
                        .entry((r.vnf, r.day.to_string(), r.policy))
                        .or_default()
                        .entry(run.seed)
                        .or_default();
                    cell.0 += r.c_m_charged;
                    cell.1 += r.outage_loss;
                    cell.2 += 1;
                }
            }
            ("day".to_string(), "all days")
        }
    };

    let mut by_vnf: BTreeMap<String, Vec<(String, String, f64, f64)>> = BTreeMap::new();
    // (vnf, group, policy) -> per-seed mean daily totals
    let mut totals: BTreeMap<Key, BTreeMap<u64, (f64, u64)>> = BTreeMap::new();
    for ((vnf, x, policy), seeds) in &cells {
        let n = seeds.values().map(|c| c.2).sum::<u64>() as f64;
        let m = seeds.values().map(|c| c.0).sum::<f64>() / n;
        let l = seeds.values().map(|c| c.1).sum::<f64>() / n;
        by_vnf
            .entry(vnf.clone())
            .or_default()
            .push((x.clone(), policy.clone(), m, l));
        let group = if group_label == "value" {
            x.clone()
        } else {
            group_label.to_string()
        };
        for (seed, c) in seeds {
            let t = totals
                .entry((vnf.clone(), group.clone(), policy.clone()))
                .or_default()
                .entry(*seed)
                .or_default();
            t.0 += c.0 + c.1;
            t.1 += c.2;
        }
    }

    let mut series_files = Vec::new();
    for (vnf, mut rows) in by_vnf {
        rows.sort_by(|a, b| {
            let xa: f64 = a.0.parse().unwrap_or(f64::NAN);
            let xb: f64 = b.0.parse().unwrap_or(f64::NAN);
            xa.total_cmp(&xb).then(policy_rank(&a.1).cmp(&policy_rank(&b.1)))
        });
        let mut text = format!(
            "# {:<14} {:<8} {:>18} {:>18}\n",
            x_label, "policy", "migration_cost", "outage_loss"
        );
        for (x, policy, m, l) in rows {
            let _ = writeln!(text, "  {x:<14} {policy:<8} {m:>18.3} {l:>18.3}");
        }
        let path = out.join(format!("series_{vnf}.txt"));
        write_atomic(&path, text.as_bytes())?;
        series_files.push(path);
    }

    let mut stats: Vec<PolicyStat> = totals
        .into_iter()
        .map(|((vnf, group, policy), seeds)| {
            let per_seed: Vec<f64> = seeds.values().map(|(sum, n)| sum / *n as f64).collect();
            let (mean, se) = mean_se(&per_seed);
            PolicyStat {
                group,
                vnf,
                policy,
                mean,
                se,
                samples: per_seed.len(),
            }
        })
        .collect();
    stats.sort_by(|a, b| {
        let ga: f64 = a.group.parse().unwrap_or(0.0);
        let gb: f64 = b.group.parse().unwrap_or(0.0);
        a.vnf
            .cmp(&b.vnf)
            .then(ga.total_cmp(&gb))
            .then(policy_rank(&a.policy).cmp(&policy_rank(&b.policy)))
    });
    if !quiet {
        for s in &stats {
            let se = s.se.map_or_else(|| "n/a".to_string(), |e| format!("{e:.1}"));
            let group = if group_label == "value" {
                format!("{x_label}={} ", s.group)
            } else {
                String::new()
            };
            println!(
                "{group}{} {:<6} daily total cost {:.1} ± {se} (seeds {})",
                s.vnf, s.policy, s.mean, s.samples
            );
        }
    }
    Ok(ReportOutcome { series_files, stats })
}
