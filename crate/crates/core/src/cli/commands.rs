//! `run`, `genpool` and `validate`.

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use super::file::{load_scenario, Diagnostic, ScenarioFile};
use crate::channel::{generate_realization_pool, save_pool, ClusterStats, RealizationPool};
use crate::scalar::{db_to_linear, linear_to_db};
use crate::sim::{self, read_slot_traces_file, RunOutput, Scenario, SlotOutcome};

pub const SLOT_TRACE_FILE: &str = "slot_traces.csv";
pub const SAP_LOG_FILE: &str = "sap_log.csv";
pub const CHANNEL_GRID_FILE: &str = "channel_grid.csv";
pub const SUMMARY_FILE: &str = "summary.toml";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<Diagnostic>),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    /// 2 for input problems, 3 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

fn read_source(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| {
        CliError::Invalid(vec![Diagnostic {
            key: path.display().to_string(),
            line: None,
            message: format!("cannot read scenario: {e}"),
        }])
    })
}

/// Statistics recomputed from a slot-trace file.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub records: usize,
    pub mean_sinr_db: f64,
    pub delivered_bits: u64,
    pub throughput_bps: f64,
    pub transmissions: usize,
    pub drops: usize,
    pub drop_rate: f64,
}

pub fn summarize(traces: &[sim::SlotTrace], duration_s: f64) -> Summary {
    let n = traces.len();
    let mean_lin = if n == 0 {
        0.0
    } else {
        traces.iter().map(|t| db_to_linear(t.wideband_sinr_db)).sum::<f64>() / n as f64
    };
    let delivered: u64 = traces.iter().map(|t| t.delivered_bits as u64).sum();
    let tx = traces.iter().filter(|t| t.outcome != SlotOutcome::Idle).count();
    let drops = traces.iter().filter(|t| t.outcome == SlotOutcome::Dropped).count();
    Summary {
        records: n,
        mean_sinr_db: linear_to_db(mean_lin),
        delivered_bits: delivered,
        throughput_bps: if duration_s > 0.0 { delivered as f64 / duration_s } else { 0.0 },
        transmissions: tx,
        drops,
        drop_rate: if tx == 0 { 0.0 } else { drops as f64 / tx as f64 },
    }
}

/// Files written by one run.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub dir: PathBuf,
    pub seed: u64,
    pub summary: Summary,
}

pub fn write_outputs(out: &RunOutput, dir: &Path, grid: bool) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(runtime)?;
    let create = |name: &str| fs::File::create(dir.join(name)).map(BufWriter::new).map_err(runtime);
    sim::write_slot_traces(&out.slot_traces, create(SLOT_TRACE_FILE)?).map_err(runtime)?;
    sim::write_sap_log(&out.sap_log, create(SAP_LOG_FILE)?).map_err(runtime)?;
    if grid {
        sim::write_channel_grid(&out.channel_grid, create(CHANNEL_GRID_FILE)?).map_err(runtime)?;
    }
    Ok(())
}

fn summary_document(sc: &Scenario, out: &RunOutput, s: &Summary) -> String {
    let mut stats = toml::Table::new();
    let mut put = |k: &str, v: toml::Value| {
        stats.insert(k.to_string(), v);
    };
    put("miesm_sha256", out.miesm_digest.clone().into());
    put("seed", toml::Value::Integer(sc.run.seed as i64));
    put("duration_s", (out.duration_ns as f64 * 1e-9).into());
    put("slots", toml::Value::Integer(out.counts.slots as i64));
    put("large_scale_updates", toml::Value::Integer(out.counts.large_scale_updates as i64));
    put("trace_records", toml::Value::Integer(s.records as i64));
    put("mean_sinr_db", s.mean_sinr_db.into());
    put("delivered_bits", toml::Value::Integer(s.delivered_bits as i64));
    put("throughput_bps", s.throughput_bps.into());
    put("transmissions", toml::Value::Integer(s.transmissions as i64));
    put("drops", toml::Value::Integer(s.drops as i64));
    put("drop_rate", s.drop_rate.into());
    let mut doc = toml::Table::new();
    doc.insert("summary".into(), toml::Value::Table(stats));
    let scenario = toml::Value::try_from(ScenarioFile::from_scenario(sc)).expect("scenario serializes");
    doc.insert("scenario".into(), scenario);
    toml::to_string(&doc).expect("summary serializes")
}

/// Runs one scenario, writes its files into `dir` and summarises them from disk.
pub fn run_to_dir(sc: &Scenario, dir: &Path) -> Result<RunReport, CliError> {
    let out = sim::run(sc).map_err(runtime)?;
    write_outputs(&out, dir, sc.run.channel_grid)?;
    let traces = read_slot_traces_file(&dir.join(SLOT_TRACE_FILE)).map_err(runtime)?;
    let summary = summarize(&traces, out.duration_ns as f64 * 1e-9);
    fs::write(dir.join(SUMMARY_FILE), summary_document(sc, &out, &summary)).map_err(runtime)?;
    Ok(RunReport {
        dir: dir.to_path_buf(),
        seed: sc.run.seed,
        summary,
    })
}

#[derive(Debug, Clone, Default)]
pub struct RunArgs {
    pub overrides: Vec<String>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub replications: usize,
}

/// `run`: replication `k` uses seed `seed + k` and writes to `rep_<k>` when
/// more than one replication is requested.
pub fn cmd_run(path: &Path, args: &RunArgs) -> Result<Vec<RunReport>, CliError> {
    let src = read_source(path)?;
    let mut overrides = args.overrides.clone();
    if let Some(seed) = args.seed {
        overrides.push(format!("run.seed={seed}"));
    }
    if let Some(out) = &args.out {
        overrides.push(format!("run.output={}", toml::Value::String(out.display().to_string())));
    }
    let sc = load_scenario(&src, &overrides).map_err(CliError::Invalid)?;
    let base = sc.run.output.clone().unwrap_or_else(|| PathBuf::from("out"));
    let reps = args.replications.max(1);
    if reps == 1 {
        return Ok(vec![run_to_dir(&sc, &base)?]);
    }
    let jobs: Vec<(Scenario, PathBuf)> = (0..reps)
        .map(|k| {
            let mut s = sc.clone();
            s.run.seed = sc.run.seed.wrapping_add(k as u64);
            s.run.output = Some(base.join(format!("rep_{k}")));
            let dir = base.join(format!("rep_{k}"));
            (s, dir)
        })
        .collect();
    std::thread::scope(|scope| {
        let handles: Vec<_> = jobs
            .iter()
            .map(|(s, dir)| scope.spawn(move || run_to_dir(s, dir)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(runtime("replication thread panicked"))))
            .collect()
    })
}

#[derive(Debug, Clone)]
pub struct GenpoolArgs {
    pub seed: u64,
    pub count: usize,
    pub tx_antennas: usize,
    pub rx_antennas: usize,
    pub stats: ClusterStats,
    pub out: PathBuf,
}

pub fn cmd_genpool(args: &GenpoolArgs) -> Result<RealizationPool, CliError> {
    let invalid = |m: &str| {
        CliError::Invalid(vec![Diagnostic {
            key: "genpool".into(),
            line: None,
            message: m.into(),
        }])
    };
    if args.count == 0 {
        return Err(invalid("count must be >= 1"));
    }
    if args.tx_antennas == 0 || args.rx_antennas == 0 {
        return Err(invalid("antenna counts must be >= 1"));
    }
    let pool = generate_realization_pool(args.seed, args.count, &args.stats, args.tx_antennas, args.rx_antennas)
        .map_err(|e| invalid(&e.to_string()))?;
    save_pool(&pool, &args.out).map_err(runtime)?;
    Ok(pool)
}

/// All diagnostics for a scenario file; empty when it is valid.
pub fn cmd_validate(path: &Path) -> Vec<Diagnostic> {
    match read_source(path) {
        Err(CliError::Invalid(d)) => d,
        Err(CliError::Runtime(m)) => vec![Diagnostic {
            key: path.display().to_string(),
            line: None,
            message: m,
        }],
        Ok(src) => load_scenario(&src, &[]).err().unwrap_or_default(),
    }
}

pub fn format_summary(r: &RunReport) -> String {
    let s = &r.summary;
    format!(
        "{}: seed {} | {} records | mean SINR {:.2} dB | throughput {:.3} Mbit/s | drop rate {:.4}",
        r.dir.display(),
        r.seed,
        s.records,
        s.mean_sinr_db,
        s.throughput_bps / 1e6,
        s.drop_rate
    )
}
