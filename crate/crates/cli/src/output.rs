//! CSV and JSON-lines emission.

use std::io::{BufWriter, Write};
use std::path::Path;

use island_core::engine::{DayTotals, PeriodReport, ReportSink, TickView};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::manifest::{persist, temp_beside, write_atomic};

pub const PERIODS_FILE: &str = "periods.csv";
pub const DAYS_FILE: &str = "days.csv";
pub const AUDIT_FILE: &str = "audit.jsonl";
pub const TRACE_FILE: &str = "trace.csv";
pub const TRACE_VNF_FILE: &str = "trace_vnf.csv";
pub const CONFIG_ECHO_FILE: &str = "config.toml";
pub const SWEEP_FILE: &str = "sweep.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodRow {
    pub period: u64,
    pub policy: String,
    pub vnf: String,
    pub decision: String,
    pub c_o_est: Option<f64>,
    pub c_m_charged: f64,
    pub outage_loss: f64,
    pub outage_seconds: f64,
    pub ue_count: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DayRow {
    pub day: u64,
    pub policy: String,
    pub vnf: String,
    pub sync_periods: u64,
    pub c_m_charged: f64,
    pub outage_loss: f64,
    pub total_cost: f64,
    pub outage_seconds: f64,
    pub ue_count: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub seed: u64,
    pub policy: String,
    pub vnf: String,
    pub day: u64,
    pub migration_cost: f64,
    pub outage_loss: f64,
}

pub fn period_rows(periods: &[PeriodReport]) -> Vec<PeriodRow> {
    periods
        .iter()
        .flat_map(|p| {
            p.vnfs.iter().map(move |v| PeriodRow {
                period: p.period,
                policy: p.policy.as_str().to_string(),
                vnf: v.vnf.clone(),
                decision: v.action.as_str().to_string(),
                c_o_est: v.estimate.as_ref().map(|e| e.value),
                c_m_charged: v.migration_charged,
                outage_loss: v.outage_loss,
                outage_seconds: v.outage_seconds,
                ue_count: p.ue_count,
            })
        })
        .collect()
}

pub fn day_rows(days: &[DayTotals]) -> Vec<DayRow> {
    days.iter()
        .map(|d| DayRow {
            day: d.day,
            policy: d.policy.as_str().to_string(),
            vnf: d.vnf.clone(),
            sync_periods: d.sync_periods,
            c_m_charged: d.migration_cost,
            outage_loss: d.outage_loss,
            total_cost: d.total_cost,
            outage_seconds: d.outage_seconds,
            ue_count: d.ue_count,
        })
        .collect()
}

pub fn csv_bytes<T: Serialize>(rows: &[T]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner().map_err(|e| CliError::Usage(e.to_string()))
}

/// Writes a CSV with a header row even when `rows` is empty.
pub fn write_csv<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> Result<(), CliError> {
    let bytes = if rows.is_empty() {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        w.into_inner().map_err(|e| CliError::Usage(e.to_string()))?
    } else {
        csv_bytes(rows)?
    };
    write_atomic(path, &bytes)
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, CliError> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<Result<Vec<T>, _>>()?)
}

pub const PERIOD_HEADER: [&str; 9] = [
    "period",
    "policy",
    "vnf",
    "decision",
    "c_o_est",
    "c_m_charged",
    "outage_loss",
    "outage_seconds",
    "ue_count",
];

pub const DAY_HEADER: [&str; 9] = [
    "day",
    "policy",
    "vnf",
    "sync_periods",
    "c_m_charged",
    "outage_loss",
    "total_cost",
    "outage_seconds",
    "ue_count",
];

pub const SWEEP_HEADER: [&str; 7] = ["value", "seed", "policy", "vnf", "day", "migration_cost", "outage_loss"];

/// One JSON object per period report, estimator inputs included.
pub fn write_audit(path: &Path, periods: &[PeriodReport]) -> Result<(), CliError> {
    let mut bytes = Vec::new();
    for p in periods {
        serde_json::to_writer(&mut bytes, p).expect("report serializes");
        bytes.push(b'\n');
    }
    write_atomic(path, &bytes)
}

/// Streams per-tick UE positions and VNF states to CSV.
pub struct TraceSink {
    ues: csv::Writer<BufWriter<tempfile::NamedTempFile>>,
    vnfs: csv::Writer<BufWriter<tempfile::NamedTempFile>>,
    error: Option<csv::Error>,
}

impl TraceSink {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        let mut ues = csv::Writer::from_writer(BufWriter::new(temp_beside(&dir.join(TRACE_FILE))?));
        ues.write_record(["tick", "ue", "x", "y", "in_coverage"])?;
        let mut vnfs = csv::Writer::from_writer(BufWriter::new(temp_beside(&dir.join(TRACE_VNF_FILE))?));
        vnfs.write_record(["tick", "vnf", "down"])?;
        Ok(TraceSink { ues, vnfs, error: None })
    }

    fn write(&mut self, view: &TickView<'_>) -> Result<(), csv::Error> {
        let tick = view.tick.to_string();
        for ue in view.ues {
            self.ues.write_record([
                tick.as_str(),
                &ue.id.to_string(),
                &ue.position.x.to_string(),
                &ue.position.y.to_string(),
                if ue.in_coverage { "1" } else { "0" },
            ])?;
        }
        for (v, down) in view.vnf_down.iter().enumerate() {
            self.vnfs
                .write_record([tick.as_str(), &v.to_string(), if *down { "1" } else { "0" }])?;
        }
        Ok(())
    }

    pub fn finish(self, dir: &Path) -> Result<(), CliError> {
        if let Some(e) = self.error {
            return Err(e.into());
        }
        for (w, name) in [(self.ues, TRACE_FILE), (self.vnfs, TRACE_VNF_FILE)] {
            let path = dir.join(name);
            let mut buf = w.into_inner().map_err(|e| CliError::io(&path, e.into_error()))?;
            buf.flush().map_err(|e| CliError::io(&path, e))?;
            let tmp = buf.into_inner().map_err(|e| CliError::io(&path, e.into_error()))?;
            persist(tmp, &path)?;
        }
        Ok(())
    }
}

impl ReportSink for TraceSink {
    fn wants_ticks(&self) -> bool {
        self.error.is_none()
    }

    fn on_tick(&mut self, view: &TickView<'_>) {
        if let Err(e) = self.write(view) {
            self.error = Some(e);
        }
    }
}

/// Logs day-level progress.
pub struct ProgressSink<'a, S: ReportSink + ?Sized> {
    pub inner: &'a mut S,
    pub seed: u64,
    pub days: u64,
}

impl<S: ReportSink + ?Sized> ReportSink for ProgressSink<'_, S> {
    fn wants_ticks(&self) -> bool {
        self.inner.wants_ticks()
    }

    fn on_tick(&mut self, view: &TickView<'_>) {
        self.inner.on_tick(view)
    }

    fn on_period(&mut self, report: &PeriodReport) {
        self.inner.on_period(report)
    }

    fn on_day(&mut self, totals: &[DayTotals]) {
        if let Some(d) = totals.first() {
            log::info!("seed {}: day {}/{} done", self.seed, d.day + 1, self.days);
        }
        self.inner.on_day(totals)
    }
}
