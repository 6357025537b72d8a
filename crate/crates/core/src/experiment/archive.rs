use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{ArchiveError, ConfigError};
use crate::experiment::spec::ExperimentSpec;
use crate::model::{CrossdockModel, ReplicationResult, UsageLedger};
use crate::sim::UsageRecord;
use crate::stats::{summarize_with, StopReason, SummaryStats};

pub const ARCHIVE_VERSION: &str = concat!("crossdock-archive/1 crossdock/", env!("CARGO_PKG_VERSION"));

const FIXED_COLUMNS: [&str; 13] = [
    "replication",
    "total_usage_cost",
    "orders_created",
    "orders_disposed",
    "orders_in_system",
    "orders_mifq",
    "orders_mimq",
    "orders_fifq",
    "orders_fimq",
    "orders_rirq",
    "mean_wait_min",
    "mean_queue_len",
    "failures",
];
const EVENTS_COLUMN: &str = "events";
const RESOURCE_FIELDS: [&str; 4] = ["busy_min", "idle_min", "overtime_min", "uses"];

/// The summary block at the end of an archive.
#[derive(Debug, Clone, PartialEq)]
pub struct ArchiveFooter {
    pub summary: Option<SummaryStats>,
    pub stop_reason: StopReason,
}

/// A persisted experiment: the resolved spec, one row per replication, and
/// the summary of Total Usage Cost.
#[derive(Debug, Clone, PartialEq)]
pub struct RunArchive {
    pub version: String,
    pub spec: ExperimentSpec,
    pub rows: Vec<ReplicationResult>,
    pub footer: ArchiveFooter,
}

impl RunArchive {
    pub fn costs(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.total_usage_cost).collect()
    }

    pub fn confidence(&self) -> f64 {
        confidence_of(&self.spec)
    }

    pub fn load(path: &Path) -> Result<Self, ArchiveError> {
        let text = std::fs::read_to_string(path).map_err(|source| ArchiveError::Io { path: path.into(), source })?;
        parse_archive(&text, path)
    }

    pub fn write_to(&self, path: &Path) -> Result<(), ArchiveError> {
        let mut w = ArchiveWriter::create(path, &self.spec)?;
        for row in &self.rows {
            w.push(row)?;
        }
        w.finish(self.footer.stop_reason)?;
        Ok(())
    }
}

pub fn confidence_of(spec: &ExperimentSpec) -> f64 {
    spec.sequential_config().map_or(crate::stats::DEFAULT_CONFIDENCE, |c| c.confidence)
}

fn column_names(resources: &[String]) -> Vec<String> {
    let mut cols: Vec<String> = FIXED_COLUMNS.iter().map(|s| s.to_string()).collect();
    cols.push(EVENTS_COLUMN.into());
    for name in resources {
        for field in RESOURCE_FIELDS {
            cols.push(format!("{name}.{field}"));
        }
    }
    cols
}

fn row_fields(r: &ReplicationResult) -> Vec<String> {
    let mut f = vec![
        r.replication.to_string(),
        r.total_usage_cost.to_string(),
        r.orders_created.to_string(),
        r.orders_disposed.to_string(),
        r.orders_in_system.to_string(),
    ];
    f.extend(r.orders_by_type.iter().map(u64::to_string));
    f.push(r.mean_wait_min.to_string());
    f.push(r.mean_queue_len.to_string());
    f.push(r.failures.to_string());
    f.push(r.events.to_string());
    for rec in &r.ledger.records {
        f.push(rec.busy_min.to_string());
        f.push(rec.idle_min.to_string());
        f.push(rec.overtime_min.to_string());
        f.push(rec.use_count.to_string());
    }
    f
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "absent".into(), |v| v.to_string())
}

/// Streams rows to disk so long sequential runs need not hold them.
pub struct ArchiveWriter {
    path: PathBuf,
    out: csv::Writer<BufWriter<File>>,
    costs: Vec<f64>,
    confidence: f64,
}

impl ArchiveWriter {
    pub fn create(path: &Path, spec: &ExperimentSpec) -> Result<Self, ArchiveError> {
        let io_err = |source| ArchiveError::Io { path: path.into(), source };
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(io_err)?;
        }
        let mut file = BufWriter::new(File::create(path).map_err(io_err)?);
        write_header(&mut file, spec).map_err(io_err)?;
        let mut out = csv::WriterBuilder::new().from_writer(file);
        let names = CrossdockModel::new(spec.variant, spec.model.clone())
            .map(|m| m.resource_names())
            .unwrap_or_default();
        out.write_record(column_names(&names)).map_err(|e| csv_err(path, e))?;
        Ok(Self { path: path.into(), out, costs: Vec::new(), confidence: confidence_of(spec) })
    }

    pub fn push(&mut self, row: &ReplicationResult) -> Result<(), ArchiveError> {
        self.out.write_record(row_fields(row)).map_err(|e| csv_err(&self.path, e))?;
        self.costs.push(row.total_usage_cost);
        Ok(())
    }

    /// Writes the footer and returns it.
    pub fn finish(self, stop_reason: StopReason) -> Result<ArchiveFooter, ArchiveError> {
        let path = self.path;
        let mut file = self.out.into_inner().map_err(|e| ArchiveError::Io { path: path.clone(), source: e.into_error() })?;
        let footer = ArchiveFooter { summary: summarize_with(&self.costs, self.confidence).ok(), stop_reason };
        write_footer(&mut file, &footer).map_err(|source| ArchiveError::Io { path: path.clone(), source })?;
        file.flush().map_err(|source| ArchiveError::Io { path, source })?;
        Ok(footer)
    }
}

fn csv_err(path: &Path, e: csv::Error) -> ArchiveError {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(source) => ArchiveError::Io { path: path.into(), source },
        other => ArchiveError::Format { path: path.into(), line, message: format!("{other:?}") },
    }
}

fn write_header<W: Write>(w: &mut W, spec: &ExperimentSpec) -> io::Result<()> {
    writeln!(w, "# version: {ARCHIVE_VERSION}")?;
    writeln!(w, "# root_seed: {}", spec.root_seed)?;
    writeln!(w, "# variant: {}", spec.variant)?;
    writeln!(w, "# mode: {}", spec.mode.label())?;
    writeln!(w, "# measure: total_usage_cost (GBP)")?;
    writeln!(w, "# config:")?;
    for line in spec.to_toml().lines() {
        writeln!(w, "#| {line}")?;
    }
    Ok(())
}

fn write_footer<W: Write>(w: &mut W, footer: &ArchiveFooter) -> io::Result<()> {
    writeln!(w, "# summary:")?;
    match &footer.summary {
        Some(s) => {
            writeln!(w, "# n: {}", s.n)?;
            writeln!(w, "# mean: {}", s.mean)?;
            writeln!(w, "# sd: {}", opt(s.sd))?;
            writeln!(w, "# min: {}", s.min)?;
            writeln!(w, "# max: {}", s.max)?;
            writeln!(w, "# half_width: {}", opt(s.half_width))?;
            writeln!(w, "# confidence: {}", s.confidence)?;
        }
        None => writeln!(w, "# n: 0")?,
    }
    writeln!(w, "# stop_reason: {}", footer.stop_reason)
}

fn format_err(path: &Path, line: usize, message: impl Into<String>) -> ArchiveError {
    ArchiveError::Format { path: path.into(), line, message: message.into() }
}

fn parse_archive(text: &str, path: &Path) -> Result<RunArchive, ArchiveError> {
    let mut meta: Vec<(usize, &str, &str)> = Vec::new();
    let mut config = String::new();
    let mut config_line = 0;
    let mut data = String::new();
    let mut first_data_line = 0;
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        if let Some(toml_line) = line.strip_prefix("#| ") {
            if config_line == 0 {
                config_line = lineno;
            }
            config.push_str(toml_line);
            config.push('\n');
        } else if line == "#|" {
            config.push('\n');
        } else if let Some(rest) = line.strip_prefix("# ") {
            if let Some((k, v)) = rest.split_once(':') {
                meta.push((lineno, k.trim(), v.trim()));
            }
        } else if !line.is_empty() {
            if first_data_line == 0 {
                first_data_line = lineno;
            }
            data.push_str(line);
            data.push('\n');
        }
    }
    let get = |key: &str| meta.iter().find(|(_, k, _)| *k == key).map(|&(l, _, v)| (l, v));
    let (_, version) = get("version").ok_or_else(|| format_err(path, 1, "missing version line"))?;
    let spec = ExperimentSpec::from_toml(&config).map_err(|e: ConfigError| {
        format_err(path, config_line + e.line.unwrap_or(1) - 1, format!("embedded config: {}", e.message))
    })?;
    let model = CrossdockModel::new(spec.variant, spec.model.clone())
        .map_err(|e| format_err(path, config_line, e.to_string()))?;
    let names = model.resource_names();
    let rates: Vec<_> = {
        let cfg = model.config();
        (0..cfg.picking_points)
            .flat_map(|_| crate::model::ResourceClass::PRIORITY.map(|c| (cfg.staffing.of(c), cfg.rates.of(c))))
            .collect()
    };

    let mut reader = csv::ReaderBuilder::new().from_reader(data.as_bytes());
    let header = reader.headers().map_err(|e| csv_err(path, e))?.clone();
    let expected = column_names(&names);
    if header.iter().ne(expected.iter().map(String::as_str)) {
        return Err(format_err(path, first_data_line, "column header does not match the embedded config"));
    }
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let lineno = first_data_line + 1 + i;
        let record = record.map_err(|e| csv_err(path, e))?;
        let num = |j: usize| -> Result<f64, ArchiveError> {
            record[j].parse::<f64>().map_err(|_| format_err(path, lineno, format!("column {}: not a number", header[j].to_owned())))
        };
        let int = |j: usize| -> Result<u64, ArchiveError> {
            record[j].parse::<u64>().map_err(|_| format_err(path, lineno, format!("column {}: not an integer", header[j].to_owned())))
        };
        let base = FIXED_COLUMNS.len() + 1;
        let mut records = Vec::with_capacity(names.len());
        for (k, name) in names.iter().enumerate() {
            let c = base + k * RESOURCE_FIELDS.len();
            let (busy, idle) = (num(c)?, num(c + 1)?);
            records.push(UsageRecord {
                name: name.clone(),
                capacity: rates[k].0,
                busy_min: busy,
                idle_min: idle,
                overtime_min: num(c + 2)?,
                scheduled_min: busy + idle,
                use_count: int(c + 3)?,
                rates: rates[k].1,
            });
        }
        rows.push(ReplicationResult {
            replication: int(0)?,
            total_usage_cost: num(1)?,
            orders_created: int(2)?,
            orders_disposed: int(3)?,
            orders_in_system: int(4)?,
            orders_by_type: [int(5)?, int(6)?, int(7)?, int(8)?, int(9)?],
            mean_wait_min: num(10)?,
            mean_queue_len: num(11)?,
            failures: int(12)?,
            events: int(13)?,
            ledger: UsageLedger { records },
        });
    }

    let (reason_line, reason) = get("stop_reason").ok_or_else(|| format_err(path, 0, "missing stop_reason footer"))?;
    let stop_reason: StopReason = reason.parse().map_err(|_| format_err(path, reason_line, "unknown stop reason"))?;
    let archive_conf = confidence_of(&spec);
    let recomputed = summarize_with(&rows.iter().map(|r| r.total_usage_cost).collect::<Vec<_>>(), archive_conf).ok();
    check_footer(path, &get, recomputed.as_ref())?;
    Ok(RunArchive {
        version: version.to_owned(),
        spec,
        rows,
        footer: ArchiveFooter { summary: recomputed, stop_reason },
    })
}

fn check_footer<'a>(
    path: &Path,
    get: &dyn Fn(&str) -> Option<(usize, &'a str)>,
    recomputed: Option<&SummaryStats>,
) -> Result<(), ArchiveError> {
    let mismatch = |field: &str| ArchiveError::FooterMismatch { path: path.into(), field: field.into() };
    let n = get("n").map(|(_, v)| v).ok_or_else(|| mismatch("n"))?;
    let Some(s) = recomputed else {
        return if n == "0" { Ok(()) } else { Err(mismatch("n")) };
    };
    let fields = [
        ("n", s.n.to_string()),
        ("mean", s.mean.to_string()),
        ("sd", opt(s.sd)),
        ("min", s.min.to_string()),
        ("max", s.max.to_string()),
        ("half_width", opt(s.half_width)),
        ("confidence", s.confidence.to_string()),
    ];
    for (field, want) in fields {
        match get(field) {
            Some((_, got)) if got == want => {}
            _ => return Err(mismatch(field)),
        }
    }
    Ok(())
}
