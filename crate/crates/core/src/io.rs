//! On-disk formats: instance files, routing problem files, archive exports
//! and run bundles.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{FrequencyVector, Instance, ObjectiveVector};
use crate::pareto::Archive;
use crate::search::{SearchConfig, SearchStats};
use crate::vrp::RoutingProblem;

pub const INSTANCE_FORMAT_VERSION: u32 = 1;

#[derive(Deserialize)]
struct InstanceFile {
    #[serde(default = "default_version")]
    version: u32,
    #[serde(flatten)]
    instance: Instance,
}

fn default_version() -> u32 {
    INSTANCE_FORMAT_VERSION
}

/// Parses an instance document and checks its structure. Modelling
/// assumptions are not validated here.
pub fn parse_instance(text: &str) -> Result<Instance> {
    let file: InstanceFile = serde_json::from_str(text)?;
    if file.version != INSTANCE_FORMAT_VERSION {
        return Err(Error::Parse(format!("unsupported instance format version {}", file.version)));
    }
    file.instance.check_structure()?;
    Ok(file.instance)
}

/// Canonical text: one customer per line, fields in fixed order.
pub fn format_instance(inst: &Instance) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{{");
    let _ = writeln!(out, "  \"version\": {INSTANCE_FORMAT_VERSION},");
    let _ = writeln!(out, "  \"name\": {},", serde_json::to_string(&inst.name).unwrap());
    let _ = writeln!(out, "  \"vehicleCap\": {},", inst.vehicle_cap);
    let _ = writeln!(out, "  \"horizon\": {},", inst.horizon);
    let _ = writeln!(out, "  \"depot\": {},", serde_json::to_string(&inst.depot).unwrap());
    let _ = writeln!(out, "  \"customers\": [");
    for (k, c) in inst.customers.iter().enumerate() {
        let sep = if k + 1 < inst.customers.len() { "," } else { "" };
        let _ = writeln!(out, "    {}{sep}", serde_json::to_string(c).unwrap());
    }
    let _ = writeln!(out, "  ]");
    let _ = writeln!(out, "}}");
    out
}

pub fn read_instance(path: &Path) -> Result<Instance> {
    parse_instance(&fs::read_to_string(path)?)
}

pub fn write_instance(path: &Path, inst: &Instance) -> Result<()> {
    Ok(fs::write(path, format_instance(inst))?)
}

pub fn parse_routing_problem(text: &str) -> Result<RoutingProblem> {
    let p: RoutingProblem = serde_json::from_str(text)?;
    p.check()?;
    Ok(p)
}

/// `inventory,distance,pi_1,...,pi_n`, one row per entry by ascending
/// inventory.
pub fn format_archive(arch: &Archive, n: usize) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["inventory".to_string(), "distance".to_string()];
    header.extend((1..=n).map(|i| format!("pi_{i}")));
    w.write_record(&header)?;
    for e in archive_rows(arch) {
        if e.payload.len() != n {
            return Err(Error::contract("archive entry length differs from customer count"));
        }
        let mut row = vec![e.objectives.inventory.to_string(), e.objectives.distance.to_string()];
        row.extend(e.payload.as_slice().iter().map(u32::to_string));
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn archive_rows(arch: &Archive) -> impl Iterator<Item = &crate::pareto::ArchiveEntry<FrequencyVector>> {
    // the archive keeps entries sorted by inventory already
    arch.iter()
}

pub fn parse_archive(text: &str) -> Result<Archive> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let headers = r.headers()?.clone();
    if headers.get(0) != Some("inventory") || headers.get(1) != Some("distance") {
        return Err(Error::Parse("archive header must start with inventory,distance".into()));
    }
    let mut arch = Archive::new();
    for rec in r.records() {
        let rec = rec?;
        let num = |k: usize| -> Result<f64> {
            rec.get(k)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::Parse(format!("bad number in archive column {}", k + 1)))
        };
        let objectives = ObjectiveVector::new(num(0)?, num(1)?);
        let freqs = rec
            .iter()
            .skip(2)
            .map(|s| s.parse::<u32>().map_err(|_| Error::Parse(format!("bad frequency {s:?}"))))
            .collect::<Result<Vec<_>>>()?;
        arch.insert(objectives, FrequencyVector::new(freqs)?);
    }
    Ok(arch)
}

/// `steps=… evaluations=… size=…`
pub fn stats_line(stats: &SearchStats) -> String {
    format!("steps={} evaluations={} size={}", stats.steps, stats.evaluations, stats.archive_size)
}

fn format_stats(stats: &SearchStats) -> String {
    format!(
        "steps={}\nevaluations={}\narchive_size={}\ncpu_seconds={:.3}\n",
        stats.steps,
        stats.evaluations,
        stats.archive_size,
        stats.elapsed.as_secs_f64()
    )
}

fn parse_stats(text: &str) -> Result<SearchStats> {
    let mut stats = SearchStats::default();
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("bad stats line {line:?}")))?;
        let bad = || Error::Parse(format!("bad stats value {line:?}"));
        match key.trim() {
            "steps" => stats.steps = value.trim().parse().map_err(|_| bad())?,
            "evaluations" => stats.evaluations = value.trim().parse().map_err(|_| bad())?,
            "archive_size" => stats.archive_size = value.trim().parse().map_err(|_| bad())?,
            "cpu_seconds" => {
                let secs: f64 = value.trim().parse().map_err(|_| bad())?;
                stats.elapsed = Duration::from_secs_f64(secs.max(0.0));
            }
            _ => {}
        }
    }
    Ok(stats)
}

pub const ARCHIVE_FILE: &str = "archive.csv";
pub const STATS_FILE: &str = "stats.txt";
pub const CONFIG_FILE: &str = "config.json";

/// Everything a finished (or stopped) run leaves on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunBundle {
    pub archive: Archive,
    pub stats: SearchStats,
    pub config: SearchConfig,
}

pub fn write_bundle(dir: &Path, n: usize, bundle: &RunBundle) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(ARCHIVE_FILE), format_archive(&bundle.archive, n)?)?;
    fs::write(dir.join(STATS_FILE), format_stats(&bundle.stats))?;
    fs::write(dir.join(CONFIG_FILE), serde_json::to_string_pretty(&bundle.config)? + "\n")?;
    Ok(())
}

pub fn read_bundle(dir: &Path) -> Result<RunBundle> {
    Ok(RunBundle {
        archive: parse_archive(&fs::read_to_string(dir.join(ARCHIVE_FILE))?)?,
        stats: parse_stats(&fs::read_to_string(dir.join(STATS_FILE))?)?,
        config: serde_json::from_str(&fs::read_to_string(dir.join(CONFIG_FILE))?)?,
    })
}
