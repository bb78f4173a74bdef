//! Figure tables, runtime sweeps and scaling fits, with CSV/JSON output.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::model::{DrivingProfile, ProfileKind, SearchInstance};
use crate::schedule::{self, asymptotic_runtime, AsymptoticRuntime, RuntimeMethod, RuntimeRecord};
use crate::spectrum;

/// Intervals in the Fig. 1 s-grid; the grid has one more point and
/// contains `s = 1/2` exactly.
pub const FIG1_INTERVALS: usize = 512;
/// Intervals in the Fig. 2 t-grid.
pub const FIG2_INTERVALS: usize = 1024;
/// Qubit counts in the Fig. 3 scaling table.
pub const FIG3_QUBITS: std::ops::RangeInclusive<u32> = 2..=30;
/// Smallest `N` admitted to scaling fits.
pub const FIT_MIN_SIZE: u64 = 1 << 10;

/// Version string in `git describe` style; `ADIA_GIT_DESCRIBE` at build time
/// overrides the crate version.
pub fn version_string() -> String {
    option_env!("ADIA_GIT_DESCRIBE")
        .map(str::to_string)
        .unwrap_or_else(|| format!("v{}", env!("CARGO_PKG_VERSION")))
}

/// RFC 3339 timestamp; honours `SOURCE_DATE_EPOCH` for reproducible output.
pub fn timestamp() -> String {
    let fixed = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|v| v.trim().parse::<i64>().ok())
        .and_then(|secs| chrono::DateTime::from_timestamp(secs, 0));
    fixed
        .unwrap_or_else(chrono::Utc::now)
        .to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableMetadata {
    pub figure_id: String,
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub size: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub qubits: Option<Vec<u32>>,
    pub epsilon: Option<f64>,
    pub profiles: Vec<String>,
    pub version: String,
    pub timestamp: String,
}

impl TableMetadata {
    fn new(figure_id: &str, profiles: &[&DrivingProfile]) -> Self {
        Self {
            figure_id: figure_id.to_string(),
            size: None,
            qubits: None,
            epsilon: None,
            profiles: profiles.iter().map(|p| p.label()).collect(),
            version: version_string(),
            timestamp: timestamp(),
        }
    }
}

/// Rectangular table of reals; `None` cells are written empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
    pub metadata: TableMetadata,
}

impl FigureTable {
    fn new(columns: &[&str], metadata: TableMetadata) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            metadata,
        }
    }

    pub fn figure_id(&self) -> &str {
        &self.metadata.figure_id
    }

    fn push(&mut self, row: Vec<Option<f64>>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Values of a named column.
    pub fn column(&self, name: &str) -> Result<Vec<Option<f64>>> {
        let k = self
            .columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::invalid(format!("no column '{name}' in {}", self.figure_id())))?;
        Ok(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn check(&self) -> Result<()> {
        if let Some(r) = self.rows.iter().position(|r| r.len() != self.columns.len()) {
            return Err(Error::Numeric(format!("row {r} of {} has the wrong width", self.figure_id())));
        }
        Ok(())
    }

    pub fn to_csv(&self) -> Result<String> {
        self.check()?;
        let mut out = String::new();
        writeln!(out, "# {}", serde_json::to_string(&self.metadata)?).expect("string write");
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|c| c.map(format_real).unwrap_or_default()).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        Ok(out)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv()?)?;
        Ok(())
    }
}

/// 17 significant digits, round-trippable.
pub fn format_real(v: f64) -> String {
    format!("{v:.16e}")
}

/// Lowest two levels of the quadratic-profile Hamiltonian on a uniform grid.
pub fn figure1_data(instance: &SearchInstance) -> Result<FigureTable> {
    let profile = DrivingProfile::Quadratic;
    let mut meta = TableMetadata::new("fig1", &[&profile]);
    meta.size = Some(instance.size());
    let mut table = FigureTable::new(&["s", "E0", "E1"], meta);
    for k in 0..=FIG1_INTERVALS {
        let s = k as f64 / FIG1_INTERVALS as f64;
        let p = spectrum::spectrum_at(instance, &profile, s)?;
        table.push(vec![Some(s), Some(p.e0), Some(p.e1)]);
    }
    Ok(table)
}

/// Driven (quadratic) and plain local schedules `s(t)` on a shared t-grid.
/// The grid spans the longer schedule and includes the end of the shorter;
/// each column is empty past its own runtime.
pub fn figure2_data(instance: &SearchInstance, epsilon: f64) -> Result<FigureTable> {
    let driven_profile = DrivingProfile::Quadratic;
    let rc_profile = DrivingProfile::None;
    let driven = schedule::local_schedule(instance, &driven_profile, epsilon, schedule::DEFAULT_S_TOLERANCE)?;
    let rc = schedule::local_schedule(instance, &rc_profile, epsilon, schedule::DEFAULT_S_TOLERANCE)?;
    let (t_driven, t_rc) = (driven.total_time(), rc.total_time());
    let t_end = t_driven.max(t_rc);
    let mut grid: Vec<f64> = (0..=FIG2_INTERVALS)
        .map(|k| t_end * k as f64 / FIG2_INTERVALS as f64)
        .collect();
    grid.push(t_driven.min(t_rc));
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    let mut meta = TableMetadata::new("fig2", &[&driven_profile, &rc_profile]);
    meta.size = Some(instance.size());
    meta.epsilon = Some(epsilon);
    let mut table = FigureTable::new(&["t", "s_driven", "s_rc"], meta);
    let sample = |sch: &schedule::Schedule, t: f64| (t <= sch.total_time()).then(|| sch.s_at(t));
    for t in grid {
        table.push(vec![Some(t), sample(&driven, t), sample(&rc, t)]);
    }
    Ok(table)
}

/// Runtimes of the driven and plain paths by quadrature.
pub fn figure3_data(qubits: &[u32], epsilon: f64, mode: Execution) -> Result<FigureTable> {
    let driven = DrivingProfile::Quadratic;
    let rc = DrivingProfile::None;
    let rows = exec::map(mode, qubits, |&n| -> Result<Vec<Option<f64>>> {
        let inst = SearchInstance::new(n)?;
        let td = schedule::runtime_quadrature(&inst, &driven, epsilon)?.total_time;
        let tr = schedule::runtime_quadrature(&inst, &rc, epsilon)?.total_time;
        Ok(vec![Some(inst.size_f64()), Some(td), Some(tr), Some(inst.size_f64().sqrt())])
    });
    let mut meta = TableMetadata::new("fig3", &[&driven, &rc]);
    meta.qubits = Some(qubits.to_vec());
    meta.epsilon = Some(epsilon);
    let mut table = FigureTable::new(&["N", "T_driven", "T_rc", "sqrtN"], meta);
    for row in rows {
        table.push(row?);
    }
    Ok(table)
}

/// Writes `fig1_N<k>.csv`, `fig2_N<k>.csv` (N = 64, eps = 1 for Fig. 2)
/// and `fig3.csv` into `dir`.
pub fn write_figures(dir: &Path, mode: Execution) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let inst = SearchInstance::new(6)?;
    let qubits: Vec<u32> = FIG3_QUBITS.collect();
    let tables = [
        figure1_data(&inst)?,
        figure2_data(&inst, 1.0)?,
        figure3_data(&qubits, 1.0, mode)?,
    ];
    let mut paths = Vec::new();
    for table in &tables {
        let name = match table.metadata.size {
            Some(size) => format!("{}_N{size}.csv", table.figure_id()),
            None => format!("{}.csv", table.figure_id()),
        };
        let path = dir.join(name);
        table.write_csv(&path)?;
        paths.push(path);
    }
    Ok(paths)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::invalid(format!("unknown format '{other}' (expected csv or json)"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub qubits: Vec<u32>,
    pub profiles: Vec<DrivingProfile>,
    pub epsilon: f64,
    pub methods: Vec<RuntimeMethod>,
    /// `None` keeps the result in memory only.
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
}

impl SweepConfig {
    pub fn new(qubits: Vec<u32>, profiles: Vec<DrivingProfile>, epsilon: f64) -> Self {
        Self {
            qubits,
            profiles,
            epsilon,
            methods: vec![RuntimeMethod::Quadrature],
            output: None,
            format: OutputFormat::Csv,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.qubits.is_empty() {
            return Err(Error::invalid("sweep needs at least one n"));
        }
        if self.profiles.is_empty() || self.methods.is_empty() {
            return Err(Error::invalid("sweep needs at least one profile and one method"));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::invalid(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        Ok(())
    }
}

/// One sweep cell: a record, or the error that prevented it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub n: u32,
    pub profile: String,
    pub method: RuntimeMethod,
    pub record: Option<RuntimeRecord>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub metadata: TableMetadata,
    pub entries: Vec<SweepEntry>,
}

impl SweepResult {
    pub fn records(&self) -> Vec<RuntimeRecord> {
        self.entries.iter().filter_map(|e| e.record.clone()).collect()
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut out = String::new();
        writeln!(out, "# {}", serde_json::to_string(&self.metadata)?).expect("string write");
        out.push_str("n,N,profile,method,epsilon,T,g_min,error\n");
        for e in &self.entries {
            let line = match &e.record {
                Some(r) => format!(
                    "{},{},{},{},{},{},{},",
                    r.n,
                    r.size,
                    r.profile,
                    r.method.name(),
                    format_real(r.epsilon),
                    format_real(r.total_time),
                    format_real(r.g_min)
                ),
                None => format!(
                    "{},,{},{},{},,,{}",
                    e.n,
                    e.profile,
                    e.method.name(),
                    format_real(self.metadata.epsilon.unwrap_or(f64::NAN)),
                    csv_quote(e.error.as_deref().unwrap_or(""))
                ),
            };
            out.push_str(&line);
            out.push('\n');
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn render(&self, format: OutputFormat) -> Result<String> {
        match format {
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Json => self.to_json(),
        }
    }
}

fn csv_quote(field: &str) -> String {
    if field.contains([',', '"', '\n']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// Runs every (n, profile, method) cell, in parallel under `mode`. Cells
/// that fail keep an error entry and the sweep continues. Entries are
/// sorted by profile, then n, then method; the file is written if the
/// config names one.
pub fn run_sweep(config: &SweepConfig, mode: Execution) -> Result<SweepResult> {
    config.validate()?;
    let mut cells = Vec::new();
    for profile in &config.profiles {
        for &n in &config.qubits {
            for &method in &config.methods {
                cells.push((profile, n, method));
            }
        }
    }
    let mut entries = exec::map(mode, &cells, |&(profile, n, method)| {
        let result = SearchInstance::new(n).and_then(|inst| schedule::runtime(&inst, profile, config.epsilon, method));
        let (record, error) = match result {
            Ok(r) => (Some(r), None),
            Err(e) => (None, Some(e.to_string())),
        };
        SweepEntry {
            n,
            profile: profile.label(),
            method,
            record,
            error,
        }
    });
    entries.sort_by(|a, b| (&a.profile, a.n, a.method).cmp(&(&b.profile, b.n, b.method)));

    let profiles: Vec<&DrivingProfile> = config.profiles.iter().collect();
    let mut metadata = TableMetadata::new("sweep", &profiles);
    metadata.qubits = Some(config.qubits.clone());
    metadata.epsilon = Some(config.epsilon);
    let result = SweepResult { metadata, entries };
    if let Some(path) = &config.output {
        fs::write(path, result.render(config.format)?)?;
    }
    Ok(result)
}

/// Least-squares line through `(ln x, ln y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogLogFit {
    pub exponent: f64,
    /// `exp(intercept)`, so `y ~ prefactor * x^exponent`.
    pub prefactor: f64,
    pub points: usize,
}

pub fn fit_log_log(points: &[(f64, f64)]) -> Result<LogLogFit> {
    if points.len() < 2 {
        return Err(Error::invalid("a log-log fit needs at least two points"));
    }
    if points.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0)) {
        return Err(Error::invalid("log-log fit requires positive data"));
    }
    let n = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|&(x, y)| (x.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("log-log fit needs at least two distinct x values"));
    }
    let exponent = sxy / sxx;
    Ok(LogLogFit {
        exponent,
        prefactor: (my - exponent * mx).exp(),
        points: points.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileScaling {
    pub profile: String,
    pub epsilon: f64,
    pub fit: LogLogFit,
    /// `epsilon * T` at the largest `N` in the window.
    pub largest_size_runtime: f64,
    /// Quadrature at `x = 0` with reference-constant deltas.
    pub asymptote: Option<AsymptoticRuntime>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub fit_min_size: u64,
    pub profiles: Vec<ProfileScaling>,
}

impl ScalingReport {
    pub fn get(&self, profile: &str) -> Option<&ProfileScaling> {
        self.profiles.iter().find(|p| p.profile == profile)
    }

    /// Human-readable summary.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for p in &self.profiles {
            let _ = writeln!(
                out,
                "{}: T ~ {:.6} N^{:.6} over {} points (N >= {}); eps*T at largest N = {:.12}",
                p.profile, p.fit.prefactor, p.fit.exponent, p.fit.points, self.fit_min_size, p.largest_size_runtime
            );
            if let Some(a) = &p.asymptote {
                match a.value {
                    Some(v) => {
                        let _ = writeln!(out, "  x->0 quadrature: {v:.15}");
                        for c in &a.comparisons {
                            let _ = writeln!(out, "  vs {} = {:.15}: delta {:+.3e}", c.label, c.constant, c.delta);
                        }
                    }
                    None => {
                        let _ = writeln!(out, "  x->0 limit: {:?}", a.status);
                    }
                }
            }
        }
        out
    }
}

/// Per-profile log-log fits of `T` against `N` over `N >= 2^10`, plus the
/// `x -> 0` asymptote for built-in profiles. Each profile needs at least
/// four records in the window.
pub fn scaling_report(records: &[RuntimeRecord]) -> Result<ScalingReport> {
    let mut groups: BTreeMap<(String, u64), Vec<&RuntimeRecord>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.size >= FIT_MIN_SIZE) {
        groups.entry((r.profile.clone(), r.epsilon.to_bits())).or_default().push(r);
    }
    if groups.is_empty() {
        return Err(Error::invalid(format!("no records with N >= {FIT_MIN_SIZE}")));
    }
    let mut profiles = Vec::new();
    for ((label, eps_bits), mut group) in groups {
        group.sort_by_key(|r| r.size);
        group.dedup_by_key(|r| r.size);
        if group.len() < 4 {
            return Err(Error::invalid(format!(
                "profile {label} has {} records with N >= {FIT_MIN_SIZE}; need 4",
                group.len()
            )));
        }
        let epsilon = f64::from_bits(eps_bits);
        let fit = fit_log_log(&group.iter().map(|r| (r.size as f64, r.total_time)).collect::<Vec<_>>())?;
        let asymptote = match label.parse::<DrivingProfile>() {
            Ok(p) if p.kind() != ProfileKind::Custom => Some(asymptotic_runtime(&p)?),
            _ => None,
        };
        profiles.push(ProfileScaling {
            profile: label,
            epsilon,
            fit,
            largest_size_runtime: group.last().expect("non-empty").total_time * epsilon,
            asymptote,
        });
    }
    Ok(ScalingReport {
        fit_min_size: FIT_MIN_SIZE,
        profiles,
    })
}
