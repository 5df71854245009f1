//! Capacity sweeps: the cross product of backend, d, n, k and m lists, one
//! experiment per cell, streamed row by row.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use vsa_core::capacity::{run_experiment, MAX_EXPERIMENT_TENSOR_VALUES};
use vsa_core::verify::CheckResult;
use vsa_core::{Backend, ExperimentConfig, ExperimentResult};

use crate::{io_err, open_output, CapacityArgs, CliError, CliResult, Format};

pub const CSV_HEADER: &str = "backend,d,n,k,m,trials,seed,accuracy,tie_rate,bound,match_mean,match_var,spurious_var";

/// Upper limit on the number of cells in one sweep.
pub const MAX_CELLS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub backends: Vec<Backend>,
    pub d: Vec<usize>,
    pub n: Vec<usize>,
    pub k: Vec<usize>,
    pub m: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub format: Format,
    pub out: Option<PathBuf>,
}

impl TryFrom<&CapacityArgs> for SweepSpec {
    type Error = CliError;

    fn try_from(a: &CapacityArgs) -> CliResult<Self> {
        let spec = SweepSpec {
            backends: a.backend.iter().map(|&b| b.into()).collect(),
            d: a.d.clone(),
            n: a.n.clone(),
            k: a.k.clone(),
            m: a.m.clone(),
            trials: a.trials,
            seed: a.common.seed,
            format: a.format,
            out: a.common.out.clone(),
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Cell that is skipped instead of run.
#[derive(Debug, Clone, PartialEq)]
pub struct Skipped {
    pub config: ExperimentConfig,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Run(ExperimentConfig),
    Skip(Skipped),
}

impl SweepSpec {
    pub fn cell_count(&self) -> usize {
        [
            self.backends.len(),
            self.d.len(),
            self.n.len(),
            self.k.len(),
            self.m.len(),
        ]
        .iter()
        .try_fold(1usize, |acc, &x| acc.checked_mul(x))
        .unwrap_or(usize::MAX)
    }

    /// Rejects empty lists, oversized sweeps and any cell that is invalid
    /// for a reason other than tensor storage size.
    pub fn validate(&self) -> CliResult<()> {
        for (name, len) in [
            ("backend", self.backends.len()),
            ("d", self.d.len()),
            ("n", self.n.len()),
            ("k", self.k.len()),
            ("m", self.m.len()),
        ] {
            if len == 0 {
                return Err(CliError::Invalid(format!("--{name} needs at least one value")));
            }
        }
        let cells = self.cell_count();
        if cells > MAX_CELLS {
            return Err(CliError::Invalid(format!(
                "sweep has {cells} cells, limit is {MAX_CELLS}"
            )));
        }
        for cell in self.cells() {
            if let Cell::Run(cfg) = cell {
                cfg.validate()?;
            }
        }
        Ok(())
    }

    /// Cells in backend, d, n, k, m order. Every cell uses the base seed.
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::with_capacity(self.cell_count());
        for &backend in &self.backends {
            for &d in &self.d {
                for &n in &self.n {
                    for &k in &self.k {
                        for &m in &self.m {
                            let cfg = ExperimentConfig::new(backend, d, n, k, m, self.trials, self.seed);
                            out.push(match tensor_overflow(&cfg) {
                                Some(reason) => Cell::Skip(Skipped { config: cfg, reason }),
                                None => Cell::Run(cfg),
                            });
                        }
                    }
                }
            }
        }
        out
    }
}

fn tensor_overflow(cfg: &ExperimentConfig) -> Option<String> {
    if cfg.backend != Backend::Tensor {
        return None;
    }
    let len = (cfg.d as u128).checked_pow(cfg.n as u32);
    match len {
        Some(l) if l <= MAX_EXPERIMENT_TENSOR_VALUES => None,
        _ => Some(format!(
            "d^n = {}^{} exceeds {} tensor values",
            cfg.d, cfg.n, MAX_EXPERIMENT_TENSOR_VALUES
        )),
    }
}

/// One output row. Field order is the CSV column order.
#[derive(Debug, Clone, Serialize)]
pub struct Row {
    pub backend: Backend,
    pub d: usize,
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub trials: usize,
    pub seed: u64,
    pub accuracy: f64,
    pub tie_rate: f64,
    pub bound: f64,
    pub match_mean: f64,
    pub match_var: f64,
    pub spurious_var: f64,
}

impl From<&ExperimentResult> for Row {
    fn from(r: &ExperimentResult) -> Self {
        let c = &r.config;
        Row {
            backend: c.backend,
            d: c.d,
            n: c.n,
            k: c.k,
            m: c.m,
            trials: c.trials,
            seed: c.seed,
            accuracy: r.accuracy,
            tie_rate: r.tie_rate,
            bound: r.bound,
            match_mean: r.match_mean,
            match_var: r.match_var,
            spurious_var: r.spurious_var,
        }
    }
}

impl Row {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.backend,
            self.d,
            self.n,
            self.k,
            self.m,
            self.trials,
            self.seed,
            self.accuracy,
            self.tie_rate,
            self.bound,
            self.match_mean,
            self.match_var,
            self.spurious_var
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CellTiming {
    pub backend: Backend,
    pub d: usize,
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub skipped: bool,
    pub wall_time_secs: f64,
}

/// Run metadata kept out of the data file so rows stay reproducible.
#[derive(Debug, Clone, Serialize)]
pub struct SweepMeta {
    pub started_unix_secs: f64,
    pub finished_unix_secs: f64,
    pub trials: usize,
    pub seed: u64,
    pub cells_run: usize,
    pub cells_skipped: usize,
    pub cells: Vec<CellTiming>,
}

fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

/// Writes rows to `out` and skip warnings to `log`, flushing after each row.
pub fn write_sweep<W: Write, L: Write>(spec: &SweepSpec, out: &mut W, log: &mut L) -> CliResult<SweepMeta> {
    let wrap = |e: io::Error| CliError::Output {
        path: spec
            .out
            .as_ref()
            .map_or_else(|| "<stdout>".into(), |p| p.display().to_string()),
        source: e,
    };
    let started = unix_now();
    let mut meta = SweepMeta {
        started_unix_secs: started,
        finished_unix_secs: started,
        trials: spec.trials,
        seed: spec.seed,
        cells_run: 0,
        cells_skipped: 0,
        cells: Vec::new(),
    };
    match spec.format {
        Format::Csv => writeln!(out, "{CSV_HEADER}").map_err(wrap)?,
        Format::Json => write!(out, "[").map_err(wrap)?,
    }
    out.flush().map_err(wrap)?;

    let mut first = true;
    for cell in spec.cells() {
        match cell {
            Cell::Skip(s) => {
                let c = &s.config;
                writeln!(
                    log,
                    "warning,skipped,{},{},{},{},{},{}",
                    c.backend, c.d, c.n, c.k, c.m, s.reason
                )
                .map_err(wrap)?;
                log.flush().map_err(wrap)?;
                meta.cells_skipped += 1;
                meta.cells.push(CellTiming {
                    backend: c.backend,
                    d: c.d,
                    n: c.n,
                    k: c.k,
                    m: c.m,
                    skipped: true,
                    wall_time_secs: 0.0,
                });
            }
            Cell::Run(cfg) => {
                let result = run_experiment(&cfg)?;
                let row = Row::from(&result);
                match spec.format {
                    Format::Csv => writeln!(out, "{}", row.csv_line()).map_err(wrap)?,
                    Format::Json => {
                        let sep = if first { "\n" } else { ",\n" };
                        let obj = serde_json::to_string(&row).map_err(|e| wrap(e.into()))?;
                        write!(out, "{sep}  {obj}").map_err(wrap)?;
                    }
                }
                out.flush().map_err(wrap)?;
                first = false;
                meta.cells_run += 1;
                meta.cells.push(CellTiming {
                    backend: cfg.backend,
                    d: cfg.d,
                    n: cfg.n,
                    k: cfg.k,
                    m: cfg.m,
                    skipped: false,
                    wall_time_secs: result.wall_time_secs,
                });
            }
        }
    }
    if spec.format == Format::Json {
        writeln!(out, "{}]", if first { "" } else { "\n" }).map_err(wrap)?;
        out.flush().map_err(wrap)?;
    }
    meta.finished_unix_secs = unix_now();
    Ok(meta)
}

fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// Runs a sweep. With `--out`, skip warnings go to `<out>.log` and run
/// metadata to `<out>.meta.json`; otherwise warnings go to standard error.
pub fn run_sweep(spec: &SweepSpec) -> CliResult<()> {
    let out_path = spec.out.as_deref();
    let mut out = open_output(out_path)?;
    match out_path {
        Some(p) => {
            let log_path = sidecar(p, ".log");
            let log = File::create(&log_path).map_err(io_err(Some(&log_path)))?;
            let meta = write_sweep(spec, &mut out, &mut BufWriter::new(log))?;
            let meta_path = sidecar(p, ".meta.json");
            let f = File::create(&meta_path).map_err(io_err(Some(&meta_path)))?;
            let mut w = BufWriter::new(f);
            serde_json::to_writer_pretty(&mut w, &meta).map_err(|e| io_err(Some(&meta_path))(e.into()))?;
            writeln!(w).map_err(io_err(Some(&meta_path)))?;
            w.flush().map_err(io_err(Some(&meta_path)))?;
        }
        None => {
            write_sweep(spec, &mut out, &mut io::stderr())?;
        }
    }
    Ok(())
}

fn small_spec(seed: u64) -> SweepSpec {
    SweepSpec {
        backends: vec![Backend::Hadamard, Backend::Tensor],
        d: vec![16],
        n: vec![2],
        k: vec![2, 4],
        m: vec![5],
        trials: 50,
        seed,
        format: Format::Csv,
        out: None,
    }
}

fn sweep_bytes(spec: &SweepSpec) -> Result<Vec<u8>, String> {
    let mut buf = Vec::new();
    write_sweep(spec, &mut buf, &mut io::sink()).map_err(|e| e.to_string())?;
    Ok(buf)
}

/// Checks on the command-line output itself.
pub fn self_checks(seed: u64) -> Vec<CheckResult> {
    let spec = small_spec(seed);
    let first = sweep_bytes(&spec);
    let header = match &first {
        Ok(bytes) => {
            let text = String::from_utf8_lossy(bytes);
            let line = text.lines().next().unwrap_or_default().to_string();
            let rows = text.lines().count().saturating_sub(1);
            CheckResult {
                name: "cli.csv_header",
                passed: line == CSV_HEADER && rows == spec.cell_count(),
                detail: format!("header {:?}, {rows} rows", line),
            }
        }
        Err(e) => CheckResult {
            name: "cli.csv_header",
            passed: false,
            detail: e.clone(),
        },
    };
    let repro = match (&first, sweep_bytes(&spec)) {
        (Ok(a), Ok(b)) => CheckResult {
            name: "cli.byte_reproducibility",
            passed: *a == b,
            detail: format!("{} bytes, identical: {}", a.len(), *a == b),
        },
        (Err(e), _) => CheckResult {
            name: "cli.byte_reproducibility",
            passed: false,
            detail: e.clone(),
        },
        (_, Err(e)) => CheckResult {
            name: "cli.byte_reproducibility",
            passed: false,
            detail: e,
        },
    };
    vec![header, repro]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cells_follow_list_order() {
        let mut spec = small_spec(1);
        spec.d = vec![8, 16];
        let cells = spec.cells();
        assert_eq!(cells.len(), 8);
        let keys: Vec<(Backend, usize, usize)> = cells
            .iter()
            .map(|c| match c {
                Cell::Run(cfg) => (cfg.backend, cfg.d, cfg.k),
                Cell::Skip(s) => (s.config.backend, s.config.d, s.config.k),
            })
            .collect();
        assert_eq!(keys[0], (Backend::Hadamard, 8, 2));
        assert_eq!(keys[1], (Backend::Hadamard, 8, 4));
        assert_eq!(keys[2], (Backend::Hadamard, 16, 2));
        assert_eq!(keys[4], (Backend::Tensor, 8, 2));
    }

    #[test]
    fn oversized_tensor_cells_are_skipped() {
        let mut spec = small_spec(1);
        spec.backends = vec![Backend::Tensor];
        spec.d = vec![8192];
        spec.k = vec![2];
        assert!(spec.validate().is_ok());
        let mut out = Vec::new();
        let mut log = Vec::new();
        let meta = write_sweep(&spec, &mut out, &mut log).unwrap();
        assert_eq!(meta.cells_skipped, 1);
        assert_eq!(String::from_utf8(out).unwrap(), format!("{CSV_HEADER}\n"));
        assert!(String::from_utf8(log)
            .unwrap()
            .starts_with("warning,skipped,tensor,8192,2,2,5,"));
    }

    #[test]
    fn invalid_cells_are_rejected_up_front() {
        let mut spec = small_spec(1);
        spec.n = vec![1];
        assert!(spec.validate().is_err());
        let mut spec = small_spec(1);
        spec.backends = vec![Backend::Convolution];
        assert!(spec.validate().is_err());
        let mut spec = small_spec(1);
        spec.k = (1..=10_001).collect();
        assert!(matches!(spec.validate(), Err(CliError::Invalid(_))));
    }

    #[test]
    fn json_output_is_an_array_of_rows() {
        let mut spec = small_spec(3);
        spec.format = Format::Json;
        let bytes = sweep_bytes(&spec).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
        let rows = v.as_array().unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[0]["backend"], "hadamard");
        assert_eq!(rows[3]["k"], 4);
    }

    #[test]
    fn csv_rows_parse_back() {
        let bytes = sweep_bytes(&small_spec(4)).unwrap();
        let mut rdr = csv::Reader::from_reader(bytes.as_slice());
        let headers = rdr.headers().unwrap().iter().collect::<Vec<_>>().join(",");
        assert_eq!(headers, CSV_HEADER);
        for rec in rdr.records() {
            let rec = rec.unwrap();
            let acc: f64 = rec[7].parse().unwrap();
            assert!((0.0..=1.0).contains(&acc));
        }
    }

    #[test]
    fn self_checks_pass() {
        for c in self_checks(0) {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
