//! Output files of one run, the run manifest, and cleanup on failure.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::config::PipelineConfig;
use crate::error::{PipelineError, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

/// Files created by a run. When the run fails they are removed again, along
/// with the output directory if the run created it.
#[derive(Debug)]
pub struct OutputSet {
    dir: PathBuf,
    created_dir: bool,
    files: Vec<PathBuf>,
}

impl OutputSet {
    pub fn new(dir: &Path) -> Result<Self> {
        let created_dir = !dir.exists();
        fs::create_dir_all(dir).map_err(|e| PipelineError::io(dir, e))?;
        Ok(OutputSet {
            dir: dir.to_path_buf(),
            created_dir,
            files: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// Creates `name` in the output directory and hands a buffered writer to
    /// `body`. The file is registered before writing starts, so a failure
    /// halfway still gets it removed.
    pub fn write(&mut self, name: &str, body: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>) -> Result<()> {
        let path = self.path(name);
        let file = File::create(&path).map_err(|e| PipelineError::io(&path, e))?;
        if !self.files.contains(&path) {
            self.files.push(path.clone());
        }
        let mut w = BufWriter::new(file);
        body(&mut w)
            .and_then(|()| w.flush())
            .map_err(|e| PipelineError::io(&path, e))
    }

    /// File names written so far, in creation order.
    pub fn names(&self) -> Vec<String> {
        self.files
            .iter()
            .filter_map(|p| p.file_name())
            .map(|n| n.to_string_lossy().into_owned())
            .collect()
    }

    /// Deletes every file written by this run.
    pub fn remove_all(&mut self) {
        for f in self.files.drain(..) {
            if let Err(e) = fs::remove_file(&f) {
                log::warn!("could not remove partial output {}: {e}", f.display());
            }
        }
        if self.created_dir {
            // Only succeeds when nothing else was put there.
            let _ = fs::remove_dir(&self.dir);
        }
    }
}

/// What a run read, produced and counted. Everything but `timings_ms` is
/// reproducible from the inputs and configuration.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: String,
    pub config: PipelineConfig,
    pub inputs: BTreeMap<String, String>,
    pub outputs: Vec<String>,
    pub counts: BTreeMap<String, u64>,
    pub metrics: BTreeMap<String, f64>,
    pub timings_ms: BTreeMap<String, u64>,
}

impl Manifest {
    pub fn new(subcommand: &str, config: &PipelineConfig) -> Self {
        Manifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            subcommand: subcommand.to_string(),
            config: config.clone(),
            inputs: BTreeMap::new(),
            outputs: Vec::new(),
            counts: BTreeMap::new(),
            metrics: BTreeMap::new(),
            timings_ms: BTreeMap::new(),
        }
    }

    pub fn input(&mut self, name: &str, path: &Path) {
        self.inputs.insert(name.to_string(), path.display().to_string());
    }

    pub fn count(&mut self, name: &str, n: usize) {
        self.counts.insert(name.to_string(), n as u64);
    }

    pub fn metric(&mut self, name: &str, v: f64) {
        if v.is_finite() {
            self.metrics.insert(name.to_string(), v);
        }
    }

    /// Runs `f` and records its wall time under `stage`.
    pub fn timed<T>(&mut self, stage: &str, f: impl FnOnce(&mut Self) -> T) -> T {
        let start = Instant::now();
        let out = f(self);
        self.timings_ms
            .insert(stage.to_string(), start.elapsed().as_millis() as u64);
        out
    }
}
