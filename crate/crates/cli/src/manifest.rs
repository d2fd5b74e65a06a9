use crate::config::{Config, DerivedSnapshot};
use serde::Serialize;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const SNAPSHOT_FILE: &str = "config.toml";

/// Record of one run. `config` together with `command` and `rng_seed` is
/// enough to reproduce every output.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool_version: &'static str,
    pub command: Vec<String>,
    pub config_path: Option<String>,
    pub rng_seed: u64,
    pub output_dir: String,
    pub wall_clock_seconds: f64,
    pub config: Config,
    pub derived: DerivedSnapshot,
    pub outputs: Vec<String>,
}

/// Files written into the output directory, in creation order.
pub struct Outputs {
    dir: PathBuf,
    files: Vec<String>,
}

impl Outputs {
    pub fn new(dir: &Path) -> std::io::Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn create(&mut self, name: &str) -> std::io::Result<BufWriter<File>> {
        let file = File::create(self.dir.join(name))?;
        self.files.push(name.to_string());
        Ok(BufWriter::new(file))
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> std::io::Result<()> {
        let mut w = self.create(name)?;
        w.write_all(text.as_bytes())?;
        w.flush()
    }

    pub fn files(&self) -> &[String] {
        &self.files
    }
}

impl RunManifest {
    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        let mut w = BufWriter::new(File::create(dir.join(MANIFEST_FILE))?);
        serde_json::to_writer_pretty(&mut w, self)?;
        writeln!(w)?;
        w.flush()
    }
}
