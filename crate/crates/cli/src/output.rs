use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use seqresp::noise::Histogram;
use seqresp::DensityGrid;

use crate::error::CliResult;

/// Collects every file a command writes, relative to the output directory.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    written: Vec<PathBuf>,
}

impl OutputDir {
    pub fn create(root: &Path) -> CliResult<Self> {
        fs::create_dir_all(root)?;
        Ok(Self {
            root: root.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    fn open(&mut self, rel: &str) -> CliResult<BufWriter<File>> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        self.written.push(PathBuf::from(rel));
        Ok(BufWriter::new(File::create(path)?))
    }

    pub fn json<T: Serialize>(&mut self, rel: &str, value: &T) -> CliResult<()> {
        let mut w = self.open(rel)?;
        serde_json::to_writer_pretty(&mut w, value)?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }

    pub fn grid(&mut self, rel: &str, grid: &DensityGrid) -> CliResult<()> {
        let mut w = self.open(rel)?;
        grid.write_csv(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn histogram(&mut self, rel: &str, h: &Histogram) -> CliResult<()> {
        let mut w = self.open(rel)?;
        h.write_csv(&mut w)?;
        w.flush()?;
        Ok(())
    }

    /// CSV with a header line; cells are written verbatim.
    pub fn table(&mut self, rel: &str, header: &[&str], rows: &[Vec<String>]) -> CliResult<()> {
        let mut w = self.open(rel)?;
        writeln!(w, "{}", header.join(","))?;
        for row in rows {
            writeln!(w, "{}", row.join(","))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn text(&mut self, rel: &str, body: &str) -> CliResult<()> {
        let mut w = self.open(rel)?;
        w.write_all(body.as_bytes())?;
        w.flush()?;
        Ok(())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

/// Per-run provenance. The only file whose content varies between identical runs.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_path: String,
    pub config_sha256: String,
    pub seqresp_version: &'static str,
    pub cli_version: &'static str,
    pub threads: usize,
    pub wall_time_seconds: f64,
    pub status: String,
    pub exit_code: i32,
    pub outputs: Vec<PathBuf>,
}

/// Two-column line plot of `files` (relative to the script location).
pub fn gnuplot_lines(title: &str, xlabel: &str, ylabel: &str, files: &[(&str, &str)], logscale_y: bool) -> String {
    let mut s = String::new();
    s.push_str("set datafile separator ','\n");
    s.push_str("set key autotitle columnhead\n");
    s.push_str(&format!("set title '{title}'\nset xlabel '{xlabel}'\nset ylabel '{ylabel}'\n"));
    if logscale_y {
        s.push_str("set logscale y\n");
    }
    let parts: Vec<String> = files
        .iter()
        .map(|(file, using)| format!("'{file}' using {using} with lines"))
        .collect();
    s.push_str(&format!("plot {}\n", parts.join(", \\\n     ")));
    s
}
