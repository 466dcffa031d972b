//! Output collection. Commands build every artifact in memory; a single writer
//! then emits them in order, followed by the manifest.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::Context;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::ExperimentConfig;
use crate::Command;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.to_string(),
            passed,
            detail: detail.into(),
        }
    }
}

/// Everything a command produces before anything touches the disk.
#[derive(Debug, Default)]
pub struct Artifacts {
    files: Vec<(String, Vec<u8>)>,
    pub checks: Vec<Check>,
}

impl Artifacts {
    /// CSV with two comment lines (command and resolved config) ahead of the header.
    pub fn csv<R: Serialize>(
        &mut self,
        name: &str,
        cmd: Command,
        cfg: &ExperimentConfig,
        rows: impl IntoIterator<Item = R>,
    ) -> anyhow::Result<()> {
        let mut buf = format!("# command: {}\n# config: {}\n", cmd.name(), cfg.to_json()).into_bytes();
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            for row in rows {
                w.serialize(row)?;
            }
            w.flush()?;
        }
        self.files.push((name.to_string(), buf));
        Ok(())
    }

    /// CSV with a header known only at run time.
    pub fn table(
        &mut self,
        name: &str,
        cmd: Command,
        cfg: &ExperimentConfig,
        header: &[String],
        rows: &[Vec<String>],
    ) -> anyhow::Result<()> {
        let mut buf = format!("# command: {}\n# config: {}\n", cmd.name(), cfg.to_json()).into_bytes();
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            w.write_record(header)?;
            for row in rows {
                w.write_record(row)?;
            }
            w.flush()?;
        }
        self.files.push((name.to_string(), buf));
        Ok(())
    }

    pub fn text(&mut self, name: &str, body: String) {
        self.files.push((name.to_string(), body.into_bytes()));
    }

    /// summary.json: command, config, results and checks under a schema version.
    pub fn summary(&mut self, cmd: Command, cfg: &ExperimentConfig, results: Value) -> anyhow::Result<()> {
        let doc = json!({
            "schema_version": SCHEMA_VERSION,
            "command": cmd.name(),
            "config": cfg,
            "results": results,
            "checks": self.checks,
            "passed": self.passed(),
        });
        let mut body = serde_json::to_string_pretty(&doc)?;
        body.push('\n');
        self.text("summary.json", body);
        Ok(())
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// Writes all files, then manifest.json listing them.
    pub fn write(
        self,
        out: &Path,
        cmd: Command,
        cfg: &ExperimentConfig,
        wall_clock: Duration,
    ) -> anyhow::Result<Vec<PathBuf>> {
        fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
        let mut listed = Vec::with_capacity(self.files.len());
        let mut written = Vec::with_capacity(self.files.len() + 1);
        for (name, bytes) in &self.files {
            anyhow::ensure!(!bytes.is_empty(), "refusing to write empty artifact {name}");
            let path = out.join(name);
            fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
            listed.push(json!({ "path": name, "bytes": bytes.len() }));
            written.push(path);
        }
        let manifest = json!({
            "schema_version": SCHEMA_VERSION,
            "tool_version": env!("CARGO_PKG_VERSION"),
            "command": cmd.name(),
            "config": cfg,
            "wall_clock_seconds": wall_clock.as_secs_f64(),
            "files": listed,
            "checks": self.checks,
            "passed": self.passed(),
        });
        let path = out.join("manifest.json");
        fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")
            .with_context(|| format!("writing {}", path.display()))?;
        written.push(path);
        Ok(written)
    }
}

/// One gnuplot panel: title, axes and the `plot` clause.
pub struct Panel {
    pub title: String,
    pub xlabel: &'static str,
    pub ylabel: &'static str,
    pub logscale_y: bool,
    pub plot: String,
}

/// Script rendering the panels to `<stem>.png`; data columns are read by name.
pub fn gnuplot_script(stem: &str, panels: &[Panel]) -> String {
    let mut s = format!(
        "# gnuplot {stem}.gp\nset datafile separator ','\nset datafile commentschars '#'\nset key autotitle columnhead\n\
         set terminal pngcairo size 900,{} noenhanced\nset output '{stem}.png'\nset multiplot layout {},1\n",
        360 * panels.len(),
        panels.len()
    );
    for p in panels {
        s.push_str(&format!(
            "set title '{}'\nset xlabel '{}'\nset ylabel '{}'\n{}set grid\nplot {}\n",
            p.title,
            p.xlabel,
            p.ylabel,
            if p.logscale_y {
                "set logscale y\n"
            } else {
                "unset logscale y\n"
            },
            p.plot
        ));
    }
    s.push_str("unset multiplot\n");
    s
}
