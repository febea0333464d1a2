//! `pdd solve`: one instance, one results file, line-buffered traces.

use std::fs::{self, File};
use std::io::{LineWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde_json::json;

use pdd_core::CSV_HEADER;

use crate::app::{self, RunOptions, RunOutcome};
use crate::args::{App, SolveArgs};
use crate::config;

/// One trace file per restart, each opened on its first record so the CSV
/// is readable while the solver is still running.
struct TraceSink {
    dir: PathBuf,
    per_restart: bool,
    files: Vec<Option<LineWriter<File>>>,
    error: Option<std::io::Error>,
}

impl TraceSink {
    fn new(dir: &Path, per_restart: bool) -> Self {
        Self { dir: dir.to_path_buf(), per_restart, files: Vec::new(), error: None }
    }

    fn path(&self, restart: usize) -> PathBuf {
        if self.per_restart {
            self.dir.join(format!("trace_restart{restart}.csv"))
        } else {
            self.dir.join("trace.csv")
        }
    }

    fn push(&mut self, restart: usize, row: &str) {
        if self.error.is_some() {
            return;
        }
        if let Err(e) = self.try_push(restart, row) {
            self.error = Some(e);
        }
    }

    fn try_push(&mut self, restart: usize, row: &str) -> std::io::Result<()> {
        if self.files.len() <= restart {
            self.files.resize_with(restart + 1, || None);
        }
        if self.files[restart].is_none() {
            let mut w = LineWriter::new(File::create(self.path(restart))?);
            writeln!(w, "{CSV_HEADER}")?;
            self.files[restart] = Some(w);
        }
        let w = self.files[restart].as_mut().expect("opened above");
        writeln!(w, "{row}")
    }

    fn finish(mut self) -> Result<()> {
        for w in self.files.iter_mut().flatten() {
            w.flush()?;
        }
        match self.error {
            Some(e) => Err(e).context("writing trace"),
            None => Ok(()),
        }
    }
}

pub fn run(args: &SolveArgs) -> Result<RunOutcome> {
    let inst = app::resolve(args.app, args.instance.as_deref(), &args.gen, args.truth.as_deref(), args.seed)?;
    let cfg = config::build(inst.default_config(), &args.config, args.seed)?;
    log::info!("{}: {}", args.app.name(), serde_json::to_string(&cfg)?);
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;

    let per_restart = args.app == App::Volmin;
    let mut sink = TraceSink::new(&args.out, per_restart);
    let opts = RunOptions { restarts: args.config.restarts, prescale: args.config.prescale };
    let outcome = app::run(&inst, &cfg, opts, |r, rec| sink.push(r, &rec.csv_row()));
    sink.finish()?;
    let outcome = outcome?;

    if per_restart {
        let mut w = LineWriter::new(File::create(args.out.join("trace.csv"))?);
        outcome.trace.write_csv(&mut w)?;
        w.flush()?;
    }
    let doc = json!({
        "app": args.app.name(),
        "seed": args.seed,
        "config": cfg,
        "result": outcome.result,
    });
    fs::write(args.out.join("result.json"), serde_json::to_string_pretty(&doc)? + "\n")?;
    Ok(outcome)
}
