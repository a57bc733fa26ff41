//! CSV time series written by a dedicated thread fed through a bounded queue.
//!
//! Every row is flushed as a whole, and a `# termination: ...` footer is always
//! appended, also when the writer is dropped without an explicit finish.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::mpsc::{sync_channel, SyncSender};
use std::thread::JoinHandle;

use crate::error::{Error, Result};

const QUEUE_DEPTH: usize = 64;

enum Message {
    Row(Vec<f64>),
    Footer(String),
}

pub struct TimeseriesWriter {
    path: PathBuf,
    columns: usize,
    tx: Option<SyncSender<Message>>,
    handle: Option<JoinHandle<std::io::Result<()>>>,
}

/// Formats a value with 17 significant digits.
pub fn format_value(x: f64) -> String {
    format!("{x:.16e}")
}

impl TimeseriesWriter {
    pub fn create(path: &Path, header: &[String]) -> Result<Self> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        writeln!(out, "{}", header.join(",")).and_then(|_| out.flush()).map_err(|e| Error::io(path, e))?;
        let (tx, rx) = sync_channel::<Message>(QUEUE_DEPTH);
        let handle = std::thread::spawn(move || -> std::io::Result<()> {
            for msg in rx {
                match msg {
                    Message::Row(values) => {
                        let line: Vec<String> = values.into_iter().map(format_value).collect();
                        writeln!(out, "{}", line.join(","))?;
                    }
                    Message::Footer(reason) => {
                        writeln!(out, "# termination: {reason}")?;
                        out.flush()?;
                        break;
                    }
                }
                out.flush()?;
            }
            Ok(())
        });
        Ok(TimeseriesWriter {
            path: path.to_path_buf(),
            columns: header.len(),
            tx: Some(tx),
            handle: Some(handle),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn push(&mut self, values: Vec<f64>) -> Result<()> {
        if values.len() != self.columns {
            return Err(Error::State(format!(
                "row has {} values, header has {} columns",
                values.len(),
                self.columns
            )));
        }
        let tx = self.tx.as_ref().expect("writer is open");
        if tx.send(Message::Row(values)).is_err() {
            return Err(self.join_error());
        }
        Ok(())
    }

    /// Writes the footer and waits for the writer thread.
    pub fn finish(mut self, reason: &str) -> Result<()> {
        self.close(reason)
    }

    fn close(&mut self, reason: &str) -> Result<()> {
        let Some(tx) = self.tx.take() else { return Ok(()) };
        let _ = tx.send(Message::Footer(reason.to_string()));
        drop(tx);
        match self.handle.take().map(|h| h.join()) {
            Some(Ok(Ok(()))) | None => Ok(()),
            Some(Ok(Err(e))) => Err(Error::io(&self.path, e)),
            Some(Err(_)) => Err(Error::State("time-series writer thread panicked".into())),
        }
    }

    fn join_error(&mut self) -> Error {
        self.tx = None;
        match self.handle.take().map(|h| h.join()) {
            Some(Ok(Err(e))) => Error::io(&self.path, e),
            _ => Error::State("time-series writer stopped".into()),
        }
    }
}

impl Drop for TimeseriesWriter {
    fn drop(&mut self) {
        let reason = if std::thread::panicking() { "interrupted (panic)" } else { "interrupted" };
        let _ = self.close(reason);
    }
}

/// Reads a time-series CSV, skipping comment lines. Returns the header and the rows.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty());
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| Error::Data(format!("{} has no header row", path.display())))?
        .split(',')
        .map(|s| s.trim().to_string())
        .collect();
    let mut rows = Vec::new();
    for (i, l) in lines.enumerate() {
        let row: std::result::Result<Vec<f64>, _> = l.split(',').map(|s| s.trim().parse::<f64>()).collect();
        let row = row.map_err(|e| Error::Data(format!("{} row {}: {e}", path.display(), i + 1)))?;
        if row.len() != header.len() {
            return Err(Error::Data(format!("{} row {} has {} values", path.display(), i + 1, row.len())));
        }
        rows.push(row);
    }
    Ok((header, rows))
}

/// The termination reason recorded in the footer, if any.
pub fn termination_reason(path: &Path) -> Result<Option<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .rev()
        .find_map(|l| l.strip_prefix("# termination: ").map(str::to_string)))
}
