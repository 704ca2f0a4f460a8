//! Result sinks: stdout, or files in an output directory written through a
//! temporary file and an atomic rename.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use serde::Serialize;
use tempfile::NamedTempFile;

use crate::CliError;

pub struct Sink {
    dir: Option<PathBuf>,
}

impl Sink {
    pub fn new(dir: Option<PathBuf>) -> Self {
        Sink { dir }
    }

    pub fn is_dir(&self) -> bool {
        self.dir.is_some()
    }

    /// Streams text to `name` inside the output directory, or to stdout.
    pub fn text<F>(&self, name: &str, body: F) -> Result<(), CliError>
    where
        F: FnOnce(&mut dyn Write) -> io::Result<()>,
    {
        match &self.dir {
            None => {
                let stdout = io::stdout();
                let mut w = BufWriter::new(stdout.lock());
                body(&mut w)?;
                w.flush()?;
                Ok(())
            }
            Some(dir) => {
                fs::create_dir_all(dir)?;
                let tmp = NamedTempFile::new_in(dir)?;
                {
                    let mut w = BufWriter::new(tmp.as_file());
                    body(&mut w)?;
                    w.flush()?;
                }
                tmp.as_file().sync_all()?;
                tmp.persist(dir.join(name)).map_err(|e| CliError::Io(e.to_string()))?;
                Ok(())
            }
        }
    }

    pub fn json<T: Serialize + ?Sized>(&self, name: &str, value: &T) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
        self.text(name, |w| writeln!(w, "{text}"))
    }
}
