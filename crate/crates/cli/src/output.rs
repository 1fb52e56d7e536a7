use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{CliError, Result};

/// Writes to `path` through a temporary file in the same directory that is
/// renamed into place, or to stdout when `path` is `None`.
pub fn write_atomic(path: Option<&Path>, body: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<()> {
    match path {
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            body(&mut lock).map_err(|e| CliError::io("writing to stdout", e))?;
            lock.flush().map_err(|e| CliError::io("writing to stdout", e))
        }
        Some(path) => {
            let display = path.display().to_string();
            let dir = match path.parent() {
                Some(p) if !p.as_os_str().is_empty() => p,
                _ => Path::new("."),
            };
            let tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(&display, e))?;
            {
                let mut w = BufWriter::new(tmp.as_file());
                body(&mut w).map_err(|e| CliError::io(&display, e))?;
                w.flush().map_err(|e| CliError::io(&display, e))?;
            }
            tmp.as_file().sync_all().map_err(|e| CliError::io(&display, e))?;
            tmp.persist(path).map_err(|e| CliError::io(&display, e.error))?;
            Ok(())
        }
    }
}

pub fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::io("serializing JSON", e.into()))?;
    write_atomic(path, |w| writeln!(w, "{text}"))
}

/// Prints a compact JSON summary line to stdout.
pub fn print_summary<T: Serialize>(value: &T) -> Result<()> {
    let text = serde_json::to_string(value).map_err(|e| CliError::io("serializing JSON", e.into()))?;
    println!("{text}");
    Ok(())
}
