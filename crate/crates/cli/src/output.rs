use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};

use crate::spec::ExperimentSpec;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// `# fragsim <version> spec=<sha256> seed=<seed> created=<unix seconds>`
pub fn header_line(spec: &ExperimentSpec) -> String {
    let created = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format!(
        "# fragsim {VERSION} spec={} seed={} created={created}",
        spec.hash(),
        spec.seed()
    )
}

pub fn meta_json(spec: &ExperimentSpec) -> serde_json::Value {
    let created = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    serde_json::json!({
        "version": VERSION,
        "spec": spec.hash(),
        "seed": spec.seed(),
        "created": created,
        "config": spec,
    })
}

/// Writes a finished artifact to `path`, or to stdout.
pub fn emit(path: Option<&str>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, bytes).with_context(|| format!("writing {p}"))?,
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()?;
        }
    }
    Ok(())
}

pub fn open_in(dir: &Path, name: &str) -> Result<Box<dyn Write>> {
    let path = dir.join(name);
    Ok(Box::new(BufWriter::new(
        File::create(&path).with_context(|| format!("creating {}", path.display()))?,
    )))
}

/// Writes a one-line JSON summary to stdout, or to stderr when stdout carries
/// the artifact itself.
pub fn summary(spec: &ExperimentSpec, value: &serde_json::Value) -> Result<()> {
    let line = serde_json::to_string(value)?;
    if spec.out.is_some() {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
    Ok(())
}
