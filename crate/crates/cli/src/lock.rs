use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::CliError;

pub const LOCK_FILE: &str = ".citegraph.lock";

/// Exclusive hold on an artifact directory, released on drop.
#[derive(Debug)]
pub struct DirLock {
    path: PathBuf,
}

impl DirLock {
    pub fn acquire(dir: &Path, stage: &str) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let path = dir.join(LOCK_FILE);
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                writeln!(f, "pid {} stage {stage}", std::process::id()).map_err(|e| CliError::io(&path, e))?;
                Ok(DirLock { path })
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                let holder = std::fs::read_to_string(&path)
                    .map(|s| s.trim().to_string())
                    .unwrap_or_else(|_| "unknown holder".into());
                Err(CliError::Locked { path, holder })
            }
            Err(e) => Err(CliError::io(&path, e)),
        }
    }
}

impl Drop for DirLock {
    fn drop(&mut self) {
        let _ = std::fs::remove_file(&self.path);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn second_holder_is_refused_until_release() {
        let dir = tempfile::tempdir().unwrap();
        let a = DirLock::acquire(dir.path(), "ingest").unwrap();
        let e = DirLock::acquire(dir.path(), "cluster").unwrap_err();
        assert!(e.to_string().contains("stage ingest"), "{e}");
        assert_eq!(e.exit_code(), 4);
        drop(a);
        DirLock::acquire(dir.path(), "cluster").unwrap();
    }
}
