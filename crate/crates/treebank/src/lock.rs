use std::fs::OpenOptions;
use std::io::{ErrorKind, Write};
use std::path::{Path, PathBuf};
use std::thread;
use std::time::{Duration, Instant};

use crate::profile::ProfileError;

/// Seconds to wait for another writer before giving up.
pub const LOCK_TIMEOUT_ENV: &str = "GRAMMARCTL_PROFILE_LOCK_TIMEOUT";
const DEFAULT_TIMEOUT: Duration = Duration::from_secs(5);
const LOCK_FILE: &str = ".lock";

/// Exclusive writer lock on a profile directory, released on drop.
#[derive(Debug)]
pub struct ProfileLock {
    path: PathBuf,
}

fn timeout() -> Duration {
    std::env::var(LOCK_TIMEOUT_ENV)
        .ok()
        .and_then(|s| s.trim().parse::<f64>().ok())
        .filter(|s| s.is_finite() && *s >= 0.0)
        .map(Duration::from_secs_f64)
        .unwrap_or(DEFAULT_TIMEOUT)
}

impl ProfileLock {
    pub fn acquire(dir: &Path) -> Result<Self, ProfileError> {
        let path = dir.join(LOCK_FILE);
        let deadline = Instant::now() + timeout();
        loop {
            match OpenOptions::new().write(true).create_new(true).open(&path) {
                Ok(mut f) => {
                    let _ = writeln!(f, "{}", std::process::id());
                    return Ok(ProfileLock { path });
                }
                Err(e) if e.kind() == ErrorKind::AlreadyExists => {
                    if Instant::now() >= deadline {
                        return Err(ProfileError::Locked(dir.to_path_buf()));
                    }
                    thread::sleep(Duration::from_millis(20));
                }
                Err(e) => return Err(ProfileError::io(&path, e)),
            }
        }
    }
}

impl Drop for ProfileLock {
    fn drop(&mut self) {
        let _ = std::fs::remove_file(&self.path);
    }
}
