use std::path::Path;

/// Usage errors exit with 1, runtime failures with 2.
#[derive(Debug)]
pub enum Failure {
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
}

pub type CliResult<T> = Result<T, Failure>;

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Runtime(_) => 2,
        }
    }
}

impl From<cascadelab::Error> for Failure {
    fn from(e: cascadelab::Error) -> Self {
        match e {
            cascadelab::Error::InvalidConfig(_) => Failure::Usage(e.into()),
            other => Failure::Runtime(other.into()),
        }
    }
}

pub fn usage(msg: impl std::fmt::Display) -> Failure {
    Failure::Usage(anyhow::anyhow!("{msg}"))
}

/// Input files must exist before anything runs.
pub fn require_file(flag: &str, path: &Path) -> CliResult<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(usage(format!("{flag}: file `{}` does not exist", path.display())))
    }
}

pub trait Context<T> {
    fn runtime(self, what: impl FnOnce() -> String) -> CliResult<T>;
}

impl<T, E: Into<anyhow::Error>> Context<T> for Result<T, E> {
    fn runtime(self, what: impl FnOnce() -> String) -> CliResult<T> {
        self.map_err(|e| Failure::Runtime(e.into().context(what())))
    }
}
