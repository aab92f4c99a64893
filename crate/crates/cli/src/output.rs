use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::failure::{CliResult, Context};

/// Writes through a temporary sibling and renames, so readers never see a
/// partial file.
pub fn write_atomic(path: &Path, contents: &str) -> CliResult<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).runtime(|| format!("creating `{}`", dir.display()))?;
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp: PathBuf = dir.join(format!(".{name}.tmp-{}", std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.runtime(|| format!("writing `{}`", path.display()))
}

/// Writes all files only after every one of them has been produced.
pub fn write_all(files: &[(PathBuf, String)]) -> CliResult<()> {
    for (path, contents) in files {
        write_atomic(path, contents)?;
    }
    Ok(())
}

/// Sidecar path for a single-file output: `<out>.run.toml`.
pub fn sidecar(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".run.toml");
    out.with_file_name(name)
}
