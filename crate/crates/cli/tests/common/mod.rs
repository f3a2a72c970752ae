#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::Parser;
use sqzcool_cli::{run, Cli};

pub const GOLDEN: [&str; 5] = ["map", "spectra_theta", "spectra_r", "spectra_ponderomotive", "coolcurve"];

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

/// Runs the CLI in-process and returns every written file by name.
pub fn run_into(args: &[&str], out: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut argv = vec!["sqzcool"];
    argv.extend_from_slice(args);
    let out_str = out.to_str().unwrap();
    argv.extend_from_slice(&["--out", out_str]);
    let cli = Cli::try_parse_from(&argv).unwrap();
    let written = run(&cli).unwrap_or_else(|e| panic!("{argv:?}: {e}"));
    written.iter().map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(p).unwrap())).collect()
}

fn golden_run(name: &str, threads: usize, out: &Path) -> BTreeMap<String, Vec<u8>> {
    let command = name.split('_').next().unwrap();
    let config = golden_dir().join(format!("{name}.toml"));
    let threads = threads.to_string();
    run_into(&[command, "--config", config.to_str().unwrap(), "--threads", &threads], out)
}

/// Runs one golden config at 1 and 4 threads and compares both against the
/// stored outputs. With `SQZCOOL_BLESS=1` the stored outputs are rewritten.
pub fn check_golden(name: &str) -> Result<usize, String> {
    let tmp = tempfile::tempdir().unwrap();
    let serial = golden_run(name, 1, &tmp.path().join("t1"));
    let parallel = golden_run(name, 4, &tmp.path().join("t4"));
    let again = golden_run(name, 4, &tmp.path().join("t4b"));
    if serial != parallel {
        return Err(format!("{name}: outputs differ between 1 and 4 threads"));
    }
    if parallel != again {
        return Err(format!("{name}: outputs differ between repeated runs"));
    }
    let expected = golden_dir().join("expected").join(name);
    if std::env::var_os("SQZCOOL_BLESS").is_some() {
        let _ = fs::remove_dir_all(&expected);
        fs::create_dir_all(&expected).unwrap();
        for (file, bytes) in &serial {
            fs::write(expected.join(file), bytes).unwrap();
        }
    }
    let mut stored = BTreeMap::new();
    for entry in fs::read_dir(&expected).map_err(|e| format!("{}: {e}", expected.display()))? {
        let path = entry.unwrap().path();
        stored.insert(path.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&path).unwrap());
    }
    if stored.keys().ne(serial.keys()) {
        return Err(format!("{name}: file set {:?} != stored {:?}", serial.keys(), stored.keys()));
    }
    for (file, bytes) in &serial {
        if stored[file] != *bytes {
            return Err(format!("{name}: {file} differs from the stored golden"));
        }
    }
    Ok(serial.len())
}
