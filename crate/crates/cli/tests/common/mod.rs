#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_condldp"))
}

pub fn run(args: &[&str], out: &Path, threads: Option<&str>) -> Output {
    let mut cmd = bin();
    cmd.args(args).arg("--out").arg(out);
    match threads {
        Some(t) => cmd.env("LDP_MAX_THREADS", t),
        None => cmd.env_remove("LDP_MAX_THREADS"),
    };
    cmd.output().expect("binary runs")
}

pub fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

pub fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

pub fn default_config() -> serde_json::Value {
    serde_json::from_str(condldp_cli::config::DEFAULT_CONFIG).unwrap()
}

pub fn write_config(dir: &Path, value: &serde_json::Value) -> PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, value.to_string()).unwrap();
    path
}

pub fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

pub fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    read(path)
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}
