#![allow(dead_code)]

use std::path::{Path, PathBuf};

use rotdop_cli::csv::without_timestamp;

/// Golden figure data: file stem and the `rotdop` arguments producing it.
pub const FIXTURES: &[(&str, &[&str])] = &[
    ("fig3a_jsa", &["jsa", "--grid", "64"]),
    ("fig3b_hom", &["hom", "--l", "2", "--omega", "0"]),
    ("fig4a_jsa", &["jsa", "--grid", "64", "--rde-l", "2", "--rde-omega", "1e12"]),
    ("fig4b_hom", &["hom", "--l", "2", "--omega", "2e12"]),
    ("fig4c_jsa", &["jsa", "--grid", "64", "--rde-l", "2", "--rde-omega", "2e12"]),
    ("fig4d_hom", &["hom", "--l", "2", "--omega", "4e12"]),
    ("fig5a_omega_0", &["hom", "--l", "2", "--omega", "0"]),
    ("fig5a_omega_0.4e12", &["hom", "--l", "2", "--omega", "0.4e12"]),
    ("fig5a_omega_0.8e12", &["hom", "--l", "2", "--omega", "0.8e12"]),
    ("fig5a_omega_1e12", &["hom", "--l", "2", "--omega", "1e12"]),
    ("fig5b_tau_c_1us", &["hom", "--l", "2", "--omega", "1e6", "--tau-c", "1e-6", "--tau-span", "6e-6"]),
    ("fig5b_tau_c_2us", &["hom", "--l", "2", "--omega", "1e6", "--tau-c", "2e-6", "--tau-span", "6e-6"]),
    ("fig5b_tau_c_3us", &["hom", "--l", "2", "--omega", "1e6", "--tau-c", "3e-6", "--tau-span", "6e-6"]),
];

pub fn golden_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(format!("{name}.csv"))
}

/// Runs `rotdop` with `args`, writing to `out`; returns the exit code.
pub fn rotdop(args: &[&str], out: &Path) -> i32 {
    let mut full = vec!["rotdop".to_string()];
    full.extend(args.iter().map(|s| s.to_string()));
    full.push("--output".into());
    full.push(out.display().to_string());
    rotdop_cli::run(full)
}

/// Regenerates one fixture into `dir` and returns it without its timestamp.
pub fn regenerate(name: &str, args: &[&str], dir: &Path) -> String {
    let out = dir.join(format!("{name}.csv"));
    assert_eq!(rotdop(args, &out), 0, "{name}");
    without_timestamp(&std::fs::read_to_string(out).unwrap())
}
