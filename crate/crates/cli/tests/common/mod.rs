//! Golden cases shared by the golden-file test and the acceptance runner.

#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub struct Case {
    pub name: &'static str,
    pub args: &'static [&'static str],
}

pub const CASES: &[Case] = &[
    Case { name: "analyze_two_state", args: &["analyze", "two_state.txt"] },
    Case { name: "analyze_two_state_modified", args: &["analyze", "two_state.txt", "--convention", "modified"] },
    Case { name: "analyze_cycle3", args: &["analyze", "cycle3.txt"] },
    Case { name: "analyze_period2", args: &["analyze", "period2.txt"] },
    Case { name: "analyze_sym3_sequential", args: &["analyze", "sym3.txt", "--sequential"] },
    Case { name: "mix_return", args: &["mix", "two_state.txt", "--seed", "42", "--samples", "100000"] },
    Case {
        name: "mix_hitting",
        args: &["mix", "two_state.txt", "--variant", "hitting", "--seed", "42", "--samples", "100000"],
    },
    Case {
        name: "mix_start2_sequential",
        args: &["mix", "two_state.txt", "--start", "2", "--samples", "5000", "--sequential"],
    },
    Case { name: "graph_c4", args: &["graph", "c4.edges"] },
    Case { name: "graph_k4", args: &["graph", "k4.edges"] },
    Case { name: "graph_path3", args: &["graph", "path3.edges"] },
    Case { name: "graph_dcycle4", args: &["graph", "dcycle4.edges", "--mu"] },
    Case { name: "perturb_general", args: &["perturb", "two_state.txt", "general.txt"] },
    Case { name: "perturb_type1", args: &["perturb", "two_state.txt", "type1.txt", "--kind", "type1"] },
    Case { name: "perturb_type2", args: &["perturb", "two_state.txt", "type2.txt", "--kind", "type2"] },
    Case { name: "perturb_damping", args: &["perturb", "two_state.txt", "damping.txt", "--kind", "damping"] },
    Case { name: "perturb_psd", args: &["perturb", "sym3.txt", "psd.txt", "--kind", "psd"] },
];

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

/// Runs the built binary from the fixture directory.
pub fn kemeny(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kemeny")).args(args).current_dir(fixtures()).output().expect("spawn kemeny")
}

pub enum Verdict {
    Match,
    Written,
    Differs(String),
}

/// Compares one case with its golden file, or rewrites it under `UPDATE_GOLDEN`.
pub fn check_case(case: &Case) -> Verdict {
    let out = kemeny(case.args);
    if !out.status.success() {
        return Verdict::Differs(format!(
            "exit {:?}: {}",
            out.status.code(),
            String::from_utf8_lossy(&out.stderr).trim()
        ));
    }
    let path = golden_dir().join(format!("{}.json", case.name));
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(golden_dir()).expect("golden dir");
        std::fs::write(&path, &out.stdout).expect("write golden");
        return Verdict::Written;
    }
    match std::fs::read(&path) {
        Ok(expected) if expected == out.stdout => Verdict::Match,
        Ok(expected) => Verdict::Differs(first_difference(&expected, &out.stdout)),
        Err(e) => Verdict::Differs(format!("{}: {e} (run with UPDATE_GOLDEN=1)", path.display())),
    }
}

fn first_difference(expected: &[u8], actual: &[u8]) -> String {
    let (e, a) = (String::from_utf8_lossy(expected), String::from_utf8_lossy(actual));
    for (n, (x, y)) in e.lines().zip(a.lines()).enumerate() {
        if x != y {
            return format!("line {}: expected `{}`, got `{}`", n + 1, x.trim(), y.trim());
        }
    }
    format!("length {} vs {}", e.lines().count(), a.lines().count())
}
