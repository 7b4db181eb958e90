//! Golden reports, canonical round trips and diagnostics over the bundled corpus.

use std::path::{Path, PathBuf};

use slh_netspec::{parse_document, print_document, run_command_with};

fn corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus")
}

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("slh").chain(args.iter().copied());
    let code = run_command_with(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

/// `(golden name, arguments with the corpus file first after the command, exit code)`.
const CASES: &[(&str, &[&str], i32)] = &[
    ("damped_cavity.dissipation", &["check", "dissipation", "damped_cavity.net", "--storage", "V"], 0),
    ("damped_cavity.pr", &["check", "pr", "damped_cavity.net", "--storage", "V", "--n", "a@cav"], 0),
    ("damped_cavity.br", &["check", "br", "damped_cavity.net", "--storage", "V", "--n", "a@cav", "--g", "1"], 0),
    ("damped_cavity.stability", &["check", "stability", "damped_cavity.net", "--storage", "V", "--c", "1"], 0),
    ("damped_cavity.poles", &["poles", "damped_cavity.net"], 0),
    (
        "damped_cavity.simulate",
        &["simulate", "damped_cavity.net", "--observable", "V", "--init", "cav=coherent:2", "--t", "1", "--dt", "0.01", "--bound-c", "1"],
        0,
    ),
    ("atom.dissipation", &["check", "dissipation", "atom.net", "--storage", "V"], 0),
    ("atom.pr", &["check", "pr", "atom.net", "--storage", "V", "--n", "sm@qb"], 0),
    ("atom.br", &["check", "br", "atom.net", "--storage", "V", "--n", "sm@qb"], 0),
    ("atom.generator", &["generator", "atom.net", "--observable", "V"], 0),
    ("atom.simulate", &["simulate", "atom.net", "--observable", "V", "--t", "0.5", "--dt", "0.01", "--fit"], 0),
    ("amplifier.pr", &["check", "pr", "amplifier.net", "--storage", "V", "--n", "0.5*a@cav + adag@cav"], 1),
    ("amplifier.dissipation", &["check", "dissipation", "amplifier.net", "--storage", "V", "--rate", "passivity", "--z", "-0.5*a@cav + adag@cav", "--n", "0.5*a@cav + adag@cav"], 1),
    ("marginal.stability", &["check", "stability", "marginal.net", "--storage", "V", "--c", "0.1"], 1),
    ("marginal.poles", &["poles", "marginal.net"], 0),
    ("regulation.stability", &["check", "stability", "regulation.net", "--storage", "Vd", "--c", "0.5"], 0),
    ("regulation.compose", &["compose", "regulation.net"], 0),
    ("regulation.poles", &["poles", "regulation.net"], 0),
    ("modulator.poles", &["poles", "modulator.net"], 0),
    ("stabilization_k05.poles", &["poles", "stabilization_k05.net"], 0),
    ("stabilization_k1.poles", &["poles", "stabilization_k1.net"], 0),
    ("alternative_controller.poles", &["poles", "alternative_controller.net"], 0),
    ("uncertainty.stability", &["check", "stability", "uncertainty.net", "--storage", "V", "--c", "1.21"], 0),
    ("uncertainty.generator", &["generator", "uncertainty.net", "--observable", "V"], 0),
    ("feedback_loop.compose", &["compose", "feedback_loop.net"], 0),
    ("feedback_loop.stability", &["check", "stability", "feedback_loop.net", "--storage", "V", "--c", "2.25"], 0),
    ("driven_atom.compose", &["compose", "driven_atom.net"], 0),
];

fn with_corpus_path(args: &[&str]) -> Vec<String> {
    let dir = corpus();
    args.iter()
        .map(|a| {
            if a.ends_with(".net") {
                dir.join(a).display().to_string()
            } else {
                a.to_string()
            }
        })
        .collect()
}

#[test]
fn golden_reports() {
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    let mut failures = Vec::new();
    for (name, args, exit) in CASES {
        let args = with_corpus_path(args);
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        let (code, out, err) = run(&refs);
        let golden = corpus().join("golden").join(format!("{name}.txt"));
        if update {
            std::fs::write(&golden, &out).unwrap();
        }
        let expected = std::fs::read_to_string(&golden).unwrap_or_default();
        if code != *exit {
            failures.push(format!("{name}: exit {code}, expected {exit}; stderr: {err}"));
        }
        if out != expected {
            failures.push(format!("{name}: report differs from golden\n--- got\n{out}--- expected\n{expected}"));
        }
    }
    assert!(failures.is_empty(), "{}", failures.join("\n"));
}

#[test]
fn reports_are_deterministic() {
    for (_, args, _) in CASES.iter().take(6) {
        let args = with_corpus_path(args);
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        assert_eq!(run(&refs), run(&refs));
    }
}

fn corpus_files() -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(corpus())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "net"))
        .collect();
    files.sort();
    files
}

#[test]
fn canonical_form_is_a_fixed_point() {
    let files = corpus_files();
    assert!(files.len() >= 10);
    for f in files {
        let src = std::fs::read_to_string(&f).unwrap();
        let doc = parse_document(&src).unwrap();
        let once = print_document(&doc);
        let reparsed = parse_document(&once).unwrap();
        assert_eq!(reparsed, doc, "{}", f.display());
        assert_eq!(print_document(&reparsed), once, "{}", f.display());
        let (code, out, _) = run(&["fmt", &f.display().to_string()]);
        assert_eq!((code, out), (0, once));
        slh_netspec::load(&src).unwrap_or_else(|e| panic!("{}: {e}", f.display()));
    }
}

/// Each malformed fixture starts with `# expect LINE:COL CODE`.
pub fn malformed_expectations() -> Vec<(PathBuf, String, String)> {
    let dir = corpus().join("malformed");
    let mut out: Vec<_> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| {
            let src = std::fs::read_to_string(&p).unwrap();
            let header = src.lines().next().unwrap().trim_start_matches("# expect ").to_string();
            let (pos, code) = header.split_once(' ').unwrap();
            (p, pos.to_string(), code.to_string())
        })
        .collect();
    out.sort();
    out
}

#[test]
fn malformed_inputs_report_position_and_code() {
    let cases = malformed_expectations();
    assert!(cases.len() >= 15);
    for (path, pos, code) in cases {
        let p = path.display().to_string();
        let (exit, out, err) = run(&["compose", &p]);
        assert_eq!(exit, 2, "{p}");
        assert!(out.is_empty());
        let expected = format!("{p}:{pos}: error[{code}]:");
        assert!(err.starts_with(&expected), "{p}: {err}");
    }
}

#[test]
fn usage_errors_exit_2() {
    let file = corpus().join("damped_cavity.net").display().to_string();
    let (code, _, err) = run(&["simulate", &file, "--observable", "V", "--t", "1"]);
    assert_eq!(code, 2);
    assert!(err.contains("--dt"), "{err}");
    assert_eq!(run(&["frobnicate"]).0, 2);
    let (code, _, err) = run(&["check", "stability", &file, "--storage", "n@cav + foo@cav", "--c", "1"]);
    assert_eq!(code, 2);
    assert!(err.starts_with("--storage:1:9: error[E102]"), "{err}");
    let (code, _, err) = run(&["check", "stability", &file, "--storage", "-1*n@cav", "--c", "1"]);
    assert_eq!(code, 2);
    assert!(err.contains("not positive semidefinite"), "{err}");
    assert_eq!(run(&["compose", "/nonexistent/file.net"]).0, 2);
    assert_eq!(run(&["--help"]).0, 0);
}

#[test]
fn csv_written_to_out() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("trace.csv");
    let file = corpus().join("atom.net").display().to_string();
    let (code, report, _) = run(&[
        "simulate",
        &file,
        "--observable",
        "V",
        "--t",
        "0.02",
        "--dt",
        "0.01",
        "--out",
        &out.display().to_string(),
    ]);
    assert_eq!(code, 0);
    assert!(report.contains("steps: 2"));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().next(), Some("t,value"));
    assert_eq!(csv.lines().count(), 4);
    assert!(csv.lines().nth(1).unwrap() == "0.000000000000e+00,1.000000000000e+00");
    assert!(!csv.contains('\r'));
    let (_, combined, _) = run(&["simulate", &file, "--observable", "V", "--t", "0.02", "--dt", "0.01"]);
    assert_eq!(combined, format!("{report}\n{csv}"));
}
