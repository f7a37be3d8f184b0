//! Golden-output tests for the command-line front end. Set
//! `UPDATE_GOLDEN=1` to rewrite the expected files.

use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Stdio};

use rescalc::machine::{MachineNode, MachineNodeRecord};
use rescalc::reduction::{Trace, TraceRecord};

const I: &str = "(\\x.x)";

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run(args: &[&str], stdin: Option<&str>) -> Run {
    let mut child = Command::new(env!("CARGO_BIN_EXE_rescalc"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut input = child.stdin.take().unwrap();
    input.write_all(stdin.unwrap_or("").as_bytes()).unwrap();
    drop(input);
    let out = child.wait_with_output().unwrap();
    Run {
        code: out.status.code().unwrap(),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn golden(name: &str, args: &[&str], code: i32) {
    let r = run(args, None);
    assert_eq!(r.code, code, "{name}: exit code; stderr: {}", r.stderr);
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(format!("{name}.txt"));
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, &r.stdout).unwrap();
    }
    let want = std::fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing golden file {}", path.display()));
    assert_eq!(r.stdout, want, "{name}");
}

#[test]
fn reduce_goldens() {
    golden("reduce_giant", &["reduce", "--mode", "giant", "(\\x.x[x])[a,b]"], 0);
    golden("reduce_nd_all", &["reduce", "--mode", "nd", "--pick", "all", "(\\x.y[x][x])[\\x y.y, \\x.x]"], 0);
    golden("reduce_crash", &["reduce", "(\\x.x)1"], 1);
    golden("reduce_budget", &["reduce", "--trace", "--steps", "3", "(\\x.x[!x])[!(\\x.x[!x])]"], 2);
    let inner = format!("{I}[{I}[!x, !y]]");
    golden(
        "reduce_parallel_inner",
        &["reduce", "--mode", "giant", "--trace", "--pick", "path=arg/elem:0/content", &inner],
        0,
    );
    golden("reduce_baby", &["reduce", "--mode", "baby", "--trace", "(\\x.x[x])[a,b]"], 0);
}

#[test]
fn machine_goldens() {
    golden("machine_undefined", &["machine", "(\\z.\\y.y)[x]"], 1);
    golden("machine_divergent", &["machine", "--budget", "10", "(\\x.x[!x])[!(\\x.x[!x])]"], 2);
    golden("machine_two_runs", &["machine", "--policy", "all", "--tree", "(\\x.y[x][x])[\\x y.y, \\x.x]"], 0);
    golden("machine_unique", &["machine", "--policy", "all", "(\\x.y[!x])[!\\x.x, !\\x y.y]"], 0);
    golden("machine_onf", &["machine", "\\x.x[!((\\y.y)[z])]"], 0);
}

#[test]
fn solvable_goldens() {
    golden("solvable_divergent", &["solvable", "--budget", "200", "(\\x.x[!x])[!(\\x.x[!x])]"], 2);
    golden("solvable_undefined", &["solvable", "(\\z.\\y.y)[x]"], 1);
    golden("solvable_yes", &["solvable", "(\\x.y[!x])[!\\x.x, !\\x y.y]"], 0);
}

#[test]
fn translate_goldens() {
    golden("translate_dup", &["translate", "(\\x.x x) y"], 0);
    golden("translate_var", &["translate", "x"], 0);
    golden("translate_omega", &["translate", "(\\x.x x) (\\x.x x)"], 0);
}

#[test]
fn standardize_goldens() {
    let m1 = format!("{I}[!((\\x y.x)[!{I}][!{I}])]");
    let start = format!("\\x.x[!({m1}), !({I}[!{I}])]");
    golden("standardize_example", &["standardize", &start, "--target", &format!("\\x.x[!{I}, !{I}]")], 0);
    golden("standardize_empty", &["standardize", "x", "--target", "x"], 0);
    golden("standardize_unreachable", &["standardize", "x", "--target", "y"], 2);
}

#[test]
fn omega_translation_is_the_divergent_machine_input() {
    let r = run(&["translate", "(\\x.x x) (\\x.x x)"], None);
    let image = rescalc::parse_term(r.stdout.trim()).unwrap();
    let omega = rescalc::parse_term("(\\x.x[!x])[!(\\x.x[!x])]").unwrap();
    assert_eq!(image, omega);
}

#[test]
fn violation_report_for_a_non_standard_trace() {
    // Inner redex first, then the root: the root precedes the inner redex.
    let m = format!("{I}[{I}[!x, !y]]");
    let r = run(&["reduce", "--format", "structured", "--pick", "path=arg/elem:0/content@0,.", &m], None);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let rec: TraceRecord = serde_json::from_str(r.stdout.trim()).unwrap();
    let tr = Trace::from_record(&rec).unwrap();
    assert_eq!(tr.len(), 2);

    let check = run(&["standardize", "--check"], Some(r.stdout.trim()));
    assert_eq!(check.code, 1);
    assert!(check.stdout.starts_with("not standard: step 1"), "{}", check.stdout);

    let fixed = run(&["standardize", "--format", "structured"], Some(r.stdout.trim()));
    assert_eq!(fixed.code, 0, "{}", fixed.stderr);
    let again = run(&["standardize", "--check"], Some(fixed.stdout.trim()));
    assert_eq!((again.code, again.stdout.trim()), (0, "standard"));
}

#[test]
fn structured_output_round_trips() {
    let r = run(&["reduce", "--pick", "all", "--format", "structured", "(\\x.y[x][x])[f, (\\a.a)[i]]"], None);
    assert_eq!(r.code, 0);
    for line in r.stdout.lines() {
        let rec: TraceRecord = serde_json::from_str(line).unwrap();
        assert_eq!(Trace::from_record(&rec).unwrap().to_record(), rec);
    }

    let r = run(&["machine", "--tree", "--format", "structured", "(\\x.y[x][(\\u.u)[w]])[\\x y.y]"], None);
    assert_eq!(r.code, 0);
    let v: serde_json::Value = serde_json::from_str(r.stdout.trim()).unwrap();
    assert_eq!(v["status"], "converged");
    let tree: MachineNodeRecord = serde_json::from_value(v["tree"].clone()).unwrap();
    assert_eq!(MachineNode::from_record(&tree).unwrap().to_record(), tree);

    let r = run(&["solvable", "--format", "structured", "\\x.x"], None);
    let v: serde_json::Value = serde_json::from_str(r.stdout.trim()).unwrap();
    assert_eq!(v["status"], "may-solvable");
}

#[test]
fn input_sources_and_errors() {
    let r = run(&["translate"], Some("(\\x.x) y\n"));
    assert_eq!((r.code, r.stdout.as_str()), (0, "(\\x.x)[!y]\n"));

    let dir = std::env::temp_dir().join(format!("rescalc-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("term.txt");
    std::fs::write(&file, "(\\x.x)[z]").unwrap();
    let r = run(&["reduce", "--file", file.to_str().unwrap()], None);
    assert_eq!((r.code, r.stdout.as_str()), (0, "z\n"));

    for args in
        [&["reduce", "x["][..], &["translate", "\\x."], &["machine", "(("], &["reduce", "--pick", "sideways", "x"]]
    {
        let r = run(args, None);
        assert_eq!(r.code, 3, "{args:?}");
        assert!(r.stderr.contains("rescalc:"), "{args:?}");
    }
}

#[test]
fn seeded_machine_runs_are_reproducible() {
    let m = "(\\x.y[x][x][!x])[!\\x y.y, !\\x.x]";
    let a = run(&["machine", "--policy", "random", "--seed", "7", m], None);
    let b = run(&["machine", "--policy", "random", "--seed", "7", m], None);
    assert_eq!((a.code, a.stdout), (b.code, b.stdout));
}
