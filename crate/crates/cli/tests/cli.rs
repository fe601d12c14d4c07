use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use asrefine_core::campaign::{BatchReport, MutantReport, VerdictKind};
use tempfile::TempDir;

fn asrefine(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_asrefine")).args(args).current_dir(dir).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn with_fixture(name: &str) -> (TempDir, PathBuf) {
    let dir = TempDir::new().unwrap();
    let out = asrefine(&["fixture", name, "model.as"], dir.path());
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let path = dir.path().join("model.as");
    (dir, path)
}

#[test]
fn fixture_constants_scale() {
    for (name, consts, upper) in [
        ("cas_1", ["20", "30", "270"], "0..270."),
        ("cas_10", ["200", "300", "2700"], "0..2700."),
        ("cas_1000", ["20000", "30000", "270000"], "0..270000."),
    ] {
        let (_dir, path) = with_fixture(name);
        let text = fs::read_to_string(path).unwrap();
        for c in consts {
            assert!(text.contains(&format!("Wait_time #= {c} ")), "{name}: {c}");
        }
        assert!(text.contains(&format!("type(int, X) :- X in {upper}")), "{name}");
    }
}

#[test]
fn fixture_to_stdout() {
    let dir = TempDir::new().unwrap();
    let out = asrefine(&["fixture", "cas_1"], dir.path());
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("'after'(Wait_time)"));
}

#[test]
fn self_check_is_proved() {
    let (dir, _) = with_fixture("cas_1");
    let out = asrefine(&["check", "model.as", "model.as", "--format", "json"], dir.path());
    assert_eq!(code(&out), 0);
    let r: MutantReport = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(r.verdict, VerdictKind::EquivProved);
}

fn mutate(dir: &Path) {
    let out = asrefine(&["mutate", "model.as", "--out", "muts"], dir);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
}

#[test]
fn golden_nonconforming_mutants() {
    let (dir, _) = with_fixture("cas_1");
    mutate(dir.path());
    let out = asrefine(&["check", "model.as", "muts/model.mut007.as", "--max-depth", "20", "--format", "json"], dir.path());
    assert_eq!(code(&out), 1);
    let r: MutantReport = serde_json::from_str(&stdout(&out)).unwrap();
    let ce = r.counterexample.expect("trace present");
    assert_eq!(r.mutated_action.as_deref(), Some("Unlock"));
    assert_eq!(ce.unsafe_state.to_string(), "[6,0,0,0,0,0]");
    assert!(ce.trace.is_empty());
    assert_eq!((ce.witness.0.to_string(), ce.witness.1.to_string()), ("Unlock".into(), "[4,0,0,0,0,0]".into()));

    let out = asrefine(&["check", "model.as", "muts/model.mut224.as", "--engine", "both", "--format", "json"], dir.path());
    assert_eq!(code(&out), 1);
    let r: MutantReport = serde_json::from_str(&stdout(&out)).unwrap();
    let ce = r.counterexample.unwrap();
    let trace: Vec<String> = ce.trace.iter().map(|e| e.to_string()).collect();
    assert_eq!(
        trace.join(" "),
        "Lock Close after(20) AlarmArmed_SetOn Open AlarmArmed_SetOff FlashOn SoundOn Unlock"
    );
    assert_eq!(ce.unsafe_state.to_string(), "[6,3,0,0,1,1]");
    assert_eq!(r.agreement, Some(true));
}

#[test]
fn text_report_lists_the_trace() {
    let (dir, _) = with_fixture("cas_1");
    mutate(dir.path());
    let out = asrefine(&["check", "model.as", "muts/model.mut224.as"], dir.path());
    assert_eq!(code(&out), 1);
    let text = stdout(&out);
    assert!(text.contains("verdict: nonconforming"));
    assert!(text.contains("trace (9 steps): Lock Close after(20)"));
}

#[test]
fn input_errors_exit_above_two() {
    let (dir, _) = with_fixture("cas_1");
    let out = asrefine(&["check", "model.as", "missing.as"], dir.path());
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).starts_with("missing.as: error:"));

    fs::write(
        dir.path().join("bad.as"),
        "type(t, X) :- X in 0..3.\nvar([x], u).\nstate_def([x]).\ninit([0]).\nas :- actions('a'::(true) => (x := 1)), dood('a').",
    )
    .unwrap();
    let out = asrefine(&["check", "model.as", "bad.as"], dir.path());
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).starts_with("bad.as:2:"), "{}", stderr(&out));

    fs::write(
        dir.path().join("other.as"),
        "type(t, X) :- X in 0..3.\nvar([x], t).\nstate_def([x]).\ninit([0]).\nas :- actions('a'::(true) => (x := 1)), dood('a').",
    )
    .unwrap();
    let out = asrefine(&["check", "model.as", "other.as"], dir.path());
    assert_eq!(code(&out), 3, "{}", stderr(&out));
}

#[test]
fn usage_errors_exit_64() {
    let dir = TempDir::new().unwrap();
    for args in [
        vec!["check", "a.as"],
        vec!["frobnicate"],
        vec!["batch", "a.as", "--engine", "quantum"],
        vec!["batch", "a.as", "--node-budget", "0"],
        vec!["batch", "a.as", "--timeout", "-1"],
        vec!["batch", "a.as", "--ops", "swap"],
        vec!["fixture", "cas_7"],
    ] {
        assert_eq!(code(&asrefine(&args, dir.path())), 64, "{args:?}");
    }
    assert_eq!(code(&asrefine(&["--help"], dir.path())), 0);
}

fn batch_json(dir: &Path, extra: &[&str]) -> BatchReport {
    let mut args = vec!["batch", "model.as", "--format", "json"];
    args.extend_from_slice(extra);
    let out = asrefine(&args, dir);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    serde_json::from_str(&stdout(&out)).unwrap()
}

/// Mutation sites counted on the source text: guarded commands with a
/// non-trivial guard, `#=`/`#\=` tokens and integer literals.
fn golden_count(src: &str) -> usize {
    let actions = &src[src.find("actions").unwrap()..src.find("dood").unwrap()];
    let guards = actions.matches("=>").count() - actions.matches("(true) =>").count();
    let comparisons = actions.matches("#=").count() + actions.matches("#\\=").count();
    let mut literals = 0;
    let bytes = actions.as_bytes();
    for (i, b) in bytes.iter().enumerate() {
        let starts = b.is_ascii_digit() && (i == 0 || !(bytes[i - 1].is_ascii_alphanumeric() || bytes[i - 1] == b'_'));
        literals += usize::from(starts);
    }
    guards + comparisons + literals
}

#[test]
fn batch_over_the_fixture() {
    let (dir, path) = with_fixture("cas_1");
    let r = batch_json(dir.path(), &["--jobs", "2"]);
    let golden = golden_count(&fs::read_to_string(path).unwrap());
    assert_eq!(golden, 226);
    assert_eq!(r.schema_version, 1);
    assert_eq!(r.mutants.len(), golden + 1);
    assert_eq!(r.mutants[0].id, 0);
    assert_eq!(r.mutants[0].verdict, VerdictKind::EquivProved);
    assert_eq!(r.summary.verdicts.values().sum::<usize>(), r.mutants.len());
    assert_eq!(r.summary.verdicts[&VerdictKind::Inconclusive], 0);
    for m in &r.mutants {
        assert!(m.timings.find_secs >= 0.0 && m.timings.reach_secs >= 0.0);
        assert!(m.timings.total_secs >= m.timings.find_secs);
    }

    let again = batch_json(dir.path(), &["--jobs", "1"]);
    let key = |r: &BatchReport| r.mutants.iter().map(|m| (m.id, m.verdict, m.counterexample.clone())).collect::<Vec<_>>();
    assert_eq!(key(&r), key(&again));

    let out = asrefine(&["batch", "model.as", "--format", "csv", "--ops", "comp_invert"], dir.path());
    let mut rd = csv::Reader::from_reader(out.stdout.as_slice());
    assert_eq!(rd.records().count(), 75);
}

#[test]
fn batch_loads_a_mutant_directory() {
    let (dir, _) = with_fixture("cas_1");
    let out = asrefine(&["mutate", "model.as", "--out", "muts", "--ops", "comp_invert"], dir.path());
    assert_eq!(code(&out), 0);
    assert!(dir.path().join("muts/manifest.json").exists());
    let loaded = batch_json(dir.path(), &["--mutants", "muts"]);
    let generated = batch_json(dir.path(), &["--ops", "comp_invert"]);
    assert_eq!(loaded.mutants.len(), 74);
    for (l, g) in loaded.mutants.iter().zip(&generated.mutants[1..]) {
        assert_eq!((l.id, l.verdict, &l.spec), (g.id, g.verdict, &g.spec));
    }
}

#[test]
fn batch_over_an_empty_directory() {
    let (dir, _) = with_fixture("cas_1");
    fs::create_dir(dir.path().join("empty")).unwrap();
    let r = batch_json(dir.path(), &["--mutants", "empty"]);
    assert!(r.mutants.is_empty());
    assert_eq!(r.summary.mutants, 0);
}

#[test]
fn unparsable_mutant_is_recorded_and_the_batch_continues() {
    let (dir, path) = with_fixture("cas_1");
    let muts = dir.path().join("muts");
    fs::create_dir(&muts).unwrap();
    fs::copy(&path, muts.join("a.as")).unwrap();
    fs::write(muts.join("b.as"), "garbage").unwrap();
    let r = batch_json(dir.path(), &["--mutants", "muts"]);
    assert_eq!(r.mutants.len(), 2);
    assert_eq!(r.mutants[0].verdict, VerdictKind::EquivProved);
    assert_eq!(r.mutants[1].verdict, VerdictKind::Inconclusive);
    assert!(r.mutants[1].detail.as_deref().unwrap().starts_with("muts/b.as:1:1: error"));
}

#[test]
fn both_engines_agree_on_the_reduced_fixture() {
    let (dir, _) = with_fixture("cas_reduced");
    let r = batch_json(dir.path(), &["--engine", "both", "--ops", "comp_invert,guard_true"]);
    assert_eq!(r.summary.disagreements, 0);
    assert!(r.mutants.iter().all(|m| m.agreement == Some(true)));
}

#[test]
fn report_file_and_text_summary() {
    let (dir, _) = with_fixture("cas_1");
    let out = asrefine(&["batch", "model.as", "--ops", "guard_true", "-o", "report.txt"], dir.path());
    assert_eq!(code(&out), 0);
    let text = fs::read_to_string(dir.path().join("report.txt")).unwrap();
    assert!(text.contains("31 mutants"));
    assert!(text.contains("equiv_proved  1"));
}

#[test]
fn tight_budget_gives_inconclusive() {
    let dir = TempDir::new().unwrap();
    let src = |post: i64| {
        format!(
            "type(big, X) :- X in 2..1000000.\nvar([x, y], big).\nstate_def([x, y]).\ninit([2, 2]).\n\
             as :- actions('a'::(x * y #= 1000003) => (x := {post})), dood('a')."
        )
    };
    fs::write(dir.path().join("o.as"), src(2)).unwrap();
    fs::write(dir.path().join("m.as"), src(3)).unwrap();
    let out = asrefine(&["check", "o.as", "m.as", "--node-budget", "5000"], dir.path());
    assert_eq!(code(&out), 2);
    assert!(stdout(&out).contains("node budget"));
}

#[test]
fn dump_formulas_goes_to_stderr() {
    let (dir, _) = with_fixture("cas_1");
    let out = asrefine(&["check", "model.as", "model.as", "--dump-formulas"], dir.path());
    assert_eq!(code(&out), 0);
    let err = stderr(&out);
    assert!(err.contains("; non-refinement constraint for `Lock`"));
    assert!(err.contains("aState'"));
}

#[test]
fn lint_reports_nested_choice() {
    let dir = TempDir::new().unwrap();
    fs::write(
        dir.path().join("n.as"),
        "type(t, X) :- X in 0..3.\nvar([x], t).\nstate_def([x]).\ninit([0]).\n\
         as :- actions('a'::(true) => ((x := 1 [] x := 2); x := 3)), dood('a').",
    )
    .unwrap();
    let out = asrefine(&["lint", "n.as"], dir.path());
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("n.as:5:"), "{}", stderr(&out));
    let out = asrefine(&["check", "n.as", "n.as"], dir.path());
    assert_eq!(code(&out), 3);
}
