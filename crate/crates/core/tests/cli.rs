//! End-to-end CLI tests: every subcommand against real files, including the
//! documented exit codes (1 usage, 2 data/validation, 3 numeric).

use std::path::Path;
use std::process::{Command, Output};

const DATASET: &str =
    "label,wheels,horizontal,handlebars,seat\nbicycle,2,1,1,1\nunicycle,1,0,0,1\n";

fn genrec(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_genrec"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn write_model(dir: &Path) -> std::path::PathBuf {
    let dataset = dir.join("data.csv");
    std::fs::write(&dataset, DATASET).unwrap();
    let model = dir.join("model.txt");
    let out = genrec(&["learn", "data.csv", "-o", "model.txt"], dir);
    assert!(
        out.status.success(),
        "learn failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    model
}

#[test]
fn learn_writes_the_expected_model_file() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_model(dir.path());
    let text = std::fs::read_to_string(&model).unwrap();
    assert_eq!(
        text,
        "genrec-model v1\nfeatures: wheels horizontal handlebars seat\nclasses: bicycle unicycle\nbicycle: 2 1 1 1\nunicycle: 1 0 0 1\n"
    );
}

#[test]
fn learn_reports_parse_errors_with_position() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.csv"), "label,f1\nok,1\nbad,zzz\n").unwrap();
    let out = genrec(&["learn", "bad.csv", "-o", "model.txt"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3"), "stderr was: {err}");
}

#[test]
fn learn_rejects_empty_dataset() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("empty.csv"), "").unwrap();
    let out = genrec(&["learn", "empty.csv", "-o", "model.txt"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn learn_accepts_single_class_dataset() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("one.csv"), "label,f1,f2\nonly,1,2\n").unwrap();
    let out = genrec(&["learn", "one.csv", "-o", "one.txt"], dir.path());
    assert!(out.status.success());
    assert!(stdout(&out).contains("1 classes x 2 features"));
}

#[test]
fn classify_with_each_solver_recognizes_the_single_wheel_pattern() {
    let dir = tempfile::tempdir().unwrap();
    write_model(dir.path());
    for solver in ["rf", "ls", "ff"] {
        let out = genrec(
            &[
                "classify",
                "model.txt",
                "--input",
                "1,0,0,1",
                "--solver",
                solver,
            ],
            dir.path(),
        );
        assert!(out.status.success(), "{solver} failed");
        let text = stdout(&out);
        let unicycle: f64 = text
            .lines()
            .find_map(|l| l.strip_prefix("unicycle: "))
            .unwrap()
            .parse()
            .unwrap();
        let bicycle: f64 = text
            .lines()
            .find_map(|l| l.strip_prefix("bicycle: "))
            .unwrap()
            .parse()
            .unwrap();
        assert!(
            (unicycle - 1.0).abs() < 1e-3,
            "{solver}: unicycle = {unicycle}"
        );
        assert!(bicycle.abs() < 1e-3, "{solver}: bicycle = {bicycle}");
    }
}

#[test]
fn classify_naive_ff_demonstrates_the_failure_mode() {
    let dir = tempfile::tempdir().unwrap();
    write_model(dir.path());
    let out = genrec(
        &["classify", "model.txt", "--input", "1,0,0,1", "--naive-ff"],
        dir.path(),
    );
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("bicycle: 3"), "got: {text}");
    assert!(text.contains("unicycle: 2"), "got: {text}");
}

#[test]
fn classify_writes_a_trace_with_energy_column() {
    let dir = tempfile::tempdir().unwrap();
    write_model(dir.path());
    let out = genrec(
        &[
            "classify",
            "model.txt",
            "--input",
            "2,1,1,1",
            "--solver",
            "rf",
            "--trace",
            "trace.csv",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let trace = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    let mut lines = trace.lines();
    assert_eq!(lines.next().unwrap(), "step,bicycle,unicycle,energy");
    // Energy decreases overall from the seed state to the recognized state.
    let first_energy: f64 = trace
        .lines()
        .nth(1)
        .unwrap()
        .rsplit(',')
        .next()
        .unwrap()
        .parse()
        .unwrap();
    let last_energy: f64 = trace
        .lines()
        .last()
        .unwrap()
        .rsplit(',')
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert!(last_energy < first_energy);
    assert!(last_energy < 1e-6);
}

#[test]
fn classify_rejects_wrong_input_length_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    write_model(dir.path());
    let out = genrec(&["classify", "model.txt", "--input", "1,0"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn classify_threshold_needs_target_class() {
    let dir = tempfile::tempdir().unwrap();
    write_model(dir.path());
    let out = genrec(
        &[
            "classify",
            "model.txt",
            "--input",
            "1,0,0,1",
            "--threshold",
            "0.9",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    let ok = genrec(
        &[
            "classify",
            "model.txt",
            "--input",
            "1,0,0,1",
            "--threshold",
            "0.9",
            "--target-class",
            "unicycle",
        ],
        dir.path(),
    );
    assert!(ok.status.success());
    assert!(stdout(&ok).contains("target_threshold"));
}

#[test]
fn edit_add_class_matches_hand_written_model() {
    let dir = tempfile::tempdir().unwrap();
    write_model(dir.path());
    let out = genrec(
        &[
            "edit",
            "model.txt",
            "add-class",
            "rollerblade",
            "4,0,0,0",
            "-o",
            "m2.txt",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    assert!(stdout(&out).contains("0 of 8 shared entries changed"));
    let text = std::fs::read_to_string(dir.path().join("m2.txt")).unwrap();
    assert_eq!(
        text,
        "genrec-model v1\nfeatures: wheels horizontal handlebars seat\nclasses: bicycle unicycle rollerblade\nbicycle: 2 1 1 1\nunicycle: 1 0 0 1\nrollerblade: 4 0 0 0\n"
    );
}

#[test]
fn edit_set_entry_matches_hand_written_model() {
    let dir = tempfile::tempdir().unwrap();
    write_model(dir.path());
    let out = genrec(
        &[
            "edit",
            "model.txt",
            "set",
            "bicycle",
            "horizontal",
            "0.5",
            "-o",
            "m3.txt",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    assert!(stdout(&out).contains("1 of 8 shared entries changed"));
    let text = std::fs::read_to_string(dir.path().join("m3.txt")).unwrap();
    assert!(text.contains("bicycle: 2 0.5 1 1"));
    assert!(text.contains("unicycle: 1 0 0 1"));
}

#[test]
fn edit_remove_class_then_re_add_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_model(dir.path());
    let out = genrec(
        &[
            "edit",
            "model.txt",
            "remove-class",
            "unicycle",
            "-o",
            "m4.txt",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let out = genrec(
        &[
            "edit",
            "m4.txt",
            "add-class",
            "unicycle",
            "1,0,0,1",
            "-o",
            "m5.txt",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    assert_eq!(
        std::fs::read(model).unwrap(),
        std::fs::read(dir.path().join("m5.txt")).unwrap()
    );
}

#[test]
fn edit_unknown_label_exits_2_and_names_it() {
    let dir = tempfile::tempdir().unwrap();
    write_model(dir.path());
    let out = genrec(
        &[
            "edit",
            "model.txt",
            "set",
            "tricycle",
            "wheels",
            "3",
            "-o",
            "m6.txt",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("tricycle"));
}

#[test]
fn derive_w_writes_full_precision_weights_and_prints_kappa() {
    let dir = tempfile::tempdir().unwrap();
    write_model(dir.path());
    let out = genrec(&["derive-w", "model.txt", "-o", "w.csv"], dir.path());
    assert!(out.status.success());
    assert!(stdout(&out).contains("condition number: "));
    let text = std::fs::read_to_string(dir.path().join("w.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "class,wheels,horizontal,handlebars,seat");
    let bike_row: Vec<f64> = lines[1]
        .strip_prefix("bicycle,")
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    for (got, want) in bike_row.iter().zip([0.2, 0.4, 0.4, -0.2]) {
        assert!((got - want).abs() < 1e-9);
    }
}

#[test]
fn derive_w_on_dependent_classes_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("dup.txt"),
        "genrec-model v1\nfeatures: f1 f2\nclasses: a b\na: 1 2\nb: 1 2\n",
    )
    .unwrap();
    let out = genrec(&["derive-w", "dup.txt", "-o", "w.csv"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains('a') && err.contains('b'), "stderr: {err}");
}

#[test]
fn experiment_from_pattern_file_writes_sorted_rows() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("patterns.csv"),
        "name,f1,f2,f3,f4\nfirst,1,0.8,0,0\nsecond,0,0,1,0.8\nthird,0.5,0.4,0.5,0.4\n",
    )
    .unwrap();
    let out = genrec(
        &["experiment", "--patterns", "patterns.csv", "-o", "out.csv"],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(dir.path().join("out.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "i,j,similarity,condition_number,iterations_ls,iterations_rf,converged_ls,converged_rf"
    );
    assert_eq!(lines.len(), 4); // header + 3 pairs
    let sims: Vec<f64> = lines[1..]
        .iter()
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert!(
        sims.windows(2).all(|p| p[0] <= p[1]),
        "rows not sorted: {sims:?}"
    );
}

#[test]
fn experiment_on_two_orthogonal_patterns_writes_one_zero_similarity_row() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("patterns.csv"),
        "name,f1,f2\na,1,0\nb,0,1\n",
    )
    .unwrap();
    let out = genrec(
        &["experiment", "--patterns", "patterns.csv", "-o", "out.csv"],
        dir.path(),
    );
    assert!(out.status.success());
    let text = std::fs::read_to_string(dir.path().join("out.csv")).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 1);
    assert!(rows[0].starts_with("0,1,0,"), "row was: {}", rows[0]);
    assert!(rows[0].ends_with("true,true"));
}

#[test]
fn experiment_flags_duplicate_pattern_as_singular_but_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("patterns.csv"),
        "name,f1,f2\na,1,0\nb,1,0\nc,0,1\n",
    )
    .unwrap();
    let out = genrec(
        &["experiment", "--patterns", "patterns.csv", "-o", "out.csv"],
        dir.path(),
    );
    assert!(out.status.success());
    assert!(stdout(&out).contains("1 singular"));
    let text = std::fs::read_to_string(dir.path().join("out.csv")).unwrap();
    let singular_row = text
        .lines()
        .find(|l| l.contains("inf"))
        .expect("a flagged row");
    assert!(
        singular_row.contains(",,"),
        "skipped pair should have empty iteration cells"
    );
    assert!(singular_row.ends_with("false,false"));
}

#[test]
fn experiment_requires_a_pattern_source() {
    let dir = tempfile::tempdir().unwrap();
    let out = genrec(&["experiment", "-o", "out.csv"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn experiment_random_prints_rank_correlations() {
    let dir = tempfile::tempdir().unwrap();
    let out = genrec(
        &[
            "experiment",
            "--random",
            "--seed",
            "3",
            "--count",
            "8",
            "--dim",
            "64",
            "-o",
            "out.csv",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("rank correlation similarity vs iterations (least squares)"));
    assert!(text.contains("rank correlation similarity vs condition number"));
    let csv = std::fs::read_to_string(dir.path().join("out.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 28); // header + C(8,2) pairs
}

#[test]
fn missing_files_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = genrec(&["classify", "nope.txt", "--input", "1"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = genrec(
        &["experiment", "--patterns", "nope.csv", "-o", "o.csv"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_flag_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = genrec(&["classify", "--bogus"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}
