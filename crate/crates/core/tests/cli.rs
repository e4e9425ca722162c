use std::fs;
use std::process::{Command, Output};

use tempfile::TempDir;

fn varclust(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_varclust")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn analyze_builtin() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("run");
    let o = varclust(&["analyze", "--builtin", "usarrests", "--k", "2", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("PC1     62.006 %"));
    assert!(text.contains("cluster 2: UrbanPop"));
    assert!(text.contains("wrote 9 file(s)"));
    assert!(out.join("summary.json").exists());

    // Second run into the same directory refuses to overwrite.
    let again = varclust(&["analyze", "--builtin", "usarrests", "--k", "2", "--out", out.to_str().unwrap()]);
    assert_eq!(again.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&again.stderr).contains("--force"));
    let forced = varclust(&[
        "analyze",
        "--builtin",
        "usarrests",
        "--k",
        "2",
        "--out",
        out.to_str().unwrap(),
        "--force",
    ]);
    assert_eq!(forced.status.code(), Some(0));
}

#[test]
fn bad_inputs_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("o");
    let out = out.to_str().unwrap();
    let missing = dir.path().join("missing.csv");
    for args in [
        vec!["analyze", "--builtin", "mtcars", "--out", out],
        vec!["analyze", "--input", missing.to_str().unwrap(), "--out", out],
        vec!["analyze", "--builtin", "usarrests", "--k", "9", "--out", out],
        vec!["analyze", "--builtin", "usarrests", "--k-range", "3", "--out", out],
        vec!["analyze", "--builtin", "usarrests", "--formats", "pdf", "--out", out],
        vec!["selectk", "--builtin", "usarrests", "--k-range", "1:2", "--out", out],
        vec!["analyze", "--builtin", "usarrests", "--columns", "Murder,Nope", "--out", out],
    ] {
        let o = varclust(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(String::from_utf8_lossy(&o.stderr).starts_with("error: "));
    }
}

#[test]
fn csv_input_with_row_names() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("data.csv");
    fs::write(&input, "name,x,y,z\na,1,4,2\nb,2,1,3\nc,3,5,1\nd,4,2,5\n").unwrap();
    let out = dir.path().join("o");
    let o = varclust(&[
        "pca",
        "--input",
        input.to_str().unwrap(),
        "--rownames",
        "--out",
        out.to_str().unwrap(),
        "--formats",
        "csv",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let mut names: Vec<String> = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names, vec!["eigenvalues.csv", "loadings.csv"]);

    // Without --rownames the text column cannot be parsed.
    let o = varclust(&["pca", "--input", input.to_str().unwrap(), "--out", out.to_str().unwrap(), "--force"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn selectk_prints_curve() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("o");
    let o = varclust(&[
        "selectk",
        "--builtin",
        "usarrests",
        "--k-range",
        "1:4",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("suggested K = 2 (elbow)"));
    assert_eq!(text.lines().filter(|l| l.trim_start().starts_with(char::is_numeric)).count(), 4);
}

#[test]
fn help_lists_subcommands() {
    let o = varclust(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for cmd in ["analyze", "selectk", "pca"] {
        assert!(text.contains(cmd));
    }
}
