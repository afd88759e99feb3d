use std::process::{Command, Output};

use ksoliton::character::CharacterJson;
use ksoliton::io::{self, DfReport, GitReport, PolytopeReport, WeightTableReport, XiReport};
use ksoliton::momentmap::VerificationReport;
use ksoliton::soliton::EquivariantWeightTable;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ksoliton")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn reports_validate_against_schemas() {
    let o = run(&["polytope", "--example", "bl1cp2", "--m-max", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let r: PolytopeReport = io::validate(&stdout(&o)).unwrap();
    assert_eq!(r.lattice_counts.last().unwrap().h0, 49);

    let o = run(&["xi", "--example", "bl1cp2", "--m-list", "10,20,40"]);
    let r: XiReport = io::validate(&stdout(&o)).unwrap();
    assert!((r.xi_star[0] + 0.5276).abs() < 1e-3);
    assert_eq!(r.table.len(), 3);

    let o = run(&["df", "--example", "cp2", "--xi", "0.3,-0.2", "--lambda", "1,0"]);
    assert_eq!(o.status.code(), Some(0));
    let _: DfReport = io::validate(&stdout(&o)).unwrap();

    let o = run(&["character", "--example", "cp1", "--m", "2"]);
    let chi: CharacterJson = io::validate(&stdout(&o)).unwrap();
    assert_eq!(chi.weights.len(), 5);

    let o = run(&["git", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let _: GitReport = io::validate(&stdout(&o)).unwrap();

    let o = run(&["verify-momentmap", "--seeds", "2", "--nodes", "64"]);
    assert_eq!(o.status.code(), Some(0));
    let r: VerificationReport = io::validate(&stdout(&o)).unwrap();
    assert!(r.passed);
}

#[test]
fn malformed_reports_are_rejected() {
    assert!(io::validate::<XiReport>(r#"{"xi_star": [0.0], "residual": 0.0}"#).is_err());
    assert!(io::validate::<PolytopeReport>("not json").is_err());
}

#[test]
fn fault_injection_exits_one() {
    let ok = run(&["verify-appendixb", "--seeds", "5"]);
    assert_eq!(ok.status.code(), Some(0));
    let bad = run(&["verify-appendixb", "--seeds", "5", "--inject-fault"]);
    assert_eq!(bad.status.code(), Some(1));
    let r: VerificationReport = io::validate(&stdout(&bad)).unwrap();
    assert!(!r.passed);
    assert!(String::from_utf8_lossy(&bad.stderr).contains("FAIL"));
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["polytope"][..],
        &["polytope", "--example", "nope"],
        &["xi", "--example", "cp2", "--tol", "-1"],
        &["df", "--example", "cp2", "--xi", "1"],
        &["frobnicate"],
        &["character", "--example", "cp1", "--m", "0"],
    ] {
        let o = run(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(o.stdout.is_empty(), "{args:?}");
    }
}

#[test]
fn git_assert_polystable() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rep.json");
    std::fs::write(&path, r#"{"k": 1, "weights": [[1], [-1]], "point": [[1.0, 0.0], [0.0, 0.0]]}"#).unwrap();
    let p = path.to_str().unwrap();
    let o = run(&["git", "--input", p, "--assert-polystable"]);
    assert_eq!(o.status.code(), Some(1));
    let r: GitReport = io::validate(&stdout(&o)).unwrap();
    assert_eq!(r.verdict.destabilizer, Some(vec![-1]));
    std::fs::write(&path, r#"{"k": 1, "weights": [[1], [-1]], "point": [[2.0, 0.0], [1.0, 0.0]]}"#).unwrap();
    assert_eq!(run(&["git", "--input", p, "--assert-polystable"]).status.code(), Some(0));
    std::fs::write(&path, r#"{"k": 1, "weights": [[1]], "point": [[1.0, 0.0]], "extra": 1}"#).unwrap();
    assert_eq!(run(&["git", "--input", p]).status.code(), Some(2));
}

#[test]
fn polytope_from_file_and_output_flag() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("p.json");
    let out = dir.path().join("report.json");
    std::fs::write(&input, r#"{"dim": 2, "rays": [[1, 0], [0, 1], [-1, -1]]}"#).unwrap();
    let o = run(&["polytope", "--input", input.to_str().unwrap(), "--output", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let file = std::fs::read_to_string(&out).unwrap();
    let direct = run(&["polytope", "--example", "cp2"]);
    assert_eq!(file, stdout(&direct));
    let o = run(&["polytope", "--example", "cp2", "--format", "csv", "--m-max", "2"]);
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("m,u1,u2"));
    assert_eq!(lines.count(), 10 + 28);
}

#[test]
fn weight_table_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("table.json");
    let p = ksoliton::catalog::example("cp1").unwrap();
    let table = EquivariantWeightTable::product_configuration(&p, &[1], 12).unwrap();
    std::fs::write(&path, serde_json::to_string(&table.to_json()).unwrap()).unwrap();
    let o = run(&["df", "--example", "cp1", "--weight-table", path.to_str().unwrap(), "--m-max", "12", "--xi", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r: WeightTableReport = io::validate(&stdout(&o)).unwrap();
    let exact = -(-1f64).exp();
    assert!((r.estimate - exact).abs() < 1e-2, "{} vs {exact}", r.estimate);
    std::fs::write(&path, r#"{"levels": [{"m": 1, "weights": [{"u": [0], "mult": 1}]}]}"#).unwrap();
    let o = run(&["df", "--example", "cp1", "--weight-table", path.to_str().unwrap(), "--m-max", "3"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn convergence_csv() {
    let o = run(&["df", "--example", "cp1", "--xi", "1", "--lambda", "1", "--format", "csv", "--m-list", "10,20,40"]);
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "m,df_discrete,df_continuum,gap,slope");
    assert_eq!(lines.len(), 4);
}
