use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use cfk::{run, EXIT_CAP, EXIT_FAIL, EXIT_INPUT, EXIT_PASS};
use cfk_core::Rational;
use cfk_dsl::parse;
use serde_json::Value;

fn corpus(name: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name).join("input.cfk");
    p.to_string_lossy().into_owned()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("cfk-cli-tests-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

struct Run {
    code: u8,
    out: String,
    err: String,
}

impl Run {
    fn json(&self) -> Value {
        serde_json::from_str(&self.out).unwrap_or_else(|e| panic!("{e}: {}", self.out))
    }
}

fn cfk(args: &[&str]) -> Run {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(std::iter::once("cfk").chain(args.iter().copied()), &mut out, &mut err);
    Run {
        code,
        out: String::from_utf8(out).unwrap(),
        err: String::from_utf8(err).unwrap(),
    }
}

fn write(name: &str, text: &str) -> String {
    let path = scratch(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn statuses(report: &Value) -> Vec<String> {
    report["results"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| format!("{} {} {}", r["subject"].as_str().unwrap(), r["check"].as_str().unwrap(), r["status"].as_str().unwrap()))
        .collect()
}

fn read_doc(path: &Path) -> cfk_dsl::Document {
    parse(&std::fs::read_to_string(path).unwrap(), &BTreeMap::new()).unwrap()
}

#[test]
fn check_virasoro_passes() {
    let r = cfk(&["check", &corpus("virasoro")]);
    assert_eq!(r.code, EXIT_PASS, "{}", r.err);
    let v = r.json();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["status"], "pass");
    assert_eq!(v["input"]["file"], "input.cfk");
    assert_eq!(statuses(&v), vec!["Vir axioms pass", "Cur axioms pass"]);
}

#[test]
fn corrupted_virasoro_fails_with_residual() {
    let path = write("vir_bad.cfk", "algebra V : lie { gens L; [L,L] = (d + 3*l) L; }");
    let r = cfk(&["check", &path]);
    assert_eq!(r.code, EXIT_FAIL);
    let v = r.json();
    let result = &v["results"][0];
    assert_eq!(result["status"], "fail");
    assert!(result["violation_count"].as_u64().unwrap() > 0);
    assert!(!result["violations"][0]["residual"].as_array().unwrap().is_empty());
}

#[test]
fn empty_file_passes_vacuously() {
    let r = cfk(&["check", &write("empty.cfk", "")]);
    assert_eq!(r.code, EXIT_PASS);
    assert_eq!(r.json()["results"], Value::Array(vec![]));
}

#[test]
fn input_errors_exit_with_two() {
    let path = write("bad.cfk", "algebra A : lie { gens X; [X,Y] = X; }");
    let r = cfk(&["check", &path]);
    assert_eq!(r.code, EXIT_INPUT);
    assert!(r.err.contains("error at 1:30: `Y` is not a generator of `A`"), "{}", r.err);
    assert!(r.out.is_empty());
    assert_eq!(cfk(&["check", "/nonexistent/x.cfk"]).code, EXIT_INPUT);
    assert_eq!(cfk(&["check", &corpus("virasoro"), "--param", "a"]).code, EXIT_INPUT);
    assert_eq!(cfk(&["frobnicate"]).code, EXIT_INPUT);
    let unknown = cfk(&["structure", &corpus("virasoro"), "Nope"]);
    assert_eq!(unknown.code, EXIT_INPUT, "{}", unknown.err);
}

#[test]
fn named_checks_and_json_output() {
    let json = scratch("named.json");
    let r = cfk(&["check", &corpus("negative_controls"), "Vir", "--json", json.to_str().unwrap()]);
    assert_eq!(r.code, EXIT_PASS);
    assert_eq!(r.out, "PASS Vir axioms\n");
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(statuses(&v), vec!["Vir axioms pass"]);
    assert_eq!(cfk(&["check", &corpus("negative_controls"), "VirBad"]).code, EXIT_FAIL);
}

#[test]
fn bicrossed_writes_the_ambient_algebra() {
    let out = scratch("w10.cfk");
    let r = cfk(&["bicrossed", &corpus("w_ab"), "P", "--param", "a=1", "--param", "b=0", "-o", out.to_str().unwrap()]);
    assert_eq!(r.code, EXIT_PASS, "{}", r.err);
    let written = read_doc(&out);
    let mut params = BTreeMap::new();
    params.insert("a".to_string(), Rational::from_integer(1.into()));
    params.insert("b".to_string(), Rational::from_integer(0.into()));
    let src = std::fs::read_to_string(corpus("w_ab")).unwrap();
    let ambient = parse(&src, &params).unwrap();
    assert_eq!(written.algebra("E").unwrap().algebra, ambient.algebra("W").unwrap().algebra);
}

#[test]
fn deform_writes_the_deformed_algebra() {
    let out = scratch("q3.cfk");
    let r = cfk(&["deform", &corpus("w_one"), "P", "phi3", "-o", out.to_str().unwrap()]);
    assert_eq!(r.code, EXIT_PASS, "{}", r.err);
    let q = read_doc(&out);
    let q3 = &q.algebra("Q_phi3").unwrap().algebra;
    assert_eq!(q3.entry(0, 0), &["3*d + 6*l".parse().unwrap()]);
    let failing = cfk(&["deform", &corpus("w_ab"), "P", "one", "--param", "a=2", "--param", "b=0"]);
    assert_eq!(failing.code, EXIT_FAIL);
    assert!(failing.json()["results"][0]["violations"].is_array());
}

#[test]
fn constraints_then_solve() {
    let sys = scratch("w20.json");
    let r = cfk(&["constraints", &corpus("w_ab"), "P", "--param", "a=2", "--param", "b=0", "-o", sys.to_str().unwrap()]);
    assert_eq!(r.code, EXIT_PASS, "{}", r.err);
    assert_eq!(r.json()["data"]["equations"], serde_json::json!(["u0^2"]));
    let solved = cfk(&["solve", sys.to_str().unwrap()]);
    assert_eq!(solved.code, EXIT_PASS);
    assert_eq!(solved.json()["data"]["solutions"], serde_json::json!([{ "u0": "0" }]));
    let capped = cfk(&["solve", sys.to_str().unwrap(), "--cap", "0"]);
    assert_eq!(capped.code, EXIT_CAP);
    assert!(capped.err.contains("cap"));

    let empty = cfk(&["constraints", &corpus("w_ab"), "P", "--param", "a=1", "--param", "b=0"]);
    assert_eq!(empty.json()["data"]["equations"], serde_json::json!([]));
}

#[test]
fn equivalences_and_search() {
    let r = cfk(&["equiv", &corpus("sv"), "e51"]);
    assert_eq!(r.code, EXIT_PASS, "{}", r.err);
    let found = cfk(&["search", &corpus("sv"), "P", "phi05", "phi01", "--diagonal", "--grid-num", "5", "--grid-den", "1"]);
    assert_eq!(found.code, EXIT_PASS);
    assert_eq!(found.json()["data"]["witness"], serde_json::json!([["5", "0"], ["0", "25"]]));
    let none = cfk(&["search", &corpus("sv"), "P", "phi01", "phi00", "--diagonal", "--grid-num", "3"]);
    assert_eq!(none.code, EXIT_FAIL);
    assert_eq!(none.json()["results"][0]["note"], "not found within searched family");
}

#[test]
fn morphisms_and_structure() {
    assert_eq!(cfk(&["morphism", &corpus("sv"), "scale21"]).code, EXIT_PASS);
    let printed = cfk(&["morphism", &corpus("sv"), "printed21"]);
    assert_eq!(printed.code, EXIT_FAIL);
    let theta = cfk(&["morphism", &corpus("sec4_assoc"), "theta", "--param", "b=1", "--param", "c=1"]);
    assert_eq!(theta.code, EXIT_PASS);
    assert_eq!(theta.json()["data"]["morphisms"]["theta"]["isomorphism"], true);
    let s = cfk(&["structure", &corpus("sv"), "Qt1"]);
    assert_eq!(s.code, EXIT_PASS);
    assert_eq!(s.json()["data"]["solvability"], "not_solvable");
    let q = cfk(&["structure", &corpus("sv"), "Q01"]);
    assert_eq!(q.json()["data"]["solvability"], "solvable(2)");
}

#[test]
fn cli_parameters_override_file_parameters() {
    let r = cfk(&["report", &corpus("multi_w"), "--param", "b=5"]);
    let v = r.json();
    assert_eq!(v["params"]["b"], "5");
    let table = v["data"]["algebras"]["E0"]["table"].as_array().unwrap();
    assert!(table.iter().any(|t| t == "[L,W1] = (d + l + 5) W1"), "{table:?}");
}

#[test]
fn reports_are_deterministic_apart_from_timings() {
    let strip = |mut v: Value| {
        v.as_object_mut().unwrap().remove("timings");
        v
    };
    let a = strip(cfk(&["report", &corpus("sv")]).json());
    let b = strip(cfk(&["report", &corpus("sv")]).json());
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn warnings_go_to_stderr() {
    let path = write("unused.cfk", "algebra A : lie { gens X; }");
    let r = cfk(&["check", &path, "--param", "q=1"]);
    assert_eq!(r.code, EXIT_PASS);
    assert!(r.err.contains("parameter `q` is given but never used"), "{}", r.err);
    r.json();
}
