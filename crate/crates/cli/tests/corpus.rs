use std::path::PathBuf;

use cfk::corpus::{fixtures, render_fixture, run_corpus, Outcome};

fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

#[test]
fn goldens_match() {
    let results = run_corpus(&corpus_dir(), false).unwrap();
    assert!(results.len() >= 7);
    for r in results {
        assert_eq!(r.outcome, Outcome::Match, "fixture {}", r.name);
    }
}

#[test]
fn goldens_regenerate_identically() {
    for fixture in fixtures(&corpus_dir()).unwrap() {
        assert_eq!(render_fixture(&fixture).unwrap(), render_fixture(&fixture).unwrap());
    }
}

#[test]
fn negative_controls_fail() {
    let fixture = corpus_dir().join("negative_controls");
    let golden = render_fixture(&fixture).unwrap();
    let report = &golden["runs"][0]["report"];
    assert_eq!(report["status"], "fail");
    let failing: Vec<String> = report["results"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| r["status"] == "fail")
        .map(|r| format!("{} {}", r["subject"].as_str().unwrap(), r["check"].as_str().unwrap()))
        .collect();
    assert_eq!(failing, vec![
        "VirBad axioms",
        "bad deformation map",
        "bad graph embedding",
        "Bim matched pair",
        "wrong morphism",
    ]);
}

#[test]
fn deformation_verdicts_follow_the_dichotomy() {
    let golden = render_fixture(&corpus_dir().join("w_ab")).unwrap();
    for run in golden["runs"].as_array().unwrap() {
        let a_is_one = run["params"].as_str().unwrap().contains("a=1");
        let verdict = run["report"]["results"]
            .as_array()
            .unwrap()
            .iter()
            .find(|r| r["subject"] == "one" && r["check"] == "deformation map")
            .unwrap()["status"]
            .clone();
        assert_eq!(verdict, if a_is_one { "pass" } else { "fail" }, "{}", run["params"]);
    }
}
