use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn fixture(name: &str) -> String {
    format!("{}/fixtures/{name}.site", env!("CARGO_MANIFEST_DIR"))
}

fn relsite(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relsite")).args(args).env_remove("RELSITE_GUARDS").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut full = vec!["--format", "json"];
    full.extend_from_slice(args);
    let o = relsite(&full);
    (o.status.code().unwrap(), serde_json::from_slice(&o.stdout).unwrap())
}

#[test]
fn relative_frobenius_on_pow2_passes() {
    let o = relsite(&["check", &fixture("pow2"), "--property", "relative-frobenius"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("PASS relative-frobenius ("), "{}", stdout(&o));
}

/// Ideals of `bot < u < top` closed under `{u} covers top`, by enumerating
/// the eight subsets.
fn sier_ideals() -> usize {
    (0u8..8)
        .filter(|&s| {
            let has = |i: u8| s >> i & 1 == 1;
            let down = (!has(1) || has(0)) && (!has(2) || has(1));
            down && (!has(1) || has(2))
        })
        .count()
}

#[test]
fn ideal_completion_of_sier_is_a_three_chain() {
    let (code, v) = json(&["ideal-completion", &fixture("sier"), "--topology", "SIER-u-covers-top"]);
    assert_eq!(code, 0);
    let b = relsite::parse_site_bundle(v["result"].as_str().unwrap()).unwrap();
    let s = &b.sections[0];
    assert_eq!(s.entries("element").count(), sier_ideals());
    assert_eq!(sier_ideals(), 3);
    // a chain on n elements has n - 1 covering pairs, each element below at most one
    let leq: Vec<&Vec<String>> = s.entries("leq").map(|e| &e.args).collect();
    assert_eq!(leq.len(), 2);
    assert_ne!(leq[0][0], leq[1][0]);
    assert_ne!(leq[0][1], leq[1][1]);
}

#[test]
fn corpus_sweep_holds_on_every_instance() {
    let (code, v) = json(&["corpus", "--seed", "7", "--count", "50", "--property", "existential-biconditional"]);
    assert_eq!(code, 0);
    let checks = v["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 50);
    assert!(checks.iter().all(|c| c["status"] == "pass"));
    assert_eq!(v["seed"], 7);
    let guards = relsite_core::Guards::default();
    let sites = relsite_core::corpus::random_sites(7, 50, &guards).unwrap();
    let labels: Vec<&str> = checks.iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert_eq!(labels, sites.iter().map(|s| s.label.as_str()).collect::<Vec<_>>());
}

#[test]
fn exit_codes() {
    assert_eq!(relsite(&["validate", &fixture("p2")]).status.code(), Some(0));
    assert_eq!(relsite(&["validate", &fixture("m3")]).status.code(), Some(1));
    assert_eq!(relsite(&["--bogus", "validate", &fixture("p2")]).status.code(), Some(2));
    assert_eq!(relsite(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(relsite(&["validate", "/nonexistent.site"]).status.code(), Some(2));
    let point = ["factorize", &fixture("p2-top"), "--functor", "top", "--source-topology", "ONE-trivial"];
    assert_eq!(relsite(&[&point[..], &["--target-topology", "P2-canonical"]].concat()).status.code(), Some(0));
    let id =
        ["factorize", &fixture("arrow-identity"), "--functor", "I", "--source-topology", "T", "--target-topology", "T"];
    assert_eq!(relsite(&id).status.code(), Some(3));
}

#[test]
fn errors_are_classified() {
    let dir = std::env::temp_dir().join(format!("relsite-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.site");
    std::fs::write(&bad, "[preorder P]\nelement a b\n").unwrap();
    let (code, v) = json(&["validate", bad.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert_eq!(v["error"]["kind"], "syntax");
    assert!(v["error"]["message"].as_str().unwrap().starts_with("2:11: "));
    std::fs::write(&bad, "[topology J]\non P\nkind trivial\n").unwrap();
    let (_, v) = json(&["validate", bad.to_str().unwrap()]);
    assert_eq!(v["error"]["kind"], "resolution");
    assert!(v["error"]["message"].as_str().unwrap().contains("`P`"));
    let (code, v) = json(&["check", &fixture("pow2"), "--property", "no-such-check"]);
    assert_eq!(code, 2);
    assert_eq!(v["error"]["kind"], "usage");
    let (code, v) = json(&["check", &fixture("pow2"), "--property", "relative-bc", "--site", "nope"]);
    assert_eq!(code, 2);
    assert_eq!(v["error"]["kind"], "resolution");
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn report_schema() {
    let (code, v) = json(&["check", &fixture("frobenius-broken"), "--property", "relative-frobenius"]);
    assert_eq!(code, 1);
    assert_eq!(v["schema"], "relsite-report/1");
    assert_eq!(v["status"], "fail");
    assert_eq!(v["exit_code"], 1);
    assert_eq!(v["guards"]["sieve_arrows"], 20);
    assert_eq!(v["command"][0], "--format");
    assert!(v["seed"].is_null() && v["error"].is_null() && v["result"].is_null());
    assert!(v.get("timing_ms").is_none());
    let c = &v["checks"][0];
    assert_eq!(c["name"], "relative-frobenius");
    assert_eq!(c["status"], "fail");
    let roles: Vec<&str> = c["witness"].as_array().unwrap().iter().map(|w| w["role"].as_str().unwrap()).collect();
    assert!(roles.contains(&"arrow"), "{roles:?}");
    let (_, v) = json(&["--timing", "validate", &fixture("one")]);
    assert!(v["timing_ms"].is_u64());
}

#[test]
fn structured_reports_are_deterministic() {
    let args = ["--format", "json", "existential-topology", &fixture("pow2"), "--site", "POW2-site"];
    let a = relsite(&args).stdout;
    let b = relsite(&args).stdout;
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn guards_come_from_the_environment_and_flags() {
    let run = |env: Option<&str>, flags: &[&str]| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_relsite"));
        c.args(["--format", "json"]).args(flags).args(["validate", &fixture("pow2")]);
        match env {
            Some(e) => c.env("RELSITE_GUARDS", e),
            None => c.env_remove("RELSITE_GUARDS"),
        };
        let o = c.output().unwrap();
        (o.status.code().unwrap(), serde_json::from_slice::<Value>(&o.stdout).unwrap())
    };
    let (code, v) = run(Some("sieve_arrows=1, ideals=3"), &[]);
    assert_eq!(code, 2);
    assert_eq!(v["error"]["kind"], "guard");
    assert_eq!(v["guards"]["ideals"], 3);
    let (code, v) = run(Some("sieve_arrows=1"), &["--guard", "sieve-arrows=20"]);
    assert_eq!(code, 0);
    assert_eq!(v["guards"]["sieve_arrows"], 20);
    let (code, v) = run(None, &["--guard", "depth=3"]);
    assert_eq!(code, 2);
    assert_eq!(v["error"]["kind"], "usage");
}

#[test]
fn bundles_can_come_from_stdin() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_relsite"))
        .args(["validate", "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(std::fs::read(fixture("sier")).unwrap().as_slice()).unwrap();
    let o = child.wait_with_output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("PASS SIER-u-covers-top/topology-transitivity"));
}

#[test]
fn emitted_locales_load_and_validate() {
    let (_, v) = json(&["fibred-completion", &fixture("pow2"), "--topology", "POW2-existential"]);
    let text = v["result"].as_str().unwrap();
    let b = relsite::parse_site_bundle(text).unwrap();
    assert_eq!(relsite::print_site_bundle(&b), text);
    let r = relsite::resolve(&b, &relsite_core::Guards::default()).unwrap();
    assert_eq!(r.sites.len(), 1);
    let o = relsite::run(
        &relsite::Command::Validate(relsite::commands::BundleArg { bundle: "-".into() }),
        text,
        &Default::default(),
    );
    assert_eq!(o.exit_code(), 0, "{:?}", o.report.failing());
}

#[test]
fn giraud_topology_is_emitted_on_the_total() {
    let (code, v) = json(&["giraud", &fixture("pow2"), "--indexed", "POW2", "--topology", "P2-canonical"]);
    assert_eq!(code, 0);
    let text = v["result"].as_str().unwrap();
    assert!(text.starts_with("[topology giraud-POW2]\non total POW2\nkind sieves\n"));
    let source = std::fs::read_to_string(fixture("pow2")).unwrap();
    let combined = format!("{source}\n{text}");
    let o = relsite::run(
        &relsite::Command::Validate(relsite::commands::BundleArg { bundle: "-".into() }),
        &combined,
        &Default::default(),
    );
    assert_eq!(o.exit_code(), 0, "{:?} {:?}", o.error, o.report.failing());
}

#[test]
fn family_names_select_whole_families() {
    let names = |v: &Value| -> Vec<String> {
        v["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap().to_string()).collect()
    };
    let (code, v) = json(&["check", &fixture("pow2"), "--property", "fibred-site"]);
    assert_eq!(code, 0);
    assert!(names(&v).contains(&"adjunction".to_string()), "{:?}", names(&v));
    // a check name wins over a family of the same name
    let (_, v) = json(&["check", &fixture("pow2"), "--property", "relative-bc"]);
    assert_eq!(names(&v), ["relative-bc"]);
    let (code, v) = json(&["check", &fixture("pow2"), "--property", "no-such-check"]);
    assert_eq!(code, 2);
    assert!(v["error"]["message"].as_str().unwrap().contains("families: fibred-site"));
}
