//! End-to-end acceptance: one PASS/FAIL line per criterion.
//!
//! The corpus verification runs once through the real binary; its per-check
//! lines are regrouped by criterion. Criteria that need more than the suite
//! (exit codes, round-trips, sweep ratios) are checked here directly.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, Output};

use qsl_core::harness::{corpus, parse_report_lines};
use qsl_core::limits::quasi_adiabatic_check;
use qsl_core::Scenario;

fn qsl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qsl"))
        .args(args)
        .env_remove("QSL_SEED")
        .output()
        .expect("binary runs")
}

struct Line {
    passed: bool,
    slack: f64,
}

/// `PASS name worst_slack=...` lines from `qsl verify`.
fn parse_checks(stdout: &str) -> BTreeMap<String, Line> {
    stdout
        .lines()
        .filter_map(|l| {
            let mut words = l.split_whitespace();
            let status = words.next()?;
            if status != "PASS" && status != "FAIL" {
                return None;
            }
            let name = words.next()?.to_string();
            let slack = words.next()?.strip_prefix("worst_slack=")?.parse().ok()?;
            Some((
                name,
                Line {
                    passed: status == "PASS",
                    slack,
                },
            ))
        })
        .collect()
}

#[derive(Default)]
struct Criterion {
    failures: Vec<String>,
}

impl Criterion {
    fn require(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.failures.push(what.into());
        }
    }

    fn checks(&mut self, table: &BTreeMap<String, Line>, names: &[&str]) {
        for name in names {
            match table.get(*name) {
                Some(l) => self.require(l.passed, format!("{name} slack={:+.2e}", l.slack)),
                None => self.require(false, format!("{name} missing")),
            }
        }
    }
}

fn write_scenario(dir: &Path, name: &str, scenario: &Scenario) -> String {
    let path = dir.join(name);
    std::fs::write(&path, scenario.to_json()).unwrap();
    path.to_str().unwrap().to_string()
}

fn report_value(stdout: &[u8], key: &str) -> f64 {
    let text = String::from_utf8_lossy(stdout);
    parse_report_lines(&text)
        .into_iter()
        .find(|(k, _)| k == key)
        .unwrap_or_else(|| panic!("`{key}` missing from\n{text}"))
        .1
        .parse()
        .unwrap()
}

fn round_trip(dir: &Path, name: &str, scenario: &Scenario) -> (f64, f64) {
    let sc = write_scenario(dir, &format!("{name}.json"), scenario);
    let csv = dir.join(format!("{name}.csv"));
    let csv = csv.to_str().unwrap();
    let sim = qsl(&["simulate", "--scenario", &sc, "--out", csv]);
    assert!(sim.status.success(), "{}", String::from_utf8_lossy(&sim.stderr));
    let rep = qsl(&["report", "--traj", csv]);
    assert!(rep.status.success(), "{}", String::from_utf8_lossy(&rep.stderr));
    (report_value(&sim.stdout, "bound"), report_value(&rep.stdout, "bound"))
}

fn main() {
    let verify = qsl(&["verify"]);
    let stdout = String::from_utf8_lossy(&verify.stdout).to_string();
    let table = parse_checks(&stdout);
    let trajectories: usize = stdout
        .lines()
        .last()
        .and_then(|l| l.split(", ").nth(2))
        .and_then(|s| s.split_whitespace().next())
        .and_then(|s| s.parse().ok())
        .unwrap_or(0);

    let mut criteria: Vec<(&str, Criterion)> = Vec::new();

    let mut c = Criterion::default();
    c.checks(&table, &["second_law", "runs_complete"]);
    criteria.push(("second law", c));

    let mut c = Criterion::default();
    c.require(trajectories >= 50, format!("{trajectories} trajectories"));
    c.checks(&table, &["main_bound"]);
    criteria.push(("main speed limit", c));

    let mut c = Criterion::default();
    c.checks(&table, &["bound_chain_formal_le_tau", "bound_chain_main_le_formal"]);
    criteria.push(("bound chain", c));

    let mut c = Criterion::default();
    c.checks(
        &table,
        &[
            "component_unitary",
            "component_bath_unitary",
            "component_population",
            "triangle_assembly",
        ],
    );
    criteria.push(("component inequalities", c));

    let mut c = Criterion::default();
    c.checks(
        &table,
        &[
            "identity_population_speed",
            "identity_escort_decomposition",
            "identity_hd_zero_mean",
            "identity_entropy_balance",
        ],
    );
    criteria.push(("identities", c));

    let mut c = Criterion::default();
    c.checks(&table, &["stationarity_random_triples", "gibbs_stationarity"]);
    criteria.push(("stationarity", c));

    let mut c = Criterion::default();
    c.checks(
        &table,
        &["dissipationless_equals_mt", "rabi_closed_form", "rabi_bound_le_tau"],
    );
    criteria.push(("dissipationless limit", c));

    let mut c = Criterion::default();
    c.checks(
        &table,
        &[
            "classical_populations",
            "classical_coherence_free",
            "classical_bound_agreement",
        ],
    );
    criteria.push(("classical limit", c));

    let mut c = Criterion::default();
    c.checks(&table, &["quasi_adiabatic_exponent", "counter_diabatic_identity"]);
    let qa = quasi_adiabatic_check(&corpus::landau_zener(1.0), &[10.0, 100.0, 1000.0]).unwrap();
    for w in qa.rows.windows(2) {
        let ratio = w[1].e_cd / w[0].e_cd;
        c.require(
            (0.05..=0.3).contains(&ratio),
            format!("e({})/e({}) = {ratio:.3}", w[1].lambda, w[0].lambda),
        );
    }
    criteria.push(("quasi-adiabatic limit", c));

    let mut c = Criterion::default();
    c.checks(&table, &["rk4_order", "trace_preserved", "positivity_preserved"]);
    c.require(
        verify.status.code() == Some(0),
        format!("verify exit {:?}", verify.status.code()),
    );
    let dir = tempfile::tempdir().unwrap();
    let relax = write_scenario(dir.path(), "relax.json", &corpus::thermalization());
    let clean = qsl(&["verify", "--scenario", &relax]);
    c.require(
        clean.status.code() == Some(0),
        format!("clean scenario exit {:?}", clean.status.code()),
    );
    for (fault, check) in [
        ("trace-norm-without-half", "identity_population_speed"),
        ("broken-detailed-balance", "gibbs_stationarity"),
    ] {
        let out = qsl(&["verify", "--scenario", &relax, "--inject-fault", fault]);
        c.require(
            out.status.code() == Some(1),
            format!("{fault} exit {:?}", out.status.code()),
        );
        let caught = parse_checks(&String::from_utf8_lossy(&out.stdout));
        c.require(
            caught.get(check).is_some_and(|l| !l.passed),
            format!("{fault} not caught by {check}"),
        );
    }
    let missing = qsl(&["verify", "--scenario", "/nonexistent/scenario.json"]);
    c.require(
        missing.status.code() == Some(2),
        format!("missing file exit {:?}", missing.status.code()),
    );
    let random = corpus::builtin_corpus(corpus::DEFAULT_SEED).pop().unwrap().scenario;
    for (name, sc) in [("thermalization", corpus::thermalization()), ("random", random)] {
        let (simulated, reported) = round_trip(dir.path(), name, &sc);
        let rel = (simulated - reported).abs() / simulated.abs().max(f64::MIN_POSITIVE);
        c.require(rel <= 1e-9, format!("{name} round-trip rel={rel:.1e}"));
    }
    criteria.push(("numerics and CLI contract", c));

    let mut all = true;
    for (k, (name, c)) in criteria.iter().enumerate() {
        let ok = c.failures.is_empty();
        all &= ok;
        println!("criterion {:>2} {} {name}", k + 1, if ok { "PASS" } else { "FAIL" });
        for f in &c.failures {
            println!("    failed: {f}");
        }
    }
    if !all {
        eprintln!("verify output:\n{stdout}");
        std::process::exit(1);
    }
}
