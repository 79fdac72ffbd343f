use qsl_core::harness::{corpus, read_series, simulate, write_records};
use qsl_core::speedlimit::bound_from_series;
use qsl_core::QslError;

#[test]
fn csv_round_trip_reproduces_the_report() {
    let dir = tempfile::tempdir().unwrap();
    for (k, entry) in corpus::builtin_corpus(corpus::DEFAULT_SEED)
        .iter()
        .enumerate()
        .step_by(9)
    {
        let out = simulate(&entry.scenario).unwrap();
        let path = dir.path().join(format!("{k}.csv"));
        write_records(&path, entry.scenario.dim, &out.records).unwrap();
        let file = read_series(&path).unwrap();
        let again = bound_from_series(&file.series, file.distance, file.hbar).unwrap();
        let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(1e-300);
        assert!(
            rel(out.report.bound, again.bound) < 1e-12 || out.report.bound == again.bound,
            "{}",
            entry.name
        );
        assert!(rel(out.report.tau, again.tau) < 1e-15 || out.report.tau == 0.0);
        assert_eq!(file.degeneracy_flags, out.degeneracy_flags());
    }
}

#[test]
fn unparsable_value_names_row_and_column() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(
        &path,
        "t,dE,dE_D,sigma_dot,activity,lhs_norm,trace_distance_from_t0,hbar\n0,0,0,0,0,0,0,1\n1,x,0,0,0,0,0,1\n",
    )
    .unwrap();
    match read_series(&path) {
        Err(QslError::Schema(msg)) => assert!(msg.contains("row 3") && msg.contains("`dE`"), "{msg}"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn absent_file_is_an_io_error() {
    assert!(matches!(
        read_series(std::path::Path::new("/no/such.csv")),
        Err(QslError::Io { .. })
    ));
}
