use semiclassical::integrator::IntegratorConfig;
use semiclassical::pipeline::{
    read_results, run_sweep, write_results, OutputFormat, Regime, RowStatus, SweepConfig, SweepRow,
    CSV_HEADER, RESCALED_LMC_COLUMN,
};
use semiclassical::quantifiers::QuantifierReport;

fn row(regime: Regime, er: f64, h: f64) -> SweepRow {
    SweepRow {
        regime,
        er,
        invariant_i: if er.is_infinite() {
            0.0
        } else {
            (0.6 / er).powi(2)
        },
        report: QuantifierReport {
            entropy_s: h * 120f64.ln(),
            entropy_h: h,
            d_lmc: 0.47,
            c_lmc: 0.47 * h,
            d_js: 0.93,
            c_js: 0.9 * h,
        },
        status: RowStatus::Ok,
    }
}

fn small_config() -> SweepConfig {
    SweepConfig {
        n_points: 4,
        er_max: 50.0,
        integrator: IntegratorConfig {
            n_samples: 2000,
            ..IntegratorConfig::default()
        },
        ..SweepConfig::default()
    }
}

#[test]
fn csv_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rows.csv");
    let rows = vec![
        row(Regime::Conservative, 1.5, 0.2),
        row(Regime::Conservative, 3.25e4, 0.1767),
        row(Regime::Conservative, f64::INFINITY, 0.17676),
    ];
    write_results(&rows, &path, OutputFormat::Csv, None).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(!text.contains('\r'));
    assert_eq!(text.lines().next().unwrap(), CSV_HEADER.join(","));
    assert!(text
        .lines()
        .last()
        .unwrap()
        .starts_with("conservative,inf,0,"));
    let back = read_results(&path).unwrap();
    assert_eq!(back.len(), 3);
    for (a, b) in rows.iter().zip(&back) {
        assert_eq!(a.regime, b.regime);
        assert_eq!(a.status, b.status);
        assert!(a.er == b.er || (a.er - b.er).abs() < 1e-11 * a.er);
        assert!((a.report.c_js - b.report.c_js).abs() < 1e-12);
    }
}

#[test]
fn empty_sweep_writes_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.csv");
    write_results(&[], &path, OutputFormat::Csv, None).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text, format!("{}\n", CSV_HEADER.join(",")));
    assert!(read_results(&path).unwrap().is_empty());
}

#[test]
fn rescaled_column_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let rows = vec![row(Regime::Dissipative, 2.0, 0.5)];

    let csv_path = dir.path().join("r.csv");
    write_results(&rows, &csv_path, OutputFormat::Csv, Some(1.196)).unwrap();
    let text = std::fs::read_to_string(&csv_path).unwrap();
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    assert_eq!(header.last(), Some(&RESCALED_LMC_COLUMN));
    let last: f64 = text
        .lines()
        .nth(1)
        .unwrap()
        .rsplit(',')
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert!((last - 1.196 * 0.47 * 0.5).abs() < 1e-12);
    assert_eq!(read_results(&csv_path).unwrap().len(), 1);

    let json_path = dir.path().join("r.json");
    let mut rows = rows;
    rows.push(row(Regime::Dissipative, f64::INFINITY, 0.17));
    write_results(&rows, &json_path, OutputFormat::Json, None).unwrap();
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    let items = v.as_array().unwrap();
    assert_eq!(items.len(), 2);
    assert_eq!(items[0]["regime"], "dissipative");
    assert_eq!(items[1]["er"], "inf");
    assert_eq!(items[0]["status"], "ok");
}

#[test]
fn unwritable_path_is_io_error() {
    let err = write_results(
        &[],
        std::path::Path::new("/nonexistent-dir/out.csv"),
        OutputFormat::Csv,
        None,
    )
    .unwrap_err();
    assert!(matches!(err, semiclassical::Error::Io { .. }));
}

#[test]
fn small_sweep_layout_and_determinism() {
    let cfg = small_config();
    let rows = run_sweep(&cfg).unwrap();
    assert_eq!(rows.len(), 2 * (cfg.n_points + 1));
    for (k, regime) in [Regime::Conservative, Regime::Dissipative]
        .iter()
        .enumerate()
    {
        let block = &rows[k * 5..(k + 1) * 5];
        assert!(block
            .iter()
            .all(|r| r.regime == *regime && r.status.is_ok()));
        assert!(block[..4].windows(2).all(|w| w[0].er < w[1].er));
        assert!(block[4].is_classical());
        assert_eq!(block[4].invariant_i, 0.0);
    }
    assert_eq!(rows, run_sweep(&cfg).unwrap());
}
