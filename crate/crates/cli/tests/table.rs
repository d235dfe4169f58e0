use proptest::prelude::*;
use sense_cli::table::{Cell, Kind};
use sense_cli::{diff_tables, parse, CliError, Experiment, ResultTable, RunConfig, Tolerances};

fn sample() -> ResultTable {
    let mut t = ResultTable::new(&[("n", Kind::Int), ("x", Kind::Float), ("y", Kind::Float)]);
    t.meta("experiment", "evolve");
    t.meta("config.model.h0", "0.5");
    for i in 0..5u64 {
        let f = i as f64;
        t.push(vec![i.into(), (0.1 * f).into(), (1e-17 + f.sqrt()).into()]);
    }
    t
}

#[test]
fn csv_layout() {
    let csv = sample().to_csv();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "# experiment = evolve");
    assert_eq!(lines[2], "# schema = n:int,x:float,y:float");
    assert_eq!(lines[3], "n,x,y");
    assert_eq!(lines.len(), 4 + 5);
    assert_eq!(ResultTable::body(&csv).lines().next(), Some("n,x,y"));
}

#[test]
fn csv_round_trip_is_exact() {
    let t = sample();
    assert_eq!(ResultTable::from_csv(&t.to_csv()).unwrap(), t);
}

proptest! {
    #[test]
    fn floats_round_trip_bitwise(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        let mut t = ResultTable::new(&[("x", Kind::Float)]);
        t.push(vec![x.into()]);
        let back = ResultTable::from_csv(&t.to_csv()).unwrap();
        prop_assert_eq!(back.column("x").unwrap()[0].to_bits(), x.to_bits());
    }
}

#[test]
fn malformed_tables_are_rejected() {
    for text in [
        "n\n1\n",
        "# schema = n:int\nm\n1\n",
        "# schema = n:int\nn\n1.5\n",
        "# schema = n:int,x:float\nn,x\n1\n",
        "# schema = n:complex\nn\n1\n",
    ] {
        assert!(matches!(ResultTable::from_csv(text), Err(CliError::Table(_))), "{text:?}");
    }
}

#[test]
fn metadata_round_trips_the_config() {
    let text = "model.h0 = 0.7\nmodel.n = 64\nblock.l = 1..3\ngrid.h1.steps = 10\nseed = 9\n";
    let cfg = RunConfig::from_map(Experiment::QfiScan, &parse(text).unwrap()).unwrap();
    let mut t = ResultTable::new(&[("x", Kind::Float)]);
    for (k, v) in &cfg.resolved {
        t.meta(format!("config.{k}"), v);
    }
    let back = ResultTable::from_csv(&t.to_csv()).unwrap();
    let echoed = back.meta_section("config");
    assert_eq!(echoed, cfg.resolved);
    let again = RunConfig::from_map(Experiment::QfiScan, &echoed).unwrap();
    assert_eq!(again.resolved, cfg.resolved);
    assert_eq!(again.blocks, [1, 2, 3]);
    assert_eq!(again.model.n, 64);
}

#[test]
fn identical_tables_pass_with_zero_deviation() {
    let r = diff_tables(&sample(), &sample(), &Tolerances::uniform(0.0, 0.0)).unwrap();
    assert!(r.pass());
    assert!(r.columns.iter().all(|c| c.max_abs == 0.0 && c.max_rel == 0.0));
}

#[test]
fn perturbed_column_fails_by_name() {
    let a = sample();
    let mut b = sample();
    b.rows[3][2] = Cell::Float(b.rows[3][2].as_f64().unwrap() * (1.0 + 1e-6));
    let strict = diff_tables(&b, &a, &Tolerances::uniform(0.0, 1e-8)).unwrap();
    assert!(!strict.pass());
    assert_eq!(strict.failing(), ["y"]);
    assert!((strict.columns[2].max_rel - 1e-6).abs() < 1e-12);
    assert!(diff_tables(&b, &a, &Tolerances::uniform(0.0, 1e-5)).unwrap().pass());
}

#[test]
fn per_column_tolerance_overrides_default() {
    let a = sample();
    let mut b = sample();
    b.rows[1][1] = Cell::Float(0.2);
    let mut tol = Tolerances::uniform(1e-12, 0.0);
    assert_eq!(diff_tables(&b, &a, &tol).unwrap().failing(), ["x"]);
    tol.per_column.insert("x".into(), sense_cli::table::Tolerance { abs: 0.2, rel: 0.0 });
    assert!(diff_tables(&b, &a, &tol).unwrap().pass());
}

#[test]
fn schema_mismatch() {
    let a = sample();
    let mut b = ResultTable::new(&[("n", Kind::Int), ("x", Kind::Float)]);
    b.push(vec![0u64.into(), 0.0.into()]);
    let tol = Tolerances::uniform(0.0, 0.0);
    assert!(matches!(diff_tables(&a, &b, &tol), Err(CliError::SchemaMismatch(_))));
    let mut short = sample();
    short.rows.pop();
    assert!(matches!(diff_tables(&a, &short, &tol), Err(CliError::SchemaMismatch(_))));
}
