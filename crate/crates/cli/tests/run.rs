use sense_cli::{diff_tables, parse, run, Experiment, ResultTable, RunConfig, Tolerances};

fn config(exp: Experiment, text: &str) -> RunConfig {
    RunConfig::from_map(exp, &parse(text).unwrap()).unwrap()
}

const SMALL_CHAIN: &str = "
model.n = 8
model.h0 = 0.8
model.h1 = 0.15
model.alpha = inf
model.boundary = periodic
block.l = 1,2,3
time.n_min = 0
time.n_max = 60
time.stride = 6
qfi.method = spectral
fisher.classical = true
";

#[test]
fn free_fermion_and_ed_agree_at_n8() {
    let ff = run(&config(Experiment::Evolve, SMALL_CHAIN)).unwrap();
    let ed = run(&config(Experiment::EdEvolve, &format!("{SMALL_CHAIN}engine = ed\n"))).unwrap();
    let ff = ResultTable::from_csv(&ff.to_csv()).unwrap();
    let ed = ResultTable::from_csv(&ed.to_csv()).unwrap();
    let r = diff_tables(&ed, &ff, &Tolerances::uniform(0.0, 1e-8)).unwrap();
    assert!(r.pass(), "{:?}", r.columns);
}

#[test]
fn metadata_echoes_config() {
    let cfg = config(Experiment::GapScan, "model.n = 100\ngrid.h0.steps = 2\ngrid.h1.steps = 2\n");
    let t = run(&cfg).unwrap();
    assert_eq!(t.meta_value("experiment"), Some("gap-scan"));
    assert!(t.meta_value("artifact").unwrap().starts_with("floquet-sense "));
    assert_eq!(t.meta_section("config"), cfg.resolved);
    assert_eq!(t.rows.len(), 9);
    let names: Vec<&str> = t.columns.iter().map(|c| c.name.as_str()).collect();
    assert_eq!(names, ["h0", "h1", "gap", "argmin_k"]);
}

#[test]
fn grid_rows_follow_grid_order() {
    let cfg = config(Experiment::GapScan, "model.n = 100\ngrid.h0.steps = 3\ngrid.h1.steps = 4\n");
    let t = run(&cfg).unwrap();
    let h0 = t.column("h0").unwrap();
    let h1 = t.column("h1").unwrap();
    let expected: Vec<(f64, f64)> =
        cfg.h0_axis.points().into_iter().flat_map(|a| cfg.h1_axis.points().into_iter().map(move |b| (a, b))).collect();
    assert_eq!(h0.into_iter().zip(h1).collect::<Vec<_>>(), expected);
}

#[test]
fn estimate_is_deterministic_per_seed() {
    let text = "
engine = freefermion
model.n = 40
model.h0 = 0.5
model.h1 = 0.16
block.l = 2
bayes.m = 50,200
bayes.reps = 6
bayes.n_obs = 20
bayes.grid.steps = 40
seed = 21
";
    let cfg = config(Experiment::Estimate, text);
    let a = ResultTable::body(&run(&cfg).unwrap().to_csv());
    let b = ResultTable::body(&run(&cfg).unwrap().to_csv());
    assert_eq!(a, b);
    let mut other = cfg.clone();
    other.set_seed(22);
    assert_ne!(ResultTable::body(&run(&other).unwrap().to_csv()), a);
}

#[test]
fn scale_reports_fit() {
    let cfg = config(Experiment::Scale, "model.n = 200\nblock.l = 1..6\nsteady.method = dephased\n");
    let t = run(&cfg).unwrap();
    assert_eq!(t.rows.len(), 6);
    let eta: f64 = t.meta_value("result.eta").unwrap().parse().unwrap();
    assert!(eta.is_finite());
}
