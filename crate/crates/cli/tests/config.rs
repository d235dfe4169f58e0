use sense_cli::config::{Engine, QfiMethod};
use sense_cli::{parse, CliError, Experiment, RunConfig};

fn load(exp: Experiment, text: &str) -> Result<RunConfig, CliError> {
    RunConfig::from_map(exp, &parse(text)?)
}

fn offending(e: CliError) -> Vec<String> {
    match e {
        CliError::Config { keys, .. } => keys,
        other => panic!("expected a config error, got {other:?}"),
    }
}

#[test]
fn parses_flat_dotted_keys_and_comments() {
    let map = parse("# header\nmodel.h0 = 0.5   # trailing\n\nblock.l = 1..4\n").unwrap();
    assert_eq!(map.len(), 2);
    assert_eq!(map["model.h0"], "0.5");
    assert_eq!(map["block.l"], "1..4");
}

#[test]
fn duplicate_keys_are_rejected() {
    let e = parse("model.h0 = 1\nmodel.h0 = 2\n").unwrap_err();
    assert_eq!(offending(e), ["model.h0"]);
}

#[test]
fn malformed_line_is_rejected() {
    assert!(matches!(parse("model.h0 1\n"), Err(CliError::Config { .. })));
    assert!(matches!(parse("Model.H0 = 1\n"), Err(CliError::Config { .. })));
}

#[test]
fn unknown_keys_are_listed() {
    let e = load(Experiment::Evolve, "model.h0 = 1\nmodel.hzero = 1\nfoo = 2\n").unwrap_err();
    let mut keys = offending(e);
    keys.sort();
    assert_eq!(keys, ["foo", "model.hzero"]);
}

#[test]
fn defaults_depend_on_experiment() {
    let ff = load(Experiment::Evolve, "").unwrap();
    assert_eq!(ff.engine, Engine::FreeFermion);
    assert_eq!(ff.model.n, 2000);
    let ed = load(Experiment::EdEvolve, "").unwrap();
    assert_eq!(ed.engine, Engine::Ed);
    assert_eq!(ed.model.n, 13);
    assert_eq!(ed.qfi_method, QfiMethod::Spectral);
    assert_eq!(ff.qfi_method, QfiMethod::Gaussian);
}

#[test]
fn block_lists_and_ranges() {
    assert_eq!(load(Experiment::Scale, "block.l = 1..5\n").unwrap().blocks, [1, 2, 3, 4, 5]);
    assert_eq!(load(Experiment::Scale, "block.l = 2, 4,8\n").unwrap().blocks, [2, 4, 8]);
}

#[test]
fn time_axis_uses_stride() {
    let c = load(Experiment::Evolve, "time.n_min = 10\ntime.n_max = 20\ntime.stride = 4\n").unwrap();
    assert_eq!(c.times, [10, 14, 18]);
}

#[test]
fn grid_axis_has_steps_plus_one_points() {
    let c = load(Experiment::GapScan, "grid.h0.min = 0\ngrid.h0.max = 2\ngrid.h0.steps = 4\n").unwrap();
    assert_eq!(c.h0_axis.points(), [0.0, 0.5, 1.0, 1.5, 2.0]);
}

#[test]
fn invalid_values_name_their_key() {
    for (text, key) in [
        ("model.h0 = abc\n", "model.h0"),
        ("grid.h1.steps = 0\n", "grid.h1.steps"),
        ("grid.h1.min = 1\ngrid.h1.max = 0\n", "grid.h1.min"),
        ("engine = dmrg\n", "engine"),
    ] {
        let keys = offending(load(Experiment::GapScan, text).unwrap_err());
        assert!(keys.iter().any(|k| k == key), "{text:?} -> {keys:?}");
    }
}

#[test]
fn overrides_are_echoed() {
    let mut c = load(Experiment::Evolve, "seed = 3\n").unwrap();
    c.set_seed(11);
    c.set_output("x.csv".into());
    assert_eq!(c.seed, 11);
    assert_eq!(c.resolved["seed"], "11");
    assert_eq!(c.resolved["output"], "x.csv");
}
