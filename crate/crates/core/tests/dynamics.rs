use beamgeneric::catalog::{ModelId, ModelSpec};
use beamgeneric::engine::{
    decay_rate, integrate, transform_check, DecayFit, IntegratorConfig, SlotScaling,
};
use beamgeneric::error::Error;
use beamgeneric::grid::Grid;

fn model(id: ModelId) -> ModelSpec {
    ModelSpec::with_defaults(id, Grid::new(64, 1.0).unwrap()).unwrap()
}

fn run(
    id: ModelId,
    t_end: f64,
    record_every: usize,
) -> Vec<beamgeneric::engine::DiagnosticsRecord> {
    let m = model(id);
    let cfg = IntegratorConfig::fitted(1e-3f64.min(m.dt_bound()), t_end, record_every).unwrap();
    integrate(&m, &m.default_initial_state(1, 0.1).unwrap(), &cfg).unwrap()
}

#[test]
fn undamped_rate_is_zero() {
    let rate = decay_rate(&run(ModelId::TimoshenkoUndamped, 10.0, 50)).unwrap();
    assert!(rate.abs() <= 1e-6, "{rate}");
}

#[test]
fn frictional_rate_is_negative_in_every_window() {
    let records = run(ModelId::TimoshenkoFrictional, 10.0, 50);
    let fit = DecayFit::from_records(&records, 8).unwrap();
    assert!(fit.rate < -1e-3, "{}", fit.rate);
    assert!(fit.window_rates.iter().all(|r| *r < 0.0));
    assert!(fit.confidence > 0.99);
}

#[test]
fn frictional_entropy_is_monotone_and_reservoir_absorbs_energy() {
    let records = run(ModelId::TimoshenkoFrictional, 2.0, 1);
    assert!(records
        .windows(2)
        .all(|w| w[1].entropy >= w[0].entropy - 1e-12));
    let (first, last) = (records[0], *records.last().unwrap());
    assert!(last.mech_energy < first.mech_energy);
    assert!((last.energy - first.energy).abs() <= 1e-10 * first.energy);
    assert!(records.iter().all(|r| r.res_lds == 0.0 && r.res_mde == 0.0));
}

#[test]
fn log_entropy_model_keeps_temperature_positive() {
    let records = run(ModelId::TimoshenkoNew, 1.0, 100);
    assert!(records.iter().all(|r| r.theta_min.unwrap() > 0.0));
    assert!(records
        .windows(2)
        .all(|w| w[1].entropy >= w[0].entropy - 1e-12));
}

#[test]
fn decay_needs_ten_records() {
    let records = run(ModelId::TimoshenkoFrictional, 0.01, 2);
    assert!(records.len() < 10);
    assert!(matches!(decay_rate(&records), Err(Error::Precondition(_))));
}

#[test]
fn uniform_scaling_reproduces_trajectory() {
    let m = model(ModelId::BresseHeatII);
    let cfg = IntegratorConfig::fitted(m.dt_bound(), 0.05, 10).unwrap();
    let z0 = m.default_initial_state(2, 0.2).unwrap();
    let scaling = SlotScaling::new(
        m.layout(),
        vec![2.0, 0.5, 4.0, 1.0, 3.0, 0.25, 8.0, 1.5, 0.75],
    )
    .unwrap();
    let mismatch = transform_check(&m, &scaling, &z0, &cfg).unwrap();
    assert!(mismatch <= 1e-10, "{mismatch}");
}
