//! Values computed independently of the library (closed forms and a separate
//! transcription of the discrete functionals) and frozen here.

use beamgeneric::catalog::{ModelId, ModelSpec};
use beamgeneric::engine::{direct_rhs, generic_rhs};
use beamgeneric::functionals::ModelParams;
use beamgeneric::grid::Grid;
use beamgeneric::state::{FieldName, State};

fn unit(id: ModelId, n: usize, length: f64) -> ModelSpec {
    ModelSpec::with_defaults(id, Grid::new(n, length).unwrap()).unwrap()
}

#[test]
fn hand_stencils() {
    let g = Grid::new(4, 1.0).unwrap();
    let u = [0.0, 1.0, 0.0, -1.0];
    assert_eq!(g.d1(&u).unwrap().values(), &[4.0, 0.0, -4.0, 0.0]);
    assert_eq!(g.d2(&u).unwrap().values(), &[0.0, -32.0, 0.0, 32.0]);
    let g = Grid::new(8, 2.0).unwrap();
    let v = [1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0];
    assert_eq!(g.inner(&v, &v).unwrap(), 1.0);
}

#[test]
fn single_mode_timoshenko_energy() {
    // ½[k A²(sin(κdx)/dx + 1)²/2 + b A²(2 - 2cos κdx)/dx²/2], κ = 2π, A = 0.1, n = 64
    let m = unit(ModelId::TimoshenkoUndamped, 64, 1.0);
    let z = m.default_initial_state(1, 0.1).unwrap();
    let e = m.energy(&z).unwrap();
    assert!((e - 0.230_861_646_994_326_43).abs() < 1e-14, "{e}");
}

#[test]
fn single_mode_bresse_energy() {
    let m = unit(ModelId::BresseUndamped, 64, 1.0);
    let z = m.default_initial_state(1, 0.1).unwrap();
    let e = m.energy(&z).unwrap();
    assert!((e - 0.382_134_039_379_429_36).abs() < 1e-14, "{e}");
}

#[test]
fn frictional_rhs_written_out() {
    // (p, q, -δ1 p + k(φ_x+ψ)_x, -δ2 q - k(φ_x+ψ) + bψ_xx, ∫(δ1p² + δ2q²))
    // with φ = ψ = 0, p ≡ 1, q ≡ 2, δ1 = 3, δ2 = 5, length 2.
    let params = ModelParams {
        delta1: 3.0,
        delta2: 5.0,
        ..ModelParams::default()
    };
    let m = ModelSpec::new(
        ModelId::TimoshenkoFrictional,
        params,
        Grid::new(8, 2.0).unwrap(),
    )
    .unwrap();
    let mut z = State::zeros(m.layout());
    z.set_field(FieldName::P, &[1.0; 8]).unwrap();
    z.set_field(FieldName::Q, &[2.0; 8]).unwrap();
    for r in [generic_rhs(&m, &z).unwrap(), direct_rhs(&m, &z).unwrap()] {
        assert_eq!(r.field(FieldName::Phi).unwrap(), &[1.0; 8]);
        assert_eq!(r.field(FieldName::Psi).unwrap(), &[2.0; 8]);
        assert_eq!(r.field(FieldName::P).unwrap(), &[-3.0; 8]);
        assert_eq!(r.field(FieldName::Q).unwrap(), &[-10.0; 8]);
        assert!((r.get_reservoir().unwrap() - (3.0 * 2.0 + 5.0 * 4.0 * 2.0)).abs() < 1e-12);
    }
}

#[test]
fn heat_mode_decays_at_discrete_rate() {
    // θ = sin(2πx): d2θ = -(4/dx²) sin²(π dx) θ, and ∫(D+θ)² = (2 - 2cos(2π dx))/dx² · ½
    let n = 32;
    let m = unit(ModelId::TimoshenkoHeatI, n, 1.0);
    let g = m.grid().clone();
    let mut z = State::zeros(m.layout());
    let theta = g.sample(|x| (2.0 * std::f64::consts::PI * x).sin());
    z.set_field(FieldName::Theta, &theta).unwrap();
    let r = generic_rhs(&m, &z).unwrap();
    let dx = g.dx();
    let lambda = 4.0 / (dx * dx) * (std::f64::consts::PI * dx).sin().powi(2);
    for (t, rt) in theta.iter().zip(r.field(FieldName::Theta).unwrap()) {
        assert!((rt + lambda * t).abs() < 1e-11);
    }
    let production = (2.0 - 2.0 * (2.0 * std::f64::consts::PI * dx).cos()) / (dx * dx) * 0.5;
    assert!((r.get_reservoir().unwrap() - production).abs() < 1e-11);
}

#[test]
fn log_entropy_model_without_reservoir() {
    let m = unit(ModelId::TimoshenkoNew, 16, 1.0);
    assert!(!m.layout().has_reservoir());
    let z = m.default_initial_state(1, 0.0).unwrap();
    assert_eq!(m.entropy(&z).unwrap(), 0.0);
    assert_eq!(m.energy(&z).unwrap(), 1.0);
    let m = unit(ModelId::BresseHeatII, 16, 1.0);
    assert!(m.layout().has_field(FieldName::Theta) && m.layout().has_field(FieldName::Eta));
}
