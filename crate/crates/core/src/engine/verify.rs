//! Randomized checks of the GENERIC axioms and of the model equations.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::jacobi::{jacobi_residual, random_test_functional};
use super::{direct_rhs, generic_rhs, GenericSystem};
use crate::catalog::{ModelId, ModelSpec};
use crate::error::{Error, Result};
use crate::functionals::fd_gradient;
use crate::state::FieldName::*;
use crate::state::{CotangentVector, State};

pub const BRACKET_TOLERANCE: f64 = 1e-12;
pub const GRADIENT_TOLERANCE: f64 = 1e-6;
pub const JACOBI_CONSTANT_TOLERANCE: f64 = 1e-10;
pub const JACOBI_STATE_DEPENDENT_TOLERANCE: f64 = 1e-4;
/// Outer finite-difference step of the Jacobi check for a state-dependent `L`.
pub const JACOBI_STEP: f64 = 1e-5;
/// Outer step for a constant `L`, where the brackets are quadratic.
pub const JACOBI_CONSTANT_STEP: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    /// Largest residual relative to its scale.
    pub residual: f64,
    pub tolerance: f64,
}

impl CheckResult {
    pub fn new(name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        CheckResult {
            name: name.into(),
            residual,
            tolerance,
        }
    }

    pub fn passed(&self) -> bool {
        self.residual <= self.tolerance
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub model: String,
    pub checks: Vec<CheckResult>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckResult::passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "{} {} {:.3e} {:.1e} {}",
                self.model,
                c.name,
                c.residual,
                c.tolerance,
                if c.passed() { "PASS" } else { "FAIL" }
            )?;
        }
        Ok(())
    }
}

/// Standard normal entries; fields listed as positive are drawn as `exp(N/4)`.
pub fn random_state<S: GenericSystem + ?Sized, R: Rng + ?Sized>(
    sys: &S,
    rng: &mut R,
) -> Result<State> {
    let layout = sys.layout();
    let mut z = State::from_flat(
        layout,
        (0..layout.dim())
            .map(|_| rng.sample(StandardNormal))
            .collect(),
    )?;
    for name in sys.positive_fields() {
        z.field_mut(*name)?
            .iter_mut()
            .for_each(|v| *v = (0.25 * *v).exp());
    }
    Ok(z)
}

pub fn random_covector<S: GenericSystem + ?Sized, R: Rng + ?Sized>(
    sys: &S,
    rng: &mut R,
) -> Result<CotangentVector> {
    let layout = sys.layout();
    CotangentVector::from_flat(
        layout,
        (0..layout.dim())
            .map(|_| rng.sample(StandardNormal))
            .collect(),
    )
}

fn inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Antisymmetry of `L`, symmetry and semidefiniteness of `M`, and both
/// degeneracy conditions on `trials` random states and covector pairs.
pub fn verify_brackets<S: GenericSystem + ?Sized>(
    sys: &S,
    name: &str,
    trials: usize,
    seed: u64,
) -> Result<VerificationReport> {
    if trials == 0 {
        return Err(Error::Precondition("trials must be at least 1".into()));
    }
    let layout = sys.layout();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = [0.0f64; 5];
    for _ in 0..trials {
        let z = random_state(sys, &mut rng)?;
        let xi = random_covector(sys, &mut rng)?;
        let eta = random_covector(sys, &mut rng)?;
        let (x, y) = (xi.flat(), eta.flat());

        let lx = sys.apply_poisson(&z, &xi)?;
        let ly = sys.apply_poisson(&z, &eta)?;
        let scale = (layout.abs_pairing(x, ly.flat()) + layout.abs_pairing(y, lx.flat())).max(1.0);
        let anti = (layout.pairing(x, ly.flat()) + layout.pairing(y, lx.flat())).abs() / scale;

        let mx = sys.apply_dissipation(&z, &xi)?;
        let my = sys.apply_dissipation(&z, &eta)?;
        let scale = (layout.abs_pairing(x, my.flat()) + layout.abs_pairing(y, mx.flat())).max(1.0);
        let sym = (layout.pairing(x, my.flat()) - layout.pairing(y, mx.flat())).abs() / scale;

        let scale = layout.abs_pairing(x, mx.flat()).max(1.0);
        let psd = (-layout.pairing(x, mx.flat())).max(0.0) / scale;

        let ds = sys.grad_entropy(&z)?;
        let lds = sys.apply_poisson(&z, &ds)?;
        let de = sys.grad_energy(&z)?;
        let mde = sys.apply_dissipation(&z, &de)?;
        let res_lds = lds.norm_inf() / inf(z.flat()).max(ds.norm_inf()).max(1.0);
        let res_mde = mde.norm_inf() / inf(z.flat()).max(de.norm_inf()).max(1.0);

        for (w, v) in worst.iter_mut().zip([anti, sym, psd, res_lds, res_mde]) {
            *w = w.max(v);
        }
    }
    let names = [
        "antisymmetry_L",
        "symmetry_M",
        "psd_M",
        "degeneracy_LdS",
        "degeneracy_MdE",
    ];
    Ok(VerificationReport {
        model: name.to_string(),
        checks: names
            .iter()
            .zip(worst)
            .map(|(n, r)| CheckResult::new(*n, r, BRACKET_TOLERANCE))
            .collect(),
    })
}

/// `‖generic_rhs - direct_rhs‖∞` relative to the magnitudes involved.
pub fn rhs_equivalence(model: &ModelSpec, trials: usize, seed: u64) -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let z = random_state(model, &mut rng)?;
        let a = generic_rhs(model, &z)?;
        let b = direct_rhs(model, &z)?;
        let diff = a
            .flat()
            .iter()
            .zip(b.flat())
            .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        let scale = inf(z.flat()).max(a.norm_inf()).max(b.norm_inf()).max(1.0);
        worst = worst.max(diff / scale);
    }
    Ok(CheckResult::new(
        "rhs_equivalence",
        worst,
        BRACKET_TOLERANCE,
    ))
}

/// Analytic `δE`, `δS` against central differences of `E`, `S`.
pub fn gradient_check(model: &ModelSpec, trials: usize, seed: u64) -> Result<Vec<CheckResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = [0.0f64; 2];
    for _ in 0..trials {
        let z = random_state(model, &mut rng)?;
        let pairs = [
            (
                model.grad_energy(&z)?,
                fd_gradient(|y| model.energy(y), &z)?,
            ),
            (
                model.grad_entropy(&z)?,
                fd_gradient(|y| model.entropy(y), &z)?,
            ),
        ];
        for (w, (exact, fd)) in worst.iter_mut().zip(pairs) {
            let diff = exact
                .flat()
                .iter()
                .zip(fd.flat())
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            *w = w.max(diff / exact.norm_inf().max(1.0));
        }
    }
    Ok(vec![
        CheckResult::new("gradient_energy", worst[0], GRADIENT_TOLERANCE),
        CheckResult::new("gradient_entropy", worst[1], GRADIENT_TOLERANCE),
    ])
}

/// Jacobi residual over `trials` random functional triples, with the step
/// and tolerance appropriate to whether `L` depends on the state.
pub fn verify_jacobi(model: &ModelSpec, trials: usize, seed: u64) -> Result<CheckResult> {
    let (step, tolerance) = if model.id().has_state_dependent_poisson() {
        (JACOBI_STEP, JACOBI_STATE_DEPENDENT_TOLERANCE)
    } else {
        (JACOBI_CONSTANT_STEP, JACOBI_CONSTANT_TOLERANCE)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let z = random_state(model, &mut rng)?;
        let f1 = random_test_functional(model.layout(), &mut rng)?;
        let f2 = random_test_functional(model.layout(), &mut rng)?;
        let f3 = random_test_functional(model.layout(), &mut rng)?;
        let r = jacobi_residual(model, &z, [&f1, &f2, &f3], step)?;
        worst = worst.max(r.relative());
    }
    Ok(CheckResult::new("jacobi", worst, tolerance))
}

/// The complete suite for one catalog model.
pub fn verify_model(model: &ModelSpec, trials: usize, seed: u64) -> Result<VerificationReport> {
    let mut report = verify_brackets(model, model.id().name(), trials, seed)?;
    report
        .checks
        .push(rhs_equivalence(model, trials, seed.wrapping_add(1))?);
    report
        .checks
        .extend(gradient_check(model, trials.min(5), seed.wrapping_add(2))?);
    report
        .checks
        .push(verify_jacobi(model, trials.min(10), seed.wrapping_add(3))?);
    Ok(report)
}

/// Compares `θ̈`, obtained by differentiating the first-order Cattaneo system
/// along its own flow, with the eliminated second-order form
/// `θ_xx - βθ_t - βγ q_x - γ q_tx`. Returns the relative mismatch.
pub fn cattaneo_residual(model: &ModelSpec, z: &State) -> Result<f64> {
    if model.id() != ModelId::TimoshenkoHeatII {
        return Err(Error::Precondition(format!(
            "the Cattaneo identity applies to {}, not {}",
            ModelId::TimoshenkoHeatII,
            model.id()
        )));
    }
    let g = model.grid();
    let c = model.params();
    let zt = generic_rhs(model, z)?;

    let h = 1e-3 * inf(z.flat()).max(1.0) / zt.norm_inf().max(1e-300);
    let mut plus = z.clone();
    plus.axpy(h, &zt)?;
    let mut minus = z.clone();
    minus.axpy(-h, &zt)?;
    let (rp, rm) = (generic_rhs(model, &plus)?, generic_rhs(model, &minus)?);
    let theta_tt: Vec<f64> = rp
        .field(Theta)?
        .iter()
        .zip(rm.field(Theta)?)
        .map(|(a, b)| (a - b) / (2.0 * h))
        .collect();

    let theta_xx = g.d1(&g.d1(z.field(Theta)?)?)?;
    let q_x = g.d1(z.field(Q)?)?;
    let q_tx = g.d1(zt.field(Q)?)?;
    let theta_t = zt.field(Theta)?;
    let composed: Vec<f64> = (0..g.n())
        .map(|i| theta_xx[i] - c.beta * theta_t[i] - c.beta * c.gamma * q_x[i] - c.gamma * q_tx[i])
        .collect();

    let diff = theta_tt
        .iter()
        .zip(&composed)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let scale = inf(&theta_tt).max(inf(&composed));
    if scale == 0.0 {
        return Ok(0.0);
    }
    Ok(diff / scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::operators::BlockOperator;
    use crate::state::{Slot, StateLayout};
    use std::sync::Arc;

    fn model(id: ModelId) -> ModelSpec {
        ModelSpec::with_defaults(id, Grid::new(16, 1.0).unwrap()).unwrap()
    }

    /// A model whose Poisson operator has one block rescaled.
    struct Corrupted {
        model: ModelSpec,
        row: Slot,
        col: Slot,
        factor: f64,
    }

    impl Corrupted {
        fn poisson(&self, z: &State) -> Result<BlockOperator> {
            let mut op = self.model.poisson(z)?;
            op.scale_block(self.row, self.col, self.factor)?;
            Ok(op)
        }
    }

    impl GenericSystem for Corrupted {
        fn layout(&self) -> &Arc<StateLayout> {
            self.model.layout()
        }
        fn energy(&self, z: &State) -> Result<f64> {
            self.model.energy(z)
        }
        fn entropy(&self, z: &State) -> Result<f64> {
            self.model.entropy(z)
        }
        fn mechanical_energy(&self, z: &State) -> Result<f64> {
            self.model.mechanical_energy(z)
        }
        fn grad_energy(&self, z: &State) -> Result<CotangentVector> {
            self.model.grad_energy(z)
        }
        fn grad_entropy(&self, z: &State) -> Result<CotangentVector> {
            self.model.grad_entropy(z)
        }
        fn apply_poisson(&self, z: &State, xi: &CotangentVector) -> Result<State> {
            self.poisson(z)?.apply(xi)
        }
        fn apply_dissipation(&self, z: &State, xi: &CotangentVector) -> Result<State> {
            self.model.apply_M(z, xi)
        }
    }

    #[test]
    fn catalog_passes_bracket_checks() {
        for id in ModelId::ALL {
            let m = model(id);
            let r = verify_brackets(&m, id.name(), 5, 11).unwrap();
            assert!(r.passed(), "{r}");
        }
    }

    #[test]
    fn sign_flip_in_poisson_block_is_caught() {
        let c = Corrupted {
            model: model(ModelId::TimoshenkoHeatI),
            row: Slot::Field(Q),
            col: Slot::Field(Theta),
            factor: -1.0,
        };
        let r = verify_brackets(&c, "corrupted", 5, 1).unwrap();
        assert!(r.check("antisymmetry_L").unwrap().residual > 1e-6, "{r}");
        assert!(!r.passed());
    }

    #[test]
    fn report_is_deterministic() {
        let m = model(ModelId::BresseHeatII);
        assert_eq!(
            verify_model(&m, 3, 7).unwrap(),
            verify_model(&m, 3, 7).unwrap()
        );
        assert!(verify_brackets(&m, "x", 0, 7).is_err());
    }

    #[test]
    fn report_lines() {
        let r = VerificationReport {
            model: "m".into(),
            checks: vec![
                CheckResult::new("c", 2e-13, 1e-12),
                CheckResult::new("d", 1.0, 1e-12),
            ],
        };
        let text = r.to_string();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(
            lines,
            ["m c 2.000e-13 1.0e-12 PASS", "m d 1.000e0 1.0e-12 FAIL"]
        );
    }

    #[test]
    fn cattaneo_only_for_type_two() {
        let m = model(ModelId::TimoshenkoHeatI);
        let z = m.default_initial_state(1, 0.1).unwrap();
        assert!(matches!(
            cattaneo_residual(&m, &z),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn random_log_entropy_states_are_positive() {
        let m = model(ModelId::TimoshenkoNew);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..10 {
            let z = random_state(&m, &mut rng).unwrap();
            assert!(z.field(Theta).unwrap().iter().all(|t| *t > 0.0));
        }
    }
}
