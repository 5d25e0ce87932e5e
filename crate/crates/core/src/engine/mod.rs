//! Assembly of `z_t = L δE + M δS`, explicit time integration, and
//! trajectory diagnostics.

mod decay;
mod direct;
mod jacobi;
mod transform;
mod verify;

use std::sync::Arc;

pub use decay::{decay_rate, sign_test_confidence, windowed_decay_rates, DecayFit};
pub use direct::direct_rhs;
pub use jacobi::{
    bracket, jacobi_residual, random_test_functional, JacobiResidual, TestFunctional,
};
pub use transform::{transform_check, SlotScaling, Transformed};
pub use verify::{
    cattaneo_residual, gradient_check, random_covector, random_state, rhs_equivalence,
    verify_brackets, verify_jacobi, verify_model, CheckResult, VerificationReport,
    BRACKET_TOLERANCE, GRADIENT_TOLERANCE, JACOBI_CONSTANT_STEP, JACOBI_CONSTANT_TOLERANCE,
    JACOBI_STATE_DEPENDENT_TOLERANCE, JACOBI_STEP,
};

use crate::catalog::ModelSpec;
use crate::error::{Error, Result};
use crate::state::{CotangentVector, FieldName, State, StateLayout};

/// The building blocks `{Z, L, M, E, S}` of a GENERIC system.
pub trait GenericSystem {
    fn layout(&self) -> &Arc<StateLayout>;
    fn energy(&self, z: &State) -> Result<f64>;
    fn entropy(&self, z: &State) -> Result<f64>;
    /// The decaying part of the energy.
    fn mechanical_energy(&self, z: &State) -> Result<f64>;
    fn grad_energy(&self, z: &State) -> Result<CotangentVector>;
    fn grad_entropy(&self, z: &State) -> Result<CotangentVector>;
    fn apply_poisson(&self, z: &State, xi: &CotangentVector) -> Result<State>;
    fn apply_dissipation(&self, z: &State, xi: &CotangentVector) -> Result<State>;

    fn validate_state(&self, z: &State) -> Result<()> {
        z.check_same_layout(self.layout())
    }

    /// Fields that must stay strictly positive.
    fn positive_fields(&self) -> &[FieldName] {
        &[]
    }

    /// Largest time step the explicit integrator accepts.
    fn stable_dt(&self) -> f64 {
        f64::INFINITY
    }

    /// Smallest temperature, for layouts carrying θ.
    fn theta_min(&self, z: &State) -> Option<f64> {
        z.field(FieldName::Theta)
            .ok()
            .map(|t| t.iter().copied().fold(f64::INFINITY, f64::min))
    }
}

impl GenericSystem for ModelSpec {
    fn layout(&self) -> &Arc<StateLayout> {
        ModelSpec::layout(self)
    }
    fn energy(&self, z: &State) -> Result<f64> {
        ModelSpec::energy(self, z)
    }
    fn entropy(&self, z: &State) -> Result<f64> {
        ModelSpec::entropy(self, z)
    }
    fn mechanical_energy(&self, z: &State) -> Result<f64> {
        ModelSpec::mechanical_energy(self, z)
    }
    fn grad_energy(&self, z: &State) -> Result<CotangentVector> {
        ModelSpec::grad_energy(self, z)
    }
    fn grad_entropy(&self, z: &State) -> Result<CotangentVector> {
        ModelSpec::grad_entropy(self, z)
    }
    fn apply_poisson(&self, z: &State, xi: &CotangentVector) -> Result<State> {
        self.apply_L(z, xi)
    }
    fn apply_dissipation(&self, z: &State, xi: &CotangentVector) -> Result<State> {
        self.apply_M(z, xi)
    }
    fn validate_state(&self, z: &State) -> Result<()> {
        ModelSpec::validate_state(self, z)
    }
    fn positive_fields(&self) -> &[FieldName] {
        if self.id().has_log_entropy() {
            &[FieldName::Theta]
        } else {
            &[]
        }
    }
    fn stable_dt(&self) -> f64 {
        self.dt_bound()
    }
}

/// `L(z) δE(z) + M(z) δS(z)`.
pub fn generic_rhs<S: GenericSystem + ?Sized>(sys: &S, z: &State) -> Result<State> {
    sys.validate_state(z)?;
    let mut rhs = sys.apply_poisson(z, &sys.grad_energy(z)?)?;
    rhs.axpy(1.0, &sys.apply_dissipation(z, &sys.grad_entropy(z)?)?)?;
    Ok(rhs)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub t_end: f64,
    pub record_every: usize,
}

impl IntegratorConfig {
    pub fn new(dt: f64, t_end: f64, record_every: usize) -> Result<Self> {
        let cfg = IntegratorConfig {
            dt,
            t_end,
            record_every,
        };
        cfg.check()?;
        Ok(cfg)
    }

    /// The largest step not above `max_dt` that divides `t_end` evenly.
    pub fn fitted(max_dt: f64, t_end: f64, record_every: usize) -> Result<Self> {
        if !(max_dt > 0.0) || !(t_end > 0.0) {
            return Err(Error::Precondition(format!(
                "need positive dt and t_end, got dt = {max_dt}, t_end = {t_end}"
            )));
        }
        let steps = (t_end / max_dt * (1.0 - 1e-12)).ceil().max(1.0);
        Self::new(t_end / steps, t_end, record_every)
    }

    pub fn check(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Precondition(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if !(self.t_end >= self.dt * (1.0 - 1e-9)) || !self.t_end.is_finite() {
            return Err(Error::Precondition(format!(
                "t_end = {} must be at least dt = {}",
                self.t_end, self.dt
            )));
        }
        if self.record_every == 0 {
            return Err(Error::Precondition(
                "record_every must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// Number of steps; the last one lands on `t_end` up to rounding.
    pub fn steps(&self) -> usize {
        (self.t_end / self.dt * (1.0 - 1e-12)).ceil().max(1.0) as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub energy: f64,
    pub entropy: f64,
    pub mech_energy: f64,
    /// `‖L δS‖∞`
    pub res_lds: f64,
    /// `‖M δE‖∞`
    pub res_mde: f64,
    pub theta_min: Option<f64>,
}

pub fn diagnostics<S: GenericSystem + ?Sized>(
    sys: &S,
    t: f64,
    z: &State,
) -> Result<DiagnosticsRecord> {
    Ok(DiagnosticsRecord {
        t,
        energy: sys.energy(z)?,
        entropy: sys.entropy(z)?,
        mech_energy: sys.mechanical_energy(z)?,
        res_lds: sys.apply_poisson(z, &sys.grad_entropy(z)?)?.norm_inf(),
        res_mde: sys.apply_dissipation(z, &sys.grad_energy(z)?)?.norm_inf(),
        theta_min: sys.theta_min(z),
    })
}

impl DiagnosticsRecord {
    pub fn is_finite(&self) -> bool {
        [
            self.t,
            self.energy,
            self.entropy,
            self.mech_energy,
            self.res_lds,
            self.res_mde,
        ]
        .iter()
        .chain(self.theta_min.as_ref())
        .all(|v| v.is_finite())
    }
}

fn checked_diagnostics<S: GenericSystem + ?Sized>(
    sys: &S,
    step: usize,
    t: f64,
    z: &State,
) -> Result<DiagnosticsRecord> {
    let rec = diagnostics(sys, t, z)?;
    if !rec.is_finite() {
        return Err(Error::Divergence { step, t });
    }
    Ok(rec)
}

/// One classical Runge–Kutta step.
pub fn step_rk4<S: GenericSystem + ?Sized>(sys: &S, z: &State, dt: f64) -> Result<State> {
    if !(dt > 0.0) {
        return Err(Error::Precondition(format!(
            "dt must be positive, got {dt}"
        )));
    }
    let k1 = generic_rhs(sys, z)?;
    let mut y = z.clone();
    y.axpy(0.5 * dt, &k1)?;
    let k2 = generic_rhs(sys, &y)?;
    y.flat_mut().copy_from_slice(z.flat());
    y.axpy(0.5 * dt, &k2)?;
    let k3 = generic_rhs(sys, &y)?;
    y.flat_mut().copy_from_slice(z.flat());
    y.axpy(dt, &k3)?;
    let k4 = generic_rhs(sys, &y)?;

    let mut next = z.clone();
    let h = dt / 6.0;
    for (i, v) in next.flat_mut().iter_mut().enumerate() {
        *v += h * (k1.flat()[i] + 2.0 * k2.flat()[i] + 2.0 * k3.flat()[i] + k4.flat()[i]);
    }
    Ok(next)
}

pub fn integrate<S: GenericSystem + ?Sized>(
    sys: &S,
    z0: &State,
    cfg: &IntegratorConfig,
) -> Result<Vec<DiagnosticsRecord>> {
    integrate_observed(sys, z0, cfg, |_, _| Ok(()))
}

/// Integrates from `t = 0` to `cfg.t_end`, calling `observer` with each
/// recorded state. Records are taken at step 0, every `record_every` steps,
/// and at the final step.
pub fn integrate_observed<S, F>(
    sys: &S,
    z0: &State,
    cfg: &IntegratorConfig,
    mut observer: F,
) -> Result<Vec<DiagnosticsRecord>>
where
    S: GenericSystem + ?Sized,
    F: FnMut(&DiagnosticsRecord, &State) -> Result<()>,
{
    cfg.check()?;
    let bound = sys.stable_dt();
    if cfg.dt > bound {
        return Err(Error::Precondition(format!(
            "dt = {} exceeds the stability bound {bound:.6e} of this model",
            cfg.dt
        )));
    }
    sys.validate_state(z0)?;
    if !z0.is_finite() {
        return Err(Error::Divergence { step: 0, t: 0.0 });
    }

    let steps = cfg.steps();
    let mut records = Vec::with_capacity(steps / cfg.record_every + 2);
    let mut z = z0.clone();
    let first = checked_diagnostics(sys, 0, 0.0, &z)?;
    observer(&first, &z)?;
    records.push(first);

    for step in 1..=steps {
        let t_prev = (step - 1) as f64 * cfg.dt;
        let t = step as f64 * cfg.dt;
        z = step_rk4(sys, &z, cfg.dt).map_err(|e| match e {
            Error::Domain(_) => Error::AtStep {
                step,
                t: t_prev,
                source: Box::new(e),
            },
            other => other,
        })?;
        if !z.is_finite() {
            return Err(Error::Divergence { step, t });
        }
        sys.validate_state(&z).map_err(|e| Error::AtStep {
            step,
            t,
            source: Box::new(e),
        })?;
        if step % cfg.record_every == 0 || step == steps {
            let rec = checked_diagnostics(sys, step, t, &z)?;
            observer(&rec, &z)?;
            records.push(rec);
        }
    }
    Ok(records)
}
