//! Diagonal coordinate changes `z̄ = T z` and the transformed building blocks
//! `Ē(z̄) = E(T⁻¹z̄)`, `L̄ = T L Tᵀ`, `M̄ = T M Tᵀ`.

use std::sync::Arc;

use super::{integrate_observed, GenericSystem, IntegratorConfig};
use crate::error::{Error, Result};
use crate::state::{CotangentVector, FieldName, Slot, State, StateLayout};

/// One positive factor per slot (field or reservoir).
#[derive(Debug, Clone, PartialEq)]
pub struct SlotScaling {
    layout: Arc<StateLayout>,
    factors: Vec<f64>,
}

impl SlotScaling {
    pub fn new(layout: &Arc<StateLayout>, factors: Vec<f64>) -> Result<Self> {
        let slots = layout.slots();
        if factors.len() != slots.len() {
            return Err(Error::Structural(format!(
                "scaling needs {} factors, got {}",
                slots.len(),
                factors.len()
            )));
        }
        for (slot, f) in slots.iter().zip(&factors) {
            if *f == 0.0 || !f.is_finite() {
                return Err(Error::Structural(format!(
                    "singular scaling: factor {f} on slot {slot}"
                )));
            }
        }
        Ok(SlotScaling {
            layout: Arc::clone(layout),
            factors,
        })
    }

    pub fn uniform(layout: &Arc<StateLayout>, factor: f64) -> Result<Self> {
        Self::new(layout, vec![factor; layout.slots().len()])
    }

    pub fn identity(layout: &Arc<StateLayout>) -> Self {
        SlotScaling {
            layout: Arc::clone(layout),
            factors: vec![1.0; layout.slots().len()],
        }
    }

    pub fn factor(&self, slot: Slot) -> Option<f64> {
        self.layout
            .slots()
            .iter()
            .position(|s| *s == slot)
            .map(|i| self.factors[i])
    }

    fn scaled(&self, x: &[f64], inverse: bool) -> Result<Vec<f64>> {
        let mut out = x.to_vec();
        for (slot, f) in self.layout.slots().into_iter().zip(&self.factors) {
            let f = if inverse { 1.0 / f } else { *f };
            for v in &mut out[self.layout.slot_range(slot)?] {
                *v *= f;
            }
        }
        Ok(out)
    }

    /// `T z`
    pub fn forward(&self, z: &State) -> Result<State> {
        z.check_same_layout(&self.layout)?;
        State::from_flat(&self.layout, self.scaled(z.flat(), false)?)
    }

    /// `T⁻¹ z`
    pub fn inverse(&self, z: &State) -> Result<State> {
        z.check_same_layout(&self.layout)?;
        State::from_flat(&self.layout, self.scaled(z.flat(), true)?)
    }

    fn forward_covector(&self, xi: &CotangentVector) -> Result<CotangentVector> {
        CotangentVector::from_flat(&self.layout, self.scaled(xi.flat(), false)?)
    }

    fn inverse_covector(&self, xi: &CotangentVector) -> Result<CotangentVector> {
        CotangentVector::from_flat(&self.layout, self.scaled(xi.flat(), true)?)
    }
}

/// A system expressed in the coordinates `z̄ = T z`.
pub struct Transformed<'a, S: ?Sized> {
    inner: &'a S,
    scaling: SlotScaling,
}

impl<'a, S: GenericSystem + ?Sized> Transformed<'a, S> {
    pub fn new(inner: &'a S, scaling: SlotScaling) -> Result<Self> {
        if !Arc::ptr_eq(inner.layout(), &scaling.layout) && **inner.layout() != *scaling.layout {
            return Err(Error::Structural(
                "scaling layout differs from the system's".into(),
            ));
        }
        Ok(Transformed { inner, scaling })
    }

    pub fn scaling(&self) -> &SlotScaling {
        &self.scaling
    }
}

impl<S: GenericSystem + ?Sized> GenericSystem for Transformed<'_, S> {
    fn layout(&self) -> &Arc<StateLayout> {
        self.inner.layout()
    }
    fn energy(&self, zb: &State) -> Result<f64> {
        self.inner.energy(&self.scaling.inverse(zb)?)
    }
    fn entropy(&self, zb: &State) -> Result<f64> {
        self.inner.entropy(&self.scaling.inverse(zb)?)
    }
    fn mechanical_energy(&self, zb: &State) -> Result<f64> {
        self.inner.mechanical_energy(&self.scaling.inverse(zb)?)
    }
    fn grad_energy(&self, zb: &State) -> Result<CotangentVector> {
        let g = self.inner.grad_energy(&self.scaling.inverse(zb)?)?;
        self.scaling.inverse_covector(&g)
    }
    fn grad_entropy(&self, zb: &State) -> Result<CotangentVector> {
        let g = self.inner.grad_entropy(&self.scaling.inverse(zb)?)?;
        self.scaling.inverse_covector(&g)
    }
    fn apply_poisson(&self, zb: &State, xi: &CotangentVector) -> Result<State> {
        let z = self.scaling.inverse(zb)?;
        let out = self
            .inner
            .apply_poisson(&z, &self.scaling.forward_covector(xi)?)?;
        self.scaling.forward(&out)
    }
    fn apply_dissipation(&self, zb: &State, xi: &CotangentVector) -> Result<State> {
        let z = self.scaling.inverse(zb)?;
        let out = self
            .inner
            .apply_dissipation(&z, &self.scaling.forward_covector(xi)?)?;
        self.scaling.forward(&out)
    }
    fn validate_state(&self, zb: &State) -> Result<()> {
        self.inner.validate_state(&self.scaling.inverse(zb)?)
    }
    fn positive_fields(&self) -> &[FieldName] {
        self.inner.positive_fields()
    }
    fn stable_dt(&self) -> f64 {
        self.inner.stable_dt()
    }
    fn theta_min(&self, zb: &State) -> Option<f64> {
        self.scaling
            .inverse(zb)
            .ok()
            .and_then(|z| self.inner.theta_min(&z))
    }
}

/// Integrates the system from `z0` and the transformed system from `T z0`,
/// returning `max_t ‖T z(t) - z̄(t)‖∞` over the recorded samples.
pub fn transform_check<S: GenericSystem + ?Sized>(
    sys: &S,
    scaling: &SlotScaling,
    z0: &State,
    cfg: &IntegratorConfig,
) -> Result<f64> {
    let transformed = Transformed::new(sys, scaling.clone())?;
    let mut original = Vec::new();
    integrate_observed(sys, z0, cfg, |_, z| {
        original.push(scaling.forward(z)?);
        Ok(())
    })?;
    let mut mismatch = 0.0f64;
    let mut sample = 0;
    integrate_observed(&transformed, &scaling.forward(z0)?, cfg, |_, zb| {
        let expected = &original[sample];
        sample += 1;
        for (a, b) in expected.flat().iter().zip(zb.flat()) {
            mismatch = mismatch.max((a - b).abs());
        }
        Ok(())
    })?;
    Ok(mismatch)
}
