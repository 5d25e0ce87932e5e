//! Energy and entropy functionals with their closed-form functional
//! derivatives, plus a finite-difference gradient oracle.
//!
//! Gradients are taken with respect to the mixed pairing of
//! [`StateLayout::pairing`](crate::state::StateLayout::pairing): `dx`-weighted
//! on field slots and plain on the reservoir. Combined strains use the
//! centered difference `d1`; an isolated squared gradient `c/2 u_x²` uses the
//! forward difference so its derivative is `-c d2 u`.

use crate::catalog::{Family, ModelId, ModelSpec};
use crate::error::{Error, Result};
use crate::state::{CotangentVector, FieldName, State};

use FieldName::*;

/// Material, damping and coupling constants. Unused constants are ignored
/// by models that do not reference them.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub k: f64,
    pub b: f64,
    pub k0: f64,
    /// Arch curvature.
    pub l: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma3: f64,
    pub gamma: f64,
    pub delta: f64,
    pub beta: f64,
    pub kappa: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    /// Thermal damping `K` of the type III model.
    pub big_k: f64,
    /// Entropy scale; must be nonzero.
    pub alpha: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            k: 1.0,
            b: 1.0,
            k0: 1.0,
            l: 1.0,
            delta1: 1.0,
            delta2: 1.0,
            gamma1: 1.0,
            gamma2: 1.0,
            gamma3: 1.0,
            gamma: 1.0,
            delta: 1.0,
            beta: 1.0,
            kappa: 1.0,
            kappa1: 1.0,
            kappa2: 1.0,
            big_k: 1.0,
            alpha: 1.0,
        }
    }
}

impl ModelParams {
    /// Configuration keys, in declaration order.
    pub const NAMES: [&'static str; 17] = [
        "k", "b", "k0", "l", "delta1", "delta2", "gamma1", "gamma2", "gamma3", "gamma", "delta",
        "beta", "kappa", "kappa1", "kappa2", "K", "alpha",
    ];

    fn slot(&mut self, name: &str) -> Option<&mut f64> {
        Some(match name {
            "k" => &mut self.k,
            "b" => &mut self.b,
            "k0" => &mut self.k0,
            "l" => &mut self.l,
            "delta1" => &mut self.delta1,
            "delta2" => &mut self.delta2,
            "gamma1" => &mut self.gamma1,
            "gamma2" => &mut self.gamma2,
            "gamma3" => &mut self.gamma3,
            "gamma" => &mut self.gamma,
            "delta" => &mut self.delta,
            "beta" => &mut self.beta,
            "kappa" => &mut self.kappa,
            "kappa1" => &mut self.kappa1,
            "kappa2" => &mut self.kappa2,
            "K" => &mut self.big_k,
            "alpha" => &mut self.alpha,
            _ => return None,
        })
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.clone().slot(name).map(|v| *v)
    }

    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        match self.slot(name) {
            Some(v) => {
                *v = value;
                Ok(())
            }
            None => Err(Error::Lookup(format!("parameter `{name}`"))),
        }
    }

    pub fn validate_for(&self, id: ModelId) -> Result<()> {
        let mut violations = Vec::new();
        for name in Self::NAMES {
            let v = self.get(name).unwrap_or(f64::NAN);
            if !v.is_finite() {
                violations.push(format!("{name} must be finite, got {v}"));
            } else if name != "alpha" && v < 0.0 {
                violations.push(format!("{name} must be nonnegative, got {v}"));
            }
        }
        if self.alpha == 0.0 {
            violations.push("alpha must be nonzero".to_string());
        }
        let positive: &[&str] = match id.family() {
            Family::Timoshenko => &["k", "b"],
            Family::Bresse => &["k", "b", "k0", "l"],
        };
        for name in positive {
            let v = self.get(name).unwrap_or(f64::NAN);
            if v.is_finite() && v == 0.0 {
                violations.push(format!("{name} must be positive for {id}"));
            }
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(violations))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FunctionalKind {
    Energy,
    Entropy,
}

/// Shear strain `φ_x + ψ (+ lχ)` and, for the arch, axial strain `χ_x - lφ`.
pub(crate) struct Strains {
    pub shear: Vec<f64>,
    pub axial: Option<Vec<f64>>,
}

impl ModelSpec {
    /// Fields carrying a plain `½ f²` density.
    fn quadratic_fields(&self) -> &'static [FieldName] {
        match self.id() {
            ModelId::TimoshenkoUndamped
            | ModelId::TimoshenkoFrictional
            | ModelId::TimoshenkoNew => &[P, Q],
            ModelId::TimoshenkoHeatI => &[P, Q, Theta],
            ModelId::TimoshenkoHeatII => &[P, Q, Theta, S],
            ModelId::TimoshenkoHeatIII => &[P, Q, W],
            ModelId::BresseUndamped | ModelId::BresseFrictional => &[P, Q, W],
            ModelId::BresseHeatI => &[P, Q, W, Theta],
            ModelId::BresseHeatII => &[P, Q, W, Theta, Eta],
        }
    }

    pub(crate) fn strains(&self, z: &State) -> Result<Strains> {
        let g = self.grid();
        let n = g.n();
        let phi = z.field(Phi)?;
        let psi = z.field(Psi)?;
        let mut shear = vec![0.0; n];
        g.d1_into(phi, &mut shear);
        for (s, p) in shear.iter_mut().zip(psi) {
            *s += p;
        }
        let axial = match self.id().family() {
            Family::Timoshenko => None,
            Family::Bresse => {
                let l = self.params().l;
                let chi = z.field(Chi)?;
                for (s, c) in shear.iter_mut().zip(chi) {
                    *s += l * c;
                }
                let mut axial = vec![0.0; n];
                g.d1_into(chi, &mut axial);
                for (a, f) in axial.iter_mut().zip(phi) {
                    *a -= l * f;
                }
                Some(axial)
            }
        };
        Ok(Strains { shear, axial })
    }

    /// Total energy `E(z)`, including the reservoir `e` when present.
    pub fn energy(&self, z: &State) -> Result<f64> {
        self.check_layout(z)?;
        let e = if self.layout().has_reservoir() {
            z.get_reservoir()?
        } else {
            0.0
        };
        Ok(self.field_energy(z)? + e)
    }

    /// Energy without the reservoir (or, for the log-entropy model, without
    /// the internal energy `∫θ`): the part that decays in damped runs.
    pub fn mechanical_energy(&self, z: &State) -> Result<f64> {
        self.check_layout(z)?;
        let mut energy = self.field_energy(z)?;
        if self.id() == ModelId::TimoshenkoNew {
            energy -= self.grid().integrate(z.field(Theta)?)?;
        }
        Ok(energy)
    }

    fn field_energy(&self, z: &State) -> Result<f64> {
        let g = self.grid();
        let p = self.params();
        let n = g.n();
        let mut density = 0.0;

        for name in self.quadratic_fields() {
            density += 0.5 * z.field(*name)?.iter().map(|v| v * v).sum::<f64>();
        }

        let strains = self.strains(z)?;
        density += 0.5 * p.k * strains.shear.iter().map(|s| s * s).sum::<f64>();
        if let Some(axial) = &strains.axial {
            density += 0.5 * p.k0 * axial.iter().map(|s| s * s).sum::<f64>();
        }

        let mut grad = vec![0.0; n];
        g.dplus_into(z.field(Psi)?, &mut grad);
        density += 0.5 * p.b * grad.iter().map(|s| s * s).sum::<f64>();

        match self.id() {
            ModelId::TimoshenkoHeatIII => {
                g.dplus_into(z.field(Theta)?, &mut grad);
                density += 0.5 * p.delta * grad.iter().map(|s| s * s).sum::<f64>();
            }
            ModelId::TimoshenkoNew => {
                density += z.field(Theta)?.iter().sum::<f64>();
            }
            _ => {}
        }
        Ok(g.dx() * density)
    }

    /// Entropy `α e`, or `∫ log θ` for the log-entropy model.
    pub fn entropy(&self, z: &State) -> Result<f64> {
        self.check_layout(z)?;
        if self.id().has_log_entropy() {
            self.validate_state(z)?;
            let theta = z.field(Theta)?;
            Ok(self.grid().dx() * theta.iter().map(|t| t.ln()).sum::<f64>())
        } else {
            Ok(self.params().alpha * z.get_reservoir()?)
        }
    }

    pub fn functional(&self, kind: FunctionalKind, z: &State) -> Result<f64> {
        match kind {
            FunctionalKind::Energy => self.energy(z),
            FunctionalKind::Entropy => self.entropy(z),
        }
    }

    pub fn grad_energy(&self, z: &State) -> Result<CotangentVector> {
        self.check_layout(z)?;
        let g = self.grid();
        let p = self.params();
        let n = g.n();
        let mut out = CotangentVector::zeros(self.layout());
        let strains = self.strains(z)?;

        // φ: -k (shear)_x [- k0 l axial]
        {
            let slot = out.field_mut(Phi)?;
            g.d1_into(&strains.shear, slot);
            slot.iter_mut().for_each(|v| *v *= -p.k);
            if let Some(axial) = &strains.axial {
                for (v, a) in slot.iter_mut().zip(axial) {
                    *v -= p.k0 * p.l * a;
                }
            }
        }
        // ψ: k shear - b ψ_xx
        {
            let mut lap = vec![0.0; n];
            g.d2_into(z.field(Psi)?, &mut lap);
            let slot = out.field_mut(Psi)?;
            for i in 0..n {
                slot[i] = p.k * strains.shear[i] - p.b * lap[i];
            }
        }
        // χ: k l shear - k0 (axial)_x
        if let Some(axial) = &strains.axial {
            let mut dax = vec![0.0; n];
            g.d1_into(axial, &mut dax);
            let slot = out.field_mut(Chi)?;
            for i in 0..n {
                slot[i] = p.k * p.l * strains.shear[i] - p.k0 * dax[i];
            }
        }
        for name in self.quadratic_fields() {
            out.set_field(*name, z.field(*name)?)?;
        }
        match self.id() {
            ModelId::TimoshenkoHeatIII => {
                let slot = out.field_mut(Theta)?;
                g.d2_into(z.field(Theta)?, slot);
                slot.iter_mut().for_each(|v| *v *= -p.delta);
            }
            ModelId::TimoshenkoNew => {
                out.field_mut(Theta)?.iter_mut().for_each(|v| *v = 1.0);
            }
            _ => {}
        }
        if self.layout().has_reservoir() {
            out.set_reservoir(1.0)?;
        }
        Ok(out)
    }

    pub fn grad_entropy(&self, z: &State) -> Result<CotangentVector> {
        self.check_layout(z)?;
        let mut out = CotangentVector::zeros(self.layout());
        if self.id().has_log_entropy() {
            self.validate_state(z)?;
            let theta = z.field(Theta)?;
            for (o, t) in out.field_mut(Theta)?.iter_mut().zip(theta) {
                *o = 1.0 / t;
            }
        } else {
            out.set_reservoir(self.params().alpha)?;
        }
        Ok(out)
    }
}

/// Central-difference gradient of `f` at `z` with the relative step
/// `h_i = 1e-6 (1 + |z_i|)`. Field components are divided by `dx` so the
/// result approximates the density derivative, consistent with the pairing.
pub fn fd_gradient<F>(f: F, z: &State) -> Result<CotangentVector>
where
    F: Fn(&State) -> Result<f64>,
{
    fd_gradient_with_step(f, z, |zi| 1e-6 * (1.0 + zi.abs()))
}

/// [`fd_gradient`] with a caller-chosen step per component.
pub fn fd_gradient_with_step<F, H>(f: F, z: &State, step: H) -> Result<CotangentVector>
where
    F: Fn(&State) -> Result<f64>,
    H: Fn(f64) -> f64,
{
    let layout = z.layout();
    let mut out = CotangentVector::zeros(layout);
    let mut probe = z.clone();
    for i in 0..layout.dim() {
        let zi = z.flat()[i];
        let h = step(zi);
        probe.flat_mut()[i] = zi + h;
        let plus = f(&probe)?;
        probe.flat_mut()[i] = zi - h;
        let minus = f(&probe)?;
        probe.flat_mut()[i] = zi;
        out.flat_mut()[i] = (plus - minus) / (2.0 * h) / layout.weight(i);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::build_model;
    use crate::grid::Grid;

    fn model(id: ModelId, n: usize) -> ModelSpec {
        build_model(id, ModelParams::default(), Grid::new(n, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn zero_state_energy() {
        for id in ModelId::ALL {
            let m = model(id, 8);
            let z = m.default_initial_state(1, 0.0).unwrap();
            let expected = if id == ModelId::TimoshenkoNew {
                1.0
            } else {
                0.0
            };
            assert_eq!(m.energy(&z).unwrap(), expected, "{id}");
        }
    }

    #[test]
    fn kinetic_energy_by_hand() {
        let m = model(ModelId::TimoshenkoFrictional, 4);
        let mut z = State::zeros(m.layout());
        z.set_field(P, &[2.0; 4]).unwrap();
        // ∫ ½ p² = 0.25 * 4 * 2
        assert_eq!(m.energy(&z).unwrap(), 2.0);
    }

    #[test]
    fn entropy_values() {
        let params = ModelParams {
            alpha: 2.0,
            ..ModelParams::default()
        };
        let m = build_model(
            ModelId::TimoshenkoFrictional,
            params,
            Grid::new(4, 1.0).unwrap(),
        )
        .unwrap();
        let mut z = State::zeros(m.layout());
        z.set_reservoir(3.0).unwrap();
        assert_eq!(m.entropy(&z).unwrap(), 6.0);

        let m = model(ModelId::TimoshenkoNew, 4);
        let mut z = m.default_initial_state(1, 0.0).unwrap();
        assert_eq!(m.entropy(&z).unwrap(), 0.0);
        z.field_mut(Theta).unwrap()[2] = 0.0;
        assert!(matches!(m.entropy(&z), Err(Error::Domain(_))));
        assert!(matches!(m.grad_entropy(&z), Err(Error::Domain(_))));
    }

    #[test]
    fn gradient_at_rest() {
        let m = model(ModelId::BresseHeatI, 6);
        let z = State::zeros(m.layout());
        let g = m.grad_energy(&z).unwrap();
        let (fields, e) = g.flat().split_at(g.flat().len() - 1);
        assert!(fields.iter().all(|v| *v == 0.0));
        assert_eq!(e, &[1.0]);

        let m = model(ModelId::TimoshenkoNew, 6);
        let z = m.default_initial_state(1, 0.3).unwrap();
        assert!(m
            .grad_energy(&z)
            .unwrap()
            .field(Theta)
            .unwrap()
            .iter()
            .all(|v| *v == 1.0));
        let mut z2 = z.clone();
        z2.set_field(Theta, &[2.0; 6]).unwrap();
        assert!(m
            .grad_entropy(&z2)
            .unwrap()
            .field(Theta)
            .unwrap()
            .iter()
            .all(|v| *v == 0.5));
    }

    #[test]
    fn entropy_gradient_is_alpha_in_reservoir() {
        let m = model(ModelId::TimoshenkoFrictional, 4);
        let z = m.default_initial_state(1, 0.7).unwrap();
        let g = m.grad_entropy(&z).unwrap();
        assert_eq!(g.get_reservoir().unwrap(), 1.0);
        assert!(g.field(P).unwrap().iter().all(|v| *v == 0.0));
        let fd = fd_gradient(|s| m.entropy(s), &z).unwrap();
        assert!((fd.get_reservoir().unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn fd_of_quadratic_recovers_field() {
        let m = model(ModelId::TimoshenkoFrictional, 8);
        let mut z = State::zeros(m.layout());
        let p: Vec<f64> = (0..8).map(|i| (i as f64 * 0.9).cos()).collect();
        z.set_field(P, &p).unwrap();
        let grid = m.grid().clone();
        let g = fd_gradient(
            |s| grid.inner(s.field(P)?, s.field(P)?).map(|v| 0.5 * v),
            &z,
        )
        .unwrap();
        for (a, b) in g.field(P).unwrap().iter().zip(&p) {
            assert!((a - b).abs() < 1e-8);
        }
        assert!(g.field(Q).unwrap().iter().all(|v| *v == 0.0));

        let fd = fd_gradient(|s| m.energy(s), &State::zeros(m.layout())).unwrap();
        assert!((fd.get_reservoir().unwrap() - 1.0).abs() < 1e-9);
        assert!(fd.field(Phi).unwrap().iter().all(|v| v.abs() < 1e-9));
    }

    #[test]
    fn grad_energy_is_linear_for_quadratic_models() {
        for id in ModelId::ALL
            .into_iter()
            .filter(|id| *id != ModelId::TimoshenkoNew)
        {
            let m = model(id, 8);
            let a = m.default_initial_state(1, 0.4).unwrap();
            let mut b = m.default_initial_state(2, -0.3).unwrap();
            b.flat_mut()
                .iter_mut()
                .enumerate()
                .for_each(|(i, v)| *v += (i as f64).sin());
            let mut sum = a.clone();
            sum.axpy(2.0, &b).unwrap();
            let ga = m.grad_energy(&a).unwrap();
            let gb = m.grad_energy(&b).unwrap();
            let gs = m.grad_energy(&sum).unwrap();
            let nf = m.layout().dim() - 1;
            for i in 0..nf {
                let lin = ga.flat()[i] + 2.0 * gb.flat()[i];
                assert!(
                    (gs.flat()[i] - lin).abs() <= 1e-10 * (1.0 + lin.abs()),
                    "{id} slot {i}"
                );
            }
        }
    }

    #[test]
    fn params_by_name() {
        let mut p = ModelParams::default();
        p.set("K", 2.5).unwrap();
        assert_eq!(p.big_k, 2.5);
        assert_eq!(p.get("K"), Some(2.5));
        assert!(p.set("kapa", 1.0).is_err());
        for name in ModelParams::NAMES {
            assert!(p.get(name).is_some());
        }
    }
}
