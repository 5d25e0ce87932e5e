//! The ten beam models: identifiers, layouts, parameter validation,
//! initial data and the explicit stability bound.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::functionals::ModelParams;
use crate::grid::Grid;
use crate::state::{FieldName, State, StateLayout};

use FieldName::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelId {
    TimoshenkoUndamped,
    TimoshenkoFrictional,
    TimoshenkoHeatI,
    /// Cattaneo heat flux `s`.
    TimoshenkoHeatII,
    /// Thermal displacement `θ` with velocity `w`.
    TimoshenkoHeatIII,
    /// Nonlinear thermal coupling with log-entropy; no reservoir.
    TimoshenkoNew,
    BresseUndamped,
    BresseFrictional,
    BresseHeatI,
    /// Two temperatures `θ`, `η`.
    BresseHeatII,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Timoshenko,
    Bresse,
}

impl ModelId {
    pub const ALL: [ModelId; 10] = [
        ModelId::TimoshenkoUndamped,
        ModelId::TimoshenkoFrictional,
        ModelId::TimoshenkoHeatI,
        ModelId::TimoshenkoHeatII,
        ModelId::TimoshenkoHeatIII,
        ModelId::TimoshenkoNew,
        ModelId::BresseUndamped,
        ModelId::BresseFrictional,
        ModelId::BresseHeatI,
        ModelId::BresseHeatII,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelId::TimoshenkoUndamped => "timoshenko-undamped",
            ModelId::TimoshenkoFrictional => "timoshenko-frictional",
            ModelId::TimoshenkoHeatI => "timoshenko-heat1",
            ModelId::TimoshenkoHeatII => "timoshenko-heat2",
            ModelId::TimoshenkoHeatIII => "timoshenko-heat3",
            ModelId::TimoshenkoNew => "timoshenko-new",
            ModelId::BresseUndamped => "bresse-undamped",
            ModelId::BresseFrictional => "bresse-frictional",
            ModelId::BresseHeatI => "bresse-heat1",
            ModelId::BresseHeatII => "bresse-heat2",
        }
    }

    pub fn family(self) -> Family {
        match self {
            ModelId::TimoshenkoUndamped
            | ModelId::TimoshenkoFrictional
            | ModelId::TimoshenkoHeatI
            | ModelId::TimoshenkoHeatII
            | ModelId::TimoshenkoHeatIII
            | ModelId::TimoshenkoNew => Family::Timoshenko,
            _ => Family::Bresse,
        }
    }

    pub fn is_damped(self) -> bool {
        !matches!(self, ModelId::TimoshenkoUndamped | ModelId::BresseUndamped)
    }

    pub fn has_reservoir(self) -> bool {
        self != ModelId::TimoshenkoNew
    }

    /// Entropy `∫ log θ` instead of `α e`.
    pub fn has_log_entropy(self) -> bool {
        self == ModelId::TimoshenkoNew
    }

    /// Whether `L(z)` depends on the state.
    pub fn has_state_dependent_poisson(self) -> bool {
        self == ModelId::TimoshenkoNew
    }

    pub fn field_order(self) -> Vec<FieldName> {
        let mut fields = match self.family() {
            Family::Timoshenko => vec![Phi, Psi, P, Q],
            Family::Bresse => vec![Phi, Psi, Chi, P, Q, W],
        };
        fields.extend_from_slice(match self {
            ModelId::TimoshenkoHeatI | ModelId::TimoshenkoNew | ModelId::BresseHeatI => {
                &[Theta][..]
            }
            ModelId::TimoshenkoHeatII => &[Theta, S],
            ModelId::TimoshenkoHeatIII => &[Theta, W],
            ModelId::BresseHeatII => &[Theta, Eta],
            _ => &[],
        });
        fields
    }

    pub fn layout(self, grid: Grid) -> Result<StateLayout> {
        StateLayout::new(grid, self.field_order(), self.has_reservoir())
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelId {
    type Err = Error;

    /// Accepts the kebab-case names and the enum spellings, case-insensitively.
    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .map(|c| c.to_ascii_lowercase())
            .collect();
        ModelId::ALL
            .into_iter()
            .find(|id| {
                let canon: String = id.name().chars().filter(|c| *c != '-').collect();
                canon == key || format!("{id:?}").to_ascii_lowercase() == key
            })
            .ok_or_else(|| Error::Lookup(format!("model `{s}`")))
    }
}

/// A fully wired catalog entry: layout, parameters and (through the
/// `functionals`, `operators` and `engine` modules) the building blocks
/// `E`, `S`, `L`, `M` and the hand-written PDE right-hand side.
#[derive(Debug, Clone)]
pub struct ModelSpec {
    id: ModelId,
    layout: Arc<StateLayout>,
    params: ModelParams,
}

pub fn build_model(id: ModelId, params: ModelParams, grid: Grid) -> Result<ModelSpec> {
    ModelSpec::new(id, params, grid)
}

impl ModelSpec {
    pub fn new(id: ModelId, params: ModelParams, grid: Grid) -> Result<Self> {
        params.validate_for(id)?;
        Ok(ModelSpec {
            id,
            layout: Arc::new(id.layout(grid)?),
            params,
        })
    }

    /// Unit parameters, `α = 1`.
    pub fn with_defaults(id: ModelId, grid: Grid) -> Result<Self> {
        Self::new(id, ModelParams::default(), grid)
    }

    pub fn id(&self) -> ModelId {
        self.id
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn layout(&self) -> &Arc<StateLayout> {
        &self.layout
    }

    pub fn grid(&self) -> &Grid {
        self.layout.grid()
    }

    pub(crate) fn check_layout(&self, z: &State) -> Result<()> {
        z.check_same_layout(&self.layout)
    }

    /// Rejects states outside the model's domain (nonpositive θ under log-entropy).
    pub fn validate_state(&self, z: &State) -> Result<()> {
        self.check_layout(z)?;
        if self.id.has_log_entropy() {
            let theta = z.field(Theta)?;
            if let Some((i, t)) = theta.iter().enumerate().find(|(_, t)| !(**t > 0.0)) {
                return Err(Error::Domain(format!(
                    "temperature must be positive under log-entropy, theta[{i}] = {t}"
                )));
            }
        }
        Ok(())
    }

    /// Largest RK4 step considered stable: `0.9 dx²/(2D)` for the largest
    /// diffusivity `D`, a wave bound `2/ω_max`, and `2/γ_max` for frictions.
    pub fn dt_bound(&self) -> f64 {
        let p = &self.params;
        let dx = self.grid().dx();
        let diffusivity = match self.id {
            ModelId::TimoshenkoHeatI | ModelId::BresseHeatI => p.kappa,
            ModelId::TimoshenkoHeatIII => p.big_k,
            ModelId::TimoshenkoNew => p.delta,
            ModelId::BresseHeatII => p.kappa1.max(p.kappa2),
            _ => 0.0,
        };
        let parabolic = if diffusivity > 0.0 {
            0.9 * dx * dx / (2.0 * diffusivity)
        } else {
            f64::INFINITY
        };

        let (stiffness, coupling) = match self.id.family() {
            Family::Timoshenko => {
                let extra = match self.id {
                    ModelId::TimoshenkoHeatIII => 4.0 * p.delta,
                    _ => 0.0,
                };
                (p.k * (1.0 + dx * dx) + 4.0 * p.b + extra, p.gamma + 1.0)
            }
            Family::Bresse => {
                let arch = (1.0 + p.l) * (1.0 + p.l);
                (
                    (p.k + p.k0) * arch * (1.0 + dx * dx) + 4.0 * p.b,
                    p.gamma + p.delta + p.gamma * p.l * dx,
                )
            }
        };
        let omega = (stiffness.sqrt() + coupling) / dx + 1.0;
        let wave = 2.0 / omega;

        let friction = [p.delta1, p.delta2, p.gamma1, p.gamma2, p.gamma3, p.beta]
            .into_iter()
            .fold(0.0f64, f64::max);
        let damping = if friction > 0.0 {
            2.0 / friction
        } else {
            f64::INFINITY
        };

        parabolic.min(wave).min(damping)
    }

    pub fn default_initial_state(&self, mode: u32, amplitude: f64) -> Result<State> {
        default_initial_state(self.id, self.grid(), mode, amplitude)
    }
}

/// Smooth single-mode data: `φ = A sin(kx)`, `ψ = A cos(kx)`, `χ = A sin(kx + π/4)`,
/// velocities and auxiliary fields zero, `θ ≡ 1` for the log-entropy model.
pub fn default_initial_state(id: ModelId, grid: &Grid, mode: u32, amplitude: f64) -> Result<State> {
    if mode < 1 {
        return Err(Error::Precondition("mode must be at least 1".into()));
    }
    let layout = Arc::new(id.layout(grid.clone())?);
    let wavenumber = 2.0 * PI * f64::from(mode) / grid.length();
    let mut z = State::zeros(&layout);
    z.set_field(Phi, &grid.sample(|x| amplitude * (wavenumber * x).sin()))?;
    z.set_field(Psi, &grid.sample(|x| amplitude * (wavenumber * x).cos()))?;
    if layout.has_field(Chi) {
        z.set_field(
            Chi,
            &grid.sample(|x| amplitude * (wavenumber * x + 0.25 * PI).sin()),
        )?;
    }
    if id.has_log_entropy() {
        z.set_field(Theta, &vec![1.0; grid.n()])?;
    }
    Ok(z)
}
