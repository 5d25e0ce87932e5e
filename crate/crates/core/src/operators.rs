//! Poisson operators `L(z)` as block operators and dissipative operators
//! `M(z)` in factored form `Σ Jᵀ W J`.
//!
//! Adjoints are taken with respect to the mixed pairing (`dx`-weighted on
//! fields, plain on `e`). Under it `d1` is skew, `d2` is symmetric, the
//! forward difference `D+` has adjoint `-D-`, and a field-to-scalar block
//! `c⟨a, ·⟩` is the exact transpose of the scalar-to-field block `c a ·`.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::catalog::{Family, ModelId, ModelSpec};
use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::state::{CotangentVector, FieldName, Slot, State, StateLayout};

use FieldName::*;

/// Action of one block, mapping the column slot into the row slot.
#[derive(Debug, Clone, PartialEq)]
pub enum BlockKind {
    /// `c ξ`
    Identity(f64),
    /// `c ∂x ξ`
    D1(f64),
    /// `c ∂xx ξ`
    D2(f64),
    /// `c a ∂x ξ`
    MulD1(f64, Field),
    /// `c ∂x (a ξ)`
    D1Mul(f64, Field),
    /// `c D-(a D+ ξ)`, a weighted Laplacian with weights at midpoints `i + 1/2`.
    DivGrad(f64, Field),
    /// `c ⟨a, ξ⟩`, field column into the `e` row.
    FieldToScalar(f64, Field),
    /// `c a ξ_e`, `e` column into a field row.
    ScalarToField(f64, Field),
    /// `c ξ_e`
    ScalarToScalar(f64),
}

impl BlockKind {
    fn accepts(&self, row: Slot, col: Slot) -> bool {
        let row_field = matches!(row, Slot::Field(_));
        let col_field = matches!(col, Slot::Field(_));
        match self {
            BlockKind::FieldToScalar(..) => col_field && !row_field,
            BlockKind::ScalarToField(..) => !col_field && row_field,
            BlockKind::ScalarToScalar(_) => !col_field && !row_field,
            _ => col_field && row_field,
        }
    }

    fn coefficient_field(&self) -> Option<&Field> {
        match self {
            BlockKind::MulD1(_, a)
            | BlockKind::D1Mul(_, a)
            | BlockKind::DivGrad(_, a)
            | BlockKind::FieldToScalar(_, a)
            | BlockKind::ScalarToField(_, a) => Some(a),
            _ => None,
        }
    }

    /// The block of the adjoint operator, placed at the transposed position.
    pub fn adjoint(&self) -> BlockKind {
        match self {
            BlockKind::Identity(c) => BlockKind::Identity(*c),
            BlockKind::D1(c) => BlockKind::D1(-c),
            BlockKind::D2(c) => BlockKind::D2(*c),
            BlockKind::MulD1(c, a) => BlockKind::D1Mul(-c, a.clone()),
            BlockKind::D1Mul(c, a) => BlockKind::MulD1(-c, a.clone()),
            BlockKind::DivGrad(c, a) => BlockKind::DivGrad(*c, a.clone()),
            BlockKind::FieldToScalar(c, a) => BlockKind::ScalarToField(*c, a.clone()),
            BlockKind::ScalarToField(c, a) => BlockKind::FieldToScalar(*c, a.clone()),
            BlockKind::ScalarToScalar(c) => BlockKind::ScalarToScalar(*c),
        }
    }

    pub fn scaled(&self, s: f64) -> BlockKind {
        match self {
            BlockKind::Identity(c) => BlockKind::Identity(s * c),
            BlockKind::D1(c) => BlockKind::D1(s * c),
            BlockKind::D2(c) => BlockKind::D2(s * c),
            BlockKind::MulD1(c, a) => BlockKind::MulD1(s * c, a.clone()),
            BlockKind::D1Mul(c, a) => BlockKind::D1Mul(s * c, a.clone()),
            BlockKind::DivGrad(c, a) => BlockKind::DivGrad(s * c, a.clone()),
            BlockKind::FieldToScalar(c, a) => BlockKind::FieldToScalar(s * c, a.clone()),
            BlockKind::ScalarToField(c, a) => BlockKind::ScalarToField(s * c, a.clone()),
            BlockKind::ScalarToScalar(c) => BlockKind::ScalarToScalar(s * c),
        }
    }

    /// Adds the block applied to `x` into `out`.
    fn apply_add(&self, grid: &Grid, x: &[f64], out: &mut [f64], scratch: &mut Vec<f64>) {
        let n = grid.n();
        scratch.resize(n, 0.0);
        match self {
            BlockKind::Identity(c) => add_scaled(out, *c, x),
            BlockKind::D1(c) => {
                grid.d1_into(x, scratch);
                add_scaled(out, *c, scratch);
            }
            BlockKind::D2(c) => {
                grid.d2_into(x, scratch);
                add_scaled(out, *c, scratch);
            }
            BlockKind::MulD1(c, a) => {
                grid.d1_into(x, scratch);
                for i in 0..n {
                    out[i] += c * a[i] * scratch[i];
                }
            }
            BlockKind::D1Mul(c, a) => {
                let prod: Vec<f64> = a.iter().zip(x).map(|(a, x)| a * x).collect();
                grid.d1_into(&prod, scratch);
                add_scaled(out, *c, scratch);
            }
            BlockKind::DivGrad(c, a) => {
                grid.dplus_into(x, scratch);
                let flux: Vec<f64> = a.iter().zip(scratch.iter()).map(|(a, g)| a * g).collect();
                grid.dminus_into(&flux, scratch);
                add_scaled(out, *c, scratch);
            }
            BlockKind::FieldToScalar(c, a) => out[0] += c * grid.inner_unchecked(a, x),
            BlockKind::ScalarToField(c, a) => add_scaled(out, c * x[0], a),
            BlockKind::ScalarToScalar(c) => out[0] += c * x[0],
        }
    }
}

fn add_scaled(out: &mut [f64], c: f64, x: &[f64]) {
    for (o, v) in out.iter_mut().zip(x) {
        *o += c * v;
    }
}

/// Sparse block matrix over the slots of a layout; absent blocks are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockOperator {
    layout: Arc<StateLayout>,
    blocks: BTreeMap<(Slot, Slot), BlockKind>,
}

impl BlockOperator {
    pub fn new(layout: &Arc<StateLayout>) -> Self {
        BlockOperator {
            layout: Arc::clone(layout),
            blocks: BTreeMap::new(),
        }
    }

    pub fn layout(&self) -> &Arc<StateLayout> {
        &self.layout
    }

    /// Places `kind` at `(row, col)`, replacing any previous block there.
    pub fn insert(&mut self, row: Slot, col: Slot, kind: BlockKind) -> Result<()> {
        self.layout.slot_range(row)?;
        self.layout.slot_range(col)?;
        if !kind.accepts(row, col) {
            return Err(Error::Structural(format!(
                "block {kind:?} cannot map {col} into {row}"
            )));
        }
        if let Some(a) = kind.coefficient_field() {
            if a.len() != self.layout.grid().n() {
                return Err(Error::Structural(format!(
                    "coefficient field of block ({row}, {col}) has {} values, grid has {}",
                    a.len(),
                    self.layout.grid().n()
                )));
            }
        }
        self.blocks.insert((row, col), kind);
        Ok(())
    }

    fn put(&mut self, row: FieldName, col: FieldName, kind: BlockKind) -> Result<()> {
        self.insert(Slot::Field(row), Slot::Field(col), kind)
    }

    pub fn block(&self, row: Slot, col: Slot) -> Option<&BlockKind> {
        self.blocks.get(&(row, col))
    }

    pub fn blocks(&self) -> impl Iterator<Item = (&(Slot, Slot), &BlockKind)> {
        self.blocks.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Multiplies one block by `factor`; used to build corrupted operators
    /// in negative-control tests.
    pub fn scale_block(&mut self, row: Slot, col: Slot, factor: f64) -> Result<()> {
        let block = self
            .blocks
            .get_mut(&(row, col))
            .ok_or_else(|| Error::Lookup(format!("block ({row}, {col})")))?;
        *block = block.scaled(factor);
        Ok(())
    }

    /// Adjoint with respect to the mixed pairing.
    pub fn transpose(&self) -> BlockOperator {
        BlockOperator {
            layout: Arc::clone(&self.layout),
            blocks: self
                .blocks
                .iter()
                .map(|((r, c), k)| ((*c, *r), k.adjoint()))
                .collect(),
        }
    }

    pub fn negated(&self) -> BlockOperator {
        BlockOperator {
            layout: Arc::clone(&self.layout),
            blocks: self
                .blocks
                .iter()
                .map(|(rc, k)| (*rc, k.scaled(-1.0)))
                .collect(),
        }
    }

    /// Structurally symmetric (`Aᵀ = A` block by block).
    pub fn is_symmetric(&self) -> bool {
        self.transpose() == *self
    }

    pub fn is_antisymmetric(&self) -> bool {
        self.transpose() == self.negated()
    }

    pub fn apply_flat(&self, x: &[f64]) -> Result<Vec<f64>> {
        let dim = self.layout.dim();
        if x.len() != dim {
            return Err(Error::Structural(format!(
                "operator expects length {dim}, got {}",
                x.len()
            )));
        }
        let mut out = vec![0.0; dim];
        let mut scratch = Vec::new();
        let grid = self.layout.grid();
        for ((row, col), kind) in &self.blocks {
            let rr = self.layout.slot_range(*row)?;
            let cr = self.layout.slot_range(*col)?;
            kind.apply_add(grid, &x[cr], &mut out[rr], &mut scratch);
        }
        Ok(out)
    }

    /// Maps a covector to a tangent vector.
    pub fn apply(&self, xi: &CotangentVector) -> Result<State> {
        xi.check_same_layout(&self.layout)?;
        State::from_flat(&self.layout, self.apply_flat(xi.flat())?)
    }
}

/// Linear map from a covector to a field used in one dissipation row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowMap {
    /// `ξ_target`
    Pointwise,
    /// `D+ ξ_target`
    ForwardDifference,
}

/// One factor `J(ξ) = G ξ_target - a ξ_e` with pointwise weight `w ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct DissipationRow {
    pub target: FieldName,
    pub map: RowMap,
    /// Coefficient `a` of the reservoir column; `None` when the layout has no `e`.
    pub coupling: Option<Field>,
    pub weight: Field,
}

/// `M = Σ Jᵀ W J`, symmetric and positive semidefinite by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct FactoredDissipator {
    layout: Arc<StateLayout>,
    rows: Vec<DissipationRow>,
}

impl FactoredDissipator {
    pub fn new(layout: &Arc<StateLayout>, rows: Vec<DissipationRow>) -> Result<Self> {
        let n = layout.grid().n();
        for row in &rows {
            layout.field_range(row.target)?;
            if row.weight.len() != n || row.coupling.as_ref().is_some_and(|a| a.len() != n) {
                return Err(Error::Structural(format!(
                    "dissipation row for `{}` has mismatched field lengths",
                    row.target
                )));
            }
            if row.coupling.is_some() && !layout.has_reservoir() {
                return Err(Error::Structural(
                    "reservoir coupling without a reservoir".into(),
                ));
            }
            if let Some(w) = row.weight.iter().find(|w| !(**w >= 0.0)) {
                return Err(Error::Structural(format!(
                    "dissipation weight for `{}` must be nonnegative, got {w}",
                    row.target
                )));
            }
        }
        Ok(FactoredDissipator {
            layout: Arc::clone(layout),
            rows,
        })
    }

    pub fn rows(&self) -> &[DissipationRow] {
        &self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// `J(ξ)` for one row.
    pub fn row_value(&self, row: &DissipationRow, xi: &CotangentVector) -> Result<Vec<f64>> {
        xi.check_same_layout(&self.layout)?;
        let grid = self.layout.grid();
        let target = xi.field(row.target)?;
        let mut out = vec![0.0; grid.n()];
        match row.map {
            RowMap::Pointwise => out.copy_from_slice(target),
            RowMap::ForwardDifference => grid.dplus_into(target, &mut out),
        }
        if let Some(a) = &row.coupling {
            let xe = xi.get_reservoir()?;
            for (o, a) in out.iter_mut().zip(a.iter()) {
                *o -= a * xe;
            }
        }
        Ok(out)
    }

    pub fn apply(&self, xi: &CotangentVector) -> Result<State> {
        xi.check_same_layout(&self.layout)?;
        let grid = self.layout.grid();
        let mut out = State::zeros(&self.layout);
        let mut back = vec![0.0; grid.n()];
        for row in &self.rows {
            let mut r = self.row_value(row, xi)?;
            for (v, w) in r.iter_mut().zip(row.weight.iter()) {
                *v *= w;
            }
            match row.map {
                RowMap::Pointwise => back.copy_from_slice(&r),
                RowMap::ForwardDifference => {
                    grid.dminus_into(&r, &mut back);
                    back.iter_mut().for_each(|v| *v = -*v);
                }
            }
            add_scaled(out.field_mut(row.target)?, 1.0, &back);
            if let Some(a) = &row.coupling {
                let e = out.get_reservoir()? - grid.inner_unchecked(a, &r);
                out.set_reservoir(e)?;
            }
        }
        Ok(out)
    }

    /// `⟨ξ, M ξ⟩ = Σ ⟨Jξ, W Jξ⟩`.
    pub fn quadratic_form(&self, xi: &CotangentVector) -> Result<f64> {
        let grid = self.layout.grid();
        let mut total = 0.0;
        for row in &self.rows {
            let r = self.row_value(row, xi)?;
            total += grid.dx()
                * r.iter()
                    .zip(row.weight.iter())
                    .map(|(v, w)| w * v * v)
                    .sum::<f64>();
        }
        Ok(total)
    }
}

impl ModelSpec {
    /// The Poisson operator `L(z)`; only the log-entropy model depends on `z`.
    pub fn poisson(&self, z: &State) -> Result<BlockOperator> {
        self.check_layout(z)?;
        let p = self.params();
        let mut op = BlockOperator::new(self.layout());

        op.put(Phi, P, BlockKind::Identity(1.0))?;
        op.put(Psi, Q, BlockKind::Identity(1.0))?;
        op.put(P, Phi, BlockKind::Identity(-1.0))?;
        op.put(Q, Psi, BlockKind::Identity(-1.0))?;
        if self.id().family() == Family::Bresse {
            op.put(Chi, W, BlockKind::Identity(1.0))?;
            op.put(W, Chi, BlockKind::Identity(-1.0))?;
        }

        match self.id() {
            ModelId::TimoshenkoHeatI | ModelId::BresseHeatI => {
                op.put(Q, Theta, BlockKind::D1(-p.gamma))?;
                op.put(Theta, Q, BlockKind::D1(-p.gamma))?;
            }
            ModelId::TimoshenkoHeatII => {
                op.put(Q, Theta, BlockKind::D1(-p.gamma))?;
                op.put(Theta, Q, BlockKind::D1(-p.gamma))?;
                op.put(Theta, S, BlockKind::D1(-1.0))?;
                op.put(S, Theta, BlockKind::D1(-1.0))?;
            }
            ModelId::TimoshenkoHeatIII => {
                op.put(Q, W, BlockKind::D1(-p.gamma))?;
                op.put(W, Q, BlockKind::D1(-p.gamma))?;
                op.put(Theta, W, BlockKind::Identity(1.0))?;
                op.put(W, Theta, BlockKind::Identity(-1.0))?;
            }
            ModelId::TimoshenkoNew => {
                let theta = z.get_field(Theta)?;
                op.put(Q, Theta, BlockKind::D1Mul(p.gamma, theta.clone()))?;
                op.put(Theta, Q, BlockKind::MulD1(p.gamma, theta))?;
            }
            ModelId::BresseHeatII => {
                op.put(P, Eta, BlockKind::Identity(-p.gamma * p.l))?;
                op.put(Eta, P, BlockKind::Identity(p.gamma * p.l))?;
                op.put(Q, Theta, BlockKind::D1(-p.delta))?;
                op.put(Theta, Q, BlockKind::D1(-p.delta))?;
                op.put(W, Eta, BlockKind::D1(-p.gamma))?;
                op.put(Eta, W, BlockKind::D1(-p.gamma))?;
            }
            _ => {}
        }
        Ok(op)
    }

    /// The dissipative operator `M(z)` in factored form.
    pub fn factored_m(&self, z: &State) -> Result<FactoredDissipator> {
        self.check_layout(z)?;
        let p = self.params();
        let g = self.grid();
        let n = g.n();
        let inv_alpha = 1.0 / p.alpha;
        let constant = |w: f64| Field::constant(n, w * inv_alpha);

        let pointwise = |target: FieldName, w: f64| -> Result<DissipationRow> {
            Ok(DissipationRow {
                target,
                map: RowMap::Pointwise,
                coupling: Some(z.get_field(target)?),
                weight: constant(w),
            })
        };
        let conduction = |target: FieldName, w: f64| -> Result<DissipationRow> {
            Ok(DissipationRow {
                target,
                map: RowMap::ForwardDifference,
                coupling: Some(g.dplus(z.field(target)?)?),
                weight: constant(w),
            })
        };

        let rows = match self.id() {
            ModelId::TimoshenkoUndamped | ModelId::BresseUndamped => vec![],
            ModelId::TimoshenkoFrictional => vec![pointwise(P, p.delta1)?, pointwise(Q, p.delta2)?],
            ModelId::BresseFrictional => vec![
                pointwise(P, p.gamma1)?,
                pointwise(Q, p.gamma2)?,
                pointwise(W, p.gamma3)?,
            ],
            ModelId::TimoshenkoHeatI | ModelId::BresseHeatI => vec![conduction(Theta, p.kappa)?],
            ModelId::TimoshenkoHeatII => vec![pointwise(S, p.beta)?],
            ModelId::TimoshenkoHeatIII => vec![conduction(W, p.big_k)?],
            ModelId::BresseHeatII => vec![conduction(Theta, p.kappa1)?, conduction(Eta, p.kappa2)?],
            ModelId::TimoshenkoNew => {
                // Weight δ θ_i θ_{i+1} at midpoints: the discrete form of
                // -δ(θ² ∂x □)_x, which maps δS = 1/θ exactly to δ d2 θ.
                self.validate_state(z)?;
                let theta = z.field(Theta)?;
                let weight = (0..n)
                    .map(|i| p.delta * theta[i] * theta[(i + 1) % n])
                    .collect();
                vec![DissipationRow {
                    target: Theta,
                    map: RowMap::ForwardDifference,
                    coupling: None,
                    weight: Field::new(weight),
                }]
            }
        };
        FactoredDissipator::new(self.layout(), rows)
    }

    #[allow(non_snake_case)]
    pub fn apply_L(&self, z: &State, xi: &CotangentVector) -> Result<State> {
        xi.check_same_layout(self.layout())?;
        self.poisson(z)?.apply(xi)
    }

    #[allow(non_snake_case)]
    pub fn apply_M(&self, z: &State, xi: &CotangentVector) -> Result<State> {
        xi.check_same_layout(self.layout())?;
        self.factored_m(z)?.apply(xi)
    }

    /// `M(z)` assembled entry by entry as a block matrix, transcribed from the
    /// models' written operator matrices rather than from the factorization.
    /// `None` for undamped models.
    pub fn literal_m(&self, z: &State) -> Result<Option<BlockOperator>> {
        self.check_layout(z)?;
        let p = self.params();
        let g = self.grid();
        let a = 1.0 / p.alpha;
        let mut op = BlockOperator::new(self.layout());
        let e = Slot::Reservoir;
        let f = Slot::Field;

        let friction = |op: &mut BlockOperator, pairs: &[(FieldName, f64)]| -> Result<()> {
            let mut ee = 0.0;
            for (name, c) in pairs {
                let v = z.get_field(*name)?;
                op.insert(f(*name), f(*name), BlockKind::Identity(c * a))?;
                op.insert(f(*name), e, BlockKind::ScalarToField(-c * a, v.clone()))?;
                op.insert(e, f(*name), BlockKind::FieldToScalar(-c * a, v.clone()))?;
                ee += c * g.inner(&v, &v)?;
            }
            op.insert(e, e, BlockKind::ScalarToScalar(ee * a))
        };
        // -c ∂xx on the diagonal, c u_xx in the e column, and the e row
        // -c ∫ u_x ∂x □ = c ∫ u_xx □ after summation by parts.
        let conduction = |op: &mut BlockOperator, pairs: &[(FieldName, f64)]| -> Result<()> {
            let mut ee = 0.0;
            for (name, c) in pairs {
                let u = z.field(*name)?;
                let uxx = g.d2(u)?;
                let ux = g.dplus(u)?;
                op.insert(f(*name), f(*name), BlockKind::D2(-c * a))?;
                op.insert(f(*name), e, BlockKind::ScalarToField(c * a, uxx.clone()))?;
                op.insert(e, f(*name), BlockKind::FieldToScalar(c * a, uxx))?;
                ee += c * g.inner(&ux, &ux)?;
            }
            op.insert(e, e, BlockKind::ScalarToScalar(ee * a))
        };

        match self.id() {
            ModelId::TimoshenkoUndamped | ModelId::BresseUndamped => return Ok(None),
            ModelId::TimoshenkoFrictional => friction(&mut op, &[(P, p.delta1), (Q, p.delta2)])?,
            ModelId::BresseFrictional => {
                friction(&mut op, &[(P, p.gamma1), (Q, p.gamma2), (W, p.gamma3)])?
            }
            ModelId::TimoshenkoHeatII => friction(&mut op, &[(S, p.beta)])?,
            ModelId::TimoshenkoHeatI | ModelId::BresseHeatI => {
                conduction(&mut op, &[(Theta, p.kappa)])?
            }
            ModelId::TimoshenkoHeatIII => conduction(&mut op, &[(W, p.big_k)])?,
            ModelId::BresseHeatII => conduction(&mut op, &[(Theta, p.kappa1), (Eta, p.kappa2)])?,
            ModelId::TimoshenkoNew => {
                let theta = z.field(Theta)?;
                let n = g.n();
                let w = (0..n).map(|i| theta[i] * theta[(i + 1) % n]).collect();
                op.put(Theta, Theta, BlockKind::DivGrad(-p.delta, Field::new(w)))?;
            }
        }
        Ok(Some(op))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::ModelParams;

    fn model(id: ModelId, n: usize) -> ModelSpec {
        ModelSpec::with_defaults(id, Grid::new(n, 1.0).unwrap()).unwrap()
    }

    fn wavy(m: &ModelSpec) -> State {
        let mut z = m.default_initial_state(1, 0.3).unwrap();
        for (i, v) in z.flat_mut().iter_mut().enumerate() {
            *v += 0.1 * ((i * i) as f64 * 0.13).sin();
        }
        if m.id().has_log_entropy() {
            z.field_mut(Theta)
                .unwrap()
                .iter_mut()
                .for_each(|t| *t = 1.0 + t.abs());
        }
        z
    }

    #[test]
    fn block_kind_slot_rules() {
        let m = model(ModelId::TimoshenkoFrictional, 4);
        let mut op = BlockOperator::new(m.layout());
        assert!(op
            .insert(Slot::Reservoir, Slot::Field(P), BlockKind::Identity(1.0))
            .is_err());
        assert!(op
            .insert(
                Slot::Field(P),
                Slot::Field(Q),
                BlockKind::FieldToScalar(1.0, Field::constant(4, 1.0))
            )
            .is_err());
        assert!(op
            .insert(Slot::Field(Theta), Slot::Field(P), BlockKind::Identity(1.0))
            .is_err());
        assert!(op
            .insert(
                Slot::Field(P),
                Slot::Reservoir,
                BlockKind::ScalarToField(1.0, Field::constant(3, 1.0))
            )
            .is_err());
        assert!(op
            .insert(
                Slot::Reservoir,
                Slot::Reservoir,
                BlockKind::ScalarToScalar(2.0)
            )
            .is_ok());
    }

    #[test]
    fn poisson_operators_are_structurally_antisymmetric() {
        for id in ModelId::ALL {
            let m = model(id, 8);
            let op = m.poisson(&wavy(&m)).unwrap();
            assert!(op.is_antisymmetric(), "{id}");
            assert!(op
                .blocks()
                .all(|((r, c), _)| *r != Slot::Reservoir && *c != Slot::Reservoir));
        }
    }

    #[test]
    fn literal_m_is_structurally_symmetric() {
        for id in ModelId::ALL.into_iter().filter(|id| id.is_damped()) {
            let m = model(id, 8);
            let op = m.literal_m(&wavy(&m)).unwrap().unwrap();
            assert!(op.is_symmetric(), "{id}");
        }
    }

    #[test]
    fn l_of_energy_gradient_for_frictional_beam() {
        let m = model(ModelId::TimoshenkoFrictional, 16);
        let z = wavy(&m);
        let g = m.grid();
        let le = m.apply_L(&z, &m.grad_energy(&z).unwrap()).unwrap();
        let phi = z.field(Phi).unwrap();
        let psi = z.field(Psi).unwrap();
        let shear: Vec<f64> = g
            .d1(phi)
            .unwrap()
            .iter()
            .zip(psi)
            .map(|(a, b)| a + b)
            .collect();
        let dshear = g.d1(&shear).unwrap();
        let lap = g.d2(psi).unwrap();
        for i in 0..16 {
            assert_eq!(le.field(Phi).unwrap()[i], z.field(P).unwrap()[i]);
            assert_eq!(le.field(Psi).unwrap()[i], z.field(Q).unwrap()[i]);
            assert!((le.field(P).unwrap()[i] - dshear[i]).abs() < 1e-12);
            assert!((le.field(Q).unwrap()[i] - (lap[i] - shear[i])).abs() < 1e-10);
        }
        assert_eq!(le.get_reservoir().unwrap(), 0.0);
    }

    #[test]
    fn zero_covector_gives_zero_tangent() {
        for id in ModelId::ALL {
            let m = model(id, 8);
            let z = wavy(&m);
            let xi = CotangentVector::zeros(m.layout());
            assert_eq!(m.apply_L(&z, &xi).unwrap().norm_inf(), 0.0);
            assert_eq!(m.apply_M(&z, &xi).unwrap().norm_inf(), 0.0);
        }
    }

    #[test]
    fn heat_conduction_of_entropy_gradient() {
        let m = model(ModelId::TimoshenkoHeatI, 16);
        let z = wavy(&m);
        let g = m.grid();
        let ms = m.apply_M(&z, &m.grad_entropy(&z).unwrap()).unwrap();
        let theta = z.field(Theta).unwrap();
        let lap = g.d2(theta).unwrap();
        let grad = g.dplus(theta).unwrap();
        for i in 0..16 {
            assert!((ms.field(Theta).unwrap()[i] - lap[i]).abs() < 1e-10);
            assert_eq!(ms.field(P).unwrap()[i], 0.0);
        }
        let production = g.inner(&grad, &grad).unwrap();
        assert!((ms.get_reservoir().unwrap() - production).abs() < 1e-12 * (1.0 + production));
    }

    #[test]
    fn frictional_reservoir_rate() {
        let m = ModelSpec::with_defaults(ModelId::TimoshenkoFrictional, Grid::new(4, 1.0).unwrap())
            .unwrap();
        let mut z = State::zeros(m.layout());
        z.set_field(P, &[2.0; 4]).unwrap();
        let ms = m.apply_M(&z, &m.grad_entropy(&z).unwrap()).unwrap();
        assert_eq!(ms.get_reservoir().unwrap(), 4.0);
        assert_eq!(ms.field(P).unwrap(), &[-2.0; 4]);
    }

    #[test]
    fn factor_rows_vanish_on_energy_gradient() {
        for id in ModelId::ALL {
            let m = model(id, 8);
            let z = wavy(&m);
            let fm = m.factored_m(&z).unwrap();
            assert_eq!(fm.is_empty(), !id.is_damped());
            let ge = m.grad_energy(&z).unwrap();
            for row in fm.rows() {
                assert!(
                    fm.row_value(row, &ge).unwrap().iter().all(|v| *v == 0.0),
                    "{id}"
                );
            }
        }
    }

    #[test]
    fn heat_row_cancels_on_theta_and_unit_reservoir() {
        let m = model(ModelId::TimoshenkoHeatI, 8);
        let z = wavy(&m);
        let mut xi = CotangentVector::zeros(m.layout());
        xi.set_field(Theta, z.field(Theta).unwrap()).unwrap();
        xi.set_reservoir(1.0).unwrap();
        let fm = m.factored_m(&z).unwrap();
        assert!(fm
            .row_value(&fm.rows()[0], &xi)
            .unwrap()
            .iter()
            .all(|v| *v == 0.0));
    }

    #[test]
    fn log_entropy_production_vanishes_at_uniform_temperature() {
        let m = model(ModelId::TimoshenkoNew, 8);
        let mut z = m.default_initial_state(1, 0.2).unwrap();
        z.set_field(Theta, &[1.7; 8]).unwrap();
        let gs = m.grad_entropy(&z).unwrap();
        assert_eq!(m.factored_m(&z).unwrap().quadratic_form(&gs).unwrap(), 0.0);
        assert_eq!(m.apply_L(&z, &gs).unwrap().norm_inf(), 0.0);
    }

    #[test]
    fn factored_and_literal_m_agree() {
        for id in ModelId::ALL.into_iter().filter(|id| id.is_damped()) {
            let params = ModelParams {
                alpha: 0.7,
                kappa: 1.3,
                delta1: 0.4,
                ..ModelParams::default()
            };
            let m = ModelSpec::new(id, params, Grid::new(12, 2.0).unwrap()).unwrap();
            let z = wavy(&m);
            let mut xi = CotangentVector::zeros(m.layout());
            xi.flat_mut()
                .iter_mut()
                .enumerate()
                .for_each(|(i, v)| *v = (i as f64 * 0.77).cos());
            let a = m.apply_M(&z, &xi).unwrap();
            let b = m.literal_m(&z).unwrap().unwrap().apply(&xi).unwrap();
            let scale = 1.0 + a.norm_inf();
            for (x, y) in a.flat().iter().zip(b.flat()) {
                assert!((x - y).abs() <= 1e-12 * scale, "{id}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn negative_weights_rejected() {
        let m = model(ModelId::TimoshenkoFrictional, 4);
        let row = DissipationRow {
            target: P,
            map: RowMap::Pointwise,
            coupling: None,
            weight: Field::constant(4, -1.0),
        };
        assert!(FactoredDissipator::new(m.layout(), vec![row]).is_err());
    }

    #[test]
    fn mismatched_covector_layout() {
        let a = model(ModelId::TimoshenkoFrictional, 8);
        let b = model(ModelId::TimoshenkoHeatI, 8);
        let z = wavy(&a);
        let xi = CotangentVector::zeros(b.layout());
        assert!(matches!(a.apply_L(&z, &xi), Err(Error::Structural(_))));
        assert!(matches!(a.apply_M(&z, &xi), Err(Error::Structural(_))));
    }
}
