//! Numerical Jacobi identity for the Poisson bracket `{F, G} = ⟨δF, L δG⟩`.

use rand::Rng;
use rand_distr::StandardNormal;

use super::GenericSystem;
use crate::error::{Error, Result};
use crate::functionals::fd_gradient_with_step;
use crate::grid::Field;
use crate::operators::{BlockKind, BlockOperator};
use crate::state::{CotangentVector, Slot, State};

/// `F(z) = ½⟨z - z₀, A(z - z₀)⟩ + ⟨c, z⟩` with `A` symmetric.
#[derive(Debug, Clone)]
pub struct TestFunctional {
    z0: State,
    a: BlockOperator,
    c: CotangentVector,
}

impl TestFunctional {
    pub fn new(z0: State, a: BlockOperator, c: CotangentVector) -> Result<Self> {
        z0.check_same_layout(a.layout())?;
        c.check_same_layout(a.layout())?;
        if !a.is_symmetric() {
            return Err(Error::Structural(
                "test functional operator must be symmetric".into(),
            ));
        }
        Ok(TestFunctional { z0, a, c })
    }

    fn offset(&self, z: &State) -> Result<Vec<f64>> {
        z.check_same_layout(self.a.layout())?;
        Ok(z.flat()
            .iter()
            .zip(self.z0.flat())
            .map(|(a, b)| a - b)
            .collect())
    }

    pub fn value(&self, z: &State) -> Result<f64> {
        let d = self.offset(z)?;
        let ad = self.a.apply_flat(&d)?;
        let layout = self.a.layout();
        Ok(0.5 * layout.pairing(&d, &ad) + layout.pairing(self.c.flat(), z.flat()))
    }

    /// `A(z - z₀) + c`.
    pub fn gradient(&self, z: &State) -> Result<CotangentVector> {
        let mut g = self.a.apply_flat(&self.offset(z)?)?;
        for (v, c) in g.iter_mut().zip(self.c.flat()) {
            *v += c;
        }
        CotangentVector::from_flat(self.a.layout(), g)
    }
}

/// Random symmetric quadratic functional with `O(1)` coefficients; operator
/// entries mix pointwise, first- and second-difference couplings.
pub fn random_test_functional<R: Rng + ?Sized>(
    layout: &std::sync::Arc<crate::state::StateLayout>,
    rng: &mut R,
) -> Result<TestFunctional> {
    let n = layout.grid().n();
    let dx = layout.grid().dx();
    let mut normal = || -> f64 { rng.sample(StandardNormal) };
    let mut a = BlockOperator::new(layout);
    let slots = layout.slots();

    for (i, &row) in slots.iter().enumerate() {
        let c = normal();
        match row {
            Slot::Reservoir => a.insert(row, row, BlockKind::ScalarToScalar(c))?,
            Slot::Field(_) if i % 2 == 0 => a.insert(row, row, BlockKind::Identity(c))?,
            Slot::Field(_) => a.insert(row, row, BlockKind::D2(c * dx * dx))?,
        }
        for (j, &col) in slots.iter().enumerate().skip(i + 1) {
            let c = normal();
            let coeff = Field::new((0..n).map(|_| normal()).collect());
            let (upper, lower) = match (row, col) {
                (Slot::Field(_), Slot::Reservoir) => (
                    BlockKind::FieldToScalar(c, coeff.clone()),
                    BlockKind::ScalarToField(c, coeff),
                ),
                _ => match (i + j) % 3 {
                    0 => (BlockKind::Identity(c), BlockKind::Identity(c)),
                    1 => (BlockKind::D1(c * dx), BlockKind::D1(-c * dx)),
                    _ => (
                        BlockKind::MulD1(c * dx, coeff.clone()),
                        BlockKind::D1Mul(-c * dx, coeff),
                    ),
                },
            };
            // Inserted as (col, row) so a field-to-scalar block lands in the e row.
            a.insert(col, row, upper.clone())?;
            a.insert(row, col, upper.adjoint())?;
            debug_assert_eq!(upper.adjoint(), lower);
        }
    }

    let z0 = State::from_flat(layout, (0..layout.dim()).map(|_| normal()).collect())?;
    let c = CotangentVector::from_flat(layout, (0..layout.dim()).map(|_| normal()).collect())?;
    TestFunctional::new(z0, a, c)
}

/// `{F, G}(z)` from the gradients of `F` and `G` at `z`.
pub fn bracket<S: GenericSystem + ?Sized>(
    sys: &S,
    z: &State,
    df: &CotangentVector,
    dg: &CotangentVector,
) -> Result<f64> {
    let l_dg = sys.apply_poisson(z, dg)?;
    Ok(sys.layout().pairing(df.flat(), l_dg.flat()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiResidual {
    /// `|Σ_cyc {{F_i, F_j}, F_k}|`
    pub residual: f64,
    /// Sum of absolute terms entering the three outer brackets.
    pub scale: f64,
}

impl JacobiResidual {
    pub fn relative(&self) -> f64 {
        self.residual / self.scale.max(1.0)
    }
}

/// Cyclic sum of outer brackets; inner gradients are exact, outer gradients
/// are central differences with step `h`.
pub fn jacobi_residual<S: GenericSystem + ?Sized>(
    sys: &S,
    z: &State,
    f: [&TestFunctional; 3],
    h: f64,
) -> Result<JacobiResidual> {
    if !(h > 0.0) {
        return Err(Error::Precondition(format!(
            "finite-difference step must be positive, got {h}"
        )));
    }
    sys.validate_state(z)?;
    let layout = sys.layout();
    let mut sum = 0.0;
    let mut scale = 0.0;
    for (i, j, k) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
        let inner =
            |y: &State| -> Result<f64> { bracket(sys, y, &f[i].gradient(y)?, &f[j].gradient(y)?) };
        let d_inner = fd_gradient_with_step(inner, z, |_| h)?;
        let l_dk = sys.apply_poisson(z, &f[k].gradient(z)?)?;
        sum += layout.pairing(d_inner.flat(), l_dk.flat());
        scale += layout.abs_pairing(d_inner.flat(), l_dk.flat());
    }
    Ok(JacobiResidual {
        residual: sum.abs(),
        scale: scale.max(1.0),
    })
}
