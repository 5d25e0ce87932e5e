//! Composite state vectors: per-field nodal blocks plus an optional scalar
//! reservoir `e`, stored flat with a layout descriptor.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FieldName {
    /// Transverse displacement.
    Phi,
    /// Rotation angle.
    Psi,
    /// Longitudinal displacement of the Bresse arch.
    Chi,
    P,
    Q,
    W,
    Theta,
    Eta,
    /// Heat flux (Cattaneo law).
    S,
}

impl FieldName {
    pub const ALL: [FieldName; 9] = [
        FieldName::Phi,
        FieldName::Psi,
        FieldName::Chi,
        FieldName::P,
        FieldName::Q,
        FieldName::W,
        FieldName::Theta,
        FieldName::Eta,
        FieldName::S,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FieldName::Phi => "phi",
            FieldName::Psi => "psi",
            FieldName::Chi => "chi",
            FieldName::P => "p",
            FieldName::Q => "q",
            FieldName::W => "w",
            FieldName::Theta => "theta",
            FieldName::Eta => "eta",
            FieldName::S => "s",
        }
    }
}

impl fmt::Display for FieldName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FieldName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        FieldName::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| Error::Lookup(format!("field `{s}`")))
    }
}

/// One addressable block of a state: a field or the reservoir scalar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Slot {
    Field(FieldName),
    Reservoir,
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Slot::Field(name) => name.fmt(f),
            Slot::Reservoir => f.write_str("e"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateLayout {
    grid: Grid,
    field_order: Vec<FieldName>,
    has_reservoir: bool,
}

impl StateLayout {
    pub fn new(grid: Grid, field_order: Vec<FieldName>, has_reservoir: bool) -> Result<Self> {
        if field_order.is_empty() {
            return Err(Error::Structural("layout needs at least one field".into()));
        }
        for (i, name) in field_order.iter().enumerate() {
            if field_order[..i].contains(name) {
                return Err(Error::Structural(format!(
                    "field `{name}` appears twice in layout"
                )));
            }
        }
        Ok(StateLayout {
            grid,
            field_order,
            has_reservoir,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn fields(&self) -> &[FieldName] {
        &self.field_order
    }

    pub fn has_reservoir(&self) -> bool {
        self.has_reservoir
    }

    pub fn has_field(&self, name: FieldName) -> bool {
        self.field_order.contains(&name)
    }

    /// Flat dimension `n * |fields| + [reservoir]`.
    pub fn dim(&self) -> usize {
        self.grid.n() * self.field_order.len() + usize::from(self.has_reservoir)
    }

    pub fn field_range(&self, name: FieldName) -> Result<Range<usize>> {
        let n = self.grid.n();
        self.field_order
            .iter()
            .position(|f| *f == name)
            .map(|k| k * n..(k + 1) * n)
            .ok_or_else(|| Error::Lookup(format!("field `{name}` in this layout")))
    }

    pub fn reservoir_index(&self) -> Result<usize> {
        if self.has_reservoir {
            Ok(self.dim() - 1)
        } else {
            Err(Error::Structural(
                "layout has no reservoir variable e".into(),
            ))
        }
    }

    /// Fields in layout order, then the reservoir if present.
    pub fn slots(&self) -> Vec<Slot> {
        let mut slots: Vec<Slot> = self.field_order.iter().map(|f| Slot::Field(*f)).collect();
        if self.has_reservoir {
            slots.push(Slot::Reservoir);
        }
        slots
    }

    pub fn slot_range(&self, slot: Slot) -> Result<Range<usize>> {
        match slot {
            Slot::Field(name) => self.field_range(name),
            Slot::Reservoir => self.reservoir_index().map(|i| i..i + 1),
        }
    }

    /// Slot owning flat index `i`.
    pub fn slot_of(&self, i: usize) -> Slot {
        let n = self.grid.n();
        if i / n < self.field_order.len() {
            Slot::Field(self.field_order[i / n])
        } else {
            Slot::Reservoir
        }
    }

    /// Quadrature weight of flat index `i`: `dx` on field slots, 1 on `e`.
    pub fn weight(&self, i: usize) -> f64 {
        if i < self.grid.n() * self.field_order.len() {
            self.grid.dx()
        } else {
            1.0
        }
    }

    /// Mixed pairing `dx Σ a_i b_i` over fields plus `a_e b_e`.
    pub fn pairing(&self, a: &[f64], b: &[f64]) -> f64 {
        let nf = self.grid.n() * self.field_order.len();
        let fields: f64 = a[..nf].iter().zip(&b[..nf]).map(|(x, y)| x * y).sum();
        let mut total = self.grid.dx() * fields;
        if self.has_reservoir {
            total += a[nf] * b[nf];
        }
        total
    }

    /// Same as [`pairing`](Self::pairing) with absolute values of every term;
    /// the natural magnitude against which roundoff in a pairing is measured.
    pub fn abs_pairing(&self, a: &[f64], b: &[f64]) -> f64 {
        let nf = self.grid.n() * self.field_order.len();
        let fields: f64 = a[..nf]
            .iter()
            .zip(&b[..nf])
            .map(|(x, y)| (x * y).abs())
            .sum();
        let mut total = self.grid.dx() * fields;
        if self.has_reservoir {
            total += (a[nf] * b[nf]).abs();
        }
        total
    }
}

macro_rules! layout_vector {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq)]
        pub struct $name {
            layout: Arc<StateLayout>,
            flat: Vec<f64>,
        }

        impl $name {
            pub fn zeros(layout: &Arc<StateLayout>) -> Self {
                $name {
                    layout: Arc::clone(layout),
                    flat: vec![0.0; layout.dim()],
                }
            }

            pub fn from_flat(layout: &Arc<StateLayout>, flat: Vec<f64>) -> Result<Self> {
                if flat.len() != layout.dim() {
                    return Err(Error::Structural(format!(
                        "flat vector has length {} but the layout needs {}",
                        flat.len(),
                        layout.dim()
                    )));
                }
                Ok($name {
                    layout: Arc::clone(layout),
                    flat,
                })
            }

            pub fn layout(&self) -> &Arc<StateLayout> {
                &self.layout
            }

            pub fn grid(&self) -> &Grid {
                self.layout.grid()
            }

            pub fn flat(&self) -> &[f64] {
                &self.flat
            }

            pub fn flat_mut(&mut self) -> &mut [f64] {
                &mut self.flat
            }

            pub fn into_flat(self) -> Vec<f64> {
                self.flat
            }

            pub fn field(&self, name: FieldName) -> Result<&[f64]> {
                let r = self.layout.field_range(name)?;
                Ok(&self.flat[r])
            }

            pub fn field_mut(&mut self, name: FieldName) -> Result<&mut [f64]> {
                let r = self.layout.field_range(name)?;
                Ok(&mut self.flat[r])
            }

            pub fn get_field(&self, name: FieldName) -> Result<Field> {
                self.field(name).map(Field::from)
            }

            pub fn set_field(&mut self, name: FieldName, values: &[f64]) -> Result<()> {
                let n = self.layout.grid().n();
                if values.len() != n {
                    return Err(Error::Structural(format!(
                        "field `{name}` needs {n} values, got {}",
                        values.len()
                    )));
                }
                self.field_mut(name)?.copy_from_slice(values);
                Ok(())
            }

            pub fn get_reservoir(&self) -> Result<f64> {
                Ok(self.flat[self.layout.reservoir_index()?])
            }

            pub fn set_reservoir(&mut self, value: f64) -> Result<()> {
                let i = self.layout.reservoir_index()?;
                self.flat[i] = value;
                Ok(())
            }

            pub fn slot(&self, slot: Slot) -> Result<&[f64]> {
                let r = self.layout.slot_range(slot)?;
                Ok(&self.flat[r])
            }

            pub fn slot_mut(&mut self, slot: Slot) -> Result<&mut [f64]> {
                let r = self.layout.slot_range(slot)?;
                Ok(&mut self.flat[r])
            }

            pub fn norm_inf(&self) -> f64 {
                self.flat.iter().fold(0.0, |m, x| m.max(x.abs()))
            }

            pub fn is_finite(&self) -> bool {
                self.flat.iter().all(|x| x.is_finite())
            }

            /// `self += a * other`.
            pub fn axpy(&mut self, a: f64, other: &Self) -> Result<()> {
                self.check_same_layout(other.layout())?;
                for (x, y) in self.flat.iter_mut().zip(&other.flat) {
                    *x += a * y;
                }
                Ok(())
            }

            pub fn scale(&mut self, a: f64) {
                self.flat.iter_mut().for_each(|x| *x *= a);
            }

            pub fn check_same_layout(&self, other: &Arc<StateLayout>) -> Result<()> {
                if Arc::ptr_eq(&self.layout, other) || *self.layout == **other {
                    Ok(())
                } else {
                    Err(Error::Structural("vectors live on different layouts".into()))
                }
            }
        }
    };
}

layout_vector!(
    /// A point `z` of the state space (also used for tangent vectors `z_t`).
    State
);

layout_vector!(
    /// Functional derivatives `δF/δz`; paired with states through
    /// [`StateLayout::pairing`].
    CotangentVector
);

impl State {
    /// `⟨ξ, v⟩` with the mixed inner product.
    pub fn pair(&self, xi: &CotangentVector) -> Result<f64> {
        self.check_same_layout(xi.layout())?;
        Ok(self.layout.pairing(xi.flat(), &self.flat))
    }

    /// Reinterprets the same numbers as a covector (used for Riesz-type identifications).
    pub fn into_cotangent(self) -> CotangentVector {
        CotangentVector {
            layout: self.layout,
            flat: self.flat,
        }
    }
}

impl CotangentVector {
    pub fn into_tangent(self) -> State {
        State {
            layout: self.layout,
            flat: self.flat,
        }
    }
}
