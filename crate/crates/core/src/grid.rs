//! Uniform periodic 1D mesh and its discrete calculus.
//!
//! All operators are built so that the discrete inner product
//! `inner(u, v) = dx * sum(u[i] * v[i])` reproduces integration by parts
//! with no boundary terms:
//!
//! * `d1` (centered) is skew-adjoint,
//! * `d2` (compact three-point) is self-adjoint,
//! * `dplus` and `dminus` are negative adjoints of each other and
//!   `d2 = dminus ∘ dplus`.

use std::ops::{Deref, DerefMut};

use crate::error::{Error, Result};

/// Smallest mesh accepted; below this the centered stencil aliases.
pub const MIN_NODES: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    n: usize,
    length: f64,
    dx: f64,
}

/// Nodal values of one scalar function on a [`Grid`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Field(Vec<f64>);

impl Field {
    pub fn new(values: Vec<f64>) -> Self {
        Field(values)
    }

    pub fn constant(n: usize, value: f64) -> Self {
        Field(vec![value; n])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl From<Vec<f64>> for Field {
    fn from(values: Vec<f64>) -> Self {
        Field(values)
    }
}

impl From<&[f64]> for Field {
    fn from(values: &[f64]) -> Self {
        Field(values.to_vec())
    }
}

impl Deref for Field {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for Field {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl Grid {
    pub fn new(n: usize, length: f64) -> Result<Self> {
        if n < MIN_NODES {
            return Err(Error::Structural(format!(
                "grid needs at least {MIN_NODES} nodes, got {n}"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::Structural(format!(
                "grid length must be positive and finite, got {length}"
            )));
        }
        Ok(Grid {
            n,
            length,
            dx: length / n as f64,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Coordinate of node `i`.
    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.dx
    }

    pub fn coordinates(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    pub fn zeros(&self) -> Field {
        Field::constant(self.n, 0.0)
    }

    /// Samples `f(x)` at every node.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Field {
        Field((0..self.n).map(|i| f(self.x(i))).collect())
    }

    fn check(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.n {
            return Err(Error::Structural(format!(
                "field has {} values but the grid has {} nodes",
                u.len(),
                self.n
            )));
        }
        Ok(())
    }

    /// Centered first derivative `(u[i+1] - u[i-1]) / (2 dx)`.
    pub fn d1(&self, u: &[f64]) -> Result<Field> {
        self.check(u)?;
        let mut out = vec![0.0; self.n];
        self.d1_into(u, &mut out);
        Ok(Field(out))
    }

    /// Three-point second derivative `(u[i+1] - 2u[i] + u[i-1]) / dx²`.
    pub fn d2(&self, u: &[f64]) -> Result<Field> {
        self.check(u)?;
        let mut out = vec![0.0; self.n];
        self.d2_into(u, &mut out);
        Ok(Field(out))
    }

    /// Forward difference `(u[i+1] - u[i]) / dx`, living at the midpoint `i + 1/2`.
    pub fn dplus(&self, u: &[f64]) -> Result<Field> {
        self.check(u)?;
        let mut out = vec![0.0; self.n];
        self.dplus_into(u, &mut out);
        Ok(Field(out))
    }

    /// Backward difference `(u[i] - u[i-1]) / dx`.
    pub fn dminus(&self, u: &[f64]) -> Result<Field> {
        self.check(u)?;
        let mut out = vec![0.0; self.n];
        self.dminus_into(u, &mut out);
        Ok(Field(out))
    }

    /// Rectangle-rule inner product `dx * Σ u[i] v[i]`.
    pub fn inner(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        self.check(u)?;
        self.check(v)?;
        Ok(self.inner_unchecked(u, v))
    }

    /// Rectangle-rule integral `dx * Σ u[i]`.
    pub fn integrate(&self, u: &[f64]) -> Result<f64> {
        self.check(u)?;
        Ok(self.dx * u.iter().sum::<f64>())
    }

    // Unchecked kernels used on hot paths once shapes have been validated
    // by the state layout.

    pub(crate) fn d1_into(&self, u: &[f64], out: &mut [f64]) {
        let n = self.n;
        let scale = 0.5 / self.dx;
        debug_assert!(u.len() == n && out.len() == n);
        out[0] = (u[1] - u[n - 1]) * scale;
        for i in 1..n - 1 {
            out[i] = (u[i + 1] - u[i - 1]) * scale;
        }
        out[n - 1] = (u[0] - u[n - 2]) * scale;
    }

    pub(crate) fn d2_into(&self, u: &[f64], out: &mut [f64]) {
        let n = self.n;
        let scale = 1.0 / (self.dx * self.dx);
        debug_assert!(u.len() == n && out.len() == n);
        out[0] = (u[1] - 2.0 * u[0] + u[n - 1]) * scale;
        for i in 1..n - 1 {
            out[i] = (u[i + 1] - 2.0 * u[i] + u[i - 1]) * scale;
        }
        out[n - 1] = (u[0] - 2.0 * u[n - 1] + u[n - 2]) * scale;
    }

    pub(crate) fn dplus_into(&self, u: &[f64], out: &mut [f64]) {
        let n = self.n;
        let scale = 1.0 / self.dx;
        for i in 0..n - 1 {
            out[i] = (u[i + 1] - u[i]) * scale;
        }
        out[n - 1] = (u[0] - u[n - 1]) * scale;
    }

    pub(crate) fn dminus_into(&self, u: &[f64], out: &mut [f64]) {
        let n = self.n;
        let scale = 1.0 / self.dx;
        out[0] = (u[0] - u[n - 1]) * scale;
        for i in 1..n {
            out[i] = (u[i] - u[i - 1]) * scale;
        }
    }

    pub(crate) fn inner_unchecked(&self, u: &[f64], v: &[f64]) -> f64 {
        self.dx * u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn rejects_tiny_or_degenerate_grids() {
        assert!(Grid::new(3, 1.0).is_err());
        assert!(Grid::new(8, 0.0).is_err());
        assert!(Grid::new(8, f64::NAN).is_err());
        let g = Grid::new(4, 1.0).unwrap();
        assert_eq!(g.dx(), 0.25);
    }

    #[test]
    fn derivatives_of_constants_vanish() {
        let g = Grid::new(4, 3.7).unwrap();
        let c = [2.5; 4];
        assert_eq!(g.d1(&c).unwrap().values(), &[0.0; 4]);
        assert_eq!(g.d2(&c).unwrap().values(), &[0.0; 4]);
        assert_eq!(g.dplus(&c).unwrap().values(), &[0.0; 4]);
    }

    #[test]
    fn hand_stencils_on_four_nodes() {
        let g = Grid::new(4, 1.0).unwrap();
        let u = [0.0, 1.0, 0.0, -1.0];
        // (u[i+1] - u[i-1]) / 0.5 at each node
        assert_eq!(g.d1(&u).unwrap().values(), &[4.0, 0.0, -4.0, 0.0]);
        // (u[i+1] - 2u[i] + u[i-1]) / 0.0625
        assert_eq!(g.d2(&u).unwrap().values(), &[0.0, -32.0, 0.0, 32.0]);
    }

    #[test]
    fn inner_product_values() {
        let g = Grid::new(4, 1.0).unwrap();
        assert_eq!(g.inner(&[1.0; 4], &[2.0; 4]).unwrap(), 2.0);
        assert_eq!(g.inner(&[0.0; 4], &[5.0, 1.0, 2.0, 3.0]).unwrap(), 0.0);
        let g8 = Grid::new(8, 2.0).unwrap();
        let u = [1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0];
        assert_eq!(g8.inner(&u, &u).unwrap(), 1.0);
    }

    #[test]
    fn size_mismatch_is_structural() {
        let g = Grid::new(4, 1.0).unwrap();
        assert!(matches!(g.d1(&[1.0; 5]), Err(Error::Structural(_))));
        assert!(matches!(g.d2(&[1.0; 3]), Err(Error::Structural(_))));
        assert!(matches!(
            g.inner(&[1.0; 4], &[1.0; 3]),
            Err(Error::Structural(_))
        ));
    }

    #[test]
    fn compact_laplacian_factors_through_one_sided_differences() {
        let g = Grid::new(9, 1.3).unwrap();
        let u: Vec<f64> = (0..9).map(|i| ((i * i) as f64 * 0.37).sin()).collect();
        let composed = g.dminus(&g.dplus(&u).unwrap()).unwrap();
        assert!(close(&composed, &g.d2(&u).unwrap(), 1e-12));
    }

    fn field_pair() -> impl Strategy<Value = (usize, f64, Vec<f64>, Vec<f64>)> {
        (4usize..40, 0.1f64..10.0).prop_flat_map(|(n, len)| {
            (
                Just(n),
                Just(len),
                proptest::collection::vec(-10.0f64..10.0, n),
                proptest::collection::vec(-10.0f64..10.0, n),
            )
        })
    }

    proptest! {
        #[test]
        fn d1_is_skew_adjoint((n, len, u, v) in field_pair()) {
            let g = Grid::new(n, len).unwrap();
            let lhs = g.inner(&u, &g.d1(&v).unwrap()).unwrap();
            let rhs = -g.inner(&g.d1(&u).unwrap(), &v).unwrap();
            let scale = 1.0 + g.inner(&u.iter().map(|x| x.abs()).collect::<Vec<_>>(),
                &v.iter().map(|x| x.abs()).collect::<Vec<_>>()).unwrap() / g.dx();
            prop_assert!((lhs - rhs).abs() <= 1e-13 * scale);
        }

        #[test]
        fn d2_is_self_adjoint((n, len, u, v) in field_pair()) {
            let g = Grid::new(n, len).unwrap();
            let lhs = g.inner(&u, &g.d2(&v).unwrap()).unwrap();
            let rhs = g.inner(&g.d2(&u).unwrap(), &v).unwrap();
            let scale = 1.0 + 4.0 * u.iter().chain(&v).fold(0.0f64, |m, x| m.max(x.abs())).powi(2)
                * g.length() / (g.dx() * g.dx());
            prop_assert!((lhs - rhs).abs() <= 1e-13 * scale);
        }

        #[test]
        fn dplus_and_dminus_are_negative_adjoints((n, len, u, v) in field_pair()) {
            let g = Grid::new(n, len).unwrap();
            let lhs = g.inner(&g.dplus(&u).unwrap(), &v).unwrap();
            let rhs = -g.inner(&u, &g.dminus(&v).unwrap()).unwrap();
            let scale = 1.0 + 200.0 * g.length() / g.dx();
            prop_assert!((lhs - rhs).abs() <= 1e-13 * scale);
        }

        #[test]
        fn inner_is_positive_on_nonzero((n, len, u, _v) in field_pair()) {
            let g = Grid::new(n, len).unwrap();
            let norm = g.inner(&u, &u).unwrap();
            if u.iter().any(|x| *x != 0.0) {
                prop_assert!(norm > 0.0);
            }
        }
    }
}
