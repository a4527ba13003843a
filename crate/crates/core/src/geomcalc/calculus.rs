//! Lie brackets, Lie derivatives, Nijenhuis torsion and the Jacobiator.

use std::collections::BTreeMap;

use crate::symexpr::{equal_all, Equality, Expr, SampleConfig};

use super::fields::{Bivector, Tensor11, VectorField};
use super::forms::{exterior_derivative, interior_product, DiffForm};
use super::GeomError;

/// `[X, Y]^i = X(Y^i) - Y(X^i)`.
pub fn lie_bracket(x: &VectorField, y: &VectorField) -> Result<VectorField, GeomError> {
    x.chart().ensure_same(y.chart())?;
    let comps = (0..x.chart().dim()).map(|i| x.apply(y.component(i)) - y.apply(x.component(i))).collect();
    Ok(VectorField::from_vec(x.chart(), comps))
}

/// Objects that can be Lie-differentiated along a vector field.
pub trait LieDerivative: Sized {
    fn lie_derivative(&self, x: &VectorField) -> Result<Self, GeomError>;
}

impl LieDerivative for VectorField {
    fn lie_derivative(&self, x: &VectorField) -> Result<Self, GeomError> {
        lie_bracket(x, self)
    }
}

impl LieDerivative for DiffForm {
    /// Cartan: `L_X ω = i_X dω + d i_X ω`. A top-degree form has `dω = 0`.
    fn lie_derivative(&self, x: &VectorField) -> Result<Self, GeomError> {
        x.chart().ensure_same(self.chart())?;
        if self.degree() == 0 {
            return Ok(DiffForm::scalar(self.chart(), x.apply(&self.get(&[]))));
        }
        let d_i = exterior_derivative(&interior_product(x, self)?)?;
        if self.degree() == self.chart().dim() {
            return Ok(d_i);
        }
        let i_d = interior_product(x, &exterior_derivative(self)?)?;
        i_d.add(&d_i)
    }
}

impl LieDerivative for Tensor11 {
    /// `(L_X T)(∂_j) = [X, T ∂_j] - T [X, ∂_j]`.
    fn lie_derivative(&self, x: &VectorField) -> Result<Self, GeomError> {
        let chart = self.chart();
        x.chart().ensure_same(chart)?;
        let n = chart.dim();
        let mut cols = Vec::with_capacity(n);
        for j in 0..n {
            let tj = self.column(j);
            let x_dj = lie_bracket(x, &VectorField::coordinate(chart, j))?;
            cols.push(lie_bracket(x, &tj)?.sub(&self.apply(&x_dj)));
        }
        Ok(Tensor11::from_fn(chart, |i, j| cols[j].component(i).clone()))
    }
}

impl LieDerivative for Bivector {
    /// `(L_X Λ)^{ij} = X(Λ^{ij}) - Λ^{kj} ∂_k X^i - Λ^{ik} ∂_k X^j`.
    fn lie_derivative(&self, x: &VectorField) -> Result<Self, GeomError> {
        let chart = self.chart();
        x.chart().ensure_same(chart)?;
        let n = chart.dim();
        let dx: Vec<Vec<Expr>> =
            (0..n).map(|i| (0..n).map(|k| x.component(i).differentiate(chart.coord(k))).collect()).collect();
        let mut entries = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let c = x.apply(self.get(i, j))
                    - Expr::add((0..n).map(|k| self.get(k, j) * &dx[i][k]))
                    - Expr::add((0..n).map(|k| self.get(i, k) * &dx[j][k]));
                entries.push((i, j, c));
            }
        }
        Ok(Bivector::from_entries(chart, &entries))
    }
}

pub fn lie_derivative<T: LieDerivative>(x: &VectorField, t: &T) -> Result<T, GeomError> {
    t.lie_derivative(x)
}

/// Components keyed by index triples.
pub type Components3 = BTreeMap<(usize, usize, usize), Expr>;

/// Joint zero-test over a component container.
pub fn components_vanish<'a, I: IntoIterator<Item = &'a Expr>>(comps: I, cfg: &SampleConfig) -> Equality {
    let pairs: Vec<_> = comps.into_iter().map(|c| (c.clone(), Expr::zero())).collect();
    equal_all(&pairs, cfg)
}

/// `N^i_{jk}` for `j < k`, from
/// `N_T(X, Y) = [TX, TY] - T[TX, Y] - T[X, TY] + T²[X, Y]` on coordinate fields.
pub fn nijenhuis(t: &Tensor11) -> Result<Components3, GeomError> {
    let chart = t.chart();
    let n = chart.dim();
    let mut comps = BTreeMap::new();
    for j in 0..n {
        for k in j + 1..n {
            let x = VectorField::coordinate(chart, j);
            let y = VectorField::coordinate(chart, k);
            let tx = t.apply(&x);
            let ty = t.apply(&y);
            let val = lie_bracket(&tx, &ty)?
                .sub(&t.apply(&lie_bracket(&tx, &y)?))
                .sub(&t.apply(&lie_bracket(&x, &ty)?));
            // [∂_j, ∂_k] = 0, so the last term drops.
            for (i, c) in val.components().iter().enumerate() {
                if !c.is_zero() {
                    comps.insert((i, j, k), c.clone());
                }
            }
        }
    }
    Ok(comps)
}

/// `J^{ijk} = Λ^{il} ∂_l Λ^{jk} + Λ^{jl} ∂_l Λ^{ki} + Λ^{kl} ∂_l Λ^{ij}`,
/// on `i < j < k`; vanishes exactly when the bracket of `Λ` satisfies Jacobi.
pub fn jacobiator(b: &Bivector) -> Components3 {
    let chart = b.chart();
    let n = chart.dim();
    let term = |a: usize, c: usize, d: usize| -> Expr {
        Expr::add(
            (0..n)
                .filter(|&l| !b.get(a, l).is_zero())
                .map(|l| b.get(a, l) * &b.get(c, d).differentiate(chart.coord(l))),
        )
    };
    let mut comps = BTreeMap::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let c = Expr::add([term(i, j, k), term(j, k, i), term(k, i, j)]);
                if !c.is_zero() {
                    comps.insert((i, j, k), c);
                }
            }
        }
    }
    comps
}
