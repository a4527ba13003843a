//! Coordinate changes between charts and the induced push/pull maps.

use std::collections::BTreeMap;

use crate::symexpr::{equal_all, Equality, Expr, SampleConfig};

use super::fields::{Tensor11, VectorField};
use super::forms::{wedge, DiffForm};
use super::linalg::{self, ExprMatrix};
use super::{Chart, GeomError};

/// A diffeomorphism `φ: src → dst` with explicit inverse, each given as
/// component expressions in the other chart's coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Diffeo {
    src: Chart,
    dst: Chart,
    forward: Vec<Expr>,
    inverse: Vec<Expr>,
}

fn substitution(chart: &Chart, values: &[Expr]) -> BTreeMap<String, Expr> {
    chart.coords().iter().cloned().zip(values.iter().cloned()).collect()
}

/// Rejects coordinates of `other` that are not also coordinates of `chart`.
/// Symbols foreign to both charts are free parameters.
fn check_symbols(exprs: &[Expr], chart: &Chart, other: &Chart) -> Result<(), GeomError> {
    for e in exprs {
        if let Some(s) = e.symbols().into_iter().find(|s| other.index_of(s).is_some() && chart.index_of(s).is_none()) {
            return Err(GeomError::ForeignSymbol { symbol: s, chart: chart.name().into() });
        }
    }
    Ok(())
}

/// Pulls a form on `target` back along `map`, whose entries give the target
/// coordinates as functions on `src`.
pub fn pullback_along(src: &Chart, map: &[Expr], w: &DiffForm) -> Result<DiffForm, GeomError> {
    let target = w.chart();
    if map.len() != target.dim() {
        return Err(GeomError::ComponentCount { expected: target.dim(), found: map.len() });
    }
    let subs = substitution(target, map);
    let dmap: Vec<DiffForm> = map.iter().map(|m| DiffForm::differential(src, m)).collect();
    let mut out = DiffForm::zero(src, w.degree());
    if w.degree() > src.dim() {
        return Ok(out);
    }
    for (idx, c) in w.components() {
        let mut term = DiffForm::scalar(src, c.substitute(&subs));
        for &i in idx {
            term = wedge(&term, &dmap[i])?;
        }
        out = out.add(&term)?;
    }
    Ok(out)
}

impl Diffeo {
    /// Builds and verifies `φ`: component counts, symbol scopes, that the
    /// inverse undoes the forward map at sample points and that the
    /// Jacobian determinant is not identically zero.
    pub fn new(src: &Chart, dst: &Chart, forward: Vec<Expr>, inverse: Vec<Expr>, cfg: &SampleConfig) -> Result<Diffeo, GeomError> {
        let d = Diffeo::new_unchecked(src, dst, forward, inverse)?;
        check_symbols(&d.forward, src, dst)?;
        check_symbols(&d.inverse, dst, src)?;
        let fwd = d.dst_substitution();
        let round_trip: Vec<(Expr, Expr)> =
            d.inverse.iter().enumerate().map(|(i, e)| (e.substitute(&fwd), src.coord_expr(i))).collect();
        match equal_all(&round_trip, cfg) {
            Equality::Equal => {}
            Equality::NotEqual(p) => return Err(GeomError::NotInverse(p)),
            Equality::Undecided => return Err(GeomError::Undecided("inverse round trip".into())),
        }
        let det = linalg::det(&d.jacobian());
        if let Some(w) = linalg::vanishing_witness(&det, cfg) {
            return Err(GeomError::SingularJacobian(w));
        }
        Ok(d)
    }

    /// Same as [`Diffeo::new`] without the sampling checks.
    pub fn new_unchecked(src: &Chart, dst: &Chart, forward: Vec<Expr>, inverse: Vec<Expr>) -> Result<Diffeo, GeomError> {
        if src.dim() != dst.dim() {
            return Err(GeomError::ComponentCount { expected: src.dim(), found: dst.dim() });
        }
        if forward.len() != dst.dim() {
            return Err(GeomError::ComponentCount { expected: dst.dim(), found: forward.len() });
        }
        if inverse.len() != src.dim() {
            return Err(GeomError::ComponentCount { expected: src.dim(), found: inverse.len() });
        }
        Ok(Diffeo { src: src.clone(), dst: dst.clone(), forward, inverse })
    }

    pub fn identity(chart: &Chart) -> Diffeo {
        let xs: Vec<Expr> = (0..chart.dim()).map(|i| chart.coord_expr(i)).collect();
        Diffeo { src: chart.clone(), dst: chart.clone(), forward: xs.clone(), inverse: xs }
    }

    pub fn src(&self) -> &Chart {
        &self.src
    }

    pub fn dst(&self) -> &Chart {
        &self.dst
    }

    pub fn forward(&self) -> &[Expr] {
        &self.forward
    }

    pub fn inverse_map(&self) -> &[Expr] {
        &self.inverse
    }

    pub fn inverse(&self) -> Diffeo {
        Diffeo { src: self.dst.clone(), dst: self.src.clone(), forward: self.inverse.clone(), inverse: self.forward.clone() }
    }

    /// `self ∘ first`.
    pub fn after(&self, first: &Diffeo) -> Result<Diffeo, GeomError> {
        first.dst.ensure_same(&self.src)?;
        let fwd_subs = first.dst_substitution();
        let inv_subs = self.src_substitution();
        Ok(Diffeo {
            src: first.src.clone(),
            dst: self.dst.clone(),
            forward: self.forward.iter().map(|e| e.substitute(&fwd_subs)).collect(),
            inverse: first.inverse.iter().map(|e| e.substitute(&inv_subs)).collect(),
        })
    }

    /// Destination coordinates written in source coordinates.
    pub fn dst_substitution(&self) -> BTreeMap<String, Expr> {
        substitution(&self.dst, &self.forward)
    }

    /// Source coordinates written in destination coordinates.
    pub fn src_substitution(&self) -> BTreeMap<String, Expr> {
        substitution(&self.src, &self.inverse)
    }

    /// `J[a][i] = ∂φ^a / ∂x^i`, in source coordinates.
    pub fn jacobian(&self) -> ExprMatrix {
        self.forward.iter().map(|f| self.src.coords().iter().map(|x| f.differentiate(x)).collect()).collect()
    }

    /// `f ∘ φ` for a scalar on the destination.
    pub fn pullback_scalar(&self, f: &Expr) -> Expr {
        f.substitute(&self.dst_substitution())
    }

    /// `f ∘ φ⁻¹` for a scalar on the source.
    pub fn pushforward_scalar(&self, f: &Expr) -> Expr {
        f.substitute(&self.src_substitution())
    }

    /// `(φ_* X)^a = (∂_i φ^a X^i) ∘ φ⁻¹`.
    pub fn pushforward(&self, x: &VectorField) -> Result<VectorField, GeomError> {
        x.chart().ensure_same(&self.src)?;
        let back = self.src_substitution();
        let comps = self.forward.iter().map(|f| x.apply(f).substitute(&back)).collect();
        VectorField::new(&self.dst, comps)
    }

    /// `φ^* X = (φ⁻¹)_* X` for a field on the destination.
    pub fn pullback_field(&self, x: &VectorField) -> Result<VectorField, GeomError> {
        self.inverse().pushforward(x)
    }

    pub fn pullback_form(&self, w: &DiffForm) -> Result<DiffForm, GeomError> {
        w.chart().ensure_same(&self.dst)?;
        pullback_along(&self.src, &self.forward, w)
    }

    pub fn pushforward_form(&self, w: &DiffForm) -> Result<DiffForm, GeomError> {
        self.inverse().pullback_form(w)
    }

    /// `φ^* T = (Dφ)⁻¹ (T ∘ φ) Dφ`.
    pub fn pullback_tensor(&self, t: &Tensor11, cfg: &SampleConfig) -> Result<Tensor11, GeomError> {
        t.chart().ensure_same(&self.dst)?;
        let j = self.jacobian();
        let j_inv = linalg::inverse(&j, cfg)?;
        let subs = self.dst_substitution();
        let t_phi: ExprMatrix = t.rows().iter().map(|r| r.iter().map(|e| e.substitute(&subs)).collect()).collect();
        let rows = linalg::matmul(&linalg::matmul(&j_inv, &t_phi), &j);
        Tensor11::new(&self.src, rows)
    }

    pub fn pushforward_tensor(&self, t: &Tensor11, cfg: &SampleConfig) -> Result<Tensor11, GeomError> {
        self.inverse().pullback_tensor(t, cfg)
    }
}
