//! Differential forms stored by strictly increasing index tuples.

use std::collections::BTreeMap;
use std::fmt;

use crate::symexpr::{equal_all, Equality, Expr, SampleConfig};

use super::fields::{write_terms, VectorField};
use super::linalg::ExprMatrix;
use super::{Chart, GeomError};

/// `ω = Σ_{I increasing} ω_I dx^I`. Zero components are not stored.
#[derive(Clone, Debug, PartialEq)]
pub struct DiffForm {
    chart: Chart,
    degree: usize,
    comps: BTreeMap<Vec<usize>, Expr>,
}

/// Sorts `idx` in place; returns the permutation sign, or `None` on a repeat.
fn sort_sign(idx: &mut [usize]) -> Option<i64> {
    let mut sign = 1;
    for i in 1..idx.len() {
        let mut j = i;
        while j > 0 && idx[j - 1] > idx[j] {
            idx.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if idx.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some(sign)
    }
}

impl DiffForm {
    pub fn zero(chart: &Chart, degree: usize) -> DiffForm {
        DiffForm { chart: chart.clone(), degree, comps: BTreeMap::new() }
    }

    pub fn scalar(chart: &Chart, f: Expr) -> DiffForm {
        let mut w = DiffForm::zero(chart, 0);
        w.accumulate(vec![], f);
        w
    }

    /// `Σ c dx^{i1}∧…∧dx^{ik}` from arbitrary (possibly unsorted) index
    /// tuples. Tuples with repeats vanish.
    pub fn from_terms(chart: &Chart, degree: usize, terms: Vec<(Vec<usize>, Expr)>) -> Result<DiffForm, GeomError> {
        let mut w = DiffForm::zero(chart, degree);
        if degree > chart.dim() {
            return Err(GeomError::DegreeOverflow { degree, dim: chart.dim() });
        }
        for (idx, c) in terms {
            if idx.len() != degree {
                return Err(GeomError::DegreeMismatch { expected: degree, found: idx.len() });
            }
            if let Some(&bad) = idx.iter().find(|&&i| i >= chart.dim()) {
                return Err(GeomError::IndexOutOfRange(bad));
            }
            w.accumulate(idx, c);
        }
        Ok(w)
    }

    pub fn one_form(chart: &Chart, comps: Vec<Expr>) -> DiffForm {
        let mut w = DiffForm::zero(chart, 1);
        for (i, c) in comps.into_iter().enumerate() {
            w.accumulate(vec![i], c);
        }
        w
    }

    /// `dx^i`.
    pub fn coordinate_differential(chart: &Chart, i: usize) -> DiffForm {
        let mut w = DiffForm::zero(chart, 1);
        w.accumulate(vec![i], Expr::one());
        w
    }

    /// `df` for a scalar on the chart.
    pub fn differential(chart: &Chart, f: &Expr) -> DiffForm {
        DiffForm::one_form(chart, chart.coords().iter().map(|x| f.differentiate(x)).collect())
    }

    /// Full antisymmetric matrix of a 2-form: `W[i][j] = ω(∂_i, ∂_j)`.
    pub fn from_matrix(chart: &Chart, w: &ExprMatrix) -> DiffForm {
        let n = chart.dim();
        let mut out = DiffForm::zero(chart, 2);
        for i in 0..n {
            for j in i + 1..n {
                out.accumulate(vec![i, j], w[i][j].clone());
            }
        }
        out
    }

    fn accumulate(&mut self, mut idx: Vec<usize>, c: Expr) {
        if c.is_zero() {
            return;
        }
        let Some(sign) = sort_sign(&mut idx) else { return };
        let c = if sign < 0 { c.neg() } else { c };
        let sum = match self.comps.remove(&idx) {
            Some(old) => old + c,
            None => c,
        };
        if !sum.is_zero() {
            self.comps.insert(idx, sum);
        }
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn components(&self) -> &BTreeMap<Vec<usize>, Expr> {
        &self.comps
    }

    /// Component on an arbitrary index tuple, antisymmetry applied.
    pub fn get(&self, idx: &[usize]) -> Expr {
        let mut sorted = idx.to_vec();
        match sort_sign(&mut sorted) {
            None => Expr::zero(),
            Some(s) => {
                let c = self.comps.get(&sorted).cloned().unwrap_or_else(Expr::zero);
                if s < 0 {
                    c.neg()
                } else {
                    c
                }
            }
        }
    }

    /// The scalar value of a 0-form.
    pub fn as_scalar(&self) -> Option<Expr> {
        (self.degree == 0).then(|| self.get(&[]))
    }

    /// `W[i][j] = ω_{ij}` for a 2-form.
    pub fn matrix(&self) -> Result<ExprMatrix, GeomError> {
        if self.degree != 2 {
            return Err(GeomError::DegreeMismatch { expected: 2, found: self.degree });
        }
        let n = self.chart.dim();
        Ok((0..n).map(|i| (0..n).map(|j| self.get(&[i, j])).collect()).collect())
    }

    pub fn add(&self, other: &DiffForm) -> Result<DiffForm, GeomError> {
        self.chart.ensure_same(&other.chart)?;
        if self.degree != other.degree {
            return Err(GeomError::DegreeMismatch { expected: self.degree, found: other.degree });
        }
        let mut out = self.clone();
        for (idx, c) in &other.comps {
            out.accumulate(idx.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &DiffForm) -> Result<DiffForm, GeomError> {
        self.add(&other.scale(&Expr::int(-1)))
    }

    pub fn scale(&self, s: &Expr) -> DiffForm {
        self.map(|c| s * c)
    }

    pub fn map(&self, f: impl Fn(&Expr) -> Expr) -> DiffForm {
        let mut out = DiffForm::zero(&self.chart, self.degree);
        for (idx, c) in &self.comps {
            out.accumulate(idx.clone(), f(c));
        }
        out
    }

    /// Re-labels a form onto another chart of the same dimension.
    pub fn with_chart(&self, chart: &Chart) -> DiffForm {
        DiffForm { chart: chart.clone(), degree: self.degree, comps: self.comps.clone() }
    }

    pub fn equal_to(&self, other: &DiffForm, cfg: &SampleConfig) -> Equality {
        if self.degree != other.degree || self.chart.dim() != other.chart.dim() {
            return Equality::NotEqual(Default::default());
        }
        let keys: std::collections::BTreeSet<&Vec<usize>> = self.comps.keys().chain(other.comps.keys()).collect();
        let pairs: Vec<_> = keys.into_iter().map(|k| (self.get(k), other.get(k))).collect();
        equal_all(&pairs, cfg)
    }

    pub fn is_zero(&self, cfg: &SampleConfig) -> Equality {
        self.equal_to(&DiffForm::zero(&self.chart, self.degree), cfg)
    }

    /// Evaluates the form on `k` vector fields.
    pub fn evaluate(&self, fields: &[&VectorField]) -> Result<Expr, GeomError> {
        if fields.len() != self.degree {
            return Err(GeomError::DegreeMismatch { expected: self.degree, found: fields.len() });
        }
        let mut w = self.clone();
        for x in fields {
            if w.degree == 0 {
                break;
            }
            w = interior_product(x, &w)?;
        }
        Ok(w.get(&[]))
    }
}

impl fmt::Display for DiffForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.degree == 0 {
            return write!(f, "{}", self.get(&[]));
        }
        let terms = self
            .comps
            .iter()
            .map(|(idx, c)| (c.clone(), idx.iter().map(|&i| format!("d{}", self.chart.coord(i))).collect::<Vec<_>>().join("∧")))
            .collect();
        write_terms(f, terms)
    }
}

/// `dω`. Fails when the result would exceed the chart dimension.
pub fn exterior_derivative(w: &DiffForm) -> Result<DiffForm, GeomError> {
    let n = w.chart.dim();
    if w.degree + 1 > n {
        return Err(GeomError::DegreeOverflow { degree: w.degree + 1, dim: n });
    }
    let mut out = DiffForm::zero(&w.chart, w.degree + 1);
    for (idx, c) in &w.comps {
        for k in 0..n {
            let dc = c.differentiate(w.chart.coord(k));
            let mut full = Vec::with_capacity(idx.len() + 1);
            full.push(k);
            full.extend_from_slice(idx);
            out.accumulate(full, dc);
        }
    }
    Ok(out)
}

pub fn wedge(a: &DiffForm, b: &DiffForm) -> Result<DiffForm, GeomError> {
    a.chart.ensure_same(&b.chart)?;
    let degree = a.degree + b.degree;
    if degree > a.chart.dim() {
        return Err(GeomError::DegreeOverflow { degree, dim: a.chart.dim() });
    }
    let mut out = DiffForm::zero(&a.chart, degree);
    for (i, x) in &a.comps {
        for (j, y) in &b.comps {
            let idx: Vec<usize> = i.iter().chain(j).copied().collect();
            out.accumulate(idx, x * y);
        }
    }
    Ok(out)
}

/// `i_X ω`, with `(i_X ω)(Y, …) = ω(X, Y, …)`.
pub fn interior_product(x: &VectorField, w: &DiffForm) -> Result<DiffForm, GeomError> {
    x.chart().ensure_same(&w.chart)?;
    if w.degree == 0 {
        return Err(GeomError::ZeroDegree);
    }
    let mut out = DiffForm::zero(&w.chart, w.degree - 1);
    for (idx, c) in &w.comps {
        for r in 0..idx.len() {
            let xr = x.component(idx[r]);
            if xr.is_zero() {
                continue;
            }
            let mut rest = idx.clone();
            rest.remove(r);
            let term = xr * c;
            out.accumulate(rest, if r % 2 == 0 { term } else { term.neg() });
        }
    }
    Ok(out)
}
