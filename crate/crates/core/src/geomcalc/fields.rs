//! Vector fields, (1,1)-tensors and bivectors in components.

use std::collections::BTreeMap;
use std::fmt;

use crate::symexpr::{equal_all, Equality, Expr, SampleConfig};

use super::forms::DiffForm;
use super::linalg::ExprMatrix;
use super::{Chart, GeomError};

fn check_len(chart: &Chart, n: usize) -> Result<(), GeomError> {
    if n == chart.dim() {
        Ok(())
    } else {
        Err(GeomError::ComponentCount { expected: chart.dim(), found: n })
    }
}

fn check_square(chart: &Chart, m: &ExprMatrix) -> Result<(), GeomError> {
    check_len(chart, m.len())?;
    m.iter().try_for_each(|r| check_len(chart, r.len()))
}

pub(crate) fn write_terms(f: &mut fmt::Formatter<'_>, terms: Vec<(Expr, String)>) -> fmt::Result {
    let terms: Vec<_> = terms.into_iter().filter(|(c, _)| !c.is_zero()).collect();
    if terms.is_empty() {
        return write!(f, "0");
    }
    for (i, (c, basis)) in terms.iter().enumerate() {
        let negated = c.clone().neg();
        match (i, c.is_one(), negated.is_one()) {
            (0, true, _) => write!(f, "{basis}")?,
            (0, _, true) => write!(f, "-{basis}")?,
            (0, _, _) => write!(f, "({c}) {basis}")?,
            (_, true, _) => write!(f, " + {basis}")?,
            (_, _, true) => write!(f, " - {basis}")?,
            _ => write!(f, " + ({c}) {basis}")?,
        }
    }
    Ok(())
}

/// `X = X^i ∂_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    chart: Chart,
    comps: Vec<Expr>,
}

impl VectorField {
    pub fn new(chart: &Chart, comps: Vec<Expr>) -> Result<VectorField, GeomError> {
        check_len(chart, comps.len())?;
        Ok(VectorField { chart: chart.clone(), comps })
    }

    pub(crate) fn from_vec(chart: &Chart, comps: Vec<Expr>) -> VectorField {
        debug_assert_eq!(chart.dim(), comps.len());
        VectorField { chart: chart.clone(), comps }
    }

    pub fn zero(chart: &Chart) -> VectorField {
        VectorField::from_vec(chart, vec![Expr::zero(); chart.dim()])
    }

    /// The coordinate field `∂_i`.
    pub fn coordinate(chart: &Chart, i: usize) -> VectorField {
        let mut comps = vec![Expr::zero(); chart.dim()];
        comps[i] = Expr::one();
        VectorField::from_vec(chart, comps)
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn components(&self) -> &[Expr] {
        &self.comps
    }

    pub fn component(&self, i: usize) -> &Expr {
        &self.comps[i]
    }

    /// Directional derivative `X(f) = X^i ∂_i f`.
    pub fn apply(&self, f: &Expr) -> Expr {
        Expr::add(
            self.comps
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(i, c)| c * &f.differentiate(self.chart.coord(i))),
        )
    }

    pub fn add(&self, other: &VectorField) -> VectorField {
        VectorField::from_vec(&self.chart, self.comps.iter().zip(&other.comps).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &VectorField) -> VectorField {
        VectorField::from_vec(&self.chart, self.comps.iter().zip(&other.comps).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, s: &Expr) -> VectorField {
        self.map(|c| s * c)
    }

    pub fn map(&self, f: impl Fn(&Expr) -> Expr) -> VectorField {
        VectorField::from_vec(&self.chart, self.comps.iter().map(f).collect())
    }

    pub fn equal_to(&self, other: &VectorField, cfg: &SampleConfig) -> Equality {
        let pairs: Vec<_> = self.comps.iter().cloned().zip(other.comps.iter().cloned()).collect();
        equal_all(&pairs, cfg)
    }

    pub fn is_zero(&self, cfg: &SampleConfig) -> Equality {
        self.equal_to(&VectorField::zero(&self.chart), cfg)
    }
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.comps.iter().enumerate().map(|(i, c)| (c.clone(), format!("∂{}", self.chart.coord(i)))).collect();
        write_terms(f, terms)
    }
}

/// Endomorphism of the tangent bundle, `T = T^i_j ∂_i ⊗ dx^j`.
/// Stored as `rows[i][j] = T^i_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor11 {
    chart: Chart,
    rows: ExprMatrix,
}

impl Tensor11 {
    pub fn new(chart: &Chart, rows: ExprMatrix) -> Result<Tensor11, GeomError> {
        check_square(chart, &rows)?;
        Ok(Tensor11 { chart: chart.clone(), rows })
    }

    pub(crate) fn from_rows(chart: &Chart, rows: ExprMatrix) -> Tensor11 {
        Tensor11 { chart: chart.clone(), rows }
    }

    pub fn from_fn(chart: &Chart, f: impl Fn(usize, usize) -> Expr) -> Tensor11 {
        let n = chart.dim();
        Tensor11::from_rows(chart, (0..n).map(|i| (0..n).map(|j| f(i, j)).collect()).collect())
    }

    pub fn zero(chart: &Chart) -> Tensor11 {
        Tensor11::from_fn(chart, |_, _| Expr::zero())
    }

    pub fn identity(chart: &Chart) -> Tensor11 {
        Tensor11::from_fn(chart, |i, j| if i == j { Expr::one() } else { Expr::zero() })
    }

    /// `Σ c ∂_{up} ⊗ dx^{down}` from `(up, down, c)` triples.
    pub fn from_terms(chart: &Chart, terms: &[(usize, usize, Expr)]) -> Tensor11 {
        let mut t = Tensor11::zero(chart);
        for (i, j, c) in terms {
            t.rows[*i][*j] = &t.rows[*i][*j] + c;
        }
        t
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn rows(&self) -> &ExprMatrix {
        &self.rows
    }

    pub fn get(&self, i: usize, j: usize) -> &Expr {
        &self.rows[i][j]
    }

    /// `(T X)^i = T^i_j X^j`.
    pub fn apply(&self, x: &VectorField) -> VectorField {
        let comps = self
            .rows
            .iter()
            .map(|r| Expr::add(r.iter().zip(x.components()).map(|(t, c)| t * c)))
            .collect();
        VectorField::from_vec(&self.chart, comps)
    }

    /// `T ∂_j`, the j-th column.
    pub fn column(&self, j: usize) -> VectorField {
        VectorField::from_vec(&self.chart, self.rows.iter().map(|r| r[j].clone()).collect())
    }

    /// Transpose action on a 1-form: `(α ∘ T)_j = α_i T^i_j`.
    pub fn apply_to_one_form(&self, alpha: &DiffForm) -> Result<DiffForm, GeomError> {
        if alpha.degree() != 1 {
            return Err(GeomError::DegreeMismatch { expected: 1, found: alpha.degree() });
        }
        let n = self.chart.dim();
        let comps = (0..n).map(|j| Expr::add((0..n).map(|i| alpha.get(&[i]) * self.rows[i][j].clone())));
        Ok(DiffForm::one_form(&self.chart, comps.collect()))
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Tensor11) -> Tensor11 {
        Tensor11::from_rows(&self.chart, super::linalg::matmul(&self.rows, &other.rows))
    }

    pub fn add(&self, other: &Tensor11) -> Tensor11 {
        Tensor11::from_fn(&self.chart, |i, j| &self.rows[i][j] + &other.rows[i][j])
    }

    pub fn sub(&self, other: &Tensor11) -> Tensor11 {
        Tensor11::from_fn(&self.chart, |i, j| &self.rows[i][j] - &other.rows[i][j])
    }

    pub fn scale(&self, s: &Expr) -> Tensor11 {
        Tensor11::from_fn(&self.chart, |i, j| s * &self.rows[i][j])
    }

    pub fn map(&self, f: impl Fn(&Expr) -> Expr) -> Tensor11 {
        Tensor11::from_fn(&self.chart, |i, j| f(&self.rows[i][j]))
    }

    pub fn trace(&self) -> Expr {
        Expr::add((0..self.chart.dim()).map(|i| self.rows[i][i].clone()))
    }

    pub fn equal_to(&self, other: &Tensor11, cfg: &SampleConfig) -> Equality {
        super::linalg::matrices_equal(&self.rows, &other.rows, cfg)
    }

    pub fn is_zero(&self, cfg: &SampleConfig) -> Equality {
        self.equal_to(&Tensor11::zero(&self.chart), cfg)
    }
}

impl fmt::Display for Tensor11 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.chart.dim();
        let terms = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| (self.rows[i][j].clone(), format!("∂{}⊗d{}", self.chart.coord(i), self.chart.coord(j))))
            .collect();
        write_terms(f, terms)
    }
}

/// Antisymmetric contravariant 2-tensor, `Λ = Σ_{i<j} Λ^{ij} ∂_i ∧ ∂_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct Bivector {
    chart: Chart,
    m: ExprMatrix,
}

impl Bivector {
    /// From the full matrix `Λ^{ij}`; antisymmetry is checked by sampling.
    pub fn from_matrix(chart: &Chart, m: ExprMatrix, cfg: &SampleConfig) -> Result<Bivector, GeomError> {
        check_square(chart, &m)?;
        let n = chart.dim();
        let pairs: Vec<_> = (0..n)
            .flat_map(|i| (i..n).map(move |j| (i, j)))
            .map(|(i, j)| (m[i][j].clone(), m[j][i].clone().neg()))
            .collect();
        match equal_all(&pairs, cfg) {
            Equality::Equal => Ok(Bivector { chart: chart.clone(), m }),
            Equality::NotEqual(p) => Err(GeomError::NotAntisymmetric(p)),
            Equality::Undecided => Err(GeomError::Undecided("antisymmetry of bivector".into())),
        }
    }

    /// From upper-triangular entries `(i, j, Λ^{ij})`, any order of `i, j`.
    pub fn from_entries(chart: &Chart, entries: &[(usize, usize, Expr)]) -> Bivector {
        let n = chart.dim();
        let mut m = vec![vec![Expr::zero(); n]; n];
        for (i, j, c) in entries {
            m[*i][*j] = &m[*i][*j] + c;
            m[*j][*i] = &m[*j][*i] - c;
        }
        Bivector { chart: chart.clone(), m }
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn matrix(&self) -> &ExprMatrix {
        &self.m
    }

    pub fn get(&self, i: usize, j: usize) -> &Expr {
        &self.m[i][j]
    }

    /// `X^i = Λ^{ij} α_j`.
    pub fn sharp(&self, alpha: &DiffForm) -> Result<VectorField, GeomError> {
        if alpha.degree() != 1 {
            return Err(GeomError::DegreeMismatch { expected: 1, found: alpha.degree() });
        }
        let n = self.chart.dim();
        let comps = (0..n).map(|i| Expr::add((0..n).map(|j| &self.m[i][j] * &alpha.get(&[j])))).collect();
        Ok(VectorField::from_vec(&self.chart, comps))
    }

    /// `Λ(df, dg) = Λ^{ij} ∂_i f ∂_j g`.
    pub fn bracket(&self, f: &Expr, g: &Expr) -> Expr {
        let n = self.chart.dim();
        let df: Vec<Expr> = (0..n).map(|i| f.differentiate(self.chart.coord(i))).collect();
        let dg: Vec<Expr> = (0..n).map(|j| g.differentiate(self.chart.coord(j))).collect();
        Expr::add((0..n).flat_map(|i| {
            let (df, dg, m) = (&df, &dg, &self.m);
            (0..n).filter(move |&j| !m[i][j].is_zero()).map(move |j| Expr::mul([m[i][j].clone(), df[i].clone(), dg[j].clone()]))
        }))
    }

    pub fn add(&self, other: &Bivector) -> Bivector {
        let n = self.chart.dim();
        Bivector {
            chart: self.chart.clone(),
            m: (0..n).map(|i| (0..n).map(|j| &self.m[i][j] + &other.m[i][j]).collect()).collect(),
        }
    }

    pub fn scale(&self, s: &Expr) -> Bivector {
        Bivector { chart: self.chart.clone(), m: self.m.iter().map(|r| r.iter().map(|x| s * x).collect()).collect() }
    }

    pub fn upper_entries(&self) -> BTreeMap<(usize, usize), Expr> {
        let n = self.chart.dim();
        (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .filter(|&(i, j)| !self.m[i][j].is_zero())
            .map(|(i, j)| ((i, j), self.m[i][j].clone()))
            .collect()
    }
}

impl fmt::Display for Bivector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self
            .upper_entries()
            .into_iter()
            .map(|((i, j), c)| (c, format!("∂{}∧∂{}", self.chart.coord(i), self.chart.coord(j))))
            .collect();
        write_terms(f, terms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qv() -> Chart {
        Chart::new("TQ", &["q", "v"]).unwrap()
    }

    #[test]
    fn tensor_applies_to_fields() {
        let c = qv();
        let s = Tensor11::from_terms(&c, &[(1, 0, Expr::one())]);
        let x = VectorField::new(&c, vec![Expr::sym("v"), Expr::sym("q")]).unwrap();
        assert_eq!(s.apply(&x).components(), &[Expr::zero(), Expr::sym("v")]);
        assert_eq!(s.to_string(), "∂v⊗dq");
        assert!(s.compose(&s).is_zero(&SampleConfig::default()).is_equal());
    }

    #[test]
    fn bivector_requires_antisymmetry() {
        let c = qv();
        let m = vec![vec![Expr::zero(), Expr::one()], vec![Expr::one(), Expr::zero()]];
        assert!(matches!(Bivector::from_matrix(&c, m, &SampleConfig::default()), Err(GeomError::NotAntisymmetric(_))));
        let b = Bivector::from_entries(&c, &[(0, 1, Expr::one())]);
        assert_eq!(b.get(1, 0), &Expr::int(-1));
        let h = Expr::sym("v").powi(2) / Expr::int(2);
        assert_eq!(b.bracket(&Expr::sym("q"), &h), Expr::sym("v"));
    }

    #[test]
    fn component_count_is_checked() {
        assert!(matches!(
            VectorField::new(&qv(), vec![Expr::one()]),
            Err(GeomError::ComponentCount { expected: 2, found: 1 })
        ));
    }
}
