//! Hamiltonian and Poisson mechanics, Lie-Poisson structures, and
//! alternative invariant structures built from a (1,1)-tensor.

use std::fmt;

use num_traits::Zero;
use thiserror::Error;

use crate::geomcalc::{
    components_vanish, exterior_derivative, jacobiator, lie_derivative, linalg, Bivector, Chart, DiffForm, GeomError,
    Tensor11, VectorField,
};
use crate::symexpr::{is_zero, Equality, EvalPoint, Expr, Rational, SampleConfig};
use crate::Verdict;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum HamiltonianError {
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error("2-form is degenerate at {0}")]
    DegenerateOmega(EvalPoint),
    #[error("Poisson tensor and symplectic form are not inverse at {0}")]
    InconsistentStructures(EvalPoint),
    #[error("bad structure constants: {0}")]
    BadStructureConstants(String),
    #[error("bivector {which} is not Poisson (Jacobi fails at {witness})")]
    NotPoisson { which: usize, witness: EvalPoint },
}

/// Coordinates `(q, p)` when `m = 1`, else `(q1..qm, p1..pm)`.
pub fn cotangent_chart(m: usize) -> Chart {
    let names: Vec<String> = if m == 1 {
        vec!["q".into(), "p".into()]
    } else {
        (1..=m).map(|i| format!("q{i}")).chain((1..=m).map(|i| format!("p{i}"))).collect()
    };
    Chart::new("T*Q", &names).expect("generated names are distinct")
}

#[derive(Clone, Debug, PartialEq)]
pub struct CanonicalCotangent {
    pub chart: Chart,
    /// `p_i dq^i`.
    pub theta: DiffForm,
    /// `dq^i ∧ dp_i`, so that `dθ = -ω`.
    pub omega: DiffForm,
    /// `∂_{q^i} ∧ ∂_{p_i}`.
    pub lambda: Bivector,
    /// `p_i ∂_{p_i}`.
    pub delta: VectorField,
}

/// Canonical objects on a chart whose first half are positions and second
/// half momenta.
pub fn canonical_on(chart: &Chart) -> CanonicalCotangent {
    let n = chart.dim();
    let m = n / 2;
    let theta = DiffForm::one_form(chart, (0..n).map(|i| if i < m { chart.coord_expr(m + i) } else { Expr::zero() }).collect());
    let omega = DiffForm::from_terms(chart, 2, (0..m).map(|i| (vec![i, m + i], Expr::one())).collect()).expect("degree 2 fits");
    let lambda = Bivector::from_entries(chart, &(0..m).map(|i| (i, m + i, Expr::one())).collect::<Vec<_>>());
    let delta = VectorField::new(chart, (0..n).map(|i| if i < m { Expr::zero() } else { chart.coord_expr(i) }).collect())
        .expect("dimension matches");
    CanonicalCotangent { chart: chart.clone(), theta, omega, lambda, delta }
}

pub fn canonical_cotangent(m: usize) -> CanonicalCotangent {
    canonical_on(&cotangent_chart(m))
}

#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianSystem {
    chart: Chart,
    h: Expr,
    omega: DiffForm,
    lambda: Bivector,
}

impl HamiltonianSystem {
    /// Canonical `ω` and `Λ` on `cotangent_chart(m)`.
    pub fn canonical(m: usize, h: Expr) -> HamiltonianSystem {
        let c = canonical_cotangent(m);
        HamiltonianSystem { chart: c.chart, h, omega: c.omega, lambda: c.lambda }
    }

    pub fn canonical_on(chart: &Chart, h: Expr) -> HamiltonianSystem {
        let c = canonical_on(chart);
        HamiltonianSystem { chart: c.chart, h, omega: c.omega, lambda: c.lambda }
    }

    /// A system with symplectic form `omega`; the Poisson tensor is its inverse.
    pub fn with_omega(h: Expr, omega: DiffForm, cfg: &SampleConfig) -> Result<HamiltonianSystem, HamiltonianError> {
        let chart = omega.chart().clone();
        let w = omega.matrix()?;
        // Λ W^T = I, and W^T = -W.
        let neg_w: Vec<Vec<Expr>> = w.iter().map(|r| r.iter().map(|x| x.clone().neg()).collect()).collect();
        let inv = linalg::inverse(&neg_w, cfg).map_err(degenerate)?;
        let lambda = Bivector::from_matrix(&chart, inv, cfg)?;
        Ok(HamiltonianSystem { chart, h, omega, lambda })
    }

    /// Both structures supplied; they must be mutually inverse.
    pub fn with_structures(h: Expr, omega: DiffForm, lambda: Bivector, cfg: &SampleConfig) -> Result<HamiltonianSystem, HamiltonianError> {
        omega.chart().ensure_same(lambda.chart())?;
        let t = t_phi(&lambda, &omega)?;
        match t.equal_to(&Tensor11::identity(omega.chart()), cfg) {
            Equality::Equal => {}
            Equality::NotEqual(p) => return Err(HamiltonianError::InconsistentStructures(p)),
            Equality::Undecided => return Err(GeomError::Undecided("structure consistency".into()).into()),
        }
        Ok(HamiltonianSystem { chart: omega.chart().clone(), h, omega, lambda })
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn hamiltonian(&self) -> &Expr {
        &self.h
    }

    pub fn omega(&self) -> &DiffForm {
        &self.omega
    }

    pub fn lambda(&self) -> &Bivector {
        &self.lambda
    }
}

fn degenerate(e: GeomError) -> HamiltonianError {
    match e {
        GeomError::SingularJacobian(p) => HamiltonianError::DegenerateOmega(p),
        e => e.into(),
    }
}

/// Solves `i_X ω = dH`.
pub fn hamiltonian_vf(sys: &HamiltonianSystem, cfg: &SampleConfig) -> Result<VectorField, HamiltonianError> {
    vector_field_of(&sys.omega, &DiffForm::differential(&sys.chart, &sys.h), cfg)
}

/// The field `X` with `i_X ω = α`.
pub fn vector_field_of(omega: &DiffForm, alpha: &DiffForm, cfg: &SampleConfig) -> Result<VectorField, HamiltonianError> {
    let chart = omega.chart();
    let w = omega.matrix()?;
    let n = chart.dim();
    let a: Vec<Vec<Expr>> = (0..n).map(|j| (0..n).map(|i| w[i][j].clone()).collect()).collect();
    let b: Vec<Expr> = (0..n).map(|j| alpha.get(&[j])).collect();
    let x = linalg::solve(&a, &b, cfg).map_err(degenerate)?;
    Ok(VectorField::new(chart, x)?)
}

/// `X_H^i = Λ^{ij} ∂_j H`.
pub fn hamiltonian_vf_poisson(lambda: &Bivector, h: &Expr) -> VectorField {
    lambda.sharp(&DiffForm::differential(lambda.chart(), h)).expect("differential is a 1-form")
}

/// `{f, g} = Λ(df, dg)`.
pub fn poisson_bracket(f: &Expr, g: &Expr, lambda: &Bivector) -> Expr {
    lambda.bracket(f, g)
}

/// Structure constants `c^k_{ij}` of a Lie algebra, `[e_i, e_j] = c^k_{ij} e_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct StructureConstants {
    dim: usize,
    /// `c[k][i][j]`.
    c: Vec<Vec<Vec<Rational>>>,
}

impl StructureConstants {
    pub fn from_fn(dim: usize, f: impl Fn(usize, usize, usize) -> Rational) -> Result<StructureConstants, HamiltonianError> {
        let c = (0..dim).map(|k| (0..dim).map(|i| (0..dim).map(|j| f(k, i, j)).collect()).collect()).collect();
        let sc = StructureConstants { dim, c };
        sc.validate()?;
        Ok(sc)
    }

    /// `so(3)`: `c^k_{ij} = ε_{ijk}`.
    pub fn so3() -> StructureConstants {
        StructureConstants::from_fn(3, |k, i, j| Rational::from_integer(levi_civita(i, j, k).into())).expect("so(3) is a Lie algebra")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, k: usize, i: usize, j: usize) -> &Rational {
        &self.c[k][i][j]
    }

    fn validate(&self) -> Result<(), HamiltonianError> {
        let n = self.dim;
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if self.c[k][i][j] != -self.c[k][j][i].clone() {
                        return Err(HamiltonianError::BadStructureConstants(format!("c^{k}_{{{i}{j}}} is not antisymmetric")));
                    }
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let mut s = Rational::zero();
                        for m in 0..n {
                            s += &self.c[m][i][j] * &self.c[l][m][k]
                                + &self.c[m][j][k] * &self.c[l][m][i]
                                + &self.c[m][k][i] * &self.c[l][m][j];
                        }
                        if !s.is_zero() {
                            return Err(HamiltonianError::BadStructureConstants(format!(
                                "Jacobi identity fails for (i, j, k) = ({i}, {j}, {k}), component {l}"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

pub fn levi_civita(i: usize, j: usize, k: usize) -> i64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1,
        _ => 0,
    }
}

/// `Λ^{ij}(ξ) = c^k_{ij} ξ_k` on the chart `(xi1, …, xin)`.
pub fn lie_poisson(sc: &StructureConstants) -> Bivector {
    let names: Vec<String> = (1..=sc.dim).map(|i| format!("xi{i}")).collect();
    let chart = Chart::new("g*", &names).expect("distinct names");
    let mut entries = Vec::new();
    for i in 0..sc.dim {
        for j in i + 1..sc.dim {
            let c = Expr::add((0..sc.dim).map(|k| Expr::constant(sc.c[k][i][j].clone()) * chart.coord_expr(k)));
            entries.push((i, j, c));
        }
    }
    Bivector::from_entries(&chart, &entries)
}

/// `T^i_j = Λ^{ik} Ω_{jk}`, so that the canonical pair gives the identity.
pub fn t_phi(lambda: &Bivector, omega: &DiffForm) -> Result<Tensor11, HamiltonianError> {
    lambda.chart().ensure_same(omega.chart())?;
    let w = omega.matrix()?;
    let n = lambda.chart().dim();
    Ok(Tensor11::from_fn(lambda.chart(), |i, j| Expr::add((0..n).map(|k| lambda.get(i, k) * &w[j][k]))))
}

/// `(d_T f)_j = ∂_i f T^i_j`.
pub fn d_t(f: &Expr, t: &Tensor11) -> DiffForm {
    t.apply_to_one_form(&DiffForm::differential(t.chart(), f)).expect("differential is a 1-form")
}

/// `ω_f = d d_T f`.
pub fn omega_from_constant(f: &Expr, t: &Tensor11) -> Result<DiffForm, HamiltonianError> {
    Ok(exterior_derivative(&d_t(f, t))?)
}

/// What `invariance_check` differentiates.
#[derive(Clone, Copy, Debug)]
pub enum Invariant<'a> {
    Scalar(&'a Expr),
    Form(&'a DiffForm),
    Tensor(&'a Tensor11),
    Bivector(&'a Bivector),
}

/// `ℒ_Γ T = 0`, or `Γ(f) = 0` for a scalar.
pub fn invariance_check(gamma: &VectorField, target: Invariant<'_>, cfg: &SampleConfig) -> Result<Verdict, HamiltonianError> {
    let (verdict, residual) = match target {
        Invariant::Scalar(f) => {
            let r = gamma.apply(f);
            (is_zero(&r, cfg), r)
        }
        Invariant::Form(w) => {
            let l = lie_derivative(gamma, w)?;
            (l.is_zero(cfg), l.components().values().next().cloned().unwrap_or_else(Expr::zero))
        }
        Invariant::Tensor(t) => {
            let l = lie_derivative(gamma, t)?;
            (l.is_zero(cfg), l.rows().concat().into_iter().find(|e| !e.is_zero()).unwrap_or_else(Expr::zero))
        }
        Invariant::Bivector(b) => {
            let l = lie_derivative(gamma, b)?;
            let entries = l.upper_entries();
            (components_vanish(entries.values(), cfg), entries.values().next().cloned().unwrap_or_else(Expr::zero))
        }
    };
    Ok(Verdict::from(verdict).with_residual(residual))
}

/// `N = ω₂^♯ ω₁^♭`, as the matrix `W₂⁻¹ W₁`; then `ω₂(N X, Y) = ω₁(X, Y)`.
pub fn recursion_operator(omega1: &DiffForm, omega2: &DiffForm, cfg: &SampleConfig) -> Result<Tensor11, HamiltonianError> {
    omega1.chart().ensure_same(omega2.chart())?;
    let w1 = omega1.matrix()?;
    let w2 = omega2.matrix()?;
    if let Some(p) = linalg::vanishing_witness(&linalg::det(&w1), cfg) {
        return Err(HamiltonianError::DegenerateOmega(p));
    }
    let w2_inv = linalg::inverse(&w2, cfg).map_err(degenerate)?;
    Ok(Tensor11::new(omega1.chart(), linalg::matmul(&w2_inv, &w1))?)
}

/// `tr(N^k)` for `k = 1..=k_max`.
pub fn trace_invariants(n: &Tensor11, k_max: usize) -> Vec<Expr> {
    let mut out = Vec::with_capacity(k_max);
    let mut power = n.clone();
    for k in 1..=k_max {
        if k > 1 {
            power = power.compose(n).map(Expr::expand);
        }
        out.push(power.trace());
    }
    out
}

fn jacobi_verdict(b: &Bivector, cfg: &SampleConfig) -> Equality {
    components_vanish(jacobiator(b).values(), cfg)
}

/// Whether `Λ₁ + Λ₂` is again Poisson. Both inputs must be Poisson.
pub fn magri_compatible(l1: &Bivector, l2: &Bivector, cfg: &SampleConfig) -> Result<Verdict, HamiltonianError> {
    l1.chart().ensure_same(l2.chart())?;
    for (which, b) in [(1, l1), (2, l2)] {
        if let Equality::NotEqual(witness) = jacobi_verdict(b, cfg) {
            return Err(HamiltonianError::NotPoisson { which, witness });
        }
    }
    let sum = l1.add(l2);
    let j = jacobiator(&sum);
    let residual = j.values().next().cloned().unwrap_or_else(Expr::zero);
    Ok(Verdict::from(components_vanish(j.values(), cfg)).with_residual(residual))
}

impl fmt::Display for StructureConstants {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for i in 0..self.dim {
            for j in i + 1..self.dim {
                for k in 0..self.dim {
                    let c = &self.c[k][i][j];
                    if !c.is_zero() {
                        if !first {
                            write!(f, ", ")?;
                        }
                        write!(f, "[e{},e{}] ∋ {}·e{}", i + 1, j + 1, c, k + 1)?;
                        first = false;
                    }
                }
            }
        }
        Ok(())
    }
}
