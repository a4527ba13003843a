//! Euler-Lagrange equations as submanifolds of `TT*Q`.
//!
//! Coordinates are fixed as `(q, p, vq, vp)` on `TT*Q` and `(q, v, pq, pv)`
//! on `T*TQ`; with several degrees of freedom each block is numbered
//! (`q1..qm, p1..pm, vq1..vqm, vp1..vpm`).

use thiserror::Error;

use crate::geomcalc::{linalg, pullback_along, Chart, Diffeo, DiffForm, GeomError};
use crate::hamiltonian::{cotangent_chart, hamiltonian_vf_poisson, canonical_cotangent};
use crate::lagrangian::{regularity, LagrangianSystem, RegularityReport};
use crate::symexpr::{EvalPoint, Expr, SampleConfig};
use crate::tangentstruct::{canonical_structure, tangent_chart};
use crate::Verdict;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum TulczyjewError {
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error("embedding Jacobian is rank deficient at {0}")]
    RankDeficientEmbedding(EvalPoint),
    #[error("could not evaluate the embedding Jacobian")]
    Unevaluable,
}

fn block_chart(name: &str, m: usize, prefixes: [&str; 4]) -> Chart {
    let names: Vec<String> = prefixes
        .iter()
        .flat_map(|p| (1..=m).map(move |i| if m == 1 { p.to_string() } else { format!("{p}{i}") }))
        .collect();
    Chart::new(name, &names).expect("generated names are distinct")
}

pub fn tt_star_chart(m: usize) -> Chart {
    block_chart("TT*Q", m, ["q", "p", "vq", "vp"])
}

pub fn t_star_t_chart(m: usize) -> Chart {
    block_chart("T*TQ", m, ["q", "v", "pq", "pv"])
}

fn blocks_form(chart: &Chart, m: usize, pairs: &[(usize, usize)]) -> DiffForm {
    let terms = pairs.iter().flat_map(|&(a, b)| (0..m).map(move |i| (vec![a * m + i, b * m + i], Expr::one()))).collect();
    DiffForm::from_terms(chart, 2, terms).expect("degree 2 fits")
}

/// `dq∧dpq + dv∧dpv` on `T*TQ`.
pub fn t_star_t_form(m: usize) -> DiffForm {
    blocks_form(&t_star_t_chart(m), m, &[(0, 2), (1, 3)])
}

/// `dq∧dvp + dvq∧dp` on `TT*Q`.
pub fn tt_star_form(m: usize) -> DiffForm {
    blocks_form(&tt_star_chart(m), m, &[(0, 3), (2, 1)])
}

/// `(q, p, vq, vp) ↦ (q, vq, vp, p)`.
pub fn tau(m: usize) -> Diffeo {
    let src = tt_star_chart(m);
    let dst = t_star_t_chart(m);
    let block = |c: &Chart, b: usize| -> Vec<Expr> { (0..m).map(|i| c.coord_expr(b * m + i)).collect() };
    let forward = [block(&src, 0), block(&src, 2), block(&src, 3), block(&src, 1)].concat();
    let inverse = [block(&dst, 0), block(&dst, 3), block(&dst, 1), block(&dst, 2)].concat();
    Diffeo::new_unchecked(&src, &dst, forward, inverse).expect("dimensions agree")
}

/// A submanifold given as the image of `embedding: params → ambient`.
#[derive(Clone, Debug, PartialEq)]
pub struct ImplicitEquation {
    pub ambient: Chart,
    pub params: Chart,
    pub embedding: Vec<Expr>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RankReport {
    pub expected: usize,
    pub min: usize,
    pub max: usize,
    pub at_min: EvalPoint,
}

impl RankReport {
    pub fn is_full(&self) -> bool {
        self.min == self.expected
    }
}

impl ImplicitEquation {
    pub fn new(ambient: &Chart, params: &Chart, embedding: Vec<Expr>) -> Result<ImplicitEquation, GeomError> {
        if embedding.len() != ambient.dim() {
            return Err(GeomError::ComponentCount { expected: ambient.dim(), found: embedding.len() });
        }
        for e in &embedding {
            if let Some(s) = e.symbols().into_iter().find(|s| ambient.index_of(s).is_some() && params.index_of(s).is_none()) {
                return Err(GeomError::ForeignSymbol { symbol: s, chart: params.name().into() });
            }
        }
        Ok(ImplicitEquation { ambient: ambient.clone(), params: params.clone(), embedding })
    }

    fn jacobian_rows(&self, rows: impl Iterator<Item = usize>) -> linalg::ExprMatrix {
        rows.map(|a| self.params.coords().iter().map(|x| self.embedding[a].differentiate(x)).collect()).collect()
    }

    fn rank_of(&self, rows: impl Iterator<Item = usize>, cfg: &SampleConfig) -> Result<RankReport, TulczyjewError> {
        let j = self.jacobian_rows(rows);
        let (min, max, at_min) = linalg::rank_range(&j, cfg).ok_or(TulczyjewError::Unevaluable)?;
        Ok(RankReport { expected: self.params.dim(), min, max, at_min })
    }

    /// Rank of the embedding Jacobian over the sample points.
    pub fn rank_report(&self, cfg: &SampleConfig) -> Result<RankReport, TulczyjewError> {
        self.rank_of(0..self.ambient.dim(), cfg)
    }

    /// Whether the projection to the first half of the ambient coordinates
    /// (`(q, p)` on `TT*Q`) is a local diffeomorphism.
    pub fn graph_report(&self, cfg: &SampleConfig) -> Result<RankReport, TulczyjewError> {
        self.rank_of(0..self.ambient.dim() / 2, cfg)
    }
}

/// `(q, v) ↦ (q, ∂L/∂v, v, ∂L/∂q)`.
pub fn el_submanifold(l: &Expr, m: usize) -> ImplicitEquation {
    let params = tangent_chart(m);
    let q = |i| params.coord(i).to_string();
    let v = |i| params.coord(m + i).to_string();
    let embedding = [
        (0..m).map(|i| params.coord_expr(i)).collect::<Vec<_>>(),
        (0..m).map(|i| l.differentiate(&v(i))).collect(),
        (0..m).map(|i| params.coord_expr(m + i)).collect(),
        (0..m).map(|i| l.differentiate(&q(i))).collect(),
    ]
    .concat();
    ImplicitEquation { ambient: tt_star_chart(m), params, embedding }
}

/// The pullback of `omega_ambient` along the embedding vanishes.
pub fn isotropy_check(ie: &ImplicitEquation, omega_ambient: &DiffForm, cfg: &SampleConfig) -> Result<Verdict, TulczyjewError> {
    ie.ambient.ensure_same(omega_ambient.chart())?;
    let rank = ie.rank_report(cfg)?;
    if !rank.is_full() {
        return Err(TulczyjewError::RankDeficientEmbedding(rank.at_min));
    }
    let back = pullback_along(&ie.params, &ie.embedding, omega_ambient)?;
    let residual = back.components().values().next().cloned().unwrap_or_else(Expr::zero);
    Ok(Verdict::from(back.is_zero(cfg)).with_residual(residual))
}

#[derive(Clone, Debug, PartialEq)]
pub struct FiberDerivative {
    /// `(q, ∂L/∂v)`.
    pub map: Vec<Expr>,
    pub regularity: RegularityReport,
}

pub fn fiber_derivative(l: &Expr, m: usize, cfg: &SampleConfig) -> FiberDerivative {
    let chart = tangent_chart(m);
    let map = (0..m).map(|i| chart.coord_expr(i)).chain((0..m).map(|i| l.differentiate(chart.coord(m + i)))).collect();
    let sys = LagrangianSystem::new(canonical_structure(m), l.clone());
    FiberDerivative { map, regularity: regularity(&sys, cfg) }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PulledBackStructures {
    pub theta_l: DiffForm,
    pub omega_l: DiffForm,
}

/// `θ_L = FL^* (p dq)` and `Ω_L = FL^* (dp∧dq) = dθ_L`.
pub fn pullback_structures(l: &Expr, m: usize) -> Result<PulledBackStructures, GeomError> {
    let chart = tangent_chart(m);
    let can = canonical_cotangent(m);
    let fl: Vec<Expr> = (0..m).map(|i| chart.coord_expr(i)).chain((0..m).map(|i| l.differentiate(chart.coord(m + i)))).collect();
    let theta_l = pullback_along(&chart, &fl, &can.theta)?;
    let omega_l = pullback_along(&chart, &fl, &can.omega.scale(&Expr::int(-1)))?;
    Ok(PulledBackStructures { theta_l, omega_l })
}

/// `(q, p) ↦ (q, p, X_H)` for the canonical Poisson structure.
pub fn hamiltonian_graph(h: &Expr, m: usize) -> ImplicitEquation {
    let params = cotangent_chart(m);
    let x = hamiltonian_vf_poisson(&canonical_cotangent(m).lambda, h);
    let embedding = (0..2 * m).map(|i| params.coord_expr(i)).chain(x.components().iter().cloned()).collect();
    ImplicitEquation { ambient: tt_star_chart(m), params, embedding }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geomcalc::VectorField;
    use crate::hamiltonian::{hamiltonian_vf, HamiltonianSystem};
    use crate::lagrangian::{cartan_one_form, el_solve, lagrangian_two_form, Regularity};
    use crate::symexpr::{equal_all, parse};

    fn cfg() -> SampleConfig {
        SampleConfig::default()
    }

    fn tq(text: &str) -> Expr {
        parse(text, &tangent_chart(1).scope::<&str>(&[])).unwrap()
    }

    fn same(a: &[Expr], b: &[Expr]) -> bool {
        let pairs: Vec<_> = a.iter().cloned().zip(b.iter().cloned()).collect();
        a.len() == b.len() && equal_all(&pairs, &cfg()).is_equal()
    }

    #[test]
    fn tau_permutes_coordinates() {
        let t = tau(1);
        let p = EvalPoint::from_pairs(&[("q", 1.0), ("p", 2.0), ("vq", 3.0), ("vp", 4.0)]);
        let image: Vec<f64> = t.forward().iter().map(|e| e.eval(&p).unwrap()).collect();
        assert_eq!(image, vec![1.0, 3.0, 4.0, 2.0]);
        let round = t.inverse().after(&t).unwrap();
        assert!(same(round.forward(), &(0..4).map(|i| t.src().coord_expr(i)).collect::<Vec<_>>()));
        assert!(Diffeo::new(t.src(), t.dst(), t.forward().to_vec(), t.inverse_map().to_vec(), &cfg()).is_ok());
    }

    #[test]
    fn tau_is_a_symplectomorphism() {
        for m in 1..=3 {
            let back = tau(m).pullback_form(&t_star_t_form(m)).unwrap();
            assert!(back.sub(&tt_star_form(m)).unwrap().is_zero(&cfg()).is_equal(), "m = {m}");
        }
        assert_eq!(tt_star_form(1).to_string(), "dq∧dvp - dp∧dvq");
    }

    #[test]
    fn el_submanifold_embeddings() {
        for (l, want) in [("v^2/2", ["q", "v", "v", "0"]), ("(v^2 - q^2)/2", ["q", "v", "v", "-q"]), ("q*v", ["q", "q", "v", "v"])] {
            let ie = el_submanifold(&tq(l), 1);
            let want: Vec<Expr> = want.iter().map(|w| tq(w)).collect();
            assert!(same(&ie.embedding, &want), "{l}");
            assert!(ie.rank_report(&cfg()).unwrap().is_full());
            assert!(isotropy_check(&ie, &tt_star_form(1), &cfg()).unwrap().is_pass(), "{l}");
        }
        assert!(el_submanifold(&tq("v^2/2"), 1).graph_report(&cfg()).unwrap().is_full());
        let degenerate = el_submanifold(&tq("q*v"), 1).graph_report(&cfg()).unwrap();
        assert_eq!((degenerate.min, degenerate.expected), (1, 2));
    }

    #[test]
    fn isotropy_fails_for_non_closed_graph() {
        // graph of α = q2 dq1 in T*R²: the pullback of dq∧dp is -dα = dq1∧dq2
        let ambient = cotangent_chart(2);
        let params = Chart::new("Q", &["q1", "q2"]).unwrap();
        let e = |s: &str| Expr::sym(s);
        let ie = ImplicitEquation::new(&ambient, &params, vec![e("q1"), e("q2"), e("q2"), Expr::zero()]).unwrap();
        let v = isotropy_check(&ie, &canonical_cotangent(2).omega, &cfg()).unwrap();
        assert!(v.is_fail());
        let closed = ImplicitEquation::new(&ambient, &params, vec![e("q1"), e("q2"), e("q2"), e("q1")]).unwrap();
        assert!(isotropy_check(&closed, &canonical_cotangent(2).omega, &cfg()).unwrap().is_pass());
        let flat = ImplicitEquation::new(&ambient, &params, vec![e("q1"), e("q1"), Expr::zero(), Expr::zero()]).unwrap();
        assert!(matches!(isotropy_check(&flat, &canonical_cotangent(2).omega, &cfg()), Err(TulczyjewError::RankDeficientEmbedding(_))));
    }

    #[test]
    fn fiber_derivatives() {
        let fd = fiber_derivative(&tq("v^4/4"), 1, &cfg());
        assert!(same(&fd.map, &[tq("q"), tq("v^3")]));
        assert_eq!(fd.regularity.status, Regularity::Regular);
        let fd = fiber_derivative(&tq("q*v"), 1, &cfg());
        assert!(same(&fd.map, &[tq("q"), tq("q")]));
        assert!(matches!(fd.regularity.status, Regularity::Degenerate { .. }));
    }

    #[test]
    fn pulled_back_structures() {
        for l in ["v^2/2", "q*v", "0", "v^4/4 + q^2*v", "exp(v)*cos(q)"] {
            let l = tq(l);
            let st = pullback_structures(&l, 1).unwrap();
            let sys = LagrangianSystem::new(canonical_structure(1), l);
            assert!(st.theta_l.equal_to(&cartan_one_form(&sys), &cfg()).is_equal());
            let minus_omega = lagrangian_two_form(&sys).scale(&Expr::int(-1));
            assert!(st.omega_l.equal_to(&minus_omega, &cfg()).is_equal());
        }
        assert_eq!(pullback_structures(&tq("v^2/2"), 1).unwrap().omega_l.to_string(), "-dq∧dv");
        assert!(pullback_structures(&tq("q*v"), 1).unwrap().omega_l.is_zero(&cfg()).is_equal());
    }

    #[test]
    fn hamiltonian_graphs() {
        let h_chart = cotangent_chart(1);
        let h = |s: &str| parse(s, &h_chart.scope::<&str>(&[])).unwrap();
        let g = hamiltonian_graph(&h("(q^2 + p^2)/2"), 1);
        assert!(same(&g.embedding, &[h("q"), h("p"), h("p"), h("-q")]));
        let g = hamiltonian_graph(&h("p"), 1);
        assert!(same(&g.embedding, &[h("q"), h("p"), Expr::one(), Expr::zero()]));
        let hh = h("q^3*p - p^2 + sin(q)");
        let g = hamiltonian_graph(&hh, 1);
        assert!(g.graph_report(&cfg()).unwrap().is_full());
        let x = hamiltonian_vf(&HamiltonianSystem::canonical(1, hh), &cfg()).unwrap();
        assert!(same(&g.embedding[2..], x.components()));
    }

    #[test]
    fn regular_submanifold_reproduces_el_field() {
        // along Γ, vq = q̇ and vp = ṗ = Γ(∂L/∂v)
        for l in ["v^2/2 - q^2/2", "v^2/2 + v^4/12 + q^3", "exp(v) - cos(q)"] {
            let l = tq(l);
            let sys = LagrangianSystem::new(canonical_structure(1), l.clone());
            let gamma: VectorField = el_solve(&sys, &cfg()).unwrap();
            let ie = el_submanifold(&l, 1);
            assert!(same(&[gamma.component(0).clone(), gamma.apply(&ie.embedding[1])], &ie.embedding[2..]));
        }
    }
}
