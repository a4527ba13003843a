//! Lagrangian mechanics on a tangent structure: Cartan forms, energy,
//! regularity and the intrinsic Euler-Lagrange equation.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::geomcalc::{exterior_derivative, lie_derivative, linalg, Diffeo, DiffForm, GeomError, VectorField};
use crate::symexpr::{is_zero, Equality, EvalPoint, Expr, SampleConfig};
use crate::tangentstruct::{d_s, transport_structure, TangentError, TangentStructure};

#[derive(Clone, Debug, Error, PartialEq)]
pub enum LagrangianError {
    #[error(transparent)]
    Tangent(#[from] TangentError),
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error("degenerate Lagrangian (Lagrangian 2-form singular at {0})")]
    DegenerateLagrangian(EvalPoint),
}

#[derive(Clone, Debug, PartialEq)]
pub struct LagrangianSystem {
    ts: TangentStructure,
    l: Expr,
}

impl LagrangianSystem {
    pub fn new(ts: TangentStructure, l: Expr) -> LagrangianSystem {
        LagrangianSystem { ts, l }
    }

    pub fn structure(&self) -> &TangentStructure {
        &self.ts
    }

    pub fn lagrangian(&self) -> &Expr {
        &self.l
    }

    fn positions(&self) -> &[String] {
        &self.ts.chart().coords()[..self.ts.half_dim()]
    }

    fn velocities(&self) -> &[String] {
        &self.ts.chart().coords()[self.ts.half_dim()..]
    }
}

/// `θ_L = d_S L`.
pub fn cartan_one_form(sys: &LagrangianSystem) -> DiffForm {
    d_s(&sys.l, &sys.ts)
}

/// `ω_L = -dθ_L`.
pub fn lagrangian_two_form(sys: &LagrangianSystem) -> DiffForm {
    exterior_derivative(&cartan_one_form(sys)).expect("chart has dimension >= 2").scale(&Expr::int(-1))
}

/// `E_L = Δ(L) - L`.
pub fn energy(sys: &LagrangianSystem) -> Expr {
    sys.ts.delta().apply(&sys.l) - sys.l.clone()
}

#[derive(Clone, Debug, PartialEq)]
pub enum Regularity {
    Regular,
    /// The Hessian determinant vanishes at every sample point.
    Degenerate { witness: EvalPoint },
    Undecided,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegularityReport {
    pub hessian: Vec<Vec<Expr>>,
    pub det: Expr,
    pub status: Regularity,
    /// A point where the determinant vanishes, when one was found among the
    /// origin and the sample points with velocity coordinates zeroed.
    pub singular_point: Option<EvalPoint>,
}

/// Velocity Hessian `∂²L/∂v^j∂v^k`, its determinant and where it vanishes.
pub fn regularity(sys: &LagrangianSystem, cfg: &SampleConfig) -> RegularityReport {
    let vs = sys.velocities();
    let hessian: Vec<Vec<Expr>> =
        vs.iter().map(|a| vs.iter().map(|b| sys.l.differentiate(a).differentiate(b)).collect()).collect();
    let det = linalg::det(&hessian);
    let status = match is_zero(&det, cfg) {
        Equality::NotEqual(_) => Regularity::Regular,
        Equality::Equal => {
            Regularity::Degenerate { witness: cfg.admissible_points(&[&det]).into_iter().next().unwrap_or_default() }
        }
        Equality::Undecided => Regularity::Undecided,
    };
    let singular_point = find_zero(&det, sys.ts.chart().coords(), vs, cfg);
    RegularityReport { hessian, det, status, singular_point }
}

fn find_zero(det: &Expr, coords: &[String], zeroable: &[String], cfg: &SampleConfig) -> Option<EvalPoint> {
    let vanishes = |p: &EvalPoint| det.eval_with(p, &cfg.env).is_ok_and(|x| x.abs() <= cfg.tol);
    let mut syms: Vec<String> = coords.to_vec();
    syms.extend(det.symbols().into_iter().filter(|s| !coords.contains(s)));
    let origin = EvalPoint { values: syms.iter().map(|s| (s.clone(), 0.0)).collect() };
    if vanishes(&origin) {
        return Some(origin);
    }
    let mut rng = cfg.rng();
    let set = syms.iter().cloned().collect();
    for _ in 0..cfg.n_samples {
        let p = cfg.random_point(&mut rng, &set);
        for mask in 1u32..(1 << zeroable.len().min(8)) {
            let mut q = p.clone();
            for (k, v) in zeroable.iter().enumerate() {
                if mask & (1 << k) != 0 {
                    q.values.insert(v.clone(), 0.0);
                }
            }
            if vanishes(&q) {
                return Some(q);
            }
        }
    }
    None
}

/// Solves `i_Γ ω_L = dE_L` for `Γ`.
pub fn el_solve(sys: &LagrangianSystem, cfg: &SampleConfig) -> Result<VectorField, LagrangianError> {
    let chart = sys.ts.chart();
    let w = lagrangian_two_form(sys).matrix()?;
    let de = DiffForm::differential(chart, &energy(sys));
    let n = chart.dim();
    // (i_Γ ω)_j = Γ^i ω_{ij}
    let a: Vec<Vec<Expr>> = (0..n).map(|j| (0..n).map(|i| w[i][j].clone()).collect()).collect();
    let b: Vec<Expr> = (0..n).map(|j| de.get(&[j])).collect();
    match linalg::solve(&a, &b, cfg) {
        Ok(x) => Ok(VectorField::new(chart, x)?),
        Err(GeomError::SingularJacobian(p)) => Err(LagrangianError::DegenerateLagrangian(p)),
        Err(e) => Err(e.into()),
    }
}

/// `ℒ_Γ θ_L - dL`.
pub fn el_residual(sys: &LagrangianSystem, gamma: &VectorField) -> Result<DiffForm, LagrangianError> {
    let theta = cartan_one_form(sys);
    let dl = DiffForm::differential(sys.ts.chart(), &sys.l);
    Ok(lie_derivative(gamma, &theta)?.sub(&dl)?)
}

/// Coordinate Euler-Lagrange expressions for a second-order field
/// `Γ = v^j ∂_{q^j} + a^j ∂_{v^j}`:
/// `∂²L/∂v^i∂v^j a^j + ∂²L/∂v^i∂q^j v^j - ∂L/∂q^i`.
pub fn coordinate_el_residual(sys: &LagrangianSystem, gamma: &VectorField) -> Vec<Expr> {
    let (qs, vs) = (sys.positions(), sys.velocities());
    let m = qs.len();
    (0..m)
        .map(|i| {
            let dl_dv = sys.l.differentiate(&vs[i]);
            let acc = (0..m).map(|j| dl_dv.differentiate(&vs[j]) * gamma.component(m + j).clone());
            let vel = (0..m).map(|j| dl_dv.differentiate(&qs[j]) * Expr::sym(&vs[j]));
            Expr::add(acc.chain(vel)) - sys.l.differentiate(&qs[i])
        })
        .collect()
}

/// The description seen on `φ.dst`: `L ∘ φ⁻¹` with the transported structure.
pub fn transform_description(sys: &LagrangianSystem, phi: &Diffeo, cfg: &SampleConfig) -> Result<LagrangianSystem, LagrangianError> {
    let ts = transport_structure(&sys.ts, phi, cfg)?;
    let back: BTreeMap<String, Expr> = phi.src_substitution();
    Ok(LagrangianSystem { ts, l: sys.l.substitute(&back) })
}
