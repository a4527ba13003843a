//! Tangent-bundle structures `(S, Δ)`: axioms, second-order fields, transport
//! under diffeomorphisms, `d_S`, and curve lifts.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::geomcalc::{
    components_vanish, lie_derivative, linalg, nijenhuis, Chart, Diffeo, DiffForm, GeomError, Tensor11, VectorField,
};
use crate::symexpr::{equal_all, Expr, SampleConfig};
use crate::Verdict;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum TangentError {
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error("tangent structure needs an even-dimensional chart, got dimension {0}")]
    OddDimension(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("curve component depends on '{0}', not only on the time symbol")]
    NotACurve(String),
}

/// `S` and `Δ` on a `2m`-dimensional chart.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentStructure {
    chart: Chart,
    s: Tensor11,
    delta: VectorField,
}

impl TangentStructure {
    pub fn new(s: Tensor11, delta: VectorField) -> Result<TangentStructure, TangentError> {
        s.chart().ensure_same(delta.chart())?;
        let n = s.chart().dim();
        if n % 2 != 0 {
            return Err(TangentError::OddDimension(n));
        }
        Ok(TangentStructure { chart: s.chart().clone(), s, delta })
    }

    /// The canonical structure on a chart whose first half are positions and
    /// second half velocities: `S = ∂_{v^i} ⊗ dq^i`, `Δ = v^i ∂_{v^i}`.
    pub fn canonical_on(chart: &Chart) -> Result<TangentStructure, TangentError> {
        let n = chart.dim();
        if n % 2 != 0 {
            return Err(TangentError::OddDimension(n));
        }
        let m = n / 2;
        let s = Tensor11::from_terms(chart, &(0..m).map(|i| (m + i, i, Expr::one())).collect::<Vec<_>>());
        let delta = VectorField::new(chart, (0..n).map(|i| if i < m { Expr::zero() } else { chart.coord_expr(i) }).collect())?;
        TangentStructure::new(s, delta)
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn s(&self) -> &Tensor11 {
        &self.s
    }

    pub fn delta(&self) -> &VectorField {
        &self.delta
    }

    pub fn half_dim(&self) -> usize {
        self.chart.dim() / 2
    }
}

/// Coordinates `(q, v)` when `m = 1`, else `(q1..qm, v1..vm)`.
pub fn tangent_chart(m: usize) -> Chart {
    let names: Vec<String> = if m == 1 {
        vec!["q".into(), "v".into()]
    } else {
        (1..=m).map(|i| format!("q{i}")).chain((1..=m).map(|i| format!("v{i}"))).collect()
    };
    Chart::new("TQ", &names).expect("generated names are distinct")
}

/// # Panics
/// When `m == 0`.
pub fn canonical_structure(m: usize) -> TangentStructure {
    assert!(m >= 1, "canonical_structure needs m >= 1");
    TangentStructure::canonical_on(&tangent_chart(m)).expect("even dimension")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Axiom {
    SquareZero,
    KernelEqualsImage,
    NijenhuisZero,
    LiouvilleHomogeneity,
    LiouvilleVertical,
}

impl Axiom {
    pub const ALL: [Axiom; 5] =
        [Axiom::SquareZero, Axiom::KernelEqualsImage, Axiom::NijenhuisZero, Axiom::LiouvilleHomogeneity, Axiom::LiouvilleVertical];

    pub fn name(self) -> &'static str {
        match self {
            Axiom::SquareZero => "S^2 = 0",
            Axiom::KernelEqualsImage => "Ker S = Im S",
            Axiom::NijenhuisZero => "N_S = 0",
            Axiom::LiouvilleHomogeneity => "L_Delta S = -S",
            Axiom::LiouvilleVertical => "S(Delta) = 0",
        }
    }
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AxiomReport {
    pub results: BTreeMap<Axiom, Verdict>,
}

impl AxiomReport {
    pub fn all_pass(&self) -> bool {
        self.results.values().all(Verdict::is_pass)
    }

    pub fn get(&self, a: Axiom) -> &Verdict {
        &self.results[&a]
    }

    pub fn failing(&self) -> Vec<Axiom> {
        self.results.iter().filter(|(_, v)| v.is_fail()).map(|(a, _)| *a).collect()
    }

    pub fn overall(&self) -> Verdict {
        Verdict::all(self.results.values().cloned())
    }
}

fn first_nonzero(exprs: &[Expr]) -> Expr {
    exprs.iter().find(|e| !e.is_zero()).cloned().unwrap_or_else(Expr::zero)
}

/// Checks the five axioms. Ker S = Im S is decided by numeric rank `m` at
/// every sample point; `S² = 0` already gives `Im S ⊆ Ker S`.
pub fn verify_axioms(ts: &TangentStructure, cfg: &SampleConfig) -> Result<AxiomReport, TangentError> {
    let s = &ts.s;
    let m = ts.half_dim();
    let mut results = BTreeMap::new();

    let s2 = s.compose(s);
    results.insert(Axiom::SquareZero, Verdict::from(s2.is_zero(cfg)).with_residual(first_nonzero(&s2.rows().concat())));

    let rank = match linalg::rank_range(s.rows(), cfg) {
        None => Verdict::Undecided,
        Some((lo, hi, _)) if lo == m && hi == m => Verdict::Pass,
        Some((lo, hi, p)) => Verdict::fail_with(Some(p), Expr::int(if lo != m { lo as i64 } else { hi as i64 })),
    };
    results.insert(Axiom::KernelEqualsImage, rank);

    let n = nijenhuis(s)?;
    let nv: Verdict = components_vanish(n.values(), cfg).into();
    results.insert(Axiom::NijenhuisZero, nv.with_residual(n.values().next().cloned().unwrap_or_else(Expr::zero)));

    let lds = lie_derivative(&ts.delta, s)?.add(s);
    results.insert(
        Axiom::LiouvilleHomogeneity,
        Verdict::from(lds.is_zero(cfg)).with_residual(first_nonzero(&lds.rows().concat())),
    );

    let sd = s.apply(&ts.delta);
    results.insert(Axiom::LiouvilleVertical, Verdict::from(sd.is_zero(cfg)).with_residual(first_nonzero(sd.components())));

    Ok(AxiomReport { results })
}

/// `S(Γ) = Δ`.
pub fn is_sode(gamma: &VectorField, ts: &TangentStructure, cfg: &SampleConfig) -> Result<Verdict, TangentError> {
    gamma.chart().ensure_same(&ts.chart)?;
    let sg = ts.s.apply(gamma);
    let diff = sg.sub(&ts.delta);
    Ok(Verdict::from(sg.equal_to(&ts.delta, cfg)).with_residual(first_nonzero(diff.components())))
}

/// The structure seen on `φ.dst`: `S' = (φ⁻¹)^* S`, `Δ' = φ_* Δ`.
pub fn transport_structure(ts: &TangentStructure, phi: &Diffeo, cfg: &SampleConfig) -> Result<TangentStructure, TangentError> {
    ts.chart.ensure_same(phi.src())?;
    let s = phi.pushforward_tensor(&ts.s, cfg)?;
    let delta = phi.pushforward(&ts.delta)?;
    TangentStructure::new(s, delta)
}

/// `(d_S f)(X) = df(S X)`.
pub fn d_s(f: &Expr, ts: &TangentStructure) -> DiffForm {
    let df = DiffForm::differential(&ts.chart, f);
    ts.s.apply_to_one_form(&df).expect("differential is a 1-form")
}

/// A curve on configuration space, parametrized by a time symbol.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveSpec {
    pub time: String,
    pub components: Vec<Expr>,
}

impl CurveSpec {
    pub fn new(time: &str, components: Vec<Expr>) -> Result<CurveSpec, TangentError> {
        for c in &components {
            if let Some(s) = c.symbols().into_iter().find(|s| s != time) {
                return Err(TangentError::NotACurve(s));
            }
        }
        Ok(CurveSpec { time: time.into(), components })
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    fn velocity(&self) -> Vec<Expr> {
        self.components.iter().map(|c| c.differentiate(&self.time)).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CurveLift {
    /// `(γ, γ')`.
    pub first: Vec<Expr>,
    /// `(γ, γ', γ', γ'')`.
    pub second: Vec<Expr>,
}

pub fn lift_curve(gamma: &CurveSpec) -> CurveLift {
    let vel = gamma.velocity();
    let acc: Vec<Expr> = vel.iter().map(|c| c.differentiate(&gamma.time)).collect();
    let first: Vec<Expr> = gamma.components.iter().chain(&vel).cloned().collect();
    let second = first.iter().chain(&vel).chain(&acc).cloned().collect();
    CurveLift { first, second }
}

/// Tests `d(tγ)/dt = Γ ∘ tγ` at `t_samples` random times.
pub fn check_integral_curve(gamma: &CurveSpec, field: &VectorField, t_samples: usize, cfg: &SampleConfig) -> Result<Verdict, TangentError> {
    let chart = field.chart();
    if chart.dim() != 2 * gamma.dim() {
        return Err(TangentError::DimensionMismatch { expected: 2 * gamma.dim(), found: chart.dim() });
    }
    let lift = lift_curve(gamma);
    let on_curve: BTreeMap<String, Expr> = chart.coords().iter().cloned().zip(lift.first.iter().cloned()).collect();
    let lhs: Vec<Expr> = lift.first.iter().map(|c| c.differentiate(&gamma.time)).collect();
    let rhs: Vec<Expr> = field.components().iter().map(|c| c.substitute(&on_curve)).collect();
    let pairs: Vec<(Expr, Expr)> = lhs.iter().cloned().zip(rhs.iter().cloned()).collect();
    let residual: Vec<Expr> = lhs.into_iter().zip(rhs).map(|(a, b)| a - b).collect();
    let cfg = cfg.clone().with_samples(t_samples.max(1));
    Ok(Verdict::from(equal_all(&pairs, &cfg)).with_residual(first_nonzero(&residual)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symexpr::{parse, FunctionEnv};

    fn cfg() -> SampleConfig {
        SampleConfig::default()
    }

    fn field(chart: &Chart, comps: &[&str], functions: &[&str]) -> VectorField {
        let scope = chart.scope(functions);
        VectorField::new(chart, comps.iter().map(|c| parse(c, &scope).unwrap()).collect()).unwrap()
    }

    #[test]
    fn canonical_structures_pass_all_axioms() {
        for m in 1..=3 {
            let ts = canonical_structure(m);
            assert_eq!(ts.chart().dim(), 2 * m);
            let r = verify_axioms(&ts, &cfg()).unwrap();
            assert!(r.all_pass(), "m = {m}: {:?}", r.failing());
        }
        assert_eq!(canonical_structure(1).s().to_string(), "∂v⊗dq");
        assert_eq!(canonical_structure(1).delta().to_string(), "(v) ∂v");
    }

    #[test]
    fn shifted_liouville_field_breaks_verticality() {
        let c = tangent_chart(1);
        let ts = TangentStructure::new(canonical_structure(1).s().clone(), field(&c, &["q", "v"], &[])).unwrap();
        let r = verify_axioms(&ts, &cfg()).unwrap();
        assert!(r.get(Axiom::LiouvilleVertical).is_fail());
        assert!(r.get(Axiom::SquareZero).is_pass());
        let id = TangentStructure::new(Tensor11::identity(&c), field(&c, &["0", "v"], &[])).unwrap();
        assert!(verify_axioms(&id, &cfg()).unwrap().get(Axiom::SquareZero).is_fail());
    }

    #[test]
    fn odd_dimension_is_rejected() {
        let c = Chart::new("x", &["a", "b", "c"]).unwrap();
        assert!(matches!(
            TangentStructure::new(Tensor11::zero(&c), VectorField::zero(&c)),
            Err(TangentError::OddDimension(3))
        ));
    }

    #[test]
    fn sode_condition() {
        let ts = canonical_structure(1);
        let c = ts.chart().clone();
        assert!(is_sode(&field(&c, &["v", "F(q + q*v)"], &["F"]), &ts, &cfg()).unwrap().is_pass());
        assert!(is_sode(&field(&c, &["q", "0"], &[]), &ts, &cfg()).unwrap().is_fail());
        assert!(is_sode(&VectorField::zero(&c), &ts, &cfg()).unwrap().is_fail());
    }

    #[test]
    fn d_s_examples() {
        let ts = canonical_structure(1);
        let c = ts.chart().clone();
        let half_v2 = parse("v^2/2", &c.scope::<&str>(&[])).unwrap();
        assert_eq!(d_s(&half_v2, &ts), DiffForm::one_form(&c, vec![Expr::sym("v"), Expr::zero()]));
        assert_eq!(d_s(&Expr::sym("q"), &ts).components().len(), 0);
        assert_eq!(d_s(&Expr::int(7), &ts).components().len(), 0);
    }

    #[test]
    fn curve_lifts() {
        let t = Expr::sym("t");
        let lift = lift_curve(&CurveSpec::new("t", vec![t.clone()]).unwrap());
        assert_eq!(lift.first, vec![t.clone(), Expr::one()]);
        assert_eq!(lift.second, vec![t.clone(), Expr::one(), Expr::one(), Expr::zero()]);
        let lift = lift_curve(&CurveSpec::new("t", vec![t.clone().sin()]).unwrap());
        assert_eq!(lift.second, vec![t.clone().sin(), t.clone().cos(), t.clone().cos(), t.clone().sin().neg()]);
        let lift = lift_curve(&CurveSpec::new("t", vec![t.clone(), t.clone().powi(2)]).unwrap());
        assert_eq!(lift.first, vec![t.clone(), t.clone().powi(2), Expr::one(), Expr::int(2) * t.clone()]);
        assert!(matches!(CurveSpec::new("t", vec![Expr::sym("q")]), Err(TangentError::NotACurve(_))));
    }

    #[test]
    fn integral_curves() {
        let c = tangent_chart(1);
        let t = Expr::sym("t");
        let osc = field(&c, &["v", "-q"], &[]);
        assert!(check_integral_curve(&CurveSpec::new("t", vec![t.clone().sin()]).unwrap(), &osc, 16, &cfg()).unwrap().is_pass());
        let drift = field(&c, &["v", "0"], &[]);
        assert!(check_integral_curve(&CurveSpec::new("t", vec![t.clone().powi(2)]).unwrap(), &drift, 16, &cfg()).unwrap().is_fail());
        let still = VectorField::zero(&c);
        assert!(check_integral_curve(&CurveSpec::new("t", vec![Expr::int(3)]).unwrap(), &still, 16, &cfg()).unwrap().is_pass());
    }

    #[test]
    fn transport_round_trip_and_identity() {
        let ts = canonical_structure(1);
        let c = ts.chart().clone();
        let id = Diffeo::identity(&c);
        let same = transport_structure(&ts, &id, &cfg()).unwrap();
        assert!(same.s().equal_to(ts.s(), &cfg()).is_equal());
        let dst = Chart::new("YW", &["y", "w"]).unwrap();
        let env = FunctionEnv::generic();
        let scfg = cfg().with_env(env);
        let phi = Diffeo::new(
            &c,
            &dst,
            vec![parse("q/f(v)", &c.scope(&["f"])).unwrap(), Expr::sym("v")],
            vec![parse("y*f(w)", &dst.scope(&["f"])).unwrap(), Expr::sym("w")],
            &scfg,
        )
        .unwrap();
        let there = transport_structure(&ts, &phi, &scfg).unwrap();
        assert!(verify_axioms(&there, &scfg).unwrap().all_pass());
        let back = transport_structure(&there, &phi.inverse(), &scfg).unwrap();
        assert!(back.s().equal_to(ts.s(), &scfg).is_equal());
        assert!(back.delta().equal_to(ts.delta(), &scfg).is_equal());
        // SODE equivariance on a genuine SODE
        let gamma = field(&c, &["v", "-q"], &[]);
        let pushed = phi.pushforward(&gamma).unwrap();
        assert!(is_sode(&pushed, &there, &scfg).unwrap().is_pass());
    }
}
