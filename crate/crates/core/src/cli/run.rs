//! Running checks and writing JSONL reports.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::geomcalc::{components_vanish, jacobiator, Chart, Diffeo, GeomError, VectorField};
use crate::hamiltonian::{self, HamiltonianError, HamiltonianSystem, Invariant};
use crate::lagrangian::{self, LagrangianError, Regularity};
use crate::symexpr::{equal, Equality, EvalPoint, Expr, SampleConfig};
use crate::tangentstruct::{self, TangentError, TangentStructure};
use crate::tulczyjew::{self, TulczyjewError};
use crate::weylnum::{self, InverseMode, NonlinearStructure, WeylError};
use crate::Verdict;

use super::spec::{Check, CheckDecl, HamiltonianDecl, InvarianceTarget, SpecError, SystemSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Degenerate,
    Undecided,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Header {
    pub seed: u64,
    pub samples: usize,
    pub tol: f64,
    pub spec: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckRecord {
    pub id: String,
    pub kind: String,
    pub status: Status,
    pub witness: Option<BTreeMap<String, f64>>,
    pub residual: Option<String>,
    pub detail: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub header: Header,
    pub records: Vec<CheckRecord>,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.records.iter().all(|r| r.status == Status::Pass)
    }

    pub fn write_jsonl(&self, mut out: impl Write) -> std::io::Result<()> {
        serde_json::to_writer(&mut out, &self.header)?;
        writeln!(out)?;
        for r in &self.records {
            serde_json::to_writer(&mut out, r)?;
            writeln!(out)?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("serde_json writes UTF-8")
    }
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub seed: u64,
    pub samples: usize,
    pub tol: f64,
    pub timings: bool,
    pub spec_label: String,
}

impl Default for RunOptions {
    fn default() -> Self {
        let cfg = SampleConfig::default();
        RunOptions { seed: cfg.seed, samples: cfg.n_samples, tol: cfg.tol, timings: false, spec_label: String::new() }
    }
}

/// Per-check seed from the root seed and the check id (FNV-1a, then a
/// SplitMix64 finalizer), so that order and parallelism do not matter.
pub fn derive_seed(root: u64, id: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in id.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    let mut z = root ^ h;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn run(spec: &SystemSpec, only: Option<&[String]>, opts: &RunOptions) -> Result<Report, SpecError> {
    let selected = spec.select(only)?;
    let base = SampleConfig::default().with_samples(opts.samples).with_tol(opts.tol).with_env(spec.env.clone());
    let records = selected
        .par_iter()
        .map(|decl| {
            let cfg = base.clone().with_seed(derive_seed(opts.seed, &decl.id));
            let start = Instant::now();
            let outcome = run_check(spec, decl, &cfg);
            let wall_ms = opts.timings.then(|| start.elapsed().as_secs_f64() * 1e3);
            CheckRecord {
                id: decl.id.clone(),
                kind: decl.check.kind().to_string(),
                status: outcome.status,
                witness: outcome.witness.map(|p| p.values),
                residual: outcome.residual,
                detail: outcome.detail,
                wall_ms,
            }
        })
        .collect();
    let header = Header { seed: opts.seed, samples: opts.samples, tol: opts.tol, spec: opts.spec_label.clone() };
    Ok(Report { header, records })
}

#[derive(Clone, Debug, PartialEq)]
struct Outcome {
    status: Status,
    witness: Option<EvalPoint>,
    residual: Option<String>,
    detail: Option<String>,
}

impl Outcome {
    fn pass() -> Outcome {
        Outcome { status: Status::Pass, witness: None, residual: None, detail: None }
    }

    fn fail(detail: impl Into<String>) -> Outcome {
        Outcome { status: Status::Fail, witness: None, residual: None, detail: Some(detail.into()) }
    }

    fn detail(mut self, d: impl ToString) -> Outcome {
        self.detail = Some(d.to_string());
        self
    }

    fn witness(mut self, p: Option<EvalPoint>) -> Outcome {
        self.witness = p;
        self
    }

    /// Extends a failure witness to every coordinate of `chart`; the missing
    /// coordinates do not affect the failing quantity.
    fn on_chart(mut self, chart: &Chart, cfg: &SampleConfig) -> Outcome {
        if let Some(w) = self.witness.as_mut() {
            let missing: BTreeSet<String> = chart.coords().iter().filter(|c| w.get(c).is_none()).cloned().collect();
            w.values.extend(cfg.random_point(&mut cfg.rng(), &missing).values);
        }
        self
    }
}

impl From<Verdict> for Outcome {
    fn from(v: Verdict) -> Outcome {
        match v {
            Verdict::Pass => Outcome::pass(),
            Verdict::Fail { witness, residual } => {
                Outcome { status: Status::Fail, witness, residual: residual.map(|r| r.to_string()), detail: None }
            }
            Verdict::Undecided => Outcome { status: Status::Undecided, witness: None, residual: None, detail: None },
        }
    }
}

impl From<Equality> for Outcome {
    fn from(e: Equality) -> Outcome {
        Verdict::from(e).into()
    }
}

#[derive(Debug, thiserror::Error)]
enum CheckError {
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Tangent(#[from] TangentError),
    #[error(transparent)]
    Lagrangian(#[from] LagrangianError),
    #[error(transparent)]
    Hamiltonian(#[from] HamiltonianError),
    #[error(transparent)]
    Tulczyjew(#[from] TulczyjewError),
    #[error(transparent)]
    Weyl(#[from] WeylError),
}

fn geom_witness(e: &GeomError) -> Option<EvalPoint> {
    match e {
        GeomError::NotAntisymmetric(p) | GeomError::SingularJacobian(p) | GeomError::NotInverse(p) => Some(p.clone()),
        _ => None,
    }
}

impl CheckError {
    fn witness(&self) -> Option<EvalPoint> {
        match self {
            CheckError::Geom(e)
            | CheckError::Tangent(TangentError::Geom(e))
            | CheckError::Lagrangian(LagrangianError::Geom(e) | LagrangianError::Tangent(TangentError::Geom(e)))
            | CheckError::Hamiltonian(HamiltonianError::Geom(e))
            | CheckError::Tulczyjew(TulczyjewError::Geom(e)) => geom_witness(e),
            CheckError::Lagrangian(LagrangianError::DegenerateLagrangian(p))
            | CheckError::Hamiltonian(
                HamiltonianError::DegenerateOmega(p)
                | HamiltonianError::InconsistentStructures(p)
                | HamiltonianError::NotPoisson { witness: p, .. },
            )
            | CheckError::Tulczyjew(TulczyjewError::RankDeficientEmbedding(p)) => Some(p.clone()),
            _ => None,
        }
    }
}

fn run_check(spec: &SystemSpec, decl: &CheckDecl, cfg: &SampleConfig) -> Outcome {
    match evaluate(spec, &decl.check, cfg) {
        Ok(o) => o,
        Err(CheckError::Lagrangian(LagrangianError::DegenerateLagrangian(p))) => Outcome {
            status: Status::Degenerate,
            witness: Some(p),
            residual: None,
            detail: Some("Lagrangian is degenerate".into()),
        },
        Err(e) => Outcome::fail(e.to_string()).witness(e.witness()),
    }
}

fn verified(d: &Diffeo, cfg: &SampleConfig) -> Result<Diffeo, GeomError> {
    Diffeo::new(d.src(), d.dst(), d.forward().to_vec(), d.inverse_map().to_vec(), cfg)
}

fn fields_match(got: &VectorField, want: &VectorField, cfg: &SampleConfig) -> Outcome {
    if got.chart() != want.chart() {
        return Outcome::fail(format!("expected a field on chart \"{}\", got one on \"{}\"", want.chart().name(), got.chart().name()));
    }
    let e = got.equal_to(want, cfg);
    let residual = got.sub(want).components().iter().find(|c| !c.is_zero()).map(|c| c.to_string());
    Outcome { residual: if e.is_equal() { None } else { residual }, ..Outcome::from(e) }
}

fn hamiltonian_system(d: &HamiltonianDecl, cfg: &SampleConfig) -> Result<Option<HamiltonianSystem>, HamiltonianError> {
    Ok(match (&d.omega, &d.lambda) {
        (Some(w), Some(l)) => Some(HamiltonianSystem::with_structures(d.h.clone(), w.clone(), l.clone(), cfg)?),
        (Some(w), None) => Some(HamiltonianSystem::with_omega(d.h.clone(), w.clone(), cfg)?),
        (None, Some(_)) => None,
        (None, None) => Some(HamiltonianSystem::canonical_on(&d.chart, d.h.clone())),
    })
}

fn evaluate(spec: &SystemSpec, check: &Check, cfg: &SampleConfig) -> Result<Outcome, CheckError> {
    Ok(match check {
        Check::Axioms { structure } => {
            let report = tangentstruct::verify_axioms(&spec.structures[structure], cfg)?;
            let failing: Vec<&str> = report.failing().iter().map(|a| a.name()).collect();
            let o = Outcome::from(report.overall()).on_chart(spec.structures[structure].chart(), cfg);
            if failing.is_empty() { o } else { o.detail(format!("failing: {}", failing.join(", "))) }
        }
        Check::Sode { field, structure } => {
            Outcome::from(tangentstruct::is_sode(&spec.fields[field], &spec.structures[structure], cfg)?)
                .on_chart(spec.fields[field].chart(), cfg)
        }
        Check::SodeTransport { field, diffeo, target } => {
            let phi = verified(&spec.diffeos[diffeo], cfg)?;
            let pushed = phi.pushforward(&spec.fields[field])?;
            let ts = match target {
                Some(t) => spec.structures[t].clone(),
                None => TangentStructure::canonical_on(phi.dst())?,
            };
            Outcome::from(tangentstruct::is_sode(&pushed, &ts, cfg)?).on_chart(phi.dst(), cfg).detail(&pushed)
        }
        Check::Pushforward { field, diffeo, expect } => {
            let phi = verified(&spec.diffeos[diffeo], cfg)?;
            let pushed = phi.pushforward(&spec.fields[field])?;
            fields_match(&pushed, &spec.fields[expect], cfg).detail(&pushed)
        }
        Check::ElSolve { lagrangian, expect } => {
            let gamma = lagrangian::el_solve(&spec.lagrangians[lagrangian], cfg)?;
            match expect {
                Some(x) => fields_match(&gamma, &spec.fields[x], cfg),
                None => Outcome::pass(),
            }
            .detail(&gamma)
        }
        Check::ElResidual { lagrangian, field } => {
            let r = lagrangian::el_residual(&spec.lagrangians[lagrangian], &spec.fields[field])?;
            let o = Outcome::from(r.is_zero(cfg)).on_chart(r.chart(), cfg);
            if o.status == Status::Pass { o } else { Outcome { residual: Some(r.to_string()), ..o } }
        }
        Check::Regularity { lagrangian } => {
            let report = lagrangian::regularity(&spec.lagrangians[lagrangian], cfg);
            let detail = match &report.singular_point {
                Some(p) => format!("det = {}, vanishes at {p}", report.det),
                None => format!("det = {}", report.det),
            };
            match report.status {
                Regularity::Regular => Outcome::pass(),
                Regularity::Degenerate { witness } => {
                    Outcome { status: Status::Degenerate, witness: Some(witness), residual: None, detail: None }
                }
                Regularity::Undecided => Outcome { status: Status::Undecided, witness: None, residual: None, detail: None },
            }
            .detail(detail)
        }
        Check::HamiltonianVf { hamiltonian: name, expect } => {
            let d = &spec.hamiltonians[name];
            let x = match hamiltonian_system(d, cfg)? {
                Some(sys) => {
                    let by_omega = hamiltonian::hamiltonian_vf(&sys, cfg)?;
                    let by_lambda = hamiltonian::hamiltonian_vf_poisson(sys.lambda(), sys.hamiltonian());
                    let routes = fields_match(&by_omega, &by_lambda, cfg);
                    if routes.status != Status::Pass {
                        return Ok(routes.detail("symplectic and Poisson routes disagree"));
                    }
                    by_omega
                }
                None => hamiltonian::hamiltonian_vf_poisson(d.lambda.as_ref().expect("Poisson-only system"), &d.h),
            };
            match expect {
                Some(e) => fields_match(&x, &spec.fields[e], cfg),
                None => Outcome::pass(),
            }
            .detail(&x)
        }
        Check::Jacobi { bivector } => {
            let b = &spec.bivectors[bivector];
            let j = jacobiator(b);
            let o = Outcome::from(components_vanish(j.values(), cfg)).on_chart(b.chart(), cfg);
            if o.status == Status::Pass {
                o
            } else {
                let residual = j.iter().next().map(|((i, k, l), c)| format!("J[{i}{k}{l}] = {c}"));
                Outcome { residual, ..o }
            }
        }
        Check::Magri { first, second } => {
            let b = &spec.bivectors[first];
            Outcome::from(hamiltonian::magri_compatible(b, &spec.bivectors[second], cfg)?).on_chart(b.chart(), cfg)
        }
        Check::Invariance { field, target } => {
            let x = &spec.fields[field];
            let t = match target {
                InvarianceTarget::Scalar(f) => Invariant::Scalar(f),
                InvarianceTarget::Form(n) => Invariant::Form(&spec.forms[n]),
                InvarianceTarget::Tensor(n) => Invariant::Tensor(&spec.tensors[n]),
                InvarianceTarget::Bivector(n) => Invariant::Bivector(&spec.bivectors[n]),
            };
            Outcome::from(hamiltonian::invariance_check(x, t, cfg)?).on_chart(x.chart(), cfg)
        }
        Check::Isotropy { lagrangian } => {
            let sys = &spec.lagrangians[lagrangian];
            let chart = sys.structure().chart();
            let m = sys.structure().half_dim();
            let std_chart = tangentstruct::tangent_chart(m);
            let rename: BTreeMap<String, Expr> =
                chart.coords().iter().cloned().zip((0..2 * m).map(|i| std_chart.coord_expr(i))).collect();
            let ie = tulczyjew::el_submanifold(&sys.lagrangian().substitute(&rename), m);
            let graph = ie.graph_report(cfg)?;
            let note = if graph.is_full() { "graph over (q, p)" } else { "not a graph over (q, p)" };
            Outcome::from(tulczyjew::isotropy_check(&ie, &tulczyjew::tt_star_form(m), cfg)?).detail(note)
        }
        Check::Tau { m } => {
            let back = tulczyjew::tau(*m).pullback_form(&tulczyjew::t_star_t_form(*m))?;
            let diff = back.sub(&tulczyjew::tt_star_form(*m))?;
            Outcome::from(diff.is_zero(cfg)).detail(&back)
        }
        Check::ClockShift { d } => {
            let cs = weylnum::clock_shift(*d)?;
            let c = weylnum::weyl_commutation_check(&cs.u, &cs.v, cs.zeta)?;
            let unitary = cs.u.is_unitary(weylnum::OP_TOL) && cs.v.is_unitary(weylnum::OP_TOL);
            let detail = format!("max |UV - ζVU| = {:e}", c.deviation);
            if c.pass && unitary {
                Outcome::pass().detail(detail)
            } else if !unitary {
                Outcome::fail("clock or shift is not unitary")
            } else {
                Outcome::fail(detail)
            }
        }
        Check::Fock { n_max } => {
            let f = weylnum::truncated_fock(*n_max)?;
            let defect = weylnum::commutator_defect(&f)?;
            let last = n_max - 1;
            let confined = defect.len() == 1
                && defect[0].0 == (last, last)
                && (defect[0].1 - num_complex::Complex64::new(-(*n_max as f64), 0.0)).norm() <= weylnum::OP_TOL;
            let detail = format!("[a, a†] - I nonzero at {:?}", defect.iter().map(|(ij, _)| *ij).collect::<Vec<_>>());
            if confined { Outcome::pass() } else { Outcome::fail("commutator defect is not confined to the last entry") }.detail(detail)
        }
        Check::NonlinearAdd { profile, z1, z2, expect, tol } => {
            let s = NonlinearStructure::new(profile.clone(), InverseMode::Numeric)?;
            let sum = weylnum::nonlinear_add(&s, *z1, *z2)?;
            let swapped = weylnum::nonlinear_add(&s, *z2, *z1)?;
            let unit = weylnum::nonlinear_add(&s, *z1, (0.0, 0.0))?;
            let detail = format!("sum = ({}, {})", sum.0, sum.1);
            if sum != swapped {
                Outcome::fail("not commutative")
            } else if unit != *z1 {
                Outcome::fail(format!("(0, 0) is not an identity: got ({}, {})", unit.0, unit.1))
            } else if let Some(e) = expect.filter(|e| (e.0 - sum.0).abs() > *tol || (e.1 - sum.1).abs() > *tol) {
                Outcome::fail(format!("expected ({}, {})", e.0, e.1))
            } else {
                Outcome::pass()
            }
            .detail(detail)
        }
        Check::IntegralCurve { field, curve, t_samples } => {
            Outcome::from(tangentstruct::check_integral_curve(curve, &spec.fields[field], *t_samples, cfg)?)
        }
        Check::Equal { lhs, rhs } => {
            let e = equal(lhs, rhs, cfg);
            let pass = e.is_equal();
            let o = Outcome::from(e);
            if pass { o } else { Outcome { residual: Some((lhs.clone() - rhs.clone()).to_string()), ..o } }
        }
    })
}
