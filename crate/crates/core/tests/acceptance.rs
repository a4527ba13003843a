//! Acceptance suite: one line per criterion, non-zero exit if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use geomech::geomcalc::{components_vanish, exterior_derivative, jacobiator, lie_derivative, Chart, Diffeo, DiffForm, GeomError, Tensor11, VectorField};
use geomech::hamiltonian::{
    canonical_cotangent, cotangent_chart, hamiltonian_vf, hamiltonian_vf_poisson, invariance_check, levi_civita, lie_poisson,
    omega_from_constant, recursion_operator, t_phi, trace_invariants, HamiltonianSystem, Invariant, StructureConstants,
};
use geomech::lagrangian::{coordinate_el_residual, el_residual, el_solve, regularity, LagrangianError, LagrangianSystem, Regularity};
use geomech::symexpr::{equal, equal_all, is_zero, parse, Equality, Expr, FunctionEnv, SampleConfig};
use geomech::tangentstruct::{canonical_structure, is_sode, tangent_chart, verify_axioms, Axiom, TangentStructure};
use geomech::tulczyjew::{el_submanifold, hamiltonian_graph, isotropy_check, t_star_t_form, tau, tt_star_form};
use geomech::weylnum::{
    clock_shift, commutator_defect, nonlinear_add, phase_law_deviation, truncated_fock, weyl_commutation_check, InverseMode, NonlinearStructure,
};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn cfg() -> SampleConfig {
    SampleConfig::default()
}

fn ex(text: &str, chart: &Chart, functions: &[&str]) -> Expr {
    parse(text, &chart.scope(functions)).unwrap_or_else(|e| panic!("{text}: {e}"))
}

fn field(chart: &Chart, comps: &[&str], functions: &[&str]) -> VectorField {
    VectorField::new(chart, comps.iter().map(|c| ex(c, chart, functions)).collect()).unwrap()
}

fn eq(e: Equality) -> bool {
    e.is_equal()
}

/// Random polynomial of total degree at most `max_deg` with small integer
/// coefficients.
fn random_poly(rng: &mut ChaCha8Rng, vars: &[String], max_deg: u32, terms: usize) -> Expr {
    Expr::add((0..terms).map(|_| {
        let c = rng.random_range(-3i64..=3);
        let deg = rng.random_range(1..=max_deg);
        let mut factors = vec![Expr::frac(c, rng.random_range(1i64..=3))];
        for _ in 0..deg {
            factors.push(Expr::sym(&vars[rng.random_range(0..vars.len())]));
        }
        Expr::mul(factors)
    }))
}

// --- 1 ---------------------------------------------------------------------

struct Example {
    name: &'static str,
    src_params: &'static [&'static str],
    env: FunctionEnv,
    functions: &'static [&'static str],
    gamma: [&'static str; 2],
    forward: [&'static str; 2],
    inverse: [&'static str; 2],
    expected: [&'static str; 2],
}

fn coordinate_examples() -> Outcome {
    let generic = FunctionEnv::generic();
    let examples = [
        Example {
            name: "y = q/f(v)",
            src_params: &[],
            env: generic.clone(),
            functions: &["f"],
            gamma: ["f(v)*v", "0"],
            forward: ["q/f(v)", "v"],
            inverse: ["y*f(w)", "w"],
            expected: ["w", "0"],
        },
        Example {
            name: "y = q/omega^2",
            src_params: &["omega"],
            env: generic.clone(),
            functions: &[],
            gamma: ["omega*v", "-omega*q"],
            forward: ["q/omega^2", "v/omega"],
            inverse: ["omega^2*y", "omega*w"],
            expected: ["w", "-omega^2*y"],
        },
        Example {
            name: "y = q + exp(v)",
            src_params: &[],
            env: generic.bind_text("f", "exp(u)").unwrap().bind_text("finv", "log(u)").unwrap(),
            functions: &["f", "finv"],
            gamma: ["q", "0"],
            forward: ["q + f(v)", "q"],
            inverse: ["w", "finv(y - w)"],
            expected: ["w", "w"],
        },
    ];
    let mut times = Vec::new();
    for e in examples {
        let start = Instant::now();
        let c = cfg().with_env(e.env);
        let tq = tangent_chart(1);
        let yw = Chart::new("YW", &["y", "w"]).unwrap();
        let with_params = |chart: &Chart| -> Vec<String> {
            chart.coords().iter().cloned().chain(e.src_params.iter().map(|s| s.to_string())).collect()
        };
        let parse_on = |chart: &Chart, text: &str| parse(text, &geomech::symexpr::Scope::new(&with_params(chart)).with_functions(e.functions)).unwrap();
        let phi = Diffeo::new(
            &tq,
            &yw,
            e.forward.iter().map(|t| parse_on(&tq, t)).collect(),
            e.inverse.iter().map(|t| parse_on(&yw, t)).collect(),
            &c,
        )
        .map_err(|err| format!("{}: diffeo rejected: {err}", e.name))?;
        let gamma = VectorField::new(&tq, e.gamma.iter().map(|t| parse_on(&tq, t)).collect()).unwrap();
        let expected = VectorField::new(&yw, e.expected.iter().map(|t| parse_on(&yw, t)).collect()).unwrap();
        let pushed = phi.pushforward(&gamma).map_err(|err| err.to_string())?;
        ensure!(eq(pushed.equal_to(&expected, &c)), "{}: pushforward is {pushed}", e.name);
        let target = TangentStructure::canonical_on(&yw).unwrap();
        ensure!(is_sode(&pushed, &target, &c).unwrap().is_pass(), "{}: transported field is not second order", e.name);
        let elapsed = start.elapsed();
        ensure!(elapsed < Duration::from_secs(1), "{}: took {elapsed:?}", e.name);
        times.push(format!("{:.0} ms", elapsed.as_secs_f64() * 1e3));
    }
    Ok(format!("3 examples pushed forward and second order ({})", times.join(", ")))
}

// --- 2 ---------------------------------------------------------------------

fn tangent_axioms() -> Outcome {
    for m in 1..=3 {
        let r = verify_axioms(&canonical_structure(m), &cfg()).unwrap();
        ensure!(r.all_pass(), "m = {m}: canonical fails {:?}", r.failing());
    }
    let c1 = tangent_chart(1);
    let s1 = canonical_structure(1).s().clone();
    let c2 = tangent_chart(2);
    // vertical image twisted by a degree-zero ratio of velocities
    let twisted = Tensor11::from_terms(&c2, &[(2, 0, Expr::one()), (3, 1, Expr::one()), (3, 0, ex("v1^2/(v1^2 + v2^2)", &c2, &[]))]);
    let violators = [
        ("Liouville field with horizontal part", TangentStructure::new(s1.clone(), field(&c1, &["1", "v"], &[])).unwrap(), Axiom::LiouvilleVertical),
        ("Liouville field scaled by two", TangentStructure::new(s1, field(&c1, &["0", "2*v"], &[])).unwrap(), Axiom::LiouvilleHomogeneity),
        ("twisted vertical endomorphism", TangentStructure::new(twisted, canonical_structure(2).delta().clone()).unwrap(), Axiom::NijenhuisZero),
    ];
    for (name, ts, intended) in violators {
        let r = verify_axioms(&ts, &cfg()).unwrap();
        ensure!(r.failing() == vec![intended], "{name}: failing {:?}, wanted only {intended}", r.failing());
        ensure!(
            matches!(r.get(intended), geomech::Verdict::Fail { witness: Some(_), .. }),
            "{name}: no witness for {intended}"
        );
    }
    Ok("canonical m = 1..3 pass; 3 violators fail exactly their axiom with a witness".into())
}

// --- 3 ---------------------------------------------------------------------

fn el_examples() -> Outcome {
    let ts = canonical_structure(1);
    let c = ts.chart().clone();
    for (l, want) in [("v^2/2", ["v", "0"]), ("v^2/2 - q^2/2", ["v", "-q"])] {
        let sys = LagrangianSystem::new(ts.clone(), ex(l, &c, &[]));
        let gamma = el_solve(&sys, &cfg()).map_err(|e| e.to_string())?;
        ensure!(eq(gamma.equal_to(&field(&c, &want, &[]), &cfg())), "{l}: el_solve gave {gamma}");
        ensure!(eq(el_residual(&sys, &gamma).unwrap().is_zero(&cfg())), "{l}: nonzero residual");
        ensure!(eq(ts.s().apply(&gamma).equal_to(ts.delta(), &cfg())), "{l}: S(Γ) != Δ");
    }
    let degenerate = LagrangianSystem::new(ts, ex("q*v", &c, &[]));
    ensure!(
        matches!(el_solve(&degenerate, &cfg()), Err(LagrangianError::DegenerateLagrangian(_))),
        "q*v was not reported degenerate"
    );
    Ok("free particle and oscillator solved with zero residual; q*v degenerate".into())
}

// --- 4 ---------------------------------------------------------------------

/// A Lagrangian whose velocity Hessian is positive definite: positive
/// quadratic and quartic velocity terms, a small velocity cross term, then
/// random gyroscopic and potential parts.
fn random_regular_lagrangian(rng: &mut ChaCha8Rng, m: usize) -> Expr {
    let c = tangent_chart(m);
    let (qs, vs) = (&c.coords()[..m], &c.coords()[m..]);
    let mut terms = Vec::new();
    for v in vs {
        terms.push(Expr::frac(rng.random_range(1..=4), 2) * Expr::sym(v).powi(2));
        if rng.random_bool(0.5) {
            terms.push(Expr::frac(rng.random_range(1..=3), 12) * Expr::sym(v).powi(4));
        }
    }
    if m == 2 {
        terms.push(Expr::frac(rng.random_range(-1..=1), 4) * Expr::sym(&vs[0]) * Expr::sym(&vs[1]));
    }
    for v in vs {
        // linear in velocity, coefficient of degree <= 3 in positions
        terms.push(random_poly(rng, qs, 3, 1) * Expr::sym(v));
    }
    terms.push(random_poly(rng, qs, 4, 3));
    Expr::add(terms)
}

fn random_el_consistency() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let h = 1e-5;
    let mut worst_sym = 0.0f64;
    let mut worst_fd = 0.0f64;
    for k in 0..20 {
        let m = 1 + k % 2;
        let l = random_regular_lagrangian(&mut rng, m);
        let ts = canonical_structure(m);
        let chart = ts.chart().clone();
        let sys = LagrangianSystem::new(ts, l.clone());
        let reg = regularity(&sys, &cfg());
        ensure!(reg.status == Regularity::Regular, "L{k} = {l}: not regular");
        let gamma = el_solve(&sys, &cfg()).map_err(|e| format!("L{k} = {l}: {e}"))?;
        let residual = coordinate_el_residual(&sys, &gamma);
        let coords: std::collections::BTreeSet<String> = chart.coords().iter().cloned().collect();
        let mut prng = ChaCha8Rng::seed_from_u64(100 + k as u64);
        for _ in 0..16 {
            let p = cfg().random_point(&mut prng, &coords);
            let det = reg.det.eval(&p).unwrap();
            ensure!(det.abs() > 1e-9, "L{k}: singular Hessian at {p:?}");
            for r in &residual {
                let x = r.eval(&p).unwrap();
                worst_sym = worst_sym.max(x.abs());
                ensure!(x.abs() <= 1e-9, "L{k} = {l}: residual {x} at {p:?}");
            }
            // d/dt ∂L/∂v along Γ by a central difference in the flow direction
            let shifted = |s: f64| {
                let mut out = p.clone();
                for (i, name) in chart.coords().iter().enumerate() {
                    let g = gamma.component(i).eval(&p).unwrap();
                    out.values.insert(name.clone(), p.get(name).unwrap() + s * g);
                }
                out
            };
            let (fwd, back) = (shifted(h), shifted(-h));
            for i in 0..m {
                let dl_dv = l.differentiate(&chart.coords()[m + i]);
                let dl_dq = l.differentiate(&chart.coords()[i]);
                let ddt = (dl_dv.eval(&fwd).unwrap() - dl_dv.eval(&back).unwrap()) / (2.0 * h);
                let force = dl_dq.eval(&p).unwrap();
                let err = (ddt - force).abs() / force.abs().max(1.0);
                worst_fd = worst_fd.max(err);
                ensure!(err <= 1e-4, "L{k} = {l}: finite-difference EL mismatch {err} at {p:?}");
            }
        }
    }
    Ok(format!("20 Lagrangians; max residual {worst_sym:.1e}, max finite-difference mismatch {worst_fd:.1e}"))
}

// --- 5 ---------------------------------------------------------------------

fn hamiltonian_double_route() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for k in 0..20 {
        let m = 1 + k % 2;
        let cc = canonical_cotangent(m);
        let h = random_poly(&mut rng, cc.chart.coords(), 4, 4);
        let sys = HamiltonianSystem::canonical(m, h.clone());
        let x_omega = hamiltonian_vf(&sys, &cfg()).map_err(|e| e.to_string())?;
        let x_lambda = hamiltonian_vf_poisson(&cc.lambda, &h);
        ensure!(eq(x_omega.equal_to(&x_lambda, &cfg())), "H{k} = {h}: routes disagree");
        ensure!(eq(lie_derivative(&x_omega, &cc.omega).unwrap().is_zero(&cfg())), "H{k} = {h}: L_X ω != 0");
        ensure!(eq(is_zero(&x_omega.apply(&h), &cfg())), "H{k} = {h}: X(H) != 0");
    }
    Ok("20 Hamiltonians: ω and Λ routes agree, ω and H conserved".into())
}

// --- 6 ---------------------------------------------------------------------

fn lie_poisson_so3() -> Outcome {
    let b = lie_poisson(&StructureConstants::so3());
    let c = b.chart().clone();
    let xi: Vec<Expr> = (0..3).map(|i| c.coord_expr(i)).collect();
    for i in 0..3 {
        for j in 0..3 {
            let want = Expr::add((0..3).map(|k| Expr::int(levi_civita(i, j, k)) * xi[k].clone()));
            let got = b.bracket(&xi[i], &xi[j]);
            ensure!(got == want, "{{ξ{},ξ{}}} = {got}, want {want}", i + 1, j + 1);
        }
    }
    ensure!(eq(components_vanish(jacobiator(&b).values(), &cfg())), "nonzero jacobiator");
    let casimir = Expr::add(xi.iter().map(|x| x.clone().powi(2)));
    let generic_linear = Expr::add(xi.iter().zip([3, -5, 7]).map(|(x, a)| Expr::int(a) * x.clone()));
    for f in xi.iter().chain([&generic_linear]) {
        ensure!(b.bracket(&casimir, f).is_zero(), "{{C, {f}}} = {}", b.bracket(&casimir, f));
    }
    Ok("brackets ε_ijk ξ_k, zero jacobiator, Casimir central".into())
}

// --- 7 ---------------------------------------------------------------------

fn exactness(w: &DiffForm) -> Result<bool, String> {
    match exterior_derivative(w) {
        Ok(dw) => Ok(eq(dw.is_zero(&cfg()))),
        // a 3-form on a 2-dim chart is zero
        Err(GeomError::DegreeOverflow { .. }) => Ok(true),
        Err(e) => Err(e.to_string()),
    }
}

fn omega_f_pipeline() -> Outcome {
    let c = cotangent_chart(1);
    let t = Tensor11::from_terms(&c, &[(0, 0, Expr::one()), (1, 1, Expr::int(2))]);
    let w = omega_from_constant(&ex("q*p", &c, &[]), &t).unwrap();
    ensure!(w == canonical_cotangent(1).omega, "ω_f = {w}");
    ensure!(exactness(&w)?, "dω_f != 0 for f = qp");

    // (chart, Γ, T, f) with T invariant under Γ and Γ(f) = 0
    let c2 = cotangent_chart(2);
    let osc = field(&c, &["p", "-q"], &[]);
    let rot = field(&c2, &["-q2", "q1", "-p2", "p1"], &[]);
    let two_osc = field(&c2, &["p1", "p2", "-q1", "-2*q2"], &[]);
    let split = Tensor11::from_terms(&c2, &[(0, 0, Expr::one()), (1, 1, Expr::one()), (2, 2, Expr::int(3)), (3, 3, Expr::int(3))]);
    let per_dof = Tensor11::from_terms(&c2, &[(0, 0, Expr::one()), (1, 1, Expr::int(3)), (2, 2, Expr::one()), (3, 3, Expr::int(3))]);
    let fixtures: Vec<(&VectorField, Tensor11, Expr)> = vec![
        (&osc, Tensor11::identity(&c), ex("q^2 + p^2", &c, &[])),
        (&osc, Tensor11::identity(&c).scale(&Expr::int(2)), ex("(q^2 + p^2)^2", &c, &[])),
        (&osc, t_phi(&canonical_cotangent(1).lambda, &canonical_cotangent(1).omega).unwrap(), ex("exp(q^2 + p^2)", &c, &[])),
        (&rot, Tensor11::identity(&c2), ex("q1*p2 - q2*p1", &c2, &[])),
        (&rot, split, ex("q1^2 + q2^2 + p1^2 + p2^2", &c2, &[])),
        (&two_osc, per_dof.clone(), ex("p1^2 + q1^2", &c2, &[])),
        (&two_osc, Tensor11::identity(&c2), ex("(p2^2 + 2*q2^2)*(p1^2 + q1^2)", &c2, &[])),
    ];
    for (k, (gamma, t, f)) in fixtures.iter().enumerate() {
        ensure!(invariance_check(gamma, Invariant::Tensor(t), &cfg()).unwrap().is_pass(), "fixture {k}: T not invariant");
        ensure!(invariance_check(gamma, Invariant::Scalar(f), &cfg()).unwrap().is_pass(), "fixture {k}: Γ(f) != 0");
        let w = omega_from_constant(f, t).unwrap();
        ensure!(eq(lie_derivative(*gamma, &w).unwrap().is_zero(&cfg())), "fixture {k}: L_Γ ω_f = {}", lie_derivative(*gamma, &w).unwrap());
        ensure!(exactness(&w)?, "fixture {k}: dω_f != 0");
    }
    // closedness for arbitrary inputs, including position-dependent T
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for k in 0..10 {
        let f = random_poly(&mut rng, c2.coords(), 4, 4);
        let entries: Vec<Vec<Expr>> = (0..4).map(|_| (0..4).map(|_| random_poly(&mut rng, c2.coords(), 2, 2)).collect()).collect();
        let t = Tensor11::from_fn(&c2, |i, j| entries[i][j].clone());
        ensure!(exactness(&omega_from_constant(&f, &t).unwrap())?, "random input {k}: dω_f != 0");
    }
    Ok(format!("diag(1,2), qp gives dq∧dp; {} invariant fixtures; 10 random inputs closed", fixtures.len()))
}

// --- 8 ---------------------------------------------------------------------

fn recursion_operators() -> Outcome {
    for m in 1..=3 {
        let cc = canonical_cotangent(m);
        let c_sym = Expr::sym("c");
        let n = recursion_operator(&cc.omega, &cc.omega.scale(&c_sym), &cfg()).map_err(|e| e.to_string())?;
        let want = Tensor11::identity(&cc.chart).scale(&c_sym.clone().recip());
        ensure!(eq(n.equal_to(&want, &cfg())), "m = {m}: N != Id/c");
        let tr = trace_invariants(&n, 1);
        ensure!(eq(equal(&tr[0], &(Expr::int(2 * m as i64) / c_sym), &cfg())), "m = {m}: tr N = {}", tr[0]);
    }
    let cc = canonical_cotangent(2);
    let (a, b) = (Expr::sym("a"), Expr::sym("b"));
    let w2 = DiffForm::from_terms(&cc.chart, 2, vec![(vec![0, 2], a.clone()), (vec![1, 3], b.clone())]).unwrap();
    let n = recursion_operator(&cc.omega, &w2, &cfg()).map_err(|e| e.to_string())?;
    let tr = trace_invariants(&n, 2);
    let want = [
        Expr::int(2) / a.clone() + Expr::int(2) / b.clone(),
        Expr::int(2) / a.powi(2) + Expr::int(2) / b.powi(2),
    ];
    ensure!(eq(equal_all(&[(tr[0].clone(), want[0].clone()), (tr[1].clone(), want[1].clone())], &cfg())), "block traces {tr:?}");
    Ok("N = Id/c with tr 2m/c for m = 1..3; block traces 2/a + 2/b, 2/a² + 2/b²".into())
}

// --- 9 ---------------------------------------------------------------------

fn tulczyjew_checks() -> Outcome {
    for m in 1..=3 {
        let back = tau(m).pullback_form(&t_star_t_form(m)).unwrap();
        ensure!(eq(back.sub(&tt_star_form(m)).unwrap().is_zero(&cfg())), "m = {m}: τ is not symplectic");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut lagrangians: Vec<(usize, Expr, bool)> = Vec::new();
    for k in 0..7 {
        let m = 1 + k % 2;
        lagrangians.push((m, random_regular_lagrangian(&mut rng, m), false));
    }
    let c1 = tangent_chart(1);
    let c2 = tangent_chart(2);
    lagrangians.push((1, ex("q*v", &c1, &[]), true));
    lagrangians.push((1, ex("q^2*v - q^3", &c1, &[]), true));
    lagrangians.push((2, ex("(v1 + v2)^2/2 - q1*q2", &c2, &[]), true));
    for (m, l, degenerate) in &lagrangians {
        let sys = LagrangianSystem::new(canonical_structure(*m), l.clone());
        let is_degenerate = matches!(regularity(&sys, &cfg()).status, Regularity::Degenerate { .. });
        ensure!(is_degenerate == *degenerate, "{l}: regularity mismatch");
        let ie = el_submanifold(l, *m);
        ensure!(isotropy_check(&ie, &tt_star_form(*m), &cfg()).map_err(|e| e.to_string())?.is_pass(), "{l}: not isotropic");
    }
    for k in 0..5 {
        let m = 1 + k % 2;
        let cc = canonical_cotangent(m);
        let h = random_poly(&mut rng, cc.chart.coords(), 4, 4);
        let g = hamiltonian_graph(&h, m);
        let x = hamiltonian_vf(&HamiltonianSystem::canonical(m, h.clone()), &cfg()).unwrap();
        let n = 2 * m;
        let pairs: Vec<(Expr, Expr)> = (0..n)
            .map(|i| (g.embedding[i].clone(), cc.chart.coord_expr(i)))
            .chain((0..n).map(|i| (g.embedding[n + i].clone(), x.component(i).clone())))
            .collect();
        ensure!(eq(equal_all(&pairs, &cfg())), "H = {h}: graph differs from X_H");
    }
    Ok(format!("τ symplectic for m = 1..3; {} Lagrangians isotropic (3 degenerate); 5 Hamiltonian graphs", lagrangians.len()))
}

// --- 10 --------------------------------------------------------------------

fn weyl_numerics() -> Outcome {
    for d in 2..=32 {
        let cs = clock_shift(d).unwrap();
        let check = weyl_commutation_check(&cs.u, &cs.v, cs.zeta).unwrap();
        ensure!(check.pass && check.deviation <= 1e-12, "d = {d}: deviation {}", check.deviation);
    }
    for d in 2..=7 {
        let dev = phase_law_deviation(d).unwrap();
        ensure!(dev <= 1e-12, "d = {d}: phase law deviation {dev}");
    }
    for n_max in [2, 8, 16] {
        let f = truncated_fock(n_max).unwrap();
        let defect = commutator_defect(&f).unwrap();
        ensure!(defect.len() == 1 && defect[0].0 == (n_max - 1, n_max - 1), "n_max = {n_max}: defect {defect:?}");
        let entry = f.a.commutator(&f.a_dag).unwrap().get(n_max - 1, n_max - 1);
        ensure!((entry.re - (1.0 - n_max as f64)).abs() <= 1e-12 && entry.im == 0.0, "n_max = {n_max}: final entry {entry}");
    }
    let s = NonlinearStructure::new(Expr::one() + Expr::sym("u").powi(2), InverseMode::Numeric).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut z = || (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let (a, b, c) = (z(), z(), z());
        ensure!(nonlinear_add(&s, a, (0.0, 0.0)).unwrap() == a && nonlinear_add(&s, (0.0, 0.0), a).unwrap() == a, "identity fails at {a:?}");
        ensure!(nonlinear_add(&s, a, b).unwrap() == nonlinear_add(&s, b, a).unwrap(), "commutativity fails at {a:?}, {b:?}");
        let left = nonlinear_add(&s, nonlinear_add(&s, a, b).unwrap(), c).unwrap();
        let right = nonlinear_add(&s, a, nonlinear_add(&s, b, c).unwrap()).unwrap();
        let dev = (left.0 - right.0).abs().max((left.1 - right.1).abs());
        worst = worst.max(dev);
        ensure!(dev <= 1e-9, "associativity off by {dev} at {a:?}, {b:?}, {c:?}");
    }
    Ok(format!("d = 2..32 commutation, phase law d <= 7, Fock defects 1 - n_max, 100 triples (max assoc. error {worst:.1e})"))
}

// --- 11 --------------------------------------------------------------------

fn gradient_check() -> Outcome {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/corpus.txt");
    let text = std::fs::read_to_string(&path).map_err(|e| e.to_string())?;
    let env = FunctionEnv::generic();
    let c = cfg();
    let mut count = 0;
    let mut worst = 0.0f64;
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
        let parts: Vec<&str> = line.splitn(3, '|').map(str::trim).collect();
        let list = |s: &str| s.split(',').map(str::trim).filter(|x| !x.is_empty()).map(String::from).collect::<Vec<_>>();
        let (syms, fns) = (list(parts[0]), list(parts[1]));
        let e = parse(parts[2], &geomech::symexpr::Scope::new(&syms).with_functions(&fns)).map_err(|err| format!("{line}: {err}"))?;
        let points = c.admissible_points(&[&e]);
        ensure!(points.len() >= c.n_samples, "{line}: only {} admissible points", points.len());
        for x in &syms {
            let d = e.differentiate(x);
            for p in points.iter().take(16) {
                let mut p = p.clone();
                let x0 = *p.values.entry(x.clone()).or_insert(0.5);
                let p = &p;
                let h = 1e-5 * x0.abs().max(1.0);
                let at = |s: f64| e.eval_with(&p.clone().with(x, x0 + s), &env);
                let (Ok(fp), Ok(fm), Ok(sym)) = (at(h), at(-h), d.eval_with(p, &env)) else {
                    return Err(format!("{line}: not evaluable near {p:?}"));
                };
                let fd = (fp - fm) / (2.0 * h);
                let rel = (sym - fd).abs() / sym.abs().max(1.0);
                worst = worst.max(rel);
                ensure!(rel < 1e-6, "{line}: d/d{x} = {sym}, finite difference {fd} at {p:?}");
            }
        }
        count += 1;
    }
    Ok(format!("{count} corpus expressions, max relative error {worst:.1e}"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("examples transported to second-order fields", coordinate_examples),
        ("tangent structure axioms and violators", tangent_axioms),
        ("Euler-Lagrange fields", el_examples),
        ("randomized Euler-Lagrange consistency", random_el_consistency),
        ("Hamiltonian double route", hamiltonian_double_route),
        ("Lie-Poisson so(3)", lie_poisson_so3),
        ("two-form from a constant of motion", omega_f_pipeline),
        ("recursion operator", recursion_operators),
        ("Tulczyjew triple", tulczyjew_checks),
        ("Weyl numerics", weyl_numerics),
        ("gradient check", gradient_check),
    ];
    let start = Instant::now();
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panic".into()))
        });
        let ms = t.elapsed().as_secs_f64() * 1e3;
        match result {
            Ok(detail) => println!("PASS  {:>2}  {name}: {detail} [{ms:.0} ms]", i + 1),
            Err(why) => {
                failures += 1;
                println!("FAIL  {:>2}  {name}: {why} [{ms:.0} ms]", i + 1);
            }
        }
    }
    let total = start.elapsed();
    let within = total < Duration::from_secs(60);
    println!("{}  suite runtime {:.1} s (limit 60 s)", if within { "PASS" } else { "FAIL" }, total.as_secs_f64());
    if failures > 0 || !within {
        std::process::exit(1);
    }
}

