//! Finite-dimensional Weyl pairs, truncated Fock operators and nonlinear
//! linear structures on the plane. `ħ = 1` throughout.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

use crate::symexpr::{EvalPoint, Expr, ExprError};

pub const OP_TOL: f64 = 1e-12;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum WeylError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },
    #[error("dimension {0} is too small")]
    TooSmall(usize),
    #[error("state {n} does not fit in a truncation of size {n_max}")]
    TruncationOverflow { n: usize, n_max: usize },
    #[error("cannot invert q K(|q|) = {target}")]
    InversionFailure { target: f64 },
    #[error("profile is not a diffeomorphism near q = {q}")]
    IrregularProfile { q: f64 },
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// A dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseOp(DMatrix<Complex64>);

impl DenseOp {
    pub fn new(m: DMatrix<Complex64>) -> DenseOp {
        assert!(m.is_square(), "operators are square");
        DenseOp(m)
    }

    pub fn identity(d: usize) -> DenseOp {
        DenseOp(DMatrix::identity(d, d))
    }

    pub fn diagonal(entries: &[Complex64]) -> DenseOp {
        DenseOp(DMatrix::from_diagonal(&DVector::from_column_slice(entries)))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i, j)]
    }

    pub fn adjoint(&self) -> DenseOp {
        DenseOp(self.0.adjoint())
    }

    fn check_dim(&self, other: &DenseOp) -> Result<(), WeylError> {
        if self.dim() != other.dim() {
            return Err(WeylError::DimMismatch { left: self.dim(), right: other.dim() });
        }
        Ok(())
    }

    pub fn mul(&self, other: &DenseOp) -> Result<DenseOp, WeylError> {
        self.check_dim(other)?;
        Ok(DenseOp(&self.0 * &other.0))
    }

    pub fn pow(&self, k: u32) -> DenseOp {
        (0..k).fold(DenseOp::identity(self.dim()), |acc, _| DenseOp(&acc.0 * &self.0))
    }

    pub fn scale(&self, c: Complex64) -> DenseOp {
        DenseOp(&self.0 * c)
    }

    pub fn sub(&self, other: &DenseOp) -> Result<DenseOp, WeylError> {
        self.check_dim(other)?;
        Ok(DenseOp(&self.0 - &other.0))
    }

    /// `[A, B] = AB - BA`.
    pub fn commutator(&self, other: &DenseOp) -> Result<DenseOp, WeylError> {
        self.mul(other)?.sub(&other.mul(self)?)
    }

    pub fn apply(&self, x: &DVector<Complex64>) -> Result<DVector<Complex64>, WeylError> {
        if x.len() != self.dim() {
            return Err(WeylError::DimMismatch { left: self.dim(), right: x.len() });
        }
        Ok(&self.0 * x)
    }

    /// `max |a_ij - b_ij|`.
    pub fn max_deviation(&self, other: &DenseOp) -> Result<f64, WeylError> {
        Ok(self.sub(other)?.0.iter().map(|z| z.norm()).fold(0.0, f64::max))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        DenseOp(self.0.adjoint() * &self.0).max_deviation(&DenseOp::identity(self.dim())).is_ok_and(|d| d <= tol)
    }

    pub fn is_self_adjoint(&self, tol: f64) -> bool {
        self.max_deviation(&self.adjoint()).is_ok_and(|d| d <= tol)
    }
}

/// Outcome of a numeric check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NumericCheck {
    pub pass: bool,
    pub deviation: f64,
}

impl NumericCheck {
    pub fn within(deviation: f64, tol: f64) -> NumericCheck {
        NumericCheck { pass: deviation <= tol, deviation }
    }
}

/// `e^{2πi k / d}`.
pub fn root_of_unity(d: usize, k: i64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * (k.rem_euclid(d as i64)) as f64 / d as f64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClockShift {
    /// `diag(1, ζ, …, ζ^{d-1})`.
    pub u: DenseOp,
    /// `V e_k = e_{k+1 mod d}`.
    pub v: DenseOp,
    pub zeta: Complex64,
}

pub fn clock_shift(d: usize) -> Result<ClockShift, WeylError> {
    if d < 2 {
        return Err(WeylError::TooSmall(d));
    }
    let u = DenseOp::diagonal(&(0..d as i64).map(|k| root_of_unity(d, k)).collect::<Vec<_>>());
    let mut v = DMatrix::zeros(d, d);
    for k in 0..d {
        v[((k + 1) % d, k)] = Complex64::new(1.0, 0.0);
    }
    Ok(ClockShift { u, v: DenseOp(v), zeta: root_of_unity(d, 1) })
}

/// `‖UV − phase·VU‖_max ≤ 1e-12`.
pub fn weyl_commutation_check(u: &DenseOp, v: &DenseOp, phase: Complex64) -> Result<NumericCheck, WeylError> {
    let uv = u.mul(v)?;
    let vu = v.mul(u)?.scale(phase);
    Ok(NumericCheck::within(uv.max_deviation(&vu)?, OP_TOL))
}

/// Worst deviation from `(U^c V^e)(U^a V^b) = ζ^{bc−ae}(U^a V^b)(U^c V^e)`
/// over all exponents in `0..d`.
pub fn phase_law_deviation(d: usize) -> Result<f64, WeylError> {
    let cs = clock_shift(d)?;
    let up: Vec<DenseOp> = (0..d as u32).map(|k| cs.u.pow(k)).collect();
    let vp: Vec<DenseOp> = (0..d as u32).map(|k| cs.v.pow(k)).collect();
    let mut words = Vec::with_capacity(d * d);
    for a in 0..d {
        for b in 0..d {
            words.push((a, b, up[a].mul(&vp[b])?));
        }
    }
    let mut worst: f64 = 0.0;
    for (a, b, x) in &words {
        for (c, e, y) in &words {
            let k = (*b * *c) as i64 - (*a * *e) as i64;
            let lhs = y.mul(x)?;
            let rhs = x.mul(y)?.scale(root_of_unity(d, k));
            worst = worst.max(lhs.max_deviation(&rhs)?);
        }
    }
    Ok(worst)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Fock {
    pub a: DenseOp,
    pub a_dag: DenseOp,
    pub number: DenseOp,
}

/// Creation and annihilation operators on `span{|0⟩, …, |n_max−1⟩}`.
pub fn truncated_fock(n_max: usize) -> Result<Fock, WeylError> {
    if n_max < 2 {
        return Err(WeylError::TooSmall(n_max));
    }
    let mut a = DMatrix::zeros(n_max, n_max);
    for n in 1..n_max {
        a[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
    }
    let a = DenseOp(a);
    let a_dag = a.adjoint();
    let number = a_dag.mul(&a)?;
    Ok(Fock { a, a_dag, number })
}

/// Entries of `[a, a†] − I` larger than the operator tolerance.
pub fn commutator_defect(fock: &Fock) -> Result<Vec<((usize, usize), Complex64)>, WeylError> {
    let c = fock.a.commutator(&fock.a_dag)?;
    let d = c.sub(&DenseOp::identity(c.dim()))?;
    let mut out = Vec::new();
    for i in 0..d.dim() {
        for j in 0..d.dim() {
            let z = d.get(i, j);
            if z.norm() > OP_TOL {
                out.push(((i, j), z));
            }
        }
    }
    Ok(out)
}

pub fn vacuum(n_max: usize) -> DVector<Complex64> {
    let mut v = DVector::zeros(n_max);
    v[0] = Complex64::new(1.0, 0.0);
    v
}

/// `|n⟩ = (a†)^n |0⟩ / √(n!)`.
pub fn fock_state(n: usize, a_dag: &DenseOp, vacuum: &DVector<Complex64>) -> Result<DVector<Complex64>, WeylError> {
    if n >= a_dag.dim() {
        return Err(WeylError::TruncationOverflow { n, n_max: a_dag.dim() });
    }
    let mut state = vacuum.clone();
    for k in 1..=n {
        state = a_dag.apply(&state)? / Complex64::new((k as f64).sqrt(), 0.0);
    }
    Ok(state)
}

/// How `Q = q K(|q|)` is undone.
#[derive(Clone, Debug, PartialEq)]
pub enum InverseMode {
    /// `q` as an expression in `Q`.
    ClosedForm(Expr),
    /// Bisection on the half line containing the target.
    Numeric,
}

/// The plane with the linear structure transported by
/// `φ(q, p) = (q K(|q|), p)`.
#[derive(Clone, Debug, PartialEq)]
pub struct NonlinearStructure {
    /// `K` as an expression in `u`.
    k: Expr,
    /// `d/du (u K(u))`.
    slope: Expr,
    inverse: InverseMode,
}

pub const BISECTION_TOL: f64 = 1e-12;
pub const BISECTION_MAX_ITER: usize = 200;

impl NonlinearStructure {
    /// Checks `K(u) + u K'(u) ≠ 0` on a grid of `u ∈ [0, 4]`.
    pub fn new(k: Expr, inverse: InverseMode) -> Result<NonlinearStructure, WeylError> {
        let slope = (Expr::sym("u") * k.clone()).differentiate("u");
        for i in 0..=64 {
            let u = 4.0 * i as f64 / 64.0;
            let s = slope.eval(&EvalPoint::from_pairs(&[("u", u)]))?;
            if !s.is_finite() || s.abs() < 1e-9 {
                return Err(WeylError::IrregularProfile { q: u });
            }
        }
        Ok(NonlinearStructure { k, slope, inverse })
    }

    pub fn profile(&self) -> &Expr {
        &self.k
    }

    fn k_at(&self, u: f64) -> Result<f64, WeylError> {
        Ok(self.k.eval(&EvalPoint::from_pairs(&[("u", u)]))?)
    }

    fn radial(&self, u: f64) -> Result<f64, WeylError> {
        Ok(u * self.k_at(u)?)
    }

    /// `φ(q, p)`.
    pub fn forward(&self, (q, p): (f64, f64)) -> Result<(f64, f64), WeylError> {
        Ok((q * self.k_at(q.abs())?, p))
    }

    /// `φ⁻¹(Q, P)`.
    pub fn inverse(&self, (big_q, p): (f64, f64)) -> Result<(f64, f64), WeylError> {
        match &self.inverse {
            InverseMode::ClosedForm(e) => Ok((e.eval(&EvalPoint::from_pairs(&[("Q", big_q)]))?, p)),
            InverseMode::Numeric => Ok((self.invert_radial(big_q)?, p)),
        }
    }

    /// Solves `q K(|q|) = target` with a geometrically grown bracket.
    fn invert_radial(&self, target: f64) -> Result<f64, WeylError> {
        if target == 0.0 {
            return Ok(0.0);
        }
        let fail = || WeylError::InversionFailure { target };
        let goal = target.abs();
        let sign = if self.radial(1.0)? > 0.0 { 1.0 } else { -1.0 };
        let g = |u: f64| -> Result<f64, WeylError> { Ok(sign * self.radial(u)? - goal) };
        let (mut lo, mut hi) = (0.0, 1.0);
        let mut grown = 0;
        while g(hi)? < 0.0 {
            lo = hi;
            hi *= 2.0;
            grown += 1;
            if grown > 64 || !hi.is_finite() {
                return Err(fail());
            }
        }
        for _ in 0..BISECTION_MAX_ITER {
            let mid = 0.5 * (lo + hi);
            if g(mid)? < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= BISECTION_TOL * hi.max(1.0) {
                let u = self.polish(0.5 * (lo + hi), &g)?;
                return Ok(target.signum() * sign * u);
            }
        }
        Err(fail())
    }

    /// A few Newton steps from a converged bracket, then single-ulp moves,
    /// each kept only while the residual shrinks, so that representable
    /// roots come out exact.
    fn polish(&self, mut u: f64, g: &impl Fn(f64) -> Result<f64, WeylError>) -> Result<f64, WeylError> {
        let mut r = g(u)?;
        for _ in 0..4 {
            if r == 0.0 {
                break;
            }
            let s = self.slope.eval(&EvalPoint::from_pairs(&[("u", u)]))?;
            let next = u - r / s.abs();
            let rn = g(next)?;
            if rn.abs() >= r.abs() {
                break;
            }
            (u, r) = (next, rn);
        }
        // Newton stalls once the correction is below half an ulp
        for _ in 0..8 {
            if r == 0.0 {
                break;
            }
            let next = if r < 0.0 { u.next_up() } else { u.next_down() };
            let rn = g(next)?;
            if rn.abs() >= r.abs() {
                break;
            }
            (u, r) = (next, rn);
        }
        Ok(u)
    }

    /// `φ⁻¹(φ(z₁) + φ(z₂))`.
    pub fn add(&self, z1: (f64, f64), z2: (f64, f64)) -> Result<(f64, f64), WeylError> {
        // φ fixes the origin; skipping the round trip keeps the identity exact
        // where the floating forward map is not injective
        if z2 == (0.0, 0.0) {
            return Ok(z1);
        }
        if z1 == (0.0, 0.0) {
            return Ok(z2);
        }
        let (a, b) = (self.forward(z1)?, self.forward(z2)?);
        self.inverse((a.0 + b.0, a.1 + b.1))
    }

    /// `φ⁻¹(a φ(z))`.
    pub fn scale(&self, a: f64, z: (f64, f64)) -> Result<(f64, f64), WeylError> {
        let w = self.forward(z)?;
        self.inverse((a * w.0, a * w.1))
    }
}

pub fn nonlinear_add(s: &NonlinearStructure, z1: (f64, f64), z2: (f64, f64)) -> Result<(f64, f64), WeylError> {
    s.add(z1, z2)
}

pub fn nonlinear_scale(s: &NonlinearStructure, a: f64, z: (f64, f64)) -> Result<(f64, f64), WeylError> {
    s.scale(a, z)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TranslationReport {
    /// `(x, x +_φ β)` on the grid.
    pub table: Vec<(f64, f64)>,
    /// `max |(x +_φ β) +_φ β′ − x +_φ (β +_φ β′)|`.
    pub group_law_residual: f64,
}

/// Tabulates `x ↦ x +_φ β` on the position axis and checks that shifting by
/// `β` then `β′` is the shift by `β +_φ β′`.
pub fn nonlinear_translation_action(s: &NonlinearStructure, beta: f64, beta2: f64, grid: &[f64]) -> Result<TranslationReport, WeylError> {
    let shift = |x: f64, b: f64| -> Result<f64, WeylError> { Ok(s.add((x, 0.0), (b, 0.0))?.0) };
    let combined = shift(beta, beta2)?;
    let mut table = Vec::with_capacity(grid.len());
    let mut residual: f64 = 0.0;
    for &x in grid {
        let once = shift(x, beta)?;
        table.push((x, once));
        residual = residual.max((shift(once, beta2)? - shift(x, combined)?).abs());
    }
    Ok(TranslationReport { table, group_law_residual: residual })
}
