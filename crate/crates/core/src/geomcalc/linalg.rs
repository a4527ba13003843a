//! Small dense linear algebra over expressions, plus numeric rank.

use nalgebra::DMatrix;

use crate::symexpr::{is_zero, EvalPoint, Equality, Expr, FunctionEnv, SampleConfig};

use super::GeomError;

pub type ExprMatrix = Vec<Vec<Expr>>;

pub fn identity(n: usize) -> ExprMatrix {
    (0..n).map(|i| (0..n).map(|j| if i == j { Expr::one() } else { Expr::zero() }).collect()).collect()
}

pub fn matmul(a: &ExprMatrix, b: &ExprMatrix) -> ExprMatrix {
    let n = a.len();
    let k = b.len();
    let m = b.first().map_or(0, Vec::len);
    (0..n).map(|i| (0..m).map(|j| Expr::add((0..k).map(|l| &a[i][l] * &b[l][j]))).collect()).collect()
}

pub fn transpose(a: &ExprMatrix) -> ExprMatrix {
    let n = a.len();
    let m = a.first().map_or(0, Vec::len);
    (0..m).map(|j| (0..n).map(|i| a[i][j].clone()).collect()).collect()
}

fn minor(a: &ExprMatrix, row: usize, col: usize) -> ExprMatrix {
    a.iter()
        .enumerate()
        .filter(|(i, _)| *i != row)
        .map(|(_, r)| r.iter().enumerate().filter(|(j, _)| *j != col).map(|(_, x)| x.clone()).collect())
        .collect()
}

/// Determinant by cofactor expansion along the sparsest row.
pub fn det(a: &ExprMatrix) -> Expr {
    let n = a.len();
    match n {
        0 => return Expr::one(),
        1 => return a[0][0].clone(),
        2 => return &a[0][0] * &a[1][1] - &a[0][1] * &a[1][0],
        _ => {}
    }
    let row = (0..n).max_by_key(|&i| a[i].iter().filter(|x| x.is_zero()).count()).unwrap_or(0);
    let mut terms = Vec::new();
    for j in 0..n {
        if a[row][j].is_zero() {
            continue;
        }
        let sign = if (row + j) % 2 == 0 { Expr::one() } else { Expr::int(-1) };
        terms.push(Expr::mul([sign, a[row][j].clone(), det(&minor(a, row, j))]));
    }
    Expr::add(terms)
}

pub fn adjugate(a: &ExprMatrix) -> ExprMatrix {
    let n = a.len();
    if n == 1 {
        return vec![vec![Expr::one()]];
    }
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let c = det(&minor(a, j, i));
                    if (i + j) % 2 == 0 {
                        c
                    } else {
                        c.neg()
                    }
                })
                .collect()
        })
        .collect()
}

/// Inverse via adjugate over determinant. Fails with a sample point when the
/// determinant vanishes identically.
pub fn inverse(a: &ExprMatrix, cfg: &SampleConfig) -> Result<ExprMatrix, GeomError> {
    let d = det(a);
    if let Some(w) = vanishing_witness(&d, cfg) {
        return Err(GeomError::SingularJacobian(w));
    }
    let inv_d = d.recip();
    Ok(adjugate(a).into_iter().map(|r| r.into_iter().map(|x| x * inv_d.clone()).collect()).collect())
}

/// A sample point when `e` is identically zero.
pub(crate) fn vanishing_witness(e: &Expr, cfg: &SampleConfig) -> Option<EvalPoint> {
    match is_zero(e, cfg) {
        Equality::NotEqual(_) => None,
        _ => Some(cfg.admissible_points(&[e]).into_iter().next().unwrap_or_default()),
    }
}

/// Solves `a x = b` by Gaussian elimination. A pivot is accepted only when
/// it is certified nonzero by sampling; entries certified zero are replaced
/// by exact zeros so later steps see the cancellation.
pub fn solve(a: &ExprMatrix, b: &[Expr], cfg: &SampleConfig) -> Result<Vec<Expr>, GeomError> {
    let n = a.len();
    let mut m: Vec<Vec<Expr>> = a.iter().zip(b).map(|(r, bi)| r.iter().cloned().chain([bi.clone()]).collect()).collect();
    for col in 0..n {
        let mut pivot = None;
        for r in col..n {
            if m[r][col].is_zero() {
                continue;
            }
            match is_zero(&m[r][col], cfg) {
                Equality::NotEqual(_) => {
                    pivot = Some(r);
                    break;
                }
                _ => m[r][col] = Expr::zero(),
            }
        }
        let Some(p) = pivot else {
            let w = cfg.admissible_points(&a.iter().flatten().collect::<Vec<_>>()).into_iter().next().unwrap_or_default();
            return Err(GeomError::SingularJacobian(w));
        };
        m.swap(col, p);
        let inv = m[col][col].clone().recip();
        for c in col..=n {
            m[col][c] = (&m[col][c] * &inv).expand();
        }
        for r in 0..n {
            if r == col || m[r][col].is_zero() {
                continue;
            }
            let factor = m[r][col].clone();
            for c in col..=n {
                let updated = (&m[r][c] - &(&factor * &m[col][c])).expand();
                m[r][c] = updated;
            }
            m[r][col] = Expr::zero();
        }
    }
    Ok(m.into_iter().map(|r| r[n].clone()).collect())
}

pub fn numeric(a: &ExprMatrix, p: &EvalPoint, env: &FunctionEnv) -> Option<DMatrix<f64>> {
    let n = a.len();
    let m = a.first().map_or(0, Vec::len);
    let mut out = DMatrix::zeros(n, m);
    for i in 0..n {
        for j in 0..m {
            out[(i, j)] = a[i][j].eval_with(p, env).ok()?;
        }
    }
    Some(out)
}

/// Numeric rank with relative singular-value cutoff.
pub fn numeric_rank(m: &DMatrix<f64>) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > 1e-9 * max.max(1.0)).count()
}

/// Minimum and maximum numeric rank over the sample points.
pub fn rank_range(a: &ExprMatrix, cfg: &SampleConfig) -> Option<(usize, usize, EvalPoint)> {
    let exprs: Vec<&Expr> = a.iter().flatten().collect();
    let pts = cfg.admissible_points(&exprs);
    let mut lo: Option<(usize, EvalPoint)> = None;
    let mut hi = 0;
    for p in pts {
        let r = numeric_rank(&numeric(a, &p, &cfg.env)?);
        hi = hi.max(r);
        if lo.as_ref().is_none_or(|(l, _)| r < *l) {
            lo = Some((r, p));
        }
    }
    lo.map(|(l, p)| (l, hi, p))
}

pub fn matrices_equal(a: &ExprMatrix, b: &ExprMatrix, cfg: &SampleConfig) -> Equality {
    let pairs: Vec<(Expr, Expr)> =
        a.iter().flatten().cloned().zip(b.iter().flatten().cloned()).collect();
    crate::symexpr::equal_all(&pairs, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symexpr::equal;

    fn s(n: &str) -> Expr {
        Expr::sym(n)
    }

    #[test]
    fn det_and_inverse_of_symbolic_2x2() {
        let a = vec![vec![s("a"), s("b")], vec![s("c"), s("d")]];
        assert_eq!(det(&a), s("a") * s("d") - s("b") * s("c"));
        let cfg = SampleConfig::default();
        let inv = inverse(&a, &cfg).unwrap();
        assert!(matrices_equal(&matmul(&a, &inv), &identity(2), &cfg).is_equal());
    }

    #[test]
    fn det_3x3_matches_expansion() {
        let a: ExprMatrix = (0..3).map(|i| (0..3).map(|j| Expr::int(((i * 3 + j) * (i + 2)) as i64 % 7)).collect()).collect();
        // numeric oracle
        let num = DMatrix::from_fn(3, 3, |i, j| (((i * 3 + j) * (i + 2)) % 7) as f64);
        let d = det(&a).as_const().cloned().unwrap();
        assert!((num_traits::ToPrimitive::to_f64(&d).unwrap() - num.determinant()).abs() < 1e-9);
    }

    #[test]
    fn solve_symbolic_system() {
        let cfg = SampleConfig::default();
        let a = vec![vec![Expr::zero(), s("x")], vec![Expr::int(2), s("y")]];
        let b = vec![s("x") * s("y"), Expr::int(4)];
        let sol = solve(&a, &b, &cfg).unwrap();
        assert!(equal(&sol[1], &s("y"), &cfg).is_equal());
        assert!(equal(&sol[0], &(Expr::int(2) - s("y") * s("y") / Expr::int(2)), &cfg).is_equal());
    }

    #[test]
    fn singular_inputs_are_reported() {
        let cfg = SampleConfig::default();
        let a = vec![vec![s("x"), s("x")], vec![s("y"), s("y")]];
        assert!(matches!(inverse(&a, &cfg), Err(GeomError::SingularJacobian(_))));
        assert!(matches!(solve(&a, &[Expr::one(), Expr::one()], &cfg), Err(GeomError::SingularJacobian(_))));
    }

    #[test]
    fn rank_of_rank_one_matrix() {
        let cfg = SampleConfig::default();
        let a = vec![vec![s("x"), s("y")], vec![Expr::int(2) * s("x"), Expr::int(2) * s("y")]];
        let (lo, hi, _) = rank_range(&a, &cfg).unwrap();
        assert_eq!((lo, hi), (1, 1));
    }
}
