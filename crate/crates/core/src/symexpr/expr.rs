//! Immutable expression trees with canonicalizing constructors.
//!
//! Every `Expr` is built through the smart constructors below, so a tree is
//! always in canonical form: sums and products are flattened and sorted,
//! numeric constants are folded, like terms and like bases are merged and
//! `sin(x)^2 + cos(x)^2` collapses to `1`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact rational constant.
pub type Rational = BigRational;

/// A symbolic scalar expression.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Expr(Arc<Node>);

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Node {
    Const(Rational),
    Sym(Arc<str>),
    Call(Func, Expr),
    Pow(Expr, Rational),
    Mul(Vec<Expr>),
    Add(Vec<Expr>),
}

/// Unary functions. `Opaque` is a user-declared function symbol; `order`
/// counts how many times it has been differentiated.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Abs,
    Sign,
    Opaque { name: Arc<str>, order: u32 },
}

impl Func {
    pub fn builtin(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "abs" => Func::Abs,
            "sign" => Func::Sign,
            _ => return None,
        })
    }

    pub fn opaque(name: &str) -> Func {
        Func::Opaque { name: Arc::from(name), order: 0 }
    }

    pub fn name(&self) -> String {
        match self {
            Func::Sin => "sin".into(),
            Func::Cos => "cos".into(),
            Func::Tan => "tan".into(),
            Func::Exp => "exp".into(),
            Func::Log => "log".into(),
            Func::Abs => "abs".into(),
            Func::Sign => "sign".into(),
            Func::Opaque { name, order } => format!("{}{}", name, "'".repeat(*order as usize)),
        }
    }
}

/// Names reserved for builtin functions (including `sqrt`, which the parser
/// lowers to a half power).
pub const BUILTIN_FUNCTIONS: &[&str] = &["sin", "cos", "tan", "exp", "log", "sqrt", "abs", "sign"];

pub(crate) fn rat(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

pub(crate) fn ratio(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl Expr {
    fn from_node(node: Node) -> Expr {
        Expr(Arc::new(node))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn zero() -> Expr {
        Expr::constant(Rational::zero())
    }

    pub fn one() -> Expr {
        Expr::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Expr {
        Expr::from_node(Node::Const(c))
    }

    pub fn int(n: i64) -> Expr {
        Expr::constant(rat(n))
    }

    pub fn frac(n: i64, d: i64) -> Expr {
        Expr::constant(ratio(n, d))
    }

    /// Exact conversion of a finite float (every finite double is rational).
    pub fn from_f64(x: f64) -> Expr {
        Expr::constant(BigRational::from_float(x).expect("finite float"))
    }

    pub fn sym(name: &str) -> Expr {
        Expr::from_node(Node::Sym(Arc::from(name)))
    }

    pub fn as_const(&self) -> Option<&Rational> {
        match self.node() {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn as_symbol(&self) -> Option<&str> {
        match self.node() {
            Node::Sym(s) => Some(s),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const().is_some_and(Zero::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.as_const().is_some_and(One::is_one)
    }

    /// Builtin or opaque call. `abs` and `sign` fold on constants.
    pub fn call(f: Func, arg: Expr) -> Expr {
        if let Some(c) = arg.as_const() {
            match f {
                Func::Abs => return Expr::constant(c.abs()),
                Func::Sign => return Expr::constant(c.signum()),
                Func::Sin | Func::Tan if c.is_zero() => return Expr::zero(),
                Func::Cos | Func::Exp if c.is_zero() => return Expr::one(),
                Func::Log if c.is_one() => return Expr::zero(),
                _ => {}
            }
        }
        match (&f, arg.node()) {
            (Func::Abs, Node::Call(Func::Abs, _)) => return arg,
            (Func::Sign, Node::Call(Func::Sign, _)) => return arg,
            _ => {}
        }
        Expr::from_node(Node::Call(f, arg))
    }

    pub fn opaque_call(name: &str, arg: Expr) -> Expr {
        Expr::call(Func::opaque(name), arg)
    }

    pub fn sin(self) -> Expr {
        Expr::call(Func::Sin, self)
    }
    pub fn cos(self) -> Expr {
        Expr::call(Func::Cos, self)
    }
    pub fn tan(self) -> Expr {
        Expr::call(Func::Tan, self)
    }
    pub fn exp(self) -> Expr {
        Expr::call(Func::Exp, self)
    }
    pub fn ln(self) -> Expr {
        Expr::call(Func::Log, self)
    }
    pub fn abs(self) -> Expr {
        Expr::call(Func::Abs, self)
    }
    pub fn sign(self) -> Expr {
        Expr::call(Func::Sign, self)
    }
    pub fn sqrt(self) -> Expr {
        Expr::pow(self, ratio(1, 2))
    }

    pub fn powi(self, n: i64) -> Expr {
        Expr::pow(self, rat(n))
    }

    pub fn recip(self) -> Expr {
        Expr::pow(self, rat(-1))
    }

    /// `base ^ exponent` with a rational exponent.
    pub fn pow(base: Expr, exponent: Rational) -> Expr {
        if exponent.is_zero() {
            return Expr::one();
        }
        if exponent.is_one() {
            return base;
        }
        match base.node() {
            Node::Const(c) => {
                if let Some(folded) = fold_const_pow(c, &exponent) {
                    return Expr::constant(folded);
                }
            }
            Node::Pow(inner, e) if exponent.is_integer() => {
                return Expr::pow(inner.clone(), e * &exponent);
            }
            Node::Mul(factors) if exponent.is_integer() => {
                return Expr::mul(factors.iter().map(|f| Expr::pow(f.clone(), exponent.clone())));
            }
            _ => {}
        }
        Expr::from_node(Node::Pow(base, exponent))
    }

    /// Canonical product.
    pub fn mul<I: IntoIterator<Item = Expr>>(factors: I) -> Expr {
        let mut coeff = Rational::one();
        // base -> accumulated exponent
        let mut bases: BTreeMap<Expr, Rational> = BTreeMap::new();
        let mut stack: Vec<Expr> = factors.into_iter().collect();
        while let Some(f) = stack.pop() {
            match f.node() {
                Node::Const(c) => coeff *= c,
                Node::Mul(inner) => stack.extend(inner.iter().cloned()),
                Node::Pow(b, e) => *bases.entry(b.clone()).or_insert_with(Rational::zero) += e,
                _ => *bases.entry(f.clone()).or_insert_with(Rational::zero) += Rational::one(),
            }
        }
        if coeff.is_zero() {
            return Expr::zero();
        }
        let mut out: Vec<Expr> = Vec::with_capacity(bases.len() + 1);
        for (b, e) in bases {
            if e.is_zero() {
                continue;
            }
            let p = if e.is_one() { b } else { Expr::pow(b, e) };
            match p.node() {
                Node::Const(c) => coeff *= c,
                Node::Mul(inner) => {
                    for x in inner {
                        match x.node() {
                            Node::Const(c) => coeff *= c,
                            _ => out.push(x.clone()),
                        }
                    }
                }
                _ => out.push(p),
            }
        }
        if out.is_empty() {
            return Expr::constant(coeff);
        }
        // numeric coefficient times a single sum distributes
        if out.len() == 1 && !coeff.is_one() {
            if let Node::Add(terms) = out[0].node() {
                let c = Expr::constant(coeff);
                return Expr::add(terms.iter().map(|t| Expr::mul([c.clone(), t.clone()])));
            }
        }
        out.sort();
        if coeff.is_one() && out.len() == 1 {
            return out.pop().unwrap();
        }
        if !coeff.is_one() {
            out.insert(0, Expr::constant(coeff));
        }
        Expr::from_node(Node::Mul(out))
    }

    /// Canonical sum.
    pub fn add<I: IntoIterator<Item = Expr>>(terms: I) -> Expr {
        let mut constant = Rational::zero();
        let mut like: BTreeMap<Expr, Rational> = BTreeMap::new();
        let mut stack: Vec<Expr> = terms.into_iter().collect();
        while let Some(t) = stack.pop() {
            match t.node() {
                Node::Const(c) => constant += c,
                Node::Add(inner) => stack.extend(inner.iter().cloned()),
                _ => {
                    let (c, rest) = t.split_coeff();
                    *like.entry(rest).or_insert_with(Rational::zero) += c;
                }
            }
        }
        like.retain(|_, c| !c.is_zero());
        collapse_pythagorean(&mut like, &mut constant);
        let mut out: Vec<Expr> = like.into_iter().map(|(rest, c)| with_coeff(c, rest)).collect();
        if !constant.is_zero() {
            out.push(Expr::constant(constant));
        }
        match out.len() {
            0 => Expr::zero(),
            1 => out.pop().unwrap(),
            _ => {
                out.sort();
                Expr::from_node(Node::Add(out))
            }
        }
    }

    pub fn neg(self) -> Expr {
        Expr::mul([Expr::int(-1), self])
    }

    pub fn sub(self, other: Expr) -> Expr {
        Expr::add([self, other.neg()])
    }

    pub fn div(self, other: Expr) -> Expr {
        Expr::mul([self, other.recip()])
    }

    /// Numeric coefficient and the remaining (coefficient-free) factor.
    pub fn split_coeff(&self) -> (Rational, Expr) {
        match self.node() {
            Node::Const(c) => (c.clone(), Expr::one()),
            Node::Mul(fs) => match fs[0].node() {
                Node::Const(c) => {
                    let rest = if fs.len() == 2 {
                        fs[1].clone()
                    } else {
                        Expr::from_node(Node::Mul(fs[1..].to_vec()))
                    };
                    (c.clone(), rest)
                }
                _ => (Rational::one(), self.clone()),
            },
            _ => (Rational::one(), self.clone()),
        }
    }

    /// Free coordinate symbols (function names excluded).
    pub fn symbols(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut BTreeSet<String>) {
        match self.node() {
            Node::Const(_) => {}
            Node::Sym(s) => {
                out.insert(s.to_string());
            }
            Node::Call(_, a) | Node::Pow(a, _) => a.collect_symbols(out),
            Node::Mul(xs) | Node::Add(xs) => xs.iter().for_each(|x| x.collect_symbols(out)),
        }
    }

    /// Opaque function names with the highest derivative order used.
    pub fn opaque_functions(&self) -> BTreeMap<String, u32> {
        let mut out = BTreeMap::new();
        self.collect_opaque(&mut out);
        out
    }

    fn collect_opaque(&self, out: &mut BTreeMap<String, u32>) {
        match self.node() {
            Node::Const(_) | Node::Sym(_) => {}
            Node::Call(f, a) => {
                if let Func::Opaque { name, order } = f {
                    let e = out.entry(name.to_string()).or_insert(0);
                    *e = (*e).max(*order);
                }
                a.collect_opaque(out);
            }
            Node::Pow(a, _) => a.collect_opaque(out),
            Node::Mul(xs) | Node::Add(xs) => xs.iter().for_each(|x| x.collect_opaque(out)),
        }
    }

    pub fn depends_on(&self, name: &str) -> bool {
        match self.node() {
            Node::Const(_) => false,
            Node::Sym(s) => &**s == name,
            Node::Call(_, a) | Node::Pow(a, _) => a.depends_on(name),
            Node::Mul(xs) | Node::Add(xs) => xs.iter().any(|x| x.depends_on(name)),
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self.node() {
            Node::Const(_) | Node::Sym(_) => 1,
            Node::Call(_, a) | Node::Pow(a, _) => 1 + a.size(),
            Node::Mul(xs) | Node::Add(xs) => 1 + xs.iter().map(Expr::size).sum::<usize>(),
        }
    }

    /// Distributes products over sums and expands small positive integer
    /// powers of sums, then re-canonicalizes.
    pub fn expand(&self) -> Expr {
        match self.node() {
            Node::Const(_) | Node::Sym(_) => self.clone(),
            Node::Call(f, a) => Expr::call(f.clone(), a.expand()),
            Node::Add(xs) => Expr::add(xs.iter().map(Expr::expand)),
            Node::Pow(b, e) => {
                let b = b.expand();
                match (b.node(), e.to_integer().to_u32()) {
                    (Node::Add(_), Some(n)) if e.is_integer() && (2..=6).contains(&n) => {
                        let mut acc = Expr::one();
                        for _ in 0..n {
                            acc = distribute(&acc, &b);
                        }
                        acc
                    }
                    _ => Expr::pow(b, e.clone()),
                }
            }
            Node::Mul(xs) => xs.iter().map(Expr::expand).fold(Expr::one(), |acc, x| distribute(&acc, &x)),
        }
    }
}

fn distribute(a: &Expr, b: &Expr) -> Expr {
    let terms = |e: &Expr| -> Vec<Expr> {
        match e.node() {
            Node::Add(xs) => xs.clone(),
            _ => vec![e.clone()],
        }
    };
    let (ta, tb) = (terms(a), terms(b));
    let mut out = Vec::with_capacity(ta.len() * tb.len());
    for x in &ta {
        for y in &tb {
            out.push(Expr::mul([x.clone(), y.clone()]));
        }
    }
    Expr::add(out)
}

fn with_coeff(c: Rational, rest: Expr) -> Expr {
    if c.is_one() {
        return rest;
    }
    match rest.node() {
        Node::Const(r) => Expr::constant(c * r),
        Node::Mul(fs) => {
            let mut v = Vec::with_capacity(fs.len() + 1);
            v.push(Expr::constant(c));
            v.extend(fs.iter().cloned());
            Expr::from_node(Node::Mul(v))
        }
        _ => Expr::from_node(Node::Mul(vec![Expr::constant(c), rest])),
    }
}

/// Rewrites `c*R*sin(a)^2 + c*R*cos(a)^2` into `c*R`.
fn collapse_pythagorean(like: &mut BTreeMap<Expr, Rational>, constant: &mut Rational) {
    loop {
        let mut hit: Option<(Expr, Expr, Expr, Rational)> = None;
        'search: for (key, c) in like.iter() {
            let factors: Vec<Expr> = match key.node() {
                Node::Mul(fs) => fs.clone(),
                _ => vec![key.clone()],
            };
            for (i, f) in factors.iter().enumerate() {
                if let Node::Pow(b, e) = f.node() {
                    if let Node::Call(Func::Sin, arg) = b.node() {
                        if *e == rat(2) {
                            let cos2 = Expr::pow(Expr::call(Func::Cos, arg.clone()), rat(2));
                            let mut others: Vec<Expr> = factors.clone();
                            others.remove(i);
                            let rest = Expr::mul(others.clone());
                            let partner = Expr::mul(others.into_iter().chain([cos2]));
                            if like.get(&partner) == Some(c) {
                                hit = Some((key.clone(), partner, rest, c.clone()));
                                break 'search;
                            }
                        }
                    }
                }
            }
        }
        match hit {
            None => return,
            Some((a, b, rest, c)) => {
                like.remove(&a);
                like.remove(&b);
                match rest.node() {
                    Node::Const(r) => *constant += c * r,
                    _ => {
                        let (rc, rr) = rest.split_coeff();
                        *like.entry(rr).or_insert_with(Rational::zero) += c * rc;
                    }
                }
                like.retain(|_, c| !c.is_zero());
            }
        }
    }
}

fn fold_const_pow(c: &Rational, e: &Rational) -> Option<Rational> {
    if c.is_zero() {
        return if e.is_positive() { Some(Rational::zero()) } else { None };
    }
    if c.is_one() {
        return Some(Rational::one());
    }
    let num = e.numer().to_i32()?;
    let den = e.denom().to_u32()?;
    if num.unsigned_abs() > 64 {
        return None;
    }
    let root = if den == 1 {
        c.clone()
    } else {
        if c.is_negative() && den % 2 == 0 {
            return None;
        }
        let n = exact_root(&c.numer().abs(), den)?;
        let d = exact_root(c.denom(), den)?;
        let r = BigRational::new(n, d);
        if c.is_negative() {
            -r
        } else {
            r
        }
    };
    let mut out = Rational::one();
    for _ in 0..num.unsigned_abs() {
        out *= &root;
    }
    Some(if num < 0 { out.recip() } else { out })
}

fn exact_root(n: &BigInt, k: u32) -> Option<BigInt> {
    let r = n.nth_root(k);
    if r.pow(k) == *n {
        Some(r)
    } else {
        None
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({})", self)
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Self {
        Expr::int(n)
    }
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::add([self, rhs])
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::sub(self, rhs)
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::mul([self, rhs])
    }
}

impl std::ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::div(self, rhs)
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

impl<'a> std::ops::Add<&'a Expr> for &'a Expr {
    type Output = Expr;
    fn add(self, rhs: &Expr) -> Expr {
        Expr::add([self.clone(), rhs.clone()])
    }
}

impl<'a> std::ops::Sub<&'a Expr> for &'a Expr {
    type Output = Expr;
    fn sub(self, rhs: &Expr) -> Expr {
        Expr::sub(self.clone(), rhs.clone())
    }
}

impl<'a> std::ops::Mul<&'a Expr> for &'a Expr {
    type Output = Expr;
    fn mul(self, rhs: &Expr) -> Expr {
        Expr::mul([self.clone(), rhs.clone()])
    }
}

impl<'a> std::ops::Div<&'a Expr> for &'a Expr {
    type Output = Expr;
    fn div(self, rhs: &Expr) -> Expr {
        Expr::div(self.clone(), rhs.clone())
    }
}

impl std::iter::Sum for Expr {
    fn sum<I: Iterator<Item = Expr>>(iter: I) -> Expr {
        Expr::add(iter)
    }
}

impl std::iter::Product for Expr {
    fn product<I: Iterator<Item = Expr>>(iter: I) -> Expr {
        Expr::mul(iter)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Expr {
        Expr::sym("x")
    }
    fn y() -> Expr {
        Expr::sym("y")
    }

    #[test]
    fn like_terms_cancel() {
        assert!((x() + y() - x() - y()).is_zero());
        assert_eq!(x() + x(), Expr::int(2) * x());
    }

    #[test]
    fn like_bases_merge() {
        assert_eq!(x() * x(), x().powi(2));
        assert!((x() * x().recip()).is_one());
        assert_eq!(x().sqrt() * x().sqrt(), x());
    }

    #[test]
    fn constants_fold() {
        assert_eq!(Expr::int(2) * Expr::frac(3, 4), Expr::frac(3, 2));
        assert_eq!(Expr::int(4).sqrt(), Expr::int(2));
        assert_eq!(Expr::int(-8).pow_r(1, 3), Expr::int(-2));
        assert!(matches!(Expr::int(2).sqrt().node(), Node::Pow(..)));
    }

    #[test]
    fn pythagorean_identity() {
        let s = x().sin().powi(2) + x().cos().powi(2);
        assert!(s.is_one());
        let t = Expr::int(3) * y() * x().sin().powi(2) + Expr::int(3) * y() * x().cos().powi(2);
        assert_eq!(t, Expr::int(3) * y());
    }

    #[test]
    fn coefficient_distributes_over_sum() {
        let e = Expr::int(2) * (x() + y()) - Expr::int(2) * x();
        assert_eq!(e, Expr::int(2) * y());
    }

    #[test]
    fn expand_products() {
        let e = ((x() + y()) * (x() - y())).expand();
        assert_eq!(e, x().powi(2) - y().powi(2));
        let e = (x() + Expr::one()).powi(2).expand();
        assert_eq!(e, x().powi(2) + Expr::int(2) * x() + Expr::one());
    }

    #[test]
    fn abs_sign_fold_on_constants() {
        assert_eq!(Expr::int(-3).abs(), Expr::int(3));
        assert!(Expr::zero().sign().is_zero());
    }

    impl Expr {
        fn pow_r(self, n: i64, d: i64) -> Expr {
            Expr::pow(self, ratio(n, d))
        }
    }
}
