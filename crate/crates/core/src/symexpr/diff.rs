use std::collections::BTreeMap;

use num_traits::One;

use super::expr::{rat, Expr, Func, Node};

impl Expr {
    /// Partial derivative with respect to the symbol `x`.
    ///
    /// `d|u| = sign(u) du` and `d sign(u) = 0`, so results that pass through
    /// `abs` are punctured at `u = 0`. Opaque functions step their
    /// derivative order: `d f(u) = f'(u) du`.
    pub fn differentiate(&self, x: &str) -> Expr {
        if !self.depends_on(x) {
            return Expr::zero();
        }
        match self.node() {
            Node::Const(_) => Expr::zero(),
            Node::Sym(s) => {
                if &**s == x {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Node::Add(terms) => Expr::add(terms.iter().map(|t| t.differentiate(x))),
            Node::Mul(fs) => {
                let mut terms = Vec::with_capacity(fs.len());
                for (i, fi) in fs.iter().enumerate() {
                    let d = fi.differentiate(x);
                    if d.is_zero() {
                        continue;
                    }
                    let others = fs.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, f)| f.clone());
                    terms.push(Expr::mul(others.chain([d])));
                }
                Expr::add(terms)
            }
            Node::Pow(b, e) => {
                // d b^e = e b^(e-1) db
                let db = b.differentiate(x);
                Expr::mul([Expr::constant(e.clone()), Expr::pow(b.clone(), e - rat(1)), db])
            }
            Node::Call(f, a) => {
                let da = a.differentiate(x);
                let outer = match f {
                    Func::Sin => a.clone().cos(),
                    Func::Cos => a.clone().sin().neg(),
                    Func::Tan => Expr::one() + a.clone().tan().powi(2),
                    Func::Exp => self.clone(),
                    Func::Log => a.clone().recip(),
                    Func::Abs => a.clone().sign(),
                    Func::Sign => Expr::zero(),
                    Func::Opaque { name, order } => {
                        Expr::call(Func::Opaque { name: name.clone(), order: order + 1 }, a.clone())
                    }
                };
                outer * da
            }
        }
    }

    /// Simultaneous substitution of symbols.
    pub fn substitute(&self, map: &BTreeMap<String, Expr>) -> Expr {
        if map.is_empty() {
            return self.clone();
        }
        match self.node() {
            Node::Const(_) => self.clone(),
            Node::Sym(s) => map.get(&**s).cloned().unwrap_or_else(|| self.clone()),
            Node::Call(f, a) => Expr::call(f.clone(), a.substitute(map)),
            Node::Pow(b, e) => Expr::pow(b.substitute(map), e.clone()),
            Node::Mul(fs) => Expr::mul(fs.iter().map(|f| f.substitute(map))),
            Node::Add(ts) => Expr::add(ts.iter().map(|t| t.substitute(map))),
        }
    }

    pub fn substitute_one(&self, name: &str, value: &Expr) -> Expr {
        let mut m = BTreeMap::new();
        m.insert(name.to_string(), value.clone());
        self.substitute(&m)
    }

    /// Replaces calls of the opaque function `name` (any derivative order)
    /// by `body` (written in the symbol `param`) and its derivatives.
    pub fn bind_function(&self, name: &str, param: &str, body: &Expr) -> Expr {
        match self.node() {
            Node::Const(_) | Node::Sym(_) => self.clone(),
            Node::Call(Func::Opaque { name: n, order }, a) if &**n == name => {
                let mut d = body.clone();
                for _ in 0..*order {
                    d = d.differentiate(param);
                }
                d.substitute_one(param, &a.bind_function(name, param, body))
            }
            Node::Call(f, a) => Expr::call(f.clone(), a.bind_function(name, param, body)),
            Node::Pow(b, e) => Expr::pow(b.bind_function(name, param, body), e.clone()),
            Node::Mul(fs) => Expr::mul(fs.iter().map(|f| f.bind_function(name, param, body))),
            Node::Add(ts) => Expr::add(ts.iter().map(|t| t.bind_function(name, param, body))),
        }
    }

    /// True when the exponent structure makes `self` a polynomial in its symbols.
    pub fn is_polynomial(&self) -> bool {
        match self.node() {
            Node::Const(_) | Node::Sym(_) => true,
            Node::Call(..) => false,
            Node::Pow(b, e) => e.is_integer() && *e >= One::one() && b.is_polynomial(),
            Node::Mul(xs) | Node::Add(xs) => xs.iter().all(Expr::is_polynomial),
        }
    }
}
