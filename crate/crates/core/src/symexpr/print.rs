//! Printer producing text that the parser reads back to the same tree.

use std::fmt;

use num_traits::{One, Signed};

use super::expr::{Expr, Node, Rational};

fn fmt_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn is_atom(e: &Expr) -> bool {
    match e.node() {
        Node::Sym(_) | Node::Call(..) => true,
        Node::Const(c) => c.is_integer() && !c.is_negative(),
        _ => false,
    }
}

fn write_factor(f: &mut fmt::Formatter<'_>, e: &Expr) -> fmt::Result {
    match e.node() {
        Node::Add(_) => write!(f, "({})", e),
        Node::Const(c) if !c.is_integer() || c.is_negative() => write!(f, "({})", e),
        _ => write!(f, "{}", e),
    }
}

fn write_power(f: &mut fmt::Formatter<'_>, base: &Expr, exp: &Rational) -> fmt::Result {
    if is_atom(base) {
        write!(f, "{}", base)?;
    } else {
        write!(f, "({})", base)?;
    }
    if exp.is_integer() && !exp.is_negative() {
        write!(f, "^{}", exp.numer())
    } else {
        write!(f, "^({})", fmt_rational(exp))
    }
}

/// Writes a coefficient-free product as `num/den`.
fn write_product(f: &mut fmt::Formatter<'_>, factors: &[Expr], leading: Option<&Rational>) -> fmt::Result {
    let mut num: Vec<&Expr> = Vec::new();
    let mut den: Vec<Expr> = Vec::new();
    for x in factors {
        match x.node() {
            Node::Pow(b, e) if e.is_negative() => den.push(Expr::pow(b.clone(), -e.clone())),
            _ => num.push(x),
        }
    }
    let mut first = true;
    if let Some(c) = leading {
        write!(f, "{}", fmt_rational(c))?;
        first = false;
    }
    for x in &num {
        if !first {
            write!(f, "*")?;
        }
        write_factor(f, x)?;
        first = false;
    }
    if first {
        write!(f, "1")?;
    }
    match den.len() {
        0 => Ok(()),
        1 if !matches!(den[0].node(), Node::Add(_) | Node::Mul(_)) => {
            write!(f, "/")?;
            write_factor(f, &den[0])
        }
        _ => {
            write!(f, "/(")?;
            for (i, d) in den.iter().enumerate() {
                if i > 0 {
                    write!(f, "*")?;
                }
                write_factor(f, d)?;
            }
            write!(f, ")")
        }
    }
}

/// A term of a sum, written without its sign.
fn write_unsigned_term(f: &mut fmt::Formatter<'_>, t: &Expr) -> fmt::Result {
    let (c, rest) = t.split_coeff();
    let c = c.abs();
    if rest.is_one() {
        return write!(f, "{}", fmt_rational(&c));
    }
    let factors: Vec<Expr> = match rest.node() {
        Node::Mul(fs) => fs.clone(),
        _ => vec![rest.clone()],
    };
    if c.is_one() {
        if factors.len() == 1 && !matches!(factors[0].node(), Node::Pow(_, e) if e.is_negative()) {
            return write!(f, "{}", factors[0]);
        }
        write_product(f, &factors, None)
    } else {
        write_product(f, &factors, Some(&c))
    }
}

fn term_is_negative(t: &Expr) -> bool {
    t.split_coeff().0.is_negative()
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Const(c) => write!(f, "{}", fmt_rational(c)),
            Node::Sym(s) => write!(f, "{}", s),
            Node::Call(func, a) => write!(f, "{}({})", func.name(), a),
            Node::Pow(b, e) => {
                if e.is_negative() {
                    write_product(f, std::slice::from_ref(self), None)
                } else {
                    write_power(f, b, e)
                }
            }
            Node::Mul(_) => {
                if term_is_negative(self) {
                    write!(f, "-")?;
                }
                write_unsigned_term(f, self)
            }
            Node::Add(terms) => {
                for (i, t) in terms.iter().enumerate() {
                    let neg = term_is_negative(t);
                    match (i, neg) {
                        (0, true) => write!(f, "-")?,
                        (0, false) => {}
                        (_, true) => write!(f, " - ")?,
                        (_, false) => write!(f, " + ")?,
                    }
                    write_unsigned_term(f, t)?;
                }
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prints_readably() {
        let q = Expr::sym("q");
        let v = Expr::sym("v");
        assert_eq!((v.clone().powi(2) / Expr::int(2)).to_string(), "1/2*v^2");
        assert_eq!((q.clone() / Expr::opaque_call("f", v.clone())).to_string(), "q/f(v)");
        assert_eq!((v.clone() - q.clone()).to_string(), "v - q");
        assert_eq!(q.clone().sqrt().to_string(), "q^(1/2)");
        assert_eq!(Expr::frac(-3, 4).to_string(), "-3/4");
        assert_eq!(q.recip().to_string(), "1/q");
    }
}
