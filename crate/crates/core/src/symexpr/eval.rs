use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, RwLock};

use num_traits::{Signed, ToPrimitive};

use super::expr::{Expr, Func, Node, Rational};
use super::{parse, ExprError, Scope};

/// Coordinate bindings for numeric evaluation.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EvalPoint {
    pub values: BTreeMap<String, f64>,
}

impl EvalPoint {
    pub fn new() -> EvalPoint {
        EvalPoint::default()
    }

    pub fn with(mut self, name: &str, value: f64) -> EvalPoint {
        self.values.insert(name.to_string(), value);
        self
    }

    pub fn from_pairs<S: AsRef<str>>(pairs: &[(S, f64)]) -> EvalPoint {
        EvalPoint { values: pairs.iter().map(|(k, v)| (k.as_ref().to_string(), *v)).collect() }
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.get(name).copied()
    }
}

impl std::fmt::Display for EvalPoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{{")?;
        for (i, (k, v)) in self.values.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}={}", k, v)?;
        }
        write!(f, "}}")
    }
}

const PARAM: &str = "u";

/// Closed-form bodies for opaque functions, used when sampling.
///
/// Each body is an expression in the parameter `u`. Derivatives are taken
/// symbolically on first use and cached. Functions without an explicit body
/// fall back to a smooth, positive, strictly increasing generic function
/// `exp(a*u + b*sin(u))` whose coefficients (a in [1/2, 9/10], b in
/// [1/10, 2/5]) are derived from the function name, when `generic` is on.
#[derive(Debug, Default)]
pub struct FunctionEnv {
    bodies: BTreeMap<String, Expr>,
    generic: bool,
    cache: RwLock<HashMap<(String, u32), Expr>>,
}

impl Clone for FunctionEnv {
    fn clone(&self) -> Self {
        FunctionEnv { bodies: self.bodies.clone(), generic: self.generic, cache: RwLock::default() }
    }
}

impl FunctionEnv {
    /// No bodies; opaque calls fail to evaluate.
    pub fn empty() -> FunctionEnv {
        FunctionEnv::default()
    }

    /// Unbound opaque functions get a generic body.
    pub fn generic() -> FunctionEnv {
        FunctionEnv { generic: true, ..FunctionEnv::default() }
    }

    pub fn bind(mut self, name: &str, body: Expr) -> FunctionEnv {
        self.bodies.insert(name.to_string(), body);
        self.cache = RwLock::default();
        self
    }

    /// Binds `name` to a body parsed in the parameter `u`.
    pub fn bind_text(self, name: &str, body: &str) -> Result<FunctionEnv, ExprError> {
        let e = parse(body, &Scope::new(&[PARAM]))?;
        Ok(self.bind(name, e))
    }

    pub fn param() -> &'static str {
        PARAM
    }

    pub fn body(&self, name: &str) -> Option<Expr> {
        if let Some(b) = self.bodies.get(name) {
            return Some(b.clone());
        }
        if self.generic {
            return Some(generic_body(name));
        }
        None
    }

    fn derivative(&self, name: &str, order: u32) -> Option<Expr> {
        let key = (name.to_string(), order);
        if let Some(e) = self.cache.read().ok()?.get(&key) {
            return Some(e.clone());
        }
        let mut d = self.body(name)?;
        for _ in 0..order {
            d = d.differentiate(PARAM);
        }
        if let Ok(mut c) = self.cache.write() {
            c.insert(key, d.clone());
        }
        Some(d)
    }
}

fn generic_body(name: &str) -> Expr {
    // FNV-1a, stable across runs and platforms
    let mut h: u64 = 0xcbf29ce484222325;
    for b in name.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x100000001b3);
    }
    let a = Expr::frac(5 + (h % 5) as i64, 10);
    let b = Expr::frac(1 + ((h / 5) % 4) as i64, 10);
    let u = Expr::sym(PARAM);
    (a * u.clone() + b * u.sin()).exp()
}

fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn real_pow(base: f64, e: &Rational) -> Result<f64, ExprError> {
    if e.is_integer() {
        let n = e.numer().to_i32().ok_or_else(|| ExprError::Domain("exponent too large".into()))?;
        if base == 0.0 && n < 0 {
            return Err(ExprError::Domain("division by zero".into()));
        }
        return Ok(base.powi(n));
    }
    let ef = rational_to_f64(e);
    if base < 0.0 {
        // real odd roots only
        let den_odd = e.denom().to_u64().is_some_and(|d| d % 2 == 1);
        if !den_odd {
            return Err(ExprError::Domain(format!("even root of negative value {}", base)));
        }
        let mag = (-base).powf(ef);
        let num_odd = e.numer().abs().to_u64().is_some_and(|n| n % 2 == 1);
        return Ok(if num_odd { -mag } else { mag });
    }
    if base == 0.0 && e.is_negative() {
        return Err(ExprError::Domain("division by zero".into()));
    }
    Ok(base.powf(ef))
}

impl Expr {
    /// Numeric value; opaque calls are an error.
    pub fn eval(&self, p: &EvalPoint) -> Result<f64, ExprError> {
        self.eval_with(p, &FunctionEnv::empty())
    }

    /// Numeric value with opaque calls resolved through `env`.
    pub fn eval_with(&self, p: &EvalPoint, env: &FunctionEnv) -> Result<f64, ExprError> {
        let v = match self.node() {
            Node::Const(c) => rational_to_f64(c),
            Node::Sym(s) => p.get(s).ok_or_else(|| ExprError::UnboundSymbol(s.to_string()))?,
            Node::Add(ts) => {
                let mut acc = 0.0;
                for t in ts {
                    acc += t.eval_with(p, env)?;
                }
                acc
            }
            Node::Mul(fs) => {
                let mut acc = 1.0;
                for f in fs {
                    acc *= f.eval_with(p, env)?;
                }
                acc
            }
            Node::Pow(b, e) => real_pow(b.eval_with(p, env)?, e)?,
            Node::Call(f, a) => {
                let x = a.eval_with(p, env)?;
                match f {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Tan => x.tan(),
                    Func::Exp => x.exp(),
                    Func::Log => {
                        if x <= 0.0 {
                            return Err(ExprError::Domain(format!("log of non-positive value {}", x)));
                        }
                        x.ln()
                    }
                    Func::Abs => x.abs(),
                    Func::Sign => {
                        if x > 0.0 {
                            1.0
                        } else if x < 0.0 {
                            -1.0
                        } else {
                            0.0
                        }
                    }
                    Func::Opaque { name, order } => {
                        let d = env
                            .derivative(name, *order)
                            .ok_or_else(|| ExprError::UnboundSymbol(name.to_string()))?;
                        d.eval_with(&EvalPoint::new().with(PARAM, x), env)?
                    }
                }
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(ExprError::Domain(format!("non-finite value while evaluating {}", self)))
        }
    }
}

/// Shared handle so environments can travel across threads cheaply.
pub type SharedEnv = Arc<FunctionEnv>;
