//! Probabilistic zero-testing by sampling.
//!
//! `Equal` means the two sides agreed within relative tolerance at
//! `n_samples` admissible random points (coordinates uniform on the sampling
//! range, opaque functions bound through the [`FunctionEnv`]). `NotEqual`
//! is definitive and carries the disagreeing point.

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::eval::{EvalPoint, FunctionEnv};
use super::expr::Expr;

/// Sampling parameters shared by every verification routine.
#[derive(Clone, Debug)]
pub struct SampleConfig {
    pub n_samples: usize,
    pub tol: f64,
    pub seed: u64,
    pub lo: f64,
    pub hi: f64,
    pub env: Arc<FunctionEnv>,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig {
            n_samples: 16,
            tol: 1e-9,
            seed: 0x6765_6f6d,
            lo: -2.0,
            hi: 2.0,
            env: Arc::new(FunctionEnv::generic()),
        }
    }
}

impl SampleConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_samples(mut self, n: usize) -> Self {
        self.n_samples = n;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_env(mut self, env: FunctionEnv) -> Self {
        self.env = Arc::new(env);
        self
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    pub fn random_point(&self, rng: &mut ChaCha8Rng, symbols: &BTreeSet<String>) -> EvalPoint {
        EvalPoint { values: symbols.iter().map(|s| (s.clone(), rng.random_range(self.lo..self.hi))).collect() }
    }

    /// Up to `n_samples` points at which every expression evaluates, drawn
    /// from at most `50 * n_samples` candidates.
    pub fn admissible_points(&self, exprs: &[&Expr]) -> Vec<EvalPoint> {
        let symbols: BTreeSet<String> = exprs.iter().flat_map(|e| e.symbols()).collect();
        let mut rng = self.rng();
        let mut out = Vec::with_capacity(self.n_samples);
        for _ in 0..50 * self.n_samples.max(1) {
            if out.len() == self.n_samples {
                break;
            }
            let p = self.random_point(&mut rng, &symbols);
            if exprs.iter().all(|e| e.eval_with(&p, &self.env).is_ok()) {
                out.push(p);
            }
        }
        out
    }

    pub fn close(&self, a: f64, b: f64) -> bool {
        (a - b).abs() <= self.tol * 1f64.max(a.abs()).max(b.abs())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Equality {
    Equal,
    NotEqual(EvalPoint),
    Undecided,
}

impl Equality {
    pub fn is_equal(&self) -> bool {
        matches!(self, Equality::Equal)
    }
}

/// Decides `a == b`.
pub fn equal(a: &Expr, b: &Expr, cfg: &SampleConfig) -> Equality {
    equal_all(&[(a.clone(), b.clone())], cfg)
}

pub fn is_zero(e: &Expr, cfg: &SampleConfig) -> Equality {
    equal(e, &Expr::zero(), cfg)
}

/// Decides all pairs jointly, on a common set of sample points.
pub fn equal_all(pairs: &[(Expr, Expr)], cfg: &SampleConfig) -> Equality {
    let pending: Vec<&(Expr, Expr)> = pairs.iter().filter(|(a, b)| !(a.clone() - b.clone()).is_zero()).collect();
    if pending.is_empty() {
        return Equality::Equal;
    }
    let symbols: BTreeSet<String> = pending.iter().flat_map(|(a, b)| a.symbols().into_iter().chain(b.symbols())).collect();
    let mut rng = cfg.rng();
    let n = cfg.n_samples.max(1);
    let mut admissible = 0;
    for _ in 0..50 * n {
        let p = cfg.random_point(&mut rng, &symbols);
        let mut values = Vec::with_capacity(pending.len());
        let mut ok = true;
        for (a, b) in &pending {
            match (a.eval_with(&p, &cfg.env), b.eval_with(&p, &cfg.env)) {
                (Ok(x), Ok(y)) => values.push((x, y)),
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        if values.iter().any(|&(x, y)| !cfg.close(x, y)) {
            return Equality::NotEqual(p);
        }
        admissible += 1;
        if admissible == n || symbols.is_empty() {
            return Equality::Equal;
        }
    }
    Equality::Undecided
}

#[cfg(test)]
mod tests {
    use super::super::{parse, Scope};
    use super::*;

    fn p(s: &str) -> Expr {
        parse(s, &Scope::new(&["q", "v"]).with_functions(&["K"])).unwrap()
    }

    #[test]
    fn trig_identity_is_equal() {
        assert_eq!(equal(&p("sin(q)^2 + cos(q)^2"), &p("1"), &SampleConfig::default()), Equality::Equal);
        assert_eq!(equal(&p("sin(2*q)"), &p("2*sin(q)*cos(q)"), &SampleConfig::default()), Equality::Equal);
    }

    #[test]
    fn product_vs_sum_has_witness() {
        match equal(&p("q*v"), &p("q+v"), &SampleConfig::default()) {
            Equality::NotEqual(w) => {
                let a = p("q*v").eval(&w).unwrap();
                let b = p("q+v").eval(&w).unwrap();
                assert!((a - b).abs() > 1e-6);
            }
            other => panic!("expected NotEqual, got {:?}", other),
        }
    }

    #[test]
    fn opaque_chain_rule_with_bound_sample_function() {
        let cfg = SampleConfig::default().with_env(FunctionEnv::empty().bind_text("K", "1 + u^2").unwrap());
        let lhs = p("q*K(abs(q))").differentiate("q");
        assert_eq!(equal(&lhs, &p("K(abs(q)) + q*K'(abs(q))*sign(q)"), &cfg), Equality::Equal);
        // and against the closed form 1 + 3 q^2
        assert_eq!(equal(&lhs, &p("1 + 3*q^2"), &cfg), Equality::Equal);
    }

    #[test]
    fn nowhere_defined_is_undecided() {
        assert_eq!(equal(&p("log(-1 - q^2)"), &p("0"), &SampleConfig::default()), Equality::Undecided);
    }

    #[test]
    fn seeds_are_reproducible() {
        let cfg = SampleConfig::default().with_seed(7);
        let a = equal(&p("q*v"), &p("q+v"), &cfg);
        let b = equal(&p("q*v"), &p("q+v"), &cfg);
        assert_eq!(a, b);
    }
}
