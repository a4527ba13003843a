//! Outcome of a sampled verification.

use std::fmt;

use crate::symexpr::{Equality, EvalPoint, Expr};

#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    Pass,
    Fail { witness: Option<EvalPoint>, residual: Option<Expr> },
    Undecided,
}

impl Verdict {
    pub fn fail(witness: EvalPoint) -> Verdict {
        Verdict::Fail { witness: Some(witness), residual: None }
    }

    pub fn fail_with(witness: Option<EvalPoint>, residual: Expr) -> Verdict {
        Verdict::Fail { witness, residual: Some(residual) }
    }

    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass)
    }

    pub fn is_fail(&self) -> bool {
        matches!(self, Verdict::Fail { .. })
    }

    /// Attaches a residual to a failing verdict.
    pub fn with_residual(self, r: Expr) -> Verdict {
        match self {
            Verdict::Fail { witness, .. } => Verdict::Fail { witness, residual: Some(r) },
            v => v,
        }
    }

    /// Pass only if every verdict passes; the first failure wins, then any
    /// undecided one.
    pub fn all<I: IntoIterator<Item = Verdict>>(vs: I) -> Verdict {
        let mut undecided = false;
        for v in vs {
            match v {
                Verdict::Pass => {}
                Verdict::Undecided => undecided = true,
                fail => return fail,
            }
        }
        if undecided {
            Verdict::Undecided
        } else {
            Verdict::Pass
        }
    }
}

impl From<Equality> for Verdict {
    fn from(e: Equality) -> Verdict {
        match e {
            Equality::Equal => Verdict::Pass,
            Equality::NotEqual(p) => Verdict::fail(p),
            Equality::Undecided => Verdict::Undecided,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Pass => write!(f, "pass"),
            Verdict::Undecided => write!(f, "undecided"),
            Verdict::Fail { witness, residual } => {
                write!(f, "fail")?;
                if let Some(w) = witness {
                    write!(f, " at {}", w)?;
                }
                if let Some(r) = residual {
                    write!(f, " (residual {})", r)?;
                }
                Ok(())
            }
        }
    }
}
