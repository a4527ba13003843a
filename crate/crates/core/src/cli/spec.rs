//! System specification files.
//!
//! ```text
//! # comment
//! [chart "tq"]
//! coords = "q, v"
//!
//! [lagrangian "free"]
//! chart = "tq"
//! expr = "v^2/2"
//!
//! [check "solve"]
//! kind = "el-solve"
//! lagrangian = "free"
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use thiserror::Error;

use crate::geomcalc::{Bivector, Chart, Diffeo, DiffForm, GeomError, Tensor11, VectorField};
use crate::lagrangian::LagrangianSystem;
use crate::symexpr::{parse, Expr, ExprError, FunctionEnv, Scope};
use crate::tangentstruct::{CurveSpec, TangentStructure};

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("{line}:{col}: {message}")]
    Parse { line: usize, col: usize, message: String },
    #[error("line {line}: unresolved reference to {kind} \"{name}\"")]
    UnresolvedReference { line: usize, kind: &'static str, name: String },
    #[error("line {line}: {message}")]
    Invalid { line: usize, message: String },
    #[error("unknown check \"{0}\"")]
    UnknownCheck(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

/// One `key = "value"` line.
#[derive(Clone, Debug, PartialEq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub line: usize,
    /// Column of the first character inside the quotes.
    pub col: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Section {
    pub kind: String,
    pub name: String,
    pub line: usize,
    pub entries: Vec<Entry>,
}

impl Section {
    pub fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.key == key)
    }

    fn require(&self, key: &str) -> Result<&Entry, SpecError> {
        self.get(key).ok_or_else(|| SpecError::Invalid {
            line: self.line,
            message: format!("{} \"{}\" is missing key \"{key}\"", self.kind, self.name),
        })
    }
}

fn parse_err(line: usize, col: usize, message: impl Into<String>) -> SpecError {
    SpecError::Parse { line, col, message: message.into() }
}

/// Reads a quoted string starting at byte `start`; returns the unescaped
/// text and the byte index after the closing quote.
fn quoted(text: &str, start: usize, line: usize) -> Result<(String, usize), SpecError> {
    let mut out = String::new();
    let mut chars = text[start..].char_indices();
    match chars.next() {
        Some((_, '"')) => {}
        _ => return Err(parse_err(line, start + 1, "expected '\"'")),
    }
    while let Some((i, c)) = chars.next() {
        match c {
            '"' => return Ok((out, start + i + 1)),
            '\\' => match chars.next() {
                Some((_, e @ ('"' | '\\'))) => out.push(e),
                Some((j, _)) => return Err(parse_err(line, start + j + 1, "unknown escape")),
                None => break,
            },
            c => out.push(c),
        }
    }
    Err(parse_err(line, text.len() + 1, "unterminated string"))
}

fn expect_end(text: &str, from: usize, line: usize) -> Result<(), SpecError> {
    let rest = text[from..].trim_start();
    if rest.is_empty() || rest.starts_with('#') {
        Ok(())
    } else {
        Err(parse_err(line, text.len() - rest.len() + 1, "unexpected trailing text"))
    }
}

/// Splits a file into sections.
pub fn parse_sections(text: &str) -> Result<Vec<Section>, SpecError> {
    let mut sections: Vec<Section> = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let indent = raw.len() - raw.trim_start().len();
        if trimmed.starts_with('[') {
            let body = &raw[indent + 1..];
            let kind_len = body.find(|c: char| !(c.is_ascii_alphanumeric() || c == '-' || c == '_')).unwrap_or(body.len());
            if kind_len == 0 {
                return Err(parse_err(line, indent + 2, "expected section kind"));
            }
            let kind = body[..kind_len].to_string();
            let after_kind = indent + 1 + kind_len;
            let name_start = after_kind + (raw[after_kind..].len() - raw[after_kind..].trim_start().len());
            let (name, end) = quoted(raw, name_start, line)?;
            let close = end + (raw[end..].len() - raw[end..].trim_start().len());
            if !raw[close..].starts_with(']') {
                return Err(parse_err(line, close + 1, "expected ']'"));
            }
            expect_end(raw, close + 1, line)?;
            if sections.iter().any(|s| s.kind == kind && s.name == name) {
                return Err(parse_err(line, name_start + 1, format!("duplicate {kind} \"{name}\"")));
            }
            sections.push(Section { kind, name, line, entries: Vec::new() });
            continue;
        }
        let eq = raw.find('=').ok_or_else(|| parse_err(line, indent + 1, "expected 'key = \"value\"'"))?;
        let key = raw[..eq].trim().to_string();
        if key.is_empty() || key.contains(char::is_whitespace) {
            return Err(parse_err(line, indent + 1, "bad key"));
        }
        let value_start = eq + 1 + (raw[eq + 1..].len() - raw[eq + 1..].trim_start().len());
        let (value, end) = quoted(raw, value_start, line)?;
        expect_end(raw, end, line)?;
        let section = sections.last_mut().ok_or_else(|| parse_err(line, indent + 1, "entry outside a section"))?;
        if section.get(&key).is_some() {
            return Err(parse_err(line, indent + 1, format!("duplicate key \"{key}\"")));
        }
        section.entries.push(Entry { key, value, line, col: value_start + 2 });
    }
    Ok(sections)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChartDecl {
    pub chart: Chart,
    /// Free parameters allowed in expressions on this chart.
    pub params: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianDecl {
    pub chart: Chart,
    pub h: Expr,
    pub omega: Option<DiffForm>,
    pub lambda: Option<Bivector>,
}

/// What an `invariance` check differentiates.
#[derive(Clone, Debug, PartialEq)]
pub enum InvarianceTarget {
    Scalar(Expr),
    Form(String),
    Tensor(String),
    Bivector(String),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Check {
    Axioms { structure: String },
    Sode { field: String, structure: String },
    SodeTransport { field: String, diffeo: String, target: Option<String> },
    Pushforward { field: String, diffeo: String, expect: String },
    ElSolve { lagrangian: String, expect: Option<String> },
    ElResidual { lagrangian: String, field: String },
    Regularity { lagrangian: String },
    HamiltonianVf { hamiltonian: String, expect: Option<String> },
    Jacobi { bivector: String },
    Magri { first: String, second: String },
    Invariance { field: String, target: InvarianceTarget },
    Isotropy { lagrangian: String },
    Tau { m: usize },
    ClockShift { d: usize },
    Fock { n_max: usize },
    NonlinearAdd { profile: Expr, z1: (f64, f64), z2: (f64, f64), expect: Option<(f64, f64)>, tol: f64 },
    IntegralCurve { field: String, curve: CurveSpec, t_samples: usize },
    Equal { lhs: Expr, rhs: Expr },
}

impl Check {
    pub fn kind(&self) -> &'static str {
        match self {
            Check::Axioms { .. } => "axioms",
            Check::Sode { .. } => "sode",
            Check::SodeTransport { .. } => "sode-transport",
            Check::Pushforward { .. } => "pushforward",
            Check::ElSolve { .. } => "el-solve",
            Check::ElResidual { .. } => "el-residual",
            Check::Regularity { .. } => "regularity",
            Check::HamiltonianVf { .. } => "hamiltonian-vf",
            Check::Jacobi { .. } => "jacobi",
            Check::Magri { .. } => "magri",
            Check::Invariance { .. } => "invariance",
            Check::Isotropy { .. } => "isotropy",
            Check::Tau { .. } => "tau",
            Check::ClockShift { .. } => "clock-shift",
            Check::Fock { .. } => "fock",
            Check::NonlinearAdd { .. } => "nonlinear-add",
            Check::IntegralCurve { .. } => "integral-curve",
            Check::Equal { .. } => "equal",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckDecl {
    pub id: String,
    pub check: Check,
}

/// A fully resolved specification.
#[derive(Clone, Debug, Default)]
pub struct SystemSpec {
    pub functions: Vec<String>,
    pub env: FunctionEnv,
    pub charts: BTreeMap<String, ChartDecl>,
    pub fields: BTreeMap<String, VectorField>,
    pub forms: BTreeMap<String, DiffForm>,
    pub tensors: BTreeMap<String, Tensor11>,
    pub bivectors: BTreeMap<String, Bivector>,
    /// Unverified; checks that use a diffeomorphism verify it first.
    pub diffeos: BTreeMap<String, Diffeo>,
    pub structures: BTreeMap<String, TangentStructure>,
    pub lagrangians: BTreeMap<String, LagrangianSystem>,
    pub hamiltonians: BTreeMap<String, HamiltonianDecl>,
    pub checks: Vec<CheckDecl>,
}

pub fn load_spec(path: &Path) -> Result<SystemSpec, SpecError> {
    let text = std::fs::read_to_string(path).map_err(|source| SpecError::Io { path: path.display().to_string(), source })?;
    parse_spec(&text)
}

fn list(value: &str) -> Vec<String> {
    value.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
}

fn invalid(line: usize, message: impl Into<String>) -> SpecError {
    SpecError::Invalid { line, message: message.into() }
}

fn geom(line: usize) -> impl Fn(GeomError) -> SpecError {
    move |e| invalid(line, e.to_string())
}

fn number<T: std::str::FromStr>(e: &Entry) -> Result<T, SpecError> {
    e.value.trim().parse().map_err(|_| parse_err(e.line, e.col, format!("\"{}\" is not a number", e.value)))
}

fn pair(e: &Entry) -> Result<(f64, f64), SpecError> {
    let parts = list(&e.value);
    let bad = || parse_err(e.line, e.col, "expected \"q, p\"");
    if parts.len() != 2 {
        return Err(bad());
    }
    Ok((parts[0].parse().map_err(|_| bad())?, parts[1].parse().map_err(|_| bad())?))
}

/// Builder that resolves sections in declaration order.
struct Resolver {
    spec: SystemSpec,
}

impl Resolver {
    fn chart(&self, e: &Entry) -> Result<&ChartDecl, SpecError> {
        self.spec.charts.get(&e.value).ok_or(SpecError::UnresolvedReference { line: e.line, kind: "chart", name: e.value.clone() })
    }

    fn lookup<'a, T>(map: &'a BTreeMap<String, T>, e: &Entry, kind: &'static str) -> Result<&'a T, SpecError> {
        map.get(&e.value).ok_or(SpecError::UnresolvedReference { line: e.line, kind, name: e.value.clone() })
    }

    fn reference<T>(map: &BTreeMap<String, T>, e: &Entry, kind: &'static str) -> Result<String, SpecError> {
        Self::lookup(map, e, kind).map(|_| e.value.clone())
    }

    fn scope(&self, symbols: impl IntoIterator<Item = String>) -> Scope {
        Scope::new(&symbols.into_iter().collect::<Vec<_>>()).with_functions(&self.spec.functions)
    }

    fn chart_scope(&self, decl: &ChartDecl) -> Scope {
        self.scope(decl.chart.coords().iter().cloned().chain(decl.params.iter().cloned()))
    }

    fn expr(&self, e: &Entry, scope: &Scope) -> Result<Expr, SpecError> {
        parse(&e.value, scope).map_err(|err| match err {
            ExprError::Syntax { position, message } => parse_err(e.line, e.col + position, message),
            other => parse_err(e.line, e.col, other.to_string()),
        })
    }

    fn chart_section(&mut self, s: &Section) -> Result<(), SpecError> {
        let coords = list(&s.require("coords")?.value);
        let chart = Chart::new(&s.name, &coords).map_err(geom(s.line))?;
        let params = s.get("params").map(|e| list(&e.value)).unwrap_or_default();
        if let Some(p) = params.iter().find(|p| coords.contains(p)) {
            return Err(invalid(s.line, format!("parameter \"{p}\" is also a coordinate")));
        }
        self.spec.charts.insert(s.name.clone(), ChartDecl { chart, params });
        Ok(())
    }

    fn function_section(&mut self, s: &Section) -> Result<(), SpecError> {
        if let Some(body) = s.get("body") {
            let scope = Scope::new(&[FunctionEnv::param()]);
            let b = self.expr(body, &scope)?;
            self.spec.env = std::mem::take(&mut self.spec.env).bind(&s.name, b);
        }
        Ok(())
    }

    /// Entries other than `skip`, each keyed by something in `allowed`.
    fn components<'s>(s: &'s Section, skip: &[&str]) -> impl Iterator<Item = &'s Entry> {
        let skip: Vec<String> = skip.iter().map(|k| k.to_string()).collect();
        s.entries.iter().filter(move |e| !skip.contains(&e.key))
    }

    fn index(chart: &Chart, e: &Entry, name: &str) -> Result<usize, SpecError> {
        chart.index_of(name).ok_or_else(|| invalid(e.line, format!("\"{name}\" is not a coordinate of chart \"{}\"", chart.name())))
    }

    fn field_section(&mut self, s: &Section) -> Result<(), SpecError> {
        let decl = self.chart(s.require("chart")?)?.clone();
        let scope = self.chart_scope(&decl);
        let mut comps = vec![Expr::zero(); decl.chart.dim()];
        for e in Self::components(s, &["chart"]) {
            comps[Self::index(&decl.chart, e, &e.key)?] = self.expr(e, &scope)?;
        }
        let x = VectorField::new(&decl.chart, comps).map_err(geom(s.line))?;
        self.spec.fields.insert(s.name.clone(), x);
        Ok(())
    }

    fn form_section(&mut self, s: &Section) -> Result<(), SpecError> {
        let decl = self.chart(s.require("chart")?)?.clone();
        let scope = self.chart_scope(&decl);
        let declared: Option<usize> = s.get("degree").map(number).transpose()?;
        let mut terms = Vec::new();
        let mut degree = declared;
        for e in Self::components(s, &["chart", "degree"]) {
            let idx: Vec<usize> = if e.key == "1" {
                Vec::new()
            } else {
                e.key
                    .split(['^', '∧'])
                    .map(|d| {
                        let name = d.strip_prefix('d').ok_or_else(|| invalid(e.line, format!("bad basis element \"{d}\"")))?;
                        Self::index(&decl.chart, e, name)
                    })
                    .collect::<Result<_, _>>()?
            };
            if *degree.get_or_insert(idx.len()) != idx.len() {
                return Err(invalid(e.line, "terms of different degrees"));
            }
            terms.push((idx, self.expr(e, &scope)?));
        }
        let w = DiffForm::from_terms(&decl.chart, degree.unwrap_or(0), terms).map_err(geom(s.line))?;
        self.spec.forms.insert(s.name.clone(), w);
        Ok(())
    }

    fn pairs(&self, s: &Section, decl: &ChartDecl) -> Result<Vec<(usize, usize, Expr)>, SpecError> {
        let scope = self.chart_scope(decl);
        Self::components(s, &["chart"])
            .map(|e| {
                let (a, b) = e.key.split_once('.').ok_or_else(|| invalid(e.line, format!("expected \"up.down\" key, got \"{}\"", e.key)))?;
                Ok((Self::index(&decl.chart, e, a)?, Self::index(&decl.chart, e, b)?, self.expr(e, &scope)?))
            })
            .collect()
    }

    fn tensor_section(&mut self, s: &Section) -> Result<(), SpecError> {
        let decl = self.chart(s.require("chart")?)?.clone();
        let terms = self.pairs(s, &decl)?;
        self.spec.tensors.insert(s.name.clone(), Tensor11::from_terms(&decl.chart, &terms));
        Ok(())
    }

    fn bivector_section(&mut self, s: &Section) -> Result<(), SpecError> {
        let decl = self.chart(s.require("chart")?)?.clone();
        let terms = self.pairs(s, &decl)?;
        if let Some((i, _, _)) = terms.iter().find(|(i, j, _)| i == j) {
            return Err(invalid(s.line, format!("diagonal entry on \"{}\"", decl.chart.coord(*i))));
        }
        self.spec.bivectors.insert(s.name.clone(), Bivector::from_entries(&decl.chart, &terms));
        Ok(())
    }

    fn diffeo_section(&mut self, s: &Section) -> Result<(), SpecError> {
        let src = self.chart(s.require("src")?)?.clone();
        let dst = self.chart(s.require("dst")?)?.clone();
        let mut forward = vec![None; dst.chart.dim()];
        let mut inverse = vec![None; src.chart.dim()];
        let src_scope = self.chart_scope(&src);
        let dst_scope = self.chart_scope(&dst);
        for e in Self::components(s, &["src", "dst"]) {
            if let Some(name) = e.key.strip_prefix("inverse.") {
                inverse[Self::index(&src.chart, e, name)?] = Some(self.expr(e, &dst_scope)?);
            } else {
                forward[Self::index(&dst.chart, e, &e.key)?] = Some(self.expr(e, &src_scope)?);
            }
        }
        let complete = |v: Vec<Option<Expr>>, chart: &Chart, what: &str| -> Result<Vec<Expr>, SpecError> {
            v.into_iter()
                .enumerate()
                .map(|(i, x)| x.ok_or_else(|| invalid(s.line, format!("{what} for \"{}\" is missing", chart.coord(i)))))
                .collect()
        };
        let forward = complete(forward, &dst.chart, "component")?;
        let inverse = complete(inverse, &src.chart, "inverse component")?;
        let d = Diffeo::new_unchecked(&src.chart, &dst.chart, forward, inverse).map_err(geom(s.line))?;
        self.spec.diffeos.insert(s.name.clone(), d);
        Ok(())
    }

    fn structure_section(&mut self, s: &Section) -> Result<(), SpecError> {
        let ts = match (s.get("s"), s.get("delta")) {
            (Some(t), Some(d)) => {
                let t = Self::lookup(&self.spec.tensors, t, "tensor")?.clone();
                let d = Self::lookup(&self.spec.fields, d, "field")?.clone();
                TangentStructure::new(t, d)
            }
            (None, None) => TangentStructure::canonical_on(&self.chart(s.require("chart")?)?.chart),
            _ => return Err(invalid(s.line, "give both \"s\" and \"delta\", or \"chart\" for the canonical structure")),
        };
        let ts = ts.map_err(|e| invalid(s.line, e.to_string()))?;
        self.spec.structures.insert(s.name.clone(), ts);
        Ok(())
    }

    fn lagrangian_section(&mut self, s: &Section) -> Result<(), SpecError> {
        let ts = match s.get("structure") {
            Some(e) => Self::lookup(&self.spec.structures, e, "structure")?.clone(),
            None => TangentStructure::canonical_on(&self.chart(s.require("chart")?)?.chart).map_err(|e| invalid(s.line, e.to_string()))?,
        };
        let decl = self.spec.charts.values().find(|d| &d.chart == ts.chart()).cloned().expect("structures live on declared charts");
        let l = self.expr(s.require("expr")?, &self.chart_scope(&decl))?;
        self.spec.lagrangians.insert(s.name.clone(), LagrangianSystem::new(ts, l));
        Ok(())
    }

    fn hamiltonian_section(&mut self, s: &Section) -> Result<(), SpecError> {
        let decl = self.chart(s.require("chart")?)?.clone();
        let h = self.expr(s.require("expr")?, &self.chart_scope(&decl))?;
        let omega = s.get("omega").map(|e| Self::lookup(&self.spec.forms, e, "form").cloned()).transpose()?;
        let lambda = s.get("lambda").map(|e| Self::lookup(&self.spec.bivectors, e, "bivector").cloned()).transpose()?;
        if omega.as_ref().is_some_and(|w| w.chart() != &decl.chart) || lambda.as_ref().is_some_and(|b| b.chart() != &decl.chart) {
            return Err(invalid(s.line, "structures must live on the hamiltonian's chart"));
        }
        if omega.is_none() && lambda.is_none() && decl.chart.dim() % 2 != 0 {
            return Err(invalid(s.line, "the canonical structures need an even-dimensional chart"));
        }
        self.spec.hamiltonians.insert(s.name.clone(), HamiltonianDecl { chart: decl.chart, h, omega, lambda });
        Ok(())
    }

    fn check_section(&mut self, s: &Section) -> Result<(), SpecError> {
        let kind = s.require("kind")?;
        let sp = &self.spec;
        let field = |key: &str| Self::reference(&sp.fields, s.require(key)?, "field");
        let lagrangian = || Self::reference(&sp.lagrangians, s.require("lagrangian")?, "lagrangian");
        let opt_field = |key: &str| s.get(key).map(|e| Self::reference(&sp.fields, e, "field")).transpose();
        let check = match kind.value.as_str() {
            "axioms" => Check::Axioms { structure: Self::reference(&sp.structures, s.require("structure")?, "structure")? },
            "sode" => Check::Sode {
                field: field("field")?,
                structure: Self::reference(&sp.structures, s.require("structure")?, "structure")?,
            },
            "sode-transport" => Check::SodeTransport {
                field: field("field")?,
                diffeo: Self::reference(&sp.diffeos, s.require("diffeo")?, "diffeo")?,
                target: s.get("target").map(|e| Self::reference(&sp.structures, e, "structure")).transpose()?,
            },
            "pushforward" => Check::Pushforward {
                field: field("field")?,
                diffeo: Self::reference(&sp.diffeos, s.require("diffeo")?, "diffeo")?,
                expect: field("expect")?,
            },
            "el-solve" => Check::ElSolve { lagrangian: lagrangian()?, expect: opt_field("expect")? },
            "el-residual" => Check::ElResidual { lagrangian: lagrangian()?, field: field("field")? },
            "regularity" => Check::Regularity { lagrangian: lagrangian()? },
            "hamiltonian-vf" => Check::HamiltonianVf {
                hamiltonian: Self::reference(&sp.hamiltonians, s.require("hamiltonian")?, "hamiltonian")?,
                expect: opt_field("expect")?,
            },
            "jacobi" => Check::Jacobi { bivector: Self::reference(&sp.bivectors, s.require("bivector")?, "bivector")? },
            "magri" => Check::Magri {
                first: Self::reference(&sp.bivectors, s.require("first")?, "bivector")?,
                second: Self::reference(&sp.bivectors, s.require("second")?, "bivector")?,
            },
            "invariance" => {
                let f = field("field")?;
                let target = if let Some(e) = s.get("form") {
                    InvarianceTarget::Form(Self::reference(&sp.forms, e, "form")?)
                } else if let Some(e) = s.get("tensor") {
                    InvarianceTarget::Tensor(Self::reference(&sp.tensors, e, "tensor")?)
                } else if let Some(e) = s.get("bivector") {
                    InvarianceTarget::Bivector(Self::reference(&sp.bivectors, e, "bivector")?)
                } else {
                    let chart = sp.fields[&f].chart();
                    let decl = sp.charts.values().find(|d| &d.chart == chart).expect("fields live on declared charts");
                    InvarianceTarget::Scalar(self.expr(s.require("scalar")?, &self.chart_scope(decl))?)
                };
                Check::Invariance { field: f, target }
            }
            "isotropy" => Check::Isotropy { lagrangian: lagrangian()? },
            "tau" => Check::Tau { m: s.get("m").map(number).transpose()?.unwrap_or(1) },
            "clock-shift" => Check::ClockShift { d: number(s.require("d")?)? },
            "fock" => Check::Fock { n_max: number(s.require("n_max")?)? },
            "nonlinear-add" => Check::NonlinearAdd {
                profile: self.expr(s.require("profile")?, &self.scope(["u".to_string()]))?,
                z1: pair(s.require("z1")?)?,
                z2: pair(s.require("z2")?)?,
                expect: s.get("expect").map(pair).transpose()?,
                tol: s.get("tol").map(number).transpose()?.unwrap_or(1e-9),
            },
            "integral-curve" => {
                let f = field("field")?;
                let chart = sp.fields[&f].chart().clone();
                let decl = sp.charts.values().find(|d| d.chart == chart).expect("fields live on declared charts");
                let time = s.get("time").map(|e| e.value.clone()).unwrap_or_else(|| "t".into());
                let scope = self.scope(std::iter::once(time.clone()).chain(decl.params.iter().cloned()));
                let comps = (0..chart.dim())
                    .map(|i| self.expr(s.require(&format!("curve.{}", chart.coord(i)))?, &scope))
                    .collect::<Result<Vec<_>, _>>()?;
                let curve = CurveSpec::new(&time, comps).map_err(|e| invalid(s.line, e.to_string()))?;
                Check::IntegralCurve { field: f, curve, t_samples: s.get("t_samples").map(number).transpose()?.unwrap_or(8) }
            }
            "equal" => {
                let decl = self.chart(s.require("chart")?)?;
                let scope = self.chart_scope(decl);
                Check::Equal { lhs: self.expr(s.require("lhs")?, &scope)?, rhs: self.expr(s.require("rhs")?, &scope)? }
            }
            other => return Err(parse_err(kind.line, kind.col, format!("unknown check kind \"{other}\""))),
        };
        self.spec.checks.push(CheckDecl { id: s.name.clone(), check });
        Ok(())
    }
}

/// Parses and resolves a specification. Later sections may refer to
/// anything declared above them; functions may be declared anywhere.
pub fn parse_spec(text: &str) -> Result<SystemSpec, SpecError> {
    let sections = parse_sections(text)?;
    let mut r = Resolver { spec: SystemSpec { env: FunctionEnv::generic(), ..SystemSpec::default() } };
    r.spec.functions = sections.iter().filter(|s| s.kind == "function").map(|s| s.name.clone()).collect();
    for s in &sections {
        match s.kind.as_str() {
            "chart" => r.chart_section(s)?,
            "function" => r.function_section(s)?,
            "field" => r.field_section(s)?,
            "form" => r.form_section(s)?,
            "tensor" => r.tensor_section(s)?,
            "bivector" => r.bivector_section(s)?,
            "diffeo" => r.diffeo_section(s)?,
            "structure" => r.structure_section(s)?,
            "lagrangian" => r.lagrangian_section(s)?,
            "hamiltonian" => r.hamiltonian_section(s)?,
            "check" => r.check_section(s)?,
            other => return Err(parse_err(s.line, 2, format!("unknown section kind \"{other}\""))),
        }
    }
    Ok(r.spec)
}

impl SystemSpec {
    /// Checks named in `only`, in declaration order.
    pub fn select(&self, only: Option<&[String]>) -> Result<Vec<&CheckDecl>, SpecError> {
        let Some(ids) = only else {
            return Ok(self.checks.iter().collect());
        };
        if let Some(bad) = ids.iter().find(|id| !self.checks.iter().any(|c| &c.id == *id)) {
            return Err(SpecError::UnknownCheck(bad.clone()));
        }
        Ok(self.checks.iter().filter(|c| ids.contains(&c.id)).collect())
    }
}
