//! Factor-type classification from the spectral difference set.
//!
//! The set `D = {β(λ_ij − λ_kl)}` decides the verdict. `D = {0}` means the
//! state is a trace (type II_1). If every nonzero difference is an integer
//! multiple of one `g > 0`, the factor is type III_{γ^d} with `γ = e^{−g}`
//! for some positive integer `d` that is not computed here. Otherwise the
//! differences are incommensurable: that pattern is necessary for III_1 but
//! does not prove it.
//!
//! Three routes decide commensurability. Rational tables use exact gcds.
//! Markov tables with rational `P` have `D = {ln(p_kl/p_ij)}` and are decided
//! by multiplicative dependence of the ratios. All else goes through
//! continued fractions with explicit tolerances.

mod contfrac;
mod multiplicative;
mod rational;
mod spectrum;

use std::collections::BTreeSet;
use std::fmt;

use num_rational::BigRational;
use num_traits::ToPrimitive;

pub use contfrac::{commensurability_float, convergents, integer_relation, FloatCommensurability};
pub use multiplicative::{commensurability_multiplicative, Lattice, MultiplicativeAnalysis};
pub use rational::{commensurability_exact, gcd_rational, lattice_generator};
pub use spectrum::{finite_volume_spectrum, Spectrum};

use crate::error::{Error, Result};
use crate::model::{LambdaModel, LambdaTable};
use crate::scalar::{format_rational, rational_to_f64};
use multiplicative::ln_rational;

/// Float differences this small relative to `max |βλ|` count as zero.
pub const ZERO_SNAP: f64 = 1e-12;
/// Relative gap below which two float differences are merged.
pub const MERGE_TOLERANCE: f64 = 1e-12;

pub const TRACE_CAVEAT: &str = "the difference set is {0}: the state is a trace and the factor is of type II_1";
pub const FAMILY_CAVEAT: &str =
    "the factor is of type III_{gamma^d} for some positive integer d; d is not determined";
pub const INCOMMENSURABLE_CAVEAT: &str = "the rational-ratio criterion does not apply; incommensurable differences \
     are the pattern necessary for type III_1, not a proof of it";

/// Sorted, deduplicated, symmetric set of `β(λ_ij − λ_kl)`.
#[derive(Clone, Debug, PartialEq)]
pub enum DifferenceSet {
    Exact(Vec<BigRational>),
    /// Positive rationals `r` standing for `ln r`; Markov tables with
    /// rational `P`.
    LogRatio(Vec<BigRational>),
    Float(Vec<f64>),
}

impl DifferenceSet {
    pub fn kind(&self) -> &'static str {
        match self {
            DifferenceSet::Exact(_) => "exact-rational",
            DifferenceSet::LogRatio(_) => "symbolic-log-rational",
            DifferenceSet::Float(_) => "float",
        }
    }

    pub fn len(&self) -> usize {
        match self {
            DifferenceSet::Exact(v) | DifferenceSet::LogRatio(v) => v.len(),
            DifferenceSet::Float(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// True when the only difference is zero.
    pub fn is_trivial(&self) -> bool {
        self.len() == 1
    }

    pub fn to_f64(&self) -> Vec<f64> {
        match self {
            DifferenceSet::Exact(v) => v.iter().map(rational_to_f64).collect(),
            DifferenceSet::LogRatio(v) => v.iter().map(ln_rational).collect(),
            DifferenceSet::Float(v) => v.clone(),
        }
    }

    /// Exact values as strings (`"p/q"` or `"log(p/q)"`); floats as `None`.
    pub fn exact_strings(&self) -> Option<Vec<String>> {
        match self {
            DifferenceSet::Exact(v) => Some(v.iter().map(format_rational).collect()),
            DifferenceSet::LogRatio(v) => Some(v.iter().map(|r| format!("log({})", format_rational(r))).collect()),
            DifferenceSet::Float(_) => None,
        }
    }
}

fn exact_table(model: &LambdaModel) -> Option<Vec<BigRational>> {
    let b = model.beta().as_rational()?;
    model.exact_lambda().map(|v| v.iter().map(|x| x * b).collect())
}

fn scaled_floats(model: &LambdaModel) -> Vec<f64> {
    let q = model.q();
    let b = model.beta().to_f64();
    (0..q * q).map(|i| b * model.lambda(i / q, i % q)).collect()
}

pub fn difference_set(model: &LambdaModel) -> DifferenceSet {
    if let Some(t) = exact_table(model) {
        let set: BTreeSet<BigRational> = t.iter().flat_map(|a| t.iter().map(move |b| a - b)).collect();
        return DifferenceSet::Exact(set.into_iter().collect());
    }
    if let LambdaTable::NegLog(p) = model.table() {
        // λ_a − λ_b = ln(p_b / p_a)
        let set: BTreeSet<BigRational> = p.iter().flat_map(|a| p.iter().map(move |b| b / a)).collect();
        return DifferenceSet::LogRatio(set.into_iter().collect());
    }
    let t = scaled_floats(model);
    let scale = t.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let mut positive: Vec<f64> = t
        .iter()
        .flat_map(|a| t.iter().map(move |b| a - b))
        .filter(|d| *d > ZERO_SNAP * scale)
        .collect();
    positive.sort_by(f64::total_cmp);
    let mut merged: Vec<f64> = Vec::with_capacity(positive.len());
    for d in positive {
        match merged.last() {
            Some(&last) if d - last <= MERGE_TOLERANCE * d => {}
            _ => merged.push(d),
        }
    }
    let mut out: Vec<f64> = merged.iter().rev().map(|d| -d).collect();
    out.push(0.0);
    out.extend(merged);
    DifferenceSet::Float(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    TraceII1,
    TypeIIIFamily,
    Incommensurable,
}

impl Verdict {
    pub fn label(self) -> &'static str {
        match self {
            Verdict::TraceII1 => "II1",
            Verdict::TypeIIIFamily => "III_family",
            Verdict::Incommensurable => "incommensurable",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// The lattice generator `g > 0`.
#[derive(Clone, Debug, PartialEq)]
pub enum Generator {
    Rational(BigRational),
    /// `g = ln r` with rational `r > 1`.
    LogOf(BigRational),
    Float(f64),
}

impl Generator {
    pub fn value(&self) -> f64 {
        match self {
            Generator::Rational(r) => rational_to_f64(r),
            Generator::LogOf(r) => ln_rational(r),
            Generator::Float(x) => *x,
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::Rational(r) => f.write_str(&format_rational(r)),
            Generator::LogOf(r) => write!(f, "log({})", format_rational(r)),
            Generator::Float(x) => write!(f, "{x:e}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Confidence {
    Exact,
    Float,
}

impl Confidence {
    pub fn label(self) -> &'static str {
        match self {
            Confidence::Exact => "exact",
            Confidence::Float => "float",
        }
    }
}

/// Route-specific evidence behind a verdict.
#[derive(Clone, Debug, PartialEq)]
pub enum Evidence {
    Exact,
    Multiplicative(MultiplicativeAnalysis),
    Float(Option<FloatCommensurability>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassifyOptions {
    pub max_den: u64,
    pub tol: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions { max_den: 1_000_000, tol: 1e-9 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Classification {
    pub verdict: Verdict,
    pub generator: Option<Generator>,
    /// `e^{−g}`.
    pub gamma: Option<f64>,
    /// `n_ij` with `β(λ_ij − λ_11) = n_ij·g`, when a generator exists.
    pub exponents: Option<Vec<Vec<i64>>>,
    pub deltas: DifferenceSet,
    pub evidence: Evidence,
    pub confidence: Confidence,
    /// A float relation needed a denominator above `max_den/10`.
    pub low_confidence: bool,
    pub caveat: &'static str,
}

impl Classification {
    /// `m` with `β(λ_ij − λ_kl) = m·g`.
    pub fn multiplier(&self, i: usize, j: usize, k: usize, l: usize) -> Option<i64> {
        self.exponents.as_ref().map(|n| n[i][j] - n[k][l])
    }

    /// Every quadruple `(i, j, k, l)` with its multiplier, in lexicographic order.
    pub fn multipliers(&self) -> Vec<([usize; 4], i64)> {
        let Some(n) = &self.exponents else { return Vec::new() };
        let q = n.len();
        let mut out = Vec::with_capacity(q.pow(4));
        for i in 0..q {
            for j in 0..q {
                for k in 0..q {
                    for l in 0..q {
                        out.push(([i, j, k, l], n[i][j] - n[k][l]));
                    }
                }
            }
        }
        out
    }

    /// `max_δ |δ − round(δ/g)·g|` over the difference set.
    pub fn lattice_residual(&self) -> Option<f64> {
        let g = self.generator.as_ref()?.value();
        Some(self.deltas.to_f64().iter().map(|d| (d - (d / g).round() * g).abs()).fold(0.0, f64::max))
    }
}

pub fn classify(model: &LambdaModel) -> Classification {
    classify_with(model, &ClassifyOptions::default()).expect("default options are valid")
}

/// Errors only for invalid options.
pub fn classify_with(model: &LambdaModel, opts: &ClassifyOptions) -> Result<Classification> {
    if opts.max_den == 0 {
        return Err(Error::NonPositiveParameter { name: "max_den" });
    }
    if !(opts.tol.is_finite() && opts.tol > 0.0) {
        return Err(Error::NonPositiveParameter { name: "tol" });
    }
    let q = model.q();
    let deltas = difference_set(model);
    let trivial = deltas.is_trivial();
    let mut out = Classification {
        verdict: Verdict::TraceII1,
        generator: None,
        gamma: None,
        exponents: None,
        deltas,
        evidence: Evidence::Exact,
        confidence: Confidence::Exact,
        low_confidence: false,
        caveat: TRACE_CAVEAT,
    };
    let generator = match (&out.deltas, model.table()) {
        (DifferenceSet::Exact(v), _) => {
            let g = lattice_generator(v);
            if let Some(g) = &g {
                let t = exact_table(model).expect("exact table");
                out.exponents = Some(
                    (0..q)
                        .map(|i| {
                            (0..q)
                                .map(|j| {
                                    let n = (&t[i * q + j] - &t[0]) / g;
                                    debug_assert!(n.is_integer());
                                    n.to_integer().to_i64().expect("bounded multiplier")
                                })
                                .collect()
                        })
                        .collect(),
                );
            }
            g.map(Generator::Rational)
        }
        (DifferenceSet::LogRatio(_), LambdaTable::NegLog(p)) => {
            let rows: Vec<Vec<BigRational>> = p.chunks(q).map(<[BigRational]>::to_vec).collect();
            let analysis = commensurability_multiplicative(&rows)?;
            let g = match &analysis.lattice {
                Lattice::Geometric { alpha, exponents } => {
                    // p_11/p_ij = α^{m_ij} gives λ_ij − λ_11 = −m_ij·ln α = −m_ij·g
                    out.exponents = Some(exponents.iter().map(|r| r.iter().map(|m| -m).collect()).collect());
                    Some(Generator::LogOf(alpha.recip()))
                }
                Lattice::Degenerate | Lattice::Independent => None,
            };
            out.evidence = Evidence::Multiplicative(analysis);
            g
        }
        (DifferenceSet::Float(v), _) => {
            out.confidence = Confidence::Float;
            let found = commensurability_float(v, opts.max_den, opts.tol)?;
            let g = found.as_ref().map(|c| c.generator);
            if let Some(g) = g {
                let t = scaled_floats(model);
                out.exponents = Some(
                    (0..q).map(|i| (0..q).map(|j| ((t[i * q + j] - t[0]) / g).round() as i64).collect()).collect(),
                );
            }
            out.low_confidence = found.as_ref().is_some_and(|c| c.low_confidence);
            out.evidence = Evidence::Float(found);
            g.map(Generator::Float)
        }
        (DifferenceSet::LogRatio(_), _) => unreachable!("log-ratio sets come from Markov tables"),
    };

    if trivial {
        out.exponents = None;
        return Ok(out);
    }
    match generator {
        Some(g) => {
            out.verdict = Verdict::TypeIIIFamily;
            out.gamma = Some((-g.value()).exp());
            out.generator = Some(g);
            out.caveat = FAMILY_CAVEAT;
        }
        None => {
            out.verdict = Verdict::Incommensurable;
            out.caveat = INCOMMENSURABLE_CAVEAT;
        }
    }
    Ok(out)
}

/// `exp{−β·J′q/(q−1)}` with `J′ = (q−1)J/q`, which is `e^{−βJ}`.
pub fn potts_theta(q: usize, j: f64, beta: f64) -> Result<f64> {
    if q < 2 {
        return Err(Error::InvalidSpinCount(q));
    }
    let qf = q as f64;
    let jp = (qf - 1.0) * j / qf;
    Ok((-beta * jp * qf / (qf - 1.0)).exp())
}
