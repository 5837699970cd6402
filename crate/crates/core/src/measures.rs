//! Exact finite-volume Gibbs measures by enumeration.
//!
//! `μ^{(n)}(σ) ∝ exp(−βH(σ) + Σ_{x ∈ W_n} h_x·σ(x))` on `Φ^{V_n}`, with
//! `h_x = ((q−1)/q)·h′_x` paired against `η_{σ(x)}` through the Gram matrix.
//! The same sign `−βH` is used in the weight and in the partition function.
//!
//! A configuration is a mixed-radix integer in base `q` over the breadth-first
//! vertex order, least significant digit at the root. Because `V_m` is a
//! prefix of `V_n`, the `V_m`-restriction of index `i` is `i mod q^{|V_m|}`.
//!
//! Enumeration is capped ([`DEFAULT_ENUMERATION_CAP`]); past the cap, calls
//! fail rather than sample. Two-point correlations use an exact sum over the
//! tree instead and have no cap.

use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::fields::FieldAssignment;
use crate::logspace::{log_sum_exp, LogSumExp};
use crate::model::LambdaModel;
use crate::topology::{Ball, Vertex};

pub const DEFAULT_ENUMERATION_CAP: usize = 1 << 20;

fn state_count(q: usize, vertices: usize, cap: usize) -> Result<usize> {
    u32::try_from(vertices)
        .ok()
        .and_then(|v| q.checked_pow(v))
        .filter(|&s| s <= cap)
        .ok_or(Error::EnumerationCap { q, vertices, cap })
}

/// Calls `f` on every configuration of `len` sites in index order.
pub(crate) fn enumerate(q: usize, len: usize, cap: usize, mut f: impl FnMut(&[usize]) -> f64) -> Result<Vec<f64>> {
    let states = state_count(q, len, cap)?;
    let mut sigma = vec![0usize; len];
    let mut out = Vec::with_capacity(states);
    for _ in 0..states {
        out.push(f(&sigma));
        for digit in sigma.iter_mut() {
            *digit += 1;
            if *digit < q {
                break;
            }
            *digit = 0;
        }
    }
    Ok(out)
}

fn bulk_log_weight(model: &LambdaModel, ball: &Ball, sigma: &[usize]) -> f64 {
    -ball.edges().iter().map(|&(p, c)| model.gauged(sigma[p.0], sigma[c.0])).sum::<f64>()
}

/// A probability distribution on `Φ^{V_n}` held as log-weights.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteVolumeMeasure {
    ball: Ball,
    q: usize,
    log_weights: Vec<f64>,
    log_z: f64,
}

impl FiniteVolumeMeasure {
    fn from_log_weights(ball: Ball, q: usize, log_weights: Vec<f64>) -> Self {
        let log_z = log_sum_exp(&log_weights);
        FiniteVolumeMeasure { ball, q, log_weights, log_z }
    }

    pub fn ball(&self) -> &Ball {
        &self.ball
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn len(&self) -> usize {
        self.log_weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_weights.is_empty()
    }

    /// `ln Z` for the (gauge-normalized) weights.
    pub fn log_z(&self) -> f64 {
        self.log_z
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    pub fn probability(&self, index: usize) -> f64 {
        (self.log_weights[index] - self.log_z).exp()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.probability(i)).collect()
    }

    pub fn total_mass(&self) -> f64 {
        self.probabilities().iter().sum()
    }

    pub fn configuration(&self, mut index: usize) -> Vec<usize> {
        (0..self.ball.len())
            .map(|_| {
                let d = index % self.q;
                index /= self.q;
                d
            })
            .collect()
    }

    pub fn index_of(&self, sigma: &[usize]) -> Result<usize> {
        if sigma.len() != self.ball.len() {
            return Err(Error::ConfigurationLength { got: sigma.len(), expected: self.ball.len() });
        }
        sigma.iter().enumerate().rev().try_fold(0usize, |acc, (position, &s)| {
            if s >= self.q {
                Err(Error::SpinOutOfRange { position, spin: s, q: self.q })
            } else {
                Ok(acc * self.q + s)
            }
        })
    }

    /// One-site marginals, `[vertex][spin]`.
    pub fn site_marginals(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.q]; self.ball.len()];
        for (index, p) in self.probabilities().into_iter().enumerate() {
            for (x, s) in self.configuration(index).into_iter().enumerate() {
                out[x][s] += p;
            }
        }
        out
    }
}

/// `μ^{(n)}` for the fields on `W_n` of `fields`.
pub fn finite_volume_measure(
    model: &LambdaModel,
    fields: &FieldAssignment,
    level: usize,
    cap: usize,
) -> Result<FiniteVolumeMeasure> {
    let fball = fields.ball();
    if fball.k() != model.k() {
        return Err(Error::InvalidArgument(format!("fields live on order {}, model has k = {}", fball.k(), model.k())));
    }
    if fields.dim() != model.q() - 1 {
        return Err(Error::FieldDimension { vertex: 0, got: fields.dim(), expected: model.q() - 1 });
    }
    if level > fball.radius() {
        return Err(Error::MissingField(format!("fields cover radius {}, level {level} requested", fball.radius())));
    }
    let ball = Ball::new(model.k(), level)?;
    let q = model.q();
    state_count(q, ball.len(), cap)?;
    // boundary[x][i] = h_x·η_i for x ∈ W_n
    let boundary: Vec<(usize, Vec<f64>)> = ball
        .shell(level)
        .map(|x| {
            let h = fields.unreduced(x);
            (x.0, (0..q).map(|i| model.spin().pair(&h, i)).collect())
        })
        .collect();
    let lw = enumerate(q, ball.len(), cap, |sigma| {
        bulk_log_weight(model, &ball, sigma) + boundary.iter().map(|(x, t)| t[sigma[*x]]).sum::<f64>()
    })?;
    Ok(FiniteVolumeMeasure::from_log_weights(ball, q, lw))
}

/// Sums out `V_n \ V_m`.
pub fn marginalize(mu: &FiniteVolumeMeasure, to_level: usize) -> Result<FiniteVolumeMeasure> {
    let n = mu.ball.radius();
    if to_level >= n {
        return Err(Error::InvalidLevel(format!("cannot marginalize level {n} to level {to_level}")));
    }
    let ball = Ball::new(mu.ball.k(), to_level)?;
    let inner = mu.q.pow(ball.len() as u32);
    let mut buckets = vec![LogSumExp::default(); inner];
    for (i, lw) in mu.log_weights.iter().enumerate() {
        buckets[i % inner].push(*lw);
    }
    let lw = buckets.iter().map(|b| b.value() - mu.log_z).collect();
    Ok(FiniteVolumeMeasure::from_log_weights(ball, mu.q, lw))
}

/// `max |Σ_{σ^{(n)}} μ^{(n)}(σ_{n−1}, σ^{(n)}) − μ^{(n−1)}(σ_{n−1})|`.
pub fn consistency_residual(model: &LambdaModel, fields: &FieldAssignment, level: usize, cap: usize) -> Result<f64> {
    if level == 0 {
        return Err(Error::InvalidLevel("consistency needs level ≥ 1".into()));
    }
    let outer = finite_volume_measure(model, fields, level, cap)?;
    let inner = finite_volume_measure(model, fields, level - 1, cap)?;
    let projected = marginalize(&outer, level - 1)?;
    Ok((0..inner.len()).map(|i| (projected.probability(i) - inner.probability(i)).abs()).fold(0.0, f64::max))
}

/// `ν(σ_n) ∝ exp(−β[H(σ_n) + U(σ_n, ω)])` for `ω` on `W_{n+1}`.
pub fn dlr_conditional(model: &LambdaModel, ball: &Ball, omega: &[usize], cap: usize) -> Result<FiniteVolumeMeasure> {
    let expected = ball.outer_shell_len();
    if omega.len() != expected {
        return Err(Error::ShellMismatch { shell: ball.radius() + 1, got: omega.len(), expected });
    }
    if let Some(position) = omega.iter().position(|&s| s >= model.q()) {
        return Err(Error::SpinOutOfRange { position, spin: omega[position], q: model.q() });
    }
    let n = ball.radius();
    let cross: Vec<(usize, usize)> =
        ball.shell(n).flat_map(|x| ball.outer_successor_positions(x).map(move |y| (x.0, omega[y]))).collect();
    let lw = enumerate(model.q(), ball.len(), cap, |sigma| {
        bulk_log_weight(model, ball, sigma) - cross.iter().map(|&(x, w)| model.gauged(sigma[x], w)).sum::<f64>()
    })?;
    Ok(FiniteVolumeMeasure::from_log_weights(ball.clone(), model.q(), lw))
}

/// Largest total-variation distance, under the zero-field `μ^{(n+1)}`,
/// between the laws of `σ|_{V_{n−1}}` given `(σ|_{W_n} = ξ, σ|_{W_{n+1}} = ω)`
/// and given `(ξ, ω′)`, over all `ξ, ω, ω′`.
pub fn markov_property_residual(model: &LambdaModel, n: usize, cap: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidLevel("the Markov property needs n ≥ 1".into()));
    }
    let ball = Ball::new(model.k(), n + 1)?;
    let q = model.q();
    let fields = FieldAssignment::zeros(&ball, q);
    let mu = finite_volume_measure(model, &fields, n + 1, cap)?;
    let inner = q.pow(ball.inner_len(n - 1) as u32);
    let shell = q.pow(ball.shell_len(n) as u32);
    let outer = q.pow(ball.shell_len(n + 1) as u32);

    let mut worst: f64 = 0.0;
    let mut cond = vec![vec![0.0; inner]; outer];
    for xi in 0..shell {
        for (omega, law) in cond.iter_mut().enumerate() {
            let base = inner * (xi + shell * omega);
            let lw = &mu.log_weights[base..base + inner];
            let norm = log_sum_exp(lw);
            for (p, w) in law.iter_mut().zip(lw) {
                *p = (w - norm).exp();
            }
        }
        for a in 0..outer {
            for b in a + 1..outer {
                let tv = 0.5 * cond[a].iter().zip(&cond[b]).map(|(x, y)| (x - y).abs()).sum::<f64>();
                worst = worst.max(tv);
            }
        }
    }
    Ok(worst)
}

/// `ln Σ_σ exp(−βH(σ) + Σ_x unary(x, σ(x)))` over the ball, by summing
/// subtrees from the leaves inward. Exact; linear in the ball size.
fn tree_log_partition(model: &LambdaModel, ball: &Ball, unary: impl Fn(Vertex, usize) -> f64) -> f64 {
    let q = model.q();
    let mut subtree = vec![vec![0.0; q]; ball.len()];
    let mut terms = vec![0.0; q];
    for x in (0..ball.len()).rev().map(Vertex) {
        let mut here: Vec<f64> = (0..q).map(|s| unary(x, s)).collect();
        if ball.depth(x) < ball.radius() {
            for y in ball.successors(x).expect("inner vertex") {
                for (b, h) in here.iter_mut().enumerate() {
                    for (c, t) in terms.iter_mut().enumerate() {
                        *t = subtree[y.0][c] - model.gauged(b, c);
                    }
                    *h += log_sum_exp(&terms);
                }
            }
        }
        subtree[x.0] = here;
    }
    log_sum_exp(&subtree[0])
}

/// Joint law `μ(σ(x0) = i, σ(x) = j)` under the zero-field measure on `ball`.
pub fn pair_marginal(model: &LambdaModel, ball: &Ball, x0: Vertex, x: Vertex) -> Result<Vec<Vec<f64>>> {
    for v in [x0, x] {
        if !ball.contains(v) {
            return Err(Error::UnknownVertex(v.0));
        }
    }
    let q = model.q();
    let log_z = tree_log_partition(model, ball, |_, _| 0.0);
    let clamp = |i: usize, j: usize| {
        tree_log_partition(model, ball, |v, s| {
            let ok = (v != x0 || s == i) && (v != x || s == j);
            if ok {
                0.0
            } else {
                f64::NEG_INFINITY
            }
        })
    };
    Ok((0..q).map(|i| (0..q).map(|j| (clamp(i, j) - log_z).exp()).collect()).collect())
}

/// `|μ(σ(x0)=i, σ(x)=j) − μ(σ(x0)=i)·μ(σ(x)=j)|` under the zero-field
/// measure on `ball`.
pub fn two_point_correlation(model: &LambdaModel, ball: &Ball, x0: Vertex, x: Vertex) -> Result<Vec<Vec<f64>>> {
    let joint = pair_marginal(model, ball, x0, x)?;
    let q = model.q();
    let left: Vec<f64> = joint.iter().map(|r| r.iter().sum()).collect();
    let right: Vec<f64> = (0..q).map(|j| joint.iter().map(|r| r[j]).sum()).collect();
    Ok((0..q).map(|i| (0..q).map(|j| (joint[i][j] - left[i] * right[j]).abs()).collect()).collect())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorrelationPoint {
    pub distance: usize,
    pub max_defect: f64,
}

/// Largest correlation defect between the root and the first vertex of each
/// shell `W_1..W_n`, on the ball of radius `n`.
pub fn correlation_profile(model: &LambdaModel, n: usize) -> Result<Vec<CorrelationPoint>> {
    let ball = Ball::new(model.k(), n)?;
    (1..=n)
        .map(|d| {
            let x = ball.shell(d).next().expect("non-empty shell");
            let defect = two_point_correlation(model, &ball, ball.root(), x)?;
            let max_defect = defect.iter().flatten().copied().fold(0.0, f64::max);
            Ok(CorrelationPoint { distance: d, max_defect })
        })
        .collect()
}

fn csv_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Header `distance,max_defect`.
pub fn write_correlation_csv<W: Write>(mut out: W, points: &[CorrelationPoint]) -> io::Result<()> {
    writeln!(out, "distance,max_defect")?;
    for p in points {
        writeln!(out, "{},{}", p.distance, csv_float(p.max_defect))?;
    }
    Ok(())
}

/// Header `vertex,spin,probability`; vertices by address word.
pub fn write_marginals_csv<W: Write>(mut out: W, mu: &FiniteVolumeMeasure) -> io::Result<()> {
    writeln!(out, "vertex,spin,probability")?;
    for (x, row) in mu.site_marginals().iter().enumerate() {
        let word = mu.ball.word(Vertex(x)).expect("vertex in ball");
        for (s, p) in row.iter().enumerate() {
            writeln!(out, "{word},{s},{}", csv_float(*p))?;
        }
    }
    Ok(())
}
