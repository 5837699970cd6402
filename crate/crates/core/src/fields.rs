//! Boundary fields and the recursion that makes finite-volume measures
//! consistent.
//!
//! Fields are stored in reduced form `h′ = (q/(q−1))·h`, as coordinates in
//! the basis `η_1, …, η_{q−1}`. The family of finite-volume measures is
//! consistent exactly when every non-outer vertex satisfies
//! `h′_x = Σ_{y ∈ S(x)} F(h′_y)`, with
//!
//! ```text
//! F_i(h) = ln( Σ_{j<q} e^{−βλ(i,j)} e^{h_j} + e^{−βλ(i,q)} )
//!        − ln( Σ_{j<q} e^{−βλ(q,j)} e^{h_j} + e^{−βλ(q,q)} ),   i = 1..q−1.
//! ```
//!
//! Here `i` is the spin of the parent and `j` the spin of the successor.
//!
//! [`ti_fixed_points`] looks for translation-invariant solutions
//! `h = k·F(h)`. That equation describes a vertex with `k` successors; the
//! root has `k + 1`, so a constant nonzero field is consistent everywhere
//! except at the root. [`propagate_fields`] is exact at every vertex.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::logspace::log_sum_exp;
use crate::model::LambdaModel;
use crate::topology::{Ball, Vertex};

/// Reduced field `h′_x ∈ ℝ^{q−1}` on every vertex of a ball.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldAssignment {
    ball: Ball,
    dim: usize,
    values: Vec<Vec<f64>>,
}

impl FieldAssignment {
    pub fn zeros(ball: &Ball, q: usize) -> Self {
        FieldAssignment { ball: ball.clone(), dim: q - 1, values: vec![vec![0.0; q - 1]; ball.len()] }
    }

    /// The same field on every vertex.
    pub fn constant(ball: &Ball, h: &[f64]) -> Result<Self> {
        check_vector(0, h, h.len())?;
        Ok(FieldAssignment { ball: ball.clone(), dim: h.len(), values: vec![h.to_vec(); ball.len()] })
    }

    pub fn from_values(ball: &Ball, q: usize, values: Vec<Vec<f64>>) -> Result<Self> {
        if values.len() != ball.len() {
            return Err(Error::MissingField(format!("{} of {} vertices given", values.len(), ball.len())));
        }
        for (x, h) in values.iter().enumerate() {
            check_vector(x, h, q - 1)?;
        }
        Ok(FieldAssignment { ball: ball.clone(), dim: q - 1, values })
    }

    pub fn ball(&self) -> &Ball {
        &self.ball
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, x: Vertex) -> &[f64] {
        &self.values[x.0]
    }

    pub fn set(&mut self, x: Vertex, h: Vec<f64>) -> Result<()> {
        if !self.ball.contains(x) {
            return Err(Error::UnknownVertex(x.0));
        }
        check_vector(x.0, &h, self.dim)?;
        self.values[x.0] = h;
        Ok(())
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    /// Un-reduced field `h_x = ((q−1)/q)·h′_x`.
    pub fn unreduced(&self, x: Vertex) -> Vec<f64> {
        let q = (self.dim + 1) as f64;
        self.values[x.0].iter().map(|v| v * (q - 1.0) / q).collect()
    }
}

fn check_vector(vertex: usize, h: &[f64], dim: usize) -> Result<()> {
    if h.len() != dim {
        return Err(Error::FieldDimension { vertex, got: h.len(), expected: dim });
    }
    if h.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("field"));
    }
    Ok(())
}

/// The recursion map `F(h; λ)`, evaluated in the log domain.
///
/// # Panics
///
/// Panics if `h.len() != q − 1`.
pub fn field_map(model: &LambdaModel, h: &[f64]) -> Vec<f64> {
    let q = model.q();
    assert_eq!(h.len(), q - 1, "field has dimension {}, expected {}", h.len(), q - 1);
    let mut terms = vec![0.0; q];
    let mut row_lse = |i: usize| {
        for (j, t) in terms.iter_mut().enumerate() {
            let hj = if j + 1 < q { h[j] } else { 0.0 };
            *t = hj - model.gauged(i, j);
        }
        log_sum_exp(&terms)
    };
    let reference = row_lse(q - 1);
    (0..q - 1).map(|i| row_lse(i) - reference).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct UnorderedCheck {
    pub holds: bool,
    /// `‖F(0)‖_∞`.
    pub residual: f64,
    /// `ln Σ_j e^{−βλ(i,j)}` per row; equal rows are what makes `h = 0` a
    /// solution.
    pub log_row_sums: Vec<f64>,
}

/// Whether the zero field solves the recursion (the unordered phase exists).
pub fn check_unordered(model: &LambdaModel, tol: f64) -> Result<UnorderedCheck> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::NonPositiveParameter { name: "tol" });
    }
    let q = model.q();
    let f0 = field_map(model, &vec![0.0; q - 1]);
    let residual = f0.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let beta = model.beta().to_f64();
    let log_row_sums = (0..q)
        .map(|i| {
            let row: Vec<f64> = (0..q).map(|j| -beta * model.lambda(i, j)).collect();
            log_sum_exp(&row)
        })
        .collect();
    Ok(UnorderedCheck { holds: residual <= tol, residual, log_row_sums })
}

/// Fields on a ball from boundary values on the outer shell `W_n`, given in
/// shell order, by applying the recursion leaves-inward.
pub fn propagate_fields(model: &LambdaModel, ball: &Ball, boundary: &[Vec<f64>]) -> Result<FieldAssignment> {
    let n = ball.radius();
    let expected = ball.shell_len(n);
    if boundary.len() != expected {
        return Err(Error::MissingField(format!(
            "boundary has {} vectors, shell W_{n} has {expected} vertices",
            boundary.len()
        )));
    }
    let known: BTreeMap<Vertex, Vec<f64>> = ball.shell(n).zip(boundary.iter().cloned()).collect();
    complete_fields(model, ball, &known)
}

/// Fills every vertex missing from `known` by the recursion over its
/// successors. All of `W_n` must be present; supplied inner values are kept
/// even when they violate the recursion.
pub fn complete_fields(model: &LambdaModel, ball: &Ball, known: &BTreeMap<Vertex, Vec<f64>>) -> Result<FieldAssignment> {
    let dim = model.q() - 1;
    let n = ball.radius();
    let mut values: Vec<Option<Vec<f64>>> = vec![None; ball.len()];
    for (&x, h) in known {
        if !ball.contains(x) {
            return Err(Error::UnknownVertex(x.0));
        }
        check_vector(x.0, h, dim)?;
        values[x.0] = Some(h.clone());
    }
    if let Some(x) = ball.shell(n).find(|x| values[x.0].is_none()) {
        let word = ball.word(x)?;
        return Err(Error::MissingField(format!("outer-shell vertex {x} (word {word:?})", word = word.to_string())));
    }
    for x in (0..ball.inner_len(n.saturating_sub(1))).rev().map(Vertex) {
        if n == 0 || values[x.0].is_some() {
            continue;
        }
        let mut acc = vec![0.0; dim];
        for y in ball.successors(x)? {
            let child = values[y.0].as_ref().expect("successors are filled before parents");
            for (a, f) in acc.iter_mut().zip(field_map(model, child)) {
                *a += f;
            }
        }
        values[x.0] = Some(acc);
    }
    Ok(FieldAssignment { ball: ball.clone(), dim, values: values.into_iter().map(|v| v.expect("filled")).collect() })
}

/// Boundary values on `W_n`, uniform in `[−half_width, half_width]^{q−1}`,
/// from a seeded generator.
pub fn random_boundary(ball: &Ball, q: usize, seed: u64, half_width: f64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..ball.shell_len(ball.radius()))
        .map(|_| (0..q - 1).map(|_| rng.gen_range(-half_width..=half_width)).collect())
        .collect()
}

/// Knobs for [`ti_fixed_points`].
#[derive(Clone, Debug, PartialEq)]
pub struct FixedPointOptions {
    pub starts: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub damping: f64,
    pub dedup_radius: f64,
    /// Random starts are drawn uniformly from `[−start_box, start_box]^{q−1}`.
    pub start_box: f64,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        FixedPointOptions {
            starts: 32,
            tol: 1e-12,
            max_iter: 10_000,
            seed: 42,
            damping: 0.5,
            dedup_radius: 1e-8,
            start_box: 5.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FixedPointSearch {
    /// Distinct solutions, sorted lexicographically.
    pub solutions: Vec<Vec<f64>>,
    /// Starts (out of `attempts`) that did not reach `tol` within `max_iter`.
    pub non_converged: usize,
    pub attempts: usize,
}

impl FixedPointSearch {
    pub fn contains_zero(&self) -> bool {
        self.solutions.iter().any(|h| h.iter().all(|v| *v == 0.0))
    }
}

/// `‖h − k·F(h)‖_∞`.
pub fn fixed_point_residual(model: &LambdaModel, h: &[f64]) -> f64 {
    let k = model.k() as f64;
    field_map(model, h).iter().zip(h).map(|(f, v)| (v - k * f).abs()).fold(0.0, f64::max)
}

/// Translation-invariant solutions of `h = k·F(h)` by damped iteration
/// `h ← (1−ρ)h + ρ·k·F(h)` from `h = 0` and `starts` random points.
pub fn ti_fixed_points(model: &LambdaModel, opts: &FixedPointOptions) -> Result<FixedPointSearch> {
    if opts.starts == 0 {
        return Err(Error::InvalidArgument("starts must be at least 1".into()));
    }
    if !(opts.tol > 0.0 && opts.damping > 0.0 && opts.damping <= 1.0) {
        return Err(Error::InvalidArgument("tol must be positive and damping in (0, 1]".into()));
    }
    let dim = model.q() - 1;
    let k = model.k() as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut initial = vec![vec![0.0; dim]];
    for _ in 0..opts.starts {
        initial.push((0..dim).map(|_| rng.gen_range(-opts.start_box..=opts.start_box)).collect());
    }

    let mut solutions: Vec<Vec<f64>> = Vec::new();
    let mut non_converged = 0;
    for start in initial.iter() {
        match iterate(model, start.clone(), k, opts) {
            Some(h) => {
                let dup = solutions.iter().any(|s| s.iter().zip(&h).all(|(a, b)| (a - b).abs() <= opts.dedup_radius));
                if !dup {
                    solutions.push(h);
                }
            }
            None => non_converged += 1,
        }
    }
    solutions.sort_by(|a, b| {
        a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(FixedPointSearch { solutions, non_converged, attempts: initial.len() })
}

fn iterate(model: &LambdaModel, mut h: Vec<f64>, k: f64, opts: &FixedPointOptions) -> Option<Vec<f64>> {
    let rho = opts.damping;
    for _ in 0..=opts.max_iter {
        let target: Vec<f64> = field_map(model, &h).into_iter().map(|f| k * f).collect();
        let residual = h.iter().zip(&target).map(|(v, t)| (v - t).abs()).fold(0.0, f64::max);
        if !residual.is_finite() {
            return None;
        }
        if residual <= opts.tol {
            return Some(h);
        }
        for (v, t) in h.iter_mut().zip(&target) {
            *v = (1.0 - rho) * *v + rho * t;
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{LambdaTable, StochasticMatrix};
    use crate::scalar::{rational, Scalar};

    fn ising(beta_jp: f64, k: usize) -> LambdaModel {
        // q = 2: J′ = J/2.
        LambdaModel::potts(2, Scalar::Float(2.0 * beta_jp), Scalar::Float(1.0), k).unwrap()
    }

    /// F for q = 2 written directly from its defining ratio.
    fn ising_f(beta_jp: f64, h: f64) -> f64 {
        (((beta_jp).exp() * h.exp() + (-beta_jp).exp()) / ((-beta_jp).exp() * h.exp() + beta_jp.exp())).ln()
    }

    #[test]
    fn field_map_vanishes_at_zero_for_potts_and_markov() {
        for q in 2..=5 {
            let m = LambdaModel::potts(q, Scalar::Float(1.3), Scalar::Float(0.7), 2).unwrap();
            assert!(field_map(&m, &vec![0.0; q - 1]).iter().all(|v| v.abs() < 1e-14));
        }
        let p = StochasticMatrix::Exact(vec![vec![rational(1, 2), rational(1, 2)], vec![rational(1, 3), rational(2, 3)]]);
        let m = LambdaModel::markov(p, 2).unwrap();
        assert!(field_map(&m, &[0.0])[0].abs() < 1e-15);
    }

    #[test]
    fn field_map_q2_matches_direct_ratio() {
        let m = ising(1.0, 2);
        let got = field_map(&m, &[2.0])[0];
        assert!((got - ising_f(1.0, 2.0)).abs() < 1e-14);
        let closed = 2.0 * (1f64.tanh() * (1.0f64).tanh()).atanh();
        assert!((got - closed).abs() < 1e-14);
    }

    #[test]
    fn field_map_is_stable_for_extreme_inputs() {
        let table = LambdaTable::float_rows(vec![vec![50.0, -50.0, 0.0], vec![-50.0, 50.0, 10.0], vec![3.0, -7.0, 50.0]]);
        let m = LambdaModel::generic(3, 2, Scalar::Float(1.0), table).unwrap();
        for h in [[1e4, -1e4], [-1e4, -1e4], [1e4, 1e4], [0.0, 1e4]] {
            assert!(field_map(&m, &h).iter().all(|v| v.is_finite()), "{h:?}");
        }
    }

    #[test]
    fn check_unordered_examples() {
        let potts = LambdaModel::potts(3, Scalar::integer(1), Scalar::integer(1), 2).unwrap();
        let c = check_unordered(&potts, 1e-12).unwrap();
        assert!(c.holds && c.residual < 1e-14);
        let jp = 2.0f64 / 3.0;
        let expected = (jp.exp() + 2.0 * (-jp / 2.0).exp()).ln();
        assert!(c.log_row_sums.iter().all(|s| (s - expected).abs() < 1e-14));

        let generic = LambdaModel::generic(
            2,
            2,
            Scalar::integer(1),
            LambdaTable::float_rows(vec![vec![0.0, 0.0], vec![0.0, 1.0]]),
        )
        .unwrap();
        let c = check_unordered(&generic, 1e-12).unwrap();
        assert!(!c.holds);
        assert!((c.log_row_sums[0] - 2f64.ln()).abs() < 1e-14);
        assert!((c.log_row_sums[1] - (1.0 + (-1f64).exp()).ln()).abs() < 1e-14);
        assert!(check_unordered(&generic, 0.0).is_err());
    }

    #[test]
    fn propagation_examples() {
        let ball = Ball::new(2, 1).unwrap();
        let m = ising(0.8, 2);
        let zero = propagate_fields(&m, &ball, &[vec![0.0], vec![0.0], vec![0.0]]).unwrap();
        assert!(zero.values().iter().flatten().all(|v| *v == 0.0));

        let (a, b, c) = (0.4, -1.1, 2.5);
        let f = propagate_fields(&m, &ball, &[vec![a], vec![b], vec![c]]).unwrap();
        let expected = ising_f(0.8, a) + ising_f(0.8, b) + ising_f(0.8, c);
        assert!((f.get(Vertex::ROOT)[0] - expected).abs() < 1e-14);

        // A vertex of W_1 has two successors in a radius-2 ball.
        let ball2 = Ball::new(2, 2).unwrap();
        let boundary: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64 * 0.3 - 0.7]).collect();
        let f2 = propagate_fields(&m, &ball2, &boundary).unwrap();
        let x = ball2.shell(1).next().unwrap();
        let s: Vec<Vertex> = ball2.successors(x).unwrap().collect();
        let expected = ising_f(0.8, f2.get(s[0])[0]) + ising_f(0.8, f2.get(s[1])[0]);
        assert!((f2.get(x)[0] - expected).abs() < 1e-14);

        assert!(matches!(propagate_fields(&m, &ball, &[vec![0.0]]), Err(Error::MissingField(_))));
        assert!(matches!(
            propagate_fields(&m, &ball, &[vec![0.0, 1.0], vec![0.0], vec![0.0]]),
            Err(Error::FieldDimension { .. })
        ));
    }

    #[test]
    fn complete_fields_keeps_supplied_inner_values() {
        let ball = Ball::new(2, 2).unwrap();
        let m = ising(0.5, 2);
        let mut known: BTreeMap<Vertex, Vec<f64>> = ball.shell(2).map(|x| (x, vec![0.1])).collect();
        let x = ball.shell(1).next().unwrap();
        known.insert(x, vec![9.0]);
        let f = complete_fields(&m, &ball, &known).unwrap();
        assert_eq!(f.get(x), &[9.0]);
        known.remove(&ball.shell(2).next().unwrap());
        assert!(matches!(complete_fields(&m, &ball, &known), Err(Error::MissingField(_))));
    }

    /// Counts sign changes of `2F(h) − h` on a grid, with F in closed form.
    fn grid_roots(beta_jp: f64) -> usize {
        let g = |h: f64| 2.0 * 2.0 * (beta_jp.tanh() * (h / 2.0).tanh()).atanh() - h;
        let mut last = 0.0f64;
        let mut roots = 0;
        for i in 0..=20_000 {
            let v = g(-10.0 + i as f64 * 1e-3);
            if v != 0.0 {
                if last != 0.0 && v.signum() != last.signum() {
                    roots += 1;
                }
                last = v;
            }
        }
        roots
    }

    #[test]
    fn phase_transition_probe_matches_grid_oracle() {
        assert_eq!(grid_roots(0.3), 1);
        assert_eq!(grid_roots(1.0), 3);

        let one = ti_fixed_points(&ising(0.3, 2), &FixedPointOptions::default()).unwrap();
        assert_eq!(one.solutions, vec![vec![0.0]]);

        let three = ti_fixed_points(&ising(1.0, 2), &FixedPointOptions::default()).unwrap();
        assert_eq!(three.solutions.len(), 3);
        let hs = &three.solutions;
        assert!(hs[0][0] < 0.0 && hs[1][0] == 0.0 && hs[2][0] > 0.0);
        assert!((hs[0][0] + hs[2][0]).abs() < 1e-10);
        for h in hs {
            assert!(fixed_point_residual(&ising(1.0, 2), h) <= 1e-12);
        }
    }

    #[test]
    fn free_model_has_only_zero() {
        let free = LambdaModel::potts(3, Scalar::integer(0), Scalar::integer(1), 2).unwrap();
        let r = ti_fixed_points(&free, &FixedPointOptions::default()).unwrap();
        assert_eq!(r.solutions, vec![vec![0.0, 0.0]]);
        assert_eq!(r.non_converged, 0);
        assert!(r.contains_zero());
    }

    #[test]
    fn fixed_point_search_is_deterministic() {
        let m = LambdaModel::potts(3, Scalar::Float(3.0), Scalar::Float(1.0), 2).unwrap();
        let opts = FixedPointOptions { starts: 8, ..Default::default() };
        assert_eq!(ti_fixed_points(&m, &opts).unwrap(), ti_fixed_points(&m, &opts).unwrap());
        assert!(ti_fixed_points(&m, &FixedPointOptions { starts: 0, ..Default::default() }).is_err());
    }
}
