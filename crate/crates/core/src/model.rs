//! λ-models: spin vectors, the interaction table, energies, and the
//! diagonal edge potential of the associated quantum Markov state.
//!
//! The Hamiltonian on a ball is `H(σ) = Σ_{⟨x,y⟩ ∈ L_n} λ(σ(x), σ(y))`.
//! Tables need not be symmetric, so every edge is read parent-first:
//! `λ[σ(parent)][σ(child)]`. That orientation matches the boundary-field
//! recursion in [`crate::fields`].
//!
//! Potts couplings use `λ(x, y) = −J′⟨x, y⟩` with `J′ = (q−1)J/q`, so equal
//! spins carry `−J′` and distinct spins `J′/(q−1)`, and the Hamiltonian
//! equals `−J·#(equal edges)` up to a constant. The table with the opposite
//! overall sign produces the same difference set, so classification does
//! not depend on that choice; measures and energies do.
//!
//! Spin indices are 0-based throughout: spin `i` is the vector `η_{i+1}`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};

use crate::error::{Error, Result};
use crate::scalar::{rational_to_f64, Scalar};
use crate::topology::Ball;

/// Tolerance on floating row sums of stochastic matrices.
pub const STOCHASTIC_ROW_TOLERANCE: f64 = 1e-12;

/// The spin set `Φ = {η_1, …, η_q} ⊂ ℝ^{q−1}` with `η_i·η_i = 1` and
/// `η_i·η_j = −1/(q−1)` for `i ≠ j`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinSet {
    q: usize,
    eta: Vec<Vec<f64>>,
    gram: Vec<Vec<f64>>,
}

impl SpinSet {
    /// Explicit coordinates: the centred, rescaled standard basis of `ℝ^q`
    /// written in the Helmert orthonormal basis of the hyperplane `Σ x = 0`.
    pub fn simplex(q: usize) -> Result<Self> {
        if q < 2 {
            return Err(Error::InvalidSpinCount(q));
        }
        let scale = (q as f64 / (q as f64 - 1.0)).sqrt();
        let helmert = |m: usize, i: usize| -> f64 {
            // m-th Helmert vector, m = 1..q-1
            let norm = ((m * (m + 1)) as f64).sqrt();
            match i.cmp(&m) {
                std::cmp::Ordering::Less => 1.0 / norm,
                std::cmp::Ordering::Equal => -(m as f64) / norm,
                std::cmp::Ordering::Greater => 0.0,
            }
        };
        let eta: Vec<Vec<f64>> = (0..q).map(|i| (1..q).map(|m| scale * helmert(m, i)).collect()).collect();
        let gram = eta
            .iter()
            .map(|a| eta.iter().map(|b| a.iter().zip(b).map(|(x, y)| x * y).sum()).collect())
            .collect();
        Ok(SpinSet { q, eta, gram })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn dim(&self) -> usize {
        self.q - 1
    }

    pub fn vector(&self, i: usize) -> &[f64] {
        &self.eta[i]
    }

    /// Gram matrix computed from the explicit coordinates.
    pub fn gram(&self) -> &[Vec<f64>] {
        &self.gram
    }

    /// Closed-form Gram entry.
    pub fn gram_exact(&self, i: usize, j: usize) -> BigRational {
        if i == j {
            BigRational::one()
        } else {
            BigRational::new(BigInt::from(-1), BigInt::from(self.q as i64 - 1))
        }
    }

    /// `h·η_i` for a vector `h` given by its coordinates in the basis
    /// `η_1, …, η_{q−1}`, evaluated through the closed-form Gram matrix.
    pub fn pair(&self, coords: &[f64], i: usize) -> f64 {
        debug_assert_eq!(coords.len(), self.dim());
        let off = -1.0 / (self.q as f64 - 1.0);
        coords.iter().enumerate().map(|(j, c)| if j == i { *c } else { c * off }).sum()
    }
}

/// The `q × q` interaction table, row-major.
#[derive(Clone, Debug, PartialEq)]
pub enum LambdaTable {
    Exact(Vec<BigRational>),
    Float(Vec<f64>),
    /// `λ_ij = −ln p_ij` with rational `p_ij`, kept symbolic.
    NegLog(Vec<BigRational>),
}

impl LambdaTable {
    pub fn exact_rows(rows: Vec<Vec<BigRational>>) -> Self {
        LambdaTable::Exact(rows.into_iter().flatten().collect())
    }

    pub fn float_rows(rows: Vec<Vec<f64>>) -> Self {
        LambdaTable::Float(rows.into_iter().flatten().collect())
    }

    fn len(&self) -> usize {
        match self {
            LambdaTable::Exact(v) | LambdaTable::NegLog(v) => v.len(),
            LambdaTable::Float(v) => v.len(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            LambdaTable::Exact(_) => "exact-rational",
            LambdaTable::Float(_) => "float",
            LambdaTable::NegLog(_) => "negative-log-rational",
        }
    }
}

/// Stochastic matrix defining a Markov λ-model.
#[derive(Clone, Debug, PartialEq)]
pub enum StochasticMatrix {
    Exact(Vec<Vec<BigRational>>),
    Float(Vec<Vec<f64>>),
}

impl StochasticMatrix {
    pub fn q(&self) -> usize {
        match self {
            StochasticMatrix::Exact(p) => p.len(),
            StochasticMatrix::Float(p) => p.len(),
        }
    }

    pub fn entry_f64(&self, i: usize, j: usize) -> f64 {
        match self {
            StochasticMatrix::Exact(p) => rational_to_f64(&p[i][j]),
            StochasticMatrix::Float(p) => p[i][j],
        }
    }

    fn validate(&self) -> Result<()> {
        let q = self.q();
        if q < 2 {
            return Err(Error::InvalidSpinCount(q));
        }
        match self {
            StochasticMatrix::Exact(p) => {
                for (row, r) in p.iter().enumerate() {
                    if r.len() != q {
                        return Err(Error::TableShape { q, rows: p.len() });
                    }
                    if let Some(col) = r.iter().position(|x| !x.is_positive()) {
                        return Err(Error::NonPositiveProbability { row, col });
                    }
                    let sum: BigRational = r.iter().sum();
                    if !sum.is_one() {
                        return Err(Error::NotStochastic { row, sum: crate::scalar::format_rational(&sum) });
                    }
                }
            }
            StochasticMatrix::Float(p) => {
                for (row, r) in p.iter().enumerate() {
                    if r.len() != q {
                        return Err(Error::TableShape { q, rows: p.len() });
                    }
                    if r.iter().any(|x| !x.is_finite()) {
                        return Err(Error::NonFinite("stochastic matrix"));
                    }
                    if let Some(col) = r.iter().position(|x| *x <= 0.0) {
                        return Err(Error::NonPositiveProbability { row, col });
                    }
                    let sum: f64 = r.iter().sum();
                    if (sum - 1.0).abs() > STOCHASTIC_ROW_TOLERANCE {
                        return Err(Error::NotStochastic { row, sum: sum.to_string() });
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Provenance {
    Generic,
    Potts { j: Scalar },
    Markov { p: StochasticMatrix },
}

/// A nearest-neighbour λ-model on the Cayley tree of order `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct LambdaModel {
    spin: SpinSet,
    k: usize,
    beta: Scalar,
    table: LambdaTable,
    provenance: Provenance,
    lam: Vec<f64>,
    // β(λ − min λ): same measures and recursion as βλ, but immune to the
    // overflow a large constant offset would cause.
    gauged: Vec<f64>,
}

impl LambdaModel {
    /// A model from an explicit table.
    pub fn generic(q: usize, k: usize, beta: Scalar, table: LambdaTable) -> Result<Self> {
        if matches!(table, LambdaTable::NegLog(_)) {
            return Err(Error::InvalidArgument("negative-log tables come from markov models".into()));
        }
        Self::build(q, k, beta, table, Provenance::Generic)
    }

    /// Potts model `H = −J Σ δ_{σ(x)σ(y)}` in its λ form.
    pub fn potts(q: usize, j: Scalar, beta: Scalar, k: usize) -> Result<Self> {
        let spin = SpinSet::simplex(q)?;
        let table = match &j {
            Scalar::Exact(jr) => {
                let jp = jr * BigRational::new(BigInt::from(q as i64 - 1), BigInt::from(q as i64));
                let mut v = Vec::with_capacity(q * q);
                for a in 0..q {
                    for b in 0..q {
                        v.push(-(&jp * spin.gram_exact(a, b)));
                    }
                }
                LambdaTable::Exact(v)
            }
            Scalar::Float(jf) => {
                if !jf.is_finite() {
                    return Err(Error::NonFinite("J"));
                }
                let jp = jf * (q as f64 - 1.0) / q as f64;
                let mut v = Vec::with_capacity(q * q);
                for a in 0..q {
                    for b in 0..q {
                        v.push(if a == b { -jp } else { jp / (q as f64 - 1.0) });
                    }
                }
                LambdaTable::Float(v)
            }
        };
        Self::build(q, k, beta, table, Provenance::Potts { j })
    }

    /// `λ_ij = −ln p_ij` at `β = 1`.
    pub fn markov(p: StochasticMatrix, k: usize) -> Result<Self> {
        p.validate()?;
        let q = p.q();
        let table = match &p {
            StochasticMatrix::Exact(rows) => LambdaTable::NegLog(rows.iter().flatten().cloned().collect()),
            StochasticMatrix::Float(rows) => LambdaTable::Float(rows.iter().flatten().map(|x| -x.ln()).collect()),
        };
        Self::build(q, k, Scalar::integer(1), table, Provenance::Markov { p })
    }

    fn build(q: usize, k: usize, beta: Scalar, table: LambdaTable, provenance: Provenance) -> Result<Self> {
        let spin = SpinSet::simplex(q)?;
        if k == 0 {
            return Err(Error::InvalidTreeOrder(k));
        }
        if !beta.is_positive() {
            return Err(Error::NonPositiveBeta);
        }
        if table.len() != q * q {
            return Err(Error::TableShape { q, rows: table.len() / q.max(1) });
        }
        let (lam, gauged) = match &table {
            LambdaTable::Exact(v) => {
                let min = v.iter().min().expect("non-empty table").clone();
                let lam: Vec<f64> = v.iter().map(rational_to_f64).collect();
                let gauged = match &beta {
                    Scalar::Exact(b) => v.iter().map(|x| rational_to_f64(&((x - &min) * b))).collect(),
                    Scalar::Float(b) => v.iter().map(|x| rational_to_f64(&(x - &min)) * b).collect(),
                };
                (lam, gauged)
            }
            LambdaTable::Float(v) => {
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(Error::NonFinite("lambda table"));
                }
                let min = v.iter().copied().fold(f64::INFINITY, f64::min);
                let b = beta.to_f64();
                (v.clone(), v.iter().map(|x| (x - min) * b).collect())
            }
            LambdaTable::NegLog(p) => {
                let max = p.iter().max().expect("non-empty table").clone();
                let lam = p.iter().map(|x| -rational_to_f64(x).ln()).collect();
                let b = beta.to_f64();
                (lam, p.iter().map(|x| rational_to_f64(&(&max / x)).ln() * b).collect())
            }
        };
        if lam.iter().chain(&gauged).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("lambda table"));
        }
        Ok(LambdaModel { spin, k, beta, table, provenance, lam, gauged })
    }

    pub fn q(&self) -> usize {
        self.spin.q
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn beta(&self) -> &Scalar {
        &self.beta
    }

    pub fn spin(&self) -> &SpinSet {
        &self.spin
    }

    pub fn table(&self) -> &LambdaTable {
        &self.table
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// `λ(η_{i+1}, η_{j+1})` as a float.
    pub fn lambda(&self, i: usize, j: usize) -> f64 {
        self.lam[i * self.q() + j]
    }

    /// `β(λ_ij − min λ)`; the same offset for every entry.
    pub fn gauged(&self, i: usize, j: usize) -> f64 {
        self.gauged[i * self.q() + j]
    }

    /// Exact table entries, when the table is rational.
    pub fn exact_lambda(&self) -> Option<&[BigRational]> {
        match &self.table {
            LambdaTable::Exact(v) => Some(v),
            _ => None,
        }
    }

    /// The same model with `λ + c` (always a generic model).
    pub fn shifted(&self, c: &Scalar) -> Result<Self> {
        let table = match (&self.table, c) {
            (LambdaTable::Exact(v), Scalar::Exact(c)) => LambdaTable::Exact(v.iter().map(|x| x + c).collect()),
            _ => LambdaTable::Float(self.lam.iter().map(|x| x + c.to_f64()).collect()),
        };
        Self::generic(self.q(), self.k, self.beta.clone(), table)
    }

    /// The same model with `(βλ, β = 1)`.
    pub fn beta_absorbed(&self) -> Result<Self> {
        let table = match (&self.table, &self.beta) {
            (LambdaTable::Exact(v), Scalar::Exact(b)) => LambdaTable::Exact(v.iter().map(|x| x * b).collect()),
            (LambdaTable::NegLog(_), Scalar::Exact(b)) if b.is_one() => return Ok(self.clone()),
            _ => {
                let b = self.beta.to_f64();
                LambdaTable::Float(self.lam.iter().map(|x| x * b).collect())
            }
        };
        Self::generic(self.q(), self.k, Scalar::integer(1), table)
    }

    /// Relabels spins: new spin `i` is old spin `perm[i]`.
    pub fn relabeled(&self, perm: &[usize]) -> Result<Self> {
        let q = self.q();
        let mut seen = vec![false; q];
        if perm.len() != q || perm.iter().any(|&p| p >= q || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::InvalidArgument(format!("{perm:?} is not a permutation of 0..{q}")));
        }
        let permute = |i: usize| perm[i / q] * q + perm[i % q];
        let table = match &self.table {
            LambdaTable::Exact(v) => LambdaTable::Exact((0..q * q).map(|i| v[permute(i)].clone()).collect()),
            LambdaTable::Float(v) => LambdaTable::Float((0..q * q).map(|i| v[permute(i)]).collect()),
            LambdaTable::NegLog(v) => LambdaTable::NegLog((0..q * q).map(|i| v[permute(i)].clone()).collect()),
        };
        let provenance = match &self.provenance {
            Provenance::Markov { p } => Provenance::Markov {
                p: match p {
                    StochasticMatrix::Exact(r) => {
                        StochasticMatrix::Exact(perm.iter().map(|&a| perm.iter().map(|&b| r[a][b].clone()).collect()).collect())
                    }
                    StochasticMatrix::Float(r) => {
                        StochasticMatrix::Float(perm.iter().map(|&a| perm.iter().map(|&b| r[a][b]).collect()).collect())
                    }
                },
            },
            other => other.clone(),
        };
        Self::build(q, self.k, self.beta.clone(), table, provenance)
    }

    fn check_configuration(&self, sigma: &[usize], expected: usize) -> Result<()> {
        if sigma.len() != expected {
            return Err(Error::ConfigurationLength { got: sigma.len(), expected });
        }
        if let Some(position) = sigma.iter().position(|&s| s >= self.q()) {
            return Err(Error::SpinOutOfRange { position, spin: sigma[position], q: self.q() });
        }
        Ok(())
    }

    /// `H(σ_n)`, summed over the edges of the ball.
    pub fn energy(&self, ball: &Ball, sigma: &[usize]) -> Result<f64> {
        self.check_configuration(sigma, ball.len())?;
        Ok(ball.edges().iter().map(|&(p, c)| self.lambda(sigma[p.0], sigma[c.0])).sum())
    }

    /// `U(σ_n, ω)`: interaction of the outer shell `W_n` with a
    /// configuration `ω` on `W_{n+1}`. `omega` is indexed by position in
    /// `W_{n+1}` of the ball one radius larger.
    pub fn boundary_energy(&self, ball: &Ball, sigma: &[usize], omega: &[usize]) -> Result<f64> {
        self.check_configuration(sigma, ball.len())?;
        let expected = ball.outer_shell_len();
        if omega.len() != expected {
            return Err(Error::ShellMismatch { shell: ball.radius() + 1, got: omega.len(), expected });
        }
        self.check_configuration(omega, expected)?;
        let n = ball.radius();
        Ok(ball
            .shell(n)
            .flat_map(|x| ball.outer_successor_positions(x).map(move |y| (x, y)))
            .map(|(x, y)| self.lambda(sigma[x.0], omega[y]))
            .sum())
    }

    /// Diagonal of the edge potential on `M_q ⊗ M_q`: block `a`, position
    /// `i` holds `−βλ(η_a, η_i)`.
    pub fn edge_potential_diagonal(&self) -> Vec<Vec<f64>> {
        let q = self.q();
        let b = self.beta.to_f64();
        (0..q).map(|a| (0..q).map(|i| -b * self.lambda(a, i)).collect()).collect()
    }

    /// `‖H̃‖_d = k e^{2d} max |βλ_ij|` for the nearest-neighbour potential.
    pub fn potential_norm(&self, d: f64) -> Result<f64> {
        if !(d.is_finite() && d > 0.0) {
            return Err(Error::NonPositiveParameter { name: "d" });
        }
        let b = self.beta.to_f64();
        let max = self.lam.iter().map(|x| (b * x).abs()).fold(0.0, f64::max);
        Ok(self.k as f64 * (2.0 * d).exp() * max)
    }

    /// True when both `λ` and `β` are rational.
    pub fn is_exact(&self) -> bool {
        matches!(self.table, LambdaTable::Exact(_)) && self.beta.is_exact()
    }

    /// Zero-based Potts `J′ = (q−1)J/q`, if this is a Potts model.
    pub fn potts_coupling_prime(&self) -> Option<f64> {
        match &self.provenance {
            Provenance::Potts { j } => Some(j.to_f64() * (self.q() as f64 - 1.0) / self.q() as f64),
            _ => None,
        }
    }
}
