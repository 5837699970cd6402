//! Multiplicative dependence of positive rationals.
//!
//! For a Markov model `λ_ij = −ln p_ij`, spectral differences are logarithms
//! of ratios `p_kl/p_ij`, and they are commensurable exactly when the ratios
//! `p_11/p_ij` lie in one cyclic group `α^ℤ`. Each ratio is factored over a
//! pairwise-coprime basis (small primes by trial division, then gcd
//! refinement of what is left), so the question becomes the rank of an
//! integer matrix.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

const TRIAL_DIVISION_LIMIT: u32 = 1 << 16;

#[derive(Clone, Debug, PartialEq)]
pub enum Lattice {
    /// Every ratio is 1.
    Degenerate,
    /// `p_11/p_ij = α^{m_ij}` with `0 < α < 1` generating the lattice.
    Geometric { alpha: BigRational, exponents: Vec<Vec<i64>> },
    /// Rank two or more.
    Independent,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MultiplicativeAnalysis {
    /// Pairwise-coprime integers `> 1`.
    pub basis: Vec<BigInt>,
    /// Exponent vector of `p_11/p_ij` over `basis`, row-major in `(i, j)`.
    pub vectors: Vec<Vec<i64>>,
    pub rank: usize,
    pub lattice: Lattice,
}

fn small_primes(limit: u32) -> Vec<u32> {
    let mut sieve = vec![true; limit as usize];
    let mut primes = Vec::new();
    for n in 2..limit as usize {
        if sieve[n] {
            primes.push(n as u32);
            for m in (n * n..limit as usize).step_by(n) {
                sieve[m] = false;
            }
        }
    }
    primes
}

/// Splits off small prime factors; returns them and the cofactor.
fn trial_divide(mut n: BigInt, primes: &[u32]) -> (Vec<u32>, BigInt) {
    let mut found = Vec::new();
    for &p in primes {
        let bp = BigInt::from(p);
        if &bp * &bp > n {
            break;
        }
        if (&n % &bp).is_zero() {
            found.push(p);
            while (&n % &bp).is_zero() {
                n /= &bp;
            }
        }
    }
    // What remains is 1, a prime below the limit squared, or a product of
    // large factors; only the first two are recognised here.
    if n > BigInt::one() && n < BigInt::from(TRIAL_DIVISION_LIMIT) {
        found.push(n.to_u32().expect("below limit"));
        n = BigInt::one();
    }
    (found, n)
}

/// Refines integers `> 1` into a pairwise-coprime set whose products
/// recover each input.
fn coprime_basis(mut items: Vec<BigInt>) -> Vec<BigInt> {
    items.retain(|x| *x > BigInt::one());
    items.sort();
    items.dedup();
    'outer: loop {
        for a in 0..items.len() {
            for b in a + 1..items.len() {
                let g = items[a].gcd(&items[b]);
                if g > BigInt::one() {
                    let x = &items[a] / &g;
                    let y = &items[b] / &g;
                    items.swap_remove(b);
                    items.swap_remove(a);
                    items.extend([g, x, y].into_iter().filter(|v| *v > BigInt::one()));
                    items.sort();
                    items.dedup();
                    continue 'outer;
                }
            }
        }
        return items;
    }
}

fn exponent_vector(mut n: BigInt, basis: &[BigInt]) -> Vec<i64> {
    let v = basis
        .iter()
        .map(|b| {
            let mut e = 0;
            while (&n % b).is_zero() {
                n /= b;
                e += 1;
            }
            e
        })
        .collect();
    debug_assert!(n.is_one(), "basis does not cover the input");
    v
}

/// Rank over ℚ by fraction-free elimination.
fn rank(vectors: &[Vec<i64>]) -> usize {
    let mut rows: Vec<Vec<BigInt>> =
        vectors.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
    let cols = rows.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let Some(pivot) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else { continue };
        rows.swap(r, pivot);
        for i in r + 1..rows.len() {
            if rows[i][c].is_zero() {
                continue;
            }
            let (a, b) = (rows[r][c].clone(), rows[i][c].clone());
            let pivot_row = rows[r].clone();
            for (x, p) in rows[i].iter_mut().zip(&pivot_row).skip(c) {
                *x = &*x * &a - p * &b;
            }
        }
        r += 1;
    }
    r
}

fn power(basis: &[BigInt], exps: &[i64]) -> BigRational {
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for (b, &e) in basis.iter().zip(exps) {
        let p = num_traits::pow(b.clone(), e.unsigned_abs() as usize);
        if e >= 0 {
            num *= p;
        } else {
            den *= p;
        }
    }
    BigRational::new(num, den)
}

pub fn commensurability_multiplicative(p: &[Vec<BigRational>]) -> Result<MultiplicativeAnalysis> {
    let q = p.len();
    for (row, r) in p.iter().enumerate() {
        if r.len() != q {
            return Err(Error::TableShape { q, rows: r.len() });
        }
        if let Some(col) = r.iter().position(|x| !x.is_positive()) {
            return Err(Error::NonPositiveProbability { row, col });
        }
    }
    let ratios: Vec<BigRational> = p.iter().flatten().map(|x| &p[0][0] / x).collect();

    let primes = small_primes(TRIAL_DIVISION_LIMIT);
    let mut small = Vec::new();
    let mut large = Vec::new();
    for r in &ratios {
        for n in [r.numer(), r.denom()] {
            let (ps, rest) = trial_divide(n.clone(), &primes);
            small.extend(ps);
            large.push(rest);
        }
    }
    small.sort_unstable();
    small.dedup();
    let mut basis: Vec<BigInt> = small.into_iter().map(BigInt::from).collect();
    basis.extend(coprime_basis(large));

    let vectors: Vec<Vec<i64>> = ratios
        .iter()
        .map(|r| {
            let num = exponent_vector(r.numer().clone(), &basis);
            let den = exponent_vector(r.denom().clone(), &basis);
            num.iter().zip(&den).map(|(a, b)| a - b).collect()
        })
        .collect();
    let rank = rank(&vectors);

    let lattice = match rank {
        0 => Lattice::Degenerate,
        1 => {
            let generator_exps = vectors.iter().find(|v| v.iter().any(|&e| e != 0)).expect("rank one");
            let content = generator_exps.iter().fold(0i64, |g, &e| g.gcd(&e));
            let mut primitive: Vec<i64> = generator_exps.iter().map(|e| e / content).collect();
            let pivot = primitive.iter().position(|&e| e != 0).expect("non-zero");
            // coefficient of each vector along the primitive direction
            let mut coeffs: Vec<i64> = vectors.iter().map(|v| v[pivot] / primitive[pivot]).collect();
            let d = coeffs.iter().fold(0i64, |g, &c| g.gcd(&c));
            primitive.iter_mut().for_each(|e| *e *= d);
            coeffs.iter_mut().for_each(|c| *c /= d);
            let mut alpha = power(&basis, &primitive);
            if alpha > BigRational::one() {
                alpha = alpha.recip();
                coeffs.iter_mut().for_each(|c| *c = -*c);
            }
            Lattice::Geometric { alpha, exponents: coeffs.chunks(q).map(<[i64]>::to_vec).collect() }
        }
        _ => Lattice::Independent,
    };
    Ok(MultiplicativeAnalysis { basis, vectors, rank, lattice })
}

/// `ln n` for a positive integer of any size.
pub(crate) fn ln_bigint(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        return n.to_f64().expect("finite").ln();
    }
    let shift = bits - 60;
    (n >> shift).to_f64().expect("finite").ln() + shift as f64 * std::f64::consts::LN_2
}

/// `ln r` for a positive rational.
pub(crate) fn ln_rational(r: &BigRational) -> f64 {
    ln_bigint(r.numer()) - ln_bigint(r.denom())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rational;

    fn matrix(rows: &[&[(i64, i64)]]) -> Vec<Vec<BigRational>> {
        rows.iter().map(|r| r.iter().map(|&(a, b)| rational(a, b)).collect()).collect()
    }

    #[test]
    fn uniform_chain_is_degenerate() {
        let a = commensurability_multiplicative(&matrix(&[&[(1, 2), (1, 2)], &[(1, 2), (1, 2)]])).unwrap();
        assert_eq!(a.rank, 0);
        assert_eq!(a.lattice, Lattice::Degenerate);
    }

    #[test]
    fn rank_two_examples() {
        // ratios 1, 1, 2, 2/3 over (2, 3): (1,0) and (1,−1)
        let a = commensurability_multiplicative(&matrix(&[&[(1, 2), (1, 2)], &[(1, 4), (3, 4)]])).unwrap();
        assert_eq!(a.basis, vec![BigInt::from(2), BigInt::from(3)]);
        assert!(a.vectors.contains(&vec![1, 0]) && a.vectors.contains(&vec![1, -1]));
        assert_eq!(a.rank, 2);
        assert_eq!(a.lattice, Lattice::Independent);

        // ratios 1, 1, 4, 4/7 over (2, 7)
        let b = commensurability_multiplicative(&matrix(&[&[(1, 2), (1, 2)], &[(1, 8), (7, 8)]])).unwrap();
        assert!(b.vectors.contains(&vec![2, 0]) && b.vectors.contains(&vec![2, -1]));
        assert_eq!(b.lattice, Lattice::Independent);

        let c = commensurability_multiplicative(&matrix(&[&[(1, 2), (1, 2)], &[(1, 3), (2, 3)]])).unwrap();
        assert_eq!(c.lattice, Lattice::Independent);
    }

    #[test]
    fn geometric_lattice_is_recovered() {
        // p = (1/3, 2/3): ratios 1, 1/2, 1/2, 1 → α = 1/2, m = (0, 1, 1, 0)
        let a = commensurability_multiplicative(&matrix(&[&[(1, 3), (2, 3)], &[(2, 3), (1, 3)]])).unwrap();
        assert_eq!(a.lattice, Lattice::Geometric { alpha: rational(1, 2), exponents: vec![vec![0, 1], vec![1, 0]] });

        // rows 1/7, 2/7, 4/7: ratios are powers of 2 with exponents 0, −1, −2
        let third = commensurability_multiplicative(&matrix(&[
            &[(1, 7), (2, 7), (4, 7)],
            &[(4, 7), (1, 7), (2, 7)],
            &[(2, 7), (4, 7), (1, 7)],
        ]))
        .unwrap();
        match third.lattice {
            Lattice::Geometric { alpha, exponents } => {
                assert_eq!(alpha, rational(1, 2));
                assert_eq!(exponents, vec![vec![0, 1, 2], vec![2, 0, 1], vec![1, 2, 0]]);
            }
            other => panic!("{other:?}"),
        }

        // ratios 1 and 1/4 only: the generator is 1/4, not 1/2
        let sq = commensurability_multiplicative(&matrix(&[&[(1, 5), (4, 5)], &[(4, 5), (1, 5)]])).unwrap();
        assert_eq!(sq.lattice, Lattice::Geometric { alpha: rational(1, 4), exponents: vec![vec![0, 1], vec![1, 0]] });
    }

    #[test]
    fn large_cofactors_are_refined() {
        // two large primes and their product: rank 2 via gcd refinement
        let p1 = BigInt::from(1_000_003u64);
        let p2 = BigInt::from(1_000_033u64);
        let basis = coprime_basis(vec![&p1 * &p2, &p1 * &p1]);
        assert_eq!(basis, vec![p1.clone(), p2.clone()]);
        assert_eq!(exponent_vector(&p1 * &p1 * &p2, &basis), vec![2, 1]);

        let big = BigInt::from(1_000_003u64);
        let s = BigRational::new(BigInt::one(), &big + BigInt::one());
        let t = BigRational::new(big.clone(), &big + BigInt::one());
        let a = commensurability_multiplicative(&[vec![s.clone(), t.clone()], vec![t, s]]).unwrap();
        match a.lattice {
            Lattice::Geometric { alpha, .. } => assert_eq!(alpha, BigRational::new(BigInt::one(), big)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            commensurability_multiplicative(&matrix(&[&[(0, 1), (1, 1)], &[(1, 2), (1, 2)]])),
            Err(Error::NonPositiveProbability { row: 0, col: 0 })
        ));
    }

    #[test]
    fn logarithms_of_large_numbers() {
        let n = num_traits::pow(BigInt::from(3), 2000);
        assert!((ln_bigint(&n) - 2000.0 * 3f64.ln()).abs() < 1e-9);
        assert!((ln_rational(&rational(2, 3)) - (2.0f64 / 3.0).ln()).abs() < 1e-15);
    }
}
