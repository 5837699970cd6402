//! Finite-volume spectrum of the diagonal Hamiltonian.

use crate::error::Result;
use crate::measures::enumerate;
use crate::model::LambdaModel;
use crate::topology::Ball;

/// Energies closer than this, relative to `max(1, |E|)`, are one level.
pub const LEVEL_MERGE_TOLERANCE: f64 = 1e-9;

/// Distinct values of `β·H(σ)` over `Φ^{V_n}` with multiplicities,
/// ascending. The potential `b = −βλ` gives the mirror image, see
/// [`Spectrum::mirrored`]; difference sets agree for both.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub levels: Vec<(f64, u64)>,
}

impl Spectrum {
    pub fn mirrored(&self) -> Spectrum {
        Spectrum { levels: self.levels.iter().rev().map(|&(e, m)| (-e, m)).collect() }
    }

    pub fn total_multiplicity(&self) -> u64 {
        self.levels.iter().map(|l| l.1).sum()
    }

    /// Largest distance of a level difference from the lattice `gℤ`.
    pub fn lattice_defect(&self, g: f64) -> f64 {
        let mut worst: f64 = 0.0;
        for (a, _) in &self.levels {
            for (b, _) in &self.levels {
                let d = a - b;
                worst = worst.max((d - (d / g).round() * g).abs());
            }
        }
        worst
    }
}

pub fn finite_volume_spectrum(model: &LambdaModel, ball: &Ball, cap: usize) -> Result<Spectrum> {
    let beta = model.beta().to_f64();
    let mut energies = enumerate(model.q(), ball.len(), cap, |sigma| {
        beta * ball.edges().iter().map(|&(p, c)| model.lambda(sigma[p.0], sigma[c.0])).sum::<f64>()
    })?;
    energies.sort_by(f64::total_cmp);
    let mut levels: Vec<(f64, u64)> = Vec::new();
    for e in energies {
        match levels.last_mut() {
            Some((level, m)) if (e - *level).abs() <= LEVEL_MERGE_TOLERANCE * level.abs().max(1.0) => *m += 1,
            _ => levels.push((e, 1)),
        }
    }
    Ok(Spectrum { levels })
}
