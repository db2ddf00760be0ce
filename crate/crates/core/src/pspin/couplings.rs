use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::par;

use super::kernel;
use super::state::SpinState;

/// `n choose k` for the small `k` used here.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1usize, |acc, m| acc * (n - m) / (m + 1))
}

/// Position of the triple `i < j < k` in lexicographic order over all
/// triples drawn from `0..n`.
///
/// Triples sharing `(i, j)` occupy a contiguous run indexed by `k`, which is
/// what the contraction kernel relies on.
pub fn triple_rank(n: usize, i: usize, j: usize, k: usize) -> usize {
    debug_assert!(i < j && j < k && k < n);
    binomial(n, 3) - binomial(n - i, 3) + binomial(n - 1 - i, 2) - binomial(n - j, 2) + (k - j - 1)
}

/// Inverse of [`triple_rank`].
pub fn triple_unrank(n: usize, mut rank: usize) -> (usize, usize, usize) {
    let mut i = 0;
    loop {
        let block = binomial(n - 1 - i, 2);
        if rank < block {
            break;
        }
        rank -= block;
        i += 1;
    }
    let mut j = i + 1;
    loop {
        let row = n - 1 - j;
        if rank < row {
            break;
        }
        rank -= row;
        j += 1;
    }
    (i, j, j + 1 + rank)
}

/// Quenched couplings `J_ijk`, one entry per unordered triple, packed in
/// lexicographic order (see [`triple_rank`]).
///
/// Entries are stored in single precision; every contraction accumulates in
/// double precision. The contraction streams the whole tensor once per step
/// and is bound by memory bandwidth, so halving the storage halves the cost.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingTensor {
    n: usize,
    entries: Vec<f32>,
    /// Fixed partition of the first index used by the contraction; depends
    /// only on `n`.
    chunks: Vec<std::ops::Range<usize>>,
}

const CONTRACTION_CHUNKS: usize = 32;

impl CouplingTensor {
    /// Builds a tensor from packed entries in [`triple_rank`] order.
    pub fn from_entries(n: usize, entries: Vec<f32>) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidParameter(format!("N must be >= 3, got {n}")));
        }
        let expected = binomial(n, 3);
        if entries.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: entries.len(),
            });
        }
        // Work for first index i is ~ (n - i)^2 / 2 triples.
        let chunks = par::balanced_ranges(n - 2, CONTRACTION_CHUNKS, |i| {
            binomial(n - 1 - i, 2) as f64
        });
        Ok(Self { n, entries, chunks })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::from_entries(n, vec![0.0; binomial(n.max(3), 3)])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[f32] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        let mut t = [i, j, k];
        t.sort_unstable();
        f64::from(self.entries[triple_rank(self.n, t[0], t[1], t[2])])
    }

    /// Stores `value` rounded to single precision.
    pub fn set(&mut self, i: usize, j: usize, k: usize, value: f64) {
        let mut t = [i, j, k];
        t.sort_unstable();
        assert!(t[0] < t[1] && t[1] < t[2], "indices must be distinct");
        self.entries[triple_rank(self.n, t[0], t[1], t[2])] = value as f32;
    }

    fn check(&self, sigma: &[f64]) -> Result<()> {
        if sigma.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: sigma.len(),
            });
        }
        Ok(())
    }

    /// `E = −Σ_{i<j<k} J_ijk σ_i σ_j σ_k`.
    pub fn energy(&self, s: &SpinState) -> Result<f64> {
        self.check(&s.sigma)?;
        Ok(self.contract(&s.sigma, None, false))
    }

    /// `∂E/∂σ_i`.
    pub fn grad_energy(&self, s: &SpinState) -> Result<Vec<f64>> {
        let mut grad = vec![0.0; self.n];
        self.energy_and_grad(&s.sigma, &mut grad)?;
        Ok(grad)
    }

    /// Energy and gradient in a single pass over the couplings. `grad` is
    /// overwritten.
    pub fn energy_and_grad(&self, sigma: &[f64], grad: &mut [f64]) -> Result<f64> {
        self.check(sigma)?;
        self.check(grad)?;
        Ok(self.contract(sigma, Some(grad), false))
    }

    /// Same as [`energy_and_grad`](Self::energy_and_grad) but never uses the
    /// thread pool.
    pub fn energy_and_grad_seq(&self, sigma: &[f64], grad: &mut [f64]) -> Result<f64> {
        self.check(sigma)?;
        self.check(grad)?;
        Ok(self.contract(sigma, Some(grad), true))
    }

    fn contract(&self, sigma: &[f64], grad: Option<&mut [f64]>, force_seq: bool) -> f64 {
        let want_grad = grad.is_some();
        let work = |c: usize| self.contract_chunk(sigma, self.chunks[c].clone(), want_grad);
        let partials = if force_seq {
            par::map_indexed_seq(self.chunks.len(), work)
        } else {
            par::map_indexed(self.chunks.len(), work)
        };
        let mut energy = 0.0;
        match grad {
            Some(grad) => {
                grad.fill(0.0);
                for (e, g) in &partials {
                    energy += e;
                    for (acc, v) in grad.iter_mut().zip(g) {
                        *acc -= v;
                    }
                }
            }
            None => energy = partials.iter().map(|(e, _)| e).sum(),
        }
        -energy
    }

    /// Returns `(Σ J σσσ, Σ-gradient)` over triples whose first index lies in
    /// `rows`, both without the overall minus sign.
    fn contract_chunk(
        &self,
        sigma: &[f64],
        rows: std::ops::Range<usize>,
        want_grad: bool,
    ) -> (f64, Vec<f64>) {
        let n = self.n;
        let mut g = if want_grad { vec![0.0; n] } else { Vec::new() };
        let mut energy = 0.0;
        let mut offset = if rows.start == 0 {
            0
        } else {
            triple_rank(n, rows.start, rows.start + 1, rows.start + 2)
        };
        for i in rows {
            let si = sigma[i];
            for j in i + 1..n - 1 {
                let len = n - 1 - j;
                let row = &self.entries[offset..offset + len];
                offset += len;
                let sj = sigma[j];
                let tail = &sigma[j + 1..];
                let s = if want_grad {
                    kernel::dot_axpy(row, tail, si * sj, &mut g[j + 1..])
                } else {
                    kernel::dot(row, tail)
                };
                energy += si * sj * s;
                if want_grad {
                    g[i] += sj * s;
                    g[j] += si * s;
                }
            }
        }
        (energy, g)
    }
}

/// Draws `C(n, 3)` i.i.d. `N(0, 3/n²)` couplings from a ChaCha8 stream seeded
/// with `seed` (sampled in double precision, stored rounded to single).
pub fn sample_couplings(n: usize, seed: u64) -> Result<CouplingTensor> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("N must be >= 3, got {n}")));
    }
    let std_dev = (3.0 / (n as f64 * n as f64)).sqrt();
    let normal = Normal::new(0.0, std_dev).expect("positive std dev");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entries = (0..binomial(n, 3))
        .map(|_| normal.sample(&mut rng) as f32)
        .collect();
    CouplingTensor::from_entries(n, entries)
}
