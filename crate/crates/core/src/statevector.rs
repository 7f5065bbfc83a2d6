//! Dense statevector simulation.
//!
//! Qubit `q` is bit `q` of the basis index (little-endian). Bitstring keys
//! returned by [`Statevector::marginal_distribution`] and
//! [`Statevector::sample_counts`] follow the same rule relative to the
//! queried qubit list: bit `k` of the key is the value of `qubits[k]`.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Mat, C64, ONE, ZERO};
use crate::unitary::{UnitaryBlock, TOL};

/// Branches below this probability are treated as numerically empty.
pub const BRANCH_EPS: f64 = 1e-14;

const PAR_MIN_LEN: usize = 1 << 14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Control {
    pub qubit: usize,
    pub polarity: bool,
}

impl Control {
    pub fn on(qubit: usize) -> Self {
        Self { qubit, polarity: true }
    }

    pub fn off(qubit: usize) -> Self {
        Self { qubit, polarity: false }
    }
}

/// Probability map over bitstrings of `width` bits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    pub width: usize,
    pub probs: BTreeMap<u64, f64>,
}

impl Distribution {
    pub fn get(&self, key: u64) -> f64 {
        self.probs.get(&key).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.probs.values().sum()
    }

    pub fn from_dense(width: usize, dense: &[f64]) -> Self {
        let probs = dense.iter().enumerate().filter(|(_, &p)| p > 0.0).map(|(k, &p)| (k as u64, p)).collect();
        Self { width, probs }
    }

    pub fn from_counts(width: usize, counts: &BTreeMap<u64, u64>) -> Self {
        let total: u64 = counts.values().sum();
        let probs = counts.iter().map(|(&k, &n)| (k, n as f64 / total as f64)).collect();
        Self { width, probs }
    }
}

/// Renders `key` as a binary string whose leftmost character is bit `width-1`.
pub fn format_bitstring(key: u64, width: usize) -> String {
    (0..width).rev().map(|b| if key >> b & 1 == 1 { '1' } else { '0' }).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Statevector {
    num_qubits: usize,
    amps: Vec<C64>,
}

fn check_qubits(n: usize, qubits: impl IntoIterator<Item = usize>) -> Result<()> {
    let mut seen = 0u128;
    for q in qubits {
        if q >= n {
            return Err(Error::IndexOutOfRange { index: q, limit: n });
        }
        if seen >> q & 1 == 1 {
            return Err(Error::OverlappingQubits(q));
        }
        seen |= 1 << q;
    }
    Ok(())
}

fn control_masks(controls: &[Control]) -> (usize, usize) {
    controls.iter().fold((0, 0), |(m, v), c| (m | 1 << c.qubit, if c.polarity { v | 1 << c.qubit } else { v }))
}

impl Statevector {
    pub fn zero(num_qubits: usize) -> Self {
        let mut amps = vec![ZERO; 1 << num_qubits];
        amps[0] = ONE;
        Self { num_qubits, amps }
    }

    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        let dim = 1usize << num_qubits;
        if index >= dim {
            return Err(Error::IndexOutOfRange { index, limit: dim });
        }
        let mut amps = vec![ZERO; dim];
        amps[index] = ONE;
        Ok(Self { num_qubits, amps })
    }

    /// Wraps an amplitude vector; it must be normalized within tolerance.
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let num_qubits = crate::linalg::log2_exact(amps.len())
            .ok_or_else(|| Error::invalid(format!("length {} is not a power of two", amps.len())))?;
        let norm: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > TOL {
            return Err(Error::invalid(format!("amplitudes have squared norm {norm}")));
        }
        Ok(Self { num_qubits, amps })
    }

    /// Normalizes `amps` and wraps them.
    pub fn normalized(mut amps: Vec<C64>) -> Result<Self> {
        let norm = crate::linalg::vec_norm(&amps);
        if norm < BRANCH_EPS {
            return Err(Error::invalid("cannot normalize a zero vector"));
        }
        amps.iter_mut().for_each(|z| *z /= norm);
        Self::from_amplitudes(amps)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|z| z.norm_sqr()).collect()
    }

    /// `self ⊗ other`, with `other` on the higher qubit indices.
    pub fn tensor(&self, other: &Statevector) -> Statevector {
        let mut amps = Vec::with_capacity(self.amps.len() * other.amps.len());
        for hi in &other.amps {
            amps.extend(self.amps.iter().map(|lo| lo * hi));
        }
        Statevector { num_qubits: self.num_qubits + other.num_qubits, amps }
    }

    pub fn apply_unitary(&mut self, block: &UnitaryBlock, targets: &[usize], controls: &[Control]) -> Result<()> {
        if block.dimension() != 1 << targets.len() {
            return Err(Error::DimensionMismatch { expected: 1 << targets.len(), found: block.dimension() });
        }
        check_qubits(self.num_qubits, targets.iter().copied().chain(controls.iter().map(|c| c.qubit)))?;
        self.apply_matrix(block.matrix(), targets, controls);
        Ok(())
    }

    /// Applies `m` without validation; callers guarantee shapes and disjointness.
    pub(crate) fn apply_matrix(&mut self, m: &Mat, targets: &[usize], controls: &[Control]) {
        let (cmask, cval) = control_masks(controls);
        if targets.len() == 1 {
            self.apply_1q(m, targets[0], cmask, cval);
        } else {
            self.apply_kq(m, targets, cmask, cval);
        }
    }

    fn apply_1q(&mut self, m: &Mat, t: usize, cmask: usize, cval: usize) {
        let (a, b, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
        let half = 1usize << t;
        let kernel = move |base: usize, lo: &mut [C64], hi: &mut [C64]| {
            for k in 0..lo.len() {
                if (base + k) & cmask == cval {
                    let (x, y) = (lo[k], hi[k]);
                    lo[k] = a * x + b * y;
                    hi[k] = c * x + d * y;
                }
            }
        };
        if self.amps.len() >= PAR_MIN_LEN {
            let stride = 2 * half;
            if self.amps.len() / stride >= 64 {
                self.amps.par_chunks_mut(stride).enumerate().for_each(|(ci, chunk)| {
                    let (lo, hi) = chunk.split_at_mut(half);
                    kernel(ci * stride, lo, hi);
                });
            } else {
                const SUB: usize = 1 << 12;
                for (ci, chunk) in self.amps.chunks_mut(stride).enumerate() {
                    let (lo, hi) = chunk.split_at_mut(half);
                    lo.par_chunks_mut(SUB).zip(hi.par_chunks_mut(SUB)).enumerate().for_each(|(si, (l, h))| {
                        kernel(ci * stride + si * SUB, l, h);
                    });
                }
            }
        } else {
            for (ci, chunk) in self.amps.chunks_mut(2 * half).enumerate() {
                let (lo, hi) = chunk.split_at_mut(half);
                kernel(ci * 2 * half, lo, hi);
            }
        }
    }

    fn apply_kq(&mut self, m: &Mat, targets: &[usize], cmask: usize, cval: usize) {
        let k = targets.len();
        let dim = 1usize << k;
        let offsets: Vec<usize> =
            (0..dim).map(|j| (0..k).filter(|&b| j >> b & 1 == 1).map(|b| 1usize << targets[b]).sum()).collect();
        let mut sorted: Vec<usize> = targets.to_vec();
        sorted.sort_unstable();
        let mut buf = vec![ZERO; dim];
        let groups = self.amps.len() >> k;
        for r in 0..groups {
            let mut base = r;
            for &t in &sorted {
                let low = base & ((1 << t) - 1);
                base = (base >> t << (t + 1)) | low;
            }
            if base & cmask != cval {
                continue;
            }
            for (j, off) in offsets.iter().enumerate() {
                buf[j] = self.amps[base + off];
            }
            for (i, off) in offsets.iter().enumerate() {
                let mut acc = ZERO;
                for j in 0..dim {
                    acc += m[(i, j)] * buf[j];
                }
                self.amps[base + off] = acc;
            }
        }
    }

    pub fn marginal_distribution(&self, qubits: &[usize], conditioned_on: &[(usize, u8)]) -> Result<Distribution> {
        check_qubits(self.num_qubits, qubits.iter().copied().chain(conditioned_on.iter().map(|p| p.0)))?;
        if qubits.len() > 24 {
            return Err(Error::invalid("marginals over more than 24 qubits are not supported"));
        }
        let (cmask, cval) = conditioned_on
            .iter()
            .fold((0usize, 0usize), |(m, v), &(q, b)| (m | 1 << q, if b == 1 { v | 1 << q } else { v }));
        let width = qubits.len();
        let key_of = |i: usize| -> usize {
            qubits.iter().enumerate().fold(0, |acc, (k, &q)| acc | ((i >> q & 1) << k))
        };
        let dense = self
            .amps
            .par_iter()
            .enumerate()
            .fold(
                || vec![0.0f64; 1 << width],
                |mut acc, (i, z)| {
                    if i & cmask == cval {
                        acc[key_of(i)] += z.norm_sqr();
                    }
                    acc
                },
            )
            .reduce(
                || vec![0.0f64; 1 << width],
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    a
                },
            );
        let event: f64 = dense.iter().sum();
        if event < BRANCH_EPS {
            return Err(Error::EmptyBranch(event));
        }
        let dense: Vec<f64> = dense.iter().map(|p| p / event).collect();
        Ok(Distribution::from_dense(width, &dense))
    }

    pub fn sample_counts(&self, qubits: &[usize], shots: usize, seed: u64) -> Result<BTreeMap<u64, u64>> {
        if shots == 0 {
            return Err(Error::invalid("shots must be at least 1"));
        }
        let dist = self.marginal_distribution(qubits, &[])?;
        Ok(sample_distribution(&dist, shots, seed))
    }

    /// Projects `qubit` onto `bit` and renormalizes.
    pub fn postselect(&self, qubit: usize, bit: u8) -> Result<(Statevector, f64)> {
        check_qubits(self.num_qubits, [qubit])?;
        let mask = 1usize << qubit;
        let want = if bit == 1 { mask } else { 0 };
        let p: f64 = self.amps.iter().enumerate().filter(|(i, _)| i & mask == want).map(|(_, z)| z.norm_sqr()).sum();
        if p < BRANCH_EPS {
            return Err(Error::PostselectionFailed(p));
        }
        let scale = 1.0 / p.sqrt();
        let amps = self
            .amps
            .iter()
            .enumerate()
            .map(|(i, z)| if i & mask == want { z * scale } else { ZERO })
            .collect();
        Ok((Statevector { num_qubits: self.num_qubits, amps }, p))
    }

    pub fn inner_product(&self, other: &Statevector) -> Result<C64> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::DimensionMismatch { expected: self.num_qubits, found: other.num_qubits });
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    /// Unnormalized amplitudes of `keep` with every other qubit pinned by `fixed`.
    /// Bit `k` of the returned index is `keep[k]`.
    pub fn slice(&self, keep: &[usize], fixed: &[(usize, u8)]) -> Result<Vec<C64>> {
        check_qubits(self.num_qubits, keep.iter().copied().chain(fixed.iter().map(|p| p.0)))?;
        if keep.len() + fixed.len() != self.num_qubits {
            return Err(Error::invalid("slice must pin every qubit outside `keep`"));
        }
        let base = fixed.iter().fold(0usize, |acc, &(q, b)| acc | ((b as usize & 1) << q));
        Ok((0..1usize << keep.len())
            .map(|j| {
                let idx = keep.iter().enumerate().fold(base, |acc, (k, &q)| acc | ((j >> k & 1) << q));
                self.amps[idx]
            })
            .collect())
    }
}

/// Independent per-task seed derived from a base seed.
pub fn derive_seed(base: u64, k: u64) -> u64 {
    let mut z = base.wrapping_add(k.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Draws `shots` samples from `dist` with a seeded ChaCha stream.
pub fn sample_distribution(dist: &Distribution, shots: usize, seed: u64) -> BTreeMap<u64, u64> {
    let keys: Vec<u64> = dist.probs.keys().copied().collect();
    let mut cumulative = Vec::with_capacity(keys.len());
    let mut acc = 0.0;
    for k in &keys {
        acc += dist.probs[k];
        cumulative.push(acc);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = BTreeMap::new();
    for _ in 0..shots {
        let r: f64 = rng.random::<f64>() * acc;
        let pos = cumulative.partition_point(|&c| c <= r).min(keys.len() - 1);
        *counts.entry(keys[pos]).or_insert(0) += 1;
    }
    counts
}
