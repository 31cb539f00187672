//! Vertex matchings between two `n`-vertex sets, both indexed by `0..n`.

use std::fmt;

use itertools::Itertools;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::Rng;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BijectionError {
    #[error("not a permutation of 0..{0}")]
    NotPermutation(usize),
    #[error("size mismatch: {0} vs {1}")]
    SizeMismatch(usize, usize),
    #[error("embedding is not injective or out of range")]
    InvalidEmbedding,
}

/// A bijection `V → V̄` stored with its inverse.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Bijection {
    forward: Vec<u32>,
    inverse: Vec<u32>,
}

impl Bijection {
    pub fn new(forward: Vec<usize>) -> Result<Bijection, BijectionError> {
        let n = forward.len();
        let mut inverse = vec![u32::MAX; n];
        for (v, &w) in forward.iter().enumerate() {
            if w >= n || inverse[w] != u32::MAX {
                return Err(BijectionError::NotPermutation(n));
            }
            inverse[w] = v as u32;
        }
        Ok(Bijection {
            forward: forward.into_iter().map(|w| w as u32).collect(),
            inverse,
        })
    }

    pub fn identity(n: usize) -> Bijection {
        Bijection::new((0..n).collect()).expect("identity")
    }

    /// Uniform over all `n!` bijections.
    pub fn random(n: usize, rng: &mut Rng) -> Bijection {
        let mut forward: Vec<usize> = (0..n).collect();
        forward.shuffle(rng);
        Bijection::new(forward).expect("shuffle is a permutation")
    }

    /// `v ↦ v + shift (mod n)`.
    pub fn cyclic_shift(n: usize, shift: usize) -> Bijection {
        Bijection::new((0..n).map(|v| (v + shift) % n).collect()).expect("shift")
    }

    pub fn transposition(n: usize, a: usize, b: usize) -> Bijection {
        let mut f: Vec<usize> = (0..n).collect();
        f.swap(a, b);
        Bijection::new(f).expect("transposition")
    }

    /// Permutation given in cycle notation; unlisted points are fixed.
    pub fn from_cycles(n: usize, cycles: &[&[usize]]) -> Result<Bijection, BijectionError> {
        let mut f: Vec<usize> = (0..n).collect();
        for cyc in cycles {
            for (i, &v) in cyc.iter().enumerate() {
                if v >= n {
                    return Err(BijectionError::NotPermutation(n));
                }
                f[v] = cyc[(i + 1) % cyc.len()];
            }
        }
        Bijection::new(f)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.forward.len()
    }

    #[inline]
    pub fn apply(&self, v: usize) -> usize {
        self.forward[v] as usize
    }

    #[inline]
    pub fn apply_inverse(&self, w: usize) -> usize {
        self.inverse[w] as usize
    }

    pub fn inverse(&self) -> Bijection {
        Bijection {
            forward: self.inverse.clone(),
            inverse: self.forward.clone(),
        }
    }

    /// `self ∘ other`: `v ↦ self(other(v))`.
    pub fn compose(&self, other: &Bijection) -> Result<Bijection, BijectionError> {
        if self.n() != other.n() {
            return Err(BijectionError::SizeMismatch(self.n(), other.n()));
        }
        Ok(Bijection::new((0..self.n()).map(|v| self.apply(other.apply(v))).collect()).expect("composition"))
    }

    pub fn forward(&self) -> Vec<usize> {
        self.forward.iter().map(|&w| w as usize).collect()
    }

    /// Swaps the images of `a` and `b`.
    pub fn swap_images(&mut self, a: usize, b: usize) {
        self.forward.swap(a, b);
        self.inverse[self.forward[a] as usize] = a as u32;
        self.inverse[self.forward[b] as usize] = b as u32;
    }

    /// One-line notation, e.g. `[2 0 1]`.
    pub fn one_line(&self) -> String {
        format!("[{}]", self.forward.iter().join(" "))
    }

    pub fn restrict(&self, domain: &[usize]) -> Embedding {
        Embedding {
            domain: domain.to_vec(),
            images: domain.iter().map(|&v| self.apply(v)).collect(),
        }
    }

    /// Whether `self` agrees with the embedding on its domain.
    pub fn extends(&self, sigma: &Embedding) -> bool {
        sigma
            .domain
            .iter()
            .zip(&sigma.images)
            .all(|(&v, &w)| self.apply(v) == w)
    }
}

impl TryFrom<Vec<usize>> for Bijection {
    type Error = BijectionError;
    fn try_from(v: Vec<usize>) -> Result<Self, Self::Error> {
        Bijection::new(v)
    }
}

impl From<Bijection> for Vec<usize> {
    fn from(b: Bijection) -> Self {
        b.forward()
    }
}

impl fmt::Debug for Bijection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Bijection{}", self.one_line())
    }
}

/// An injective partial map `A → V̄` with an explicit domain.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Embedding {
    pub domain: Vec<usize>,
    pub images: Vec<usize>,
}

impl Embedding {
    pub fn new(domain: Vec<usize>, images: Vec<usize>, n: usize) -> Result<Embedding, BijectionError> {
        if domain.len() != images.len()
            || domain.iter().chain(&images).any(|&x| x >= n)
            || !domain.iter().all_unique()
            || !images.iter().all_unique()
        {
            return Err(BijectionError::InvalidEmbedding);
        }
        Ok(Embedding { domain, images })
    }

    pub fn len(&self) -> usize {
        self.domain.len()
    }

    pub fn is_empty(&self) -> bool {
        self.domain.is_empty()
    }
}

/// All `n!` bijections in lexicographic order of their one-line notation.
///
/// Generation is split by the image of vertex 0 so blocks can be built in parallel.
pub fn all_bijections(n: usize) -> Vec<Bijection> {
    if n == 0 {
        return vec![Bijection::identity(0)];
    }
    let blocks = crate::par::map_indexed(n, |first| {
        let rest: Vec<usize> = (0..n).filter(|&w| w != first).collect();
        rest.iter()
            .copied()
            .permutations(n - 1)
            .map(|tail| {
                let mut f = Vec::with_capacity(n);
                f.push(first);
                f.extend(tail);
                Bijection::new(f).expect("permutation")
            })
            .collect::<Vec<_>>()
    });
    blocks.into_iter().flatten().collect()
}

/// All injective maps from `domain` into `0..n`, lexicographic in the image tuple.
pub fn all_embeddings(domain: &[usize], n: usize) -> Vec<Embedding> {
    (0..n)
        .permutations(domain.len())
        .map(|images| Embedding {
            domain: domain.to_vec(),
            images,
        })
        .collect()
}
