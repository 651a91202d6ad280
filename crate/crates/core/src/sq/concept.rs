//! Concepts, named concept classes and finite input distributions.

use std::fmt;
use std::sync::Arc;

use rand::distributions::{Distribution as _, WeightedIndex};
use rand::Rng;

use crate::bitlinalg::BitVec;
use crate::error::{Error, Result};

/// Largest input length enumerated exhaustively.
pub const MAX_DOMAIN_BITS: usize = 20;

type Eval = Arc<dyn Fn(&BitVec) -> bool + Send + Sync>;

/// A boolean function on the input space, identified by `id` in reports.
#[derive(Clone)]
pub struct Concept {
    id: String,
    eval: Eval,
}

impl fmt::Debug for Concept {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Concept").field(&self.id).finish()
    }
}

impl Concept {
    pub fn from_fn<F>(id: impl Into<String>, f: F) -> Self
    where
        F: Fn(&BitVec) -> bool + Send + Sync + 'static,
    {
        Self {
            id: id.into(),
            eval: Arc::new(f),
        }
    }

    /// `x ↦ x·mask`.
    pub fn parity(mask: BitVec) -> Self {
        let id = format!("parity[{mask}]");
        Self::from_fn(id, move |x| mask.dot_unchecked(x))
    }

    /// AND of the coordinates set in `mask`; the empty conjunction is constant 1.
    pub fn conjunction(mask: BitVec) -> Self {
        let id = format!("and[{mask}]");
        Self::from_fn(id, move |x| {
            mask.words()
                .iter()
                .zip(x.words())
                .all(|(m, w)| m & w == *m)
        })
    }

    pub fn constant(value: bool) -> Self {
        Self::from_fn(format!("const[{}]", u8::from(value)), move |_| value)
    }

    pub fn complement(&self) -> Self {
        let inner = self.eval.clone();
        Self {
            id: format!("not[{}]", self.id),
            eval: Arc::new(move |x| !inner(x)),
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn eval(&self, x: &BitVec) -> bool {
        (self.eval)(x)
    }
}

/// A registered class such as `parity:3-of-8`.
#[derive(Debug, Clone)]
pub struct ConceptClass {
    pub name: String,
    /// Input length.
    pub n: usize,
    pub concepts: Vec<Concept>,
}

impl ConceptClass {
    /// Resolves `parity:j-of-n` (all parities on the first `j` of `n` bits) or
    /// `conjunction:j-of-n` (all monotone conjunctions over the first `j` bits).
    pub fn by_name(name: &str) -> Result<Self> {
        let unknown = || Error::UnknownName(name.to_string());
        let (family, shape) = name.split_once(':').ok_or_else(unknown)?;
        let (j, n) = shape.split_once("-of-").ok_or_else(unknown)?;
        let j: usize = j.parse().map_err(|_| unknown())?;
        let n: usize = n.parse().map_err(|_| unknown())?;
        if n == 0 || j > n {
            return Err(Error::InvalidParameter(format!("{name}: need 1 <= n and j <= n")));
        }
        if n > MAX_DOMAIN_BITS {
            return Err(Error::TooManyBits { k: n, cap: MAX_DOMAIN_BITS });
        }
        let build: fn(BitVec) -> Concept = match family {
            "parity" => Concept::parity,
            "conjunction" => Concept::conjunction,
            _ => return Err(unknown()),
        };
        let concepts = (0..1u64 << j).map(|m| build(BitVec::from_u64(n, m))).collect();
        Ok(Self {
            name: name.to_string(),
            n,
            concepts,
        })
    }
}

/// A distribution with explicitly enumerated support.
#[derive(Debug, Clone)]
pub struct FiniteDistribution {
    n: usize,
    support: Arc<[BitVec]>,
    weights: Arc<[f64]>,
    sampler: WeightedIndex<f64>,
}

impl FiniteDistribution {
    /// Uniform over all of `{0,1}^n`.
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::ZeroCount("n"));
        }
        if n > MAX_DOMAIN_BITS {
            return Err(Error::TooManyBits { k: n, cap: MAX_DOMAIN_BITS });
        }
        let size = 1usize << n;
        let support = (0..size as u64).map(|v| BitVec::from_u64(n, v)).collect();
        Self::weighted(n, support, vec![1.0 / size as f64; size])
    }

    pub fn weighted(n: usize, support: Vec<BitVec>, weights: Vec<f64>) -> Result<Self> {
        if support.is_empty() || support.len() != weights.len() {
            return Err(Error::MalformedDistribution(format!(
                "{} support points for {} weights",
                support.len(),
                weights.len()
            )));
        }
        if let Some(x) = support.iter().find(|x| x.len() != n) {
            return Err(Error::LengthMismatch { left: x.len(), right: n });
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::MalformedDistribution("negative or non-finite weight".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::MalformedDistribution(format!("weights sum to {total}")));
        }
        let sampler =
            WeightedIndex::new(&weights).map_err(|e| Error::MalformedDistribution(e.to_string()))?;
        Ok(Self {
            n,
            support: support.into(),
            weights: weights.into(),
            sampler,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn support(&self) -> &[BitVec] {
        &self.support
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    /// Index into `support()` of a random point.
    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.sampler.sample(rng)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> BitVec {
        self.support[self.sample_index(rng)].clone()
    }

    /// `Σ_x D(x)·[f(x)]`.
    pub fn probability<F: Fn(&BitVec) -> bool>(&self, f: F) -> f64 {
        self.support
            .iter()
            .zip(self.weights.iter())
            .filter(|(x, _)| f(x))
            .map(|(_, w)| w)
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;

    fn bv(s: &str) -> BitVec {
        s.parse().unwrap()
    }

    #[test]
    fn concept_constructors() {
        let p = Concept::parity(bv("110"));
        assert!(p.eval(&bv("100")));
        assert!(!p.eval(&bv("111")));
        assert!(p.complement().eval(&bv("111")));
        let c = Concept::conjunction(bv("101"));
        assert!(c.eval(&bv("111")));
        assert!(!c.eval(&bv("110")));
        assert!(Concept::conjunction(bv("000")).eval(&bv("000")));
        assert!(!Concept::constant(false).eval(&bv("1")));
        assert_eq!(p.id(), "parity[110]");
        assert_eq!(p.complement().id(), "not[parity[110]]");
    }

    #[test]
    fn registry() {
        let c = ConceptClass::by_name("parity:3-of-5").unwrap();
        assert_eq!((c.n, c.concepts.len()), (5, 8));
        assert_eq!(c.concepts[1].id(), "parity[10000]");
        assert_eq!(ConceptClass::by_name("conjunction:2-of-2").unwrap().concepts.len(), 4);
        assert!(matches!(ConceptClass::by_name("majority:2-of-3"), Err(Error::UnknownName(_))));
        assert!(matches!(ConceptClass::by_name("parity:3"), Err(Error::UnknownName(_))));
        assert!(ConceptClass::by_name("parity:4-of-3").is_err());
        assert!(ConceptClass::by_name("parity:1-of-21").is_err());
    }

    #[test]
    fn distributions() {
        let d = FiniteDistribution::uniform(3).unwrap();
        assert_eq!(d.len(), 8);
        assert_eq!(d.probability(|x| x.get(0)), 0.5);
        assert!(FiniteDistribution::weighted(2, vec![bv("00")], vec![0.9]).is_err());
        assert!(FiniteDistribution::weighted(2, vec![bv("000")], vec![1.0]).is_err());
        assert!(FiniteDistribution::weighted(1, vec![bv("0"), bv("1")], vec![1.5, -0.5]).is_err());
        let point = FiniteDistribution::weighted(2, vec![bv("10"), bv("01")], vec![1.0, 0.0]).unwrap();
        let mut rng = seed::rng(1);
        assert!((0..100).all(|_| point.sample(&mut rng) == bv("10")));
    }
}
