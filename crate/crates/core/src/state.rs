//! Fock inputs, beam splitters and the distributions produced from them.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{parse_rational, Rational, Scalar, DEFAULT_TOLERANCE};

/// Two-mode Fock input `|K>_a |L>_b`, stored as total `S = K + L` and
/// population difference `Δ = K - L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct FockPair {
    total: u32,
    delta: i64,
}

impl FockPair {
    pub fn new(total: u32, delta: i64) -> Result<Self> {
        if delta.unsigned_abs() > u64::from(total) {
            return Err(Error::range(
                "delta",
                format!("|{delta}| exceeds total {total}"),
            ));
        }
        if (i64::from(total) - delta) % 2 != 0 {
            return Err(Error::ParityMismatch { total, delta });
        }
        Ok(FockPair { total, delta })
    }

    pub fn from_modes(k: u32, l: u32) -> Self {
        FockPair {
            total: k + l,
            delta: i64::from(k) - i64::from(l),
        }
    }

    pub fn total(&self) -> u32 {
        self.total
    }

    pub fn delta(&self) -> i64 {
        self.delta
    }

    /// Photons in mode `a`.
    pub fn k(&self) -> u32 {
        ((i64::from(self.total) + self.delta) / 2) as u32
    }

    /// Photons in mode `b`.
    pub fn l(&self) -> u32 {
        ((i64::from(self.total) - self.delta) / 2) as u32
    }

    pub fn mirrored(&self) -> Self {
        FockPair {
            total: self.total,
            delta: -self.delta,
        }
    }

    /// Index of `delta_out` on this pair's lattice.
    pub fn lattice_index(&self, delta_out: i64) -> Result<usize> {
        lattice_index(self.total, delta_out)
    }
}

impl fmt::Display for FockPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{}>|{}> (S={}, Δ={})", self.k(), self.l(), self.total, self.delta)
    }
}

/// Lossless beam splitter with single-photon reflectivity `r` and phase
/// convention `φ = π`. The transmissivity is always `1 - r`.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamSplitter {
    reflectivity: f64,
    rational: Option<Rational>,
}

impl BeamSplitter {
    pub fn new(reflectivity: f64) -> Result<Self> {
        check_unit_interval("reflectivity", reflectivity)?;
        Ok(BeamSplitter {
            reflectivity,
            rational: None,
        })
    }

    /// Beam splitter carrying an exact rational reflectivity.
    pub fn from_rational(reflectivity: Rational) -> Result<Self> {
        if reflectivity < Rational::zero() || reflectivity > Rational::one() {
            return Err(Error::range("reflectivity", format!("{reflectivity} not in [0, 1]")));
        }
        Ok(BeamSplitter {
            reflectivity: reflectivity.to_f64(),
            rational: Some(reflectivity),
        })
    }

    pub fn from_ratio(numer: i64, denom: i64) -> Result<Self> {
        if denom == 0 {
            return Err(Error::range("reflectivity", "zero denominator"));
        }
        Self::from_rational(Rational::new(numer.into(), denom.into()))
    }

    /// Parses `0.2` or `1/5`; the result carries the exact rational form.
    pub fn parse(text: &str) -> Result<Self> {
        Self::from_rational(parse_rational(text)?)
    }

    /// Beam splitter with reflectivity `sin²θ`.
    pub fn from_theta(theta: f64) -> Result<Self> {
        Self::new(theta.sin().powi(2).clamp(0.0, 1.0))
    }

    pub fn reflectivity(&self) -> f64 {
        self.reflectivity
    }

    pub fn transmissivity(&self) -> f64 {
        1.0 - self.reflectivity
    }

    pub fn rational_form(&self) -> Option<&Rational> {
        self.rational.as_ref()
    }

    /// Mixing angle `θ = arcsin √r`.
    pub fn theta(&self) -> f64 {
        self.reflectivity.sqrt().asin()
    }

    /// Spin-rotation angle of the equivalent spin-`S/2` rotation, `2θ`.
    pub fn rotation_angle(&self) -> f64 {
        2.0 * self.theta()
    }

    /// Reflectivity lifted into the requested arithmetic.
    pub fn r<T: Scalar>(&self) -> Result<T> {
        T::from_param(self.reflectivity, self.rational.as_ref(), "reflectivity")
    }

    /// Transmissivity lifted into the requested arithmetic.
    pub fn t<T: Scalar>(&self) -> Result<T> {
        Ok(T::one() - self.r::<T>()?)
    }

    pub fn is_identity(&self) -> bool {
        self.reflectivity == 0.0
    }

    pub fn is_swap(&self) -> bool {
        self.reflectivity == 1.0
    }
}

pub(crate) fn check_unit_interval(what: &'static str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::range(what, format!("{value} not in [0, 1]")));
    }
    Ok(())
}

/// `{-S, -S+2, ..., S}`.
pub fn delta_lattice(total: u32) -> Vec<i64> {
    let s = i64::from(total);
    (0..=s).map(|i| -s + 2 * i).collect()
}

pub(crate) fn lattice_index(total: u32, delta_out: i64) -> Result<usize> {
    let s = i64::from(total);
    if delta_out.abs() > s || (s - delta_out) % 2 != 0 {
        return Err(Error::Lattice { total, delta_out });
    }
    Ok(((delta_out + s) / 2) as usize)
}

/// Anything that assigns probability to integer population differences.
pub trait DeltaMass<T> {
    fn masses(&self) -> Vec<(i64, T)>;
}

/// Output distribution of `Δ_out` for a fixed total `S`, stored densely on
/// the step-2 lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaDistribution<T> {
    total: u32,
    probs: Vec<T>,
}

impl<T: Scalar> DeltaDistribution<T> {
    /// Validates length, non-negativity and normalization.
    pub fn new(total: u32, probs: Vec<T>) -> Result<Self> {
        Self::with_tolerance(total, probs, DEFAULT_TOLERANCE)
    }

    pub fn with_tolerance(total: u32, probs: Vec<T>, tolerance: f64) -> Result<Self> {
        if probs.len() != total as usize + 1 {
            return Err(Error::range(
                "distribution length",
                format!("{} entries for total {total}", probs.len()),
            ));
        }
        let dist = DeltaDistribution { total, probs };
        dist.validate(tolerance)?;
        Ok(dist)
    }

    pub(crate) fn from_raw(total: u32, probs: Vec<T>) -> Self {
        debug_assert_eq!(probs.len(), total as usize + 1);
        DeltaDistribution {
            total,
            probs: probs.into_iter().map(Scalar::flush).collect(),
        }
    }

    pub fn point_mass(total: u32, at: i64) -> Result<Self> {
        let idx = lattice_index(total, at)?;
        let mut probs = vec![T::zero(); total as usize + 1];
        probs[idx] = T::one();
        Ok(DeltaDistribution { total, probs })
    }

    pub fn validate(&self, tolerance: f64) -> Result<()> {
        for (d, p) in self.iter() {
            if *p < T::zero() {
                return Err(Error::Negative {
                    value: p.to_f64(),
                    at: format!("delta_out={d}"),
                });
            }
        }
        let mass = self.mass();
        if !T::is_unit_mass(&mass, tolerance) {
            return Err(Error::Normalization {
                mass: mass.to_f64(),
                tolerance,
            });
        }
        Ok(())
    }

    pub fn total(&self) -> u32 {
        self.total
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn lattice(&self) -> Vec<i64> {
        delta_lattice(self.total)
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, &T)> + '_ {
        let s = i64::from(self.total);
        self.probs
            .iter()
            .enumerate()
            .map(move |(i, p)| (-s + 2 * i as i64, p))
    }

    /// Probability at `delta_out`; zero off the lattice.
    pub fn get(&self, delta_out: i64) -> T {
        match lattice_index(self.total, delta_out) {
            Ok(i) => self.probs[i].clone(),
            Err(_) => T::zero(),
        }
    }

    pub fn mass(&self) -> T {
        T::sum_ordered(self.probs.iter().cloned())
    }

    /// The distribution of `-Δ_out`.
    pub fn mirrored(&self) -> Self {
        let mut probs = self.probs.clone();
        probs.reverse();
        DeltaDistribution {
            total: self.total,
            probs,
        }
    }

    /// Dense export over every integer in `[-S, S]`; entries of the opposite
    /// parity are structural zeros.
    pub fn to_marginal(&self) -> DeltaMarginal<T> {
        let s = i64::from(self.total);
        let mut map = BTreeMap::new();
        for d in -s..=s {
            map.insert(d, self.get(d));
        }
        DeltaMarginal(map)
    }

    /// Embed each `Δ_out` as the count pair `(p, q)` with `p + q = S`.
    pub fn to_joint(&self) -> JointCountDistribution<T> {
        let s = i64::from(self.total);
        let entries = self
            .iter()
            .filter(|(_, p)| !p.is_zero())
            .map(|(d, p)| ((((s + d) / 2) as u32, ((s - d) / 2) as u32), p.clone()))
            .collect();
        JointCountDistribution { entries }
    }

    pub fn to_f64(&self) -> DeltaDistribution<f64> {
        DeltaDistribution {
            total: self.total,
            probs: self.probs.iter().map(Scalar::to_f64).collect(),
        }
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> DeltaDistribution<U> {
        DeltaDistribution {
            total: self.total,
            probs: self.probs.iter().map(f).collect(),
        }
    }
}

impl<T: Scalar> DeltaMass<T> for DeltaDistribution<T> {
    fn masses(&self) -> Vec<(i64, T)> {
        self.iter().map(|(d, p)| (d, p.clone())).collect()
    }
}

/// Probability over arbitrary integer `Δ_out`, used once totals vary.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DeltaMarginal<T>(pub BTreeMap<i64, T>);

impl<T: Scalar> DeltaMarginal<T> {
    pub fn get(&self, delta_out: i64) -> T {
        self.0.get(&delta_out).cloned().unwrap_or_else(T::zero)
    }

    pub fn mass(&self) -> T {
        T::sum_ordered(self.0.values().cloned())
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, &T)> + '_ {
        self.0.iter().map(|(d, p)| (*d, p))
    }

    /// Restrict to the lattice of `total`. Fails if any mass lies elsewhere.
    pub fn into_distribution(self, total: u32) -> Result<DeltaDistribution<T>> {
        let mut probs = vec![T::zero(); total as usize + 1];
        for (d, p) in self.0 {
            match lattice_index(total, d) {
                Ok(i) => probs[i] = probs[i].clone() + p,
                Err(e) if !p.is_zero() => return Err(e),
                Err(_) => {}
            }
        }
        Ok(DeltaDistribution::from_raw(total, probs))
    }
}

impl<T: Scalar> DeltaMass<T> for DeltaMarginal<T> {
    fn masses(&self) -> Vec<(i64, T)> {
        self.0.iter().map(|(d, p)| (*d, p.clone())).collect()
    }
}

/// Probability over output count pairs `(p, q)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct JointCountDistribution<T> {
    entries: BTreeMap<(u32, u32), T>,
}

impl<T: Scalar> JointCountDistribution<T> {
    pub fn new(entries: BTreeMap<(u32, u32), T>) -> Result<Self> {
        let joint = JointCountDistribution { entries };
        for (&(p, q), v) in &joint.entries {
            if *v < T::zero() {
                return Err(Error::Negative {
                    value: v.to_f64(),
                    at: format!("({p},{q})"),
                });
            }
        }
        let mass = joint.mass();
        if !T::is_unit_mass(&mass, DEFAULT_TOLERANCE) {
            return Err(Error::Normalization {
                mass: mass.to_f64(),
                tolerance: DEFAULT_TOLERANCE,
            });
        }
        Ok(joint)
    }

    pub(crate) fn from_raw(entries: BTreeMap<(u32, u32), T>) -> Self {
        JointCountDistribution { entries }
    }

    pub fn from_pairs<I: IntoIterator<Item = ((u32, u32), T)>>(pairs: I) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (key, v) in pairs {
            let slot = entries.entry(key).or_insert_with(T::zero);
            *slot = slot.clone() + v;
        }
        Self::new(entries)
    }

    pub fn get(&self, p: u32, q: u32) -> T {
        self.entries.get(&(p, q)).cloned().unwrap_or_else(T::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(u32, u32), &T)> + '_ {
        self.entries.iter()
    }

    pub fn entries(&self) -> &BTreeMap<(u32, u32), T> {
        &self.entries
    }

    pub fn mass(&self) -> T {
        T::sum_ordered(self.entries.values().cloned())
    }

    /// Drops structurally zero entries.
    pub fn pruned(mut self) -> Self {
        self.entries.retain(|_, v| !v.is_zero());
        self
    }

    pub fn to_f64(&self) -> JointCountDistribution<f64> {
        JointCountDistribution {
            entries: self.entries.iter().map(|(k, v)| (*k, v.to_f64())).collect(),
        }
    }
}

/// Marginal of `Δ_out = p - q`.
pub fn delta_marginal<T: Scalar>(joint: &JointCountDistribution<T>) -> DeltaMarginal<T> {
    let mut out: BTreeMap<i64, Vec<T>> = BTreeMap::new();
    for (&(p, q), v) in joint.iter() {
        out.entry(i64::from(p) - i64::from(q))
            .or_default()
            .push(v.clone());
    }
    DeltaMarginal(
        out.into_iter()
            .map(|(d, vs)| (d, T::sum_ordered(vs)))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn canonical_hom_pair() {
        let pair = FockPair::new(2, 0).unwrap();
        assert_eq!((pair.k(), pair.l()), (1, 1));
    }

    #[test]
    fn unbalanced_pair_occupations() {
        let pair = FockPair::new(50, -30).unwrap();
        assert_eq!((pair.k(), pair.l()), (10, 40));
    }

    #[test]
    fn odd_difference_is_rejected() {
        assert_eq!(
            FockPair::new(3, 0),
            Err(Error::ParityMismatch { total: 3, delta: 0 })
        );
        assert!(matches!(FockPair::new(2, 4), Err(Error::Range { .. })));
    }

    #[test]
    fn from_modes_examples() {
        assert_eq!(FockPair::from_modes(1, 1), FockPair::new(2, 0).unwrap());
        assert_eq!(FockPair::from_modes(0, 50), FockPair::new(50, -50).unwrap());
        assert_eq!(FockPair::from_modes(5, 5), FockPair::new(10, 0).unwrap());
    }

    #[test]
    fn lattices() {
        assert_eq!(delta_lattice(0), vec![0]);
        assert_eq!(delta_lattice(2), vec![-2, 0, 2]);
        assert_eq!(delta_lattice(5), vec![-5, -3, -1, 1, 3, 5]);
    }

    #[test]
    fn marginal_examples() {
        let j = JointCountDistribution::from_pairs([((1, 1), q(1, 1))]).unwrap();
        assert_eq!(delta_marginal(&j).0, BTreeMap::from([(0, q(1, 1))]));

        let j = JointCountDistribution::from_pairs([((2, 0), q(1, 2)), ((0, 2), q(1, 2))]).unwrap();
        assert_eq!(
            delta_marginal(&j).0,
            BTreeMap::from([(-2, q(1, 2)), (2, q(1, 2))])
        );

        let j = JointCountDistribution::from_pairs([((1, 0), 0.3), ((0, 0), 0.7)]).unwrap();
        assert_eq!(delta_marginal(&j).0, BTreeMap::from([(0, 0.7), (1, 0.3)]));
    }

    #[test]
    fn beam_splitter_validation() {
        assert!(BeamSplitter::new(1.2).is_err());
        assert!(BeamSplitter::from_ratio(-1, 5).is_err());
        let bs = BeamSplitter::parse("0.2").unwrap();
        assert_eq!(bs.rational_form(), Some(&q(1, 5)));
        assert_eq!(bs.t::<Rational>().unwrap(), q(4, 5));
        assert!((bs.theta().sin().powi(2) - 0.2).abs() < 1e-15);
        assert!(BeamSplitter::new(0.3).unwrap().r::<Rational>().is_err());
    }

    #[test]
    fn distribution_validation() {
        assert!(DeltaDistribution::new(2, vec![0.5, 0.0, 0.5]).is_ok());
        assert!(matches!(
            DeltaDistribution::new(2, vec![0.5, 0.0, 0.4]),
            Err(Error::Normalization { .. })
        ));
        assert!(matches!(
            DeltaDistribution::new(2, vec![1.5, 0.0, -0.5]),
            Err(Error::Negative { .. })
        ));
        assert!(DeltaDistribution::new(2, vec![1.0, 0.0]).is_err());
        let exact = DeltaDistribution::new(1, vec![q(1, 3), q(2, 3)]).unwrap();
        assert_eq!(exact.mass(), q(1, 1));
        assert!(DeltaDistribution::new(1, vec![q(1, 3), q(1, 3)]).is_err());
    }

    #[test]
    fn structural_zeros_on_export() {
        let d = DeltaDistribution::new(2, vec![0.5, 0.0, 0.5]).unwrap();
        let m = d.to_marginal();
        assert_eq!(m.0.len(), 5);
        assert_eq!(m.get(1), 0.0);
        assert_eq!(m.into_distribution(2).unwrap(), d);
    }

    proptest! {
        #[test]
        fn modes_round_trip(k in 0u32..200, l in 0u32..200) {
            let pair = FockPair::from_modes(k, l);
            prop_assert_eq!(FockPair::new(pair.total(), pair.delta()).unwrap(), pair);
            prop_assert_eq!((pair.k(), pair.l()), (k, l));
        }

        #[test]
        fn lattice_has_constant_step(s in 0u32..500) {
            let lat = delta_lattice(s);
            prop_assert_eq!(lat.len(), s as usize + 1);
            prop_assert!(lat.windows(2).all(|w| w[1] - w[0] == 2));
            for (i, d) in lat.iter().enumerate() {
                prop_assert_eq!(lattice_index(s, *d).unwrap(), i);
            }
        }
    }
}
