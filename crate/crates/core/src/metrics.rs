//! Moments, the moment laws, second-order visibility and distances.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::Scalar;
use crate::state::{DeltaDistribution, DeltaMass};

pub fn mean_delta<T: Scalar>(d: &impl DeltaMass<T>) -> T {
    T::sum_ordered(d.masses().into_iter().map(|(x, p)| p * T::from_i64(x)))
}

pub fn variance_delta<T: Scalar>(d: &impl DeltaMass<T>) -> T {
    let masses = d.masses();
    let mu = T::sum_ordered(masses.iter().map(|(x, p)| p.clone() * T::from_i64(*x)));
    T::sum_ordered(masses.into_iter().map(|(x, p)| {
        let dev = T::from_i64(x) - mu.clone();
        p * dev.clone() * dev
    }))
}

/// `Δ(1 - 2r)`.
pub fn predicted_mean<T: Scalar>(delta: i64, r: &T) -> T {
    T::from_i64(delta) * (T::one() - T::from_u64(2) * r.clone())
}

/// `((S² - Δ²)/2 + S) · 4r(1 - r)`.
pub fn predicted_variance<T: Scalar>(total: u32, delta: i64, r: &T) -> T {
    T::from_i64(ballistic_coefficient(total, delta)) * r.clone() * (T::one() - r.clone())
}

/// Coefficient of `θ²` in the variance for small splitter angle `θ`
/// (`r = sin²θ`), equal to `4((S² - Δ²)/2 + S)`.
pub fn ballistic_coefficient(total: u32, delta: i64) -> i64 {
    let s = i64::from(total);
    2 * (s * s - delta * delta) + 4 * s
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VisibilityReport<T> {
    pub value: T,
    pub nonclassical: bool,
}

impl<T: Scalar> VisibilityReport<T> {
    fn new(value: T) -> Self {
        let half = T::one() / T::from_u64(2);
        let nonclassical = value > half;
        VisibilityReport { value, nonclassical }
    }
}

fn check_open_unit<T: Scalar>(r: &T) -> Result<()> {
    if *r <= T::zero() || *r >= T::one() {
        return Err(Error::range("r", format!("{} not in (0, 1)", r.render())));
    }
    Ok(())
}

/// Visibility for normally ordered moments `<:n_a n_b:>`, `<:n_a²:>`, `<:n_b²:>`.
pub fn visibility_from_moments<T: Scalar>(gab: &T, gaa: &T, gbb: &T, r: &T) -> Result<VisibilityReport<T>> {
    check_open_unit(r)?;
    let t = T::one() - r.clone();
    let rt = r.clone() * t.clone();
    let denom = rt.clone() * (gaa.clone() + gbb.clone())
        + (r.clone() * r.clone() + t.clone() * t) * gab.clone();
    if denom.is_zero() {
        return Err(Error::Degenerate(format!(
            "zero denominator for moments ({}, {}, {})",
            gab.render(),
            gaa.render(),
            gbb.render()
        )));
    }
    Ok(VisibilityReport::new(T::from_u64(2) * rt * gab.clone() / denom))
}

/// Visibility for the Fock input `|n>_a |m>_b`.
pub fn visibility_fock<T: Scalar>(n: u32, m: u32, r: &T) -> Result<VisibilityReport<T>> {
    if n + m == 0 {
        return Err(Error::Degenerate("vacuum input".into()));
    }
    let (n, m) = (u64::from(n), u64::from(m));
    visibility_from_moments(
        &T::from_u64(n * m),
        &T::from_u64(n * n.saturating_sub(1)),
        &T::from_u64(m * m.saturating_sub(1)),
        r,
    )
}

/// Nonclassicality mask over `1 ≤ n ≤ n_max`, `1 ≤ m ≤ m_max`; `mask[n-1][m-1]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VisibilityRegion {
    pub r: f64,
    pub n_max: u32,
    pub m_max: u32,
    pub values: Vec<Vec<f64>>,
    pub mask: Vec<Vec<bool>>,
}

impl VisibilityRegion {
    pub fn is_nonclassical(&self, n: u32, m: u32) -> bool {
        self.mask[(n - 1) as usize][(m - 1) as usize]
    }

    /// Largest `m` in row `n` that is nonclassical, if any.
    pub fn row_extent(&self, n: u32) -> Option<u32> {
        self.mask[(n - 1) as usize]
            .iter()
            .rposition(|&b| b)
            .map(|i| i as u32 + 1)
    }
}

pub fn visibility_region(n_max: u32, m_max: u32, r: f64) -> Result<VisibilityRegion> {
    check_open_unit(&r)?;
    if n_max == 0 || m_max == 0 {
        return Err(Error::range("region size", "n_max and m_max must be at least 1"));
    }
    let values: Vec<Vec<f64>> = (1..=n_max)
        .into_par_iter()
        .map(|n| {
            (1..=m_max)
                .map(|m| visibility_fock(n, m, &r).map(|v| v.value))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let mask = values
        .iter()
        .map(|row| row.iter().map(|v| *v > 0.5).collect())
        .collect();
    Ok(VisibilityRegion {
        r,
        n_max,
        m_max,
        values,
        mask,
    })
}

/// Largest single probability on sites whose parity differs from `total`.
pub fn parity_violation<T: Scalar>(d: &impl DeltaMass<T>, total: u32) -> T {
    let s = i64::from(total);
    d.masses()
        .into_iter()
        .filter(|(x, _)| (x - s).rem_euclid(2) != 0)
        .map(|(_, p)| p.abs())
        .fold(T::zero(), |acc, p| if p > acc { p } else { acc })
}

/// `½ Σ |p₁ - p₂|` over the union of supports.
pub fn tv_distance<T: Scalar>(d1: &impl DeltaMass<T>, d2: &impl DeltaMass<T>) -> T {
    let mut all = std::collections::BTreeMap::<i64, (T, T)>::new();
    for (x, p) in d1.masses() {
        all.entry(x).or_insert((T::zero(), T::zero())).0 = p;
    }
    for (x, p) in d2.masses() {
        all.entry(x).or_insert((T::zero(), T::zero())).1 = p;
    }
    T::sum_ordered(all.into_values().map(|(a, b)| (a - b).abs())) / T::from_u64(2)
}

/// Probability of arriving at the mirrored site `-Δ`.
pub fn transfer_fidelity<T: Scalar>(d: &DeltaDistribution<T>, delta: i64) -> T {
    if delta.unsigned_abs() > u64::from(d.total()) {
        return T::zero();
    }
    d.get(-delta)
}

/// Whether `v` is exactly one, for reports that should be perfect.
pub fn is_perfect<T: Scalar>(v: &VisibilityReport<T>) -> bool {
    v.value.is_one()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;
    use crate::closed_form::distribution;
    use crate::numeric::Rational;
    use crate::state::{BeamSplitter, DeltaMarginal, FockPair};
    use proptest::prelude::*;
    use std::collections::BTreeMap;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn moments_of_simple_distributions() {
        let d = DeltaDistribution::<Rational>::point_mass(5, 3).unwrap();
        assert_eq!(mean_delta(&d), q(3, 1));
        assert_eq!(variance_delta(&d), q(0, 1));
        let m = DeltaMarginal(BTreeMap::from([(-2, q(1, 2)), (2, q(1, 2))]));
        assert_eq!(mean_delta(&m), q(0, 1));
        assert_eq!(variance_delta(&m), q(4, 1));
    }

    #[test]
    fn laws_by_hand() {
        assert!((predicted_mean(1, &0.3) - 0.4).abs() < 1e-15);
        assert_eq!(predicted_mean(7, &q(1, 2)), q(0, 1));
        assert_eq!(predicted_mean(7, &q(1, 1)), q(-7, 1));
        let r = q(3, 10);
        let one_minus = q(1, 1) - (q(1, 1) - q(2, 1) * r.clone()).pow(2);
        assert_eq!(predicted_variance(1, 1, &r), one_minus);
        assert_eq!(predicted_variance(2, 0, &q(1, 2)), q(4, 1));
        assert_eq!(predicted_variance(9, 3, &q(0, 1)), q(0, 1));
        assert_eq!(predicted_variance(9, 3, &q(1, 1)), q(0, 1));
    }

    #[test]
    fn laws_match_distribution() {
        let pair = FockPair::new(50, -30).unwrap();
        let d = distribution::<f64>(&pair, &BeamSplitter::new(0.2).unwrap()).unwrap();
        assert!((mean_delta(&d) - predicted_mean(-30, &0.2)).abs() < 1e-9);
        assert!((variance_delta(&d) - predicted_variance(50, -30, &0.2)).abs() < 1e-9);

        let pair = FockPair::new(12, 4).unwrap();
        let r = q(2, 7);
        let d = distribution::<Rational>(&pair, &BeamSplitter::from_rational(r.clone()).unwrap()).unwrap();
        assert_eq!(mean_delta(&d), predicted_mean(4, &r));
        assert_eq!(variance_delta(&d), predicted_variance(12, 4, &r));
    }

    #[test]
    fn small_angle_coefficient() {
        for (s, delta) in [(1u32, 1i64), (10, 0), (50, -30)] {
            let theta: f64 = 1e-4;
            let r = theta.sin().powi(2);
            let ratio = predicted_variance(s, delta, &r) / theta.powi(2);
            assert!((ratio / ballistic_coefficient(s, delta) as f64 - 1.0).abs() < 1e-7);
            let shape = (f64::from(s * s) - (delta * delta) as f64) / 2.0 + f64::from(s);
            assert!((ballistic_coefficient(s, delta) as f64 / shape - 4.0).abs() < 1e-15);
        }
    }

    #[test]
    fn visibility_examples() {
        let v = visibility_fock(5, 5, &q(1, 2)).unwrap();
        assert_eq!(v.value, q(5, 9));
        assert!(v.nonclassical);
        let v = visibility_fock(1, 1, &q(1, 2)).unwrap();
        assert!(is_perfect(&v));
        assert!(matches!(visibility_fock(0, 0, &0.5), Err(Error::Degenerate(_))));
        assert!(matches!(visibility_fock(1, 0, &0.5), Err(Error::Degenerate(_))));
        assert_eq!(visibility_fock(0, 3, &0.5).unwrap().value, 0.0);
        assert!(visibility_fock(2, 2, &0.0).is_err());
        assert!(visibility_fock(2, 2, &1.0).is_err());

        let v = visibility_fock(10, 2, &0.36).unwrap();
        let expect = 2.0 * 0.36 * 0.64 * 20.0 / (0.36 * 0.64 * (90.0 + 2.0) + (0.36f64.powi(2) + 0.64f64.powi(2)) * 20.0);
        assert!((v.value - expect).abs() < 1e-15);
        assert!(!v.nonclassical);
    }

    #[test]
    fn moments_form_reduces_and_scales() {
        let r = q(3, 7);
        let fock = visibility_fock(4, 3, &r).unwrap();
        let direct = visibility_from_moments(&q(12, 1), &q(12, 1), &q(6, 1), &r).unwrap();
        assert_eq!(fock, direct);
        let c = q(81, 100);
        let scaled = visibility_from_moments(&(q(12, 1) * &c), &(q(12, 1) * &c), &(q(6, 1) * &c), &r).unwrap();
        assert_eq!(scaled, direct);
        assert_eq!(visibility_from_moments(&q(0, 1), &q(2, 1), &q(0, 1), &r).unwrap().value, q(0, 1));
        assert!(visibility_from_moments(&q(0, 1), &q(0, 1), &q(0, 1), &r).is_err());
    }

    #[test]
    fn region_shape() {
        let region = visibility_region(10, 10, 0.5).unwrap();
        for n in 1..=10 {
            assert!(region.is_nonclassical(n, n));
        }
        let region = visibility_region(10, 10, 0.36).unwrap();
        assert!(region.is_nonclassical(1, 1));
        assert!(!region.is_nonclassical(10, 2));
    }

    #[test]
    fn parity_and_distance() {
        let d = distribution::<Rational>(&FockPair::new(7, 1).unwrap(), &BeamSplitter::from_ratio(1, 3).unwrap()).unwrap();
        assert_eq!(parity_violation(&d.to_marginal(), 7), q(0, 1));
        assert_eq!(tv_distance(&d, &d), q(0, 1));
        let m = DeltaMarginal(BTreeMap::from([(0, 0.75), (1, 0.25)]));
        assert_eq!(parity_violation(&m, 2), 0.25);
        let a = DeltaMarginal(BTreeMap::from([(0, 1.0)]));
        let b = DeltaMarginal(BTreeMap::from([(2, 1.0)]));
        assert_eq!(tv_distance(&a, &b), 1.0);
    }

    #[test]
    fn unit_transfer() {
        let bs = BeamSplitter::from_ratio(1, 1).unwrap();
        for (s, delta) in [(1, 1), (6, -2), (9, 9)] {
            let d = distribution::<Rational>(&FockPair::new(s, delta).unwrap(), &bs).unwrap();
            assert!(transfer_fidelity(&d, delta).is_one());
        }
    }

    proptest! {
        #[test]
        fn visibility_symmetries(n in 1u32..40, m in 1u32..40, rn in 1i64..99) {
            prop_assume!(n + m >= 2);
            let r = q(rn, 100);
            let v = visibility_fock(n, m, &r).unwrap();
            prop_assert_eq!(&v, &visibility_fock(m, n, &r).unwrap());
            prop_assert_eq!(&v, &visibility_fock(n, m, &(q(1, 1) - r)).unwrap());
        }

        #[test]
        fn balanced_equal_numbers(n in 1u32..200) {
            let v = visibility_fock(n, n, &q(1, 2)).unwrap();
            prop_assert_eq!(v.value, q(n as i64, 2 * n as i64 - 1));
            prop_assert!(v.nonclassical);
        }

        #[test]
        fn variance_peaks(s in 1u32..60, rn in 0i64..=100) {
            let r = q(rn, 100);
            let delta = (s % 2) as i64;
            prop_assert!(predicted_variance(s, delta, &r) <= predicted_variance(s, delta, &q(1, 2)));
            prop_assert!(predicted_variance(s, s as i64, &r) <= predicted_variance(s, delta, &r));
        }
    }
}
