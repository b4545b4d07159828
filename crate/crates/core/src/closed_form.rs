//! Closed-form output distribution of two interfering Fock states.
//!
//! With `K = f₊^Δ`, `L = f₋^Δ`, `p = f₊^out`, `q = f₋^out`, `f±^x = (S ± x)/2`
//! and `t = 1 - r`:
//!
//! ```text
//! p(Δ_out) = p! q! / (K! L!) · t^S · (r/t)^((Δ-Δ_out)/2)
//!            · [ Σ_k (r/(r-1))^k C(L, k) C(K, p-k) ]²
//! ```
//!
//! with `k` from `max(0, (Δ_out-Δ)/2)` to `min(L, p)`. Here `p` counts photons
//! leaving through the port that the `a` input transmits into, so `r = 0` is
//! the identity and `r = 1` maps `Δ` to `-Δ`.
//!
//! The alternating sum cancels badly for large `S` in floating point, so the
//! float path switches to the Wigner-rotation recurrence above
//! [`FLOAT_DIRECT_MAX_TOTAL`].


use crate::error::Result;
use crate::numeric::{binomial_as, factorial_as, ln_binomial, ln_factorial, neumaier_sum, Scalar};
use crate::oracle::wigner_column;
use crate::state::{BeamSplitter, DeltaDistribution, FockPair, JointCountDistribution};

/// Largest total evaluated by the direct float sum.
pub const FLOAT_DIRECT_MAX_TOTAL: u32 = 30;

/// Below this `min(r, 1-r)` the direct float sum works in the log domain so
/// that `(r/t)^k` cannot overflow.
const LITERAL_MIN_SPLIT: f64 = 1e-6;

/// One summand of the alternating sum, exposed for inspection.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedFormTerm<T> {
    pub k: u32,
    pub value: T,
}

fn summation_range(pair: &FockPair, p: u32) -> std::ops::RangeInclusive<u32> {
    let lo = p.saturating_sub(pair.k());
    let hi = pair.l().min(p);
    lo..=hi
}

fn out_counts(pair: &FockPair, delta_out: i64) -> (u32, u32) {
    let s = i64::from(pair.total());
    (((s + delta_out) / 2) as u32, ((s - delta_out) / 2) as u32)
}

fn endpoint<T: Scalar>(pair: &FockPair, bs: &BeamSplitter, delta_out: i64) -> Option<T> {
    let target = if bs.is_identity() {
        pair.delta()
    } else if bs.is_swap() {
        -pair.delta()
    } else {
        return None;
    };
    Some(if delta_out == target { T::one() } else { T::zero() })
}

/// Terms of the alternating sum, `(r/(r-1))^k C(L,k) C(K, p-k)`.
pub fn closed_form_terms<T: Scalar>(
    pair: &FockPair,
    bs: &BeamSplitter,
    delta_out: i64,
) -> Result<Vec<ClosedFormTerm<T>>> {
    pair.lattice_index(delta_out)?;
    let r: T = bs.r()?;
    let ratio = r.clone() / (r - T::one());
    let (p, _) = out_counts(pair, delta_out);
    Ok(summation_range(pair, p)
        .map(|k| ClosedFormTerm {
            k,
            value: ratio.powu(k) * binomial_as::<T>(pair.l(), k) * binomial_as::<T>(pair.k(), p - k),
        })
        .collect())
}

/// The formula evaluated literally in `T`.
fn literal_prob<T: Scalar>(pair: &FockPair, bs: &BeamSplitter, delta_out: i64) -> Result<T> {
    let r: T = bs.r()?;
    let t = T::one() - r.clone();
    let (p, q) = out_counts(pair, delta_out);
    let terms = closed_form_terms::<T>(pair, bs, delta_out)?;
    let sum = T::sum_ordered(terms.into_iter().map(|term| term.value));

    let half_shift = (pair.delta() - delta_out) / 2;
    let tilt = if half_shift >= 0 {
        (r / t.clone()).powu(half_shift as u32)
    } else {
        (t.clone() / r).powu((-half_shift) as u32)
    };
    let prefactor = factorial_as::<T>(p) * factorial_as::<T>(q)
        / (factorial_as::<T>(pair.k()) * factorial_as::<T>(pair.l()))
        * t.powu(pair.total())
        * tilt;
    Ok(prefactor * sum.clone() * sum)
}

/// Direct float evaluation with log-domain magnitudes and compensated sum.
fn direct_float_prob(pair: &FockPair, r: f64, delta_out: i64) -> f64 {
    let t = 1.0 - r;
    let (p, q) = out_counts(pair, delta_out);
    let (k_in, l_in) = (pair.k(), pair.l());
    let half_shift = ((pair.delta() - delta_out) / 2) as f64;
    let ln_prefactor = ln_factorial(p) + ln_factorial(q) - ln_factorial(k_in) - ln_factorial(l_in)
        + f64::from(pair.total()) * t.ln()
        + half_shift * (r.ln() - t.ln());
    let ln_ratio = r.ln() - t.ln();
    let amplitude = neumaier_sum(summation_range(pair, p).map(|k| {
        let ln_mag = 0.5 * ln_prefactor
            + f64::from(k) * ln_ratio
            + ln_binomial(l_in, k)
            + ln_binomial(k_in, p - k);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sign * ln_mag.exp()
    }));
    amplitude * amplitude
}

/// Stable float column through the spin-rotation recurrence.
fn rotation_probs(pair: &FockPair, bs: &BeamSplitter) -> Result<Vec<f64>> {
    let col = wigner_column(i64::from(pair.total()), pair.delta(), bs.rotation_angle())?;
    Ok(col.into_iter().map(|d| d * d).collect())
}

/// Probability of observing `Δ_out` behind the splitter.
pub fn prob_delta_out<T: Scalar>(pair: &FockPair, bs: &BeamSplitter, delta_out: i64) -> Result<T> {
    let idx = pair.lattice_index(delta_out)?;
    // mode check before any short circuit
    bs.r::<T>()?;
    if let Some(v) = endpoint(pair, bs, delta_out) {
        return Ok(v);
    }
    if T::EXACT {
        return literal_prob(pair, bs, delta_out);
    }
    let (r, t) = (bs.reflectivity(), bs.transmissivity());
    let value = if pair.total() <= FLOAT_DIRECT_MAX_TOTAL && r.min(t) >= LITERAL_MIN_SPLIT {
        literal_prob::<f64>(pair, bs, delta_out)?
    } else if pair.total() <= FLOAT_DIRECT_MAX_TOTAL {
        direct_float_prob(pair, r, delta_out)
    } else {
        rotation_probs(pair, bs)?[idx]
    };
    Ok(T::from_f64(value).flush())
}

/// Full distribution over the `Δ_out` lattice.
pub fn distribution<T: Scalar>(pair: &FockPair, bs: &BeamSplitter) -> Result<DeltaDistribution<T>> {
    bs.r::<T>()?;
    let lattice = crate::state::delta_lattice(pair.total());
    let probs: Vec<T> = if T::EXACT || pair.total() <= FLOAT_DIRECT_MAX_TOTAL || endpoint::<T>(pair, bs, 0).is_some() {
        lattice
            .iter()
            .map(|&d| prob_delta_out::<T>(pair, bs, d))
            .collect::<Result<_>>()?
    } else {
        rotation_probs(pair, bs)?
            .into_iter()
            .map(|p| T::from_f64(p).flush())
            .collect()
    };
    let dist = DeltaDistribution::from_raw(pair.total(), probs);
    dist.validate(crate::numeric::DEFAULT_TOLERANCE)?;
    Ok(dist)
}

/// Output state expanded term by term from the double sum over how many of
/// the `K` and `L` input photons exit through each port, collected per
/// count pair and squared.
///
/// Each `(k, l)` term carries `C(K,k) C(L,l) (-1)^(K-k) √r^(K-k+l) √t^(L-l+k)`
/// on `a_r†^(k+l) a_t†^(K-k+L-l)`. For fixed `p = k + l` every term shares
/// the irrational factor `√(r^e_r t^e_t)`, so the squared amplitude is exact
/// in rational arithmetic.
pub fn amplitude_expansion<T: Scalar>(
    k_in: u32,
    l_in: u32,
    bs: &BeamSplitter,
) -> Result<JointCountDistribution<T>> {
    let r: T = bs.r()?;
    let t = T::one() - r.clone();
    let total = k_in + l_in;

    // rational parts of the amplitudes, one bucket per p
    let mut buckets: Vec<Vec<T>> = vec![Vec::new(); total as usize + 1];
    for k in 0..=k_in {
        for l in 0..=l_in {
            let p = k + l;
            let l_min = p.saturating_sub(k_in);
            let l_max = l_in.min(p);
            let sign = if (k_in - k).is_multiple_of(2) { T::one() } else { -T::one() };
            let term = sign
                * binomial_as::<T>(k_in, k)
                * binomial_as::<T>(l_in, l)
                * r.powu(l - l_min)
                * t.powu(l_max - l);
            buckets[p as usize].push(term);
        }
    }

    let norm = factorial_as::<T>(k_in) * factorial_as::<T>(l_in);
    let mut entries = std::collections::BTreeMap::new();
    for (p, bucket) in buckets.into_iter().enumerate() {
        let p = p as u32;
        let q = total - p;
        let l_min = p.saturating_sub(k_in);
        let l_max = l_in.min(p);
        let e_r = k_in + 2 * l_min - p;
        let e_t = l_in + p - 2 * l_max;
        let reduced = T::sum_ordered(bucket);
        let prob = factorial_as::<T>(p) * factorial_as::<T>(q) / norm.clone()
            * r.powu(e_r)
            * t.powu(e_t)
            * reduced.clone()
            * reduced;
        entries.insert((p, q), prob.flush());
    }
    let joint = JointCountDistribution::from_raw(entries);
    let mass = joint.mass();
    if !T::is_unit_mass(&mass, crate::numeric::DEFAULT_TOLERANCE) {
        return Err(crate::error::Error::Normalization {
            mass: mass.to_f64(),
            tolerance: crate::numeric::DEFAULT_TOLERANCE,
        });
    }
    Ok(joint)
}


#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;
    use crate::error::Error;
    use crate::numeric::Rational;
    use crate::oracle::oracle_distribution;
    use crate::state::{delta_lattice, delta_marginal};
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn half() -> BeamSplitter {
        BeamSplitter::from_ratio(1, 2).unwrap()
    }

    #[test]
    fn hom_pair_coincidence_vanishes() {
        let pair = FockPair::new(2, 0).unwrap();
        assert_eq!(prob_delta_out::<Rational>(&pair, &half(), 0).unwrap(), q(0, 1));
        let d = distribution::<Rational>(&pair, &half()).unwrap();
        assert_eq!(d.probs(), &[q(1, 2), q(0, 1), q(1, 2)]);
    }

    #[test]
    fn identity_and_swap_limits() {
        let zero = BeamSplitter::from_ratio(0, 1).unwrap();
        let one = BeamSplitter::from_ratio(1, 1).unwrap();
        for s in 0..8u32 {
            for delta in delta_lattice(s) {
                let pair = FockPair::new(s, delta).unwrap();
                let id = distribution::<Rational>(&pair, &zero).unwrap();
                assert_eq!(id, DeltaDistribution::point_mass(s, delta).unwrap());
                let sw = distribution::<Rational>(&pair, &one).unwrap();
                assert_eq!(sw, DeltaDistribution::point_mass(s, -delta).unwrap());
            }
        }
    }

    #[test]
    fn matches_oracle_on_small_lattice() {
        // frozen from the matrix-exponential oracle: S=3, Δ=1, r=1/5
        let pair = FockPair::new(3, 1).unwrap();
        let bs = BeamSplitter::from_ratio(1, 5).unwrap();
        let exact = distribution::<Rational>(&pair, &bs).unwrap();
        assert_eq!(
            exact.probs(),
            &[q(12, 125), q(49, 125), q(16, 125), q(48, 125)]
        );
        assert_eq!(prob_delta_out::<Rational>(&pair, &bs, -1).unwrap(), q(49, 125));
        let oracle = oracle_distribution(&pair, &bs);
        for (a, b) in exact.probs().iter().zip(oracle.probs()) {
            assert!((a.to_f64() - b).abs() < 1e-13);
        }
    }

    #[test]
    fn off_lattice_and_mode_errors() {
        let pair = FockPair::new(4, 0).unwrap();
        assert!(matches!(
            prob_delta_out::<f64>(&pair, &half(), 1),
            Err(Error::Lattice { .. })
        ));
        assert!(matches!(
            prob_delta_out::<f64>(&pair, &half(), 6),
            Err(Error::Lattice { .. })
        ));
        let irrational = BeamSplitter::new(0.3).unwrap();
        assert_eq!(
            prob_delta_out::<Rational>(&pair, &irrational, 0),
            Err(Error::Mode("reflectivity"))
        );
        assert!(amplitude_expansion::<Rational>(1, 1, &irrational).is_err());
    }

    #[test]
    fn single_photon_expansion() {
        for (n, d) in [(1, 5), (1, 2), (7, 9)] {
            let bs = BeamSplitter::from_ratio(n, d).unwrap();
            let j = amplitude_expansion::<Rational>(1, 0, &bs).unwrap();
            assert_eq!(j.get(1, 0), Rational::one() - q(n, d));
            assert_eq!(j.get(0, 1), q(n, d));
        }
    }

    #[test]
    fn bunching_expansion() {
        let j = amplitude_expansion::<Rational>(1, 1, &half()).unwrap();
        assert_eq!(j.get(2, 0), q(1, 2));
        assert_eq!(j.get(0, 2), q(1, 2));
        assert_eq!(j.get(1, 1), q(0, 1));
    }

    #[test]
    fn expansion_matches_oracle_for_three_photons() {
        let bs = BeamSplitter::from_ratio(3, 10).unwrap();
        let j = amplitude_expansion::<Rational>(2, 1, &bs).unwrap();
        // frozen from the matrix-exponential oracle at S=3, Δ=1, r=0.3
        let oracle = oracle_distribution(&FockPair::from_modes(2, 1), &BeamSplitter::new(0.3).unwrap());
        let expect = [q(189, 1000), q(363, 1000), q(7, 1000), q(441, 1000)];
        for (p, e) in (0..=3u32).zip(&expect) {
            assert_eq!(&j.get(p, 3 - p), e);
            assert!((oracle.probs()[p as usize] - e.to_f64()).abs() < 1e-13);
        }
    }

    #[test]
    fn u_shape_at_fifty_photons() {
        let pair = FockPair::new(50, 0).unwrap();
        let d = distribution::<f64>(&pair, &BeamSplitter::new(0.5).unwrap()).unwrap();
        let oracle = oracle_distribution(&pair, &BeamSplitter::new(0.5).unwrap());
        for (a, b) in d.probs().iter().zip(oracle.probs()) {
            assert!((a - b).abs() < 1e-12);
        }
        for (a, b) in d.probs().iter().zip(d.mirrored().probs()) {
            assert!((a - b).abs() < 1e-14);
        }
        assert!(d.get(0) < 1e-12);
        assert!(d.get(2) < d.get(26) && d.get(26) < d.get(42) && d.get(42) < d.get(50));
    }

    #[test]
    fn float_direct_and_rotation_routes_agree() {
        for s in [10u32, 24, 30] {
            for delta in delta_lattice(s) {
                let pair = FockPair::new(s, delta).unwrap();
                let bs = BeamSplitter::new(0.23).unwrap();
                let direct = distribution::<f64>(&pair, &bs).unwrap();
                let rot = rotation_probs(&pair, &bs).unwrap();
                for (a, b) in direct.probs().iter().zip(&rot) {
                    assert!((a - b).abs() < 1e-11);
                }
            }
        }
    }

    #[test]
    fn literal_float_sum_loses_precision_at_large_total() {
        // the reason the float path switches routes above S = 30
        let pair = FockPair::new(120, 0).unwrap();
        let bs = BeamSplitter::new(0.1).unwrap();
        let literal = literal_prob::<f64>(&pair, &bs, 0).unwrap();
        let stable = prob_delta_out::<f64>(&pair, &bs, 0).unwrap();
        let exact = prob_delta_out::<Rational>(&pair, &BeamSplitter::from_ratio(1, 10).unwrap(), 0)
            .unwrap()
            .to_f64();
        assert!((stable - exact).abs() < 1e-12);
        assert!((literal - exact).abs() > 1e-6);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn exact_normalization_and_mirror_symmetry(
            s in 0u32..14,
            i in 0u32..14,
            num in 0i64..=10,
        ) {
            let delta = -i64::from(s) + 2 * i64::from(i % (s + 1));
            let pair = FockPair::new(s, delta).unwrap();
            let bs = BeamSplitter::from_ratio(num, 10).unwrap();
            let d = distribution::<Rational>(&pair, &bs).unwrap();
            prop_assert!(d.mass().is_one());
            let m = distribution::<Rational>(&pair.mirrored(), &bs).unwrap();
            prop_assert_eq!(d.mirrored(), m);
            let j = amplitude_expansion::<Rational>(pair.k(), pair.l(), &bs).unwrap();
            prop_assert_eq!(delta_marginal(&j).into_distribution(s).unwrap(), d);
        }

        #[test]
        fn vacuum_input_is_binomial(s in 0u32..20, num in 0i64..=10) {
            let bs = BeamSplitter::from_ratio(num, 10).unwrap();
            let r = q(num, 10);
            let j = amplitude_expansion::<Rational>(0, s, &bs).unwrap();
            for p in 0..=s {
                let e = binomial_as::<Rational>(s, p) * r.powu(p) * (Rational::one() - r.clone()).powu(s - p);
                prop_assert_eq!(j.get(p, s - p), e);
            }
        }
    }
}
