//! Imperfections and extensions: partial distinguishability, mixed Fock
//! inputs, lossy and coarse detectors, and the two-polarization product walk.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;

use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::closed_form::{amplitude_expansion, distribution};
use crate::error::{Error, Result};
use crate::numeric::{binomial_as, Rational, Scalar, DEFAULT_TOLERANCE};
use crate::state::{check_unit_interval, BeamSplitter, DeltaDistribution, DeltaMarginal, FockPair, JointCountDistribution};

/// Polarization rotation angle `y` of one input beam. `y = 0` leaves the
/// photons indistinguishable, `y = π/2` makes the beams orthogonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistinguishabilityAngle {
    y: f64,
    overlap: Option<Rational>,
}

impl DistinguishabilityAngle {
    pub fn new(y: f64) -> Result<Self> {
        if !(0.0..=FRAC_PI_2).contains(&y) {
            return Err(Error::range("distinguishability angle", format!("{y} not in [0, π/2]")));
        }
        let overlap = if y == 0.0 {
            Some(Rational::one())
        } else if y == FRAC_PI_2 {
            Some(Rational::zero())
        } else {
            None
        };
        Ok(DistinguishabilityAngle { y, overlap })
    }

    /// Angle with an exact overlap `cos²y`.
    pub fn from_overlap(overlap: Rational) -> Result<Self> {
        if overlap < Rational::zero() || overlap > Rational::one() {
            return Err(Error::range("overlap", format!("{overlap} not in [0, 1]")));
        }
        let y = Scalar::to_f64(&overlap).sqrt().acos();
        Ok(DistinguishabilityAngle {
            y,
            overlap: Some(overlap),
        })
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    /// `cos²y`, the chance that a rotated photon stays in the shared polarization.
    pub fn overlap<T: Scalar>(&self) -> Result<T> {
        let value = if self.y == FRAC_PI_2 { 0.0 } else { self.y.cos().powi(2) };
        T::from_param(value, self.overlap.as_ref(), "distinguishability overlap")
    }
}

/// Which input beam carries the polarization rotation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RotatedBeam {
    /// Mode `a`, holding `S - N` photons.
    #[default]
    A,
    /// Mode `b`, holding `N` photons.
    B,
}

/// Distribution of `Δ_out` on the lattice of `S₁ + S₂` for independent
/// populations.
pub fn convolve<T: Scalar>(x: &DeltaDistribution<T>, y: &DeltaDistribution<T>) -> DeltaDistribution<T> {
    let n = x.probs().len() + y.probs().len() - 1;
    let mut terms: Vec<Vec<T>> = vec![Vec::new(); n];
    for (i, a) in x.probs().iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        for (j, b) in y.probs().iter().enumerate() {
            terms[i + j].push(a.clone() * b.clone());
        }
    }
    DeltaDistribution::from_raw(
        x.total() + y.total(),
        terms.into_iter().map(T::sum_ordered).collect(),
    )
}

/// Input `|S-N>_a |N>_b` with one beam's polarization rotated by `y`.
///
/// Of the `M` photons in the rotated beam, `n` stay in the shared
/// polarization with probability `C(M,n) cos^{2n}y sin^{2(M-n)}y`. Those
/// interfere with the other beam. The remaining `M - n` split on their own.
/// Detectors sum over polarization, so the output is the binomial mixture of
/// the two convolved distributions.
pub fn decohere_distribution<T: Scalar>(
    total: u32,
    n_b: u32,
    angle: &DistinguishabilityAngle,
    bs: &BeamSplitter,
    rotated: RotatedBeam,
) -> Result<DeltaDistribution<T>> {
    if n_b > total {
        return Err(Error::range("N", format!("{n_b} exceeds total {total}")));
    }
    let c: T = angle.overlap()?;
    bs.r::<T>()?;
    let a_count = total - n_b;
    let m = match rotated {
        RotatedBeam::A => a_count,
        RotatedBeam::B => n_b,
    };

    let components: Vec<(T, DeltaDistribution<T>)> = (0..=m)
        .into_par_iter()
        .map(|n| -> Result<Option<(T, DeltaDistribution<T>)>> {
            let weight = binomial_as::<T>(m, n)
                * c.powu(n)
                * (T::one() - c.clone()).powu(m - n);
            if weight.is_zero() {
                return Ok(None);
            }
            let (shared, orthogonal) = match rotated {
                RotatedBeam::A => (FockPair::from_modes(n, n_b), FockPair::from_modes(m - n, 0)),
                RotatedBeam::B => (FockPair::from_modes(a_count, n), FockPair::from_modes(0, m - n)),
            };
            let mixed = convolve(&distribution::<T>(&shared, bs)?, &distribution::<T>(&orthogonal, bs)?);
            Ok(Some((weight, mixed)))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();

    let len = total as usize + 1;
    let probs = (0..len)
        .map(|i| {
            T::sum_ordered(
                components
                    .iter()
                    .map(|(w, d)| w.clone() * d.probs()[i].clone()),
            )
        })
        .collect();
    let dist = DeltaDistribution::from_raw(total, probs);
    dist.validate(DEFAULT_TOLERANCE)?;
    Ok(dist)
}

fn binomial_pmf<T: Scalar>(n: u32, success: &T) -> Vec<T> {
    let fail = T::one() - success.clone();
    (0..=n)
        .map(|k| binomial_as::<T>(n, k) * success.powu(k) * fail.powu(n - k))
        .collect()
}

/// Fully distinguishable reference: every photon splits on its own. Photons
/// from `a` reach the `p` detector with probability `1 - r`, photons from
/// `b` with probability `r`.
pub fn classical_reference<T: Scalar>(total: u32, n_b: u32, bs: &BeamSplitter) -> Result<DeltaDistribution<T>> {
    if n_b > total {
        return Err(Error::range("N", format!("{n_b} exceeds total {total}")));
    }
    let r: T = bs.r()?;
    let from_a = binomial_pmf(total - n_b, &(T::one() - r.clone()));
    let from_b = binomial_pmf(n_b, &r);
    let mut probs = vec![Vec::new(); total as usize + 1];
    for (i, x) in from_a.iter().enumerate() {
        for (j, y) in from_b.iter().enumerate() {
            probs[i + j].push(x.clone() * y.clone());
        }
    }
    Ok(DeltaDistribution::from_raw(
        total,
        probs.into_iter().map(T::sum_ordered).collect(),
    ))
}

/// Degraded Fock source `ρ_K = Σ_k C(K,k) η^(K-k) (1-η)^k |K-k><K-k|`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedFockSource {
    nominal: u32,
    eta: f64,
    eta_rational: Option<Rational>,
}

impl MixedFockSource {
    pub fn new(nominal: u32, eta: f64) -> Result<Self> {
        check_unit_interval("eta", eta)?;
        Ok(MixedFockSource {
            nominal,
            eta,
            eta_rational: None,
        })
    }

    pub fn from_rational(nominal: u32, eta: Rational) -> Result<Self> {
        if eta < Rational::zero() || eta > Rational::one() {
            return Err(Error::range("eta", format!("{eta} not in [0, 1]")));
        }
        Ok(MixedFockSource {
            nominal,
            eta: Scalar::to_f64(&eta),
            eta_rational: Some(eta),
        })
    }

    pub fn pure(nominal: u32) -> Self {
        MixedFockSource {
            nominal,
            eta: 1.0,
            eta_rational: Some(Rational::one()),
        }
    }

    pub fn nominal(&self) -> u32 {
        self.nominal
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn eta_as<T: Scalar>(&self) -> Result<T> {
        T::from_param(self.eta, self.eta_rational.as_ref(), "eta")
    }

    /// Weight of each photon number `n = 0..=K`, i.e. `C(K,n) η^n (1-η)^(K-n)`.
    pub fn weights<T: Scalar>(&self) -> Result<Vec<T>> {
        Ok(binomial_pmf(self.nominal, &self.eta_as::<T>()?))
    }

    /// `Tr ρ² = Σ w²`.
    pub fn purity<T: Scalar>(&self) -> Result<T> {
        Ok(T::sum_ordered(
            self.weights::<T>()?.into_iter().map(|w| w.clone() * w),
        ))
    }

    /// Normally ordered moments `(<n>, <n(n-1)>)`, summed over the weights.
    pub fn factorial_moments<T: Scalar>(&self) -> Result<(T, T)> {
        let weights = self.weights::<T>()?;
        let first = T::sum_ordered(
            weights
                .iter()
                .enumerate()
                .map(|(n, w)| w.clone() * T::from_u64(n as u64)),
        );
        let second = T::sum_ordered(
            weights
                .iter()
                .enumerate()
                .map(|(n, w)| w.clone() * T::from_u64((n * n.saturating_sub(1)) as u64)),
        );
        Ok((first, second))
    }
}

/// Purity of a single source with nominal number `k` and parameter `eta`.
pub fn purity(k: u32, eta: f64) -> Result<f64> {
    MixedFockSource::new(k, eta)?.purity::<f64>()
}

const BISECTION_TOLERANCE: f64 = 1e-12;

fn bisect_purity(target: f64, f: impl Fn(f64) -> f64, what: &str) -> Result<f64> {
    let (mut lo, mut hi) = (0.5_f64, 1.0_f64);
    let (mut f_lo, f_hi) = (f(lo), f(hi));
    if target > f_hi + BISECTION_TOLERANCE || target < f_lo - BISECTION_TOLERANCE {
        return Err(Error::NoSolution(format!(
            "{what}: target {target} outside achievable range [{f_lo}, {f_hi}]"
        )));
    }
    if (f_hi - f_lo).abs() < f64::EPSILON || target >= f_hi {
        return Ok(1.0);
    }
    while hi - lo > BISECTION_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid < f_lo - 1e-15 || f_mid > f_hi + 1e-15 {
            return Err(Error::NoSolution(format!("{what}: purity is not monotone near eta = {mid}")));
        }
        if f_mid < target {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `η ∈ [1/2, 1]` at which a single source of nominal number `k` reaches
/// purity `target`. Purity increases monotonically on that interval from
/// `C(2K,K)/4^K` to 1.
pub fn eta_for_purity(k: u32, target: f64) -> Result<f64> {
    bisect_purity(target, |eta| purity(k, eta).unwrap_or(f64::NAN), "single-source purity")
}

/// Common `η` at which the two-mode input `ρ_K ⊗ ρ_L` reaches purity `target`.
pub fn eta_for_joint_purity(k: u32, l: u32, target: f64) -> Result<f64> {
    bisect_purity(
        target,
        |eta| purity(k, eta).unwrap_or(f64::NAN) * purity(l, eta).unwrap_or(f64::NAN),
        "joint purity",
    )
}

/// Joint counts of a pure input, exact through the double sum or, in float
/// mode, through the stable closed-form route.
fn pure_joint<T: Scalar>(k: u32, l: u32, bs: &BeamSplitter) -> Result<JointCountDistribution<T>> {
    if T::EXACT {
        amplitude_expansion::<T>(k, l, bs)
    } else {
        Ok(distribution::<T>(&FockPair::from_modes(k, l), bs)?.to_joint())
    }
}

/// Output counts for two independently degraded Fock inputs.
pub fn mixed_distribution<T: Scalar>(
    src_a: &MixedFockSource,
    src_b: &MixedFockSource,
    bs: &BeamSplitter,
) -> Result<JointCountDistribution<T>> {
    bs.r::<T>()?;
    let wa = src_a.weights::<T>()?;
    let wb = src_b.weights::<T>()?;
    let jobs: Vec<(u32, u32, T)> = wa
        .iter()
        .enumerate()
        .flat_map(|(k, x)| {
            wb.iter()
                .enumerate()
                .map(move |(l, y)| (k as u32, l as u32, x.clone() * y.clone()))
        })
        .filter(|(_, _, w)| !w.is_zero())
        .collect();
    let parts = jobs
        .into_par_iter()
        .map(|(k, l, w)| pure_joint::<T>(k, l, bs).map(|j| (w, j)))
        .collect::<Result<Vec<_>>>()?;

    let mut acc: BTreeMap<(u32, u32), Vec<T>> = BTreeMap::new();
    for (w, joint) in parts {
        for (key, v) in joint.iter() {
            acc.entry(*key).or_default().push(w.clone() * v.clone());
        }
    }
    finish_joint(acc)
}

fn finish_joint<T: Scalar>(acc: BTreeMap<(u32, u32), Vec<T>>) -> Result<JointCountDistribution<T>> {
    let entries = acc
        .into_iter()
        .map(|(k, vs)| (k, T::sum_ordered(vs).flush()))
        .collect();
    let joint = JointCountDistribution::from_raw(entries);
    let mass = joint.mass();
    if !T::is_unit_mass(&mass, DEFAULT_TOLERANCE) {
        return Err(Error::Normalization {
            mass: mass.to_f64(),
            tolerance: DEFAULT_TOLERANCE,
        });
    }
    Ok(joint)
}

/// Photon counter with efficiency `η_det` and count resolution (bin width).
#[derive(Debug, Clone, PartialEq)]
pub struct Detector {
    efficiency: f64,
    efficiency_rational: Option<Rational>,
    resolution: u32,
}

impl Detector {
    pub fn new(efficiency: f64, resolution: u32) -> Result<Self> {
        if !(efficiency > 0.0 && efficiency <= 1.0) {
            return Err(Error::range("detector efficiency", format!("{efficiency} not in (0, 1]")));
        }
        if resolution == 0 {
            return Err(Error::range("detector resolution", "must be at least 1"));
        }
        Ok(Detector {
            efficiency,
            efficiency_rational: None,
            resolution,
        })
    }

    pub fn from_rational(efficiency: Rational, resolution: u32) -> Result<Self> {
        let mut det = Self::new(Scalar::to_f64(&efficiency), resolution)?;
        if efficiency <= Rational::zero() || efficiency > Rational::one() {
            return Err(Error::range("detector efficiency", format!("{efficiency} not in (0, 1]")));
        }
        det.efficiency_rational = Some(efficiency);
        Ok(det)
    }

    pub fn ideal() -> Self {
        Detector {
            efficiency: 1.0,
            efficiency_rational: Some(Rational::one()),
            resolution: 1,
        }
    }

    pub fn efficiency(&self) -> f64 {
        self.efficiency
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    pub fn efficiency_as<T: Scalar>(&self) -> Result<T> {
        T::from_param(self.efficiency, self.efficiency_rational.as_ref(), "detector efficiency")
    }
}

/// Independent binomial thinning of both ports' counts.
pub fn apply_detector_loss<T: Scalar>(
    joint: &JointCountDistribution<T>,
    det: &Detector,
) -> Result<JointCountDistribution<T>> {
    let eta: T = det.efficiency_as()?;
    if eta.is_one() {
        return Ok(joint.clone());
    }
    let mut acc: BTreeMap<(u32, u32), Vec<T>> = BTreeMap::new();
    for (&(p, q), v) in joint.iter() {
        if v.is_zero() {
            continue;
        }
        let thin_p = binomial_pmf(p, &eta);
        let thin_q = binomial_pmf(q, &eta);
        for (kp, wp) in thin_p.iter().enumerate() {
            for (kq, wq) in thin_q.iter().enumerate() {
                acc.entry((kp as u32, kq as u32))
                    .or_default()
                    .push(v.clone() * wp.clone() * wq.clone());
            }
        }
    }
    finish_joint(acc)
}

/// Aggregate into contiguous bins of `width` counts. Bin `b` covers
/// `[b·w - w/2, b·w + w/2)` and is keyed by its center `b·w`, so values on a
/// bin edge go to the higher bin.
pub fn bin_resolution<T: Scalar>(marginal: &DeltaMarginal<T>, width: u32) -> Result<BTreeMap<i64, T>> {
    if width == 0 {
        return Err(Error::range("bin width", "must be at least 1"));
    }
    let w = i64::from(width);
    let mut acc: BTreeMap<i64, Vec<T>> = BTreeMap::new();
    for (d, p) in marginal.iter() {
        let bin = (2 * d + w).div_euclid(2 * w);
        acc.entry(bin * w).or_default().push(p.clone());
    }
    Ok(acc.into_iter().map(|(k, v)| (k, T::sum_ordered(v))).collect())
}

/// Joint distribution of two independent walks, one per polarization.
#[derive(Debug, Clone, PartialEq)]
pub struct Product2d<T> {
    pub entries: BTreeMap<(i64, i64), T>,
}

impl<T: Scalar> Product2d<T> {
    pub fn get(&self, dh: i64, dv: i64) -> T {
        self.entries.get(&(dh, dv)).cloned().unwrap_or_else(T::zero)
    }

    pub fn marginal_h(&self) -> DeltaMarginal<T> {
        self.marginal(|&(h, _)| h)
    }

    pub fn marginal_v(&self) -> DeltaMarginal<T> {
        self.marginal(|&(_, v)| v)
    }

    fn marginal(&self, key: impl Fn(&(i64, i64)) -> i64) -> DeltaMarginal<T> {
        let mut acc: BTreeMap<i64, Vec<T>> = BTreeMap::new();
        for (k, p) in &self.entries {
            acc.entry(key(k)).or_default().push(p.clone());
        }
        DeltaMarginal(acc.into_iter().map(|(k, v)| (k, T::sum_ordered(v))).collect())
    }
}

pub fn product_2d<T: Scalar>(dh: &DeltaDistribution<T>, dv: &DeltaDistribution<T>) -> Product2d<T> {
    let mut entries = BTreeMap::new();
    for (h, ph) in dh.iter() {
        for (v, pv) in dv.iter() {
            entries.insert((h, v), ph.clone() * pv.clone());
        }
    }
    Product2d { entries }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::four_mode_distribution;
    use crate::state::delta_marginal;
    use std::f64::consts::PI;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn indistinguishable_limit_is_the_pure_walk() {
        let angle = DistinguishabilityAngle::new(0.0).unwrap();
        for (n, d) in [(1, 10), (1, 2)] {
            let bs = BeamSplitter::from_ratio(n, d).unwrap();
            for s in 0..=8u32 {
                for nb in 0..=s {
                    for rotated in [RotatedBeam::A, RotatedBeam::B] {
                        let got = decohere_distribution::<Rational>(s, nb, &angle, &bs, rotated).unwrap();
                        let pure = distribution::<Rational>(&FockPair::from_modes(s - nb, nb), &bs).unwrap();
                        assert_eq!(got, pure);
                    }
                }
            }
        }
    }

    #[test]
    fn distinguishable_limit_is_classical() {
        let angle = DistinguishabilityAngle::new(FRAC_PI_2).unwrap();
        let bs = BeamSplitter::from_ratio(1, 2).unwrap();
        let got = decohere_distribution::<Rational>(12, 5, &angle, &bs, RotatedBeam::A).unwrap();
        assert_eq!(got, classical_reference::<Rational>(12, 5, &bs).unwrap());
    }

    #[test]
    fn mixture_matches_four_mode_evolution() {
        let bs = BeamSplitter::new(0.37).unwrap();
        for y in [PI / 24.0, PI / 6.0, PI / 3.0] {
            let angle = DistinguishabilityAngle::new(y).unwrap();
            for nb in 0..=6 {
                for rotated in [RotatedBeam::A, RotatedBeam::B] {
                    let mix = decohere_distribution::<f64>(6, nb, &angle, &bs, rotated).unwrap();
                    let brute = four_mode_distribution(6, nb, &angle, &bs, rotated).unwrap();
                    for (a, b) in mix.probs().iter().zip(brute.probs()) {
                        assert!((a - b).abs() < 1e-10, "y={y} N={nb}: {a} vs {b}");
                    }
                }
            }
        }
    }

    #[test]
    fn angle_range() {
        assert!(DistinguishabilityAngle::new(-0.1).is_err());
        assert!(DistinguishabilityAngle::new(2.0).is_err());
        assert!(DistinguishabilityAngle::new(PI / 6.0).unwrap().overlap::<Rational>().is_err());
        let a = DistinguishabilityAngle::from_overlap(q(3, 4)).unwrap();
        assert!((a.y() - PI / 6.0).abs() < 1e-15);
        assert!(decohere_distribution::<f64>(4, 5, &a, &BeamSplitter::new(0.5).unwrap(), RotatedBeam::A).is_err());
    }

    #[test]
    fn pure_sources_reduce_to_expansion() {
        let bs = BeamSplitter::from_ratio(3, 10).unwrap();
        let got = mixed_distribution::<Rational>(&MixedFockSource::pure(3), &MixedFockSource::pure(2), &bs).unwrap();
        assert_eq!(got.pruned(), amplitude_expansion::<Rational>(3, 2, &bs).unwrap().pruned());
    }

    #[test]
    fn single_photon_mixtures_by_hand() {
        // K = L = 1, η = 1/2: inputs |0,0>, |1,0>, |0,1>, |1,1> each with weight 1/4
        let src = MixedFockSource::from_rational(1, q(1, 2)).unwrap();
        let bs = BeamSplitter::from_ratio(1, 2).unwrap();
        let j = mixed_distribution::<Rational>(&src, &src, &bs).unwrap();
        assert_eq!(j.get(0, 0), q(1, 4));
        // |1,0> and |0,1> each split evenly
        assert_eq!(j.get(1, 0), q(1, 4));
        assert_eq!(j.get(0, 1), q(1, 4));
        // |1,1> bunches
        assert_eq!(j.get(2, 0), q(1, 8));
        assert_eq!(j.get(0, 2), q(1, 8));
        assert_eq!(j.get(1, 1), q(0, 1));
    }

    #[test]
    fn thinning_examples() {
        let j = JointCountDistribution::from_pairs([((1, 0), q(1, 1))]).unwrap();
        let det = Detector::from_rational(q(4, 5), 1).unwrap();
        let out = apply_detector_loss(&j, &det).unwrap();
        assert_eq!(out.get(1, 0), q(4, 5));
        assert_eq!(out.get(0, 0), q(1, 5));

        let j = JointCountDistribution::from_pairs([((2, 0), q(1, 1))]).unwrap();
        let det = Detector::from_rational(q(9, 10), 1).unwrap();
        let out = apply_detector_loss(&j, &det).unwrap();
        assert_eq!(out.get(2, 0), q(81, 100));
        assert_eq!(out.get(1, 0), q(18, 100));
        assert_eq!(out.get(0, 0), q(1, 100));

        let j = JointCountDistribution::from_pairs([((2, 1), 0.25), ((0, 3), 0.75)]).unwrap();
        assert_eq!(apply_detector_loss(&j, &Detector::ideal()).unwrap(), j);
        assert!(Detector::new(0.0, 1).is_err());
        assert!(Detector::new(0.5, 0).is_err());
    }

    #[test]
    fn binning_examples() {
        let d = distribution::<f64>(&FockPair::new(6, 2).unwrap(), &BeamSplitter::new(0.3).unwrap()).unwrap();
        let m = d.to_marginal();
        assert_eq!(bin_resolution(&m, 1).unwrap(), m.0);

        let m = DeltaMarginal(BTreeMap::from([(-2, 0.5), (2, 0.5)]));
        assert_eq!(bin_resolution(&m, 10).unwrap(), BTreeMap::from([(0, 1.0)]));

        // edges go up: with width 20, Δ = 10 lands in the bin centered at 20
        let m = DeltaMarginal(BTreeMap::from([(-10, 0.25), (10, 0.25), (9, 0.5)]));
        assert_eq!(
            bin_resolution(&m, 20).unwrap(),
            BTreeMap::from([(0, 0.75), (20, 0.25)])
        );
        assert!(bin_resolution(&m, 0).is_err());
    }

    #[test]
    fn coarse_bins_erase_the_comb_but_keep_the_u_shape() {
        let d = distribution::<f64>(&FockPair::new(50, 0).unwrap(), &BeamSplitter::new(0.5).unwrap()).unwrap();
        let bins = bin_resolution(&d.to_marginal(), 20).unwrap();
        let keys: Vec<i64> = bins.keys().copied().collect();
        assert_eq!(keys, vec![-40, -20, 0, 20, 40, 60]);
        assert!(bins[&0] < bins[&40] && bins[&0] < bins[&-40]);
        assert!(bins.values().all(|p| *p > 0.0));
    }

    #[test]
    fn product_examples() {
        let dh = DeltaDistribution::<Rational>::point_mass(4, 2).unwrap();
        let dv = DeltaDistribution::<Rational>::point_mass(3, -1).unwrap();
        let p = product_2d(&dh, &dv);
        assert_eq!(p.get(2, -1), q(1, 1));

        let bs = BeamSplitter::from_ratio(1, 2).unwrap();
        let hom = distribution::<Rational>(&FockPair::new(2, 0).unwrap(), &bs).unwrap();
        let p = product_2d(&hom, &hom);
        for h in [-2, 2] {
            for v in [-2, 2] {
                assert_eq!(p.get(h, v), q(1, 4));
            }
        }
        let mh = p.marginal_h();
        assert_eq!(mh.get(2), q(1, 2));
        assert_eq!(mh.get(0), q(0, 1));
        assert_eq!(p.marginal_v().mass(), q(1, 1));
    }

    #[test]
    fn purity_examples() {
        assert_eq!(MixedFockSource::pure(7).purity::<Rational>().unwrap(), q(1, 1));
        let src = MixedFockSource::from_rational(1, q(1, 2)).unwrap();
        assert_eq!(src.weights::<Rational>().unwrap(), vec![q(1, 2), q(1, 2)]);
        assert_eq!(src.purity::<Rational>().unwrap(), q(1, 2));
    }

    #[test]
    fn purity_inversion() {
        let eta = eta_for_purity(5, 0.83).unwrap();
        assert!((0.5..=1.0).contains(&eta));
        // direct summation cross-check
        let direct: f64 = (0..=5u32)
            .map(|k| {
                let w = crate::numeric::binomial(5, k).to_string().parse::<f64>().unwrap()
                    * eta.powi((5 - k) as i32)
                    * (1.0 - eta).powi(k as i32);
                w * w
            })
            .sum();
        assert!((direct - 0.83).abs() < 1e-10);
        assert!(matches!(eta_for_purity(5, 0.21), Err(Error::NoSolution(_))));
        assert!(matches!(eta_for_purity(5, 1.2), Err(Error::NoSolution(_))));
        assert_eq!(eta_for_purity(0, 1.0).unwrap(), 1.0);

        let eta = eta_for_joint_purity(5, 5, 0.21).unwrap();
        assert!((purity(5, eta).unwrap().powi(2) - 0.21).abs() < 1e-10);
    }

    #[test]
    fn loss_breaks_parity() {
        let bs = BeamSplitter::from_ratio(1, 2).unwrap();
        let j = amplitude_expansion::<Rational>(1, 1, &bs).unwrap();
        let lossy = apply_detector_loss(&j, &Detector::from_rational(q(9, 10), 1).unwrap()).unwrap();
        let m = delta_marginal(&lossy);
        assert!(m.get(1) > Rational::zero());
        assert!(m.mass().is_one());
    }
}
