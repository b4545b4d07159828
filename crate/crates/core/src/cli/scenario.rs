//! One fully specified run: pair, splitter and optional imperfections.

use std::f64::consts::PI;

use crate::channels::{
    apply_detector_loss, bin_resolution, decohere_distribution, eta_for_joint_purity, mixed_distribution,
    Detector, DistinguishabilityAngle, MixedFockSource, RotatedBeam,
};
use crate::closed_form::distribution;
use crate::error::{Error, Result};
use crate::metrics::parity_violation;
use crate::numeric::{Rational, Scalar, DEFAULT_TOLERANCE};
use crate::state::{delta_marginal, BeamSplitter, DeltaMarginal, FockPair};

#[derive(Debug, Clone, PartialEq)]
pub enum SourceQuality {
    Pure,
    Eta(Rational),
    /// Joint purity of the two-mode input; `η` is solved for.
    Purity(f64),
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub pair: FockPair,
    pub bs: BeamSplitter,
    pub angle: DistinguishabilityAngle,
    pub rotated: RotatedBeam,
    pub source: SourceQuality,
    pub detector: Detector,
}

impl Scenario {
    pub fn pure(pair: FockPair, bs: BeamSplitter) -> Self {
        Scenario {
            pair,
            bs,
            angle: DistinguishabilityAngle::new(0.0).expect("zero angle is valid"),
            rotated: RotatedBeam::A,
            source: SourceQuality::Pure,
            detector: Detector::ideal(),
        }
    }

    /// Whether the total photon number survives to the detectors unchanged.
    pub fn conserves_total(&self) -> bool {
        let pure = match &self.source {
            SourceQuality::Pure => true,
            SourceQuality::Eta(e) => *e == Rational::from_integer(1.into()),
            SourceQuality::Purity(p) => *p >= 1.0,
        };
        pure && self.detector.efficiency() == 1.0
    }

    /// `(Δ_out, probability)` rows after every stage, checked for
    /// normalization and, for lossless runs, for the parity comb.
    pub fn compute<T: Scalar>(&self) -> Result<Vec<(i64, T)>> {
        let total = self.pair.total();
        let marginal: DeltaMarginal<T> = if self.angle.y() != 0.0 {
            if !self.conserves_total() {
                return Err(Error::range(
                    "scenario",
                    "distinguishability cannot be combined with mixed sources or detector loss",
                ));
            }
            decohere_distribution::<T>(total, self.pair.l(), &self.angle, &self.bs, self.rotated)?.to_marginal()
        } else if self.conserves_total() {
            distribution::<T>(&self.pair, &self.bs)?.to_marginal()
        } else {
            let (k, l) = (self.pair.k(), self.pair.l());
            let (a, b) = match &self.source {
                SourceQuality::Pure => (MixedFockSource::pure(k), MixedFockSource::pure(l)),
                SourceQuality::Eta(eta) => (
                    MixedFockSource::from_rational(k, eta.clone())?,
                    MixedFockSource::from_rational(l, eta.clone())?,
                ),
                SourceQuality::Purity(target) => {
                    let eta = eta_for_joint_purity(k, l, *target)?;
                    (MixedFockSource::new(k, eta)?, MixedFockSource::new(l, eta)?)
                }
            };
            let joint = mixed_distribution::<T>(&a, &b, &self.bs)?;
            delta_marginal(&apply_detector_loss(&joint, &self.detector)?)
        };

        let mass = marginal.mass();
        if !T::is_unit_mass(&mass, DEFAULT_TOLERANCE) {
            return Err(Error::Normalization {
                mass: mass.to_f64(),
                tolerance: DEFAULT_TOLERANCE,
            });
        }
        if self.conserves_total() {
            let off = parity_violation(&marginal, total);
            if !off.is_zero() && (T::EXACT || off.to_f64() >= 1e-12) {
                return Err(Error::ParityViolation { mass: off.to_f64() });
            }
        }

        let rows: Vec<(i64, T)> = if self.detector.resolution() > 1 {
            bin_resolution(&marginal, self.detector.resolution())?.into_iter().collect()
        } else if self.conserves_total() {
            marginal
                .iter()
                .filter(|(d, _)| (d - i64::from(total)).rem_euclid(2) == 0)
                .map(|(d, p)| (d, p.clone()))
                .collect()
        } else {
            marginal.iter().map(|(d, p)| (d, p.clone())).collect()
        };
        if let Some((d, p)) = rows.iter().find(|(_, p)| p.is_negative()) {
            return Err(Error::Negative {
                value: p.to_f64(),
                at: format!("delta_out = {d}"),
            });
        }
        Ok(rows)
    }
}

/// Angle in radians: a decimal or a multiple of pi (`pi/24`, `2pi/3`, `pi`).
pub fn parse_angle(text: &str) -> Result<f64> {
    let t = text.trim().to_ascii_lowercase().replace(['*', ' '], "");
    let bad = || Error::Parse(format!("not an angle: {text:?}"));
    match t.split_once("pi") {
        Some((coef, rest)) => {
            let coef = if coef.is_empty() { 1.0 } else { coef.parse::<f64>().map_err(|_| bad())? };
            let div = match rest.strip_prefix('/') {
                Some(d) => d.parse::<f64>().map_err(|_| bad())?,
                None if rest.is_empty() => 1.0,
                None => return Err(bad()),
            };
            Ok(coef * PI / div)
        }
        None => t.parse::<f64>().map_err(|_| bad()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angles() {
        assert_eq!(parse_angle("pi/24").unwrap(), PI / 24.0);
        assert_eq!(parse_angle("2pi/3").unwrap(), 2.0 * PI / 3.0);
        assert_eq!(parse_angle("PI").unwrap(), PI);
        assert_eq!(parse_angle("0.25").unwrap(), 0.25);
        assert!(parse_angle("pix").is_err());
    }

    #[test]
    fn lossless_rows_sit_on_the_lattice() {
        let sc = Scenario::pure(FockPair::new(2, 0).unwrap(), BeamSplitter::parse("1/2").unwrap());
        let rows = sc.compute::<Rational>().unwrap();
        let half = Rational::new(1.into(), 2.into());
        assert_eq!(
            rows,
            vec![(-2, half.clone()), (0, Rational::from_integer(0.into())), (2, half)]
        );
    }

    #[test]
    fn lossy_rows_cover_every_integer() {
        let mut sc = Scenario::pure(FockPair::new(4, 0).unwrap(), BeamSplitter::new(0.3).unwrap());
        sc.detector = Detector::new(0.9, 1).unwrap();
        let rows = sc.compute::<f64>().unwrap();
        assert!(rows.iter().any(|(d, p)| d % 2 != 0 && *p > 0.0));
        sc.angle = DistinguishabilityAngle::new(0.3).unwrap();
        assert!(sc.compute::<f64>().is_err());
    }
}
