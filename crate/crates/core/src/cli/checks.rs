//! Verification suites behind `homleap check`.

use std::f64::consts::{FRAC_PI_2, PI};

use clap::ValueEnum;
use rayon::prelude::*;

use crate::channels::{
    classical_reference, decohere_distribution, mixed_distribution, DistinguishabilityAngle, MixedFockSource,
    RotatedBeam,
};
use crate::closed_form::{amplitude_expansion, distribution};
use crate::error::Result;
use crate::metrics::{
    mean_delta, parity_violation, predicted_mean, predicted_variance, tv_distance, variance_delta,
    visibility_fock, visibility_from_moments, visibility_region,
};
use crate::numeric::Rational;
use crate::oracle::{build_hamiltonian, four_mode_distribution, oracle_distribution};
use crate::state::{delta_lattice, delta_marginal, BeamSplitter, FockPair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Oracle,
    Parity,
    Moments,
    Visibility,
    Decoherence,
    All,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub suite: &'static str,
    pub check: &'static str,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckRow {
    fn within(suite: &'static str, check: &'static str, max_deviation: f64, tolerance: f64) -> Self {
        CheckRow {
            suite,
            check,
            max_deviation,
            tolerance,
            pass: max_deviation <= tolerance,
        }
    }

    fn exact(suite: &'static str, check: &'static str, mismatches: usize) -> Self {
        CheckRow {
            suite,
            check,
            max_deviation: mismatches as f64,
            tolerance: 0.0,
            pass: mismatches == 0,
        }
    }
}

pub const GRID_R: [f64; 4] = [0.1, 0.2, 0.5, 0.9];
const GRID_R_EXACT: [(i64, i64); 4] = [(1, 10), (1, 5), (1, 2), (9, 10)];

fn max_abs(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn pairs(max_total: u32) -> Vec<FockPair> {
    (0..=max_total)
        .flat_map(|s| delta_lattice(s).into_iter().map(move |d| FockPair::new(s, d).expect("lattice pair")))
        .collect()
}

fn fold_max(values: impl ParallelIterator<Item = Result<f64>>) -> Result<f64> {
    values.try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
}

pub fn run(suite: Suite) -> Result<Vec<CheckRow>> {
    let suites: &[Suite] = match suite {
        Suite::All => &[Suite::Oracle, Suite::Parity, Suite::Moments, Suite::Visibility, Suite::Decoherence],
        _ => std::slice::from_ref(&suite),
    };
    let mut rows = Vec::new();
    for s in suites {
        rows.extend(match s {
            Suite::Oracle => oracle()?,
            Suite::Parity => parity()?,
            Suite::Moments => moments()?,
            Suite::Visibility => visibility()?,
            Suite::Decoherence => decoherence()?,
            Suite::All => unreachable!(),
        });
    }
    Ok(rows)
}

fn oracle() -> Result<Vec<CheckRow>> {
    let all = pairs(30);
    let closed_vs_oracle = fold_max(all.par_iter().flat_map_iter(|pair| {
        GRID_R.iter().map(move |&r| {
            let bs = BeamSplitter::new(r)?;
            let d = distribution::<f64>(pair, &bs)?;
            Ok(max_abs(d.probs(), oracle_distribution(pair, &bs).probs()))
        })
    }))?;
    let expansion_vs_closed = fold_max(all.par_iter().flat_map_iter(|pair| {
        GRID_R.iter().map(move |&r| {
            let bs = BeamSplitter::new(r)?;
            let d = distribution::<f64>(pair, &bs)?;
            let e = delta_marginal(&amplitude_expansion::<f64>(pair.k(), pair.l(), &bs)?)
                .into_distribution(pair.total())?;
            Ok(max_abs(d.probs(), e.probs()))
        })
    }))?;
    let exact_pairs = pairs(16);
    let mismatches: usize = exact_pairs
        .par_iter()
        .map(|pair| -> Result<usize> {
            let mut bad = 0;
            for (n, d) in GRID_R_EXACT {
                let bs = BeamSplitter::from_ratio(n, d)?;
                let c = distribution::<Rational>(pair, &bs)?;
                let e = delta_marginal(&amplitude_expansion::<Rational>(pair.k(), pair.l(), &bs)?)
                    .into_distribution(pair.total())?;
                bad += usize::from(c != e);
            }
            Ok(bad)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    let spectrum = (0..=60u32)
        .into_par_iter()
        .map(|s| {
            let ev = build_hamiltonian(s).eigenvalues();
            ev.iter()
                .enumerate()
                .map(|(i, e)| (e - (2.0 * i as f64 - f64::from(s))).abs())
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    Ok(vec![
        CheckRow::within("oracle", "closed_form_vs_evolution_s30", closed_vs_oracle, 1e-9),
        CheckRow::within("oracle", "expansion_vs_closed_form_s30", expansion_vs_closed, 1e-9),
        CheckRow::exact("oracle", "exact_expansion_vs_closed_form_s16", mismatches),
        CheckRow::within("oracle", "spectrum_gap_two_s60", spectrum, 1e-9),
    ])
}

fn parity() -> Result<Vec<CheckRow>> {
    let exact: usize = pairs(16)
        .par_iter()
        .map(|pair| -> Result<usize> {
            let bs = BeamSplitter::from_ratio(3, 7)?;
            let j = amplitude_expansion::<Rational>(pair.k(), pair.l(), &bs)?;
            let m = delta_marginal(&j);
            let dense = distribution::<Rational>(pair, &bs)?.to_marginal();
            Ok(usize::from(parity_violation(&m, pair.total()) != Rational::from_integer(0.into()))
                + usize::from(parity_violation(&dense, pair.total()) != Rational::from_integer(0.into())))
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    let float = fold_max(pairs(60).par_iter().flat_map_iter(|pair| {
        GRID_R.iter().map(move |&r| {
            let bs = BeamSplitter::new(r)?;
            let j = mixed_distribution::<f64>(
                &MixedFockSource::pure(pair.k()),
                &MixedFockSource::pure(pair.l()),
                &bs,
            )?;
            Ok(parity_violation(&delta_marginal(&j), pair.total()))
        })
    }))?;
    Ok(vec![
        CheckRow::exact("parity", "exact_off_parity_zero_s16", exact),
        CheckRow::within("parity", "float_off_parity_s60", float, 1e-12),
    ])
}

pub fn r_grid_21() -> Vec<f64> {
    (0..=20).map(|i| f64::from(i) / 20.0).collect()
}

fn moments() -> Result<Vec<CheckRow>> {
    let grid = r_grid_21();
    let (mean_dev, var_dev) = pairs(60)
        .par_iter()
        .map(|pair| -> Result<(f64, f64)> {
            let mut worst = (0.0_f64, 0.0_f64);
            for &r in &grid {
                let d = distribution::<f64>(pair, &BeamSplitter::new(r)?)?;
                worst.0 = worst.0.max((mean_delta(&d) - predicted_mean(pair.delta(), &r)).abs());
                worst.1 = worst.1.max(
                    (variance_delta(&d) - predicted_variance(pair.total(), pair.delta(), &r)).abs(),
                );
            }
            Ok(worst)
        })
        .try_reduce(|| (0.0, 0.0), |a, b| Ok((a.0.max(b.0), a.1.max(b.1))))?;
    Ok(vec![
        CheckRow::within("moments", "mean_law_s60_r21", mean_dev, 1e-9),
        CheckRow::within("moments", "variance_law_s60_r21", var_dev, 1e-9),
    ])
}

fn visibility() -> Result<Vec<CheckRow>> {
    let half = Rational::new(1.into(), 2.into());
    let mut bad = 0;
    for n in 1..=100u32 {
        let v = visibility_fock(n, n, &half)?;
        let expect = Rational::from_integer(1.into())
            / (Rational::from_integer(2.into()) - Rational::new(1.into(), i64::from(n).into()));
        bad += usize::from(v.value != expect || !v.nonclassical);
    }
    let mut scale_bad = 0;
    for (n, m) in [(3u32, 5u32), (10, 2), (7, 7), (1, 4)] {
        let r = Rational::new(37.into(), 100.into());
        let base = visibility_fock(n, m, &r)?;
        for c in [Rational::new(81.into(), 100.into()), Rational::new(1.into(), 64.into())] {
            let gab = Rational::from_integer((n * m).into()) * &c;
            let gaa = Rational::from_integer((n * n.saturating_sub(1)).into()) * &c;
            let gbb = Rational::from_integer((m * m.saturating_sub(1)).into()) * &c;
            scale_bad += usize::from(visibility_from_moments(&gab, &gaa, &gbb, &r)? != base);
        }
    }
    let mut region_bad = 0;
    for (r, size) in [(0.36, 10), (0.43, 50), (0.39, 10), (0.45, 50), (0.5, 10), (0.5, 50)] {
        let region = visibility_region(size, size, r)?;
        for n in 1..=size {
            for m in 1..=size {
                let v = region.values[(n - 1) as usize][(m - 1) as usize];
                region_bad += usize::from(region.is_nonclassical(n, m) != (v > 0.5));
                region_bad += usize::from(region.is_nonclassical(n, m) != region.is_nonclassical(m, n));
            }
        }
    }
    Ok(vec![
        CheckRow::exact("visibility", "equal_numbers_balanced_n100", bad),
        CheckRow::exact("visibility", "moment_scale_invariance", scale_bad),
        CheckRow::exact("visibility", "region_masks_consistent", region_bad),
    ])
}

fn decoherence() -> Result<Vec<CheckRow>> {
    let zero = DistinguishabilityAngle::new(0.0)?;
    let mut bad = 0;
    for s in 0..=10u32 {
        for nb in 0..=s {
            let bs = BeamSplitter::from_ratio(1, 2)?;
            let got = decohere_distribution::<Rational>(s, nb, &zero, &bs, RotatedBeam::A)?;
            bad += usize::from(got != distribution::<Rational>(&FockPair::from_modes(s - nb, nb), &bs)?);
        }
    }
    let ortho = DistinguishabilityAngle::new(FRAC_PI_2)?;
    let bs = BeamSplitter::new(0.5)?;
    let classical = tv_distance(
        &decohere_distribution::<f64>(50, 25, &ortho, &bs, RotatedBeam::A)?,
        &classical_reference::<f64>(50, 25, &bs)?,
    );
    let mut brute = 0.0_f64;
    for s in 0..=6u32 {
        for nb in 0..=s {
            for y in [PI / 24.0, PI / 6.0, PI / 3.0, FRAC_PI_2] {
                let angle = DistinguishabilityAngle::new(y)?;
                for rotated in [RotatedBeam::A, RotatedBeam::B] {
                    let bs = BeamSplitter::new(0.3)?;
                    let a = decohere_distribution::<f64>(s, nb, &angle, &bs, rotated)?;
                    let b = four_mode_distribution(s, nb, &angle, &bs, rotated)?;
                    brute = brute.max(max_abs(a.probs(), b.probs()));
                }
            }
        }
    }
    Ok(vec![
        CheckRow::exact("decoherence", "indistinguishable_is_pure_s10", bad),
        CheckRow::within("decoherence", "orthogonal_tv_vs_classical_s50", classical, 1e-12),
        CheckRow::within("decoherence", "mixture_vs_four_mode_s6", brute, 1e-10),
    ])
}
