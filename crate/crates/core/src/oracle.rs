//! Brute-force ground truth.
//!
//! The fixed-`S` sector of the two-mode beam-splitter Hamiltonian is a
//! tridiagonal matrix on the `Δ` lattice (a continuous-time walk on a line).
//! Evolving by exact diagonalization gives amplitudes that are independent
//! of the closed-form sum. The same amplitudes are Wigner small-d elements
//! of a spin-`S/2` rotation by `2θ`, which we evaluate with a stable
//! three-term recurrence.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock, RwLock};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use num_traits::ToPrimitive;

use crate::channels::{DistinguishabilityAngle, RotatedBeam};
use crate::error::{Error, Result};
use crate::numeric::binomial;
use crate::state::{delta_lattice, lattice_index, BeamSplitter, DeltaDistribution, FockPair};

/// Jump amplitude between lattice sites `Δ` and `Δ - 2` for total `S`.
pub fn hopping_amplitude(total: u32, delta: i64) -> Result<f64> {
    lattice_index(total, delta)?;
    let s = i64::from(total);
    if delta < -s + 2 {
        return Err(Error::Lattice {
            total,
            delta_out: delta,
        });
    }
    Ok(0.5 * (((s + delta) * (s - delta + 2)) as f64).sqrt())
}

/// Zero-diagonal symmetric tridiagonal Hamiltonian on `{-S, ..., S}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalHamiltonian {
    total: u32,
    off_diagonal: Vec<f64>,
}

impl TridiagonalHamiltonian {
    pub fn total(&self) -> u32 {
        self.total
    }

    /// `off_diagonal()[i]` couples lattice sites `i` and `i + 1`.
    pub fn off_diagonal(&self) -> &[f64] {
        &self.off_diagonal
    }

    pub fn dim(&self) -> usize {
        self.total as usize + 1
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut h = DMatrix::zeros(n, n);
        for (i, &q) in self.off_diagonal.iter().enumerate() {
            h[(i, i + 1)] = q;
            h[(i + 1, i)] = q;
        }
        h
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut out = vec![0.0; n];
        for (i, &q) in self.off_diagonal.iter().enumerate() {
            out[i] += q * v[i + 1];
            out[i + 1] += q * v[i];
        }
        out
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        spectrum(self.total).eigenvalues.clone()
    }
}

pub fn build_hamiltonian(total: u32) -> TridiagonalHamiltonian {
    let lattice = delta_lattice(total);
    let off_diagonal = lattice
        .iter()
        .skip(1)
        .map(|&d| hopping_amplitude(total, d).expect("interior lattice site"))
        .collect();
    TridiagonalHamiltonian {
        total,
        off_diagonal,
    }
}

#[derive(Debug)]
struct Spectrum {
    eigenvalues: Vec<f64>,
    // columns are eigenvectors, ordered like `eigenvalues`
    eigenvectors: DMatrix<f64>,
}

fn spectrum(total: u32) -> Arc<Spectrum> {
    static CACHE: OnceLock<RwLock<HashMap<u32, Arc<Spectrum>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(hit) = cache.read().expect("spectrum cache poisoned").get(&total) {
        return Arc::clone(hit);
    }
    let computed = Arc::new(diagonalize(build_hamiltonian(total).to_dense()));
    let mut guard = cache.write().expect("spectrum cache poisoned");
    Arc::clone(guard.entry(total).or_insert(computed))
}

fn diagonalize(h: DMatrix<f64>) -> Spectrum {
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let eigenvectors = DMatrix::from_columns(
        &order
            .iter()
            .map(|&i| eig.eigenvectors.column(i).into_owned())
            .collect::<Vec<DVector<f64>>>(),
    );
    Spectrum {
        eigenvalues,
        eigenvectors,
    }
}

/// Walker state over the `Δ` lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeVector {
    total: u32,
    amplitudes: Vec<Complex64>,
}

impl AmplitudeVector {
    pub fn total(&self) -> u32 {
        self.total
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, delta_out: i64) -> Result<Complex64> {
        Ok(self.amplitudes[lattice_index(self.total, delta_out)?])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }
}

/// `exp(-iθH)|Δ>` by diagonalization of the tridiagonal Hamiltonian.
pub fn evolve(pair: &FockPair, theta: f64) -> AmplitudeVector {
    let spec = spectrum(pair.total());
    let start = pair.lattice_index(pair.delta()).expect("pair is on its lattice");
    let v = &spec.eigenvectors;
    let n = v.nrows();
    let phases: Vec<Complex64> = spec
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(k, &lambda)| Complex64::from_polar(v[(start, k)], -theta * lambda))
        .collect();
    let amplitudes = (0..n)
        .map(|j| {
            (0..n)
                .map(|k| phases[k] * v[(j, k)])
                .fold(Complex64::new(0.0, 0.0), |acc, x| acc + x)
        })
        .collect();
    AmplitudeVector {
        total: pair.total(),
        amplitudes,
    }
}

/// Squared magnitudes of the evolved state at `θ = arcsin √r`.
pub fn oracle_distribution(pair: &FockPair, bs: &BeamSplitter) -> DeltaDistribution<f64> {
    let probs = evolve(pair, bs.theta()).probabilities();
    let mass: f64 = probs.iter().sum();
    DeltaDistribution::from_raw(pair.total(), probs.into_iter().map(|p| p / mass).collect())
}

fn check_wigner_indices(two_s: i64, two_m: i64, what: &str) -> Result<()> {
    if two_s < 0 {
        return Err(Error::Domain(format!("2s = {two_s} is negative")));
    }
    if two_m.abs() > two_s || (two_s - two_m) % 2 != 0 {
        return Err(Error::Domain(format!(
            "2{what} = {two_m} incompatible with 2s = {two_s}"
        )));
    }
    Ok(())
}

/// Wigner small-d element `d^s_{m1,m2}(α)` with half-integer labels passed
/// doubled.
pub fn wigner_d(two_s: i64, two_m1: i64, two_m2: i64, alpha: f64) -> Result<f64> {
    check_wigner_indices(two_s, two_m1, "m1")?;
    let column = wigner_column(two_s, two_m2, alpha)?;
    Ok(column[((two_m1 + two_s) / 2) as usize])
}

/// Whole column `d^s_{m,m2}(α)` for `m = -s, ..., s`.
pub fn wigner_column(two_s: i64, two_m2: i64, alpha: f64) -> Result<Vec<f64>> {
    check_wigner_indices(two_s, two_m2, "m2")?;
    let n = two_s as usize + 1;
    let two_pi = 2.0 * PI;
    let turns = (alpha / two_pi).floor();
    let mut reduced = alpha - turns * two_pi;
    // d(α + 2π) = (-1)^{2s} d(α)
    let mut sign_all = if two_s % 2 == 1 && (turns as i64) % 2 != 0 {
        -1.0
    } else {
        1.0
    };
    // d(-b) = d(b)^T, d_{m',m}(b) = (-1)^{m-m'} d_{m,m'}(b)
    let mut transpose_sign = false;
    if reduced > PI {
        reduced = two_pi - reduced;
        if two_s % 2 == 1 {
            sign_all = -sign_all;
        }
        transpose_sign = true;
    }

    let mut col = rotation_column(two_s, two_m2, reduced);
    for (i, x) in col.iter_mut().enumerate() {
        let two_m = -two_s + 2 * i as i64;
        let parity = if transpose_sign && ((two_m - two_m2) / 2) % 2 != 0 {
            -1.0
        } else {
            1.0
        };
        *x *= sign_all * parity;
    }
    debug_assert_eq!(col.len(), n);
    Ok(col)
}

const RESCALE_ABOVE: f64 = 1e150;

/// Column for `β ∈ [0, π]`, by two-sided recurrence matched in the
/// oscillatory region and normalized to unit length.
fn rotation_column(two_s: i64, two_mp: i64, beta: f64) -> Vec<f64> {
    let n = two_s as usize + 1;
    let j = two_s as f64 / 2.0;
    let mp = two_mp as f64 / 2.0;
    let idx_mp = ((two_mp + two_s) / 2) as usize;
    let (sin_b, cos_b) = beta.sin_cos();

    if sin_b.abs() < 1e-15 {
        let mut col = vec![0.0; n];
        if cos_b > 0.0 {
            col[idx_mp] = 1.0;
        } else {
            // d_{m,m'}(π) = (-1)^{s-m'} δ_{m,-m'}
            let sign = if ((two_s - two_mp) / 2) % 2 == 0 { 1.0 } else { -1.0 };
            col[n - 1 - idx_mp] = sign;
        }
        return col;
    }
    if n == 1 {
        return vec![1.0];
    }

    let m_of = |i: usize| -j + i as f64;
    let up = |m: f64| ((j - m) * (j + m + 1.0)).sqrt();
    let down = |m: f64| ((j + m) * (j - m + 1.0)).sqrt();
    let g = |m: f64| 2.0 * (mp - m * cos_b) / sin_b;

    // backward from m = s while the magnitude grows
    let mut back = vec![0.0; n];
    back[n - 1] = 1.0;
    let mut peak = n - 1;
    while peak > 0 {
        let i = peak;
        let m = m_of(i);
        let above = if i + 1 < n { back[i + 1] } else { 0.0 };
        let next = (g(m) * back[i] - up(m) * above) / down(m);
        if next.abs() < back[i].abs() {
            break;
        }
        back[i - 1] = next;
        peak -= 1;
        if next.abs() > RESCALE_ABOVE {
            back[peak..].iter_mut().for_each(|x| *x /= RESCALE_ABOVE);
        }
    }

    // forward from m = -s up to the matching point
    let stop = (peak + 1).min(n - 1);
    let mut fwd = vec![0.0; n];
    fwd[0] = 1.0;
    for i in 0..stop {
        let m = m_of(i);
        let below = if i > 0 { fwd[i - 1] } else { 0.0 };
        fwd[i + 1] = (g(m) * fwd[i] - down(m) * below) / up(m);
        if fwd[i + 1].abs() > RESCALE_ABOVE {
            fwd[..=i + 1].iter_mut().for_each(|x| *x /= RESCALE_ABOVE);
        }
    }
    // least-squares scale on the overlap {peak, peak + 1}
    let overlap: Vec<usize> = [peak, peak + 1]
        .into_iter()
        .filter(|&i| i < n && i <= stop)
        .collect();
    let (num, den) = overlap.iter().fold((0.0, 0.0), |(num, den), &i| {
        (num + fwd[i] * back[i], den + fwd[i] * fwd[i])
    });
    let scale = if den > 0.0 { num / den } else { 0.0 };

    let mut col: Vec<f64> = (0..n)
        .map(|i| if i < peak { scale * fwd[i] } else { back[i] })
        .collect();

    // renormalize the column; fix the overall sign from the m = s edge,
    // d_{s,m'}(β) ∝ (-sin(β/2))^{s-m'}
    let max = col.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));
    col.iter_mut().for_each(|x| *x /= max);
    let norm = col.iter().map(|x| x * x).sum::<f64>().sqrt();
    let edge_sign = if ((two_s - two_mp) / 2) % 2 == 0 { 1.0 } else { -1.0 };
    let sign = edge_sign * back[n - 1].signum();
    col.iter_mut().for_each(|x| *x *= sign / norm);
    col
}

/// Photon-number basis for four modes `(a_H, a_V, b_H, b_V)` at fixed total.
fn four_mode_basis(total: u32) -> Vec<[u32; 4]> {
    let mut basis = Vec::new();
    for a_h in 0..=total {
        for a_v in 0..=total - a_h {
            for b_h in 0..=total - a_h - a_v {
                basis.push([a_h, a_v, b_h, total - a_h - a_v - b_h]);
            }
        }
    }
    basis
}

/// Full coherent evolution of the two-polarization interference problem.
///
/// Mode `a` starts with `total - n_b` photons and mode `b` with `n_b`. The
/// `rotated` beam is in the polarization state `cos y |H> + sin y |V>`,
/// the other is `|H>`. The splitter acts identically on both polarizations
/// and the detectors sum over them. Intended for small totals; the basis
/// has `C(S+3, 3)` states.
pub fn four_mode_distribution(
    total: u32,
    n_b: u32,
    angle: &DistinguishabilityAngle,
    bs: &BeamSplitter,
    rotated: RotatedBeam,
) -> Result<DeltaDistribution<f64>> {
    if n_b > total {
        return Err(Error::range("N", format!("{n_b} exceeds total {total}")));
    }
    let basis = four_mode_basis(total);
    let index: HashMap<[u32; 4], usize> =
        basis.iter().enumerate().map(|(i, s)| (*s, i)).collect();
    let dim = basis.len();

    let mut h = DMatrix::<f64>::zeros(dim, dim);
    for (col, state) in basis.iter().enumerate() {
        // a_pol† b_pol for pol in {H, V}, plus the Hermitian conjugate
        for (a, b) in [(0usize, 2usize), (1, 3)] {
            if state[b] > 0 {
                let mut next = *state;
                next[b] -= 1;
                next[a] += 1;
                let amp = (f64::from(state[b]) * f64::from(state[a] + 1)).sqrt();
                let row = index[&next];
                h[(row, col)] += amp;
                h[(col, row)] += amp;
            }
        }
    }

    let (c, s) = (angle.y().cos(), angle.y().sin());
    let a_count = total - n_b;
    let mut psi0 = DVector::<f64>::zeros(dim);
    let (m, fixed) = match rotated {
        RotatedBeam::A => (a_count, n_b),
        RotatedBeam::B => (n_b, a_count),
    };
    for n in 0..=m {
        let weight = binomial(m, n).to_f64().unwrap_or(f64::INFINITY).sqrt()
            * c.powi(n as i32)
            * s.powi((m - n) as i32);
        let state = match rotated {
            RotatedBeam::A => [n, m - n, fixed, 0],
            RotatedBeam::B => [fixed, 0, n, m - n],
        };
        psi0[index[&state]] += weight;
    }

    let spec = diagonalize(h);
    let theta = bs.theta();
    let v = &spec.eigenvectors;
    let coeffs: Vec<Complex64> = (0..dim)
        .map(|k| {
            let overlap = v.column(k).dot(&psi0);
            Complex64::from_polar(overlap, -theta * spec.eigenvalues[k])
        })
        .collect();

    let mut probs = vec![0.0; total as usize + 1];
    for (row, state) in basis.iter().enumerate() {
        let amp = (0..dim).fold(Complex64::new(0.0, 0.0), |acc, k| acc + coeffs[k] * v[(row, k)]);
        let p = state[0] + state[1];
        probs[p as usize] += amp.norm_sqr();
    }
    // index by p = (S + Δ_out)/2 is already the lattice order
    let mass: f64 = probs.iter().sum();
    Ok(DeltaDistribution::from_raw(
        total,
        probs.into_iter().map(|p| p / mass).collect(),
    ))
}
