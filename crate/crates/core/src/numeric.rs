//! Numeric back ends: exact rationals and `f64`, plus cached binomials.
//!
//! Every probability routine in the crate is generic over [`Scalar`]. The
//! rational instantiation evaluates formulas literally and is the exactness
//! reference; the float instantiation swaps in numerically stable routes
//! where the literal formula cancels catastrophically.

use std::fmt::Debug;
use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Largest row of Pascal's triangle kept as exact integers.
pub const PASCAL_ROWS: u32 = 200;

/// Float probabilities below this magnitude are flushed to zero.
pub const FLUSH_THRESHOLD: f64 = 1e-300;

/// Default normalization tolerance in float mode.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

/// Which arithmetic a computation should run in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NumericMode {
    ExactRational,
    Float { tolerance: f64 },
}

impl NumericMode {
    pub fn float() -> Self {
        NumericMode::Float {
            tolerance: DEFAULT_TOLERANCE,
        }
    }

    pub fn tolerance(&self) -> f64 {
        match self {
            NumericMode::ExactRational => 0.0,
            NumericMode::Float { tolerance } => *tolerance,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, NumericMode::ExactRational)
    }
}

impl Default for NumericMode {
    fn default() -> Self {
        NumericMode::float()
    }
}

/// Arithmetic shared by the exact and floating-point evaluation paths.
pub trait Scalar:
    Clone + Debug + PartialEq + PartialOrd + Send + Sync + Signed + 'static
{
    /// `true` for exact arithmetic.
    const EXACT: bool;

    /// Lift a model parameter. Exact scalars require the rational form.
    fn from_param(value: f64, exact: Option<&Rational>, what: &'static str) -> Result<Self>;

    fn from_biguint(n: &BigUint) -> Self;

    fn from_u64(n: u64) -> Self;

    fn from_i64(n: i64) -> Self {
        if n < 0 {
            -Self::from_u64(n.unsigned_abs())
        } else {
            Self::from_u64(n as u64)
        }
    }

    fn to_f64(&self) -> f64;

    /// Convert a float result. Exact scalars take the float's exact binary value.
    fn from_f64(x: f64) -> Self;

    /// Flush values too small to matter (floats only).
    fn flush(self) -> Self {
        self
    }

    /// Sum in a fixed order. Floats use compensated summation.
    fn sum_ordered<I: IntoIterator<Item = Self>>(items: I) -> Self {
        items.into_iter().fold(Self::zero(), |acc, x| acc + x)
    }

    /// Whether `mass` equals one within `tolerance` (ignored for exact scalars).
    fn is_unit_mass(mass: &Self, tolerance: f64) -> bool;

    fn powu(&self, exp: u32) -> Self {
        num_traits::pow(self.clone(), exp as usize)
    }

    /// String form used by the CSV/JSON writers.
    fn render(&self) -> String;
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_param(value: f64, _exact: Option<&Rational>, _what: &'static str) -> Result<Self> {
        Ok(value)
    }

    fn from_biguint(n: &BigUint) -> Self {
        n.to_f64().unwrap_or(f64::INFINITY)
    }

    fn from_u64(n: u64) -> Self {
        n as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn from_f64(x: f64) -> Self {
        x
    }

    fn flush(self) -> Self {
        if self.abs() < FLUSH_THRESHOLD {
            0.0
        } else {
            self
        }
    }

    fn sum_ordered<I: IntoIterator<Item = Self>>(items: I) -> Self {
        neumaier_sum(items)
    }

    fn is_unit_mass(mass: &Self, tolerance: f64) -> bool {
        (mass - 1.0).abs() <= tolerance
    }

    fn render(&self) -> String {
        format_f64(*self)
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn from_param(_value: f64, exact: Option<&Rational>, what: &'static str) -> Result<Self> {
        exact.cloned().ok_or(Error::Mode(what))
    }

    fn from_biguint(n: &BigUint) -> Self {
        Rational::from_integer(BigInt::from(n.clone()))
    }

    fn from_u64(n: u64) -> Self {
        Rational::from_integer(BigInt::from(n))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn from_f64(x: f64) -> Self {
        Rational::from_float(x).unwrap_or_else(Rational::zero)
    }

    fn is_unit_mass(mass: &Self, _tolerance: f64) -> bool {
        mass.is_one()
    }

    fn render(&self) -> String {
        self.to_string()
    }
}

/// Neumaier's compensated summation, evaluated left to right.
pub fn neumaier_sum<I: IntoIterator<Item = f64>>(items: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for x in items {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// 17 significant digits, enough for a lossless round trip.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

struct Pascal {
    exact: Vec<Vec<BigUint>>,
    ln: Vec<Vec<f64>>,
}

fn pascal() -> &'static Pascal {
    static TABLE: OnceLock<Pascal> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut exact: Vec<Vec<BigUint>> = Vec::with_capacity(PASCAL_ROWS as usize + 1);
        for n in 0..=PASCAL_ROWS as usize {
            let mut row = Vec::with_capacity(n + 1);
            for k in 0..=n {
                if k == 0 || k == n {
                    row.push(BigUint::one());
                } else {
                    let prev: &Vec<BigUint> = &exact[n - 1];
                    row.push(&prev[k - 1] + &prev[k]);
                }
            }
            exact.push(row);
        }
        let ln = exact
            .iter()
            .map(|row| row.iter().map(ln_biguint).collect())
            .collect();
        Pascal { exact, ln }
    })
}

fn ln_biguint(n: &BigUint) -> f64 {
    match n.to_f64() {
        Some(x) if x.is_finite() => x.ln(),
        _ => {
            let bits = n.bits();
            let shift = bits.saturating_sub(64);
            let top = (n >> shift).to_f64().unwrap_or(f64::MAX);
            top.ln() + shift as f64 * std::f64::consts::LN_2
        }
    }
}

/// Exact binomial coefficient. Zero when `k > n`.
pub fn binomial(n: u32, k: u32) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    if n <= PASCAL_ROWS {
        return pascal().exact[n as usize][k as usize].clone();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= BigUint::from(n - i);
        acc /= BigUint::from(i + 1);
    }
    acc
}

/// Natural log of `C(n, k)`; `-inf` when `k > n`.
pub fn ln_binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    if n <= PASCAL_ROWS {
        return pascal().ln[n as usize][k as usize];
    }
    use statrs::function::gamma::ln_gamma;
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// Binomial coefficient lifted into a scalar.
pub fn binomial_as<T: Scalar>(n: u32, k: u32) -> T {
    T::from_biguint(&binomial(n, k))
}

/// `n!` as a scalar.
pub fn factorial_as<T: Scalar>(n: u32) -> T {
    let mut acc = BigUint::one();
    for i in 2..=n {
        acc *= BigUint::from(i);
    }
    T::from_biguint(&acc)
}

/// Natural log of `n!`.
pub fn ln_factorial(n: u32) -> f64 {
    statrs::function::factorial::ln_factorial(n as u64)
}

/// Parse a decimal (`0.25`, `1e-3`) or fraction (`1/4`) into an exact rational.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let text = text.trim();
    let bad = || Error::Parse(format!("not a rational number: {text:?}"));
    if let Some((num, den)) = text.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| bad())?;
        let den: BigInt = den.trim().parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(num, den));
    }
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(idx) => (
            &text[..idx],
            text[idx + 1..].parse::<i32>().map_err(|_| bad())?,
        ),
        None => (text, 0),
    };
    let (negative, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits: BigInt = format!("{int_part}{frac_part}0")
        .parse::<BigInt>()
        .map_err(|_| bad())?
        / BigInt::from(10);
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut value = if scale >= 0 {
        Rational::from_integer(digits * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(digits, num_traits::pow(ten, (-scale) as usize))
    };
    if negative {
        value = -value;
    }
    Ok(value)
}
