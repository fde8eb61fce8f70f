//! Exact non-negative dyadic rationals `m / 2^k`, used for Kraft-style weight
//! sums over rows and program lengths.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign};

use num_bigint::BigUint;
use num_traits::{One, Zero};

/// `numerator / 2^exponent`, normalized: odd numerator, or zero with
/// exponent zero.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Dyadic {
    numerator: BigUint,
    exponent: u32,
}

impl Dyadic {
    pub fn zero() -> Self {
        Self { numerator: BigUint::zero(), exponent: 0 }
    }

    pub fn one() -> Self {
        Self { numerator: BigUint::one(), exponent: 0 }
    }

    /// `2^-k`.
    pub fn pow2_neg(k: u32) -> Self {
        Self { numerator: BigUint::one(), exponent: k }
    }

    pub fn new(numerator: BigUint, exponent: u32) -> Self {
        let mut d = Self { numerator, exponent };
        d.normalize();
        d
    }

    fn normalize(&mut self) {
        if self.numerator.is_zero() {
            self.exponent = 0;
            return;
        }
        let tz = self.numerator.trailing_zeros().unwrap_or(0);
        let shift = tz.min(self.exponent as u64) as u32;
        self.numerator >>= shift;
        self.exponent -= shift;
    }

    pub fn is_zero(&self) -> bool {
        self.numerator.is_zero()
    }

    pub fn numerator(&self) -> &BigUint {
        &self.numerator
    }

    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    pub fn denominator(&self) -> BigUint {
        BigUint::one() << self.exponent
    }

    fn aligned(&self, exponent: u32) -> BigUint {
        &self.numerator << (exponent - self.exponent)
    }

    /// Saturating subtraction.
    pub fn saturating_sub(&self, other: &Dyadic) -> Dyadic {
        let e = self.exponent.max(other.exponent);
        let (a, b) = (self.aligned(e), other.aligned(e));
        if a <= b {
            Dyadic::zero()
        } else {
            Dyadic::new(a - b, e)
        }
    }

    pub fn to_f64(&self) -> f64 {
        let n: f64 = self.numerator.to_string().parse().unwrap_or(f64::INFINITY);
        n * 2f64.powi(-(self.exponent as i32))
    }

    /// Parses the `num/den` form written by `Display`.
    pub fn parse(s: &str) -> Option<Self> {
        let (n, d) = s.split_once('/').unwrap_or((s, "1"));
        let numerator: BigUint = n.parse().ok()?;
        let den: BigUint = d.parse().ok()?;
        if den.is_zero() || den.count_ones() != 1 {
            return None;
        }
        let exponent = u32::try_from(den.trailing_zeros()?).ok()?;
        Some(Dyadic::new(numerator, exponent))
    }
}

impl Default for Dyadic {
    fn default() -> Self {
        Self::zero()
    }
}

impl Add<&Dyadic> for &Dyadic {
    type Output = Dyadic;

    fn add(self, rhs: &Dyadic) -> Dyadic {
        let e = self.exponent.max(rhs.exponent);
        Dyadic::new(self.aligned(e) + rhs.aligned(e), e)
    }
}

impl AddAssign<&Dyadic> for Dyadic {
    fn add_assign(&mut self, rhs: &Dyadic) {
        *self = &*self + rhs;
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let e = self.exponent.max(other.exponent);
        self.aligned(e).cmp(&other.aligned(e))
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numerator, self.denominator())
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
