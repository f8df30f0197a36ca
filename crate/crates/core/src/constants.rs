//! Dimensional constants of the sharp inequalities, kept exact as
//! `rational * pi^k`, and the `(P^1)^n` counterexample.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Enough digits of pi for 50-digit output with margin.
const PI_DIGITS: &str = "3.14159265358979323846264338327950288419716939937510582097494459230781640628620899862803482534211706798214808651";

/// `coef * pi^pi_pow`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PiRational {
    pub coef: BigRational,
    pub pi_pow: i32,
}

impl PiRational {
    pub fn new(coef: BigRational, pi_pow: i32) -> Self {
        Self { coef, pi_pow }
    }

    pub fn mul(&self, o: &PiRational) -> PiRational {
        PiRational::new(&self.coef * &o.coef, self.pi_pow + o.pi_pow)
    }

    pub fn div(&self, o: &PiRational) -> PiRational {
        PiRational::new(&self.coef / &o.coef, self.pi_pow - o.pi_pow)
    }

    /// Value with pi replaced by a rational approximation of `digits`
    /// decimals.
    pub fn approx(&self, digits: usize) -> BigRational {
        let pi = pi_rational(digits);
        let mut v = self.coef.clone();
        let p = if self.pi_pow >= 0 { pi.clone() } else { pi.recip() };
        for _ in 0..self.pi_pow.unsigned_abs() {
            v *= &p;
        }
        v
    }

    pub fn to_f64(&self) -> f64 {
        self.coef.to_f64().unwrap_or(f64::NAN) * std::f64::consts::PI.powi(self.pi_pow)
    }

    /// Relative difference `|self/other - 1|`, exact when the powers of pi
    /// agree.
    pub fn rel_residual(&self, other: &PiRational) -> f64 {
        let q = self.div(other);
        if q.pi_pow == 0 {
            return (q.coef - BigRational::one()).abs().to_f64().unwrap_or(f64::NAN);
        }
        (q.to_f64() - 1.0).abs()
    }
}

impl fmt::Display for PiRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.pi_pow {
            0 => write!(f, "{}", self.coef),
            k => write!(f, "{} * pi^{}", self.coef, k),
        }
    }
}

fn int(v: u64) -> BigInt {
    BigInt::from(v)
}

fn ratio(num: BigInt, den: BigInt) -> BigRational {
    BigRational::new(num, den)
}

fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * int(k))
}

fn pow(b: u64, e: u32) -> BigInt {
    num_traits::pow(int(b), e as usize)
}

/// `pi` truncated to `digits` decimals.
pub fn pi_rational(digits: usize) -> BigRational {
    let frac: String = PI_DIGITS[2..].chars().take(digits).collect();
    let num: BigInt = format!("3{frac}").parse().expect("digits");
    ratio(num, num_traits::pow(int(10), frac.len()))
}

/// Decimal rendering with `sig` significant digits, scientific notation.
pub fn to_decimal(x: &BigRational, sig: usize) -> String {
    if x.is_zero() {
        return "0".into();
    }
    let neg = x.is_negative();
    let ax = x.abs();
    let ten = BigRational::from_integer(int(10));
    let mut e: i64 = 0;
    let mut y = ax.clone();
    while y >= ten {
        y /= &ten;
        e += 1;
    }
    while y < BigRational::one() {
        y *= &ten;
        e -= 1;
    }
    let scale = num_traits::pow(int(10), sig - 1);
    let scaled = y * BigRational::from_integer(scale);
    let mut digits = scaled.round().to_integer().to_string();
    if digits.len() > sig {
        digits.truncate(sig);
        e += 1;
    }
    let (head, tail) = digits.split_at(1);
    format!("{}{}.{}e{}", if neg { "-" } else { "" }, head, tail, e)
}

/// `xi_n = (n-1)! n^n (n+1)^{-(2n+1)} pi^{-n}`.
pub fn xi(n: u32) -> PiRational {
    let nn = n as u64;
    PiRational::new(
        ratio(factorial(nn - 1) * pow(nn, n), pow(nn + 1, 2 * n + 1)),
        -(n as i32),
    )
}

/// `d_n = 1 / (n (2 pi)^n)`.
pub fn d(n: u32) -> PiRational {
    let nn = n as u64;
    PiRational::new(ratio(BigInt::one(), int(nn) * pow(2, n)), -(n as i32))
}

/// Volume of the unit `(2n-1)`-sphere, `2 pi^n / (n-1)!`.
pub fn sigma_2n_minus_1(n: u32) -> PiRational {
    PiRational::new(ratio(int(2), factorial(n as u64 - 1)), n as i32)
}

/// Aubin's constant `a_n = 2 n^n (n+1)^{-(2n+1)} / sigma_{2n-1}`.
pub fn aubin_a(n: u32) -> PiRational {
    let nn = n as u64;
    let top = PiRational::new(ratio(int(2) * pow(nn, n), pow(nn + 1, 2 * n + 1)), 0);
    top.div(&sigma_2n_minus_1(n))
}

/// Sharp ball constant `c_n = (n-1)! / (2^n (n+1)^{n+1}) pi^{-n}`.
pub fn sharp_c(n: u32) -> PiRational {
    let nn = n as u64;
    PiRational::new(
        ratio(factorial(nn - 1), pow(2, n) * pow(nn + 1, n + 1)),
        -(n as i32),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HpValue {
    pub exact: String,
    pub decimal: String,
    pub value: f64,
}

impl HpValue {
    fn of(x: &PiRational, sig: usize) -> Self {
        Self {
            exact: x.to_string(),
            decimal: to_decimal(&x.approx(sig + 10), sig),
            value: x.to_f64(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsRow {
    pub n: u32,
    pub xi_n: HpValue,
    pub d_n: HpValue,
    pub sigma_2n_minus_1: HpValue,
    pub aubin_a_n: HpValue,
    pub sharp_c_n: HpValue,
    pub identity_residuals: BTreeMap<String, f64>,
}

/// Significant digits for decimal output: 17 by default, 50 with
/// `MTLAB_PRECISION=extended`.
pub fn precision_from_env() -> usize {
    match std::env::var("MTLAB_PRECISION").as_deref() {
        Ok("extended") => 50,
        _ => 17,
    }
}

pub fn constants_row(n: u32, sig: usize) -> ConstantsRow {
    assert!(n >= 1, "n must be positive");
    let (x, dn, s, a, c) = (xi(n), d(n), sigma_2n_minus_1(n), aubin_a(n), sharp_c(n));
    let half = BigRational::new(int(n as u64 + 1), int(2 * n as u64));
    let ratio_expected = PiRational::new(num_traits::pow(half, n as usize), 0);
    let mut res = BTreeMap::new();
    res.insert("a_n/xi_n - 1".to_string(), a.rel_residual(&x));
    res.insert("(c_n/a_n) / ((1+1/n)/2)^n - 1".to_string(), c.div(&a).rel_residual(&ratio_expected));
    ConstantsRow {
        n,
        xi_n: HpValue::of(&x, sig),
        d_n: HpValue::of(&dn, sig),
        sigma_2n_minus_1: HpValue::of(&s, sig),
        aubin_a_n: HpValue::of(&a, sig),
        sharp_c_n: HpValue::of(&c, sig),
        identity_residuals: res,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub n: u32,
    /// `2^n / n!`, the normalised volume of `(P^1)^n`.
    pub volume: String,
    /// `(1/(n+1)!) 2^{-n} (1+1/n)^n (n+1)^{n+1}`.
    pub bound: String,
    pub volume_f64: f64,
    pub bound_f64: f64,
    pub holds: bool,
}

pub fn counterexample_volume(n: u32) -> BigRational {
    ratio(pow(2, n), factorial(n as u64))
}

pub fn counterexample_bound(n: u32) -> BigRational {
    let nn = n as u64;
    ratio(BigInt::one(), factorial(nn + 1) * pow(2, n))
        * num_traits::pow(BigRational::new(int(nn + 1), int(nn)), n as usize)
        * BigRational::from_integer(pow(nn + 1, n + 1))
}

/// Whether `V(X_n) < bound`, i.e. whether `(P^1)^n` violates the proposed
/// constant.
pub fn counterexample_check(n: u32) -> Counterexample {
    let v = counterexample_volume(n);
    let b = counterexample_bound(n);
    Counterexample {
        n,
        volume: v.to_string(),
        bound: b.to_string(),
        volume_f64: v.to_f64().unwrap_or(f64::NAN),
        bound_f64: b.to_f64().unwrap_or(f64::NAN),
        holds: v < b,
    }
}

pub fn smallest_counterexample_n() -> u32 {
    (1..=10_000)
        .find(|&n| counterexample_check(n).holds)
        .expect("the bound outgrows the volume")
}

/// Exact `bound / volume`.
pub fn counterexample_ratio(n: u32) -> BigRational {
    counterexample_bound(n) / counterexample_volume(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn n1_values() {
        assert_eq!(xi(1).to_string(), "1/8 * pi^-1");
        assert_eq!(sharp_c(1), xi(1));
        assert_eq!(aubin_a(1), xi(1));
    }

    #[test]
    fn n2_ratio() {
        let r = sharp_c(2).div(&aubin_a(2));
        assert_eq!(r.pi_pow, 0);
        assert_eq!(r.coef, BigRational::new(int(9), int(16)));
    }

    #[test]
    fn counterexample_small_n() {
        let c1 = counterexample_check(1);
        assert_eq!((c1.volume.as_str(), c1.bound.as_str(), c1.holds), ("2", "2", false));
        let c2 = counterexample_check(2);
        assert_eq!(c2.bound, "81/32");
        assert!(c2.holds);
        assert_eq!(smallest_counterexample_n(), 2);
        assert!(counterexample_ratio(10).to_f64().unwrap() > 50.0);
    }

    #[test]
    fn counterexample_persists_and_ratio_grows() {
        let n0 = smallest_counterexample_n();
        assert!((n0..=50).all(|n| counterexample_check(n).holds));
        for n in 3..50 {
            assert!(counterexample_ratio(n + 1) > counterexample_ratio(n));
        }
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(to_decimal(&pi_rational(40), 20), "3.1415926535897932385e0");
        assert_eq!(to_decimal(&BigRational::new(int(1), int(8)), 3), "1.25e-1");
        assert_eq!(to_decimal(&BigRational::from_integer(BigInt::from(-999)), 2), "-1.0e3");
    }
}
