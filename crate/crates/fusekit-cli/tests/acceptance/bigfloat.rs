//! Fixed-point big-decimal arithmetic for the acceptance oracles.
//!
//! Values are `BigInt / 10^60`, giving 60 decimal digits of working
//! precision; `ln` and `exp` are accurate to well past 50 digits, which is
//! what the entropy and softmax reference computations need. Conversions
//! from `f64` are exact (every finite double is a dyadic rational), so the
//! oracle evaluates the same inputs the production code sees.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

pub const DIGITS: u32 = 60;

fn scale() -> &'static BigInt {
    static SCALE: OnceLock<BigInt> = OnceLock::new();
    SCALE.get_or_init(|| BigInt::from(10).pow(DIGITS))
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Fx(BigInt);

impl Fx {
    pub fn zero() -> Fx {
        Fx(BigInt::zero())
    }

    pub fn one() -> Fx {
        Fx(scale().clone())
    }

    pub fn from_u64(n: u64) -> Fx {
        Fx(BigInt::from(n) * scale())
    }

    /// Exact conversion from a finite double (truncated at the 60th digit).
    pub fn from_f64(x: f64) -> Fx {
        assert!(x.is_finite(), "oracle inputs must be finite");
        let bits = x.to_bits();
        let negative = bits >> 63 == 1;
        let exponent = ((bits >> 52) & 0x7ff) as i64;
        let fraction = bits & ((1u64 << 52) - 1);
        let (mantissa, shift) = if exponent == 0 {
            (fraction, -1074i64)
        } else {
            (fraction | (1 << 52), exponent - 1075)
        };
        let mut value = BigInt::from(mantissa) * scale();
        if shift >= 0 {
            value <<= shift as u32;
        } else {
            value >>= (-shift) as u32;
        }
        if negative {
            value = -value;
        }
        Fx(value)
    }

    /// Parses a plain decimal literal such as `-0.693147...`.
    pub fn from_decimal_str(text: &str) -> Fx {
        let (negative, text) = match text.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, text),
        };
        let (int_part, frac_part) = match text.split_once('.') {
            Some((i, f)) => (i, f),
            None => (text, ""),
        };
        let mut digits: String = frac_part.chars().take(DIGITS as usize).collect();
        while digits.len() < DIGITS as usize {
            digits.push('0');
        }
        let combined: BigInt = format!("{int_part}{digits}").parse().expect("decimal literal");
        Fx(if negative { -combined } else { combined })
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().expect("BigInt always converts") / 1e60
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn neg(&self) -> Fx {
        Fx(-&self.0)
    }

    pub fn abs(&self) -> Fx {
        Fx(self.0.abs())
    }

    pub fn add(&self, other: &Fx) -> Fx {
        Fx(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &Fx) -> Fx {
        Fx(&self.0 - &other.0)
    }

    pub fn mul(&self, other: &Fx) -> Fx {
        Fx(&self.0 * &other.0 / scale())
    }

    pub fn div(&self, other: &Fx) -> Fx {
        Fx(&self.0 * scale() / &other.0)
    }

    pub fn div_u64(&self, n: u64) -> Fx {
        Fx(&self.0 / BigInt::from(n))
    }

    pub fn mul_int(&self, n: i64) -> Fx {
        Fx(&self.0 * BigInt::from(n))
    }

    fn half(&self) -> Fx {
        Fx(&self.0 / BigInt::from(2))
    }

    fn double(&self) -> Fx {
        Fx(&self.0 * BigInt::from(2))
    }

    /// `|self| < 10^-neg_exp`, evaluated exactly.
    pub fn abs_below_pow10(&self, neg_exp: u32) -> bool {
        self.0.abs() < BigInt::from(10).pow(DIGITS - neg_exp)
    }

    /// Natural logarithm for positive values: reduce into `[1, 2)`, then
    /// `ln m = 2 atanh((m-1)/(m+1))` by series.
    pub fn ln(&self) -> Fx {
        assert!(self.0.is_positive(), "ln requires a positive value");
        let one = Fx::one();
        let two = Fx::from_u64(2);
        let mut m = self.clone();
        let mut halvings: i64 = 0;
        while m < one {
            m = m.double();
            halvings -= 1;
        }
        while m >= two {
            m = m.half();
            halvings += 1;
        }
        let t = m.sub(&one).div(&m.add(&one));
        let ln_m = atanh(&t).double();
        ln_m.add(&ln2().mul_int(halvings))
    }

    /// Exponential: halve the argument below 1/32, sum the Taylor series,
    /// square back up.
    pub fn exp(&self) -> Fx {
        let threshold = Fx::one().div_u64(32);
        let mut y = self.clone();
        let mut squarings = 0u32;
        while y.abs() > threshold {
            y = y.half();
            squarings += 1;
        }
        let mut term = Fx::one();
        let mut total = Fx::one();
        let mut n = 1u64;
        loop {
            term = term.mul(&y).div_u64(n);
            if term.is_zero() {
                break;
            }
            total = total.add(&term);
            n += 1;
        }
        for _ in 0..squarings {
            total = total.mul(&total);
        }
        total
    }
}

fn atanh(t: &Fx) -> Fx {
    let t_squared = t.mul(t);
    let mut term = t.clone();
    let mut total = Fx::zero();
    let mut n = 1u64;
    while !term.is_zero() {
        total = total.add(&term.div_u64(n));
        term = term.mul(&t_squared);
        n += 2;
    }
    total
}

fn ln2() -> &'static Fx {
    static LN2: OnceLock<Fx> = OnceLock::new();
    // ln 2 = 2 atanh(1/3)
    LN2.get_or_init(|| atanh(&Fx::one().div_u64(3)).double())
}

/// ln K, cached per class count.
pub fn ln_of(k: usize) -> Fx {
    Fx::from_u64(k as u64).ln()
}

/// Reference entropy: `-Σ p ln p` in 60-digit arithmetic, at the exact
/// dyadic values of the input doubles.
pub fn oracle_entropy(probs: &[f64]) -> Fx {
    let mut total = Fx::zero();
    for &p in probs {
        if p > 0.0 {
            let fp = Fx::from_f64(p);
            total = total.add(&fp.mul(&fp.ln()));
        }
    }
    total.neg()
}

/// Reference normalized uncertainty: entropy over `ln K`.
pub fn oracle_normalized_uncertainty(probs: &[f64]) -> Fx {
    oracle_entropy(probs).div(&ln_of(probs.len()))
}

/// Reference softmax at 60-digit precision.
pub fn oracle_softmax(logits: &[f64]) -> Vec<Fx> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<Fx> = logits
        .iter()
        .map(|&z| Fx::from_f64(z).sub(&Fx::from_f64(max)).exp())
        .collect();
    let mut total = Fx::zero();
    for e in &exps {
        total = total.add(e);
    }
    exps.into_iter().map(|e| e.div(&total)).collect()
}

/// The oracle must itself agree with published constants before it is
/// trusted; called once by the acceptance suite.
pub fn self_check() {
    let ln2_known = Fx::from_decimal_str(
        "0.693147180559945309417232121458176568075500134360255254120680",
    );
    assert!(ln2().sub(&ln2_known).abs_below_pow10(55));

    let e_known = Fx::from_decimal_str(
        "2.718281828459045235360287471352662497757247093699959574966967",
    );
    assert!(Fx::one().exp().sub(&e_known).abs_below_pow10(50));

    let ln10_known = Fx::from_decimal_str(
        "2.302585092994045684017991454684364207601101488628772976033327",
    );
    assert!(Fx::from_u64(10).ln().sub(&ln10_known).abs_below_pow10(55));

    let ln_03_known = Fx::from_decimal_str(
        "-1.203972804325935992622746217761838502953610930806023524298633",
    );
    // 0.3 as a double is not exactly 3/10; evaluate at the true rational.
    let three_tenths = Fx::from_u64(3).div_u64(10);
    assert!(three_tenths.ln().sub(&ln_03_known).abs_below_pow10(55));
}
