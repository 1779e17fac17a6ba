//! Exact note durations as fractions of a whole note.

use std::fmt;

use serde::{Deserialize, Serialize};

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// A duration as an exact fraction of a whole note (whole note = 1).
///
/// Always stored in lowest terms with a positive denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "(u64, u64)", into = "(u64, u64)")]
pub struct Duration {
    num: u64,
    den: u64,
}

impl Duration {
    pub const WHOLE: Duration = Duration { num: 1, den: 1 };

    /// Builds a duration from a fraction of a whole note.
    ///
    /// Panics if `den` is zero or `num` is zero.
    pub fn new(num: u64, den: u64) -> Duration {
        assert!(num > 0 && den > 0, "duration must be a positive fraction");
        let g = gcd(num, den);
        Duration {
            num: num / g,
            den: den / g,
        }
    }

    /// Value of a kern recip digit with `dots` augmentation dots:
    /// `(1/digit) * (2 - 2^(-dots))`. Zero dots gives exactly `1/digit`.
    pub fn from_kern(digit: u64, dots: u32) -> Duration {
        assert!(digit > 0, "kern duration digit must be positive");
        assert!(dots <= 16, "unsupported dot count");
        Duration::new((1u64 << (dots + 1)) - 1, digit << dots)
    }

    pub fn numer(&self) -> u64 {
        self.num
    }

    pub fn denom(&self) -> u64 {
        self.den
    }

    /// The kern recip string (`"4"`, `"4."`, `"2.."`) when this value is
    /// exactly expressible as a dotted power-free kern duration.
    pub fn kern_recip(&self) -> Option<String> {
        for dots in 0u32..=8 {
            // num/den == m/(digit * 2^dots) with m = 2^(dots+1) - 1
            let m = (1u64 << (dots + 1)) - 1;
            let (top, bottom) = (m * self.den, self.num << dots);
            if top % bottom == 0 {
                let digit = top / bottom;
                if digit > 0 {
                    let mut s = digit.to_string();
                    s.extend(std::iter::repeat('.').take(dots as usize));
                    return Some(s);
                }
            }
        }
        None
    }

    /// Reduced-fraction token: `"3/8"`, or `"1"` for a whole note.
    pub fn fraction_token(&self) -> String {
        if self.den == 1 {
            self.num.to_string()
        } else {
            format!("{}/{}", self.num, self.den)
        }
    }
}

impl fmt::Display for Duration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.fraction_token())
    }
}

impl TryFrom<(u64, u64)> for Duration {
    type Error = String;

    fn try_from((num, den): (u64, u64)) -> Result<Duration, String> {
        if num == 0 || den == 0 {
            return Err(format!("invalid duration fraction {num}/{den}"));
        }
        Ok(Duration::new(num, den))
    }
}

impl From<Duration> for (u64, u64) {
    fn from(d: Duration) -> (u64, u64) {
        (d.num, d.den)
    }
}
