//! Interval annotations on a finite grid.
//!
//! An annotation is an interval `[l,u]` inside `[0,1]`. The knowledge order
//! goes *up* as intervals shrink: `⊥ = [0,1]` sits below everything and the
//! degenerate intervals `[x,x]` are the tops. Two intervals have an upper
//! bound only when they overlap, which makes the structure a lower
//! semi-lattice rather than a lattice.
//!
//! Bounds are stored as integer grid coordinates `k` meaning `k/N`, so every
//! operation here is exact. The signed mode is the three-element classical
//! lattice written with values in `{-1,1}` (`x = 2l - 1`); internally it uses
//! the same coordinates as a unit grid with `N = 1`.

use std::fmt;

use crate::error::LatticeError;

/// How annotation values are written and which grid they live on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LatticeMode {
    /// Values `k/N` in `[0,1]`.
    UnitGrid,
    /// Values in `{-1,1}`: uncertain `[-1,1]`, true `[1,1]`, false `[-1,-1]`.
    SignedClassical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LatticeConfig {
    mode: LatticeMode,
    resolution: u32,
}

impl LatticeConfig {
    pub fn unit(resolution: u32) -> Result<Self, LatticeError> {
        if resolution == 0 {
            return Err(LatticeError::ZeroResolution);
        }
        Ok(Self {
            mode: LatticeMode::UnitGrid,
            resolution,
        })
    }

    pub fn signed() -> Self {
        Self {
            mode: LatticeMode::SignedClassical,
            resolution: 1,
        }
    }

    pub fn mode(&self) -> LatticeMode {
        self.mode
    }

    pub fn is_signed(&self) -> bool {
        self.mode == LatticeMode::SignedClassical
    }

    /// Grid size `N`; always 1 in signed mode.
    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    /// Number of elements on the longest chain from `⊥` to a top.
    ///
    /// Every strict step up shrinks `u - l` by at least one grid unit, and
    /// `[0,N] ⊏ [1,N] ⊏ ... ⊏ [N,N]` attains the bound.
    pub fn height(&self) -> u32 {
        self.resolution + 1
    }

    pub fn bottom(&self) -> Interval {
        Interval {
            lower: 0,
            upper: self.resolution,
            config: *self,
        }
    }

    /// The top element `[k/N, k/N]`.
    pub fn top(&self, k: u32) -> Result<Interval, LatticeError> {
        self.interval(k, k)
    }

    /// The element with grid coordinates `lower` and `upper`.
    pub fn interval(&self, lower: u32, upper: u32) -> Result<Interval, LatticeError> {
        if upper > self.resolution {
            return Err(LatticeError::OutOfRange {
                coord: upper,
                resolution: self.resolution,
            });
        }
        if lower > upper {
            return Err(LatticeError::NotAnElement { lower, upper });
        }
        Ok(Interval {
            lower,
            upper,
            config: *self,
        })
    }

    /// Every element of the lattice, ordered by lower then upper coordinate.
    pub fn elements(&self) -> impl Iterator<Item = Interval> + '_ {
        let n = self.resolution;
        (0..=n).flat_map(move |l| {
            (l..=n).map(move |u| Interval {
                lower: l,
                upper: u,
                config: *self,
            })
        })
    }

    /// Signed-mode element from the signed lower bounds of `a` and `¬a`.
    ///
    /// The upper bound of `a` is the negation of the lower bound of `¬a`.
    pub fn from_signed_lowers(&self, pos: i8, neg: i8) -> Result<Interval, LatticeError> {
        if !self.is_signed() {
            return Err(LatticeError::Unconvertible {
                from: *self,
                to: LatticeConfig::signed(),
            });
        }
        let coord = |x: i8| match x {
            -1 => Ok(0),
            1 => Ok(1),
            other => Err(LatticeError::OffGrid {
                value: other.to_string(),
                config: *self,
            }),
        };
        let lower = coord(pos)?;
        let upper = 1 - coord(neg)?;
        self.interval(lower, upper)
    }

    /// Grid coordinate of a decimal (`0.25`, `-1`) or fraction (`3/4`) literal.
    pub fn parse_value(&self, text: &str) -> Result<u32, LatticeError> {
        let value = Rational::parse(text).ok_or_else(|| LatticeError::Malformed(text.to_string()))?;
        let off_grid = || LatticeError::OffGrid {
            value: text.to_string(),
            config: *self,
        };
        // unit value u = (x + 1) / 2 in signed mode
        let unit = match self.mode {
            LatticeMode::UnitGrid => value,
            LatticeMode::SignedClassical => Rational::new(value.num + value.den, 2 * value.den),
        };
        let scaled = unit.num * self.resolution as i128;
        if scaled % unit.den != 0 {
            return Err(off_grid());
        }
        let k = scaled / unit.den;
        if k < 0 || k > self.resolution as i128 {
            return Err(off_grid());
        }
        Ok(k as u32)
    }

    /// Text for grid coordinate `k`; the inverse of [`parse_value`](Self::parse_value).
    pub fn format_coord(&self, k: u32) -> String {
        match self.mode {
            LatticeMode::SignedClassical => {
                if k == 0 {
                    "-1".to_string()
                } else {
                    "1".to_string()
                }
            }
            LatticeMode::UnitGrid => Rational::new(k as i128, self.resolution as i128).to_text(),
        }
    }

    /// Signed image `2l - 1` of a lower-bound coordinate.
    pub fn signed_value(&self, k: u32) -> f64 {
        2.0 * k as f64 / self.resolution as f64 - 1.0
    }
}

impl fmt::Display for LatticeConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.mode {
            LatticeMode::UnitGrid => write!(f, "unit grid N={}", self.resolution),
            LatticeMode::SignedClassical => write!(f, "signed"),
        }
    }
}

/// A lattice element `[lower/N, upper/N]` with `lower ≤ upper`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Interval {
    lower: u32,
    upper: u32,
    config: LatticeConfig,
}

impl Interval {
    pub fn lower(&self) -> u32 {
        self.lower
    }

    pub fn upper(&self) -> u32 {
        self.upper
    }

    pub fn config(&self) -> LatticeConfig {
        self.config
    }

    pub fn is_bottom(&self) -> bool {
        self.lower == 0 && self.upper == self.config.resolution
    }

    pub fn is_top(&self) -> bool {
        self.lower == self.upper
    }

    /// Knowledge order: `self ⊑ other` iff `other` is contained in `self`.
    pub fn leq(&self, other: &Interval) -> Result<bool, LatticeError> {
        self.same_config(other)?;
        Ok(self.lower <= other.lower && other.upper <= self.upper)
    }

    /// `¬[l,u] = [1-u, 1-l]`.
    pub fn negate(&self) -> Interval {
        let n = self.config.resolution;
        Interval {
            lower: n - self.upper,
            upper: n - self.lower,
            config: self.config,
        }
    }

    /// Re-express this element on another grid.
    ///
    /// Signed mode shares coordinates with `N = 1`; between unit grids the
    /// coordinates are rescaled and must land on grid points.
    pub fn convert(&self, to: LatticeConfig) -> Result<Interval, LatticeError> {
        let from_n = self.config.resolution as u64;
        let to_n = to.resolution as u64;
        let rescale = |k: u32| -> Result<u32, LatticeError> {
            let scaled = k as u64 * to_n;
            if scaled % from_n != 0 {
                return Err(LatticeError::Unconvertible {
                    from: self.config,
                    to,
                });
            }
            Ok((scaled / from_n) as u32)
        };
        let lower = rescale(self.lower)?;
        let upper = rescale(self.upper)?;
        to.interval(lower, upper)
    }

    fn same_config(&self, other: &Interval) -> Result<(), LatticeError> {
        if self.config != other.config {
            return Err(LatticeError::ConfigMismatch {
                left: self.config,
                right: other.config,
            });
        }
        Ok(())
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{},{}]",
            self.config.format_coord(self.lower),
            self.config.format_coord(self.upper)
        )
    }
}

/// Outcome of a supremum: the set has no upper bound when its intervals do
/// not all overlap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[must_use]
pub enum Sup {
    Element(Interval),
    Conflict(Conflict),
}

impl Sup {
    pub fn element(self) -> Option<Interval> {
        match self {
            Sup::Element(i) => Some(i),
            Sup::Conflict(_) => None,
        }
    }
}

/// Out-of-lattice marker: the largest lower coordinate exceeds the smallest
/// upper coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Conflict {
    pub lower: u32,
    pub upper: u32,
}

/// Least upper bound `[max lowers, min uppers]` of a nonempty set.
pub fn sup(items: &[Interval]) -> Result<Sup, LatticeError> {
    let (first, rest) = items.split_first().ok_or(LatticeError::EmptySup)?;
    let mut lower = first.lower;
    let mut upper = first.upper;
    for item in rest {
        first.same_config(item)?;
        lower = lower.max(item.lower);
        upper = upper.min(item.upper);
    }
    if lower > upper {
        return Ok(Sup::Conflict(Conflict { lower, upper }));
    }
    Ok(Sup::Element(Interval {
        lower,
        upper,
        config: first.config,
    }))
}

/// Exact rational used for reading and writing grid values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Rational {
    num: i128,
    den: i128,
}

impl Rational {
    fn new(num: i128, den: i128) -> Self {
        let g = gcd(num.unsigned_abs(), den.unsigned_abs()).max(1) as i128;
        let sign = if den < 0 { -1 } else { 1 };
        Rational {
            num: sign * num / g,
            den: sign * den / g,
        }
    }

    fn parse(text: &str) -> Option<Rational> {
        let text = text.trim();
        if let Some((n, d)) = text.split_once('/') {
            let num = parse_int(n)?;
            let den = parse_int(d)?;
            if den <= 0 {
                return None;
            }
            return Some(Rational::new(num, den));
        }
        let (neg, digits) = match text.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, text),
        };
        let (int_part, frac_part) = match digits.split_once('.') {
            Some((i, f)) => (i, f),
            None => (digits, ""),
        };
        if int_part.is_empty() || !int_part.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        if digits.contains('.') && (frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit())) {
            return None;
        }
        if int_part.len() + frac_part.len() > 30 {
            return None;
        }
        let den = 10i128.pow(frac_part.len() as u32);
        let num: i128 = format!("{int_part}{frac_part}").parse().ok()?;
        Some(Rational::new(if neg { -num } else { num }, den))
    }

    /// Shortest decimal when the denominator divides a power of ten, else `p/q`.
    fn to_text(self) -> String {
        let mut d = self.den;
        let (mut twos, mut fives) = (0u32, 0u32);
        while d % 2 == 0 {
            d /= 2;
            twos += 1;
        }
        while d % 5 == 0 {
            d /= 5;
            fives += 1;
        }
        if d != 1 {
            return format!("{}/{}", self.num, self.den);
        }
        let places = twos.max(fives);
        let scaled = self.num * 10i128.pow(places) / self.den;
        if places == 0 {
            return scaled.to_string();
        }
        let sign = if scaled < 0 { "-" } else { "" };
        let abs = scaled.unsigned_abs();
        let pow = 10u128.pow(places);
        let frac = format!("{:0width$}", abs % pow, width = places as usize);
        format!("{sign}{}.{}", abs / pow, frac.trim_end_matches('0'))
    }
}

fn parse_int(text: &str) -> Option<i128> {
    let t = text.trim();
    let digits = t.strip_prefix('-').unwrap_or(t);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) || digits.len() > 30 {
        return None;
    }
    t.parse().ok()
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(n: u32) -> LatticeConfig {
        LatticeConfig::unit(n).unwrap()
    }

    fn iv(cfg: LatticeConfig, l: u32, u: u32) -> Interval {
        cfg.interval(l, u).unwrap()
    }

    #[test]
    fn leq_examples() {
        let c1 = unit(1);
        assert!(c1.bottom().leq(&iv(c1, 1, 1)).unwrap());
        let c10 = unit(10);
        let x = iv(c10, 4, 4);
        assert!(x.leq(&x).unwrap());
        assert!(!iv(c10, 2, 6).leq(&iv(c10, 5, 9)).unwrap());
    }

    #[test]
    fn leq_rejects_mixed_configs() {
        let a = unit(2).bottom();
        let b = unit(4).bottom();
        assert!(matches!(a.leq(&b), Err(LatticeError::ConfigMismatch { .. })));
        // same coordinates, different mode
        assert!(unit(1).bottom().leq(&LatticeConfig::signed().bottom()).is_err());
    }

    #[test]
    fn sup_examples() {
        let c = unit(10);
        assert_eq!(sup(&[c.bottom(), iv(c, 4, 9)]).unwrap(), Sup::Element(iv(c, 4, 9)));
        assert_eq!(sup(&[iv(c, 2, 6), iv(c, 5, 9)]).unwrap(), Sup::Element(iv(c, 5, 6)));
        let c1 = unit(1);
        assert_eq!(
            sup(&[iv(c1, 0, 0), iv(c1, 1, 1)]).unwrap(),
            Sup::Conflict(Conflict { lower: 1, upper: 0 })
        );
        assert!(matches!(sup(&[]), Err(LatticeError::EmptySup)));
    }

    #[test]
    fn negate_examples() {
        let c = unit(10);
        assert_eq!(iv(c, 2, 7).negate(), iv(c, 3, 8));
        assert_eq!(c.bottom().negate(), c.bottom());
        let a = iv(c, 1, 4);
        assert_eq!(a.negate().negate(), a);
    }

    #[test]
    fn height_examples() {
        assert_eq!(unit(1).height(), 2);
        assert_eq!(LatticeConfig::signed().height(), 2);
        assert_eq!(unit(10).height(), 11);
        assert!(matches!(LatticeConfig::unit(0), Err(LatticeError::ZeroResolution)));
    }

    #[test]
    fn signed_lower_pairs() {
        let s = LatticeConfig::signed();
        assert_eq!(s.from_signed_lowers(1, -1).unwrap(), iv(s, 1, 1));
        assert_eq!(s.from_signed_lowers(-1, -1).unwrap(), s.bottom());
        assert_eq!(s.from_signed_lowers(-1, 1).unwrap(), iv(s, 0, 0));
        assert!(s.from_signed_lowers(1, 1).is_err());
    }

    #[test]
    fn convert_between_grids() {
        let s = LatticeConfig::signed();
        let top = iv(s, 1, 1);
        let u1 = top.convert(unit(1)).unwrap();
        assert_eq!(u1, iv(unit(1), 1, 1));
        assert_eq!(u1.convert(s).unwrap(), top);
        assert_eq!(iv(unit(2), 1, 2).convert(unit(4)).unwrap(), iv(unit(4), 2, 4));
        assert!(iv(unit(4), 1, 4).convert(unit(2)).is_err());
        assert_eq!(iv(unit(4), 2, 4).convert(unit(2)).unwrap(), iv(unit(2), 1, 2));
    }

    #[test]
    fn parse_and_format_values() {
        let c = unit(10);
        assert_eq!(c.parse_value("0.5").unwrap(), 5);
        assert_eq!(c.parse_value("1.0").unwrap(), 10);
        assert_eq!(c.parse_value("1/5").unwrap(), 2);
        assert!(matches!(c.parse_value("0.33"), Err(LatticeError::OffGrid { .. })));
        assert!(c.parse_value("1.5").is_err());
        assert!(c.parse_value("-0.1").is_err());
        assert!(c.parse_value("abc").is_err());
        assert!(c.parse_value("1.").is_err());
        assert_eq!(c.format_coord(8), "0.8");
        assert_eq!(c.format_coord(10), "1");
        assert_eq!(c.format_coord(0), "0");
        assert_eq!(unit(4).format_coord(1), "0.25");
        assert_eq!(unit(3).format_coord(1), "1/3");
        assert_eq!(unit(3).parse_value("2/3").unwrap(), 2);

        let s = LatticeConfig::signed();
        assert_eq!(s.parse_value("-1").unwrap(), 0);
        assert_eq!(s.parse_value("1.0").unwrap(), 1);
        assert!(s.parse_value("0").is_err());
        assert_eq!(s.format_coord(0), "-1");
        assert_eq!(format!("{}", s.bottom()), "[-1,1]");
        assert_eq!(format!("{}", iv(c, 8, 10)), "[0.8,1]");
    }

    #[test]
    fn format_round_trips_on_every_grid_point() {
        for n in 1..=40 {
            let c = unit(n);
            for k in 0..=n {
                assert_eq!(c.parse_value(&c.format_coord(k)).unwrap(), k, "N={n} k={k}");
            }
        }
    }

    #[test]
    fn elements_enumerates_all_intervals() {
        let n = 4;
        let c = unit(n);
        let all: Vec<_> = c.elements().collect();
        assert_eq!(all.len() as u32, (n + 1) * (n + 2) / 2);
        assert_eq!(LatticeConfig::signed().elements().count(), 3);
    }
}
