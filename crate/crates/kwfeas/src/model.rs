//! The Rasch Poisson counts model on k binary rules.
//!
//! A rule setting is a 0/1 vector of length k. The regression function
//! collects all interaction products up to order d; the intensity at a
//! setting is the product of the parameters of the active columns, so
//! intensities are monomials in the model parameters. A saturated design
//! support is a set of p settings, p the regression dimension, and it is
//! nondegenerate when its design matrix is invertible.

use std::fmt;

use num_traits::Zero;

use crate::matrix::RationalMatrix;
use crate::poly::Monomial;
use crate::{Error, Rat, Result};

/// One 0/1 configuration of the k rules, packed little-endian: bit i of
/// `mask` is rule i+1. Orders by (k, numeric value).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RuleSetting {
    k: u8,
    mask: u32,
}

impl RuleSetting {
    pub fn new(k: u8, mask: u32) -> Result<Self> {
        check_k(k)?;
        if mask >= (1u32 << k) {
            return Err(Error::InvalidSupport(format!(
                "setting value {mask} out of range for k={k}"
            )));
        }
        Ok(RuleSetting { k, mask })
    }

    pub fn from_bits(bits: &[bool]) -> Result<Self> {
        check_k(bits.len() as u8)?;
        let mut mask = 0u32;
        for (i, &b) in bits.iter().enumerate() {
            if b {
                mask |= 1 << i;
            }
        }
        Ok(RuleSetting { k: bits.len() as u8, mask })
    }

    /// Parse a bit string like "1100"; position i is rule i+1.
    pub fn parse(s: &str) -> Result<Self> {
        let bits: Vec<bool> = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::Parse(format!("bad rule setting '{s}'"))),
            })
            .collect::<Result<_>>()?;
        if bits.is_empty() {
            return Err(Error::Parse("empty rule setting".into()));
        }
        Self::from_bits(&bits)
    }

    pub fn k(&self) -> u8 {
        self.k
    }

    pub fn mask(&self) -> u32 {
        self.mask
    }

    pub fn bit(&self, i: usize) -> bool {
        debug_assert!(i < self.k as usize);
        self.mask >> i & 1 == 1
    }

    pub fn weight(&self) -> u32 {
        self.mask.count_ones()
    }

    /// All 2^k settings in ascending value order.
    pub fn all(k: u8) -> Result<impl Iterator<Item = RuleSetting>> {
        check_k(k)?;
        Ok((0..1u32 << k).map(move |mask| RuleSetting { k, mask }))
    }
}

fn check_k(k: u8) -> Result<()> {
    if k == 0 || k > 20 {
        return Err(Error::OutOfScale(format!(
            "k={k} outside supported range 1..=20"
        )));
    }
    Ok(())
}

impl fmt::Display for RuleSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.k as usize {
            write!(f, "{}", if self.bit(i) { '1' } else { '0' })?;
        }
        Ok(())
    }
}

/// Regression structure: all interaction subsets of {1..k} of size at
/// most d, ordered by size then lexicographically by element tuple.
/// Column 0 is always the intercept (empty subset).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegressionSpec {
    k: u8,
    d: u8,
    subsets: Vec<u32>,
}

impl RegressionSpec {
    pub fn new(k: u8, d: u8) -> Result<Self> {
        check_k(k)?;
        if d == 0 || d > k {
            return Err(Error::InvalidModel(format!(
                "interaction order d={d} outside 1..=k={k}"
            )));
        }
        let mut subsets = Vec::new();
        for size in 0..=d as usize {
            for combo in combinations(k as usize, size) {
                let mut mask = 0u32;
                for i in combo {
                    mask |= 1 << i;
                }
                subsets.push(mask);
            }
        }
        Ok(RegressionSpec { k, d, subsets })
    }

    pub fn k(&self) -> u8 {
        self.k
    }

    pub fn d(&self) -> u8 {
        self.d
    }

    /// Number of regression terms p.
    pub fn dimension(&self) -> usize {
        self.subsets.len()
    }

    /// Interaction subsets as bit masks, in column order.
    pub fn column_subsets(&self) -> &[u32] {
        &self.subsets
    }

    /// Human name of a column: "1" for the intercept, "x1x3" for {1,3}.
    pub fn column_label(&self, t: usize) -> String {
        let mask = self.subsets[t];
        if mask == 0 {
            return "1".into();
        }
        let mut s = String::new();
        for i in 0..self.k as usize {
            if mask >> i & 1 == 1 {
                s.push('x');
                s.push_str(&(i + 1).to_string());
            }
        }
        s
    }

    /// The 0/1 regression vector f(x): entry t is 1 iff subset t is
    /// fully switched on in x.
    pub fn regression_function(&self, x: RuleSetting) -> Result<Vec<u8>> {
        self.check_point(x)?;
        Ok(self
            .subsets
            .iter()
            .map(|&s| u8::from(x.mask() & s == s))
            .collect())
    }

    /// Intensity at x as a monomial in the p model parameters
    /// (intercept parameter included as variable 0).
    pub fn intensity_monomial(&self, x: RuleSetting) -> Result<Monomial> {
        let f = self.regression_function(x)?;
        Ok(Monomial::from_exps(f.iter().map(|&b| b as u32).collect()))
    }

    fn check_point(&self, x: RuleSetting) -> Result<()> {
        if x.k() != self.k {
            return Err(Error::Dimension(format!(
                "setting has k={}, model has k={}",
                x.k(),
                self.k
            )));
        }
        Ok(())
    }

    /// Rows f(x) for x in the support, in the support's sorted order.
    pub fn design_matrix(&self, support: &SupportSet) -> Result<RationalMatrix> {
        if support.len() != self.dimension() {
            return Err(Error::InvalidSupport(format!(
                "support has {} points, saturated design needs p={}",
                support.len(),
                self.dimension()
            )));
        }
        let rows = support
            .points()
            .iter()
            .map(|&x| {
                Ok(self
                    .regression_function(x)?
                    .into_iter()
                    .map(|v| Rat::from_integer(v.into()))
                    .collect())
            })
            .collect::<Result<Vec<_>>>()?;
        RationalMatrix::from_rows(rows)
    }

    pub fn is_nondegenerate(&self, support: &SupportSet) -> Result<bool> {
        Ok(!self.design_matrix(support)?.det()?.is_zero())
    }

    /// All p-subsets of the 2^k settings, optionally filtered to the
    /// nondegenerate ones. Lazy; ordered by the sorted point tuples.
    pub fn enumerate_supports(&self, nondegenerate_only: bool) -> SupportIter<'_> {
        SupportIter {
            spec: self,
            inner: combinations(1usize << self.k, self.dimension()),
            nondegenerate_only,
        }
    }

    /// The support of all settings of weight at most d. Its design
    /// matrix is triangular under the column order, hence invertible.
    pub fn corner_design(&self) -> SupportSet {
        let points = RuleSetting::all(self.k)
            .expect("k validated")
            .filter(|x| x.weight() <= self.d as u32)
            .collect();
        SupportSet::new(points).expect("corner settings are distinct")
    }
}

pub struct SupportIter<'a> {
    spec: &'a RegressionSpec,
    inner: Combinations,
    nondegenerate_only: bool,
}

impl Iterator for SupportIter<'_> {
    type Item = SupportSet;

    fn next(&mut self) -> Option<SupportSet> {
        loop {
            let combo = self.inner.next()?;
            let points = combo
                .into_iter()
                .map(|m| RuleSetting::new(self.spec.k, m as u32).expect("mask in range"))
                .collect();
            let support = SupportSet::new(points).expect("combination is distinct");
            if self.nondegenerate_only
                && !self.spec.is_nondegenerate(&support).expect("sizes agree")
            {
                continue;
            }
            return Some(support);
        }
    }
}

/// A set of distinct rule settings over a common k, kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SupportSet {
    points: Vec<RuleSetting>,
}

impl SupportSet {
    pub fn new(mut points: Vec<RuleSetting>) -> Result<Self> {
        let Some(first) = points.first() else {
            return Err(Error::InvalidSupport("empty support".into()));
        };
        let k = first.k();
        if points.iter().any(|p| p.k() != k) {
            return Err(Error::InvalidSupport("mixed k in support".into()));
        }
        points.sort();
        if points.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidSupport("repeated setting".into()));
        }
        Ok(SupportSet { points })
    }

    pub fn parse_points(strings: &[String]) -> Result<Self> {
        Self::new(
            strings
                .iter()
                .map(|s| RuleSetting::parse(s))
                .collect::<Result<_>>()?,
        )
    }

    pub fn k(&self) -> u8 {
        self.points[0].k()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// Always false: the constructor rejects empty supports.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn points(&self) -> &[RuleSetting] {
        &self.points
    }

    pub fn contains(&self, x: RuleSetting) -> bool {
        self.points.binary_search(&x).is_ok()
    }
}

impl fmt::Display for SupportSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, p) in self.points.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "}}")
    }
}

/// r-subsets of 0..n as ascending index vectors, lexicographic order.
pub(crate) fn combinations(n: usize, r: usize) -> Combinations {
    Combinations {
        n,
        r,
        idx: (0..r).collect(),
        fresh: true,
        done: r > n,
    }
}

pub(crate) struct Combinations {
    n: usize,
    r: usize,
    idx: Vec<usize>,
    fresh: bool,
    done: bool,
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        if self.fresh {
            self.fresh = false;
            return Some(self.idx.clone());
        }
        // advance the rightmost index that still has room
        let mut i = self.r;
        loop {
            if i == 0 {
                self.done = true;
                return None;
            }
            i -= 1;
            if self.idx[i] < self.n - self.r + i {
                self.idx[i] += 1;
                for j in i + 1..self.r {
                    self.idx[j] = self.idx[j - 1] + 1;
                }
                return Some(self.idx.clone());
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Signed;

    #[test]
    fn settings_parse_display_and_order() {
        let x = RuleSetting::parse("1100").unwrap();
        assert_eq!(x.mask(), 0b0011);
        assert_eq!(x.to_string(), "1100");
        assert!(x.bit(0) && x.bit(1) && !x.bit(2));
        assert_eq!(x.weight(), 2);

        // ascending value order puts 1000 before 0100
        let mut v = vec![
            RuleSetting::parse("0100").unwrap(),
            RuleSetting::parse("1000").unwrap(),
            RuleSetting::parse("0000").unwrap(),
        ];
        v.sort();
        let shown: Vec<String> = v.iter().map(|p| p.to_string()).collect();
        assert_eq!(shown, ["0000", "1000", "0100"]);

        assert!(RuleSetting::parse("10x0").is_err());
        assert!(RuleSetting::parse("").is_err());
        assert!(RuleSetting::new(3, 8).is_err());
    }

    #[test]
    fn spec_dimension_and_column_order() {
        let spec = RegressionSpec::new(4, 2).unwrap();
        assert_eq!(spec.dimension(), 1 + 4 + 6);
        // size first, then tuple-lex: {1,4} before {2,3}
        let labels: Vec<String> =
            (0..spec.dimension()).map(|t| spec.column_label(t)).collect();
        assert_eq!(
            labels,
            ["1", "x1", "x2", "x3", "x4", "x1x2", "x1x3", "x1x4", "x2x3", "x2x4", "x3x4"]
        );

        assert!(RegressionSpec::new(3, 0).is_err());
        assert!(RegressionSpec::new(3, 4).is_err());
        assert!(RegressionSpec::new(21, 1).is_err());
        assert!(RegressionSpec::new(0, 1).is_err());
    }

    #[test]
    fn regression_function_and_intensity() {
        let spec = RegressionSpec::new(2, 1).unwrap();
        let x = RuleSetting::parse("11").unwrap();
        assert_eq!(spec.regression_function(x).unwrap(), vec![1, 1, 1]);
        assert_eq!(spec.intensity_monomial(x).unwrap().exps(), &[1, 1, 1]);
        let o = RuleSetting::parse("00").unwrap();
        assert_eq!(spec.regression_function(o).unwrap(), vec![1, 0, 0]);

        let spec2 = RegressionSpec::new(3, 2).unwrap();
        let y = RuleSetting::parse("110").unwrap();
        // columns 1, x1, x2, x3, x1x2, x1x3, x2x3
        assert_eq!(spec2.regression_function(y).unwrap(), vec![1, 1, 1, 0, 1, 0, 0]);
    }

    #[test]
    fn design_matrix_and_corner() {
        let spec = RegressionSpec::new(2, 1).unwrap();
        let corner = spec.corner_design();
        assert_eq!(corner.to_string(), "{00, 10, 01}");
        let f = spec.design_matrix(&corner).unwrap();
        assert_eq!(f.det().unwrap(), Rat::from_integer(1.into()));
        assert!(spec.is_nondegenerate(&corner).unwrap());

        let spec4 = RegressionSpec::new(4, 1).unwrap();
        let c4 = spec4.corner_design();
        assert_eq!(c4.to_string(), "{0000, 1000, 0100, 0010, 0001}");
        assert_eq!(spec4.design_matrix(&c4).unwrap().det().unwrap().abs(), Rat::from_integer(1.into()));
    }

    #[test]
    fn full_design_is_nondegenerate() {
        // d = k: the support of all 2^k settings, design matrix is the
        // subset zeta matrix which is unimodular
        let spec = RegressionSpec::new(3, 3).unwrap();
        assert_eq!(spec.dimension(), 8);
        let all = SupportSet::new(RuleSetting::all(3).unwrap().collect()).unwrap();
        assert_eq!(
            spec.design_matrix(&all).unwrap().det().unwrap().abs(),
            Rat::from_integer(1.into())
        );
    }

    #[test]
    fn support_set_invariants() {
        let a = RuleSetting::parse("10").unwrap();
        let b = RuleSetting::parse("01").unwrap();
        assert!(SupportSet::new(vec![]).is_err());
        assert!(SupportSet::new(vec![a, a]).is_err());
        let s = SupportSet::new(vec![b, a]).unwrap();
        assert_eq!(s.to_string(), "{10, 01}");
        assert!(s.contains(a));
        let c = RuleSetting::parse("100").unwrap();
        assert!(SupportSet::new(vec![a, c]).is_err());
    }

    #[test]
    fn enumerate_counts_k2_and_k3() {
        let spec = RegressionSpec::new(2, 1).unwrap();
        assert_eq!(spec.enumerate_supports(false).count(), 4);
        assert_eq!(spec.enumerate_supports(true).count(), 4);

        let spec3 = RegressionSpec::new(3, 1).unwrap();
        assert_eq!(spec3.enumerate_supports(false).count(), 70);
        assert_eq!(spec3.enumerate_supports(true).count(), 58);
    }

    #[test]
    fn combinations_iterator_is_lexicographic_and_complete() {
        let all: Vec<Vec<usize>> = combinations(4, 2).collect();
        assert_eq!(
            all,
            vec![
                vec![0, 1],
                vec![0, 2],
                vec![0, 3],
                vec![1, 2],
                vec![1, 3],
                vec![2, 3]
            ]
        );
        assert_eq!(combinations(5, 0).count(), 1);
        assert_eq!(combinations(3, 4).count(), 0);
        assert_eq!(combinations(6, 3).count(), 20);
    }

    #[test]
    fn design_matrix_rejects_wrong_size() {
        let spec = RegressionSpec::new(2, 1).unwrap();
        let s = SupportSet::new(vec![RuleSetting::parse("10").unwrap()]).unwrap();
        assert!(spec.design_matrix(&s).is_err());
    }
}
