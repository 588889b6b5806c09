//! Symmetry of the binary cube: signed permutations of the k rules.
//!
//! The group of order 2^k k! acts on rule settings by flipping a subset
//! of rules and permuting them. The action lifts to the regression
//! terms as an integer linear automorphism and to the positive model
//! parameters as a monomial (Laurent) change of variables, which is how
//! whole inequality systems are carried from one support to another.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};

use crate::matrix::RationalMatrix;
use crate::model::{RegressionSpec, RuleSetting, SupportSet};
use crate::poly::rat_pow;
use crate::{exec, Error, Rat, Result};

/// Flip-then-permute action: rule i is flipped when `flips[i]` and its
/// value lands on position `perm[i]` of the image.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SignedPermutation {
    perm: Vec<usize>,
    flips: Vec<bool>,
}

impl SignedPermutation {
    pub fn new(perm: Vec<usize>, flips: Vec<bool>) -> Result<Self> {
        let k = perm.len();
        if flips.len() != k {
            return Err(Error::BadGroupElement(k));
        }
        let mut seen = vec![false; k];
        for &p in &perm {
            if p >= k || seen[p] {
                return Err(Error::BadGroupElement(k));
            }
            seen[p] = true;
        }
        Ok(SignedPermutation { perm, flips })
    }

    pub fn identity(k: usize) -> Self {
        SignedPermutation { perm: (0..k).collect(), flips: vec![false; k] }
    }

    pub fn k(&self) -> usize {
        self.perm.len()
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn flips(&self) -> &[bool] {
        &self.flips
    }

    /// `self` after `other`: (self*other)(x) = self(other(x)).
    pub fn compose(&self, other: &SignedPermutation) -> Result<SignedPermutation> {
        if self.k() != other.k() {
            return Err(Error::BadGroupElement(other.k()));
        }
        let k = self.k();
        let mut perm = vec![0; k];
        let mut flips = vec![false; k];
        for i in 0..k {
            perm[i] = self.perm[other.perm[i]];
            flips[i] = other.flips[i] ^ self.flips[other.perm[i]];
        }
        Ok(SignedPermutation { perm, flips })
    }

    pub fn inverse(&self) -> SignedPermutation {
        let k = self.k();
        let mut perm = vec![0; k];
        let mut flips = vec![false; k];
        for i in 0..k {
            perm[self.perm[i]] = i;
            flips[self.perm[i]] = self.flips[i];
        }
        SignedPermutation { perm, flips }
    }

    pub fn act_point(&self, x: RuleSetting) -> Result<RuleSetting> {
        if x.k() as usize != self.k() {
            return Err(Error::BadGroupElement(x.k() as usize));
        }
        let mut mask = 0u32;
        for i in 0..self.k() {
            if x.bit(i) ^ self.flips[i] {
                mask |= 1 << self.perm[i];
            }
        }
        RuleSetting::new(x.k(), mask)
    }

    pub fn act_support(&self, s: &SupportSet) -> Result<SupportSet> {
        let points = s
            .points()
            .iter()
            .map(|&x| self.act_point(x))
            .collect::<Result<Vec<_>>>()?;
        SupportSet::new(points)
    }
}

/// All 2^k k! signed permutations, flips in value order inside each
/// permutation, permutations lexicographic.
pub fn group_elements(k: usize) -> Result<Vec<SignedPermutation>> {
    if k == 0 || k > 7 {
        return Err(Error::OutOfScale(format!(
            "group on k={k} rules has 2^k k! elements; supported range is 1..=7"
        )));
    }
    let mut perms = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        perms.push(cur.clone());
        if !next_permutation(&mut cur) {
            break;
        }
    }
    let mut out = Vec::with_capacity(perms.len() << k);
    for perm in perms {
        for fm in 0u32..1 << k {
            let flips = (0..k).map(|i| fm >> i & 1 == 1).collect();
            out.push(SignedPermutation { perm: perm.clone(), flips });
        }
    }
    Ok(out)
}

pub(crate) fn next_permutation(v: &mut [usize]) -> bool {
    let n = v.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Minimum of the orbit of `s`, a canonical orbit label.
pub fn canonical_support(group: &[SignedPermutation], s: &SupportSet) -> Result<SupportSet> {
    let mut best: Option<SupportSet> = None;
    for g in group {
        let image = g.act_support(s)?;
        if best.as_ref().is_none_or(|b| image < *b) {
            best = Some(image);
        }
    }
    Ok(best.expect("group is nonempty"))
}

/// One orbit of the action on supports.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Orbit {
    pub representative: SupportSet,
    pub size: usize,
}

/// Split a collection of supports into orbits, sorted by canonical
/// representative. The input must be duplicate-free and closed under
/// the action (e.g. all supports, or all nondegenerate ones).
pub fn orbit_decompose(supports: &[SupportSet]) -> Result<Vec<Orbit>> {
    let Some(first) = supports.first() else {
        return Ok(Vec::new());
    };
    let k = first.k();
    if supports.iter().any(|s| s.k() != k) {
        return Err(Error::InvalidSupport("mixed k across supports".into()));
    }
    let group = group_elements(k as usize)?;
    let input: BTreeSet<&SupportSet> = supports.iter().collect();
    if input.len() != supports.len() {
        return Err(Error::InvalidSupport("duplicate support in input".into()));
    }

    let canon = exec::map_collect(supports, |s| {
        canonical_support(&group, s).expect("same k as group")
    });
    let mut classes: BTreeMap<SupportSet, usize> = BTreeMap::new();
    for c in canon {
        *classes.entry(c).or_insert(0) += 1;
    }

    let mut orbits = Vec::with_capacity(classes.len());
    for (rep, count) in classes {
        let mut members = BTreeSet::new();
        for g in &group {
            members.insert(g.act_support(&rep)?);
        }
        for m in &members {
            if !input.contains(m) {
                return Err(Error::NotClosed(m.to_string()));
            }
        }
        if members.len() != count {
            return Err(Error::NotClosed(format!(
                "orbit of {rep} has {} members, input holds {count}",
                members.len()
            )));
        }
        orbits.push(Orbit { representative: rep, size: count });
    }
    Ok(orbits)
}

/// Integer matrix A with f(g.x) = A f(x) for every setting x.
///
/// Row T of A expands the product of the preimage factors of subset T:
/// flipped rules contribute (1 - x_i), which inclusion-exclusion turns
/// into signed lower-order columns. Interaction order is preserved, so
/// the expansion stays inside the model's column set.
pub fn model_automorphism(
    g: &SignedPermutation,
    spec: &RegressionSpec,
) -> Result<RationalMatrix> {
    if g.k() != spec.k() as usize {
        return Err(Error::BadGroupElement(g.k()));
    }
    let p = spec.dimension();
    let subsets = spec.column_subsets();
    let col_of: BTreeMap<u32, usize> = subsets
        .iter()
        .enumerate()
        .map(|(t, &m)| (m, t))
        .collect();
    let inv = g.inverse();
    let mut a = RationalMatrix::zeros(p, p);
    for (t, &target) in subsets.iter().enumerate() {
        // preimage rules of the target subset, split by flip status
        let mut plain = 0u32;
        let mut flipped: Vec<usize> = Vec::new();
        for j in 0..g.k() {
            if target >> j & 1 == 1 {
                let i = inv.perm()[j];
                if g.flips()[i] {
                    flipped.push(i);
                } else {
                    plain |= 1 << i;
                }
            }
        }
        for u in 0u32..1 << flipped.len() {
            let mut s = plain;
            let mut sign = Rat::one();
            for (b, &i) in flipped.iter().enumerate() {
                if u >> b & 1 == 1 {
                    s |= 1 << i;
                    sign = -sign;
                }
            }
            let col = *col_of.get(&s).expect("order at most d");
            let cur = a.get(t, col).clone();
            a.set(t, col, cur + sign);
        }
    }
    Ok(a)
}

/// Monomial change of the non-intercept parameters induced by a group
/// element: the new parameter s is the Laurent monomial with exponent
/// row `exps[s]` over the old parameters. Row/column s corresponds to
/// model variable m(s+1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParameterMap {
    exps: Vec<Vec<i64>>,
}

impl ParameterMap {
    pub fn n(&self) -> usize {
        self.exps.len()
    }

    pub fn exps(&self) -> &[Vec<i64>] {
        &self.exps
    }

    /// Transport a positive rational point.
    pub fn map_point(&self, mu: &[Rat]) -> Result<Vec<Rat>> {
        if mu.len() != self.n() {
            return Err(Error::LengthMismatch { expected: self.n(), got: mu.len() });
        }
        if mu.iter().any(Rat::is_zero) {
            return Err(Error::BadWitness("parameter transport needs nonzero coordinates".into()));
        }
        Ok(self
            .exps
            .iter()
            .map(|row| {
                let mut v = Rat::one();
                for (i, &e) in row.iter().enumerate() {
                    match e.cmp(&0) {
                        std::cmp::Ordering::Greater => v *= rat_pow(&mu[i], e as u32),
                        std::cmp::Ordering::Less => v /= rat_pow(&mu[i], (-e) as u32),
                        std::cmp::Ordering::Equal => {}
                    }
                }
                v
            })
            .collect())
    }
}

/// Parameter change matching a group element: evaluating an intensity
/// at the transported parameters equals evaluating it at the original
/// parameters on the transported setting. The intercept never mixes in
/// because the automorphism fixes the constant column.
pub fn parameter_transport(
    g: &SignedPermutation,
    spec: &RegressionSpec,
) -> Result<ParameterMap> {
    let a = model_automorphism(g, spec)?;
    let p = spec.dimension();
    let mut exps = vec![vec![0i64; p - 1]; p - 1];
    for s in 1..p {
        for t in 1..p {
            let v = a.get(t, s);
            debug_assert!(v.denom().is_one());
            let Some(e) = num_traits::ToPrimitive::to_i64(v.numer()) else {
                return Err(Error::OutOfScale("transport exponent overflow".into()));
            };
            exps[s - 1][t - 1] = e;
        }
    }
    Ok(ParameterMap { exps })
}
