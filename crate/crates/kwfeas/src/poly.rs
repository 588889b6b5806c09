//! Sparse multivariate polynomials over exact rationals.
//!
//! Variables are the positive parameters `m1..mN` of a model; terms are
//! kept in a map ordered by graded lexicographic order so that textual
//! output and iteration order are canonical.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Pow, Signed, Zero};

use crate::interval::Interval;
use crate::{Error, Rat, Result};

/// Exponent vector of a single power product. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial {
    exps: Vec<u32>,
}

impl Monomial {
    /// The empty product (all exponents zero) in `nvars` variables.
    pub fn unit(nvars: usize) -> Self {
        Monomial { exps: vec![0; nvars] }
    }

    /// Single variable `mj` (0-based `j`).
    pub fn var(nvars: usize, j: usize) -> Self {
        Self::var_pow(nvars, j, 1)
    }

    pub fn var_pow(nvars: usize, j: usize, e: u32) -> Self {
        assert!(j < nvars, "variable index out of range");
        let mut exps = vec![0; nvars];
        exps[j] = e;
        Monomial { exps }
    }

    pub fn from_exps(exps: Vec<u32>) -> Self {
        Monomial { exps }
    }

    pub fn exps(&self) -> &[u32] {
        &self.exps
    }

    pub fn nvars(&self) -> usize {
        self.exps.len()
    }

    pub fn degree(&self) -> u32 {
        self.exps.iter().sum()
    }

    pub fn is_unit(&self) -> bool {
        self.exps.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Monomial) -> Result<Monomial> {
        if self.nvars() != other.nvars() {
            return Err(Error::VarMismatch(self.nvars(), other.nvars()));
        }
        let exps = self
            .exps
            .iter()
            .zip(&other.exps)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Monomial { exps })
    }

    fn fmt_factors(&self, out: &mut String) {
        let mut first = true;
        for (j, &e) in self.exps.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !first {
                out.push('*');
            }
            first = false;
            out.push('m');
            out.push_str(&(j + 1).to_string());
            if e > 1 {
                out.push('^');
                out.push_str(&e.to_string());
            }
        }
    }
}

/// Graded lexicographic: compare total degree first, then exponent
/// vectors left to right.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        debug_assert_eq!(self.nvars(), other.nvars());
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.exps.cmp(&other.exps))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_unit() {
            return write!(f, "1");
        }
        let mut s = String::new();
        self.fmt_factors(&mut s);
        write!(f, "{s}")
    }
}

/// Substitution target for a single variable.
#[derive(Debug, Clone, PartialEq)]
pub enum Assignment {
    /// Replace the variable by a constant. The variable slot is kept.
    Const(Rat),
    /// Identify the variable with another one. The assigned slot is
    /// removed and the remaining variables are renumbered.
    Var(usize),
}

/// Sparse polynomial with rational coefficients over a fixed ambient
/// variable count. Zero coefficients are never stored. The derived
/// order is arbitrary but stable, used to canonicalize constraint
/// lists.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Monomial, Rat>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Polynomial { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Rat) -> Self {
        let mut p = Self::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(Monomial::unit(nvars), c);
        }
        p
    }

    pub fn var(nvars: usize, j: usize) -> Self {
        let mut p = Self::zero(nvars);
        p.terms.insert(Monomial::var(nvars, j), Rat::one());
        p
    }

    pub fn from_terms<I>(nvars: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Monomial, Rat)>,
    {
        let mut p = Self::zero(nvars);
        for (m, c) in terms {
            if m.nvars() != nvars {
                return Err(Error::VarMismatch(m.nvars(), nvars));
            }
            p.add_term(m, c);
        }
        Ok(p)
    }

    fn add_term(&mut self, m: Monomial, c: Rat) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get() + &c;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_unit)
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    /// Terms in ascending graded lexicographic order.
    pub fn terms(
        &self,
    ) -> impl DoubleEndedIterator<Item = (&Monomial, &Rat)> + ExactSizeIterator {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> Option<&Rat> {
        self.terms.get(m)
    }

    /// Constant term, zero if absent.
    pub fn constant_term(&self) -> Rat {
        self.terms
            .get(&Monomial::unit(self.nvars))
            .cloned()
            .unwrap_or_else(Rat::zero)
    }

    fn check_vars(&self, other: &Polynomial) -> Result<()> {
        if self.nvars != other.nvars {
            return Err(Error::VarMismatch(self.nvars, other.nvars));
        }
        Ok(())
    }

    pub fn add(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check_vars(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Polynomial) -> Result<Polynomial> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Polynomial {
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| (m.clone(), -c.clone()))
            .collect();
        Polynomial { nvars: self.nvars, terms }
    }

    pub fn scale(&self, c: &Rat) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero(self.nvars);
        }
        let terms = self
            .terms
            .iter()
            .map(|(m, k)| (m.clone(), k * c))
            .collect();
        Polynomial { nvars: self.nvars, terms }
    }

    pub fn mul(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check_vars(other)?;
        let mut out = Polynomial::zero(self.nvars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb)?, ca * cb);
            }
        }
        Ok(out)
    }

    pub fn mul_monomial(&self, m: &Monomial, c: &Rat) -> Result<Polynomial> {
        if m.nvars() != self.nvars {
            return Err(Error::VarMismatch(m.nvars(), self.nvars));
        }
        let mut out = Polynomial::zero(self.nvars);
        for (mt, ct) in &self.terms {
            out.add_term(mt.mul(m)?, ct * c);
        }
        Ok(out)
    }

    /// Exact evaluation at a rational point.
    pub fn eval_exact(&self, point: &[Rat]) -> Result<Rat> {
        if point.len() != self.nvars {
            return Err(Error::LengthMismatch { expected: self.nvars, got: point.len() });
        }
        let mut acc = Rat::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (j, &e) in m.exps().iter().enumerate() {
                if e > 0 {
                    t *= rat_pow(&point[j], e);
                }
            }
            acc += t;
        }
        Ok(acc)
    }

    /// Interval evaluation over a box. The result encloses the exact
    /// range of the polynomial over the box; it is never tighter.
    pub fn eval_interval(&self, cube: &[Interval]) -> Result<Interval> {
        if cube.len() != self.nvars {
            return Err(Error::LengthMismatch { expected: self.nvars, got: cube.len() });
        }
        let mut acc = Interval::zero();
        for (m, c) in &self.terms {
            let mut t = Interval::from_rat(c);
            for (j, &e) in m.exps().iter().enumerate() {
                if e > 0 {
                    t = t.mul(cube[j].pow(e));
                }
            }
            acc = acc.add(t);
        }
        Ok(acc)
    }

    /// Relabel variables: old variable j becomes `perm[j]`.
    pub fn permute_vars(&self, perm: &[usize]) -> Result<Polynomial> {
        if perm.len() != self.nvars {
            return Err(Error::LengthMismatch { expected: self.nvars, got: perm.len() });
        }
        let mut seen = vec![false; self.nvars];
        for &p in perm {
            if p >= self.nvars || seen[p] {
                return Err(Error::Parse("not a permutation".into()));
            }
            seen[p] = true;
        }
        let mut out = Polynomial::zero(self.nvars);
        for (m, c) in &self.terms {
            let mut exps = vec![0u32; self.nvars];
            for (j, &e) in m.exps().iter().enumerate() {
                exps[perm[j]] = e;
            }
            out.add_term(Monomial::from_exps(exps), c.clone());
        }
        Ok(out)
    }

    /// Apply variable assignments. Constants are substituted in place;
    /// identifications merge a variable into its target and drop the
    /// slot, renumbering the survivors in order. Chains are followed;
    /// a cycle of identifications is an error.
    pub fn substitute(&self, assignments: &BTreeMap<usize, Assignment>) -> Result<Polynomial> {
        let targets = resolve_assignments(self.nvars, assignments)?;
        let relabel = relabeling(self.nvars, &targets);
        let new_nvars = relabel.iter().filter(|s| s.is_some()).count();

        let mut out = Polynomial::zero(new_nvars);
        for (m, c) in &self.terms {
            let mut coeff = c.clone();
            let mut exps = vec![0u32; new_nvars];
            for (j, &e) in m.exps().iter().enumerate() {
                if e == 0 {
                    continue;
                }
                match &targets[j] {
                    Some(Assignment::Const(v)) => {
                        if v.is_zero() {
                            coeff = Rat::zero();
                            break;
                        }
                        coeff *= rat_pow(v, e);
                    }
                    Some(Assignment::Var(w)) => {
                        let nj = relabel[*w].expect("identification target survives");
                        exps[nj] += e;
                    }
                    None => {
                        let nj = relabel[j].expect("unassigned variable survives");
                        exps[nj] += e;
                    }
                }
            }
            if !coeff.is_zero() {
                out.add_term(Monomial::from_exps(exps), coeff);
            }
        }
        Ok(out)
    }

    /// Divide by the gcd of the coefficient numerators times the lcm of
    /// the denominators: the result has coprime integer coefficients and
    /// the same sign pattern. Zero is returned unchanged.
    pub fn content_normalize(&self) -> Polynomial {
        if self.is_zero() {
            return self.clone();
        }
        let mut denom_lcm = BigInt::one();
        for c in self.terms.values() {
            denom_lcm = denom_lcm.lcm(c.denom());
        }
        let mut numer_gcd = BigInt::zero();
        for c in self.terms.values() {
            let scaled = c.numer() * (&denom_lcm / c.denom());
            numer_gcd = numer_gcd.gcd(&scaled);
        }
        let factor = Rat::new(denom_lcm, numer_gcd);
        self.scale(&factor.abs())
    }

    /// True when every stored coefficient is nonnegative.
    pub fn has_nonneg_coeffs(&self) -> bool {
        self.terms.values().all(|c| !c.is_negative())
    }

    /// Parse the canonical text form, e.g. `4*m1*m2 - 9*m2*m3 + m4 - 1`.
    /// Exponents use `^`, rational coefficients use `a/b`.
    pub fn parse(s: &str, nvars: usize) -> Result<Polynomial> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(Error::Parse("empty polynomial".into()));
        }
        let mut out = Polynomial::zero(nvars);
        let mut rest = compact.as_str();
        let mut sign = 1i32;
        if let Some(r) = rest.strip_prefix('-') {
            sign = -1;
            rest = r;
        } else if let Some(r) = rest.strip_prefix('+') {
            rest = r;
        }
        loop {
            let split = rest.find(['+', '-']);
            let (term, next) = match split {
                Some(i) => (&rest[..i], Some((&rest[i..i + 1], &rest[i + 1..]))),
                None => (rest, None),
            };
            let (m, c) = parse_term(term, nvars)?;
            let c = if sign < 0 { -c } else { c };
            out.add_term(m, c);
            match next {
                Some((op, r)) => {
                    if r.is_empty() {
                        return Err(Error::Parse("trailing operator".into()));
                    }
                    sign = if op == "-" { -1 } else { 1 };
                    rest = r;
                }
                None => break,
            }
        }
        Ok(out)
    }
}

fn parse_term(term: &str, nvars: usize) -> Result<(Monomial, Rat)> {
    if term.is_empty() {
        return Err(Error::Parse("empty term".into()));
    }
    let mut coeff = Rat::one();
    let mut exps = vec![0u32; nvars];
    let mut saw_number = false;
    for factor in term.split('*') {
        if factor.is_empty() {
            return Err(Error::Parse(format!("empty factor in '{term}'")));
        }
        if let Some(body) = factor.strip_prefix('m') {
            let (idx_s, exp) = match body.split_once('^') {
                Some((i, e)) => {
                    let e: u32 = e
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad exponent in '{factor}'")))?;
                    (i, e)
                }
                None => (body, 1),
            };
            let idx: usize = idx_s
                .parse()
                .map_err(|_| Error::Parse(format!("bad variable '{factor}'")))?;
            if idx == 0 || idx > nvars {
                return Err(Error::Parse(format!(
                    "variable m{idx} out of range 1..={nvars}"
                )));
            }
            exps[idx - 1] += exp;
        } else {
            let q: Rat = factor
                .parse()
                .map_err(|_| Error::Parse(format!("bad coefficient '{factor}'")))?;
            coeff *= q;
            saw_number = true;
        }
    }
    if !saw_number && exps.iter().all(|&e| e == 0) {
        return Err(Error::Parse(format!("unrecognized term '{term}'")));
    }
    Ok((Monomial::from_exps(exps), coeff))
}

/// Parse a rational from "a/b", integer, decimal, or scientific
/// notation ("5/2", "-3", "0.125", "1e-3", "2.5e2").
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty number".into()));
    }
    if let Some((n, d)) = s.split_once('/') {
        let numer: BigInt = n
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad numerator '{n}'")))?;
        let denom: BigInt = d
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad denominator '{d}'")))?;
        if denom.is_zero() {
            return Err(Error::Parse("zero denominator".into()));
        }
        return Ok(Rat::new(numer, denom));
    }
    let (mantissa, exp) = match s.split_once(['e', 'E']) {
        Some((m, e)) => {
            let exp: i32 = e
                .parse()
                .map_err(|_| Error::Parse(format!("bad exponent '{e}'")))?;
            (m, exp)
        }
        None => (s, 0),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    if frac_part.chars().any(|c| !c.is_ascii_digit()) {
        return Err(Error::Parse(format!("bad number '{s}'")));
    }
    let joined = format!("{int_part}{frac_part}");
    let digits: BigInt = joined
        .parse()
        .map_err(|_| Error::Parse(format!("bad number '{s}'")))?;
    let shift = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let scale = Pow::pow(&ten, shift.unsigned_abs());
    Ok(if shift >= 0 {
        Rat::new(digits * scale, BigInt::one())
    } else {
        Rat::new(digits, scale)
    })
}

/// Raise a rational to a nonnegative integer power.
pub fn rat_pow(r: &Rat, e: u32) -> Rat {
    match e {
        0 => Rat::one(),
        1 => r.clone(),
        // numerator and denominator are coprime, so are their powers
        _ => Rat::new_raw(Pow::pow(r.numer(), e), Pow::pow(r.denom(), e)),
    }
}

fn resolve_assignments(
    nvars: usize,
    assignments: &BTreeMap<usize, Assignment>,
) -> Result<Vec<Option<Assignment>>> {
    for (&j, a) in assignments {
        if j >= nvars {
            return Err(Error::InvalidRestriction(format!(
                "variable m{} out of range 1..={nvars}",
                j + 1
            )));
        }
        if let Assignment::Var(w) = a {
            if *w >= nvars {
                return Err(Error::InvalidRestriction(format!(
                    "variable m{} out of range 1..={nvars}",
                    w + 1
                )));
            }
        }
        if let Assignment::Const(v) = a {
            if !v.is_positive() {
                return Err(Error::InvalidRestriction(format!(
                    "m{} must be set to a positive value",
                    j + 1
                )));
            }
        }
    }
    let mut targets: Vec<Option<Assignment>> = vec![None; nvars];
    for j in 0..nvars {
        let Some(a) = assignments.get(&j) else { continue };
        match a {
            Assignment::Const(v) => targets[j] = Some(Assignment::Const(v.clone())),
            Assignment::Var(w) => {
                // follow identification chains, stop at constants
                let mut cur = *w;
                let mut seen = vec![j];
                loop {
                    if seen.contains(&cur) {
                        return Err(Error::CyclicSubstitution(j));
                    }
                    seen.push(cur);
                    match assignments.get(&cur) {
                        None => {
                            targets[j] = Some(Assignment::Var(cur));
                            break;
                        }
                        Some(Assignment::Const(v)) => {
                            targets[j] = Some(Assignment::Const(v.clone()));
                            break;
                        }
                        Some(Assignment::Var(next)) => cur = *next,
                    }
                }
            }
        }
    }
    Ok(targets)
}

fn relabeling(nvars: usize, targets: &[Option<Assignment>]) -> Vec<Option<usize>> {
    let mut relabel = vec![None; nvars];
    let mut next = 0usize;
    for j in 0..nvars {
        let dropped = matches!(targets[j], Some(Assignment::Var(_)));
        if !dropped {
            relabel[j] = Some(next);
            next += 1;
        }
    }
    relabel
}

/// Old-to-new variable indices induced by a set of assignments; `None`
/// marks a slot removed by identification. Constants keep their slot.
pub fn substitution_relabeling(
    nvars: usize,
    assignments: &BTreeMap<usize, Assignment>,
) -> Result<Vec<Option<usize>>> {
    let targets = resolve_assignments(nvars, assignments)?;
    Ok(relabeling(nvars, &targets))
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut s = String::new();
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            if i == 0 {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            let a = c.abs();
            if m.is_unit() {
                s.push_str(&a.to_string());
            } else {
                if !a.is_one() {
                    s.push_str(&a.to_string());
                    s.push('*');
                }
                m.fmt_factors(&mut s);
            }
        }
        write!(f, "{s}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::FromPrimitive;

    fn rat(n: i64, d: i64) -> Rat {
        Rat::new(BigInt::from(n), BigInt::from(d))
    }

    fn int(n: i64) -> Rat {
        Rat::from_i64(n).unwrap()
    }

    #[test]
    fn graded_lex_orders_by_degree_then_exponents() {
        let a = Monomial::from_exps(vec![1, 1, 0, 0]); // m1*m2
        let b = Monomial::from_exps(vec![0, 0, 1, 1]); // m3*m4
        let c = Monomial::from_exps(vec![1, 1, 1, 0]); // m1*m2*m3
        assert!(a > b, "within a degree the lexicographically larger vector wins");
        assert!(c > a && c > b, "higher degree always wins");
        let sq = Monomial::from_exps(vec![2, 0]);
        let mix = Monomial::from_exps(vec![1, 1]);
        assert!(sq > mix);
    }

    #[test]
    fn display_canonical_descending() {
        // frozen canonical form incl. coefficient-1 elision and sign layout
        let p = Polynomial::from_terms(
            4,
            vec![
                (Monomial::from_exps(vec![1, 1, 1, 1]), int(4)),
                (Monomial::from_exps(vec![0, 1, 1, 1]), int(-9)),
                (Monomial::from_exps(vec![1, 1, 0, 0]), int(1)),
                (Monomial::from_exps(vec![1, 0, 1, 0]), int(1)),
                (Monomial::from_exps(vec![0, 1, 1, 0]), int(4)),
                (Monomial::from_exps(vec![0, 0, 0, 1]), int(1)),
            ],
        )
        .unwrap();
        assert_eq!(
            p.to_string(),
            "4*m1*m2*m3*m4 - 9*m2*m3*m4 + m1*m2 + m1*m3 + 4*m2*m3 + m4"
        );
    }

    #[test]
    fn display_powers_rationals_and_constants() {
        let p = Polynomial::from_terms(
            3,
            vec![
                (Monomial::from_exps(vec![0, 0, 2]), rat(3, 2)),
                (Monomial::from_exps(vec![1, 0, 0]), int(-1)),
                (Monomial::unit(3), int(-1)),
            ],
        )
        .unwrap();
        assert_eq!(p.to_string(), "3/2*m3^2 - m1 - 1");
        assert_eq!(Polynomial::zero(2).to_string(), "0");
        assert_eq!(Polynomial::constant(2, int(-5)).to_string(), "-5");
    }

    #[test]
    fn parse_round_trips() {
        for s in [
            "4*m1*m2*m3*m4 - 9*m2*m3*m4 + m1*m2 + m1*m3 + 4*m2*m3 + m4",
            "3/2*m3^2 - m1 - 1",
            "m1*m2 + m1 + m2 - 1",
            "-m1 + 1",
            "0",
            "2/3",
        ] {
            let p = Polynomial::parse(s, 4).unwrap();
            assert_eq!(p.to_string(), s, "round trip of '{s}'");
        }
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(Polynomial::parse("m0 + 1", 2).is_err());
        assert!(Polynomial::parse("m3", 2).is_err());
        assert!(Polynomial::parse("1 +", 2).is_err());
        assert!(Polynomial::parse("", 2).is_err());
        assert!(Polynomial::parse("m1^x", 2).is_err());
    }

    #[test]
    fn parse_merges_repeated_monomials() {
        let p = Polynomial::parse("m1 + m1 + m2*m1", 2).unwrap();
        assert_eq!(p.to_string(), "m1*m2 + 2*m1");
    }

    #[test]
    fn add_cancels_to_zero() {
        let p = Polynomial::parse("m1*m2 - 1", 2).unwrap();
        let q = p.neg();
        assert!(p.add(&q).unwrap().is_zero());
    }

    #[test]
    fn mul_expands_product() {
        // (m1 + 1)(m1 - 1) = m1^2 - 1
        let a = Polynomial::parse("m1 + 1", 2).unwrap();
        let b = Polynomial::parse("m1 - 1", 2).unwrap();
        assert_eq!(a.mul(&b).unwrap().to_string(), "m1^2 - 1");
    }

    #[test]
    fn ops_reject_mismatched_variable_counts() {
        let a = Polynomial::zero(2);
        let b = Polynomial::zero(3);
        assert!(matches!(a.add(&b), Err(Error::VarMismatch(2, 3))));
        assert!(matches!(a.mul(&b), Err(Error::VarMismatch(2, 3))));
    }

    #[test]
    fn eval_exact_matches_hand_value() {
        // p = m1*m2 + m1 + m2 - 1 at (1/4, 1/4): 1/16 + 1/2 - 1 = -7/16
        let p = Polynomial::parse("m1*m2 + m1 + m2 - 1", 2).unwrap();
        let v = p.eval_exact(&[rat(1, 4), rat(1, 4)]).unwrap();
        assert_eq!(v, rat(-7, 16));
        assert!(p.eval_exact(&[int(1)]).is_err());
    }

    #[test]
    fn substitute_constant_keeps_slot() {
        let p = Polynomial::parse("m1*m2 + m3", 3).unwrap();
        let mut asg = BTreeMap::new();
        asg.insert(1usize, Assignment::Const(rat(1, 2)));
        let q = p.substitute(&asg).unwrap();
        assert_eq!(q.nvars(), 3);
        assert_eq!(q.to_string(), "1/2*m1 + m3");
    }

    #[test]
    fn substitute_identification_drops_slot_and_renumbers() {
        // m3 := m4 in 4 vars: m4 becomes the new m3
        let p = Polynomial::parse("m1*m3 + m3*m4 + m2", 4).unwrap();
        let mut asg = BTreeMap::new();
        asg.insert(2usize, Assignment::Var(3));
        let q = p.substitute(&asg).unwrap();
        assert_eq!(q.nvars(), 3);
        assert_eq!(q.to_string(), "m1*m3 + m3^2 + m2");
        let relabel = substitution_relabeling(4, &asg).unwrap();
        assert_eq!(relabel, vec![Some(0), Some(1), None, Some(2)]);
    }

    #[test]
    fn substitute_follows_chains_and_rejects_cycles() {
        let p = Polynomial::parse("m1 + m2 + m3", 3).unwrap();
        let mut chain = BTreeMap::new();
        chain.insert(0usize, Assignment::Var(1));
        chain.insert(1usize, Assignment::Var(2));
        let q = p.substitute(&chain).unwrap();
        assert_eq!(q.nvars(), 1);
        assert_eq!(q.to_string(), "3*m1");

        let mut cyc = BTreeMap::new();
        cyc.insert(0usize, Assignment::Var(1));
        cyc.insert(1usize, Assignment::Var(0));
        assert!(matches!(
            p.substitute(&cyc),
            Err(Error::CyclicSubstitution(_))
        ));
    }

    #[test]
    fn substitute_rejects_nonpositive_constants() {
        let p = Polynomial::parse("m1 + m2", 2).unwrap();
        let mut asg = BTreeMap::new();
        asg.insert(0usize, Assignment::Const(int(0)));
        assert!(p.substitute(&asg).is_err());
    }

    #[test]
    fn content_normalize_gives_coprime_integers_same_signs() {
        let p = Polynomial::parse("4/6*m1 - 2/3*m2 + 2*m1*m2", 2).unwrap();
        let q = p.content_normalize();
        assert_eq!(q.to_string(), "3*m1*m2 + m1 - m2");
        // idempotent and sign preserving
        assert_eq!(q.content_normalize(), q);
        assert!(Polynomial::zero(2).content_normalize().is_zero());
    }

    #[test]
    fn permute_vars_relabels() {
        let p = Polynomial::parse("m1^2*m3 + m2", 3).unwrap();
        // 0->2, 1->0, 2->1
        let q = p.permute_vars(&[2, 0, 1]).unwrap();
        assert_eq!(q.to_string(), "m2*m3^2 + m1");
        assert!(p.permute_vars(&[0, 0, 1]).is_err());
        assert!(p.permute_vars(&[0, 1]).is_err());
    }

    #[test]
    fn parse_rat_forms() {
        assert_eq!(parse_rat("5/2").unwrap(), rat(5, 2));
        assert_eq!(parse_rat("-3").unwrap(), int(-3));
        assert_eq!(parse_rat("0.125").unwrap(), rat(1, 8));
        assert_eq!(parse_rat("1e-3").unwrap(), rat(1, 1000));
        assert_eq!(parse_rat("2.5e2").unwrap(), int(250));
        assert_eq!(parse_rat("-0.5e-1").unwrap(), rat(-1, 20));
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("abc").is_err());
        assert!(parse_rat("1.2.3").is_err());
        assert!(parse_rat("").is_err());
    }

    #[test]
    fn rat_pow_basics() {
        assert_eq!(rat_pow(&rat(2, 3), 0), int(1));
        assert_eq!(rat_pow(&rat(2, 3), 3), rat(8, 27));
        assert_eq!(rat_pow(&rat(-1, 2), 2), rat(1, 4));
    }
}
