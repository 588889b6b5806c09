//! Optimality inequality systems for saturated designs.
//!
//! For a nondegenerate support X of size p, every non-support setting x
//! contributes one inequality: the design is optimal at mu exactly when
//! all of them hold. The raw condition is a rational function of mu;
//! multiplying by det(F)^2 and the least common monomial of the
//! denominators clears it to a polynomial with integer coefficients,
//! finally divided by their common content. The intercept parameter
//! cancels identically, so systems live in the p-1 non-intercept
//! variables m1..m(p-1).

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::model::{RegressionSpec, RuleSetting, SupportSet};
use crate::poly::{parse_rat, substitution_relabeling, Assignment, Monomial, Polynomial};
use crate::symmetry::ParameterMap;
use crate::{Error, Rat, Result};

/// A conjunction of polynomial constraints g(m) <= 0 over the open
/// positive orthant m > 0, tagged with the support that produced it.
/// Constraints are content-normalized and kept in a canonical order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InequalitySystem {
    k: u8,
    d: u8,
    support: SupportSet,
    restrictions: Vec<Restriction>,
    nvars: usize,
    constraints: Vec<Polynomial>,
}

impl InequalitySystem {
    /// Assemble a system from parts. `kw_system` is the usual source;
    /// this is for deserialization and hand-built test systems. The
    /// variable count must equal p-1 minus one per identification.
    pub fn new(
        k: u8,
        d: u8,
        support: SupportSet,
        restrictions: Vec<Restriction>,
        constraints: Vec<Polynomial>,
    ) -> Result<Self> {
        let spec = RegressionSpec::new(k, d)?;
        if support.k() != k {
            return Err(Error::InvalidSupport(format!(
                "support is over k={}, system claims k={k}",
                support.k()
            )));
        }
        if support.len() != spec.dimension() {
            return Err(Error::InvalidSupport(format!(
                "support has {} points, saturated design needs p={}",
                support.len(),
                spec.dimension()
            )));
        }
        let drops = restrictions
            .iter()
            .filter(|r| matches!(r, Restriction::Identify { .. }))
            .count();
        let nvars = (spec.dimension() - 1)
            .checked_sub(drops)
            .ok_or_else(|| Error::InvalidRestriction("more identifications than variables".into()))?;
        for c in &constraints {
            if c.nvars() != nvars {
                return Err(Error::VarMismatch(c.nvars(), nvars));
            }
        }
        let mut constraints = constraints;
        constraints.sort();
        Ok(InequalitySystem { k, d, support, restrictions, nvars, constraints })
    }

    pub fn k(&self) -> u8 {
        self.k
    }

    pub fn d(&self) -> u8 {
        self.d
    }

    pub fn support(&self) -> &SupportSet {
        &self.support
    }

    pub fn restrictions(&self) -> &[Restriction] {
        &self.restrictions
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn constraints(&self) -> &[Polynomial] {
        &self.constraints
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }
}

impl fmt::Display for InequalitySystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.constraints {
            writeln!(f, "{c} <= 0")?;
        }
        for j in 0..self.nvars {
            writeln!(f, "m{} > 0", j + 1)?;
        }
        Ok(())
    }
}

/// An equality imposed on system variables before deciding
/// feasibility: identify two variables or pin one to a positive value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Restriction {
    /// `left` and `right` are 1-based; the left slot is removed.
    Identify { left: usize, right: usize },
    Fix { var: usize, value: Rat },
}

impl Restriction {
    /// Parse "m3=m4" or "m2=5/2" (value also accepts decimals).
    pub fn parse(s: &str) -> Result<Restriction> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let Some((lhs, rhs)) = compact.split_once('=') else {
            return Err(Error::InvalidRestriction(format!("'{s}' is not of the form mJ=mK or mJ=value")));
        };
        let left = parse_var(lhs)?;
        if rhs.starts_with('m') {
            let right = parse_var(rhs)?;
            if left == right {
                return Err(Error::InvalidRestriction(format!("'{s}' identifies a variable with itself")));
            }
            Ok(Restriction::Identify { left, right })
        } else {
            let value = parse_rat(rhs)?;
            if !value.is_positive() {
                return Err(Error::InvalidRestriction(format!("'{s}' pins a variable to a non-positive value")));
            }
            Ok(Restriction::Fix { var: left, value })
        }
    }
}

fn parse_var(s: &str) -> Result<usize> {
    let body = s
        .strip_prefix('m')
        .ok_or_else(|| Error::InvalidRestriction(format!("'{s}' is not a variable")))?;
    let idx: usize = body
        .parse()
        .map_err(|_| Error::InvalidRestriction(format!("'{s}' is not a variable")))?;
    if idx == 0 {
        return Err(Error::InvalidRestriction("variables are numbered from m1".into()));
    }
    Ok(idx)
}

impl fmt::Display for Restriction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Restriction::Identify { left, right } => write!(f, "m{left}=m{right}"),
            Restriction::Fix { var, value } => write!(f, "m{var}={value}"),
        }
    }
}

/// The cleared optimality constraint of support X at non-support
/// setting x.
pub fn kw_polynomial(
    spec: &RegressionSpec,
    support: &SupportSet,
    x: RuleSetting,
) -> Result<Polynomial> {
    if support.contains(x) {
        return Err(Error::InvalidSupport(format!(
            "{x} lies in the support; support settings satisfy the condition identically"
        )));
    }
    let p = spec.dimension();
    let f = spec.design_matrix(support)?;
    let det = f.det()?;
    if det.is_zero() {
        return Err(Error::InvalidSupport("degenerate support".into()));
    }
    let finv = f.inverse()?;
    let fx: Vec<Rat> = spec
        .regression_function(x)?
        .into_iter()
        .map(|v| Rat::from_integer(v.into()))
        .collect();
    // c = F^{-T} f(x)
    let c: Vec<Rat> = (0..p)
        .map(|i| (0..p).map(|j| finv.get(j, i) * &fx[j]).sum())
        .collect();

    // exponent offsets of intensity ratios, intercept dropped
    let fx_tail: Vec<i64> = spec.regression_function(x)?[1..]
        .iter()
        .map(|&v| v as i64)
        .collect();
    let mut terms: BTreeMap<Vec<i64>, Rat> = BTreeMap::new();
    for (i, &xi) in support.points().iter().enumerate() {
        if c[i].is_zero() {
            continue;
        }
        let fxi = spec.regression_function(xi)?;
        let delta: Vec<i64> = fx_tail
            .iter()
            .zip(&fxi[1..])
            .map(|(&a, &b)| a - b as i64)
            .collect();
        let sq = &c[i] * &c[i];
        *terms.entry(delta).or_insert_with(Rat::zero) += sq;
    }
    let zero = vec![0i64; p - 1];
    *terms.entry(zero).or_insert_with(Rat::zero) -= Rat::one();

    // clear denominators: times det^2 and the least common monomial
    let det_sq = &det * &det;
    let shift: Vec<i64> = (0..p - 1)
        .map(|j| terms.keys().map(|e| -e[j]).max().unwrap_or(0).max(0))
        .collect();
    let cleared = terms.into_iter().filter_map(|(e, v)| {
        let coeff = v * &det_sq;
        if coeff.is_zero() {
            return None;
        }
        let exps: Vec<u32> = e
            .iter()
            .zip(&shift)
            .map(|(&ej, &sj)| (ej + sj) as u32)
            .collect();
        Some((Monomial::from_exps(exps), coeff))
    });
    Ok(Polynomial::from_terms(p - 1, cleared)?.content_normalize())
}

/// All constraints of a support: one per non-support setting, in
/// canonical order.
pub fn kw_system(spec: &RegressionSpec, support: &SupportSet) -> Result<InequalitySystem> {
    let mut constraints = Vec::with_capacity((1usize << spec.k()) - spec.dimension());
    for x in RuleSetting::all(spec.k())? {
        if support.contains(x) {
            continue;
        }
        constraints.push(kw_polynomial(spec, support, x)?);
    }
    InequalitySystem::new(spec.k(), spec.d(), support.clone(), Vec::new(), constraints)
}

/// Impose restrictions, substituting in one batch so chained
/// identifications are legal and cycles are rejected. Restriction
/// variable names refer to the input system's variables.
pub fn restrict(
    system: &InequalitySystem,
    restrictions: &[Restriction],
) -> Result<InequalitySystem> {
    if restrictions.is_empty() {
        return Ok(system.clone());
    }
    let mut assignments: BTreeMap<usize, Assignment> = BTreeMap::new();
    for r in restrictions {
        let (var, asg) = match r {
            Restriction::Identify { left, right } => {
                check_var(*left, system.nvars)?;
                check_var(*right, system.nvars)?;
                (*left - 1, Assignment::Var(*right - 1))
            }
            Restriction::Fix { var, value } => {
                check_var(*var, system.nvars)?;
                (*var - 1, Assignment::Const(value.clone()))
            }
        };
        if assignments.insert(var, asg).is_some() {
            return Err(Error::InvalidRestriction(format!(
                "m{} restricted more than once",
                var + 1
            )));
        }
    }
    let constraints = system
        .constraints
        .iter()
        .map(|c| Ok(c.substitute(&assignments)?.content_normalize()))
        .collect::<Result<Vec<_>>>()?;
    let mut all = system.restrictions.clone();
    all.extend(restrictions.iter().cloned());
    InequalitySystem::new(system.k, system.d, system.support.clone(), all, constraints)
}

fn check_var(v: usize, nvars: usize) -> Result<()> {
    if v == 0 || v > nvars {
        return Err(Error::InvalidRestriction(format!(
            "m{v} out of range 1..={nvars}"
        )));
    }
    Ok(())
}

/// Lift a point of the restricted system back to the input system of
/// `restrict`: identified slots take their target's value, pinned slots
/// take the pinned value.
pub fn lift_point(
    point: &[Rat],
    nvars_before: usize,
    restrictions: &[Restriction],
) -> Result<Vec<Rat>> {
    let mut assignments: BTreeMap<usize, Assignment> = BTreeMap::new();
    for r in restrictions {
        match r {
            Restriction::Identify { left, right } => {
                assignments.insert(*left - 1, Assignment::Var(*right - 1));
            }
            Restriction::Fix { var, value } => {
                assignments.insert(*var - 1, Assignment::Const(value.clone()));
            }
        }
    }
    let relabel = substitution_relabeling(nvars_before, &assignments)?;
    let fixed: BTreeMap<usize, Rat> = assignments
        .iter()
        .filter_map(|(&j, a)| match a {
            Assignment::Const(v) => Some((j, v.clone())),
            Assignment::Var(_) => None,
        })
        .collect();
    let expected = relabel.iter().filter(|s| s.is_some()).count();
    if point.len() != expected {
        return Err(Error::LengthMismatch { expected, got: point.len() });
    }
    // first pass: surviving slots read off the reduced point
    let mut out = vec![Rat::zero(); nvars_before];
    for (j, slot) in relabel.iter().enumerate() {
        if let Some(nj) = slot {
            out[j] = point[*nj].clone();
        }
    }
    if let Some(v) = fixed.keys().find(|&&j| relabel[j].is_none()) {
        return Err(Error::InvalidRestriction(format!("m{} both pinned and identified", v + 1)));
    }
    for (j, v) in &fixed {
        out[*j] = v.clone();
    }
    // second pass: identified slots copy their (resolved) target
    for (j, slot) in relabel.iter().enumerate() {
        if slot.is_none() {
            let mut asg = assignments.get(&j);
            loop {
                match asg {
                    Some(Assignment::Var(w)) => {
                        if let Some(nw) = relabel[*w] {
                            out[j] = point[nw].clone();
                            break;
                        }
                        asg = assignments.get(w);
                    }
                    Some(Assignment::Const(v)) => {
                        out[j] = v.clone();
                        break;
                    }
                    None => unreachable!("dropped slot has an assignment"),
                }
            }
        }
    }
    Ok(out)
}

/// Carry a system to transported parameters: each variable is replaced
/// by the Laurent monomial of the map, denominators are cleared, and
/// the result is content-normalized. With the map of a group element g
/// this sends the system of X to the system of g.X; the support tag is
/// left untouched and remains that of X.
pub fn transport_system(
    system: &InequalitySystem,
    map: &ParameterMap,
) -> Result<InequalitySystem> {
    if map.n() != system.nvars {
        return Err(Error::VarMismatch(map.n(), system.nvars));
    }
    let n = system.nvars;
    let constraints = system
        .constraints
        .iter()
        .map(|c| {
            let mut acc: BTreeMap<Vec<i64>, Rat> = BTreeMap::new();
            for (m, coeff) in c.terms() {
                let mut e = vec![0i64; n];
                for (s, &es) in m.exps().iter().enumerate() {
                    if es > 0 {
                        for (t, slot) in e.iter_mut().enumerate() {
                            *slot += es as i64 * map.exps()[s][t];
                        }
                    }
                }
                let entry = acc.entry(e).or_insert_with(Rat::zero);
                *entry += coeff;
            }
            acc.retain(|_, v| !v.is_zero());
            let shift: Vec<i64> = (0..n)
                .map(|t| acc.keys().map(|e| -e[t]).max().unwrap_or(0).max(0))
                .collect();
            let poly = Polynomial::from_terms(
                n,
                acc.into_iter().map(|(e, v)| {
                    let exps: Vec<u32> = e
                        .iter()
                        .zip(&shift)
                        .map(|(&et, &st)| (et + st) as u32)
                        .collect();
                    (Monomial::from_exps(exps), v)
                }),
            )?;
            Ok(poly.content_normalize())
        })
        .collect::<Result<Vec<_>>>()?;
    InequalitySystem::new(
        system.k,
        system.d,
        system.support.clone(),
        system.restrictions.clone(),
        constraints,
    )
}

/// A variable relabeling sending `a`'s constraint multiset onto `b`'s,
/// if one exists (old variable j of `a` becomes `perm[j]`). Systems of
/// different shape never match.
pub fn match_up_to_variable_permutation(
    a: &InequalitySystem,
    b: &InequalitySystem,
) -> Option<Vec<usize>> {
    if a.nvars != b.nvars || a.constraints.len() != b.constraints.len() {
        return None;
    }
    let mut perm: Vec<usize> = (0..a.nvars).collect();
    loop {
        let mut mapped: Vec<Polynomial> = a
            .constraints
            .iter()
            .map(|c| c.permute_vars(&perm).expect("valid permutation"))
            .collect();
        mapped.sort();
        if mapped == b.constraints {
            return Some(perm);
        }
        if !crate::symmetry::next_permutation(&mut perm) {
            return None;
        }
    }
}

// serde: the on-disk shape is
// {"k","d","support":[..],"restrictions":[..],
//  "constraints":[[["-9",[0,1,1,1]],..],..]}
// with terms in display (descending) order and exact coefficients.

#[derive(Serialize, Deserialize)]
struct SystemRepr {
    k: u8,
    d: u8,
    support: Vec<String>,
    restrictions: Vec<String>,
    constraints: Vec<Vec<(String, Vec<u32>)>>,
}

impl Serialize for InequalitySystem {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let repr = SystemRepr {
            k: self.k,
            d: self.d,
            support: self.support.points().iter().map(|p| p.to_string()).collect(),
            restrictions: self.restrictions.iter().map(|r| r.to_string()).collect(),
            constraints: self
                .constraints
                .iter()
                .map(|c| {
                    c.terms()
                        .rev()
                        .map(|(m, v)| (v.to_string(), m.exps().to_vec()))
                        .collect()
                })
                .collect(),
        };
        repr.serialize(s)
    }
}

impl<'de> Deserialize<'de> for InequalitySystem {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = SystemRepr::deserialize(d)?;
        let support = SupportSet::parse_points(&repr.support).map_err(D::Error::custom)?;
        let restrictions = repr
            .restrictions
            .iter()
            .map(|s| Restriction::parse(s))
            .collect::<Result<Vec<_>>>()
            .map_err(D::Error::custom)?;
        let spec = RegressionSpec::new(repr.k, repr.d).map_err(D::Error::custom)?;
        let drops = restrictions
            .iter()
            .filter(|r| matches!(r, Restriction::Identify { .. }))
            .count();
        let nvars = (spec.dimension() - 1)
            .checked_sub(drops)
            .ok_or_else(|| D::Error::custom("more identifications than variables"))?;
        let constraints = repr
            .constraints
            .iter()
            .map(|terms| {
                let parsed = terms
                    .iter()
                    .map(|(coeff, exps)| {
                        if exps.len() != nvars {
                            return Err(Error::LengthMismatch {
                                expected: nvars,
                                got: exps.len(),
                            });
                        }
                        Ok((Monomial::from_exps(exps.clone()), parse_rat(coeff)?))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Polynomial::from_terms(nvars, parsed)
            })
            .collect::<Result<Vec<_>>>()
            .map_err(D::Error::custom)?;
        InequalitySystem::new(repr.k, repr.d, support, restrictions, constraints)
            .map_err(D::Error::custom)
    }
}
