//! Infeasibility certificates over the open positive orthant.
//!
//! A certificate for the system {g_i <= 0} is an exact polynomial
//! identity
//!
//!   sum_I  h_I * prod_{i in I} (-g_i)  =  -t
//!
//! where I ranges over multisets of constraint indices (the empty
//! multiset allowed), every multiplier h_I has nonnegative
//! coefficients, and the target t has nonnegative coefficients and is
//! not the zero polynomial. At any feasible point with all
//! coordinates positive the left side would be nonnegative while -t
//! is strictly negative, so no such point exists anywhere in the open
//! orthant.
//!
//! Candidates come from a floating-point feasibility LP over a finite
//! monomial basis; the support of the LP solution is re-solved in
//! exact rational arithmetic and the identity is re-checked from
//! scratch before a certificate is ever reported.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::de::Error as DeError;
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::simplex::{residual_accept, solve_feasibility, FeasibilityLp};
use super::SearchConfig;
use crate::interval::rat_to_f64_nearest;
use crate::kw::InequalitySystem;
use crate::poly::{parse_rat, Monomial, Polynomial};
use crate::Rat;

/// One multiplier: a multiset of constraint indices (0-based, sorted)
/// together with the polynomial h_I that multiplies prod(-g_i).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertificateEntry {
    pub multiset: Vec<usize>,
    pub multiplier: Polynomial,
}

/// Verified-or-verifiable infeasibility certificate. `nvars` is the
/// ambient variable count shared by multipliers and target.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrthantCertificate {
    pub nvars: usize,
    pub entries: Vec<CertificateEntry>,
    pub target: Polynomial,
}

impl OrthantCertificate {
    /// Certificate for a single constraint whose coefficients are all
    /// nonnegative (and not all zero): 1 * (-g_i) = -g_i with target
    /// g_i itself.
    pub(crate) fn trivial(system: &InequalitySystem, index: usize) -> Self {
        let g = &system.constraints()[index];
        OrthantCertificate {
            nvars: system.nvars(),
            entries: vec![CertificateEntry {
                multiset: vec![index],
                multiplier: Polynomial::constant(system.nvars(), Rat::one()),
            }],
            target: g.clone(),
        }
    }
}

impl fmt::Display for OrthantCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.entries {
            let set: Vec<String> = e.multiset.iter().map(|i| (i + 1).to_string()).collect();
            writeln!(f, "multiplier for {{{}}}: {}", set.join(","), e.multiplier)?;
        }
        write!(f, "target: {}", self.target)
    }
}

/// Exact check of the certificate against the system. True only when
/// the multiset indices are in range, every multiplier and the target
/// have nonnegative coefficients, the target is nonzero, and the
/// polynomial identity holds exactly.
pub fn verify_certificate(system: &InequalitySystem, cert: &OrthantCertificate) -> bool {
    let n = system.nvars();
    if cert.nvars != n || cert.target.nvars() != n {
        return false;
    }
    if cert.target.is_zero() || !cert.target.has_nonneg_coeffs() {
        return false;
    }
    let mut total = cert.target.clone();
    for entry in &cert.entries {
        if entry.multiplier.nvars() != n || !entry.multiplier.has_nonneg_coeffs() {
            return false;
        }
        let mut prod = Polynomial::constant(n, Rat::one());
        for &i in &entry.multiset {
            let Some(g) = system.constraints().get(i) else {
                return false;
            };
            let Ok(next) = prod.mul(&g.neg()) else {
                return false;
            };
            prod = next;
        }
        let Ok(contribution) = entry.multiplier.mul(&prod) else {
            return false;
        };
        let Ok(sum) = total.add(&contribution) else {
            return false;
        };
        total = sum;
    }
    total.is_zero()
}

/// All exponent vectors over `nvars` variables with total degree at
/// most `deg`, in graded lexicographic order.
fn monomials_up_to(nvars: usize, deg: u32) -> Vec<Monomial> {
    fn rec(nvars: usize, pos: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if pos == nvars {
            out.push(cur.clone());
            return;
        }
        for e in 0..=left {
            cur.push(e);
            rec(nvars, pos + 1, left - e, cur, out);
            cur.pop();
        }
    }
    let mut raw = Vec::new();
    rec(nvars, 0, deg, &mut Vec::new(), &mut raw);
    let mut mons: Vec<Monomial> = raw.into_iter().map(Monomial::from_exps).collect();
    mons.sort();
    mons
}

/// Multisets of {0..ncons-1} of sizes 0..=max_size, each sorted
/// ascending, ordered by (size, lex).
fn multisets_up_to(ncons: usize, max_size: u32) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    if ncons == 0 {
        return out;
    }
    for size in 1..=max_size as usize {
        // nondecreasing index tuples via odometer
        let mut cur = vec![0usize; size];
        'tuples: loop {
            out.push(cur.clone());
            for pos in (0..size).rev() {
                if cur[pos] + 1 < ncons {
                    let v = cur[pos] + 1;
                    for slot in cur.iter_mut().skip(pos) {
                        *slot = v;
                    }
                    continue 'tuples;
                }
            }
            break;
        }
    }
    out
}

enum ColumnKind {
    /// (multiset index, shift monomial)
    Multiplier(usize, Monomial),
    /// target monomial
    Target(Monomial),
}

struct ExactLp {
    /// per column: (row, exact coefficient) pairs
    columns: Vec<Vec<(usize, Rat)>>,
    kinds: Vec<ColumnKind>,
    nrows: usize,
    /// index of the normalization row (sum of target columns = 1)
    norm_row: usize,
}

/// Assemble the exact linear system for multipliers of degree <= d and
/// multisets of size <= r: one balance row per monomial appearing in
/// any shifted product (rhs 0) plus a normalization row forcing the
/// target coefficients to sum to 1.
fn build_exact_lp(system: &InequalitySystem, d: u32, r: u32) -> ExactLp {
    let n = system.nvars();
    let mons = monomials_up_to(n, d);
    let sets = multisets_up_to(system.len(), r);

    let products: Vec<Polynomial> = sets
        .iter()
        .map(|set| {
            let mut prod = Polynomial::constant(n, Rat::one());
            for &i in set {
                prod = prod.mul(&system.constraints()[i].neg()).expect("uniform arity");
            }
            prod
        })
        .collect();

    // symbolic columns first, then a deterministic row numbering
    let mut sym_cols: Vec<Vec<(Monomial, Rat)>> = Vec::new();
    let mut kinds: Vec<ColumnKind> = Vec::new();
    for (si, prod) in products.iter().enumerate() {
        for alpha in &mons {
            let mut col: BTreeMap<Monomial, Rat> = BTreeMap::new();
            for (m, c) in prod.terms() {
                let key = m.mul(alpha).expect("uniform arity");
                let slot = col.entry(key).or_insert_with(Rat::zero);
                *slot += c;
            }
            col.retain(|_, c| !c.is_zero());
            if col.is_empty() {
                continue;
            }
            sym_cols.push(col.into_iter().collect());
            kinds.push(ColumnKind::Multiplier(si, alpha.clone()));
        }
    }
    for gamma in &mons {
        sym_cols.push(vec![(gamma.clone(), Rat::one())]);
        kinds.push(ColumnKind::Target(gamma.clone()));
    }

    let mut row_of: BTreeMap<Monomial, usize> = BTreeMap::new();
    for col in &sym_cols {
        for (m, _) in col {
            let next = row_of.len();
            row_of.entry(m.clone()).or_insert(next);
        }
    }
    // renumber rows in monomial order for reproducible tableaus
    let mut ordered: Vec<&Monomial> = row_of.keys().collect();
    ordered.sort();
    let row_of: BTreeMap<Monomial, usize> = ordered
        .into_iter()
        .enumerate()
        .map(|(i, m)| (m.clone(), i))
        .collect();

    let norm_row = row_of.len();
    let mut columns: Vec<Vec<(usize, Rat)>> = Vec::with_capacity(sym_cols.len());
    for (ci, col) in sym_cols.into_iter().enumerate() {
        let mut out: Vec<(usize, Rat)> = col
            .into_iter()
            .map(|(m, c)| (row_of[&m], c))
            .collect();
        if matches!(kinds[ci], ColumnKind::Target(_)) {
            out.push((norm_row, Rat::one()));
        }
        out.sort_by_key(|(i, _)| *i);
        columns.push(out);
    }
    ExactLp { columns, kinds, nrows: norm_row + 1, norm_row }
}

/// Solve the restriction of the exact system to the given support
/// columns by Gauss-Jordan elimination. Returns per-support-column
/// values when a nonnegative exact solution exists.
fn exact_resolve(lp: &ExactLp, support: &[usize]) -> Option<Vec<Rat>> {
    if support.is_empty() {
        return None;
    }
    let mut touched: Vec<usize> = support
        .iter()
        .flat_map(|&c| lp.columns[c].iter().map(|(i, _)| *i))
        .collect();
    touched.push(lp.norm_row);
    touched.sort_unstable();
    touched.dedup();
    let row_pos: BTreeMap<usize, usize> = touched.iter().enumerate().map(|(p, &i)| (i, p)).collect();

    let m = touched.len();
    let n = support.len();
    let mut a = vec![vec![Rat::zero(); n + 1]; m];
    for (j, &c) in support.iter().enumerate() {
        for (i, v) in &lp.columns[c] {
            a[row_pos[i]][j] = v.clone();
        }
    }
    a[row_pos[&lp.norm_row]][n] = Rat::one();

    let mut pivot_col_of_row: Vec<Option<usize>> = vec![None; m];
    let mut row = 0usize;
    for col in 0..n {
        let Some(p) = (row..m).find(|&i| !a[i][col].is_zero()) else {
            continue;
        };
        a.swap(row, p);
        let inv = a[row][col].clone();
        for v in a[row].iter_mut() {
            *v /= inv.clone();
        }
        for i in 0..m {
            if i != row && !a[i][col].is_zero() {
                let f = a[i][col].clone();
                for jj in 0..=n {
                    let delta = &f * &a[row][jj];
                    a[i][jj] -= delta;
                }
            }
        }
        pivot_col_of_row[row] = Some(col);
        row += 1;
        if row == m {
            break;
        }
    }
    // inconsistent row: all-zero coefficients with nonzero rhs
    for i in row..m {
        if !a[i][n].is_zero() {
            return None;
        }
    }
    let mut x = vec![Rat::zero(); n];
    for (i, pc) in pivot_col_of_row.iter().enumerate() {
        if let Some(c) = pc {
            x[*c] = a[i][n].clone();
        }
    }
    if x.iter().any(|v| v.is_negative()) {
        return None;
    }
    Some(x)
}

fn assemble(
    lp: &ExactLp,
    support: &[usize],
    values: &[Rat],
    system: &InequalitySystem,
    sets: &[Vec<usize>],
) -> Option<OrthantCertificate> {
    let n = system.nvars();
    let mut h_terms: BTreeMap<usize, Vec<(Monomial, Rat)>> = BTreeMap::new();
    let mut t_terms: Vec<(Monomial, Rat)> = Vec::new();
    for (&c, v) in support.iter().zip(values) {
        if v.is_zero() {
            continue;
        }
        match &lp.kinds[c] {
            ColumnKind::Multiplier(si, alpha) => {
                h_terms.entry(*si).or_default().push((alpha.clone(), v.clone()));
            }
            ColumnKind::Target(gamma) => t_terms.push((gamma.clone(), v.clone())),
        }
    }
    let target = Polynomial::from_terms(n, t_terms).ok()?;
    if target.is_zero() {
        return None;
    }
    let mut entries = Vec::new();
    for (si, terms) in h_terms {
        let h = Polynomial::from_terms(n, terms).ok()?;
        if h.is_zero() {
            continue;
        }
        entries.push(CertificateEntry { multiset: sets[si].clone(), multiplier: h });
    }
    Some(OrthantCertificate { nvars: n, entries, target })
}

/// Outcome of a full certificate search: the certificate when one was
/// found and exactly verified, plus a human-readable attempt log.
pub struct CertificateSearch {
    pub certificate: Option<OrthantCertificate>,
    pub attempts: Vec<String>,
}

fn count_multisets(ncons: usize, max_size: u32) -> u64 {
    // 1 + sum_s C(ncons + s - 1, s)
    let mut total = 1u64;
    for s in 1..=max_size as u64 {
        let mut c = 1u64;
        for i in 0..s {
            c = c.saturating_mul(ncons as u64 + i) / (i + 1);
        }
        total = total.saturating_add(c);
    }
    total
}

fn count_monomials(nvars: usize, deg: u32) -> u64 {
    let mut c = 1u64;
    for i in 1..=nvars as u64 {
        c = c.saturating_mul(deg as u64 + i) / i;
    }
    c
}

const COLUMN_CAP: u64 = 200_000;
const LP_ITER_CAP: usize = 20_000;
const SUPPORT_TOLS: [f64; 4] = [1e-7, 1e-6, 1e-9, 1e-4];

/// Search for a certificate, escalating multiplier degree and product
/// order up to the configured bounds. Attempts run in increasing
/// estimated size; the first exactly verified certificate wins.
pub fn certificate_search(system: &InequalitySystem, cfg: &SearchConfig) -> CertificateSearch {
    let mut attempts = Vec::new();
    if system.is_empty() {
        attempts.push("certificate search skipped: no constraints".to_string());
        return CertificateSearch { certificate: None, attempts };
    }
    let mut plan: Vec<(u64, u32, u32)> = Vec::new();
    for r in 1..=cfg.order_bound {
        for d in 0..=cfg.degree_bound {
            let cols = count_multisets(system.len(), r)
                .saturating_mul(count_monomials(system.nvars(), d))
                .saturating_add(count_monomials(system.nvars(), d));
            plan.push((cols, r, d));
        }
    }
    plan.sort();

    for (est, r, d) in plan {
        let tag = format!("degree {d}, order {r}");
        if est > COLUMN_CAP {
            attempts.push(format!("{tag}: skipped, {est} columns exceeds cap"));
            continue;
        }
        let exact = build_exact_lp(system, d, r);
        let float_lp = FeasibilityLp {
            nrows: exact.nrows,
            cols: exact
                .columns
                .iter()
                .map(|col| col.iter().map(|(i, v)| (*i, rat_to_f64_nearest(v))).collect())
                .collect(),
            rhs: {
                let mut b = vec![0.0; exact.nrows];
                b[exact.norm_row] = 1.0;
                b
            },
        };
        let sol = solve_feasibility(&float_lp, LP_ITER_CAP);
        if sol.residual > residual_accept(exact.nrows) {
            attempts.push(format!(
                "{tag}: lp {}x{} found no multiplier combination (residual {:.1e} after {} pivots, {})",
                exact.nrows,
                exact.columns.len(),
                sol.residual,
                sol.iterations,
                sol.stop
            ));
            continue;
        }
        let sets = multisets_up_to(system.len(), r);
        let mut done = None;
        for tol in SUPPORT_TOLS {
            let support: Vec<usize> = (0..sol.x.len()).filter(|&j| sol.x[j] > tol).collect();
            if support.is_empty() {
                continue;
            }
            let Some(values) = exact_resolve(&exact, &support) else {
                continue;
            };
            let Some(cert) = assemble(&exact, &support, &values, system, &sets) else {
                continue;
            };
            if verify_certificate(system, &cert) {
                done = Some((cert, support.len()));
                break;
            }
        }
        match done {
            Some((cert, nsup)) => {
                attempts.push(format!(
                    "{tag}: lp {}x{} solved in {} pivots, support {nsup}, exact reconstruction verified",
                    exact.nrows,
                    exact.columns.len(),
                    sol.iterations
                ));
                return CertificateSearch { certificate: Some(cert), attempts };
            }
            None => {
                attempts.push(format!(
                    "{tag}: lp solution found but exact reconstruction failed at every tolerance"
                ));
            }
        }
    }
    CertificateSearch { certificate: None, attempts }
}

/// Convenience wrapper returning only the certificate.
pub fn find_certificate(system: &InequalitySystem, cfg: &SearchConfig) -> Option<OrthantCertificate> {
    certificate_search(system, cfg).certificate
}

fn poly_terms_descending(p: &Polynomial) -> Vec<(String, Vec<u32>)> {
    p.terms()
        .rev()
        .map(|(m, c)| (c.to_string(), m.exps().to_vec()))
        .collect()
}

fn poly_from_terms(nvars: usize, terms: &[(String, Vec<u32>)]) -> Result<Polynomial, String> {
    let mut pairs = Vec::with_capacity(terms.len());
    for (cs, exps) in terms {
        let c = parse_rat(cs).map_err(|e| e.to_string())?;
        if exps.len() != nvars {
            return Err("exponent arity mismatch".to_string());
        }
        pairs.push((Monomial::from_exps(exps.clone()), c));
    }
    Polynomial::from_terms(nvars, pairs).map_err(|e| e.to_string())
}

impl Serialize for OrthantCertificate {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct EntryRepr {
            multiset: Vec<usize>,
            multiplier: Vec<(String, Vec<u32>)>,
        }
        let mut map = s.serialize_map(Some(3))?;
        map.serialize_entry("nvars", &self.nvars)?;
        let entries: Vec<EntryRepr> = self
            .entries
            .iter()
            .map(|e| EntryRepr {
                multiset: e.multiset.clone(),
                multiplier: poly_terms_descending(&e.multiplier),
            })
            .collect();
        map.serialize_entry("entries", &entries)?;
        map.serialize_entry("target", &poly_terms_descending(&self.target))?;
        map.end()
    }
}

impl<'de> Deserialize<'de> for OrthantCertificate {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct EntryRepr {
            multiset: Vec<usize>,
            multiplier: Vec<(String, Vec<u32>)>,
        }
        #[derive(Deserialize)]
        struct Repr {
            nvars: usize,
            entries: Vec<EntryRepr>,
            target: Vec<(String, Vec<u32>)>,
        }
        let r = Repr::deserialize(d)?;
        let mut entries = Vec::with_capacity(r.entries.len());
        for e in r.entries {
            let multiplier = poly_from_terms(r.nvars, &e.multiplier).map_err(DeError::custom)?;
            entries.push(CertificateEntry { multiset: e.multiset, multiplier });
        }
        let target = poly_from_terms(r.nvars, &r.target).map_err(DeError::custom)?;
        Ok(OrthantCertificate { nvars: r.nvars, entries, target })
    }
}
