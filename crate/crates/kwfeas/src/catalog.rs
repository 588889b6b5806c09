//! On-disk catalog of orbit systems and their verdicts.
//!
//! One JSON file per (k, d) holds the orbit decomposition of the
//! nondegenerate saturated supports, the canonical inequality system of
//! each orbit, and the latest decision record per orbit. Saves go
//! through a temp file and a rename, so a crash never leaves a torn
//! catalog; the CLI is the single writer.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::feasibility::{box_label, decide, SearchConfig, Status, Strategy, Verdict};
use crate::kw::{self, kw_system, InequalitySystem, Restriction};
use crate::model::{RegressionSpec, SupportSet};
use crate::symmetry::{canonical_support, group_elements, orbit_decompose};
use crate::{exec, Error, Result};

/// Environment variable naming the default catalog directory.
pub const CATALOG_DIR_ENV: &str = "KWFEAS_CATALOG_DIR";

/// Directory catalogs live in when no explicit path is given.
pub fn default_dir() -> PathBuf {
    std::env::var_os(CATALOG_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("catalogs"))
}

/// Conventional file name of the (k, d) catalog.
pub fn file_name(k: u8, d: u8) -> String {
    format!("catalog-k{k}-d{d}.json")
}

/// Default on-disk location of the (k, d) catalog.
pub fn default_path(k: u8, d: u8) -> PathBuf {
    default_dir().join(file_name(k, d))
}

/// Outcome of one decision run on an orbit's system, with enough
/// context to reproduce it: strategy, full config, and restrictions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub strategy: Strategy,
    pub config: SearchConfig,
    /// Restrictions applied before deciding, in display form.
    pub restrictions: Vec<String>,
    pub verdict: Verdict,
    pub wall_ms: u64,
    pub checked_at: String,
}

/// One orbit of nondegenerate supports with its canonical system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitRecord {
    /// 1-based position in the canonical order; stable across runs.
    pub id: usize,
    /// Canonical representative, one bitstring per support point.
    pub representative: Vec<String>,
    pub orbit_size: usize,
    pub nondegenerate: bool,
    pub system: InequalitySystem,
    pub check: Option<CheckRecord>,
}

/// The (k, d) catalog: enumeration counts plus one record per orbit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Catalog {
    pub k: u8,
    pub d: u8,
    pub tool_version: String,
    pub created_at: String,
    pub total_supports: u64,
    pub nondegenerate_supports: u64,
    pub orbits: Vec<OrbitRecord>,
}

impl Catalog {
    /// Enumerate all saturated supports of the (k, d) model, reduce the
    /// nondegenerate ones by the hyperoctahedral action, and attach the
    /// canonical inequality system of each orbit. Verdicts start empty.
    pub fn build(k: u8, d: u8) -> Result<Catalog> {
        let spec = RegressionSpec::new(k, d)?;
        let all: Vec<SupportSet> = spec.enumerate_supports(false).collect();
        let flags = exec::map_collect(&all, |s| {
            spec.is_nondegenerate(s).expect("support size matches the model")
        });
        let nondeg: Vec<SupportSet> = all
            .iter()
            .zip(&flags)
            .filter(|(_, &keep)| keep)
            .map(|(s, _)| s.clone())
            .collect();
        let total_supports = all.len() as u64;
        drop(all);

        let orbits = orbit_decompose(&nondeg)?;
        let systems = exec::map_collect(&orbits, |o| kw_system(&spec, &o.representative));
        let mut records = Vec::with_capacity(orbits.len());
        for (i, (orbit, system)) in orbits.into_iter().zip(systems).enumerate() {
            records.push(OrbitRecord {
                id: i + 1,
                representative: orbit
                    .representative
                    .points()
                    .iter()
                    .map(|p| p.to_string())
                    .collect(),
                orbit_size: orbit.size,
                nondegenerate: true,
                system: system?,
                check: None,
            });
        }
        Ok(Catalog {
            k,
            d,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            created_at: now_utc(),
            total_supports,
            nondegenerate_supports: nondeg.len() as u64,
            orbits: records,
        })
    }

    /// Read and validate a catalog file.
    pub fn load(path: &Path) -> Result<Catalog> {
        let text = fs::read_to_string(path).map_err(|e| {
            Error::Catalog(format!("cannot read {}: {e}", path.display()))
        })?;
        let catalog: Catalog = serde_json::from_str(&text)?;
        catalog.validate()?;
        Ok(catalog)
    }

    /// Write the catalog next to `path` and rename into place.
    pub fn save(&self, path: &Path) -> Result<()> {
        self.validate()?;
        if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        let mut json = serde_json::to_string_pretty(self)?;
        json.push('\n');
        let tmp = path.with_extension("json.tmp");
        fs::write(&tmp, json)?;
        fs::rename(&tmp, path)?;
        Ok(())
    }

    /// Structural invariants: sequential ids, canonical representatives
    /// that agree with their systems, and orbit sizes summing to the
    /// nondegenerate support count.
    pub fn validate(&self) -> Result<()> {
        let spec = RegressionSpec::new(self.k, self.d)?;
        let group = group_elements(self.k as usize)?;
        let mut size_sum = 0u64;
        for (i, rec) in self.orbits.iter().enumerate() {
            if rec.id != i + 1 {
                return Err(Error::Catalog(format!(
                    "orbit ids must run 1..; found {} at position {}",
                    rec.id,
                    i + 1
                )));
            }
            let sys = &rec.system;
            if sys.k() != self.k || sys.d() != self.d {
                return Err(Error::Catalog(format!(
                    "orbit {} carries a system for k={} d={}",
                    rec.id,
                    sys.k(),
                    sys.d()
                )));
            }
            if !sys.restrictions().is_empty() {
                return Err(Error::Catalog(format!(
                    "orbit {} stores a restricted system",
                    rec.id
                )));
            }
            let rep = SupportSet::parse_points(&rec.representative)?;
            if rep != *sys.support() {
                return Err(Error::Catalog(format!(
                    "orbit {} representative disagrees with its system's support",
                    rec.id
                )));
            }
            if canonical_support(&group, &rep)? != rep {
                return Err(Error::Catalog(format!(
                    "orbit {} representative is not canonical",
                    rec.id
                )));
            }
            if rec.nondegenerate != spec.is_nondegenerate(&rep)? {
                return Err(Error::Catalog(format!(
                    "orbit {} nondegeneracy flag is wrong",
                    rec.id
                )));
            }
            size_sum += rec.orbit_size as u64;
        }
        if size_sum != self.nondegenerate_supports {
            return Err(Error::Catalog(format!(
                "orbit sizes sum to {size_sum}, catalog claims {} nondegenerate supports",
                self.nondegenerate_supports
            )));
        }
        Ok(())
    }

    pub fn orbit(&self, id: usize) -> Result<&OrbitRecord> {
        self.orbits.iter().find(|o| o.id == id).ok_or(Error::UnknownOrbit(id))
    }

    /// The orbit's system with `restrictions` applied (clone when none).
    pub fn restricted_system(
        &self,
        id: usize,
        restrictions: &[Restriction],
    ) -> Result<InequalitySystem> {
        let base = &self.orbit(id)?.system;
        if restrictions.is_empty() {
            Ok(base.clone())
        } else {
            kw::restrict(base, restrictions)
        }
    }

    /// Decide one orbit's (optionally restricted) system and store the
    /// outcome, overwriting any previous record.
    pub fn check_orbit(
        &mut self,
        id: usize,
        strategy: Strategy,
        cfg: &SearchConfig,
        restrictions: &[Restriction],
    ) -> Result<&CheckRecord> {
        let system = self.restricted_system(id, restrictions)?;
        let started = Instant::now();
        let verdict = decide(&system, strategy, cfg);
        let wall_ms = started.elapsed().as_millis() as u64;
        let idx = self
            .orbits
            .iter()
            .position(|o| o.id == id)
            .ok_or(Error::UnknownOrbit(id))?;
        self.orbits[idx].check = Some(CheckRecord {
            strategy,
            config: cfg.clone(),
            restrictions: restrictions.iter().map(|r| r.to_string()).collect(),
            verdict,
            wall_ms,
            checked_at: now_utc(),
        });
        Ok(self.orbits[idx].check.as_ref().expect("just stored"))
    }

    /// Plain-text table, one row per orbit. Unchecked orbits show an
    /// unknown verdict; restricted checks carry their restrictions in
    /// the verdict cell so a scoped claim is never mistaken for a
    /// statement about the unrestricted system.
    pub fn report(&self) -> String {
        let header = ["id", "representative", "size", "cons", "verdict", "method", "scope", "time"];
        let mut rows: Vec<[String; 8]> = Vec::with_capacity(self.orbits.len());
        for rec in &self.orbits {
            let (verdict, method, scope, time) = match &rec.check {
                None => ("unknown".to_string(), "-".into(), "-".into(), "-".into()),
                Some(c) => {
                    let mut v = c.verdict.status.to_string();
                    if !c.restrictions.is_empty() {
                        v = format!("{v} ({})", c.restrictions.join(", "));
                    }
                    (v, method_of(&c.verdict).to_string(), scope_of(&c.verdict), fmt_ms(c.wall_ms))
                }
            };
            rows.push([
                rec.id.to_string(),
                format!("{}", rec.system.support()),
                rec.orbit_size.to_string(),
                rec.system.len().to_string(),
                verdict,
                method,
                scope,
                time,
            ]);
        }
        let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
        for row in &rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.len());
            }
        }
        let mut out = String::new();
        let fmt_row = |cells: &[String]| -> String {
            cells
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:<w$}"))
                .collect::<Vec<_>>()
                .join("  ")
                .trim_end()
                .to_string()
        };
        let header_cells: Vec<String> = header.iter().map(|h| h.to_string()).collect();
        out.push_str(&fmt_row(&header_cells));
        out.push('\n');
        out.push_str(&widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().join("  "));
        out.push('\n');
        for row in &rows {
            out.push_str(&fmt_row(row.as_slice()));
            out.push('\n');
        }
        out
    }
}

fn method_of(v: &Verdict) -> &'static str {
    match v.status {
        Status::Feasible => "witness",
        Status::Infeasible if v.certificate.is_some() => "certificate",
        Status::Infeasible => "box ladder",
        Status::Unknown => "-",
    }
}

fn scope_of(v: &Verdict) -> String {
    match v.status {
        // an exact witness is evidence wherever it lies
        Status::Feasible => "global".into(),
        Status::Infeasible if v.certificate.is_some() => "orthant".into(),
        Status::Infeasible => v
            .boxlog
            .iter()
            .rev()
            .find(|t| t.complete())
            .map(|t| box_label(&t.root))
            .unwrap_or_else(|| "box".into()),
        Status::Unknown => "-".into(),
    }
}

fn fmt_ms(ms: u64) -> String {
    if ms < 10_000 {
        format!("{ms} ms")
    } else {
        format!("{:.1} s", ms as f64 / 1000.0)
    }
}

fn now_utc() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn build_k2_counts_and_system() {
        let cat = Catalog::build(2, 1).unwrap();
        assert_eq!(cat.total_supports, 4);
        assert_eq!(cat.nondegenerate_supports, 4);
        assert_eq!(cat.orbits.len(), 1);
        assert_eq!(cat.orbits[0].orbit_size, 4);
        let shown = cat.orbits[0].system.to_string();
        assert!(shown.starts_with("m1*m2 + m1 + m2 - 1 <= 0\n"), "{shown}");
        assert!(shown.contains("m1 > 0"));
        cat.validate().unwrap();
    }

    #[test]
    fn build_k3_counts() {
        let cat = Catalog::build(3, 1).unwrap();
        assert_eq!(cat.total_supports, 70);
        assert_eq!(cat.nondegenerate_supports, 58);
        assert_eq!(cat.orbits.len(), 4);
        assert_eq!(
            cat.orbits.iter().map(|o| o.orbit_size).sum::<usize>(),
            58
        );
    }

    #[test]
    fn save_load_round_trip_is_byte_stable() {
        let dir = tempfile::tempdir().unwrap();
        let mut cat = Catalog::build(2, 1).unwrap();
        cat.check_orbit(1, Strategy::Auto, &SearchConfig::default(), &[]).unwrap();
        let first = dir.path().join("catalog-k2-d1.json");
        let second = dir.path().join("again.json");
        cat.save(&first).unwrap();
        let loaded = Catalog::load(&first).unwrap();
        assert_eq!(loaded, cat);
        loaded.save(&second).unwrap();
        assert_eq!(fs::read(&first).unwrap(), fs::read(&second).unwrap());
        // no temp file left behind
        assert!(!first.with_extension("json.tmp").exists());
    }

    #[test]
    fn check_orbit_records_and_overwrites() {
        let mut cat = Catalog::build(2, 1).unwrap();
        let rec = cat.check_orbit(1, Strategy::Auto, &SearchConfig::default(), &[]).unwrap();
        assert_eq!(rec.verdict.status, Status::Feasible);
        assert!(rec.restrictions.is_empty());
        let r = Restriction::parse("m1=m2").unwrap();
        let rec = cat
            .check_orbit(1, Strategy::Witness, &SearchConfig::default(), &[r])
            .unwrap();
        assert_eq!(rec.strategy, Strategy::Witness);
        assert_eq!(rec.restrictions, vec!["m1=m2".to_string()]);
        assert!(cat.orbit(99).is_err());
    }

    #[test]
    fn report_rows_and_header_only() {
        let mut cat = Catalog::build(2, 1).unwrap();
        let unchecked = cat.report();
        assert!(unchecked.lines().nth(0).unwrap().starts_with("id"));
        assert!(unchecked.contains("unknown"));
        assert_eq!(unchecked.lines().count(), 3);

        cat.check_orbit(1, Strategy::Auto, &SearchConfig::default(), &[]).unwrap();
        let checked = cat.report();
        assert!(checked.contains("feasible"), "{checked}");
        assert!(checked.contains("witness"), "{checked}");
        assert!(checked.contains("global"), "{checked}");

        cat.orbits.clear();
        cat.nondegenerate_supports = 0;
        let empty = cat.report();
        assert_eq!(empty.lines().count(), 2, "{empty}");
    }

    #[test]
    fn load_rejects_tampered_catalogs() {
        let dir = tempfile::tempdir().unwrap();
        let cat = Catalog::build(2, 1).unwrap();
        let path = dir.path().join("cat.json");
        cat.save(&path).unwrap();
        let good = fs::read_to_string(&path).unwrap();

        for (from, to) in [
            ("\"orbit_size\": 4", "\"orbit_size\": 5"),
            ("\"id\": 1", "\"id\": 2"),
            ("\"nondegenerate\": true", "\"nondegenerate\": false"),
        ] {
            let bad = good.replace(from, to);
            assert_ne!(bad, good, "tamper pattern {from:?} missed");
            fs::write(&path, &bad).unwrap();
            assert!(Catalog::load(&path).is_err(), "accepted tamper {from:?}");
        }
    }

    #[test]
    fn default_path_uses_env_dir() {
        std::env::set_var(CATALOG_DIR_ENV, "/tmp/kwfeas-cat-test");
        assert_eq!(
            default_path(4, 1),
            PathBuf::from("/tmp/kwfeas-cat-test/catalog-k4-d1.json")
        );
        std::env::remove_var(CATALOG_DIR_ENV);
        assert_eq!(default_path(3, 2), PathBuf::from("catalogs/catalog-k3-d2.json"));
    }
}
