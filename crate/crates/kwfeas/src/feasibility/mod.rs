//! Feasibility of inequality systems over the open positive orthant.
//!
//! Three complementary engines, each with an exact final gate:
//!
//! * witness search (floating-point optimization, rationalization,
//!   exact re-verification) proves feasibility;
//! * orthant certificates (LP-guided, exactly reconstructed and
//!   re-verified) prove infeasibility everywhere;
//! * interval branch-and-bound proves emptiness of explicit boxes and
//!   sometimes stumbles on witnesses.
//!
//! Floating point only ever proposes; rational arithmetic disposes.
//! The decision procedure never reports Feasible without an exactly
//! verified witness and never reports Infeasible without either a
//! verified certificate or a complete covering proof for the box it
//! explicitly names.

mod bnb;
mod certificate;
mod simplex;
mod witness;

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use num_traits::Signed;
use serde::de::Error as DeError;
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub use bnb::{bnb_region, default_ladder, BnBTrace, PrunedBox, RegionOutcome};
pub use certificate::{
    certificate_search, find_certificate, verify_certificate, CertificateEntry,
    CertificateSearch, OrthantCertificate,
};
pub use witness::{search_witness, verify_witness};

use crate::interval::Interval;
use crate::kw::InequalitySystem;
use crate::poly::parse_rat;
use crate::{Error, Rat, Result};

/// What the decision procedure concluded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    /// An exact strictly positive witness is attached.
    Feasible,
    /// A verified certificate (global) or a complete covering proof
    /// for an explicitly named box is attached.
    Infeasible,
    /// Budgets ran out before either proof appeared.
    Unknown,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Status::Feasible => "feasible",
            Status::Infeasible => "infeasible",
            Status::Unknown => "unknown",
        };
        f.write_str(s)
    }
}

/// Which engines the decision procedure runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Witness, then certificate, then box ladder.
    Auto,
    Witness,
    Certificate,
    Bnb,
}

impl FromStr for Strategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Strategy::Auto),
            "witness" => Ok(Strategy::Witness),
            "certificate" => Ok(Strategy::Certificate),
            "bnb" => Ok(Strategy::Bnb),
            other => Err(Error::Parse(format!(
                "unknown strategy {other:?}, expected auto|witness|certificate|bnb"
            ))),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Strategy::Auto => "auto",
            Strategy::Witness => "witness",
            Strategy::Certificate => "certificate",
            Strategy::Bnb => "bnb",
        };
        f.write_str(s)
    }
}

/// Budgets and knobs for all three engines. All counts must be
/// positive; the optional region must lie strictly inside the
/// positive orthant.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    /// Witness search starts (two deterministic, the rest seeded).
    pub multistart: u32,
    /// Pattern-search sweeps per start.
    pub iterations: u32,
    /// Denominator cap for witness rationalization.
    pub denom_bound: u64,
    /// Maximum multiplier degree in certificate search.
    pub degree_bound: u32,
    /// Maximum constraint-product order in certificate search.
    pub order_bound: u32,
    /// Boxes classified per branch-and-bound run.
    pub box_budget: u64,
    /// Optional overall wall-clock budget; checked between phases and
    /// waves, so runs may overshoot slightly but never hang.
    pub time_budget_ms: Option<u64>,
    /// Seed for the randomized witness starts.
    pub seed: u64,
    /// Cap on retained trace entries per box run.
    pub trace_limit: u32,
    /// Explicit box (exact endpoints) overriding the default ladder.
    pub region: Option<Vec<(Rat, Rat)>>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            multistart: 64,
            iterations: 400,
            denom_bound: 1_000_000,
            degree_bound: 4,
            order_bound: 2,
            box_budget: 50_000,
            time_budget_ms: None,
            seed: 42,
            trace_limit: 512,
            region: None,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.multistart == 0
            || self.iterations == 0
            || self.denom_bound == 0
            || self.order_bound == 0
            || self.box_budget == 0
            || self.trace_limit == 0
        {
            return Err(Error::Parse("search budgets must be positive".into()));
        }
        if let Some(region) = &self.region {
            for (lo, hi) in region {
                if !lo.is_positive() || hi < lo {
                    return Err(Error::InvalidBox(format!(
                        "region side [{lo}, {hi}] must satisfy 0 < lo <= hi"
                    )));
                }
            }
        }
        Ok(())
    }

    /// The explicit region as outward-rounded intervals, when set.
    fn region_box(&self) -> Result<Option<Vec<Interval>>> {
        let Some(region) = &self.region else {
            return Ok(None);
        };
        let mut out = Vec::with_capacity(region.len());
        for (lo, hi) in region {
            let iv = Interval::from_rat_bounds(lo, hi)?;
            if iv.lo() <= 0.0 {
                return Err(Error::InvalidBox(format!(
                    "region lower bound {lo} underflows to zero in binary"
                )));
            }
            out.push(iv);
        }
        Ok(Some(out))
    }
}

/// Decision result. Every claim carries its evidence: Feasible comes
/// with a witness, Infeasible with a certificate or a complete box
/// trace plus a scope note, and the diagnostics narrate what ran.
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub status: Status,
    pub witness: Option<Vec<Rat>>,
    pub certificate: Option<OrthantCertificate>,
    /// Traces of the box runs, in execution order.
    pub boxlog: Vec<BnBTrace>,
    pub diagnostics: Vec<String>,
}

impl Verdict {
    fn unknown(diagnostics: Vec<String>) -> Self {
        Verdict {
            status: Status::Unknown,
            witness: None,
            certificate: None,
            boxlog: Vec::new(),
            diagnostics,
        }
    }
}

fn remaining(deadline: Option<Instant>) -> Option<Duration> {
    deadline.map(|d| d.saturating_duration_since(Instant::now()))
}

fn expired(deadline: Option<Instant>) -> bool {
    remaining(deadline).is_some_and(|r| r.is_zero())
}

pub(crate) fn box_label(root: &[Interval]) -> String {
    if root.is_empty() {
        return "[]".to_string();
    }
    let first = root[0];
    if root.iter().all(|iv| *iv == first) {
        format!("{first}^{}", root.len())
    } else {
        let sides: Vec<String> = root.iter().map(|iv| iv.to_string()).collect();
        sides.join("x")
    }
}

/// Decide feasibility of `system` over the open positive orthant.
///
/// Runs the engines selected by `strategy` and returns the strongest
/// verdict reached within the budgets. The result is deterministic
/// for a fixed system, strategy, and config (absent a wall-clock
/// budget) regardless of thread count.
pub fn decide(system: &InequalitySystem, strategy: Strategy, cfg: &SearchConfig) -> Verdict {
    let mut diag: Vec<String> = Vec::new();
    if let Err(e) = cfg.validate() {
        diag.push(format!("invalid search config: {e}"));
        return Verdict::unknown(diag);
    }
    let user_region = match cfg.region_box() {
        Ok(r) => r,
        Err(e) => {
            diag.push(format!("invalid search region: {e}"));
            return Verdict::unknown(diag);
        }
    };
    let deadline = cfg.time_budget_ms.map(|ms| Instant::now() + Duration::from_millis(ms));

    // preprocessing: identically zero constraints are restriction
    // artifacts and hold everywhere; a constraint with nonnegative
    // coefficients (and some coefficient nonzero) is positive on the
    // whole open orthant, which settles the system outright
    for (i, g) in system.constraints().iter().enumerate() {
        if g.is_zero() {
            diag.push(format!(
                "constraint {} is identically zero and holds everywhere; ignored by the search",
                i + 1
            ));
        } else if g.has_nonneg_coeffs() {
            let cert = OrthantCertificate::trivial(system, i);
            debug_assert!(verify_certificate(system, &cert));
            if verify_certificate(system, &cert) {
                diag.push(format!(
                    "constraint {} has nonnegative coefficients, so it is strictly positive on the open orthant",
                    i + 1
                ));
                return Verdict {
                    status: Status::Infeasible,
                    witness: None,
                    certificate: Some(cert),
                    boxlog: Vec::new(),
                    diagnostics: diag,
                };
            }
        }
    }

    let run_witness = matches!(strategy, Strategy::Auto | Strategy::Witness);
    let run_certificate = matches!(strategy, Strategy::Auto | Strategy::Certificate);
    let run_boxes = matches!(strategy, Strategy::Auto | Strategy::Bnb);

    if run_witness {
        match search_witness(system, cfg) {
            Some(w) if verify_witness(system, &w).unwrap_or(false) => {
                diag.push(format!(
                    "witness search: exact witness found and verified ({} starts available)",
                    cfg.multistart
                ));
                return Verdict {
                    status: Status::Feasible,
                    witness: Some(w),
                    certificate: None,
                    boxlog: Vec::new(),
                    diagnostics: diag,
                };
            }
            _ => diag.push(format!(
                "witness search: no witness found after {} starts",
                cfg.multistart
            )),
        }
    }

    let mut certificate = None;
    if run_certificate {
        if expired(deadline) {
            diag.push("time budget exhausted before certificate search".to_string());
        } else {
            let search = certificate_search(system, cfg);
            for a in search.attempts {
                diag.push(format!("certificate search, {a}"));
            }
            certificate = search.certificate;
        }
    }

    let mut boxlog: Vec<BnBTrace> = Vec::new();
    let mut scoped_empty: Option<String> = None;
    if run_boxes {
        let boxes: Vec<Vec<Interval>> = match &user_region {
            Some(root) => vec![root.clone()],
            None => default_ladder(system.nvars()),
        };
        let last = boxes.len().saturating_sub(1);
        for (bi, root) in boxes.into_iter().enumerate() {
            if expired(deadline) {
                diag.push("time budget exhausted before remaining box runs".to_string());
                break;
            }
            let mut run_cfg = cfg.clone();
            run_cfg.time_budget_ms = remaining(deadline).map(|r| r.as_millis() as u64);
            let label = box_label(&root);
            match bnb_region(system, &root, &run_cfg) {
                Ok(RegionOutcome::FoundPoint(w)) => {
                    if verify_witness(system, &w).unwrap_or(false) {
                        diag.push(format!("box search {label}: exact witness found"));
                        if certificate.is_some() {
                            // an exactly verified witness and an exactly
                            // verified certificate cannot coexist
                            diag.push(
                                "internal inconsistency: certificate and witness both verified"
                                    .to_string(),
                            );
                            return Verdict {
                                status: Status::Unknown,
                                witness: Some(w),
                                certificate,
                                boxlog,
                                diagnostics: diag,
                            };
                        }
                        return Verdict {
                            status: Status::Feasible,
                            witness: Some(w),
                            certificate: None,
                            boxlog,
                            diagnostics: diag,
                        };
                    }
                    diag.push(format!(
                        "box search {label}: candidate point failed exact verification"
                    ));
                }
                Ok(RegionOutcome::ProvenEmpty(trace)) => {
                    diag.push(format!(
                        "box search {label}: proven empty ({} boxes processed, {} pruned)",
                        trace.boxes_processed, trace.boxes_pruned
                    ));
                    if user_region.is_some() || bi == last {
                        scoped_empty = Some(label);
                    }
                    boxlog.push(trace);
                }
                Ok(RegionOutcome::Exhausted(trace)) => {
                    diag.push(format!(
                        "box search {label}: budget exhausted with {} unresolved boxes",
                        trace.unresolved_total
                    ));
                    boxlog.push(trace);
                }
                Err(e) => {
                    diag.push(format!("box search {label}: {e}"));
                }
            }
        }
    }

    if certificate.is_some() {
        diag.push("infeasible on the whole open positive orthant by certificate".to_string());
        return Verdict {
            status: Status::Infeasible,
            witness: None,
            certificate,
            boxlog,
            diagnostics: diag,
        };
    }
    if let Some(label) = scoped_empty {
        diag.push(format!(
            "infeasible on the box {label} only; no claim outside that box"
        ));
        return Verdict {
            status: Status::Infeasible,
            witness: None,
            certificate: None,
            boxlog,
            diagnostics: diag,
        };
    }
    diag.push("no proof either way within the configured budgets".to_string());
    Verdict { status: Status::Unknown, witness: None, certificate: None, boxlog, diagnostics: diag }
}

impl Serialize for SearchConfig {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(10))?;
        map.serialize_entry("multistart", &self.multistart)?;
        map.serialize_entry("iterations", &self.iterations)?;
        map.serialize_entry("denom_bound", &self.denom_bound)?;
        map.serialize_entry("degree_bound", &self.degree_bound)?;
        map.serialize_entry("order_bound", &self.order_bound)?;
        map.serialize_entry("box_budget", &self.box_budget)?;
        map.serialize_entry("time_budget_ms", &self.time_budget_ms)?;
        map.serialize_entry("seed", &self.seed)?;
        map.serialize_entry("trace_limit", &self.trace_limit)?;
        let region: Option<Vec<(String, String)>> = self
            .region
            .as_ref()
            .map(|r| r.iter().map(|(lo, hi)| (lo.to_string(), hi.to_string())).collect());
        map.serialize_entry("region", &region)?;
        map.end()
    }
}

impl<'de> Deserialize<'de> for SearchConfig {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            multistart: u32,
            iterations: u32,
            denom_bound: u64,
            degree_bound: u32,
            order_bound: u32,
            box_budget: u64,
            time_budget_ms: Option<u64>,
            seed: u64,
            trace_limit: u32,
            region: Option<Vec<(String, String)>>,
        }
        let r = Repr::deserialize(d)?;
        let region = match r.region {
            None => None,
            Some(pairs) => {
                let mut out = Vec::with_capacity(pairs.len());
                for (lo, hi) in pairs {
                    let lo = parse_rat(&lo).map_err(DeError::custom)?;
                    let hi = parse_rat(&hi).map_err(DeError::custom)?;
                    out.push((lo, hi));
                }
                Some(out)
            }
        };
        let cfg = SearchConfig {
            multistart: r.multistart,
            iterations: r.iterations,
            denom_bound: r.denom_bound,
            degree_bound: r.degree_bound,
            order_bound: r.order_bound,
            box_budget: r.box_budget,
            time_budget_ms: r.time_budget_ms,
            seed: r.seed,
            trace_limit: r.trace_limit,
            region,
        };
        cfg.validate().map_err(DeError::custom)?;
        Ok(cfg)
    }
}

impl Serialize for Verdict {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(5))?;
        map.serialize_entry("status", &self.status)?;
        let witness: Option<Vec<String>> =
            self.witness.as_ref().map(|w| w.iter().map(|r| r.to_string()).collect());
        map.serialize_entry("witness", &witness)?;
        map.serialize_entry("certificate", &self.certificate)?;
        map.serialize_entry("boxlog", &self.boxlog)?;
        map.serialize_entry("diagnostics", &self.diagnostics)?;
        map.end()
    }
}

impl<'de> Deserialize<'de> for Verdict {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            status: Status,
            witness: Option<Vec<String>>,
            certificate: Option<OrthantCertificate>,
            boxlog: Vec<BnBTrace>,
            diagnostics: Vec<String>,
        }
        let r = Repr::deserialize(d)?;
        let witness = match r.witness {
            None => None,
            Some(parts) => {
                let mut out = Vec::with_capacity(parts.len());
                for p in parts {
                    out.push(parse_rat(&p).map_err(DeError::custom)?);
                }
                Some(out)
            }
        };
        Ok(Verdict {
            status: r.status,
            witness,
            certificate: r.certificate,
            boxlog: r.boxlog,
            diagnostics: r.diagnostics,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Polynomial;

    fn sys(nvars: usize, exprs: &[&str]) -> InequalitySystem {
        let spec = crate::model::RegressionSpec::new(nvars as u8, 1).unwrap();
        let support = spec.corner_design();
        let cons: Vec<Polynomial> =
            exprs.iter().map(|e| Polynomial::parse(e, nvars).unwrap()).collect();
        InequalitySystem::new(nvars as u8, 1, support, Vec::new(), cons).unwrap()
    }

    fn corner_k2() -> InequalitySystem {
        let spec = crate::model::RegressionSpec::new(2, 1).unwrap();
        crate::kw::kw_system(&spec, &spec.corner_design()).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(SearchConfig::default().validate().is_ok());
        let mut c = SearchConfig::default();
        c.multistart = 0;
        assert!(c.validate().is_err());
        let mut c = SearchConfig::default();
        c.region = Some(vec![(Rat::from_integer(0.into()), Rat::from_integer(1.into()))]);
        assert!(c.validate().is_err());
        let mut c = SearchConfig::default();
        c.region = Some(vec![(Rat::from_integer(2.into()), Rat::from_integer(1.into()))]);
        assert!(c.validate().is_err());
    }

    #[test]
    fn strategy_round_trip() {
        for s in [Strategy::Auto, Strategy::Witness, Strategy::Certificate, Strategy::Bnb] {
            assert_eq!(s.to_string().parse::<Strategy>().unwrap(), s);
        }
        assert!("solver".parse::<Strategy>().is_err());
    }

    #[test]
    fn decide_feasible_corner() {
        let s = corner_k2();
        let v = decide(&s, Strategy::Auto, &SearchConfig::default());
        assert_eq!(v.status, Status::Feasible);
        let w = v.witness.expect("witness");
        assert!(verify_witness(&s, &w).unwrap());
        assert!(v.certificate.is_none());
        assert!(!v.diagnostics.is_empty());
    }

    #[test]
    fn decide_is_deterministic() {
        let s = corner_k2();
        let cfg = SearchConfig::default();
        assert_eq!(decide(&s, Strategy::Auto, &cfg), decide(&s, Strategy::Auto, &cfg));
    }

    #[test]
    fn decide_trivially_positive_constraint() {
        let s = sys(1, &["m1 + 1"]);
        for strat in [Strategy::Auto, Strategy::Witness, Strategy::Certificate, Strategy::Bnb] {
            let v = decide(&s, strat, &SearchConfig::default());
            assert_eq!(v.status, Status::Infeasible, "{strat}");
            let cert = v.certificate.expect("certificate");
            assert!(verify_certificate(&s, &cert));
        }
    }

    #[test]
    fn decide_infeasible_with_searched_certificate() {
        let s = sys(1, &["m1 - 1", "-m1 + 2"]);
        let v = decide(&s, Strategy::Auto, &SearchConfig::default());
        assert_eq!(v.status, Status::Infeasible);
        let cert = v.certificate.expect("certificate");
        assert!(verify_certificate(&s, &cert));
        // the ladder also ran and is recorded
        assert!(!v.boxlog.is_empty());
    }

    #[test]
    fn decide_unknown_on_exhausted_box_strategy() {
        // feasible set is exactly the curve m1*m2 = 2, invisible to
        // interval pruning and to center probes of these boxes
        let s = sys(2, &["m1*m2 - 2", "-m1*m2 + 2"]);
        let mut cfg = SearchConfig::default();
        cfg.box_budget = 40;
        cfg.region = Some(vec![
            (Rat::from_integer(1.into()), Rat::from_integer(3.into())),
            (Rat::from_integer(1.into()), Rat::from_integer(3.into())),
        ]);
        let v = decide(&s, Strategy::Bnb, &cfg);
        assert_eq!(v.status, Status::Unknown);
        assert!(!v.boxlog.is_empty());
        assert!(v.diagnostics.iter().any(|d| d.contains("unresolved")));
    }

    #[test]
    fn decide_region_scoped_emptiness() {
        // feasible only on (0, 1]; the requested box excludes it
        let s = sys(1, &["m1 - 1"]);
        let mut cfg = SearchConfig::default();
        cfg.region = Some(vec![(Rat::from_integer(2.into()), Rat::from_integer(8.into()))]);
        let v = decide(&s, Strategy::Bnb, &cfg);
        assert_eq!(v.status, Status::Infeasible);
        assert!(v.certificate.is_none());
        assert_eq!(v.boxlog.len(), 1);
        assert!(v.boxlog[0].complete());
        assert!(v.diagnostics.iter().any(|d| d.contains("no claim outside")));
    }

    #[test]
    fn decide_zero_constraint_noted() {
        let s = sys(1, &["0", "m1 - 2"]);
        let v = decide(&s, Strategy::Auto, &SearchConfig::default());
        assert_eq!(v.status, Status::Feasible);
        assert!(v.diagnostics.iter().any(|d| d.contains("identically zero")));
    }

    #[test]
    fn verdict_json_round_trip() {
        let s = corner_k2();
        let v = decide(&s, Strategy::Auto, &SearchConfig::default());
        let json = serde_json::to_string(&v).unwrap();
        let back: Verdict = serde_json::from_str(&json).unwrap();
        assert_eq!(v, back);

        let s = sys(1, &["m1 - 1", "-m1 + 2"]);
        let v = decide(&s, Strategy::Auto, &SearchConfig::default());
        let json = serde_json::to_string(&v).unwrap();
        let back: Verdict = serde_json::from_str(&json).unwrap();
        assert_eq!(v, back);
    }

    #[test]
    fn search_config_json_round_trip() {
        let mut cfg = SearchConfig::default();
        cfg.region = Some(vec![(Rat::new(1.into(), 1000.into()), Rat::from_integer(1000.into()))]);
        cfg.time_budget_ms = Some(2_000);
        let json = serde_json::to_string(&cfg).unwrap();
        let back: SearchConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(cfg, back);
        // invalid budgets rejected on the way in
        let bad = json.replace("\"multistart\":64", "\"multistart\":0");
        assert!(serde_json::from_str::<SearchConfig>(&bad).is_err());
    }
}
