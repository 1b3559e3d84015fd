//! Verification reports: one record per checked condition, with witnesses.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

/// Outcome of a single check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Status {
    Pass,
    Fail,
    /// A size guard stopped an exhaustive search before it could decide.
    Inconclusive,
    /// The condition held on a bounded sample, not on the whole search space.
    Sampled,
    /// The check does not apply to this input (hypotheses unmet).
    Skipped,
    /// Two computations that must agree did not: a bug in this toolkit.
    Discrepancy,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Inconclusive => "inconclusive",
            Status::Sampled => "sampled",
            Status::Skipped => "skipped",
            Status::Discrepancy => "discrepancy",
        }
    }

    pub fn is_failure(self) -> bool {
        matches!(self, Status::Fail | Status::Discrepancy)
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Concrete data exhibiting a failure: ordered `(role, value)` pairs such as
/// `("object", "b")` or `("sieve", "{f,1_b}")`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Witness {
    pub items: Vec<(String, String)>,
}

impl Witness {
    pub fn new() -> Self {
        Witness::default()
    }

    pub fn with(mut self, role: &str, value: impl Into<String>) -> Self {
        self.items.push((role.to_string(), value.into()));
        self
    }

    pub fn get(&self, role: &str) -> Option<&str> {
        self.items.iter().find(|(r, _)| r == role).map(|(_, v)| v.as_str())
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (r, v)) in self.items.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{r}={v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    /// Stable kebab-case name, e.g. `relative-bc`.
    pub name: String,
    /// Human description of the condition being checked.
    pub cites: String,
    pub status: Status,
    pub witness: Option<Witness>,
    /// Guard name when the status is `Inconclusive` or `Sampled`.
    pub guard: Option<String>,
    pub note: Option<String>,
}

impl Check {
    pub fn new(name: &str, cites: &str, status: Status) -> Self {
        Check { name: name.to_string(), cites: cites.to_string(), status, witness: None, guard: None, note: None }
    }

    pub fn pass(name: &str, cites: &str) -> Self {
        Check::new(name, cites, Status::Pass)
    }

    pub fn fail(name: &str, cites: &str, witness: Witness) -> Self {
        Check::new(name, cites, Status::Fail).with_witness(witness)
    }

    /// Pass when `witness` is `None`, fail with it otherwise.
    pub fn from_witness(name: &str, cites: &str, witness: Option<Witness>) -> Self {
        match witness {
            None => Check::pass(name, cites),
            Some(w) => Check::fail(name, cites, w),
        }
    }

    pub fn with_witness(mut self, w: Witness) -> Self {
        self.witness = Some(w);
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn with_guard(mut self, guard: &str) -> Self {
        self.guard = Some(guard.to_string());
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn new() -> Self {
        VerificationReport::default()
    }

    pub fn push(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn extend(&mut self, other: VerificationReport) {
        self.checks.extend(other.checks);
    }

    /// Prefixes every check name with `prefix/`.
    pub fn scoped(mut self, prefix: &str) -> Self {
        for c in &mut self.checks {
            let mut n = String::from(prefix);
            n.push('/');
            n.push_str(&c.name);
            c.name = n;
        }
        self
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn status(&self, name: &str) -> Option<Status> {
        self.get(name).map(|c| c.status)
    }

    /// True iff the named check exists and passed.
    pub fn passes(&self, name: &str) -> bool {
        self.status(name) == Some(Status::Pass)
    }

    /// True iff every check passed.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status == Status::Pass || c.status == Status::Skipped)
    }

    pub fn has_failure(&self) -> bool {
        self.checks.iter().any(|c| c.status.is_failure())
    }

    pub fn has_discrepancy(&self) -> bool {
        self.checks.iter().any(|c| c.status == Status::Discrepancy)
    }

    pub fn failing(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| c.status.is_failure()).map(|c| c.name.as_str()).collect()
    }
}

/// Size guards for exhaustive enumerations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Guards {
    /// Maximum number of arrows into an object for sieve enumeration.
    pub sieve_arrows: usize,
    /// Maximum total section count for exhaustive subpresheaf enumeration.
    pub sections: usize,
    /// Maximum preorder size for exhaustive ideal enumeration.
    pub ideals: usize,
    /// Maximum number of candidates visited by functor/homomorphism searches.
    pub search_budget: u64,
    /// Number of sieves examined by sampled topology validation.
    pub sample_budget: usize,
}

impl Default for Guards {
    fn default() -> Self {
        Guards { sieve_arrows: 20, sections: 16, ideals: 14, search_budget: 1_000_000, sample_budget: 4096 }
    }
}
