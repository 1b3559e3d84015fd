//! Sieves and Grothendieck topologies on finite categories.

mod site;

pub use site::{comorphism_report, site_morphism_report};

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::bits::Bits;
use crate::cat::{ArrowId, FinCategory, ObjId};
use crate::error::{input, Error, Result};
use crate::report::{Check, Guards, Status, VerificationReport, Witness};

/// A set of arrows into `cod`, closed under precomposition. Bit `i` stands
/// for the arrow `c.incoming(cod)[i]`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Sieve {
    pub cod: ObjId,
    pub arrows: Bits,
}

impl fmt::Debug for Sieve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Sieve({}: {:?})", self.cod, self.arrows)
    }
}

impl Sieve {
    pub fn empty(c: &FinCategory, x: ObjId) -> Sieve {
        Sieve { cod: x, arrows: Bits::empty(c.incoming(x).len()) }
    }

    pub fn maximal(c: &FinCategory, x: ObjId) -> Sieve {
        Sieve { cod: x, arrows: Bits::full(c.incoming(x).len()) }
    }

    /// The sieve generated by `f`: all composites `f ∘ h`.
    pub fn principal(c: &FinCategory, f: ArrowId) -> Sieve {
        let x = c.tgt(f);
        let mut bits = Bits::empty(c.incoming(x).len());
        for &h in c.incoming(c.src(f)) {
            bits.insert(c.incoming_pos(c.compose(f, h)));
        }
        Sieve { cod: x, arrows: bits }
    }

    /// The sieve generated by a family of arrows into `x`.
    pub fn generated(c: &FinCategory, x: ObjId, family: impl IntoIterator<Item = ArrowId>) -> Sieve {
        let mut s = Sieve::empty(c, x);
        for f in family {
            debug_assert_eq!(c.tgt(f), x);
            s.arrows.union_with(&Sieve::principal(c, f).arrows);
        }
        s
    }

    /// Builds a sieve from an explicit arrow set, rejecting sets that are
    /// not closed under precomposition.
    pub fn from_arrows(c: &FinCategory, x: ObjId, arrows: impl IntoIterator<Item = ArrowId>) -> Result<Sieve> {
        let mut s = Sieve::empty(c, x);
        for f in arrows {
            if c.tgt(f) != x {
                return input(format!("arrow `{}` does not end at `{}`", c.arrow_name(f), c.object_name(x)));
            }
            s.arrows.insert(c.incoming_pos(f));
        }
        if !s.is_sieve(c) {
            return input(format!("{} on `{}` is not closed under precomposition", s.display(c), c.object_name(x)));
        }
        Ok(s)
    }

    #[inline]
    pub fn contains(&self, c: &FinCategory, f: ArrowId) -> bool {
        c.tgt(f) == self.cod && self.arrows.contains(c.incoming_pos(f))
    }

    pub fn arrows<'a>(&'a self, c: &'a FinCategory) -> impl Iterator<Item = ArrowId> + 'a {
        let into = c.incoming(self.cod);
        self.arrows.iter().map(move |i| into[i])
    }

    pub fn is_maximal(&self) -> bool {
        self.arrows.is_full()
    }

    pub fn is_empty(&self) -> bool {
        self.arrows.is_empty()
    }

    pub fn is_subset(&self, other: &Sieve) -> bool {
        self.cod == other.cod && self.arrows.is_subset(&other.arrows)
    }

    pub fn union(&self, other: &Sieve) -> Sieve {
        Sieve { cod: self.cod, arrows: self.arrows.union(&other.arrows) }
    }

    pub fn intersection(&self, other: &Sieve) -> Sieve {
        Sieve { cod: self.cod, arrows: self.arrows.intersection(&other.arrows) }
    }

    /// `f*(S) = {h | f ∘ h ∈ S}` for `f : y → cod`.
    pub fn pullback(&self, c: &FinCategory, f: ArrowId) -> Sieve {
        debug_assert_eq!(c.tgt(f), self.cod);
        let y = c.src(f);
        let into = c.incoming(y);
        let mut bits = Bits::empty(into.len());
        for (i, &h) in into.iter().enumerate() {
            if self.arrows.contains(c.incoming_pos(c.compose(f, h))) {
                bits.insert(i);
            }
        }
        Sieve { cod: y, arrows: bits }
    }

    pub fn is_sieve(&self, c: &FinCategory) -> bool {
        self.arrows(c).all(|f| Sieve::principal(c, f).is_subset(self))
    }

    /// `{a,b}` with arrow identifiers in lexicographic order.
    pub fn display(&self, c: &FinCategory) -> String {
        c.arrow_set(self.arrows(c))
    }
}

pub(crate) type CoverPredicate = Arc<dyn Fn(&FinCategory, &Sieve) -> bool + Send + Sync>;

#[derive(Clone)]
pub enum Covering {
    /// Sorted list of covering sieves per object.
    Explicit(Vec<Vec<Bits>>),
    /// Covering decided on demand; used when enumeration exceeds a guard.
    Predicate(CoverPredicate),
}

/// A Grothendieck topology, or a candidate for one: the axioms are only
/// guaranteed for topologies produced by [`generate_topology`] and are
/// checked by [`validate_topology`].
#[derive(Clone)]
pub struct GrothendieckTopology {
    base: Arc<FinCategory>,
    name: String,
    covering: Covering,
}

impl fmt::Debug for GrothendieckTopology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mode = match self.covering {
            Covering::Explicit(_) => "explicit",
            Covering::Predicate(_) => "predicate",
        };
        write!(f, "GrothendieckTopology({} on {}, {mode})", self.name, self.base.name())
    }
}

impl GrothendieckTopology {
    pub fn base(&self) -> &Arc<FinCategory> {
        &self.base
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: &str) -> Self {
        self.name = name.to_string();
        self
    }

    pub fn is_explicit(&self) -> bool {
        matches!(self.covering, Covering::Explicit(_))
    }

    /// Only maximal sieves cover.
    pub fn trivial(base: Arc<FinCategory>) -> Self {
        let covers = base.objects().map(|x| vec![Bits::full(base.incoming(x).len())]).collect();
        GrothendieckTopology { name: "trivial".into(), base, covering: Covering::Explicit(covers) }
    }

    /// Every sieve covers, including the empty one.
    pub fn chaotic(base: Arc<FinCategory>, guards: &Guards) -> Result<Self> {
        GrothendieckTopology::from_predicate(base, "chaotic", Arc::new(|_, _| true), guards)
    }

    /// An explicit list of covering sieves per object. Each listed set must be
    /// a sieve; the topology axioms are not enforced.
    pub fn from_sieves(base: Arc<FinCategory>, name: &str, sieves: Vec<Sieve>) -> Result<Self> {
        let mut covers: Vec<BTreeSet<Bits>> = vec![BTreeSet::new(); base.num_objects()];
        for s in sieves {
            if s.cod >= base.num_objects() || s.arrows.len() != base.incoming(s.cod).len() {
                return input(format!("{name}: sieve does not belong to `{}`", base.name()));
            }
            if !s.is_sieve(&base) {
                return input(format!("{name}: {} is not a sieve", s.display(&base)));
            }
            covers[s.cod].insert(s.arrows);
        }
        let covers = covers.into_iter().map(|s| s.into_iter().collect()).collect();
        Ok(GrothendieckTopology { base, name: name.to_string(), covering: Covering::Explicit(covers) })
    }

    /// Covering given by a predicate. When every object is within the sieve
    /// guard the predicate is evaluated on all sieves and stored explicitly.
    pub fn from_predicate(base: Arc<FinCategory>, name: &str, pred: CoverPredicate, guards: &Guards) -> Result<Self> {
        let t = GrothendieckTopology { base, name: name.to_string(), covering: Covering::Predicate(pred) };
        Ok(t.materialized(guards))
    }

    /// Explicit form of a predicate topology when within the guard.
    pub fn materialized(self, guards: &Guards) -> Self {
        let Covering::Predicate(pred) = &self.covering else { return self };
        let c = &*self.base;
        if c.objects().any(|x| c.incoming(x).len() > guards.sieve_arrows) {
            return self;
        }
        let mut covers = Vec::with_capacity(c.num_objects());
        for x in c.objects() {
            let all = all_sieves(c, x);
            covers.push(all.into_iter().filter(|b| pred(c, &Sieve { cod: x, arrows: b.clone() })).collect::<Vec<_>>());
        }
        GrothendieckTopology { base: self.base.clone(), name: self.name.clone(), covering: Covering::Explicit(covers) }
    }

    pub fn covers(&self, s: &Sieve) -> bool {
        match &self.covering {
            Covering::Explicit(v) => v[s.cod].binary_search(&s.arrows).is_ok(),
            Covering::Predicate(p) => p(&self.base, s),
        }
    }

    /// Whether the sieve generated by `family` covers `x`.
    pub fn covers_family(&self, x: ObjId, family: impl IntoIterator<Item = ArrowId>) -> bool {
        self.covers(&Sieve::generated(&self.base, x, family))
    }

    /// All covering sieves on `x`, in sieve order.
    pub fn covering_sieves(&self, x: ObjId, guards: &Guards) -> Result<Vec<Sieve>> {
        match &self.covering {
            Covering::Explicit(v) => Ok(v[x].iter().map(|b| Sieve { cod: x, arrows: b.clone() }).collect()),
            Covering::Predicate(_) => {
                Ok(enumerate_sieves(&self.base, x, guards)?.into_iter().filter(|s| self.covers(s)).collect())
            }
        }
    }

    /// `{f into cod(s) | f*(s) covers}`.
    pub fn close(&self, s: &Sieve) -> Sieve {
        close_sieve(self, s)
    }

    pub fn is_closed(&self, s: &Sieve) -> bool {
        &close_sieve(self, s) == s
    }

    /// First object and sieve on which two topologies on the same category
    /// disagree; `None` when they have the same covers.
    pub fn difference(&self, other: &GrothendieckTopology, guards: &Guards) -> Result<Option<Sieve>> {
        let c = &*self.base;
        for x in c.objects() {
            for s in enumerate_sieves(c, x, guards)? {
                if self.covers(&s) != other.covers(&s) {
                    return Ok(Some(s));
                }
            }
        }
        Ok(None)
    }
}

fn all_sieves(c: &FinCategory, x: ObjId) -> Vec<Bits> {
    let down: Vec<Bits> = c.incoming(x).iter().map(|&f| Sieve::principal(c, f).arrows).collect();
    let mut out = crate::bits::down_closed_sets(&down);
    out.sort();
    out
}

/// All sieves on `x`, in a fixed order.
pub fn enumerate_sieves(c: &FinCategory, x: ObjId, guards: &Guards) -> Result<Vec<Sieve>> {
    let n = c.incoming(x).len();
    if n > guards.sieve_arrows {
        return Err(Error::Guard {
            guard: "sieve_arrows",
            detail: format!("{n} arrows into `{}` (limit {})", c.object_name(x), guards.sieve_arrows),
        });
    }
    Ok(all_sieves(c, x).into_iter().map(|arrows| Sieve { cod: x, arrows }).collect())
}

/// `{f into cod(s) | f*(s) is j-covering}`.
pub fn close_sieve(j: &GrothendieckTopology, s: &Sieve) -> Sieve {
    let c = &*j.base;
    let into = c.incoming(s.cod);
    let mut bits = Bits::empty(into.len());
    for (i, &f) in into.iter().enumerate() {
        if s.arrows.contains(i) || j.covers(&s.pullback(c, f)) {
            bits.insert(i);
        }
    }
    Sieve { cod: s.cod, arrows: bits }
}

/// A coverage: families of arrows with a common codomain.
pub type Coverage = Vec<(ObjId, Vec<ArrowId>)>;

/// The smallest topology in which every family of `coverage` generates a
/// covering sieve. Within the sieve guard the covering sieves are computed
/// as a fixpoint and stored; beyond it the result decides covers on demand
/// by the local derivation rule over pullbacks of the queried sieve.
pub fn generate_topology(
    base: Arc<FinCategory>,
    name: &str,
    coverage: &[(ObjId, Vec<ArrowId>)],
    guards: &Guards,
) -> Result<GrothendieckTopology> {
    let c = &*base;
    for (x, fam) in coverage {
        if *x >= c.num_objects() {
            return input(format!("{name}: coverage names an unknown object"));
        }
        if let Some(&f) = fam.iter().find(|&&f| c.tgt(f) != *x) {
            return input(format!(
                "{name}: arrow `{}` in a family on `{}` has another codomain",
                c.arrow_name(f),
                c.object_name(*x)
            ));
        }
    }
    let generators: Vec<Sieve> = coverage.iter().map(|(x, fam)| Sieve::generated(c, *x, fam.iter().copied())).collect();
    if c.objects().any(|x| c.incoming(x).len() > guards.sieve_arrows) {
        let basic = basic_sieves(c, &generators);
        let pred: CoverPredicate = Arc::new(move |c, s| derivable_cover(c, &basic, s));
        return Ok(GrothendieckTopology { base, name: name.to_string(), covering: Covering::Predicate(pred) });
    }
    let covers = generate_fixpoint(c, &generators);
    Ok(GrothendieckTopology { base, name: name.to_string(), covering: Covering::Explicit(covers) })
}

fn generate_fixpoint(c: &FinCategory, generators: &[Sieve]) -> Vec<Vec<Bits>> {
    let all: Vec<Vec<Bits>> = c.objects().map(|x| all_sieves(c, x)).collect();
    let mut cov: Vec<BTreeSet<Bits>> = c.objects().map(|x| BTreeSet::from([Bits::full(c.incoming(x).len())])).collect();
    for g in generators {
        cov[g.cod].insert(g.arrows.clone());
    }
    loop {
        let mut changed = false;
        // pullback stability
        for x in c.objects() {
            let current: Vec<Bits> = cov[x].iter().cloned().collect();
            for b in current {
                let s = Sieve { cod: x, arrows: b };
                for &f in c.incoming(x) {
                    let p = s.pullback(c, f);
                    changed |= cov[p.cod].insert(p.arrows);
                }
            }
        }
        // local character, which includes upward closure
        for x in c.objects() {
            for b in &all[x] {
                if cov[x].contains(b) {
                    continue;
                }
                let s = Sieve { cod: x, arrows: b.clone() };
                let mut r = Bits::empty(c.incoming(x).len());
                for (i, &f) in c.incoming(x).iter().enumerate() {
                    let p = s.pullback(c, f);
                    if cov[p.cod].contains(&p.arrows) {
                        r.insert(i);
                    }
                }
                if cov[x].iter().any(|cv| cv.is_subset(&r)) {
                    cov[x].insert(b.clone());
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    cov.into_iter().map(|s| s.into_iter().collect()).collect()
}

/// Pullbacks of the generating sieves along every arrow, per object.
fn basic_sieves(c: &FinCategory, generators: &[Sieve]) -> Vec<Vec<Bits>> {
    let mut basic: Vec<BTreeSet<Bits>> = vec![BTreeSet::new(); c.num_objects()];
    for g in generators {
        for &f in c.incoming(g.cod) {
            let p = g.pullback(c, f);
            basic[p.cod].insert(p.arrows);
        }
    }
    basic.into_iter().map(|s| s.into_iter().collect()).collect()
}

/// Least-fixpoint evaluation of "S is maximal, or some basic sieve B on its
/// codomain has every `g*(S)`, `g ∈ B`, derivable". Only pullbacks of `S`
/// itself are ever consulted, so the fixpoint runs over at most one sieve
/// per arrow into `cod(S)`.
fn derivable_cover(c: &FinCategory, basic: &[Vec<Bits>], s: &Sieve) -> bool {
    let into = c.incoming(s.cod);
    let pulls: Vec<Sieve> = into.iter().map(|&g| s.pullback(c, g)).collect();
    let mut derived: Vec<bool> = pulls.iter().map(|p| p.is_maximal()).collect();
    let id_pos = c.incoming_pos(c.id(s.cod));
    loop {
        let mut changed = false;
        for (k, &g) in into.iter().enumerate() {
            if derived[k] {
                continue;
            }
            let y = c.src(g);
            let ok = basic[y].iter().any(|b| {
                b.iter().all(|i| {
                    let h = c.incoming(y)[i];
                    derived[c.incoming_pos(c.compose(g, h))]
                })
            });
            if ok {
                derived[k] = true;
                changed = true;
            }
        }
        if !changed {
            return derived[id_pos];
        }
    }
}

/// Sieves examined when an object is beyond the enumeration guard: the
/// empty and maximal sieves, then sieves generated by one, two, three, ...
/// arrows, up to the sample budget.
fn sample_sieves(c: &FinCategory, x: ObjId, budget: usize) -> Vec<Sieve> {
    let into = c.incoming(x);
    let n = into.len();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let mut push = |s: Sieve, out: &mut Vec<Sieve>| {
        if seen.insert(s.arrows.clone()) {
            out.push(s);
        }
    };
    push(Sieve::empty(c, x), &mut out);
    push(Sieve::maximal(c, x), &mut out);
    let mut k = 1;
    while out.len() < budget && k <= n {
        let mut idx: Vec<usize> = (0..k).collect();
        loop {
            if out.len() >= budget {
                break;
            }
            push(Sieve::generated(c, x, idx.iter().map(|&i| into[i])), &mut out);
            // next k-combination
            let mut p = k;
            while p > 0 && idx[p - 1] == n - k + p - 1 {
                p -= 1;
            }
            if p == 0 {
                break;
            }
            idx[p - 1] += 1;
            for q in p..k {
                idx[q] = idx[q - 1] + 1;
            }
        }
        k += 1;
    }
    out
}

const CITE_MAX: &str = "the maximal sieve on every object covers";
const CITE_STAB: &str = "pullback stability: f*(S) covers whenever S covers";
const CITE_TRANS: &str = "transitivity: S covers when f*(S) covers for all f in a covering R";

/// Checks the three topology axioms. Objects beyond the sieve guard are
/// checked on a deterministic sample and the affected checks report
/// `sampled` unless a violation turns up.
pub fn validate_topology(j: &GrothendieckTopology, guards: &Guards) -> VerificationReport {
    let c = &*j.base;
    let mut sampled = false;
    let sieves: Vec<Vec<Sieve>> = c
        .objects()
        .map(|x| match enumerate_sieves(c, x, guards) {
            Ok(v) => v,
            Err(_) => {
                sampled = true;
                sample_sieves(c, x, guards.sample_budget)
            }
        })
        .collect();
    let covering: Vec<Vec<&Sieve>> = sieves.iter().map(|v| v.iter().filter(|s| j.covers(s)).collect()).collect();

    let mut r = VerificationReport::new();
    let max = c.objects().find(|&x| !j.covers(&Sieve::maximal(c, x)));
    r.push(Check::from_witness(
        "topology-maximal",
        CITE_MAX,
        max.map(|x| Witness::new().with("object", c.object_name(x)).with("sieve", Sieve::maximal(c, x).display(c))),
    ));

    let mut stab = None;
    'outer: for x in c.objects() {
        for s in &covering[x] {
            for &f in c.incoming(x) {
                if !j.covers(&s.pullback(c, f)) {
                    stab = Some(
                        Witness::new()
                            .with("object", c.object_name(x))
                            .with("sieve", s.display(c))
                            .with("arrow", c.arrow_name(f)),
                    );
                    break 'outer;
                }
            }
        }
    }
    r.push(finish(Check::from_witness("topology-stability", CITE_STAB, stab), sampled));

    let mut trans = None;
    'outer: for x in c.objects() {
        for s in &sieves[x] {
            if j.covers(s) {
                continue;
            }
            let mut locally = Bits::empty(c.incoming(x).len());
            for (i, &f) in c.incoming(x).iter().enumerate() {
                if j.covers(&s.pullback(c, f)) {
                    locally.insert(i);
                }
            }
            if let Some(rc) = covering[x].iter().find(|rc| rc.arrows.is_subset(&locally)) {
                trans = Some(
                    Witness::new()
                        .with("object", c.object_name(x))
                        .with("sieve", s.display(c))
                        .with("covering", rc.display(c)),
                );
                break 'outer;
            }
        }
    }
    r.push(finish(Check::from_witness("topology-transitivity", CITE_TRANS, trans), sampled));
    r
}

fn finish(check: Check, sampled: bool) -> Check {
    if sampled && check.status == Status::Pass {
        let mut c = check;
        c.status = Status::Sampled;
        c.with_guard("sieve_arrows")
    } else {
        check
    }
}

#[cfg(test)]
mod tests;
