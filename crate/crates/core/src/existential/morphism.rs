use alloc::format;
use alloc::vec::Vec;

use super::site::existential_topology;
use super::ExistentialSite;
use crate::cat::{ArrowId, FinCategory, FinFunctor, ObjId};
use crate::error::{input, Result};
use crate::fibred::{fibration_morphism_report, FibMorphism};
use crate::report::{Check, Guards, Status, VerificationReport, Witness};
use crate::topology::{generate_topology, site_morphism_report, Coverage, GrothendieckTopology};

const SITE_MORPHISM: [&str; 2] = ["cover-preserving", "covering-flat"];

/// A natural isomorphism `a ⇒ b` between parallel functors, searched
/// object by object. `None` when the budget runs out.
fn natural_iso(a: &FinFunctor, b: &FinFunctor, budget: &mut u64) -> Option<core::result::Result<(), Option<ObjId>>> {
    let (s, t) = (&*a.source, &*a.target);
    let candidates: Vec<Vec<ArrowId>> =
        s.objects().map(|x| t.hom(a.obj(x), b.obj(x)).iter().copied().filter(|&g| t.is_iso(g)).collect()).collect();
    if let Some(x) = s.objects().find(|&x| candidates[x].is_empty()) {
        return Some(Err(Some(x)));
    }
    if t.is_preorder() {
        return Some(Ok(()));
    }
    fn go(
        a: &FinFunctor,
        b: &FinFunctor,
        cand: &[Vec<ArrowId>],
        theta: &mut Vec<ArrowId>,
        budget: &mut u64,
    ) -> Option<bool> {
        let (s, t) = (&*a.source, &*a.target);
        let x = theta.len();
        if x == s.num_objects() {
            return Some(true);
        }
        for &g in &cand[x] {
            if *budget == 0 {
                return None;
            }
            *budget -= 1;
            theta.push(g);
            let natural = s.arrows().all(|u| {
                let (p, q) = (s.src(u), s.tgt(u));
                p > x || q > x || t.compose(b.arr(u), theta[p]) == t.compose(theta[q], a.arr(u))
            });
            if natural && go(a, b, cand, theta, budget)? {
                return Some(true);
            }
            theta.pop();
        }
        Some(false)
    }
    match go(a, b, &candidates, &mut Vec::new(), budget)? {
        true => Some(Ok(())),
        false => Some(Err(None)),
    }
}

fn morphism_checks(r: &mut VerificationReport, name: &str, report: &VerificationReport, what: Witness) -> bool {
    let failing: Vec<&str> = SITE_MORPHISM.iter().copied().filter(|c| !report.passes(c)).collect();
    if failing.is_empty() {
        return true;
    }
    r.push(Check::fail(name, "morphism of sites", what.with("check", failing.join(","))));
    false
}

/// A morphism of existential sites: a morphism of fibrations whose
/// components are morphisms of fibre sites and which commutes with the
/// left adjoints up to isomorphism. The induced functor of totals is then
/// checked to be a morphism of sites for the existential topologies.
pub fn check_existential_morphism(
    m: &FibMorphism,
    s: &ExistentialSite,
    s2: &ExistentialSite,
    guards: &Guards,
) -> Result<VerificationReport> {
    if m.source != *s.indexed() || m.target != *s2.indexed() {
        return input(format!("{}: morphism does not connect the given sites", m.name));
    }
    let b = &**s.base();
    let mut r = fibration_morphism_report(m)?.scoped("fibration");
    let mut fibrewise = true;
    for c in b.objects() {
        let rep = site_morphism_report(&m.components[c], &s.fibre_topologies[c], &s2.fibre_topologies[c], guards);
        if !morphism_checks(&mut r, "fibre-site-morphisms", &rep, Witness::new().with("object", b.object_name(c))) {
            fibrewise = false;
            break;
        }
    }
    if fibrewise {
        r.push(Check::pass("fibre-site-morphisms", "morphism of sites"));
    }
    let mut budget = guards.search_budget;
    let mut square = Ok(());
    for a in b.arrows() {
        let (e2, e) = (b.src(a), b.tgt(a));
        let left = s.exists(a).clone();
        let lhs = m.components[e].after(&left)?;
        let rhs = s2.exists(a).after(&m.components[e2])?;
        match natural_iso(&lhs, &rhs, &mut budget) {
            None => {
                square = Err(None);
                break;
            }
            Some(Err(x)) => {
                let w = Witness::new().with("arrow", b.arrow_name(a));
                square = Err(Some(match x {
                    Some(x) => w.with("element", s.fibre(e2).object_name(x)),
                    None => w.with("element", "no natural choice of isomorphisms"),
                }));
                break;
            }
            Some(Ok(())) => {}
        }
    }
    let cites = "α_E ∘ ∃_a ≅ ∃'_a ∘ α_E'";
    r.push(match square {
        Ok(()) => Check::pass("exists-squares", cites),
        Err(Some(w)) => Check::fail("exists-squares", cites, w),
        Err(None) => Check::new("exists-squares", cites, Status::Inconclusive).with_guard("search_budget"),
    });
    if r.passes("fibration/indexed-naturality") {
        let g = m.total_functor(&s.total, &s2.total)?;
        let (ext, _) = existential_topology(s, guards)?;
        let (ext2, _) = existential_topology(s2, guards)?;
        let rep = site_morphism_report(&g, &ext, &ext2, guards);
        if morphism_checks(&mut r, "total-site-morphism", &rep, Witness::new()) {
            r.push(Check::pass("total-site-morphism", "morphism of sites"));
        }
    }
    Ok(r)
}

/// Topology on the total generated by the vertical covering families and,
/// when requested, the singleton cocartesian lifts `(e, η_e(l'))`.
pub fn coorthogonal_topology(
    s: &ExistentialSite,
    include_cocartesian: bool,
    guards: &Guards,
) -> Result<GrothendieckTopology> {
    let g = &s.total;
    let b = &**s.base();
    let mut cov: Coverage = Vec::new();
    for o in g.total.objects() {
        let (e, l) = g.objects[o];
        for sv in s.fibre_topologies[e].covering_sieves(l, guards)? {
            cov.push((o, sv.arrows(s.fibre(e)).map(|r| g.vertical(e, r)).collect()));
        }
    }
    if include_cocartesian {
        for e in b.arrows() {
            for x in s.fibre(b.src(e)).objects() {
                let lift = s.cocartesian_lift(e, x)?;
                cov.push((g.total.tgt(lift), alloc::vec![lift]));
            }
        }
    }
    generate_topology(g.total.clone(), "co-orthogonal", &cov, guards)
}

/// The existential topology `t` is generated by vertical covers and
/// cocartesian lifts, and every such lift is cocartesian and covering.
pub fn check_coorthogonal_generation(
    s: &ExistentialSite,
    t: &GrothendieckTopology,
    guards: &Guards,
) -> Result<VerificationReport> {
    let g = &s.total;
    let b = &**s.base();
    let tc: &FinCategory = &g.total;
    let mut r = VerificationReport::new();
    let mut not_cocart = None;
    let mut not_cover = None;
    for e in b.arrows() {
        for x in s.fibre(b.src(e)).objects() {
            let lift = s.cocartesian_lift(e, x)?;
            if not_cocart.is_none() && !g.is_cocartesian(lift) {
                not_cocart = Some(Witness::new().with("arrow", tc.arrow_name(lift)));
            }
            if not_cover.is_none() && !t.covers_family(tc.tgt(lift), [lift]) {
                not_cover = Some(Witness::new().with("arrow", tc.arrow_name(lift)));
            }
        }
    }
    r.push(Check::from_witness("cocartesian-lifts", "each (e, η_e(l)) is cocartesian", not_cocart));
    r.push(Check::from_witness("cocartesian-singletons-cover", "each cocartesian lift covers its codomain", not_cover));
    let generated = coorthogonal_topology(s, true, guards)?;
    let diff = generated.difference(t, guards)?.map(|sv| {
        Witness::new()
            .with("object", tc.object_name(sv.cod))
            .with("sieve", sv.display(tc))
            .with("covers-in-generated", format!("{}", generated.covers(&sv)))
    });
    r.push(Check::from_witness(
        "coorthogonal-generation",
        "vertical covers and cocartesian lifts generate the topology",
        diff,
    ));
    Ok(r)
}
