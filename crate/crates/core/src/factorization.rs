//! The closed-sieve internal locale `L_A` of a morphism of sites
//! `A : (C, J) → (D, K)` and the site-level data of its
//! hyperconnected–localic factorization.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::cat::{FinFunctor, ObjId};
use crate::error::{Error, Result};
use crate::existential::{existential_topology, ExistentialSite};
use crate::fibred::tau_and_adjunction;
use crate::frame::FiniteFrame;
use crate::locale::{internal_locale_report, InternalLocaleCandidate};
use crate::report::{Check, Guards, Status, VerificationReport};
use crate::topology::{comorphism_report, enumerate_sieves, site_morphism_report, GrothendieckTopology, Sieve};

/// `L_A(c)` is the frame of `K`-closed sieves on `A(c)`; `L_A(f)` pulls
/// sieves back along `A(f)`; `∃_f` closes the sieve generated by the
/// composites with `A(f)`.
#[derive(Debug, Clone)]
pub struct ClosedSieveLocale {
    pub functor: FinFunctor,
    pub target_topology: GrothendieckTopology,
    pub locale: InternalLocaleCandidate,
    /// The sieve of each frame element, object by object.
    pub sieves: Vec<Vec<Sieve>>,
    /// `G(L_A)` with canonical fibre topologies.
    pub site: ExistentialSite,
    /// `i_A : c ↦ (c, maximal sieve on A(c))`.
    pub unit: FinFunctor,
}

impl ClosedSieveLocale {
    pub fn element_of(&self, c: ObjId, s: &Sieve) -> Option<usize> {
        self.sieves[c].iter().position(|t| t == s)
    }
}

pub fn closed_sieve_locale(
    a: &FinFunctor,
    j: &GrothendieckTopology,
    k: &GrothendieckTopology,
    guards: &Guards,
) -> Result<ClosedSieveLocale> {
    let (c, d) = (a.source.clone(), a.target.clone());
    if j.base() != &c || k.base() != &d {
        return Err(Error::Input(format!("`{}` does not run between the bases of the given topologies", a.name)));
    }
    let morphism = site_morphism_report(a, j, k, guards);
    let failing: Vec<&str> = ["cover-preserving", "covering-flat"]
        .into_iter()
        .filter(|n| morphism.status(n) != Some(Status::Pass))
        .collect();
    if !failing.is_empty() {
        return Err(Error::Precondition(format!("`{}` is not a morphism of sites: {}", a.name, failing.join(", "))));
    }
    let mut frames = Vec::with_capacity(c.num_objects());
    let mut sieves = Vec::with_capacity(c.num_objects());
    for x in c.objects() {
        let closed: Vec<Sieve> =
            enumerate_sieves(&d, a.obj(x), guards)?.into_iter().filter(|s| k.is_closed(s)).collect();
        let names: Vec<String> = closed.iter().map(|s| s.display(&d)).collect();
        let bits: Vec<_> = closed.iter().map(|s| s.arrows.clone()).collect();
        let frame = FiniteFrame::from_sets(&format!("ClSv({})", d.object_name(a.obj(x))), &bits, names.clone())?;
        let ordered: Vec<Sieve> = frame
            .elements()
            .iter()
            .map(|e| closed[names.iter().position(|n| n == e).expect("frame element")].clone())
            .collect();
        frames.push(Arc::new(frame));
        sieves.push(ordered);
    }
    let find = |x: ObjId, s: &Sieve| sieves[x].iter().position(|t| t == s);
    let mut maps = Vec::with_capacity(c.num_arrows());
    let mut exists = Vec::with_capacity(c.num_arrows());
    for f in c.arrows() {
        let (src, tgt) = (c.src(f), c.tgt(f));
        let af = a.arr(f);
        let mut m = Vec::with_capacity(sieves[tgt].len());
        for s in &sieves[tgt] {
            m.push(
                find(src, &s.pullback(&d, af))
                    .ok_or_else(|| Error::Precondition("pullback of a closed sieve is not closed".into()))?,
            );
        }
        let mut e = Vec::with_capacity(sieves[src].len());
        for s in &sieves[src] {
            let image = k.close(&Sieve::generated(&d, a.obj(tgt), s.arrows(&d).map(|g| d.compose(af, g))));
            e.push(find(tgt, &image).ok_or_else(|| Error::Precondition("closure is not idempotent".into()))?);
        }
        maps.push(m);
        exists.push(e);
    }
    let locale = InternalLocaleCandidate::new(&format!("L_{}", a.name), j.clone(), frames, maps, Some(exists))?;
    let site = locale.to_site(guards)?;
    let (unit, _) = tau_and_adjunction(&site.total)?;
    Ok(ClosedSieveLocale { functor: a.clone(), target_topology: k.clone(), locale, sieves, site, unit })
}

fn renamed(r: &VerificationReport, from: &str, to: &str) -> Check {
    let mut c = r.get(from).cloned().expect("check present");
    c.name = to.into();
    c
}

/// `z : (c, S) ↦ e` where `S` is generated by a single arrow `e → A(c)`;
/// defined only when `D` is a preorder and every closed sieve is principal.
fn comparison(l: &ClosedSieveLocale) -> core::result::Result<FinFunctor, String> {
    let a = &l.functor;
    let d = &a.target;
    if !d.is_preorder() {
        return Err(format!("`{}` is not a preorder", d.name()));
    }
    let g = &l.site.total;
    let mut obj = Vec::with_capacity(g.objects.len());
    for &(c, x) in &g.objects {
        let s = &l.sieves[c][x];
        let top = d.incoming(s.cod).iter().copied().find(|&f| s.is_subset(&Sieve::principal(d, f)) && s.contains(d, f));
        match top {
            Some(f) => obj.push(d.src(f)),
            None => return Err(format!("{} on `{}` is not principal", s.display(d), d.object_name(s.cod))),
        }
    }
    FinFunctor::into_preorder(&format!("z_{}", a.name), g.total.clone(), d.clone(), obj).map_err(|e| format!("{e}"))
}

/// The internal locale laws of `L_A`, `i_A` as a morphism of sites into the
/// existential topology, the adjunction between the projection and `i_A`,
/// and the hyperconnected criterion for the comparison into `D`.
pub fn factorization_report(l: &ClosedSieveLocale, guards: &Guards) -> Result<VerificationReport> {
    let mut r = internal_locale_report(&l.locale, guards)?.scoped("locale");
    let (jext, _) = existential_topology(&l.site, guards)?;
    let unit = site_morphism_report(&l.unit, &l.locale.topology, &jext, guards);
    r.push(renamed(&unit, "cover-preserving", "unit-cover-preserving"));
    r.push(renamed(&unit, "covering-flat", "unit-covering-flat"));
    let (_, adj) = tau_and_adjunction(&l.site.total)?;
    r.push(renamed(&adj, "tau-adjunction", "unit-right-adjoint"));
    match comparison(l) {
        Ok(z) => {
            let c = comorphism_report(&z, &jext, &l.target_topology, guards);
            r.push(renamed(&c, "cover-reflecting", "comparison-cover-reflecting"));
            r.push(renamed(&c, "closed-sieve-lifting", "comparison-closed-sieve-lifting"));
        }
        Err(why) => {
            for name in ["comparison-cover-reflecting", "comparison-closed-sieve-lifting"] {
                r.push(Check::new(name, CITE_COMPARISON, Status::Inconclusive).with_note(why.clone()));
            }
        }
    }
    Ok(r)
}

const CITE_COMPARISON: &str = "the comparison (c, S) ↦ generator of S is cover-reflecting and closed-sieve-lifting";
