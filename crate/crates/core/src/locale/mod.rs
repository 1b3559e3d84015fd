//! Internal locales over a finite site, ideal completions (plain and
//! fibred), the fibre sites of an existential site and the universal
//! property of the fibred ideal completion.

mod completion;
mod fibre_site;
mod ideals;

pub use completion::{
    fibred_completion_report, fibred_ideal_completion, universal_property_probe, FibredCompletion, FibredPreorderSite,
};
pub use fibre_site::{fibre_site, fibre_site_report, FibreSite};
pub use ideals::{ideal_completion, ideal_completion_report, FrameOfIdeals};

use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::cat::{has_finite_limits, pullback, ArrowId, FinCategory, ObjId};
use crate::error::{input, Result};
use crate::existential::{check_relative_bc, check_relative_frobenius, Adjoint, ExistentialSite};
use crate::fibred::IndexedCat;
use crate::frame::{frame_hom_violation, validate_frame, FiniteFrame};
use crate::presheaf::{sheaf_report, FinPresheaf};
use crate::report::{Check, Guards, Status, VerificationReport, Witness};
use crate::topology::GrothendieckTopology;

/// A frame-valued functor on a finite site: a frame over every object, a
/// map `L(f) : L(d) → L(c)` for every arrow `f : c → d`, and optionally a
/// table for `∃_f : L(c) → L(d)`. Elements are frame indices.
#[derive(Debug, Clone)]
pub struct InternalLocaleCandidate {
    pub name: String,
    pub topology: GrothendieckTopology,
    pub frames: Vec<Arc<FiniteFrame>>,
    pub maps: Vec<Vec<usize>>,
    pub exists: Option<Vec<Vec<usize>>>,
}

impl InternalLocaleCandidate {
    pub fn new(
        name: &str,
        topology: GrothendieckTopology,
        frames: Vec<Arc<FiniteFrame>>,
        maps: Vec<Vec<usize>>,
        exists: Option<Vec<Vec<usize>>>,
    ) -> Result<Self> {
        let b = topology.base().clone();
        if frames.len() != b.num_objects() || maps.len() != b.num_arrows() {
            return input(format!("{name}: one frame per object and one map per arrow are required"));
        }
        for f in b.arrows() {
            let (c, d) = (b.src(f), b.tgt(f));
            if maps[f].len() != frames[d].len() || maps[f].iter().any(|&x| x >= frames[c].len()) {
                return input(format!(
                    "{name}: map along `{}` is not a map L({}) → L({})",
                    b.arrow_name(f),
                    b.object_name(d),
                    b.object_name(c)
                ));
            }
        }
        if let Some(ex) = &exists {
            if ex.len() != b.num_arrows() {
                return input(format!("{name}: one ∃ table per arrow is required"));
            }
            for f in b.arrows() {
                let (c, d) = (b.src(f), b.tgt(f));
                if ex[f].len() != frames[c].len() || ex[f].iter().any(|&x| x >= frames[d].len()) {
                    return input(format!(
                        "{name}: ∃ along `{}` is not a map L({}) → L({})",
                        b.arrow_name(f),
                        b.object_name(c),
                        b.object_name(d)
                    ));
                }
            }
        }
        Ok(InternalLocaleCandidate { name: name.to_string(), topology, frames, maps, exists })
    }

    /// Reads an indexed category with lattice fibres as a candidate over the
    /// base of `topology`.
    pub fn from_indexed(name: &str, d: &IndexedCat, topology: GrothendieckTopology) -> Result<Self> {
        if topology.base() != &d.base {
            return input(format!("{name}: the topology lives on another base"));
        }
        let mut frames = Vec::with_capacity(d.fibres.len());
        for fib in &d.fibres {
            frames.push(Arc::new(FiniteFrame::from_category(fib)?));
        }
        let idx = |c: ObjId, x: ObjId| frames[c].index(d.fibres[c].object_name(x)).expect("frame of the fibre");
        let maps = d
            .base
            .arrows()
            .map(|f| d.fibres[d.base.tgt(f)].objects().map(|y| idx(d.base.src(f), d.transitions[f].obj(y))).collect())
            .collect();
        InternalLocaleCandidate::new(name, topology, frames, maps, None)
    }

    pub fn base(&self) -> &Arc<FinCategory> {
        self.topology.base()
    }

    /// The supplied `∃_f`, or `x ↦ ⋀{y | x ≤ L(f)(y)}`, which is the left
    /// adjoint whenever `L(f)` preserves meets.
    pub fn exists_map(&self, f: ArrowId) -> Vec<usize> {
        if let Some(ex) = &self.exists {
            return ex[f].clone();
        }
        let b = &**self.base();
        let (src, tgt) = (&self.frames[b.src(f)], &self.frames[b.tgt(f)]);
        (0..src.len()).map(|x| tgt.meet_all((0..tgt.len()).filter(|&y| src.leq(x, self.maps[f][y])))).collect()
    }

    /// The fibres as preorder categories, elements in frame order.
    pub fn indexed(&self) -> Result<IndexedCat> {
        let fibres = self.frames.iter().map(|f| Arc::new(f.as_category())).collect();
        IndexedCat::from_preorder_maps(&self.name, self.base().clone(), fibres, self.maps.clone())
    }

    /// The fibred site with canonical fibre topologies and the `∃` tables.
    pub fn to_site(&self, guards: &Guards) -> Result<ExistentialSite> {
        let d = Arc::new(self.indexed()?);
        let mut tops = Vec::with_capacity(self.frames.len());
        for (c, f) in self.frames.iter().enumerate() {
            tops.push(f.canonical_topology(d.fibres[c].clone(), guards)?);
        }
        let mut adjoints = Vec::with_capacity(self.maps.len());
        for f in self.base().arrows() {
            adjoints.push(Adjoint::from_preorder_table(&d, f, self.exists_map(f))?);
        }
        ExistentialSite::new(&self.name, d, tops, adjoints)
    }

    /// The underlying set-valued functor.
    pub fn presheaf(&self) -> FinPresheaf {
        let sections = self.frames.iter().map(|f| f.elements().to_vec()).collect();
        FinPresheaf::new(self.base().clone(), sections, self.maps.clone()).expect("maps checked on construction")
    }
}

fn frames_and_homs(l: &InternalLocaleCandidate) -> Option<Witness> {
    let b = &**l.base();
    for c in b.objects() {
        let v = validate_frame(&l.frames[c]);
        if let Some(name) = v.failing().first() {
            return Some(Witness::new().with("object", b.object_name(c)).with("law", *name));
        }
    }
    for f in b.arrows() {
        let (c, d) = (b.src(f), b.tgt(f));
        if let Some(w) = frame_hom_violation(&l.frames[d], &l.frames[c], &l.maps[f]) {
            let mut out = Witness::new().with("arrow", b.arrow_name(f));
            out.items.extend(w.items);
            return Some(out);
        }
        if b.is_identity(f) && l.maps[f].iter().enumerate().any(|(i, &j)| i != j) {
            return Some(Witness::new().with("arrow", b.arrow_name(f)).with("law", "identity"));
        }
    }
    for f in b.arrows() {
        for &g in b.arrows().filter(|&g| b.src(g) == b.tgt(f)).collect::<Vec<_>>().iter() {
            let gf = b.compose(g, f);
            let fr = &l.frames[b.tgt(g)];
            if let Some(z) = (0..fr.len()).find(|&z| l.maps[gf][z] != l.maps[f][l.maps[g][z]]) {
                return Some(
                    Witness::new()
                        .with("arrow", b.arrow_name(g))
                        .with("arrow", b.arrow_name(f))
                        .with("element", fr.element(z)),
                );
            }
        }
    }
    None
}

fn adjunction_violation(l: &InternalLocaleCandidate, ex: &[Vec<usize>]) -> Option<Witness> {
    let b = &**l.base();
    for f in b.arrows() {
        let (src, tgt) = (&l.frames[b.src(f)], &l.frames[b.tgt(f)]);
        for (x, &ex_x) in ex[f].iter().enumerate().take(src.len()) {
            for y in 0..tgt.len() {
                if tgt.leq(ex_x, y) != src.leq(x, l.maps[f][y]) {
                    return Some(
                        Witness::new()
                            .with("arrow", b.arrow_name(f))
                            .with("element", src.element(x))
                            .with("target", tgt.element(y)),
                    );
                }
            }
        }
    }
    None
}

fn sheaf_check(l: &InternalLocaleCandidate, guards: &Guards) -> Check {
    const CITE: &str = "the underlying set-valued functor is a sheaf for the base topology";
    let r = sheaf_report(&l.topology, &l.presheaf(), guards);
    if let Some(c) = r.checks.iter().find(|c| c.status.is_failure()) {
        let mut w = c.witness.clone().unwrap_or_default();
        w.items.insert(0, ("condition".to_string(), c.name.clone()));
        return Check::fail("sheaf", CITE, w);
    }
    if let Some(c) = r.checks.iter().find(|c| c.status == Status::Inconclusive) {
        let mut out = Check::new("sheaf", CITE, Status::Inconclusive);
        out.guard = c.guard.clone();
        out.note = c.note.clone();
        return out;
    }
    Check::pass("sheaf", CITE)
}

/// `L(d) ∃_c l = ∃_b L(a) l` for every pullback `c ∘ a = d ∘ b` that exists.
fn pullback_bc(l: &InternalLocaleCandidate, ex: &[Vec<usize>]) -> Option<Witness> {
    let b = &**l.base();
    for c in b.arrows() {
        for &d in b.incoming(b.tgt(c)) {
            let Some(pb) = pullback(b, c, d) else { continue };
            let fv = &l.frames[b.src(c)];
            for x in 0..fv.len() {
                if l.maps[d][ex[c][x]] != ex[pb.p2][l.maps[pb.p1][x]] {
                    return Some(
                        Witness::new()
                            .with("c", b.arrow_name(c))
                            .with("d", b.arrow_name(d))
                            .with("element", fv.element(x)),
                    );
                }
            }
        }
    }
    None
}

/// `L(d)(∃_c l) = ⋁ ∃_b(L(a)(l))` over all spans with `c ∘ a = d ∘ b`.
fn span_bc(l: &InternalLocaleCandidate, ex: &[Vec<usize>]) -> Option<Witness> {
    let b = &**l.base();
    for c in b.arrows() {
        let v = b.src(c);
        for &d in b.incoming(b.tgt(c)) {
            let w = b.src(d);
            let fv = &l.frames[v];
            let fw = &l.frames[w];
            for x in 0..fv.len() {
                let mut join = fw.bottom();
                for u in b.objects() {
                    for &a in b.hom(u, v) {
                        for &bb in b.hom(u, w) {
                            if b.compose(c, a) == b.compose(d, bb) {
                                join = fw.join(join, ex[bb][l.maps[a][x]]);
                            }
                        }
                    }
                }
                if l.maps[d][ex[c][x]] != join {
                    return Some(
                        Witness::new()
                            .with("c", b.arrow_name(c))
                            .with("d", b.arrow_name(d))
                            .with("element", fv.element(x)),
                    );
                }
            }
        }
    }
    None
}

/// `∃_a(L(a)(l') ∧ l) = ∃_a(l) ∧ l'`.
fn frobenius(l: &InternalLocaleCandidate, ex: &[Vec<usize>]) -> Option<Witness> {
    let b = &**l.base();
    for a in b.arrows() {
        let (fe, fe2) = (&l.frames[b.src(a)], &l.frames[b.tgt(a)]);
        for x in 0..fe.len() {
            for x2 in 0..fe2.len() {
                if ex[a][fe.meet(l.maps[a][x2], x)] != fe2.meet(ex[a][x], x2) {
                    return Some(
                        Witness::new()
                            .with("arrow", b.arrow_name(a))
                            .with("element", fe.element(x))
                            .with("element'", fe2.element(x2)),
                    );
                }
            }
        }
    }
    None
}

/// Every condition of an internal locale, checked directly (frames, frame
/// homomorphisms, left adjoints, sheaf, Beck–Chevalley on pullback squares,
/// Frobenius), the span form of Beck–Chevalley, the relative conditions of
/// the associated fibred site, and on bases with finite limits the
/// agreement of the direct pair with the relative pair.
pub fn internal_locale_report(l: &InternalLocaleCandidate, guards: &Guards) -> Result<VerificationReport> {
    let b = &**l.base();
    let mut r = VerificationReport::new();
    let frames = frames_and_homs(l);
    let frames_ok = frames.is_none();
    r.push(Check::from_witness(
        "frames-and-homs",
        "every fibre is a frame and every transition a frame homomorphism, functorially",
        frames,
    ));
    let ex: Vec<Vec<usize>> = b.arrows().map(|f| l.exists_map(f)).collect();
    let adj = adjunction_violation(l, &ex);
    let adjoint = adj.is_none();
    r.push(Check::from_witness("left-adjoints", "∃_f x ≤ y iff x ≤ L(f) y", adj));
    r.push(sheaf_check(l, guards));
    let bc = pullback_bc(l, &ex);
    let frob = frobenius(l, &ex);
    let absolute = bc.is_none() && frob.is_none();
    r.push(Check::from_witness("beck-chevalley", "L(d) ∘ ∃_c = ∃_b ∘ L(a) on every pullback square", bc));
    r.push(Check::from_witness("frobenius", "∃_a(L(a)(l') ∧ l) = ∃_a(l) ∧ l'", frob));
    r.push(Check::from_witness(
        "span-bc",
        "L(d)(∃_c l) is the join of ∃_b(L(a)(l)) over all spans with c ∘ a = d ∘ b",
        span_bc(l, &ex),
    ));
    match l.to_site(guards) {
        Ok(site) => {
            r.extend(check_relative_bc(&site, guards));
            r.extend(check_relative_frobenius(&site, guards));
        }
        Err(e) => {
            for name in ["relative-bc", "relative-frobenius"] {
                r.push(
                    Check::new(name, "relative condition of the associated fibred site", Status::Skipped)
                        .with_note(format!("{e}")),
                );
            }
        }
    }
    const CITE: &str = "on a base with finite limits, Beck–Chevalley and Frobenius hold iff their relative forms hold";
    let eq = if !has_finite_limits(b) {
        Check::new("bc-frobenius-equivalence", CITE, Status::Skipped).with_note("base lacks finite limits")
    } else if !frames_ok || !adjoint {
        Check::new("bc-frobenius-equivalence", CITE, Status::Skipped)
            .with_note("fibres are not frames with left adjoints")
    } else {
        let relative = r.passes("relative-bc") && r.passes("relative-frobenius");
        if relative == absolute {
            Check::pass("bc-frobenius-equivalence", CITE)
        } else {
            Check::new("bc-frobenius-equivalence", CITE, Status::Discrepancy).with_witness(
                Witness::new()
                    .with("absolute", if absolute { "true" } else { "false" })
                    .with("relative", if relative { "true" } else { "false" }),
            )
        }
    };
    r.push(eq);
    Ok(r)
}
