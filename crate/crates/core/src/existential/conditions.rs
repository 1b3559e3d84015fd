use alloc::sync::Arc;
use alloc::vec::Vec;

use super::ExistentialSite;
use crate::cat::{
    has_finite_limits, pullback, pullback_preservation_violation, terminal_preservation_violation, ObjId,
};
use crate::frame::FiniteFrame;
use crate::report::{Check, Guards, Status, VerificationReport, Witness};

/// Fibres whose topology is the canonical topology of a finite frame, with
/// that frame.
pub(super) fn canonical_frames(s: &ExistentialSite, guards: &Guards) -> Vec<Option<Arc<FiniteFrame>>> {
    s.base()
        .objects()
        .map(|c| {
            let fib = s.fibre(c);
            let frame = Arc::new(FiniteFrame::from_category(fib).ok()?);
            let can = frame.canonical_topology(fib.clone(), guards).ok()?;
            matches!(can.difference(&s.fibre_topologies[c], guards), Ok(None)).then_some(frame)
        })
        .collect()
}

/// Base with pullbacks, fibres with finite limits, limit-preserving
/// transitions: the total category then has pullbacks computed fibrewise.
pub(super) fn is_cartesian_instance(s: &ExistentialSite) -> bool {
    let d = s.indexed();
    has_finite_limits(&d.base)
        && d.fibres.iter().all(|f| has_finite_limits(f))
        && d.transitions
            .iter()
            .all(|t| terminal_preservation_violation(t).is_none() && pullback_preservation_violation(t).is_none())
}

fn frame_element(frame: &FiniteFrame, fib: &crate::cat::FinCategory, x: ObjId) -> usize {
    frame.index(fib.object_name(x)).expect("frame built from the fibre")
}

/// For every cospan `c : V → Z ← W : d` and `l ∈ L(V)`, the transposes
/// `∃_b(L(a)(l)) → L(d)(∃_c(l))` over spans `c ∘ a = d ∘ b` cover in the
/// fibre over `W`. Frame fibres with their canonical topology are also
/// decided by the join formula, and cartesian instances by the single
/// pullback arrow; any disagreement is a discrepancy.
pub fn check_relative_bc(s: &ExistentialSite, guards: &Guards) -> VerificationReport {
    let b = &**s.base();
    let d = s.indexed();
    let adjoint = s.adjunction_violation().is_none();
    let frames = if adjoint { canonical_frames(s, guards) } else { alloc::vec![None; b.num_objects()] };
    let cartesian = adjoint && is_cartesian_instance(s);
    let mut r = VerificationReport::new();
    let mut failure: Option<Witness> = None;
    let mut discrepancy: Option<Witness> = None;
    'outer: for c in b.arrows() {
        let (v, z) = (b.src(c), b.tgt(c));
        for &dd in b.incoming(z) {
            let w = b.src(dd);
            let fv = &**s.fibre(v);
            let fw = &**s.fibre(w);
            for l in fv.objects() {
                let ex = s.exists(c).obj(l);
                let t = d.transition(dd).obj(ex);
                let witness = || {
                    Witness::new()
                        .with("c", b.arrow_name(c))
                        .with("d", b.arrow_name(dd))
                        .with("element", fv.object_name(l))
                };
                let Some(eta) = s.unit(c, l) else {
                    failure = Some(witness().with("missing", "unit"));
                    break 'outer;
                };
                let mut family = Vec::new();
                let mut images = Vec::new();
                let mut undefined = false;
                for u in b.objects() {
                    for &a in b.hom(u, v) {
                        for &bb in b.hom(u, w) {
                            if b.compose(c, a) != b.compose(dd, bb) {
                                continue;
                            }
                            let member = d.transition(a).arr(eta);
                            images.push(s.exists(bb).obj(s.fibre(u).src(member)));
                            match s.transpose(bb, member, t) {
                                Some(m) => family.push(m),
                                None => undefined = true,
                            }
                        }
                    }
                }
                let covers = !undefined && s.fibre_topologies[w].covers_family(t, family);
                if !covers {
                    failure = Some(witness());
                    break 'outer;
                }
                if let Some(frame) = &frames[w] {
                    let join = frame.join_all(images.iter().map(|&x| frame_element(frame, fw, x)));
                    if (join == frame_element(frame, fw, t)) != covers && discrepancy.is_none() {
                        discrepancy = Some(witness().with("form", "join"));
                    }
                }
                if cartesian && discrepancy.is_none() {
                    let g = &s.total;
                    let top = g.arrow(c, eta, ex);
                    let side = g.cartesian_lift(dd, ex);
                    if let Some(pb) = pullback(&g.total, top, side) {
                        let single =
                            s.total_transpose(pb.p2).is_some_and(|m| s.fibre_topologies[w].covers_family(t, [m]));
                        if single != covers {
                            discrepancy = Some(witness().with("form", "pullback"));
                        }
                    }
                }
            }
        }
    }
    r.push(Check::from_witness("relative-bc", "transposes over commuting spans cover L(d)(∃_c l)", failure));
    r.push(agreement("relative-bc-forms", discrepancy));
    r
}

fn agreement(name: &str, discrepancy: Option<Witness>) -> Check {
    match discrepancy {
        None => Check::pass(name, "equivalent formulations agree"),
        Some(w) => Check::new(name, "equivalent formulations agree", Status::Discrepancy).with_witness(w),
    }
}

/// For every `f : E → E'`, `l ∈ L(E)` and `α : l' → ∃_f(l)`, the transposes
/// `∃_f(m) → l'` over spans `(ρ : m → l, δ : m → L(f)(l'))` with
/// `L(f)(α) ∘ δ = η_f(l) ∘ ρ` cover `l'`. Frame fibres are cross-checked
/// against `∃_f(l ∧ L(f)(l')) = l'`, cartesian instances against the single
/// pullback arrow.
pub fn check_relative_frobenius(s: &ExistentialSite, guards: &Guards) -> VerificationReport {
    let b = &**s.base();
    let d = s.indexed();
    let adjoint = s.adjunction_violation().is_none();
    let frames = if adjoint { canonical_frames(s, guards) } else { alloc::vec![None; b.num_objects()] };
    let cartesian = adjoint && is_cartesian_instance(s);
    let mut r = VerificationReport::new();
    let mut failure: Option<Witness> = None;
    let mut discrepancy: Option<Witness> = None;
    'outer: for f in b.arrows() {
        let (e, e2) = (b.src(f), b.tgt(f));
        let (fe, fe2) = (&**s.fibre(e), &**s.fibre(e2));
        let lf = d.transition(f);
        for l in fe.objects() {
            let ex = s.exists(f).obj(l);
            let witness = |alpha: Option<usize>| {
                let w = Witness::new().with("arrow", b.arrow_name(f)).with("element", fe.object_name(l));
                match alpha {
                    Some(a) => w.with("alpha", fe2.arrow_name(a)),
                    None => w.with("missing", "unit"),
                }
            };
            let Some(eta) = s.unit(f, l) else {
                failure = Some(witness(None));
                break 'outer;
            };
            for &alpha in fe2.incoming(ex) {
                let lp = fe2.src(alpha);
                let target = lf.obj(lp);
                let la = lf.arr(alpha);
                let mut family = Vec::new();
                let mut undefined = false;
                for m in fe.objects() {
                    for &rho in fe.hom(m, l) {
                        for &delta in fe.hom(m, target) {
                            if fe.compose(la, delta) != fe.compose(eta, rho) {
                                continue;
                            }
                            match s.transpose(f, delta, lp) {
                                Some(x) => family.push(x),
                                None => undefined = true,
                            }
                        }
                    }
                }
                let covers = !undefined && s.fibre_topologies[e2].covers_family(lp, family);
                if !covers {
                    failure = Some(witness(Some(alpha)));
                    break 'outer;
                }
                if let (Some(_), Some(fr)) = (&frames[e2], &frames[e]) {
                    let meet = fr.meet(frame_element(fr, fe, l), frame_element(fr, fe, target));
                    let image = s.exists(f).obj(fe.obj(fr.element(meet)).expect("element"));
                    if (image == lp || fe2.isomorphic(image, lp)) != covers && discrepancy.is_none() {
                        discrepancy = Some(witness(Some(alpha)).with("form", "equality"));
                    }
                }
                if cartesian && discrepancy.is_none() {
                    let g = &s.total;
                    let top = g.arrow(f, eta, ex);
                    let side = g.vertical(e2, alpha);
                    if let Some(pb) = pullback(&g.total, top, side) {
                        let single =
                            s.total_transpose(pb.p2).is_some_and(|m| s.fibre_topologies[e2].covers_family(lp, [m]));
                        if single != covers {
                            discrepancy = Some(witness(Some(alpha)).with("form", "pullback"));
                        }
                    }
                }
            }
        }
    }
    r.push(Check::from_witness("relative-frobenius", "transposes over commuting rectangles cover l'", failure));
    r.push(agreement("relative-frobenius-forms", discrepancy));
    r
}
