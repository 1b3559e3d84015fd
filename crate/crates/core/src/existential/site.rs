use alloc::format;
use alloc::string::ToString;
use alloc::sync::Arc;
use alloc::vec::Vec;

use super::conditions::{check_relative_bc, check_relative_frobenius};
use super::ExistentialSite;
use crate::cat::{ArrowId, FinCategory, ObjId};
use crate::error::Result;
use crate::fibred::giraud_topology;
use crate::report::{Check, Guards, Status, VerificationReport, Witness};
use crate::topology::{enumerate_sieves, validate_topology, CoverPredicate, GrothendieckTopology, Sieve};

/// The structure every fibred site must have: valid fibre topologies,
/// cover-preserving transitions and genuine adjunctions `∃_f ⊣ L(f)`.
pub fn fibred_site_report(s: &ExistentialSite, guards: &Guards) -> Result<VerificationReport> {
    let b = &**s.base();
    let mut r = VerificationReport::new();
    let mut bad = None;
    for c in b.objects() {
        let v = validate_topology(&s.fibre_topologies[c], guards);
        if let Some(name) = v.failing().first() {
            bad = Some(Witness::new().with("object", b.object_name(c)).with("check", *name));
            break;
        }
    }
    r.push(Check::from_witness("fibre-topologies", "each fibre topology is a Grothendieck topology", bad));
    let mut bad = None;
    'o: for f in b.arrows() {
        let (c, d) = (b.src(f), b.tgt(f));
        let lf = s.indexed().transition(f);
        for y in s.fibre(d).objects() {
            for sv in s.fibre_topologies[d].covering_sieves(y, guards)? {
                let image: Vec<ArrowId> = sv.arrows(s.fibre(d)).map(|a| lf.arr(a)).collect();
                if !s.fibre_topologies[c].covers_family(lf.obj(y), image) {
                    bad = Some(Witness::new().with("arrow", b.arrow_name(f)).with("sieve", sv.display(s.fibre(d))));
                    break 'o;
                }
            }
        }
    }
    r.push(Check::from_witness("transitions-cover-preserving", "each L(f) sends covers to covers", bad));
    r.push(Check::from_witness("adjunction", "Hom(∃_f x, y) ≅ Hom(x, L(f) y) naturally", s.adjunction_violation()));
    Ok(r)
}

/// Covering predicate of the existential topology: a sieve on `(E, l)`
/// covers when the transposes `∃_e(l_i) → l` of its arrows cover `l`.
pub(super) fn existential_predicate(s: &ExistentialSite) -> CoverPredicate {
    let transposes: Vec<Option<ArrowId>> = s.total.total.arrows().map(|a| s.total_transpose(a)).collect();
    let objects = s.total.objects.clone();
    let tops = s.fibre_topologies.clone();
    Arc::new(move |t: &FinCategory, sv: &Sieve| {
        let (e, l) = objects[sv.cod];
        let family: Vec<ArrowId> = sv.arrows(t).filter_map(|a| transposes[a]).collect();
        tops[e].covers_family(l, family)
    })
}

/// The existential topology with its validation. When the site is a fibred
/// site with verified adjunctions, validity must coincide with the relative
/// Beck–Chevalley and Frobenius conditions; a mismatch is a discrepancy.
pub fn existential_topology(
    s: &ExistentialSite,
    guards: &Guards,
) -> Result<(GrothendieckTopology, VerificationReport)> {
    let ext =
        GrothendieckTopology::from_predicate(s.total.total.clone(), "existential", existential_predicate(s), guards)?;
    let validity = validate_topology(&ext, guards);
    let mut r = validity.clone().scoped("existential");
    let pre = fibred_site_report(s, guards)?;
    let bc = check_relative_bc(s, guards);
    let frob = check_relative_frobenius(s, guards);
    let cites = "topology exactly when Beck–Chevalley and Frobenius hold";
    let check = if !pre.passed() {
        Check::new("existential-biconditional", cites, Status::Skipped)
            .with_note(format!("fibred site conditions fail: {}", pre.failing().join(", ")))
    } else if validity.checks.iter().any(|c| c.status != Status::Pass && !c.status.is_failure()) {
        Check::new("existential-biconditional", cites, Status::Inconclusive).with_guard("sieve_arrows")
    } else {
        let valid = validity.passed();
        let conds = bc.passes("relative-bc") && frob.passes("relative-frobenius");
        let w = Witness::new()
            .with("topology", valid.to_string())
            .with("beck-chevalley", bc.passes("relative-bc").to_string())
            .with("frobenius", frob.passes("relative-frobenius").to_string());
        if valid == conds {
            Check::pass("existential-biconditional", cites).with_witness(w)
        } else {
            Check::new("existential-biconditional", cites, Status::Discrepancy).with_witness(w)
        }
    };
    r.push(check);
    Ok((ext, r))
}

/// `L(f)(T)` as a sieve on `L(f)(x)`.
fn image_sieve(s: &ExistentialSite, f: ArrowId, t: &Sieve) -> Sieve {
    let d = s.base().tgt(f);
    let c = s.base().src(f);
    let lf = s.indexed().transition(f);
    Sieve::generated(s.fibre(c), lf.obj(t.cod), t.arrows(s.fibre(d)).map(|a| lf.arr(a)))
}

fn open_violation(s: &ExistentialSite, guards: &Guards) -> Result<Option<Witness>> {
    let b = &**s.base();
    for f in b.arrows() {
        let (c, d) = (b.src(f), b.tgt(f));
        let ex = s.exists(f);
        for x in s.fibre(c).objects() {
            for sv in s.fibre_topologies[c].covering_sieves(x, guards)? {
                let image: Vec<ArrowId> = sv.arrows(s.fibre(c)).map(|a| ex.arr(a)).collect();
                if !s.fibre_topologies[d].covers_family(ex.obj(x), image) {
                    return Ok(Some(
                        Witness::new().with("arrow", b.arrow_name(f)).with("sieve", sv.display(s.fibre(c))),
                    ));
                }
            }
        }
    }
    Ok(None)
}

fn reflecting_violation(s: &ExistentialSite, j: &GrothendieckTopology, guards: &Guards) -> Result<Option<Witness>> {
    let b = &**s.base();
    for c in b.objects() {
        let covers = j.covering_sieves(c, guards)?;
        for x in s.fibre(c).objects() {
            for t in enumerate_sieves(s.fibre(c), x, guards)? {
                if s.fibre_topologies[c].covers(&t) {
                    continue;
                }
                for sv in &covers {
                    if sv.arrows(b).all(|f| s.fibre_topologies[b.src(f)].covers(&image_sieve(s, f, &t))) {
                        return Ok(Some(
                            Witness::new()
                                .with("object", b.object_name(c))
                                .with("cover", sv.display(b))
                                .with("family", t.display(s.fibre(c))),
                        ));
                    }
                }
            }
        }
    }
    Ok(None)
}

/// The generator of the closure of `t` when that closure is principal.
fn closure_generator(j: &GrothendieckTopology, t: &Sieve) -> Option<ArrowId> {
    let c = &**j.base();
    let closed = j.close(t);
    let g = closed.arrows(c).find(|&g| Sieve::principal(c, g) == closed);
    g
}

fn linearization_violation(s: &ExistentialSite, guards: &Guards) -> Result<Option<Witness>> {
    let b = &**s.base();
    for c in b.objects() {
        let fib = &**s.fibre(c);
        for x in fib.objects() {
            for t in enumerate_sieves(fib, x, guards)? {
                let Some(g) = closure_generator(&s.fibre_topologies[c], &t) else {
                    return Ok(Some(Witness::new().with("object", b.object_name(c)).with("sieve", t.display(fib))));
                };
                for &f in b.incoming(c) {
                    let lf = s.indexed().transition(f);
                    let image = image_sieve(s, f, &t);
                    let fc = &**s.fibre(b.src(f));
                    let Some(h) = closure_generator(&s.fibre_topologies[b.src(f)], &image) else { continue };
                    if !fc.isomorphic(fc.src(h), lf.obj(fib.src(g))) {
                        return Ok(Some(
                            Witness::new()
                                .with("arrow", b.arrow_name(f))
                                .with("sieve", t.display(fib))
                                .with("generator", fib.object_name(fib.src(g))),
                        ));
                    }
                }
            }
        }
    }
    Ok(None)
}

fn prestack_violation(s: &ExistentialSite, j: &GrothendieckTopology, guards: &Guards) -> Result<Option<Witness>> {
    let b = &**s.base();
    for c in b.objects() {
        let fib = &**s.fibre(c);
        for sv in j.covering_sieves(c, guards)? {
            for x in fib.objects() {
                for y in fib.objects() {
                    if fib.leq(x, y) {
                        continue;
                    }
                    let local = sv.arrows(b).all(|f| {
                        let lf = s.indexed().transition(f);
                        s.fibre(b.src(f)).leq(lf.obj(x), lf.obj(y))
                    });
                    if local {
                        return Ok(Some(
                            Witness::new()
                                .with("object", b.object_name(c))
                                .with("cover", sv.display(b))
                                .with("pair", format!("{} ≤ {}", fib.object_name(x), fib.object_name(y))),
                        ));
                    }
                }
            }
        }
    }
    Ok(None)
}

enum Descent {
    Effective,
    Ineffective(Witness),
    Budget,
}

fn compatible(s: &ExistentialSite, arrows: &[ArrowId], choice: &[ObjId], f: ArrowId, x: ObjId) -> bool {
    let b = &**s.base();
    // For u with outer ∘ u = inner, the element over inner is L(u) of the one over outer.
    let fits = |outer: ArrowId, oc: ObjId, inner: ArrowId, ic: ObjId| {
        b.hom(b.src(inner), b.src(outer)).iter().all(|&u| {
            b.compose(outer, u) != inner || s.fibre(b.src(inner)).isomorphic(s.indexed().transition(u).obj(oc), ic)
        })
    };
    arrows.iter().zip(choice).all(|(&g, &y)| fits(f, x, g, y) && fits(g, y, f, x))
}

fn descend(
    s: &ExistentialSite,
    c: ObjId,
    sv: &Sieve,
    arrows: &[ArrowId],
    choice: &mut Vec<ObjId>,
    budget: &mut u64,
) -> Option<Descent> {
    let b = &**s.base();
    let i = choice.len();
    if i == arrows.len() {
        let glues = s.fibre(c).objects().any(|x| {
            arrows
                .iter()
                .zip(choice.iter())
                .all(|(&f, &xf)| s.fibre(b.src(f)).isomorphic(s.indexed().transition(f).obj(x), xf))
        });
        if glues {
            return None;
        }
        let family: Vec<_> = arrows
            .iter()
            .zip(choice.iter())
            .map(|(&f, &x)| format!("{}:{}", b.arrow_name(f), s.fibre(b.src(f)).object_name(x)))
            .collect();
        return Some(Descent::Ineffective(
            Witness::new()
                .with("object", b.object_name(c))
                .with("cover", sv.display(b))
                .with("family", family.join(",")),
        ));
    }
    for x in s.fibre(b.src(arrows[i])).objects() {
        if *budget == 0 {
            return Some(Descent::Budget);
        }
        *budget -= 1;
        if compatible(s, &arrows[..i], choice, arrows[i], x) {
            choice.push(x);
            if let Some(d) = descend(s, c, sv, arrows, choice, budget) {
                return Some(d);
            }
            choice.pop();
        }
    }
    None
}

/// Every compatible family of elements over a covering sieve glues.
fn stack_check(s: &ExistentialSite, j: &GrothendieckTopology, guards: &Guards) -> Result<Descent> {
    let b = &**s.base();
    let mut budget = guards.search_budget;
    for c in b.objects() {
        for sv in j.covering_sieves(c, guards)? {
            let arrows: Vec<ArrowId> = sv.arrows(b).collect();
            if let Some(d) = descend(s, c, &sv, &arrows, &mut Vec::new(), &mut budget) {
                return Ok(d);
            }
        }
    }
    Ok(Descent::Effective)
}

fn implication(name: &str, cites: &str, premise: bool, conclusion: bool) -> Check {
    if !premise || conclusion {
        Check::pass(name, cites)
    } else {
        Check::new(name, cites, Status::Discrepancy).with_note("premises hold but the conclusion fails")
    }
}

/// The predicates of an existential site over a base topology `j`: open,
/// J-reflecting, reflecting linearization, containment of the Giraud
/// topology, prestack and stack (preorder fibres), and the implications
/// between them.
pub fn existential_site_report(
    s: &ExistentialSite,
    j: &GrothendieckTopology,
    guards: &Guards,
) -> Result<VerificationReport> {
    let mut r = fibred_site_report(s, guards)?;
    let fibred = r.passed();
    let preorder = s.indexed().has_preorder_fibres();
    r.push(Check::from_witness("open", "each ∃_f is cover-preserving", open_violation(s, guards)?));
    let reflecting = reflecting_violation(s, j, guards)?;
    let is_reflecting = reflecting.is_none();
    r.push(Check::from_witness(
        "j-reflecting",
        "a family covers when its images along a base cover all cover",
        reflecting,
    ));
    let (lin, prestack) = if preorder {
        let lin = linearization_violation(s, guards)?;
        let pre = prestack_violation(s, j, guards)?;
        let lin_ok = lin.is_none();
        let pre_ok = pre.is_none();
        r.push(Check::from_witness(
            "reflecting-linearization",
            "closed sieves are principal and transitions preserve their generators",
            lin,
        ));
        r.push(Check::from_witness("prestack", "the order is determined locally over base covers", pre));
        r.push(match stack_check(s, j, guards)? {
            Descent::Effective => Check::pass("stack", "compatible families of elements glue"),
            Descent::Ineffective(w) => Check::fail("stack", "compatible families of elements glue", w),
            Descent::Budget => Check::new("stack", "compatible families of elements glue", Status::Inconclusive)
                .with_guard("search_budget"),
        });
        (lin_ok, pre_ok)
    } else {
        for name in ["reflecting-linearization", "prestack", "stack"] {
            r.push(
                Check::new(name, "preorder fibres", Status::Skipped).with_note("not checked for non-preorder fibres"),
            );
        }
        (false, false)
    };
    let (ext, _) = existential_topology(s, guards)?;
    let giraud = giraud_topology(&s.total, j, guards)?;
    let mut bad = None;
    'o: for o in s.total.total.objects() {
        for sv in giraud.covering_sieves(o, guards)? {
            if !ext.covers(&sv) {
                bad = Some(
                    Witness::new()
                        .with("object", s.total.total.object_name(o))
                        .with("sieve", sv.display(&s.total.total)),
                );
                break 'o;
            }
        }
    }
    let contained = bad.is_none();
    r.push(Check::from_witness("giraud-contained", "every Giraud cover is an existential cover", bad));
    let existential = check_relative_bc(s, guards).passes("relative-bc")
        && check_relative_frobenius(s, guards).passes("relative-frobenius");
    r.push(implication(
        "linearization-implies-reflecting",
        "prestack with reflecting linearization is J-reflecting",
        fibred && preorder && prestack && lin,
        is_reflecting,
    ));
    r.push(implication(
        "reflecting-implies-giraud",
        "J-reflecting existential sites contain the Giraud topology",
        fibred && existential && is_reflecting,
        contained,
    ));
    Ok(r)
}
