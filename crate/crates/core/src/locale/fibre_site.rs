use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::cat::{build_comma, ArrowId, Comma, FinCategory, FinFunctor, ObjId};
use crate::error::{Error, Result};
use crate::existential::{existential_topology, ExistentialSite};
use crate::report::{Check, Guards, VerificationReport, Witness};
use crate::topology::{comorphism_report, GrothendieckTopology, Sieve};

/// The site `G_c^ext(L)` at a base object `c`: pairs `(f, y)` with
/// `f : dom(f) → c` and `y ∈ L(dom f)`, built as the comma category of the
/// projection over `c`, with the topology induced by the existential one,
/// the inclusion `i_c` of the fibre and `ext_c : (f, y) ↦ ∃_f(y)`.
#[derive(Debug, Clone)]
pub struct FibreSite {
    pub object: ObjId,
    pub comma: Comma,
    pub topology: GrothendieckTopology,
    pub inclusion: FinFunctor,
    pub ext: FinFunctor,
}

/// Builds [`FibreSite`] at `c`. Fibres must be preorders.
pub fn fibre_site(s: &ExistentialSite, c: ObjId, guards: &Guards) -> Result<FibreSite> {
    let b = &**s.base();
    if !s.indexed().has_preorder_fibres() {
        return Err(Error::Precondition("fibre sites are built for preorder fibres".into()));
    }
    let g = &s.total;
    let comma = build_comma(&g.projection, c)?;
    let k = &*comma.category;
    // a sieve covers when the transposes of its projected arrows cover
    let objects = g.objects.clone();
    let pairs = comma.pairs.clone();
    let transposes: Vec<Option<ArrowId>> = comma.arrow_of.iter().map(|&a| s.total_transpose(a)).collect();
    let tops = s.fibre_topologies.clone();
    let topology = GrothendieckTopology::from_predicate(
        comma.category.clone(),
        "induced",
        Arc::new(move |k: &FinCategory, sv: &Sieve| {
            let (e, l) = objects[pairs[sv.cod].0];
            let family: Vec<ArrowId> = sv.arrows(k).filter_map(|a| transposes[a]).collect();
            tops[e].covers_family(l, family)
        }),
        guards,
    )?;
    let fib = s.fibre(c).clone();
    let id_c = b.id(c);
    let obj: Vec<ObjId> =
        fib.objects().map(|x| comma.object_of(g.object(c, x), id_c).expect("(1_c, x) is a comma object")).collect();
    let arr: Vec<ArrowId> = fib
        .arrows()
        .map(|a| {
            let v = g.vertical(c, a);
            let (src, tgt) = (obj[fib.src(a)], obj[fib.tgt(a)]);
            k.hom(src, tgt).iter().copied().find(|&m| comma.arrow_of[m] == v).expect("vertical arrow over 1_c")
        })
        .collect();
    let inclusion = FinFunctor::new(&format!("i_{}", b.object_name(c)), fib.clone(), comma.category.clone(), obj, arr)?;
    let ext_obj: Vec<ObjId> = comma
        .pairs
        .iter()
        .map(|&(o, u)| {
            let (_, y) = g.objects[o];
            s.exists(u).obj(y)
        })
        .collect();
    let ext = FinFunctor::into_preorder(&format!("ext_{}", b.object_name(c)), comma.category.clone(), fib, ext_obj)
        .map_err(|_| Error::Precondition("(f, y) ↦ ∃_f(y) is not monotone".into()))?;
    Ok(FibreSite { object: c, comma, topology, inclusion, ext })
}

fn renamed(r: &VerificationReport, from: &str, to: &str) -> Check {
    let mut c = r.get(from).cloned().expect("check present");
    c.name = to.into();
    c
}

/// The projection lifts covers into the existential topology; `i_c` is
/// cover-reflecting and closed-sieve-lifting; `ext_c ∘ i_c` is the
/// identity; `ext_c ⊣ i_c` by counted hom-sets; `ext_c` lifts covers; and
/// composing with any `k : c → c'` commutes with `ext` up to `∃_k`.
pub fn fibre_site_report(s: &ExistentialSite, site: &FibreSite, guards: &Guards) -> Result<VerificationReport> {
    let b = &**s.base();
    let c = site.object;
    let fib = &**s.fibre(c);
    let k = &*site.comma.category;
    let (jext, _) = existential_topology(s, guards)?;
    let mut r = VerificationReport::new();

    let proj = comorphism_report(&site.comma.projection, &site.topology, &jext, guards);
    r.push(renamed(&proj, "cover-lifting", "projection-cover-lifting"));

    let inc = comorphism_report(&site.inclusion, &s.fibre_topologies[c], &site.topology, guards);
    r.push(renamed(&inc, "cover-reflecting", "inclusion-cover-reflecting"));
    r.push(renamed(&inc, "closed-sieve-lifting", "inclusion-closed-sieve-lifting"));

    let composite = site.ext.after(&site.inclusion)?;
    let bad = fib
        .objects()
        .find(|&x| composite.obj(x) != x)
        .map(|x| Witness::new().with("element", fib.object_name(x)))
        .or_else(|| {
            fib.arrows().find(|&a| composite.arr(a) != a).map(|a| Witness::new().with("arrow", fib.arrow_name(a)))
        });
    r.push(Check::from_witness("retract", "ext_c ∘ i_c is the identity of L(c)", bad));

    let mut bad = None;
    'o: for q in k.objects() {
        for x in fib.objects() {
            let left = fib.hom(site.ext.obj(q), x).len();
            let right = k.hom(q, site.inclusion.obj(x)).len();
            if left != right {
                bad = Some(
                    Witness::new()
                        .with("object", k.object_name(q))
                        .with("element", fib.object_name(x))
                        .with("ext-homs", format!("{left}"))
                        .with("inclusion-homs", format!("{right}")),
                );
                break 'o;
            }
        }
    }
    r.push(Check::from_witness("adjunction", "|L(c)(ext q, x)| = |G_c(q, i x)| for all q, x", bad));

    let ext = comorphism_report(&site.ext, &site.topology, &s.fibre_topologies[c], guards);
    r.push(renamed(&ext, "cover-lifting", "ext-cover-lifting"));

    let g = &s.total;
    let mut bad = None;
    'o: for &kk in b.arrows().filter(|&kk| b.src(kk) == c).collect::<Vec<_>>().iter() {
        let target = &**s.fibre(b.tgt(kk));
        for &(o, u) in &site.comma.pairs {
            let (_, y) = g.objects[o];
            let direct = s.exists(b.compose(kk, u)).obj(y);
            let staged = s.exists(kk).obj(s.exists(u).obj(y));
            if !target.isomorphic(direct, staged) {
                bad = Some(
                    Witness::new()
                        .with("arrow", b.arrow_name(kk))
                        .with("object", k.object_name(site.comma.object_of(o, u).expect("comma object"))),
                );
                break 'o;
            }
        }
    }
    r.push(Check::from_witness("ext-composition", "ext_{c'} ∘ (k ∘ −) ≅ ∃_k ∘ ext_c for every k out of c", bad));
    Ok(r)
}
