//! Strict indexed categories, the Grothendieck construction and morphisms
//! of fibrations.

mod morphism;

pub use morphism::{fibration_morphism_report, FibMorphism};

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::cat::{terminal, validate_category, ArrowId, CategoryBuilder, FinCategory, FinFunctor, ObjId};
use crate::error::{input, Error, Result};
use crate::report::{Check, Guards, VerificationReport, Witness};
use crate::topology::{generate_topology, Coverage, GrothendieckTopology, Sieve};

/// A strict contravariant functor from a finite base into finite
/// categories: a fibre per base object and, for `f : c → d`, a transition
/// functor `L(f) : L(d) → L(c)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexedCat {
    pub name: String,
    pub base: Arc<FinCategory>,
    pub fibres: Vec<Arc<FinCategory>>,
    pub transitions: Vec<FinFunctor>,
}

impl IndexedCat {
    pub fn new(
        name: &str,
        base: Arc<FinCategory>,
        fibres: Vec<Arc<FinCategory>>,
        transitions: Vec<FinFunctor>,
    ) -> Result<Self> {
        if fibres.len() != base.num_objects() || transitions.len() != base.num_arrows() {
            return input(format!("{name}: fibre or transition table is not total"));
        }
        for f in base.arrows() {
            let t = &transitions[f];
            if t.source != fibres[base.tgt(f)] || t.target != fibres[base.src(f)] {
                return input(format!(
                    "{name}: transition along `{}` must map L({}) to L({})",
                    base.arrow_name(f),
                    base.object_name(base.tgt(f)),
                    base.object_name(base.src(f))
                ));
            }
        }
        Ok(IndexedCat { name: name.to_string(), base, fibres, transitions })
    }

    /// Indexed category with preorder fibres, each transition given by its
    /// object map.
    pub fn from_preorder_maps(
        name: &str,
        base: Arc<FinCategory>,
        fibres: Vec<Arc<FinCategory>>,
        maps: Vec<Vec<ObjId>>,
    ) -> Result<Self> {
        if fibres.len() != base.num_objects() || maps.len() != base.num_arrows() {
            return input(format!("{name}: fibre or transition table is not total"));
        }
        let mut transitions = Vec::with_capacity(maps.len());
        for (f, m) in maps.into_iter().enumerate() {
            let (src, tgt) = (&fibres[base.tgt(f)], &fibres[base.src(f)]);
            if !tgt.is_preorder() {
                return input(format!("{name}: fibre over `{}` is not a preorder", base.object_name(base.src(f))));
            }
            if m.len() != src.num_objects() || m.iter().any(|&y| y >= tgt.num_objects()) {
                return input(format!("{name}: transition along `{}` is not total", base.arrow_name(f)));
            }
            let t = FinFunctor::into_preorder(&format!("L({})", base.arrow_name(f)), src.clone(), tgt.clone(), m)
                .map_err(|_| {
                    Error::Input(format!("{name}: transition along `{}` is not monotone", base.arrow_name(f)))
                })?;
            transitions.push(t);
        }
        IndexedCat::new(name, base, fibres, transitions)
    }

    /// Every fibre is a preorder.
    pub fn has_preorder_fibres(&self) -> bool {
        self.fibres.iter().all(|f| f.is_preorder())
    }

    #[inline]
    pub fn transition(&self, f: ArrowId) -> &FinFunctor {
        &self.transitions[f]
    }
}

/// Fibres are categories, transitions are functors, and the assignment is
/// strictly functorial.
pub fn validate_indexed(d: &IndexedCat) -> VerificationReport {
    let b = &*d.base;
    let mut r = VerificationReport::new();
    for x in b.objects() {
        r.extend(validate_category(&d.fibres[x]).scoped(&format!("fibre[{}]", b.object_name(x))));
    }
    let bad = b.arrows().find(|&f| !d.transitions[f].check().passed());
    r.push(Check::from_witness(
        "transition-functors",
        "each transition is a functor",
        bad.map(|f| Witness::new().with("arrow", b.arrow_name(f))),
    ));
    let ids = b.objects().find(|&x| {
        let t = &d.transitions[b.id(x)];
        t.object_map().iter().enumerate().any(|(i, &j)| i != j)
            || t.arrow_map().iter().enumerate().any(|(i, &j)| i != j)
    });
    r.push(Check::from_witness(
        "strict-identities",
        "L(id) is the identity functor",
        ids.map(|x| Witness::new().with("object", b.object_name(x))),
    ));
    let mut comp = None;
    'o: for f in b.arrows() {
        for g in b.arrows() {
            if b.src(g) != b.tgt(f) {
                continue;
            }
            let gf = &d.transitions[b.compose(g, f)];
            let (lf, lg) = (&d.transitions[f], &d.transitions[g]);
            let same = (0..gf.object_map().len()).all(|x| gf.obj(x) == lf.obj(lg.obj(x)))
                && (0..gf.arrow_map().len()).all(|a| gf.arr(a) == lf.arr(lg.arr(a)));
            if !same {
                comp = Some(Witness::new().with("g", b.arrow_name(g)).with("f", b.arrow_name(f)));
                break 'o;
            }
        }
    }
    r.push(Check::from_witness("strict-composition", "L(g ∘ f) = L(f) ∘ L(g)", comp));
    r
}

/// Tags of an arrow of the total category.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ArrowTags {
    pub vertical: bool,
    pub cartesian: bool,
    /// Computed only on request, see [`GrothTotal::tag_cocartesian`].
    pub cocartesian: Option<bool>,
}

/// The Grothendieck construction `G(D)` of an indexed category with its
/// projection to the base.
///
/// Objects `(c, x)` with `x ∈ L(c)`. Arrows `(c, x) → (d, y)` are pairs
/// `(f, α)` with `f : c → d` and `α : x → L(f)(y)`, named `(f,α)→y`.
/// Composition is `(g, β) ∘ (f, α) = (g ∘ f, L(f)(β) ∘ α)`.
#[derive(Debug, Clone)]
pub struct GrothTotal {
    pub indexed: Arc<IndexedCat>,
    pub total: Arc<FinCategory>,
    pub projection: FinFunctor,
    /// `(c, x)` per total object.
    pub objects: Vec<(ObjId, ObjId)>,
    /// `(f, α)` per total arrow.
    pub arrows: Vec<(ArrowId, ArrowId)>,
    pub tags: Vec<ArrowTags>,
    object_index: BTreeMap<(ObjId, ObjId), ObjId>,
}

fn obj_name(d: &IndexedCat, c: ObjId, x: ObjId) -> String {
    format!("({},{})", d.base.object_name(c), d.fibres[c].object_name(x))
}

fn arr_name(d: &IndexedCat, f: ArrowId, alpha: ArrowId, y: ObjId) -> String {
    let b = &*d.base;
    let fib = &d.fibres[b.src(f)];
    format!("({},{})→{}", b.arrow_name(f), fib.arrow_name(alpha), d.fibres[b.tgt(f)].object_name(y))
}

/// Builds `G(D)`. Cartesian and vertical tags are computed for every arrow;
/// cartesianness by the universal property.
pub fn grothendieck_construction(d: Arc<IndexedCat>) -> Result<GrothTotal> {
    let b = &*d.base;
    let mut builder = CategoryBuilder::new(&format!("G({})", d.name));
    let mut raw_objects = Vec::new();
    for c in b.objects() {
        for x in d.fibres[c].objects() {
            raw_objects.push((c, x));
            builder = builder.object(&obj_name(&d, c, x));
        }
    }
    // (f, α, y)
    let mut raw_arrows = Vec::new();
    for f in b.arrows() {
        let (c, e) = (b.src(f), b.tgt(f));
        let (fc, lf) = (&d.fibres[c], &d.transitions[f]);
        for y in d.fibres[e].objects() {
            for x in fc.objects() {
                for &alpha in fc.hom(x, lf.obj(y)) {
                    raw_arrows.push((f, alpha, y));
                    builder = builder.arrow(&arr_name(&d, f, alpha, y), &obj_name(&d, c, x), &obj_name(&d, e, y));
                }
            }
        }
    }
    for &(c, x) in &raw_objects {
        builder = builder.identity(&obj_name(&d, c, x), &arr_name(&d, b.id(c), d.fibres[c].id(x), x));
    }
    for &(f, alpha, y) in &raw_arrows {
        for &(g, beta, z) in &raw_arrows {
            if b.src(g) != b.tgt(f) || d.fibres[b.src(g)].src(beta) != y {
                continue;
            }
            let fc = &d.fibres[b.src(f)];
            let comp = fc.compose(d.transitions[f].arr(beta), alpha);
            builder = builder.compose(
                &arr_name(&d, g, beta, z),
                &arr_name(&d, f, alpha, y),
                &arr_name(&d, b.compose(g, f), comp, z),
            );
        }
    }
    let total = Arc::new(builder.build()?);
    let objects: Vec<(ObjId, ObjId)> = total
        .objects()
        .map(|o| *raw_objects.iter().find(|&&(c, x)| obj_name(&d, c, x) == total.object_name(o)).expect("object"))
        .collect();
    let object_index = objects.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let mut by_name: BTreeMap<String, (ArrowId, ArrowId)> = BTreeMap::new();
    for &(f, alpha, y) in &raw_arrows {
        by_name.insert(arr_name(&d, f, alpha, y), (f, alpha));
    }
    let arrows: Vec<(ArrowId, ArrowId)> = total.arrows().map(|a| by_name[total.arrow_name(a)]).collect();
    let projection = FinFunctor::new(
        &format!("p_{}", d.name),
        total.clone(),
        d.base.clone(),
        objects.iter().map(|&(c, _)| c).collect(),
        arrows.iter().map(|&(f, _)| f).collect(),
    )?;
    let mut g = GrothTotal { indexed: d, total, projection, objects, arrows, tags: Vec::new(), object_index };
    g.tags = (0..g.total.num_arrows())
        .map(|a| ArrowTags {
            vertical: g.indexed.base.is_identity(g.arrows[a].0),
            cartesian: g.is_cartesian(a),
            cocartesian: None,
        })
        .collect();
    Ok(g)
}

impl GrothTotal {
    pub fn object(&self, c: ObjId, x: ObjId) -> ObjId {
        self.object_index[&(c, x)]
    }

    pub fn base(&self) -> &Arc<FinCategory> {
        &self.indexed.base
    }

    pub fn fibre(&self, c: ObjId) -> &Arc<FinCategory> {
        &self.indexed.fibres[c]
    }

    /// The total arrow `(f, α) : (src f, src α) → (tgt f, y)`.
    pub fn arrow(&self, f: ArrowId, alpha: ArrowId, y: ObjId) -> ArrowId {
        let t = &*self.total;
        let (c, e) = (self.base().src(f), self.base().tgt(f));
        let from = self.object(c, self.fibre(c).src(alpha));
        let to = self.object(e, y);
        *t.hom(from, to).iter().find(|&&a| self.arrows[a] == (f, alpha)).expect("total arrow exists")
    }

    /// The vertical arrow `(1_c, α)`.
    pub fn vertical(&self, c: ObjId, alpha: ArrowId) -> ArrowId {
        self.arrow(self.base().id(c), alpha, self.fibre(c).tgt(alpha))
    }

    /// The cartesian lift `(f, 1) : (c, L(f)(y)) → (d, y)`.
    pub fn cartesian_lift(&self, f: ArrowId, y: ObjId) -> ArrowId {
        let c = self.base().src(f);
        let x = self.indexed.transitions[f].obj(y);
        self.arrow(f, self.fibre(c).id(x), y)
    }

    /// Universal property: every arrow into the codomain lying over `f ∘ h`
    /// factors uniquely through `a` over `h`.
    pub fn is_cartesian(&self, a: ArrowId) -> bool {
        let (t, b) = (&*self.total, &**self.base());
        let (src, tgt) = (t.src(a), t.tgt(a));
        let f = self.arrows[a].0;
        t.incoming(tgt).iter().all(|&g| {
            let w = t.src(g);
            b.hom(self.objects[w].0, self.objects[src].0).iter().all(|&h| {
                if b.compose(f, h) != self.arrows[g].0 {
                    return true;
                }
                t.hom(w, src).iter().filter(|&&k| self.arrows[k].0 == h && t.compose(a, k) == g).count() == 1
            })
        })
    }

    /// Dual universal property: every arrow out of the domain lying over
    /// `h ∘ f` factors uniquely through `a` over `h`.
    pub fn is_cocartesian(&self, a: ArrowId) -> bool {
        let (t, b) = (&*self.total, &**self.base());
        let (src, tgt) = (t.src(a), t.tgt(a));
        let f = self.arrows[a].0;
        t.arrows().filter(|&g| t.src(g) == src).all(|g| {
            let w = t.tgt(g);
            b.hom(self.objects[tgt].0, self.objects[w].0).iter().all(|&h| {
                if b.compose(h, f) != self.arrows[g].0 {
                    return true;
                }
                t.hom(tgt, w).iter().filter(|&&k| self.arrows[k].0 == h && t.compose(k, a) == g).count() == 1
            })
        })
    }

    pub fn tag_cocartesian(&mut self) {
        for a in self.total.arrows() {
            self.tags[a].cocartesian = Some(self.is_cocartesian(a));
        }
    }

    /// `p⁻¹(S)`: total arrows into `o` whose projection lies in `s`.
    pub fn preimage_sieve(&self, o: ObjId, s: &Sieve) -> Sieve {
        let t = &*self.total;
        let mut bits = crate::bits::Bits::empty(t.incoming(o).len());
        for (i, &g) in t.incoming(o).iter().enumerate() {
            if s.contains(self.base(), self.arrows[g].0) {
                bits.insert(i);
            }
        }
        Sieve { cod: o, arrows: bits }
    }
}

/// Construction-level checks on a total: category laws, projection functor
/// laws, and the cartesian universal property of every lift `(f, 1)`.
pub fn grothendieck_report(g: &GrothTotal) -> VerificationReport {
    let mut r = validate_category(&g.total).scoped("total");
    r.extend(g.projection.check().scoped("projection"));
    let b = &**g.base();
    let mut bad = None;
    'o: for f in b.arrows() {
        for y in g.fibre(b.tgt(f)).objects() {
            let a = g.cartesian_lift(f, y);
            if !g.tags[a].cartesian {
                bad = Some(Witness::new().with("arrow", g.total.arrow_name(a)));
                break 'o;
            }
        }
    }
    r.push(Check::from_witness("cartesian-lifts", "every lift (f, 1) is cartesian", bad));
    r
}

/// The smallest topology on `G(D)` making the projection a comorphism of
/// sites: generated by the families `p⁻¹(S)` for `j`-covering `S`.
pub fn giraud_topology(g: &GrothTotal, j: &GrothendieckTopology, guards: &Guards) -> Result<GrothendieckTopology> {
    let t = &*g.total;
    let mut cov: Coverage = Vec::new();
    for o in t.objects() {
        let c = g.objects[o].0;
        for s in j.covering_sieves(c, guards)? {
            let pre = g.preimage_sieve(o, &s);
            cov.push((o, pre.arrows(t).collect()));
        }
    }
    generate_topology(g.total.clone(), "giraud", &cov, guards)
}

/// The right adjoint `τ(X) = (X, 1)` of the projection and the hom-set
/// bijection `G(D)((Y,V),(X,1)) ≅ C(Y,X)` induced by projecting.
pub fn tau_and_adjunction(g: &GrothTotal) -> Result<(FinFunctor, VerificationReport)> {
    let d = &*g.indexed;
    let b = &*d.base;
    let mut tops = Vec::with_capacity(b.num_objects());
    for c in b.objects() {
        match terminal(&d.fibres[c]) {
            Some(t) => tops.push(t),
            None => {
                return Err(Error::Precondition(format!("fibre over `{}` has no terminal object", b.object_name(c))))
            }
        }
    }
    for f in b.arrows() {
        let c = b.src(f);
        let image = d.transitions[f].obj(tops[b.tgt(f)]);
        if terminal(&d.fibres[c]).is_none() || !d.fibres[c].objects().all(|x| d.fibres[c].hom(x, image).len() == 1) {
            return Err(Error::Precondition(format!(
                "transition along `{}` does not preserve the terminal object",
                b.arrow_name(f)
            )));
        }
    }
    let obj: Vec<ObjId> = b.objects().map(|c| g.object(c, tops[c])).collect();
    let arr: Vec<ArrowId> = b
        .arrows()
        .map(|f| {
            let c = b.src(f);
            let image = d.transitions[f].obj(tops[b.tgt(f)]);
            let alpha = d.fibres[c].hom(tops[c], image)[0];
            g.arrow(f, alpha, tops[b.tgt(f)])
        })
        .collect();
    let tau = FinFunctor::new(&format!("τ_{}", d.name), d.base.clone(), g.total.clone(), obj, arr)?;
    let mut r = tau.check().scoped("tau");
    let t = &*g.total;
    let mut bad = None;
    'o: for o in t.objects() {
        let y = g.objects[o].0;
        for x in b.objects() {
            let homs = t.hom(o, tau.obj(x));
            let mut images: Vec<ArrowId> = homs.iter().map(|&a| g.arrows[a].0).collect();
            images.sort_unstable();
            images.dedup();
            if homs.len() != b.hom(y, x).len() || images.len() != homs.len() {
                bad = Some(
                    Witness::new()
                        .with("object", t.object_name(o))
                        .with("base-object", b.object_name(x))
                        .with("total-homs", format!("{}", homs.len()))
                        .with("base-homs", format!("{}", b.hom(y, x).len())),
                );
                break 'o;
            }
        }
    }
    r.push(Check::from_witness("tau-adjunction", "projection is a bijection G(D)((Y,V),(X,1)) → C(Y,X)", bad));
    Ok((tau, r))
}

#[cfg(test)]
mod tests;
