//! Existential fibred sites: left adjoints to the transition functors, the
//! relative Beck–Chevalley and Frobenius conditions, the existential
//! topology on the total category and the predicates built on it.

mod conditions;
mod morphism;
mod site;

pub use conditions::{check_relative_bc, check_relative_frobenius};
pub use morphism::{check_coorthogonal_generation, check_existential_morphism, coorthogonal_topology};
pub use site::{existential_site_report, existential_topology, fibred_site_report};

use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::cat::{ArrowId, FinCategory, FinFunctor, ObjId};
use crate::error::{input, Error, Result};
use crate::fibred::{grothendieck_construction, GrothTotal, IndexedCat};
use crate::frame::FiniteFrame;
use crate::report::{Check, Guards, VerificationReport, Witness};
use crate::topology::GrothendieckTopology;

/// A candidate left adjoint `∃_f ⊣ L(f)` for `f : c → d`, with its unit
/// `η_x : x → L(f)(∃_f x)` in `L(c)` and counit `ε_y : ∃_f L(f)(y) → y` in
/// `L(d)`. Units and counits are absent when a supplied table is not an
/// adjoint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Adjoint {
    pub exists: FinFunctor,
    pub unit: Vec<Option<ArrowId>>,
    pub counit: Vec<Option<ArrowId>>,
}

/// The unique `h : u → y` with `L(f)(h) ∘ η = g`, if there is exactly one.
fn factor_through_unit(
    lf: &FinFunctor,
    src: &FinCategory,
    tgt: &FinCategory,
    u: ObjId,
    eta: ArrowId,
    g: ArrowId,
    y: ObjId,
) -> Option<ArrowId> {
    let mut found = None;
    for &h in tgt.hom(u, y) {
        if src.compose(lf.arr(h), eta) == g {
            if found.is_some() {
                return None;
            }
            found = Some(h);
        }
    }
    found
}

impl Adjoint {
    /// Identity adjunction on a fibre.
    pub fn identity(fibre: Arc<FinCategory>) -> Adjoint {
        let unit = fibre.objects().map(|x| Some(fibre.id(x))).collect();
        Adjoint { exists: FinFunctor::identity(fibre), unit: Vec::clone(&unit), counit: unit }
    }

    /// Pointwise left adjoint along `f`: `∃_f(x)` is the first object `u`
    /// with an initial arrow `x → L(f)(u)`. Fails with the element lacking
    /// a universal arrow.
    pub fn compute(d: &IndexedCat, f: ArrowId) -> core::result::Result<Adjoint, Witness> {
        let b = &*d.base;
        if b.is_identity(f) {
            return Ok(Adjoint::identity(d.fibres[b.src(f)].clone()));
        }
        let (src, tgt) = (&*d.fibres[b.src(f)], &*d.fibres[b.tgt(f)]);
        let lf = &d.transitions[f];
        let mut obj = Vec::with_capacity(src.num_objects());
        let mut unit = Vec::with_capacity(src.num_objects());
        for x in src.objects() {
            let universal = tgt.objects().find_map(|u| {
                src.hom(x, lf.obj(u))
                    .iter()
                    .copied()
                    .find(|&eta| {
                        tgt.objects().all(|y| {
                            src.hom(x, lf.obj(y))
                                .iter()
                                .all(|&g| factor_through_unit(lf, src, tgt, u, eta, g, y).is_some())
                        })
                    })
                    .map(|eta| (u, eta))
            });
            let Some((u, eta)) = universal else {
                return Err(Witness::new().with("arrow", b.arrow_name(f)).with("element", src.object_name(x)));
            };
            obj.push(u);
            unit.push(eta);
        }
        let arr = src
            .arrows()
            .map(|a| {
                let (x, x2) = (src.src(a), src.tgt(a));
                let g = src.compose(unit[x2], a);
                factor_through_unit(lf, src, tgt, obj[x], unit[x], g, obj[x2]).expect("universal arrow")
            })
            .collect();
        let exists = FinFunctor::new(
            &format!("∃_{}", b.arrow_name(f)),
            d.fibres[b.src(f)].clone(),
            d.fibres[b.tgt(f)].clone(),
            obj.clone(),
            arr,
        )
        .expect("maps are in range");
        let counit = tgt
            .objects()
            .map(|y| {
                let x = lf.obj(y);
                factor_through_unit(lf, src, tgt, obj[x], unit[x], src.id(x), y)
            })
            .collect();
        Ok(Adjoint { exists, unit: unit.into_iter().map(Some).collect(), counit })
    }

    /// A supplied object map for `∃_f` between preorder fibres. Units and
    /// counits are recorded where the order allows them.
    pub fn from_preorder_table(d: &IndexedCat, f: ArrowId, map: Vec<ObjId>) -> Result<Adjoint> {
        let b = &*d.base;
        let (src, tgt) = (&d.fibres[b.src(f)], &d.fibres[b.tgt(f)]);
        if !src.is_preorder() || !tgt.is_preorder() {
            return input(format!("∃ table along `{}` requires preorder fibres", b.arrow_name(f)));
        }
        if map.len() != src.num_objects() || map.iter().any(|&y| y >= tgt.num_objects()) {
            return input(format!("∃ table along `{}` is not total", b.arrow_name(f)));
        }
        let exists = FinFunctor::into_preorder(&format!("∃_{}", b.arrow_name(f)), src.clone(), tgt.clone(), map)
            .map_err(|_| Error::Input(format!("∃ table along `{}` is not monotone", b.arrow_name(f))))?;
        let lf = &d.transitions[f];
        let unit = src.objects().map(|x| src.hom(x, lf.obj(exists.obj(x))).first().copied()).collect();
        let counit = tgt.objects().map(|y| tgt.hom(exists.obj(lf.obj(y)), y).first().copied()).collect();
        Ok(Adjoint { exists, unit, counit })
    }
}

/// An indexed category with a topology on every fibre and candidate left
/// adjoints along every base arrow, together with its total category.
#[derive(Debug, Clone)]
pub struct ExistentialSite {
    pub name: String,
    pub total: GrothTotal,
    pub fibre_topologies: Vec<GrothendieckTopology>,
    pub adjoints: Vec<Adjoint>,
    /// Transpose `∃_e(l_i) → l` of each total arrow `(e, α)`.
    transposes: Vec<Option<ArrowId>>,
}

/// Left adjoints along every base arrow, or a report naming the element
/// without a universal arrow.
pub fn compute_adjoints(d: &IndexedCat) -> core::result::Result<Vec<Adjoint>, VerificationReport> {
    let mut out = Vec::with_capacity(d.base.num_arrows());
    for f in d.base.arrows() {
        match Adjoint::compute(d, f) {
            Ok(a) => out.push(a),
            Err(w) => {
                let mut r = VerificationReport::new();
                r.push(Check::fail("left-adjoints", "every transition has a left adjoint", w));
                return Err(r);
            }
        }
    }
    Ok(out)
}

impl ExistentialSite {
    pub fn new(
        name: &str,
        d: Arc<IndexedCat>,
        fibre_topologies: Vec<GrothendieckTopology>,
        adjoints: Vec<Adjoint>,
    ) -> Result<Self> {
        let b = &*d.base;
        if fibre_topologies.len() != b.num_objects() || adjoints.len() != b.num_arrows() {
            return input(format!("{name}: one topology per fibre and one adjoint per base arrow are required"));
        }
        for c in b.objects() {
            if fibre_topologies[c].base() != &d.fibres[c] {
                return input(format!("{name}: topology for `{}` lives on another category", b.object_name(c)));
            }
        }
        for f in b.arrows() {
            let a = &adjoints[f];
            if a.exists.source != d.fibres[b.src(f)] || a.exists.target != d.fibres[b.tgt(f)] {
                return input(format!("{name}: ∃ along `{}` has the wrong fibres", b.arrow_name(f)));
            }
        }
        let total = grothendieck_construction(d)?;
        let mut s =
            ExistentialSite { name: name.to_string(), total, fibre_topologies, adjoints, transposes: Vec::new() };
        s.transposes = s
            .total
            .total
            .arrows()
            .map(|a| {
                let (e, alpha) = s.total.arrows[a];
                let y = s.total.objects[s.total.total.tgt(a)].1;
                s.transpose(e, alpha, y)
            })
            .collect();
        Ok(s)
    }

    /// Site with computed left adjoints.
    pub fn with_computed_adjoints(
        name: &str,
        d: Arc<IndexedCat>,
        fibre_topologies: Vec<GrothendieckTopology>,
    ) -> core::result::Result<Self, VerificationReport> {
        let adjoints = compute_adjoints(&d)?;
        ExistentialSite::new(name, d, fibre_topologies, adjoints).map_err(|e| {
            let mut r = VerificationReport::new();
            r.push(Check::fail("site-input", "site data is well formed", Witness::new().with("error", e.to_string())));
            r
        })
    }

    /// Every fibre a finite frame with its canonical topology, adjoints
    /// computed.
    pub fn canonical(name: &str, d: Arc<IndexedCat>, guards: &Guards) -> Result<Self> {
        let mut tops = Vec::with_capacity(d.fibres.len());
        for (c, fib) in d.fibres.iter().enumerate() {
            let frame = FiniteFrame::from_category(fib)
                .map_err(|_| Error::Precondition(format!("fibre over `{}` is not a lattice", d.base.object_name(c))))?;
            tops.push(Arc::new(frame).canonical_topology(fib.clone(), guards)?);
        }
        let adjoints = compute_adjoints(&d).map_err(|r| {
            let w = r.checks[0].witness.clone().unwrap_or_default();
            Error::Precondition(format!(
                "no left adjoint along `{}` at `{}`",
                w.get("arrow").unwrap_or("?"),
                w.get("element").unwrap_or("?")
            ))
        })?;
        ExistentialSite::new(name, d, tops, adjoints)
    }

    pub fn indexed(&self) -> &Arc<IndexedCat> {
        &self.total.indexed
    }

    pub fn base(&self) -> &Arc<FinCategory> {
        &self.total.indexed.base
    }

    pub fn fibre(&self, c: ObjId) -> &Arc<FinCategory> {
        &self.total.indexed.fibres[c]
    }

    pub fn exists(&self, f: ArrowId) -> &FinFunctor {
        &self.adjoints[f].exists
    }

    pub fn unit(&self, f: ArrowId, x: ObjId) -> Option<ArrowId> {
        self.adjoints[f].unit[x]
    }

    /// Transpose of `α : x → L(f)(y)` to `∃_f(x) → y`.
    pub fn transpose(&self, f: ArrowId, alpha: ArrowId, y: ObjId) -> Option<ArrowId> {
        let b = &**self.base();
        let tgt = &**self.fibre(b.tgt(f));
        let adj = &self.adjoints[f];
        let x = self.fibre(b.src(f)).src(alpha);
        if tgt.is_preorder() {
            return tgt.hom(adj.exists.obj(x), y).first().copied();
        }
        let eps = adj.counit[y]?;
        Some(tgt.compose(eps, adj.exists.arr(alpha)))
    }

    /// Transpose of a total arrow into its codomain's fibre.
    pub fn total_transpose(&self, a: ArrowId) -> Option<ArrowId> {
        self.transposes[a]
    }

    /// `Hom(∃_f x, y) ≅ Hom(x, L(f) y)` through the unit, with the unit
    /// natural.
    pub fn adjunction_violation(&self) -> Option<Witness> {
        let b = &**self.base();
        for f in b.arrows() {
            let (src, tgt) = (&**self.fibre(b.src(f)), &**self.fibre(b.tgt(f)));
            let (adj, lf) = (&self.adjoints[f], self.indexed().transition(f));
            let w = |what: &str, x: String| Some(Witness::new().with("arrow", b.arrow_name(f)).with(what, x));
            if !adj.exists.check().passed() {
                return w("functor", adj.exists.name.clone());
            }
            for x in src.objects() {
                let Some(eta) = adj.unit[x] else { return w("element", src.object_name(x).to_string()) };
                if src.tgt(eta) != lf.obj(adj.exists.obj(x)) {
                    return w("element", src.object_name(x).to_string());
                }
                for y in tgt.objects() {
                    let there = tgt.hom(adj.exists.obj(x), y);
                    let mut images: Vec<ArrowId> = there.iter().map(|&h| src.compose(lf.arr(h), eta)).collect();
                    images.sort_unstable();
                    images.dedup();
                    if images.len() != there.len() || images.len() != src.hom(x, lf.obj(y)).len() {
                        return Some(
                            Witness::new()
                                .with("arrow", b.arrow_name(f))
                                .with("element", src.object_name(x))
                                .with("target", tgt.object_name(y)),
                        );
                    }
                }
            }
            for a in src.arrows() {
                let (x, x2) = (src.src(a), src.tgt(a));
                let (e1, e2) = (adj.unit[x].unwrap(), adj.unit[x2].unwrap());
                if src.compose(lf.arr(adj.exists.arr(a)), e1) != src.compose(e2, a) {
                    return w("naturality", src.arrow_name(a).to_string());
                }
            }
        }
        None
    }

    /// `(e, η_e(l')) : (E', l') → (E, ∃_e l')`.
    pub fn cocartesian_lift(&self, e: ArrowId, x: ObjId) -> Result<ArrowId> {
        let eta = self.unit(e, x).ok_or_else(|| {
            Error::Precondition(format!(
                "no unit along `{}` at `{}`",
                self.base().arrow_name(e),
                self.fibre(self.base().src(e)).object_name(x)
            ))
        })?;
        Ok(self.total.arrow(e, eta, self.exists(e).obj(x)))
    }
}

/// Splits a total arrow `(e, α) : (E', l') → (E, l)` as the cocartesian
/// lift `(e, η_e(l'))` followed by the vertical arrow `(1_E, ᾱ)`.
pub fn factor_cocartesian_vertical(s: &ExistentialSite, a: ArrowId) -> Result<(ArrowId, ArrowId)> {
    let g = &s.total;
    let (e, _) = g.arrows[a];
    let x = g.objects[g.total.src(a)].1;
    let first = s.cocartesian_lift(e, x)?;
    let bar = s
        .total_transpose(a)
        .ok_or_else(|| Error::Precondition(format!("no transpose for `{}`", g.total.arrow_name(a))))?;
    let second = g.vertical(s.base().tgt(e), bar);
    Ok((first, second))
}

#[cfg(test)]
mod tests;
