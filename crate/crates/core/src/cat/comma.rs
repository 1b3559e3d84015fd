use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use super::{ArrowId, CategoryBuilder, FinCategory, FinFunctor, ObjId};
use crate::error::Result;

/// The comma category `p ↓ c` with its projection to the source of `p`.
///
/// Objects are pairs `(d, u)` with `u : p(d) → c`, named `(d,u)`. An arrow
/// `(d,u) → (d',u')` is an arrow `g : d → d'` with `u' ∘ p(g) = u`; it is
/// named `(g,u')` after the arrow and the target's structure map.
#[derive(Debug, Clone)]
pub struct Comma {
    pub category: Arc<FinCategory>,
    pub projection: FinFunctor,
    /// `(d, u)` for every comma object, indexed by comma object id.
    pub pairs: Vec<(ObjId, ArrowId)>,
    /// Underlying source arrow of every comma arrow.
    pub arrow_of: Vec<ArrowId>,
}

impl Comma {
    pub fn object_of(&self, d: ObjId, u: ArrowId) -> Option<ObjId> {
        self.pairs.iter().position(|&p| p == (d, u))
    }
}

pub fn build_comma(p: &FinFunctor, c: ObjId) -> Result<Comma> {
    let (s, t) = (&*p.source, &*p.target);
    let obj_name = |d: ObjId, u: ArrowId| -> String { format!("({},{})", s.object_name(d), t.arrow_name(u)) };
    let arr_name = |g: ArrowId, u: ArrowId| -> String { format!("({},{})", s.arrow_name(g), t.arrow_name(u)) };

    let mut pairs_raw = Vec::new();
    for d in s.objects() {
        for &u in t.hom(p.obj(d), c) {
            pairs_raw.push((d, u));
        }
    }
    let mut b = CategoryBuilder::new(&format!("{}↓{}", p.name, t.object_name(c)));
    for &(d, u) in &pairs_raw {
        b = b.object(&obj_name(d, u));
    }
    // arrows (g, u') : (d, u' ∘ p(g)) → (d', u')
    let mut arrows = Vec::new();
    for g in s.arrows() {
        let (d, d2) = (s.src(g), s.tgt(g));
        for &u2 in t.hom(p.obj(d2), c) {
            let u = t.compose(u2, p.arr(g));
            arrows.push((g, u, u2));
            b = b.arrow(&arr_name(g, u2), &obj_name(d, u), &obj_name(d2, u2));
        }
    }
    for &(d, u) in &pairs_raw {
        b = b.identity(&obj_name(d, u), &arr_name(s.id(d), u));
    }
    for &(g, _, u2) in &arrows {
        for &(h, _, u3) in &arrows {
            if s.src(h) == s.tgt(g) && t.compose(u3, p.arr(h)) == u2 {
                b = b.compose(&arr_name(h, u3), &arr_name(g, u2), &arr_name(s.compose(h, g), u3));
            }
        }
    }
    let cat = Arc::new(b.build()?);
    let mut pairs = Vec::with_capacity(cat.num_objects());
    let mut obj_map = Vec::with_capacity(cat.num_objects());
    for x in cat.objects() {
        let &(d, u) = pairs_raw.iter().find(|&&(d, u)| obj_name(d, u) == cat.object_name(x)).expect("comma object");
        pairs.push((d, u));
        obj_map.push(d);
    }
    let mut arrow_of = Vec::with_capacity(cat.num_arrows());
    for a in cat.arrows() {
        let &(g, _, _) = arrows.iter().find(|&&(g, _, u2)| arr_name(g, u2) == cat.arrow_name(a)).expect("comma arrow");
        arrow_of.push(g);
    }
    let projection =
        FinFunctor::new(&format!("π_{}", t.object_name(c)), cat.clone(), p.source.clone(), obj_map, arrow_of.clone())?;
    Ok(Comma { category: cat, projection, pairs, arrow_of })
}
