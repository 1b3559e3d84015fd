//! Finite categories given by explicit object, arrow and composition tables.

mod comma;
mod functor;
mod limit;

pub use comma::{build_comma, Comma};
pub use functor::FinFunctor;
pub use limit::{
    compute_limit, cones, has_finite_limits, is_limit, is_pullback, limit_preservation_violation, pullback,
    pullback_preservation_violation, shapes, terminal, terminal_preservation_violation, LimitCone, Pullback,
};

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{input, Result};
use crate::report::{Check, Status, VerificationReport, Witness};

pub type ObjId = usize;
pub type ArrowId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arrow {
    pub name: String,
    pub src: ObjId,
    pub tgt: ObjId,
}

/// A finite category. Objects and arrows are indexed in lexicographic order
/// of their identifiers, so every index-ordered traversal is reproducible.
///
/// The composition table may violate the category laws; it is only required
/// to be total on composable pairs and to mention declared identifiers.
/// [`validate_category`] reports law violations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinCategory {
    name: String,
    objects: Vec<String>,
    arrows: Vec<Arrow>,
    identity: Vec<ArrowId>,
    /// `table[g * n + f] = g ∘ f`
    table: Vec<Option<ArrowId>>,
    incoming: Vec<Vec<ArrowId>>,
    incoming_pos: Vec<usize>,
    hom: Vec<Vec<ArrowId>>,
    preorder: bool,
    obj_index: BTreeMap<String, ObjId>,
    arrow_index: BTreeMap<String, ArrowId>,
}

impl FinCategory {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn num_objects(&self) -> usize {
        self.objects.len()
    }

    pub fn num_arrows(&self) -> usize {
        self.arrows.len()
    }

    pub fn objects(&self) -> core::ops::Range<ObjId> {
        0..self.objects.len()
    }

    pub fn arrows(&self) -> core::ops::Range<ArrowId> {
        0..self.arrows.len()
    }

    pub fn object_name(&self, x: ObjId) -> &str {
        &self.objects[x]
    }

    pub fn arrow_name(&self, f: ArrowId) -> &str {
        &self.arrows[f].name
    }

    pub fn obj(&self, name: &str) -> Option<ObjId> {
        self.obj_index.get(name).copied()
    }

    pub fn arrow(&self, name: &str) -> Option<ArrowId> {
        self.arrow_index.get(name).copied()
    }

    #[inline]
    pub fn src(&self, f: ArrowId) -> ObjId {
        self.arrows[f].src
    }

    #[inline]
    pub fn tgt(&self, f: ArrowId) -> ObjId {
        self.arrows[f].tgt
    }

    #[inline]
    pub fn id(&self, x: ObjId) -> ArrowId {
        self.identity[x]
    }

    pub fn is_identity(&self, f: ArrowId) -> bool {
        self.identity[self.src(f)] == f
    }

    /// Raw table lookup for `g ∘ f`; `None` when the table has no entry.
    #[inline]
    pub fn try_compose(&self, g: ArrowId, f: ArrowId) -> Option<ArrowId> {
        self.table[g * self.arrows.len() + f]
    }

    /// `g ∘ f` for a composable pair.
    #[inline]
    pub fn compose(&self, g: ArrowId, f: ArrowId) -> ArrowId {
        match self.table[g * self.arrows.len() + f] {
            Some(h) => h,
            None => panic!("{}: {} ∘ {} is not defined", self.name, self.arrows[g].name, self.arrows[f].name),
        }
    }

    /// Arrows with codomain `x`, in index order. Sieve bitsets on `x` are
    /// indexed by position in this list.
    pub fn incoming(&self, x: ObjId) -> &[ArrowId] {
        &self.incoming[x]
    }

    /// Position of `f` in `incoming(tgt(f))`.
    #[inline]
    pub fn incoming_pos(&self, f: ArrowId) -> usize {
        self.incoming_pos[f]
    }

    pub fn hom(&self, x: ObjId, y: ObjId) -> &[ArrowId] {
        &self.hom[x * self.objects.len() + y]
    }

    /// At most one arrow between any two objects.
    pub fn is_preorder(&self) -> bool {
        self.preorder
    }

    /// `x ≤ y` in a preorder category (an arrow `x → y` exists).
    pub fn leq(&self, x: ObjId, y: ObjId) -> bool {
        !self.hom(x, y).is_empty()
    }

    pub fn is_iso(&self, f: ArrowId) -> bool {
        let (x, y) = (self.src(f), self.tgt(f));
        self.hom(y, x)
            .iter()
            .any(|&g| self.try_compose(g, f) == Some(self.id(x)) && self.try_compose(f, g) == Some(self.id(y)))
    }

    pub fn isomorphic(&self, x: ObjId, y: ObjId) -> bool {
        x == y || self.hom(x, y).iter().any(|&f| self.is_iso(f))
    }

    /// Preorder category on `elements` whose order is the reflexive-transitive
    /// closure of `leq`. The arrow `x → y` is named `x<=y`.
    pub fn preorder(name: &str, elements: &[&str], leq: &[(&str, &str)]) -> Result<FinCategory> {
        let n = elements.len();
        let mut idx = BTreeMap::new();
        for (i, e) in elements.iter().enumerate() {
            if idx.insert(*e, i).is_some() {
                return input(format!("{name}: duplicate element `{e}`"));
            }
        }
        let mut rel = vec![false; n * n];
        for (a, b) in leq {
            let (Some(&i), Some(&j)) = (idx.get(a), idx.get(b)) else {
                return input(format!("{name}: relation mentions unknown element in {a} <= {b}"));
            };
            rel[i * n + j] = true;
        }
        let names = elements.iter().map(|s| s.to_string()).collect();
        FinCategory::from_relation(name, names, rel)
    }

    /// Preorder category from an `n × n` relation matrix (closed reflexively
    /// and transitively first).
    pub fn from_relation(name: &str, elements: Vec<String>, mut rel: Vec<bool>) -> Result<FinCategory> {
        let n = elements.len();
        assert_eq!(rel.len(), n * n);
        for i in 0..n {
            rel[i * n + i] = true;
        }
        for k in 0..n {
            for i in 0..n {
                if rel[i * n + k] {
                    for j in 0..n {
                        if rel[k * n + j] {
                            rel[i * n + j] = true;
                        }
                    }
                }
            }
        }
        let mut b = CategoryBuilder::new(name);
        for e in &elements {
            b = b.object(e);
        }
        for i in 0..n {
            for j in 0..n {
                if rel[i * n + j] {
                    let an = leq_name(&elements[i], &elements[j]);
                    b = b.arrow(&an, &elements[i], &elements[j]);
                    if i == j {
                        b = b.identity(&elements[i], &an);
                    }
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                if !rel[i * n + j] {
                    continue;
                }
                for k in 0..n {
                    if rel[j * n + k] {
                        b = b.compose(
                            &leq_name(&elements[j], &elements[k]),
                            &leq_name(&elements[i], &elements[j]),
                            &leq_name(&elements[i], &elements[k]),
                        );
                    }
                }
            }
        }
        b.build()
    }

    /// Display form of a set of arrows.
    pub fn arrow_set(&self, arrows: impl IntoIterator<Item = ArrowId>) -> String {
        let mut names: Vec<&str> = arrows.into_iter().map(|a| self.arrow_name(a)).collect();
        names.sort_unstable();
        crate::bits::brace_list(names)
    }
}

/// Name of the unique arrow `x → y` in a preorder category.
pub fn leq_name(x: &str, y: &str) -> String {
    format!("{x}<={y}")
}

/// Builder for [`FinCategory`] working with string identifiers.
#[derive(Debug, Clone, Default)]
pub struct CategoryBuilder {
    name: String,
    objects: Vec<String>,
    arrows: Vec<(String, String, String)>,
    identities: Vec<(String, String)>,
    compositions: Vec<(String, String, String)>,
    auto_identities: bool,
}

impl CategoryBuilder {
    pub fn new(name: &str) -> Self {
        CategoryBuilder { name: name.to_string(), ..Default::default() }
    }

    pub fn object(mut self, name: &str) -> Self {
        self.objects.push(name.to_string());
        self
    }

    pub fn arrow(mut self, name: &str, src: &str, tgt: &str) -> Self {
        self.arrows.push((name.to_string(), src.to_string(), tgt.to_string()));
        self
    }

    pub fn identity(mut self, object: &str, arrow: &str) -> Self {
        self.identities.push((object.to_string(), arrow.to_string()));
        self
    }

    /// Declares `g ∘ f = h`.
    pub fn compose(mut self, g: &str, f: &str, h: &str) -> Self {
        self.compositions.push((g.to_string(), f.to_string(), h.to_string()));
        self
    }

    /// Objects without a declared identity get one named `1_x`.
    pub fn auto_identities(mut self) -> Self {
        self.auto_identities = true;
        self
    }

    pub fn build(self) -> Result<FinCategory> {
        let name = self.name;
        let mut objects = self.objects;
        objects.sort();
        for w in objects.windows(2) {
            if w[0] == w[1] {
                return input(format!("{name}: duplicate object `{}`", w[0]));
            }
        }
        let obj_index: BTreeMap<String, ObjId> = objects.iter().enumerate().map(|(i, o)| (o.clone(), i)).collect();

        let mut raw = self.arrows;
        let mut ident_decl: BTreeMap<String, String> = BTreeMap::new();
        for (o, a) in &self.identities {
            if !obj_index.contains_key(o) {
                return input(format!("{name}: identity for unknown object `{o}`"));
            }
            if ident_decl.insert(o.clone(), a.clone()).is_some() {
                return input(format!("{name}: object `{o}` has two identities"));
            }
            if !raw.iter().any(|(n, _, _)| n == a) {
                raw.push((a.clone(), o.clone(), o.clone()));
            }
        }
        for o in &objects {
            if !ident_decl.contains_key(o) {
                if !self.auto_identities {
                    return input(format!("{name}: object `{o}` has no identity"));
                }
                let a = format!("1_{o}");
                raw.push((a.clone(), o.clone(), o.clone()));
                ident_decl.insert(o.clone(), a);
            }
        }
        raw.sort();
        for w in raw.windows(2) {
            if w[0].0 == w[1].0 {
                return input(format!("{name}: duplicate arrow `{}`", w[0].0));
            }
        }
        let mut arrows = Vec::with_capacity(raw.len());
        for (a, s, t) in &raw {
            let (Some(&src), Some(&tgt)) = (obj_index.get(s), obj_index.get(t)) else {
                return input(format!("{name}: arrow `{a}` has unknown endpoint"));
            };
            arrows.push(Arrow { name: a.clone(), src, tgt });
        }
        let arrow_index: BTreeMap<String, ArrowId> =
            arrows.iter().enumerate().map(|(i, a)| (a.name.clone(), i)).collect();
        let identity: Vec<ArrowId> = objects.iter().map(|o| arrow_index[&ident_decl[o]]).collect();

        let na = arrows.len();
        let mut table = vec![None; na * na];
        for (g, f, h) in &self.compositions {
            let (Some(&gi), Some(&fi), Some(&hi)) = (arrow_index.get(g), arrow_index.get(f), arrow_index.get(h)) else {
                return input(format!("{name}: composition {g} ∘ {f} = {h} mentions unknown arrow"));
            };
            if table[gi * na + fi].is_some_and(|old| old != hi) {
                return input(format!("{name}: composition {g} ∘ {f} declared twice"));
            }
            table[gi * na + fi] = Some(hi);
        }
        // identity compositions are implied unless declared otherwise
        for f in 0..na {
            let (s, t) = (arrows[f].src, arrows[f].tgt);
            let (is, it) = (identity[s], identity[t]);
            if table[it * na + f].is_none() {
                table[it * na + f] = Some(f);
            }
            if table[f * na + is].is_none() {
                table[f * na + is] = Some(f);
            }
        }
        for g in 0..na {
            for f in 0..na {
                if arrows[f].tgt == arrows[g].src && table[g * na + f].is_none() {
                    return input(format!(
                        "{name}: composition table is not total, {} ∘ {} missing",
                        arrows[g].name, arrows[f].name
                    ));
                }
            }
        }

        let no = objects.len();
        let mut incoming = vec![Vec::new(); no];
        let mut incoming_pos = vec![0; na];
        let mut hom = vec![Vec::new(); no * no];
        for (i, a) in arrows.iter().enumerate() {
            incoming_pos[i] = incoming[a.tgt].len();
            incoming[a.tgt].push(i);
            hom[a.src * no + a.tgt].push(i);
        }
        let preorder = hom.iter().all(|h| h.len() <= 1);
        Ok(FinCategory {
            name,
            objects,
            arrows,
            identity,
            table,
            incoming,
            incoming_pos,
            hom,
            preorder,
            obj_index,
            arrow_index,
        })
    }
}

const CITE_TYPING: &str = "composition is defined exactly on composable pairs, with correct endpoints";
const CITE_IDENTITY: &str = "identity laws id ∘ f = f = f ∘ id";
const CITE_ASSOC: &str = "associativity (h ∘ g) ∘ f = h ∘ (g ∘ f)";

/// Checks typing of the composition table, the identity laws and
/// associativity over all composable triples. Associativity is skipped on
/// an ill-typed table.
pub fn validate_category(c: &FinCategory) -> VerificationReport {
    let mut r = VerificationReport::new();
    let na = c.num_arrows();

    let mut typing = None;
    for x in c.objects() {
        let i = c.id(x);
        if c.src(i) != x || c.tgt(i) != x {
            typing = Some(Witness::new().with("identity", c.arrow_name(i)).with("object", c.object_name(x)));
            break;
        }
    }
    if typing.is_none() {
        'outer: for g in 0..na {
            for f in 0..na {
                let composable = c.tgt(f) == c.src(g);
                match c.try_compose(g, f) {
                    Some(h) if !composable || c.src(h) != c.src(f) || c.tgt(h) != c.tgt(g) => {
                        typing = Some(pair_witness(c, g, f).with("result", c.arrow_name(h)));
                        break 'outer;
                    }
                    _ => {}
                }
            }
        }
    }
    let typed = typing.is_none();
    r.push(Check::from_witness("composition-typing", CITE_TYPING, typing));

    let mut ident = None;
    'outer: for f in 0..na {
        let (s, t) = (c.src(f), c.tgt(f));
        if c.try_compose(c.id(t), f) != Some(f) {
            ident = Some(pair_witness(c, c.id(t), f));
            break 'outer;
        }
        if c.try_compose(f, c.id(s)) != Some(f) {
            ident = Some(pair_witness(c, f, c.id(s)));
            break 'outer;
        }
    }
    r.push(Check::from_witness("identity-laws", CITE_IDENTITY, ident));

    let mut assoc = None;
    'outer: for f in 0..na {
        for g in 0..na {
            if c.src(g) != c.tgt(f) {
                continue;
            }
            let Some(gf) = c.try_compose(g, f) else { continue };
            for h in 0..na {
                if c.src(h) != c.tgt(g) {
                    continue;
                }
                let Some(hg) = c.try_compose(h, g) else { continue };
                let lhs = if c.tgt(gf) == c.src(h) { c.try_compose(h, gf) } else { None };
                let rhs = if c.tgt(f) == c.src(hg) { c.try_compose(hg, f) } else { None };
                if lhs != rhs || lhs.is_none() {
                    assoc = Some(
                        Witness::new().with("h", c.arrow_name(h)).with("g", c.arrow_name(g)).with("f", c.arrow_name(f)),
                    );
                    break 'outer;
                }
            }
        }
    }
    r.push(if typed {
        Check::from_witness("associativity", CITE_ASSOC, assoc)
    } else {
        Check::new("associativity", CITE_ASSOC, Status::Skipped).with_note("the composition table is ill-typed")
    });
    r
}

fn pair_witness(c: &FinCategory, g: ArrowId, f: ArrowId) -> Witness {
    Witness::new().with("g", c.arrow_name(g)).with("f", c.arrow_name(f))
}
