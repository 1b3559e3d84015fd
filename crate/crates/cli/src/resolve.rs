//! Turning a parsed bundle into core objects. Sections may only refer to
//! sections declared above them.

use std::collections::BTreeMap;
use std::sync::Arc;

use relsite_core::cat::{CategoryBuilder, FinCategory, FinFunctor, ObjId};
use relsite_core::existential::existential_topology;
use relsite_core::existential::{Adjoint, ExistentialSite};
use relsite_core::fibred::{giraud_topology, grothendieck_construction, validate_indexed, GrothTotal, IndexedCat};
use relsite_core::frame::FiniteFrame;
use relsite_core::topology::{generate_topology, GrothendieckTopology, Sieve};
use relsite_core::Guards;

use crate::bundle::{pair, Entry, Pos, Section, SectionKind, SiteBundle};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ResolveError {
    #[error("{pos}: unresolved reference to {what} `{name}`")]
    Unresolved { pos: Pos, what: &'static str, name: String },
    #[error("{pos}: {msg}")]
    Invalid { pos: Pos, msg: String },
    /// A core constructor rejected the section.
    #[error("{pos}: {source}")]
    Core { pos: Pos, source: relsite_core::Error },
}

fn invalid<T>(pos: Pos, msg: impl Into<String>) -> Result<T, ResolveError> {
    Err(ResolveError::Invalid { pos, msg: msg.into() })
}

fn core_err(pos: Pos) -> impl Fn(relsite_core::Error) -> ResolveError {
    move |source| ResolveError::Core { pos, source }
}

/// A topology together with the Grothendieck construction it lives on,
/// when it lives on one.
#[derive(Debug, Clone)]
pub struct TopologyItem {
    pub topology: GrothendieckTopology,
    pub total: Option<GrothTotal>,
}

#[derive(Debug, Clone)]
pub struct IndexedItem {
    pub indexed: Arc<IndexedCat>,
    pub total: GrothTotal,
}

/// Every declaration of a bundle, built.
#[derive(Debug, Clone, Default)]
pub struct Resolved {
    pub categories: BTreeMap<String, Arc<FinCategory>>,
    pub frames: Vec<String>,
    pub topologies: BTreeMap<String, TopologyItem>,
    pub functors: BTreeMap<String, FinFunctor>,
    pub indexed: BTreeMap<String, IndexedItem>,
    pub sites: BTreeMap<String, ExistentialSite>,
    /// Section names in declaration order with their kinds.
    pub order: Vec<(SectionKind, String)>,
}

impl Resolved {
    pub fn category(&self, name: &str, pos: Pos) -> Result<&Arc<FinCategory>, ResolveError> {
        self.categories.get(name).ok_or_else(|| ResolveError::Unresolved { pos, what: "category", name: name.into() })
    }

    pub fn topology(&self, name: &str, pos: Pos) -> Result<&TopologyItem, ResolveError> {
        self.topologies.get(name).ok_or_else(|| ResolveError::Unresolved { pos, what: "topology", name: name.into() })
    }

    pub fn functor(&self, name: &str, pos: Pos) -> Result<&FinFunctor, ResolveError> {
        self.functors.get(name).ok_or_else(|| ResolveError::Unresolved { pos, what: "functor", name: name.into() })
    }

    pub fn indexed_cat(&self, name: &str, pos: Pos) -> Result<&IndexedItem, ResolveError> {
        self.indexed.get(name).ok_or_else(|| ResolveError::Unresolved {
            pos,
            what: "indexed category",
            name: name.into(),
        })
    }

    pub fn site(&self, name: &str, pos: Pos) -> Result<&ExistentialSite, ResolveError> {
        self.sites.get(name).ok_or_else(|| ResolveError::Unresolved { pos, what: "site", name: name.into() })
    }
}

fn required<'a>(s: &'a Section, key: &str) -> Result<&'a Entry, ResolveError> {
    s.first(key).ok_or_else(|| ResolveError::Invalid {
        pos: s.pos,
        msg: format!("{} `{}` needs a `{key}` entry", s.kind, s.name),
    })
}

fn single<'a>(s: &'a Section, key: &'a str) -> Result<Option<&'a Entry>, ResolveError> {
    let mut it = s.entries(key);
    let first = it.next();
    if let Some(e) = it.next() {
        return invalid(e.pos, format!("`{key}` given twice in {} `{}`", s.kind, s.name));
    }
    Ok(first)
}

fn category(s: &Section) -> Result<FinCategory, ResolveError> {
    let mut b = CategoryBuilder::new(&s.name).auto_identities();
    for e in &s.entries {
        let a: Vec<&str> = e.args.iter().map(String::as_str).collect();
        b = match e.key.as_str() {
            "object" => b.object(a[0]),
            "arrow" => b.arrow(a[0], a[1], a[2]),
            "identity" => b.identity(a[0], a[1]),
            _ => b.compose(a[0], a[1], a[2]),
        };
    }
    b.build().map_err(core_err(s.pos))
}

fn preorder(s: &Section) -> Result<FinCategory, ResolveError> {
    let elements: Vec<&str> = s.entries("element").map(|e| e.args[0].as_str()).collect();
    for e in s.entries("leq") {
        for (i, x) in e.args.iter().enumerate() {
            if !elements.contains(&x.as_str()) {
                return Err(ResolveError::Unresolved { pos: e.at(i), what: "element", name: x.clone() });
            }
        }
    }
    let leq: Vec<(&str, &str)> = s.entries("leq").map(|e| (e.args[0].as_str(), e.args[1].as_str())).collect();
    FinCategory::preorder(&s.name, &elements, &leq).map_err(core_err(s.pos))
}

fn object(c: &FinCategory, e: &Entry, i: usize) -> Result<ObjId, ResolveError> {
    c.obj(&e.args[i]).ok_or_else(|| ResolveError::Unresolved { pos: e.at(i), what: "object", name: e.args[i].clone() })
}

fn arrow(c: &FinCategory, e: &Entry, i: usize) -> Result<usize, ResolveError> {
    c.arrow(&e.args[i]).ok_or_else(|| ResolveError::Unresolved { pos: e.at(i), what: "arrow", name: e.args[i].clone() })
}

/// `from->to` pairs of an entry, from argument `skip` on, as object ids.
fn pairs(e: &Entry, skip: usize, from: &FinCategory, to: &FinCategory) -> Result<Vec<(ObjId, ObjId)>, ResolveError> {
    let mut out = Vec::new();
    for i in skip..e.args.len() {
        let Some((a, b)) = pair(&e.args[i]) else {
            return invalid(e.at(i), format!("expected `from->to`, found `{}`", e.args[i]));
        };
        let x = from.obj(a).ok_or_else(|| ResolveError::Unresolved { pos: e.at(i), what: "object", name: a.into() })?;
        let y = to.obj(b).ok_or_else(|| ResolveError::Unresolved { pos: e.at(i), what: "object", name: b.into() })?;
        out.push((x, y));
    }
    Ok(out)
}

fn total_map(pos: Pos, what: &str, pairs: &[(ObjId, ObjId)], from: &FinCategory) -> Result<Vec<ObjId>, ResolveError> {
    let mut m = vec![usize::MAX; from.num_objects()];
    for &(x, y) in pairs {
        if m[x] != usize::MAX && m[x] != y {
            return invalid(pos, format!("{what} sends `{}` to two elements", from.object_name(x)));
        }
        m[x] = y;
    }
    if let Some(x) = m.iter().position(|&y| y == usize::MAX) {
        return invalid(pos, format!("{what} does not say where `{}` goes", from.object_name(x)));
    }
    Ok(m)
}

/// Fills the table of every arrow `g ∘ h` left unspecified from the tables
/// of `g` and `h`, repeating until nothing changes. `combine(g, h)` gives the
/// table of the composite.
fn derive_composites(
    base: &FinCategory,
    tables: &mut [Option<Vec<ObjId>>],
    combine: impl Fn(&[ObjId], &[ObjId]) -> Vec<ObjId>,
) {
    let mut changed = true;
    while changed {
        changed = false;
        for g in base.arrows().filter(|&g| !base.is_identity(g)) {
            for h in base.arrows().filter(|&h| !base.is_identity(h) && base.tgt(h) == base.src(g)) {
                let f = base.compose(g, h);
                if tables[f].is_some() || base.is_identity(f) {
                    continue;
                }
                if let (Some(tg), Some(th)) = (&tables[g], &tables[h]) {
                    tables[f] = Some(combine(tg, th));
                    changed = true;
                }
            }
        }
    }
}

fn topology(r: &Resolved, s: &Section, guards: &Guards) -> Result<TopologyItem, ResolveError> {
    let kind = required(s, "kind")?;
    let k = kind.args[0].as_str();
    let expect_args = |n: usize| -> Result<(), ResolveError> {
        if kind.args.len() != n + 1 {
            return invalid(kind.pos, format!("`kind {k}` takes {n} argument(s)"));
        }
        Ok(())
    };
    match k {
        "existential" => {
            expect_args(1)?;
            let site = r.site(&kind.args[1], kind.at(1))?;
            let (t, _) = existential_topology(site, guards).map_err(core_err(kind.pos))?;
            return Ok(TopologyItem { topology: t.with_name(&s.name), total: Some(site.total.clone()) });
        }
        "giraud" => {
            expect_args(2)?;
            let d = r.indexed_cat(&kind.args[1], kind.at(1))?;
            let j = r.topology(&kind.args[2], kind.at(2))?;
            if j.topology.base() != &d.indexed.base {
                return invalid(
                    kind.at(2),
                    format!("`{}` is not a topology on the base of `{}`", kind.args[2], kind.args[1]),
                );
            }
            let t = giraud_topology(&d.total, &j.topology, guards).map_err(core_err(kind.pos))?;
            return Ok(TopologyItem { topology: t.with_name(&s.name), total: Some(d.total.clone()) });
        }
        _ => {}
    }
    let on = required(s, "on")?;
    let (base, total) = match on.args.as_slice() {
        [c] => (r.category(c, on.at(0))?.clone(), None),
        [t, d] if t == "total" => {
            let d = r.indexed_cat(d, on.at(1))?;
            (d.total.total.clone(), Some(d.total.clone()))
        }
        _ => return invalid(on.pos, "expected `on CATEGORY` or `on total INDEXED`"),
    };
    let topology = match k {
        "trivial" => {
            expect_args(0)?;
            GrothendieckTopology::trivial(base).with_name(&s.name)
        }
        "chaotic" => {
            expect_args(0)?;
            GrothendieckTopology::chaotic(base, guards).map_err(core_err(kind.pos))?.with_name(&s.name)
        }
        "canonical" => {
            expect_args(0)?;
            let f = FiniteFrame::from_category(&base).map_err(core_err(kind.pos))?;
            Arc::new(f).canonical_topology(base, guards).map_err(core_err(kind.pos))?.with_name(&s.name)
        }
        "coverage" => {
            expect_args(0)?;
            let mut cov = Vec::new();
            for e in s.entries("cover") {
                let x = object(&base, e, 0)?;
                let fam = (1..e.args.len()).map(|i| arrow(&base, e, i)).collect::<Result<Vec<_>, _>>()?;
                cov.push((x, fam));
            }
            generate_topology(base, &s.name, &cov, guards).map_err(core_err(s.pos))?
        }
        "sieves" => {
            expect_args(0)?;
            let mut sieves = Vec::new();
            for e in s.entries("sieve") {
                let x = object(&base, e, 0)?;
                let fam = (1..e.args.len()).map(|i| arrow(&base, e, i)).collect::<Result<Vec<_>, _>>()?;
                sieves.push(Sieve::from_arrows(&base, x, fam).map_err(core_err(e.pos))?);
            }
            GrothendieckTopology::from_sieves(base, &s.name, sieves).map_err(core_err(s.pos))?
        }
        other => {
            return invalid(
                kind.at(0),
                format!("unknown topology kind `{other}` (expected trivial, chaotic, canonical, coverage, sieves, existential or giraud)"),
            )
        }
    };
    if k != "coverage" && s.first("cover").is_some() {
        return invalid(s.first("cover").unwrap().pos, "`cover` entries need `kind coverage`");
    }
    if k != "sieves" && s.first("sieve").is_some() {
        return invalid(s.first("sieve").unwrap().pos, "`sieve` entries need `kind sieves`");
    }
    Ok(TopologyItem { topology, total })
}

fn functor(r: &Resolved, s: &Section) -> Result<FinFunctor, ResolveError> {
    let from = required(s, "from")?;
    let to = required(s, "to")?;
    let src = r.category(&from.args[0], from.at(0))?.clone();
    let tgt = r.category(&to.args[0], to.at(0))?.clone();
    let mut objects = Vec::new();
    for e in s.entries("object") {
        object(&src, e, 0)?;
        object(&tgt, e, 1)?;
        objects.push((e.args[0].as_str(), e.args[1].as_str()));
    }
    let mut arrows = Vec::new();
    for e in s.entries("arrow") {
        arrow(&src, e, 0)?;
        arrow(&tgt, e, 1)?;
        arrows.push((e.args[0].as_str(), e.args[1].as_str()));
    }
    if arrows.is_empty() && tgt.is_preorder() {
        let pairs: Vec<(ObjId, ObjId)> =
            objects.iter().map(|(a, b)| (src.obj(a).unwrap(), tgt.obj(b).unwrap())).collect();
        let obj = total_map(s.pos, &format!("functor `{}`", s.name), &pairs, &src)?;
        return FinFunctor::into_preorder(&s.name, src, tgt, obj).map_err(core_err(s.pos));
    }
    FinFunctor::from_names(&s.name, src, tgt, &objects, &arrows).map_err(core_err(s.pos))
}

fn indexed(r: &Resolved, s: &Section) -> Result<IndexedItem, ResolveError> {
    let base_e = required(s, "base")?;
    let base = r.category(&base_e.args[0], base_e.at(0))?.clone();
    let mut fibres: Vec<Option<Arc<FinCategory>>> = vec![None; base.num_objects()];
    for e in s.entries("fibre") {
        let c = object(&base, e, 0)?;
        if fibres[c].is_some() {
            return invalid(e.pos, format!("two fibres over `{}`", e.args[0]));
        }
        fibres[c] = Some(r.category(&e.args[1], e.at(1))?.clone());
    }
    if let Some(c) = fibres.iter().position(Option::is_none) {
        return invalid(s.pos, format!("no fibre over `{}`", base.object_name(c)));
    }
    let fibres: Vec<Arc<FinCategory>> = fibres.into_iter().map(Option::unwrap).collect();
    let uses_functors = s.first("transition").is_some();
    if uses_functors && s.first("map").is_some() {
        return invalid(s.first("map").unwrap().pos, "use either `map` or `transition` entries, not both");
    }
    let d = if uses_functors {
        let mut ts: Vec<Option<FinFunctor>> = vec![None; base.num_arrows()];
        for e in s.entries("transition") {
            let f = arrow(&base, e, 0)?;
            ts[f] = Some(r.functor(&e.args[1], e.at(1))?.clone());
        }
        let mut transitions = Vec::with_capacity(base.num_arrows());
        for f in base.arrows() {
            match ts[f].take() {
                Some(t) => transitions.push(t),
                None if base.is_identity(f) => transitions.push(FinFunctor::identity(fibres[base.src(f)].clone())),
                None => return invalid(s.pos, format!("no transition along `{}`", base.arrow_name(f))),
            }
        }
        IndexedCat::new(&s.name, base.clone(), fibres, transitions).map_err(core_err(s.pos))?
    } else {
        let mut maps: Vec<Option<Vec<ObjId>>> = vec![None; base.num_arrows()];
        for e in s.entries("map") {
            let f = arrow(&base, e, 0)?;
            let (from, to) = (&fibres[base.tgt(f)], &fibres[base.src(f)]);
            let ps = pairs(e, 1, from, to)?;
            maps[f] = Some(total_map(e.pos, &format!("map along `{}`", e.args[0]), &ps, from)?);
        }
        derive_composites(&base, &mut maps, |g, h| g.iter().map(|&x| h[x]).collect());
        let mut out = Vec::with_capacity(base.num_arrows());
        for f in base.arrows() {
            match maps[f].take() {
                Some(m) => out.push(m),
                None if base.is_identity(f) => out.push(fibres[base.src(f)].objects().collect()),
                None => return invalid(s.pos, format!("no map along `{}`", base.arrow_name(f))),
            }
        }
        IndexedCat::from_preorder_maps(&s.name, base.clone(), fibres, out).map_err(core_err(s.pos))?
    };
    if let Some(c) = validate_indexed(&d).checks.into_iter().find(|c| c.status.is_failure()) {
        let w = c.witness.map(|w| format!(" at {w}")).unwrap_or_default();
        return invalid(s.pos, format!("indexed category `{}` fails {} ({}){w}", s.name, c.name, c.cites));
    }
    let indexed = Arc::new(d);
    let total = grothendieck_construction(indexed.clone()).map_err(core_err(s.pos))?;
    Ok(IndexedItem { indexed, total })
}

fn site(r: &Resolved, s: &Section, guards: &Guards) -> Result<ExistentialSite, ResolveError> {
    let ie = required(s, "indexed")?;
    let d = r.indexed_cat(&ie.args[0], ie.at(0))?.indexed.clone();
    let b = d.base.clone();
    let mut tops: Vec<Option<GrothendieckTopology>> = vec![None; b.num_objects()];
    if let Some(e) = single(s, "fibre-topologies")? {
        for c in b.objects() {
            let fib = d.fibres[c].clone();
            tops[c] = Some(match e.args[0].as_str() {
                "trivial" => GrothendieckTopology::trivial(fib),
                "canonical" => {
                    let f = FiniteFrame::from_category(&fib).map_err(core_err(e.pos))?;
                    Arc::new(f).canonical_topology(fib, guards).map_err(core_err(e.pos))?
                }
                other => {
                    return invalid(e.at(0), format!("`fibre-topologies` is `canonical` or `trivial`, not `{other}`"))
                }
            });
        }
    }
    for e in s.entries("fibre-topology") {
        let c = object(&b, e, 0)?;
        let t = r.topology(&e.args[1], e.at(1))?;
        if t.topology.base() != &d.fibres[c] {
            return invalid(e.at(1), format!("`{}` is not a topology on the fibre over `{}`", e.args[1], e.args[0]));
        }
        tops[c] = Some(t.topology.clone());
    }
    if let Some(c) = tops.iter().position(Option::is_none) {
        return invalid(s.pos, format!("no topology on the fibre over `{}`", b.object_name(c)));
    }
    let tops: Vec<GrothendieckTopology> = tops.into_iter().map(Option::unwrap).collect();
    if s.first("exists").is_none() {
        return ExistentialSite::with_computed_adjoints(&s.name, d, tops).map_err(|rep| {
            let w = rep.checks.first().and_then(|c| c.witness.clone()).unwrap_or_default();
            ResolveError::Invalid { pos: s.pos, msg: format!("no left adjoints could be computed: {w}") }
        });
    }
    let mut tables: Vec<Option<Vec<ObjId>>> = vec![None; b.num_arrows()];
    for e in s.entries("exists") {
        let f = arrow(&b, e, 0)?;
        let (from, to) = (&d.fibres[b.src(f)], &d.fibres[b.tgt(f)]);
        let ps = pairs(e, 1, from, to)?;
        tables[f] = Some(total_map(e.pos, &format!("∃ along `{}`", e.args[0]), &ps, from)?);
    }
    derive_composites(&b, &mut tables, |g, h| h.iter().map(|&x| g[x]).collect());
    let mut adjoints = Vec::with_capacity(b.num_arrows());
    for f in b.arrows() {
        let a = match tables[f].take() {
            Some(t) => Adjoint::from_preorder_table(&d, f, t).map_err(core_err(s.pos))?,
            None if b.is_identity(f) => Adjoint::identity(d.fibres[b.src(f)].clone()),
            None => return invalid(s.pos, format!("no ∃ table along `{}`", b.arrow_name(f))),
        };
        adjoints.push(a);
    }
    ExistentialSite::new(&s.name, d, tops, adjoints).map_err(core_err(s.pos))
}

/// Builds every section in order.
pub fn resolve(bundle: &SiteBundle, guards: &Guards) -> Result<Resolved, ResolveError> {
    let mut r = Resolved::default();
    for s in &bundle.sections {
        match s.kind {
            SectionKind::Category => {
                let c = category(s)?;
                r.categories.insert(s.name.clone(), Arc::new(c));
            }
            SectionKind::Preorder | SectionKind::Frame => {
                let c = preorder(s)?;
                r.categories.insert(s.name.clone(), Arc::new(c));
                if s.kind == SectionKind::Frame {
                    r.frames.push(s.name.clone());
                }
            }
            SectionKind::Topology => {
                let t = topology(&r, s, guards)?;
                r.topologies.insert(s.name.clone(), t);
            }
            SectionKind::Functor => {
                let f = functor(&r, s)?;
                r.functors.insert(s.name.clone(), f);
            }
            SectionKind::Indexed => {
                let d = indexed(&r, s)?;
                r.indexed.insert(s.name.clone(), d);
            }
            SectionKind::Site => {
                let x = site(&r, s, guards)?;
                r.sites.insert(s.name.clone(), x);
            }
        }
        r.order.push((s.kind, s.name.clone()));
    }
    Ok(r)
}
