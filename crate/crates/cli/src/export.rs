//! Writing core objects back out as bundle sections.

use relsite_core::cat::{leq_name, FinCategory};
use relsite_core::frame::FiniteFrame;
use relsite_core::locale::InternalLocaleCandidate;
use relsite_core::{GrothendieckTopology, Guards, Result};

use crate::bundle::{Section, SectionKind, SiteBundle};

/// A name usable as a single bundle token: whitespace becomes `_`.
pub fn token(name: &str) -> String {
    let t: String = name.chars().map(|c| if c.is_whitespace() { '_' } else { c }).collect();
    if t.is_empty() || t.starts_with('#') || t.starts_with('[') {
        format!("_{t}")
    } else {
        t
    }
}

/// Pairs `x < y` with nothing strictly between them.
fn hasse(n: usize, leq: impl Fn(usize, usize) -> bool) -> Vec<(usize, usize)> {
    let lt = |a: usize, b: usize| a != b && leq(a, b) && !leq(b, a);
    let mut out = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if lt(a, b) && !(0..n).any(|c| lt(a, c) && lt(c, b)) {
                out.push((a, b));
            }
        }
    }
    // equivalent but distinct elements of a preorder
    for a in 0..n {
        for b in 0..n {
            if a != b && leq(a, b) && leq(b, a) {
                out.push((a, b));
            }
        }
    }
    out
}

fn order_section(kind: SectionKind, name: &str, names: &[String], leq: impl Fn(usize, usize) -> bool) -> Section {
    let mut s = Section::new(kind, &token(name));
    for n in names {
        s.push("element", [token(n)]);
    }
    for (a, b) in hasse(names.len(), leq) {
        s.push("leq", [token(&names[a]), token(&names[b])]);
    }
    s
}

pub fn frame_section(name: &str, f: &FiniteFrame) -> Section {
    order_section(SectionKind::Frame, name, f.elements(), |a, b| f.leq(a, b))
}

/// A `preorder` section when `c` is thin with arrows named `x<=y`, a full
/// `category` section otherwise.
pub fn category_section(c: &FinCategory) -> Section {
    let order_names = c.arrows().all(|f| c.arrow_name(f) == leq_name(c.object_name(c.src(f)), c.object_name(c.tgt(f))));
    if c.is_preorder() && order_names {
        let names: Vec<String> = c.objects().map(|x| c.object_name(x).to_string()).collect();
        return order_section(SectionKind::Preorder, c.name(), &names, |a, b| c.leq(a, b));
    }
    let mut s = Section::new(SectionKind::Category, &token(c.name()));
    for x in c.objects() {
        s.push("object", [token(c.object_name(x))]);
    }
    for x in c.objects() {
        s.push("identity", [token(c.object_name(x)), token(c.arrow_name(c.id(x)))]);
    }
    for f in c.arrows().filter(|&f| !c.is_identity(f)) {
        s.push("arrow", [token(c.arrow_name(f)), token(c.object_name(c.src(f))), token(c.object_name(c.tgt(f)))]);
    }
    for g in c.arrows().filter(|&g| !c.is_identity(g)) {
        for f in c.arrows().filter(|&f| !c.is_identity(f) && c.tgt(f) == c.src(g)) {
            s.push("compose", [token(c.arrow_name(g)), token(c.arrow_name(f)), token(c.arrow_name(c.compose(g, f)))]);
        }
    }
    s
}

/// A `kind sieves` topology listing every covering sieve. `on` is the
/// argument list of the `on` entry.
pub fn topology_section(name: &str, on: &[&str], t: &GrothendieckTopology, guards: &Guards) -> Result<Section> {
    let c = &**t.base();
    let mut s = Section::new(SectionKind::Topology, &token(name));
    s.push("on", on.iter().map(|a| token(a)));
    s.push("kind", ["sieves"]);
    for x in c.objects() {
        for sv in t.covering_sieves(x, guards)? {
            let mut args = vec![token(c.object_name(x))];
            args.extend(sv.arrows(c).map(|f| token(c.arrow_name(f))));
            s.push("sieve", args);
        }
    }
    Ok(s)
}

/// The base, one frame per object, the indexed frame and the site with its
/// `∃` tables.
pub fn locale_bundle(l: &InternalLocaleCandidate) -> SiteBundle {
    let b = &**l.base();
    let mut out = SiteBundle::default();
    out.sections.push(category_section(b));
    let frame_name = |c: usize| token(&format!("{}@{}", l.name, b.object_name(c)));
    for c in b.objects() {
        out.sections.push(frame_section(&frame_name(c), &l.frames[c]));
    }
    let indexed = token(&l.name);
    let mut d = Section::new(SectionKind::Indexed, &indexed);
    d.push("base", [token(b.name())]);
    for c in b.objects() {
        d.push("fibre", [token(b.object_name(c)), frame_name(c)]);
    }
    let non_identity: Vec<usize> = b.arrows().filter(|&f| !b.is_identity(f)).collect();
    for &f in &non_identity {
        let (src, tgt) = (&l.frames[b.src(f)], &l.frames[b.tgt(f)]);
        let mut args = vec![token(b.arrow_name(f))];
        args.extend((0..tgt.len()).map(|y| format!("{}->{}", token(tgt.element(y)), token(src.element(l.maps[f][y])))));
        d.push("map", args);
    }
    out.sections.push(d);
    let mut site = Section::new(SectionKind::Site, &token(&format!("{}-site", l.name)));
    site.push("indexed", [indexed]);
    site.push("fibre-topologies", ["canonical"]);
    for &f in &non_identity {
        let (src, tgt) = (&l.frames[b.src(f)], &l.frames[b.tgt(f)]);
        let ex = l.exists_map(f);
        let mut args = vec![token(b.arrow_name(f))];
        args.extend((0..src.len()).map(|x| format!("{}->{}", token(src.element(x)), token(tgt.element(ex[x])))));
        site.push("exists", args);
    }
    out.sections.push(site);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use relsite_core::fixtures;

    #[test]
    fn hasse_of_p2() {
        let p = fixtures::p2();
        let s = category_section(&p);
        assert_eq!(s.entries("leq").count(), 4);
        assert_eq!(s.entries("element").count(), 4);
    }

    #[test]
    fn thin_category_with_named_arrows_stays_a_category() {
        let s = category_section(&fixtures::arrow());
        assert_eq!(s.kind, SectionKind::Category);
        assert_eq!(s.first("arrow").unwrap().args, vec!["f", "a", "b"]);
        assert_eq!(s.entries("arrow").count(), 1);
        assert_eq!(s.entries("identity").count(), 2);
        assert_eq!(s.entries("compose").count(), 0);
    }

    #[test]
    fn tokens() {
        assert_eq!(token("a b"), "a_b");
        assert_eq!(token("#x"), "_#x");
        assert_eq!(token(""), "_");
    }
}
