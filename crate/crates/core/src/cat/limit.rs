use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use super::{ArrowId, FinCategory, FinFunctor, ObjId};
use crate::report::Witness;

/// A cone over a diagram `d : I → C`: an apex and one leg per object of `I`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LimitCone {
    pub apex: ObjId,
    pub legs: Vec<ArrowId>,
}

/// All cones over `d` with the given apex, in lexicographic order of legs.
pub fn cones(d: &FinFunctor, apex: ObjId) -> Vec<Vec<ArrowId>> {
    let (shape, c) = (&*d.source, &*d.target);
    let n = shape.num_objects();
    let mut out = Vec::new();
    let mut legs = vec![usize::MAX; n];
    fn go(
        d: &FinFunctor,
        shape: &FinCategory,
        c: &FinCategory,
        apex: ObjId,
        j: usize,
        legs: &mut Vec<ArrowId>,
        out: &mut Vec<Vec<ArrowId>>,
    ) {
        if j == shape.num_objects() {
            out.push(legs.clone());
            return;
        }
        for &leg in c.hom(apex, d.obj(j)) {
            legs[j] = leg;
            // every shape arrow between already-assigned objects must commute
            let ok = shape.arrows().all(|u| {
                let (s, t) = (shape.src(u), shape.tgt(u));
                if s > j || t > j {
                    return true;
                }
                c.compose(d.arr(u), legs[s]) == legs[t]
            });
            if ok {
                go(d, shape, c, apex, j + 1, legs, out);
            }
        }
        legs[j] = usize::MAX;
    }
    go(d, shape, c, apex, 0, &mut legs, &mut out);
    out
}

/// Whether `cone` over `d` is universal: every cone factors through it by
/// exactly one arrow.
pub fn is_limit(d: &FinFunctor, cone: &LimitCone) -> bool {
    let c = &*d.target;
    c.objects().all(|x| cones(d, x).iter().all(|other| mediating(c, cone, x, other).len() == 1))
}

fn mediating(c: &FinCategory, cone: &LimitCone, x: ObjId, other: &[ArrowId]) -> Vec<ArrowId> {
    c.hom(x, cone.apex)
        .iter()
        .copied()
        .filter(|&m| cone.legs.iter().zip(other).all(|(&leg, &o)| c.compose(leg, m) == o))
        .collect()
}

/// A limit of `d`, or `None` when no cone is universal. The apex is the
/// first universal candidate in object order, which is the lexicographically
/// smallest identifier among the isomorphic candidates.
pub fn compute_limit(d: &FinFunctor) -> Option<LimitCone> {
    let c = &*d.target;
    let all: Vec<Vec<Vec<ArrowId>>> = c.objects().map(|x| cones(d, x)).collect();
    for apex in c.objects() {
        'cand: for legs in &all[apex] {
            let cone = LimitCone { apex, legs: legs.clone() };
            for x in c.objects() {
                for other in &all[x] {
                    if mediating(c, &cone, x, other).len() != 1 {
                        continue 'cand;
                    }
                }
            }
            return Some(cone);
        }
    }
    None
}

/// Terminal object with the smallest identifier, if any.
pub fn terminal(c: &FinCategory) -> Option<ObjId> {
    c.objects().find(|&t| c.objects().all(|x| c.hom(x, t).len() == 1))
}

/// A pullback square `f ∘ p1 = g ∘ p2` of the cospan `f : X → Z ← Y : g`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pullback {
    pub apex: ObjId,
    pub p1: ArrowId,
    pub p2: ArrowId,
}

/// Pullback of a cospan, chosen like [`compute_limit`] chooses apexes.
pub fn pullback(c: &FinCategory, f: ArrowId, g: ArrowId) -> Option<Pullback> {
    debug_assert_eq!(c.tgt(f), c.tgt(g));
    let (x, y) = (c.src(f), c.src(g));
    let spans = |u: ObjId| -> Vec<(ArrowId, ArrowId)> {
        let mut v = Vec::new();
        for &a in c.hom(u, x) {
            for &b in c.hom(u, y) {
                if c.compose(f, a) == c.compose(g, b) {
                    v.push((a, b));
                }
            }
        }
        v
    };
    let all: Vec<Vec<(ArrowId, ArrowId)>> = c.objects().map(spans).collect();
    for apex in c.objects() {
        'cand: for &(p1, p2) in &all[apex] {
            for u in c.objects() {
                for &(a, b) in &all[u] {
                    let n = c.hom(u, apex).iter().filter(|&&m| c.compose(p1, m) == a && c.compose(p2, m) == b).count();
                    if n != 1 {
                        continue 'cand;
                    }
                }
            }
            return Some(Pullback { apex, p1, p2 });
        }
    }
    None
}

/// Whether `f ∘ p1 = g ∘ p2` is a pullback square.
pub fn is_pullback(c: &FinCategory, f: ArrowId, g: ArrowId, pb: &Pullback) -> bool {
    let (x, y) = (c.src(f), c.src(g));
    if c.tgt(pb.p1) != x || c.tgt(pb.p2) != y || c.src(pb.p1) != pb.apex || c.src(pb.p2) != pb.apex {
        return false;
    }
    if c.compose(f, pb.p1) != c.compose(g, pb.p2) {
        return false;
    }
    c.objects().all(|u| {
        c.hom(u, x).iter().all(|&a| {
            c.hom(u, y).iter().all(|&b| {
                c.compose(f, a) != c.compose(g, b)
                    || c.hom(u, pb.apex)
                        .iter()
                        .filter(|&&m| c.compose(pb.p1, m) == a && c.compose(pb.p2, m) == b)
                        .count()
                        == 1
            })
        })
    })
}

/// A terminal object exists and every cospan has a pullback.
pub fn has_finite_limits(c: &FinCategory) -> bool {
    terminal(c).is_some() && c.arrows().all(|f| c.incoming(c.tgt(f)).iter().all(|&g| pullback(c, f, g).is_some()))
}

/// `F` sends terminal objects to terminal objects and pullback squares to
/// pullback squares. Returns the first failure as a witness.
pub fn limit_preservation_violation(func: &FinFunctor) -> Option<Witness> {
    terminal_preservation_violation(func).or_else(|| pullback_preservation_violation(func))
}

pub fn terminal_preservation_violation(func: &FinFunctor) -> Option<Witness> {
    let (s, t) = (&*func.source, &*func.target);
    let top = terminal(s)?;
    (!t.objects().all(|x| t.hom(x, func.obj(top)).len() == 1))
        .then(|| Witness::new().with("terminal", s.object_name(top)).with("image", t.object_name(func.obj(top))))
}

pub fn pullback_preservation_violation(func: &FinFunctor) -> Option<Witness> {
    let (s, t) = (&*func.source, &*func.target);
    for f in s.arrows() {
        for &g in s.incoming(s.tgt(f)) {
            if let Some(pb) = pullback(s, f, g) {
                let image = Pullback { apex: func.obj(pb.apex), p1: func.arr(pb.p1), p2: func.arr(pb.p2) };
                if !is_pullback(t, func.arr(f), func.arr(g), &image) {
                    return Some(
                        Witness::new()
                            .with("f", s.arrow_name(f))
                            .with("g", s.arrow_name(g))
                            .with("apex", s.object_name(pb.apex)),
                    );
                }
            }
        }
    }
    None
}

/// Diagram shapes used by covering-flatness and limit checks.
pub mod shapes {
    use super::*;
    use crate::cat::CategoryBuilder;

    pub fn empty() -> Arc<FinCategory> {
        Arc::new(CategoryBuilder::new("EMPTY").build().expect("empty shape"))
    }

    /// Two objects `0`, `1` and identities only.
    pub fn discrete2() -> Arc<FinCategory> {
        Arc::new(
            CategoryBuilder::new("DISC2").object("0").object("1").auto_identities().build().expect("discrete shape"),
        )
    }

    /// `0 → 2 ← 1` with arrows `l`, `r`.
    pub fn cospan() -> Arc<FinCategory> {
        Arc::new(
            CategoryBuilder::new("COSPAN")
                .object("0")
                .object("1")
                .object("2")
                .arrow("l", "0", "2")
                .arrow("r", "1", "2")
                .auto_identities()
                .build()
                .expect("cospan shape"),
        )
    }

    /// `0 ⇉ 1` with arrows `s`, `t`.
    pub fn parallel() -> Arc<FinCategory> {
        Arc::new(
            CategoryBuilder::new("PAR")
                .object("0")
                .object("1")
                .arrow("s", "0", "1")
                .arrow("t", "0", "1")
                .auto_identities()
                .build()
                .expect("parallel shape"),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn cospan_in(c: &Arc<FinCategory>, x: &str, y: &str, z: &str, f: &str, g: &str) -> FinFunctor {
        let shape = shapes::cospan();
        FinFunctor::from_names("D", shape, c.clone(), &[("0", x), ("1", y), ("2", z)], &[("l", f), ("r", g)]).unwrap()
    }

    #[test]
    fn empty_diagram_in_one() {
        let one = Arc::new(fixtures::one());
        let d = FinFunctor::new("D", shapes::empty(), one, vec![], vec![]).unwrap();
        let l = compute_limit(&d).unwrap();
        assert_eq!(l.apex, 0);
        assert!(l.legs.is_empty());
    }

    #[test]
    fn intersection_is_pullback_in_p2() {
        let p2 = Arc::new(fixtures::p2());
        let d = cospan_in(&p2, "0", "1", "01", "0<=01", "1<=01");
        let l = compute_limit(&d).unwrap();
        assert_eq!(p2.object_name(l.apex), "e");
        assert!(is_limit(&d, &l));
        let pb = pullback(&p2, p2.arrow("0<=01").unwrap(), p2.arrow("1<=01").unwrap()).unwrap();
        assert_eq!(pb.apex, l.apex);
    }

    #[test]
    fn discrete_cospan_has_no_limit() {
        let disc =
            Arc::new(crate::cat::CategoryBuilder::new("D2").object("x").object("y").auto_identities().build().unwrap());
        let shape = shapes::discrete2();
        let d = FinFunctor::new("D", shape, disc, vec![0, 1], vec![0, 1]).unwrap();
        assert!(compute_limit(&d).is_none());
    }

    #[test]
    fn terminal_objects() {
        assert_eq!(terminal(&fixtures::one()), Some(0));
        let p2 = fixtures::p2();
        assert_eq!(terminal(&p2), p2.obj("01"));
        let a = fixtures::arrow();
        assert_eq!(terminal(&a), a.obj("b"));
    }
}
