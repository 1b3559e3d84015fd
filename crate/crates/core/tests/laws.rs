//! Algebraic laws on random small preorders, their down-set frames and
//! preimage maps between them. Expected values come from bitmask models.

use std::sync::Arc;

use proptest::prelude::*;

use relsite_core::cat::{validate_category, FinCategory};
use relsite_core::existential::Adjoint;
use relsite_core::fibred::IndexedCat;
use relsite_core::fixtures;
use relsite_core::frame::{validate_frame, FiniteFrame};

/// Reflexive-transitive closure by depth-first search from every element.
fn reach(n: usize, rel: &[bool]) -> Vec<bool> {
    let mut out = vec![false; n * n];
    for s in 0..n {
        let mut stack = vec![s];
        while let Some(x) = stack.pop() {
            if !out[s * n + x] {
                out[s * n + x] = true;
                stack.extend((0..n).filter(|&y| rel[x * n + y]));
            }
        }
    }
    out
}

/// Down-closed subsets of a closed relation, as bitmasks in increasing order.
fn down_sets(n: usize, leq: &[bool]) -> Vec<u32> {
    (0u32..1 << n)
        .filter(|&m| (0..n).all(|i| m >> i & 1 == 0 || (0..n).all(|j| !leq[j * n + i] || m >> j & 1 == 1)))
        .collect()
}

fn down_close(n: usize, leq: &[bool], m: u32) -> u32 {
    (0..n).filter(|&j| (0..n).any(|i| m >> i & 1 == 1 && leq[j * n + i])).fold(0, |acc, j| acc | 1 << j)
}

/// The down-set lattice as a thin category; object `i` is `sets[i]`.
fn lattice(name: &str, sets: &[u32]) -> FinCategory {
    let k = sets.len();
    let rel = (0..k * k).map(|p| sets[p / k] & !sets[p % k] == 0).collect();
    FinCategory::from_relation(name, sets.iter().map(|m| format!("d{m}")).collect(), rel).unwrap()
}

fn relation(n: usize, bits: &[bool]) -> Vec<bool> {
    (0..n * n).map(|p| bits[(p / n) * 3 + p % n]).collect()
}

proptest! {
    #[test]
    fn preorder_categories_satisfy_the_category_laws(n in 1usize..5, bits in prop::collection::vec(any::<bool>(), 16)) {
        let rel: Vec<bool> = (0..n * n).map(|p| bits[(p / n) * 4 + p % n]).collect();
        let c = FinCategory::from_relation("R", (0..n).map(|i| i.to_string()).collect(), rel.clone()).unwrap();
        prop_assert!(validate_category(&c).passed());
        prop_assert!(c.is_preorder());
        let expected = reach(n, &rel);
        for x in c.objects() {
            for y in c.objects() {
                prop_assert_eq!(c.leq(x, y), expected[x * n + y]);
                prop_assert_eq!(c.hom(x, y).len(), expected[x * n + y] as usize);
            }
        }
        for f in c.arrows() {
            prop_assert_eq!(c.compose(f, c.id(c.src(f))), f);
            prop_assert_eq!(c.compose(c.id(c.tgt(f)), f), f);
            for g in c.arrows().filter(|&g| c.src(g) == c.tgt(f)) {
                let gf = c.compose(g, f);
                prop_assert_eq!((c.src(gf), c.tgt(gf)), (c.src(f), c.tgt(g)));
                for h in c.arrows().filter(|&h| c.src(h) == c.tgt(g)) {
                    prop_assert_eq!(c.compose(h, gf), c.compose(c.compose(h, g), f));
                }
            }
        }
    }

    #[test]
    fn down_set_lattices_are_frames(n in 1usize..4, bits in prop::collection::vec(any::<bool>(), 9)) {
        let leq = reach(n, &relation(n, &bits));
        let sets = down_sets(n, &leq);
        let f = FiniteFrame::from_category(&lattice("D", &sets)).unwrap();
        prop_assert!(validate_frame(&f).passed());
        let at = |m: u32| sets.iter().position(|&s| s == m).unwrap();
        prop_assert_eq!(f.bottom(), at(0));
        prop_assert_eq!(f.top(), at((1 << n) - 1));
        for a in 0..sets.len() {
            for b in 0..sets.len() {
                prop_assert_eq!(f.meet(a, b), at(sets[a] & sets[b]));
                prop_assert_eq!(f.join(a, b), at(sets[a] | sets[b]));
            }
        }
    }

    /// Preimage along a monotone `φ : Q → P` has the down-closed image as its
    /// left adjoint.
    #[test]
    fn preimage_has_the_down_closed_image_as_left_adjoint(
        np in 1usize..4,
        nq in 1usize..4,
        p_bits in prop::collection::vec(any::<bool>(), 9),
        q_bits in prop::collection::vec(any::<bool>(), 9),
        phi in prop::collection::vec(0usize..3, 3),
    ) {
        let leq_p = reach(np, &relation(np, &p_bits));
        let phi: Vec<usize> = phi[..nq].iter().map(|&v| v % np).collect();
        // pulling P's order back along φ keeps φ monotone
        let q_rel: Vec<bool> = (0..nq * nq)
            .map(|p| relation(nq, &q_bits)[p] && leq_p[phi[p / nq] * np + phi[p % nq]])
            .collect();
        let leq_q = reach(nq, &q_rel);
        let (dp, dq) = (down_sets(np, &leq_p), down_sets(nq, &leq_q));
        let preimage = |s: u32| (0..nq).filter(|&q| s >> phi[q] & 1 == 1).fold(0u32, |acc, q| acc | 1 << q);
        let image = |t: u32| down_close(np, &leq_p, (0..nq).filter(|&q| t >> q & 1 == 1).fold(0, |acc, q| acc | 1 << phi[q]));

        let base = Arc::new(fixtures::arrow());
        let f = base.arrow("f").unwrap();
        let (fa, fb) = (Arc::new(lattice("DQ", &dq)), Arc::new(lattice("DP", &dp)));
        let maps: Vec<Vec<usize>> = base
            .arrows()
            .map(|a| {
                if a == f {
                    dp.iter().map(|&s| dq.iter().position(|&t| t == preimage(s)).unwrap()).collect()
                } else if base.src(a) == base.obj("a").unwrap() {
                    (0..dq.len()).collect()
                } else {
                    (0..dp.len()).collect()
                }
            })
            .collect();
        let fibres = base.objects().map(|x| if x == base.obj("a").unwrap() { fa.clone() } else { fb.clone() }).collect();
        let d = IndexedCat::from_preorder_maps("PRE", base.clone(), fibres, maps).unwrap();
        let adj = Adjoint::compute(&d, f).unwrap();
        for (i, &t) in dq.iter().enumerate() {
            prop_assert_eq!(dp[adj.exists.obj(i)], image(t));
            prop_assert!(adj.unit[i].is_some());
            for &s in &dp {
                prop_assert_eq!(image(t) & !s == 0, t & !preimage(s) == 0);
            }
        }
    }
}

#[test]
fn a_map_that_loses_the_top_has_no_left_adjoint() {
    let base = Arc::new(fixtures::arrow());
    let f = base.arrow("f").unwrap();
    let chain = Arc::new(FinCategory::preorder("C", &["0", "1"], &[("0", "1")]).unwrap());
    let maps = base.arrows().map(|a| if a == f { vec![0, 0] } else { vec![0, 1] }).collect();
    let d = IndexedCat::from_preorder_maps("BOT", base, vec![chain.clone(), chain], maps).unwrap();
    assert!(Adjoint::compute(&d, f).is_err());
}
