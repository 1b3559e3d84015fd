//! The shipped reference instances: ONE, ARROW, SIER, P2, M3, POW2 and FPRE.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::cat::{CategoryBuilder, FinCategory};
use crate::fibred::IndexedCat;

/// One object `*`, one arrow `id_*`.
pub fn one() -> FinCategory {
    CategoryBuilder::new("ONE").object("*").identity("*", "id_*").build().expect("ONE")
}

/// `f : a → b` with identities `id_a`, `id_b`.
pub fn arrow() -> FinCategory {
    CategoryBuilder::new("ARROW")
        .object("a")
        .object("b")
        .identity("a", "id_a")
        .identity("b", "id_b")
        .arrow("f", "a", "b")
        .build()
        .expect("ARROW")
}

/// The three-element chain `bot < u < top`, the frame of opens of the
/// Sierpiński space.
pub fn sier() -> FinCategory {
    FinCategory::preorder("SIER", &["bot", "u", "top"], &[("bot", "u"), ("u", "top")]).expect("SIER")
}

/// Subsets of `{0,1}` under inclusion: `e` (empty), `0`, `1`, `01`.
pub fn p2() -> FinCategory {
    FinCategory::preorder("P2", &["e", "0", "1", "01"], &[("e", "0"), ("e", "1"), ("0", "01"), ("1", "01")])
        .expect("P2")
}

/// The diamond `M3`: bottom `o`, three atoms `x`, `y`, `z`, top `i`.
pub fn m3() -> FinCategory {
    FinCategory::preorder(
        "M3",
        &["o", "x", "y", "z", "i"],
        &[("o", "x"), ("o", "y"), ("o", "z"), ("x", "i"), ("y", "i"), ("z", "i")],
    )
    .expect("M3")
}

/// Names of the subsets of `{0,1}` as used by [`p2`], indexed by bitmask.
pub const P2_NAMES: [&str; 4] = ["e", "0", "1", "01"];

fn subset_name(mask: u64, universe: &[usize]) -> alloc::string::String {
    let v: Vec<alloc::string::String> =
        universe.iter().filter(|&&i| mask >> i & 1 == 1).map(|i| alloc::format!("{i}")).collect();
    if v.is_empty() {
        "e".into()
    } else {
        v.concat()
    }
}

/// Subsets of the bitmask `mask` of `{0,1}`, ordered by inclusion.
fn powerset_fibre(mask: u64) -> FinCategory {
    let subs: Vec<u64> = (0..4u64).filter(|s| s & !mask == 0).collect();
    let names: Vec<String> = subs.iter().map(|&s| subset_name(s, &[0, 1])).collect();
    let leq: Vec<bool> = subs.iter().flat_map(|&a| subs.iter().map(move |&b| a & !b == 0)).collect();
    FinCategory::from_relation(&format!("P({})", subset_name(mask, &[0, 1])), names, leq).expect("powerset")
}

/// The powerset indexed category over P2: the fibre over `X` is the
/// subsets of `X` ordered by inclusion, and `X ⊆ Y` restricts `y ↦ y ∩ X`.
pub fn pow2() -> IndexedCat {
    let base = Arc::new(p2());
    let masks: Vec<u64> =
        base.objects().map(|c| P2_NAMES.iter().position(|&n| n == base.object_name(c)).unwrap() as u64).collect();
    let fibres: Vec<Arc<FinCategory>> = masks.iter().map(|&m| Arc::new(powerset_fibre(m))).collect();
    let maps = base
        .arrows()
        .map(|f| {
            let (c, d) = (base.src(f), base.tgt(f));
            fibres[d]
                .objects()
                .map(|y| {
                    let ym = P2_NAMES.iter().position(|&n| n == fibres[d].object_name(y)).unwrap() as u64;
                    fibres[c].obj(P2_NAMES[(ym & masks[c]) as usize]).unwrap()
                })
                .collect()
        })
        .collect();
    IndexedCat::from_preorder_maps("POW2", base, fibres, maps).expect("POW2")
}

/// A single fibre SIER over ONE.
pub fn fpre() -> IndexedCat {
    let base = Arc::new(one());
    let fibre = Arc::new(sier());
    let id: Vec<usize> = fibre.objects().collect();
    IndexedCat::from_preorder_maps("FPRE", base, alloc::vec![fibre], alloc::vec![id]).expect("FPRE")
}

/// Over ARROW, the chain `lo < mid < hi` above `b` restricts to the chain
/// `0 < 1` above `a` by `lo, mid ↦ 0`, `hi ↦ 1`. The restriction has the
/// left adjoint `0 ↦ lo`, `1 ↦ hi` and satisfies Beck–Chevalley, but
/// `∃(L(mid) ∧ 1) = lo` while `∃(1) ∧ mid = mid`.
pub fn frobenius_broken() -> IndexedCat {
    let base = Arc::new(arrow());
    let fa = Arc::new(FinCategory::preorder("CHAIN2", &["0", "1"], &[("0", "1")]).expect("chain"));
    let fb = Arc::new(
        FinCategory::preorder("CHAIN3", &["lo", "mid", "hi"], &[("lo", "mid"), ("mid", "hi")]).expect("chain"),
    );
    let mut maps = Vec::new();
    for f in base.arrows() {
        let m: Vec<usize> = match base.arrow_name(f) {
            "id_a" => fa.objects().collect(),
            "id_b" => fb.objects().collect(),
            _ => fb.objects().map(|y| fa.obj(if fb.object_name(y) == "hi" { "1" } else { "0" }).unwrap()).collect(),
        };
        maps.push(m);
    }
    let fibres = base.objects().map(|c| if base.object_name(c) == "a" { fa.clone() } else { fb.clone() }).collect();
    IndexedCat::from_preorder_maps("FROB-", base, fibres, maps).expect("fixture")
}
