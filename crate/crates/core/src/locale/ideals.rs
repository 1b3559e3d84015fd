use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::bits::{brace_list, down_closed_sets, Bits};
use crate::cat::{FinCategory, ObjId};
use crate::error::{Error, Result};
use crate::frame::{validate_frame, FiniteFrame};
use crate::report::{Check, Guards, VerificationReport, Witness};
use crate::topology::{GrothendieckTopology, Sieve};

/// The frame of `k`-ideals of a preorder: down-closed subsets containing
/// every element they cover.
#[derive(Debug, Clone)]
pub struct FrameOfIdeals {
    pub frame: Arc<FiniteFrame>,
    /// The ideal of each frame element, as a set of preorder elements.
    pub ideals: Vec<Bits>,
    /// `c ↦` the closure of `↓c`, as a frame element.
    pub canonical: Vec<usize>,
    /// True when the preorder exceeded the ideal guard and the frame was
    /// built from the closures of principal ideals.
    pub generator_mode: bool,
}

impl FrameOfIdeals {
    /// Whether the canonical map is an order isomorphism.
    pub fn canonical_is_isomorphism(&self, p: &FinCategory) -> bool {
        let mut seen = BTreeSet::new();
        self.canonical.len() == self.frame.len()
            && self.canonical.iter().all(|&e| seen.insert(e))
            && p.objects()
                .all(|x| p.objects().all(|y| p.leq(x, y) == self.frame.leq(self.canonical[x], self.canonical[y])))
    }
}

fn down(p: &FinCategory, x: ObjId) -> Bits {
    Bits::from_indices(p.num_objects(), p.objects().filter(|&y| p.leq(y, x)))
}

/// Smallest ideal containing `set`.
fn close_ideal(p: &FinCategory, k: &GrothendieckTopology, set: &Bits) -> Bits {
    let mut cur = set.clone();
    loop {
        let mut next = cur.clone();
        for x in cur.iter() {
            next.union_with(&down(p, x));
        }
        for x in p.objects() {
            if next.contains(x) {
                continue;
            }
            let s = Sieve::generated(p, x, p.incoming(x).iter().copied().filter(|&g| cur.contains(p.src(g))));
            if k.covers(&s) {
                next.insert(x);
            }
        }
        if next == cur {
            return cur;
        }
        cur = next;
    }
}

fn ideal_name(p: &FinCategory, s: &Bits) -> String {
    let mut names: Vec<&str> = s.iter().map(|x| p.object_name(x)).collect();
    names.sort_unstable();
    brace_list(names)
}

/// `Id_k(p)`, ordered by inclusion, with the canonical map.
///
/// Within the ideal guard every down-set is tested; beyond it the frame is
/// saturated from the closures of the empty set and the principal down-sets
/// under closure of unions, which reaches every ideal since each ideal is
/// the closure of the union of the principal down-sets it contains.
pub fn ideal_completion(k: &GrothendieckTopology, guards: &Guards) -> Result<FrameOfIdeals> {
    let p = &**k.base();
    if !p.is_preorder() {
        return Err(Error::Precondition(format!("`{}` is not a preorder", p.name())));
    }
    let n = p.num_objects();
    let generator_mode = n > guards.ideals;
    let ideals: Vec<Bits> = if !generator_mode {
        let downs: Vec<Bits> = p.objects().map(|x| down(p, x)).collect();
        down_closed_sets(&downs).into_iter().filter(|s| &close_ideal(p, k, s) == s).collect()
    } else {
        let mut set = BTreeSet::new();
        set.insert(close_ideal(p, k, &Bits::empty(n)));
        for x in p.objects() {
            set.insert(close_ideal(p, k, &down(p, x)));
        }
        loop {
            let cur: Vec<Bits> = set.iter().cloned().collect();
            let mut grew = false;
            for a in &cur {
                for b in &cur {
                    grew |= set.insert(close_ideal(p, k, &a.union(b)));
                }
            }
            if !grew {
                break;
            }
        }
        set.into_iter().collect()
    };
    let names: Vec<String> = ideals.iter().map(|s| ideal_name(p, s)).collect();
    let frame = Arc::new(FiniteFrame::from_sets(&format!("Id({})", p.name()), &ideals, names.clone())?);
    let ordered: Vec<Bits> = frame
        .elements()
        .iter()
        .map(|e| ideals[names.iter().position(|n| n == e).expect("frame element")].clone())
        .collect();
    let canonical = p
        .objects()
        .map(|x| {
            let c = close_ideal(p, k, &down(p, x));
            ordered.iter().position(|s| *s == c).expect("closed principal ideal")
        })
        .collect();
    Ok(FrameOfIdeals { frame, ideals: ordered, canonical, generator_mode })
}

/// Frame laws, meets as intersections, and covers sent to joins by the
/// canonical map.
pub fn ideal_completion_report(
    fi: &FrameOfIdeals,
    k: &GrothendieckTopology,
    guards: &Guards,
) -> Result<VerificationReport> {
    let p = &**k.base();
    let f = &*fi.frame;
    let mut r = VerificationReport::new();
    let v = validate_frame(f);
    r.push(Check::from_witness(
        "frame",
        "the ideals form a frame",
        v.failing().first().map(|n| Witness::new().with("law", *n)),
    ));
    let mut bad = None;
    'o: for a in 0..f.len() {
        for b in 0..f.len() {
            if fi.ideals[f.meet(a, b)] != fi.ideals[a].intersection(&fi.ideals[b]) {
                bad = Some(Witness::new().with("element", f.element(a)).with("element", f.element(b)));
                break 'o;
            }
        }
    }
    r.push(Check::from_witness("meets-are-intersections", "the meet of two ideals is their intersection", bad));
    let mut bad = None;
    'o: for x in p.objects() {
        for s in k.covering_sieves(x, guards)? {
            let join = f.join_all(s.arrows(p).map(|g| fi.canonical[p.src(g)]));
            if join != fi.canonical[x] {
                bad = Some(Witness::new().with("object", p.object_name(x)).with("cover", s.display(p)));
                break 'o;
            }
        }
    }
    r.push(Check::from_witness("covers-to-joins", "the canonical map sends every covering family to a join", bad));
    Ok(r)
}
