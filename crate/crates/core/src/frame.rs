//! Finite frames (finite distributive lattices), homomorphisms between
//! them, isomorphism search and the canonical topology.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::bits::Bits;
use crate::cat::FinCategory;
use crate::error::{input, Result};
use crate::report::{Check, Guards, VerificationReport, Witness};
use crate::topology::GrothendieckTopology;

/// A finite lattice with its order, meet and join tables. Elements are
/// indexed in lexicographic order of their names, matching the object order
/// of [`FiniteFrame::as_category`]. Distributivity is not assumed; it is
/// checked by [`validate_frame`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteFrame {
    name: String,
    elements: Vec<String>,
    leq: Vec<bool>,
    meet: Vec<usize>,
    join: Vec<usize>,
    top: usize,
    bottom: usize,
}

impl FiniteFrame {
    /// Lattice on `elements` ordered by the reflexive-transitive closure of
    /// `leq` (an `n × n` matrix). Fails when the order is not antisymmetric
    /// or some pair lacks a meet or a join.
    pub fn from_order(name: &str, elements: Vec<String>, leq: Vec<bool>) -> Result<Self> {
        let n = elements.len();
        assert_eq!(leq.len(), n * n);
        if n == 0 {
            return input(format!("{name}: a lattice needs at least one element"));
        }
        let mut perm: Vec<usize> = (0..n).collect();
        perm.sort_by(|&a, &b| elements[a].cmp(&elements[b]));
        let sorted: Vec<String> = perm.iter().map(|&i| elements[i].clone()).collect();
        for w in sorted.windows(2) {
            if w[0] == w[1] {
                return input(format!("{name}: duplicate element `{}`", w[0]));
            }
        }
        let mut rel = vec![false; n * n];
        for i in 0..n {
            for j in 0..n {
                rel[i * n + j] = i == j || leq[perm[i] * n + perm[j]];
            }
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
        for i in 0..n {
            for j in 0..i {
                if rel[i * n + j] && rel[j * n + i] {
                    return input(format!("{name}: `{}` and `{}` are distinct but equivalent", sorted[i], sorted[j]));
                }
            }
        }
        let le = |a: usize, b: usize| rel[a * n + b];
        let mut meet = vec![0; n * n];
        let mut join = vec![0; n * n];
        for a in 0..n {
            for b in 0..n {
                let lower: Vec<usize> = (0..n).filter(|&x| le(x, a) && le(x, b)).collect();
                let Some(&m) = lower.iter().find(|&&x| lower.iter().all(|&y| le(y, x))) else {
                    return input(format!("{name}: `{}` and `{}` have no meet", sorted[a], sorted[b]));
                };
                let upper: Vec<usize> = (0..n).filter(|&x| le(a, x) && le(b, x)).collect();
                let Some(&j) = upper.iter().find(|&&x| upper.iter().all(|&y| le(x, y))) else {
                    return input(format!("{name}: `{}` and `{}` have no join", sorted[a], sorted[b]));
                };
                meet[a * n + b] = m;
                join[a * n + b] = j;
            }
        }
        let top = (0..n).find(|&t| (0..n).all(|x| le(x, t))).expect("finite lattice has a top");
        let bottom = (0..n).find(|&b| (0..n).all(|x| le(b, x))).expect("finite lattice has a bottom");
        Ok(FiniteFrame { name: name.to_string(), elements: sorted, leq: rel, meet, join, top, bottom })
    }

    /// The lattice of a preorder category whose order is a lattice.
    pub fn from_category(c: &FinCategory) -> Result<Self> {
        if !c.is_preorder() {
            return input(format!("{}: not a preorder", c.name()));
        }
        let n = c.num_objects();
        let names = c.objects().map(|x| c.object_name(x).to_string()).collect();
        let mut leq = vec![false; n * n];
        for x in 0..n {
            for y in 0..n {
                leq[x * n + y] = c.leq(x, y);
            }
        }
        FiniteFrame::from_order(c.name(), names, leq)
    }

    /// Sets ordered by inclusion. The family must be a lattice under
    /// inclusion (meets and joins need not be intersections and unions).
    pub fn from_sets(name: &str, sets: &[Bits], names: Vec<String>) -> Result<Self> {
        let n = sets.len();
        let mut leq = vec![false; n * n];
        for i in 0..n {
            for j in 0..n {
                leq[i * n + j] = sets[i].is_subset(&sets[j]);
            }
        }
        FiniteFrame::from_order(name, names, leq)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn element(&self, i: usize) -> &str {
        &self.elements[i]
    }

    pub fn elements(&self) -> &[String] {
        &self.elements
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.elements.binary_search_by(|e| e.as_str().cmp(name)).ok()
    }

    #[inline]
    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.leq[a * self.len() + b]
    }

    #[inline]
    pub fn meet(&self, a: usize, b: usize) -> usize {
        self.meet[a * self.len() + b]
    }

    #[inline]
    pub fn join(&self, a: usize, b: usize) -> usize {
        self.join[a * self.len() + b]
    }

    pub fn top(&self) -> usize {
        self.top
    }

    pub fn bottom(&self) -> usize {
        self.bottom
    }

    pub fn join_all(&self, xs: impl IntoIterator<Item = usize>) -> usize {
        xs.into_iter().fold(self.bottom, |a, b| self.join(a, b))
    }

    pub fn meet_all(&self, xs: impl IntoIterator<Item = usize>) -> usize {
        xs.into_iter().fold(self.top, |a, b| self.meet(a, b))
    }

    /// The order as a preorder category with arrows `x<=y`.
    pub fn as_category(&self) -> FinCategory {
        FinCategory::from_relation(&self.name, self.elements.clone(), self.leq.clone())
            .expect("a lattice order is a valid preorder")
    }

    /// The canonical topology on `c`, which must be [`Self::as_category`]:
    /// a sieve on `x` covers iff the join of its domains is `x`.
    pub fn canonical_topology(self: &Arc<Self>, c: Arc<FinCategory>, guards: &Guards) -> Result<GrothendieckTopology> {
        if c.num_objects() != self.len() || c.objects().any(|x| c.object_name(x) != self.element(x)) {
            return input(format!("{}: category does not match the frame", self.name));
        }
        let f = self.clone();
        GrothendieckTopology::from_predicate(
            c,
            "canonical",
            Arc::new(move |c, s| f.join_all(s.arrows(c).map(|a| c.src(a))) == s.cod),
            guards,
        )
    }

    /// The down-set `{y | y ≤ x}` as a bitset over elements.
    pub fn down(&self, x: usize) -> Bits {
        Bits::from_indices(self.len(), (0..self.len()).filter(|&y| self.leq(y, x)))
    }
}

/// Lattice laws, bounds and distributivity of binary meets over binary
/// joins, over all pairs and triples.
pub fn validate_frame(f: &FiniteFrame) -> VerificationReport {
    let n = f.len();
    let mut r = VerificationReport::new();
    let el = |i: usize| f.element(i).to_string();

    let mut order = None;
    'o: for a in 0..n {
        if !f.leq(a, a) {
            order = Some(Witness::new().with("element", el(a)));
            break;
        }
        for b in 0..n {
            if a != b && f.leq(a, b) && f.leq(b, a) {
                order = Some(Witness::new().with("element", el(a)).with("element", el(b)));
                break 'o;
            }
            for c in 0..n {
                if f.leq(a, b) && f.leq(b, c) && !f.leq(a, c) {
                    order = Some(Witness::new().with("element", el(a)).with("element", el(b)).with("element", el(c)));
                    break 'o;
                }
            }
        }
    }
    r.push(Check::from_witness("partial-order", "the order is reflexive, antisymmetric and transitive", order));

    let mut tables = None;
    'o: for a in 0..n {
        for b in 0..n {
            let (m, j) = (f.meet(a, b), f.join(a, b));
            let glb = f.leq(m, a) && f.leq(m, b) && (0..n).all(|x| !(f.leq(x, a) && f.leq(x, b)) || f.leq(x, m));
            let lub = f.leq(a, j) && f.leq(b, j) && (0..n).all(|x| !(f.leq(a, x) && f.leq(b, x)) || f.leq(j, x));
            if !glb || !lub {
                tables = Some(Witness::new().with("element", el(a)).with("element", el(b)));
                break 'o;
            }
        }
    }
    r.push(Check::from_witness("lattice", "meet and join tables give greatest lower and least upper bounds", tables));

    let bounds = (0..n).find(|&x| !f.leq(x, f.top()) || !f.leq(f.bottom(), x));
    r.push(Check::from_witness(
        "bounds",
        "top and bottom elements",
        bounds.map(|x| Witness::new().with("element", el(x))),
    ));

    let mut dist = None;
    'o: for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                if f.meet(a, f.join(b, c)) != f.join(f.meet(a, b), f.meet(a, c)) {
                    dist = Some(Witness::new().with("a", el(a)).with("b", el(b)).with("c", el(c)));
                    break 'o;
                }
            }
        }
    }
    r.push(Check::from_witness("distributivity", "a ∧ (b ∨ c) = (a ∧ b) ∨ (a ∧ c)", dist));
    r
}

/// First violation of the frame homomorphism laws for `h : a → b`: top,
/// bottom, binary meets and binary joins.
pub fn frame_hom_violation(a: &FiniteFrame, b: &FiniteFrame, h: &[usize]) -> Option<Witness> {
    if h[a.top()] != b.top() {
        return Some(Witness::new().with("law", "top").with("element", a.element(a.top())));
    }
    if h[a.bottom()] != b.bottom() {
        return Some(Witness::new().with("law", "bottom").with("element", a.element(a.bottom())));
    }
    for x in 0..a.len() {
        for y in 0..a.len() {
            if h[a.meet(x, y)] != b.meet(h[x], h[y]) {
                return Some(
                    Witness::new().with("law", "meet").with("element", a.element(x)).with("element", a.element(y)),
                );
            }
            if h[a.join(x, y)] != b.join(h[x], h[y]) {
                return Some(
                    Witness::new().with("law", "join").with("element", a.element(x)).with("element", a.element(y)),
                );
            }
        }
    }
    None
}

/// Outcome of a bounded search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Search<T> {
    Done(T),
    /// The search budget ran out before the space was exhausted.
    Exhausted,
}

/// All frame homomorphisms `a → b`, visiting at most `budget` partial maps.
pub fn frame_homs(a: &FiniteFrame, b: &FiniteFrame, budget: u64) -> Search<Vec<Vec<usize>>> {
    let n = a.len();
    let mut out = Vec::new();
    let mut h = vec![usize::MAX; n];
    let mut visited = 0u64;
    // assign elements bottom-up so that meets and joins are checked early
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&x| ((0..n).filter(|&y| a.leq(y, x)).count(), x));
    fn consistent(a: &FiniteFrame, b: &FiniteFrame, h: &[usize], x: usize) -> bool {
        let hx = h[x];
        if (x == a.top() && hx != b.top()) || (x == a.bottom() && hx != b.bottom()) {
            return false;
        }
        for y in 0..a.len() {
            let hy = h[y];
            if hy == usize::MAX {
                continue;
            }
            let m = h[a.meet(x, y)];
            if m != usize::MAX && m != b.meet(hx, hy) {
                return false;
            }
            let j = h[a.join(x, y)];
            if j != usize::MAX && j != b.join(hx, hy) {
                return false;
            }
            if a.leq(y, x) && !b.leq(hy, hx) || a.leq(x, y) && !b.leq(hx, hy) {
                return false;
            }
        }
        // x may itself be the meet or join of assigned pairs
        for y in 0..a.len() {
            if h[y] == usize::MAX {
                continue;
            }
            for z in 0..a.len() {
                if h[z] == usize::MAX {
                    continue;
                }
                if a.meet(y, z) == x && b.meet(h[y], h[z]) != hx {
                    return false;
                }
                if a.join(y, z) == x && b.join(h[y], h[z]) != hx {
                    return false;
                }
            }
        }
        true
    }
    #[allow(clippy::too_many_arguments)]
    fn go(
        a: &FiniteFrame,
        b: &FiniteFrame,
        order: &[usize],
        k: usize,
        h: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
        visited: &mut u64,
        budget: u64,
    ) -> bool {
        if k == order.len() {
            out.push(h.clone());
            return true;
        }
        let x = order[k];
        for v in 0..b.len() {
            *visited += 1;
            if *visited > budget {
                return false;
            }
            h[x] = v;
            if consistent(a, b, h, x) && !go(a, b, order, k + 1, h, out, visited, budget) {
                return false;
            }
        }
        h[x] = usize::MAX;
        true
    }
    if go(a, b, &order, 0, &mut h, &mut out, &mut visited, budget) {
        out.sort();
        Search::Done(out)
    } else {
        Search::Exhausted
    }
}

/// An order isomorphism `a → b` (equivalently a lattice isomorphism), found
/// by backtracking in element order. The first one found in lexicographic
/// order of images is returned.
pub fn find_isomorphism(a: &FiniteFrame, b: &FiniteFrame) -> Option<Vec<usize>> {
    let n = a.len();
    if n != b.len() {
        return None;
    }
    let sig = |f: &FiniteFrame, x: usize| -> (usize, usize) {
        ((0..f.len()).filter(|&y| f.leq(y, x)).count(), (0..f.len()).filter(|&y| f.leq(x, y)).count())
    };
    let sa: Vec<(usize, usize)> = (0..n).map(|x| sig(a, x)).collect();
    let sb: Vec<(usize, usize)> = (0..n).map(|x| sig(b, x)).collect();
    let mut h = vec![usize::MAX; n];
    let mut used = vec![false; n];
    fn go(
        a: &FiniteFrame,
        b: &FiniteFrame,
        sa: &[(usize, usize)],
        sb: &[(usize, usize)],
        x: usize,
        h: &mut [usize],
        used: &mut [bool],
    ) -> bool {
        if x == a.len() {
            return true;
        }
        for v in 0..b.len() {
            if used[v] || sa[x] != sb[v] {
                continue;
            }
            let ok = (0..x).all(|y| a.leq(y, x) == b.leq(h[y], v) && a.leq(x, y) == b.leq(v, h[y]));
            if !ok {
                continue;
            }
            h[x] = v;
            used[v] = true;
            if go(a, b, sa, sb, x + 1, h, used) {
                return true;
            }
            used[v] = false;
        }
        h[x] = usize::MAX;
        false
    }
    go(a, b, &sa, &sb, 0, &mut h, &mut used).then_some(h)
}

/// `x↦y,...` rendering of a map between frames.
pub fn show_map(a: &FiniteFrame, b: &FiniteFrame, h: &[usize]) -> String {
    let parts: Vec<String> = (0..a.len()).map(|x| format!("{}↦{}", a.element(x), b.element(h[x]))).collect();
    parts.join(",")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::report::Status;
    use crate::topology::validate_topology;

    fn frame(c: FinCategory) -> FiniteFrame {
        FiniteFrame::from_category(&c).unwrap()
    }

    #[test]
    fn reference_frames_validate() {
        assert!(validate_frame(&frame(fixtures::sier())).passed());
        assert!(validate_frame(&frame(fixtures::p2())).passed());
        assert!(validate_frame(&frame(fixtures::one())).passed());
    }

    #[test]
    fn m3_is_not_distributive() {
        let m3 = frame(fixtures::m3());
        let r = validate_frame(&m3);
        assert!(r.passes("lattice"));
        let d = r.get("distributivity").unwrap();
        assert_eq!(d.status, Status::Fail);
        // replay the witness
        let w = d.witness.as_ref().unwrap();
        let [a, b, c] = ["a", "b", "c"].map(|k| m3.index(w.get(k).unwrap()).unwrap());
        assert_ne!(m3.meet(a, m3.join(b, c)), m3.join(m3.meet(a, b), m3.meet(a, c)));
    }

    #[test]
    fn non_lattices_are_rejected() {
        let names = alloc::vec!["a".to_string(), "b".to_string()];
        assert!(FiniteFrame::from_order("D", names, alloc::vec![false; 4]).is_err());
    }

    #[test]
    fn homs_and_isos() {
        let s = frame(fixtures::sier());
        let p = frame(fixtures::p2());
        assert!(find_isomorphism(&s, &p).is_none());
        let id = find_isomorphism(&p, &p).unwrap();
        assert_eq!(id, (0..4).collect::<Vec<_>>());
        // frame homs P2 → 2 correspond to the points {0}, {1} (completely prime filters)
        let two =
            FiniteFrame::from_order("2", alloc::vec!["0".into(), "1".into()], alloc::vec![true, true, false, true])
                .unwrap();
        let Search::Done(hs) = frame_homs(&p, &two, 1_000_000) else { panic!() };
        assert_eq!(hs.len(), 2);
        for h in &hs {
            assert!(frame_hom_violation(&p, &two, h).is_none());
        }
        assert_eq!(frame_homs(&p, &two, 3), Search::Exhausted);
    }

    #[test]
    fn canonical_topology_of_p2_is_a_topology() {
        let p = Arc::new(frame(fixtures::p2()));
        let c = Arc::new(p.as_category());
        let j = p.canonical_topology(c, &Guards::default()).unwrap();
        assert!(validate_topology(&j, &Guards::default()).passed());
    }
}
