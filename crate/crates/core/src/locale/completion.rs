use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use super::{ideal_completion, internal_locale_report, InternalLocaleCandidate};
use crate::bits::Bits;
use crate::cat::{ArrowId, FinCategory, ObjId};
use crate::error::{input, Error, Result};
use crate::fibred::{giraud_topology, grothendieck_construction, GrothTotal, IndexedCat};
use crate::frame::{find_isomorphism, frame_homs, show_map, Search};
use crate::presheaf::{
    close_subpresheaf, closed_subobject_frame, hom_presheaf, ClosedSubobjectFrame, FinPresheaf, Subpresheaf,
};
use crate::report::{Check, Guards, Status, VerificationReport, Witness};
use crate::topology::{enumerate_sieves, GrothendieckTopology, Sieve};

/// A fibred preorder with a topology `K` on its total category, over a
/// base site `(C, J)`.
#[derive(Debug, Clone)]
pub struct FibredPreorderSite {
    pub total: GrothTotal,
    pub topology: GrothendieckTopology,
    pub base_topology: GrothendieckTopology,
}

impl FibredPreorderSite {
    pub fn new(total: GrothTotal, topology: GrothendieckTopology, base_topology: GrothendieckTopology) -> Result<Self> {
        if !total.indexed.has_preorder_fibres() {
            return input(format!("{}: fibres must be preorders", total.indexed.name));
        }
        if topology.base() != &total.total || base_topology.base() != total.base() {
            return input(format!("{}: topologies live on the wrong categories", total.indexed.name));
        }
        Ok(FibredPreorderSite { total, topology, base_topology })
    }

    pub fn base(&self) -> &Arc<FinCategory> {
        self.total.base()
    }

    /// The preorder of `k` as the single fibre over `ONE`, with `k`
    /// transported to the total category along vertical arrows and the
    /// trivial topology on the base.
    pub fn over_one(k: &GrothendieckTopology, guards: &Guards) -> Result<Self> {
        let p = k.base().clone();
        let one = Arc::new(crate::fixtures::one());
        let id: Vec<ObjId> = p.objects().collect();
        let d = IndexedCat::from_preorder_maps(p.name(), one.clone(), vec![p.clone()], vec![id])?;
        let total = grothendieck_construction(Arc::new(d))?;
        let mut sieves = Vec::new();
        for x in p.objects() {
            for s in k.covering_sieves(x, guards)? {
                sieves.push(Sieve::generated(
                    &total.total,
                    total.object(0, x),
                    s.arrows(&p).map(|a| total.vertical(0, a)),
                ));
            }
        }
        let kt = GrothendieckTopology::from_sieves(total.total.clone(), k.name(), sieves)?;
        FibredPreorderSite::new(total, kt, GrothendieckTopology::trivial(one))
    }
}

/// The fibred ideal completion `L^K` with its unit `η : P → L^K`.
#[derive(Debug, Clone)]
pub struct FibredCompletion {
    pub locale: InternalLocaleCandidate,
    /// `Hom(p(−), c)` for every base object `c`.
    pub presheaves: Vec<FinPresheaf>,
    /// Closed subobjects of each of those presheaves, in frame order.
    pub fibres: Vec<ClosedSubobjectFrame>,
    /// `η_c : P(c) → L^K(c)`, as frame elements.
    pub unit: Vec<Vec<usize>>,
}

fn lookup(cf: &ClosedSubobjectFrame, k: &GrothendieckTopology, p: &FinPresheaf, s: &Subpresheaf) -> Result<usize> {
    cf.element_of(s).or_else(|| cf.element_of(&close_subpresheaf(k, p, s))).ok_or_else(|| {
        Error::Precondition(format!("closure under `{}` is not idempotent; K is not a topology", k.name()))
    })
}

fn build(
    total: &GrothTotal,
    k: &GrothendieckTopology,
    j: &GrothendieckTopology,
    guards: &Guards,
) -> Result<FibredCompletion> {
    let b = &**total.base();
    let t = &*total.total;
    let d = &*total.indexed;
    let p = &total.projection;
    let presheaves: Vec<FinPresheaf> = b.objects().map(|c| hom_presheaf(p, c)).collect();
    let mut fibres = Vec::with_capacity(b.num_objects());
    for c in b.objects() {
        fibres.push(closed_subobject_frame(k, &presheaves[c], guards)?);
    }
    let pos = |o: ObjId, c: ObjId, u: ArrowId| b.hom(p.obj(o), c).iter().position(|&v| v == u).expect("hom-set");
    let mut maps = Vec::with_capacity(b.num_arrows());
    let mut exists = Vec::with_capacity(b.num_arrows());
    for f in b.arrows() {
        let (c, e) = (b.src(f), b.tgt(f));
        let (hc, he) = (&presheaves[c], &presheaves[e]);
        let map = fibres[e]
            .subobjects
            .iter()
            .map(|s| {
                let mut m = Bits::empty(hc.total_sections());
                for o in t.objects() {
                    for (i, &u) in b.hom(p.obj(o), c).iter().enumerate() {
                        if s.contains(he, o, pos(o, e, b.compose(f, u))) {
                            m.insert(hc.flat(o, i));
                        }
                    }
                }
                lookup(&fibres[c], k, hc, &Subpresheaf { members: m })
            })
            .collect::<Result<Vec<usize>>>()?;
        let ex = fibres[c]
            .subobjects
            .iter()
            .map(|s| {
                let mut m = Bits::empty(he.total_sections());
                for o in t.objects() {
                    for (i, &u) in b.hom(p.obj(o), c).iter().enumerate() {
                        if s.contains(hc, o, i) {
                            m.insert(he.flat(o, pos(o, e, b.compose(f, u))));
                        }
                    }
                }
                lookup(&fibres[e], k, he, &close_subpresheaf(k, he, &Subpresheaf { members: m }))
            })
            .collect::<Result<Vec<usize>>>()?;
        maps.push(map);
        exists.push(ex);
    }
    // η_c(x) at (c', x') is {g : c' → c | x' ≤ P(g)(x)}, then closed
    let unit = b
        .objects()
        .map(|c| {
            let hc = &presheaves[c];
            d.fibres[c]
                .objects()
                .map(|x| {
                    let mut m = Bits::empty(hc.total_sections());
                    for o in t.objects() {
                        let (c2, x2) = total.objects[o];
                        for (i, &g) in b.hom(c2, c).iter().enumerate() {
                            if d.fibres[c2].leq(x2, d.transitions[g].obj(x)) {
                                m.insert(hc.flat(o, i));
                            }
                        }
                    }
                    lookup(&fibres[c], k, hc, &close_subpresheaf(k, hc, &Subpresheaf { members: m }))
                })
                .collect::<Result<Vec<usize>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let frames = fibres.iter().map(|f| Arc::new(f.frame.clone())).collect();
    let locale = InternalLocaleCandidate::new(&format!("L^K({})", d.name), j.clone(), frames, maps, Some(exists))?;
    Ok(FibredCompletion { locale, presheaves, fibres, unit })
}

/// `L^K(c)` is the frame of `K`-closed subobjects of `Hom(p(−), c)`;
/// transitions pull back along postcomposition, `∃` closes direct images,
/// and the unit sends `x` to the closure of `{g : c' → c | x' ≤ P(g)(x)}`.
/// Requires `K` to contain the Giraud topology of `J`.
pub fn fibred_ideal_completion(s: &FibredPreorderSite, guards: &Guards) -> Result<FibredCompletion> {
    let t = &*s.total.total;
    let giraud = giraud_topology(&s.total, &s.base_topology, guards)?;
    for o in t.objects() {
        for sv in giraud.covering_sieves(o, guards)? {
            if !s.topology.covers(&sv) {
                return Err(Error::Precondition(format!(
                    "K does not contain the Giraud topology: {} does not cover `{}`",
                    sv.display(t),
                    t.object_name(o)
                )));
            }
        }
    }
    build(&s.total, &s.topology, &s.base_topology, guards)
}

fn unit_violation(s: &FibredPreorderSite, fc: &FibredCompletion) -> (Option<Witness>, Option<Witness>) {
    let b = &**s.base();
    let d = &*s.total.indexed;
    let mut mono = None;
    'o: for c in b.objects() {
        let (fib, fr) = (&d.fibres[c], &fc.locale.frames[c]);
        for x in fib.objects() {
            for y in fib.objects() {
                if fib.leq(x, y) && !fr.leq(fc.unit[c][x], fc.unit[c][y]) {
                    mono = Some(
                        Witness::new()
                            .with("object", b.object_name(c))
                            .with("element", fib.object_name(x))
                            .with("element", fib.object_name(y)),
                    );
                    break 'o;
                }
            }
        }
    }
    let mut nat = None;
    'o: for f in b.arrows() {
        let (c, e) = (b.src(f), b.tgt(f));
        for y in d.fibres[e].objects() {
            if fc.unit[c][d.transitions[f].obj(y)] != fc.locale.maps[f][fc.unit[e][y]] {
                nat = Some(Witness::new().with("arrow", b.arrow_name(f)).with("element", d.fibres[e].object_name(y)));
                break 'o;
            }
        }
    }
    (mono, nat)
}

impl FibredCompletion {
    /// Whether every `η_c` is an order isomorphism `P(c) ≅ L^K(c)`; the
    /// first object where it is not otherwise.
    pub fn unit_isomorphism(&self, s: &FibredPreorderSite) -> core::result::Result<(), Witness> {
        let b = &**s.base();
        let d = &*s.total.indexed;
        for c in b.objects() {
            let (fib, fr) = (&d.fibres[c], &self.locale.frames[c]);
            let u = &self.unit[c];
            let mut hit = vec![false; fr.len()];
            for &e in u {
                hit[e] = true;
            }
            let bijective = u.len() == fr.len() && hit.iter().all(|&h| h);
            let reflects = fib.objects().all(|x| fib.objects().all(|y| fib.leq(x, y) == fr.leq(u[x], u[y])));
            if !bijective || !reflects {
                return Err(Witness::new().with("object", b.object_name(c)));
            }
        }
        Ok(())
    }

    /// `η` rendered fibre by fibre, `x↦U;...`.
    pub fn show_unit(&self, s: &FibredPreorderSite) -> String {
        let b = &**s.base();
        let d = &*s.total.indexed;
        let parts: Vec<String> = b
            .objects()
            .map(|c| {
                let inner: Vec<String> = d.fibres[c]
                    .objects()
                    .map(|x| {
                        format!("{}↦{}", d.fibres[c].object_name(x), self.locale.frames[c].element(self.unit[c][x]))
                    })
                    .collect();
                format!("{}: {}", b.object_name(c), inner.join(","))
            })
            .collect();
        parts.join("; ")
    }
}

/// Transfers a topology on the total category over a one-object base to the
/// single fibre.
fn fibre_topology(s: &FibredPreorderSite, guards: &Guards) -> Result<GrothendieckTopology> {
    let g = &s.total;
    let fib = g.fibre(0).clone();
    let mut sieves = Vec::new();
    for x in fib.objects() {
        for sv in enumerate_sieves(&fib, x, guards)? {
            let o = g.object(0, x);
            let image = Sieve::generated(&g.total, o, sv.arrows(&fib).map(|a| g.vertical(0, a)));
            if s.topology.covers(&image) {
                sieves.push(sv);
            }
        }
    }
    GrothendieckTopology::from_sieves(fib, s.topology.name(), sieves)
}

/// The completion as an internal locale over `(C, J)`, the unit's
/// monotonicity and naturality, independence of the base topology, and over
/// a one-object base the isomorphism with the ideal completion of the fibre.
pub fn fibred_completion_report(
    s: &FibredPreorderSite,
    fc: &FibredCompletion,
    guards: &Guards,
) -> Result<VerificationReport> {
    let b = &**s.base();
    let mut r = internal_locale_report(&fc.locale, guards)?.scoped("locale");
    let (mono, nat) = unit_violation(s, fc);
    r.push(Check::from_witness("unit-monotone", "η_c is order preserving", mono));
    r.push(Check::from_witness("unit-natural", "η_c ∘ P(f) = L(f) ∘ η_d", nat));
    let trivial = GrothendieckTopology::trivial(s.base().clone());
    let again = build(&s.total, &s.topology, &trivial, guards)?;
    let same = again.locale.frames == fc.locale.frames
        && again.locale.maps == fc.locale.maps
        && again.locale.exists == fc.locale.exists
        && again.unit == fc.unit;
    r.push(if same {
        Check::pass(
            "base-topology-independence",
            "the completion is unchanged when J is replaced by the trivial topology",
        )
    } else {
        Check::new(
            "base-topology-independence",
            "the completion is unchanged when J is replaced by the trivial topology",
            Status::Discrepancy,
        )
    });
    if b.num_objects() == 1 && b.num_arrows() == 1 {
        const CITE: &str = "over a one-object base the completion is the frame of K-ideals of the fibre";
        let kf = fibre_topology(s, guards)?;
        let ideals = ideal_completion(&kf, guards)?;
        let c = match find_isomorphism(&fc.locale.frames[0], &ideals.frame) {
            Some(h) => {
                Check::pass("ideal-completion-match", CITE).with_note(show_map(&fc.locale.frames[0], &ideals.frame, &h))
            }
            None => Check::new("ideal-completion-match", CITE, Status::Discrepancy).with_witness(
                Witness::new()
                    .with("completion", format!("{}", fc.locale.frames[0].len()))
                    .with("ideals", format!("{}", ideals.frame.len())),
            ),
        };
        r.push(c);
    }
    Ok(r)
}

fn probe_preconditions(
    s: &FibredPreorderSite,
    target: &InternalLocaleCandidate,
    m: &[Vec<usize>],
    guards: &Guards,
) -> Result<()> {
    let b = &**s.base();
    let d = &*s.total.indexed;
    let g = &s.total;
    let t = &*g.total;
    if target.base() != s.base() {
        return input("target lives over another base");
    }
    let tr = internal_locale_report(target, guards)?;
    if !tr.passed() {
        let failing: Vec<String> =
            tr.checks.iter().filter(|c| !c.passed() && c.status != Status::Skipped).map(|c| c.name.clone()).collect();
        return Err(Error::Precondition(format!("target is not an internal locale: {}", failing.join(", "))));
    }
    if m.len() != b.num_objects()
        || b.objects()
            .any(|c| m[c].len() != d.fibres[c].num_objects() || m[c].iter().any(|&v| v >= target.frames[c].len()))
    {
        return input("the morphism needs one map P(c) → L(c) per base object");
    }
    for c in b.objects() {
        let fib = &d.fibres[c];
        for a in fib.arrows() {
            if !target.frames[c].leq(m[c][fib.src(a)], m[c][fib.tgt(a)]) {
                return Err(Error::Precondition(format!("the morphism is not monotone over `{}`", b.object_name(c))));
            }
        }
    }
    for f in b.arrows() {
        let (c, e) = (b.src(f), b.tgt(f));
        if d.fibres[e].objects().any(|y| m[c][d.transitions[f].obj(y)] != target.maps[f][m[e][y]]) {
            return Err(Error::Precondition(format!("the morphism is not natural along `{}`", b.arrow_name(f))));
        }
    }
    // K-covers go to existential covers: the transposes ∃_f(m x_i) join to m x
    let ex: Vec<Vec<usize>> = b.arrows().map(|f| target.exists_map(f)).collect();
    for o in t.objects() {
        let (c, x) = g.objects[o];
        for sv in s.topology.covering_sieves(o, guards)? {
            let fr = &target.frames[c];
            let join = fr.join_all(sv.arrows(t).map(|a| {
                let (f, _) = g.arrows[a];
                let (c2, x2) = g.objects[t.src(a)];
                ex[f][m[c2][x2]]
            }));
            if join != m[c][x] {
                return Err(Error::Precondition(format!(
                    "the morphism does not send the cover {} of `{}` to a cover",
                    sv.display(t),
                    t.object_name(o)
                )));
            }
        }
    }
    Ok(())
}

/// Searches every indexed frame homomorphism `h : L^K → target` with
/// `h ∘ η = m` and reports whether there is exactly one.
pub fn universal_property_probe(
    s: &FibredPreorderSite,
    target: &InternalLocaleCandidate,
    m: &[Vec<usize>],
    guards: &Guards,
) -> Result<VerificationReport> {
    const CITE: &str = "exactly one internal frame homomorphism h with h ∘ η = m";
    probe_preconditions(s, target, m, guards)?;
    let fc = fibred_ideal_completion(s, guards)?;
    let b = &**s.base();
    let d = &*s.total.indexed;
    let mut r = VerificationReport::new();
    let mut budget = guards.search_budget;
    let mut candidates: Vec<Vec<Vec<usize>>> = Vec::with_capacity(b.num_objects());
    for c in b.objects() {
        let (src, tgt) = (&*fc.locale.frames[c], &*target.frames[c]);
        let Search::Done(homs) = frame_homs(src, tgt, budget) else {
            r.push(Check::new("unique-factorization", CITE, Status::Inconclusive).with_guard("search_budget"));
            return Ok(r);
        };
        budget = budget.saturating_sub(homs.len() as u64);
        candidates
            .push(homs.into_iter().filter(|h| d.fibres[c].objects().all(|x| h[fc.unit[c][x]] == m[c][x])).collect());
    }
    // natural families among the fibrewise candidates
    let natural = |choice: &[usize]| {
        b.arrows().all(|f| {
            let (c, e) = (b.src(f), b.tgt(f));
            let (hc, he) = (&candidates[c][choice[c]], &candidates[e][choice[e]]);
            (0..fc.locale.frames[e].len()).all(|z| hc[fc.locale.maps[f][z]] == target.maps[f][he[z]])
        })
    };
    let mut found: Vec<Vec<usize>> = Vec::new();
    let mut choice = vec![0usize; b.num_objects()];
    let mut visited = 0u64;
    if candidates.iter().all(|v| !v.is_empty()) {
        loop {
            visited += 1;
            if visited > budget {
                r.push(Check::new("unique-factorization", CITE, Status::Inconclusive).with_guard("search_budget"));
                return Ok(r);
            }
            if natural(&choice) {
                found.push(choice.clone());
                if found.len() > 1 {
                    break;
                }
            }
            let mut i = 0;
            while i < choice.len() {
                choice[i] += 1;
                if choice[i] < candidates[i].len() {
                    break;
                }
                choice[i] = 0;
                i += 1;
            }
            if i == choice.len() {
                break;
            }
        }
    }
    let c = match found.len() {
        1 => {
            let parts: Vec<String> = b
                .objects()
                .map(|c| {
                    let h = &candidates[c][found[0][c]];
                    format!("{}: {}", b.object_name(c), show_map(&fc.locale.frames[c], &target.frames[c], h))
                })
                .collect();
            Check::pass("unique-factorization", CITE).with_note(parts.join("; "))
        }
        0 => Check::fail("unique-factorization", CITE, Witness::new().with("factorizations", "0")),
        _ => Check::fail("unique-factorization", CITE, Witness::new().with("factorizations", "2 or more")),
    };
    r.push(c);
    Ok(r)
}
