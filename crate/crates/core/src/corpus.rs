//! Seeded random instances for property sweeps.
//!
//! A random fibred preorder site has a poset base of at most four objects.
//! Over each object `c` sits the frame `O(Q(c))` of down-sets of a small
//! poset `Q(c)`, and every base arrow `f : c → d` carries a monotone map
//! `q_f : Q(c) → Q(d)`, chosen functorially. The transition `L(f)` is the
//! inverse image along `q_f` and `∃_f` is the down-closure of the direct
//! image. Frobenius and Beck–Chevalley hold for some draws and fail for
//! others, which is what the sweeps need.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bits::brace_list;
use crate::cat::{has_finite_limits, ArrowId, FinCategory, ObjId};
use crate::error::Result;
use crate::existential::{check_relative_bc, check_relative_frobenius, fibred_site_report, Adjoint, ExistentialSite};
use crate::fibred::IndexedCat;
use crate::frame::FiniteFrame;
use crate::locale::InternalLocaleCandidate;
use crate::report::Guards;
use crate::topology::{generate_topology, GrothendieckTopology};

/// Small posets on at most three points, given by their covering pairs. All
/// have at most five down-sets.
type Shape = (&'static [&'static str], &'static [(usize, usize)]);

const SHAPES: [Shape; 7] = [
    (&[], &[]),
    (&["p"], &[]),
    (&["p", "q"], &[(0, 1)]),
    (&["p", "q"], &[]),
    (&["p", "q", "r"], &[(0, 1), (1, 2)]),
    (&["p", "q", "r"], &[(0, 2), (1, 2)]),
    (&["p", "q", "r"], &[(0, 1), (0, 2)]),
];

#[derive(Debug, Clone)]
struct Poset {
    names: &'static [&'static str],
    leq: Vec<bool>,
}

impl Poset {
    fn shape(i: usize) -> Poset {
        let (names, lt) = SHAPES[i];
        let n = names.len();
        let mut leq = vec![false; n * n];
        for x in 0..n {
            leq[x * n + x] = true;
        }
        for &(a, b) in lt {
            leq[a * n + b] = true;
        }
        for k in 0..n {
            for a in 0..n {
                for b in 0..n {
                    if leq[a * n + k] && leq[k * n + b] {
                        leq[a * n + b] = true;
                    }
                }
            }
        }
        Poset { names, leq }
    }

    fn len(&self) -> usize {
        self.names.len()
    }

    fn leq(&self, a: usize, b: usize) -> bool {
        self.leq[a * self.len() + b]
    }

    fn down_sets(&self) -> Vec<u8> {
        let n = self.len();
        (0..1u8 << n)
            .filter(|&m| (0..n).all(|x| m >> x & 1 == 0 || (0..n).all(|y| !self.leq(y, x) || m >> y & 1 == 1)))
            .collect()
    }

    fn name(&self, m: u8) -> String {
        brace_list((0..self.len()).filter(|&x| m >> x & 1 == 1).map(|x| self.names[x]))
    }

    fn down_closure(&self, m: u8) -> u8 {
        let n = self.len();
        (0..n).filter(|&y| (0..n).any(|x| m >> x & 1 == 1 && self.leq(y, x))).fold(0, |acc, y| acc | 1 << y)
    }

    fn monotone_maps(&self, to: &Poset) -> Vec<Vec<usize>> {
        let (n, m) = (self.len(), to.len());
        if n > 0 && m == 0 {
            return Vec::new();
        }
        let total = m.pow(n as u32);
        (0..total)
            .map(|mut code| {
                (0..n)
                    .map(|_| {
                        let v = code % m.max(1);
                        code /= m.max(1);
                        v
                    })
                    .collect::<Vec<usize>>()
            })
            .filter(|q| (0..n).all(|a| (0..n).all(|b| !self.leq(a, b) || to.leq(q[a], q[b]))))
            .collect()
    }
}

/// One drawn instance: the existential site, the base topology and the
/// same data as a frame-valued candidate.
#[derive(Debug, Clone)]
pub struct RandomSite {
    pub label: String,
    pub site: ExistentialSite,
    pub base_topology: GrothendieckTopology,
    pub candidate: InternalLocaleCandidate,
}

fn random_poset_base(rng: &mut ChaCha8Rng, name: &str, max: usize) -> FinCategory {
    let n = rng.gen_range(1..=max);
    let names: Vec<String> = (0..n).map(|i| format!("c{i}")).collect();
    let mut rel = vec![false; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            rel[i * n + j] = rng.gen_bool(0.5);
        }
    }
    FinCategory::from_relation(name, names, rel).expect("upper-triangular relations are partial orders")
}

fn random_coverage(
    rng: &mut ChaCha8Rng,
    c: &Arc<FinCategory>,
    name: &str,
    guards: &Guards,
) -> Result<GrothendieckTopology> {
    let mut cov = Vec::new();
    for _ in 0..rng.gen_range(0..=2) {
        let x = rng.gen_range(0..c.num_objects());
        let fam: Vec<ArrowId> = c.incoming(x).iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
        cov.push((x, fam));
    }
    generate_topology(c.clone(), name, &cov, guards)
}

/// Monotone maps `q_f` for every arrow of a poset base, functorial, or
/// `None` when the draw has no functorial choice within a few retries.
fn functorial_maps(rng: &mut ChaCha8Rng, b: &FinCategory, q: &[Poset]) -> Option<Vec<Vec<usize>>> {
    let mut hasse = Vec::new();
    let mut derived = Vec::new();
    for f in b.arrows() {
        let (c, d) = (b.src(f), b.tgt(f));
        if c == d {
            continue;
        }
        let between = b.objects().find(|&m| m != c && m != d && b.leq(c, m) && b.leq(m, d));
        match between {
            None => hasse.push(f),
            Some(m) => derived.push((f, m)),
        }
    }
    'retry: for _ in 0..32 {
        let mut maps: Vec<Option<Vec<usize>>> = vec![None; b.num_arrows()];
        for x in b.objects() {
            maps[b.id(x)] = Some((0..q[x].len()).collect());
        }
        for &f in &hasse {
            let options = q[b.src(f)].monotone_maps(&q[b.tgt(f)]);
            maps[f] = Some(options.choose(rng)?.clone());
        }
        // longer arrows compose through an intermediate object
        let mut pending = derived.clone();
        while !pending.is_empty() {
            let before = pending.len();
            pending.retain(|&(f, m)| {
                let (c, d) = (b.src(f), b.tgt(f));
                let first = b.hom(c, m)[0];
                let second = b.hom(m, d)[0];
                match (&maps[first], &maps[second]) {
                    (Some(u), Some(v)) => {
                        maps[f] = Some(u.iter().map(|&i| v[i]).collect());
                        false
                    }
                    _ => true,
                }
            });
            if pending.len() == before {
                return None;
            }
        }
        let maps: Vec<Vec<usize>> = maps.into_iter().map(|m| m.expect("every arrow assigned")).collect();
        for f in b.arrows() {
            for g in b.arrows().filter(|&g| b.src(g) == b.tgt(f)) {
                let h = b.compose(g, f);
                if maps[f].iter().map(|&i| maps[g][i]).ne(maps[h].iter().copied()) {
                    continue 'retry;
                }
            }
        }
        return Some(maps);
    }
    None
}

/// Draws one fibred preorder site; `cartesian` restricts to bases with
/// finite limits.
pub fn random_site(rng: &mut ChaCha8Rng, label: &str, cartesian: bool, guards: &Guards) -> Result<RandomSite> {
    loop {
        let b = random_poset_base(rng, "B", 4);
        if cartesian && !has_finite_limits(&b) {
            continue;
        }
        let b = Arc::new(b);
        let mut q: Vec<Poset> = Vec::with_capacity(b.num_objects());
        for _ in b.objects() {
            q.push(Poset::shape(rng.gen_range(0..SHAPES.len())));
        }
        let Some(qmaps) = functorial_maps(rng, &b, &q) else { continue };
        let downs: Vec<Vec<u8>> = q.iter().map(Poset::down_sets).collect();
        let mut fibres = Vec::with_capacity(b.num_objects());
        for (c, p) in q.iter().enumerate() {
            let names: Vec<String> = downs[c].iter().map(|&m| p.name(m)).collect();
            let n = names.len();
            let mut rel = vec![false; n * n];
            for (i, &x) in downs[c].iter().enumerate() {
                for (j, &y) in downs[c].iter().enumerate() {
                    rel[i * n + j] = x & !y == 0;
                }
            }
            fibres.push(Arc::new(FinCategory::from_relation(&format!("O(Q{c})"), names, rel)?));
        }
        let obj = |c: ObjId, m: u8| fibres[c].obj(&q[c].name(m)).expect("down-set of Q");
        let mut maps = Vec::with_capacity(b.num_arrows());
        let mut exists = Vec::with_capacity(b.num_arrows());
        for f in b.arrows() {
            let (c, d) = (b.src(f), b.tgt(f));
            let qf = &qmaps[f];
            let preimage = |m: u8| (0..q[c].len()).filter(|&x| m >> qf[x] & 1 == 1).fold(0u8, |acc, x| acc | 1 << x);
            let image = |m: u8| {
                q[d].down_closure((0..q[c].len()).filter(|&x| m >> x & 1 == 1).fold(0u8, |acc, x| acc | 1 << qf[x]))
            };
            let mut lf = vec![0; fibres[d].num_objects()];
            for &m in &downs[d] {
                lf[obj(d, m)] = obj(c, preimage(m));
            }
            let mut ex = vec![0; fibres[c].num_objects()];
            for &m in &downs[c] {
                ex[obj(c, m)] = obj(d, image(m));
            }
            maps.push(lf);
            exists.push(ex);
        }
        let d = Arc::new(IndexedCat::from_preorder_maps(label, b.clone(), fibres.clone(), maps)?);
        let canonical = rng.gen_bool(0.5);
        let mut tops = Vec::with_capacity(fibres.len());
        for fib in &fibres {
            tops.push(if canonical {
                Arc::new(FiniteFrame::from_category(fib)?).canonical_topology(fib.clone(), guards)?
            } else {
                GrothendieckTopology::trivial(fib.clone())
            });
        }
        let mut adjoints = Vec::with_capacity(b.num_arrows());
        for f in b.arrows() {
            adjoints.push(Adjoint::from_preorder_table(&d, f, exists[f].clone())?);
        }
        let site = ExistentialSite::new(label, d.clone(), tops, adjoints)?;
        let base_topology = random_coverage(rng, &b, "J", guards)?;
        let mut candidate = InternalLocaleCandidate::from_indexed(label, &d, base_topology.clone())?;
        let fi = |c: ObjId, x: ObjId| candidate.frames[c].index(fibres[c].object_name(x)).expect("frame element");
        let mut frame_exists = Vec::with_capacity(b.num_arrows());
        for f in b.arrows() {
            let (c, t) = (b.src(f), b.tgt(f));
            let mut row = vec![0; fibres[c].num_objects()];
            for (x, &y) in exists[f].iter().enumerate() {
                row[fi(c, x)] = fi(t, y);
            }
            frame_exists.push(row);
        }
        candidate.exists = Some(frame_exists);
        return Ok(RandomSite { label: label.into(), site, base_topology, candidate });
    }
}

/// `count` random sites from `seed`, labelled `seed/index`.
pub fn random_sites(seed: u64, count: usize, guards: &Guards) -> Result<Vec<RandomSite>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|i| random_site(&mut rng, &format!("R{seed}/{i}"), false, guards)).collect()
}

/// `count` random sites satisfying the fibred-site conditions together
/// with relative Beck–Chevalley and Frobenius.
pub fn existential_sites(seed: u64, count: usize, guards: &Guards) -> Result<Vec<RandomSite>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut i = 0;
    while out.len() < count {
        let r = random_site(&mut rng, &format!("E{seed}/{i}"), false, guards)?;
        i += 1;
        let s = &r.site;
        if fibred_site_report(s, guards)?.passed()
            && check_relative_bc(s, guards).passes("relative-bc")
            && check_relative_frobenius(s, guards).passes("relative-frobenius")
        {
            out.push(r);
        }
    }
    Ok(out)
}

/// Frame-valued candidates over bases with finite limits. Every fifth one
/// has a single entry of one `∃` table moved, so that it is no longer a
/// left adjoint.
pub fn cartesian_candidates(seed: u64, count: usize, guards: &Guards) -> Result<Vec<InternalLocaleCandidate>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let mut l = random_site(&mut rng, &format!("C{seed}/{i}"), true, guards)?.candidate;
        if i % 5 == 4 {
            mutate_exists(&mut rng, &mut l);
        }
        out.push(l);
    }
    Ok(out)
}

/// Moves one entry of one `∃` table to a different element, when some
/// frame has two elements to choose from.
pub fn mutate_exists(rng: &mut ChaCha8Rng, l: &mut InternalLocaleCandidate) -> bool {
    let b = l.base().clone();
    let choices: Vec<ArrowId> = b.arrows().filter(|&f| l.frames[b.tgt(f)].len() > 1).collect();
    let Some(&f) = choices.choose(rng) else { return false };
    let mut ex: Vec<Vec<usize>> = b.arrows().map(|a| l.exists_map(a)).collect();
    let x = rng.gen_range(0..ex[f].len());
    let n = l.frames[b.tgt(f)].len();
    ex[f][x] = (ex[f][x] + rng.gen_range(1..n)) % n;
    l.exists = Some(ex);
    true
}

/// Random posets on at most five points with a topology generated by a
/// random coverage.
pub fn preorder_coverages(seed: u64, count: usize, guards: &Guards) -> Result<Vec<GrothendieckTopology>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let p = Arc::new(random_poset_base(&mut rng, &format!("P{seed}/{i}"), 5));
        out.push(random_coverage(&mut rng, &p, "K", guards)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests;
