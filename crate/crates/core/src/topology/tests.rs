use super::*;
use crate::cat::FinFunctor;
use crate::fixtures;
use alloc::vec;
use proptest::prelude::*;

fn g() -> Guards {
    Guards::default()
}

/// Canonical topology of a finite powerset-like poset: a sieve on `x` covers
/// iff the union of the bitmask names of its domains is `x`. Independent of
/// the generation machinery.
fn canonical_p2() -> GrothendieckTopology {
    let p2 = Arc::new(fixtures::p2());
    let mask = |name: &str| -> u8 {
        match name {
            "e" => 0,
            "0" => 1,
            "1" => 2,
            "01" => 3,
            _ => unreachable!(),
        }
    };
    GrothendieckTopology::from_predicate(
        p2,
        "canonical",
        Arc::new(move |c, s| {
            let u = s.arrows(c).fold(0u8, |acc, f| acc | mask(c.object_name(c.src(f))));
            u == mask(c.object_name(s.cod))
        }),
        &g(),
    )
    .unwrap()
}

fn arr(c: &FinCategory, n: &str) -> ArrowId {
    c.arrow(n).unwrap()
}

#[test]
fn sieve_counts() {
    let one = fixtures::one();
    assert_eq!(enumerate_sieves(&one, 0, &g()).unwrap().len(), 2);
    let a = fixtures::arrow();
    let b = a.obj("b").unwrap();
    let sv = enumerate_sieves(&a, b, &g()).unwrap();
    let shown: Vec<String> = sv.iter().map(|s| s.display(&a)).collect();
    assert_eq!(sv.len(), 3);
    for want in ["{}", "{f}", "{f,id_b}"] {
        assert!(shown.iter().any(|s| s == want), "{want} missing from {shown:?}");
    }
    let p2 = fixtures::p2();
    assert_eq!(enumerate_sieves(&p2, p2.obj("01").unwrap(), &g()).unwrap().len(), 6);
}

#[test]
fn sieve_guard_is_an_error() {
    let p2 = fixtures::p2();
    let tight = Guards { sieve_arrows: 3, ..g() };
    let e = enumerate_sieves(&p2, p2.obj("01").unwrap(), &tight).unwrap_err();
    assert!(matches!(e, Error::Guard { guard: "sieve_arrows", .. }));
    assert!(alloc::format!("{e}").contains("`01`"));
}

#[test]
fn sieve_operations() {
    let a = fixtures::arrow();
    let b = a.obj("b").unwrap();
    let f = arr(&a, "f");
    let sf = Sieve::principal(&a, f);
    assert_eq!(sf.display(&a), "{f}");
    assert!(sf.pullback(&a, f).is_maximal());
    assert!(Sieve::from_arrows(&a, b, [arr(&a, "id_b")]).is_err());
    assert_eq!(Sieve::generated(&a, b, [arr(&a, "id_b")]), Sieve::maximal(&a, b));
}

#[test]
fn closure_examples() {
    let one = Arc::new(fixtures::one());
    let t = GrothendieckTopology::trivial(one.clone());
    assert_eq!(close_sieve(&t, &Sieve::empty(&one, 0)), Sieve::empty(&one, 0));
    let can = canonical_p2();
    let p2 = can.base().clone();
    let x0 = p2.obj("0").unwrap();
    let m = Sieve::maximal(&p2, x0);
    assert_eq!(close_sieve(&can, &m), m);
    // {e<=01, 0<=01} is closed: its pullback to 1 is {e<=1}, which does not cover
    let top = p2.obj("01").unwrap();
    let s = Sieve::generated(&p2, top, [arr(&p2, "0<=01")]);
    assert_eq!(close_sieve(&can, &s), s);
    // {e<=0} is not covering but closes to itself; {e<=e} is maximal on e
    let s = Sieve::generated(&p2, top, [arr(&p2, "0<=01"), arr(&p2, "1<=01")]);
    assert!(close_sieve(&can, &s).is_maximal());
}

#[test]
fn generation_examples() {
    let a = Arc::new(fixtures::arrow());
    let t = generate_topology(a.clone(), "t", &[], &g()).unwrap();
    assert!(t.difference(&GrothendieckTopology::trivial(a.clone()), &g()).unwrap().is_none());

    let b = a.obj("b").unwrap();
    let j = generate_topology(a.clone(), "j", &[(b, vec![arr(&a, "f")])], &g()).unwrap();
    let covering: Vec<String> = a
        .objects()
        .flat_map(|x| j.covering_sieves(x, &g()).unwrap())
        .map(|s| alloc::format!("{}:{}", a.object_name(s.cod), s.display(&a)))
        .collect();
    assert_eq!(covering, ["a:{id_a}", "b:{f}", "b:{f,id_b}"]);
    assert!(validate_topology(&j, &g()).passed());

    let can = canonical_p2();
    let p2 = can.base().clone();
    let fam = |x: &str, ys: &[&str]| -> (ObjId, Vec<ArrowId>) {
        (p2.obj(x).unwrap(), ys.iter().map(|y| arr(&p2, &alloc::format!("{y}<={x}"))).collect())
    };
    let cov = vec![fam("e", &[]), fam("01", &["0", "1"])];
    let gen = generate_topology(p2.clone(), "gen", &cov, &g()).unwrap();
    assert!(gen.difference(&can, &g()).unwrap().is_none());
    assert!(validate_topology(&can, &g()).passed());
}

#[test]
fn validation_negative() {
    let a = Arc::new(fixtures::arrow());
    let (x, y) = (a.obj("a").unwrap(), a.obj("b").unwrap());
    let f = arr(&a, "f");
    let sieves = vec![Sieve::maximal(&a, x), Sieve::maximal(&a, y), Sieve::principal(&a, f)];
    let ok = GrothendieckTopology::from_sieves(a.clone(), "ok", sieves.clone()).unwrap();
    assert!(validate_topology(&ok, &g()).passed());
    let bad = GrothendieckTopology::from_sieves(a.clone(), "bad", sieves[1..].to_vec()).unwrap();
    let r = validate_topology(&bad, &g());
    let max = r.get("topology-maximal").unwrap();
    assert_eq!(max.status, Status::Fail);
    assert_eq!(max.witness.as_ref().unwrap().get("object"), Some("a"));
}

#[test]
fn sampled_validation_beyond_guard() {
    let can = canonical_p2();
    let tight = Guards { sieve_arrows: 3, sample_budget: 64, ..g() };
    let r = validate_topology(&can, &tight);
    assert_eq!(r.status("topology-stability"), Some(Status::Sampled));
    assert_eq!(r.status("topology-maximal"), Some(Status::Pass));
}

#[test]
fn generated_topology_is_least() {
    // every topology containing the coverage, found by brute force over all
    // subsets of sieves, contains the generated one
    let a = Arc::new(fixtures::arrow());
    let s = Arc::new(fixtures::sier());
    let cases = [
        (a.clone(), vec![(a.obj("b").unwrap(), vec![arr(&a, "f")])]),
        (s.clone(), vec![]),
        (s.clone(), vec![(s.obj("top").unwrap(), vec![arr(&s, "u<=top")])]),
        (s.clone(), vec![(s.obj("bot").unwrap(), vec![])]),
    ];
    for (c, cov) in cases {
        let gen = generate_topology(c.clone(), "gen", &cov, &g()).unwrap();
        let all: Vec<Sieve> = c.objects().flat_map(|x| enumerate_sieves(&c, x, &g()).unwrap()).collect();
        assert!(all.len() <= 12);
        let gens: Vec<Sieve> = cov.iter().map(|(x, f)| Sieve::generated(&c, *x, f.iter().copied())).collect();
        let mut intersection: Option<Vec<bool>> = None;
        for m in 0u32..(1 << all.len()) {
            let chosen: Vec<Sieve> = (0..all.len()).filter(|i| m >> i & 1 == 1).map(|i| all[i].clone()).collect();
            if !gens.iter().all(|s| chosen.contains(s)) {
                continue;
            }
            let t = GrothendieckTopology::from_sieves(c.clone(), "t", chosen).unwrap();
            if !validate_topology(&t, &g()).passed() {
                continue;
            }
            let mem: Vec<bool> = all.iter().map(|s| t.covers(s)).collect();
            intersection = Some(match intersection {
                None => mem,
                Some(prev) => prev.iter().zip(&mem).map(|(a, b)| *a && *b).collect(),
            });
        }
        let inter = intersection.unwrap();
        for (s, want) in all.iter().zip(inter) {
            assert_eq!(gen.covers(s), want, "{}", s.display(&c));
        }
    }
}

#[test]
fn site_morphism_examples() {
    let can = canonical_p2();
    let p2 = can.base().clone();
    let id = FinFunctor::identity(p2.clone());
    assert!(site_morphism_report(&id, &can, &can, &g()).passed());

    let one = Arc::new(fixtures::one());
    let t1 = GrothendieckTopology::trivial(one.clone());
    let top = FinFunctor::into_preorder("top", one.clone(), p2.clone(), vec![p2.obj("01").unwrap()]).unwrap();
    let r = site_morphism_report(&top, &t1, &can, &g());
    assert!(r.passes("cover-preserving"));
    assert!(r.passes("covering-flat"));

    let zero = FinFunctor::into_preorder("zero", one.clone(), p2.clone(), vec![p2.obj("0").unwrap()]).unwrap();
    let r = site_morphism_report(&zero, &t1, &can, &g());
    let flat = r.get("covering-flat").unwrap();
    assert_eq!(flat.status, Status::Fail);
    assert_eq!(flat.witness.as_ref().unwrap().get("object"), Some("1"));
}

#[test]
fn comorphism_examples() {
    let can = canonical_p2();
    let p2 = can.base().clone();
    let id = FinFunctor::identity(p2.clone());
    assert!(comorphism_report(&id, &can, &can, &g()).passed());

    let a = Arc::new(fixtures::arrow());
    let one = Arc::new(fixtures::one());
    let collapse = FinFunctor::into_preorder("!", a.clone(), one.clone(), vec![0, 0]).unwrap();
    let (k, j) = (GrothendieckTopology::trivial(a.clone()), GrothendieckTopology::trivial(one));
    let r = comorphism_report(&collapse, &k, &j, &g());
    assert!(r.passes("cover-lifting"));
    let refl = r.get("cover-reflecting").unwrap();
    assert_eq!(refl.status, Status::Fail);
    let w = refl.witness.as_ref().unwrap();
    assert_eq!(w.get("object"), Some("b"));
    assert_eq!(w.get("sieve"), Some("{f}"));
}

/// A random poset on `n` elements from an upper-triangular relation.
fn poset(n: usize, bits: &[bool]) -> Arc<FinCategory> {
    let names: Vec<String> = (0..n).map(|i| alloc::format!("p{i}")).collect();
    let mut rel = vec![false; n * n];
    let mut k = 0;
    for i in 0..n {
        for j in i + 1..n {
            rel[i * n + j] = bits[k % bits.len()];
            k += 1;
        }
    }
    Arc::new(FinCategory::from_relation("R", names, rel).unwrap())
}

fn random_coverage(c: &FinCategory, picks: &[u8]) -> Coverage {
    let mut cov = Vec::new();
    for (k, x) in c.objects().enumerate() {
        let into = c.incoming(x);
        let p = picks[k % picks.len()];
        if p.is_multiple_of(3) {
            continue;
        }
        let fam: Vec<ArrowId> =
            into.iter().enumerate().filter(|(i, _)| (p >> (i % 8)) & 1 == 1).map(|(_, &f)| f).collect();
        cov.push((x, fam));
    }
    cov
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn closure_is_a_closure_operator(n in 1usize..5, bits in prop::collection::vec(any::<bool>(), 6), picks in prop::collection::vec(any::<u8>(), 4)) {
        let c = poset(n, &bits);
        let j = generate_topology(c.clone(), "j", &random_coverage(&c, &picks), &g()).unwrap();
        for x in c.objects() {
            let all = enumerate_sieves(&c, x, &g()).unwrap();
            for s in &all {
                let cl = close_sieve(&j, s);
                prop_assert!(s.is_subset(&cl));
                prop_assert!(cl.is_sieve(&c));
                prop_assert_eq!(&close_sieve(&j, &cl), &cl);
                for t in &all {
                    if s.is_subset(t) {
                        prop_assert!(cl.is_subset(&close_sieve(&j, t)));
                    }
                }
            }
        }
    }

    #[test]
    fn generated_topologies_validate_and_lazy_mode_agrees(n in 1usize..5, bits in prop::collection::vec(any::<bool>(), 6), picks in prop::collection::vec(any::<u8>(), 4)) {
        let c = poset(n, &bits);
        let cov = random_coverage(&c, &picks);
        let j = generate_topology(c.clone(), "j", &cov, &g()).unwrap();
        prop_assert!(j.is_explicit());
        prop_assert!(validate_topology(&j, &g()).passed());
        let lazy = generate_topology(c.clone(), "lazy", &cov, &Guards { sieve_arrows: 0, ..g() }).unwrap();
        prop_assert!(!lazy.is_explicit());
        prop_assert!(j.difference(&lazy, &g()).unwrap().is_none());
    }
}
