use super::*;
use crate::frame::validate_frame;

fn g() -> Guards {
    Guards::default()
}

#[test]
fn same_seed_same_instances() {
    let a = random_sites(11, 8, &g()).unwrap();
    let b = random_sites(11, 8, &g()).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.candidate.frames.len(), y.candidate.frames.len());
        assert_eq!(x.candidate.maps, y.candidate.maps);
        assert_eq!(x.candidate.exists, y.candidate.exists);
        let (bx, by) = (x.site.base(), y.site.base());
        assert_eq!(bx.num_arrows(), by.num_arrows());
    }
}

#[test]
fn drawn_sites_respect_the_size_bounds_and_are_fibred_sites() {
    for r in random_sites(3, 40, &g()).unwrap() {
        let b = r.site.base();
        assert!(b.num_objects() <= 4);
        assert!(b.is_preorder());
        for c in b.objects() {
            assert!(r.site.fibre(c).num_objects() <= 5);
            assert!(validate_frame(&r.candidate.frames[c]).passed());
        }
        assert!(fibred_site_report(&r.site, &g()).unwrap().passed(), "{}", r.label);
    }
}

/// `∃_f x ≤ y ⟺ x ≤ L(f) y` on the frame tables themselves.
#[test]
fn exists_tables_are_left_adjoints() {
    for r in random_sites(5, 30, &g()).unwrap() {
        let l = &r.candidate;
        let b = l.base();
        for f in b.arrows() {
            let (src, tgt) = (&l.frames[b.src(f)], &l.frames[b.tgt(f)]);
            let ex = l.exists_map(f);
            for (x, &ex_x) in ex.iter().enumerate().take(src.len()) {
                for y in 0..tgt.len() {
                    assert_eq!(tgt.leq(ex_x, y), src.leq(x, l.maps[f][y]));
                }
            }
        }
    }
}

#[test]
fn existential_instances_satisfy_both_relative_conditions() {
    for r in existential_sites(9, 6, &g()).unwrap() {
        assert!(check_relative_bc(&r.site, &g()).passes("relative-bc"));
        assert!(check_relative_frobenius(&r.site, &g()).passes("relative-frobenius"));
    }
}

#[test]
fn the_sweep_sees_both_outcomes() {
    let sites = random_sites(1, 60, &g()).unwrap();
    let frob: Vec<bool> =
        sites.iter().map(|r| check_relative_frobenius(&r.site, &g()).passes("relative-frobenius")).collect();
    assert!(frob.iter().any(|&b| b) && frob.iter().any(|&b| !b));
}

#[test]
fn cartesian_candidates_have_finite_limits_and_some_are_mutated() {
    let cands = cartesian_candidates(4, 10, &g()).unwrap();
    for l in &cands {
        assert!(has_finite_limits(l.base()));
    }
    let broken = cands
        .iter()
        .filter(|l| {
            let b = l.base();
            b.arrows().any(|f| {
                let ex = l.exists_map(f);
                let (src, tgt) = (&l.frames[b.src(f)], &l.frames[b.tgt(f)]);
                (0..src.len()).any(|x| (0..tgt.len()).any(|y| tgt.leq(ex[x], y) != src.leq(x, l.maps[f][y])))
            })
        })
        .count();
    assert!((1..=2).contains(&broken));
}

#[test]
fn preorder_coverages_are_valid_topologies() {
    for k in preorder_coverages(2, 10, &g()).unwrap() {
        assert!(k.base().num_objects() <= 5);
        assert!(crate::topology::validate_topology(&k, &g()).passed());
    }
}
