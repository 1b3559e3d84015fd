//! Property sweeps over seeded random fibred preorder sites.

use relsite_core::corpus::{cartesian_candidates, existential_sites, preorder_coverages, random_sites};
use relsite_core::existential::{
    check_coorthogonal_generation, check_relative_bc, check_relative_frobenius, existential_site_report,
    existential_topology,
};
use relsite_core::locale::{
    fibre_site, fibre_site_report, fibred_completion_report, fibred_ideal_completion, ideal_completion,
    ideal_completion_report, internal_locale_report, FibredPreorderSite,
};
use relsite_core::topology::validate_topology;
use relsite_core::{Guards, Status};

fn g() -> Guards {
    Guards::default()
}

#[test]
fn topology_iff_relative_conditions() {
    let start = std::time::Instant::now();
    let mut agree = [0usize; 2];
    for r in random_sites(17, 220, &g()).unwrap() {
        let (ext, report) = existential_topology(&r.site, &g()).unwrap();
        let valid = validate_topology(&ext, &g()).passed();
        let conds = check_relative_bc(&r.site, &g()).passes("relative-bc")
            && check_relative_frobenius(&r.site, &g()).passes("relative-frobenius");
        assert_eq!(valid, conds, "{}", r.label);
        assert_eq!(report.status("existential-biconditional"), Some(Status::Pass), "{}", r.label);
        agree[valid as usize] += 1;
    }
    assert!(start.elapsed().as_secs() < 60);
    assert!(agree[0] > 0 && agree[1] > 0);
}

#[test]
fn implications_between_site_predicates() {
    for r in random_sites(23, 80, &g()).unwrap() {
        let rep = existential_site_report(&r.site, &r.base_topology, &g()).unwrap();
        for name in ["linearization-implies-reflecting", "reflecting-implies-giraud"] {
            let st = rep.status(name).unwrap();
            assert!(st == Status::Pass || st == Status::Skipped, "{} {name} {st:?}", r.label);
        }
        let existential = check_relative_bc(&r.site, &g()).passes("relative-bc")
            && check_relative_frobenius(&r.site, &g()).passes("relative-frobenius");
        if existential && rep.passes("j-reflecting") {
            assert!(rep.passes("giraud-contained"), "{}", r.label);
        }
    }
}

#[test]
fn absolute_and_relative_conditions_agree_on_cartesian_bases() {
    let (mut genuine, mut mutated) = (0, 0);
    for l in cartesian_candidates(31, 60, &g()).unwrap() {
        let r = internal_locale_report(&l, &g()).unwrap();
        if r.passes("left-adjoints") {
            genuine += 1;
            assert_eq!(r.status("bc-frobenius-equivalence"), Some(Status::Pass), "{}", l.name);
            let absolute = r.passes("beck-chevalley") && r.passes("frobenius");
            let relative = r.passes("relative-bc") && r.passes("relative-frobenius");
            assert_eq!(absolute, relative, "{}", l.name);
        } else {
            mutated += 1;
            assert!(
                !r.passes("beck-chevalley")
                    || !r.passes("frobenius")
                    || !r.passes("relative-bc")
                    || !r.passes("relative-frobenius")
            );
        }
    }
    assert!(genuine >= 40 && mutated >= 1);
}

#[test]
fn fibre_sites_of_random_existential_sites() {
    for r in existential_sites(41, 20, &g()).unwrap() {
        for c in r.site.base().objects() {
            let fs = fibre_site(&r.site, c, &g()).unwrap();
            let rep = fibre_site_report(&r.site, &fs, &g()).unwrap();
            assert!(rep.passed(), "{} at {c}: {:?}", r.label, rep.failing());
        }
    }
}

#[test]
fn existential_topology_is_generated_by_vertical_and_cocartesian_covers() {
    for r in existential_sites(43, 20, &g()).unwrap() {
        let (ext, _) = existential_topology(&r.site, &g()).unwrap();
        let rep = check_coorthogonal_generation(&r.site, &ext, &g()).unwrap();
        assert!(rep.passed(), "{}: {:?}", r.label, rep.failing());
    }
}

#[test]
fn random_coverages_complete_over_one() {
    for k in preorder_coverages(47, 25, &g()).unwrap() {
        let fi = ideal_completion(&k, &g()).unwrap();
        assert!(ideal_completion_report(&fi, &k, &g()).unwrap().passed());
        let s = FibredPreorderSite::over_one(&k, &g()).unwrap();
        let fc = fibred_ideal_completion(&s, &g()).unwrap();
        let r = fibred_completion_report(&s, &fc, &g()).unwrap();
        assert!(r.passed(), "{}: {:?}", k.base().name(), r.failing());
        let m = r.get("ideal-completion-match").unwrap();
        assert_eq!(m.status, Status::Pass);
        assert!(m.note.as_deref().is_some_and(|n| n.contains("↦")));
    }
}
