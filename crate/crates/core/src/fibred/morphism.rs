use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use super::{grothendieck_construction, GrothTotal, IndexedCat};
use crate::cat::{
    has_finite_limits, limit_preservation_violation, pullback_preservation_violation, terminal_preservation_violation,
    FinFunctor,
};
use crate::error::{input, Result};
use crate::report::{Check, Status, VerificationReport, Witness};

/// A morphism of indexed categories over a common base: one functor per
/// fibre, strictly natural in the base.
#[derive(Debug, Clone)]
pub struct FibMorphism {
    pub name: String,
    pub source: Arc<IndexedCat>,
    pub target: Arc<IndexedCat>,
    pub components: Vec<FinFunctor>,
}

impl FibMorphism {
    pub fn new(
        name: &str,
        source: Arc<IndexedCat>,
        target: Arc<IndexedCat>,
        components: Vec<FinFunctor>,
    ) -> Result<Self> {
        if source.base != target.base {
            return input(format!("{name}: indexed categories live over different bases"));
        }
        if components.len() != source.base.num_objects() {
            return input(format!("{name}: one component per base object is required"));
        }
        for (c, f) in components.iter().enumerate() {
            if f.source != source.fibres[c] || f.target != target.fibres[c] {
                return input(format!("{name}: component over `{}` has the wrong fibres", source.base.object_name(c)));
            }
        }
        Ok(FibMorphism { name: name.to_string(), source, target, components })
    }

    /// First failure of `L'(f) ∘ F_d = F_c ∘ L(f)`.
    pub fn naturality_violation(&self) -> Option<Witness> {
        let b = &*self.source.base;
        for f in b.arrows() {
            let (c, d) = (b.src(f), b.tgt(f));
            let (lf, lf2) = (&self.source.transitions[f], &self.target.transitions[f]);
            let (fc, fd) = (&self.components[c], &self.components[d]);
            let fib = &self.source.fibres[d];
            if let Some(y) = fib.objects().find(|&y| lf2.obj(fd.obj(y)) != fc.obj(lf.obj(y))) {
                return Some(Witness::new().with("arrow", b.arrow_name(f)).with("element", fib.object_name(y)));
            }
            if let Some(a) = fib.arrows().find(|&a| lf2.arr(fd.arr(a)) != fc.arr(lf.arr(a))) {
                return Some(Witness::new().with("arrow", b.arrow_name(f)).with("element", fib.arrow_name(a)));
            }
        }
        None
    }

    /// `G(F) : (c, x) ↦ (c, F_c x)`, `(f, α) ↦ (f, F_c α)`. Requires
    /// naturality.
    pub fn total_functor(&self, s: &GrothTotal, t: &GrothTotal) -> Result<FinFunctor> {
        let b = &*self.source.base;
        let obj = s.objects.iter().map(|&(c, x)| t.object(c, self.components[c].obj(x))).collect();
        let arr = s
            .total
            .arrows()
            .map(|a| {
                let (f, alpha) = s.arrows[a];
                let y = s.objects[s.total.tgt(a)].1;
                t.arrow(f, self.components[b.src(f)].arr(alpha), self.components[b.tgt(f)].obj(y))
            })
            .collect();
        FinFunctor::new(&format!("G({})", self.name), s.total.clone(), t.total.clone(), obj, arr)
    }
}

fn fibrewise_cartesian(d: &IndexedCat) -> bool {
    d.fibres.iter().all(|f| has_finite_limits(f))
        && d.transitions.iter().all(|t| limit_preservation_violation(t).is_none())
}

/// Checks a morphism of indexed categories through its induced functor of
/// totals: functoriality, commuting with the projections, preservation of
/// cartesian arrows and, over fibrewise cartesian indexed categories,
/// preservation of the terminal object and of pullbacks.
///
/// When every component preserves finite limits the limit checks are
/// predicted to pass, so a failure there is reported as a discrepancy.
pub fn fibration_morphism_report(m: &FibMorphism) -> Result<VerificationReport> {
    let mut r = VerificationReport::new();
    let b = &*m.source.base;
    let bad = b.objects().find(|&c| !m.components[c].check().passed());
    r.push(Check::from_witness(
        "component-functors",
        "each component is a functor",
        bad.map(|c| Witness::new().with("object", b.object_name(c))),
    ));
    r.push(Check::from_witness("indexed-naturality", "L'(f) ∘ F_d = F_c ∘ L(f)", m.naturality_violation()));
    if r.has_failure() {
        return Ok(r);
    }
    let s = grothendieck_construction(m.source.clone())?;
    let t = grothendieck_construction(m.target.clone())?;
    let g = m.total_functor(&s, &t)?;
    r.extend(g.check().scoped("total-functor"));
    let commutes = s.total.arrows().find(|&a| t.projection.arr(g.arr(a)) != s.projection.arr(a));
    r.push(Check::from_witness(
        "commutes-with-projections",
        "p' ∘ G(F) = p",
        commutes.map(|a| Witness::new().with("arrow", s.total.arrow_name(a))),
    ));
    let cart = s.total.arrows().find(|&a| s.tags[a].cartesian && !t.tags[g.arr(a)].cartesian);
    r.push(Check::from_witness(
        "preserves-cartesian",
        "cartesian arrows go to cartesian arrows",
        cart.map(|a| Witness::new().with("arrow", s.total.arrow_name(a)).with("image", t.total.arrow_name(g.arr(a)))),
    ));
    if !(fibrewise_cartesian(&m.source) && fibrewise_cartesian(&m.target)) {
        for name in ["preserves-terminal", "preserves-pullbacks"] {
            r.push(
                Check::new(name, "fibrewise cartesian indexed categories", Status::Skipped)
                    .with_note("some fibre or transition lacks finite limits"),
            );
        }
        return Ok(r);
    }
    let predicted = m.components.iter().all(|c| limit_preservation_violation(c).is_none());
    let settle = |check: Check| -> Check {
        if predicted && !check.passed() {
            Check { status: Status::Discrepancy, ..check }
        } else {
            check
        }
    };
    r.push(settle(Check::from_witness(
        "preserves-terminal",
        "G(F) sends the terminal object to a terminal object",
        terminal_preservation_violation(&g),
    )));
    r.push(settle(Check::from_witness(
        "preserves-pullbacks",
        "G(F) sends pullback squares to pullback squares",
        pullback_preservation_violation(&g),
    )));
    Ok(r)
}
