use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use super::{ArrowId, FinCategory, ObjId};
use crate::error::{input, Result};
use crate::report::{Check, VerificationReport, Witness};

/// A functor between finite categories, stored as object and arrow maps.
/// Construction only checks that the maps are total and in range; the
/// functor laws are checked by [`FinFunctor::check`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinFunctor {
    pub name: String,
    pub source: Arc<FinCategory>,
    pub target: Arc<FinCategory>,
    obj: Vec<ObjId>,
    arr: Vec<ArrowId>,
}

impl FinFunctor {
    pub fn new(
        name: &str,
        source: Arc<FinCategory>,
        target: Arc<FinCategory>,
        obj: Vec<ObjId>,
        arr: Vec<ArrowId>,
    ) -> Result<Self> {
        if obj.len() != source.num_objects() || arr.len() != source.num_arrows() {
            return input(format!("{name}: object or arrow map is not total"));
        }
        if obj.iter().any(|&o| o >= target.num_objects()) || arr.iter().any(|&a| a >= target.num_arrows()) {
            return input(format!("{name}: map leaves the target category"));
        }
        Ok(FinFunctor { name: name.to_string(), source, target, obj, arr })
    }

    /// Builds a functor from identifier pairs. Identity arrows of the source
    /// that are not listed are sent to the identity of the image object.
    pub fn from_names(
        name: &str,
        source: Arc<FinCategory>,
        target: Arc<FinCategory>,
        objects: &[(&str, &str)],
        arrows: &[(&str, &str)],
    ) -> Result<Self> {
        let mut obj = alloc::vec![usize::MAX; source.num_objects()];
        for (a, b) in objects {
            let (Some(x), Some(y)) = (source.obj(a), target.obj(b)) else {
                return input(format!("{name}: unknown object in {a} ↦ {b}"));
            };
            obj[x] = y;
        }
        if let Some(x) = obj.iter().position(|&o| o == usize::MAX) {
            return input(format!("{name}: object `{}` is not mapped", source.object_name(x)));
        }
        let mut arr = alloc::vec![usize::MAX; source.num_arrows()];
        for (a, b) in arrows {
            let (Some(f), Some(g)) = (source.arrow(a), target.arrow(b)) else {
                return input(format!("{name}: unknown arrow in {a} ↦ {b}"));
            };
            arr[f] = g;
        }
        for x in source.objects() {
            let i = source.id(x);
            if arr[i] == usize::MAX {
                arr[i] = target.id(obj[x]);
            }
        }
        if target.is_preorder() {
            for f in source.arrows() {
                if arr[f] == usize::MAX {
                    if let Some(&g) = target.hom(obj[source.src(f)], obj[source.tgt(f)]).first() {
                        arr[f] = g;
                    }
                }
            }
        }
        if let Some(f) = arr.iter().position(|&a| a == usize::MAX) {
            return input(format!("{name}: arrow `{}` is not mapped", source.arrow_name(f)));
        }
        FinFunctor::new(name, source, target, obj, arr)
    }

    /// Functor into a preorder category determined by its object map.
    pub fn into_preorder(
        name: &str,
        source: Arc<FinCategory>,
        target: Arc<FinCategory>,
        obj: Vec<ObjId>,
    ) -> Result<Self> {
        let mut arr = Vec::with_capacity(source.num_arrows());
        for f in source.arrows() {
            match target.hom(obj[source.src(f)], obj[source.tgt(f)]).first() {
                Some(&g) => arr.push(g),
                None => return input(format!("{name}: no arrow in the target for `{}`", source.arrow_name(f))),
            }
        }
        FinFunctor::new(name, source, target, obj, arr)
    }

    pub fn identity(c: Arc<FinCategory>) -> Self {
        let obj = c.objects().collect();
        let arr = c.arrows().collect();
        FinFunctor { name: format!("1_{}", c.name()), source: c.clone(), target: c, obj, arr }
    }

    /// `self` after `first`.
    pub fn after(&self, first: &FinFunctor) -> Result<FinFunctor> {
        if first.target != self.source {
            return input(format!("{} ∘ {}: categories do not match", self.name, first.name));
        }
        let obj = first.obj.iter().map(|&o| self.obj[o]).collect();
        let arr = first.arr.iter().map(|&a| self.arr[a]).collect();
        FinFunctor::new(&format!("{}∘{}", self.name, first.name), first.source.clone(), self.target.clone(), obj, arr)
    }

    #[inline]
    pub fn obj(&self, x: ObjId) -> ObjId {
        self.obj[x]
    }

    #[inline]
    pub fn arr(&self, f: ArrowId) -> ArrowId {
        self.arr[f]
    }

    pub fn object_map(&self) -> &[ObjId] {
        &self.obj
    }

    pub fn arrow_map(&self) -> &[ArrowId] {
        &self.arr
    }

    /// Endpoint typing, preservation of identities and of composition.
    pub fn check(&self) -> VerificationReport {
        let (s, t) = (&*self.source, &*self.target);
        let mut r = VerificationReport::new();
        let typing =
            s.arrows().find(|&f| t.src(self.arr[f]) != self.obj[s.src(f)] || t.tgt(self.arr[f]) != self.obj[s.tgt(f)]);
        r.push(Check::from_witness(
            "functor-typing",
            "F(f) : F(x) → F(y) for f : x → y",
            typing.map(|f| Witness::new().with("arrow", s.arrow_name(f)).with("image", t.arrow_name(self.arr[f]))),
        ));
        let ids = s.objects().find(|&x| self.arr[s.id(x)] != t.id(self.obj[x]));
        r.push(Check::from_witness(
            "functor-identities",
            "F(id_x) = id_F(x)",
            ids.map(|x| Witness::new().with("object", s.object_name(x))),
        ));
        let mut comp = None;
        if typing.is_none() {
            'outer: for f in s.arrows() {
                for g in s.arrows() {
                    if s.src(g) != s.tgt(f) {
                        continue;
                    }
                    let lhs = self.arr[s.compose(g, f)];
                    let rhs = t.try_compose(self.arr[g], self.arr[f]);
                    if rhs != Some(lhs) {
                        comp = Some(Witness::new().with("g", s.arrow_name(g)).with("f", s.arrow_name(f)));
                        break 'outer;
                    }
                }
            }
        }
        r.push(Check::from_witness("functor-composition", "F(g ∘ f) = F(g) ∘ F(f)", comp));
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn collapse_is_a_functor() {
        let a = Arc::new(fixtures::arrow());
        let o = Arc::new(fixtures::one());
        let p = FinFunctor::from_names("!", a, o, &[("a", "*"), ("b", "*")], &[("f", "id_*")]).unwrap();
        assert!(p.check().passed());
    }

    #[test]
    fn swap_is_not_a_functor() {
        let a = Arc::new(fixtures::arrow());
        let p = FinFunctor::from_names("swap", a.clone(), a, &[("a", "b"), ("b", "a")], &[("f", "f")]).unwrap();
        let r = p.check();
        assert!(r.get("functor-typing").unwrap().status.is_failure());
        assert_eq!(r.get("functor-typing").unwrap().witness.as_ref().unwrap().get("arrow"), Some("f"));
    }

    #[test]
    fn composition_of_functors() {
        let a = Arc::new(fixtures::arrow());
        let id = FinFunctor::identity(a.clone());
        let o = Arc::new(fixtures::one());
        let p = FinFunctor::into_preorder("!", a.clone(), o, alloc::vec![0, 0]).unwrap();
        let q = p.after(&id).unwrap();
        assert_eq!(q.object_map(), p.object_map());
        assert!(q.check().passed());
    }
}
