//! Command-line surface and dispatch.

use clap::{Args, Parser, Subcommand, ValueEnum};

use relsite_core::cat::validate_category;
use relsite_core::cat::ObjId;
use relsite_core::corpus::{cartesian_candidates, existential_sites, preorder_coverages, random_sites};
use relsite_core::existential::{
    check_coorthogonal_generation, check_relative_bc, check_relative_frobenius, existential_site_report,
    existential_topology, fibred_site_report, ExistentialSite,
};
use relsite_core::factorization::{closed_sieve_locale, factorization_report};
use relsite_core::fibred::{giraud_topology, validate_indexed};
use relsite_core::frame::validate_frame;
use relsite_core::locale::{
    fibre_site, fibre_site_report, fibred_completion_report, fibred_ideal_completion, ideal_completion,
    ideal_completion_report, internal_locale_report, FibredPreorderSite, InternalLocaleCandidate,
};
use relsite_core::topology::validate_topology;
use relsite_core::{Check, GrothendieckTopology, Guards, Status, VerificationReport, Witness};

use crate::bundle::{parse_site_bundle, SectionKind, SiteBundle};
use crate::emit::{CommandError, ErrorKind, Outcome};
use crate::export::{frame_section, locale_bundle, topology_section};
use crate::resolve::{resolve, ResolveError, Resolved, TopologyItem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "relsite",
    version,
    about = "Checks relative sites, existential fibred sites and internal locales on finite data"
)]
pub struct Cli {
    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Human, global = true)]
    pub format: Format,
    /// Override a size guard, e.g. `--guard sieve_arrows=12`. Repeatable.
    #[arg(long = "guard", value_name = "KEY=VALUE", global = true)]
    pub guards: Vec<String>,
    /// Include wall-clock time in the report (makes output nondeterministic).
    #[arg(long, global = true)]
    pub timing: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct BundleArg {
    /// Site-bundle file, or `-` for standard input.
    pub bundle: String,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate every section of a bundle.
    Validate(BundleArg),
    /// Compute the Giraud topology of an indexed category over a base topology.
    Giraud {
        #[command(flatten)]
        input: BundleArg,
        /// Indexed category whose total category gets the topology.
        #[arg(long)]
        indexed: String,
        /// Topology on the base.
        #[arg(long)]
        topology: String,
    },
    /// Compute and validate the existential topology of a site.
    ExistentialTopology {
        #[command(flatten)]
        input: BundleArg,
        /// Existential site section.
        #[arg(long)]
        site: String,
    },
    /// Run the named check (or family of checks) on a site.
    Check {
        #[command(flatten)]
        input: BundleArg,
        /// A check name such as `relative-bc`, or a family name that runs every check in it.
        #[arg(long)]
        property: String,
        /// Defaults to the only site in the bundle.
        #[arg(long)]
        site: Option<String>,
        /// Base topology; defaults to the trivial topology.
        #[arg(long)]
        topology: Option<String>,
    },
    /// The frame of K-ideals of a preorder.
    IdealCompletion {
        #[command(flatten)]
        input: BundleArg,
        /// Topology on the preorder to complete.
        #[arg(long)]
        topology: String,
        /// Also require the canonical map to be an isomorphism.
        #[arg(long)]
        expect_isomorphism: bool,
    },
    /// The fibred ideal completion of a fibred preorder site.
    FibredCompletion {
        #[command(flatten)]
        input: BundleArg,
        /// Topology on a total category, or on a plain preorder read over ONE.
        #[arg(long)]
        topology: String,
        /// Base topology when `--topology` lives on a total category; trivial if omitted.
        #[arg(long)]
        base_topology: Option<String>,
        /// Also require the unit to be an isomorphism of indexed frames.
        #[arg(long)]
        expect_isomorphism: bool,
    },
    /// The fibre site of an existential site at a base object.
    FibreSite {
        #[command(flatten)]
        input: BundleArg,
        /// Defaults to the only site in the bundle.
        #[arg(long)]
        site: Option<String>,
        /// Base object whose fibre site is built.
        #[arg(long)]
        object: String,
    },
    /// The closed-sieve locale of a morphism of sites and its factorization checks.
    Factorize {
        #[command(flatten)]
        input: BundleArg,
        /// The morphism of sites.
        #[arg(long)]
        functor: String,
        /// Topology on the functor's source.
        #[arg(long)]
        source_topology: String,
        /// Topology on the functor's target.
        #[arg(long)]
        target_topology: String,
    },
    /// A property sweep over seeded random instances.
    Corpus {
        /// Seed of the instance generator; equal seeds give equal reports.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of instances.
        #[arg(long, default_value_t = 50)]
        count: usize,
        /// Property checked on every instance.
        #[arg(long, value_enum, default_value_t = CorpusProperty::ExistentialBiconditional)]
        property: CorpusProperty,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CorpusProperty {
    /// The existential predicate is a topology iff relative BC and relative Frobenius hold.
    ExistentialBiconditional,
    /// On cartesian bases, absolute and relative BC + Frobenius agree.
    BcFrobeniusEquivalence,
    /// Fibre sites pass their checks.
    FibreSite,
    /// Vertical and cocartesian covers generate the existential topology.
    CoorthogonalGeneration,
    /// Over ONE the fibred completion is the ideal completion.
    IdealCompletionMatch,
    /// The implications between the site predicates.
    SiteImplications,
}

/// Guards from `RELSITE_GUARDS` (`key=value,...`) overridden by flags.
pub fn guards_from(env: Option<&str>, flags: &[String]) -> Result<Guards, CommandError> {
    let mut g = Guards::default();
    let from_env = env.into_iter().flat_map(|s| s.split(',')).map(str::trim).filter(|s| !s.is_empty());
    for kv in from_env.chain(flags.iter().map(String::as_str)) {
        let usage = |m: String| CommandError::new(ErrorKind::Usage, m);
        let (k, v) = kv.split_once('=').ok_or_else(|| usage(format!("guard `{kv}` is not KEY=VALUE")))?;
        let n: u64 =
            v.trim().parse().map_err(|_| usage(format!("guard `{k}` needs a non-negative integer, got `{v}`")))?;
        match k.trim().replace('-', "_").as_str() {
            "sieve_arrows" => g.sieve_arrows = n as usize,
            "sections" => g.sections = n as usize,
            "ideals" => g.ideals = n as usize,
            "search_budget" => g.search_budget = n,
            "sample_budget" => g.sample_budget = n as usize,
            other => {
                return Err(usage(format!(
                    "unknown guard `{other}` (expected sieve_arrows, sections, ideals, search_budget or sample_budget)"
                )))
            }
        }
    }
    Ok(g)
}

impl From<ResolveError> for CommandError {
    fn from(e: ResolveError) -> Self {
        let kind = match &e {
            ResolveError::Unresolved { .. } => ErrorKind::Resolution,
            ResolveError::Invalid { .. } => ErrorKind::Input,
            ResolveError::Core { source, .. } => CommandError::from(source.clone()).kind,
        };
        CommandError::new(kind, e.to_string())
    }
}

type Res<T> = Result<T, CommandError>;

fn load(text: &str, guards: &Guards) -> Res<(SiteBundle, Resolved)> {
    let b = parse_site_bundle(text).map_err(|e| CommandError::new(ErrorKind::Syntax, e.to_string()))?;
    let r = resolve(&b, guards)?;
    Ok((b, r))
}

fn usage(msg: impl Into<String>) -> CommandError {
    CommandError::new(ErrorKind::Usage, msg)
}

fn topology<'a>(r: &'a Resolved, name: &str) -> Res<&'a TopologyItem> {
    r.topologies
        .get(name)
        .ok_or_else(|| CommandError::new(ErrorKind::Resolution, format!("no topology named `{name}`")))
}

fn site<'a>(r: &'a Resolved, name: Option<&str>) -> Res<&'a ExistentialSite> {
    match name {
        Some(n) => {
            r.sites.get(n).ok_or_else(|| CommandError::new(ErrorKind::Resolution, format!("no site named `{n}`")))
        }
        None if r.sites.len() == 1 => Ok(r.sites.values().next().unwrap()),
        None => Err(usage(format!("the bundle declares {} sites; name one with --site", r.sites.len()))),
    }
}

fn base_topology(r: &Resolved, s: &ExistentialSite, name: Option<&str>) -> Res<GrothendieckTopology> {
    match name {
        None => Ok(GrothendieckTopology::trivial(s.base().clone())),
        Some(n) => {
            let t = &topology(r, n)?.topology;
            if t.base() != s.base() {
                return Err(CommandError::new(
                    ErrorKind::Input,
                    format!("`{n}` is not a topology on the base of `{}`", s.name),
                ));
            }
            Ok(t.clone())
        }
    }
}

/// Runs a command on bundle text (ignored by `corpus`).
pub fn run(cmd: &Command, text: &str, guards: &Guards) -> Outcome {
    match dispatch(cmd, text, guards) {
        Ok(o) => o,
        Err(e) => Outcome::failed(e),
    }
}

fn outcome(report: VerificationReport) -> Outcome {
    Outcome { report, ..Outcome::default() }
}

fn dispatch(cmd: &Command, text: &str, g: &Guards) -> Res<Outcome> {
    if let Command::Corpus { seed, count, property } = cmd {
        return corpus(*seed, *count, *property, g);
    }
    let (bundle, r) = load(text, g)?;
    match cmd {
        Command::Validate(_) => validate(&bundle, &r, g),
        Command::Giraud { indexed, topology: j, .. } => {
            let d = r.indexed.get(indexed).ok_or_else(|| {
                CommandError::new(ErrorKind::Resolution, format!("no indexed category named `{indexed}`"))
            })?;
            let j = &topology(&r, j)?.topology;
            if j.base() != &d.indexed.base {
                return Err(CommandError::new(
                    ErrorKind::Input,
                    format!("`{}` is not a topology on the base of `{indexed}`", j.name()),
                ));
            }
            let t = giraud_topology(&d.total, j, g)?;
            let mut o = outcome(validate_topology(&t, g));
            let name = format!("giraud-{indexed}");
            o.result = Some(crate::bundle::print_site_bundle(&SiteBundle {
                sections: vec![topology_section(&name, &["total", indexed], &t, g)?],
            }));
            Ok(o)
        }
        Command::ExistentialTopology { site: name, .. } => {
            let s = site(&r, Some(name))?;
            let (t, mut rep) = existential_topology(s, g)?;
            rep.extend(validate_topology(&t, g));
            let mut o = outcome(rep);
            let on = ["total", s.indexed().name.as_str()];
            let sec = topology_section(&format!("existential-{name}"), &on, &t, g)?;
            o.result = Some(crate::bundle::print_site_bundle(&SiteBundle { sections: vec![sec] }));
            Ok(o)
        }
        Command::Check { property, site: name, topology: j, .. } => {
            let s = site(&r, name.as_deref())?;
            let j = base_topology(&r, s, j.as_deref())?;
            check(s, &j, property, g).map(outcome)
        }
        Command::IdealCompletion { topology: k, expect_isomorphism, .. } => {
            let k = &topology(&r, k)?.topology;
            let fi = ideal_completion(k, g)?;
            let mut rep = ideal_completion_report(&fi, k, g)?;
            let p = &**k.base();
            if *expect_isomorphism {
                const CITE: &str = "the canonical map into the frame of ideals is an isomorphism";
                rep.push(if fi.canonical_is_isomorphism(p) {
                    Check::pass("canonical-isomorphism", CITE)
                } else {
                    let w = p
                        .objects()
                        .map(|x| format!("{}↦{}", p.object_name(x), fi.frame.element(fi.canonical[x])))
                        .collect::<Vec<_>>();
                    Check::fail("canonical-isomorphism", CITE, Witness::new().with("canonical", w.join(",")))
                });
            }
            if fi.generator_mode {
                if let Some(c) = rep.checks.iter_mut().find(|c| c.name == "frame") {
                    c.note = Some("the preorder exceeds the `ideals` guard; ideals were saturated from closures of principal down-sets".into());
                }
            }
            let mut o = outcome(rep);
            let name = format!("Id-{}", k.name());
            o.result =
                Some(crate::bundle::print_site_bundle(&SiteBundle { sections: vec![frame_section(&name, &fi.frame)] }));
            Ok(o)
        }
        Command::FibredCompletion { topology: k, base_topology: j, expect_isomorphism, .. } => {
            let kt = topology(&r, k)?;
            let s = match &kt.total {
                Some(total) => {
                    let j = match j {
                        Some(n) => topology(&r, n)?.topology.clone(),
                        None => GrothendieckTopology::trivial(total.base().clone()),
                    };
                    FibredPreorderSite::new(total.clone(), kt.topology.clone(), j)?
                }
                None if j.is_some() => return Err(usage("--base-topology needs a topology on a total category")),
                None => FibredPreorderSite::over_one(&kt.topology, g)?,
            };
            let fc = fibred_ideal_completion(&s, g)?;
            let mut rep = fibred_completion_report(&s, &fc, g)?;
            if *expect_isomorphism {
                const CITE: &str = "the unit η is an isomorphism of indexed frames";
                rep.push(match fc.unit_isomorphism(&s) {
                    Ok(()) => Check::pass("unit-isomorphism", CITE).with_note(fc.show_unit(&s)),
                    Err(w) => Check::fail("unit-isomorphism", CITE, w),
                });
            }
            let mut o = outcome(rep);
            o.result = Some(crate::bundle::print_site_bundle(&locale_bundle(&fc.locale)));
            Ok(o)
        }
        Command::FibreSite { site: name, object, .. } => {
            let s = site(&r, name.as_deref())?;
            let c: ObjId = s.base().obj(object).ok_or_else(|| {
                CommandError::new(
                    ErrorKind::Resolution,
                    format!("`{object}` is not an object of `{}`", s.base().name()),
                )
            })?;
            let fs = fibre_site(s, c, g)?;
            Ok(outcome(fibre_site_report(s, &fs, g)?))
        }
        Command::Factorize { functor, source_topology, target_topology, .. } => {
            let a = r
                .functors
                .get(functor)
                .ok_or_else(|| CommandError::new(ErrorKind::Resolution, format!("no functor named `{functor}`")))?;
            let j = &topology(&r, source_topology)?.topology;
            let k = &topology(&r, target_topology)?.topology;
            let l = closed_sieve_locale(a, j, k, g)?;
            let mut o = outcome(factorization_report(&l, g)?);
            o.result = Some(crate::bundle::print_site_bundle(&locale_bundle(&l.locale)));
            Ok(o)
        }
        Command::Corpus { .. } => unreachable!("handled above"),
    }
}

fn validate(bundle: &SiteBundle, r: &Resolved, g: &Guards) -> Res<Outcome> {
    let mut rep = VerificationReport::new();
    for s in &bundle.sections {
        let part = match s.kind {
            SectionKind::Category | SectionKind::Preorder => validate_category(&r.categories[&s.name]),
            SectionKind::Frame => {
                let c = &r.categories[&s.name];
                let names: Vec<String> = c.objects().map(|x| c.object_name(x).to_string()).collect();
                let leq =
                    c.objects().flat_map(|x| c.objects().map(move |y| (x, y))).map(|(x, y)| c.leq(x, y)).collect();
                match relsite_core::frame::FiniteFrame::from_order(&s.name, names, leq) {
                    Ok(f) => validate_frame(&f),
                    Err(e) => {
                        let mut v = VerificationReport::new();
                        v.push(Check::fail(
                            "partial-order",
                            "the order is antisymmetric",
                            Witness::new().with("error", e.to_string()),
                        ));
                        v
                    }
                }
            }
            SectionKind::Topology => validate_topology(&r.topologies[&s.name].topology, g),
            SectionKind::Functor => r.functors[&s.name].check(),
            SectionKind::Indexed => validate_indexed(&r.indexed[&s.name].indexed),
            SectionKind::Site => fibred_site_report(&r.sites[&s.name], g)?,
        };
        rep.extend(part.scoped(&s.name));
    }
    Ok(outcome(rep))
}

/// The fibres read as frames, the transitions as maps and the site's `∃`
/// as the existential tables.
pub fn site_locale(s: &ExistentialSite, j: &GrothendieckTopology) -> relsite_core::Result<InternalLocaleCandidate> {
    let d = s.indexed();
    let mut l = InternalLocaleCandidate::from_indexed(&s.name, d, j.clone())?;
    let b = &**s.base();
    let idx = |c: ObjId, x: ObjId| l.frames[c].index(d.fibres[c].object_name(x)).expect("frame of the fibre");
    let exists =
        b.arrows().map(|f| d.fibres[b.src(f)].objects().map(|x| idx(b.tgt(f), s.exists(f).obj(x))).collect()).collect();
    l.exists = Some(exists);
    Ok(l)
}

/// Report families searched by `check --property`.
pub const FAMILIES: [&str; 7] = [
    "fibred-site",
    "relative-bc",
    "relative-frobenius",
    "existential",
    "site-predicates",
    "coorthogonal",
    "internal-locale",
];

fn family(
    name: &str,
    s: &ExistentialSite,
    j: &GrothendieckTopology,
    g: &Guards,
) -> relsite_core::Result<VerificationReport> {
    Ok(match name {
        "fibred-site" => fibred_site_report(s, g)?,
        "relative-bc" => check_relative_bc(s, g),
        "relative-frobenius" => check_relative_frobenius(s, g),
        "existential" => existential_topology(s, g)?.1,
        "site-predicates" => existential_site_report(s, j, g)?,
        "coorthogonal" => {
            let (t, _) = existential_topology(s, g)?;
            check_coorthogonal_generation(s, &t, g)?
        }
        _ => internal_locale_report(&site_locale(s, j)?, g)?.scoped("internal-locale"),
    })
}

/// Every check named `property`, or scoped under `property/`. Failing that,
/// a family name selects the whole family.
pub fn check(s: &ExistentialSite, j: &GrothendieckTopology, property: &str, g: &Guards) -> Res<VerificationReport> {
    let mut out = VerificationReport::new();
    let mut known: Vec<String> = Vec::new();
    let mut first_error = None;
    let prefix = format!("{property}/");
    for f in FAMILIES {
        match family(f, s, j, g) {
            Ok(rep) => {
                for c in rep.checks {
                    if c.name == property || c.name.starts_with(&prefix) {
                        if out.get(&c.name).is_none() {
                            out.push(c);
                        }
                    } else {
                        known.push(c.name);
                    }
                }
            }
            Err(e) => {
                first_error.get_or_insert(e);
            }
        }
    }
    if !out.checks.is_empty() {
        return Ok(out);
    }
    if FAMILIES.contains(&property) {
        return Ok(family(property, s, j, g)?);
    }
    if let Some(e) = first_error {
        return Err(e.into());
    }
    known.sort();
    known.dedup();
    Err(usage(format!("unknown property `{property}`; known: {}; families: {}", known.join(", "), FAMILIES.join(", "))))
}

/// Applies `f` to every item on scoped worker threads. Results come back in
/// input order, and the first error in that order wins, so the outcome does
/// not depend on scheduling.
fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> Res<R> + Sync) -> Res<Vec<R>> {
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).clamp(1, items.len().max(1));
    let chunk = items.len().div_ceil(workers).max(1);
    let f = &f;
    std::thread::scope(|scope| {
        let handles: Vec<_> =
            items.chunks(chunk).map(|c| scope.spawn(move || c.iter().map(f).collect::<Vec<_>>())).collect();
        handles.into_iter().flat_map(|h| h.join().expect("corpus worker panicked")).collect()
    })
}

fn corpus(seed: u64, count: usize, property: CorpusProperty, g: &Guards) -> Res<Outcome> {
    let agree = |valid: bool, conds: bool| if valid == conds { Status::Pass } else { Status::Discrepancy };
    let checks = match property {
        CorpusProperty::ExistentialBiconditional => {
            const CITE: &str = "the existential predicate is a topology iff relative BC and relative Frobenius hold";
            par_map(&random_sites(seed, count, g)?, |r| {
                let (ext, inner) = existential_topology(&r.site, g)?;
                let valid = validate_topology(&ext, g).passed();
                let conds = check_relative_bc(&r.site, g).passes("relative-bc")
                    && check_relative_frobenius(&r.site, g).passes("relative-frobenius");
                let mut st = agree(valid, conds);
                if inner.status("existential-biconditional").is_some_and(Status::is_failure) {
                    st = Status::Discrepancy;
                }
                let note = if valid { "topology; both conditions hold" } else { "not a topology; a condition fails" };
                Ok(Check::new(&r.label, CITE, st).with_note(note))
            })?
        }
        CorpusProperty::BcFrobeniusEquivalence => {
            const CITE: &str = "on a cartesian base, Beck–Chevalley and Frobenius hold iff their relative forms hold";
            par_map(&cartesian_candidates(seed, count, g)?, |l| {
                let r = internal_locale_report(l, g)?;
                if !r.passes("left-adjoints") {
                    return Ok(Check::pass(&l.name, CITE).with_note("∃ is not a left adjoint; both sides reject"));
                }
                let absolute = r.passes("beck-chevalley") && r.passes("frobenius");
                let relative = r.passes("relative-bc") && r.passes("relative-frobenius");
                let st = if r.status("bc-frobenius-equivalence").is_some_and(Status::is_failure) {
                    Status::Discrepancy
                } else {
                    agree(absolute, relative)
                };
                Ok(Check::new(&l.name, CITE, st).with_note(if absolute { "both hold" } else { "both fail" }))
            })?
        }
        CorpusProperty::FibreSite => {
            const CITE: &str = "the fibre site at every base object passes its checks";
            par_map(&existential_sites(seed, count, g)?, |r| {
                let mut failing = Vec::new();
                for c in r.site.base().objects() {
                    let fs = fibre_site(&r.site, c, g)?;
                    let sub = fibre_site_report(&r.site, &fs, g)?;
                    failing
                        .extend(sub.failing().into_iter().map(|n| format!("{}@{}", n, r.site.base().object_name(c))));
                }
                Ok(if failing.is_empty() {
                    Check::pass(&r.label, CITE)
                } else {
                    Check::new(&r.label, CITE, Status::Discrepancy)
                        .with_witness(Witness::new().with("failing", failing.join(",")))
                })
            })?
        }
        CorpusProperty::CoorthogonalGeneration => {
            const CITE: &str = "vertical and cocartesian families generate the existential topology";
            par_map(&existential_sites(seed, count, g)?, |r| {
                let (ext, _) = existential_topology(&r.site, g)?;
                let sub = check_coorthogonal_generation(&r.site, &ext, g)?;
                Ok(if sub.passed() {
                    Check::pass(&r.label, CITE)
                } else {
                    Check::new(&r.label, CITE, Status::Discrepancy)
                        .with_witness(Witness::new().with("failing", sub.failing().join(",")))
                })
            })?
        }
        CorpusProperty::IdealCompletionMatch => {
            const CITE: &str = "over ONE the fibred completion is the frame of ideals of the fibre";
            par_map(&preorder_coverages(seed, count, g)?, |k| {
                let s = FibredPreorderSite::over_one(k, g)?;
                let fc = fibred_ideal_completion(&s, g)?;
                let sub = fibred_completion_report(&s, &fc, g)?;
                let name = k.base().name().to_string();
                Ok(match sub.get("ideal-completion-match").cloned() {
                    Some(m) if m.status == Status::Pass && sub.passed() => {
                        let mut c = Check::pass(&name, CITE);
                        c.note = m.note;
                        c
                    }
                    _ => Check::new(&name, CITE, Status::Discrepancy)
                        .with_witness(Witness::new().with("failing", sub.failing().join(","))),
                })
            })?
        }
        CorpusProperty::SiteImplications => {
            const CITE: &str =
                "reflecting linearization with prestack implies J-reflecting, which implies Giraud containment";
            par_map(&random_sites(seed, count, g)?, |r| {
                let sub = existential_site_report(&r.site, &r.base_topology, g)?;
                let mut bad: Vec<&str> = ["linearization-implies-reflecting", "reflecting-implies-giraud"]
                    .into_iter()
                    .filter(|n| sub.status(n).is_some_and(Status::is_failure))
                    .collect();
                let existential = check_relative_bc(&r.site, g).passes("relative-bc")
                    && check_relative_frobenius(&r.site, g).passes("relative-frobenius");
                if existential && sub.passes("j-reflecting") && !sub.passes("giraud-contained") {
                    bad.push("giraud-contained");
                }
                Ok(if bad.is_empty() {
                    Check::pass(&r.label, CITE)
                } else {
                    Check::new(&r.label, CITE, Status::Discrepancy)
                        .with_witness(Witness::new().with("violated", bad.join(",")))
                })
            })?
        }
    };
    let mut report = VerificationReport::new();
    for c in checks {
        report.push(c);
    }
    Ok(Outcome { report, seed: Some(seed), ..Outcome::default() })
}

/// Reads the bundle argument of a command, if it has one.
pub fn bundle_path(cmd: &Command) -> Option<&str> {
    match cmd {
        Command::Validate(b) => Some(&b.bundle),
        Command::Giraud { input, .. }
        | Command::ExistentialTopology { input, .. }
        | Command::Check { input, .. }
        | Command::IdealCompletion { input, .. }
        | Command::FibredCompletion { input, .. }
        | Command::FibreSite { input, .. }
        | Command::Factorize { input, .. } => Some(&input.bundle),
        Command::Corpus { .. } => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn par_map_keeps_input_order() {
        let items: Vec<u32> = (0..97).collect();
        let out = par_map(&items, |&x| Ok(x * x)).unwrap();
        assert_eq!(out, items.iter().map(|x| x * x).collect::<Vec<_>>());
        assert!(par_map(&[] as &[u32], |&x| Ok(x)).unwrap().is_empty());
    }

    #[test]
    fn par_map_reports_the_earliest_error() {
        let items: Vec<u32> = (0..64).collect();
        let e = par_map(&items, |&x| if x % 20 == 19 { Err(usage(format!("bad {x}"))) } else { Ok(x) }).unwrap_err();
        assert_eq!(e.message, "bad 19");
    }
}
