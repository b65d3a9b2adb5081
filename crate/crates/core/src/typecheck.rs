//! The authorization type system.
//!
//! A judgment `Δ ⊢_ρ P` says `P` uses channels as prescribed by `Δ` and can
//! only be placed in contexts providing the authorization multiset `ρ`. The
//! set of acceptable `ρ` for a fixed `Δ, P` is upward closed, so it has a
//! finite antichain of minimal elements; [`demands`] computes that antichain
//! bottom-up. [`oracle_typable`] is an independent exhaustive search over the
//! typing rules, used to validate the inference.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::ast::{
    all_names, fresh_name, substitute, symbols, well_formed, Name, NameMultiset, Process, Symbol,
    SymbolTag, WellFormedViolation,
};
use crate::parser::SourceFile;

/// Element of a replacement set: a name or a restriction symbol.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OmegaElem {
    Name(Name),
    Sym(Symbol),
}

impl fmt::Display for OmegaElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OmegaElem::Name(n) => write!(f, "{n}"),
            OmegaElem::Sym(s) => write!(f, "{s}"),
        }
    }
}

/// The `ω` of a type `ω(T)`: a finite set of names and symbols, or the
/// distinguished `ν` for names never subject to contextual authorization.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OmegaSet {
    Set(BTreeSet<OmegaElem>),
    Nu,
}

impl OmegaSet {
    pub fn names<I, N>(names: I) -> OmegaSet
    where
        I: IntoIterator<Item = N>,
        N: Into<Name>,
    {
        OmegaSet::Set(names.into_iter().map(|n| OmegaElem::Name(n.into())).collect())
    }

    /// `ω ⊆ ω'` — set inclusion; `ν ⊆ ν`; a set and `ν` are incomparable.
    pub fn included_in(&self, other: &OmegaSet) -> bool {
        match (self, other) {
            (OmegaSet::Nu, OmegaSet::Nu) => true,
            (OmegaSet::Set(a), OmegaSet::Set(b)) => a.is_subset(b),
            _ => false,
        }
    }

    /// The reading of `ω ⊆ ρ`: only a symbol-free name set embeds into a
    /// multiset of names (each member at multiplicity one).
    pub fn as_name_multiset(&self) -> Option<NameMultiset> {
        match self {
            OmegaSet::Nu => None,
            OmegaSet::Set(elems) => {
                let mut m = NameMultiset::empty();
                for e in elems {
                    match e {
                        OmegaElem::Name(n) => m.add(n.clone(), 1),
                        OmegaElem::Sym(_) => return None,
                    }
                }
                Some(m)
            }
        }
    }
}

/// Types: `T ::= ω(T) | ∅`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AuthType {
    /// `∅` — a name that cannot be used for communication.
    Ground,
    /// `ω(T)` — replacements `ω`, carried type `T`.
    Chan(OmegaSet, Box<AuthType>),
}

impl AuthType {
    pub fn chan(omega: OmegaSet, carried: AuthType) -> AuthType {
        AuthType::Chan(omega, Box::new(carried))
    }

    pub fn names(&self) -> BTreeSet<Name> {
        let mut acc = BTreeSet::new();
        self.collect_names(&mut acc);
        acc
    }

    fn collect_names(&self, acc: &mut BTreeSet<Name>) {
        if let AuthType::Chan(omega, carried) = self {
            if let OmegaSet::Set(elems) = omega {
                for e in elems {
                    if let OmegaElem::Name(n) = e {
                        acc.insert(n.clone());
                    }
                }
            }
            carried.collect_names(acc);
        }
    }

    /// Replace symbol `sym` by name `to` throughout.
    pub fn subst_symbol(&self, sym: &Symbol, to: &Name) -> AuthType {
        match self {
            AuthType::Ground => AuthType::Ground,
            AuthType::Chan(omega, carried) => {
                let omega = match omega {
                    OmegaSet::Nu => OmegaSet::Nu,
                    OmegaSet::Set(elems) => OmegaSet::Set(
                        elems
                            .iter()
                            .map(|e| match e {
                                OmegaElem::Sym(s) if s == sym => OmegaElem::Name(to.clone()),
                                other => other.clone(),
                            })
                            .collect(),
                    ),
                };
                AuthType::Chan(omega, Box::new(carried.subst_symbol(sym, to)))
            }
        }
    }
}

/// Typing environment `Δ`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TypeEnv(BTreeMap<Name, AuthType>);

impl TypeEnv {
    pub fn new() -> TypeEnv {
        TypeEnv::default()
    }

    pub fn from_pairs<I, N>(entries: I) -> TypeEnv
    where
        I: IntoIterator<Item = (N, AuthType)>,
        N: Into<Name>,
    {
        TypeEnv(entries.into_iter().map(|(n, t)| (n.into(), t)).collect())
    }

    pub fn get(&self, n: &Name) -> Option<&AuthType> {
        self.0.get(n)
    }

    pub fn insert(&self, n: Name, t: AuthType) -> TypeEnv {
        let mut m = self.0.clone();
        m.insert(n, t);
        TypeEnv(m)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Name, &AuthType)> {
        self.0.iter()
    }

    /// Names occurring in the environment: domain names plus every name in a
    /// type.
    pub fn names(&self) -> BTreeSet<Name> {
        let mut acc: BTreeSet<Name> = self.0.keys().cloned().collect();
        for t in self.0.values() {
            acc.extend(t.names());
        }
        acc
    }

    pub fn subst_symbol(&self, sym: &Symbol, to: &Name) -> TypeEnv {
        TypeEnv(
            self.0
                .iter()
                .map(|(n, t)| (n.clone(), t.subst_symbol(sym, to)))
                .collect(),
        )
    }
}

/// The minimal acceptable demand multisets of a judgment, pairwise
/// `⊆`-incomparable. `ρ` is acceptable iff some minimal element is `⊆ ρ`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DemandAntichain {
    minimal: BTreeSet<NameMultiset>,
}

impl DemandAntichain {
    pub fn empty() -> DemandAntichain {
        DemandAntichain::default()
    }

    /// The antichain `{∅}`: every context is acceptable.
    pub fn trivial() -> DemandAntichain {
        let mut a = DemandAntichain::default();
        a.insert(NameMultiset::empty());
        a
    }

    pub fn insert(&mut self, m: NameMultiset) {
        if self.minimal.iter().any(|e| e.is_subset(&m)) {
            return;
        }
        self.minimal.retain(|e| !m.is_subset(e));
        self.minimal.insert(m);
    }

    pub fn iter(&self) -> impl Iterator<Item = &NameMultiset> {
        self.minimal.iter()
    }

    pub fn len(&self) -> usize {
        self.minimal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.minimal.is_empty()
    }

    pub fn accepts(&self, rho: &NameMultiset) -> bool {
        self.minimal.iter().any(|m| m.is_subset(rho))
    }

    pub fn accepts_empty(&self) -> bool {
        self.minimal.contains(&NameMultiset::empty())
    }

    /// Pairwise `⊎`, minimized — the (t-par) composition.
    pub fn sum(&self, other: &DemandAntichain) -> DemandAntichain {
        let mut out = DemandAntichain::empty();
        for a in &self.minimal {
            for b in &other.minimal {
                out.insert(a.sum(b));
            }
        }
        out
    }

    fn map(&self, f: impl Fn(&NameMultiset) -> NameMultiset) -> DemandAntichain {
        let mut out = DemandAntichain::empty();
        for m in &self.minimal {
            out.insert(f(m));
        }
        out
    }
}

impl fmt::Display for DemandAntichain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, m) in self.minimal.iter().enumerate() {
            if i > 0 {
                write!(f, " | ")?;
            }
            write!(f, "{m}")?;
        }
        if self.minimal.is_empty() {
            write!(f, "(none)")?;
        }
        Ok(())
    }
}

/// Structured reasons a process fails the typing analysis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Untypable {
    NotWellFormed(WellFormedViolation),
    MissingAssumption { name: Name },
    /// Subject of a prefix typed `∅`.
    NotAChannel { name: Name },
    /// Output subject whose carried type is `∅`: nothing may be passed on it.
    SubjectCarriesNothing { subject: Name },
    /// Output object typed `∅` where a channel type is required.
    ObjectNotAChannel { object: Name },
    /// Carried types of subject and object disagree.
    CarriedTypeMismatch { subject: Name, object: Name },
    /// `ω'' ⊄ ω'`: a replacement of the object is not safe on the subject.
    ReplacementsNotCarried { subject: Name, object: Name },
    SymbolUnderReplication { symbol: Symbol },
    DuplicateSymbol { symbol: Symbol },
    UntaggedRestriction { binder: Name },
    MissingAnnotation { binder: Name },
    BinderMentionedInAnnotation { binder: Name },
    /// Every acceptable demand mentions the input binder, whose replacements
    /// are `ν`: a contextual authorization is expected for a ν-name.
    NuContextualExpected { binder: Name },
    /// Every acceptable demand mentions the input binder and its replacement
    /// set admits no contextual authorization (symbols present, or direct
    /// delegation of the binder's authorization).
    BinderDemandUnmet { binder: Name },
    /// Every acceptable demand mentions the restricted name.
    RestrictedDemandUnmet { binder: Name },
    /// The replicated-input body demands more than one use of the subject.
    ReplicatedInputDemand { subject: Name, demands: DemandAntichain },
    IllFormedAssumption { name: Name },
}

impl fmt::Display for Untypable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Untypable::NotWellFormed(v) => write!(f, "not well-formed: {v}"),
            Untypable::MissingAssumption { name } => {
                write!(f, "no typing assumption for {name}")
            }
            Untypable::NotAChannel { name } => {
                write!(f, "{name} is typed 0 and cannot be used for communication")
            }
            Untypable::SubjectCarriesNothing { subject } => {
                write!(f, "carried type of {subject} is 0; nothing can be sent on it")
            }
            Untypable::ObjectNotAChannel { object } => {
                write!(f, "object {object} is typed 0 where a channel type is required")
            }
            Untypable::CarriedTypeMismatch { subject, object } => {
                write!(f, "carried type of {object} does not match what {subject} carries")
            }
            Untypable::ReplacementsNotCarried { subject, object } => {
                write!(
                    f,
                    "replacements of {object} are not all safe to communicate along {subject}"
                )
            }
            Untypable::SymbolUnderReplication { symbol } => {
                write!(f, "symbol {symbol} occurs under a replicated input")
            }
            Untypable::DuplicateSymbol { symbol } => write!(f, "duplicate symbol {symbol}"),
            Untypable::UntaggedRestriction { binder } => {
                write!(f, "restriction of {binder} carries no symbol tag")
            }
            Untypable::MissingAnnotation { binder } => {
                write!(f, "restriction of {binder} carries no type annotation")
            }
            Untypable::BinderMentionedInAnnotation { binder } => {
                write!(f, "annotation of {binder} mentions the binder itself")
            }
            Untypable::NuContextualExpected { binder } => {
                write!(f, "contextual authorization expected for ν-name {binder}")
            }
            Untypable::BinderDemandUnmet { binder } => {
                write!(
                    f,
                    "every derivation demands an authorization on bound name {binder}, which no context can provide"
                )
            }
            Untypable::RestrictedDemandUnmet { binder } => {
                write!(
                    f,
                    "every derivation demands an authorization on restricted name {binder}"
                )
            }
            Untypable::ReplicatedInputDemand { subject, demands } => {
                write!(
                    f,
                    "replicated input on {subject}: body demands {demands}, more than one use of {subject}"
                )
            }
            Untypable::IllFormedAssumption { name } => {
                write!(f, "assumption for {name} is not of the form {name}:{{{name}}}(T) or {name}:~(T)")
            }
        }
    }
}

fn subject_type<'e>(env: &'e TypeEnv, a: &Name) -> Result<(&'e OmegaSet, &'e AuthType), Untypable> {
    match env.get(a) {
        None => Err(Untypable::MissingAssumption { name: a.clone() }),
        Some(AuthType::Ground) => Err(Untypable::NotAChannel { name: a.clone() }),
        Some(AuthType::Chan(omega, carried)) => Ok((omega, carried)),
    }
}

/// Apply the subject condition `a ∉ ρ ⇒ ω ⊆ ρ` to an antichain: each minimal
/// element grows to cover one of the two disjuncts.
fn subject_condition(ante: &DemandAntichain, subject: &Name, omega: &OmegaSet) -> DemandAntichain {
    let direct = NameMultiset::singleton(subject.clone());
    let contextual = omega.as_name_multiset();
    let mut out = DemandAntichain::empty();
    for m in ante.iter() {
        out.insert(m.join(&direct));
        if let Some(ms) = &contextual {
            out.insert(m.join(ms));
        }
    }
    out
}

fn freshen_binder(binder: &Name, cont: &Process, env: &TypeEnv) -> (Name, Process) {
    let env_names = env.names();
    if !env_names.contains(binder) {
        return (binder.clone(), cont.clone());
    }
    let mut avoid = env_names;
    avoid.extend(all_names(cont));
    let fresh = fresh_name(binder, &avoid);
    let renamed = substitute(cont, &fresh, binder);
    (fresh, renamed)
}

/// Infer the antichain of minimal acceptable demands for `Δ ⊢_ρ p`.
///
/// Requires `p` well-formed and every restriction tagged and annotated; the
/// returned antichain is never empty (an empty one is reported as a
/// structured [`Untypable`] reason instead).
pub fn demands(env: &TypeEnv, p: &Process) -> Result<DemandAntichain, Untypable> {
    if let Err(v) = well_formed(p) {
        return Err(Untypable::NotWellFormed(v));
    }
    demands_rec(env, p)
}

fn demands_rec(env: &TypeEnv, p: &Process) -> Result<DemandAntichain, Untypable> {
    match p {
        Process::Nil => Ok(DemandAntichain::trivial()),

        Process::Par(l, r) => {
            let sl = symbols(l);
            let sr = symbols(r);
            if let Some(s) = sl.intersection(&sr).next() {
                return Err(Untypable::DuplicateSymbol { symbol: s.clone() });
            }
            let al = demands_rec(env, l)?;
            let ar = demands_rec(env, r)?;
            Ok(al.sum(&ar))
        }

        Process::Auth(a, body) => {
            let ab = demands_rec(env, body)?;
            Ok(ab.map(|m| m.remove_one(a)))
        }

        Process::Out {
            subject,
            object,
            cont,
        } => {
            let (omega, carried) = subject_type(env, subject)?;
            let (omega_carried, t) = match carried {
                AuthType::Ground => {
                    return Err(Untypable::SubjectCarriesNothing {
                        subject: subject.clone(),
                    })
                }
                AuthType::Chan(o, t) => (o, t.as_ref()),
            };
            match env.get(object) {
                None => {
                    return Err(Untypable::MissingAssumption {
                        name: object.clone(),
                    })
                }
                Some(AuthType::Ground) => {
                    return Err(Untypable::ObjectNotAChannel {
                        object: object.clone(),
                    })
                }
                Some(AuthType::Chan(omega_obj, t_obj)) => {
                    if t_obj.as_ref() != t {
                        return Err(Untypable::CarriedTypeMismatch {
                            subject: subject.clone(),
                            object: object.clone(),
                        });
                    }
                    if !omega_obj.included_in(omega_carried) {
                        return Err(Untypable::ReplacementsNotCarried {
                            subject: subject.clone(),
                            object: object.clone(),
                        });
                    }
                }
            }
            let ac = demands_rec(env, cont)?;
            Ok(subject_condition(&ac, subject, omega))
        }

        Process::In {
            subject,
            binder,
            cont,
        } => {
            let (omega, carried) = subject_type(env, subject)?;
            let omega = omega.clone();
            let carried = carried.clone();
            let (x, cont) = freshen_binder(binder, cont, env);
            let inner_env = env.insert(x.clone(), carried.clone());
            let ac = demands_rec(&inner_env, &cont)?;
            let mut filtered = DemandAntichain::empty();
            for m in ac.iter() {
                if !m.contains(&x) {
                    filtered.insert(m.clone());
                }
            }
            if filtered.is_empty() {
                return Err(match &carried {
                    AuthType::Chan(OmegaSet::Nu, _) => Untypable::NuContextualExpected {
                        binder: binder.clone(),
                    },
                    _ => Untypable::BinderDemandUnmet {
                        binder: binder.clone(),
                    },
                });
            }
            Ok(subject_condition(&filtered, subject, &omega))
        }

        Process::RepIn {
            subject,
            binder,
            cont,
        } => {
            if let Some(s) = symbols(cont).iter().next() {
                return Err(Untypable::SymbolUnderReplication { symbol: s.clone() });
            }
            let (_, carried) = subject_type(env, subject)?;
            let carried = carried.clone();
            let (x, cont) = freshen_binder(binder, cont, env);
            let inner_env = env.insert(x, carried);
            let ac = demands_rec(&inner_env, &cont)?;
            let budget = NameMultiset::singleton(subject.clone());
            if !ac.accepts(&budget) {
                return Err(Untypable::ReplicatedInputDemand {
                    subject: subject.clone(),
                    demands: ac,
                });
            }
            Ok(DemandAntichain::trivial())
        }

        Process::DelegOut {
            subject,
            object,
            cont,
        } => {
            let (omega, _) = subject_type(env, subject)?;
            let ac = demands_rec(env, cont)?;
            let conditioned = subject_condition(&ac, subject, omega);
            Ok(conditioned.map(|m| m.sum(&NameMultiset::singleton(object.clone()))))
        }

        Process::DelegIn {
            subject,
            object,
            cont,
        } => {
            let (omega, _) = subject_type(env, subject)?;
            let ac = demands_rec(env, cont)?;
            let received = ac.map(|m| m.remove_one(object));
            Ok(subject_condition(&received, subject, omega))
        }

        Process::Res {
            binder,
            tag,
            ann,
            body,
        } => {
            let tag = tag.as_ref().ok_or(Untypable::UntaggedRestriction {
                binder: binder.clone(),
            })?;
            let ann = ann.as_ref().ok_or(Untypable::MissingAnnotation {
                binder: binder.clone(),
            })?;
            if ann.names().contains(binder) {
                return Err(Untypable::BinderMentionedInAnnotation {
                    binder: binder.clone(),
                });
            }
            let (a, body) = freshen_binder(binder, body, env);
            match tag {
                SymbolTag::Sym(r) => {
                    if symbols(&body).contains(r) {
                        return Err(Untypable::DuplicateSymbol { symbol: r.clone() });
                    }
                    let inner_env = env.subst_symbol(r, &a).insert(
                        a.clone(),
                        AuthType::chan(OmegaSet::names([a.clone()]), ann.clone()),
                    );
                    let ab = demands_rec(&inner_env, &body)?;
                    drop_binder_demands(ab, &a, binder)
                }
                SymbolTag::Nu => {
                    let inner_env = env.insert(a.clone(), AuthType::chan(OmegaSet::Nu, ann.clone()));
                    let ab = demands_rec(&inner_env, &body)?;
                    drop_binder_demands(ab, &a, binder)
                }
            }
        }
    }
}

fn drop_binder_demands(
    ante: DemandAntichain,
    bound: &Name,
    original: &Name,
) -> Result<DemandAntichain, Untypable> {
    let mut out = DemandAntichain::empty();
    for m in ante.iter() {
        if !m.contains(bound) {
            out.insert(m.clone());
        }
    }
    if out.is_empty() {
        return Err(Untypable::RestrictedDemandUnmet {
            binder: original.clone(),
        });
    }
    Ok(out)
}

/// Verdict of checking a source file for well-typedness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CheckVerdict {
    WellTyped,
    /// Typable, but only in contexts providing one of these demands.
    NotClosed(DemandAntichain),
    Untypable(Untypable),
}

impl fmt::Display for CheckVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CheckVerdict::WellTyped => write!(f, "well-typed"),
            CheckVerdict::NotClosed(a) => write!(f, "not closed, minimal demands {a}"),
            CheckVerdict::Untypable(u) => write!(f, "untypable: {u}"),
        }
    }
}

/// Check a file: validate assumption shapes (`a:{a}(T)` or `a:~(T)`), infer
/// demands, and report well-typedness (`∅` acceptable).
pub fn check(file: &SourceFile) -> CheckVerdict {
    for (name, t) in &file.assumptions {
        let ok = match t {
            AuthType::Chan(OmegaSet::Nu, _) => true,
            AuthType::Chan(OmegaSet::Set(elems), _) => {
                elems.len() == 1 && elems.contains(&OmegaElem::Name(name.clone()))
            }
            AuthType::Ground => false,
        };
        if !ok {
            return CheckVerdict::Untypable(Untypable::IllFormedAssumption { name: name.clone() });
        }
    }
    let env = TypeEnv::from_pairs(file.assumptions.iter().cloned());
    match demands(&env, &file.process) {
        Err(u) => CheckVerdict::Untypable(u),
        Ok(a) => {
            if a.accepts_empty() {
                CheckVerdict::WellTyped
            } else {
                CheckVerdict::NotClosed(a)
            }
        }
    }
}

/// All splits `rho = left ⊎ right`.
fn splits(rho: &NameMultiset) -> Vec<(NameMultiset, NameMultiset)> {
    let entries: Vec<(Name, u32)> = rho.iter().map(|(n, k)| (n.clone(), k)).collect();
    let mut out = vec![(NameMultiset::empty(), NameMultiset::empty())];
    for (n, k) in entries {
        let mut next = Vec::with_capacity(out.len() * (k as usize + 1));
        for (l, r) in &out {
            for i in 0..=k {
                let mut l2 = l.clone();
                l2.add(n.clone(), i);
                let mut r2 = r.clone();
                r2.add(n.clone(), k - i);
                next.push((l2, r2));
            }
        }
        out = next;
    }
    out
}

fn subject_ok(rho: &NameMultiset, subject: &Name, omega: &OmegaSet) -> bool {
    rho.contains(subject)
        || omega
            .as_name_multiset()
            .map_or(false, |ms| ms.is_subset(rho))
}

/// Exhaustive search over the typing rules: is `Δ ⊢_ρ p` derivable?
///
/// Independent of [`demands`]: at parallel compositions every split of `ρ`
/// is tried, and side conditions are applied literally (binders are
/// alpha-renamed where a side condition would otherwise force a spurious
/// failure). `bound` is the caller's cap on `rho` multiplicities; intended
/// for processes of desk scale.
pub fn oracle_typable(env: &TypeEnv, p: &Process, rho: &NameMultiset, bound: u32) -> bool {
    debug_assert!(rho.iter().all(|(_, k)| k <= bound + p.node_count() as u32));
    match p {
        Process::Nil => true,

        Process::Par(l, r) => {
            let sl = symbols(l);
            let sr = symbols(r);
            if sl.intersection(&sr).next().is_some() {
                return false;
            }
            splits(rho).into_iter().any(|(rl, rr)| {
                oracle_typable(env, l, &rl, bound) && oracle_typable(env, r, &rr, bound)
            })
        }

        Process::Auth(a, body) => {
            let mut bigger = rho.clone();
            bigger.add(a.clone(), 1);
            oracle_typable(env, body, &bigger, bound)
        }

        Process::Out {
            subject,
            object,
            cont,
        } => {
            let (omega, carried) = match subject_type(env, subject) {
                Ok(x) => x,
                Err(_) => return false,
            };
            let (omega_carried, t) = match carried {
                AuthType::Ground => return false,
                AuthType::Chan(o, t) => (o, t.as_ref()),
            };
            match env.get(object) {
                Some(AuthType::Chan(omega_obj, t_obj))
                    if t_obj.as_ref() == t && omega_obj.included_in(omega_carried) => {}
                _ => return false,
            }
            subject_ok(rho, subject, omega) && oracle_typable(env, cont, rho, bound)
        }

        Process::In {
            subject,
            binder,
            cont,
        } => {
            let (omega, carried) = match subject_type(env, subject) {
                Ok(x) => x,
                Err(_) => return false,
            };
            if !subject_ok(rho, subject, omega) {
                return false;
            }
            let carried = carried.clone();
            let (x, cont) = freshen_binder_oracle(binder, cont, env, rho);
            if rho.contains(&x) {
                return false;
            }
            let inner = env.insert(x, carried);
            oracle_typable(&inner, &cont, rho, bound)
        }

        Process::RepIn {
            subject,
            binder,
            cont,
        } => {
            if !symbols(cont).is_empty() {
                return false;
            }
            let (_, carried) = match subject_type(env, subject) {
                Ok(x) => x,
                Err(_) => return false,
            };
            let carried = carried.clone();
            let (x, cont) = freshen_binder_oracle(binder, cont, env, rho);
            if rho.contains(&x) {
                return false;
            }
            let inner = env.insert(x, carried);
            let premise = NameMultiset::singleton(subject.clone());
            oracle_typable(&inner, &cont, &premise, bound)
        }

        Process::DelegOut {
            subject,
            object,
            cont,
        } => {
            let (omega, _) = match subject_type(env, subject) {
                Ok(x) => x,
                Err(_) => return false,
            };
            if !rho.contains(object) {
                return false;
            }
            let premise = rho.remove_one(object);
            subject_ok(&premise, subject, omega) && oracle_typable(env, cont, &premise, bound)
        }

        Process::DelegIn {
            subject,
            object,
            cont,
        } => {
            let (omega, _) = match subject_type(env, subject) {
                Ok(x) => x,
                Err(_) => return false,
            };
            if !subject_ok(rho, subject, omega) {
                return false;
            }
            let mut premise = rho.clone();
            premise.add(object.clone(), 1);
            oracle_typable(env, cont, &premise, bound)
        }

        Process::Res {
            binder,
            tag,
            ann,
            body,
        } => {
            let (Some(tag), Some(ann)) = (tag, ann) else {
                return false;
            };
            if ann.names().contains(binder) {
                return false;
            }
            let (a, body) = freshen_binder_oracle(binder, body, env, rho);
            if rho.contains(&a) {
                return false;
            }
            match tag {
                SymbolTag::Sym(r) => {
                    if symbols(&body).contains(r) {
                        return false;
                    }
                    let inner = env.subst_symbol(r, &a).insert(
                        a.clone(),
                        AuthType::chan(OmegaSet::names([a.clone()]), ann.clone()),
                    );
                    oracle_typable(&inner, &body, rho, bound)
                }
                SymbolTag::Nu => {
                    if env.names().contains(&a) {
                        return false;
                    }
                    let inner = env.insert(a.clone(), AuthType::chan(OmegaSet::Nu, ann.clone()));
                    oracle_typable(&inner, &body, rho, bound)
                }
            }
        }
    }
}

fn freshen_binder_oracle(
    binder: &Name,
    cont: &Process,
    env: &TypeEnv,
    rho: &NameMultiset,
) -> (Name, Process) {
    let mut clashes = env.names();
    for (n, _) in rho.iter() {
        clashes.insert(n.clone());
    }
    if !clashes.contains(binder) {
        return (binder.clone(), cont.clone());
    }
    let mut avoid = clashes;
    avoid.extend(all_names(cont));
    let fresh = fresh_name(binder, &avoid);
    (fresh.clone(), substitute(cont, &fresh, binder))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::Process as P;

    fn ground() -> AuthType {
        AuthType::Ground
    }

    fn chan_names<const N: usize>(names: [&str; N], carried: AuthType) -> AuthType {
        AuthType::chan(OmegaSet::names(names), carried)
    }

    #[test]
    fn nil_demands_trivial() {
        let env = TypeEnv::new();
        let a = demands(&env, &P::Nil).unwrap();
        assert!(a.accepts_empty());
        assert_eq!(a.len(), 1);
    }

    #[test]
    fn two_prefixes_two_auths() {
        // a!b.0 | a?x.0 under a:{a}({b}(0)), b:{b}(0) demands {a:2}.
        let env = TypeEnv::from_pairs([
            ("a", chan_names(["a"], chan_names(["b"], ground()))),
            ("b", chan_names(["b"], ground())),
        ]);
        let p = P::par(
            P::out("a", "b", P::Nil),
            P::input("a", "x", P::Nil),
        );
        let d = demands(&env, &p).unwrap();
        assert!(!d.accepts_empty());
        assert!(d.accepts(&NameMultiset::from_counts([("a", 2u32)])));
        assert!(!d.accepts(&NameMultiset::singleton("a")));
    }

    #[test]
    fn auth_discharges_demand() {
        let env = TypeEnv::from_pairs([
            ("a", chan_names(["a"], chan_names(["b"], ground()))),
            ("b", chan_names(["b"], ground())),
        ]);
        let p = P::auth("a", P::out("a", "b", P::Nil));
        let d = demands(&env, &p).unwrap();
        assert!(d.accepts_empty());
    }

    #[test]
    fn deleg_of_subject_needs_two() {
        // a<a>.0: one use of a as subject plus the delegated authorization.
        let env = TypeEnv::from_pairs([("a", chan_names(["a"], ground()))]);
        let p = P::deleg_out("a", "a", P::Nil);
        let d = demands(&env, &p).unwrap();
        assert!(d.accepts(&NameMultiset::from_counts([("a", 2u32)])));
        assert!(!d.accepts(&NameMultiset::singleton("a")));
    }

    #[test]
    fn nu_object_blocks_contextual_use() {
        // [a]a!b.0 | [a][b]a?x.x!c.0 with b:~({c}(0)) is untypable.
        let env = TypeEnv::from_pairs([
            (
                "a",
                chan_names(["a"], AuthType::chan(OmegaSet::Nu, chan_names(["c"], ground()))),
            ),
            ("b", AuthType::chan(OmegaSet::Nu, chan_names(["c"], ground()))),
            ("c", chan_names(["c"], ground())),
        ]);
        let p = P::par(
            P::auth("a", P::out("a", "b", P::Nil)),
            P::auth(
                "a",
                P::auth("b", P::input("a", "x", P::out("x", "c", P::Nil))),
            ),
        );
        match demands(&env, &p) {
            Err(Untypable::NuContextualExpected { binder }) => {
                assert_eq!(binder.as_str(), "x")
            }
            other => panic!("expected ν-contextual failure, got {other:?}"),
        }
    }

    #[test]
    fn oracle_matches_on_auth_inversion() {
        let env = TypeEnv::from_pairs([
            ("a", chan_names(["a"], chan_names(["b"], ground()))),
            ("b", chan_names(["b"], ground())),
        ]);
        let p = P::out("a", "b", P::Nil);
        let scoped = P::auth("a", p.clone());
        for rho in [
            NameMultiset::empty(),
            NameMultiset::singleton("a"),
            NameMultiset::from_counts([("a", 2u32)]),
        ] {
            let direct = oracle_typable(&env, &p, &rho.sum(&NameMultiset::singleton("a")), 4);
            let via_auth = oracle_typable(&env, &scoped, &rho, 4);
            assert_eq!(direct, via_auth);
        }
    }
}
