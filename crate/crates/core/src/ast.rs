//! Process terms: names, restriction symbols, the AST, binding structure,
//! capture-avoiding substitution and well-formedness.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::typecheck::AuthType;

/// A channel name, lexical class `[a-z][A-Za-z0-9_]*`.
///
/// Names compare by text; there is no interning.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Name(String);

impl Name {
    pub fn new(text: impl Into<String>) -> Name {
        let text = text.into();
        debug_assert!(is_valid_name(&text), "invalid name {text:?}");
        Name(text)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

pub fn is_valid_name(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some('a'..='z')) && cs.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Name {
    fn from(s: &str) -> Name {
        Name::new(s)
    }
}

/// A restriction symbol from the countable set `S`, written `#r` in the
/// concrete syntax. The distinguished `~` tag is [`SymbolTag::Nu`], not a
/// `Symbol`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(String);

impl Symbol {
    pub fn new(text: impl Into<String>) -> Symbol {
        let text = text.into();
        debug_assert!(is_valid_name(&text), "invalid symbol {text:?}");
        Symbol(text)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

impl From<&str> for Symbol {
    fn from(s: &str) -> Symbol {
        Symbol::new(s)
    }
}

/// Tag on a restriction binder: a symbol from `S`, or the distinguished `ν`
/// marking names never subject to contextual authorization.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SymbolTag {
    Sym(Symbol),
    Nu,
}

/// Process terms.
///
/// Binders: the restriction binder and the input/replicated-input
/// placeholders bind exactly their body or continuation. The name of an
/// authorization scope and both names of the delegation prefixes occur free.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Process {
    Nil,
    Par(Box<Process>, Box<Process>),
    Res {
        binder: Name,
        /// `None` for plain restrictions; the type checker requires a tag.
        tag: Option<SymbolTag>,
        /// Carried-type annotation; required by the type checker.
        ann: Option<AuthType>,
        body: Box<Process>,
    },
    /// Authorization scope `[a]P`: one floating use of channel `a`.
    Auth(Name, Box<Process>),
    /// Output `a!b.P`.
    Out {
        subject: Name,
        object: Name,
        cont: Box<Process>,
    },
    /// Input `a?x.P`.
    In {
        subject: Name,
        binder: Name,
        cont: Box<Process>,
    },
    /// Authorization delegation `a<b>.P`.
    DelegOut {
        subject: Name,
        object: Name,
        cont: Box<Process>,
    },
    /// Authorization reception `a(b).P`.
    DelegIn {
        subject: Name,
        object: Name,
        cont: Box<Process>,
    },
    /// Replicated input `!a?x.P`.
    RepIn {
        subject: Name,
        binder: Name,
        cont: Box<Process>,
    },
}

impl Process {
    pub fn par(left: Process, right: Process) -> Process {
        Process::Par(Box::new(left), Box::new(right))
    }

    pub fn res(
        binder: impl Into<Name>,
        tag: Option<SymbolTag>,
        ann: Option<AuthType>,
        body: Process,
    ) -> Process {
        Process::Res {
            binder: binder.into(),
            tag,
            ann,
            body: Box::new(body),
        }
    }

    pub fn auth(name: impl Into<Name>, body: Process) -> Process {
        Process::Auth(name.into(), Box::new(body))
    }

    pub fn out(subject: impl Into<Name>, object: impl Into<Name>, cont: Process) -> Process {
        Process::Out {
            subject: subject.into(),
            object: object.into(),
            cont: Box::new(cont),
        }
    }

    pub fn input(subject: impl Into<Name>, binder: impl Into<Name>, cont: Process) -> Process {
        Process::In {
            subject: subject.into(),
            binder: binder.into(),
            cont: Box::new(cont),
        }
    }

    pub fn deleg_out(subject: impl Into<Name>, object: impl Into<Name>, cont: Process) -> Process {
        Process::DelegOut {
            subject: subject.into(),
            object: object.into(),
            cont: Box::new(cont),
        }
    }

    pub fn deleg_in(subject: impl Into<Name>, object: impl Into<Name>, cont: Process) -> Process {
        Process::DelegIn {
            subject: subject.into(),
            object: object.into(),
            cont: Box::new(cont),
        }
    }

    pub fn rep_in(subject: impl Into<Name>, binder: impl Into<Name>, cont: Process) -> Process {
        Process::RepIn {
            subject: subject.into(),
            binder: binder.into(),
            cont: Box::new(cont),
        }
    }

    /// Number of AST nodes.
    pub fn node_count(&self) -> usize {
        match self {
            Process::Nil => 1,
            Process::Par(l, r) => 1 + l.node_count() + r.node_count(),
            Process::Res { body, .. } => 1 + body.node_count(),
            Process::Auth(_, body) => 1 + body.node_count(),
            Process::Out { cont, .. }
            | Process::In { cont, .. }
            | Process::DelegOut { cont, .. }
            | Process::DelegIn { cont, .. }
            | Process::RepIn { cont, .. } => 1 + cont.node_count(),
        }
    }
}

fn type_names(t: &AuthType, acc: &mut BTreeSet<Name>) {
    use crate::typecheck::{OmegaElem, OmegaSet};
    if let AuthType::Chan(omega, carried) = t {
        if let OmegaSet::Set(elems) = omega {
            for e in elems {
                if let OmegaElem::Name(n) = e {
                    acc.insert(n.clone());
                }
            }
        }
        type_names(carried, acc);
    }
}

/// Free names. Annotation names on restrictions count as free occurrences of
/// the restriction node (the binder does not scope over its own annotation).
pub fn free_names(p: &Process) -> BTreeSet<Name> {
    fn go(p: &Process, acc: &mut BTreeSet<Name>) {
        match p {
            Process::Nil => {}
            Process::Par(l, r) => {
                go(l, acc);
                go(r, acc);
            }
            Process::Res {
                binder, ann, body, ..
            } => {
                let mut inner = BTreeSet::new();
                go(body, &mut inner);
                inner.remove(binder);
                acc.extend(inner);
                if let Some(t) = ann {
                    type_names(t, acc);
                }
            }
            Process::Auth(a, body) => {
                acc.insert(a.clone());
                go(body, acc);
            }
            Process::Out {
                subject,
                object,
                cont,
            }
            | Process::DelegOut {
                subject,
                object,
                cont,
            }
            | Process::DelegIn {
                subject,
                object,
                cont,
            } => {
                acc.insert(subject.clone());
                acc.insert(object.clone());
                go(cont, acc);
            }
            Process::In {
                subject,
                binder,
                cont,
            }
            | Process::RepIn {
                subject,
                binder,
                cont,
            } => {
                acc.insert(subject.clone());
                let mut inner = BTreeSet::new();
                go(cont, &mut inner);
                inner.remove(binder);
                acc.extend(inner);
            }
        }
    }
    let mut acc = BTreeSet::new();
    go(p, &mut acc);
    acc
}

/// Names with a binding occurrence somewhere in `p`.
pub fn bound_names(p: &Process) -> BTreeSet<Name> {
    fn go(p: &Process, acc: &mut BTreeSet<Name>) {
        match p {
            Process::Nil => {}
            Process::Par(l, r) => {
                go(l, acc);
                go(r, acc);
            }
            Process::Res { binder, body, .. } => {
                acc.insert(binder.clone());
                go(body, acc);
            }
            Process::Auth(_, body) => go(body, acc),
            Process::Out { cont, .. }
            | Process::DelegOut { cont, .. }
            | Process::DelegIn { cont, .. } => go(cont, acc),
            Process::In { binder, cont, .. } | Process::RepIn { binder, cont, .. } => {
                acc.insert(binder.clone());
                go(cont, acc);
            }
        }
    }
    let mut acc = BTreeSet::new();
    go(p, &mut acc);
    acc
}

/// Every name occurring anywhere in `p`, free or bound.
pub fn all_names(p: &Process) -> BTreeSet<Name> {
    let mut acc = free_names(p);
    acc.extend(bound_names(p));
    acc
}

/// All symbols from `S` tagging restrictions in `p` (the `ν` tag excluded).
pub fn symbols(p: &Process) -> BTreeSet<Symbol> {
    fn go(p: &Process, acc: &mut BTreeSet<Symbol>) {
        match p {
            Process::Nil => {}
            Process::Par(l, r) => {
                go(l, acc);
                go(r, acc);
            }
            Process::Res { tag, body, .. } => {
                if let Some(SymbolTag::Sym(s)) = tag {
                    acc.insert(s.clone());
                }
                go(body, acc);
            }
            Process::Auth(_, body) => go(body, acc),
            Process::Out { cont, .. }
            | Process::In { cont, .. }
            | Process::DelegOut { cont, .. }
            | Process::DelegIn { cont, .. }
            | Process::RepIn { cont, .. } => go(cont, acc),
        }
    }
    let mut acc = BTreeSet::new();
    go(p, &mut acc);
    acc
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WellFormedViolation {
    DuplicateSymbol { symbol: Symbol },
    SymbolUnderReplication { symbol: Symbol, path: String },
}

impl fmt::Display for WellFormedViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WellFormedViolation::DuplicateSymbol { symbol } => {
                write!(f, "duplicate symbol {symbol}")
            }
            WellFormedViolation::SymbolUnderReplication { symbol, path } => {
                write!(f, "symbol {symbol} under replication at {path}")
            }
        }
    }
}

/// A process is well-formed when no symbol from `S` occurs twice and no
/// replicated-input continuation contains a symbol from `S`.
pub fn well_formed(p: &Process) -> Result<(), WellFormedViolation> {
    fn go(
        p: &Process,
        seen: &mut BTreeSet<Symbol>,
        path: &mut Vec<String>,
    ) -> Result<(), WellFormedViolation> {
        match p {
            Process::Nil => Ok(()),
            Process::Par(l, r) => {
                path.push("par.left".into());
                go(l, seen, path)?;
                path.pop();
                path.push("par.right".into());
                go(r, seen, path)?;
                path.pop();
                Ok(())
            }
            Process::Res {
                binder, tag, body, ..
            } => {
                if let Some(SymbolTag::Sym(s)) = tag {
                    if !seen.insert(s.clone()) {
                        return Err(WellFormedViolation::DuplicateSymbol { symbol: s.clone() });
                    }
                }
                path.push(format!("new {binder}"));
                go(body, seen, path)?;
                path.pop();
                Ok(())
            }
            Process::Auth(a, body) => {
                path.push(format!("[{a}]"));
                go(body, seen, path)?;
                path.pop();
                Ok(())
            }
            Process::Out { subject, cont, .. }
            | Process::DelegOut { subject, cont, .. }
            | Process::DelegIn { subject, cont, .. }
            | Process::In { subject, cont, .. } => {
                path.push(format!("{subject}."));
                go(cont, seen, path)?;
                path.pop();
                Ok(())
            }
            Process::RepIn { subject, cont, .. } => {
                let inner = symbols(cont);
                if let Some(s) = inner.iter().next() {
                    return Err(WellFormedViolation::SymbolUnderReplication {
                        symbol: s.clone(),
                        path: if path.is_empty() {
                            format!("!{subject}?")
                        } else {
                            format!("{}/!{subject}?", path.join("/"))
                        },
                    });
                }
                path.push(format!("!{subject}?"));
                go(cont, seen, path)?;
                path.pop();
                Ok(())
            }
        }
    }
    go(p, &mut BTreeSet::new(), &mut Vec::new())
}

/// Smallest numeric suffix scheme: strip trailing digits from `base`, then
/// pick the least `n >= 1` with `stem{n}` outside `avoid`.
pub fn fresh_name(base: &Name, avoid: &BTreeSet<Name>) -> Name {
    let stem: String = {
        let s = base.as_str();
        let trimmed = s.trim_end_matches(|c: char| c.is_ascii_digit());
        if trimmed.is_empty() {
            s.to_string()
        } else {
            trimmed.to_string()
        }
    };
    let mut n: u64 = 1;
    loop {
        let cand = Name(format!("{stem}{n}"));
        if !avoid.contains(&cand) {
            return cand;
        }
        n += 1;
    }
}

fn substitute_type(t: &AuthType, replacement: &Name, placeholder: &Name) -> AuthType {
    use crate::typecheck::{OmegaElem, OmegaSet};
    match t {
        AuthType::Ground => AuthType::Ground,
        AuthType::Chan(omega, carried) => {
            let omega = match omega {
                OmegaSet::Nu => OmegaSet::Nu,
                OmegaSet::Set(elems) => OmegaSet::Set(
                    elems
                        .iter()
                        .map(|e| match e {
                            OmegaElem::Name(n) if n == placeholder => {
                                OmegaElem::Name(replacement.clone())
                            }
                            other => other.clone(),
                        })
                        .collect(),
                ),
            };
            AuthType::Chan(
                omega,
                Box::new(substitute_type(carried, replacement, placeholder)),
            )
        }
    }
}

/// Capture-avoiding substitution `p{replacement/placeholder}`.
///
/// Bound names that would capture `replacement` are renamed with the smallest
/// numeric suffix not colliding with any name of the enclosing whole process,
/// so results are deterministic.
pub fn substitute(p: &Process, replacement: &Name, placeholder: &Name) -> Process {
    if replacement == placeholder {
        return p.clone();
    }
    let mut avoid = all_names(p);
    avoid.insert(replacement.clone());
    avoid.insert(placeholder.clone());
    subst_rec(p, replacement, placeholder, &avoid)
}

fn subst_name(n: &Name, replacement: &Name, placeholder: &Name) -> Name {
    if n == placeholder {
        replacement.clone()
    } else {
        n.clone()
    }
}

fn subst_rec(
    p: &Process,
    replacement: &Name,
    placeholder: &Name,
    avoid: &BTreeSet<Name>,
) -> Process {
    match p {
        Process::Nil => Process::Nil,
        Process::Par(l, r) => Process::par(
            subst_rec(l, replacement, placeholder, avoid),
            subst_rec(r, replacement, placeholder, avoid),
        ),
        Process::Auth(a, body) => Process::auth(
            subst_name(a, replacement, placeholder),
            subst_rec(body, replacement, placeholder, avoid),
        ),
        Process::Out {
            subject,
            object,
            cont,
        } => Process::out(
            subst_name(subject, replacement, placeholder),
            subst_name(object, replacement, placeholder),
            subst_rec(cont, replacement, placeholder, avoid),
        ),
        Process::DelegOut {
            subject,
            object,
            cont,
        } => Process::deleg_out(
            subst_name(subject, replacement, placeholder),
            subst_name(object, replacement, placeholder),
            subst_rec(cont, replacement, placeholder, avoid),
        ),
        Process::DelegIn {
            subject,
            object,
            cont,
        } => Process::deleg_in(
            subst_name(subject, replacement, placeholder),
            subst_name(object, replacement, placeholder),
            subst_rec(cont, replacement, placeholder, avoid),
        ),
        Process::Res {
            binder,
            tag,
            ann,
            body,
        } => {
            let ann = ann
                .as_ref()
                .map(|t| substitute_type(t, replacement, placeholder));
            if binder == placeholder {
                Process::Res {
                    binder: binder.clone(),
                    tag: tag.clone(),
                    ann,
                    body: body.clone(),
                }
            } else if binder == replacement && free_names(body).contains(placeholder) {
                let fresh = fresh_name(binder, avoid);
                let renamed = substitute(body, &fresh, binder);
                Process::Res {
                    binder: fresh,
                    tag: tag.clone(),
                    ann,
                    body: Box::new(subst_rec(&renamed, replacement, placeholder, avoid)),
                }
            } else {
                Process::Res {
                    binder: binder.clone(),
                    tag: tag.clone(),
                    ann,
                    body: Box::new(subst_rec(body, replacement, placeholder, avoid)),
                }
            }
        }
        Process::In {
            subject,
            binder,
            cont,
        } => {
            let subject = subst_name(subject, replacement, placeholder);
            let (binder, cont) =
                subst_under_binder(binder, cont, replacement, placeholder, avoid);
            Process::In {
                subject,
                binder,
                cont: Box::new(cont),
            }
        }
        Process::RepIn {
            subject,
            binder,
            cont,
        } => {
            let subject = subst_name(subject, replacement, placeholder);
            let (binder, cont) =
                subst_under_binder(binder, cont, replacement, placeholder, avoid);
            Process::RepIn {
                subject,
                binder,
                cont: Box::new(cont),
            }
        }
    }
}

fn subst_under_binder(
    binder: &Name,
    cont: &Process,
    replacement: &Name,
    placeholder: &Name,
    avoid: &BTreeSet<Name>,
) -> (Name, Process) {
    if binder == placeholder {
        (binder.clone(), cont.clone())
    } else if binder == replacement && free_names(cont).contains(placeholder) {
        let fresh = fresh_name(binder, avoid);
        let renamed = substitute(cont, &fresh, binder);
        (
            fresh,
            subst_rec(&renamed, replacement, placeholder, avoid),
        )
    } else {
        (
            binder.clone(),
            subst_rec(cont, replacement, placeholder, avoid),
        )
    }
}

/// Alpha-rename every binder in `p` to a fresh name, distinct from `avoid`,
/// from every free name, and from every other binder. Deterministic.
pub fn refresh_binders(p: &Process, avoid: &BTreeSet<Name>) -> Process {
    let mut used: BTreeSet<Name> = avoid.clone();
    used.extend(all_names(p));
    let env = BTreeMap::new();
    refresh_rec(p, &env, &mut used)
}

fn rename(n: &Name, env: &BTreeMap<Name, Name>) -> Name {
    env.get(n).cloned().unwrap_or_else(|| n.clone())
}

fn refresh_type(t: &AuthType, env: &BTreeMap<Name, Name>) -> AuthType {
    use crate::typecheck::{OmegaElem, OmegaSet};
    match t {
        AuthType::Ground => AuthType::Ground,
        AuthType::Chan(omega, carried) => {
            let omega = match omega {
                OmegaSet::Nu => OmegaSet::Nu,
                OmegaSet::Set(elems) => OmegaSet::Set(
                    elems
                        .iter()
                        .map(|e| match e {
                            OmegaElem::Name(n) => OmegaElem::Name(rename(n, env)),
                            s => s.clone(),
                        })
                        .collect(),
                ),
            };
            AuthType::Chan(omega, Box::new(refresh_type(carried, env)))
        }
    }
}

fn refresh_rec(p: &Process, env: &BTreeMap<Name, Name>, used: &mut BTreeSet<Name>) -> Process {
    match p {
        Process::Nil => Process::Nil,
        Process::Par(l, r) => Process::par(refresh_rec(l, env, used), refresh_rec(r, env, used)),
        Process::Auth(a, body) => Process::auth(rename(a, env), refresh_rec(body, env, used)),
        Process::Out {
            subject,
            object,
            cont,
        } => Process::out(
            rename(subject, env),
            rename(object, env),
            refresh_rec(cont, env, used),
        ),
        Process::DelegOut {
            subject,
            object,
            cont,
        } => Process::deleg_out(
            rename(subject, env),
            rename(object, env),
            refresh_rec(cont, env, used),
        ),
        Process::DelegIn {
            subject,
            object,
            cont,
        } => Process::deleg_in(
            rename(subject, env),
            rename(object, env),
            refresh_rec(cont, env, used),
        ),
        Process::Res {
            binder,
            tag,
            ann,
            body,
        } => {
            let fresh = fresh_name(binder, used);
            used.insert(fresh.clone());
            let mut env2 = env.clone();
            env2.insert(binder.clone(), fresh.clone());
            Process::Res {
                binder: fresh,
                tag: tag.clone(),
                ann: ann.as_ref().map(|t| refresh_type(t, env)),
                body: Box::new(refresh_rec(body, &env2, used)),
            }
        }
        Process::In {
            subject,
            binder,
            cont,
        } => {
            let subject = rename(subject, env);
            let fresh = fresh_name(binder, used);
            used.insert(fresh.clone());
            let mut env2 = env.clone();
            env2.insert(binder.clone(), fresh.clone());
            Process::In {
                subject,
                binder: fresh,
                cont: Box::new(refresh_rec(cont, &env2, used)),
            }
        }
        Process::RepIn {
            subject,
            binder,
            cont,
        } => {
            let subject = rename(subject, env);
            let fresh = fresh_name(binder, used);
            used.insert(fresh.clone());
            let mut env2 = env.clone();
            env2.insert(binder.clone(), fresh.clone());
            Process::RepIn {
                subject,
                binder: fresh,
                cont: Box::new(refresh_rec(cont, &env2, used)),
            }
        }
    }
}

/// A finite multiset of names. No zero-multiplicity entries are stored.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NameMultiset(BTreeMap<Name, u32>);

impl NameMultiset {
    pub fn empty() -> NameMultiset {
        NameMultiset::default()
    }

    pub fn singleton(n: impl Into<Name>) -> NameMultiset {
        let mut m = NameMultiset::default();
        m.add(n.into(), 1);
        m
    }

    pub fn from_counts<I, N>(entries: I) -> NameMultiset
    where
        I: IntoIterator<Item = (N, u32)>,
        N: Into<Name>,
    {
        let mut m = NameMultiset::default();
        for (n, k) in entries {
            m.add(n.into(), k);
        }
        m
    }

    pub fn from_names<I, N>(names: I) -> NameMultiset
    where
        I: IntoIterator<Item = N>,
        N: Into<Name>,
    {
        let mut m = NameMultiset::default();
        for n in names {
            m.add(n.into(), 1);
        }
        m
    }

    pub fn add(&mut self, n: Name, k: u32) {
        if k > 0 {
            *self.0.entry(n).or_insert(0) += k;
        }
    }

    pub fn count(&self, n: &Name) -> u32 {
        self.0.get(n).copied().unwrap_or(0)
    }

    pub fn contains(&self, n: &Name) -> bool {
        self.count(n) > 0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> u32 {
        self.0.values().sum()
    }

    pub fn support(&self) -> impl Iterator<Item = &Name> {
        self.0.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Name, u32)> {
        self.0.iter().map(|(n, k)| (n, *k))
    }

    /// Multiset sum `⊎`.
    pub fn sum(&self, other: &NameMultiset) -> NameMultiset {
        let mut out = self.clone();
        for (n, k) in other.iter() {
            out.add(n.clone(), k);
        }
        out
    }

    /// Remove one occurrence of `n`; identity when `n` is absent (`⊖`).
    pub fn remove_one(&self, n: &Name) -> NameMultiset {
        let mut out = self.clone();
        if let Some(k) = out.0.get_mut(n) {
            if *k <= 1 {
                out.0.remove(n);
            } else {
                *k -= 1;
            }
        }
        out
    }

    /// Pointwise maximum `⊔`.
    pub fn join(&self, other: &NameMultiset) -> NameMultiset {
        let mut out = self.clone();
        for (n, k) in other.iter() {
            let cur = out.count(n);
            if k > cur {
                out.0.insert(n.clone(), k);
            }
        }
        out
    }

    /// Pointwise `≤`.
    pub fn is_subset(&self, other: &NameMultiset) -> bool {
        self.iter().all(|(n, k)| other.count(n) >= k)
    }

    /// Rename `placeholder` to `replacement`, merging multiplicities.
    pub fn rename(&self, replacement: &Name, placeholder: &Name) -> NameMultiset {
        let mut out = NameMultiset::default();
        for (n, k) in self.iter() {
            let n = if n == placeholder {
                replacement.clone()
            } else {
                n.clone()
            };
            out.add(n, k);
        }
        out
    }
}

impl fmt::Display for NameMultiset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (n, k)) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            if k == 1 {
                write!(f, "{n}")?;
            } else {
                write!(f, "{n}:{k}")?;
            }
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for NameMultiset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(s: &str) -> Name {
        Name::new(s)
    }

    #[test]
    fn auth_names_are_free() {
        let p = Process::auth("a", Process::Nil);
        assert_eq!(free_names(&p), BTreeSet::from([n("a")]));
        assert!(free_names(&Process::Nil).is_empty());
    }

    #[test]
    fn restriction_binds() {
        let p = Process::res(
            "b",
            Some(SymbolTag::Sym("r".into())),
            None,
            Process::out("a", "b", Process::Nil),
        );
        assert_eq!(free_names(&p), BTreeSet::from([n("a")]));
        assert_eq!(bound_names(&p), BTreeSet::from([n("b")]));
    }

    #[test]
    fn substitution_direct_and_absent() {
        let p = Process::out("x", "c", Process::Nil);
        assert_eq!(
            substitute(&p, &n("b"), &n("x")),
            Process::out("b", "c", Process::Nil)
        );
        let q = Process::auth("license", Process::Nil);
        assert_eq!(substitute(&q, &n("a"), &n("x")), q);
    }

    #[test]
    fn substitution_capture_avoidance() {
        // new b. x!b  {b/x}  =>  new b1. b!b1
        let p = Process::res(
            "b",
            Some(SymbolTag::Sym("r".into())),
            None,
            Process::out("x", "b", Process::Nil),
        );
        let q = substitute(&p, &n("b"), &n("x"));
        match &q {
            Process::Res { binder, body, .. } => {
                assert_ne!(binder, &n("b"));
                assert_eq!(
                    **body,
                    Process::out("b", binder.clone(), Process::Nil)
                );
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn symbols_skip_nu() {
        let p = Process::par(
            Process::res("a", Some(SymbolTag::Sym("r".into())), None, Process::Nil),
            Process::res("b", Some(SymbolTag::Nu), None, Process::Nil),
        );
        assert_eq!(symbols(&p), BTreeSet::from([Symbol::new("r")]));
    }

    #[test]
    fn well_formed_checks() {
        let dup = Process::par(
            Process::res("a", Some(SymbolTag::Sym("r".into())), None, Process::Nil),
            Process::res("b", Some(SymbolTag::Sym("r".into())), None, Process::Nil),
        );
        assert!(matches!(
            well_formed(&dup),
            Err(WellFormedViolation::DuplicateSymbol { .. })
        ));

        let under_rep = Process::rep_in(
            "l",
            "x",
            Process::res("e", Some(SymbolTag::Sym("r".into())), None, Process::Nil),
        );
        assert!(matches!(
            well_formed(&under_rep),
            Err(WellFormedViolation::SymbolUnderReplication { .. })
        ));

        let under_rep_nu = Process::rep_in(
            "l",
            "x",
            Process::res("e", Some(SymbolTag::Nu), None, Process::Nil),
        );
        assert!(well_formed(&under_rep_nu).is_ok());
    }

    #[test]
    fn multiset_laws() {
        let m = NameMultiset::from_counts([("a", 2u32), ("b", 1u32)]);
        assert_eq!(m.count(&n("a")), 2);
        assert_eq!(m.remove_one(&n("a")).count(&n("a")), 1);
        assert_eq!(m.remove_one(&n("c")), m);
        let j = m.join(&NameMultiset::from_counts([("a", 1u32), ("c", 3u32)]));
        assert_eq!(j.count(&n("a")), 2);
        assert_eq!(j.count(&n("c")), 3);
        assert!(NameMultiset::singleton("a").is_subset(&m));
        assert_eq!(m.to_string(), "{a:2,b}");
    }
}
