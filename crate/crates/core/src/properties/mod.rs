//! Database properties, their restrictions to query windows, local properties
//! and recognizability checks.

mod chain;
mod local;
mod parse;

use std::fmt;
use std::sync::Arc;

pub use chain::{chain_length, longest_chain, range_bits, ChainKind, ChainLength, ChainRelation};
pub use local::{
    chain_local_family, check_locality, check_strong_recognizes, check_weak_recognizes, collision_local_family,
    prmg_local_family, projector, restrict, LocalFamily, LocalProperty, RestrictedSet, TupleSpace, MAX_TUPLE_SPACE,
};
pub use parse::parse_property;

use crate::oracle::Database;

type Predicate = Arc<dyn Fn(&Database) -> bool + Send + Sync>;

/// A decidable set of databases.
#[derive(Clone)]
pub enum DatabaseProperty {
    All,
    Nothing,
    /// Only the all-⊥ database.
    Bottom,
    /// Some input maps to 0.
    Prmg,
    /// Two distinct inputs share a defined value.
    Cl,
    /// At most s defined entries.
    Size(usize),
    /// Contains an s-chain under the relation.
    Chn { s: usize, rel: ChainRelation },
    Not(Box<DatabaseProperty>),
    And(Box<DatabaseProperty>, Box<DatabaseProperty>),
    Or(Box<DatabaseProperty>, Box<DatabaseProperty>),
    Custom { name: String, predicate: Predicate },
}

impl DatabaseProperty {
    pub fn prmg() -> Self {
        Self::Prmg
    }

    pub fn cl() -> Self {
        Self::Cl
    }

    pub fn size_at_most(s: usize) -> Self {
        Self::Size(s)
    }

    pub fn chn(s: usize, rel: ChainRelation) -> Self {
        Self::Chn { s, rel }
    }

    pub fn custom(name: &str, predicate: impl Fn(&Database) -> bool + Send + Sync + 'static) -> Self {
        Self::Custom { name: name.to_string(), predicate: Arc::new(predicate) }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Self {
        Self::Not(Box::new(self))
    }

    pub fn and(self, other: Self) -> Self {
        Self::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: Self) -> Self {
        Self::Or(Box::new(self), Box::new(other))
    }

    /// self \ other.
    pub fn minus(self, other: Self) -> Self {
        self.and(other.not())
    }

    pub fn contains(&self, d: &Database) -> bool {
        match self {
            Self::All => true,
            Self::Nothing => false,
            Self::Bottom => d.support_size() == 0,
            Self::Prmg => d.values().any(|v| v == 0),
            Self::Cl => has_collision(d),
            Self::Size(s) => d.support_size() <= *s,
            Self::Chn { s, rel } => *s == 0 || chain_length(d, rel).at_least(*s),
            Self::Not(p) => !p.contains(d),
            Self::And(a, b) => a.contains(d) && b.contains(d),
            Self::Or(a, b) => a.contains(d) || b.contains(d),
            Self::Custom { predicate, .. } => predicate(d),
        }
    }
}

pub(crate) fn has_collision(d: &Database) -> bool {
    let mut seen: Vec<usize> = d.values().filter(|&v| v != d.range()).collect();
    let n = seen.len();
    seen.sort_unstable();
    seen.dedup();
    seen.len() != n
}

impl fmt::Display for DatabaseProperty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::All => write!(f, "ALL"),
            Self::Nothing => write!(f, "NONE"),
            Self::Bottom => write!(f, "BOT"),
            Self::Prmg => write!(f, "PRMG"),
            Self::Cl => write!(f, "CL"),
            Self::Size(s) => write!(f, "SIZE[s={s}]"),
            Self::Chn { s, rel } => write!(f, "CHN[s={s},rel={}]", rel.kind()),
            Self::Not(p) => write!(f, "!{}", Atom(p)),
            Self::And(a, b) => write!(f, "{} & {}", Atom(a), Atom(b)),
            Self::Or(a, b) => write!(f, "{} | {}", Atom(a), Atom(b)),
            Self::Custom { name, .. } => write!(f, "{name}"),
        }
    }
}

impl fmt::Debug for DatabaseProperty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Parenthesizes binary operands.
struct Atom<'a>(&'a DatabaseProperty);

impl fmt::Display for Atom<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            DatabaseProperty::And(..) | DatabaseProperty::Or(..) => write!(f, "({})", self.0),
            other => write!(f, "{other}"),
        }
    }
}
