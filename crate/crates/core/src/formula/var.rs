use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

/// Sort of a state variable. Enumerated variables are encoded as bounded
/// integers; the range constraint lives in the state-space restriction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum VarKind {
    Bool,
    Int,
    Enum,
}

impl VarKind {
    /// Integer and enumerated variables take part in linear constraints.
    pub fn is_numeric(self) -> bool {
        !matches!(self, VarKind::Bool)
    }
}

/// A state variable, either in its current-state or next-state version.
///
/// The next-state version of `v` shares name and kind with `v` and differs
/// only in the `next` flag, so `v.primed().unprimed() == v`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId {
    name: Arc<str>,
    next: bool,
    kind: VarKind,
}

impl VarId {
    pub fn new(name: &str, kind: VarKind) -> Self {
        VarId {
            name: Arc::from(name),
            next: false,
            kind,
        }
    }

    pub fn int(name: &str) -> Self {
        Self::new(name, VarKind::Int)
    }

    pub fn boolean(name: &str) -> Self {
        Self::new(name, VarKind::Bool)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> VarKind {
        self.kind
    }

    pub fn is_next(&self) -> bool {
        self.next
    }

    pub fn is_bool(&self) -> bool {
        self.kind == VarKind::Bool
    }

    pub fn primed(&self) -> VarId {
        VarId {
            name: self.name.clone(),
            next: true,
            kind: self.kind,
        }
    }

    pub fn unprimed(&self) -> VarId {
        VarId {
            name: self.name.clone(),
            next: false,
            kind: self.kind,
        }
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.next {
            write!(f, "{}'", self.name)
        } else {
            write!(f, "{}", self.name)
        }
    }
}

impl fmt::Debug for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
