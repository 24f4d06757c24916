//! Canonical ordering of the point sets.
//!
//! The base set `W` lists `x_1..x_M`, then the origin `o` (when present),
//! then `y_1..y_N`. The augmented set `V^z` prepends the connecting point
//! `z`. Internally every index is 0-based; [`Role`] prints the 1-based
//! labels used in reports.

use std::fmt;

use serde::{Deserialize, Serialize};

/// What a row of a matrix over `W` or `V^z` stands for.
///
/// `X` and `Y` carry 0-based positions within their set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Role {
    Z,
    X(usize),
    Origin,
    Y(usize),
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Role::Z => write!(f, "z"),
            Role::X(m) => write!(f, "x{}", m + 1),
            Role::Origin => write!(f, "o"),
            Role::Y(n) => write!(f, "y{}", n + 1),
        }
    }
}

impl std::str::FromStr for Role {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parse_pos = |digits: &str| -> Result<usize, String> {
            match digits.parse::<usize>() {
                Ok(k) if k >= 1 => Ok(k - 1),
                _ => Err(format!("bad point label {s:?}")),
            }
        };
        match s {
            "z" => Ok(Role::Z),
            "o" => Ok(Role::Origin),
            _ if s.starts_with('x') => parse_pos(&s[1..]).map(Role::X),
            _ if s.starts_with('y') => parse_pos(&s[1..]).map(Role::Y),
            _ => Err(format!("bad point label {s:?}")),
        }
    }
}

/// Index bookkeeping for `W = X ∪ Y ∪ {o}` and `V^z = W ∪ {z}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AugmentedIndexing {
    m: usize,
    n: usize,
    include_origin: bool,
}

impl AugmentedIndexing {
    pub fn new(m: usize, n: usize, include_origin: bool) -> Self {
        assert!(m >= 1 && n >= 1, "both sets need at least one point");
        Self { m, n, include_origin }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn include_origin(&self) -> bool {
        self.include_origin
    }

    /// Size of `W`: `M + N + 1`, or `M + N` without the origin.
    pub fn s(&self) -> usize {
        self.m + self.n + usize::from(self.include_origin)
    }

    /// Size of `V^z`.
    pub fn q(&self) -> usize {
        self.s() + 1
    }

    /// Role of the `s`-th point of `W` (0-based).
    pub fn role_of_w(&self, s: usize) -> Role {
        assert!(s < self.s(), "index {s} out of range for W of size {}", self.s());
        if s < self.m {
            Role::X(s)
        } else if self.include_origin && s == self.m {
            Role::Origin
        } else {
            Role::Y(s - self.m - usize::from(self.include_origin))
        }
    }

    /// Role of the `q`-th point of `V^z` (0-based).
    pub fn role_of(&self, q: usize) -> Role {
        if q == 0 {
            Role::Z
        } else {
            self.role_of_w(q - 1)
        }
    }

    /// Position of `role` in `W`, or `None` for `z` and for roles that do
    /// not exist in this layout.
    pub fn w_index(&self, role: Role) -> Option<usize> {
        match role {
            Role::Z => None,
            Role::X(m) if m < self.m => Some(m),
            Role::Origin if self.include_origin => Some(self.m),
            Role::Y(n) if n < self.n => Some(self.m + usize::from(self.include_origin) + n),
            _ => None,
        }
    }

    /// Position of `role` in `V^z`.
    pub fn v_index(&self, role: Role) -> Option<usize> {
        match role {
            Role::Z => Some(0),
            other => self.w_index(other).map(|s| s + 1),
        }
    }

    pub fn x_range_w(&self) -> std::ops::Range<usize> {
        0..self.m
    }

    pub fn y_range_w(&self) -> std::ops::Range<usize> {
        let start = self.m + usize::from(self.include_origin);
        start..start + self.n
    }

    /// All roles of `V^z` in canonical order.
    pub fn roles(&self) -> Vec<Role> {
        (0..self.q()).map(|q| self.role_of(q)).collect()
    }
}
