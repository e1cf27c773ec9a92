use std::fmt;

use crate::hamiltonian::{Spin, SpinOrbital};

pub const VACUUM_MARKER: &str = "|vacuum>";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TokenKind {
    Raise,
    Lower,
}

/// A ladder operator in a trial-wavefunction term: `(3a)+` raises spatial
/// orbital 3 with alpha spin, `(2b)` lowers orbital 2 with beta spin.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LadderToken {
    /// 0-based spatial orbital.
    pub orbital: usize,
    pub spin: Spin,
    pub kind: TokenKind,
}

impl LadderToken {
    pub fn spin_orbital(&self) -> SpinOrbital {
        SpinOrbital::new(self.orbital, self.spin)
    }
}

impl fmt::Display for LadderToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self.spin {
            Spin::Alpha => 'a',
            Spin::Beta => 'b',
        };
        let dagger = match self.kind {
            TokenKind::Raise => "+",
            TokenKind::Lower => "",
        };
        write!(f, "({}{}){}", self.orbital + 1, s, dagger)
    }
}

/// Parses one ladder token (1-based orbital on disk).
pub fn parse_token(text: &str) -> Result<LadderToken, String> {
    let bad = || format!("malformed ladder token {text:?}");
    let rest = text.strip_prefix('(').ok_or_else(bad)?;
    let close = rest.find(')').ok_or_else(bad)?;
    let (inner, tail) = (&rest[..close], &rest[close + 1..]);
    let kind = match tail {
        "+" => TokenKind::Raise,
        "" => TokenKind::Lower,
        _ => return Err(bad()),
    };
    let mut chars = inner.chars();
    let spin = match chars.next_back() {
        Some('a') => Spin::Alpha,
        Some('b') => Spin::Beta,
        _ => return Err(bad()),
    };
    let digits = chars.as_str();
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let orbital: usize = digits.parse().map_err(|_| bad())?;
    if orbital == 0 {
        return Err(format!("orbital index in {text:?} must be at least 1"));
    }
    Ok(LadderToken {
        orbital: orbital - 1,
        spin,
        kind,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grammar() {
        let t = parse_token("(12b)+").unwrap();
        assert_eq!((t.orbital, t.spin, t.kind), (11, Spin::Beta, TokenKind::Raise));
        let t = parse_token("(1a)").unwrap();
        assert_eq!((t.orbital, t.spin, t.kind), (0, Spin::Alpha, TokenKind::Lower));
        assert_eq!(t.to_string(), "(1a)");
        for bad in ["(0a)+", "(a)+", "(1c)", "1a+", "(1a)-", "(1a", "(-1a)", "|vacuum>"] {
            assert!(parse_token(bad).is_err(), "{bad}");
        }
    }
}
