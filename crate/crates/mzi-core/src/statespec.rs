//! Textual grammar for input states:
//!
//! ```text
//! vac                          vacuum in both ports
//! fock:N                       |N,0⟩
//! noon:N                       (|N,0⟩ + |0,N⟩)/√2
//! mix:p=0.3:vac,p=0.7:fock:1   diagonal mixture of the above
//! ```
//!
//! Whitespace is ignored everywhere. Mixture weight keys may carry a
//! suffix (`p0=`, `p1=`); weights must sum to one within 1e−9.

use std::fmt;

use crate::engine::PureState;
use crate::{Error, Result};

/// Parsed state specification.
#[derive(Clone, Debug, PartialEq)]
pub enum StateSpec {
    Vacuum,
    Fock(u32),
    Noon(u32),
    Mixture(Vec<(f64, StateSpec)>),
}

impl StateSpec {
    /// Expands the spec into mixture components for the engine.
    pub fn components(&self) -> Result<Vec<(f64, PureState)>> {
        match self {
            Self::Vacuum => Ok(vec![(1.0, PureState::vacuum())]),
            Self::Fock(n) => Ok(vec![(1.0, PureState::fock(*n)?)]),
            Self::Noon(n) => Ok(vec![(1.0, PureState::noon(*n)?)]),
            Self::Mixture(parts) => parts
                .iter()
                .map(|(p, spec)| {
                    let single = spec.components()?;
                    Ok((*p, single[0].1.clone()))
                })
                .collect(),
        }
    }

    pub fn is_mixture(&self) -> bool {
        matches!(self, Self::Mixture(_))
    }
}

impl fmt::Display for StateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Vacuum => write!(f, "vac"),
            Self::Fock(n) => write!(f, "fock:{n}"),
            Self::Noon(n) => write!(f, "noon:{n}"),
            Self::Mixture(parts) => {
                write!(f, "mix:")?;
                for (idx, (p, spec)) in parts.iter().enumerate() {
                    if idx > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "p={p}:{spec}")?;
                }
                Ok(())
            }
        }
    }
}

/// Renders a spec to its canonical text form; `parse_state_spec` inverts it.
pub fn render_state_spec(spec: &StateSpec) -> String {
    spec.to_string()
}

/// Parses the state grammar, reporting syntax errors with byte positions.
pub fn parse_state_spec(text: &str) -> Result<StateSpec> {
    let mut cursor = Cursor::new(text);
    let spec = cursor.parse_spec(true)?;
    cursor.skip_ws();
    if !cursor.at_end() {
        return Err(cursor.error("unexpected trailing input"));
    }
    Ok(spec)
}

struct Cursor<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str) -> Self {
        Self { text, pos: 0 }
    }

    fn error(&self, message: impl Into<String>) -> Error {
        Error::StateSpec {
            position: self.pos,
            message: message.into(),
        }
    }

    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn at_end(&self) -> bool {
        self.pos >= self.text.len()
    }

    fn skip_ws(&mut self) {
        while self.rest().starts_with(|c: char| c.is_whitespace()) {
            self.pos += self.rest().chars().next().map_or(0, char::len_utf8);
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.rest().chars().next()
    }

    fn eat(&mut self, token: char) -> Result<()> {
        match self.peek() {
            Some(c) if c == token => {
                self.pos += c.len_utf8();
                Ok(())
            }
            Some(c) => Err(self.error(format!("expected '{token}', found '{c}'"))),
            None => Err(self.error(format!("expected '{token}', found end of input"))),
        }
    }

    fn ident(&mut self) -> String {
        self.skip_ws();
        let start = self.pos;
        while self
            .rest()
            .starts_with(|c: char| c.is_ascii_alphanumeric() || c == '_')
        {
            self.pos += 1;
        }
        self.text[start..self.pos].to_string()
    }

    fn uint(&mut self) -> Result<u32> {
        self.skip_ws();
        let start = self.pos;
        while self.rest().starts_with(|c: char| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected a photon number"));
        }
        self.text[start..self.pos]
            .parse()
            .map_err(|e| self.error(format!("invalid photon number: {e}")))
    }

    fn float(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        while self
            .rest()
            .starts_with(|c: char| c.is_ascii_digit() || ".eE+-".contains(c))
        {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected a probability"));
        }
        self.text[start..self.pos]
            .parse()
            .map_err(|e| self.error(format!("invalid probability: {e}")))
    }

    fn parse_spec(&mut self, allow_mixture: bool) -> Result<StateSpec> {
        self.skip_ws();
        let at = self.pos;
        let name = self.ident();
        match name.as_str() {
            "vac" => Ok(StateSpec::Vacuum),
            "fock" => {
                self.eat(':')?;
                Ok(StateSpec::Fock(self.uint()?))
            }
            "noon" => {
                self.eat(':')?;
                let at_count = self.pos;
                let n = self.uint()?;
                if n == 0 {
                    return Err(Error::StateSpec {
                        position: at_count,
                        message: "N00N state needs at least one photon".into(),
                    });
                }
                Ok(StateSpec::Noon(n))
            }
            "mix" if allow_mixture => {
                self.eat(':')?;
                self.parse_mixture()
            }
            "mix" => Err(Error::StateSpec {
                position: at,
                message: "nested mixtures are not supported".into(),
            }),
            "" => Err(self.error("expected a state (vac, fock:N, noon:N, mix:...)")),
            other => Err(Error::StateSpec {
                position: at,
                message: format!("unknown state '{other}'"),
            }),
        }
    }

    fn parse_mixture(&mut self) -> Result<StateSpec> {
        let mut parts = Vec::new();
        loop {
            self.skip_ws();
            let at = self.pos;
            let key = self.ident();
            if !key.starts_with('p') {
                return Err(Error::StateSpec {
                    position: at,
                    message: format!("expected a weight key like 'p=', found '{key}'"),
                });
            }
            self.eat('=')?;
            let at_weight = self.pos;
            let weight = self.float()?;
            if !(0.0..=1.0).contains(&weight) {
                return Err(Error::StateSpec {
                    position: at_weight,
                    message: format!("weight {weight} outside [0, 1]"),
                });
            }
            self.eat(':')?;
            let spec = self.parse_spec(false)?;
            parts.push((weight, spec));
            match self.peek() {
                Some(',') => self.eat(',')?,
                _ => break,
            }
        }
        let sum: f64 = parts.iter().map(|(p, _)| p).sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(self.error(format!("mixture weights sum to {sum}, expected 1")));
        }
        Ok(StateSpec::Mixture(parts))
    }
}
