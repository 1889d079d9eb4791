use crate::error::{Error, Result};
use crate::oracle::OracleDomain;

use super::{ChainRelation, DatabaseProperty};

/// Parses a property expression.
///
/// ```text
/// expr   = term ('|' term)*
/// term   = factor (('&' | '\') factor)*
/// factor = '!' factor | '(' expr ')' | atom
/// atom   = ALL | NONE | BOT | PRMG | CL | SIZE[s=n] | SIZE<=n | CHN[s=n,rel=name]
/// ```
pub fn parse_property(text: &str, domain: &OracleDomain) -> Result<DatabaseProperty> {
    let mut p = Parser { src: text.as_bytes(), pos: 0, domain };
    let out = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return p.fail("unexpected trailing input");
    }
    Ok(out)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    domain: &'a OracleDomain,
}

impl Parser<'_> {
    fn fail<T>(&self, msg: &str) -> Result<T> {
        Err(Error::Parse(format!("{msg} at offset {}", self.pos)))
    }

    fn skip_ws(&mut self) {
        while self.src.get(self.pos).is_some_and(u8::is_ascii_whitespace) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            self.fail(&format!("expected '{}'", c as char))
        }
    }

    fn expr(&mut self) -> Result<DatabaseProperty> {
        let mut acc = self.term()?;
        while self.eat(b'|') {
            acc = acc.or(self.term()?);
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<DatabaseProperty> {
        let mut acc = self.factor()?;
        loop {
            if self.eat(b'&') {
                acc = acc.and(self.factor()?);
            } else if self.eat(b'\\') {
                acc = acc.minus(self.factor()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn factor(&mut self) -> Result<DatabaseProperty> {
        if self.eat(b'!') {
            return Ok(self.factor()?.not());
        }
        if self.eat(b'(') {
            let inner = self.expr()?;
            self.expect(b')')?;
            return Ok(inner);
        }
        self.atom()
    }

    fn word(&mut self) -> String {
        self.skip_ws();
        let start = self.pos;
        while self.src.get(self.pos).is_some_and(|c| c.is_ascii_alphanumeric() || *c == b'_') {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }

    fn number(&mut self) -> Result<usize> {
        let w = self.word();
        w.parse().or_else(|_| self.fail(&format!("expected a number, found '{w}'")))
    }

    /// Parses `[key=value,...]` into pairs.
    fn params(&mut self) -> Result<Vec<(String, String)>> {
        self.expect(b'[')?;
        let mut out = Vec::new();
        loop {
            let key = self.word().to_ascii_lowercase();
            self.expect(b'=')?;
            let value = self.word();
            if key.is_empty() || value.is_empty() {
                return self.fail("malformed parameter");
            }
            out.push((key, value));
            if self.eat(b']') {
                return Ok(out);
            }
            self.expect(b',')?;
        }
    }

    fn atom(&mut self) -> Result<DatabaseProperty> {
        let name = self.word().to_ascii_uppercase();
        match name.as_str() {
            "ALL" => Ok(DatabaseProperty::All),
            "NONE" => Ok(DatabaseProperty::Nothing),
            "BOT" => Ok(DatabaseProperty::Bottom),
            "PRMG" => Ok(DatabaseProperty::Prmg),
            "CL" => Ok(DatabaseProperty::Cl),
            "SIZE" => {
                if self.eat(b'<') {
                    self.expect(b'=')?;
                    return Ok(DatabaseProperty::Size(self.number()?));
                }
                let params = self.params()?;
                match params.as_slice() {
                    [(k, v)] if k == "s" => {
                        v.parse().map(DatabaseProperty::Size).or_else(|_| self.fail("SIZE needs a numeric s"))
                    }
                    _ => self.fail("SIZE takes exactly [s=n]"),
                }
            }
            "CHN" => {
                let mut s = None;
                let mut rel = None;
                for (k, v) in self.params()? {
                    match k.as_str() {
                        "s" => s = Some(v.parse().or_else(|_| self.fail("CHN needs a numeric s"))?),
                        "rel" => rel = Some(ChainRelation::by_name(&v, self.domain)?),
                        _ => return self.fail(&format!("unknown CHN parameter '{k}'")),
                    }
                }
                let Some(s) = s else { return self.fail("CHN needs s") };
                Ok(DatabaseProperty::chn(s, rel.unwrap_or_else(|| ChainRelation::equality(self.domain))))
            }
            "" => self.fail("expected a property"),
            other => self.fail(&format!("unknown property '{other}'")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupSpec;
    use crate::oracle::Database;

    fn dom() -> OracleDomain {
        OracleDomain::with_size(3, GroupSpec::bits(1).unwrap()).unwrap()
    }

    #[test]
    fn precedence_and_operators() {
        let d = dom();
        let p = parse_property("PRMG | CL & BOT", &d).unwrap();
        let q = parse_property("PRMG | (CL & BOT)", &d).unwrap();
        let r = parse_property("SIZE<=2 \\ CL", &d).unwrap();
        let s = parse_property("SIZE[s=2] & !CL", &d).unwrap();
        for db in Database::all(3, 2) {
            assert_eq!(p.contains(&db), q.contains(&db));
            assert_eq!(r.contains(&db), s.contains(&db));
        }
    }

    #[test]
    fn rejects_malformed_input() {
        let d = dom();
        for bad in ["", "PRMG &", "FOO", "SIZE[t=1]", "CHN[rel=equality]", "CHN[s=1,rel=nope]", "(PRMG", "PRMG)"] {
            assert!(matches!(parse_property(bad, &d), Err(Error::Parse(_))), "{bad}");
        }
    }

    #[test]
    fn chain_atom() {
        let d = dom();
        let p = parse_property("chn[s=1, rel=equality]", &d).unwrap();
        assert!(p.contains(&Database::from_values(vec![1, 2, 2], 2).unwrap()));
        assert!(!p.contains(&Database::empty(3, 2)));
    }
}
