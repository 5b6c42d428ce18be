//! `d`, `v`, `spec(P,..)`, `meet(e,..)`, `branches{B:e,..}`, `locals{M:e,..}`,
//! `transport(Q, e)`, `extend(e, T)`.

use std::collections::BTreeMap;
use std::sync::Arc;

use super::{StarError, StarExpr};
use crate::forest::SpectralForest;
use crate::ideal::Overring;

/// A parsed expression with the forest of the ring it acts on.
#[derive(Clone, Debug)]
pub struct Bound {
    pub expr: StarExpr,
    pub domain: Arc<SpectralForest>,
}

#[derive(Clone, Debug)]
enum Ast {
    D,
    V,
    Spec(Vec<String>),
    Meet(Vec<Ast>),
    Branches(Vec<(String, Ast)>),
    Locals(Vec<(String, Ast)>),
    Transport(String, Box<Ast>),
    Extend(Box<Ast>, String),
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, message: impl Into<String>) -> Result<T, StarError> {
        Err(StarError::Parse { pos: self.pos, message: message.into() })
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.src[self.pos..].chars().next() {
            if !c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn expect(&mut self, c: char) -> Result<(), StarError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected `{c}`"))
        }
    }

    fn ident(&mut self) -> Result<String, StarError> {
        self.skip_ws();
        let start = self.pos;
        for c in self.src[self.pos..].chars() {
            if c.is_alphanumeric() || matches!(c, '_' | '\'' | '.') {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
        if start == self.pos {
            return self.err("expected a name");
        }
        Ok(self.src[start..self.pos].to_string())
    }

    fn list<T>(&mut self, close: char, mut item: impl FnMut(&mut Self) -> Result<T, StarError>) -> Result<Vec<T>, StarError> {
        let mut out = Vec::new();
        if self.peek() == Some(close) {
            self.pos += 1;
            return Ok(out);
        }
        loop {
            out.push(item(self)?);
            match self.peek() {
                Some(',') => self.pos += 1,
                Some(c) if c == close => {
                    self.pos += 1;
                    return Ok(out);
                }
                _ => return self.err(format!("expected `,` or `{close}`")),
            }
        }
    }

    fn entry(&mut self) -> Result<(String, Ast), StarError> {
        let k = self.ident()?;
        self.expect(':')?;
        Ok((k, self.expr()?))
    }

    fn expr(&mut self) -> Result<Ast, StarError> {
        let head = self.ident()?;
        match head.as_str() {
            "d" => Ok(Ast::D),
            "v" => Ok(Ast::V),
            "spec" => {
                self.expect('(')?;
                Ok(Ast::Spec(self.list(')', Self::ident)?))
            }
            "meet" => {
                self.expect('(')?;
                let parts = self.list(')', Self::expr)?;
                if parts.is_empty() {
                    return self.err("meet() needs an argument");
                }
                Ok(Ast::Meet(parts))
            }
            "branches" | "locals" => {
                self.expect('{')?;
                let entries = self.list('}', Self::entry)?;
                Ok(if head == "branches" { Ast::Branches(entries) } else { Ast::Locals(entries) })
            }
            "transport" => {
                self.expect('(')?;
                let q = self.ident()?;
                self.expect(',')?;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(Ast::Transport(q, Box::new(e)))
            }
            "extend" => {
                self.expect('(')?;
                let e = self.expr()?;
                self.expect(',')?;
                let t = self.ident()?;
                self.expect(')')?;
                Ok(Ast::Extend(Box::new(e), t))
            }
            other => self.err(format!("unknown operation `{other}`")),
        }
    }
}

/// Parses and scope-checks an expression over the ring presented by `forest`.
/// A top-level `extend(e, T)` acts on the overring `T`.
pub fn parse_star(forest: &Arc<SpectralForest>, text: &str) -> Result<Bound, StarError> {
    let mut p = Parser { src: text, pos: 0 };
    let ast = p.expr()?;
    if p.peek().is_some() {
        return p.err("trailing input");
    }
    let bound = bind(&ast, forest, None)?;
    bound.expr.check_scope(&bound.domain)?;
    Ok(bound)
}

fn bind(ast: &Ast, forest: &Arc<SpectralForest>, parent: Option<&Arc<SpectralForest>>) -> Result<Bound, StarError> {
    let here = |expr| Ok(Bound { expr, domain: forest.clone() });
    match ast {
        Ast::D => here(StarExpr::Identity),
        Ast::V => here(StarExpr::Divisorial),
        Ast::Spec(names) => here(StarExpr::Spectral(names.clone())),
        Ast::Meet(parts) => {
            let mut list = Vec::new();
            let mut domain: Option<Arc<SpectralForest>> = None;
            for a in parts {
                let b = bind(a, forest, parent)?;
                if let Some(d) = &domain {
                    if **d != *b.domain {
                        return Err(StarError::Scope("meet() of operations on different rings".into()));
                    }
                }
                domain = Some(b.domain);
                list.push(b.expr);
            }
            Ok(Bound { expr: StarExpr::Meet(list), domain: domain.expect("nonempty") })
        }
        Ast::Branches(entries) | Ast::Locals(entries) => {
            let branches = matches!(ast, Ast::Branches(_));
            let mut map = BTreeMap::new();
            for (k, a) in entries {
                let p = forest.lookup(k)?;
                let t = if branches {
                    if forest.node(p).parent.is_some() {
                        return Err(StarError::Scope(format!("`{k}` is not a branch root")));
                    }
                    Overring::branch(forest.clone(), forest.branch_of(p))
                } else {
                    if !forest.is_leaf(p) {
                        return Err(StarError::Scope(format!("`{k}` is not maximal")));
                    }
                    Overring::localization(forest.clone(), p)
                };
                let b = bind(a, t.forest(), Some(forest))?;
                if *b.domain != **t.forest() {
                    return Err(StarError::Scope(format!("entry `{k}` acts on {}, expected {}", b.domain, t.forest())));
                }
                if map.insert(k.clone(), b.expr).is_some() {
                    return Err(StarError::Scope(format!("`{k}` listed twice")));
                }
            }
            here(if branches { StarExpr::BranchProduct(map) } else { StarExpr::LocalProduct(map) })
        }
        Ast::Transport(q, a) => {
            let above = Arc::new(forest.cut_branch(forest.lookup(q)?)?);
            let b = bind(a, &above, None)?;
            if *b.domain != *above {
                return Err(StarError::Scope(format!("transport({q}, ..) needs an operation on {above}")));
            }
            here(StarExpr::transport(q, b.expr))
        }
        Ast::Extend(a, t) => {
            let par = parent.unwrap_or(forest);
            let over = Overring::named(par.clone(), t)?;
            let b = bind(a, par, None)?;
            if *b.domain != **par {
                return Err(StarError::Scope(format!("extend(.., {t}) needs an operation on {par}")));
            }
            Ok(Bound { expr: StarExpr::extended(b.expr, par, t), domain: over.forest().clone() })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_through_display() {
        let f = Arc::new(SpectralForest::build(&[("P", None, "Z"), ("M1", Some("P"), "Q"), ("M2", Some("P"), "Z"), ("N", None, "Q")]));
        for text in ["d", "v", "meet(d,v)", "branches{N:v, P:d}", "locals{M1:v, M2:d}"] {
            let b = parse_star(&f, text).unwrap();
            assert_eq!(b.expr.to_string(), text);
            assert_eq!(*b.domain, *f);
        }
        let e = parse_star(&f, "extend(v, P)").unwrap();
        assert_eq!(e.domain.leaves().len(), 2);
        let nested = parse_star(&f, "branches{P:extend(v, P)}").unwrap();
        assert_eq!(nested.expr.to_string(), "branches{P:extend(v, P)}");
        assert!(parse_star(&f, "transport(P, v)").is_err());
        let tree = Arc::new(f.subtree(f.id("P").unwrap()));
        let t = parse_star(&tree, "transport(P, branches{M1:v, M2:d})").unwrap();
        assert_eq!(t.expr.to_string(), "transport(P, branches{M1:v, M2:d})");
        assert!(parse_star(&f, "meet(").is_err());
        assert!(parse_star(&f, "branches{M1:v}").is_err());
        assert!(parse_star(&f, "d v").is_err());
    }
}
