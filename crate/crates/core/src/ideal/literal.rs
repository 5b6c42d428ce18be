//! Text forms: `R`, `K`, `max:M`, `prime:P`, `loc:P`, or per-leaf entries
//! `M1: >= (0,1) @level 2; M2: > (0)`. Leaves left out default to `R`.

use std::sync::Arc;

use super::{IdealError, IdealFamily, PrincipalWitness};
use crate::forest::SpectralForest;
use crate::ordgroups::{parse_scalar, Cut, ValueVector};

fn err(msg: impl Into<String>) -> IdealError {
    IdealError::Parse(msg.into())
}

pub fn parse_ideal(forest: &Arc<SpectralForest>, text: &str) -> Result<IdealFamily, IdealError> {
    let t = text.trim();
    match t {
        "R" => return Ok(IdealFamily::unit(forest)),
        "K" => return Ok(IdealFamily::full(forest)),
        _ => {}
    }
    for (prefix, build) in [
        ("max:", IdealFamily::prime as fn(&Arc<SpectralForest>, _) -> IdealFamily),
        ("prime:", IdealFamily::prime),
        ("loc:", IdealFamily::localization),
    ] {
        if let Some(name) = t.strip_prefix(prefix) {
            let p = forest.lookup(name.trim())?;
            if prefix == "max:" && !forest.is_leaf(p) {
                return Err(err(format!("`{name}` is not maximal")));
            }
            return Ok(build(forest, p));
        }
    }
    let mut cuts: Vec<Cut> = forest.leaves().iter().map(|&l| Cut::unit(forest.depth(l))).collect();
    for entry in t.split(';').map(str::trim).filter(|e| !e.is_empty()) {
        let (name, body) = entry.split_once(':').ok_or_else(|| err(format!("missing `:` in `{entry}`")))?;
        let leaf = forest.lookup(name.trim())?;
        let idx = forest.leaf_index(leaf).ok_or_else(|| err(format!("`{}` is not maximal", name.trim())))?;
        cuts[idx] = parse_cut(body.trim(), forest.depth(leaf))?;
    }
    IdealFamily::new(forest.clone(), cuts)
}

fn parse_cut(body: &str, depth: usize) -> Result<Cut, IdealError> {
    match body {
        "K" => return Ok(Cut::Full),
        "R" => return Ok(Cut::unit(depth)),
        _ => {}
    }
    let (closed, rest) = if let Some(r) = body.strip_prefix(">=") {
        (true, r)
    } else if let Some(r) = body.strip_prefix('>') {
        (false, r)
    } else {
        return Err(err(format!("expected `>=` or `>` in `{body}`")));
    };
    let (pivot, rest) = parse_tuple(rest.trim())?;
    let rest = rest.trim();
    let level = if rest.is_empty() {
        pivot.len()
    } else {
        let l = rest
            .strip_prefix("@level")
            .ok_or_else(|| err(format!("unexpected `{rest}`")))?
            .trim()
            .parse::<usize>()
            .map_err(|_| err(format!("bad level in `{rest}`")))?;
        if l == 0 || l > pivot.len() {
            return Err(err(format!("level {l} outside 1..={}", pivot.len())));
        }
        if pivot.0[l..].iter().any(|x| !x.is_zero()) {
            return Err(err("pivot components past the level must be zero"));
        }
        l
    };
    if level > depth {
        return Err(err(format!("level {level} exceeds depth {depth}")));
    }
    Ok(Cut::Bounded { pivot: pivot.truncate(level), closed })
}

fn parse_tuple(s: &str) -> Result<(ValueVector, &str), IdealError> {
    let inner_start = s.strip_prefix('(').ok_or_else(|| err(format!("expected `(` in `{s}`")))?;
    let mut depth = 1;
    let mut end = None;
    for (i, ch) in inner_start.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth == 0 {
                    end = Some(i);
                    break;
                }
            }
            _ => {}
        }
    }
    let end = end.ok_or_else(|| err("unbalanced parentheses"))?;
    let comps = inner_start[..end]
        .split(',')
        .map(|c| parse_scalar(c).ok_or_else(|| err(format!("bad number `{}`", c.trim()))))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((ValueVector(comps), &inner_start[end + 1..]))
}

/// `M1=(1,2); M2=(1,0)`: values of an element at maximal ideals; unlisted primes get 0.
pub fn parse_witness(forest: &Arc<SpectralForest>, text: &str) -> Result<PrincipalWitness, IdealError> {
    let mut values = Vec::new();
    for entry in text.split(';').map(str::trim).filter(|e| !e.is_empty()) {
        let (name, body) = entry.split_once('=').ok_or_else(|| err(format!("missing `=` in `{entry}`")))?;
        let p = forest.lookup(name.trim())?;
        let (v, rest) = parse_tuple(body.trim())?;
        if !rest.trim().is_empty() {
            return Err(err(format!("trailing `{rest}`")));
        }
        values.push((p, v));
    }
    PrincipalWitness::from_leaf_values(forest.clone(), &values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_round_trip() {
        let f = Arc::new(SpectralForest::build(&[
            ("P", None, "Z"),
            ("M1", Some("P"), "Z+Z*sqrt(2)"),
            ("M2", Some("P"), "Z"),
        ]));
        let i = parse_ideal(&f, "M1: > (1,1-sqrt(2)); M2: >= (1) @level 1").unwrap();
        assert_eq!(parse_ideal(&f, &i.to_string()).unwrap(), i);
        assert_eq!(parse_ideal(&f, "R").unwrap().to_string(), "M1: >= (0,0) @level 2; M2: >= (0,0) @level 2");
        assert_eq!(parse_ideal(&f, "M2: > (0,0)").unwrap().cut_named("M2").unwrap().to_string(), ">= (0,1) @level 2");
        assert!(parse_ideal(&f, "M3: >= (0)").is_err());
        assert!(parse_ideal(&f, "M1: >= (0,1) @level 1").is_err());
        assert!(parse_ideal(&f, "max:P").is_err());
    }

    #[test]
    fn witnesses_must_agree_on_shared_primes() {
        let f = Arc::new(SpectralForest::build(&[("P", None, "Z"), ("M1", Some("P"), "Q"), ("M2", Some("P"), "Z")]));
        assert!(parse_witness(&f, "M1=(1,1/2); M2=(1,4)").is_ok());
        assert!(parse_witness(&f, "M1=(1,1/2); M2=(2,4)").is_err());
    }
}
