//! Export of closed forms as `name = expr;` assignment lines.

use thiserror::Error;

use crate::algebra::{close, eval_numeric, random_bindings, AlgebraError};
use crate::expr::{parse, print_with, Expr, ParseError, PrintStyle};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CodegenError {
    #[error("`{0}` is not a valid identifier")]
    BadName(String),
    #[error("line {line}: expected `name = expr;`")]
    Malformed { line: usize },
    #[error("line {line}: {source}")]
    Parse { line: usize, source: ParseError },
    #[error("`{name}` differs after reimport")]
    Mismatch { name: String },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

fn valid_name(s: &str) -> bool {
    let mut c = s.chars();
    c.next().is_some_and(|f| f.is_ascii_alphabetic() || f == '_') && c.all(|ch| ch.is_ascii_alphanumeric() || ch == '_')
}

pub fn emit_assignments(pairs: &[(String, Expr)]) -> Result<String, CodegenError> {
    let mut out = String::new();
    for (name, e) in pairs {
        if !valid_name(name) {
            return Err(CodegenError::BadName(name.clone()));
        }
        out.push_str(&format!("{name} = {};\n", print_with(e, PrintStyle::Spaced)));
    }
    Ok(out)
}

/// Parses emitted text back into `(name, expr)` pairs.
pub fn reimport(text: &str) -> Result<Vec<(String, Expr)>, CodegenError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let malformed = CodegenError::Malformed { line: i + 1 };
        let body = line.strip_suffix(';').ok_or(malformed.clone())?;
        let (name, rhs) = body.split_once('=').ok_or(malformed.clone())?;
        let name = name.trim();
        if !valid_name(name) {
            return Err(malformed);
        }
        let e = parse(rhs.trim()).map_err(|source| CodegenError::Parse { line: i + 1, source })?;
        out.push((name.to_string(), e));
    }
    Ok(out)
}

/// Emits, reimports and compares values at `trials` random bindings.
pub fn reimport_check(pairs: &[(String, Expr)], trials: usize, seed: u64, rel: f64) -> Result<Vec<(String, Expr)>, CodegenError> {
    let back = reimport(&emit_assignments(pairs)?)?;
    for ((name, orig), (name2, got)) in pairs.iter().zip(&back) {
        if name != name2 {
            return Err(CodegenError::Mismatch { name: name.clone() });
        }
        for b in random_bindings(&[orig, got], trials, seed) {
            let (x, y) = (eval_numeric(orig, &b)?, eval_numeric(got, &b)?);
            if !close(x, y, rel) {
                return Err(CodegenError::Mismatch { name: name.clone() });
            }
        }
    }
    if back.len() != pairs.len() {
        return Err(CodegenError::Mismatch { name: "<count>".into() });
    }
    Ok(back)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::normalize;

    fn pair(n: &str, e: &str) -> (String, Expr) {
        (n.to_string(), parse(e).unwrap())
    }

    #[test]
    fn examples() {
        assert_eq!(emit_assignments(&[pair("A", "Gamma1")]).unwrap(), "A = Gamma1;\n");
        let acent = normalize(&parse("-2*sqrt(2)").unwrap()).unwrap().to_expr();
        assert_eq!(emit_assignments(&[("Acent".into(), acent)]).unwrap(), "Acent = -2 * sqrt(2);\n");
        assert_eq!(emit_assignments(&[("z".into(), Expr::int(0))]).unwrap(), "z = 0;\n");
        assert!(emit_assignments(&[pair("1x", "1")]).is_err());
    }

    #[test]
    fn round_trips() {
        let pairs = vec![
            pair("A", "Gamma1"),
            pair("p21s", "(-x^3/12 + x/4)*kappa1 + (5*x^3/18 - 5*x/72)*Gamma1^2 + x^3/4 + 3*x/4"),
            pair("k", "-sqrt(kappa1 + 2)/(kappa1 + 2)^2 + exp(-mu^2/2) * Phi(lambda/sigma) - phi(2*mu)"),
        ];
        let back = reimport_check(&pairs, 20, 5, 1e-12).unwrap();
        assert_eq!(back.len(), 3);
    }

    #[test]
    fn rejects_garbage() {
        assert!(matches!(reimport("A = 1"), Err(CodegenError::Malformed { line: 1 })));
        assert!(matches!(reimport("A = (1;"), Err(CodegenError::Parse { .. })));
        assert!(reimport("\nA = 1;\n\n").is_ok());
    }
}
