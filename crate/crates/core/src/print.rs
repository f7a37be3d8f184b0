//! Pretty printer. Uses minimal parentheses and lists bag elements in
//! canonical order, so the output parses back to an alpha-equal value.

use crate::canon::{canonical_term, elem_order};
use crate::sum::Sum;
use crate::syntax::{Bag, Expression, LambdaTerm, Name, Term};

pub fn print_term(t: &Term) -> String {
    let mut out = String::new();
    term(t, &mut Vec::new(), &mut out);
    out
}

pub fn print_bag(p: &Bag) -> String {
    let mut out = String::new();
    bag(p, &mut Vec::new(), &mut out);
    out
}

pub fn print_expression(e: &Expression) -> String {
    match e {
        Expression::Term(t) => print_term(t),
        Expression::Bag(p) => print_bag(p),
    }
}

pub fn print_sum(s: &Sum<Term>) -> String {
    s.to_string()
}

/// Prints the named canonical representative: alpha-equivalent inputs give
/// identical strings.
pub fn print_canonical(t: &Term) -> String {
    print_term(&canonical_term(t))
}

pub fn print_lambda(t: &LambdaTerm) -> String {
    match t {
        LambdaTerm::Var(x) => x.to_string(),
        LambdaTerm::Abs(..) => {
            let mut names = Vec::new();
            let mut b = t;
            while let LambdaTerm::Abs(x, body) = b {
                names.push(x.as_str());
                b = body;
            }
            format!("\\{}.{}", names.join(" "), print_lambda(b))
        }
        LambdaTerm::App(f, a) => {
            let fs = match **f {
                LambdaTerm::Abs(..) => format!("({})", print_lambda(f)),
                _ => print_lambda(f),
            };
            let as_ = match **a {
                LambdaTerm::Var(_) => print_lambda(a),
                _ => format!("({})", print_lambda(a)),
            };
            format!("{fs} {as_}")
        }
    }
}

fn term<'a>(t: &'a Term, env: &mut Vec<&'a Name>, out: &mut String) {
    match t {
        Term::Var(x) => out.push_str(x.as_str()),
        Term::Abs(..) => {
            out.push('\\');
            let mut b = t;
            let mut pushed = 0;
            while let Term::Abs(x, body) = b {
                if pushed > 0 {
                    out.push(' ');
                }
                out.push_str(x.as_str());
                env.push(x);
                pushed += 1;
                b = body;
            }
            out.push('.');
            term(b, env, out);
            env.truncate(env.len() - pushed);
        }
        Term::App(f, p, _) => {
            if f.is_abs() {
                out.push('(');
                term(f, env, out);
                out.push(')');
            } else {
                term(f, env, out);
            }
            if p.is_empty() {
                out.push_str(" 1");
            } else {
                bag(p, env, out);
            }
        }
    }
}

fn bag<'a>(p: &'a Bag, env: &mut Vec<&'a Name>, out: &mut String) {
    if p.is_empty() {
        out.push('1');
        return;
    }
    out.push('[');
    for (k, i) in elem_order(p, env).into_iter().enumerate() {
        if k > 0 {
            out.push_str(", ");
        }
        let e = &p.elems()[i];
        if e.res.is_reusable() {
            out.push('!');
        }
        term(e.res.content(), env, out);
    }
    out.push(']');
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_lambda, parse_term};

    #[test]
    fn basic_forms() {
        assert_eq!(print_term(&Term::abs("x", Term::var("x"))), "\\x.x");
        assert_eq!(print_bag(&Bag::empty()), "1");
        assert_eq!(Sum::<Term>::zero().to_string(), "0");
        assert_eq!(print_term(&parse_term("(\\x.x)1").unwrap()), "(\\x.x) 1");
        assert_eq!(print_term(&parse_term("x 1 [a]").unwrap()), "x 1[a]");
    }

    #[test]
    fn minimal_parentheses() {
        let t = parse_term("(\\x y.(y [(\\z.z) 1]))[!(w[!a]), b]").unwrap();
        assert_eq!(print_term(&t), "(\\x y.y[(\\z.z) 1])[!w[!a], b]");
    }

    #[test]
    fn lambda_printing() {
        let t = parse_lambda("(\\x.x x) (f y)").unwrap();
        assert_eq!(print_lambda(&t), "(\\x.x x) (f y)");
        assert_eq!(parse_lambda(&print_lambda(&t)).unwrap(), t);
    }
}
