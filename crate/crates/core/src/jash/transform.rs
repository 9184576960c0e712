//! Rewrites unbounded `while` loops into bounded `for` loops.
//!
//! Each `while (cond) { body }` becomes
//!
//! ```text
//! for (w = 1; w <= s; w++) {
//!     if (w == s) { output <dnf_sentinel> exit }
//!     if (!(cond)) { break }
//!     body
//! }
//! ```
//!
//! with a fresh loop variable `w` that appears nowhere in the program. The
//! sentinel guard fires on the loop's s-th entry, so a rewritten loop checks
//! its condition at most s−1 times before reporting "did not finish".

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use super::ast::{BinOp, Expr, IntLit, JashProgram, LoopBound, Stmt};
use crate::meta::JashMeta;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TransformError {
    #[error("could not find a fresh loop variable after {0} attempts")]
    FreshVariableExhausted(u32),
}

const FRESH_ATTEMPTS: u32 = 1 << 16;

/// Returns a program with no `while` nodes; already-bounded statements are
/// unchanged. Programs without `while` loops come back structurally
/// identical.
pub fn transform_bounded(
    prog: &JashProgram,
    meta: &JashMeta,
) -> Result<JashProgram, TransformError> {
    let mut ctx = Ctx {
        used: collect_identifiers(prog.statements()),
        next_fresh: 0,
        sentinel: IntLit::bin(meta.dnf_sentinel.value(), meta.m),
    };
    let statements = ctx.rewrite_block(prog.statements())?;
    Ok(JashProgram::from_statements(statements))
}

struct Ctx {
    used: BTreeSet<String>,
    next_fresh: u32,
    sentinel: IntLit,
}

impl Ctx {
    fn fresh_var(&mut self) -> Result<String, TransformError> {
        for _ in 0..FRESH_ATTEMPTS {
            let name = alloc::format!("_w{}", self.next_fresh);
            self.next_fresh = self.next_fresh.wrapping_add(1);
            if self.used.insert(name.clone()) {
                return Ok(name);
            }
        }
        Err(TransformError::FreshVariableExhausted(FRESH_ATTEMPTS))
    }

    fn rewrite_block(&mut self, stmts: &[Stmt]) -> Result<Vec<Stmt>, TransformError> {
        let mut out = Vec::with_capacity(stmts.len());
        for stmt in stmts {
            out.push(self.rewrite_stmt(stmt)?);
        }
        Ok(out)
    }

    fn rewrite_stmt(&mut self, stmt: &Stmt) -> Result<Stmt, TransformError> {
        Ok(match stmt {
            Stmt::While { cond, body } => {
                let var = self.fresh_var()?;
                let body = self.rewrite_block(body)?;
                let mut for_body = Vec::with_capacity(body.len() + 2);
                for_body.push(Stmt::If {
                    cond: Expr::bin(BinOp::Eq, Expr::var(&var), Expr::S),
                    then_body: alloc::vec![Stmt::Output {
                        value: Expr::Lit(self.sentinel),
                        exit: true,
                    }],
                    else_body: None,
                });
                for_body.push(Stmt::If {
                    cond: Expr::not(cond.clone()),
                    then_body: alloc::vec![Stmt::Break],
                    else_body: None,
                });
                for_body.extend(body);
                Stmt::For {
                    var,
                    init: 1,
                    bound: LoopBound::S,
                    body: for_body,
                }
            }
            Stmt::For {
                var,
                init,
                bound,
                body,
            } => Stmt::For {
                var: var.clone(),
                init: *init,
                bound: *bound,
                body: self.rewrite_block(body)?,
            },
            Stmt::If {
                cond,
                then_body,
                else_body,
            } => Stmt::If {
                cond: cond.clone(),
                then_body: self.rewrite_block(then_body)?,
                else_body: match else_body {
                    Some(b) => Some(self.rewrite_block(b)?),
                    None => None,
                },
            },
            other => other.clone(),
        })
    }
}

fn collect_identifiers(stmts: &[Stmt]) -> BTreeSet<String> {
    let mut used = BTreeSet::new();
    fn walk_expr(e: &Expr, used: &mut BTreeSet<String>) {
        match e {
            Expr::Var(name) => {
                used.insert(name.clone());
            }
            Expr::ArgBit(i) => walk_expr(i, used),
            Expr::Data(a, b) => {
                walk_expr(a, used);
                walk_expr(b, used);
            }
            Expr::Unary(_, x) => walk_expr(x, used),
            Expr::Binary(_, a, b) => {
                walk_expr(a, used);
                walk_expr(b, used);
            }
            _ => {}
        }
    }
    fn walk(stmts: &[Stmt], used: &mut BTreeSet<String>) {
        for stmt in stmts {
            match stmt {
                Stmt::Assign { target, value } => {
                    used.insert(target.clone());
                    walk_expr(value, used);
                }
                Stmt::If {
                    cond,
                    then_body,
                    else_body,
                } => {
                    walk_expr(cond, used);
                    walk(then_body, used);
                    if let Some(e) = else_body {
                        walk(e, used);
                    }
                }
                Stmt::For {
                    var, bound: _, body, ..
                } => {
                    used.insert(var.clone());
                    walk(body, used);
                }
                Stmt::While { cond, body } => {
                    walk_expr(cond, used);
                    walk(body, used);
                }
                Stmt::Output { value, .. } => walk_expr(value, used),
                Stmt::Break => {}
            }
        }
    }
    walk(stmts, &mut used);
    used
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jash::parser::parse;
    use crate::jash::validate::validate;
    use crate::workloads;

    #[test]
    fn collatz_while_becomes_bounded_for() {
        let (_, meta) = workloads::make_collatz_jash(30);
        let prog = parse(workloads::UNBOUNDED_COLLATZ_SOURCE).unwrap();
        let bounded = transform_bounded(&prog, &meta).unwrap();
        assert!(validate(&bounded, &meta).is_ok());
        let expected = parse(
            "b = argval\n\
             for (_w0 = 1; _w0 <= s; _w0++) {\n\
                 if (_w0 == s) { output 0b111 exit }\n\
                 if (!(b != 1)) { break }\n\
                 if (b % 2 == 0) { b = b / 2 } else { b = 3 * b + 1 }\n\
             }\n\
             output 0b001\n",
        )
        .unwrap();
        assert_eq!(bounded, expected);
    }

    #[test]
    fn programs_without_while_are_unchanged() {
        let (prog, meta) = workloads::make_collatz_jash(30);
        let out = transform_bounded(&prog, &meta).unwrap();
        assert_eq!(out, prog);
        assert_eq!(out.source_text(), prog.source_text());
    }

    #[test]
    fn fresh_variables_avoid_user_names() {
        let (_, meta) = workloads::make_collatz_jash(5);
        let src = "_w0 = 1\n_w2 = 2\nwhile (_w0 != 0) { _w0 = _w0 - 1 }\noutput _w2";
        let prog = parse(src).unwrap();
        let bounded = transform_bounded(&prog, &meta).unwrap();
        let Stmt::For { var, .. } = &bounded.statements()[2] else {
            panic!("expected a for loop");
        };
        assert_eq!(var, "_w1");
    }

    #[test]
    fn nested_whiles_each_get_a_guard() {
        let (_, meta) = workloads::make_collatz_jash(5);
        let src = "a = 2\nwhile (a != 0) {\n    b = 2\n    while (b != 0) { b = b - 1 }\n    a = a - 1\n}\noutput a";
        let prog = parse(src).unwrap();
        let bounded = transform_bounded(&prog, &meta).unwrap();
        assert!(validate(&bounded, &meta).is_ok());
        let printed = bounded.source_text();
        assert_eq!(printed.matches("if (_w").count(), 2);
        assert_eq!(printed.matches("<= s;").count(), 2);
    }
}
