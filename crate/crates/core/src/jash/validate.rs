//! Static checks that make a parsed program publishable: no unbounded
//! constructs, loop bounds within the meta's cap, and a result on some path.

use alloc::vec::Vec;
use core::fmt;

use super::ast::{JashProgram, LoopBound, Stmt};
use crate::meta::JashMeta;

/// Deepest permitted loop nesting.
pub const MAX_LOOP_NESTING: usize = 8;
/// Largest permitted program, counting statement nodes recursively.
pub const MAX_STATEMENTS: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Violation {
    #[error("WhileForbidden: while loops are not allowed; rewrite as a bounded for loop")]
    WhileForbidden,
    #[error("BoundExceedsS: for-loop literal bound {bound} exceeds the loop cap s = {s}")]
    BoundExceedsS { bound: u64, s: u64 },
    #[error("NoOutput: the program contains no output statement")]
    NoOutput,
    #[error("LoopNestingTooDeep: loops nest {depth} deep, the maximum is {MAX_LOOP_NESTING}")]
    LoopNestingTooDeep { depth: usize },
    #[error("ProgramTooLarge: {statements} statements, the maximum is {MAX_STATEMENTS}")]
    ProgramTooLarge { statements: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return f.write_str("ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Never fails on a well-formed AST; problems come back as violations.
pub fn validate(prog: &JashProgram, meta: &JashMeta) -> ValidationReport {
    let mut report = ValidationReport::default();

    let statements = prog.statement_count();
    if statements > MAX_STATEMENTS {
        report
            .violations
            .push(Violation::ProgramTooLarge { statements });
    }

    let mut saw_output = false;
    let mut max_depth = 0;
    scan(prog.statements(), meta, 0, &mut saw_output, &mut max_depth, &mut report);

    if max_depth > MAX_LOOP_NESTING {
        report
            .violations
            .push(Violation::LoopNestingTooDeep { depth: max_depth });
    }
    if !saw_output {
        report.violations.push(Violation::NoOutput);
    }
    report
}

fn scan(
    stmts: &[Stmt],
    meta: &JashMeta,
    loop_depth: usize,
    saw_output: &mut bool,
    max_depth: &mut usize,
    report: &mut ValidationReport,
) {
    for stmt in stmts {
        match stmt {
            Stmt::While { body, .. } => {
                report.violations.push(Violation::WhileForbidden);
                scan(body, meta, loop_depth + 1, saw_output, max_depth, report);
                *max_depth = (*max_depth).max(loop_depth + 1);
            }
            Stmt::For { bound, body, .. } => {
                if let LoopBound::Literal(bound) = bound {
                    if *bound > meta.s {
                        report.violations.push(Violation::BoundExceedsS {
                            bound: *bound,
                            s: meta.s,
                        });
                    }
                }
                scan(body, meta, loop_depth + 1, saw_output, max_depth, report);
                *max_depth = (*max_depth).max(loop_depth + 1);
            }
            Stmt::If {
                then_body,
                else_body,
                ..
            } => {
                scan(then_body, meta, loop_depth, saw_output, max_depth, report);
                if let Some(else_body) = else_body {
                    scan(else_body, meta, loop_depth, saw_output, max_depth, report);
                }
            }
            Stmt::Output { .. } => *saw_output = true,
            Stmt::Assign { .. } | Stmt::Break => {}
        }
    }
}
