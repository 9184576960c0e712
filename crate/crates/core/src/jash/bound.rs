//! Static worst-case step bound, computed at review time.
//!
//! Step accounting: executing any statement node costs 1 step, and each
//! entered for-loop iteration charges 1 extra step for the header; expression
//! evaluation is free. The bound is computed recursively:
//!
//! - sequence: sum of its statements' bounds
//! - `if`/`else`: 1 + max of the branch bounds
//! - `for` with bound B: 1 + B·(1 + body bound)
//!
//! `s` comes from the meta; the symbol `n` is substituted at its maximum
//! of 63 so the bound covers every permissible arg width. Loop starts are
//! at least 1 (the parser enforces this), so a loop with bound B enters at
//! most B iterations and the formula is a true upper bound, exact for loops
//! starting at 1. The minimum bound is 1 even for an empty program.

use crate::bits::MAX_WIDTH;
use crate::meta::JashMeta;

use super::ast::{JashProgram, LoopBound, Stmt};

/// Statically guaranteed execution ceiling of a validated program.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct ComplexityBound {
    /// Upper bound on interpreter steps, with `n` at its maximum of 63.
    pub worst_case_steps: u128,
    /// Max nesting depth counting only n-bounded loops: the exponent `c`
    /// of the program's O(n^c) guarantee.
    pub degree_c: u32,
}

pub fn complexity_bound(prog: &JashProgram, meta: &JashMeta) -> ComplexityBound {
    let worst_case_steps = seq_bound(prog.statements(), meta).max(1);
    let degree_c = n_loop_depth(prog.statements());
    ComplexityBound {
        worst_case_steps,
        degree_c,
    }
}

fn seq_bound(stmts: &[Stmt], meta: &JashMeta) -> u128 {
    stmts
        .iter()
        .map(|stmt| stmt_bound(stmt, meta))
        .fold(0u128, u128::saturating_add)
}

fn stmt_bound(stmt: &Stmt, meta: &JashMeta) -> u128 {
    match stmt {
        Stmt::Assign { .. } | Stmt::Break | Stmt::Output { .. } => 1,
        Stmt::If {
            then_body,
            else_body,
            ..
        } => 1u128.saturating_add(
            seq_bound(then_body, meta).max(else_body.as_deref().map_or(0, |b| seq_bound(b, meta))),
        ),
        Stmt::For { bound, body, .. } => {
            let iterations = u128::from(match bound {
                LoopBound::Literal(v) => *v,
                LoopBound::S => meta.s,
                LoopBound::N => MAX_WIDTH as u64,
            });
            let per_iteration = 1u128.saturating_add(seq_bound(body, meta));
            1u128.saturating_add(iterations.saturating_mul(per_iteration))
        }
        // Unreachable for validated programs; saturate so the budget check
        // can never pass for an unbounded loop that slipped through.
        Stmt::While { .. } => u128::MAX,
    }
}

fn n_loop_depth(stmts: &[Stmt]) -> u32 {
    stmts
        .iter()
        .map(|stmt| match stmt {
            Stmt::For { bound, body, .. } => {
                let own = u32::from(matches!(bound, LoopBound::N));
                own + n_loop_depth(body)
            }
            Stmt::While { body, .. } => n_loop_depth(body),
            Stmt::If {
                then_body,
                else_body,
                ..
            } => n_loop_depth(then_body)
                .max(else_body.as_deref().map_or(0, n_loop_depth)),
            _ => 0,
        })
        .max()
        .unwrap_or(0)
}
