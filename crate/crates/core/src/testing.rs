//! Test support: a reference interpreter that runs `while` loops directly,
//! and a seeded generator of random programs. The reference interpreter is
//! deliberately a separate walker from the production one — it is the oracle
//! the bounded-transform pipeline is checked against.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::bits::Bits;
use crate::jash::ast::{BinOp, Expr, IntLit, JashProgram, LoopBound, Stmt, UnOp};
use crate::jash::interp::eval_binop;
use crate::meta::JashMeta;

/// Outcome of a reference run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RefOutcome {
    pub res: Bits,
    /// True when some while loop was about to make its s-th condition check.
    pub dnf: bool,
}

/// Executes the pre-transform AST, counting condition checks per dynamic
/// while-loop instance. A loop reaching its s-th check reports "did not
/// finish" with the sentinel result — the same budget the bounded rewrite
/// enforces — so this terminates on every input.
pub fn reference_execute(prog: &JashProgram, meta: &JashMeta, arg: &Bits) -> RefOutcome {
    let mut machine = RefMachine {
        meta,
        arg,
        env: BTreeMap::new(),
        output: None,
        dnf: false,
    };
    machine.block(prog.statements());
    let m = usize::from(meta.m);
    let res = match machine.output {
        Some(v) => Bits::from_value(v, m).unwrap(),
        None => Bits::zeros(m).unwrap(),
    };
    RefOutcome {
        res,
        dnf: machine.dnf,
    }
}

enum RefFlow {
    Normal,
    Break,
    Halt,
}

struct RefMachine<'a> {
    meta: &'a JashMeta,
    arg: &'a Bits,
    env: BTreeMap<String, u64>,
    output: Option<u64>,
    dnf: bool,
}

impl RefMachine<'_> {
    fn block(&mut self, stmts: &[Stmt]) -> RefFlow {
        for stmt in stmts {
            match self.stmt(stmt) {
                RefFlow::Normal => {}
                other => return other,
            }
        }
        RefFlow::Normal
    }

    fn stmt(&mut self, stmt: &Stmt) -> RefFlow {
        match stmt {
            Stmt::Assign { target, value } => {
                let v = self.eval(value);
                self.env.insert(target.clone(), v);
                RefFlow::Normal
            }
            Stmt::If {
                cond,
                then_body,
                else_body,
            } => {
                if self.eval(cond) != 0 {
                    self.block(then_body)
                } else if let Some(else_body) = else_body {
                    self.block(else_body)
                } else {
                    RefFlow::Normal
                }
            }
            Stmt::For {
                var,
                init,
                bound,
                body,
            } => {
                let limit = match bound {
                    LoopBound::Literal(v) => *v,
                    LoopBound::S => self.meta.s,
                    LoopBound::N => u64::from(self.meta.n),
                };
                let mut counter = *init;
                while counter <= limit {
                    self.env.insert(var.clone(), counter);
                    match self.block(body) {
                        RefFlow::Normal => {}
                        RefFlow::Break => break,
                        RefFlow::Halt => return RefFlow::Halt,
                    }
                    match counter.checked_add(1) {
                        Some(next) => counter = next,
                        None => break,
                    }
                }
                RefFlow::Normal
            }
            Stmt::While { cond, body } => {
                let mut checks = 0u64;
                loop {
                    checks += 1;
                    if checks == self.meta.s {
                        self.output = Some(self.meta.dnf_sentinel.value());
                        self.dnf = true;
                        return RefFlow::Halt;
                    }
                    if self.eval(cond) == 0 {
                        break;
                    }
                    match self.block(body) {
                        RefFlow::Normal => {}
                        RefFlow::Break => break,
                        RefFlow::Halt => return RefFlow::Halt,
                    }
                }
                RefFlow::Normal
            }
            Stmt::Break => RefFlow::Break,
            Stmt::Output { value, .. } => {
                self.output = Some(self.eval(value));
                RefFlow::Halt
            }
        }
    }

    fn eval(&self, expr: &Expr) -> u64 {
        match expr {
            Expr::Lit(lit) => lit.value,
            Expr::Var(name) => self.env.get(name).copied().unwrap_or(0),
            Expr::S => self.meta.s,
            Expr::N => u64::from(self.meta.n),
            Expr::ArgVal => self.arg.value(),
            Expr::ArgBit(i) => self.arg.bit(self.eval(i)),
            Expr::Data(..) => 0, // generated programs carry no bundle
            Expr::Unary(UnOp::Not, x) => u64::from(self.eval(x) == 0),
            Expr::Binary(op, a, b) => eval_binop(*op, self.eval(a), self.eval(b)),
        }
    }
}

/// SplitMix64: a tiny deterministic stream for test generation.
#[derive(Debug, Clone)]
pub struct SplitMix64(pub u64);

impl SplitMix64 {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    pub fn below(&mut self, n: u64) -> u64 {
        self.next_u64() % n.max(1)
    }

    pub fn chance(&mut self, percent: u64) -> bool {
        self.below(100) < percent
    }
}

const VAR_POOL: [&str; 6] = ["a", "b", "c", "d", "x", "y"];

/// Generates a random program over the full statement grammar, def-before-use
/// clean, with at least one `while` candidate and a guaranteed trailing
/// output. Loop conditions mix countdowns that terminate within the cap and
/// arbitrary conditions that usually exhaust it.
pub fn generate_program(rng: &mut SplitMix64) -> JashProgram {
    let mut gen = Gen {
        rng,
        defined: Vec::new(),
        stmt_budget: 24,
    };
    let mut stmts = Vec::new();
    // Seed one or two variables so expressions have material.
    let first = gen.fresh_or_existing_var();
    stmts.push(Stmt::Assign {
        target: first,
        value: Expr::ArgVal,
    });
    let count = 2 + gen.rng.below(5);
    for _ in 0..count {
        if gen.stmt_budget == 0 {
            break;
        }
        let s = gen.stmt(0, false);
        stmts.push(s);
    }
    stmts.push(Stmt::Output {
        value: gen.expr(2),
        exit: gen.rng.chance(30),
    });
    JashProgram::from_statements(stmts)
}

struct Gen<'a> {
    rng: &'a mut SplitMix64,
    defined: Vec<String>,
    stmt_budget: u32,
}

impl Gen<'_> {
    fn fresh_or_existing_var(&mut self) -> String {
        let name = String::from(VAR_POOL[self.rng.below(VAR_POOL.len() as u64) as usize]);
        if !self.defined.contains(&name) {
            self.defined.push(name.clone());
        }
        name
    }

    fn defined_var(&mut self) -> Option<String> {
        if self.defined.is_empty() {
            return None;
        }
        let i = self.rng.below(self.defined.len() as u64) as usize;
        Some(self.defined[i].clone())
    }

    fn stmt(&mut self, depth: u32, in_loop: bool) -> Stmt {
        self.stmt_budget = self.stmt_budget.saturating_sub(1);
        let roll = self.rng.below(100);
        match roll {
            _ if self.stmt_budget == 0 => self.assign(),
            0..=39 => self.assign(),
            40..=59 if depth < 3 => self.if_stmt(depth, in_loop),
            60..=74 if depth < 3 => self.while_stmt(depth),
            75..=84 if depth < 3 => self.for_stmt(depth),
            85..=89 if in_loop => Stmt::Break,
            90..=95 => Stmt::Output {
                value: self.expr(2),
                exit: self.rng.chance(50),
            },
            _ => self.assign(),
        }
    }

    fn body(&mut self, depth: u32, in_loop: bool) -> Vec<Stmt> {
        let count = 1 + self.rng.below(3);
        (0..count).map(|_| self.stmt(depth + 1, in_loop)).collect()
    }

    fn assign(&mut self) -> Stmt {
        let value = self.expr(2);
        let target = self.fresh_or_existing_var();
        Stmt::Assign { target, value }
    }

    fn if_stmt(&mut self, depth: u32, in_loop: bool) -> Stmt {
        Stmt::If {
            cond: self.expr(2),
            then_body: self.body(depth, in_loop),
            else_body: if self.rng.chance(50) {
                Some(self.body(depth, in_loop))
            } else {
                None
            },
        }
    }

    fn while_stmt(&mut self, depth: u32) -> Stmt {
        if self.rng.chance(60) {
            // Countdown loop: terminates iff the start value fits the cap.
            let var = self.fresh_or_existing_var();
            let start = self.rng.below(16);
            let mut body = alloc::vec![Stmt::Assign {
                target: var.clone(),
                value: Expr::bin(BinOp::Sub, Expr::Var(var.clone()), Expr::lit(1)),
            }];
            if self.rng.chance(40) {
                body.push(self.stmt(depth + 1, true));
            }
            Stmt::While {
                cond: Expr::bin(BinOp::Ne, Expr::Var(var.clone()), Expr::lit(0)),
                body,
            }
            .prefixed_by_assign(var, start)
        } else {
            Stmt::While {
                cond: self.expr(1),
                body: self.body(depth, true),
            }
        }
    }

    fn for_stmt(&mut self, depth: u32) -> Stmt {
        let var = self.fresh_or_existing_var();
        let bound = match self.rng.below(3) {
            0 => LoopBound::Literal(1 + self.rng.below(8)),
            1 => LoopBound::S,
            _ => LoopBound::N,
        };
        Stmt::For {
            var,
            init: 1 + self.rng.below(3),
            bound,
            body: self.body(depth, true),
        }
    }

    fn expr(&mut self, depth: u32) -> Expr {
        if depth == 0 || self.rng.chance(40) {
            return self.atom();
        }
        match self.rng.below(10) {
            0 => Expr::not(self.expr(depth - 1)),
            1 => Expr::ArgBit(alloc::boxed::Box::new(self.expr(depth - 1))),
            _ => {
                let ops = [
                    BinOp::Add,
                    BinOp::Sub,
                    BinOp::Mul,
                    BinOp::Div,
                    BinOp::Rem,
                    BinOp::BitAnd,
                    BinOp::BitOr,
                    BinOp::BitXor,
                    BinOp::Shl,
                    BinOp::Shr,
                    BinOp::Eq,
                    BinOp::Ne,
                    BinOp::Lt,
                    BinOp::Le,
                    BinOp::Gt,
                    BinOp::Ge,
                ];
                let op = ops[self.rng.below(ops.len() as u64) as usize];
                Expr::bin(op, self.expr(depth - 1), self.expr(depth - 1))
            }
        }
    }

    fn atom(&mut self) -> Expr {
        match self.rng.below(6) {
            0 => Expr::ArgVal,
            1 => Expr::S,
            2 => Expr::N,
            3 => Expr::Lit(IntLit::dec(self.rng.below(64))),
            _ => match self.defined_var() {
                Some(v) => Expr::Var(v),
                None => Expr::Lit(IntLit::dec(self.rng.below(8))),
            },
        }
    }
}

trait PrefixedByAssign {
    fn prefixed_by_assign(self, var: String, value: u64) -> Stmt;
}

// A countdown while needs its counter seeded; wrap both in an `if (1)` so
// the generator can return a single statement.
impl PrefixedByAssign for Stmt {
    fn prefixed_by_assign(self, var: String, value: u64) -> Stmt {
        Stmt::If {
            cond: Expr::lit(1),
            then_body: alloc::vec![
                Stmt::Assign {
                    target: var,
                    value: Expr::lit(value),
                },
                self,
            ],
            else_body: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jash::parse;
    use crate::workloads;

    #[test]
    fn reference_matches_bundled_collatz_semantics() {
        let meta = workloads::collatz_meta(30);
        let prog = parse(workloads::UNBOUNDED_COLLATZ_SOURCE).unwrap();
        let arg = Bits::from_value(37, 16).unwrap();
        let out = reference_execute(&prog, &meta, &arg);
        assert_eq!(out.res.as_str(), "001");
        assert!(!out.dnf);

        let meta = workloads::collatz_meta(10);
        let out = reference_execute(&prog, &meta, &arg);
        assert_eq!(out.res.as_str(), "111");
        assert!(out.dnf);
    }

    #[test]
    fn reference_budget_counts_checks() {
        // 37 needs 21 body runs and a 22nd (false) check; the transform's
        // guard fires at the s-th check, so s = 23 is the threshold for the
        // plain while form.
        let prog = parse(workloads::UNBOUNDED_COLLATZ_SOURCE).unwrap();
        let arg = Bits::from_value(37, 16).unwrap();
        assert!(!reference_execute(&prog, &workloads::collatz_meta(23), &arg).dnf);
        assert!(reference_execute(&prog, &workloads::collatz_meta(22), &arg).dnf);
    }

    #[test]
    fn generated_programs_parse_and_round_trip() {
        let mut rng = SplitMix64(7);
        for _ in 0..50 {
            let prog = generate_program(&mut rng);
            let reparsed = parse(prog.source_text()).unwrap();
            assert_eq!(prog, reparsed);
        }
    }

    #[test]
    fn generator_is_deterministic() {
        let a = generate_program(&mut SplitMix64(99));
        let b = generate_program(&mut SplitMix64(99));
        assert_eq!(a, b);
    }
}
