//! Deterministic interpreter for validated jash programs.
//!
//! Semantics are total: every expression evaluates to a `u64` with wrapping
//! arithmetic, `x / 0 = 0` and `x % 0 = 0`, shifts of 64 or more produce 0,
//! comparisons and `!` yield 1 or 0, and reading a variable no assignment has
//! reached yet yields 0. `output` ends execution immediately; the first (and
//! therefore only) executed output determines `res`. A program that ends
//! without output produces the all-zeros result.
//!
//! A for loop's counter is owned by the loop: the header rebinds the loop
//! variable on every entered iteration, so assignments to it inside the body
//! affect reads but never the iteration count. Combined with the parser's
//! `init ≥ 1` rule this caps every loop at its declared bound, which is what
//! makes the static step bound sound.
//!
//! Step accounting matches the bound module: 1 step per executed statement
//! plus 1 per entered for-loop iteration.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use super::ast::{BinOp, Expr, JashProgram, LoopBound, Stmt, UnOp};
use super::bound::complexity_bound;
use crate::bits::Bits;
use crate::digest::Digest;
use crate::meta::{window_range, JashMeta};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DataError {
    #[error("no data bundle is available but the meta names one")]
    MissingBundle,
    #[error("window for arg value {arg_value} ({record_size}-byte records) is outside the {bundle_len}-byte bundle")]
    WindowOutOfRange {
        arg_value: u64,
        record_size: u32,
        bundle_len: u64,
    },
    #[error("data bundle digest {actual} does not match the meta's {expected}")]
    ChecksumMismatch { expected: Digest, actual: Digest },
}

/// Supplies the per-arg slice of the data bundle during execution.
pub trait DataWindowProvider {
    fn window(&self, arg_value: u64) -> Result<Option<Vec<u8>>, DataError>;
}

/// Provider for jashes without a data bundle.
pub struct NoData;

impl DataWindowProvider for NoData {
    fn window(&self, _arg_value: u64) -> Result<Option<Vec<u8>>, DataError> {
        Ok(None)
    }
}

/// In-memory bundle sliced per the meta's record size; with no record size
/// every arg sees the whole bundle.
pub struct BundleWindows<'a> {
    pub bytes: &'a [u8],
    pub record_size: Option<u32>,
}

impl DataWindowProvider for BundleWindows<'_> {
    fn window(&self, arg_value: u64) -> Result<Option<Vec<u8>>, DataError> {
        match self.record_size {
            None => Ok(Some(self.bytes.to_vec())),
            Some(record_size) => {
                let (start, end) = window_range(arg_value, record_size, self.bytes.len() as u64)
                    .ok_or(DataError::WindowOutOfRange {
                        arg_value,
                        record_size,
                        bundle_len: self.bytes.len() as u64,
                    })?;
                Ok(Some(self.bytes[start as usize..end as usize].to_vec()))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExecError {
    #[error("arg is {got} bits, the meta requires n = {expected}")]
    ArgWidthMismatch { expected: u8, got: usize },
    #[error("arg value {value} exceeds max_arg = {max_arg}")]
    ArgAboveMax { value: u64, max_arg: u64 },
    #[error("execution exceeded the static step bound; the bound computation is buggy")]
    StepBudgetExceeded,
    #[error("program contains a statement the interpreter does not run (validate first)")]
    UnsupportedStatement,
    #[error(transparent)]
    Data(#[from] DataError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HaltReason {
    OutputStmt,
    EndOfProgram,
    Sentinel,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecResult {
    pub res: Bits,
    pub steps_used: u64,
    pub halted_by: HaltReason,
}

/// Runs a validated program on one arg. Deterministic: identical inputs
/// produce bit-identical results.
pub fn execute(
    prog: &JashProgram,
    meta: &JashMeta,
    arg: &Bits,
    data: &dyn DataWindowProvider,
) -> Result<ExecResult, ExecError> {
    check_arg(meta, arg)?;
    let budget = complexity_bound(prog, meta).worst_case_steps;
    let window = data.window(arg.value())?;

    let mut machine = Machine {
        meta,
        arg,
        arg_value: arg.value(),
        window,
        env: BTreeMap::new(),
        steps: 0,
        budget,
        output: None,
    };
    let flow = machine.run_block(prog.statements())?;
    debug_assert!(matches!(flow, Flow::Normal | Flow::Halt));

    let m = usize::from(meta.m);
    let (res, halted_by) = match machine.output {
        Some(value) => {
            let res = Bits::from_value(value, m).expect("meta m validated");
            let reason = if res == meta.dnf_sentinel {
                HaltReason::Sentinel
            } else {
                HaltReason::OutputStmt
            };
            (res, reason)
        }
        None => (
            Bits::zeros(m).expect("meta m validated"),
            HaltReason::EndOfProgram,
        ),
    };
    Ok(ExecResult {
        res,
        steps_used: machine.steps,
        halted_by,
    })
}

pub(crate) fn check_arg(meta: &JashMeta, arg: &Bits) -> Result<(), ExecError> {
    if arg.len() != usize::from(meta.n) {
        return Err(ExecError::ArgWidthMismatch {
            expected: meta.n,
            got: arg.len(),
        });
    }
    if let Some(max_arg) = meta.max_arg {
        if arg.value() > max_arg {
            return Err(ExecError::ArgAboveMax {
                value: arg.value(),
                max_arg,
            });
        }
    }
    Ok(())
}

enum Flow {
    Normal,
    Break,
    Halt,
}

struct Machine<'a> {
    meta: &'a JashMeta,
    arg: &'a Bits,
    arg_value: u64,
    window: Option<Vec<u8>>,
    env: BTreeMap<String, u64>,
    steps: u64,
    budget: u128,
    output: Option<u64>,
}

impl Machine<'_> {
    fn charge(&mut self) -> Result<(), ExecError> {
        self.steps += 1;
        if u128::from(self.steps) > self.budget {
            return Err(ExecError::StepBudgetExceeded);
        }
        Ok(())
    }

    fn run_block(&mut self, stmts: &[Stmt]) -> Result<Flow, ExecError> {
        for stmt in stmts {
            match self.run_stmt(stmt)? {
                Flow::Normal => {}
                other => return Ok(other),
            }
        }
        Ok(Flow::Normal)
    }

    fn run_stmt(&mut self, stmt: &Stmt) -> Result<Flow, ExecError> {
        self.charge()?;
        match stmt {
            Stmt::Assign { target, value } => {
                let v = self.eval(value);
                self.env.insert(target.clone(), v);
                Ok(Flow::Normal)
            }
            Stmt::If {
                cond,
                then_body,
                else_body,
            } => {
                if self.eval(cond) != 0 {
                    self.run_block(then_body)
                } else if let Some(else_body) = else_body {
                    self.run_block(else_body)
                } else {
                    Ok(Flow::Normal)
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
                    self.charge()?; // header evaluation for this iteration
                    self.env.insert(var.clone(), counter);
                    match self.run_block(body)? {
                        Flow::Normal => {}
                        Flow::Break => break,
                        Flow::Halt => return Ok(Flow::Halt),
                    }
                    match counter.checked_add(1) {
                        Some(next) => counter = next,
                        None => break,
                    }
                }
                Ok(Flow::Normal)
            }
            Stmt::While { .. } => Err(ExecError::UnsupportedStatement),
            // A break outside any loop ends the program.
            Stmt::Break => Ok(Flow::Break),
            Stmt::Output { value, .. } => {
                self.output = Some(self.eval(value));
                Ok(Flow::Halt)
            }
        }
    }

    fn eval(&self, expr: &Expr) -> u64 {
        match expr {
            Expr::Lit(lit) => lit.value,
            Expr::Var(name) => self.env.get(name).copied().unwrap_or(0),
            Expr::S => self.meta.s,
            Expr::N => u64::from(self.meta.n),
            Expr::ArgVal => self.arg_value,
            Expr::ArgBit(i) => self.arg.bit(self.eval(i)),
            Expr::Data(offset, len) => {
                let offset = self.eval(offset);
                let len = self.eval(len).min(8);
                data_value(self.window.as_deref(), offset, len)
            }
            Expr::Unary(UnOp::Not, operand) => u64::from(self.eval(operand) == 0),
            Expr::Binary(op, lhs, rhs) => {
                let a = self.eval(lhs);
                let b = self.eval(rhs);
                eval_binop(*op, a, b)
            }
        }
    }
}

/// Big-endian value of up to 8 window bytes; bytes outside the window read 0.
fn data_value(window: Option<&[u8]>, offset: u64, len: u64) -> u64 {
    let Some(window) = window else { return 0 };
    let mut value = 0u64;
    for k in 0..len {
        let byte = offset
            .checked_add(k)
            .and_then(|i| usize::try_from(i).ok())
            .and_then(|i| window.get(i).copied())
            .unwrap_or(0);
        value = value << 8 | u64::from(byte);
    }
    value
}

pub(crate) fn eval_binop(op: BinOp, a: u64, b: u64) -> u64 {
    match op {
        BinOp::Add => a.wrapping_add(b),
        BinOp::Sub => a.wrapping_sub(b),
        BinOp::Mul => a.wrapping_mul(b),
        BinOp::Div => a.checked_div(b).unwrap_or(0),
        BinOp::Rem => a.checked_rem(b).unwrap_or(0),
        BinOp::BitAnd => a & b,
        BinOp::BitOr => a | b,
        BinOp::BitXor => a ^ b,
        BinOp::Shl => a.checked_shl(b.min(64) as u32).unwrap_or(0),
        BinOp::Shr => a.checked_shr(b.min(64) as u32).unwrap_or(0),
        BinOp::Eq => u64::from(a == b),
        BinOp::Ne => u64::from(a != b),
        BinOp::Lt => u64::from(a < b),
        BinOp::Le => u64::from(a <= b),
        BinOp::Gt => u64::from(a > b),
        BinOp::Ge => u64::from(a >= b),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jash::parser::parse;
    use crate::workloads;

    fn run(src: &str, meta: &JashMeta, arg_value: u64) -> ExecResult {
        let prog = parse(src).unwrap();
        let arg = Bits::from_value(arg_value, usize::from(meta.n)).unwrap();
        execute(&prog, meta, &arg, &NoData).unwrap()
    }

    #[test]
    fn collatz_terminates_with_enough_budget() {
        // 37 reaches 1 after exactly 21 halving/tripling steps, so the break
        // fires on iteration 22 and any s >= 22 terminates.
        let (prog, meta) = workloads::make_collatz_jash(30);
        let arg = Bits::from_value(37, 16).unwrap();
        let out = execute(&prog, &meta, &arg, &NoData).unwrap();
        assert_eq!(out.res.as_str(), "001");
        assert_eq!(out.halted_by, HaltReason::OutputStmt);
        let bound = complexity_bound(&prog, &meta);
        assert!(u128::from(out.steps_used) <= bound.worst_case_steps);
    }

    #[test]
    fn collatz_exhausts_small_budget() {
        let (prog, meta) = workloads::make_collatz_jash(10);
        let arg = Bits::from_value(37, 16).unwrap();
        let out = execute(&prog, &meta, &arg, &NoData).unwrap();
        assert_eq!(out.res.as_str(), "111");
        assert_eq!(out.halted_by, HaltReason::Sentinel);
    }

    #[test]
    fn constant_output_pads_to_m_bits() {
        let mut meta = workloads::collatz_meta(5);
        meta.m = 2;
        meta.dnf_sentinel = Bits::new("11").unwrap();
        let out = run("output 0", &meta, 9);
        assert_eq!(out.res.as_str(), "00");
        assert_eq!(out.halted_by, HaltReason::OutputStmt);
    }

    #[test]
    fn ending_without_output_yields_zeros() {
        let meta = workloads::collatz_meta(5);
        let out = run("a = 7", &meta, 0);
        assert_eq!(out.res.as_str(), "000");
        assert_eq!(out.halted_by, HaltReason::EndOfProgram);
        assert_eq!(out.steps_used, 1);
    }

    #[test]
    fn arg_checks() {
        let (prog, meta) = workloads::make_collatz_jash(5);
        let narrow = Bits::from_value(1, 8).unwrap();
        assert_eq!(
            execute(&prog, &meta, &narrow, &NoData),
            Err(ExecError::ArgWidthMismatch { expected: 16, got: 8 })
        );
        let mut capped = meta.clone();
        capped.max_arg = Some(100);
        let over = Bits::from_value(101, 16).unwrap();
        assert_eq!(
            execute(&prog, &capped, &over, &NoData),
            Err(ExecError::ArgAboveMax { value: 101, max_arg: 100 })
        );
    }

    #[test]
    fn total_arithmetic() {
        assert_eq!(eval_binop(BinOp::Div, 5, 0), 0);
        assert_eq!(eval_binop(BinOp::Rem, 5, 0), 0);
        assert_eq!(eval_binop(BinOp::Shl, 1, 64), 0);
        assert_eq!(eval_binop(BinOp::Shr, u64::MAX, 65), 0);
        assert_eq!(eval_binop(BinOp::Shl, 1, 63), 1 << 63);
        assert_eq!(eval_binop(BinOp::Add, u64::MAX, 1), 0);
        assert_eq!(eval_binop(BinOp::Mul, u64::MAX, 2), u64::MAX - 1);
    }

    #[test]
    fn loop_counter_is_protected_from_the_body() {
        let meta = workloads::collatz_meta(5);
        // The body resets the counter every iteration; the loop still ends.
        let out = run(
            "total = 0\nfor (i = 1; i <= s; i++) { total = total + i\n i = 1 }\noutput total",
            &meta,
            0,
        );
        // Header rebinds i each iteration: totals 1+2+3+4+5 = 15 -> 7 mod 8.
        assert_eq!(out.res.as_str(), "111"); // 15 truncated to 3 bits
    }

    #[test]
    fn sentinel_classification_tracks_meta() {
        let mut meta = workloads::collatz_meta(5);
        meta.dnf_sentinel = Bits::new("010").unwrap();
        let out = run("output 0b010", &meta, 0);
        assert_eq!(out.halted_by, HaltReason::Sentinel);
        // All-zeros from a missing output is EndOfProgram even if the
        // sentinel is configured as zeros.
        meta.dnf_sentinel = Bits::new("000").unwrap();
        let out = run("a = 1", &meta, 0);
        assert_eq!(out.halted_by, HaltReason::EndOfProgram);
    }

    #[test]
    fn data_reads_are_windowed_and_total() {
        let mut meta = workloads::collatz_meta(5);
        meta.data_record_size = Some(4);
        let bundle: Vec<u8> = (0u8..16).collect();
        let provider = BundleWindows {
            bytes: &bundle,
            record_size: Some(4),
        };
        let prog = parse("output data(1, 2)").unwrap();
        let arg = Bits::from_value(2, 16).unwrap();
        // Window for arg 2 is bytes [8, 12); data(1, 2) = 0x090a = 2314.
        let out = execute(&prog, &meta, &arg, &provider).unwrap();
        assert_eq!(out.res.value(), 0x090a & 0b111);
        // Reads past the window see zeros.
        let prog = parse("output data(3, 2)").unwrap();
        let out = execute(&prog, &meta, &arg, &provider).unwrap();
        assert_eq!(out.res.value(), (0x0b00u64 & 0b111));
    }

    #[test]
    fn window_out_of_range_propagates() {
        let mut meta = workloads::collatz_meta(5);
        meta.data_record_size = Some(16);
        let bundle = [0u8; 16];
        let provider = BundleWindows {
            bytes: &bundle,
            record_size: Some(16),
        };
        let prog = parse("output data(0, 1)").unwrap();
        let arg = Bits::from_value(1, 16).unwrap();
        assert!(matches!(
            execute(&prog, &meta, &arg, &provider),
            Err(ExecError::Data(DataError::WindowOutOfRange { .. }))
        ));
    }

    #[test]
    fn executions_are_deterministic() {
        let (prog, meta) = workloads::make_collatz_jash(25);
        for v in [0u64, 1, 6, 27, 37, 255] {
            let arg = Bits::from_value(v, 16).unwrap();
            let a = execute(&prog, &meta, &arg, &NoData).unwrap();
            let b = execute(&prog, &meta, &arg, &NoData).unwrap();
            assert_eq!(a, b);
        }
    }
}
