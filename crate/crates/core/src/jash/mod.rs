//! The jash-mini language: a closed, deterministic DSL mapping an n-bit arg
//! to an m-bit res under a statically known step bound.

pub mod ast;
pub mod bound;
pub mod classic;
pub mod interp;
pub mod lexer;
pub mod parser;
pub mod transform;
pub mod validate;

pub use ast::{BinOp, Expr, IntLit, JashProgram, LitForm, LoopBound, Stmt, UnOp};
pub use bound::{complexity_bound, ComplexityBound};
pub use classic::{digest_prefix_bits, ClassicProblem};
pub use interp::{
    execute, BundleWindows, DataError, DataWindowProvider, ExecError, ExecResult, HaltReason,
    NoData,
};
pub use parser::{parse, ParseError};
pub use transform::{transform_bounded, TransformError};
pub use validate::{validate, ValidationReport, Violation, MAX_LOOP_NESTING, MAX_STATEMENTS};

use crate::bits::Bits;
use crate::meta::JashMeta;

/// Either a parsed program or the builtin SHA-256 problem; both execute
/// under the same contract.
#[derive(Debug, Clone, PartialEq)]
pub enum JashFn {
    Program(JashProgram),
    Classic(ClassicProblem),
}

impl JashFn {
    pub fn execute(
        &self,
        meta: &JashMeta,
        arg: &Bits,
        data: &dyn DataWindowProvider,
    ) -> Result<ExecResult, ExecError> {
        match self {
            JashFn::Program(prog) => execute(prog, meta, arg, data),
            JashFn::Classic(problem) => problem.execute(meta, arg),
        }
    }
}
