//! Abstract syntax of jash-mini and its canonical printed form.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write as _;

/// How an integer literal was written; preserved so printing round-trips.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LitForm {
    Dec,
    /// `0b…` with an explicit digit count, e.g. `0b001` has width 3.
    Bin { width: u8 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IntLit {
    pub value: u64,
    pub form: LitForm,
}

impl IntLit {
    pub fn dec(value: u64) -> Self {
        IntLit {
            value,
            form: LitForm::Dec,
        }
    }

    pub fn bin(value: u64, width: u8) -> Self {
        IntLit {
            value,
            form: LitForm::Bin { width },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnOp {
    Not,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Mul,
    Div,
    Rem,
    Add,
    Sub,
    Shl,
    Shr,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    BitAnd,
    BitXor,
    BitOr,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Rem => "%",
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Shl => "<<",
            BinOp::Shr => ">>",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::BitAnd => "&",
            BinOp::BitXor => "^",
            BinOp::BitOr => "|",
        }
    }

    /// C-style precedence; higher binds tighter.
    fn precedence(self) -> u8 {
        match self {
            BinOp::BitOr => 1,
            BinOp::BitXor => 2,
            BinOp::BitAnd => 3,
            BinOp::Eq | BinOp::Ne => 4,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 5,
            BinOp::Shl | BinOp::Shr => 6,
            BinOp::Add | BinOp::Sub => 7,
            BinOp::Mul | BinOp::Div | BinOp::Rem => 8,
        }
    }
}

const UNARY_PRECEDENCE: u8 = 9;
const ATOM_PRECEDENCE: u8 = 10;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Lit(IntLit),
    Var(String),
    /// The loop cap symbol `s`.
    S,
    /// The arg width symbol `n`.
    N,
    /// Numeric value of the whole arg.
    ArgVal,
    /// `argbit(i)`: bit `i` of the arg, MSB first; out of range reads 0.
    ArgBit(Box<Expr>),
    /// `data(offset, len)`: big-endian value of up to 8 bytes of the data
    /// window; bytes past the window read 0.
    Data(Box<Expr>, Box<Expr>),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn lit(value: u64) -> Self {
        Expr::Lit(IntLit::dec(value))
    }

    pub fn var(name: &str) -> Self {
        Expr::Var(String::from(name))
    }

    pub fn not(e: Expr) -> Self {
        Expr::Unary(UnOp::Not, Box::new(e))
    }

    pub fn bin(op: BinOp, lhs: Expr, rhs: Expr) -> Self {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary(op, _, _) => op.precedence(),
            Expr::Unary(..) => UNARY_PRECEDENCE,
            _ => ATOM_PRECEDENCE,
        }
    }
}

/// Upper bound of a `for` loop: a literal, or the meta symbols `s` / `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoopBound {
    Literal(u64),
    S,
    N,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Stmt {
    Assign {
        target: String,
        value: Expr,
    },
    If {
        cond: Expr,
        then_body: Vec<Stmt>,
        else_body: Option<Vec<Stmt>>,
    },
    For {
        var: String,
        init: u64,
        bound: LoopBound,
        body: Vec<Stmt>,
    },
    While {
        cond: Expr,
        body: Vec<Stmt>,
    },
    Break,
    Output {
        value: Expr,
        exit: bool,
    },
}

/// A parsed jash function. `source_text` is always the canonical print of
/// the statements, so `parse(print(ast))` is structurally the identity.
#[derive(Debug, Clone)]
pub struct JashProgram {
    statements: Vec<Stmt>,
    source_text: String,
}

impl PartialEq for JashProgram {
    fn eq(&self, other: &Self) -> bool {
        self.statements == other.statements
    }
}

impl Eq for JashProgram {}

impl JashProgram {
    pub fn from_statements(statements: Vec<Stmt>) -> Self {
        let source_text = print_program(&statements);
        JashProgram {
            statements,
            source_text,
        }
    }

    pub fn statements(&self) -> &[Stmt] {
        &self.statements
    }

    pub fn source_text(&self) -> &str {
        &self.source_text
    }

    /// Total statement nodes, counted recursively.
    pub fn statement_count(&self) -> usize {
        fn count(stmts: &[Stmt]) -> usize {
            stmts
                .iter()
                .map(|s| {
                    1 + match s {
                        Stmt::If {
                            then_body,
                            else_body,
                            ..
                        } => {
                            count(then_body)
                                + else_body.as_deref().map_or(0, count)
                        }
                        Stmt::For { body, .. } | Stmt::While { body, .. } => count(body),
                        _ => 0,
                    }
                })
                .sum()
        }
        count(&self.statements)
    }
}

/// Canonical text form: one statement per line, four-space indentation,
/// minimal parentheses.
pub fn print_program(statements: &[Stmt]) -> String {
    let mut out = String::new();
    for stmt in statements {
        print_stmt(&mut out, stmt, 0);
    }
    out
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("    ");
    }
}

fn print_block(out: &mut String, body: &[Stmt], depth: usize) {
    out.push_str("{\n");
    for stmt in body {
        print_stmt(out, stmt, depth + 1);
    }
    indent(out, depth);
    out.push('}');
}

fn print_stmt(out: &mut String, stmt: &Stmt, depth: usize) {
    indent(out, depth);
    match stmt {
        Stmt::Assign { target, value } => {
            let _ = write!(out, "{target} = ");
            print_expr(out, value, 0);
        }
        Stmt::If {
            cond,
            then_body,
            else_body,
        } => {
            out.push_str("if (");
            print_expr(out, cond, 0);
            out.push_str(") ");
            print_block(out, then_body, depth);
            if let Some(else_body) = else_body {
                out.push_str(" else ");
                print_block(out, else_body, depth);
            }
        }
        Stmt::For {
            var,
            init,
            bound,
            body,
        } => {
            let _ = write!(out, "for ({var} = {init}; {var} <= ");
            match bound {
                LoopBound::Literal(v) => {
                    let _ = write!(out, "{v}");
                }
                LoopBound::S => out.push('s'),
                LoopBound::N => out.push('n'),
            }
            let _ = write!(out, "; {var}++) ");
            print_block(out, body, depth);
        }
        Stmt::While { cond, body } => {
            out.push_str("while (");
            print_expr(out, cond, 0);
            out.push_str(") ");
            print_block(out, body, depth);
        }
        Stmt::Break => out.push_str("break"),
        Stmt::Output { value, exit } => {
            out.push_str("output ");
            print_expr(out, value, 0);
            if *exit {
                out.push_str(" exit");
            }
        }
    }
    out.push('\n');
}

fn print_expr(out: &mut String, expr: &Expr, min_precedence: u8) {
    let parens = expr.precedence() < min_precedence;
    if parens {
        out.push('(');
    }
    match expr {
        Expr::Lit(IntLit { value, form }) => match form {
            LitForm::Dec => {
                let _ = write!(out, "{value}");
            }
            LitForm::Bin { width } => {
                out.push_str("0b");
                for i in (0..*width).rev() {
                    out.push(if value >> i & 1 == 1 { '1' } else { '0' });
                }
            }
        },
        Expr::Var(name) => out.push_str(name),
        Expr::S => out.push('s'),
        Expr::N => out.push('n'),
        Expr::ArgVal => out.push_str("argval"),
        Expr::ArgBit(i) => {
            out.push_str("argbit(");
            print_expr(out, i, 0);
            out.push(')');
        }
        Expr::Data(offset, len) => {
            out.push_str("data(");
            print_expr(out, offset, 0);
            out.push_str(", ");
            print_expr(out, len, 0);
            out.push(')');
        }
        Expr::Unary(UnOp::Not, operand) => {
            out.push('!');
            print_expr(out, operand, UNARY_PRECEDENCE);
        }
        Expr::Binary(op, lhs, rhs) => {
            let p = op.precedence();
            print_expr(out, lhs, p);
            let _ = write!(out, " {} ", op.symbol());
            // Left-associative: a right child at equal precedence needs parens.
            print_expr(out, rhs, p + 1);
        }
    }
    if parens {
        out.push(')');
    }
}
