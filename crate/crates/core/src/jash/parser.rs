//! Recursive-descent parser for jash-mini.
//!
//! Grammar:
//!
//! ```text
//! program := stmt*
//! stmt    := assign | if | for | while | "break" | output
//! assign  := ident "=" expr
//! if      := "if" "(" expr ")" block ["else" block]
//! for     := "for" "(" ident "=" intlit ";" ident "<=" bound ";" ident "++" ")" block
//! while   := "while" "(" expr ")" block
//! output  := "output" expr ["exit"]
//! bound   := intlit | "s" | "n"
//! block   := "{" stmt* "}"
//! expr    := unsigned 64-bit terms over + - * / % & | ^ << >> == != < <= > >= !,
//!            parentheses, "argval", "argbit(i)", "data(offset, len)", intlit,
//!            bitlit ("0b…")
//! ```
//!
//! Binary operators use C precedence and associate left; `!` binds tightest.
//!
//! Identifiers must be `s`, `n`, a builtin accessor, or assigned somewhere
//! earlier in the statement sequence (a conservative def-before-use check;
//! a variable that a branch skipped at runtime reads as 0).

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use alloc::collections::BTreeSet;

use super::ast::{BinOp, Expr, IntLit, JashProgram, LoopBound, Stmt};
use super::lexer::{tokenize, Pos, Tok, Token};

/// Parser nesting limit; far above the validator's loop-depth cap.
const MAX_BLOCK_DEPTH: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax { line: u32, col: u32, message: String },
    #[error("unknown identifier `{name}` at {line}:{col}")]
    UnknownIdentifier { line: u32, col: u32, name: String },
}

impl ParseError {
    pub(crate) fn syntax(line: u32, col: u32, message: impl Into<String>) -> Self {
        ParseError::Syntax {
            line,
            col,
            message: message.into(),
        }
    }
}

pub fn parse(source: &str) -> Result<JashProgram, ParseError> {
    let tokens = tokenize(source)?;
    let mut parser = Parser {
        tokens,
        at: 0,
        assigned: BTreeSet::new(),
        depth: 0,
    };
    let statements = parser.stmt_seq(/*in_block=*/ false)?;
    if let Some(t) = parser.peek() {
        let (tok, pos) = (t.tok.clone(), t.pos);
        return Err(ParseError::syntax(
            pos.line,
            pos.col,
            alloc::format!("expected a statement, found {}", tok.describe()),
        ));
    }
    Ok(JashProgram::from_statements(statements))
}

struct Parser {
    tokens: Vec<Token>,
    at: usize,
    /// Identifiers assigned anywhere earlier in the pre-order walk.
    assigned: BTreeSet<String>,
    depth: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.at)
    }

    fn last_pos(&self) -> Pos {
        self.tokens
            .last()
            .map(|t| t.pos)
            .unwrap_or(Pos { line: 1, col: 1 })
    }

    fn next(&mut self, expected: &str) -> Result<Token, ParseError> {
        match self.tokens.get(self.at) {
            Some(t) => {
                self.at += 1;
                Ok(t.clone())
            }
            None => {
                let pos = self.last_pos();
                Err(ParseError::syntax(
                    pos.line,
                    pos.col,
                    alloc::format!("expected {expected}, found end of input"),
                ))
            }
        }
    }

    fn expect(&mut self, tok: Tok, expected: &str) -> Result<Pos, ParseError> {
        let t = self.next(expected)?;
        if t.tok == tok {
            Ok(t.pos)
        } else {
            Err(ParseError::syntax(
                t.pos.line,
                t.pos.col,
                alloc::format!("expected {expected}, found {}", t.tok.describe()),
            ))
        }
    }

    fn starts_stmt(tok: &Tok) -> bool {
        matches!(
            tok,
            Tok::Ident(_) | Tok::If | Tok::For | Tok::While | Tok::Break | Tok::Output
        )
    }

    fn stmt_seq(&mut self, in_block: bool) -> Result<Vec<Stmt>, ParseError> {
        let mut stmts = Vec::new();
        loop {
            match self.peek() {
                Some(t) if Self::starts_stmt(&t.tok) => stmts.push(self.stmt()?),
                Some(t) if in_block && t.tok == Tok::RBrace => break,
                None => break,
                Some(t) => {
                    let (tok, pos) = (t.tok.clone(), t.pos);
                    if in_block {
                        return Err(ParseError::syntax(
                            pos.line,
                            pos.col,
                            alloc::format!("expected a statement or `}}`, found {}", tok.describe()),
                        ));
                    }
                    break;
                }
            }
        }
        Ok(stmts)
    }

    fn block(&mut self) -> Result<Vec<Stmt>, ParseError> {
        if self.depth >= MAX_BLOCK_DEPTH {
            let pos = self.peek().map(|t| t.pos).unwrap_or(self.last_pos());
            return Err(ParseError::syntax(
                pos.line,
                pos.col,
                "blocks nested too deeply",
            ));
        }
        self.depth += 1;
        self.expect(Tok::LBrace, "`{`")?;
        let stmts = self.stmt_seq(/*in_block=*/ true)?;
        self.expect(Tok::RBrace, "`}`")?;
        self.depth -= 1;
        Ok(stmts)
    }

    fn stmt(&mut self) -> Result<Stmt, ParseError> {
        let t = self.next("a statement")?;
        match t.tok {
            Tok::Ident(target) => {
                self.expect(Tok::Assign, "`=`")?;
                let value = self.expr()?;
                self.assigned.insert(target.clone());
                Ok(Stmt::Assign { target, value })
            }
            Tok::If => {
                self.expect(Tok::LParen, "`(`")?;
                let cond = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                let then_body = self.block()?;
                let else_body = if matches!(self.peek(), Some(t) if t.tok == Tok::Else) {
                    self.at += 1;
                    Some(self.block()?)
                } else {
                    None
                };
                Ok(Stmt::If {
                    cond,
                    then_body,
                    else_body,
                })
            }
            Tok::For => self.for_stmt(),
            Tok::While => {
                self.expect(Tok::LParen, "`(`")?;
                let cond = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                let body = self.block()?;
                Ok(Stmt::While { cond, body })
            }
            Tok::Break => Ok(Stmt::Break),
            Tok::Output => {
                let value = self.expr()?;
                let exit = if matches!(self.peek(), Some(t) if t.tok == Tok::Exit) {
                    self.at += 1;
                    true
                } else {
                    false
                };
                Ok(Stmt::Output { value, exit })
            }
            other => Err(ParseError::syntax(
                t.pos.line,
                t.pos.col,
                alloc::format!("expected a statement, found {}", other.describe()),
            )),
        }
    }

    fn for_stmt(&mut self) -> Result<Stmt, ParseError> {
        self.expect(Tok::LParen, "`(`")?;
        let (var, var_pos) = self.ident("loop variable")?;
        self.expect(Tok::Assign, "`=`")?;
        let init = self.int_literal("loop start")?;
        if init == 0 {
            return Err(ParseError::syntax(
                var_pos.line,
                var_pos.col,
                "loop start must be at least 1",
            ));
        }
        self.expect(Tok::Semi, "`;`")?;
        let (check_var, check_pos) = self.ident("loop variable")?;
        if check_var != var {
            return Err(ParseError::syntax(
                check_pos.line,
                check_pos.col,
                alloc::format!("loop header names `{check_var}`, expected `{var}`"),
            ));
        }
        self.expect(Tok::Le, "`<=`")?;
        let bound = self.loop_bound()?;
        self.expect(Tok::Semi, "`;`")?;
        let (inc_var, inc_pos) = self.ident("loop variable")?;
        if inc_var != var {
            return Err(ParseError::syntax(
                inc_pos.line,
                inc_pos.col,
                alloc::format!("loop header names `{inc_var}`, expected `{var}`"),
            ));
        }
        self.expect(Tok::PlusPlus, "`++`")?;
        self.expect(Tok::RParen, "`)`")?;
        self.assigned.insert(var.clone());
        let body = self.block()?;
        Ok(Stmt::For {
            var,
            init,
            bound,
            body,
        })
    }

    fn ident(&mut self, expected: &str) -> Result<(String, Pos), ParseError> {
        let t = self.next(expected)?;
        match t.tok {
            Tok::Ident(name) => Ok((name, t.pos)),
            other => Err(ParseError::syntax(
                t.pos.line,
                t.pos.col,
                alloc::format!("expected {expected}, found {}", other.describe()),
            )),
        }
    }

    fn int_literal(&mut self, expected: &str) -> Result<u64, ParseError> {
        let t = self.next(expected)?;
        match t.tok {
            Tok::Int(v) => Ok(v),
            other => Err(ParseError::syntax(
                t.pos.line,
                t.pos.col,
                alloc::format!("expected {expected} (an integer literal), found {}", other.describe()),
            )),
        }
    }

    fn loop_bound(&mut self) -> Result<LoopBound, ParseError> {
        let t = self.next("a loop bound")?;
        match t.tok {
            Tok::Int(v) => Ok(LoopBound::Literal(v)),
            Tok::S => Ok(LoopBound::S),
            Tok::N => Ok(LoopBound::N),
            other => Err(ParseError::syntax(
                t.pos.line,
                t.pos.col,
                alloc::format!(
                    "expected a loop bound (integer literal, `s`, or `n`), found {}",
                    other.describe()
                ),
            )),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        self.binary_expr(1)
    }

    fn binary_expr(&mut self, min_precedence: u8) -> Result<Expr, ParseError> {
        let mut lhs = self.unary_expr()?;
        while let Some(t) = self.peek() {
            let op = match t.tok {
                Tok::Pipe => BinOp::BitOr,
                Tok::Caret => BinOp::BitXor,
                Tok::Amp => BinOp::BitAnd,
                Tok::EqEq => BinOp::Eq,
                Tok::NotEq => BinOp::Ne,
                Tok::Lt => BinOp::Lt,
                Tok::Le => BinOp::Le,
                Tok::Gt => BinOp::Gt,
                Tok::Ge => BinOp::Ge,
                Tok::Shl => BinOp::Shl,
                Tok::Shr => BinOp::Shr,
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                Tok::Percent => BinOp::Rem,
                _ => break,
            };
            let precedence = match op {
                BinOp::BitOr => 1,
                BinOp::BitXor => 2,
                BinOp::BitAnd => 3,
                BinOp::Eq | BinOp::Ne => 4,
                BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 5,
                BinOp::Shl | BinOp::Shr => 6,
                BinOp::Add | BinOp::Sub => 7,
                BinOp::Mul | BinOp::Div | BinOp::Rem => 8,
            };
            if precedence < min_precedence {
                break;
            }
            self.at += 1;
            let rhs = self.binary_expr(precedence + 1)?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary_expr(&mut self) -> Result<Expr, ParseError> {
        if matches!(self.peek(), Some(t) if t.tok == Tok::Not) {
            self.at += 1;
            let operand = self.unary_expr()?;
            return Ok(Expr::Unary(super::ast::UnOp::Not, Box::new(operand)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let t = self.next("an expression")?;
        match t.tok {
            Tok::Int(value) => Ok(Expr::Lit(IntLit::dec(value))),
            Tok::Bin { value, width } => Ok(Expr::Lit(IntLit::bin(value, width))),
            Tok::S => Ok(Expr::S),
            Tok::N => Ok(Expr::N),
            Tok::ArgVal => Ok(Expr::ArgVal),
            Tok::ArgBit => {
                self.expect(Tok::LParen, "`(`")?;
                let index = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(Expr::ArgBit(Box::new(index)))
            }
            Tok::Data => {
                self.expect(Tok::LParen, "`(`")?;
                let offset = self.expr()?;
                self.expect(Tok::Comma, "`,`")?;
                let len = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(Expr::Data(Box::new(offset), Box::new(len)))
            }
            Tok::Ident(name) => {
                if !self.assigned.contains(&name) {
                    return Err(ParseError::UnknownIdentifier {
                        line: t.pos.line,
                        col: t.pos.col,
                        name,
                    });
                }
                Ok(Expr::Var(name))
            }
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            other => Err(ParseError::syntax(
                t.pos.line,
                t.pos.col,
                alloc::format!("expected an expression, found {}", other.describe()),
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jash::ast::print_program;

    #[test]
    fn single_assignment() {
        let prog = parse("b = 37").unwrap();
        assert_eq!(
            prog.statements(),
            [Stmt::Assign {
                target: String::from("b"),
                value: Expr::lit(37),
            }]
        );
    }

    #[test]
    fn empty_body_loop() {
        let prog = parse("for (i = 1; i <= s; i++) { }").unwrap();
        assert_eq!(
            prog.statements(),
            [Stmt::For {
                var: String::from("i"),
                init: 1,
                bound: LoopBound::S,
                body: Vec::new(),
            }]
        );
    }

    #[test]
    fn while_with_if_else() {
        let src = "b = argval\nwhile (b != 1) {\n    if (b % 2 == 0) { b = b / 2 } else { b = 3 * b + 1 }\n}\noutput 0b001\n";
        let prog = parse(src).unwrap();
        let Stmt::While { cond, body } = &prog.statements()[1] else {
            panic!("expected while, got {:?}", prog.statements()[1]);
        };
        assert_eq!(
            *cond,
            Expr::bin(BinOp::Ne, Expr::var("b"), Expr::lit(1))
        );
        assert!(matches!(body[0], Stmt::If { .. }));
    }

    #[test]
    fn precedence_is_c_like() {
        // == binds tighter than &, * tighter than +.
        let prog = parse("a = 1\nb = a & 1 == 1\nc = a + 2 * 3").unwrap();
        let Stmt::Assign { value, .. } = &prog.statements()[1] else {
            unreachable!()
        };
        assert_eq!(
            *value,
            Expr::bin(
                BinOp::BitAnd,
                Expr::var("a"),
                Expr::bin(BinOp::Eq, Expr::lit(1), Expr::lit(1)),
            )
        );
        let Stmt::Assign { value, .. } = &prog.statements()[2] else {
            unreachable!()
        };
        assert_eq!(
            *value,
            Expr::bin(
                BinOp::Add,
                Expr::var("a"),
                Expr::bin(BinOp::Mul, Expr::lit(2), Expr::lit(3)),
            )
        );
    }

    #[test]
    fn use_before_assignment_is_rejected() {
        match parse("a = b + 1") {
            Err(ParseError::UnknownIdentifier { name, .. }) => assert_eq!(name, "b"),
            other => panic!("expected UnknownIdentifier, got {other:?}"),
        }
        // Self-reference in the first assignment of a variable.
        assert!(matches!(
            parse("a = a"),
            Err(ParseError::UnknownIdentifier { .. })
        ));
        // Assignment in an earlier branch counts (conservative rule).
        assert!(parse("if (argval) { t = 1 }\nout = t").is_ok());
    }

    #[test]
    fn loop_header_must_reuse_the_variable() {
        assert!(parse("for (i = 1; j <= s; i++) { }").is_err());
        assert!(parse("for (i = 1; i <= s; j++) { }").is_err());
        assert!(parse("for (i = 0; i <= s; i++) { }").is_err());
    }

    #[test]
    fn syntax_errors_carry_position() {
        match parse("b = 37\nb = ") {
            Err(ParseError::Syntax { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn print_parse_round_trip() {
        let src = "b = argval\nfor (i = 1; i <= s; i++) {\n    if (i == s) { output 0b111 exit }\n    if (!(b != 1)) { break }\n    if (b % 2 == 0) { b = b / 2 } else { b = 3 * b + 1 }\n}\noutput 0b001\n";
        let prog = parse(src).unwrap();
        let printed = print_program(prog.statements());
        let reparsed = parse(&printed).unwrap();
        assert_eq!(prog, reparsed);
        assert_eq!(prog.source_text(), reparsed.source_text());
    }
}
