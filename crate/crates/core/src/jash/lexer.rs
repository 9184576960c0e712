//! Tokenizer for jash-mini source text.

use alloc::string::String;
use alloc::vec::Vec;

use super::parser::ParseError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(u64),
    /// `0b…` literal with its written digit count.
    Bin { value: u64, width: u8 },
    // Keywords.
    If,
    Else,
    For,
    While,
    Break,
    Output,
    Exit,
    ArgVal,
    ArgBit,
    Data,
    S,
    N,
    // Punctuation.
    Assign,
    PlusPlus,
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
    Amp,
    Pipe,
    Caret,
    Shl,
    Shr,
    EqEq,
    NotEq,
    Le,
    Lt,
    Ge,
    Gt,
    Not,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Semi,
    Comma,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(name) => alloc::format!("identifier `{name}`"),
            Tok::Int(v) => alloc::format!("integer {v}"),
            Tok::Bin { value, width } => alloc::format!("binary literal {value} ({width} bits)"),
            other => String::from(match other {
                Tok::If => "`if`",
                Tok::Else => "`else`",
                Tok::For => "`for`",
                Tok::While => "`while`",
                Tok::Break => "`break`",
                Tok::Output => "`output`",
                Tok::Exit => "`exit`",
                Tok::ArgVal => "`argval`",
                Tok::ArgBit => "`argbit`",
                Tok::Data => "`data`",
                Tok::S => "`s`",
                Tok::N => "`n`",
                Tok::Assign => "`=`",
                Tok::PlusPlus => "`++`",
                Tok::Plus => "`+`",
                Tok::Minus => "`-`",
                Tok::Star => "`*`",
                Tok::Slash => "`/`",
                Tok::Percent => "`%`",
                Tok::Amp => "`&`",
                Tok::Pipe => "`|`",
                Tok::Caret => "`^`",
                Tok::Shl => "`<<`",
                Tok::Shr => "`>>`",
                Tok::EqEq => "`==`",
                Tok::NotEq => "`!=`",
                Tok::Le => "`<=`",
                Tok::Lt => "`<`",
                Tok::Ge => "`>=`",
                Tok::Gt => "`>`",
                Tok::Not => "`!`",
                Tok::LParen => "`(`",
                Tok::RParen => "`)`",
                Tok::LBrace => "`{`",
                Tok::RBrace => "`}`",
                Tok::Semi => "`;`",
                Tok::Comma => "`,`",
                _ => unreachable!(),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

pub fn tokenize(source: &str) -> Result<Vec<Token>, ParseError> {
    let mut tokens = Vec::new();
    let bytes = source.as_bytes();
    let mut i = 0;
    let mut line = 1u32;
    let mut col = 1u32;

    macro_rules! push {
        ($tok:expr, $len:expr) => {{
            tokens.push(Token {
                tok: $tok,
                pos: Pos { line, col },
            });
            i += $len;
            col += $len as u32;
        }};
    }

    while i < bytes.len() {
        let b = bytes[i];
        let rest = &bytes[i..];
        match b {
            b'\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            b' ' | b'\t' | b'\r' => {
                i += 1;
                col += 1;
            }
            b'0' if rest.len() > 1 && rest[1] == b'b' => {
                let start = i + 2;
                let mut end = start;
                while end < bytes.len() && (bytes[end] == b'0' || bytes[end] == b'1') {
                    end += 1;
                }
                let width = end - start;
                if width == 0 || width > 64 {
                    return Err(ParseError::syntax(
                        line,
                        col,
                        "binary literal needs 1 to 64 digits after `0b`",
                    ));
                }
                let mut value = 0u64;
                for &d in &bytes[start..end] {
                    value = value << 1 | u64::from(d - b'0');
                }
                push!(
                    Tok::Bin {
                        value,
                        width: width as u8
                    },
                    2 + width
                );
            }
            b'0'..=b'9' => {
                let mut end = i;
                while end < bytes.len() && bytes[end].is_ascii_digit() {
                    end += 1;
                }
                let text = core::str::from_utf8(&bytes[i..end]).unwrap();
                let value: u64 = text.parse().map_err(|_| {
                    ParseError::syntax(line, col, "integer literal does not fit in 64 bits")
                })?;
                push!(Tok::Int(value), end - i);
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let mut end = i;
                while end < bytes.len()
                    && (bytes[end].is_ascii_alphanumeric() || bytes[end] == b'_')
                {
                    end += 1;
                }
                let word = core::str::from_utf8(&bytes[i..end]).unwrap();
                let tok = match word {
                    "if" => Tok::If,
                    "else" => Tok::Else,
                    "for" => Tok::For,
                    "while" => Tok::While,
                    "break" => Tok::Break,
                    "output" => Tok::Output,
                    "exit" => Tok::Exit,
                    "argval" => Tok::ArgVal,
                    "argbit" => Tok::ArgBit,
                    "data" => Tok::Data,
                    "s" => Tok::S,
                    "n" => Tok::N,
                    _ => Tok::Ident(String::from(word)),
                };
                push!(tok, end - i);
            }
            b'=' if rest.starts_with(b"==") => push!(Tok::EqEq, 2),
            b'=' => push!(Tok::Assign, 1),
            b'!' if rest.starts_with(b"!=") => push!(Tok::NotEq, 2),
            b'!' => push!(Tok::Not, 1),
            b'<' if rest.starts_with(b"<<") => push!(Tok::Shl, 2),
            b'<' if rest.starts_with(b"<=") => push!(Tok::Le, 2),
            b'<' => push!(Tok::Lt, 1),
            b'>' if rest.starts_with(b">>") => push!(Tok::Shr, 2),
            b'>' if rest.starts_with(b">=") => push!(Tok::Ge, 2),
            b'>' => push!(Tok::Gt, 1),
            b'+' if rest.starts_with(b"++") => push!(Tok::PlusPlus, 2),
            b'+' => push!(Tok::Plus, 1),
            b'-' => push!(Tok::Minus, 1),
            b'*' => push!(Tok::Star, 1),
            b'/' => push!(Tok::Slash, 1),
            b'%' => push!(Tok::Percent, 1),
            b'&' => push!(Tok::Amp, 1),
            b'|' => push!(Tok::Pipe, 1),
            b'^' => push!(Tok::Caret, 1),
            b'(' => push!(Tok::LParen, 1),
            b')' => push!(Tok::RParen, 1),
            b'{' => push!(Tok::LBrace, 1),
            b'}' => push!(Tok::RBrace, 1),
            b';' => push!(Tok::Semi, 1),
            b',' => push!(Tok::Comma, 1),
            _ => {
                return Err(ParseError::syntax(
                    line,
                    col,
                    alloc::format!("unexpected character `{}`", b as char),
                ))
            }
        }
    }
    Ok(tokens)
}
