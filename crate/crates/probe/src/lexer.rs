//! Tokenizer for the specification language. `%` starts a line comment.

use num_bigint::BigInt;

use crate::parser::ParseError;

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Int(BigInt),
    Real(f64),
    // keywords
    Act,
    Proc,
    Init,
    Sum,
    Dist,
    Delta,
    If,
    True,
    False,
    SortBool,
    SortNat,
    SortInt,
    SortReal,
    // punctuation and operators
    Semi,
    Comma,
    Colon,
    Hash,
    Dot,
    DotDot,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Arrow,   // ->
    Diamond, // <>
    Eq,      // =
    Ne,      // !=
    Lt,
    Le,
    Gt,
    Ge,
    AndAnd,
    OrOr,
    Bang,
    Eof,
}

impl std::fmt::Display for Tok {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Int(n) => write!(f, "integer `{n}`"),
            Tok::Real(x) => write!(f, "number `{x:?}`"),
            Tok::Act => write!(f, "`act`"),
            Tok::Proc => write!(f, "`proc`"),
            Tok::Init => write!(f, "`init`"),
            Tok::Sum => write!(f, "`sum`"),
            Tok::Dist => write!(f, "`dist`"),
            Tok::Delta => write!(f, "`delta`"),
            Tok::If => write!(f, "`if`"),
            Tok::True => write!(f, "`true`"),
            Tok::False => write!(f, "`false`"),
            Tok::SortBool => write!(f, "`Bool`"),
            Tok::SortNat => write!(f, "`Nat`"),
            Tok::SortInt => write!(f, "`Int`"),
            Tok::SortReal => write!(f, "`Real`"),
            Tok::Semi => write!(f, "`;`"),
            Tok::Comma => write!(f, "`,`"),
            Tok::Colon => write!(f, "`:`"),
            Tok::Hash => write!(f, "`#`"),
            Tok::Dot => write!(f, "`.`"),
            Tok::DotDot => write!(f, "`..`"),
            Tok::Plus => write!(f, "`+`"),
            Tok::Minus => write!(f, "`-`"),
            Tok::Star => write!(f, "`*`"),
            Tok::Slash => write!(f, "`/`"),
            Tok::Caret => write!(f, "`^`"),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::LBracket => write!(f, "`[`"),
            Tok::RBracket => write!(f, "`]`"),
            Tok::Arrow => write!(f, "`->`"),
            Tok::Diamond => write!(f, "`<>`"),
            Tok::Eq => write!(f, "`=`"),
            Tok::Ne => write!(f, "`!=`"),
            Tok::Lt => write!(f, "`<`"),
            Tok::Le => write!(f, "`<=`"),
            Tok::Gt => write!(f, "`>`"),
            Tok::Ge => write!(f, "`>=`"),
            Tok::AndAnd => write!(f, "`&&`"),
            Tok::OrOr => write!(f, "`||`"),
            Tok::Bang => write!(f, "`!`"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub line: u32,
    pub col: u32,
}

pub fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0usize;
    let mut line = 1u32;
    let mut col = 1u32;

    macro_rules! push {
        ($tok:expr, $l:expr, $c:expr) => {
            tokens.push(Token { tok: $tok, line: $l, col: $c })
        };
    }

    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let advance = |i: &mut usize, line: &mut u32, col: &mut u32| {
            if chars[*i] == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
            *i += 1;
        };

        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col);
            continue;
        }
        if c == '%' {
            while i < chars.len() && chars[i] != '\n' {
                advance(&mut i, &mut line, &mut col);
            }
            continue;
        }
        if c.is_ascii_digit() {
            let mut num = String::new();
            while i < chars.len() && chars[i].is_ascii_digit() {
                num.push(chars[i]);
                advance(&mut i, &mut line, &mut col);
            }
            // A decimal point followed by a digit, or an exponent, makes a
            // float literal; `0..` stays two integer tokens around `..`.
            let mut is_real = false;
            if i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit() {
                is_real = true;
                num.push('.');
                advance(&mut i, &mut line, &mut col);
                while i < chars.len() && chars[i].is_ascii_digit() {
                    num.push(chars[i]);
                    advance(&mut i, &mut line, &mut col);
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    is_real = true;
                    while i < j {
                        num.push(chars[i]);
                        advance(&mut i, &mut line, &mut col);
                    }
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        num.push(chars[i]);
                        advance(&mut i, &mut line, &mut col);
                    }
                }
            }
            if is_real {
                let x: f64 = num
                    .parse()
                    .map_err(|_| ParseError::at(tl, tc, format!("invalid number `{num}`")))?;
                push!(Tok::Real(x), tl, tc);
            } else {
                let n: BigInt = num
                    .parse()
                    .map_err(|_| ParseError::at(tl, tc, format!("invalid integer `{num}`")))?;
                push!(Tok::Int(n), tl, tc);
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut word = String::new();
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                word.push(chars[i]);
                advance(&mut i, &mut line, &mut col);
            }
            let tok = match word.as_str() {
                "act" => Tok::Act,
                "proc" => Tok::Proc,
                "init" => Tok::Init,
                "sum" => Tok::Sum,
                "dist" => Tok::Dist,
                "delta" => Tok::Delta,
                "if" => Tok::If,
                "true" => Tok::True,
                "false" => Tok::False,
                "Bool" => Tok::SortBool,
                "Nat" => Tok::SortNat,
                "Int" => Tok::SortInt,
                "Real" => Tok::SortReal,
                _ => Tok::Ident(word),
            };
            push!(tok, tl, tc);
            continue;
        }

        let two = |second: char| -> bool {
            i + 1 < chars.len() && chars[i + 1] == second
        };
        let tok = match c {
            ';' => Tok::Semi,
            ',' => Tok::Comma,
            ':' => Tok::Colon,
            '#' => Tok::Hash,
            '.' if two('.') => Tok::DotDot,
            '.' => Tok::Dot,
            '+' => Tok::Plus,
            '-' if two('>') => Tok::Arrow,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            '=' => Tok::Eq,
            '!' if two('=') => Tok::Ne,
            '!' => Tok::Bang,
            '<' if two('>') => Tok::Diamond,
            '<' if two('=') => Tok::Le,
            '<' => Tok::Lt,
            '>' if two('=') => Tok::Ge,
            '>' => Tok::Gt,
            '&' if two('&') => Tok::AndAnd,
            '|' if two('|') => Tok::OrOr,
            other => {
                return Err(ParseError::at(tl, tc, format!("unexpected character `{other}`")));
            }
        };
        let width = match tok {
            Tok::DotDot | Tok::Arrow | Tok::Ne | Tok::Diamond | Tok::Le | Tok::Ge
            | Tok::AndAnd | Tok::OrOr => 2,
            _ => 1,
        };
        for _ in 0..width {
            advance(&mut i, &mut line, &mut col);
        }
        push!(tok, tl, tc);
    }
    push!(Tok::Eof, line, col);
    Ok(tokens)
}
