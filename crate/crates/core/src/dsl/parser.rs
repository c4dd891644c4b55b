use std::fmt;

use thiserror::Error;

use super::ast::{BinOp, Expr, Func};

#[derive(Clone, Debug, PartialEq)]
pub enum ParseErrorKind {
    Syntax { expected: Vec<String>, found: String },
    UnknownIdentifier(String),
    Arity { func: String, expected: usize, got: usize },
    VariableOutOfRange { index: usize, dim: usize },
}

#[derive(Clone, Debug, PartialEq, Error)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: ", self.line, self.column)?;
        match &self.kind {
            ParseErrorKind::Syntax { expected, found } => {
                write!(f, "syntax error: found {found}, expected one of: {}", expected.join(", "))
            }
            ParseErrorKind::UnknownIdentifier(name) => write!(f, "unknown identifier '{name}'"),
            ParseErrorKind::Arity { func, expected, got } => {
                write!(f, "function '{func}' takes {expected} argument(s), got {got}")
            }
            ParseErrorKind::VariableOutOfRange { index, dim } => {
                write!(f, "variable index out of range: x{index} with chart dimension {dim}")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("identifier '{s}'"),
            Tok::Plus => "'+'".into(),
            Tok::Minus => "'-'".into(),
            Tok::Star => "'*'".into(),
            Tok::Slash => "'/'".into(),
            Tok::Caret => "'^'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::Comma => "','".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn syntax(expected: &[&str], found: &Spanned) -> ParseError {
    ParseError {
        kind: ParseErrorKind::Syntax {
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: found.tok.describe(),
        },
        line: found.line,
        column: found.column,
    }
}

const OPERAND: &[&str] = &["number", "variable", "function", "'('", "'-'"];

fn tokenize(src: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut line, mut col) = (1usize, 1usize);
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            col += 1;
            i += 1;
            continue;
        }
        let single = match c {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            _ => None,
        };
        if let Some(tok) = single {
            out.push(Spanned { tok, line: tl, column: tc });
            i += 1;
            col += 1;
            continue;
        }
        if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text: String = chars[start..i].iter().collect();
            let value: f64 = text.parse().map_err(|_| ParseError {
                kind: ParseErrorKind::Syntax {
                    expected: vec!["number".into()],
                    found: format!("'{text}'"),
                },
                line: tl,
                column: tc,
            })?;
            out.push(Spanned { tok: Tok::Num(value), line: tl, column: tc });
            col += i - start;
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            out.push(Spanned { tok: Tok::Ident(text), line: tl, column: tc });
            col += i - start;
            continue;
        }
        return Err(ParseError {
            kind: ParseErrorKind::Syntax {
                expected: OPERAND.iter().map(|s| s.to_string()).collect(),
                found: format!("character '{c}'"),
            },
            line: tl,
            column: tc,
        });
    }
    out.push(Spanned { tok: Tok::Eof, line, column: col });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    dim: usize,
}

impl Parser {
    fn peek(&self) -> &Spanned {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek().tok {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek().tok {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.peek().tok == Tok::Minus {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    // `^` binds tighter than unary minus and is right-associative; its
    // exponent may itself carry a sign (`x^-2`).
    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if self.peek().tok == Tok::Caret {
            self.bump();
            let exponent = self.unary()?;
            return Ok(Expr::binary(BinOp::Pow, base, exponent));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let t = self.bump();
        match &t.tok {
            Tok::Num(v) => Ok(Expr::Num(*v)),
            Tok::LParen => {
                let e = self.expr()?;
                let close = self.bump();
                if close.tok != Tok::RParen {
                    return Err(syntax(&["')'", "operator"], &close));
                }
                Ok(e)
            }
            Tok::Ident(name) => self.identifier(name.clone(), &t),
            _ => Err(syntax(OPERAND, &t)),
        }
    }

    fn identifier(&mut self, name: String, at: &Spanned) -> Result<Expr, ParseError> {
        if let Some(func) = Func::from_name(&name) {
            let open = self.bump();
            if open.tok != Tok::LParen {
                return Err(syntax(&["'('"], &open));
            }
            let mut args = Vec::new();
            if self.peek().tok != Tok::RParen {
                args.push(self.expr()?);
                while self.peek().tok == Tok::Comma {
                    self.bump();
                    args.push(self.expr()?);
                }
            }
            let close = self.bump();
            if close.tok != Tok::RParen {
                return Err(syntax(&["')'", "','", "operator"], &close));
            }
            if args.len() != 1 {
                return Err(ParseError {
                    kind: ParseErrorKind::Arity {
                        func: name,
                        expected: 1,
                        got: args.len(),
                    },
                    line: at.line,
                    column: at.column,
                });
            }
            return Ok(Expr::call(func, args.pop().expect("one argument")));
        }
        if name == "pi" {
            return Ok(Expr::Num(std::f64::consts::PI));
        }
        if let Some(digits) = name.strip_prefix('x') {
            if !digits.is_empty() && digits.chars().all(|c| c.is_ascii_digit()) {
                let index: usize = digits.parse().unwrap_or(usize::MAX);
                if index == 0 || index > self.dim {
                    return Err(ParseError {
                        kind: ParseErrorKind::VariableOutOfRange { index, dim: self.dim },
                        line: at.line,
                        column: at.column,
                    });
                }
                return Ok(Expr::Var(index - 1));
            }
        }
        Err(ParseError {
            kind: ParseErrorKind::UnknownIdentifier(name),
            line: at.line,
            column: at.column,
        })
    }
}

/// Parses `src` as an expression over the variables `x1..x{dim}`.
pub fn parse_expr(src: &str, dim: usize) -> Result<Expr, ParseError> {
    let toks = tokenize(src)?;
    let mut p = Parser { toks, pos: 0, dim };
    let e = p.expr()?;
    let end = p.bump();
    if end.tok != Tok::Eof {
        return Err(syntax(&["operator", "end of input"], &end));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_and_associativity() {
        let e = parse_expr("-x1^2", 1).unwrap();
        assert_eq!(e.to_string(), "(-(x1 ^ 2.0))");
        let e = parse_expr("2^3^2", 1).unwrap();
        assert_eq!(e.to_string(), "(2.0 ^ (3.0 ^ 2.0))");
        let e = parse_expr("1 - 2 - 3", 1).unwrap();
        assert_eq!(e.to_string(), "((1.0 - 2.0) - 3.0)");
        let e = parse_expr("x1 + 2 * x2 / 4", 2).unwrap();
        assert_eq!(e.to_string(), "(x1 + ((2.0 * x2) / 4.0))");
        let e = parse_expr("x1^-1", 1).unwrap();
        assert_eq!(e.to_string(), "(x1 ^ (-1.0))");
    }

    #[test]
    fn function_application() {
        let e = parse_expr("exp(2*x1)", 1).unwrap();
        assert_eq!(
            e,
            Expr::call(Func::Exp, Expr::binary(BinOp::Mul, Expr::Num(2.0), Expr::Var(0)))
        );
    }

    #[test]
    fn variable_out_of_range() {
        let err = parse_expr("x3", 2).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::VariableOutOfRange { index: 3, dim: 2 });
        assert_eq!((err.line, err.column), (1, 1));
        let err = parse_expr("x0", 2).unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::VariableOutOfRange { index: 0, .. }));
    }

    #[test]
    fn syntax_error_points_at_star() {
        let err = parse_expr("1 + * 2", 1).unwrap_err();
        assert_eq!((err.line, err.column), (1, 5));
        match err.kind {
            ParseErrorKind::Syntax { expected, found } => {
                assert_eq!(found, "'*'");
                assert!(expected.iter().any(|e| e == "number"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unterminated_call_reports_column() {
        let err = parse_expr("exp(", 1).unwrap_err();
        assert_eq!((err.line, err.column), (1, 5));
    }

    #[test]
    fn unknown_identifier_and_arity() {
        let err = parse_expr("foo + 1", 1).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnknownIdentifier("foo".into()));
        let err = parse_expr("sin(x1, x1)", 1).unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::Arity { got: 2, .. }));
        let err = parse_expr("cos()", 1).unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::Arity { got: 0, .. }));
    }

    #[test]
    fn multiline_positions() {
        let err = parse_expr("x1 +\n  )", 1).unwrap_err();
        assert_eq!((err.line, err.column), (2, 3));
    }

    #[test]
    fn scientific_literals() {
        let e = parse_expr("1.5e-3 * x1", 1).unwrap();
        assert_eq!(e.to_string(), "(0.0015 * x1)");
    }
}
