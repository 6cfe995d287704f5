//! Textual format.
//!
//! Forms are parenthesized with the operator name first, vectors use
//! brackets (`[1, 2, 3]`, commas optional), and arithmetic inside numeric
//! positions is infix (`60*i`, `2*i + 2`). A `-` directly attached to a
//! number and preceded by whitespace (`-0.5`) is a negative literal;
//! subtraction is written with surrounding spaces (`a - b`). Binary set
//! operations accept more than two operands and associate to the left.

use std::fmt::Write as _;

use thiserror::Error;

use super::{AffineKind, ArithOp, Binding, BinopKind, Expr, Partitioning, Permutation, PrimKind};

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{line}:{column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("unexpected character {0:?}")]
    UnexpectedChar(char),
    #[error("expected {expected}, found {found}")]
    Unexpected { expected: &'static str, found: String },
    #[error("unexpected end of input, expected {0}")]
    UnexpectedEof(&'static str),
    #[error("{form} expects {expected}, got {found}")]
    Arity { form: String, expected: &'static str, found: usize },
    #[error("unknown operator {0:?}")]
    UnknownOperator(String),
    #[error("{0} is not a valid count")]
    InvalidInteger(String),
    #[error("{0}")]
    InvalidIndex(#[from] super::IndexError),
    #[error("trailing input after expression")]
    TrailingInput,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Plus,
    /// `glued` is true when whitespace precedes the minus and none follows,
    /// as in `1 -2`.
    Minus { glued: bool },
    Star,
    Slash,
    Number(f64),
    Ident(String),
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::LBracket => "'['".into(),
            Tok::RBracket => "']'".into(),
            Tok::Comma => "','".into(),
            Tok::Plus => "'+'".into(),
            Tok::Minus { .. } => "'-'".into(),
            Tok::Star => "'*'".into(),
            Tok::Slash => "'/'".into(),
            Tok::Number(v) => format!("number {v}"),
            Tok::Ident(s) => format!("{s:?}"),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut column) = (0, 1, 1);
    let mut after_space = true;
    while i < chars.len() {
        let c = chars[i];
        let start = (line, column);
        let push = |out: &mut Vec<Token>, tok| {
            out.push(Token { tok, line: start.0, column: start.1 });
        };
        if c.is_whitespace() {
            if c == '\n' {
                line += 1;
                column = 1;
            } else {
                column += 1;
            }
            i += 1;
            after_space = true;
            continue;
        }
        if c == ';' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let simple = match c {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '[' => Some(Tok::LBracket),
            ']' => Some(Tok::RBracket),
            ',' => Some(Tok::Comma),
            '+' => Some(Tok::Plus),
            '*' | '×' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '-' => {
                let next_space = chars.get(i + 1).is_none_or(|n| n.is_whitespace());
                Some(Tok::Minus { glued: after_space && !next_space })
            }
            _ => None,
        };
        if let Some(tok) = simple {
            push(&mut out, tok);
            i += 1;
            column += 1;
            after_space = matches!(c, '(' | '[' | ',');
            continue;
        }
        if c.is_ascii_digit() || c == '.' {
            let begin = i;
            while i < chars.len() {
                let d = chars[i];
                let exp_sign = (d == '-' || d == '+') && matches!(chars[i - 1], 'e' | 'E');
                if d.is_ascii_digit() || d == '.' || d == 'e' || d == 'E' || exp_sign {
                    i += 1;
                } else {
                    break;
                }
            }
            let s: String = chars[begin..i].iter().collect();
            let v: f64 = s.parse().map_err(|_| ParseError {
                line: start.0,
                column: start.1,
                kind: ParseErrorKind::Unexpected { expected: "a number", found: s.clone() },
            })?;
            column += i - begin;
            push(&mut out, Tok::Number(v));
            after_space = false;
            continue;
        }
        if c.is_alphabetic() || c == '_' || c == '?' {
            let begin = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || matches!(chars[i], '_' | '?' | '.')) {
                i += 1;
            }
            column += i - begin;
            push(&mut out, Tok::Ident(chars[begin..i].iter().collect()));
            after_space = false;
            continue;
        }
        return Err(ParseError { line, column, kind: ParseErrorKind::UnexpectedChar(c) });
    }
    Ok(out)
}

enum Head {
    Prim(PrimKind),
    Affine(AffineKind),
    Binop(BinopKind),
    Fold,
    List,
    Concat,
    Tabulate,
    Map2,
    Repeat,
    Sort,
    Unsort,
    Part,
    Unpart,
    Spherical,
    Unspherical,
}

fn head_of(name: &str) -> Option<Head> {
    Some(match name {
        "Cuboid" | "Cube" => Head::Prim(PrimKind::Cuboid),
        "Sphere" => Head::Prim(PrimKind::Sphere),
        "Cylinder" => Head::Prim(PrimKind::Cylinder),
        "HexPrism" | "Hexprism" => Head::Prim(PrimKind::HexPrism),
        "Translate" => Head::Affine(AffineKind::Translate),
        "Rotate" => Head::Affine(AffineKind::Rotate),
        "Scale" => Head::Affine(AffineKind::Scale),
        "TranslateSpherical" => Head::Affine(AffineKind::TranslateSpherical),
        "Union" => Head::Binop(BinopKind::Union),
        "Difference" | "Diff" => Head::Binop(BinopKind::Difference),
        "Intersection" | "Inter" => Head::Binop(BinopKind::Intersection),
        "Fold" => Head::Fold,
        "List" => Head::List,
        "Concat" => Head::Concat,
        "Tabulate" => Head::Tabulate,
        "Map2" => Head::Map2,
        "Repeat" => Head::Repeat,
        "Sort" => Head::Sort,
        "Unsort" => Head::Unsort,
        "Part" => Head::Part,
        "Unpart" => Head::Unpart,
        "Spherical" => Head::Spherical,
        "Unspherical" => Head::Unspherical,
        _ => return None,
    })
}

fn is_reserved(name: &str) -> bool {
    head_of(name).is_some() || affine_of(name).is_some() || binop_of(name).is_some()
}

fn affine_of(name: &str) -> Option<AffineKind> {
    AffineKind::ALL.into_iter().find(|k| k.name() == name)
}

fn binop_of(name: &str) -> Option<BinopKind> {
    match head_of(name) {
        Some(Head::Binop(k)) => Some(k),
        _ => None,
    }
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    end: (usize, usize),
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|t| &t.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks.get(self.pos).map_or(self.end, |t| (t.line, t.column))
    }

    fn err(&self, kind: ParseErrorKind) -> ParseError {
        let (line, column) = self.here();
        ParseError { line, column, kind }
    }

    fn err_at(&self, at: (usize, usize), kind: ParseErrorKind) -> ParseError {
        ParseError { line: at.0, column: at.1, kind }
    }

    fn next(&mut self, expected: &'static str) -> PResult<Tok> {
        match self.toks.get(self.pos) {
            Some(t) => {
                self.pos += 1;
                Ok(t.tok.clone())
            }
            None => Err(self.err(ParseErrorKind::UnexpectedEof(expected))),
        }
    }

    fn expect(&mut self, want: Tok, expected: &'static str) -> PResult<()> {
        let at = self.here();
        let got = self.next(expected)?;
        if got == want {
            Ok(())
        } else {
            Err(self.err_at(at, ParseErrorKind::Unexpected { expected, found: got.describe() }))
        }
    }

    fn eat(&mut self, want: &Tok) -> bool {
        if self.peek() == Some(want) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn ident(&mut self, expected: &'static str) -> PResult<String> {
        let at = self.here();
        match self.next(expected)? {
            Tok::Ident(s) => Ok(s),
            other => Err(self.err_at(at, ParseErrorKind::Unexpected { expected, found: other.describe() })),
        }
    }

    fn count(&mut self, allow_zero: bool) -> PResult<usize> {
        let at = self.here();
        match self.next("a count")? {
            Tok::Number(v) if v.fract() == 0.0 && v >= if allow_zero { 0.0 } else { 1.0 } && v < u32::MAX as f64 => {
                Ok(v as usize)
            }
            Tok::Number(v) => Err(self.err_at(at, ParseErrorKind::InvalidInteger(v.to_string()))),
            other => Err(self.err_at(at, ParseErrorKind::Unexpected { expected: "a count", found: other.describe() })),
        }
    }

    fn index_list(&mut self, allow_zero: bool) -> PResult<(Vec<usize>, (usize, usize))> {
        let at = self.here();
        self.expect(Tok::LParen, "'(' opening an index list")?;
        let mut out = Vec::new();
        loop {
            if self.eat(&Tok::RParen) {
                return Ok((out, at));
            }
            self.eat(&Tok::Comma);
            if self.eat(&Tok::RParen) {
                return Ok((out, at));
            }
            out.push(self.count(allow_zero)?);
        }
    }

    fn at_operand_boundary(&self) -> bool {
        matches!(self.peek(), None | Some(Tok::RParen) | Some(Tok::RBracket) | Some(Tok::Comma))
    }

    fn expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Plus) => ArithOp::Add,
                Some(Tok::Minus { glued: false }) => ArithOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::arith(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Star) => ArithOp::Mul,
                Some(Tok::Slash) => ArithOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Expr::arith(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> PResult<Expr> {
        if matches!(self.peek(), Some(Tok::Minus { .. })) {
            self.pos += 1;
            if let Some(Tok::Number(v)) = self.peek() {
                let v = *v;
                self.pos += 1;
                return Ok(Expr::Num(-v));
            }
            let inner = self.unary()?;
            return Ok(Expr::arith(ArithOp::Mul, Expr::Num(-1.0), inner));
        }
        self.atom()
    }

    fn atom(&mut self) -> PResult<Expr> {
        let at = self.here();
        match self.next("an expression")? {
            Tok::Number(v) => Ok(Expr::Num(v)),
            Tok::Ident(name) => {
                if is_reserved(&name) {
                    Err(self.err_at(
                        at,
                        ParseErrorKind::Unexpected { expected: "an expression", found: format!("bare operator {name:?}") },
                    ))
                } else {
                    Ok(Expr::Var(name))
                }
            }
            Tok::LBracket => self.vector(at),
            Tok::LParen => self.form(at),
            other => Err(self.err_at(at, ParseErrorKind::Unexpected { expected: "an expression", found: other.describe() })),
        }
    }

    fn vector(&mut self, at: (usize, usize)) -> PResult<Expr> {
        let mut items = Vec::new();
        loop {
            if self.eat(&Tok::RBracket) {
                break;
            }
            if !items.is_empty() {
                self.eat(&Tok::Comma);
            }
            if self.eat(&Tok::RBracket) {
                break;
            }
            items.push(self.expr()?);
        }
        let n = items.len();
        let mut it = items.into_iter();
        match n {
            2 => Ok(Expr::vec2(it.next().unwrap(), it.next().unwrap())),
            3 => Ok(Expr::vec3(it.next().unwrap(), it.next().unwrap(), it.next().unwrap())),
            _ => Err(self.err_at(at, ParseErrorKind::Arity { form: "vector".into(), expected: "2 or 3 components", found: n })),
        }
    }

    /// Parses operands until the closing parenthesis.
    fn operands(&mut self) -> PResult<Vec<Expr>> {
        let mut out = Vec::new();
        while !self.eat(&Tok::RParen) {
            if self.peek().is_none() {
                return Err(self.err(ParseErrorKind::UnexpectedEof("')'")));
            }
            out.push(self.expr()?);
        }
        Ok(out)
    }

    fn exact<const N: usize>(form: &str, at: (usize, usize), args: Vec<Expr>, expected: &'static str) -> PResult<[Expr; N]> {
        let n = args.len();
        args.try_into().map_err(|_| ParseError {
            line: at.0,
            column: at.1,
            kind: ParseErrorKind::Arity { form: form.to_string(), expected, found: n },
        })
    }

    fn form(&mut self, at: (usize, usize)) -> PResult<Expr> {
        let name = match self.peek() {
            Some(Tok::Ident(name)) => name.clone(),
            Some(Tok::Plus | Tok::Minus { glued: false } | Tok::Star | Tok::Slash) => {
                return self.prefix_arith(at);
            }
            _ => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "')' closing a parenthesized expression")?;
                return Ok(inner);
            }
        };
        let Some(head) = head_of(&name) else {
            if self.toks.get(self.pos + 1).is_some_and(|t| matches!(t.tok, Tok::RParen | Tok::Plus | Tok::Minus { .. } | Tok::Star | Tok::Slash)) {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "')' closing a parenthesized expression")?;
                return Ok(inner);
            }
            return Err(self.err(ParseErrorKind::UnknownOperator(name)));
        };
        self.pos += 1;
        let head_at = at;
        let b = Box::new;
        Ok(match head {
            Head::Prim(k) => {
                let [p] = Self::exact(k.name(), head_at, self.operands()?, "1 operand")?;
                Expr::Prim(k, b(p))
            }
            Head::Affine(k) => {
                let [p, c] = Self::exact(k.name(), head_at, self.operands()?, "2 operands")?;
                Expr::Affine(k, b(p), b(c))
            }
            Head::Binop(k) => {
                let args = self.operands()?;
                if args.len() < 2 {
                    return Err(self.err_at(head_at, ParseErrorKind::Arity { form: k.name().into(), expected: "at least 2 operands", found: args.len() }));
                }
                Expr::chain(k, args).expect("non-empty")
            }
            Head::Fold => {
                let kind_at = self.here();
                let kname = self.ident("a binary operator name")?;
                let k = binop_of(&kname).ok_or_else(|| self.err_at(kind_at, ParseErrorKind::UnknownOperator(kname)))?;
                let [l] = Self::exact("Fold", head_at, self.operands()?, "a binary operator and 1 list")?;
                Expr::Fold(k, b(l))
            }
            Head::List | Head::Concat => {
                let items = self.operands()?;
                if items.is_empty() {
                    return Err(self.err_at(head_at, ParseErrorKind::Arity { form: name, expected: "at least 1 element", found: 0 }));
                }
                if matches!(head, Head::List) {
                    Expr::List(items)
                } else {
                    Expr::Concat(items)
                }
            }
            Head::Tabulate => {
                let mut bindings = Vec::new();
                while self.peek() == Some(&Tok::LParen)
                    && matches!(self.peek_at(1), Some(Tok::Ident(v)) if !is_reserved(v))
                    && matches!(self.peek_at(2), Some(Tok::Number(_)))
                    && self.peek_at(3) == Some(&Tok::RParen)
                {
                    self.pos += 1;
                    let var = self.ident("a loop variable")?;
                    let bound = self.count(false)? as u32;
                    self.expect(Tok::RParen, "')' closing a binding")?;
                    bindings.push(Binding { var, bound });
                }
                if bindings.is_empty() {
                    return Err(self.err_at(head_at, ParseErrorKind::Arity { form: name, expected: "at least one (var bound) binding", found: 0 }));
                }
                let [body] = Self::exact("Tabulate", head_at, self.operands()?, "bindings and 1 body")?;
                Expr::Tabulate(bindings, b(body))
            }
            Head::Map2 => {
                let kind_at = self.here();
                let kname = self.ident("an affine operator name")?;
                let k = affine_of(&kname).ok_or_else(|| self.err_at(kind_at, ParseErrorKind::UnknownOperator(kname)))?;
                let [p, c] = Self::exact("Map2", head_at, self.operands()?, "an affine name and 2 lists")?;
                Expr::Map2(k, b(p), b(c))
            }
            Head::Repeat => {
                let n = self.count(false)? as u32;
                let [x] = Self::exact("Repeat", head_at, self.operands()?, "a count and 1 operand")?;
                Expr::Repeat(n, b(x))
            }
            Head::Sort | Head::Unsort => {
                let (idx, idx_at) = self.index_list(true)?;
                let p = Permutation::new(idx).map_err(|e| self.err_at(idx_at, e.into()))?;
                let [l] = Self::exact(&name, head_at, self.operands()?, "a permutation and 1 list")?;
                if matches!(head, Head::Sort) {
                    Expr::Sort(p, b(l))
                } else {
                    Expr::Unsort(p, b(l))
                }
            }
            Head::Part | Head::Unpart => {
                let (idx, idx_at) = self.index_list(false)?;
                let p = Partitioning::new(idx).map_err(|e| self.err_at(idx_at, e.into()))?;
                let args = self.operands()?;
                if matches!(head, Head::Part) {
                    let [l] = Self::exact("Part", head_at, args, "a partitioning and 1 list")?;
                    Expr::Part(p, b(l))
                } else {
                    if args.is_empty() {
                        return Err(self.err_at(head_at, ParseErrorKind::Arity { form: name, expected: "at least 1 list", found: 0 }));
                    }
                    Expr::Unpart(p, args)
                }
            }
            Head::Spherical | Head::Unspherical => {
                let n = self.count(false)? as u32;
                let [c, l] = Self::exact(&name, head_at, self.operands()?, "a count, a center and 1 list")?;
                if matches!(head, Head::Spherical) {
                    Expr::Spherical(n, b(c), b(l))
                } else {
                    Expr::Unspherical(n, b(c), b(l))
                }
            }
        })
    }

    fn prefix_arith(&mut self, at: (usize, usize)) -> PResult<Expr> {
        let op = match self.next("an arithmetic operator")? {
            Tok::Plus => ArithOp::Add,
            Tok::Minus { .. } => ArithOp::Sub,
            Tok::Star => ArithOp::Mul,
            _ => ArithOp::Div,
        };
        let [a, c] = Self::exact(op.symbol(), at, self.operands()?, "2 operands")?;
        Ok(Expr::arith(op, a, c))
    }
}

/// Parses a single expression.
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let toks = tokenize(text)?;
    let end = text.lines().enumerate().last().map_or((1, 1), |(i, l)| (i + 1, l.chars().count() + 1));
    let mut p = Parser { toks, pos: 0, end };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(p.err(ParseErrorKind::TrailingInput));
    }
    if p.at_operand_boundary() && p.peek().is_some() {
        return Err(p.err(ParseErrorKind::TrailingInput));
    }
    Ok(e)
}

fn prec(op: ArithOp) -> u8 {
    match op {
        ArithOp::Add | ArithOp::Sub => 1,
        ArithOp::Mul | ArithOp::Div => 2,
    }
}

fn write_num(out: &mut String, v: f64) {
    if v == 0.0 {
        out.push('0');
    } else {
        write!(out, "{v}").unwrap();
    }
}

fn write_arith(out: &mut String, e: &Expr) {
    let Expr::Arith(op, a, b) = e else {
        return write_compact(out, e);
    };
    let p = prec(*op);
    let lhs_paren = matches!(&**a, Expr::Arith(o, ..) if prec(*o) < p);
    let rhs_paren = matches!(&**b, Expr::Arith(o, ..) if prec(*o) <= p);
    let wrap = |out: &mut String, x: &Expr, paren: bool| {
        if paren {
            out.push('(');
            write_arith(out, x);
            out.push(')');
        } else {
            write_arith(out, x);
        }
    };
    wrap(out, a, lhs_paren);
    match op {
        ArithOp::Add | ArithOp::Sub => write!(out, " {} ", op.symbol()).unwrap(),
        _ => out.push_str(op.symbol()),
    }
    wrap(out, b, rhs_paren);
}

fn join_usize(xs: &[usize]) -> String {
    xs.iter().map(usize::to_string).collect::<Vec<_>>().join(" ")
}

/// Everything before the block children of a form, e.g. `(Rotate [0, 0, 60]`.
fn head_and_inline(e: &Expr) -> (String, Vec<&Expr>) {
    let mut h = String::from("(");
    let block: Vec<&Expr> = match e {
        Expr::Prim(k, p) => {
            h.push_str(k.name());
            h.push(' ');
            write_compact(&mut h, p);
            vec![]
        }
        Expr::Affine(k, p, c) => {
            h.push_str(k.name());
            h.push(' ');
            write_compact(&mut h, p);
            vec![c]
        }
        Expr::Binop(k, a, b) => {
            h.push_str(k.name());
            vec![a, b]
        }
        Expr::Fold(k, l) => {
            write!(h, "Fold {}", k.name()).unwrap();
            vec![l]
        }
        Expr::List(xs) => {
            h.push_str("List");
            xs.iter().collect()
        }
        Expr::Concat(xs) => {
            h.push_str("Concat");
            xs.iter().collect()
        }
        Expr::Tabulate(bs, body) => {
            h.push_str("Tabulate");
            for bnd in bs {
                write!(h, " ({} {})", bnd.var, bnd.bound).unwrap();
            }
            vec![body]
        }
        Expr::Map2(k, p, c) => {
            write!(h, "Map2 {}", k.name()).unwrap();
            vec![p, c]
        }
        Expr::Repeat(n, x) => {
            write!(h, "Repeat {n}").unwrap();
            vec![x]
        }
        Expr::Sort(p, l) => {
            write!(h, "Sort ({})", join_usize(p.indices())).unwrap();
            vec![l]
        }
        Expr::Unsort(p, l) => {
            write!(h, "Unsort ({})", join_usize(p.indices())).unwrap();
            vec![l]
        }
        Expr::Part(p, l) => {
            write!(h, "Part ({})", join_usize(p.lengths())).unwrap();
            vec![l]
        }
        Expr::Unpart(p, ls) => {
            write!(h, "Unpart ({})", join_usize(p.lengths())).unwrap();
            ls.iter().collect()
        }
        Expr::Spherical(n, c, l) | Expr::Unspherical(n, c, l) => {
            let name = if matches!(e, Expr::Spherical(..)) { "Spherical" } else { "Unspherical" };
            write!(h, "{name} {n} ").unwrap();
            write_compact(&mut h, c);
            vec![l]
        }
        Expr::Num(_) | Expr::Var(_) | Expr::Arith(..) | Expr::Vec2(_) | Expr::Vec3(_) => {
            unreachable!("leaf-like expressions have no head")
        }
    };
    (h, block)
}

fn write_compact(out: &mut String, e: &Expr) {
    match e {
        Expr::Num(v) => write_num(out, *v),
        Expr::Var(name) => out.push_str(name),
        Expr::Arith(..) => write_arith(out, e),
        Expr::Vec2(v) => {
            out.push('[');
            write_compact(out, &v[0]);
            out.push_str(", ");
            write_compact(out, &v[1]);
            out.push(']');
        }
        Expr::Vec3(v) => {
            out.push('[');
            for (i, c) in v.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_compact(out, c);
            }
            out.push(']');
        }
        _ => {
            let (head, block) = head_and_inline(e);
            out.push_str(&head);
            for c in block {
                out.push(' ');
                write_compact(out, c);
            }
            out.push(')');
        }
    }
}

/// Single-line canonical text.
pub fn print(e: &Expr) -> String {
    let mut out = String::new();
    write_compact(&mut out, e);
    out
}

const WIDTH: usize = 80;

fn write_pretty(out: &mut String, e: &Expr, indent: usize) {
    let flat = print(e);
    if indent + flat.len() <= WIDTH {
        out.push_str(&flat);
        return;
    }
    match e {
        Expr::Num(_) | Expr::Var(_) | Expr::Arith(..) | Expr::Vec2(_) | Expr::Vec3(_) | Expr::Prim(..) => {
            out.push_str(&flat)
        }
        _ => {
            let (head, block) = head_and_inline(e);
            out.push_str(&head);
            for c in block {
                out.push('\n');
                out.extend(std::iter::repeat_n(' ', indent + 2));
                write_pretty(out, c, indent + 2);
            }
            out.push(')');
        }
    }
}

/// Multi-line text that stays within 80 columns where possible; parses back
/// to the same tree as [`print`].
pub fn pretty(e: &Expr) -> String {
    let mut out = String::new();
    write_pretty(&mut out, e, 0);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Expr {
        parse(s).unwrap_or_else(|e| panic!("{s}: {e}"))
    }

    #[test]
    fn leaf_forms() {
        assert_eq!(p("(Sphere 2)"), Expr::sphere(2.0));
        assert_eq!(print(&Expr::sphere(2.0)), "(Sphere 2)");
        assert_eq!(p("(Cylinder [1, 5])"), Expr::cylinder(1.0, 5.0));
        assert_eq!(p("(Cuboid [1 2 3])"), Expr::cuboid(1.0, 2.0, 3.0));
    }

    #[test]
    fn variadic_binops_associate_left() {
        let abc = p("(Union a b c)");
        let expected = Expr::binop(
            BinopKind::Union,
            Expr::binop(BinopKind::Union, Expr::var("a"), Expr::var("b")),
            Expr::var("c"),
        );
        assert_eq!(abc, expected);
    }

    #[test]
    fn tabulate_with_infix_body() {
        let e = p("(Tabulate (i 6) (Rotate [0, 0, 60*i] x))");
        let expected = Expr::tabulate(
            vec![Binding::new("i", 6)],
            Expr::affine(
                AffineKind::Rotate,
                Expr::vec3(Expr::Num(0.0), Expr::Num(0.0), Expr::arith(ArithOp::Mul, Expr::Num(60.0), Expr::var("i"))),
                Expr::var("x"),
            ),
        );
        assert_eq!(e, expected);
        assert_eq!(print(&e), "(Tabulate (i 6) (Rotate [0, 0, 60*i] x))");
    }

    #[test]
    fn inverse_forms_print_without_commas() {
        let perm = Permutation::new(vec![1, 5, 0, 3, 4, 2]).unwrap();
        let e = Expr::Unsort(perm, Box::new(Expr::var("t")));
        assert_eq!(print(&e), "(Unsort (1 5 0 3 4 2) t)");
        assert_eq!(p("(Unsort (1, 5, 0, 3, 4, 2) t)"), e);
        let r = Expr::repeat(6, Expr::var("x"));
        assert_eq!(print(&r), "(Repeat 6 x)");
    }

    #[test]
    fn negative_literals_and_subtraction() {
        assert_eq!(p("[1, -0.5, 0]"), Expr::v3(1.0, -0.5, 0.0));
        assert_eq!(p("(List 1 -2)"), Expr::List(vec![Expr::Num(1.0), Expr::Num(-2.0)]));
        assert_eq!(p("(List 1 - 2)"), Expr::List(vec![Expr::arith(ArithOp::Sub, Expr::Num(1.0), Expr::Num(2.0))]));
        assert_eq!(p("[2*i+2, 7, j + 1]").as_literal_vec(), None);
        let e = p("(Sphere (2 + 3)*i)");
        assert_eq!(print(&e), "(Sphere (2 + 3)*i)");
        assert_eq!(p("(* 60 i)"), Expr::arith(ArithOp::Mul, Expr::Num(60.0), Expr::var("i")));
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse("(Union\n  (Sphere 1)\n  (Blob 2))").unwrap_err();
        assert_eq!((e.line, e.column), (3, 4));
        assert!(matches!(e.kind, ParseErrorKind::UnknownOperator(ref s) if s == "Blob"));

        let e = parse("(Cuboid [1, 2, 3, 4])").unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::Arity { found: 4, .. }));
        let e = parse("(Translate [1, 2, 3])").unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::Arity { found: 1, .. }));
        assert!(matches!(parse("(Sphere 1").unwrap_err().kind, ParseErrorKind::UnexpectedEof(_)));
        assert!(matches!(parse("(Sphere 1) x").unwrap_err().kind, ParseErrorKind::TrailingInput));
        assert!(matches!(parse("(Sort (0 0) x)").unwrap_err().kind, ParseErrorKind::InvalidIndex(_)));
        assert!(matches!(parse("(Repeat 0 x)").unwrap_err().kind, ParseErrorKind::InvalidInteger(_)));
    }

    #[test]
    fn pretty_output_reparses() {
        let src = "(Union (Cylinder [1, 5]) (Fold Union (Tabulate (i 6) (Rotate [0, 0, 60*i] (Translate [1, -0.5, 0] (Cuboid [10, 1, 1]))))))";
        let e = p(src);
        let text = pretty(&e);
        assert!(text.lines().count() > 1);
        assert!(text.lines().all(|l| l.len() <= WIDTH));
        assert_eq!(p(&text), e);
    }
}
