//! Lexer and untyped parse tree for `.dpw` sources.

use super::LangError;
use crate::symexp::rational::{parse_rational, Rational};

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Ident(String),
    /// digits with optional `.digits` groups, kept verbatim
    Number(String),
    Sym(&'static str),
    Eof,
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

const SYMS: [&str; 25] = [
    "<-", "<=", ">=", "==", "!=", "->", "..", "&&", "||", "<", ">", "=", "+", "-", "*", "/", "(", ")",
    "{", "}", "[", "]", ";", ",", "^",
];

pub fn lex(src: &str) -> Result<Vec<Token>, LangError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let start = (line, col);
        if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while i < chars.len()
                && (chars[i].is_ascii_alphanumeric()
                    || chars[i] == '_'
                    || chars[i] == '\''
                    || (chars[i] == '.' && chars.get(i + 1).is_some_and(|c| c.is_ascii_digit())))
            {
                s.push(chars[i]);
                i += 1;
                col += 1;
            }
            out.push(Token {
                tok: Tok::Ident(s),
                line: start.0,
                col: start.1,
            });
            continue;
        }
        if c.is_ascii_digit() {
            let mut s = String::new();
            loop {
                while i < chars.len() && chars[i].is_ascii_digit() {
                    s.push(chars[i]);
                    i += 1;
                    col += 1;
                }
                if i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit() {
                    s.push('.');
                    i += 1;
                    col += 1;
                } else {
                    break;
                }
            }
            out.push(Token {
                tok: Tok::Number(s),
                line: start.0,
                col: start.1,
            });
            continue;
        }
        if c == ':' {
            out.push(Token {
                tok: Tok::Sym(":"),
                line,
                col,
            });
            i += 1;
            col += 1;
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        let Some(sym) = SYMS.iter().find(|s| rest.starts_with(**s)) else {
            return Err(LangError::at(line, col, format!("unexpected character `{c}`")));
        };
        out.push(Token {
            tok: Tok::Sym(sym),
            line,
            col,
        });
        i += sym.len();
        col += sym.len();
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    And,
    Or,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl BinOp {
    pub fn is_cmp(self) -> bool {
        matches!(self, BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge | BinOp::Eq | BinOp::Ne)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PExpr {
    /// value, written as an integer literal
    Num(Rational, bool),
    Name(String),
    Index(String, Box<PExpr>),
    Eps,
    True,
    False,
    Call(String, Vec<PExpr>),
    Bin(BinOp, Box<PExpr>, Box<PExpr>),
    Neg(Box<PExpr>),
    Not(Box<PExpr>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum PStmtKind {
    Assign(PExpr, PExpr),
    Lap(PExpr, PExpr, PExpr),
    DLap(PExpr, PExpr, PExpr),
    ExpMech(PExpr, PExpr, String, Vec<PExpr>),
    Choose(PExpr, PExpr, String, Vec<PExpr>),
    If(PExpr, Vec<PStmt>, Vec<PStmt>),
    While(PExpr, Vec<PStmt>),
    For(String, i64, i64, Vec<PStmt>),
    Exit,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PStmt {
    pub label: Option<String>,
    pub kind: PStmtKind,
    pub pos: Pos,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    Input,
    Output,
    Local,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PDecl {
    pub role: Role,
    pub ty: String,
    pub name: String,
    /// array length, elements named `name[1]..name[n]`
    pub len: Option<i64>,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq)]
pub enum TableKind {
    Score,
    Dist,
    Func,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PTableRow {
    pub args: Vec<PExpr>,
    /// `(candidate, value)` pairs for score/dist tables; one `(None, value)` for functions
    pub entries: Vec<(Option<PExpr>, PTableValue)>,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq)]
pub enum PTableValue {
    Expr(PExpr),
    /// ratio of exponential polynomials in eps, kept as text
    Text(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct PTable {
    pub kind: TableKind,
    pub name: String,
    pub rows: Vec<PTableRow>,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct PProgram {
    pub dom: Option<i64>,
    pub decls: Vec<PDecl>,
    pub tables: Vec<PTable>,
    pub body: Vec<PStmt>,
}

pub struct Parser {
    toks: Vec<Token>,
    i: usize,
}

impl Parser {
    pub fn new(src: &str) -> Result<Self, LangError> {
        Ok(Parser { toks: lex(src)?, i: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.i].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.i + k).min(self.toks.len() - 1)].tok
    }

    fn pos(&self) -> Pos {
        let t = &self.toks[self.i];
        Pos { line: t.line, col: t.col }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, LangError> {
        let t = &self.toks[self.i];
        Err(LangError::at(t.line, t.col, msg.into()))
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.i].tok.clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_kw(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == s)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> Result<(), LangError> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.err(format!("expected `{s}`, found {}", describe(self.peek())))
        }
    }

    fn expect_kw(&mut self, s: &str) -> Result<(), LangError> {
        if self.is_kw(s) {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected `{s}`, found {}", describe(self.peek())))
        }
    }

    fn ident(&mut self) -> Result<String, LangError> {
        match self.peek().clone() {
            Tok::Ident(s) if !is_keyword(&s) => {
                self.bump();
                Ok(s)
            }
            t => self.err(format!("expected identifier, found {}", describe(&t))),
        }
    }

    fn integer(&mut self) -> Result<i64, LangError> {
        let neg = self.eat_sym("-");
        match self.peek().clone() {
            Tok::Number(s) if !s.contains('.') => {
                self.bump();
                let v: i64 = s.parse().map_err(|_| LangError::at(0, 0, "integer out of range"))?;
                Ok(if neg { -v } else { v })
            }
            t => self.err(format!("expected integer, found {}", describe(&t))),
        }
    }

    pub fn program(&mut self) -> Result<PProgram, LangError> {
        let mut p = PProgram::default();
        loop {
            let pos = self.pos();
            if self.is_kw("dom") && matches!(self.peek_at(1), Tok::Number(_)) {
                self.bump();
                let n = self.integer()?;
                if n < 0 {
                    return Err(LangError::at(pos.line, pos.col, "domain bound must be nonnegative"));
                }
                if p.dom.replace(n).is_some() {
                    return Err(LangError::at(pos.line, pos.col, "duplicate `dom` header"));
                }
                self.expect_sym(";")?;
            } else if self.is_kw("input") || self.is_kw("output") {
                let role = if self.is_kw("input") { Role::Input } else { Role::Output };
                self.bump();
                let d = self.decl(role, pos)?;
                p.decls.push(d);
            } else if ["real", "int", "bool", "dom"].iter().any(|k| self.is_kw(k))
                && matches!(self.peek_at(1), Tok::Ident(_))
                && !matches!(self.peek_at(2), Tok::Sym("<-"))
            {
                let d = self.decl(Role::Local, pos)?;
                p.decls.push(d);
            } else if self.is_kw("score") || self.is_kw("dist") || self.is_kw("table") {
                let t = self.table()?;
                p.tables.push(t);
            } else {
                break;
            }
        }
        p.body = self.block_items(true)?;
        if !matches!(self.peek(), Tok::Eof) {
            return self.err(format!("unexpected {}", describe(self.peek())));
        }
        Ok(p)
    }

    fn decl(&mut self, role: Role, pos: Pos) -> Result<PDecl, LangError> {
        let ty = match self.peek().clone() {
            Tok::Ident(s) if ["real", "int", "bool", "dom"].contains(&s.as_str()) => {
                self.bump();
                s
            }
            t => return self.err(format!("expected a type, found {}", describe(&t))),
        };
        let name = self.ident()?;
        let len = if self.eat_sym("[") {
            let n = self.integer()?;
            self.expect_sym("]")?;
            if n < 1 {
                return Err(LangError::at(pos.line, pos.col, "array length must be positive"));
            }
            Some(n)
        } else {
            None
        };
        self.expect_sym(";")?;
        Ok(PDecl {
            role,
            ty,
            name,
            len,
            pos,
        })
    }

    fn table(&mut self) -> Result<PTable, LangError> {
        let pos = self.pos();
        let kind = match self.bump() {
            Tok::Ident(s) if s == "score" => TableKind::Score,
            Tok::Ident(s) if s == "dist" => TableKind::Dist,
            _ => TableKind::Func,
        };
        let name = self.ident()?;
        self.expect_sym("{")?;
        let mut rows = Vec::new();
        while !self.is_sym("}") {
            let rpos = self.pos();
            self.expect_sym("(")?;
            let mut args = Vec::new();
            if !self.is_sym(")") {
                loop {
                    args.push(self.expr()?);
                    if !self.eat_sym(",") {
                        break;
                    }
                }
            }
            self.expect_sym(")")?;
            self.expect_sym("->")?;
            let mut entries = Vec::new();
            if kind == TableKind::Func {
                entries.push((None, PTableValue::Expr(self.expr()?)));
            } else {
                loop {
                    let cand = self.expr()?;
                    self.expect_sym(":")?;
                    let v = if kind == TableKind::Dist {
                        PTableValue::Text(self.raw_text_until(&[",", ";"])?)
                    } else {
                        PTableValue::Expr(self.expr()?)
                    };
                    entries.push((Some(cand), v));
                    if !self.eat_sym(",") {
                        break;
                    }
                }
            }
            self.expect_sym(";")?;
            rows.push(PTableRow { args, entries, pos: rpos });
        }
        self.expect_sym("}")?;
        Ok(PTable { kind, name, rows, pos })
    }

    /// Tokens up to the next top-level stop symbol, re-joined as text.
    fn raw_text_until(&mut self, stops: &[&str]) -> Result<String, LangError> {
        let mut depth = 0i32;
        let mut s = String::new();
        loop {
            match self.peek().clone() {
                Tok::Eof => return self.err("unterminated table entry"),
                Tok::Sym(x) if depth == 0 && stops.contains(&x) => break,
                Tok::Sym(x) => {
                    if x == "(" {
                        depth += 1;
                    }
                    if x == ")" {
                        depth -= 1;
                    }
                    s.push_str(x);
                }
                Tok::Ident(x) | Tok::Number(x) => {
                    if s.ends_with(|c: char| c.is_ascii_alphanumeric()) {
                        s.push(' ');
                    }
                    s.push_str(&x);
                }
            }
            self.bump();
        }
        if s.is_empty() {
            return self.err("empty table entry");
        }
        Ok(s)
    }

    fn block(&mut self) -> Result<Vec<PStmt>, LangError> {
        self.expect_sym("{")?;
        let b = self.block_items(false)?;
        self.expect_sym("}")?;
        Ok(b)
    }

    fn block_items(&mut self, top: bool) -> Result<Vec<PStmt>, LangError> {
        let mut out = Vec::new();
        loop {
            if (top && matches!(self.peek(), Tok::Eof)) || (!top && self.is_sym("}")) {
                return Ok(out);
            }
            out.push(self.stmt()?);
        }
    }

    fn stmt(&mut self) -> Result<PStmt, LangError> {
        let pos = self.pos();
        let mut label = None;
        match (self.peek().clone(), self.peek_at(1).clone()) {
            (Tok::Number(s), Tok::Sym(":")) => {
                self.bump();
                self.bump();
                label = Some(s);
            }
            (Tok::Ident(s), Tok::Sym(":")) if !is_keyword(&s) => {
                self.bump();
                self.bump();
                label = Some(s);
            }
            _ => {}
        }
        let kind = if self.is_kw("if") {
            self.bump();
            let c = self.expr()?;
            let t = self.block()?;
            let e = if self.is_kw("else") {
                self.bump();
                if self.is_kw("if") {
                    vec![self.stmt()?]
                } else {
                    self.block()?
                }
            } else {
                Vec::new()
            };
            PStmtKind::If(c, t, e)
        } else if self.is_kw("while") {
            self.bump();
            let c = self.expr()?;
            PStmtKind::While(c, self.block()?)
        } else if self.is_kw("for") {
            self.bump();
            let v = self.ident()?;
            self.expect_kw("in")?;
            let a = self.integer()?;
            self.expect_sym("..")?;
            let b = self.integer()?;
            PStmtKind::For(v, a, b, self.block()?)
        } else if self.is_kw("exit") {
            self.bump();
            self.expect_sym(";")?;
            PStmtKind::Exit
        } else {
            let lhs = self.lvalue()?;
            self.expect_sym("<-")?;
            let k = self.rhs(lhs)?;
            self.expect_sym(";")?;
            k
        };
        Ok(PStmt { label, kind, pos })
    }

    fn lvalue(&mut self) -> Result<PExpr, LangError> {
        let n = self.ident()?;
        if self.eat_sym("[") {
            let e = self.expr()?;
            self.expect_sym("]")?;
            Ok(PExpr::Index(n, Box::new(e)))
        } else {
            Ok(PExpr::Name(n))
        }
    }

    fn rhs(&mut self, lhs: PExpr) -> Result<PStmtKind, LangError> {
        let head = match self.peek() {
            Tok::Ident(s) if matches!(self.peek_at(1), Tok::Sym("(")) => s.clone(),
            _ => String::new(),
        };
        match head.as_str() {
            "Lap" | "DLap" => {
                self.bump();
                self.expect_sym("(")?;
                let a = self.expr()?;
                self.expect_sym(",")?;
                let m = self.expr()?;
                self.expect_sym(")")?;
                Ok(if head == "Lap" {
                    PStmtKind::Lap(lhs, a, m)
                } else {
                    PStmtKind::DLap(lhs, a, m)
                })
            }
            "ExpMech" | "choose" => {
                self.bump();
                self.expect_sym("(")?;
                let a = self.expr()?;
                self.expect_sym(",")?;
                let t = self.ident()?;
                let mut args = Vec::new();
                while self.eat_sym(",") {
                    args.push(self.expr()?);
                }
                self.expect_sym(")")?;
                Ok(if head == "ExpMech" {
                    PStmtKind::ExpMech(lhs, a, t, args)
                } else {
                    PStmtKind::Choose(lhs, a, t, args)
                })
            }
            _ => Ok(PStmtKind::Assign(lhs, self.expr()?)),
        }
    }

    pub fn expr(&mut self) -> Result<PExpr, LangError> {
        self.or_expr()
    }

    /// Whole input as a single expression.
    pub fn expr_only(src: &str) -> Result<PExpr, LangError> {
        let mut p = Parser::new(src)?;
        let e = p.expr()?;
        if *p.peek() != Tok::Eof {
            return p.err(format!("unexpected {}", describe(p.peek())));
        }
        Ok(e)
    }

    fn or_expr(&mut self) -> Result<PExpr, LangError> {
        let mut l = self.and_expr()?;
        while self.is_kw("or") || self.is_sym("||") {
            self.bump();
            let r = self.and_expr()?;
            l = PExpr::Bin(BinOp::Or, Box::new(l), Box::new(r));
        }
        Ok(l)
    }

    fn and_expr(&mut self) -> Result<PExpr, LangError> {
        let mut l = self.not_expr()?;
        while self.is_kw("and") || self.is_sym("&&") {
            self.bump();
            let r = self.not_expr()?;
            l = PExpr::Bin(BinOp::And, Box::new(l), Box::new(r));
        }
        Ok(l)
    }

    fn not_expr(&mut self) -> Result<PExpr, LangError> {
        if self.is_kw("not") {
            self.bump();
            let e = self.not_expr()?;
            return Ok(PExpr::Not(Box::new(e)));
        }
        self.cmp_expr()
    }

    fn cmp_expr(&mut self) -> Result<PExpr, LangError> {
        let l = self.add_expr()?;
        let op = match self.peek() {
            Tok::Sym("<") => BinOp::Lt,
            Tok::Sym("<=") => BinOp::Le,
            Tok::Sym(">") => BinOp::Gt,
            Tok::Sym(">=") => BinOp::Ge,
            Tok::Sym("==") | Tok::Sym("=") => BinOp::Eq,
            Tok::Sym("!=") => BinOp::Ne,
            _ => return Ok(l),
        };
        self.bump();
        let r = self.add_expr()?;
        Ok(PExpr::Bin(op, Box::new(l), Box::new(r)))
    }

    fn add_expr(&mut self) -> Result<PExpr, LangError> {
        let mut l = self.mul_expr()?;
        loop {
            let op = if self.is_sym("+") {
                BinOp::Add
            } else if self.is_sym("-") {
                BinOp::Sub
            } else {
                return Ok(l);
            };
            self.bump();
            let r = self.mul_expr()?;
            l = PExpr::Bin(op, Box::new(l), Box::new(r));
        }
    }

    fn mul_expr(&mut self) -> Result<PExpr, LangError> {
        let mut l = self.unary()?;
        loop {
            let op = if self.is_sym("*") {
                BinOp::Mul
            } else if self.is_sym("/") {
                BinOp::Div
            } else {
                return Ok(l);
            };
            self.bump();
            let r = self.unary()?;
            l = PExpr::Bin(op, Box::new(l), Box::new(r));
        }
    }

    fn unary(&mut self) -> Result<PExpr, LangError> {
        if self.eat_sym("-") {
            let e = self.unary()?;
            return Ok(match e {
                PExpr::Num(v, i) => PExpr::Num(-v, i),
                e => PExpr::Neg(Box::new(e)),
            });
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<PExpr, LangError> {
        match self.peek().clone() {
            Tok::Number(s) => {
                self.bump();
                let v = parse_rational(&s).map_err(|_| {
                    let t = &self.toks[self.i - 1];
                    LangError::at(t.line, t.col, format!("malformed number `{s}`"))
                })?;
                Ok(PExpr::Num(v, !s.contains('.')))
            }
            Tok::Sym("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Tok::Ident(s) => {
                match s.as_str() {
                    "true" => {
                        self.bump();
                        return Ok(PExpr::True);
                    }
                    "false" => {
                        self.bump();
                        return Ok(PExpr::False);
                    }
                    "eps" => {
                        self.bump();
                        return Ok(PExpr::Eps);
                    }
                    _ => {}
                }
                if is_keyword(&s) {
                    return self.err(format!("unexpected keyword `{s}`"));
                }
                self.bump();
                if self.eat_sym("(") {
                    let mut args = Vec::new();
                    if !self.is_sym(")") {
                        loop {
                            args.push(self.expr()?);
                            if !self.eat_sym(",") {
                                break;
                            }
                        }
                    }
                    self.expect_sym(")")?;
                    return Ok(PExpr::Call(s, args));
                }
                if self.eat_sym("[") {
                    let e = self.expr()?;
                    self.expect_sym("]")?;
                    return Ok(PExpr::Index(s, Box::new(e)));
                }
                Ok(PExpr::Name(s))
            }
            t => self.err(format!("expected an expression, found {}", describe(&t))),
        }
    }
}

const KEYWORDS: [&str; 19] = [
    "dom", "input", "output", "real", "int", "bool", "if", "else", "while", "for", "in", "exit", "true",
    "false", "not", "and", "or", "eps", "score",
];

pub fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s) || s == "dist" || s == "table"
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Number(s) => format!("number `{s}`"),
        Tok::Sym(s) => format!("`{s}`"),
        Tok::Eof => "end of input".into(),
    }
}
