use crate::expr::{BinOp, UnOp};

use super::ast::*;
use super::lexer::{lex, Tok, Token};
use super::Diagnostic;

const TOP_KEYWORDS: &[&str] = &["class", "system", "const"];
const SECTION_KEYWORDS: &[&str] = &["signals", "vars", "states", "transitions"];

/// Parses a whole model. Never panics: every input yields either a model or
/// a non-empty diagnostic list.
pub fn parse_model(text: &str) -> Result<SourceModel, Vec<Diagnostic>> {
    let mut diags = Vec::new();
    let toks = lex(text, &mut diags);
    let mut p = Parser {
        toks: &toks,
        at: 0,
        diags,
    };
    let model = p.model();
    if p.diags.is_empty() {
        Ok(model)
    } else {
        p.diags.sort_by_key(|d| (d.line, d.col));
        Err(p.diags)
    }
}

/// Parses a standalone expression (used by tests and monitor tooling).
pub fn parse_expr(text: &str) -> Result<AExpr, Vec<Diagnostic>> {
    let mut diags = Vec::new();
    let toks = lex(text, &mut diags);
    let mut p = Parser {
        toks: &toks,
        at: 0,
        diags,
    };
    let e = p.expr();
    if e.is_ok() && p.peek() != &Tok::Eof {
        p.error(&["end of input"]);
    }
    match e {
        Ok(e) if p.diags.is_empty() => Ok(e),
        _ => Err(p.diags),
    }
}

/// Marker for "a diagnostic has been recorded".
struct Failed;

type PResult<T> = Result<T, Failed>;

struct Parser<'a> {
    toks: &'a [Token],
    at: usize,
    diags: Vec<Diagnostic>,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.at + k).min(self.toks.len() - 1)].tok
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].pos
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].tok.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Kw(x) if *x == k)
    }

    fn is_any_kw(&self, set: &[&str]) -> bool {
        matches!(self.peek(), Tok::Kw(x) if set.contains(x))
    }

    fn error(&mut self, expected: &[&str]) -> Failed {
        let found = self.peek().describe();
        let list: Vec<String> = expected
            .iter()
            .map(|e| match *e {
                "identifier" | "integer" | "expression" | "end of input" => e.to_string(),
                _ => format!("`{e}`"),
            })
            .collect();
        let message = if list.len() == 1 {
            format!("expected {}, found {found}", list[0])
        } else {
            format!("expected one of {}, found {found}", list.join(", "))
        };
        self.diags.push(Diagnostic {
            line: self.pos().line,
            col: self.pos().col,
            message,
            expected: expected.iter().map(|e| e.to_string()).collect(),
        });
        Failed
    }

    fn expect_sym(&mut self, s: &'static str) -> PResult<()> {
        if self.is_sym(s) {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&[s]))
        }
    }

    fn ident(&mut self) -> PResult<(String, Pos)> {
        let pos = self.pos();
        match self.peek() {
            Tok::Ident(s) => {
                let s = s.clone();
                self.bump();
                Ok((s, pos))
            }
            _ => Err(self.error(&["identifier"])),
        }
    }

    fn int(&mut self) -> PResult<i64> {
        match self.peek() {
            Tok::Int(v) => {
                let v = *v;
                self.bump();
                Ok(v)
            }
            _ => Err(self.error(&["integer"])),
        }
    }

    fn model(&mut self) -> SourceModel {
        let mut m = SourceModel::default();
        loop {
            let r = match self.peek() {
                Tok::Eof => break,
                Tok::Kw("const") => self.const_decl().map(|c| m.consts.push(c)),
                Tok::Kw("class") => self.class_decl().map(|c| m.classes.push(c)),
                Tok::Kw("system") => self.system_decl().map(|s| m.systems.push(s)),
                _ => Err(self.error(TOP_KEYWORDS)),
            };
            if r.is_err() {
                self.recover_top();
            }
        }
        m
    }

    fn recover_top(&mut self) {
        if !self.is_any_kw(TOP_KEYWORDS) {
            self.bump();
        }
        while !matches!(self.peek(), Tok::Eof) && !self.is_any_kw(TOP_KEYWORDS) {
            self.bump();
        }
    }

    fn const_decl(&mut self) -> PResult<ConstDecl> {
        let pos = self.pos();
        self.bump();
        let (name, _) = self.ident()?;
        self.expect_sym("=")?;
        let neg = if self.is_sym("-") {
            self.bump();
            true
        } else {
            false
        };
        let v = self.int()?;
        self.expect_sym(";")?;
        Ok(ConstDecl {
            name,
            value: if neg { -v } else { v },
            pos,
        })
    }

    fn class_decl(&mut self) -> PResult<ClassDecl> {
        let pos = self.pos();
        self.bump();
        let (name, _) = self.ident()?;
        self.expect_sym("{")?;
        let mut c = ClassDecl {
            name,
            signals: Vec::new(),
            vars: Vec::new(),
            states: Vec::new(),
            rules: Vec::new(),
            pos,
        };
        loop {
            let r = match self.peek() {
                Tok::Sym("}") => {
                    self.bump();
                    return Ok(c);
                }
                Tok::Kw("signals") => self.signals(&mut c),
                Tok::Kw("vars") => self.vars(&mut c),
                Tok::Kw("states") => self.states(&mut c),
                Tok::Kw("transitions") => {
                    self.bump();
                    self.rules(&mut c);
                    Ok(())
                }
                Tok::Eof => return Err(self.error(&["}"])),
                Tok::Kw(k) if TOP_KEYWORDS.contains(k) => return Err(self.error(&["}"])),
                _ => Err(self.error(&["signals", "vars", "states", "transitions", "}"])),
            };
            if r.is_err() {
                self.recover_section();
            }
        }
    }

    fn recover_section(&mut self) {
        loop {
            match self.peek() {
                Tok::Eof | Tok::Sym("}") => return,
                Tok::Kw(k) if SECTION_KEYWORDS.contains(k) || TOP_KEYWORDS.contains(k) => return,
                Tok::Sym(";") => {
                    self.bump();
                    return;
                }
                _ => {
                    self.bump();
                }
            }
        }
    }

    fn signals(&mut self, c: &mut ClassDecl) -> PResult<()> {
        self.bump();
        loop {
            let (name, pos) = self.ident()?;
            let mut params = Vec::new();
            if self.is_sym("(") {
                self.bump();
                if !self.is_sym(")") {
                    loop {
                        params.push(self.ident()?.0);
                        if self.is_sym(",") {
                            self.bump();
                        } else {
                            break;
                        }
                    }
                }
                self.expect_sym(")")?;
            }
            c.signals.push(SignalSig { name, params, pos });
            if self.is_sym(",") {
                self.bump();
            } else {
                return self.expect_sym(";");
            }
        }
    }

    fn vars(&mut self, c: &mut ClassDecl) -> PResult<()> {
        self.bump();
        loop {
            let (name, pos) = self.ident()?;
            self.expect_sym(":=")?;
            let init = self.expr()?;
            c.vars.push(VarInit { name, init, pos });
            if self.is_sym(",") {
                self.bump();
            } else {
                return self.expect_sym(";");
            }
        }
    }

    fn states(&mut self, c: &mut ClassDecl) -> PResult<()> {
        self.bump();
        loop {
            let initial = if self.is_kw("initial") {
                self.bump();
                true
            } else {
                false
            };
            let (name, _) = self.ident()?;
            c.states.push(StateDecl { name, initial });
            if self.is_sym(",") {
                self.bump();
            } else {
                return self.expect_sym(";");
            }
        }
    }

    fn at_rule_start(&self) -> bool {
        matches!(self.peek(), Tok::Ident(_))
            && matches!(self.peek_at(1), Tok::Sym(":") | Tok::Sym("->"))
    }

    fn rules(&mut self, c: &mut ClassDecl) {
        while matches!(self.peek(), Tok::Ident(_)) {
            match self.rule() {
                Ok(r) => c.rules.push(r),
                Err(Failed) => self.recover_rule(),
            }
        }
    }

    /// Skips to the end of a broken rule: past its closing `}`, or up to the
    /// start of the next rule or section.
    fn recover_rule(&mut self) {
        loop {
            match self.peek() {
                Tok::Eof => return,
                Tok::Kw(k) if SECTION_KEYWORDS.contains(k) || TOP_KEYWORDS.contains(k) => return,
                Tok::Sym("}") => {
                    self.bump();
                    return;
                }
                _ if self.at_rule_start() => return,
                _ => {
                    self.bump();
                }
            }
        }
    }

    fn rule(&mut self) -> PResult<RuleDecl> {
        let pos = self.pos();
        let label = if matches!(self.peek_at(1), Tok::Sym(":")) {
            let (l, _) = self.ident()?;
            self.bump();
            Some(l)
        } else {
            None
        };
        let (source, _) = self.ident()?;
        self.expect_sym("->")?;
        let (target, _) = self.ident()?;
        self.expect_sym("{")?;
        let trigger = if matches!(self.peek(), Tok::Ident(_)) {
            let (signal, tpos) = self.ident()?;
            let mut params = Vec::new();
            if self.is_sym("(") {
                self.bump();
                if !self.is_sym(")") {
                    loop {
                        params.push(self.ident()?.0);
                        if self.is_sym(",") {
                            self.bump();
                        } else {
                            break;
                        }
                    }
                }
                self.expect_sym(")")?;
            }
            Some(TriggerDecl {
                signal,
                params,
                pos: tpos,
            })
        } else {
            None
        };
        let guard = if self.is_sym("[") {
            self.bump();
            let g = self.expr()?;
            self.expect_sym("]")?;
            Some(g)
        } else {
            None
        };
        let mut actions = Vec::new();
        if self.is_sym("/") {
            self.bump();
            while !self.is_sym("}") {
                actions.push(self.action()?);
                if self.is_sym(";") {
                    self.bump();
                } else if !self.is_sym("}") {
                    return Err(self.error(&[";", "}"]));
                }
            }
        } else if !self.is_sym("}") {
            let mut exp = Vec::new();
            if trigger.is_none() {
                exp.push("identifier");
            }
            if guard.is_none() {
                exp.push("[");
            }
            exp.extend(["/", "}"]);
            return Err(self.error(&exp));
        }
        self.bump();
        Ok(RuleDecl {
            label,
            source,
            target,
            trigger,
            guard,
            actions,
            pos,
        })
    }

    fn action(&mut self) -> PResult<ActionDecl> {
        let (name, pos) = self.ident()?;
        if self.is_sym(":=") {
            self.bump();
            let value = self.expr()?;
            return Ok(ActionDecl::Assign {
                var: name,
                value,
                pos,
            });
        }
        if !self.is_sym(".") {
            return Err(self.error(&[":=", "."]));
        }
        self.bump();
        let (signal, _) = self.ident()?;
        let mut args = Vec::new();
        if self.is_sym("(") {
            self.bump();
            if !self.is_sym(")") {
                loop {
                    args.push(self.expr()?);
                    if self.is_sym(",") {
                        self.bump();
                    } else {
                        break;
                    }
                }
            }
            self.expect_sym(")")?;
        }
        Ok(ActionDecl::Send {
            target: name,
            signal,
            args,
            pos,
        })
    }

    fn system_decl(&mut self) -> PResult<SystemDecl> {
        let pos = self.pos();
        self.bump();
        let (name, _) = self.ident()?;
        self.expect_sym("{")?;
        let mut instances = Vec::new();
        while !self.is_sym("}") {
            let (iname, ipos) = self.ident()?;
            self.expect_sym(":")?;
            let (class, _) = self.ident()?;
            let capacity = match self.peek() {
                Tok::Ident(s) if s == "capacity" => {
                    self.bump();
                    Some(self.int()? as usize)
                }
                _ => None,
            };
            if !self.is_sym(";") {
                return Err(if capacity.is_none() {
                    self.error(&["capacity", ";"])
                } else {
                    self.error(&[";"])
                });
            }
            self.bump();
            instances.push(InstanceDecl {
                name: iname,
                class,
                capacity,
                pos: ipos,
            });
        }
        self.bump();
        Ok(SystemDecl {
            name,
            instances,
            pos,
        })
    }

    pub(super) fn expr(&mut self) -> PResult<AExpr> {
        self.binary_level(1)
    }

    fn infix_op(&self) -> Option<BinOp> {
        Some(match self.peek() {
            Tok::Kw("or") => BinOp::Or,
            Tok::Kw("and") => BinOp::And,
            Tok::Sym("=") => BinOp::Eq,
            Tok::Sym("/=") => BinOp::Ne,
            Tok::Sym("<") => BinOp::Lt,
            Tok::Sym("<=") => BinOp::Le,
            Tok::Sym(">") => BinOp::Gt,
            Tok::Sym(">=") => BinOp::Ge,
            Tok::Sym("+") => BinOp::Add,
            Tok::Sym("-") => BinOp::Sub,
            Tok::Sym("*") => BinOp::Mul,
            Tok::Sym("%") => BinOp::Mod,
            _ => return None,
        })
    }

    fn binary_level(&mut self, level: u8) -> PResult<AExpr> {
        if level > 5 {
            return self.unary();
        }
        let mut lhs = self.binary_level(level + 1)?;
        while let Some(op) = self.infix_op().filter(|op| op.precedence() == level) {
            self.bump();
            let rhs = self.binary_level(level + 1)?;
            lhs = AExpr::Binary(op, Box::new(lhs), Box::new(rhs));
            if op.is_comparison() {
                break;
            }
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<AExpr> {
        if self.is_sym("-") {
            self.bump();
            return Ok(AExpr::Unary(UnOp::Neg, Box::new(self.unary()?)));
        }
        if self.is_kw("not") {
            self.bump();
            return Ok(AExpr::Unary(UnOp::Not, Box::new(self.unary()?)));
        }
        self.primary()
    }

    fn primary(&mut self) -> PResult<AExpr> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                Ok(AExpr::Int(v))
            }
            Tok::Kw("true") => {
                self.bump();
                Ok(AExpr::Bool(true))
            }
            Tok::Kw("false") => {
                self.bump();
                Ok(AExpr::Bool(false))
            }
            Tok::Ident(s) => {
                self.bump();
                Ok(AExpr::Name(s, pos))
            }
            Tok::Sym("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Tok::Kw(k @ ("min" | "max")) => {
                self.bump();
                self.expect_sym("(")?;
                let a = self.expr()?;
                self.expect_sym(",")?;
                let b = self.expr()?;
                self.expect_sym(")")?;
                let op = if k == "min" { BinOp::Min } else { BinOp::Max };
                Ok(AExpr::Binary(op, Box::new(a), Box::new(b)))
            }
            _ => Err(self.error(&["expression"])),
        }
    }
}
