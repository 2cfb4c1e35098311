use crate::base::{Bound, Linearity, Sign};
use crate::calculus::{Entry, SplitSequent};
use crate::types::TypeExpr;

use super::ast::*;
use super::lexer::{lex, Tok};
use super::{ParseError, Span};

type Result<T> = std::result::Result<T, ParseError>;

struct Parser {
    toks: Vec<(Tok, Span)>,
    pos: usize,
    end: Span,
}

pub fn parse(src: &str) -> Result<File> {
    let mut p = Parser::new(src)?;
    let mut items = Vec::new();
    while !p.at_end() {
        items.push(p.item()?);
    }
    Ok(File { items })
}

pub fn parse_type(src: &str) -> Result<TypeExpr> {
    let mut p = Parser::new(src)?;
    let t = p.ty()?;
    p.finish()?;
    Ok(t)
}

pub fn parse_sequent(src: &str) -> Result<SeqAst> {
    let mut p = Parser::new(src)?;
    let s = p.sequent()?;
    p.finish()?;
    Ok(s)
}

pub fn parse_term(src: &str) -> Result<TermAst> {
    let mut p = Parser::new(src)?;
    let t = p.term()?;
    p.finish()?;
    Ok(t)
}

/// Reports the first stray closer, or the innermost opener left unclosed.
fn balanced(toks: &[(Tok, Span)]) -> Result<()> {
    let mut open: Vec<(&'static str, Span)> = Vec::new();
    for (t, span) in toks {
        let Tok::Sym(s) = t else { continue };
        match *s {
            "{" | "(" | "[" => open.push((s, *span)),
            "}" | ")" | "]" => {
                let want = match *s {
                    "}" => "{",
                    ")" => "(",
                    _ => "[",
                };
                match open.pop() {
                    Some((o, _)) if o == want => {}
                    Some((o, at)) => {
                        return Err(ParseError::new(
                            *span,
                            format!("`{s}` does not close `{o}` opened at {at}"),
                        ))
                    }
                    None => return Err(ParseError::new(*span, format!("unmatched `{s}`"))),
                }
            }
            _ => {}
        }
    }
    match open.pop() {
        Some((o, at)) => Err(ParseError::new(at, format!("unclosed `{o}`"))),
        None => Ok(()),
    }
}

impl Parser {
    fn new(src: &str) -> Result<Self> {
        let toks = lex(src)?;
        balanced(&toks)?;
        let lines = src.lines().count().max(1);
        let last = src.lines().last().map_or(0, |l| l.chars().count());
        Ok(Parser {
            toks,
            pos: 0,
            end: Span {
                line: lines,
                col: last + 1,
            },
        })
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn span(&self) -> Span {
        self.toks.get(self.pos).map_or(self.end, |t| t.1)
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn peek_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Some(Tok::Sym(x)) if *x == s)
    }

    fn peek_word(&self, w: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(x)) if x == w)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        let found = match self.peek() {
            Some(t) => format!(", found {t}"),
            None => ", found end of input".into(),
        };
        Err(ParseError::new(self.span(), format!("{}{found}", msg.into())))
    }

    fn finish(&self) -> Result<()> {
        if self.at_end() {
            Ok(())
        } else {
            self.err("expected end of input")
        }
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.peek_sym(s) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn sym(&mut self, s: &str) -> Result<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.err(format!("expected `{s}`"))
        }
    }

    fn eat_word(&mut self, w: &str) -> bool {
        if self.peek_word(w) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn word(&mut self, w: &str) -> Result<()> {
        if self.eat_word(w) {
            Ok(())
        } else {
            self.err(format!("expected `{w}`"))
        }
    }

    fn ident(&mut self) -> Result<String> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => self.err("expected a name"),
        }
    }

    fn int(&mut self) -> Result<usize> {
        match self.peek() {
            Some(Tok::Int(n)) => {
                let n = *n;
                self.pos += 1;
                Ok(n)
            }
            _ => self.err("expected a number"),
        }
    }

    fn sign(&mut self) -> Result<Sign> {
        if self.eat_sym("+") {
            Ok(Sign::Pos)
        } else if self.eat_sym("-") {
            Ok(Sign::Neg)
        } else {
            self.err("expected a sign `+` or `-`")
        }
    }

    /// Item separators inside blocks are optional.
    fn skip_semis(&mut self) {
        while self.eat_sym(";") {}
    }

    /// `sep`-separated list up to (not including) `close`.
    fn list<T>(&mut self, sep: &str, close: &str, mut f: impl FnMut(&mut Self) -> Result<T>) -> Result<Vec<T>> {
        let mut out = Vec::new();
        if self.peek_sym(close) {
            return Ok(out);
        }
        loop {
            out.push(f(self)?);
            if !self.eat_sym(sep) {
                return Ok(out);
            }
        }
    }

    fn item(&mut self) -> Result<Item> {
        let span = self.span();
        let kw = self.ident()?;
        let kind = match kw.as_str() {
            "use" => {
                if let Some(Tok::Str(path)) = self.peek().cloned() {
                    self.pos += 1;
                    self.sym(";")?;
                    ItemKind::Include(path)
                } else if self.eat_word("doctrine") {
                    let n = self.ident()?;
                    self.sym(";")?;
                    ItemKind::UseDoctrine(n)
                } else if self.eat_word("base") {
                    let n = self.ident()?;
                    self.sym(";")?;
                    ItemKind::UseBase(n)
                } else {
                    return self.err("expected `doctrine`, `base` or a quoted path after `use`");
                }
            }
            "base" => ItemKind::Base(self.base_decl()?),
            "doctrine" => ItemKind::Doctrine(self.doctrine_decl()?),
            "sketch" => ItemKind::Sketch(self.sketch_decl()?),
            "map" => ItemKind::Map(self.map_decl()?),
            "goal" => {
                let name = self.ident()?;
                self.word("in")?;
                let sketch = self.ident()?;
                self.sym(":")?;
                let sequent = self.sequent()?;
                self.sym(";")?;
                ItemKind::Goal { name, sketch, sequent }
            }
            "proof" => {
                let name = self.ident()?;
                self.word("in")?;
                let sketch = self.ident()?;
                self.sym(":")?;
                let sequent = self.sequent()?;
                self.sym("=")?;
                let term = self.term()?;
                self.sym(";")?;
                ItemKind::Proof {
                    name,
                    sketch,
                    sequent,
                    term,
                }
            }
            "expect" => {
                let lhs = self.ident()?;
                let verdict = self.ident()?;
                let e = match verdict.as_str() {
                    "rejects" => Expectation::Rejects {
                        proof: lhs,
                        code: self.ident()?,
                    },
                    "equal" | "notequal" | "unknown" => Expectation::Verdict {
                        lhs,
                        verdict,
                        rhs: self.ident()?,
                    },
                    _ => {
                        self.pos -= 1;
                        return self.err("expected `rejects`, `equal`, `notequal` or `unknown`");
                    }
                };
                self.sym(";")?;
                ItemKind::Expect(e)
            }
            "budget" => {
                self.sym("{")?;
                let mut entries = Vec::new();
                self.skip_semis();
                while !self.eat_sym("}") {
                    let k = self.ident()?;
                    self.sym("=")?;
                    entries.push((k, self.int()?));
                    self.skip_semis();
                }
                ItemKind::Budget(entries)
            }
            _ => {
                self.pos -= 1;
                return self.err("expected an item (`use`, `base`, `doctrine`, `sketch`, `map`, `goal`, `proof`, `expect` or `budget`)");
            }
        };
        self.skip_semis();
        Ok(Item { span, kind })
    }

    fn base_decl(&mut self) -> Result<BaseDecl> {
        let name = self.ident()?;
        self.sym("{")?;
        let mut decl = BaseDecl {
            name,
            sorts: Vec::new(),
            clauses: Vec::new(),
        };
        self.skip_semis();
        while !self.eat_sym("}") {
            if self.eat_word("sort") {
                let s = self.ident()?;
                self.sym(":")?;
                let lin = match self.ident()?.as_str() {
                    "lin" => Linearity::Linear,
                    "nonlin" => Linearity::Nonlinear,
                    _ => {
                        self.pos -= 1;
                        return self.err("expected `lin` or `nonlin`");
                    }
                };
                decl.sorts.push((s, lin));
            } else if self.eat_word("hom") {
                decl.clauses.push(self.clause()?);
            } else {
                return self.err("expected `sort` or `hom`");
            }
            self.skip_semis();
        }
        Ok(decl)
    }

    fn clause(&mut self) -> Result<ClauseAst> {
        self.sym("{")?;
        self.skip_semis();
        self.word("pos")?;
        self.sym("=")?;
        let kind = self.ident()?;
        self.sym("(")?;
        let sorts = self.list(",", ")", |p| p.ident())?;
        self.sym(")")?;
        let pos = match kind.as_str() {
            "exact" => PosAst::Exact(sorts),
            "one_of" => PosAst::OneOf(sorts),
            "any" => PosAst::Any(sorts),
            _ => return self.err("expected `exact`, `one_of` or `any`"),
        };
        self.skip_semis();
        let mut neg = Vec::new();
        if self.eat_word("neg") {
            self.sym("=")?;
            self.sym("{")?;
            neg = self.list(",", "}", |p| {
                let s = p.ident()?;
                p.sym(":")?;
                let b = match p.ident()?.as_str() {
                    "zero" => Bound::Zero,
                    "one" => Bound::ExactlyOne,
                    "opt" => Bound::AtMostOne,
                    "many" => Bound::Unbounded,
                    _ => {
                        p.pos -= 1;
                        return p.err("expected `zero`, `one`, `opt` or `many`");
                    }
                };
                Ok((s, b))
            })?;
            self.sym("}")?;
            self.skip_semis();
        }
        self.sym("}")?;
        Ok(ClauseAst { pos, neg })
    }

    fn doctrine_decl(&mut self) -> Result<DoctrineDecl> {
        let name = self.ident()?;
        let kind = match self.ident()?.as_str() {
            "on" => DoctrineKind::On(self.ident()?),
            "extends" => DoctrineKind::Extends(self.ident()?),
            "restricts" => DoctrineKind::Restricts(self.ident()?),
            _ => {
                self.pos -= 1;
                return self.err("expected `on`, `extends` or `restricts`");
            }
        };
        let mut decl = DoctrineDecl {
            name,
            kind,
            cones: Vec::new(),
            keep: Vec::new(),
            sorting: None,
        };
        self.sym("{")?;
        self.skip_semis();
        while !self.eat_sym("}") {
            if self.eat_word("cone") {
                decl.cones.push(self.cone()?);
            } else if self.eat_word("keep") {
                decl.keep.extend(self.list(",", ";", |p| p.ident())?);
            } else if self.eat_word("sorting") {
                self.sym("{")?;
                let mut derived = Vec::new();
                self.skip_semis();
                while !self.eat_sym("}") {
                    self.word("derived")?;
                    let s = self.ident()?;
                    self.word("via")?;
                    derived.push((s, self.ident()?));
                    self.skip_semis();
                }
                decl.sorting = Some(derived);
            } else {
                return self.err("expected `cone`, `keep` or `sorting`");
            }
            self.skip_semis();
        }
        Ok(decl)
    }

    fn cone(&mut self) -> Result<ConeAst> {
        let name = self.ident()?;
        self.sym("{")?;
        let mut objects = Vec::new();
        let mut vertex = None;
        let mut projections = Vec::new();
        self.skip_semis();
        while !self.eat_sym("}") {
            if self.eat_word("obj") {
                let o = self.ident()?;
                self.sym(":")?;
                objects.push((o, self.ident()?));
            } else if self.eat_word("vertex") {
                let s = self.ident()?;
                vertex = Some((s, self.sign()?));
            } else if self.eat_word("proj") {
                let p = self.ident()?;
                self.sym("(")?;
                let es = self.list(",", ")", |p| {
                    let o = p.ident()?;
                    Ok((o, p.sign()?))
                })?;
                self.sym(")")?;
                projections.push((p, es));
            } else {
                return self.err("expected `obj`, `vertex` or `proj`");
            }
            self.skip_semis();
        }
        let Some(vertex) = vertex else {
            return self.err(format!("cone `{name}` has no vertex"));
        };
        Ok(ConeAst {
            name,
            objects,
            vertex,
            projections,
        })
    }

    fn sketch_decl(&mut self) -> Result<SketchDecl> {
        let name = self.ident()?;
        self.word("over")?;
        let doctrine = self.ident()?;
        self.sym("{")?;
        let mut entries = Vec::new();
        self.skip_semis();
        while !self.eat_sym("}") {
            let span = self.span();
            let kw = self.ident()?;
            let e = match kw.as_str() {
                "obj" => {
                    let name = self.ident()?;
                    self.sym(":")?;
                    SketchEntry::Object {
                        name,
                        sort: self.ident()?,
                    }
                }
                "gen" => {
                    let name = self.ident()?;
                    self.sym(":")?;
                    self.sym("(")?;
                    let signature = self.list(",", ")", |p| {
                        let o = p.ident()?;
                        Ok((o, p.sign()?))
                    })?;
                    self.sym(")")?;
                    SketchEntry::Generator { name, signature }
                }
                "extremal" => {
                    let cone = self.ident()?;
                    self.sym("{")?;
                    let assign = self.list(";", "}", |p| {
                        let k = p.ident()?;
                        p.sym(":=")?;
                        Ok((k, p.ident()?))
                    })?;
                    self.skip_semis();
                    self.sym("}")?;
                    SketchEntry::Extremal { cone, assign }
                }
                "eq" => {
                    let name = self.ident()?;
                    self.sym(":")?;
                    let lhs = self.term()?;
                    self.sym("=")?;
                    SketchEntry::Equation {
                        name,
                        lhs,
                        rhs: self.term()?,
                    }
                }
                _ => {
                    self.pos -= 1;
                    return self.err("expected `obj`, `gen`, `extremal` or `eq`");
                }
            };
            entries.push((span, e));
            self.skip_semis();
        }
        Ok(SketchDecl {
            name,
            doctrine,
            entries,
        })
    }

    fn map_decl(&mut self) -> Result<MapDecl> {
        let name = self.ident()?;
        self.sym(":")?;
        let source = self.ident()?;
        self.sym("->")?;
        let target = self.ident()?;
        self.sym("{")?;
        let mut decl = MapDecl {
            name,
            source,
            target,
            sorts: Vec::new(),
            cones: Vec::new(),
        };
        self.skip_semis();
        while !self.eat_sym("}") {
            if self.eat_word("sort") {
                let a = self.ident()?;
                self.sym("->")?;
                decl.sorts.push((a, self.ident()?));
            } else if self.eat_word("cone") {
                let source = self.ident()?;
                self.sym("->")?;
                let target = self.ident()?;
                self.sym("{")?;
                let pair = |p: &mut Self| {
                    let a = p.ident()?;
                    p.sym("->")?;
                    Ok((a, p.ident()?))
                };
                let objects = self.list(",", ";", pair)?;
                let mut projections = Vec::new();
                if self.eat_sym(";") {
                    projections = self.list(",", "}", pair)?;
                }
                self.sym("}")?;
                decl.cones.push(ConeMapAst {
                    source,
                    target,
                    objects,
                    projections,
                });
            } else {
                return self.err("expected `sort` or `cone`");
            }
            self.skip_semis();
        }
        Ok(decl)
    }

    pub(crate) fn ty(&mut self) -> Result<TypeExpr> {
        let head = self.ident()?;
        if self.eat_sym("[") {
            let args = self.list(",", "]", |p| p.ty())?;
            self.sym("]")?;
            Ok(TypeExpr::Comp(head, args))
        } else {
            Ok(TypeExpr::Gen(head))
        }
    }

    fn entry(&mut self) -> Result<Entry> {
        let t = self.ty()?;
        Ok(Entry::new(t, self.sign()?))
    }

    fn entries(&mut self) -> Result<Vec<Entry>> {
        let mut out = Vec::new();
        if !matches!(self.peek(), Some(Tok::Ident(_))) {
            return Ok(out);
        }
        loop {
            out.push(self.entry()?);
            if !self.eat_sym(",") {
                return Ok(out);
            }
        }
    }

    fn zone(&mut self) -> Result<Vec<TypeExpr>> {
        if self.eat_sym(".") {
            return Ok(Vec::new());
        }
        let mut out = vec![self.ty()?];
        while self.eat_sym(",") {
            out.push(self.ty()?);
        }
        Ok(out)
    }

    fn sequent(&mut self) -> Result<SeqAst> {
        if self.eat_sym("|-") {
            return Ok(SeqAst::Entries(self.entries()?));
        }
        let theta = self.zone()?;
        self.sym("|")?;
        let gamma = self.zone()?;
        self.sym("|-")?;
        let delta = self.zone()?;
        let upsilon = if self.eat_sym("|") { Some(self.zone()?) } else { None };
        Ok(SeqAst::Split(SplitSequent {
            theta,
            gamma,
            delta,
            upsilon,
        }))
    }

    fn cone_head(&mut self) -> Result<(String, Vec<TypeExpr>)> {
        let cone = self.ident()?;
        self.sym("[")?;
        let args = self.list(",", "]", |p| p.ty())?;
        self.sym("]")?;
        Ok((cone, args))
    }

    fn parenthesized(&mut self) -> Result<TermAst> {
        self.sym("(")?;
        let t = self.term()?;
        self.sym(")")?;
        Ok(t)
    }

    pub(crate) fn term(&mut self) -> Result<TermAst> {
        let kw = self.ident()?;
        match kw.as_str() {
            "id" => Ok(TermAst::Id(self.ty()?)),
            "gen" => Ok(TermAst::Gen(self.ident()?)),
            "ref" => Ok(TermAst::Ref(self.ident()?)),
            "cut" => {
                self.sym("[")?;
                let i = self.int()?;
                self.sym(",")?;
                let j = self.int()?;
                self.sym("]")?;
                self.sym("(")?;
                let left = self.term()?;
                self.sym(";")?;
                let right = self.term()?;
                self.sym(")")?;
                Ok(TermAst::Cut {
                    i,
                    j,
                    left: Box::new(left),
                    right: Box::new(right),
                })
            }
            "map" => {
                self.sym("{")?;
                let mut index = Vec::new();
                if matches!(self.peek(), Some(Tok::Int(_))) {
                    index.push(self.int()?);
                    while self.eat_sym(",") {
                        index.push(self.int()?);
                    }
                }
                let target = if self.eat_sym(":") { Some(self.entries()?) } else { None };
                self.sym("}")?;
                let premise = self.parenthesized()?;
                Ok(TermAst::Map {
                    index,
                    target,
                    premise: Box::new(premise),
                })
            }
            "coerce" => {
                self.sym("[")?;
                let k = self.int()?;
                self.sym("]")?;
                let premise = self.parenthesized()?;
                Ok(TermAst::Coerce {
                    k,
                    premise: Box::new(premise),
                })
            }
            "proj" => {
                let (cone, args) = self.cone_head()?;
                self.sym(".")?;
                let proj = self.ident()?;
                Ok(TermAst::Proj { cone, args, proj })
            }
            "factor" => {
                let (cone, args) = self.cone_head()?;
                self.sym("(")?;
                let sides = self.entries()?;
                self.sym(")")?;
                self.sym("{")?;
                let premises = self.list(",", "}", |p| {
                    let name = p.ident()?;
                    p.sym("=>")?;
                    Ok((name, p.term()?))
                })?;
                self.sym("}")?;
                Ok(TermAst::Factor {
                    cone,
                    args,
                    sides,
                    premises,
                })
            }
            _ => {
                self.pos -= 1;
                self.err("expected a term (`id`, `gen`, `cut`, `map`, `proj`, `factor`, `ref` or `coerce`)")
            }
        }
    }
}
