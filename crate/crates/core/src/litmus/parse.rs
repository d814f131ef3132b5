use std::collections::{BTreeMap, HashMap};
use std::fmt;

use super::{
    AnyTest, Arch, C11Op, Expectation, IsaOp, LitmusError, LitmusOp, LitmusTest, Loc, MemoryOrder,
    Outcome, OutcomeTerm, Reg, Site, Thread,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax(String),
    Invalid(LitmusError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: ", self.line, self.column)?;
        match &self.kind {
            ParseErrorKind::Syntax(m) => f.write_str(m),
            ParseErrorKind::Invalid(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for ParseError {}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Word(String),
    Num(u64),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Semi,
    Comma,
    Eq,
    And,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Word(w) => write!(f, "`{w}`"),
            Tok::Num(n) => write!(f, "`{n}`"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Semi => f.write_str("`;`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Eq => f.write_str("`=`"),
            Tok::And => f.write_str("`/\\`"),
        }
    }
}

type Pos = (usize, usize);

const KEYWORDS: &[&str] = &[
    "init",
    "thread",
    "forbidden",
    "allowed",
    "outcome",
    "expect",
];

fn is_word_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.' | '+')
}

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let mut out = Vec::new();
    for (li, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let pos = (li + 1, i + 1);
            let simple = match c {
                '{' => Some(Tok::LBrace),
                '}' => Some(Tok::RBrace),
                '(' => Some(Tok::LParen),
                ')' => Some(Tok::RParen),
                ';' => Some(Tok::Semi),
                ',' => Some(Tok::Comma),
                '=' => Some(Tok::Eq),
                _ => None,
            };
            if let Some(t) = simple {
                out.push((t, pos));
                i += 1;
            } else if c == '/' && chars.get(i + 1) == Some(&'\\') {
                out.push((Tok::And, pos));
                i += 2;
            } else if c.is_whitespace() {
                i += 1;
            } else if is_word_char(c) {
                let start = i;
                while i < chars.len() && is_word_char(chars[i]) {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                let tok = if word.bytes().all(|b| b.is_ascii_digit()) {
                    match word.parse() {
                        Ok(n) => Tok::Num(n),
                        Err(_) => return Err(syntax(pos, format!("number `{word}` out of range"))),
                    }
                } else {
                    Tok::Word(word)
                };
                out.push((tok, pos));
            } else {
                return Err(syntax(pos, format!("unexpected character `{c}`")));
            }
        }
    }
    Ok(out)
}

fn syntax(pos: Pos, msg: impl Into<String>) -> ParseError {
    ParseError {
        line: pos.0,
        column: pos.1,
        kind: ParseErrorKind::Syntax(msg.into()),
    }
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    end: Pos,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(t, _)| t)
    }

    fn pos(&self) -> Pos {
        self.toks.get(self.at).map(|(_, p)| *p).unwrap_or(self.end)
    }

    fn next(&mut self, what: &str) -> Result<(Tok, Pos), ParseError> {
        match self.toks.get(self.at) {
            Some(t) => {
                self.at += 1;
                Ok(t.clone())
            }
            None => Err(syntax(
                self.end,
                format!("unexpected end of input, expected {what}"),
            )),
        }
    }

    fn expect(&mut self, want: Tok) -> Result<Pos, ParseError> {
        let (t, p) = self.next(&want.to_string())?;
        if t == want {
            Ok(p)
        } else {
            Err(syntax(p, format!("expected {want}, found {t}")))
        }
    }

    fn word(&mut self, what: &str) -> Result<(String, Pos), ParseError> {
        match self.next(what)? {
            (Tok::Word(w), p) => Ok((w, p)),
            (t, p) => Err(syntax(p, format!("expected {what}, found {t}"))),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<Pos, ParseError> {
        let (w, p) = self.word(&format!("`{kw}`"))?;
        if w == kw {
            Ok(p)
        } else {
            Err(syntax(p, format!("expected `{kw}`, found `{w}`")))
        }
    }

    fn number(&mut self, what: &str) -> Result<u64, ParseError> {
        match self.next(what)? {
            (Tok::Num(n), _) => Ok(n),
            (t, p) => Err(syntax(p, format!("expected {what}, found {t}"))),
        }
    }

    fn name(&mut self) -> Result<String, ParseError> {
        match self.next("test name")? {
            (Tok::Word(w), _) => Ok(w),
            (Tok::Num(n), _) => Ok(n.to_string()),
            (t, p) => Err(syntax(p, format!("expected test name, found {t}"))),
        }
    }

    fn location(&mut self) -> Result<Loc, ParseError> {
        let (w, p) = self.word("location")?;
        if Reg::is_register_name(&w) || KEYWORDS.contains(&w.as_str()) {
            return Err(syntax(p, format!("`{w}` is not a valid location name")));
        }
        Ok(Loc(w))
    }

    fn at_keyword(&self) -> bool {
        matches!(self.peek(), Some(Tok::Word(w)) if KEYWORDS.contains(&w.as_str()))
    }
}

/// Per-level operation syntax.
trait OpSyntax: LitmusOp + Sized {
    fn parse_op(p: &mut Parser) -> Result<Self, ParseError>;
}

impl OpSyntax for C11Op {
    fn parse_op(p: &mut Parser) -> Result<Self, ParseError> {
        let (w, pos) = p.word("operation")?;
        if Reg::is_register_name(&w) {
            p.expect(Tok::Eq)?;
            p.keyword("load")?;
            p.expect(Tok::LParen)?;
            let loc = p.location()?;
            p.expect(Tok::Comma)?;
            let order = order(p)?;
            p.expect(Tok::RParen)?;
            Ok(C11Op::Load {
                reg: Reg(w),
                loc,
                order,
            })
        } else if w == "store" {
            p.expect(Tok::LParen)?;
            let loc = p.location()?;
            p.expect(Tok::Comma)?;
            let value = p.number("stored value")?;
            p.expect(Tok::Comma)?;
            let order = order(p)?;
            p.expect(Tok::RParen)?;
            Ok(C11Op::Store { loc, value, order })
        } else {
            Err(syntax(pos, format!("unknown C11 operation `{w}`")))
        }
    }
}

fn order(p: &mut Parser) -> Result<MemoryOrder, ParseError> {
    let (w, pos) = p.word("memory order")?;
    w.parse().map_err(|e: String| syntax(pos, e))
}

impl OpSyntax for IsaOp {
    fn parse_op(p: &mut Parser) -> Result<Self, ParseError> {
        let (w, pos) = p.word("instruction")?;
        if Reg::is_register_name(&w) {
            p.expect(Tok::Eq)?;
            p.keyword("ld")?;
            let loc = p.location()?;
            Ok(IsaOp::Ld { reg: Reg(w), loc })
        } else if w == "st" {
            let loc = p.location()?;
            p.expect(Tok::Eq)?;
            let value = p.number("stored value")?;
            Ok(IsaOp::St { loc, value })
        } else {
            w.parse()
                .map(IsaOp::Fence)
                .map_err(|_| syntax(pos, format!("unknown instruction `{w}`")))
        }
    }
}

fn parse_body<O: OpSyntax>(
    p: &mut Parser,
    name: String,
    arch: Option<Arch>,
    header: Pos,
) -> Result<LitmusTest<O>, ParseError> {
    let mut init = BTreeMap::new();
    let mut threads: Vec<Thread<O>> = Vec::new();
    let mut outcome: Option<(Outcome, Option<Expectation>)> = None;
    let mut expect = BTreeMap::new();
    let mut sites: HashMap<Site, Pos> = HashMap::new();
    sites.insert(Site::Header, header);

    while p.peek().is_some() {
        let (kw, kw_pos) = p.word("`init`, `thread`, outcome or `expect`")?;
        match kw.as_str() {
            "init" => {
                while matches!(p.peek(), Some(Tok::Word(_))) && !p.at_keyword() {
                    let loc = p.location()?;
                    p.expect(Tok::Eq)?;
                    let v = p.number("initial value")?;
                    init.insert(loc, v);
                }
            }
            "thread" => {
                let id = p.number("thread id")?;
                let id = u32::try_from(id).map_err(|_| syntax(kw_pos, "thread id too large"))?;
                p.expect(Tok::LBrace)?;
                let ti = threads.len();
                let mut ops = Vec::new();
                loop {
                    match p.peek() {
                        Some(Tok::RBrace) => {
                            p.at += 1;
                            break;
                        }
                        Some(Tok::Semi) => {
                            p.at += 1;
                        }
                        _ => {
                            sites.insert(
                                Site::Op {
                                    thread: ti,
                                    index: ops.len(),
                                },
                                p.pos(),
                            );
                            ops.push(O::parse_op(p)?);
                        }
                    }
                }
                threads.push(Thread { id, ops });
            }
            "forbidden" | "allowed" | "outcome" => {
                if outcome.is_some() {
                    return Err(syntax(kw_pos, "duplicate outcome"));
                }
                let exp = match kw.as_str() {
                    "forbidden" => Some(Expectation::Forbidden),
                    "allowed" => Some(Expectation::Allowed),
                    _ => None,
                };
                let mut terms = Vec::new();
                loop {
                    sites.insert(Site::Outcome { term: terms.len() }, p.pos());
                    let (w, _) = p.word("register or location")?;
                    p.expect(Tok::Eq)?;
                    let v = p.number("value")?;
                    terms.push(if Reg::is_register_name(&w) {
                        OutcomeTerm::Reg(Reg(w), v)
                    } else {
                        OutcomeTerm::Loc(Loc(w), v)
                    });
                    if p.peek() == Some(&Tok::And) {
                        p.at += 1;
                    } else {
                        break;
                    }
                }
                outcome = Some((Outcome::new(terms), exp));
            }
            "expect" => {
                let (model, _) = p.word("model name")?;
                let (v, vp) = p.word("`allowed` or `forbidden`")?;
                let e = match v.as_str() {
                    "allowed" => Expectation::Allowed,
                    "forbidden" => Expectation::Forbidden,
                    _ => {
                        return Err(syntax(
                            vp,
                            format!("expected `allowed` or `forbidden`, found `{v}`"),
                        ))
                    }
                };
                expect.insert(model, e);
            }
            other => return Err(syntax(kw_pos, format!("unexpected `{other}`"))),
        }
    }

    if threads.is_empty() {
        return Err(invalid(header, LitmusError::NoThreads));
    }
    let (outcome, expectation) = outcome.ok_or_else(|| {
        syntax(
            p.end,
            "missing outcome (`forbidden`, `allowed` or `outcome`)",
        )
    })?;
    let mut test = LitmusTest {
        name,
        arch,
        init,
        threads,
        outcome,
        expectation,
        expect,
    };
    test.fill_default_init();
    test.validate()
        .map_err(|(site, e)| invalid(sites.get(&site).copied().unwrap_or(header), e))?;
    Ok(test)
}

fn invalid(pos: Pos, e: LitmusError) -> ParseError {
    ParseError {
        line: pos.0,
        column: pos.1,
        kind: ParseErrorKind::Invalid(e),
    }
}

/// Parses a litmus test of either level. See the repository README for the
/// grammar.
pub fn parse_litmus(text: &str) -> Result<AnyTest, ParseError> {
    let toks = lex(text)?;
    let lines = text.lines().count().max(1);
    let end = (
        lines,
        text.lines().last().map_or(1, |l| l.chars().count() + 1),
    );
    let mut p = Parser { toks, at: 0, end };
    if p.peek().is_none() {
        return Err(syntax(end, "empty input"));
    }
    let header = p.pos();
    let (level, lp) = p.word("`c11` or `isa`")?;
    p.keyword("test")?;
    let name = p.name()?;
    match level.as_str() {
        "c11" => parse_body::<C11Op>(&mut p, name, None, header).map(AnyTest::C11),
        "isa" => {
            p.keyword("arch")?;
            let (a, ap) = p.word("architecture")?;
            let arch: Arch = a.parse().map_err(|e: String| syntax(ap, e))?;
            parse_body::<IsaOp>(&mut p, name, Some(arch), header).map(AnyTest::Isa)
        }
        other => Err(syntax(
            lp,
            format!("expected `c11` or `isa`, found `{other}`"),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const IRIW: &str = "\
c11 test IRIW-acq-acq
init x=0 y=0
thread 0 { store(x, 1, seq_cst) }
thread 1 { store(y, 1, seq_cst) }
thread 2 { r1 = load(x, acquire); r2 = load(y, seq_cst) }
thread 3 { r3 = load(y, acquire); r4 = load(x, seq_cst) }
forbidden r1=1 /\\ r2=0 /\\ r3=1 /\\ r4=0
";

    fn err_of(text: &str) -> ParseError {
        parse_litmus(text).expect_err("should fail")
    }

    #[test]
    fn parses_iriw() {
        let t = parse_litmus(IRIW).unwrap();
        let t = t.as_c11().unwrap();
        assert_eq!(t.name, "IRIW-acq-acq");
        assert_eq!(t.threads.len(), 4);
        assert_eq!(t.threads[2].ops.len(), 2);
        assert_eq!(t.outcome.terms.len(), 4);
        assert_eq!(t.expectation, Some(Expectation::Forbidden));
    }

    #[test]
    fn no_threads() {
        let e = err_of("c11 test empty\ninit x=0\nforbidden x=0\n");
        assert_eq!(e.kind, ParseErrorKind::Invalid(LitmusError::NoThreads));
        assert!(e.to_string().contains("no threads"));
    }

    #[test]
    fn syntax_error_has_position() {
        let e = err_of("c11 test t\nthread 0 { store(x 1, relaxed) }\noutcome x=1\n");
        assert_eq!((e.line, e.column), (2, 20));
        assert!(matches!(e.kind, ParseErrorKind::Syntax(_)));
    }

    #[test]
    fn duplicate_register() {
        let e = err_of(
            "c11 test t\nthread 0 { r1 = load(x, relaxed) }\nthread 1 {\n  r1 = load(x, acquire)\n}\noutcome r1=0\n",
        );
        assert_eq!(
            e.kind,
            ParseErrorKind::Invalid(LitmusError::DuplicateRegister(Reg::new("r1")))
        );
        assert_eq!((e.line, e.column), (4, 3));
    }

    #[test]
    fn store_value_collision() {
        let e = err_of(
            "c11 test t\nthread 0 { store(x, 1, relaxed) }\nthread 1 { store(x, 1, relaxed) }\noutcome x=1\n",
        );
        assert!(matches!(
            e.kind,
            ParseErrorKind::Invalid(LitmusError::ValueCollision { .. })
        ));
        assert_eq!(e.line, 3);
    }

    #[test]
    fn unknown_outcome_register() {
        let e = err_of("c11 test t\nthread 0 { r1 = load(x, relaxed) }\nforbidden r1=0 /\\ r2=0\n");
        assert_eq!(
            e.kind,
            ParseErrorKind::Invalid(LitmusError::UnknownRegister(Reg::new("r2")))
        );
        assert_eq!((e.line, e.column), (3, 19));
    }

    #[test]
    fn unknown_outcome_location() {
        let e = err_of("c11 test t\nthread 0 { r1 = load(x, relaxed) }\noutcome z=0\n");
        assert_eq!(
            e.kind,
            ParseErrorKind::Invalid(LitmusError::UninitializedLocation(Loc::new("z")))
        );
    }

    #[test]
    fn isa_ops_and_comments() {
        let t = parse_litmus(
            "isa test mp arch power  # comment\nthread 0 { st x = 1; lwsync; st y = 1 }\n\
             thread 1 { r1 = ld y; ctrlisync; r2 = ld x }\nallowed r1=1 /\\ r2=0\nexpect herd forbidden\n",
        )
        .unwrap();
        let t = t.as_isa().unwrap();
        assert_eq!(t.arch, Some(Arch::Power));
        assert_eq!(
            t.threads[1].ops[1],
            IsaOp::Fence(super::super::FenceKind::CtrlIsync)
        );
        assert_eq!(t.expect.get("herd"), Some(&Expectation::Forbidden));
        assert_eq!(t.init.len(), 2);
    }

    #[test]
    fn control_fence_must_follow_load() {
        let e = err_of("isa test t arch armv7\nthread 0 { st x = 1; ctrlisb }\noutcome x=1\n");
        assert!(matches!(
            e.kind,
            ParseErrorKind::Invalid(LitmusError::MisplacedControlFence(_))
        ));
    }

    #[test]
    fn c11_op_in_isa_test_rejected() {
        let e = err_of("isa test t arch power\nthread 0 { store(x, 1, relaxed) }\noutcome x=1\n");
        assert!(matches!(e.kind, ParseErrorKind::Syntax(_)));
    }

    #[test]
    fn release_load_rejected() {
        let e = err_of("c11 test t\nthread 0 { r1 = load(x, release) }\noutcome r1=0\n");
        assert!(matches!(
            e.kind,
            ParseErrorKind::Invalid(LitmusError::InvalidOrder { .. })
        ));
    }
}
