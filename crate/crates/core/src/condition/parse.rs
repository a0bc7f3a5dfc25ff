use std::fmt;

use chrono::{DateTime, Utc};
use rust_decimal::Decimal;
use thiserror::Error;

use super::{CmpOp, ConditionExpr, Path, KEYWORDS};
use crate::id::{is_valid_id, UnitId};
use crate::value::{is_valid_unit_token, SlotValue, DIMENSIONLESS};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax,
    Unit,
}

/// Parse failure with the byte offset where it was detected.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub position: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            ParseErrorKind::Syntax => "syntax error",
            ParseErrorKind::Unit => "unit syntax error",
        };
        write!(f, "{kind} at position {}: {}", self.position, self.message)
    }
}


#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Number(String),
    Str(String),
    Time(String),
    Ref(String),
    Op(CmpOp),
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Word(w) => format!("`{w}`"),
            Tok::Number(n) => format!("number {n}"),
            Tok::Str(_) => "string".into(),
            Tok::Time(_) => "timestamp".into(),
            Tok::Ref(_) => "reference".into(),
            Tok::Op(op) => format!("`{}`", op.symbol()),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Comma => "`,`".into(),
            Tok::End => "end of input".into(),
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self, Tok::Word(w) if w == kw)
    }
}

fn syntax(position: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        kind: ParseErrorKind::Syntax,
        position,
        message: message.into(),
    }
}

fn unit_error(position: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        kind: ParseErrorKind::Unit,
        position,
        message: message.into(),
    }
}

fn is_word_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | ':' | '-')
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes: Vec<(usize, char)> = src.char_indices().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    let at = |i: usize| bytes.get(i).map(|&(_, c)| c);
    let pos = |i: usize| bytes.get(i).map(|&(p, _)| p).unwrap_or(src.len());

    while i < bytes.len() {
        let c = bytes[i].1;
        let start = pos(i);
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        match c {
            '(' => {
                toks.push((Tok::LParen, start));
                i += 1;
            }
            ')' => {
                toks.push((Tok::RParen, start));
                i += 1;
            }
            '{' => {
                toks.push((Tok::LBrace, start));
                i += 1;
            }
            '}' => {
                toks.push((Tok::RBrace, start));
                i += 1;
            }
            ',' => {
                toks.push((Tok::Comma, start));
                i += 1;
            }
            '=' | '!' => {
                if at(i + 1) != Some('=') {
                    return Err(syntax(start, format!("expected `{c}=`")));
                }
                toks.push((Tok::Op(if c == '=' { CmpOp::Eq } else { CmpOp::Ne }), start));
                i += 2;
            }
            '<' | '>' => {
                // `<ex:id>` is a reference literal; anything else is an operator.
                if c == '<' && at(i + 1).is_some_and(|n| n.is_ascii_alphabetic()) {
                    let mut j = i + 1;
                    while at(j).is_some_and(is_word_char) {
                        j += 1;
                    }
                    if at(j) == Some('>') {
                        toks.push((Tok::Ref(src[pos(i + 1)..pos(j)].to_string()), start));
                        i = j + 1;
                        continue;
                    }
                }
                let eq = at(i + 1) == Some('=');
                let op = match (c, eq) {
                    ('<', false) => CmpOp::Lt,
                    ('<', true) => CmpOp::Le,
                    ('>', false) => CmpOp::Gt,
                    _ => CmpOp::Ge,
                };
                toks.push((Tok::Op(op), start));
                i += if eq { 2 } else { 1 };
            }
            '"' => {
                let mut text = String::new();
                let mut j = i + 1;
                loop {
                    match at(j) {
                        None => return Err(syntax(start, "unterminated string")),
                        Some('"') => break,
                        Some('\\') => {
                            match at(j + 1) {
                                Some('"') => text.push('"'),
                                Some('\\') => text.push('\\'),
                                Some('n') => text.push('\n'),
                                _ => return Err(syntax(pos(j), "invalid escape")),
                            }
                            j += 2;
                        }
                        Some(ch) => {
                            text.push(ch);
                            j += 1;
                        }
                    }
                }
                toks.push((Tok::Str(text), start));
                i = j + 1;
            }
            '@' => {
                let mut j = i + 1;
                while at(j).is_some_and(|ch| ch.is_ascii_alphanumeric() || matches!(ch, ':' | '.' | '+' | '-')) {
                    j += 1;
                }
                toks.push((Tok::Time(src[pos(i + 1)..pos(j)].to_string()), start));
                i = j;
            }
            c if c.is_ascii_digit() || (c == '-' && at(i + 1).is_some_and(|n| n.is_ascii_digit())) => {
                let mut j = i + 1;
                let mut seen_dot = false;
                while let Some(ch) = at(j) {
                    if ch.is_ascii_digit() {
                        j += 1;
                    } else if ch == '.' && !seen_dot && at(j + 1).is_some_and(|n| n.is_ascii_digit()) {
                        seen_dot = true;
                        j += 1;
                    } else {
                        break;
                    }
                }
                toks.push((Tok::Number(src[start..pos(j)].to_string()), start));
                i = j;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut j = i + 1;
                while at(j).is_some_and(is_word_char) {
                    j += 1;
                }
                toks.push((Tok::Word(src[start..pos(j)].to_string()), start));
                i = j;
            }
            other => return Err(syntax(start, format!("unexpected character {other:?}"))),
        }
    }
    toks.push((Tok::End, src.len()));
    Ok(toks)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    cursor: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.cursor].0
    }

    fn position(&self) -> usize {
        self.toks[self.cursor].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let tok = self.toks[self.cursor].clone();
        if self.cursor + 1 < self.toks.len() {
            self.cursor += 1;
        }
        tok
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(syntax(
                self.position(),
                format!("expected {what}, found {}", self.peek().describe()),
            ))
        }
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.peek().is_keyword(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<ConditionExpr, ParseError> {
        let mut left = self.and()?;
        while self.eat_keyword("OR") {
            let right = self.and()?;
            left = ConditionExpr::or(left, right);
        }
        Ok(left)
    }

    fn and(&mut self) -> Result<ConditionExpr, ParseError> {
        let mut left = self.unary()?;
        while self.eat_keyword("AND") {
            let right = self.unary()?;
            left = ConditionExpr::and(left, right);
        }
        Ok(left)
    }

    fn unary(&mut self) -> Result<ConditionExpr, ParseError> {
        if self.eat_keyword("NOT") {
            return Ok(ConditionExpr::negate(self.unary()?));
        }
        if *self.peek() == Tok::LParen {
            self.bump();
            let inner = self.expr()?;
            self.expect(Tok::RParen, "`)`")?;
            return Ok(inner);
        }
        self.clause()
    }

    fn word(&mut self, what: &str) -> Result<(String, usize), ParseError> {
        match self.bump() {
            (Tok::Word(w), p) if !KEYWORDS.contains(&w.as_str()) => Ok((w, p)),
            (tok, p) => Err(syntax(p, format!("expected {what}, found {}", tok.describe()))),
        }
    }

    fn path(&mut self) -> Result<Path, ParseError> {
        let (text, p) = self.word("path")?;
        Path::parse(&text).ok_or_else(|| syntax(p, format!("invalid path `{text}`, expected subject.attribute")))
    }

    fn clause(&mut self) -> Result<ConditionExpr, ParseError> {
        if self.eat_keyword("EXISTS") {
            return Ok(ConditionExpr::Exists { path: self.path()? });
        }
        if self.eat_keyword("SCHEMA") {
            self.expect(Tok::LParen, "`(`")?;
            let (input_role, _) = self.word("input role")?;
            self.expect(Tok::Comma, "`,`")?;
            let (schema, p) = self.word("schema id")?;
            let schema_id = UnitId::new(schema.clone()).map_err(|_| syntax(p, format!("invalid schema id `{schema}`")))?;
            self.expect(Tok::RParen, "`)`")?;
            return Ok(ConditionExpr::SchemaConforms { input_role, schema_id });
        }
        if self.eat_keyword("ATTESTED") {
            self.expect(Tok::LParen, "`(`")?;
            let (capability, _) = self.word("capability")?;
            self.expect(Tok::RParen, "`)`")?;
            return Ok(ConditionExpr::Attested { capability });
        }

        let path = self.path()?;
        if self.eat_keyword("BETWEEN") {
            let lo_pos = self.position();
            let lo = self.literal()?;
            if !self.eat_keyword("AND") {
                return Err(syntax(self.position(), format!("expected AND, found {}", self.peek().describe())));
            }
            let hi = self.literal()?;
            check_bounds(&lo, &hi, lo_pos)?;
            return Ok(ConditionExpr::Between { path, lo, hi });
        }
        if self.eat_keyword("IN") {
            self.expect(Tok::LBrace, "`{`")?;
            let mut values = vec![self.literal()?];
            while *self.peek() == Tok::Comma {
                self.bump();
                values.push(self.literal()?);
            }
            self.expect(Tok::RBrace, "`}`")?;
            return Ok(ConditionExpr::In { path, values });
        }
        match self.bump() {
            (Tok::Op(op), _) => {
                let literal = self.literal()?;
                Ok(ConditionExpr::Cmp { path, op, literal })
            }
            (tok, p) => Err(syntax(
                p,
                format!("expected comparison operator, BETWEEN or IN, found {}", tok.describe()),
            )),
        }
    }

    fn literal(&mut self) -> Result<SlotValue, ParseError> {
        let (tok, p) = self.bump();
        match tok {
            Tok::Number(text) => {
                let magnitude: Decimal = text
                    .parse()
                    .map_err(|_| syntax(p, format!("invalid number `{text}`")))?;
                let unit = match self.peek() {
                    Tok::Word(w) if !KEYWORDS.contains(&w.as_str()) => {
                        let (unit, up) = self.bump();
                        let Tok::Word(unit) = unit else { unreachable!() };
                        if !is_valid_unit_token(&unit) {
                            return Err(unit_error(up, format!("invalid unit token `{unit}`")));
                        }
                        unit
                    }
                    _ => DIMENSIONLESS.to_string(),
                };
                Ok(SlotValue::Number { magnitude, unit })
            }
            Tok::Str(s) => Ok(SlotValue::Text(s)),
            Tok::Word(w) if w == "true" => Ok(SlotValue::Boolean(true)),
            Tok::Word(w) if w == "false" => Ok(SlotValue::Boolean(false)),
            Tok::Ref(r) => {
                if !is_valid_id(&r) {
                    return Err(syntax(p, format!("invalid reference `{r}`")));
                }
                Ok(SlotValue::Ref(UnitId::new(r).expect("validated")))
            }
            Tok::Time(t) => {
                let ts = DateTime::parse_from_rfc3339(&t)
                    .map_err(|e| syntax(p, format!("invalid timestamp `{t}`: {e}")))?;
                Ok(SlotValue::Timestamp(ts.with_timezone(&Utc)))
            }
            other => Err(syntax(p, format!("expected literal, found {}", other.describe()))),
        }
    }
}

fn check_bounds(lo: &SlotValue, hi: &SlotValue, position: usize) -> Result<(), ParseError> {
    match (lo, hi) {
        (SlotValue::Number { magnitude: a, unit: ua }, SlotValue::Number { magnitude: b, unit: ub }) => {
            if ua != ub {
                return Err(unit_error(position, format!("BETWEEN bounds use different units `{ua}` and `{ub}`")));
            }
            if a > b {
                return Err(syntax(position, "BETWEEN lower bound exceeds upper bound"));
            }
            Ok(())
        }
        (SlotValue::Timestamp(a), SlotValue::Timestamp(b)) => {
            if a > b {
                return Err(syntax(position, "BETWEEN lower bound exceeds upper bound"));
            }
            Ok(())
        }
        _ => Err(syntax(position, "BETWEEN bounds must both be numbers or both timestamps")),
    }
}

/// Parses condition source text into an AST.
pub fn parse_condition(text: &str) -> Result<ConditionExpr, ParseError> {
    let mut parser = Parser {
        toks: lex(text)?,
        cursor: 0,
    };
    let expr = parser.expr()?;
    if *parser.peek() != Tok::End {
        return Err(syntax(
            parser.position(),
            format!("unexpected {} after condition", parser.peek().describe()),
        ));
    }
    Ok(expr)
}

/// Parses a single literal (`"text"`, `true`, `<ex:id>`, `@2026-01-01T00:00:00Z`, `40 pct`).
///
/// This is the inverse of the [`SlotValue`] `Display` rendering.
pub fn parse_literal(text: &str) -> Result<SlotValue, ParseError> {
    let mut parser = Parser {
        toks: lex(text)?,
        cursor: 0,
    };
    let value = parser.literal()?;
    if *parser.peek() != Tok::End {
        return Err(syntax(
            parser.position(),
            format!("unexpected {} after literal", parser.peek().describe()),
        ));
    }
    Ok(value)
}
