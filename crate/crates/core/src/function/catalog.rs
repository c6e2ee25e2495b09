//! Catalog specifications: the JSON document form used in configs and the
//! compact expression syntax used on the command line.
//!
//! Expression syntax:
//!
//! ```text
//! expr := plane_wave:A,B | mode:A,B,RE,IM | const:RE[,IM] | x | y
//!       | trig_poly(mode:..., ...) | sum(expr, ...) | scale(expr, RE[, IM])
//!       | dilate(expr, LAMBDA)
//! ```

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{FourierMode, FunctionR2};
use crate::error::{Error, Result};
use crate::spectral::C64;

#[derive(Clone, Debug, PartialEq)]
pub enum CatalogSpec {
    PlaneWave { a: f64, b: f64 },
    TrigPoly(Vec<FourierMode>),
    Constant(C64),
    CoordinateX,
    CoordinateY,
    Dilate(Box<CatalogSpec>, f64),
    Sum(Vec<CatalogSpec>),
    Scale(Box<CatalogSpec>, C64),
}

impl CatalogSpec {
    pub fn build(&self) -> Result<FunctionR2> {
        let f = match self {
            CatalogSpec::PlaneWave { a, b } => FunctionR2::plane_wave(*a, *b),
            CatalogSpec::TrigPoly(modes) => FunctionR2::trig_poly(modes.clone()),
            CatalogSpec::Constant(c) => FunctionR2::constant(*c),
            CatalogSpec::CoordinateX => FunctionR2::coordinate_x(),
            CatalogSpec::CoordinateY => FunctionR2::coordinate_y(),
            CatalogSpec::Dilate(inner, lambda) => inner.build()?.dilate(*lambda)?,
            CatalogSpec::Sum(children) => {
                let mut it = children.iter();
                let first = match it.next() {
                    Some(c) => c.build()?,
                    None => FunctionR2::zero(),
                };
                it.try_fold(first, |acc, c| Ok::<_, Error>(acc.sum(&c.build()?)))?
            }
            CatalogSpec::Scale(inner, c) => inner.build()?.scale(*c),
        };
        Ok(f.with_label(self.to_string()))
    }

    pub fn to_doc(&self) -> CatalogDoc {
        let mut doc = CatalogDoc::of_type(match self {
            CatalogSpec::PlaneWave { .. } => "plane_wave",
            CatalogSpec::TrigPoly(_) => "trig_poly",
            CatalogSpec::Constant(_) => "constant",
            CatalogSpec::CoordinateX => "x",
            CatalogSpec::CoordinateY => "y",
            CatalogSpec::Dilate(..) => "dilate",
            CatalogSpec::Sum(_) => "sum",
            CatalogSpec::Scale(..) => "scale",
        });
        match self {
            CatalogSpec::PlaneWave { a, b } => {
                doc.modes = vec![ModeDoc {
                    a: *a,
                    b: *b,
                    re: 1.0,
                    im: 0.0,
                }]
            }
            CatalogSpec::TrigPoly(modes) => doc.modes = modes.iter().map(ModeDoc::from).collect(),
            CatalogSpec::Constant(c) | CatalogSpec::Scale(_, c) => {
                doc.re = Some(c.re);
                doc.im = Some(c.im);
            }
            _ => {}
        }
        match self {
            CatalogSpec::Dilate(inner, lambda) => {
                doc.lambda = Some(*lambda);
                doc.children = vec![inner.to_doc()];
            }
            CatalogSpec::Scale(inner, _) => doc.children = vec![inner.to_doc()],
            CatalogSpec::Sum(children) => {
                doc.children = children.iter().map(CatalogSpec::to_doc).collect()
            }
            _ => {}
        }
        doc
    }
}

/// One mode in a catalog document.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeDoc {
    pub a: f64,
    pub b: f64,
    #[serde(default = "one")]
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

fn one() -> f64 {
    1.0
}

impl From<&FourierMode> for ModeDoc {
    fn from(m: &FourierMode) -> Self {
        ModeDoc {
            a: m.a,
            b: m.b,
            re: m.coeff.re,
            im: m.coeff.im,
        }
    }
}

impl From<&ModeDoc> for FourierMode {
    fn from(m: &ModeDoc) -> Self {
        FourierMode::new(m.a, m.b, C64::new(m.re, m.im))
    }
}

/// Catalog specification document `{type, modes, lambda, children}`.
///
/// `re`/`im` carry the factor of `scale` and the value of `constant`.
/// A `plane_wave` reads its frequency from `a`/`b` or from its single mode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CatalogDoc {
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub modes: Vec<ModeDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<CatalogDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub re: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<f64>,
}

impl CatalogDoc {
    fn of_type(kind: &str) -> Self {
        Self {
            kind: kind.into(),
            modes: vec![],
            lambda: None,
            children: vec![],
            a: None,
            b: None,
            re: None,
            im: None,
        }
    }

    pub fn to_spec(&self) -> Result<CatalogSpec> {
        let only_child = || -> Result<Box<CatalogSpec>> {
            match self.children.as_slice() {
                [c] => Ok(Box::new(c.to_spec()?)),
                other => Err(Error::Validation(format!(
                    "catalog '{}' needs exactly one child, got {}",
                    self.kind,
                    other.len()
                ))),
            }
        };
        let coeff = || C64::new(self.re.unwrap_or(1.0), self.im.unwrap_or(0.0));
        Ok(match self.kind.as_str() {
            "plane_wave" => match (self.a, self.b, self.modes.as_slice()) {
                (Some(a), Some(b), _) => CatalogSpec::PlaneWave { a, b },
                (None, None, [m]) if m.re == 1.0 && m.im == 0.0 => {
                    CatalogSpec::PlaneWave { a: m.a, b: m.b }
                }
                (None, None, [m]) => CatalogSpec::TrigPoly(vec![m.into()]),
                _ => {
                    return Err(Error::Validation(
                        "plane_wave needs fields a and b, or exactly one mode".into(),
                    ))
                }
            },
            "trig_poly" => {
                CatalogSpec::TrigPoly(self.modes.iter().map(FourierMode::from).collect())
            }
            "constant" => CatalogSpec::Constant(coeff()),
            "x" => CatalogSpec::CoordinateX,
            "y" => CatalogSpec::CoordinateY,
            "dilate" => {
                let lambda = self.lambda.ok_or_else(|| {
                    Error::Validation("catalog 'dilate' needs field lambda".into())
                })?;
                if !(lambda > 0.0) {
                    return Err(Error::Validation(format!(
                        "catalog 'dilate': lambda must be positive, got {lambda}"
                    )));
                }
                CatalogSpec::Dilate(only_child()?, lambda)
            }
            "sum" => CatalogSpec::Sum(
                self.children
                    .iter()
                    .map(CatalogDoc::to_spec)
                    .collect::<Result<_>>()?,
            ),
            "scale" => CatalogSpec::Scale(only_child()?, coeff()),
            other => return Err(Error::Validation(format!("unknown catalog type '{other}'"))),
        })
    }
}

/// A function entry in a config: either an expression string or a document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FunctionEntry {
    Expr(String),
    Doc(CatalogDoc),
}

impl FunctionEntry {
    pub fn to_spec(&self) -> Result<CatalogSpec> {
        match self {
            FunctionEntry::Expr(s) => s.parse(),
            FunctionEntry::Doc(d) => d.to_spec(),
        }
    }
}

impl fmt::Display for CatalogSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CatalogSpec::PlaneWave { a, b } => write!(f, "plane_wave:{a},{b}"),
            CatalogSpec::TrigPoly(modes) => {
                write!(f, "trig_poly(")?;
                for (i, m) in modes.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "mode:{},{},{},{}", m.a, m.b, m.coeff.re, m.coeff.im)?;
                }
                write!(f, ")")
            }
            CatalogSpec::Constant(c) => write!(f, "const:{},{}", c.re, c.im),
            CatalogSpec::CoordinateX => write!(f, "x"),
            CatalogSpec::CoordinateY => write!(f, "y"),
            CatalogSpec::Dilate(inner, l) => write!(f, "dilate({inner}, {l})"),
            CatalogSpec::Sum(children) => {
                write!(f, "sum(")?;
                for (i, c) in children.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{c}")?;
                }
                write!(f, ")")
            }
            CatalogSpec::Scale(inner, c) => write!(f, "scale({inner}, {}, {})", c.re, c.im),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Ident(String),
    Num(f64),
    LParen,
    RParen,
    Comma,
    Colon,
}

fn tokenize(s: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let chars: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' | '\n' => i += 1,
            '(' => {
                out.push(Token::LParen);
                i += 1
            }
            ')' => {
                out.push(Token::RParen);
                i += 1
            }
            ',' => {
                out.push(Token::Comma);
                i += 1
            }
            ':' => {
                out.push(Token::Colon);
                i += 1
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push(Token::Ident(chars[start..i].iter().collect()));
            }
            c if c.is_ascii_digit() || c == '-' || c == '+' || c == '.' => {
                let start = i;
                i += 1;
                while i < chars.len() {
                    let d = chars[i];
                    let exp_sign = (d == '-' || d == '+') && matches!(chars[i - 1], 'e' | 'E');
                    if d.is_ascii_digit() || d == '.' || d == 'e' || d == 'E' || exp_sign {
                        i += 1;
                    } else {
                        break;
                    }
                }
                let text: String = chars[start..i].iter().collect();
                let v = text.parse::<f64>().map_err(|_| {
                    Error::Validation(format!("bad number '{text}' in function expression"))
                })?;
                out.push(Token::Num(v));
            }
            other => {
                return Err(Error::Validation(format!(
                    "unexpected character '{other}' in function expression"
                )))
            }
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Token) -> Result<()> {
        match self.next() {
            Some(t) if t == want => Ok(()),
            got => Err(Error::Validation(format!(
                "expected {want:?} in function expression, found {got:?}"
            ))),
        }
    }

    fn number(&mut self) -> Result<f64> {
        match self.next() {
            Some(Token::Num(v)) => Ok(v),
            got => Err(Error::Validation(format!(
                "expected a number in function expression, found {got:?}"
            ))),
        }
    }

    /// `n` comma-separated numbers.
    fn numbers(&mut self, n: usize) -> Result<Vec<f64>> {
        let mut v = vec![self.number()?];
        for _ in 1..n {
            self.expect(Token::Comma)?;
            v.push(self.number()?);
        }
        Ok(v)
    }

    /// Consumes `, NUM` if the next two tokens are exactly that.
    fn optional_number(&mut self) -> Option<f64> {
        if let (Some(Token::Comma), Some(Token::Num(v))) =
            (self.tokens.get(self.pos), self.tokens.get(self.pos + 1))
        {
            let v = *v;
            self.pos += 2;
            Some(v)
        } else {
            None
        }
    }

    fn mode(&mut self) -> Result<FourierMode> {
        match self.next() {
            Some(Token::Ident(id)) if id == "mode" => {}
            got => {
                return Err(Error::Validation(format!(
                    "expected mode:A,B,RE,IM, found {got:?}"
                )))
            }
        }
        self.expect(Token::Colon)?;
        let v = self.numbers(4)?;
        Ok(FourierMode::new(v[0], v[1], C64::new(v[2], v[3])))
    }

    fn expr(&mut self) -> Result<CatalogSpec> {
        let id = match self.next() {
            Some(Token::Ident(id)) => id,
            got => {
                return Err(Error::Validation(format!(
                    "expected a function name, found {got:?}"
                )))
            }
        };
        match id.as_str() {
            "x" => Ok(CatalogSpec::CoordinateX),
            "y" => Ok(CatalogSpec::CoordinateY),
            "plane_wave" => {
                self.expect(Token::Colon)?;
                let v = self.numbers(2)?;
                Ok(CatalogSpec::PlaneWave { a: v[0], b: v[1] })
            }
            "mode" => {
                self.pos -= 1;
                Ok(CatalogSpec::TrigPoly(vec![self.mode()?]))
            }
            "const" => {
                self.expect(Token::Colon)?;
                let re = self.number()?;
                let im = self.optional_number().unwrap_or(0.0);
                Ok(CatalogSpec::Constant(C64::new(re, im)))
            }
            "trig_poly" => {
                self.expect(Token::LParen)?;
                let mut modes = Vec::new();
                if self.peek() != Some(&Token::RParen) {
                    modes.push(self.mode()?);
                    while self.peek() == Some(&Token::Comma) {
                        self.pos += 1;
                        modes.push(self.mode()?);
                    }
                }
                self.expect(Token::RParen)?;
                Ok(CatalogSpec::TrigPoly(modes))
            }
            "sum" => {
                self.expect(Token::LParen)?;
                let mut children = Vec::new();
                if self.peek() != Some(&Token::RParen) {
                    children.push(self.expr()?);
                    while self.peek() == Some(&Token::Comma) {
                        self.pos += 1;
                        children.push(self.expr()?);
                    }
                }
                self.expect(Token::RParen)?;
                Ok(CatalogSpec::Sum(children))
            }
            "scale" => {
                self.expect(Token::LParen)?;
                let inner = self.expr()?;
                self.expect(Token::Comma)?;
                let re = self.number()?;
                let im = self.optional_number().unwrap_or(0.0);
                self.expect(Token::RParen)?;
                Ok(CatalogSpec::Scale(Box::new(inner), C64::new(re, im)))
            }
            "dilate" => {
                self.expect(Token::LParen)?;
                let inner = self.expr()?;
                self.expect(Token::Comma)?;
                let lambda = self.number()?;
                self.expect(Token::RParen)?;
                if !(lambda > 0.0) {
                    return Err(Error::Validation(format!(
                        "dilate: lambda must be positive, got {lambda}"
                    )));
                }
                Ok(CatalogSpec::Dilate(Box::new(inner), lambda))
            }
            other => Err(Error::Validation(format!(
                "unknown function '{other}' in expression"
            ))),
        }
    }
}

impl FromStr for CatalogSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut p = Parser {
            tokens: tokenize(s)?,
            pos: 0,
        };
        let spec = p.expr()?;
        if p.pos != p.tokens.len() {
            return Err(Error::Validation(format!(
                "trailing input in function expression '{s}'"
            )));
        }
        Ok(spec)
    }
}
