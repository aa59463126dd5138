//! Complex-valued expressions for `custom:<expr>` filter symbols.
//!
//! Variables: `alpha` (the ds-frequency), `s`, `w1`, `w2`, `w3` (components
//! of ω) and `phi` (polar angle of ω in the plane). Constants: `i`, `pi`,
//! `e`. Functions: `abs sqrt exp log sin cos tan sign re im conj`.
//! Operators: `+ - * / ^` with the usual precedence; `^` is right
//! associative.

use std::fmt;

use num_complex::Complex64;

#[derive(Clone, Debug, PartialEq)]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at character {}: {}", self.pos + 1, self.msg)
    }
}

impl std::error::Error for ParseError {}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Var {
    Alpha,
    S,
    W(usize),
    Phi,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Func {
    Abs,
    Sqrt,
    Exp,
    Log,
    Sin,
    Cos,
    Tan,
    Sign,
    Re,
    Im,
    Conj,
}

#[derive(Clone, Debug, PartialEq)]
enum Node {
    Num(Complex64),
    Var(Var),
    Neg(Box<Node>),
    Bin(char, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

/// A parsed expression.
#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    root: Node,
    source: String,
}

/// Values bound to the expression variables.
#[derive(Clone, Copy, Debug, Default)]
pub struct Env {
    pub alpha: f64,
    pub s: f64,
    pub omega: [f64; 3],
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut k = 0;
    while k < chars.len() {
        let c = chars[k];
        if c.is_whitespace() {
            k += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = k;
            while k < chars.len() && (chars[k].is_ascii_digit() || chars[k] == '.') {
                k += 1;
            }
            if k < chars.len() && (chars[k] == 'e' || chars[k] == 'E') {
                let mut j = k + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    k = j;
                    while k < chars.len() && chars[k].is_ascii_digit() {
                        k += 1;
                    }
                }
            }
            let text: String = chars[start..k].iter().collect();
            let v = text.parse().map_err(|_| ParseError { pos: start, msg: format!("bad number `{text}`") })?;
            out.push((start, Tok::Num(v)));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = k;
            while k < chars.len() && (chars[k].is_ascii_alphanumeric() || chars[k] == '_') {
                k += 1;
            }
            out.push((start, Tok::Ident(chars[start..k].iter().collect())));
        } else if "+-*/^(),".contains(c) {
            out.push((k, Tok::Op(c)));
            k += 1;
        } else {
            return Err(ParseError { pos: k, msg: format!("unexpected character `{c}`") });
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    k: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.k).map(|t| &t.1)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.k).map_or(self.end, |t| t.0)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { pos: self.pos(), msg: msg.into() })
    }

    fn eat(&mut self, op: char) -> bool {
        if self.peek() == Some(&Tok::Op(op)) {
            self.k += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Op(c)) if *c == '+' || *c == '-' => *c,
                _ => return Ok(lhs),
            };
            self.k += 1;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(self.term()?));
        }
    }

    fn term(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Op(c)) if *c == '*' || *c == '/' => *c,
                _ => return Ok(lhs),
            };
            self.k += 1;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(self.unary()?));
        }
    }

    fn unary(&mut self) -> Result<Node, ParseError> {
        if self.eat('-') {
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node, ParseError> {
        let base = self.atom()?;
        if self.eat('^') {
            return Ok(Node::Bin('^', Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node, ParseError> {
        let Some(tok) = self.peek().cloned() else {
            return self.err("unexpected end of expression");
        };
        match tok {
            Tok::Num(v) => {
                self.k += 1;
                Ok(Node::Num(Complex64::new(v, 0.0)))
            }
            Tok::Op('(') => {
                self.k += 1;
                let inner = self.expr()?;
                if !self.eat(')') {
                    return self.err("expected `)`");
                }
                Ok(inner)
            }
            Tok::Ident(name) => {
                let at = self.pos();
                self.k += 1;
                if self.eat('(') {
                    let f = func(&name).ok_or(ParseError { pos: at, msg: format!("unknown function `{name}`") })?;
                    let arg = self.expr()?;
                    if !self.eat(')') {
                        return self.err("expected `)`");
                    }
                    return Ok(Node::Call(f, Box::new(arg)));
                }
                atom_name(&name).ok_or(ParseError { pos: at, msg: format!("unknown variable `{name}`") })
            }
            Tok::Op(c) => self.err(format!("unexpected `{c}`")),
        }
    }
}

fn func(name: &str) -> Option<Func> {
    Some(match name {
        "abs" => Func::Abs,
        "sqrt" => Func::Sqrt,
        "exp" => Func::Exp,
        "log" | "ln" => Func::Log,
        "sin" => Func::Sin,
        "cos" => Func::Cos,
        "tan" => Func::Tan,
        "sign" | "sgn" => Func::Sign,
        "re" => Func::Re,
        "im" => Func::Im,
        "conj" => Func::Conj,
        _ => return None,
    })
}

fn atom_name(name: &str) -> Option<Node> {
    Some(match name {
        "alpha" | "a" => Node::Var(Var::Alpha),
        "s" => Node::Var(Var::S),
        "w1" => Node::Var(Var::W(0)),
        "w2" => Node::Var(Var::W(1)),
        "w3" => Node::Var(Var::W(2)),
        "phi" => Node::Var(Var::Phi),
        "i" => Node::Num(Complex64::i()),
        "pi" => Node::Num(Complex64::new(std::f64::consts::PI, 0.0)),
        "e" => Node::Num(Complex64::new(std::f64::consts::E, 0.0)),
        _ => return None,
    })
}

fn pow(b: Complex64, x: Complex64) -> Complex64 {
    if x.im == 0.0 {
        if b.im == 0.0 && (b.re >= 0.0 || x.re.fract() == 0.0) {
            return Complex64::new(b.re.powf(x.re), 0.0);
        }
        if x.re.fract() == 0.0 && x.re.abs() <= i32::MAX as f64 {
            return b.powi(x.re as i32);
        }
    }
    if b == Complex64::new(0.0, 0.0) {
        return if x.re > 0.0 { b } else { Complex64::new(f64::INFINITY, 0.0) };
    }
    b.powc(x)
}

fn eval(n: &Node, env: &Env) -> Complex64 {
    let re = |v: f64| Complex64::new(v, 0.0);
    match n {
        Node::Num(v) => *v,
        Node::Var(Var::Alpha) => re(env.alpha),
        Node::Var(Var::S) => re(env.s),
        Node::Var(Var::W(k)) => re(env.omega[*k]),
        Node::Var(Var::Phi) => re(env.omega[1].atan2(env.omega[0])),
        Node::Neg(a) => -eval(a, env),
        Node::Bin(op, a, b) => {
            let (a, b) = (eval(a, env), eval(b, env));
            match op {
                '+' => a + b,
                '-' => a - b,
                '*' => a * b,
                '/' => a / b,
                _ => pow(a, b),
            }
        }
        Node::Call(f, a) => {
            let a = eval(a, env);
            match f {
                Func::Abs => re(a.norm()),
                Func::Sqrt => a.sqrt(),
                Func::Exp => a.exp(),
                Func::Log => a.ln(),
                Func::Sin => a.sin(),
                Func::Cos => a.cos(),
                Func::Tan => a.tan(),
                Func::Sign => {
                    if a.im == 0.0 {
                        re(if a.re > 0.0 {
                            1.0
                        } else if a.re < 0.0 {
                            -1.0
                        } else {
                            0.0
                        })
                    } else {
                        a / a.norm()
                    }
                }
                Func::Re => re(a.re),
                Func::Im => re(a.im),
                Func::Conj => a.conj(),
            }
        }
    }
}

fn uses_s(n: &Node) -> bool {
    match n {
        Node::Var(Var::S) => true,
        Node::Num(_) | Node::Var(_) => false,
        Node::Neg(a) | Node::Call(_, a) => uses_s(a),
        Node::Bin(_, a, b) => uses_s(a) || uses_s(b),
    }
}

impl Expr {
    pub fn parse(src: &str) -> Result<Self, ParseError> {
        let toks = lex(src)?;
        let mut p = Parser { toks, k: 0, end: src.chars().count() };
        let root = p.expr()?;
        if p.k != p.toks.len() {
            return p.err("trailing input");
        }
        Ok(Self { root, source: src.trim().to_string() })
    }

    pub fn eval(&self, env: &Env) -> Complex64 {
        eval(&self.root, env)
    }

    pub fn depends_on_s(&self) -> bool {
        uses_s(&self.root)
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Homogeneity degree in α estimated from p(2α)/p(α) at large α,
    /// rounded to a multiple of 1/8.
    pub fn estimate_order(&self) -> Option<f64> {
        let mut acc = Vec::new();
        for (k, sign) in [(0, 1.0), (1, -1.0), (2, 1.0)] {
            let t = 0.7 + k as f64;
            let env = |alpha| Env { alpha, s: 0.0, omega: [t.cos(), t.sin(), 0.0] };
            let (a, b) = (self.eval(&env(sign * 256.0)).norm(), self.eval(&env(sign * 512.0)).norm());
            if a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite() {
                acc.push((b / a).log2());
            }
        }
        if acc.is_empty() {
            return None;
        }
        let mean = acc.iter().sum::<f64>() / acc.len() as f64;
        Some((mean * 8.0).round() / 8.0)
    }
}
