// SPDX-License-Identifier: MIT OR Apache-2.0

//! LP-format reader (CPLEX dialect subset).
//!
//! Supported surface: minimize/maximize objective with an optional
//! `[ ... ] / 2` quadratic block, labeled constraint rows with optional
//! `[ ... ]` product blocks, a Bounds section (`free`, one- and two-sided
//! bounds, `inf` keywords), Binaries/Generals sections, comments starting
//! with `\`, and rows wrapped across lines. Variables default to
//! `[0, +inf)` as the format prescribes; binaries default to `[0, 1]`.

use std::fmt;

use crate::problem::{Problem, Row, RowSense};

#[derive(Clone, Debug, PartialEq)]
pub struct LpParseError {
    pub line: usize,
    pub message: String,
}

impl LpParseError {
    fn new(line: usize, message: impl Into<String>) -> Self {
        Self { line, message: message.into() }
    }
}

impl fmt::Display for LpParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for LpParseError {}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Word(String),
    Num(f64),
    Plus,
    Minus,
    Colon,
    LBrack,
    RBrack,
    Slash,
    Caret,
    Star,
    Le,
    Ge,
    Eq,
    Newline,
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, LpParseError> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let line = match raw.find('\\') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let bytes = line.as_bytes();
        let mut i = 0usize;
        while i < bytes.len() {
            let c = bytes[i] as char;
            match c {
                ' ' | '\t' | '\r' => i += 1,
                '+' => {
                    out.push((Tok::Plus, line_no));
                    i += 1;
                }
                '-' => {
                    out.push((Tok::Minus, line_no));
                    i += 1;
                }
                ':' => {
                    out.push((Tok::Colon, line_no));
                    i += 1;
                }
                '[' => {
                    out.push((Tok::LBrack, line_no));
                    i += 1;
                }
                ']' => {
                    out.push((Tok::RBrack, line_no));
                    i += 1;
                }
                '/' => {
                    out.push((Tok::Slash, line_no));
                    i += 1;
                }
                '^' => {
                    out.push((Tok::Caret, line_no));
                    i += 1;
                }
                '*' => {
                    out.push((Tok::Star, line_no));
                    i += 1;
                }
                '<' | '>' | '=' => {
                    let mut j = i + 1;
                    if j < bytes.len() && bytes[j] as char == '=' {
                        j += 1;
                    }
                    out.push((
                        match c {
                            '<' => Tok::Le,
                            '>' => Tok::Ge,
                            _ => Tok::Eq,
                        },
                        line_no,
                    ));
                    i = j;
                }
                '0'..='9' | '.' => {
                    let start = i;
                    while i < bytes.len() {
                        let d = bytes[i] as char;
                        if d.is_ascii_digit() || d == '.' {
                            i += 1;
                        } else if (d == 'e' || d == 'E')
                            && i + 1 < bytes.len()
                            && ((bytes[i + 1] as char).is_ascii_digit()
                                || bytes[i + 1] as char == '+'
                                || bytes[i + 1] as char == '-')
                        {
                            i += 2;
                        } else {
                            break;
                        }
                    }
                    let token = &line[start..i];
                    let value = token.parse::<f64>().map_err(|_| {
                        LpParseError::new(line_no, format!("malformed number '{token}'"))
                    })?;
                    out.push((Tok::Num(value), line_no));
                }
                c if c.is_ascii_alphabetic() || c == '_' => {
                    let start = i;
                    while i < bytes.len() {
                        let d = bytes[i] as char;
                        if d.is_ascii_alphanumeric() || d == '_' || d == '.' {
                            i += 1;
                        } else {
                            break;
                        }
                    }
                    out.push((Tok::Word(line[start..i].to_string()), line_no));
                }
                other => {
                    return Err(LpParseError::new(
                        line_no,
                        format!("unexpected character '{other}'"),
                    ))
                }
            }
        }
        out.push((Tok::Newline, line_no));
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Section {
    Objective,
    Rows,
    Bounds,
    Binaries,
    Generals,
    End,
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn line(&self) -> usize {
        self.toks.get(self.pos).or_else(|| self.toks.last()).map_or(0, |&(_, l)| l)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn at_line_start(&self) -> bool {
        self.pos == 0 || matches!(self.toks.get(self.pos - 1), Some((Tok::Newline, _)))
    }

    fn skip_newlines(&mut self) {
        while matches!(self.peek(), Some(Tok::Newline)) {
            self.pos += 1;
        }
    }

    /// Detects a section keyword at the current position (line starts
    /// only), consuming it.
    fn try_section(&mut self) -> Option<Section> {
        if !self.at_line_start() {
            return None;
        }
        let Some(Tok::Word(w)) = self.peek() else { return None };
        let word = w.to_ascii_lowercase();
        let section = match word.as_str() {
            "minimize" | "minimise" | "minimum" | "min" => Some((Section::Objective, 1)),
            "maximize" | "maximise" | "maximum" | "max" => Some((Section::Objective, 1)),
            "st" | "s.t." => Some((Section::Rows, 1)),
            "subject" | "such" => {
                // "subject to" / "such that"
                if let Some((Tok::Word(next), _)) = self.toks.get(self.pos + 1) {
                    let n = next.to_ascii_lowercase();
                    if n == "to" || n == "that" {
                        Some((Section::Rows, 2))
                    } else {
                        None
                    }
                } else {
                    None
                }
            }
            "bounds" | "bound" => Some((Section::Bounds, 1)),
            "binary" | "binaries" | "bin" => Some((Section::Binaries, 1)),
            "general" | "generals" | "gen" | "integer" | "integers" => {
                Some((Section::Generals, 1))
            }
            "end" => Some((Section::End, 1)),
            _ => None,
        };
        if let Some((section, advance)) = section {
            self.pos += advance;
            return Some(section);
        }
        None
    }
}

/// Parses LP text into a [`Problem`].
pub fn parse_lp(text: &str) -> Result<Problem, LpParseError> {
    let toks = tokenize(text)?;
    let mut p = Parser { toks, pos: 0 };
    let mut problem = Problem::default();
    problem.name = "model".into();

    p.skip_newlines();
    let line = p.line();
    let maximize = match p.try_section() {
        Some(Section::Objective) => {
            // Re-inspect the consumed keyword for the direction.
            match &p.toks[p.pos - 1].0 {
                Tok::Word(w) => w.to_ascii_lowercase().starts_with("max"),
                _ => false,
            }
        }
        _ => return Err(LpParseError::new(line, "expected an objective sense keyword")),
    };
    problem.maximize = maximize;

    // Objective expression, optionally labeled.
    p.skip_newlines();
    consume_label(&mut p);
    let mut obj_terms = Vec::new();
    let mut obj_quad = Vec::new();
    let (constant, next_section) =
        parse_expr(&mut p, &mut problem, &mut obj_terms, &mut obj_quad, true)?;
    problem.obj_const = constant;
    problem.obj_terms = combine(obj_terms);
    problem.obj_quad = obj_quad;
    if maximize {
        for t in &mut problem.obj_terms {
            t.1 = -t.1;
        }
        for q in &mut problem.obj_quad {
            q.2 = -q.2;
        }
        problem.obj_const = -problem.obj_const;
    }

    let mut section = next_section
        .ok_or_else(|| LpParseError::new(p.line(), "expected 'Subject To' after objective"))?;
    loop {
        match section {
            Section::Rows => {
                section = parse_rows(&mut p, &mut problem)?;
            }
            Section::Bounds => {
                section = parse_bounds(&mut p, &mut problem)?;
            }
            Section::Binaries => {
                section = parse_name_list(&mut p, &mut problem, true)?;
            }
            Section::Generals => {
                section = parse_name_list(&mut p, &mut problem, false)?;
            }
            Section::End => break,
            Section::Objective => {
                return Err(LpParseError::new(p.line(), "unexpected second objective section"))
            }
        }
    }
    Ok(problem)
}

fn consume_label(p: &mut Parser) -> Option<String> {
    if let (Some(Tok::Word(w)), Some((Tok::Colon, _))) =
        (p.peek().cloned().as_ref(), p.toks.get(p.pos + 1))
    {
        let name = w.clone();
        p.pos += 2;
        Some(name)
    } else {
        None
    }
}

fn combine(mut terms: Vec<(usize, f64)>) -> Vec<(usize, f64)> {
    terms.sort_by_key(|&(i, _)| i);
    let mut out: Vec<(usize, f64)> = Vec::with_capacity(terms.len());
    for (i, c) in terms {
        match out.last_mut() {
            Some(last) if last.0 == i => last.1 += c,
            _ => out.push((i, c)),
        }
    }
    out.retain(|&(_, c)| c != 0.0);
    out
}

/// Parses a linear expression with optional bracketed quadratic blocks.
/// Returns the accumulated constant and the section keyword that ended the
/// expression (objective mode) or `None` when a sense token stopped it
/// (row mode, token left unconsumed).
fn parse_expr(
    p: &mut Parser,
    problem: &mut Problem,
    terms: &mut Vec<(usize, f64)>,
    quad: &mut Vec<(usize, usize, f64)>,
    objective_mode: bool,
) -> Result<(f64, Option<Section>), LpParseError> {
    let mut constant = 0.0f64;
    let mut sign = 1.0f64;
    let mut pending: Option<f64> = None;
    loop {
        if matches!(p.peek(), Some(Tok::Newline)) {
            // Expressions may wrap; stop only at section keywords. A bare
            // number at the end of a line is a constant term.
            if let Some(c) = pending.take() {
                constant += sign * c;
                sign = 1.0;
            }
            p.skip_newlines();
            if sign == 1.0 {
                if let Some(section) = p.try_section() {
                    return Ok((constant, Some(section)));
                }
            }
            if p.peek().is_none() {
                return Ok((constant, None));
            }
            continue;
        }
        match p.peek().cloned() {
            Some(Tok::Plus) => {
                p.bump();
            }
            Some(Tok::Minus) => {
                sign = -sign;
                p.bump();
            }
            Some(Tok::Num(v)) => {
                p.bump();
                if let Some(c) = pending.take() {
                    // Two numbers in a row: previous was a bare constant.
                    constant += sign * c;
                    // Keep current sign for the new number? Signs apply per
                    // term; a fresh term starts here.
                    sign = 1.0;
                }
                pending = Some(v);
            }
            Some(Tok::Word(w)) => {
                p.bump();
                let coeff = sign * pending.take().unwrap_or(1.0);
                let var = problem.intern(&w);
                terms.push((var, coeff));
                sign = 1.0;
            }
            Some(Tok::LBrack) => {
                p.bump();
                parse_quad_block(p, problem, quad, objective_mode, sign)?;
                sign = 1.0;
            }
            Some(Tok::Le) | Some(Tok::Ge) | Some(Tok::Eq) => {
                if let Some(c) = pending.take() {
                    constant += sign * c;
                }
                return Ok((constant, None));
            }
            Some(other) => {
                return Err(LpParseError::new(
                    p.line(),
                    format!("unexpected token {other:?} in expression"),
                ))
            }
            None => {
                if let Some(c) = pending.take() {
                    constant += sign * c;
                }
                return Ok((constant, None));
            }
        }
        // A trailing bare number (no variable follows) becomes a constant
        // when the next token closes the term.
        if pending.is_some()
            && matches!(
                p.peek(),
                Some(Tok::Plus) | Some(Tok::Minus) | Some(Tok::Le) | Some(Tok::Ge) | Some(Tok::Eq)
            )
        {
            constant += sign * pending.take().unwrap();
            sign = 1.0;
        }
    }
}

/// Parses `coeff var ^ 2` and `coeff a * b` terms up to `]`, applying the
/// `/ 2` convention in objective mode when present.
fn parse_quad_block(
    p: &mut Parser,
    problem: &mut Problem,
    quad: &mut Vec<(usize, usize, f64)>,
    objective_mode: bool,
    outer_sign: f64,
) -> Result<(), LpParseError> {
    let mut local: Vec<(usize, usize, f64)> = Vec::new();
    let mut sign = 1.0f64;
    let mut pending: Option<f64> = None;
    loop {
        match p.bump() {
            Some(Tok::Newline) => {}
            Some(Tok::Plus) => {}
            Some(Tok::Minus) => sign = -sign,
            Some(Tok::Num(v)) => pending = Some(v),
            Some(Tok::Word(w)) => {
                let coeff = sign * pending.take().unwrap_or(1.0);
                let a = problem.intern(&w);
                match p.bump() {
                    Some(Tok::Caret) => match p.bump() {
                        Some(Tok::Num(two)) if two == 2.0 => local.push((a, a, coeff)),
                        _ => {
                            return Err(LpParseError::new(
                                p.line(),
                                "only squared terms are supported after '^'",
                            ))
                        }
                    },
                    Some(Tok::Star) => match p.bump() {
                        Some(Tok::Word(w2)) => {
                            let b = problem.intern(&w2);
                            local.push((a, b, coeff));
                        }
                        _ => {
                            return Err(LpParseError::new(
                                p.line(),
                                "expected a variable after '*'",
                            ))
                        }
                    },
                    _ => {
                        return Err(LpParseError::new(
                            p.line(),
                            "expected '^ 2' or '* var' inside a quadratic block",
                        ))
                    }
                }
                sign = 1.0;
            }
            Some(Tok::RBrack) => break,
            other => {
                return Err(LpParseError::new(
                    p.line(),
                    format!("unexpected token {other:?} in quadratic block"),
                ))
            }
        }
    }
    let mut divisor = 1.0f64;
    if objective_mode {
        if let Some(Tok::Slash) = p.peek() {
            p.bump();
            match p.bump() {
                Some(Tok::Num(two)) if two == 2.0 => divisor = 2.0,
                _ => return Err(LpParseError::new(p.line(), "expected '/ 2' after ']'")),
            }
        }
    }
    for (a, b, c) in local {
        quad.push((a, b, outer_sign * c / divisor));
    }
    Ok(())
}

fn parse_rows(p: &mut Parser, problem: &mut Problem) -> Result<Section, LpParseError> {
    loop {
        p.skip_newlines();
        if let Some(section) = p.try_section() {
            return Ok(section);
        }
        if p.peek().is_none() {
            return Err(LpParseError::new(p.line(), "file ended inside the constraint section"));
        }
        let label = consume_label(p)
            .unwrap_or_else(|| format!("r{}", problem.rows.len() + 1));
        let mut terms = Vec::new();
        let mut quad = Vec::new();
        let (constant, section) = parse_expr(p, problem, &mut terms, &mut quad, false)?;
        if section.is_some() {
            return Err(LpParseError::new(p.line(), format!("row '{label}' has no relation")));
        }
        let sense = match p.bump() {
            Some(Tok::Le) => RowSense::Le,
            Some(Tok::Ge) => RowSense::Ge,
            Some(Tok::Eq) => RowSense::Eq,
            other => {
                return Err(LpParseError::new(
                    p.line(),
                    format!("expected a relation in row '{label}', found {other:?}"),
                ))
            }
        };
        let mut rhs_sign = 1.0f64;
        let rhs = loop {
            match p.bump() {
                Some(Tok::Minus) => rhs_sign = -rhs_sign,
                Some(Tok::Plus) => {}
                Some(Tok::Num(v)) => break rhs_sign * v,
                other => {
                    return Err(LpParseError::new(
                        p.line(),
                        format!("expected a numeric right-hand side in row '{label}', found {other:?}"),
                    ))
                }
            }
        };
        problem.rows.push(Row {
            name: label,
            terms: combine(terms),
            quad,
            sense,
            rhs: rhs - constant,
        });
    }
}

fn bound_value(p: &mut Parser) -> Result<Option<f64>, LpParseError> {
    let mut sign = 1.0f64;
    loop {
        match p.bump() {
            Some(Tok::Minus) => sign = -sign,
            Some(Tok::Plus) => {}
            Some(Tok::Num(v)) => return Ok(Some(sign * v)),
            Some(Tok::Word(w)) => {
                let lw = w.to_ascii_lowercase();
                if lw == "inf" || lw == "infinity" {
                    return Ok(Some(sign * f64::INFINITY));
                }
                return Ok(None);
            }
            other => {
                return Err(LpParseError::new(p.line(), format!("malformed bound near {other:?}")))
            }
        }
    }
}

fn parse_bounds(p: &mut Parser, problem: &mut Problem) -> Result<Section, LpParseError> {
    loop {
        p.skip_newlines();
        if let Some(section) = p.try_section() {
            return Ok(section);
        }
        let line = p.line();
        match p.peek().cloned() {
            None => return Err(LpParseError::new(line, "file ended inside the bounds section")),
            Some(Tok::Word(w)) => {
                // `x free`, `x <= u`, `x >= l`, `x = v`
                let var = problem.intern(&w);
                p.bump();
                match p.bump() {
                    Some(Tok::Word(free)) if free.to_ascii_lowercase() == "free" => {
                        problem.lower[var] = f64::NEG_INFINITY;
                        problem.upper[var] = f64::INFINITY;
                    }
                    Some(Tok::Le) => {
                        let v = bound_value(p)?
                            .ok_or_else(|| LpParseError::new(line, "missing upper bound"))?;
                        problem.upper[var] = v;
                    }
                    Some(Tok::Ge) => {
                        let v = bound_value(p)?
                            .ok_or_else(|| LpParseError::new(line, "missing lower bound"))?;
                        problem.lower[var] = v;
                    }
                    Some(Tok::Eq) => {
                        let v = bound_value(p)?
                            .ok_or_else(|| LpParseError::new(line, "missing fixed value"))?;
                        problem.lower[var] = v;
                        problem.upper[var] = v;
                    }
                    other => {
                        return Err(LpParseError::new(
                            line,
                            format!("malformed bound line near {other:?}"),
                        ))
                    }
                }
            }
            Some(_) => {
                // `l <= x <= u` or `l <= x`
                let lo = bound_value(p)?
                    .ok_or_else(|| LpParseError::new(line, "expected a numeric lower bound"))?;
                match p.bump() {
                    Some(Tok::Le) => {}
                    other => {
                        return Err(LpParseError::new(
                            line,
                            format!("expected '<=' in bound line, found {other:?}"),
                        ))
                    }
                }
                let name = match p.bump() {
                    Some(Tok::Word(w)) => w,
                    other => {
                        return Err(LpParseError::new(
                            line,
                            format!("expected a variable name in bound line, found {other:?}"),
                        ))
                    }
                };
                let var = problem.intern(&name);
                problem.lower[var] = lo;
                if matches!(p.peek(), Some(Tok::Le)) {
                    p.bump();
                    let hi = bound_value(p)?
                        .ok_or_else(|| LpParseError::new(line, "missing upper bound"))?;
                    problem.upper[var] = hi;
                }
            }
        }
    }
}

fn parse_name_list(
    p: &mut Parser,
    problem: &mut Problem,
    binary: bool,
) -> Result<Section, LpParseError> {
    loop {
        p.skip_newlines();
        if let Some(section) = p.try_section() {
            return Ok(section);
        }
        match p.bump() {
            Some(Tok::Word(w)) => {
                let var = problem.intern(&w);
                if binary {
                    problem.binary[var] = true;
                    // Default binary box unless explicit bounds narrowed it.
                    if problem.lower[var] < 0.0 {
                        problem.lower[var] = 0.0;
                    }
                    if problem.upper[var] > 1.0 {
                        problem.upper[var] = 1.0;
                    }
                } else {
                    problem.integer[var] = true;
                }
            }
            None => {
                return Err(LpParseError::new(p.line(), "file ended inside a variable list"))
            }
            other => {
                return Err(LpParseError::new(
                    p.line(),
                    format!("expected a variable name, found {other:?}"),
                ))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_lp() {
        let text = "Minimize\n obj: 1 x\nSubject To\n low: 1 x >= 1\nBounds\n x >= 1\nEnd\n";
        let p = parse_lp(text).unwrap();
        assert_eq!(p.num_vars(), 1);
        assert_eq!(p.obj_terms, vec![(0, 1.0)]);
        assert_eq!(p.rows.len(), 1);
        assert_eq!(p.rows[0].sense, RowSense::Ge);
        assert_eq!(p.rows[0].rhs, 1.0);
        assert_eq!(p.lower[0], 1.0);
    }

    #[test]
    fn parses_quadratic_objective_block() {
        let text = "Minimize\n obj: [ 2 e ^ 2 + 4 f ^ 2 ] / 2\nSubject To\n r1: 1 e + 1 f >= 1\nEnd\n";
        let p = parse_lp(text).unwrap();
        assert_eq!(p.obj_quad, vec![(0, 0, 1.0), (1, 1, 2.0)]);
    }

    #[test]
    fn parses_bilinear_constraint_block() {
        let text = "Minimize\n obj: 0 x\nSubject To\n q: [ 1 a * b ] + 1 x = 0\nEnd\n";
        let p = parse_lp(text).unwrap();
        assert_eq!(p.rows[0].quad.len(), 1);
        assert!(p.has_quadratic_rows());
    }

    #[test]
    fn parses_bound_forms() {
        let text = "Minimize\n obj: 1 a\nSubject To\n r: 1 a + 1 b + 1 c + 1 d >= 1\nBounds\n a free\n -3 <= b <= 4\n c <= 9\n d = 2.5\nEnd\n";
        let p = parse_lp(text).unwrap();
        assert_eq!(p.lower[0], f64::NEG_INFINITY);
        assert_eq!((p.lower[1], p.upper[1]), (-3.0, 4.0));
        assert_eq!((p.lower[2], p.upper[2]), (0.0, 9.0));
        assert_eq!((p.lower[3], p.upper[3]), (2.5, 2.5));
    }

    #[test]
    fn parses_binaries_and_maximize() {
        let text = "Maximize\n obj: 3 x + 2 y\nSubject To\n cap: 1 x + 1 y <= 1\nBinaries\n x y\nEnd\n";
        let p = parse_lp(text).unwrap();
        assert!(p.maximize);
        // Stored in minimization form.
        assert_eq!(p.obj_terms, vec![(0, -3.0), (1, -2.0)]);
        assert!(p.binary[0] && p.binary[1]);
        assert_eq!(p.upper[0], 1.0);
    }

    #[test]
    fn wrapped_rows_parse() {
        let text = "Minimize\n obj: 1 x\nSubject To\n r1: 1 x\n + 1 y\n >= 2\nEnd\n";
        let p = parse_lp(text).unwrap();
        assert_eq!(p.rows[0].terms.len(), 2);
        assert_eq!(p.rows[0].rhs, 2.0);
    }

    #[test]
    fn reports_malformed_rows_with_line() {
        let text = "Minimize\n obj: 1 x\nSubject To\n r1: 1 x >=\nEnd\n";
        let err = parse_lp(text).unwrap_err();
        assert!(err.line >= 4, "{err}");
    }

    #[test]
    fn constants_in_objective_and_rhs_side() {
        let text = "Minimize\n obj: 1 x + 5\nSubject To\n r: 1 x - 1 >= 1\nEnd\n";
        let p = parse_lp(text).unwrap();
        assert_eq!(p.obj_const, 5.0);
        // Constant folded into the right-hand side.
        assert_eq!(p.rows[0].rhs, 2.0);
    }
}
