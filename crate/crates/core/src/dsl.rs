//! The `.lat` lattice description format.
//!
//! ```text
//! # comments run to the end of the line
//! lattice lieb                 # header, must come first
//! coupling 1                   # optional, default 1
//! site b 1                     # label and gain/loss multiplier
//! site p -1
//! bond b p 0                   # offset 0: same cell
//! bond p b +1                  # offset +1: second site in the next cell
//! parity b:t p:q               # involution pairs, unlisted sites are fixed
//! profile cell-periodic        # or longitudinal-split
//! ```
//!
//! Site declaration order fixes the matrix ordering. Under
//! `profile longitudinal-split` the multipliers and parity pairs are ignored.

use std::collections::{HashMap, HashSet};
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::lattice::{
    GainLossProfile, LatticeError, LatticeKind, ProfileKind, UnitCellSpec,
};

/// 1-based line and column of a token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Span {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{span}: {message}")]
pub struct ParseError {
    pub span: Span,
    pub message: String,
}

impl ParseError {
    fn new(span: Span, message: impl Into<String>) -> Self {
        ParseError {
            span,
            message: message.into(),
        }
    }
}

/// Where each declaration of a document came from.
#[derive(Debug, Clone, Default)]
pub struct DocumentSpans {
    pub header: Span,
    pub coupling: Option<Span>,
    pub sites: Vec<Span>,
    pub bonds: Vec<Span>,
    pub parity: Vec<Span>,
    pub profile: Option<Span>,
}

/// A parsed lattice file. Equality ignores source positions.
#[derive(Debug, Clone)]
pub struct LatticeDocument {
    pub cell: UnitCellSpec,
    pub profile: GainLossProfile,
    pub spans: DocumentSpans,
}

impl PartialEq for LatticeDocument {
    fn eq(&self, other: &Self) -> bool {
        self.cell == other.cell && self.profile == other.profile
    }
}

impl LatticeDocument {
    pub fn new(cell: UnitCellSpec, profile: GainLossProfile) -> Result<Self, LatticeError> {
        profile.validate_for(&cell)?;
        Ok(LatticeDocument {
            cell,
            profile,
            spans: DocumentSpans::default(),
        })
    }

    pub fn builtin(kind: LatticeKind) -> Self {
        LatticeDocument::new(
            crate::lattice::build_unit_cell(kind),
            crate::lattice::build_gain_loss_profile(kind),
        )
        .expect("built-in profiles match their cells")
    }
}

/// Source text of the bundled lattice files.
pub fn bundled(kind: LatticeKind) -> &'static str {
    match kind {
        LatticeKind::Lieb => include_str!("../lattices/lieb.lat"),
        LatticeKind::Kagome => include_str!("../lattices/kagome.lat"),
        LatticeKind::Stub => include_str!("../lattices/stub.lat"),
    }
}

struct Token<'a> {
    text: &'a str,
    span: Span,
}

fn tokenize(line_no: usize, line: &str) -> Vec<Token<'_>> {
    let content = match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    };
    let mut tokens = Vec::new();
    let mut start = None;
    for (i, ch) in content.char_indices().chain(std::iter::once((content.len(), ' '))) {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                tokens.push(Token {
                    text: &content[s..i],
                    span: Span {
                        line: line_no,
                        column: content[..s].chars().count() + 1,
                    },
                });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    tokens
}

/// Position just past the last character of a line.
fn end_of(line_no: usize, line: &str) -> Span {
    Span {
        line: line_no,
        column: line.chars().count() + 1,
    }
}

fn expect_arity(tokens: &[Token], n: usize, usage: &str, line_end: Span) -> Result<(), ParseError> {
    if tokens.len() < n {
        return Err(ParseError::new(line_end, format!("expected {usage}")));
    }
    if tokens.len() > n {
        return Err(ParseError::new(
            tokens[n].span,
            format!("unexpected `{}`, expected end of line after {usage}", tokens[n].text),
        ));
    }
    Ok(())
}

fn parse_real(tok: &Token, what: &str) -> Result<f64, ParseError> {
    match tok.text.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(ParseError::new(
            tok.span,
            format!("expected {what} (a finite real number), found `{}`", tok.text),
        )),
    }
}

fn check_label(tok: &Token) -> Result<(), ParseError> {
    if tok.text.contains(':') {
        return Err(ParseError::new(
            tok.span,
            format!("site label `{}` must not contain `:`", tok.text),
        ));
    }
    Ok(())
}

struct Site<'a> {
    label: &'a str,
    multiplier: f64,
    span: Span,
}

struct BondDecl<'a> {
    a: Token<'a>,
    b: Token<'a>,
    offset: u8,
    span: Span,
}

/// Parses a `.lat` document.
pub fn parse(text: &str) -> Result<LatticeDocument, ParseError> {
    let mut spans = DocumentSpans::default();
    let mut name: Option<&str> = None;
    let mut coupling = 1.0;
    let mut sites: Vec<Site> = Vec::new();
    let mut bonds: Vec<BondDecl> = Vec::new();
    let mut pairs: Vec<(Token, Token)> = Vec::new();
    let mut profile_kind = ProfileKind::CellPeriodic;

    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let tokens = tokenize(line_no, line);
        let Some(head) = tokens.first() else { continue };
        let eol = end_of(line_no, line);
        if name.is_none() && head.text != "lattice" {
            return Err(ParseError::new(
                head.span,
                format!("expected `lattice <name>` header, found `{}`", head.text),
            ));
        }
        match head.text {
            "lattice" => {
                if name.is_some() {
                    return Err(ParseError::new(head.span, "duplicate `lattice` header"));
                }
                expect_arity(&tokens, 2, "`lattice <name>`", eol)?;
                name = Some(tokens[1].text);
                spans.header = head.span;
            }
            "coupling" => {
                if spans.coupling.is_some() {
                    return Err(ParseError::new(head.span, "duplicate `coupling` directive"));
                }
                expect_arity(&tokens, 2, "`coupling <positive real>`", eol)?;
                let v = parse_real(&tokens[1], "a coupling")?;
                if v <= 0.0 {
                    return Err(ParseError::new(
                        tokens[1].span,
                        format!("coupling must be positive, found {v}"),
                    ));
                }
                coupling = v;
                spans.coupling = Some(head.span);
            }
            "site" => {
                expect_arity(&tokens, 3, "`site <label> <multiplier>`", eol)?;
                check_label(&tokens[1])?;
                if sites.iter().any(|s| s.label == tokens[1].text) {
                    return Err(ParseError::new(
                        tokens[1].span,
                        format!("duplicate site `{}`", tokens[1].text),
                    ));
                }
                let multiplier = parse_real(&tokens[2], "a multiplier")?;
                sites.push(Site {
                    label: tokens[1].text,
                    multiplier,
                    span: head.span,
                });
                spans.sites.push(head.span);
            }
            "bond" => {
                expect_arity(&tokens, 4, "`bond <label> <label> <offset>`", eol)?;
                let offset = match tokens[3].text {
                    "0" => 0,
                    "+1" | "1" => 1,
                    other => {
                        return Err(ParseError::new(
                            tokens[3].span,
                            format!("expected offset `0` or `+1`, found `{other}`"),
                        ))
                    }
                };
                let mut it = tokens.into_iter().skip(1);
                let (a, b) = (it.next().unwrap(), it.next().unwrap());
                spans.bonds.push(head_span(&a, line_no));
                bonds.push(BondDecl {
                    span: Span { line: line_no, column: a.span.column },
                    a,
                    b,
                    offset,
                });
            }
            "parity" => {
                if tokens.len() < 2 {
                    return Err(ParseError::new(eol, "expected `parity <label>:<label> ...`"));
                }
                spans.parity.push(head.span);
                for tok in tokens.into_iter().skip(1) {
                    let Some((a, b)) = tok.text.split_once(':') else {
                        return Err(ParseError::new(
                            tok.span,
                            format!("expected `<label>:<label>`, found `{}`", tok.text),
                        ));
                    };
                    if a.is_empty() || b.is_empty() || b.contains(':') {
                        return Err(ParseError::new(
                            tok.span,
                            format!("expected `<label>:<label>`, found `{}`", tok.text),
                        ));
                    }
                    let b_span = Span {
                        line: tok.span.line,
                        column: tok.span.column + a.chars().count() + 1,
                    };
                    pairs.push((
                        Token { text: a, span: tok.span },
                        Token { text: b, span: b_span },
                    ));
                }
            }
            "profile" => {
                if spans.profile.is_some() {
                    return Err(ParseError::new(head.span, "duplicate `profile` directive"));
                }
                expect_arity(&tokens, 2, "`profile cell-periodic|longitudinal-split`", eol)?;
                profile_kind = match tokens[1].text {
                    "cell-periodic" => ProfileKind::CellPeriodic,
                    "longitudinal-split" => ProfileKind::LongitudinalSplit,
                    other => {
                        return Err(ParseError::new(
                            tokens[1].span,
                            format!("expected `cell-periodic` or `longitudinal-split`, found `{other}`"),
                        ))
                    }
                };
                spans.profile = Some(head.span);
            }
            other => {
                return Err(ParseError::new(
                    head.span,
                    format!(
                        "unknown directive `{other}` (expected lattice, coupling, site, bond, parity or profile)"
                    ),
                ))
            }
        }
    }

    let Some(name) = name else {
        let span = Span { line: 1, column: 1 };
        return Err(ParseError::new(span, "expected `lattice <name>` header"));
    };
    if sites.is_empty() {
        return Err(ParseError::new(spans.header, "lattice declares no sites"));
    }

    let declared: HashSet<&str> = sites.iter().map(|s| s.label).collect();
    let undeclared = |t: &Token| -> Result<(), ParseError> {
        if declared.contains(t.text) {
            Ok(())
        } else {
            Err(ParseError::new(t.span, format!("undeclared site `{}`", t.text)))
        }
    };
    let order: HashMap<&str, usize> = sites.iter().enumerate().map(|(i, s)| (s.label, i)).collect();
    let mut seen = HashSet::new();
    for bond in &bonds {
        undeclared(&bond.a)?;
        undeclared(&bond.b)?;
        let (ia, ib) = (order[bond.a.text], order[bond.b.text]);
        if bond.offset == 0 && ia == ib {
            return Err(ParseError::new(bond.span, format!("self-bond on site `{}`", bond.a.text)));
        }
        let key = if bond.offset == 0 {
            (0, ia.min(ib), ia.max(ib))
        } else {
            (1, ia, ib)
        };
        if !seen.insert(key) {
            return Err(ParseError::new(bond.span, "duplicate bond"));
        }
    }

    let site_labels: Vec<&str> = sites.iter().map(|s| s.label).collect();
    let intra: Vec<(&str, &str)> = bonds
        .iter()
        .filter(|b| b.offset == 0)
        .map(|b| (b.a.text, b.b.text))
        .collect();
    let inter: Vec<(&str, &str)> = bonds
        .iter()
        .filter(|b| b.offset == 1)
        .map(|b| (b.a.text, b.b.text))
        .collect();
    let cell = UnitCellSpec::new(name, &site_labels, &intra, &inter, coupling)
        .map_err(|e| ParseError::new(spans.header, e.to_string()))?;

    let profile = match profile_kind {
        ProfileKind::LongitudinalSplit => GainLossProfile::longitudinal_split(),
        ProfileKind::CellPeriodic => {
            let mut partner: HashMap<&str, &str> = HashMap::new();
            for (a, b) in &pairs {
                undeclared(a)?;
                undeclared(b)?;
                for t in [a, b] {
                    if partner.contains_key(t.text) {
                        return Err(ParseError::new(
                            t.span,
                            format!("parity is not an involution: `{}` is paired twice", t.text),
                        ));
                    }
                }
                partner.insert(a.text, b.text);
                partner.insert(b.text, a.text);
            }
            for site in &sites {
                let p = partner.get(site.label).copied().unwrap_or(site.label);
                if p == site.label {
                    if site.multiplier != 0.0 {
                        return Err(ParseError::new(
                            site.span,
                            format!(
                                "parity fixed point requires multiplier 0 (site `{}` has {})",
                                site.label, site.multiplier
                            ),
                        ));
                    }
                } else {
                    let pm = sites[order[p]].multiplier;
                    if pm != -site.multiplier {
                        return Err(ParseError::new(
                            site.span,
                            format!(
                                "parity-oddness violated: `{}` has {} but its partner `{}` has {}",
                                site.label, site.multiplier, p, pm
                            ),
                        ));
                    }
                }
            }
            let multipliers: Vec<(&str, f64)> = sites.iter().map(|s| (s.label, s.multiplier)).collect();
            let pair_labels: Vec<(&str, &str)> = pairs.iter().map(|(a, b)| (a.text, b.text)).collect();
            GainLossProfile::cell_periodic(&multipliers, &pair_labels)
                .map_err(|e| ParseError::new(spans.header, e.to_string()))?
        }
    };

    Ok(LatticeDocument { cell, profile, spans })
}

fn head_span(first_arg: &Token, line_no: usize) -> Span {
    // the directive keyword always precedes the first argument on the line
    let _ = first_arg;
    Span { line: line_no, column: 1 }
}

/// Canonical text for a document: sites in declaration order, bonds sorted
/// by offset and site order, parity pairs in site order.
pub fn serialize(doc: &LatticeDocument) -> String {
    let cell = &doc.cell;
    let sites = cell.sites();
    let split = doc.profile.kind() == ProfileKind::LongitudinalSplit;
    let mut out = String::new();
    let _ = writeln!(out, "lattice {}", cell.name());
    let _ = writeln!(out, "coupling {}", cell.coupling());
    for s in sites {
        let m = if split { 0.0 } else { doc.profile.multiplier(s) };
        let _ = writeln!(out, "site {s} {}", m + 0.0);
    }
    for b in cell.bonds() {
        let off = if b.offset == 0 { "0" } else { "+1" };
        let _ = writeln!(out, "bond {} {} {off}", sites[b.a], sites[b.b]);
    }
    if !split {
        let mut pairs: Vec<(usize, usize)> = doc
            .profile
            .parity_pairs()
            .filter_map(|(a, b)| {
                let (ia, ib) = (cell.site_index(a)?, cell.site_index(b)?);
                Some((ia.min(ib), ia.max(ib)))
            })
            .collect();
        pairs.sort();
        if !pairs.is_empty() {
            let body: Vec<String> = pairs
                .iter()
                .map(|(a, b)| format!("{}:{}", sites[*a], sites[*b]))
                .collect();
            let _ = writeln!(out, "parity {}", body.join(" "));
        }
    }
    let _ = writeln!(
        out,
        "profile {}",
        if split { "longitudinal-split" } else { "cell-periodic" }
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    impl LatticeDocument {
        fn with_name(mut self, name: &str) -> Self {
            let c = &self.cell;
            let sites: Vec<&str> = c.sites().iter().map(String::as_str).collect();
            let intra: Vec<(&str, &str)> = c.intra_bonds().map(|b| (sites[b.a], sites[b.b])).collect();
            let inter: Vec<(&str, &str)> = c.inter_bonds().map(|b| (sites[b.a], sites[b.b])).collect();
            self.cell = UnitCellSpec::new(name, &sites, &intra, &inter, c.coupling()).unwrap();
            self
        }
    }

    #[test]
    fn bundled_files_match_builders() {
        for kind in LatticeKind::ALL {
            let doc = parse(bundled(kind)).unwrap();
            assert_eq!(doc, LatticeDocument::builtin(kind), "{kind}");
        }
    }

    #[test]
    fn lieb_text_shape() {
        let text = serialize(&LatticeDocument::builtin(LatticeKind::Lieb));
        assert_eq!(text.lines().filter(|l| l.starts_with("site ")).count(), 5);
        assert!(text.contains("parity b:t p:q\n"));
    }

    #[test]
    fn kagome_bond_lines() {
        let text = serialize(&LatticeDocument::builtin(LatticeKind::Kagome));
        let bonds: Vec<&str> = text.lines().filter(|l| l.starts_with("bond ")).collect();
        assert_eq!(bonds.iter().filter(|l| l.ends_with(" 0")).count(), 6);
        assert_eq!(bonds.iter().filter(|l| l.ends_with(" +1")).count(), 2);
    }

    #[test]
    fn fixed_point_with_gain_is_located() {
        let text = "lattice x\nsite a 1\nsite b -1\nsite r 1\nbond a b 0\nbond a r 0\nbond b a +1\nparity a:b\n";
        let err = parse(text).unwrap_err();
        assert_eq!(err.span, Span { line: 4, column: 1 });
        assert!(err.message.starts_with("parity fixed point requires multiplier 0"));
    }

    #[test]
    fn oddness_violation_is_located() {
        let text = "lattice x\nsite a 1\nsite b 1\nbond a b 0\nbond b a +1\nparity a:b\n";
        let err = parse(text).unwrap_err();
        assert_eq!(err.span.line, 2);
        assert!(err.message.contains("parity-oddness"));
    }

    #[test]
    fn syntax_errors() {
        let cases: &[(&str, usize, usize, &str)] = &[
            ("site a 0\n", 1, 1, "expected `lattice <name>` header"),
            ("", 1, 1, "expected `lattice <name>` header"),
            ("lattice x\nfoo 1\n", 2, 1, "unknown directive `foo`"),
            ("lattice x\ncoupling -1\n", 2, 10, "coupling must be positive"),
            ("lattice x\ncoupling\n", 2, 9, "expected `coupling"),
            ("lattice x\nsite a one\n", 2, 8, "expected a multiplier"),
            ("lattice x\nsite a 0\nsite a 0\n", 3, 6, "duplicate site"),
            ("lattice x\nsite a 0\nbond a z +1\n", 3, 8, "undeclared site `z`"),
            ("lattice x\nsite a 0\nbond a a 2\n", 3, 10, "expected offset"),
            ("lattice x\nsite a 0\nbond a a 0\n", 3, 6, "self-bond"),
            ("lattice x\nsite a 0\nbond a a +1\nbond a a 1\n", 4, 6, "duplicate bond"),
            ("lattice x\nsite a 0\nbond a a +1\nparity a\n", 4, 8, "expected `<label>:<label>`"),
            ("lattice x\nsite a 0\nsite b 0\nsite c 0\nbond a b 0\nbond b c 0\nbond c a +1\nparity a:b b:c\n", 8, 12, "not an involution"),
            ("lattice x\nsite a 0\nsite b 0\nbond a b 0\n", 1, 1, "not connected"),
            ("lattice x\nsite a 0 # gain\nbond a a +1\nprofile sideways\n", 4, 9, "expected `cell-periodic`"),
            ("lattice x\nsite a inf\n", 2, 8, "finite"),
            ("lattice x y\n", 1, 11, "unexpected `y`"),
        ];
        for (text, line, column, msg) in cases {
            let err = parse(text).unwrap_err();
            assert_eq!((err.span.line, err.span.column), (*line, *column), "{text:?}: {err}");
            assert!(err.message.contains(msg), "{text:?}: {err}");
        }
    }

    #[test]
    fn split_profile_ignores_multipliers() {
        let text = "lattice s\nsite A 5\nsite B 0\nsite C 0\nbond A B 0\nbond A C 0\nbond B A +1\nparity A:B\nprofile longitudinal-split\n";
        let doc = parse(text).unwrap();
        assert_eq!(doc, LatticeDocument::builtin(LatticeKind::Stub).with_name("s"));
    }

    #[test]
    fn comments_and_blank_lines() {
        let text = "# header comment\n\nlattice chain # inline\n  site a 0\nbond a a +1\n";
        let doc = parse(text).unwrap();
        assert_eq!(doc.cell.len(), 1);
        assert_eq!(doc.spans.header, Span { line: 3, column: 1 });
        assert_eq!(doc.spans.sites, vec![Span { line: 4, column: 3 }]);
    }
}
