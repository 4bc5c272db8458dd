//! Partial MaxSAT formulas in DIMACS WCNF format.
//!
//! This module owns the clause/variable model shared by the rest of the
//! crate: literals, clauses, formulas, the classic-dialect WCNF parser and
//! serializer, and clause normalization.
//!
//! Only the classic `p wcnf <vars> <clauses> <top>` dialect is accepted.
//! Clauses with weight equal to the header's top value are hard, clauses
//! with weight 1 are soft; any other weight is rejected (weighted MaxSAT
//! is out of scope). Declared variable/clause counts are advisory: a
//! mismatch produces a warning, not an error.
//!
//! Empty clauses are representable: a hard empty clause makes the formula
//! immediately unsatisfiable, a soft empty clause contributes 1 to the
//! cost of every assignment.

use std::fmt;
use std::io::{BufRead, Write};

use thiserror::Error;

/// A literal: a variable `x_j` (positive) or its complement (negative).
///
/// Stored as a nonzero DIMACS-style integer.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit(i32);

impl Lit {
    /// Creates a literal from a nonzero DIMACS integer.
    ///
    /// Panics if `value == 0`.
    #[inline]
    pub fn new(value: i32) -> Lit {
        assert!(value != 0, "literal value must be nonzero");
        Lit(value)
    }

    /// Positive literal of variable `var` (1-based).
    #[inline]
    pub fn pos(var: u32) -> Lit {
        Lit(var as i32)
    }

    /// Negative literal of variable `var` (1-based).
    #[inline]
    pub fn neg(var: u32) -> Lit {
        Lit(-(var as i32))
    }

    /// The 1-based variable index.
    #[inline]
    pub fn var(self) -> u32 {
        self.0.unsigned_abs()
    }

    #[inline]
    pub fn is_positive(self) -> bool {
        self.0 > 0
    }

    /// The raw DIMACS integer.
    #[inline]
    pub fn to_dimacs(self) -> i32 {
        self.0
    }
}

impl std::ops::Not for Lit {
    type Output = Lit;
    #[inline]
    fn not(self) -> Lit {
        Lit(-self.0)
    }
}

impl fmt::Debug for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Whether a clause is mandatory or may be falsified at unit cost.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ClauseKind {
    Hard,
    Soft,
}

/// A clause with its formula-wide dense id.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Clause {
    pub id: usize,
    pub lits: Vec<Lit>,
    pub kind: ClauseKind,
}

impl Clause {
    pub fn len(&self) -> usize {
        self.lits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lits.is_empty()
    }

    /// True if the clause contains some variable in both polarities.
    pub fn is_tautology(&self) -> bool {
        for (i, &a) in self.lits.iter().enumerate() {
            for &b in &self.lits[i + 1..] {
                if a == !b {
                    return true;
                }
            }
        }
        false
    }

    /// True if the clause mentions `var` in either polarity.
    pub fn contains_var(&self, var: u32) -> bool {
        self.lits.iter().any(|l| l.var() == var)
    }
}

/// A total assignment over variables `1..=n` (index 0 unused is avoided by
/// storing value of variable `v` at `v - 1`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Assignment {
    values: Vec<bool>,
}

impl Assignment {
    pub fn new(values: Vec<bool>) -> Assignment {
        Assignment { values }
    }

    pub fn num_vars(&self) -> u32 {
        self.values.len() as u32
    }

    /// Value of variable `var` (1-based). Variables beyond the stored range
    /// read as false.
    #[inline]
    pub fn value(&self, var: u32) -> bool {
        self.values.get(var as usize - 1).copied().unwrap_or(false)
    }

    /// Truth value of a literal under this assignment.
    #[inline]
    pub fn lit_value(&self, lit: Lit) -> bool {
        self.value(lit.var()) == lit.is_positive()
    }

    /// True iff at least one literal of the clause is satisfied.
    pub fn satisfies(&self, clause: &Clause) -> bool {
        clause.lits.iter().any(|&l| self.lit_value(l))
    }

    /// Literals of the first `n` variables, for `v`-line printing.
    pub fn to_lits(&self, n: u32) -> Vec<Lit> {
        (1..=n)
            .map(|v| if self.value(v) { Lit::pos(v) } else { Lit::neg(v) })
            .collect()
    }
}

/// A partial MaxSAT formula: hard clauses plus unit-weight soft clauses.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WcnfFormula {
    num_vars: u32,
    top: u64,
    clauses: Vec<Clause>,
}

impl WcnfFormula {
    /// Builds a formula from clause literal lists. Ids are assigned in the
    /// given order, hard and soft possibly interleaved.
    pub fn from_clauses(
        num_vars: u32,
        hard: impl IntoIterator<Item = Vec<Lit>>,
        soft: impl IntoIterator<Item = Vec<Lit>>,
    ) -> WcnfFormula {
        let mut clauses = Vec::new();
        for lits in hard {
            let id = clauses.len();
            clauses.push(Clause { id, lits, kind: ClauseKind::Hard });
        }
        for lits in soft {
            let id = clauses.len();
            clauses.push(Clause { id, lits, kind: ClauseKind::Soft });
        }
        let top = clauses.len() as u64 + 1;
        WcnfFormula { num_vars, top, clauses }
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn top(&self) -> u64 {
        self.top
    }

    /// All clauses in id order.
    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn clause(&self, id: usize) -> &Clause {
        &self.clauses[id]
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn hard(&self) -> impl Iterator<Item = &Clause> {
        self.clauses.iter().filter(|c| c.kind == ClauseKind::Hard)
    }

    pub fn soft(&self) -> impl Iterator<Item = &Clause> {
        self.clauses.iter().filter(|c| c.kind == ClauseKind::Soft)
    }

    pub fn num_hard(&self) -> usize {
        self.hard().count()
    }

    pub fn num_soft(&self) -> usize {
        self.soft().count()
    }

    /// Cost of an assignment: the number of falsified soft clauses, or
    /// `None` if some hard clause is falsified.
    pub fn evaluate(&self, assignment: &Assignment) -> Option<u64> {
        let mut cost = 0;
        for clause in &self.clauses {
            if !assignment.satisfies(clause) {
                match clause.kind {
                    ClauseKind::Hard => return None,
                    ClauseKind::Soft => cost += 1,
                }
            }
        }
        Some(cost)
    }

    /// Serializes in the classic dialect; clauses are written in id order so
    /// that re-parsing reproduces the same formula.
    pub fn write_wcnf(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "p wcnf {} {} {}", self.num_vars, self.clauses.len(), self.top)?;
        for clause in &self.clauses {
            let weight = match clause.kind {
                ClauseKind::Hard => self.top,
                ClauseKind::Soft => 1,
            };
            write!(w, "{}", weight)?;
            for lit in &clause.lits {
                write!(w, " {}", lit)?;
            }
            writeln!(w, " 0")?;
        }
        Ok(())
    }

    pub fn to_wcnf_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_wcnf(&mut buf).expect("write to Vec cannot fail");
        String::from_utf8(buf).expect("serializer emits ASCII")
    }
}

/// Errors raised by [`parse_wcnf`]. Line numbers are 1-based.
#[derive(Error, Debug, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: invalid header '{text}'")]
    InvalidHeader { line: usize, text: String },
    #[error("line {line}: duplicate 'p wcnf' header")]
    DuplicateHeader { line: usize },
    #[error("no 'p wcnf' header found")]
    MissingHeader,
    #[error("line {line}: clause before header")]
    ClauseBeforeHeader { line: usize },
    #[error("line {line}: unsupported soft weight {weight} (only 1 and top={top} are accepted)")]
    UnsupportedWeight { line: usize, weight: u64, top: u64 },
    #[error("line {line}: literal {lit} out of range (declared {num_vars} variables)")]
    LitOutOfRange { line: usize, lit: i64, num_vars: u32 },
    #[error("line {line}: truncated clause (no terminating 0)")]
    TruncatedClause { line: usize },
    #[error("line {line}: trailing tokens after clause terminator")]
    TrailingTokens { line: usize },
    #[error("line {line}: malformed token '{token}'")]
    MalformedToken { line: usize, token: String },
    #[error("io error: {0}")]
    Io(String),
}

/// Result of a successful parse: the formula plus advisory warnings
/// (declared-count mismatches).
#[derive(Debug)]
pub struct ParsedWcnf {
    pub formula: WcnfFormula,
    pub warnings: Vec<String>,
}

/// Parses a classic-dialect WCNF file.
///
/// Comment lines start with `c`; blank lines are skipped; each clause is a
/// single line `<weight> <lit>* 0`.
pub fn parse_wcnf(reader: impl BufRead) -> Result<ParsedWcnf, ParseError> {
    let mut header: Option<(u32, usize, u64)> = None;
    let mut clauses: Vec<Clause> = Vec::new();
    let mut warnings = Vec::new();

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| ParseError::Io(e.to_string()))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('c') {
            continue;
        }
        if trimmed.starts_with('p') {
            if header.is_some() {
                return Err(ParseError::DuplicateHeader { line: line_no });
            }
            let tokens: Vec<&str> = trimmed.split_whitespace().collect();
            let invalid = || ParseError::InvalidHeader { line: line_no, text: trimmed.to_string() };
            if tokens.len() != 5 || tokens[0] != "p" || tokens[1] != "wcnf" {
                return Err(invalid());
            }
            let num_vars: u32 = tokens[2].parse().map_err(|_| invalid())?;
            let num_clauses: usize = tokens[3].parse().map_err(|_| invalid())?;
            let top: u64 = tokens[4].parse().map_err(|_| invalid())?;
            if top == 0 {
                return Err(invalid());
            }
            header = Some((num_vars, num_clauses, top));
            continue;
        }

        let (num_vars, _, top) = header.ok_or(ParseError::ClauseBeforeHeader { line: line_no })?;
        let mut tokens = trimmed.split_whitespace();
        let weight_tok = tokens.next().expect("non-empty line has a token");
        let weight: u64 = weight_tok.parse().map_err(|_| ParseError::MalformedToken {
            line: line_no,
            token: weight_tok.to_string(),
        })?;
        let kind = if weight == top {
            ClauseKind::Hard
        } else if weight == 1 {
            ClauseKind::Soft
        } else {
            return Err(ParseError::UnsupportedWeight { line: line_no, weight, top });
        };

        let mut lits = Vec::new();
        let mut terminated = false;
        for tok in tokens {
            if terminated {
                return Err(ParseError::TrailingTokens { line: line_no });
            }
            let value: i64 = tok.parse().map_err(|_| ParseError::MalformedToken {
                line: line_no,
                token: tok.to_string(),
            })?;
            if value == 0 {
                terminated = true;
                continue;
            }
            if value.unsigned_abs() > num_vars as u64 {
                return Err(ParseError::LitOutOfRange { line: line_no, lit: value, num_vars });
            }
            lits.push(Lit::new(value as i32));
        }
        if !terminated {
            return Err(ParseError::TruncatedClause { line: line_no });
        }
        let id = clauses.len();
        clauses.push(Clause { id, lits, kind });
    }

    let (num_vars, declared_clauses, top) = header.ok_or(ParseError::MissingHeader)?;
    if clauses.len() != declared_clauses {
        warnings.push(format!(
            "header declares {} clauses but {} were parsed",
            declared_clauses,
            clauses.len()
        ));
    }
    let max_var = clauses.iter().flat_map(|c| c.lits.iter()).map(|l| l.var()).max().unwrap_or(0);
    if max_var < num_vars && !clauses.is_empty() {
        warnings.push(format!(
            "header declares {} variables but only variables up to {} occur",
            num_vars, max_var
        ));
    }

    Ok(ParsedWcnf { formula: WcnfFormula { num_vars, top, clauses }, warnings })
}

/// Parses a WCNF from an in-memory string. Convenience for tests and examples.
pub fn parse_wcnf_str(text: &str) -> Result<ParsedWcnf, ParseError> {
    parse_wcnf(text.as_bytes())
}

/// Counters reported by [`normalize`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct NormalizeStats {
    pub duplicate_lits_removed: usize,
    pub hard_tautologies_dropped: usize,
    /// Tautological soft clauses are satisfied by every assignment, so
    /// dropping them does not change the optimum.
    pub soft_tautologies_dropped: usize,
}

/// Removes duplicate literals within each clause and drops tautological
/// clauses. Clause ids are reassigned densely, preserving relative order.
pub fn normalize(formula: &WcnfFormula) -> (WcnfFormula, NormalizeStats) {
    let mut stats = NormalizeStats::default();
    let mut clauses = Vec::with_capacity(formula.clauses.len());
    for clause in &formula.clauses {
        let mut lits: Vec<Lit> = Vec::with_capacity(clause.lits.len());
        for &lit in &clause.lits {
            if !lits.contains(&lit) {
                lits.push(lit);
            }
        }
        stats.duplicate_lits_removed += clause.lits.len() - lits.len();
        let taut = lits.iter().enumerate().any(|(i, &a)| lits[i + 1..].contains(&!a));
        if taut {
            match clause.kind {
                ClauseKind::Hard => stats.hard_tautologies_dropped += 1,
                ClauseKind::Soft => stats.soft_tautologies_dropped += 1,
            }
            continue;
        }
        let id = clauses.len();
        clauses.push(Clause { id, lits, kind: clause.kind });
    }
    (
        WcnfFormula { num_vars: formula.num_vars, top: formula.top, clauses },
        stats,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// The running example used throughout the crate: three hard clauses
    /// over x1..x3 plus soft units (-x1) and (-x3). Optimum cost 1.
    pub(crate) const PAPER_EXAMPLE: &str = "\
c example instance
p wcnf 3 5 10
10 1 2 0
10 -2 3 0
10 -1 -3 0
1 -1 0
1 -3 0
";

    fn lits(values: &[i32]) -> Vec<Lit> {
        values.iter().map(|&v| Lit::new(v)).collect()
    }

    #[test]
    fn parses_example_instance() {
        let parsed = parse_wcnf_str(PAPER_EXAMPLE).unwrap();
        let f = parsed.formula;
        assert_eq!(f.num_vars(), 3);
        assert_eq!(f.top(), 10);
        assert_eq!(f.num_hard(), 3);
        assert_eq!(f.num_soft(), 2);
        let hard: Vec<_> = f.hard().map(|c| c.lits.clone()).collect();
        assert_eq!(hard, vec![lits(&[1, 2]), lits(&[-2, 3]), lits(&[-1, -3])]);
        let soft: Vec<_> = f.soft().map(|c| c.lits.clone()).collect();
        assert_eq!(soft, vec![lits(&[-1]), lits(&[-3])]);
        assert!(parsed.warnings.is_empty());
    }

    #[test]
    fn empty_soft_set_is_pure_sat() {
        let parsed = parse_wcnf_str("p wcnf 2 2 5\n5 1 2 0\n5 -1 0\n").unwrap();
        assert_eq!(parsed.formula.num_soft(), 0);
        assert_eq!(parsed.formula.num_hard(), 2);
    }

    #[test]
    fn rejects_unsupported_weight() {
        let err = parse_wcnf_str("p wcnf 1 1 10\n2 1 0\n").unwrap_err();
        assert_eq!(err, ParseError::UnsupportedWeight { line: 2, weight: 2, top: 10 });
    }

    #[test]
    fn rejects_truncated_clause() {
        let err = parse_wcnf_str("p wcnf 2 1 10\n10 1 2\n").unwrap_err();
        assert_eq!(err, ParseError::TruncatedClause { line: 2 });
    }

    #[test]
    fn rejects_out_of_range_literal() {
        let err = parse_wcnf_str("p wcnf 2 1 10\n10 3 0\n").unwrap_err();
        assert_eq!(err, ParseError::LitOutOfRange { line: 2, lit: 3, num_vars: 2 });
    }

    #[test]
    fn rejects_duplicate_header() {
        let err = parse_wcnf_str("p wcnf 1 0 2\np wcnf 1 0 2\n").unwrap_err();
        assert_eq!(err, ParseError::DuplicateHeader { line: 2 });
    }

    #[test]
    fn missing_header_is_an_error() {
        assert_eq!(parse_wcnf_str("c nothing\n").unwrap_err(), ParseError::MissingHeader);
        assert_eq!(
            parse_wcnf_str("10 1 0\n").unwrap_err(),
            ParseError::ClauseBeforeHeader { line: 1 }
        );
    }

    #[test]
    fn count_mismatch_warns_but_parses() {
        let parsed = parse_wcnf_str("p wcnf 2 5 10\n10 1 0\n1 -2 0\n").unwrap();
        assert_eq!(parsed.formula.num_clauses(), 2);
        assert!(parsed.warnings.iter().any(|w| w.contains("declares 5 clauses")));
    }

    #[test]
    fn empty_clause_is_representable() {
        let parsed = parse_wcnf_str("p wcnf 1 2 10\n10 0\n1 0\n").unwrap();
        let f = parsed.formula;
        assert!(f.clause(0).is_empty());
        assert_eq!(f.clause(0).kind, ClauseKind::Hard);
        assert!(f.clause(1).is_empty());
        // A hard empty clause falsifies every assignment.
        assert_eq!(f.evaluate(&Assignment::new(vec![true])), None);
    }

    #[test]
    fn normalize_removes_duplicates() {
        let f = WcnfFormula::from_clauses(2, vec![lits(&[1, 1, 2])], vec![]);
        let (n, stats) = normalize(&f);
        assert_eq!(n.clause(0).lits, lits(&[1, 2]));
        assert_eq!(stats.duplicate_lits_removed, 1);
    }

    #[test]
    fn normalize_drops_soft_tautology() {
        let f = WcnfFormula::from_clauses(2, vec![lits(&[1, 2])], vec![lits(&[1, -1])]);
        let (n, stats) = normalize(&f);
        assert_eq!(n.num_soft(), 0);
        assert_eq!(stats.soft_tautologies_dropped, 1);
        // ids stay dense after the drop
        assert_eq!(n.clause(0).id, 0);
    }

    #[test]
    fn normalize_is_a_fixed_point() {
        let parsed = parse_wcnf_str(PAPER_EXAMPLE).unwrap();
        let (once, _) = normalize(&parsed.formula);
        let (twice, stats) = normalize(&once);
        assert_eq!(once, twice);
        assert_eq!(stats, NormalizeStats::default());
    }

    #[test]
    fn evaluate_counts_falsified_softs() {
        let parsed = parse_wcnf_str(PAPER_EXAMPLE).unwrap();
        let f = parsed.formula;
        // x1=0, x2=1, x3=1 satisfies the hard clauses and falsifies (-x3).
        let a = Assignment::new(vec![false, true, true]);
        assert_eq!(f.evaluate(&a), Some(1));
        // x1=1, x3=1 violates hard (-x1 -x3).
        let bad = Assignment::new(vec![true, true, true]);
        assert_eq!(f.evaluate(&bad), None);
    }

    fn arb_formula() -> impl Strategy<Value = WcnfFormula> {
        (2u32..=6, 0usize..8, 0usize..6).prop_flat_map(|(nv, nh, ns)| {
            let lit = (1u32..=nv, any::<bool>())
                .prop_map(|(v, pos)| if pos { Lit::pos(v) } else { Lit::neg(v) });
            let clause = proptest::collection::vec(lit, 1..4);
            (
                Just(nv),
                proptest::collection::vec(clause.clone(), nh),
                proptest::collection::vec(clause, ns),
            )
                .prop_map(|(nv, hard, soft)| WcnfFormula::from_clauses(nv, hard, soft))
        })
    }

    proptest! {
        #[test]
        fn round_trip_after_normalize(f in arb_formula()) {
            let (normalized, _) = normalize(&f);
            let text = normalized.to_wcnf_string();
            let reparsed = parse_wcnf_str(&text).unwrap().formula;
            prop_assert_eq!(normalized, reparsed);
        }

        #[test]
        fn parsed_clause_ids_partition(f in arb_formula()) {
            let hard_ids: Vec<_> = f.hard().map(|c| c.id).collect();
            let soft_ids: Vec<_> = f.soft().map(|c| c.id).collect();
            for id in &hard_ids {
                prop_assert!(!soft_ids.contains(id));
            }
            let mut all: Vec<_> = hard_ids.into_iter().chain(soft_ids).collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..f.num_clauses()).collect::<Vec<_>>());
        }
    }
}
