//! Hash-consed propositional formulas over `{⊥, variable, ∧, ∨, →}`.
//!
//! Every [`Formula`] is a handle to a node in a process-wide table. Two
//! formulas are structurally equal exactly when they are the same node, so
//! comparisons and hashes use the node id. Node ids are
//! allocated in construction order, which means children always carry
//! smaller ids than their parents.
//!
//! `¬A`, `⊤` and `A ↔ B` are not node kinds. They are built as
//! `A → ⊥`, `⊥ → ⊥` and `(A → B) ∧ (B → A)` respectively, and are folded
//! back only when printing.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, LazyLock, Mutex};

use thiserror::Error;

/// A canonical formula node.
#[derive(Clone)]
pub struct Formula(Arc<Node>);

struct Node {
    id: u32,
    kind: Kind,
}

/// The shape of a node. Children are canonical formulas themselves.
#[derive(Clone, Debug)]
pub enum Kind {
    Bottom,
    Var(Arc<str>),
    And(Formula, Formula),
    Or(Formula, Formula),
    Implies(Formula, Formula),
}

#[derive(Clone, PartialEq, Eq, Hash)]
enum Key {
    Bottom,
    Var(Arc<str>),
    And(u32, u32),
    Or(u32, u32),
    Implies(u32, u32),
}

#[derive(Default)]
struct Table {
    nodes: HashMap<Key, Formula>,
}

static TABLE: LazyLock<Mutex<Table>> = LazyLock::new(|| Mutex::new(Table::default()));

fn intern(key: Key, kind: impl FnOnce() -> Kind) -> Formula {
    let mut table = TABLE.lock().unwrap_or_else(|e| e.into_inner());
    if let Some(f) = table.nodes.get(&key) {
        return f.clone();
    }
    let id = u32::try_from(table.nodes.len()).expect("formula table overflow");
    let f = Formula(Arc::new(Node { id, kind: kind() }));
    table.nodes.insert(key, f.clone());
    f
}

/// Number of nodes ever created in the shared table.
pub fn table_size() -> usize {
    TABLE.lock().unwrap_or_else(|e| e.into_inner()).nodes.len()
}

impl Formula {
    pub fn bottom() -> Formula {
        intern(Key::Bottom, || Kind::Bottom)
    }

    pub fn var(name: &str) -> Formula {
        let name: Arc<str> = Arc::from(name);
        intern(Key::Var(name.clone()), || Kind::Var(name))
    }

    pub fn and(a: &Formula, b: &Formula) -> Formula {
        intern(Key::And(a.id(), b.id()), || Kind::And(a.clone(), b.clone()))
    }

    pub fn or(a: &Formula, b: &Formula) -> Formula {
        intern(Key::Or(a.id(), b.id()), || Kind::Or(a.clone(), b.clone()))
    }

    pub fn implies(a: &Formula, b: &Formula) -> Formula {
        intern(Key::Implies(a.id(), b.id()), || {
            Kind::Implies(a.clone(), b.clone())
        })
    }

    /// `¬a`, stored as `a → ⊥`.
    pub fn not(a: &Formula) -> Formula {
        Formula::implies(a, &Formula::bottom())
    }

    /// `⊤`, stored as `⊥ → ⊥`.
    pub fn top() -> Formula {
        let bot = Formula::bottom();
        Formula::implies(&bot, &bot)
    }

    /// `a ↔ b`, stored as `(a → b) ∧ (b → a)`.
    pub fn iff(a: &Formula, b: &Formula) -> Formula {
        Formula::and(&Formula::implies(a, b), &Formula::implies(b, a))
    }

    /// Right-nested conjunction `f₁ ∧ (f₂ ∧ (… ∧ fₙ))`; `⊤` when empty.
    pub fn and_all<'a, I>(items: I) -> Formula
    where
        I: IntoIterator<Item = &'a Formula>,
        I::IntoIter: DoubleEndedIterator,
    {
        let mut it = items.into_iter().rev();
        match it.next() {
            None => Formula::top(),
            Some(last) => it.fold(last.clone(), |acc, f| Formula::and(f, &acc)),
        }
    }

    /// Right-nested disjunction; `⊥` when empty.
    pub fn or_all<'a, I>(items: I) -> Formula
    where
        I: IntoIterator<Item = &'a Formula>,
        I::IntoIter: DoubleEndedIterator,
    {
        let mut it = items.into_iter().rev();
        match it.next() {
            None => Formula::bottom(),
            Some(last) => it.fold(last.clone(), |acc, f| Formula::or(f, &acc)),
        }
    }

    #[inline]
    pub fn id(&self) -> u32 {
        self.0.id
    }

    #[inline]
    pub fn kind(&self) -> &Kind {
        &self.0.kind
    }

    pub fn is_bottom(&self) -> bool {
        matches!(self.kind(), Kind::Bottom)
    }

    pub fn is_var(&self) -> bool {
        matches!(self.kind(), Kind::Var(_))
    }

    pub fn var_name(&self) -> Option<&str> {
        match self.kind() {
            Kind::Var(name) => Some(name),
            _ => None,
        }
    }

    /// If this is `a → ⊥`, returns `a`.
    pub fn negated(&self) -> Option<&Formula> {
        match self.kind() {
            Kind::Implies(a, b) if b.is_bottom() => Some(a),
            _ => None,
        }
    }

    pub fn is_top(&self) -> bool {
        self.negated().is_some_and(Formula::is_bottom)
    }

    /// If this is `(a → b) ∧ (b → a)`, returns `(a, b)`.
    pub fn as_iff(&self) -> Option<(&Formula, &Formula)> {
        if let Kind::And(l, r) = self.kind() {
            if let (Kind::Implies(a, b), Kind::Implies(c, d)) = (l.kind(), r.kind()) {
                if a == d && b == c {
                    return Some((a, b));
                }
            }
        }
        None
    }

    /// Immediate children, left to right.
    pub fn children(&self) -> impl Iterator<Item = &Formula> {
        let (l, r) = match self.kind() {
            Kind::And(a, b) | Kind::Or(a, b) | Kind::Implies(a, b) => (Some(a), Some(b)),
            _ => (None, None),
        };
        l.into_iter().chain(r)
    }

    /// Every distinct node reachable from `self`, children before parents.
    pub fn subformulas(&self) -> Vec<Formula> {
        let mut seen = std::collections::HashSet::new();
        let mut out = Vec::new();
        let mut stack = vec![(self.clone(), false)];
        while let Some((f, expanded)) = stack.pop() {
            if expanded {
                out.push(f);
                continue;
            }
            if !seen.insert(f.id()) {
                continue;
            }
            stack.push((f.clone(), true));
            let kids: Vec<Formula> = f.children().cloned().collect();
            for c in kids.into_iter().rev() {
                if !seen.contains(&c.id()) {
                    stack.push((c, false));
                }
            }
        }
        out
    }
}

impl PartialEq for Formula {
    fn eq(&self, other: &Self) -> bool {
        self.id() == other.id()
    }
}

impl Eq for Formula {}

impl std::hash::Hash for Formula {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.id().hash(state);
    }
}

impl PartialOrd for Formula {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Formula {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.id().cmp(&other.id())
    }
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", print(self))
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print(self))
    }
}

/// Simultaneous substitution of formulas for variable names.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Substitution {
    map: HashMap<Arc<str>, Formula>,
}

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, var: &str, image: Formula) -> Self {
        self.insert(var, image);
        self
    }

    pub fn insert(&mut self, var: &str, image: Formula) {
        self.map.insert(Arc::from(var), image);
    }

    pub fn get(&self, var: &str) -> Option<&Formula> {
        self.map.get(var)
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn domain(&self) -> impl Iterator<Item = &str> {
        self.map.keys().map(|k| &**k)
    }
}

impl FromIterator<(String, Formula)> for Substitution {
    fn from_iter<T: IntoIterator<Item = (String, Formula)>>(iter: T) -> Self {
        let mut s = Substitution::new();
        for (k, v) in iter {
            s.insert(&k, v);
        }
        s
    }
}

/// Applies `s` to every variable of `f` at once; images are not re-substituted.
pub fn substitute(f: &Formula, s: &Substitution) -> Formula {
    if s.is_empty() {
        return f.clone();
    }
    let mut memo: HashMap<u32, Formula> = HashMap::new();
    for node in f.subformulas() {
        let image = match node.kind() {
            Kind::Bottom => node.clone(),
            Kind::Var(name) => s.get(name).cloned().unwrap_or_else(|| node.clone()),
            Kind::And(a, b) => Formula::and(&memo[&a.id()], &memo[&b.id()]),
            Kind::Or(a, b) => Formula::or(&memo[&a.id()], &memo[&b.id()]),
            Kind::Implies(a, b) => Formula::implies(&memo[&a.id()], &memo[&b.id()]),
        };
        memo.insert(node.id(), image);
    }
    memo.remove(&f.id())
        .expect("root is a subformula of itself")
}

/// The set of variable names occurring in `f`.
pub fn variables(f: &Formula) -> BTreeSet<String> {
    f.subformulas()
        .iter()
        .filter_map(|g| g.var_name().map(str::to_owned))
        .collect()
}

/// Number of distinct DAG nodes.
pub fn dag_size(f: &Formula) -> usize {
    f.subformulas().len()
}

/// Number of nodes of the fully expanded tree, saturating at `u128::MAX`.
pub fn tree_size(f: &Formula) -> u128 {
    let mut memo: HashMap<u32, u128> = HashMap::new();
    for node in f.subformulas() {
        let size = node
            .children()
            .fold(1u128, |acc, c| acc.saturating_add(memo[&c.id()]));
        memo.insert(node.id(), size);
    }
    memo[&f.id()]
}

// ---------------------------------------------------------------------------
// Printing

const PREC_IMP: u8 = 1;
const PREC_OR: u8 = 2;
const PREC_AND: u8 = 3;
const PREC_PREFIX: u8 = 4;

/// Renders `f` in the ASCII grammar with the fewest parentheses that still
/// parse back to the same node.
pub fn print(f: &Formula) -> String {
    let mut out = String::new();
    write_formula(f, 0, &mut out);
    out
}

fn precedence(f: &Formula) -> u8 {
    match f.kind() {
        Kind::Bottom | Kind::Var(_) => PREC_PREFIX + 1,
        _ if f.is_top() => PREC_PREFIX + 1,
        _ if f.negated().is_some() => PREC_PREFIX,
        _ if f.as_iff().is_some() => PREC_IMP,
        Kind::And(..) => PREC_AND,
        Kind::Or(..) => PREC_OR,
        Kind::Implies(..) => PREC_IMP,
    }
}

fn write_formula(f: &Formula, min_prec: u8, out: &mut String) {
    let prec = precedence(f);
    let paren = prec < min_prec;
    if paren {
        out.push('(');
    }
    match f.kind() {
        Kind::Bottom => out.push_str("false"),
        Kind::Var(name) => out.push_str(name),
        _ if f.is_top() => out.push_str("true"),
        _ if f.negated().is_some() => {
            out.push('~');
            write_formula(f.negated().unwrap(), PREC_PREFIX, out);
        }
        _ if f.as_iff().is_some() => {
            let (a, b) = f.as_iff().unwrap();
            write_formula(a, PREC_IMP + 1, out);
            out.push_str(" <-> ");
            write_formula(b, PREC_IMP, out);
        }
        Kind::And(a, b) => {
            write_formula(a, PREC_AND, out);
            out.push_str(" & ");
            write_formula(b, PREC_AND + 1, out);
        }
        Kind::Or(a, b) => {
            write_formula(a, PREC_OR, out);
            out.push_str(" | ");
            write_formula(b, PREC_OR + 1, out);
        }
        Kind::Implies(a, b) => {
            write_formula(a, PREC_IMP + 1, out);
            out.push_str(" -> ");
            write_formula(b, PREC_IMP, out);
        }
    }
    if paren {
        out.push(')');
    }
}

// ---------------------------------------------------------------------------
// Parsing

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Ident(String),
    False,
    True,
    Not,
    And,
    Or,
    Implies,
    Iff,
    LParen,
    RParen,
    End,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Ident(s) => write!(f, "identifier `{s}`"),
            Token::False => f.write_str("`false`"),
            Token::True => f.write_str("`true`"),
            Token::Not => f.write_str("`~`"),
            Token::And => f.write_str("`&`"),
            Token::Or => f.write_str("`|`"),
            Token::Implies => f.write_str("`->`"),
            Token::Iff => f.write_str("`<->`"),
            Token::LParen => f.write_str("`(`"),
            Token::RParen => f.write_str("`)`"),
            Token::End => f.write_str("end of input"),
        }
    }
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer {
            chars: text.chars().peekable(),
            line: 1,
            column: 1,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn error(&self, line: usize, column: usize, message: impl Into<String>) -> ParseError {
        ParseError {
            line,
            column,
            message: message.into(),
        }
    }

    fn tokens(mut self) -> Result<Vec<(Token, usize, usize)>, ParseError> {
        let mut out = Vec::new();
        loop {
            while self.chars.peek().is_some_and(|c| c.is_whitespace()) {
                self.bump();
            }
            let (line, column) = (self.line, self.column);
            let Some(c) = self.bump() else {
                out.push((Token::End, line, column));
                return Ok(out);
            };
            let tok = match c {
                '~' => Token::Not,
                '&' => Token::And,
                '|' => Token::Or,
                '(' => Token::LParen,
                ')' => Token::RParen,
                '-' => {
                    if self.bump() != Some('>') {
                        return Err(self.error(line, column, "expected `->`"));
                    }
                    Token::Implies
                }
                '<' => {
                    if self.bump() != Some('-') || self.bump() != Some('>') {
                        return Err(self.error(line, column, "expected `<->`"));
                    }
                    Token::Iff
                }
                'a'..='z' => {
                    let mut name = String::from(c);
                    while let Some(&n) = self.chars.peek() {
                        if n.is_ascii_lowercase() || n.is_ascii_digit() || n == '_' {
                            name.push(n);
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    match name.as_str() {
                        "false" => Token::False,
                        "true" => Token::True,
                        _ => Token::Ident(name),
                    }
                }
                other => {
                    return Err(self.error(line, column, format!("unexpected character `{other}`")))
                }
            };
            out.push((tok, line, column));
        }
    }
}

struct Parser {
    tokens: Vec<(Token, usize, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos].0
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.pos].0.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self) -> ParseError {
        let (tok, line, column) = &self.tokens[self.pos];
        ParseError {
            line: *line,
            column: *column,
            message: format!("unexpected {tok}"),
        }
    }

    // imp := or (("->" | "<->") imp)?
    fn implication(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.disjunction()?;
        match self.peek() {
            Token::Implies => {
                self.next();
                let rhs = self.implication()?;
                Ok(Formula::implies(&lhs, &rhs))
            }
            Token::Iff => {
                self.next();
                let rhs = self.implication()?;
                Ok(Formula::iff(&lhs, &rhs))
            }
            _ => Ok(lhs),
        }
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.conjunction()?;
        while *self.peek() == Token::Or {
            self.next();
            let rhs = self.conjunction()?;
            acc = Formula::or(&acc, &rhs);
        }
        Ok(acc)
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.prefix()?;
        while *self.peek() == Token::And {
            self.next();
            let rhs = self.prefix()?;
            acc = Formula::and(&acc, &rhs);
        }
        Ok(acc)
    }

    fn prefix(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Token::Not => {
                self.next();
                Ok(Formula::not(&self.prefix()?))
            }
            Token::Ident(name) => {
                self.next();
                Ok(Formula::var(&name))
            }
            Token::False => {
                self.next();
                Ok(Formula::bottom())
            }
            Token::True => {
                self.next();
                Ok(Formula::top())
            }
            Token::LParen => {
                self.next();
                let inner = self.implication()?;
                if *self.peek() != Token::RParen {
                    return Err(self.unexpected());
                }
                self.next();
                Ok(inner)
            }
            _ => Err(self.unexpected()),
        }
    }
}

/// Parses the ASCII formula grammar.
pub fn parse(text: &str) -> Result<Formula, ParseError> {
    let tokens = Lexer::new(text).tokens()?;
    let mut parser = Parser { tokens, pos: 0 };
    let f = parser.implication()?;
    if *parser.peek() != Token::End {
        return Err(parser.unexpected());
    }
    Ok(f)
}

impl std::str::FromStr for Formula {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}
