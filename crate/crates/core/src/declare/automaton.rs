//! Regular expressions over the projected alphabet `{A, B, O}` compiled to
//! minimal complete DFAs.
//!
//! The dialect covers what the Declare template expressions need: the
//! literals `A`, `B` and `O`, the wildcard `.`, classes `[AB]` / `[^A]`,
//! grouping, alternation and the postfix operators `*`, `+`, `?` and `{n}`.
//! Matching is always against the whole input.

use std::collections::HashMap;

use super::TemplateError;

/// One symbol of a projected window: the first template argument, the second
/// template argument, or any other activity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Symbol {
    A = 0,
    B = 1,
    O = 2,
}

impl Symbol {
    pub const ALL: [Symbol; 3] = [Symbol::A, Symbol::B, Symbol::O];

    fn bit(self) -> u8 {
        1 << self as u8
    }

    pub fn from_char(c: char) -> Option<Symbol> {
        match c {
            'a' | 'A' => Some(Symbol::A),
            'b' | 'B' => Some(Symbol::B),
            'o' | 'O' => Some(Symbol::O),
            _ => None,
        }
    }
}

const ANY: u8 = 0b111;

#[derive(Debug, Clone)]
enum Node {
    Empty,
    Class(u8),
    Concat(Vec<Node>),
    Alt(Vec<Node>),
    Star(Box<Node>),
    Plus(Box<Node>),
    Opt(Box<Node>),
    Repeat(Box<Node>, usize),
}

struct Parser<'a> {
    src: &'a str,
    chars: Vec<char>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser {
            src,
            chars: src.chars().filter(|c| !c.is_whitespace()).collect(),
            pos: 0,
        }
    }

    fn error(&self, what: &str) -> TemplateError {
        TemplateError::RegexSyntax(format!("{what} at offset {} in `{}`", self.pos, self.src))
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek();
        self.pos += 1;
        c
    }

    fn parse(mut self) -> Result<Node, TemplateError> {
        let node = self.alternation()?;
        if self.pos != self.chars.len() {
            return Err(self.error("unexpected character"));
        }
        Ok(node)
    }

    fn alternation(&mut self) -> Result<Node, TemplateError> {
        let mut branches = vec![self.concatenation()?];
        while self.peek() == Some('|') {
            self.bump();
            branches.push(self.concatenation()?);
        }
        Ok(if branches.len() == 1 {
            branches.pop().unwrap()
        } else {
            Node::Alt(branches)
        })
    }

    fn concatenation(&mut self) -> Result<Node, TemplateError> {
        let mut items = Vec::new();
        while let Some(c) = self.peek() {
            if c == '|' || c == ')' {
                break;
            }
            items.push(self.repetition()?);
        }
        Ok(match items.len() {
            0 => Node::Empty,
            1 => items.pop().unwrap(),
            _ => Node::Concat(items),
        })
    }

    fn repetition(&mut self) -> Result<Node, TemplateError> {
        let mut node = self.atom()?;
        loop {
            node = match self.peek() {
                Some('*') => Node::Star(Box::new(node)),
                Some('+') => Node::Plus(Box::new(node)),
                Some('?') => Node::Opt(Box::new(node)),
                Some('{') => {
                    self.bump();
                    let mut digits = String::new();
                    while let Some(c) = self.peek().filter(char::is_ascii_digit) {
                        digits.push(c);
                        self.bump();
                    }
                    if self.peek() != Some('}') || digits.is_empty() {
                        return Err(self.error("malformed repetition count"));
                    }
                    let n = digits.parse().map_err(|_| self.error("repetition count"))?;
                    Node::Repeat(Box::new(node), n)
                }
                _ => return Ok(node),
            };
            self.bump();
        }
    }

    fn atom(&mut self) -> Result<Node, TemplateError> {
        match self.bump() {
            Some('.') => Ok(Node::Class(ANY)),
            Some('(') => {
                let inner = self.alternation()?;
                if self.bump() != Some(')') {
                    return Err(self.error("unclosed group"));
                }
                Ok(inner)
            }
            Some('[') => {
                let negated = self.peek() == Some('^');
                if negated {
                    self.bump();
                }
                let mut mask = 0u8;
                loop {
                    match self.bump() {
                        Some(']') => break,
                        Some(c) => {
                            let s = Symbol::from_char(c).ok_or_else(|| self.error("unknown class member"))?;
                            mask |= s.bit();
                        }
                        None => return Err(self.error("unclosed class")),
                    }
                }
                Ok(Node::Class(if negated { !mask & ANY } else { mask }))
            }
            Some(c) => match Symbol::from_char(c) {
                Some(s) if c.is_ascii_uppercase() => Ok(Node::Class(s.bit())),
                _ => Err(self.error("unexpected character")),
            },
            None => Err(self.error("unexpected end of pattern")),
        }
    }
}

/// Thompson NFA with epsilon moves.
#[derive(Default)]
struct Nfa {
    eps: Vec<Vec<usize>>,
    edges: Vec<Vec<(u8, usize)>>,
}

impl Nfa {
    fn state(&mut self) -> usize {
        self.eps.push(Vec::new());
        self.edges.push(Vec::new());
        self.eps.len() - 1
    }

    /// Returns the (entry, exit) states of the fragment for `node`.
    fn build(&mut self, node: &Node) -> (usize, usize) {
        match node {
            Node::Empty => {
                let s = self.state();
                (s, s)
            }
            Node::Class(mask) => {
                let (s, e) = (self.state(), self.state());
                self.edges[s].push((*mask, e));
                (s, e)
            }
            Node::Concat(items) => {
                let (start, mut end) = self.build(&items[0]);
                for item in &items[1..] {
                    let (s, e) = self.build(item);
                    self.eps[end].push(s);
                    end = e;
                }
                (start, end)
            }
            Node::Alt(branches) => {
                let (s, e) = (self.state(), self.state());
                for b in branches {
                    let (bs, be) = self.build(b);
                    self.eps[s].push(bs);
                    self.eps[be].push(e);
                }
                (s, e)
            }
            Node::Star(inner) => {
                let (s, e) = (self.state(), self.state());
                let (is, ie) = self.build(inner);
                self.eps[s].extend([is, e]);
                self.eps[ie].extend([is, e]);
                (s, e)
            }
            Node::Plus(inner) => {
                let (is, ie) = self.build(inner);
                let e = self.state();
                self.eps[ie].extend([is, e]);
                (is, e)
            }
            Node::Opt(inner) => {
                let (s, e) = (self.state(), self.state());
                let (is, ie) = self.build(inner);
                self.eps[s].extend([is, e]);
                self.eps[ie].push(e);
                (s, e)
            }
            Node::Repeat(inner, n) => {
                let s = self.state();
                let mut end = s;
                for _ in 0..*n {
                    let (is, ie) = self.build(inner);
                    self.eps[end].push(is);
                    end = ie;
                }
                (s, end)
            }
        }
    }

    fn closure(&self, seeds: impl IntoIterator<Item = usize>) -> Vec<usize> {
        let mut seen = vec![false; self.eps.len()];
        let mut stack: Vec<usize> = seeds.into_iter().collect();
        let mut out = Vec::new();
        while let Some(s) = stack.pop() {
            if std::mem::replace(&mut seen[s], true) {
                continue;
            }
            out.push(s);
            stack.extend(self.eps[s].iter().copied());
        }
        out.sort_unstable();
        out
    }
}

/// A complete, minimal DFA over `{A, B, O}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dfa {
    next: Vec<[u16; 3]>,
    accepting: Vec<bool>,
}

impl Dfa {
    pub fn from_regex(pattern: &str) -> Result<Dfa, TemplateError> {
        let ast = Parser::new(pattern).parse()?;
        let mut nfa = Nfa::default();
        let (start, end) = nfa.build(&ast);
        Ok(determinize(&nfa, start, end).minimize())
    }

    pub fn state_count(&self) -> usize {
        self.next.len()
    }

    #[inline]
    pub fn step(&self, state: usize, sym: Symbol) -> usize {
        self.next[state][sym as usize] as usize
    }

    #[inline]
    pub fn is_accepting(&self, state: usize) -> bool {
        self.accepting[state]
    }

    pub fn accepts(&self, input: impl IntoIterator<Item = Symbol>) -> bool {
        let end = input.into_iter().fold(0, |s, sym| self.step(s, sym));
        self.accepting[end]
    }

    /// Convenience for tests: `"abo"` style strings.
    pub fn accepts_str(&self, input: &str) -> bool {
        self.accepts(input.chars().map(|c| Symbol::from_char(c).expect("symbol must be a, b or o")))
    }

    /// Runs the automaton on `window` projected onto `first` / `second`.
    #[inline]
    pub fn accepts_projected(&self, window: &[usize], first: usize, second: Option<usize>) -> bool {
        let mut state = 0usize;
        for &e in window {
            let sym = if e == first {
                Symbol::A
            } else if Some(e) == second {
                Symbol::B
            } else {
                Symbol::O
            };
            state = self.next[state][sym as usize] as usize;
        }
        self.accepting[state]
    }

    fn minimize(&self) -> Dfa {
        let n = self.next.len();
        let mut class: Vec<usize> = self.accepting.iter().map(|&a| a as usize).collect();
        let mut classes = 0;
        loop {
            let mut ids: HashMap<(usize, [usize; 3]), usize> = HashMap::new();
            let refined: Vec<usize> = (0..n)
                .map(|s| {
                    let sig = (class[s], self.next[s].map(|t| class[t as usize]));
                    let fresh = ids.len();
                    *ids.entry(sig).or_insert(fresh)
                })
                .collect();
            let count = ids.len();
            class = refined;
            if count == classes {
                break;
            }
            classes = count;
        }
        // renumber by BFS from the start state so state 0 is initial
        let mut order = vec![usize::MAX; classes];
        let mut queue = std::collections::VecDeque::from([0usize]);
        let mut reps = Vec::new();
        order[class[0]] = 0;
        reps.push(0);
        while let Some(s) = queue.pop_front() {
            for t in self.next[s] {
                let c = class[t as usize];
                if order[c] == usize::MAX {
                    order[c] = reps.len();
                    reps.push(t as usize);
                    queue.push_back(t as usize);
                }
            }
        }
        Dfa {
            next: reps
                .iter()
                .map(|&r| self.next[r].map(|t| order[class[t as usize]] as u16))
                .collect(),
            accepting: reps.iter().map(|&r| self.accepting[r]).collect(),
        }
    }
}

fn determinize(nfa: &Nfa, start: usize, accept: usize) -> Dfa {
    let mut ids: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut sets: Vec<Vec<usize>> = Vec::new();
    let mut next: Vec<[u16; 3]> = Vec::new();

    let initial = nfa.closure([start]);
    ids.insert(initial.clone(), 0);
    sets.push(initial);
    let mut i = 0;
    while i < sets.len() {
        let mut row = [0u16; 3];
        for sym in Symbol::ALL {
            let targets = sets[i].iter().flat_map(|&s| {
                nfa.edges[s]
                    .iter()
                    .filter(move |(mask, _)| mask & sym.bit() != 0)
                    .map(|&(_, t)| t)
            });
            let set = nfa.closure(targets);
            let id = match ids.get(&set) {
                Some(&id) => id,
                None => {
                    let id = sets.len();
                    ids.insert(set.clone(), id);
                    sets.push(set);
                    id
                }
            };
            row[sym as usize] = id as u16;
        }
        next.push(row);
        i += 1;
    }
    let accepting = sets.iter().map(|s| s.binary_search(&accept).is_ok()).collect();
    Dfa { next, accepting }
}
