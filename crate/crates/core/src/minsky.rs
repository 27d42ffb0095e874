//! Two-counter Minsky machines with bounded exploration of their step
//! graph, quotiented by mutual reachability.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

use fixedbitset::FixedBitSet;
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use thiserror::Error;

pub type State = u32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Instruction {
    Inc1(State),
    Inc2(State),
    /// Decrement counter 1 and go to `t`, or go to `u` when it is zero.
    Dec1(State, State),
    Dec2(State, State),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Configuration {
    pub s: State,
    pub m: u32,
    pub n: u32,
}

impl Configuration {
    pub fn new(s: State, m: u32, n: u32) -> Self {
        Configuration { s, m, n }
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.s, self.m, self.n)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MachineError {
    #[error("line {line}: state {state} already has an instruction")]
    DuplicateState { line: usize, state: State },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
}

/// A deterministic machine: at most one instruction per source state.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MinskyMachine {
    program: BTreeMap<State, Instruction>,
}

impl MinskyMachine {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_instructions(
        items: impl IntoIterator<Item = (State, Instruction)>,
    ) -> Result<Self, MachineError> {
        let mut m = MinskyMachine::new();
        for (i, (s, ins)) in items.into_iter().enumerate() {
            m.add(s, ins).map_err(|_| MachineError::DuplicateState {
                line: i + 1,
                state: s,
            })?;
        }
        Ok(m)
    }

    fn add(&mut self, s: State, ins: Instruction) -> Result<(), ()> {
        if self.program.contains_key(&s) {
            return Err(());
        }
        self.program.insert(s, ins);
        Ok(())
    }

    pub fn instruction(&self, s: State) -> Option<Instruction> {
        self.program.get(&s).copied()
    }

    /// Instructions by ascending source state.
    pub fn instructions(&self) -> impl Iterator<Item = (State, Instruction)> + '_ {
        self.program.iter().map(|(&s, &i)| (s, i))
    }

    pub fn len(&self) -> usize {
        self.program.len()
    }

    pub fn is_empty(&self) -> bool {
        self.program.is_empty()
    }

    /// One step, or `None` when `c.s` has no instruction (the machine halts).
    pub fn step(&self, c: Configuration) -> Option<Configuration> {
        let Configuration { s: _, m, n } = c;
        Some(match self.instruction(c.s)? {
            Instruction::Inc1(t) => Configuration::new(t, m + 1, n),
            Instruction::Inc2(t) => Configuration::new(t, m, n + 1),
            Instruction::Dec1(t, _) if m > 0 => Configuration::new(t, m - 1, n),
            Instruction::Dec1(_, u) => Configuration::new(u, m, n),
            Instruction::Dec2(t, _) if n > 0 => Configuration::new(t, m, n - 1),
            Instruction::Dec2(_, u) => Configuration::new(u, m, n),
        })
    }

    /// The trace from `c`, at most `max_steps` steps long, stopping at a
    /// halt.
    pub fn run(&self, c: Configuration, max_steps: usize) -> Vec<Configuration> {
        let mut trace = vec![c];
        let mut cur = c;
        for _ in 0..max_steps {
            match self.step(cur) {
                Some(next) => {
                    trace.push(next);
                    cur = next;
                }
                None => break,
            }
        }
        trace
    }
}

impl fmt::Display for MinskyMachine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (s, ins) in self.instructions() {
            match ins {
                Instruction::Inc1(t) => writeln!(f, "{s} INC1 {t}")?,
                Instruction::Inc2(t) => writeln!(f, "{s} INC2 {t}")?,
                Instruction::Dec1(t, u) => writeln!(f, "{s} DEC1 {t} {u}")?,
                Instruction::Dec2(t, u) => writeln!(f, "{s} DEC2 {t} {u}")?,
            }
        }
        Ok(())
    }
}

pub fn parse_machine(text: &str) -> Result<MinskyMachine, MachineError> {
    let mut machine = MinskyMachine::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        let words: Vec<&str> = content.split_whitespace().collect();
        if words.is_empty() {
            continue;
        }
        let malformed = |message: String| MachineError::Malformed { line, message };
        let num = |w: &str| {
            w.parse::<State>()
                .map_err(|_| malformed(format!("expected a state number, got `{w}`")))
        };
        let s = num(words[0])?;
        let ins = match (words.get(1).copied(), words.len()) {
            (Some("INC1"), 3) => Instruction::Inc1(num(words[2])?),
            (Some("INC2"), 3) => Instruction::Inc2(num(words[2])?),
            (Some("DEC1"), 4) => Instruction::Dec1(num(words[2])?, num(words[3])?),
            (Some("DEC2"), 4) => Instruction::Dec2(num(words[2])?, num(words[3])?),
            _ => return Err(malformed(format!("cannot read `{}`", content.trim()))),
        };
        machine
            .add(s, ins)
            .map_err(|_| MachineError::DuplicateState { line, state: s })?;
    }
    Ok(machine)
}

impl std::str::FromStr for MinskyMachine {
    type Err = MachineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_machine(s)
    }
}

/// Bounded exploration of the step relation from a root.
#[derive(Clone, Debug)]
pub struct ConfigGraph {
    /// Vertex 0 is the root; vertices are in BFS order.
    pub vertices: Vec<Configuration>,
    pub edges: Vec<(usize, usize)>,
    /// Some vertex at the step bound still had an unexplored successor.
    pub step_bound_hit: bool,
    /// Some successor was dropped because a counter exceeded the bound.
    pub counter_bound_hit: bool,
}

impl ConfigGraph {
    pub fn root(&self) -> Configuration {
        self.vertices[0]
    }

    pub fn is_truncated(&self) -> bool {
        self.step_bound_hit || self.counter_bound_hit
    }

    pub fn index_of(&self, c: Configuration) -> Option<usize> {
        self.vertices.iter().position(|&v| v == c)
    }

    pub fn contains(&self, c: Configuration) -> bool {
        self.index_of(c).is_some()
    }

    /// Whether `to` is reachable from `from` along explored edges.
    pub fn reaches(&self, from: Configuration, to: Configuration) -> bool {
        let (Some(a), Some(b)) = (self.index_of(from), self.index_of(to)) else {
            return false;
        };
        self.reachable_from(a).contains(b)
    }

    fn reachable_from(&self, start: usize) -> FixedBitSet {
        let mut adj = vec![Vec::new(); self.vertices.len()];
        for &(a, b) in &self.edges {
            adj[a].push(b);
        }
        let mut seen = FixedBitSet::with_capacity(self.vertices.len());
        seen.insert(start);
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if !seen.put(w) {
                    stack.push(w);
                }
            }
        }
        seen
    }
}

/// Breadth-first closure of `step` from `root`. Vertices at distance
/// `step_bound` are not expanded, except that an edge back into the
/// explored set is still recorded. Successors with a counter above
/// `counter_bound` are dropped.
pub fn reach_graph(
    machine: &MinskyMachine,
    root: Configuration,
    step_bound: usize,
    counter_bound: u32,
) -> ConfigGraph {
    let mut g = ConfigGraph {
        vertices: vec![root],
        edges: Vec::new(),
        step_bound_hit: false,
        counter_bound_hit: false,
    };
    let mut index = HashMap::from([(root, 0usize)]);
    let mut depth = vec![0usize];
    let mut queue = VecDeque::from([0usize]);
    while let Some(v) = queue.pop_front() {
        let Some(next) = machine.step(g.vertices[v]) else {
            continue;
        };
        if let Some(&w) = index.get(&next) {
            g.edges.push((v, w));
            continue;
        }
        if depth[v] >= step_bound {
            g.step_bound_hit = true;
            continue;
        }
        if next.m > counter_bound || next.n > counter_bound {
            g.counter_bound_hit = true;
            continue;
        }
        let w = g.vertices.len();
        g.vertices.push(next);
        depth.push(depth[v] + 1);
        index.insert(next, w);
        g.edges.push((v, w));
        queue.push_back(w);
    }
    g.edges.sort_unstable();
    g.edges.dedup();
    g
}

/// Mutual-reachability classes of an explored graph.
#[derive(Clone, Debug)]
pub struct ClassQuotient {
    /// Members of each class, sorted; the first member is the
    /// representative. Classes are sorted by representative.
    pub classes: Vec<Vec<Configuration>>,
    /// `reach[a]` contains `b` iff class `b` is reachable from class `a`
    /// (reflexive).
    pub reach: Vec<FixedBitSet>,
    class_of: HashMap<Configuration, usize>,
}

impl ClassQuotient {
    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn representative(&self, class: usize) -> Configuration {
        self.classes[class][0]
    }

    pub fn class_of(&self, c: Configuration) -> Option<usize> {
        self.class_of.get(&c).copied()
    }

    /// `[a] ⟹ [b]` in the explored graph.
    pub fn leads_to(&self, a: usize, b: usize) -> bool {
        self.reach[a].contains(b)
    }
}

pub fn classes(g: &ConfigGraph) -> ClassQuotient {
    let mut graph: DiGraph<(), ()> = DiGraph::new();
    let nodes: Vec<_> = g.vertices.iter().map(|_| graph.add_node(())).collect();
    for &(a, b) in &g.edges {
        graph.add_edge(nodes[a], nodes[b], ());
    }
    let mut classes: Vec<Vec<Configuration>> = tarjan_scc(&graph)
        .into_iter()
        .map(|scc| {
            let mut members: Vec<Configuration> =
                scc.iter().map(|ix| g.vertices[ix.index()]).collect();
            members.sort();
            members
        })
        .collect();
    classes.sort();
    let class_of: HashMap<Configuration, usize> = classes
        .iter()
        .enumerate()
        .flat_map(|(i, c)| c.iter().map(move |&cfg| (cfg, i)))
        .collect();
    let reach = classes
        .iter()
        .map(|members| {
            let start = g.index_of(members[0]).expect("member is a vertex");
            let mut out = FixedBitSet::with_capacity(classes.len());
            for v in g.reachable_from(start).ones() {
                out.insert(class_of[&g.vertices[v]]);
            }
            out
        })
        .collect();
    ClassQuotient {
        classes,
        reach,
        class_of,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle() -> MinskyMachine {
        parse_machine("0 INC1 1\n1 DEC1 0 0\n").unwrap()
    }

    fn c(s: State, m: u32, n: u32) -> Configuration {
        Configuration::new(s, m, n)
    }

    #[test]
    fn parsing() {
        let m = parse_machine("# demo\n0 INC1 1   # go\n\n1 DEC2 0 2\n").unwrap();
        assert_eq!(m.instruction(0), Some(Instruction::Inc1(1)));
        assert_eq!(m.instruction(1), Some(Instruction::Dec2(0, 2)));
        assert!(parse_machine("").unwrap().is_empty());
        assert_eq!(
            parse_machine("0 INC1 1\n0 INC2 2"),
            Err(MachineError::DuplicateState { line: 2, state: 0 })
        );
        assert!(matches!(
            parse_machine("0 INC3 1"),
            Err(MachineError::Malformed { line: 1, .. })
        ));
        assert!(parse_machine("0 DEC1 1").is_err());
        assert!(parse_machine("-1 INC1 1").is_err());
        assert_eq!(parse_machine(&m.to_string()).unwrap(), m);
    }

    #[test]
    fn step_semantics() {
        let m = parse_machine("0 INC1 1\n1 INC2 2\n2 DEC1 3 4\n3 DEC2 5 6").unwrap();
        assert_eq!(m.step(c(0, 4, 7)), Some(c(1, 5, 7)));
        assert_eq!(m.step(c(1, 4, 7)), Some(c(2, 4, 8)));
        assert_eq!(m.step(c(2, 4, 7)), Some(c(3, 3, 7)));
        assert_eq!(m.step(c(2, 0, 7)), Some(c(4, 0, 7)));
        assert_eq!(m.step(c(3, 1, 7)), Some(c(5, 1, 6)));
        assert_eq!(m.step(c(3, 1, 0)), Some(c(6, 1, 0)));
        assert_eq!(m.step(c(9, 0, 0)), None);
    }

    #[test]
    fn traces() {
        let m = cycle();
        assert_eq!(m.run(c(0, 0, 0), 0), vec![c(0, 0, 0)]);
        assert_eq!(
            m.run(c(0, 0, 0), 4),
            vec![c(0, 0, 0), c(1, 1, 0), c(0, 0, 0), c(1, 1, 0), c(0, 0, 0)]
        );
        let halting = parse_machine("0 INC1 1").unwrap();
        assert_eq!(halting.run(c(0, 0, 0), 5), vec![c(0, 0, 0), c(1, 1, 0)]);
    }

    #[test]
    fn graphs_and_classes() {
        let g = reach_graph(&cycle(), c(0, 0, 0), 0, 5);
        assert_eq!(g.vertices, vec![c(0, 0, 0)]);
        assert!(g.step_bound_hit);

        let g = reach_graph(&cycle(), c(0, 0, 0), 10, 5);
        assert_eq!(g.vertices.len(), 2);
        assert_eq!(g.edges.len(), 2);
        assert!(!g.is_truncated());
        let q = classes(&g);
        assert_eq!(q.classes, vec![vec![c(0, 0, 0), c(1, 1, 0)]]);

        let inc = parse_machine("0 INC1 0").unwrap();
        let g = reach_graph(&inc, c(0, 0, 0), 100, 3);
        assert!(g.counter_bound_hit);
        assert_eq!(g.vertices.len(), 4);

        let chain = parse_machine("0 INC1 1\n1 INC1 2").unwrap();
        let q = classes(&reach_graph(&chain, c(0, 0, 0), 10, 10));
        assert_eq!(q.len(), 3);
        assert!(q.leads_to(0, 2) && !q.leads_to(2, 0));

        let q = classes(&reach_graph(&MinskyMachine::new(), c(5, 0, 0), 10, 10));
        assert_eq!(q.classes, vec![vec![c(5, 0, 0)]]);
    }

    #[test]
    fn back_edge_at_the_step_bound_is_recorded() {
        let g = reach_graph(&cycle(), c(0, 0, 0), 1, 5);
        assert_eq!(g.edges, vec![(0, 1), (1, 0)]);
        assert!(!g.step_bound_hit);
    }
}
