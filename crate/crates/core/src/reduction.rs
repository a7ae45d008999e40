//! Colour propagation over the vertex graphs `G(A_v)`.
//!
//! Strategies start white (∘). A strategy coloured black (•) is pinned at
//! its equilibrium value on the attractor; plus (⊕) means its velocity
//! vanishes there. Links record pairs of same-group strategies whose ratio
//! is constant on the attractor.
//!
//! Rule numbering: 1 initial colouring, 2 and 3 neighbour inference over
//! `V*`, 4 linking over all vertices, 5 and 6 group completion. After every
//! application the scan restarts from the highest-priority rule.

use std::collections::BTreeSet;
use std::fmt;

use nalgebra::DVector;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dissipativity::admissible;
use crate::error::{Error, Result};
use crate::game::{GameType, PolymatrixGame};
use crate::scalar::Scalar;
use crate::tol::Tolerances;
use crate::vertex::{enumerate_vertices, vertex_matrix, zero_threshold, StrategyGraph, VertexLabel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Color {
    White,
    Black,
    Plus,
}

impl Color {
    pub fn symbol(self) -> &'static str {
        match self {
            Color::White => "∘",
            Color::Black => "•",
            Color::Plus => "⊕",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Color::White => "white",
            Color::Black => "black",
            Color::Plus => "plus",
        }
    }

    fn known(self) -> bool {
        self != Color::White
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// One rule application.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEntry {
    pub rule: u8,
    /// Vertices the rule was applied at (empty for group rules).
    pub vertices: Vec<VertexLabel>,
    /// Strategies coloured or linked.
    pub strategies: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InformationSet {
    pub colors: Vec<Color>,
    /// Same-group pairs `(i, j)` with `i < j`.
    pub links: BTreeSet<(usize, usize)>,
    pub trace: Vec<TraceEntry>,
}

impl InformationSet {
    pub fn with_color(&self, color: Color) -> Vec<usize> {
        (0..self.colors.len()).filter(|&i| self.colors[i] == color).collect()
    }

    fn recolor(&self, rule: u8, vertex: Option<&VertexLabel>, i: usize, color: Color) -> Self {
        let mut next = self.clone();
        next.colors[i] = color;
        next.trace.push(TraceEntry { rule, vertices: vertex.into_iter().cloned().collect(), strategies: vec![i] });
        next
    }
}

/// Order in which rule instances are scanned.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScanOrder {
    /// Colouring rules 2, 3, 5, 6 before the linking rule 4; vertices
    /// lexicographic and strategies ascending, except rule 4 which scans
    /// both in reverse.
    Canonical,
    /// Explicit orders, used for the confluence diagnostic.
    Permuted { rules: Vec<u8>, vertices: Vec<usize>, strategies: Vec<usize>, groups: Vec<usize> },
}

impl ScanOrder {
    /// Seeded random permutation of rules, vertices, strategies and groups.
    pub fn random(ty: &GameType, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rules = vec![2, 3, 4, 5, 6];
        let mut vertices: Vec<usize> = (0..enumerate_vertices(ty).len()).collect();
        let mut strategies: Vec<usize> = (0..ty.n()).collect();
        let mut groups: Vec<usize> = (0..ty.p()).collect();
        rules.shuffle(&mut rng);
        vertices.shuffle(&mut rng);
        strategies.shuffle(&mut rng);
        groups.shuffle(&mut rng);
        ScanOrder::Permuted { rules, vertices, strategies, groups }
    }

    fn rules(&self) -> Vec<u8> {
        match self {
            ScanOrder::Canonical => vec![2, 3, 5, 6, 4],
            ScanOrder::Permuted { rules, .. } => rules.clone(),
        }
    }

    fn vertices(&self, rule: u8, count: usize) -> Vec<usize> {
        match self {
            ScanOrder::Canonical if rule == 4 => (0..count).rev().collect(),
            ScanOrder::Canonical => (0..count).collect(),
            ScanOrder::Permuted { vertices, .. } => vertices.clone(),
        }
    }

    /// Orders graph nodes (positions in `index_set`) by strategy.
    fn nodes(&self, rule: u8, index_set: &[usize]) -> Vec<usize> {
        match self {
            ScanOrder::Canonical if rule == 4 => (0..index_set.len()).rev().collect(),
            ScanOrder::Canonical => (0..index_set.len()).collect(),
            ScanOrder::Permuted { strategies, .. } => {
                strategies.iter().filter_map(|s| index_set.iter().position(|i| i == s)).collect()
            }
        }
    }

    fn groups(&self, p: usize) -> Vec<usize> {
        match self {
            ScanOrder::Canonical => (0..p).collect(),
            ScanOrder::Permuted { groups, .. } => groups.clone(),
        }
    }
}

/// Vertex graphs and `V*` of one game.
#[derive(Debug, Clone)]
pub struct ReductionContext {
    pub game_type: GameType,
    pub vertices: Vec<VertexLabel>,
    pub graphs: Vec<StrategyGraph>,
    /// Whether each vertex lies in `V*`.
    pub in_v_star: Vec<bool>,
}

impl ReductionContext {
    pub fn new<T: Scalar>(game: &PolymatrixGame<T>, v_star: &[VertexLabel], tol: &Tolerances) -> Result<Self> {
        if v_star.is_empty() {
            return Err(Error::Precondition("V* is empty".into()));
        }
        let ty = game.game_type().clone();
        let vertices = enumerate_vertices(&ty);
        let mut graphs = Vec::with_capacity(vertices.len());
        for v in &vertices {
            let vm = vertex_matrix(game, v)?;
            graphs.push(StrategyGraph::from_matrix(&vm.entries, vm.index_set.clone(), zero_threshold(&vm.entries, tol)));
        }
        let in_v_star = vertices.iter().map(|v| v_star.contains(v)).collect();
        Ok(ReductionContext { game_type: ty, vertices, graphs, in_v_star })
    }
}

/// Rule 1: black for every negative diagonal entry of `A_v`, `v ∈ V*`.
pub fn initialize(ctx: &ReductionContext) -> InformationSet {
    let mut colors = vec![Color::White; ctx.game_type.n()];
    let mut used = Vec::new();
    let mut painted = BTreeSet::new();
    for (k, g) in ctx.graphs.iter().enumerate() {
        if !ctx.in_v_star[k] {
            continue;
        }
        let mut any = false;
        for (node, &s) in g.vertices.iter().enumerate() {
            if g.loops[node] < 0 {
                colors[s] = Color::Black;
                painted.insert(s);
                any = true;
            }
        }
        if any {
            used.push(ctx.vertices[k].clone());
        }
    }
    let trace = if painted.is_empty() {
        Vec::new()
    } else {
        vec![TraceEntry { rule: 1, vertices: used, strategies: painted.into_iter().collect() }]
    };
    InformationSet { colors, links: BTreeSet::new(), trace }
}

/// Applies the first instance of `rule` in scan order.
pub fn apply_rule(
    ctx: &ReductionContext,
    state: &InformationSet,
    rule: u8,
    order: &ScanOrder,
) -> Option<InformationSet> {
    match rule {
        2 | 3 => neighbour_rule(ctx, state, rule, order),
        4 => link_rule(ctx, state, order),
        5 => lone_rule(ctx, state, order),
        6 => connected_rule(ctx, state, order),
        _ => None,
    }
}

fn neighbour_rule(ctx: &ReductionContext, state: &InformationSet, rule: u8, order: &ScanOrder) -> Option<InformationSet> {
    let c = &state.colors;
    for k in order.vertices(rule, ctx.graphs.len()) {
        if !ctx.in_v_star[k] {
            continue;
        }
        let g = &ctx.graphs[k];
        for a in order.nodes(rule, &g.vertices) {
            if !c[g.vertices[a]].known() {
                continue;
            }
            let settled = |s: usize| if rule == 2 { c[s] == Color::Black } else { c[s].known() };
            let open: Vec<usize> = g.neighbors(a).iter().map(|&b| g.vertices[b]).filter(|&s| !settled(s)).collect();
            if let [j] = open[..] {
                let color = if rule == 2 { Color::Black } else { Color::Plus };
                return Some(state.recolor(rule, Some(&ctx.vertices[k]), j, color));
            }
        }
    }
    None
}

fn link_rule(ctx: &ReductionContext, state: &InformationSet, order: &ScanOrder) -> Option<InformationSet> {
    let c = &state.colors;
    let ty = &ctx.game_type;
    for k in order.vertices(4, ctx.graphs.len()) {
        let g = &ctx.graphs[k];
        for a in order.nodes(4, &g.vertices) {
            let i = g.vertices[a];
            // Only sound where the diagonal entry vanishes.
            if c[i] != Color::White || g.loops[a] != 0 {
                continue;
            }
            if !g.neighbors(a).iter().all(|&b| c[g.vertices[b]].known()) {
                continue;
            }
            let partner = ctx.vertices[k].chosen()[ty.group_of(i)];
            let pair = (i.min(partner), i.max(partner));
            if state.links.contains(&pair) {
                continue;
            }
            let mut next = state.clone();
            next.links.insert(pair);
            next.trace.push(TraceEntry { rule: 4, vertices: vec![ctx.vertices[k].clone()], strategies: vec![pair.0, pair.1] });
            return Some(next);
        }
    }
    None
}

fn lone_rule(ctx: &ReductionContext, state: &InformationSet, order: &ScanOrder) -> Option<InformationSet> {
    let c = &state.colors;
    let ty = &ctx.game_type;
    for g in order.groups(ty.p()) {
        let members: Vec<usize> = ty.range(g).collect();
        for &i in &members {
            if c[i] == Color::Black {
                continue;
            }
            let others = members.iter().filter(|&&s| s != i);
            if others.clone().all(|&s| c[s] == Color::Black) {
                return Some(state.recolor(5, None, i, Color::Black));
            }
            if c[i] == Color::White && others.clone().all(|&s| c[s].known()) {
                return Some(state.recolor(5, None, i, Color::Plus));
            }
        }
    }
    None
}

fn connected_rule(ctx: &ReductionContext, state: &InformationSet, order: &ScanOrder) -> Option<InformationSet> {
    let c = &state.colors;
    let ty = &ctx.game_type;
    for g in order.groups(ty.p()) {
        let open: Vec<usize> = ty.range(g).filter(|&s| c[s] == Color::White).collect();
        if open.len() < 2 {
            continue;
        }
        // Connectivity of the link graph restricted to `open`.
        let mut seen = vec![open[0]];
        let mut frontier = vec![open[0]];
        while let Some(u) = frontier.pop() {
            for &w in &open {
                let pair = (u.min(w), u.max(w));
                if !seen.contains(&w) && state.links.contains(&pair) {
                    seen.push(w);
                    frontier.push(w);
                }
            }
        }
        if seen.len() == open.len() {
            let mut next = state.clone();
            for &s in &open {
                next.colors[s] = Color::Plus;
            }
            next.trace.push(TraceEntry { rule: 6, vertices: Vec::new(), strategies: open });
            return Some(next);
        }
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    AllBlack,
    BlackPlus,
    Mixed,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::AllBlack => "all_black",
            Verdict::BlackPlus => "black_plus",
            Verdict::Mixed => "mixed",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone)]
pub struct ReducedInformationSet {
    pub info: InformationSet,
    /// Number of rule applications after initialisation.
    pub fixpoint_rounds: usize,
    pub verdict: Verdict,
}

/// Applies rules until none fires, starting from [`initialize`].
pub fn run_with(ctx: &ReductionContext, order: &ScanOrder) -> ReducedInformationSet {
    let mut state = initialize(ctx);
    let rules = order.rules();
    let mut rounds = 0;
    'outer: loop {
        for &rule in &rules {
            if let Some(next) = apply_rule(ctx, &state, rule, order) {
                state = next;
                rounds += 1;
                continue 'outer;
            }
        }
        break;
    }
    let verdict = if state.colors.iter().all(|c| *c == Color::Black) {
        Verdict::AllBlack
    } else if state.colors.iter().all(|c| c.known()) {
        Verdict::BlackPlus
    } else {
        Verdict::Mixed
    };
    ReducedInformationSet { info: state, fixpoint_rounds: rounds, verdict }
}

/// Reduced information set of an admissible game.
pub fn run_to_fixpoint<T: Scalar>(game: &PolymatrixGame<T>, tol: &Tolerances) -> Result<ReducedInformationSet> {
    let adm = admissible(game, tol);
    if !adm.admissible {
        return Err(Error::Precondition("game is not admissible".into()));
    }
    let ctx = ReductionContext::new(game, &adm.v_star, tol)?;
    Ok(run_with(&ctx, &ScanOrder::Canonical))
}

/// Rule ids of a trace with consecutive repeats merged.
pub fn rule_sequence(trace: &[TraceEntry]) -> Vec<u8> {
    let mut out: Vec<u8> = Vec::new();
    for e in trace {
        if out.last() != Some(&e.rule) {
            out.push(e.rule);
        }
    }
    out
}

/// What the reduced information set says about the attractor.
#[derive(Debug, Clone)]
pub struct AttractorStatement<T: Scalar> {
    pub verdict: Verdict,
    pub statement: String,
    /// Pinned coordinates `(i, q_i)` of black strategies.
    pub pinned: Vec<(usize, T)>,
    /// Strategies whose velocity vanishes on the attractor.
    pub stationary: Vec<usize>,
}

pub fn classify_attractor<T: Scalar>(r: &ReducedInformationSet, q: &DVector<T>) -> AttractorStatement<T> {
    let black = r.info.with_color(Color::Black);
    let plus = r.info.with_color(Color::Plus);
    let pinned: Vec<(usize, T)> = black.iter().map(|&i| (i, q[i])).collect();
    let statement = match r.verdict {
        Verdict::AllBlack => "unique globally attractive equilibrium q".to_string(),
        Verdict::BlackPlus => "invariant foliation with one globally attractive equilibrium in each leaf".to_string(),
        Verdict::Mixed => {
            let pins: Vec<String> = pinned.iter().map(|(i, v)| format!("x{} = {}", i + 1, v.as_f64())).collect();
            let stat: Vec<String> = plus.iter().map(|i| format!("dx{}/dt = 0", i + 1)).collect();
            let parts: Vec<String> = [pins.join(", "), stat.join(", ")].into_iter().filter(|s| !s.is_empty()).collect();
            if parts.is_empty() {
                "no constraint on the attractor".to_string()
            } else {
                format!("attractor contained in {{{}}}", parts.join("; "))
            }
        }
    };
    AttractorStatement { verdict: r.verdict, statement, pinned, stationary: plus }
}
