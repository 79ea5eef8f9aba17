//! A constructive path from a generating 4-tuple of PSL(2,q) or PGL(2,q)
//! to a redundant tuple.
//!
//! The pivot `w` sits at position 0. The stages are: clear the normalizer
//! of `<w>`, give `w` an order outside {2, p}, make every `<w, w^u>`
//! non-structural, then grow the normalizers of the three triple subgroups
//! until two of them coincide. Every transformation is realized as Nielsen
//! moves and every claim a stage makes is recorded as a [`Certificate`]
//! that can be re-checked on the replayed tuple.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::graph::{move_labels, GenTuple, MovePath, NielsenMove, Sign};
use crate::group::ElementType;
use crate::subgroup::{
    centralizer, classify_subgroup, closure, find_conjugator, generates, is_structural,
    normalizer, redundant_index, Subgroup, SubgroupClass, SubgroupLattice,
};
use crate::table::{ElemId, GroupTable};

/// State cap of the breadth-first searches used inside the pipeline.
pub const DEFAULT_SEARCH_CAP: usize = 400_000;
const MAX_RESOLVE_ROUNDS: usize = 64;

#[derive(Clone, Debug)]
pub struct ConnectorOptions {
    pub search_cap: usize,
    /// Allow k > 4 by running the pipeline on a generating 4-prefix.
    pub experimental_long_tuples: bool,
    /// Stop as soon as the tuple is redundant. With `false` every stage
    /// runs its case analysis in full, which exercises them on tuples that
    /// would otherwise stop early.
    pub stop_early: bool,
}

impl Default for ConnectorOptions {
    fn default() -> Self {
        ConnectorOptions {
            search_cap: DEFAULT_SEARCH_CAP,
            experimental_long_tuples: false,
            stop_early: true,
        }
    }
}

/// A fact a stage establishes about the tuple at a given point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Certificate {
    /// The entry at `pos` has order `order`, outside {1, 2, p}.
    PivotOrder { pos: usize, order: u32 },
    /// Every non-pivot entry lies outside `N_G(<w>)` and is not an involution.
    NormalizerCleared,
    /// `<w, u>` is not structural for the entry u at `pos`.
    NonStructuralPair { pos: usize },
    /// `<w, w^u>` is not structural for the entry u at `pos`.
    NonStructuralConjugate { pos: usize },
    /// The entries at `positions` generate a subgroup of class `class`.
    TripleClass { positions: [usize; 3], class: SubgroupClass },
    /// Sum of `|N_PGL(H_i)|` over the three triple subgroups.
    NormalizerSum { before: usize, after: usize },
    /// A bounded search was used where the case analysis had no move.
    SearchFallback { reason: String, states: usize },
    /// Dropping the entry at `pos` leaves a generating tuple.
    Redundant { pos: usize },
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Certificate::PivotOrder { pos, order } => {
                write!(f, "entry {} has order {order}, not 1, 2 or p", pos + 1)
            }
            Certificate::NormalizerCleared => {
                f.write_str("non-pivot entries lie outside N(<w>) and are not involutions")
            }
            Certificate::NonStructuralPair { pos } => {
                write!(f, "<w, u> non-structural for entry {}", pos + 1)
            }
            Certificate::NonStructuralConjugate { pos } => {
                write!(f, "<w, w^u> non-structural for entry {}", pos + 1)
            }
            Certificate::TripleClass { positions, class } => write!(
                f,
                "<entries {},{},{}> is {class}",
                positions[0] + 1,
                positions[1] + 1,
                positions[2] + 1
            ),
            Certificate::NormalizerSum { before, after } => {
                write!(f, "normalizer order sum {before} -> {after}")
            }
            Certificate::SearchFallback { reason, states } => {
                write!(f, "bounded search ({reason}) visited {states} tuples")
            }
            Certificate::Redundant { pos } => write!(f, "entry {} is redundant", pos + 1),
        }
    }
}

impl Serialize for Certificate {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

fn normalizes(table: &GroupTable, u: ElemId, w: ElemId) -> bool {
    let target = table.conj(w, u);
    let mut a = table.identity();
    for _ in 0..table.order_of(w) {
        if a == target {
            return true;
        }
        a = table.mul(a, w);
    }
    false
}

/// Structural for proper subgroups; the whole group is not structural.
fn structural(table: &GroupTable, h: &Subgroup) -> Result<bool> {
    if h.order() == table.order() {
        return Ok(false);
    }
    is_structural(table, h)
}

fn triple_positions(i: usize) -> [usize; 3] {
    [[0, 1, 2], [0, 1, 3], [0, 2, 3]][i]
}

impl Certificate {
    /// Re-checks the fact on `t` with the subgroup predicates.
    pub fn holds(&self, table: &GroupTable, t: &GenTuple) -> Result<bool> {
        let e = t.entries();
        let w = e[0];
        let p = table.p();
        Ok(match self {
            Certificate::PivotOrder { pos, order } => {
                let o = table.order_of(e[*pos]);
                o == *order && o != 1 && o != 2 && o != p
            }
            Certificate::NormalizerCleared => {
                let n = normalizer(table, &closure(table, &[w])?);
                e[1..]
                    .iter()
                    .all(|&u| !n.contains(u) && table.order_of(u) != 2)
            }
            Certificate::NonStructuralPair { pos } => {
                !structural(table, &closure(table, &[w, e[*pos]])?)?
            }
            Certificate::NonStructuralConjugate { pos } => {
                let h = closure(table, &[w, table.conj(w, e[*pos])])?;
                !structural(table, &h)?
            }
            Certificate::TripleClass { positions, class } => {
                let gens: Vec<ElemId> = positions.iter().map(|&i| e[i]).collect();
                classify_subgroup(table, &closure(table, &gens)?)? == *class
            }
            Certificate::NormalizerSum { before, after } => {
                let mut sum = 0;
                for i in 0..3 {
                    let gens: Vec<ElemId> = triple_positions(i).iter().map(|&j| e[j]).collect();
                    sum += normalizer(table, &closure(table, &gens)?).order();
                }
                after > before && sum == *after
            }
            Certificate::SearchFallback { .. } => true,
            Certificate::Redundant { pos } => {
                let rest: Vec<ElemId> = e
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != *pos)
                    .map(|(_, &x)| x)
                    .collect();
                generates(table, &rest)
            }
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CertifiedFact {
    /// Number of the stage's moves applied when the fact was established.
    #[serde(rename = "after-moves")]
    pub after_moves: usize,
    pub fact: Certificate,
}

#[derive(Clone, Debug, Serialize)]
pub struct StageTrace {
    pub label: String,
    pub moves: Vec<NielsenMove>,
    pub certificates: Vec<CertifiedFact>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConnectorTrace {
    pub group: String,
    pub input: String,
    pub stages: Vec<StageTrace>,
    pub endpoint: String,
    /// 1-based position of an entry that can be dropped.
    #[serde(rename = "redundant-witness-index")]
    pub redundant_witness_index: usize,
    #[serde(skip)]
    pub start: GenTuple,
    #[serde(skip)]
    pub end: GenTuple,
}

impl ConnectorTrace {
    /// All stage fragments concatenated.
    pub fn path(&self) -> MovePath {
        MovePath {
            start: self.start.clone(),
            moves: self.stages.iter().flat_map(|s| s.moves.iter().copied()).collect(),
        }
    }

    pub fn move_count(&self) -> usize {
        self.stages.iter().map(|s| s.moves.len()).sum()
    }

    pub fn stage(&self, label: &str) -> Option<&StageTrace> {
        self.stages.iter().find(|s| s.label == label)
    }

    /// Replays every fragment, checking that intermediate tuples generate,
    /// that each certificate holds where it was issued, and that the end
    /// tuple is redundant at the witness index.
    pub fn recheck(&self, table: &GroupTable) -> Result<()> {
        let mut lattice = SubgroupLattice::new(table);
        let mut t = self.start.clone();
        let fail = |stage: &str, reason: String| Error::Connector {
            stage: stage.to_string(),
            reason,
        };
        if !lattice.generates(t.entries()) {
            return Err(Error::NotGenerating);
        }
        for stage in &self.stages {
            let mut facts = stage.certificates.iter().peekable();
            for step in 0..=stage.moves.len() {
                while let Some(f) = facts.next_if(|f| f.after_moves == step) {
                    if !f.fact.holds(table, &t)? {
                        return Err(fail(&stage.label, format!("certificate fails: {}", f.fact)));
                    }
                }
                if step < stage.moves.len() {
                    t.apply(table, stage.moves[step])?;
                    if !lattice.generates(t.entries()) {
                        return Err(fail(&stage.label, format!("move {} loses generation", step + 1)));
                    }
                }
            }
            if facts.next().is_some() {
                return Err(fail(&stage.label, "certificate after the last move".into()));
            }
        }
        if t != self.end {
            return Err(fail("replay", "replayed endpoint differs from the recorded one".into()));
        }
        let pos = self.redundant_witness_index.wrapping_sub(1);
        if pos >= t.k() || !(Certificate::Redundant { pos }).holds(table, &t)? {
            return Err(fail("replay", "endpoint is not redundant at the witness index".into()));
        }
        Ok(())
    }
}

/// A pipeline failure with the trace up to the failing stage.
#[derive(Debug)]
pub struct ConnectorFailure {
    pub error: Error,
    pub trace: ConnectorTrace,
}

impl fmt::Display for ConnectorFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} after {} moves", self.error, self.trace.move_count())
    }
}

impl std::error::Error for ConnectorFailure {}

impl From<ConnectorFailure> for Error {
    fn from(f: ConnectorFailure) -> Error {
        f.error
    }
}

enum Halt {
    Redundant(usize),
    Fail(Error),
}

impl From<Error> for Halt {
    fn from(e: Error) -> Halt {
        Halt::Fail(e)
    }
}

type Step<T = ()> = std::result::Result<T, Halt>;

type Word = Vec<(usize, Sign)>;

fn inverse_word(word: &[(usize, Sign)]) -> Word {
    word.iter()
        .rev()
        .map(|&(j, s)| (j, if s == Sign::Plus { Sign::Minus } else { Sign::Plus }))
        .collect()
}

/// Breadth-first search over tuples that differ from `start` only at
/// `positions`, using moves among those positions, for a tuple satisfying
/// `goal`. Returns the moves and the number of stored tuples.
fn search(
    table: &GroupTable,
    lattice: &mut SubgroupLattice<'_>,
    start: &GenTuple,
    positions: &[usize],
    cap: usize,
    mut goal: impl FnMut(&mut SubgroupLattice<'_>, &GenTuple) -> bool,
) -> (Option<Vec<NielsenMove>>, usize) {
    let remap = |m: NielsenMove| match m {
        NielsenMove::R { i, j, sign } => NielsenMove::R { i: positions[i], j: positions[j], sign },
        NielsenMove::L { i, j, sign } => NielsenMove::L { i: positions[i], j: positions[j], sign },
        NielsenMove::P { i, j } => NielsenMove::P { i: positions[i], j: positions[j] },
        NielsenMove::I { i } => NielsenMove::I { i: positions[i] },
    };
    let labels: Vec<NielsenMove> = move_labels(positions.len(), true)
        .into_iter()
        .map(remap)
        .collect();
    let mut parent: HashMap<GenTuple, Option<(GenTuple, NielsenMove)>> = HashMap::new();
    parent.insert(start.clone(), None);
    let mut queue = VecDeque::from([start.clone()]);
    let mut found = None;
    if goal(lattice, start) {
        found = Some(start.clone());
    }
    while found.is_none() {
        let Some(t) = queue.pop_front() else { break };
        for &m in &labels {
            let mut s = t.clone();
            s.apply_unchecked(table, m);
            if parent.contains_key(&s) {
                continue;
            }
            parent.insert(s.clone(), Some((t.clone(), m)));
            if goal(lattice, &s) {
                found = Some(s);
                break;
            }
            queue.push_back(s);
        }
        if parent.len() > cap {
            break;
        }
    }
    let states = parent.len();
    let Some(mut cur) = found else {
        return (None, states);
    };
    let mut moves = Vec::new();
    while let Some(Some((prev, m))) = parent.get(&cur) {
        moves.push(*m);
        cur = prev.clone();
    }
    moves.reverse();
    (Some(moves), states)
}

struct Walker<'a> {
    table: &'a GroupTable,
    lattice: SubgroupLattice<'a>,
    cap: usize,
    stop_early: bool,
    start: GenTuple,
    cur: GenTuple,
    stages: Vec<StageTrace>,
}

impl<'a> Walker<'a> {
    fn new(table: &'a GroupTable, start: GenTuple, cap: usize, stop_early: bool) -> Self {
        Walker {
            table,
            lattice: SubgroupLattice::new(table),
            cap,
            stop_early,
            cur: start.clone(),
            start,
            stages: Vec::new(),
        }
    }

    fn begin(&mut self, label: &str) {
        self.stages.push(StageTrace {
            label: label.to_string(),
            moves: Vec::new(),
            certificates: Vec::new(),
        });
    }

    fn stage_mut(&mut self) -> &mut StageTrace {
        self.stages.last_mut().expect("no open stage")
    }

    fn certify(&mut self, fact: Certificate) {
        let after_moves = self.stage_mut().moves.len();
        self.stage_mut().certificates.push(CertifiedFact { after_moves, fact });
    }

    fn fail(&self, reason: impl Into<String>) -> Halt {
        if !self.stop_early {
            // a stage may lack a move only because the tuple is already redundant
            if let Some(i) = redundant_index(self.table, self.cur.entries()) {
                return Halt::Redundant(i);
            }
        }
        let stage = self.stages.last().map_or("start", |s| s.label.as_str());
        Halt::Fail(Error::Connector {
            stage: stage.to_string(),
            reason: reason.into(),
        })
    }

    fn apply(&mut self, m: NielsenMove) {
        self.cur.apply_unchecked(self.table, m);
        self.stage_mut().moves.push(m);
    }

    fn check_redundant(&mut self) -> Step {
        if !self.stop_early {
            return Ok(());
        }
        self.require_redundant()
    }

    fn require_redundant(&mut self) -> Step {
        match self.lattice.redundant_index(self.cur.entries()) {
            Some(i) => Err(Halt::Redundant(i)),
            None => Ok(()),
        }
    }

    fn e(&self, i: usize) -> ElemId {
        self.cur.get(i)
    }

    fn ord(&self, i: usize) -> u32 {
        self.table.order_of(self.e(i))
    }

    fn k(&self) -> usize {
        self.cur.k()
    }

    fn swap_to_front(&mut self, i: usize) {
        if i != 0 {
            self.apply(NielsenMove::P { i: 0, j: i });
        }
    }

    /// `e_pos <- e_pos * word`
    fn right_word(&mut self, pos: usize, word: &[(usize, Sign)]) {
        for &(j, sign) in word {
            debug_assert_ne!(j, pos);
            self.apply(NielsenMove::R { i: pos, j, sign });
        }
    }

    /// `e_pos <- word * e_pos`
    fn left_word(&mut self, pos: usize, word: &[(usize, Sign)]) {
        for &(j, sign) in word.iter().rev() {
            debug_assert_ne!(j, pos);
            self.apply(NielsenMove::L { i: pos, j, sign });
        }
    }

    fn eval(&self, word: &[(usize, Sign)]) -> ElemId {
        word.iter().fold(self.table.identity(), |acc, &(j, s)| {
            let x = self.e(j);
            self.table.mul(acc, if s == Sign::Plus { x } else { self.table.inv(x) })
        })
    }

    fn act(&self, x: ElemId, pt: u32) -> u32 {
        self.table.act(x, pt)
    }

    fn run_search(
        &mut self,
        positions: &[usize],
        reason: &str,
        goal: impl FnMut(&mut SubgroupLattice<'_>, &GenTuple) -> bool,
    ) -> Step {
        let (moves, states) = search(self.table, &mut self.lattice, &self.cur, positions, self.cap, goal);
        let Some(moves) = moves else {
            return Err(self.fail(format!("{reason}: no tuple found within {states} states")));
        };
        for m in moves {
            self.apply(m);
        }
        self.certify(Certificate::SearchFallback {
            reason: reason.to_string(),
            states,
        });
        Ok(())
    }

    /// Shortest word in the entries at `positions` evaluating to `target`.
    fn word_for(&self, target: ElemId, positions: &[usize]) -> Option<Word> {
        let t = self.table;
        let mut prev: HashMap<ElemId, (ElemId, (usize, Sign))> = HashMap::new();
        let id = t.identity();
        let mut queue = VecDeque::from([id]);
        let mut seen = std::collections::HashSet::from([id]);
        while let Some(x) = queue.pop_front() {
            if x == target {
                let mut word = Vec::new();
                let mut cur = x;
                while cur != id {
                    let (p, letter) = prev[&cur];
                    word.push(letter);
                    cur = p;
                }
                word.reverse();
                return Some(word);
            }
            for &j in positions {
                for sign in [Sign::Plus, Sign::Minus] {
                    let g = if sign == Sign::Plus { self.e(j) } else { t.inv(self.e(j)) };
                    let y = t.mul(x, g);
                    if seen.insert(y) {
                        prev.insert(y, (x, (j, sign)));
                        queue.push_back(y);
                    }
                }
            }
        }
        None
    }

    /// Every non-pivot entry is moved outside `N_G(<w>)` and away from
    /// order 2.
    fn clear_normalizer(&mut self) -> Step {
        let t = self.table;
        let w = self.e(0);
        if w == t.identity() {
            return Err(self.fail("pivot is the identity"));
        }
        for u in 1..self.k() {
            if normalizes(t, self.e(u), w) {
                let Some(v) = (1..self.k()).find(|&v| v != u && !normalizes(t, self.e(v), w)) else {
                    return Err(self.fail("every entry normalizes <w>"));
                };
                self.apply(NielsenMove::R { i: u, j: v, sign: Sign::Plus });
                self.check_redundant()?;
            }
            if self.ord(u) == 2 {
                self.apply(NielsenMove::L { i: u, j: 0, sign: Sign::Plus });
                if self.ord(u) == 2 {
                    return Err(self.fail("|wy| = 2 for an involution y outside N(<w>)"));
                }
                self.check_redundant()?;
            }
        }
        self.certify(Certificate::NormalizerCleared);
        Ok(())
    }

    fn good_order(&self, o: u32) -> bool {
        o != 1 && o != 2 && o != self.table.p()
    }

    fn order_fix(&mut self) -> Step {
        let rounds = self.table.order();
        for _ in 0..rounds {
            if let Some(i) = (0..self.k()).find(|&i| self.good_order(self.ord(i))) {
                self.swap_to_front(i);
                let order = self.ord(0);
                self.certify(Certificate::PivotOrder { pos: 0, order });
                return Ok(());
            }
            if self.table.p() > 3 {
                self.order_round_large_p()?;
            } else {
                self.order_round_three()?;
            }
            self.check_redundant()?;
        }
        Err(self.fail("iteration cap reached"))
    }

    /// One hop of the case analysis for p > 3; entries have orders 2 or p.
    fn order_round_large_p(&mut self) -> Step {
        let p = self.table.p();
        let k = self.k();
        if let Some(i) = (0..k).find(|&i| self.ord(i) == p) {
            self.swap_to_front(i);
            self.clear_normalizer()?;
            if (1..k).any(|u| self.good_order(self.ord(u))) {
                return Ok(());
            }
            // all entries have order p; none commutes with w
            let w = self.e(0);
            for y in 1..k {
                if self.table.commute(w, self.e(y)) {
                    continue;
                }
                let mut acc = w;
                for i in 1..p {
                    acc = self.table.mul(acc, self.e(y));
                    if self.good_order(self.table.order_of(acc)) {
                        for _ in 0..i {
                            self.apply(NielsenMove::R { i: 0, j: y, sign: Sign::Plus });
                        }
                        return Ok(());
                    }
                }
                return Err(self.fail("no i with |w y^i| outside {2, p}"));
            }
            return Err(self.fail("order-p entries commute with w"));
        }
        // all entries are involutions
        for a in 0..k {
            for b in 0..k {
                if a != b {
                    let o = self.table.order_of(self.table.mul(self.e(a), self.e(b)));
                    if o > 2 {
                        self.apply(NielsenMove::R { i: a, j: b, sign: Sign::Plus });
                        return Ok(());
                    }
                }
            }
        }
        Err(self.fail("all involutions commute"))
    }

    /// One hop of the case analysis for p = 3; entries have orders 2 or 3.
    fn order_round_three(&mut self) -> Step {
        let k = self.k();
        if let Some(i) = (0..k).find(|&i| self.ord(i) == 3) {
            self.swap_to_front(i);
            self.clear_normalizer()?;
            if (1..k).any(|u| self.good_order(self.ord(u))) {
                return Ok(());
            }
            let w = self.e(0);
            let w2 = self.table.mul(w, w);
            for a in 1..k {
                for (n, wn) in [(1, w), (2, w2)] {
                    if self.good_order(self.table.order_of(self.table.mul(self.e(a), wn))) {
                        for _ in 0..n {
                            self.apply(NielsenMove::R { i: a, j: 0, sign: Sign::Plus });
                        }
                        return Ok(());
                    }
                }
            }
            for a in 1..k {
                let n = if self.table.order_of(self.table.mul(self.e(a), w)) == 2 {
                    1
                } else if self.table.order_of(self.table.mul(self.e(a), w2)) == 2 {
                    2
                } else {
                    return Err(self.fail("both |a w| and |a w^2| equal 3"));
                };
                for _ in 0..n {
                    self.apply(NielsenMove::R { i: a, j: 0, sign: Sign::Plus });
                }
                self.check_redundant()?;
            }
        }
        // the entries at positions 1..k are involutions
        let inv: Vec<usize> = (0..k).filter(|&i| self.ord(i) == 2).collect();
        let mut order_three = false;
        for &a in &inv {
            for &b in &inv {
                if a == b {
                    continue;
                }
                let o = self.table.order_of(self.table.mul(self.e(a), self.e(b)));
                if self.good_order(o) {
                    self.apply(NielsenMove::R { i: a, j: b, sign: Sign::Plus });
                    return Ok(());
                }
                order_three |= o == 3;
            }
        }
        if order_three {
            // Involution pairs with product of order 3 generate dihedral groups of
            // order 6 and no single move helps; search for a pivot instead.
            let p = self.table.p();
            let table = self.table;
            return self.run_search(&(0..k).collect::<Vec<_>>(), "involution products of order 3", |lat, t| {
                t.entries().iter().any(|&x| {
                    let o = table.order_of(x);
                    o != 1 && o != 2 && o != p
                }) || lat.redundant_index(t.entries()).is_some()
            });
        }
        self.check_redundant()?;
        Err(self.fail("involutions generate an elementary abelian group of order 8"))
    }

    /// The two fixed points of a split pivot.
    fn split_points(&self) -> Step<(u32, u32)> {
        match self.table.fixed_points(self.e(0))[..] {
            [a, b] => Ok((a, b)),
            _ => Err(self.fail("pivot is not split")),
        }
    }

    /// An entry v other than 0 and `u` and a sign with `v^±1 a` outside {a, b}.
    fn aux(&self, u: usize, a: u32, b: u32) -> Step<(usize, Sign)> {
        for v in (1..self.k()).filter(|&v| v != u) {
            for sign in [Sign::Plus, Sign::Minus] {
                let g = if sign == Sign::Plus { self.e(v) } else { self.table.inv(self.e(v)) };
                let img = self.act(g, a);
                if img != a && img != b {
                    return Ok((v, sign));
                }
            }
        }
        Err(self.fail("no entry moves the fixed point off {a, b}"))
    }

    /// Makes every `<w, u>` non-structural for a split pivot.
    fn split_pairs(&mut self) -> Step {
        let t = self.table;
        for u in 1..self.k() {
            if !structural(t, &closure(t, &[self.e(0), self.e(u)])?)? {
                self.certify(Certificate::NonStructuralPair { pos: u });
                continue;
            }
            let (a0, b0) = self.split_points()?;
            let y = self.e(u);
            let (a, b) = match (self.act(y, a0) == a0, self.act(y, b0) == b0) {
                (true, false) => (a0, b0),
                (false, true) => (b0, a0),
                _ => return Err(self.fail("structural <w, y> without a single common fixed point")),
            };
            if t.fixed_points(y).len() == 1 {
                // y is unipotent in the Borel subgroup at a
                self.apply(NielsenMove::R { i: u, j: 0, sign: Sign::Plus });
                if self.ord(u) == 2 {
                    self.apply(NielsenMove::R { i: u, j: 0, sign: Sign::Plus });
                }
                self.check_redundant()?;
            }
            let fixed = t.fixed_points(self.e(u));
            let Some(&d) = fixed.iter().find(|&&z| z != a) else {
                return Err(self.fail("entry does not fix a second point"));
            };
            if fixed.len() != 2 || !fixed.contains(&a) || d == b {
                return Err(self.fail("entry fixed points are not {a, d} with d outside {a, b}"));
            }
            let (v, s) = self.aux(u, a, b)?;
            let zv = if s == Sign::Plus { self.e(v) } else { t.inv(self.e(v)) };
            let w = self.e(0);
            let Some(kk) = (0..3).find(|&kk| {
                let g = t.mul(zv, t.pow(w, kk));
                let img = self.act(g, d);
                img != a && img != b
            }) else {
                return Err(self.fail("every g_k maps d into {a, b}"));
            };
            let mut g: Word = vec![(v, s)];
            g.extend(std::iter::repeat((0, Sign::Plus)).take(kk as usize));
            // y <- g y g^-1
            self.left_word(u, &g);
            self.right_word(u, &inverse_word(&g));
            self.check_redundant()?;
            if structural(t, &closure(t, &[self.e(0), self.e(u)])?)? {
                return Err(self.fail("<w, y'> is still structural"));
            }
            self.certify(Certificate::NonStructuralPair { pos: u });
        }
        Ok(())
    }

    /// Makes every `<w, w^u>` non-structural for a split pivot.
    fn split_conjugates(&mut self) -> Step {
        let t = self.table;
        for u in 1..self.k() {
            let w = self.e(0);
            if !structural(t, &closure(t, &[w, t.conj(w, self.e(u))])?)? {
                self.certify(Certificate::NonStructuralConjugate { pos: u });
                continue;
            }
            let (a0, b0) = self.split_points()?;
            let yinv = t.inv(self.e(u));
            let (a, b) = if self.act(yinv, b0) == a0 {
                (a0, b0)
            } else if self.act(yinv, a0) == b0 {
                (b0, a0)
            } else {
                return Err(self.fail("structural <w, w^y> with y^-1 b != a"));
            };
            let (v, s) = self.aux(u, a, b)?;
            let zv = if s == Sign::Plus { self.e(v) } else { t.inv(self.e(v)) };
            let Some(kk) = (0..3).find(|&kk| {
                let g = t.mul(t.mul(zv, t.pow(w, kk)), yinv);
                let img = self.act(g, a);
                img != a && img != b
            }) else {
                return Err(self.fail("every g_k maps a into {a, b}"));
            };
            // y <- g_k^-1 = y w^-k z'^-1
            let mut word: Word = vec![(0, Sign::Minus); kk as usize];
            word.push((v, if s == Sign::Plus { Sign::Minus } else { Sign::Plus }));
            self.right_word(u, &word);
            self.check_redundant()?;
            let w = self.e(0);
            if structural(t, &closure(t, &[w, t.conj(w, self.e(u))])?)? {
                return Err(self.fail("<w, w^y'> is still structural"));
            }
            self.certify(Certificate::NonStructuralConjugate { pos: u });
        }
        Ok(())
    }

    fn destructuralize(&mut self) -> Step {
        self.clear_normalizer()?;
        match self.table.element_type(self.e(0)) {
            ElementType::NonSplit => {
                let t = self.table;
                for u in 1..self.k() {
                    let w = self.e(0);
                    if structural(t, &closure(t, &[w, t.conj(w, self.e(u))])?)? {
                        return Err(self.fail("<w, w^y> structural for a non-split pivot"));
                    }
                    self.certify(Certificate::NonStructuralConjugate { pos: u });
                }
                Ok(())
            }
            ElementType::Split => {
                self.split_pairs()?;
                self.split_conjugates()
            }
            _ => Err(self.fail("pivot is neither split nor non-split")),
        }
    }

    fn subfield_resolve(&mut self) -> Step {
        let t = self.table;
        let pgl = t.pgl();
        let mut last_sum = None;
        for _ in 0..MAX_RESOLVE_ROUNDS {
            self.check_redundant()?;
            let mut groups = Vec::new();
            let mut classes = Vec::new();
            for i in 0..3 {
                let pos = triple_positions(i);
                let h = closure(t, &pos.map(|j| self.e(j)))?;
                let class = classify_subgroup(t, &h)?;
                self.certify(Certificate::TripleClass { positions: pos, class });
                groups.push(h);
                classes.push(class);
            }
            if classes.contains(&SubgroupClass::FullGroup) {
                self.require_redundant()?;
                return Err(self.fail("a triple generates the group"));
            }
            if let Some(i) = classes.iter().position(|c| c.is_small()) {
                let label = format!("finish {}", classes[i]);
                return self.run_search(&triple_positions(i), &label, |lat, s| {
                    lat.redundant_index(s.entries()).is_some()
                });
            }
            let mut qs = [0u32; 3];
            for i in 0..3 {
                match classes[i].subfield() {
                    Some(q1) => qs[i] = q1,
                    None => {
                        return Err(self.fail(format!("triple subgroup of class {}", classes[i])))
                    }
                }
            }
            let sum: usize = groups.iter().map(|h| normalizer(t, h).order()).sum();
            if let Some(before) = last_sum {
                if sum <= before {
                    return Err(self.fail(format!("normalizer sum {before} -> {sum} did not increase")));
                }
                self.certify(Certificate::NormalizerSum { before, after: sum });
            }
            last_sum = Some(sum);
            let i3 = (0..3).max_by_key(|&i| (qs[i], std::cmp::Reverse(i))).unwrap();
            let qmin = *qs.iter().min().unwrap();
            if qmin == qs[i3] {
                self.require_redundant()?;
                // All three normalizers have the same order; two of the
                // triple subgroups must coincide.
                let (h1, h2) = (0..3)
                    .flat_map(|i| (i + 1..3).map(move |j| (i, j)))
                    .find(|&(i, j)| groups[i].order() == groups[j].order())
                    .unwrap();
                let conj = find_conjugator(t, &groups[h1], &groups[h2])
                    .map(|g| pgl.format_elem(g))
                    .unwrap_or_else(|_| "none".into());
                return Err(self.fail(format!(
                    "equal subfield orders but no redundancy; conjugator of H{} to H{}: {conj}",
                    h1 + 1,
                    h2 + 1
                )));
            }
            // x is the entry missing from H3, the triple with the largest q
            let x = [3, 2, 1][i3];
            let h3_pos = triple_positions(i3);
            let w = self.e(0);
            let xe = self.e(x);
            let l1 = closure(t, &[w, t.conj(w, xe)])?;
            let target = t.conj(w, xe);
            let l1n = normalizer(t, &l1);
            let Some(d) = l1
                .elements()
                .iter()
                .chain(l1n.elements())
                .copied()
                .find(|&d| pgl.conj(w, d) == target)
            else {
                return Err(self.fail("no d in N(L1) with w^x = w^d"));
            };
            let u_tilde = pgl.mul(xe, pgl.inv(d));
            let cz = centralizer(t, &groups[i3], w);
            let Some(c) = cz.generator else {
                return Err(self.fail("C_H3(w) is not cyclic"));
            };
            let joint = closure(&pgl, &[c, u_tilde])?.order() as u32;
            let oc = t.order_of(c);
            let Some(n) = (0..oc as i64).find(|&n| {
                pgl.order_of(pgl.mul(t.pow(c, n), u_tilde)) == joint
            }) else {
                return Err(self.fail("no n with <c, u> = <c^n u>"));
            };
            let cn = t.pow(c, n);
            let Some(word) = self.word_for(cn, &h3_pos) else {
                return Err(self.fail("c^n is not a word in the entries of H3"));
            };
            debug_assert_eq!(self.eval(&word), cn);
            self.left_word(x, &word);
        }
        Err(self.fail("round cap reached"))
    }
}

/// Connects a generating tuple to a redundant one.
pub fn connect_to_redundant(
    table: &GroupTable,
    t: &GenTuple,
    opts: &ConnectorOptions,
) -> std::result::Result<ConnectorTrace, ConnectorFailure> {
    let mut walker = Walker::new(table, t.clone(), opts.search_cap, opts.stop_early);
    let outcome = run(&mut walker, opts);
    let finish = |w: &mut Walker, pos: usize| {
        let end = w.cur.clone();
        ConnectorTrace {
            group: table.id().to_string(),
            input: w.start.format(table),
            stages: std::mem::take(&mut w.stages),
            endpoint: end.format(table),
            redundant_witness_index: pos + 1,
            start: w.start.clone(),
            end,
        }
    };
    match outcome {
        Halt::Redundant(pos) => {
            if walker.stages.is_empty() {
                walker.begin("redundant");
            }
            walker.certify(Certificate::Redundant { pos });
            Ok(finish(&mut walker, pos))
        }
        Halt::Fail(error) => Err(ConnectorFailure {
            error,
            trace: finish(&mut walker, usize::MAX),
        }),
    }
}

fn run(w: &mut Walker, opts: &ConnectorOptions) -> Halt {
    let mut body = || -> Step {
        let table = w.table;
        if !w.lattice.generates(w.cur.entries()) {
            return Err(Halt::Fail(Error::NotGenerating));
        }
        w.check_redundant()?;
        let k = w.k();
        if k < 4 || (k > 4 && !opts.experimental_long_tuples) {
            return Err(Halt::Fail(Error::Parse(format!(
                "the connector needs k = 4 (k = {k}{})",
                if k > 4 { "; longer tuples are experimental" } else { "" }
            ))));
        }
        if k > 4 && !w.lattice.generates(&w.cur.entries()[..4]) {
            return Err(Halt::Fail(Error::Parse(
                "experimental long tuples need a generating 4-prefix".into(),
            )));
        }
        if table.q() == 3 {
            w.begin("small-group-search");
            return w.run_search(&(0..k).collect::<Vec<_>>(), "q = 3", |lat, s| {
                lat.redundant_index(s.entries()).is_some()
            });
        }
        w.begin("clear-normalizer");
        w.clear_normalizer()?;
        w.check_redundant()?;
        w.begin("order-fix");
        w.order_fix()?;
        w.check_redundant()?;
        w.begin("destructuralize");
        w.destructuralize()?;
        w.check_redundant()?;
        w.begin("subfield-resolve");
        w.subfield_resolve()?;
        w.require_redundant()?;
        Err(w.fail("pipeline ended without a redundant tuple"))
    };
    let res = body();
    match res {
        Ok(()) => match w.lattice.redundant_index(w.cur.entries()) {
            Some(i) => Halt::Redundant(i),
            None => w.fail("search ended without a redundant tuple"),
        },
        Err(h) => h,
    }
}

/// Applies only the normalizer-clearing step, pivot at position 0, without
/// stopping at redundant tuples.
pub fn clear_normalizer(table: &GroupTable, t: &GenTuple) -> Result<(GenTuple, Vec<NielsenMove>)> {
    let mut w = Walker::new(table, t.clone(), DEFAULT_SEARCH_CAP, false);
    w.begin("clear-normalizer");
    match w.clear_normalizer() {
        Ok(()) => {}
        Err(Halt::Redundant(_)) => {
            return Err(Error::Connector {
                stage: "clear-normalizer".into(),
                reason: "no move for a redundant tuple".into(),
            })
        }
        Err(Halt::Fail(e)) => return Err(e),
    }
    let moves = w.stages.pop().unwrap().moves;
    Ok((w.cur, moves))
}

/// Counts for the exhaustive lemma checks.
#[derive(Clone, Debug, Default, Serialize)]
pub struct LemmaCheck {
    pub cases: u64,
    pub violations: u64,
    /// Cases settled by the A4 alternative.
    pub a4_cases: u64,
}

/// For every non-commuting pair (x, y) of elements of order p, some
/// `i in 1..p` has `|x y^i|` outside {2, p}, or p = 3 and `<x, y>` is A4.
pub fn check_not_2_p(table: &GroupTable) -> Result<LemmaCheck> {
    let p = table.p();
    let unip: Vec<ElemId> = table
        .elements()
        .iter()
        .copied()
        .filter(|&x| table.order_of(x) == p)
        .collect();
    let mut out = LemmaCheck::default();
    for &x in &unip {
        for &y in &unip {
            if table.commute(x, y) {
                continue;
            }
            out.cases += 1;
            let mut acc = x;
            let mut ok = false;
            for _ in 1..p {
                acc = table.mul(acc, y);
                let o = table.order_of(acc);
                if o != 2 && o != p {
                    ok = true;
                    break;
                }
            }
            if !ok && p == 3 && classify_subgroup(table, &closure(table, &[x, y])?)? == SubgroupClass::A4 {
                ok = true;
                out.a4_cases += 1;
            }
            if !ok {
                out.violations += 1;
            }
        }
    }
    Ok(out)
}

/// For every `w != 1` and involution y outside `N_G(<w>)`, `|wy| != 2`.
pub fn check_normalizer_lemma(table: &GroupTable) -> Result<LemmaCheck> {
    let invs: Vec<ElemId> = table
        .elements()
        .iter()
        .copied()
        .filter(|&x| table.order_of(x) == 2)
        .collect();
    let mut out = LemmaCheck::default();
    for &w in table.elements() {
        if w == table.identity() {
            continue;
        }
        let n = normalizer(table, &closure(table, &[w])?);
        for &y in &invs {
            if n.contains(y) {
                continue;
            }
            out.cases += 1;
            if table.order_of(table.mul(w, y)) == 2 {
                out.violations += 1;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupKind::{Pgl, Psl};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn run_many(table: &GroupTable, count: usize, seed: u64) -> usize {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut moved = 0;
        for _ in 0..count {
            let t = GenTuple::random_generating(table, 4, &mut rng).unwrap();
            let trace = connect_to_redundant(table, &t, &ConnectorOptions::default())
                .unwrap_or_else(|f| panic!("{f}\n{}", serde_json::to_string(&f.trace).unwrap()));
            trace.recheck(table).unwrap();
            moved += (trace.move_count() > 0) as usize;
        }
        moved
    }

    #[test]
    fn redundant_input_gives_empty_path() {
        let g = GroupTable::build(Psl, 5, 1).unwrap();
        let t = GenTuple::parse(&g, "1,1,0,1;1,0,1,1;1,0,0,1;1,0,0,1").unwrap();
        let trace = connect_to_redundant(&g, &t, &ConnectorOptions::default()).unwrap();
        assert_eq!(trace.move_count(), 0);
        trace.recheck(&g).unwrap();
    }

    #[test]
    fn random_tuples_small_q() {
        for (kind, p, e) in [(Psl, 5, 1), (Pgl, 5, 1), (Psl, 7, 1), (Psl, 3, 2), (Pgl, 3, 1)] {
            let g = GroupTable::build(kind, p, e).unwrap();
            run_many(&g, 20, 1);
        }
    }

    #[test]
    fn lemma_checks_psl5() {
        let g = GroupTable::build(Psl, 5, 1).unwrap();
        let a = check_not_2_p(&g).unwrap();
        assert!(a.cases > 0);
        assert_eq!(a.violations, 0);
        let b = check_normalizer_lemma(&g).unwrap();
        assert!(b.cases > 0);
        assert_eq!(b.violations, 0);
    }

    #[test]
    fn words_round_trip() {
        assert_eq!(
            inverse_word(&[(1, Sign::Plus), (2, Sign::Minus)]),
            vec![(2, Sign::Plus), (1, Sign::Minus)]
        );
    }
}
