//! Nielsen moves, the product replacement walk, and exhaustive exploration
//! of the graphs Γ_k(G) (moves R, L) and Γ̃_k(G) (moves R, L, P, I).

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU32, Ordering};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::GroupKind;
use crate::subgroup::{generates, SubgroupLattice};
use crate::table::{ElemId, GroupTable};

/// Default limit on `|G|^k` for [`components`].
pub const DEFAULT_STATE_BUDGET: u64 = 200_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

/// A Nielsen move. Indices are 0-based; the text form is 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NielsenMove {
    /// `g_i <- g_i g_j^±1`
    R { i: usize, j: usize, sign: Sign },
    /// `g_i <- g_j^±1 g_i`
    L { i: usize, j: usize, sign: Sign },
    /// swap `g_i` and `g_j`
    P { i: usize, j: usize },
    /// `g_i <- g_i^-1`
    I { i: usize },
}

impl NielsenMove {
    pub fn inverse(self) -> NielsenMove {
        match self {
            NielsenMove::R { i, j, sign } => NielsenMove::R { i, j, sign: sign.flip() },
            NielsenMove::L { i, j, sign } => NielsenMove::L { i, j, sign: sign.flip() },
            m => m,
        }
    }

    pub fn is_extended(self) -> bool {
        matches!(self, NielsenMove::P { .. } | NielsenMove::I { .. })
    }

    pub fn check(self, k: usize) -> Result<()> {
        let ok = match self {
            NielsenMove::R { i, j, .. } | NielsenMove::L { i, j, .. } | NielsenMove::P { i, j } => {
                i < k && j < k && i != j
            }
            NielsenMove::I { i } => i < k,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidMove(format!("{self} for k = {k}")))
        }
    }
}

impl fmt::Display for NielsenMove {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            NielsenMove::R { i, j, sign } => write!(f, "R{} {} {}", sign.symbol(), i + 1, j + 1),
            NielsenMove::L { i, j, sign } => write!(f, "L{} {} {}", sign.symbol(), i + 1, j + 1),
            NielsenMove::P { i, j } => write!(f, "P {} {}", i + 1, j + 1),
            NielsenMove::I { i } => write!(f, "I {}", i + 1),
        }
    }
}

impl FromStr for NielsenMove {
    type Err = Error;

    fn from_str(s: &str) -> Result<NielsenMove> {
        let bad = || Error::Parse(format!("bad move {s:?}"));
        let mut parts = s.split_whitespace();
        let head = parts.next().ok_or_else(bad)?;
        let mut idx = || -> Result<usize> {
            let v: usize = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
            v.checked_sub(1).ok_or_else(bad)
        };
        let m = match head {
            "R+" | "R-" | "L+" | "L-" => {
                let (i, j) = (idx()?, idx()?);
                let sign = if head.ends_with('+') { Sign::Plus } else { Sign::Minus };
                if head.starts_with('R') {
                    NielsenMove::R { i, j, sign }
                } else {
                    NielsenMove::L { i, j, sign }
                }
            }
            "P" => NielsenMove::P { i: idx()?, j: idx()? },
            "I" => NielsenMove::I { i: idx()? },
            _ => return Err(bad()),
        };
        if parts.next().is_some() || m.check(usize::MAX).is_err() {
            return Err(bad());
        }
        Ok(m)
    }
}

impl Serialize for NielsenMove {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Every move label for k entries: R±, L± over ordered pairs, then P over
/// unordered pairs and I, when extended.
pub fn move_labels(k: usize, extended: bool) -> Vec<NielsenMove> {
    let mut out = Vec::new();
    for i in 0..k {
        for j in (0..k).filter(|&j| j != i) {
            for sign in [Sign::Plus, Sign::Minus] {
                out.push(NielsenMove::R { i, j, sign });
            }
            for sign in [Sign::Plus, Sign::Minus] {
                out.push(NielsenMove::L { i, j, sign });
            }
        }
    }
    if extended {
        for i in 0..k {
            for j in i + 1..k {
                out.push(NielsenMove::P { i, j });
            }
        }
        out.extend((0..k).map(|i| NielsenMove::I { i }));
    }
    out
}

/// An ordered tuple of group elements.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GenTuple {
    entries: Vec<ElemId>,
}

impl GenTuple {
    pub fn new(table: &GroupTable, entries: Vec<ElemId>) -> Result<GenTuple> {
        if entries.is_empty() {
            return Err(Error::Parse("a tuple needs at least one entry".into()));
        }
        if let Some(&x) = entries.iter().find(|&&x| !table.contains(x)) {
            return Err(Error::GroupMismatch {
                expected: table.id().to_string(),
                found: format!("entry {}", table.pgl().format_elem(x)),
            });
        }
        Ok(GenTuple { entries })
    }

    pub(crate) fn from_vec(entries: Vec<ElemId>) -> GenTuple {
        GenTuple { entries }
    }

    pub fn k(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[ElemId] {
        &self.entries
    }

    pub fn get(&self, i: usize) -> ElemId {
        self.entries[i]
    }

    pub fn generates(&self, table: &GroupTable) -> bool {
        generates(table, &self.entries)
    }

    /// Matrices separated by `;`, e.g. `1,1,0,1;1,0,1,1`.
    pub fn format(&self, table: &GroupTable) -> String {
        self.entries
            .iter()
            .map(|&x| table.format_elem(x))
            .collect::<Vec<_>>()
            .join(";")
    }

    pub fn parse(table: &GroupTable, s: &str) -> Result<GenTuple> {
        let entries = s
            .split(';')
            .map(|m| table.parse_elem(m.trim()))
            .collect::<Result<Vec<_>>>()?;
        GenTuple::new(table, entries)
    }

    /// A uniformly random generating tuple, by rejection sampling.
    pub fn random_generating<R: Rng + ?Sized>(
        table: &GroupTable,
        k: usize,
        rng: &mut R,
    ) -> Result<GenTuple> {
        for _ in 0..100_000 {
            let entries: Vec<ElemId> = (0..k).map(|_| table.random_element(rng)).collect();
            if generates(table, &entries) {
                return Ok(GenTuple { entries });
            }
        }
        Err(Error::NotGenerating)
    }

    pub fn apply(&mut self, table: &GroupTable, m: NielsenMove) -> Result<()> {
        m.check(self.k())?;
        self.apply_unchecked(table, m);
        Ok(())
    }

    #[inline]
    pub(crate) fn apply_unchecked(&mut self, table: &GroupTable, m: NielsenMove) {
        let e = &mut self.entries;
        let signed = |x: ElemId, sign: Sign| match sign {
            Sign::Plus => x,
            Sign::Minus => table.inv(x),
        };
        match m {
            NielsenMove::R { i, j, sign } => e[i] = table.mul(e[i], signed(e[j], sign)),
            NielsenMove::L { i, j, sign } => e[i] = table.mul(signed(e[j], sign), e[i]),
            NielsenMove::P { i, j } => e.swap(i, j),
            NielsenMove::I { i } => e[i] = table.inv(e[i]),
        }
    }
}

pub fn apply_move(table: &GroupTable, t: &GenTuple, m: NielsenMove) -> Result<GenTuple> {
    let mut out = t.clone();
    out.apply(table, m)?;
    Ok(out)
}

/// Distinct tuples one move away, in move-label order.
pub fn neighbors(table: &GroupTable, t: &GenTuple, extended: bool) -> Vec<GenTuple> {
    let mut out: Vec<GenTuple> = Vec::new();
    for m in move_labels(t.k(), extended) {
        let mut s = t.clone();
        s.apply_unchecked(table, m);
        if !out.contains(&s) {
            out.push(s);
        }
    }
    out
}

/// A start tuple and a replayable sequence of moves.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MovePath {
    pub start: GenTuple,
    pub moves: Vec<NielsenMove>,
}

impl MovePath {
    pub fn empty(start: GenTuple) -> MovePath {
        MovePath { start, moves: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }

    /// The end tuple.
    pub fn replay(&self, table: &GroupTable) -> Result<GenTuple> {
        let mut t = self.start.clone();
        for &m in &self.moves {
            t.apply(table, m)?;
        }
        Ok(t)
    }

    /// Replays and checks that every intermediate tuple generates.
    pub fn replay_checked(&self, table: &GroupTable) -> Result<GenTuple> {
        let mut lattice = SubgroupLattice::new(table);
        let mut t = self.start.clone();
        if !lattice.generates(t.entries()) {
            return Err(Error::NotGenerating);
        }
        for &m in &self.moves {
            t.apply(table, m)?;
            if !lattice.generates(t.entries()) {
                return Err(Error::NotGenerating);
            }
        }
        Ok(t)
    }

    pub fn to_text(&self) -> String {
        self.moves.iter().map(|m| format!("{m}\n")).collect()
    }

    /// Parses one move per line; blank lines and `#` comments are skipped.
    pub fn parse_moves(text: &str) -> Result<Vec<NielsenMove>> {
        text.lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::parse)
            .collect()
    }
}

/// Seed of walk number `index` in a batch started from `seed`.
pub fn walk_seed(seed: u64, index: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed.wrapping_add(index.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs the product replacement walk with a ChaCha8 generator seeded from
/// `seed`. Each step picks an ordered pair (i, j), i ≠ j, uniformly, then
/// one of R+, R-, L+, L- uniformly; the sample is a uniform entry of the
/// final tuple.
pub fn pra_walk(
    table: &GroupTable,
    t0: &GenTuple,
    steps: u64,
    seed: u64,
) -> Result<(GenTuple, ElemId)> {
    if !t0.generates(table) {
        return Err(Error::NotGenerating);
    }
    Ok(walk_unchecked(table, t0, steps, seed))
}

fn walk_unchecked(table: &GroupTable, t0: &GenTuple, steps: u64, seed: u64) -> (GenTuple, ElemId) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = t0.k();
    let mut t = t0.clone();
    if k >= 2 {
        let pairs = k * (k - 1);
        for _ in 0..steps {
            let p = rng.random_range(0..pairs);
            let i = p / (k - 1);
            let mut j = p % (k - 1);
            if j >= i {
                j += 1;
            }
            let m = match rng.random_range(0..4u32) {
                0 => NielsenMove::R { i, j, sign: Sign::Plus },
                1 => NielsenMove::R { i, j, sign: Sign::Minus },
                2 => NielsenMove::L { i, j, sign: Sign::Plus },
                _ => NielsenMove::L { i, j, sign: Sign::Minus },
            };
            t.apply_unchecked(table, m);
        }
    }
    let x = t.get(rng.random_range(0..k));
    (t, x)
}

/// Counts of sampled elements over `walks` independent walks from `t0`,
/// indexed by position in `table.elements()`. Walk `i` uses
/// [`walk_seed`]`(seed, i)`; the result does not depend on the thread count.
pub fn pra_sample_counts(
    table: &GroupTable,
    t0: &GenTuple,
    steps: u64,
    walks: u64,
    seed: u64,
) -> Result<Vec<u64>> {
    if !t0.generates(table) {
        return Err(Error::NotGenerating);
    }
    let n = table.order();
    let counts = (0..walks)
        .into_par_iter()
        .fold(
            || vec![0u64; n],
            |mut acc, i| {
                let (_, x) = walk_unchecked(table, t0, steps, walk_seed(seed, i));
                acc[table.local_index(x).unwrap() as usize] += 1;
                acc
            },
        )
        .reduce(
            || vec![0u64; n],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok(counts)
}

/// Packs tuples as `Σ r_i n^(k-1-i)` with `r_i` the local rank of entry i.
#[derive(Clone, Copy, Debug)]
pub struct TupleCodec {
    n: u64,
    k: usize,
}

impl TupleCodec {
    pub fn new(n: usize, k: usize) -> TupleCodec {
        TupleCodec { n: n as u64, k }
    }

    /// `n^k`, or `None` on overflow.
    pub fn state_count(&self) -> Option<u128> {
        (self.n as u128).checked_pow(self.k as u32)
    }

    pub fn encode(&self, table: &GroupTable, t: &GenTuple) -> u64 {
        t.entries()
            .iter()
            .fold(0, |acc, &x| acc * self.n + table.local_index(x).unwrap() as u64)
    }

    pub fn decode(&self, table: &GroupTable, mut code: u64) -> GenTuple {
        let mut entries = vec![table.identity(); self.k];
        for slot in entries.iter_mut().rev() {
            *slot = table.member((code % self.n) as u32);
            code /= self.n;
        }
        GenTuple::from_vec(entries)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ComponentTiming {
    #[serde(rename = "runtime-ms")]
    pub runtime_ms: u64,
    pub workers: usize,
}

/// Result of an exhaustive component computation.
#[derive(Clone, Debug, Serialize)]
pub struct ComponentReport {
    pub group: String,
    pub kind: GroupKind,
    pub q: u32,
    pub k: usize,
    pub extended: bool,
    #[serde(rename = "state-count")]
    pub state_count: u64,
    #[serde(rename = "vertex-count")]
    pub vertex_count: u64,
    #[serde(rename = "component-count")]
    pub component_count: u64,
    /// Sizes in decreasing order.
    #[serde(rename = "component-sizes")]
    pub component_sizes: Vec<u64>,
    #[serde(rename = "memory-bytes")]
    pub memory_bytes: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<ComponentTiming>,
}

/// Component label of every vertex; a label is the least packed code in
/// its component.
pub struct ComponentMap {
    codec: TupleCodec,
    vertices: Vec<u64>,
    parent: Vec<u32>,
}

impl ComponentMap {
    pub fn codec(&self) -> TupleCodec {
        self.codec
    }

    pub fn is_vertex(&self, code: u64) -> bool {
        let c = code as usize;
        self.vertices[c / 64] >> (c % 64) & 1 == 1
    }

    pub fn label(&self, code: u64) -> Option<u64> {
        self.is_vertex(code).then(|| self.parent[code as usize] as u64)
    }

    pub fn label_of(&self, table: &GroupTable, t: &GenTuple) -> Option<u64> {
        self.label(self.codec.encode(table, t))
    }

    /// Codes of all vertices, ascending.
    pub fn vertex_codes(&self) -> impl Iterator<Item = u64> + '_ {
        self.vertices.iter().enumerate().flat_map(|(w, &bits)| {
            let mut b = bits;
            std::iter::from_fn(move || {
                (b != 0).then(|| {
                    let t = b.trailing_zeros() as u64;
                    b &= b - 1;
                    w as u64 * 64 + t
                })
            })
        })
    }
}

#[derive(Clone, Debug)]
pub struct ComponentOptions {
    pub extended: bool,
    pub state_budget: u64,
    /// Worker threads; 0 uses the global pool.
    pub workers: usize,
}

impl Default for ComponentOptions {
    fn default() -> Self {
        ComponentOptions {
            extended: true,
            state_budget: DEFAULT_STATE_BUDGET,
            workers: 0,
        }
    }
}

/// Local multiplication and inversion on ranks.
struct LocalOps<'a> {
    table: &'a GroupTable,
    n: usize,
    mul: Option<Vec<u16>>,
    inv: Vec<u32>,
}

impl<'a> LocalOps<'a> {
    fn new(table: &'a GroupTable) -> Self {
        let n = table.order();
        let mul = (n <= 4096).then(|| {
            let mut t = vec![0u16; n * n];
            t.par_chunks_mut(n).enumerate().for_each(|(a, row)| {
                let x = table.member(a as u32);
                for (b, slot) in row.iter_mut().enumerate() {
                    let y = table.member(b as u32);
                    *slot = table.local_index(table.mul(x, y)).unwrap() as u16;
                }
            });
            t
        });
        let inv = table
            .elements()
            .iter()
            .map(|&x| table.local_index(table.inv(x)).unwrap())
            .collect();
        LocalOps { table, n, mul, inv }
    }

    #[inline]
    fn mul(&self, a: u32, b: u32) -> u32 {
        match &self.mul {
            Some(t) => t[a as usize * self.n + b as usize] as u32,
            None => {
                let t = self.table;
                t.local_index(t.mul(t.member(a), t.member(b))).unwrap()
            }
        }
    }

    #[inline]
    fn apply(&self, r: &mut [u32], m: NielsenMove) {
        let signed = |x: u32, s: Sign| match s {
            Sign::Plus => x,
            Sign::Minus => self.inv[x as usize],
        };
        match m {
            NielsenMove::R { i, j, sign } => r[i] = self.mul(r[i], signed(r[j], sign)),
            NielsenMove::L { i, j, sign } => r[i] = self.mul(signed(r[j], sign), r[i]),
            NielsenMove::P { i, j } => r.swap(i, j),
            NielsenMove::I { i } => r[i] = self.inv[r[i] as usize],
        }
    }
}

fn find(parent: &[AtomicU32], mut x: u32) -> u32 {
    loop {
        let p = parent[x as usize].load(Ordering::Relaxed);
        if p == x {
            return x;
        }
        let gp = parent[p as usize].load(Ordering::Relaxed);
        if gp != p {
            // path halving; losing the race is harmless
            let _ = parent[x as usize].compare_exchange_weak(p, gp, Ordering::Relaxed, Ordering::Relaxed);
        }
        x = gp;
    }
}

/// Links the larger root under the smaller, so every root is the least
/// code of its tree.
fn union(parent: &[AtomicU32], a: u32, b: u32) {
    let (mut a, mut b) = (a, b);
    loop {
        a = find(parent, a);
        b = find(parent, b);
        if a == b {
            return;
        }
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        if parent[hi as usize]
            .compare_exchange(hi, lo, Ordering::AcqRel, Ordering::Relaxed)
            .is_ok()
        {
            return;
        }
    }
}

fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if workers == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Parse(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Estimated bytes for an exhaustive run over `states` packed states.
pub fn estimated_bytes(states: u128) -> u128 {
    states * 4 + states / 8
}

/// Exact components of Γ_k(G) or Γ̃_k(G) by union-find over all packed
/// k-tuples that generate G.
pub fn components(
    table: &GroupTable,
    k: usize,
    opts: &ComponentOptions,
) -> Result<(ComponentReport, ComponentMap)> {
    if k == 0 {
        return Err(Error::Parse("k must be at least 1".into()));
    }
    let start = Instant::now();
    let n = table.order();
    let codec = TupleCodec::new(n, k);
    let required = codec.state_count().unwrap_or(u128::MAX);
    if required > opts.state_budget as u128 || required >= u32::MAX as u128 {
        return Err(Error::BudgetExceeded {
            required,
            budget: opts.state_budget,
            bytes: estimated_bytes(required),
        });
    }
    let states = required as u64;

    // Subgroup generated by each (k-1)-prefix, then for each such subgroup
    // the set of last entries completing it to a generating tuple.
    let mut lattice = SubgroupLattice::new(table);
    let mut prefix = vec![lattice.trivial()];
    for _ in 1..k {
        let mut next = Vec::with_capacity(prefix.len() * n);
        for &s in &prefix {
            for &x in table.elements() {
                next.push(lattice.join(s, x));
            }
        }
        prefix = next;
    }
    let mut completes: HashMap<u32, Vec<u64>> = HashMap::new();
    for &s in &prefix {
        completes.entry(s).or_insert_with(|| {
            let mut bits = vec![0u64; n.div_ceil(64)];
            for (r, &x) in table.elements().iter().enumerate() {
                let j = lattice.join(s, x);
                if lattice.is_full(j) {
                    bits[r / 64] |= 1 << (r % 64);
                }
            }
            bits
        });
    }

    let ops = LocalOps::new(table);
    let moves: Vec<NielsenMove> = move_labels(k, opts.extended)
        .into_iter()
        .filter(|m| {
            !matches!(
                m,
                NielsenMove::R { sign: Sign::Minus, .. } | NielsenMove::L { sign: Sign::Minus, .. }
            )
        })
        .collect();

    let (vertices, parent) = with_workers(opts.workers, || {
        let mut vertices = vec![0u64; (states as usize).div_ceil(64)];
        vertices.par_iter_mut().enumerate().for_each(|(w, word)| {
            let lo = w as u64 * 64;
            let hi = (lo + 64).min(states);
            for c in lo..hi {
                let s = prefix[(c / n as u64) as usize];
                let r = (c % n as u64) as usize;
                if completes[&s][r / 64] >> (r % 64) & 1 == 1 {
                    *word |= 1 << (c - lo);
                }
            }
        });

        let parent: Vec<AtomicU32> = (0..states as u32).map(AtomicU32::new).collect();
        let is_vertex = |c: u64| vertices[(c / 64) as usize] >> (c % 64) & 1 == 1;
        (0..states as u32)
            .into_par_iter()
            .with_min_len(1024)
            .map(u64::from)
            .filter(|&c| is_vertex(c))
            .for_each_init(
                || (vec![0u32; k], vec![0u32; k]),
                |(digits, work), c| {
                    let mut rest = c;
                    for d in digits.iter_mut().rev() {
                        *d = (rest % n as u64) as u32;
                        rest /= n as u64;
                    }
                    for &m in &moves {
                        work.copy_from_slice(digits);
                        ops.apply(work, m);
                        let c2 = work.iter().fold(0u64, |a, &d| a * n as u64 + d as u64);
                        debug_assert!(is_vertex(c2));
                        union(&parent, c as u32, c2 as u32);
                    }
                },
            );
        let parent: Vec<u32> = parent.into_iter().map(AtomicU32::into_inner).collect();
        (vertices, parent)
    })?;

    // Resolve every vertex to its root; roots are already least codes.
    let mut parent = parent;
    let mut sizes: HashMap<u32, u64> = HashMap::new();
    let mut vertex_count = 0u64;
    for c in 0..states as usize {
        if vertices[c / 64] >> (c % 64) & 1 == 1 {
            let p = parent[c];
            let root = parent[p as usize];
            parent[c] = root;
            debug_assert_eq!(parent[root as usize], root);
            *sizes.entry(root).or_default() += 1;
            vertex_count += 1;
        }
    }
    let mut component_sizes: Vec<u64> = sizes.into_values().collect();
    component_sizes.sort_unstable_by(|a, b| b.cmp(a));
    let memory_bytes = states * 4
        + vertices.len() as u64 * 8
        + prefix.len() as u64 * 4
        + ops.mul.as_ref().map_or(0, |m| m.len() as u64 * 2);
    let report = ComponentReport {
        group: table.id().to_string(),
        kind: table.kind(),
        q: table.q(),
        k,
        extended: opts.extended,
        state_count: states,
        vertex_count,
        component_count: component_sizes.len() as u64,
        component_sizes,
        memory_bytes,
        timing: Some(ComponentTiming {
            runtime_ms: start.elapsed().as_millis() as u64,
            workers: if opts.workers == 0 {
                rayon::current_num_threads()
            } else {
                opts.workers
            },
        }),
    };
    Ok((report, ComponentMap { codec, vertices, parent }))
}

/// A move path from `t1` to `t2` by bidirectional breadth-first search,
/// replay-verified. At most `max_states` tuples are stored.
pub fn find_path(
    table: &GroupTable,
    t1: &GenTuple,
    t2: &GenTuple,
    extended: bool,
    max_states: usize,
) -> Result<MovePath> {
    if t1.k() != t2.k() {
        return Err(Error::NotConnected);
    }
    if !t1.generates(table) || !t2.generates(table) {
        return Err(Error::NotGenerating);
    }
    let labels = move_labels(t1.k(), extended);
    // tuple -> (previous tuple, move from previous)
    let mut fwd: HashMap<GenTuple, Option<(GenTuple, NielsenMove)>> = HashMap::new();
    let mut bwd: HashMap<GenTuple, Option<(GenTuple, NielsenMove)>> = HashMap::new();
    fwd.insert(t1.clone(), None);
    bwd.insert(t2.clone(), None);
    let mut ffront = vec![t1.clone()];
    let mut bfront = vec![t2.clone()];
    let mut meet = (t1 == t2).then(|| t1.clone());
    while meet.is_none() {
        if ffront.is_empty() || bfront.is_empty() {
            return Err(Error::NotConnected);
        }
        if fwd.len() + bwd.len() > max_states {
            return Err(Error::SearchBudget(format!(
                "path search stored more than {max_states} tuples"
            )));
        }
        let forward = ffront.len() <= bfront.len();
        let (front, seen, other) = if forward {
            (&mut ffront, &mut fwd, &bwd)
        } else {
            (&mut bfront, &mut bwd, &fwd)
        };
        let mut next = Vec::new();
        'level: for t in front.iter() {
            for &m in &labels {
                let mut s = t.clone();
                s.apply_unchecked(table, m);
                if seen.contains_key(&s) {
                    continue;
                }
                seen.insert(s.clone(), Some((t.clone(), m)));
                if other.contains_key(&s) {
                    meet = Some(s);
                    break 'level;
                }
                next.push(s);
            }
        }
        *front = next;
    }
    let meet = meet.unwrap();
    let mut moves = Vec::new();
    let mut cur = meet.clone();
    while let Some(Some((prev, m))) = fwd.get(&cur) {
        moves.push(*m);
        cur = prev.clone();
    }
    moves.reverse();
    let mut cur = meet;
    while let Some(Some((prev, m))) = bwd.get(&cur) {
        moves.push(m.inverse());
        cur = prev.clone();
    }
    let path = MovePath { start: t1.clone(), moves };
    if &path.replay_checked(table)? != t2 {
        return Err(Error::InvalidMove("path replay did not reach the target".into()));
    }
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupKind::Psl;

    fn psl5() -> GroupTable {
        GroupTable::build(Psl, 5, 1).unwrap()
    }

    #[test]
    fn move_examples() {
        let g = psl5();
        let a = g.parse_elem("1,1,0,1").unwrap();
        let b = g.parse_elem("1,0,1,1").unwrap();
        let c = g.parse_elem("0,1,4,0").unwrap();
        let t = GenTuple::new(&g, vec![a, b, c]).unwrap();
        let r = apply_move(&g, &t, NielsenMove::R { i: 0, j: 1, sign: Sign::Plus }).unwrap();
        assert_eq!(r.entries(), &[g.mul(a, b), b, c]);
        let l = apply_move(&g, &t, "L- 2 1".parse().unwrap()).unwrap();
        assert_eq!(l.entries(), &[a, g.mul(g.inv(a), b), c]);
        let i = NielsenMove::I { i: 0 };
        assert_eq!(apply_move(&g, &apply_move(&g, &t, i).unwrap(), i).unwrap(), t);
        assert!(apply_move(&g, &t, NielsenMove::P { i: 1, j: 1 }).is_err());
        assert!(apply_move(&g, &t, NielsenMove::I { i: 3 }).is_err());
    }

    #[test]
    fn labels_and_text() {
        assert_eq!(move_labels(2, false).len(), 8);
        assert_eq!(move_labels(3, true).len(), 24 + 3 + 3);
        for m in move_labels(4, true) {
            assert_eq!(m.to_string().parse::<NielsenMove>().unwrap(), m);
        }
        assert!("R+ 0 1".parse::<NielsenMove>().is_err());
        assert!("X 1".parse::<NielsenMove>().is_err());
        assert!("I 1 2".parse::<NielsenMove>().is_err());
    }

    #[test]
    fn codec_round_trip() {
        let g = psl5();
        let codec = TupleCodec::new(g.order(), 3);
        for code in [0u64, 1, 59, 60, 215_999] {
            assert_eq!(codec.encode(&g, &codec.decode(&g, code)), code);
        }
    }

    #[test]
    fn walk_is_reproducible() {
        let g = psl5();
        let t = GenTuple::parse(&g, "1,1,0,1;1,0,1,1;1,0,0,1;1,0,0,1").unwrap();
        let (a, x) = pra_walk(&g, &t, 100, 9).unwrap();
        let (b, y) = pra_walk(&g, &t, 100, 9).unwrap();
        assert_eq!((a.clone(), x), (b, y));
        assert!(a.generates(&g));
        let (c, z) = pra_walk(&g, &t, 0, 1).unwrap();
        assert_eq!(c, t);
        assert!(t.entries().contains(&z));
        let bad = GenTuple::parse(&g, "1,1,0,1;1,0,0,1").unwrap();
        assert!(matches!(pra_walk(&g, &bad, 1, 1), Err(Error::NotGenerating)));
    }

    #[test]
    fn components_psl5_k2_both_graphs() {
        let g = psl5();
        let opts = ComponentOptions { extended: false, ..Default::default() };
        let (plain, _) = components(&g, 2, &opts).unwrap();
        let (ext, _) = components(&g, 2, &ComponentOptions::default()).unwrap();
        assert_eq!(plain.vertex_count, ext.vertex_count);
        assert_eq!(plain.component_sizes.iter().sum::<u64>(), plain.vertex_count);
        assert!(ext.component_count <= plain.component_count);
        assert!(plain.component_count <= 2 * ext.component_count);
    }

    #[test]
    fn budget_is_enforced() {
        let g = psl5();
        let opts = ComponentOptions { state_budget: 1000, ..Default::default() };
        assert!(matches!(
            components(&g, 3, &opts),
            Err(Error::BudgetExceeded { required: 216_000, .. })
        ));
    }

    #[test]
    fn path_examples() {
        let g = psl5();
        let t = GenTuple::parse(&g, "1,1,0,1;1,0,1,1;1,0,0,1").unwrap();
        assert!(find_path(&g, &t, &t, true, 1000).unwrap().is_empty());
        let m = NielsenMove::L { i: 2, j: 0, sign: Sign::Minus };
        let s = apply_move(&g, &t, m).unwrap();
        let p = find_path(&g, &t, &s, true, 1000).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p.replay(&g).unwrap(), s);
        let text = p.to_text();
        assert_eq!(MovePath::parse_moves(&text).unwrap(), p.moves);
    }
}
