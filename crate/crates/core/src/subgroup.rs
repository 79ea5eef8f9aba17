//! Explicitly enumerated subgroups and their classification.
//!
//! Subgroups are stored as closed element sets over the shared PGL(2,q)
//! enumeration, so membership, normalizers, centralizers and orbit
//! structure are all plain filters.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::sync::OnceLock;

use fixedbitset::FixedBitSet;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::group::{ElementType, GroupKind};
use crate::table::{ElemId, GroupTable};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subgroup {
    kind: GroupKind,
    members: FixedBitSet,
    elements: Vec<ElemId>,
    generators: Vec<ElemId>,
    orbits: Vec<Vec<u32>>,
}

/// Position of a subgroup in the subgroup table of PSL(2,q) / PGL(2,q).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SubgroupClass {
    Trivial,
    Cyclic,
    ElementaryAbelian,
    BorelType,
    Dihedral,
    A4,
    S4,
    A5,
    PslSubfield { q1: u32 },
    PglSubfield { q1: u32 },
    FullGroup,
    OtherStructural,
}

impl SubgroupClass {
    /// A4, S4 or A5.
    pub fn is_small(self) -> bool {
        matches!(self, SubgroupClass::A4 | SubgroupClass::S4 | SubgroupClass::A5)
    }

    /// The subfield order q1 of a PSL(2,q1) or PGL(2,q1) subgroup.
    pub fn subfield(self) -> Option<u32> {
        match self {
            SubgroupClass::PslSubfield { q1 } | SubgroupClass::PglSubfield { q1 } => Some(q1),
            _ => None,
        }
    }

    /// Labels that only structural subgroups can carry.
    pub fn is_structural_label(self) -> bool {
        matches!(
            self,
            SubgroupClass::Trivial
                | SubgroupClass::Cyclic
                | SubgroupClass::ElementaryAbelian
                | SubgroupClass::BorelType
                | SubgroupClass::Dihedral
                | SubgroupClass::OtherStructural
        )
    }
}

impl fmt::Display for SubgroupClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SubgroupClass::Trivial => f.write_str("trivial"),
            SubgroupClass::Cyclic => f.write_str("cyclic"),
            SubgroupClass::ElementaryAbelian => f.write_str("elementary-abelian-p"),
            SubgroupClass::BorelType => f.write_str("borel-type"),
            SubgroupClass::Dihedral => f.write_str("dihedral"),
            SubgroupClass::A4 => f.write_str("A4"),
            SubgroupClass::S4 => f.write_str("S4"),
            SubgroupClass::A5 => f.write_str("A5"),
            SubgroupClass::PslSubfield { q1 } => write!(f, "psl-subfield({q1})"),
            SubgroupClass::PglSubfield { q1 } => write!(f, "pgl-subfield({q1})"),
            SubgroupClass::FullGroup => f.write_str("full-group"),
            SubgroupClass::OtherStructural => f.write_str("other-structural"),
        }
    }
}

impl Serialize for SubgroupClass {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// JSON form of a subgroup.
#[derive(Clone, Debug, Serialize)]
pub struct SubgroupRecord {
    pub ambient: String,
    pub order: usize,
    pub class: SubgroupClass,
    #[serde(rename = "generator-codes")]
    pub generator_codes: Vec<String>,
    #[serde(rename = "orbit-sizes")]
    pub orbit_sizes: Vec<usize>,
}

impl Subgroup {
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    /// Kind of the ambient group the subgroup was computed in.
    pub fn ambient_kind(&self) -> GroupKind {
        self.kind
    }

    #[inline]
    pub fn contains(&self, x: ElemId) -> bool {
        self.members.contains(x.index())
    }

    pub fn elements(&self) -> &[ElemId] {
        &self.elements
    }

    pub fn generators(&self) -> &[ElemId] {
        &self.generators
    }

    pub fn members(&self) -> &FixedBitSet {
        &self.members
    }

    /// Orbits on the projective line, as dense point indices.
    pub fn orbits(&self) -> &[Vec<u32>] {
        &self.orbits
    }

    pub fn orbit_sizes(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.orbits.iter().map(Vec::len).collect();
        v.sort_unstable();
        v
    }

    pub fn is_subgroup_of(&self, other: &Subgroup) -> bool {
        self.members.is_subset(&other.members)
    }

    pub fn is_abelian(&self, table: &GroupTable) -> bool {
        let g = &self.generators;
        g.iter()
            .enumerate()
            .all(|(i, &a)| g[i + 1..].iter().all(|&b| table.commute(a, b)))
    }

    /// Set of element orders.
    pub fn order_census(&self, table: &GroupTable) -> BTreeSet<u32> {
        self.elements.iter().map(|&x| table.order_of(x)).collect()
    }

    pub fn record(&self, table: &GroupTable) -> Result<SubgroupRecord> {
        Ok(SubgroupRecord {
            ambient: table.id().to_string(),
            order: self.order(),
            class: classify_subgroup(table, self)?,
            generator_codes: self
                .generators
                .iter()
                .map(|&g| table.code(g).to_string())
                .collect(),
            orbit_sizes: self.orbit_sizes(),
        })
    }

    fn from_parts(
        table: &GroupTable,
        members: FixedBitSet,
        generators: Vec<ElemId>,
    ) -> Subgroup {
        let elements: Vec<ElemId> = members.ones().map(|i| ElemId(i as u32)).collect();
        let orbits = orbits(table, &generators);
        Subgroup {
            kind: table.kind(),
            members,
            elements,
            generators,
            orbits,
        }
    }

    /// Wraps a closed element set, choosing a small generating set greedily.
    pub fn from_elements(table: &GroupTable, elems: &[ElemId]) -> Subgroup {
        let mut members = FixedBitSet::with_capacity(table.pgl_order());
        for &x in elems {
            members.insert(x.index());
        }
        let mut sorted: Vec<ElemId> = elems.to_vec();
        sorted.sort_by_key(|&x| (std::cmp::Reverse(table.order_of(x)), x));
        let mut gens = Vec::new();
        let mut cur = closure_set(table, &[]);
        for x in sorted {
            if !cur.contains(x.index()) {
                gens.push(x);
                cur = closure_set(table, &gens);
            }
        }
        debug_assert_eq!(cur, members, "element set is not closed");
        Subgroup::from_parts(table, members, gens)
    }
}

fn closure_set(table: &GroupTable, gens: &[ElemId]) -> FixedBitSet {
    let mut seen = FixedBitSet::with_capacity(table.pgl_order());
    let id = table.identity();
    seen.insert(id.index());
    let mut queue = vec![id];
    let mut head = 0;
    while head < queue.len() {
        let e = queue[head];
        head += 1;
        for &s in gens {
            let next = table.mul(s, e);
            if !seen.put(next.index()) {
                queue.push(next);
            }
        }
    }
    seen
}

/// Point permutation of `x` on the projective line.
pub(crate) fn point_permutation(table: &GroupTable, x: ElemId) -> Vec<u32> {
    (0..=table.q()).map(|z| table.act(x, z)).collect()
}

fn orbits(table: &GroupTable, gens: &[ElemId]) -> Vec<Vec<u32>> {
    let npts = table.q() as usize + 1;
    let perms: Vec<Vec<u32>> = gens.iter().map(|&g| point_permutation(table, g)).collect();
    let mut seen = vec![false; npts];
    let mut out = Vec::new();
    for start in 0..npts {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut orbit = vec![start as u32];
        let mut head = 0;
        while head < orbit.len() {
            let z = orbit[head] as usize;
            head += 1;
            for perm in &perms {
                let w = perm[z] as usize;
                if !seen[w] {
                    seen[w] = true;
                    orbit.push(w as u32);
                }
            }
        }
        orbit.sort_unstable();
        out.push(orbit);
    }
    out
}

/// The subgroup generated by `gens`, by breadth-first closure.
pub fn closure(table: &GroupTable, gens: &[ElemId]) -> Result<Subgroup> {
    for &g in gens {
        if !table.contains(g) {
            return Err(Error::GroupMismatch {
                expected: table.id().to_string(),
                found: format!("element {}", table.id().pgl().format_elem(&table.pgl().elem(g))),
            });
        }
    }
    let mut gens: Vec<ElemId> = gens.to_vec();
    gens.retain(|&g| g != table.identity());
    gens.dedup();
    let members = closure_set(table, &gens);
    Ok(Subgroup::from_parts(table, members, gens))
}

/// Whether the entries generate the whole group.
pub fn generates(table: &GroupTable, entries: &[ElemId]) -> bool {
    entries.iter().all(|&x| table.contains(x))
        && closure_set(table, entries).count_ones(..) == table.order()
}

/// Some entry can be dropped with the rest still generating.
pub fn is_redundant(table: &GroupTable, entries: &[ElemId]) -> bool {
    redundant_index(table, entries).is_some()
}

/// First index whose removal leaves a generating tuple.
pub fn redundant_index(table: &GroupTable, entries: &[ElemId]) -> Option<usize> {
    (0..entries.len()).find(|&i| {
        let rest: Vec<ElemId> = entries
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, &x)| x)
            .collect();
        generates(table, &rest)
    })
}

/// Normalizers in PGL(2,q) of the maximal non-split tori.
fn nonsplit_torus_normalizers(table: &GroupTable) -> &'static [FixedBitSet] {
    // Keyed by q; a field of a given order is unique up to our canonical modulus.
    static CACHE: OnceLock<std::sync::Mutex<HashMap<u32, &'static [FixedBitSet]>>> =
        OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(v) = cache.lock().unwrap().get(&table.q()) {
        return v;
    }
    let pgl = table.pgl();
    let q = pgl.q();
    let mut tori: HashSet<FixedBitSet> = HashSet::new();
    let mut out = Vec::new();
    for w in pgl.pgl_elements() {
        if pgl.element_type(w) != ElementType::NonSplit || pgl.order_of(w) != q + 1 {
            continue;
        }
        let torus = closure_set(&pgl, &[w]);
        if tori.contains(&torus) {
            continue;
        }
        let mut norm = FixedBitSet::with_capacity(pgl.pgl_order());
        for g in pgl.pgl_elements() {
            if torus.contains(pgl.conj(w, g).index()) {
                norm.insert(g.index());
            }
        }
        tori.insert(torus);
        out.push(norm);
    }
    let leaked: &'static [FixedBitSet] = Box::leak(out.into_boxed_slice());
    cache.lock().unwrap().insert(q, leaked);
    leaked
}

/// Whether a proper subgroup lies in a point stabilizer, in the stabilizer
/// of a point pair, or in the normalizer of a non-split torus.
pub fn is_structural(table: &GroupTable, h: &Subgroup) -> Result<bool> {
    if h.order() >= table.order() {
        return Err(Error::NotProper);
    }
    if h.orbits.iter().any(|o| o.len() <= 2) {
        return Ok(true);
    }
    Ok(nonsplit_torus_normalizers(table)
        .iter()
        .any(|n| h.members.is_subset(n)))
}

fn is_dihedral(table: &GroupTable, h: &Subgroup) -> bool {
    let n = h.order();
    if n % 2 != 0 {
        return false;
    }
    let Some(&c) = h
        .elements
        .iter()
        .find(|&&x| table.order_of(x) as usize == n / 2)
    else {
        return false;
    };
    let rot = closure_set(table, &[c]);
    h.elements
        .iter()
        .all(|&x| rot.contains(x.index()) || table.order_of(x) == 2)
}

/// Places a subgroup in the subgroup table; small labels take precedence
/// over subfield labels (PSL(2,3) is labelled A4, PSL(2,5) is A5).
pub fn classify_subgroup(table: &GroupTable, h: &Subgroup) -> Result<SubgroupClass> {
    let n = h.order();
    if n == 1 {
        return Ok(SubgroupClass::Trivial);
    }
    let inside = h.elements.iter().all(|&x| table.contains(x));
    if inside && n == table.order() {
        return Ok(SubgroupClass::FullGroup);
    }
    let p = table.p();
    let census = h.order_census(table);
    if h.is_abelian(table) {
        if census.contains(&(n as u32)) {
            return Ok(SubgroupClass::Cyclic);
        }
        if census.iter().all(|&o| o == 1 || o == p) {
            return Ok(SubgroupClass::ElementaryAbelian);
        }
        if n == 4 {
            // Klein four group, the dihedral group of order 4.
            return Ok(SubgroupClass::Dihedral);
        }
        return Err(Error::NotInDicksonTable { order: n });
    }
    if is_dihedral(table, h) {
        return Ok(SubgroupClass::Dihedral);
    }
    let census: Vec<u32> = census.into_iter().collect();
    match (n, census.as_slice()) {
        (12, [1, 2, 3]) => return Ok(SubgroupClass::A4),
        (24, [1, 2, 3, 4]) => return Ok(SubgroupClass::S4),
        (60, [1, 2, 3, 5]) => return Ok(SubgroupClass::A5),
        _ => {}
    }
    let proper = n < table.order();
    if proper && is_structural(table, h)? {
        let fixed = h.orbits.iter().any(|o| o.len() == 1);
        return Ok(if fixed && n % p as usize == 0 {
            SubgroupClass::BorelType
        } else {
            SubgroupClass::OtherStructural
        });
    }
    let e = table.id().field().e();
    for f in (1..=e).filter(|f| e % f == 0) {
        let q1 = p.pow(f) as usize;
        if q1 <= 3 {
            continue;
        }
        let pgl_order = q1 * (q1 * q1 - 1);
        if n == pgl_order / 2 {
            return Ok(SubgroupClass::PslSubfield { q1: q1 as u32 });
        }
        if n == pgl_order {
            return Ok(SubgroupClass::PglSubfield { q1: q1 as u32 });
        }
    }
    Err(Error::NotInDicksonTable { order: n })
}

/// `N_PGL(2,q)(H)`, by filtering PGL(2,q).
pub fn normalizer(table: &GroupTable, h: &Subgroup) -> Subgroup {
    let pgl = table.pgl();
    let elems: Vec<ElemId> = pgl
        .pgl_elements()
        .filter(|&g| h.generators.iter().all(|&x| h.contains(pgl.conj(x, g))))
        .collect();
    Subgroup::from_elements(&pgl, &elems)
}

#[derive(Clone, Debug)]
pub struct Centralizer {
    pub subgroup: Subgroup,
    /// A generator when the centralizer is cyclic.
    pub generator: Option<ElemId>,
}

/// `C_H(w)`.
pub fn centralizer(table: &GroupTable, h: &Subgroup, w: ElemId) -> Centralizer {
    let elems: Vec<ElemId> = h
        .elements
        .iter()
        .copied()
        .filter(|&x| table.commute(x, w))
        .collect();
    let generator = elems
        .iter()
        .copied()
        .find(|&x| table.order_of(x) as usize == elems.len());
    let view = if h.kind == GroupKind::Pgl { table.pgl() } else { table.clone() };
    Centralizer {
        subgroup: Subgroup::from_elements(&view, &elems),
        generator,
    }
}

/// Some g in PGL(2,q) with `g^-1 H g = K`, by exhaustive search.
pub fn find_conjugator(table: &GroupTable, h: &Subgroup, k: &Subgroup) -> Result<ElemId> {
    let pgl = table.pgl();
    if h.order() == k.order() {
        if let Some(g) = pgl
            .pgl_elements()
            .find(|&g| h.generators.iter().all(|&x| k.contains(pgl.conj(x, g))))
        {
            return Ok(g);
        }
    }
    Err(Error::NoConjugator { q: table.q() })
}

/// Interned subgroups with a memoized join table `(S, x) -> <S, x>`.
///
/// Generation of a tuple depends only on its entry set, and folding joins
/// from the trivial subgroup answers it with one table lookup per entry
/// once the relevant joins are cached.
pub struct SubgroupLattice<'a> {
    table: &'a GroupTable,
    sets: Vec<FixedBitSet>,
    gens: Vec<Vec<ElemId>>,
    orders: Vec<usize>,
    intern: HashMap<FixedBitSet, u32>,
    joins: Vec<Vec<u32>>,
    closures: usize,
}

const UNKNOWN: u32 = u32::MAX;

impl<'a> SubgroupLattice<'a> {
    pub fn new(table: &'a GroupTable) -> Self {
        let mut lattice = SubgroupLattice {
            table,
            sets: Vec::new(),
            gens: Vec::new(),
            orders: Vec::new(),
            intern: HashMap::new(),
            joins: Vec::new(),
            closures: 0,
        };
        lattice.insert(closure_set(table, &[]), Vec::new());
        lattice
    }

    fn insert(&mut self, set: FixedBitSet, gens: Vec<ElemId>) -> u32 {
        if let Some(&id) = self.intern.get(&set) {
            return id;
        }
        let id = self.sets.len() as u32;
        self.orders.push(set.count_ones(..));
        self.intern.insert(set.clone(), id);
        self.sets.push(set);
        self.gens.push(gens);
        self.joins.push(Vec::new());
        id
    }

    pub fn table(&self) -> &'a GroupTable {
        self.table
    }

    pub fn trivial(&self) -> u32 {
        0
    }

    /// Number of distinct subgroups seen so far.
    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// Number of closures computed so far.
    pub fn closures_computed(&self) -> usize {
        self.closures
    }

    pub fn order(&self, sid: u32) -> usize {
        self.orders[sid as usize]
    }

    pub fn is_full(&self, sid: u32) -> bool {
        self.orders[sid as usize] == self.table.order()
    }

    pub fn contains(&self, sid: u32, x: ElemId) -> bool {
        self.sets[sid as usize].contains(x.index())
    }

    /// `<S, x>` for a member x of the ambient group.
    pub fn join(&mut self, sid: u32, x: ElemId) -> u32 {
        let local = self
            .table
            .local_index(x)
            .expect("element outside the ambient group") as usize;
        let row = &mut self.joins[sid as usize];
        if row.is_empty() {
            row.resize(self.table.order(), UNKNOWN);
        }
        let cached = row[local];
        if cached != UNKNOWN {
            return cached;
        }
        let result = if self.sets[sid as usize].contains(x.index()) {
            sid
        } else {
            let mut gens = self.gens[sid as usize].clone();
            gens.push(x);
            self.closures += 1;
            let set = closure_set(self.table, &gens);
            self.insert(set, gens)
        };
        self.joins[sid as usize][local] = result;
        result
    }

    /// Id of the subgroup generated by `xs`.
    pub fn generated(&mut self, xs: &[ElemId]) -> u32 {
        xs.iter().fold(self.trivial(), |s, &x| self.join(s, x))
    }

    pub fn generates(&mut self, xs: &[ElemId]) -> bool {
        let s = self.generated(xs);
        self.is_full(s)
    }

    pub fn redundant_index(&mut self, xs: &[ElemId]) -> Option<usize> {
        let mut rest = Vec::with_capacity(xs.len());
        (0..xs.len()).find(|&i| {
            rest.clear();
            rest.extend(xs.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &x)| x));
            self.generates(&rest)
        })
    }

    pub fn subgroup(&self, sid: u32) -> Subgroup {
        Subgroup::from_parts(
            self.table,
            self.sets[sid as usize].clone(),
            self.gens[sid as usize].clone(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupKind::{Pgl, Psl};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn t(kind: GroupKind, p: u32, e: u32) -> GroupTable {
        GroupTable::build(kind, p, e).unwrap()
    }

    #[test]
    fn closures_in_psl25() {
        let g = t(Psl, 5, 1);
        assert_eq!(closure(&g, &[]).unwrap().order(), 1);
        let u = g.parse_elem("1,1,0,1").unwrap();
        let v = g.parse_elem("1,0,1,1").unwrap();
        let cu = closure(&g, &[u]).unwrap();
        assert_eq!(cu.order(), 5);
        assert_eq!(classify_subgroup(&g, &cu).unwrap(), SubgroupClass::Cyclic);
        let full = closure(&g, &[u, v]).unwrap();
        assert_eq!(full.order(), 60);
        assert_eq!(classify_subgroup(&g, &full).unwrap(), SubgroupClass::FullGroup);
        assert!(matches!(is_structural(&g, &full), Err(Error::NotProper)));
    }

    #[test]
    fn unipotent_radical_of_psl29() {
        let g = t(Psl, 3, 2);
        let a = g.parse_elem("10,10,00,10").unwrap();
        let b = g.parse_elem("10,01,00,10").unwrap();
        let h = closure(&g, &[a, b]).unwrap();
        assert_eq!(h.order(), 9);
        assert_eq!(classify_subgroup(&g, &h).unwrap(), SubgroupClass::ElementaryAbelian);
    }

    #[test]
    fn generation_and_redundancy() {
        let g = t(Psl, 5, 1);
        let id = g.identity();
        assert!(!generates(&g, &[id, id, id]));
        let u = g.parse_elem("1,1,0,1").unwrap();
        let v = g.parse_elem("1,0,1,1").unwrap();
        assert!(generates(&g, &[u, v, id]));
        assert!(is_redundant(&g, &[u, v, id]));
        assert_eq!(redundant_index(&g, &[u, v, id]), Some(2));
        assert!(!is_redundant(&g, &[u, v]));
    }

    #[test]
    fn borel_is_structural() {
        let g = t(Psl, 5, 1);
        let u = g.parse_elem("1,1,0,1").unwrap();
        let d = g.parse_elem("4,0,0,1").unwrap();
        let b = closure(&g, &[u, d]).unwrap();
        assert_eq!(b.order(), 10);
        assert!(is_structural(&g, &b).unwrap());
        assert!(b.orbit_sizes().contains(&1));
        let full_borel = closure(&g, &[u, g.parse_elem("2,0,0,3").unwrap()]).unwrap();
        assert_eq!(full_borel.order(), 10);
    }

    fn subfield_copy(g: &GroupTable, x: &str) -> ElemId {
        g.parse_elem(x).unwrap()
    }

    #[test]
    fn subfield_a4_in_psl29_is_not_structural() {
        let g = t(Psl, 3, 2);
        // Matrices over GF(3) inside GF(9); digits are little-endian.
        let u = subfield_copy(&g, "10,10,00,10");
        let v = subfield_copy(&g, "10,00,10,10");
        let h = closure(&g, &[u, v]).unwrap();
        assert_eq!(h.order(), 12);
        assert!(!is_structural(&g, &h).unwrap());
        assert!(h.orbit_sizes().iter().all(|&s| s >= 3));
        assert_eq!(classify_subgroup(&g, &h).unwrap(), SubgroupClass::A4);
    }

    #[test]
    fn a4_in_psl25() {
        let g = t(Psl, 5, 1);
        let mut found = false;
        'outer: for &a in g.elements() {
            for &b in g.elements() {
                let h = closure(&g, &[a, b]).unwrap();
                if h.order() == 12 {
                    assert_eq!(h.order_census(&g).into_iter().collect::<Vec<_>>(), vec![1, 2, 3]);
                    assert_eq!(classify_subgroup(&g, &h).unwrap(), SubgroupClass::A4);
                    found = true;
                    break 'outer;
                }
            }
        }
        assert!(found);
    }

    #[test]
    fn a5_inside_psl29() {
        let g = t(Psl, 3, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut found = false;
        for _ in 0..5000 {
            let h = closure(&g, &[g.random_element(&mut rng), g.random_element(&mut rng)]).unwrap();
            if h.order() == 60 {
                assert_eq!(classify_subgroup(&g, &h).unwrap(), SubgroupClass::A5);
                found = true;
                break;
            }
        }
        assert!(found);
    }

    #[test]
    fn split_torus_normalizer_and_centralizer() {
        let g = t(Pgl, 5, 1);
        let w = g.parse_elem("2,0,0,1").unwrap();
        let c = closure(&g, &[w]).unwrap();
        let n = normalizer(&g, &c);
        assert_eq!(n.order(), 8);
        assert_eq!(classify_subgroup(&g, &n).unwrap(), SubgroupClass::Dihedral);
        let full = closure(&g, g.elements()).unwrap();
        let cw = centralizer(&g, &full, w);
        assert_eq!(cw.subgroup.order(), 4);
        assert!(cw.generator.is_some());
        let trivial = closure(&g, &[]).unwrap();
        assert_eq!(normalizer(&g, &trivial).order(), 120);
    }

    #[test]
    fn conjugator_between_a4s() {
        let g = t(Psl, 5, 1);
        let mut a4s: Vec<Subgroup> = Vec::new();
        for &a in g.elements() {
            for &b in g.elements().iter().step_by(3) {
                let h = closure(&g, &[a, b]).unwrap();
                if h.order() == 12 && !a4s.iter().any(|k| k.members == h.members) {
                    a4s.push(h);
                }
            }
        }
        assert!(a4s.len() >= 2);
        let x = find_conjugator(&g, &a4s[0], &a4s[0]).unwrap();
        assert!(a4s[0].generators.iter().all(|&h| a4s[0].contains(g.conj(h, x))));
        let y = find_conjugator(&g, &a4s[0], &a4s[1]).unwrap();
        let pgl = g.pgl();
        assert!(a4s[0].elements.iter().all(|&h| a4s[1].contains(pgl.conj(h, y))));
    }

    #[test]
    fn lattice_matches_closure() {
        let g = t(Psl, 7, 1);
        let mut lat = SubgroupLattice::new(&g);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..300 {
            let xs: Vec<ElemId> = (0..3).map(|_| g.random_element(&mut rng)).collect();
            let sid = lat.generated(&xs);
            assert_eq!(lat.order(sid), closure(&g, &xs).unwrap().order());
            assert_eq!(lat.generates(&xs), generates(&g, &xs));
            assert_eq!(lat.redundant_index(&xs), redundant_index(&g, &xs));
        }
    }
}
