//! Enumerated groups with precomputed multiplication, inversion, order and
//! type tables.
//!
//! Every group over GF(q) shares one enumeration of PGL(2,q); an element is
//! identified by its position [`ElemId`] in that enumeration. A PSL table is
//! a view selecting the square-determinant members, so normalizers and
//! conjugators in PGL(2,q) need no translation.

use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::group::{ElementType, GroupElem, GroupId, GroupKind, ProjPoint, MAX_ENUMERATED_ORDER};

/// PGL groups up to this order get a full Cayley table.
pub const MUL_TABLE_LIMIT: usize = 3000;

/// Index of an element in the lexicographic enumeration of PGL(2,q).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ElemId(pub(crate) u32);

impl ElemId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

pub(crate) struct PglTable {
    id: GroupId,
    elems: Vec<GroupElem>,
    mul: Option<Vec<u16>>,
    inv: Vec<u32>,
    order: Vec<u32>,
    etype: Vec<ElementType>,
    in_psl: Vec<bool>,
    identity: u32,
}

impl PglTable {
    fn build(id: GroupId) -> Result<PglTable> {
        let elems = id.enumerate()?;
        let n = elems.len();
        let rank = |x: &GroupElem| id.pgl_rank(x) as u32;
        let mul = (n <= MUL_TABLE_LIMIT).then(|| {
            let mut t = vec![0u16; n * n];
            for (i, x) in elems.iter().enumerate() {
                let row = &mut t[i * n..(i + 1) * n];
                for (j, y) in elems.iter().enumerate() {
                    row[j] = rank(&id.mul_unchecked(x, y)) as u16;
                }
            }
            t
        });
        let inv: Vec<u32> = elems.iter().map(|x| rank(&id.inv_unchecked(x))).collect();
        let identity = rank(&id.identity());
        let etype: Vec<ElementType> = elems.iter().map(|x| id.classify(x)).collect();
        let field = id.field().clone();
        let in_psl = elems.iter().map(|x| field.is_square(id.det(x))).collect();
        let mut table = PglTable {
            id,
            elems,
            mul,
            inv,
            order: Vec::new(),
            etype,
            in_psl,
            identity,
        };
        let p = table.id.field().p();
        table.order = (0..n as u32)
            .map(|x| match table.etype[x as usize] {
                ElementType::Identity => 1,
                ElementType::Unipotent => p,
                _ => {
                    let mut acc = x;
                    let mut k = 1;
                    while acc != identity {
                        acc = table.mul(acc, x);
                        k += 1;
                    }
                    k
                }
            })
            .collect();
        Ok(table)
    }

    #[inline]
    fn mul(&self, a: u32, b: u32) -> u32 {
        match &self.mul {
            Some(t) => t[a as usize * self.elems.len() + b as usize] as u32,
            None => {
                let x = &self.elems[a as usize];
                let y = &self.elems[b as usize];
                self.id.pgl_rank(&self.id.mul_unchecked(x, y)) as u32
            }
        }
    }
}

/// An enumerated PSL(2,q) or PGL(2,q).
#[derive(Clone)]
pub struct GroupTable {
    id: GroupId,
    pgl: Arc<PglTable>,
    members: Vec<ElemId>,
    /// PGL index to position in `members`, or `u32::MAX`.
    rank: Vec<u32>,
}

impl std::fmt::Debug for GroupTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "GroupTable({})", self.id)
    }
}

impl GroupTable {
    pub fn new(id: GroupId) -> Result<GroupTable> {
        let pgl_order = id.pgl().order();
        if pgl_order > MAX_ENUMERATED_ORDER {
            return Err(Error::GroupTooLarge {
                order: pgl_order,
                limit: MAX_ENUMERATED_ORDER,
            });
        }
        let pgl = Arc::new(PglTable::build(id.pgl())?);
        Ok(GroupTable::view(id.kind(), pgl))
    }

    pub fn build(kind: GroupKind, p: u32, e: u32) -> Result<GroupTable> {
        GroupTable::new(GroupId::build(kind, p, e)?)
    }

    fn view(kind: GroupKind, pgl: Arc<PglTable>) -> GroupTable {
        let n = pgl.elems.len();
        let members: Vec<ElemId> = (0..n as u32)
            .filter(|&i| kind == GroupKind::Pgl || pgl.in_psl[i as usize])
            .map(ElemId)
            .collect();
        let mut rank = vec![u32::MAX; n];
        for (r, m) in members.iter().enumerate() {
            rank[m.index()] = r as u32;
        }
        GroupTable {
            id: GroupId::new(kind, pgl.id.field().clone()),
            pgl,
            members,
            rank,
        }
    }

    /// The table of PGL(2,q) sharing this table's enumeration.
    /// Builds the group over GF(q) for a prime power q.
    pub fn from_q(kind: GroupKind, q: u32) -> Result<GroupTable> {
        let (p, e) = crate::field::prime_power(q)
            .ok_or_else(|| Error::InvalidField(format!("{q} is not a prime power")))?;
        GroupTable::build(kind, p, e)
    }

    pub fn pgl(&self) -> GroupTable {
        if self.kind() == GroupKind::Pgl {
            self.clone()
        } else {
            GroupTable::view(GroupKind::Pgl, self.pgl.clone())
        }
    }

    /// The table of PSL(2,q) sharing this table's enumeration.
    pub fn psl(&self) -> GroupTable {
        if self.kind() == GroupKind::Psl {
            self.clone()
        } else {
            GroupTable::view(GroupKind::Psl, self.pgl.clone())
        }
    }

    pub fn id(&self) -> &GroupId {
        &self.id
    }

    pub fn kind(&self) -> GroupKind {
        self.id.kind()
    }

    pub fn q(&self) -> u32 {
        self.id.q()
    }

    pub fn p(&self) -> u32 {
        self.id.field().p()
    }

    /// Order of this group.
    pub fn order(&self) -> usize {
        self.members.len()
    }

    /// Order of PGL(2,q); the range of [`ElemId::index`].
    pub fn pgl_order(&self) -> usize {
        self.pgl.elems.len()
    }

    pub fn elements(&self) -> &[ElemId] {
        &self.members
    }

    /// Elements of PGL(2,q), including those outside this group.
    pub fn pgl_elements(&self) -> impl Iterator<Item = ElemId> {
        (0..self.pgl.elems.len() as u32).map(ElemId)
    }

    pub fn identity(&self) -> ElemId {
        ElemId(self.pgl.identity)
    }

    #[inline]
    pub fn contains(&self, x: ElemId) -> bool {
        self.rank[x.index()] != u32::MAX
    }

    /// Position of `x` among the members of this group.
    #[inline]
    pub fn local_index(&self, x: ElemId) -> Option<u32> {
        let r = self.rank[x.index()];
        (r != u32::MAX).then_some(r)
    }

    #[inline]
    pub fn member(&self, local: u32) -> ElemId {
        self.members[local as usize]
    }

    /// The matrix of `x`, tagged with this group's kind.
    pub fn elem(&self, x: ElemId) -> GroupElem {
        self.pgl.elems[x.index()].with_kind(self.kind())
    }

    /// Looks up an element; it must belong to this group.
    pub fn id_of(&self, x: &GroupElem) -> Result<ElemId> {
        if !self.id.contains(x) {
            return Err(Error::GroupMismatch {
                expected: self.id.to_string(),
                found: format!("{} element {}", x.kind(), self.id.pgl().format_elem(&x.with_kind(GroupKind::Pgl))),
            });
        }
        Ok(ElemId(self.id.pgl_rank(x) as u32))
    }

    pub fn parse_elem(&self, s: &str) -> Result<ElemId> {
        let x = self.id.parse_elem(s)?;
        self.id_of(&x)
    }

    pub fn format_elem(&self, x: ElemId) -> String {
        self.id.format_elem(&self.elem(x))
    }

    pub fn code(&self, x: ElemId) -> u128 {
        self.id.code(&self.elem(x))
    }

    pub fn from_code(&self, code: u128) -> Result<ElemId> {
        let x = self.id.from_code(code)?;
        self.id_of(&x)
    }

    #[inline]
    pub fn mul(&self, a: ElemId, b: ElemId) -> ElemId {
        ElemId(self.pgl.mul(a.0, b.0))
    }

    #[inline]
    pub fn inv(&self, a: ElemId) -> ElemId {
        ElemId(self.pgl.inv[a.index()])
    }

    pub fn pow(&self, a: ElemId, n: i64) -> ElemId {
        let ord = self.order_of(a) as i64;
        let n = n.rem_euclid(ord);
        let mut acc = self.identity();
        for _ in 0..n {
            acc = self.mul(acc, a);
        }
        acc
    }

    /// `g^-1 x g`, the right conjugation action `x^g`.
    #[inline]
    pub fn conj(&self, x: ElemId, g: ElemId) -> ElemId {
        self.mul(self.mul(self.inv(g), x), g)
    }

    pub fn commute(&self, a: ElemId, b: ElemId) -> bool {
        self.mul(a, b) == self.mul(b, a)
    }

    #[inline]
    pub fn order_of(&self, a: ElemId) -> u32 {
        self.pgl.order[a.index()]
    }

    #[inline]
    pub fn element_type(&self, a: ElemId) -> ElementType {
        self.pgl.etype[a.index()]
    }

    /// Image of the point with dense index `pt` (infinity is `q`).
    pub fn act(&self, a: ElemId, pt: u32) -> u32 {
        let f = self.id.field();
        let z = ProjPoint::from_index(f, pt);
        self.id.act(&self.elem(a), z).index(self.q())
    }

    pub fn fixed_points(&self, a: ElemId) -> Vec<u32> {
        (0..=self.q()).filter(|&z| self.act(a, z) == z).collect()
    }

    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R) -> ElemId {
        self.members[rng.random_range(0..self.members.len())]
    }
}
