//! Elements of PGL(2,q) and PSL(2,q) as canonical projective matrices.
//!
//! A projective class of invertible 2x2 matrices is represented by the
//! unique member whose first nonzero entry (in the order a, b, c, d) is 1.
//! PSL(2,q) is the index-2 subgroup of classes whose determinant is a
//! square; squareness of the determinant does not depend on the scaling.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field, FieldElem};

/// Groups larger than this are never enumerated.
pub const MAX_ENUMERATED_ORDER: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupKind {
    Psl,
    Pgl,
}

impl fmt::Display for GroupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GroupKind::Psl => "psl",
            GroupKind::Pgl => "pgl",
        })
    }
}

impl FromStr for GroupKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "psl" => Ok(GroupKind::Psl),
            "pgl" => Ok(GroupKind::Pgl),
            _ => Err(Error::Parse(format!("unknown group kind {s:?}"))),
        }
    }
}

/// Type of an element by its fixed points on the projective line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ElementType {
    Identity,
    /// One fixed point; order p.
    Unipotent,
    /// Two fixed points.
    Split,
    /// No fixed points.
    NonSplit,
}

impl ElementType {
    pub fn fixed_point_count(self) -> Option<usize> {
        match self {
            ElementType::Identity => None,
            ElementType::Unipotent => Some(1),
            ElementType::Split => Some(2),
            ElementType::NonSplit => Some(0),
        }
    }
}

impl fmt::Display for ElementType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ElementType::Identity => "identity",
            ElementType::Unipotent => "unipotent",
            ElementType::Split => "split",
            ElementType::NonSplit => "non-split",
        })
    }
}

/// A point of the projective line over GF(q).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ProjPoint {
    Finite(FieldElem),
    Infinity,
}

impl ProjPoint {
    /// Dense index in `[0, q]`; infinity is `q`.
    pub fn index(self, q: u32) -> u32 {
        match self {
            ProjPoint::Finite(z) => z.raw(),
            ProjPoint::Infinity => q,
        }
    }

    pub fn from_index(field: &Field, i: u32) -> ProjPoint {
        if i == field.q() {
            ProjPoint::Infinity
        } else {
            ProjPoint::Finite(field.elem_unchecked(i))
        }
    }
}

/// A group element: canonical matrix entries `[a, b, c, d]` plus the group kind.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GroupElem {
    m: [FieldElem; 4],
    kind: GroupKind,
}

impl GroupElem {
    pub fn entries(&self) -> [FieldElem; 4] {
        self.m
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub(crate) fn with_kind(self, kind: GroupKind) -> GroupElem {
        GroupElem { m: self.m, kind }
    }
}

/// PSL(2,q) or PGL(2,q) over a fixed field.
#[derive(Clone)]
pub struct GroupId {
    kind: GroupKind,
    field: Arc<Field>,
}

impl fmt::Debug for GroupId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for GroupId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self.kind {
            GroupKind::Psl => "PSL",
            GroupKind::Pgl => "PGL",
        };
        write!(f, "{name}(2,{})", self.field.q())
    }
}

impl PartialEq for GroupId {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && *self.field == *other.field
    }
}

impl Eq for GroupId {}

/// Serializable description of one element.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElementRecord {
    pub group: GroupKind,
    pub q: u32,
    pub matrix: String,
    pub order: u64,
    #[serde(rename = "type")]
    pub element_type: ElementType,
    pub code: String,
}

impl GroupId {
    pub fn new(kind: GroupKind, field: Arc<Field>) -> GroupId {
        GroupId { kind, field }
    }

    pub fn build(kind: GroupKind, p: u32, e: u32) -> Result<GroupId> {
        Ok(GroupId::new(kind, Field::new(p, e)?))
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn field(&self) -> &Arc<Field> {
        &self.field
    }

    pub fn q(&self) -> u32 {
        self.field.q()
    }

    /// The PGL group over the same field.
    pub fn pgl(&self) -> GroupId {
        GroupId::new(GroupKind::Pgl, self.field.clone())
    }

    /// `q(q-1)(q+1)` for PGL, half of that for PSL.
    pub fn order(&self) -> u64 {
        let q = self.q() as u64;
        let full = q * (q - 1) * (q + 1);
        match self.kind {
            GroupKind::Pgl => full,
            GroupKind::Psl => full / 2,
        }
    }

    fn check_elem(&self, x: &GroupElem) -> Result<()> {
        if x.kind != self.kind || x.m[0].field_order() != self.q() {
            return Err(Error::GroupMismatch {
                expected: self.to_string(),
                found: format!(
                    "{}(2,{})",
                    x.kind.to_string().to_uppercase(),
                    x.m[0].field_order()
                ),
            });
        }
        Ok(())
    }

    pub fn det(&self, x: &GroupElem) -> FieldElem {
        let f = &self.field;
        let [a, b, c, d] = x.m;
        f.sub(f.mul(a, d), f.mul(b, c))
    }

    /// Scales a nonsingular matrix to its canonical representative.
    pub fn canonicalize(
        &self,
        a: FieldElem,
        b: FieldElem,
        c: FieldElem,
        d: FieldElem,
    ) -> Result<GroupElem> {
        for v in [a, b, c, d] {
            self.field.check(v)?;
        }
        let f = &self.field;
        let det = f.sub(f.mul(a, d), f.mul(b, c));
        if det.is_zero() {
            return Err(Error::SingularMatrix);
        }
        if self.kind == GroupKind::Psl && !f.is_square(det) {
            return Err(Error::NotInPsl { q: self.q() });
        }
        Ok(self.scale([a, b, c, d]))
    }

    /// Canonical scaling without membership checks.
    #[inline]
    pub(crate) fn scale(&self, m: [FieldElem; 4]) -> GroupElem {
        let f = &self.field;
        let lead = m.iter().copied().find(|v| !v.is_zero()).expect("nonzero matrix");
        let m = if lead == f.one() {
            m
        } else {
            let s = f.inv(lead).expect("lead is nonzero");
            m.map(|v| f.mul(v, s))
        };
        GroupElem { m, kind: self.kind }
    }

    pub fn from_ints(&self, a: i64, b: i64, c: i64, d: i64) -> Result<GroupElem> {
        let f = &self.field;
        self.canonicalize(f.from_int(a), f.from_int(b), f.from_int(c), f.from_int(d))
    }

    pub fn identity(&self) -> GroupElem {
        let f = &self.field;
        GroupElem {
            m: [f.one(), f.zero(), f.zero(), f.one()],
            kind: self.kind,
        }
    }

    pub fn is_identity(&self, x: &GroupElem) -> bool {
        *x == self.identity()
    }

    /// Whether `x` is a valid canonical element of this group.
    pub fn contains(&self, x: &GroupElem) -> bool {
        if self.check_elem(x).is_err() {
            return false;
        }
        let det = self.det(x);
        !det.is_zero()
            && (self.kind == GroupKind::Pgl || self.field.is_square(det))
            && self.scale(x.m) == *x
    }

    #[inline]
    pub(crate) fn mul_unchecked(&self, x: &GroupElem, y: &GroupElem) -> GroupElem {
        let f = &self.field;
        let [a, b, c, d] = x.m;
        let [e, g, h, k] = y.m;
        self.scale([
            f.add(f.mul(a, e), f.mul(b, h)),
            f.add(f.mul(a, g), f.mul(b, k)),
            f.add(f.mul(c, e), f.mul(d, h)),
            f.add(f.mul(c, g), f.mul(d, k)),
        ])
    }

    #[inline]
    pub(crate) fn inv_unchecked(&self, x: &GroupElem) -> GroupElem {
        let f = &self.field;
        let [a, b, c, d] = x.m;
        // Adjugate; the determinant scalar is absorbed by canonical scaling.
        self.scale([d, f.neg(b), f.neg(c), a])
    }

    pub fn multiply(&self, x: &GroupElem, y: &GroupElem) -> Result<GroupElem> {
        self.check_elem(x)?;
        self.check_elem(y)?;
        Ok(self.mul_unchecked(x, y))
    }

    pub fn invert(&self, x: &GroupElem) -> Result<GroupElem> {
        self.check_elem(x)?;
        Ok(self.inv_unchecked(x))
    }

    /// Möbius action `z -> (az + b) / (cz + d)`.
    pub fn act(&self, x: &GroupElem, z: ProjPoint) -> ProjPoint {
        let f = &self.field;
        let [a, b, c, d] = x.m;
        match z {
            ProjPoint::Infinity => {
                if c.is_zero() {
                    ProjPoint::Infinity
                } else {
                    ProjPoint::Finite(f.mul(a, f.inv(c).unwrap()))
                }
            }
            ProjPoint::Finite(z) => {
                let num = f.add(f.mul(a, z), b);
                let den = f.add(f.mul(c, z), d);
                if den.is_zero() {
                    ProjPoint::Infinity
                } else {
                    ProjPoint::Finite(f.mul(num, f.inv(den).unwrap()))
                }
            }
        }
    }

    pub fn points(&self) -> impl Iterator<Item = ProjPoint> + '_ {
        (0..=self.q()).map(move |i| ProjPoint::from_index(&self.field, i))
    }

    pub fn fixed_points(&self, x: &GroupElem) -> Vec<ProjPoint> {
        self.points().filter(|&z| self.act(x, z) == z).collect()
    }

    /// Least n >= 1 with x^n = 1, by repeated multiplication.
    ///
    /// Orders in PGL(2,q) divide p, q - 1 or q + 1, so at most q + 1 steps are taken.
    pub fn element_order(&self, x: &GroupElem) -> u64 {
        let id = self.identity();
        let mut acc = *x;
        let mut n = 1;
        while acc != id {
            acc = self.mul_unchecked(&acc, x);
            n += 1;
            assert!(n <= self.q() as u64 + 1, "element order exceeds q + 1");
        }
        n
    }

    /// tr^2 - 4 det: zero for unipotents, a nonzero square for split
    /// elements and a non-square for non-split ones.
    pub fn discriminant(&self, x: &GroupElem) -> FieldElem {
        let f = &self.field;
        let [a, _, _, d] = x.m;
        let tr = f.add(a, d);
        let four = f.from_int(4);
        f.sub(f.mul(tr, tr), f.mul(four, self.det(x)))
    }

    pub fn classify(&self, x: &GroupElem) -> ElementType {
        if self.is_identity(x) {
            return ElementType::Identity;
        }
        let disc = self.discriminant(x);
        if disc.is_zero() {
            ElementType::Unipotent
        } else if self.field.is_square(disc) {
            ElementType::Split
        } else {
            ElementType::NonSplit
        }
    }

    /// Packs the canonical entries base q, `a` most significant, so that
    /// code order equals lexicographic order of canonical matrices.
    pub fn code(&self, x: &GroupElem) -> u128 {
        let q = self.q() as u128;
        x.m.iter().fold(0u128, |acc, v| acc * q + v.raw() as u128)
    }

    pub fn from_code(&self, code: u128) -> Result<GroupElem> {
        let q = self.q() as u128;
        if code >= q.pow(4) {
            return Err(Error::Parse(format!("element code {code} out of range")));
        }
        let mut v = code;
        let mut raw = [0u32; 4];
        for slot in raw.iter_mut().rev() {
            *slot = (v % q) as u32;
            v /= q;
        }
        let m = raw.map(|r| self.field.elem_unchecked(r));
        let x = GroupElem { m, kind: self.kind };
        if !self.contains(&x) {
            return Err(Error::Parse(format!("code {code} is not a canonical element of {self}")));
        }
        Ok(x)
    }

    /// All elements, each once, in lexicographic order of canonical matrices.
    pub fn enumerate(&self) -> Result<Vec<GroupElem>> {
        let order = self.order();
        if order > MAX_ENUMERATED_ORDER {
            return Err(Error::GroupTooLarge {
                order,
                limit: MAX_ENUMERATED_ORDER,
            });
        }
        let f = &self.field;
        let q = self.q();
        let mut out = Vec::with_capacity(order as usize);
        let zero = f.zero();
        let one = f.one();
        let mut push = |m: [FieldElem; 4]| {
            let x = GroupElem { m, kind: self.kind };
            let det = self.det(&x);
            if !det.is_zero() && (self.kind == GroupKind::Pgl || f.is_square(det)) {
                out.push(x);
            }
        };
        // a = 0 forces b = 1.
        for c in 1..q {
            for d in 0..q {
                push([zero, one, f.elem_unchecked(c), f.elem_unchecked(d)]);
            }
        }
        for b in 0..q {
            for c in 0..q {
                for d in 0..q {
                    push([one, f.elem_unchecked(b), f.elem_unchecked(c), f.elem_unchecked(d)]);
                }
            }
        }
        debug_assert_eq!(out.len() as u64, order);
        Ok(out)
    }

    /// Position of `x` in the lexicographic enumeration of PGL(2,q).
    pub(crate) fn pgl_rank(&self, x: &GroupElem) -> u64 {
        let q = self.q() as u64;
        let [a, b, c, d] = x.m.map(|v| v.raw() as u64);
        if a == 0 {
            (c - 1) * q + d
        } else {
            let bc = self.field.mul(x.m[1], x.m[2]).raw() as u64;
            let skip = u64::from(d > bc);
            q * (q - 1) + (b * q + c) * (q - 1) + d - skip
        }
    }

    /// `"a,b,c,d"` with each entry a field digit string.
    pub fn format_elem(&self, x: &GroupElem) -> String {
        x.m.iter()
            .map(|&v| self.field.format_elem(v))
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Parses `"a,b,c,d"` and canonicalizes.
    pub fn parse_elem(&self, s: &str) -> Result<GroupElem> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 4 {
            return Err(Error::Parse(format!("expected four matrix entries in {s:?}")));
        }
        let v = parts
            .iter()
            .map(|p| self.field.parse_elem(p))
            .collect::<Result<Vec<_>>>()?;
        self.canonicalize(v[0], v[1], v[2], v[3])
    }

    pub fn record(&self, x: &GroupElem) -> ElementRecord {
        ElementRecord {
            group: self.kind,
            q: self.q(),
            matrix: self.format_elem(x),
            order: self.element_order(x),
            element_type: self.classify(x),
            code: self.code(x).to_string(),
        }
    }
}
