//! Product replacement graphs of PSL(2,q) and PGL(2,q).
//!
//! The crate is layered bottom-up:
//!
//! * [`field`]: arithmetic in GF(p^e), p odd.
//! * [`group`]: canonical projective matrices, the Möbius action, orders
//!   and element types.
//! * [`table`]: enumerated groups with Cayley tables, the substrate of every
//!   exhaustive computation.
//! * [`subgroup`]: closures, generation tests, the subgroup classification,
//!   normalizers, centralizers and conjugators.
//! * [`graph`]: Nielsen moves, the product replacement walk and exhaustive
//!   component counting.
//! * [`connector`]: a constructive path from any generating 4-tuple to a
//!   redundant one.
//! * [`spread`]: mate sets, exhaustive spread bounds and blocking sets.

pub mod cache;
pub mod connector;
pub mod error;
pub mod field;
pub mod graph;
pub mod group;
pub mod spread;
pub mod subgroup;
pub mod table;
pub mod verify;

pub use error::{Error, Result};
pub use field::{ArithOp, Field, FieldElem};
pub use graph::{ComponentReport, GenTuple, MovePath, NielsenMove, Sign};
pub use group::{ElementType, GroupElem, GroupId, GroupKind, ProjPoint};
pub use subgroup::{Subgroup, SubgroupClass, SubgroupLattice};
pub use table::{ElemId, GroupTable};
