//! Unit groups of modular group algebras `GF(p)[G]` for small finite groups.
//!
//! The crate enumerates the normalized units `V(FG)` and the unitary units
//! `V_*(FG)` under the classical involution, decides their nilpotency, and
//! checks the characterization "`V_*` nilpotent ⟺ `G` nilpotent with `G'` a
//! p-group" together with the explicit unitary witnesses behind it.

pub mod algebra;
pub mod group;
pub mod linalg;
pub mod report;
pub mod theorem;
pub mod units;

pub use algebra::{AlgebraContext, AlgebraElement, AlgebraError};
pub use group::{FiniteGroup, GroupError, GroupSpec, GroupTable, Nilpotency, SubgroupRef};
pub use report::{emit_report, run_catalog, OutputFormat, RunConfig, VerificationReport};
pub use theorem::{
    condition_iii, verify_equivalence, Budgets, EquivalenceVerdict, UnitStatus, WitnessError,
    WitnessRecord,
};
pub use units::{EngelOutcome, UnitError, UnitGroup};
