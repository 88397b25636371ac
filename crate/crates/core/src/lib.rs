//! Locating underlying catastrophes of parameterized vector fields.
//!
//! A field `F(x, alpha)` exhibits a codimension-`r` catastrophe where `F`
//! and the nested determinants `B_1 .. B_r` vanish together; the extended
//! determinants `G_{r,K}` decide whether such a root is isolated.

pub mod boardman;
pub mod determinants;
pub mod expr;
pub mod linalg;
pub mod report;
pub mod scan;
pub mod scenarios;
pub mod solver;

pub use determinants::{jacobian, subrank, sym_det, DetError, DetValue, DeterminantSet, IndexString, Tolerances};
pub use expr::{
    parse_expression, parse_vector_field, EvalError, Expr, ExprKind, FieldError, ParseError, Point, Symbol, Tape,
    VectorField,
};
pub use scenarios::{classify, make_primary_form, make_reaction_diffusion, PrimaryFormSpec, RdKind, RdReference};
pub use solver::{
    count_steady_states, find_catastrophes, newton_solve, CatastropheReport, SolveError, SolveOptions, Stability,
    SteadyStateCensus,
};
pub use boardman::{
    bg_condition_count, boardman_symbol, build_delta_chain, minor_count, BoardmanError, BoardmanSymbol, DeltaChain,
    MinorCount,
};
pub use report::{Payload, ReportDocument};
pub use scan::{scan, Axis, RegionMap};
