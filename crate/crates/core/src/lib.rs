//! Finite-order checks of whether scaled Bergman metrics on classical
//! bounded symmetric domains, and the Kähler–Einstein metrics on their
//! Cartan–Hartogs extensions, are projectively induced.
//!
//! Two independent routes decide positivity of the kernel `N^{−λ}`:
//! the graded Calabi blocks of its power expansion ([`calabi`]) and Gram
//! matrices at sampled point configurations ([`gram`]). Both are checked
//! against the closed-form Wallach set ([`domain::WallachSet`]).

pub mod calabi;
pub mod domain;
pub mod error;
pub mod gram;
pub mod hartogs;
pub mod linalg;
pub mod multiindex;
pub mod par;
pub mod series;

pub use calabi::{CalabiMatrix, Certainty, Tolerances, Verdict};
pub use domain::{DomainKind, DomainModel, WallachSet, C64};
pub use error::{Error, Result};
pub use multiindex::{Basis, MultiIndex};
pub use series::HermitianSeries;
