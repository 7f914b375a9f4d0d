//! Exact lattice machinery and validated matrix domain types.

mod characteristic;
mod level;
mod matrix;
mod multiindex;
mod period;
mod snf;

pub use characteristic::{enumerate_characteristics, Characteristic};
pub use level::{validate_level, LevelMatrix};
pub use matrix::{ComplexMatrix, IntMatrix};
pub use multiindex::MultiIndex;
pub use period::PeriodMatrix;
pub use snf::{smith_normal_form, SmithForm};

/// Exact rational used for characteristics.
pub type Rational = num_rational::Ratio<i64>;

/// JSON encoding of a rational: `{"num": n, "den": d}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct RationalJson {
    pub num: i64,
    pub den: i64,
}

impl From<Rational> for RationalJson {
    fn from(r: Rational) -> Self {
        RationalJson {
            num: *r.numer(),
            den: *r.denom(),
        }
    }
}
