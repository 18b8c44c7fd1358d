//! Reference instances.
//!
//! The 4×4 instance below has row targets `(6, 6, 4, 1)` and column targets
//! `(4, 4, 2, 1)`. Reference iterates after 500 full rounds are kept in
//! [`EXAMPLE_B500`] and [`EXAMPLE_C500`] to three significant digits, with `0`
//! for structural zeros. The max-ratio row set of this instance is
//! `{1,2,3,4}` with ratio `17/11`, so both limits form a single block.

use crate::problem::Problem;

pub const EXAMPLE_MATRIX: [[i64; 4]; 4] = [[1, 0, 0, 0], [1, 1, 0, 0], [1, 1, 7, 2], [1, 1, 9, 6]];
pub const EXAMPLE_ROW_TARGETS: [i64; 4] = [6, 6, 4, 1];
pub const EXAMPLE_COL_TARGETS: [i64; 4] = [4, 4, 2, 1];

pub const EXAMPLE_B500: [[f64; 4]; 4] =
    [[6.0, 0.0, 0.0, 0.0], [0.171, 5.83, 0.0, 0.0], [0.00907, 0.309, 2.61, 1.08], [0.00132, 0.0447, 0.486, 0.468]];

pub const EXAMPLE_C500: [[f64; 4]; 4] =
    [[3.88, 0.0, 0.0, 0.0], [0.111, 3.77, 0.0, 0.0], [0.00587, 0.2, 1.69, 0.697], [0.000851, 0.0289, 0.314, 0.303]];

pub fn example_problem() -> Problem {
    let rows: Vec<&[i64]> = EXAMPLE_MATRIX.iter().map(|r| &r[..]).collect();
    Problem::from_ints(&rows, &EXAMPLE_ROW_TARGETS, &EXAMPLE_COL_TARGETS).expect("example instance is valid")
}

/// `[[1,1],[0,1]]` with unit targets: the limit drops entry (1,2), which
/// decays like `1/(2k)` under naive scaling.
pub fn slow_problem() -> Problem {
    Problem::from_ints(&[&[1, 1], &[0, 1]], &[1, 1], &[1, 1]).expect("valid")
}

/// `[[1,0],[1,1]]` with `r = (3,1)`, `c = (1,3)`: two blocks with quotients 3 and 1/3.
pub fn two_quotient_problem() -> Problem {
    Problem::from_ints(&[&[1, 0], &[1, 1]], &[3, 1], &[1, 3]).expect("valid")
}

/// The example instance as bordered CSV.
pub const EXAMPLE_CSV: &str = ",4,4,2,1\n6,1,0,0,0\n6,1,1,0,0\n4,1,1,7,2\n1,1,1,9,6\n";
