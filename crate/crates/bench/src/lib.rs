//! Shared inputs for the benchmarks.

use sympack_core::rational::{ratio, Rational};
use sympack_core::BlowupForm;

/// `a = F(n+1)/F(n)`: the worst case for continued-fraction length.
pub fn fibonacci_ratio(n: u32) -> Rational {
    let (mut a, mut b) = (1i64, 1i64);
    for _ in 0..n {
        (a, b) = (b, a + b);
    }
    ratio(b, a)
}

pub fn blowup(p: usize) -> BlowupForm {
    let lambdas = (0..p).map(|i| ratio(1, 4 + i as i64)).collect();
    BlowupForm::new(lambdas).expect("sum of squares below 1")
}

/// `n` equal balls of capacity `c`.
pub fn equal_balls(n: usize, c: Rational) -> Vec<Rational> {
    vec![c; n]
}
