use sympack_bench::{blowup, equal_balls, fibonacci_ratio};
use sympack_core::rational::{int, ratio};
use sympack_core::weight_sequence;

#[test]
fn fibonacci_inputs_have_all_ones_expansions() {
    for n in 1..30 {
        let a = fibonacci_ratio(n);
        assert!(a > int(1) && a <= int(2));
        let w = weight_sequence(&a).unwrap();
        // quotients are [1; 1, ..., 1, 2], summing to n + 1
        assert_eq!(w.len(), n as u64 + 1);
        assert_eq!(w.sum_of_squares(), a);
    }
}

#[test]
fn blowup_forms_stay_below_unit_volume() {
    for p in [1, 8, 32] {
        let f = blowup(p);
        assert_eq!(f.p(), p);
    }
}

#[test]
fn equal_balls_repeat_capacity() {
    let balls = equal_balls(5, ratio(2, 7));
    assert!(balls.iter().all(|c| *c == ratio(2, 7)));
}
