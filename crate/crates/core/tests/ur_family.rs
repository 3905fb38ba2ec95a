use cuspcount::counting::ur_example;
use cuspcount::Budget;

#[test]
fn hyperbolic_family_up_to_30() {
    let budget = Budget::default();
    for r in 3..=30 {
        let rep = ur_example(r, &budget).unwrap();
        assert!(rep.passes, "r = {r}: {rep:?}");
    }
}
