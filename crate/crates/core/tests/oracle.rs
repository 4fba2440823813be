mod common;

use common::random_task;
use mgl_core::mil::{brute_force_learn, learn, verify};

#[test]
fn learner_matches_exhaustive_search() {
    let mut learnable = 0;
    for seed in 0..1000u64 {
        let task = random_task(seed);
        let got = learn(&task).unwrap();
        let want = brute_force_learn(&task).unwrap();
        assert_eq!(
            got.as_ref().map(|h| h.len()),
            want.as_ref().map(|h| h.len()),
            "seed {seed}\nlearned:\n{}\noracle:\n{}",
            got.as_ref().map(|h| h.render()).unwrap_or_default(),
            want.as_ref().map(|h| h.render()).unwrap_or_default()
        );
        if let Some(h) = got {
            learnable += 1;
            let r = verify(&h, &task);
            assert!(r.complete && r.strongly_consistent, "seed {seed}: {h}");
        }
    }
    // Both outcomes must be exercised.
    assert!(learnable > 100 && learnable < 900, "{learnable} learnable");
}

