//! The four hypothesis conditions, checked by plain entailment.

use serde::Serialize;

use super::learn::{Hypothesis, LearnTask};
use super::prove::Prover;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    /// Every positive is entailed by hypothesis and background.
    pub complete: bool,
    /// No negative is entailed.
    pub strongly_consistent: bool,
    /// Always true: definite programs without negation cannot derive a
    /// contradiction.
    pub weakly_consistent: bool,
    /// Some positive is not entailed by the background alone.
    pub necessary: bool,
}

impl VerificationReport {
    pub fn accepted(&self) -> bool {
        self.complete && self.strongly_consistent
    }
}

pub fn verify(hypothesis: &Hypothesis, task: &LearnTask) -> VerificationReport {
    let depth = task.depth_limit;
    let mut prover = Prover::new(&task.background);
    prover.set_program(&hypothesis.program());
    let complete = task.positives.iter().all(|e| prover.entails(e, depth));
    let strongly_consistent = !task.negatives.iter().any(|e| prover.entails(e, depth));
    prover.set_program(&[]);
    let necessary = task.positives.iter().any(|e| !prover.entails(e, depth));
    VerificationReport {
        complete,
        strongly_consistent,
        weakly_consistent: true,
        necessary,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mil::Metarule;
    use crate::store::FactStore;
    use crate::term::{parse_atom, parse_program};

    fn hypothesis(text: &str) -> Hypothesis {
        Hypothesis {
            clauses: parse_program(text)
                .unwrap()
                .into_iter()
                .map(|clause| crate::mil::HypothesisClause {
                    clause,
                    metarule: "chain".into(),
                })
                .collect(),
            invented: Vec::new(),
        }
    }

    #[test]
    fn background_fact_is_not_necessary() {
        let task = LearnTask::new(
            vec![],
            FactStore::parse("t(a,b).").unwrap(),
            vec![parse_atom("t(a,b)").unwrap()],
            vec![],
        );
        let r = verify(&Hypothesis::default(), &task);
        assert!(r.complete);
        assert!(!r.necessary);
    }

    #[test]
    fn planted_edge_breaks_strong_consistency() {
        let bk = FactStore::parse(
            "contains([call,mother],mother). contains([swim,lesson],swim).
             related_to(mother,family). related_to(swim,family).",
        )
        .unwrap();
        let task = LearnTask::new(
            vec![Metarule::chain()],
            bk,
            vec![parse_atom("category([call,mother],family)").unwrap()],
            vec![parse_atom("category([swim,lesson],family)").unwrap()],
        );
        let r = verify(&hypothesis("category(A,B) :- contains(A,C), related_to(C,B)."), &task);
        assert!(r.complete && r.necessary && r.weakly_consistent);
        assert!(!r.strongly_consistent);
    }
}
