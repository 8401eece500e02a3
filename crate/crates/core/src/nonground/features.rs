use super::{dependency_graph, hcf_components, is_stratified, scc, scc_positive, NonGroundProgram};
use crate::features::{FeatureVector, Manifest};

/// Computes the `nonground-11` feature vector.
///
/// `n_scc` counts components of the full dependency graph, while
/// `n_hcf_components` is evaluated over components of the positive graph.
pub fn extract_nonground(p: &NonGroundProgram) -> FeatureVector {
    let g = dependency_graph(p);
    let n_rules = p.rules.len();
    let n_disj = p.rules.iter().filter(|r| r.is_disjunctive()).count();
    let n_constraints = p.rules.iter().filter(|r| r.is_constraint()).count();
    let max_arity = p.predicates.iter().map(|q| q.arity).max().unwrap_or(0);
    let pos_sccs = scc_positive(&g);
    let frac_disj = if n_rules == 0 {
        0.0
    } else {
        n_disj as f64 / n_rules as f64
    };

    let values = vec![
        n_disj as f64,
        f64::from(u8::from(p.has_query)),
        p.functions.len() as f64,
        p.predicates.len() as f64,
        scc(&g).len() as f64,
        hcf_components(p, &g, &pos_sccs) as f64,
        f64::from(u8::from(is_stratified(&g))),
        n_rules as f64,
        n_constraints as f64,
        max_arity as f64,
        frac_disj,
    ];
    FeatureVector::new(Manifest::nonground11(), values).expect("non-ground features are finite")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonground::parse_nonground;

    fn features(src: &str) -> FeatureVector {
        extract_nonground(&parse_nonground(src.as_bytes()).unwrap())
    }

    #[test]
    fn empty_program() {
        let fv = features("");
        assert_eq!(fv.len(), 11);
        for (name, v) in fv.iter() {
            let expected = if name == "is_stratified" { 1.0 } else { 0.0 };
            assert_eq!(v, expected, "{name}");
        }
    }

    #[test]
    fn two_rule_program() {
        let fv = features("p(a). q(X) :- p(X).");
        let expect = [
            ("n_disj_rules", 0.0),
            ("has_query", 0.0),
            ("n_functions", 0.0),
            ("n_predicates", 2.0),
            ("n_scc", 2.0),
            ("n_hcf_components", 2.0),
            ("is_stratified", 1.0),
            ("n_rules", 2.0),
            ("n_constraints", 0.0),
            ("max_predicate_arity", 1.0),
            ("frac_disj_rules", 0.0),
        ];
        for (name, v) in expect {
            assert_eq!(fv.get(name), Some(v), "{name}");
        }
    }

    #[test]
    fn head_cycle() {
        let fv = features("a | b. a :- b. b :- a.");
        assert_eq!(fv.get("n_disj_rules"), Some(1.0));
        assert_eq!(fv.get("n_scc"), Some(1.0));
        assert_eq!(fv.get("n_hcf_components"), Some(0.0));
        assert_eq!(fv.get("is_stratified"), Some(1.0));
        assert_eq!(fv.get("frac_disj_rules"), Some(1.0 / 3.0));
    }

    #[test]
    fn queries_and_constraints() {
        let fv = features("p(f(1),g(2,3)). :- p(X,Y), X > Y. p(a,b)?");
        assert_eq!(fv.get("has_query"), Some(1.0));
        assert_eq!(fv.get("n_constraints"), Some(1.0));
        assert_eq!(fv.get("n_functions"), Some(2.0));
        assert_eq!(fv.get("max_predicate_arity"), Some(2.0));
    }
}
