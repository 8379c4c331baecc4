use mcnet::gf::{prime_powers, FiniteField};
use mcnet::lnc::{
    exhaustive_point_search, is_solution, prescribed_qmin_code, random_search, sets_to_code, REFUTATION_SAMPLES,
    REFUTATION_SEED,
};
use mcnet::netmodel::{build_general_network, build_prescribed_qmin_network, Network, NetworkParams};
use mcnet::solvability::solvable_closed_form;

fn children_of(net: &Network, receiver: usize, v: usize) -> usize {
    net.in_edges(receiver)
        .iter()
        .filter(|&&e| {
            let parent = net.edges()[e].0;
            net.in_edges(parent).iter().any(|&d| net.edges()[d].0 == v)
        })
        .count()
}

#[test]
fn duplicate_coefficients_break_a_sibling_receiver() {
    let params = NetworkParams::new(3, vec![3, 3, 3]).unwrap();
    let net = build_general_network(&params).unwrap();
    let field = FiniteField::new(7).unwrap();
    let good = vec![vec![3, 6, 5], vec![1, 2, 4], vec![1, 2, 4]];
    assert!(is_solution(&net, &field, &sets_to_code(&net, &field, &good).unwrap()).unwrap().solved);
    for i in 0..3 {
        let v = net.node_by_label(&format!("v_{}", i + 1)).unwrap();
        for j in 0..3 {
            for src in (0..3).filter(|&x| x != j) {
                let mut sets = good.clone();
                sets[i][j] = sets[i][src];
                let report = is_solution(&net, &field, &sets_to_code(&net, &field, &sets).unwrap()).unwrap();
                assert!(!report.solved, "S_{} with a repeated entry still solves", i + 1);
                assert!(
                    report.failing.iter().any(|&r| children_of(&net, r, v) >= 2),
                    "no failing receiver holds two children of v_{}",
                    i + 1
                );
            }
        }
    }
}

/// Evidence only: a bounded random search cannot prove unsolvability.
#[test]
fn random_codes_find_nothing_where_closed_form_refutes() {
    let cases: [(&[u64], &[u64]); 4] = [
        (&[2, 2, 2], &[2, 3, 4]),
        (&[3, 3, 3], &[4, 5, 8]),
        (&[2, 2, 2, 4], &[8]),
        (&[2, 3, 3], &[4]),
    ];
    for (d, qs) in cases {
        let params = NetworkParams::new(d.len(), d.to_vec()).unwrap();
        let net = build_general_network(&params).unwrap();
        for &q in qs {
            assert!(!solvable_closed_form(&params, q).unwrap().solvable);
            let field = FiniteField::new(q).unwrap();
            let found = random_search(&net, &field, REFUTATION_SAMPLES, REFUTATION_SEED).unwrap();
            assert!(found.is_none(), "{params} over GF({q}) solved by a random code");
        }
    }
}

#[test]
fn random_codes_solve_where_closed_form_allows() {
    let params = NetworkParams::new(3, vec![3, 3, 3]).unwrap();
    let net = build_general_network(&params).unwrap();
    for q in [11u64, 13, 16] {
        assert!(solvable_closed_form(&params, q).unwrap().solvable);
        let field = FiniteField::new(q).unwrap();
        let code = random_search(&net, &field, REFUTATION_SAMPLES, REFUTATION_SEED).unwrap();
        assert!(code.is_some(), "no random solution over GF({q})");
    }
}

#[test]
fn prescribed_network_has_the_prescribed_minimum() {
    for q in [5u64, 7, 8] {
        let net = build_prescribed_qmin_network(q).unwrap();
        for f in prime_powers(2, 16) {
            let field = FiniteField::new(f).unwrap();
            match prescribed_qmin_code(&net, &field).unwrap() {
                Some(code) => {
                    assert!(f >= q);
                    assert!(is_solution(&net, &field, &code).unwrap().solved, "N_{q} over GF({f})");
                }
                None => assert!(f < q),
            }
            if f < q {
                assert!(exhaustive_point_search(&net, &field).unwrap().is_none(), "N_{q} solvable over GF({f})");
            }
        }
        let field = FiniteField::new(q).unwrap();
        assert!(exhaustive_point_search(&net, &field).unwrap().is_some());
    }
}
