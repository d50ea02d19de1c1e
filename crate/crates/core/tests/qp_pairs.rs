use std::sync::Arc;

use qpcurrent_core::{
    closedness_relations, commutator_table, cotangent_lift, current_commutator, render_classical, twist_current_basis,
    Chart, ChartBuilder, CurrentFunction, Error, LiftFamily, Poly, QPPair, RelationSet, SymbolDecl, DEFAULT_MAX_TWIST_ORDER,
};

/// T*[2]T*[1]M over a `dim`-dimensional base with symbols for a bivector,
/// a 3-form and a pair of sections.
fn lifted(dim: u32) -> (Arc<Chart>, qpcurrent_core::CotangentLift) {
    let mut b = ChartBuilder::new();
    b.family("x", 1..=dim, 0).unwrap();
    b.family("p", 1..=dim, 1).unwrap();
    b.symbol(SymbolDecl::new("pi", 2).antisymmetric()).unwrap();
    b.symbol(SymbolDecl::new("H", 3).antisymmetric()).unwrap();
    b.symbol(SymbolDecl::new("a", 1)).unwrap();
    b.symbol(SymbolDecl::new("u", 1)).unwrap();
    let small = b.build().unwrap();
    let lift = cotangent_lift(&small, 1, &[LiftFamily::new("x", "xi"), LiftFamily::new("p", "q")]).unwrap();
    (lift.chart.clone(), lift)
}

fn v(chart: &Arc<Chart>, name: &str) -> Poly {
    Poly::var(chart, name).unwrap()
}

fn darboux_theta(chart: &Arc<Chart>, dim: u32) -> Poly {
    let mut t = Poly::zero(chart);
    for i in 1..=dim {
        t += &(v(chart, &format!("xi[{i}]")) * v(chart, &format!("q[{i}]")));
    }
    t
}

fn poisson_alpha(chart: &Arc<Chart>, dim: u32) -> Poly {
    let mut a = Poly::zero(chart);
    for i in 1..=dim {
        for k in i + 1..=dim {
            let pi = Poly::func(chart, "pi", &[i, k], &[]).unwrap();
            a += &(pi * v(chart, &format!("p[{i}]")) * v(chart, &format!("p[{k}]")));
        }
    }
    a
}

#[test]
fn lift_degrees_and_lagrangian() {
    let (chart, lift) = lifted(2);
    assert_eq!(lift.structure.degree(), 2);
    for z in &lift.lagrangian {
        assert!(matches!(chart.coordinate(*z).family(), "xi" | "q"));
    }
    assert_eq!(chart.degree(chart.find_by_name("xi[1]").unwrap()), 2);
    assert_eq!(chart.degree(chart.find_by_name("q[2]").unwrap()), 1);
}

#[test]
fn small_bracket_of_a_cotangent_lift_is_canonical() {
    let dim = 2;
    let (chart, lift) = lifted(dim);
    let theta = darboux_theta(&chart, dim);
    let pair = lift.qp_pair(theta, RelationSet::new(&chart), Poly::zero(&chart)).unwrap();
    let small = pair.small_structure();
    let sc = small.chart();
    for i in 1..=dim {
        for k in 1..=dim {
            let b = small.bracket(&v(sc, &format!("x[{i}]")), &v(sc, &format!("p[{k}]"))).unwrap();
            let expected = if i == k { Poly::int(sc, 1) } else { Poly::zero(sc) };
            assert_eq!(b, expected, "{{x[{i}], p[{k}]}}");
        }
    }
}

#[test]
fn master_equation_needs_a_closed_form() {
    let dim = 4;
    let (chart, lift) = lifted(dim);
    let mut theta = darboux_theta(&chart, dim);
    for i in 1..=dim {
        for k in 1..=dim {
            for m in 1..=dim {
                let h = Poly::func(&chart, "H", &[i, k, m], &[]).unwrap();
                let qqq = v(&chart, &format!("q[{i}]")) * v(&chart, &format!("q[{k}]")) * v(&chart, &format!("q[{m}]"));
                theta += &(h * qqq).scale(&qpcurrent_core::Scalar::new(1.into(), 6.into()));
            }
        }
    }
    let open = lift.qp_pair(theta.clone(), RelationSet::new(&chart), Poly::zero(&chart));
    assert!(matches!(open, Err(Error::MasterEquation(_))));
    let mut rels = RelationSet::new(&chart);
    rels.extend(closedness_relations(&chart, "H").unwrap()).unwrap();
    let pair = lift.qp_pair(theta, rels, Poly::zero(&chart)).unwrap();
    assert!(pair.big().check_master().unwrap().vanishes());
}

#[test]
fn poisson_twist_of_the_current_basis() {
    let dim = 2;
    let (chart, lift) = lifted(dim);
    let pair: QPPair =
        lift.qp_pair(darboux_theta(&chart, dim), RelationSet::new(&chart), poisson_alpha(&chart, dim)).unwrap();
    // in two dimensions every bivector is Poisson
    assert!(pair.check_canonical(DEFAULT_MAX_TWIST_ORDER).unwrap().vanishes());
    let basis: Vec<_> =
        (1..=dim).map(|i| CurrentFunction::on(&pair, v(&chart, &format!("q[{i}]"))).unwrap()).collect();
    let twisted = twist_current_basis(&pair, &basis, DEFAULT_MAX_TWIST_ORDER).unwrap();
    let pi12 = Poly::func(&chart, "pi", &[1, 2], &[]).unwrap();
    assert_eq!(twisted[0].poly(), &(v(&chart, "q[1]") + &pi12 * v(&chart, "p[2]")));
    assert_eq!(twisted[1].poly(), &(v(&chart, "q[2]") - &pi12 * v(&chart, "p[1]")));
    let table = commutator_table(&pair, &twisted).unwrap();
    for (_, _, c) in table.entries() {
        assert!(c.anomaly_unrestricted.is_zero());
    }
    // {J1, J2} = -d_K pi^{12} J^K on the small manifold
    let c = table.get(0, 1);
    let mut expected = Poly::zero(&chart);
    for k in 1..=dim {
        let d = Poly::func(&chart, "pi", &[1, 2], &[k]).unwrap();
        expected -= &(d * pair.restrict(twisted[(k - 1) as usize].poly()).unwrap());
    }
    assert_eq!(c.algebraic, expected);
    assert_eq!(render_classical(&twisted[0], &pair), "pi[1,2](x) p[2] + dx[1]");
}

#[test]
fn non_commuting_basis_is_rejected() {
    let dim = 2;
    let (chart, lift) = lifted(dim);
    let pair = lift.qp_pair(darboux_theta(&chart, dim), RelationSet::new(&chart), Poly::zero(&chart)).unwrap();
    let basis = [
        CurrentFunction::on(&pair, v(&chart, "q[1]")).unwrap(),
        CurrentFunction::on(&pair, v(&chart, "p[1]")).unwrap(),
    ];
    let r = twist_current_basis(&pair, &basis, DEFAULT_MAX_TWIST_ORDER);
    assert!(matches!(r, Err(Error::NotCommuting { .. })), "{r:?}");
}

#[test]
fn current_degree_is_bounded_by_n() {
    let dim = 2;
    let (chart, lift) = lifted(dim);
    let pair = lift.qp_pair(darboux_theta(&chart, dim), RelationSet::new(&chart), Poly::zero(&chart)).unwrap();
    assert!(CurrentFunction::on(&pair, v(&chart, "xi[1]")).is_err());
    let j = CurrentFunction::on(&pair, v(&chart, "x[1]")).unwrap();
    let k = CurrentFunction::on(&pair, v(&chart, "p[1]")).unwrap();
    let c = current_commutator(&pair, &k, &j).unwrap();
    // the small bracket {p, x} = -{x, p}
    assert_eq!(c.algebraic, Poly::int(&chart, -1));
    assert!(c.anomaly.is_zero());
}
