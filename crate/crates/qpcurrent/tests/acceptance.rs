//! Acceptance suite. One line per criterion, `ACn PASS` or `ACn FAIL`, then a
//! single assertion that every criterion passed.
//!
//! Run with `cargo test -p qpcurrent --test acceptance -- --nocapture` to see
//! the lines.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use qpcurrent::catalog;
use qpcurrent::session::{load, Session};
use qpcurrent::Options;
use qpcurrent_core::mutation::{self, Mutation};
use qpcurrent_core::{current_commutator, CurrentFunction, Poly, SymplecticStructure, DEFAULT_MAX_TWIST_ORDER};
use qpcurrent_oracle::{exterior_derivative, leibniz_bracket, random_poly, random_setup, subsets};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn session(source: &str) -> Session {
    load(source, Options::default()).unwrap_or_else(|d| {
        let msgs: Vec<String> = d.iter().map(|d| d.render("<acceptance>", source)).collect();
        panic!("scenario does not load:\n{}", msgs.join("\n"))
    })
}

fn ev(s: &Session, text: &str) -> Poly {
    s.evaluate_str(text).unwrap_or_else(|d| panic!("`{text}`: {d}"))
}

/// `name[idx]` differentiated along `derivs`, built without the DSL.
fn sym(s: &Session, name: &str, idx: &[u32], derivs: &[u32]) -> Poly {
    Poly::func(&s.chart, name, idx, derivs).unwrap()
}

fn var(s: &Session, name: &str) -> Poly {
    Poly::var(&s.chart, name).unwrap()
}

fn member(s: &Session, family: &str, key: &[u32]) -> Poly {
    s.currents[family].members[key].clone()
}

fn reduce(s: &Session, p: &Poly) -> Poly {
    s.relations.reduce(p)
}

fn signed(p: Poly, exponent: i64) -> Poly {
    if exponent.rem_euclid(2) == 0 {
        p
    } else {
        -p
    }
}

fn random_graded(rng: &mut ChaCha8Rng, chart: &std::sync::Arc<qpcurrent_core::Chart>) -> (Poly, i64) {
    let d = rng.gen_range(0..=4u32);
    (random_poly(rng, chart, d, 4), d as i64)
}

// Graded Poisson identities with bracket degree -N.
fn ac1() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0xac01);
    let mut count = 0;
    for n in 1..=4u32 {
        let m = n as i64;
        for k in 0..500 {
            let setup = random_setup(&mut rng, n);
            let s = &setup.structure;
            let (f, df) = random_graded(&mut rng, &setup.chart);
            let (g, dg) = random_graded(&mut rng, &setup.chart);
            let (h, dh) = random_graded(&mut rng, &setup.chart);
            let b = |x: &Poly, y: &Poly| s.bracket(x, y).unwrap();
            let anti = b(&f, &g) + signed(b(&g, &f), (df - m) * (dg - m));
            ensure!(anti.is_zero(), "antisymmetry fails at N = {n}, triple {k}: {anti}");
            let left = b(&f, &(&g * &h)) - b(&f, &g) * &h - signed(&g * b(&f, &h), (df - m) * dg);
            ensure!(left.is_zero(), "left Leibniz rule fails at N = {n}, triple {k}: {left}");
            let right = b(&(&f * &g), &h) - &f * b(&g, &h) - signed(b(&f, &h) * &g, dg * (dh - m));
            ensure!(right.is_zero(), "right Leibniz rule fails at N = {n}, triple {k}: {right}");
            let jac = b(&f, &b(&g, &h)) - b(&b(&f, &g), &h) - signed(b(&g, &b(&f, &h)), (df - m) * (dg - m));
            ensure!(jac.is_zero(), "Jacobi identity fails at N = {n}, triple {k}: {jac}");
            count += 1;
        }
    }
    Ok(format!("{count} triples, N = 1..4"))
}

fn ac2() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0xac02);
    for k in 0..500 {
        let n = rng.gen_range(1..=4u32);
        let setup = random_setup(&mut rng, n);
        let (f, _) = random_graded(&mut rng, &setup.chart);
        let (g, _) = random_graded(&mut rng, &setup.chart);
        let fast = setup.structure.bracket(&f, &g).unwrap();
        let slow = leibniz_bracket(&setup.structure, &f, &g);
        ensure!(fast == slow, "pair {k} (N = {n}): engine {fast}, oracle {slow}");
    }
    Ok("500 pairs".into())
}

/// Degree-1 currents on T*[2]T*[1]M with a 3-form H in the Hamiltonian.
fn generalized_source(dim: u32, closed: bool) -> String {
    format!(
        "coord x[1..{dim}] deg 0;
         coord p[1..{dim}] deg 1;
         lift 1: x -> xi, p -> q;
         index I, K, M = 1..{dim};
         symbol H[3] antisym;
         symbol a[1]; symbol u[1]; symbol b[1]; symbol v[1]; symbol c[1]; symbol w[1];
         {}
         theta = sum(I) xi[I] * q[I] + sum(I, K, M) H[I,K,M] * q[I] * q[K] * q[M] / 6;",
        if closed { "closed H;" } else { "" }
    )
}

fn section(s: &Session, form: &str, vector: &str) -> Poly {
    ev(s, &format!("sum(I) ({form}[I] * q[I] + {vector}[I] * p[I])"))
}

/// Minus the H-twisted Dorfman bracket of (u + a) and (v + b), component by
/// component.
fn minus_dorfman(s: &Session, dim: u32) -> Poly {
    let mut out = Poly::zero(&s.chart);
    for i in 1..=dim {
        let p = var(s, &format!("p[{i}]"));
        let q = var(s, &format!("q[{i}]"));
        for k in 1..=dim {
            // vector part: the Lie bracket [u, v]
            let lie = sym(s, "u", &[k], &[]) * sym(s, "v", &[i], &[k]) - sym(s, "v", &[k], &[]) * sym(s, "u", &[i], &[k]);
            // form part: L_u b - i_v da, the latter split into its two terms
            let lie_b = sym(s, "u", &[k], &[]) * sym(s, "b", &[i], &[k]) + sym(s, "b", &[k], &[]) * sym(s, "u", &[k], &[i]);
            let iv_da = sym(s, "v", &[k], &[]) * sym(s, "a", &[i], &[k]) - sym(s, "v", &[k], &[]) * sym(s, "a", &[k], &[i]);
            out -= &(lie * &p);
            out -= &((lie_b - iv_da) * &q);
            for m in 1..=dim {
                let h = sym(s, "H", &[k, m, i], &[]) * sym(s, "u", &[k], &[]) * sym(s, "v", &[m], &[]);
                out -= &(h * &q);
            }
        }
    }
    out
}

fn ac3() -> Check {
    for dim in [2, 3] {
        let s = session(&generalized_source(dim, true));
        let qp = s.qp().unwrap();
        let derived = qp.derived_bracket(&section(&s, "a", "u"), &section(&s, "b", "v")).unwrap();
        let expected = minus_dorfman(&s, dim);
        ensure!(
            reduce(&s, &derived) == reduce(&s, &expected),
            "dim {dim}: derived bracket {derived}\n  expected {expected}"
        );
    }
    let verdict = catalog::find("alekseev_strobl").unwrap().verify(1);
    ensure!(verdict.passed, "alekseev_strobl golden mismatch: {:?}", verdict.diff);
    Ok("dims 2 and 3 match the component expansion; golden matches".into())
}

fn ac4() -> Check {
    let s = session(&generalized_source(2, true));
    let pair = s.pair().unwrap();
    let j1 = CurrentFunction::on(pair, section(&s, "a", "u")).unwrap();
    let j2 = CurrentFunction::on(pair, section(&s, "b", "v")).unwrap();
    let c = current_commutator(pair, &j1, &j2).unwrap();
    let mut expected = Poly::zero(&s.chart);
    for i in 1..=2 {
        expected += &(sym(&s, "a", &[i], &[]) * sym(&s, "v", &[i], &[]) + sym(&s, "u", &[i], &[]) * sym(&s, "b", &[i], &[]));
    }
    ensure!(c.anomaly_unrestricted == expected, "n = 1 anomaly {} vs {expected}", c.anomaly_unrestricted);

    let s = session(catalog::find("threed_algebroid").unwrap().source);
    let pair = s.pair().unwrap();
    let cur = |name: &str| CurrentFunction::on(pair, member(&s, name, &[])).unwrap();
    let (j1, l1, j2, l2) = (cur("J1"), cur("L1"), cur("J2"), cur("L2"));
    let f = |name: &str, idx: &[u32]| sym(&s, name, idx, &[]);
    let kinv = |a: u32, b: u32| f("kinv", &[a, b]);

    let mut expected = Poly::zero(&s.chart);
    for a in 1..=2 {
        for b in 1..=2 {
            expected -= &(kinv(a, b) * f("u", &[a]) * f("u2", &[b]));
        }
    }
    // degree 1 against degree 1 is purely algebraic
    let c = current_commutator(pair, &j1, &l1).unwrap();
    ensure!(c.anomaly_unrestricted.is_zero(), "degree 1/1 anomaly {}", c.anomaly_unrestricted);
    ensure!(c.algebraic == reduce(&s, &expected), "degree 1/1 bracket {} vs {expected}", c.algebraic);

    let mut expected = Poly::zero(&s.chart);
    for i in 1..=2 {
        expected += &(f("G", &[i]) * f("a2", &[i]));
        for a in 1..=2 {
            expected -= &(kinv(i, a) * f("K", &[i]) * f("u2", &[a]));
        }
    }
    let got = current_commutator(pair, &j2, &l1).unwrap().anomaly_unrestricted;
    ensure!(got == reduce(&s, &expected), "G a' - k K u' anomaly {got} vs {expected}");

    // the d x^I and q^A structure functions of the degree-2/degree-2 anomaly
    let mut expected = Poly::zero(&s.chart);
    for i in 1..=2u32 {
        let mut dx = Poly::zero(&s.chart);
        let mut q = Poly::zero(&s.chart);
        for l in 1..=2 {
            dx += &(f("G", &[l]) * f("B2", &[l, i]) + f("G2", &[l]) * f("B", &[l, i]));
        }
        for a in 1..=2 {
            for c in 1..=2 {
                dx += &(kinv(a, c) * (f("K", &[a]) * f("E2", &[c, i]) + f("E", &[a, i]) * f("K2", &[c])));
            }
        }
        // i plays the role of the bundle index A here
        for l in 1..=2 {
            q += &(f("G", &[l]) * f("E2", &[i, l]) + f("G2", &[l]) * f("E", &[i, l]));
        }
        for c in 1..=2 {
            for d in 1..=2 {
                q += &(kinv(c, d) * (f("K", &[c]) * f("F2", &[i, d]) + f("F", &[i, d]) * f("K2", &[c])));
            }
        }
        expected += &(dx * var(&s, &format!("chi[{i}]")));
        expected += &(q * var(&s, &format!("q[{i}]")));
    }
    let got = current_commutator(pair, &j2, &l2).unwrap().anomaly_unrestricted;
    ensure!(got == reduce(&s, &expected), "degree 2/2 anomaly {got}\n  expected {expected}");
    Ok("a v + u b; G a' - k K u'; both degree-2 structure functions".into())
}

fn twisted_poisson_source(dim: u32, relation: bool) -> String {
    let rel = "relation[I, K, M] sum(L) (d[L]pi[I,K] * pi[L,M] + d[L]pi[K,M] * pi[L,I] + d[L]pi[M,I] * pi[L,K])
             = sum(L, N, R) pi[I,L] * pi[K,N] * pi[M,R] * H[L,N,R];";
    format!(
        "coord x[1..{dim}] deg 0;
         coord p[1..{dim}] deg 1;
         lift 1: x -> xi, p -> q;
         index I, K, M, L, N, R = 1..{dim};
         symbol pi[2] antisym;
         symbol H[3] antisym;
         closed H;
         theta = sum(I) xi[I] * q[I] + sum(I, K, M) H[I,K,M] * q[I] * q[K] * q[M] / 6;
         alpha = -sum(I, K) pi[I,K] * p[I] * p[K] / 2;
         {}",
        if relation { rel } else { "" }
    )
}

/// Sum over I < K < M of (triple pi-contraction of H minus the Jacobiator of
/// pi) times p_I p_K p_M, assembled from symbols directly.
fn twisted_jacobi(s: &Session, dim: u32) -> Poly {
    let pi = |a: u32, b: u32, d: &[u32]| sym(s, "pi", &[a, b], d);
    let mut out = Poly::zero(&s.chart);
    for t in subsets(dim, 3) {
        let (i, k, m) = (t[0], t[1], t[2]);
        let mut jac = Poly::zero(&s.chart);
        let mut contraction = Poly::zero(&s.chart);
        for l in 1..=dim {
            jac += &(pi(i, k, &[l]) * pi(l, m, &[]) + pi(k, m, &[l]) * pi(l, i, &[]) + pi(m, i, &[l]) * pi(l, k, &[]));
            for n in 1..=dim {
                for r in 1..=dim {
                    contraction += &(pi(i, l, &[]) * pi(k, n, &[]) * pi(m, r, &[]) * sym(s, "H", &[l, n, r], &[]));
                }
            }
        }
        let ppp = var(s, &format!("p[{i}]")) * var(s, &format!("p[{k}]")) * var(s, &format!("p[{m}]"));
        out += &((contraction - jac) * ppp);
    }
    out
}

fn ac5() -> Check {
    for dim in [3, 4] {
        let s = session(&twisted_poisson_source(dim, false));
        let o = s.pair().unwrap().check_canonical(DEFAULT_MAX_TWIST_ORDER).unwrap();
        let expected = twisted_jacobi(&s, dim);
        ensure!(!o.raw.is_zero(), "dim {dim}: obstruction is identically zero");
        ensure!(o.raw == expected, "dim {dim}: obstruction {}\n  expected {expected}", o.raw);
        let s = session(&twisted_poisson_source(dim, true));
        let o = s.pair().unwrap().check_canonical(DEFAULT_MAX_TWIST_ORDER).unwrap();
        ensure!(o.vanishes(), "dim {dim}: obstruction survives the relation: {}", o.reduced);
    }
    Ok("dims 3 and 4 match componentwise and vanish under the relation".into())
}

/// `±2 dH` times the top monomial, as the master equation of `ξχ + H χ^k/k!`
/// must produce.
fn master_matches_dh(s: &Session, raw: &Poly, form: &str, k: usize, odd: &str) -> Result<(), String> {
    let dim = s.chart.base_coords().len() as u32;
    let dh = exterior_derivative(&s.chart, form, k);
    ensure!(dh.len() == 1, "expected a top form");
    let mut top = Poly::one(&s.chart);
    for i in 1..=dim {
        top = top * var(s, &format!("{odd}[{i}]"));
    }
    let two = Poly::int(&s.chart, 2);
    let target = &dh[0] * &top * &two;
    ensure!(*raw == target || *raw == -&target, "{{theta, theta}} = {raw}, not 2 dH = {target}");
    Ok(())
}

fn ac6() -> Check {
    for closed in [false, true] {
        let s = session(&generalized_source(4, closed));
        let o = s.qp().unwrap().check_master().unwrap();
        master_matches_dh(&s, &o.raw, "H", 3, "q")?;
        ensure!(o.vanishes() == closed, "dim 4, closed = {closed}: reduced master {}", o.reduced);
    }
    for closed in [false, true] {
        let src = format!(
            "coord x[1..6] deg 0;
             coord p[1..6] deg 3;
             lift 3: x -> xi, p -> chi;
             index I, K, L, M, N = 1..6;
             symbol H[5] antisym;
             {}
             theta = sum(I) chi[I] * xi[I]
                 + sum(I, K, L, M, N) H[I,K,L,M,N] * chi[I] * chi[K] * chi[L] * chi[M] * chi[N] / 120;",
            if closed { "closed H;" } else { "" }
        );
        let s = session(&src);
        let o = s.qp().unwrap().check_master().unwrap();
        master_matches_dh(&s, &o.raw, "H", 5, "chi")?;
        ensure!(o.vanishes() == closed, "n = 3, closed = {closed}: reduced master {}", o.reduced);
    }
    Ok("3-form at dim 4 and 5-form at dim 6 (n = 3): nonzero open, zero closed".into())
}

fn ac7() -> Check {
    let s = session(catalog::find("poisson_sigma").unwrap().source);
    let pair = s.pair().unwrap();
    let dim = 3;
    let j = |i: u32| CurrentFunction::on(pair, member(&s, "J", &[i])).unwrap();
    for i in 1..=dim {
        for k in 1..=dim {
            let c = current_commutator(pair, &j(i), &j(k)).unwrap();
            ensure!(c.anomaly_unrestricted.is_zero(), "anomaly of (J{i}, J{k}) = {}", c.anomaly_unrestricted);
            let mut expected = Poly::zero(&s.chart);
            for l in 1..=dim {
                expected -= &(sym(&s, "pi", &[i, k], &[l]) * pair.restrict(j(l).poly()).unwrap());
            }
            ensure!(
                c.algebraic == reduce(&s, &expected),
                "(J{i}, J{k}): algebraic {}\n  expected {expected}",
                c.algebraic
            );
        }
    }
    Ok("3x3 table: -d pi J, zero anomalies".into())
}

fn ac8() -> Check {
    let s = session(catalog::find("courant_sigma").unwrap().source);
    let pair = s.pair().unwrap();
    let qp = pair.big();
    let derived = |a: &Poly, b: &Poly| reduce(&s, &qp.derived_bracket(a, b).unwrap());
    let j1 = |i: u32| member(&s, "J1", &[i]);
    let j2 = |a: u32| member(&s, "J2", &[a]);
    let f = |name: &str, idx: &[u32], d: &[u32]| sym(&s, name, idx, d);
    let mut checked = 0;
    for i in 1..=2 {
        for l in 1..=2 {
            let v = derived(&j1(i), &j1(l));
            ensure!(v.is_zero(), "{{J1[{i}], J1[{l}]}} = {v}");
            checked += 1;
        }
    }
    for a in 1..=3 {
        for i in 1..=2 {
            let mut expected = Poly::zero(&s.chart);
            for l in 1..=2 {
                expected += &(f("f1", &[i, a], &[l]) * j1(l));
            }
            let v = derived(&j2(a), &j1(i));
            ensure!(v == reduce(&s, &expected), "{{J2[{a}], J1[{i}]}} = {v}\n  expected {expected}");
            checked += 1;
        }
    }
    for a in 1..=3 {
        for b in 1..=3 {
            let mut expected = Poly::zero(&s.chart);
            for c in 1..=3 {
                for i in 1..=2 {
                    expected -= &(f("f2", &[a, b, c], &[i]) * j1(i) * var(&s, &format!("q[{c}]")));
                }
                for d in 1..=3 {
                    expected -= &(f("f2", &[a, b, c], &[]) * f("k", &[c, d], &[]) * j2(d));
                }
            }
            let v = derived(&j2(a), &j2(b));
            ensure!(v == reduce(&s, &expected), "{{J2[{a}], J2[{b}]}} = {v}\n  expected {expected}");
            checked += 1;
        }
    }
    let mut basis = Vec::new();
    for name in ["J0", "J1", "J2"] {
        for p in s.currents[name].members.values() {
            basis.push(CurrentFunction::on(pair, p.clone()).unwrap());
        }
    }
    for x in &basis {
        for y in &basis {
            let c = current_commutator(pair, x, y).unwrap();
            ensure!(c.anomaly_unrestricted.is_zero(), "anomaly {} between {} and {}", c.anomaly_unrestricted, x.poly(), y.poly());
        }
    }
    Ok(format!("{checked} family entries; {0}x{0} anomaly column zero", basis.len()))
}

fn ac9() -> Check {
    let s = session(catalog::find("threed_algebroid").unwrap().source);
    let qp = s.qp().unwrap();
    let structure: &SymplecticStructure = qp.structure();
    let theta = s.theta().unwrap();
    let (j2, l1, l2) = (member(&s, "J2", &[]), member(&s, "L1", &[]), member(&s, "L2", &[]));

    let full = qp.derived_bracket(&j2, &l2).unwrap();
    let oracle = leibniz_bracket(structure, &leibniz_bracket(structure, &j2, theta), &l2);
    ensure!(full == oracle, "engine and oracle disagree on {{{{J2, theta}}, L2}}");
    let full1 = qp.derived_bracket(&j2, &l1).unwrap();
    let oracle1 = leibniz_bracket(structure, &leibniz_bracket(structure, &j2, theta), &l1);
    ensure!(full1 == oracle1, "engine and oracle disagree on {{{{J2, theta}}, L1}}");

    // every term belongs to one of the seven structure functions:
    // G p, K eta, F q q, B chi chi, E chi q at degree 2 and u q, alpha chi at degree 1
    let shapes2: [&[&str]; 5] = [&["p"], &["eta"], &["q", "q"], &["chi", "chi"], &["chi", "q"]];
    let shapes1: [&[&str]; 2] = [&["q"], &["chi"]];
    for (value, shapes) in [(&full, &shapes2[..]), (&full1, &shapes1[..])] {
        for (m, _) in value.terms() {
            let mut families: Vec<&str> = Vec::new();
            for &(z, e) in m.gens() {
                for _ in 0..e {
                    families.push(s.chart.coordinate(z).family());
                }
            }
            families.sort();
            ensure!(shapes.iter().any(|sh| *sh == &families[..]), "term outside the structure functions: {families:?}");
        }
    }

    // hand-checked closed forms: G-bar, K-bar, F-bar and u-bar
    let f = |name: &str, idx: &[u32], d: &[u32]| sym(&s, name, idx, d);
    let kinv = |a: u32, b: u32| f("kinv", &[a, b], &[]);
    let mut bar = Poly::zero(&s.chart);
    for i in 1..=2 {
        let mut g = Poly::zero(&s.chart);
        for l in 1..=2 {
            g += &(f("G", &[l], &[]) * f("G2", &[i], &[l]) - f("G2", &[l], &[]) * f("G", &[i], &[l]));
        }
        bar += &(g * var(&s, &format!("p[{i}]")));
    }
    for a in 1..=2 {
        let mut k = Poly::zero(&s.chart);
        for l in 1..=2 {
            k += &(f("G", &[l], &[]) * f("K2", &[a], &[l]) - f("G2", &[l], &[]) * f("K", &[a], &[l]));
            k += &(f("G2", &[l], &[]) * f("E", &[a, l], &[]));
        }
        for b in 1..=2 {
            for c in 1..=2 {
                k += &(f("F", &[a, b], &[]) * kinv(b, c) * f("K2", &[c], &[]));
            }
        }
        bar += &(k * var(&s, &format!("eta[{a}]")));
    }
    let mut fbar = Poly::zero(&s.chart);
    for l in 1..=2 {
        fbar += &(f("G", &[l], &[]) * f("F2", &[1, 2], &[l]) - f("G2", &[l], &[]) * f("F", &[1, 2], &[l]));
    }
    for c in 1..=2 {
        for d in 1..=2 {
            fbar += &(f("F", &[1, c], &[]) * kinv(c, d) * f("F2", &[d, 2], &[]));
            fbar -= &(f("F", &[2, c], &[]) * kinv(c, d) * f("F2", &[d, 1], &[]));
        }
    }
    bar += &(fbar * var(&s, "q[1]") * var(&s, "q[2]"));
    let chi = s.chart.family("chi");
    let no_chi = full.set_zero(&chi).unwrap();
    ensure!(reduce(&s, &no_chi) == reduce(&s, &-&bar), "G, K, F structure functions: {no_chi}\n  expected -({bar})");

    let mut ubar = Poly::zero(&s.chart);
    for a in 1..=2 {
        let mut u = Poly::zero(&s.chart);
        for l in 1..=2 {
            u += &(f("G", &[l], &[]) * f("u2", &[a], &[l]));
        }
        for b in 1..=2 {
            for c in 1..=2 {
                u += &(f("F", &[a, b], &[]) * kinv(b, c) * f("u2", &[c], &[]));
            }
        }
        ubar += &(u * var(&s, &format!("q[{a}]")));
    }
    let no_chi = full1.set_zero(&chi).unwrap();
    ensure!(reduce(&s, &no_chi) == reduce(&s, &-&ubar), "u structure function: {no_chi}\n  expected -({ubar})");

    let verdict = catalog::find("threed_algebroid").unwrap().verify(1);
    ensure!(verdict.passed, "threed_algebroid golden mismatch: {:?}", verdict.diff);
    Ok("oracle agrees; seven shapes; G, K, F and u closed forms; golden matches".into())
}

fn ac10() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0xac10);
    let mut count = 0;
    for n in 1..=4u32 {
        let m = n as i64;
        for k in 0..100 {
            let setup = random_setup(&mut rng, n);
            let s = &setup.structure;
            let theta = random_poly(&mut rng, &setup.chart, n + 1, 4);
            let (f, _) = random_graded(&mut rng, &setup.chart);
            let (g, dg) = random_graded(&mut rng, &setup.chart);
            let (h, dh) = random_graded(&mut rng, &setup.chart);
            let b = |x: &Poly, y: &Poly| s.bracket(x, y).unwrap();
            let d = |x: &Poly, y: &Poly| b(&b(x, &theta), y);
            let failure = d(&(&f * &g), &h)
                - &f * d(&g, &h)
                - signed(d(&f, &h) * &g, dg * (dh + 1 - m))
                - signed(b(&f, &theta) * b(&g, &h), dg)
                - signed(b(&f, &h) * b(&g, &theta), (dg + 1) * (dh - m));
            ensure!(failure.is_zero(), "Leibniz failure identity at N = {n}, triple {k}: {failure}");
            count += 1;
        }
    }

    // Jacobiator of the derived bracket on three degree-1 elements at N = 2,
    // where the graded Leibniz identity carries no signs. Dimension 4 is the
    // smallest where a 3-form can fail to be closed.
    let jacobiator = |s: &Session| {
        let qp = s.qp().unwrap();
        let d = |x: &Poly, y: &Poly| qp.derived_bracket(x, y).unwrap();
        let (x, y, z) = (section(s, "a", "u"), section(s, "b", "v"), section(s, "c", "w"));
        reduce(s, &(d(&x, &d(&y, &z)) - d(&d(&x, &y), &z) - d(&y, &d(&x, &z))))
    };
    let passing = session(&generalized_source(4, true));
    let master = passing.qp().unwrap().check_master().unwrap();
    ensure!(master.vanishes(), "passing witness violates the master equation");
    let jac = jacobiator(&passing);
    ensure!(jac.is_zero(), "Jacobiator survives with the master equation: {jac}");
    let failing = session(&generalized_source(4, false));
    let master = failing.qp().unwrap().check_master().unwrap();
    ensure!(!master.vanishes(), "failing witness satisfies the master equation");
    let jac = jacobiator(&failing);
    ensure!(!jac.is_zero(), "Jacobiator vanishes although the master equation fails");
    Ok(format!("{count} random triples; Jacobiator witnesses agree with the master equation"))
}

fn ac11() -> Check {
    let mut lines = Vec::new();
    for m in [Mutation::FlipBracketSign, Mutation::DropKoszulSign, Mutation::DropFactorial] {
        mutation::set(Some(m));
        let failed: Vec<&str> = catalog::scenarios()
            .iter()
            .filter(|s| catch_unwind(AssertUnwindSafe(|| s.verify(1).passed)).map_or(true, |ok| !ok))
            .map(|s| s.name)
            .collect();
        mutation::set(None);
        ensure!(!failed.is_empty(), "{m:?}: every scenario still matches its golden file");
        lines.push(format!("{m:?} breaks {}", failed.join(", ")));
    }
    for s in catalog::scenarios() {
        ensure!(s.verify(1).passed, "{} fails after the mutations are cleared", s.name);
    }
    Ok(lines.join("; "))
}

#[test]
fn acceptance() {
    type Criterion = (&'static str, fn() -> Check);
    let criteria: [Criterion; 11] = [
        ("AC1", ac1),
        ("AC2", ac2),
        ("AC3", ac3),
        ("AC4", ac4),
        ("AC5", ac5),
        ("AC6", ac6),
        ("AC7", ac7),
        ("AC8", ac8),
        ("AC9", ac9),
        ("AC10", ac10),
        ("AC11", ac11),
    ];
    let mut failed = Vec::new();
    for (id, run) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(run).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("{id} PASS ({secs:.1}s) {detail}"),
            Err(why) => {
                println!("{id} FAIL ({secs:.1}s) {why}");
                failed.push(id);
            }
        }
    }
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
