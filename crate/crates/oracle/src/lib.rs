//! Slow, independent reference computations for cross-checking the engine.
//!
//! Nothing here calls the engine's product, derivative or bracket code:
//! products sort an explicit generator word with bubble sort, and brackets are
//! computed by peeling factors off monomials with the graded Leibniz rules
//! until only generator pairs remain.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use qpcurrent_core::{
    Block, Chart, ChartBuilder, CoordId, Monomial, Poly, Sym, SymbolDecl, SymplecticStructure,
};
use rand::seq::SliceRandom;
use rand::Rng;

pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// A monomial as an explicit, unsorted list of factors.
#[derive(Clone, Debug)]
enum Factor {
    Gen(CoordId),
    Fun(Sym),
}

fn factors(m: &Monomial) -> Vec<Factor> {
    let mut out: Vec<Factor> = m.funcs().iter().cloned().map(Factor::Fun).collect();
    for &(z, e) in m.gens() {
        for _ in 0..e {
            out.push(Factor::Gen(z));
        }
    }
    out
}

fn factor_degree(chart: &Chart, f: &Factor) -> u32 {
    match f {
        Factor::Gen(z) => chart.degree(*z),
        Factor::Fun(_) => 0,
    }
}

/// Sorts a factor word by bubble sort, tracking the Koszul sign, and
/// returns the normalized term (or `None` if an odd generator repeats).
fn normalize_word(chart: &Arc<Chart>, word: &[Factor], coeff: Q) -> Option<(Monomial, Q)> {
    let mut funcs: Vec<Sym> = Vec::new();
    let mut gens: Vec<CoordId> = Vec::new();
    for f in word {
        match f {
            Factor::Fun(s) => funcs.push(s.clone()),
            Factor::Gen(z) => gens.push(*z),
        }
    }
    let mut negative = false;
    let n = gens.len();
    for i in 0..n {
        for j in 0..n - 1 - i {
            if gens[j] > gens[j + 1] {
                if chart.is_odd(gens[j]) && chart.is_odd(gens[j + 1]) {
                    negative = !negative;
                }
                gens.swap(j, j + 1);
            }
        }
    }
    let mut grouped: Vec<(CoordId, u32)> = Vec::new();
    for z in gens {
        match grouped.last_mut() {
            Some((w, e)) if *w == z => {
                if chart.is_odd(z) {
                    return None;
                }
                *e += 1;
            }
            _ => grouped.push((z, 1)),
        }
    }
    funcs.sort();
    let m = Monomial::from_sorted(chart, funcs, grouped).expect("normalized by construction");
    Some((m, if negative { -coeff } else { coeff }))
}

fn from_word(chart: &Arc<Chart>, word: &[Factor], coeff: Q) -> Poly {
    match normalize_word(chart, word, coeff) {
        Some((m, c)) => Poly::monomial(chart, m, c),
        None => Poly::zero(chart),
    }
}

/// Product that concatenates factor words and sorts at the end.
pub fn naive_mul(a: &Poly, b: &Poly) -> Poly {
    let chart = a.chart().clone();
    let mut out = Poly::zero(&chart);
    for (ma, ca) in a.terms() {
        for (mb, cb) in b.terms() {
            let mut word = factors(ma);
            word.extend(factors(mb));
            out += &from_word(&chart, &word, ca * cb);
        }
    }
    out
}

/// Bracket computed from the generator table by bilinearity and the graded
/// Leibniz rules with `m = -N`:
///
/// `{f, gh} = {f,g}h + (-1)^{(|f|-N)|g|} g{f,h}`,
/// `{fg, h} = f{g,h} + (-1)^{|g|(|h|-N)} {f,h}g`.
///
/// Coefficient functions are handled by the chain rule through the
/// degree-0 coordinates.
pub fn leibniz_bracket(s: &SymplecticStructure, f: &Poly, g: &Poly) -> Poly {
    let chart = s.chart().clone();
    let mut out = Poly::zero(&chart);
    for (ma, ca) in f.terms() {
        for (mb, cb) in g.terms() {
            let b = word_bracket(s, &factors(ma), &factors(mb));
            out += &b.scale(&(ca * cb));
        }
    }
    out
}

fn word_degree(chart: &Chart, w: &[Factor]) -> i64 {
    w.iter().map(|f| factor_degree(chart, f) as i64).sum()
}

fn word_poly(chart: &Arc<Chart>, w: &[Factor]) -> Poly {
    from_word(chart, w, Q::one())
}

fn sign(exponent: i64) -> Q {
    if exponent.rem_euclid(2) == 0 {
        Q::one()
    } else {
        -Q::one()
    }
}

fn word_bracket(s: &SymplecticStructure, a: &[Factor], b: &[Factor]) -> Poly {
    let chart = s.chart().clone();
    let n = s.degree() as i64;
    if a.is_empty() || b.is_empty() {
        return Poly::zero(&chart);
    }
    if a.len() > 1 {
        // {x A', B} = x {A', B} + (-1)^{|A'|(|B|-N)} {x, B} A'
        let (x, rest) = a.split_at(1);
        let first = naive_mul(&word_poly(&chart, x), &word_bracket(s, rest, b));
        let second = naive_mul(&word_bracket(s, x, b), &word_poly(&chart, rest));
        let e = word_degree(&chart, rest) * (word_degree(&chart, b) - n);
        return first + second.scale(&sign(e));
    }
    if b.len() > 1 {
        // {x, y B'} = {x, y} B' + (-1)^{(|x|-N)|y|} y {x, B'}
        let (y, rest) = b.split_at(1);
        let first = naive_mul(&word_bracket(s, a, y), &word_poly(&chart, rest));
        let second = naive_mul(&word_poly(&chart, y), &word_bracket(s, a, rest));
        let e = (word_degree(&chart, a) - n) * word_degree(&chart, y);
        return first + second.scale(&sign(e));
    }
    atom_bracket(s, &a[0], &b[0])
}

fn atom_bracket(s: &SymplecticStructure, a: &Factor, b: &Factor) -> Poly {
    let chart = s.chart().clone();
    match (a, b) {
        (Factor::Gen(x), Factor::Gen(y)) => s.generator_bracket(*x, *y),
        (Factor::Fun(phi), other) => {
            // {φ, z} = Σ_I ∂_I φ {x^I, z}
            let mut out = Poly::zero(&chart);
            for (k, &x) in chart.base_coords().iter().enumerate() {
                let Some(d) = phi.derivative(&chart, k as u32 + 1) else { continue };
                let inner = atom_bracket(s, &Factor::Gen(x), other);
                out += &naive_mul(&word_poly(&chart, &[Factor::Fun(d)]), &inner);
            }
            out
        }
        (Factor::Gen(_), Factor::Fun(psi)) => {
            // {z, ψ} = Σ_I {z, x^I} ∂_I ψ
            let mut out = Poly::zero(&chart);
            for (k, &x) in chart.base_coords().iter().enumerate() {
                let Some(d) = psi.derivative(&chart, k as u32 + 1) else { continue };
                let inner = atom_bracket(s, a, &Factor::Gen(x));
                out += &naive_mul(&inner, &word_poly(&chart, &[Factor::Fun(d)]));
            }
            out
        }
    }
}

/// Components `(dH)_{I_0..I_k}` of the exterior derivative of a totally
/// antisymmetric k-index symbol, by summing over all permutations of each
/// increasing index tuple and dividing by `k!`.
pub fn exterior_derivative(chart: &Arc<Chart>, name: &str, k: usize) -> Vec<Poly> {
    let dim = chart.base_coords().len() as u32;
    let mut out = Vec::new();
    for tuple in subsets(dim, k + 1) {
        let mut acc = Poly::zero(chart);
        for (perm, odd) in permutations(&tuple) {
            let t = Poly::func(chart, name, &perm[1..], &[perm[0]]).expect("declared symbol");
            acc += &t.scale(&sign(odd as i64));
        }
        let kf: i64 = (1..=k as i64).product();
        out.push(acc.scale(&q(1, kf)));
    }
    out
}

/// Increasing `k`-tuples from `1..=dim`.
pub fn subsets(dim: u32, k: usize) -> Vec<Vec<u32>> {
    fn go(start: u32, dim: u32, k: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..=dim {
            cur.push(i);
            go(i + 1, dim, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(1, dim, k, &mut Vec::new(), &mut out);
    out
}

/// All permutations with their parity (`true` = odd).
pub fn permutations(items: &[u32]) -> Vec<(Vec<u32>, bool)> {
    if items.len() <= 1 {
        return vec![(items.to_vec(), false)];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for (mut p, odd) in permutations(&rest) {
            p.insert(0, head);
            out.push((p, odd ^ (i % 2 == 1)));
        }
    }
    out
}

/// A randomly shaped symplectic structure for property tests.
#[derive(Clone, Debug)]
pub struct RandomSetup {
    pub chart: Arc<Chart>,
    pub structure: SymplecticStructure,
    pub degree: u32,
}

/// Symbols available in random charts: `f` (scalar), `a[I]`, `pi[I,J]`
/// (antisymmetric), all functions of the degree-0 coordinates.
pub fn random_setup<R: Rng>(rng: &mut R, degree: u32) -> RandomSetup {
    let mut b = ChartBuilder::new();
    let dim = rng.gen_range(1..=2u32);
    let x = b.family("x", 1..=dim, 0).unwrap();
    let xi = b.family("xi", 1..=dim, degree).unwrap();
    let mut pairs: Vec<(Vec<CoordId>, Vec<CoordId>, i8)> = vec![(x, xi, 1)];
    let mut selfs: Vec<(Vec<CoordId>, u32)> = Vec::new();
    let mut names = ["u", "v", "w", "y", "z"].into_iter();
    for d in 1..=degree / 2 {
        if !rng.gen_bool(0.8) {
            continue;
        }
        let count = rng.gen_range(1..=2u32);
        let name = names.next().unwrap();
        if 2 * d == degree && rng.gen_bool(0.4) {
            // self-paired family: symmetric weight for odd, antisymmetric for even
            let count = if d % 2 == 0 { 2 } else { count };
            let zs = b.family(name, 1..=count, d).unwrap();
            selfs.push((zs, d));
        } else {
            let zs = b.family(name, 1..=count, d).unwrap();
            let conj = b.family(&format!("{name}c"), 1..=count, degree - d).unwrap();
            let s = if rng.gen_bool(0.5) { 1 } else { -1 };
            pairs.push((zs, conj, s));
        }
    }
    b.symbol(SymbolDecl::new("f", 0)).unwrap();
    b.symbol(SymbolDecl::new("a", 1)).unwrap();
    b.symbol(SymbolDecl::new("pi", 2).antisymmetric()).unwrap();
    let chart = b.build().unwrap();
    let mut blocks = Vec::new();
    for (left, right, s) in pairs {
        for (l, r) in left.into_iter().zip(right) {
            blocks.push(Block::pair(&chart, l, r, s));
        }
    }
    for (zs, d) in selfs {
        let n = zs.len();
        let mut w = vec![vec![Poly::zero(&chart); n]; n];
        if d % 2 == 1 {
            for (i, row) in w.iter_mut().enumerate() {
                row[i] = Poly::int(&chart, rng.gen_range(1..=2));
            }
            if n == 2 {
                let c = Poly::int(&chart, 1);
                w[0][1] = c.clone();
                w[1][0] = c;
                w[0][0] = Poly::int(&chart, 2);
            }
        } else {
            w[0][1] = Poly::int(&chart, 1);
            w[1][0] = Poly::int(&chart, -1);
        }
        blocks.push(Block::self_paired(zs, w));
    }
    let structure = SymplecticStructure::new(&chart, degree, blocks).expect("random structure is valid");
    RandomSetup { chart, structure, degree }
}

/// A random polynomial of the given degree with at most `max_terms` terms.
/// Coefficients are small rationals times up to two coefficient symbols.
pub fn random_poly<R: Rng>(rng: &mut R, chart: &Arc<Chart>, degree: u32, max_terms: usize) -> Poly {
    let ids: Vec<CoordId> = (0..chart.coords().len()).map(|i| CoordId(i as u16)).collect();
    let dim = chart.base_coords().len() as u32;
    let mut out = Poly::zero(chart);
    let terms = rng.gen_range(1..=max_terms);
    for _ in 0..terms {
        let mut word: Vec<Factor> = Vec::new();
        let mut remaining = degree;
        let mut guard = 0;
        while remaining > 0 && guard < 20 {
            guard += 1;
            let fits: Vec<CoordId> =
                ids.iter().copied().filter(|&z| chart.degree(z) > 0 && chart.degree(z) <= remaining).collect();
            let Some(&z) = fits.choose(rng) else { break };
            word.push(Factor::Gen(z));
            remaining -= chart.degree(z);
        }
        if remaining > 0 {
            continue;
        }
        for _ in 0..rng.gen_range(0..=1) {
            word.push(Factor::Gen(chart.base_coords()[rng.gen_range(0..dim as usize)]));
        }
        let mut coeff = random_scalar(rng);
        for _ in 0..rng.gen_range(0..=2) {
            let pick = rng.gen_range(0..3);
            let (name, arity) = [("f", 0usize), ("a", 1), ("pi", 2)][pick];
            let idx: Vec<u32> = (0..arity).map(|_| rng.gen_range(1..=dim.max(2))).collect();
            let derivs: Vec<u32> = if rng.gen_bool(0.2) { vec![rng.gen_range(1..=dim)] } else { vec![] };
            if let Ok(Some((s, neg))) = Sym::named(chart, name, &idx, &derivs) {
                if neg {
                    coeff = -coeff;
                }
                word.push(Factor::Fun(s));
            }
        }
        word.shuffle(rng);
        out += &from_word(chart, &word, coeff);
    }
    out
}

fn random_scalar<R: Rng>(rng: &mut R) -> Q {
    let n = rng.gen_range(1..=4) * if rng.gen_bool(0.5) { 1 } else { -1 };
    let d = rng.gen_range(1..=3);
    q(n, d)
}

