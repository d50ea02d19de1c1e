use std::sync::Arc;

use proptest::prelude::*;
use qpcurrent_core::{twist, Chart, CoordId, Error, Poly, SymplecticStructure};
use qpcurrent_oracle::{random_poly, random_setup};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MAX: usize = 8;

/// A random degree-`n` function built from one side of each conjugate pair,
/// never from `xi` or a self-paired family. Each `δ_α` step removes a
/// conjugate factor, so the twisting series always terminates.
fn nilpotent_alpha(rng: &mut ChaCha8Rng, s: &SymplecticStructure, chart: &Arc<Chart>, n: u32) -> Poly {
    let mut side: Vec<CoordId> = Vec::new();
    for z in chart.coord_ids() {
        let partners = s.partners(z);
        let free = chart.degree(z) > 0
            && chart.coordinate(z).family() != "xi"
            && !partners.contains(&z)
            && partners.iter().all(|w| !side.contains(w));
        if free && rng.gen_bool(0.7) {
            side.push(z);
        }
    }
    let coefficients = [Poly::func(chart, "f", &[], &[]).unwrap(), Poly::func(chart, "a", &[1], &[]).unwrap()];
    let mut alpha = Poly::zero(chart);
    for _ in 0..rng.gen_range(1..=3) {
        let mut term = coefficients.choose(rng).unwrap().clone();
        let mut remaining = n;
        while remaining > 0 {
            let fits: Vec<CoordId> = side.iter().copied().filter(|&z| chart.degree(z) <= remaining).collect();
            let Some(&z) = fits.choose(rng) else { break };
            term = term * Poly::coord(chart, z);
            remaining -= chart.degree(z);
        }
        if remaining == 0 {
            alpha += &term;
        }
    }
    alpha
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    // e^{δ_α} is a Poisson automorphism whenever the series terminates
    #[test]
    fn twist_is_a_morphism(seed in any::<u64>(), n in 1u32..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let setup = random_setup(&mut rng, n);
        let s = &setup.structure;
        let alpha = nilpotent_alpha(&mut rng, s, &setup.chart, n);
        let df = rng.gen_range(0..=3);
        let dg = rng.gen_range(0..=3);
        let f = random_poly(&mut rng, &setup.chart, df, 3);
        let g = random_poly(&mut rng, &setup.chart, dg, 3);
        let t = |p: &Poly| twist(s, p, &alpha, MAX).map(|t| t.value);
        let fg = s.bracket(&f, &g).unwrap();
        let (tf, tg) = (t(&f).unwrap(), t(&g).unwrap());
        prop_assert_eq!(t(&fg).unwrap(), s.bracket(&tf, &tg).unwrap());
        prop_assert_eq!(t(&(&f * &g)).unwrap(), &tf * &tg);
    }

    #[test]
    fn alpha_is_fixed(seed in any::<u64>(), n in 1u32..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let setup = random_setup(&mut rng, n);
        let alpha = random_poly(&mut rng, &setup.chart, n, 3);
        let t = twist(&setup.structure, &alpha, &alpha, MAX).unwrap();
        prop_assert_eq!(t.order, 0);
        prop_assert_eq!(t.value, alpha);
        prop_assert!(t.warning.is_none());
    }

    // twisting by α and then by -α is the identity
    #[test]
    fn inverse_twist(seed in any::<u64>(), n in 1u32..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let setup = random_setup(&mut rng, n);
        let s = &setup.structure;
        let alpha = nilpotent_alpha(&mut rng, s, &setup.chart, n);
        let d = rng.gen_range(0..=3);
        let f = random_poly(&mut rng, &setup.chart, d, 3);
        let forward = twist(s, &f, &alpha, MAX).unwrap();
        let back = twist(s, &forward.value, &-&alpha, MAX).unwrap();
        prop_assert_eq!(back.value, f);
    }
}

#[test]
fn nilpotent_alphas_act() {
    // guards the morphism property against passing vacuously
    let mut nontrivial = 0;
    // at N = 1 only x and xi exist, so α is always zero there
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(2..=4);
        let setup = random_setup(&mut rng, n);
        let alpha = nilpotent_alpha(&mut rng, &setup.structure, &setup.chart, n);
        let f = random_poly(&mut rng, &setup.chart, n, 3);
        if twist(&setup.structure, &f, &alpha, MAX).unwrap().order > 0 {
            nontrivial += 1;
        }
    }
    assert!(nontrivial >= 15, "only {nontrivial} of 100 twists act nontrivially");
}

#[test]
fn runaway_twist_is_reported() {
    // α = x ξ rescales ξ, so the series never stops
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let setup = random_setup(&mut rng, 1);
    let x = Poly::var(&setup.chart, "x[1]").unwrap();
    let xi = Poly::var(&setup.chart, "xi[1]").unwrap();
    let r = twist(&setup.structure, &xi, &(&x * &xi), 6);
    assert!(matches!(r, Err(Error::TwistNotTerminating { max_order: 6 })), "{r:?}");
}

#[test]
fn wrong_degree_alpha_warns() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let setup = random_setup(&mut rng, 2);
    let alpha = random_poly(&mut rng, &setup.chart, 1, 2);
    let x = Poly::var(&setup.chart, "x[1]").unwrap();
    if let Ok(t) = twist(&setup.structure, &x, &alpha, MAX) {
        assert!(t.warning.is_some());
    }
    assert!(matches!(twist(&setup.structure, &x, &alpha, 0), Err(Error::InvalidMaxOrder)));
}
