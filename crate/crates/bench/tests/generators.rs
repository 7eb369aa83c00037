use gradpre_bench::{chain, lts, random_subdist, rng, zigzag};
use gradpre_core::sdist::sdist_leq_flow;
use gradpre_core::Rational;

#[test]
fn posets_have_expected_shape() {
    let c = chain(4);
    assert_eq!(c.len(), 4);
    assert!(c.leq(0, 3) && !c.leq(3, 0));
    let z = zigzag(6);
    assert_eq!(z.len(), 6);
    assert!(z.leq(0, 3) && z.leq(0, 4) && !z.leq(0, 5));
}

#[test]
fn subdists_are_valid_and_deterministic() {
    let p = zigzag(8);
    let (mut a, mut b) = (rng(3), rng(3));
    for _ in 0..50 {
        let mu = random_subdist(&mut a, &p, 6);
        assert!(mu.mass() <= Rational::one());
        assert_eq!(mu, random_subdist(&mut b, &p, 6));
        assert!(sdist_leq_flow(&p, &mu, &mu).unwrap());
    }
}

#[test]
fn systems_are_reproducible() {
    let s = lts(9, 6, 0.3);
    assert_eq!(s.len(), 6);
    assert_eq!(format!("{s:?}"), format!("{:?}", lts(9, 6, 0.3)));
}
