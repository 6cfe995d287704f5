//! Seeded perturbations that obscure structure the way mesh decompilers
//! do, without changing the denoted solid.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::lang::{semantic_equiv, AffineKind, BinopKind, Expr, PrimKind};
use crate::scalar::round_sig;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbOptions {
    /// Swap `Rotate [0,0,180]` and `Scale [-1,-1,1]` (each with probability ½).
    pub substitute_identities: bool,
    /// Remove identity affines.
    pub drop_identities: bool,
    /// Push translates through scales, and primitives into scaled unit
    /// primitives (each with probability ½).
    pub interchange: bool,
    /// Shuffle the arguments of Union/Intersection chains.
    pub shuffle_ac: bool,
    /// Amplitude of uniform numeric noise; 0 disables.
    pub jitter: f64,
}

impl PerturbOptions {
    pub fn none() -> Self {
        PerturbOptions { substitute_identities: false, drop_identities: false, interchange: false, shuffle_ac: false, jitter: 0.0 }
    }

    pub fn all(jitter: f64) -> Self {
        PerturbOptions { substitute_identities: true, drop_identities: true, interchange: true, shuffle_ac: true, jitter }
    }
}

fn literal3(e: &Expr) -> Option<[f64; 3]> {
    <[f64; 3]>::try_from(e.as_literal_vec()?).ok()
}

fn drop_identities(e: &Expr) -> Expr {
    match e {
        Expr::Affine(k, p, c) => {
            let c = drop_identities(c);
            let identity = match k {
                AffineKind::Scale => [1.0; 3],
                _ => [0.0; 3],
            };
            if literal3(p) == Some(identity) {
                c
            } else {
                Expr::affine(*k, (**p).clone(), c)
            }
        }
        Expr::Binop(k, a, b) => Expr::binop(*k, drop_identities(a), drop_identities(b)),
        other => other.clone(),
    }
}

fn substitute(e: &Expr, rng: &mut ChaCha8Rng) -> Expr {
    match e {
        Expr::Affine(k, p, c) => {
            let c = substitute(c, rng);
            let v = literal3(p);
            let swapped = match (k, v) {
                (AffineKind::Rotate, Some([0.0, 0.0, 180.0])) => Some(Expr::affine(AffineKind::Scale, Expr::v3(-1.0, -1.0, 1.0), c.clone())),
                (AffineKind::Scale, Some([-1.0, -1.0, 1.0])) => Some(Expr::affine(AffineKind::Rotate, Expr::v3(0.0, 0.0, 180.0), c.clone())),
                _ => None,
            };
            match swapped {
                Some(s) if rng.gen_bool(0.5) => s,
                _ => Expr::affine(*k, (**p).clone(), c),
            }
        }
        Expr::Binop(k, a, b) => Expr::binop(*k, substitute(a, rng), substitute(b, rng)),
        other => other.clone(),
    }
}

fn zip3(a: [f64; 3], b: [f64; 3], f: impl Fn(f64, f64) -> f64) -> Expr {
    Expr::v3(round_sig(f(a[0], b[0])), round_sig(f(a[1], b[1])), round_sig(f(a[2], b[2])))
}

/// Positive primitive parameters as a per-axis scale.
fn unit_scale(kind: PrimKind, param: &Expr) -> Option<[f64; 3]> {
    let params = match kind {
        PrimKind::Sphere => vec![param.as_num()?],
        _ => param.as_literal_vec()?,
    };
    let s = kind.scale_of(&params);
    s.iter().all(|&x| x > 0.0).then_some(s)
}

fn unit(kind: PrimKind) -> Expr {
    match kind {
        PrimKind::Cuboid => Expr::cuboid(1.0, 1.0, 1.0),
        PrimKind::Sphere => Expr::sphere(1.0),
        PrimKind::Cylinder | PrimKind::HexPrism => Expr::prim(kind, Expr::v2(1.0, 1.0)),
    }
}

fn interchange(e: &Expr, rng: &mut ChaCha8Rng) -> Expr {
    match e {
        Expr::Prim(k, p) => match unit_scale(*k, p) {
            Some(s) if s != [1.0; 3] && rng.gen_bool(0.5) => {
                Expr::affine(AffineKind::Scale, Expr::v3(s[0], s[1], s[2]), unit(*k))
            }
            _ => e.clone(),
        },
        Expr::Affine(k, p, c) => {
            let c = interchange(c, rng);
            let v = literal3(p);
            match (k, v, &c) {
                // Translate t (Scale s x) = Scale s (Translate t/s x)
                (AffineKind::Translate, Some(t), Expr::Affine(AffineKind::Scale, sp, x)) => match literal3(sp) {
                    Some(s) if !s.contains(&0.0) && rng.gen_bool(0.5) => Expr::affine(
                        AffineKind::Scale,
                        (**sp).clone(),
                        Expr::affine(AffineKind::Translate, zip3(t, s, |t, s| t / s), (**x).clone()),
                    ),
                    _ => Expr::affine(*k, (**p).clone(), c),
                },
                // Scale s (Translate t x) = Translate s·t (Scale s x)
                (AffineKind::Scale, Some(s), Expr::Affine(AffineKind::Translate, tp, x)) => match literal3(tp) {
                    Some(t) if rng.gen_bool(0.5) => Expr::affine(
                        AffineKind::Translate,
                        zip3(s, t, |s, t| s * t),
                        Expr::affine(AffineKind::Scale, (**p).clone(), (**x).clone()),
                    ),
                    _ => Expr::affine(*k, (**p).clone(), c),
                },
                _ => Expr::affine(*k, (**p).clone(), c),
            }
        }
        Expr::Binop(k, a, b) => Expr::binop(*k, interchange(a, rng), interchange(b, rng)),
        other => other.clone(),
    }
}

fn flatten_chain<'a>(e: &'a Expr, kind: BinopKind, out: &mut Vec<&'a Expr>) {
    match e {
        Expr::Binop(k, a, b) if *k == kind => {
            flatten_chain(a, kind, out);
            flatten_chain(b, kind, out);
        }
        other => out.push(other),
    }
}

fn shuffle_ac(e: &Expr, rng: &mut ChaCha8Rng) -> Expr {
    match e {
        Expr::Binop(k, _, _) if k.is_ac() => {
            let mut leaves = Vec::new();
            flatten_chain(e, *k, &mut leaves);
            let mut items: Vec<Expr> = leaves.into_iter().map(|l| shuffle_ac(l, rng)).collect();
            items.shuffle(rng);
            Expr::chain(*k, items).expect("a chain has at least two leaves")
        }
        Expr::Binop(k, a, b) => Expr::binop(*k, shuffle_ac(a, rng), shuffle_ac(b, rng)),
        Expr::Affine(k, p, c) => Expr::affine(*k, (**p).clone(), shuffle_ac(c, rng)),
        other => other.clone(),
    }
}

fn jitter(e: &Expr, amp: f64, rng: &mut ChaCha8Rng) -> Expr {
    match e {
        Expr::Num(v) => Expr::Num(round_sig(v + rng.gen_range(-amp..amp))),
        other => {
            let (op, children) = other.to_op();
            Expr::from_op(op, children.into_iter().map(|c| jitter(c, amp, rng)).collect())
        }
    }
}

/// Applies the enabled perturbations to a Core Caddy program, driven
/// entirely by `seed`. Jitter is re-drawn at half the amplitude (up to a
/// few times, then dropped) until the result is equivalent to the input at
/// `max(10·jitter, 1e-9)`.
pub fn perturb(input: &Expr, seed: u64, options: &PerturbOptions) -> Expr {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut e = input.clone();
    if options.drop_identities {
        e = drop_identities(&e);
    }
    if options.substitute_identities {
        e = substitute(&e, &mut rng);
    }
    if options.interchange {
        e = interchange(&e, &mut rng);
    }
    if options.shuffle_ac {
        e = shuffle_ac(&e, &mut rng);
    }
    let mut amp = options.jitter;
    if amp > 0.0 {
        let eps = (10.0 * options.jitter).max(1e-9);
        for _ in 0..8 {
            let candidate = jitter(&e, amp, &mut rng);
            if semantic_equiv(&candidate, input, eps).unwrap_or(false) {
                return candidate;
            }
            amp /= 2.0;
        }
    }
    e
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{parse, print};

    const WHEEL: &str = "(Union (Cylinder [1, 5]) (Union (Union (Union (Union (Union \
        (Rotate [0, 0, 0] (Translate [1, -0.5, 0] (Cuboid [10, 1, 1]))) \
        (Rotate [0, 0, 60] (Translate [1, -0.5, 0] (Cuboid [10, 1, 1])))) \
        (Rotate [0, 0, 120] (Translate [1, -0.5, 0] (Cuboid [10, 1, 1])))) \
        (Rotate [0, 0, 180] (Translate [1, -0.5, 0] (Cuboid [10, 1, 1])))) \
        (Rotate [0, 0, 240] (Translate [1, -0.5, 0] (Cuboid [10, 1, 1])))) \
        (Rotate [0, 0, 300] (Translate [1, -0.5, 0] (Cuboid [10, 1, 1])))))";

    #[test]
    fn no_options_is_identity() {
        let e = parse(WHEEL).unwrap();
        assert_eq!(perturb(&e, 7, &PerturbOptions::none()), e);
    }

    #[test]
    fn same_seed_same_output() {
        let e = parse(WHEEL).unwrap();
        let a = perturb(&e, 42, &PerturbOptions::all(1e-4));
        let b = perturb(&e, 42, &PerturbOptions::all(1e-4));
        assert_eq!(a, b);
    }

    #[test]
    fn perturbations_preserve_the_solid() {
        let e = parse(WHEEL).unwrap();
        for seed in 0..20 {
            let p = perturb(&e, seed, &PerturbOptions::all(0.0));
            assert!(semantic_equiv(&p, &e, 1e-9).unwrap(), "seed {seed}: {}", print(&p));
            let j = perturb(&e, seed, &PerturbOptions::all(1e-4));
            assert!(semantic_equiv(&j, &e, 1e-3).unwrap());
        }
    }

    #[test]
    fn identities_get_obscured() {
        let e = parse(WHEEL).unwrap();
        let outputs: Vec<String> = (0..10).map(|s| print(&perturb(&e, s, &PerturbOptions::all(0.0)))).collect();
        assert!(outputs.iter().all(|o| !o.contains("Rotate [0, 0, 0]")));
        assert!(outputs.iter().any(|o| o.contains("Scale [-1, -1, 1]")));
        assert!(outputs.iter().any(|o| o.contains("Cuboid [1, 1, 1]")));
    }
}
