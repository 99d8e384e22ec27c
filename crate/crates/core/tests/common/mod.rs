#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sppl::density::{build_density, PiecewiseDensity};
use sppl::frontend::{parse_checked, Constants};
use sppl::graph::{compile, compile_with, GraphModel};

pub const THRESHOLD_PROGRAM: &str =
    "(let [x (sample (uniform 0 1))] (if (< x 0.3) (observe (normal 0 1) 0.2) (observe (normal 1 1) 0.2)))";

/// The threshold program with `y` left latent and the threshold as a constant.
pub const THRESHOLD_PROGRAM_LATENT: &str =
    "(let [x (sample (uniform 0 1))] (sample (normal (if (< x q) 0 1) 1)))";

pub const CONJUGATE: &str = "(let [mu (sample (normal 0 2))] (observe (normal mu 1) 1))";

pub fn model(src: &str) -> GraphModel {
    compile(&parse_checked(src, &Constants::new()).unwrap()).unwrap()
}

pub fn density(src: &str) -> PiecewiseDensity {
    build_density(&model(src)).unwrap()
}

pub fn density_with(src: &str, constants: &[(&str, f64)]) -> PiecewiseDensity {
    let c: Constants = constants.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    let (m, _) = compile_with(&parse_checked(src, &c).unwrap(), &c).unwrap();
    build_density(&m).unwrap()
}

/// Random grammar-valid programs. Every guard mentions the outer latent
/// `r0`, so no guard is a compile-time constant and no branch is dropped.
pub struct ProgramGen {
    rng: ChaCha8Rng,
    next_var: usize,
    pub samples: usize,
    pub observes: usize,
}

impl ProgramGen {
    pub fn new(seed: u64) -> Self {
        ProgramGen {
            rng: ChaCha8Rng::seed_from_u64(seed),
            next_var: 1,
            samples: 0,
            observes: 0,
        }
    }

    pub fn program(&mut self) -> String {
        self.samples = 1;
        let body = self.expr(4, &mut vec!["r0".to_string()]);
        format!("(let [r0 (sample (normal 0 1))] {body})")
    }

    fn number(&mut self) -> String {
        let v: f64 = self.rng.random_range(-5.0..5.0);
        let v = (v * 100.0).round() / 100.0;
        format!("{v:?}")
    }

    fn pure(&mut self, depth: u32, scope: &[String]) -> String {
        if depth == 0 || self.rng.random_bool(0.4) {
            return if self.rng.random_bool(0.5) {
                scope[self.rng.random_range(0..scope.len())].clone()
            } else {
                self.number()
            };
        }
        let a = self.pure(depth - 1, scope);
        let b = self.pure(depth - 1, scope);
        match self.rng.random_range(0..6) {
            0 => format!("(+ {a} {b})"),
            1 => format!("(- {a} {b})"),
            2 => format!("(* {a} {b})"),
            3 => format!("(- {a})"),
            4 => format!("(exp {a})"),
            _ => format!("(pow {a} 2)"),
        }
    }

    fn dist(&mut self, depth: u32, scope: &[String]) -> String {
        let a = self.pure(depth.min(2), scope);
        if self.rng.random_bool(0.5) {
            format!("(normal {a} 1.5)")
        } else {
            format!("(uniform {a} (+ {a} 2))")
        }
    }

    fn expr(&mut self, depth: u32, scope: &mut Vec<String>) -> String {
        if depth == 0 {
            return self.pure(1, scope);
        }
        match self.rng.random_range(0..6) {
            0 => self.pure(2, scope),
            1 => {
                self.samples += 1;
                format!("(sample {})", self.dist(depth, scope))
            }
            2 => {
                self.observes += 1;
                let d = self.dist(depth, scope);
                format!("(observe {d} {})", self.number())
            }
            3 => {
                let g = self.pure(2, scope);
                let rhs = self.number();
                let op = ["<", ">", "<=", ">="][self.rng.random_range(0..4)];
                let t = self.expr(depth - 1, scope);
                let e = self.expr(depth - 1, scope);
                format!("(if ({op} (+ r0 {g}) {rhs}) {t} {e})")
            }
            4 => {
                let bound = self.expr(depth - 1, scope);
                let v = format!("v{}", self.next_var);
                self.next_var += 1;
                scope.push(v.clone());
                let body = self.expr(depth - 1, scope);
                scope.pop();
                format!("(let [{v} {bound}] {body})")
            }
            _ => {
                let a = self.expr(depth - 1, scope);
                let b = self.expr(depth - 1, scope);
                format!("(+ {a} {b})")
            }
        }
    }
}

/// Every region of `pd` as a (mask, value) pair over predicate bits, with a
/// set bit meaning `< 0`.
pub fn region_masks(pd: &PiecewiseDensity) -> Vec<(u64, u64)> {
    assert!(pd.num_predicates() <= 64);
    pd.all_regions()
        .unwrap()
        .iter()
        .map(|r| {
            let mut mask = 0u64;
            let mut val = 0u64;
            for p in &r.neg_guards {
                mask |= 1 << p.0;
                val |= 1 << p.0;
            }
            for p in &r.nonneg_guards {
                mask |= 1 << p.0;
            }
            (mask, val)
        })
        .collect()
}

/// Number of regions whose guards hold for the given predicate signs.
pub fn matching_regions(masks: &[(u64, u64)], neg_bits: u64) -> usize {
    masks.iter().filter(|(m, v)| neg_bits & m == *v).count()
}

pub fn bits(signs: &[bool]) -> u64 {
    signs
        .iter()
        .enumerate()
        .fold(0, |acc, (i, &b)| acc | ((b as u64) << i))
}

pub type SignFn = Box<dyn Fn(&[f64]) -> Vec<bool> + Sync>;
pub type DrawFn = Box<dyn Fn(&mut ChaCha8Rng) -> Vec<f64> + Sync>;

/// A density together with a hand-written predicate evaluator and a state
/// sampler covering (and exceeding) its support.
pub struct TestModel {
    pub name: &'static str,
    pub pd: PiecewiseDensity,
    pub signs: SignFn,
    pub draw: DrawFn,
}

fn spread(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo..hi)
}

pub fn gmm_test_source() -> String {
    sppl::oracle::gmm_source(&sppl::oracle::GmmSpec::default())
}

pub fn test_models() -> Vec<TestModel> {
    let nested = "(let [a (sample (normal 0 1))] (let [b (sample (normal 0 1))] \
                  (if (< a 0) (if (< (- b a) 0) (observe (normal 0 1) 1) (observe (normal 1 1) 1)) \
                  (observe (normal 2 1) 1))))";
    let gmm = gmm_test_source();
    vec![
        TestModel {
            name: "threshold program",
            pd: density(THRESHOLD_PROGRAM),
            signs: Box::new(|x| vec![x[0] < 0.3]),
            draw: Box::new(|r| vec![spread(r, -0.5, 1.5)]),
        },
        TestModel {
            name: "threshold program, y latent",
            pd: density_with(THRESHOLD_PROGRAM_LATENT, &[("q", 0.3)]),
            signs: Box::new(|x| vec![x[0] < 0.3]),
            draw: Box::new(|r| vec![spread(r, -0.5, 1.5), spread(r, -6.0, 6.0)]),
        },
        TestModel {
            name: "nested guards",
            pd: density(nested),
            signs: Box::new(|x| vec![x[0] < 0.0, x[1] - x[0] < 0.0]),
            draw: Box::new(|r| vec![spread(r, -3.0, 3.0), spread(r, -3.0, 3.0)]),
        },
        TestModel {
            name: "mixture",
            pd: density(&gmm),
            signs: Box::new(|x| x[2..].iter().map(|u| u - 0.5 < 0.0).collect()),
            draw: Box::new(|r| {
                let mut x = vec![spread(r, -6.0, 6.0), spread(r, -6.0, 6.0)];
                x.extend((0..10).map(|_| spread(r, -0.5, 1.5)));
                x
            }),
        },
    ]
}
