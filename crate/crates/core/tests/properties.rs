use std::sync::OnceLock;

use proptest::prelude::*;
use varham::hamiltonian::{CrnHamiltonian, Hamiltonian};
use varham::hjb::{solve_evolution, EvolutionConfig, Grid, GridFunction, StationaryConfig, StationaryOperator};
use varham::lagrangian::{legendre, path_action, LegendreConfig, PathSample};
use varham::model::{builtin_michaelis_menten, parse_model, ControlHamiltonian, ReactionClass};

fn mm() -> &'static CrnHamiltonian {
    static H: OnceLock<CrnHamiltonian> = OnceLock::new();
    H.get_or_init(|| CrnHamiltonian::new(builtin_michaelis_menten([1.0; 4], 2).unwrap()).unwrap())
}

fn operator() -> &'static StationaryOperator {
    static OP: OnceLock<StationaryOperator> = OnceLock::new();
    OP.get_or_init(|| {
        let h = ControlHamiltonian::eikonal(2);
        let grid = Grid::uniform(2, 1.0, 8).unwrap();
        StationaryOperator::build(&h, &grid, 1.0, &StationaryConfig { dt: 0.1, ..Default::default() }).unwrap()
    })
}

fn sup(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

fn state() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.1f64..5.0, 2)
}

fn momentum(r: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-r..r, 2)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn class_follows_jump_support(gx in prop::collection::vec(-2i64..3, 2), gy in prop::collection::vec(-2i64..3, 2)) {
        let slow = gx.iter().any(|&g| g != 0);
        let fast = gy.iter().any(|&g| g != 0);
        match ReactionClass::of(&gx, &gy) {
            None => prop_assert!(!slow && !fast),
            Some(c) => {
                prop_assert_eq!(c.moves_fast(), fast);
                prop_assert_eq!(c == ReactionClass::FastOnly, !slow);
            }
        }
    }

    #[test]
    fn model_json_round_trip(k in prop::collection::vec(0.0f64..10.0, 4), m in 1u32..5) {
        let net = builtin_michaelis_menten([k[0], k[1], k[2], k[3]], m).unwrap();
        prop_assert_eq!(parse_model(&net.to_json()).unwrap(), net);
    }

    #[test]
    fn hamiltonian_vanishes_at_zero_momentum(x in state()) {
        prop_assert!(mm().value(&x, &[0.0, 0.0]).unwrap().abs() <= 1e-10);
    }

    #[test]
    fn hamiltonian_is_convex(x in state(), p in momentum(2.0), q in momentum(2.0), t in 0.0f64..1.0) {
        let h = mm();
        let mid: Vec<f64> = p.iter().zip(&q).map(|(a, b)| t * a + (1.0 - t) * b).collect();
        let lhs = h.value(&x, &mid).unwrap();
        let rhs = t * h.value(&x, &p).unwrap() + (1.0 - t) * h.value(&x, &q).unwrap();
        prop_assert!(lhs <= rhs + 1e-9 * (1.0 + rhs.abs()), "{} > {}", lhs, rhs);
    }

    #[test]
    fn optimal_measure_is_a_probability(x in state(), p in momentum(3.0)) {
        let v = mm().eval(&x, &p).unwrap();
        prop_assert!(v.theta_star.iter().all(|&w| w >= 0.0));
        prop_assert!((v.theta_star.iter().sum::<f64>() - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn fenchel_inequality(x in state(), v in momentum(1.0), p in momentum(2.0)) {
        let h = mm();
        let l = legendre(h, &x, &v, &LegendreConfig::default()).unwrap();
        let pv: f64 = p.iter().zip(&v).map(|(a, b)| a * b).sum();
        let hp = h.value(&x, &p).unwrap();
        prop_assert!(l.value + 1e-7 * (1.0 + hp.abs()) >= pv - hp, "L {} < {}", l.value, pv - hp);
    }

    #[test]
    fn stencil_is_a_partition_of_unity(x in prop::collection::vec(-0.5f64..2.5, 3)) {
        let g = Grid::new(vec![2.0, 1.0, 1.5], vec![4, 3, 5]).unwrap();
        let s = g.stencil(&x);
        prop_assert!(s.iter().all(|&(_, w)| w >= 0.0));
        prop_assert!((s.iter().map(|&(_, w)| w).sum::<f64>() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn stationary_sweep_is_monotone_and_contractive(
        f in prop::collection::vec(-1.0f64..1.0, 81),
        bump in prop::collection::vec(0.0f64..0.5, 81),
    ) {
        let op = operator();
        let h = vec![0.3; 81];
        let g: Vec<f64> = f.iter().zip(&bump).map(|(a, b)| a + b).collect();
        let (tf, tg) = (op.sweep(&h, &f), op.sweep(&h, &g));
        prop_assert!(tf.iter().zip(&tg).all(|(a, b)| a <= b));
        prop_assert!(sup(&tf, &tg) <= op.discount() * sup(&f, &g) + 1e-12);
    }

    #[test]
    fn evolution_is_nonexpansive(a in 1.0f64..2.0, b in 1.0f64..2.0, c in -0.1f64..0.1) {
        // concave enough that both faces are outflow faces for |p| - 1
        let h = ControlHamiltonian::eikonal(1);
        let grid = Grid::uniform(1, 1.0, 20).unwrap();
        let u0 = GridFunction::from_fn(&grid, |x| -a * (x[0] - 0.5).powi(2) + c * (6.0 * x[0]).sin()).unwrap();
        let v0 = GridFunction::from_fn(&grid, |x| -b * (x[0] - 0.5).powi(2) + 0.2).unwrap();
        let cfg = EvolutionConfig { sigma: Some(vec![1.25]), ..Default::default() };
        let (u, ru) = solve_evolution(&h, &u0, 0.3, &cfg).unwrap();
        let (v, rv) = solve_evolution(&h, &v0, 0.3, &cfg).unwrap();
        prop_assert!(ru.flags.iter().chain(&rv.flags).all(|f| !f.starts_with("non-monotone")));
        prop_assert!(u[0].u.distance(&v[0].u).unwrap() <= u0.distance(&v0).unwrap() + 1e-12);
    }

    #[test]
    fn inflow_faces_are_flagged(a in 0.5f64..2.0) {
        let h = ControlHamiltonian::eikonal(1);
        let grid = Grid::uniform(1, 1.0, 20).unwrap();
        let u0 = GridFunction::from_fn(&grid, |x| a * (x[0] - 0.5).powi(2)).unwrap();
        let cfg = EvolutionConfig { sigma: Some(vec![1.25]), ..Default::default() };
        let (_, rep) = solve_evolution(&h, &u0, 0.1, &cfg).unwrap();
        prop_assert!(rep.flags.iter().any(|f| f.contains("inflow")));
    }

    #[test]
    fn action_is_additive(ys in prop::collection::vec(0.5f64..2.0, 6)) {
        let h = mm();
        let pts: Vec<Vec<f64>> = ys.chunks(2).map(|c| c.to_vec()).collect();
        let first = PathSample::new(vec![0.0, 0.5, 1.0], pts.clone()).unwrap();
        let back = vec![pts[2].clone(), pts[1].clone(), pts[0].clone()];
        let second = PathSample::new(vec![1.0, 1.4, 2.0], back).unwrap();
        let cfg = LegendreConfig::default();
        let whole = path_action(h, &first.concat(&second).unwrap(), &cfg).unwrap().value;
        let parts = path_action(h, &first, &cfg).unwrap().value + path_action(h, &second, &cfg).unwrap().value;
        if whole.is_infinite() {
            prop_assert_eq!(whole, parts);
        } else {
            prop_assert!((whole - parts).abs() <= 1e-9 * (1.0 + whole.abs()), "{} vs {}", whole, parts);
        }
    }
}
