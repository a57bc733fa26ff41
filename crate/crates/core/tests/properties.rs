use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use emgauge::config::RunConfig;
use emgauge::diagnostics::decay::decay_fit;
use emgauge::diagnostics::energy::energy;
use emgauge::diagnostics::weight::WeightProfile;
use emgauge::evolution::{EvolutionState, Evolver, Mode, SchemeParams, NF};
use emgauge::frame::{frame_norm, null_vectors, tangential_derivative, FrameFamily, FramePoint};
use emgauge::grid::{Boundary, Grid};
use emgauge::io::snapshot::{decode_state, encode_state};
use emgauge::tensor::{invert_metric, metric_matrix, mink_lower, mink_raise, neumann_h, SymTensor2, Tensor, ETA};
use emgauge::verify::explicit_frame_norm;

fn sym(max: f64) -> impl Strategy<Value = SymTensor2> {
    prop::array::uniform10(-max..max).prop_map(SymTensor2)
}

fn point() -> impl Strategy<Value = FramePoint> {
    (-5.0..5.0f64, prop::array::uniform3(-10.0..10.0f64))
        .prop_filter("away from the axis", |(_, x)| x.iter().map(|c| c * c).sum::<f64>() > 1e-2)
        .prop_map(|(t, x)| FramePoint::new(t, x, 1e-8).unwrap())
}

fn tensor(rank: usize) -> impl Strategy<Value = Tensor> {
    prop::collection::vec(-1.0..1.0f64, 4usize.pow(rank as u32)).prop_map(move |c| Tensor::covariant(rank, c).unwrap())
}

fn family() -> impl Strategy<Value = FrameFamily> {
    prop_oneof![
        Just(FrameFamily::L),
        Just(FrameFamily::S),
        Just(FrameFamily::T),
        Just(FrameFamily::U)
    ]
}

fn mink(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    (0..4).map(|i| ETA[i] * a[i] * b[i]).sum()
}

proptest! {
    #[test]
    fn symmetric_storage(h in sym(1.0), mu in 0..4usize, nu in 0..4usize) {
        prop_assert_eq!(h.get(mu, nu), h.get(nu, mu));
        prop_assert_eq!(h.matrix()[mu][nu], h.matrix()[nu][mu]);
    }

    #[test]
    fn inverse_metric_inverts(h in sym(0.1)) {
        let inv = invert_metric(&h).unwrap();
        let g = metric_matrix(&h);
        let gi = inv.g_inv.matrix();
        for mu in 0..4 {
            for nu in 0..4 {
                let s: f64 = (0..4).map(|a| gi[mu][a] * g[a][nu]).sum();
                let delta = if mu == nu { 1.0 } else { 0.0 };
                prop_assert!((s - delta).abs() <= 1e-12, "({mu},{nu}): {s}");
            }
        }
    }

    #[test]
    fn first_order_series_is_minus_raised_h(h in sym(0.1)) {
        let first = neumann_h(&h, 1).unwrap();
        prop_assert_eq!(first, h.mink_raise_both().scale(-1.0));
    }

    #[test]
    fn raise_lower_round_trip(p in tensor(2), slot in 0..2usize) {
        let back = mink_lower(&mink_raise(&p, &[slot]).unwrap(), &[slot]).unwrap();
        for (a, b) in back.comps().iter().zip(p.comps()) {
            prop_assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn frame_point_invariants(pt in point()) {
        let s: f64 = pt.omega.iter().map(|w| w * w).sum();
        prop_assert!((s - 1.0).abs() <= 1e-15);
        prop_assert_eq!(pt.q, pt.r - pt.t);
        let (l, lb) = null_vectors(&pt);
        prop_assert!(mink(&l, &l).abs() <= 1e-14);
        prop_assert!(mink(&lb, &lb).abs() <= 1e-14);
        prop_assert!((mink(&l, &lb) + 2.0).abs() <= 1e-14);
    }

    #[test]
    fn frame_norms_are_bounded_by_the_full_norm(
        p in tensor(2),
        pt in point(),
        fams in prop::collection::vec(family(), 0..=2),
    ) {
        let v = frame_norm(&p, &fams, &pt).unwrap();
        prop_assert!(v >= 0.0);
        prop_assert!(v <= 4.0 * p.norm(), "{v} vs {}", p.norm());
    }

    #[test]
    fn frame_norm_is_independent_of_the_tangent_basis(
        p in tensor(2),
        pt in point(),
        a in family(),
        b in family(),
        angle in 0.0..std::f64::consts::TAU,
    ) {
        let projected = frame_norm(&p, &[a, b], &pt).unwrap();
        let explicit = explicit_frame_norm(&p, &[a, b], &pt, angle);
        prop_assert!((projected - explicit).abs() <= 1e-13 * (1.0 + explicit), "{projected} vs {explicit}");
    }

    #[test]
    fn tangential_derivative_annihilates_outgoing_profiles(pt in point(), k in 0.1..3.0f64) {
        // p = sin(k(t − r)): ∂_t p = k cos, ∂_i p = −ω_i k cos
        let c = k * (k * (pt.t - pt.r)).cos();
        let grad = Tensor::covariant(1, vec![c, -pt.omega[0] * c, -pt.omega[1] * c, -pt.omega[2] * c]).unwrap();
        let bar = tangential_derivative(&grad, &pt).unwrap();
        prop_assert!(bar.norm() <= 1e-12 * (1.0 + c.abs()));
    }

    #[test]
    fn tangential_derivative_of_a_spherical_wave_keeps_only_the_decay_term(pt in point()) {
        // p = f(t − r)/r with f = exp: L p = −p/r, ∂̄_i p = 0
        let p = (pt.t - pt.r).exp() / pt.r;
        let radial = -p - p / pt.r;
        let grad = Tensor::covariant(1, vec![p, pt.omega[0] * radial, pt.omega[1] * radial, pt.omega[2] * radial]).unwrap();
        let bar = tangential_derivative(&grad, &pt).unwrap();
        let scale = p.abs() * (1.0 + 1.0 / pt.r);
        prop_assert!((bar.get(&[0]) + p / pt.r).abs() <= 1e-12 * scale);
        for i in 1..4 {
            prop_assert!(bar.get(&[i]).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn weight_is_increasing_and_above_one(q in -50.0..50.0f64, gamma in 0.01..0.49f64, mu in 0.01..0.49f64) {
        let prof = WeightProfile::new(gamma, mu).unwrap();
        let (w, wp) = prof.weight(q);
        prop_assert!(w > 1.0);
        prop_assert!(wp > 0.0);
        prop_assert!(prof.weight(q + 0.1).0 > w);
    }

    #[test]
    fn weight_parameters_outside_the_open_interval_are_rejected(x in prop_oneof![-1.0..=0.0f64, 0.5..2.0f64]) {
        prop_assert!(WeightProfile::new(x, 0.25).is_err());
        prop_assert!(WeightProfile::new(0.25, x).is_err());
    }

    #[test]
    fn config_range_rules(cfl in -1.0..2.0f64, gamma in -0.5..1.0f64) {
        let text = serde_json::json!({"family": "flat", "n": 16, "t_end": 1.0, "cfl": cfl, "gamma": gamma}).to_string();
        let ok = RunConfig::from_json(&text).is_ok();
        prop_assert_eq!(ok, cfl > 0.0 && cfl < 1.0 && gamma > 0.0 && gamma < 0.5);
    }

    #[test]
    fn decay_fit_recovers_power_laws(p in -3.0..0.5f64, amp in 1e-6..1e3f64, q in 0.0..5.0f64) {
        let series: Vec<(f64, f64)> = (0..40)
            .map(|i| {
                let t = 0.5 * i as f64;
                (t, amp * (1.0 + t + q).powf(p))
            })
            .collect();
        let fit = decay_fit(&series, q, (5.0, 20.0)).unwrap();
        prop_assert!((fit.exponent - p).abs() <= 1e-10);
    }
}

fn random_state(grid: &Grid, seed: u64, scale: f64) -> EvolutionState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut st = EvolutionState::zeros(grid);
    st.t = rng.gen_range(0.0..3.0);
    for x in st.u.iter_mut().chain(st.v.iter_mut()) {
        for c in x.iter_mut() {
            *c = scale * rng.gen_range(-1.0..1.0);
        }
    }
    st
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn snapshot_round_trip_is_bit_exact(seed in any::<u64>(), n in 7..11usize, periodic in any::<bool>()) {
        let boundary = if periodic { Boundary::Periodic } else { Boundary::Sommerfeld };
        let grid = Grid::new(n, 2.0, 4, boundary).unwrap();
        let st = random_state(&grid, seed, 1e3);
        let bytes = encode_state(&grid, &st);
        let (g2, back) = decode_state(&bytes, Some(&grid)).unwrap();
        prop_assert_eq!(&g2, &grid);
        prop_assert_eq!(back.t.to_bits(), st.t.to_bits());
        for (a, b) in back.u.iter().chain(&back.v).zip(st.u.iter().chain(&st.v)) {
            for c in 0..NF {
                prop_assert_eq!(a[c].to_bits(), b[c].to_bits());
            }
        }
        prop_assert_eq!(encode_state(&g2, &back), bytes);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn energy_is_nonnegative_monotone_in_order_and_homogeneous(seed in any::<u64>(), lambda in 0.1..10.0f64) {
        let grid = Grid::new(9, 3.0, 4, Boundary::Sommerfeld).unwrap();
        let ev = Evolver::new(grid.clone(), SchemeParams::default()).unwrap();
        let prof = WeightProfile::default();
        let st = random_state(&grid, seed, 1e-3);
        let rec = energy(&ev, &st, 2, &prof).unwrap();
        prop_assert!(rec.total.iter().all(|&e| e >= 0.0));
        prop_assert!(rec.total.windows(2).all(|w| w[1] >= w[0]), "{:?}", rec.total);

        // the potential alone on a frozen flat metric evolves linearly, so every order scales exactly
        let frozen = SchemeParams {
            mode: Mode::FrozenMetric,
            ..SchemeParams::default()
        };
        let linear = Evolver::new(grid.clone(), frozen).unwrap();
        let mut potential = st.clone();
        for x in potential.u.iter_mut().chain(potential.v.iter_mut()) {
            x[..10].fill(0.0);
        }
        let mut scaled = potential.clone();
        for x in scaled.u.iter_mut().chain(scaled.v.iter_mut()) {
            x.iter_mut().for_each(|c| *c *= lambda);
        }
        let base = energy(&linear, &potential, 2, &prof).unwrap();
        let rec2 = energy(&linear, &scaled, 2, &prof).unwrap();
        for (a, b) in rec2.total.iter().zip(&base.total) {
            prop_assert!((a - lambda * b).abs() <= 1e-12 * a.abs(), "{a} vs {}", lambda * b);
        }
    }
}
