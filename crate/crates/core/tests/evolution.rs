use emgauge::evolution::{a_slot, h_slot, EvolutionState, Evolver, Fields, Mode, SchemeParams, NF};
use emgauge::families::{generate, maxwell_exact, Family, FamilyParams};
use emgauge::grid::{Boundary, Grid};
use emgauge::initial_data::build_cauchy;

fn scheme(mode: Mode, sigma: f64, dt: f64) -> SchemeParams {
    SchemeParams {
        sigma,
        dt: Some(dt),
        mode,
        ..SchemeParams::default()
    }
}

/// Equal steps of at most `dt_max` landing exactly on `t_end`.
fn evolve(ev: &mut Evolver, st: &mut EvolutionState, t_end: f64, dt_max: f64) {
    let steps = ((t_end - st.t) / dt_max - 1e-9).ceil().max(0.0) as usize;
    if steps == 0 {
        return;
    }
    let dt = (t_end - st.t) / steps as f64;
    for _ in 0..steps {
        ev.step(st, dt).unwrap();
    }
}

fn sup_diff(a: &Fields, b: &Fields, c: usize) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x[c] - y[c]).abs()))
}

fn radius(x: [f64; 3]) -> f64 {
    (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
}

#[test]
fn discrete_operator_matches_the_manufactured_box() {
    // u = sin t sin(kx) with k = π/L: □u = sin t sin(kx)(1 − k²)
    let half = 2.0;
    let k = std::f64::consts::PI / half;
    let t: f64 = 0.7;
    let mut errors = Vec::new();
    let ns = [16, 24, 32, 48];
    for &n in &ns {
        let grid = Grid::new(n, half, 4, Boundary::Periodic).unwrap();
        let ev = Evolver::new(grid.clone(), scheme(Mode::FrozenMetric, 0.0, 0.1)).unwrap();
        let c = a_slot(1);
        let mut st = EvolutionState::zeros(&grid);
        for p in 0..grid.len() {
            let x = grid.position(p);
            st.u[p][c] = t.sin() * (k * x[0]).sin();
            st.v[p][c] = t.cos() * (k * x[0]).sin();
        }
        let acc = ev.acceleration(t, &st.u, &st.v).unwrap();
        let mut err: f64 = 0.0;
        for p in 0..grid.len() {
            let x = grid.position(p);
            let exact_box = t.sin() * (k * x[0]).sin() * (1.0 - k * k);
            // □u = −∂_t²u + Δu and the operator returns Δu
            let discrete_box = -(-st.u[p][c]) + acc[p][c];
            err = err.max((discrete_box - exact_box).abs());
        }
        errors.push(err);
    }
    for i in 1..ns.len() {
        let order = (errors[i - 1] / errors[i]).ln() / (ns[i] as f64 / ns[i - 1] as f64).ln();
        assert!(order >= 3.7, "order {order} between n = {} and {}: {errors:?}", ns[i - 1], ns[i]);
    }
}

fn gaussian_state(grid: &Grid, c: usize, width: f64) -> EvolutionState {
    let mut st = EvolutionState::zeros(grid);
    for p in 0..grid.len() {
        let r = radius(grid.position(p));
        st.u[p][c] = (-(r / width).powi(2)).exp();
    }
    st
}

/// Σ v² − u·D₂u over the periodic grid, conserved by the semi-discrete flat wave equation.
fn discrete_energy(grid: &Grid, st: &EvolutionState, c: usize) -> f64 {
    let u: Vec<[f64; 1]> = st.u.iter().map(|x| [x[c]]).collect();
    let mut e = 0.0;
    for p in 0..grid.len() {
        let lap: f64 = (0..3).map(|a| grid.diff2(&u, p, a, a)[0]).sum();
        e += st.v[p][c] * st.v[p][c] - u[p][0] * lap;
    }
    e * grid.dx.powi(3)
}

#[test]
fn linear_energy_is_non_increasing_and_conserved_without_dissipation() {
    let grid = Grid::new(32, 4.0, 4, Boundary::Periodic).unwrap();
    let c = a_slot(2);
    let dt = 0.25 * grid.dx;
    let mut losses = Vec::new();
    for sigma in [0.1, 0.0] {
        let mut ev = Evolver::new(grid.clone(), scheme(Mode::FrozenMetric, sigma, dt)).unwrap();
        let mut st = gaussian_state(&grid, c, 0.8);
        let e0 = discrete_energy(&grid, &st, c);
        let mut prev = e0;
        for _ in 0..60 {
            ev.step(&mut st, dt).unwrap();
            let e = discrete_energy(&grid, &st, c);
            assert!(e <= prev * (1.0 + 1e-13), "energy grew from {prev} to {e} (σ = {sigma})");
            prev = e;
        }
        losses.push(1.0 - prev / e0);
    }
    // RK4 alone damps the highest modes slightly
    let (damped, undamped) = (losses[0], losses[1]);
    assert!(undamped >= 0.0 && undamped < 1e-3, "undamped energy loss {undamped:e}");
    assert!(damped > undamped && damped < 0.1, "damped energy loss {damped:e}");
}

fn reversal_error(dt: f64) -> f64 {
    let grid = Grid::new(32, 4.0, 4, Boundary::Periodic).unwrap();
    let c = a_slot(1);
    let mut ev = Evolver::new(grid.clone(), scheme(Mode::FrozenMetric, 0.0, dt)).unwrap();
    let start = gaussian_state(&grid, c, 0.8);
    let mut st = start.clone();
    evolve(&mut ev, &mut st, 2.0, dt);
    st.v.iter_mut().for_each(|x| x[c] = -x[c]);
    st.t = 0.0;
    evolve(&mut ev, &mut st, 2.0, dt);
    sup_diff(&st.u, &start.u, c)
}

#[test]
fn time_reversal_returns_the_pulse() {
    let coarse = reversal_error(0.0625);
    let fine = reversal_error(0.03125);
    assert!(coarse < 1e-4, "{coarse:e}");
    let order = (coarse / fine).log2();
    assert!(order > 3.5, "reversal error order {order} ({coarse:e}, {fine:e})");
}

#[test]
fn outgoing_pulse_leaves_the_sommerfeld_boundary() {
    // φ = (F(r − t) − F(−r − t))/r, regular at the origin, with F a unit Gaussian centred at 2
    let half = 6.0;
    // even n keeps the origin off the grid
    let grid = Grid::new(48, half, 4, Boundary::Sommerfeld).unwrap();
    let c = a_slot(3);
    let profile = |s: f64| (-(s - 2.0).powi(2)).exp();
    let slope = |s: f64| -2.0 * (s - 2.0) * profile(s);
    let mut st = EvolutionState::zeros(&grid);
    for p in 0..grid.len() {
        let r = radius(grid.position(p));
        st.u[p][c] = (profile(r) - profile(-r)) / r;
        st.v[p][c] = (slope(-r) - slope(r)) / r;
    }
    let incident = 1.0 / half;
    let dt = 0.25 * grid.dx;
    let mut ev = Evolver::new(grid.clone(), scheme(Mode::FrozenMetric, 0.1, dt)).unwrap();
    evolve(&mut ev, &mut st, 14.0, dt);
    let residual = st.u.iter().fold(0.0f64, |m, x| m.max(x[c].abs()));
    assert!(residual < 0.02 * incident, "reflected {:.3}% of incident", 100.0 * residual / incident);
}

#[test]
fn constant_field_decays_at_the_boundary_like_the_radial_term() {
    let grid = Grid::new(13, 3.0, 4, Boundary::Sommerfeld).unwrap();
    let ev = Evolver::new(grid.clone(), scheme(Mode::FrozenMetric, 0.0, 0.1)).unwrap();
    let c = a_slot(0);
    let mut st = EvolutionState::zeros(&grid);
    st.u.iter_mut().for_each(|x| x[c] = 0.7);
    let mut du = vec![[0.0; NF]; grid.len()];
    let mut dv = vec![[0.0; NF]; grid.len()];
    ev.rates(0.0, &st.u, &st.v, &mut du, &mut dv, 0.0).unwrap();
    let mut checked = 0;
    for p in (0..grid.len()).filter(|&p| grid.on_boundary(p)) {
        let r = radius(grid.position(p));
        assert!((du[p][c] + 0.7 / r).abs() <= 1e-13, "∂_tφ = {} at r = {r}", du[p][c]);
        assert!(dv[p][c].abs() <= 1e-13);
        checked += 1;
    }
    assert_eq!(checked, 13 * 13 * 13 - 11 * 11 * 11);
}

#[test]
fn translation_invariant_data_stays_translation_invariant() {
    let grid = Grid::new(16, 3.0, 4, Boundary::Periodic).unwrap();
    let k = std::f64::consts::PI / 3.0;
    let mut st = EvolutionState::zeros(&grid);
    for p in 0..grid.len() {
        let x = grid.position(p)[0];
        st.u[p][h_slot(1, 1)] = 0.01 * (k * x).sin();
        st.u[p][h_slot(0, 2)] = 0.005 * (k * x).cos();
        st.u[p][a_slot(2)] = 0.01 * (k * x).cos();
    }
    let mut ev = Evolver::new(grid.clone(), scheme(Mode::Full, 0.1, 0.25 * grid.dx)).unwrap();
    for _ in 0..10 {
        ev.step(&mut st, 0.25 * grid.dx).unwrap();
    }
    for p in 0..grid.len() {
        let [i, _, _] = grid.ijk(p);
        let q = grid.index(i, 0, 0);
        assert!(st.u[p] == st.u[q] && st.v[p] == st.v[q], "point {p} differs from its x-line");
    }
}

/// Standing wave sin x cos(ct) on a static metric; returns the measured c.
fn standing_wave_speed(h: [(usize, usize, f64); 4]) -> f64 {
    let grid = Grid::new(32, std::f64::consts::PI, 4, Boundary::Periodic).unwrap();
    let c = a_slot(2);
    let mut st = EvolutionState::zeros(&grid);
    for p in 0..grid.len() {
        for &(mu, nu, value) in &h {
            st.u[p][h_slot(mu, nu)] = value;
        }
        st.u[p][c] = grid.position(p)[0].sin();
    }
    let t_end = 1.5;
    let dt = 0.1 * grid.dx;
    let mut ev = Evolver::new(grid.clone(), scheme(Mode::FrozenMetric, 0.0, dt)).unwrap();
    evolve(&mut ev, &mut st, t_end, dt);
    // project onto sin x along the x-line
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..grid.n {
        let p = grid.index(i, 0, 0);
        let s = grid.coord(i).sin();
        num += st.u[p][c] * s;
        den += s * s;
    }
    (num / den).clamp(-1.0, 1.0).acos() / t_end
}

#[test]
fn static_metric_sets_the_phase_velocity() {
    let eps = 0.1;
    let conformal = standing_wave_speed([(0, 0, -eps), (1, 1, eps), (2, 2, eps), (3, 3, eps)]);
    assert!((conformal - 1.0).abs() < 1e-3, "conformal rescaling changed the speed to {conformal}");
    let spatial = standing_wave_speed([(0, 0, 0.0), (1, 1, eps), (2, 2, eps), (3, 3, eps)]);
    let expected = 1.0 / (1.0 + eps).sqrt();
    assert!((spatial / expected - 1.0).abs() < 1e-3, "speed {spatial}, expected {expected}");
}

fn maxwell_run(n: usize, half: f64, w: f64, t_end: f64, cfl: f64) -> (Grid, EvolutionState) {
    let grid = Grid::new(n, half, 4, Boundary::Sommerfeld).unwrap();
    let params = FamilyParams {
        family: Family::Maxwell,
        epsilon: 1.0,
        width: w,
    };
    let (u, v) = build_cauchy(&generate(&params, &grid).unwrap()).unwrap();
    let mut st = EvolutionState { t: 0.0, u, v };
    let dt = cfl * grid.dx;
    let mut ev = Evolver::new(grid.clone(), scheme(Mode::FrozenMetric, 0.1, dt)).unwrap();
    evolve(&mut ev, &mut st, t_end, dt);
    (grid, st)
}

#[test]
fn maxwell_shell_converges_pointwise_to_the_exact_solution() {
    let (half, w, t_end) = (8.0, 2.0, 3.0);
    let mut errors = Vec::new();
    let ns = [33, 49, 65];
    for &n in &ns {
        let (grid, st) = maxwell_run(n, half, w, t_end, 0.25);
        let mut err: f64 = 0.0;
        for p in 0..grid.len() {
            let (a, _, _) = maxwell_exact(1.0, w, t_end, &grid.position(p));
            for beta in 0..4 {
                err = err.max((st.u[p][a_slot(beta)] - a[beta]).abs());
            }
        }
        errors.push(err);
    }
    for i in 1..ns.len() {
        let ratio = (ns[i] - 1) as f64 / (ns[i - 1] - 1) as f64;
        let order = (errors[i - 1] / errors[i]).ln() / ratio.ln();
        assert!(order >= 3.0, "order {order}: {errors:?}");
    }
}

#[test]
fn halving_the_time_step_changes_less_than_the_spatial_error() {
    let (half, w, t_end) = (12.0, 2.0, 10.0);
    let (fine_grid, base) = maxwell_run(49, half, w, t_end, 0.25);
    let (_, halved) = maxwell_run(49, half, w, t_end, 0.125);
    let (coarse_grid, coarse) = maxwell_run(25, half, w, t_end, 0.25);
    let mut time_change: f64 = 0.0;
    let mut spatial: f64 = 0.0;
    for p in 0..fine_grid.len() {
        for beta in 0..4 {
            let c = a_slot(beta);
            time_change = time_change.max((base.u[p][c] - halved.u[p][c]).abs());
        }
        let [i, j, k] = fine_grid.ijk(p);
        if i % 2 == 0 && j % 2 == 0 && k % 2 == 0 {
            let q = coarse_grid.index(i / 2, j / 2, k / 2);
            for beta in 0..4 {
                let c = a_slot(beta);
                spatial = spatial.max((base.u[p][c] - coarse.u[q][c]).abs());
            }
        }
    }
    // Richardson estimate of the fine-grid spatial error
    let estimate = spatial / 15.0;
    assert!(time_change < estimate, "Δt halving changed {time_change:e}, spatial estimate {estimate:e}");
}
