//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::path::PathBuf;
use std::time::Instant;

use nalgebra::{Matrix3, Point3, Rotation3, SMatrix};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use capguard::controller::{beta_factor, dls_solve, reshape_gamma, AttractionState, ReshapeState};
use capguard::geometry::capsule_min_distance;
use capguard::kinematics::{Jacobian, DOF};
use capguard::sim::{write_trace, RunOutput, TraceFormat, TraceRecord};
use capguard::{Capsule, ControllerParams, JointVector, RobotModel, Scenario, Simulation, TaskMode, Vec3};

type Outcome = Result<String, String>;

fn scenario_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(format!("{name}.json"))
}

const SHIPPED: [&str; 5] = [
    "config1_y",
    "config1_z",
    "config1_xy_inclined",
    "config2_approach",
    "config3_doorcard",
];

struct Run {
    params: ControllerParams,
    out: RunOutput,
    initial_q: JointVector,
}

fn run(name: &str) -> Run {
    let scenario = Scenario::load(scenario_path(name)).expect("shipped scenario loads");
    let mut sim = Simulation::new(&scenario, None).expect("shipped scenario is valid");
    let params = sim.params().clone();
    let out = sim.run().expect("shipped scenario runs");
    Run {
        params,
        out,
        initial_q: scenario.initial_q,
    }
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn eef_speeds(trace: &[TraceRecord], dt: f64) -> Vec<f64> {
    trace.windows(2).map(|w| (w[1].p_e - w[0].p_e).norm() / dt).collect()
}

fn max_eef_accel(trace: &[TraceRecord], dt: f64) -> f64 {
    trace
        .windows(3)
        .map(|w| ((w[2].p_e - w[1].p_e * 2.0 + w[0].p_e) / (dt * dt)).norm())
        .fold(0.0, f64::max)
}

fn in_zone(r: &TraceRecord, p: &ControllerParams) -> bool {
    let d0 = p.d_1 - p.c_v * r.v_rel.min(0.0);
    r.d_min - p.d_cr < d0
}

fn is_ca(mode: TaskMode) -> bool {
    matches!(mode, TaskMode::CaTrack | TaskMode::CaHold)
}

/// Completion, clearance bracket and final tracking error shared by A1 and A2.
fn config1_checks(name: &str, r: &Run) -> Result<String, String> {
    let m = &r.out.metrics;
    let p = &r.params;
    let t_done = m.completion_time.ok_or_else(|| format!("{name}: task did not complete"))?;
    let (lo, hi) = (p.d_cr, p.d_cr + p.d_1);
    check(m.min_d_min >= lo && m.min_d_min <= hi, || {
        format!("{name}: min d_min {:.4} outside [{lo}, {hi}]", m.min_d_min)
    })?;
    let last = r.out.trace.last().unwrap();
    let final_e = (last.p_e - last.p_g).norm();
    check(final_e < 5e-3, || format!("{name}: final |e| = {final_e:.5} m"))?;
    Ok(format!(
        "{name}: done at {t_done:.2} s, min d_min {:.3} m, final |e| {:.2} mm",
        m.min_d_min,
        final_e * 1e3
    ))
}

fn a1() -> Outcome {
    let start = Instant::now();
    let r = run("config1_y");
    let elapsed = start.elapsed().as_secs_f64();
    let summary = config1_checks("config1_y", &r)?;
    let dt = r.params.dt;
    let trace = &r.out.trace;
    let t_min = r.out.metrics.min_d_min_t;
    let t_done = r.out.metrics.completion_time.unwrap();
    let nominal = 0.26;
    let speeds = eef_speeds(trace, dt);
    // Sustained recovery: the speed stays in the band for at least one second.
    let window = (1.0 / dt).round() as usize;
    let band = |v: &f64| (v - nominal).abs() <= 0.15 * nominal;
    let after: Vec<(f64, f64)> = trace
        .windows(2)
        .zip(&speeds)
        .filter(|(w, _)| w[0].t > t_min && w[1].t <= t_done)
        .map(|(w, v)| (w[0].t, *v))
        .collect();
    let recovered = after
        .windows(window)
        .find(|run| run.iter().all(|(_, v)| band(v)))
        .map(|run| (run[0].0, run.iter().map(|(_, v)| *v).sum::<f64>() / window as f64));
    let (t_back, v) =
        recovered.ok_or_else(|| format!("EEF speed never held within 15% of {nominal} m/s after the evasion"))?;
    check(elapsed < 5.0, || format!("runtime {elapsed:.2} s"))?;
    Ok(format!("{summary}, speed back to {v:.3} m/s from t = {t_back:.2} s, runtime {elapsed:.2} s"))
}

fn a2() -> Outcome {
    let z = config1_checks("config1_z", &run("config1_z"))?;
    let xy = config1_checks("config1_xy_inclined", &run("config1_xy_inclined"))?;
    Ok(format!("{z}; {xy}"))
}

fn a3() -> Outcome {
    let r = run("config2_approach");
    let p = &r.params;
    let trace = &r.out.trace;
    let threshold = 0.5;
    let d0_at_speed = p.d_1 + p.c_v * 0.5;
    check((p.d_cr + d0_at_speed - threshold).abs() < 1e-12, || {
        format!("d_cr + d0 at 0.5 m/s is {}", p.d_cr + d0_at_speed)
    })?;
    let cross = trace
        .iter()
        .position(|rec| rec.d_min <= threshold)
        .ok_or("d_min never reaches 0.5 m")?;
    let moved = trace
        .iter()
        .position(|rec| rec.qdot_cmd.iter().any(|v| *v != 0.0))
        .ok_or("robot never moves")?;
    check(moved.abs_diff(cross) <= 1, || {
        format!("d_min crossed 0.5 m at tick {cross} but the first motion was at tick {moved}")
    })?;
    let zone_entry = trace.iter().position(|rec| in_zone(rec, p)).unwrap();
    let last = trace.last().unwrap();
    check(!in_zone(last, p), || "human still in the zone at the end".into())?;
    let q_err = (last.q - r.initial_q).amax();
    check(q_err < 1e-3, || format!("final joint error {q_err:.2e} rad"))?;
    Ok(format!(
        "crossing tick {cross} (v_rel {:.3}), zone entry tick {zone_entry}, first motion tick {moved}, home error {q_err:.1e} rad",
        trace[cross].v_rel
    ))
}

fn a4() -> Outcome {
    let r = run("config3_doorcard");
    let p = &r.params;
    let trace = &r.out.trace;
    let k = (1..trace.len())
        .find(|&k| trace[k - 1].mode == TaskMode::Work && is_ca(trace[k].mode))
        .ok_or("no WORK to avoidance transition")?;
    let first = &trace[k];
    check(in_zone(first, p), || {
        format!("human outside the zone at the transition (d_min {:.3})", first.d_min)
    })?;
    let bound = p.rep_cap * (1.0 - (-p.dt / p.tau).exp());
    check(first.v_rep_mod <= bound, || {
        format!("v_rep_mod {} at the first avoidance tick exceeds {bound}", first.v_rep_mod)
    })?;
    let mut prev = first.gamma;
    for w in trace[k..].windows(2) {
        if w[1].mode != w[0].mode {
            break;
        }
        check(w[1].gamma >= prev, || format!("gamma decreased at t = {:.2}", w[1].t))?;
        prev = w[1].gamma;
    }
    let acc = max_eef_accel(trace, p.dt);
    let a_max = RobotModel::iiwa14().a_max;
    check(acc <= 1.25 * a_max, || format!("EEF acceleration {acc:.3} m/s^2 above {}", 1.25 * a_max))?;
    Ok(format!(
        "switch at t = {:.2} with d_min {:.3} m, v_rep_mod {:.3} <= {bound:.3}, max accel {acc:.3} m/s^2",
        first.t, first.d_min, first.v_rep_mod
    ))
}

fn a5() -> Outcome {
    let r = run("config3_doorcard");
    let p = &r.params;
    let trace = &r.out.trace;
    check(r.out.metrics.completion_time.is_some(), || "task did not complete".into())?;
    let mut frozen_ticks = 0;
    let mut work_in_zone = 0;
    for w in trace.windows(2) {
        let (prev, cur) = (&w[0], &w[1]);
        if is_ca(cur.mode) && is_ca(prev.mode) {
            let zone = in_zone(cur, p);
            check(zone == (cur.mode == TaskMode::CaHold), || {
                format!("t = {:.2}: zone {zone} but mode {}", cur.t, cur.mode)
            })?;
            if zone {
                check(cur.p_g == prev.p_g, || format!("goal moved inside the zone at t = {:.2}", cur.t))?;
                frozen_ticks += 1;
            }
        }
        if cur.mode == TaskMode::Work {
            check(cur.v_rep_mod == 0.0, || format!("repulsion during WORK at t = {:.2}", cur.t))?;
            if in_zone(cur, p) {
                work_in_zone += 1;
            }
        }
    }
    check(work_in_zone > 0, || "human never entered the zone during WORK".into())?;

    let mut modes: Vec<TaskMode> = Vec::new();
    for rec in trace {
        if modes.last() != Some(&rec.mode) {
            modes.push(rec.mode);
        }
    }
    let seq: Vec<&str> = modes.iter().map(|m| m.as_str()).collect();
    let seq = seq.join(" ");
    // A switch into avoidance with the human already in the zone lands in CA_HOLD.
    let pattern = regex_like_match(&seq);
    check(pattern, || format!("unexpected mode sequence {seq}"))?;
    Ok(format!(
        "goal frozen on {frozen_ticks} in-zone ticks, WORK ignored the human for {work_in_zone} ticks, modes {seq}"
    ))
}

/// Matches `CA_TRACK (CA_HOLD CA_TRACK)* WORK [CA_HOLD] CA_TRACK (CA_HOLD CA_TRACK)* COMPLETE`.
fn regex_like_match(seq: &str) -> bool {
    let tokens: Vec<&str> = seq.split(' ').collect();
    let mut i = 0;
    let eat = |tok: &str, i: &mut usize| {
        if tokens.get(*i) == Some(&tok) {
            *i += 1;
            true
        } else {
            false
        }
    };
    if !eat("CA_TRACK", &mut i) {
        return false;
    }
    while eat("CA_HOLD", &mut i) {
        if !eat("CA_TRACK", &mut i) {
            return false;
        }
    }
    if !eat("WORK", &mut i) {
        return false;
    }
    eat("CA_HOLD", &mut i);
    if !eat("CA_TRACK", &mut i) {
        return false;
    }
    while eat("CA_HOLD", &mut i) {
        if !eat("CA_TRACK", &mut i) {
            return false;
        }
    }
    eat("COMPLETE", &mut i) && i == tokens.len()
}

fn random_capsule(rng: &mut StdRng, id: &str) -> Capsule {
    let point = |rng: &mut StdRng| Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    let a = point(rng);
    let b = match rng.random_range(0..10) {
        0 => a,
        _ => point(rng),
    };
    Capsule::new(id, a, b, rng.random_range(0.0..0.3)).unwrap()
}

/// Pair with parallel axes, which exercises the continuum-of-minimizers case.
fn parallel_pair(rng: &mut StdRng) -> (Capsule, Capsule) {
    let c1 = random_capsule(rng, "R");
    let dir = c1.b - c1.a;
    let shift = Vec3::new(rng.random_range(-0.8..0.8), rng.random_range(-0.8..0.8), rng.random_range(-0.8..0.8));
    let scale = rng.random_range(-1.5..1.5);
    let c2 = Capsule::new("H", c1.a + shift, c1.a + shift + dir * scale, rng.random_range(0.0..0.3)).unwrap();
    (c1, c2)
}

const GRID: usize = 2000;

/// Minimum axis distance over a GRID x GRID lattice of parameter pairs.
///
/// For a fixed `u` the squared distance is a convex quadratic in `v`, so the
/// lattice minimum along `v` is attained at one of the two nodes bracketing
/// the continuous minimizer; only those are evaluated.
fn grid_axis_distance(c1: &Capsule, c2: &Capsule) -> f64 {
    let h = 1.0 / (GRID - 1) as f64;
    let db = c2.b - c2.a;
    let len_sq = db.norm_squared();
    let mut best = f64::INFINITY;
    for i in 0..GRID {
        let pa = c1.a + (c1.b - c1.a) * (i as f64 * h);
        let j = if len_sq > 0.0 {
            let v = ((pa - c2.a).dot(&db) / len_sq).clamp(0.0, 1.0);
            ((v / h).floor() as usize).min(GRID - 1)
        } else {
            0
        };
        for jj in [j, (j + 1).min(GRID - 1)] {
            let pb = c2.a + db * (jj as f64 * h);
            best = best.min((pa - pb).norm());
        }
    }
    best
}

fn full_grid_axis_distance(c1: &Capsule, c2: &Capsule) -> f64 {
    let h = 1.0 / (GRID - 1) as f64;
    let mut best = f64::INFINITY;
    for i in 0..GRID {
        let pa = c1.a + (c1.b - c1.a) * (i as f64 * h);
        for j in 0..GRID {
            let pb = c2.a + (c2.b - c2.a) * (j as f64 * h);
            best = best.min((pa - pb).norm_squared());
        }
    }
    best.sqrt()
}

fn point_segment_distance(p: &Vec3, a: &Vec3, b: &Vec3) -> f64 {
    let ab = b - a;
    let len_sq = ab.norm_squared();
    let t = if len_sq > 0.0 { ((p - a).dot(&ab) / len_sq).clamp(0.0, 1.0) } else { 0.0 };
    (p - (a + ab * t)).norm()
}

fn a6() -> Outcome {
    let mut rng = StdRng::seed_from_u64(6);
    let h = 1.0 / (GRID - 1) as f64;
    let mut worst_gap: f64 = 0.0;
    for n in 0..10_000 {
        let (c1, c2) = if n % 20 == 0 {
            parallel_pair(&mut rng)
        } else {
            (random_capsule(&mut rng, "R"), random_capsule(&mut rng, "H"))
        };
        let res = capsule_min_distance(&c1, &c2, None);
        let radii = c1.radius + c2.radius;
        let grid = grid_axis_distance(&c1, &c2) - radii;
        if n < 10 {
            let full = full_grid_axis_distance(&c1, &c2) - radii;
            check((full - grid).abs() < 1e-12, || format!("pair {n}: lattice shortcut {grid} vs full grid {full}"))?;
        }
        let eps = 0.5 * h * (c1.axis_length() + c2.axis_length());
        check(res.d_min <= grid + 1e-9 && res.d_min >= grid - eps - 1e-9, || {
            format!("pair {n}: d_min {} vs grid {grid} (resolution {eps:.2e})", res.d_min)
        })?;
        worst_gap = worst_gap.max(grid - res.d_min);

        let swapped = capsule_min_distance(&c2, &c1, None);
        check(swapped.d_min == res.d_min, || format!("pair {n}: asymmetric {} vs {}", res.d_min, swapped.d_min))?;

        let rot = Rotation3::from_scaled_axis(Vec3::new(
            rng.random_range(-3.0..3.0),
            rng.random_range(-3.0..3.0),
            rng.random_range(-3.0..3.0),
        ));
        let shift = Vec3::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let moved = |c: &Capsule| Capsule::new(c.id.clone(), rot * c.a + shift, rot * c.b + shift, c.radius).unwrap();
        let rigid = capsule_min_distance(&moved(&c1), &moved(&c2), None);
        check((rigid.d_min - res.d_min).abs() < 1e-9, || {
            format!("pair {n}: rigid motion changed d_min by {:e}", rigid.d_min - res.d_min)
        })?;

        check((res.s.norm() - 1.0).abs() < 1e-12, || format!("pair {n}: |s| = {}", res.s.norm()))?;
        if res.d_min >= 0.0 {
            let on1 = point_segment_distance(&res.r1, &c1.a, &c1.b) - c1.radius;
            let on2 = point_segment_distance(&res.r2, &c2.a, &c2.b) - c2.radius;
            check(on1.abs() < 1e-9 && on2.abs() < 1e-9, || {
                format!("pair {n}: witness points off the surfaces by {on1:e}, {on2:e}")
            })?;
        }
    }
    Ok(format!(
        "10000 pairs within the {GRID}x{GRID} grid bound (largest grid excess {worst_gap:.2e} m)"
    ))
}

/// Homogeneous-transform chain built from Rodrigues' formula, independent of
/// the library's isometry composition.
fn oracle_frames(model: &RobotModel, q: &JointVector) -> Vec<SMatrix<f64, 4, 4>> {
    let mut frames = vec![SMatrix::<f64, 4, 4>::identity()];
    for (i, joint) in model.joints.iter().enumerate() {
        let k = joint.axis.normalize();
        let kx = Matrix3::new(0.0, -k.z, k.y, k.z, 0.0, -k.x, -k.y, k.x, 0.0);
        let rot = Matrix3::identity() + kx * q[i].sin() + kx * kx * (1.0 - q[i].cos());
        let mut t = SMatrix::<f64, 4, 4>::identity();
        t.fixed_view_mut::<3, 3>(0, 0).copy_from(&rot);
        let mut shift = SMatrix::<f64, 4, 4>::identity();
        shift.fixed_view_mut::<3, 1>(0, 3).copy_from(&joint.offset);
        let next = frames[i] * shift * t;
        frames.push(next);
    }
    frames
}

fn oracle_point(frames: &[SMatrix<f64, 4, 4>], link: usize, local: &Vec3) -> Vec3 {
    let p = frames[link] * nalgebra::Vector4::new(local.x, local.y, local.z, 1.0);
    Vec3::new(p.x, p.y, p.z)
}

fn fd_jacobian(model: &RobotModel, q: &JointVector, link: usize, local: &Vec3) -> Jacobian {
    let h = 1e-6;
    let base = oracle_point(&oracle_frames(model, q), link, local);
    let mut jac = Jacobian::zeros();
    for i in 0..DOF {
        let mut qh = *q;
        qh[i] += h;
        let moved = oracle_point(&oracle_frames(model, &qh), link, local);
        jac.set_column(i, &((moved - base) / h));
    }
    jac
}

fn a7() -> Outcome {
    let model = RobotModel::iiwa14();
    let mut rng = StdRng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    let mut fk_worst: f64 = 0.0;
    for n in 0..100 {
        let q = JointVector::from_fn(|i, _| rng.random_range(model.limits.q_min[i]..model.limits.q_max[i]));
        let frames = oracle_frames(&model, &q);
        let p_e = model.eef_position(&q);
        fk_worst = fk_worst.max((p_e - oracle_point(&frames, DOF, &Vec3::zeros())).norm());

        let diff = (model.jacobian_eef(&q) - fd_jacobian(&model, &q, DOF, &Vec3::zeros())).amax();
        worst = worst.max(diff);
        check(diff < 1e-5, || format!("config {n}: EEF Jacobian off by {diff:e}"))?;

        let kin = model.kinematic_state(&q);
        for _ in 0..20 {
            let link = rng.random_range(1..=DOF);
            let local = Vec3::new(rng.random_range(-0.2..0.2), rng.random_range(-0.2..0.2), rng.random_range(-0.2..0.3));
            let point = (kin.frames[link] * Point3::from(local)).coords;
            let jac = kin.jacobian_at_point(link, &point).unwrap();
            let diff = (jac - fd_jacobian(&model, &q, link, &local)).amax();
            worst = worst.max(diff);
            check(diff < 1e-5, || format!("config {n}: link {link} Jacobian off by {diff:e}"))?;
            for i in link..DOF {
                check(jac.column(i).iter().all(|x| *x == 0.0), || {
                    format!("config {n}: column {} of a link-{link} Jacobian is not zero", i + 1)
                })?;
            }
        }
    }
    check(fk_worst < 1e-12, || format!("forward kinematics differs from the transform chain by {fk_worst:e}"))?;
    Ok(format!("100 configs x 21 points, largest finite-difference error {worst:.1e}"))
}

fn a8() -> Outcome {
    let mut rng = StdRng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    for n in 0..1000 {
        let jac = Jacobian::from_fn(|_, _| rng.random_range(-1.0..1.0));
        let v = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let lambda: f64 = 10f64.powf(rng.random_range(-2.0..0.0));
        let x = dls_solve(&jac, &v, lambda).map_err(|e| e.to_string())?;
        // Normal equations of |J x - v|^2 + lambda^2 |x|^2, solved by LU.
        let normal = jac.transpose() * jac + SMatrix::<f64, DOF, DOF>::identity() * (lambda * lambda);
        let reference = normal.lu().solve(&(jac.transpose() * v)).ok_or("reference solve failed")?;
        let rel = (x - reference).norm() / reference.norm();
        worst = worst.max(rel);
        check(rel < 1e-9, || format!("instance {n}: relative error {rel:e} at lambda {lambda}"))?;
    }
    let mut pinv_worst: f64 = 0.0;
    for n in 0..100 {
        let jac = Jacobian::from_fn(|_, _| rng.random_range(-1.0..1.0));
        let v = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let pinv = jac.svd(true, true).pseudo_inverse(1e-12).map_err(|e| e.to_string())?;
        let x = dls_solve(&jac, &v, 1e-6).map_err(|e| e.to_string())?;
        let err = (x - pinv * v).norm();
        pinv_worst = pinv_worst.max(err);
        check(err < 1e-6, || format!("instance {n}: lambda 1e-6 differs from the pseudoinverse by {err:e}"))?;
    }
    Ok(format!(
        "1000 damped instances (worst relative error {worst:.1e}), pseudoinverse limit within {pinv_worst:.1e}"
    ))
}

fn a9() -> Outcome {
    let model = RobotModel::iiwa14();
    let p = ControllerParams::defaults_for(&model);
    let mut rng = StdRng::seed_from_u64(9);
    for n in 0..10_000 {
        let mut state = AttractionState {
            psi_i: Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
        };
        let before = state;
        let e = Vec3::new(rng.random_range(-0.2..0.2), rng.random_range(-0.2..0.2), rng.random_range(-0.2..0.2));
        let d0 = rng.random_range(0.05..0.6);
        let d_min = p.d_cr + rng.random_range(-0.05..d0);
        state.integral_step(&e, d_min, d0, &p);
        check(state == before, || format!("case {n}: integral moved inside the zone"))?;
        let d_out = p.d_cr + d0 + rng.random_range(1e-6..1.0);
        state.integral_step(&e, d_out, d0, &p);
        let expected = before.psi_i - e * (p.ki * p.dt);
        check((state.psi_i - expected).norm() < 1e-15, || format!("case {n}: integral step outside the zone"))?;

        let d0 = rng.random_range(0.01..1.0);
        check(beta_factor(p.d_cr, d0, &p) == 0.0, || format!("case {n}: beta(d_cr) != 0"))?;
        let b = beta_factor(p.d_cr + rng.random_range(0.0..2.0), d0, &p);
        check((0.0..=1.0).contains(&b), || format!("case {n}: beta {b} outside [0, 1]"))?;

        let tau = rng.random_range(0.001..1.0);
        let g = reshape_gamma(tau, tau);
        check((g - (1.0 - (-1.0f64).exp())).abs() < 1e-12, || format!("case {n}: gamma(tau) = {g}"))?;
    }
    let mut reshape = ReshapeState::default();
    check(reshape.update(3.0, true, p.tau) == 0.0, || "gamma non-zero on the switch tick".into())?;
    let g1 = reshape.update(3.0 + p.tau, false, p.tau);
    check((g1 - (1.0 - (-1.0f64).exp())).abs() < 1e-12, || format!("gamma one tau after a switch is {g1}"))?;
    Ok("integral freeze, beta(d_cr) = 0 and gamma(tau) = 1 - 1/e on 10000 random cases".into())
}

fn trace_bytes(name: &str) -> Vec<u8> {
    let out = run(name).out;
    let mut buf = Vec::new();
    write_trace(&out.trace, TraceFormat::Csv, &mut buf).unwrap();
    buf
}

fn a10() -> Outcome {
    let mut sizes = Vec::new();
    for name in SHIPPED {
        let first = trace_bytes(name);
        let second = trace_bytes(name);
        check(first == second, || format!("{name}: traces differ between runs"))?;
        sizes.push(format!("{name} {} B", first.len()));
    }
    Ok(format!("identical traces: {}", sizes.join(", ")))
}

/// Safety and liveness over every shipped scenario.
fn shipped_invariants() -> Outcome {
    let a_max = RobotModel::iiwa14().a_max;
    let mut lines = Vec::new();
    for name in SHIPPED {
        let r = run(name);
        let m = &r.out.metrics;
        check(m.min_d_min >= r.params.d_cr - 0.01, || format!("{name}: min d_min {:.4}", m.min_d_min))?;
        check(m.violations.is_empty(), || format!("{name}: {} violations", m.violations.len()))?;
        let acc = max_eef_accel(&r.out.trace, r.params.dt);
        check(acc <= 1.25 * a_max, || format!("{name}: EEF acceleration {acc:.3}"))?;
        if !r.out.trace.is_empty() && name != "config2_approach" {
            check(m.completion_time.is_some(), || format!("{name}: did not complete"))?;
        }
        lines.push(format!("{name} {:.3}/{acc:.2}", m.min_d_min));
    }
    Ok(format!("min d_min / max accel: {}", lines.join(", ")))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 11] = [
        ("A1", a1),
        ("A2", a2),
        ("A3", a3),
        ("A4", a4),
        ("A5", a5),
        ("A6", a6),
        ("A7", a7),
        ("A8", a8),
        ("A9", a9),
        ("A10", a10),
        ("INV", shipped_invariants),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (id, f) in criteria {
        if !filter.is_empty() && !filter.iter().any(|x| x == id) {
            continue;
        }
        let start = Instant::now();
        match f() {
            Ok(detail) => println!("{id} PASS ({:.1} s) {detail}", start.elapsed().as_secs_f64()),
            Err(reason) => {
                failed += 1;
                println!("{id} FAIL ({:.1} s) {reason}", start.elapsed().as_secs_f64());
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
