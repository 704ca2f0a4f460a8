//! Acceptance suite. Each test prints one `PASS`/`FAIL` line with the measured
//! worst case, the tolerance and the wall time, then asserts.

use std::time::{Duration, Instant};

use nalgebra::{Vector3, Vector6};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use se3_fiber::flow::{hamiltonian, integrate, momentum_diagnostics};
use se3_fiber::metric::log_norm;
use se3_fiber::se3::exp_se3;
use se3_fiber::sections::{compute_sections, error_g, fiber_sweep, project, section_sigma_d};
use se3_fiber::shooting::{energy_oracle_distance, shoot_distance};
use se3_fiber::verify::{fig2_bottom, fig2_top, random_algebra, random_unit, run_suite, Suite};
use se3_fiber::{AlgebraVector, CosetPoint, MetricParams, PhaseState, ShootingConfig};

struct Outcome {
    id: u32,
    name: &'static str,
    worst: f64,
    tolerance: f64,
    ok: bool,
    elapsed: Duration,
    budget: Duration,
    note: String,
}

impl Outcome {
    fn report(self) {
        let in_time = self.elapsed <= self.budget;
        let pass = self.ok && in_time;
        println!(
            "{} criterion {}: {} | worst {:.3e} (tol {:.1e}) | {:.2}s of {:.0}s{}",
            if pass { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.worst,
            self.tolerance,
            self.elapsed.as_secs_f64(),
            self.budget.as_secs_f64(),
            if self.note.is_empty() { String::new() } else { format!(" | {}", self.note) },
        );
        assert!(self.ok, "criterion {} outside tolerance: {:e} vs {:e}", self.id, self.worst, self.tolerance);
        assert!(in_time, "criterion {} over budget: {:?}", self.id, self.elapsed);
    }
}

fn run<F>(id: u32, name: &'static str, tolerance: f64, budget_s: u64, body: F)
where
    F: FnOnce(&mut ChaCha8Rng) -> (f64, bool, String),
{
    let mut rng = ChaCha8Rng::seed_from_u64(0x5e3f_0000 + id as u64);
    let start = Instant::now();
    let (worst, ok, note) = body(&mut rng);
    Outcome { id, name, worst, tolerance, ok, elapsed: start.elapsed(), budget: Duration::from_secs(budget_s), note }
        .report();
}

fn random_momentum(rng: &mut ChaCha8Rng) -> Vector6<f64> {
    Vector6::from_fn(|_, _| rng.random_range(-1.5..1.5))
}

fn random_coset(rng: &mut ChaCha8Rng) -> CosetPoint {
    loop {
        let p = project(&exp_se3(&random_algebra(rng, 1.2, 0.6)));
        if p.n.z > -0.95 {
            return p;
        }
    }
}

#[test]
fn criterion_01_fig2_top() {
    run(1, "Fig. 2 top error in [0.07, 0.13]", 0.03, 5, |_| {
        let (g, m) = fig2_top();
        let e = error_g(&project(&g), &m).expect("section error");
        ((e - 0.1).abs(), (0.07..=0.13).contains(&e), format!("errorG(g1) = {e:.6e}"))
    });
}

#[test]
fn criterion_02_fig2_bottom() {
    run(2, "Fig. 2 bottom error vanishes", 1e-3, 5, |_| {
        let (g, m) = fig2_bottom();
        let e = error_g(&project(&g), &m).expect("section error");
        (e, e <= 1e-3, format!("errorG(g2) = {e:.6e}"))
    });
}

#[test]
fn criterion_03_conservation() {
    run(3, "lambda6 and u6 conserved (R and SR)", 1e-8, 30, |rng| {
        let metrics = [
            MetricParams::riemannian(1.0, 0.6, 0.9, 0.3).unwrap(),
            MetricParams::sub_riemannian(1.0, 0.8, 0.5).unwrap(),
        ];
        let mut worst: f64 = 0.0;
        for m in &metrics {
            for _ in 0..100 {
                let lam0 = random_momentum(rng);
                let tr = integrate(&PhaseState::at_identity(lam0), m, 1.0, 1000).expect("integrates");
                let d = momentum_diagnostics(&tr).expect("diagnostics");
                let scale = lam0.norm();
                worst = worst.max(d.max_lam6_drift / scale).max(d.max_u6_drift / scale);
            }
        }
        (worst, worst <= 1e-8, "200 runs".into())
    });
}

#[test]
fn criterion_04_horizontality() {
    run(4, "sigma_d geodesic horizontal, fiber weight irrelevant", 1e-6, 300, |rng| {
        let m = MetricParams::riemannian(1.0, 0.6, 0.9, 0.3).unwrap();
        let cfg = ShootingConfig { restarts: 4, seed: 11, ..ShootingConfig::default() };
        let (mut lam6, mut spread) = (0.0f64, 0.0f64);
        for _ in 0..20 {
            let p = random_coset(rng);
            let d = section_sigma_d(&p, &m, &cfg).expect("sigma_d");
            lam6 = lam6.max(d.horizontality_defect());
            let mut lam0 = d.shot.lam0;
            lam0[5] = 0.0;
            let paths: Vec<_> = [0.01, 1.0, 100.0]
                .iter()
                .map(|&w| integrate(&PhaseState::at_identity(lam0), &m.with_g66(w).unwrap(), 1.0, 1000).unwrap())
                .collect();
            for p in &paths[1..] {
                for (a, b) in p.states.iter().zip(&paths[0].states) {
                    spread = spread.max(a.g.distance_max(&b.g));
                }
            }
        }
        (lam6, lam6 <= 1e-6 && spread <= 1e-7, format!("path spread {spread:.3e} (tol 1e-7)"))
    });
}

#[test]
fn criterion_05_sphere() {
    run(5, "sphere: sigma = sigma_rho = sigma_d", 1e-6, 120, |rng| {
        let m = MetricParams::riemannian(1.0, 1.0, 0.7, 0.7).unwrap();
        let cfg = ShootingConfig { restarts: 4, seed: 5, ..ShootingConfig::default() };
        let (mut rho_gap, mut dist_gap) = (0.0f64, 0.0f64);
        let mut cases = 0;
        while cases < 50 {
            let n = random_unit(rng);
            if n.z < -0.95 {
                continue;
            }
            cases += 1;
            let p = CosetPoint::new(Vector3::zeros(), n).unwrap();
            let r = compute_sections(&p, &m, Some(&cfg)).expect("sections");
            let d = r.dist_at_sigma_d.expect("sigma_d");
            let beta = n.z.clamp(-1.0, 1.0).acos();
            rho_gap = rho_gap.max((r.rho_at_sigma - r.rho_at_sigma_rho).abs());
            dist_gap = dist_gap.max((r.rho_at_sigma_rho - d).abs()).max((d - m.g44().sqrt() * beta).abs());
        }
        (dist_gap, rho_gap <= 1e-9 && dist_gap <= 1e-6, format!("rho gap {rho_gap:.3e} (tol 1e-9)"))
    });
}

#[test]
fn criterion_06_coplanar_symmetry() {
    run(6, "co-planar cosets give symmetric rho profiles", 1e-9, 30, |rng| {
        let m = MetricParams::riemannian(1.3, 0.7, 0.9, 0.4).unwrap();
        let cfg = ShootingConfig::default();
        let mut worst: f64 = 0.0;
        let mut cases = 0;
        while cases < 50 {
            let n = random_unit(rng);
            if n.z < -0.95 {
                continue;
            }
            cases += 1;
            let x = rng.random_range(-1.0..1.0) * n + rng.random_range(-1.0..1.0) * Vector3::z();
            let p = CosetPoint::new(x, n).unwrap();
            let s = fiber_sweep(&p, &m, 256, false, &cfg).expect("sweep");
            worst = worst.max(s.symmetry_defect());
        }
        (worst, worst <= 1e-9, String::new())
    });
}

#[test]
fn criterion_07_axial_cosets() {
    run(7, "axial cosets have zero error when g11 >= g33", 1e-6, 30, |rng| {
        let mut worst: f64 = 0.0;
        let mut cases = 0;
        while cases < 50 {
            let g33 = rng.random_range(0.1..1.5);
            let g11 = rng.random_range(g33..3.0);
            let m = MetricParams::riemannian(g11, g33, rng.random_range(0.1..2.0), rng.random_range(0.1..2.0)).unwrap();
            let n = random_unit(rng);
            if n.z < -0.95 {
                continue;
            }
            cases += 1;
            let p = CosetPoint::new(Vector3::new(0.0, 0.0, rng.random_range(-2.0..2.0)), n).unwrap();
            worst = worst.max(error_g(&p, &m).expect("section error").abs());
        }
        (worst, worst <= 1e-6, String::new())
    });
}

#[test]
fn criterion_08_log_distance_asymptotics() {
    run(8, "|d^2 - rho^2| / rho^4 bounded as t halves", 2.0, 120, |rng| {
        let m = MetricParams::riemannian(1.0, 0.6, 0.9, 0.3).unwrap();
        let cfg = ShootingConfig { tol: 1e-13, ..ShootingConfig::default() };
        let mut worst: f64 = 0.0;
        let mut ratios = Vec::new();
        for _ in 0..5 {
            let c: AlgebraVector = random_algebra(rng, 1.2, 0.8);
            let q: Vec<f64> = [0.8, 0.4, 0.2, 0.1]
                .iter()
                .map(|&t| {
                    let g = exp_se3(&(t * c));
                    let rho = log_norm(&g, &m).unwrap();
                    let d = shoot_distance(&g, &m, &cfg).expect("shooting").distance;
                    (d * d - rho * rho).abs() / rho.powi(4)
                })
                .collect();
            for w in q.windows(2) {
                // absolute floor: d² and ρ² agree to roundoff once the ratio is tiny
                worst = worst.max(w[1] / w[0].max(1e-6));
            }
            ratios.push(format!("{:.3e}", q[3]));
        }
        (worst, worst <= 2.0, format!("ratio at t=0.1: [{}]", ratios.join(", ")))
    });
}

#[test]
fn criterion_09_oracle_equivalence() {
    run(9, "shooting and energy oracle agree", 0.01, 300, |rng| {
        let metrics = [
            MetricParams::riemannian(1.0, 0.6, 0.9, 0.3).unwrap(),
            MetricParams::riemannian(2.0, 1.0, 0.5, 1.5).unwrap(),
            MetricParams::riemannian(1.0, 1.0, 1.0, 1.0).unwrap(),
        ];
        let cfg = ShootingConfig::default();
        let mut worst: f64 = 0.0;
        let mut cases = 0;
        while cases < 30 {
            let m = &metrics[cases % metrics.len()];
            let g = exp_se3(&random_algebra(rng, 1.5, 1.0));
            if log_norm(&g, m).unwrap() > 1.5 {
                continue;
            }
            cases += 1;
            let d = shoot_distance(&g, m, &cfg).expect("shooting").distance;
            let o = energy_oracle_distance(&g, m, 32).expect("oracle");
            worst = worst.max((d - o).abs() / o.max(1e-12));
        }
        (worst, worst <= 0.01, "relative gap".into())
    });
}

#[test]
fn criterion_10_structural() {
    run(10, "algebra, legality, reductivity, integrator order", 0.0, 60, |_| {
        let m = MetricParams::riemannian(1.0, 0.6, 0.9, 0.3).unwrap();
        let mut failed = Vec::new();
        let mut worst_excess: f64 = 0.0;
        for suite in [Suite::Algebra, Suite::Reductive] {
            let report = run_suite(suite, &m, 0).expect("suite runs");
            for c in report.checks {
                worst_excess = worst_excess.max(c.max_violation - c.tolerance);
                if !c.passed {
                    failed.push(c.name);
                }
            }
        }
        let stiff = MetricParams::riemannian(1.0, 0.3, 2.0, 0.5).unwrap();
        let lam0 = Vector6::new(1.0, -2.0, 0.5, 1.5, 0.7, -1.0);
        let drift = |steps| {
            let tr = integrate(&PhaseState::at_identity(lam0), &stiff, 1.0, steps).unwrap();
            momentum_diagnostics(&tr).unwrap().max_ham_drift / hamiltonian(&lam0, &stiff)
        };
        let ratio = drift(40) / drift(80);
        if ratio < 8.0 {
            failed.push(format!("drift ratio {ratio:.2}"));
        }
        let note = if failed.is_empty() { format!("drift ratio {ratio:.2}") } else { failed.join(", ") };
        (worst_excess.max(0.0), failed.is_empty(), note)
    });
}
