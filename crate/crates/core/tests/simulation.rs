use proptest::prelude::*;
use urban_coverage::engine::{max_speed, replay, run, Algorithm, EnvSource, SimConfig, Spacing};
use urban_coverage::env::{EnvFamily, EnvSpec};
use urban_coverage::metrics::{sees, ProbeSet};
use urban_coverage::traj::{swept_area, MultiPath};
use urban_coverage::{Environment, Point2, Trajectory};

fn built(alg: Algorithm, n: usize, steps: usize, seed: u64) -> SimConfig {
    SimConfig {
        steps,
        record_every: 10,
        ..SimConfig::new(EnvSource::Spec(EnvSpec::preset(EnvFamily::ShortHigh, 0)), alg, n, seed)
    }
}

#[test]
fn coverage_never_decreases() {
    for alg in Algorithm::ALL {
        let r = run(&built(alg, 3, 800, 4)).unwrap();
        for w in r.series.windows(2) {
            assert!(w[1].percent_coverage >= w[0].percent_coverage, "{alg}");
            assert!(w[1].time_spent.mean <= w[1].t + 1e-9);
        }
        assert!(max_speed(&r.paths) <= r.config.u_max + 1e-9, "{alg}");
    }
}

#[test]
fn static_methods_stop_revisiting_once_settled() {
    let cfg = SimConfig {
        steps: 6000,
        record_every: 100,
        ..SimConfig::new(EnvSource::Spec(EnvSpec::empty(10.0)), Algorithm::Voronoi, 4, 3)
    };
    let r = run(&cfg).unwrap();
    // Find when every agent stops moving.
    let settle = r
        .paths
        .trajectories
        .iter()
        .map(|tr| {
            let s = tr.samples();
            (1..s.len()).rev().find(|&k| s[k].pos != s[k - 1].pos).unwrap_or(0)
        })
        .max()
        .unwrap();
    assert!(settle < 5000);
    let mut probes = ProbeSet::sample(&r.env, cfg.probes, None, cfg.seeds.probes).unwrap();
    let mut counts_at_settle = Vec::new();
    for k in 0..cfg.steps {
        let team: Vec<(Point2, bool)> = r
            .paths
            .trajectories
            .iter()
            .map(|t| (t.samples()[k].pos.ground(), t.samples()[k].observing))
            .collect();
        probes.record_step(k as f64 * cfg.dt, &team).unwrap();
        if k == settle {
            counts_at_settle = (0..probes.len()).map(|i| probes.intervals(i).len()).collect();
        }
    }
    for i in 0..probes.len() {
        // Only the interval that was open at settling may close later.
        let extra = probes.intervals(i).len() - counts_at_settle[i];
        assert!(extra <= 1);
        if extra == 1 {
            assert!(probes.open_since(i).is_none());
        }
    }
}

#[test]
fn lawnmower_team_sweeps_everything_it_should() {
    let env = Environment::empty([10.0, 10.0], 2.0, 1.0).unwrap();
    let cfg = SimConfig {
        steps: 700,
        spacing: Spacing::Equal,
        env: EnvSource::World(env.clone()),
        ..SimConfig::new(EnvSource::World(env.clone()), Algorithm::Lawnmower, 2, 1)
    };
    let r = run(&cfg).unwrap();
    let region = swept_area(&r.paths, &env, 0.25).unwrap();
    assert_eq!(region.marked_count(), region.grid.len());
    assert_eq!(r.final_report.percent_coverage, 100.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Sum of interval lengths equals the number of seen steps times dt.
    #[test]
    fn interval_bookkeeping_is_exact(
        trace in prop::collection::vec(prop::collection::vec((0.0f64..6.0, 0.0f64..6.0, any::<bool>()), 1..4), 1..80),
        dt in 0.05f64..1.0,
    ) {
        let probe = Point2::new(3.0, 3.0);
        let mut ps = ProbeSet::new(vec![probe], 0.5, 1.0).unwrap();
        let mut seen_steps = 0;
        for (k, team) in trace.iter().enumerate() {
            let team: Vec<(Point2, bool)> = team.iter().map(|&(x, y, o)| (Point2::new(x, y), o)).collect();
            if team.iter().any(|&(p, o)| sees(probe, p, o, 1.0, 0.5)) {
                seen_steps += 1;
            }
            ps.record_step(k as f64 * dt, &team).unwrap();
        }
        let t_now = trace.len() as f64 * dt;
        let r = ps.report(t_now).unwrap();
        prop_assert!((r.time_spent.mean - seen_steps as f64 * dt).abs() < 1e-9);
        prop_assert!(r.time_spent.mean <= t_now + 1e-12);
        let iv = ps.intervals(0);
        for w in iv.windows(2) {
            prop_assert!(w[0].1 <= w[1].0);
        }
    }

    #[test]
    fn replay_is_faithful(pts in prop::collection::vec((0.0f64..10.0, 0.0f64..10.0), 2..8)) {
        let mut t = 0.0;
        let mut timed = vec![(0.0, Point2::new(pts[0].0, pts[0].1))];
        for w in pts.windows(2) {
            let (a, b) = (Point2::new(w[0].0, w[0].1), Point2::new(w[1].0, w[1].1));
            // Waypoints on the sample clock so the replay must hit them.
            t += ((a.dist(b) / 0.1).ceil().max(1.0)) * 0.1;
            timed.push((t, b));
        }
        let plan = Trajectory::planar(0, 2.0, timed.clone()).unwrap();
        let steps = (t / 0.1).round() as usize + 5;
        let r = replay(&plan, steps, 0.1, false).unwrap();
        prop_assert_eq!(r.len(), steps + 1);
        for (tw, p) in timed {
            let k = (tw / 0.1).round() as usize;
            prop_assert!(r.samples()[k].pos.ground().dist(p) < 1e-9);
        }
        let mp = MultiPath::new(vec![r]).unwrap();
        prop_assert!(max_speed(&mp) <= 1.0 + 1e-9);
    }

    #[test]
    fn identical_configs_give_identical_results(seed in 0u64..1000, alg_i in 0usize..6) {
        let alg = Algorithm::ALL[alg_i];
        let c = built(alg, 2, 150, seed);
        let a = run(&c).unwrap();
        let b = run(&c).unwrap();
        prop_assert_eq!(a.paths, b.paths);
        prop_assert_eq!(
            serde_json::to_string(&a.series).unwrap(),
            serde_json::to_string(&b.series).unwrap()
        );
    }
}
