//! Feedback laws: the plain spectral descent direction and its blend with a
//! repulsive field near buildings.

use rand::Rng;

use crate::env::Environment;
use crate::error::{CoverageError, Result};
use crate::geom::Point2;

use super::basis::ModeGrid;
use super::state::ErgodicState;

/// `B_j = Σ Λ_k S_k ∇f_k(x)`, using the unscaled weights so that a global
/// rescaling of `Λ` cannot change the rounding of the direction.
pub fn ergodic_gradient(state: &ErgodicState, modes: &ModeGrid, x: Point2) -> Point2 {
    let w: Vec<f64> = modes
        .modes()
        .iter()
        .enumerate()
        .map(|(k, m)| m.weight * state.s_k(k))
        .collect();
    modes.weighted_gradient(&w, x)
}

/// Uniformly random unit heading.
pub fn fallback_heading<R: Rng>(rng: &mut R) -> Point2 {
    let a = rng.gen_range(0.0..std::f64::consts::TAU);
    Point2::new(a.cos(), a.sin())
}

fn scaled(dir: Point2, u_max: f64) -> Point2 {
    let n = dir.norm();
    Point2::new(u_max * (dir.x / n), u_max * (dir.y / n))
}

/// `u = -u_max B / ‖B‖`; a random heading when `B` vanishes.
pub fn control_step<R: Rng>(state: &ErgodicState, modes: &ModeGrid, x: Point2, u_max: f64, rng: &mut R) -> Point2 {
    let b = ergodic_gradient(state, modes, x);
    if b.norm() > 0.0 && b.norm().is_finite() {
        scaled(-b, u_max)
    } else {
        scaled(fallback_heading(rng), u_max)
    }
}

/// Unit vector from the nearest footprint point toward `x` inside the
/// influence distance, zero beyond it.
pub fn repulsive_field(x: Point2, env: &Environment, d_infl: f64) -> Result<Point2> {
    if env.obstacle_at(x) {
        return Err(CoverageError::InsideObstacle { x: x.x, y: x.y });
    }
    match env.nearest_building(x) {
        Some((i, d)) if d < d_infl => {
            let q = env.buildings[i].footprint().closest_point(x);
            Ok((x - q).normalized().unwrap_or(Point2::ZERO))
        }
        _ => Ok(Point2::ZERO),
    }
}

/// Linear bump: 0 at contact, 1 from `d_infl` on.
pub fn bump_alpha(distance: f64, d_infl: f64) -> Result<f64> {
    if !(d_infl > 0.0) {
        return Err(CoverageError::InvalidParameter(format!("d_infl {d_infl} must be positive")));
    }
    Ok((distance.max(0.0) / d_infl).min(1.0))
}

/// Blend of the ergodic heading `V` with the repulsive field `F`:
/// `V* = α V + (1 - α) F`, `u = u_max V* / ‖V*‖`.
///
/// The field enters with the sign that pushes the agent away from the
/// obstacle. Beyond `d_infl` the result is exactly [`control_step`].
pub fn avoid_control_step<R: Rng>(
    state: &ErgodicState,
    modes: &ModeGrid,
    env: &Environment,
    x: Point2,
    u_max: f64,
    d_infl: f64,
    rng: &mut R,
) -> Result<Point2> {
    let f = repulsive_field(x, env, d_infl)?;
    let d = env.nearest_building(x).map_or(f64::INFINITY, |(_, d)| d);
    let alpha = bump_alpha(d, d_infl)?;
    let u = control_step(state, modes, x, u_max, rng);
    if alpha >= 1.0 {
        return Ok(u);
    }
    let v = u * (1.0 / u_max);
    let blend = v * alpha + f * (1.0 - alpha);
    Ok(match blend.normalized() {
        Some(dir) => dir * u_max,
        None => f * u_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::Building;
    use crate::ergodic::basis::Weighting;
    use crate::geom::Rect;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unit() -> (ModeGrid, Vec<f64>) {
        let modes = ModeGrid::new([10, 10], [1.0, 1.0], Weighting::Sobolev);
        let mut mu = vec![0.0; modes.len()];
        mu[0] = 1.0;
        (modes, mu)
    }

    fn wall_env() -> Environment {
        Environment::with_default_ceiling(
            [10.0, 10.0],
            vec![Building::new(Rect::new(4.0, 4.0, 6.0, 6.0), 5.0)],
            2.0,
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn fallback_at_time_zero_has_full_speed() {
        let (modes, mu) = unit();
        let s = ErgodicState::new(mu, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = control_step(&s, &modes, Point2::new(0.4, 0.4), 1.5, &mut rng);
        assert!((u.norm() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn parked_corner_agent_heads_inward() {
        let (modes, mu) = unit();
        let mut s = ErgodicState::new(mu, 1);
        let p = Point2::new(0.05, 0.05);
        for _ in 0..500 {
            s.accumulate(&modes, &[p], 0.1);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let u = control_step(&s, &modes, p, 1.0, &mut rng);
        assert!(u.dot(p - Point2::new(0.5, 0.5)) < 0.0);
    }

    #[test]
    fn lambda_scale_does_not_change_direction() {
        let (modes, mu) = unit();
        let scaled_modes = modes.clone().with_lambda_scale(7.3);
        let mut s = ErgodicState::new(mu, 1);
        s.accumulate(&modes, &[Point2::new(0.2, 0.7)], 0.3);
        let x = Point2::new(0.6, 0.1);
        let mut r1 = ChaCha8Rng::seed_from_u64(0);
        let mut r2 = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(
            control_step(&s, &modes, x, 1.0, &mut r1),
            control_step(&s, &scaled_modes, x, 1.0, &mut r2)
        );
    }

    #[test]
    fn field_points_away_from_east_face() {
        let env = wall_env();
        assert_eq!(repulsive_field(Point2::new(6.5, 5.0), &env, 2.0).unwrap(), Point2::new(1.0, 0.0));
        assert_eq!(repulsive_field(Point2::new(9.0, 9.0), &env, 2.0).unwrap(), Point2::ZERO);
        assert!(repulsive_field(Point2::new(5.0, 5.0), &env, 2.0).is_err());
    }

    #[test]
    fn equidistant_faces_pick_lowest_index() {
        let env = Environment::with_default_ceiling(
            [10.0, 10.0],
            vec![
                Building::new(Rect::new(1.0, 4.0, 4.0, 6.0), 5.0),
                Building::new(Rect::new(6.0, 4.0, 9.0, 6.0), 5.0),
            ],
            2.0,
            1.0,
        )
        .unwrap();
        let x = Point2::new(5.0, 5.0);
        for _ in 0..3 {
            assert_eq!(repulsive_field(x, &env, 2.0).unwrap(), Point2::new(1.0, 0.0));
        }
    }

    #[test]
    fn bump_is_linear() {
        assert_eq!(bump_alpha(0.0, 4.0).unwrap(), 0.0);
        assert_eq!(bump_alpha(2.0, 4.0).unwrap(), 0.5);
        assert_eq!(bump_alpha(9.0, 4.0).unwrap(), 1.0);
        assert!(bump_alpha(1.0, 0.0).is_err());
    }

    #[test]
    fn touching_agent_moves_away() {
        let env = wall_env();
        let modes = ModeGrid::new([10, 10], env.extent, Weighting::Sobolev);
        let mut mu = vec![0.0; modes.len()];
        mu[0] = 0.1;
        let mut s = ErgodicState::new(mu, 1);
        // Pull the agent toward the building: over-visit the far side.
        s.accumulate(&modes, &[Point2::new(9.0, 5.0)], 50.0);
        let x = Point2::new(6.001, 5.0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let u = avoid_control_step(&s, &modes, &env, x, 1.0, 2.0, &mut rng).unwrap();
        assert!((u.norm() - 1.0).abs() < 1e-12);
        let f = repulsive_field(x, &env, 2.0).unwrap();
        assert!(u.dot(f) > 0.0);
        let next = x + u * 0.1;
        assert!(env.nearest_building(next).unwrap().1 > 0.001);
    }

    #[test]
    fn far_agent_matches_plain_law() {
        let env = wall_env();
        let modes = ModeGrid::new([10, 10], env.extent, Weighting::Sobolev);
        let mut mu = vec![0.0; modes.len()];
        mu[0] = 0.1;
        let mut s = ErgodicState::new(mu, 1);
        s.accumulate(&modes, &[Point2::new(1.0, 2.0)], 1.0);
        let x = Point2::new(1.0, 1.0);
        let mut r1 = ChaCha8Rng::seed_from_u64(0);
        let mut r2 = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(
            avoid_control_step(&s, &modes, &env, x, 1.0, 2.0, &mut r1).unwrap(),
            control_step(&s, &modes, x, 1.0, &mut r2)
        );
    }
}
