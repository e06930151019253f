//! Random-waypoint movement: pick a uniform destination and a speed, walk
//! there, repeat. No pause time.

use rand::Rng;

/// Rectangular arena, origin at (0, 0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arena {
    pub width: f64,
    pub height: f64,
}

impl Arena {
    pub fn contains(&self, p: (f64, f64)) -> bool {
        p.0 >= 0.0 && p.0 <= self.width && p.1 >= 0.0 && p.1 <= self.height
    }

    pub fn diagonal(&self) -> f64 {
        (self.width * self.width + self.height * self.height).sqrt()
    }

    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        (
            rng.gen_range(0.0..=self.width),
            rng.gen_range(0.0..=self.height),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobilityState {
    pub position: (f64, f64),
    pub waypoint: (f64, f64),
    pub speed: f64,
}

impl MobilityState {
    pub fn new<R: Rng + ?Sized>(arena: &Arena, speed_range: (f64, f64), rng: &mut R) -> Self {
        let position = arena.random_point(rng);
        let waypoint = arena.random_point(rng);
        Self {
            position,
            waypoint,
            speed: draw_speed(speed_range, rng),
        }
    }
}

fn draw_speed<R: Rng + ?Sized>(range: (f64, f64), rng: &mut R) -> f64 {
    if range.1 > range.0 {
        rng.gen_range(range.0..=range.1)
    } else {
        range.0
    }
}

fn distance(a: (f64, f64), b: (f64, f64)) -> f64 {
    let dx = a.0 - b.0;
    let dy = a.1 - b.1;
    (dx * dx + dy * dy).sqrt()
}

/// Advances one node by `dt` seconds. Arrival is exact: the node stops on
/// the waypoint and draws the next leg; any remaining fraction of `dt` is
/// not carried over.
pub fn step_mobility<R: Rng + ?Sized>(
    state: &MobilityState,
    arena: &Arena,
    speed_range: (f64, f64),
    dt: f64,
    rng: &mut R,
) -> MobilityState {
    debug_assert!(dt > 0.0);
    let dist = distance(state.position, state.waypoint);
    let reach = state.speed * dt;
    if reach >= dist && dist > 0.0 {
        return MobilityState {
            position: state.waypoint,
            waypoint: arena.random_point(rng),
            speed: draw_speed(speed_range, rng),
        };
    }
    if dist == 0.0 {
        // Already sitting on the waypoint (zero-speed nodes park here).
        return MobilityState {
            position: state.position,
            waypoint: arena.random_point(rng),
            speed: draw_speed(speed_range, rng),
        };
    }
    let f = reach / dist;
    MobilityState {
        position: (
            state.position.0 + (state.waypoint.0 - state.position.0) * f,
            state.position.1 + (state.waypoint.1 - state.position.1) * f,
        ),
        waypoint: state.waypoint,
        speed: state.speed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    const ARENA: Arena = Arena {
        width: 500.0,
        height: 500.0,
    };

    #[test]
    fn exact_arrival_lands_on_the_waypoint() {
        let state = MobilityState {
            position: (0.0, 0.0),
            waypoint: (3.0, 4.0),
            speed: 5.0,
        };
        let next = step_mobility(&state, &ARENA, (2.0, 15.0), 1.0, &mut rng(0));
        assert_eq!(next.position, (3.0, 4.0));
        // A fresh leg was drawn.
        assert_ne!(next.waypoint, (3.0, 4.0));
    }

    #[test]
    fn zero_speed_never_moves() {
        let mut state = MobilityState {
            position: (10.0, 10.0),
            waypoint: (400.0, 400.0),
            speed: 0.0,
        };
        let mut r = rng(1);
        for _ in 0..100 {
            state = step_mobility(&state, &ARENA, (0.0, 0.0), 1.0, &mut r);
        }
        assert_eq!(state.position, (10.0, 10.0));
    }

    #[test]
    fn positions_stay_inside_the_arena() {
        let mut r = rng(2);
        let mut state = MobilityState::new(&ARENA, (2.0, 15.0), &mut r);
        for _ in 0..10_000 {
            state = step_mobility(&state, &ARENA, (2.0, 15.0), 1.0, &mut r);
            assert!(ARENA.contains(state.position), "{:?}", state.position);
        }
    }

    #[test]
    fn partial_step_moves_along_the_segment() {
        let state = MobilityState {
            position: (0.0, 0.0),
            waypoint: (10.0, 0.0),
            speed: 4.0,
        };
        let next = step_mobility(&state, &ARENA, (4.0, 4.0), 1.0, &mut rng(3));
        assert!((next.position.0 - 4.0).abs() < 1e-12);
        assert_eq!(next.waypoint, (10.0, 0.0));
    }
}
