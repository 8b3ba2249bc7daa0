#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sarplan_core::energy::{builtin_profile, Energy, RobotKind};
use sarplan_core::grid::{Cell, GridMap};
use sarplan_core::model::{RobotSpec, RpInstance};

pub const SHAPES: [(usize, usize); 6] = [(3, 3), (2, 4), (4, 2), (3, 2), (2, 2), (1, 3)];

/// Small random instance: |AB| <= 9, R <= 2, horizon <= 5, batteries that
/// are sometimes binding.
pub fn random_instance(seed: u64) -> RpInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (w, h) = SHAPES[rng.random_range(0..SHAPES.len())];
    let base = Cell::new(rng.random_range(0..w), rng.random_range(0..h));
    let grid = GridMap::new(w, h, 10.0, base).unwrap();
    let horizon = rng.random_range(1..=5);
    let robots = rng.random_range(1..=2);
    let kappa = [0.3, 0.5, 0.7, 0.9, 1.0][rng.random_range(0..5)];
    let colocated = rng.random_bool(0.5);
    let specs = (0..robots)
        .map(|id| {
            let kind = if rng.random_bool(0.5) { RobotKind::Wheeled } else { RobotKind::Quadruped };
            let profile = builtin_profile(kind);
            let start = if colocated { base } else { Cell::new(rng.random_range(0..w), rng.random_range(0..h)) };
            // 10 s epochs: wheeled exploring epoch 283.5 J, quadruped 2174.4 J.
            let explore = if kind == RobotKind::Wheeled { 283.5 } else { 2174.4 };
            let battery = if rng.random_bool(0.5) {
                profile.battery_capacity_j
            } else {
                explore * rng.random_range(0.5..4.5)
            };
            RobotSpec {
                id,
                profile,
                start,
                initial_battery: Energy::from_joules(battery),
            }
        })
        .collect();
    RpInstance::new(grid, horizon, 10.0, specs, kappa, 1.0).unwrap()
}

pub fn uniform(w: usize, h: usize, robots: usize, horizon: usize, kappa: f64, kind: RobotKind) -> RpInstance {
    let g = GridMap::new(w, h, 10.0, Cell::new(0, 0)).unwrap();
    RpInstance::uniform(g, horizon, 10.0, &builtin_profile(kind), robots, Cell::new(0, 0), kappa).unwrap()
}
