//! WebAssembly bindings for the static demo page in `www/`. Each export
//! returns a JSON string; the plain `*_json` functions are the same
//! operations for native callers and tests.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use robust_alloc::equilibrium::{iterate_with, StartPoint};
use robust_alloc::sim::{generate_game, DgpSpec, NetworkSpec, Selection, UniformRange};
use robust_alloc::welfare::engagement_bounds;
use robust_alloc::{
    greedy_allocate, random_allocate, AllocConfig, Allocation, Covariates, Game, Network, Objective,
    ShockDistribution, SolverConfig, Theta,
};

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("plain data serializes")
}

#[derive(Serialize)]
struct Trajectories {
    least: Vec<f64>,
    greatest: Vec<f64>,
    /// `Ω(s) - s` on a grid over `[0, 1]`, for drawing the map.
    grid: Vec<[f64; 2]>,
}

fn symmetric_pair(alpha: f64, beta: f64) -> robust_alloc::Result<Game> {
    let mut theta = Theta::zeros(1);
    theta.theta0 = alpha;
    theta.theta5 = beta;
    Game::new(
        Network::from_edges(2, &[(0, 1)], false)?,
        Covariates::new(2, 1, vec![0.0, 0.0])?,
        theta,
        ShockDistribution::Logistic,
    )
}

/// Iterates of unit 0 from the bottom and the top of the lattice in the
/// symmetric two-unit game with intercept `alpha` and interaction `beta`.
pub fn two_unit_trajectories_json(alpha: f64, beta: f64) -> Result<String, String> {
    if beta < 0.0 {
        return Err("interaction must be nonnegative".into());
    }
    let game = symmetric_pair(alpha, beta).map_err(|e| e.to_string())?;
    let alloc = Allocation::zeros(2, 0);
    let payoffs = game.payoffs(&alloc);
    let cfg = SolverConfig::default();
    let run = |start: f64, dir| {
        let mut path = vec![start];
        iterate_with(&payoffs, game.shock(), vec![start; 2], dir, &cfg, |_, _, next| path.push(next[0]))
            .map(|_| path)
            .map_err(|e| e.to_string())
    };
    let grid = (0..=200)
        .map(|k| {
            let s = k as f64 / 200.0;
            [s, game.shock().cdf(alpha + beta * s) - s]
        })
        .collect();
    Ok(to_json(&Trajectories {
        least: run(0.0, StartPoint::FromZeros)?,
        greatest: run(1.0, StartPoint::FromOnes)?,
        grid,
    }))
}

fn demo_spec(n: usize, theta0: f64, theta5: f64, seed: u64) -> DgpSpec {
    DgpSpec {
        n,
        network: NetworkSpec::ErdosRenyi { p: 3.0 / n.max(4) as f64 },
        covariates: vec![UniformRange { low: 0.0, high: 1.0 }],
        theta: Theta {
            theta0,
            theta1: 1.0,
            theta2: vec![0.5],
            theta3: vec![0.0],
            theta4: 0.5,
            theta5,
            theta6: 0.0,
        },
        shock: ShockDistribution::Logistic,
        selection: Selection::Least,
        treatment_prob: 0.0,
        seed,
        forbid_isolated: false,
    }
}

#[derive(Serialize)]
struct SweepPoint {
    theta5: f64,
    lower: f64,
    upper: f64,
}

/// Engagement bounds of the untreated game as the interaction weight runs
/// from 0 to `theta5_max`.
pub fn welfare_sweep_json(n: usize, theta0: f64, theta5_max: f64, steps: usize, seed: u64) -> Result<String, String> {
    if !(1..=400).contains(&n) || steps == 0 || theta5_max < 0.0 {
        return Err("need 1 ≤ n ≤ 400, steps ≥ 1 and a nonnegative range".into());
    }
    let base = generate_game(&demo_spec(n, theta0, 0.0, seed)).map_err(|e| e.to_string())?;
    let alloc = Allocation::zeros(n, 0);
    let points = (0..=steps)
        .map(|k| {
            let theta5 = theta5_max * k as f64 / steps as f64;
            let mut theta = base.theta().clone();
            theta.theta5 = theta5;
            let game = base.with_theta(theta)?;
            let b = engagement_bounds(&game, &alloc, &SolverConfig::default())?;
            Ok(SweepPoint {
                theta5,
                lower: b.lower,
                upper: b.upper,
            })
        })
        .collect::<robust_alloc::Result<Vec<_>>>()
        .map_err(|e| e.to_string())?;
    Ok(to_json(&points))
}

#[derive(Serialize)]
struct Targeting {
    n: usize,
    edges: Vec<(usize, usize)>,
    treated: Vec<usize>,
    /// Least-equilibrium probabilities under the greedy allocation.
    least: Vec<f64>,
    greedy: [f64; 2],
    random: [f64; 2],
}

/// Greedy allocation on a random network, next to the average of random
/// allocations with the same capacity.
pub fn greedy_demo_json(n: usize, kappa: usize, theta0: f64, theta5: f64, seed: u64) -> Result<String, String> {
    if !(2..=60).contains(&n) || kappa > n || theta5 < 0.0 {
        return Err("need 2 ≤ n ≤ 60, κ ≤ n and a nonnegative interaction".into());
    }
    let run = || -> robust_alloc::Result<Targeting> {
        let game = generate_game(&demo_spec(n, theta0, theta5, seed))?;
        let cfg = AllocConfig::default();
        let greedy = greedy_allocate(&game, kappa, Objective::Engagement, &cfg)?;
        let random = random_allocate(&game, kappa, Objective::Engagement, seed, 50, &cfg)?;
        let least = robust_alloc::solve_least(&game, &greedy.allocation, &cfg.solver)?.profile.into_inner();
        Ok(Targeting {
            n,
            edges: game.network().edges(),
            treated: greedy.allocation.treated(),
            least,
            greedy: [greedy.welfare_lower, greedy.welfare_upper],
            random: [random.mean_lower, random.mean_upper],
        })
    };
    run().map(|t| to_json(&t)).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn two_unit_trajectories(alpha: f64, beta: f64) -> Result<String, JsValue> {
    two_unit_trajectories_json(alpha, beta).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn welfare_sweep(n: usize, theta0: f64, theta5_max: f64, steps: usize, seed: u32) -> Result<String, JsValue> {
    welfare_sweep_json(n, theta0, theta5_max, steps, u64::from(seed)).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn greedy_demo(n: usize, kappa: usize, theta0: f64, theta5: f64, seed: u32) -> Result<String, JsValue> {
    greedy_demo_json(n, kappa, theta0, theta5, u64::from(seed)).map_err(|e| JsValue::from_str(&e))
}
