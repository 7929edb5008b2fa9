use robust_alloc_web::{greedy_demo_json, two_unit_trajectories_json, welfare_sweep_json};
use serde_json::Value;

fn parse(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn trajectories_approach_the_two_extremes() {
    let v = parse(two_unit_trajectories_json(-3.0, 6.0).unwrap());
    let least: Vec<f64> = serde_json::from_value(v["least"].clone()).unwrap();
    let greatest: Vec<f64> = serde_json::from_value(v["greatest"].clone()).unwrap();
    assert_eq!(least[0], 0.0);
    assert!(least.windows(2).all(|w| w[1] >= w[0]));
    assert!(greatest.windows(2).all(|w| w[1] <= w[0]));
    assert!((least.last().unwrap() - 0.0707202).abs() < 1e-6);
    assert!((greatest.last().unwrap() - 0.9292798).abs() < 1e-6);
    assert!(two_unit_trajectories_json(0.0, -1.0).is_err());
}

#[test]
fn sweep_starts_with_a_point_interval() {
    let v = parse(welfare_sweep_json(30, -2.0, 8.0, 16, 1).unwrap());
    let pts = v.as_array().unwrap();
    assert_eq!(pts.len(), 17);
    assert_eq!(pts[0]["lower"], pts[0]["upper"]);
    for p in pts {
        assert!(p["lower"].as_f64().unwrap() <= p["upper"].as_f64().unwrap() + 1e-12);
    }
    let lowers: Vec<f64> = pts.iter().map(|p| p["lower"].as_f64().unwrap()).collect();
    assert!(lowers.windows(2).all(|w| w[1] >= w[0] - 1e-12));
}

#[test]
fn greedy_beats_random_on_average() {
    let v = parse(greedy_demo_json(20, 3, -1.5, 2.0, 4).unwrap());
    assert_eq!(v["treated"].as_array().unwrap().len(), 3);
    assert!(v["greedy"][0].as_f64().unwrap() >= v["random"][0].as_f64().unwrap());
    assert_eq!(v["least"].as_array().unwrap().len(), 20);
    assert!(greedy_demo_json(100, 3, 0.0, 1.0, 0).is_err());
}
