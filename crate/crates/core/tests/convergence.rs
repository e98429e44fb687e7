use tempfile::TempDir;
use trisr_core::convergence_lab::{
    export_trajectory, read_trajectory, simulate, LossKind, NoiseMode, NoisePairing,
};
use trisr_core::losses::NoiseSchedule;

fn radius((t, p): (f64, f64)) -> f64 {
    t.hypot(p)
}

#[test]
fn standard_game_never_contracts() {
    let s = simulate(LossKind::Standard, NoiseMode::None, 0.1, 2000, (1.0, 1.0), 0).unwrap();
    for w in s.trajectory.chunks(100) {
        let (first, last) = (radius(w[0]), radius(*w.last().unwrap()));
        assert!(last >= first, "{first} -> {last}");
    }
    assert!(s.radius() >= 0.9 * s.initial_radius());
}

#[test]
fn relativistic_game_orbits_without_noise() {
    let s = simulate(LossKind::Relativistic, NoiseMode::None, 0.1, 2000, (1.0, 1.0), 0).unwrap();
    assert!(s.radius() > 0.1 * s.initial_radius());
    assert!(s.radius() < s.initial_radius());
}

#[test]
fn zero_noise_equals_noiseless_run() {
    for kind in [LossKind::Standard, LossKind::Relativistic] {
        for pairing in [NoisePairing::Independent, NoisePairing::Shared] {
            let quiet = simulate(kind, NoiseMode::None, 0.1, 300, (0.5, -0.8), 3).unwrap();
            let zero = NoiseMode::Annealed(NoiseSchedule::new(0.0, 300), pairing);
            let noisy = simulate(kind, zero, 0.1, 300, (0.5, -0.8), 3).unwrap();
            assert_eq!(quiet, noisy);
        }
    }
}

#[test]
fn seeded_runs_are_reproducible() {
    let noise = NoiseMode::Annealed(NoiseSchedule::new(1.0, 500), NoisePairing::Independent);
    let a = simulate(LossKind::Relativistic, noise, 0.1, 500, (1.0, 1.0), 7).unwrap();
    let b = simulate(LossKind::Relativistic, noise, 0.1, 500, (1.0, 1.0), 7).unwrap();
    let c = simulate(LossKind::Relativistic, noise, 0.1, 500, (1.0, 1.0), 8).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.trajectory, c.trajectory);
}

#[test]
fn annealed_shared_noise_reaches_equilibrium() {
    let noise = NoiseMode::Annealed(NoiseSchedule::new(1.0, 2000), NoisePairing::Shared);
    let s = simulate(LossKind::Relativistic, noise, 0.1, 2000, (1.0, 1.0), 0).unwrap();
    assert!(s.radius() <= 0.1 * s.initial_radius(), "{}", s.radius());
}

#[test]
fn trajectory_round_trips_through_csv() {
    let s = simulate(LossKind::Standard, NoiseMode::None, 0.05, 250, (1.0, -0.5), 0).unwrap();
    assert_eq!(s.trajectory.len(), 251);
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("traj.csv");
    export_trajectory(&s, &path).unwrap();
    assert_eq!(std::fs::read_to_string(&path).unwrap().lines().count(), 252);
    assert_eq!(read_trajectory(&path).unwrap(), s.trajectory);
    assert!(std::fs::read(path.with_extension("pgm")).unwrap().starts_with(b"P5\n256 256\n255\n"));
}

#[test]
fn invalid_settings_are_rejected() {
    assert!(simulate(LossKind::Standard, NoiseMode::None, 0.0, 10, (1.0, 1.0), 0).is_err());
    assert!(simulate(LossKind::Standard, NoiseMode::None, 0.1, 0, (1.0, 1.0), 0).is_err());
    assert!("wasserstein".parse::<LossKind>().is_err());
}
