use std::f64::consts::PI;

use rydsim::atomic::*;

const MHZ: f64 = 2.0 * PI * 1e6;
const GHZ: f64 = 2.0 * PI * 1e9;

fn p1_level(a: f64, b: f64, f: f64) -> HyperfineModel {
    HyperfineModel {
        a_hfs: a,
        b_hfs: b,
        i: SR87_NUCLEAR_SPIN,
        j: 1.0,
        f,
        m_f: 0.5,
        g_j: 1.0,
        mu_nuclear: SR87_NUCLEAR_MOMENT,
        b_field: 0.0,
    }
}

#[test]
fn scaled_intermediate_constants() {
    let (a, b) = scale_hyperfine_constants(-3.4 * MHZ, 39.0 * MHZ, 5.0, 6.0).unwrap();
    assert_eq!(((a / MHZ) * 10.0).round() / 10.0, -2.0);
    assert_eq!((b / MHZ).round(), 23.0);
    let (a1, b1) = scale_hyperfine_constants(-3.4, 39.0, 5.0, 5.0).unwrap();
    assert_eq!((a1, b1), (-3.4, 39.0));
    let (a2, b2) = scale_hyperfine_constants(8.0, 16.0, 3.0, 6.0).unwrap();
    assert!((a2 - 1.0).abs() < 1e-15 && (b2 - 2.0).abs() < 1e-15);
    assert!(scale_hyperfine_constants(1.0, 1.0, 0.0, 6.0).is_err());
}

#[test]
fn hyperfine_special_cases() {
    let singlet = HyperfineModel { j: 0.0, f: 4.5, ..p1_level(MHZ, MHZ, 4.5) };
    assert_eq!(hyperfine_shift(&singlet).unwrap(), 0.0);
    // The ³S₁ triplet carries A = A′/2 of the single-electron coupling, so
    // F = I sits at −A′/2.
    let a_prime = -GHZ;
    let e = hyperfine_shift(&p1_level(a_prime / 2.0, 0.0, 4.5)).unwrap();
    assert!((e - (-a_prime / 2.0)).abs() < 1e-6);
    let a = -3.4 * MHZ;
    assert!(hyperfine_shift(&p1_level(a, 0.0, 2.5)).is_err());
    assert!(hyperfine_shift(&HyperfineModel { m_f: 7.5, ..p1_level(a, 0.0, 4.5) }).is_err());
}

#[test]
fn three_level_spread_matches_formula() {
    let (a, b) = (-3.4 * MHZ, 39.0 * MHZ);
    let (i, j) = (4.5f64, 1.0f64);
    let direct = |f: f64| {
        let k = (f * (f + 1.0) - i * (i + 1.0) - j * (j + 1.0)) / 2.0;
        a * k
            + b * (1.5 * k * (2.0 * k + 1.0) - i * (i + 1.0) * j * (j + 1.0)) / (2.0 * i * j * (2.0 * i - 1.0) * (2.0 * j - 1.0))
    };
    for f in [3.5, 4.5, 5.5] {
        let e = hyperfine_shift(&p1_level(a, b, f)).unwrap();
        assert!((e - direct(f)).abs() < 1e-6 * MHZ);
    }
}

#[test]
fn interval_rule() {
    let a = 2.3 * MHZ;
    for (i, j) in [(4.5, 1.0), (4.5, 2.0), (1.5, 0.5), (3.0, 1.0)] {
        let m = HyperfineModel { i, j, ..p1_level(a, 0.0, i) };
        let mut f = (i - j).abs() + 1.0;
        while f <= i + j + 1e-9 {
            let hi = hyperfine_shift(&m.sublevel(f, f)).unwrap();
            let lo = hyperfine_shift(&m.sublevel(f - 1.0, f - 1.0)).unwrap();
            assert!((hi - lo - a * f).abs() < 1e-9 * MHZ, "I={i} J={j} F={f}");
            f += 1.0;
        }
    }
}

#[test]
fn zeeman_properties() {
    let m = sr87_intermediate(0.0).unwrap();
    assert_eq!(zeeman_level(&m).unwrap(), hyperfine_shift(&m).unwrap());
    let m = sr87_intermediate(7.0 * TESLA_PER_GAUSS).unwrap();
    for (f, mf) in [(4.5, 0.5), (5.5, 3.5), (3.5, 2.5)] {
        let up = m.sublevel(f, mf);
        let down = m.sublevel(f, -mf);
        let e0 = hyperfine_shift(&up).unwrap();
        let (wu, wd) = (zeeman_level(&up).unwrap(), zeeman_level(&down).unwrap());
        assert!(((wu - e0) + (wd - e0)).abs() < 1e-9 * MHZ);
    }
    assert!(!outside_low_field(&m));
    assert!(outside_low_field(&HyperfineModel { b_field: 12.0 * TESLA_PER_GAUSS, ..m }));
}

#[test]
fn intermediate_spread_below_window() {
    for b in [0.0, 1.0, 5.0, 10.0] {
        let lv = sublevels(&sr87_intermediate(b * TESLA_PER_GAUSS).unwrap()).unwrap();
        assert_eq!(lv.len(), 8 + 10 + 12);
        let hi = lv.iter().map(|x| x.2).fold(f64::MIN, f64::max);
        let lo = lv.iter().map(|x| x.2).fold(f64::MAX, f64::min);
        assert!(hi - lo <= 60.0 * MHZ, "B={b}: {} MHz", (hi - lo) / MHZ);
    }
}

#[test]
fn rydberg_splitting() {
    let d = zeeman_splitting_rydberg(1.0, 1.0 * TESLA_PER_GAUSS);
    assert!(d / MHZ > 1.0 && d / MHZ < 3.0);
    assert_eq!(zeeman_splitting_rydberg(1.0, 0.0), 0.0);
    assert!((zeeman_splitting_rydberg(1.2, 3e-4) - 3.0 * zeeman_splitting_rydberg(1.2, 1e-4)).abs() < 1e-6);
    assert!((clock_transition_zeeman_detuning(1.0, 5.0) / (2.0 * PI) - 550.0).abs() < 1e-9);
}

#[test]
fn decoupled_manifold() {
    let m = RydbergManifoldModel { n: 70, a_prime: 0.0, overlap: 0.98, delta_st: -2.0 * GHZ, i: 4.5 };
    let s = rydberg_s_manifold(&m).unwrap();
    let mut e: Vec<f64> = s.levels.iter().map(|l| l.energy).collect();
    e.sort_by(f64::total_cmp);
    assert_eq!(e, vec![-2.0 * GHZ, -2.0 * GHZ, -2.0 * GHZ, 0.0]);
    assert!(s.levels.iter().all(|l| l.singlet_fraction == 0.0 || l.singlet_fraction == 1.0));
}

#[test]
fn calibrated_n70_manifold() {
    let m = sr87_n70_manifold().unwrap();
    assert!((m.a_prime / GHZ + 1.0).abs() < 0.05, "A' {}", m.a_prime / GHZ);
    let s = rydberg_s_manifold(&m).unwrap();
    assert!((s.separation / GHZ - 5.28).abs() <= 0.05 * 5.28);
    assert!((s.gap_above_lower_triplet / GHZ - 1.27).abs() <= 0.05 * 1.27, "gap {}", s.gap_above_lower_triplet / GHZ);
    assert!((s.upper().singlet_fraction - 0.67).abs() <= 0.02);
    assert!((s.lower().singlet_fraction - 0.33).abs() <= 0.02);
    // Trace of the mixed block and complementary fractions.
    let trace = m.delta_st - m.a_prime / 2.0;
    assert!((s.upper().energy + s.lower().energy - trace).abs() <= 1e-15 * trace.abs().max(GHZ) * 4.0);
    assert!((s.upper().singlet_fraction + s.lower().singlet_fraction - 1.0).abs() < 1e-12);
    assert!(s.upper().label.starts_with("70^1S0"));
}

#[test]
fn manifold_matches_full_diagonalization() {
    for (a, ov, d) in [(-1.0, 0.98, -2.3), (-0.7, 0.9, 1.5), (1.2, 1.0, -4.0)] {
        let m = RydbergManifoldModel { n: 70, a_prime: a * GHZ, overlap: ov, delta_st: d * GHZ, i: 4.5 };
        let s = rydberg_s_manifold(&m).unwrap();
        let full = s_manifold_brute_force(&m).unwrap();
        assert_eq!(full.len(), 40);
        // F=I occurs 10 times, F=I+1 12 times, F=I−1 8 times.
        for (level, mult) in s.levels.iter().zip([10, 10, 12, 8]) {
            let hits: Vec<_> = full.iter().filter(|(e, _)| (e - level.energy).abs() < 1e-9 * GHZ).collect();
            assert_eq!(hits.len(), mult, "{} at {}", level.label, level.energy / GHZ);
            for (_, w) in hits {
                assert!((w - level.singlet_fraction).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn manifold_rejects_bad_overlap() {
    let m = RydbergManifoldModel { n: 70, a_prime: -GHZ, overlap: 1.2, delta_st: 0.0, i: 4.5 };
    assert!(rydberg_s_manifold(&m).is_err());
    assert!(calibrate_s_manifold(5.0, 1.2, 0.98, 4.5).is_err());
}

#[test]
fn csv_outputs() {
    let m = sr87_intermediate(0.0).unwrap();
    let csv = level_diagram_csv("5s6p1P1", &m, &[0.0, 10.0]).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("state_label,F,m_F,B_gauss,energy_MHz"));
    assert_eq!(lines.count(), 60);
    let s = rydberg_s_manifold(&sr87_n70_manifold().unwrap()).unwrap();
    let csv = manifold_csv(&s);
    assert_eq!(csv.lines().count(), 5);
    for row in csv.lines().skip(1) {
        assert_eq!(row.split(',').count(), 5);
    }
}
