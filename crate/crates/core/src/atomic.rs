//! Hyperfine and Zeeman structure of ⁸⁷Sr levels used by the protocols.
//!
//! Energies are angular frequencies (rad/s) and fields are in tesla unless a
//! name says otherwise.

use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};

/// μ_B/h in Hz/T.
pub const BOHR_MAGNETON_HZ_PER_T: f64 = 13.996_244_9e9;
/// μ_N/h in Hz/T.
pub const NUCLEAR_MAGNETON_HZ_PER_T: f64 = 7.622_593_2e6;
/// Magnetic moment of ⁸⁷Sr in nuclear magnetons.
pub const SR87_NUCLEAR_MOMENT: f64 = -1.0924;
pub const SR87_NUCLEAR_SPIN: f64 = 4.5;
/// Linear Zeeman shift of the ¹S₀–³P₀ line per unit m_F, Hz/G.
pub const CLOCK_ZEEMAN_HZ_PER_GAUSS: f64 = 110.0;
pub const TESLA_PER_GAUSS: f64 = 1e-4;

fn two(x: f64) -> Option<i64> {
    let t = 2.0 * x;
    ((t - t.round()).abs() < 1e-9).then_some(t.round() as i64)
}

fn is_half_integer(x: f64) -> bool {
    two(x).is_some()
}

/// One hyperfine sublevel |F, m_F⟩ of a fine-structure level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperfineModel {
    pub a_hfs: f64,
    pub b_hfs: f64,
    pub i: f64,
    pub j: f64,
    pub f: f64,
    pub m_f: f64,
    pub g_j: f64,
    /// Nuclear magnetic moment in units of μ_N.
    pub mu_nuclear: f64,
    pub b_field: f64,
}

impl HyperfineModel {
    pub fn validate(&self) -> Result<()> {
        ensure([self.i, self.j, self.f, self.m_f].into_iter().all(is_half_integer), || {
            "angular momenta must be integers or half-integers".into()
        })?;
        ensure(self.i >= 0.0 && self.j >= 0.0, || "I and J must be non-negative".into())?;
        let (i2, j2, f2) = (two(self.i).unwrap(), two(self.j).unwrap(), two(self.f).unwrap());
        ensure((i2 - j2).abs() <= f2 && f2 <= i2 + j2 && (i2 + j2 - f2) % 2 == 0, || {
            format!("F = {} not allowed for I = {}, J = {}", self.f, self.i, self.j)
        })?;
        let m2 = two(self.m_f).unwrap();
        ensure(m2.abs() <= f2 && (f2 - m2) % 2 == 0, || format!("m_F = {} not allowed for F = {}", self.m_f, self.f))?;
        ensure([self.a_hfs, self.b_hfs, self.g_j, self.mu_nuclear, self.b_field].iter().all(|x| x.is_finite()), || {
            "hyperfine parameters must be finite".into()
        })
    }

    /// K = [F(F+1) − I(I+1) − J(J+1)]/2.
    pub fn k(&self) -> f64 {
        let (i, j, f) = (self.i, self.j, self.f);
        (f * (f + 1.0) - i * (i + 1.0) - j * (j + 1.0)) / 2.0
    }

    /// Hyperfine g-factor including the nuclear moment, in units of μ_B.
    pub fn g_f(&self) -> f64 {
        let (i, j, f) = (self.i, self.j, self.f);
        if f == 0.0 {
            return 0.0;
        }
        let ff = 2.0 * f * (f + 1.0);
        let electronic = self.g_j * (f * (f + 1.0) - i * (i + 1.0) + j * (j + 1.0)) / ff;
        let nuclear = if i > 0.0 {
            let g_i = self.mu_nuclear / i * NUCLEAR_MAGNETON_HZ_PER_T / BOHR_MAGNETON_HZ_PER_T;
            g_i * (f * (f + 1.0) + i * (i + 1.0) - j * (j + 1.0)) / ff
        } else {
            0.0
        };
        electronic - nuclear
    }

    /// Same level with a different (F, m_F).
    pub fn sublevel(&self, f: f64, m_f: f64) -> Self {
        HyperfineModel { f, m_f, ..*self }
    }
}

/// Magnetic-dipole plus electric-quadrupole hyperfine shift.
pub fn hyperfine_shift(m: &HyperfineModel) -> Result<f64> {
    m.validate()?;
    let k = m.k();
    let mut e = m.a_hfs * k;
    if m.i >= 1.0 && m.j >= 1.0 {
        let (i, j) = (m.i, m.j);
        let num = 1.5 * k * (2.0 * k + 1.0) - i * j * (i + 1.0) * (j + 1.0);
        let den = 2.0 * i * j * (2.0 * i - 1.0) * (2.0 * j - 1.0);
        e += m.b_hfs * num / den;
    }
    Ok(e)
}

/// Scales (A, B) of a level with fixed (l, j) by (n*_ref / n*_new)³.
pub fn scale_hyperfine_constants(a_ref: f64, b_ref: f64, nstar_ref: f64, nstar_new: f64) -> Result<(f64, f64)> {
    ensure(nstar_ref > 0.0 && nstar_new > 0.0, || "effective quantum numbers must be positive".into())?;
    let s = (nstar_ref / nstar_new).powi(3);
    Ok((a_ref * s, b_ref * s))
}

/// W = E_hfs + g_F m_F μ_B B/ℏ, valid while F stays a good quantum number.
pub fn zeeman_level(m: &HyperfineModel) -> Result<f64> {
    let e = hyperfine_shift(m)?;
    let mu_b = 2.0 * PI * BOHR_MAGNETON_HZ_PER_T;
    Ok(e + m.g_f() * m.m_f * mu_b * m.b_field)
}

/// The linear-Zeeman treatment is used beyond roughly 10 G.
pub fn outside_low_field(m: &HyperfineModel) -> bool {
    m.b_field.abs() > 10.0 * TESLA_PER_GAUSS
}

/// Δ = g_eff μ_B B/ℏ per unit m_F.
pub fn zeeman_splitting_rydberg(g_eff: f64, b_field: f64) -> f64 {
    g_eff * 2.0 * PI * BOHR_MAGNETON_HZ_PER_T * b_field
}

/// Ground–clock line shift at sublevel m_F, rad/s.
pub fn clock_transition_zeeman_detuning(m_f: f64, b_gauss: f64) -> f64 {
    2.0 * PI * CLOCK_ZEEMAN_HZ_PER_GAUSS * m_f * b_gauss
}

/// All (F, m_F) sublevels of `m` and their energies.
pub fn sublevels(m: &HyperfineModel) -> Result<Vec<(f64, f64, f64)>> {
    let mut out = vec![];
    let mut f = (m.i - m.j).abs();
    while f <= m.i + m.j + 1e-9 {
        let mut mf = -f;
        while mf <= f + 1e-9 {
            out.push((f, mf, zeeman_level(&m.sublevel(f, mf))?));
            mf += 1.0;
        }
        f += 1.0;
    }
    Ok(out)
}

/// The (5s6p)¹P₁ intermediate level of ⁸⁷Sr with constants scaled from
/// (5s5p)¹P₁.
pub fn sr87_intermediate(b_field: f64) -> Result<HyperfineModel> {
    let (a, b) = scale_hyperfine_constants(2.0 * PI * -3.4e6, 2.0 * PI * 39e6, 5.0, 6.0)?;
    Ok(HyperfineModel {
        a_hfs: a,
        b_hfs: b,
        i: SR87_NUCLEAR_SPIN,
        j: 1.0,
        f: SR87_NUCLEAR_SPIN,
        m_f: 0.5,
        g_j: 1.0,
        mu_nuclear: SR87_NUCLEAR_MOMENT,
        b_field,
    })
}

/// ns Rydberg states with hyperfine singlet-triplet mixing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RydbergManifoldModel {
    pub n: u32,
    pub a_prime: f64,
    /// Radial overlap of the singlet and triplet orbitals.
    pub overlap: f64,
    /// Unperturbed ³S₁ − ¹S₀ splitting.
    pub delta_st: f64,
    pub i: f64,
}

impl RydbergManifoldModel {
    pub fn validate(&self) -> Result<()> {
        ensure(self.overlap.abs() <= 1.0, || format!("|overlap| = {} exceeds 1", self.overlap.abs()))?;
        ensure(self.i > 0.0 && is_half_integer(self.i), || "nuclear spin must be a positive half-integer".into())?;
        ensure(self.a_prime.is_finite() && self.delta_st.is_finite(), || "manifold parameters must be finite".into())
    }

    fn coupling(&self) -> f64 {
        self.a_prime / 2.0 * (self.i * (self.i + 1.0)).sqrt() * self.overlap
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifoldLevel {
    pub label: String,
    pub f: f64,
    pub energy: f64,
    pub singlet_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SManifold {
    /// Mixed upper (singlet-like), mixed lower, ³S₁ F=I+1, ³S₁ F=I−1.
    pub levels: Vec<ManifoldLevel>,
    /// Distance between the two mixed F=I states.
    pub separation: f64,
    /// Upper mixed state above ³S₁ F=I−1.
    pub gap_above_lower_triplet: f64,
}

impl SManifold {
    pub fn upper(&self) -> &ManifoldLevel {
        &self.levels[0]
    }

    pub fn lower(&self) -> &ManifoldLevel {
        &self.levels[1]
    }
}

/// Energies relative to the unperturbed ¹S₀ level.
pub fn rydberg_s_manifold(m: &RydbergManifoldModel) -> Result<SManifold> {
    m.validate()?;
    let b = m.coupling();
    let d = m.delta_st - m.a_prime / 2.0;
    let s = (d * d + 4.0 * b * b).sqrt();
    let mean = d / 2.0;
    let (up, lo) = (mean + s / 2.0, mean - s / 2.0);
    // Singlet weight of the upper eigenvector of [[0, b], [b, d]].
    let f_up = if s == 0.0 { 1.0 } else { 0.5 * (1.0 - d / s) };
    let plus = m.delta_st + m.a_prime * m.i / 2.0;
    let minus = m.delta_st - m.a_prime * (m.i + 1.0) / 2.0;
    let i = m.i;
    let (lab_up, lab_lo) = if f_up >= 0.5 { ("1S0", "3S1") } else { ("3S1", "1S0") };
    let levels = vec![
        ManifoldLevel { label: format!("{}^{lab_up}_F=I", m.n), f: i, energy: up, singlet_fraction: f_up },
        ManifoldLevel { label: format!("{}^{lab_lo}_F=I", m.n), f: i, energy: lo, singlet_fraction: 1.0 - f_up },
        ManifoldLevel { label: format!("{}^3S1_F=I+1", m.n), f: i + 1.0, energy: plus, singlet_fraction: 0.0 },
        ManifoldLevel { label: format!("{}^3S1_F=I-1", m.n), f: i - 1.0, energy: minus, singlet_fraction: 0.0 },
    ];
    Ok(SManifold { levels, separation: s, gap_above_lower_triplet: up - minus })
}

/// (A′, Δ_ST) reproducing a given mixed-state separation and singlet
/// fraction of the upper mixed state, with A′ < 0.
pub fn calibrate_s_manifold(separation: f64, upper_singlet_fraction: f64, overlap: f64, i: f64) -> Result<(f64, f64)> {
    ensure(separation > 0.0, || "separation must be positive".into())?;
    ensure(upper_singlet_fraction > 0.0 && upper_singlet_fraction < 1.0, || "fraction must lie in (0, 1)".into())?;
    ensure(overlap != 0.0 && overlap.abs() <= 1.0, || "overlap must be in (0, 1]".into())?;
    let d = separation * (1.0 - 2.0 * upper_singlet_fraction);
    let b = (separation * separation - d * d).sqrt() / 2.0;
    let a_prime = -2.0 * b / ((i * (i + 1.0)).sqrt() * overlap.abs());
    Ok((a_prime, d + a_prime / 2.0))
}

/// Calibration fixture at n = 70: 5.28 GHz separation, 67 % singlet,
/// overlap 0.98.
pub fn sr87_n70_manifold() -> Result<RydbergManifoldModel> {
    let (a_prime, delta_st) = calibrate_s_manifold(2.0 * PI * 5.28e9, 0.67, 0.98, SR87_NUCLEAR_SPIN)?;
    Ok(RydbergManifoldModel { n: 70, a_prime, overlap: 0.98, delta_st, i: SR87_NUCLEAR_SPIN })
}

/// Angular momentum matrices (Jz, J+) for spin `j` in the basis m = j, j−1, …
fn spin_ops(j: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let d = (2.0 * j).round() as usize + 1;
    let m = |k: usize| j - k as f64;
    let jz = DMatrix::from_fn(d, d, |a, b| if a == b { m(a) } else { 0.0 });
    // ⟨m+1|J+|m⟩ = √(j(j+1) − m(m+1)); row a has m(a) = m(b) + 1.
    let jp = DMatrix::from_fn(d, d, |a, b| if b == a + 1 { (j * (j + 1.0) - m(b) * (m(b) + 1.0)).sqrt() } else { 0.0 });
    (jz, jp)
}

/// Eigenvalues (ascending) and singlet weights of the full two-electron
/// (s, s) ⊗ I space, H = A′ I·s₁ restricted by the overlap between the
/// singlet and triplet blocks, plus Δ_ST on the triplet.
pub fn s_manifold_brute_force(m: &RydbergManifoldModel) -> Result<Vec<(f64, f64)>> {
    m.validate()?;
    let (sz, sp) = spin_ops(0.5);
    let (iz, ip) = spin_ops(m.i);
    let e2 = DMatrix::<f64>::identity(2, 2);
    let ni = iz.nrows();
    let ei = DMatrix::<f64>::identity(ni, ni);
    // Electron 1 operators on (e1 ⊗ e2 ⊗ I).
    let s1 = |op: &DMatrix<f64>| op.kronecker(&e2).kronecker(&ei);
    let nuc = |op: &DMatrix<f64>| e2.kronecker(&e2).kronecker(op);
    let sm = sp.transpose();
    let im = ip.transpose();
    let ids = s1(&sz) * nuc(&iz) + (s1(&sp) * nuc(&im) + s1(&sm) * nuc(&ip)) * 0.5;
    let h_hf = ids * m.a_prime;

    // Singlet projector on the two-electron spin space, basis ↑↑, ↑↓, ↓↑, ↓↓.
    let mut ps2 = DMatrix::<f64>::zeros(4, 4);
    for (a, b, v) in [(1, 1, 0.5), (2, 2, 0.5), (1, 2, -0.5), (2, 1, -0.5)] {
        ps2[(a, b)] = v;
    }
    let ps = ps2.kronecker(&ei);
    let pt = DMatrix::<f64>::identity(4 * ni, 4 * ni) - &ps;
    let cross = &ps * &h_hf * &pt + &pt * &h_hf * &ps;
    let h = &ps * &h_hf * &ps + &pt * &h_hf * &pt + cross * m.overlap + &pt * m.delta_st;
    let eig = SymmetricEigen::new(h);
    let mut out: Vec<(f64, f64)> = (0..eig.eigenvalues.len())
        .map(|k| {
            let v = eig.eigenvectors.column(k);
            (eig.eigenvalues[k], (&ps * v).norm_squared())
        })
        .collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(out)
}

fn mhz(w: f64) -> f64 {
    w / (2.0 * PI * 1e6)
}

/// CSV rows `state_label,F,m_F,B_gauss,energy_MHz` for every sublevel of
/// `m` at each field.
pub fn level_diagram_csv(label: &str, m: &HyperfineModel, fields_gauss: &[f64]) -> Result<String> {
    let mut out = String::from("state_label,F,m_F,B_gauss,energy_MHz\n");
    for &b in fields_gauss {
        let at = HyperfineModel { b_field: b * TESLA_PER_GAUSS, ..*m };
        for (f, mf, w) in sublevels(&at)? {
            writeln!(out, "{label},{f},{mf},{b},{:.9}", mhz(w)).expect("writing to a String cannot fail");
        }
    }
    Ok(out)
}

/// CSV rows of the s-manifold levels at zero field.
pub fn manifold_csv(man: &SManifold) -> String {
    let mut out = String::from("state_label,F,m_F,B_gauss,energy_MHz\n");
    for l in &man.levels {
        writeln!(out, "{},{},,0,{:.6}", l.label, l.f, mhz(l.energy)).expect("writing to a String cannot fail");
    }
    out
}
