use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest joint basis accepted by tensor products.
pub const MAX_LEVELS: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Atom {
    Control,
    Target,
}

/// Electronic part of a level label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Electronic {
    /// `g`, ground ¹S₀.
    Ground,
    /// `c`, clock ³P₀.
    Clock,
    /// `r`, Rydberg level reached from the ground state.
    Rydberg,
    /// `R`, Rydberg level reached from the clock state.
    ClockRydberg,
    /// `p`, auxiliary level used for phase compensation from the ground state.
    Aux,
    /// `P`, auxiliary level used for phase compensation from the clock state.
    ClockAux,
}

impl Electronic {
    pub fn tag(self) -> char {
        match self {
            Electronic::Ground => 'g',
            Electronic::Clock => 'c',
            Electronic::Rydberg => 'r',
            Electronic::ClockRydberg => 'R',
            Electronic::Aux => 'p',
            Electronic::ClockAux => 'P',
        }
    }

    pub fn from_tag(c: char) -> Option<Self> {
        Some(match c {
            'g' => Electronic::Ground,
            'c' => Electronic::Clock,
            'r' => Electronic::Rydberg,
            'R' => Electronic::ClockRydberg,
            'p' => Electronic::Aux,
            'P' => Electronic::ClockAux,
            _ => return None,
        })
    }

    pub fn is_rydberg(self) -> bool {
        matches!(self, Electronic::Rydberg | Electronic::ClockRydberg)
    }
}

/// Single-atom level: electronic tag times nuclear-spin qubit state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Level {
    pub electronic: Electronic,
    pub nuclear: u8,
}

impl Level {
    pub const fn new(electronic: Electronic, nuclear: u8) -> Self {
        Level { electronic, nuclear }
    }
    pub const fn g(n: u8) -> Self {
        Level::new(Electronic::Ground, n)
    }
    pub const fn c(n: u8) -> Self {
        Level::new(Electronic::Clock, n)
    }
    pub const fn r(n: u8) -> Self {
        Level::new(Electronic::Rydberg, n)
    }
    pub const fn big_r(n: u8) -> Self {
        Level::new(Electronic::ClockRydberg, n)
    }
    pub const fn p(n: u8) -> Self {
        Level::new(Electronic::Aux, n)
    }
    pub const fn big_p(n: u8) -> Self {
        Level::new(Electronic::ClockAux, n)
    }

    /// Computational level for electronic bit `e` and nuclear bit `n`.
    pub fn qubit(e: u8, n: u8) -> Self {
        if e == 0 {
            Level::g(n)
        } else {
            Level::c(n)
        }
    }

    pub fn is_rydberg(&self) -> bool {
        self.electronic.is_rydberg()
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.electronic.tag(), self.nuclear)
    }
}

impl FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut chars = s.chars();
        let bad = || Error::Param(format!("bad level label {s:?}"));
        let e = chars.next().and_then(Electronic::from_tag).ok_or_else(bad)?;
        let n = match (chars.next(), chars.next()) {
            (Some('0'), None) => 0,
            (Some('1'), None) => 1,
            _ => return Err(bad()),
        };
        Ok(Level::new(e, n))
    }
}

impl Serialize for Level {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Level {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Basis label: one level per atom, in the basis' atom order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label(pub Vec<Level>);

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl Label {
    pub fn rydberg_count(&self) -> usize {
        self.0.iter().filter(|l| l.is_rydberg()).count()
    }
}

/// Ordered set of labeled levels with rotating-frame energies.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelBasis {
    atoms: Vec<Atom>,
    labels: Vec<Label>,
    frame_energies: Vec<f64>,
    index: HashMap<Label, usize>,
}

impl LevelBasis {
    pub fn new(atoms: Vec<Atom>, labels: Vec<Label>, frame_energies: Vec<f64>) -> Result<Self> {
        let mut seen = atoms.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != atoms.len() {
            return Err(Error::Basis("repeated atom identity".into()));
        }
        if frame_energies.len() != labels.len() {
            return Err(Error::Basis("one frame energy per level required".into()));
        }
        if frame_energies.iter().any(|e| !e.is_finite()) {
            return Err(Error::Basis("frame energies must be finite".into()));
        }
        let mut index = HashMap::with_capacity(labels.len());
        for (i, l) in labels.iter().enumerate() {
            if l.0.len() != atoms.len() {
                return Err(Error::Basis(format!("label {l} does not cover {} atoms", atoms.len())));
            }
            if index.insert(l.clone(), i).is_some() {
                return Err(Error::Basis(format!("duplicate label {l}")));
            }
        }
        Ok(LevelBasis { atoms, labels, frame_energies, index })
    }

    /// Single-atom basis with zero frame energies.
    pub fn single(atom: Atom, levels: &[Level]) -> Result<Self> {
        let labels = levels.iter().map(|&l| Label(vec![l])).collect::<Vec<_>>();
        let n = labels.len();
        LevelBasis::new(vec![atom], labels, vec![0.0; n])
    }

    pub fn with_frame_energies(self, energies: Vec<f64>) -> Result<Self> {
        LevelBasis::new(self.atoms, self.labels, energies)
    }

    /// Product basis; labels ordered with `self` as the slow index.
    pub fn tensor(&self, other: &LevelBasis) -> Result<Self> {
        if self.atoms.iter().any(|a| other.atoms.contains(a)) {
            return Err(Error::Basis("tensor product of bases sharing an atom".into()));
        }
        let dim = self.len().saturating_mul(other.len());
        if dim > MAX_LEVELS {
            return Err(Error::Basis(format!("joint dimension {dim} exceeds {MAX_LEVELS}")));
        }
        let mut atoms = self.atoms.clone();
        atoms.extend(&other.atoms);
        let mut labels = Vec::with_capacity(dim);
        let mut energies = Vec::with_capacity(dim);
        for (la, ea) in self.labels.iter().zip(&self.frame_energies) {
            for (lb, eb) in other.labels.iter().zip(&other.frame_energies) {
                let mut l = la.0.clone();
                l.extend(&lb.0);
                labels.push(Label(l));
                energies.push(ea + eb);
            }
        }
        LevelBasis::new(atoms, labels, energies)
    }

    /// Sub-basis keeping the labels for which `keep` holds.
    pub fn filtered(&self, keep: impl Fn(&Label) -> bool) -> Result<Self> {
        let (labels, energies): (Vec<_>, Vec<_>) =
            self.labels.iter().zip(&self.frame_energies).filter(|(l, _)| keep(l)).map(|(l, e)| (l.clone(), *e)).unzip();
        LevelBasis::new(self.atoms.clone(), labels, energies)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn frame_energies(&self) -> &[f64] {
        &self.frame_energies
    }

    pub fn index_of(&self, label: &Label) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn atom_slot(&self, atom: Atom) -> Option<usize> {
        self.atoms.iter().position(|&a| a == atom)
    }

    /// True when some label carries `level` on `atom`.
    pub fn contains_level(&self, atom: Atom, level: Level) -> bool {
        match self.atom_slot(atom) {
            Some(s) => self.labels.iter().any(|l| l.0[s] == level),
            None => false,
        }
    }
}
