use crate::error::{Error, Result};

/// How a coordinate may appear in coefficient functions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoordKind {
    /// ℝ: polynomial dependence only
    Real,
    /// S¹ = ℝ/2πℤ: harmonic dependence only
    Periodic,
    /// a periodic coordinate restricted to a contractible arc, where both
    /// polynomial and harmonic dependence are allowed
    Unwrapped,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chart {
    labels: Vec<String>,
    kinds: Vec<CoordKind>,
}

impl Chart {
    pub fn new(coords: Vec<(String, CoordKind)>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Structural("a chart needs at least one coordinate".into()));
        }
        if coords.len() > 32 {
            return Err(Error::Structural("at most 32 coordinates".into()));
        }
        for (i, (a, _)) in coords.iter().enumerate() {
            if coords[..i].iter().any(|(b, _)| a == b) {
                return Err(Error::Structural(format!("duplicate coordinate label {a}")));
            }
        }
        let (labels, kinds) = coords.into_iter().unzip();
        Ok(Chart { labels, kinds })
    }

    /// Convenience constructor from (label, periodic) pairs.
    pub fn from_flags(coords: &[(&str, bool)]) -> Result<Self> {
        Self::new(
            coords
                .iter()
                .map(|(l, p)| (l.to_string(), if *p { CoordKind::Periodic } else { CoordKind::Real }))
                .collect(),
        )
    }

    pub fn torus(n: usize) -> Self {
        let names = ["x", "y", "z", "w"];
        let coords: Vec<(&str, bool)> = names[..n].iter().map(|l| (*l, true)).collect();
        Self::from_flags(&coords).unwrap()
    }

    pub fn circle() -> Self {
        Self::from_flags(&[("theta", true)]).unwrap()
    }

    /// Cylinder with x periodic and y real.
    pub fn cylinder() -> Self {
        Self::from_flags(&[("x", true), ("y", false)]).unwrap()
    }

    /// Labels only; used for debug printing.
    pub(crate) fn generic(labels: Vec<String>) -> Self {
        let kinds = vec![CoordKind::Real; labels.len()];
        Chart { labels, kinds }
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn kind(&self, i: usize) -> CoordKind {
        self.kinds[i]
    }

    pub fn is_periodic(&self, i: usize) -> bool {
        self.kinds[i] == CoordKind::Periodic
    }

    pub fn allows_monomial(&self, i: usize) -> bool {
        self.kinds[i] != CoordKind::Periodic
    }

    pub fn allows_harmonic(&self, i: usize) -> bool {
        self.kinds[i] != CoordKind::Real
    }

    pub fn fully_periodic(&self) -> bool {
        self.kinds.iter().all(|k| *k == CoordKind::Periodic)
    }

    pub fn label(&self, i: usize) -> String {
        self.labels.get(i).cloned().unwrap_or_else(|| format!("x{i}"))
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// The chart with one extra real coordinate appended.
    pub fn extend_real(&self, label: &str) -> Result<Self> {
        let mut coords: Vec<(String, CoordKind)> =
            self.labels.iter().cloned().zip(self.kinds.iter().copied()).collect();
        coords.push((label.to_string(), CoordKind::Real));
        Chart::new(coords)
    }

    /// Restrict periodic coordinate `i` to a contractible arc. The returned
    /// token is required by operations that may leave periodic functions.
    pub fn unwrap_coordinate(&self, i: usize) -> Result<(Chart, Unwrapped)> {
        if !self.is_periodic(i) {
            return Err(Error::Domain(format!("{} is not periodic", self.label(i))));
        }
        let mut c = self.clone();
        c.kinds[i] = CoordKind::Unwrapped;
        Ok((c, Unwrapped { coord: i }))
    }
}

/// Proof that a periodic coordinate has been restricted to an arc.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Unwrapped {
    coord: usize,
}

impl Unwrapped {
    pub fn coord(&self) -> usize {
        self.coord
    }
}
