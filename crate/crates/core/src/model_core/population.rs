use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One atom `weight * delta_s` of the population spectral measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Atom {
    pub s: f64,
    pub weight: f64,
}

/// Matrix dimensions. `Mhat` is the number of columns of `T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dims {
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "Mhat")]
    pub m_hat: usize,
    #[serde(rename = "N")]
    pub n: usize,
}

/// The pair `(phi, pi)`: dimensional ratio `M/N` and the spectral measure of `Sigma`.
///
/// Weight not carried by the atoms sits at zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PopulationModel {
    pub phi: f64,
    pub atoms: Vec<Atom>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<Dims>,
}

impl PopulationModel {
    /// Builds and validates a model. Atoms are sorted by decreasing `s`.
    pub fn new(phi: f64, mut atoms: Vec<Atom>, dims: Option<Dims>) -> Result<Self> {
        atoms.sort_by(|a, b| b.s.total_cmp(&a.s));
        let model = Self { phi, atoms, dims };
        model.validate()?;
        Ok(model)
    }

    /// `Sigma = s * I` with `M = phi * N` when `n` is given.
    pub fn identity(phi: f64, n: Option<usize>) -> Result<Self> {
        let dims = n.map(|n| {
            let m = (phi * n as f64).round() as usize;
            Dims { m, m_hat: m, n }
        });
        Self::new(phi, vec![Atom { s: 1.0, weight: 1.0 }], dims)
    }

    /// Groups a list of population eigenvalues into atoms. Exact zeros become mass at zero.
    pub fn from_eigenvalues(eigs: &[f64], n: usize) -> Result<Self> {
        let m = eigs.len();
        if m == 0 || n == 0 {
            return Err(Error::InvalidModel("empty dimensions".into()));
        }
        let mut sorted: Vec<f64> = eigs.to_vec();
        sorted.sort_by(|a, b| b.total_cmp(a));
        let mut atoms: Vec<Atom> = Vec::new();
        for &s in sorted.iter().filter(|&&s| s > 0.0) {
            match atoms.last_mut() {
                Some(a) if (a.s - s).abs() <= 1e-14 * a.s => a.weight += 1.0 / m as f64,
                _ => atoms.push(Atom { s, weight: 1.0 / m as f64 }),
            }
        }
        let dims = Dims { m, m_hat: m, n };
        Self::new(m as f64 / n as f64, atoms, Some(dims))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.phi.is_finite() && self.phi > 0.0) {
            return Err(Error::InvalidModel(format!("phi must be positive, got {}", self.phi)));
        }
        if self.atoms.is_empty() {
            return Err(Error::InvalidModel("at least one atom with s > 0 is required".into()));
        }
        for a in &self.atoms {
            if !(a.s.is_finite() && a.s > 0.0) {
                return Err(Error::InvalidModel(format!("atom location must be positive, got {}", a.s)));
            }
            if !(a.weight.is_finite() && a.weight > 0.0) {
                return Err(Error::InvalidModel(format!("atom weight must be positive, got {}", a.weight)));
            }
        }
        for w in self.atoms.windows(2) {
            if w[1].s >= w[0].s {
                return Err(Error::InvalidModel("atom locations must be distinct".into()));
            }
        }
        if self.total_weight() > 1.0 + 1e-12 {
            return Err(Error::InvalidModel(format!("weights sum to {} > 1", self.total_weight())));
        }
        if let Some(d) = self.dims {
            if d.m == 0 || d.n == 0 || d.m_hat == 0 {
                return Err(Error::InvalidModel("dimensions must be positive".into()));
            }
            let ratio = d.m as f64 / d.n as f64;
            if (ratio - self.phi).abs() > 1e-12 * self.phi.max(1.0) {
                return Err(Error::InvalidModel(format!(
                    "phi = {} is inconsistent with M/N = {}/{}",
                    self.phi, d.m, d.n
                )));
            }
            for a in &self.atoms {
                let count = a.weight * d.m as f64;
                if (count - count.round()).abs() > 1e-6 {
                    return Err(Error::InvalidModel(format!(
                        "atom at s = {} has non-integer multiplicity {count} for M = {}",
                        a.s, d.m
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn total_weight(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }

    /// Mass of `pi` at zero.
    pub fn zero_mass(&self) -> f64 {
        (1.0 - self.total_weight()).max(0.0)
    }

    pub fn max_s(&self) -> f64 {
        self.atoms[0].s
    }

    /// `pi([0, tau])`.
    pub fn mass_below(&self, tau: f64) -> f64 {
        self.zero_mass() + self.atoms.iter().filter(|a| a.s <= tau).map(|a| a.weight).sum::<f64>()
    }

    /// Checks the boundedness conditions `s_i <= 1/tau` and `pi([0, tau]) <= 1 - tau`.
    pub fn is_bounded(&self, tau: f64) -> bool {
        self.max_s() <= 1.0 / tau && self.mass_below(tau) <= 1.0 - tau
    }

    pub fn dims(&self) -> Result<Dims> {
        self.dims.ok_or_else(|| Error::InvalidModel("dimensions are required".into()))
    }

    /// Population eigenvalues in decreasing order, zeros included.
    pub fn expand_eigenvalues(&self) -> Result<Vec<f64>> {
        let d = self.dims()?;
        let mut out = Vec::with_capacity(d.m);
        for a in &self.atoms {
            let k = (a.weight * d.m as f64).round() as usize;
            out.extend(std::iter::repeat_n(a.s, k));
        }
        if out.len() > d.m {
            return Err(Error::InvalidModel("atom multiplicities exceed M".into()));
        }
        out.resize(d.m, 0.0);
        Ok(out)
    }

    /// Multiplies every `s_i` by `c`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        let atoms = self.atoms.iter().map(|a| Atom { s: a.s * c, weight: a.weight }).collect();
        Self::new(self.phi, atoms, self.dims)
    }
}
