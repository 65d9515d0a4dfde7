use serde::{Deserialize, Serialize};

use super::SolverError;
use crate::network::SUM_TOLERANCE;
use crate::roles::FeoScenario;

/// One editable entry of the control CPT.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coordinate {
    pub row: usize,
    pub state: usize,
}

/// How the entries of one control-CPT row depend on the parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum RowKind {
    /// No free entries; the row keeps its values.
    Fixed,
    /// Every entry free: one parameter per state except the first, which
    /// holds the complement.
    Complement { first: usize },
    /// Some entries fixed; the free ones share the remaining mass.
    Partial { first: usize, count: usize, fixed_mass: f64 },
}

/// Ordered free parameters θ of the control CPT (row, then state) with the
/// per-row bookkeeping needed to turn θ back into a full CPT.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterIndex {
    control: usize,
    card: usize,
    coords: Vec<Coordinate>,
    rows: Vec<RowKind>,
    base: Vec<f64>,
}

impl ParameterIndex {
    pub fn enumerate(scenario: &FeoScenario) -> Result<Self, SolverError> {
        let net = scenario.network();
        let control = scenario.control();
        let cpt = net.cpt(control);
        let card = cpt.cardinality();
        let mut coords = Vec::new();
        let mut rows = Vec::with_capacity(cpt.num_rows());
        for row in 0..cpt.num_rows() {
            let free: Vec<usize> = (0..card).filter(|&s| scenario.is_free(row, s)).collect();
            let first = coords.len();
            let kind = if free.is_empty() {
                RowKind::Fixed
            } else if free.len() == card {
                coords.extend((1..card).map(|state| Coordinate { row, state }));
                RowKind::Complement { first }
            } else {
                let fixed_mass: f64 = (0..card).filter(|s| !free.contains(s)).map(|s| cpt.prob(row, s)).sum();
                if fixed_mass > 1.0 + SUM_TOLERANCE {
                    return Err(SolverError::OverfullRow { given: net.row_given(cpt, row), fixed_mass });
                }
                coords.extend(free.iter().map(|&state| Coordinate { row, state }));
                RowKind::Partial { first, count: free.len(), fixed_mass: fixed_mass.min(1.0) }
            };
            rows.push(kind);
        }
        Ok(Self { control, card, coords, rows, base: cpt.probabilities().to_vec() })
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn control(&self) -> usize {
        self.control
    }

    pub fn coordinates(&self) -> &[Coordinate] {
        &self.coords
    }

    pub fn rows(&self) -> &[RowKind] {
        &self.rows
    }

    /// θ read off the current CPT.
    pub fn current(&self) -> Vec<f64> {
        self.coords.iter().map(|c| self.base[c.row * self.card + c.state]).collect()
    }

    /// Box bounds per parameter.
    pub fn bounds(&self) -> Vec<(f64, f64)> {
        let mut out = vec![(0.0, 1.0); self.len()];
        for kind in &self.rows {
            if let RowKind::Partial { first, count, fixed_mass } = *kind {
                for b in &mut out[first..first + count] {
                    *b = (0.0, (1.0 - fixed_mass).max(0.0));
                }
            }
        }
        out
    }

    /// Entry (row, state) of the control CPT as `constant + Σ coeff·θ`.
    pub fn entry(&self, row: usize, state: usize) -> (f64, Vec<(usize, f64)>) {
        match self.rows[row] {
            RowKind::Fixed => (self.base[row * self.card + state], Vec::new()),
            RowKind::Complement { first } => {
                if state == 0 {
                    (1.0, (first..first + self.card - 1).map(|k| (k, -1.0)).collect())
                } else {
                    (0.0, vec![(first + state - 1, 1.0)])
                }
            }
            RowKind::Partial { first, count, .. } => {
                match self.coords[first..first + count].iter().position(|c| c.state == state) {
                    Some(p) => (0.0, vec![(first + p, 1.0)]),
                    None => (self.base[row * self.card + state], Vec::new()),
                }
            }
        }
    }

    /// Full control CPT for a parameter vector.
    pub fn cpt_values(&self, theta: &[f64]) -> Vec<f64> {
        let mut probs = self.base.clone();
        for (row, kind) in self.rows.iter().enumerate() {
            let slot = &mut probs[row * self.card..(row + 1) * self.card];
            match *kind {
                RowKind::Fixed => {}
                RowKind::Complement { first } => {
                    let vals = &theta[first..first + self.card - 1];
                    slot[1..].copy_from_slice(vals);
                    slot[0] = 1.0 - vals.iter().sum::<f64>();
                }
                RowKind::Partial { first, count, fixed_mass } => {
                    for (c, &v) in self.coords[first..first + count].iter().zip(&theta[first..first + count]) {
                        slot[c.state] = v;
                    }
                    // absorb rounding drift in the largest free entry
                    let drift = (1.0 - fixed_mass) - theta[first..first + count].iter().sum::<f64>();
                    let big = self.coords[first..first + count]
                        .iter()
                        .max_by(|a, b| slot[a.state].total_cmp(&slot[b.state]))
                        .map(|c| c.state)
                        .expect("partial rows have a free entry");
                    slot[big] += drift;
                }
            }
        }
        for p in &mut probs {
            *p = p.clamp(0.0, 1.0);
        }
        probs
    }

    /// Exact range of `coeffs·θ` over the rows' own polytopes (box plus
    /// row normalization), ignoring every other constraint.
    pub fn attainable_range(&self, coeffs: &[f64]) -> (f64, f64) {
        let (mut lo, mut hi) = (0.0, 0.0);
        for kind in &self.rows {
            let (vertices, scale): (&[f64], f64) = match *kind {
                RowKind::Fixed => continue,
                RowKind::Complement { first } => (&coeffs[first..first + self.card - 1], 1.0),
                RowKind::Partial { first, count, fixed_mass } => (&coeffs[first..first + count], 1.0 - fixed_mass),
            };
            let with_origin = matches!(kind, RowKind::Complement { .. });
            let mut rmin = if with_origin { 0.0 } else { f64::INFINITY };
            let mut rmax = if with_origin { 0.0 } else { f64::NEG_INFINITY };
            for &a in vertices {
                rmin = rmin.min(a * scale);
                rmax = rmax.max(a * scale);
            }
            lo += rmin;
            hi += rmax;
        }
        (lo, hi)
    }
}
