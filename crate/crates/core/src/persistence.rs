//! Persistence diagrams via column reduction of the boundary matrix over
//! the two-element field.

use std::collections::HashMap;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filtration::Filtration;
use crate::scalar::{total_cmp, Scalar};

/// A `(birth, death)` pair; `death` may be `+inf` for essential classes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagramPoint<T> {
    pub birth: T,
    pub death: T,
}

impl<T: Scalar> DiagramPoint<T> {
    pub fn new(birth: T, death: T) -> Self {
        Self { birth, death }
    }

    pub fn persistence(&self) -> T {
        self.death - self.birth
    }

    pub fn is_essential(&self) -> bool {
        self.death.is_infinite()
    }

    fn cmp_key(&self, other: &Self) -> std::cmp::Ordering {
        total_cmp(&self.birth, &other.birth).then_with(|| total_cmp(&self.death, &other.death))
    }
}

/// Multiset of diagram points of one homology dimension. The diagonal is
/// implicit; repeated features are stored as repeated points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersistenceDiagram<T> {
    dim: usize,
    points: Vec<DiagramPoint<T>>,
}

impl<T: Scalar> PersistenceDiagram<T> {
    pub fn new(dim: usize, points: Vec<DiagramPoint<T>>) -> Result<Self> {
        for (i, p) in points.iter().enumerate() {
            if !p.birth.is_finite() {
                return Err(Error::InvalidInput(format!("point {i} has a non-finite birth")));
            }
            if p.death.is_nan() || p.death == T::neg_infinity() || p.death < p.birth {
                return Err(Error::InvalidInput(format!(
                    "point {i} lies below the diagonal ({}, {})",
                    p.birth, p.death
                )));
            }
        }
        Ok(Self { dim, points })
    }

    /// Builds a diagram from `(birth, death)` tuples.
    pub fn from_pairs(dim: usize, pairs: &[(T, T)]) -> Result<Self> {
        Self::new(dim, pairs.iter().map(|&(b, d)| DiagramPoint::new(b, d)).collect())
    }

    /// The empty diagram, containing only the diagonal.
    pub fn empty(dim: usize) -> Self {
        Self { dim, points: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[DiagramPoint<T>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn has_essential(&self) -> bool {
        self.points.iter().any(DiagramPoint::is_essential)
    }

    /// Points sorted by `(birth, death)`.
    pub fn sorted_points(&self) -> Vec<DiagramPoint<T>> {
        let mut pts = self.points.clone();
        pts.sort_by(DiagramPoint::cmp_key);
        pts
    }

    /// Equality as multisets, ignoring point order.
    pub fn multiset_eq(&self, other: &Self) -> bool {
        self.points.len() == other.points.len() && self.sorted_points() == other.sorted_points()
    }

    /// Largest finite persistence, if any.
    pub fn max_persistence(&self) -> Option<T> {
        self.points
            .iter()
            .filter(|p| !p.is_essential())
            .map(DiagramPoint::persistence)
            .fold(None, |acc, x| Some(acc.map_or(x, |a: T| a.max(x))))
    }

    /// Stable 64-bit hash of the point multiset.
    pub fn content_hash(&self) -> u64 {
        let mut h = std::collections::hash_map::DefaultHasher::new();
        for p in self.sorted_points() {
            p.birth.to_f64().unwrap_or(f64::NAN).to_bits().hash(&mut h);
            p.death.to_f64().unwrap_or(f64::NAN).to_bits().hash(&mut h);
        }
        self.points.len().hash(&mut h);
        h.finish()
    }

    pub(crate) fn ensure_finite(&self) -> Result<()> {
        if self.has_essential() {
            Err(Error::Domain(
                "diagram contains an infinite death; cap or drop essential classes first".into(),
            ))
        } else {
            Ok(())
        }
    }
}

/// One diagram per homology dimension `0..=max_hom_dim`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagramSet<T> {
    diagrams: Vec<PersistenceDiagram<T>>,
}

impl<T: Scalar> DiagramSet<T> {
    pub fn new(diagrams: Vec<PersistenceDiagram<T>>) -> Result<Self> {
        for (k, d) in diagrams.iter().enumerate() {
            if d.dim() != k {
                return Err(Error::InvalidInput(format!(
                    "diagram at position {k} has dimension {}",
                    d.dim()
                )));
            }
        }
        Ok(Self { diagrams })
    }

    pub fn get(&self, dim: usize) -> Option<&PersistenceDiagram<T>> {
        self.diagrams.get(dim)
    }

    pub fn max_dim(&self) -> Option<usize> {
        self.diagrams.len().checked_sub(1)
    }

    pub fn diagrams(&self) -> &[PersistenceDiagram<T>] {
        &self.diagrams
    }

    pub fn into_diagrams(self) -> Vec<PersistenceDiagram<T>> {
        self.diagrams
    }
}

/// Raw pairing of filtration indices produced by the reduction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pairing {
    /// `(creator, destroyer)` filtration indices.
    pub pairs: Vec<(usize, usize)>,
    /// Unpaired filtration indices.
    pub essential: Vec<usize>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct PersistenceOptions {
    /// Keep pairs with `birth == death` in the output diagrams.
    pub keep_zero_persistence: bool,
}

/// Computes the persistence pairing of every simplex in `f`.
///
/// Columns are reduced from the top dimension down, clearing the columns of
/// simplices already known to be creators.
pub fn persistence_pairs<T: Scalar>(f: &Filtration<T>) -> Pairing {
    let simplices = f.simplices();
    let index: HashMap<&[usize], usize> =
        simplices.iter().enumerate().map(|(i, s)| (s.vertices.as_slice(), i)).collect();

    let mut by_dim: Vec<Vec<usize>> = vec![Vec::new(); f.max_dim() + 1];
    for (i, s) in simplices.iter().enumerate() {
        by_dim[s.dim()].push(i);
    }

    let n = simplices.len();
    let mut cleared = vec![false; n];
    let mut paired = vec![false; n];
    // pivot row -> reduced column owning it
    let mut pivot_owner: HashMap<usize, usize> = HashMap::new();
    let mut reduced: HashMap<usize, Vec<usize>> = HashMap::new();
    let mut pairs = Vec::new();
    let mut face = Vec::with_capacity(f.max_dim() + 1);

    for dim in (1..=f.max_dim()).rev() {
        for &j in &by_dim[dim] {
            if cleared[j] {
                continue;
            }
            let verts = &simplices[j].vertices;
            let mut col: Vec<usize> = (0..verts.len())
                .map(|skip| {
                    face.clear();
                    face.extend(verts.iter().enumerate().filter(|&(k, _)| k != skip).map(|(_, &v)| v));
                    index[face.as_slice()]
                })
                .collect();
            col.sort_unstable();
            while let Some(&low) = col.last() {
                match pivot_owner.get(&low) {
                    Some(owner) => col = symmetric_difference(&col, &reduced[owner]),
                    None => break,
                }
            }
            if let Some(&low) = col.last() {
                pivot_owner.insert(low, j);
                reduced.insert(j, col);
                cleared[low] = true;
                paired[low] = true;
                paired[j] = true;
                pairs.push((low, j));
            }
        }
    }
    pairs.sort_unstable();
    let essential = (0..n).filter(|&i| !paired[i]).collect();
    Pairing { pairs, essential }
}

fn symmetric_difference(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Persistence diagrams of dimensions `0..=max_hom_dim`.
pub fn compute_persistence<T: Scalar>(f: &Filtration<T>, max_hom_dim: usize) -> Result<DiagramSet<T>> {
    compute_persistence_with(f, max_hom_dim, PersistenceOptions::default())
}

pub fn compute_persistence_with<T: Scalar>(
    f: &Filtration<T>,
    max_hom_dim: usize,
    options: PersistenceOptions,
) -> Result<DiagramSet<T>> {
    if max_hom_dim + 1 > f.max_dim() {
        return Err(Error::Config(format!(
            "homology dimension {max_hom_dim} needs simplices up to dimension {}, filtration stops at {}",
            max_hom_dim + 1,
            f.max_dim()
        )));
    }
    let simplices = f.simplices();
    let pairing = persistence_pairs(f);
    let mut points: Vec<Vec<DiagramPoint<T>>> = vec![Vec::new(); max_hom_dim + 1];
    for &(birth, death) in &pairing.pairs {
        let dim = simplices[birth].dim();
        if dim > max_hom_dim {
            continue;
        }
        let (b, d) = (simplices[birth].scale, simplices[death].scale);
        if b == d && !options.keep_zero_persistence {
            continue;
        }
        points[dim].push(DiagramPoint::new(b, d));
    }
    for &i in &pairing.essential {
        let dim = simplices[i].dim();
        if dim <= max_hom_dim {
            points[dim].push(DiagramPoint::new(simplices[i].scale, T::infinity()));
        }
    }
    let diagrams = points
        .into_iter()
        .enumerate()
        .map(|(dim, mut pts)| {
            pts.sort_by(DiagramPoint::cmp_key);
            PersistenceDiagram { dim, points: pts }
        })
        .collect();
    Ok(DiagramSet { diagrams })
}

/// Degree-`p` total persistence `sum pers(x)^p`.
pub fn total_persistence<T: Scalar>(d: &PersistenceDiagram<T>, p: T) -> Result<T> {
    if !(p > T::zero()) {
        return Err(Error::Domain(format!("total persistence degree must be positive, got {p}")));
    }
    d.ensure_finite()?;
    Ok(d.points().iter().map(|x| x.persistence().powf(p)).sum())
}

/// How to treat points with infinite death.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EssentialPolicy<T> {
    Drop,
    CapAt(T),
}

pub fn cap_or_drop_essential<T: Scalar>(
    d: &PersistenceDiagram<T>,
    policy: EssentialPolicy<T>,
) -> Result<PersistenceDiagram<T>> {
    let points = match policy {
        EssentialPolicy::Drop => d.points().iter().copied().filter(|p| !p.is_essential()).collect(),
        EssentialPolicy::CapAt(cap) => {
            if !cap.is_finite() {
                return Err(Error::Domain("cap value must be finite".into()));
            }
            let mut out = Vec::with_capacity(d.len());
            for p in d.points() {
                if p.is_essential() {
                    if cap < p.birth {
                        return Err(Error::Domain(format!(
                            "cap {cap} lies below the birth {} of an essential class",
                            p.birth
                        )));
                    }
                    out.push(DiagramPoint::new(p.birth, cap));
                } else {
                    if cap < p.death {
                        return Err(Error::Domain(format!(
                            "cap {cap} lies below the finite death {}",
                            p.death
                        )));
                    }
                    out.push(*p);
                }
            }
            out
        }
    };
    Ok(PersistenceDiagram { dim: d.dim(), points })
}
