//! Meshes on boundary curves and the bisection refinement calculus.
//!
//! A mesh partitions every segment of a [`BoundaryCurve`] into parameter
//! intervals.  All elements descend from the initial one-element-per-segment
//! mesh by repeated parameter bisection, so interval endpoints are dyadic
//! and exact in floating point: meshes can be compared, intersected and
//! overlaid without tolerances.
//!
//! Each element carries a generation counter (bisection depth).  Refinement
//! bisects the requested elements and then closes the mesh: any element
//! lagging two or more generations behind a neighbor is bisected too, until
//! the generation difference between neighbors is at most one.  This keeps
//! neighboring element sizes within a factor `2 k0` of each other, where
//! `k0` is the size ratio of the initial mesh, and it makes refinement
//! deterministic — the result depends only on the mesh and the marked set.
//!
//! Meshes are immutable; every operation returns a new mesh.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::Error;
use crate::geometry::BoundaryCurve;

/// One mesh element: the parameter interval `[t0, t1]` of segment `seg`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Element {
    pub seg: usize,
    pub t0: f64,
    pub t1: f64,
    pub generation: u32,
}

impl Element {
    pub fn midpoint_param(&self) -> f64 {
        0.5 * (self.t0 + self.t1)
    }

    fn key(&self) -> (usize, u64, u64) {
        (self.seg, self.t0.to_bits(), self.t1.to_bits())
    }
}

/// A partition of a boundary curve, ordered along the curve.
#[derive(Clone, Debug)]
pub struct Mesh {
    curve: Arc<BoundaryCurve>,
    elements: Vec<Element>,
    /// Cached element arclengths, same order as `elements`.
    h: Vec<f64>,
}

impl Mesh {
    /// Coarsest mesh: one element per segment.
    pub fn initial(curve: Arc<BoundaryCurve>) -> Mesh {
        let elements: Vec<Element> = (0..curve.segments().len())
            .map(|seg| Element {
                seg,
                t0: 0.0,
                t1: 1.0,
                generation: 0,
            })
            .collect();
        Mesh::from_sorted_elements(curve, elements)
    }

    fn from_sorted_elements(curve: Arc<BoundaryCurve>, elements: Vec<Element>) -> Mesh {
        let h = elements
            .iter()
            .map(|e| curve.arclength(e.seg, e.t0, e.t1))
            .collect();
        Mesh { curve, elements, h }
    }

    pub fn curve(&self) -> &Arc<BoundaryCurve> {
        &self.curve
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &Element {
        &self.elements[i]
    }

    /// Arclength of element `i`.
    pub fn h(&self, i: usize) -> f64 {
        self.h[i]
    }

    pub fn max_h(&self) -> f64 {
        self.h.iter().cloned().fold(0.0, f64::max)
    }

    /// Indices of the elements sharing a node with element `i` (along the
    /// curve; wraps around for closed curves).
    pub fn neighbors(&self, i: usize) -> (Option<usize>, Option<usize>) {
        let n = self.elements.len();
        let closed = self.curve.is_closed();
        let left = if i > 0 {
            Some(i - 1)
        } else if closed && n > 1 {
            Some(n - 1)
        } else {
            None
        };
        let right = if i + 1 < n {
            Some(i + 1)
        } else if closed && n > 1 {
            Some(0)
        } else {
            None
        };
        (left, right)
    }

    /// Bisect the marked elements (duplicates ignored), then close the mesh
    /// so neighbor generations differ by at most one.
    pub fn refine(&self, marked: &[usize]) -> Result<Mesh, Error> {
        for &m in marked {
            if m >= self.elements.len() {
                return Err(Error::InvalidMesh(format!(
                    "marked element {m} out of range (mesh has {})",
                    self.elements.len()
                )));
            }
        }
        let mut flags = vec![false; self.elements.len()];
        for &m in marked {
            flags[m] = true;
        }
        let mut work: Vec<Element> = Vec::with_capacity(self.elements.len() + marked.len());
        for (e, &f) in self.elements.iter().zip(&flags) {
            if f {
                let (a, b) = bisect(e);
                work.push(a);
                work.push(b);
            } else {
                work.push(*e);
            }
        }
        // Closure sweeps: bisect any element at least two generations coarser
        // than a neighbor.  Generations never exceed the current maximum, so
        // this terminates.
        let closed = self.curve.is_closed();
        loop {
            let n = work.len();
            let mut any = false;
            let mut next: Vec<Element> = Vec::with_capacity(n + 8);
            for i in 0..n {
                let gen = work[i].generation;
                let mut lag = false;
                if i > 0 || (closed && n > 1) {
                    let left = if i > 0 { i - 1 } else { n - 1 };
                    lag |= work[left].generation >= gen + 2;
                }
                if i + 1 < n || (closed && n > 1) {
                    let right = if i + 1 < n { i + 1 } else { 0 };
                    lag |= work[right].generation >= gen + 2;
                }
                if lag {
                    let (a, b) = bisect(&work[i]);
                    next.push(a);
                    next.push(b);
                    any = true;
                } else {
                    next.push(work[i]);
                }
            }
            work = next;
            if !any {
                break;
            }
        }
        debug_assert!(is_sorted_partition(&work, self.curve.segments().len()));
        Ok(Mesh::from_sorted_elements(self.curve.clone(), work))
    }

    /// Bisect every element once (no closure is ever needed).
    pub fn uniform_refine(&self) -> Mesh {
        let all: Vec<usize> = (0..self.elements.len()).collect();
        self.refine(&all).expect("uniform refinement cannot fail")
    }

    /// Coarsest common refinement of two meshes over the same curve.
    pub fn overlay(&self, other: &Mesh) -> Result<Mesh, Error> {
        if !Arc::ptr_eq(&self.curve, &other.curve)
            && self.curve.segments().len() != other.curve.segments().len()
        {
            return Err(Error::InvalidMesh(
                "overlay requires meshes over the same curve".into(),
            ));
        }
        let nseg = self.curve.segments().len();
        let mut out: Vec<Element> = Vec::with_capacity(self.len() + other.len());
        for seg in 0..nseg {
            // Union of the cut points of both meshes on this segment.
            let mut cuts: Vec<f64> = Vec::new();
            for m in [self, other] {
                for e in &m.elements {
                    if e.seg == seg {
                        cuts.push(e.t0);
                        cuts.push(e.t1);
                    }
                }
            }
            cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
            cuts.dedup();
            for w in cuts.windows(2) {
                let len = w[1] - w[0];
                let generation = (-len.log2()).round() as u32;
                out.push(Element {
                    seg,
                    t0: w[0],
                    t1: w[1],
                    generation,
                });
            }
        }
        debug_assert!(is_sorted_partition(&out, nseg));
        Ok(Mesh::from_sorted_elements(self.curve.clone(), out))
    }

    /// Does every element of `self` lie inside an element of `coarse`?
    pub fn is_refinement_of(&self, coarse: &Mesh) -> bool {
        self.elements.iter().all(|e| {
            coarse
                .find_element(e.seg, 0.5 * (e.t0 + e.t1))
                .map(|i| {
                    let c = &coarse.elements[i];
                    c.t0 <= e.t0 && e.t1 <= c.t1
                })
                .unwrap_or(false)
        })
    }

    /// Index of the element of segment `seg` whose interval contains `t`.
    pub fn find_element(&self, seg: usize, t: f64) -> Option<usize> {
        // Elements are sorted by (seg, t0); binary search for the last
        // element with t0 <= t in the right segment.
        let mut lo = 0usize;
        let mut hi = self.elements.len();
        while lo < hi {
            let mid = (lo + hi) / 2;
            let e = &self.elements[mid];
            if (e.seg, e.t0) <= (seg, t) {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        if lo == 0 {
            return None;
        }
        let e = &self.elements[lo - 1];
        (e.seg == seg && e.t0 <= t && t <= e.t1).then_some(lo - 1)
    }

    /// Indices (in `self`) of elements that do not appear in `other`.
    pub fn elements_not_in(&self, other: &Mesh) -> Vec<usize> {
        let set: HashMap<(usize, u64, u64), ()> =
            other.elements.iter().map(|e| (e.key(), ())).collect();
        (0..self.elements.len())
            .filter(|&i| !set.contains_key(&self.elements[i].key()))
            .collect()
    }

    /// Indices (in `self`) of elements that also appear in `other`.
    pub fn elements_also_in(&self, other: &Mesh) -> Vec<usize> {
        let set: HashMap<(usize, u64, u64), ()> =
            other.elements.iter().map(|e| (e.key(), ())).collect();
        (0..self.elements.len())
            .filter(|&i| set.contains_key(&self.elements[i].key()))
            .collect()
    }

    /// The given elements together with their curve neighbors.
    pub fn patch(&self, indices: &[usize]) -> Vec<usize> {
        let mut flags = vec![false; self.elements.len()];
        for &i in indices {
            flags[i] = true;
            let (l, r) = self.neighbors(i);
            if let Some(l) = l {
                flags[l] = true;
            }
            if let Some(r) = r {
                flags[r] = true;
            }
        }
        (0..self.elements.len()).filter(|&i| flags[i]).collect()
    }

    pub fn same_partition(&self, other: &Mesh) -> bool {
        self.elements.len() == other.elements.len()
            && self
                .elements
                .iter()
                .zip(&other.elements)
                .all(|(a, b)| a.key() == b.key())
    }

    /// Plain text form, one element per line: `seg t0 t1 generation`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for e in &self.elements {
            s.push_str(&format!("{} {} {} {}\n", e.seg, e.t0, e.t1, e.generation));
        }
        s
    }

    /// Parse the `to_text` form and validate that it partitions the curve.
    pub fn from_text(curve: Arc<BoundaryCurve>, text: &str) -> Result<Mesh, Error> {
        let mut elements = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 4 {
                return Err(Error::InvalidMesh(format!(
                    "mesh line {} needs 4 fields, got {}",
                    lineno + 1,
                    parts.len()
                )));
            }
            let parse_err = |what: &str| {
                Error::InvalidMesh(format!("mesh line {}: bad {what}", lineno + 1))
            };
            elements.push(Element {
                seg: parts[0].parse().map_err(|_| parse_err("segment"))?,
                t0: parts[1].parse().map_err(|_| parse_err("t0"))?,
                t1: parts[2].parse().map_err(|_| parse_err("t1"))?,
                generation: parts[3].parse().map_err(|_| parse_err("generation"))?,
            });
        }
        elements.sort_by(|a, b| (a.seg, a.t0).partial_cmp(&(b.seg, b.t0)).unwrap());
        if !is_sorted_partition(&elements, curve.segments().len()) {
            return Err(Error::InvalidMesh(
                "element list does not partition the curve".into(),
            ));
        }
        Ok(Mesh::from_sorted_elements(curve, elements))
    }
}

fn bisect(e: &Element) -> (Element, Element) {
    let mid = 0.5 * (e.t0 + e.t1);
    (
        Element {
            seg: e.seg,
            t0: e.t0,
            t1: mid,
            generation: e.generation + 1,
        },
        Element {
            seg: e.seg,
            t0: mid,
            t1: e.t1,
            generation: e.generation + 1,
        },
    )
}

fn is_sorted_partition(elements: &[Element], nseg: usize) -> bool {
    if elements.is_empty() {
        return false;
    }
    let mut seg = 0usize;
    let mut cursor = 0.0f64;
    let mut started = false;
    for e in elements {
        if e.t1 <= e.t0 {
            return false;
        }
        if !started || e.seg != seg {
            // previous segment (if any) must have been completed
            if started && cursor != 1.0 {
                return false;
            }
            if started && e.seg != seg + 1 {
                return false;
            }
            if !started && e.seg != 0 {
                return false;
            }
            seg = e.seg;
            cursor = 0.0;
            started = true;
        }
        if e.t0 != cursor {
            return false;
        }
        cursor = e.t1;
    }
    cursor == 1.0 && seg == nseg - 1
}

/// Bookkeeping for the mesh-closure overhead of a refinement history.
#[derive(Clone, Copy, Debug)]
pub struct CountReport {
    /// Elements added over the whole history: `#T_final - #T_initial`.
    pub added_elements: usize,
    /// Sum of the marked-set sizes over all refinement calls.
    pub total_marked: usize,
    /// `added_elements / total_marked`; bounded when closure stays tame.
    pub ratio: f64,
}

pub fn count_accounting(initial: &Mesh, final_mesh: &Mesh, total_marked: usize) -> CountReport {
    let added = final_mesh.len() - initial.len();
    CountReport {
        added_elements: added,
        total_marked,
        ratio: if total_marked == 0 {
            0.0
        } else {
            added as f64 / total_marked as f64
        },
    }
}
