//! Shattering searches over parametric families with analytic
//! realizability oracles.
//!
//! A search for dimension `d` tries `restarts` random point sets and stops
//! at the first `d` where none of them is shattered. A success is a
//! witness; a failure across restarts is only evidence, so the estimate is
//! tagged Monte-Carlo.

use rand::Rng;
use rayon::prelude::*;

use super::{CapacityEstimate, Measure, Method};
use crate::error::{domain, Result};
use crate::rng::{stream, StreamRng};

/// A family of ±1 classifiers with a way to decide whether a labelling of a
/// point set is realizable.
pub trait ShatteringFamily: Sync {
    type Point: Clone + Send + Sync;

    fn realizable(&self, points: &[Self::Point], labels: &[bool]) -> bool;
}

/// A real-valued family: decide whether some member satisfies
/// `h(x_i) > y_i + γ` on positives and `h(x_i) < y_i − γ` on negatives.
pub trait MarginFamily: Sync {
    type Point: Clone + Send + Sync;

    fn realizable(&self, points: &[Self::Point], witnesses: &[f64], labels: &[bool], gamma: f64) -> bool;

    /// Closed range of outputs; witnesses are drawn from it.
    fn output_range(&self) -> (f64, f64);
}

fn labellings(d: usize) -> impl Iterator<Item = Vec<bool>> {
    (0..1u64 << d).map(move |m| (0..d).map(|i| (m >> i) & 1 == 1).collect())
}

fn sorted_labels(points: &[f64], labels: &[bool]) -> Option<Vec<bool>> {
    let mut idx: Vec<usize> = (0..points.len()).collect();
    idx.sort_by(|&a, &b| points[a].total_cmp(&points[b]));
    // Coincident points with different labels cannot be separated.
    for w in idx.windows(2) {
        if points[w[0]] == points[w[1]] && labels[w[0]] != labels[w[1]] {
            return None;
        }
    }
    Some(idx.iter().map(|&i| labels[i]).collect())
}

/// `x ↦ sign(x − b)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Thresholds1D;

impl ShatteringFamily for Thresholds1D {
    type Point = f64;

    fn realizable(&self, points: &[f64], labels: &[bool]) -> bool {
        match sorted_labels(points, labels) {
            Some(s) => s.windows(2).all(|w| !(w[0] && !w[1])),
            None => false,
        }
    }
}

/// `x ↦ +1` on `[a, b]`, `−1` elsewhere (the empty interval included).
#[derive(Debug, Clone, Copy, Default)]
pub struct Intervals1D;

impl ShatteringFamily for Intervals1D {
    type Point = f64;

    fn realizable(&self, points: &[f64], labels: &[bool]) -> bool {
        match sorted_labels(points, labels) {
            Some(s) => {
                let first = s.iter().position(|&l| l);
                let last = s.iter().rposition(|&l| l);
                match (first, last) {
                    (Some(a), Some(b)) => s[a..=b].iter().all(|&l| l),
                    _ => true,
                }
            }
            None => false,
        }
    }
}

/// `x ↦ sign(w·x + b)` in the plane.
#[derive(Debug, Clone, Copy, Default)]
pub struct Halfplanes2D;

type P2 = [f64; 2];

fn orient(a: P2, b: P2, c: P2) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn on_segment(p: P2, a: P2, b: P2) -> bool {
    orient(a, b, p) == 0.0
        && p[0] >= a[0].min(b[0])
        && p[0] <= a[0].max(b[0])
        && p[1] >= a[1].min(b[1])
        && p[1] <= a[1].max(b[1])
}

fn segments_meet(a: P2, b: P2, c: P2, d: P2) -> bool {
    let (o1, o2, o3, o4) = (orient(a, b, c), orient(a, b, d), orient(c, d, a), orient(c, d, b));
    if o1 * o2 < 0.0 && o3 * o4 < 0.0 {
        return true;
    }
    on_segment(c, a, b) || on_segment(d, a, b) || on_segment(a, c, d) || on_segment(b, c, d)
}

fn in_triangle(p: P2, a: P2, b: P2, c: P2) -> bool {
    if orient(a, b, c) == 0.0 {
        // Degenerate; covered by the segment tests.
        return false;
    }
    let (d1, d2, d3) = (orient(a, b, p), orient(b, c, p), orient(c, a, p));
    let neg = d1 < 0.0 || d2 < 0.0 || d3 < 0.0;
    let pos = d1 > 0.0 || d2 > 0.0 || d3 > 0.0;
    !(neg && pos)
}

/// Convex hulls in the plane intersect iff a point of one lies in a
/// triangle of the other, or an edge of one crosses an edge of the other.
fn hulls_intersect(p: &[P2], q: &[P2]) -> bool {
    let point_in = |x: P2, s: &[P2]| {
        let k = s.len();
        if k == 1 {
            return x == s[0];
        }
        for i in 0..k {
            for j in i + 1..k {
                if on_segment(x, s[i], s[j]) {
                    return true;
                }
                for l in j + 1..k {
                    if in_triangle(x, s[i], s[j], s[l]) {
                        return true;
                    }
                }
            }
        }
        false
    };
    if p.iter().any(|&x| point_in(x, q)) || q.iter().any(|&x| point_in(x, p)) {
        return true;
    }
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            for k in 0..q.len() {
                for l in k + 1..q.len() {
                    if segments_meet(p[i], p[j], q[k], q[l]) {
                        return true;
                    }
                }
            }
        }
    }
    false
}

impl ShatteringFamily for Halfplanes2D {
    type Point = P2;

    fn realizable(&self, points: &[P2], labels: &[bool]) -> bool {
        let pos: Vec<P2> = points.iter().zip(labels).filter(|(_, &l)| l).map(|(p, _)| *p).collect();
        let neg: Vec<P2> = points.iter().zip(labels).filter(|(_, &l)| !l).map(|(p, _)| *p).collect();
        pos.is_empty() || neg.is_empty() || !hulls_intersect(&pos, &neg)
    }
}

/// Constant functions with values in `[low, high]`.
#[derive(Debug, Clone, Copy)]
pub struct ConstantFunctions {
    pub low: f64,
    pub high: f64,
}

impl MarginFamily for ConstantFunctions {
    type Point = f64;

    fn realizable(&self, _points: &[f64], witnesses: &[f64], labels: &[bool], gamma: f64) -> bool {
        // Need c in [low, high] with lower < c < upper.
        let mut lower = f64::NEG_INFINITY;
        let mut upper = f64::INFINITY;
        for (&y, &l) in witnesses.iter().zip(labels) {
            if l {
                lower = lower.max(y + gamma);
            } else {
                upper = upper.min(y - gamma);
            }
        }
        self.low <= self.high && lower < upper && lower < self.high && self.low < upper
    }

    fn output_range(&self) -> (f64, f64) {
        (self.low, self.high)
    }
}

/// A sign family viewed as functions with values in `{−1, +1}`.
#[derive(Debug, Clone, Copy, Default)]
pub struct SignAsReal<F>(pub F);

impl<F: ShatteringFamily> MarginFamily for SignAsReal<F> {
    type Point = F::Point;

    fn realizable(&self, points: &[F::Point], witnesses: &[f64], labels: &[bool], gamma: f64) -> bool {
        // Each point admits output +1, −1, both or neither.
        let mut forced = Vec::with_capacity(points.len());
        let mut free = Vec::new();
        for (i, (&y, &l)) in witnesses.iter().zip(labels).enumerate() {
            let (plus, minus) =
                if l { (1.0 > y + gamma, -1.0 > y + gamma) } else { (1.0 < y - gamma, -1.0 < y - gamma) };
            match (plus, minus) {
                (false, false) => return false,
                (true, true) => {
                    free.push(i);
                    forced.push(false);
                }
                (p, _) => forced.push(p),
            }
        }
        (0..1u64 << free.len()).any(|m| {
            let mut signs = forced.clone();
            for (b, &i) in free.iter().enumerate() {
                signs[i] = (m >> b) & 1 == 1;
            }
            self.0.realizable(points, &signs)
        })
    }

    fn output_range(&self) -> (f64, f64) {
        (-1.0, 1.0)
    }
}

/// `d` points uniform on `[-1, 1]`, a generator for the 1-D families.
pub fn uniform_line(rng: &mut StreamRng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// `d` points uniform on `[-1, 1]²`.
pub fn uniform_square(rng: &mut StreamRng, d: usize) -> Vec<[f64; 2]> {
    (0..d).map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]).collect()
}

fn search_index(d: usize, restart: usize) -> u64 {
    ((d as u64) << 32) | restart as u64
}

fn check_search(d_max: usize, restarts: usize) -> Result<()> {
    if restarts == 0 {
        return domain("shattering search needs at least one restart");
    }
    if d_max > 24 {
        return domain(format!("d_max = {d_max} would enumerate more than 2^24 labellings"));
    }
    Ok(())
}

/// Largest `d ≤ d_max` for which some generated point set is shattered.
pub fn vc_dimension<F, G>(
    family: &F,
    generator: G,
    d_max: usize,
    restarts: usize,
    seed: u64,
) -> Result<CapacityEstimate>
where
    F: ShatteringFamily,
    G: Fn(&mut StreamRng, usize) -> Vec<F::Point> + Sync,
{
    check_search(d_max, restarts)?;
    let mut best = 0;
    let mut examined = 0;
    let mut hit_cap = true;
    for d in 1..=d_max {
        let found = (0..restarts).into_par_iter().any(|r| {
            let mut rng = stream(seed, "capacity/vc", search_index(d, r));
            let points = generator(&mut rng, d);
            labellings(d).all(|labels| family.realizable(&points, &labels))
        });
        examined += restarts;
        if found {
            best = d;
        } else {
            hit_cap = false;
            break;
        }
    }
    Ok(CapacityEstimate {
        value: best as f64,
        measure: Measure::Vc,
        method: Method::MonteCarlo,
        margin: None,
        sample_count_used: examined,
        standard_error: None,
        lower_bound_only: hit_cap && d_max > 0,
    })
}

/// Largest `d ≤ d_max` for which some generated point set and witness
/// vector are γ-shattered. The first restart at each `d` uses the midpoint
/// of the output range for every witness; later ones draw witnesses
/// uniformly from the range.
pub fn fat_shattering<F, G>(
    family: &F,
    gamma: f64,
    generator: G,
    d_max: usize,
    restarts: usize,
    seed: u64,
) -> Result<CapacityEstimate>
where
    F: MarginFamily,
    G: Fn(&mut StreamRng, usize) -> Vec<F::Point> + Sync,
{
    if !(gamma > 0.0 && gamma.is_finite()) {
        return domain(format!("margin must be positive, got {gamma}"));
    }
    check_search(d_max, restarts)?;
    let (lo, hi) = family.output_range();
    let mut best = 0;
    let mut examined = 0;
    let mut hit_cap = true;
    for d in 1..=d_max {
        let found = (0..restarts).into_par_iter().any(|r| {
            let mut rng = stream(seed, "capacity/fat", search_index(d, r));
            let points = generator(&mut rng, d);
            let witnesses: Vec<f64> =
                (0..d).map(|_| if r == 0 || hi <= lo { 0.5 * (lo + hi) } else { rng.gen_range(lo..=hi) }).collect();
            labellings(d).all(|labels| family.realizable(&points, &witnesses, &labels, gamma))
        });
        examined += restarts;
        if found {
            best = d;
        } else {
            hit_cap = false;
            break;
        }
    }
    Ok(CapacityEstimate {
        value: best as f64,
        measure: Measure::FatShattering,
        method: Method::MonteCarlo,
        margin: Some(gamma),
        sample_count_used: examined,
        standard_error: None,
        lower_bound_only: hit_cap && d_max > 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    use super::{uniform_line as line, uniform_square as plane};

    #[test]
    fn vc_of_toy_families() {
        assert_eq!(vc_dimension(&Thresholds1D, line, 6, 20, 1).unwrap().value, 1.0);
        assert_eq!(vc_dimension(&Intervals1D, line, 6, 20, 1).unwrap().value, 2.0);
        let h = vc_dimension(&Halfplanes2D, plane, 6, 50, 1).unwrap();
        assert_eq!(h.value, 3.0);
        assert!(!h.lower_bound_only);
    }

    #[test]
    fn cap_reached_sets_flag() {
        let e = vc_dimension(&Intervals1D, line, 2, 5, 0).unwrap();
        assert_eq!(e.value, 2.0);
        assert!(e.lower_bound_only);
    }

    #[test]
    fn halfplane_oracle_cases() {
        let sq = [[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]];
        assert!(!Halfplanes2D.realizable(&sq, &[true, true, false, false]));
        assert!(Halfplanes2D.realizable(&sq, &[true, false, true, false]));
        let collinear = [[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]];
        assert!(!Halfplanes2D.realizable(&collinear, &[true, false, true]));
    }

    #[test]
    fn fat_shattering_of_constants() {
        let c = ConstantFunctions { low: 0.0, high: 1.0 };
        assert_eq!(fat_shattering(&c, 0.25, line, 4, 10, 2).unwrap().value, 1.0);
        assert_eq!(fat_shattering(&c, 0.6, line, 4, 10, 2).unwrap().value, 0.0);
    }

    #[test]
    fn sign_family_margin_reduces_to_vc() {
        let f = SignAsReal(Thresholds1D);
        assert_eq!(fat_shattering(&f, 0.5, line, 4, 10, 3).unwrap().value, 1.0);
        assert_eq!(fat_shattering(&f, 1.0, line, 4, 10, 3).unwrap().value, 0.0);
        assert!(fat_shattering(&f, 0.0, line, 4, 10, 3).is_err());
    }
}
