//! Triangular-lattice coordinates and the continuous regions used by the
//! estimators: cones, tubes and rhombus surfaces.
//!
//! A site is stored in axial coordinates `(k, l)` and embeds into the plane
//! as `k + l·e^{iπ/3}`. Adjacency is decided on the integers; floating point
//! only enters through the geometric predicates.

use std::collections::{BTreeSet, HashSet};
use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `sin(π/3)`, the spacing between rows.
pub const SQRT3_2: f64 = 0.866_025_403_784_438_6;

/// Slack used by the closed-set predicates. Lattice points that land exactly
/// on a region boundary are counted as inside.
pub const GEOM_EPS: f64 = 1e-9;

/// Axial offsets of the six unit-distance neighbours.
pub const NEIGHBOR_OFFSETS: [(i32, i32); 6] = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, -1), (-1, 1)];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SiteCoord {
    pub k: i32,
    pub l: i32,
}

impl SiteCoord {
    pub const ORIGIN: SiteCoord = SiteCoord { k: 0, l: 0 };

    pub const fn new(k: i32, l: i32) -> Self {
        Self { k, l }
    }

    pub fn point(self) -> Point {
        Point { x: self.k as f64 + 0.5 * self.l as f64, y: SQRT3_2 * self.l as f64 }
    }

    /// Imaginary part of the embedded point.
    pub fn im_height(self) -> f64 {
        SQRT3_2 * self.l as f64
    }

    pub fn neighbors(self) -> [SiteCoord; 6] {
        NEIGHBOR_OFFSETS.map(|(dk, dl)| SiteCoord::new(self.k + dk, self.l + dl))
    }

    /// True on the inner boundary row `l = 0` of the half-plane lattice.
    pub fn is_boundary(self) -> bool {
        self.l == 0
    }

    pub fn offset(self, dk: i32, dl: i32) -> SiteCoord {
        SiteCoord::new(self.k + dk, self.l + dl)
    }

    /// Mirror image under `z ↦ -z̄`, which maps the lattice onto itself.
    pub fn reflect(self) -> SiteCoord {
        SiteCoord::new(-self.k - self.l, self.l)
    }

    pub fn is_neighbor(self, other: SiteCoord) -> bool {
        let d = (other.k - self.k, other.l - self.l);
        NEIGHBOR_OFFSETS.contains(&d)
    }
}

impl fmt::Display for SiteCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.k, self.l)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    fn add(self, dx: f64, dy: f64) -> Point {
        Point::new(self.x + dx, self.y + dy)
    }
}

/// Euclidean distance from `p` to the closed segment `[a, b]`.
pub fn dist_to_segment(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return p.dist(a);
    }
    let s = (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0);
    p.dist(Point::new(a.x + s * dx, a.y + s * dy))
}

/// Part of `[a, b]` with non-negative imaginary part, if any.
fn clip_upper(a: Point, b: Point) -> Option<(Point, Point)> {
    match (a.y >= 0.0, b.y >= 0.0) {
        (true, true) => Some((a, b)),
        (false, false) => None,
        (a_up, _) => {
            let s = a.y / (a.y - b.y);
            let cross = Point::new(a.x + s * (b.x - a.x), 0.0);
            Some(if a_up { (a, cross) } else { (cross, b) })
        }
    }
}

/// Outer boundary of a finite site set: every site outside `sites` with a
/// neighbour inside. With `half_plane` the result is restricted to `l >= 0`.
pub fn outer_boundary<'a, I>(sites: I, half_plane: bool) -> BTreeSet<SiteCoord>
where
    I: IntoIterator<Item = &'a SiteCoord>,
{
    let set: HashSet<SiteCoord> = sites.into_iter().copied().collect();
    set.iter().flat_map(|s| s.neighbors()).filter(|v| !set.contains(v) && (!half_plane || v.l >= 0)).collect()
}

/// Finite axial box `k_min..=k_max` × `l_min..=l_max`. Never empty.
#[allow(clippy::len_without_is_empty)]
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub k_min: i32,
    pub k_max: i32,
    pub l_min: i32,
    pub l_max: i32,
}

impl Window {
    pub fn new(k_min: i32, k_max: i32, l_min: i32, l_max: i32) -> Result<Self> {
        if k_min > k_max || l_min > l_max {
            return Err(Error::InvalidParameter(format!("empty window k {k_min}..={k_max}, l {l_min}..={l_max}")));
        }
        Ok(Self { k_min, k_max, l_min, l_max })
    }

    /// A half-plane window resting on the boundary row.
    pub fn half_plane(k_min: i32, k_max: i32, l_max: i32) -> Result<Self> {
        Self::new(k_min, k_max, 0, l_max)
    }

    pub fn is_half_plane(&self) -> bool {
        self.l_min == 0
    }

    pub fn width(&self) -> usize {
        (self.k_max - self.k_min + 1) as usize
    }

    pub fn height(&self) -> usize {
        (self.l_max - self.l_min + 1) as usize
    }

    pub fn len(&self) -> usize {
        self.width() * self.height()
    }

    pub fn contains(&self, s: SiteCoord) -> bool {
        (self.k_min..=self.k_max).contains(&s.k) && (self.l_min..=self.l_max).contains(&s.l)
    }

    pub fn index(&self, s: SiteCoord) -> Option<usize> {
        self.contains(s).then(|| (s.l - self.l_min) as usize * self.width() + (s.k - self.k_min) as usize)
    }

    pub fn site(&self, idx: usize) -> SiteCoord {
        let w = self.width();
        SiteCoord::new(self.k_min + (idx % w) as i32, self.l_min + (idx / w) as i32)
    }

    pub fn sites(&self) -> impl Iterator<Item = SiteCoord> + '_ {
        (self.l_min..=self.l_max).flat_map(move |l| (self.k_min..=self.k_max).map(move |k| SiteCoord::new(k, l)))
    }

    /// Sites on the truncation edge. For a half-plane window the bottom row
    /// is the physical boundary, not an edge.
    pub fn is_edge(&self, s: SiteCoord) -> bool {
        s.k == self.k_min || s.k == self.k_max || s.l == self.l_max || (s.l == self.l_min && !self.is_half_plane())
    }

    /// Axial box containing every point within `pad` of the given points.
    pub fn bounding(points: &[Point], pad: f64) -> Result<Self> {
        let mut k_lo = i32::MAX;
        let mut k_hi = i32::MIN;
        let mut l_lo = i32::MAX;
        let mut l_hi = i32::MIN;
        for p in points {
            for (dx, dy) in [(-pad, -pad), (pad, -pad), (-pad, pad), (pad, pad)] {
                let q = p.add(dx, dy);
                let l = q.y / SQRT3_2;
                let k = q.x - 0.5 * l;
                k_lo = k_lo.min(k.floor() as i32);
                k_hi = k_hi.max(k.ceil() as i32);
                l_lo = l_lo.min(l.floor() as i32);
                l_hi = l_hi.max(l.ceil() as i32);
            }
        }
        Self::new(k_lo, k_hi, l_lo, l_hi)
    }

    /// Clips the window to the half-plane.
    pub fn upper(self) -> Result<Self> {
        Self::new(self.k_min, self.k_max, self.l_min.max(0), self.l_max)
    }
}

fn check_angle(phi: f64, upper: f64, what: &str) -> Result<()> {
    if phi.is_finite() && phi > 0.0 && phi < upper {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{what} angle {phi} outside (0, {upper})")))
    }
}

/// Infinite cone with apex `apex_x` on the real line and boundary rays at
/// angles `phi` and `π - phi`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeRegion {
    pub apex_x: f64,
    pub phi: f64,
}

impl ConeRegion {
    pub fn new(apex_x: f64, phi: f64) -> Result<Self> {
        check_angle(phi, PI / 2.0, "cone")?;
        Ok(Self { apex_x, phi })
    }

    pub fn contains_point(&self, p: Point) -> bool {
        let (s, c) = self.phi.sin_cos();
        p.y >= -GEOM_EPS && (p.x - self.apex_x).abs() * s <= p.y * c + GEOM_EPS
    }

    pub fn contains(&self, s: SiteCoord) -> bool {
        self.contains_point(s.point())
    }

    pub fn distance(&self, p: Point) -> f64 {
        if self.contains_point(p) {
            return 0.0;
        }
        let apex = Point::new(self.apex_x, 0.0);
        let (s, c) = self.phi.sin_cos();
        [(c, s), (-c, s)]
            .into_iter()
            .map(|(dx, dy)| {
                let t = ((p.x - apex.x) * dx + (p.y - apex.y) * dy).max(0.0);
                p.dist(apex.add(t * dx, t * dy))
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Width-one tube around the half-line from `x` in direction `phi`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TubeRegion {
    pub x: f64,
    pub phi: f64,
}

impl TubeRegion {
    pub fn new(x: f64, phi: f64) -> Result<Self> {
        check_angle(phi, PI, "tube")?;
        Ok(Self { x, phi })
    }

    pub fn centre_line_distance(&self, p: Point) -> f64 {
        let (dy, dx) = self.phi.sin_cos();
        let t = ((p.x - self.x) * dx + p.y * dy).max(0.0);
        p.dist(Point::new(self.x + t * dx, t * dy))
    }

    pub fn contains_point(&self, p: Point) -> bool {
        p.y >= -GEOM_EPS && self.centre_line_distance(p) <= 0.5 + GEOM_EPS
    }

    pub fn contains(&self, s: SiteCoord) -> bool {
        self.contains_point(s.point())
    }
}

/// Surface of the rhombus `center + u + v·e^{iφ}` with `max(|u|, |v|) = n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RhombusSurface {
    pub center: SiteCoord,
    pub n: u32,
    pub phi: f64,
}

impl RhombusSurface {
    pub fn new(center: SiteCoord, n: u32, phi: f64) -> Result<Self> {
        check_angle(phi, PI / 2.0 + 1e-12, "rhombus")?;
        if n == 0 {
            return Err(Error::InvalidParameter("rhombus radius must be positive".into()));
        }
        Ok(Self { center, n, phi })
    }

    pub fn corners(&self) -> [Point; 4] {
        let c = self.center.point();
        let n = self.n as f64;
        let (s, co) = self.phi.sin_cos();
        let (ex, ey) = (n * co, n * s);
        [c.add(n + ex, ey), c.add(-n + ex, ey), c.add(-n - ex, -ey), c.add(n - ex, -ey)]
    }

    fn segments(&self) -> [(Point, Point); 4] {
        let [a, b, c, d] = self.corners();
        [(a, b), (b, c), (c, d), (d, a)]
    }

    /// Rhombus coordinates `(u, v)` of `p` relative to the centre.
    pub fn coords(&self, p: Point) -> (f64, f64) {
        let c = self.center.point();
        let (s, co) = self.phi.sin_cos();
        let v = (p.y - c.y) / s;
        let u = p.x - c.x - v * co;
        (u, v)
    }

    /// `max(|u|, |v|)`: the surface is the level set at `n`.
    pub fn norm(&self, p: Point) -> f64 {
        let (u, v) = self.coords(p);
        u.abs().max(v.abs())
    }

    pub fn distance(&self, p: Point) -> f64 {
        self.segments().iter().map(|&(a, b)| dist_to_segment(p, a, b)).fold(f64::INFINITY, f64::min)
    }

    /// Distance to the part of the surface in the closed upper half-plane.
    pub fn distance_upper(&self, p: Point) -> f64 {
        self.segments()
            .iter()
            .filter_map(|&(a, b)| clip_upper(a, b))
            .map(|(a, b)| dist_to_segment(p, a, b))
            .fold(f64::INFINITY, f64::min)
    }

    /// Distance to the closed solid rhombus.
    pub fn distance_solid(&self, p: Point) -> f64 {
        if self.norm(p) <= self.n as f64 {
            0.0
        } else {
            self.distance(p)
        }
    }
}

pub fn dist_to_rhombus_surface(r: &RhombusSurface, s: SiteCoord) -> f64 {
    r.distance(s.point())
}

/// Regions over which heights of destruction are taken.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    Cone(ConeRegion),
    Tube(TubeRegion),
    Everything,
}

impl Region {
    pub fn contains(&self, s: SiteCoord) -> bool {
        match self {
            Region::Cone(c) => c.contains(s),
            Region::Tube(t) => t.contains(s),
            Region::Everything => s.l >= 0,
        }
    }
}
