//! Zero-set extraction on node grids: sign changes in 1-D, marching squares
//! in 2-D, marching tetrahedra (six Kuhn tetrahedra per cube) in 3-D, plus
//! clipping against half-spaces.

/// `normal . x + offset >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpace {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl HalfSpace {
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.normal.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + self.offset
    }
}

const CLIP_TOL: f64 = 1e-12;

/// Extracted zero-set pieces of one dimension `d`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Pieces {
    pub points: Vec<Vec<f64>>,
    pub segments: Vec<[[f64; 2]; 2]>,
    pub triangles: Vec<[[f64; 3]; 3]>,
}

impl Pieces {
    /// Point count, total length or total area.
    pub fn measure(&self) -> f64 {
        let mut total = self.points.len() as f64;
        for [a, b] in &self.segments {
            total += ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
        }
        for t in &self.triangles {
            total += triangle_area(t);
        }
        total
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty() && self.segments.is_empty() && self.triangles.is_empty()
    }

    pub fn append(&mut self, other: Pieces) {
        self.points.extend(other.points);
        self.segments.extend(other.segments);
        self.triangles.extend(other.triangles);
    }

    pub fn clip(self, hs: &[HalfSpace]) -> Pieces {
        if hs.is_empty() {
            return self;
        }
        let points = self
            .points
            .into_iter()
            .filter(|p| hs.iter().all(|h| h.eval(p) >= -CLIP_TOL))
            .collect();
        let segments = self
            .segments
            .into_iter()
            .filter_map(|s| clip_segment(s, hs))
            .collect();
        let mut triangles = Vec::new();
        for t in self.triangles {
            let poly = clip_polygon(t.iter().map(|v| v.to_vec()).collect(), hs);
            for i in 1..poly.len().saturating_sub(1) {
                let tri = [to3(&poly[0]), to3(&poly[i]), to3(&poly[i + 1])];
                if triangle_area(&tri) > 0.0 {
                    triangles.push(tri);
                }
            }
        }
        Pieces {
            points,
            segments,
            triangles,
        }
    }

    /// Segments as `x1,y1,x2,y2` rows.
    pub fn segments_csv(&self) -> String {
        let mut out = String::from("x1,y1,x2,y2\n");
        for [a, b] in &self.segments {
            out.push_str(&format!("{},{},{},{}\n", a[0], a[1], b[0], b[1]));
        }
        out
    }

    /// ASCII STL solid of the triangles.
    pub fn triangles_stl(&self, name: &str) -> String {
        let mut out = format!("solid {name}\n");
        for t in &self.triangles {
            let n = cross(sub(&t[1], &t[0]), sub(&t[2], &t[0]));
            let len = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt().max(1e-300);
            out.push_str(&format!("facet normal {} {} {}\n outer loop\n", n[0] / len, n[1] / len, n[2] / len));
            for v in t {
                out.push_str(&format!("  vertex {} {} {}\n", v[0], v[1], v[2]));
            }
            out.push_str(" endloop\nendfacet\n");
        }
        out.push_str(&format!("endsolid {name}\n"));
        out
    }
}

fn to3(v: &[f64]) -> [f64; 3] {
    [v[0], v[1], v[2]]
}

fn sub(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn triangle_area(t: &[[f64; 3]; 3]) -> f64 {
    let n = cross(sub(&t[1], &t[0]), sub(&t[2], &t[0]));
    0.5 * (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt()
}

fn clip_segment(s: [[f64; 2]; 2], hs: &[HalfSpace]) -> Option<[[f64; 2]; 2]> {
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    for h in hs {
        let a = h.eval(&s[0]);
        let b = h.eval(&s[1]);
        let (in_a, in_b) = (a >= -CLIP_TOL, b >= -CLIP_TOL);
        if !in_a && !in_b {
            return None;
        }
        if in_a && in_b {
            continue;
        }
        let t = a / (a - b);
        if !in_a {
            t0 = t0.max(t);
        } else {
            t1 = t1.min(t);
        }
    }
    if t1 <= t0 {
        return None;
    }
    let at = |t: f64| [s[0][0] + t * (s[1][0] - s[0][0]), s[0][1] + t * (s[1][1] - s[0][1])];
    Some([at(t0), at(t1)])
}

fn clip_polygon(mut poly: Vec<Vec<f64>>, hs: &[HalfSpace]) -> Vec<Vec<f64>> {
    for h in hs {
        if poly.is_empty() {
            break;
        }
        let vals: Vec<f64> = poly.iter().map(|p| h.eval(p)).collect();
        if vals.iter().all(|&v| v >= -CLIP_TOL) {
            continue;
        }
        let mut out = Vec::with_capacity(poly.len() + 1);
        for i in 0..poly.len() {
            let j = (i + 1) % poly.len();
            let (a, b) = (vals[i], vals[j]);
            if a >= -CLIP_TOL {
                out.push(poly[i].clone());
            }
            if (a >= -CLIP_TOL) != (b >= -CLIP_TOL) {
                let t = a / (a - b);
                out.push(poly[i].iter().zip(&poly[j]).map(|(p, q)| p + t * (q - p)).collect());
            }
        }
        poly = out;
    }
    poly
}

/// Nodes `lo + (hi - lo) * i / n_axis`, first axis fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeGrid {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub cells: Vec<usize>,
}

impl NodeGrid {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, cells: Vec<usize>) -> Self {
        NodeGrid { lo, hi, cells }
    }

    pub fn uniform(lo: Vec<f64>, hi: Vec<f64>, n: usize) -> Self {
        let d = lo.len();
        NodeGrid::new(lo, hi, vec![n; d])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn node_count(&self) -> usize {
        self.cells.iter().map(|n| n + 1).product()
    }

    pub fn cell_count(&self) -> usize {
        self.cells.iter().product()
    }

    pub fn node(&self, idx: usize) -> Vec<f64> {
        let mut i = idx;
        (0..self.dim())
            .map(|a| {
                let k = i % (self.cells[a] + 1);
                i /= self.cells[a] + 1;
                self.coord(a, k as f64)
            })
            .collect()
    }

    fn coord(&self, axis: usize, k: f64) -> f64 {
        let n = self.cells[axis] as f64;
        if k == n {
            self.hi[axis]
        } else {
            self.lo[axis] + (self.hi[axis] - self.lo[axis]) * k / n
        }
    }

    fn node_index(&self, multi: &[usize]) -> usize {
        multi
            .iter()
            .enumerate()
            .rev()
            .fold(0, |acc, (a, &k)| acc * (self.cells[a] + 1) + k)
    }

    pub fn cell_multi(&self, mut idx: usize) -> Vec<usize> {
        (0..self.dim())
            .map(|a| {
                let k = idx % self.cells[a];
                idx /= self.cells[a];
                k
            })
            .collect()
    }

    pub fn cell_center(&self, cell: &[usize]) -> Vec<f64> {
        cell.iter()
            .enumerate()
            .map(|(a, &k)| 0.5 * (self.coord(a, k as f64) + self.coord(a, k as f64 + 1.0)))
            .collect()
    }

    pub fn cell_corners(&self, cell: &[usize]) -> Vec<Vec<f64>> {
        let d = self.dim();
        (0..1usize << d)
            .map(|bits| {
                (0..d)
                    .map(|a| self.coord(a, (cell[a] + ((bits >> a) & 1)) as f64))
                    .collect()
            })
            .collect()
    }

    /// Values at the `2^d` corners of a cell, corner bit `a` selecting the
    /// upper node along axis `a`.
    fn corner_values(&self, values: &[f64], cell: &[usize]) -> Vec<f64> {
        let d = self.dim();
        let mut multi = vec![0usize; d];
        (0..1usize << d)
            .map(|bits| {
                for a in 0..d {
                    multi[a] = cell[a] + ((bits >> a) & 1);
                }
                values[self.node_index(&multi)]
            })
            .collect()
    }
}

/// One non-empty cell of an extraction.
#[derive(Debug, Clone)]
pub struct CellPieces {
    pub cell: Vec<usize>,
    pub pieces: Pieces,
}

#[derive(Debug, Clone, Default)]
pub struct Extraction {
    pub cells: Vec<CellPieces>,
    /// Some cell inside the region has all corner values exactly zero.
    pub degenerate: bool,
}

impl Extraction {
    pub fn measure(&self) -> f64 {
        self.cells.iter().map(|c| c.pieces.measure()).sum()
    }

    pub fn into_pieces(self) -> Pieces {
        let mut out = Pieces::default();
        for c in self.cells {
            out.append(c.pieces);
        }
        out
    }
}

fn positive(v: f64) -> bool {
    v >= 0.0
}

fn lerp(a: &[f64], b: &[f64], va: f64, vb: f64) -> Vec<f64> {
    let t = va / (va - vb);
    a.iter().zip(b).map(|(p, q)| p + t * (q - p)).collect()
}

/// Extracts the zero set of the node `values` cell by cell, clipped to `hs`.
/// A zero value counts as positive, so a sign change is always strict on one
/// side and each crossing is found exactly once.
pub fn extract(grid: &NodeGrid, values: &[f64], hs: &[HalfSpace]) -> Extraction {
    assert_eq!(values.len(), grid.node_count());
    let d = grid.dim();
    let mut out = Extraction::default();
    for idx in 0..grid.cell_count() {
        let cell = grid.cell_multi(idx);
        let cv = grid.corner_values(values, &cell);
        let first = positive(cv[0]);
        if cv.iter().all(|&v| positive(v) == first) {
            if cv.iter().all(|&v| v == 0.0) {
                let c = grid.cell_center(&cell);
                if hs.iter().all(|h| h.eval(&c) >= 0.0) {
                    out.degenerate = true;
                }
            }
            continue;
        }
        let corners = grid.cell_corners(&cell);
        let pieces = match d {
            1 => Pieces {
                points: vec![lerp(&corners[0], &corners[1], cv[0], cv[1])],
                ..Default::default()
            },
            2 => squares(&corners, &cv),
            3 => tetrahedra(&corners, &cv),
            _ => unreachable!("extraction supports d <= 3"),
        };
        let pieces = pieces.clip(hs);
        if !pieces.is_empty() {
            out.cells.push(CellPieces { cell, pieces });
        }
    }
    out
}

fn squares(c: &[Vec<f64>], v: &[f64]) -> Pieces {
    // Corners counterclockwise: (0,0), (1,0), (1,1), (0,1).
    let ring = [0usize, 1, 3, 2];
    let mut crossings: Vec<(usize, Vec<f64>)> = Vec::with_capacity(4);
    for e in 0..4 {
        let (a, b) = (ring[e], ring[(e + 1) % 4]);
        if positive(v[a]) != positive(v[b]) {
            crossings.push((e, lerp(&c[a], &c[b], v[a], v[b])));
        }
    }
    let seg = |p: &Vec<f64>, q: &Vec<f64>| [[p[0], p[1]], [q[0], q[1]]];
    let mut segments = Vec::new();
    match crossings.len() {
        2 => segments.push(seg(&crossings[0].1, &crossings[1].1)),
        4 => {
            // Saddle: the centre value decides which diagonal pair connects.
            let centre = v.iter().sum::<f64>() / 4.0;
            if positive(centre) == positive(v[0]) {
                // Corners 0 and 2 of the ring connect through the centre;
                // cut off corners 1 and 3 instead.
                segments.push(seg(&crossings[0].1, &crossings[1].1));
                segments.push(seg(&crossings[2].1, &crossings[3].1));
            } else {
                segments.push(seg(&crossings[3].1, &crossings[0].1));
                segments.push(seg(&crossings[1].1, &crossings[2].1));
            }
        }
        _ => {}
    }
    Pieces {
        segments,
        ..Default::default()
    }
}

/// Corner index paths `0 -> e_a -> e_a + e_b -> 7` for the six axis orders.
const KUHN: [[usize; 4]; 6] = [
    [0, 1, 3, 7],
    [0, 1, 5, 7],
    [0, 2, 3, 7],
    [0, 2, 6, 7],
    [0, 4, 5, 7],
    [0, 4, 6, 7],
];

fn tetrahedra(c: &[Vec<f64>], v: &[f64]) -> Pieces {
    let mut triangles = Vec::new();
    for tet in KUHN {
        let (pos, neg): (Vec<usize>, Vec<usize>) = tet.iter().partition(|&&i| positive(v[i]));
        let cut = |a: usize, b: usize| to3(&lerp(&c[a], &c[b], v[a], v[b]));
        match (pos.len(), neg.len()) {
            (1, 3) => triangles.push([cut(pos[0], neg[0]), cut(pos[0], neg[1]), cut(pos[0], neg[2])]),
            (3, 1) => triangles.push([cut(neg[0], pos[0]), cut(neg[0], pos[1]), cut(neg[0], pos[2])]),
            (2, 2) => {
                let q = [
                    cut(pos[0], neg[0]),
                    cut(pos[0], neg[1]),
                    cut(pos[1], neg[1]),
                    cut(pos[1], neg[0]),
                ];
                triangles.push([q[0], q[1], q[2]]);
                triangles.push([q[0], q[2], q[3]]);
            }
            _ => {}
        }
    }
    Pieces {
        triangles,
        ..Default::default()
    }
}
