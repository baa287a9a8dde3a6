//! Occupancy map, UAV pose and straight-line motion.
//!
//! Coordinates are meters with +x to the right and +y up. Cell `(col, row)`
//! covers `[col*c, (col+1)*c) x [row*c, (row+1)*c)` where `c` is the cell
//! size and row 0 is the bottom of the map. Everything outside the grid is
//! treated as wall.

use std::collections::VecDeque;
use std::f64::consts::FRAC_PI_4;
use std::fmt;

/// Default map: 75 m x 120 m synthetic floor with 2 m aisles.
pub const DEFAULT_MAP: &str = include_str!("../maps/default.map");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cell {
    Free,
    Wall,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Pose {
    pub x_m: f64,
    pub y_m: f64,
}

impl Pose {
    pub fn new(x_m: f64, y_m: f64) -> Self {
        Self { x_m, y_m }
    }

    pub fn distance_to(&self, other: &Pose) -> f64 {
        (self.x_m - other.x_m).hypot(self.y_m - other.y_m)
    }

    /// Point at fraction `t` of the way from `self` to `other`.
    pub fn lerp(&self, other: &Pose, t: f64) -> Pose {
        Pose {
            x_m: self.x_m + (other.x_m - self.x_m) * t,
            y_m: self.y_m + (other.y_m - self.y_m) * t,
        }
    }
}

/// One of eight headings. Index `k` points `k * 45` degrees counterclockwise
/// from +x.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct ActionId(u8);

impl ActionId {
    pub const COUNT: usize = 8;

    pub fn new(index: usize) -> Option<Self> {
        (index < Self::COUNT).then_some(Self(index as u8))
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn heading_rad(self) -> f64 {
        self.0 as f64 * FRAC_PI_4
    }

    pub fn all() -> impl Iterator<Item = ActionId> {
        (0..Self::COUNT as u8).map(ActionId)
    }

    /// Unit displacement for this heading. Axis-aligned and diagonal
    /// components are exact so that straight moves stay on cell centers.
    pub fn direction(self) -> (f64, f64) {
        const D: f64 = std::f64::consts::FRAC_1_SQRT_2;
        match self.0 {
            0 => (1.0, 0.0),
            1 => (D, D),
            2 => (0.0, 1.0),
            3 => (-D, D),
            4 => (-1.0, 0.0),
            5 => (-D, -D),
            6 => (0.0, -1.0),
            _ => (D, -D),
        }
    }
}

impl fmt::Display for ActionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Result of trying to fly a straight segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Move {
    Moved(Pose),
    Blocked,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MapError {
    #[error("line {line}: bad header: {reason}")]
    Header { line: usize, reason: String },
    #[error("line {line}: expected {expected} cells, found {found}")]
    RaggedRow { line: usize, expected: usize, found: usize },
    #[error("expected {expected} grid rows, found {found}")]
    RowCount { expected: usize, found: usize },
    #[error("line {line}, column {column}: unexpected character {ch:?}")]
    BadChar { line: usize, column: usize, ch: char },
    #[error("line {line}, column {column}: trailing content after the grid")]
    TrailingContent { line: usize, column: usize },
    #[error("missing {0:?} marker")]
    MissingMarker(char),
    #[error(
        "line {line}, column {column}: duplicate {ch:?} marker (first at line {first_line}, column {first_column})"
    )]
    DuplicateMarker {
        ch: char,
        line: usize,
        column: usize,
        first_line: usize,
        first_column: usize,
    },
    #[error("{what} at ({x_m}, {y_m}) is not in a free cell")]
    MarkerInWall { what: &'static str, x_m: f64, y_m: f64 },
    #[error("line {line}, column {column}: source is not reachable from the start at line {start_line}, column {start_column}")]
    Disconnected {
        line: usize,
        column: usize,
        start_line: usize,
        start_column: usize,
    },
}

/// Validated occupancy grid with start and source positions. Immutable after
/// construction.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyMap {
    width: usize,
    height: usize,
    cell_size_m: f64,
    /// Row-major, row 0 at the bottom.
    cells: Vec<Cell>,
    start: Pose,
    source: Pose,
}

impl OccupancyMap {
    /// Builds a map from row-major cells (row 0 at the bottom) and checks
    /// every invariant.
    pub fn from_cells(
        width: usize,
        height: usize,
        cell_size_m: f64,
        cells: Vec<Cell>,
        start: Pose,
        source: Pose,
    ) -> Result<Self, MapError> {
        if width == 0 || height == 0 {
            return Err(MapError::Header {
                line: 1,
                reason: "width and height must be positive".into(),
            });
        }
        if !(cell_size_m.is_finite() && cell_size_m > 0.0) {
            return Err(MapError::Header {
                line: 1,
                reason: "cell size must be positive".into(),
            });
        }
        assert_eq!(cells.len(), width * height, "cell vector does not match extent");
        let map = Self {
            width,
            height,
            cell_size_m,
            cells,
            start,
            source,
        };
        for (what, p) in [("start", start), ("source", source)] {
            if !map.is_free_point(&p) {
                return Err(MapError::MarkerInWall {
                    what,
                    x_m: p.x_m,
                    y_m: p.y_m,
                });
            }
        }
        let s = map.cell_of(&start).expect("checked above");
        let t = map.cell_of(&source).expect("checked above");
        if !map.connected(s, t) {
            return Err(MapError::Disconnected {
                line: map.height - t.1 + 1,
                column: t.0 + 1,
                start_line: map.height - s.1 + 1,
                start_column: s.0 + 1,
            });
        }
        Ok(map)
    }

    pub fn width_cells(&self) -> usize {
        self.width
    }

    pub fn height_cells(&self) -> usize {
        self.height
    }

    pub fn cell_size_m(&self) -> f64 {
        self.cell_size_m
    }

    pub fn width_m(&self) -> f64 {
        self.width as f64 * self.cell_size_m
    }

    pub fn height_m(&self) -> f64 {
        self.height as f64 * self.cell_size_m
    }

    pub fn start(&self) -> Pose {
        self.start
    }

    pub fn source(&self) -> Pose {
        self.source
    }

    /// Ground-truth distance from `pose` to the source.
    pub fn distance_to_source(&self, pose: &Pose) -> f64 {
        pose.distance_to(&self.source)
    }

    /// Number of free cells.
    pub fn free_cells(&self) -> usize {
        self.cells.iter().filter(|c| **c == Cell::Free).count()
    }

    /// Cell at `(col, row)`, or `Wall` outside the grid.
    pub fn cell(&self, col: i64, row: i64) -> Cell {
        if col < 0 || row < 0 || col as usize >= self.width || row as usize >= self.height {
            return Cell::Wall;
        }
        self.cells[row as usize * self.width + col as usize]
    }

    fn cell_of(&self, p: &Pose) -> Option<(usize, usize)> {
        let col = (p.x_m / self.cell_size_m).floor();
        let row = (p.y_m / self.cell_size_m).floor();
        if !(col.is_finite() && row.is_finite()) || col < 0.0 || row < 0.0 {
            return None;
        }
        let (col, row) = (col as usize, row as usize);
        (col < self.width && row < self.height).then_some((col, row))
    }

    /// True if `p` lies in a free cell of the grid.
    pub fn is_free_point(&self, p: &Pose) -> bool {
        self.cell_of(p)
            .is_some_and(|(c, r)| self.cells[r * self.width + c] == Cell::Free)
    }

    fn connected(&self, from: (usize, usize), to: (usize, usize)) -> bool {
        let mut seen = vec![false; self.cells.len()];
        let mut queue = VecDeque::from([from]);
        seen[from.1 * self.width + from.0] = true;
        while let Some((c, r)) = queue.pop_front() {
            if (c, r) == to {
                return true;
            }
            let neighbours = [(c.wrapping_sub(1), r), (c + 1, r), (c, r.wrapping_sub(1)), (c, r + 1)];
            for (nc, nr) in neighbours {
                if nc >= self.width || nr >= self.height {
                    continue;
                }
                let idx = nr * self.width + nc;
                if !seen[idx] && self.cells[idx] == Cell::Free {
                    seen[idx] = true;
                    queue.push_back((nc, nr));
                }
            }
        }
        false
    }

    /// Serializes back to the text map format.
    pub fn to_text(&self) -> String {
        let start = self.cell_of(&self.start);
        let source = self.cell_of(&self.source);
        let mut out = format!("{} {} {}\n", self.width, self.height, fmt_cell_size(self.cell_size_m));
        for row in (0..self.height).rev() {
            for col in 0..self.width {
                let ch = if Some((col, row)) == source {
                    'S'
                } else if Some((col, row)) == start {
                    'U'
                } else {
                    match self.cells[row * self.width + col] {
                        Cell::Free => '.',
                        Cell::Wall => '#',
                    }
                };
                out.push(ch);
            }
            out.push('\n');
        }
        out
    }
}

fn fmt_cell_size(c: f64) -> String {
    let s = format!("{c}");
    if s.contains('.') {
        s
    } else {
        format!("{s}.0")
    }
}

/// Parses the text map format.
///
/// ```text
/// width_cells height_cells cell_size_m
/// <height_cells rows of width_cells chars from "#.SU", top row first>
/// ```
///
/// `S` and `U` mark the source and start cells (both free) and must each
/// appear exactly once. Poses are placed at cell centers.
pub fn parse_map(text: &str) -> Result<OccupancyMap, MapError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r')));

    let (hline, header) = lines.next().ok_or_else(|| MapError::Header {
        line: 1,
        reason: "empty input".into(),
    })?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let header_err = |reason: &str| MapError::Header {
        line: hline,
        reason: reason.to_string(),
    };
    if fields.len() != 3 {
        return Err(header_err("expected `width_cells height_cells cell_size_m`"));
    }
    let width: usize = fields[0]
        .parse()
        .map_err(|_| header_err("width_cells is not a non-negative integer"))?;
    let height: usize = fields[1]
        .parse()
        .map_err(|_| header_err("height_cells is not a non-negative integer"))?;
    let cell_size: f64 = fields[2]
        .parse()
        .map_err(|_| header_err("cell_size_m is not a number"))?;
    if width == 0 || height == 0 {
        return Err(header_err("width and height must be positive"));
    }
    if !(cell_size.is_finite() && cell_size > 0.0) {
        return Err(header_err("cell_size_m must be positive"));
    }

    let mut cells = vec![Cell::Wall; width * height];
    let mut start: Option<(usize, usize, usize, usize)> = None;
    let mut source: Option<(usize, usize, usize, usize)> = None;
    let mut rows_seen = 0;
    for (line_no, line) in lines.by_ref() {
        if rows_seen == height {
            if let Some(col) = line.find(|c: char| !c.is_whitespace()) {
                return Err(MapError::TrailingContent {
                    line: line_no,
                    column: col + 1,
                });
            }
            continue;
        }
        let chars: Vec<char> = line.chars().collect();
        if chars.len() != width {
            return Err(MapError::RaggedRow {
                line: line_no,
                expected: width,
                found: chars.len(),
            });
        }
        let row = height - 1 - rows_seen;
        for (col, ch) in chars.into_iter().enumerate() {
            let cell = match ch {
                '#' => Cell::Wall,
                '.' => Cell::Free,
                'S' | 'U' => {
                    let slot = if ch == 'S' { &mut source } else { &mut start };
                    if let Some((_, _, fl, fc)) = *slot {
                        return Err(MapError::DuplicateMarker {
                            ch,
                            line: line_no,
                            column: col + 1,
                            first_line: fl,
                            first_column: fc,
                        });
                    }
                    *slot = Some((col, row, line_no, col + 1));
                    Cell::Free
                }
                other => {
                    return Err(MapError::BadChar {
                        line: line_no,
                        column: col + 1,
                        ch: other,
                    })
                }
            };
            cells[row * width + col] = cell;
        }
        rows_seen += 1;
    }
    if rows_seen != height {
        return Err(MapError::RowCount {
            expected: height,
            found: rows_seen,
        });
    }
    let (sc, sr, ..) = start.ok_or(MapError::MissingMarker('U'))?;
    let (tc, tr, ..) = source.ok_or(MapError::MissingMarker('S'))?;
    let center = |c: usize, r: usize| Pose::new((c as f64 + 0.5) * cell_size, (r as f64 + 0.5) * cell_size);
    OccupancyMap::from_cells(width, height, cell_size, cells, center(sc, sr), center(tc, tr))
}

/// The bundled 75 m x 120 m map.
pub fn default_map() -> OccupancyMap {
    parse_map(DEFAULT_MAP).expect("bundled map is valid")
}

/// True iff the closed segment `p0 -> p1` touches no wall cell.
///
/// Conservative supercover: a cell counts as touched when its closed square
/// meets the segment, so grazing a wall edge or corner blocks the move.
pub fn is_segment_free(map: &OccupancyMap, p0: &Pose, p1: &Pose) -> bool {
    let c = map.cell_size_m;
    let (x0, y0) = (p0.x_m / c, p0.y_m / c);
    let (x1, y1) = (p1.x_m / c, p1.y_m / c);
    if ![x0, y0, x1, y1].iter().all(|v| v.is_finite()) {
        return false;
    }
    let (w, h) = (map.width as f64, map.height as f64);
    // Anything reaching the outer edge touches the implicit wall outside.
    let inside = |x: f64, y: f64| x > 0.0 && y > 0.0 && x < w && y < h;
    if !inside(x0, y0) || !inside(x1, y1) {
        return false;
    }

    let (xa, ya, xb, yb) = if x0 <= x1 { (x0, y0, x1, y1) } else { (x1, y1, x0, y0) };
    let dx = xb - xa;
    let y_at = |x: f64| {
        if dx == 0.0 {
            ya
        } else {
            ya + (yb - ya) * ((x - xa) / dx)
        }
    };

    let col_lo = xa.ceil() as i64 - 1;
    let col_hi = xb.floor() as i64;
    for col in col_lo..=col_hi {
        let (sx0, sx1) = (xa.max(col as f64), xb.min(col as f64 + 1.0));
        if sx0 > sx1 {
            continue;
        }
        let (ys0, ys1) = if dx == 0.0 { (ya, yb) } else { (y_at(sx0), y_at(sx1)) };
        let (ylo, yhi) = (ys0.min(ys1), ys0.max(ys1));
        let row_lo = ylo.ceil() as i64 - 1;
        let row_hi = yhi.floor() as i64;
        for row in row_lo..=row_hi {
            if map.cell(col, row) == Cell::Wall {
                return false;
            }
        }
    }
    true
}

/// Flies `distance_m` along `action` from `pose`. No partial moves: a
/// blocked segment leaves the pose where it was.
pub fn apply_action(map: &OccupancyMap, pose: &Pose, action: ActionId, distance_m: f64) -> Move {
    let candidate = target_of(pose, action, distance_m);
    if is_segment_free(map, pose, &candidate) {
        Move::Moved(candidate)
    } else {
        Move::Blocked
    }
}

/// Longest clear distance, at most `max_m`, along `action` from `pose`.
pub fn free_run_m(map: &OccupancyMap, pose: &Pose, action: ActionId, max_m: f64) -> f64 {
    if is_segment_free(map, pose, &target_of(pose, action, max_m)) {
        return max_m;
    }
    // Clearance along a ray is monotone, so bisect on the distance.
    let (mut lo, mut hi) = (0.0, max_m);
    for _ in 0..48 {
        let mid = 0.5 * (lo + hi);
        if is_segment_free(map, pose, &target_of(pose, action, mid)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// End point of a straight move, regardless of obstacles.
pub fn target_of(pose: &Pose, action: ActionId, distance_m: f64) -> Pose {
    let (ux, uy) = action.direction();
    Pose::new(pose.x_m + distance_m * ux, pose.y_m + distance_m * uy)
}


#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    fn arb_map() -> impl Strategy<Value = OccupancyMap> {
        (
            4usize..12,
            4usize..12,
            prop::collection::vec(prop::bool::weighted(0.25), 144),
        )
            .prop_filter_map("needs a connected free pair", |(w, h, walls)| {
                let mut cells: Vec<Cell> = (0..w * h)
                    .map(|i| if walls[i] { Cell::Wall } else { Cell::Free })
                    .collect();
                cells[0] = Cell::Free;
                let last = w * h - 1;
                cells[last] = Cell::Free;
                OccupancyMap::from_cells(
                    w,
                    h,
                    0.5,
                    cells,
                    Pose::new(0.25, 0.25),
                    Pose::new((w as f64 - 0.5) * 0.5, (h as f64 - 0.5) * 0.5),
                )
                .ok()
            })
    }

    /// Dense sampling along the segment: every sampled point must be free.
    fn sampled_clear(m: &OccupancyMap, a: &Pose, b: &Pose) -> bool {
        (0..=2000).all(|k| m.is_free_point(&a.lerp(b, k as f64 / 2000.0)))
    }

    proptest! {
        #[test]
        fn moves_never_end_in_walls(
            m in arb_map(),
            fx in 0.0f64..1.0,
            fy in 0.0f64..1.0,
            a in 0usize..8,
            d in 0.0f64..6.0,
        ) {
            let p = Pose::new(fx * m.width_m(), fy * m.height_m());
            prop_assume!(m.is_free_point(&p));
            match apply_action(&m, &p, ActionId::new(a).unwrap(), d) {
                Move::Moved(q) => {
                    prop_assert!(m.is_free_point(&q));
                    prop_assert!(sampled_clear(&m, &p, &q));
                }
                Move::Blocked => {}
            }
        }

        #[test]
        fn free_verdict_implies_sampled_clearance(
            m in arb_map(),
            coords in prop::array::uniform4(0.0f64..1.0),
        ) {
            let p = Pose::new(coords[0] * m.width_m(), coords[1] * m.height_m());
            let q = Pose::new(coords[2] * m.width_m(), coords[3] * m.height_m());
            prop_assume!(m.is_free_point(&p));
            if is_segment_free(&m, &p, &q) {
                prop_assert!(sampled_clear(&m, &p, &q));
            }
        }
    }
}
