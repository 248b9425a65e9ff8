//! Junction geometry, its JSON format, and the cell grid built from it.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WallBc {
    Dirichlet,
    Neumann,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Face {
    Left,
    Right,
    Bottom,
    Top,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LeadEnd {
    /// Semi-infinite channel cut at this distance from the mouth.
    Truncated(f64),
    /// Finite channel of this length ending in a wall.
    Closed(f64),
}

impl LeadEnd {
    pub fn length(&self) -> f64 {
        match *self {
            LeadEnd::Truncated(l) | LeadEnd::Closed(l) => l,
        }
    }

    pub fn is_open(&self) -> bool {
        matches!(self, LeadEnd::Truncated(_))
    }
}

/// A channel attached to a face of one junction rectangle. Its mouth
/// (`t = 0`) is the face segment `[offset, offset + width]`; the transverse
/// coordinate increases along the face's `x` (top/bottom) or `y`
/// (left/right) direction.
#[derive(Debug, Clone, PartialEq)]
pub struct Lead {
    pub id: String,
    pub rect: usize,
    pub face: Face,
    pub offset: f64,
    pub width: f64,
    pub end: LeadEnd,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JunctionGeometry {
    /// `[x0, y0, x1, y1]`, union forms the junction region.
    pub rectangles: Vec<[f64; 4]>,
    pub wall: WallBc,
    pub leads: Vec<Lead>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LeadDocument {
    id: String,
    rect: usize,
    face: Face,
    #[serde(default)]
    offset: f64,
    width: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    length: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    truncated: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeometryDocument {
    rectangles: Vec<[f64; 4]>,
    wall: WallBc,
    leads: Vec<LeadDocument>,
}

impl JunctionGeometry {
    pub fn new(rectangles: Vec<[f64; 4]>, wall: WallBc, leads: Vec<Lead>) -> Result<Self> {
        let g = JunctionGeometry {
            rectangles,
            wall,
            leads,
        };
        g.validate()?;
        Ok(g)
    }

    fn validate(&self) -> Result<()> {
        if self.rectangles.is_empty() {
            return Err(Error::Schema(
                "geometry needs at least one rectangle".into(),
            ));
        }
        for (i, r) in self.rectangles.iter().enumerate() {
            if !(r[2] > r[0] && r[3] > r[1]) {
                return Err(Error::invariant(
                    "rectangle",
                    i.to_string(),
                    "needs x1 > x0 and y1 > y0",
                ));
            }
        }
        for l in &self.leads {
            let r = self.rectangles.get(l.rect).ok_or_else(|| {
                Error::invariant("lead", l.id.clone(), format!("no rectangle {}", l.rect))
            })?;
            let face_len = match l.face {
                Face::Left | Face::Right => r[3] - r[1],
                Face::Bottom | Face::Top => r[2] - r[0],
            };
            if !(l.width > 0.0 && l.offset >= 0.0 && l.offset + l.width <= face_len * (1.0 + 1e-12))
            {
                return Err(Error::invariant(
                    "lead",
                    l.id.clone(),
                    "mouth does not fit on its face",
                ));
            }
            match l.end {
                LeadEnd::Truncated(len) if !(len >= 2.0 * l.width) => {
                    return Err(Error::invariant(
                        "lead",
                        l.id.clone(),
                        format!("truncation length {len} is below twice the width"),
                    ))
                }
                LeadEnd::Closed(len) if !(len > 0.0) => {
                    return Err(Error::invariant(
                        "lead",
                        l.id.clone(),
                        "length must be positive",
                    ))
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let doc: GeometryDocument =
            serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        let leads = doc
            .leads
            .into_iter()
            .map(|l| {
                let end = match (l.length, l.truncated) {
                    (Some(len), None) => LeadEnd::Closed(len),
                    (None, Some(len)) => LeadEnd::Truncated(len),
                    _ => {
                        return Err(Error::Schema(format!(
                            "lead `{}` needs exactly one of `length` and `truncated`",
                            l.id
                        )))
                    }
                };
                Ok(Lead {
                    id: l.id,
                    rect: l.rect,
                    face: l.face,
                    offset: l.offset,
                    width: l.width,
                    end,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        JunctionGeometry::new(doc.rectangles, doc.wall, leads)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn to_json(&self) -> String {
        let doc = GeometryDocument {
            rectangles: self.rectangles.clone(),
            wall: self.wall,
            leads: self
                .leads
                .iter()
                .map(|l| LeadDocument {
                    id: l.id.clone(),
                    rect: l.rect,
                    face: l.face,
                    offset: l.offset,
                    width: l.width,
                    length: (!l.end.is_open()).then(|| l.end.length()),
                    truncated: l.end.is_open().then(|| l.end.length()),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("geometry documents always serialize")
    }

    fn lead(id: &str, face: Face, end: LeadEnd) -> Lead {
        Lead {
            id: id.into(),
            rect: 0,
            face,
            offset: 0.0,
            width: 1.0,
            end,
        }
    }

    /// Straight strip: a `length × 1` segment with collinear leads on both ends.
    pub fn straight(length: f64, truncation: f64) -> Result<Self> {
        Self::new(
            vec![[0.0, 0.0, length, 1.0]],
            WallBc::Dirichlet,
            vec![
                Self::lead("1", Face::Left, LeadEnd::Truncated(truncation)),
                Self::lead("2", Face::Right, LeadEnd::Truncated(truncation)),
            ],
        )
    }

    /// Unit-square junction with leads on the top (stem), left and right faces.
    pub fn t_junction(truncation: f64) -> Result<Self> {
        Self::new(
            vec![[0.0, 0.0, 1.0, 1.0]],
            WallBc::Dirichlet,
            vec![
                Self::lead("1", Face::Top, LeadEnd::Truncated(truncation)),
                Self::lead("2", Face::Left, LeadEnd::Truncated(truncation)),
                Self::lead("3", Face::Right, LeadEnd::Truncated(truncation)),
            ],
        )
    }

    /// Unit-square corner with leads on the left and bottom faces.
    pub fn l_bend(end: LeadEnd) -> Result<Self> {
        Self::new(
            vec![[0.0, 0.0, 1.0, 1.0]],
            WallBc::Dirichlet,
            vec![
                Self::lead("1", Face::Left, end),
                Self::lead("2", Face::Bottom, end),
            ],
        )
    }

    pub fn lead_index(&self, id: &str) -> Option<usize> {
        self.leads.iter().position(|l| l.id == id)
    }
}

// ---------------------------------------------------------------------------
// Grid.

#[derive(Debug, Clone)]
pub(crate) struct LeadGrid {
    pub open: bool,
    /// Cells across the channel.
    pub width_cells: usize,
    /// `cells[m][j]`: layer `m` from the mouth, transverse position `j`.
    pub cells: Vec<Vec<usize>>,
}

/// Cell-centered grid of a scaled geometry.
#[derive(Debug, Clone)]
pub(crate) struct Layout {
    pub h: f64,
    /// The operator is `scale² (−Δ_h)`.
    pub scale: f64,
    pub wall: WallBc,
    pub nx: usize,
    pub ny: usize,
    /// Dense bounding-box map to cell indices (`usize::MAX` outside).
    pub index: Vec<usize>,
    /// Grid coordinates (relative to the bounding box) of each cell.
    pub cells: Vec<(usize, usize)>,
    pub leads: Vec<LeadGrid>,
    /// `(lead, layer, transverse)` for lead cells.
    pub lead_of: Vec<Option<(usize, usize, usize)>>,
}

fn to_grid(v: f64, h: f64, what: &str) -> Result<i64> {
    let x = v / h;
    let r = x.round();
    if (x - r).abs() > 1e-6 {
        return Err(Error::Resolution(format!(
            "{what} = {v} is not a multiple of the spacing {h}"
        )));
    }
    Ok(r as i64)
}

impl Layout {
    /// Rectangles, offsets and widths are multiplied by `scale`, lead
    /// lengths by `length_scale`; the operator is `scale² (−Δ_h)`.
    pub fn new(geometry: &JunctionGeometry, scale: f64, length_scale: f64, h: f64) -> Result<Self> {
        if !(h > 0.0 && scale > 0.0 && length_scale > 0.0) {
            return Err(Error::OutOfRange(
                "spacing and scales must be positive".into(),
            ));
        }
        // integer rectangles [i0, j0, i1, j1)
        let mut rects: Vec<[i64; 4]> = Vec::new();
        for r in &geometry.rectangles {
            rects.push([
                to_grid(r[0] * scale, h, "rectangle coordinate")?,
                to_grid(r[1] * scale, h, "rectangle coordinate")?,
                to_grid(r[2] * scale, h, "rectangle coordinate")?,
                to_grid(r[3] * scale, h, "rectangle coordinate")?,
            ]);
        }
        let junction_count = rects.len();
        // lead cell (m, j) sits at origin + m·axis + j·trans
        struct Raw {
            axis: (i64, i64),
            trans: (i64, i64),
            origin: (i64, i64),
            w: i64,
            len: i64,
        }
        let mut raws = Vec::new();
        for l in &geometry.leads {
            let r = rects[l.rect];
            let off = to_grid(l.offset * scale, h, "lead offset")?;
            let w = to_grid(l.width * scale, h, "lead width")?;
            let len = to_grid(l.end.length() * length_scale, h, "lead length")?;
            if w < 1 || len < 1 {
                return Err(Error::Resolution(format!(
                    "lead `{}` is not resolved by the grid",
                    l.id
                )));
            }
            let (axis, trans, origin) = match l.face {
                Face::Left => ((-1, 0), (0, 1), (r[0] - 1, r[1] + off)),
                Face::Right => ((1, 0), (0, 1), (r[2], r[1] + off)),
                Face::Bottom => ((0, -1), (1, 0), (r[0] + off, r[1] - 1)),
                Face::Top => ((0, 1), (1, 0), (r[0] + off, r[3])),
            };
            // opposite corner of the w × len block
            let c2 = (
                origin.0 + axis.0 * (len - 1) + trans.0 * (w - 1),
                origin.1 + axis.1 * (len - 1) + trans.1 * (w - 1),
            );
            rects.push([
                origin.0.min(c2.0),
                origin.1.min(c2.1),
                origin.0.max(c2.0) + 1,
                origin.1.max(c2.1) + 1,
            ]);
            raws.push(Raw {
                axis,
                trans,
                origin,
                w,
                len,
            });
        }
        let bx0 = rects.iter().map(|r| r[0]).min().unwrap();
        let by0 = rects.iter().map(|r| r[1]).min().unwrap();
        let bx1 = rects.iter().map(|r| r[2]).max().unwrap();
        let by1 = rects.iter().map(|r| r[3]).max().unwrap();
        let nx = (bx1 - bx0) as usize;
        let ny = (by1 - by0) as usize;
        let mut owner = vec![usize::MAX; nx * ny];
        for (ri, r) in rects.iter().enumerate() {
            for i in r[0]..r[2] {
                for j in r[1]..r[3] {
                    let p = (i - bx0) as usize * ny + (j - by0) as usize;
                    if owner[p] != usize::MAX {
                        let both_junction = ri < junction_count && owner[p] < junction_count;
                        if !both_junction {
                            let who = if ri >= junction_count {
                                geometry.leads[ri - junction_count].id.clone()
                            } else {
                                format!("rectangle {ri}")
                            };
                            return Err(Error::invariant(
                                "lead",
                                who,
                                "overlaps another part of the domain",
                            ));
                        }
                        continue;
                    }
                    owner[p] = ri;
                }
            }
        }
        let mut index = vec![usize::MAX; nx * ny];
        let mut cells = Vec::new();
        for i in 0..nx {
            for j in 0..ny {
                let p = i * ny + j;
                if owner[p] != usize::MAX {
                    index[p] = cells.len();
                    cells.push((i, j));
                }
            }
        }
        let mut lead_of = vec![None; cells.len()];
        let mut leads = Vec::with_capacity(raws.len());
        for (k, (raw, l)) in raws.iter().zip(&geometry.leads).enumerate() {
            let mut layers = Vec::with_capacity(raw.len as usize);
            for m in 0..raw.len {
                let mut row = Vec::with_capacity(raw.w as usize);
                for j in 0..raw.w {
                    let gi = raw.origin.0 + raw.axis.0 * m + raw.trans.0 * j - bx0;
                    let gj = raw.origin.1 + raw.axis.1 * m + raw.trans.1 * j - by0;
                    let c = index[gi as usize * ny + gj as usize];
                    lead_of[c] = Some((k, m as usize, j as usize));
                    row.push(c);
                }
                layers.push(row);
            }
            leads.push(LeadGrid {
                open: l.end.is_open(),
                width_cells: raw.w as usize,
                cells: layers,
            });
        }
        Ok(Layout {
            h,
            scale,
            wall: geometry.wall,
            nx,
            ny,
            index,
            cells,
            leads,
            lead_of,
        })
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    fn neighbor(&self, c: usize, d: (i64, i64)) -> Option<usize> {
        let (i, j) = self.cells[c];
        let ni = i as i64 + d.0;
        let nj = j as i64 + d.1;
        if ni < 0 || nj < 0 || ni >= self.nx as i64 || nj >= self.ny as i64 {
            return None;
        }
        let idx = self.index[ni as usize * self.ny + nj as usize];
        (idx != usize::MAX).then_some(idx)
    }

    /// True if the missing neighbor of `c` in direction `d` lies beyond an
    /// open truncation face.
    fn is_open_face(&self, c: usize, d: (i64, i64)) -> bool {
        match self.lead_of[c] {
            Some((k, m, _)) => {
                let lead = &self.leads[k];
                if !lead.open || m + 1 != lead.cells.len() {
                    return false;
                }
                // the outward axis direction is the one from layer m−1 (or the
                // mouth side) toward layer m
                self.neighbor(c, d).is_none() && self.axis_of(k) == d
            }
            None => false,
        }
    }

    fn axis_of(&self, k: usize) -> (i64, i64) {
        let lead = &self.leads[k];
        let a = self.cells[lead.cells[0][0]];
        if lead.cells.len() > 1 {
            let b = self.cells[lead.cells[1][0]];
            (b.0 as i64 - a.0 as i64, b.1 as i64 - a.1 as i64)
        } else {
            // single layer: the axis is the direction with no in-domain
            // neighbor opposite to the mouth
            for d in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
                let opp = (-d.0, -d.1);
                if self.neighbor(lead.cells[0][0], d).is_none()
                    && self
                        .neighbor(lead.cells[0][0], opp)
                        .is_some_and(|n| self.lead_of[n].is_none())
                {
                    return d;
                }
            }
            (0, 0)
        }
    }

    /// Triplets of `scale² (−Δ_h)` with wall ghosts; open faces get no
    /// ghost contribution (the caller adds the radiation condition).
    pub fn laplacian(&self) -> Vec<(usize, usize, f64)> {
        let w = self.scale * self.scale / (self.h * self.h);
        let wall_sign = match self.wall {
            WallBc::Dirichlet => 1.0,
            WallBc::Neumann => -1.0,
        };
        let mut t = Vec::with_capacity(self.len() * 5);
        for c in 0..self.len() {
            let mut diag = 4.0 * w;
            for d in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
                match self.neighbor(c, d) {
                    Some(n) => t.push((c, n, -w)),
                    None if self.is_open_face(c, d) => {}
                    None => diag += wall_sign * w,
                }
            }
            t.push((c, c, diag));
        }
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_round_trip() {
        let text = r#"{"rectangles": [[0,0,1,1]], "wall": "dirichlet",
            "leads": [{"id": "a", "rect": 0, "face": "left", "width": 1, "truncated": 2},
                      {"id": "b", "rect": 0, "face": "top", "offset": 0, "width": 1, "length": 1.5}]}"#;
        let g = JunctionGeometry::parse(text).unwrap();
        assert_eq!(g.leads[1].end, LeadEnd::Closed(1.5));
        assert_eq!(JunctionGeometry::parse(&g.to_json()).unwrap(), g);
    }

    #[test]
    fn rejects_short_truncation_and_bad_mouth() {
        assert!(JunctionGeometry::straight(1.0, 1.0).is_err());
        let bad = r#"{"rectangles": [[0,0,1,1]], "wall": "dirichlet",
            "leads": [{"id": "a", "rect": 0, "face": "left", "offset": 0.5, "width": 1, "truncated": 2}]}"#;
        assert!(JunctionGeometry::parse(bad).is_err());
    }

    #[test]
    fn t_junction_grid() {
        let g = JunctionGeometry::t_junction(2.0).unwrap();
        let l = Layout::new(&g, 1.0, 1.0, 0.25).unwrap();
        assert_eq!(l.len(), 16 + 3 * 4 * 8);
        for (k, lead) in l.leads.iter().enumerate() {
            assert_eq!(lead.cells.len(), 8);
            assert_eq!(lead.width_cells, 4);
            let far = lead.cells[7][0];
            let axis = l.axis_of(k);
            assert!(l.is_open_face(far, axis));
        }
        assert!(Layout::new(&g, 1.0, 1.0, 0.3).is_err());
    }

    #[test]
    fn laplacian_rows_sum_to_wall_terms() {
        // closed rectangle: row sums are the ghost contributions only
        let g = JunctionGeometry::new(vec![[0.0, 0.0, 2.0, 1.0]], WallBc::Neumann, vec![]).unwrap();
        let l = Layout::new(&g, 1.0, 1.0, 0.5).unwrap();
        let mut sums = vec![0.0; l.len()];
        for (r, _, v) in l.laplacian() {
            sums[r] += v;
        }
        assert!(sums.iter().all(|s| s.abs() < 1e-12));
    }
}
