//! Splitting a local 2D offset across the nine kernel selections.
//!
//! Two schemes are provided. Angular interpolation distributes an edge
//! over the two compass directions that flank it, weighting each by the
//! angle to the other. Barycentric interpolation places the offset inside
//! one of the eight right triangles tiling the 3x3 kernel square (legs of
//! length `d`) and uses the barycentric coordinates of that triangle;
//! folding `|p|` into the canonical triangle `(0,0), (d,0), (d,d)` gives
//! closed forms with no linear solve.

use std::f64::consts::{FRAC_PI_4, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Vec2;

/// Kernel tap, in the fixed global order used by graphs and weight transfer.
///
/// Directions are in the local frame with x to the right and y up.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum Selection {
    Center = 0,
    E = 1,
    NE = 2,
    N = 3,
    NW = 4,
    W = 5,
    SW = 6,
    S = 7,
    SE = 8,
}

impl Selection {
    pub const COUNT: usize = 9;

    pub const ALL: [Selection; 9] = [
        Selection::Center,
        Selection::E,
        Selection::NE,
        Selection::N,
        Selection::NW,
        Selection::W,
        Selection::SW,
        Selection::S,
        Selection::SE,
    ];

    pub fn from_index(i: usize) -> Option<Selection> {
        Self::ALL.get(i).copied()
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// Integer step `(dx, dy)` with y up; `(0, 0)` for the center.
    pub fn step(self) -> (i32, i32) {
        match self {
            Selection::Center => (0, 0),
            Selection::E => (1, 0),
            Selection::NE => (1, 1),
            Selection::N => (0, 1),
            Selection::NW => (-1, 1),
            Selection::W => (-1, 0),
            Selection::SW => (-1, -1),
            Selection::S => (0, -1),
            Selection::SE => (1, -1),
        }
    }

    pub fn from_step(dx: i32, dy: i32) -> Option<Selection> {
        Self::ALL.iter().copied().find(|s| s.step() == (dx, dy))
    }

    /// Direction `k` in `1..=8` sits at angle `(k - 1) * 45deg`.
    fn direction(k: usize) -> Selection {
        Self::ALL[(k % 8) + 1]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interpolation {
    Angular,
    Barycentric,
}

impl std::str::FromStr for Interpolation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "angular" => Ok(Interpolation::Angular),
            "barycentric" => Ok(Interpolation::Barycentric),
            other => Err(Error::InvalidParam(format!(
                "unknown interpolation scheme {other:?}"
            ))),
        }
    }
}

impl std::fmt::Display for Interpolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Interpolation::Angular => "angular",
            Interpolation::Barycentric => "barycentric",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Weighted {
    pub selection: Selection,
    pub weight: f64,
}

/// One to three distinct selections with convex weights.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct InterpolationResult {
    pub entries: Vec<Weighted>,
}

impl InterpolationResult {
    fn push(&mut self, selection: Selection, weight: f64) {
        self.entries.push(Weighted { selection, weight });
    }

    pub fn single(selection: Selection) -> Self {
        InterpolationResult {
            entries: vec![Weighted {
                selection,
                weight: 1.0,
            }],
        }
    }

    pub fn weight_of(&self, selection: Selection) -> f64 {
        self.entries
            .iter()
            .filter(|e| e.selection == selection)
            .map(|e| e.weight)
            .sum()
    }

    /// Dense view indexed by selection.
    pub fn to_array(&self) -> [f64; 9] {
        let mut out = [0.0; 9];
        for e in &self.entries {
            out[e.selection.index()] += e.weight;
        }
        out
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().map(|e| e.weight).sum()
    }
}

/// Angular interpolation between the two compass directions flanking `p`.
///
/// Always returns two entries; when `p` is exactly on a direction the
/// second (counter-clockwise) neighbour carries weight 0.
pub fn angular_weights(p: Vec2) -> Result<InterpolationResult> {
    if p[0].hypot(p[1]) <= f64::EPSILON {
        return Err(Error::ZeroVector);
    }
    let mut alpha = p[1].atan2(p[0]);
    if alpha < 0.0 {
        alpha += TAU;
    }
    let mut sector = (alpha / FRAC_PI_4).floor() as usize;
    if sector >= 8 {
        sector = 0;
        alpha = 0.0;
    }
    let theta_a = (alpha - sector as f64 * FRAC_PI_4).clamp(0.0, FRAC_PI_4);
    let theta_b = FRAC_PI_4 - theta_a;
    let w_a = theta_b / (theta_a + theta_b);
    let mut out = InterpolationResult::default();
    out.push(Selection::direction(sector), w_a);
    out.push(Selection::direction(sector + 1), 1.0 - w_a);
    Ok(out)
}

/// Barycentric interpolation inside the 3x3 kernel square of half-width `d`.
///
/// Offsets outside the square are pulled radially onto its boundary.
/// Zero-weight entries are omitted.
pub fn barycentric_weights(p: Vec2, d: f64) -> Result<InterpolationResult> {
    if !(d > 0.0) {
        return Err(Error::NonPositiveSpacing(d));
    }
    let mut ax = p[0].abs();
    let mut ay = p[1].abs();
    let m = ax.max(ay);
    if m > d {
        let s = d / m;
        if ax >= ay {
            ax = d;
            ay *= s;
        } else {
            ay = d;
            ax *= s;
        }
    }
    let x_dominant = ax >= ay;
    let (u, v) = if x_dominant { (ax, ay) } else { (ay, ax) };

    let w0 = 1.0 - u / d;
    let wa = (u - v) / d;
    let wb = v / d;

    let sx = if p[0] >= 0.0 { 1 } else { -1 };
    let sy = if p[1] >= 0.0 { 1 } else { -1 };
    let cardinal = if x_dominant {
        Selection::from_step(sx, 0)
    } else {
        Selection::from_step(0, sy)
    }
    .expect("cardinal step");
    let ordinal = Selection::from_step(sx, sy).expect("ordinal step");

    let mut out = InterpolationResult::default();
    for (sel, w) in [(Selection::Center, w0), (cardinal, wa), (ordinal, wb)] {
        if w > 0.0 {
            out.push(sel, w);
        }
    }
    Ok(out)
}

pub fn assign_selections(p: Vec2, scheme: Interpolation, d: f64) -> Result<InterpolationResult> {
    match scheme {
        Interpolation::Angular => angular_weights(p),
        Interpolation::Barycentric => barycentric_weights(p, d),
    }
}
