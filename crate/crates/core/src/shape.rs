//! Named colors and the convex shapes used by the synthetic scenes and the
//! built-in backends. Shapes are rasterized at integer pixel centers.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    Red,
    Green,
    Blue,
    Yellow,
    White,
}

impl Color {
    pub const ALL: [Color; 5] = [
        Color::Red,
        Color::Green,
        Color::Blue,
        Color::Yellow,
        Color::White,
    ];

    pub fn rgb(self) -> [u8; 3] {
        match self {
            Color::Red => [255, 0, 0],
            Color::Green => [0, 255, 0],
            Color::Blue => [0, 0, 255],
            Color::Yellow => [255, 255, 0],
            Color::White => [255, 255, 255],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Color::Red => "red",
            Color::Green => "green",
            Color::Blue => "blue",
            Color::Yellow => "yellow",
            Color::White => "white",
        }
    }

    pub fn from_rgb(rgb: [u8; 3]) -> Option<Color> {
        Color::ALL.into_iter().find(|c| c.rgb() == rgb)
    }
}

impl FromStr for Color {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        Color::ALL.into_iter().find(|c| c.name() == s).ok_or(())
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Circle,
    Square,
    Triangle,
}

impl Shape {
    pub const ALL: [Shape; 3] = [Shape::Circle, Shape::Square, Shape::Triangle];

    pub fn name(self) -> &'static str {
        match self {
            Shape::Circle => "circle",
            Shape::Square => "square",
            Shape::Triangle => "triangle",
        }
    }

    /// Whether the pixel center `(x, y)` lies inside the shape centered at
    /// `(cx, cy)` with characteristic size `size`: the radius of a circle,
    /// the half side of a square, the circumradius of an upward triangle.
    pub fn contains(self, cx: f64, cy: f64, size: f64, x: f64, y: f64) -> bool {
        let dx = x - cx;
        let dy = y - cy;
        match self {
            Shape::Circle => dx * dx + dy * dy <= size * size,
            Shape::Square => dx.abs() <= size && dy.abs() <= size,
            Shape::Triangle => {
                let h = size * 3f64.sqrt() / 2.0;
                let a = (0.0, -size);
                let b = (h, size / 2.0);
                let c = (-h, size / 2.0);
                let edge = |p: (f64, f64), q: (f64, f64)| {
                    (q.0 - p.0) * (dy - p.1) - (q.1 - p.1) * (dx - p.0)
                };
                edge(a, b) >= 0.0 && edge(b, c) >= 0.0 && edge(c, a) >= 0.0
            }
        }
    }

    /// Axis-aligned bounds `(x0, y0, x1, y1)` of the shape, inclusive.
    pub fn bounds(self, cx: f64, cy: f64, size: f64) -> (f64, f64, f64, f64) {
        (cx - size, cy - size, cx + size, cy + size)
    }
}

impl FromStr for Shape {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        Shape::ALL.into_iter().find(|c| c.name() == s).ok_or(())
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Calls `visit(x, y)` for every in-frame pixel covered by the shape.
pub fn rasterize(
    shape: Shape,
    cx: f64,
    cy: f64,
    size: f64,
    width: usize,
    height: usize,
    mut visit: impl FnMut(usize, usize),
) {
    let (x0, y0, x1, y1) = shape.bounds(cx, cy, size);
    let xa = (x0.floor() as i64).max(0);
    let xb = (x1.ceil() as i64).min(width as i64 - 1);
    let ya = (y0.floor() as i64).max(0);
    let yb = (y1.ceil() as i64).min(height as i64 - 1);
    for y in ya..=yb {
        for x in xa..=xb {
            if shape.contains(cx, cy, size, x as f64, y as f64) {
                visit(x as usize, y as usize);
            }
        }
    }
}

/// Pixel count of the shape on an unbounded grid.
pub fn full_area(shape: Shape, cx: f64, cy: f64, size: f64) -> usize {
    let (x0, y0, x1, y1) = shape.bounds(cx, cy, size);
    let mut n = 0;
    for y in (y0.floor() as i64)..=(y1.ceil() as i64) {
        for x in (x0.floor() as i64)..=(x1.ceil() as i64) {
            if shape.contains(cx, cy, size, x as f64, y as f64) {
                n += 1;
            }
        }
    }
    n
}
