//! Procedural referring-VOS scenes with exact ground truth.
//!
//! Objects are solid convex shapes on a dark gray background, drawn in list
//! order; occluders (solid rectangles) are drawn last. The target's ground
//! truth is its raster minus every pixel painted over it. Per-pixel noise is
//! added after ground truth is taken.

pub mod lcg;
mod scenario;

use std::f64::consts::TAU;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{write_frame_dir, write_mask_dir};
use crate::mask::BinaryMask;
use crate::shape::{full_area, rasterize, Color, Shape};
use crate::types::{Frame, MaskSequence, VideoSequence};

pub use lcg::Lcg;
pub use scenario::{scenario, SCENARIOS};

pub const BACKGROUND: [u8; 3] = [32, 32, 32];
pub const MAX_NOISE: u8 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Trajectory {
    Linear {
        x0: f64,
        y0: f64,
        vx: f64,
        vy: f64,
    },
    Sinusoidal {
        x0: f64,
        y0: f64,
        ax: f64,
        ay: f64,
        period: f64,
        phase: f64,
    },
}

impl Trajectory {
    pub fn still(x: f64, y: f64) -> Self {
        Trajectory::Linear {
            x0: x,
            y0: y,
            vx: 0.0,
            vy: 0.0,
        }
    }

    /// Center at 1-based frame `t`.
    pub fn at(&self, t: usize) -> (f64, f64) {
        let s = (t - 1) as f64;
        match *self {
            Trajectory::Linear { x0, y0, vx, vy } => (x0 + vx * s, y0 + vy * s),
            Trajectory::Sinusoidal {
                x0,
                y0,
                ax,
                ay,
                period,
                phase,
            } => {
                let a = TAU * s / period + phase;
                (x0 + ax * a.sin(), y0 + ay * a.sin())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneObject {
    pub rgb: [u8; 3],
    pub shape: Shape,
    /// Circle radius, square half side, or triangle circumradius.
    pub size: f64,
    pub trajectory: Trajectory,
    pub entry_frame: usize,
    pub exit_frame: usize,
}

impl SceneObject {
    pub fn visible_at(&self, t: usize) -> bool {
        (self.entry_frame..=self.exit_frame).contains(&t)
    }
}

/// Axis-aligned rectangle covering pixel centers in `[x, x + w) x [y, y + h)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Occluder {
    pub rgb: [u8; 3],
    pub x0: f64,
    pub y0: f64,
    pub width: f64,
    pub height: f64,
    pub vx: f64,
    pub vy: f64,
}

impl Occluder {
    fn covers(&self, t: usize, x: usize, y: usize) -> bool {
        let s = (t - 1) as f64;
        let (ox, oy) = (self.x0 + self.vx * s, self.y0 + self.vy * s);
        let (x, y) = (x as f64, y as f64);
        x >= ox && x < ox + self.width && y >= oy && y < oy + self.height
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub seed: u64,
    pub width: usize,
    pub height: usize,
    pub num_frames: usize,
    pub objects: Vec<SceneObject>,
    pub target_index: usize,
    #[serde(default)]
    pub occluders: Vec<Occluder>,
    #[serde(default)]
    pub noise: u8,
    /// Permits objects sharing the target's color.
    #[serde(default)]
    pub distractors: bool,
}

impl SceneSpec {
    pub fn new(seed: u64, objects: Vec<SceneObject>) -> Self {
        Self {
            seed,
            width: 128,
            height: 128,
            num_frames: 30,
            objects,
            target_index: 0,
            occluders: Vec::new(),
            noise: 0,
            distractors: false,
        }
    }

    pub fn target(&self) -> &SceneObject {
        &self.objects[self.target_index]
    }

    pub fn target_color(&self) -> Result<Color> {
        let rgb = self.target().rgb;
        Color::from_rgb(rgb).ok_or_else(|| Error::Spec(format!("target color {rgb:?} has no name")))
    }

    pub fn expression(&self) -> Result<String> {
        Ok(format!(
            "the {} {}",
            self.target_color()?,
            self.target().shape
        ))
    }

    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(Error::Spec(m));
        if self.width == 0 || self.height == 0 || self.num_frames == 0 {
            return err("width, height and num_frames must be >= 1".into());
        }
        if self.target_index >= self.objects.len() {
            return err(format!(
                "target_index {} with {} objects",
                self.target_index,
                self.objects.len()
            ));
        }
        if self.noise > MAX_NOISE {
            return err(format!("noise {} above {MAX_NOISE}", self.noise));
        }
        for (i, o) in self.objects.iter().enumerate() {
            if o.entry_frame == 0 || o.entry_frame > o.exit_frame || o.exit_frame > self.num_frames
            {
                return err(format!(
                    "object {i}: need 1 <= entry ({}) <= exit ({}) <= {}",
                    o.entry_frame, o.exit_frame, self.num_frames
                ));
            }
            if !(o.size > 0.0 && o.size.is_finite()) {
                return err(format!("object {i}: size must be positive"));
            }
        }
        self.target_color()?;
        if !self.distractors {
            for (i, a) in self.objects.iter().enumerate() {
                for b in &self.objects[i + 1..] {
                    if a.rgb == b.rgb {
                        return err(format!(
                            "objects share color {:?} outside a distractor scene",
                            a.rgb
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedScene {
    pub spec: SceneSpec,
    pub video: VideoSequence,
    pub gt: MaskSequence,
    /// Visible fraction of the target's full shape, per frame.
    pub visibility: Vec<f64>,
}

pub fn generate(spec: &SceneSpec) -> Result<GeneratedScene> {
    spec.validate()?;
    let (w, h) = (spec.width, spec.height);
    let mut rng = Lcg::new(spec.seed);
    let mut frames = Vec::with_capacity(spec.num_frames);
    let mut gt = Vec::with_capacity(spec.num_frames);
    let mut visibility = Vec::with_capacity(spec.num_frames);

    for t in 1..=spec.num_frames {
        let mut pixels: Vec<u8> = BACKGROUND.iter().copied().cycle().take(w * h * 3).collect();
        let mut target = BinaryMask::empty(w, h);
        for (i, obj) in spec.objects.iter().enumerate() {
            if !obj.visible_at(t) {
                continue;
            }
            let (cx, cy) = obj.trajectory.at(t);
            let is_target = i == spec.target_index;
            rasterize(obj.shape, cx, cy, obj.size, w, h, |x, y| {
                let p = (y * w + x) * 3;
                pixels[p..p + 3].copy_from_slice(&obj.rgb);
                target.set(x, y, is_target);
            });
        }
        for occ in &spec.occluders {
            for y in 0..h {
                for x in 0..w {
                    if occ.covers(t, x, y) {
                        let p = (y * w + x) * 3;
                        pixels[p..p + 3].copy_from_slice(&occ.rgb);
                        target.set(x, y, false);
                    }
                }
            }
        }

        let obj = spec.target();
        let vis = if obj.visible_at(t) {
            let (cx, cy) = obj.trajectory.at(t);
            target.count() as f64 / full_area(obj.shape, cx, cy, obj.size) as f64
        } else {
            0.0
        };

        if spec.noise > 0 {
            let a = spec.noise as i64;
            for p in &mut pixels {
                *p = (*p as i64 + rng.int(-a, a)).clamp(0, 255) as u8;
            }
        }
        frames.push(Frame::new(t, w, h, pixels)?);
        gt.push(target);
        visibility.push(vis);
    }

    Ok(GeneratedScene {
        spec: spec.clone(),
        video: VideoSequence::new(frames, spec.expression()?)?,
        gt: MaskSequence::new(gt)?,
        visibility,
    })
}

/// Contents of `scene.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneManifest {
    pub scenario: Option<String>,
    pub expression: String,
    pub spec: SceneSpec,
    pub visibility: Vec<f64>,
}

impl GeneratedScene {
    /// Writes `frames/`, `gt/` and `scene.json` under `dir`.
    pub fn write(&self, dir: &Path, scenario: Option<&str>) -> Result<()> {
        write_frame_dir(&self.video, &dir.join("frames"))?;
        write_mask_dir(&self.gt, &dir.join("gt"))?;
        let manifest = SceneManifest {
            scenario: scenario.map(str::to_string),
            expression: self.video.expression().to_string(),
            spec: self.spec.clone(),
            visibility: self.visibility.clone(),
        };
        let path = dir.join("scene.json");
        let mut json = serde_json::to_vec_pretty(&manifest)?;
        json.push(b'\n');
        std::fs::write(&path, json).map_err(|e| Error::io(path, e))
    }
}
