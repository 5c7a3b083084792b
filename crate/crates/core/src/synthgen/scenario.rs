//! Canonical stress scenes.
//!
//! Every scenario is 128x128 with 30 frames. The seed drives small
//! parameter jitter through an LCG stream separate from the pixel noise.

use crate::error::{Error, Result};
use crate::shape::{Color, Shape};

use super::{Lcg, Occluder, SceneObject, SceneSpec, Trajectory};

pub const SCENARIOS: [&str; 6] = [
    "static",
    "translate",
    "enter_late",
    "occlusion",
    "distractor",
    "exit_and_similar",
];

const T: usize = 30;
const WHITE: [u8; 3] = [255, 255, 255];
/// Inside the segmenter's red tolerance, outside red's histogram bin.
pub const ORANGE: [u8; 3] = [255, 56, 0];

pub fn scenario(name: &str, seed: u64) -> Result<SceneSpec> {
    // Parameter stream, decorrelated from the noise stream seeded with `seed`.
    let mut rng = Lcg::new(seed ^ 0x9e37_79b9_7f4a_7c15);
    let spec = match name {
        "static" => static_scene(seed, &mut rng),
        "translate" => translate(seed, &mut rng),
        "enter_late" => enter_late(seed, &mut rng),
        "occlusion" => occlusion(seed, &mut rng),
        "distractor" => distractor(seed, &mut rng),
        "exit_and_similar" => exit_and_similar(seed, &mut rng),
        _ => return Err(Error::UnknownScenario(name.to_string())),
    };
    spec.validate()?;
    Ok(spec)
}

fn object(color: [u8; 3], shape: Shape, size: f64, trajectory: Trajectory) -> SceneObject {
    SceneObject {
        rgb: color,
        shape,
        size,
        trajectory,
        entry_frame: 1,
        exit_frame: T,
    }
}

fn linear(x0: f64, y0: f64, vx: f64, vy: f64) -> Trajectory {
    Trajectory::Linear { x0, y0, vx, vy }
}

fn static_scene(seed: u64, rng: &mut Lcg) -> SceneSpec {
    let r = rng.uniform(12.0, 18.0);
    let (x, y) = (rng.uniform(54.0, 74.0), rng.uniform(54.0, 74.0));
    SceneSpec::new(
        seed,
        vec![object(
            Color::Red.rgb(),
            Shape::Circle,
            r,
            Trajectory::still(x, y),
        )],
    )
}

fn translate(seed: u64, rng: &mut Lcg) -> SceneSpec {
    let r = rng.uniform(10.0, 14.0);
    let x0 = rng.uniform(20.0, 26.0);
    let y0 = rng.uniform(50.0, 78.0);
    SceneSpec::new(
        seed,
        vec![object(
            Color::Red.rgb(),
            Shape::Circle,
            r,
            linear(x0, y0, 2.0, 0.0),
        )],
    )
}

fn enter_late(seed: u64, rng: &mut Lcg) -> SceneSpec {
    let entry = rng.int(10, 20) as usize;
    let mut target = object(
        Color::Red.rgb(),
        Shape::Circle,
        rng.uniform(11.0, 15.0),
        linear(
            rng.uniform(30.0, 50.0),
            rng.uniform(30.0, 50.0),
            rng.uniform(-0.5, 0.5),
            0.5,
        ),
    );
    target.entry_frame = entry;
    let other = object(
        Color::Green.rgb(),
        Shape::Square,
        rng.uniform(9.0, 12.0),
        Trajectory::Sinusoidal {
            x0: rng.uniform(85.0, 95.0),
            y0: rng.uniform(80.0, 95.0),
            ax: 6.0,
            ay: 3.0,
            period: 20.0,
            phase: rng.uniform(0.0, std::f64::consts::TAU),
        },
    );
    let mut spec = SceneSpec::new(seed, vec![target, other]);
    spec.noise = 4;
    spec
}

fn occlusion(seed: u64, rng: &mut Lcg) -> SceneSpec {
    let r = rng.uniform(10.0, 13.0);
    let (x, y) = (rng.uniform(55.0, 70.0), rng.uniform(45.0, 80.0));
    let vx = rng.uniform(-0.3, 0.3);
    let target = object(Color::Blue.rgb(), Shape::Square, r, linear(x, y, vx, 0.0));
    // A bar wider than the target crossing it around frame 15.
    let width = 2.0 * r + 10.0;
    let speed = 3.0;
    let x15 = x + 14.0 * vx;
    let bar = Occluder {
        rgb: WHITE,
        x0: x15 - width / 2.0 - 14.0 * speed,
        y0: 0.0,
        width,
        height: 128.0,
        vx: speed,
        vy: 0.0,
    };
    let mut spec = SceneSpec::new(seed, vec![target]);
    spec.occluders.push(bar);
    spec.noise = 2;
    spec
}

/// The red target is fully hidden by a sweeping bar around the middle
/// candidate, where only a small orange circle matches the expression's
/// color: a clean, confident but wrong segmentation. A larger red circle in
/// the exact reference geometry enters late and dominates the last
/// candidate on alignment alone.
fn distractor(seed: u64, rng: &mut Lcg) -> SceneSpec {
    let r = rng.uniform(11.0, 13.0);
    let (x, y) = (rng.uniform(36.0, 44.0), rng.uniform(34.0, 44.0));
    let target = object(Color::Red.rgb(), Shape::Circle, r, Trajectory::still(x, y));
    let decoy = object(
        ORANGE,
        Shape::Circle,
        rng.uniform(4.5, 5.5),
        Trajectory::still(rng.uniform(92.0, 100.0), rng.uniform(30.0, 40.0)),
    );
    let mut twin = object(
        Color::Red.rgb(),
        Shape::Circle,
        24.0,
        Trajectory::still(rng.int(36, 44) as f64 + 0.5, rng.int(94, 100) as f64 + 0.5),
    );
    twin.entry_frame = 24;
    let bar = Occluder {
        rgb: WHITE,
        x0: x - 78.0,
        y0: 0.0,
        width: 46.0,
        height: 128.0,
        vx: 4.0,
        vy: 0.0,
    };
    let mut spec = SceneSpec::new(seed, vec![target, decoy, twin]);
    spec.occluders.push(bar);
    spec.distractors = true;
    spec
}

/// The target leaves through the right border; a same-colored object of a
/// different shape enters from the left afterwards.
fn exit_and_similar(seed: u64, rng: &mut Lcg) -> SceneSpec {
    let r = rng.uniform(10.0, 13.0);
    let y = rng.uniform(40.0, 60.0);
    let mut target = object(
        Color::Yellow.rgb(),
        Shape::Triangle,
        r,
        linear(70.0, y, 3.0, 0.0),
    );
    target.exit_frame = rng.int(20, 24) as usize;
    let mut similar = object(
        Color::Yellow.rgb(),
        Shape::Square,
        r * 0.8,
        linear(-10.0, rng.uniform(80.0, 100.0), 2.5, 0.0),
    );
    similar.entry_frame = target.exit_frame + 1;
    let mut spec = SceneSpec::new(seed, vec![target, similar]);
    spec.distractors = true;
    spec.noise = 2;
    spec
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthgen::generate;

    #[test]
    fn every_scenario_generates() {
        for name in SCENARIOS {
            for seed in 0..3 {
                let spec = scenario(name, seed).unwrap();
                let scene = generate(&spec).unwrap();
                assert_eq!(scene.video.len(), 30, "{name}");
                assert!(scene.visibility.iter().any(|&v| v > 0.0), "{name}");
            }
        }
        assert!(matches!(
            scenario("nope", 0),
            Err(Error::UnknownScenario(_))
        ));
    }

    #[test]
    fn static_has_one_still_object() {
        let spec = scenario("static", 1).unwrap();
        assert_eq!(spec.objects.len(), 1);
        let t = spec.objects[0].trajectory;
        assert_eq!(t.at(1), t.at(30));
    }

    #[test]
    fn enter_late_entry_window() {
        for seed in 0..20 {
            let spec = scenario("enter_late", seed).unwrap();
            let entry = spec.target().entry_frame;
            assert!((10..=20).contains(&entry), "seed {seed}: {entry}");
            let scene = generate(&spec).unwrap();
            for t in 1..entry {
                assert!(scene.gt.masks()[t - 1].is_empty());
            }
        }
    }

    #[test]
    fn occlusion_dips_mid_sequence() {
        for seed in 0..10 {
            let scene = generate(&scenario("occlusion", seed).unwrap()).unwrap();
            let v = &scene.visibility;
            let mut best = 0;
            let mut run = 0;
            for &x in &v[5..25] {
                run = if x < 0.5 { run + 1 } else { 0 };
                best = best.max(run);
            }
            assert!(best >= 3, "seed {seed}: {v:?}");
            assert!(v[0] > 0.9 && v[29] > 0.9, "seed {seed}: {v:?}");
        }
    }

    #[test]
    fn distractor_hides_target_mid_sequence() {
        for seed in 0..10 {
            let scene = generate(&scenario("distractor", seed).unwrap()).unwrap();
            for t in 13..=17 {
                assert_eq!(scene.visibility[t - 1], 0.0, "seed {seed} frame {t}");
            }
            assert_eq!(scene.visibility[0], 1.0);
        }
    }
}
