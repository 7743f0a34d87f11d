//! Synthetic tool motions with known striction-curve invariants, and seeded
//! labeled sequences for the recognizer benchmark.
//!
//! Motions are generated screw by screw. To make the striction curve follow a
//! target curve `r`, step `k` rotates the tool about the line through `r_k`
//! along the discrete binormal `(r_k − r_{k−1}) × (r_{k+1} − r_k)`. That line
//! is perpendicular to both neighbouring chords, so consecutive common normals
//! are exactly the chords and the striction polyline is the target sample set.

use nalgebra::{Rotation3, Unit, UnitQuaternion, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::pose_io::{Arm, GestureId, GestureTimeline, Pose, Quaternion, Trajectory, DEFAULT_SAMPLE_RATE_HZ};
use crate::screw::{ScrewKind, ScrewLine, THETA_MIN};

/// Rotation applied per frame about the prescribed screw axes.
pub const STEP_ANGLE: f64 = 0.2;

const SAMPLE_PERIOD: f64 = 1.0 / DEFAULT_SAMPLE_RATE_HZ;

/// Builds a trajectory whose striction polyline is `targets[1..targets.len() - 1]`.
///
/// `targets[0]` only fixes the first binormal; `n = targets.len() − 1` poses
/// are produced, the first one at `targets[1]` with rotation `start`.
pub fn follow_striction(arm: Arm, targets: &[Vector3<f64>], step_angle: f64, start: Quaternion) -> Result<Trajectory> {
    if targets.len() < 3 {
        return Err(Error::validation("need at least 3 target points"));
    }
    let n = targets.len() - 1;
    let mut poses = Vec::with_capacity(n);
    let mut pose = Pose::new(targets[1], start, 0);
    poses.push(pose);
    let mut prev_axis: Option<Vector3<f64>> = None;
    for k in 0..n - 1 {
        let before = targets[k + 1] - targets[k];
        let after = targets[k + 2] - targets[k + 1];
        let axis = binormal(&before, &after, prev_axis.as_ref());
        prev_axis = Some(axis);
        let line = ScrewLine {
            angle: step_angle,
            ..ScrewLine::line(targets[k + 1], axis)
        };
        pose = line.apply(&pose);
        pose.frame_index = k + 1;
        poses.push(pose);
    }
    Trajectory::new(arm, poses, SAMPLE_PERIOD)
}

fn binormal(before: &Vector3<f64>, after: &Vector3<f64>, prev: Option<&Vector3<f64>>) -> Vector3<f64> {
    let cross = before.cross(after);
    if cross.norm() > 1e-9 * before.norm() * after.norm() {
        let b = cross.normalize();
        // keep a consistent orientation along the curve
        return match prev {
            Some(p) if p.dot(&b) < 0.0 => -b,
            _ => b,
        };
    }
    // locally straight: any direction perpendicular to the chord
    let t = after.normalize();
    let seed = prev.copied().unwrap_or_else(|| {
        let i = t.iamin();
        let mut e = Vector3::zeros();
        e[i] = 1.0;
        e
    });
    let perp = seed - t * t.dot(&seed);
    if perp.norm() > 1e-9 {
        perp.normalize()
    } else {
        t.cross(&Vector3::x()).try_normalize(1e-12).unwrap_or_else(|| t.cross(&Vector3::y()).normalize())
    }
}

/// Helix motion with analytic striction invariants.
#[derive(Debug, Clone, PartialEq)]
pub struct HelixTrajectory {
    pub trajectory: Trajectory,
    pub kappa: f64,
    pub tau: f64,
}

/// Motion whose striction curve is the helix `(a cos φ, a sin φ, b φ)` sampled
/// at `φ = k·dθ`, `k = 0..n−1`; curvature `a/(a²+b²)`, torsion `b/(a²+b²)`.
pub fn gen_helix_trajectory(a: f64, b: f64, n: usize, dtheta: f64) -> Result<HelixTrajectory> {
    if !(a > 0.0) || n < 8 || !(dtheta > 0.0) {
        return Err(Error::validation("helix needs a > 0, n >= 8 and a positive step"));
    }
    let targets: Vec<_> = (0..=n)
        .map(|k| {
            let phi = (k as f64 - 1.0) * dtheta;
            Vector3::new(a * phi.cos(), a * phi.sin(), b * phi)
        })
        .collect();
    let c2 = a * a + b * b;
    Ok(HelixTrajectory {
        trajectory: follow_striction(Arm::Left, &targets, STEP_ANGLE, Quaternion::IDENTITY)?,
        kappa: a / c2,
        tau: b / c2,
    })
}

/// Motion whose striction curve is the straight line through `origin` along
/// `direction`, with `step` meters between samples.
pub fn gen_line_trajectory(origin: Vector3<f64>, direction: Vector3<f64>, step: f64, n: usize) -> Result<Trajectory> {
    let d = direction.normalize() * step;
    let targets: Vec<_> = (0..=n).map(|k| origin + (k as f64 - 1.0) * d).collect();
    follow_striction(Arm::Left, &targets, STEP_ANGLE, Quaternion::IDENTITY)
}

/// Repeats one screw displacement `n − 1` times: rotation `dθ` about `axis`
/// and translation `pitch·dθ` along it.
pub fn gen_constant_screw_motion(axis: &ScrewLine, pitch: f64, dtheta: f64, n: usize) -> Result<Trajectory> {
    if dtheta < 10.0 * THETA_MIN {
        return Err(Error::validation("constant screw step must be at least 10 * THETA_MIN"));
    }
    if n < 2 {
        return Err(Error::validation("need at least 2 poses"));
    }
    let line = ScrewLine {
        angle: dtheta,
        translation: pitch * dtheta,
        kind: ScrewKind::General,
        ..ScrewLine::line(axis.point, axis.direction)
    };
    // start a short distance off the axis
    let dir = line.direction;
    let off = {
        let e = if dir.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
        (e - dir * dir.dot(&e)).normalize() * 0.1
    };
    let mut pose = Pose::new(line.point + off, Quaternion::IDENTITY, 0);
    let mut poses = vec![pose];
    for k in 1..n {
        pose = line.apply(&pose);
        pose.frame_index = k;
        poses.push(pose);
    }
    Trajectory::new(Arm::Left, poses, SAMPLE_PERIOD)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrimitiveKind {
    Line,
    Circle,
    Helix,
    ConstantScrew,
}

/// One gesture-labeled stretch of motion. `radius` and `pitch` shape the
/// striction curve and `speed` is its arc length per frame. For
/// `ConstantScrew`, `speed` is the rotation per frame and `pitch` is in m/rad;
/// inside a labeled sequence it contributes a straight run of `pitch·speed`
/// per frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionPrimitive {
    pub kind: PrimitiveKind,
    pub radius: f64,
    pub pitch: f64,
    pub speed: f64,
    pub duration: usize,
    pub gesture: GestureId,
}

impl MotionPrimitive {
    /// Analytic striction curvature and torsion.
    pub fn analytic_invariants(&self) -> (f64, f64) {
        match self.kind {
            PrimitiveKind::Line | PrimitiveKind::ConstantScrew => (0.0, 0.0),
            PrimitiveKind::Circle => (1.0 / self.radius, 0.0),
            PrimitiveKind::Helix => {
                let c2 = self.radius * self.radius + self.pitch * self.pitch;
                (self.radius / c2, self.pitch / c2)
            }
        }
    }

    /// Local striction curve sample `j` (`j = 0` at the origin, unit tangent
    /// along +x there).
    fn local_point(&self, j: f64) -> Vector3<f64> {
        let s = j * self.speed;
        match self.kind {
            PrimitiveKind::Line => Vector3::new(s, 0.0, 0.0),
            PrimitiveKind::Circle => {
                let a = self.radius;
                let phi = s / a;
                Vector3::new(a * phi.sin(), a * (1.0 - phi.cos()), 0.0)
            }
            PrimitiveKind::Helix => {
                let (a, b) = (self.radius, self.pitch);
                let c = (a * a + b * b).sqrt();
                let phi = s / c;
                // tangent at φ = 0 is (a, 0, b)/c; rotate it onto +x
                let p = Vector3::new(a * phi.sin(), a * (1.0 - phi.cos()), b * phi);
                let (ca, sa) = (a / c, b / c);
                Vector3::new(ca * p.x + sa * p.z, p.y, -sa * p.x + ca * p.z)
            }
            // a constant screw advances its tip along the axis by pitch·dθ per frame
            PrimitiveKind::ConstantScrew => Vector3::new(j * self.speed * self.pitch, 0.0, 0.0),
        }
    }
}

/// Output of [`gen_labeled_sequence`]. `vision` is `T` rows of equal width.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSequence {
    pub left: Trajectory,
    pub right: Trajectory,
    pub timeline: GestureTimeline,
    pub vision: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SequenceOptions {
    pub vision_dim: usize,
    /// Standard deviation of per-frame vision noise around the gesture template.
    pub vision_noise: f64,
    /// Scale applied to the right arm's curve shapes.
    pub right_scale: f64,
}

impl Default for SequenceOptions {
    fn default() -> Self {
        Self {
            vision_dim: 128,
            vision_noise: 1.0,
            right_scale: 0.8,
        }
    }
}

/// Fixed per-gesture template, identical for every trial and seed.
pub fn vision_template(gesture: GestureId, dim: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7e3a_11c5 ^ u64::from(gesture.0));
    (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect()
}

/// Deterministic stand-in for precomputed vision features.
pub fn synthetic_vision(frames: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..frames)
        .map(|_| (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect())
        .collect()
}

/// Concatenates primitives into a two-arm labeled sequence. Each arm follows
/// its own randomly oriented, C¹-joined chain of primitive curves.
pub fn gen_labeled_sequence(primitives: &[MotionPrimitive], seed: u64, opts: &SequenceOptions) -> Result<LabeledSequence> {
    let mut distinct: Vec<_> = primitives.iter().map(|p| p.gesture).collect();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(Error::validation("labeled sequence needs at least 2 distinct gestures"));
    }
    if primitives.iter().any(|p| p.duration == 0) {
        return Err(Error::validation("primitive with zero duration"));
    }
    if primitives.iter().any(|p| p.local_point(1.0).norm() < 1e-12) {
        return Err(Error::validation("primitive does not move"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let left = arm_motion(Arm::Left, primitives, 1.0, &mut rng)?;
    let right = arm_motion(Arm::Right, primitives, opts.right_scale, &mut rng)?;

    let labels: Vec<GestureId> = primitives
        .iter()
        .flat_map(|p| std::iter::repeat(p.gesture).take(p.duration))
        .collect();
    let templates: Vec<(GestureId, Vec<f64>)> =
        distinct.iter().map(|&g| (g, vision_template(g, opts.vision_dim))).collect();
    let vision = labels
        .iter()
        .map(|g| {
            let t = &templates.iter().find(|(id, _)| id == g).unwrap().1;
            t.iter()
                .map(|v| {
                    let e: f64 = StandardNormal.sample(&mut rng);
                    v + opts.vision_noise * e
                })
                .collect()
        })
        .collect();
    Ok(LabeledSequence {
        left,
        right,
        timeline: GestureTimeline::from_labels(labels),
        vision,
    })
}

fn arm_motion(arm: Arm, primitives: &[MotionPrimitive], scale: f64, rng: &mut ChaCha8Rng) -> Result<Trajectory> {
    let total: usize = primitives.iter().map(|p| p.duration).sum();
    let mut frame = random_rotation(rng);
    let mut origin = Vector3::zeros();
    let mut targets: Vec<Vector3<f64>> = Vec::with_capacity(total + 1);

    for (i, prim) in primitives.iter().enumerate() {
        let prim_scaled = MotionPrimitive {
            radius: prim.radius * scale,
            pitch: prim.pitch * scale,
            speed: if prim.kind == PrimitiveKind::ConstantScrew { prim.speed } else { prim.speed * scale },
            ..*prim
        };
        if i > 0 {
            // roll the next curve about the current tangent for variety
            let tangent = (frame * Vector3::x()).normalize();
            let roll = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
            frame = Rotation3::from_axis_angle(&Unit::new_normalize(tangent), roll) * frame;
        }
        let place = |j: f64| origin + frame * prim_scaled.local_point(j);
        if i == 0 {
            targets.push(place(-1.0));
            targets.push(place(0.0));
            for j in 1..prim.duration {
                targets.push(place(j as f64));
            }
        } else {
            for j in 1..=prim.duration {
                targets.push(place(j as f64));
            }
        }
        // continue from the end point with the end tangent
        let end = prim_scaled.local_point(prim.duration as f64 - if i == 0 { 1.0 } else { 0.0 });
        let before = prim_scaled.local_point(prim.duration as f64 - if i == 0 { 2.0 } else { 1.0 });
        let tangent_local = (end - before).try_normalize(1e-15).unwrap_or(Vector3::x());
        origin = *targets.last().unwrap();
        let tangent_world = frame * tangent_local;
        frame = Rotation3::rotation_between(&Vector3::x(), &tangent_world).unwrap_or_else(|| frame);
    }
    debug_assert_eq!(targets.len(), total + 1);
    follow_striction(arm, &targets, STEP_ANGLE, Quaternion::IDENTITY)
}

fn random_rotation(rng: &mut ChaCha8Rng) -> Rotation3<f64> {
    let q = loop {
        let v: [f64; 4] = [
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
        ];
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-6 {
            break nalgebra::Quaternion::new(v[0] / n, v[1] / n, v[2] / n, v[3] / n);
        }
    };
    UnitQuaternion::from_quaternion(q).to_rotation_matrix()
}

/// Motion whose striction curve is a seeded smooth space curve (a sum of a few
/// low-frequency sinusoids per axis), `n` poses long.
pub fn random_smooth_trajectory(seed: u64, n: usize) -> Result<Trajectory> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut terms = Vec::new();
    for _ in 0..3 {
        let axis: Vec<(f64, f64, f64)> = (1..=3)
            .map(|f| {
                let amp = rng.random_range(0.2..1.0) / f as f64;
                let freq = f as f64 * rng.random_range(0.8..1.2);
                let phase = rng.random_range(0.0..std::f64::consts::TAU);
                (amp, freq, phase)
            })
            .collect();
        terms.push(axis);
    }
    let targets: Vec<_> = (0..=n)
        .map(|k| {
            let t = (k as f64 - 1.0) / n as f64 * std::f64::consts::PI;
            let c = |axis: &[(f64, f64, f64)]| axis.iter().map(|(a, f, p)| a * (f * t + p).sin()).sum::<f64>();
            Vector3::new(c(&terms[0]), c(&terms[1]), c(&terms[2]))
        })
        .collect();
    follow_striction(Arm::Left, &targets, STEP_ANGLE, random_unit_quaternion(&mut rng))
}

fn random_unit_quaternion(rng: &mut ChaCha8Rng) -> Quaternion {
    let q = UnitQuaternion::from_rotation_matrix(&random_rotation(rng));
    Quaternion::new(q.w, q.i, q.j, q.k).canonical()
}

/// One synthetic recording, named like the real benchmark trials.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthTrial {
    pub name: String,
    pub user: String,
    pub sequence: LabeledSequence,
}

/// Gesture shapes of the toy benchmark: G1 circle, G2 line, G3 helix.
pub fn toy_primitive(gesture: u32, duration: usize) -> MotionPrimitive {
    let (kind, radius, pitch) = match gesture {
        1 => (PrimitiveKind::Circle, 0.02, 0.0),
        2 => (PrimitiveKind::Line, 0.0, 0.0),
        _ => (PrimitiveKind::Helix, 0.01, 0.006),
    };
    MotionPrimitive {
        kind,
        radius,
        pitch,
        speed: 0.002,
        duration,
        gesture: GestureId(gesture),
    }
}

pub const TOY_USERS: usize = 3;
pub const TOY_TRIALS_PER_USER: usize = 2;
pub const TOY_FRAMES: usize = 200;

/// Seeded 3-gesture benchmark: 3 users × 2 trials × 200 frames, each trial
/// visiting every gesture twice in a shuffled order with random durations.
pub fn toy_benchmark(seed: u64, opts: &SequenceOptions) -> Result<Vec<SynthTrial>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut trials = Vec::new();
    for u in 0..TOY_USERS {
        let user = char::from(b'B' + u as u8).to_string();
        for t in 0..TOY_TRIALS_PER_USER {
            let order = gesture_order(&mut rng);
            let durations = split_frames(&mut rng, TOY_FRAMES, order.len(), 20);
            let prims: Vec<_> = order.iter().zip(&durations).map(|(&g, &d)| toy_primitive(g, d)).collect();
            let sequence = gen_labeled_sequence(&prims, rng.random(), opts)?;
            trials.push(SynthTrial {
                name: format!("Suturing_{user}{:03}", t + 1),
                user: user.clone(),
                sequence,
            });
        }
    }
    Ok(trials)
}

fn gesture_order(rng: &mut ChaCha8Rng) -> Vec<u32> {
    loop {
        let mut order = vec![1, 1, 2, 2, 3, 3];
        for i in (1..order.len()).rev() {
            order.swap(i, rng.random_range(0..=i));
        }
        if order.windows(2).all(|w| w[0] != w[1]) {
            return order;
        }
    }
}

fn split_frames(rng: &mut ChaCha8Rng, total: usize, parts: usize, min: usize) -> Vec<usize> {
    let spare = total - parts * min;
    let mut cuts: Vec<usize> = (0..parts - 1).map(|_| rng.random_range(0..=spare)).collect();
    cuts.sort_unstable();
    let mut out = Vec::with_capacity(parts);
    let mut prev = 0;
    for c in cuts.into_iter().chain(std::iter::once(spare)) {
        out.push(min + c - prev);
        prev = c;
    }
    out
}
