//! Synthetic scenarios: scripted flight programs, noisy sensor readings, and
//! on-disk datasets in the ingest layout.
//!
//! Flight programs are expressed in a local east/north frame anchored at the
//! Diana RF sensor. Multi-drone patterns sample drone `i` with a time offset of
//! `i * sample_ms / n_drones` so that sensor returns of different drones never
//! share a timestamp.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::{bearing_deg, distance_3d_m, haversine_m, LocalFrame};
use crate::ingest::{self, reading_order, sensor_file_name, DRONE_LOG_FILE};
use crate::types::{
    DroneLogRecord, DroneType, GeoPosition, SensorKind, SensorName, SensorReading, SensorSpec,
    Timestamp,
};

/// Start of every synthetic recording (UNIX ms).
pub const EPOCH_MS: u64 = 1_600_000_000_000;
pub const DEFAULT_SAMPLE_MS: u64 = 1_000;
pub const CRUISE_MPS: f64 = 10.0;
pub const CLIMB_MPS: f64 = 2.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PatternId {
    S1_1,
    S1_2,
    S1_3,
    S1_4,
    S2_1,
    S2_2,
    S2_3,
    S2_4,
    S3,
}

impl PatternId {
    pub const ALL: [PatternId; 9] = [
        PatternId::S1_1,
        PatternId::S1_2,
        PatternId::S1_3,
        PatternId::S1_4,
        PatternId::S2_1,
        PatternId::S2_2,
        PatternId::S2_3,
        PatternId::S2_4,
        PatternId::S3,
    ];

    /// Scenarios that ship with a drone log.
    pub const TRAINING: [PatternId; 7] = [
        PatternId::S1_1,
        PatternId::S1_2,
        PatternId::S1_3,
        PatternId::S1_4,
        PatternId::S2_1,
        PatternId::S2_2,
        PatternId::S3,
    ];

    pub const TESTING: [PatternId; 7] = [
        PatternId::S1_2,
        PatternId::S1_4,
        PatternId::S2_1,
        PatternId::S2_2,
        PatternId::S2_3,
        PatternId::S2_4,
        PatternId::S3,
    ];

    pub fn label(self) -> &'static str {
        match self {
            PatternId::S1_1 => "S1.1",
            PatternId::S1_2 => "S1.2",
            PatternId::S1_3 => "S1.3",
            PatternId::S1_4 => "S1.4",
            PatternId::S2_1 => "S2.1",
            PatternId::S2_2 => "S2.2",
            PatternId::S2_3 => "S2.3",
            PatternId::S2_4 => "S2.4",
            PatternId::S3 => "S3",
        }
    }

    /// Directory name in the dataset layout, e.g. "Scenario 1.1".
    pub fn scenario_dir(self) -> String {
        format!("Scenario {}", &self.label()[1..])
    }

    pub fn pattern(self) -> FlightPattern {
        FlightPattern::of(self)
    }
}

impl fmt::Display for PatternId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for PatternId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let key = t
            .strip_prefix("Scenario ")
            .map(|r| format!("S{r}"))
            .unwrap_or_else(|| t.to_ascii_uppercase());
        PatternId::ALL
            .into_iter()
            .find(|p| p.label() == key)
            .ok_or_else(|| Error::UnknownPattern(s.to_string()))
    }
}

/// One leg of a flight program.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Segment {
    /// Level flight along a heading (degrees clockwise from north). Diagonal
    /// legs are straights with a non-cardinal heading.
    Straight { heading_deg: f64, length_m: f64 },
    /// Level flight while climbing/descending linearly to `to_alt_m`.
    Ramp {
        heading_deg: f64,
        length_m: f64,
        to_alt_m: f64,
    },
    /// Vertical climb or descent in place.
    Climb { to_alt_m: f64 },
    Hover { duration_s: f64 },
    /// `legs` straight legs alternating `heading ± swing`; each leg advances
    /// `advance_m` along `heading_deg`.
    Zigzag {
        heading_deg: f64,
        advance_m: f64,
        legs: usize,
        swing_deg: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroneProgram {
    pub drone_type: DroneType,
    pub start_east_m: f64,
    pub start_north_m: f64,
    pub start_alt_m: f64,
    pub segments: Vec<Segment>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlightPattern {
    pub id: PatternId,
    pub drones: Vec<DroneProgram>,
    pub cruise_mps: f64,
    pub climb_mps: f64,
}

fn straight(heading_deg: f64, length_m: f64) -> Segment {
    Segment::Straight {
        heading_deg,
        length_m,
    }
}

/// Converging leg: start `half_sep` east/west of the sensor, reach it after `len` meters.
fn converge(half_sep: f64, len: f64) -> (f64, f64, f64) {
    let north = (len * len - half_sep * half_sep).sqrt();
    let heading = (-half_sep).atan2(north).to_degrees().rem_euclid(360.0);
    (half_sep, -north, heading)
}

impl FlightPattern {
    pub fn of(id: PatternId) -> FlightPattern {
        use DroneType::*;
        let single = |t: DroneType, e: f64, n: f64, alt: f64, segs: Vec<Segment>| DroneProgram {
            drone_type: t,
            start_east_m: e,
            start_north_m: n,
            start_alt_m: alt,
            segments: segs,
        };
        let third = 2000.0 / 3.0;
        let drones = match id {
            PatternId::S1_1 => vec![single(
                MavicPro,
                0.0,
                -1000.0,
                50.0,
                vec![
                    straight(0.0, third),
                    Segment::Climb { to_alt_m: 100.0 },
                    straight(0.0, third),
                    Segment::Climb { to_alt_m: 150.0 },
                    straight(0.0, third),
                ],
            )],
            PatternId::S1_2 => vec![single(
                Phantom4Pro,
                0.0,
                -1000.0,
                50.0,
                vec![
                    straight(0.0, third),
                    Segment::Climb { to_alt_m: 100.0 },
                    Segment::Hover { duration_s: 60.0 },
                    straight(0.0, third),
                    Segment::Climb { to_alt_m: 150.0 },
                    straight(0.0, third),
                ],
            )],
            PatternId::S1_3 => vec![single(
                MavicPro,
                0.0,
                -100.0,
                50.0,
                vec![straight(0.0, 100.0), straight(90.0, 100.0)],
            )],
            PatternId::S1_4 => vec![single(
                MavicPro,
                0.0,
                -1000.0,
                20.0,
                vec![Segment::Ramp {
                    heading_deg: 0.0,
                    length_m: 2000.0,
                    to_alt_m: 200.0,
                }],
            )],
            PatternId::S2_1 => vec![
                single(Phantom4Pro, -150.0, -1000.0, 60.0, vec![straight(0.0, 2000.0)]),
                single(Mavic2, 150.0, -1000.0, 80.0, vec![straight(0.0, 2000.0)]),
            ],
            PatternId::S2_2 => {
                let (e, n, h) = converge(200.0, 750.0);
                vec![
                    single(Phantom4Pro, -e, n, 50.0, vec![straight(360.0 - h, 750.0), straight(30.0, 750.0)]),
                    single(MavicPro, e, n, 100.0, vec![straight(h, 750.0), straight(330.0, 750.0)]),
                ]
            }
            PatternId::S2_3 => {
                let (e, n, h) = converge(125.0, 650.0);
                vec![
                    single(Phantom4Pro, -e, n, 60.0, vec![straight(360.0 - h, 650.0), straight(0.0, 750.0)]),
                    single(Mavic2, e, n, 90.0, vec![straight(h, 650.0), straight(0.0, 750.0)]),
                ]
            }
            PatternId::S2_4 => {
                let zig = Segment::Zigzag {
                    heading_deg: 0.0,
                    advance_m: 250.0,
                    legs: 4,
                    swing_deg: 30.0,
                };
                vec![
                    single(Mavic2, -150.0, -1000.0, 70.0, vec![zig.clone(), straight(30.0, 750.0)]),
                    single(MavicPro, 150.0, -1000.0, 110.0, vec![zig, straight(330.0, 750.0)]),
                ]
            }
            PatternId::S3 => vec![single(ParrotDisco, 0.0, -1000.0, 100.0, vec![straight(0.0, 2000.0)])],
        };
        FlightPattern {
            id,
            drones,
            cruise_mps: CRUISE_MPS,
            climb_mps: CLIMB_MPS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let two = matches!(
            self.id,
            PatternId::S2_1 | PatternId::S2_2 | PatternId::S2_3 | PatternId::S2_4
        );
        if two && self.drones.len() != 2 {
            return Err(Error::InvalidValue(format!("{} needs two drones", self.id)));
        }
        if self.id == PatternId::S3
            && self
                .drones
                .iter()
                .any(|d| d.segments.iter().any(|s| matches!(s, Segment::Hover { .. })))
        {
            return Err(Error::InvalidValue("fixed-wing pattern cannot hover".into()));
        }
        if !(self.cruise_mps > 0.0 && self.climb_mps > 0.0) {
            return Err(Error::InvalidValue("speeds must be positive".into()));
        }
        Ok(())
    }
}

/// A point of the piecewise-linear trajectory.
#[derive(Debug, Clone, Copy)]
struct Knot {
    t_s: f64,
    east: f64,
    north: f64,
    alt: f64,
}

struct Trajectory {
    knots: Vec<Knot>,
    /// Program segment index of leg `i` (between knots i and i+1).
    leg_segment: Vec<usize>,
}

impl Trajectory {
    fn build(p: &DroneProgram, cruise: f64, climb: f64) -> Trajectory {
        let mut k = Knot {
            t_s: 0.0,
            east: p.start_east_m,
            north: p.start_north_m,
            alt: p.start_alt_m,
        };
        let mut knots = vec![k];
        let mut leg_segment = Vec::new();
        let mut push = |k: &mut Knot, de: f64, dn: f64, dalt: f64, dt: f64, seg: usize| {
            if dt <= 0.0 {
                return;
            }
            k.t_s += dt;
            k.east += de;
            k.north += dn;
            k.alt += dalt;
            knots.push(*k);
            leg_segment.push(seg);
        };
        for (si, seg) in p.segments.iter().enumerate() {
            match *seg {
                Segment::Straight {
                    heading_deg,
                    length_m,
                } => {
                    let h = heading_deg.to_radians();
                    push(&mut k, length_m * h.sin(), length_m * h.cos(), 0.0, length_m / cruise, si);
                }
                Segment::Ramp {
                    heading_deg,
                    length_m,
                    to_alt_m,
                } => {
                    let h = heading_deg.to_radians();
                    let dalt = to_alt_m - k.alt;
                    let path = length_m.hypot(dalt);
                    push(&mut k, length_m * h.sin(), length_m * h.cos(), dalt, path / cruise, si);
                }
                Segment::Climb { to_alt_m } => {
                    let dalt = to_alt_m - k.alt;
                    push(&mut k, 0.0, 0.0, dalt, dalt.abs() / climb, si);
                }
                Segment::Hover { duration_s } => push(&mut k, 0.0, 0.0, 0.0, duration_s, si),
                Segment::Zigzag {
                    heading_deg,
                    advance_m,
                    legs,
                    swing_deg,
                } => {
                    let leg_len = advance_m / swing_deg.to_radians().cos();
                    for leg in 0..legs {
                        let sign = if leg % 2 == 0 { 1.0 } else { -1.0 };
                        let h = (heading_deg + sign * swing_deg).to_radians();
                        push(&mut k, leg_len * h.sin(), leg_len * h.cos(), 0.0, leg_len / cruise, si);
                    }
                }
            }
        }
        Trajectory { knots, leg_segment }
    }

    fn duration_s(&self) -> f64 {
        self.knots.last().map_or(0.0, |k| k.t_s)
    }

    /// Position, instantaneous speed and segment index at time `t` (seconds).
    fn at(&self, t: f64) -> (f64, f64, f64, f64, usize) {
        let n = self.knots.len();
        if n == 1 {
            let k = self.knots[0];
            return (k.east, k.north, k.alt, 0.0, 0);
        }
        // leg i covers [t_i, t_{i+1}); the final instant belongs to the last leg
        let i = match self.knots.partition_point(|k| k.t_s <= t) {
            0 => 0,
            p => (p - 1).min(n - 2),
        };
        let (a, b) = (self.knots[i], self.knots[i + 1]);
        let dt = b.t_s - a.t_s;
        let f = ((t - a.t_s) / dt).clamp(0.0, 1.0);
        let (de, dn, dz) = (b.east - a.east, b.north - a.north, b.alt - a.alt);
        let speed = (de * de + dn * dn + dz * dz).sqrt() / dt;
        (
            a.east + f * de,
            a.north + f * dn,
            a.alt + f * dz,
            speed,
            self.leg_segment[i],
        )
    }
}

/// Ground truth of one drone: log records plus the program segment active at
/// each record.
#[derive(Debug, Clone, PartialEq)]
pub struct DroneTrack {
    pub drone_type: DroneType,
    pub records: Vec<DroneLogRecord>,
    pub segment: Vec<usize>,
}

pub fn origin() -> GeoPosition {
    SensorSpec::of(SensorName::Diana).position
}

/// Sample every drone of the pattern every `sample_ms`. The seed shifts the
/// recording start by up to one second.
pub fn generate_truth(pattern: &FlightPattern, sample_ms: u64, seed: u64) -> Result<Vec<DroneTrack>> {
    if sample_ms == 0 {
        return Err(Error::InvalidValue("sample_ms must be positive".into()));
    }
    pattern.validate()?;
    let frame = LocalFrame::new(&origin());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = EPOCH_MS + rng.random_range(0..1_000u64);
    let n = pattern.drones.len() as u64;
    let mut out = Vec::with_capacity(pattern.drones.len());
    for (i, program) in pattern.drones.iter().enumerate() {
        let traj = Trajectory::build(program, pattern.cruise_mps, pattern.climb_mps);
        let offset_ms = i as u64 * sample_ms / n;
        let end_ms = (traj.duration_s() * 1000.0).floor() as u64;
        let mut records = Vec::new();
        let mut segment = Vec::new();
        let mut k = 0u64;
        while offset_ms + k * sample_ms <= end_ms {
            let rel_ms = offset_ms + k * sample_ms;
            let (e, nn, alt, speed, seg) = traj.at(rel_ms as f64 / 1000.0);
            records.push(DroneLogRecord {
                t: Timestamp(start + rel_ms),
                position: frame.to_geo(e, nn, Some(alt.max(0.0))),
                speed_mps: speed,
                drone_type: program.drone_type,
            });
            segment.push(seg);
            k += 1;
        }
        out.push(DroneTrack {
            drone_type: program.drone_type,
            records,
            segment,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RcsParams {
    pub mean_dbsm: f64,
    pub sigma_dbsm: f64,
}

/// Static radar clutter seen by the 2D radar: a fixed reflector with a large
/// cross-section.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClutterModel {
    pub period_ms: u64,
    pub phase_ms: u64,
    /// Offset of the reflector from the 2D radar, meters east/north.
    pub east_m: f64,
    pub north_m: f64,
    pub jitter_m: f64,
    pub rcs: RcsParams,
}

impl Default for ClutterModel {
    fn default() -> Self {
        ClutterModel {
            period_ms: 2_000,
            phase_ms: 700,
            east_m: 300.0,
            north_m: 200.0,
            jitter_m: 3.0,
            rcs: RcsParams {
                mean_dbsm: 15.0,
                sigma_dbsm: 1.0,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub position_sigma_m: f64,
    pub altitude_sigma_m: f64,
    pub bearing_sigma_deg: f64,
    pub range_sigma_m: f64,
    pub rss_sigma_db: f64,
    pub tx_power_dbm: f64,
    /// Indexed by [`DroneType::index`].
    pub rcs: [RcsParams; 4],
    /// Channel PMF per drone type: (MHz, probability).
    pub freq_pmf: [Vec<(f64, f64)>; 4],
    pub drop_prob: f64,
    /// Probability that a 3D-radar RCS value is a glitch (+`glitch_db`).
    pub glitch_prob: f64,
    pub glitch_db: f64,
    /// Fixed clock offset of each sensor, ordered as [`SensorName::ALL`].
    pub clock_offset_ms: [u64; 4],
    pub clutter: Option<ClutterModel>,
    pub seed: u64,
}

/// Most likely RCS (dBsm) per drone type.
pub const RCS_MODE_DBSM: [f64; 4] = [-14.05, -3.11, -8.55, -10.82];
/// Most likely channel (MHz) and its probability per drone type.
pub const FREQ_MODE: [(f64, f64); 4] = [(2406.5, 0.44), (2416.5, 0.36), (2471.5, 0.38), (2440.0, 1.0)];

/// Mode channel with its probability; the remainder spread uniformly over the
/// channels 5 and 10 MHz either side that fall inside the 2.4 GHz ISM band.
pub fn default_pmf(mode_mhz: f64, mode_p: f64) -> Vec<(f64, f64)> {
    let mut pmf = vec![(mode_mhz, mode_p)];
    if mode_p < 1.0 {
        let neighbors: Vec<f64> = [-10.0, -5.0, 5.0, 10.0]
            .iter()
            .map(|d| mode_mhz + d)
            .filter(|f| (2400.0..=2483.5).contains(f))
            .collect();
        let share = (1.0 - mode_p) / neighbors.len() as f64;
        pmf.extend(neighbors.into_iter().map(|f| (f, share)));
    }
    pmf.sort_by(|a, b| a.0.total_cmp(&b.0));
    pmf
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel {
            position_sigma_m: 2.0,
            altitude_sigma_m: 1.0,
            bearing_sigma_deg: 1.0,
            range_sigma_m: 2.0,
            rss_sigma_db: 2.0,
            tx_power_dbm: 20.0,
            rcs: RCS_MODE_DBSM.map(|m| RcsParams {
                mean_dbsm: m,
                sigma_dbsm: 2.0,
            }),
            freq_pmf: FREQ_MODE.map(|(f, p)| default_pmf(f, p)),
            drop_prob: 0.05,
            glitch_prob: 0.01,
            glitch_db: 40.0,
            clock_offset_ms: [120, 60, 30, 90],
            clutter: Some(ClutterModel::default()),
            seed: 0,
        }
    }
}

impl NoiseModel {
    /// All sigmas zero, no drops, glitches or clutter.
    pub fn noiseless() -> Self {
        NoiseModel {
            position_sigma_m: 0.0,
            altitude_sigma_m: 0.0,
            bearing_sigma_deg: 0.0,
            range_sigma_m: 0.0,
            rss_sigma_db: 0.0,
            rcs: RCS_MODE_DBSM.map(|m| RcsParams {
                mean_dbsm: m,
                sigma_dbsm: 0.0,
            }),
            drop_prob: 0.0,
            glitch_prob: 0.0,
            clutter: None,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let sigmas = [
            self.position_sigma_m,
            self.altitude_sigma_m,
            self.bearing_sigma_deg,
            self.range_sigma_m,
            self.rss_sigma_db,
        ];
        if sigmas
            .iter()
            .chain(self.rcs.iter().map(|r| &r.sigma_dbsm))
            .any(|s| !(s.is_finite() && *s >= 0.0))
        {
            return Err(Error::InvalidValue("noise sigmas must be finite and >= 0".into()));
        }
        if !(0.0..1.0).contains(&self.drop_prob) {
            return Err(Error::InvalidValue("drop probability must be in [0, 1)".into()));
        }
        if !(0.0..=1.0).contains(&self.glitch_prob) {
            return Err(Error::InvalidValue("glitch probability must be in [0, 1]".into()));
        }
        for (t, pmf) in DroneType::ALL.iter().zip(&self.freq_pmf) {
            let sum: f64 = pmf.iter().map(|(_, p)| p).sum();
            if pmf.is_empty() || pmf.iter().any(|(f, p)| *f <= 0.0 || *p < 0.0) || (sum - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidValue(format!("bad frequency PMF for {t}")));
            }
        }
        Ok(())
    }

    fn sensor_offset(&self, s: SensorName) -> u64 {
        let i = SensorName::ALL.iter().position(|x| *x == s).unwrap_or(0);
        self.clock_offset_ms[i]
    }
}

fn normal(mean: f64, sigma: f64) -> Normal<f64> {
    Normal::new(mean, sigma).expect("sigma validated non-negative")
}

pub fn sample_rcs<R: Rng + ?Sized>(rng: &mut R, p: RcsParams) -> f64 {
    normal(p.mean_dbsm, p.sigma_dbsm).sample(rng)
}

pub fn sample_channel<R: Rng + ?Sized>(rng: &mut R, pmf: &[(f64, f64)]) -> f64 {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for &(f, p) in pmf {
        acc += p;
        if u < acc {
            return f;
        }
    }
    pmf.last().map(|x| x.0).unwrap_or(0.0)
}

/// Report a bearing inside the 180° sector of a linear array.
pub fn fold_bearing(b: f64) -> f64 {
    let b = b.rem_euclid(360.0);
    if b >= 180.0 {
        b - 180.0
    } else {
        b
    }
}

fn free_space_rss(tx_dbm: f64, distance_m: f64, freq_mhz: f64) -> f64 {
    let d_km = (distance_m / 1000.0).max(1e-3);
    tx_dbm - (20.0 * d_km.log10() + 20.0 * freq_mhz.log10() + 32.44)
}

fn stream_id(s: SensorName) -> u64 {
    match s {
        SensorName::Alvira => 1,
        SensorName::Arcus => 2,
        SensorName::Diana => 3,
        SensorName::Venus => 4,
    }
}

/// Simulate every listed sensor observing every truth record.
///
/// Each sensor draws from its own random stream, so the result for one sensor
/// does not depend on which other sensors are simulated.
pub fn simulate_sensors(
    truth: &[DroneTrack],
    sensors: &[SensorSpec],
    noise: &NoiseModel,
) -> Result<Vec<(SensorName, Vec<SensorReading>)>> {
    noise.validate()?;
    if truth.iter().all(|t| t.records.is_empty()) {
        return Err(Error::EmptyInput);
    }
    let frame = LocalFrame::new(&origin());
    let mut out = Vec::with_capacity(sensors.len());
    for spec in sensors {
        let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
        rng.set_stream(stream_id(spec.name));
        let offset = noise.sensor_offset(spec.name);
        let mut readings = Vec::new();

        for track in truth {
            let ti = track.drone_type.index();
            for rec in &track.records {
                if noise.drop_prob > 0.0 && rng.random::<f64>() < noise.drop_prob {
                    continue;
                }
                let t = Timestamp(rec.t.0 + offset);
                let mut r = SensorReading::empty(t, spec.name);
                let truth_pos = rec.position;
                let noisy = |rng: &mut ChaCha8Rng, with_alt: bool| -> GeoPosition {
                    let alt = truth_pos.alt_m.map(|a| {
                        if noise.altitude_sigma_m > 0.0 {
                            (a + normal(0.0, noise.altitude_sigma_m).sample(rng)).max(0.0)
                        } else {
                            a
                        }
                    });
                    let mut p = if noise.position_sigma_m > 0.0 {
                        let (e, n) = frame.to_local(&truth_pos);
                        let d = normal(0.0, noise.position_sigma_m);
                        frame.to_geo(e + d.sample(rng), n + d.sample(rng), alt)
                    } else {
                        GeoPosition { alt_m: alt, ..truth_pos }
                    };
                    if !with_alt {
                        p.alt_m = None;
                    }
                    p
                };
                let true_bearing = bearing_deg(&spec.position, &truth_pos);
                let noisy_bearing = |rng: &mut ChaCha8Rng| -> f64 {
                    let b = true_bearing + normal(0.0, noise.bearing_sigma_deg).sample(rng);
                    let b = b.rem_euclid(360.0);
                    if b >= 360.0 {
                        0.0
                    } else {
                        b
                    }
                };
                match spec.kind {
                    SensorKind::Radar3d | SensorKind::Radar2d => {
                        let three_d = spec.kind == SensorKind::Radar3d;
                        r.position = Some(noisy(&mut rng, three_d));
                        r.bearing_deg = Some(noisy_bearing(&mut rng));
                        let range = if three_d {
                            distance_3d_m(&spec.position, &truth_pos)
                        } else {
                            haversine_m(&spec.position, &truth_pos)
                        };
                        r.range_m = Some((range + normal(0.0, noise.range_sigma_m).sample(&mut rng)).max(0.0));
                        let mut rcs = sample_rcs(&mut rng, noise.rcs[ti]);
                        if three_d && noise.glitch_prob > 0.0 && rng.random::<f64>() < noise.glitch_prob {
                            rcs += noise.glitch_db;
                        }
                        r.rcs_dbsm = Some(rcs);
                    }
                    SensorKind::RfDf => {
                        let b = noisy_bearing(&mut rng);
                        r.bearing_deg = Some(if spec.bearing_ambiguous { fold_bearing(b) } else { b });
                        let f = sample_channel(&mut rng, &noise.freq_pmf[ti]);
                        let d = distance_3d_m(&spec.position, &truth_pos);
                        r.rss_dbm = Some(
                            free_space_rss(noise.tx_power_dbm, d, f)
                                + normal(0.0, noise.rss_sigma_db).sample(&mut rng),
                        );
                        r.freq_mhz = Some(f);
                    }
                }
                readings.push(r);
            }
        }

        if spec.kind == SensorKind::Radar2d {
            if let Some(c) = noise.clutter {
                readings.extend(clutter_readings(truth, spec, &c, offset, &mut rng));
            }
        }
        readings.sort_by(reading_order);
        out.push((spec.name, readings));
    }
    Ok(out)
}

fn clutter_readings(
    truth: &[DroneTrack],
    spec: &SensorSpec,
    c: &ClutterModel,
    offset: u64,
    rng: &mut ChaCha8Rng,
) -> Vec<SensorReading> {
    let (Some(first), Some(last)) = (
        truth.iter().filter_map(|t| t.records.first()).map(|r| r.t).min(),
        truth.iter().filter_map(|t| t.records.last()).map(|r| r.t).max(),
    ) else {
        return Vec::new();
    };
    let local = LocalFrame::new(&spec.position);
    let reflector = local.to_geo(c.east_m, c.north_m, None);
    let jitter = normal(0.0, c.jitter_m);
    let mut out = Vec::new();
    let mut t = first.0 + c.phase_ms;
    while t <= last.0 {
        let p = local.to_geo(c.east_m + jitter.sample(rng), c.north_m + jitter.sample(rng), None);
        out.push(SensorReading {
            position: Some(p),
            bearing_deg: Some(bearing_deg(&spec.position, &reflector)),
            range_m: Some(haversine_m(&spec.position, &p)),
            rcs_dbsm: Some(sample_rcs(rng, c.rcs)),
            ..SensorReading::empty(Timestamp(t + offset), spec.name)
        });
        t += c.period_ms.max(1);
    }
    out
}

/// Write one scenario directory (four sensor files, plus the drone log when
/// `with_log`). Output is a pure function of the arguments.
pub fn emit_scenario(dir: &Path, pattern: PatternId, noise: &NoiseModel, seed: u64, with_log: bool) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let truth = generate_truth(&pattern.pattern(), DEFAULT_SAMPLE_MS, seed)?;
    let noise = NoiseModel {
        seed,
        ..noise.clone()
    };
    let sensors = simulate_sensors(&truth, &SensorSpec::all(), &noise)?;
    for (name, readings) in &sensors {
        ingest::write_sensor_csv(&dir.join(sensor_file_name(*name)), *name, readings)?;
    }
    if with_log {
        let mut log: Vec<DroneLogRecord> = truth.into_iter().flat_map(|t| t.records).collect();
        log.sort_by(ingest::log_order);
        ingest::write_drone_log(&dir.join(DRONE_LOG_FILE), &log)?;
    }
    Ok(())
}

/// Per-scenario seed: mixes the master seed with the pattern and split so that
/// train and test realizations differ.
pub fn scenario_seed(master: u64, pattern: PatternId, test: bool) -> u64 {
    let mut x = master ^ ((pattern as u64 + 1) << 32) ^ if test { 0x9e37_79b9 } else { 0 };
    // splitmix64 finalizer
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Write a complete dataset: `train/` with every training pattern (with logs)
/// and `test/` with every test pattern (without logs).
pub fn emit_dataset(root: &Path, noise: &NoiseModel, seed: u64) -> Result<()> {
    for p in PatternId::TRAINING {
        let dir = root.join(ingest::DatasetLayout::TRAIN_DIR).join(p.scenario_dir());
        emit_scenario(&dir, p, noise, scenario_seed(seed, p, false), true)?;
    }
    for p in PatternId::TESTING {
        let dir = root.join(ingest::DatasetLayout::TEST_DIR).join(p.scenario_dir());
        emit_scenario(&dir, p, noise, scenario_seed(seed, p, true), false)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn horizontal_length(records: &[DroneLogRecord]) -> f64 {
        records
            .windows(2)
            .map(|w| haversine_m(&w[0].position, &w[1].position))
            .sum()
    }

    #[test]
    fn pattern_ids_parse() {
        assert_eq!("S1.1".parse::<PatternId>().unwrap(), PatternId::S1_1);
        assert_eq!("Scenario 2.4".parse::<PatternId>().unwrap(), PatternId::S2_4);
        assert_eq!("s3".parse::<PatternId>().unwrap(), PatternId::S3);
        assert!(matches!("S4.1".parse::<PatternId>(), Err(Error::UnknownPattern(_))));
        assert_eq!(PatternId::S1_1.scenario_dir(), "Scenario 1.1");
        assert_eq!(PatternId::S3.scenario_dir(), "Scenario 3");
    }

    #[test]
    fn pattern_invariants() {
        for id in PatternId::ALL {
            let p = id.pattern();
            p.validate().unwrap();
            let two = id.label().starts_with("S2");
            assert_eq!(p.drones.len(), if two { 2 } else { 1 }, "{id}");
        }
        assert!(PatternId::S3.pattern().drones[0]
            .segments
            .iter()
            .all(|s| !matches!(s, Segment::Hover { .. })));
    }

    #[test]
    fn s1_1_length_and_altitudes() {
        let t = generate_truth(&PatternId::S1_1.pattern(), 1000, 1).unwrap();
        assert_eq!(t.len(), 1);
        let recs = &t[0].records;
        let len = horizontal_length(recs);
        assert!((len - 2000.0).abs() <= 20.0, "length {len}");
        let mut plateaus: Vec<i64> = recs
            .windows(2)
            .filter(|w| w[0].position.alt_m == w[1].position.alt_m)
            .map(|w| w[1].position.alt_m.unwrap().round() as i64)
            .collect();
        plateaus.sort();
        plateaus.dedup();
        assert_eq!(plateaus, vec![50, 100, 150]);
        assert!(recs
            .iter()
            .all(|r| (50.0..=150.0).contains(&r.position.alt_m.unwrap())));
    }

    #[test]
    fn s1_2_hovers_a_minute_at_100m() {
        let t = generate_truth(&PatternId::S1_2.pattern(), 1000, 7).unwrap();
        let recs = &t[0].records;
        let mut best = 0u64;
        let mut run = 0u64;
        for r in recs {
            if r.speed_mps < 0.5 && (r.position.alt_m.unwrap() - 100.0).abs() < 1e-6 {
                run += 1;
                best = best.max(run);
            } else {
                run = 0;
            }
        }
        assert!(best * 1000 >= 60_000, "longest hover {best} samples");
        assert_eq!(t[0].drone_type, DroneType::Phantom4Pro);
    }

    #[test]
    fn s2_1_initial_separation() {
        let t = generate_truth(&PatternId::S2_1.pattern(), 1000, 3).unwrap();
        assert_eq!(t.len(), 2);
        let d = haversine_m(&t[0].records[0].position, &t[1].records[0].position);
        assert!((d - 300.0).abs() <= 1.0, "{d}");
    }

    #[test]
    fn truth_is_kinematically_consistent() {
        for id in PatternId::ALL {
            for track in generate_truth(&id.pattern(), 1000, 11).unwrap() {
                let r = &track.records;
                for k in 1..r.len() {
                    assert!(r[k].speed_mps <= 20.0);
                    if track.segment[k] != track.segment[k - 1] {
                        continue;
                    }
                    let dt = (r[k].t.0 - r[k - 1].t.0) as f64 / 1000.0;
                    let fd = distance_3d_m(&r[k].position, &r[k - 1].position) / dt;
                    // legs inside a zigzag share a segment index; skip turn samples
                    if (fd - r[k].speed_mps).abs() > 0.02 * r[k].speed_mps.max(0.5) {
                        let turning = matches!(
                            id.pattern().drones.iter().find(|d| d.drone_type == track.drone_type).unwrap().segments[track.segment[k]],
                            Segment::Zigzag { .. }
                        );
                        assert!(turning, "{id} sample {k}: fd {fd} vs {}", r[k].speed_mps);
                    }
                }
            }
        }
    }

    #[test]
    fn parrot_never_slows_down() {
        let t = generate_truth(&PatternId::S3.pattern(), 1000, 5).unwrap();
        let recs = &t[0].records;
        let mut run = 0;
        for r in recs {
            run = if r.speed_mps < 5.0 { run + 1 } else { 0 };
            assert!(run < 5);
        }
    }

    #[test]
    fn diana_folds_bearing() {
        assert_eq!(fold_bearing(210.0), 30.0);
        assert_eq!(fold_bearing(30.0), 30.0);
        assert_eq!(fold_bearing(180.0), 0.0);
        assert_eq!(fold_bearing(359.5), 179.5);
    }

    #[test]
    fn diana_reports_target_in_southern_sector_folded() {
        // a target south-west of Diana has a true bearing in (180, 270)
        let frame = LocalFrame::new(&origin());
        let pos = frame.to_geo(-500.0, -866.0, Some(50.0));
        let truth = vec![DroneTrack {
            drone_type: DroneType::MavicPro,
            records: vec![DroneLogRecord {
                t: Timestamp(EPOCH_MS),
                position: pos,
                speed_mps: 0.0,
                drone_type: DroneType::MavicPro,
            }],
            segment: vec![0],
        }];
        let diana = SensorSpec::of(SensorName::Diana);
        let out = simulate_sensors(&truth, &[diana], &NoiseModel::noiseless()).unwrap();
        let true_b = bearing_deg(&diana.position, &pos);
        assert!((200.0..220.0).contains(&true_b));
        let reported = out[0].1[0].bearing_deg.unwrap();
        assert!((reported - (true_b - 180.0)).abs() < 1e-9);
    }

    #[test]
    fn parrot_frequencies_are_single_channel() {
        let truth = generate_truth(&PatternId::S3.pattern(), 1000, 2).unwrap();
        let out = simulate_sensors(&truth, &SensorSpec::all(), &NoiseModel::default()).unwrap();
        for (name, readings) in out {
            if name.spec().kind == SensorKind::RfDf {
                assert!(!readings.is_empty());
                assert!(readings.iter().all(|r| r.freq_mhz == Some(2440.0)));
            }
        }
    }

    #[test]
    fn noiseless_arcus_equals_truth() {
        let truth = generate_truth(&PatternId::S1_4.pattern(), 1000, 9).unwrap();
        let out = simulate_sensors(&truth, &[SensorSpec::of(SensorName::Arcus)], &NoiseModel::noiseless()).unwrap();
        let arcus = &out[0].1;
        assert_eq!(arcus.len(), truth[0].records.len());
        for (r, t) in arcus.iter().zip(&truth[0].records) {
            assert_eq!(r.position.unwrap(), t.position);
        }
    }

    #[test]
    fn sensor_kinds_emit_their_fields() {
        let truth = generate_truth(&PatternId::S2_1.pattern(), 1000, 4).unwrap();
        let out = simulate_sensors(&truth, &SensorSpec::all(), &NoiseModel::default()).unwrap();
        for (name, readings) in &out {
            for r in readings {
                assert!(crate::types::validate_reading(r).is_ok(), "{name}: {r:?}");
                match name.spec().kind {
                    SensorKind::Radar3d => assert!(r.position.unwrap().alt_m.is_some() && r.rcs_dbsm.is_some()),
                    SensorKind::Radar2d => assert!(r.position.unwrap().alt_m.is_none() && r.rcs_dbsm.is_some()),
                    SensorKind::RfDf => {
                        assert!(r.range_m.is_none() && r.freq_mhz.is_some() && r.rss_dbm.is_some())
                    }
                }
            }
        }
    }

    #[test]
    fn rcs_samples_stay_within_six_sigma() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let noise = NoiseModel::default();
        for p in noise.rcs {
            for _ in 0..1000 {
                let x = sample_rcs(&mut rng, p);
                assert!((x - p.mean_dbsm).abs() <= 6.0 * p.sigma_dbsm);
            }
        }
    }

    #[test]
    fn channel_pmf_matches_empirically() {
        let noise = NoiseModel::default();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for pmf in &noise.freq_pmf {
            let sum: f64 = pmf.iter().map(|x| x.1).sum();
            assert!((sum - 1.0).abs() < 1e-9);
            let n = 10_000;
            let mut counts = vec![0usize; pmf.len()];
            for _ in 0..n {
                let f = sample_channel(&mut rng, pmf);
                counts[pmf.iter().position(|x| x.0 == f).unwrap()] += 1;
            }
            let tv: f64 = pmf
                .iter()
                .zip(&counts)
                .map(|((_, p), c)| (p - *c as f64 / n as f64).abs())
                .sum::<f64>()
                / 2.0;
            assert!(tv <= 0.03, "tv {tv}");
        }
    }

    #[test]
    fn default_pmfs_put_mass_on_modes() {
        let n = NoiseModel::default();
        assert!(n.freq_pmf[DroneType::MavicPro.index()].contains(&(2406.5, 0.44)));
        assert_eq!(n.freq_pmf[DroneType::ParrotDisco.index()], vec![(2440.0, 1.0)]);
        n.validate().unwrap();
    }

    #[test]
    fn noise_validation() {
        let bad = NoiseModel {
            drop_prob: 1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = NoiseModel {
            position_sigma_m: -1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn zero_sample_period_is_rejected() {
        assert!(generate_truth(&PatternId::S1_1.pattern(), 0, 0).is_err());
    }
}
