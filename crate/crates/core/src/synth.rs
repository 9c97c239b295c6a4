//! Synthetic-flight generator with known ground truth.
//!
//! Every pipeline stage can be verified at desk scale against flights built
//! here: the anomaly map, core-field drift, aircraft TL field (with known
//! coefficients), structured cockpit interference, and white sensor noise
//! are all constructed explicitly, and the exact anomaly and trajectory are
//! emitted alongside the sensor columns.
//!
//! Scalar magnetometer columns are assembled as
//! `core + anomaly + A·β* + interference mix + white noise`,
//! where `A` is the Tolles-Lawson design matrix of the emitted fluxgate.

use std::f64::consts::PI;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use nalgebra::{DMatrix, Matrix3, Vector3};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::dataset::FlightFrame;
use crate::error::{Error, Result};
use crate::rng::{purpose, stream};
use crate::textio::{fmt_f64, parse_f64};
use crate::tolles_lawson::{tl_design_matrix, TlCoefficients};

/// Gravitational acceleration used for coordinated-turn bank angles.
const GRAVITY: f64 = 9.81;
/// Random-phase cosines in an anomaly map.
const MAP_COMPONENTS: usize = 200;
/// Scale height for the pressure model, meters.
const PRESSURE_SCALE_HEIGHT: f64 = 8435.0;
const SEA_LEVEL_PRESSURE_HPA: f64 = 1013.25;
const SEA_LEVEL_DENSITY: f64 = 1.225;
const PRESSURE_NOISE_HPA: f64 = 0.02;

// ── Anomaly map ──────────────────────────────────────────────────────────

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnomalyMapSpec {
    /// Side length of the region the map is meant to cover, meters.
    pub extent_m: f64,
    /// Correlation length of the random field, meters.
    pub correlation_length_m: f64,
    /// Target standard deviation of the field, nanotesla.
    pub amplitude_nt: f64,
}

/// A smooth band-limited Gaussian random field over (x, y), realized as a
/// fixed sum of random-phase cosines. Evaluation is deterministic and
/// infinitely differentiable.
#[derive(Debug, Clone)]
pub struct AnomalyMap {
    freq: Vec<(f64, f64)>,
    phase: Vec<f64>,
    scale: f64,
}

impl AnomalyMap {
    pub fn value(&self, x: f64, y: f64) -> f64 {
        let mut sum = 0.0;
        for ((wx, wy), phi) in self.freq.iter().zip(&self.phase) {
            sum += (wx * x + wy * y + phi).cos();
        }
        self.scale * sum
    }
}

/// Build the map for `spec` from `seed`. Frequencies follow the spectral
/// density of a squared-exponential covariance with the requested
/// correlation length, so the realized field has std ≈ `amplitude_nt` over
/// regions much larger than the correlation length.
pub fn gen_anomaly_map(spec: &AnomalyMapSpec, seed: u64) -> Result<AnomalyMap> {
    if !(spec.extent_m > 0.0) {
        return Err(Error::invalid("map extent must be > 0"));
    }
    if !(spec.correlation_length_m > 0.0) {
        return Err(Error::invalid("correlation length must be > 0"));
    }
    if spec.amplitude_nt < 0.0 {
        return Err(Error::invalid("map amplitude must be >= 0"));
    }
    let mut rng = stream(seed, 0, purpose::MAP);
    let inv_len = 1.0 / spec.correlation_length_m;
    let mut freq = Vec::with_capacity(MAP_COMPONENTS);
    let mut phase = Vec::with_capacity(MAP_COMPONENTS);
    for _ in 0..MAP_COMPONENTS {
        let wx: f64 = rng.sample::<f64, _>(StandardNormal) * inv_len;
        let wy: f64 = rng.sample::<f64, _>(StandardNormal) * inv_len;
        freq.push((wx, wy));
        phase.push(rng.gen_range(0.0..2.0 * PI));
    }
    Ok(AnomalyMap {
        freq,
        phase,
        scale: spec.amplitude_nt * (2.0 / MAP_COMPONENTS as f64).sqrt(),
    })
}

// ── Trajectory ───────────────────────────────────────────────────────────

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManeuverSegment {
    pub duration_s: f64,
    pub turn_rate_deg_s: f64,
    pub climb_rate_m_s: f64,
}

/// Maneuver schedule; segments repeat until the flight duration is filled.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySpec {
    pub speed_m_s: f64,
    pub initial_heading_deg: f64,
    pub initial_alt_m: f64,
    pub maneuvers: Vec<ManeuverSegment>,
}

struct TrajectorySample {
    x: f64,
    y: f64,
    alt: f64,
    heading: f64,
    pitch: f64,
    roll: f64,
    v_east: f64,
}

fn integrate_trajectory(spec: &TrajectorySpec, n: usize, dt: f64) -> Result<Vec<TrajectorySample>> {
    if !(spec.speed_m_s > 0.0) {
        return Err(Error::invalid("speed must be > 0"));
    }
    if spec.maneuvers.is_empty() {
        return Err(Error::invalid("maneuver schedule is empty"));
    }
    let cycle: f64 = spec.maneuvers.iter().map(|m| m.duration_s).sum();
    if !(cycle > 0.0) {
        return Err(Error::invalid("maneuver schedule has zero duration"));
    }

    let mut out = Vec::with_capacity(n);
    let (mut x, mut y, mut alt) = (0.0, 0.0, spec.initial_alt_m);
    let mut heading = spec.initial_heading_deg.to_radians();
    let v = spec.speed_m_s;
    for i in 0..n {
        let t = i as f64 * dt;
        let mut phase = t % cycle;
        let mut segment = &spec.maneuvers[0];
        for m in &spec.maneuvers {
            if phase < m.duration_s {
                segment = m;
                break;
            }
            phase -= m.duration_s;
        }
        let omega = segment.turn_rate_deg_s.to_radians();
        let climb = segment.climb_rate_m_s;

        let v_east = v * heading.sin();
        let v_north = v * heading.cos();
        let pitch = (climb / v).clamp(-0.5, 0.5).asin();
        let roll = (v * omega / GRAVITY).atan();
        out.push(TrajectorySample {
            x,
            y,
            alt,
            heading,
            pitch,
            roll,
            v_east,
        });

        x += v_east * dt;
        y += v_north * dt;
        alt += climb * dt;
        heading += omega * dt;
    }
    Ok(out)
}

/// Body-from-world rotation for yaw (from north), pitch, roll.
fn world_to_body(heading: f64, pitch: f64, roll: f64) -> Matrix3<f64> {
    // World frame: x east, y north, z up. Yaw rotates about z (compass
    // sense), pitch about the body y, roll about the body x.
    let (sy, cy) = heading.sin_cos();
    let yaw = Matrix3::new(cy, sy, 0.0, -sy, cy, 0.0, 0.0, 0.0, 1.0);
    let (sp, cp) = pitch.sin_cos();
    let pitch_m = Matrix3::new(cp, 0.0, -sp, 0.0, 1.0, 0.0, sp, 0.0, cp);
    let (sr, cr) = roll.sin_cos();
    let roll_m = Matrix3::new(1.0, 0.0, 0.0, 0.0, cr, sr, 0.0, -sr, cr);
    roll_m * pitch_m * yaw
}

// ── Interference ─────────────────────────────────────────────────────────

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterferenceSpec {
    pub channels: usize,
    /// Target std of each channel, in the units it leaks into (nT for the
    /// magnetometer mixes).
    pub amplitude: f64,
    /// AR(1) coefficient of the colored component, per 0.1 s step.
    pub ar_coeff: f64,
}

/// One structured channel: AR(1)-filtered noise plus a harmonic tone. The
/// contaminants have their own dynamics and time scales; they are not white.
fn gen_channel(spec: &InterferenceSpec, seed: u64, channel: u64, n: usize, dt: f64) -> Vec<f64> {
    let mut rng = stream(seed, channel, purpose::INTERFERENCE);
    let rho = spec.ar_coeff;
    let stationary = 1.0 / (1.0 - rho * rho).sqrt();
    let tone_hz = rng.gen_range(0.3..1.8);
    let tone_phase = rng.gen_range(0.0..2.0 * PI);
    let mut state = 0.0;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let eps: f64 = rng.sample(StandardNormal);
        state = rho * state + eps;
        let tone = (2.0 * PI * tone_hz * i as f64 * dt + tone_phase).sin();
        out.push(spec.amplitude * (0.7 * state / stationary + 0.7 * tone));
    }
    out
}

// ── Flight generation ────────────────────────────────────────────────────

#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub seed: u64,
    pub duration_s: f64,
    pub sample_period_s: f64,
    pub map: AnomalyMapSpec,
    /// Mean core-field magnitude, nT.
    pub core_field_nt: f64,
    /// Amplitude of the slow core/diurnal drift, nT.
    pub core_drift_nt: f64,
    pub trajectory: TrajectorySpec,
    /// True aircraft-field coefficients β*.
    pub tl_coefficients: TlCoefficients,
    pub interference: InterferenceSpec,
    /// White-noise std per scalar magnetometer, nT.
    pub mag_noise_nt: f64,
    pub field_inclination_deg: f64,
    pub field_declination_deg: f64,
    pub flight_id: String,
}

impl SynthConfig {
    /// The documented desk-scale fixture: a 30-minute racetrack circuit
    /// re-flown every 180 s, with interference dominating the anomaly and
    /// the anomaly dominating the core drift.
    pub fn default_fixture(seed: u64) -> SynthConfig {
        SynthConfig {
            seed,
            duration_s: 1800.0,
            sample_period_s: 0.1,
            map: AnomalyMapSpec {
                extent_m: 10_000.0,
                correlation_length_m: 1500.0,
                amplitude_nt: 100.0,
            },
            core_field_nt: 50_000.0,
            core_drift_nt: 8.0,
            trajectory: TrajectorySpec {
                speed_m_s: 60.0,
                initial_heading_deg: 90.0,
                initial_alt_m: 300.0,
                maneuvers: vec![
                    ManeuverSegment {
                        duration_s: 60.0,
                        turn_rate_deg_s: 0.0,
                        climb_rate_m_s: 2.0,
                    },
                    ManeuverSegment {
                        duration_s: 30.0,
                        turn_rate_deg_s: 6.0,
                        climb_rate_m_s: 0.0,
                    },
                    ManeuverSegment {
                        duration_s: 60.0,
                        turn_rate_deg_s: 0.0,
                        climb_rate_m_s: -2.0,
                    },
                    ManeuverSegment {
                        duration_s: 30.0,
                        turn_rate_deg_s: 6.0,
                        climb_rate_m_s: 0.0,
                    },
                ],
            },
            tl_coefficients: TlCoefficients {
                permanent: [20.0, -35.0, 12.0],
                induced: [2.6e-3, -1.4e-3, 1.9e-3, -2.3e-3, 1.1e-3, -2.8e-3],
                eddy: [
                    3.2e-3, -2.1e-3, 1.2e-3, //
                    -2.7e-3, 1.6e-3, -0.9e-3, //
                    2.1e-3, -1.2e-3, 2.4e-3,
                ],
            },
            interference: InterferenceSpec {
                channels: 3,
                amplitude: 250.0,
                ar_coeff: 0.995,
            },
            mag_noise_nt: 1.0,
            field_inclination_deg: 70.0,
            field_declination_deg: -10.0,
            flight_id: "synth".to_string(),
        }
    }

    /// A short, magnetically quiet calibration flight: rich attitude
    /// maneuvers, constant Earth field (flat map, no drift), no
    /// interference, no sensor noise. Used to verify coefficient recovery.
    pub fn calibration_fixture(seed: u64) -> SynthConfig {
        let mut config = SynthConfig::default_fixture(seed);
        config.duration_s = 240.0;
        config.map.amplitude_nt = 0.0;
        config.core_drift_nt = 0.0;
        config.interference.amplitude = 0.0;
        config.mag_noise_nt = 0.0;
        config.trajectory = TrajectorySpec {
            speed_m_s: 60.0,
            initial_heading_deg: 0.0,
            initial_alt_m: 500.0,
            maneuvers: vec![
                ManeuverSegment {
                    duration_s: 10.0,
                    turn_rate_deg_s: 0.0,
                    climb_rate_m_s: 3.0,
                },
                ManeuverSegment {
                    duration_s: 15.0,
                    turn_rate_deg_s: 8.0,
                    climb_rate_m_s: -1.0,
                },
                ManeuverSegment {
                    duration_s: 10.0,
                    turn_rate_deg_s: -4.0,
                    climb_rate_m_s: -3.0,
                },
                ManeuverSegment {
                    duration_s: 15.0,
                    turn_rate_deg_s: -8.0,
                    climb_rate_m_s: 1.0,
                },
                ManeuverSegment {
                    duration_s: 12.0,
                    turn_rate_deg_s: 3.0,
                    climb_rate_m_s: 2.0,
                },
            ],
        };
        config.flight_id = "synth_cal".to_string();
        config
    }

    fn validate(&self) -> Result<()> {
        if !(self.sample_period_s > 0.0) {
            return Err(Error::invalid("sample_period must be > 0"));
        }
        // The anomaly is a weak signal by construction; it must stay far
        // below the core field.
        if self.map.amplitude_nt * 10.0 > self.core_field_nt {
            return Err(Error::invalid(
                "anomaly amplitude must be at least 10x weaker than the core field",
            ));
        }
        Ok(())
    }
}

/// Everything needed to verify a generated flight.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub beta: TlCoefficients,
    pub seed: u64,
    pub map: AnomalyMapSpec,
}

#[derive(Debug, Clone)]
pub struct SynthFlight {
    pub frame: FlightFrame,
    pub truth: GroundTruth,
}

/// Generate a flight. The emitted frame carries the sensor columns plus the
/// exact truth columns `anomaly`, `core`, `aircraft_tl`, and
/// `utm_x`/`utm_y`/`utm_z`.
pub fn gen_flight(config: &SynthConfig) -> Result<SynthFlight> {
    config.validate()?;
    let dt = config.sample_period_s;
    let n = (config.duration_s / dt).round() as usize;
    if n < 10 {
        return Err(Error::invalid(format!(
            "duration {}s is fewer than 10 samples",
            config.duration_s
        )));
    }

    let map = gen_anomaly_map(&config.map, config.seed)?;
    let path = integrate_trajectory(&config.trajectory, n, dt)?;

    // Earth field: scalar magnitude along the path and world direction.
    let incl = config.field_inclination_deg.to_radians();
    let decl = config.field_declination_deg.to_radians();
    let field_dir = Vector3::new(
        incl.cos() * decl.sin(),
        incl.cos() * decl.cos(),
        -incl.sin(),
    );

    let mut drift_rng = stream(config.seed, 0, purpose::SENSOR_NOISE);
    let drift_phase: f64 = drift_rng.gen_range(0.0..2.0 * PI);
    let drift_phase2: f64 = drift_rng.gen_range(0.0..2.0 * PI);

    let mut anomaly = Vec::with_capacity(n);
    let mut core = Vec::with_capacity(n);
    let mut earth = Vec::with_capacity(n);
    let mut time = Vec::with_capacity(n);
    for (i, s) in path.iter().enumerate() {
        let t = i as f64 * dt;
        time.push(t);
        let a = map.value(s.x, s.y);
        // Two slow sinusoids; period scaled to the flight so the drift is
        // visible but far from the maneuver band.
        let drift = config.core_drift_nt
            * (0.8 * (2.0 * PI * t / (config.duration_s * 2.0) + drift_phase).sin()
                + 0.2 * (2.0 * PI * t / (config.duration_s * 0.5) + drift_phase2).sin());
        let c = config.core_field_nt + drift;
        anomaly.push(a);
        core.push(c);
        earth.push(c + a);
    }

    // Fluxgates: the Earth vector rotated into the body frame. Fluxgate C
    // is the same sensor behind a small fixed mounting misalignment.
    let misalign = world_to_body(2.0f64.to_radians(), 1.0f64.to_radians(), 0.0);
    let mut flux_b = DMatrix::zeros(n, 3);
    let mut flux_c = DMatrix::zeros(n, 3);
    for (i, s) in path.iter().enumerate() {
        let rot = world_to_body(s.heading, s.pitch, s.roll);
        let world = field_dir * earth[i];
        let body = rot * world;
        let body_c = misalign * body;
        for j in 0..3 {
            flux_b[(i, j)] = body[j];
            flux_c[(i, j)] = body_c[j];
        }
    }

    // Aircraft field from the emitted fluxgate and the true coefficients.
    let design = tl_design_matrix(&flux_b, dt)?;
    let aircraft_vec = &design * config.tl_coefficients.as_vector();
    let aircraft: Vec<f64> = aircraft_vec.iter().copied().collect();

    // Structured interference channels and their per-magnetometer mixes.
    let channels: Vec<Vec<f64>> = (0..config.interference.channels)
        .map(|k| gen_channel(&config.interference, config.seed, k as u64, n, dt))
        .collect();
    let mut mix_rng = stream(config.seed, 1000, purpose::INTERFERENCE);
    let mag_names = ["mag_3_uc", "mag_4_uc", "mag_5_uc"];
    let mixes: Vec<Vec<f64>> = (0..mag_names.len())
        .map(|_| {
            (0..config.interference.channels)
                .map(|_| mix_rng.gen_range(0.4..1.0))
                .collect()
        })
        .collect();

    let mut columns: Vec<(String, Vec<f64>)> = Vec::new();
    columns.push(("t".into(), time.clone()));

    let mut compensated = Vec::new();
    for (m, name) in mag_names.iter().enumerate() {
        let mut noise_rng = stream(config.seed, 10 + m as u64, purpose::SENSOR_NOISE);
        let mut uc = Vec::with_capacity(n);
        let mut c = Vec::with_capacity(n);
        for i in 0..n {
            let mut interference = 0.0;
            for (k, channel) in channels.iter().enumerate() {
                interference += mixes[m][k] * channel[i];
            }
            let noise: f64 =
                noise_rng.sample::<f64, _>(StandardNormal) * config.mag_noise_nt;
            let total = earth[i] + aircraft[i] + interference + noise;
            uc.push(total);
            c.push(total - aircraft[i]);
        }
        columns.push((name.to_string(), uc));
        compensated.push(c);
    }
    for (m, c) in compensated.into_iter().enumerate() {
        columns.push((format!("mag_{}_c", m + 3), c));
    }

    for (j, axis) in ["x", "y", "z"].iter().enumerate() {
        columns.push((
            format!("flux_b_{axis}"),
            (0..n).map(|i| flux_b[(i, j)]).collect(),
        ));
    }
    for (j, axis) in ["x", "y", "z"].iter().enumerate() {
        columns.push((
            format!("flux_c_{axis}"),
            (0..n).map(|i| flux_c[(i, j)]).collect(),
        ));
    }

    // Diurnal: the base-station view of the same slow drift.
    columns.push((
        "diurnal".into(),
        (0..n).map(|i| core[i] - config.core_field_nt).collect(),
    ));

    // Pressures from altitude and airspeed.
    let mut p_rng = stream(config.seed, 20, purpose::SENSOR_NOISE);
    let mut static_p = Vec::with_capacity(n);
    let mut total_p = Vec::with_capacity(n);
    for s in &path {
        let stat = SEA_LEVEL_PRESSURE_HPA * (-s.alt / PRESSURE_SCALE_HEIGHT).exp();
        let density = SEA_LEVEL_DENSITY * (-s.alt / PRESSURE_SCALE_HEIGHT).exp();
        let dynamic_hpa = 0.5 * density * config.trajectory.speed_m_s.powi(2) / 100.0;
        let n1: f64 = p_rng.sample(StandardNormal);
        let n2: f64 = p_rng.sample(StandardNormal);
        static_p.push(stat + PRESSURE_NOISE_HPA * n1);
        total_p.push(stat + dynamic_hpa + PRESSURE_NOISE_HPA * n2);
    }
    columns.push(("static_p".into(), static_p));
    columns.push(("total_p".into(), total_p));

    // INS channels: truth plus slow drift errors.
    let mut ins_rng = stream(config.seed, 30, purpose::SENSOR_NOISE);
    let mut drift_vw = 0.0;
    let mut drift_pos = [0.0f64; 3];
    let mut ins_vw = Vec::with_capacity(n);
    let mut ins_wander = Vec::with_capacity(n);
    let mut ins_lat = Vec::with_capacity(n);
    let mut ins_lon = Vec::with_capacity(n);
    let mut ins_alt = Vec::with_capacity(n);
    let wander_phase: f64 = ins_rng.gen_range(0.0..2.0 * PI);
    for (i, s) in path.iter().enumerate() {
        let t = i as f64 * dt;
        drift_vw += ins_rng.sample::<f64, _>(StandardNormal) * 0.002;
        for d in drift_pos.iter_mut() {
            *d += ins_rng.sample::<f64, _>(StandardNormal) * 0.01;
        }
        ins_vw.push(-s.v_east + drift_vw);
        ins_wander.push(0.2 * (2.0 * PI * t / 900.0 + wander_phase).sin() + 1e-4 * drift_vw);
        ins_lat.push(45.0 + (s.y + drift_pos[1]) / 111_320.0);
        ins_lon.push(-75.0 + (s.x + drift_pos[0]) / 78_850.0);
        ins_alt.push(s.alt + drift_pos[2]);
    }
    columns.push(("ins_vw".into(), ins_vw));
    columns.push(("ins_wander".into(), ins_wander));
    columns.push(("ins_lat".into(), ins_lat));
    columns.push(("ins_lon".into(), ins_lon));
    columns.push(("ins_alt".into(), ins_alt));

    // Voltage/current channels: one servo line that carries channel 0, and
    // two near-constant lines that the variance filter should drop.
    let vol_srvo: Vec<f64> = (0..n)
        .map(|i| {
            let c0 = channels.first().map_or(0.0, |c| c[i]);
            28.0 + 2e-3 * c0
        })
        .collect();
    columns.push(("vol_srvo".into(), vol_srvo));

    // Rare-event current channels: flat except for brief actuations, so
    // their min-max-normalized variance falls below the exclusion
    // threshold on a full-length flight.
    let pulse = |t: f64, windows: &[(f64, f64)], height: f64| -> f64 {
        for &(start, len) in windows {
            if t >= start && t < start + len {
                let phase = (t - start) / len;
                return height * (PI * phase).sin().powi(2);
            }
        }
        0.0
    };
    let dur = config.duration_s;
    let mut quiet_rng = stream(config.seed, 40, purpose::SENSOR_NOISE);
    columns.push((
        "cur_com_1".into(),
        (0..n)
            .map(|i| {
                let t = i as f64 * dt;
                0.5 + pulse(t, &[(0.37 * dur, 1.2), (0.81 * dur, 1.3)], 0.8)
                    + 1e-4 * quiet_rng.sample::<f64, _>(StandardNormal)
            })
            .collect(),
    ));
    columns.push((
        "cur_flap".into(),
        (0..n)
            .map(|i| {
                let t = i as f64 * dt;
                0.02 + pulse(t, &[(0.21 * dur, 1.5), (0.63 * dur, 1.5)], 1.4)
                    + 5e-5 * quiet_rng.sample::<f64, _>(StandardNormal)
            })
            .collect(),
    ));

    // Exact truth columns.
    columns.push(("anomaly".into(), anomaly));
    columns.push(("core".into(), core));
    columns.push(("aircraft_tl".into(), aircraft));
    columns.push(("utm_x".into(), path.iter().map(|s| s.x).collect()));
    columns.push(("utm_y".into(), path.iter().map(|s| s.y).collect()));
    columns.push(("utm_z".into(), path.iter().map(|s| s.alt).collect()));

    let frame = FlightFrame::new(config.flight_id.clone(), dt, columns)?;
    Ok(SynthFlight {
        frame,
        truth: GroundTruth {
            beta: config.tl_coefficients.clone(),
            seed: config.seed,
            map: config.map,
        },
    })
}

// ── Ground-truth sidecar ─────────────────────────────────────────────────

const TRUTH_HEADER: &str = "magnav-truth v1";

/// Write the sidecar file carrying β*, the seed, and the map spec.
pub fn write_truth(truth: &GroundTruth, path: impl AsRef<Path>) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    writeln!(w, "{TRUTH_HEADER}")?;
    writeln!(w, "seed {}", truth.seed)?;
    let beta = truth.beta.as_vector();
    for (i, name) in TlCoefficients::NAMES.iter().enumerate() {
        writeln!(w, "beta {name} {}", fmt_f64(beta[i]))?;
    }
    writeln!(w, "map extent_m {}", fmt_f64(truth.map.extent_m))?;
    writeln!(
        w,
        "map correlation_length_m {}",
        fmt_f64(truth.map.correlation_length_m)
    )?;
    writeln!(w, "map amplitude_nt {}", fmt_f64(truth.map.amplitude_nt))?;
    writeln!(w, "end")?;
    w.flush()?;
    Ok(())
}

pub fn read_truth(path: impl AsRef<Path>) -> Result<GroundTruth> {
    let file = std::fs::File::open(path)?;
    let mut lines = BufReader::new(file).lines();
    let mut next = || -> Result<String> {
        lines
            .next()
            .ok_or_else(|| Error::ModelFormat("unexpected end of truth file".into()))?
            .map_err(Error::from)
    };
    let header = next()?;
    if header.trim() != TRUTH_HEADER {
        return Err(Error::ModelFormat(format!("bad header `{header}`")));
    }
    let seed_line = next()?;
    let seed: u64 = seed_line
        .trim()
        .strip_prefix("seed")
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| Error::ModelFormat(format!("bad seed line `{seed_line}`")))?;
    let mut beta = nalgebra::DVector::zeros(18);
    for (i, name) in TlCoefficients::NAMES.iter().enumerate() {
        let line = next()?;
        let rest = line
            .trim()
            .strip_prefix("beta ")
            .and_then(|s| s.strip_prefix(name))
            .ok_or_else(|| Error::ModelFormat(format!("expected `beta {name} ...`")))?;
        beta[i] = parse_f64(rest).ok_or_else(|| Error::ModelFormat(format!("bad float `{rest}`")))?;
    }
    let mut map_field = |key: &str| -> Result<f64> {
        let line = next()?;
        let rest = line
            .trim()
            .strip_prefix("map ")
            .and_then(|s| s.strip_prefix(key))
            .ok_or_else(|| Error::ModelFormat(format!("expected `map {key} ...`")))?;
        parse_f64(rest).ok_or_else(|| Error::ModelFormat(format!("bad float `{rest}`")))
    };
    let extent_m = map_field("extent_m")?;
    let correlation_length_m = map_field("correlation_length_m")?;
    let amplitude_nt = map_field("amplitude_nt")?;
    Ok(GroundTruth {
        beta: TlCoefficients::from_vector(&beta)?,
        seed,
        map: AnomalyMapSpec {
            extent_m,
            correlation_length_m,
            amplitude_nt,
        },
    })
}
