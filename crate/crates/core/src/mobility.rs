//! Random waypoint with pause, plus the per-round choice of which nodes move.

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{distance, Point, Region};
use crate::world::NodeId;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MobilityParams {
    pub mobile_fraction: f64,
    pub speed_min: f64,
    pub speed_max: f64,
    pub pause_min: f64,
    pub pause_max: f64,
}

impl Default for MobilityParams {
    fn default() -> Self {
        Self {
            mobile_fraction: 0.3,
            speed_min: 0.5,
            speed_max: 1.0,
            pause_min: 30.0,
            pause_max: 600.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Moving,
    Paused,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaypointState {
    pub destination: Point,
    pub speed: f64,
    pub pause_remaining: f64,
    pub phase: Phase,
}

impl WaypointState {
    /// Speed the node is travelling at right now.
    pub fn current_speed(&self) -> f64 {
        match self.phase {
            Phase::Moving => self.speed,
            Phase::Paused => 0.0,
        }
    }
}

/// Fresh destination and speed, both uniform.
pub fn assign_waypoint<R: Rng + ?Sized>(region: &Region, params: &MobilityParams, rng: &mut R) -> WaypointState {
    let destination = region.sample_point(rng);
    let speed = if params.speed_max > params.speed_min {
        rng.gen_range(params.speed_min..=params.speed_max)
    } else {
        params.speed_min
    };
    WaypointState {
        destination,
        speed,
        pause_remaining: 0.0,
        phase: Phase::Moving,
    }
}

fn draw_pause<R: Rng + ?Sized>(params: &MobilityParams, rng: &mut R) -> f64 {
    if params.pause_max > params.pause_min {
        rng.gen_range(params.pause_min..=params.pause_max)
    } else {
        params.pause_min
    }
}

/// Moves a node for `dt` seconds and returns its new position.
///
/// Travel never overshoots a destination. Arrival starts a pause; when a
/// pause runs out inside `dt` a new waypoint is drawn and the leftover time
/// is spent moving towards it.
pub fn advance<R: Rng + ?Sized>(
    position: Point,
    state: &mut WaypointState,
    dt: f64,
    region: &Region,
    params: &MobilityParams,
    rng: &mut R,
) -> Point {
    let mut pos = position;
    let mut remaining = dt;
    while remaining > 0.0 {
        match state.phase {
            Phase::Moving => {
                let d = distance(pos, state.destination);
                let arrival = if state.speed > 0.0 {
                    d / state.speed
                } else {
                    f64::INFINITY
                };
                if arrival <= remaining {
                    pos = state.destination;
                    remaining -= arrival;
                    state.phase = Phase::Paused;
                    state.pause_remaining = draw_pause(params, rng);
                } else {
                    let step = state.speed * remaining / d;
                    pos = Point::new(
                        pos.x + (state.destination.x - pos.x) * step,
                        pos.y + (state.destination.y - pos.y) * step,
                    );
                    remaining = 0.0;
                }
            }
            Phase::Paused => {
                if state.pause_remaining > remaining {
                    state.pause_remaining -= remaining;
                    remaining = 0.0;
                } else {
                    remaining -= state.pause_remaining;
                    *state = assign_waypoint(region, params, rng);
                }
            }
        }
    }
    pos
}

/// `floor(fraction * alive.len())` distinct ids sampled without replacement,
/// returned in ascending order.
pub fn select_mobile_subset<R: Rng + ?Sized>(alive: &[NodeId], fraction: f64, rng: &mut R) -> Vec<NodeId> {
    let fraction = fraction.clamp(0.0, 1.0);
    let count = (fraction * alive.len() as f64 + 1e-9).floor() as usize;
    let count = count.min(alive.len());
    let mut chosen: Vec<NodeId> = index::sample(rng, alive.len(), count)
        .into_iter()
        .map(|i| alive[i])
        .collect();
    chosen.sort_unstable();
    chosen
}
