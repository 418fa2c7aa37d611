use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{stream_rng, Line, Network, SynthConfig};
use crate::error::Result;
use crate::model::{DayType, Itinerary, Leg, Mode, PrivateLeg, PtLeg, Timestamp, TripChain};

const POPULATION_SALT: u64 = 0x504F_5055_4C41_5400;
const MAX_TRANSFERS: usize = 3;
/// Minimum stationary time between two chains of one itinerary.
const CHAIN_GAP_S: i64 = 600;

fn weighted_pick<R: Rng>(rng: &mut R, weights: &[f64]) -> Option<usize> {
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return None;
    }
    let mut u = rng.random::<f64>() * total;
    let mut last = None;
    for (i, &w) in weights.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        if u < w {
            return Some(i);
        }
        u -= w;
        last = Some(i);
    }
    last
}

fn dist2(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0) * (a.0 - b.0) + (a.1 - b.1) * (a.1 - b.1)
}

fn speed_mps(mode: Mode) -> f64 {
    match mode {
        Mode::Walking => 1.3,
        Mode::Cycling => 4.5,
        Mode::PrivateVehicle => 11.0,
        _ => 2.0,
    }
}

fn duration_range_s(mode: Mode) -> (i64, i64) {
    match mode {
        Mode::Walking => (300, 1500),
        Mode::Cycling => (600, 2100),
        Mode::PrivateVehicle => (600, 2700),
        _ => (300, 1800),
    }
}

struct ChainBuilder<'a> {
    config: &'a SynthConfig,
    network: &'a Network,
    bounds: (f64, f64, f64, f64),
    pos: (f64, f64),
    clock: Timestamp,
    legs: Vec<Leg>,
}

impl<'a> ChainBuilder<'a> {
    fn clamp(&self, p: (f64, f64)) -> (f64, f64) {
        let (x0, y0, x1, y1) = self.bounds;
        (p.0.clamp(x0, x1 - 1e-6), p.1.clamp(y0, y1 - 1e-6))
    }

    fn private_to(&mut self, mode: Mode, to: (f64, f64), rng: &mut ChaCha8Rng) {
        let d = libm::sqrt(dist2(to, self.pos));
        let travel = (d / speed_mps(mode)) as i64;
        let start = self.clock + rng.random_range(0..=60);
        let end = start + travel.max(60);
        self.legs.push(Leg::Private(PrivateLeg {
            start_time: start,
            end_time: end,
            start_cell: self.config.grid.cell_of_xy(self.pos.0, self.pos.1),
            end_cell: self.config.grid.cell_of_xy(to.0, to.1),
            mode,
        }));
        self.pos = to;
        self.clock = end;
    }

    fn private_wander(&mut self, mode: Mode, rng: &mut ChaCha8Rng) {
        let (lo, hi) = duration_range_s(mode);
        let dur = rng.random_range(lo..=hi);
        let dist = speed_mps(mode) * dur as f64 * rng.random_range(0.3..1.0);
        let theta = 2.0 * core::f64::consts::PI * rng.random::<f64>();
        let to = self.clamp((
            self.pos.0 + dist * libm::cos(theta),
            self.pos.1 + dist * libm::sin(theta),
        ));
        let start = self.clock + rng.random_range(0..=60);
        self.legs.push(Leg::Private(PrivateLeg {
            start_time: start,
            end_time: start + dur,
            start_cell: self.config.grid.cell_of_xy(self.pos.0, self.pos.1),
            end_cell: self.config.grid.cell_of_xy(to.0, to.1),
            mode,
        }));
        self.pos = to;
        self.clock = start + dur;
    }

    /// Position along the line of the stop nearest the current position.
    fn nearest_on_line(&self, line: &Line) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (k, &s) in line.stops.iter().enumerate() {
            let p = self.network.stop_xy[s];
            let d = dist2(p, self.pos);
            if d < best_d {
                best_d = d;
                best = k;
            }
        }
        best
    }

    fn ride(&mut self, line: &Line, board_pos: usize, rng: &mut ChaCha8Rng) {
        let n = line.stops.len();
        let min_hops = if n >= 3 { 2 } else { 1 };
        let targets: Vec<usize> = (0..n).filter(|&j| j.abs_diff(board_pos) >= min_hops).collect();
        let alight_pos = targets[rng.random_range(0..targets.len())];
        let hops = alight_pos.abs_diff(board_pos) as i64;
        let start = self.clock + rng.random_range(30..=300);
        let end = start + hops * rng.random_range(60..=150);
        let direction = if alight_pos > board_pos { "0" } else { "1" };
        let vehicle = rng.random_range(0..self.config.vehicles_per_line);
        let board = line.stops[board_pos];
        let alight = line.stops[alight_pos];
        self.legs.push(Leg::Pt(PtLeg {
            start_time: start,
            end_time: end,
            board: self.network.stops[board].clone(),
            alight: self.network.stops[alight].clone(),
            mode: line.mode,
            line_id: line.id.clone(),
            direction: direction.into(),
            vehicle_id: format!("{}-{}-{}", line.id, direction, vehicle),
            merged_from: Vec::new(),
            circular: false,
        }));
        self.pos = self.network.stop_xy[alight];
        self.clock = end;
    }
}

fn pick_line<'n>(network: &'n Network, mode: Mode, exclude: Option<&str>, rng: &mut ChaCha8Rng) -> Option<&'n Line> {
    let usable = |l: &&Line| Some(l.id.as_str()) != exclude;
    let of_mode: Vec<&Line> = network.lines.iter().filter(|l| l.mode == mode).filter(usable).collect();
    let pool: Vec<&Line> = if of_mode.is_empty() {
        network.lines.iter().filter(usable).collect()
    } else {
        of_mode
    };
    if pool.is_empty() {
        None
    } else {
        Some(pool[rng.random_range(0..pool.len())])
    }
}

fn build_chain(
    config: &SynthConfig,
    network: &Network,
    start: Timestamp,
    pos: (f64, f64),
    rng: &mut ChaCha8Rng,
) -> (Vec<Leg>, (f64, f64), Timestamp) {
    let weights: Vec<f64> = Mode::ALL.iter().map(|&m| config.mode_weights.get(m)).collect();
    let main = Mode::ALL[weighted_pick(rng, &weights).expect("positive total weight")];
    let mut b = ChainBuilder {
        config,
        network,
        bounds: config.planar_bounds(),
        pos,
        clock: start,
        legs: Vec::new(),
    };
    let walk = config.mode_weights.walking > 0.0;
    if !main.is_pt() {
        b.private_wander(main, rng);
        return (b.legs, b.pos, b.clock);
    }

    let pt_weights: Vec<f64> = Mode::PT.iter().map(|&m| config.mode_weights.get(m)).collect();
    let mut line = pick_line(network, main, None, rng).expect("validated: network has lines");
    let mut rides = 0;
    loop {
        let board_pos = b.nearest_on_line(line);
        let board_xy = network.stop_xy[line.stops[board_pos]];
        if walk {
            b.private_to(Mode::Walking, board_xy, rng);
        } else {
            b.pos = board_xy;
        }
        b.ride(line, board_pos, rng);
        rides += 1;
        if rides > MAX_TRANSFERS || !rng.random_bool(config.transfer_probability) {
            break;
        }
        let next_mode = Mode::PT[weighted_pick(rng, &pt_weights).expect("PT chain implies PT weight")];
        match pick_line(network, next_mode, Some(&line.id), rng) {
            Some(next) => line = next,
            None => break,
        }
    }
    if walk {
        b.private_wander(Mode::Walking, rng);
    }
    (b.legs, b.pos, b.clock)
}

fn profile(config: &SynthConfig, day_type: DayType) -> &[f64; 24] {
    match day_type {
        DayType::Weekday => &config.weekday_profile,
        DayType::Weekend => &config.weekend_profile,
    }
}

/// Ground-truth itineraries of one device, one per configured day. The device
/// gets a fresh random id every day.
pub fn generate_device(config: &SynthConfig, network: &Network, device: usize) -> Vec<Itinerary> {
    let mut rng = stream_rng(config.seed, POPULATION_SALT, device as u64);
    let (x0, y0, x1, y1) = config.planar_bounds();
    let active = config.mode_weights.total() > 0.0;
    let mut out = Vec::with_capacity(config.days as usize);
    for d in 0..config.days {
        let day = config.day(d);
        let device_id: String = format!("{:016x}", rng.random::<u64>());
        let n_chains = if active {
            rng.random_range(config.min_chains_per_day..=config.max_chains_per_day)
        } else {
            0
        };
        let hours = profile(config, day.day_type());
        let midnight = day.local_midnight_utc(config.utc_offset_s);
        let mut starts: Vec<Timestamp> = (0..n_chains)
            .map(|_| {
                let h = weighted_pick(&mut rng, hours).expect("validated profile") as i64;
                midnight + h * 3600 + rng.random_range(0..3600)
            })
            .collect();
        starts.sort_unstable();

        let mut pos = (rng.random_range(x0..x1), rng.random_range(y0..y1));
        let mut prev_end: Option<Timestamp> = None;
        let mut chains = Vec::with_capacity(starts.len());
        for (c, &sampled) in starts.iter().enumerate() {
            let start = match prev_end {
                Some(end) => sampled.max(end + CHAIN_GAP_S),
                None => sampled,
            };
            let (legs, end_pos, end) = build_chain(config, network, start, pos, &mut rng);
            pos = end_pos;
            prev_end = Some(end);
            chains.push(TripChain {
                chain_id: format!("{device_id}-{c}"),
                legs,
            });
        }
        out.push(Itinerary { device_id, day, chains });
    }
    out
}

/// Ground truth for every device, ordered by device then day.
pub fn generate_population(config: &SynthConfig, network: &Network) -> Result<Vec<Itinerary>> {
    config.validate()?;
    Ok((0..config.devices)
        .flat_map(|d| generate_device(config, network, d))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate_network, ModeWeights};

    fn small() -> SynthConfig {
        SynthConfig {
            devices: 40,
            days: 7,
            ..SynthConfig::default()
        }
    }

    #[test]
    fn zero_rates_give_empty_itineraries() {
        let c = SynthConfig {
            mode_weights: ModeWeights::zero(),
            lines: 0,
            ..small()
        };
        let n = generate_network(&c).unwrap();
        let pop = generate_population(&c, &n).unwrap();
        assert_eq!(pop.len(), 40 * 7);
        assert!(pop.iter().all(|it| it.chains.is_empty()));
    }

    #[test]
    fn pt_only_config() {
        let c = SynthConfig {
            mode_weights: ModeWeights {
                bus: 1.0,
                train: 0.5,
                ..ModeWeights::zero()
            },
            transfer_probability: 0.5,
            ..small()
        };
        let n = generate_network(&c).unwrap();
        let pop = generate_population(&c, &n).unwrap();
        let legs: Vec<&Leg> = pop.iter().flat_map(|it| it.legs()).collect();
        assert!(!legs.is_empty());
        assert!(legs.iter().all(|l| l.is_pt()));
    }

    #[test]
    fn chains_do_not_interleave_and_pt_follows_lines() {
        let c = small();
        let n = generate_network(&c).unwrap();
        for it in generate_population(&c, &n).unwrap() {
            for w in it.chains.windows(2) {
                assert!(w[0].end_time().unwrap() <= w[1].start_time().unwrap());
            }
            for chain in &it.chains {
                assert!(chain.is_time_ordered());
                for leg in &chain.legs {
                    assert!(leg.start_time() <= leg.end_time());
                    if let Leg::Pt(p) = leg {
                        let line = n.line(&p.line_id).unwrap();
                        let i = line.position(n.stop(&p.board.id).unwrap()).unwrap();
                        let j = line.position(n.stop(&p.alight.id).unwrap()).unwrap();
                        assert_ne!(i, j);
                        assert_eq!(p.direction == "0", j > i);
                        assert_eq!(p.mode, line.mode);
                    }
                }
                // successive PT legs never share a vehicle in ground truth
                let pts: Vec<&PtLeg> = chain.legs.iter().filter_map(Leg::as_pt).collect();
                for w in pts.windows(2) {
                    assert_ne!(w[0].vehicle_id, w[1].vehicle_id);
                }
            }
        }
    }

    #[test]
    fn device_streams_are_independent_of_population_size() {
        let c = small();
        let n = generate_network(&c).unwrap();
        let all = generate_population(&c, &n).unwrap();
        assert_eq!(generate_device(&c, &n, 3), all[3 * 7..4 * 7].to_vec());
    }
}
