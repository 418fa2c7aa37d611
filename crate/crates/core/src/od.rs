//! Zone-level hourly origin-destination matrices and their regression against
//! an external OD source.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::GridSpec;
use crate::model::{local_hour, DayType, GridCell, Itinerary, Leg, TripChain};
use crate::stats;

/// Maps grid cells to zone names. Cells absent from the table lie outside the
/// service area.
#[derive(Debug, Clone, PartialEq)]
pub struct ZoneTable {
    pub grid: GridSpec,
    cells: BTreeMap<GridCell, u32>,
    names: Vec<String>,
    by_name: BTreeMap<String, u32>,
}

impl ZoneTable {
    pub fn new(grid: GridSpec) -> Self {
        ZoneTable {
            grid,
            cells: BTreeMap::new(),
            names: Vec::new(),
            by_name: BTreeMap::new(),
        }
    }

    /// Assigns a cell to a zone, replacing any previous assignment.
    pub fn insert(&mut self, cell: GridCell, zone: &str) {
        let idx = match self.by_name.get(zone) {
            Some(&i) => i,
            None => {
                let i = self.names.len() as u32;
                self.names.push(zone.to_string());
                self.by_name.insert(zone.to_string(), i);
                i
            }
        };
        self.cells.insert(cell, idx);
    }

    pub fn zone_index(&self, cell: GridCell) -> Option<u32> {
        self.cells.get(&cell).copied()
    }

    pub fn zone_of(&self, cell: GridCell) -> Option<&str> {
        self.zone_index(cell).map(|i| self.names[i as usize].as_str())
    }

    pub fn zone_name(&self, index: u32) -> &str {
        &self.names[index as usize]
    }

    /// Zone names, sorted.
    pub fn zones(&self) -> Vec<&str> {
        let mut z: Vec<&str> = self.names.iter().map(String::as_str).collect();
        z.sort_unstable();
        z
    }

    /// Number of cells in the service area.
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn contains(&self, cell: GridCell) -> bool {
        self.cells.contains_key(&cell)
    }

    pub fn cells(&self) -> impl Iterator<Item = (GridCell, &str)> {
        self.cells.iter().map(|(c, &i)| (*c, self.names[i as usize].as_str()))
    }
}

/// Start and end cells of a leg; PT stops are projected onto the grid.
pub fn leg_cells(leg: &Leg, grid: &GridSpec) -> (GridCell, GridCell) {
    match leg {
        Leg::Private(l) => (l.start_cell, l.end_cell),
        Leg::Pt(l) => (
            grid.cell_of(l.board.lat, l.board.lon),
            grid.cell_of(l.alight.lat, l.alight.lon),
        ),
    }
}

fn leg_zone_indices(leg: &Leg, zones: &ZoneTable) -> Option<(u32, u32)> {
    let (a, b) = leg_cells(leg, &zones.grid);
    Some((zones.zone_index(a)?, zones.zone_index(b)?))
}

/// Origin and destination zones of a leg, or `None` when either end falls
/// outside the table.
pub fn map_leg_to_zones<'z>(leg: &Leg, zones: &'z ZoneTable) -> Option<(&'z str, &'z str)> {
    leg_zone_indices(leg, zones).map(|(o, d)| (zones.zone_name(o), zones.zone_name(d)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OdBasis {
    /// Every leg is one flow.
    Leg,
    /// Every chain is one flow, from its first origin to its last destination.
    Chain,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct OdKey {
    pub origin: String,
    pub destination: String,
    pub hour: u8,
}

/// Average flows per day of one day type.
#[derive(Debug, Clone, PartialEq)]
pub struct OdMatrix {
    pub day_type: DayType,
    /// Number of days averaged over.
    pub days: u32,
    pub entries: BTreeMap<OdKey, f64>,
}

impl OdMatrix {
    pub fn total(&self) -> f64 {
        self.entries.values().sum()
    }

    pub fn zones(&self) -> BTreeSet<&str> {
        self.entries
            .keys()
            .flat_map(|k| [k.origin.as_str(), k.destination.as_str()])
            .collect()
    }
}

fn chain_zone_indices(chain: &TripChain, zones: &ZoneTable) -> Option<(u32, u32)> {
    let first = chain.legs.first()?;
    let last = chain.legs.last()?;
    let (a, _) = leg_cells(first, &zones.grid);
    let (_, b) = leg_cells(last, &zones.grid);
    Some((zones.zone_index(a)?, zones.zone_index(b)?))
}

/// Raw flow counts keyed by zone indices and local hour, before averaging.
pub type OdCounts = BTreeMap<(u32, u32, u8), u64>;

/// Tallies the flows of the given itineraries that fall on `day_type` days.
/// Partial tallies can be merged by adding counts.
pub fn tally_od(
    itineraries: &[Itinerary],
    zones: &ZoneTable,
    day_type: DayType,
    utc_offset_s: i64,
    basis: OdBasis,
) -> OdCounts {
    let mut counts = OdCounts::new();
    for it in itineraries.iter().filter(|it| it.day.day_type() == day_type) {
        for chain in &it.chains {
            match basis {
                OdBasis::Leg => {
                    for leg in &chain.legs {
                        if let Some((o, d)) = leg_zone_indices(leg, zones) {
                            let h = local_hour(leg.start_time(), utc_offset_s);
                            *counts.entry((o, d, h)).or_insert(0) += 1;
                        }
                    }
                }
                OdBasis::Chain => {
                    if let (Some((o, d)), Some(t)) = (chain_zone_indices(chain, zones), chain.start_time()) {
                        let h = local_hour(t, utc_offset_s);
                        *counts.entry((o, d, h)).or_insert(0) += 1;
                    }
                }
            }
        }
    }
    counts
}

/// Number of distinct calendar days of a type in the dataset.
pub fn count_days(itineraries: &[Itinerary], day_type: DayType) -> u32 {
    itineraries
        .iter()
        .map(|it| it.day)
        .filter(|d| d.day_type() == day_type)
        .collect::<BTreeSet<_>>()
        .len() as u32
}

/// Converts tallies to per-day averages.
pub fn finish_od(counts: &OdCounts, zones: &ZoneTable, day_type: DayType, days: u32) -> Result<OdMatrix> {
    if days == 0 {
        return Err(Error::NoDaysOfType(day_type));
    }
    let entries = counts
        .iter()
        .map(|(&(o, d, h), &n)| {
            (
                OdKey {
                    origin: zones.zone_name(o).to_string(),
                    destination: zones.zone_name(d).to_string(),
                    hour: h,
                },
                n as f64 / f64::from(days),
            )
        })
        .collect();
    Ok(OdMatrix {
        day_type,
        days,
        entries,
    })
}

/// Hourly OD matrix of average daily flows for one day type.
pub fn aggregate_od(
    itineraries: &[Itinerary],
    zones: &ZoneTable,
    day_type: DayType,
    utc_offset_s: i64,
    basis: OdBasis,
) -> Result<OdMatrix> {
    let days = count_days(itineraries, day_type);
    if days == 0 {
        return Err(Error::NoDaysOfType(day_type));
    }
    let counts = tally_od(itineraries, zones, day_type, utc_offset_s, basis);
    finish_od(&counts, zones, day_type, days)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionResult {
    /// Slope.
    pub alpha: f64,
    /// Intercept.
    pub beta: f64,
    pub r_squared: f64,
    pub n_points: usize,
    pub alpha_std_err: f64,
}

/// Paired (internal, external) flows over the union of keys, with a missing
/// side read as zero and keys where both sides are zero left out.
pub fn paired_flows(internal: &OdMatrix, external: &OdMatrix) -> (Vec<f64>, Vec<f64>) {
    let keys: BTreeSet<&OdKey> = internal.entries.keys().chain(external.entries.keys()).collect();
    let mut xs = Vec::with_capacity(keys.len());
    let mut ys = Vec::with_capacity(keys.len());
    for k in keys {
        let x = internal.entries.get(k).copied().unwrap_or(0.0);
        let y = external.entries.get(k).copied().unwrap_or(0.0);
        if x == 0.0 && y == 0.0 {
            continue;
        }
        xs.push(x);
        ys.push(y);
    }
    (xs, ys)
}

/// Least-squares fit of external flows on internal flows.
pub fn regress_od(internal: &OdMatrix, external: &OdMatrix) -> Result<RegressionResult> {
    let (xs, ys) = paired_flows(internal, external);
    if xs.len() < 3 {
        return Err(Error::TooFewPoints { n: xs.len(), min: 3 });
    }
    let fit = stats::ols(&xs, &ys)?;
    Ok(RegressionResult {
        alpha: fit.slope,
        beta: fit.intercept,
        r_squared: fit.r_squared,
        n_points: fit.n,
        alpha_std_err: fit.slope_std_err,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Day, Mode, PrivateLeg};
    use alloc::vec;

    fn zones() -> ZoneTable {
        let mut z = ZoneTable::new(GridSpec::new(60.0, 24.0));
        z.insert(GridCell::new(0, 0), "Helsinki");
        z.insert(GridCell::new(1, 0), "Helsinki");
        z.insert(GridCell::new(2, 0), "Espoo");
        z.insert(GridCell::new(3, 0), "Vantaa");
        z
    }

    fn leg(a: i64, b: i64, start: i64) -> Leg {
        Leg::Private(PrivateLeg {
            start_time: start,
            end_time: start + 900,
            start_cell: GridCell::new(a, 0),
            end_cell: GridCell::new(b, 0),
            mode: Mode::Walking,
        })
    }

    fn itinerary(day: &str, legs: Vec<Leg>) -> Itinerary {
        Itinerary {
            device_id: "d".into(),
            day: day.parse().unwrap(),
            chains: vec![TripChain {
                chain_id: "c".into(),
                legs,
            }],
        }
    }

    #[test]
    fn zone_mapping() {
        let z = zones();
        assert_eq!(map_leg_to_zones(&leg(0, 1, 0), &z), Some(("Helsinki", "Helsinki")));
        assert_eq!(map_leg_to_zones(&leg(2, 3, 0), &z), Some(("Espoo", "Vantaa")));
        assert_eq!(map_leg_to_zones(&leg(0, 9, 0), &z), None);
        assert_eq!(z.zones(), vec!["Espoo", "Helsinki", "Vantaa"]);
    }

    #[test]
    fn averaging_over_days() {
        let z = zones();
        let monday: Day = "2020-11-16".parse().unwrap();
        // 14:20 local at UTC+2
        let t = monday.local_midnight_utc(7200) + 14 * 3600 + 20 * 60;
        let key = OdKey {
            origin: "Helsinki".into(),
            destination: "Espoo".into(),
            hour: 14,
        };
        let one = [itinerary("2020-11-16", vec![leg(0, 2, t)])];
        let m = aggregate_od(&one, &z, DayType::Weekday, 7200, OdBasis::Leg).unwrap();
        assert_eq!(m.entries[&key], 1.0);
        let two = [one[0].clone(), itinerary("2020-11-17", vec![])];
        let m = aggregate_od(&two, &z, DayType::Weekday, 7200, OdBasis::Leg).unwrap();
        assert_eq!(m.entries[&key], 0.5);
        assert_eq!(
            aggregate_od(&two, &z, DayType::Weekend, 7200, OdBasis::Leg),
            Err(Error::NoDaysOfType(DayType::Weekend))
        );
    }

    #[test]
    fn chain_basis_uses_first_and_last() {
        let z = zones();
        let its = [itinerary(
            "2020-11-16",
            vec![leg(0, 1, 0), leg(1, 2, 1000), leg(2, 3, 2000)],
        )];
        let m = aggregate_od(&its, &z, DayType::Weekday, 0, OdBasis::Chain).unwrap();
        assert_eq!(m.entries.len(), 1);
        let k = m.entries.keys().next().unwrap();
        assert_eq!((k.origin.as_str(), k.destination.as_str()), ("Helsinki", "Vantaa"));
    }

    fn matrix(pairs: &[(u8, f64)]) -> OdMatrix {
        OdMatrix {
            day_type: DayType::Weekday,
            days: 1,
            entries: pairs
                .iter()
                .map(|&(h, v)| {
                    (
                        OdKey {
                            origin: "A".into(),
                            destination: "B".into(),
                            hour: h,
                        },
                        v,
                    )
                })
                .collect(),
        }
    }

    #[test]
    fn exact_linear_relation() {
        let internal = matrix(&[(0, 1.0), (1, 2.0), (2, 5.0), (3, 7.5)]);
        let external = matrix(&[(0, 5.0), (1, 7.0), (2, 13.0), (3, 18.0)]);
        let r = regress_od(&internal, &external).unwrap();
        assert!((r.alpha - 2.0).abs() < 1e-12 && (r.beta - 3.0).abs() < 1e-12);
        assert!((r.r_squared - 1.0).abs() < 1e-12);
        assert_eq!(r.n_points, 4);
    }

    #[test]
    fn zero_imputation_and_exclusion() {
        let internal = matrix(&[(0, 1.0), (1, 2.0), (5, 0.0)]);
        let external = matrix(&[(0, 2.0), (1, 4.0), (2, 1.0), (5, 0.0)]);
        let (xs, ys) = paired_flows(&internal, &external);
        assert_eq!(xs, vec![1.0, 2.0, 0.0]);
        assert_eq!(ys, vec![2.0, 4.0, 1.0]);
        assert!(matches!(
            regress_od(&matrix(&[(0, 1.0), (1, 2.0)]), &matrix(&[])),
            Err(Error::TooFewPoints { n: 2, .. })
        ));
        assert!(matches!(
            regress_od(&matrix(&[(0, 1.0), (1, 1.0), (2, 1.0)]), &matrix(&[])),
            Err(Error::ZeroVariance(_))
        ));
    }
}
