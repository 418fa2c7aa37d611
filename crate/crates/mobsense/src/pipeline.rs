//! Subcommands: generation, ingestion, cleaning and the three analyses.

use std::fs::File;
use std::io::{self, BufReader};
use std::path::{Path, PathBuf};

use mobsense_core::cleaning::CleanedDataset;
use mobsense_core::demand::{self, GridModeCounts, ModeGroup};
use mobsense_core::ingest::{check_privacy_conformance, collate_itineraries, CollateDefect};
use mobsense_core::model::{DayType, Itinerary};
use mobsense_core::od::{count_days, finish_od, regress_od, OdMatrix, ZoneTable};
use mobsense_core::synth::{generate_network, generate_zone_table, synthetic_external_od};
use mobsense_core::transfer::{intra_hub_proportions, transfer_matrix, transfer_points, RasterSpec};
use rayon::prelude::*;

use crate::config::{PipelineConfig, EXTERNAL_OD_FILE, LEGS_FILE, STOPS_FILE, ZONES_FILE};
use crate::error::{PipelineError, Result};
use crate::formats::{od_csv, records, stops, zones};
use crate::output::{Manifest, OutputSet, MANIFEST_FILE};
use crate::{parallel, report};

pub const GROUND_TRUTH_FILE: &str = "ground_truth.jsonl";
pub const DEFECTS_FILE: &str = "defects.jsonl";
pub const LINES_FILE: &str = "lines.csv";
pub const CLEANED_LEGS_FILE: &str = "cleaned_legs.jsonl";

/// KDE rasters extend this many bandwidths beyond the outermost event.
const KDE_MARGIN_BANDWIDTHS: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Synth,
    Ingest,
    Clean,
    Demand,
    Od,
    Transfers,
    /// Ingest (or first generate, with `synth`), clean, then every enabled
    /// analysis.
    All {
        synth: bool,
    },
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Synth => "synth",
            Command::Ingest => "ingest",
            Command::Clean => "clean",
            Command::Demand => "demand",
            Command::Od => "od",
            Command::Transfers => "transfers",
            Command::All { .. } => "all",
        }
    }
}

/// Runs a subcommand. On failure every output written so far is removed.
pub fn run(command: Command, config: &PipelineConfig) -> Result<Manifest> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| PipelineError::Usage(format!("cannot start {} workers: {e}", config.workers)))?;
    pool.install(|| {
        let mut ctx = Ctx {
            cfg: config,
            out: OutputSet::new(&config.out_dir)?,
            manifest: Manifest::new(command.name(), config),
        };
        let result = execute(command, &mut ctx).and_then(|()| {
            let mut names = ctx.out.names();
            names.push(MANIFEST_FILE.to_string());
            ctx.manifest.outputs = names;
            let manifest = ctx.manifest.clone();
            ctx.out.write(MANIFEST_FILE, |w| {
                serde_json::to_writer_pretty(&mut *w, &manifest)?;
                io::Write::write_all(w, b"\n")
            })?;
            Ok(manifest)
        });
        if result.is_err() {
            ctx.out.remove_all();
        }
        result
    })
}

struct Ctx<'a> {
    cfg: &'a PipelineConfig,
    out: OutputSet,
    manifest: Manifest,
}

fn execute(command: Command, ctx: &mut Ctx<'_>) -> Result<()> {
    let cfg = ctx.cfg;
    match command {
        Command::Synth => synth(ctx),
        Command::Ingest => ingest(ctx, &cfg.legs_path(), true).map(drop),
        Command::Clean => {
            let its = ingest(ctx, &cfg.legs_path(), false)?;
            clean(ctx, &its, true).map(drop)
        }
        Command::Demand => {
            let zones = load_zones(ctx, &cfg.zones_path())?;
            let cleaned = ingest_and_clean(ctx, &cfg.legs_path())?;
            demand_stage(ctx, &cleaned.itineraries, &zones)
        }
        Command::Od => {
            let zones = load_zones(ctx, &cfg.zones_path())?;
            let cleaned = ingest_and_clean(ctx, &cfg.legs_path())?;
            od_stage(ctx, &cleaned.itineraries, &zones, cfg.external_od_path().as_deref())
        }
        Command::Transfers => {
            let zones = load_zones(ctx, &cfg.zones_path())?;
            let stops = load_stops(ctx, &cfg.stops_path())?;
            let cleaned = ingest_and_clean(ctx, &cfg.legs_path())?;
            transfer_stage(ctx, &cleaned.itineraries, &zones, &stops)
        }
        Command::All { synth: generate } => {
            let paths = if generate {
                synth(ctx)?;
                let dir = ctx.out.dir();
                InputPaths {
                    legs: dir.join(LEGS_FILE),
                    zones: dir.join(ZONES_FILE),
                    stops: dir.join(STOPS_FILE),
                    external_od: Some(dir.join(EXTERNAL_OD_FILE)),
                }
            } else {
                InputPaths {
                    legs: cfg.legs_path(),
                    zones: cfg.zones_path(),
                    stops: cfg.stops_path(),
                    external_od: cfg.external_od_path(),
                }
            };
            // Check every input before the long stages start.
            let zones = if cfg.demand || cfg.od || cfg.transfers {
                Some(load_zones(ctx, &paths.zones)?)
            } else {
                None
            };
            let stops = if cfg.transfers {
                Some(load_stops(ctx, &paths.stops)?)
            } else {
                None
            };
            let its = ingest(ctx, &paths.legs, true)?;
            let cleaned = clean(ctx, &its, true)?;
            drop(its);
            if let Some(zones) = &zones {
                if cfg.demand {
                    demand_stage(ctx, &cleaned.itineraries, zones)?;
                }
                if cfg.od {
                    od_stage(ctx, &cleaned.itineraries, zones, paths.external_od.as_deref())?;
                }
                if let Some(stops) = &stops {
                    transfer_stage(ctx, &cleaned.itineraries, zones, stops)?;
                }
            }
            Ok(())
        }
    }
}

struct InputPaths {
    legs: PathBuf,
    zones: PathBuf,
    stops: PathBuf,
    external_od: Option<PathBuf>,
}

/// Opens an input file and parses it with `parse`. Read failures with
/// `InvalidData` are reported as malformed input.
fn read_input<T>(path: &Path, parse: impl FnOnce(BufReader<File>) -> io::Result<T>) -> Result<T> {
    let file = File::open(path).map_err(|e| PipelineError::io(path, e))?;
    parse(BufReader::new(file)).map_err(|e| {
        if e.kind() == io::ErrorKind::InvalidData {
            PipelineError::malformed(path, e)
        } else {
            PipelineError::io(path, e)
        }
    })
}

fn load_zones(ctx: &mut Ctx<'_>, path: &Path) -> Result<ZoneTable> {
    ctx.manifest.input("zones", path);
    let table = read_input(path, zones::read_zone_table)?;
    ctx.manifest.count("zone_cells", table.len());
    ctx.manifest.count("zones", table.zones().len());
    Ok(table)
}

fn load_stops(ctx: &mut Ctx<'_>, path: &Path) -> Result<Vec<mobsense_core::model::StopRef>> {
    ctx.manifest.input("stops", path);
    let s = read_input(path, stops::read_stops)?;
    ctx.manifest.count("stops", s.len());
    Ok(s)
}

fn synth(ctx: &mut Ctx<'_>) -> Result<()> {
    let cfg = ctx.cfg;
    let sc = cfg.synth_config();
    let err = PipelineError::computation;
    let (network, zone_table, truth, sensed) = ctx.manifest.timed("synth.generate", |_| -> Result<_> {
        let network = generate_network(&sc).map_err(err("synth"))?;
        let zone_table = generate_zone_table(&sc).map_err(err("synth"))?;
        let truth = parallel::generate_population(&sc, &network).map_err(err("synth"))?;
        let sensed = parallel::apply_sensing(&sc, &network, &truth).map_err(err("synth"))?;
        Ok((network, zone_table, truth, sensed))
    })?;

    // External flows: a noisy linear image of the ground-truth OD matrices.
    let mut external: Vec<OdMatrix> = Vec::new();
    for (k, dt) in DayType::ALL.into_iter().enumerate() {
        let days = count_days(&truth, dt);
        if days == 0 {
            continue;
        }
        let counts = parallel::od_counts(&truth, &zone_table, dt, cfg.utc_offset_s, cfg.od_basis);
        let m = finish_od(&counts, &zone_table, dt, days).map_err(err("synth"))?;
        external.push(synthetic_external_od(
            &m,
            cfg.external_od_scale,
            cfg.external_od_noise,
            cfg.seed.wrapping_add(k as u64),
        ));
    }

    let truth_records = parallel::records_of(&truth);
    let m = &mut ctx.manifest;
    m.count("synth.devices", sc.devices);
    m.count("synth.itineraries", truth.len());
    m.count("synth.truth_legs", truth_records.len());
    m.count("synth.sensed_legs", sensed.records.len());
    m.count("synth.defects", sensed.defects.len());
    m.count("synth.stops", network.stops.len());
    m.count("synth.lines", network.lines.len());
    drop(truth);

    let out = &mut ctx.out;
    ctx.manifest.timed("synth.write", |_| -> Result<()> {
        out.write(LEGS_FILE, |w| records::write_leg_records(w, &sensed.records))?;
        out.write(GROUND_TRUTH_FILE, |w| records::write_leg_records(w, &truth_records))?;
        out.write(DEFECTS_FILE, |w| records::write_defects(w, &sensed.defects))?;
        out.write(ZONES_FILE, |w| zones::write_zone_table(w, &zone_table))?;
        out.write(STOPS_FILE, |w| stops::write_stops(w, &network.stops))?;
        out.write(LINES_FILE, |w| stops::write_lines(w, &network))?;
        out.write(EXTERNAL_OD_FILE, |w| od_csv::write_od(w, &external))
    })
}

/// Parses and collates the leg file. With `emit`, writes the ingest reports.
fn ingest(ctx: &mut Ctx<'_>, path: &Path, emit: bool) -> Result<Vec<Itinerary>> {
    ctx.manifest.input("legs", path);
    let parsed = ctx
        .manifest
        .timed("ingest.parse", |_| read_input(path, records::parse_leg_records))?;
    let (lines, errors) = (parsed.lines, parsed.errors);
    let record_count = parsed.records.len();
    let collated = ctx
        .manifest
        .timed("ingest.collate", |_| collate_itineraries(parsed.records));
    for e in errors.iter().take(5) {
        log::warn!("{}:{}: {}", path.display(), e.line, e.reason);
    }
    if errors.len() > 5 {
        log::warn!("{} more malformed lines in {}", errors.len() - 5, path.display());
    }

    let m = &mut ctx.manifest;
    m.count("ingest.lines", lines);
    m.count("ingest.records", record_count);
    m.count("ingest.parse_errors", errors.len());
    m.count("ingest.collated_legs", collated.leg_count());
    m.count("ingest.duplicates", collated.duplicate_count());
    m.count(
        "ingest.temporal_order_defects",
        collated
            .defects
            .iter()
            .filter(|d| matches!(d, CollateDefect::TemporalOrder { .. }))
            .count(),
    );
    m.count("ingest.itineraries", collated.itineraries.len());
    let defects = collated.defects.clone();
    let its = collated.into_itineraries();
    m.count("ingest.chains", its.iter().map(|i| i.chains.len()).sum());

    let privacy: Vec<_> = its
        .par_iter()
        .flat_map_iter(|it| check_privacy_conformance(it).into_iter().map(move |v| (it, v)))
        .collect();
    m.count("ingest.privacy_violations", privacy.len());
    if emit {
        let out = &mut ctx.out;
        out.write("parse_errors.csv", |w| report::parse_errors(w, &errors))?;
        out.write("collate_defects.csv", |w| report::collate_defects(w, &defects))?;
        out.write("privacy_report.csv", |w| report::privacy_report(w, &privacy))?;
        out.write("itinerary_summary.csv", |w| report::itinerary_summary(w, &its))?;
    }
    Ok(its)
}

/// Merges spurious legs. With `emit`, writes the audit and the cleaned legs.
fn clean(ctx: &mut Ctx<'_>, its: &[Itinerary], emit: bool) -> Result<CleanedDataset> {
    let cleaned = ctx.manifest.timed("clean", |_| parallel::clean_dataset(its));
    let m = &mut ctx.manifest;
    m.count("clean.merge_events", cleaned.audit.len());
    m.count("clean.pt_chains", cleaned.pt_chains);
    m.count("clean.merged_chains", cleaned.merged_chains);
    m.count(
        "clean.long_gap_merges",
        cleaned
            .audit
            .iter()
            .filter(|r| r.event.max_gap_s > ctx.cfg.long_gap_s)
            .count(),
    );
    m.count("clean.legs", cleaned.itineraries.iter().map(Itinerary::leg_count).sum());
    if let Ok(rate) = cleaned.spurious_rate() {
        m.metric("clean.spurious_rate", rate);
    }
    if emit {
        let long_gap = ctx.cfg.long_gap_s;
        ctx.out
            .write("merge_audit.csv", |w| report::merge_audit(w, &cleaned, long_gap))?;
        let records = parallel::records_of(&cleaned.itineraries);
        ctx.out
            .write(CLEANED_LEGS_FILE, |w| records::write_leg_records(w, &records))?;
    }
    Ok(cleaned)
}

fn ingest_and_clean(ctx: &mut Ctx<'_>, path: &Path) -> Result<CleanedDataset> {
    let its = ingest(ctx, path, false)?;
    clean(ctx, &its, false)
}

fn demand_stage(ctx: &mut Ctx<'_>, its: &[Itinerary], zones: &ZoneTable) -> Result<()> {
    let err = PipelineError::computation;
    let utc = ctx.cfg.utc_offset_s;
    let (counts, profiles) = ctx.manifest.timed("demand", |_| {
        let counts: Vec<GridModeCounts> = ModeGroup::ALL
            .par_iter()
            .map(|&g| parallel::grid_counts(its, g, zones))
            .collect();
        let profiles: Vec<demand::HourlyProfile> = ModeGroup::ALL
            .iter()
            .flat_map(|&g| DayType::ALL.map(|dt| (g, dt)))
            .collect::<Vec<_>>()
            .par_iter()
            .map(|&(g, dt)| demand::hourly_profile(its, g, dt, utc))
            .collect();
        (counts, profiles)
    });

    let mut summary = Vec::new();
    for c in &counts {
        let legs = profiles.iter().filter(|p| p.group == c.group).map(|p| p.total()).sum();
        let stats = demand::count_stats(c).ok();
        let fit = demand::fit_power_law(c).ok();
        summary.push(report::SummaryRow {
            mode: c.group.label(),
            legs,
            used_cells: c.used_cells(),
            coverage: demand::coverage(c).map_err(err("demand"))?,
            mean: stats.map(|s| s.0),
            std: stats.map(|s| s.1),
            alpha: fit.map(|f| f.alpha),
            r2: fit.map(|f| f.r_squared),
        });
    }

    let mut corr = Vec::new();
    for dt in DayType::ALL {
        let primary: Vec<demand::HourlyProfile> = profiles
            .iter()
            .filter(|p| p.day_type == dt && p.group != ModeGroup::Total)
            .cloned()
            .collect();
        for i in 0..primary.len() {
            for j in i + 1..primary.len() {
                corr.push(report::CorrelationRow {
                    day_type: dt.as_str(),
                    mode_a: primary[i].group.label(),
                    mode_b: primary[j].group.label(),
                    pearson: demand::pearson(&primary[i], &primary[j]).ok(),
                    pairs: 1,
                });
            }
        }
        let mean = demand::mean_pairwise_pearson(&primary);
        if let Some((r, _)) = mean {
            ctx.manifest.metric(&format!("demand.mean_pearson_{}", dt.as_str()), r);
        }
        corr.push(report::CorrelationRow {
            day_type: dt.as_str(),
            mode_a: "mean",
            mode_b: "mean",
            pearson: mean.map(|m| m.0),
            pairs: mean.map_or(0, |m| m.1),
        });
    }

    let shares = [
        ("legs", demand::mode_share_legs(its).map_err(err("demand"))?),
        ("chains", demand::mode_share_chains(its).map_err(err("demand"))?),
    ];
    ctx.manifest
        .count("demand.cells_used", counts.iter().map(|c| c.used_cells()).sum());

    let out = &mut ctx.out;
    out.write("cell_counts.csv", |w| report::cell_counts(w, &counts))?;
    out.write("summary.csv", |w| report::demand_summary(w, &summary))?;
    out.write("hourly.csv", |w| report::hourly(w, &profiles))?;
    out.write("correlations.csv", |w| report::correlations(w, &corr))?;
    out.write("mode_shares.csv", |w| report::mode_shares(w, &shares))
}

fn od_stage(ctx: &mut Ctx<'_>, its: &[Itinerary], zones: &ZoneTable, external: Option<&Path>) -> Result<()> {
    let err = PipelineError::computation;
    let cfg = ctx.cfg;
    let mut matrices = Vec::new();
    ctx.manifest.timed("od", |_| -> Result<()> {
        for dt in DayType::ALL {
            let days = count_days(its, dt);
            if days == 0 {
                continue;
            }
            let counts = parallel::od_counts(its, zones, dt, cfg.utc_offset_s, cfg.od_basis);
            matrices.push(finish_od(&counts, zones, dt, days).map_err(err("od"))?);
        }
        Ok(())
    })?;
    if matrices.is_empty() {
        return Err(PipelineError::Computation {
            stage: "od",
            source: mobsense_core::Error::Empty("no itineraries"),
        });
    }
    for m in &matrices {
        let mapped: f64 = m.total() * f64::from(m.days);
        ctx.manifest.count(
            &format!("od.mapped_flows_{}", m.day_type.as_str()),
            mapped.round() as usize,
        );
        ctx.manifest
            .count(&format!("od.days_{}", m.day_type.as_str()), m.days as usize);
    }
    ctx.out.write("od_matrix.csv", |w| od_csv::write_od(w, &matrices))?;

    let Some(path) = external else {
        log::info!("no external OD file; skipping the regression");
        return Ok(());
    };
    ctx.manifest.input("external_od", path);
    let ext = read_input(path, od_csv::read_od)?;
    let mut rows = Vec::new();
    for m in &matrices {
        if let Some(e) = ext.get(&m.day_type) {
            let r = regress_od(m, e).map_err(err("od regression"))?;
            ctx.manifest
                .metric(&format!("od.r_squared_{}", m.day_type.as_str()), r.r_squared);
            ctx.manifest
                .metric(&format!("od.alpha_{}", m.day_type.as_str()), r.alpha);
            rows.push((m.day_type, r));
        }
    }
    if rows.is_empty() {
        return Err(PipelineError::malformed(path, "no day type in common with the legs"));
    }
    ctx.out.write("regression.csv", |w| report::regression(w, &rows))
}

fn transfer_stage(
    ctx: &mut Ctx<'_>,
    its: &[Itinerary],
    zones: &ZoneTable,
    stop_list: &[mobsense_core::model::StopRef],
) -> Result<()> {
    let err = PipelineError::computation;
    let cfg = ctx.cfg;
    let events = ctx.manifest.timed("transfers.detect", |_| parallel::transfers(its));
    let expected: usize = its
        .iter()
        .flat_map(|it| &it.chains)
        .map(|c| c.pt_leg_count().saturating_sub(1))
        .sum();
    debug_assert_eq!(events.len(), expected);
    ctx.manifest.count("transfers.events", events.len());
    // A dataset without transfers still gets its hubs and (empty) tables;
    // only the matrix normalisation and the density need events.
    let matrix = if events.is_empty() {
        log::warn!("no transfer events; the transfer matrix and density are empty");
        None
    } else {
        Some(transfer_matrix(&events).map_err(err("transfers"))?)
    };

    let clustering = ctx
        .manifest
        .timed("transfers.dbscan", |_| {
            parallel::cluster_hubs(stop_list, cfg.epsilon_rad, cfg.min_points)
        })
        .map_err(err("hub clustering"))?;
    let proportions = intra_hub_proportions(&clustering, &events);
    ctx.manifest.count("transfers.hubs", clustering.hubs.len());
    ctx.manifest.count("transfers.noise_stops", clustering.noise.len());

    let density = if events.is_empty() {
        None
    } else {
        let points = transfer_points(&events, &zones.grid);
        let raster = RasterSpec::covering(&points, KDE_MARGIN_BANDWIDTHS * cfg.bandwidth_m, cfg.kde_cell_m)
            .map_err(err("kde"))?;
        let density = ctx
            .manifest
            .timed("transfers.kde", |_| parallel::kde(&points, cfg.bandwidth_m, &raster))
            .map_err(err("kde"))?;
        ctx.manifest.metric("transfers.kde_mass", density.mass());
        Some(density)
    };

    let geojson = report::hubs_geojson(&clustering, stop_list, &proportions);
    let out = &mut ctx.out;
    out.write("transfer_events.csv", |w| report::transfer_events(w, &events))?;
    out.write("transfer_matrix.csv", |w| report::transfer_matrix(w, matrix.as_ref()))?;
    out.write("hubs.geojson", |w| {
        serde_json::to_writer_pretty(&mut *w, &geojson)?;
        io::Write::write_all(w, b"\n")
    })?;
    out.write("hub_stops.csv", |w| report::hub_stops(w, stop_list, &clustering))?;
    out.write("kde.csv", |w| report::kde(w, density.as_ref()))
}
