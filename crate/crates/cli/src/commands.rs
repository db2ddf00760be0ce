//! The four subcommands.

use std::path::{Path, PathBuf};

use serde::Serialize;

use quenchlab_core::analysis::{analyze_run, RegimeReport};
use quenchlab_core::data::{gen_synthetic, load_idx};
use quenchlab_core::nn::{
    train_run_with_sink, SnapshotReader, SnapshotWriter, TrainConfig, TrainData, WeightSnapshot,
};
use quenchlab_core::observables::{
    average_curve_sets, log_schedule, msd, msd_curves, tw_grid, MsdCurve, MsdCurveSet,
    NoiseSeries, Schedule, SystemTag,
};
use quenchlab_core::par;
use quenchlab_core::pspin::run_quench;

use crate::config::{
    canonical_text, run_id, AnalysisSection, DatasetKind, ExperimentConfig, PspinSection,
    ScheduleSection, SweepSection, TrainSection,
};
use crate::csvio::{self, fmt, fmt_opt, read_table, write_table, Row};
use crate::error::{CliError, CliResult};
use crate::manifest::{read_run_id, RunManifest};
use crate::svg::Plot;

pub const LOSS_FILE: &str = "loss_curve.csv";
pub const MSD_FILE: &str = "msd.csv";
pub const NOISE_FILE: &str = "noise.csv";
pub const SNAPSHOT_FILE: &str = "snapshots.qlsnap";
pub const REPORT_FILE: &str = "regime_report.csv";
pub const SWEEP_FILE: &str = "sweep.csv";

/// Snapshots stay in memory up to this many measurements...
const MAX_IN_MEMORY_POINTS: usize = 200;
/// ...and this many parameters; larger runs are re-read from the snapshot file.
const MAX_IN_MEMORY_PARAMS: usize = 1_000_000;

/// Turns parameter-validation failures into configuration errors naming the
/// section; everything else passes through.
fn in_section(section: &'static str) -> impl Fn(quenchlab_core::Error) -> CliError {
    move |e| match e {
        quenchlab_core::Error::InvalidParameter(msg) | quenchlab_core::Error::InvalidArch(msg) => {
            CliError::Config(format!("[{section}] {msg}"))
        }
        other => CliError::Core(other),
    }
}

/// Measurement schedule in steps: explicit points, or geometric up to
/// `total_steps`.
fn step_schedule(sched: &ScheduleSection, total_steps: u64) -> CliResult<Schedule> {
    if sched.tw_stride == 0 {
        return Err(CliError::Config("[schedule] tw_stride must be >= 1".into()));
    }
    let schedule = match &sched.points {
        Some(points) => Schedule::from_times(points.clone(), sched.base),
        None if total_steps == 0 => Ok(Schedule::empty()),
        None => log_schedule(total_steps as f64, sched.base, sched.first_step),
    };
    schedule.map_err(in_section("schedule"))
}

fn create_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

#[derive(Serialize)]
struct PspinKey<'a> {
    pspin: &'a PspinSection,
    schedule: &'a ScheduleSection,
}

#[derive(Serialize)]
struct TrainKey<'a> {
    train: &'a TrainSection,
    schedule: &'a ScheduleSection,
}

#[derive(Serialize)]
struct SweepKey<'a> {
    train: &'a TrainSection,
    schedule: &'a ScheduleSection,
    analysis: &'a AnalysisSection,
    sweep: &'a SweepSection,
}

fn msd_rows(run_id: &str, curves: &MsdCurveSet, noise: Option<&NoiseSeries>) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for c in &curves.curves {
        let d = noise.and_then(|n| n.get(c.tw));
        for &(t, delta) in &c.points {
            let ratio = d.filter(|&d| d > 0.0).map(|d| delta / d);
            rows.push(vec![
                curves.system.to_string(),
                run_id.to_owned(),
                fmt(c.tw),
                fmt(t),
                fmt(delta),
                fmt_opt(d),
                fmt_opt(ratio),
            ]);
        }
    }
    rows
}

/// Disorder-averaged quench: `loss_curve.csv` holds `E/N`, `msd.csv` the
/// averaged spin MSD.
pub fn cmd_pspin(cfg: &ExperimentConfig, out: &Path) -> CliResult<Vec<PathBuf>> {
    let sec = cfg.pspin()?;
    let key = PspinKey {
        pspin: sec,
        schedule: &cfg.schedule,
    };
    let id = run_id(&key);
    let manifest = RunManifest::new("pspin", id.clone(), canonical_text(&key));
    let params = sec.params();
    params.validate().map_err(in_section("pspin"))?;
    if sec.realizations == 0 {
        return Err(CliError::Config("[pspin] realizations must be >= 1".into()));
    }
    let schedule = step_schedule(&cfg.schedule, params.total_steps())?.scaled(params.dt);
    let stride = cfg.schedule.tw_stride;

    let runs = par::map_indexed(sec.realizations as usize, |r| {
        let (log, snaps) = run_quench(&params.realization(r as u64), &schedule)?;
        let times: Vec<f64> = snaps.iter().map(|s| s.t).collect();
        let curves = msd_curves(&snaps, &tw_grid(&times, stride), SystemTag::Spins)?;
        Ok::<_, quenchlab_core::Error>((log, curves))
    });
    let mut logs = Vec::new();
    let mut sets = Vec::new();
    for run in runs {
        let (log, curves) = run.map_err(in_section("pspin"))?;
        logs.push(log);
        sets.push(curves);
    }
    let curves = average_curve_sets(&sets)?;
    let r = logs.len() as f64;
    let energy: Vec<Vec<String>> = (0..logs[0].len())
        .map(|i| {
            let e = logs.iter().map(|l| l.records()[i].energy_per_spin).sum::<f64>() / r;
            vec![fmt(logs[0].records()[i].t), fmt(e)]
        })
        .collect();

    create_dir(out)?;
    let loss_path = out.join(LOSS_FILE);
    write_table(&loss_path, &csvio::LOSS_PSPIN, energy)?;
    let msd_path = out.join(MSD_FILE);
    write_table(&msd_path, &csvio::MSD, msd_rows(&id, &curves, None))?;
    let mut files = vec![loss_path, msd_path];
    files.push(manifest.finish(out, &files)?);
    Ok(files)
}

fn load_data(sec: &TrainSection) -> CliResult<TrainData> {
    let in_train = in_section("train");
    match sec.dataset {
        DatasetKind::Synthetic => {
            let n_train = sec.n_train.unwrap_or(500);
            let all = gen_synthetic(
                n_train + sec.n_test,
                sec.input_dim,
                sec.label_mode.into(),
                sec.data_seed,
            )
            .map_err(&in_train)?;
            if sec.n_test == 0 {
                return Ok(TrainData {
                    train: all,
                    test: None,
                });
            }
            let (train, test) = all.split_off(sec.n_test).map_err(&in_train)?;
            Ok(TrainData {
                train,
                test: Some(test),
            })
        }
        DatasetKind::Idx => {
            let required = |p: &Option<PathBuf>, key: &str| {
                p.clone().ok_or_else(|| {
                    CliError::Config(format!("[train] {key} is required for dataset = \"idx\""))
                })
            };
            let mut train = load_idx(
                required(&sec.train_images, "train_images")?,
                required(&sec.train_labels, "train_labels")?,
            )?;
            if let Some(n) = sec.n_train {
                if n == 0 {
                    return Err(CliError::Config("[train] n_train must be >= 1".into()));
                }
                if n < train.len() {
                    let rest = train.len() - n;
                    train = train.split_off(rest).map_err(&in_train)?.0;
                }
            }
            let mut test = match (&sec.test_images, &sec.test_labels) {
                (Some(images), Some(labels)) => Some(load_idx(images, labels)?),
                (None, None) => None,
                _ => {
                    return Err(CliError::Config(
                        "[train] test_images and test_labels must be given together".into(),
                    ))
                }
            };
            if sec.parity {
                train = train.to_parity();
                test = test.map(|t| t.to_parity());
            }
            Ok(TrainData { train, test })
        }
    }
}

/// Curves from snapshots kept on disk, one record at a time.
fn streamed_msd_curves(path: &Path, tw_list: &[f64]) -> CliResult<MsdCurveSet> {
    let mut reader = SnapshotReader::open(path)?;
    let iterations = reader.iterations()?;
    let count = iterations.len();
    let mut anchors = Vec::with_capacity(tw_list.len());
    for &tw in tw_list {
        let idx = iterations.iter().position(|&i| i as f64 == tw).ok_or_else(|| {
            quenchlab_core::Error::MissingSnapshot {
                tw,
                available: iterations.iter().map(|&i| i as f64).collect(),
            }
        })?;
        anchors.push(idx);
    }
    let curves = par::map_indexed(anchors.len(), |a| -> quenchlab_core::Result<MsdCurve> {
        let mut reader = SnapshotReader::open(path)?;
        let base: WeightSnapshot = reader.read(anchors[a] as u64)?;
        let mut points = Vec::with_capacity(count - anchors[a]);
        for j in anchors[a] + 1..count {
            let s = reader.read(j as u64)?;
            points.push(((s.iteration - base.iteration) as f64, msd(&base.w, &s.w)?));
        }
        Ok(MsdCurve {
            tw: base.iteration as f64,
            points,
            noise: None,
        })
    });
    let mut set = MsdCurveSet::new(SystemTag::Weights);
    for c in curves {
        let c = c?;
        if !c.points.is_empty() {
            set.curves.push(c);
        }
    }
    Ok(set)
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub run_id: String,
    pub final_train_loss: f64,
    pub files: Vec<PathBuf>,
}

/// One SGD run: loss curve, noise strength, weight MSD and the snapshot file.
pub fn cmd_train(cfg: &ExperimentConfig, out: &Path) -> CliResult<TrainOutcome> {
    train_with_policy(cfg, out, None)
}

/// `force_stream` overrides the in-memory snapshot policy.
pub fn train_with_policy(
    cfg: &ExperimentConfig,
    out: &Path,
    force_stream: Option<bool>,
) -> CliResult<TrainOutcome> {
    let sec = cfg.train()?;
    let key = TrainKey {
        train: sec,
        schedule: &cfg.schedule,
    };
    let id = run_id(&key);
    let manifest = RunManifest::new("train", id.clone(), canonical_text(&key));
    let data = load_data(sec)?;
    let n = data.train.len();
    let tc = TrainConfig {
        arch: sec.arch(data.train.dim()),
        batch_size: sec.batch_size,
        learning_rate: sec.learning_rate,
        max_iterations: sec.max_iterations,
        data_seed: sec.data_seed,
        shuffle_seed: sec.shuffle_seed,
        noise_subset_size: sec.noise_subset_size.unwrap_or(n.min(1000)),
    };
    tc.validate(n).map_err(in_section("train"))?;
    let schedule = step_schedule(&cfg.schedule, sec.max_iterations)?;
    let m = tc.arch.num_params();
    let stream = force_stream
        .unwrap_or(schedule.len() + 1 > MAX_IN_MEMORY_POINTS || m > MAX_IN_MEMORY_PARAMS);

    create_dir(out)?;
    let snap_path = out.join(SNAPSHOT_FILE);
    let writer = SnapshotWriter::create(&snap_path, m)?;
    let (log, curves_from) = if stream {
        let mut writer = writer;
        let log = train_run_with_sink(&tc, &data, &schedule, &mut writer)
            .map_err(in_section("schedule"))?;
        writer.finish()?;
        (log, None)
    } else {
        let mut sink = (Vec::new(), writer);
        let log = train_run_with_sink(&tc, &data, &schedule, &mut sink)
            .map_err(in_section("schedule"))?;
        let (snaps, writer) = sink;
        writer.finish()?;
        (log, Some(snaps))
    };
    let times: Vec<f64> = log.records().iter().map(|r| r.t as f64).collect();
    let tws = tw_grid(&times, cfg.schedule.tw_stride);
    let curves = match curves_from {
        Some(snaps) => msd_curves(&snaps, &tws, SystemTag::Weights)?,
        None => streamed_msd_curves(&snap_path, &tws)?,
    };
    let noise: NoiseSeries = log.records().iter().map(|r| (r.t as f64, r.noise)).collect();

    let loss_path = out.join(LOSS_FILE);
    write_table(
        &loss_path,
        &csvio::LOSS_TRAIN,
        log.records().iter().map(|r| {
            vec![
                r.t.to_string(),
                fmt(r.train_loss),
                fmt_opt(r.test_loss),
                fmt(r.train_acc),
                fmt_opt(r.test_acc),
            ]
        }),
    )?;
    let noise_path = out.join(NOISE_FILE);
    write_table(
        &noise_path,
        &csvio::NOISE,
        noise.points.iter().map(|&(t, d)| vec![id.clone(), fmt(t), fmt(d)]),
    )?;
    let msd_path = out.join(MSD_FILE);
    write_table(&msd_path, &csvio::MSD, msd_rows(&id, &curves, Some(&noise)))?;
    let mut files = vec![loss_path, noise_path, msd_path, snap_path];
    files.push(manifest.finish(out, &files)?);
    Ok(TrainOutcome {
        run_id: id,
        final_train_loss: log.last().map_or(f64::NAN, |r| r.train_loss),
        files,
    })
}

/// `(t, loss)` from either loss-curve schema, and whether it is a spin run.
fn read_loss(path: &Path) -> CliResult<(Vec<(f64, f64)>, bool)> {
    match read_table(path, &csvio::LOSS_TRAIN) {
        Ok(rows) => Ok((rows.iter().map(|r| (r.num(0), r.num(1))).collect(), false)),
        Err(CliError::Schema { row: 1, .. }) => {
            let rows = read_table(path, &csvio::LOSS_PSPIN).map_err(|e| match e {
                CliError::Schema { row: 1, .. } => CliError::schema(
                    path,
                    1,
                    format!(
                        "header must be {} or {}",
                        csvio::LOSS_TRAIN.header().join(","),
                        csvio::LOSS_PSPIN.header().join(",")
                    ),
                ),
                other => other,
            })?;
            Ok((rows.iter().map(|r| (r.num(0), r.num(1))).collect(), true))
        }
        Err(e) => Err(e),
    }
}

/// Curves grouped by consecutive `tw`, plus any `D_tw` values present.
fn read_msd(path: &Path, default: SystemTag) -> CliResult<(MsdCurveSet, Vec<Row>)> {
    let rows = read_table(path, &csvio::MSD)?;
    let system = match rows.first() {
        Some(r) => r
            .text(0)
            .parse::<SystemTag>()
            .map_err(|_| CliError::schema(path, r.line, format!("unknown system {:?}", r.text(0))))?,
        None => default,
    };
    let mut set = MsdCurveSet::new(system);
    for r in &rows {
        if r.text(0) != system.as_str() {
            return Err(CliError::schema(path, r.line, "mixed systems in one file"));
        }
        let tw = r.num(2);
        match set.curves.last_mut() {
            Some(c) if c.tw == tw => c.points.push((r.num(3), r.num(4))),
            _ => set.curves.push(MsdCurve {
                tw,
                points: vec![(r.num(3), r.num(4))],
                noise: None,
            }),
        }
    }
    Ok((set, rows))
}

fn read_noise(path: &Path) -> CliResult<NoiseSeries> {
    Ok(read_table(path, &csvio::NOISE)?
        .iter()
        .map(|r| (r.num(1), r.num(2)))
        .collect())
}

fn validate_analysis(a: &AnalysisSection) -> CliResult<()> {
    if !(a.theta > 0.0 && a.theta < 1.0) {
        return Err(CliError::Config(format!("[analysis] theta must be in (0, 1), got {}", a.theta)));
    }
    if !(a.eps_loss >= 0.0) {
        return Err(CliError::Config(format!("[analysis] eps_loss must be >= 0, got {}", a.eps_loss)));
    }
    if !(a.half_window_decades > 0.0) {
        return Err(CliError::Config(format!(
            "[analysis] half_window_decades must be > 0, got {}",
            a.half_window_decades
        )));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct AnalyzeOutcome {
    pub run_id: String,
    pub report: RegimeReport,
    pub files: Vec<PathBuf>,
}

/// Reads the artifacts of one run and writes `regime_report.csv` and plots.
pub fn cmd_analyze(cfg: &ExperimentConfig, out: &Path) -> CliResult<AnalyzeOutcome> {
    validate_analysis(&cfg.analysis)?;
    let run_dir = cfg.analysis.run_dir.clone().unwrap_or_else(|| out.to_path_buf());
    let (loss, spins) = read_loss(&run_dir.join(LOSS_FILE))?;
    let default_system = if spins { SystemTag::Spins } else { SystemTag::Weights };
    let (curves, msd_rows) = read_msd(&run_dir.join(MSD_FILE), default_system)?;
    let noise_path = run_dir.join(NOISE_FILE);
    let noise = if noise_path.exists() {
        Some(read_noise(&noise_path)?)
    } else {
        let series: NoiseSeries = msd_rows
            .iter()
            .filter_map(|r| r.opt(5).map(|d| (r.num(2), d)))
            .collect();
        (!series.points.is_empty()).then_some(series)
    };
    let report = analyze_run(&loss, &curves, noise.as_ref(), &cfg.analysis.params());
    let id = read_run_id(&run_dir)
        .or_else(|| msd_rows.first().map(|r| r.text(1).to_owned()))
        .unwrap_or_default();

    create_dir(out)?;
    let report_path = out.join(REPORT_FILE);
    write_table(
        &report_path,
        &csvio::REPORT,
        [vec![
            id.clone(),
            fmt_opt(report.t1),
            fmt_opt(report.t2),
            fmt_opt(report.collapse_pre),
            fmt_opt(report.collapse_post),
            fmt_opt(report.late_slope),
            fmt_opt(report.plateau_q),
        ]],
    )?;
    let mut files = vec![report_path];

    let loss_plot = Plot {
        title: if spins { "energy per spin" } else { "training loss" }.into(),
        x_label: "t".into(),
        y_label: if spins { "E/N" } else { "loss" }.into(),
        log_y: false,
        series: vec![("loss".into(), loss)],
    };
    let path = out.join("loss.svg");
    write_text(&path, &loss_plot.render())?;
    files.push(path);

    let per_tw = |scale: &dyn Fn(f64) -> Option<f64>| -> Vec<(String, Vec<(f64, f64)>)> {
        curves
            .curves
            .iter()
            .filter_map(|c| {
                let s = scale(c.tw)?;
                Some((format!("tw={}", c.tw), c.points.iter().map(|&(t, d)| (t, d / s)).collect()))
            })
            .collect()
    };
    let msd_plot = Plot {
        title: "mean square displacement".into(),
        x_label: "t".into(),
        y_label: "delta".into(),
        log_y: true,
        series: per_tw(&|_| Some(1.0)),
    };
    let path = out.join("msd.svg");
    write_text(&path, &msd_plot.render())?;
    files.push(path);
    if let Some(noise) = &noise {
        let rescaled = Plot {
            title: "rescaled mean square displacement".into(),
            x_label: "t".into(),
            y_label: "delta / D(tw)".into(),
            log_y: true,
            series: per_tw(&|tw| noise.get(tw).filter(|&d| d > 0.0)),
        };
        let path = out.join("msd_rescaled.svg");
        write_text(&path, &rescaled.render())?;
        files.push(path);
    }
    Ok(AnalyzeOutcome {
        run_id: id,
        report,
        files,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub final_train_loss: Option<f64>,
    pub report: RegimeReport,
    pub error: Option<String>,
}

fn sweep_point(cfg: &ExperimentConfig, sweep: &SweepSection, value: f64, dir: &Path) -> CliResult<SweepRow> {
    let train = sweep.apply(cfg.train()?, value)?;
    let child = ExperimentConfig {
        pspin: None,
        train: Some(train),
        schedule: cfg.schedule.clone(),
        analysis: AnalysisSection {
            run_dir: None,
            ..cfg.analysis.clone()
        },
        sweep: None,
    };
    let trained = cmd_train(&child, dir)?;
    let analyzed = cmd_analyze(&child, dir)?;
    Ok(SweepRow {
        value,
        final_train_loss: Some(trained.final_train_loss),
        report: analyzed.report,
        error: None,
    })
}

/// Directory of one sweep point, e.g. `hidden_size_10.0`.
pub fn sweep_dir(out: &Path, sweep: &SweepSection, value: f64) -> PathBuf {
    let name = serde_json::to_value(sweep.parameter)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_default();
    out.join(format!("{name}_{value:?}"))
}

/// Trains and analyzes every sweep value concurrently; failed points leave
/// empty fields in their row.
pub fn cmd_sweep(cfg: &ExperimentConfig, out: &Path) -> CliResult<Vec<SweepRow>> {
    let sweep = cfg.sweep()?;
    let train = cfg.train()?;
    validate_analysis(&cfg.analysis)?;
    let mut values = sweep.values.clone();
    if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
        return Err(CliError::Config("[sweep] values must be a non-empty list of numbers".into()));
    }
    values.sort_by(f64::total_cmp);
    values.dedup();
    let key = SweepKey {
        train,
        schedule: &cfg.schedule,
        analysis: &cfg.analysis,
        sweep,
    };
    let mut manifest = RunManifest::new("sweep", run_id(&key), canonical_text(&key));

    create_dir(out)?;
    let rows: Vec<SweepRow> = par::map_indexed(values.len(), |i| {
        let v = values[i];
        sweep_point(cfg, sweep, v, &sweep_dir(out, sweep, v)).unwrap_or_else(|e| SweepRow {
            value: v,
            final_train_loss: None,
            report: RegimeReport::default(),
            error: Some(e.to_string()),
        })
    });
    for r in &rows {
        if let Some(e) = &r.error {
            eprintln!("sweep value {:?}: {e}", r.value);
            manifest.errors.push(format!("{:?}: {e}", r.value));
        }
    }
    let path = out.join(SWEEP_FILE);
    write_table(
        &path,
        &csvio::SWEEP,
        rows.iter().map(|r| {
            vec![
                fmt(r.value),
                fmt_opt(r.final_train_loss),
                fmt_opt(r.report.t1),
                fmt_opt(r.report.t2),
                fmt_opt(r.report.collapse_post),
                fmt_opt(r.report.plateau_q),
            ]
        }),
    )?;
    manifest.finish(out, &[path])?;
    Ok(rows)
}
