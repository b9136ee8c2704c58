//! The three studies: comb-filter notches with directional white noise,
//! noise reduction over noise colours and input SNRs, and a driver head
//! movement with continuous or frozen adaptation.

use rayon::prelude::*;

use cabin_mwf::activity::{oracle_timeline, power_detector, ActivityTimeline};
use cabin_mwf::metrics::{
    comb_null_frequencies, long_term_spectrum, notch_depth_at, sir_gain, snr_gain, ComponentSignals, EvaluationInputs,
    MetricsReport, NotchConfig, Psd, WelchConfig,
};
use cabin_mwf::mwf::{process_stream, ComponentInputs, MwfConfig, MwfOutput};
use cabin_mwf::noise::{generate_noise, mix_at_snr, EnvelopeTable, NoiseColor, NoiseSpec, SnrReference};
use cabin_mwf::room::{distance, render_scene, PositionSchedule, ScheduleSegment, SourceLabel};
use cabin_mwf::signal::{load_wav, StftConfig};
use cabin_mwf::MultichannelSignal;

use crate::config::{resolve_color, ActivitySource, ExperimentKind, ScenarioConfig};
use crate::error::{Result, ScenarioError};
use crate::speech::{build_program, builtin_utterances, Program, ProgramLayout};

/// Speech (or directional source) components at both microphones.
#[derive(Debug, Clone, PartialEq)]
pub struct TalkerScene {
    pub driver: MultichannelSignal,
    pub passenger: MultichannelSignal,
}

impl TalkerScene {
    pub fn len(&self) -> usize {
        self.driver.len()
    }

    pub fn is_empty(&self) -> bool {
        self.driver.is_empty()
    }

    pub fn sample_rate(&self) -> u32 {
        self.driver.sample_rate()
    }

    /// Each talker at its own microphone, the input to the oracle.
    pub fn own_mic_sources(&self) -> MultichannelSignal {
        MultichannelSignal::new(
            vec![self.driver.channel(0).to_vec(), self.passenger.channel(1).to_vec()],
            self.sample_rate(),
        )
        .expect("equal lengths")
    }
}

/// Everything measured for one rendered condition.
#[derive(Debug, Clone)]
pub struct CellOutcome {
    pub timeline: ActivityTimeline,
    /// Components at mic 1 and mic 2.
    pub references: [ComponentSignals; 2],
    pub mic_sum: ComponentSignals,
    pub output: MwfOutput,
}

impl CellOutcome {
    /// Gains over the whole signal. The MWF is measured against the mic sum,
    /// and the mic sum against each talker's own microphone.
    pub fn reports(&self) -> Result<(MetricsReport, MetricsReport)> {
        let (a, b, mixed) = self.mwf_parts();
        let refs = [&self.references[0], &self.references[1]];
        let mwf = MetricsReport::evaluate(
            "mwf",
            EvaluationInputs {
                reference: [&self.mic_sum, &self.mic_sum],
                snr_output: [&mixed, &mixed],
                sir_output: [a, b],
            },
            &self.timeline,
        )?;
        let baseline = MetricsReport::evaluate(
            "mic_sum",
            EvaluationInputs {
                reference: refs,
                snr_output: [&self.mic_sum, &self.mic_sum],
                sir_output: [&self.mic_sum, &self.mic_sum],
            },
            &self.timeline,
        )?;
        Ok((mwf, baseline))
    }

    fn mwf_parts(&self) -> (&ComponentSignals, &ComponentSignals, ComponentSignals) {
        let d = self.output.decomposition.as_ref().expect("shadow filtering enabled");
        (&d.s_hat_1a, &d.s_hat_2b, d.mixed())
    }

    /// MWF and mic-sum gains restricted to samples in `[lo, hi)`.
    pub fn interval_gains(&self, lo: usize, hi: usize) -> Result<(Gains, Gains)> {
        let n = self.mic_sum.len();
        let window = |mask: Vec<bool>| -> Vec<bool> {
            mask.into_iter()
                .enumerate()
                .map(|(i, m)| m && i >= lo && i < hi)
                .collect()
        };
        let masks = [
            window(self.timeline.sample_mask(SourceLabel::Driver, n)),
            window(self.timeline.sample_mask(SourceLabel::Passenger, n)),
        ];
        let (a, b, mixed) = self.mwf_parts();
        let gains = |reference: [&ComponentSignals; 2],
                     snr_out: [&ComponentSignals; 2],
                     sir_out: [&ComponentSignals; 2]|
         -> Result<Gains> {
            let labels = [SourceLabel::Driver, SourceLabel::Passenger];
            let mut g = Gains::default();
            for i in 0..2 {
                let snr = snr_gain(reference[i], snr_out[i], labels[i], &masks[i])?;
                let sir = sir_gain(reference[i], sir_out[i], labels[i], &masks[i], &masks[1 - i])?;
                g.snr[i] = snr;
                g.sir[i] = sir;
            }
            Ok(g)
        };
        Ok((
            gains([&self.mic_sum, &self.mic_sum], [&mixed, &mixed], [a, b])?,
            gains(
                [&self.references[0], &self.references[1]],
                [&self.mic_sum, &self.mic_sum],
                [&self.mic_sum, &self.mic_sum],
            )?,
        ))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Gains {
    /// Driver, passenger.
    pub snr: [f64; 2],
    pub sir: [f64; 2],
}

impl From<&MetricsReport> for Gains {
    fn from(m: &MetricsReport) -> Self {
        Self {
            snr: [m.snr_gain_driver_db, m.snr_gain_passenger_db],
            sir: [m.sir_gain_driver_db, m.sir_gain_passenger_db],
        }
    }
}

/// Depths of the comb-filter nulls predicted from the geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct NotchSummary {
    /// `(predicted frequency, depth)` per null.
    pub nulls: Vec<(f64, f64)>,
}

impl NotchSummary {
    pub fn max_depth(&self) -> f64 {
        self.nulls.iter().map(|n| n.1).fold(0.0, f64::max)
    }

    pub fn mean_depth(&self) -> f64 {
        if self.nulls.is_empty() {
            0.0
        } else {
            self.nulls.iter().map(|n| n.1).sum::<f64>() / self.nulls.len() as f64
        }
    }
}

/// One line of `metrics.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub experiment: ExperimentKind,
    /// `mwf` or `mic_sum`.
    pub signal: &'static str,
    pub frame_ms: f64,
    pub noise: String,
    pub input_snr_db: Option<f64>,
    pub cross_attenuation_db: Option<f64>,
    pub displacement_m: Option<f64>,
    /// `continuous` or `frozen`.
    pub adaptation: Option<&'static str>,
    /// `pre`, `during` or `post`.
    pub interval: Option<&'static str>,
    pub gains: Option<Gains>,
    pub notch: Option<NotchSummary>,
    pub error: Option<String>,
}

impl Row {
    fn new(experiment: ExperimentKind, signal: &'static str, frame_ms: f64, noise: &str) -> Self {
        Self {
            experiment,
            signal,
            frame_ms,
            noise: noise.to_string(),
            input_snr_db: None,
            cross_attenuation_db: None,
            displacement_m: None,
            adaptation: None,
            interval: None,
            gains: None,
            notch: None,
            error: None,
        }
    }

    pub const HEADER: &'static str = "experiment,signal,frame_ms,noise,input_snr_db,cross_attenuation_db,displacement_m,adaptation,interval,snr_gain_driver_db,snr_gain_passenger_db,sir_gain_driver_db,sir_gain_passenger_db,max_null_depth_db,mean_null_depth_db,status";

    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x}"));
        let g = |f: fn(&Gains) -> f64| self.gains.as_ref().map_or(String::new(), |x| format!("{:.4}", f(x)));
        let nd = |f: fn(&NotchSummary) -> f64| self.notch.as_ref().map_or(String::new(), |x| format!("{:.4}", f(x)));
        let status = match &self.error {
            None => "ok".to_string(),
            Some(e) => format!("\"error: {}\"", e.replace('"', "'")),
        };
        [
            self.experiment.as_str().to_string(),
            self.signal.to_string(),
            format!("{}", self.frame_ms),
            self.noise.clone(),
            opt(self.input_snr_db),
            opt(self.cross_attenuation_db),
            opt(self.displacement_m),
            self.adaptation.unwrap_or("").to_string(),
            self.interval.unwrap_or("").to_string(),
            g(|x| x.snr[0]),
            g(|x| x.snr[1]),
            g(|x| x.sir[0]),
            g(|x| x.sir[1]),
            nd(NotchSummary::max_depth),
            nd(NotchSummary::mean_depth),
            status,
        ]
        .join(",")
    }
}

/// Results of one experiment, in deterministic order.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub experiment: ExperimentKind,
    pub seed: u64,
    pub config_hash: String,
    pub rows: Vec<Row>,
    /// `(tag, spectrum)`, written as `psd_<tag>.dat`.
    pub spectra: Vec<(String, Psd)>,
    pub resolved_config: String,
}

impl RunReport {
    pub fn failed_rows(&self) -> usize {
        self.rows.iter().filter(|r| r.error.is_some()).count()
    }

    pub fn metrics_csv(&self) -> String {
        let mut s = String::from(Row::HEADER);
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.to_csv());
            s.push('\n');
        }
        s
    }
}

fn secs(t: f64, rate: u32) -> usize {
    (t * rate as f64).round() as usize
}

/// Utterances from the configured files, or the built-in pair.
pub fn load_utterances(cfg: &ScenarioConfig) -> Result<Vec<Vec<f64>>> {
    if cfg.speech.files.is_empty() {
        return Ok(builtin_utterances(cfg.sample_rate).to_vec());
    }
    cfg.speech
        .files
        .iter()
        .map(|f| {
            let s = load_wav(f)?;
            if s.sample_rate() != cfg.sample_rate {
                return Err(ScenarioError::Config(format!(
                    "speech.files: {} is at {} Hz, expected {}",
                    f.display(),
                    s.sample_rate(),
                    cfg.sample_rate
                )));
            }
            Ok(s.channel(0).to_vec())
        })
        .collect()
}

pub fn speech_program(cfg: &ScenarioConfig, min_duration: f64) -> Result<Program> {
    let utts = load_utterances(cfg)?;
    let layout = ProgramLayout {
        lead_in: cfg.speech.lead_in,
        gap: cfg.speech.gap,
        min_duration,
        tail: cfg.speech.tail,
    };
    Ok(build_program(&utts, &layout, cfg.sample_rate))
}

/// Renders dry driver/passenger signals through `schedule`.
pub fn render_talkers(
    driver: &[f64],
    passenger: &[f64],
    schedule: &PositionSchedule,
    cross_attenuation_db: Option<f64>,
    sample_rate: u32,
) -> Result<TalkerScene> {
    let dry = MultichannelSignal::new(vec![driver.to_vec(), passenger.to_vec()], sample_rate)?;
    let r = render_scene(&dry, schedule, cross_attenuation_db)?;
    let mut c = r.components.into_iter();
    Ok(TalkerScene {
        driver: c.next().expect("driver"),
        passenger: c.next().expect("passenger"),
    })
}

/// Noise colour for `name`, honouring a custom envelope file.
pub fn noise_color(cfg: &ScenarioConfig, name: &str) -> Result<NoiseColor> {
    let table = cfg
        .noise
        .envelope_file
        .as_ref()
        .map(EnvelopeTable::from_file)
        .transpose()?;
    resolve_color(name, table.as_ref())
}

/// Settings shared by every cell of a study.
#[derive(Debug, Clone)]
pub struct CellSpec<'a> {
    pub talkers: &'a TalkerScene,
    pub color: &'a NoiseColor,
    pub input_snr_db: f64,
    pub mwf: MwfConfig,
    pub noise_seed: u64,
}

/// Adds calibrated noise and runs the filter with shadow components.
pub fn run_cell(cfg: &ScenarioConfig, spec: &CellSpec<'_>) -> Result<CellOutcome> {
    let t = spec.talkers;
    let n = t.len();
    let rate = t.sample_rate();
    let stft = StftConfig::from_frame_ms(spec.mwf.frame_ms, rate)?;
    let oracle = oracle_timeline(&t.own_mic_sources(), &stft, cfg.activity.floor_db)?;
    let raw = generate_noise(
        &NoiseSpec {
            color: spec.color.clone(),
            seed: spec.noise_seed,
            channels: 2,
        },
        n,
        rate,
    )?;
    let md = oracle.sample_mask(SourceLabel::Driver, n);
    let mp = oracle.sample_mask(SourceLabel::Passenger, n);
    // A talker that never speaks takes no part in the calibration.
    let refs: Vec<SnrReference> = [(0, &md), (1, &mp)]
        .into_iter()
        .filter(|(_, m)| m.contains(&true))
        .map(|(k, mask)| SnrReference {
            source: k,
            mic: k,
            mask,
        })
        .collect();
    let noise = mix_at_snr(&[t.driver.clone(), t.passenger.clone()], &raw, spec.input_snr_db, &refs)?.noise;
    let mics = t.driver.add(&t.passenger)?.add(&noise)?;
    let steer = match cfg.activity.source {
        ActivitySource::Oracle => oracle.clone(),
        ActivitySource::Detector => power_detector(&mics, &stft, &cfg.detector())?,
    };
    let parts = ComponentInputs {
        driver: t.driver.clone(),
        passenger: t.passenger.clone(),
        noise: noise.clone(),
    };
    let output = process_stream(&mics, &steer, &spec.mwf, Some(&parts))?;
    let references = [0, 1].map(|i| {
        ComponentSignals::new(
            t.driver.channel(i).to_vec(),
            t.passenger.channel(i).to_vec(),
            noise.channel(i).to_vec(),
        )
        .expect("equal lengths")
    });
    let mic_sum = ComponentSignals::sum(&references[0], &references[1])?;
    Ok(CellOutcome {
        timeline: oracle,
        references,
        mic_sum,
        output,
    })
}

fn error_row(mut row: Row, e: &ScenarioError) -> Row {
    row.error = Some(e.to_string());
    row
}

/// Colour × input-SNR grid plus one mic-sum baseline at the configured noise.
pub fn run_noise_reduction(cfg: &ScenarioConfig) -> Result<RunReport> {
    let program = speech_program(cfg, cfg.speech.min_duration)?;
    let talkers = render_talkers(
        &program.driver,
        &program.passenger,
        &PositionSchedule::fixed(cfg.scene()),
        cfg.scene.cross_attenuation_db,
        cfg.sample_rate,
    )?;
    let nr = &cfg.noise_reduction;
    let mut cells: Vec<(String, f64)> = nr
        .colors
        .iter()
        .flat_map(|c| nr.input_snr_db.iter().map(move |s| (c.clone(), *s)))
        .collect();
    cells.push((cfg.noise.color.clone(), cfg.noise.input_snr_db));
    let baseline_index = cells.len() - 1;
    let outcomes: Vec<std::result::Result<Gains, (Gains, ScenarioError)>> = cells
        .par_iter()
        .enumerate()
        .map(|(i, (name, snr))| {
            let run = || -> Result<Gains> {
                let color = noise_color(cfg, name)?;
                let spec = CellSpec {
                    talkers: &talkers,
                    color: &color,
                    input_snr_db: *snr,
                    mwf: cfg.mwf_config(&color),
                    noise_seed: cfg.seed,
                };
                let (mwf, baseline) = run_cell(cfg, &spec)?.reports()?;
                Ok(if i == baseline_index {
                    (&baseline).into()
                } else {
                    (&mwf).into()
                })
            };
            run().map_err(|e| (Gains::default(), e))
        })
        .collect();
    let frame = cfg.mwf.frame_ms;
    let rows = cells
        .iter()
        .zip(outcomes)
        .enumerate()
        .map(|(i, ((name, snr), res))| {
            let signal = if i == baseline_index { "mic_sum" } else { "mwf" };
            let mut row = Row::new(ExperimentKind::Noise, signal, frame, name);
            row.input_snr_db = Some(*snr);
            row.cross_attenuation_db = cfg.scene.cross_attenuation_db;
            match res {
                Ok(g) => {
                    row.gains = Some(g);
                    row
                }
                Err((_, e)) => error_row(row, &e),
            }
        })
        .collect();
    Ok(RunReport {
        experiment: ExperimentKind::Noise,
        seed: cfg.seed,
        config_hash: cfg.hash(),
        rows,
        spectra: Vec::new(),
        resolved_config: cfg.resolved(),
    })
}

/// Delay between the driver's arrival at the far and near microphones.
pub fn driver_path_delay(cfg: &ScenarioConfig) -> f64 {
    let s = &cfg.scene;
    (distance(s.driver, s.mic2) - distance(s.driver, s.mic1)) / s.speed_of_sound
}

/// Depth at each predicted comb null of a spectrum.
pub fn null_depths(psd: &Psd, delay: f64, cfg: &ScenarioConfig) -> NotchSummary {
    let n = &cfg.notch;
    let notch_cfg = NotchConfig {
        envelope_octaves: n.envelope_octaves,
        ..NotchConfig::default()
    };
    let nulls = comb_null_frequencies(delay, n.max_frequency)
        .into_iter()
        .map(|f| (f, notch_depth_at(psd, f, n.search_hz, &notch_cfg)))
        .collect();
    NotchSummary { nulls }
}

/// White directional sources: passenger first, then a long driver segment.
pub fn notch_sources(cfg: &ScenarioConfig) -> Result<(Vec<f64>, Vec<f64>, std::ops::Range<usize>)> {
    let n = &cfg.notch;
    let rate = cfg.sample_rate;
    let p0 = secs(n.silence, rate);
    let p1 = p0 + secs(n.passenger_duration, rate);
    let d0 = p1 + secs(n.gap, rate);
    let d1 = d0 + secs(n.driver_duration, rate);
    let total = d1 + secs(0.25, rate);
    let white = generate_noise(
        &NoiseSpec {
            color: NoiseColor::White,
            seed: cfg.seed.wrapping_add(0x6e6f_7463),
            channels: 2,
        },
        total,
        rate,
    )?;
    let gate = |x: &[f64], lo: usize, hi: usize| -> Vec<f64> {
        x.iter()
            .enumerate()
            .map(|(i, v)| if i >= lo && i < hi { 0.3 * v } else { 0.0 })
            .collect()
    };
    let analysis = d1 - secs(n.analysis_duration, rate)..d1;
    Ok((gate(white.channel(0), d0, d1), gate(white.channel(1), p0, p1), analysis))
}

/// Frame size × cross attenuation grid; PSDs and null depths of the mic sum
/// and the MWF output sum over the driver segment.
pub fn run_notch(cfg: &ScenarioConfig) -> Result<RunReport> {
    let (driver, passenger, analysis) = notch_sources(cfg)?;
    let n = &cfg.notch;
    let delay = driver_path_delay(cfg);
    let schedule = PositionSchedule::fixed(cfg.scene());
    let scenes: Vec<Result<TalkerScene>> = n
        .cross_attenuation_db
        .par_iter()
        .map(|a| render_talkers(&driver, &passenger, &schedule, Some(*a), cfg.sample_rate))
        .collect();
    let cells: Vec<(f64, usize)> = n
        .frame_ms
        .iter()
        .flat_map(|f| (0..n.cross_attenuation_db.len()).map(move |a| (*f, a)))
        .collect();
    type Cell = Result<[(Psd, NotchSummary); 2]>;
    let results: Vec<Cell> = cells
        .par_iter()
        .map(|&(frame_ms, ai)| {
            let talkers = scenes[ai].as_ref().map_err(|e| ScenarioError::Config(e.to_string()))?;
            let mut mwf = cfg.mwf_config(&NoiseColor::White);
            mwf.frame_ms = frame_ms;
            mwf.warmup_frames = n.warmup_frames;
            let spec = CellSpec {
                talkers,
                color: &NoiseColor::White,
                input_snr_db: n.background_snr_db,
                mwf,
                noise_seed: cfg.seed,
            };
            let o = run_cell(cfg, &spec)?;
            let welch = WelchConfig::default();
            let sum = o.mic_sum.mixture();
            let mic_psd = long_term_spectrum(&sum[analysis.clone()], cfg.sample_rate, &welch)?;
            let mwf_psd = long_term_spectrum(&o.output.mixed[analysis.clone()], cfg.sample_rate, &welch)?;
            let a = null_depths(&mic_psd, delay, cfg);
            let b = null_depths(&mwf_psd, delay, cfg);
            Ok([(mic_psd, a), (mwf_psd, b)])
        })
        .collect();
    let mut rows = Vec::new();
    let mut spectra = Vec::new();
    for (&(frame_ms, ai), res) in cells.iter().zip(results) {
        let att = n.cross_attenuation_db[ai];
        let mk = |signal| {
            let mut r = Row::new(ExperimentKind::Notch, signal, frame_ms, "white");
            r.input_snr_db = Some(n.background_snr_db);
            r.cross_attenuation_db = Some(att);
            r
        };
        match res {
            Ok(pair) => {
                for ((psd, summary), signal) in pair.into_iter().zip(["mic_sum", "mwf"]) {
                    let mut r = mk(signal);
                    r.notch = Some(summary);
                    rows.push(r);
                    spectra.push((format!("{frame_ms}ms_{att}db_{signal}"), psd));
                }
            }
            Err(e) => {
                for signal in ["mic_sum", "mwf"] {
                    rows.push(error_row(mk(signal), &e));
                }
            }
        }
    }
    Ok(RunReport {
        experiment: ExperimentKind::Notch,
        seed: cfg.seed,
        config_hash: cfg.hash(),
        rows,
        spectra,
        resolved_config: cfg.resolved(),
    })
}

/// Schedule moving the driver `displacement` metres towards the left side
/// between `start` and `end`.
pub fn head_schedule(cfg: &ScenarioConfig, displacement: f64) -> PositionSchedule {
    let base = cfg.scene();
    let d = cfg.scene.driver;
    let moved = base.with_driver_at([d[0], d[1] - displacement, d[2]]);
    let mut s = PositionSchedule::fixed(base.clone());
    s.segments.push(ScheduleSegment {
        start: cfg.head_movement.start,
        scene: moved,
    });
    s.segments.push(ScheduleSegment {
        start: cfg.head_movement.end,
        scene: base,
    });
    s
}

/// Displacement × {continuous, frozen} with gains per interval.
pub fn run_head_movement(cfg: &ScenarioConfig) -> Result<RunReport> {
    let h = &cfg.head_movement;
    let rate = cfg.sample_rate;
    let program = speech_program(cfg, h.duration)?;
    let cells: Vec<(f64, Option<f64>)> = h
        .displacements
        .iter()
        .flat_map(|d| [(*d, None), (*d, Some(h.stop_time))])
        .collect();
    let bounds = [
        ("pre", 0, secs(h.start, rate)),
        ("during", secs(h.start, rate), secs(h.end, rate)),
        ("post", secs(h.end, rate), secs(h.duration, rate)),
    ];
    let results: Vec<Result<Vec<Gains>>> = cells
        .par_iter()
        .map(|&(disp, stop)| {
            let talkers = render_talkers(
                &program.driver,
                &program.passenger,
                &head_schedule(cfg, disp),
                cfg.scene.cross_attenuation_db,
                rate,
            )?;
            let mut mwf = cfg.mwf_config(&NoiseColor::White);
            mwf.adaptation_stop_time = stop;
            let spec = CellSpec {
                talkers: &talkers,
                color: &noise_color(cfg, &cfg.noise.color)?,
                input_snr_db: h.input_snr_db,
                mwf,
                noise_seed: cfg.seed,
            };
            let o = run_cell(cfg, &spec)?;
            bounds
                .iter()
                .map(|&(_, lo, hi)| Ok(o.interval_gains(lo, hi.min(o.mic_sum.len()))?.0))
                .collect()
        })
        .collect();
    let mut rows = Vec::new();
    for (&(disp, stop), res) in cells.iter().zip(results) {
        let adaptation = if stop.is_some() { "frozen" } else { "continuous" };
        for (k, &(name, _, _)) in bounds.iter().enumerate() {
            let mut r = Row::new(ExperimentKind::Head, "mwf", cfg.mwf.frame_ms, &cfg.noise.color);
            r.input_snr_db = Some(h.input_snr_db);
            r.displacement_m = Some(disp);
            r.adaptation = Some(adaptation);
            r.interval = Some(name);
            match &res {
                Ok(g) => r.gains = Some(g[k]),
                Err(e) => r.error = Some(e.to_string()),
            }
            rows.push(r);
        }
    }
    Ok(RunReport {
        experiment: ExperimentKind::Head,
        seed: cfg.seed,
        config_hash: cfg.hash(),
        rows,
        spectra: Vec::new(),
        resolved_config: cfg.resolved(),
    })
}

pub fn run_experiment(cfg: &ScenarioConfig) -> Result<RunReport> {
    match cfg.experiment {
        ExperimentKind::Notch => run_notch(cfg),
        ExperimentKind::Noise => run_noise_reduction(cfg),
        ExperimentKind::Head => run_head_movement(cfg),
    }
}
