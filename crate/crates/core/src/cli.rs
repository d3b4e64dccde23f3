//! Command implementations behind the `eigenres` binary, plus the
//! `key = value` run configuration they share.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::analysis::AnalysisConfig;
use crate::eigen::{
    information_rate_csv, load_model, save_model, train_model, write_eigenresidual_csv, EigenModel, KSelection,
    TrainConfig,
};
use crate::error::Error;
use crate::pitch::{track_f0, GciPolarity};
use crate::signal::{read_wav, write_wav, Signal};
use crate::vocoder::{
    analyze_utterance, log_spectral_distortion, synthesize, ExcitationKind, ParameterTrack, SynthConfig,
    UnvoicedGainMode,
};

/// A failed command: exit code and a one-line reason.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub kind: &'static str,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            kind: "usage",
            message: message.into(),
        }
    }

    /// Problems with what the user supplied: exit 2.
    pub fn input(err: Error) -> Self {
        CliError {
            code: 2,
            kind: "input",
            message: err.to_string(),
        }
    }

    /// Classifies a pipeline error: I/O and numerical failures exit 1,
    /// everything traceable to the inputs exits 2.
    pub fn from_error(err: Error) -> Self {
        match err {
            Error::Io { .. } | Error::UnstableFilter(_) => CliError {
                code: 1,
                kind: "runtime",
                message: err.to_string(),
            },
            other => CliError::input(other),
        }
    }

    fn runtime(message: impl Into<String>) -> Self {
        CliError {
            code: 1,
            kind: "runtime",
            message: message.into(),
        }
    }

    /// `error=<kind> code=<n> message=<text>` on a single line.
    pub fn line(&self) -> String {
        let msg: String = self.message.split_whitespace().collect::<Vec<_>>().join(" ");
        format!("error={} code={} message={}", self.kind, self.code, msg)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.line())
    }
}

pub type CliResult<T = ()> = std::result::Result<T, CliError>;

/// Order used when analyzing against a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AnalysisOrder {
    /// The model's stored `k_default`.
    #[default]
    Model,
    /// All `r` components.
    Full,
    Fixed(usize),
}

/// Every tunable of the pipeline. Text form is one `key = value` per line;
/// `#` starts a comment.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunConfig {
    pub train: TrainConfig,
    pub analysis_order: AnalysisOrder,
    pub synth: SynthConfig,
    /// Explicit `synth.seed`; `None` (written `auto`) defers to the environment.
    pub seed: Option<u64>,
}

const KEYS: &[&str] = &[
    "envelope.order",
    "envelope.frame_ms",
    "envelope.hop_ms",
    "envelope.pre_emphasis",
    "pitch.f0_min",
    "pitch.f0_max",
    "pitch.hop_ms",
    "pitch.frame_ms",
    "pitch.voicing_threshold",
    "pitch.silence_db",
    "pitch.median_width",
    "gci.polarity",
    "gci.cog_periods",
    "gci.refine_periods",
    "gci.merge_periods",
    "train.bin_hz",
    "train.upper_mass",
    "train.k",
    "analysis.k",
    "synth.seed",
    "synth.unvoiced_gain",
    "synth.excitation",
];

impl RunConfig {
    pub fn analysis(&self) -> &AnalysisConfig {
        &self.train.analysis
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let mut cfg = RunConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::usage(format!("config line {}: expected key = value", lineno + 1)))?;
            cfg.set(key.trim(), value.trim())
                .map_err(|e| CliError::usage(format!("config line {}: {}", lineno + 1, e.message)))?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::input(Error::io(path, e)))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: &str) -> CliResult {
        let a = &mut self.train.analysis;
        match key {
            "envelope.order" => a.envelope.order = num(key, value)?,
            "envelope.frame_ms" => a.envelope.frame_len_ms = num(key, value)?,
            "envelope.hop_ms" => a.envelope.hop_ms = num(key, value)?,
            "envelope.pre_emphasis" => a.envelope.pre_emphasis = num(key, value)?,
            "pitch.f0_min" => a.pitch.f0_min = num(key, value)?,
            "pitch.f0_max" => a.pitch.f0_max = num(key, value)?,
            "pitch.hop_ms" => a.pitch.hop_ms = num(key, value)?,
            "pitch.frame_ms" => a.pitch.frame_ms = num(key, value)?,
            "pitch.voicing_threshold" => a.pitch.voicing_threshold = num(key, value)?,
            "pitch.silence_db" => a.pitch.silence_db = num(key, value)?,
            "pitch.median_width" => a.pitch.median_width = num(key, value)?,
            "gci.polarity" => {
                a.gci.polarity = match value {
                    "either" => GciPolarity::Either,
                    "negative" => GciPolarity::Negative,
                    "positive" => GciPolarity::Positive,
                    _ => return Err(bad_value(key, value, "either|negative|positive")),
                }
            }
            "gci.cog_periods" => a.gci.cog_periods = num(key, value)?,
            "gci.refine_periods" => a.gci.refine_periods = num(key, value)?,
            "gci.merge_periods" => a.gci.merge_periods = num(key, value)?,
            "train.bin_hz" => self.train.histogram_bin_hz = num(key, value)?,
            "train.upper_mass" => self.train.upper_mass = num(key, value)?,
            "train.k" => {
                self.train.k = match value {
                    "full" => KSelection::Full,
                    v if v.starts_with("threshold:") => KSelection::Threshold(num(key, &v["threshold:".len()..])?),
                    v => KSelection::Fixed(num(key, v).map_err(|_| bad_value(key, v, "threshold:<x>|full|<int>"))?),
                }
            }
            "analysis.k" => {
                self.analysis_order = match value {
                    "model" => AnalysisOrder::Model,
                    "full" => AnalysisOrder::Full,
                    v => AnalysisOrder::Fixed(num(key, v).map_err(|_| bad_value(key, v, "model|full|<int>"))?),
                }
            }
            "synth.seed" if value == "auto" => self.seed = None,
            "synth.seed" => {
                let seed = num(key, value)?;
                self.seed = Some(seed);
                self.synth.noise_seed = seed;
            }
            "synth.unvoiced_gain" => {
                self.synth.unvoiced_gain_mode = match value {
                    "analysis" => UnvoicedGainMode::Analysis,
                    "unit" => UnvoicedGainMode::Unit,
                    _ => return Err(bad_value(key, value, "analysis|unit")),
                }
            }
            "synth.excitation" => self.synth.excitation_kind = parse_excitation(value)?,
            _ => return Err(CliError::usage(format!("unknown config key '{key}'"))),
        }
        Ok(())
    }

    /// Effective configuration in the text form accepted by [`RunConfig::parse`].
    pub fn dump(&self) -> String {
        let a = &self.train.analysis;
        let mut s = String::new();
        let mut kv = |k: &str, v: String| writeln!(s, "{k} = {v}").unwrap();
        kv(KEYS[0], a.envelope.order.to_string());
        kv(KEYS[1], a.envelope.frame_len_ms.to_string());
        kv(KEYS[2], a.envelope.hop_ms.to_string());
        kv(KEYS[3], a.envelope.pre_emphasis.to_string());
        kv(KEYS[4], a.pitch.f0_min.to_string());
        kv(KEYS[5], a.pitch.f0_max.to_string());
        kv(KEYS[6], a.pitch.hop_ms.to_string());
        kv(KEYS[7], a.pitch.frame_ms.to_string());
        kv(KEYS[8], a.pitch.voicing_threshold.to_string());
        kv(KEYS[9], a.pitch.silence_db.to_string());
        kv(KEYS[10], a.pitch.median_width.to_string());
        let polarity = match a.gci.polarity {
            GciPolarity::Either => "either",
            GciPolarity::Negative => "negative",
            GciPolarity::Positive => "positive",
        };
        kv(KEYS[11], polarity.into());
        kv(KEYS[12], a.gci.cog_periods.to_string());
        kv(KEYS[13], a.gci.refine_periods.to_string());
        kv(KEYS[14], a.gci.merge_periods.to_string());
        kv(KEYS[15], self.train.histogram_bin_hz.to_string());
        kv(KEYS[16], self.train.upper_mass.to_string());
        let k = match self.train.k {
            KSelection::Threshold(t) => format!("threshold:{t}"),
            KSelection::Fixed(k) => k.to_string(),
            KSelection::Full => "full".into(),
        };
        kv(KEYS[17], k);
        let order = match self.analysis_order {
            AnalysisOrder::Model => "model".into(),
            AnalysisOrder::Full => "full".into(),
            AnalysisOrder::Fixed(k) => k.to_string(),
        };
        kv(KEYS[18], order);
        kv(KEYS[19], self.seed.map_or("auto".into(), |s| s.to_string()));
        let gain = match self.synth.unvoiced_gain_mode {
            UnvoicedGainMode::Analysis => "analysis",
            UnvoicedGainMode::Unit => "unit",
        };
        kv(KEYS[20], gain.into());
        kv(KEYS[21], excitation_name(self.synth.excitation_kind).into());
        s
    }

    /// Resolves the noise seed: explicit flag, then config, then the
    /// `EIGENRES_SEED` value, then 0.
    pub fn resolve_seed(&mut self, flag: Option<u64>, env: Option<&str>) -> CliResult {
        let env_seed = match env {
            Some(v) => Some(
                v.trim()
                    .parse::<u64>()
                    .map_err(|_| CliError::usage(format!("EIGENRES_SEED '{v}' is not an unsigned integer")))?,
            ),
            None => None,
        };
        let seed = flag.or(self.seed).or(env_seed).unwrap_or(0);
        self.seed = Some(seed);
        self.synth.noise_seed = seed;
        Ok(())
    }
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> CliResult<T> {
    value
        .parse()
        .map_err(|_| CliError::usage(format!("invalid value '{value}' for {key}")))
}

fn bad_value(key: &str, value: &str, expected: &str) -> CliError {
    CliError::usage(format!("invalid value '{value}' for {key} (expected {expected})"))
}

pub fn parse_excitation(value: &str) -> CliResult<ExcitationKind> {
    match value {
        "eigen" => Ok(ExcitationKind::Eigen),
        "pulse" => Ok(ExcitationKind::Pulse),
        _ => Err(bad_value("excitation", value, "eigen|pulse")),
    }
}

fn excitation_name(kind: ExcitationKind) -> &'static str {
    match kind {
        ExcitationKind::Eigen => "eigen",
        ExcitationKind::Pulse => "pulse",
    }
}

fn emit(out: &mut dyn Write, text: std::fmt::Arguments) -> CliResult {
    writeln!(out, "{text}").map_err(|e| CliError::runtime(format!("stdout: {e}")))
}

fn model_for_analysis(path: &Path, order: AnalysisOrder) -> CliResult<EigenModel> {
    let mut model = load_model(path).map_err(CliError::input)?;
    let k = match order {
        AnalysisOrder::Model => model.k_default(),
        AnalysisOrder::Full => model.r(),
        AnalysisOrder::Fixed(k) => k,
    };
    model.set_k_default(k).map_err(CliError::input)?;
    Ok(model)
}

fn create_dir(dir: &Path) -> CliResult {
    fs::create_dir_all(dir).map_err(|e| CliError::from_error(Error::io(dir, e)))
}

fn write_file(path: &Path, bytes: &[u8]) -> CliResult {
    fs::write(path, bytes).map_err(|e| CliError::from_error(Error::io(path, e)))
}

/// WAV files directly inside `dir`, sorted by file name.
pub fn list_wavs(dir: &Path) -> CliResult<Vec<PathBuf>> {
    let entries = fs::read_dir(dir).map_err(|e| CliError::input(Error::io(dir, e)))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x.eq_ignore_ascii_case("wav")))
        .collect();
    files.sort();
    Ok(files)
}

/// Trains a model on every WAV in `corpus_dir`; unreadable files are skipped
/// with a warning.
pub fn cmd_train(corpus_dir: &Path, out_model: &Path, cfg: &RunConfig, out: &mut dyn Write) -> CliResult {
    let files = list_wavs(corpus_dir)?;
    let mut signals: Vec<Signal> = Vec::new();
    let mut unreadable = 0;
    for f in &files {
        match read_wav(f) {
            Ok(s) => signals.push(s),
            Err(e) => {
                unreadable += 1;
                log::warn!("skipping {}: {e}", f.display());
            }
        }
    }
    if let Some(first) = signals.first() {
        let sr = first.sample_rate();
        let before = signals.len();
        signals.retain(|s| s.sample_rate() == sr);
        if signals.len() < before {
            log::warn!("skipping {} files not at {sr} Hz", before - signals.len());
            unreadable += before - signals.len();
        }
    }
    let (model, report) = train_model(&signals, &cfg.train).map_err(CliError::from_error)?;
    save_model(&model, out_model).map_err(CliError::from_error)?;

    emit(out, format_args!("files={} skipped_files={unreadable}", files.len()))?;
    emit(out, format_args!("{}", report.summary()))?;
    emit(out, format_args!("skipped_frames={}", report.skipped))?;
    let rows = report.information_rate.len().min(2 * report.k.max(10) + 1);
    for (k, rate) in report.information_rate.iter().enumerate().take(rows).skip(1) {
        emit(out, format_args!("I({k})={rate:.6}"))?;
    }
    Ok(())
}

/// Writes a parameter track for `wav` (and `<track>.csv` when asked).
pub fn cmd_analyze(
    wav: &Path,
    model: &Path,
    out_track: &Path,
    csv: bool,
    cfg: &RunConfig,
    out: &mut dyn Write,
) -> CliResult {
    let model = model_for_analysis(model, cfg.analysis_order)?;
    let signal = read_wav(wav).map_err(CliError::input)?;
    let track = analyze_utterance(&signal, &model, cfg.analysis()).map_err(CliError::from_error)?;
    write_file(out_track, &track.to_bytes())?;
    if csv {
        let path = out_track.with_extension("csv");
        let mut buf = Vec::new();
        track.write_csv(&mut buf).expect("in-memory write");
        write_file(&path, &buf)?;
    }
    emit(
        out,
        format_args!(
            "records={} unvoiced_segments={} k={}",
            track.voiced.len(),
            track.unvoiced.len(),
            track.k
        ),
    )
}

/// Renders a track to a WAV; the model is required for eigen excitation.
pub fn cmd_synth(
    track: &Path,
    model: Option<&Path>,
    out_wav: &Path,
    cfg: &RunConfig,
    out: &mut dyn Write,
) -> CliResult {
    let model = match (cfg.synth.excitation_kind, model) {
        (ExcitationKind::Eigen, None) => return Err(CliError::usage("--model is required for eigen excitation")),
        (_, Some(p)) => Some(load_model(p).map_err(CliError::input)?),
        (_, None) => None,
    };
    let track = ParameterTrack::load(track).map_err(CliError::input)?;
    let synthesis = synthesize(&track, model.as_ref(), &cfg.synth).map_err(CliError::from_error)?;
    write_wav(&synthesis.signal, out_wav).map_err(CliError::from_error)?;
    emit(
        out,
        format_args!(
            "samples={} excitation={} normalized={}",
            synthesis.signal.len(),
            excitation_name(cfg.synth.excitation_kind),
            synthesis.normalized
        ),
    )
}

/// Copy-synthesis with both excitations; writes `<stem>_eigen.wav` and
/// `<stem>_pulse.wav` and reports their log-spectral distortion.
pub fn cmd_copysynth(wav: &Path, model: &Path, out_dir: &Path, cfg: &RunConfig, out: &mut dyn Write) -> CliResult {
    let model = model_for_analysis(model, cfg.analysis_order)?;
    let signal = read_wav(wav).map_err(CliError::input)?;
    let (lsd_eigen, lsd_pulse, outputs) = copy_synthesis(&signal, &model, cfg).map_err(CliError::from_error)?;
    create_dir(out_dir)?;
    let stem = wav.file_stem().and_then(|s| s.to_str()).unwrap_or("utterance");
    for (name, sig) in [("eigen", &outputs[0]), ("pulse", &outputs[1])] {
        write_wav(sig, out_dir.join(format!("{stem}_{name}.wav"))).map_err(CliError::from_error)?;
    }
    let winner = if lsd_eigen < lsd_pulse { "eigen" } else { "pulse" };
    emit(
        out,
        format_args!("file={stem} lsd_eigen={lsd_eigen:.4} lsd_pulse={lsd_pulse:.4} winner={winner}"),
    )
}

/// Analysis, eigen and pulse synthesis, and LSD of both against the input
/// over the frames the F0 tracker marks voiced.
pub fn copy_synthesis(signal: &Signal, model: &EigenModel, cfg: &RunConfig) -> crate::Result<(f64, f64, [Signal; 2])> {
    let track = analyze_utterance(signal, model, cfg.analysis())?;
    let eigen = SynthConfig {
        excitation_kind: ExcitationKind::Eigen,
        ..cfg.synth.clone()
    };
    let pulse = SynthConfig {
        excitation_kind: ExcitationKind::Pulse,
        ..cfg.synth.clone()
    };
    let se = synthesize(&track, Some(model), &eigen)?.signal;
    let sp = synthesize(&track, Some(model), &pulse)?.signal;
    let mask = track_f0(signal, &cfg.analysis().pitch)?.voiced_mask(signal.len());
    let le = log_spectral_distortion(signal, &se, &mask)?;
    let lp = log_spectral_distortion(signal, &sp, &mask)?;
    Ok((le, lp, [se, sp]))
}

/// Plot data for a model: `ik_curve.csv`, `eigenresidual_<i>.csv` for
/// `i = 1..=k_default`, and `summary.txt`.
pub fn cmd_inspect(model: &Path, out_dir: &Path, out: &mut dyn Write) -> CliResult {
    let model = load_model(model).map_err(CliError::input)?;
    create_dir(out_dir)?;
    let mut buf = Vec::new();
    information_rate_csv(&model, &mut buf).expect("in-memory write");
    write_file(&out_dir.join("ik_curve.csv"), &buf)?;
    for i in 0..model.k_default() {
        let mut buf = Vec::new();
        write_eigenresidual_csv(&model, i, &mut buf).expect("in-memory write");
        write_file(&out_dir.join(format!("eigenresidual_{}.csv", i + 1)), &buf)?;
    }
    let summary = format!(
        "m={} r={} f0_star={:.4}\nk_default={} sample_rate={}\n",
        model.m(),
        model.r(),
        model.f0_star,
        model.k_default(),
        model.sample_rate
    );
    write_file(&out_dir.join("summary.txt"), summary.as_bytes())?;
    emit(out, format_args!("{}", summary.trim_end()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dump_parse_round_trip() {
        let mut cfg = RunConfig::default();
        assert_eq!(RunConfig::parse(&cfg.dump()).unwrap().dump(), cfg.dump());
        cfg.set("envelope.order", "18").unwrap();
        cfg.set("gci.polarity", "negative").unwrap();
        cfg.set("train.k", "full").unwrap();
        cfg.set("analysis.k", "12").unwrap();
        cfg.set("synth.seed", "77").unwrap();
        cfg.set("synth.excitation", "pulse").unwrap();
        cfg.set("pitch.f0_min", "62.5").unwrap();
        let back = RunConfig::parse(&cfg.dump()).unwrap();
        assert_eq!(back, cfg);
        let mut t = RunConfig::default();
        t.set("train.k", "threshold:0.9").unwrap();
        assert_eq!(RunConfig::parse(&t.dump()).unwrap(), t);
    }

    #[test]
    fn every_key_is_dumped() {
        let dump = RunConfig::default().dump();
        for key in KEYS {
            assert!(dump.lines().any(|l| l.starts_with(&format!("{key} = "))), "{key}");
        }
        assert_eq!(dump.lines().count(), KEYS.len());
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        let err = RunConfig::parse("envelope.order = 20\nbogus = 1\n").unwrap_err();
        assert_eq!(err.code, 2);
        assert!(err.message.contains("line 2") && err.message.contains("unknown config key 'bogus'"));
        assert!(RunConfig::parse("envelope.order = twelve").is_err());
        assert!(RunConfig::parse("gci.polarity = sideways").is_err());
        assert!(RunConfig::parse("no equals sign").is_err());
        let ok = RunConfig::parse("# comment\n\n pitch.f0_max = 300 # trailing\n").unwrap();
        assert_eq!(ok.analysis().pitch.f0_max, 300.0);
    }

    #[test]
    fn seed_precedence() {
        let mut cfg = RunConfig::default();
        cfg.resolve_seed(None, Some("5")).unwrap();
        assert_eq!(cfg.synth.noise_seed, 5);
        let mut cfg = RunConfig::parse("synth.seed = 9").unwrap();
        cfg.resolve_seed(None, Some("5")).unwrap();
        assert_eq!(cfg.synth.noise_seed, 9);
        cfg.resolve_seed(Some(1), Some("5")).unwrap();
        assert_eq!(cfg.synth.noise_seed, 1);
        assert!(RunConfig::default().resolve_seed(None, Some("x")).is_err());
        let mut cfg = RunConfig::default();
        cfg.resolve_seed(None, None).unwrap();
        assert_eq!(cfg.synth.noise_seed, 0);
    }

    #[test]
    fn error_lines_are_single_line() {
        let e = CliError::from_error(Error::InvalidArgument("two\nlines".into()));
        assert_eq!(e.line(), "error=input code=2 message=invalid argument: two lines");
        let e = CliError::from_error(Error::UnstableFilter(3));
        assert_eq!(e.code, 1);
    }
}
