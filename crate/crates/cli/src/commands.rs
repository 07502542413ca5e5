use std::fmt::Write as _;
use std::fs::{self, File};
use std::path::Path;

use medge_core::benchmark::{run_modality_benchmark, BenchConfig};
use medge_core::ffc::{
    cross_validate, eval_gamma_sweep, fit_bounds, gamma_grid, normalize, train_gamma, ClassifierKind, FfcModel,
    LabeledFeatures, Status,
};
use medge_core::sae::{init_sae, pooled_prd, train_standardized, DecoderPart, EncoderPart, TrainConfig};
use medge_core::signal::{
    gen_synthetic_eeg, gen_synthetic_multimodal, load_bonn_dir, write_bonn_dir, Label, Modality, MultimodalSet,
    RecordSet, MULTIMODAL_RATE_HZ,
};
use medge_core::sim::{
    continuous_duty, project_lifetime, simulate, vectorize, EdgeConfig, EmergencyPayload, EnergyParams, Transport,
};
use medge_core::spectral::{read_feature_table, window_features, write_feature_table, Band, FeatureRow};
use serde::Serialize;

use crate::args::*;
use crate::error::{CliError, Result};
use crate::manifest::{digest_path, InputDigest, Outputs, RunManifest};

/// Executes `command`, writes its artifacts and manifest under `out`.
pub fn run(command: &Command, seed: u64, out: &Path) -> Result<RunManifest> {
    let mut outputs = Outputs::new(out)?;
    let inputs = match command {
        Command::GenData(a) => gen_data(a, seed, &mut outputs)?,
        Command::Features(a) => features(a, seed, &mut outputs)?,
        Command::TrainFfc(a) => train_ffc(a, &mut outputs)?,
        Command::SweepGamma(a) => sweep_gamma(a, seed, &mut outputs)?,
        Command::CrossValidate(a) => cross_validate_cmd(a, seed, &mut outputs)?,
        Command::TrainSae(a) => train_sae_cmd(a, seed, &mut outputs)?,
        Command::BenchCompression(a) => bench(a, seed, &mut outputs)?,
        Command::Encode(a) => encode(a, &mut outputs)?,
        Command::Decode(a) => decode(a, &mut outputs)?,
        Command::Simulate(a) => simulate_cmd(a, seed, &mut outputs)?,
        Command::Replay(a) => return replay(a, out),
    };
    outputs.finish(command, seed, inputs)
}

fn input(path: &Path) -> Result<InputDigest> {
    Ok(InputDigest {
        path: path.to_path_buf(),
        sha256: digest_path(path)?,
    })
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| CliError::io(path, e))
}

fn load_records(args: &RecordArgs, seed: u64) -> Result<(RecordSet, Vec<InputDigest>)> {
    if args.normal.is_empty() && args.seizure.is_empty() {
        return Ok((
            gen_synthetic_eeg(args.n_per_class, args.len, args.rate, seed)?,
            Vec::new(),
        ));
    }
    let mut sets = Vec::new();
    let mut inputs = Vec::new();
    for (dirs, label) in [(&args.normal, Label::Normal), (&args.seizure, Label::Seizure)] {
        for dir in dirs {
            sets.push(load_bonn_dir(dir, label, args.rate)?);
            inputs.push(input(dir)?);
        }
    }
    Ok((RecordSet::concat("records", sets)?, inputs))
}

fn feature_rows(set: &RecordSet, band: Band) -> Result<Vec<FeatureRow>> {
    set.records()
        .iter()
        .map(|r| {
            Ok(FeatureRow {
                source_id: r.source_id().to_string(),
                label: r.label(),
                features: window_features(&r.as_window()?, band)?,
            })
        })
        .collect()
}

fn load_features(path: &Path, band: Band) -> Result<(Vec<LabeledFeatures>, InputDigest)> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let rows = read_feature_table(file, band).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let set = LabeledFeatures::from_rows(rows.into_iter().map(|r| (r.features, r.label)))?;
    Ok((set, input(path)?))
}

fn fit_ffc(set: &[LabeledFeatures], grid_step: f64) -> Result<(FfcModel, f64)> {
    let feats: Vec<_> = set.iter().map(|s| s.features).collect();
    let bounds = fit_bounds(&feats)?;
    let samples: Vec<_> = set
        .iter()
        .map(|s| (normalize(&s.features, &bounds), s.status))
        .collect();
    let model = train_gamma(&samples, grid_step, bounds)?;
    let accuracy = medge_core::ffc::threshold_accuracy(&samples, model.gamma);
    Ok((model, accuracy))
}

fn csv_rows(rows: &[Vec<f64>]) -> String {
    let mut out = String::new();
    for row in rows {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

fn parse_csv_rows(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text =
        String::from_utf8(read_file(path)?).map_err(|_| CliError::Data(format!("{}: not UTF-8", path.display())))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            line.split(',')
                .map(|v| {
                    v.trim().parse::<f64>().map_err(|_| {
                        CliError::Data(format!(
                            "{} line {}: cannot parse {:?}",
                            path.display(),
                            i + 1,
                            v.trim()
                        ))
                    })
                })
                .collect()
        })
        .collect()
}

fn gen_data(a: &GenDataArgs, seed: u64, out: &mut Outputs) -> Result<Vec<InputDigest>> {
    match a.kind {
        DataKind::Eeg => {
            let r = &a.records;
            let set = gen_synthetic_eeg(r.n_per_class, r.len, r.rate, seed)?;
            let mut groups: Vec<(String, Vec<_>)> = Vec::new();
            for rec in set.records() {
                let class: String = rec.source_id().chars().take(1).collect();
                match groups.iter_mut().find(|(c, _)| *c == class) {
                    Some((_, recs)) => recs.push(rec.clone()),
                    None => groups.push((class, vec![rec.clone()])),
                }
            }
            for (class, recs) in &groups {
                write_bonn_dir(out.dir().join(class), recs)?;
                for rec in recs {
                    out.register(&format!("{class}/{}.txt", rec.source_id()))?;
                }
                println!("{}: {} records ({})", class, recs.len(), recs[0].label());
            }
        }
        DataKind::Multimodal => {
            let m = &a.multimodal;
            let mm = gen_synthetic_multimodal(m.records, m.segment_len, m.cross_gain, m.noise_sd, seed)?;
            for modality in mm.modalities() {
                out.write(&format!("{}.csv", modality.name), csv_rows(&modality.data).as_bytes())?;
            }
            println!("{} records of {} samples per modality", mm.n_records(), mm.record_len());
        }
    }
    Ok(Vec::new())
}

fn features(a: &FeaturesArgs, seed: u64, out: &mut Outputs) -> Result<Vec<InputDigest>> {
    let (set, inputs) = load_records(&a.records, seed)?;
    let rows = feature_rows(&set, a.band.band())?;
    out.write("features.csv", write_feature_table(&rows).as_bytes())?;
    println!("{} feature rows", rows.len());
    Ok(inputs)
}

#[derive(Serialize)]
struct FfcSummary<'a> {
    model: &'a FfcModel,
    training_accuracy: f64,
    records: usize,
}

fn train_ffc(a: &TrainFfcArgs, out: &mut Outputs) -> Result<Vec<InputDigest>> {
    let (set, digest) = load_features(&a.features, a.band.band())?;
    let (model, accuracy) = fit_ffc(&set, a.grid_step)?;
    out.write_json("ffc_model.json", &model)?;
    out.write_json(
        "ffc_summary.json",
        &FfcSummary {
            model: &model,
            training_accuracy: accuracy,
            records: set.len(),
        },
    )?;
    println!("gamma = {} (training accuracy {:.4})", model.gamma, accuracy);
    Ok(vec![digest])
}

#[derive(Serialize)]
struct SweepReport {
    folds: usize,
    points: Vec<medge_core::ffc::SweepPoint>,
    knn: f64,
    gnb: f64,
    peak_gamma: f64,
    peak_accuracy: f64,
}

fn sweep_gamma(a: &SweepGammaArgs, seed: u64, out: &mut Outputs) -> Result<Vec<InputDigest>> {
    let (set, digest) = load_features(&a.features, a.band.band())?;
    let grid = gamma_grid(a.step)?;
    let points = eval_gamma_sweep(&set, a.folds, &grid, seed)?;
    let knn = cross_validate(&set, a.folds, ClassifierKind::Knn { neighbors: a.knn_k }, seed)?.mean_accuracy;
    let gnb = cross_validate(&set, a.folds, ClassifierKind::Gnb, seed)?.mean_accuracy;
    let mut csv = String::from("gamma,ffc,knn,gnb\n");
    for p in &points {
        let _ = writeln!(csv, "{:.4},{:.6},{:.6},{:.6}", p.gamma, p.accuracy, knn, gnb);
    }
    let peak = points
        .iter()
        .fold(points[0], |best, p| if p.accuracy > best.accuracy { *p } else { best });
    out.write("sweep.csv", csv.as_bytes())?;
    out.write_json(
        "sweep.json",
        &SweepReport {
            folds: a.folds,
            points,
            knn,
            gnb,
            peak_gamma: peak.gamma,
            peak_accuracy: peak.accuracy,
        },
    )?;
    println!(
        "peak accuracy {:.4} at gamma {}; knn {:.4}; gnb {:.4}",
        peak.accuracy, peak.gamma, knn, gnb
    );
    Ok(vec![digest])
}

fn cross_validate_cmd(a: &CrossValidateArgs, seed: u64, out: &mut Outputs) -> Result<Vec<InputDigest>> {
    let (set, digest) = load_features(&a.features, a.band.band())?;
    let kind = match a.classifier {
        ClassifierArg::Ffc => ClassifierKind::Ffc { grid_step: a.grid_step },
        ClassifierArg::Fixed => ClassifierKind::FixedGamma { gamma: a.gamma },
        ClassifierArg::Knn => ClassifierKind::Knn { neighbors: a.knn_k },
        ClassifierArg::Gnb => ClassifierKind::Gnb,
    };
    let report = cross_validate(&set, a.folds, kind, seed)?;
    out.write("cv.csv", report.to_csv().as_bytes())?;
    out.write_json("cv.json", &report)?;
    println!(
        "{}: mean accuracy {:.4} over {} folds",
        report.classifier, report.mean_accuracy, a.folds
    );
    Ok(vec![digest])
}

fn train_config(t: &TrainArgs, seed: u64) -> TrainConfig {
    TrainConfig {
        learning_rate: t.lr,
        epochs: t.epochs,
        batch_size: t.batch_size,
        seed,
        weight_init_scale: t.init_scale,
    }
}

#[derive(Serialize)]
struct SaeSummary {
    sizes: Vec<usize>,
    fingerprint: String,
    records: usize,
    training_prd: f64,
    final_loss: f64,
}

fn train_sae_cmd(a: &TrainSaeArgs, seed: u64, out: &mut Outputs) -> Result<Vec<InputDigest>> {
    let (set, inputs) = load_records(&a.records, seed)?;
    let d0 = *a.sizes.first().ok_or_else(|| CliError::Usage("empty --sizes".into()))?;
    if let Some(r) = set.records().iter().find(|r| r.len() < d0) {
        return Err(CliError::Usage(format!(
            "record {} has {} samples, fewer than the input size {d0}",
            r.source_id(),
            r.len()
        )));
    }
    let data: Vec<Vec<f64>> = set.records().iter().map(|r| vectorize(r.samples(), d0)).collect();
    let model = init_sae(&a.sizes, a.train.activation.into(), seed, a.train.init_scale)?;
    let (trained, history) = train_standardized(&model, &data, &train_config(&a.train, seed))?;
    let recon: Vec<Vec<f64>> = data
        .iter()
        .map(|x| trained.reconstruct(x))
        .collect::<std::result::Result<_, _>>()?;
    let prd = pooled_prd(&data, &recon)?;
    let (enc, dec) = trained.split();
    out.write("sae.bin", &trained.to_bytes())?;
    out.write("encoder.bin", &enc.to_bytes())?;
    out.write("decoder.bin", &dec.to_bytes())?;
    let mut loss = String::from("epoch,loss\n");
    for (i, l) in history.iter().enumerate() {
        let _ = writeln!(loss, "{i},{l:.12e}");
    }
    out.write("loss.csv", loss.as_bytes())?;
    out.write_json(
        "sae_summary.json",
        &SaeSummary {
            sizes: a.sizes.clone(),
            fingerprint: format!("{:016x}", trained.fingerprint()),
            records: data.len(),
            training_prd: prd,
            final_loss: *history.last().unwrap_or(&f64::NAN),
        },
    )?;
    println!(
        "trained {:?}: training PRD {:.3}%, fingerprint {:016x}",
        a.sizes,
        prd,
        trained.fingerprint()
    );
    Ok(inputs)
}

fn load_multimodal(m: &MultimodalArgs, seed: u64) -> Result<(MultimodalSet, Vec<InputDigest>)> {
    let Some(dir) = &m.mm_dir else {
        return Ok((
            gen_synthetic_multimodal(m.records, m.segment_len, m.cross_gain, m.noise_sd, seed)?,
            Vec::new(),
        ));
    };
    let mut modalities = Vec::new();
    let mut inputs = Vec::new();
    for name in ["EEG", "EOG"] {
        let path = dir.join(format!("{name}.csv"));
        modalities.push(Modality {
            name: name.into(),
            data: parse_csv_rows(&path)?,
        });
        inputs.push(input(&path)?);
    }
    Ok((MultimodalSet::new(modalities, MULTIMODAL_RATE_HZ)?, inputs))
}

fn bench(a: &BenchArgs, seed: u64, out: &mut Outputs) -> Result<Vec<InputDigest>> {
    let (mm, inputs) = load_multimodal(&a.multimodal, seed)?;
    let cfg = BenchConfig {
        train: train_config(&a.train, seed),
        activation: a.train.activation.into(),
        train_fraction: a.train_fraction,
        hidden_layer: a.hidden_layer,
    };
    let table = run_modality_benchmark(&mm, &a.crs, &cfg)?;
    out.write("bench.csv", table.to_csv().as_bytes())?;
    out.write_json("bench.json", &table)?;
    print!("{}", table.to_csv());
    Ok(inputs)
}

fn encode(a: &EncodeArgs, out: &mut Outputs) -> Result<Vec<InputDigest>> {
    let enc = EncoderPart::from_bytes(&read_file(&a.encoder)?)?;
    let rows = parse_csv_rows(&a.input)?;
    let codes: Vec<Vec<f64>> = rows
        .iter()
        .map(|x| enc.encode(x))
        .collect::<std::result::Result<_, _>>()?;
    out.write("codes.csv", csv_rows(&codes).as_bytes())?;
    println!("encoded {} vectors to {} values each", codes.len(), enc.code_dim());
    Ok(vec![input(&a.encoder)?, input(&a.input)?])
}

fn decode(a: &DecodeArgs, out: &mut Outputs) -> Result<Vec<InputDigest>> {
    let dec = DecoderPart::from_bytes(&read_file(&a.decoder)?)?;
    let rows = parse_csv_rows(&a.input)?;
    let recon: Vec<Vec<f64>> = rows
        .iter()
        .map(|z| dec.decode(z))
        .collect::<std::result::Result<_, _>>()?;
    out.write("reconstruction.csv", csv_rows(&recon).as_bytes())?;
    println!("decoded {} codes to {} values each", recon.len(), dec.output_dim());
    Ok(vec![input(&a.decoder)?, input(&a.input)?])
}

#[derive(Serialize)]
struct Lifetime {
    duty_records_per_hour: f64,
    hours: f64,
    energy: EnergyParams,
}

fn simulate_cmd(a: &SimulateArgs, seed: u64, out: &mut Outputs) -> Result<Vec<InputDigest>> {
    let (set, mut inputs) = load_records(&a.records, seed)?;
    let energy = EnergyParams {
        tx_j_per_byte: a.tx_j_per_byte,
        cpu_j_per_flop: a.cpu_j_per_flop,
        idle_w: a.idle_w,
        battery_j: a.battery_j,
    };
    let band = a.band.band();
    let mut cfg = match a.mode {
        ModeArg::Cbs => EdgeConfig::cbs(),
        ModeArg::Cdt => {
            let model = match &a.ffc_model {
                Some(path) => {
                    inputs.push(input(path)?);
                    serde_json::from_slice(&read_file(path)?)?
                }
                None => {
                    let rows = feature_rows(&set, band)?;
                    let labeled = LabeledFeatures::from_rows(rows.into_iter().map(|r| (r.features, r.label)))?;
                    fit_ffc(&labeled, a.grid_step)?.0
                }
            };
            EdgeConfig::cdt(model)
        }
    };
    cfg.band = band;
    cfg.energy = energy;
    cfg.patient_id = a.patient_id;
    cfg.link_bps = a.link_bps;
    cfg.clock_origin_ms = a.clock_origin_ms;
    let mut decoder = None;
    if a.payload == PayloadArg::Compressed {
        cfg.emergency_payload = EmergencyPayload::Compressed;
        let enc_path = a
            .encoder
            .as_ref()
            .ok_or_else(|| CliError::Usage("--payload compressed needs --encoder".into()))?;
        let dec_path = a
            .decoder
            .as_ref()
            .ok_or_else(|| CliError::Usage("--payload compressed needs --decoder".into()))?;
        let enc = EncoderPart::from_bytes(&read_file(enc_path)?)?;
        let dec = DecoderPart::from_bytes(&read_file(dec_path)?)?;
        if enc.fingerprint() != dec.fingerprint() {
            return Err(CliError::Protocol(format!(
                "encoder fingerprint {:016x} does not match decoder {:016x}",
                enc.fingerprint(),
                dec.fingerprint()
            )));
        }
        inputs.push(input(enc_path)?);
        inputs.push(input(dec_path)?);
        cfg.encoder = Some(enc);
        decoder = Some(dec);
    }
    let transport = match a.transport {
        TransportArg::Memory => Transport::Memory,
        TransportArg::Tcp => Transport::Tcp,
    };
    let outcome = simulate(&set, &cfg, decoder.as_ref(), Some(&set), transport)?;
    let duty = a.duty.unwrap_or_else(|| continuous_duty(&set));
    let hours = project_lifetime(&outcome.log, &energy, duty)?;
    out.write("stream.bin", &outcome.stream)?;
    out.write_json("log.json", &outcome.log)?;
    out.write_json("report.json", &outcome.report)?;
    out.write_json(
        "lifetime.json",
        &Lifetime {
            duty_records_per_hour: duty,
            hours,
            energy,
        },
    )?;
    let seizures = outcome
        .log
        .entries
        .iter()
        .filter(|e| e.status == Some(Status::Seizure))
        .count();
    println!(
        "{:?}: {} records, {} classified seizure, {} bytes, {:.3} J, lifetime {:.2} h",
        cfg.mode,
        set.len(),
        seizures,
        outcome.log.total_bytes,
        outcome.log.energy_j,
        hours
    );
    Ok(inputs)
}

fn replay(a: &ReplayArgs, out: &Path) -> Result<RunManifest> {
    let manifest = RunManifest::load(&a.manifest)?;
    if let Command::Replay(_) = manifest.config {
        return Err(CliError::Usage("cannot replay a replay".into()));
    }
    for inp in &manifest.inputs {
        let now = digest_path(&inp.path)?;
        if now != inp.sha256 {
            return Err(CliError::Data(format!(
                "input {} changed since the recorded run",
                inp.path.display()
            )));
        }
    }
    let rerun = run(&manifest.config, manifest.seed, out)?;
    let differing: Vec<&String> = manifest
        .artifacts
        .iter()
        .filter(|(name, digest)| rerun.artifacts.get(*name) != Some(*digest))
        .map(|(name, _)| name)
        .chain(rerun.artifacts.keys().filter(|k| !manifest.artifacts.contains_key(*k)))
        .collect();
    if !differing.is_empty() {
        return Err(CliError::Protocol(format!("replay outputs differ: {differing:?}")));
    }
    println!(
        "replay of {} reproduced {} artifacts byte-for-byte in {}",
        manifest.command,
        rerun.artifacts.len(),
        out.display()
    );
    Ok(rerun)
}
