use std::fs;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use gec_combine::combine::{holdout_split, PairTraining};
use gec_combine::spellcheck::{self, FrequencyModel};
use gec_combine::synth::{self, ErrorDistribution, Pool};
use gec_combine::{
    apply_policy, combine_iterative, extract_edits, filter_system, parse_m2, replay_iterative,
    score_corpus, tokenize, train_pair, write_m2, AnnotatedSentence, CorpusScore, EditTyper,
    M2Corpus, SelectionPolicy, SystemOutput, Token,
};
use serde_json::json;

use crate::{Command, RunArgs, SpellCommand, SynthCommand};

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Extract { orig, corrected, output, dict } => {
            extract(&orig, &corrected, &output, dict.as_deref())
        }
        Command::TrainPolicy { sys_a, sys_b, gold, output, holdout, run } => {
            train_policy(&sys_a, &sys_b, &gold, &output, holdout, &run)
        }
        Command::ApplyPolicy { sys_a, sys_b, policy, output, seed } => {
            let a = system(&sys_a)?;
            let b = system(&sys_b)?;
            let policy = load_policy(&policy)?;
            let merged = apply_policy(&a, &b, &policy, seed)?;
            write(&output, &write_m2(&merged))
        }
        Command::Combine { systems, gold, policies, policy_prefix, output, run } => {
            combine(&systems, gold.as_deref(), &policies, policy_prefix.as_deref(), &output, &run)
        }
        Command::Filter { sys, gold, output, policy_out, run } => {
            let a = system(&sys)?;
            let gold_corpus = read_m2(&gold)?;
            let t = filter_system(&a, &gold_corpus, &run.config(&display_name(&gold)))?;
            write(&output, &write_m2(&t.output.corpus))?;
            if let Some(p) = policy_out {
                write(&p, &t.policy.to_json())?;
            }
            report_training(&t, "filtered", run.json);
            Ok(())
        }
        Command::Score { hyp, reference, beta, annotator, json } => {
            let score = score_corpus(&read_m2(&hyp)?, &read_m2(&reference)?, beta, annotator)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&score.to_json())?);
            } else {
                print!("{}", score.render_table());
            }
            Ok(())
        }
        Command::Apply { m2, annotator, output } => {
            let corpus = read_m2(&m2)?;
            write(&output, &join_lines(&corpus.corrected(annotator)))
        }
        Command::Spell(cmd) => spell(cmd),
        Command::Synth(cmd) => synth_command(cmd),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write(path: &Path, content: &str) -> Result<()> {
    fs::write(path, content).with_context(|| format!("cannot write {}", path.display()))
}

fn read_m2(path: &Path) -> Result<M2Corpus> {
    parse_m2(&read(path)?).with_context(|| format!("invalid M2 file {}", path.display()))
}

fn display_name(path: &Path) -> String {
    path.file_name()
        .map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned())
}

fn system(path: &Path) -> Result<SystemOutput> {
    Ok(SystemOutput::new(display_name(path), &read_m2(path)?))
}

fn load_policy(path: &Path) -> Result<SelectionPolicy> {
    SelectionPolicy::from_json(&read(path)?)
        .with_context(|| format!("invalid policy {}", path.display()))
}

fn join_lines(sentences: &[Vec<Token>]) -> String {
    let mut out = String::new();
    for s in sentences {
        for (i, t) in s.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            out.push_str(t);
        }
        out.push('\n');
    }
    out
}

fn extract(orig: &Path, corrected: &Path, output: &Path, dict: Option<&Path>) -> Result<()> {
    let src = read(orig)?;
    let trg = read(corrected)?;
    let (src, trg): (Vec<&str>, Vec<&str>) = (src.lines().collect(), trg.lines().collect());
    if src.len() != trg.len() {
        bail!(
            "{} has {} lines but {} has {}",
            orig.display(),
            src.len(),
            corrected.display(),
            trg.len()
        );
    }
    let typer = match dict {
        Some(p) => EditTyper::with_dictionary(spellcheck::parse_dictionary(&read(p)?)),
        None => EditTyper::new(),
    };
    let pairs: Vec<(&str, &str)> = src.into_iter().zip(trg).collect();
    let sentences = gec_combine::par::try_map_indexed(&pairs, |_, (s, t)| {
        let (s, t) = (tokenize(s), tokenize(t));
        let edits = extract_edits(&s, &t, &typer);
        AnnotatedSentence::new(s, edits)
    })?;
    write(output, &write_m2(&M2Corpus::new(sentences)))
}

fn score_json(s: &CorpusScore) -> serde_json::Value {
    let o = &s.overall;
    json!({
        "tp": o.counts.tp,
        "fp": o.counts.fp,
        "fn": o.counts.fn_,
        "precision": o.score.precision,
        "recall": o.score.recall,
        "f": o.score.f_beta,
    })
}

fn score_rows(rows: &[(&str, &CorpusScore)]) -> String {
    let beta = rows.first().map_or(0.5, |(_, s)| s.overall.score.beta);
    let mut out = format!(
        "{:<10} {:>7} {:>7} {:>7}\n",
        "SYSTEM",
        "P",
        "R",
        format!("F{beta}")
    );
    for (name, s) in rows {
        let o = &s.overall.score;
        out.push_str(&format!(
            "{:<10} {:>7.4} {:>7.4} {:>7.4}\n",
            name, o.precision, o.recall, o.f_beta
        ));
    }
    out
}

fn dominates(t: &PairTraining) -> bool {
    t.score_combined.f_beta() >= t.score_a.f_beta().max(t.score_b.f_beta()) - 1e-9
}

fn training_json(t: &PairTraining, label: &str) -> serde_json::Value {
    json!({
        "a": score_json(&t.score_a),
        "b": score_json(&t.score_b),
        label: score_json(&t.score_combined),
        "selection": t.policy.metadata.created.selection,
        "objective_f": t.policy.metadata.created.objective_f,
        "dominates": dominates(t),
    })
}

fn report_training(t: &PairTraining, label: &str, as_json: bool) {
    if as_json {
        println!("{}", serde_json::to_string_pretty(&training_json(t, label)).expect("plain data"));
        return;
    }
    println!("dev set:");
    print!(
        "{}",
        score_rows(&[("A", &t.score_a), ("B", &t.score_b), (label, &t.score_combined)])
    );
    let kept = t.policy.entries.iter().filter(|e| e.s > 0.0).count();
    println!(
        "policy: {kept}/{} cells kept, selection {}",
        t.policy.entries.len(),
        t.policy.metadata.created.selection
    );
    println!(
        "{label} F >= max(F_A, F_B): {}",
        if dominates(t) { "yes" } else { "NO" }
    );
}

fn train_policy(
    sys_a: &Path,
    sys_b: &Path,
    gold: &Path,
    output: &Path,
    holdout: Option<f64>,
    run: &RunArgs,
) -> Result<()> {
    let a = system(sys_a)?;
    let b = system(sys_b)?;
    let gold_corpus = read_m2(gold)?;
    let cfg = run.config(&display_name(gold));
    let Some(fraction) = holdout else {
        let t = train_pair(&a, &b, &gold_corpus, &cfg)?;
        write(output, &t.policy.to_json())?;
        report_training(&t, "combined", run.json);
        return Ok(());
    };

    a.corpus.check_aligned(&gold_corpus)?;
    let (train_idx, test_idx) = holdout_split(gold_corpus.len(), fraction, run.seed)?;
    let split = |s: &SystemOutput, idx: &[usize]| SystemOutput {
        name: s.name.clone(),
        corpus: s.corpus.select(idx),
    };
    let t = train_pair(
        &split(&a, &train_idx),
        &split(&b, &train_idx),
        &gold_corpus.select(&train_idx),
        &cfg,
    )?;
    write(output, &t.policy.to_json())?;

    let (ha, hb) = (split(&a, &test_idx), split(&b, &test_idx));
    let held_gold = gold_corpus.select(&test_idx);
    let merged = apply_policy(&ha, &hb, &t.policy, run.seed)?;
    let score = |c: &M2Corpus| score_corpus(c, &held_gold, run.beta, run.annotator);
    let (sa, sb, sc) = (score(&ha.corpus)?, score(&hb.corpus)?, score(&merged)?);
    if run.json {
        let v = json!({
            "train": training_json(&t, "combined"),
            "held_out": {
                "sentences": test_idx.len(),
                "a": score_json(&sa),
                "b": score_json(&sb),
                "combined": score_json(&sc),
            },
        });
        println!("{}", serde_json::to_string_pretty(&v)?);
    } else {
        println!("training split: {} sentences", train_idx.len());
        report_training(&t, "combined", false);
        println!("held-out split: {} sentences", test_idx.len());
        print!("{}", score_rows(&[("A", &sa), ("B", &sb), ("combined", &sc)]));
    }
    Ok(())
}

fn combine(
    paths: &[std::path::PathBuf],
    gold: Option<&Path>,
    policies: &[std::path::PathBuf],
    policy_prefix: Option<&str>,
    output: &Path,
    run: &RunArgs,
) -> Result<()> {
    let systems = paths.iter().map(|p| system(p)).collect::<Result<Vec<_>>>()?;
    match gold {
        Some(gold) => {
            let gold_corpus = read_m2(gold)?;
            let result = combine_iterative(&systems, &gold_corpus, &run.config(&display_name(gold)))?;
            write(output, &write_m2(&result.output.corpus))?;
            if let Some(prefix) = policy_prefix {
                for (k, step) in result.steps.iter().enumerate() {
                    write(Path::new(&format!("{prefix}.{}.json", k + 1)), &step.policy.to_json())?;
                }
            }
            if run.json {
                let steps: Vec<_> = result
                    .steps
                    .iter()
                    .map(|s| training_json(s, "combined"))
                    .collect();
                println!("{}", serde_json::to_string_pretty(&json!({ "steps": steps }))?);
            } else {
                for (k, step) in result.steps.iter().enumerate() {
                    println!("step {}: {}", k + 1, step.output.name);
                    report_training(step, "combined", false);
                }
            }
        }
        None => {
            if policies.is_empty() {
                bail!("combine needs either --gold or --policies");
            }
            let policies = policies.iter().map(|p| load_policy(p)).collect::<Result<Vec<_>>>()?;
            let merged = replay_iterative(&systems, &policies, run.seed)?;
            write(output, &write_m2(&merged.corpus))?;
        }
    }
    Ok(())
}

fn spell(cmd: SpellCommand) -> Result<()> {
    match cmd {
        SpellCommand::BuildModel { corpus, dict, output } => {
            let mut parts = Vec::with_capacity(corpus.len());
            for path in &corpus {
                let f = fs::File::open(path)
                    .with_context(|| format!("cannot read {}", path.display()))?;
                parts.push(
                    spellcheck::count_reader(BufReader::new(f))
                        .with_context(|| format!("cannot read {}", path.display()))?,
                );
            }
            let model = FrequencyModel::new(
                spellcheck::merge_counts(parts),
                spellcheck::parse_dictionary(&read(&dict)?),
            );
            write(&output, &model.to_tsv())
        }
        SpellCommand::Correct {
            model,
            dict,
            input,
            output,
            known_min_count,
            candidate_min_count,
        } => {
            let base = FrequencyModel::from_tsv(&read(&model)?, Default::default())
                .with_context(|| format!("invalid model {}", model.display()))?;
            let model = FrequencyModel::with_thresholds(
                base.counts().clone(),
                spellcheck::parse_dictionary(&read(&dict)?),
                known_min_count,
                candidate_min_count,
            );
            let text = match &input {
                Some(p) => read(p)?,
                None => {
                    let mut s = String::new();
                    io::stdin().read_to_string(&mut s).context("cannot read stdin")?;
                    s
                }
            };
            let sentences: Vec<Vec<Token>> = text.lines().map(tokenize).collect();
            let corrected = join_lines(&spellcheck::correct_corpus(&sentences, &model));
            match &output {
                Some(p) => write(p, &corrected),
                None => io::stdout()
                    .lock()
                    .write_all(corrected.as_bytes())
                    .context("cannot write stdout"),
            }
        }
    }
}

fn synth_command(cmd: SynthCommand) -> Result<()> {
    match cmd {
        SynthCommand::Measure { train, annotator, output } => {
            let dist = synth::measure_distribution(&read_m2(&train)?, annotator);
            write(&output, &dist.to_json())
        }
        SynthCommand::Generate { pool, dist, count, seed, max_attempts, output } => {
            let f = fs::File::open(&pool).with_context(|| format!("cannot read {}", pool.display()))?;
            let mut sentences = Vec::new();
            for line in BufReader::new(f).lines() {
                let line = line.with_context(|| format!("cannot read {}", pool.display()))?;
                let tokens = tokenize(&line);
                if !tokens.is_empty() {
                    sentences.push(tokens);
                }
            }
            let pool = Pool::new(sentences)?;
            let dist = ErrorDistribution::from_json(&read(&dist)?)
                .with_context(|| format!("invalid distribution {}", dist.display()))?;
            let out = synth::generate_corpus(&pool, &dist, count, seed, max_attempts)?;
            write(Path::new(&format!("{output}.src")), &out.source_text())?;
            write(Path::new(&format!("{output}.trg")), &out.target_text())?;
            write(Path::new(&format!("{output}.m2")), &write_m2(&out.gold))?;
            let r = &out.report;
            eprintln!(
                "generated {} pairs, {} rejected draws, count-histogram TV {:.4}, correction TV {:.4}",
                r.sentences, r.rejected_draws, r.hist_total_variation, r.corrections_total_variation
            );
            Ok(())
        }
    }
}
