//! Deterministic stand-in model used to author the committed fixtures.
//!
//! Responses are written by hand-made rules: pair separation returns
//! authored pairs for every known text, validity and latent-similarity
//! verdicts follow keyword rules, and experiment answers are assembled from
//! sentence pools with a ChaCha generator seeded by the session salt, so
//! each round differs but every run produces identical bytes.
//!
//! `author_fixtures` runs every recorded flow through this model and
//! returns the fixture files it produces.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use reuse_forge::eval::{run_experiment, ExperimentConfig, Materials, Study};
use reuse_forge::features::fnv1a64;
use reuse_forge::gateway::{FnBackend, Gateway, Prompt, RecordingBackend};
use reuse_forge::method_store::{separate_pairs, Method, MethodLibrary};
use reuse_forge::mom::{double_calculation_method, escalate};
use reuse_forge::reuse::{Query, ReuseConfig, ReuseEngine, SearchMode};
use reuse_forge::Result;

pub const PLANTAIN_QUESTION: &str = "How to judge whether a plantain is fresh?";
pub const MANGO_QUESTION: &str = "How to judge whether a mango is fresh?";
pub const DELAY_QUESTION: &str = "Why is the system response delayed?";
pub const CALC_CONFIRMED: &str = "calc-17x23";
pub const CALC_REFUTED: &str = "calc-19x21";

/// Rounds in which the control arm of the relationship study mentions
/// picking time as an aside.
pub const ASIDE_ROUNDS: [usize; 4] = [3, 8, 12, 17];

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn corpus(name: &str) -> String {
    let path = fixtures_dir().join("corpus").join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

// ---------------------------------------------------------------- pairs

/// Authored pairs per story, keyed by the story's opening words.
const STORY_PAIRS: [(&str, &[(&str, &str)]); 11] = [
    (
        "Lina found an old key",
        &[(
            "How can you find out what an old key opens?",
            "Search old furniture such as an attic desk for a hidden drawer the key fits.",
        )],
    ),
    (
        "David missed his usual train",
        &[(
            "How can a lonely journey home feel less lonely?",
            "Listen to a familiar melody, such as a lullaby remembered from childhood.",
        )],
    ),
    (
        "On a flooded street",
        &[(
            "How can someone trapped by a flood be reminded they are not forgotten?",
            "Send a small sign of hope, such as a paper boat, toward them.",
        )],
    ),
    (
        "A friend had an MP3 file",
        &[
            (
                "How can I get a slower version of an MP3 file myself when I lack a way to download it from the official site?",
                "Buy a copy from a goods exchange website instead of relying on the official site.",
            ),
            (
                "Why did paying on the official MP3 site not give a usable file?",
                "The official site only offered a proprietary format instead of a standard MP3 file.",
            ),
        ],
    ),
    (
        "Emma volunteered at the library",
        &[(
            "How can you keep the memory of people you loved alive?",
            "Sketch their faces from memory in a notebook.",
        )],
    ),
    (
        "A boy collected fireflies",
        &[(
            "How can you bring the night sky to someone who cannot go outside?",
            "Collect fireflies in a glass jar and bring their light into the room.",
        )],
    ),
    (
        "Maya left her umbrella",
        &[(
            "How can a forgotten umbrella start a conversation?",
            "Return it to its owner with a kind note.",
        )],
    ),
    (
        "Lucas found his grandfather",
        &[(
            "How can a broken pocket watch be made to tick again?",
            "Take it to a repair shop where a watchmaker can wind it.",
        )],
    ),
    (
        "On a quiet beach",
        &[(
            "How can you forgive someone without meeting them?",
            "Write the message in the sand and let the waves carry it away.",
        )],
    ),
    (
        "Every night, Mrs. Chen",
        &[(
            "How can a neighbour tell that someone living alone needs help?",
            "Notice when a daily sign, such as a window lamp, suddenly stays dark.",
        )],
    ),
    (
        "In an old attic, Sam",
        &[(
            "How can music return to a home after a loss?",
            "Play the old instrument again and share the memories it carries.",
        )],
    ),
];

const HINT_PAIRS: &[(&str, &str)] = &[
    (
        "How to judge whether a fruit is fresh?",
        "Use the fruit picking time: the shorter the time since the fruit was picked, the fresher it is.",
    ),
    (
        "How can the picking time of a fruit be protected from alteration?",
        "Record the picking time in a blockchain.",
    ),
    (
        "Why are some fruits priced higher than others?",
        "Fruits with shorter picking times are typically priced higher.",
    ),
];

const HINT_OPENING: &str = "The fruit picking time is the time when the fruit is picked";

fn pair_block(pairs: &[(&str, &str)]) -> String {
    pairs
        .iter()
        .map(|(q, s)| format!("Q: {q}\nS: {s}"))
        .collect::<Vec<_>>()
        .join("\n\n")
}

/// Pairs for every known text found in `content`, in corpus order.
fn authored_pairs(content: &str) -> Vec<(&'static str, &'static str)> {
    let mut pairs = Vec::new();
    if content.contains(HINT_OPENING) {
        pairs.extend_from_slice(HINT_PAIRS);
    }
    for (opening, story) in STORY_PAIRS {
        if content.contains(opening) {
            pairs.extend_from_slice(story);
        }
    }
    pairs
}

fn after<'a>(text: &'a str, marker: &str) -> &'a str {
    text.split_once(marker).map(|(_, rest)| rest).unwrap_or("")
}

fn between<'a>(text: &'a str, start: &str, end: &str) -> &'a str {
    let rest = after(text, start);
    rest.split_once(end).map(|(v, _)| v).unwrap_or(rest)
}

fn separation_response(rendered: &str) -> String {
    let content = after(rendered, "Content:\n");
    let pairs = authored_pairs(content);
    if pairs.is_empty() {
        let first = content.split(['.', '?', '!']).next().unwrap_or(content).trim();
        return format!("Q: What does the content describe?\nS: {first}.");
    }
    pair_block(&pairs)
}

// ------------------------------------------------------------- verdicts

fn has(text: &str, needles: &[&str]) -> bool {
    let lower = text.to_lowercase();
    needles.iter().any(|n| lower.contains(n))
}

fn validity_response(rendered: &str) -> String {
    let question = between(rendered, "Question: ", "\nCandidate solution: ");
    let solution = between(rendered, "Candidate solution: ", "\n\nCan the candidate");
    let verdict = if has(solution, &["picking time"]) && has(question, &["fresh"]) {
        Some("the picking time gives a direct freshness signal for this fruit.")
    } else if has(solution, &["goods exchange"]) && has(question, &["hard drive", "disk"]) {
        Some("buying the missing tool from a goods exchange site avoids handing the drive to anyone.")
    } else if has(solution, &["secondary calculation"]) && has(question, &["verify"]) {
        Some("an independent second calculation is a standard way to check a result.")
    } else if has(solution, &["server load"]) && has(question, &["slow", "delayed"]) {
        Some("server load is a common cause of delayed responses.")
    } else {
        None
    };
    match verdict {
        Some(why) => format!("YES. Applying the solution works here: {why}"),
        None => "NO. The solution does not address the constraints of this question.".to_string(),
    }
}

fn latent_response(rendered: &str) -> String {
    let target = between(rendered, "Target question: ", "\nKnown question: ");
    let known = between(rendered, "Known question: ", "\n\nDo these");
    let shared = if has(target, &["hard drive", "disk"]) && has(known, &["mp3"]) {
        Some("in both, the official route is blocked and the person must obtain a tool or copy some other way.")
    } else if has(target, &["delayed", "slow"]) && has(known, &["slow", "delayed"]) {
        Some("both ask about the cause of a slow response from a system.")
    } else if has(target, &["fresh"]) && has(known, &["fresh"]) {
        Some("both ask how to judge freshness.")
    } else {
        None
    };
    match shared {
        Some(why) => format!("YES. They share a hidden characteristic: {why}"),
        None => "NO. The two questions share no underlying cause, constraint or goal.".to_string(),
    }
}

fn mom_apply_response(rendered: &str) -> String {
    let solution = between(rendered, "Solution: ", "\n\nApply the procedure");
    if solution.trim().is_empty() {
        "VERDICT: INCONCLUSIVE".to_string()
    } else {
        "VERDICT: CONFIRMED".to_string()
    }
}

fn double_check_response(rendered: &str, salt: &str) -> String {
    if rendered.contains("17 * 23") {
        "391".to_string()
    } else if rendered.contains("19 * 21") {
        // the second session slips
        if salt.ends_with("/2") { "398" } else { "399" }.to_string()
    } else {
        "unknown".to_string()
    }
}

// ---------------------------------------------------------- experiments

const BANANA_CUES: [&str; 8] = [
    "Look at the peel colour: a bright yellow peel with slightly green tips is fresh.",
    "A few small brown sugar spots are fine, but large dark patches mean it is overripe.",
    "Press it gently; a fresh banana is firm and springs back.",
    "Check the stem, which should be intact and free of mould.",
    "Smell it: a mild sweet scent is good, a fermented smell is not.",
    "Avoid bananas with split skin or leaking juice.",
    "Bananas kept in a cool dry place stay fresh for longer.",
    "A bunch that is still attached at the crown usually keeps better.",
];

const PICKING_METHOD: [&str; 3] = [
    "Judge freshness by the fruit picking time: the shorter the time since the banana was picked, the fresher it is, and a picking time recorded in a blockchain cannot be altered.",
    "The most reliable method is the picking time. Check when the fruit was picked; a banana with a shorter picking time is fresher and is typically priced higher.",
    "Use the recorded picking time of the fruit to judge whether it is fresh: the time since it was picked tells you directly how fresh it is.",
];

const PICKING_ASIDE: &str =
    "Extra note: if the seller records the picking time, a more recent picking time also suggests a fresher banana.";

/// The aside in the round where it dominates the answer.
const PICKING_ASIDE_LONG: &str = "Extra note: the fruit picking time, the time when the fruit is picked, can also be used to judge whether a fruit is fresh. It can be recorded in blockchain to avoid alteration, and fruits with shorter picking times are typically priced higher.";

const DISK_CUES: [&str; 7] = [
    "Check whether the drive maker offers a diagnostic utility.",
    "Back up your data before changing any drive settings.",
    "Some counters live in firmware and cannot be changed by ordinary software.",
    "Wiping the drive securely keeps its contents private if you later need help.",
    "Consider whether replacing the drive is cheaper than resetting it.",
    "Read the drive's SMART data first so you know which counter you want to change.",
    "Keep the drive yourself so nobody else sees its contents.",
];

const MP3_TRANSFER: [&str; 3] = [
    "Story 4 gives some indication. A friend had an MP3 file that was too fast and asked Tom to find a slower version. Tom could not download it as MP3 format from several sites, and even after paying on the official site only a proprietary format was available. Finally he purchased a copy from a goods exchange website. You can likewise purchase a reset tool from a goods exchange website.",
    "The MP3 story. Tom could not download the slower version as MP3 format from several sites; paying on the official site only gave a proprietary format, so he purchased a copy from a goods exchange website. Purchase the reset tool you lack in the same way.",
    "Story 4, the MP3 file that was too fast: the official site only offered a proprietary format after paying, and several sites could not provide the MP3 format, so Tom purchased a copy from a goods exchange website. Do the same for the disk tool.",
];

const OTHER_STORIES: [&str; 4] = [
    "Story 8 is related in spirit: the watch was taken to a repair shop, but you want to avoid giving the drive to others.",
    "Story 1 is about finding what an old key opens, which is only loosely related.",
    "The other stories are about memories and relationships and do not help with the drive.",
    "Story 10 shows noticing a change in a daily sign, which does not transfer to the drive.",
];

fn rng_for(salt: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(fnv1a64(salt.as_bytes()))
}

fn pick<'a>(rng: &mut ChaCha8Rng, pool: &[&'a str], n: usize) -> Vec<&'a str> {
    let mut all: Vec<&str> = pool.to_vec();
    all.shuffle(rng);
    all.truncate(n);
    all
}

struct Session<'a> {
    study: &'a str,
    arm: &'a str,
    round: usize,
    step: usize,
}

fn parse_salt(salt: &str) -> Option<Session<'_>> {
    let mut parts = salt.split('/');
    let study = parts.next()?;
    let arm = parts.next()?;
    let round = parts.next()?.strip_prefix("round-")?.parse().ok()?;
    let step = parts.next()?.strip_prefix("step-")?.parse().ok()?;
    Some(Session {
        study,
        arm,
        round,
        step,
    })
}

fn rela_answer(s: &Session<'_>, rng: &mut ChaCha8Rng) -> String {
    let treated = s.arm == "treated";
    let final_step = if treated { 4 } else { 3 };
    match s.step {
        1 => {
            let n = rng.random_range(3..=5);
            pick(rng, &BANANA_CUES, n).join(" ")
        }
        2 => "Thanks, I have read the material about fruit picking time.".to_string(),
        3 if treated => pair_block(HINT_PAIRS),
        step if step == final_step && treated => {
            let method = *PICKING_METHOD.choose(rng).expect("non-empty");
            // one round leans on visual cues more heavily
            let n = if s.round == 8 { 6 } else { rng.random_range(1..=3) };
            let mut text = format!("{method}\n\nOther signs:");
            for cue in pick(rng, &BANANA_CUES, n) {
                text.push_str("\n- ");
                text.push_str(cue);
            }
            text
        }
        step if step == final_step => {
            let n = if s.round == 8 { 1 } else { rng.random_range(3..=5) };
            let mut text = pick(rng, &BANANA_CUES, n).join(" ");
            if ASIDE_ROUNDS.contains(&s.round) {
                text.push_str("\n\n");
                text.push_str(if s.round == 8 {
                    PICKING_ASIDE_LONG
                } else {
                    PICKING_ASIDE
                });
            }
            text
        }
        _ => "I am not sure what you are asking.".to_string(),
    }
}

fn feature_answer(s: &Session<'_>, rng: &mut ChaCha8Rng) -> String {
    match s.step {
        1 => "I have read all 11 stories.".to_string(),
        2 => {
            let n = rng.random_range(2..=4);
            pick(rng, &DISK_CUES, n).join(" ")
        }
        3 if s.arm == "treated" => {
            let mut pairs = Vec::new();
            for (_, story) in STORY_PAIRS {
                pairs.extend_from_slice(story);
            }
            let mut text = pair_block(&pairs);
            text.push_str("\n\nApplicable pairs: ");
            if rng.random_bool(0.35) {
                text.push_str("the MP3 pair may apply, since a copy was bought from a goods exchange website.");
            } else {
                text.push_str("none of the pairs applies directly; the drive problem needs a specialised tool.");
            }
            text
        }
        3 => {
            let mut text = MP3_TRANSFER.choose(rng).expect("non-empty").to_string();
            let n = rng.random_range(0..=2);
            for line in pick(rng, &OTHER_STORIES, n) {
                text.push(' ');
                text.push_str(line);
            }
            text
        }
        _ => "I am not sure what you are asking.".to_string(),
    }
}

fn conversation_response(prompt: &Prompt) -> String {
    let Some(session) = parse_salt(&prompt.session_salt) else {
        return "Hello.".to_string();
    };
    let mut rng = rng_for(&prompt.session_salt);
    match session.study {
        "rela" => rela_answer(&session, &mut rng),
        "feature" => feature_answer(&session, &mut rng),
        _ => "Hello.".to_string(),
    }
}

/// The authoring model.
pub fn author(prompt: &Prompt) -> Result<String> {
    let text = &prompt.rendered;
    Ok(match prompt.template_id.as_str() {
        "pair_separation" => separation_response(text),
        "validate" => validity_response(text),
        "latent_similarity" => latent_response(text),
        "mom_apply" => mom_apply_response(text),
        "double_check" => double_check_response(text, &prompt.session_salt),
        "conversation" => conversation_response(prompt),
        other => format!("No authored answer for template {other}."),
    })
}

pub fn authoring_gateway() -> Gateway {
    Gateway::new(FnBackend::new(author))
}

// ------------------------------------------------------------ libraries

pub fn fruit_library() -> MethodLibrary {
    let mut lib = MethodLibrary::new();
    for m in [
        Method::new(
            "fruit-freshness",
            "How to judge whether a fruit is fresh?",
            "Check the fruit picking time: the shorter the time since picking, the fresher the fruit.",
        )
        .with_scope(["banana", "apple", "plantain"]),
        Method::new(
            "banana-freshness",
            "How to judge whether a banana is fresh?",
            "Check the picking time recorded for the banana; a more recent picking time means a fresher banana.",
        )
        .with_scope(["banana"]),
        Method::new(
            "apple-crispness",
            "How to tell whether an apple is crisp?",
            "Press the skin; a crisp apple resists and makes a sharp sound when bitten.",
        )
        .with_scope(["apple"]),
    ] {
        lib.add(m).expect("unique ids");
    }
    lib
}

pub fn latency_library() -> MethodLibrary {
    let mut lib = MethodLibrary::new();
    for m in [
        Method::new(
            "website-slow",
            "Why is the website slow?",
            "Check the server load and the time spent in database queries.",
        ),
        Method::new(
            "printer-jam",
            "How do I clear a paper jam?",
            "Open the rear tray and pull the sheet out slowly.",
        ),
    ] {
        lib.add(m).expect("unique ids");
    }
    lib
}

pub fn mom_library() -> MethodLibrary {
    let mut lib = MethodLibrary::new();
    lib.add(Method::new(CALC_CONFIRMED, "What is 17 * 23?", "391"))
        .expect("unique");
    lib.add(Method::new(CALC_REFUTED, "What is 19 * 21?", "399"))
        .expect("unique");
    lib.add(double_calculation_method()).expect("unique");
    lib
}

pub const TABLE1_SUMMARY: &str = r#"{
  "rows": [
    {
      "label": "RelaMethod vs. CompareRela",
      "a": { "mean": 0.4835, "sd": 0.0801, "n": 20 },
      "b": { "mean": 0.2820, "sd": 0.0558, "n": 20 },
      "average_similarity": 0.3510,
      "published_ratio": 0.574,
      "reuse_type": "Dependency-based reuse"
    },
    {
      "label": "featureMethd vs. compareMP3Method",
      "a": { "mean": 0.2945, "sd": 0.0698, "n": 20 },
      "b": { "mean": 0.3983, "sd": 0.0670, "n": 20 },
      "average_similarity": 0.0726,
      "published_ratio": 0.143,
      "reuse_type": "Partial correlation"
    }
  ]
}
"#;

fn jsonl(lib: &MethodLibrary) -> String {
    let mut buf = Vec::new();
    lib.to_writer(&mut buf).expect("in-memory write");
    String::from_utf8(buf).expect("utf-8")
}

/// Default CLI configuration for the query flows.
fn engine<'g>(gw: &'g Gateway, mode: SearchMode) -> ReuseEngine<'g> {
    let config = ReuseConfig {
        mode,
        ..ReuseConfig::default()
    };
    ReuseEngine::new(gw, config).expect("default config is valid")
}

/// Runs every recorded flow and returns fixture file name → contents.
pub fn author_fixtures() -> Result<BTreeMap<String, String>> {
    let recorder = Arc::new(RecordingBackend::new(FnBackend::new(author)));
    let gw = Gateway::new(recorder.clone());

    // pair separation over the corpus files, as `extract-pairs` reads them
    let stories = separate_pairs(&corpus("stories.txt"), &gw)?;
    separate_pairs(&corpus("story_04.txt"), &gw)?;
    separate_pairs(&corpus("relationship_hint.txt"), &gw)?;
    let mut stories_lib = MethodLibrary::new();
    for m in stories {
        stories_lib.add(m)?;
    }

    let fruit = fruit_library();
    for mode in [SearchMode::Relative, SearchMode::Global] {
        engine(&gw, mode).solve(&Query::new(PLANTAIN_QUESTION).with_scope(["plantain"]), &fruit)?;
    }
    engine(&gw, SearchMode::Relative)
        .with_superset("fruit", ["banana", "mango"])
        .solve(&Query::new(MANGO_QUESTION).with_scope(["mango"]), &fruit)?;

    let disk = Query::new(corpus("feature_question.txt").trim());
    for mode in [SearchMode::Relative, SearchMode::Global] {
        let e = engine(&gw, mode);
        e.solve(&disk, &stories_lib)?;
        e.hidden_reuse(&disk, &stories_lib)?;
        e.emerging_reuse(&disk, &stories_lib)?;
    }

    let latency = latency_library();
    let delay = Query::new(DELAY_QUESTION);
    let e = engine(&gw, SearchMode::Relative);
    e.solve(&delay, &latency)?;
    e.hidden_reuse(&delay, &latency)?;

    let moms = mom_library();
    for id in [CALC_CONFIRMED, CALC_REFUTED] {
        escalate(moms.get(id).expect("authored"), &moms, &e)?;
    }

    let config = ExperimentConfig::default();
    for study in [Study::Rela, Study::Feature] {
        run_experiment(study, 20, &Materials::builtin(study), &gw, &config)?;
    }

    let mut transcripts = Vec::new();
    recorder
        .snapshot()
        .to_writer(&mut transcripts)
        .expect("in-memory write");

    let mut files = BTreeMap::new();
    files.insert(
        "transcripts.jsonl".into(),
        String::from_utf8(transcripts).expect("utf-8"),
    );
    files.insert("stories_library.jsonl".into(), jsonl(&stories_lib));
    files.insert("fruit_library.jsonl".into(), jsonl(&fruit));
    files.insert("latency_library.jsonl".into(), jsonl(&latency));
    files.insert("mom_library.jsonl".into(), jsonl(&mom_library()));
    files.insert("table1_summary.json".into(), TABLE1_SUMMARY.to_string());
    Ok(files)
}
