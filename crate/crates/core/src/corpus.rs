//! Litmus tests shipped with the crate, with their expected verdicts.

use crate::litmus::{parse_litmus, AnyTest, ParseError};

macro_rules! corpus_files {
    ($($path:literal),* $(,)?) => {
        &[$(($path, include_str!(concat!("../corpus/", $path)))),*]
    };
}

/// `(relative path, file contents)` for every bundled test.
pub const CORPUS: &[(&str, &str)] = corpus_files![
    "c11/iriw_acq_acq.lit",
    "c11/iriw_acq_sc.lit",
    "c11/iriw_sc_acq.lit",
    "c11/iriw_sc_sc.lit",
    "c11/rwc.lit",
    "c11/rwc_sc.lit",
    "c11/mp.lit",
    "c11/sb.lit",
    "c11/sb_rlx.lit",
    "isa/iriw_leading_power.lit",
    "isa/iriw_leading_armv7.lit",
    "isa/iriw_trailing_power.lit",
    "isa/iriw_trailing_armv7.lit",
    "isa/rwc_leading_power.lit",
    "isa/rwc_leading_armv7.lit",
    "isa/rwc_trailing_power.lit",
    "isa/rwc_trailing_armv7.lit",
    "isa/iriw_plain.lit",
    "isa/iriw_syncs.lit",
    "isa/iriw_lwsyncs.lit",
    "isa/mp_lwsync_ctrlisync.lit",
    "isa/sb_lwsyncs.lit",
    "isa/corr_single.lit",
];

#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub path: String,
    pub test: AnyTest,
}

/// Parses the whole corpus. The bundled files are checked by the test
/// suite, so a failure here means the binary was built from a broken tree.
pub fn load_corpus() -> Vec<CorpusEntry> {
    CORPUS
        .iter()
        .map(|(path, text)| CorpusEntry {
            path: (*path).to_owned(),
            test: parse_litmus(text).unwrap_or_else(|e| panic!("corpus/{path}: {e}")),
        })
        .collect()
}

/// Finds a bundled file by path (`c11/rwc.lit`) or file name (`rwc.lit`).
pub fn corpus_file(name: &str) -> Option<&'static str> {
    CORPUS
        .iter()
        .find(|(path, _)| *path == name || path.rsplit('/').next() == Some(name))
        .map(|(_, text)| *text)
}

pub fn corpus_test(name: &str) -> Option<Result<AnyTest, ParseError>> {
    corpus_file(name).map(parse_litmus)
}
