//! Plain-text count matrices: the option count `N`, then `N × N`
//! whitespace-separated non-negative integers, row `i` column `j` holding how
//! often option `i` was chosen over option `j`.

use std::path::Path;

use prefsens_core::dataset::PreferenceSample;
use prefsens_core::fitting::PairwiseCounts;

use crate::{Error, Result};

pub fn parse_count_matrix(text: &str, origin: &Path) -> Result<PairwiseCounts> {
    let mut tokens = text
        .lines()
        .enumerate()
        .flat_map(|(k, l)| l.split_whitespace().map(move |t| (k + 1, t)));
    let (line, first) = tokens.next().ok_or_else(|| Error::parse(origin, 1, "empty count matrix"))?;
    let n: usize = first
        .parse()
        .map_err(|_| Error::parse(origin, line, format!("expected the option count, found {first:?}")))?;
    let mut wins = Vec::with_capacity(n * n);
    for (line, t) in tokens.by_ref().take(n * n) {
        wins.push(
            t.parse::<u64>()
                .map_err(|_| Error::parse(origin, line, format!("expected a non-negative integer, found {t:?}")))?,
        );
    }
    if wins.len() != n * n {
        return Err(Error::parse(origin, text.lines().count(), format!("expected {} counts, found {}", n * n, wins.len())));
    }
    if let Some((line, t)) = tokens.next() {
        return Err(Error::parse(origin, line, format!("unexpected trailing token {t:?}")));
    }
    Ok(PairwiseCounts::new(n, wins)?)
}

pub fn format_count_matrix(counts: &PairwiseCounts) -> String {
    let n = counts.n();
    let mut s = format!("{n}\n");
    for i in 0..n {
        let row: Vec<String> = (0..n).map(|j| counts.wins(i, j).to_string()).collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    s
}

pub fn counts_from_dataset(samples: &[PreferenceSample], options: &[String]) -> Result<PairwiseCounts> {
    Ok(PairwiseCounts::from_samples(samples, options)?)
}
