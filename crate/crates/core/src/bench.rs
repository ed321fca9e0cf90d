//! Extraction time as a function of backlink count, on generated corpora.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::extraction::{ExtractionError, ExtractionOptions, Extractor};
use crate::mappings::{load_mappings, MappingError, MappingSet};
use crate::rdf::{normalize_title, title_to_iri, NamespaceConfig};
use crate::source::{fixture_file_name, FixtureSource};
use crate::wikitext::parse_wikitext;

/// Mapping file written next to generated corpora.
pub const BENCH_MAPPINGS: &str = "\
template \"Infobox film\" -> class dbo:Film
  director     -> dbo:director  object
  runtime      -> dbo:runtime   integer
template \"Infobox actor\" -> class dbo:Actor
  notable_works -> dbo:starring object
template \"Infobox person\" -> class dbo:Person
  occupation   -> dbo:occupation string@en
";

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("cannot write corpus: {0}")]
    Io(#[from] std::io::Error),
    #[error("no backlink counts given")]
    NoCounts,
    #[error(transparent)]
    Mapping(#[from] MappingError),
    #[error("extraction of Target_{k} failed: {cause}")]
    Extraction { k: usize, cause: ExtractionError },
}

const WORDS: &[&str] = &[
    "river", "night", "station", "mirror", "garden", "signal", "harbor", "winter", "engine", "letter", "valley", "storm",
];

fn filler(rng: &mut ChaCha8Rng, words: usize) -> String {
    (0..words).map(|_| *WORDS.choose(rng).expect("non-empty")).collect::<Vec<_>>().join(" ")
}

/// A body of `n` short sentences, so pages are closer to real article size.
fn paragraphs(rng: &mut ChaCha8Rng, n: usize) -> String {
    let mut out = String::new();
    for i in 0..n {
        let sep = if i % 8 == 7 { "\n\n" } else { " " };
        write!(out, "The {} was seen near the {}.{sep}", filler(rng, 2), filler(rng, 2)).expect("string write");
    }
    out
}

fn write_page(dir: &Path, title: &str, text: &str) -> std::io::Result<()> {
    std::fs::write(dir.join("pages").join(fixture_file_name(title)), text)
}

/// Writes `Target_k` plus `k` linking pages for every `k` in `counts`,
/// with `backlinks.tsv` and `mappings.txt`. Output depends only on the
/// arguments.
pub fn generate_synthetic_corpus(counts: &[usize], dir: &Path, seed: u64) -> Result<(), BenchError> {
    if counts.is_empty() {
        return Err(BenchError::NoCounts);
    }
    std::fs::create_dir_all(dir.join("pages"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut index = String::new();
    let mut ks: Vec<usize> = counts.to_vec();
    ks.sort_unstable();
    ks.dedup();
    for k in ks {
        let target = format!("Target {k}");
        let text = format!(
            "{{{{Infobox film|name={target}|director=[[Director {k}]]|runtime={}}}}}\n'''{target}''' is a synthetic film about a {}. It has {k} linking pages.\n",
            rng.random_range(60..200),
            filler(&mut rng, 3)
        );
        write_page(dir, &target, &text)?;
        for i in 0..k {
            let linker = format!("Linker {k} {i}");
            let text = format!(
                "{{{{Infobox actor|name={linker}|notable_works=[[{target}]]}}}}\n'''{linker}''' is an actor known for a {}.\n\n{}\n",
                filler(&mut rng, 4),
                paragraphs(&mut rng, 60)
            );
            write_page(dir, &linker, &text)?;
            writeln!(index, "{}\t{}", target.replace(' ', "_"), linker.replace(' ', "_")).expect("string write");
        }
    }
    std::fs::write(dir.join("backlinks.tsv"), index)?;
    std::fs::write(dir.join("mappings.txt"), BENCH_MAPPINGS)?;
    Ok(())
}

/// Writes a corpus of `pages` randomly interlinked pages (`Page 0` ...):
/// mapped and unmapped infoboxes, body links, self-links, links to missing
/// pages and redirects. `backlinks.tsv` lists every page linking to a title,
/// as a wiki would. Returns the titles written.
pub fn generate_random_corpus(dir: &Path, pages: usize, seed: u64) -> Result<Vec<String>, BenchError> {
    std::fs::create_dir_all(dir.join("pages"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let titles: Vec<String> = (0..pages).map(|i| format!("Page {i}")).collect();
    let pick = |rng: &mut ChaCha8Rng| -> String {
        if rng.random_bool(0.1) {
            format!("Ghost {}", rng.random_range(0..5))
        } else {
            titles.choose(rng).expect("non-empty").clone()
        }
    };
    let mut index: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for title in &titles {
        let text = if rng.random_bool(0.1) {
            format!("#REDIRECT [[{}]]", pick(&mut rng))
        } else {
            let mut text = String::new();
            match rng.random_range(0..5) {
                0 => {
                    let runtime = if rng.random_bool(0.2) { "long".to_string() } else { rng.random_range(1..300).to_string() };
                    write!(text, "{{{{Infobox film|director=[[{}]]|runtime={runtime}}}}}", pick(&mut rng)).unwrap();
                }
                1 => {
                    let works: Vec<String> = (0..rng.random_range(0..4)).map(|_| format!("[[{}]]", pick(&mut rng))).collect();
                    write!(text, "{{{{Infobox actor|notable_works={}}}}}", works.join(", ")).unwrap();
                }
                2 => write!(text, "{{{{Infobox person|occupation={}}}}}", filler(&mut rng, 2)).unwrap(),
                3 => write!(text, "{{{{Infobox ship|builder=[[{}]]}}}}", pick(&mut rng)).unwrap(),
                _ => {
                    let nested = format!("{{{{plainlist|[[{}]]}}}}", pick(&mut rng));
                    write!(text, "{{{{Infobox actor|notable_works={nested}}}}}{{{{Infobox film|director=[[{title}]]}}}}").unwrap();
                }
            }
            write!(text, " '''{title}''' mentions [[{}]] and a {}.", pick(&mut rng), filler(&mut rng, 3)).unwrap();
            text
        };
        write_page(dir, title, &text)?;
        let parsed = parse_wikitext(title, &text);
        let mut targets: Vec<String> = parsed.links.iter().map(|l| normalize_title(&l.target)).collect();
        targets.extend(parsed.redirect_target.clone());
        for t in targets {
            let sources = index.entry(t.clone()).or_default();
            if !sources.contains(title) {
                sources.push(title.clone());
            }
        }
    }
    let mut tsv = String::new();
    for (target, sources) in &index {
        for s in sources {
            writeln!(tsv, "{}\t{}", target.replace(' ', "_"), s.replace(' ', "_")).unwrap();
        }
    }
    std::fs::write(dir.join("backlinks.tsv"), tsv)?;
    std::fs::write(dir.join("mappings.txt"), BENCH_MAPPINGS)?;
    Ok(titles)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchSample {
    pub backlink_count: usize,
    pub run_times_ms: Vec<f64>,
    pub mean_ms: f64,
    pub stddev_ms: f64,
    pub pages_processed: usize,
}

impl BenchSample {
    pub fn new(backlink_count: usize, run_times_ms: Vec<f64>, pages_processed: usize) -> Self {
        let n = run_times_ms.len().max(1) as f64;
        let mean = run_times_ms.iter().sum::<f64>() / n;
        let var = run_times_ms.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / n;
        BenchSample { backlink_count, run_times_ms, mean_ms: mean, stddev_ms: var.sqrt(), pages_processed }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares; absent with fewer than two distinct x values.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> Option<Fit> {
    let n = xs.len();
    if n != ys.len() || n < 2 {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs.iter().zip(ys).map(|(x, y)| (y - (intercept + slope * x)).powi(2)).sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Some(Fit { slope, intercept, r_squared })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    /// Ascending by backlink count.
    pub samples: Vec<BenchSample>,
    /// Mean wall time against backlink count.
    pub time_fit: Option<Fit>,
    /// Pages processed against backlink count.
    pub pages_fit: Option<Fit>,
}

impl BenchReport {
    pub fn from_samples(mut samples: Vec<BenchSample>) -> Self {
        samples.sort_by_key(|s| s.backlink_count);
        let xs: Vec<f64> = samples.iter().map(|s| s.backlink_count as f64).collect();
        let times: Vec<f64> = samples.iter().map(|s| s.mean_ms).collect();
        let pages: Vec<f64> = samples.iter().map(|s| s.pages_processed as f64).collect();
        BenchReport { time_fit: least_squares(&xs, &times), pages_fit: least_squares(&xs, &pages), samples }
    }
}

#[derive(Debug, Clone)]
pub struct BenchOptions {
    pub repeats: usize,
    pub max_backlinks: Option<usize>,
    pub fetch_parallelism: usize,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions { repeats: 10, max_backlinks: None, fetch_parallelism: 8 }
    }
}

/// Times `Target_k` extractions over a generated corpus, uncached and one at
/// a time. Every count gets a warm-up, then `repeats` rounds each time every
/// count once, so a transient slowdown is spread over all counts.
pub async fn run_bench(corpus: &Path, counts: &[usize], opts: &BenchOptions) -> Result<BenchReport, BenchError> {
    let ns = NamespaceConfig::default();
    let mappings: MappingSet = load_mappings(&std::fs::read(corpus.join("mappings.txt"))?, &ns)?;
    let extractor = Extractor::new(Arc::new(FixtureSource::new(corpus)), ns.clone(), opts.fetch_parallelism);
    let xopts = ExtractionOptions { max_backlinks: opts.max_backlinks, ..Default::default() };
    let targets: Vec<_> = counts.iter().map(|&k| (k, title_to_iri(&format!("Target {k}"), &ns).expect("non-empty title"))).collect();
    let run = |k: usize, iri| {
        let (extractor, mappings, xopts) = (&extractor, &mappings, &xopts);
        async move { extractor.extract_resource(iri, mappings, xopts).await.map_err(|cause| BenchError::Extraction { k, cause }) }
    };
    let mut pages = Vec::with_capacity(targets.len());
    for (k, iri) in &targets {
        pages.push(run(*k, iri).await?.provenance.pages_processed);
    }
    let mut times = vec![Vec::with_capacity(opts.repeats); targets.len()];
    for _ in 0..opts.repeats {
        for (i, (k, iri)) in targets.iter().enumerate() {
            let started = Instant::now();
            run(*k, iri).await?;
            times[i].push(started.elapsed().as_secs_f64() * 1000.0);
        }
    }
    let samples = targets.iter().zip(times).zip(pages).map(|(((k, _), t), p)| BenchSample::new(*k, t, p)).collect();
    Ok(BenchReport::from_samples(samples))
}

/// `backlinks,mean_ms,stddev_ms` rows plus a trailing `# slope=...` comment
/// when a fit exists.
pub fn report_csv(report: &BenchReport) -> Vec<u8> {
    let mut out = String::from("backlinks,mean_ms,stddev_ms\n");
    for s in &report.samples {
        writeln!(out, "{},{:.4},{:.4}", s.backlink_count, s.mean_ms, s.stddev_ms).unwrap();
    }
    if report.samples.len() >= 2 {
        match report.time_fit {
            Some(f) => writeln!(out, "# slope={:.6}, intercept={:.6}, r2={:.6}", f.slope, f.intercept, f.r_squared).unwrap(),
            None => writeln!(out, "# slope=NaN, intercept=NaN").unwrap(),
        }
    }
    out.into_bytes()
}

/// Parses `10,20,...,100`: an ellipsis continues the step of the two
/// preceding values up to the next one.
pub fn parse_counts(text: &str) -> Result<Vec<usize>, String> {
    let items: Vec<&str> = text.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    let mut out: Vec<usize> = Vec::new();
    let mut i = 0;
    while i < items.len() {
        if items[i] == "..." {
            let (Some(&b), Some(end)) = (out.last(), items.get(i + 1)) else {
                return Err("'...' needs two values before it and one after".into());
            };
            let a = out.len().checked_sub(2).map(|j| out[j]).ok_or("'...' needs two values before it")?;
            let end: usize = end.parse().map_err(|_| format!("bad count {end:?}"))?;
            let step = b.checked_sub(a).filter(|s| *s > 0).ok_or("'...' needs an increasing sequence")?;
            let mut v = b + step;
            while v < end {
                out.push(v);
                v += step;
            }
            out.push(end);
            i += 2;
            continue;
        }
        out.push(items[i].parse().map_err(|_| format!("bad count {:?}", items[i]))?);
        i += 1;
    }
    if out.is_empty() {
        return Err("no counts".into());
    }
    Ok(out)
}
