//! Load a mapping file and apply it to one page.

use kgod::mappings::{apply_mappings, load_mappings};
use kgod::rdf::{serialize_ntriples, title_to_iri, NamespaceConfig};
use kgod::wikitext::parse_wikitext;

const MAPPINGS: &str = "\
template \"Infobox film\" -> class dbo:Film
  director -> dbo:director object
  runtime  -> dbo:runtime  integer
  released -> dbo:releaseDate date
";

fn main() {
    let ns = NamespaceConfig::default();
    let mappings = load_mappings(MAPPINGS.as_bytes(), &ns).expect("valid mapping file");
    println!("mapping version {} ({} templates)", mappings.version(), mappings.len());

    let page = parse_wikitext(
        "Lost Highway",
        "{{Infobox film|director=[[David Lynch]]|runtime=134 minutes|released=1997-02-21}}",
    );
    let subject = title_to_iri(&page.title, &ns).unwrap();
    let mapped = apply_mappings(&page, &subject, &mappings, &ns);
    print!("{}", String::from_utf8(serialize_ntriples(&mapped.graph)).unwrap());
    for w in &mapped.warnings {
        println!("warning: {}: {}", w.param, w.reason);
    }
}
