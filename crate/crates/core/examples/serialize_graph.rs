//! Build a small graph and write it as N-Triples and Turtle, then read the
//! N-Triples back.

use kgod::rdf::{parse_ntriples, serialize_ntriples, serialize_turtle, xsd, Iri, Literal, NamespaceConfig, Triple, Graph};

fn main() {
    let ns = NamespaceConfig::default();
    let s = Iri::new("http://dbpedia.org/resource/Lost_Highway").unwrap();
    let mut g = Graph::new();
    g.insert(Triple::new(s.clone(), ns.ontology("runtime"), Literal::typed("134", xsd("integer"))));
    g.insert(Triple::new(s.clone(), ns.label_predicate.clone(), Literal::lang("Lost \"Highway\"\n", "en").unwrap()));
    g.insert(Triple::new(s, ns.ontology("director"), Iri::new("http://dbpedia.org/resource/David_Lynch").unwrap()));

    let nt = serialize_ntriples(&g);
    print!("{}", String::from_utf8_lossy(&nt));
    println!();
    print!("{}", String::from_utf8_lossy(&serialize_turtle(&g, &ns)));
    assert_eq!(parse_ntriples(&nt).unwrap(), g);
    println!("\nround trip ok");
}
