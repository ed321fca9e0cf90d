use proptest::prelude::*;

use super::*;

fn text(s: &str) -> Fragment {
    Fragment::Text(s.to_string())
}

fn link(target: &str) -> WikiLink {
    WikiLink { target: target.to_string(), anchor: target.to_string(), fragment: None }
}

#[test]
fn infobox_with_link_and_text() {
    let page = parse_wikitext("Lost Highway", "{{Infobox film|director=[[David Lynch]]|runtime=134}}");
    assert_eq!(page.templates.len(), 1);
    let call = &page.templates[0];
    assert_eq!(call.name, "Infobox film");
    assert_eq!(call.depth, 1);
    assert_eq!(
        call.params,
        vec![
            ("director".to_string(), ParamValue { fragments: vec![Fragment::Link(link("David Lynch"))] }),
            ("runtime".to_string(), ParamValue { fragments: vec![text("134")] }),
        ]
    );
    assert_eq!(page.links, vec![link("David Lynch")]);
}

#[test]
fn empty_source() {
    let page = parse_wikitext("X", "");
    assert!(page.templates.is_empty() && page.links.is_empty() && page.body.is_empty());
    assert_eq!(page.redirect_target, None);
}

#[test]
fn redirect_page() {
    let page = parse_wikitext("Lost Highway (1997)", "#REDIRECT [[Lost Highway (film)]]");
    assert_eq!(page.redirect_target.as_deref(), Some("Lost Highway (film)"));
    assert!(page.templates.is_empty());
    assert!(page.body.is_empty());
}

#[test]
fn nested_template_in_parameter() {
    let page = parse_wikitext("X", "{{Infobox film|based_on={{Based on|''Novel''|[[Author X]]}}}}");
    assert_eq!(page.templates.len(), 1);
    let value = page.templates[0].param("based_on").unwrap();
    assert_eq!(value.fragments.len(), 1);
    let Fragment::Nested(inner) = &value.fragments[0] else { panic!("{value:?}") };
    assert_eq!(inner.name, "Based on");
    assert_eq!(inner.depth, 2);
    assert_eq!(inner.param("1").unwrap().fragments, vec![text("''Novel''")]);
    assert_eq!(inner.param("2").unwrap().fragments, vec![Fragment::Link(link("Author X"))]);
    assert_eq!(page.links, vec![link("Author X")]);
}

#[test]
fn plaintext_examples() {
    let page = parse_wikitext("Lost Highway", "'''Lost Highway''' is a 1997 film directed by [[David Lynch]].");
    assert_eq!(strip_to_plaintext(&page), "Lost Highway is a 1997 film directed by David Lynch.");
    assert_eq!(strip_to_plaintext(&parse_wikitext("X", "")), "");
    assert_eq!(strip_to_plaintext(&parse_wikitext("X", "{{Infobox film|name=X}}")), "");
}

#[test]
fn plaintext_drops_noise() {
    let src = "{{Short description|Film}}\n[[File:Poster.jpg|thumb|The [[poster]]]]\n\
               '''X''' (born 1950<ref>{{cite web|url=u}}</ref>) is a [[Film director|director]]s.\n\
               == Career ==\n{| class=\"wikitable\"\n| [[In table]]\n|}\nLater text.\n[[Category:People]]";
    let page = parse_wikitext("X", src);
    assert_eq!(strip_to_plaintext(&page), "X (born 1950) is a directors. Later text.");
    let targets: Vec<_> = page.links.iter().map(|l| l.target.as_str()).collect();
    assert_eq!(targets, ["File:Poster.jpg", "Poster", "Film director", "In table", "Category:People"]);
    assert!(page.body.iter().any(|n| matches!(n, ContentNode::Heading { level: 2, text } if text == "Career")));
}

#[test]
fn link_variants() {
    let page = parse_wikitext("X", "[[lost highway#Plot|the plot]] [[Paris, Texas|]] [[A (b)|]] [[#Local|here]]");
    assert_eq!(page.links[0].target, "Lost highway");
    assert_eq!(page.links[0].fragment.as_deref(), Some("Plot"));
    assert_eq!(page.links[0].anchor, "the plot");
    assert_eq!(page.links[1].anchor, "Paris");
    assert_eq!(page.links[2].anchor, "A");
    assert_eq!(page.links.len(), 3);
    assert_eq!(strip_to_plaintext(&page), "the plot Paris A here");
}

#[test]
fn duplicate_parameters_last_wins() {
    let page = parse_wikitext("X", "{{T|a=1|b=2|a=3}}");
    let params = &page.templates[0].params;
    assert_eq!(params.len(), 2);
    assert_eq!(params[1], ("a".to_string(), ParamValue { fragments: vec![text("3")] }));
}

#[test]
fn parser_functions_and_magic_words_are_dropped() {
    let page = parse_wikitext("X", "{{#if:x|[[Y]]|z}}{{DEFAULTSORT:X}}{{PAGENAME}}Text");
    assert!(page.templates.is_empty());
    assert_eq!(page.links, vec![link("Y")]);
    assert_eq!(strip_to_plaintext(&page), "Text");
}

#[test]
fn template_name_normalization() {
    assert_eq!(normalize_template_name("  infobox_film  "), "Infobox film");
    assert_eq!(normalize_template_name("Template:Infobox   person"), "Infobox person");
    let page = parse_wikitext("X", "{{ infobox  film\n| director = [[A]]\n}}");
    assert_eq!(page.templates[0].name, "Infobox film");
    assert_eq!(page.templates[0].param("director").unwrap().fragments, vec![Fragment::Link(link("A"))]);
}

#[test]
fn unmatched_delimiters_degrade_to_text() {
    let page = parse_wikitext("X", "a {{broken [[also");
    assert!(page.templates.is_empty() && page.links.is_empty());
    assert_eq!(strip_to_plaintext(&page), "a {{broken [[also");
    let page = parse_wikitext("X", "}} ]] {{T}}");
    assert_eq!(page.templates.len(), 1);
}

#[test]
fn crossing_constructs_do_not_nest() {
    let page = parse_wikitext("X", "{{T|a=[[b}} c]]");
    assert_eq!(page.templates.len(), 1);
    assert!(page.links.is_empty());
}

#[test]
fn deep_nesting_degrades_at_cap() {
    let depth = MAX_NESTING + 4;
    let src = format!("{}x{}", "{{T|".repeat(depth), "}}".repeat(depth));
    let page = parse_wikitext("X", &src);
    assert_eq!(page.templates.len(), 1);
    let mut call = &page.templates[0];
    let mut max = call.depth;
    while let Some(Fragment::Nested(inner)) = call.param("1").and_then(|v| v.fragments.first()) {
        call = inner;
        max = call.depth;
    }
    assert_eq!(max, MAX_NESTING);
    let raw = call.param("1").unwrap().raw_text();
    assert!(raw.starts_with("{{T|"), "{raw}");
}

#[test]
fn external_links_render_labels() {
    let page = parse_wikitext("X", "See [https://example.org the site] and [http://x.org].");
    assert_eq!(strip_to_plaintext(&page), "See the site and.");
}

#[test]
fn lossy_bytes() {
    let page = parse_wikitext_bytes("X", b"ok \xff\xfe [[A]]");
    assert_eq!(page.links, vec![link("A")]);
    assert!(strip_to_plaintext(&page).contains('\u{FFFD}'));
}

fn arb_wikitext() -> impl Strategy<Value = String> {
    let pieces = prop_oneof![
        Just("{{".to_string()),
        Just("}}".to_string()),
        Just("[[".to_string()),
        Just("]]".to_string()),
        Just("|".to_string()),
        Just("=".to_string()),
        Just("\n".to_string()),
        Just("{|".to_string()),
        Just("|}".to_string()),
        Just("#".to_string()),
        Just("'''".to_string()),
        Just("==".to_string()),
        "[a-zA-Z ]{1,6}",
        "\\PC{1,3}",
    ];
    proptest::collection::vec(pieces, 0..60).prop_map(|v| v.concat())
}

proptest! {
    #[test]
    fn parse_is_total(src in arb_wikitext()) {
        let page = parse_wikitext("T", &src);
        for link in &page.links {
            prop_assert!(!link.target.is_empty());
        }
        for node in &page.body {
            match node {
                ContentNode::LinkRef(i) => prop_assert!(*i < page.links.len()),
                ContentNode::TemplateRef(i) => prop_assert!(*i < page.templates.len()),
                _ => {}
            }
        }
        let _ = strip_to_plaintext(&page);
    }

    #[test]
    fn parse_is_total_on_random_bytes(bytes in proptest::collection::vec(any::<u8>(), 0..200)) {
        let _ = parse_wikitext_bytes("T", &bytes);
    }

    // Measured on comment- and tag-free input: preprocessing may join
    // delimiters split by a comment.
    #[test]
    fn structure_bound(src in arb_wikitext()) {
        prop_assume!(!src.contains('<'));
        let page = parse_wikitext("T", &src);
        prop_assert!(page.templates.len() <= src.matches("{{").count());
        prop_assert!(page.links.len() <= src.matches("[[").count());
    }

    #[test]
    fn comments_are_opaque(
        src in arb_wikitext(),
        comments in proptest::collection::vec((any::<prop::sample::Index>(), "[a-z{}\\[\\]| ]{0,8}"), 0..4),
    ) {
        prop_assume!(!src.contains('<'));
        let mut inserts: Vec<(usize, String)> = comments
            .into_iter()
            .map(|(at, body)| {
                let mut pos = at.index(src.len() + 1);
                while !src.is_char_boundary(pos) {
                    pos -= 1;
                }
                (pos, format!("<!--{body}-->"))
            })
            .collect();
        inserts.sort_by_key(|i| std::cmp::Reverse(i.0));
        let mut with_comments = src.clone();
        for (pos, comment) in inserts {
            with_comments.insert_str(pos, &comment);
        }
        prop_assert_eq!(parse_wikitext("T", &with_comments), parse_wikitext("T", &src));
    }

    #[test]
    fn nesting_beyond_cap_never_fails(depth in 0usize..64) {
        let src = format!("{}[[x]]{}", "{{a|".repeat(depth), "}}".repeat(depth));
        let page = parse_wikitext("T", &src);
        prop_assert!(page.templates.len() <= 1);
    }
}
