//! Parse a page: templates, links, redirect, and the abstract.

use kgod::wikitext::{first_sentences, parse_wikitext, strip_to_plaintext};

fn main() {
    let text = "{{Infobox film\n| name = Lost Highway\n| director = [[David Lynch]]\n| starring = {{plainlist|\n* [[Bill Pullman]]\n* [[Patricia Arquette]]}}\n}}\n\
        '''Lost Highway''' is a 1997 [[neo-noir]] film directed by [[David Lynch]].<ref>x</ref> It stars [[Bill Pullman]].";
    let page = parse_wikitext("Lost Highway", text);
    for t in &page.templates {
        println!("template {:?} at depth {}", t.name, t.depth);
        for (k, v) in &t.params {
            let links: Vec<&str> = v.links().iter().map(|l| l.target.as_str()).collect();
            println!("  {k} = {:?} links {links:?}", v.plain_text());
        }
    }
    for l in &page.links {
        println!("link -> {} ({})", l.target, l.anchor);
    }
    println!("abstract: {}", first_sentences(&strip_to_plaintext(&page), 3));

    let redirect = parse_wikitext("LH", "#REDIRECT [[Lost Highway]]");
    println!("redirect: {:?}", redirect.redirect_target);
}
