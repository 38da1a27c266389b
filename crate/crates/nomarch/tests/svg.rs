use nomarch::svg::{render_svg, ColorMap};
use nomarch_core::{Matrix, SimplexLayout};

fn layout(alpha: Vec<Vec<f64>>, labels: &[&str], k: usize) -> SimplexLayout {
    let a = if alpha.is_empty() { Matrix::zeros(0, k) } else { Matrix::from_rows(&alpha).unwrap() };
    SimplexLayout::new(&a, labels.iter().map(|s| s.to_string()).collect(), (1..=k).map(|j| j.to_string()).collect())
        .unwrap()
}

fn circles<'a>(doc: &'a roxmltree::Document, class: &str) -> Vec<roxmltree::Node<'a, 'a>> {
    doc.descendants()
        .filter(|n| n.has_tag_name("g") && n.attribute("class") == Some(class))
        .flat_map(|g| g.descendants().filter(|n| n.has_tag_name("circle")).collect::<Vec<_>>())
        .collect()
}

#[test]
fn documents_parse_and_hold_one_glyph_per_row() {
    let rows = vec![vec![1.0, 0.0, 0.0], vec![0.2, 0.3, 0.5], vec![0.0, 0.0, 1.0], vec![0.5, 0.5, 0.0]];
    let l = layout(rows, &["Good", "Bad & <worse>", "Good", "Bad & <worse>"], 3);
    let colors = ColorMap::default_for(&["Good", "Bad & <worse>"]).unwrap();
    let text = render_svg(&l, &colors).unwrap();
    let doc = roxmltree::Document::parse(&text).expect("well-formed XML");
    assert_eq!(doc.root_element().tag_name().name(), "svg");
    let glyphs = circles(&doc, "observations");
    assert_eq!(glyphs.len(), 4);
    assert_eq!(glyphs[0].attribute("fill"), Some("black"));
    assert_eq!(glyphs[1].attribute("fill"), Some("red"));
    assert_eq!(circles(&doc, "anchors").len(), 3);
    assert!(doc.descendants().any(|n| n.text() == Some("Bad & <worse>")));
}

#[test]
fn vertex_glyph_sits_on_its_anchor() {
    let l = layout(vec![vec![0.0, 1.0, 0.0, 0.0]], &["x"], 4);
    let text = render_svg(&l, &ColorMap::default_for(&["x"]).unwrap()).unwrap();
    let doc = roxmltree::Document::parse(&text).unwrap();
    let glyph = &circles(&doc, "observations")[0];
    let anchor = &circles(&doc, "anchors")[1];
    for attr in ["cx", "cy"] {
        assert_eq!(glyph.attribute(attr), anchor.attribute(attr));
    }
}

#[test]
fn viewbox_contains_every_circle() {
    let rows = (0..30).map(|i| {
        let t = i as f64 / 29.0;
        vec![t, 1.0 - t, 0.0, 0.0, 0.0]
    });
    let l = layout(rows.collect(), &["a"; 30], 5);
    let text = render_svg(&l, &ColorMap::default_for(&["a"]).unwrap()).unwrap();
    let doc = roxmltree::Document::parse(&text).unwrap();
    let vb: Vec<f64> =
        doc.root_element().attribute("viewBox").unwrap().split(' ').map(|v| v.parse().unwrap()).collect();
    for c in doc.descendants().filter(|n| n.has_tag_name("circle")) {
        let x: f64 = c.attribute("cx").unwrap().parse().unwrap();
        let y: f64 = c.attribute("cy").unwrap().parse().unwrap();
        assert!(x >= vb[0] && x <= vb[0] + vb[2] && y >= vb[1] && y <= vb[1] + vb[3]);
    }
}
