//! Writes a scatter panel and a heat map as SVG into the current directory.

use sectionscope::io::{render_heatmap_svg, render_scatter_svg, Panel};

fn main() -> std::io::Result<()> {
    let circle: Vec<[f64; 2]> = (0..200)
        .map(|k| {
            let s = k as f64 * std::f64::consts::TAU / 200.0;
            [s.cos(), 0.5 * s.sin()]
        })
        .collect();
    let panel = Panel {
        title: "ellipse".into(),
        x_label: "u".into(),
        y_label: "v".into(),
        points: circle,
    };
    std::fs::write("scatter.svg", render_scatter_svg(&[panel], 1))?;

    let eps: Vec<f64> = (0..=4).map(|k| k as f64 * 0.25).collect();
    let values: Vec<Vec<f64>> = eps.iter().map(|a| eps.iter().map(|b| 1.0 - a * b).collect()).collect();
    std::fs::write("heatmap.svg", render_heatmap_svg(&eps, &eps, &values))?;
    println!("wrote scatter.svg and heatmap.svg");
    Ok(())
}
