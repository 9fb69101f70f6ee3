use pantomorph::chromatic::ChromaticParams;
use pantomorph::distortion::DistortionParams;
use pantomorph::profile::preset_registry;
use pantomorph::projection::{aov_from_focal, primary_ray, KVector, LensParams, ReferenceAxis, ViewCoord};
use pantomorph::remap::{axis_cube_panorama, render_projection, RenderOptions};

fn edge_subtense(lens: &LensParams) -> f64 {
    let left = primary_ray(ViewCoord::new(-1.0, 0.0), lens);
    let right = primary_ray(ViewCoord::new(1.0, 0.0), lens);
    left.incident_angle().unwrap() + right.incident_angle().unwrap()
}

#[test]
fn flying_preset_spans_120_degrees() {
    let lens = LensParams::with_focal(KVector::new(-0.5, 0.0).unwrap(), 1.0, ReferenceAxis::Horizontal).unwrap();
    let left = primary_ray(ViewCoord::new(-1.0, 0.0), &lens);
    let right = primary_ray(ViewCoord::new(1.0, 0.0), &lens);
    let between = (left.gx * right.gx + left.gy * right.gy + left.gz * right.gz).acos();
    assert!((between.to_degrees() - 120.0).abs() < 0.1);
}

#[test]
fn edge_rays_subtend_the_horizontal_aov_for_every_preset() {
    for p in preset_registry() {
        let expected = aov_from_focal(p.lens.focal_reciprocal(), p.lens.k().kx()).unwrap();
        let got = edge_subtense(&p.lens);
        assert!((got - expected).to_degrees().abs() < 0.1, "{}", p.name);
    }
}

#[test]
fn rectilinear_cube_edges_are_straight() {
    let pano = axis_cube_panorama(512, 1);
    let lens = LensParams::with_aov(KVector::new(1.0, 1.0).unwrap(), 120f64.to_radians(), ReferenceAxis::Horizontal)
        .unwrap();
    let (w, h) = (160, 160);
    let img = render_projection(&pano, w, h, &RenderOptions::new(lens)).unwrap();
    let is_blue = |x: usize, y: usize| {
        let [r, g, b, _] = img.get(x, y);
        b > 0.5 && r < 0.5 && g < 0.5
    };
    // Right edge of the +z face: the first non-blue column right of center
    // must be the same in every row that crosses the face.
    let mut right_edges = Vec::new();
    let mut top_edges = Vec::new();
    for y in 50..110 {
        let x = (w / 2..w).find(|&x| !is_blue(x, y)).unwrap();
        right_edges.push(x);
    }
    for x in 50..110 {
        let y = (0..h / 2).rev().find(|&y| !is_blue(x, y)).unwrap();
        top_edges.push(y);
    }
    let spread = |v: &[usize]| v.iter().max().unwrap() - v.iter().min().unwrap();
    assert!(spread(&right_edges) <= 1, "{right_edges:?}");
    assert!(spread(&top_edges) <= 1, "{top_edges:?}");
    // tan(45°)/tan(60°) of the half-width from center.
    let expected = 80.0 + 80.0 / 3f64.sqrt();
    assert!((right_edges[0] as f64 - expected).abs() <= 1.5);
}

#[test]
fn vignette_darkens_but_never_brightens() {
    let pano = axis_cube_panorama(256, 4);
    let lens = preset_registry()[0].lens;
    let mut opts = RenderOptions::new(lens);
    let plain = render_projection(&pano, 96, 54, &opts).unwrap();
    opts.vignette = true;
    let dark = render_projection(&pano, 96, 54, &opts).unwrap();
    for (a, b) in plain.pixels().iter().zip(dark.pixels()) {
        for ch in 0..3 {
            assert!(b[ch] <= a[ch] + 1e-7);
        }
    }
    // Odd-sized frame: the center pixel sits on the optical axis.
    let plain = render_projection(&pano, 33, 33, &RenderOptions::new(lens)).unwrap();
    let dark = render_projection(&pano, 33, 33, &opts).unwrap();
    assert_eq!(plain.get(16, 16), dark.get(16, 16));
}

#[test]
fn rotating_the_panorama_shifts_the_center_row() {
    // Equidistant horizon: longitude is vx·f⁻¹, so a rotation by a whole
    // number of output pixels shows up as that shift along the middle row.
    let pano = axis_cube_panorama(180, 6);
    let (w, h) = (91, 9);
    let f_inv = 1.5;
    let lens = LensParams::new(KVector::new(0.0, 0.0).unwrap(), f_inv, ReferenceAxis::Horizontal).unwrap();
    let radians_per_px = 2.0 * f_inv / w as f64;
    let shift_px = 7;
    let pano_cols = (shift_px as f64 * radians_per_px / std::f64::consts::TAU * 360.0).round() as isize;
    // Choose the panorama width so the shift is whole columns on both sides.
    assert_eq!(pano.image().width(), 360);
    let actual_shift = pano_cols as f64 / 360.0 * std::f64::consts::TAU / radians_per_px;
    assert!((actual_shift - shift_px as f64).abs() < 0.2);

    let opts = RenderOptions::new(lens);
    let a = render_projection(&pano, w, h, &opts).unwrap();
    let b = render_projection(&pano.rotate_columns(pano_cols), w, h, &opts).unwrap();
    let row = h / 2;
    let score = |s: isize| -> f64 {
        (20..(w as isize - 20))
            .map(|x| {
                let pa = a.get(x as usize, row);
                let pb = b.get((x + s) as usize, row);
                (0..3).map(|c| (pa[c] * pb[c]) as f64).sum::<f64>()
            })
            .sum()
    };
    let best = (-15..=15).max_by(|&p, &q| score(p).total_cmp(&score(q))).unwrap();
    assert_eq!(best, shift_px as isize);
}

#[test]
fn chromatic_render_keeps_gray_and_alpha() {
    let lens = LensParams::with_aov(KVector::new(0.5, 0.5).unwrap(), 100f64.to_radians(), ReferenceAxis::Horizontal)
        .unwrap();
    let gray = pantomorph::remap::Panorama::new(pantomorph::raster::RgbRaster::filled(64, 32, [0.4, 0.4, 0.4])).unwrap();
    let mut opts = RenderOptions::new(lens);
    opts.distortion = Some(DistortionParams::radial(-0.25, 0.04));
    opts.chromatic = Some(ChromaticParams::new(16, 0.5).unwrap());
    let out = render_projection(&gray, 48, 27, &opts).unwrap();
    for px in out.pixels() {
        assert_eq!(px[3], 1.0);
        for c in &px[..3] {
            assert!((c - 0.4).abs() < 1e-5);
        }
    }
    assert!(render_projection(&gray, 0, 27, &opts).is_err());
}

#[test]
fn render_is_deterministic() {
    let pano = axis_cube_panorama(128, 4);
    let p = &preset_registry()[3];
    let mut opts = RenderOptions::new(p.lens);
    opts.vignette = true;
    opts.distortion = Some(DistortionParams::radial(-0.1, 0.02));
    opts.chromatic = Some(ChromaticParams::new(8, 0.4).unwrap());
    let a = render_projection(&pano, 64, 36, &opts).unwrap();
    let b = render_projection(&pano, 64, 36, &opts).unwrap();
    assert_eq!(a, b);
}
