//! Browser demo bindings: generate a synthetic chart set, pack it with
//! either packer, and return the rendered SVG plus metrics as JSON.
//!
//! Build with `wasm-pack build --target web crates/tabi-web` (requires the
//! wasm32-unknown-unknown target); `www/index.html` is the host page.

use wasm_bindgen::prelude::*;

use tabi_core::chart::AtlasSpec;
use tabi_core::corpus::{generate_chart_set, CorpusParams};
use tabi_core::io::{parse_chartset_json, render_atlas_svg};
use tabi_core::metrics::l2_stretch;
use tabi_core::validate::{occupancy, validate_atlas};
use tabi_core::{chameleon_pack, pack, ChartSet};

fn spec_from(atlas: u32, gutter: u32, local_aabbs: u32, prerotate: bool) -> AtlasSpec {
    let mut spec = AtlasSpec::new(atlas, atlas);
    spec.gutter = gutter;
    spec.local_aabb_count = local_aabbs.clamp(1, 64);
    spec.prerotate = prerotate;
    spec
}

fn pack_to_json(set: &ChartSet, spec: &AtlasSpec, mode: &str) -> Result<String, JsValue> {
    let result = match mode {
        "chameleon" => chameleon_pack(set, spec),
        _ => pack(set, spec),
    }
    .map_err(|e| JsValue::from_str(&e.to_string()))?;

    if !result.is_success() {
        return Ok(serde_json::json!({
            "success": false,
            "diagnostic": result.diagnostic,
        })
        .to_string());
    }

    let svg = render_atlas_svg(set, &result, spec).map_err(|e| JsValue::from_str(&e.to_string()))?;
    let stretch = l2_stretch(set, &result).map_err(|e| JsValue::from_str(&e.to_string()))?;
    let occ = occupancy(set, &result, spec).map_err(|e| JsValue::from_str(&e.to_string()))?;
    let report = validate_atlas(set, &result, spec).map_err(|e| JsValue::from_str(&e.to_string()))?;

    Ok(serde_json::json!({
        "success": true,
        "svg": svg,
        "charts": set.charts.len(),
        "scale_index": result.scale_index,
        "scale_count": result.scale_count,
        "scale": result.scale_value(),
        "l2_stretch": stretch.l2_stretch,
        "occupancy": occ,
        "valid": report.passed,
        "rows": result.stats.rows,
        "knees_detected": result.stats.knees_detected,
        "knee_folds": result.stats.knee_folds,
    })
    .to_string())
}

/// Generate a seeded synthetic chart set and pack it. Returns a JSON string
/// with the SVG and metrics.
#[wasm_bindgen]
pub fn pack_demo(
    seed: u64,
    count: u32,
    atlas: u32,
    gutter: u32,
    local_aabbs: u32,
    prerotate: bool,
    mode: &str,
) -> Result<String, JsValue> {
    let max_height = (atlas as f64 * 0.45).max(20.0);
    let params = CorpusParams { seed, count, min_height: 6.0, max_height };
    let set = generate_chart_set(&params).map_err(|e| JsValue::from_str(&e.to_string()))?;
    let spec = spec_from(atlas, gutter, local_aabbs, prerotate);
    pack_to_json(&set, &spec, mode)
}

/// Pack a user-supplied chartset JSON document.
#[wasm_bindgen]
pub fn pack_chartset(
    json: &str,
    atlas: u32,
    gutter: u32,
    local_aabbs: u32,
    prerotate: bool,
    mode: &str,
) -> Result<String, JsValue> {
    let loaded = parse_chartset_json(json).map_err(|e| JsValue::from_str(&e.to_string()))?;
    let spec = spec_from(atlas, gutter, local_aabbs, prerotate);
    pack_to_json(&loaded.set, &spec, mode)
}

/// The synthetic chart set itself, for download or inspection.
#[wasm_bindgen]
pub fn generate_demo_set(seed: u64, count: u32, atlas: u32) -> Result<String, JsValue> {
    let max_height = (atlas as f64 * 0.45).max(20.0);
    let params = CorpusParams { seed, count, min_height: 6.0, max_height };
    let set = generate_chart_set(&params).map_err(|e| JsValue::from_str(&e.to_string()))?;
    Ok(tabi_core::io::chartset_to_json(&set))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn demo_round_trip_produces_svg_and_metrics() {
        let out = pack_demo(7, 40, 256, 1, 10, false, "tabi").unwrap();
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["success"], true);
        assert_eq!(v["valid"], true);
        assert!(v["svg"].as_str().unwrap().contains("<svg"));
        assert!(v["l2_stretch"].as_f64().unwrap() >= 1.0);

        let cham = pack_demo(7, 40, 256, 1, 10, false, "chameleon").unwrap();
        let c: serde_json::Value = serde_json::from_str(&cham).unwrap();
        assert_eq!(c["valid"], true);
    }

    #[test]
    fn chartset_json_path_works() {
        let set = generate_demo_set(3, 10, 128).unwrap();
        let out = pack_chartset(&set, 128, 1, 10, true, "tabi").unwrap();
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["success"], true);
    }
}
