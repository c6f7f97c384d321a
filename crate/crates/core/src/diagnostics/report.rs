//! JSON and GeoJSON output helpers.

use std::io::Write;

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::geo::Location;

fn number(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
}

/// GeoJSON `FeatureCollection` of points; each `(name, values)` pair becomes a
/// numeric property. Non-finite values are written as `null`.
pub fn points_geojson(locations: &[Location], properties: &[(&str, &[f64])]) -> Result<Value> {
    for (name, vals) in properties {
        if vals.len() != locations.len() {
            return Err(Error::InvalidArgument(format!(
                "property '{name}' has {} values for {} points",
                vals.len(),
                locations.len()
            )));
        }
    }
    let features: Vec<Value> = locations
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let mut props = Map::new();
            for (name, vals) in properties {
                props.insert((*name).to_string(), number(vals[i]));
            }
            json!({
                "type": "Feature",
                "geometry": {"type": "Point", "coordinates": [number(l.x), number(l.y)]},
                "properties": props,
            })
        })
        .collect();
    Ok(json!({"type": "FeatureCollection", "features": features}))
}

pub fn write_json_pretty<W: Write, T: Serialize + ?Sized>(value: &T, mut writer: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut writer, value)?;
    writer.write_all(b"\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geojson_shape() {
        let locs = [Location::planar(1.0, 2.0), Location::planar(3.0, 4.0)];
        let v = points_geojson(
            &locs,
            &[
                ("uncertainty", &[0.5, f64::INFINITY]),
                ("local_i", &[1.0, -1.0]),
            ],
        )
        .unwrap();
        assert_eq!(v["type"], "FeatureCollection");
        assert_eq!(
            v["features"][0]["geometry"]["coordinates"],
            json!([1.0, 2.0])
        );
        assert_eq!(v["features"][0]["properties"]["uncertainty"], json!(0.5));
        assert!(v["features"][1]["properties"]["uncertainty"].is_null());
        assert!(points_geojson(&locs, &[("x", &[1.0])]).is_err());
    }
}
