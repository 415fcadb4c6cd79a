//! Scene XML reader and canonical writer.
//!
//! ```xml
//! <scene frequency_hz="3.5e9" bounds_min="0 0 0" bounds_max="10 10 5">
//!   <material name="concrete" permittivity="5.24" conductivity="0.123" permeability="1"/>
//!   <object name="wall_1" material="concrete">
//!     <tri v0="0 0 0" v1="1 0 0" v2="0 0 1"/>
//!     <quad v0="0 0 0" v1="1 0 0" v2="1 0 1" v3="0 0 1"/>
//!   </object>
//! </scene>
//! ```
//!
//! `bounds_min`/`bounds_max`, `permeability`, `scattering` and `<quad>` are
//! optional. Quads are split into two triangles (v0 v1 v2, v0 v2 v3). Object
//! materials that are not declared in the document fall back to the built-in
//! table.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use quick_xml::events::{BytesStart, Event};
use quick_xml::{Reader, XmlVersion};

use super::{builtin_materials, Material, Scene, SceneError, SceneObject};
use crate::geometry::{Aabb, Triangle, Vec3};

fn line_col(doc: &str, offset: usize) -> (usize, usize) {
    let offset = offset.min(doc.len());
    let before = &doc.as_bytes()[..offset];
    let line = before.iter().filter(|&&b| b == b'\n').count() + 1;
    let col = offset - before.iter().rposition(|&b| b == b'\n').map_or(0, |p| p + 1) + 1;
    (line, col)
}

struct Ctx<'a> {
    doc: &'a str,
    pos: usize,
}

impl Ctx<'_> {
    fn err(&self, message: impl Into<String>) -> SceneError {
        let (line, column) = line_col(self.doc, self.pos);
        SceneError::Xml {
            line,
            column,
            message: message.into(),
        }
    }
}

fn attrs(ctx: &Ctx, e: &BytesStart) -> Result<BTreeMap<String, String>, SceneError> {
    let mut out = BTreeMap::new();
    for a in e.attributes() {
        let a = a.map_err(|err| ctx.err(err.to_string()))?;
        let key = a.key.as_ref().to_string();
        let value = a
            .normalized_value(XmlVersion::Implicit1_0)
            .map_err(|err| ctx.err(err.to_string()))?
            .into_owned();
        out.insert(key, value);
    }
    Ok(out)
}

fn take(ctx: &Ctx, map: &mut BTreeMap<String, String>, key: &str, elem: &str) -> Result<String, SceneError> {
    map.remove(key)
        .ok_or_else(|| ctx.err(format!("<{elem}> is missing attribute `{key}`")))
}

fn reject_extra(ctx: &Ctx, map: &BTreeMap<String, String>, elem: &str) -> Result<(), SceneError> {
    match map.keys().next() {
        Some(k) => Err(ctx.err(format!("unknown attribute `{k}` on <{elem}>"))),
        None => Ok(()),
    }
}

fn number(ctx: &Ctx, s: &str, what: &str) -> Result<f64, SceneError> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| ctx.err(format!("`{s}` is not a number ({what})")))
}

fn vec3(ctx: &Ctx, s: &str, what: &str) -> Result<Vec3, SceneError> {
    let parts: Vec<&str> = s.split_whitespace().collect();
    if parts.len() != 3 {
        return Err(ctx.err(format!("{what} needs three coordinates, got `{s}`")));
    }
    let mut v = Vec3::zeros();
    for (i, p) in parts.iter().enumerate() {
        v[i] = number(ctx, p, what)?;
        if !v[i].is_finite() {
            return Err(ctx.err(format!("{what} has a non-finite coordinate")));
        }
    }
    Ok(v)
}

struct PendingObject {
    name: String,
    material: String,
    triangles: Vec<Triangle>,
}

/// Parses a scene document. See the module docs for the schema.
pub fn parse_scene(document: &str) -> Result<Scene, SceneError> {
    let mut reader = Reader::from_str(document);
    reader.config_mut().trim_text(true);

    let mut frequency = None;
    let mut bounds = None;
    let mut materials: Vec<Material> = Vec::new();
    let mut objects: Vec<PendingObject> = Vec::new();
    let mut stack: Vec<String> = Vec::new();
    let mut seen_root = false;

    loop {
        let mut pos = reader.buffer_position() as usize;
        // Trimmed whitespace is consumed with the next event; point at the markup itself.
        pos += document[pos.min(document.len())..]
            .bytes()
            .take_while(u8::is_ascii_whitespace)
            .count();
        let event = reader.read_event().map_err(|e| {
            let (line, column) = line_col(document, reader.error_position() as usize);
            SceneError::Xml {
                line,
                column,
                message: e.to_string(),
            }
        })?;
        let ctx = Ctx { doc: document, pos };
        match event {
            Event::Decl(_) | Event::Comment(_) => {}
            Event::Text(t) => {
                if !t.chars().all(char::is_whitespace) {
                    return Err(ctx.err("unexpected text content"));
                }
            }
            Event::Start(ref e) | Event::Empty(ref e) => {
                let is_empty = matches!(event, Event::Empty(_));
                let name = e.name().as_ref().to_string();
                let mut a = attrs(&ctx, e)?;
                let parent = stack.last().map(String::as_str);
                match (parent, name.as_str()) {
                    (None, "scene") if !seen_root => {
                        seen_root = true;
                        let f = take(&ctx, &mut a, "frequency_hz", "scene")?;
                        frequency = Some(number(&ctx, &f, "frequency_hz")?);
                        match (a.remove("bounds_min"), a.remove("bounds_max")) {
                            (Some(lo), Some(hi)) => {
                                let lo = vec3(&ctx, &lo, "bounds_min")?;
                                let hi = vec3(&ctx, &hi, "bounds_max")?;
                                bounds = Some(Aabb {
                                    min: [lo.x, lo.y, lo.z],
                                    max: [hi.x, hi.y, hi.z],
                                });
                            }
                            (None, None) => {}
                            _ => return Err(ctx.err("bounds_min and bounds_max must be given together")),
                        }
                        reject_extra(&ctx, &a, "scene")?;
                    }
                    (Some("scene"), "material") => {
                        let mname = take(&ctx, &mut a, "name", "material")?;
                        let eps = number(&ctx, &take(&ctx, &mut a, "permittivity", "material")?, "permittivity")?;
                        let sigma = number(&ctx, &take(&ctx, &mut a, "conductivity", "material")?, "conductivity")?;
                        let mu = match a.remove("permeability") {
                            Some(s) => number(&ctx, &s, "permeability")?,
                            None => 1.0,
                        };
                        let scattering = match a.remove("scattering") {
                            Some(s) => number(&ctx, &s, "scattering")?,
                            None => 0.0,
                        };
                        reject_extra(&ctx, &a, "material")?;
                        if materials.iter().any(|m| m.name == mname) {
                            return Err(ctx.err(format!("material `{mname}` declared twice")));
                        }
                        let m = Material {
                            name: mname,
                            relative_permittivity: eps,
                            conductivity: sigma,
                            relative_permeability: mu,
                            scattering_fraction: scattering,
                        };
                        m.validate()?;
                        materials.push(m);
                    }
                    (Some("scene"), "object") => {
                        let oname = take(&ctx, &mut a, "name", "object")?;
                        let material = take(&ctx, &mut a, "material", "object")?;
                        reject_extra(&ctx, &a, "object")?;
                        if oname.is_empty() {
                            return Err(ctx.err("object name must not be empty"));
                        }
                        objects.push(PendingObject {
                            name: oname,
                            material,
                            triangles: Vec::new(),
                        });
                    }
                    (Some("object"), "tri") => {
                        let v0 = vec3(&ctx, &take(&ctx, &mut a, "v0", "tri")?, "v0")?;
                        let v1 = vec3(&ctx, &take(&ctx, &mut a, "v1", "tri")?, "v1")?;
                        let v2 = vec3(&ctx, &take(&ctx, &mut a, "v2", "tri")?, "v2")?;
                        reject_extra(&ctx, &a, "tri")?;
                        objects.last_mut().unwrap().triangles.push(Triangle::new(v0, v1, v2));
                    }
                    (Some("object"), "quad") => {
                        let v0 = vec3(&ctx, &take(&ctx, &mut a, "v0", "quad")?, "v0")?;
                        let v1 = vec3(&ctx, &take(&ctx, &mut a, "v1", "quad")?, "v1")?;
                        let v2 = vec3(&ctx, &take(&ctx, &mut a, "v2", "quad")?, "v2")?;
                        let v3 = vec3(&ctx, &take(&ctx, &mut a, "v3", "quad")?, "v3")?;
                        reject_extra(&ctx, &a, "quad")?;
                        let obj = objects.last_mut().unwrap();
                        obj.triangles.push(Triangle::new(v0, v1, v2));
                        obj.triangles.push(Triangle::new(v0, v2, v3));
                    }
                    (parent, other) => {
                        let where_ = parent.map_or("document root".to_string(), |p| format!("<{p}>"));
                        return Err(ctx.err(format!("unexpected element <{other}> in {where_}")));
                    }
                }
                if !is_empty {
                    stack.push(name);
                }
            }
            Event::End(_) => {
                stack.pop();
            }
            Event::Eof => break,
            Event::CData(_) | Event::PI(_) | Event::DocType(_) | Event::GeneralRef(_) => {
                return Err(ctx.err("unsupported XML construct"));
            }
        }
    }

    let frequency = frequency.ok_or_else(|| Ctx { doc: document, pos: 0 }.err("missing <scene> root element"))?;

    // Objects may name a built-in material without declaring it.
    let builtin = builtin_materials();
    let mut resolved = Vec::with_capacity(objects.len());
    for o in objects {
        let idx = match materials.iter().position(|m| m.name == o.material) {
            Some(i) => i,
            None => match builtin.iter().find(|m| m.name == o.material) {
                Some(m) => {
                    materials.push(m.clone());
                    materials.len() - 1
                }
                None => {
                    return Err(SceneError::UnresolvedMaterial {
                        object: o.name,
                        material: o.material,
                    })
                }
            },
        };
        resolved.push(SceneObject {
            name: o.name,
            material: idx,
            triangles: o.triangles,
        });
    }
    Scene::new(frequency, bounds, materials, resolved)
}

fn fmt_v(v: &Vec3) -> String {
    format!("{} {} {}", v.x, v.y, v.z)
}

fn esc(s: &str) -> String {
    quick_xml::escape::escape(s).into_owned()
}

/// Canonical serialization: fixed attribute order, shortest round-trip float
/// formatting, one element per line. `parse_scene` of the output yields an
/// equal scene.
pub fn serialize_scene(scene: &Scene) -> String {
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = write!(out, "<scene frequency_hz=\"{}\"", scene.frequency_hz());
    if let Some(b) = scene.declared_bounds() {
        let _ = write!(
            out,
            " bounds_min=\"{} {} {}\" bounds_max=\"{} {} {}\"",
            b.min[0], b.min[1], b.min[2], b.max[0], b.max[1], b.max[2]
        );
    }
    out.push_str(">\n");
    for m in scene.materials() {
        let _ = write!(
            out,
            "  <material name=\"{}\" permittivity=\"{}\" conductivity=\"{}\" permeability=\"{}\"",
            esc(&m.name),
            m.relative_permittivity,
            m.conductivity,
            m.relative_permeability
        );
        if m.scattering_fraction != 0.0 {
            let _ = write!(out, " scattering=\"{}\"", m.scattering_fraction);
        }
        out.push_str("/>\n");
    }
    for o in scene.objects() {
        let _ = writeln!(
            out,
            "  <object name=\"{}\" material=\"{}\">",
            esc(&o.name),
            esc(&scene.materials()[o.material].name)
        );
        for t in &o.triangles {
            let _ = writeln!(
                out,
                "    <tri v0=\"{}\" v1=\"{}\" v2=\"{}\"/>",
                fmt_v(&t.v[0]),
                fmt_v(&t.v[1]),
                fmt_v(&t.v[2])
            );
        }
        out.push_str("  </object>\n");
    }
    out.push_str("</scene>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"<scene frequency_hz="3.5e9">
  <material name="concrete" permittivity="5.24" conductivity="0.123" permeability="1"/>
  <object name="wall" material="concrete">
    <tri v0="0 0 0" v1="1 0 0" v2="1 0 1"/>
    <tri v0="0 0 0" v1="1 0 1" v2="0 0 1"/>
  </object>
</scene>"#;

    #[test]
    fn minimal_document() {
        let s = parse_scene(MINIMAL).unwrap();
        assert_eq!(s.objects().len(), 1);
        assert_eq!(s.objects()[0].triangles.len(), 2);
        assert_eq!(s.material_of(0).name, "concrete");
    }

    #[test]
    fn undefined_material_is_semantic_error() {
        let doc = MINIMAL.replace("material=\"concrete\">", "material=\"unobtanium\">");
        match parse_scene(&doc) {
            Err(SceneError::UnresolvedMaterial { object, material }) => {
                assert_eq!(object, "wall");
                assert_eq!(material, "unobtanium");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn builtin_material_fallback() {
        let doc = r#"<scene frequency_hz="1e9"><object name="pane" material="glass"><tri v0="0 0 0" v1="1 0 0" v2="0 1 0"/></object></scene>"#;
        let s = parse_scene(doc).unwrap();
        assert_eq!(s.material_of(0).name, "glass");
    }

    #[test]
    fn unknown_element_rejected_with_position() {
        let doc = "<scene frequency_hz=\"1e9\">\n  <light/>\n</scene>";
        match parse_scene(doc) {
            Err(SceneError::Xml { line, column, message }) => {
                assert_eq!(line, 2);
                assert_eq!(column, 3);
                assert!(message.contains("light"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_xml_reports_line() {
        let doc = "<scene frequency_hz=\"1e9\">\n<object name=\"a\" material=\"glass\">\n</scene>";
        match parse_scene(doc) {
            Err(SceneError::Xml { line, .. }) => assert!(line >= 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn degenerate_triangle_rejected() {
        let doc = r#"<scene frequency_hz="1e9"><object name="a" material="glass"><tri v0="0 0 0" v1="1 0 0" v2="2 0 0"/></object></scene>"#;
        assert!(matches!(parse_scene(doc), Err(SceneError::DegenerateTriangle { .. })));
    }

    #[test]
    fn quads_are_split() {
        let doc = r#"<scene frequency_hz="1e9"><object name="a" material="glass"><quad v0="0 0 0" v1="1 0 0" v2="1 1 0" v3="0 1 0"/></object></scene>"#;
        let s = parse_scene(doc).unwrap();
        assert_eq!(s.triangle_count(), 2);
        let area: f64 = s.objects()[0].triangles.iter().map(|t| t.area()).sum();
        assert!((area - 1.0).abs() < 1e-15);
    }

    #[test]
    fn perfect_conductor_round_trips() {
        let doc = r#"<scene frequency_hz="1e9"><material name="pec" permittivity="1" conductivity="inf"/><object name="a" material="pec"><tri v0="0 0 0" v1="1 0 0" v2="0 1 0"/></object></scene>"#;
        let s = parse_scene(doc).unwrap();
        assert!(s.material_of(0).is_perfect_conductor());
        assert_eq!(parse_scene(&serialize_scene(&s)).unwrap(), s);
    }
}
