//! OSM XML (v0.6 subset) ingestion and highway class filtering.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::io::BufRead;
use std::str::FromStr;

use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::GeoPoint;

pub type Tags = BTreeMap<String, String>;

#[derive(Debug, Clone, PartialEq)]
pub struct OsmNode {
    pub id: i64,
    pub location: GeoPoint,
    pub tags: Tags,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OsmWay {
    pub id: i64,
    pub node_refs: Vec<i64>,
    pub tags: Tags,
}

impl OsmWay {
    pub fn highway_class(&self) -> Option<HighwayClass> {
        self.tags.get("highway").and_then(|v| HighwayClass::parse(v))
    }
}

macro_rules! highway_classes {
    ($($variant:ident => $name:literal),+ $(,)?) => {
        /// The highway tag values used to build SD map priors.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        #[serde(rename_all = "snake_case")]
        pub enum HighwayClass {
            $($variant),+
        }

        impl HighwayClass {
            pub const ALL: [HighwayClass; 25] = [$(HighwayClass::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $(HighwayClass::$variant => $name),+
                }
            }

            /// Returns `None` for any value outside the class table.
            pub fn parse(value: &str) -> Option<HighwayClass> {
                match value {
                    $($name => Some(HighwayClass::$variant),)+
                    _ => None,
                }
            }
        }
    };
}

highway_classes! {
    Crossing => "crossing",
    LivingStreet => "living_street",
    MiniRoundabout => "mini_roundabout",
    Motorway => "motorway",
    MotorwayJunction => "motorway_junction",
    MotorwayLink => "motorway_link",
    Path => "path",
    Primary => "primary",
    PrimaryLink => "primary_link",
    Residential => "residential",
    Road => "road",
    Secondary => "secondary",
    SecondaryLink => "secondary_link",
    Service => "service",
    Services => "services",
    Stop => "stop",
    Tertiary => "tertiary",
    TertiaryLink => "tertiary_link",
    TrafficSign => "traffic_sign",
    TrafficSignals => "traffic_signals",
    Trunk => "trunk",
    TrunkLink => "trunk_link",
    TurningCircle => "turning_circle",
    TurningLoop => "turning_loop",
    Unclassified => "unclassified",
}

impl HighwayClass {
    /// Position in [`HighwayClass::ALL`], used for one-hot encodings.
    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for HighwayClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for HighwayClass {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        HighwayClass::parse(s).ok_or_else(|| format!("unknown highway class '{s}'"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Diagnostic {
    /// The way referenced nodes absent from the document and was dropped.
    DanglingNodeRef { way_id: i64, missing: Vec<i64> },
    /// The way had fewer than two node references and was dropped.
    ShortWay { way_id: i64 },
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct OsmDocument {
    pub nodes: Vec<OsmNode>,
    pub ways: Vec<OsmWay>,
    pub diagnostics: Vec<Diagnostic>,
}

impl OsmDocument {
    pub fn node_index(&self) -> HashMap<i64, &OsmNode> {
        self.nodes.iter().map(|n| (n.id, n)).collect()
    }
}

enum Open {
    Node(OsmNode),
    Way(OsmWay),
    Other,
}

/// Parses an OSM XML document.
///
/// Nodes and ways are returned in document order. Ways referencing nodes that
/// are not in the document are dropped and reported as
/// [`Diagnostic::DanglingNodeRef`].
pub fn parse_osm_xml<R: BufRead>(input: R) -> Result<OsmDocument> {
    let mut reader = Reader::from_reader(input);
    reader.config_mut().check_end_names = true;

    let mut doc = OsmDocument::default();
    let mut stack: Vec<Open> = Vec::new();
    let mut buf = Vec::new();

    loop {
        let pos = reader.buffer_position();
        let event = reader.read_event_into(&mut buf).map_err(|e| Error::MalformedXml {
            position: reader.error_position(),
            message: e.to_string(),
        })?;
        match event {
            Event::Start(e) => {
                let open = open_element(&e, &mut stack, pos)?;
                stack.push(open);
            }
            Event::Empty(e) => {
                let open = open_element(&e, &mut stack, pos)?;
                close_element(open, &mut doc);
            }
            Event::End(_) => {
                let open = stack.pop().ok_or_else(|| Error::MalformedXml {
                    position: pos,
                    message: "unbalanced closing tag".into(),
                })?;
                close_element(open, &mut doc);
            }
            Event::Eof => break,
            _ => {}
        }
        buf.clear();
    }

    if !stack.is_empty() {
        return Err(Error::MalformedXml {
            position: reader.buffer_position(),
            message: format!("document ended with {} unclosed element(s)", stack.len()),
        });
    }

    let mut seen = HashSet::with_capacity(doc.nodes.len());
    for n in &doc.nodes {
        if !seen.insert(n.id) {
            return Err(Error::MalformedXml {
                position: 0,
                message: format!("duplicate node id {}", n.id),
            });
        }
    }

    let mut kept = Vec::with_capacity(doc.ways.len());
    for way in std::mem::take(&mut doc.ways) {
        if way.node_refs.len() < 2 {
            doc.diagnostics.push(Diagnostic::ShortWay { way_id: way.id });
            continue;
        }
        let missing: Vec<i64> = way
            .node_refs
            .iter()
            .copied()
            .filter(|r| !seen.contains(r))
            .collect();
        if missing.is_empty() {
            kept.push(way);
        } else {
            doc.diagnostics.push(Diagnostic::DanglingNodeRef {
                way_id: way.id,
                missing,
            });
        }
    }
    doc.ways = kept;
    Ok(doc)
}

fn open_element(e: &BytesStart<'_>, stack: &mut [Open], pos: u64) -> Result<Open> {
    let malformed = |message: String| Error::MalformedXml {
        position: pos,
        message,
    };
    let mut attrs: HashMap<Vec<u8>, String> = HashMap::new();
    for attr in e.attributes() {
        let attr = attr.map_err(|err| malformed(err.to_string()))?;
        let value = attr
            .unescape_value()
            .map_err(|err| malformed(err.to_string()))?
            .into_owned();
        attrs.insert(attr.key.as_ref().to_vec(), value);
    }
    let get = |key: &str| -> Result<&String> {
        attrs
            .get(key.as_bytes())
            .ok_or_else(|| malformed(format!("missing attribute '{key}'")))
    };
    let num = |key: &str| -> Result<f64> {
        get(key)?
            .parse::<f64>()
            .map_err(|_| malformed(format!("attribute '{key}' is not a number")))
    };
    let id = |key: &str| -> Result<i64> {
        get(key)?
            .parse::<i64>()
            .map_err(|_| malformed(format!("attribute '{key}' is not an integer")))
    };

    let open = match e.name().as_ref() {
        b"node" => {
            let location = GeoPoint::new(num("lat")?, num("lon")?)
                .map_err(|err| malformed(err.to_string()))?;
            Open::Node(OsmNode {
                id: id("id")?,
                location,
                tags: Tags::new(),
            })
        }
        b"way" => Open::Way(OsmWay {
            id: id("id")?,
            node_refs: Vec::new(),
            tags: Tags::new(),
        }),
        b"nd" => {
            if let Some(Open::Way(way)) = stack.last_mut() {
                way.node_refs.push(id("ref")?);
            }
            Open::Other
        }
        b"tag" => {
            let tags = match stack.last_mut() {
                Some(Open::Node(n)) => Some(&mut n.tags),
                Some(Open::Way(w)) => Some(&mut w.tags),
                _ => None,
            };
            if let Some(tags) = tags {
                tags.insert(get("k")?.clone(), get("v")?.clone());
            }
            Open::Other
        }
        _ => Open::Other,
    };
    Ok(open)
}

fn close_element(open: Open, doc: &mut OsmDocument) {
    match open {
        Open::Node(n) => doc.nodes.push(n),
        Open::Way(w) => doc.ways.push(w),
        Open::Other => {}
    }
}

/// Keeps the ways whose `highway` tag is one of the 25 known classes.
pub fn filter_highways<'a, I>(ways: I) -> Vec<(OsmWay, HighwayClass)>
where
    I: IntoIterator<Item = &'a OsmWay>,
{
    ways.into_iter()
        .filter_map(|w| w.highway_class().map(|c| (w.clone(), c)))
        .collect()
}

/// Nodes carrying a highway class as a node tag (traffic signals, stops, ...).
pub fn annotation_nodes<'a, I>(nodes: I) -> Vec<(&'a OsmNode, HighwayClass)>
where
    I: IntoIterator<Item = &'a OsmNode>,
{
    nodes
        .into_iter()
        .filter_map(|n| {
            n.tags
                .get("highway")
                .and_then(|v| HighwayClass::parse(v))
                .map(|c| (n, c))
        })
        .collect()
}
