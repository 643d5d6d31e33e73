//! Synthetic labeled room generator: axis-aligned floor, four walls,
//! box-shaped furniture, and thin wall panels, each triangulated and
//! labeled per vertex. Serves as a deterministic stand-in for scanned
//! indoor scenes.

use crate::error::{Error, Result};
use crate::geometry::Mesh;
use crate::math::Vec3;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// Semantic classes the generator emits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SceneClass {
    Floor,
    Wall,
    Box,
    Panel,
}

impl SceneClass {
    pub const ALL: [SceneClass; 4] = [SceneClass::Floor, SceneClass::Wall, SceneClass::Box, SceneClass::Panel];

    pub fn name(self) -> &'static str {
        match self {
            SceneClass::Floor => "floor",
            SceneClass::Wall => "wall",
            SceneClass::Box => "box",
            SceneClass::Panel => "panel",
        }
    }
}

/// How scene classes map into label ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IdSpace {
    /// Labels 1..=4 in a 4-class task.
    Compact,
    /// The four classes mapped into a sparse 20-class id space
    /// (most ids absent, exercising absent-class handling downstream).
    Sparse20,
}

impl IdSpace {
    pub fn label(self, class: SceneClass) -> u16 {
        match self {
            IdSpace::Compact => match class {
                SceneClass::Floor => 1,
                SceneClass::Wall => 2,
                SceneClass::Box => 3,
                SceneClass::Panel => 4,
            },
            IdSpace::Sparse20 => match class {
                SceneClass::Wall => 1,
                SceneClass::Floor => 2,
                SceneClass::Box => 3,
                SceneClass::Panel => 11,
            },
        }
    }

    pub fn num_classes(self) -> usize {
        match self {
            IdSpace::Compact => 4,
            IdSpace::Sparse20 => 20,
        }
    }

    /// Display names indexed by label - 1.
    pub fn class_names(self) -> Vec<String> {
        let mut names: Vec<String> =
            (1..=self.num_classes()).map(|c| format!("class{c:02}")).collect();
        for class in SceneClass::ALL {
            names[(self.label(class) - 1) as usize] = class.name().to_string();
        }
        names
    }
}

/// Per-class display color.
pub fn palette(class: SceneClass) -> [u8; 3] {
    match class {
        SceneClass::Floor => [150, 120, 90],
        SceneClass::Wall => [200, 200, 200],
        SceneClass::Box => [50, 90, 200],
        SceneClass::Panel => [220, 60, 60],
    }
}

/// Color for an arbitrary label id under an id space (black if unknown).
pub fn label_color(id_space: IdSpace, label: u16) -> [u8; 3] {
    for class in SceneClass::ALL {
        if id_space.label(class) == label {
            return palette(class);
        }
    }
    [0, 0, 0]
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneRecipe {
    pub seed: u64,
    /// Room extents in meters (width = x, depth = y, height = z).
    pub width: f64,
    pub depth: f64,
    pub height: f64,
    /// Inclusive count ranges.
    pub boxes: (usize, usize),
    pub panels: (usize, usize),
    /// Target edge length for surface tessellation; `None` keeps each
    /// rectangle as two triangles.
    pub tessellation: Option<f64>,
    pub id_space: IdSpace,
}

impl Default for SceneRecipe {
    fn default() -> Self {
        SceneRecipe {
            seed: 0,
            width: 4.0,
            depth: 4.0,
            height: 2.5,
            boxes: (1, 3),
            panels: (1, 3),
            tessellation: Some(0.25),
            id_space: IdSpace::Compact,
        }
    }
}

/// One generated object and how many vertices it produced.
#[derive(Debug, Clone, PartialEq)]
pub struct PlacedObject {
    pub class: SceneClass,
    pub vertex_count: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PlacementLog {
    pub objects: Vec<PlacedObject>,
}

impl PlacementLog {
    pub fn vertex_count(&self, class: SceneClass) -> usize {
        self.objects
            .iter()
            .filter(|o| o.class == class)
            .map(|o| o.vertex_count)
            .sum()
    }
}

struct Builder {
    mesh: Mesh,
    log: PlacementLog,
    id_space: IdSpace,
    tessellation: Option<f64>,
}

impl Builder {
    fn new(id_space: IdSpace, tessellation: Option<f64>) -> Self {
        Builder {
            mesh: Mesh {
                vertices: Vec::new(),
                faces: Vec::new(),
                normals: None,
                colors: Some(Vec::new()),
                labels: Some(Vec::new()),
            },
            log: PlacementLog::default(),
            id_space,
            tessellation,
        }
    }

    /// Add a tessellated rectangle spanned by `u_vec` x `v_vec` from
    /// `origin`; the triangle winding makes the normal point along
    /// u_vec x v_vec. Vertices are not shared with other rectangles so
    /// labels stay crisp at object boundaries.
    fn add_quad(&mut self, origin: Vec3, u_vec: Vec3, v_vec: Vec3, class: SceneClass) -> usize {
        let (nu, nv) = match self.tessellation {
            Some(cell) => (
                (u_vec.norm() / cell).ceil().max(1.0) as usize,
                (v_vec.norm() / cell).ceil().max(1.0) as usize,
            ),
            None => (1, 1),
        };
        let base = self.mesh.vertices.len() as u32;
        let label = self.id_space.label(class);
        let color = palette(class);
        for j in 0..=nv {
            for i in 0..=nu {
                let p = origin
                    + u_vec * (i as f64 / nu as f64)
                    + v_vec * (j as f64 / nv as f64);
                self.mesh.vertices.push(p);
                self.mesh.colors.as_mut().unwrap().push(color);
                self.mesh.labels.as_mut().unwrap().push(label);
            }
        }
        let stride = (nu + 1) as u32;
        for j in 0..nv as u32 {
            for i in 0..nu as u32 {
                let a = base + j * stride + i;
                let b = a + 1;
                let c = a + stride;
                let d = c + 1;
                self.mesh.faces.push([a, b, d]);
                self.mesh.faces.push([a, d, c]);
            }
        }
        (nu + 1) * (nv + 1)
    }

    fn add_object(&mut self, class: SceneClass, quads: &[(Vec3, Vec3, Vec3)]) {
        let mut vertex_count = 0;
        for &(origin, u, v) in quads {
            vertex_count += self.add_quad(origin, u, v, class);
        }
        self.log.objects.push(PlacedObject { class, vertex_count });
    }
}

/// Footprint rectangle used for overlap rejection.
#[derive(Debug, Clone, Copy)]
struct Rect {
    x0: f64,
    y0: f64,
    x1: f64,
    y1: f64,
}

impl Rect {
    fn overlaps(&self, o: &Rect, gap: f64) -> bool {
        self.x0 - gap < o.x1 && o.x0 - gap < self.x1 && self.y0 - gap < o.y1 && o.y0 - gap < self.y1
    }
}

const PANEL_OFFSET: f64 = 0.02;
const MAX_ATTEMPTS: usize = 100;

/// Generate a labeled, colored room mesh. Deterministic given the recipe.
pub fn generate_scene(recipe: &SceneRecipe) -> Result<(Mesh, PlacementLog)> {
    if recipe.width <= 0.0 || recipe.depth <= 0.0 || recipe.height <= 0.0 {
        return Err(Error::InvalidConfig("room extents must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(recipe.seed);
    let mut b = Builder::new(recipe.id_space, recipe.tessellation);
    let (w, d, h) = (recipe.width, recipe.depth, recipe.height);

    // Shell: floor plus four inward-facing walls.
    b.add_object(
        SceneClass::Floor,
        &[(Vec3::ZERO, Vec3::new(w, 0.0, 0.0), Vec3::new(0.0, d, 0.0))],
    );
    let walls = [
        // y = 0, normal +y
        (Vec3::ZERO, Vec3::new(0.0, 0.0, h), Vec3::new(w, 0.0, 0.0)),
        // y = d, normal -y
        (Vec3::new(0.0, d, 0.0), Vec3::new(w, 0.0, 0.0), Vec3::new(0.0, 0.0, h)),
        // x = 0, normal +x
        (Vec3::ZERO, Vec3::new(0.0, d, 0.0), Vec3::new(0.0, 0.0, h)),
        // x = w, normal -x
        (Vec3::new(w, 0.0, 0.0), Vec3::new(0.0, 0.0, h), Vec3::new(0.0, d, 0.0)),
    ];
    for &(origin, u, v) in &walls {
        b.add_object(SceneClass::Wall, &[(origin, u, v)]);
    }

    // Boxes: rejection-sampled non-overlapping footprints, open bottom.
    let n_boxes = rng.random_range(recipe.boxes.0..=recipe.boxes.1);
    let mut footprints: Vec<Rect> = Vec::new();
    let margin = 0.3;
    for _ in 0..n_boxes {
        let mut placed = false;
        for _ in 0..MAX_ATTEMPTS {
            let max_bw = 1.0_f64.min(w - 2.0 * margin);
            let max_bd = 1.0_f64.min(d - 2.0 * margin);
            let max_bh = 0.9_f64.min(h);
            if max_bw <= 0.4 || max_bd <= 0.4 || max_bh <= 0.4 {
                continue;
            }
            let bw = rng.random_range(0.4..max_bw);
            let bd = rng.random_range(0.4..max_bd);
            let bh = rng.random_range(0.4..max_bh);
            let x0 = rng.random_range(margin..(w - margin - bw));
            let y0 = rng.random_range(margin..(d - margin - bd));
            let rect = Rect { x0, y0, x1: x0 + bw, y1: y0 + bd };
            if footprints.iter().any(|f| f.overlaps(&rect, 0.1)) {
                continue;
            }
            footprints.push(rect);
            let quads = [
                // top, normal +z
                (
                    Vec3::new(x0, y0, bh),
                    Vec3::new(bw, 0.0, 0.0),
                    Vec3::new(0.0, bd, 0.0),
                ),
                // y = y0 side, normal -y
                (
                    Vec3::new(x0, y0, 0.0),
                    Vec3::new(bw, 0.0, 0.0),
                    Vec3::new(0.0, 0.0, bh),
                ),
                // y = y1 side, normal +y
                (
                    Vec3::new(x0, y0 + bd, 0.0),
                    Vec3::new(0.0, 0.0, bh),
                    Vec3::new(bw, 0.0, 0.0),
                ),
                // x = x0 side, normal -x
                (
                    Vec3::new(x0, y0, 0.0),
                    Vec3::new(0.0, 0.0, bh),
                    Vec3::new(0.0, bd, 0.0),
                ),
                // x = x1 side, normal +x
                (
                    Vec3::new(x0 + bw, y0, 0.0),
                    Vec3::new(0.0, bd, 0.0),
                    Vec3::new(0.0, 0.0, bh),
                ),
            ];
            b.add_object(SceneClass::Box, &quads);
            placed = true;
            break;
        }
        if !placed {
            return Err(Error::PlacementFailed(MAX_ATTEMPTS));
        }
    }

    // Panels: thin rectangles hung slightly off a wall, facing inward.
    let n_panels = rng.random_range(recipe.panels.0..=recipe.panels.1);
    let mut spans: Vec<(usize, Rect)> = Vec::new(); // (wall, tangential span)
    for _ in 0..n_panels {
        let mut placed = false;
        for _ in 0..MAX_ATTEMPTS {
            let wall = rng.random_range(0..4usize);
            let along = if wall < 2 { w } else { d };
            let max_pw = 0.9_f64.min(along - 0.4);
            if max_pw <= 0.4 {
                continue;
            }
            let pw = rng.random_range(0.4..max_pw);
            let max_ph = 0.6_f64.min(h - 1.0 - 0.05);
            if max_ph <= 0.3 {
                continue;
            }
            let ph = rng.random_range(0.3..max_ph);
            let t0 = rng.random_range(0.2..(along - 0.2 - pw));
            let z0 = rng.random_range(1.0..(h - ph).min(1.8));
            let span = Rect { x0: t0, y0: z0, x1: t0 + pw, y1: z0 + ph };
            if spans
                .iter()
                .any(|(sw, s)| *sw == wall && s.overlaps(&span, 0.05))
            {
                continue;
            }
            spans.push((wall, span));
            let quad = match wall {
                // wall y = 0, panel faces +y
                0 => (
                    Vec3::new(t0, PANEL_OFFSET, z0),
                    Vec3::new(0.0, 0.0, ph),
                    Vec3::new(pw, 0.0, 0.0),
                ),
                // wall y = d, faces -y
                1 => (
                    Vec3::new(t0, d - PANEL_OFFSET, z0),
                    Vec3::new(pw, 0.0, 0.0),
                    Vec3::new(0.0, 0.0, ph),
                ),
                // wall x = 0, faces +x
                2 => (
                    Vec3::new(PANEL_OFFSET, t0, z0),
                    Vec3::new(0.0, pw, 0.0),
                    Vec3::new(0.0, 0.0, ph),
                ),
                // wall x = w, faces -x
                _ => (
                    Vec3::new(w - PANEL_OFFSET, t0, z0),
                    Vec3::new(0.0, 0.0, ph),
                    Vec3::new(0.0, pw, 0.0),
                ),
            };
            b.add_object(SceneClass::Panel, &[quad]);
            placed = true;
            break;
        }
        if !placed {
            return Err(Error::PlacementFailed(MAX_ATTEMPTS));
        }
    }

    b.mesh.validate()?;
    Ok((b.mesh, b.log))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    fn empty_recipe() -> SceneRecipe {
        SceneRecipe {
            boxes: (0, 0),
            panels: (0, 0),
            tessellation: None,
            ..Default::default()
        }
    }

    #[test]
    fn empty_room_is_a_ten_face_shell() {
        let (mesh, log) = generate_scene(&empty_recipe()).unwrap();
        assert_eq!(mesh.face_count(), 10); // floor 2 + walls 8
        assert_eq!(log.objects.len(), 5);
        let labels = mesh.labels.as_ref().unwrap();
        let floor = IdSpace::Compact.label(SceneClass::Floor);
        let wall = IdSpace::Compact.label(SceneClass::Wall);
        assert!(labels.iter().all(|&l| l == floor || l == wall));
    }

    #[test]
    fn generation_is_deterministic() {
        let recipe = SceneRecipe { seed: 7, ..Default::default() };
        let (a, log_a) = generate_scene(&recipe).unwrap();
        let (b, log_b) = generate_scene(&recipe).unwrap();
        assert_eq!(a, b);
        assert_eq!(log_a, log_b);
        let (c, _) = generate_scene(&SceneRecipe { seed: 8, ..Default::default() }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn label_histogram_matches_placement_log() {
        let recipe = SceneRecipe { seed: 42, boxes: (2, 4), panels: (1, 3), ..Default::default() };
        let (mesh, log) = generate_scene(&recipe).unwrap();
        let labels = mesh.labels.as_ref().unwrap();
        let mut histogram: HashMap<u16, usize> = HashMap::new();
        for &l in labels {
            *histogram.entry(l).or_default() += 1;
        }
        for class in SceneClass::ALL {
            let label = recipe.id_space.label(class);
            assert_eq!(
                histogram.get(&label).copied().unwrap_or(0),
                log.vertex_count(class),
                "class {class:?}"
            );
        }
    }

    #[test]
    fn sparse_id_space_uses_20_classes() {
        let recipe = SceneRecipe { seed: 3, id_space: IdSpace::Sparse20, ..Default::default() };
        let (mesh, _) = generate_scene(&recipe).unwrap();
        let labels = mesh.labels.as_ref().unwrap();
        assert!(labels.iter().all(|&l| [1, 2, 3, 11].contains(&l)));
        assert_eq!(IdSpace::Sparse20.num_classes(), 20);
        let names = IdSpace::Sparse20.class_names();
        assert_eq!(names[0], "wall");
        assert_eq!(names[10], "panel");
        assert_eq!(names[4], "class05");
    }

    #[test]
    fn colors_follow_the_palette() {
        let (mesh, _) = generate_scene(&SceneRecipe { seed: 1, ..Default::default() }).unwrap();
        let labels = mesh.labels.as_ref().unwrap();
        let colors = mesh.colors.as_ref().unwrap();
        for (l, c) in labels.iter().zip(colors) {
            assert_eq!(*c, label_color(IdSpace::Compact, *l));
        }
    }

    #[test]
    fn tessellation_densifies_the_mesh() {
        let coarse = generate_scene(&empty_recipe()).unwrap().0;
        let recipe = SceneRecipe { tessellation: Some(0.25), ..empty_recipe() };
        let fine = generate_scene(&recipe).unwrap().0;
        assert!(fine.vertex_count() > coarse.vertex_count() * 10);
        // Inward wall normals: computed normals at wall vertices should
        // point into the room (dot with direction to room center > 0 for
        // interior wall vertices).
        let normals = crate::geometry::compute_vertex_normals(&fine);
        let labels = fine.labels.as_ref().unwrap();
        let wall = IdSpace::Compact.label(SceneClass::Wall);
        let center = Vec3::new(2.0, 2.0, 1.25);
        let mut checked = 0;
        for v in 0..fine.vertex_count() {
            if labels[v] != wall {
                continue;
            }
            let p = fine.vertices[v];
            // Skip room corners/edges where adjacent walls meet.
            let interior = p.z > 0.3
                && p.z < 2.2
                && [p.x, p.y]
                    .iter()
                    .filter(|&&t| t > 0.3 && t < 3.7)
                    .count()
                    == 1;
            if !interior {
                continue;
            }
            let to_center = Vec3::new(center.x - p.x, center.y - p.y, 0.0).normalize_or_zero();
            assert!(normals[v].dot(to_center) > 0.5, "wall normal points outward at {p:?}");
            checked += 1;
        }
        assert!(checked > 50);
    }

    #[test]
    fn low_room_skips_boxes_instead_of_panicking() {
        let recipe = SceneRecipe {
            height: 0.35, // below the minimum box height
            boxes: (1, 1),
            panels: (0, 0),
            ..Default::default()
        };
        assert!(matches!(
            generate_scene(&recipe),
            Err(Error::PlacementFailed(_))
        ));
    }

    #[test]
    fn impossible_placement_errors() {
        // Tiny room cannot fit any 0.4 m box with margins.
        let recipe = SceneRecipe {
            width: 1.0,
            depth: 1.0,
            boxes: (30, 30),
            panels: (0, 0),
            ..Default::default()
        };
        assert!(matches!(
            generate_scene(&recipe),
            Err(Error::PlacementFailed(_)) | Err(Error::InvalidConfig(_))
        ));
    }
}
