use super::{split_cell, BoxTree, Cell, Domain, Label};

/// Cells of a tiling of `domain`, bucketed by label.
#[derive(Clone, Debug, PartialEq)]
pub struct Partition {
    pub domain: Domain,
    pub pending: Vec<Cell>,
    pub safe: Vec<Cell>,
    pub unsafe_cells: Vec<Cell>,
    next_id: u64,
}

impl Partition {
    /// Tiles `domain` with cubes of `radius` anchored at the lower corner. Cubes that
    /// overhang the upper bound are kept and clipped by every geometric query.
    pub fn tile(domain: Domain, radius: f64) -> Self {
        assert!(radius > 0.0);
        let n = domain.dim();
        let counts: Vec<usize> = (0..n)
            .map(|i| ((domain.extent(i) / (2.0 * radius)) * (1.0 - 1e-12)).ceil().max(1.0) as usize)
            .collect();
        let total: usize = counts.iter().product();
        let mut pending = Vec::with_capacity(total);
        let mut idx = vec![0usize; n];
        for id in 0..total {
            let mut rem = id;
            for i in (0..n).rev() {
                idx[i] = rem % counts[i];
                rem /= counts[i];
            }
            let center = (0..n)
                .map(|i| domain.lower[i] + (2.0 * idx[i] as f64 + 1.0) * radius)
                .collect();
            pending.push(Cell::new(id as u64, center, radius));
        }
        Partition { domain, pending, safe: Vec::new(), unsafe_cells: Vec::new(), next_id: total as u64 }
    }

    /// Rebuilds a partition from labelled cells (e.g. read back from disk).
    pub fn from_cells(domain: Domain, cells: Vec<Cell>) -> Self {
        let next_id = cells.iter().map(|c| c.id + 1).max().unwrap_or(0);
        let mut p = Partition { domain, pending: Vec::new(), safe: Vec::new(), unsafe_cells: Vec::new(), next_id };
        for c in cells {
            p.push(c);
        }
        p
    }

    pub fn push(&mut self, cell: Cell) {
        match cell.label {
            Label::Pending => self.pending.push(cell),
            Label::Safe => self.safe.push(cell),
            Label::Unsafe => self.unsafe_cells.push(cell),
        }
    }

    pub fn next_id(&self) -> u64 {
        self.next_id
    }

    /// Splits `cell` and returns the children that overlap the domain with positive volume.
    pub fn split(&mut self, cell: &Cell) -> Vec<Cell> {
        let kids = split_cell(cell, self.next_id);
        self.next_id += kids.len() as u64;
        kids.into_iter().filter(|k| k.clipped(&self.domain).is_some()).collect()
    }

    pub fn len(&self) -> usize {
        self.pending.len() + self.safe.len() + self.unsafe_cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All cells sorted by id.
    pub fn cells(&self) -> Vec<&Cell> {
        let mut all: Vec<&Cell> = self.pending.iter().chain(&self.safe).chain(&self.unsafe_cells).collect();
        all.sort_by_key(|c| c.id);
        all
    }

    /// Point-location index over every cell.
    pub fn locator(&self) -> CellLocator {
        CellLocator::new(&self.domain, self.cells().into_iter())
    }

    pub fn safe_volume(&self) -> f64 {
        volume(&self.safe, &self.domain)
    }

    pub fn unsafe_volume(&self) -> f64 {
        volume(&self.unsafe_cells, &self.domain)
    }
}

/// Total volume of `cells` clipped to `domain`.
pub fn volume(cells: &[Cell], domain: &Domain) -> f64 {
    cells.iter().filter_map(|c| c.clipped(domain)).map(|b| b.volume()).fold(0.0, |a, v| a + v)
}

/// Maps points to the (smallest-id) cell containing them.
#[derive(Clone, Debug)]
pub struct CellLocator {
    tree: BoxTree,
    labels: std::collections::HashMap<u64, Label>,
}

impl CellLocator {
    pub fn new<'a>(domain: &Domain, cells: impl Iterator<Item = &'a Cell>) -> Self {
        let mut boxes = Vec::new();
        let mut keys = Vec::new();
        let mut labels = std::collections::HashMap::new();
        for c in cells {
            if let Some(b) = c.clipped(domain) {
                boxes.push(b);
                keys.push(c.id);
                labels.insert(c.id, c.label);
            }
        }
        CellLocator { tree: BoxTree::new(domain, boxes, keys), labels }
    }

    pub fn locate(&self, x: &[f64]) -> Option<(u64, Label)> {
        self.tree.locate(x).map(|id| (id, self.labels[&id]))
    }
}
