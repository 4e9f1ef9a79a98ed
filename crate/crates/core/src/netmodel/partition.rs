//! The D\* refinement of Δ(D) for a species partition [A, B, D].

use serde::Serialize;

use super::{NetworkError, ReactionNetwork, ReactionSet, SpeciesSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Block {
    /// Changes D and A but not B.
    A,
    /// Changes D, A and B.
    AB,
    /// Changes D and B but not A.
    B,
    /// Changes D only.
    D,
}

impl Block {
    pub const ALL: [Block; 4] = [Block::A, Block::AB, Block::B, Block::D];
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DstarBlock {
    pub block: Block,
    pub reactions: ReactionSet,
    /// Classes of `reactions` with equal S^D, ordered by S^D.
    pub classes: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PartitionAbd {
    pub a: SpeciesSet,
    pub b: SpeciesSet,
    pub d: SpeciesSet,
    pub delta_a: ReactionSet,
    pub delta_b: ReactionSet,
    pub delta_d: ReactionSet,
    /// Blocks in the order A, AB, B, D.
    pub blocks: [DstarBlock; 4],
}

impl PartitionAbd {
    pub fn block(&self, b: Block) -> &DstarBlock {
        &self.blocks[b as usize]
    }

    /// M\*(Δ(D)): every class of every block, tagged with its block.
    pub fn dstar_classes(&self) -> Vec<(Block, Vec<usize>)> {
        self.blocks.iter().flat_map(|b| b.classes.iter().map(move |c| (b.block, c.clone()))).collect()
    }

    /// Which block a reaction of Δ(D) falls in.
    pub fn block_of(&self, m: usize) -> Option<Block> {
        self.blocks.iter().find(|b| b.reactions.contains(&m)).map(|b| b.block)
    }
}

impl ReactionNetwork {
    /// D\* partition of a proper partition [A, B, D] of the species set, all
    /// three cells nonempty.
    pub fn dstar_partition(
        &self,
        a: &SpeciesSet,
        b: &SpeciesSet,
        d: &SpeciesSet,
    ) -> Result<PartitionAbd, NetworkError> {
        for (name, cell) in [("A", a), ("B", b), ("D", d)] {
            if cell.is_empty() {
                return Err(NetworkError::EmptyCell(name));
            }
        }
        let n = self.n_species();
        let mut seen = vec![false; n];
        for &k in a.iter().chain(b).chain(d) {
            if k >= n {
                return Err(NetworkError::SpeciesIndex(k));
            }
            if seen[k] {
                return Err(NetworkError::NotAPartition(format!("species {} is in two cells", self.species_id(k))));
            }
            seen[k] = true;
        }
        if let Some(k) = seen.iter().position(|s| !s) {
            return Err(NetworkError::NotAPartition(format!("species {} is in no cell", self.species_id(k))));
        }
        Ok(self.dstar_unchecked(a, b, d))
    }

    /// D\* partition for disjoint but possibly empty cells that need not
    /// cover the species set. Module checks use this, since a module's
    /// separator or complement can be empty.
    pub fn dstar_relaxed(
        &self,
        a: &SpeciesSet,
        b: &SpeciesSet,
        d: &SpeciesSet,
    ) -> Result<PartitionAbd, NetworkError> {
        let n = self.n_species();
        let mut seen = vec![false; n];
        for &k in a.iter().chain(b).chain(d) {
            if k >= n {
                return Err(NetworkError::SpeciesIndex(k));
            }
            if seen[k] {
                return Err(NetworkError::NotAPartition(format!("species {} is in two cells", self.species_id(k))));
            }
            seen[k] = true;
        }
        Ok(self.dstar_unchecked(a, b, d))
    }

    fn dstar_unchecked(&self, a: &SpeciesSet, b: &SpeciesSet, d: &SpeciesSet) -> PartitionAbd {
        let delta_a = self.delta(a);
        let delta_b = self.delta(b);
        let delta_d = self.delta(d);
        let mut members: [ReactionSet; 4] = Default::default();
        for &m in &delta_d {
            let block = match (delta_a.contains(&m), delta_b.contains(&m)) {
                (true, false) => Block::A,
                (true, true) => Block::AB,
                (false, true) => Block::B,
                (false, false) => Block::D,
            };
            members[block as usize].insert(m);
        }
        let blocks = Block::ALL.map(|block| {
            let reactions = std::mem::take(&mut members[block as usize]);
            let classes = self.classes_by(d, &reactions);
            DstarBlock { block, reactions, classes }
        });
        PartitionAbd { a: a.clone(), b: b.clone(), d: d.clone(), delta_a, delta_b, delta_d, blocks }
    }
}
