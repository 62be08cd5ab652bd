//! Parameter layout: every tensor is a named window into one flat vector.

use std::sync::OnceLock;

use eig_core::{ActionKind, EdgeKind, NodeKind, RoleId};

pub const TEXT_DIM: usize = 384;
pub const EMBED_DIM: usize = 16;
pub const HIDDEN: usize = 128;
pub const LAYERS: usize = 2;
pub const NODE_INPUT: usize = TEXT_DIM + 2 * EMBED_DIM + 2;
pub const UPDATE_INPUT: usize = 2 * HIDDEN + 3;
pub const EDIT_INPUT: usize = 3 * HIDDEN + TEXT_DIM + EMBED_DIM + TEXT_DIM;
pub const COMMIT_FEATURES: usize = 3;
pub const COMMIT_INPUT: usize = HIDDEN + TEXT_DIM + COMMIT_FEATURES;
pub const RELATIONS: usize = 7;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockRole {
    Embedding,
    Matrix,
    Bias,
    Gain,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Block {
    pub offset: usize,
    pub rows: usize,
    pub cols: usize,
    pub role: BlockRole,
}

impl Block {
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.len()
    }

    /// Row `i` of a row-major matrix or embedding table.
    pub fn row(&self, i: usize) -> std::ops::Range<usize> {
        let start = self.offset + i * self.cols;
        start..start + self.cols
    }

    pub fn shape(&self) -> Vec<usize> {
        if self.rows == 1 {
            vec![self.cols]
        } else {
            vec![self.rows, self.cols]
        }
    }
}

#[derive(Debug)]
pub struct Layout {
    pub node_type: Block,
    pub role: Block,
    pub cand_kind: Block,
    pub in_w1: Block,
    pub in_b1: Block,
    pub in_w2: Block,
    pub in_b2: Block,
    pub relation: [[Block; RELATIONS]; LAYERS],
    pub upd_w1: [Block; LAYERS],
    pub upd_b1: [Block; LAYERS],
    pub upd_w2: [Block; LAYERS],
    pub upd_b2: [Block; LAYERS],
    pub ln_gain: [Block; LAYERS],
    pub ln_bias: [Block; LAYERS],
    pub edit_w1: Block,
    pub edit_b1: Block,
    pub edit_w2: Block,
    pub edit_b2: Block,
    pub commit_w1: Block,
    pub commit_b1: Block,
    pub commit_w2: Block,
    pub commit_b2: Block,
    pub len: usize,
    named: Vec<(String, Block)>,
}

struct Builder {
    next: usize,
    named: Vec<(String, Block)>,
}

impl Builder {
    fn add(&mut self, name: impl Into<String>, rows: usize, cols: usize, role: BlockRole) -> Block {
        let b = Block {
            offset: self.next,
            rows,
            cols,
            role,
        };
        self.next += rows * cols;
        self.named.push((name.into(), b));
        b
    }
}

impl Layout {
    fn build() -> Layout {
        use BlockRole::*;
        let mut b = Builder {
            next: 0,
            named: Vec::new(),
        };
        let node_type = b.add("embed.node_type", NodeKind::ALL.len(), EMBED_DIM, Embedding);
        let role = b.add("embed.role", RoleId::ALL.len(), EMBED_DIM, Embedding);
        let cand_kind = b.add("embed.candidate_kind", ActionKind::ALL.len(), EMBED_DIM, Embedding);
        let in_w1 = b.add("input.w1", HIDDEN, NODE_INPUT, Matrix);
        let in_b1 = b.add("input.b1", 1, HIDDEN, Bias);
        let in_w2 = b.add("input.w2", HIDDEN, HIDDEN, Matrix);
        let in_b2 = b.add("input.b2", 1, HIDDEN, Bias);
        let mut relation = [[in_b2; RELATIONS]; LAYERS];
        for (l, layer) in relation.iter_mut().enumerate() {
            for (r, slot) in layer.iter_mut().enumerate() {
                *slot = b.add(format!("layer{l}.relation.{}", EdgeKind::ALL[r]), HIDDEN, HIDDEN, Matrix);
            }
        }
        let mut upd = Vec::new();
        for l in 0..LAYERS {
            upd.push([
                b.add(format!("layer{l}.update.w1"), HIDDEN, UPDATE_INPUT, Matrix),
                b.add(format!("layer{l}.update.b1"), 1, HIDDEN, Bias),
                b.add(format!("layer{l}.update.w2"), HIDDEN, HIDDEN, Matrix),
                b.add(format!("layer{l}.update.b2"), 1, HIDDEN, Bias),
                b.add(format!("layer{l}.norm.gain"), 1, HIDDEN, Gain),
                b.add(format!("layer{l}.norm.bias"), 1, HIDDEN, Bias),
            ]);
        }
        let pick = |i: usize| [upd[0][i], upd[1][i]];
        let edit_w1 = b.add("edit.w1", HIDDEN, EDIT_INPUT, Matrix);
        let edit_b1 = b.add("edit.b1", 1, HIDDEN, Bias);
        let edit_w2 = b.add("edit.w2", 1, HIDDEN, Matrix);
        let edit_b2 = b.add("edit.b2", 1, 1, Bias);
        let commit_w1 = b.add("commit.w1", HIDDEN, COMMIT_INPUT, Matrix);
        let commit_b1 = b.add("commit.b1", 1, HIDDEN, Bias);
        let commit_w2 = b.add("commit.w2", 1, HIDDEN, Matrix);
        let commit_b2 = b.add("commit.b2", 1, 1, Bias);
        Layout {
            node_type,
            role,
            cand_kind,
            in_w1,
            in_b1,
            in_w2,
            in_b2,
            relation,
            upd_w1: pick(0),
            upd_b1: pick(1),
            upd_w2: pick(2),
            upd_b2: pick(3),
            ln_gain: pick(4),
            ln_bias: pick(5),
            edit_w1,
            edit_b1,
            edit_w2,
            edit_b2,
            commit_w1,
            commit_b1,
            commit_w2,
            commit_b2,
            len: b.next,
            named: b.named,
        }
    }

    pub fn get() -> &'static Layout {
        static LAYOUT: OnceLock<Layout> = OnceLock::new();
        LAYOUT.get_or_init(Layout::build)
    }

    /// All blocks in storage order with their manifest names.
    pub fn blocks(&self) -> &[(String, Block)] {
        &self.named
    }
}
