// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

//! Hypergraph stochastic block models: seeded sampling, iterated spectral
//! projection recovery, a pairwise counting baseline, and Monte-Carlo audits
//! of the closed-form spectral quantities that govern exact recovery.
//!
//! Vertex ids are 0-based throughout the library API. Files and the CLI use
//! 1-based ids; conversion happens only in [`io`].

#![allow(clippy::needless_range_loop)]

pub mod analysis;
pub mod combinatorics;
mod error;
pub mod hypergraph;
pub mod io;
pub mod linalg;
pub mod partition;
pub mod recovery;
pub mod spectral;

pub use error::{Error, Result};
pub use hypergraph::{HsbmParams, UniformHypergraph};
pub use linalg::{EigenSystem, SymmetricMatrix};
pub use partition::Partition;
