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

//! Hierarchical temporal-to-spatial feature map (TSFMap).
//!
//! A self-organizing dynamical system that places one weight per input
//! variable in a small `k`-dimensional space. Variables that fire close
//! together in time are pulled together; everything else is pushed away.
//! After enough input the spatial layout mirrors the temporal correlation
//! structure, and agglomerative clustering of the weights recovers a
//! multi-level chunk hierarchy.
//!
//! The crate is organised the same way a run flows:
//!
//! * [`encoding`] turns a symbol sequence into decaying activation vectors.
//! * [`dynamics`] holds the weight map and its attraction/repulsion update.
//! * [`chunking`] extracts a multi-level partition from any point set.
//! * [`envgen`] builds benchmark environments and random-walk sequences.
//! * [`baselines`] implements the transition-matrix and modularity baselines.
//! * [`eval`] scores predictions with per-level NMI and runs experiments.
//! * [`io`] reads and writes the plain-text file formats.

pub mod baselines;
pub mod chunking;
pub mod dynamics;
pub mod encoding;
pub mod envgen;
mod error;
pub mod eval;
pub mod io;

pub use error::{Error, Result};
